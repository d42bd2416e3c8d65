//! Flat `[section]` / `key = value` run configuration.
//!
//! Parsing never stops at the first problem: every unknown key, malformed
//! value, violated constraint and missing required key is collected with the
//! line it refers to.

use std::collections::BTreeMap;
use std::fmt;

use rhd_core::grid::{Boundary, SpatialGrid};
use rhd_core::norms::NormSettings;
use rhd_core::physics::{EquationOfState, PhysicalConstants, ViscosityParams};
use rhd_core::picard::{ContinuityScheme, DeltaSchedule, SlabConfig};
use rhd_core::quadrature::{AngularQuadrature, FrequencyGrid};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    /// 1-based line; for a missing key, the line of its section header (or
    /// one past the last line when the section is absent).
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub cells: Vec<usize>,
    pub lengths: Vec<f64>,
    pub boundary: Boundary,
    /// Far-field (reference) density; scenario default when absent.
    pub rho_bar: Option<f64>,
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn build(&self, rho_bar: f64) -> rhd_core::Result<SpatialGrid<f64>> {
        let spacing: Vec<f64> = self
            .cells
            .iter()
            .zip(&self.lengths)
            .map(|(n, l)| l / *n as f64)
            .collect();
        SpatialGrid::new(&self.cells, &spacing, self.boundary, Some(rho_bar))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    /// Slab ordinates in 1D, polar nodes otherwise.
    pub ordinates: usize,
    /// Azimuthal nodes (2D/3D only).
    pub azimuths: usize,
    pub band_edges: Vec<f64>,
}

impl QuadratureSpec {
    pub fn angular(&self, dim: usize) -> rhd_core::Result<AngularQuadrature<f64>> {
        if dim == 1 {
            AngularQuadrature::slab(self.ordinates)
        } else {
            AngularQuadrature::sphere(self.ordinates, self.azimuths)
        }
    }

    pub fn frequency(&self) -> rhd_core::Result<FrequencyGrid<f64>> {
        FrequencyGrid::new(self.band_edges.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EosSpec {
    Polytropic { a: f64, gamma: f64 },
    Table { rho: Vec<f64>, p: Vec<f64> },
}

impl EosSpec {
    pub fn build(&self) -> rhd_core::Result<EquationOfState<f64>> {
        match self {
            Self::Polytropic { a, gamma } => EquationOfState::polytropic(*a, *gamma),
            Self::Table { rho, p } => EquationOfState::table(rho.clone(), p.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScatterSpec {
    None,
    Isotropic {
        strength: f64,
    },
    Gaussian {
        strength: f64,
        width: f64,
        cutoff: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// No absorption, scattering or model emission.
    Zero,
    Gray {
        kappa: f64,
        scatter: f64,
    },
    Compton {
        d1: f64,
        d2: f64,
        v0: f64,
        theta: f64,
        scattering: ScatterSpec,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    /// Radius of the far-field bounds check (default depends on the scenario).
    pub radius: Option<f64>,
    /// Scenario-specific amplitude override.
    pub amplitude: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub t_final: f64,
    pub snapshot_every: usize,
    pub output_dir: Option<String>,
    pub write_snapshots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationSpec {
    pub deltas: Vec<f64>,
    pub extrapolate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub quadrature: QuadratureSpec,
    pub eos: EosSpec,
    pub mu: f64,
    pub lambda: f64,
    pub c: f64,
    pub model: ModelSpec,
    pub scenario: ScenarioSpec,
    pub slab: SlabConfig<f64>,
    pub continuation: Option<ContinuationSpec>,
    pub run: RunSpec,
    pub q: f64,
}

impl RunConfig {
    pub fn viscosity(&self) -> ViscosityParams<f64> {
        ViscosityParams::new(self.mu, self.lambda).expect("validated at parse time")
    }

    pub fn constants(&self) -> PhysicalConstants<f64> {
        PhysicalConstants::new(self.c).expect("validated at parse time")
    }

    pub fn norm_settings(&self) -> NormSettings<f64> {
        NormSettings::new(self.q).expect("validated at parse time")
    }

    pub fn delta_schedule(&self) -> Option<DeltaSchedule<f64>> {
        self.continuation.as_ref().map(|c| {
            DeltaSchedule::new(c.deltas.clone(), c.extrapolate).expect("validated at parse time")
        })
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("grid", &["cells", "lengths", "boundary", "rho_bar"]),
    (
        "quadrature",
        &[
            "ordinates",
            "azimuths",
            "bands",
            "v_min",
            "v_max",
            "band_edges",
        ],
    ),
    ("eos", &["kind", "a", "gamma", "table_rho", "table_p"]),
    ("viscosity", &["mu", "lambda"]),
    ("radiation", &["c"]),
    (
        "model",
        &[
            "kind",
            "kappa",
            "scatter",
            "d1",
            "d2",
            "v0",
            "theta",
            "scattering",
            "scatter_strength",
            "scatter_width",
            "scatter_cutoff",
        ],
    ),
    ("scenario", &["name", "radius", "amplitude"]),
    (
        "slab",
        &[
            "length",
            "dt",
            "max_iters",
            "gamma_tol",
            "halve_on_stall",
            "max_halvings",
            "continuity",
        ],
    ),
    ("continuation", &["deltas", "extrapolate"]),
    (
        "run",
        &["t_final", "snapshot_every", "output_dir", "write_snapshots"],
    ),
    ("norms", &["q"]),
];

struct Raw {
    entries: BTreeMap<(String, String), (String, usize)>,
    sections: BTreeMap<String, usize>,
    last_line: usize,
}

fn lex(text: &str, issues: &mut Vec<ConfigIssue>) -> Raw {
    let mut raw = Raw {
        entries: BTreeMap::new(),
        sections: BTreeMap::new(),
        last_line: text.lines().count() + 1,
    };
    let mut section: Option<String> = None;
    for (k, line) in text.lines().enumerate() {
        let ln = k + 1;
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') || l.starts_with(';') {
            continue;
        }
        if let Some(name) = l.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                issues.push(ConfigIssue {
                    line: ln,
                    message: format!("unknown section [{name}]"),
                });
                section = None;
                continue;
            }
            if raw.sections.contains_key(&name) {
                issues.push(ConfigIssue {
                    line: ln,
                    message: format!("section [{name}] repeated"),
                });
            }
            raw.sections.entry(name.clone()).or_insert(ln);
            section = Some(name);
            continue;
        }
        let Some((key, value)) = l.split_once('=') else {
            issues.push(ConfigIssue {
                line: ln,
                message: format!("expected `key = value`, got `{l}`"),
            });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = &section else {
            issues.push(ConfigIssue {
                line: ln,
                message: format!("key `{key}` outside a known section"),
            });
            continue;
        };
        let known = KEYS
            .iter()
            .find(|(s, _)| s == sec)
            .is_some_and(|(_, ks)| ks.contains(&key));
        if !known {
            issues.push(ConfigIssue {
                line: ln,
                message: format!("unknown key `{key}` in [{sec}]"),
            });
            continue;
        }
        if raw
            .entries
            .insert((sec.clone(), key.to_string()), (value.to_string(), ln))
            .is_some()
        {
            issues.push(ConfigIssue {
                line: ln,
                message: format!("key `{key}` repeated in [{sec}]"),
            });
        }
    }
    raw
}

struct Reader<'a> {
    raw: &'a Raw,
    issues: &'a mut Vec<ConfigIssue>,
}

impl Reader<'_> {
    fn line(&self, sec: &str, key: &str) -> usize {
        self.raw
            .entries
            .get(&(sec.to_string(), key.to_string()))
            .map(|e| e.1)
            .or_else(|| self.raw.sections.get(sec).copied())
            .unwrap_or(self.raw.last_line)
    }

    fn issue(&mut self, sec: &str, key: &str, message: String) {
        let line = self.line(sec, key);
        self.issues.push(ConfigIssue {
            line,
            message: format!("[{sec}] {key}: {message}"),
        });
    }

    fn get(&self, sec: &str, key: &str) -> Option<&str> {
        self.raw
            .entries
            .get(&(sec.to_string(), key.to_string()))
            .map(|e| e.0.as_str())
    }

    fn has(&self, sec: &str, key: &str) -> bool {
        self.get(sec, key).is_some()
    }

    fn parse<V: std::str::FromStr>(&mut self, sec: &str, key: &str) -> Option<V> {
        let v = self.get(sec, key)?.to_string();
        match v.parse() {
            Ok(x) => Some(x),
            Err(_) => {
                self.issue(sec, key, format!("cannot parse `{v}`"));
                None
            }
        }
    }

    fn or<V: std::str::FromStr>(&mut self, sec: &str, key: &str, default: V) -> V {
        self.parse(sec, key).unwrap_or(default)
    }

    fn required<V: std::str::FromStr>(&mut self, sec: &str, key: &str) -> Option<V> {
        if !self.has(sec, key) {
            self.issue(sec, key, "missing required key".into());
            return None;
        }
        self.parse(sec, key)
    }

    fn list<V: std::str::FromStr>(&mut self, sec: &str, key: &str) -> Option<Vec<V>> {
        let v = self.get(sec, key)?.to_string();
        let parsed: Result<Vec<V>, _> = v.split(',').map(|t| t.trim().parse()).collect();
        match parsed {
            Ok(x) if !x.is_empty() => Some(x),
            _ => {
                self.issue(sec, key, format!("cannot parse list `{v}`"));
                None
            }
        }
    }

    fn bool_or(&mut self, sec: &str, key: &str, default: bool) -> bool {
        match self.get(sec, key) {
            None => default,
            Some("true" | "yes" | "1") => true,
            Some("false" | "no" | "0") => false,
            Some(v) => {
                let v = v.to_string();
                self.issue(sec, key, format!("expected true/false, got `{v}`"));
                default
            }
        }
    }

    fn check(&mut self, sec: &str, key: &str, r: rhd_core::Result<impl Sized>) {
        if let Err(e) = r {
            self.issue(sec, key, e.to_string());
        }
    }
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut issues = Vec::new();
    let raw = lex(text, &mut issues);
    let mut r = Reader {
        raw: &raw,
        issues: &mut issues,
    };

    // grid
    let cells: Vec<usize> = r.list("grid", "cells").unwrap_or_else(|| vec![64]);
    let dim = cells.len();
    let lengths: Vec<f64> = r.list("grid", "lengths").unwrap_or_else(|| vec![1.0; dim]);
    if lengths.len() != dim {
        r.issue(
            "grid",
            "lengths",
            format!("{} lengths for {dim} axes", lengths.len()),
        );
    }
    if !(1..=3).contains(&dim) {
        r.issue(
            "grid",
            "cells",
            format!("grid dimension {dim} not in 1..=3"),
        );
    }
    let boundary = match r.get("grid", "boundary").unwrap_or("farfield") {
        "farfield" => Boundary::Farfield,
        "periodic" => Boundary::Periodic,
        other => {
            let other = other.to_string();
            r.issue(
                "grid",
                "boundary",
                format!("expected farfield or periodic, got `{other}`"),
            );
            Boundary::Farfield
        }
    };
    let rho_bar: Option<f64> = r.parse("grid", "rho_bar");
    let grid = GridSpec {
        cells,
        lengths,
        boundary,
        rho_bar,
    };
    if grid.lengths.len() == dim && (1..=3).contains(&dim) {
        let res = grid.build(rho_bar.unwrap_or(1.0));
        r.check("grid", "cells", res);
    }

    // quadrature
    let ordinates = r.or("quadrature", "ordinates", 8usize);
    let azimuths = r.or("quadrature", "azimuths", 8usize);
    let band_edges = if r.has("quadrature", "band_edges") {
        for k in ["bands", "v_min", "v_max"] {
            if r.has("quadrature", k) {
                r.issue("quadrature", k, "conflicts with band_edges".into());
            }
        }
        r.list("quadrature", "band_edges").unwrap_or_default()
    } else {
        let bands = r.or("quadrature", "bands", 4usize);
        let (lo, hi) = (
            r.or("quadrature", "v_min", 0.1),
            r.or("quadrature", "v_max", 4.1),
        );
        if bands == 0 {
            r.issue("quadrature", "bands", "at least one band required".into());
            Vec::new()
        } else {
            (0..=bands)
                .map(|k| lo + (hi - lo) * k as f64 / bands as f64)
                .collect()
        }
    };
    let quadrature = QuadratureSpec {
        ordinates,
        azimuths,
        band_edges,
    };
    if (1..=3).contains(&dim) {
        let res = quadrature.angular(dim);
        r.check("quadrature", "ordinates", res);
    }
    let res = quadrature.frequency();
    r.check(
        "quadrature",
        if r.has("quadrature", "band_edges") {
            "band_edges"
        } else {
            "v_min"
        },
        res,
    );

    // eos
    let eos = match r.get("eos", "kind").unwrap_or("polytropic") {
        "polytropic" => EosSpec::Polytropic {
            a: r.or("eos", "a", 1.0),
            gamma: r.or("eos", "gamma", 1.4),
        },
        "table" => EosSpec::Table {
            rho: r.list("eos", "table_rho").unwrap_or_default(),
            p: r.list("eos", "table_p").unwrap_or_default(),
        },
        other => {
            let other = other.to_string();
            r.issue(
                "eos",
                "kind",
                format!("expected polytropic or table, got `{other}`"),
            );
            EosSpec::Polytropic { a: 1.0, gamma: 1.4 }
        }
    };
    let key = if matches!(eos, EosSpec::Table { .. }) {
        "table_p"
    } else {
        "gamma"
    };
    let res = eos.build();
    r.check("eos", key, res);

    // viscosity, radiation, norms
    let mu = r.or("viscosity", "mu", 0.1);
    let lambda = r.or("viscosity", "lambda", 0.0);
    let res = ViscosityParams::new(mu, lambda);
    r.check(
        "viscosity",
        if r.has("viscosity", "lambda") {
            "lambda"
        } else {
            "mu"
        },
        res,
    );
    let c = r.or("radiation", "c", 1.0);
    let res = PhysicalConstants::new(c);
    r.check("radiation", "c", res);
    let q = r.or("norms", "q", 4.0);
    let res = NormSettings::new(q);
    r.check("norms", "q", res);

    // model
    let model = match r.get("model", "kind").unwrap_or("compton") {
        "zero" => ModelSpec::Zero,
        "gray" => {
            let (kappa, scatter) = (r.or("model", "kappa", 1.0), r.or("model", "scatter", 0.0));
            if !(kappa >= 0.0) || !(scatter >= 0.0) {
                r.issue(
                    "model",
                    "kappa",
                    "gray model needs kappa >= 0 and scatter >= 0".into(),
                );
            }
            ModelSpec::Gray { kappa, scatter }
        }
        "compton" => {
            let scattering = match r.get("model", "scattering").unwrap_or("gaussian") {
                "none" => ScatterSpec::None,
                "isotropic" => ScatterSpec::Isotropic {
                    strength: r.or("model", "scatter_strength", 0.5),
                },
                "gaussian" => ScatterSpec::Gaussian {
                    strength: r.or("model", "scatter_strength", 0.5),
                    width: r.or("model", "scatter_width", 0.5),
                    cutoff: r.or("model", "scatter_cutoff", 1.0),
                },
                other => {
                    let other = other.to_string();
                    r.issue(
                        "model",
                        "scattering",
                        format!("expected none, isotropic or gaussian, got `{other}`"),
                    );
                    ScatterSpec::None
                }
            };
            let m = ModelSpec::Compton {
                d1: r.or("model", "d1", 1.0),
                d2: r.or("model", "d2", 1.0),
                v0: r.or("model", "v0", 1.0),
                theta: r.or("model", "theta", 1.0),
                scattering,
            };
            let res = crate::scenario::build_model(
                &m,
                quadrature.band_edges.last().copied().unwrap_or(1.0),
            );
            r.check("model", "kind", res);
            m
        }
        other => {
            let other = other.to_string();
            r.issue(
                "model",
                "kind",
                format!("expected zero, gray or compton, got `{other}`"),
            );
            ModelSpec::Zero
        }
    };

    // scenario
    let name: String = r.required("scenario", "name").unwrap_or_default();
    if !name.is_empty() && crate::scenario::find(&name).is_none() {
        r.issue(
            "scenario",
            "name",
            format!("unknown scenario `{name}` (see list-scenarios)"),
        );
    }
    let radius: Option<f64> = r.parse("scenario", "radius");
    if radius.is_some_and(|v| !(v >= 0.0)) {
        r.issue("scenario", "radius", "must be >= 0".into());
    }
    let amplitude: Option<f64> = r.parse("scenario", "amplitude");
    if amplitude.is_some_and(|v| !v.is_finite()) {
        r.issue("scenario", "amplitude", "must be finite".into());
    }
    let scenario = ScenarioSpec {
        name,
        radius,
        amplitude,
    };

    // run and slab
    let t_final: f64 = r.required("run", "t_final").unwrap_or(1.0);
    if !(t_final > 0.0) || !t_final.is_finite() {
        r.issue(
            "run",
            "t_final",
            format!("t_final = {t_final} must be positive"),
        );
    }
    let snapshot_every = r.or("run", "snapshot_every", 1usize);
    if snapshot_every == 0 {
        r.issue("run", "snapshot_every", "must be >= 1".into());
    }
    let output_dir = r.get("run", "output_dir").map(str::to_string);
    let write_snapshots = r.bool_or("run", "write_snapshots", true);
    let run = RunSpec {
        t_final,
        snapshot_every,
        output_dir,
        write_snapshots,
    };

    let length = r.or("slab", "length", t_final.min(0.1));
    let dt = r.or("slab", "dt", length / 10.0);
    let continuity = match r.get("slab", "continuity").unwrap_or("fv") {
        "fv" => ContinuityScheme::FiniteVolume,
        "characteristics" => ContinuityScheme::Characteristics,
        other => {
            let other = other.to_string();
            r.issue(
                "slab",
                "continuity",
                format!("expected fv or characteristics, got `{other}`"),
            );
            ContinuityScheme::FiniteVolume
        }
    };
    let slab = SlabConfig {
        slab_length: length,
        dt,
        max_iters: r.or("slab", "max_iters", 30),
        gamma_tol: r.or("slab", "gamma_tol", 1e-8),
        halve_on_stall: r.bool_or("slab", "halve_on_stall", true),
        max_halvings: r.or("slab", "max_halvings", 2),
        continuity,
    };
    let res = slab.validate();
    r.check(
        "slab",
        if r.has("slab", "dt") { "dt" } else { "length" },
        res,
    );

    let continuation = if r.has("continuation", "deltas") {
        let deltas: Vec<f64> = r.list("continuation", "deltas").unwrap_or_default();
        let extrapolate = r.bool_or("continuation", "extrapolate", false);
        let res = DeltaSchedule::new(deltas.clone(), extrapolate);
        r.check("continuation", "deltas", res);
        Some(ContinuationSpec {
            deltas,
            extrapolate,
        })
    } else {
        if r.has("continuation", "extrapolate") {
            r.issue("continuation", "extrapolate", "given without deltas".into());
        }
        None
    };

    if !issues.is_empty() {
        issues.sort_by_key(|i| i.line);
        return Err(ConfigErrors(issues));
    }
    Ok(RunConfig {
        grid,
        quadrature,
        eos,
        mu,
        lambda,
        c,
        model,
        scenario,
        slab,
        continuation,
        run,
        q,
    })
}

fn join<V: fmt::Display>(v: &[V]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Writes every setting explicitly; `parse_config(&to_ini(c)) == Ok(c)`.
pub fn to_ini(c: &RunConfig) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "[grid]\ncells = {}\nlengths = {}",
        join(&c.grid.cells),
        join(&c.grid.lengths)
    );
    let _ = writeln!(
        s,
        "boundary = {}",
        if c.grid.boundary == Boundary::Periodic {
            "periodic"
        } else {
            "farfield"
        }
    );
    if let Some(r) = c.grid.rho_bar {
        let _ = writeln!(s, "rho_bar = {r}");
    }
    let _ = writeln!(
        s,
        "\n[quadrature]\nordinates = {}\nazimuths = {}\nband_edges = {}",
        c.quadrature.ordinates,
        c.quadrature.azimuths,
        join(&c.quadrature.band_edges)
    );
    match &c.eos {
        EosSpec::Polytropic { a, gamma } => {
            let _ = writeln!(s, "\n[eos]\nkind = polytropic\na = {a}\ngamma = {gamma}");
        }
        EosSpec::Table { rho, p } => {
            let _ = writeln!(
                s,
                "\n[eos]\nkind = table\ntable_rho = {}\ntable_p = {}",
                join(rho),
                join(p)
            );
        }
    }
    let _ = writeln!(
        s,
        "\n[viscosity]\nmu = {}\nlambda = {}\n\n[radiation]\nc = {}",
        c.mu, c.lambda, c.c
    );
    let _ = writeln!(s, "\n[model]");
    match &c.model {
        ModelSpec::Zero => {
            let _ = writeln!(s, "kind = zero");
        }
        ModelSpec::Gray { kappa, scatter } => {
            let _ = writeln!(s, "kind = gray\nkappa = {kappa}\nscatter = {scatter}");
        }
        ModelSpec::Compton {
            d1,
            d2,
            v0,
            theta,
            scattering,
        } => {
            let _ = writeln!(
                s,
                "kind = compton\nd1 = {d1}\nd2 = {d2}\nv0 = {v0}\ntheta = {theta}"
            );
            match scattering {
                ScatterSpec::None => {
                    let _ = writeln!(s, "scattering = none");
                }
                ScatterSpec::Isotropic { strength } => {
                    let _ = writeln!(s, "scattering = isotropic\nscatter_strength = {strength}");
                }
                ScatterSpec::Gaussian {
                    strength,
                    width,
                    cutoff,
                } => {
                    let _ = writeln!(
                        s,
                        "scattering = gaussian\nscatter_strength = {strength}\nscatter_width = {width}\nscatter_cutoff = {cutoff}"
                    );
                }
            }
        }
    }
    let _ = writeln!(s, "\n[scenario]\nname = {}", c.scenario.name);
    if let Some(r) = c.scenario.radius {
        let _ = writeln!(s, "radius = {r}");
    }
    if let Some(a) = c.scenario.amplitude {
        let _ = writeln!(s, "amplitude = {a}");
    }
    let sl = &c.slab;
    let _ = writeln!(
        s,
        "\n[slab]\nlength = {}\ndt = {}\nmax_iters = {}\ngamma_tol = {}\nhalve_on_stall = {}\nmax_halvings = {}\ncontinuity = {}",
        sl.slab_length,
        sl.dt,
        sl.max_iters,
        sl.gamma_tol,
        sl.halve_on_stall,
        sl.max_halvings,
        if sl.continuity == ContinuityScheme::Characteristics { "characteristics" } else { "fv" }
    );
    if let Some(cont) = &c.continuation {
        let _ = writeln!(
            s,
            "\n[continuation]\ndeltas = {}\nextrapolate = {}",
            join(&cont.deltas),
            cont.extrapolate
        );
    }
    let _ = writeln!(
        s,
        "\n[run]\nt_final = {}\nsnapshot_every = {}",
        c.run.t_final, c.run.snapshot_every
    );
    if let Some(d) = &c.run.output_dir {
        let _ = writeln!(s, "output_dir = {d}");
    }
    let _ = writeln!(
        s,
        "write_snapshots = {}\n\n[norms]\nq = {}",
        c.run.write_snapshots, c.q
    );
    s
}
