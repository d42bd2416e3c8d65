//! Problem assembly, trajectory runs and output files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use rhd_core::diagnostics::{
    blowup_monitor, compatibility_check, default_cut_schedule, farfield_bounds_check, mass_total,
    phi, CompatReport, FarfieldReport,
};
use rhd_core::field::ScalarField;
use rhd_core::phase::PhaseSpace;
use rhd_core::physics::{
    validate_emission_regularity, validate_kernel_integrability, validate_sigma_regularity,
    KernelCheckOptions, ValidationReport,
};
use rhd_core::picard::{delta_continuation, solve, ContinuationReport, Problem, State, Trajectory};
use rhd_core::snapshot::format_snapshot;

use crate::config::RunConfig;
use crate::error::LabError;
use crate::scenario::{self, build_model, generate, with_source, InitialData};

pub const OUTPUT_DIR_ENV: &str = "RHDLAB_OUTPUT_DIR";

pub struct Prepared {
    pub problem: Problem<f64>,
    pub initial: InitialData,
}

/// Builds the discrete problem and the scenario's initial data.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared, LabError> {
    let info = scenario::find(&cfg.scenario.name).ok_or_else(|| {
        rhd_core::Error::Config(format!("unknown scenario `{}`", cfg.scenario.name))
    })?;
    let rho_bar = cfg.grid.rho_bar.unwrap_or_else(|| info.default_rho_bar());
    let grid = cfg.grid.build(rho_bar)?;
    let dim = grid.dim();
    let phase = PhaseSpace::new(
        grid,
        cfg.quadrature.frequency()?,
        cfg.quadrature.angular(dim)?,
    )?;
    let v_max = *cfg
        .quadrature
        .band_edges
        .last()
        .expect("validated band edges");
    let mut problem = Problem {
        phase,
        model: build_model(&cfg.model, v_max)?,
        eos: cfg.eos.build()?,
        visc: cfg.viscosity(),
        consts: cfg.constants(),
    };
    let initial = generate(&cfg.scenario, &problem)?;
    problem.model = with_source(problem.model, &initial);
    Ok(Prepared { problem, initial })
}

/// `$RHDLAB_OUTPUT_DIR`, else the configured directory, else `rhdlab-out/<scenario>`.
pub fn resolve_output_dir(cfg: &RunConfig) -> PathBuf {
    if let Some(d) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(d);
    }
    match &cfg.run.output_dir {
        Some(d) => PathBuf::from(d),
        None => Path::new("rhdlab-out").join(&cfg.scenario.name),
    }
}

/// JSON number with 17 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F(pub f64);

impl Serialize for F {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            RawValue::from_string(format!("{:.16e}", self.0))
                .expect("valid JSON number")
                .serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardSummary {
    pub slabs: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
    pub max_contraction_ratio: Option<F>,
    pub halvings: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FinalSummary {
    pub phi: F,
    pub phi_intensity: F,
    pub phi_density: F,
    pub phi_velocity: F,
    pub theta: F,
    pub mass: F,
    pub min_rho: F,
    pub min_intensity: F,
    pub max_speed: F,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConservationSummary {
    pub mass_initial: F,
    pub mass_final: F,
    /// Relative to the initial mass (absolute when it vanishes).
    pub relative_drift: F,
    pub max_relative_drift: F,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictSummary {
    pub compatibility: String,
    pub compat_g_l2: F,
    pub farfield: String,
    pub farfield_first_violation: Option<F>,
    pub monitor_flagged: bool,
    pub monitor_first_overflow: Option<F>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DifferenceSummary {
    pub delta_from: F,
    pub delta_to: F,
    pub rho_sup: F,
    pub u_l2: F,
    pub combined: F,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationSummary {
    pub deltas: Vec<F>,
    pub differences: Vec<DifferenceSummary>,
    pub observed_orders: Vec<F>,
    pub monotone: bool,
    pub extrapolated: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub t_final: F,
    pub cells: Vec<usize>,
    pub snapshots: usize,
    pub picard: PicardSummary,
    #[serde(rename = "final")]
    pub final_state: FinalSummary,
    pub conservation: ConservationSummary,
    /// `sup|rho - rho_0| + sup|u - u_0| + sup|I - I_0|` at the final time.
    pub state_drift: F,
    pub verdicts: VerdictSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuation: Option<ContinuationSummary>,
}

impl Summary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Everything produced by a run, before it is written out.
pub struct RunOutput {
    pub problem: Problem<f64>,
    pub initial: InitialData,
    pub trajectory: Trajectory<f64>,
    pub continuation: Option<ContinuationReport<f64>>,
    pub monitor: rhd_core::diagnostics::BlowupReport,
    pub farfield: FarfieldReport,
    pub compat: CompatReport<f64>,
    pub summary: Summary,
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Solves the configured scenario and evaluates all diagnostics.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, LabError> {
    let Prepared { problem, initial } = prepare(cfg)?;
    let s0 = &initial.state;
    let grid = &problem.phase.grid;
    let settings = cfg.norm_settings();
    let trajectory = solve(
        s0,
        &problem,
        cfg.run.t_final,
        &cfg.slab,
        cfg.run.snapshot_every,
    )?;
    let continuation = match cfg.delta_schedule() {
        Some(schedule) => Some(delta_continuation(
            s0,
            &problem,
            &schedule,
            cfg.run.t_final,
            &cfg.slab,
        )?),
        None => None,
    };
    let monitor = blowup_monitor(&trajectory, &problem.phase, &settings, None)?;
    let farfield =
        farfield_bounds_check(&trajectory, initial.radius, grid.reference_density(), grid)?;
    let compat = compatibility_check(s0, &problem, &default_cut_schedule(&s0.rho))?;

    let last = trajectory.final_state();
    let masses = trajectory.masses(grid);
    let m0 = masses[0];
    let rel = |m: f64| {
        if m0 != 0.0 {
            (m - m0).abs() / m0.abs()
        } else {
            (m - m0).abs()
        }
    };
    let parts = phi(last, &problem.phase, &settings)?;
    let k = monitor.theta.len() - 1;
    let speed = (0..grid.len())
        .map(|i| last.u.magnitude(i))
        .fold(0.0, f64::max);
    let drift = sup_diff(last.rho.values(), s0.rho.values())
        + last.u.sub(&s0.u).max_abs()
        + sup_diff(last.intensity.values(), s0.intensity.values());

    let slabs = &trajectory.slabs;
    let summary = Summary {
        scenario: cfg.scenario.name.clone(),
        t_final: F(cfg.run.t_final),
        cells: grid.extents().to_vec(),
        snapshots: trajectory.snapshots.len(),
        picard: PicardSummary {
            slabs: slabs.len(),
            total_iterations: slabs.iter().map(|d| d.iterations).sum(),
            max_iterations: slabs.iter().map(|d| d.iterations).max().unwrap_or(0),
            max_contraction_ratio: slabs
                .iter()
                .filter_map(|d| d.max_ratio())
                .reduce(f64::max)
                .map(F),
            halvings: slabs.iter().map(|d| d.halvings).sum(),
        },
        final_state: FinalSummary {
            phi: F(parts.total()),
            phi_intensity: F(parts.intensity),
            phi_density: F(parts.density),
            phi_velocity: F(parts.velocity),
            theta: F(monitor.theta[k]),
            mass: F(mass_total(&last.rho, grid)?),
            min_rho: F(last.rho.min()),
            min_intensity: F(last.intensity.min()),
            max_speed: F(speed),
        },
        conservation: ConservationSummary {
            mass_initial: F(m0),
            mass_final: F(masses[masses.len() - 1]),
            relative_drift: F(rel(masses[masses.len() - 1])),
            max_relative_drift: F(masses.iter().map(|m| rel(*m)).fold(0.0, f64::max)),
        },
        state_drift: F(drift),
        verdicts: VerdictSummary {
            compatibility: compat.verdict.to_string(),
            compat_g_l2: F(compat.g_l2),
            farfield: match &farfield {
                FarfieldReport::NotApplicable => "not-applicable".into(),
                f if f.passed() => "pass".into(),
                _ => "fail".into(),
            },
            farfield_first_violation: match &farfield {
                FarfieldReport::Checked {
                    first_violation, ..
                } => first_violation.map(F),
                FarfieldReport::NotApplicable => None,
            },
            monitor_flagged: monitor.flagged(),
            monitor_first_overflow: monitor.first_overflow.map(F),
        },
        continuation: continuation.as_ref().map(|c| ContinuationSummary {
            deltas: c.deltas.iter().copied().map(F).collect(),
            differences: c
                .differences
                .iter()
                .map(|d| DifferenceSummary {
                    delta_from: F(d.delta_from),
                    delta_to: F(d.delta_to),
                    rho_sup: F(d.rho_sup),
                    u_l2: F(d.u_l2),
                    combined: F(d.combined),
                })
                .collect(),
            observed_orders: c.observed_orders.iter().copied().map(F).collect(),
            monotone: c.monotone,
            extrapolated: c.extrapolated.is_some(),
            warnings: c.warnings.clone(),
        }),
    };
    Ok(RunOutput {
        problem,
        initial,
        trajectory,
        continuation,
        monitor,
        farfield,
        compat,
        summary,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), LabError> {
    fs::write(path, contents).map_err(|e| LabError::io(path, e))
}

fn snapshot_files(out: &RunOutput, dir: &Path) -> Result<(), LabError> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let grid = &out.problem.phase.grid;
    let mut index = String::from("index,time\n");
    for (k, (t, s)) in out
        .trajectory
        .times
        .iter()
        .zip(&out.trajectory.snapshots)
        .enumerate()
    {
        index.push_str(&format!("{k},{t:.16e}\n"));
        write(
            &dir.join(format!("rho_{k:05}.txt")),
            &format_snapshot(grid, &[s.rho.values()])?,
        )?;
        let u: Vec<&[f64]> = s.u.components().iter().map(|c| c.as_slice()).collect();
        write(
            &dir.join(format!("u_{k:05}.txt")),
            &format_snapshot(grid, &u)?,
        )?;
        let i = &s.intensity;
        let cols: Vec<&[f64]> = (0..i.bands())
            .flat_map(|b| (0..i.ordinates()).map(move |m| i.slice(b, m)))
            .collect();
        write(
            &dir.join(format!("intensity_{k:05}.txt")),
            &format_snapshot(grid, &cols)?,
        )?;
    }
    write(&dir.join("times.csv"), &index)
}

pub fn picard_csv(traj: &Trajectory<f64>) -> String {
    let mut s = String::from("slab,k,gamma,ratio\n");
    for r in traj.picard_rows() {
        let ratio = r.ratio.map(|v| format!("{v:.16e}")).unwrap_or_default();
        s.push_str(&format!("{},{},{:.16e},{}\n", r.slab, r.k, r.gamma, ratio));
    }
    s
}

fn continuation_csv(c: &ContinuationReport<f64>) -> String {
    let mut s = String::from("delta_from,delta_to,rho_sup,u_l2,combined\n");
    for d in &c.differences {
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            d.delta_from, d.delta_to, d.rho_sup, d.u_l2, d.combined
        ));
    }
    s
}

/// Runs the scenario and writes snapshots, `monitor.csv`, `picard.csv`,
/// `continuation.csv` (with a delta schedule) and `summary.json` to `dir`.
pub fn run_scenario(cfg: &RunConfig, dir: &Path) -> Result<RunOutput, LabError> {
    let out = execute(cfg)?;
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    if cfg.run.write_snapshots {
        snapshot_files(&out, &dir.join("snapshots"))?;
    }
    write(&dir.join("monitor.csv"), &out.monitor.to_csv())?;
    write(&dir.join("picard.csv"), &picard_csv(&out.trajectory))?;
    if let Some(c) = &out.continuation {
        write(&dir.join("continuation.csv"), &continuation_csv(c))?;
    }
    write(&dir.join("summary.json"), &out.summary.to_json())?;
    Ok(out)
}

/// Compatibility verdict of the scenario's initial data on the default cut schedule.
pub fn check_compat(cfg: &RunConfig) -> Result<CompatReport<f64>, LabError> {
    let p = prepare(cfg)?;
    let rho = &p.initial.state.rho;
    Ok(compatibility_check(
        &p.initial.state,
        &p.problem,
        &default_cut_schedule(rho),
    )?)
}

/// Kernel integrability and coefficient regularity of the configured model,
/// evaluated on the scenario's initial density.
pub fn validate_model(cfg: &RunConfig) -> Result<Vec<(&'static str, ValidationReport)>, LabError> {
    let p = prepare(cfg)?;
    let ph = &p.problem.phase;
    let model = &p.problem.model;
    let settings = cfg.norm_settings();
    let state: &State<f64> = &p.initial.state;
    let rho_t = ScalarField::zeros(&ph.grid);
    Ok(vec![
        (
            "kernels",
            validate_kernel_integrability(model, &ph.freq, &ph.ang, &KernelCheckOptions::default()),
        ),
        (
            "sigma",
            validate_sigma_regularity(
                model, &state.rho, &rho_t, &settings, &ph.grid, &ph.freq, &ph.ang, 0.0,
            )?,
        ),
        (
            "emission",
            validate_emission_regularity(
                model, &state.rho, &rho_t, &settings, &ph.grid, &ph.freq, &ph.ang, 0.0,
            )?,
        ),
    ])
}
