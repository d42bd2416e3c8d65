//! Built-in initial data and sources.

use std::sync::Arc;

use rhd_core::field::{ScalarField, VectorField};
use rhd_core::fluid::lame_matrix;
use rhd_core::grid::{gradient, SpatialGrid};
use rhd_core::linalg::pcg;
use rhd_core::physics::{
    compton_model, gray_model, CoefficientModel, EmissionFn, PhasePoint, ScatteringProfile,
};
use rhd_core::picard::{Problem, State};
use rhd_core::{Error, Result};

use crate::config::{ModelSpec, ScatterSpec, ScenarioSpec};

/// Which far-field densities a scenario is defined for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Background {
    Positive,
    Vacuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub background: Background,
}

impl ScenarioInfo {
    pub fn default_rho_bar(&self) -> f64 {
        match self.background {
            Background::Positive => 1.0,
            Background::Vacuum => 0.0,
        }
    }
}

const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo { name: "equilibrium", description: "rest state rho = rho_bar, u = 0, I = 0, S = 0", background: Background::Positive },
    ScenarioInfo {
        name: "smooth-bump",
        description: "Gaussian density bump on a positive background, small Gaussian intensity and source",
        background: Background::Positive,
    },
    ScenarioInfo {
        name: "vacuum-plateau",
        description: "interior vacuum plateau joined smoothly to rho_bar, fluid at rest, no radiation",
        background: Background::Positive,
    },
    ScenarioInfo { name: "vacuum-farfield", description: "Gaussian density decaying to a vacuum far field", background: Background::Vacuum },
    ScenarioInfo {
        name: "compat-satisfied",
        description: "compact bump with u0 solving L u0 = -grad p + sqrt(rho0) g for smooth g",
        background: Background::Vacuum,
    },
    ScenarioInfo {
        name: "compat-diverging",
        description: "compact bump vanishing to high order with u0 = sin(2 pi x), L u0 != 0 at the vacuum edge",
        background: Background::Vacuum,
    },
    ScenarioInfo {
        name: "beam-absorption",
        description: "forward-peaked radiation pulse crossing a uniform absorbing medium",
        background: Background::Positive,
    },
];

pub fn builtin_scenarios() -> &'static [ScenarioInfo] {
    SCENARIOS
}

pub fn find(name: &str) -> Option<&'static ScenarioInfo> {
    SCENARIOS.iter().find(|s| s.name == name)
}

pub fn build_model(spec: &ModelSpec, v_max: f64) -> Result<CoefficientModel<f64>> {
    match spec {
        ModelSpec::Zero => Ok(CoefficientModel::zero("zero")),
        ModelSpec::Gray { kappa, scatter } => gray_model(*kappa, *scatter, 0.0, v_max),
        ModelSpec::Compton {
            d1,
            d2,
            v0,
            theta,
            scattering,
        } => {
            let profile = match scattering {
                ScatterSpec::None => ScatteringProfile::None,
                ScatterSpec::Isotropic { strength } => ScatteringProfile::Isotropic {
                    strength: *strength,
                },
                ScatterSpec::Gaussian {
                    strength,
                    width,
                    cutoff,
                } => ScatteringProfile::Gaussian {
                    strength: *strength,
                    width: *width,
                    cutoff: *cutoff,
                },
            };
            compton_model(*d1, *d2, *v0, *theta, profile)
        }
    }
}

#[derive(Clone)]
pub struct InitialData {
    pub state: State<f64>,
    /// Source `S`.
    pub emission: EmissionFn<f64>,
    /// Radius for the far-field density bounds.
    pub radius: f64,
}

/// Distance from the domain center and the domain length along x.
fn geometry(
    grid: &SpatialGrid<f64>,
) -> (
    impl Fn([f64; 3]) -> f64 + Send + Sync + Clone + 'static,
    f64,
) {
    let center = grid.domain_center();
    let dim = grid.dim();
    let r = move |x: [f64; 3]| {
        (0..dim)
            .map(|d| (x[d] - center[d]).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    (r, grid.domain_length(0))
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// `(1 - (r/R)^2)_+^6`, vanishing like `dist^6` at the edge of its support.
fn compact_bump(r: f64, radius: f64) -> f64 {
    let s = 1.0 - (r / radius).powi(2);
    if s > 0.0 {
        s.powi(6)
    } else {
        0.0
    }
}

const COMPACT_RADIUS: f64 = 0.3;

fn gaussian_source(
    r: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static,
    width: f64,
    amp: f64,
) -> EmissionFn<f64> {
    Arc::new(move |p: &PhasePoint<f64>| amp * (-(r(p.x) / width).powi(2)).exp() * (-p.freq).exp())
}

/// Generates the initial data of a scenario on the problem's grid.
pub fn generate(spec: &ScenarioSpec, problem: &Problem<f64>) -> Result<InitialData> {
    let info = find(&spec.name)
        .ok_or_else(|| Error::Config(format!("unknown scenario `{}`", spec.name)))?;
    let phase = &problem.phase;
    let grid = &phase.grid;
    let rho_bar = grid.reference_density();
    match info.background {
        Background::Positive if !(rho_bar > 0.0) => {
            return Err(Error::Config(format!(
                "scenario `{}` needs a positive far-field density",
                info.name
            )))
        }
        Background::Vacuum if rho_bar != 0.0 => {
            return Err(Error::Config(format!(
                "scenario `{}` needs a vacuum far field (rho_bar = 0)",
                info.name
            )))
        }
        _ => {}
    }
    let (r, len) = geometry(grid);
    let mut state = State::equilibrium(phase);
    let mut emission: EmissionFn<f64> = Arc::new(|_: &PhasePoint<f64>| 0.0);
    let mut radius = 0.3 * len;
    match info.name {
        "equilibrium" => {}
        "smooth-bump" => {
            let amp = spec.amplitude.unwrap_or(0.5);
            let rr = r.clone();
            state.rho = ScalarField::from_fn(grid, |x| {
                rho_bar * (1.0 + amp * (-(rr(x) / (0.08 * len)).powi(2)).exp())
            })
            .set_far(rho_bar);
            let rr = r.clone();
            state.intensity = phase.radiation_from_fn(|v, _, x| {
                0.05 * (-(rr(x) / (0.1 * len)).powi(2)).exp() * (-v).exp()
            });
            emission = gaussian_source(r, 0.1 * len, 0.1);
        }
        "vacuum-plateau" => {
            let rr = r.clone();
            state.rho = ScalarField::from_fn(grid, |x| {
                rho_bar * smoothstep((rr(x) - 0.1 * len) / (0.15 * len))
            })
            .set_far(rho_bar);
        }
        "vacuum-farfield" => {
            let amp = spec.amplitude.unwrap_or(1.0);
            let rr = r.clone();
            state.rho =
                ScalarField::from_fn(grid, |x| amp * (-(rr(x) / (0.1 * len)).powi(2)).exp())
                    .set_far(0.0);
            let rr = r.clone();
            state.intensity = phase.radiation_from_fn(|v, _, x| {
                0.05 * (-(rr(x) / (0.1 * len)).powi(2)).exp() * (-v).exp()
            });
            emission = gaussian_source(r, 0.1 * len, 0.05);
        }
        "compat-satisfied" | "compat-diverging" => {
            let amp = spec.amplitude.unwrap_or(1.0);
            let rr = r.clone();
            radius = COMPACT_RADIUS * len;
            state.rho =
                ScalarField::from_fn(grid, |x| amp * compact_bump(rr(x), radius)).set_far(0.0);
            let x0 = grid.origin()[0];
            state.u = if info.name == "compat-diverging" {
                VectorField::from_fn(grid, |x| {
                    [
                        (2.0 * std::f64::consts::PI * (x[0] - x0) / len).sin(),
                        0.0,
                        0.0,
                    ]
                })
            } else {
                let c = grid.domain_center()[0];
                let g = VectorField::from_fn(grid, |x| {
                    [
                        (2.0 * std::f64::consts::PI * (x[0] - c) / len).sin(),
                        0.0,
                        0.0,
                    ]
                });
                reverse_engineer_velocity(&state.rho, &g, problem)?
            };
        }
        "beam-absorption" => {
            let x0 = grid.origin()[0];
            state.intensity = phase.radiation_from_fn(|v, dir, x| {
                if dir[0] > 0.5 {
                    (-((x[0] - x0 - 0.25 * len) / (0.05 * len)).powi(2)).exp() * (-v).exp()
                } else {
                    0.0
                }
            });
        }
        other => unreachable!("scenario table and generator disagree on `{other}`"),
    }
    if let Some(r) = spec.radius {
        radius = r;
    }
    state.validate(phase)?;
    Ok(InitialData {
        state,
        emission,
        radius,
    })
}

/// Solves `L u = -grad p(rho) + sqrt(rho) g` so that the compatibility
/// residual of `(rho, u)` is `g` wherever `rho > 0` (no radiation).
fn reverse_engineer_velocity(
    rho: &ScalarField<f64>,
    g: &VectorField<f64>,
    problem: &Problem<f64>,
) -> Result<VectorField<f64>> {
    let grid = &problem.phase.grid;
    let gp = gradient(&problem.eos.pressure(rho)?, grid)?;
    let mut rhs = Vec::with_capacity(grid.dim() * grid.len());
    for a in 0..grid.dim() {
        for i in 0..grid.len() {
            rhs.push(-gp.component(a)[i] + rho.values()[i].sqrt() * g.component(a)[i]);
        }
    }
    let m = lame_matrix(&problem.visc, grid)?;
    let mut x = vec![0.0; rhs.len()];
    pcg(&m, &rhs, &mut x, 1e-11, 100_000)?;
    Ok(VectorField::from_flat(&x, grid.dim()))
}

/// Applies the scenario source to a model.
pub fn with_source(model: CoefficientModel<f64>, data: &InitialData) -> CoefficientModel<f64> {
    model.with_emission_fn(data.emission.clone())
}
