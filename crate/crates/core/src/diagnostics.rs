//! Compatibility residual at vacuum, blow-up quantities, far-field density
//! bounds and mass audits.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::{RadiationField, ScalarField, VectorField};
use crate::fluid::lame_apply;
use crate::grid::{gradient, integrate_space, SpatialGrid};
use crate::norms::{
    inner_norm, lp_norm_values, lp_norm_vector, mixed_radiation_norm, sobolev_norm,
    sobolev_norm_vector, InnerNorm, NormSettings, SobolevKind,
};
use crate::phase::PhaseSpace;
use crate::picard::{Problem, State, Trajectory};
use crate::scalar::Real;
use crate::transport::CollisionOperator;

pub fn mass_total<T: Real>(rho: &ScalarField<T>, grid: &SpatialGrid<T>) -> Result<T> {
    integrate_space(rho, grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompatVerdict {
    Satisfied,
    Diverging,
    Vacuous,
    /// Neither Cauchy-converged nor clearly growing on the given schedule.
    Undetermined,
}

impl CompatVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Satisfied => "satisfied",
            Self::Diverging => "diverging",
            Self::Vacuous => "vacuous",
            Self::Undetermined => "undetermined",
        }
    }
}

impl std::fmt::Display for CompatVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct CompatReport<T> {
    /// `g` on cells with `rho_0 > rho_cut` (zero elsewhere), at the last threshold.
    pub g_field: VectorField<T>,
    pub g_l2: T,
    /// `(rho_cut, g_l2)` for each threshold, strictly decreasing in `rho_cut`.
    pub refinement_trace: Vec<(T, T)>,
    pub verdict: CompatVerdict,
    /// Cells admitted at the last threshold.
    pub cells_used: usize,
}

/// `Phi_0 = L u_0 + grad p(rho_0) + (1/c) int int A_r^0 Omega`.
pub fn initial_imbalance<T: Real>(
    state: &State<T>,
    problem: &Problem<T>,
) -> Result<VectorField<T>> {
    state.validate(&problem.phase)?;
    let grid = &problem.phase.grid;
    let lu = lame_apply(&state.u, &problem.visc, grid)?;
    let gp = gradient(&problem.eos.pressure(&state.rho)?, grid)?;
    let op = CollisionOperator::new(&problem.model, &problem.phase);
    // the momentum source is -(1/c) int int A_r Omega
    let f = op.momentum_source(&state.intensity, &state.rho, T::zero(), problem.consts.c())?;
    Ok(lu.add(&gp).sub(&f))
}

fn residual_at<T: Real>(
    imbalance: &VectorField<T>,
    rho: &ScalarField<T>,
    cut: T,
    grid: &SpatialGrid<T>,
) -> Result<(VectorField<T>, T, usize)> {
    let mut used = 0;
    let mut comps = vec![vec![T::zero(); grid.len()]; grid.dim()];
    for (i, r) in rho.values().iter().enumerate() {
        if *r > cut {
            used += 1;
            let s = r.sqrt();
            for (a, c) in comps.iter_mut().enumerate() {
                c[i] = imbalance.component(a)[i] / s;
            }
        }
    }
    let g = VectorField::from_components(comps);
    let l2 = lp_norm_vector(&g, T::lit(2.0), grid)?;
    Ok((g, l2, used))
}

/// `g = rho_0^{-1/2} Phi_0` on cells with `rho_0 > rho_cut` and its L2 norm.
pub fn compatibility_residual<T: Real>(
    state: &State<T>,
    problem: &Problem<T>,
    rho_cut: T,
) -> Result<CompatReport<T>> {
    if !(rho_cut >= T::zero()) {
        return Err(Error::Parameter(format!("rho_cut {rho_cut} must be >= 0")));
    }
    let imb = initial_imbalance(state, problem)?;
    let (g, l2, used) = residual_at(&imb, &state.rho, rho_cut, &problem.phase.grid)?;
    Ok(CompatReport {
        g_field: g,
        g_l2: l2,
        refinement_trace: vec![(rho_cut, l2)],
        verdict: CompatVerdict::Undetermined,
        cells_used: used,
    })
}

/// Default cut schedule `[1e-2, 1e-3, 1e-4, 1e-5] * max rho_0`.
pub fn default_cut_schedule<T: Real>(rho0: &ScalarField<T>) -> Vec<T> {
    let m = rho0.max();
    [1e-2, 1e-3, 1e-4, 1e-5]
        .iter()
        .map(|f| T::lit(*f) * m)
        .collect()
}

/// Evaluates the residual along a decreasing cut schedule and classifies the
/// trend: `vacuous` when no cell falls below the finest cut (the residual is
/// then evaluated on every cell), `satisfied` when the last two norms agree
/// within 5%, `diverging` when the last ratio exceeds 2.
pub fn compatibility_check<T: Real>(
    state: &State<T>,
    problem: &Problem<T>,
    cuts: &[T],
) -> Result<CompatReport<T>> {
    if cuts.is_empty()
        || cuts.iter().any(|c| !(*c > T::zero()))
        || cuts.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(Error::Parameter(
            "rho_cut schedule must be strictly decreasing and positive".into(),
        ));
    }
    let grid = &problem.phase.grid;
    let imb = initial_imbalance(state, problem)?;
    let finest = *cuts.last().expect("nonempty");
    if state.rho.min() > finest {
        let (g, l2, used) = residual_at(&imb, &state.rho, T::zero(), grid)?;
        return Ok(CompatReport {
            g_field: g,
            g_l2: l2,
            refinement_trace: vec![(T::zero(), l2)],
            verdict: CompatVerdict::Vacuous,
            cells_used: used,
        });
    }
    let mut trace = Vec::with_capacity(cuts.len());
    let mut last = None;
    for &cut in cuts {
        let (g, l2, used) = residual_at(&imb, &state.rho, cut, grid)?;
        trace.push((cut, l2));
        last = Some((g, l2, used));
    }
    let (g, l2, used) = last.expect("nonempty schedule");
    let verdict = if trace.len() < 2 {
        CompatVerdict::Undetermined
    } else {
        let prev = trace[trace.len() - 2].1;
        if (l2 - prev).abs() <= T::lit(0.05) * l2.max(prev) {
            CompatVerdict::Satisfied
        } else if prev > T::zero() && l2 / prev > T::lit(2.0) {
            CompatVerdict::Diverging
        } else {
            CompatVerdict::Undetermined
        }
    };
    Ok(CompatReport {
        g_field: g,
        g_l2: l2,
        refinement_trace: trace,
        verdict,
        cells_used: used,
    })
}

/// The three summands of `Phi` besides the leading 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiParts<T> {
    /// `||I||_{L2(phase; H1 ∩ W1q)}`
    pub intensity: T,
    /// `||rho - rho_bar||_{H1 ∩ W1q}`
    pub density: T,
    /// `|u|_{D1}`
    pub velocity: T,
}

impl<T: Real> PhiParts<T> {
    pub fn total(&self) -> T {
        T::one() + self.intensity + self.density + self.velocity
    }
}

fn density_deviation<T: Real>(rho: &ScalarField<T>, grid: &SpatialGrid<T>) -> ScalarField<T> {
    rho.clone().set_far(grid.reference_density())
}

/// Per-(band, ordinate) spatial norms of `I`.
fn intensity_slices<T: Real>(
    i: &RadiationField<T>,
    inner: InnerNorm,
    phase: &PhaseSpace<T>,
    settings: &NormSettings<T>,
) -> Result<Vec<T>> {
    phase.check_field(i, "intensity")?;
    let mut out = Vec::with_capacity(phase.bands() * phase.ordinates());
    for b in 0..phase.bands() {
        for m in 0..phase.ordinates() {
            out.push(inner_norm(i.slice(b, m), inner, settings.q(), &phase.grid));
        }
    }
    Ok(out)
}

/// Recombines per-slice norms into the L2 over frequency and direction.
fn weighted_l2<T: Real>(slices: &[T], phase: &PhaseSpace<T>) -> T {
    let mut acc = T::zero();
    for b in 0..phase.bands() {
        for m in 0..phase.ordinates() {
            let n = slices[b * phase.ordinates() + m];
            acc = acc + phase.weight(b, m) * n * n;
        }
    }
    acc.sqrt()
}

/// Instantaneous `Phi` summands of one state (the time suprema are taken by
/// the caller, see [`blowup_monitor`]).
pub fn phi<T: Real>(
    state: &State<T>,
    phase: &PhaseSpace<T>,
    settings: &NormSettings<T>,
) -> Result<PhiParts<T>> {
    let grid = &phase.grid;
    Ok(PhiParts {
        intensity: mixed_radiation_norm(
            &state.intensity,
            InnerNorm::H1W1q,
            &phase.freq,
            &phase.ang,
            grid,
            settings,
        )?,
        density: sobolev_norm(
            &density_deviation(&state.rho, grid),
            SobolevKind::H1W1q,
            settings,
            grid,
        )?,
        velocity: sobolev_norm_vector(&state.u, SobolevKind::D1, settings, grid)?,
    })
}

/// Running quantities carried between samples of `Theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaHistory<T> {
    /// `int_0^t (|u|_{D2q}^2 + |u_t|_{D1}^2) ds` (left-endpoint rule on snapshot intervals).
    pub integral: T,
    /// Running sup in time of each `||I[b, m]||_{H1 ∩ W1q}`.
    pub intensity_sup: Vec<T>,
    /// Running sup in time of each `||I_t[b, m]||_{L2 ∩ Lq}`.
    pub intensity_t_sup: Vec<T>,
}

impl<T: Real> ThetaHistory<T> {
    pub fn new(phase: &PhaseSpace<T>) -> Self {
        let n = phase.bands() * phase.ordinates();
        Self {
            integral: T::zero(),
            intensity_sup: vec![T::zero(); n],
            intensity_t_sup: vec![T::zero(); n],
        }
    }
}

fn update_sup<T: Real>(sup: &mut [T], values: &[T]) {
    for (s, v) in sup.iter_mut().zip(values) {
        // NaN propagates so overflow stays visible
        *s = if v.is_nan() || *v > *s { *v } else { *s };
    }
}

/// `Theta` at `state`, with time derivatives from the backward difference to
/// `prev = (state, dt)`; without `prev` the derivative terms are zero. Updates
/// `history` in place.
pub fn theta<T: Real>(
    state: &State<T>,
    prev: Option<(&State<T>, T)>,
    history: &mut ThetaHistory<T>,
    phase: &PhaseSpace<T>,
    settings: &NormSettings<T>,
) -> Result<T> {
    let grid = &phase.grid;
    let two = T::lit(2.0);
    update_sup(
        &mut history.intensity_sup,
        &intensity_slices(&state.intensity, InnerNorm::H1W1q, phase, settings)?,
    );
    let mut rho_t = T::zero();
    let mut sqrt_rho_ut = T::zero();
    if let Some((p, dt)) = prev {
        if !(dt > T::zero()) {
            return Err(Error::Parameter(
                "theta needs a positive time difference".into(),
            ));
        }
        let it = state.intensity.sub(&p.intensity).map(|v| v / dt);
        update_sup(
            &mut history.intensity_t_sup,
            &intensity_slices(&it, InnerNorm::L2Lq, phase, settings)?,
        );
        let dr: Vec<T> = state
            .rho
            .values()
            .iter()
            .zip(p.rho.values())
            .map(|(a, b)| (*a - *b) / dt)
            .collect();
        rho_t = lp_norm_values(&dr, two, grid)? + lp_norm_values(&dr, settings.q(), grid)?;
        let ut = state.u.sub(&p.u).scale(T::one() / dt);
        let weighted = VectorField::from_components(
            ut.components()
                .iter()
                .map(|c| {
                    c.iter()
                        .zip(state.rho.values())
                        .map(|(v, r)| *v * r.sqrt())
                        .collect()
                })
                .collect(),
        );
        sqrt_rho_ut = lp_norm_vector(&weighted, two, grid)?;
        let ut_d1 = sobolev_norm_vector(&ut, SobolevKind::D1, settings, grid)?;
        let d2q = sobolev_norm_vector(&state.u, SobolevKind::D2q, settings, grid)?;
        history.integral = history.integral + dt * (d2q * d2q + ut_d1 * ut_d1);
    }
    let i_term = weighted_l2(&history.intensity_sup, phase);
    let it_term = weighted_l2(&history.intensity_t_sup, phase);
    let rho_term = sobolev_norm(
        &density_deviation(&state.rho, grid),
        SobolevKind::H1W1q,
        settings,
        grid,
    )?;
    let u_term = sobolev_norm_vector(&state.u, SobolevKind::D1, settings, grid)?
        + sobolev_norm_vector(&state.u, SobolevKind::D2, settings, grid)?;
    Ok(T::one() + i_term + it_term + rho_term + rho_t + u_term + sqrt_rho_ut + history.integral)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub times: Vec<f64>,
    /// `Phi(t)` with the time suprema taken over the samples so far.
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    /// Running-sup summands `(intensity, density, velocity)` of `phi`.
    pub phi_components: Vec<(f64, f64, f64)>,
    pub mass: Vec<f64>,
    pub min_rho: Vec<f64>,
    pub flags: Vec<Vec<&'static str>>,
    pub cap: f64,
    /// First sample time at which `Phi` exceeds the cap or either series overflows.
    pub first_overflow: Option<f64>,
}

impl BlowupReport {
    pub fn flagged(&self) -> bool {
        self.flags.iter().any(|f| !f.is_empty())
    }

    pub const CSV_HEADER: &'static str = "time,phi,theta,phi_I,phi_rho,phi_u,mass,min_rho,flags";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for k in 0..self.times.len() {
            let (a, b, c) = self.phi_components[k];
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                self.times[k],
                self.phi[k],
                self.theta[k],
                a,
                b,
                c,
                self.mass[k],
                self.min_rho[k],
                self.flags[k].join(";")
            );
        }
        s
    }
}

/// `Phi` and `Theta` over the snapshots of a trajectory.
///
/// Flags per sample: `phi_above_cap` when `Phi` exceeds `cap` (default
/// `10 Phi(0)`), `phi_overflow`/`theta_overflow` for non-finite values and
/// `theta_overflow_below_cap` when `Theta` overflows although `Phi` stays
/// below the cap, which would contradict the criterion.
pub fn blowup_monitor<T: Real>(
    traj: &Trajectory<T>,
    phase: &PhaseSpace<T>,
    settings: &NormSettings<T>,
    cap: Option<f64>,
) -> Result<BlowupReport> {
    let grid = &phase.grid;
    let mut history = ThetaHistory::new(phase);
    let n = phase.bands() * phase.ordinates();
    let mut i_sup = vec![T::zero(); n];
    let (mut rho_sup, mut u_sup) = (T::zero(), T::zero());
    let mut rep = BlowupReport {
        times: Vec::new(),
        phi: Vec::new(),
        theta: Vec::new(),
        phi_components: Vec::new(),
        mass: Vec::new(),
        min_rho: Vec::new(),
        flags: Vec::new(),
        cap: f64::INFINITY,
        first_overflow: None,
    };
    for (k, (t, s)) in traj.times.iter().zip(&traj.snapshots).enumerate() {
        update_sup(
            &mut i_sup,
            &intensity_slices(&s.intensity, InnerNorm::H1W1q, phase, settings)?,
        );
        let p = phi(s, phase, settings)?;
        rho_sup = rho_sup.max(p.density);
        u_sup = u_sup.max(p.velocity);
        let parts = (
            weighted_l2(&i_sup, phase).as_f64(),
            rho_sup.as_f64(),
            u_sup.as_f64(),
        );
        let phi_val = 1.0 + parts.0 + parts.1 + parts.2;
        let prev = (k > 0).then(|| (&traj.snapshots[k - 1], *t - traj.times[k - 1]));
        let th = theta(s, prev, &mut history, phase, settings)?.as_f64();
        if k == 0 {
            rep.cap = cap.unwrap_or(10.0 * phi_val);
        }
        let mut flags = Vec::new();
        if !phi_val.is_finite() {
            flags.push("phi_overflow");
        } else if phi_val > rep.cap {
            flags.push("phi_above_cap");
        }
        if !th.is_finite() {
            flags.push(if phi_val <= rep.cap {
                "theta_overflow_below_cap"
            } else {
                "theta_overflow"
            });
        }
        if !flags.is_empty() && rep.first_overflow.is_none() {
            rep.first_overflow = Some(t.as_f64());
        }
        rep.times.push(t.as_f64());
        rep.phi.push(phi_val);
        rep.theta.push(th);
        rep.phi_components.push(parts);
        rep.mass.push(mass_total(&s.rho, grid)?.as_f64());
        rep.min_rho.push(s.rho.min().as_f64());
        rep.flags.push(flags);
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FarfieldReport {
    /// The bounds presuppose a positive far-field density.
    NotApplicable,
    Checked {
        lower: f64,
        upper: f64,
        /// `(time, min, max)` of `rho` outside the radius per snapshot.
        samples: Vec<(f64, f64, f64)>,
        first_violation: Option<f64>,
    },
}

impl FarfieldReport {
    pub fn passed(&self) -> bool {
        match self {
            Self::NotApplicable => true,
            Self::Checked {
                first_violation, ..
            } => first_violation.is_none(),
        }
    }
}

/// Checks `3 rho_bar / 8 <= rho <= 5 rho_bar / 2` on cells farther than
/// `radius` from the domain center.
pub fn farfield_bounds_check<T: Real>(
    traj: &Trajectory<T>,
    radius: T,
    rho_bar: T,
    grid: &SpatialGrid<T>,
) -> Result<FarfieldReport> {
    if !(rho_bar > T::zero()) {
        return Ok(FarfieldReport::NotApplicable);
    }
    if !(radius >= T::zero()) {
        return Err(Error::Parameter(format!("radius {radius} must be >= 0")));
    }
    let center = grid.domain_center();
    let outside: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let x = grid.center(i);
            let r2 = (0..grid.dim()).fold(T::zero(), |a, d| {
                a + (x[d] - center[d]) * (x[d] - center[d])
            });
            r2.sqrt() > radius
        })
        .collect();
    let lower = (T::lit(3.0) * rho_bar / T::lit(8.0)).as_f64();
    let upper = (T::lit(2.5) * rho_bar).as_f64();
    let mut samples = Vec::new();
    let mut first_violation = None;
    for (t, s) in traj.times.iter().zip(&traj.snapshots) {
        let vals = outside.iter().map(|&i| s.rho.values()[i].as_f64());
        // the far-field ghost value belongs to the exterior as well
        let far = s.rho.far().as_f64();
        let (lo, hi) = vals
            .chain(std::iter::once(far))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
        if first_violation.is_none() && (lo < lower || hi > upper) {
            first_violation = Some(t.as_f64());
        }
        samples.push((t.as_f64(), lo, hi));
    }
    Ok(FarfieldReport::Checked {
        lower,
        upper,
        samples,
        first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{CoefficientModel, EquationOfState, PhysicalConstants, ViscosityParams};
    use crate::quadrature::{AngularQuadrature, FrequencyGrid};
    use std::f64::consts::PI;

    fn problem(grid: SpatialGrid<f64>, eos: EquationOfState<f64>) -> Problem<f64> {
        Problem {
            phase: PhaseSpace::new(
                grid,
                FrequencyGrid::uniform(0.5, 1.5, 2).unwrap(),
                AngularQuadrature::slab(4).unwrap(),
            )
            .unwrap(),
            model: CoefficientModel::zero("z"),
            eos,
            visc: ViscosityParams::new(1.0, 0.0).unwrap(),
            consts: PhysicalConstants::new(1.0).unwrap(),
        }
    }

    #[test]
    fn equilibrium_is_compatible_and_phi_is_one() {
        let g = SpatialGrid::<f64>::farfield_1d(32, 1.0, 1.0).unwrap();
        let p = problem(g, EquationOfState::polytropic(1.0, 1.4).unwrap());
        let s = State::equilibrium(&p.phase);
        let r = compatibility_residual(&s, &p, 1e-3).unwrap();
        assert_eq!(r.g_l2, 0.0);
        assert_eq!(
            phi(&s, &p.phase, &NormSettings::default()).unwrap().total(),
            1.0
        );
    }

    #[test]
    fn sine_velocity_residual_and_phi() {
        let g = SpatialGrid::<f64>::periodic_1d(256, 1.0)
            .unwrap()
            .with_reference_density(1.0);
        let eos = EquationOfState::table(vec![0.0, 2.0], vec![1.0, 1.0]).unwrap();
        let p = problem(g, eos);
        let mut s = State::equilibrium(&p.phase);
        s.u = VectorField::from_fn(&p.phase.grid, |x| [(2.0 * PI * x[0]).sin(), 0.0, 0.0]);
        let r = compatibility_residual(&s, &p, 1e-3).unwrap();
        let expect = 78.957 * 0.70711;
        assert!((r.g_l2 / expect - 1.0).abs() < 5e-3, "{}", r.g_l2);
        let ph = phi(&s, &p.phase, &NormSettings::default()).unwrap().total();
        assert!((ph - (1.0 + 4.4429)).abs() < 1e-3, "{ph}");
    }

    #[test]
    fn farfield_not_applicable_without_background() {
        let g = SpatialGrid::<f64>::farfield_1d(16, 1.0, 0.0).unwrap();
        let p = problem(g.clone(), EquationOfState::polytropic(1.0, 1.4).unwrap());
        let traj = Trajectory {
            times: vec![0.0],
            snapshots: vec![State::equilibrium(&p.phase)],
            slabs: vec![],
        };
        assert_eq!(
            farfield_bounds_check(&traj, 0.3, 0.0, &g).unwrap(),
            FarfieldReport::NotApplicable
        );
    }
}
