//! Whole-slab fixed-point iteration for the coupled system.
//!
//! Iterate `k -> k+1` over the slab `[t0, t0 + T]` (inner steps `t_n`):
//!
//! 1. `rho^{k+1}` from continuity driven by `w = u^k`;
//! 2. `I^{k+1}` from the linearized transfer equation with removal evaluated
//!    at `rho^{k+1}` and scattering-in of `psi = I^k`;
//! 3. `u^{k+1}` from the linearized momentum equation with `w = u^k`,
//!    `p(rho^{k+1})` and the radiation force of `(I^{k+1}, rho^{k+1})`.
//!
//! The initial iterate freezes `rho^0 = rho_0`, takes `u^0` from heat flow
//! of `u_0` and `I^0` from free streaming of `I_0`. Convergence is measured
//! by `Gamma^{k+1}`, the slab supremum of the iterate differences. At a fixed
//! point the discrete equations coincide with the sequential scheme of
//! [`solve_monolithic`].

use crate::error::{Error, Result};
use crate::field::{RadiationField, ScalarField, VectorField};
use crate::fluid::{
    continuity_step_characteristics, continuity_step_fv, fv_dt_limit, heat_flow, momentum_step,
    VelocityHistory,
};
use crate::grid::{integrate_values, Boundary, SpatialGrid};
use crate::norms::{lp_norm, lp_norm_values, mixed_radiation_norm, InnerNorm, NormSettings};
use crate::phase::PhaseSpace;
use crate::physics::{CoefficientModel, EquationOfState, PhysicalConstants, ViscosityParams};
use crate::scalar::Real;
use crate::transport::{free_stream_step, CollisionOperator};

/// Everything that defines the continuous problem on a discrete phase space.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub phase: PhaseSpace<T>,
    pub model: CoefficientModel<T>,
    pub eos: EquationOfState<T>,
    pub visc: ViscosityParams<T>,
    pub consts: PhysicalConstants<T>,
}

/// `(I, rho, u)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    pub intensity: RadiationField<T>,
    pub rho: ScalarField<T>,
    pub u: VectorField<T>,
}

impl<T: Real> State<T> {
    pub fn validate(&self, phase: &PhaseSpace<T>) -> Result<()> {
        phase.check_field(&self.intensity, "intensity")?;
        phase.grid.check_len(self.rho.len(), "density")?;
        phase.grid.check_len(self.u.len(), "velocity")?;
        if self.u.dim() != phase.grid.dim() {
            return Err(Error::Structural(
                "velocity dimension does not match grid".into(),
            ));
        }
        self.rho.check_nonnegative("density")?;
        self.intensity.check_nonnegative()?;
        if !self.u.is_finite() {
            return Err(Error::Domain {
                what: "non-finite velocity".into(),
                cell: 0,
                value: f64::NAN,
            });
        }
        Ok(())
    }

    /// Rest state `(0, rho_bar, 0)`.
    pub fn equilibrium(phase: &PhaseSpace<T>) -> Self {
        let rb = phase.grid.reference_density();
        Self {
            intensity: phase.zeros(),
            rho: ScalarField::constant(&phase.grid, rb).set_far(rb),
            u: VectorField::zeros(&phase.grid),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuityScheme {
    /// Conservative first-order upwind finite volumes.
    FiniteVolume,
    /// Backward characteristics through each inner step.
    Characteristics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabConfig<T> {
    pub slab_length: T,
    pub dt: T,
    pub max_iters: usize,
    pub gamma_tol: T,
    pub halve_on_stall: bool,
    /// Halvings allowed before a stall becomes an error.
    pub max_halvings: usize,
    pub continuity: ContinuityScheme,
}

impl<T: Real> SlabConfig<T> {
    pub fn new(slab_length: T, dt: T) -> Result<Self> {
        let cfg = Self {
            slab_length,
            dt,
            max_iters: 30,
            gamma_tol: T::lit(1e-8),
            halve_on_stall: true,
            max_halvings: 2,
            continuity: ContinuityScheme::FiniteVolume,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slab_length > T::zero()) || !self.slab_length.is_finite() {
            return Err(Error::Parameter(format!(
                "slab length {} must be positive",
                self.slab_length
            )));
        }
        if !(self.dt > T::zero()) || self.dt > self.slab_length {
            return Err(Error::Parameter(format!(
                "need 0 < dt <= slab length, got dt = {}",
                self.dt
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be >= 1".into()));
        }
        if !(self.gamma_tol > T::zero()) {
            return Err(Error::Parameter("gamma_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardDiagnostics {
    /// `Gamma^{k+1}` for `k = 0, 1, ...`.
    pub gamma_history: Vec<f64>,
    /// `Gamma^{k+1} / Gamma^k`, defined when `Gamma^k > 0`.
    pub contraction_ratios: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Slab length actually covered (after halvings).
    pub slab_length: f64,
    pub halvings: usize,
}

impl PicardDiagnostics {
    pub fn max_ratio(&self) -> Option<f64> {
        self.contraction_ratios.iter().copied().reduce(f64::max)
    }
}

/// Iterate values at the inner step times of one slab.
#[derive(Debug, Clone)]
struct SlabPath<T> {
    rho: Vec<ScalarField<T>>,
    u: Vec<VectorField<T>>,
    intensity: Vec<RadiationField<T>>,
}

impl<T: Real> SlabPath<T> {
    fn state(&self, n: usize) -> State<T> {
        State {
            intensity: self.intensity[n].clone(),
            rho: self.rho[n].clone(),
            u: self.u[n].clone(),
        }
    }
}

/// Whether `Gamma` carries the extra `|rho diff|_{3/2}^2` term (vacuum far field).
fn vacuum_far_field<T: Real>(grid: &SpatialGrid<T>) -> bool {
    grid.reference_density() == T::zero()
}

/// `||I' - I||^2_{L2(phase; L2)} + |rho' - rho|_2^2 + |sqrt(w) (u' - u)|_2^2`,
/// plus `|rho' - rho|_{3/2}^2` when the far-field density vanishes.
pub fn gamma_metric<T: Real>(
    prev: &State<T>,
    next: &State<T>,
    phase: &PhaseSpace<T>,
    rho_weight: &ScalarField<T>,
) -> Result<T> {
    let grid = &phase.grid;
    let di = next.intensity.sub(&prev.intensity);
    let rad = mixed_radiation_norm(
        &di,
        InnerNorm::L2,
        &phase.freq,
        &phase.ang,
        grid,
        &NormSettings::default(),
    )?;
    let dr: Vec<T> = next
        .rho
        .values()
        .iter()
        .zip(prev.rho.values())
        .map(|(a, b)| *a - *b)
        .collect();
    let rho2 = lp_norm_values(&dr, T::lit(2.0), grid)?;
    grid.check_len(rho_weight.len(), "density weight")?;
    let mut vel = T::zero();
    for a in 0..grid.dim() {
        for ((x, y), w) in next
            .u
            .component(a)
            .iter()
            .zip(prev.u.component(a))
            .zip(rho_weight.values())
        {
            vel = vel + *w * (*x - *y) * (*x - *y);
        }
    }
    vel = vel * grid.cell_volume();
    let mut g = rad * rad + rho2 * rho2 + vel;
    if vacuum_far_field(grid) {
        let r = lp_norm_values(&dr, T::lit(1.5), grid)?;
        g = g + r * r;
    }
    Ok(g)
}

struct Stepper<'a, T> {
    problem: &'a Problem<T>,
    op: CollisionOperator<'a, T>,
    continuity: ContinuityScheme,
}

impl<'a, T: Real> Stepper<'a, T> {
    fn new(problem: &'a Problem<T>, continuity: ContinuityScheme) -> Self {
        Self {
            problem,
            op: CollisionOperator::new(&problem.model, &problem.phase),
            continuity,
        }
    }

    fn grid(&self) -> &SpatialGrid<T> {
        &self.problem.phase.grid
    }

    fn c(&self) -> T {
        self.problem.consts.c()
    }

    /// Continuity over `[t, t + dt]` with `w` from `w_n` (and `w_np1` for the
    /// characteristics path), sub-stepping the finite-volume update to its CFL.
    fn continuity(
        &self,
        rho: &ScalarField<T>,
        w_n: &VectorField<T>,
        w_np1: &VectorField<T>,
        t: T,
        dt: T,
    ) -> Result<ScalarField<T>> {
        let grid = self.grid();
        match self.continuity {
            ContinuityScheme::FiniteVolume => {
                let limit = fv_dt_limit(w_n, grid);
                let subs = substeps(dt, limit);
                let h = dt / T::from_usize_lossy(subs);
                let mut r = rho.clone();
                for _ in 0..subs {
                    r = continuity_step_fv(&r, w_n, h, grid)?;
                }
                Ok(r)
            }
            ContinuityScheme::Characteristics => {
                let hist =
                    VelocityHistory::new(vec![t, t + dt], vec![w_n.clone(), w_np1.clone()], grid)?;
                Ok(continuity_step_characteristics(rho, &hist, t + dt, dt, grid)?.0)
            }
        }
    }

    fn transport(
        &self,
        i: &RadiationField<T>,
        psi: &RadiationField<T>,
        rho_new: &ScalarField<T>,
        t: T,
        dt: T,
    ) -> Result<RadiationField<T>> {
        let subs = substeps(dt, self.problem.phase.streaming_dt_limit(self.c()));
        let h = dt / T::from_usize_lossy(subs);
        let mut out = i.clone();
        for s in 0..subs {
            out = self.op.transport_step(
                &out,
                psi,
                rho_new,
                h,
                t + h * T::from_usize_lossy(s),
                self.c(),
            )?;
        }
        Ok(out)
    }

    fn free_stream(&self, i: &RadiationField<T>, dt: T) -> Result<RadiationField<T>> {
        let subs = substeps(dt, self.problem.phase.streaming_dt_limit(self.c()));
        let h = dt / T::from_usize_lossy(subs);
        let mut out = i.clone();
        for _ in 0..subs {
            out = free_stream_step(&self.problem.phase, &out, h, self.c())?;
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn momentum(
        &self,
        u: &VectorField<T>,
        rho_new: &ScalarField<T>,
        w: &VectorField<T>,
        i_new: &RadiationField<T>,
        t_new: T,
        dt: T,
    ) -> Result<VectorField<T>> {
        let p = self.problem.eos.pressure(rho_new)?;
        let f = self.op.momentum_source(i_new, rho_new, t_new, self.c())?;
        Ok(momentum_step(u, rho_new, w, &p, &f, &self.problem.visc, dt, self.grid())?.0)
    }
}

fn substeps<T: Real>(dt: T, limit: T) -> usize {
    if limit.is_infinite() || dt <= limit {
        1
    } else {
        (dt / limit).ceil().to_usize().unwrap_or(1).max(1)
    }
}

fn step_times<T: Real>(t0: T, length: T, dt: T) -> Vec<T> {
    let n = (length / dt - T::lit(1e-9))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let h = length / T::from_usize_lossy(n);
    (0..=n).map(|k| t0 + h * T::from_usize_lossy(k)).collect()
}

enum SlabOutcome<T> {
    Converged(SlabPath<T>, PicardDiagnostics),
    Stalled(PicardDiagnostics),
}

fn iterate_slab<T: Real>(
    stepper: &Stepper<'_, T>,
    state0: &State<T>,
    t0: T,
    length: T,
    cfg: &SlabConfig<T>,
) -> Result<SlabOutcome<T>> {
    let times = step_times(t0, length, cfg.dt);
    let steps = times.len() - 1;
    let phase = &stepper.problem.phase;

    // initial iterate
    let mut prev = SlabPath {
        rho: vec![state0.rho.clone(); steps + 1],
        u: Vec::with_capacity(steps + 1),
        intensity: Vec::with_capacity(steps + 1),
    };
    prev.u.push(state0.u.clone());
    prev.intensity.push(state0.intensity.clone());
    for n in 0..steps {
        let dt = times[n + 1] - times[n];
        prev.u.push(heat_flow(&prev.u[n], dt, stepper.grid())?);
        prev.intensity
            .push(stepper.free_stream(&prev.intensity[n], dt)?);
    }

    let mut diag = PicardDiagnostics {
        gamma_history: Vec::new(),
        contraction_ratios: Vec::new(),
        converged: false,
        iterations: 0,
        slab_length: length.as_f64(),
        halvings: 0,
    };
    let mut rising = 0;
    for _k in 0..cfg.max_iters {
        let mut next = SlabPath {
            rho: vec![state0.rho.clone()],
            u: vec![state0.u.clone()],
            intensity: vec![state0.intensity.clone()],
        };
        let mut gamma = T::zero();
        for n in 0..steps {
            let (t, dt) = (times[n], times[n + 1] - times[n]);
            let rho = stepper.continuity(&next.rho[n], &prev.u[n], &prev.u[n + 1], t, dt)?;
            let i = stepper.transport(&next.intensity[n], &prev.intensity[n], &rho, t, dt)?;
            let u = stepper.momentum(&next.u[n], &rho, &prev.u[n], &i, t + dt, dt)?;
            next.rho.push(rho);
            next.intensity.push(i);
            next.u.push(u);
            let g = gamma_metric(
                &prev.state(n + 1),
                &next.state(n + 1),
                phase,
                &next.rho[n + 1],
            )?;
            gamma = gamma.max(g);
        }
        diag.iterations += 1;
        let g = gamma.as_f64();
        if let Some(&last) = diag.gamma_history.last() {
            if last > 0.0 {
                diag.contraction_ratios.push(g / last);
            }
            rising = if g >= last { rising + 1 } else { 0 };
        }
        diag.gamma_history.push(g);
        let first = diag.gamma_history[0];
        if !g.is_finite() {
            return Ok(SlabOutcome::Stalled(diag));
        }
        if first == 0.0 || g <= cfg.gamma_tol.as_f64() * first {
            diag.converged = true;
            return Ok(SlabOutcome::Converged(next, diag));
        }
        if rising >= 3 {
            return Ok(SlabOutcome::Stalled(diag));
        }
        prev = next;
    }
    Ok(SlabOutcome::Stalled(diag))
}

/// Solves one slab starting at `t0`; on stall the slab is halved (at most
/// `cfg.max_halvings` times when `cfg.halve_on_stall`). Returns the state at
/// the end of the slab actually covered, whose length is in the diagnostics.
pub fn solve_slab<T: Real>(
    state0: &State<T>,
    problem: &Problem<T>,
    t0: T,
    cfg: &SlabConfig<T>,
) -> Result<(State<T>, PicardDiagnostics)> {
    let (path, diag) = solve_slab_path(state0, problem, t0, cfg)?;
    Ok((path.state(path.rho.len() - 1), diag))
}

fn solve_slab_path<T: Real>(
    state0: &State<T>,
    problem: &Problem<T>,
    t0: T,
    cfg: &SlabConfig<T>,
) -> Result<(SlabPath<T>, PicardDiagnostics)> {
    cfg.validate()?;
    state0.validate(&problem.phase)?;
    let stepper = Stepper::new(problem, cfg.continuity);
    let mut length = cfg.slab_length;
    let mut halvings = 0;
    let mut local = *cfg;
    loop {
        local.slab_length = length;
        local.dt = cfg.dt.min(length);
        match iterate_slab(&stepper, state0, t0, length, &local)? {
            SlabOutcome::Converged(path, mut diag) => {
                diag.halvings = halvings;
                return Ok((path, diag));
            }
            SlabOutcome::Stalled(diag) => {
                if !cfg.halve_on_stall || halvings >= cfg.max_halvings {
                    return Err(Error::Iteration {
                        message: format!(
                            "no convergence after {} iterations and {halvings} halvings",
                            diag.iterations
                        ),
                        slab_length: length.as_f64(),
                        gamma_history: diag.gamma_history,
                    });
                }
                halvings += 1;
                length = length * T::lit(0.5);
            }
        }
    }
}

/// Halves the slab (up to `max_halvings` times) until the iteration converges
/// with every contraction ratio below one.
pub fn find_contractive_slab<T: Real>(
    state0: &State<T>,
    problem: &Problem<T>,
    cfg: &SlabConfig<T>,
    max_halvings: usize,
) -> Result<(State<T>, PicardDiagnostics)> {
    let mut local = SlabConfig {
        halve_on_stall: false,
        ..*cfg
    };
    let mut last_history = Vec::new();
    for h in 0..=max_halvings {
        local.dt = cfg.dt.min(local.slab_length);
        match solve_slab(state0, problem, T::zero(), &local) {
            Ok((s, mut d)) if d.max_ratio().map_or(true, |r| r < 1.0) => {
                d.halvings = h;
                return Ok((s, d));
            }
            Ok((_, d)) => last_history = d.gamma_history,
            Err(Error::Iteration { gamma_history, .. }) => last_history = gamma_history,
            Err(e) => return Err(e),
        }
        local.slab_length = local.slab_length * T::lit(0.5);
    }
    Err(Error::Iteration {
        message: format!("no contractive slab within {max_halvings} halvings"),
        slab_length: (local.slab_length * T::lit(2.0)).as_f64(),
        gamma_history: last_history,
    })
}

/// Sequential reference scheme without fixed-point iteration: each inner
/// step updates `rho`, then `I` (scattering-in of `I^n`), then `u`.
pub fn solve_monolithic<T: Real>(
    state0: &State<T>,
    problem: &Problem<T>,
    t_final: T,
    dt: T,
    continuity: ContinuityScheme,
) -> Result<State<T>> {
    state0.validate(&problem.phase)?;
    if !(dt > T::zero()) || !(t_final > T::zero()) {
        return Err(Error::Parameter(
            "monolithic solve needs dt > 0 and t_final > 0".into(),
        ));
    }
    let stepper = Stepper::new(problem, continuity);
    let times = step_times(T::zero(), t_final, dt);
    let mut s = state0.clone();
    for n in 0..times.len() - 1 {
        let (t, h) = (times[n], times[n + 1] - times[n]);
        let rho = stepper.continuity(&s.rho, &s.u, &s.u, t, h)?;
        let i = stepper.transport(&s.intensity, &s.intensity, &rho, t, h)?;
        let u = stepper.momentum(&s.u, &rho, &s.u, &i, t + h, h)?;
        s = State {
            intensity: i,
            rho,
            u,
        };
    }
    Ok(s)
}

/// One CSV row of the Picard diagnostics stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardRow {
    pub slab: usize,
    pub k: usize,
    pub gamma: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub snapshots: Vec<State<T>>,
    pub slabs: Vec<PicardDiagnostics>,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> &State<T> {
        self.snapshots
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn picard_rows(&self) -> Vec<PicardRow> {
        let mut rows = Vec::new();
        for (s, d) in self.slabs.iter().enumerate() {
            for (k, g) in d.gamma_history.iter().enumerate() {
                let ratio = if k == 0 || d.gamma_history[k - 1] == 0.0 {
                    None
                } else {
                    Some(g / d.gamma_history[k - 1])
                };
                rows.push(PicardRow {
                    slab: s,
                    k: k + 1,
                    gamma: *g,
                    ratio,
                });
            }
        }
        rows
    }

    pub fn masses(&self, grid: &SpatialGrid<T>) -> Vec<T> {
        self.snapshots
            .iter()
            .map(|s| integrate_values(s.rho.values(), grid))
            .collect()
    }
}

/// Chains slabs over `[0, t_final]`, keeping every `snapshot_every`-th inner
/// step (and each slab end).
pub fn solve<T: Real>(
    state0: &State<T>,
    problem: &Problem<T>,
    t_final: T,
    cfg: &SlabConfig<T>,
    snapshot_every: usize,
) -> Result<Trajectory<T>> {
    if !(t_final > T::zero()) {
        return Err(Error::Parameter(format!(
            "t_final {t_final} must be positive"
        )));
    }
    let every = snapshot_every.max(1);
    let mut traj = Trajectory {
        times: vec![T::zero()],
        snapshots: vec![state0.clone()],
        slabs: Vec::new(),
    };
    let mut t = T::zero();
    let mut state = state0.clone();
    let eps = t_final * T::lit(1e-12);
    while t < t_final - eps {
        let mut local = *cfg;
        local.slab_length = cfg.slab_length.min(t_final - t);
        local.dt = cfg.dt.min(local.slab_length);
        let (path, diag) = solve_slab_path(&state, problem, t, &local)?;
        let covered = T::lit(diag.slab_length);
        let times = step_times(t, covered, local.dt.min(covered));
        let last = path.rho.len() - 1;
        for n in 1..=last {
            if n % every == 0 || n == last {
                traj.times.push(times[n]);
                traj.snapshots.push(path.state(n));
            }
        }
        state = path.state(last);
        t = t + covered;
        traj.slabs.push(diag);
    }
    Ok(traj)
}

/// Decreasing regularization levels `delta` for `rho_0 + delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSchedule<T> {
    deltas: Vec<T>,
    pub extrapolate: bool,
}

impl<T: Real> DeltaSchedule<T> {
    pub fn new(deltas: Vec<T>, extrapolate: bool) -> Result<Self> {
        if deltas.is_empty()
            || deltas.iter().any(|d| !(*d > T::zero()))
            || deltas.windows(2).any(|w| !(w[1] < w[0]))
        {
            return Err(Error::Parameter(
                "delta schedule must be a nonempty strictly decreasing list of positive values"
                    .into(),
            ));
        }
        Ok(Self {
            deltas,
            extrapolate,
        })
    }

    pub fn deltas(&self) -> &[T] {
        &self.deltas
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaDifference {
    pub delta_from: f64,
    pub delta_to: f64,
    pub rho_sup: f64,
    pub u_l2: f64,
    /// `rho_sup + u_l2`, the quantity checked for monotone decay.
    pub combined: f64,
}

#[derive(Debug, Clone)]
pub struct ContinuationReport<T> {
    pub deltas: Vec<f64>,
    pub finals: Vec<State<T>>,
    pub differences: Vec<DeltaDifference>,
    /// `log(d_i / d_{i+1}) / log(gap_i / gap_{i+1})` of consecutive combined
    /// differences against the matching gaps in `delta`.
    pub observed_orders: Vec<f64>,
    pub monotone: bool,
    pub extrapolated: Option<State<T>>,
    pub warnings: Vec<String>,
}

pub fn lift_density<T: Real>(state: &State<T>, delta: T) -> State<T> {
    State {
        rho: state.rho.map(|r| r + delta),
        ..state.clone()
    }
}

/// Solves with `rho_0 + delta` for each scheduled `delta` and compares the
/// final states of consecutive levels. The lifted problems use the lifted
/// far-field density as well.
pub fn delta_continuation<T: Real>(
    state0: &State<T>,
    problem: &Problem<T>,
    schedule: &DeltaSchedule<T>,
    t_final: T,
    cfg: &SlabConfig<T>,
) -> Result<ContinuationReport<T>> {
    let mut finals = Vec::new();
    for &d in schedule.deltas() {
        let mut lifted = problem.clone();
        if problem.phase.grid.boundary() == Boundary::Farfield
            || problem.phase.grid.farfield_density().is_some()
        {
            let rb = problem.phase.grid.reference_density() + d;
            lifted.phase.grid = problem.phase.grid.clone().with_reference_density(rb);
        }
        let traj = solve(&lift_density(state0, d), &lifted, t_final, cfg, usize::MAX)?;
        finals.push(traj.final_state().clone());
    }
    let grid = &problem.phase.grid;
    let deltas: Vec<f64> = schedule.deltas().iter().map(|d| d.as_f64()).collect();
    let mut differences = Vec::new();
    for k in 0..finals.len().saturating_sub(1) {
        let dr = finals[k].rho.sub(&finals[k + 1].rho);
        let rho_sup = lp_norm(&dr, T::infinity(), grid)?.as_f64();
        let du = finals[k].u.sub(&finals[k + 1].u);
        let u_l2 = crate::norms::lp_norm_vector(&du, T::lit(2.0), grid)?.as_f64();
        differences.push(DeltaDifference {
            delta_from: deltas[k],
            delta_to: deltas[k + 1],
            rho_sup,
            u_l2,
            combined: rho_sup + u_l2,
        });
    }
    let monotone = differences
        .windows(2)
        .all(|w| w[1].combined < w[0].combined);
    let mut warnings = Vec::new();
    if !monotone {
        warnings.push(
            "differences between consecutive delta levels are not strictly decreasing".to_string(),
        );
    }
    let observed_orders = differences
        .windows(2)
        .map(|w| {
            let gap0 = w[0].delta_from - w[0].delta_to;
            let gap1 = w[1].delta_from - w[1].delta_to;
            (w[0].combined / w[1].combined).ln() / (gap0 / gap1).ln()
        })
        .collect();
    let extrapolated = if schedule.extrapolate && finals.len() >= 2 {
        let n = finals.len();
        let (d1, d0) = (schedule.deltas()[n - 1], schedule.deltas()[n - 2]);
        let (s1, s0) = (&finals[n - 1], &finals[n - 2]);
        // first-order Richardson: X(0) = X(d1) - d1 (X(d0) - X(d1)) / (d0 - d1)
        let f = d1 / (d0 - d1);
        let rho = s1.rho.sub(&s0.rho.sub(&s1.rho).scale(f));
        let clipped = rho.values().iter().filter(|v| **v < T::zero()).count();
        if clipped > 0 {
            warnings.push(format!(
                "extrapolated density clipped at zero in {clipped} cells"
            ));
        }
        Some(State {
            rho: rho.map(|v| v.max(T::zero())),
            u: s1.u.sub(&s0.u.sub(&s1.u).scale(f)),
            intensity: s1
                .intensity
                .sub(&s0.intensity.sub(&s1.intensity).map(|v| v * f))
                .map(|v| v.max(T::zero())),
        })
    } else {
        None
    };
    Ok(ContinuationReport {
        deltas,
        finals,
        differences,
        observed_orders,
        monotone,
        extrapolated,
        warnings,
    })
}
