use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{divergence, Boundary, SpatialGrid};
use crate::scalar::Real;

/// Velocity samples `w(t_k)` at increasing times, linearly interpolated in
/// time and multilinearly in space (far-field ghosts hold `w = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityHistory<T> {
    times: Vec<T>,
    fields: Vec<VectorField<T>>,
    divs: Vec<Vec<T>>,
}

impl<T: Real> VelocityHistory<T> {
    pub fn new(times: Vec<T>, fields: Vec<VectorField<T>>, grid: &SpatialGrid<T>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::Structural(format!(
                "velocity history has {} times and {} fields",
                times.len(),
                fields.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter(
                "velocity history times must be strictly increasing".into(),
            ));
        }
        let divs = fields
            .iter()
            .map(|w| divergence(w, grid).map(ScalarField::into_values))
            .collect::<Result<_>>()?;
        Ok(Self {
            times,
            fields,
            divs,
        })
    }

    /// A velocity field frozen in time over `[t0, t1]`.
    pub fn steady(w: VectorField<T>, t0: T, t1: T, grid: &SpatialGrid<T>) -> Result<Self> {
        if t1 > t0 {
            Self::new(vec![t0, t1], vec![w.clone(), w], grid)
        } else {
            Self::new(vec![t0], vec![w], grid)
        }
    }

    pub fn start(&self) -> T {
        self.times[0]
    }

    pub fn end(&self) -> T {
        self.times[self.times.len() - 1]
    }

    /// Bracketing sample indices and the weight of the upper one.
    fn bracket(&self, t: T) -> (usize, usize, T) {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return (0, 0, T::zero());
        }
        if t >= self.times[n - 1] {
            return (n - 1, n - 1, T::zero());
        }
        let k = self.times.partition_point(|s| *s <= t) - 1;
        let th = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        (k, k + 1, th)
    }

    fn sample<'s>(
        &'s self,
        grid: &SpatialGrid<T>,
        data: impl Fn(usize) -> (&'s [T], T),
        t: T,
        pos: &[T; 3],
    ) -> (T, bool) {
        let (lo, hi, th) = self.bracket(t);
        let (vl, fl) = data(lo);
        let (a, ca) = grid.interpolate(vl, fl, pos);
        if th == T::zero() {
            return (a, ca);
        }
        let (vh, fh) = data(hi);
        let (b, cb) = grid.interpolate(vh, fh, pos);
        (a + th * (b - a), ca || cb)
    }

    pub fn velocity(&self, grid: &SpatialGrid<T>, t: T, pos: &[T; 3]) -> ([T; 3], bool) {
        let mut out = [T::zero(); 3];
        let mut clamped = false;
        for (a, o) in out.iter_mut().enumerate().take(grid.dim()) {
            let (v, c) = self.sample(grid, |k| (self.fields[k].component(a), T::zero()), t, pos);
            *o = v;
            clamped |= c;
        }
        (out, clamped)
    }

    pub fn divergence(&self, grid: &SpatialGrid<T>, t: T, pos: &[T; 3]) -> T {
        self.sample(grid, |k| (self.divs[k].as_slice(), T::zero()), t, pos)
            .0
    }
}

/// Departure points `U(t0; t, x)` of the backward characteristics through the
/// cell centers, and `int_{t0}^{t} div w` along each path.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap<T> {
    pub departure: Vec<[T; 3]>,
    pub div_integral: Vec<T>,
    /// Number of paths that left the padded domain and were clamped.
    pub clamped: usize,
}

fn axpy<T: Real>(x: &[T; 3], h: T, v: &[T; 3]) -> [T; 3] {
    [x[0] + h * v[0], x[1] + h * v[1], x[2] + h * v[2]]
}

/// Traces `dU/ds = w(s, U)` backward from `(t, x_cell)` to the history start
/// with Heun's method (steps of at most `dt`); the divergence integral uses
/// the trapezoid rule on the same nodes.
pub fn integrate_flow_map<T: Real>(
    history: &VelocityHistory<T>,
    t: T,
    dt: T,
    grid: &SpatialGrid<T>,
) -> Result<FlowMap<T>> {
    let t0 = history.start();
    if !(dt > T::zero()) || t < t0 {
        return Err(Error::Parameter(format!(
            "flow map needs dt > 0 and t >= history start, got dt = {dt}, t = {t}"
        )));
    }
    if t > history.end() + dt * T::lit(1e-9) && history.times.len() > 1 {
        return Err(Error::Parameter(format!(
            "velocity history ends at {} before t = {t}",
            history.end()
        )));
    }
    let span = t - t0;
    let steps = (span / dt)
        .ceil()
        .to_usize()
        .unwrap_or(0)
        .max(if span > T::zero() { 1 } else { 0 });
    let h = if steps > 0 {
        -span / T::from_usize_lossy(steps)
    } else {
        T::zero()
    };
    let mut departure = Vec::with_capacity(grid.len());
    let mut div_integral = Vec::with_capacity(grid.len());
    let mut clamped = 0;
    for cell in 0..grid.len() {
        let mut x = grid.center(cell);
        let mut s = t;
        let mut acc = T::zero();
        let mut flagged = false;
        let mut d_here = history.divergence(grid, s, &x);
        for _ in 0..steps {
            let (k1, c1) = history.velocity(grid, s, &x);
            let pred = axpy(&x, h, &k1);
            let (k2, c2) = history.velocity(grid, s + h, &pred);
            let mean = [
                (k1[0] + k2[0]) * T::lit(0.5),
                (k1[1] + k2[1]) * T::lit(0.5),
                (k1[2] + k2[2]) * T::lit(0.5),
            ];
            x = axpy(&x, h, &mean);
            s = s + h;
            let d_next = history.divergence(grid, s, &x);
            acc = acc + (d_here + d_next) * T::lit(0.5) * (-h);
            d_here = d_next;
            flagged |= c1 || c2;
        }
        if grid.boundary() == Boundary::Farfield {
            flagged |= clamp_to_padding(&mut x, grid);
        }
        clamped += flagged as usize;
        departure.push(x);
        div_integral.push(acc);
    }
    Ok(FlowMap {
        departure,
        div_integral,
        clamped,
    })
}

/// Clamps into the padded box reaching the ghost-cell centers.
fn clamp_to_padding<T: Real>(x: &mut [T; 3], grid: &SpatialGrid<T>) -> bool {
    let mut hit = false;
    for a in 0..grid.dim() {
        let h = grid.spacing(a);
        let lo = grid.origin()[a] - h * T::lit(0.5);
        let hi = grid.origin()[a] + grid.domain_length(a) + h * T::lit(0.5);
        if x[a] < lo {
            x[a] = lo;
            hit = true;
        } else if x[a] > hi {
            x[a] = hi;
            hit = true;
        }
    }
    hit
}

/// `rho(t, x) = rho0(U(t0; t, x)) exp(-int div w)` along backward
/// characteristics. `rho0` is interpolated with its far value as ghost.
/// The result is nonnegative whenever `rho0` is.
pub fn continuity_step_characteristics<T: Real>(
    rho0: &ScalarField<T>,
    history: &VelocityHistory<T>,
    t: T,
    dt: T,
    grid: &SpatialGrid<T>,
) -> Result<(ScalarField<T>, FlowMap<T>)> {
    grid.check_len(rho0.len(), "initial density")?;
    rho0.check_nonnegative("initial density")?;
    let map = integrate_flow_map(history, t, dt, grid)?;
    let values = map
        .departure
        .iter()
        .zip(&map.div_integral)
        .map(|(x, d)| {
            grid.interpolate(rho0.values(), rho0.far(), x)
                .0
                .max(T::zero())
                * (-*d).exp()
        })
        .collect();
    Ok((ScalarField::with_far(values, rho0.far()), map))
}

/// Face velocity `(w_i + w_{i+e_a}) / 2` on the upper face of `cell` along `a`.
fn face_velocity<T: Real>(w: &[T], grid: &SpatialGrid<T>, cell: usize, a: usize, step: isize) -> T {
    let nb = grid.neighbor(cell, a, step).map_or(T::zero(), |j| w[j]);
    (w[cell] + nb) * T::lit(0.5)
}

/// Largest `dt` keeping every cell's outflow fraction
/// `dt sum_a (max(w_{i+1/2}, 0) + max(-w_{i-1/2}, 0)) / h_a` at most one.
pub fn fv_dt_limit<T: Real>(w: &VectorField<T>, grid: &SpatialGrid<T>) -> T {
    let mut worst = T::zero();
    for cell in 0..grid.len() {
        let mut out = T::zero();
        for a in 0..grid.dim() {
            let c = w.component(a);
            let up = face_velocity(c, grid, cell, a, 1);
            let dn = face_velocity(c, grid, cell, a, -1);
            out = out + (up.max(T::zero()) + (-dn).max(T::zero())) / grid.spacing(a);
        }
        worst = worst.max(out);
    }
    if worst == T::zero() {
        T::infinity()
    } else {
        T::one() / worst
    }
}

/// First-order upwind finite-volume step of `rho_t + div(rho w) = 0`.
///
/// Fluxes telescope, so `sum rho` is conserved on periodic grids; far-field
/// ghosts supply `rho.far()`. Positivity holds under [`fv_dt_limit`], which
/// is enforced.
pub fn continuity_step_fv<T: Real>(
    rho: &ScalarField<T>,
    w: &VectorField<T>,
    dt: T,
    grid: &SpatialGrid<T>,
) -> Result<ScalarField<T>> {
    grid.check_len(rho.len(), "density")?;
    grid.check_len(w.len(), "velocity")?;
    if w.dim() != grid.dim() {
        return Err(Error::Structural(
            "velocity dimension does not match grid".into(),
        ));
    }
    let limit = fv_dt_limit(w, grid);
    if !(dt >= T::zero()) || dt > limit {
        return Err(Error::StepSize {
            what: "continuity upwind CFL (cell outflow fraction <= 1)".into(),
            dt: dt.as_f64(),
            limit: limit.as_f64(),
        });
    }
    let r = rho.values();
    let far = rho.far();
    let mut out = r.to_vec();
    for a in 0..grid.dim() {
        let c = w.component(a);
        let ratio = dt / grid.spacing(a);
        // flux through the upper face of every cell, and through the lower
        // boundary faces of far-field grids
        for cell in 0..grid.len() {
            let vf = face_velocity(c, grid, cell, a, 1);
            let up = grid.neighbor(cell, a, 1);
            let donor = if vf >= T::zero() {
                r[cell]
            } else {
                up.map_or(far, |j| r[j])
            };
            let flux = ratio * vf * donor;
            out[cell] = out[cell] - flux;
            if let Some(j) = up {
                out[j] = out[j] + flux;
            }
            if grid.neighbor(cell, a, -1).is_none() {
                let vf = face_velocity(c, grid, cell, a, -1);
                let donor = if vf >= T::zero() { far } else { r[cell] };
                out[cell] = out[cell] + ratio * vf * donor;
            }
        }
    }
    // round-off can leave -0 or tiny negatives at an exact CFL
    let floor = -T::epsilon() * T::lit(16.0) * rho.max().max(far).max(T::one());
    for v in &mut out {
        if *v < T::zero() && *v > floor {
            *v = T::zero();
        }
    }
    Ok(ScalarField::with_far(out, far))
}
