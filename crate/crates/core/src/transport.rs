//! Radiative transfer: collision operator, radiation moments, and the
//! linearized transport step
//!
//! ```text
//! (1/c) I_t + Omega . grad I + Lambda I = F,
//! Lambda = sigma_a + int sigma_s',   F = S + int (v/v') sigma_s psi',
//! ```
//!
//! with explicit first-order upwind streaming and implicit removal.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{RadiationField, ScalarField, VectorField};
use crate::phase::PhaseSpace;
use crate::physics::CoefficientModel;
use crate::quadrature::{radiation_moment1, radiation_moment2};
use crate::scalar::Real;

/// The scattering double integrals, tabulated once per model on the
/// discrete phase space (the kernels do not depend on `t` or `x`).
#[derive(Debug, Clone)]
pub struct ScatteringTables<T> {
    pairs: usize,
    /// `K[(b,m), (b',m')] = wb_b' w_m' (v_b / v_b') sigma_s_bar(v_b' -> v_b, Omega_m' . Omega_m)`.
    gain: Vec<T>,
    /// `sum_{b',m'} wb_b' w_m' sigma_s_bar'(v_b -> v_b', Omega_m . Omega_m')` per `(b, m)`.
    loss: Vec<T>,
    any_gain: bool,
}

impl<T: Real> ScatteringTables<T> {
    pub fn new(model: &CoefficientModel<T>, phase: &PhaseSpace<T>) -> Self {
        let (nb, nm) = (phase.bands(), phase.ordinates());
        let pairs = nb * nm;
        let mut gain = Vec::with_capacity(pairs * pairs);
        let mut loss = Vec::with_capacity(pairs);
        for b in 0..nb {
            let v = phase.freq.center(b);
            for m in 0..nm {
                let mut out = T::zero();
                for bp in 0..nb {
                    let vp = phase.freq.center(bp);
                    for mp in 0..nm {
                        let mu = phase.ang.cosine(m, mp);
                        let w = phase.weight(bp, mp);
                        gain.push(w * (v / vp) * model.scatter_gain_kernel(vp, v, mu));
                        out = out + w * model.scatter_loss_kernel(v, vp, mu);
                    }
                }
                loss.push(out);
            }
        }
        let any_gain = gain.iter().any(|k| *k != T::zero());
        Self {
            pairs,
            gain,
            loss,
            any_gain,
        }
    }

    pub fn gain_entry(&self, row: usize, col: usize) -> T {
        self.gain[row * self.pairs + col]
    }

    pub fn loss_rate(&self, row: usize) -> T {
        self.loss[row]
    }
}

/// A coefficient model bound to a phase space, with its scattering tables.
#[derive(Debug, Clone)]
pub struct CollisionOperator<'a, T> {
    pub model: &'a CoefficientModel<T>,
    pub phase: &'a PhaseSpace<T>,
    tables: ScatteringTables<T>,
}

/// `Lambda` and `F` of the linearized transfer equation per `(b, m, cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionDecomposition<T> {
    pub removal: RadiationField<T>,
    pub gain: RadiationField<T>,
}

impl<'a, T: Real> CollisionOperator<'a, T> {
    pub fn new(model: &'a CoefficientModel<T>, phase: &'a PhaseSpace<T>) -> Self {
        Self {
            model,
            phase,
            tables: ScatteringTables::new(model, phase),
        }
    }

    pub fn tables(&self) -> &ScatteringTables<T> {
        &self.tables
    }

    fn check(&self, fields: &[(&RadiationField<T>, &str)], rho: &ScalarField<T>) -> Result<()> {
        for (f, what) in fields {
            self.phase.check_field(f, what)?;
        }
        self.phase.grid.check_len(rho.len(), "density")
    }

    /// Removal rate of row `(b, m)` at every cell.
    fn removal_row(&self, b: usize, m: usize, rho: &[T], t: T, out: &mut [T]) {
        let row = b * self.phase.ordinates() + m;
        let loss = self.tables.loss_rate(row);
        for (c, o) in out.iter_mut().enumerate() {
            let p = self.phase.point(b, m, c, t);
            *o = rho[c] * (self.model.sigma(&p, rho[c]) + loss);
        }
    }

    /// Gain of row `(b, m)` at every cell: emission plus scattering-in of `psi`.
    fn gain_row(
        &self,
        b: usize,
        m: usize,
        psi: &RadiationField<T>,
        rho: &[T],
        t: T,
        out: &mut [T],
    ) {
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.model.emission(&self.phase.point(b, m, c, t), rho[c]);
        }
        if !self.tables.any_gain {
            return;
        }
        let row = b * self.phase.ordinates() + m;
        let nm = self.phase.ordinates();
        let mut acc = vec![T::zero(); out.len()];
        for col in 0..self.tables.pairs {
            let k = self.tables.gain_entry(row, col);
            if k == T::zero() {
                continue;
            }
            for (a, &v) in acc.iter_mut().zip(psi.slice(col / nm, col % nm)) {
                *a = *a + k * v;
            }
        }
        for ((o, a), r) in out.iter_mut().zip(acc).zip(rho) {
            *o = *o + *r * a;
        }
    }

    pub fn decompose(
        &self,
        psi: &RadiationField<T>,
        rho: &ScalarField<T>,
        t: T,
    ) -> Result<CollisionDecomposition<T>> {
        self.check(&[(psi, "psi")], rho)?;
        let n = self.phase.cells();
        let nm = self.phase.ordinates();
        let mut removal = self.phase.zeros();
        let mut gain = self.phase.zeros();
        removal
            .values_mut()
            .par_chunks_mut(n)
            .zip(gain.values_mut().par_chunks_mut(n))
            .enumerate()
            .for_each(|(row, (rem, gn))| {
                self.removal_row(row / nm, row % nm, rho.values(), t, rem);
                self.gain_row(row / nm, row % nm, psi, rho.values(), t, gn);
            });
        Ok(CollisionDecomposition { removal, gain })
    }

    /// `A_r` with the scattering-in integral taken over `psi` and removal
    /// acting on `intensity`: `F(psi) - Lambda I`.
    pub fn linearized(
        &self,
        intensity: &RadiationField<T>,
        psi: &RadiationField<T>,
        rho: &ScalarField<T>,
        t: T,
    ) -> Result<RadiationField<T>> {
        self.check(&[(intensity, "intensity")], rho)?;
        let d = self.decompose(psi, rho, t)?;
        let values = d
            .gain
            .values()
            .iter()
            .zip(d.removal.values())
            .zip(intensity.values())
            .map(|((g, l), i)| *g - *l * *i)
            .collect();
        RadiationField::from_values(
            self.phase.bands(),
            self.phase.ordinates(),
            self.phase.cells(),
            values,
        )
    }

    /// `A_r = S - sigma_a I + int ((v/v') sigma_s I' - sigma_s' I)`.
    pub fn term(
        &self,
        intensity: &RadiationField<T>,
        rho: &ScalarField<T>,
        t: T,
    ) -> Result<RadiationField<T>> {
        self.linearized(intensity, intensity, rho, t)
    }

    /// `-(1/c) int int A_r Omega`.
    pub fn momentum_source(
        &self,
        intensity: &RadiationField<T>,
        rho: &ScalarField<T>,
        t: T,
        c: T,
    ) -> Result<VectorField<T>> {
        let a = self.term(intensity, rho, t)?;
        Ok(
            radiation_moment1(&a, &self.phase.freq, &self.phase.ang, self.phase.grid.dim())?
                .scale(-T::one() / c),
        )
    }

    /// One step of the linearized transfer equation from `t` to `t + dt`.
    ///
    /// With `nu_a = c dt |Omega_a| / h_a` and `nu = sum_a nu_a <= 1`,
    ///
    /// ```text
    /// I^{n+1} = ((1 - nu) I_i + sum_a nu_a I_up(a) + c dt F) / (1 + c dt Lambda),
    /// ```
    ///
    /// where `F` and `Lambda` use `psi`, `rho_new` and time `t + dt`. Every
    /// term is a nonnegative combination of nonnegative data, so the step
    /// preserves `I >= 0` exactly. Inflow through far-field boundaries is zero.
    #[allow(clippy::too_many_arguments)]
    pub fn transport_step(
        &self,
        intensity: &RadiationField<T>,
        psi: &RadiationField<T>,
        rho_new: &ScalarField<T>,
        dt: T,
        t: T,
        c: T,
    ) -> Result<RadiationField<T>> {
        self.check(&[(intensity, "intensity"), (psi, "psi")], rho_new)?;
        check_streaming_dt(self.phase, dt, c)?;
        let n = self.phase.cells();
        let nm = self.phase.ordinates();
        let cdt = c * dt;
        let t_new = t + dt;
        let mut out = self.phase.zeros();
        out.values_mut()
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(row, dst)| {
                let (b, m) = (row / nm, row % nm);
                let mut removal = vec![T::zero(); n];
                self.removal_row(b, m, rho_new.values(), t_new, &mut removal);
                self.gain_row(b, m, psi, rho_new.values(), t_new, dst);
                let streamed = upwind_stream(self.phase, intensity.slice(b, m), m, cdt);
                for ((o, s), l) in dst.iter_mut().zip(streamed).zip(removal) {
                    *o = (s + cdt * *o) / (T::one() + cdt * l);
                }
            });
        Ok(out)
    }
}

fn check_streaming_dt<T: Real>(phase: &PhaseSpace<T>, dt: T, c: T) -> Result<()> {
    let limit = phase.streaming_dt_limit(c);
    if !(dt > T::zero()) || dt > limit * (T::one() + T::lit(8.0) * T::epsilon()) {
        return Err(Error::StepSize {
            what: "radiation streaming CFL c dt sum |Omega_a| / h_a <= 1".into(),
            dt: dt.as_f64(),
            limit: limit.as_f64(),
        });
    }
    Ok(())
}

/// Explicit upwind streaming of one ordinate: `(1 - nu) I_i + sum_a nu_a I_up(a)`.
fn upwind_stream<T: Real>(phase: &PhaseSpace<T>, slice: &[T], m: usize, cdt: T) -> Vec<T> {
    let grid = &phase.grid;
    let dir = phase.ang.direction(m);
    let mut nus = [T::zero(); 3];
    let mut steps = [0isize; 3];
    for a in 0..grid.dim() {
        nus[a] = cdt * dir[a].abs() / grid.spacing(a);
        steps[a] = if dir[a] > T::zero() { -1 } else { 1 };
    }
    let nu = nus.iter().fold(T::zero(), |s, v| s + *v);
    let keep = (T::one() - nu).max(T::zero());
    (0..slice.len())
        .map(|i| {
            let mut v = keep * slice[i];
            for a in 0..grid.dim() {
                if nus[a] != T::zero() {
                    v = v + nus[a]
                        * grid
                            .neighbor(i, a, steps[a])
                            .map_or(T::zero(), |j| slice[j]);
                }
            }
            v
        })
        .collect()
}

/// Collisionless streaming `f_t + c Omega . grad f = 0` by the same upwind
/// scheme.
pub fn free_stream_step<T: Real>(
    phase: &PhaseSpace<T>,
    intensity: &RadiationField<T>,
    dt: T,
    c: T,
) -> Result<RadiationField<T>> {
    phase.check_field(intensity, "intensity")?;
    check_streaming_dt(phase, dt, c)?;
    let n = phase.cells();
    let nm = phase.ordinates();
    let mut out = phase.zeros();
    out.values_mut()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(row, dst)| {
            dst.copy_from_slice(&upwind_stream(
                phase,
                intensity.slice(row / nm, row % nm),
                row % nm,
                c * dt,
            ));
        });
    Ok(out)
}

/// Convenience wrapper building the operator on the fly.
pub fn collision_term<T: Real>(
    intensity: &RadiationField<T>,
    rho: &ScalarField<T>,
    model: &CoefficientModel<T>,
    phase: &PhaseSpace<T>,
    t: T,
) -> Result<RadiationField<T>> {
    CollisionOperator::new(model, phase).term(intensity, rho, t)
}

pub fn linearized_collision_term<T: Real>(
    intensity: &RadiationField<T>,
    psi: &RadiationField<T>,
    rho: &ScalarField<T>,
    model: &CoefficientModel<T>,
    phase: &PhaseSpace<T>,
    t: T,
) -> Result<RadiationField<T>> {
    CollisionOperator::new(model, phase).linearized(intensity, psi, rho, t)
}

pub fn momentum_source<T: Real>(
    intensity: &RadiationField<T>,
    rho: &ScalarField<T>,
    model: &CoefficientModel<T>,
    phase: &PhaseSpace<T>,
    t: T,
    c: T,
) -> Result<VectorField<T>> {
    CollisionOperator::new(model, phase).momentum_source(intensity, rho, t, c)
}

#[allow(clippy::too_many_arguments)]
pub fn transport_step<T: Real>(
    intensity: &RadiationField<T>,
    psi: &RadiationField<T>,
    rho_new: &ScalarField<T>,
    model: &CoefficientModel<T>,
    phase: &PhaseSpace<T>,
    dt: T,
    t: T,
    c: T,
) -> Result<RadiationField<T>> {
    CollisionOperator::new(model, phase).transport_step(intensity, psi, rho_new, dt, t, c)
}

/// `F_r = int int I Omega`.
pub fn radiation_flux<T: Real>(
    intensity: &RadiationField<T>,
    phase: &PhaseSpace<T>,
) -> Result<VectorField<T>> {
    radiation_moment1(intensity, &phase.freq, &phase.ang, phase.grid.dim())
}

/// `P_r = (1/c) int int I Omega (x) Omega`.
pub fn radiation_pressure_tensor<T: Real>(
    intensity: &RadiationField<T>,
    phase: &PhaseSpace<T>,
    c: T,
) -> Result<Vec<[[T; 3]; 3]>> {
    let mut p = radiation_moment2(intensity, &phase.freq, &phase.ang)?;
    for cell in &mut p {
        for row in cell.iter_mut() {
            for v in row.iter_mut() {
                *v = *v / c;
            }
        }
    }
    Ok(p)
}
