use super::lame::push_lame_row;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{gradient, SpatialGrid};
use crate::linalg::{bicgstab, pcg, CsrBuilder, CsrMatrix};
use crate::physics::ViscosityParams;
use crate::scalar::Real;

/// Iteration count and final relative residual of the linear solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumReport {
    pub iterations: usize,
    pub residual: f64,
    /// Whether the symmetric (no convection) solver path was used.
    pub symmetric: bool,
}

pub const MOMENTUM_MAX_ITERATIONS: usize = 10_000;

fn assemble<T: Real>(
    rho: &[T],
    w: &VectorField<T>,
    visc: &ViscosityParams<T>,
    dt: T,
    grid: &SpatialGrid<T>,
) -> Result<CsrMatrix<T>> {
    let n = grid.len();
    let mut b = CsrBuilder::new(grid.dim() * n);
    for a in 0..grid.dim() {
        for i in 0..n {
            let row = a * n + i;
            b.add(row, rho[i] / dt);
            for ax in 0..grid.dim() {
                let c = rho[i] * w.component(ax)[i] / grid.spacing(ax);
                if c > T::zero() {
                    b.add(row, c);
                    if let Some(j) = grid.neighbor(i, ax, -1) {
                        b.add(a * n + j, -c);
                    }
                } else if c < T::zero() {
                    b.add(row, -c);
                    if let Some(j) = grid.neighbor(i, ax, 1) {
                        b.add(a * n + j, c);
                    }
                }
            }
            push_lame_row(&mut b, visc, grid, a, i);
            b.finish_row();
        }
    }
    b.build()
}

/// Backward-Euler step of the linearized momentum equation
///
/// ```text
/// rho (u - u_n) / dt + rho w . grad u + L u = -grad p + f
/// ```
///
/// with upwind convection inside the matrix. Where `rho = 0` the row reduces
/// to the elliptic balance `L u = -grad p + f`. Without convection the matrix
/// is symmetric and conjugate gradients are used; otherwise BiCGSTAB. Both are
/// Jacobi-preconditioned and stop at relative residual
/// [`Real::solver_tolerance`].
#[allow(clippy::too_many_arguments)]
pub fn momentum_step<T: Real>(
    u_n: &VectorField<T>,
    rho: &ScalarField<T>,
    w: &VectorField<T>,
    pressure: &ScalarField<T>,
    rad_source: &VectorField<T>,
    visc: &ViscosityParams<T>,
    dt: T,
    grid: &SpatialGrid<T>,
) -> Result<(VectorField<T>, MomentumReport)> {
    for (f, what) in [
        (u_n, "velocity"),
        (w, "advecting velocity"),
        (rad_source, "radiation source"),
    ] {
        if f.dim() != grid.dim() {
            return Err(Error::Structural(format!(
                "{what} has {} components on a {}-d grid",
                f.dim(),
                grid.dim()
            )));
        }
        grid.check_len(f.len(), what)?;
    }
    grid.check_len(rho.len(), "density")?;
    rho.check_nonnegative("density")?;
    if !(dt > T::zero()) {
        return Err(Error::StepSize {
            what: "momentum step needs dt > 0".into(),
            dt: dt.as_f64(),
            limit: f64::INFINITY,
        });
    }
    let grad_p = gradient(pressure, grid)?;
    let n = grid.len();
    let mut rhs = Vec::with_capacity(grid.dim() * n);
    for a in 0..grid.dim() {
        for i in 0..n {
            rhs.push(
                rho.values()[i] * u_n.component(a)[i] / dt - grad_p.component(a)[i]
                    + rad_source.component(a)[i],
            );
        }
    }
    let a = assemble(rho.values(), w, visc, dt, grid)?;
    let convective =
        rho.values().iter().enumerate().any(|(i, r)| {
            *r != T::zero() && (0..grid.dim()).any(|ax| w.component(ax)[i] != T::zero())
        });
    let mut x = u_n.to_flat();
    let tol = T::solver_tolerance();
    let stats = if convective {
        bicgstab(&a, &rhs, &mut x, tol, MOMENTUM_MAX_ITERATIONS)?
    } else {
        pcg(&a, &rhs, &mut x, tol, MOMENTUM_MAX_ITERATIONS)?
    };
    let u = VectorField::from_flat(&x, grid.dim());
    if !u.is_finite() {
        return Err(Error::Solver {
            iterations: stats.iterations,
            residual: f64::NAN,
        });
    }
    Ok((
        u,
        MomentumReport {
            iterations: stats.iterations,
            residual: stats.relative_residual.as_f64(),
            symmetric: !convective,
        },
    ))
}
