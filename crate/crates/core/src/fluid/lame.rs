use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{divergence, face_differences, gradient, SpatialGrid};
use crate::linalg::{CsrBuilder, CsrMatrix};
use crate::physics::ViscosityParams;
use crate::scalar::Real;

fn check_velocity<T: Real>(u: &VectorField<T>, grid: &SpatialGrid<T>) -> Result<()> {
    if u.dim() != grid.dim() {
        return Err(Error::Structural(format!(
            "velocity has {} components on a {}-d grid",
            u.dim(),
            grid.dim()
        )));
    }
    grid.check_len(u.len(), "velocity")
}

/// Compact three-point Laplacian of one component, zero ghosts.
fn laplacian<T: Real>(c: &[T], grid: &SpatialGrid<T>) -> Vec<T> {
    let two = T::lit(2.0);
    (0..grid.len())
        .map(|i| {
            (0..grid.dim()).fold(T::zero(), |acc, ax| {
                let h = grid.spacing(ax);
                let up = grid.neighbor(i, ax, 1).map_or(T::zero(), |j| c[j]);
                let dn = grid.neighbor(i, ax, -1).map_or(T::zero(), |j| c[j]);
                acc + (up - two * c[i] + dn) / (h * h)
            })
        })
        .collect()
}

/// `L u = -mu Lap u - (lambda + mu) grad div u`.
///
/// `Lap` is the compact three-point Laplacian and `grad div` composes the
/// centered divergence with the centered gradient, so that
/// `<L u, u> = mu |grad u|_2^2 + (lambda + mu) |div u|_2^2` holds exactly with
/// face-difference gradients (see [`lame_energy`]).
pub fn lame_apply<T: Real>(
    u: &VectorField<T>,
    visc: &ViscosityParams<T>,
    grid: &SpatialGrid<T>,
) -> Result<VectorField<T>> {
    check_velocity(u, grid)?;
    let div = divergence(u, grid)?;
    let gd = gradient(&div, grid)?;
    let comps = (0..grid.dim())
        .map(|a| {
            laplacian(u.component(a), grid)
                .into_iter()
                .zip(gd.component(a))
                .map(|(l, g)| -visc.mu() * l - visc.lambda_plus_mu() * *g)
                .collect()
        })
        .collect();
    Ok(VectorField::from_components(comps))
}

/// `mu |grad u|_2^2 + (lambda + mu) |div u|_2^2`, the quadratic form of `L`.
pub fn lame_energy<T: Real>(
    u: &VectorField<T>,
    visc: &ViscosityParams<T>,
    grid: &SpatialGrid<T>,
) -> Result<T> {
    check_velocity(u, grid)?;
    let vol = grid.cell_volume();
    let mut grad2 = T::zero();
    for c in u.components() {
        let f = face_differences(c, T::zero(), grid);
        for d in &f.interior {
            grad2 = grad2
                + d.iter()
                    .take(grid.dim())
                    .fold(T::zero(), |s, v| s + *v * *v);
        }
        grad2 = grad2 + f.boundary.iter().fold(T::zero(), |s, v| s + *v * *v);
    }
    let div = divergence(u, grid)?;
    let div2 = div.values().iter().fold(T::zero(), |s, v| s + *v * *v);
    Ok((visc.mu() * grad2 + visc.lambda_plus_mu() * div2) * vol)
}

/// `L` as a sparse matrix on component-major unknowns `(a, cell)`.
pub fn lame_matrix<T: Real>(
    visc: &ViscosityParams<T>,
    grid: &SpatialGrid<T>,
) -> Result<CsrMatrix<T>> {
    let mut b = CsrBuilder::new(grid.dim() * grid.len());
    for a in 0..grid.dim() {
        for i in 0..grid.len() {
            push_lame_row(&mut b, visc, grid, a, i);
            b.finish_row();
        }
    }
    b.build()
}

/// Adds the entries of row `(a, i)` of `L` to the builder (without finishing it).
pub(crate) fn push_lame_row<T: Real>(
    b: &mut CsrBuilder<T>,
    visc: &ViscosityParams<T>,
    grid: &SpatialGrid<T>,
    a: usize,
    i: usize,
) {
    let n = grid.len();
    let two = T::lit(2.0);
    let row = a * n + i;
    for ax in 0..grid.dim() {
        let h2 = grid.spacing(ax) * grid.spacing(ax);
        b.add(row, two * visc.mu() / h2);
        for s in [-1isize, 1] {
            if let Some(j) = grid.neighbor(i, ax, s) {
                b.add(a * n + j, -visc.mu() / h2);
            }
        }
    }
    let lm = visc.lambda_plus_mu();
    if lm == T::zero() {
        return;
    }
    let four = T::lit(4.0);
    for sa in [-1isize, 1] {
        let Some(j) = grid.neighbor(i, a, sa) else {
            continue;
        };
        for bx in 0..grid.dim() {
            let scale = -lm / (four * grid.spacing(a) * grid.spacing(bx));
            for sb in [-1isize, 1] {
                if let Some(k) = grid.neighbor(j, bx, sb) {
                    let sign = T::from_isize(sa * sb).expect("unit sign");
                    b.add(bx * n + k, scale * sign);
                }
            }
        }
    }
}

/// Runs `h_t = Lap h` componentwise for time `t` with stable explicit steps
/// (zero ghosts on far-field grids).
pub fn heat_flow<T: Real>(
    u: &VectorField<T>,
    t: T,
    grid: &SpatialGrid<T>,
) -> Result<VectorField<T>> {
    check_velocity(u, grid)?;
    if !(t >= T::zero()) {
        return Err(Error::Parameter(format!("heat flow time {t} must be >= 0")));
    }
    if t == T::zero() {
        return Ok(u.clone());
    }
    let hmin = grid.spacings().iter().copied().fold(T::infinity(), T::min);
    let stable = T::lit(0.4) * hmin * hmin / T::from_usize_lossy(grid.dim());
    let steps = (t / stable).ceil().to_usize().unwrap_or(1).max(1);
    let dt = t / T::from_usize_lossy(steps);
    let mut comps: Vec<Vec<T>> = u.components().to_vec();
    for _ in 0..steps {
        for c in comps.iter_mut() {
            let lap = laplacian(c, grid);
            for (v, l) in c.iter_mut().zip(lap) {
                *v = *v + dt * l;
            }
        }
    }
    Ok(VectorField::from_components(comps))
}

/// `|grad f|_2^2` of a scalar with face differences (far value as ghost).
pub fn dirichlet_energy<T: Real>(f: &ScalarField<T>, grid: &SpatialGrid<T>) -> Result<T> {
    grid.check_len(f.len(), "scalar field")?;
    let fd = face_differences(f.values(), f.far(), grid);
    let s = fd
        .interior
        .iter()
        .map(|d| {
            d.iter()
                .take(grid.dim())
                .fold(T::zero(), |s, v| s + *v * *v)
        })
        .sum::<T>()
        + fd.boundary.iter().fold(T::zero(), |s, v| s + *v * *v);
    Ok(s * grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_vector, Boundary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn constants_are_annihilated_on_periodic_grids() {
        let g = SpatialGrid::<f64>::new(&[6, 5], &[0.2, 0.25], Boundary::Periodic, None).unwrap();
        let v = ViscosityParams::new(1.3, 0.4).unwrap();
        let u = VectorField::from_fn(&g, |_| [2.0, -1.0, 0.0]);
        assert!(lame_apply(&u, &v, &g).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn sine_eigenvalue() {
        let g = SpatialGrid::<f64>::periodic_1d(256, 1.0).unwrap();
        let v = ViscosityParams::new(1.0, 0.0).unwrap();
        let u = VectorField::from_fn(&g, |x| [(2.0 * PI * x[0]).sin(), 0.0, 0.0]);
        let lu = lame_apply(&u, &v, &g).unwrap();
        let expect = 2.0 * (2.0 * PI).powi(2);
        let rel = (0..g.len())
            .filter(|&i| u.component(0)[i].abs() > 0.5)
            .map(|i| (lu.component(0)[i] / u.component(0)[i] / expect - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(rel < 5e-3, "relative error {rel}");
    }

    #[test]
    fn energy_identity_and_matrix_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (bnd, rb) in [(Boundary::Periodic, None), (Boundary::Farfield, Some(1.0))] {
            let g = SpatialGrid::<f64>::new(&[7, 6], &[0.15, 0.2], bnd, rb).unwrap();
            let v = ViscosityParams::new(0.8, -0.3).unwrap();
            let u = VectorField::from_components(
                (0..2)
                    .map(|_| (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .collect(),
            );
            let lu = lame_apply(&u, &v, &g).unwrap();
            let lhs = inner_vector(&lu, &u, &g);
            let rhs = lame_energy(&u, &v, &g).unwrap();
            assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0), "{lhs} vs {rhs}");
            let m = lame_matrix(&v, &g).unwrap();
            assert!(m.is_symmetric(1e-13));
            let mu = m.mul_vec(&u.to_flat());
            for (a, b) in mu.iter().zip(lu.to_flat()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn heat_flow_damps_sine() {
        let g = SpatialGrid::<f64>::periodic_1d(64, 1.0).unwrap();
        let u = VectorField::from_fn(&g, |x| [(2.0 * PI * x[0]).sin(), 0.0, 0.0]);
        let h = heat_flow(&u, 0.01, &g).unwrap();
        let ratio = h.max_abs() / u.max_abs();
        assert!((ratio - (-(2.0 * PI).powi(2) * 0.01f64).exp()).abs() < 2e-3);
    }
}
