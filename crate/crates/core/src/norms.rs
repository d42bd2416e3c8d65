//! Discrete Lebesgue, Sobolev and mixed phase-space norms.
//!
//! Sobolev norms act on `f - far`, so a density field whose far value is the
//! reference density `rho_bar` is normed as `rho - rho_bar`. Gradients inside
//! the norms are face differences (see [`crate::grid::face_differences`]);
//! intersections such as `H1 ∩ W1q` are the sum of the two norms.

use crate::error::{Error, Result};
use crate::field::{RadiationField, ScalarField, VectorField};
use crate::grid::{face_differences, second_differences, SpatialGrid};
use crate::quadrature::{AngularQuadrature, FrequencyGrid};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSettings<T> {
    q: T,
}

impl<T: Real> NormSettings<T> {
    pub fn new(q: T) -> Result<Self> {
        if !(q > T::lit(3.0) && q <= T::lit(6.0)) {
            return Err(Error::Parameter(format!("q must lie in (3, 6], got {q}")));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> T {
        self.q
    }
}

impl<T: Real> Default for NormSettings<T> {
    fn default() -> Self {
        Self { q: T::lit(4.0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SobolevKind {
    /// `|f|_2 + |grad f|_2`
    H1,
    /// `|f|_q + |grad f|_q`
    W1q,
    /// `H1 + W1q`
    H1W1q,
    /// `|grad f|_2`
    D1,
    /// `|grad^2 f|_2`
    D2,
    /// `|grad^2 f|_q`
    D2q,
    /// `|f|_2 + |f|_q`
    L2Lq,
}

/// Inner (spatial) norm of a mixed radiation norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerNorm {
    L2,
    Lq,
    L2Lq,
    H1,
    W1q,
    H1W1q,
}

fn check_exponent<T: Real>(p: T) -> Result<()> {
    if p.is_nan() || p < T::one() {
        return Err(Error::Parameter(format!(
            "Lebesgue exponent {p} must be >= 1"
        )));
    }
    Ok(())
}

/// `(sum_i s_i^{p/2} vol)^{1/p}` from pointwise squared magnitudes.
fn lp_from_squares<T: Real>(squares: impl Iterator<Item = T>, p: T, vol: T) -> T {
    if p.is_infinite() {
        return squares.fold(T::zero(), T::max).sqrt();
    }
    let two = T::lit(2.0);
    if p == two {
        return (squares.fold(T::zero(), |a, s| a + s) * vol).sqrt();
    }
    let half = p / two;
    let sum = squares.fold(T::zero(), |a, s| a + s.powf(half));
    (sum * vol).powf(T::one() / p)
}

/// Lp norm of raw values; `p = T::infinity()` gives the max norm.
pub fn lp_norm_values<T: Real>(values: &[T], p: T, grid: &SpatialGrid<T>) -> Result<T> {
    check_exponent(p)?;
    grid.check_len(values.len(), "field")?;
    Ok(lp_from_squares(
        values.iter().map(|&v| v * v),
        p,
        grid.cell_volume(),
    ))
}

pub fn lp_norm<T: Real>(f: &ScalarField<T>, p: T, grid: &SpatialGrid<T>) -> Result<T> {
    lp_norm_values(f.values(), p, grid)
}

/// Lp norm of the pointwise Euclidean magnitude.
pub fn lp_norm_vector<T: Real>(u: &VectorField<T>, p: T, grid: &SpatialGrid<T>) -> Result<T> {
    check_exponent(p)?;
    grid.check_len(u.len(), "vector field")?;
    Ok(lp_from_squares(
        (0..u.len()).map(|i| {
            u.components()
                .iter()
                .fold(T::zero(), |a, c| a + c[i] * c[i])
        }),
        p,
        grid.cell_volume(),
    ))
}

fn gradient_lp<T: Real>(comps: &[(&[T], T)], p: T, grid: &SpatialGrid<T>) -> T {
    let mut cell_sq = vec![T::zero(); grid.len()];
    let mut boundary_sq = Vec::new();
    for &(values, far) in comps {
        let fd = face_differences(values, far, grid);
        for (s, g) in cell_sq.iter_mut().zip(&fd.interior) {
            *s = *s + g.iter().fold(T::zero(), |a, &x| a + x * x);
        }
        boundary_sq.extend(fd.boundary.iter().map(|&b| b * b));
    }
    lp_from_squares(
        cell_sq.into_iter().chain(boundary_sq),
        p,
        grid.cell_volume(),
    )
}

fn hessian_lp<T: Real>(comps: &[(&[T], T)], p: T, grid: &SpatialGrid<T>) -> T {
    let mut cell_sq = vec![T::zero(); grid.len()];
    for &(values, far) in comps {
        for entry in second_differences(values, far, grid) {
            for (s, h) in cell_sq.iter_mut().zip(entry) {
                *s = *s + h * h;
            }
        }
    }
    lp_from_squares(cell_sq.into_iter(), p, grid.cell_volume())
}

fn value_lp<T: Real>(comps: &[(&[T], T)], p: T, grid: &SpatialGrid<T>) -> T {
    let n = grid.len();
    lp_from_squares(
        (0..n).map(|i| {
            comps
                .iter()
                .fold(T::zero(), |a, &(v, far)| a + (v[i] - far) * (v[i] - far))
        }),
        p,
        grid.cell_volume(),
    )
}

fn sobolev_parts<T: Real>(
    comps: &[(&[T], T)],
    kind: SobolevKind,
    q: T,
    grid: &SpatialGrid<T>,
) -> T {
    let two = T::lit(2.0);
    match kind {
        SobolevKind::H1 => value_lp(comps, two, grid) + gradient_lp(comps, two, grid),
        SobolevKind::W1q => value_lp(comps, q, grid) + gradient_lp(comps, q, grid),
        SobolevKind::H1W1q => {
            value_lp(comps, two, grid)
                + gradient_lp(comps, two, grid)
                + value_lp(comps, q, grid)
                + gradient_lp(comps, q, grid)
        }
        SobolevKind::D1 => gradient_lp(comps, two, grid),
        SobolevKind::D2 => hessian_lp(comps, two, grid),
        SobolevKind::D2q => hessian_lp(comps, q, grid),
        SobolevKind::L2Lq => value_lp(comps, two, grid) + value_lp(comps, q, grid),
    }
}

/// Sobolev norm or seminorm of `f - f.far()`.
pub fn sobolev_norm<T: Real>(
    f: &ScalarField<T>,
    kind: SobolevKind,
    settings: &NormSettings<T>,
    grid: &SpatialGrid<T>,
) -> Result<T> {
    grid.check_len(f.len(), "scalar field")?;
    Ok(sobolev_parts(
        &[(f.values(), f.far())],
        kind,
        settings.q(),
        grid,
    ))
}

/// Vector version: pointwise Euclidean magnitudes of values and of the full
/// gradient (all components, all axes).
pub fn sobolev_norm_vector<T: Real>(
    u: &VectorField<T>,
    kind: SobolevKind,
    settings: &NormSettings<T>,
    grid: &SpatialGrid<T>,
) -> Result<T> {
    grid.check_len(u.len(), "vector field")?;
    let comps: Vec<(&[T], T)> = u
        .components()
        .iter()
        .map(|c| (c.as_slice(), T::zero()))
        .collect();
    Ok(sobolev_parts(&comps, kind, settings.q(), grid))
}

pub(crate) fn inner_norm<T: Real>(
    values: &[T],
    inner: InnerNorm,
    q: T,
    grid: &SpatialGrid<T>,
) -> T {
    let comps = [(values, T::zero())];
    let two = T::lit(2.0);
    match inner {
        InnerNorm::L2 => value_lp(&comps, two, grid),
        InnerNorm::Lq => value_lp(&comps, q, grid),
        InnerNorm::L2Lq => sobolev_parts(&comps, SobolevKind::L2Lq, q, grid),
        InnerNorm::H1 => sobolev_parts(&comps, SobolevKind::H1, q, grid),
        InnerNorm::W1q => sobolev_parts(&comps, SobolevKind::W1q, q, grid),
        InnerNorm::H1W1q => sobolev_parts(&comps, SobolevKind::H1W1q, q, grid),
    }
}

/// `(sum_b sum_m wb_b w_m ||I[b, m, .]||_inner^2)^{1/2}`: L2 over frequency and
/// direction of a spatial norm. Ghost intensity is zero.
pub fn mixed_radiation_norm<T: Real>(
    field: &RadiationField<T>,
    inner: InnerNorm,
    freq: &FrequencyGrid<T>,
    ang: &AngularQuadrature<T>,
    grid: &SpatialGrid<T>,
    settings: &NormSettings<T>,
) -> Result<T> {
    if field.bands() != freq.len() || field.ordinates() != ang.len() {
        return Err(Error::Structural(
            "radiation field does not match the quadratures".into(),
        ));
    }
    grid.check_len(field.cells(), "radiation field")?;
    let mut acc = T::zero();
    for b in 0..freq.len() {
        for m in 0..ang.len() {
            let n = inner_norm(field.slice(b, m), inner, settings.q(), grid);
            acc = acc + freq.weight(b) * ang.weight(m) * n * n;
        }
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(g: &SpatialGrid<f64>) -> ScalarField<f64> {
        ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin())
    }

    #[test]
    fn lp_examples() {
        let g = SpatialGrid::<f64>::periodic_1d(256, 1.0).unwrap();
        assert_eq!(lp_norm(&ScalarField::zeros(&g), 2.0, &g).unwrap(), 0.0);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            let v = lp_norm(&ScalarField::constant(&g, -1.5), p, &g).unwrap();
            assert!((v - 1.5).abs() < 1e-12, "p = {p}: {v}");
        }
        let l2 = lp_norm(&sine(&g), 2.0, &g).unwrap();
        assert!((l2 - 0.5f64.sqrt()).abs() < 1e-4);
        assert!(matches!(
            lp_norm(&sine(&g), 0.5, &g),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn settings_reject_q_outside_range() {
        assert!(NormSettings::new(3.0).is_err());
        assert!(NormSettings::new(7.0).is_err());
        assert!(NormSettings::new(6.0).is_ok());
    }

    #[test]
    fn sobolev_examples() {
        let g = SpatialGrid::<f64>::periodic_1d(256, 1.0).unwrap();
        let s = NormSettings::default();
        let flat = ScalarField::constant(&g, 2.5).set_far(2.5);
        assert_eq!(sobolev_norm(&flat, SobolevKind::H1, &s, &g).unwrap(), 0.0);
        let d1 = sobolev_norm(&sine(&g), SobolevKind::D1, &s, &g).unwrap();
        assert!((d1 - 2.0 * PI * 0.5f64.sqrt()).abs() < 1e-3, "{d1}");
        let h1 = sobolev_norm(&sine(&g), SobolevKind::H1, &s, &g).unwrap();
        assert!(
            (h1 - (0.5f64.sqrt() + 2.0 * PI * 0.5f64.sqrt())).abs() < 2e-3,
            "{h1}"
        );
    }

    #[test]
    fn d2_of_sine() {
        let g = SpatialGrid::<f64>::periodic_1d(256, 1.0).unwrap();
        let d2 = sobolev_norm(&sine(&g), SobolevKind::D2, &NormSettings::default(), &g).unwrap();
        let exact = 4.0 * PI * PI * 0.5f64.sqrt();
        assert!((d2 - exact).abs() / exact < 1e-3);
    }

    #[test]
    fn mixed_norm_examples() {
        let g = SpatialGrid::<f64>::periodic_1d(256, 1.0).unwrap();
        let s = NormSettings::default();
        let ang = AngularQuadrature::sphere(4, 8).unwrap();
        let freq = FrequencyGrid::new(vec![0.5, 1.5]).unwrap();
        let zero = RadiationField::zeros(1, ang.len(), g.len());
        assert_eq!(
            mixed_radiation_norm(&zero, InnerNorm::L2, &freq, &ang, &g, &s).unwrap(),
            0.0
        );
        let one = RadiationField::from_fn(1, ang.len(), g.len(), |_, _, _| 1.0);
        let v = mixed_radiation_norm(&one, InnerNorm::L2, &freq, &ang, &g, &s).unwrap();
        assert!((v - (4.0 * PI).sqrt()).abs() < 1e-8);

        let slab = AngularQuadrature::slab(8).unwrap();
        let sv = RadiationField::from_fn(1, slab.len(), g.len(), |_, _, c| {
            (2.0 * PI * g.center(c)[0]).sin()
        });
        let v = mixed_radiation_norm(&sv, InnerNorm::L2, &freq, &slab, &g, &s).unwrap();
        assert!((v - 1.0).abs() < 1e-3);
    }

    #[test]
    fn farfield_face_sum_matches_laplacian_form() {
        // sum over all faces of squared differences == -<f, Laplacian f>
        let g = SpatialGrid::<f64>::farfield_1d(16, 1.0, 0.0).unwrap();
        let f: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64) - 1.3).collect();
        let d1 = sobolev_norm(
            &ScalarField::new(f.clone()),
            SobolevKind::D1,
            &NormSettings::default(),
            &g,
        )
        .unwrap();
        let h = g.spacing(0);
        let mut form = 0.0;
        for i in 0..16 {
            let l = if i > 0 { f[i - 1] } else { 0.0 };
            let r = if i < 15 { f[i + 1] } else { 0.0 };
            form += -f[i] * (r - 2.0 * f[i] + l) / (h * h) * h;
        }
        assert!((d1 * d1 - form).abs() < 1e-9 * form);
    }
}
