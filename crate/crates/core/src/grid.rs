//! Uniform Cartesian grids and the discrete differential operators on them.
//!
//! Cells are stored row-major (last axis fastest). Boundary handling is either
//! periodic wrap-around or far-field padding, where every ghost cell carries the
//! field's far value (`ScalarField::far`, zero for velocities and intensities).

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::scalar::Real;

/// Treatment of the cells beyond the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    /// Ghost cells hold the far-field state `(rho_bar, u = 0, I = 0)`.
    Farfield,
}

/// Minimum number of cells along every active axis.
pub const MIN_CELLS_PER_AXIS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid<T> {
    dim: usize,
    extents: [usize; 3],
    spacing: [T; 3],
    origin: [T; 3],
    boundary: Boundary,
    farfield_density: Option<T>,
}

impl<T: Real> SpatialGrid<T> {
    /// Builds a grid with `extents.len() == spacing.len() == dim` cells and widths.
    ///
    /// A far-field grid needs its far-field density; a periodic grid may carry
    /// one as the reference state subtracted by the norms.
    pub fn new(
        extents: &[usize],
        spacing: &[T],
        boundary: Boundary,
        farfield_density: Option<T>,
    ) -> Result<Self> {
        let dim = extents.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::Structural(format!(
                "grid dimension {dim} not in 1..=3"
            )));
        }
        if spacing.len() != dim {
            return Err(Error::Structural(format!(
                "{} spacings given for a {dim}-dimensional grid",
                spacing.len()
            )));
        }
        let mut ext = [1usize; 3];
        let mut sp = [T::one(); 3];
        for a in 0..dim {
            if extents[a] < MIN_CELLS_PER_AXIS {
                return Err(Error::Parameter(format!(
                    "axis {a} has {} cells; at least {MIN_CELLS_PER_AXIS} required",
                    extents[a]
                )));
            }
            if !(spacing[a] > T::zero()) || !spacing[a].is_finite() {
                return Err(Error::Parameter(format!(
                    "axis {a} spacing {} must be positive and finite",
                    spacing[a]
                )));
            }
            ext[a] = extents[a];
            sp[a] = spacing[a];
        }
        match (boundary, farfield_density) {
            (Boundary::Farfield, None) => {
                return Err(Error::Parameter(
                    "far-field boundary requires a far-field density".into(),
                ))
            }
            (_, Some(rho)) if !(rho >= T::zero()) || !rho.is_finite() => {
                return Err(Error::Parameter(format!(
                    "far-field density {rho} must be finite and nonnegative"
                )))
            }
            _ => {}
        }
        Ok(Self {
            dim,
            extents: ext,
            spacing: sp,
            origin: [T::zero(); 3],
            boundary,
            farfield_density,
        })
    }

    /// Periodic 1D grid of `n` cells covering `[0, length)`.
    pub fn periodic_1d(n: usize, length: T) -> Result<Self> {
        Self::new(
            &[n],
            &[length / T::from_usize_lossy(n)],
            Boundary::Periodic,
            None,
        )
    }

    /// Far-field 1D grid of `n` cells covering `[0, length)`.
    pub fn farfield_1d(n: usize, length: T, rho_bar: T) -> Result<Self> {
        Self::new(
            &[n],
            &[length / T::from_usize_lossy(n)],
            Boundary::Farfield,
            Some(rho_bar),
        )
    }

    pub fn with_origin(mut self, origin: &[T]) -> Self {
        for (a, &o) in origin.iter().enumerate().take(self.dim) {
            self.origin[a] = o;
        }
        self
    }

    pub fn with_reference_density(mut self, rho_bar: T) -> Self {
        self.farfield_density = Some(rho_bar);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents[..self.dim]
    }

    pub fn extent(&self, axis: usize) -> usize {
        self.extents[axis]
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.spacing[axis]
    }

    pub fn spacings(&self) -> &[T] {
        &self.spacing[..self.dim]
    }

    pub fn origin(&self) -> &[T] {
        &self.origin[..self.dim]
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Far-field density `rho_bar`, or zero when none was configured.
    pub fn reference_density(&self) -> T {
        self.farfield_density.unwrap_or_else(T::zero)
    }

    pub fn farfield_density(&self) -> Option<T> {
        self.farfield_density
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> T {
        self.spacings().iter().fold(T::one(), |acc, &h| acc * h)
    }

    pub fn domain_length(&self, axis: usize) -> T {
        self.spacing[axis] * T::from_usize_lossy(self.extents[axis])
    }

    pub fn domain_center(&self) -> [T; 3] {
        let mut c = [T::zero(); 3];
        for (a, ca) in c.iter_mut().enumerate().take(self.dim) {
            *ca = self.origin[a] + self.domain_length(a) * T::lit(0.5);
        }
        c
    }

    #[inline]
    pub fn coords(&self, cell: usize) -> [usize; 3] {
        let k = cell % self.extents[2];
        let rest = cell / self.extents[2];
        let j = rest % self.extents[1];
        let i = rest / self.extents[1];
        [i, j, k]
    }

    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        (c[0] * self.extents[1] + c[1]) * self.extents[2] + c[2]
    }

    /// Cell-center position; inactive axes are zero.
    pub fn center(&self, cell: usize) -> [T; 3] {
        let c = self.coords(cell);
        let mut x = [T::zero(); 3];
        for a in 0..self.dim {
            x[a] = self.origin[a] + (T::from_usize_lossy(c[a]) + T::lit(0.5)) * self.spacing[a];
        }
        x
    }

    /// Cell reached from `cell` by integer offsets along each axis, or `None`
    /// for a ghost cell of a far-field grid.
    #[inline]
    pub fn offset(&self, cell: usize, off: [isize; 3]) -> Option<usize> {
        let mut c = self.coords(cell);
        for a in 0..self.dim {
            let n = self.extents[a] as isize;
            let mut p = c[a] as isize + off[a];
            match self.boundary {
                Boundary::Periodic => p = p.rem_euclid(n),
                Boundary::Farfield => {
                    if p < 0 || p >= n {
                        return None;
                    }
                }
            }
            c[a] = p as usize;
        }
        Some(self.index(c))
    }

    #[inline]
    pub fn neighbor(&self, cell: usize, axis: usize, step: isize) -> Option<usize> {
        let mut off = [0isize; 3];
        off[axis] = step;
        self.offset(cell, off)
    }

    /// Value of `values` at an offset from `cell`, with ghosts filled by `far`.
    #[inline]
    pub fn value_at(&self, values: &[T], far: T, cell: usize, off: [isize; 3]) -> T {
        self.offset(cell, off).map_or(far, |j| values[j])
    }

    pub(crate) fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.len() {
            return Err(Error::Structural(format!(
                "{what} has {len} cells but the grid has {}",
                self.len()
            )));
        }
        Ok(())
    }

    /// Multilinear interpolation of cell-centered data at `pos`.
    ///
    /// Returns the value and whether the point had to be clamped into the
    /// padded domain (far-field grids only; periodic grids wrap).
    pub fn interpolate(&self, values: &[T], far: T, pos: &[T; 3]) -> (T, bool) {
        let mut base = [0isize; 3];
        let mut frac = [T::zero(); 3];
        let mut clamped = false;
        for a in 0..self.dim {
            let n = self.extents[a] as isize;
            let mut s = (pos[a] - self.origin[a]) / self.spacing[a] - T::lit(0.5);
            if self.boundary == Boundary::Farfield {
                // Padded domain reaches the ghost centers at -1 and n.
                let lo = -T::one();
                let hi = T::from_usize_lossy(self.extents[a]);
                if s < lo {
                    s = lo;
                    clamped = true;
                } else if s > hi {
                    s = hi;
                    clamped = true;
                }
            }
            let fl = s.floor();
            let mut i = fl.to_isize().unwrap_or(0);
            let mut f = s - fl;
            if self.boundary == Boundary::Farfield && i >= n {
                i = n - 1;
                f = T::one();
            }
            base[a] = i;
            frac[a] = f;
        }
        let corners = 1usize << self.dim;
        let mut acc = T::zero();
        for corner in 0..corners {
            let mut weight = T::one();
            let mut coords = [0isize; 3];
            for a in 0..self.dim {
                let up = (corner >> a) & 1 == 1;
                coords[a] = base[a] + up as isize;
                weight = weight * if up { frac[a] } else { T::one() - frac[a] };
            }
            if weight == T::zero() {
                continue;
            }
            acc = acc + weight * self.value_at_coords(values, far, coords);
        }
        (acc, clamped)
    }

    fn value_at_coords(&self, values: &[T], far: T, coords: [isize; 3]) -> T {
        let mut c = [0usize; 3];
        for a in 0..self.dim {
            let n = self.extents[a] as isize;
            let p = match self.boundary {
                Boundary::Periodic => coords[a].rem_euclid(n),
                Boundary::Farfield => {
                    if coords[a] < 0 || coords[a] >= n {
                        return far;
                    }
                    coords[a]
                }
            };
            c[a] = p as usize;
        }
        values[self.index(c)]
    }
}

fn unit_offset(axis: usize, step: isize) -> [isize; 3] {
    let mut off = [0isize; 3];
    off[axis] = step;
    off
}

/// Centered-difference gradient; ghosts take the field's far value.
pub fn gradient<T: Real>(f: &ScalarField<T>, grid: &SpatialGrid<T>) -> Result<VectorField<T>> {
    grid.check_len(f.len(), "scalar field")?;
    let v = f.values();
    let far = f.far();
    let two = T::lit(2.0);
    let comps = (0..grid.dim())
        .map(|a| {
            let inv = T::one() / (two * grid.spacing(a));
            (0..grid.len())
                .map(|i| {
                    (grid.value_at(v, far, i, unit_offset(a, 1))
                        - grid.value_at(v, far, i, unit_offset(a, -1)))
                        * inv
                })
                .collect()
        })
        .collect();
    Ok(VectorField::from_components(comps))
}

/// Centered-difference divergence, the negative adjoint of [`gradient`].
pub fn divergence<T: Real>(u: &VectorField<T>, grid: &SpatialGrid<T>) -> Result<ScalarField<T>> {
    if u.dim() != grid.dim() {
        return Err(Error::Structural(format!(
            "vector field has {} components on a {}-dimensional grid",
            u.dim(),
            grid.dim()
        )));
    }
    grid.check_len(u.len(), "vector field")?;
    let two = T::lit(2.0);
    let mut out = vec![T::zero(); grid.len()];
    for a in 0..grid.dim() {
        let c = u.component(a);
        let inv = T::one() / (two * grid.spacing(a));
        for (i, o) in out.iter_mut().enumerate() {
            *o = *o
                + (grid.value_at(c, T::zero(), i, unit_offset(a, 1))
                    - grid.value_at(c, T::zero(), i, unit_offset(a, -1)))
                    * inv;
        }
    }
    Ok(ScalarField::new(out))
}

/// Forward (face) differences of `f - far` along each axis.
///
/// `interior[i][a]` is the difference across the upper face of cell `i` along
/// axis `a`. On far-field grids the faces between the lower ghost layer and
/// the first cells are listed separately in `boundary`, so that every face is
/// counted exactly once and the sum of squares equals minus the discrete
/// (compact) Laplacian form.
#[derive(Debug, Clone)]
pub struct FaceDifferences<T> {
    pub interior: Vec<[T; 3]>,
    pub boundary: Vec<T>,
}

pub fn face_differences<T: Real>(
    values: &[T],
    far: T,
    grid: &SpatialGrid<T>,
) -> FaceDifferences<T> {
    let dim = grid.dim();
    let mut interior = vec![[T::zero(); 3]; grid.len()];
    let mut boundary = Vec::new();
    for (i, slot) in interior.iter_mut().enumerate() {
        let here = values[i] - far;
        for a in 0..dim {
            let h = grid.spacing(a);
            let up = grid.value_at(values, far, i, unit_offset(a, 1)) - far;
            slot[a] = (up - here) / h;
            if grid.boundary() == Boundary::Farfield && grid.coords(i)[a] == 0 {
                boundary.push(here / h);
            }
        }
    }
    FaceDifferences { interior, boundary }
}

/// Second differences of `f - far`: compact three-point stencil on the
/// diagonal, centered four-point stencil for mixed derivatives.
///
/// Returns `dim * dim` per-cell arrays in row-major `(a, b)` order.
pub fn second_differences<T: Real>(values: &[T], far: T, grid: &SpatialGrid<T>) -> Vec<Vec<T>> {
    let dim = grid.dim();
    let mut out = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let ha = grid.spacing(a);
            let hb = grid.spacing(b);
            let col: Vec<T> = (0..grid.len())
                .map(|i| {
                    let at = |off: [isize; 3]| grid.value_at(values, far, i, off) - far;
                    if a == b {
                        (at(unit_offset(a, 1)) - T::lit(2.0) * at([0; 3]) + at(unit_offset(a, -1)))
                            / (ha * ha)
                    } else {
                        let mut pp = [0isize; 3];
                        pp[a] = 1;
                        pp[b] = 1;
                        let mut pm = [0isize; 3];
                        pm[a] = 1;
                        pm[b] = -1;
                        let mut mp = [0isize; 3];
                        mp[a] = -1;
                        mp[b] = 1;
                        let mut mm = [0isize; 3];
                        mm[a] = -1;
                        mm[b] = -1;
                        (at(pp) - at(pm) - at(mp) + at(mm)) / (T::lit(4.0) * ha * hb)
                    }
                })
                .collect();
            out.push(col);
        }
    }
    out
}

/// Midpoint rule: `sum_i f_i * cell_volume`, summed in storage order.
pub fn integrate_space<T: Real>(f: &ScalarField<T>, grid: &SpatialGrid<T>) -> Result<T> {
    grid.check_len(f.len(), "scalar field")?;
    Ok(integrate_values(f.values(), grid))
}

pub(crate) fn integrate_values<T: Real>(values: &[T], grid: &SpatialGrid<T>) -> T {
    values.iter().fold(T::zero(), |acc, &v| acc + v) * grid.cell_volume()
}

/// Euclidean inner product `sum_i <a_i, b_i> * cell_volume`.
pub fn inner_vector<T: Real>(a: &VectorField<T>, b: &VectorField<T>, grid: &SpatialGrid<T>) -> T {
    let mut acc = T::zero();
    for d in 0..a.dim() {
        for (x, y) in a.component(d).iter().zip(b.component(d)) {
            acc = acc + *x * *y;
        }
    }
    acc * grid.cell_volume()
}

pub fn inner_scalar<T: Real>(a: &[T], b: &[T], grid: &SpatialGrid<T>) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y) * grid.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_invariants_are_checked() {
        assert!(SpatialGrid::<f64>::new(&[3], &[0.1], Boundary::Periodic, None).is_err());
        assert!(SpatialGrid::<f64>::new(&[8], &[0.0], Boundary::Periodic, None).is_err());
        assert!(SpatialGrid::<f64>::new(&[8], &[0.1], Boundary::Farfield, None).is_err());
        assert!(SpatialGrid::<f64>::new(&[8, 8], &[0.1], Boundary::Periodic, None).is_err());
        assert!(SpatialGrid::<f64>::new(&[8], &[0.1], Boundary::Farfield, Some(1.0)).is_ok());
    }

    #[test]
    fn index_roundtrip_3d() {
        let g = SpatialGrid::<f64>::new(&[4, 5, 6], &[1.0, 1.0, 1.0], Boundary::Periodic, None)
            .unwrap();
        for i in 0..g.len() {
            assert_eq!(g.index(g.coords(i)), i);
        }
        assert_eq!(
            g.neighbor(g.index([3, 0, 0]), 0, 1),
            Some(g.index([0, 0, 0]))
        );
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = SpatialGrid::<f64>::periodic_1d(16, 1.0).unwrap();
        let f = ScalarField::constant(&g, 5.0);
        let d = gradient(&f, &g).unwrap();
        assert!(d.component(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_affine_exact_in_interior() {
        // periodic wrap breaks affinity only at the two seam cells
        let g = SpatialGrid::<f64>::periodic_1d(32, 1.0).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0]);
        let d = gradient(&f, &g).unwrap();
        for i in 1..31 {
            assert!((d.component(0)[i] - 1.0).abs() < 1e-12);
        }
        let g = SpatialGrid::<f64>::farfield_1d(32, 1.0, 0.0).unwrap();
        let f = ScalarField::from_fn(&g, |x| 3.0 * x[0] - 1.0);
        let d = gradient(&f, &g).unwrap();
        for i in 1..31 {
            assert!((d.component(0)[i] - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_sine_matches_derivative() {
        let g = SpatialGrid::<f64>::periodic_1d(256, 1.0).unwrap();
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
        let d = gradient(&f, &g).unwrap();
        let err = (0..g.len())
            .map(|i| (d.component(0)[i] - 2.0 * PI * (2.0 * PI * g.center(i)[0]).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "max error {err}");
    }

    #[test]
    fn divergence_examples() {
        let g = SpatialGrid::<f64>::periodic_1d(256, 1.0).unwrap();
        let u = VectorField::from_fn(&g, |_| [2.0, 0.0, 0.0]);
        assert!(divergence(&u, &g)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));

        let gf = SpatialGrid::<f64>::farfield_1d(64, 1.0, 0.0).unwrap();
        let u = VectorField::from_fn(&gf, |x| [0.7 * x[0], 0.0, 0.0]);
        let d = divergence(&u, &gf).unwrap();
        for i in 1..63 {
            assert!((d.values()[i] - 0.7).abs() < 1e-12);
        }

        let u = VectorField::from_fn(&g, |x| [(2.0 * PI * x[0]).sin(), 0.0, 0.0]);
        let d = divergence(&u, &g).unwrap();
        let err = (0..g.len())
            .map(|i| (d.values()[i] - 2.0 * PI * (2.0 * PI * g.center(i)[0]).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3);
    }

    #[test]
    fn second_order_convergence_of_gradient() {
        let err = |n: usize| {
            let g = SpatialGrid::<f64>::periodic_1d(n, 1.0).unwrap();
            let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
            let d = gradient(&f, &g).unwrap();
            (0..n)
                .map(|i| (d.component(0)[i] - 2.0 * PI * (2.0 * PI * g.center(i)[0]).cos()).abs())
                .fold(0.0, f64::max)
        };
        let order = (err(64) / err(128)).log2();
        assert!(order >= 1.9, "observed order {order}");
    }

    #[test]
    fn shape_mismatch_is_structural() {
        let g = SpatialGrid::<f64>::periodic_1d(16, 1.0).unwrap();
        let f = ScalarField::new(vec![0.0; 15]);
        assert!(matches!(gradient(&f, &g), Err(Error::Structural(_))));
    }

    #[test]
    fn integrate_space_examples() {
        let g = SpatialGrid::<f64>::periodic_1d(256, 1.0).unwrap();
        let one = ScalarField::constant(&g, 1.0);
        assert!((integrate_space(&one, &g).unwrap() - 1.0).abs() < 1e-14);
        let s = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
        assert!(integrate_space(&s, &g).unwrap().abs() < 1e-12);
        let s2 = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin().powi(2));
        assert!((integrate_space(&s2, &g).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn interpolation_is_exact_for_affine_data_and_wraps() {
        let g = SpatialGrid::<f64>::new(&[8, 8], &[0.125, 0.125], Boundary::Farfield, Some(0.0))
            .unwrap()
            .with_origin(&[-0.5, -0.5]);
        let f: Vec<f64> = (0..g.len())
            .map(|i| {
                let x = g.center(i);
                2.0 * x[0] - x[1]
            })
            .collect();
        let (v, clamped) = g.interpolate(&f, 0.0, &[0.1, -0.2, 0.0]);
        assert!(!clamped);
        assert!((v - 0.4).abs() < 1e-12);
        let (_, clamped) = g.interpolate(&f, 0.0, &[5.0, 0.0, 0.0]);
        assert!(clamped);

        let p = SpatialGrid::<f64>::periodic_1d(8, 1.0).unwrap();
        let f: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let (a, _) = p.interpolate(&f, 0.0, &[0.0625 + 1.0, 0.0, 0.0]);
        assert!((a - 0.0).abs() < 1e-12);
    }
}
