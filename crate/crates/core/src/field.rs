//! Cell-centered field containers.

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::scalar::Real;

/// Scalar values per cell, plus the value the field takes in far-field ghost
/// cells (its state at spatial infinity).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    values: Vec<T>,
    far: T,
}

impl<T: Real> ScalarField<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self {
            values,
            far: T::zero(),
        }
    }

    pub fn with_far(values: Vec<T>, far: T) -> Self {
        Self { values, far }
    }

    pub fn zeros(grid: &SpatialGrid<T>) -> Self {
        Self::new(vec![T::zero(); grid.len()])
    }

    pub fn constant(grid: &SpatialGrid<T>, c: T) -> Self {
        Self::new(vec![c; grid.len()])
    }

    pub fn from_fn(grid: &SpatialGrid<T>, f: impl Fn([T; 3]) -> T) -> Self {
        Self::new((0..grid.len()).map(|i| f(grid.center(i))).collect())
    }

    pub fn set_far(mut self, far: T) -> Self {
        self.far = far;
        self
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn far(&self) -> T {
        self.far
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            far: f(self.far),
        }
    }

    /// `self - other`, including the far values.
    pub fn sub(&self, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| *a - *b)
                .collect(),
            far: self.far - other.far,
        }
    }

    pub fn scale(&self, alpha: T) -> Self {
        self.map(|v| v * alpha)
    }

    /// Fails with a domain error naming the first negative or non-finite cell.
    pub fn check_nonnegative(&self, what: &str) -> Result<()> {
        for (i, &v) in self.values.iter().enumerate() {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::Domain {
                    what: format!("negative or non-finite {what}"),
                    cell: i,
                    value: v.as_f64(),
                });
            }
        }
        Ok(())
    }
}

/// `dim` components per cell, stored component-major. Ghost values are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    comps: Vec<Vec<T>>,
}

impl<T: Real> VectorField<T> {
    pub fn from_components(comps: Vec<Vec<T>>) -> Self {
        Self { comps }
    }

    pub fn zeros(grid: &SpatialGrid<T>) -> Self {
        Self {
            comps: vec![vec![T::zero(); grid.len()]; grid.dim()],
        }
    }

    pub fn from_fn(grid: &SpatialGrid<T>, f: impl Fn([T; 3]) -> [T; 3]) -> Self {
        let mut comps = vec![Vec::with_capacity(grid.len()); grid.dim()];
        for i in 0..grid.len() {
            let v = f(grid.center(i));
            for (a, c) in comps.iter_mut().enumerate() {
                c.push(v[a]);
            }
        }
        Self { comps }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn len(&self) -> usize {
        self.comps.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn component(&self, a: usize) -> &[T] {
        &self.comps[a]
    }

    pub fn component_mut(&mut self, a: usize) -> &mut [T] {
        &mut self.comps[a]
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.comps
    }

    /// Components of cell `i`, zero-padded to three entries.
    pub fn at(&self, i: usize) -> [T; 3] {
        let mut v = [T::zero(); 3];
        for (a, c) in self.comps.iter().enumerate() {
            v[a] = c[i];
        }
        v
    }

    pub fn magnitude(&self, i: usize) -> T {
        self.comps
            .iter()
            .fold(T::zero(), |acc, c| acc + c[i] * c[i])
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    pub fn max_abs(&self) -> T {
        (0..self.len())
            .map(|i| self.magnitude(i))
            .fold(T::zero(), T::max)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x - *y).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x + *y).collect())
                .collect(),
        }
    }

    pub fn scale(&self, alpha: T) -> Self {
        self.map(|v| v * alpha)
    }

    /// Flattened component-major storage.
    pub fn to_flat(&self) -> Vec<T> {
        self.comps.iter().flatten().copied().collect()
    }

    pub fn from_flat(flat: &[T], dim: usize) -> Self {
        let n = flat.len() / dim.max(1);
        Self {
            comps: (0..dim)
                .map(|a| flat[a * n..(a + 1) * n].to_vec())
                .collect(),
        }
    }
}

/// Discrete specific intensity indexed `[band, ordinate, cell]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationField<T> {
    bands: usize,
    ordinates: usize,
    cells: usize,
    values: Vec<T>,
}

impl<T: Real> RadiationField<T> {
    pub fn zeros(bands: usize, ordinates: usize, cells: usize) -> Self {
        Self {
            bands,
            ordinates,
            cells,
            values: vec![T::zero(); bands * ordinates * cells],
        }
    }

    pub fn from_fn(
        bands: usize,
        ordinates: usize,
        cells: usize,
        f: impl Fn(usize, usize, usize) -> T,
    ) -> Self {
        let mut values = Vec::with_capacity(bands * ordinates * cells);
        for b in 0..bands {
            for m in 0..ordinates {
                for c in 0..cells {
                    values.push(f(b, m, c));
                }
            }
        }
        Self {
            bands,
            ordinates,
            cells,
            values,
        }
    }

    pub fn from_values(
        bands: usize,
        ordinates: usize,
        cells: usize,
        values: Vec<T>,
    ) -> Result<Self> {
        if values.len() != bands * ordinates * cells {
            return Err(Error::Structural(format!(
                "radiation field expects {} values, got {}",
                bands * ordinates * cells,
                values.len()
            )));
        }
        Ok(Self {
            bands,
            ordinates,
            cells,
            values,
        })
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn ordinates(&self) -> usize {
        self.ordinates
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn get(&self, b: usize, m: usize, c: usize) -> T {
        self.values[(b * self.ordinates + m) * self.cells + c]
    }

    #[inline]
    pub fn set(&mut self, b: usize, m: usize, c: usize, v: T) {
        self.values[(b * self.ordinates + m) * self.cells + c] = v;
    }

    /// Spatial profile of one `(band, ordinate)` pair.
    pub fn slice(&self, b: usize, m: usize) -> &[T] {
        let start = (b * self.ordinates + m) * self.cells;
        &self.values[start..start + self.cells]
    }

    pub fn slice_mut(&mut self, b: usize, m: usize) -> &mut [T] {
        let start = (b * self.ordinates + m) * self.cells;
        &mut self.values[start..start + self.cells]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| *a - *b)
                .collect(),
            ..*self
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.bands == other.bands && self.ordinates == other.ordinates && self.cells == other.cells
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        for (i, &v) in self.values.iter().enumerate() {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::Domain {
                    what: "negative or non-finite intensity".into(),
                    cell: i % self.cells.max(1),
                    value: v.as_f64(),
                });
            }
        }
        Ok(())
    }
}
