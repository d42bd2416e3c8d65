//! The discrete phase space: spatial grid times frequency bands times ordinates.

use crate::error::{Error, Result};
use crate::field::RadiationField;
use crate::grid::SpatialGrid;
use crate::physics::PhasePoint;
use crate::quadrature::{AngularGeometry, AngularQuadrature, FrequencyGrid};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpace<T> {
    pub grid: SpatialGrid<T>,
    pub freq: FrequencyGrid<T>,
    pub ang: AngularQuadrature<T>,
}

impl<T: Real> PhaseSpace<T> {
    /// Slab ordinates only carry the `x` direction cosine, so they require a
    /// one-dimensional grid.
    pub fn new(
        grid: SpatialGrid<T>,
        freq: FrequencyGrid<T>,
        ang: AngularQuadrature<T>,
    ) -> Result<Self> {
        if ang.geometry() == AngularGeometry::Slab && grid.dim() != 1 {
            return Err(Error::Structural(format!(
                "slab ordinates need a 1-dimensional grid, got dim = {}",
                grid.dim()
            )));
        }
        Ok(Self { grid, freq, ang })
    }

    pub fn bands(&self) -> usize {
        self.freq.len()
    }

    pub fn ordinates(&self) -> usize {
        self.ang.len()
    }

    pub fn cells(&self) -> usize {
        self.grid.len()
    }

    pub fn zeros(&self) -> RadiationField<T> {
        RadiationField::zeros(self.bands(), self.ordinates(), self.cells())
    }

    /// `I[b, m, c] = f(v_b, Omega_m, x_c)`.
    pub fn radiation_from_fn(&self, f: impl Fn(T, [T; 3], [T; 3]) -> T) -> RadiationField<T> {
        RadiationField::from_fn(self.bands(), self.ordinates(), self.cells(), |b, m, c| {
            f(
                self.freq.center(b),
                self.ang.direction(m),
                self.grid.center(c),
            )
        })
    }

    pub fn point(&self, b: usize, m: usize, c: usize, t: T) -> PhasePoint<T> {
        PhasePoint {
            freq: self.freq.center(b),
            dir: self.ang.direction(m),
            t,
            x: self.grid.center(c),
        }
    }

    /// `wb_b * w_m`.
    #[inline]
    pub fn weight(&self, b: usize, m: usize) -> T {
        self.freq.weight(b) * self.ang.weight(m)
    }

    pub fn check_field(&self, f: &RadiationField<T>, what: &str) -> Result<()> {
        if f.bands() != self.bands()
            || f.ordinates() != self.ordinates()
            || f.cells() != self.cells()
        {
            return Err(Error::Structural(format!(
                "{what} has shape {}x{}x{}, phase space is {}x{}x{}",
                f.bands(),
                f.ordinates(),
                f.cells(),
                self.bands(),
                self.ordinates(),
                self.cells()
            )));
        }
        Ok(())
    }

    /// Largest `dt` with `c dt max_m sum_a |Omega_m,a| / h_a <= 1`.
    pub fn streaming_dt_limit(&self, c: T) -> T {
        let mut worst = T::zero();
        for m in 0..self.ordinates() {
            let d = self.ang.direction(m);
            let s = (0..self.grid.dim())
                .fold(T::zero(), |acc, a| acc + d[a].abs() / self.grid.spacing(a));
            worst = worst.max(s);
        }
        if worst == T::zero() {
            T::infinity()
        } else {
            T::one() / (c * worst)
        }
    }
}
