//! Compressible viscous flow: continuity transport, the Lamé operator and the
//! linearized momentum step.

mod continuity;
mod lame;
mod momentum;

pub use continuity::{
    continuity_step_characteristics, continuity_step_fv, fv_dt_limit, integrate_flow_map, FlowMap,
    VelocityHistory,
};
pub use lame::{dirichlet_energy, heat_flow, lame_apply, lame_energy, lame_matrix};
pub use momentum::{momentum_step, MomentumReport};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::SpatialGrid;
use crate::scalar::Real;

/// Density and velocity on the spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState<T> {
    pub rho: ScalarField<T>,
    pub u: VectorField<T>,
}

impl<T: Real> FluidState<T> {
    /// Checks shapes, finiteness and `rho >= 0`.
    pub fn new(rho: ScalarField<T>, u: VectorField<T>, grid: &SpatialGrid<T>) -> Result<Self> {
        grid.check_len(rho.len(), "density")?;
        if u.dim() != grid.dim() {
            return Err(Error::Structural(format!(
                "velocity has {} components on a {}-d grid",
                u.dim(),
                grid.dim()
            )));
        }
        grid.check_len(u.len(), "velocity")?;
        rho.check_nonnegative("density")?;
        if !u.is_finite() {
            return Err(Error::Domain {
                what: "non-finite velocity".into(),
                cell: 0,
                value: f64::NAN,
            });
        }
        Ok(Self { rho, u })
    }

    /// Rest state at the grid's reference density.
    pub fn equilibrium(grid: &SpatialGrid<T>) -> Self {
        let rb = grid.reference_density();
        Self {
            rho: ScalarField::constant(grid, rb).set_far(rb),
            u: VectorField::zeros(grid),
        }
    }
}
