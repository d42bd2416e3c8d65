pub mod diagnostics;
pub mod error;
pub mod field;
pub mod fluid;
pub mod grid;
pub mod linalg;
pub mod norms;
pub mod phase;
pub mod physics;
pub mod picard;
pub mod quadrature;
pub mod scalar;
pub mod snapshot;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases of the generic core types.
pub type Grid = grid::SpatialGrid<f64>;
pub type Scalar = field::ScalarField<f64>;
pub type Vector = field::VectorField<f64>;
pub type Radiation = field::RadiationField<f64>;
pub type Phase = phase::PhaseSpace<f64>;
pub type Model = physics::CoefficientModel<f64>;
pub type Eos = physics::EquationOfState<f64>;
pub type RadHydroState = picard::State<f64>;
pub type RadHydroProblem = picard::Problem<f64>;
