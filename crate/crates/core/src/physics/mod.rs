//! Material laws and radiation coefficient models.

mod eos;
mod model;
mod validate;

pub use eos::{EquationOfState, MonotoneCubic};
pub use model::{
    compton_model, gray_model, CoefficientModel, DensityEmissionFn, Emission, EmissionFn, KernelFn,
    MajorantFn, PhasePoint, ScatteringProfile, SigmaFn,
};
pub use validate::{
    validate_emission_regularity, validate_kernel_integrability, validate_sigma_regularity,
    CheckResult, KernelCheckOptions, KernelExponent1, KernelExponent2, ValidationReport,
};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shear and second viscosity of the Newtonian stress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityParams<T> {
    mu: T,
    lambda: T,
}

impl<T: Real> ViscosityParams<T> {
    /// Requires `mu > 0` and `lambda + 2 mu / 3 >= 0` (ellipticity of the
    /// Lamé operator).
    pub fn new(mu: T, lambda: T) -> Result<Self> {
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(Error::Parameter(format!(
                "shear viscosity mu = {mu} violates mu > 0"
            )));
        }
        if !(lambda + T::lit(2.0) * mu / T::lit(3.0) >= T::zero()) || !lambda.is_finite() {
            return Err(Error::Parameter(format!(
                "viscosities (mu, lambda) = ({mu}, {lambda}) violate lambda + 2 mu / 3 >= 0"
            )));
        }
        Ok(Self { mu, lambda })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Coefficient `lambda + mu` of the grad-div part.
    pub fn lambda_plus_mu(&self) -> T {
        self.lambda + self.mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<T> {
    c: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn new(c: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::Parameter(format!(
                "light speed c = {c} must be positive"
            )));
        }
        Ok(Self { c })
    }

    pub fn c(&self) -> T {
        self.c
    }
}
