use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point `(v, Omega, t, x)` of phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<T> {
    pub freq: T,
    pub dir: [T; 3],
    pub t: T,
    pub x: [T; 3],
}

pub type SigmaFn<T> = Arc<dyn Fn(&PhasePoint<T>, T) -> T + Send + Sync>;
/// `(v_from, v_to, cosine) -> kernel value`.
pub type KernelFn<T> = Arc<dyn Fn(T, T, T) -> T + Send + Sync>;
pub type EmissionFn<T> = Arc<dyn Fn(&PhasePoint<T>) -> T + Send + Sync>;
pub type DensityEmissionFn<T> = Arc<dyn Fn(&PhasePoint<T>, T) -> T + Send + Sync>;
pub type MajorantFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum Emission<T> {
    Independent(EmissionFn<T>),
    DensityDependent(DensityEmissionFn<T>),
}

/// Radiation coefficients with the density factored out:
/// `sigma_a = sigma * rho`, `sigma_s = sigma_s_bar * rho`,
/// `sigma_s' = sigma_s_bar' * rho`.
#[derive(Clone)]
pub struct CoefficientModel<T> {
    name: String,
    sigma: SigmaFn<T>,
    scatter_gain: KernelFn<T>,
    scatter_loss: KernelFn<T>,
    emission: Emission<T>,
    majorant: Option<MajorantFn<T>>,
    time_independent_kernels: bool,
}

impl<T> fmt::Debug for CoefficientModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientModel")
            .field("name", &self.name)
            .field("has_majorant", &self.majorant.is_some())
            .finish()
    }
}

impl<T: Real> CoefficientModel<T> {
    /// Model with every coefficient and the emission identically zero.
    pub fn zero(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            sigma: Arc::new(|_, _| T::zero()),
            scatter_gain: Arc::new(|_, _, _| T::zero()),
            scatter_loss: Arc::new(|_, _, _| T::zero()),
            emission: Emission::Independent(Arc::new(|_| T::zero())),
            majorant: Some(Arc::new(|_| T::one())),
            time_independent_kernels: true,
        }
    }

    pub fn with_sigma(
        mut self,
        f: impl Fn(&PhasePoint<T>, T) -> T + Send + Sync + 'static,
    ) -> Self {
        self.sigma = Arc::new(f);
        self
    }

    /// Sets `sigma_s_bar(v' -> v, mu)` and uses the same function, with the
    /// frequencies swapped, for the loss kernel `sigma_s_bar'(v -> v', mu)`.
    pub fn with_scattering(mut self, f: impl Fn(T, T, T) -> T + Send + Sync + 'static) -> Self {
        let k: KernelFn<T> = Arc::new(f);
        self.scatter_gain = k.clone();
        self.scatter_loss = k;
        self
    }

    /// Independent gain and loss kernels.
    pub fn with_scattering_pair(
        mut self,
        gain: impl Fn(T, T, T) -> T + Send + Sync + 'static,
        loss: impl Fn(T, T, T) -> T + Send + Sync + 'static,
    ) -> Self {
        self.scatter_gain = Arc::new(gain);
        self.scatter_loss = Arc::new(loss);
        self
    }

    pub fn with_emission(
        mut self,
        f: impl Fn(&PhasePoint<T>) -> T + Send + Sync + 'static,
    ) -> Self {
        self.emission = Emission::Independent(Arc::new(f));
        self
    }

    pub fn with_emission_fn(mut self, f: EmissionFn<T>) -> Self {
        self.emission = Emission::Independent(f);
        self
    }

    pub fn with_density_emission(
        mut self,
        f: impl Fn(&PhasePoint<T>, T) -> T + Send + Sync + 'static,
    ) -> Self {
        self.emission = Emission::DensityDependent(Arc::new(f));
        self
    }

    /// Declares the monotone majorant `M(s)` bounding the coefficient norms.
    pub fn with_majorant(mut self, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.majorant = Some(Arc::new(f));
        self
    }

    pub fn without_majorant(mut self) -> Self {
        self.majorant = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn emission_kind(&self) -> &Emission<T> {
        &self.emission
    }

    pub fn kernels_time_independent(&self) -> bool {
        self.time_independent_kernels
    }

    #[inline]
    pub fn sigma(&self, p: &PhasePoint<T>, rho: T) -> T {
        (self.sigma)(p, rho)
    }

    #[inline]
    pub fn sigma_a(&self, p: &PhasePoint<T>, rho: T) -> T {
        (self.sigma)(p, rho) * rho
    }

    /// `sigma_s_bar(v_from -> v_to, cosine)`.
    #[inline]
    pub fn scatter_gain_kernel(&self, v_from: T, v_to: T, cosine: T) -> T {
        (self.scatter_gain)(v_from, v_to, cosine)
    }

    /// `sigma_s_bar'(v -> v', cosine)`.
    #[inline]
    pub fn scatter_loss_kernel(&self, v: T, v_prime: T, cosine: T) -> T {
        (self.scatter_loss)(v, v_prime, cosine)
    }

    #[inline]
    pub fn emission(&self, p: &PhasePoint<T>, rho: T) -> T {
        match &self.emission {
            Emission::Independent(f) => f(p),
            Emission::DensityDependent(f) => f(p, rho),
        }
    }

    pub fn majorant(&self) -> Option<&MajorantFn<T>> {
        self.majorant.as_ref()
    }
}

/// Scattering kernel choices for the built-in models.
#[derive(Clone)]
pub enum ScatteringProfile<T> {
    None,
    /// `sigma_s_bar = strength`.
    Isotropic {
        strength: T,
    },
    /// Dipole phase function times a Gaussian frequency redistribution with an
    /// exponential high-frequency cutoff:
    /// `strength * 3/(16 pi) (1 + mu^2) exp(-((v - v')/width)^2) exp(-(v + v')/cutoff)`.
    Gaussian {
        strength: T,
        width: T,
        cutoff: T,
    },
    Custom(KernelFn<T>),
}

impl<T: Real> ScatteringProfile<T> {
    fn kernel(&self) -> Result<KernelFn<T>> {
        Ok(match self.clone() {
            Self::None => Arc::new(|_, _, _| T::zero()),
            Self::Isotropic { strength } => {
                if !(strength >= T::zero()) {
                    return Err(Error::Parameter(format!(
                        "scattering strength {strength} must be >= 0"
                    )));
                }
                Arc::new(move |_, _, _| strength)
            }
            Self::Gaussian {
                strength,
                width,
                cutoff,
            } => {
                if !(strength >= T::zero()) || !(width > T::zero()) || !(cutoff > T::zero()) {
                    return Err(Error::Parameter(
                        "Gaussian scattering needs strength >= 0, width > 0, cutoff > 0".into(),
                    ));
                }
                let norm = T::lit(3.0) / (T::lit(16.0) * T::PI());
                Arc::new(move |from: T, to: T, mu: T| {
                    let d = (to - from) / width;
                    strength
                        * norm
                        * (T::one() + mu * mu)
                        * (-d * d).exp()
                        * (-(to + from) / cutoff).exp()
                })
            }
            Self::Custom(k) => k,
        })
    }
}

/// Compton-type absorption
/// `sigma_a = D1 rho theta^{-1/2} exp(-D2 theta^{-1/2} ((v - v0)/v0)^2)`
/// (temperature `theta` held fixed) with the given scattering kernel.
///
/// Declares the majorant `M(s) = kappa (1 + s)` with
/// `kappa = max(1, D1 theta^{-1/2} (1 + (4 pi v0 (pi / (2 D2 theta^{-1/2}))^{1/2})^{1/2}))`,
/// which bounds the `L2 ∩ Linf` phase-space norm of `sigma` on the untruncated
/// frequency axis; `sigma` is constant in space and time.
pub fn compton_model<T: Real>(
    d1: T,
    d2: T,
    v0: T,
    theta: T,
    scattering: ScatteringProfile<T>,
) -> Result<CoefficientModel<T>> {
    for (name, v) in [("D1", d1), ("D2", d2), ("v0", v0), ("theta", theta)] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::Parameter(format!(
                "Compton parameter {name} = {v} must be positive"
            )));
        }
    }
    let peak = d1 / theta.sqrt();
    let rate = d2 / theta.sqrt();
    let kernel = scattering.kernel()?;
    let l2 = (T::lit(4.0) * T::PI() * v0 * (T::PI() / (T::lit(2.0) * rate)).sqrt()).sqrt();
    let kappa = (peak * (T::one() + l2)).max(T::one());
    let mut model = CoefficientModel::zero("compton")
        .with_sigma(move |p, _rho| {
            let z = (p.freq - v0) / v0;
            peak * (-rate * z * z).exp()
        })
        .with_majorant(move |s| kappa * (T::one() + s));
    model.scatter_gain = kernel.clone();
    model.scatter_loss = kernel;
    Ok(model)
}

/// Frequency-independent absorption `sigma = kappa` with constant scattering.
///
/// On a band grid truncated at `v_max` the declared majorant is
/// `max(1, (kappa + s)(1 + (4 pi v_max)^{1/2}))(1 + s_rho)`.
pub fn gray_model<T: Real>(
    kappa: T,
    scatter: T,
    emission: T,
    v_max: T,
) -> Result<CoefficientModel<T>> {
    if !(kappa >= T::zero())
        || !(scatter >= T::zero())
        || !(emission >= T::zero())
        || !(v_max > T::zero())
    {
        return Err(Error::Parameter(
            "gray model needs kappa, scatter, emission >= 0 and v_max > 0".into(),
        ));
    }
    let k = ((kappa + scatter) * (T::one() + (T::lit(4.0) * T::PI() * v_max).sqrt())).max(T::one());
    Ok(CoefficientModel::zero("gray")
        .with_sigma(move |_, _| kappa)
        .with_scattering(move |_, _, _| scatter)
        .with_emission(move |_| emission)
        .with_majorant(move |s| k * (T::one() + s)))
}
