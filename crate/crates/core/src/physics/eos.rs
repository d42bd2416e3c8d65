use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::scalar::Real;

/// Material pressure law `p_m(rho)`.
#[derive(Debug, Clone, PartialEq)]
pub enum EquationOfState<T> {
    /// `p = A rho^gamma` with `A > 0`, `gamma > 1`.
    Polytropic { a: T, gamma: T },
    /// General barotropic law sampled on a table, interpolated by a
    /// monotone C1 cubic.
    Table(MonotoneCubic<T>),
}

impl<T: Real> EquationOfState<T> {
    pub fn polytropic(a: T, gamma: T) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::Parameter(format!(
                "polytropic constant A = {a} must be positive"
            )));
        }
        if !(gamma > T::one()) || !gamma.is_finite() {
            return Err(Error::Parameter(format!(
                "adiabatic exponent gamma = {gamma} must exceed 1"
            )));
        }
        Ok(Self::Polytropic { a, gamma })
    }

    pub fn table(rho: Vec<T>, p: Vec<T>) -> Result<Self> {
        Ok(Self::Table(MonotoneCubic::new(rho, p)?))
    }

    /// Pressure at a single nonnegative density.
    pub fn pressure_at(&self, rho: T) -> T {
        match self {
            Self::Polytropic { a, gamma } => {
                if rho == T::zero() {
                    T::zero()
                } else {
                    *a * rho.powf(*gamma)
                }
            }
            Self::Table(t) => t.eval(rho),
        }
    }

    /// `dp/drho`, used for sound-speed estimates.
    pub fn derivative_at(&self, rho: T) -> T {
        match self {
            Self::Polytropic { a, gamma } => {
                if rho == T::zero() {
                    T::zero()
                } else {
                    *a * *gamma * rho.powf(*gamma - T::one())
                }
            }
            Self::Table(t) => t.derivative(rho),
        }
    }

    /// Pressure field; the far value is the far-field pressure `p(rho_bar)`.
    pub fn pressure(&self, rho: &ScalarField<T>) -> Result<ScalarField<T>> {
        rho.check_nonnegative("density")?;
        Ok(ScalarField::with_far(
            rho.values().iter().map(|&r| self.pressure_at(r)).collect(),
            self.pressure_at(rho.far().max(T::zero())),
        ))
    }
}

/// Piecewise cubic Hermite interpolant with Fritsch-Butland slopes: C1, and
/// monotone whenever the samples are. Linear beyond the sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic<T> {
    x: Vec<T>,
    y: Vec<T>,
    slope: Vec<T>,
}

impl<T: Real> MonotoneCubic<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() {
            return Err(Error::Parameter(format!(
                "pressure table needs >= 2 matching samples, got {} densities and {} pressures",
                x.len(),
                y.len()
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter(
                "table densities must be strictly increasing".into(),
            ));
        }
        if y.windows(2).any(|w| w[1] < w[0]) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter(
                "table pressures must be finite and nondecreasing".into(),
            ));
        }
        let n = x.len();
        let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<T> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut slope = vec![T::zero(); n];
        slope[0] = delta[0];
        slope[n - 1] = delta[n - 2];
        for k in 1..n - 1 {
            let (d0, d1) = (delta[k - 1], delta[k]);
            if d0 * d1 <= T::zero() {
                slope[k] = T::zero();
            } else {
                let w1 = T::lit(2.0) * h[k] + h[k - 1];
                let w2 = h[k] + T::lit(2.0) * h[k - 1];
                slope[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }
        Ok(Self { x, y, slope })
    }

    fn segment(&self, v: T) -> usize {
        let n = self.x.len();
        match self
            .x
            .binary_search_by(|p| p.partial_cmp(&v).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    pub fn eval(&self, v: T) -> T {
        let n = self.x.len();
        if v <= self.x[0] {
            return self.y[0] + self.slope[0] * (v - self.x[0]);
        }
        if v >= self.x[n - 1] {
            return self.y[n - 1] + self.slope[n - 1] * (v - self.x[n - 1]);
        }
        let k = self.segment(v);
        let h = self.x[k + 1] - self.x[k];
        let s = (v - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        h00 * self.y[k]
            + h10 * h * self.slope[k]
            + h01 * self.y[k + 1]
            + h11 * h * self.slope[k + 1]
    }

    pub fn derivative(&self, v: T) -> T {
        let n = self.x.len();
        if v <= self.x[0] {
            return self.slope[0];
        }
        if v >= self.x[n - 1] {
            return self.slope[n - 1];
        }
        let k = self.segment(v);
        let h = self.x[k + 1] - self.x[k];
        let s = (v - self.x[k]) / h;
        let s2 = s * s;
        let six = T::lit(6.0);
        let d00 = (six * s2 - six * s) / h;
        let d10 = T::lit(3.0) * s2 - T::lit(4.0) * s + T::one();
        let d01 = (-six * s2 + six * s) / h;
        let d11 = T::lit(3.0) * s2 - T::lit(2.0) * s;
        d00 * self.y[k] + d10 * self.slope[k] + d01 * self.y[k + 1] + d11 * self.slope[k + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;

    #[test]
    fn polytropic_examples() {
        let g = SpatialGrid::<f64>::periodic_1d(8, 1.0).unwrap();
        let eos = EquationOfState::polytropic(1.0, 2.0).unwrap();
        let p = eos.pressure(&ScalarField::zeros(&g)).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
        let p = eos.pressure(&ScalarField::constant(&g, 3.0)).unwrap();
        assert!(p.values().iter().all(|&v| v == 9.0));
        assert!(EquationOfState::polytropic(0.0, 2.0).is_err());
        assert!(EquationOfState::polytropic(1.0, 1.0).is_err());
    }

    #[test]
    fn negative_density_names_cell() {
        let eos = EquationOfState::polytropic(1.0, 1.4).unwrap();
        let rho = ScalarField::new(vec![1.0, 0.5, -0.1, 2.0]);
        match eos.pressure(&rho) {
            Err(Error::Domain { cell, .. }) => assert_eq!(cell, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn table_reproduces_power_law() {
        let rho: Vec<f64> = (0..50).map(|k| 5.0 * k as f64 / 49.0).collect();
        let p: Vec<f64> = rho.iter().map(|r| r.powf(1.4)).collect();
        let eos = EquationOfState::table(rho, p).unwrap();
        assert!((eos.pressure_at(2.0) - 2f64.powf(1.4)).abs() < 1e-3);
    }

    #[test]
    fn table_is_c1_at_knots() {
        let t =
            MonotoneCubic::<f64>::new(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 1.0, 1.5, 4.0]).unwrap();
        for &k in &[1.0, 2.0] {
            let e = 1e-7;
            assert!((t.eval(k - e) - t.eval(k + e)).abs() < 1e-6);
            assert!((t.derivative(k - e) - t.derivative(k + e)).abs() < 1e-5);
        }
    }

    #[test]
    fn table_rejects_non_monotone_samples() {
        assert!(EquationOfState::table(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]).is_err());
        assert!(EquationOfState::table(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0]).is_err());
    }
}
