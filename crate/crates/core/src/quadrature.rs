//! Angular (discrete ordinates) and frequency quadratures, and phase-space
//! integration of radiation fields.

use crate::error::{Error, Result};
use crate::field::{RadiationField, VectorField};
use crate::scalar::Real;

/// Whether ordinates sample the full sphere or the azimuthally reduced slab
/// variable `mu = Omega . e1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularGeometry {
    /// Gauss-Legendre in `mu`, weights summing to 2; directions are `(mu, 0, 0)`.
    Slab,
    /// Unit vectors on S^2, weights summing to 4 pi.
    Sphere,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularQuadrature<T> {
    directions: Vec<[T; 3]>,
    weights: Vec<T>,
    geometry: AngularGeometry,
}

fn invariant_tol<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(256.0))
}

impl<T: Real> AngularQuadrature<T> {
    /// Validates unit length (or `|mu| <= 1`), positive weights, total measure
    /// and the vanishing first moment.
    pub fn new(
        directions: Vec<[T; 3]>,
        weights: Vec<T>,
        geometry: AngularGeometry,
    ) -> Result<Self> {
        if directions.is_empty() || directions.len() != weights.len() {
            return Err(Error::Structural(format!(
                "{} directions with {} weights",
                directions.len(),
                weights.len()
            )));
        }
        let tol = invariant_tol::<T>();
        for (m, (d, &w)) in directions.iter().zip(&weights).enumerate() {
            if !(w > T::zero()) {
                return Err(Error::Parameter(format!("weight {m} is not positive")));
            }
            match geometry {
                AngularGeometry::Sphere => {
                    let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                    if (norm - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) {
                        return Err(Error::Parameter(format!("direction {m} has norm {norm}")));
                    }
                }
                AngularGeometry::Slab => {
                    if d[0].abs() > T::one() || d[1] != T::zero() || d[2] != T::zero() {
                        return Err(Error::Parameter(format!(
                            "slab ordinate {m} is not of the form (mu, 0, 0), |mu| <= 1"
                        )));
                    }
                }
            }
        }
        let q = Self {
            directions,
            weights,
            geometry,
        };
        let total: T = q.weights.iter().copied().sum();
        if (total - q.measure()).abs() > tol * q.measure() {
            return Err(Error::Parameter(format!(
                "weights sum to {total}, expected {}",
                q.measure()
            )));
        }
        for a in 0..3 {
            let first: T = q
                .directions
                .iter()
                .zip(&q.weights)
                .map(|(d, &w)| w * d[a])
                .sum();
            if first.abs() > tol * q.measure() {
                return Err(Error::Parameter(format!(
                    "ordinate set is not symmetric: first moment along axis {a} is {first}"
                )));
            }
        }
        Ok(q)
    }

    /// `n`-point Gauss-Legendre set in `mu` (n even, >= 2).
    pub fn slab(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::Parameter(format!(
                "slab ordinate count {n} must be even and >= 2"
            )));
        }
        let (nodes, weights) = gauss_legendre(n);
        Self::new(
            nodes
                .iter()
                .map(|&mu| [T::lit(mu), T::zero(), T::zero()])
                .collect(),
            weights.iter().map(|&w| T::lit(w)).collect(),
            AngularGeometry::Slab,
        )
    }

    /// Product set: Gauss-Legendre in `cos(theta)` times uniform azimuths.
    ///
    /// Both counts must be even; the set is then symmetric under every
    /// coordinate reflection, which makes the first and third moments vanish
    /// and the second moment isotropic.
    pub fn sphere(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_polar < 2 || n_polar % 2 != 0 || n_azimuth < 4 || n_azimuth % 2 != 0 {
            return Err(Error::Parameter(format!(
                "sphere quadrature needs even n_polar >= 2 and even n_azimuth >= 4, got ({n_polar}, {n_azimuth})"
            )));
        }
        let (nodes, wts) = gauss_legendre(n_polar);
        let dphi = 2.0 * std::f64::consts::PI / n_azimuth as f64;
        let mut directions = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (&mu, &w) in nodes.iter().zip(&wts) {
            let s = (1.0 - mu * mu).sqrt();
            for j in 0..n_azimuth {
                let phi = (j as f64 + 0.5) * dphi;
                directions.push([T::lit(s * phi.cos()), T::lit(s * phi.sin()), T::lit(mu)]);
                weights.push(T::lit(w * dphi));
            }
        }
        Self::new(directions, weights, AngularGeometry::Sphere)
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn geometry(&self) -> AngularGeometry {
        self.geometry
    }

    pub fn direction(&self, m: usize) -> [T; 3] {
        self.directions[m]
    }

    pub fn weight(&self, m: usize) -> T {
        self.weights[m]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Surface measure represented by the weights: 4 pi, or 2 for the slab.
    pub fn measure(&self) -> T {
        match self.geometry {
            AngularGeometry::Slab => T::lit(2.0),
            AngularGeometry::Sphere => T::lit(4.0) * T::PI(),
        }
    }

    /// Scattering cosine between ordinates. In slab geometry this is
    /// `mu * mu'`, the azimuthal average of `Omega . Omega'`.
    pub fn cosine(&self, m: usize, n: usize) -> T {
        let a = self.directions[m];
        let b = self.directions[n];
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    /// `sum_m w_m Omega_m (x) Omega_m`.
    pub fn second_moment(&self) -> [[T; 3]; 3] {
        let mut out = [[T::zero(); 3]; 3];
        for (d, &w) in self.directions.iter().zip(&self.weights) {
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] = out[i][j] + w * d[i] * d[j];
                }
            }
        }
        out
    }
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Truncated frequency axis split into bands with midpoint weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid<T> {
    edges: Vec<T>,
    weights: Vec<T>,
    centers: Vec<T>,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(edges: Vec<T>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::Parameter(
                "at least one band (two edges) required".into(),
            ));
        }
        if !(edges[0] > T::zero()) {
            return Err(Error::Parameter(format!(
                "lowest band edge {} must be positive",
                edges[0]
            )));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter(
                "band edges must be strictly increasing".into(),
            ));
        }
        let weights = edges.windows(2).map(|w| w[1] - w[0]).collect();
        let centers = edges
            .windows(2)
            .map(|w| (w[0] + w[1]) * T::lit(0.5))
            .collect();
        Ok(Self {
            edges,
            weights,
            centers,
        })
    }

    pub fn uniform(v_min: T, v_max: T, bands: usize) -> Result<Self> {
        if bands == 0 {
            return Err(Error::Parameter("band count must be positive".into()));
        }
        let dv = (v_max - v_min) / T::from_usize_lossy(bands);
        Self::new(
            (0..=bands)
                .map(|b| v_min + dv * T::from_usize_lossy(b))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn weight(&self, b: usize) -> T {
        self.weights[b]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn center(&self, b: usize) -> T {
        self.centers[b]
    }

    pub fn centers(&self) -> &[T] {
        &self.centers
    }
}

fn check_shape<T: Real>(
    g: &RadiationField<T>,
    freq: &FrequencyGrid<T>,
    ang: &AngularQuadrature<T>,
) -> Result<()> {
    if g.bands() != freq.len() || g.ordinates() != ang.len() {
        return Err(Error::Structural(format!(
            "radiation field is {}x{} (bands x ordinates), quadratures are {}x{}",
            g.bands(),
            g.ordinates(),
            freq.len(),
            ang.len()
        )));
    }
    Ok(())
}

/// `sum_b sum_m wb_b w_m g[b, m, cell]` per cell.
pub fn integrate_radiation<T: Real>(
    g: &RadiationField<T>,
    freq: &FrequencyGrid<T>,
    ang: &AngularQuadrature<T>,
) -> Result<Vec<T>> {
    check_shape(g, freq, ang)?;
    let mut out = vec![T::zero(); g.cells()];
    for b in 0..freq.len() {
        for m in 0..ang.len() {
            let w = freq.weight(b) * ang.weight(m);
            for (o, &v) in out.iter_mut().zip(g.slice(b, m)) {
                *o = *o + w * v;
            }
        }
    }
    Ok(out)
}

/// First angular moment `sum_b sum_m wb_b w_m g[b, m, cell] Omega_m`, keeping
/// the first `dim` components.
pub fn radiation_moment1<T: Real>(
    g: &RadiationField<T>,
    freq: &FrequencyGrid<T>,
    ang: &AngularQuadrature<T>,
    dim: usize,
) -> Result<VectorField<T>> {
    check_shape(g, freq, ang)?;
    let mut comps = vec![vec![T::zero(); g.cells()]; dim];
    for b in 0..freq.len() {
        for m in 0..ang.len() {
            let w = freq.weight(b) * ang.weight(m);
            let dir = ang.direction(m);
            for (a, comp) in comps.iter_mut().enumerate() {
                let wa = w * dir[a];
                if wa == T::zero() {
                    continue;
                }
                for (o, &v) in comp.iter_mut().zip(g.slice(b, m)) {
                    *o = *o + wa * v;
                }
            }
        }
    }
    Ok(VectorField::from_components(comps))
}

/// Second angular moment `sum wb w g Omega (x) Omega` per cell.
pub fn radiation_moment2<T: Real>(
    g: &RadiationField<T>,
    freq: &FrequencyGrid<T>,
    ang: &AngularQuadrature<T>,
) -> Result<Vec<[[T; 3]; 3]>> {
    check_shape(g, freq, ang)?;
    let mut out = vec![[[T::zero(); 3]; 3]; g.cells()];
    for b in 0..freq.len() {
        for m in 0..ang.len() {
            let w = freq.weight(b) * ang.weight(m);
            let d = ang.direction(m);
            for (o, &v) in out.iter_mut().zip(g.slice(b, m)) {
                for i in 0..3 {
                    for j in 0..3 {
                        o[i][j] = o[i][j] + w * v * d[i] * d[j];
                    }
                }
            }
        }
    }
    Ok(out)
}
