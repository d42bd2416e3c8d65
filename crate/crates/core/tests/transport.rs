use proptest::prelude::*;
use rhd_core::field::{RadiationField, ScalarField};
use rhd_core::grid::SpatialGrid;
use rhd_core::phase::PhaseSpace;
use rhd_core::physics::{compton_model, CoefficientModel, ScatteringProfile};
use rhd_core::quadrature::{AngularQuadrature, FrequencyGrid};
use rhd_core::transport::{free_stream_step, momentum_source, transport_step, CollisionOperator};
use rhd_core::Error;

fn phase(grid: SpatialGrid<f64>, ordinates: usize, bands: usize) -> PhaseSpace<f64> {
    PhaseSpace::new(
        grid,
        FrequencyGrid::uniform(0.1, 4.1, bands).unwrap(),
        AngularQuadrature::slab(ordinates).unwrap(),
    )
    .unwrap()
}

#[test]
fn pure_absorption_decays_exponentially() {
    let p = phase(SpatialGrid::periodic_1d(16, 1.0).unwrap(), 4, 2);
    let lambda = 1.0;
    let c = 1.0;
    let model = CoefficientModel::zero("absorber").with_sigma(move |_, _| lambda);
    let rho = ScalarField::constant(&p.grid, 1.0);
    let mut i = p.radiation_from_fn(|_, _, _| 2.0);
    let dt = 1e-3;
    for n in 0..1000 {
        i = transport_step(&i, &i, &rho, &model, &p, dt, n as f64 * dt, c).unwrap();
    }
    let exact = 2.0 * (-c * lambda * 1.0f64).exp();
    for v in i.values() {
        assert!((v / exact - 1.0).abs() < 1e-3, "{v} vs {exact}");
    }
}

#[test]
fn absorption_error_is_first_order_in_dt() {
    let p = phase(SpatialGrid::periodic_1d(8, 1.0).unwrap(), 2, 1);
    let model = CoefficientModel::zero("absorber").with_sigma(|_, _| 1.0);
    let rho = ScalarField::constant(&p.grid, 1.0);
    let error = |steps: usize| {
        let dt = 1.0 / steps as f64;
        let mut i = p.radiation_from_fn(|_, _, _| 1.0);
        for n in 0..steps {
            i = transport_step(&i, &i, &rho, &model, &p, dt, n as f64 * dt, 1.0).unwrap();
        }
        (i.values()[0] - (-1.0f64).exp()).abs()
    };
    let errs: Vec<f64> = [50, 100, 200, 400].iter().map(|&n| error(n)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 2.0).abs() <= 0.4, "{errs:?}");
    }
}

fn centroid(slice: &[f64], grid: &SpatialGrid<f64>) -> f64 {
    let mass: f64 = slice.iter().sum();
    slice
        .iter()
        .enumerate()
        .map(|(k, v)| v * grid.center(k)[0])
        .sum::<f64>()
        / mass
}

#[test]
fn streaming_at_cfl_one_translates_pulses() {
    let p = phase(SpatialGrid::farfield_1d(128, 1.0, 1.0).unwrap(), 8, 1);
    let c = 1.0;
    let h = p.grid.spacing(0);
    let dt = p.streaming_dt_limit(c);
    let i0 = p.radiation_from_fn(|_, _, x| (-((x[0] - 0.5) / 0.03).powi(2)).exp());
    let mut i = i0.clone();
    let steps = 30;
    for _ in 0..steps {
        i = free_stream_step(&p, &i, dt, c).unwrap();
    }
    let t = steps as f64 * dt;
    for m in 0..p.ordinates() {
        let mu = p.ang.direction(m)[0];
        let moved = centroid(i.slice(0, m), &p.grid) - centroid(i0.slice(0, m), &p.grid);
        assert!(
            (moved - c * mu * t).abs() < h,
            "ordinate {m}: moved {moved}, expected {}",
            c * mu * t
        );
    }
    // the fastest ordinate moves exactly one cell per step
    let fast = (0..p.ordinates())
        .max_by(|a, b| {
            p.ang.direction(*a)[0]
                .partial_cmp(&p.ang.direction(*b)[0])
                .unwrap()
        })
        .unwrap();
    for k in 0..p.cells() - steps {
        assert!((i.get(0, fast, k + steps) - i0.get(0, fast, k)).abs() < 1e-12);
    }
    assert!(matches!(
        free_stream_step(&p, &i, dt * 1.01, c),
        Err(Error::StepSize { .. })
    ));
}

#[test]
fn isotropic_equilibrium_carries_no_momentum() {
    let p = phase(SpatialGrid::periodic_1d(32, 1.0).unwrap(), 8, 4);
    let model = compton_model(
        1.0,
        1.0,
        1.0,
        1.0,
        ScatteringProfile::Gaussian {
            strength: 0.5,
            width: 0.5,
            cutoff: 4.0,
        },
    )
    .unwrap();
    let rho = ScalarField::from_fn(&p.grid, |x| 1.0 + 0.5 * x[0]);
    let i = p.radiation_from_fn(|v, _, x| (-v).exp() * (1.0 + x[0]));
    let f = momentum_source(&i, &rho, &model, &p, 0.0, 1.0).unwrap();
    // a symmetric quadrature and an even kernel give a vanishing source
    assert!(f.max_abs() < 1e-12, "{}", f.max_abs());
}

#[test]
fn beam_loses_momentum_to_an_absorber() {
    let p = phase(SpatialGrid::periodic_1d(32, 1.0).unwrap(), 8, 2);
    let model = CoefficientModel::zero("absorber").with_sigma(|_, _| 2.0);
    let rho = ScalarField::constant(&p.grid, 1.0);
    let i = p.radiation_from_fn(|_, d, _| if d[0] > 0.0 { 1.0 } else { 0.0 });
    let f = momentum_source(&i, &rho, &model, &p, 0.0, 1.0).unwrap();
    assert!(f.component(0).iter().all(|v| *v > 0.0));
}

fn random_field(p: &PhaseSpace<f64>, vals: &[f64]) -> RadiationField<f64> {
    RadiationField::from_fn(p.bands(), p.ordinates(), p.cells(), |b, m, c| {
        vals[(b * 7 + m * 3 + c) % vals.len()]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transport_step_preserves_nonnegativity(
        ivals in prop::collection::vec(0.0f64..3.0, 37),
        pvals in prop::collection::vec(0.0f64..3.0, 29),
        rvals in prop::collection::vec(0.0f64..2.0, 24),
        frac in 0.01f64..1.0,
        strength in 0.0f64..2.0,
        emission in 0.0f64..1.0,
    ) {
        let p = phase(SpatialGrid::farfield_1d(24, 1.0, 0.5).unwrap(), 4, 3);
        let model = compton_model(1.0, 1.0, 1.0, 1.0, ScatteringProfile::Isotropic { strength }).unwrap()
            .with_emission(move |pt| emission * (-pt.freq).exp());
        let rho = ScalarField::new(rvals).set_far(0.5);
        let i = random_field(&p, &ivals);
        let psi = random_field(&p, &pvals);
        let dt = frac * p.streaming_dt_limit(1.0);
        let next = transport_step(&i, &psi, &rho, &model, &p, dt, 0.0, 1.0).unwrap();
        prop_assert!(next.min() >= 0.0);
        prop_assert!(next.is_finite());
    }

    #[test]
    fn collision_term_is_linear_in_intensity_without_emission(
        ivals in prop::collection::vec(0.0f64..3.0, 31),
        alpha in 0.0f64..5.0,
    ) {
        let p = phase(SpatialGrid::periodic_1d(8, 1.0).unwrap(), 4, 3);
        let model = compton_model(1.0, 1.0, 1.0, 1.0, ScatteringProfile::Gaussian { strength: 0.5, width: 0.5, cutoff: 4.0 }).unwrap();
        let rho = ScalarField::constant(&p.grid, 1.3);
        let op = CollisionOperator::new(&model, &p);
        let i = random_field(&p, &ivals);
        let a = op.term(&i.map(|v| alpha * v), &rho, 0.0).unwrap();
        let b = op.term(&i, &rho, 0.0).unwrap().map(|v| alpha * v);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }
}
