use rhd_core::diagnostics::{compatibility_check, default_cut_schedule, phi, CompatVerdict};
use rhd_core::norms::NormSettings;
use rhd_lab::run::{execute, prepare};
use rhd_lab::scenario::{builtin_scenarios, Background};
use rhd_lab::{parse_config, RunConfig};

fn config(name: &str, cells: usize, extra: &str) -> RunConfig {
    let text = format!("[grid]\ncells = {cells}\n[quadrature]\nordinates = 4\nbands = 2\n[scenario]\nname = {name}\n[run]\nt_final = 0.02\n{extra}");
    parse_config(&text).unwrap()
}

#[test]
fn every_scenario_meets_its_invariants_at_several_resolutions() {
    for info in builtin_scenarios() {
        for cells in [32, 64, 128] {
            let p = prepare(&config(info.name, cells, ""))
                .unwrap_or_else(|e| panic!("{} at {cells}: {e}", info.name));
            let s = &p.initial.state;
            let ph = &p.problem.phase;
            assert!(s.rho.min() >= 0.0, "{}", info.name);
            assert!(s.intensity.min() >= 0.0, "{}", info.name);
            assert_eq!(s.rho.far(), info.default_rho_bar(), "{}", info.name);
            assert_eq!(ph.grid.reference_density(), info.default_rho_bar());
            let parts = phi(s, ph, &NormSettings::default()).unwrap();
            assert!(parts.total().is_finite(), "{}", info.name);
            // data decay to the far state at the domain boundary
            let n = ph.grid.len();
            for edge in [0, n - 1] {
                assert!(
                    (s.rho.values()[edge] - s.rho.far()).abs() < 1e-3,
                    "{} rho at cell {edge}",
                    info.name
                );
                // solved velocities only reach their zero ghost value linearly in 1D
                if !info.name.starts_with("compat-") {
                    assert!(
                        s.u.at(edge).iter().all(|v| v.abs() < 1e-2),
                        "{} u at cell {edge}",
                        info.name
                    );
                }
                assert!(s.u.at(edge).iter().all(|v| v.is_finite()));
            }
            if info.name != "beam-absorption" {
                for b in 0..ph.bands() {
                    for m in 0..ph.ordinates() {
                        assert!(
                            s.intensity.get(b, m, 0) < 1e-6 && s.intensity.get(b, m, n - 1) < 1e-6,
                            "{}",
                            info.name
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn equilibrium_has_unit_phi() {
    let p = prepare(&config("equilibrium", 64, "")).unwrap();
    assert_eq!(
        phi(&p.initial.state, &p.problem.phase, &NormSettings::default())
            .unwrap()
            .total(),
        1.0
    );
}

#[test]
fn vacuum_plateau_has_an_interior_vacuum_set() {
    let p = prepare(&config("vacuum-plateau", 128, "")).unwrap();
    let rho = p.initial.state.rho.values();
    let zeros: Vec<usize> = (0..rho.len()).filter(|&i| rho[i] == 0.0).collect();
    assert!(zeros.len() >= 20);
    // one contiguous block away from the boundary
    assert!(zeros.windows(2).all(|w| w[1] == w[0] + 1));
    assert!(zeros[0] > 10 && *zeros.last().unwrap() < rho.len() - 10);
}

#[test]
fn scenario_background_is_enforced() {
    for info in builtin_scenarios() {
        let wrong = match info.background {
            Background::Positive => "rho_bar = 0",
            Background::Vacuum => "rho_bar = 1",
        };
        let text = format!(
            "[grid]\ncells = 32\n{wrong}\n[scenario]\nname = {}\n[run]\nt_final = 0.01\n",
            info.name
        );
        assert!(
            prepare(&parse_config(&text).unwrap()).is_err(),
            "{}",
            info.name
        );
    }
}

#[test]
fn compat_pair_verdicts() {
    for (name, expect) in [
        ("compat-satisfied", CompatVerdict::Satisfied),
        ("compat-diverging", CompatVerdict::Diverging),
    ] {
        let p = prepare(&config(name, 256, "")).unwrap();
        let s = &p.initial.state;
        let rep = compatibility_check(s, &p.problem, &default_cut_schedule(&s.rho)).unwrap();
        assert_eq!(rep.verdict, expect, "{name}: {:?}", rep.refinement_trace);
    }
}

#[test]
fn equilibrium_run_does_not_drift() {
    let out = execute(&config(
        "equilibrium",
        64,
        "[slab]\nlength = 0.01\ndt = 0.005\n",
    ))
    .unwrap();
    assert!(out.summary.conservation.max_relative_drift.0 <= 1e-10);
    assert!(out.summary.state_drift.0 <= 1e-10);
    assert_eq!(out.summary.verdicts.compatibility, "vacuous");
}

#[test]
fn vacuum_gaussian_continuation_differences_decrease() {
    let cfg = config(
        "vacuum-farfield",
        64,
        "[continuation]\ndeltas = 1e-2, 1e-3, 1e-4\n",
    );
    let out = execute(&cfg).unwrap();
    let c = out.continuation.expect("schedule given");
    assert_eq!(c.differences.len(), 2);
    assert!(c.monotone, "{:?}", c.differences);
    assert!(out.summary.continuation.is_some());
}
