use qchain::propagator::{evolve_ode, evolve_system, Provenance};
use qchain::scenarios::{disorder_study, fourier_crossover_scan, preset, smc_study, Overrides, ScenarioName};
use qchain::steady::solve_steady_state;
use qchain::thermo::{mean_energy, steady_current_identity_check, steady_transport, transient_energy_and_current};
use qchain::{GaussianState, SteadyMethod, System};

fn build(name: ScenarioName, o: &Overrides) -> System {
    preset(name, o).unwrap().system().unwrap()
}

fn sized(n: usize) -> Overrides {
    Overrides {
        n: Some(n),
        ..Overrides::default()
    }
}

#[test]
fn crossover_scan_ends_match_closed_forms_and_decrease() {
    let sizes: Vec<usize> = (3..=12).collect();
    let scan = fourier_crossover_scan(&sizes, 0.5, &Overrides::default(), SteadyMethod::Auto).unwrap();
    assert_eq!(scan.rows.len(), sizes.iter().map(|n| n + 1).sum::<usize>());
    for &n in &sizes {
        let rows: Vec<_> = scan.rows.iter().filter(|r| r.n == n).collect();
        for r in [rows[0], rows[n]] {
            let cf = r.closed_form.expect("closed form at k = 0 and k = n");
            assert!(
                (r.current - cf).abs() <= 1e-9 * cf.abs(),
                "n={n} k={}: {} vs {cf}",
                r.k,
                r.current
            );
        }
        for w in rows.windows(2) {
            assert!(
                w[1].current <= w[0].current * (1.0 + 1e-12),
                "n={n}: not monotone at k={}",
                w[1].k
            );
        }
    }
}

#[test]
fn equal_random_couplings_reduce_to_uniform_chain() {
    let n = 12;
    let uniform = build(ScenarioName::Baseline, &sized(n));
    let per_bond = build(
        ScenarioName::CaseV,
        &Overrides {
            couplings: Some(vec![0.5; n - 1]),
            ..sized(n)
        },
    );
    let a = solve_steady_state(&uniform, SteadyMethod::Auto).unwrap().v_star;
    let b = solve_steady_state(&per_bond, SteadyMethod::Auto).unwrap().v_star;
    assert!((&a - &b).norm() <= 1e-9 * a.norm());
}

#[test]
fn disordered_chain_balances_currents() {
    let study = disorder_study(7, 25, &Overrides::default()).unwrap();
    let c = &study.report.currents;
    let injected = 0.1 * 100.0 + 0.1 * 50.0;
    assert!(c.total.abs() <= 1e-10 * injected);
    assert!(study.couplings.iter().all(|&w| w > 0.0 && w <= 1.0));
    for seed in [1, 2] {
        let sys = build(
            ScenarioName::CaseV,
            &Overrides {
                seed: Some(seed),
                ..Overrides::default()
            },
        );
        let st = solve_steady_state(&sys, SteadyMethod::Auto).unwrap();
        let check = steady_current_identity_check(&st.v_star, &sys).unwrap();
        assert!(check.passed(), "seed {seed}: {check:?}");
    }
}

#[test]
fn spring_mass_profile_resembles_rotating_wave_chain() {
    let study = smc_study(25, 0.5, &Overrides::default()).unwrap();
    let occ = &study.report.occupations;
    let bulk = occ[12];
    assert!(occ[0] > bulk && occ[24] > bulk);
    assert!((bulk - 10.0).abs() <= 0.2 * 10.0, "bulk {bulk}");
    assert!(study.damping_deviation <= 1e-9);
}

#[test]
fn spring_mass_modes_collapse_to_bare_frequency() {
    let modes = qchain::scenarios::smc_mode_frequencies(8, 1.3, 1e-12).unwrap();
    assert!(modes.iter().all(|m| (m - 1.3).abs() <= 1e-9));
}

#[test]
fn all_diffusive_chain_has_no_steady_state() {
    let sys = build(ScenarioName::CaseII, &Overrides::default());
    let err = solve_steady_state(&sys, SteadyMethod::Auto).unwrap_err();
    assert!(err.is_no_steady_state(), "{err}");
}

#[test]
fn closed_form_transient_matches_rk4() {
    let sys = build(ScenarioName::CaseI, &sized(10));
    let vac = GaussianState::vacuum(&sys.layout());
    let times = [0.0, 1.0, 10.0, 20.0, 30.0];
    let closed = evolve_system(&sys, &vac, &times, 0.01).unwrap();
    assert_eq!(closed.provenance, Provenance::ClosedForm);
    let rk4 = evolve_ode(&vac, &sys.generators, &sys.hamiltonian.xi, &times, 0.01).unwrap();
    for (a, b) in closed.states.iter().zip(&rk4.states) {
        assert!((&a.covariance - &b.covariance).norm() <= 1e-8 * a.covariance.norm());
    }
    for (t, s) in times.iter().zip(&closed.states) {
        let (e, _) = transient_energy_and_current(&sys, &vac, *t).unwrap();
        let direct = mean_energy(&sys.hamiltonian, s);
        assert!((e - direct).abs() <= 1e-10 * direct.abs(), "t={t}: {e} vs {direct}");
    }
}

#[test]
fn dephased_chain_evolves_by_rk4() {
    let sys = build(ScenarioName::CaseIV, &sized(6));
    let vac = GaussianState::vacuum(&sys.layout());
    let traj = evolve_system(&sys, &vac, &[0.0, 1.0], 0.01).unwrap();
    assert_eq!(traj.provenance, Provenance::Rk4 { dt: 0.01 });
}

#[test]
fn bulk_occupation_approaches_bath_value_with_length() {
    let mid: Vec<f64> = [50usize, 100, 200]
        .iter()
        .map(|&n| {
            let sys = build(ScenarioName::Baseline, &sized(n));
            let (_, r) = steady_transport(&sys, SteadyMethod::Auto).unwrap();
            r.occupations[n / 2 - 1]
        })
        .collect();
    assert!(
        mid.windows(2).all(|w| (w[1] - 10.0).abs() < (w[0] - 10.0).abs()),
        "{mid:?}"
    );
    assert!((mid[2] - 10.0).abs() < 0.01, "{mid:?}");
}
