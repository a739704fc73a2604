use rotforge::circuits::{build_circuit, build_dpl_circuit, build_mekl_circuit, ProtocolKind};
use rotforge::noise::monte_carlo::{monte_carlo_trials, plus_input_trial};
use rotforge::noise::*;

fn spec(e3: f64, el: f64, eta: f64) -> NoiseSpec {
    NoiseSpec::new(e3, el, eta).unwrap()
}

#[test]
fn corrected_closed_form_matches_simulation() {
    let model = RoundModel::build(&build_mekl_circuit(6).unwrap()).unwrap();
    for n in [spec(1e-3, 1e-3, 1e-6), spec(1e-2, 2e-3, 1e-4), spec(3e-2, 1e-2, 1e-3), spec(0.0, 0.05, 0.0)] {
        let sim = model.evaluate(&n).unwrap();
        let f = appe_formulas(&n);
        assert!((f.p_suc_corrected - sim.p_suc).abs() < 1e-12, "{n:?}: {f:?} vs {sim:?}");
        assert!((f.delta_corrected / sim.delta - 1.0).abs() < 1e-9, "{n:?}: {f:?} vs {sim:?}");
        if n.epsl > 0.0 {
            // the printed numerator carries one ε_ℓ² too many
            assert!(f.delta_numerator - f.delta_numerator_corrected > 0.0);
        }
    }
}

#[test]
fn simulate_example() {
    let r = simulate_round(&build_mekl_circuit(5).unwrap(), &spec(1e-3, 1e-3, 1e-6)).unwrap();
    assert!((r.delta / 9.25e-6 - 1.0).abs() < 0.02, "{r:?}");
    let r = simulate_round(&build_mekl_circuit(5).unwrap(), &NoiseSpec::default()).unwrap();
    assert_eq!((r.delta, r.p_suc), (0.0, 1.0));
}

#[test]
fn dp_is_never_better_than_mek() {
    for level in 4..=6 {
        let mek = RoundModel::build(&build_mekl_circuit(level).unwrap()).unwrap();
        let dp = RoundModel::build(&build_dpl_circuit(level).unwrap()).unwrap();
        assert_eq!((mek.sites, dp.sites), (8, 16));
        for n in [spec(1e-3, 1e-3, 1e-6), spec(1e-2, 1e-2, 0.0), spec(5e-3, 0.0, 1e-5)] {
            let (a, b) = (mek.evaluate(&n).unwrap(), dp.evaluate(&n).unwrap());
            assert!(b.delta >= a.delta && b.p_suc <= a.p_suc, "level {level} {n:?}");
        }
        let quiet = spec(0.0, 3e-3, 2e-4);
        let (a, b) = (mek.evaluate(&quiet).unwrap(), dp.evaluate(&quiet).unwrap());
        assert!((a.delta - b.delta).abs() < 1e-12 && (a.p_suc - b.p_suc).abs() < 1e-12);
    }
    assert_eq!(build_circuit(ProtocolKind::Dp, 5).unwrap().noisy_site_count(), 16);
}

#[test]
fn monte_carlo_is_seeded() {
    let caps = spec(1e-2, 1e-2, 1e-4);
    let (a, ta) = monte_carlo_trials(7, 20, &caps, 5).unwrap();
    let (b, tb) = monte_carlo_trials(7, 20, &caps, 5).unwrap();
    assert_eq!((a, ta), (b.clone(), tb.clone()));
    let (c, _) = monte_carlo_trials(8, 20, &caps, 5).unwrap();
    assert_ne!(c.max_observed_error, b.max_observed_error);
    assert_eq!(b.violations, 0);
    assert!(tb.iter().all(|t| t.observed <= t.bound && t.noise.eps3 <= caps.eps3 && t.noise.eta <= caps.eta));
}

#[test]
fn plus_inputs_stay_under_the_bound() {
    for level in 5..=8 {
        let t = plus_input_trial(level, 1e-3, 1e-5).unwrap();
        assert!(t.observed <= t.bound, "level {level}: {t:?}");
    }
}

#[test]
fn bad_rates_are_rejected() {
    assert!(NoiseSpec::new(0.5, 0.0, 0.0).is_err());
    assert!(NoiseSpec::new(0.0, -1e-3, 0.0).is_err());
    assert!(NoiseSpec::new(0.0, 0.0, f64::NAN).is_err());
    assert!(generic_bound(&spec(0.02, 0.0, 0.0)).is_err());
    assert!(monte_carlo_generic(0, 0, &NoiseSpec::default(), 5).is_err());
}
