use rotforge::circuits::{build_mekl_circuit, round_cocktail, ProtocolKind};
use rotforge::cost::*;
use rotforge::dilution::critical_level;
use rotforge::noise::{simulate_density, PivotChannel};
use rotforge::quantum::DensityOperator;
use rotforge::sweep::{regime, sweep, Regime};
use rotforge::synthesis::SynthesisModel;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

fn table(eps_raw: f64, l_max: u32) -> CostTable {
    build_cost_table(&TableConfig::new(eps_raw, l_max)).unwrap()
}

#[test]
fn injection_and_rotation_examples() {
    assert_eq!(injection_error(0.2, 0.0), 0.2);
    assert!((injection_error(1e-3, 1e-3) - 1.499e-3).abs() < 1e-15);
    assert_eq!(injection_error(0.0, 4e-3), 2e-3);

    let t = table(1e-3, 4);
    let r2 = t.cheapest_rotation(2, 1e-40).unwrap();
    assert_eq!((r2.cost, r2.error), (0.0, 0.0));
    let r3 = t.cheapest_rotation(3, 1e-3).unwrap();
    assert_eq!((r3.cost, r3.error), (1.0, 1e-3));
    let raw = Supply::new(1e-3, 1.0);
    assert_eq!(rotation_cost(raw, rotation_cost(raw, Supply::FREE)).cost, 1.5);
}

#[test]
fn level5_round_from_raw_inputs_and_a_distilled_pivot() {
    let t = table(1e-3, 5);
    let r4 = t.cheapest_rotation(4, 1e-6).unwrap();
    assert!(close(r4.cost, 22.153112422363222, 1e-9), "{r4:?}");
    assert!(close(r4.error, 7.045860136644812e-8, 1e-9), "{r4:?}");

    let raw = Supply::new(1e-3, 1.0);
    let round = mekl_round_cost(5, raw, raw, Supply::new(r4.error, r4.cost)).unwrap();
    assert!(close(round.cost, 16.237998064369723, 1e-9), "{round:?}");
    assert!(close(round.delta, 9.051627156229251e-6, 1e-9), "{round:?}");

    // same round through the density-matrix simulator
    let circuit = build_mekl_circuit(5).unwrap();
    let input = DensityOperator::noisy_magic(5, 1e-3);
    let pivot = PivotChannel::diagonal(&circuit.pivot_rotation(0, 5), r4.error);
    let run = simulate_density(&circuit, [&input, &input], 1e-3, Some(&pivot)).unwrap();
    let out = run.outcome(5).unwrap();
    assert!(close(out.p_suc, round.p_suc, 1e-12));
    assert!(close(out.delta, round.delta, 1e-9));
    assert!(close(round.cost, (2.0 + 8.0 + r4.cost) / (2.0 * out.p_suc), 1e-12));
}

#[test]
fn mek3_round_example() {
    let raw = Supply::new(0.01, 1.0);
    let r = mekl_round_cost(3, raw, raw, Supply::new(0.3, 50.0)).unwrap();
    assert!((r.delta - 9.2e-4).abs() < 0.03 * 9.2e-4, "{r:?}");
    assert!(close(r.cost, 10.0 / (2.0 * r.p_suc), 1e-15));
    assert!((r.cost - 5.6).abs() < 0.1);
}

#[test]
fn level3_base_examples() {
    assert_eq!(level3_base(1e-3, 1e-3, &Level3Protocol::defaults()).unwrap().cost, 1.0);

    let t = build_cost_table(&TableConfig { protocols: vec![], ..TableConfig::new(0.01, 3) }).unwrap();
    let e = t.cheapest(3, Resource::Magic, 1e-5).unwrap();
    assert!(close(e.error, 7.873908720042757e-6, 1e-9) && close(e.cost, 27.864409762077607, 1e-9), "{e:?}");
    let Recipe::MeklRound { state, .. } = t.nodes[e.node].recipe else { panic!("{:?}", t.nodes[e.node]) };
    let Recipe::MeklRound { state: first, .. } = t.nodes[state].recipe else { panic!("{:?}", t.nodes[state]) };
    assert_eq!(t.nodes[first].recipe, Recipe::Raw);

    let with_plugins = level3_base(0.01, 1e-5, &Level3Protocol::defaults()).unwrap();
    assert!(with_plugins.cost <= e.cost);
    let deep = level3_base(1e-3, 1e-15, &Level3Protocol::defaults()).unwrap();
    assert!(close(deep.cost, 15.948024738026305, 1e-9), "{deep:?}");
    assert!(level3_base(1e-3, 1e-300, &[]).is_err());
}

#[test]
fn top_level_golden_values() {
    let t = table(1e-3, 6);
    let r6 = t.cheapest_rotation(6, 1e-15).unwrap();
    assert!(close(r6.cost, 181.93753628672013, 1e-9), "{r6:?}");
    let m3: Vec<Supply> = t.frontier(3, Resource::Magic).unwrap().iter().map(|e| Supply::new(e.error, e.cost)).collect();
    let pqf = rotforge::synthesis::gs_rotation_cost(&SynthesisModel::Pqf, &m3, 1e-15).unwrap();
    assert!(close(pqf.cost, 1662.8926375122578, 1e-9), "{pqf:?}");
    assert!(r6.cost < pqf.cost);
}

#[test]
fn frontiers_are_monotone() {
    let t = table(1e-3, 8);
    for level in 2..=8 {
        for res in [Resource::Magic, Resource::Rotation] {
            let f = t.frontier(level, res).unwrap();
            for w in f.windows(2) {
                assert!(w[1].cost > w[0].cost && w[1].error < w[0].error, "level {level} {res:?}: {w:?}");
            }
        }
        let mut prev = 0.0;
        for k in 0..60 {
            let target = 0.4 * 10f64.powf(-0.25 * k as f64);
            if let Ok(e) = t.cheapest_rotation(level, target) {
                assert!(e.cost >= prev);
                prev = e.cost;
            }
        }
    }
}

#[test]
fn costs_follow_the_recursions_exactly() {
    let t = table(1e-3, 10);
    assert!(t.recompute_costs() < 1e-12);
    for level in 3..=10 {
        for target in [1e-5, 1e-10, 1e-15] {
            let e = t.cheapest_rotation(level, target).unwrap();
            let Recipe::Inject { state, correction } = t.nodes[e.node].recipe else { panic!() };
            let (m, r) = (&t.nodes[state], &t.nodes[correction]);
            assert_eq!(e.cost, m.cost + 0.5 * r.cost);
            assert_eq!(e.error, injection_error(m.error, r.error));
            assert_eq!((m.level, r.level), (level, level - 1));
        }
    }
}

#[test]
fn raw_round_reproduces_the_cocktail() {
    let node = |resource, level, recipe| RecipeNode { resource, level, error: 1e-3, cost: 0.0, size: 1.0, recipe };
    let mut nodes = vec![
        node(Resource::Magic, 2, Recipe::Clifford),
        node(Resource::Rotation, 2, Recipe::Clifford),
    ];
    let mut pivot = 1;
    for level in 3..=6 {
        nodes.push(node(Resource::Magic, level, Recipe::Raw));
        let m = nodes.len() - 1;
        nodes.push(node(Resource::Rotation, level, Recipe::Inject { state: m, correction: pivot }));
        pivot = nodes.len() - 1;
    }
    let level = 7;
    nodes.push(node(Resource::Magic, level, Recipe::Raw));
    let state = nodes.len() - 1;
    let p_suc = 0.9;
    nodes.push(node(Resource::Magic, level, Recipe::MeklRound { state, m3: 2, pivot, p_suc }));
    let round = nodes.len() - 1;
    let t = CostTable { config: TableConfig::new(1e-3, level), nodes, levels: vec![] };

    let per_output = t.raw_consumption(round);
    let cocktail = round_cocktail(ProtocolKind::Mek, level).unwrap();
    assert_eq!(per_output.keys().collect::<Vec<_>>(), cocktail.keys().collect::<Vec<_>>());
    for (k, v) in &cocktail {
        assert!((per_output[k] * 2.0 * p_suc - v).abs() < 1e-12, "level {k}");
    }
    assert_eq!(cocktail[&3], 8.0 + 0.125);
    assert_eq!((cocktail[&7], cocktail[&6], cocktail[&5], cocktail[&4]), (2.0, 1.0, 0.5, 0.25));
}

#[test]
fn raw_consumption_matches_cost() {
    let t = table(1e-3, 8);
    for level in 3..=8 {
        let e = t.cheapest_rotation(level, 1e-12).unwrap();
        let total: f64 = t.raw_consumption(e.node).values().sum();
        assert!(close(total, e.cost, 1e-12));
    }
}

#[test]
fn build_is_deterministic() {
    assert_eq!(table(1e-3, 7), table(1e-3, 7));
}

#[test]
fn json_round_trip_preserves_sweeps() {
    let t = table(1e-3, 9);
    let back = CostTable::from_json(&t.to_json().unwrap()).unwrap();
    assert_eq!(back, t);
    let sr = SynthesisModel::sr_analytic();
    assert_eq!(sweep(&back, 1e-10, &sr).unwrap(), sweep(&t, 1e-10, &sr).unwrap());
    assert!(CostTable::from_json("{\"config\":1}").is_err());
}

#[test]
fn top_level_three_is_the_level3_table() {
    let small = table(1e-3, 3);
    let big = table(1e-3, 6);
    assert_eq!(small.levels.len(), 2);
    let a: Vec<(f64, f64)> = small.frontier(3, Resource::Magic).unwrap().iter().map(|e| (e.error, e.cost)).collect();
    let b: Vec<(f64, f64)> = big.frontier(3, Resource::Magic).unwrap().iter().map(|e| (e.error, e.cost)).collect();
    assert_eq!(a, b);
}

#[test]
fn dilution_takes_over_past_the_critical_level() {
    let t = table(1e-3, 24);
    for target in [1e-5, 1e-10] {
        let lc = critical_level(target).unwrap().ceil() as u32;
        let regimes: Vec<Regime> =
            (3..=24).map(|l| regime(&t, t.cheapest_rotation(l, target).unwrap().node)).collect();
        let first = 3 + regimes.iter().position(|&r| r == Regime::Dilute).unwrap() as u32;
        assert!(first + 1 >= lc && first <= lc + 1, "target {target}: first dilute level {first}, ℓ_c {lc}");
        for l in lc + 2..=24 {
            assert_eq!(regimes[(l - 3) as usize], Regime::Dilute, "target {target} level {l}");
        }
    }
}

#[test]
fn plugin_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("protocols.json");
    std::fs::write(&path, serde_json::to_string(&Level3Protocol::defaults()).unwrap()).unwrap();
    assert_eq!(load_protocols(&path).unwrap(), Level3Protocol::defaults());
}

#[test]
fn thread_cap_does_not_change_the_table() {
    let cfg = TableConfig::new(1e-2, 6);
    let free = build_cost_table(&cfg).unwrap();
    std::env::set_var("ROTFORGE_THREADS", "1");
    let capped = build_cost_table(&cfg);
    std::env::remove_var("ROTFORGE_THREADS");
    assert_eq!(capped.unwrap(), free);
}
