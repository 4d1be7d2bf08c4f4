use std::time::Instant;

use twodsd::distribution::DistributionSpec;
use twodsd::dominance::OrderKind;
use twodsd::scenarios::{oracle_index, oracle_mvr, ScenarioSpec, SCENARIO4_SUBSTITUTE_MVR};

#[test]
fn published_scenarios_reproduce() {
    let start = Instant::now();
    for id in ["1", "2", "3"] {
        let sc = ScenarioSpec::builtin(id).unwrap();
        let o = sc.oracle().unwrap();
        let reference = sc.published_mvr.unwrap();
        println!("scenario {id}: {:.9} (reference {reference}) crossings {:?}", o.epsilon0, o.crossings);
        assert!((o.epsilon0 - reference).abs() < 1e-4, "scenario {id}: {}", o.epsilon0);
    }
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn scenario4_substitute_is_pinned() {
    let o = ScenarioSpec::builtin("4sub").unwrap().oracle().unwrap();
    println!("scenario 4sub: {:.12}", o.epsilon0);
    assert!((o.epsilon0 - SCENARIO4_SUBSTITUTE_MVR).abs() < 1e-8, "{}", o.epsilon0);
}

#[test]
fn reversal_identity_for_every_scenario() {
    for id in ScenarioSpec::BUILTIN_IDS {
        let sc = ScenarioSpec::builtin(id).unwrap();
        let f = oracle_mvr(&sc.pop1, &sc.pop2, sc.order).unwrap();
        let r = oracle_mvr(&sc.pop2, &sc.pop1, sc.order).unwrap();
        assert!((f + r - 1.0).abs() < 1e-6, "{id}");
    }
}

#[test]
fn lognormal_first_order_signed_is_mean_gap() {
    let pairs = [((0.0, 1.0), (0.5, 0.5)), ((2.0, 1.0), (1.0, 1.5)), ((1.0, 1.0), (1.0, 1.5)), ((-1.0, 0.3), (0.2, 0.9))];
    for ((m1, s1), (m2, s2)) in pairs {
        let a = DistributionSpec::lognormal(m1, s1);
        let b = DistributionSpec::lognormal(m2, s2);
        let o = oracle_index(&a, &b, OrderKind::First).unwrap();
        let gap = b.mean() - a.mean();
        assert!((o.signed - gap).abs() < 1e-8, "{} vs {gap}", o.signed);
    }
}

#[test]
fn lorenz_of_identical_shape_scaled_is_degenerate() {
    let a = DistributionSpec::lognormal(0.0, 0.7);
    let b = DistributionSpec::lognormal(3.0, 0.7);
    assert!(oracle_index(&a, &b, OrderKind::Lorenz).is_err());
}
