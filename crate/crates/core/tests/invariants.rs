use proptest::prelude::*;

use twodsd::dominance::{index, mvr, phi, OrderKind};
use twodsd::empirical::{gini, target_function, Sample};
use twodsd::piecewise::{Interval, Kind, PiecewiseFunction, Tail};
use twodsd::quadrature::{integrate, QuadOptions};

fn sample_strategy(min: f64, max: f64, len: std::ops::Range<usize>) -> impl Strategy<Value = Sample> {
    prop::collection::vec(min..max, len).prop_map(|v| Sample::new(v).unwrap())
}

fn positive_pair() -> impl Strategy<Value = (Sample, Sample)> {
    (sample_strategy(0.01, 50.0, 1..60), sample_strategy(0.01, 80.0, 1..60))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn index_lies_in_triangle((x, y) in positive_pair()) {
        for order in OrderKind::ALL {
            let idx = index(&x, &y, order).unwrap();
            prop_assert!(idx.abs >= 0.0);
            prop_assert!(idx.signed.abs() <= idx.abs, "{order}: {idx:?}");
        }
    }

    #[test]
    fn swapping_samples_negates_signed((x, y) in positive_pair()) {
        for order in OrderKind::ALL {
            let a = index(&x, &y, order).unwrap();
            let b = index(&y, &x, order).unwrap();
            prop_assert!(close(a.signed, -b.signed, 1e-10 * (1.0 + a.abs)));
            prop_assert!(close(a.abs, b.abs, 1e-10 * (1.0 + a.abs)));
        }
    }

    #[test]
    fn mvr_reversal_sums_to_one((x, y) in positive_pair()) {
        for order in OrderKind::ALL {
            let a = mvr(&index(&x, &y, order).unwrap());
            let b = mvr(&index(&y, &x, order).unwrap());
            prop_assert!(close(a.epsilon0 + b.epsilon0, 1.0, 1e-10));
            prop_assert!((0.0..=1.0).contains(&a.epsilon0));
        }
    }

    #[test]
    fn first_order_signed_is_mean_difference(
        x in sample_strategy(-30.0, 30.0, 1..80),
        y in sample_strategy(-10.0, 60.0, 1..80),
    ) {
        let idx = index(&x, &y, OrderKind::First).unwrap();
        let scale = 1.0 + x.max().abs().max(y.max().abs()).max(x.min().abs()).max(y.min().abs());
        prop_assert!(close(idx.signed, y.mean() - x.mean(), 1e-10 * scale), "{} vs {}", idx.signed, y.mean() - x.mean());
    }

    #[test]
    fn lorenz_signed_is_half_gini_gap((x, y) in positive_pair()) {
        let idx = index(&x, &y, OrderKind::Lorenz).unwrap();
        let expected = 0.5 * (gini(&y).unwrap() - gini(&x).unwrap());
        prop_assert!(close(idx.signed, expected, 1e-10), "{} vs {expected}", idx.signed);
    }

    #[test]
    fn wasserstein_cdf_and_quantile_forms_agree(
        (x, y) in (1usize..70).prop_flat_map(|n| (
            sample_strategy(-20.0, 20.0, n..n + 1),
            sample_strategy(-5.0, 40.0, n..n + 1),
        ))
    ) {
        let idx = index(&x, &y, OrderKind::First).unwrap();
        let n = x.len() as f64;
        let quantile_form: f64 = x.values().iter().zip(y.values()).map(|(a, b)| (a - b).abs()).sum::<f64>() / n;
        prop_assert!(close(idx.abs, quantile_form, 1e-10 * (1.0 + quantile_form)), "{} vs {quantile_form}", idx.abs);
    }

    #[test]
    fn equal_means_second_order_matches_stop_loss(
        (x, y) in positive_pair(),
        probes in prop::collection::vec(0.0f64..1.2, 10),
    ) {
        // rescale y to the mean of x
        let y = y.scaled(x.mean() / y.mean()).unwrap();
        let d2 = target_function(&x, OrderKind::Second).unwrap().sub(&target_function(&y, OrderKind::Second).unwrap()).unwrap();
        let ds = target_function(&x, OrderKind::StopLoss).unwrap().sub(&target_function(&y, OrderKind::StopLoss).unwrap()).unwrap();
        let top = x.max().max(y.max());
        for p in probes {
            let t = p * top;
            prop_assert!(close(d2.eval(t), ds.eval(t), 1e-10 * (1.0 + top)), "t={t}: {} vs {}", d2.eval(t), ds.eval(t));
        }
        let a = index(&x, &y, OrderKind::Second).unwrap();
        let b = index(&x, &y, OrderKind::StopLoss).unwrap();
        prop_assert!(close(a.signed, b.signed, 1e-10 * (1.0 + top * top)));
        prop_assert!(close(a.abs, b.abs, 1e-10 * (1.0 + top * top)));
    }

    #[test]
    fn phi_vanishes_at_the_point_estimate((x, y) in positive_pair()) {
        for order in OrderKind::ALL {
            let idx = index(&x, &y, order).unwrap();
            let m = mvr(&idx);
            if m.degenerate || m.epsilon0 >= 0.5 {
                continue;
            }
            let v = phi(idx.integrals(), m.epsilon0).unwrap();
            prop_assert!(v.abs() <= 1e-10 * (1.0 + idx.abs), "{order}: {v}");
        }
    }
}

fn random_function() -> impl Strategy<Value = (PiecewiseFunction, Interval)> {
    (
        prop::collection::vec(-10.0f64..10.0, 1..12),
        prop::collection::vec(-3.0f64..3.0, 13),
        any::<bool>(),
        -2.0f64..2.0,
        -2.0f64..2.0,
        0.0f64..3.0,
        0.0f64..3.0,
    )
        .prop_filter_map("distinct knots", |(mut knots, vals, linear, lt, rt, pad_lo, pad_hi)| {
            knots.sort_by(f64::total_cmp);
            knots.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let n = knots.len();
            let domain = Interval::new(knots[0] - pad_lo, knots[n - 1] + pad_hi).ok()?;
            let f = if linear {
                PiecewiseFunction::linear(knots, vals[..n].to_vec(), Tail::Slope(lt), Tail::Slope(rt)).ok()?
            } else {
                PiecewiseFunction::step(knots, vals[..n - 1].to_vec(), Tail::Constant(lt), Tail::Constant(rt)).ok()?
            };
            Some((f, domain))
        })
}

fn quadrature_integrals(f: &PiecewiseFunction, domain: Interval) -> (f64, f64) {
    let mut cuts = vec![domain.lo];
    cuts.extend(f.knots().iter().copied().filter(|&k| k > domain.lo && k < domain.hi));
    cuts.push(domain.hi);
    let height = 1.0 + f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let opts = QuadOptions {
        abs_tol: 1e-13 * height * domain.width(),
        rel_tol: 1e-13,
        max_intervals: 10_000,
    };
    let mut signed = 0.0;
    let mut abs = 0.0;
    for w in cuts.windows(2) {
        signed += integrate(|x| f.eval(x), w[0], w[1], opts).unwrap().value;
        abs += integrate(|x| f.eval(x).abs(), w[0], w[1], opts).unwrap().value;
    }
    (signed, abs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_integrals_match_adaptive_quadrature((f, domain) in random_function()) {
        let exact = f.integrate(domain).unwrap();
        let (signed, abs) = quadrature_integrals(&f, domain);
        let tol = 1e-9 * abs.max(1e-12);
        prop_assert!(close(exact.signed, signed, tol), "{f:?}: {} vs {signed}", exact.signed);
        prop_assert!(close(exact.absolute, abs, tol), "{f:?}: {} vs {abs}", exact.absolute);
        prop_assert!(f.kind() == Kind::Step || f.kind() == Kind::Linear);
    }
}
