//! Samples and their empirical target functions.

use serde::Serialize;

use crate::dominance::OrderKind;
use crate::error::{Error, Result};
use crate::numeric::{self, CompensatedSum};
use crate::piecewise::{BreakpointGrid, Interval, Kind, PiecewiseFunction, SignedAbsIntegrals, Tail};

/// A univariate sample, stored sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    sorted: Vec<f64>,
    mean: f64,
}

impl Sample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!("non-finite value {bad}")));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self::from_sorted_unchecked(values))
    }

    pub(crate) fn from_sorted_unchecked(sorted: Vec<f64>) -> Self {
        debug_assert!(!sorted.is_empty());
        let mean = numeric::sum(&sorted) / sorted.len() as f64;
        Self { sorted, mean }
    }

    /// Values in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Sample::new(self.sorted.iter().map(|v| v * c).collect())
    }

    /// Empirical quantile `inf{y : F̂(y) >= u}`, i.e. the `⌈n·u⌉`-th order
    /// statistic, for `u` in `(0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.sorted.len();
        let k = ((n as f64) * u).ceil() as usize;
        self.sorted[k.clamp(1, n) - 1]
    }

    /// Distinct values with cumulative counts `#{X <= value}`.
    pub(crate) fn distinct_with_cumcounts(&self) -> (Vec<f64>, Vec<usize>) {
        let mut knots = Vec::with_capacity(self.sorted.len());
        let mut cum = Vec::with_capacity(self.sorted.len());
        for (i, &x) in self.sorted.iter().enumerate() {
            if knots.last() == Some(&x) {
                *cum.last_mut().unwrap() = i + 1;
            } else {
                knots.push(x);
                cum.push(i + 1);
            }
        }
        (knots, cum)
    }

    pub(crate) fn check_order(&self, order: OrderKind) -> Result<()> {
        if order == OrderKind::First {
            return Ok(());
        }
        if self.min() < 0.0 {
            return Err(Error::Precondition {
                order: order.name(),
                reason: format!("negative value {}", self.min()),
            });
        }
        if order == OrderKind::Lorenz && !(self.mean > 0.0) {
            return Err(Error::Precondition {
                order: order.name(),
                reason: "the Lorenz curve needs a positive mean".into(),
            });
        }
        Ok(())
    }
}

/// Empirical target function `ŝ` of a sample for one stochastic order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalTargets {
    pub order: OrderKind,
    pub s_hat: PiecewiseFunction,
    pub mean: f64,
    /// Interval on which `s_hat` is nontrivial.
    pub domain_hint: Interval,
}

/// Target function of `sample` for `order`.
pub fn target_function(sample: &Sample, order: OrderKind) -> Result<PiecewiseFunction> {
    sample.check_order(order)?;
    Ok(match order {
        OrderKind::First => ecdf_fn(sample),
        OrderKind::Second => integrated_cdf_fn(sample),
        OrderKind::StopLoss => integrated_survival_fn(sample),
        OrderKind::Lorenz => lorenz_fn(sample),
    })
}

fn targets(sample: &Sample, order: OrderKind, domain_hint: Interval) -> Result<EmpiricalTargets> {
    let f = target_function(sample, order)?;
    Ok(EmpiricalTargets {
        order,
        s_hat: f,
        mean: sample.mean(),
        domain_hint,
    })
}

/// Empirical distribution function, right-continuous with jumps at the
/// order statistics.
pub fn ecdf(sample: &Sample) -> Result<EmpiricalTargets> {
    targets(sample, OrderKind::First, Interval::new(sample.min(), sample.max())?)
}

/// `t ↦ ∫_{-∞}^t F̂`, zero up to the sample minimum.
pub fn integrated_cdf(sample: &Sample) -> Result<EmpiricalTargets> {
    targets(sample, OrderKind::Second, Interval::new(0.0, sample.max().max(0.0))?)
}

/// `t ↦ ∫_t^∞ (1 - F̂)`, zero from the sample maximum on.
pub fn integrated_survival(sample: &Sample) -> Result<EmpiricalTargets> {
    targets(sample, OrderKind::StopLoss, Interval::new(0.0, sample.max().max(0.0))?)
}

/// Empirical Lorenz curve on `[0, 1]`.
pub fn lorenz(sample: &Sample) -> Result<EmpiricalTargets> {
    targets(sample, OrderKind::Lorenz, Interval::new(0.0, 1.0)?)
}

pub(crate) fn ecdf_fn(sample: &Sample) -> PiecewiseFunction {
    let n = sample.len() as f64;
    let (knots, cum) = sample.distinct_with_cumcounts();
    let values = cum[..cum.len() - 1].iter().map(|&c| c as f64 / n).collect();
    PiecewiseFunction::new_unchecked(
        BreakpointGrid::from_sorted_unchecked(knots),
        Kind::Step,
        values,
        Tail::Constant(0.0),
        Tail::Constant(1.0),
    )
}

pub(crate) fn integrated_cdf_fn(sample: &Sample) -> PiecewiseFunction {
    let n = sample.len() as f64;
    let (knots, cum) = sample.distinct_with_cumcounts();
    let mut values = Vec::with_capacity(knots.len());
    let mut acc = CompensatedSum::new();
    values.push(0.0);
    for i in 1..knots.len() {
        // slope on [x_(i-1), x_(i)) is F̂(x_(i-1))
        acc.add(cum[i - 1] as f64 / n * (knots[i] - knots[i - 1]));
        values.push(acc.value());
    }
    PiecewiseFunction::new_unchecked(
        BreakpointGrid::from_sorted_unchecked(knots),
        Kind::Linear,
        values,
        Tail::Slope(0.0),
        Tail::Slope(1.0),
    )
}

pub(crate) fn integrated_survival_fn(sample: &Sample) -> PiecewiseFunction {
    let n = sample.len() as f64;
    let total = sample.len();
    let (knots, cum) = sample.distinct_with_cumcounts();
    let m = knots.len();
    let mut values = vec![0.0; m];
    let mut acc = CompensatedSum::new();
    for i in (0..m - 1).rev() {
        // 1 - F̂ on [x_(i), x_(i+1))
        acc.add((total - cum[i]) as f64 / n * (knots[i + 1] - knots[i]));
        values[i] = acc.value();
    }
    PiecewiseFunction::new_unchecked(
        BreakpointGrid::from_sorted_unchecked(knots),
        Kind::Linear,
        values,
        Tail::Slope(-1.0),
        Tail::Slope(0.0),
    )
}

pub(crate) fn lorenz_fn(sample: &Sample) -> PiecewiseFunction {
    let n = sample.len();
    let total = numeric::sum(sample.values());
    let mut knots = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    knots.push(0.0);
    values.push(0.0);
    let mut acc = CompensatedSum::new();
    for (i, &x) in sample.values().iter().enumerate() {
        acc.add(x);
        knots.push((i + 1) as f64 / n as f64);
        values.push(acc.value() / total);
    }
    // rounding in the partial sums must not push the last knot off 1
    *values.last_mut().unwrap() = 1.0;
    PiecewiseFunction::new_unchecked(
        BreakpointGrid::from_sorted_unchecked(knots),
        Kind::Linear,
        values,
        Tail::Unused,
        Tail::Unused,
    )
}

/// Integrals of `F̂₁ - F̂₂` over `domain` from one merge pass over the two
/// sorted samples, without building the step functions. The difference is
/// carried as the integer `n₂·#{x ≤ t} - n₁·#{y ≤ t}` and rescaled at the end.
pub(crate) fn ecdf_difference_integrals(x: &[f64], y: &[f64], domain: Interval) -> SignedAbsIntegrals {
    let (nx, ny) = (x.len(), y.len());
    let (step_x, step_y) = (ny as i64, nx as i64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut k: i64 = 0;
    let mut t = domain.lo;
    let (mut signed, mut signed_c) = (0.0f64, 0.0f64);
    let (mut absolute, mut absolute_c) = (0.0f64, 0.0f64);
    let kahan = |acc: &mut f64, carry: &mut f64, term: f64| {
        let yv = term - *carry;
        let tv = *acc + yv;
        *carry = (tv - *acc) - yv;
        *acc = tv;
    };
    while i < nx || j < ny {
        let a = if i < nx { x[i] } else { f64::INFINITY };
        let b = if j < ny { y[j] } else { f64::INFINITY };
        let take_x = a <= b;
        let v = if take_x { a } else { b };
        let next = v.max(domain.lo).min(domain.hi);
        let w = next - t;
        let kf = k as f64;
        kahan(&mut signed, &mut signed_c, kf * w);
        kahan(&mut absolute, &mut absolute_c, kf.abs() * w);
        t = next;
        k += if take_x { step_x } else { -step_y };
        i += take_x as usize;
        j += (!take_x) as usize;
    }
    let scale = (nx as f64) * (ny as f64);
    let signed = signed / scale;
    SignedAbsIntegrals {
        signed,
        absolute: (absolute / scale).max(signed.abs()),
    }
}

/// Gini index `1 - 2∫ℓ̂`, computed from the order statistics as
/// `Σ (2i - n - 1)·x_(i) / (n·Σx)`.
pub fn gini(sample: &Sample) -> Result<f64> {
    sample.check_order(OrderKind::Lorenz)?;
    let n = sample.len() as f64;
    let weighted: CompensatedSum = sample
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x)
        .collect();
    Ok(weighted.value() / (n * n * sample.mean()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn merged_ecdf_difference_matches_step_functions() {
        let x = s(&[0.5, 1.0, 1.0, 2.5, 4.0, 7.25]);
        let y = s(&[1.0, 1.5, 3.0, 3.0, 6.0]);
        for domain in [
            crate::dominance::domain_for(&x, &y, OrderKind::First),
            Interval { lo: -1.0, hi: 9.0 },
            Interval { lo: 1.2, hi: 3.0 },
        ] {
            let fast = ecdf_difference_integrals(x.values(), y.values(), domain);
            let f = ecdf_fn(&x).sub(&ecdf_fn(&y)).unwrap().integrate(domain).unwrap();
            assert!((fast.signed - f.signed).abs() < 1e-12, "{domain:?}");
            assert!((fast.absolute - f.absolute).abs() < 1e-12, "{domain:?}");
        }
    }

    #[test]
    fn sample_validation() {
        assert_eq!(Sample::new(vec![]).unwrap_err(), Error::EmptySample);
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
        assert_eq!(s(&[3.0, 1.0, 2.0]).values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn quantile_is_ceiling_order_statistic() {
        let x = s(&[10.0, 20.0, 30.0, 40.0]);
        assert_eq!(x.quantile(0.25), 10.0);
        assert_eq!(x.quantile(0.26), 20.0);
        assert_eq!(x.quantile(1.0), 40.0);
    }

    #[test]
    fn ecdf_single_point() {
        let f = ecdf(&s(&[2.0])).unwrap().s_hat;
        assert_eq!(f.eval(1.999), 0.0);
        assert_eq!(f.eval(2.0), 1.0);
        assert_eq!(f.eval(9.0), 1.0);
    }

    #[test]
    fn ecdf_two_points() {
        let f = ecdf(&s(&[1.0, 3.0])).unwrap().s_hat;
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(1.0), 0.5);
        assert_eq!(f.eval(2.9), 0.5);
        assert_eq!(f.eval(3.0), 1.0);
    }

    #[test]
    fn ecdf_with_ties() {
        let f = ecdf(&s(&[1.0, 1.0, 2.0])).unwrap().s_hat;
        assert_eq!(f.knots(), &[1.0, 2.0]);
        assert_eq!(f.eval(1.5), 2.0 / 3.0);
        assert_eq!(f.eval(2.0), 1.0);
    }

    #[test]
    fn integrated_cdf_examples() {
        let f = integrated_cdf(&s(&[2.0])).unwrap().s_hat;
        assert_eq!(f.eval(1.0), 0.0);
        assert_eq!(f.eval(2.0), 0.0);
        assert_eq!(f.eval(5.0), 3.0);

        let f = integrated_cdf(&s(&[1.0, 3.0])).unwrap().s_hat;
        assert_eq!(f.eval(3.0), 1.0);

        let f = integrated_cdf(&s(&[1.0, 1.0, 2.0])).unwrap().s_hat;
        assert!((f.eval(2.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn integrated_survival_examples() {
        let f = integrated_survival(&s(&[2.0])).unwrap().s_hat;
        assert_eq!(f.eval(0.0), 2.0);
        assert_eq!(f.eval(2.0), 0.0);
        assert_eq!(f.eval(7.0), 0.0);

        let f = integrated_survival(&s(&[1.0, 3.0])).unwrap().s_hat;
        assert_eq!(f.eval(1.0), 1.0);
        assert_eq!(f.eval(2.0), 0.5);
        assert_eq!(f.eval(0.0), 2.0);
    }

    #[test]
    fn negative_values_rejected_for_integrated_orders() {
        let x = s(&[-1.0, 2.0]);
        assert!(integrated_cdf(&x).is_err());
        assert!(integrated_survival(&x).is_err());
        assert!(lorenz(&x).is_err());
        assert!(ecdf(&x).is_ok());
    }

    #[test]
    fn lorenz_examples() {
        let f = lorenz(&s(&[1.0, 3.0])).unwrap().s_hat;
        assert_eq!(f.knots(), &[0.0, 0.5, 1.0]);
        assert_eq!(f.values(), &[0.0, 0.25, 1.0]);

        let f = lorenz(&s(&[0.0, 1.0])).unwrap().s_hat;
        assert_eq!(f.values(), &[0.0, 0.0, 1.0]);

        let f = lorenz(&s(&[7.0; 4])).unwrap().s_hat;
        for (k, v) in f.knots().iter().zip(f.values()) {
            assert!((k - v).abs() < 1e-15);
        }
    }

    #[test]
    fn lorenz_rejects_zero_mean() {
        assert!(matches!(
            lorenz(&s(&[0.0, 0.0])),
            Err(Error::Precondition { .. })
        ));
        assert!(gini(&s(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&s(&[5.0; 6])).unwrap(), 0.0);
        assert!((gini(&s(&[1.0, 3.0])).unwrap() - 0.25).abs() < 1e-15);
        assert!((gini(&s(&[0.0, 1.0])).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gini_agrees_with_lorenz_area() {
        let x = s(&[0.3, 1.7, 2.2, 2.2, 9.0, 0.0, 4.4]);
        let l = lorenz(&x).unwrap().s_hat;
        let area = l.integrate(Interval::new(0.0, 1.0).unwrap()).unwrap().signed;
        assert!((gini(&x).unwrap() - (1.0 - 2.0 * area)).abs() < 1e-14);
    }
}
