//! The 2DSD index, the minimum violation ratio and region classification.
//!
//! For target functions `s₁`, `s₂` on a domain `D`, the index is the pair
//! `(∫_D (s₁ - s₂), ∫_D |s₁ - s₂|)`. It always lies in the cone
//! `Δ = {(x, y) : |x| <= y}`; `X₁` is dominated by `X₂` exactly when it sits on
//! the ray `x = y`, and the minimum violation ratio is `(1 - x/y)/2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::empirical::{target_function, Sample};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::piecewise::{contact_split, Interval, PiecewiseFunction, SignedAbsIntegrals};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderKind {
    /// Usual stochastic order; target function is the CDF.
    First,
    /// Increasing concave order; target is the integrated CDF.
    Second,
    /// Increasing convex order; target is the integrated survival function.
    #[serde(rename = "stoploss", alias = "stop_loss")]
    StopLoss,
    /// Lorenz order; target is the Lorenz curve.
    Lorenz,
}

impl OrderKind {
    pub const ALL: [OrderKind; 4] = [
        OrderKind::First,
        OrderKind::Second,
        OrderKind::StopLoss,
        OrderKind::Lorenz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OrderKind::First => "first",
            OrderKind::Second => "second",
            OrderKind::StopLoss => "stoploss",
            OrderKind::Lorenz => "lorenz",
        }
    }
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "first" | "usual" => Ok(OrderKind::First),
            "second" => Ok(OrderKind::Second),
            "stoploss" | "stop_loss" | "stop-loss" => Ok(OrderKind::StopLoss),
            "lorenz" => Ok(OrderKind::Lorenz),
            other => Err(Error::InvalidParameter(format!("unknown order '{other}'"))),
        }
    }
}

/// Which sample is hypothesized to be the dominated one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `X₁ ⪯ X₂`: sample 1 is dominated by sample 2.
    FirstDominated,
    /// `X₂ ⪯ X₁`.
    SecondDominated,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::FirstDominated => Direction::SecondDominated,
            Direction::SecondDominated => Direction::FirstDominated,
        }
    }

    /// Orders `(sample1, sample2)` as `(dominated, dominating)`.
    pub fn arrange<'a, T>(self, first: &'a T, second: &'a T) -> (&'a T, &'a T) {
        match self {
            Direction::FirstDominated => (first, second),
            Direction::SecondDominated => (second, first),
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "x1" | "first" | "first_dominated" => Ok(Direction::FirstDominated),
            "2" | "x2" | "second" | "second_dominated" => Ok(Direction::SecondDominated),
            other => Err(Error::InvalidParameter(format!("unknown direction '{other}'"))),
        }
    }
}

/// Empirical (or population) 2DSD index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Index2DSD {
    /// `∫ (s₁ - s₂)`
    pub signed: f64,
    /// `∫ |s₁ - s₂|`
    pub abs: f64,
    pub order: OrderKind,
    pub domain: Interval,
}

impl Index2DSD {
    pub fn integrals(&self) -> SignedAbsIntegrals {
        SignedAbsIntegrals {
            signed: self.signed,
            absolute: self.abs,
        }
    }

    /// Index of the reversed pair `(X₂, X₁)`.
    pub fn reversed(&self) -> Self {
        Self {
            signed: -self.signed,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MVREstimate {
    pub epsilon0: f64,
    pub direction: Direction,
    /// Set when `∫|s₁ - s₂| = 0`; `epsilon0` is then reported as 0.5.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `(0, 0)`: the target functions coincide; on both rays.
    Origin,
    OnL1,
    OnL2,
    InR1Eps,
    InR2Eps,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub region: Region,
    pub epsilon_used: f64,
}

/// Plug-in tail integrals for the integrability assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDiagnostics {
    /// `∫₀^∞ √P̂(|X|>x) dx` for each sample.
    pub lambda21: [f64; 2],
    /// `∫₀^∞ x·√P̂(|X|>x) dx` for each sample.
    pub lambda42: [f64; 2],
    /// `mean₂ - mean₁`, the limit of `s₁ - s₂` at infinity for the second order.
    pub tail_constant: f64,
    /// `|tail_constant|` relative to the absolute index, for the second and
    /// stop-loss orders.
    pub truncation_ratio: Option<f64>,
    /// Set when the truncation ratio exceeds 1%.
    pub truncation_warning: bool,
}

pub(crate) fn validate_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..0.5).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(epsilon))
    }
}

/// Integration domain for a pair of samples.
pub fn domain_for(sample1: &Sample, sample2: &Sample, order: OrderKind) -> Interval {
    match order {
        OrderKind::Lorenz => Interval { lo: 0.0, hi: 1.0 },
        _ => Interval {
            lo: sample1.min().min(sample2.min()),
            hi: sample1.max().max(sample2.max()),
        },
    }
}

/// `ŝ₁ - ŝ₂` for the order, on the union grid.
pub fn target_difference(sample1: &Sample, sample2: &Sample, order: OrderKind) -> Result<PiecewiseFunction> {
    let f1 = target_function(sample1, order)?;
    let f2 = target_function(sample2, order)?;
    f1.sub(&f2)
}

/// Empirical 2DSD index of `(sample1, sample2)`.
pub fn index(sample1: &Sample, sample2: &Sample, order: OrderKind) -> Result<Index2DSD> {
    let domain = domain_for(sample1, sample2, order);
    let diff = target_difference(sample1, sample2, order)?;
    let SignedAbsIntegrals { signed, absolute } = diff.integrate(domain)?;
    Ok(Index2DSD {
        signed,
        abs: absolute,
        order,
        domain,
    })
}

/// Index with the samples arranged as `(dominated, dominating)`.
pub fn directed_index(
    sample1: &Sample,
    sample2: &Sample,
    order: OrderKind,
    direction: Direction,
) -> Result<Index2DSD> {
    let (lo, hi) = direction.arrange(sample1, sample2);
    index(lo, hi, order)
}

/// Minimum violation ratio `(1 - signed/abs)/2` for the hypothesis that the
/// first member of the index pair is dominated.
pub fn mvr(idx: &Index2DSD) -> MVREstimate {
    mvr_from_parts(idx.signed, idx.abs, Direction::FirstDominated)
}

pub(crate) fn mvr_from_parts(signed: f64, abs: f64, direction: Direction) -> MVREstimate {
    if abs <= 0.0 {
        return MVREstimate {
            epsilon0: 0.5,
            direction,
            degenerate: true,
        };
    }
    MVREstimate {
        epsilon0: (0.5 * (1.0 - signed / abs)).clamp(0.0, 1.0),
        direction,
        degenerate: false,
    }
}

impl MVREstimate {
    /// Estimate for the opposite hypothesis; the two always sum to one.
    pub fn reversed(&self) -> Self {
        Self {
            epsilon0: if self.degenerate { 0.5 } else { 1.0 - self.epsilon0 },
            direction: self.direction.reversed(),
            degenerate: self.degenerate,
        }
    }
}

/// Default classification tolerance `1e-9·(1 + abs)`.
pub fn default_tolerance(idx: &Index2DSD) -> f64 {
    1e-9 * (1.0 + idx.abs)
}

/// Locates the index relative to the rays `L₁`, `L₂` and the cones
/// `R₁,ε = {y <= x/(1-2ε)}`, `R₂,ε = {y <= -x/(1-2ε)}`.
pub fn classify(idx: &Index2DSD, epsilon: f64, tol: f64) -> Result<Classification> {
    validate_epsilon(epsilon)?;
    let (x, y) = (idx.signed, idx.abs);
    let scale = 1.0 - 2.0 * epsilon;
    let region = if y <= tol {
        Region::Origin
    } else if (y - x).abs() <= tol {
        Region::OnL1
    } else if (y + x).abs() <= tol {
        Region::OnL2
    } else if y <= x / scale + tol {
        Region::InR1Eps
    } else if y <= -x / scale + tol {
        Region::InR2Eps
    } else {
        Region::Interior
    };
    Ok(Classification {
        region,
        epsilon_used: epsilon,
    })
}

/// `φ(h) = ∫h - (1-2ε)‖h‖` from the integrals of `h`; non-negative exactly
/// when the dominated side `ε`-almost holds.
pub fn phi(integrals: SignedAbsIntegrals, epsilon: f64) -> Result<f64> {
    validate_epsilon(epsilon)?;
    Ok(phi_unchecked(integrals.signed, integrals.absolute, epsilon))
}

#[inline]
pub(crate) fn phi_unchecked(signed: f64, absolute: f64, epsilon: f64) -> f64 {
    signed - (1.0 - 2.0 * epsilon) * absolute
}

/// Estimated directional derivative of `φ` at `θ̂` in direction `h`:
/// `∫h - (1-2ε)(∫_{|θ̂|≤aₙ}|h| + ∫_{|θ̂|>aₙ} h·sgn θ̂)`.
pub fn phi_hat_derivative(
    h: &PiecewiseFunction,
    theta_hat: &PiecewiseFunction,
    epsilon: f64,
    a_n: f64,
    domain: Interval,
) -> Result<f64> {
    validate_epsilon(epsilon)?;
    let split = contact_split(h, theta_hat, a_n, domain)?;
    Ok(split.total - (1.0 - 2.0 * epsilon) * (split.abs_on_contact + split.signed_off_contact))
}

fn tail_integrals(sample: &Sample) -> (f64, f64) {
    let n = sample.len();
    let mut abs: Vec<f64> = sample.values().iter().map(|x| x.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut l21 = CompensatedSum::new();
    let mut l42 = CompensatedSum::new();
    let mut prev = 0.0;
    for (k, &a) in abs.iter().enumerate() {
        // P̂(|X| > x) = (n - k)/n on [prev, a)
        let surv = ((n - k) as f64 / n as f64).sqrt();
        l21.add(surv * (a - prev));
        l42.add(surv * 0.5 * (a * a - prev * prev));
        prev = a;
    }
    (l21.value(), l42.value())
}

/// Tail integrability diagnostics. For the second and stop-loss orders the
/// index is truncated to the pooled range, so `mean₂ - mean₁` is compared to
/// the absolute index to expose how much the truncation matters.
pub fn tail_diagnostics(sample1: &Sample, sample2: &Sample, order: OrderKind) -> Result<TailDiagnostics> {
    let (a21, a42) = tail_integrals(sample1);
    let (b21, b42) = tail_integrals(sample2);
    let tail_constant = sample2.mean() - sample1.mean();
    let truncation_ratio = match order {
        OrderKind::Second | OrderKind::StopLoss => {
            let idx = index(sample1, sample2, order)?;
            Some(if idx.abs > 0.0 {
                tail_constant.abs() / idx.abs
            } else if tail_constant == 0.0 {
                0.0
            } else {
                f64::INFINITY
            })
        }
        _ => None,
    };
    Ok(TailDiagnostics {
        lambda21: [a21, b21],
        lambda42: [a42, b42],
        tail_constant,
        truncation_ratio,
        truncation_warning: truncation_ratio.is_some_and(|r| r > 0.01),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::{Tail};

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    fn idx(signed: f64, abs: f64) -> Index2DSD {
        Index2DSD {
            signed,
            abs,
            order: OrderKind::First,
            domain: Interval { lo: 0.0, hi: 1.0 },
        }
    }

    #[test]
    fn first_order_index_examples() {
        let i = index(&s(&[1.0, 3.0]), &s(&[2.0, 4.0]), OrderKind::First).unwrap();
        assert_eq!((i.signed, i.abs), (1.0, 1.0));
        let i = index(&s(&[1.0, 4.0]), &s(&[2.0, 3.0]), OrderKind::First).unwrap();
        assert_eq!((i.signed, i.abs), (0.0, 1.0));
    }

    #[test]
    fn identical_samples_give_origin() {
        let x = s(&[0.5, 1.0, 2.5, 2.5, 7.0]);
        for order in OrderKind::ALL {
            let i = index(&x, &x, order).unwrap();
            assert_eq!((i.signed, i.abs), (0.0, 0.0), "{order}");
        }
    }

    #[test]
    fn mvr_examples() {
        assert_eq!(mvr(&idx(1.0, 1.0)).epsilon0, 0.0);
        assert_eq!(mvr(&idx(0.0, 1.0)).epsilon0, 0.5);
        let m = mvr(&idx(-1.0, 1.0));
        assert_eq!(m.epsilon0, 1.0);
        assert_eq!(m.reversed().epsilon0, 0.0);
        assert_eq!(mvr(&idx(-1.0, 1.0).reversed()).epsilon0, 0.0);
    }

    #[test]
    fn mvr_degenerate_is_flagged() {
        let m = mvr(&idx(0.0, 0.0));
        assert!(m.degenerate);
        assert_eq!(m.epsilon0, 0.5);
    }

    #[test]
    fn classify_examples() {
        let c = classify(&idx(1.0, 1.0), 0.0, 1e-9).unwrap();
        assert_eq!(c.region, Region::OnL1);
        let c = classify(&idx(-1.0, 1.0), 0.0, 1e-9).unwrap();
        assert_eq!(c.region, Region::OnL2);
        let c = classify(&idx(0.8, 1.0), 0.11, 1e-9).unwrap();
        assert_eq!(c.region, Region::InR1Eps);
        let c = classify(&idx(0.8, 1.0), 0.05, 1e-9).unwrap();
        assert_eq!(c.region, Region::Interior);
        let c = classify(&idx(-0.8, 1.0), 0.11, 1e-9).unwrap();
        assert_eq!(c.region, Region::InR2Eps);
        let c = classify(&idx(0.0, 0.0), 0.1, 1e-9).unwrap();
        assert_eq!(c.region, Region::Origin);
    }

    #[test]
    fn classify_rejects_epsilon_out_of_range() {
        assert!(classify(&idx(1.0, 1.0), 0.5, 1e-9).is_err());
        assert!(classify(&idx(1.0, 1.0), -0.1, 1e-9).is_err());
    }

    #[test]
    fn phi_examples() {
        let i = |x, y| SignedAbsIntegrals { signed: x, absolute: y };
        assert_eq!(phi(i(1.0, 1.0), 0.0).unwrap(), 0.0);
        let delta = 1e-3;
        let v = phi(i(0.0, 1.0), 0.5 - delta).unwrap();
        assert!(v < 0.0 && (v + 2.0 * delta).abs() < 1e-12);
        assert!(phi(i(0.8, 1.0), 0.1).unwrap().abs() < 1e-15);
        assert!(phi(i(0.8, 1.0), 0.5).is_err());
    }

    #[test]
    fn phi_vanishes_at_the_mvr() {
        let i = index(&s(&[0.2, 1.1, 3.0, 4.5]), &s(&[0.9, 1.0, 2.0, 6.0]), OrderKind::First).unwrap();
        let e = mvr(&i).epsilon0;
        assert!(e < 0.5);
        assert!(phi(i.integrals(), e).unwrap().abs() < 1e-12);
    }

    #[test]
    fn phi_hat_derivative_examples() {
        let unit = Interval::new(0.0, 1.0).unwrap();
        let h = PiecewiseFunction::linear(vec![0.0, 0.5, 1.0], vec![-1.0, 2.0, 0.5], Tail::Unused, Tail::Unused)
            .unwrap();
        let zero = PiecewiseFunction::linear(vec![0.0, 1.0], vec![0.0, 0.0], Tail::Unused, Tail::Unused).unwrap();
        let eps = 0.2;
        let full = phi(h.integrate(unit).unwrap(), eps).unwrap();
        let d = phi_hat_derivative(&h, &zero, eps, 0.01, unit).unwrap();
        assert!((d - full).abs() < 1e-14);

        let far = PiecewiseFunction::linear(vec![0.0, 1.0], vec![3.0, 3.0], Tail::Unused, Tail::Unused).unwrap();
        let d = phi_hat_derivative(&h, &far, eps, 0.01, unit).unwrap();
        let int_h = h.integrate(unit).unwrap().signed;
        assert!((d - 2.0 * eps * int_h).abs() < 1e-14);

        let ramp = PiecewiseFunction::linear(vec![0.0, 1.0], vec![0.0, 1.0], Tail::Unused, Tail::Unused).unwrap();
        let one = PiecewiseFunction::linear(vec![0.0, 1.0], vec![1.0, 1.0], Tail::Unused, Tail::Unused).unwrap();
        let d = phi_hat_derivative(&one, &ramp, 0.0, 0.5, unit).unwrap();
        assert!(d.abs() < 1e-15);
    }

    #[test]
    fn tail_diagnostics_examples() {
        let c = 2.5;
        let t = tail_diagnostics(&s(&[c]), &s(&[c, c]), OrderKind::First).unwrap();
        assert_eq!(t.lambda21, [c, c]);
        assert_eq!(t.lambda42, [c * c / 2.0, c * c / 2.0]);
        assert_eq!(t.tail_constant, 0.0);
        assert!(!t.truncation_warning);

        let t = tail_diagnostics(&s(&[1.0, 3.0]), &s(&[1.0]), OrderKind::First).unwrap();
        assert!((t.lambda21[0] - (1.0 + 0.5f64.sqrt() * 2.0)).abs() < 1e-15);
        assert_eq!(t.tail_constant, -1.0);
    }

    #[test]
    fn tail_diagnostics_flag_unequal_means() {
        let t = tail_diagnostics(&s(&[1.0, 2.0, 3.0]), &s(&[2.0, 3.0, 4.0]), OrderKind::Second).unwrap();
        assert!(t.truncation_warning);
        let t = tail_diagnostics(&s(&[1.0, 3.0]), &s(&[2.0, 2.0]), OrderKind::StopLoss).unwrap();
        assert_eq!(t.truncation_ratio, Some(0.0));
        assert!(!t.truncation_warning);
    }

    #[test]
    fn order_and_direction_parse() {
        assert_eq!("stoploss".parse::<OrderKind>().unwrap(), OrderKind::StopLoss);
        assert_eq!("Lorenz".parse::<OrderKind>().unwrap(), OrderKind::Lorenz);
        assert!("third".parse::<OrderKind>().is_err());
        assert_eq!("x2".parse::<Direction>().unwrap(), Direction::SecondDominated);
    }
}
