//! Bootstrap tests of restricted (almost) stochastic dominance.
//!
//! For a violation ratio `ε` the three tests are
//! (a) `H₀: ε₀ ≥ ε`, (b) `H₀: ε₀ ≤ ε` and (c) `H₀: ε₀ = ε`.
//! Case 1 uses the plain bootstrap distribution of the MVR. Case 2 calibrates
//! test (a) with the estimated directional derivative of `φ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bootstrap::{
    case1_replicates, case2_bootstrap, mvr_distribution, quantile, BootstrapConfig, BootstrapDistribution,
    Case1Replicate, Case2Bootstrap,
};
use crate::dominance::{index, mvr, validate_epsilon, Direction, Index2DSD, OrderKind};
use crate::empirical::Sample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `H₀: ε₀ ≥ ε`
    A,
    /// `H₀: ε₀ ≤ ε`
    B,
    /// `H₀: ε₀ = ε`
    C,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Variant::A),
            "b" => Ok(Variant::B),
            "c" => Ok(Variant::C),
            other => Err(Error::InvalidParameter(format!("unknown variant '{other}'"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::A => "a",
            Variant::B => "b",
            Variant::C => "c",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Case1,
    Case2,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "case1" | "1" => Ok(Method::Case1),
            "case2" | "2" => Ok(Method::Case2),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Case1 => "case1",
            Method::Case2 => "case2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub variant: Variant,
    pub epsilon: f64,
    pub alpha: f64,
    pub method: Method,
    pub order: OrderKind,
    pub direction: Direction,
}

impl TestSpec {
    pub fn validate(&self) -> Result<()> {
        validate_epsilon(self.epsilon)?;
        validate_alpha(self.alpha)?;
        if self.method == Method::Case2 && self.variant != Variant::A {
            return Err(Error::UnsupportedCombination(format!(
                "case2 supports variant a only, got variant {}",
                self.variant
            )));
        }
        Ok(())
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(alpha))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// A bootstrap quantile at `level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantilePoint {
    pub level: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestDiagnostics {
    pub replicates: usize,
    pub degenerate_count: usize,
    pub n1: usize,
    pub n2: usize,
    pub r_n: f64,
    /// Contact-set enlargement; Case 2 only.
    pub a_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub spec: TestSpec,
    pub reject: bool,
    /// MVR point estimate for the declared direction.
    pub epsilon_hat0: f64,
    /// Index of `(dominated, dominating)`.
    pub index: Index2DSD,
    /// Case 1: MVR quantiles used by the decision rule. Case 2: the
    /// critical value `ĉ₁₋α` at level `1 - α`.
    pub boot_quantiles: Vec<QuantilePoint>,
    /// Case 1 only.
    pub ci: Option<ConfidenceInterval>,
    /// Case 2 only: `rₙ·φ(θ̂; ε)`.
    pub statistic: Option<f64>,
    pub critical_value: Option<f64>,
    pub diagnostics: TestDiagnostics,
}

/// Equal-tailed interval `[q(α/2), q(1-α/2)]` of a bootstrap distribution.
pub fn confidence_interval(dist: &BootstrapDistribution, alpha: f64) -> Result<ConfidenceInterval> {
    validate_alpha(alpha)?;
    Ok(ConfidenceInterval {
        lower: quantile(dist, alpha / 2.0)?,
        upper: quantile(dist, 1.0 - alpha / 2.0)?,
        alpha,
    })
}

/// Case 1 decision for a given MVR bootstrap distribution. `epsilon` is not
/// range-checked so that power curves can extend past one half.
pub fn case1_decision(dist: &BootstrapDistribution, variant: Variant, epsilon: f64, alpha: f64) -> Result<bool> {
    validate_alpha(alpha)?;
    Ok(match variant {
        Variant::A => epsilon >= quantile(dist, 1.0 - alpha)?,
        Variant::B => epsilon <= quantile(dist, alpha)?,
        Variant::C => !confidence_interval(dist, alpha)?.contains(epsilon),
    })
}

/// Case 2 decision: reject `H₀: ε₀ ≥ ε` iff `rₙ·φ(θ̂; ε) > ĉ₁₋α`.
pub fn case2_decision(boot: &Case2Bootstrap, epsilon: f64, alpha: f64) -> Result<(bool, f64, f64)> {
    validate_alpha(alpha)?;
    let stat = boot.statistic(epsilon)?;
    let crit = boot.distribution(epsilon)?.quantile(1.0 - alpha)?;
    Ok((stat > crit, stat, crit))
}

fn rate(n1: usize, n2: usize) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    (a * b / (a + b)).sqrt()
}

/// Runs a test and also returns the Case 1 replicate cloud (empty for
/// Case 2).
pub fn run_test_with_replicates(
    sample1: &Sample,
    sample2: &Sample,
    spec: &TestSpec,
    cfg: &BootstrapConfig,
) -> Result<(TestResult, Vec<Case1Replicate>)> {
    spec.validate()?;
    cfg.validate()?;
    let (lo, hi) = spec.direction.arrange(sample1, sample2);
    let idx = index(lo, hi, spec.order)?;
    let epsilon_hat0 = mvr(&idx).epsilon0;
    match spec.method {
        Method::Case1 => {
            let reps = case1_replicates(lo, hi, spec.order, cfg)?;
            let dist = mvr_distribution(&reps);
            let reject = case1_decision(&dist, spec.variant, spec.epsilon, spec.alpha)?;
            let levels: Vec<f64> = match spec.variant {
                Variant::A => vec![1.0 - spec.alpha],
                Variant::B => vec![spec.alpha],
                Variant::C => vec![spec.alpha / 2.0, 1.0 - spec.alpha / 2.0],
            };
            let boot_quantiles = levels
                .into_iter()
                .map(|level| Ok(QuantilePoint { level, value: quantile(&dist, level)? }))
                .collect::<Result<Vec<_>>>()?;
            let result = TestResult {
                spec: *spec,
                reject,
                epsilon_hat0,
                index: idx,
                boot_quantiles,
                ci: Some(confidence_interval(&dist, spec.alpha)?),
                statistic: None,
                critical_value: None,
                diagnostics: TestDiagnostics {
                    replicates: dist.len(),
                    degenerate_count: dist.degenerate_count,
                    n1: sample1.len(),
                    n2: sample2.len(),
                    r_n: rate(sample1.len(), sample2.len()),
                    a_n: None,
                },
            };
            Ok((result, reps))
        }
        Method::Case2 => {
            let boot = case2_bootstrap(lo, hi, spec.order, cfg)?;
            let (reject, stat, crit) = case2_decision(&boot, spec.epsilon, spec.alpha)?;
            let result = TestResult {
                spec: *spec,
                reject,
                epsilon_hat0,
                index: idx,
                boot_quantiles: vec![QuantilePoint {
                    level: 1.0 - spec.alpha,
                    value: crit,
                }],
                ci: None,
                statistic: Some(stat),
                critical_value: Some(crit),
                diagnostics: TestDiagnostics {
                    replicates: boot.parts.len(),
                    degenerate_count: 0,
                    n1: sample1.len(),
                    n2: sample2.len(),
                    r_n: boot.rate.r_n,
                    a_n: Some(boot.rate.a_n),
                },
            };
            Ok((result, Vec::new()))
        }
    }
}

pub fn run_test(sample1: &Sample, sample2: &Sample, spec: &TestSpec, cfg: &BootstrapConfig) -> Result<TestResult> {
    run_test_with_replicates(sample1, sample2, spec, cfg).map(|(r, _)| r)
}

/// Results for both directions of the same test. No combined decision is
/// formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BothDirections {
    pub first_dominated: TestResult,
    pub second_dominated: TestResult,
}

pub fn run_test_both(sample1: &Sample, sample2: &Sample, spec: &TestSpec, cfg: &BootstrapConfig) -> Result<BothDirections> {
    let first = TestSpec {
        direction: Direction::FirstDominated,
        ..*spec
    };
    let second = TestSpec {
        direction: Direction::SecondDominated,
        ..*spec
    };
    Ok(BothDirections {
        first_dominated: run_test(sample1, sample2, &first, cfg)?,
        second_dominated: run_test(sample1, sample2, &second, cfg)?,
    })
}

/// Resolution of the Case 2 bisection.
pub const CASE2_EPSILON_RESOLUTION: f64 = 1e-4;

/// Largest `ε` probed by the Case 2 search.
const CASE2_EPSILON_MAX: f64 = 0.5 - 1e-9;

/// Infimum of the `ε` at which test (a) rejects. `None` when Case 2 does not
/// reject anywhere in `[0, 0.5)`.
pub fn min_rejected_epsilon(
    sample1: &Sample,
    sample2: &Sample,
    method: Method,
    order: OrderKind,
    direction: Direction,
    alpha: f64,
    cfg: &BootstrapConfig,
) -> Result<Option<f64>> {
    validate_alpha(alpha)?;
    let (lo, hi) = direction.arrange(sample1, sample2);
    match method {
        Method::Case1 => {
            let dist = mvr_distribution(&case1_replicates(lo, hi, order, cfg)?);
            Ok(Some(quantile(&dist, 1.0 - alpha)?))
        }
        Method::Case2 => {
            let boot = case2_bootstrap(lo, hi, order, cfg)?;
            case2_min_rejected_epsilon(&boot, alpha)
        }
    }
}

/// Bisection for the Case 2 reject boundary on a fixed bootstrap.
pub fn case2_min_rejected_epsilon(boot: &Case2Bootstrap, alpha: f64) -> Result<Option<f64>> {
    let rejects = |eps: f64| case2_decision(boot, eps, alpha).map(|d| d.0);
    let probes = [0.0, 0.25, CASE2_EPSILON_MAX];
    let decisions = probes.iter().map(|&e| rejects(e)).collect::<Result<Vec<_>>>()?;
    if decisions.windows(2).any(|w| w[0] && !w[1]) {
        return Err(Error::NonMonotone(format!(
            "case2 decisions at eps {probes:?} are {decisions:?}"
        )));
    }
    if decisions[0] {
        return Ok(Some(0.0));
    }
    if !decisions[2] {
        return Ok(None);
    }
    let (mut a, mut b) = if decisions[1] {
        (0.0, 0.25)
    } else {
        (0.25, CASE2_EPSILON_MAX)
    };
    while b - a > CASE2_EPSILON_RESOLUTION {
        let m = 0.5 * (a + b);
        if rejects(m)? {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(Some(b))
}
