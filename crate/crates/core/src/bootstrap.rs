//! Seeded, reproducible bootstrap engine.
//!
//! Every replicate draws from its own ChaCha stream keyed by
//! `(seed, replicate, sample id)`, so the output does not depend on how the
//! replicates are scheduled across threads. Results are collected in
//! replicate order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dominance::{domain_for, mvr_from_parts, phi_unchecked, validate_epsilon, Direction, OrderKind};
use crate::empirical::{ecdf_difference_integrals, target_function, Sample};
use crate::error::{Error, Result};
use crate::piecewise::{contact_split, ContactSplit, Interval, PiecewiseFunction, SignedAbsIntegrals};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parallelism {
    Auto,
    Workers(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    /// Number of bootstrap replicates `B`.
    pub replicates: usize,
    pub seed: u64,
    /// Tuning constant `c` of the contact-set enlargement `aₙ`.
    pub case2_c: f64,
    pub parallelism: Parallelism,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 2000,
            seed: 0,
            case2_c: 0.01,
            parallelism: Parallelism::Auto,
        }
    }
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self {
            replicates,
            seed,
            ..Default::default()
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.case2_c = c;
        self
    }

    pub fn with_parallelism(mut self, parallelism: Parallelism) -> Self {
        self.parallelism = parallelism;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("B must be at least 1".into()));
        }
        if !(self.case2_c > 0.0 && self.case2_c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must be positive, got {}", self.case2_c)));
        }
        if self.parallelism == Parallelism::Workers(0) {
            return Err(Error::InvalidParameter("worker count must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    Mvr,
    Derivative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDistribution {
    /// Replicate values in replicate order.
    pub values: Vec<f64>,
    pub degenerate_count: usize,
    pub statistic_kind: StatisticKind,
}

impl BootstrapDistribution {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        quantile(self, q)
    }

    pub fn mean(&self) -> f64 {
        crate::numeric::sum(&self.values) / self.values.len() as f64
    }
}

/// 1-based rank `⌈B·q⌉`, robust to `q·B` landing a rounding error above an
/// integer.
pub fn quantile_rank(len: usize, q: f64) -> usize {
    let x = q * len as f64;
    let r = x.round();
    let k = if (x - r).abs() <= 1e-9 * (len as f64).max(1.0) {
        r
    } else {
        x.ceil()
    };
    (k as usize).clamp(1, len.max(1))
}

/// Order-statistic quantile: the `⌈B·q⌉`-th smallest replicate value.
pub fn quantile(dist: &BootstrapDistribution, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidProbability(q));
    }
    if dist.values.is_empty() {
        return Err(Error::InvalidParameter("empty bootstrap distribution".into()));
    }
    let sorted = dist.sorted();
    Ok(sorted[quantile_rank(sorted.len(), q) - 1])
}

/// Two-sample rate and contact-set enlargement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateAndBandwidth {
    /// `√(n₁n₂/(n₁+n₂))`
    pub r_n: f64,
    /// `c·log(n₁n₂/(n₁+n₂))/rₙ`
    pub a_n: f64,
}

impl RateAndBandwidth {
    pub fn new(n1: usize, n2: usize, c: f64) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::EmptySample);
        }
        let m = (n1 as f64 * n2 as f64) / (n1 as f64 + n2 as f64);
        let r_n = m.sqrt();
        let a_n = c * m.ln() / r_n;
        Ok(Self { r_n, a_n })
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Streams used by the bootstrap engine.
pub const BOOTSTRAP_DOMAIN: u64 = 0xB007;

/// Independent generator for `(seed, domain, index, id)`. `domain` separates
/// unrelated uses of the same seed (bootstrap, Monte Carlo sampling).
pub fn stream_rng(seed: u64, domain: u64, index: u64, id: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(domain.wrapping_add(splitmix64(index))));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(id);
    rng
}

/// Draws `n` values with replacement. Counts are tallied per index so the
/// result comes out already sorted.
pub fn resample<R: Rng + ?Sized>(sample: &Sample, rng: &mut R) -> Sample {
    let values = sample.values();
    let n = values.len();
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1;
    }
    let mut out = Vec::with_capacity(n);
    for (&x, &c) in values.iter().zip(&counts) {
        for _ in 0..c {
            out.push(x);
        }
    }
    Sample::from_sorted_unchecked(out)
}

/// Source of bootstrap samples. `sample_id` is 0 for the first sample of the
/// pair and 1 for the second.
pub trait Resampler: Sync {
    fn resample(&self, sample: &Sample, replicate: u64, sample_id: u64) -> Sample;
}

#[derive(Debug, Clone, Copy)]
pub struct SeededResampler {
    pub seed: u64,
}

impl Resampler for SeededResampler {
    fn resample(&self, sample: &Sample, replicate: u64, sample_id: u64) -> Sample {
        let mut rng = stream_rng(self.seed, BOOTSTRAP_DOMAIN, replicate, sample_id);
        resample(sample, &mut rng)
    }
}

pub(crate) fn run_indexed<T: Send>(
    count: usize,
    parallelism: Parallelism,
    f: impl Fn(u64) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    match parallelism {
        Parallelism::Workers(1) => (0..count as u64).map(f).collect(),
        Parallelism::Auto => (0..count as u64).into_par_iter().map(f).collect(),
        Parallelism::Workers(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            pool.install(|| (0..count as u64).into_par_iter().map(f).collect())
        }
    }
}

/// One Case 1 replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Case1Replicate {
    pub signed: f64,
    pub abs: f64,
    pub epsilon0: f64,
    pub degenerate: bool,
}

/// Index of `(sample1, sample2)` over a fixed domain.
fn index_on(sample1: &Sample, sample2: &Sample, order: OrderKind, domain: Interval) -> Result<SignedAbsIntegrals> {
    if order == OrderKind::First {
        return Ok(ecdf_difference_integrals(sample1.values(), sample2.values(), domain));
    }
    let f1 = target_function(sample1, order)?;
    let f2 = target_function(sample2, order)?;
    f1.sub(&f2)?.integrate(domain)
}

/// Bootstrapped indices and MVRs for `sample1 ⪯ sample2`. Every replicate is
/// integrated over the domain of the original pair.
pub fn case1_replicates_with(
    sample1: &Sample,
    sample2: &Sample,
    order: OrderKind,
    cfg: &BootstrapConfig,
    resampler: &dyn Resampler,
) -> Result<Vec<Case1Replicate>> {
    cfg.validate()?;
    sample1.check_order(order)?;
    sample2.check_order(order)?;
    let domain = domain_for(sample1, sample2, order);
    run_indexed(cfg.replicates, cfg.parallelism, |b| {
        let r1 = resampler.resample(sample1, b, 0);
        let r2 = resampler.resample(sample2, b, 1);
        let SignedAbsIntegrals { signed, absolute } = index_on(&r1, &r2, order, domain)?;
        let m = mvr_from_parts(signed, absolute, Direction::FirstDominated);
        Ok(Case1Replicate {
            signed,
            abs: absolute,
            epsilon0: m.epsilon0,
            degenerate: m.degenerate,
        })
    })
}

pub fn case1_replicates(
    sample1: &Sample,
    sample2: &Sample,
    order: OrderKind,
    cfg: &BootstrapConfig,
) -> Result<Vec<Case1Replicate>> {
    case1_replicates_with(sample1, sample2, order, cfg, &SeededResampler { seed: cfg.seed })
}

pub fn mvr_distribution(replicates: &[Case1Replicate]) -> BootstrapDistribution {
    BootstrapDistribution {
        values: replicates.iter().map(|r| r.epsilon0).collect(),
        degenerate_count: replicates.iter().filter(|r| r.degenerate).count(),
        statistic_kind: StatisticKind::Mvr,
    }
}

/// Bootstrap distribution of the MVR for the hypothesis `sample1 ⪯ sample2`.
/// Degenerate replicates contribute 0.5 and are counted.
pub fn case1_mvr_distribution(
    sample1: &Sample,
    sample2: &Sample,
    order: OrderKind,
    cfg: &BootstrapConfig,
) -> Result<BootstrapDistribution> {
    Ok(mvr_distribution(&case1_replicates(sample1, sample2, order, cfg)?))
}

/// Case 2 bootstrap for `sample1 ⪯ sample2`, kept in a form that yields the
/// derivative distribution for any `ε` without resampling again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case2Bootstrap {
    /// Per replicate: `∫h`, `∫_{contact}|h|`, `∫_{off} h·sgn θ̂` for
    /// `h = rₙ(θ̂* - θ̂)`.
    pub parts: Vec<ContactSplit>,
    pub rate: RateAndBandwidth,
    /// Integrals of `θ̂ = ŝ₁ - ŝ₂`.
    pub theta: SignedAbsIntegrals,
    pub domain: Interval,
}

impl Case2Bootstrap {
    /// Distribution of `φ̂'ₙ(rₙ(θ̂* - θ̂))` at `epsilon`.
    pub fn distribution(&self, epsilon: f64) -> Result<BootstrapDistribution> {
        validate_epsilon(epsilon)?;
        let w = 1.0 - 2.0 * epsilon;
        Ok(BootstrapDistribution {
            values: self
                .parts
                .iter()
                .map(|p| p.total - w * (p.abs_on_contact + p.signed_off_contact))
                .collect(),
            degenerate_count: 0,
            statistic_kind: StatisticKind::Derivative,
        })
    }

    /// Test statistic `rₙ·φ(θ̂; ε)`.
    pub fn statistic(&self, epsilon: f64) -> Result<f64> {
        validate_epsilon(epsilon)?;
        Ok(self.rate.r_n * phi_unchecked(self.theta.signed, self.theta.absolute, epsilon))
    }
}

pub fn case2_bootstrap_with(
    sample1: &Sample,
    sample2: &Sample,
    order: OrderKind,
    cfg: &BootstrapConfig,
    resampler: &dyn Resampler,
) -> Result<Case2Bootstrap> {
    cfg.validate()?;
    let rate = RateAndBandwidth::new(sample1.len(), sample2.len(), cfg.case2_c)?;
    if !(rate.a_n > 0.0) {
        return Err(Error::InvalidEnlargement(rate.a_n));
    }
    let domain = domain_for(sample1, sample2, order);
    let theta: PiecewiseFunction = target_function(sample1, order)?.sub(&target_function(sample2, order)?)?;
    let theta_integrals = theta.integrate(domain)?;
    let parts = run_indexed(cfg.replicates, cfg.parallelism, |b| {
        let r1 = resampler.resample(sample1, b, 0);
        let r2 = resampler.resample(sample2, b, 1);
        let theta_star = target_function(&r1, order)?.sub(&target_function(&r2, order)?)?;
        let h = theta_star.sub(&theta)?.scale(rate.r_n);
        contact_split(&h, &theta, rate.a_n, domain)
    })?;
    Ok(Case2Bootstrap {
        parts,
        rate,
        theta: theta_integrals,
        domain,
    })
}

pub fn case2_bootstrap(
    sample1: &Sample,
    sample2: &Sample,
    order: OrderKind,
    cfg: &BootstrapConfig,
) -> Result<Case2Bootstrap> {
    case2_bootstrap_with(sample1, sample2, order, cfg, &SeededResampler { seed: cfg.seed })
}

/// Bootstrap distribution of the estimated derivative `φ̂'ₙ(rₙ(θ̂* - θ̂))` at
/// `epsilon`, for the hypothesis `sample1 ⪯ sample2`.
pub fn case2_derivative_distribution(
    sample1: &Sample,
    sample2: &Sample,
    order: OrderKind,
    epsilon: f64,
    cfg: &BootstrapConfig,
) -> Result<BootstrapDistribution> {
    validate_epsilon(epsilon)?;
    case2_bootstrap(sample1, sample2, order, cfg)?.distribution(epsilon)
}
