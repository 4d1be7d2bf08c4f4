//! Simulation scenarios, population MVR oracles and the Monte Carlo power
//! harness.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{
    case1_replicates, case2_bootstrap, mvr_distribution, run_indexed, stream_rng, BootstrapConfig, Parallelism,
};
use crate::distribution::{norm_cdf, norm_quantile, sample_from, CompositePiece, DistributionSpec};
use crate::dominance::{index, mvr, validate_epsilon, Direction, OrderKind};
use crate::empirical::Sample;
use crate::error::{Error, Result};
use crate::quadrature::{brent, integrate, QuadOptions};
use crate::testing::{case1_decision, case2_decision, Method, Variant};

/// Tail probability beyond which unbounded supports are truncated.
pub const TAIL_PROBABILITY: f64 = 1e-10;

const GRID_POINTS: usize = 400;

/// Population 2 of the Scenario 4 substitute. Its CDF equals the
/// `LN(1, 1)` CDF on `[0, 1]`, is a steeper rescaling of it on `(1, e]`
/// reaching 0.6, and beyond `e` follows `3·LN(1, 1.1)` conditioned on
/// exceeding `e`, carrying the remaining mass 0.4.
pub fn scenario4_substitute_pop2() -> DistributionSpec {
    let base = DistributionSpec::lognormal(1.0, 1.0);
    let w0 = base.cdf(1.0);
    DistributionSpec::Composite {
        pieces: vec![
            CompositePiece {
                upper: Some(1.0),
                weight: w0,
                dist: base.clone(),
            },
            CompositePiece {
                upper: Some(std::f64::consts::E),
                weight: 0.6 - w0,
                dist: base,
            },
            CompositePiece {
                upper: None,
                weight: 0.4,
                dist: DistributionSpec::lognormal(1.0 + 3.0f64.ln(), 1.1),
            },
        ],
    }
}

/// Interval on which the two Scenario 4 substitute CDFs coincide.
pub const SCENARIO4_CONTACT_INTERVAL: (f64, f64) = (0.0, 1.0);

/// Oracle MVR of the Scenario 4 substitute, pinned as a regression constant.
pub const SCENARIO4_SUBSTITUTE_MVR: f64 = 0.040_420_221_480;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: String,
    pub pop1: DistributionSpec,
    pub pop2: DistributionSpec,
    pub order: OrderKind,
    /// Hypothesized dominated population.
    pub direction: Direction,
    /// Published reference MVR, when there is one for this exact model.
    #[serde(default)]
    pub published_mvr: Option<f64>,
}

impl ScenarioSpec {
    pub const BUILTIN_IDS: [&'static str; 4] = ["1", "2", "3", "4sub"];

    pub fn builtin(id: &str) -> Result<Self> {
        let s = |pop1, pop2, order, direction, published_mvr| ScenarioSpec {
            id: id.to_string(),
            pop1,
            pop2,
            order,
            direction,
            published_mvr,
        };
        Ok(match id {
            "1" => s(
                DistributionSpec::lognormal(2.0, 1.0),
                DistributionSpec::lognormal(1.0, 1.5),
                OrderKind::First,
                Direction::SecondDominated,
                Some(0.127290),
            ),
            "2" => s(
                DistributionSpec::lognormal(1.0, 1.0),
                DistributionSpec::lognormal(1.0, 1.5),
                OrderKind::First,
                Direction::FirstDominated,
                Some(0.036160),
            ),
            "3" => s(
                DistributionSpec::gb2_unit_mean(2.0, 0.8, 1.5)?,
                DistributionSpec::gb2_unit_mean(9.0, 0.1, 7.0)?,
                OrderKind::Lorenz,
                Direction::SecondDominated,
                Some(0.063151),
            ),
            "4sub" | "4" => s(
                DistributionSpec::lognormal(1.0, 1.0),
                scenario4_substitute_pop2(),
                OrderKind::First,
                Direction::FirstDominated,
                None,
            ),
            other => return Err(Error::InvalidParameter(format!("unknown scenario '{other}'"))),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.pop1.validate()?;
        self.pop2.validate()
    }

    /// `(dominated, dominating)` populations.
    pub fn arranged(&self) -> (&DistributionSpec, &DistributionSpec) {
        self.direction.arrange(&self.pop1, &self.pop2)
    }

    /// Population MVR in the declared direction.
    pub fn oracle(&self) -> Result<OracleResult> {
        let (lo, hi) = self.arranged();
        oracle_index(lo, hi, self.order)
    }

    /// One sample pair of size `n` for Monte Carlo run `run`.
    pub fn draw_pair(&self, n: usize, seed: u64, run: u64) -> Result<(Sample, Sample)> {
        let mut r1 = stream_rng(seed, MONTE_CARLO_DOMAIN, run, 0);
        let mut r2 = stream_rng(seed, MONTE_CARLO_DOMAIN, run, 1);
        Ok((sample_from(&self.pop1, n, &mut r1)?, sample_from(&self.pop2, n, &mut r2)?))
    }
}

pub const MONTE_CARLO_DOMAIN: u64 = 0x3C;
const RUN_SEED_DOMAIN: u64 = 0x5EED;

/// Population index and MVR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub signed: f64,
    pub abs: f64,
    pub epsilon0: f64,
    pub order: OrderKind,
    /// Integration range; for the first order the tails beyond it are added
    /// in closed form.
    pub domain: (f64, f64),
    pub crossings: Vec<f64>,
    /// Bound on the error of `abs` from assuming the sign of `s₁ - s₂`
    /// does not change beyond the truncation points. `None` when the tails
    /// are dropped (second and stop-loss orders).
    pub truncation_bound: Option<f64>,
}

fn target(spec: &DistributionSpec, order: OrderKind, t: f64) -> f64 {
    match order {
        OrderKind::First => spec.cdf(t),
        OrderKind::Second => spec.integrated_cdf(t),
        OrderKind::StopLoss => spec.integrated_sf(t),
        OrderKind::Lorenz => spec.lorenz(t),
    }
}

fn kinks(spec: &DistributionSpec, out: &mut Vec<f64>, lorenz: bool) {
    if let DistributionSpec::Composite { pieces } = spec {
        for p in pieces {
            if let Some(u) = p.upper {
                out.push(if lorenz { spec.cdf(u) } else { u });
            }
            kinks(&p.dist, out, lorenz);
        }
    }
}

/// Population 2DSD index of `(spec1, spec2)` by adaptive quadrature between
/// the crossings of the target functions.
pub fn oracle_index(spec1: &DistributionSpec, spec2: &DistributionSpec, order: OrderKind) -> Result<OracleResult> {
    spec1.validate()?;
    spec2.validate()?;
    let lorenz = order == OrderKind::Lorenz;
    if lorenz {
        for s in [spec1, spec2] {
            if s.support().0 < 0.0 || !(s.mean() > 0.0) {
                return Err(Error::Precondition {
                    order: "lorenz",
                    reason: "needs a nonnegative variable with positive mean".into(),
                });
            }
        }
    } else if order != OrderKind::First {
        for s in [spec1, spec2] {
            if s.support().0 < 0.0 {
                return Err(Error::Precondition {
                    order: order.name(),
                    reason: "needs a nonnegative variable".into(),
                });
            }
        }
    }

    let z_max = norm_quantile(1.0 - TAIL_PROBABILITY);
    let levels: Vec<f64> = (0..=GRID_POINTS)
        .map(|k| norm_cdf(-z_max + 2.0 * z_max * k as f64 / GRID_POINTS as f64))
        .collect();
    let (lo, hi) = if lorenz {
        (0.0, 1.0)
    } else {
        let lo = spec1.quantile(TAIL_PROBABILITY).min(spec2.quantile(TAIL_PROBABILITY));
        let hi = spec1.quantile(1.0 - TAIL_PROBABILITY).max(spec2.quantile(1.0 - TAIL_PROBABILITY));
        (lo, hi)
    };
    let mut grid = vec![lo, hi];
    for s in [spec1, spec2] {
        if lorenz {
            grid.extend(levels.iter().copied());
        } else {
            grid.extend(levels.iter().map(|&u| s.quantile(u)));
        }
        kinks(s, &mut grid, lorenz);
    }
    grid.retain(|&x| x >= lo && x <= hi && x.is_finite());
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let d = |t: f64| {
        if order == OrderKind::First && spec1.cdf(t) > 0.5 {
            spec2.sf(t) - spec1.sf(t)
        } else {
            target(spec1, order, t) - target(spec2, order, t)
        }
    };
    // floor the absolute tolerance at the rounding noise of the integrand
    let opts = |width: f64| QuadOptions {
        abs_tol: 1e-13 * width,
        rel_tol: 1e-12,
        max_intervals: 5_000,
    };
    let mut crossings = Vec::new();
    let mut signed = 0.0;
    let mut abs = 0.0;
    let mut prev_val = d(grid[0]);
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let vb = d(b);
        let mut cuts = vec![a];
        if prev_val * vb < 0.0 {
            let root = brent(d, a, b, 1e-12 * a.abs().max(b.abs()).max(1.0))?;
            if root > a && root < b {
                crossings.push(root);
                cuts.push(root);
            }
        }
        cuts.push(b);
        for c in cuts.windows(2) {
            let v = integrate(d, c[0], c[1], opts(c[1] - c[0]))?.value;
            signed += v;
            abs += v.abs();
        }
        prev_val = vb;
    }

    let mut truncation_bound = if lorenz { Some(0.0) } else { None };
    if order == OrderKind::First {
        // ∫ beyond the truncation points in closed form
        let upper = spec2.integrated_sf(hi) - spec1.integrated_sf(hi);
        let lower = spec1.integrated_cdf(lo) - spec2.integrated_cdf(lo);
        signed += upper + lower;
        abs += upper.abs() + lower.abs();
        truncation_bound = Some(
            spec1.integrated_sf(hi) + spec2.integrated_sf(hi) + spec1.integrated_cdf(lo) + spec2.integrated_cdf(lo),
        );
    }
    if !(abs > 1e-14) {
        return Err(Error::Degenerate);
    }
    Ok(OracleResult {
        signed,
        abs,
        epsilon0: 0.5 * (1.0 - signed / abs),
        order,
        domain: (lo, hi),
        crossings,
        truncation_bound,
    })
}

/// Population MVR for the hypothesis that `spec1` is dominated by `spec2`.
pub fn oracle_mvr(spec1: &DistributionSpec, spec2: &DistributionSpec, order: OrderKind) -> Result<f64> {
    Ok(oracle_index(spec1, spec2, order)?.epsilon0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurveConfig {
    /// Size of each simulated sample.
    pub n: usize,
    /// Monte Carlo runs `N`.
    pub runs: usize,
    /// Bootstrap replicates `B` per run.
    pub replicates: usize,
    pub alpha: f64,
    pub epsilon_grid: Vec<f64>,
    pub method: Method,
    /// Contact-set constant; used by Case 2 only.
    pub c: f64,
    pub seed: u64,
    pub parallelism: Parallelism,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurveResult {
    pub scenario: String,
    pub order: OrderKind,
    pub direction: Direction,
    pub method: Method,
    pub epsilon_grid: Vec<f64>,
    pub rejection_rate: Vec<f64>,
    pub rejections: Vec<usize>,
    pub n: usize,
    pub runs: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub c: Option<f64>,
    pub seed: u64,
    /// Median over runs of the MVR point estimate.
    pub median_epsilon_hat0: f64,
}

/// Seed of the bootstrap inside Monte Carlo run `run`.
pub fn run_seed(seed: u64, run: u64) -> u64 {
    stream_rng(seed, RUN_SEED_DOMAIN, run, 0).random()
}

/// Rejection rate of test (a) along `epsilon_grid`. Each run draws a fresh
/// pair, bootstraps once and applies the decision rule at every grid point.
pub fn power_curve(scenario: &ScenarioSpec, cfg: &PowerCurveConfig) -> Result<PowerCurveResult> {
    scenario.validate()?;
    if cfg.runs == 0 || cfg.n == 0 || cfg.epsilon_grid.is_empty() {
        return Err(Error::InvalidParameter("runs, n and the epsilon grid must be nonempty".into()));
    }
    for &e in &cfg.epsilon_grid {
        match cfg.method {
            Method::Case1 if !(0.0..=1.0).contains(&e) => return Err(Error::InvalidEpsilon(e)),
            Method::Case2 => validate_epsilon(e)?,
            _ => {}
        }
    }
    let boot_cfg = |run: u64| {
        BootstrapConfig::new(cfg.replicates, run_seed(cfg.seed, run))
            .with_c(cfg.c)
            .with_parallelism(Parallelism::Workers(1))
    };
    boot_cfg(0).validate()?;
    let per_run = run_indexed(cfg.runs, cfg.parallelism, |run| {
        let (x1, x2) = scenario.draw_pair(cfg.n, cfg.seed, run)?;
        let (lo, hi) = scenario.direction.arrange(&x1, &x2);
        let eps_hat = mvr(&index(lo, hi, scenario.order)?).epsilon0;
        let decisions = match cfg.method {
            Method::Case1 => {
                let dist = mvr_distribution(&case1_replicates(lo, hi, scenario.order, &boot_cfg(run))?);
                cfg.epsilon_grid
                    .iter()
                    .map(|&e| case1_decision(&dist, Variant::A, e, cfg.alpha))
                    .collect::<Result<Vec<_>>>()?
            }
            Method::Case2 => {
                let boot = case2_bootstrap(lo, hi, scenario.order, &boot_cfg(run))?;
                cfg.epsilon_grid
                    .iter()
                    .map(|&e| case2_decision(&boot, e, cfg.alpha).map(|d| d.0))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok((eps_hat, decisions))
    })?;
    let rejections: Vec<usize> = (0..cfg.epsilon_grid.len())
        .map(|k| per_run.iter().filter(|(_, d)| d[k]).count())
        .collect();
    let mut estimates: Vec<f64> = per_run.iter().map(|(e, _)| *e).collect();
    Ok(PowerCurveResult {
        scenario: scenario.id.clone(),
        order: scenario.order,
        direction: scenario.direction,
        method: cfg.method,
        epsilon_grid: cfg.epsilon_grid.clone(),
        rejection_rate: rejections.iter().map(|&r| r as f64 / cfg.runs as f64).collect(),
        rejections,
        n: cfg.n,
        runs: cfg.runs,
        replicates: cfg.replicates,
        alpha: cfg.alpha,
        c: (cfg.method == Method::Case2).then_some(cfg.c),
        seed: cfg.seed,
        median_epsilon_hat0: median(&mut estimates),
    })
}

/// MVR point estimates on `runs` simulated pairs of size `n`.
pub fn mvr_estimates(
    scenario: &ScenarioSpec,
    n: usize,
    runs: usize,
    seed: u64,
    parallelism: Parallelism,
) -> Result<Vec<f64>> {
    scenario.validate()?;
    run_indexed(runs, parallelism, |run| {
        let (x1, x2) = scenario.draw_pair(n, seed, run)?;
        let (lo, hi) = scenario.direction.arrange(&x1, &x2);
        Ok(mvr(&index(lo, hi, scenario.order)?).epsilon0)
    })
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario4_substitute_contact_interval() {
        let pop1 = DistributionSpec::lognormal(1.0, 1.0);
        let pop2 = scenario4_substitute_pop2();
        pop2.validate().unwrap();
        for k in 1..=100 {
            let x = k as f64 / 100.0;
            assert!((pop1.cdf(x) - pop2.cdf(x)).abs() < 1e-15, "{x}");
        }
        assert!((pop2.cdf(std::f64::consts::E) - 0.6).abs() < 1e-15);
        assert!(pop2.cdf(1.5) > pop1.cdf(1.5));
    }

    #[test]
    fn oracle_reversal_and_degenerate() {
        let a = DistributionSpec::lognormal(1.0, 1.0);
        let b = DistributionSpec::lognormal(1.0, 1.5);
        let f = oracle_mvr(&a, &b, OrderKind::First).unwrap();
        let r = oracle_mvr(&b, &a, OrderKind::First).unwrap();
        assert!((f + r - 1.0).abs() < 1e-12);
        assert_eq!(oracle_index(&a, &a, OrderKind::First).unwrap_err(), Error::Degenerate);
    }

    #[test]
    fn first_order_signed_is_mean_difference() {
        let a = DistributionSpec::lognormal(2.0, 1.0);
        let b = DistributionSpec::lognormal(1.0, 1.5);
        let o = oracle_index(&a, &b, OrderKind::First).unwrap();
        assert!((o.signed - (b.mean() - a.mean())).abs() < 1e-8, "{}", o.signed - (b.mean() - a.mean()));
        assert_eq!(o.crossings.len(), 1);
    }

    #[test]
    fn power_curve_trivial_upper_grid() {
        let sc = ScenarioSpec::builtin("2").unwrap();
        let cfg = PowerCurveConfig {
            n: 200,
            runs: 4,
            replicates: 50,
            alpha: 0.05,
            epsilon_grid: vec![0.9, 1.0],
            method: Method::Case1,
            c: 0.01,
            seed: 1,
            parallelism: Parallelism::Auto,
        };
        let r = power_curve(&sc, &cfg).unwrap();
        assert_eq!(r.rejection_rate, vec![1.0, 1.0]);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
