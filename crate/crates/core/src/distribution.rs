//! Parametric income distributions with closed-form CDFs, quantiles and
//! partial moments.

use rand::Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, inv_beta_reg, ln_beta};
use statrs::function::erf::{erfc, erfc_inv};

use crate::empirical::Sample;
use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal survival function.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn norm_quantile(u: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * u)
}

/// `Φ(b) - Φ(a)` without cancellation in either tail.
fn norm_mass(a: f64, b: f64) -> f64 {
    if a >= b {
        0.0
    } else if a > 0.0 {
        norm_sf(a) - norm_sf(b)
    } else {
        norm_cdf(b) - norm_cdf(a)
    }
}

/// `I_z(p, q)` given both `z` and `1 - z`, using the complementary form
/// where it is more accurate.
fn beta_cdf(z: f64, zc: f64, p: f64, q: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if zc <= 0.0 {
        1.0
    } else if z <= 0.5 {
        beta_reg(p, q, z)
    } else {
        1.0 - beta_reg(q, p, zc)
    }
}

fn beta_sf(z: f64, zc: f64, p: f64, q: f64) -> f64 {
    if z <= 0.0 {
        1.0
    } else if zc <= 0.0 {
        0.0
    } else if z <= 0.5 {
        1.0 - beta_reg(p, q, z)
    } else {
        beta_reg(q, p, zc)
    }
}

/// Inverse of `z ↦ I_z(p, q)`, polished by safeguarded Newton steps.
fn inv_beta(p: f64, q: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let lnb = ln_beta(p, q);
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut z = inv_beta_reg(p, q, u);
    if !(z > 0.0 && z < 1.0) {
        z = 0.5;
    }
    for _ in 0..200 {
        let f = beta_reg(p, q, z) - u;
        if f == 0.0 {
            return z;
        }
        if f > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let dens = ((p - 1.0) * z.ln() + (q - 1.0) * (-z).ln_1p() - lnb).exp();
        let mut next = z - f / dens;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if lo > 0.0 && hi / lo > 4.0 {
                (lo * hi).sqrt()
            } else if lo == 0.0 {
                hi * 1e-3
            } else {
                0.5 * (lo + hi)
            };
        }
        if (next - z).abs() <= 4.0 * f64::EPSILON * z {
            return next;
        }
        z = next;
    }
    z
}

/// One component of a composite distribution: on `(previous upper, upper]`
/// it carries probability `weight` and follows `dist` conditioned on that
/// interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositePiece {
    /// Right end of the piece; `None` for `+∞`.
    pub upper: Option<f64>,
    pub weight: f64,
    pub dist: DistributionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DistributionSpec {
    LogNormal { mu: f64, sigma: f64 },
    Normal { mu: f64, sigma: f64 },
    /// Generalized beta of the second kind with shapes `a, p, q` and scale `b`.
    Gb2 { a: f64, b: f64, p: f64, q: f64 },
    Composite { pieces: Vec<CompositePiece> },
}

impl DistributionSpec {
    pub fn lognormal(mu: f64, sigma: f64) -> Self {
        DistributionSpec::LogNormal { mu, sigma }
    }

    pub fn normal(mu: f64, sigma: f64) -> Self {
        DistributionSpec::Normal { mu, sigma }
    }

    pub fn gb2(a: f64, b: f64, p: f64, q: f64) -> Self {
        DistributionSpec::Gb2 { a, b, p, q }
    }

    /// GB2 with the scale chosen so that the mean is one.
    pub fn gb2_unit_mean(a: f64, p: f64, q: f64) -> Result<Self> {
        Ok(DistributionSpec::Gb2 {
            a,
            b: gb2_unit_mean_scale(a, p, q)?,
            p,
            q,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            DistributionSpec::LogNormal { mu, sigma } | DistributionSpec::Normal { mu, sigma } => {
                if !mu.is_finite() || !(*sigma > 0.0 && sigma.is_finite()) {
                    return bad(format!("need finite mu and sigma > 0, got ({mu}, {sigma})"));
                }
            }
            DistributionSpec::Gb2 { a, b, p, q } => {
                if ![a, b, p, q].iter().all(|v| **v > 0.0 && v.is_finite()) {
                    return bad(format!("gb2 parameters must be positive, got a={a} b={b} p={p} q={q}"));
                }
                if *q <= 1.0 / a {
                    return bad(format!("gb2 has infinite mean (q={q} <= 1/a={})", 1.0 / a));
                }
            }
            DistributionSpec::Composite { pieces } => {
                if pieces.is_empty() {
                    return bad("composite needs at least one piece".into());
                }
                let mut total = 0.0;
                let mut prev = f64::NEG_INFINITY;
                for (k, piece) in pieces.iter().enumerate() {
                    piece.dist.validate()?;
                    if !(piece.weight > 0.0 && piece.weight.is_finite()) {
                        return bad(format!("piece {k} has weight {}", piece.weight));
                    }
                    let upper = piece.upper.unwrap_or(f64::INFINITY);
                    let is_last = k + 1 == pieces.len();
                    if upper <= prev || (upper.is_infinite() != is_last) || upper.is_nan() {
                        return bad(format!("piece {k} has upper bound {upper} after {prev}"));
                    }
                    let lo = prev.max(piece.dist.support().0);
                    if piece.dist.cdf(upper) - piece.dist.cdf(lo) <= 0.0 {
                        return bad(format!("piece {k} has no mass under its distribution"));
                    }
                    total += piece.weight;
                    prev = upper;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("composite weights sum to {total}"));
                }
            }
        }
        Ok(())
    }

    /// Closed support `(lower, upper)` of the distribution, possibly infinite.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DistributionSpec::LogNormal { .. } | DistributionSpec::Gb2 { .. } => (0.0, f64::INFINITY),
            DistributionSpec::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            DistributionSpec::Composite { pieces } => {
                let lo = pieces[0].dist.support().0;
                let hi = pieces.last().unwrap().dist.support().1;
                (lo, hi)
            }
        }
    }

    /// Bounds of composite piece `k` intersected with its distribution's
    /// support.
    fn piece_bounds(pieces: &[CompositePiece], k: usize) -> (f64, f64) {
        let lo = if k == 0 {
            f64::NEG_INFINITY
        } else {
            pieces[k - 1].upper.unwrap()
        };
        let hi = pieces[k].upper.unwrap_or(f64::INFINITY);
        let (s_lo, s_hi) = pieces[k].dist.support();
        (lo.max(s_lo), hi.min(s_hi))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    norm_cdf((x.ln() - mu) / sigma)
                }
            }
            DistributionSpec::Normal { mu, sigma } => norm_cdf((x - mu) / sigma),
            DistributionSpec::Gb2 { a, b, p, q } => {
                let (z, zc) = gb2_z(x, a, b);
                beta_cdf(z, zc, p, q)
            }
            DistributionSpec::Composite { ref pieces } => {
                let mut acc = 0.0;
                for (k, piece) in pieces.iter().enumerate() {
                    let (lo, hi) = Self::piece_bounds(pieces, k);
                    if x >= hi {
                        acc += piece.weight;
                        continue;
                    }
                    if x > lo {
                        let d = &piece.dist;
                        acc += piece.weight * (d.cdf(x) - d.cdf(lo)) / (d.cdf(hi) - d.cdf(lo));
                    }
                    break;
                }
                acc.min(1.0)
            }
        }
    }

    /// `P(X > x)`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    norm_sf((x.ln() - mu) / sigma)
                }
            }
            DistributionSpec::Normal { mu, sigma } => norm_sf((x - mu) / sigma),
            DistributionSpec::Gb2 { a, b, p, q } => {
                let (z, zc) = gb2_z(x, a, b);
                beta_sf(z, zc, p, q)
            }
            DistributionSpec::Composite { ref pieces } => {
                let mut acc = 0.0;
                for (k, piece) in pieces.iter().enumerate().rev() {
                    let (lo, hi) = Self::piece_bounds(pieces, k);
                    if x <= lo {
                        acc += piece.weight;
                        continue;
                    }
                    if x < hi {
                        let d = &piece.dist;
                        acc += piece.weight * (d.sf(x) - d.sf(hi)) / (d.sf(lo) - d.sf(hi));
                    }
                    break;
                }
                acc.min(1.0)
            }
        }
    }

    /// Quantile function for `u ∈ [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let (s_lo, s_hi) = self.support();
        if u <= 0.0 {
            return s_lo;
        }
        if u >= 1.0 {
            return s_hi;
        }
        match *self {
            DistributionSpec::LogNormal { mu, sigma } => (mu + sigma * norm_quantile(u)).exp(),
            DistributionSpec::Normal { mu, sigma } => mu + sigma * norm_quantile(u),
            DistributionSpec::Gb2 { a, b, p, q } => {
                let y = if u <= 0.5 {
                    let z = inv_beta(p, q, u);
                    z / (1.0 - z)
                } else {
                    let w = inv_beta(q, p, 1.0 - u);
                    (1.0 - w) / w
                };
                b * y.powf(1.0 / a)
            }
            DistributionSpec::Composite { ref pieces } => {
                let mut acc = 0.0;
                let last = pieces.len() - 1;
                for (k, piece) in pieces.iter().enumerate() {
                    if u <= acc + piece.weight || k == last {
                        let frac = ((u - acc) / piece.weight).clamp(0.0, 1.0);
                        return Self::piece_quantile(pieces, k, frac);
                    }
                    acc += piece.weight;
                }
                unreachable!()
            }
        }
    }

    fn piece_quantile(pieces: &[CompositePiece], k: usize, frac: f64) -> f64 {
        let (lo, hi) = Self::piece_bounds(pieces, k);
        let d = &pieces[k].dist;
        let (f_lo, f_hi) = (d.cdf(lo), d.cdf(hi));
        let x = if f_lo > 0.5 {
            // invert through the survival function to keep tail precision
            let (s_lo, s_hi) = (d.sf(lo), d.sf(hi));
            d.quantile(1.0 - (s_lo - frac * (s_lo - s_hi)))
        } else {
            d.quantile(f_lo + frac * (f_hi - f_lo))
        };
        x.clamp(lo, hi)
    }

    /// Partial first moment `E[X·1{lo < X <= hi}]`; either end may be
    /// infinite.
    pub fn partial_mean(&self, lo: f64, hi: f64) -> f64 {
        if lo >= hi {
            return 0.0;
        }
        match *self {
            DistributionSpec::LogNormal { mu, sigma } => {
                let m = (mu + 0.5 * sigma * sigma).exp();
                let z = |x: f64| {
                    if x <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        (x.ln() - mu - sigma * sigma) / sigma
                    }
                };
                m * norm_mass(z(lo), z(hi))
            }
            DistributionSpec::Normal { mu, sigma } => {
                let (a, b) = ((lo - mu) / sigma, (hi - mu) / sigma);
                let pdf = |t: f64| if t.is_finite() { norm_pdf(t) } else { 0.0 };
                mu * norm_mass(a, b) - sigma * (pdf(b) - pdf(a))
            }
            DistributionSpec::Gb2 { a, b, p, q } => {
                let (p1, q1) = (p + 1.0 / a, q - 1.0 / a);
                let m = b * (ln_beta(p1, q1) - ln_beta(p, q)).exp();
                let (zl, zlc) = gb2_z(lo, a, b);
                let (zh, zhc) = gb2_z(hi, a, b);
                let mass = if zl > 0.5 {
                    beta_sf(zl, zlc, p1, q1) - beta_sf(zh, zhc, p1, q1)
                } else {
                    beta_cdf(zh, zhc, p1, q1) - beta_cdf(zl, zlc, p1, q1)
                };
                m * mass
            }
            DistributionSpec::Composite { ref pieces } => {
                let mut acc = 0.0;
                for (k, piece) in pieces.iter().enumerate() {
                    let (plo, phi) = Self::piece_bounds(pieces, k);
                    let (a, b) = (lo.max(plo), hi.min(phi));
                    if a < b {
                        let d = &piece.dist;
                        let mass = if d.cdf(plo) > 0.5 {
                            d.sf(plo) - d.sf(phi)
                        } else {
                            d.cdf(phi) - d.cdf(plo)
                        };
                        acc += piece.weight * d.partial_mean(a, b) / mass;
                    }
                }
                acc
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            DistributionSpec::Normal { mu, .. } => mu,
            DistributionSpec::Gb2 { a, b, p, q } => b * (ln_beta(p + 1.0 / a, q - 1.0 / a) - ln_beta(p, q)).exp(),
            DistributionSpec::Composite { .. } => self.partial_mean(f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `∫_{-∞}^x F`.
    pub fn integrated_cdf(&self, x: f64) -> f64 {
        let lo = self.support().0;
        if x <= lo {
            return 0.0;
        }
        x * self.cdf(x) - self.partial_mean(f64::NEG_INFINITY, x)
    }

    /// `∫_x^∞ (1 - F)`.
    pub fn integrated_sf(&self, x: f64) -> f64 {
        self.partial_mean(x, f64::INFINITY) - x * self.sf(x)
    }

    /// Lorenz curve `ℓ(t) = (1/μ)∫₀ᵗ F⁻¹`.
    pub fn lorenz(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let x = self.quantile(t);
        let mean = self.mean();
        if t > 0.5 {
            1.0 - self.partial_mean(x, f64::INFINITY) / mean
        } else {
            self.partial_mean(f64::NEG_INFINITY, x) / mean
        }
    }

    /// One draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistributionSpec::LogNormal { mu, sigma } => LogNormal::new(mu, sigma).unwrap().sample(rng),
            DistributionSpec::Normal { mu, sigma } => Normal::new(mu, sigma).unwrap().sample(rng),
            DistributionSpec::Gb2 { a, b, p, q } => {
                let gp = Gamma::new(p, 1.0).unwrap().sample(rng);
                let gq = Gamma::new(q, 1.0).unwrap().sample(rng);
                b * (gp / gq).powf(1.0 / a)
            }
            DistributionSpec::Composite { ref pieces } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut k = pieces.len() - 1;
                for (j, piece) in pieces.iter().enumerate() {
                    acc += piece.weight;
                    if u < acc {
                        k = j;
                        break;
                    }
                }
                let frac: f64 = rng.random();
                Self::piece_quantile(pieces, k, frac)
            }
        }
    }
}

/// `z = y/(1+y)` and `1 - z = 1/(1+y)` for `y = (x/b)^a`.
fn gb2_z(x: f64, a: f64, b: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if x.is_infinite() {
        return (1.0, 0.0);
    }
    let y = (x / b).powf(a);
    if y.is_infinite() {
        return (1.0, 0.0);
    }
    (y / (1.0 + y), 1.0 / (1.0 + y))
}

/// Scale `b` giving a GB2 mean of one:
/// `B(p, q)/B(p + 1/a, q - 1/a)`.
pub fn gb2_unit_mean_scale(a: f64, p: f64, q: f64) -> Result<f64> {
    if ![a, p, q].iter().all(|v| *v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gb2 shapes must be positive, got a={a} p={p} q={q}"
        )));
    }
    if q <= 1.0 / a {
        return Err(Error::InvalidParameter(format!("gb2 has infinite mean (q={q} <= 1/a)")));
    }
    Ok((ln_beta(p, q) - ln_beta(p + 1.0 / a, q - 1.0 / a)).exp())
}

/// `n` independent draws.
pub fn sample_from<R: Rng + ?Sized>(spec: &DistributionSpec, n: usize, rng: &mut R) -> Result<Sample> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Sample::new((0..n).map(|_| spec.draw(rng)).collect())
}
