//! Exact step and piecewise-linear functions on a finite knot grid.
//!
//! Every empirical target function (ECDF, integrated CDF, integrated survival
//! function, Lorenz curve) is either a right-continuous step function or a
//! continuous piecewise-linear function whose knots are order statistics. The
//! index computations reduce to differences of such functions and their signed
//! and absolute integrals, which are computed here exactly (up to rounding).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Strictly increasing, finite knot sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakpointGrid {
    knots: Vec<f64>,
}

impl BreakpointGrid {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one knot".into()));
        }
        if let Some(bad) = knots.iter().find(|k| !k.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite knot {bad}")));
        }
        if let Some(w) = knots.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "knots must be strictly increasing ({} >= {})",
                w[0], w[1]
            )));
        }
        Ok(Self { knots })
    }

    pub(crate) fn from_sorted_unchecked(knots: Vec<f64>) -> Self {
        debug_assert!(knots.windows(2).all(|w| w[0] < w[1]));
        Self { knots }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Sorted union of two grids (linear merge, exact duplicates collapsed).
    pub fn union(&self, other: &BreakpointGrid) -> BreakpointGrid {
        if self.knots == other.knots {
            return self.clone();
        }
        let (a, b) = (&self.knots, &other.knots);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) => match x.partial_cmp(&y).unwrap() {
                    Ordering::Less => {
                        i += 1;
                        x
                    }
                    Ordering::Greater => {
                        j += 1;
                        y
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        x
                    }
                },
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            out.push(next);
        }
        BreakpointGrid { knots: out }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// One value per inter-knot interval, right-continuous.
    Step,
    /// One value per knot, linear interpolation in between.
    Linear,
}

/// Extension of a function outside its knot range.
///
/// Step functions take `Constant` tails. Linear functions take `Slope` tails,
/// an affine continuation from the boundary knot value, so that the function
/// stays continuous. `Unused` marks a side that must never be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Unused,
    Constant(f64),
    Slope(f64),
}

impl Tail {
    fn combine(self, other: Tail, op: impl Fn(f64, f64) -> f64) -> Tail {
        match (self, other) {
            (Tail::Constant(a), Tail::Constant(b)) => Tail::Constant(op(a, b)),
            (Tail::Slope(a), Tail::Slope(b)) => Tail::Slope(op(a, b)),
            _ => Tail::Unused,
        }
    }

    fn map(self, f: impl Fn(f64) -> f64) -> Tail {
        match self {
            Tail::Constant(a) => Tail::Constant(f(a)),
            Tail::Slope(a) => Tail::Slope(f(a)),
            Tail::Unused => Tail::Unused,
        }
    }

    fn is_finite(self) -> bool {
        match self {
            Tail::Constant(a) | Tail::Slope(a) => a.is_finite(),
            Tail::Unused => true,
        }
    }
}

/// Closed integration interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidDomain(format!("[{lo}, {hi}] is not finite")));
        }
        if lo > hi {
            return Err(Error::InvalidDomain(format!("[{lo}, {hi}] is reversed")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Signed and absolute integral of a function over a domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedAbsIntegrals {
    pub signed: f64,
    pub absolute: f64,
}

/// A linear (or constant) piece `[x0, x1]` with endpoint values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub x0: f64,
    pub x1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Segment {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    /// Value at `x` inside the segment.
    #[inline]
    pub fn at(&self, x: f64) -> f64 {
        if self.v0 == self.v1 {
            return self.v0;
        }
        if x <= self.x0 {
            return self.v0;
        }
        if x >= self.x1 {
            return self.v1;
        }
        let t = (x - self.x0) / (self.x1 - self.x0);
        self.v0 + (self.v1 - self.v0) * t
    }

    /// `(signed, absolute)` integral of the segment, splitting exactly at an
    /// interior sign change.
    #[inline]
    pub fn integrals(&self) -> (f64, f64) {
        let w = self.width();
        let (v0, v1) = (self.v0, self.v1);
        let signed = 0.5 * (v0 + v1) * w;
        let absolute = if (v0 < 0.0 && v1 > 0.0) || (v0 > 0.0 && v1 < 0.0) {
            let (a0, a1) = (v0.abs(), v1.abs());
            let w0 = w * a0 / (a0 + a1);
            0.5 * (a0 * w0 + a1 * (w - w0))
        } else {
            0.5 * (v0.abs() + v1.abs()) * w
        };
        (signed, absolute)
    }
}

/// Step or piecewise-linear function on a [`BreakpointGrid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseFunction {
    grid: BreakpointGrid,
    kind: Kind,
    values: Vec<f64>,
    left_tail: Tail,
    right_tail: Tail,
}

impl PiecewiseFunction {
    /// Right-continuous step function: `values[i]` holds on `[k_i, k_{i+1})`.
    pub fn step(knots: Vec<f64>, values: Vec<f64>, left_tail: Tail, right_tail: Tail) -> Result<Self> {
        Self::new(BreakpointGrid::new(knots)?, Kind::Step, values, left_tail, right_tail)
    }

    /// Continuous piecewise-linear function through `(knots[i], values[i])`.
    pub fn linear(knots: Vec<f64>, values: Vec<f64>, left_tail: Tail, right_tail: Tail) -> Result<Self> {
        Self::new(BreakpointGrid::new(knots)?, Kind::Linear, values, left_tail, right_tail)
    }

    pub fn new(
        grid: BreakpointGrid,
        kind: Kind,
        values: Vec<f64>,
        left_tail: Tail,
        right_tail: Tail,
    ) -> Result<Self> {
        let expected = match kind {
            Kind::Step => grid.len() - 1,
            Kind::Linear => grid.len(),
        };
        if values.len() != expected {
            return Err(Error::InvalidFunction(format!(
                "{kind:?} function on {} knots needs {expected} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) || !left_tail.is_finite() || !right_tail.is_finite() {
            return Err(Error::InvalidFunction("non-finite value".into()));
        }
        for tail in [left_tail, right_tail] {
            let ok = matches!(
                (kind, tail),
                (_, Tail::Unused) | (Kind::Step, Tail::Constant(_)) | (Kind::Linear, Tail::Slope(_))
            );
            if !ok {
                return Err(Error::InvalidFunction(format!(
                    "{tail:?} tail is not valid for a {kind:?} function"
                )));
            }
        }
        Ok(Self {
            grid,
            kind,
            values,
            left_tail,
            right_tail,
        })
    }

    pub(crate) fn new_unchecked(
        grid: BreakpointGrid,
        kind: Kind,
        values: Vec<f64>,
        left_tail: Tail,
        right_tail: Tail,
    ) -> Self {
        Self {
            grid,
            kind,
            values,
            left_tail,
            right_tail,
        }
    }

    /// The zero function of the given kind on a single knot.
    pub fn zero(kind: Kind, at: f64) -> Self {
        let (values, tail) = match kind {
            Kind::Step => (vec![], Tail::Constant(0.0)),
            Kind::Linear => (vec![0.0], Tail::Slope(0.0)),
        };
        Self::new_unchecked(BreakpointGrid { knots: vec![at] }, kind, values, tail, tail)
    }

    pub fn grid(&self) -> &BreakpointGrid {
        &self.grid
    }

    pub fn knots(&self) -> &[f64] {
        self.grid.knots()
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_tail(&self) -> Tail {
        self.left_tail
    }

    pub fn right_tail(&self) -> Tail {
        self.right_tail
    }

    /// Range on which the function is defined (infinite on tails in use).
    pub fn support(&self) -> (f64, f64) {
        let lo = if self.left_tail == Tail::Unused {
            self.grid.first()
        } else {
            f64::NEG_INFINITY
        };
        let hi = if self.right_tail == Tail::Unused {
            self.grid.last()
        } else {
            f64::INFINITY
        };
        (lo, hi)
    }

    /// Value at `x`; `NaN` inside an unused tail. Step functions return the
    /// right limit at a knot.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.grid.knots();
        // number of knots <= x
        let idx = k.partition_point(|&kn| kn <= x);
        self.eval_at_index(x, idx)
    }

    #[inline]
    fn eval_at_index(&self, x: f64, idx: usize) -> f64 {
        let k = self.grid.knots();
        let n = k.len();
        match self.kind {
            Kind::Step => {
                if idx == 0 {
                    tail_value(self.left_tail, 0.0, 0.0, x)
                } else if idx == n {
                    tail_value(self.right_tail, 0.0, 0.0, x)
                } else {
                    self.values[idx - 1]
                }
            }
            Kind::Linear => {
                if idx == 0 {
                    tail_value(self.left_tail, k[0], self.values[0], x)
                } else if idx == n {
                    if x == k[n - 1] {
                        self.values[n - 1]
                    } else {
                        tail_value(self.right_tail, k[n - 1], self.values[n - 1], x)
                    }
                } else {
                    let (x0, x1) = (k[idx - 1], k[idx]);
                    Segment {
                        x0,
                        x1,
                        v0: self.values[idx - 1],
                        v1: self.values[idx],
                    }
                    .at(x)
                }
            }
        }
    }

    /// Re-express the function on a finer grid containing its own knots'
    /// relevant range. Fails if a new knot falls in an unused tail.
    pub fn refine(&self, grid: &BreakpointGrid) -> Result<Self> {
        if grid == &self.grid {
            return Ok(self.clone());
        }
        let (lo, hi) = self.support();
        if grid.first() < lo || grid.last() > hi {
            return Err(Error::DomainExceedsRepresentation {
                lo: grid.first(),
                hi: grid.last(),
            });
        }
        let own = self.grid.knots();
        let mut idx = 0usize;
        let mut point_value = |x: f64| {
            while idx < own.len() && own[idx] <= x {
                idx += 1;
            }
            self.eval_at_index(x, idx)
        };
        let u = grid.knots();
        let values: Vec<f64> = match self.kind {
            Kind::Step => u[..u.len() - 1].iter().map(|&x| point_value(x)).collect(),
            Kind::Linear => u.iter().map(|&x| point_value(x)).collect(),
        };
        Ok(Self::new_unchecked(
            grid.clone(),
            self.kind,
            values,
            self.left_tail,
            self.right_tail,
        ))
    }

    /// Pieces covering `domain`, including tail pieces; zero-width pieces are
    /// dropped.
    pub fn segments(&self, domain: Interval) -> Result<Vec<Segment>> {
        let (lo, hi) = (domain.lo, domain.hi);
        let mut out = Vec::new();
        if lo == hi {
            return Ok(out);
        }
        let k = self.grid.knots();
        let n = k.len();
        let unused = || Error::DomainExceedsRepresentation { lo, hi };
        let (first, last) = (k[0], k[n - 1]);

        if lo < first {
            if self.left_tail == Tail::Unused {
                return Err(unused());
            }
            let x1 = hi.min(first);
            out.push(Segment {
                x0: lo,
                x1,
                v0: self.eval_at_index(lo, 0),
                v1: self.eval_at_index_left_limit(x1, 0),
            });
        }
        if hi > last && self.right_tail == Tail::Unused {
            return Err(unused());
        }

        // interior intervals [k_i, k_{i+1}] intersecting (lo, hi)
        let start = k.partition_point(|&kn| kn <= lo).saturating_sub(1);
        for i in start..n.saturating_sub(1) {
            let (a, b) = (k[i], k[i + 1]);
            if b <= lo {
                continue;
            }
            if a >= hi {
                break;
            }
            let x0 = a.max(lo);
            let x1 = b.min(hi);
            if x1 <= x0 {
                continue;
            }
            let seg = match self.kind {
                Kind::Step => Segment {
                    x0,
                    x1,
                    v0: self.values[i],
                    v1: self.values[i],
                },
                Kind::Linear => {
                    let full = Segment {
                        x0: a,
                        x1: b,
                        v0: self.values[i],
                        v1: self.values[i + 1],
                    };
                    Segment {
                        x0,
                        x1,
                        v0: if x0 == a { full.v0 } else { full.at(x0) },
                        v1: if x1 == b { full.v1 } else { full.at(x1) },
                    }
                }
            };
            out.push(seg);
        }

        if hi > last {
            let x0 = lo.max(last);
            out.push(Segment {
                x0,
                x1: hi,
                v0: self.eval_at_index(x0, n),
                v1: self.eval_at_index(hi, n),
            });
        }
        Ok(out)
    }

    // Left limit inside the left-tail region, used for the closing point of
    // the tail piece at the first knot.
    fn eval_at_index_left_limit(&self, x: f64, idx: usize) -> f64 {
        debug_assert_eq!(idx, 0);
        let k = self.grid.knots();
        match self.kind {
            Kind::Step => tail_value(self.left_tail, 0.0, 0.0, x),
            Kind::Linear => tail_value(self.left_tail, k[0], self.values[0], x),
        }
    }

    /// Signed and absolute integral over `domain`.
    pub fn integrate(&self, domain: Interval) -> Result<SignedAbsIntegrals> {
        let mut signed = CompensatedSum::new();
        let mut absolute = CompensatedSum::new();
        for seg in self.segments(domain)? {
            let (s, a) = seg.integrals();
            signed.add(s);
            absolute.add(a);
        }
        let signed = signed.value();
        let absolute = absolute.value().max(signed.abs());
        Ok(SignedAbsIntegrals { signed, absolute })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new_unchecked(
            self.grid.clone(),
            self.kind,
            self.values.iter().map(|v| v * c).collect(),
            self.left_tail.map(|t| t * c),
            self.right_tail.map(|t| t * c),
        )
    }

    pub fn negate(&self) -> Self {
        Self::new_unchecked(
            self.grid.clone(),
            self.kind,
            self.values.iter().map(|v| -v).collect(),
            self.left_tail.map(|t| -t),
            self.right_tail.map(|t| -t),
        )
    }

    fn combine(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let (f, g) = align(self, other)?;
        let values = f.values.iter().zip(&g.values).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self::new_unchecked(
            f.grid,
            f.kind,
            values,
            f.left_tail.combine(g.left_tail, &op),
            f.right_tail.combine(g.right_tail, &op),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }
}

#[inline]
fn tail_value(tail: Tail, edge_x: f64, edge_v: f64, x: f64) -> f64 {
    match tail {
        Tail::Constant(c) => c,
        Tail::Slope(m) => {
            if m == 0.0 {
                edge_v
            } else {
                edge_v + m * (x - edge_x)
            }
        }
        Tail::Unused => f64::NAN,
    }
}

/// Express `f` and `g` on the union of their grids.
pub fn align(f: &PiecewiseFunction, g: &PiecewiseFunction) -> Result<(PiecewiseFunction, PiecewiseFunction)> {
    if f.kind != g.kind {
        return Err(Error::KindMismatch);
    }
    let grid = f.grid.union(&g.grid);
    Ok((f.refine(&grid)?, g.refine(&grid)?))
}

/// Exact pointwise difference `f - g` on the union grid.
pub fn subtract(f: &PiecewiseFunction, g: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    f.sub(g)
}

/// Signed and absolute integral of `f` over `domain`.
pub fn integrate(f: &PiecewiseFunction, domain: Interval) -> Result<SignedAbsIntegrals> {
    f.integrate(domain)
}

/// The three pieces of the estimated directional derivative of the L1 norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactSplit {
    /// `∫ h` over the whole domain.
    pub total: f64,
    /// `∫ |h|` over `{|θ| <= a_n}`.
    pub abs_on_contact: f64,
    /// `∫ h·sgn(θ)` over `{|θ| > a_n}`.
    pub signed_off_contact: f64,
}

/// `(∫_{|θ|≤a_n} |h|, ∫_{|θ|>a_n} h·sgn(θ))` over `domain`.
pub fn restricted_integrals(
    h: &PiecewiseFunction,
    theta: &PiecewiseFunction,
    a_n: f64,
    domain: Interval,
) -> Result<(f64, f64)> {
    let split = contact_split(h, theta, a_n, domain)?;
    Ok((split.abs_on_contact, split.signed_off_contact))
}

/// Splits the domain into the estimated contact set `{|θ| <= a_n}` and its
/// complement and integrates `h` accordingly. Points with `|θ| = a_n` belong
/// to the contact set.
pub fn contact_split(
    h: &PiecewiseFunction,
    theta: &PiecewiseFunction,
    a_n: f64,
    domain: Interval,
) -> Result<ContactSplit> {
    if !(a_n > 0.0 && a_n.is_finite()) {
        return Err(Error::InvalidEnlargement(a_n));
    }
    let (h, theta) = align(h, theta)?;
    let hs = h.segments(domain)?;
    let ts = theta.segments(domain)?;
    debug_assert_eq!(hs.len(), ts.len());

    let mut total = CompensatedSum::new();
    let mut contact = CompensatedSum::new();
    let mut off = CompensatedSum::new();

    for (hseg, tseg) in hs.iter().zip(&ts) {
        debug_assert_eq!(hseg.x0, tseg.x0);
        total.add(hseg.integrals().0);

        let constant_theta = tseg.v0 == tseg.v1;
        if constant_theta {
            accumulate_piece(hseg, tseg.v0, a_n, &mut contact, &mut off);
            continue;
        }

        // split where θ crosses ±a_n strictly inside the segment
        let mut cuts = [0.0f64; 2];
        let mut ncut = 0;
        for level in [-a_n, a_n] {
            let (d0, d1) = (tseg.v0 - level, tseg.v1 - level);
            if (d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0) {
                let x = tseg.x0 + tseg.width() * (d0 / (d0 - d1));
                if x > tseg.x0 && x < tseg.x1 {
                    cuts[ncut] = x;
                    ncut += 1;
                }
            }
        }
        let cuts = &mut cuts[..ncut];
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut x0 = hseg.x0;
        let mut hv0 = hseg.v0;
        for &x1 in cuts.iter().chain(std::iter::once(&hseg.x1)) {
            if x1 <= x0 {
                continue;
            }
            let hv1 = if x1 == hseg.x1 { hseg.v1 } else { hseg.at(x1) };
            let piece = Segment {
                x0,
                x1,
                v0: hv0,
                v1: hv1,
            };
            let theta_mid = tseg.at(0.5 * (x0 + x1));
            accumulate_piece(&piece, theta_mid, a_n, &mut contact, &mut off);
            x0 = x1;
            hv0 = hv1;
        }
    }

    Ok(ContactSplit {
        total: total.value(),
        abs_on_contact: contact.value(),
        signed_off_contact: off.value(),
    })
}

#[inline]
fn accumulate_piece(
    h: &Segment,
    theta: f64,
    a_n: f64,
    contact: &mut CompensatedSum,
    off: &mut CompensatedSum,
) {
    let (signed, absolute) = h.integrals();
    if theta.abs() <= a_n {
        contact.add(absolute);
    } else if theta > 0.0 {
        off.add(signed);
    } else {
        off.add(-signed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ecdf_13() -> PiecewiseFunction {
        PiecewiseFunction::step(vec![1.0, 3.0], vec![0.5], Tail::Constant(0.0), Tail::Constant(1.0)).unwrap()
    }

    fn ecdf_24() -> PiecewiseFunction {
        PiecewiseFunction::step(vec![2.0, 4.0], vec![0.5], Tail::Constant(0.0), Tail::Constant(1.0)).unwrap()
    }

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn grid_rejects_bad_knots() {
        assert!(BreakpointGrid::new(vec![]).is_err());
        assert!(BreakpointGrid::new(vec![1.0, 1.0]).is_err());
        assert!(BreakpointGrid::new(vec![2.0, 1.0]).is_err());
        assert!(BreakpointGrid::new(vec![0.0, f64::NAN]).is_err());
        assert!(BreakpointGrid::new(vec![0.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn value_count_and_tail_validation() {
        assert!(PiecewiseFunction::step(vec![0.0, 1.0], vec![1.0, 2.0], Tail::Unused, Tail::Unused).is_err());
        assert!(PiecewiseFunction::linear(vec![0.0, 1.0], vec![1.0], Tail::Unused, Tail::Unused).is_err());
        assert!(PiecewiseFunction::linear(vec![0.0, 1.0], vec![1.0, 2.0], Tail::Constant(1.0), Tail::Unused).is_err());
        assert!(PiecewiseFunction::step(vec![0.0, 1.0], vec![1.0], Tail::Slope(0.0), Tail::Unused).is_err());
    }

    #[test]
    fn step_evaluation_is_right_continuous() {
        let f = ecdf_13();
        assert_eq!(f.eval(0.999), 0.0);
        assert_eq!(f.eval(1.0), 0.5);
        assert_eq!(f.eval(2.999), 0.5);
        assert_eq!(f.eval(3.0), 1.0);
        assert_eq!(f.eval(100.0), 1.0);
    }

    #[test]
    fn align_on_union_grid_preserves_values() {
        let (f, g) = align(&ecdf_13(), &ecdf_24()).unwrap();
        assert_eq!(f.knots(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(g.knots(), &[1.0, 2.0, 3.0, 4.0]);
        for x in [0.0, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0] {
            assert_eq!(f.eval(x), ecdf_13().eval(x));
            assert_eq!(g.eval(x), ecdf_24().eval(x));
        }
    }

    #[test]
    fn align_with_itself_is_identity() {
        let (f, g) = align(&ecdf_13(), &ecdf_13()).unwrap();
        assert_eq!(f, ecdf_13());
        assert_eq!(g, ecdf_13());
    }

    #[test]
    fn align_rejects_mixed_kinds() {
        let lin = PiecewiseFunction::linear(vec![0.0, 1.0], vec![0.0, 1.0], Tail::Unused, Tail::Unused).unwrap();
        assert_eq!(align(&ecdf_13(), &lin).unwrap_err(), Error::KindMismatch);
        assert_eq!(subtract(&ecdf_13(), &lin).unwrap_err(), Error::KindMismatch);
    }

    #[test]
    fn ecdf_difference_of_13_and_24() {
        let d = subtract(&ecdf_13(), &ecdf_24()).unwrap();
        assert_eq!(d.values(), &[0.5, 0.0, 0.5]);
        assert_eq!(d.left_tail(), Tail::Constant(0.0));
        assert_eq!(d.right_tail(), Tail::Constant(0.0));
        let i = d.integrate(Interval::new(1.0, 4.0).unwrap()).unwrap();
        assert_eq!(i, SignedAbsIntegrals { signed: 1.0, absolute: 1.0 });
    }

    #[test]
    fn self_difference_is_zero() {
        let d = subtract(&ecdf_13(), &ecdf_13()).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
        let i = d.integrate(Interval::new(-5.0, 5.0).unwrap()).unwrap();
        assert_eq!(i, SignedAbsIntegrals { signed: 0.0, absolute: 0.0 });
    }

    #[test]
    fn lorenz_difference_of_11_and_13() {
        let l1 = PiecewiseFunction::linear(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0], Tail::Unused, Tail::Unused).unwrap();
        let l2 = PiecewiseFunction::linear(vec![0.0, 0.5, 1.0], vec![0.0, 0.25, 1.0], Tail::Unused, Tail::Unused).unwrap();
        let d = subtract(&l1, &l2).unwrap();
        assert_eq!(d.knots(), &[0.0, 0.5, 1.0]);
        assert_eq!(d.values(), &[0.0, 0.25, 0.0]);
    }

    #[test]
    fn linear_sign_change_is_split_at_root() {
        let f = PiecewiseFunction::linear(vec![0.0, 1.0], vec![-1.0, 1.0], Tail::Unused, Tail::Unused).unwrap();
        let i = f.integrate(unit()).unwrap();
        assert_eq!(i.signed, 0.0);
        assert_eq!(i.absolute, 0.5);
    }

    #[test]
    fn step_integral_by_hand() {
        let f = PiecewiseFunction::step(vec![0.0, 1.0, 2.0, 3.0], vec![0.5, 0.0, 0.5], Tail::Unused, Tail::Unused)
            .unwrap();
        let i = f.integrate(Interval::new(0.0, 3.0).unwrap()).unwrap();
        assert_eq!(i, SignedAbsIntegrals { signed: 1.0, absolute: 1.0 });
    }

    #[test]
    fn zero_function_integrates_to_zero() {
        for kind in [Kind::Step, Kind::Linear] {
            let z = PiecewiseFunction::zero(kind, 0.3);
            let i = z.integrate(Interval::new(-2.0, 7.0).unwrap()).unwrap();
            assert_eq!(i, SignedAbsIntegrals { signed: 0.0, absolute: 0.0 });
        }
    }

    #[test]
    fn unused_tail_rejects_wide_domain() {
        let f = PiecewiseFunction::linear(vec![0.0, 1.0], vec![0.0, 1.0], Tail::Unused, Tail::Unused).unwrap();
        let err = f.integrate(Interval::new(-0.5, 1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DomainExceedsRepresentation { .. }));
        assert!(f.integrate(Interval::new(0.0, 1.5).unwrap()).is_err());
        assert!(f.integrate(Interval::new(0.25, 0.75).unwrap()).is_ok());
    }

    #[test]
    fn slope_tails_integrate_as_affine_extensions() {
        // 0 for t <= 1, then slope 1: the integrated CDF of {1}
        let f = PiecewiseFunction::linear(vec![1.0], vec![0.0], Tail::Slope(0.0), Tail::Slope(1.0)).unwrap();
        assert_eq!(f.eval(3.0), 2.0);
        assert_eq!(f.eval(-3.0), 0.0);
        let i = f.integrate(Interval::new(0.0, 3.0).unwrap()).unwrap();
        assert_eq!(i.signed, 2.0);
    }

    #[test]
    fn partial_domain_clips_segments() {
        let f = PiecewiseFunction::linear(vec![0.0, 2.0], vec![0.0, 2.0], Tail::Unused, Tail::Unused).unwrap();
        let i = f.integrate(Interval::new(0.5, 1.5).unwrap()).unwrap();
        assert!((i.signed - 1.0).abs() < 1e-15);
    }

    #[test]
    fn restricted_with_zero_theta_is_full_contact() {
        let h = PiecewiseFunction::linear(vec![0.0, 1.0], vec![-1.0, 1.0], Tail::Unused, Tail::Unused).unwrap();
        let theta = PiecewiseFunction::linear(vec![0.0, 1.0], vec![0.0, 0.0], Tail::Unused, Tail::Unused).unwrap();
        let (c, o) = restricted_integrals(&h, &theta, 0.1, unit()).unwrap();
        assert_eq!((c, o), (0.5, 0.0));
    }

    #[test]
    fn restricted_without_contact_is_signed_integral() {
        let a_n = 0.25;
        let h = PiecewiseFunction::linear(vec![0.0, 1.0], vec![-1.0, 3.0], Tail::Unused, Tail::Unused).unwrap();
        let theta = PiecewiseFunction::linear(vec![0.0, 1.0], vec![2.0 * a_n, 2.0 * a_n], Tail::Unused, Tail::Unused)
            .unwrap();
        let (c, o) = restricted_integrals(&h, &theta, a_n, unit()).unwrap();
        assert_eq!(c, 0.0);
        assert_eq!(o, h.integrate(unit()).unwrap().signed);
    }

    #[test]
    fn restricted_splits_at_level_crossing() {
        let h = PiecewiseFunction::linear(vec![0.0, 1.0], vec![1.0, 1.0], Tail::Unused, Tail::Unused).unwrap();
        let theta = PiecewiseFunction::linear(vec![0.0, 1.0], vec![0.0, 1.0], Tail::Unused, Tail::Unused).unwrap();
        let (c, o) = restricted_integrals(&h, &theta, 0.5, unit()).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
        assert!((o - 0.5).abs() < 1e-15);
    }

    #[test]
    fn restricted_boundary_level_belongs_to_contact() {
        let h = PiecewiseFunction::step(vec![0.0, 1.0], vec![-2.0], Tail::Unused, Tail::Unused).unwrap();
        let theta = PiecewiseFunction::step(vec![0.0, 1.0], vec![0.5], Tail::Unused, Tail::Unused).unwrap();
        let (c, o) = restricted_integrals(&h, &theta, 0.5, unit()).unwrap();
        assert_eq!((c, o), (2.0, 0.0));
    }

    #[test]
    fn restricted_negative_theta_flips_sign() {
        let h = PiecewiseFunction::step(vec![0.0, 1.0], vec![3.0], Tail::Unused, Tail::Unused).unwrap();
        let theta = PiecewiseFunction::step(vec![0.0, 1.0], vec![-1.0], Tail::Unused, Tail::Unused).unwrap();
        let (c, o) = restricted_integrals(&h, &theta, 0.5, unit()).unwrap();
        assert_eq!((c, o), (0.0, -3.0));
    }

    #[test]
    fn restricted_rejects_nonpositive_enlargement() {
        let f = ecdf_13();
        let d = Interval::new(0.0, 4.0).unwrap();
        for a in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                restricted_integrals(&f, &f, a, d),
                Err(Error::InvalidEnlargement(_))
            ));
        }
    }

    #[test]
    fn restricted_theta_crossing_both_levels() {
        // θ from -1 to 1, a_n = 0.5: contact on [0.25, 0.75]
        let h = PiecewiseFunction::linear(vec![0.0, 1.0], vec![1.0, 1.0], Tail::Unused, Tail::Unused).unwrap();
        let theta = PiecewiseFunction::linear(vec![0.0, 1.0], vec![-1.0, 1.0], Tail::Unused, Tail::Unused).unwrap();
        let split = contact_split(&h, &theta, 0.5, unit()).unwrap();
        assert!((split.abs_on_contact - 0.5).abs() < 1e-15);
        // -0.25 from the left piece, +0.25 from the right piece
        assert!(split.signed_off_contact.abs() < 1e-15);
        assert!((split.total - 1.0).abs() < 1e-15);
    }
}
