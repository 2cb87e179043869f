//! Piecewise curves of order quantity.
//!
//! Wholesale price schedules and expected consumer prices are decreasing,
//! continuous functions of the ordered quantity. Both are represented here
//! as ordered segments, each of the form `alpha + beta*q + gamma/q` on an
//! interval `[lo, hi]`. This family covers constant, affine and hyperbolic
//! (`a + b/q`) pieces, and every piecewise objective built from it is a
//! quadratic in `q` once multiplied through, so evaluation, inversion and
//! maximization all have closed forms per piece.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RsError};
use crate::tol;

/// One piece of a curve: `alpha + beta*q + gamma/q` on `[lo, hi]`.
///
/// `hi` may be `f64::INFINITY` for the final piece. Pieces with a
/// reciprocal term (`gamma != 0`) must start strictly above zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub lo: f64,
    #[serde(with = "quantity_or_inf")]
    pub hi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Segment {
    pub fn new(lo: f64, hi: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        Segment { lo, hi, alpha, beta, gamma }
    }

    /// Constant piece.
    pub fn constant(lo: f64, hi: f64, value: f64) -> Self {
        Segment::new(lo, hi, value, 0.0, 0.0)
    }

    /// Value at `q`. The reciprocal term is skipped when `gamma == 0` so
    /// that evaluation at `q == 0` stays finite.
    pub fn value(&self, q: f64) -> f64 {
        let recip = if self.gamma == 0.0 { 0.0 } else { self.gamma / q };
        self.alpha + self.beta * q + recip
    }

    /// Derivative at `q`.
    pub fn slope(&self, q: f64) -> f64 {
        let recip = if self.gamma == 0.0 { 0.0 } else { self.gamma / (q * q) };
        self.beta - recip
    }

    fn contains(&self, q: f64) -> bool {
        q >= self.lo && q <= self.hi
    }

    /// Solutions of `value(q) == level` inside `[self.lo, min(self.hi, cap)]`,
    /// smallest first. Multiplying through by `q` turns the equation into
    /// `beta*q^2 + (alpha - level)*q + gamma = 0`; the multiplication can
    /// introduce a spurious root at zero, so roots are checked against the
    /// actual segment value.
    fn level_roots(&self, level: f64, cap: f64) -> Vec<f64> {
        let hi = self.hi.min(cap);
        let scale = 1f64.max(level.abs());
        let mut out: Vec<f64> = quadratic_roots(self.beta, self.alpha - level, self.gamma)
            .into_iter()
            .filter(|&r| r >= self.lo - tol::CURVE_EPS && r <= hi + tol::CURVE_EPS)
            .map(|r| r.clamp(self.lo, hi))
            .filter(|&r| (self.value(r) - level).abs() <= 1e-6 * scale)
            .collect();
        // Flat piece sitting exactly at the level: every point solves it.
        if self.beta == 0.0 && self.gamma == 0.0 && (self.alpha - level).abs() <= tol::CURVE_EPS {
            out.push(self.lo);
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= tol::CURVE_EPS);
        out
    }
}

/// Real roots of `a*x^2 + b*x + c = 0`, ascending. Degenerate (all-zero)
/// equations report no roots; callers handle flat pieces separately.
pub(crate) fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    // Citardauq form avoids cancellation when b dominates.
    let q = -0.5 * (b + b.signum() * sq);
    let mut roots = if q == 0.0 { vec![0.0, -b / a] } else { vec![q / a, c / q] };
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= f64::EPSILON * x.abs().max(1.0));
    roots
}

/// A violation found by [`PiecewiseCurve::validate`]. Violations are data,
/// not errors: callers decide whether to reject the curve.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    NonFiniteCoefficient { segment: usize },
    NegativeDomain { domain_lo: f64 },
    BadInterval { segment: usize, lo: f64, hi: f64 },
    ReciprocalAtZero { segment: usize },
    FirstSegmentMisaligned { expected_lo: f64, got: f64 },
    GapOrOverlap { segment: usize, hi: f64, next_lo: f64 },
    UnboundedTailMissing { last_hi: f64 },
    Discontinuity { at: f64, left: f64, right: f64 },
    Increase { at: f64, detail: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Empty => write!(f, "curve has no segments"),
            Violation::NonFiniteCoefficient { segment } => {
                write!(f, "segment {segment} has a non-finite coefficient")
            }
            Violation::NegativeDomain { domain_lo } => {
                write!(f, "domain_lo {domain_lo} is negative")
            }
            Violation::BadInterval { segment, lo, hi } => {
                write!(f, "segment {segment} interval [{lo}, {hi}] is empty or reversed")
            }
            Violation::ReciprocalAtZero { segment } => {
                write!(f, "segment {segment} has gamma != 0 but starts at lo <= 0")
            }
            Violation::FirstSegmentMisaligned { expected_lo, got } => {
                write!(f, "first segment starts at {got}, expected domain_lo {expected_lo}")
            }
            Violation::GapOrOverlap { segment, hi, next_lo } => {
                write!(f, "segment {segment} ends at {hi} but the next starts at {next_lo}")
            }
            Violation::UnboundedTailMissing { last_hi } => {
                write!(f, "last segment ends at {last_hi}; the curve must extend to infinity")
            }
            Violation::Discontinuity { at, left, right } => {
                write!(f, "discontinuity at q={at}: left value {left}, right value {right}")
            }
            Violation::Increase { at, detail } => {
                write!(f, "curve increases at q={at}: {detail}")
            }
        }
    }
}

/// A non-increasing, continuous curve on `[0, +inf)`.
///
/// Segments tile `[domain_lo, +inf)`. For quantities below `domain_lo` the
/// curve extends constantly leftward, so every curve is usable on the full
/// nonnegative axis regardless of where its stated domain starts.
///
/// ```
/// use rs_chain_core::piecewise::{PiecewiseCurve, Segment};
///
/// // 5 per unit up to q = 1, then a quantity discount of 2 + 3/q.
/// let w = PiecewiseCurve::new(0.0, vec![
///     Segment::constant(0.0, 1.0, 5.0),
///     Segment::new(1.0, f64::INFINITY, 2.0, 0.0, 3.0),
/// ]);
/// assert!(w.validate().is_empty());
/// assert!((w.eval(2.5).unwrap() - 3.2).abs() < 1e-12);
/// assert!((w.solve_level(3.2).unwrap() - 2.5).abs() < 1e-9);
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseCurve {
    #[serde(default)]
    pub domain_lo: f64,
    pub segments: Vec<Segment>,
}

impl PiecewiseCurve {
    pub fn new(domain_lo: f64, segments: Vec<Segment>) -> Self {
        PiecewiseCurve { domain_lo, segments }
    }

    /// Builds the curve and rejects it if validation finds any violation.
    pub fn checked(domain_lo: f64, segments: Vec<Segment>) -> Result<Self> {
        let curve = PiecewiseCurve::new(domain_lo, segments);
        let violations = curve.validate();
        if violations.is_empty() {
            Ok(curve)
        } else {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            Err(RsError::ModelAssumption(msgs.join("; ")))
        }
    }

    /// Constant curve `value` on `[0, +inf)`.
    pub fn constant(value: f64) -> Self {
        PiecewiseCurve::new(0.0, vec![Segment::constant(0.0, f64::INFINITY, value)])
    }

    /// Affine curve `intercept + slope*q` on `[0, +inf)`.
    pub fn affine(intercept: f64, slope: f64) -> Self {
        PiecewiseCurve::new(0.0, vec![Segment::new(0.0, f64::INFINITY, intercept, slope, 0.0)])
    }

    /// Value at `q`. Quantities in `[0, domain_lo)` use the constant
    /// leftward extension; negative quantities are a domain error.
    pub fn eval(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) {
            return Err(RsError::DomainError(q));
        }
        if q < self.domain_lo {
            return Ok(self.segment_at(self.domain_lo)?.value(self.domain_lo));
        }
        Ok(self.segment_at(q)?.value(q))
    }

    fn segment_at(&self, q: f64) -> Result<&Segment> {
        self.segments.iter().find(|s| s.contains(q)).ok_or(RsError::DomainError(q))
    }

    /// Interior breakpoints (finite segment boundaries above `domain_lo`).
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.hi).filter(|h| h.is_finite()).collect()
    }

    /// Limit of the curve as `q -> inf`. Negative infinity for a curve
    /// whose tail decreases without bound.
    pub fn limit_at_infinity(&self) -> f64 {
        match self.segments.last() {
            None => f64::NAN,
            Some(s) => {
                if s.beta > 0.0 {
                    f64::INFINITY
                } else if s.beta < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    s.alpha
                }
            }
        }
    }

    /// Checks every structural invariant and returns the violations found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.segments.is_empty() {
            out.push(Violation::Empty);
            return out;
        }
        if self.domain_lo < 0.0 || !self.domain_lo.is_finite() {
            out.push(Violation::NegativeDomain { domain_lo: self.domain_lo });
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !s.lo.is_finite()
                || !(s.hi.is_finite() || s.hi == f64::INFINITY)
                || !s.alpha.is_finite()
                || !s.beta.is_finite()
                || !s.gamma.is_finite()
            {
                out.push(Violation::NonFiniteCoefficient { segment: i });
                return out;
            }
            if !(s.lo < s.hi) {
                out.push(Violation::BadInterval { segment: i, lo: s.lo, hi: s.hi });
            }
            if s.gamma != 0.0 && s.lo <= 0.0 {
                out.push(Violation::ReciprocalAtZero { segment: i });
            }
        }
        let first = &self.segments[0];
        if first.lo != self.domain_lo {
            out.push(Violation::FirstSegmentMisaligned {
                expected_lo: self.domain_lo,
                got: first.lo,
            });
        }
        for i in 0..self.segments.len() - 1 {
            let (a, b) = (&self.segments[i], &self.segments[i + 1]);
            if a.hi != b.lo {
                out.push(Violation::GapOrOverlap { segment: i, hi: a.hi, next_lo: b.lo });
            }
        }
        let last = self.segments.last().unwrap();
        if last.hi.is_finite() {
            out.push(Violation::UnboundedTailMissing { last_hi: last.hi });
        }
        if !out.is_empty() {
            // Tiling is broken; value checks below assume it holds.
            return out;
        }

        // Continuity and monotonicity across breakpoints.
        for i in 0..self.segments.len() - 1 {
            let q = self.segments[i].hi;
            let left = self.segments[i].value(q);
            let right = self.segments[i + 1].value(q);
            let scale = 1f64.max(left.abs()).max(right.abs());
            if (left - right).abs() > tol::CURVE_EPS * scale {
                out.push(Violation::Discontinuity { at: q, left, right });
            }
            if right > left + tol::CURVE_EPS * scale {
                out.push(Violation::Increase {
                    at: q,
                    detail: format!("value rises from {left} to {right}"),
                });
            }
        }
        // Monotonicity inside each segment. The slope beta - gamma/q^2 is
        // monotone in q, so it peaks at an endpoint.
        for (i, s) in self.segments.iter().enumerate() {
            let lo = if s.gamma != 0.0 { s.lo.max(f64::MIN_POSITIVE) } else { s.lo };
            let slope_lo = s.slope(lo.max(1e-300));
            let slope_hi = if s.hi.is_finite() { s.slope(s.hi) } else { s.beta };
            let worst = slope_lo.max(slope_hi);
            if worst > tol::CURVE_EPS {
                let at = if slope_lo >= slope_hi { s.lo } else { s.hi };
                out.push(Violation::Increase {
                    at,
                    detail: format!("segment {i} has positive slope {worst:.3e}"),
                });
            }
        }
        out
    }

    /// Smallest `q >= 0` with `eval(q) == level`, assuming the curve is
    /// non-increasing. Analytic per segment, with a bisection fallback.
    pub fn solve_level(&self, level: f64) -> Result<f64> {
        let at_zero = self.eval(0.0)?;
        let scale = 1f64.max(level.abs());
        if level > at_zero + tol::CURVE_EPS * scale {
            return Err(RsError::NoCrossing(level));
        }
        if (level - at_zero).abs() <= tol::CURVE_EPS * scale {
            return Ok(0.0);
        }
        for s in &self.segments {
            let v_lo = s.value(s.lo);
            let v_hi = if s.hi.is_finite() { s.value(s.hi) } else { self.limit_at_infinity() };
            if level > v_lo + tol::CURVE_EPS * scale {
                // Curve already below the level; with monotonicity it never
                // comes back up.
                break;
            }
            if level < v_hi - tol::CURVE_EPS * scale {
                continue;
            }
            if (level - v_lo).abs() <= tol::CURVE_EPS * scale {
                return Ok(s.lo);
            }
            if let Some(&root) = s.level_roots(level, f64::INFINITY).first() {
                if (s.value(root) - level).abs() <= tol::CURVE_EPS * scale {
                    return Ok(root);
                }
            }
            if s.hi.is_finite() || v_hi <= level {
                if let Some(q) = bisect_level(s, level, scale) {
                    return Ok(q);
                }
            }
        }
        Err(RsError::NoCrossing(level))
    }

    /// Largest `q >= 0` with `eval(q) >= level`; `None` when even `q = 0`
    /// falls short, `inf` when the curve never drops below the level.
    pub fn sup_at_least(&self, level: f64) -> Option<f64> {
        let at_zero = self.eval(0.0).ok()?;
        let scale = 1f64.max(level.abs());
        if at_zero < level - tol::CURVE_EPS * scale {
            return None;
        }
        let mut sup = 0.0;
        for s in &self.segments {
            let v_lo = s.value(s.lo);
            if v_lo < level - tol::CURVE_EPS * scale {
                break;
            }
            let v_hi = if s.hi.is_finite() { s.value(s.hi) } else { self.limit_at_infinity() };
            if v_hi >= level {
                if s.hi.is_finite() {
                    sup = s.hi;
                    continue;
                }
                return Some(f64::INFINITY);
            }
            // The level is crossed inside this segment.
            let roots = s.level_roots(level, f64::INFINITY);
            if let Some(&root) = roots.last() {
                if (s.value(root) - level).abs() <= tol::CURVE_EPS * scale {
                    return Some(root.max(sup));
                }
            }
            if let Some(q) = bisect_level(s, level, scale) {
                return Some(q.max(sup));
            }
            break;
        }
        Some(sup)
    }
}

/// Bisection for `s.value(q) == level` on a non-increasing segment.
fn bisect_level(s: &Segment, level: f64, scale: f64) -> Option<f64> {
    let mut lo = s.lo;
    // For an infinite tail, expand until the value falls below the level.
    let mut hi = if s.hi.is_finite() {
        s.hi
    } else {
        let mut h = (s.lo.abs() + 1.0) * 2.0;
        for _ in 0..200 {
            if s.value(h) < level {
                break;
            }
            h *= 2.0;
        }
        h
    };
    if s.value(lo) < level || s.value(hi) > level {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if s.value(mid) >= level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol::CURVE_EPS * lo.abs().max(1.0) {
            break;
        }
    }
    let q = 0.5 * (lo + hi);
    ((s.value(q) - level).abs() <= 1e-6 * scale).then_some(q)
}

/// Largest `q` with `p(q) >= w(q)`: the right edge of the feasible order
/// set. Works over merged breakpoints of both curves, bounded on the right
/// by where `p` falls below `w`'s limit (beyond that point `p < w` holds
/// for good). `None` when the curves never meet on the searched domain.
pub fn crossing(p: &PiecewiseCurve, w: &PiecewiseCurve) -> Option<f64> {
    let w_limit = w.limit_at_infinity();
    let qmax = p.sup_at_least(w_limit)?;
    if !qmax.is_finite() {
        return None;
    }
    if qmax == 0.0 {
        let d0 = p.eval(0.0).ok()? - w.eval(0.0).ok()?;
        return (d0 >= -tol::CURVE_EPS).then_some(0.0);
    }

    // Merged breakpoint grid over [0, qmax].
    let mut cuts: Vec<f64> = vec![0.0, qmax];
    cuts.extend(p.breakpoints().into_iter().filter(|&b| b < qmax));
    cuts.extend(w.breakpoints().into_iter().filter(|&b| b < qmax));
    cuts.extend([p.domain_lo, w.domain_lo].into_iter().filter(|&b| b > 0.0 && b < qmax));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1.0));

    let diff = |q: f64| -> f64 { p.eval(q).unwrap_or(f64::NAN) - w.eval(q).unwrap_or(f64::NAN) };

    // Scan pieces right to left for the last point where p >= w.
    for win in cuts.windows(2).rev() {
        let (a, b) = (win[0], win[1]);
        let (da, db) = (diff(a), diff(b));
        let scale = 1f64.max(da.abs()).max(db.abs());
        if db >= -tol::CURVE_EPS * scale {
            return Some(b);
        }
        if da < -tol::CURVE_EPS * scale && db < -tol::CURVE_EPS * scale {
            // Both ends below: the difference is a quadratic over q on this
            // piece, so an interior touch is still possible.
            let probe = interior_touch(p, w, a, b);
            if let Some(q) = probe {
                return Some(q);
            }
            continue;
        }
        // Sign change: d(a) >= 0 > d(b). Find the largest root.
        let mid = 0.5 * (a + b);
        let (ca, cb) = (coeffs_at(p, mid), coeffs_at(w, mid));
        let roots = quadratic_roots(ca.1 - cb.1, ca.0 - cb.0, ca.2 - cb.2);
        let mut best: Option<f64> = None;
        for r in roots {
            if r >= a - tol::CURVE_EPS && r <= b + tol::CURVE_EPS {
                let r = r.clamp(a, b);
                if diff(r).abs() <= 1e-7 * scale {
                    best = Some(best.map_or(r, |x: f64| x.max(r)));
                }
            }
        }
        if best.is_none() {
            // Bisection fallback on the sign change.
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if diff(m) >= 0.0 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            best = Some(0.5 * (lo + hi));
        }
        return best;
    }
    None
}

/// (alpha, beta, gamma) of the segment of `c` active at `q`, with the
/// constant extension folded in below `domain_lo`.
fn coeffs_at(c: &PiecewiseCurve, q: f64) -> (f64, f64, f64) {
    if q < c.domain_lo {
        let v = c.eval(q).unwrap_or(f64::NAN);
        return (v, 0.0, 0.0);
    }
    match c.segments.iter().find(|s| s.contains(q)) {
        Some(s) => (s.alpha, s.beta, s.gamma),
        None => (f64::NAN, 0.0, 0.0),
    }
}

/// Checks whether `p - w` touches zero strictly inside `(a, b)` even though
/// both endpoint values are negative, and returns the largest such point.
fn interior_touch(p: &PiecewiseCurve, w: &PiecewiseCurve, a: f64, b: f64) -> Option<f64> {
    let mid = 0.5 * (a + b);
    let (cp, cw) = (coeffs_at(p, mid), coeffs_at(w, mid));
    // d(q)*q = (beta_p-beta_w) q^2 + (alpha_p-alpha_w) q + (gamma_p-gamma_w)
    let (a2, a1, a0) = (cp.1 - cw.1, cp.0 - cw.0, cp.2 - cw.2);
    let mut best: Option<f64> = None;
    for r in quadratic_roots(a2, a1, a0) {
        if r > a && r < b {
            let d = p.eval(r).ok()? - w.eval(r).ok()?;
            if d.abs() <= 1e-7 {
                best = Some(best.map_or(r, |x: f64| x.max(r)));
            }
        }
    }
    best
}

/// Serialize `hi` as a number, or the string `"inf"` for an unbounded
/// segment; accept either on input.
mod quantity_or_inf {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum NumberOrInf {
        Number(f64),
        Tag(String),
    }

    pub fn serialize<S: Serializer>(value: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if value.is_finite() {
            ser.serialize_f64(*value)
        } else {
            ser.serialize_str("inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        match NumberOrInf::deserialize(de)? {
            NumberOrInf::Number(v) => Ok(v),
            NumberOrInf::Tag(s) if s == "inf" => Ok(f64::INFINITY),
            NumberOrInf::Tag(s) => Err(D::Error::custom(format!(
                "expected a number or \"inf\" for segment hi, got {s:?}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn eval_hyperbolic_tail() {
        let w = fixtures::chain_single_kink().w;
        assert!((w.eval(2.5).unwrap() - 3.2).abs() < 1e-12);
        assert!((w.eval(0.5).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn eval_agrees_on_both_sides_of_a_breakpoint() {
        let w = fixtures::chain_single_twin().w;
        assert!((w.eval(2.5).unwrap() - 3.25).abs() < 1e-9);
        // Adjoining segments agree at the joint.
        assert!((w.segments[2].value(2.5) - w.segments[3].value(2.5)).abs() < 1e-12);
    }

    #[test]
    fn eval_constant_extension_below_domain_lo() {
        let w = fixtures::chain_pair().w;
        assert_eq!(w.domain_lo, 0.25);
        assert_eq!(w.eval(0.0).unwrap(), 5.0);
        assert_eq!(w.eval(0.1).unwrap(), 5.0);
    }

    #[test]
    fn eval_constant_curve() {
        let c = PiecewiseCurve::constant(5.0);
        for q in [0.0, 0.3, 7.0, 1e6] {
            assert_eq!(c.eval(q).unwrap(), 5.0);
        }
    }

    #[test]
    fn eval_rejects_negative_quantity() {
        let c = PiecewiseCurve::constant(5.0);
        assert!(matches!(c.eval(-1.0), Err(RsError::DomainError(_))));
    }

    #[test]
    fn validate_accepts_the_reference_curves() {
        for curve in [
            fixtures::chain_single_kink().w,
            fixtures::chain_single_twin().w,
            fixtures::chain_single_twin().p,
            fixtures::chain_pair().w,
            fixtures::chain_pair_wide().w,
        ] {
            assert!(curve.validate().is_empty(), "unexpected violations: {:?}", curve.validate());
        }
    }

    #[test]
    fn validate_flags_jump_and_increase() {
        let c = PiecewiseCurve::new(
            0.0,
            vec![Segment::constant(0.0, 1.0, 5.0), Segment::constant(1.0, f64::INFINITY, 6.0)],
        );
        let v = c.validate();
        assert!(v.iter().any(|x| matches!(x, Violation::Discontinuity { at, .. } if *at == 1.0)));
        assert!(v.iter().any(|x| matches!(x, Violation::Increase { at, .. } if *at == 1.0)));
    }

    #[test]
    fn validate_flags_interior_increase() {
        // beta > 0 with gamma > 0 dips then rises inside the segment.
        let c = PiecewiseCurve::new(1.0, vec![Segment::new(1.0, f64::INFINITY, 0.0, 1.0, 4.0)]);
        assert!(c.validate().iter().any(|x| matches!(x, Violation::Increase { .. })));
    }

    #[test]
    fn validate_flags_reciprocal_at_zero() {
        let c = PiecewiseCurve::new(0.0, vec![Segment::new(0.0, f64::INFINITY, 2.0, 0.0, 3.0)]);
        assert!(c
            .validate()
            .iter()
            .any(|x| matches!(x, Violation::ReciprocalAtZero { segment: 0 })));
    }

    #[test]
    fn solve_level_affine() {
        let p = PiecewiseCurve::affine(7.0, -1.0);
        assert!((p.solve_level(2.0).unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn solve_level_wide_chain_price() {
        let p = fixtures::chain_pair_wide().prices[0].clone();
        assert!((p.solve_level(1.8).unwrap() - 96.4).abs() < 1e-9);
    }

    #[test]
    fn solve_level_last_segment() {
        let p = fixtures::chain_single_twin().p;
        assert!((p.solve_level(1.0).unwrap() - 8.0).abs() < 1e-9);
    }

    #[test]
    fn solve_level_unattained_is_an_error() {
        let p = PiecewiseCurve::constant(5.0);
        assert!(matches!(p.solve_level(6.0), Err(RsError::NoCrossing(_))));
        assert!(matches!(p.solve_level(1.0), Err(RsError::NoCrossing(_))));
    }

    #[test]
    fn sup_at_least_passes_flat_stretches() {
        // 5 on [0,2], then falling: every q up to the fall qualifies at 5.
        let c = PiecewiseCurve::new(
            0.0,
            vec![
                Segment::constant(0.0, 2.0, 5.0),
                Segment::new(2.0, f64::INFINITY, 7.0, -1.0, 0.0),
            ],
        );
        assert!((c.sup_at_least(5.0).unwrap() - 2.0).abs() < 1e-9);
        assert!((c.sup_at_least(4.0).unwrap() - 3.0).abs() < 1e-9);
        assert_eq!(c.sup_at_least(6.0), None);
    }

    #[test]
    fn crossing_single_kink_chain() {
        let prob = fixtures::chain_single_kink();
        let q = crossing(&prob.p, &prob.w).unwrap();
        let expected = (5.0 + 13f64.sqrt()) / 2.0;
        assert!((q - expected).abs() < 1e-7, "got {q}, expected {expected}");
    }

    #[test]
    fn crossing_twin_chain() {
        let prob = fixtures::chain_single_twin();
        let q = crossing(&prob.p, &prob.w).unwrap();
        assert!((q - 3.5).abs() < 1e-7);
    }

    #[test]
    fn crossing_boundary_only() {
        let p = PiecewiseCurve::affine(7.0, -1.0);
        let w = PiecewiseCurve::constant(7.0);
        assert_eq!(crossing(&p, &w), Some(0.0));
    }

    #[test]
    fn crossing_never_feasible() {
        let p = PiecewiseCurve::affine(5.0, -1.0);
        let w = PiecewiseCurve::constant(7.0);
        assert_eq!(crossing(&p, &w), None);
    }

    #[test]
    fn segment_json_roundtrip_with_inf() {
        let s = Segment::new(1.0, f64::INFINITY, 2.0, 0.0, 3.0);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"inf\""));
        let back: Segment = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn curve_json_rejects_unknown_fields() {
        let text = r#"{"domain_lo": 0.0, "segments": [], "extra": 1}"#;
        assert!(serde_json::from_str::<PiecewiseCurve>(text).is_err());
        let text =
            r#"{"segments": [{"lo": 0, "hi": 1, "alpha": 5, "beta": 0, "gamma": 0, "x": 2}]}"#;
        assert!(serde_json::from_str::<PiecewiseCurve>(text).is_err());
    }
}
