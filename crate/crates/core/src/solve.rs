//! Order-quantity optimization for retailers and coalitions.
//!
//! Every objective in this module is piecewise quadratic in the order
//! quantities once the curve segments are multiplied through by `q`, so
//! one-dimensional problems are solved exactly by enumerating segment
//! breakpoints and closed-form stationary points. Coalition problems
//! couple the retailers only through the wholesale price of the total
//! order; they are solved by an outer search over the total on a
//! breakpoint-aware grid with iterative refinement, an inner allocation of
//! the total across members, and a final coordinatewise polish that lands
//! interior optima to machine precision.

use crate::error::{Result, RsError};
use crate::model::{retailer_profit, supplier_profit, RsProblem, RsSituation};
use crate::piecewise::PiecewiseCurve;
use crate::tol;

/// Optimal order plan and profit for one coalition.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionSolution {
    /// Participating retailer ids, ascending.
    pub members: Vec<usize>,
    /// Whether the supplier takes part (unit price `c` instead of `w`).
    pub with_supplier: bool,
    /// Optimal order size per member, aligned with `members`.
    pub quantities: Vec<f64>,
    /// Total order size.
    pub total: f64,
    /// Price per unit actually paid: `w(total)` without the supplier, `c`
    /// with the supplier.
    pub unit_price: f64,
    /// Optimal joint profit.
    pub value: f64,
    /// Every distinct optimal quantity vector found (the reported
    /// `quantities` is the one with the smallest total).
    pub alternates: Vec<Vec<f64>>,
}

impl CoalitionSolution {
    fn finish(mut self) -> Self {
        debug_assert!(
            (self.total - self.quantities.iter().sum::<f64>()).abs()
                <= tol::IDENTITY_EPS * self.total.abs().max(1.0),
            "total must equal the sum of member quantities"
        );
        if self.alternates.is_empty() {
            self.alternates.push(self.quantities.clone());
        }
        self
    }
}

/// Exact maximum of `(p(q) - cost(q)) * q` over `[0, hi]`.
///
/// Returns the maximum value and every maximizer (ascending) within the
/// value tolerance. Each merged piece of `p` and `cost` contributes its
/// endpoints and the closed-form stationary point of the quadratic
/// `(alpha_p - alpha_c) q + (beta_p - beta_c) q^2 + (gamma_p - gamma_c)`.
fn maximize_margin(p: &PiecewiseCurve, cost: &PiecewiseCurve, hi: f64) -> (f64, Vec<f64>) {
    let objective = |q: f64| -> f64 {
        let pv = p.eval(q).unwrap_or(f64::NEG_INFINITY);
        let cv = cost.eval(q).unwrap_or(f64::INFINITY);
        (pv - cv) * q
    };
    let cuts = merged_cuts(&[p, cost], 0.0, hi);
    let mut candidates: Vec<f64> = cuts.clone();
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        let mid = 0.5 * (a + b);
        let (pa, pb, _) = curve_coeffs(p, mid);
        let (ca, cb, _) = curve_coeffs(cost, mid);
        let a2 = pb - cb;
        let a1 = pa - ca;
        if a2 != 0.0 {
            let st = -a1 / (2.0 * a2);
            if st > a && st < b {
                candidates.push(st);
            }
        }
    }
    let best = candidates.iter().map(|&q| objective(q)).fold(f64::NEG_INFINITY, f64::max);
    let mut maximizers: Vec<f64> = candidates
        .into_iter()
        .filter(|&q| objective(q) >= best - tol::CMP_EPS * best.abs().max(1.0))
        .collect();
    maximizers.sort_by(f64::total_cmp);
    maximizers.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(1.0));
    (best, maximizers)
}

/// Merged breakpoints of several curves restricted to `[lo, hi]`, with the
/// interval endpoints included.
fn merged_cuts(curves: &[&PiecewiseCurve], lo: f64, hi: f64) -> Vec<f64> {
    let mut cuts = vec![lo, hi];
    for c in curves {
        cuts.extend(c.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
        if c.domain_lo > lo && c.domain_lo < hi {
            cuts.push(c.domain_lo);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * a.abs().max(1.0));
    cuts
}

/// `(alpha, beta, gamma)` of the segment active at `q`, folding in the
/// constant extension below the curve's stated domain.
fn curve_coeffs(c: &PiecewiseCurve, q: f64) -> (f64, f64, f64) {
    if q < c.domain_lo {
        return (c.eval(q).unwrap_or(f64::NAN), 0.0, 0.0);
    }
    for s in &c.segments {
        if q >= s.lo && q <= s.hi {
            return (s.alpha, s.beta, s.gamma);
        }
    }
    (f64::NAN, 0.0, 0.0)
}

/// Optimal order size(s) for a single retailer facing the wholesale
/// schedule: maximize `(p(q) - w(q)) q` over the feasible set.
pub fn solve_retailer(prob: &RsProblem) -> Result<CoalitionSolution> {
    prob.ensure_valid()?;
    solve_retailer_as(prob, 1)
}

fn solve_retailer_as(prob: &RsProblem, id: usize) -> Result<CoalitionSolution> {
    let hi = prob
        .feasible_upper()
        .ok_or_else(|| RsError::ModelAssumption("the feasible order set is empty".into()))?;
    let (_, maximizers) = maximize_margin(&prob.p, &prob.w, hi);
    let q = maximizers.first().copied().unwrap_or(0.0);
    let unit_price = prob.w.eval(q)?;
    Ok(CoalitionSolution {
        members: vec![id],
        with_supplier: false,
        quantities: vec![q],
        total: q,
        unit_price,
        value: retailer_profit(&prob.p, q, unit_price),
        alternates: maximizers.into_iter().map(|m| vec![m]).collect(),
    }
    .finish())
}

/// Optimal plan for a coalition of retailers together with the supplier.
///
/// With the supplier inside, the wholesale price disappears and each
/// member independently maximizes `(p_i(q) - c) q`, so the joint problem
/// separates per retailer. An empty member set is allowed and yields the
/// zero solution.
pub fn solve_with_supplier(sit: &RsSituation, members: &[usize]) -> Result<CoalitionSolution> {
    sit.ensure_valid()?;
    let ids = normalize_members(sit, members, true)?;
    let cost_curve = PiecewiseCurve::constant(sit.c);
    let mut quantities = Vec::with_capacity(ids.len());
    let mut per_member_alts: Vec<Vec<f64>> = Vec::with_capacity(ids.len());
    let mut value = 0.0;
    for &id in &ids {
        let p = &sit.prices[id - 1];
        let hi = p
            .sup_at_least(sit.c)
            .ok_or_else(|| RsError::ModelAssumption(format!("retailer {id} priced below cost")))?;
        let (v, maximizers) = maximize_margin(p, &cost_curve, hi);
        let q = maximizers.first().copied().unwrap_or(0.0);
        quantities.push(q);
        per_member_alts.push(maximizers);
        value += v;
    }
    let total = quantities.iter().sum();
    let alternates = cartesian_capped(&per_member_alts, 16);
    Ok(CoalitionSolution {
        members: ids,
        with_supplier: true,
        quantities,
        total,
        unit_price: sit.c,
        value,
        alternates,
    }
    .finish())
}

fn cartesian_capped(parts: &[Vec<f64>], cap: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for p in parts {
        let mut next = Vec::new();
        for base in &out {
            for &v in p {
                if next.len() >= cap {
                    break;
                }
                let mut row = base.clone();
                row.push(v);
                next.push(row);
            }
        }
        out = next;
    }
    out
}

fn normalize_members(
    sit: &RsSituation,
    members: &[usize],
    allow_empty: bool,
) -> Result<Vec<usize>> {
    let mut ids: Vec<usize> = members.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.is_empty() && !allow_empty {
        return Err(RsError::InvalidArgument("the member set is empty".into()));
    }
    for &id in &ids {
        if id == 0 || id > sit.n() {
            return Err(RsError::InvalidArgument(format!(
                "retailer id {id} is outside 1..={}",
                sit.n()
            )));
        }
    }
    Ok(ids)
}

/// Optimal plan for a coalition of retailers ordering jointly (without the
/// supplier): maximize `sum_i (p_i(q_i) - w(q_S)) q_i` over feasible order
/// vectors.
pub fn solve_coalition(sit: &RsSituation, members: &[usize]) -> Result<CoalitionSolution> {
    sit.ensure_valid()?;
    let ids = normalize_members(sit, members, false)?;
    if ids.len() == 1 {
        let prob = sit.problem(ids[0])?;
        return solve_retailer_as(&prob, ids[0]);
    }
    let ctx = CoalitionCtx::new(sit, &ids)?;

    // Outer search over the total order size: a uniform grid per pass plus
    // every wholesale breakpoint and feasibility edge, shrinking the
    // window around the incumbent between passes.
    const OUTER_POINTS: usize = 2048;
    const PASSES: usize = 4;
    const SHRINK: f64 = 32.0;

    let t_max = ctx.caps_at_cost.iter().sum::<f64>();
    let mut best: Option<(f64, Vec<f64>, f64)> = None; // (t, vec, objective)
    let mut window = (0.0, t_max);
    let mut surveyed: Vec<(f64, Vec<f64>, f64)> = Vec::new();

    for _pass in 0..PASSES {
        let mut points = grid_points(&ctx, window.0, window.1, OUTER_POINTS);
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * a.abs().max(1.0));
        let mut warm: Option<Vec<f64>> = None;
        for (idx, &t) in points.iter().enumerate() {
            let fresh = idx % 64 == 0;
            let seed = if fresh { None } else { warm.as_deref() };
            if let Some((vec, revenue)) = ctx.inner_allocate(t, seed) {
                let objective = revenue - ctx.w.eval(t).unwrap_or(f64::INFINITY) * t;
                warm = Some(vec.clone());
                if best.as_ref().is_none_or(|b| objective > b.2) {
                    best = Some((t, vec.clone(), objective));
                }
                surveyed.push((t, vec, objective));
            }
        }
        if let Some((t_star, _, _)) = best {
            let half = (window.1 - window.0) / (2.0 * SHRINK);
            window = ((t_star - half).max(0.0), (t_star + half).min(t_max));
        }
    }

    let (_, mut vec, _) = best.ok_or_else(|| {
        RsError::ModelAssumption("no feasible joint order exists for the coalition".into())
    })?;
    let mut value = ctx.polish(&mut vec);

    // Distinct near-optimal totals from every pass are polished too and
    // kept when they still tie the incumbent after polishing. Coarse-pass
    // objectives undershoot by the grid discretization, so the survey
    // filter is looser than the final tie tolerance.
    let mut alternates: Vec<Vec<f64>> = vec![vec.clone()];
    let value_tol = tol::CMP_EPS * value.abs().max(1.0);
    let survey_tol = (1e-4 * value.abs().max(1.0)).max(value_tol);
    let t_gap = (t_max * 1e-4).max(1e-9);
    let primary_t: f64 = vec.iter().sum();
    surveyed.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut reps: Vec<(f64, Vec<f64>)> = Vec::new();
    for (t, v, obj) in &surveyed {
        if reps.len() >= 8 {
            break;
        }
        if *obj >= value - survey_tol
            && (t - primary_t).abs() > t_gap
            && reps.iter().all(|(rt, _)| (rt - t).abs() > t_gap)
        {
            reps.push((*t, v.clone()));
        }
    }
    for (_, mut cand) in reps {
        let cand_value = ctx.polish(&mut cand);
        if cand_value > value + value_tol {
            // A better basin surfaced during polishing; adopt it.
            vec = cand.clone();
            value = cand_value;
            alternates.clear();
            alternates.push(cand);
        } else if cand_value >= value - value_tol
            && alternates.iter().all(|a| linf_distance(a, &cand) > 1e-6 * (1.0 + ctx.scale_q))
        {
            alternates.push(cand);
        }
    }
    alternates.sort_by(|a, b| {
        let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
        sa.total_cmp(&sb)
    });
    // Report the smallest-total optimum.
    if let Some(first) = alternates.first() {
        if linf_distance(first, &vec) > 0.0 {
            vec = first.clone();
            value = ctx.objective(&vec);
        }
    }

    let total: f64 = vec.iter().sum();
    let unit_price = ctx.w.eval(total)?;
    Ok(CoalitionSolution {
        members: ids,
        with_supplier: false,
        quantities: vec,
        total,
        unit_price,
        value,
        alternates,
    }
    .finish())
}

fn linf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn grid_points(ctx: &CoalitionCtx<'_>, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut points = Vec::with_capacity(n + 8);
    if hi <= lo {
        points.push(lo.max(0.0));
        return points;
    }
    let step = (hi - lo) / (n - 1) as f64;
    for k in 0..n {
        points.push(lo + step * k as f64);
    }
    points.extend(ctx.w.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
    if ctx.w.domain_lo > lo && ctx.w.domain_lo < hi {
        points.push(ctx.w.domain_lo);
    }
    // Feasibility edges: totals where the wholesale price drops to some
    // retailer's price at zero, opening that retailer's constraint.
    for p in &ctx.prices {
        let p0 = p.eval(0.0).unwrap_or(f64::NAN);
        if p0.is_finite() {
            if let Ok(edge) = ctx.w.solve_level(p0) {
                if edge > lo && edge < hi {
                    points.push(edge);
                }
            }
        }
    }
    points
}

struct CoalitionCtx<'a> {
    prices: Vec<&'a PiecewiseCurve>,
    w: &'a PiecewiseCurve,
    caps_at_cost: Vec<f64>,
    scale_q: f64,
}

impl<'a> CoalitionCtx<'a> {
    fn new(sit: &'a RsSituation, ids: &[usize]) -> Result<Self> {
        let prices: Vec<&PiecewiseCurve> = ids.iter().map(|&i| &sit.prices[i - 1]).collect();
        let caps_at_cost = prices
            .iter()
            .map(|p| {
                p.sup_at_least(sit.c)
                    .filter(|u| u.is_finite())
                    .ok_or_else(|| RsError::ModelAssumption("price never reaches cost".into()))
            })
            .collect::<Result<Vec<f64>>>()?;
        let scale_q = caps_at_cost.iter().fold(0.0_f64, |a, &b| a.max(b));
        Ok(CoalitionCtx { prices, w: &sit.w, caps_at_cost, scale_q })
    }

    /// Revenue of an order vector: `sum_i p_i(q_i) q_i`.
    fn revenue(&self, vec: &[f64]) -> f64 {
        vec.iter().zip(&self.prices).map(|(&q, p)| p.eval(q).unwrap_or(f64::NEG_INFINITY) * q).sum()
    }

    /// Full coalition objective `sum_i (p_i(q_i) - w(q_S)) q_i`.
    fn objective(&self, vec: &[f64]) -> f64 {
        let t: f64 = vec.iter().sum();
        self.revenue(vec) - self.w.eval(t).unwrap_or(f64::INFINITY) * t
    }

    fn feasible(&self, vec: &[f64]) -> bool {
        let t: f64 = vec.iter().sum();
        let Ok(wval) = self.w.eval(t) else { return false };
        vec.iter().zip(&self.prices).all(|(&q, p)| {
            q >= -1e-12
                && p.eval(q.max(0.0))
                    .map(|pv| pv >= wval - 1e-9 * wval.abs().max(1.0))
                    .unwrap_or(false)
        })
    }

    /// Best split of the fixed total `t` across members; returns the order
    /// vector and its revenue. `None` when no feasible split exists.
    fn inner_allocate(&self, t: f64, seed: Option<&[f64]>) -> Option<(Vec<f64>, f64)> {
        let wval = self.w.eval(t).ok()?;
        let caps: Vec<f64> =
            self.prices.iter().map(|p| p.sup_at_least(wval)).collect::<Option<Vec<f64>>>()?;
        let caps: Vec<f64> = caps.iter().zip(&self.caps_at_cost).map(|(&c, &u)| c.min(u)).collect();
        let slack: f64 = caps.iter().sum::<f64>() - t;
        if slack < -1e-9 * t.max(1.0) {
            return None;
        }
        match self.prices.len() {
            1 => {
                let q = t.min(caps[0]);
                Some((vec![q], self.prices[0].eval(q).ok()? * q))
            }
            2 => self.pair_split(0, 1, t, &caps).map(|(q0, q1, rev)| (vec![q0, q1], rev)),
            _ => self.multi_split(t, &caps, seed),
        }
    }

    /// Exact two-member split: a one-dimensional piecewise-quadratic
    /// maximization over `q_a` with `q_b = t - q_a`.
    fn pair_split(&self, a: usize, b: usize, t: f64, caps: &[f64]) -> Option<(f64, f64, f64)> {
        let (pa, pb) = (self.prices[a], self.prices[b]);
        let lo = (t - caps[b]).max(0.0);
        let hi = caps[a].min(t);
        if hi < lo - 1e-12 * t.max(1.0) {
            return None;
        }
        let hi = hi.max(lo);
        let mut cuts: Vec<f64> = vec![lo, hi];
        cuts.extend(pa.breakpoints().into_iter().filter(|&x| x > lo && x < hi));
        if pa.domain_lo > lo && pa.domain_lo < hi {
            cuts.push(pa.domain_lo);
        }
        for bp in pb.breakpoints() {
            let x = t - bp;
            if x > lo && x < hi {
                cuts.push(x);
            }
        }
        if pb.domain_lo > 0.0 {
            let x = t - pb.domain_lo;
            if x > lo && x < hi {
                cuts.push(x);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * x.abs().max(1.0));

        let rev = |q: f64| -> f64 {
            let qa = q.clamp(lo, hi);
            let qb = (t - qa).max(0.0);
            pa.eval(qa).unwrap_or(f64::NEG_INFINITY) * qa
                + pb.eval(qb).unwrap_or(f64::NEG_INFINITY) * qb
        };
        let mut best_q = lo;
        let mut best_v = rev(lo);
        let mut consider = |q: f64| {
            let v = rev(q);
            if v > best_v {
                best_v = v;
                best_q = q.clamp(lo, hi);
            }
        };
        for win in cuts.windows(2) {
            let (x0, x1) = (win[0], win[1]);
            consider(x1);
            let mid = 0.5 * (x0 + x1);
            let (aa, ab, _) = curve_coeffs(pa, mid);
            let (ba, bb, _) = curve_coeffs(pb, (t - mid).max(0.0));
            // d/dq [ g_a(q) + g_b(t-q) ] = a_a + 2 b_a q - a_b - 2 b_b (t - q)
            let a2 = ab + bb;
            let a1 = aa - ba - 2.0 * bb * t;
            if a2 != 0.0 {
                let st = -a1 / (2.0 * a2);
                if st > x0 && st < x1 {
                    consider(st);
                }
            }
        }
        Some((best_q, t - best_q, best_v))
    }

    /// Three or more members: seeded block-coordinate descent where every
    /// pair is re-split exactly while the rest stay fixed.
    fn multi_split(&self, t: f64, caps: &[f64], seed: Option<&[f64]>) -> Option<(Vec<f64>, f64)> {
        let k = self.prices.len();
        let mut seeds: Vec<Vec<f64>> = Vec::new();
        if let Some(s) = seed {
            let mut v = s.to_vec();
            project_to_sum(&mut v, t, caps);
            seeds.push(v);
        } else {
            let cap_sum: f64 = caps.iter().sum();
            if cap_sum > 0.0 {
                seeds.push(caps.iter().map(|&c| t * c / cap_sum).collect());
            }
            seeds.push(self.dp_seed(t, caps, 48));
        }
        let mut best: Option<(Vec<f64>, f64)> = None;
        for mut v in seeds {
            project_to_sum(&mut v, t, caps);
            let mut rev = self.revenue(&v);
            for _ in 0..60 {
                let mut improved = false;
                for i in 0..k {
                    for j in i + 1..k {
                        let tij = v[i] + v[j];
                        let local_caps = [caps[i], caps[j]];
                        if let Some((qi, qj, _)) = self.pair_split_on(i, j, tij, &local_caps) {
                            let mut cand = v.clone();
                            cand[i] = qi;
                            cand[j] = qj;
                            let cand_rev = self.revenue(&cand);
                            if cand_rev > rev + 1e-13 * rev.abs().max(1.0) {
                                v = cand;
                                rev = cand_rev;
                                improved = true;
                            }
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            if best.as_ref().is_none_or(|(_, r)| rev > *r) {
                best = Some((v, rev));
            }
        }
        best
    }

    fn pair_split_on(
        &self,
        i: usize,
        j: usize,
        t: f64,
        caps: &[f64; 2],
    ) -> Option<(f64, f64, f64)> {
        // Delegate to pair_split with a temporary two-price view.
        let view = CoalitionCtx {
            prices: vec![self.prices[i], self.prices[j]],
            w: self.w,
            caps_at_cost: vec![caps[0], caps[1]],
            scale_q: self.scale_q,
        };
        view.pair_split(0, 1, t, caps)
    }

    /// Coarse dynamic program over a `levels`-point grid of the total,
    /// used to seed the exact pair descent.
    fn dp_seed(&self, t: f64, caps: &[f64], levels: usize) -> Vec<f64> {
        let k = self.prices.len();
        let unit = t / levels as f64;
        let g: Vec<Vec<f64>> = self
            .prices
            .iter()
            .zip(caps)
            .map(|(p, &cap)| {
                (0..=levels)
                    .map(|m| {
                        let q = unit * m as f64;
                        if q <= cap + 1e-12 {
                            p.eval(q).map(|pv| pv * q).unwrap_or(f64::NEG_INFINITY)
                        } else {
                            f64::NEG_INFINITY
                        }
                    })
                    .collect()
            })
            .collect();
        let mut dp = vec![f64::NEG_INFINITY; levels + 1];
        let mut choice = vec![vec![0usize; levels + 1]; k];
        dp[0] = 0.0;
        for (r, gr) in g.iter().enumerate() {
            let mut next = vec![f64::NEG_INFINITY; levels + 1];
            for m in 0..=levels {
                for take in 0..=m {
                    let base = dp[m - take];
                    if base == f64::NEG_INFINITY || gr[take] == f64::NEG_INFINITY {
                        continue;
                    }
                    let v = base + gr[take];
                    if v > next[m] {
                        next[m] = v;
                        choice[r][m] = take;
                    }
                }
            }
            dp = next;
        }
        let mut out = vec![0.0; k];
        let mut m = levels;
        for r in (0..k).rev() {
            let take = choice[r][m];
            out[r] = unit * take as f64;
            m -= take;
        }
        out
    }

    /// Local refinement of a full order vector: exact pairwise re-splits
    /// at a fixed total interleaved with exact single-coordinate moves
    /// that let the total itself shift. Interior optima land exactly on
    /// the stationary points of the active quadratic pieces.
    fn polish(&self, vec: &mut Vec<f64>) -> f64 {
        let k = vec.len();
        let mut value = self.objective(vec);
        for _ in 0..200 {
            let mut improved = false;
            // Sum-preserving pair moves.
            let t: f64 = vec.iter().sum();
            if let Ok(wval) = self.w.eval(t) {
                if let Some(caps) =
                    self.prices.iter().map(|p| p.sup_at_least(wval)).collect::<Option<Vec<f64>>>()
                {
                    let caps: Vec<f64> =
                        caps.iter().zip(&self.caps_at_cost).map(|(&c, &u)| c.min(u)).collect();
                    for i in 0..k {
                        for j in i + 1..k {
                            let tij = vec[i] + vec[j];
                            if let Some((qi, qj, _)) =
                                self.pair_split_on(i, j, tij, &[caps[i], caps[j]])
                            {
                                let mut cand = vec.clone();
                                cand[i] = qi;
                                cand[j] = qj;
                                let cand_value = self.objective(&cand);
                                if cand_value > value + 1e-13 * value.abs().max(1.0)
                                    && self.feasible(&cand)
                                {
                                    *vec = cand;
                                    value = cand_value;
                                    improved = true;
                                }
                            }
                        }
                    }
                }
            }
            // Total-shifting single-coordinate moves.
            for i in 0..k {
                if let Some((q_new, cand_value)) = self.coordinate_move(vec, i, value) {
                    vec[i] = q_new;
                    value = cand_value;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        value
    }

    /// Best feasible move of coordinate `i` holding the others fixed. The
    /// objective along the coordinate is piecewise quadratic with pieces
    /// cut by the retailer's own breakpoints and, through the total, the
    /// wholesale breakpoints.
    fn coordinate_move(&self, vec: &[f64], i: usize, current: f64) -> Option<(f64, f64)> {
        let rest: f64 = vec.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &q)| q).sum();
        let p = self.prices[i];
        let hi = self.caps_at_cost[i];
        let mut cuts: Vec<f64> = vec![0.0, hi];
        cuts.extend(p.breakpoints().into_iter().filter(|&x| x > 0.0 && x < hi));
        if p.domain_lo > 0.0 && p.domain_lo < hi {
            cuts.push(p.domain_lo);
        }
        for bw in self.w.breakpoints() {
            let x = bw - rest;
            if x > 0.0 && x < hi {
                cuts.push(x);
            }
        }
        if self.w.domain_lo > rest {
            let x = self.w.domain_lo - rest;
            if x > 0.0 && x < hi {
                cuts.push(x);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * a.abs().max(1.0));

        let mut candidates: Vec<f64> = cuts.clone();
        for win in cuts.windows(2) {
            let mid = 0.5 * (win[0] + win[1]);
            let (pa, pb, _) = curve_coeffs(p, mid);
            let (wa, wb, _) = curve_coeffs(self.w, rest + mid);
            // d/dx [ g_i(x) - W(rest + x) ] with W(t) = wa t + wb t^2 + wg
            let a2 = pb - wb;
            let a1 = pa - wa - 2.0 * wb * rest;
            if a2 != 0.0 {
                let st = -a1 / (2.0 * a2);
                if st > win[0] && st < win[1] {
                    candidates.push(st);
                }
            }
        }
        let mut best: Option<(f64, f64)> = None;
        let mut cand_vec = vec.to_vec();
        for q in candidates {
            cand_vec[i] = q;
            let v = self.objective(&cand_vec);
            if v > current + 1e-13 * current.abs().max(1.0)
                && best.as_ref().is_none_or(|(_, bv)| v > *bv)
                && self.feasible(&cand_vec)
            {
                best = Some((q, v));
            }
        }
        best
    }
}

/// Adjusts `vec` in place so its components sum to `t` while staying in
/// `[0, caps]`, spreading the correction over the remaining slack.
fn project_to_sum(vec: &mut [f64], t: f64, caps: &[f64]) {
    for (q, &cap) in vec.iter_mut().zip(caps) {
        *q = q.clamp(0.0, cap);
    }
    for _ in 0..32 {
        let diff = t - vec.iter().sum::<f64>();
        if diff.abs() <= 1e-12 * t.max(1.0) {
            return;
        }
        if diff > 0.0 {
            let slack: f64 = vec.iter().zip(caps).map(|(&q, &c)| c - q).sum();
            if slack <= 0.0 {
                return;
            }
            for (q, &cap) in vec.iter_mut().zip(caps) {
                *q += diff * (cap - *q) / slack;
            }
        } else {
            let mass: f64 = vec.iter().sum();
            if mass <= 0.0 {
                return;
            }
            for q in vec.iter_mut() {
                *q += diff * *q / mass;
            }
        }
    }
}

/// Per-member report for the cooperation profit properties.
#[derive(Debug, Clone)]
pub struct MemberProfits {
    pub id: usize,
    /// `q_i` in the retailer-only coalition and in the with-supplier plan.
    pub q_in_coalition: f64,
    pub q_with_supplier: f64,
    /// Residual of the decomposition identity
    /// `ret(q; c) = ret(q; w) + sup(q; w)` at the coalition optimum.
    pub decomposition_residual: f64,
    /// `ret(q^c; c) - ret(q^S; c)`: gain from re-optimizing at cost.
    pub reoptimization_margin: f64,
    /// `ret(q^c; c) - ret(q^S; w)`: strict dominance over the retail part.
    pub dominance_retail_margin: f64,
    /// `ret(q^c; c) - sup(q^S; w)`: strict dominance over the supplier part.
    pub dominance_supplier_margin: f64,
}

/// Aggregate verdicts for the three cooperation profit properties.
#[derive(Debug, Clone)]
pub struct CooperationReport {
    pub members: Vec<MemberProfits>,
    pub decomposition_ok: bool,
    pub reoptimization_ok: bool,
    pub dominance_ok: bool,
}

/// Verifies, member by member, that profits decompose exactly, that the
/// with-supplier order dominates the coalition order at unit cost, and
/// that it strictly dominates both decentralized profit parts.
pub fn check_cooperation_profits(
    sit: &RsSituation,
    members: &[usize],
) -> Result<CooperationReport> {
    let ids = normalize_members(sit, members, false)?;
    let coalition = solve_coalition(sit, &ids)?;
    let with_supplier = solve_with_supplier(sit, &ids)?;
    let w_at_total = coalition.unit_price;
    let mut rows = Vec::with_capacity(ids.len());
    let (mut all_decompose, mut all_reoptimize, mut all_dominate) = (true, true, true);
    for (idx, &id) in ids.iter().enumerate() {
        let p = &sit.prices[id - 1];
        let q_s = coalition.quantities[idx];
        let q_c = with_supplier.quantities[idx];
        let at_cost = retailer_profit(p, q_s, sit.c);
        let retail_part = retailer_profit(p, q_s, w_at_total);
        let supplier_part = supplier_profit(q_s, w_at_total, sit.c);
        let best_at_cost = retailer_profit(p, q_c, sit.c);
        let row = MemberProfits {
            id,
            q_in_coalition: q_s,
            q_with_supplier: q_c,
            decomposition_residual: at_cost - (retail_part + supplier_part),
            reoptimization_margin: best_at_cost - at_cost,
            dominance_retail_margin: best_at_cost - retail_part,
            dominance_supplier_margin: best_at_cost - supplier_part,
        };
        let scale = at_cost.abs().max(1.0);
        all_decompose &= row.decomposition_residual.abs() <= tol::IDENTITY_EPS * scale;
        all_reoptimize &= row.reoptimization_margin >= -tol::CMP_EPS * scale;
        all_dominate &= row.dominance_retail_margin > -tol::CMP_EPS * scale
            && row.dominance_supplier_margin > -tol::CMP_EPS * scale;
        rows.push(row);
    }
    Ok(CooperationReport {
        members: rows,
        decomposition_ok: all_decompose,
        reoptimization_ok: all_reoptimize,
        dominance_ok: all_dominate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn retailer_unique_optimum() {
        let sol = solve_retailer(&fixtures::chain_single_kink()).unwrap();
        assert!((sol.quantities[0] - 2.5).abs() < 1e-9);
        assert!((sol.value - 3.25).abs() < 1e-9);
        assert_eq!(sol.alternates.len(), 1);
        assert!((sol.unit_price - 3.2).abs() < 1e-9);
    }

    #[test]
    fn retailer_two_optima() {
        let sol = solve_retailer(&fixtures::chain_single_twin()).unwrap();
        assert!((sol.value - 1.25).abs() < 1e-9);
        assert_eq!(sol.alternates.len(), 2, "alternates: {:?}", sol.alternates);
        assert!((sol.alternates[0][0] - 1.5).abs() < 1e-9);
        assert!((sol.alternates[1][0] - 2.5).abs() < 1e-9);
        // Reported order is the smallest optimum.
        assert!((sol.quantities[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn retailer_wide_chain() {
        let sit = fixtures::chain_pair_wide();
        let sol = solve_coalition(&sit, &[1]).unwrap();
        assert!((sol.quantities[0] - 49.0).abs() < 1e-9);
        assert!((sol.value - 1100.5).abs() < 1e-9);
    }

    #[test]
    fn coalition_pair() {
        let sit = fixtures::chain_pair();
        let sol = solve_coalition(&sit, &[1, 2]).unwrap();
        assert!((sol.value - 12.25).abs() < 1e-7, "value {}", sol.value);
        assert!((sol.quantities[0] - 2.5).abs() < 1e-6);
        assert!((sol.quantities[1] - 3.0).abs() < 1e-6);
        assert!((sol.total - 5.5).abs() < 1e-6);
        // The optimum is unique; near-best grid points all polish into it.
        assert_eq!(sol.alternates.len(), 1);
    }

    #[test]
    fn coalition_pair_wide() {
        let sit = fixtures::chain_pair_wide();
        let sol = solve_coalition(&sit, &[1, 2]).unwrap();
        assert!((sol.value - 2301.0).abs() < 1e-6, "value {}", sol.value);
        assert!((sol.quantities[0] - 49.0).abs() < 1e-5);
        assert!((sol.quantities[1] - 49.0).abs() < 1e-5);
    }

    #[test]
    fn singleton_coalition_matches_retailer_solver() {
        let sit = fixtures::chain_pair();
        let lone = solve_coalition(&sit, &[2]).unwrap();
        let direct = solve_retailer(&sit.problem(2).unwrap()).unwrap();
        assert!((lone.value - direct.value).abs() < 1e-12);
        assert!((lone.quantities[0] - direct.quantities[0]).abs() < 1e-12);
        assert_eq!(lone.members, vec![2]);
    }

    #[test]
    fn with_supplier_separates() {
        let sit = fixtures::chain_pair();
        let one = solve_with_supplier(&sit, &[1]).unwrap();
        assert!((one.quantities[0] - 2.5).abs() < 1e-9);
        assert!((one.value - 6.25).abs() < 1e-9);
        assert_eq!(one.unit_price, 2.0);

        let wide = fixtures::chain_pair_wide();
        let both = solve_with_supplier(&wide, &[1, 2]).unwrap();
        assert!((both.quantities[0] - 48.2).abs() < 1e-9);
        assert!((both.quantities[1] - 48.2).abs() < 1e-9);
        assert!((both.value - 2323.24).abs() < 1e-9);

        let none = solve_with_supplier(&wide, &[]).unwrap();
        assert_eq!(none.value, 0.0);
        assert_eq!(none.total, 0.0);
    }

    #[test]
    fn with_supplier_value_adds_up() {
        let sit = fixtures::chain_pair_wide();
        let joint = solve_with_supplier(&sit, &[1, 2]).unwrap();
        let solo: f64 = (1..=2).map(|i| solve_with_supplier(&sit, &[i]).unwrap().value).sum();
        assert_eq!(joint.value, solo);
    }

    #[test]
    fn invalid_problems_are_rejected_before_solving() {
        // Price at zero does not exceed the wholesale price at zero.
        let prob =
            RsProblem::new(1.0, PiecewiseCurve::constant(7.0), PiecewiseCurve::affine(6.0, -1.0));
        assert!(matches!(solve_retailer(&prob), Err(RsError::ModelAssumption(_))));
    }

    #[test]
    fn empty_coalition_is_rejected() {
        let sit = fixtures::chain_pair();
        assert!(matches!(solve_coalition(&sit, &[]), Err(RsError::InvalidArgument(_))));
        assert!(matches!(solve_coalition(&sit, &[7]), Err(RsError::InvalidArgument(_))));
    }

    #[test]
    fn cooperation_profits_pair() {
        let sit = fixtures::chain_pair();
        let report = check_cooperation_profits(&sit, &[1, 2]).unwrap();
        assert!(report.decomposition_ok);
        assert!(report.reoptimization_ok);
        assert!(report.dominance_ok);
        // Orders coincide here, so re-optimization gains nothing.
        for row in &report.members {
            assert!(row.reoptimization_margin.abs() < 1e-6);
            assert!(row.dominance_retail_margin > 0.0);
            assert!(row.dominance_supplier_margin > 0.0);
        }
        // For singleton coalitions the dominance margin reduces to the gap
        // between the supplier-pair value and the stand-alone value.
        let solo1 = check_cooperation_profits(&sit, &[1]).unwrap();
        assert!((solo1.members[0].dominance_retail_margin - (6.25 - 3.25)).abs() < 1e-6);
        let solo2 = check_cooperation_profits(&sit, &[2]).unwrap();
        assert!((solo2.members[0].dominance_retail_margin - (9.0 - 6.0)).abs() < 1e-6);
    }

    #[test]
    fn cooperation_profits_wide_pair_strict() {
        let sit = fixtures::chain_pair_wide();
        let report = check_cooperation_profits(&sit, &[1, 2]).unwrap();
        assert!(report.decomposition_ok && report.reoptimization_ok && report.dominance_ok);
        for row in &report.members {
            assert!((row.q_in_coalition - 49.0).abs() < 1e-5);
            assert!((row.q_with_supplier - 48.2).abs() < 1e-9);
            assert!(row.reoptimization_margin > 0.1);
        }
    }

    #[test]
    fn cooperation_identity_is_exact_for_constant_wholesale() {
        let p = PiecewiseCurve::affine(9.0, -1.0);
        let w = PiecewiseCurve::constant(4.0);
        let prob = RsProblem::new(2.0, w, p);
        let sit = fixtures::as_situation(&prob);
        let report = check_cooperation_profits(&sit, &[1]).unwrap();
        assert_eq!(report.members[0].decomposition_residual, 0.0);
    }
}
