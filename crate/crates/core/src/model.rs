//! Retailer-supplier problems and situations.
//!
//! A single-retailer problem is a production cost `c`, a wholesale price
//! curve `w` and an expected consumer price curve `p`. A situation bundles
//! one supplier (player 0) with `n` retailers (players 1..=n) that share
//! `c` and `w` but sell on independent markets, each with its own price
//! curve.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RsError};
use crate::piecewise::{crossing, PiecewiseCurve};
use crate::tol;

/// One retailer facing a supplier: the tuple `(c, w, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RsProblem {
    /// Production cost per unit.
    pub c: f64,
    /// Wholesale price per unit as a function of the order size.
    pub w: PiecewiseCurve,
    /// Expected consumer price per unit as a function of the supply.
    pub p: PiecewiseCurve,
}

impl RsProblem {
    pub fn new(c: f64, w: PiecewiseCurve, p: PiecewiseCurve) -> Self {
        RsProblem { c, w, p }
    }

    /// All violated standing assumptions, empty when the problem is valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> =
            self.w.validate().iter().map(|v| format!("wholesale curve: {v}")).collect();
        out.extend(self.p.validate().iter().map(|v| format!("price curve: {v}")));
        if !out.is_empty() {
            return out;
        }
        if !self.c.is_finite() || self.c <= 0.0 {
            out.push(format!("production cost {} must be positive and finite", self.c));
            return out;
        }
        let p0 = self.p.eval(0.0).unwrap_or(f64::NAN);
        let w0 = self.w.eval(0.0).unwrap_or(f64::NAN);
        if !(p0 > w0) {
            out.push(format!("p(0) = {p0} must exceed w(0) = {w0}"));
        }
        // A quantity with p(q) = c must exist; otherwise profits are
        // unbounded and the chain has no finite optimum.
        match self.p.sup_at_least(self.c) {
            None => out.push(format!("price curve starts below the production cost {}", self.c)),
            Some(q_star) if !q_star.is_finite() => {
                out.push(format!("price never falls to the production cost {}", self.c))
            }
            Some(q_star) => {
                // The wholesale price must stay above cost on the search
                // domain [0, q_star]; w is non-increasing so its infimum
                // there is w(q_star).
                let w_inf = self.w.eval(q_star).unwrap_or(f64::NAN);
                if !(w_inf > self.c) {
                    out.push(format!(
                        "wholesale price {w_inf} at q = {q_star} does not exceed the production cost {}",
                        self.c
                    ));
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(RsError::ModelAssumption(v.join("; ")))
        }
    }

    /// Right edge of the feasible order set `{q : p(q) >= w(q)}`.
    pub fn feasible_upper(&self) -> Option<f64> {
        crossing(&self.p, &self.w)
    }

    /// Largest order with a nonnegative margin over the production cost.
    pub fn cost_upper(&self) -> Option<f64> {
        self.p.sup_at_least(self.c)
    }
}

/// A supplier plus `n` retailers: the tuple `(N0, c, w, P)`.
///
/// Retailer ids are `1..=n`; id 0 denotes the supplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SituationDto", into = "SituationDto")]
pub struct RsSituation {
    pub c: f64,
    pub w: PiecewiseCurve,
    /// One expected price curve per retailer, index 0 holding retailer 1.
    pub prices: Vec<PiecewiseCurve>,
}

impl RsSituation {
    pub fn new(c: f64, w: PiecewiseCurve, prices: Vec<PiecewiseCurve>) -> Self {
        RsSituation { c, w, prices }
    }

    /// Number of retailers.
    pub fn n(&self) -> usize {
        self.prices.len()
    }

    /// Retailer ids, `1..=n`.
    pub fn retailer_ids(&self) -> impl Iterator<Item = usize> {
        1..=self.n()
    }

    /// The single-retailer problem seen by retailer `id`.
    pub fn problem(&self, id: usize) -> Result<RsProblem> {
        let p = self
            .prices
            .get(id.wrapping_sub(1))
            .ok_or_else(|| RsError::InvalidArgument(format!("unknown retailer id {id}")))?;
        Ok(RsProblem::new(self.c, self.w.clone(), p.clone()))
    }

    /// Restriction to a subset of retailers (same supplier, cost and
    /// wholesale curve), reindexing the kept retailers to `1..=k`.
    pub fn restrict(&self, members: &[usize]) -> Result<RsSituation> {
        let mut ids: Vec<usize> = members.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let prices = ids
            .iter()
            .map(|&i| {
                self.prices
                    .get(i.wrapping_sub(1))
                    .cloned()
                    .ok_or_else(|| RsError::InvalidArgument(format!("unknown retailer id {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RsSituation::new(self.c, self.w.clone(), prices))
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.prices.is_empty() {
            out.push("a situation needs at least one retailer".to_string());
            return out;
        }
        let mut total_upper = 0.0;
        for id in self.retailer_ids() {
            let prob = self.problem(id).expect("id in range");
            for v in prob.violations() {
                out.push(format!("retailer {id}: {v}"));
            }
            if let Some(u) = prob.cost_upper() {
                total_upper += u;
            }
        }
        if out.is_empty() {
            // Joint orders can reach the sum of the individual caps; the
            // wholesale price must stay above cost out to that total.
            let w_inf = self.w.eval(total_upper).unwrap_or(f64::NAN);
            if !(w_inf > self.c) {
                out.push(format!(
                    "wholesale price {w_inf} at the joint order cap {total_upper} does not exceed the production cost {}",
                    self.c
                ));
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(RsError::ModelAssumption(v.join("; ")))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RetailerDto {
    id: usize,
    p: PiecewiseCurve,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SituationDto {
    c: f64,
    w: PiecewiseCurve,
    retailers: Vec<RetailerDto>,
}

impl From<RsSituation> for SituationDto {
    fn from(s: RsSituation) -> Self {
        SituationDto {
            c: s.c,
            w: s.w,
            retailers: s
                .prices
                .into_iter()
                .enumerate()
                .map(|(i, p)| RetailerDto { id: i + 1, p })
                .collect(),
        }
    }
}

impl TryFrom<SituationDto> for RsSituation {
    type Error = String;

    fn try_from(dto: SituationDto) -> std::result::Result<Self, String> {
        let n = dto.retailers.len();
        let mut prices = vec![None; n];
        for r in dto.retailers {
            if r.id == 0 {
                return Err("retailer id 0 is reserved for the supplier".to_string());
            }
            if r.id > n {
                return Err(format!("retailer ids must be 1..={n} contiguous, got {}", r.id));
            }
            if prices[r.id - 1].is_some() {
                return Err(format!("duplicate retailer id {}", r.id));
            }
            prices[r.id - 1] = Some(r.p);
        }
        let prices: Vec<PiecewiseCurve> = prices.into_iter().map(Option::unwrap).collect();
        Ok(RsSituation { c: dto.c, w: dto.w, prices })
    }
}

/// Retailer profit `(p(q) - unit_price) * q` at order size `q`.
///
/// # Panics
/// Panics when `q` is negative.
pub fn retailer_profit(p: &PiecewiseCurve, q: f64, unit_price: f64) -> f64 {
    let price = p.eval(q).expect("order quantity must be nonnegative");
    (price - unit_price) * q
}

/// Supplier profit `(unit_price - c) * q` from an order of size `q`.
pub fn supplier_profit(q: f64, unit_price: f64, c: f64) -> f64 {
    (unit_price - c) * q
}

/// Scale-aware check that two profits agree to `eps`.
pub fn profits_close(a: f64, b: f64, eps: f64) -> bool {
    tol::close(a, b, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn retailer_profit_reference_points() {
        let prob = fixtures::chain_single_kink();
        let w_q = prob.w.eval(2.5).unwrap();
        assert!((w_q - 3.2).abs() < 1e-12);
        assert!((retailer_profit(&prob.p, 2.5, w_q) - 3.25).abs() < 1e-12);
        assert_eq!(retailer_profit(&prob.p, 0.0, 4.0), 0.0);

        let wide = fixtures::chain_pair_wide();
        assert!((retailer_profit(&wide.prices[0], 48.2, 1.8) - 1161.62).abs() < 1e-9);
    }

    #[test]
    fn supplier_profit_reference_points() {
        assert!((supplier_profit(2.5, 3.2, 2.0) - 3.0).abs() < 1e-12);
        assert!((supplier_profit(2.5, 3.25, 1.0) - 5.625).abs() < 1e-12);
        assert_eq!(supplier_profit(0.0, 9.0, 1.0), 0.0);
    }

    #[test]
    fn reference_instances_are_valid() {
        assert!(fixtures::chain_single_kink().violations().is_empty());
        assert!(fixtures::chain_single_twin().violations().is_empty());
        assert!(fixtures::chain_pair().violations().is_empty());
        assert!(fixtures::chain_pair_steep().violations().is_empty());
        assert!(fixtures::chain_pair_wide().violations().is_empty());
    }

    #[test]
    fn violations_catch_broken_assumptions() {
        // p(0) <= w(0)
        let bad =
            RsProblem::new(1.0, PiecewiseCurve::constant(7.0), PiecewiseCurve::affine(7.0, -1.0));
        assert!(bad.violations().iter().any(|v| v.contains("p(0)")));

        // w never above c is fine, but w below c is not.
        let bad =
            RsProblem::new(5.0, PiecewiseCurve::constant(4.0), PiecewiseCurve::affine(10.0, -1.0));
        assert!(!bad.violations().is_empty());

        // p never reaches c.
        let bad = RsProblem::new(1.0, PiecewiseCurve::constant(2.0), PiecewiseCurve::constant(3.0));
        assert!(bad.violations().iter().any(|v| v.contains("never falls to the production cost")));
    }

    #[test]
    fn situation_json_roundtrip() {
        let sit = fixtures::chain_pair();
        let text = serde_json::to_string(&sit).unwrap();
        assert!(text.contains("\"retailers\""));
        let back: RsSituation = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sit);
    }

    #[test]
    fn situation_json_requires_contiguous_ids() {
        let text = r#"{"c": 1.0, "w": {"domain_lo": 0.0, "segments": [{"lo": 0, "hi": "inf", "alpha": 2, "beta": 0, "gamma": 0}]},
                       "retailers": [{"id": 2, "p": {"domain_lo": 0.0, "segments": [{"lo": 0, "hi": "inf", "alpha": 5, "beta": -1, "gamma": 0}]}}]}"#;
        assert!(serde_json::from_str::<RsSituation>(text).is_err());
    }
}
