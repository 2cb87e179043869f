//! Core membership, the altruistic allocation, and the correspondence
//! between core allocations and per-retailer wholesale prices.
//!
//! For induced games the core has a reduced description: efficiency, a
//! per-retailer upper bound at the supplier-pair value, and lower bounds
//! for retailer-only coalitions. The full-enumeration check is kept
//! alongside as an independent route; the two must always agree.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RsError};
use crate::game::{ids_of, mask_of, RsGame};
use crate::model::RsSituation;
use crate::solve::solve_with_supplier;

/// Where a payoff vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocationLabel {
    Altruistic,
    Mgpc,
    Shapley,
    User,
}

/// A payoff vector over the players, supplier first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Allocation {
    pub label: AllocationLabel,
    pub payoffs: Vec<f64>,
}

impl Allocation {
    pub fn new(label: AllocationLabel, payoffs: Vec<f64>) -> Self {
        Allocation { label, payoffs }
    }

    pub fn supplier(&self) -> f64 {
        self.payoffs[0]
    }

    pub fn retailer(&self, id: usize) -> f64 {
        self.payoffs[id]
    }

    pub fn total(&self) -> f64 {
        self.payoffs.iter().sum()
    }
}

/// Per-retailer wholesale prices implementing a core allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceVector {
    pub prices: Vec<f64>,
}

/// The condition a rejected allocation violated.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreFailure {
    Efficiency { total: f64, target: f64 },
    PairUpperBound { retailer: usize, payoff: f64, bound: f64 },
    CoalitionLowerBound { coalition: Vec<usize>, sum: f64, needed: f64 },
}

impl std::fmt::Display for CoreFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoreFailure::Efficiency { total, target } => {
                write!(f, "payoffs sum to {total}, the grand coalition value is {target}")
            }
            CoreFailure::PairUpperBound { retailer, payoff, bound } => {
                write!(
                    f,
                    "retailer {retailer} receives {payoff}, above its supplier-pair value {bound}"
                )
            }
            CoreFailure::CoalitionLowerBound { coalition, sum, needed } => {
                let ids: Vec<String> = coalition.iter().map(|i| i.to_string()).collect();
                write!(
                    f,
                    "coalition {{{}}} receives {sum}, below its value {needed}",
                    ids.join(",")
                )
            }
        }
    }
}

/// Membership verdict with the first violated condition on rejection. The
/// raw residual is kept so callers can assert on signs, not just booleans.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreDecision {
    pub member: bool,
    pub failure: Option<CoreFailure>,
    pub residual: f64,
}

impl CoreDecision {
    fn pass() -> Self {
        CoreDecision { member: true, failure: None, residual: 0.0 }
    }

    fn fail(failure: CoreFailure, residual: f64) -> Self {
        CoreDecision { member: false, failure: Some(failure), residual }
    }
}

fn check_length(game: &RsGame, x: &Allocation) -> Result<()> {
    if x.payoffs.len() != game.num_players() {
        return Err(RsError::InvalidArgument(format!(
            "allocation has {} payoffs, the game has {} players",
            x.payoffs.len(),
            game.num_players()
        )));
    }
    Ok(())
}

fn coalition_sum(x: &Allocation, mask: u32) -> f64 {
    ids_of(mask).iter().map(|&i| x.payoffs[i]).sum()
}

/// Reduced membership test for induced games: efficiency, per-retailer
/// upper bounds, and lower bounds over retailer-only coalitions.
pub fn in_core_reduced(game: &RsGame, x: &Allocation, eps: f64) -> Result<CoreDecision> {
    check_length(game, x)?;
    let target = game.value(game.grand_mask());
    let total = x.total();
    let scale = total.abs().max(target.abs()).max(1.0);
    if (total - target).abs() > eps * scale {
        return Ok(CoreDecision::fail(CoreFailure::Efficiency { total, target }, total - target));
    }
    for i in 1..=game.n() {
        let bound = game.value(mask_of(&[0, i]));
        let payoff = x.payoffs[i];
        if payoff > bound + eps * bound.abs().max(payoff.abs()).max(1.0) {
            return Ok(CoreDecision::fail(
                CoreFailure::PairUpperBound { retailer: i, payoff, bound },
                payoff - bound,
            ));
        }
    }
    for mask in game.retailer_coalitions() {
        let needed = game.value(mask);
        let sum = coalition_sum(x, mask);
        if sum < needed - eps * needed.abs().max(sum.abs()).max(1.0) {
            return Ok(CoreDecision::fail(
                CoreFailure::CoalitionLowerBound { coalition: ids_of(mask), sum, needed },
                sum - needed,
            ));
        }
    }
    Ok(CoreDecision::pass())
}

/// Unreduced membership test: efficiency plus the stability condition for
/// every proper nonempty coalition. Valid for arbitrary games and used as
/// the independent check of the reduced description.
pub fn in_core_full(game: &RsGame, x: &Allocation, eps: f64) -> Result<CoreDecision> {
    check_length(game, x)?;
    let full = game.grand_mask();
    let target = game.value(full);
    let total = x.total();
    let scale = total.abs().max(target.abs()).max(1.0);
    if (total - target).abs() > eps * scale {
        return Ok(CoreDecision::fail(CoreFailure::Efficiency { total, target }, total - target));
    }
    for mask in 1..full {
        let needed = game.value(mask);
        let sum = coalition_sum(x, mask);
        if sum < needed - eps * needed.abs().max(sum.abs()).max(1.0) {
            return Ok(CoreDecision::fail(
                CoreFailure::CoalitionLowerBound { coalition: ids_of(mask), sum, needed },
                sum - needed,
            ));
        }
    }
    Ok(CoreDecision::pass())
}

/// The allocation that hands each retailer its full supplier-pair value
/// and the supplier nothing. Always a core member for induced games.
pub fn altruistic(game: &RsGame) -> Allocation {
    let mut payoffs = vec![0.0];
    for i in 1..=game.n() {
        payoffs.push(game.value(mask_of(&[0, i])));
    }
    Allocation::new(AllocationLabel::Altruistic, payoffs)
}

/// Per-retailer data behind the price correspondence: the optimal order
/// `q_i` under cooperation with the supplier, and the consumer price
/// `p_i(q_i)` at that order.
#[derive(Debug, Clone)]
pub struct PairOptimum {
    pub q: f64,
    pub price_at_q: f64,
}

pub fn with_supplier_optima(sit: &RsSituation) -> Result<Vec<PairOptimum>> {
    sit.retailer_ids()
        .map(|i| {
            let sol = solve_with_supplier(sit, &[i])?;
            let q = sol.quantities[0];
            let price_at_q = sit.prices[i - 1].eval(q)?;
            Ok(PairOptimum { q, price_at_q })
        })
        .collect()
}

/// Inverts `payoff = (price_at_q - w) * q` for the wholesale price `w`.
pub fn payoff_to_price(payoff: f64, optimum: &PairOptimum, retailer: usize) -> Result<f64> {
    if optimum.q <= 1e-12 {
        return Err(RsError::DegenerateRetailer(retailer));
    }
    Ok(optimum.price_at_q - payoff / optimum.q)
}

fn price_to_payoff(price: f64, optimum: &PairOptimum) -> f64 {
    (optimum.price_at_q - price) * optimum.q
}

/// Translates a core allocation into the fixed per-retailer wholesale
/// prices that implement it: retailer `i` buys `q_i` at `w_i` and keeps
/// `x_i = (p_i(q_i) - w_i) q_i`, the supplier keeps the margins.
pub fn prices_from_allocation(
    sit: &RsSituation,
    game: &RsGame,
    x: &Allocation,
    eps: f64,
) -> Result<PriceVector> {
    check_length(game, x)?;
    let decision = in_core_full(game, x, eps)?;
    if !decision.member {
        return Err(RsError::NotInCore(
            decision.failure.map(|f| f.to_string()).unwrap_or_default(),
        ));
    }
    let optima = with_supplier_optima(sit)?;
    let prices = optima
        .iter()
        .enumerate()
        .map(|(idx, opt)| payoff_to_price(x.payoffs[idx + 1], opt, idx + 1))
        .collect::<Result<Vec<f64>>>()?;

    // The supplier share must be exactly the collected margins.
    let margins: f64 = prices.iter().zip(&optima).map(|(&w, o)| (w - sit.c) * o.q).sum();
    let scale = margins.abs().max(x.supplier().abs()).max(1.0);
    if (margins - x.supplier()).abs() > eps * scale {
        return Err(RsError::ModelAssumption(format!(
            "supplier share {} does not match the price margins {margins}",
            x.supplier()
        )));
    }
    check_price_bounds(game, &optima, &prices, eps)?;
    Ok(PriceVector { prices })
}

/// Translates fixed per-retailer wholesale prices into the allocation they
/// implement, after checking the coalition bounds that make it stable.
pub fn allocation_from_prices(
    sit: &RsSituation,
    game: &RsGame,
    prices: &PriceVector,
    eps: f64,
) -> Result<Allocation> {
    if prices.prices.len() != game.n() {
        return Err(RsError::InvalidArgument(format!(
            "price vector has {} entries, the game has {} retailers",
            prices.prices.len(),
            game.n()
        )));
    }
    let optima = with_supplier_optima(sit)?;
    for (idx, &w) in prices.prices.iter().enumerate() {
        if w < sit.c - eps * sit.c.abs().max(1.0) {
            return Err(RsError::PriceBoundViolation(format!("{}", idx + 1)));
        }
    }
    check_price_bounds(game, &optima, &prices.prices, eps)?;
    let mut payoffs = vec![0.0; game.num_players()];
    for (idx, (&w, opt)) in prices.prices.iter().zip(&optima).enumerate() {
        payoffs[idx + 1] = price_to_payoff(w, opt);
        payoffs[0] += (w - sit.c) * opt.q;
    }
    let allocation = Allocation::new(AllocationLabel::User, payoffs);
    let decision = in_core_full(game, &allocation, eps)?;
    if !decision.member {
        return Err(RsError::NotInCore(
            decision.failure.map(|f| f.to_string()).unwrap_or_default(),
        ));
    }
    Ok(allocation)
}

/// For every retailer coalition `S`, fixed prices must leave `S` at least
/// its stand-alone value: `sum_{i in S} q_i w_i <= sum p_i(q_i) q_i - v(S)`.
fn check_price_bounds(
    game: &RsGame,
    optima: &[PairOptimum],
    prices: &[f64],
    eps: f64,
) -> Result<()> {
    for mask in game.retailer_coalitions() {
        let ids = ids_of(mask);
        let lhs: f64 = ids.iter().map(|&i| optima[i - 1].q * prices[i - 1]).sum();
        let revenue: f64 = ids.iter().map(|&i| optima[i - 1].price_at_q * optima[i - 1].q).sum();
        let bound = revenue - game.value(mask);
        if lhs > bound + eps * lhs.abs().max(bound.abs()).max(1.0) {
            let ids_text: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
            return Err(RsError::PriceBoundViolation(ids_text.join(",")));
        }
    }
    Ok(())
}

/// Price interval implementing some core allocation for each retailer:
/// `[c, p_i(q_i) - v({i})/q_i]`.
pub fn price_bounds(sit: &RsSituation, game: &RsGame) -> Result<Vec<(f64, f64)>> {
    let optima = with_supplier_optima(sit)?;
    optima
        .iter()
        .enumerate()
        .map(|(idx, opt)| {
            let i = idx + 1;
            let upper = payoff_to_price(game.value(mask_of(&[i])), opt, i)?;
            Ok((sit.c, upper))
        })
        .collect()
}

/// Right-hand side of the price bound for a retailer coalition, paired
/// with the per-member order sizes `q_i` that weight the prices.
pub fn coalition_price_bound(
    sit: &RsSituation,
    game: &RsGame,
    members: &[usize],
) -> Result<(Vec<f64>, f64)> {
    let optima = with_supplier_optima(sit)?;
    let mask = mask_of(members);
    let weights: Vec<f64> = members.iter().map(|&i| optima[i - 1].q).collect();
    let revenue: f64 = members.iter().map(|&i| optima[i - 1].price_at_q * optima[i - 1].q).sum();
    Ok((weights, revenue - game.value(mask)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::build_game;
    use crate::tol;

    fn pair() -> (RsSituation, RsGame) {
        let sit = fixtures::chain_pair();
        let game = build_game(&sit).unwrap();
        (sit, game)
    }

    fn wide() -> (RsSituation, RsGame) {
        let sit = fixtures::chain_pair_wide();
        let game = build_game(&sit).unwrap();
        (sit, game)
    }

    fn user(payoffs: Vec<f64>) -> Allocation {
        Allocation::new(AllocationLabel::User, payoffs)
    }

    #[test]
    fn altruistic_allocations() {
        let (_, game) = pair();
        assert_eq!(altruistic(&game).payoffs.len(), 3);
        assert!((altruistic(&game).payoffs[1] - 6.25).abs() < 1e-9);
        assert!((altruistic(&game).payoffs[2] - 9.0).abs() < 1e-9);
        assert_eq!(altruistic(&game).payoffs[0], 0.0);

        let (_, game) = wide();
        assert!((altruistic(&game).payoffs[1] - 1161.62).abs() < 1e-6);

        let lone = build_game(&fixtures::as_situation(&fixtures::chain_single_kink())).unwrap();
        let x = altruistic(&lone);
        assert_eq!(x.payoffs.len(), 2);
        assert!((x.payoffs[1] - lone.value_of(&[0, 1])).abs() < 1e-12);
    }

    #[test]
    fn reduced_membership_verdicts() {
        let (_, game) = pair();
        let yes = in_core_reduced(&game, &user(vec![0.0, 6.25, 9.0]), tol::CMP_EPS).unwrap();
        assert!(yes.member);

        let no = in_core_reduced(&game, &user(vec![15.25, 0.0, 0.0]), tol::CMP_EPS).unwrap();
        assert!(!no.member);
        match no.failure.unwrap() {
            CoreFailure::CoalitionLowerBound { coalition, .. } => assert_eq!(coalition, vec![1]),
            other => panic!("unexpected failure {other:?}"),
        }

        let (_, game) = wide();
        let mgpc_like = user(vec![22.24, 1150.5, 1150.5]);
        assert!(in_core_reduced(&game, &mgpc_like, tol::CMP_EPS).unwrap().member);
    }

    #[test]
    fn reduced_and_full_agree_on_handpicked_points() {
        let (_, game) = pair();
        for payoffs in [
            vec![0.0, 6.25, 9.0],
            vec![15.25, 0.0, 0.0],
            vec![3.0, 4.75, 7.5],
            vec![3.0, 3.25, 9.0],
            vec![1.0, 5.0, 9.25],
        ] {
            let x = user(payoffs);
            let a = in_core_reduced(&game, &x, tol::CMP_EPS).unwrap().member;
            let b = in_core_full(&game, &x, tol::CMP_EPS).unwrap().member;
            assert_eq!(a, b, "disagreement on {:?}", x.payoffs);
        }
    }

    #[test]
    fn marginal_vector_of_the_pair_game_is_in_core() {
        // Marginal contributions in the player order (1, 2, 0).
        let (_, game) = pair();
        let m1 = game.value_of(&[1]);
        let m2 = game.value_of(&[1, 2]) - game.value_of(&[1]);
        let m0 = game.value_of(&[0, 1, 2]) - game.value_of(&[1, 2]);
        let x = user(vec![m0, m1, m2]);
        assert!(in_core_full(&game, &x, tol::CMP_EPS).unwrap().member);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let (_, game) = pair();
        assert!(in_core_full(&game, &user(vec![1.0, 2.0]), tol::CMP_EPS).is_err());
    }

    #[test]
    fn wide_chain_prices_from_altruistic() {
        let (sit, game) = wide();
        let x = altruistic(&game);
        let prices = prices_from_allocation(&sit, &game, &x, tol::CMP_EPS).unwrap();
        assert!((prices.prices[0] - 1.8).abs() < 1e-9);
        assert!((prices.prices[1] - 1.8).abs() < 1e-9);
    }

    #[test]
    fn wide_chain_price_upper_bound() {
        let (sit, game) = wide();
        let optima = with_supplier_optima(&sit).unwrap();
        let w = payoff_to_price(1100.5, &optima[0], 1).unwrap();
        assert!((w - (3.0 + 82.0 / 1205.0)).abs() < 1e-9);

        let bounds = price_bounds(&sit, &game).unwrap();
        assert!((bounds[0].0 - 1.8).abs() < 1e-12);
        assert!((bounds[0].1 - (3.0 + 82.0 / 1205.0)).abs() < 1e-6);
    }

    #[test]
    fn wide_chain_pair_bound_is_tight_at_the_boundary() {
        let (sit, game) = wide();
        let (weights, bound) = coalition_price_bound(&sit, &game, &[1, 2]).unwrap();
        // Equal weights here, so the bound divides through to a price sum.
        assert!((weights[0] - weights[1]).abs() < 1e-9);
        let price_sum_bound = bound / weights[0];
        assert!((price_sum_bound - (4.0 + 74.0 / 1205.0)).abs() < 1e-6);

        // At the boundary the two retailers together keep exactly their
        // stand-alone coalition value.
        let half = price_sum_bound / 2.0;
        let x = allocation_from_prices(
            &sit,
            &game,
            &PriceVector { prices: vec![half, half] },
            tol::CMP_EPS,
        )
        .unwrap();
        assert!((x.payoffs[1] + x.payoffs[2] - 2301.0).abs() < 1e-6);
    }

    #[test]
    fn roundtrip_prices_and_payoffs() {
        let (sit, game) = wide();
        let x = altruistic(&game);
        let prices = prices_from_allocation(&sit, &game, &x, tol::CMP_EPS).unwrap();
        let back = allocation_from_prices(&sit, &game, &prices, tol::CMP_EPS).unwrap();
        for (a, b) in x.payoffs.iter().zip(&back.payoffs) {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
        let again = prices_from_allocation(&sit, &game, &back, tol::CMP_EPS).unwrap();
        for (a, b) in prices.prices.iter().zip(&again.prices) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn prices_below_cost_are_rejected() {
        let (sit, game) = wide();
        let err = allocation_from_prices(
            &sit,
            &game,
            &PriceVector { prices: vec![1.0, 1.8] },
            tol::CMP_EPS,
        );
        assert!(matches!(err, Err(RsError::PriceBoundViolation(_))));
    }

    #[test]
    fn non_core_allocation_gets_no_prices() {
        let (sit, game) = wide();
        let err =
            prices_from_allocation(&sit, &game, &user(vec![122.24, 1100.5, 1100.5]), tol::CMP_EPS);
        assert!(matches!(err, Err(RsError::NotInCore(_))));
    }

    #[test]
    fn degenerate_retailer_is_guarded() {
        let opt = PairOptimum { q: 0.0, price_at_q: 5.0 };
        assert!(matches!(payoff_to_price(1.0, &opt, 3), Err(RsError::DegenerateRetailer(3))));
    }
}
