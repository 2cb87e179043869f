//! Single-valued solutions: the minimal-gain-per-capita (mgpc) allocation,
//! the Shapley value, the axioms behind the mgpc characterization, and the
//! allocation formulas showing the axioms are logically independent.

use crate::core_analysis::{Allocation, AllocationLabel};
use crate::error::{Result, RsError};
use crate::game::{ids_of, mask_of, RsGame};

/// The mgpc solution: each retailer concedes the minimal gain per capita
/// `beta` to the supplier.
#[derive(Debug, Clone)]
pub struct MgpcResult {
    /// `min over nonempty retailer coalitions S of (v(S+0) - v(S)) / |S|`.
    pub beta: f64,
    /// All coalitions attaining the minimum.
    pub argmin_coalitions: Vec<Vec<usize>>,
    /// Payoffs: supplier `n*beta`, retailer `i` gets `v({0,i}) - beta`.
    pub allocation: Allocation,
}

/// Gain per capita from inviting the supplier into retailer coalition
/// `mask`.
fn gain_per_capita(game: &RsGame, mask: u32) -> f64 {
    let s = mask.count_ones() as f64;
    (game.value(mask | 1) - game.value(mask)) / s
}

pub fn mgpc(game: &RsGame) -> Result<MgpcResult> {
    if game.n() == 0 {
        return Err(RsError::InvalidArgument("the game has no retailers".into()));
    }
    let mut beta = f64::INFINITY;
    for mask in game.retailer_coalitions() {
        beta = beta.min(gain_per_capita(game, mask));
    }
    let argmin_coalitions: Vec<Vec<usize>> = game
        .retailer_coalitions()
        .filter(|&m| (gain_per_capita(game, m) - beta).abs() <= 1e-9 * beta.abs().max(1.0))
        .map(ids_of)
        .collect();
    let mut payoffs = vec![game.n() as f64 * beta];
    for i in 1..=game.n() {
        payoffs.push(game.value(mask_of(&[0, i])) - beta);
    }
    Ok(MgpcResult {
        beta,
        argmin_coalitions,
        allocation: Allocation::new(AllocationLabel::Mgpc, payoffs),
    })
}

/// Exact Shapley value via the subset-weighted sum of marginal
/// contributions. Refuses games beyond the exhaustive cap.
pub fn shapley(game: &RsGame) -> Result<Allocation> {
    let m = game.num_players();
    if m > 12 {
        return Err(RsError::PlayerCapExceeded(m, 12));
    }
    let mut factorial = vec![1.0f64; m + 1];
    for k in 1..=m {
        factorial[k] = factorial[k - 1] * k as f64;
    }
    let full = game.grand_mask();
    let mut payoffs = vec![0.0; m];
    for (i, payoff) in payoffs.iter_mut().enumerate() {
        let bit = 1u32 << i;
        let others = full & !bit;
        // Iterate subsets of the other players, including the empty set.
        let mut s = others;
        loop {
            let size = s.count_ones() as usize;
            let weight = factorial[size] * factorial[m - size - 1] / factorial[m];
            *payoff += weight * (game.value(s | bit) - game.value(s));
            if s == 0 {
                break;
            }
            s = (s - 1) & others;
        }
    }
    Ok(Allocation::new(AllocationLabel::Shapley, payoffs))
}

/// One axiom verdict with its numeric residual; `witness` names the
/// coalition (or pair) that realizes or breaks the axiom.
#[derive(Debug, Clone)]
pub struct AxiomCheck {
    pub pass: bool,
    pub residual: f64,
    pub witness: Option<Vec<usize>>,
}

/// Verdicts for the four characterizing axioms.
#[derive(Debug, Clone)]
pub struct AxiomReport {
    /// Efficiency: payoffs sum to the grand coalition value.
    pub efficiency: AxiomCheck,
    /// Retailer stability: no retailer coalition is paid below its value.
    pub retailer_stability: AxiomCheck,
    /// Retailer reduction: each retailer's concession equals the gain per
    /// capita of some coalition; one verdict per retailer.
    pub retailer_reduction: Vec<AxiomCheck>,
    /// Preservation of differences between retailers.
    pub difference_preservation: AxiomCheck,
}

impl AxiomReport {
    pub fn reduction_ok(&self) -> bool {
        self.retailer_reduction.iter().all(|c| c.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.efficiency.pass
            && self.retailer_stability.pass
            && self.reduction_ok()
            && self.difference_preservation.pass
    }
}

pub fn check_axioms(game: &RsGame, x: &Allocation, eps: f64) -> Result<AxiomReport> {
    if x.payoffs.len() != game.num_players() {
        return Err(RsError::InvalidArgument(format!(
            "allocation has {} payoffs, the game has {} players",
            x.payoffs.len(),
            game.num_players()
        )));
    }
    let target = game.value(game.grand_mask());
    let ef_residual = x.total() - target;
    let efficiency = AxiomCheck {
        pass: ef_residual.abs() <= eps * target.abs().max(1.0),
        residual: ef_residual,
        witness: None,
    };

    let mut sr_worst = f64::INFINITY;
    let mut sr_witness = None;
    for mask in game.retailer_coalitions() {
        let margin: f64 =
            ids_of(mask).iter().map(|&i| x.payoffs[i]).sum::<f64>() - game.value(mask);
        if margin < sr_worst {
            sr_worst = margin;
            sr_witness = Some(ids_of(mask));
        }
    }
    let retailer_stability = AxiomCheck {
        pass: sr_worst >= -eps * target.abs().max(1.0),
        residual: sr_worst,
        witness: sr_witness,
    };

    let retailer_reduction = (1..=game.n())
        .map(|i| {
            let concession = game.value(mask_of(&[0, i])) - x.payoffs[i];
            let mut best = f64::INFINITY;
            let mut witness = None;
            for mask in game.retailer_coalitions() {
                let gap = (gain_per_capita(game, mask) - concession).abs();
                if gap < best {
                    best = gap;
                    witness = Some(ids_of(mask));
                }
            }
            let pass = best <= eps * concession.abs().max(1.0);
            AxiomCheck { pass, residual: best, witness: if pass { witness } else { None } }
        })
        .collect();

    let mut pd_worst = 0.0f64;
    let mut pd_witness = None;
    for i in 1..=game.n() {
        for j in i + 1..=game.n() {
            let lhs = x.payoffs[i] - x.payoffs[j];
            let rhs = game.value(mask_of(&[0, i])) - game.value(mask_of(&[0, j]));
            let gap = (lhs - rhs).abs();
            if gap > pd_worst {
                pd_worst = gap;
                pd_witness = Some(vec![i, j]);
            }
        }
    }
    let difference_preservation = AxiomCheck {
        pass: pd_worst <= eps * target.abs().max(1.0),
        residual: pd_worst,
        witness: pd_witness,
    };

    Ok(AxiomReport { efficiency, retailer_stability, retailer_reduction, difference_preservation })
}

/// The four allocation formulas that each drop exactly one axiom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterexampleKind {
    /// Supplier gets nothing while retailers still concede `beta`.
    NoEfficiency,
    /// Concede the maximal gain per capita instead of the minimal one.
    NoRetailerStability,
    /// Concede `beta - 1`, which no coalition's gain per capita matches.
    NoRetailerReduction,
    /// Concede a per-retailer minimum over coalitions containing it.
    NoDifferencePreservation,
}

pub fn counterexample_solution(kind: CounterexampleKind, game: &RsGame) -> Result<Allocation> {
    let n = game.n();
    if n == 0 {
        return Err(RsError::InvalidArgument("the game has no retailers".into()));
    }
    let pair = |i: usize| game.value(mask_of(&[0, i]));
    let payoffs = match kind {
        CounterexampleKind::NoEfficiency => {
            let beta = mgpc(game)?.beta;
            let mut p = vec![0.0];
            p.extend((1..=n).map(|i| pair(i) - beta));
            p
        }
        CounterexampleKind::NoRetailerStability => {
            let beta_max = game
                .retailer_coalitions()
                .map(|m| gain_per_capita(game, m))
                .fold(f64::NEG_INFINITY, f64::max);
            let mut p = vec![n as f64 * beta_max];
            p.extend((1..=n).map(|i| pair(i) - beta_max));
            p
        }
        CounterexampleKind::NoRetailerReduction => {
            let shifted = mgpc(game)?.beta - 1.0;
            let mut p = vec![n as f64 * shifted];
            p.extend((1..=n).map(|i| pair(i) - shifted));
            p
        }
        CounterexampleKind::NoDifferencePreservation => {
            let beta_for = |i: usize| {
                game.retailer_coalitions()
                    .filter(|m| m & (1 << i) != 0)
                    .map(|m| gain_per_capita(game, m))
                    .fold(f64::INFINITY, f64::min)
            };
            let betas: Vec<f64> = (1..=n).map(beta_for).collect();
            let mut p = vec![betas.iter().sum()];
            p.extend((1..=n).map(|i| pair(i) - betas[i - 1]));
            p
        }
    };
    Ok(Allocation::new(AllocationLabel::User, payoffs))
}

/// Per-retailer minimal gain per capita over coalitions containing the
/// retailer. Distinct values across retailers are what the difference
/// preservation counterexample needs.
pub fn per_retailer_beta(game: &RsGame) -> Vec<f64> {
    (1..=game.n())
        .map(|i| {
            game.retailer_coalitions()
                .filter(|m| m & (1 << i) != 0)
                .map(|m| gain_per_capita(game, m))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}
