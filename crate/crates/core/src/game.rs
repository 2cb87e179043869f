//! Cooperative games induced by a retailers-supplier situation.
//!
//! Players are `{0, 1, ..., n}` with the supplier at 0. Coalitions are
//! bitmasks over the players (`bit 0` = supplier), so a game stores its
//! characteristic function as a dense vector indexed by mask.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RsError};
use crate::model::RsSituation;
use crate::solve::{solve_coalition, solve_with_supplier, CoalitionSolution};

/// Exhaustive enumeration cap on the retailer count.
pub const MAX_RETAILERS: usize = 12;

/// Bitmask of a set of player ids.
pub fn mask_of(ids: &[usize]) -> u32 {
    ids.iter().fold(0, |m, &i| m | (1 << i))
}

/// Player ids of a bitmask, ascending.
pub fn ids_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

fn format_ids(mask: u32) -> String {
    let ids: Vec<String> = ids_of(mask).iter().map(|i| i.to_string()).collect();
    ids.join(",")
}

/// The induced cooperative game: characteristic values for every coalition
/// of the supplier and the retailers, plus the order plans that produced
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct RsGame {
    n: usize,
    values: Vec<f64>,
    provenance: BTreeMap<u32, CoalitionSolution>,
}

impl RsGame {
    /// Wraps a raw characteristic function (no provenance). `values` is
    /// indexed by coalition mask and must cover all `2^(n+1)` coalitions.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1 << (n + 1) {
            return Err(RsError::InvalidArgument(format!(
                "expected {} coalition values for n = {n}, got {}",
                1 << (n + 1),
                values.len()
            )));
        }
        Ok(RsGame { n, values, provenance: BTreeMap::new() })
    }

    /// Number of retailers.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of players including the supplier.
    pub fn num_players(&self) -> usize {
        self.n + 1
    }

    /// Mask of the all-player coalition.
    pub fn grand_mask(&self) -> u32 {
        (1 << (self.n + 1)) - 1
    }

    /// Characteristic value of a coalition mask.
    pub fn value(&self, mask: u32) -> f64 {
        self.values[mask as usize]
    }

    /// Characteristic value of a coalition given as player ids.
    pub fn value_of(&self, ids: &[usize]) -> f64 {
        self.value(mask_of(ids))
    }

    /// The order plan that produced a coalition's value, when known.
    pub fn provenance(&self, mask: u32) -> Option<&CoalitionSolution> {
        self.provenance.get(&mask)
    }

    /// Masks of all nonempty retailer-only coalitions.
    pub fn retailer_coalitions(&self) -> impl Iterator<Item = u32> + '_ {
        (1u32..1 << self.n).map(|bits| bits << 1)
    }

    /// Masks of all nonempty coalitions (any players).
    pub fn coalitions(&self) -> impl Iterator<Item = u32> + '_ {
        1..=self.grand_mask()
    }
}

/// Builds the game from a situation: one joint-order solve per nonempty
/// retailer coalition, and one with-supplier solve per retailer. Values of
/// coalitions containing the supplier follow from the per-retailer solves
/// by separability, which makes the decomposition identity exact.
pub fn build_game(sit: &RsSituation) -> Result<RsGame> {
    sit.ensure_valid()?;
    let n = sit.n();
    if n > MAX_RETAILERS {
        return Err(RsError::PlayerCapExceeded(n, MAX_RETAILERS));
    }
    let mut values = vec![0.0; 1 << (n + 1)];
    let mut provenance = BTreeMap::new();

    let mut pair_values = vec![0.0; n + 1];
    for i in 1..=n {
        let sol = solve_with_supplier(sit, &[i])?;
        pair_values[i] = sol.value;
        provenance.insert(mask_of(&[0, i]), sol);
    }

    for bits in 1u32..1 << n {
        let retailer_mask = bits << 1;
        let ids = ids_of(retailer_mask);
        let sol = solve_coalition(sit, &ids)?;
        values[retailer_mask as usize] = sol.value;
        provenance.insert(retailer_mask, sol);

        let with_supplier_mask = retailer_mask | 1;
        values[with_supplier_mask as usize] = ids.iter().map(|&i| pair_values[i]).sum();
        if ids.len() > 1 {
            let quantities: Vec<f64> =
                ids.iter().map(|&i| provenance[&mask_of(&[0, i])].quantities[0]).collect();
            let total = quantities.iter().sum();
            provenance.insert(
                with_supplier_mask,
                CoalitionSolution {
                    members: ids.clone(),
                    with_supplier: true,
                    quantities: quantities.clone(),
                    total,
                    unit_price: sit.c,
                    value: values[with_supplier_mask as usize],
                    alternates: vec![quantities],
                },
            );
        }
    }
    Ok(RsGame { n, values, provenance })
}

/// Restriction of the game to a subset of players containing the supplier,
/// reindexed so the kept retailers become `1..=k`.
pub fn subgame(game: &RsGame, players: &[usize]) -> Result<RsGame> {
    let mut kept: Vec<usize> = players.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.first() != Some(&0) {
        return Err(RsError::InvalidArgument("a subgame must keep the supplier (player 0)".into()));
    }
    if kept.iter().any(|&p| p > game.n) {
        return Err(RsError::InvalidArgument(format!(
            "players must lie in 0..={}, got {:?}",
            game.n, kept
        )));
    }
    let new_n = kept.len() - 1;
    let mut values = vec![0.0; 1 << (new_n + 1)];
    let mut provenance = BTreeMap::new();
    let remap: BTreeMap<usize, usize> =
        kept.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    for new_mask in 0..1u32 << (new_n + 1) {
        let old_mask = ids_of(new_mask).iter().fold(0u32, |m, &new_id| m | (1 << kept[new_id]));
        values[new_mask as usize] = game.value(old_mask);
        if let Some(sol) = game.provenance.get(&old_mask) {
            let mut sol = sol.clone();
            sol.members = sol.members.iter().map(|m| remap[m]).collect();
            provenance.insert(new_mask, sol);
        }
    }
    Ok(RsGame { n: new_n, values, provenance })
}

/// Structural verdicts for an induced game: positivity, superadditivity,
/// strict monotonicity and the with-supplier decomposition identity.
#[derive(Debug, Clone)]
pub struct StructureReport {
    pub positivity_failures: Vec<u32>,
    pub superadditivity_failures: Vec<(u32, u32)>,
    pub monotonicity_failures: Vec<(u32, u32)>,
    pub monotonicity_min_margin: f64,
    pub decomposition_failures: Vec<u32>,
}

impl StructureReport {
    pub fn positivity_ok(&self) -> bool {
        self.positivity_failures.is_empty()
    }
    pub fn superadditivity_ok(&self) -> bool {
        self.superadditivity_failures.is_empty()
    }
    pub fn monotonicity_ok(&self) -> bool {
        self.monotonicity_failures.is_empty()
    }
    pub fn decomposition_ok(&self) -> bool {
        self.decomposition_failures.is_empty()
    }
    pub fn all_ok(&self) -> bool {
        self.positivity_ok()
            && self.superadditivity_ok()
            && self.monotonicity_ok()
            && self.decomposition_ok()
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for &m in &self.positivity_failures {
            out.push(format!("value of {{{}}} is not positive", format_ids(m)));
        }
        for &(s, t) in &self.superadditivity_failures {
            out.push(format!(
                "superadditivity fails for {{{}}} and {{{}}}",
                format_ids(s),
                format_ids(t)
            ));
        }
        for &(s, t) in &self.monotonicity_failures {
            out.push(format!(
                "monotonicity fails for {{{}}} inside {{{}}}",
                format_ids(s),
                format_ids(t)
            ));
        }
        for &m in &self.decomposition_failures {
            out.push(format!(
                "with-supplier value of {{{}}} is not the sum of its supplier pairs",
                format_ids(m)
            ));
        }
        out
    }
}

/// Checks the structural properties every induced game must satisfy.
pub fn check_structure(game: &RsGame, eps: f64) -> StructureReport {
    let full = game.grand_mask();
    let mut report = StructureReport {
        positivity_failures: Vec::new(),
        superadditivity_failures: Vec::new(),
        monotonicity_failures: Vec::new(),
        monotonicity_min_margin: f64::INFINITY,
        decomposition_failures: Vec::new(),
    };

    // Every coalition other than the bare supplier earns a positive profit.
    for mask in game.coalitions() {
        if mask == 1 {
            continue;
        }
        if !(game.value(mask) > 0.0) {
            report.positivity_failures.push(mask);
        }
    }

    // Disjoint coalitions never lose by merging.
    for s in 1..=full {
        let complement = full & !s;
        let mut t = complement;
        while t > 0 {
            if t > s {
                let (vs, vt, vu) = (game.value(s), game.value(t), game.value(s | t));
                let scale = vs.abs().max(vt.abs()).max(vu.abs()).max(1.0);
                if vu < vs + vt - eps * scale {
                    report.superadditivity_failures.push((s, t));
                }
            }
            t = (t - 1) & complement;
        }
    }

    // Strictly more players, strictly more value. The pair (empty, {0}) is
    // excluded: both values are zero by definition.
    for t in 2..=full {
        let mut s = (t - 1) & t;
        loop {
            if !(s == 0 && t == 1) {
                let margin = game.value(t) - game.value(s);
                report.monotonicity_min_margin = report.monotonicity_min_margin.min(margin);
                if !(margin > 0.0) {
                    report.monotonicity_failures.push((s, t));
                }
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & t;
        }
    }

    // v(S + supplier) equals the sum of the supplier-retailer pair values.
    for bits in 0u32..1 << game.n() {
        let retailer_mask = bits << 1;
        let with_supplier = retailer_mask | 1;
        let sum: f64 = ids_of(retailer_mask).iter().map(|&i| game.value(mask_of(&[0, i]))).sum();
        let v = game.value(with_supplier);
        if (v - sum).abs() > eps * v.abs().max(sum.abs()).max(1.0) {
            report.decomposition_failures.push(with_supplier);
        }
    }
    report
}

/// Serializable characteristic-function table, listing every nonempty
/// coalition sorted by size and then lexicographically by ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameExport {
    pub n: usize,
    pub values: Vec<CoalitionValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoalitionValue {
    pub coalition: Vec<usize>,
    pub v: f64,
}

impl RsGame {
    pub fn export(&self) -> GameExport {
        let mut rows: Vec<CoalitionValue> = self
            .coalitions()
            .map(|m| CoalitionValue { coalition: ids_of(m), v: self.value(m) })
            .collect();
        rows.sort_by(|a, b| {
            a.coalition.len().cmp(&b.coalition.len()).then_with(|| a.coalition.cmp(&b.coalition))
        });
        GameExport { n: self.n, values: rows }
    }

    pub fn from_export(export: &GameExport) -> Result<RsGame> {
        if export.n > MAX_RETAILERS {
            return Err(RsError::PlayerCapExceeded(export.n, MAX_RETAILERS));
        }
        let size = 1usize << (export.n + 1);
        let mut values = vec![f64::NAN; size];
        values[0] = 0.0;
        for row in &export.values {
            if row.coalition.is_empty() {
                return Err(RsError::InvalidArgument("the empty coalition is implicit".into()));
            }
            if row.coalition.iter().any(|&i| i > export.n) {
                return Err(RsError::InvalidArgument(format!(
                    "coalition {:?} uses a player above n = {}",
                    row.coalition, export.n
                )));
            }
            let mask = mask_of(&row.coalition) as usize;
            if !values[mask].is_nan() {
                return Err(RsError::InvalidArgument(format!(
                    "coalition {:?} listed twice",
                    row.coalition
                )));
            }
            values[mask] = row.v;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(RsError::InvalidArgument(
                "the table must list every nonempty coalition".into(),
            ));
        }
        RsGame::from_values(export.n, values)
    }
}

/// Recomputes every coalition value from the stored order plans; the
/// largest relative discrepancy is returned (0 when no provenance).
pub fn provenance_drift(sit: &RsSituation, game: &RsGame) -> f64 {
    let mut worst: f64 = 0.0;
    for (&mask, sol) in &game.provenance {
        let unit_price = if sol.with_supplier {
            sit.c
        } else {
            match sit.w.eval(sol.total) {
                Ok(v) => v,
                Err(_) => continue,
            }
        };
        let recomputed: f64 = sol
            .members
            .iter()
            .zip(&sol.quantities)
            .map(|(&id, &q)| crate::model::retailer_profit(&sit.prices[id - 1], q, unit_price))
            .sum();
        let v = game.value(mask);
        worst = worst.max((recomputed - v).abs() / v.abs().max(1.0));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::tol;

    fn pair_game() -> RsGame {
        build_game(&fixtures::chain_pair()).unwrap()
    }

    #[test]
    fn pair_chain_table() {
        let game = pair_game();
        let expected: Vec<(Vec<usize>, f64)> = vec![
            (vec![0], 0.0),
            (vec![1], 3.25),
            (vec![2], 6.0),
            (vec![0, 1], 6.25),
            (vec![0, 2], 9.0),
            (vec![1, 2], 12.25),
            (vec![0, 1, 2], 15.25),
        ];
        for (ids, v) in expected {
            assert!(
                (game.value_of(&ids) - v).abs() < 1e-6,
                "coalition {ids:?}: got {}, want {v}",
                game.value_of(&ids)
            );
        }
    }

    #[test]
    fn wide_chain_table() {
        let game = build_game(&fixtures::chain_pair_wide()).unwrap();
        let expected: Vec<(Vec<usize>, f64)> = vec![
            (vec![0], 0.0),
            (vec![1], 1100.5),
            (vec![2], 1100.5),
            (vec![0, 1], 1161.62),
            (vec![0, 2], 1161.62),
            (vec![1, 2], 2301.0),
            (vec![0, 1, 2], 2323.24),
        ];
        for (ids, v) in expected {
            assert!(
                (game.value_of(&ids) - v).abs() < 1e-5,
                "coalition {ids:?}: got {}, want {v}",
                game.value_of(&ids)
            );
        }
    }

    #[test]
    fn single_retailer_game() {
        let sit = fixtures::as_situation(&fixtures::chain_single_kink());
        let game = build_game(&sit).unwrap();
        assert_eq!(game.value_of(&[0]), 0.0);
        assert!((game.value_of(&[1]) - 3.25).abs() < 1e-9);
        assert!((game.value_of(&[0, 1]) - 6.25).abs() < 1e-9);
    }

    #[test]
    fn structure_passes_on_reference_games() {
        for sit in
            [fixtures::chain_pair(), fixtures::chain_pair_wide(), fixtures::chain_pair_steep()]
        {
            let game = build_game(&sit).unwrap();
            let report = check_structure(&game, tol::CMP_EPS);
            assert!(report.all_ok(), "failures: {:?}", report.failures());
        }
    }

    #[test]
    fn pair_chain_decomposes_exactly() {
        let game = pair_game();
        assert_eq!(game.value_of(&[0, 1, 2]), game.value_of(&[0, 1]) + game.value_of(&[0, 2]));
    }

    #[test]
    fn structure_flags_broken_decomposition() {
        // Copy the pair-chain values but corrupt the grand coalition.
        let game = pair_game();
        let mut values: Vec<f64> = (0..8).map(|m| game.value(m)).collect();
        values[7] += 1.0;
        let broken = RsGame::from_values(2, values).unwrap();
        let report = check_structure(&broken, tol::CMP_EPS);
        assert!(!report.decomposition_ok());
        assert_eq!(report.decomposition_failures, vec![7]);
    }

    #[test]
    fn subgame_restricts_and_reindexes() {
        let game = pair_game();
        let sub = subgame(&game, &[0, 1]).unwrap();
        assert_eq!(sub.n(), 1);
        assert_eq!(sub.value_of(&[0]), 0.0);
        assert!((sub.value_of(&[1]) - 3.25).abs() < 1e-9);
        assert!((sub.value_of(&[0, 1]) - 6.25).abs() < 1e-9);

        let sub2 = subgame(&game, &[0, 2]).unwrap();
        assert!((sub2.value_of(&[1]) - 6.0).abs() < 1e-9);

        let all = subgame(&game, &[0, 1, 2]).unwrap();
        for m in 0..8 {
            assert_eq!(all.value(m), game.value(m));
        }
    }

    #[test]
    fn subgame_requires_the_supplier() {
        let game = pair_game();
        assert!(matches!(subgame(&game, &[1, 2]), Err(RsError::InvalidArgument(_))));
    }

    #[test]
    fn wide_chain_supplier_subgames_stay_balanced() {
        let game = build_game(&fixtures::chain_pair_wide()).unwrap();
        for players in [vec![0, 1], vec![0, 2], vec![0, 1, 2]] {
            let sub = subgame(&game, &players).unwrap();
            let x = crate::core_analysis::altruistic(&sub);
            let decision = crate::core_analysis::in_core_full(&sub, &x, tol::CMP_EPS).unwrap();
            assert!(decision.member, "players {players:?}");
        }
    }

    #[test]
    fn export_is_sorted_and_roundtrips() {
        let game = pair_game();
        let export = game.export();
        let order: Vec<Vec<usize>> = export.values.iter().map(|r| r.coalition.clone()).collect();
        assert_eq!(
            order,
            vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]]
        );
        let back = RsGame::from_export(&export).unwrap();
        for m in 0..8 {
            assert_eq!(back.value(m), game.value(m));
        }
    }

    #[test]
    fn provenance_reproduces_values() {
        let sit = fixtures::chain_pair_wide();
        let game = build_game(&sit).unwrap();
        assert!(provenance_drift(&sit, &game) < 1e-9);
    }
}
