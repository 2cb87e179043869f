//! Command implementations. Each returns the full stdout text plus the
//! process exit code, so output is only written once everything succeeded.

use std::path::{Path, PathBuf};

use rs_chain_core::core_analysis::{
    allocation_from_prices, altruistic, coalition_price_bound, in_core_full, in_core_reduced,
    price_bounds, prices_from_allocation,
};
use rs_chain_core::game::{build_game, check_structure, ids_of, GameExport, RsGame};
use rs_chain_core::solutions::{check_axioms, mgpc, shapley};
use rs_chain_core::solve::solve_retailer;
use rs_chain_core::verify::{self, VerifyConfig};
use rs_chain_core::{RsError, RsSituation};

use crate::input::{load, Input};
use crate::report::*;
use crate::Format;

pub struct Outcome {
    pub stdout: String,
    pub code: u8,
}

fn ok(stdout: String) -> Result<Outcome, String> {
    Ok(Outcome { stdout, code: 0 })
}

fn render<T: serde::Serialize>(
    report: &T,
    table: String,
    format: Format,
) -> Result<String, String> {
    match format {
        Format::Table => Ok(table),
        Format::Json => {
            serde_json::to_string_pretty(report).map(|s| s + "\n").map_err(|e| e.to_string())
        }
    }
}

pub fn cmd_solve(path: &Path, format: Format, precision: usize) -> Result<Outcome, String> {
    let input = load(path)?;
    let sit = input.situation;
    let mut retailers = Vec::new();
    for id in sit.retailer_ids() {
        let prob = sit.problem(id).map_err(|e| e.to_string())?;
        let sol = solve_retailer(&prob).map_err(|e| e.to_string())?;
        let feasible_upper = prob.feasible_upper().unwrap_or(0.0);
        let optima = sol
            .alternates
            .iter()
            .map(|alt| {
                let q = alt[0];
                let unit_price = prob.w.eval(q).unwrap_or(f64::NAN);
                Optimum {
                    q,
                    unit_price,
                    retailer_profit: rs_chain_core::retailer_profit(&prob.p, q, unit_price),
                    supplier_profit: rs_chain_core::supplier_profit(q, unit_price, prob.c),
                }
            })
            .collect();
        retailers.push(RetailerSolve { id, feasible_upper, value: sol.value, optima });
    }
    let report = SolveReport { retailers };
    let table = report.table(precision);
    ok(render(&report, table, format)?)
}

fn game_report(sit: &RsSituation, game: &RsGame, eps: f64) -> GameReport {
    let export = game.export();
    let plans = export
        .values
        .iter()
        .map(|row| {
            let mask = rs_chain_core::game::mask_of(&row.coalition);
            match game.provenance(mask) {
                Some(sol) => PlanRow {
                    coalition: row.coalition.clone(),
                    v: row.v,
                    quantities: sol.quantities.clone(),
                    total: sol.total,
                    unit_price: sol.unit_price,
                },
                None => PlanRow {
                    coalition: row.coalition.clone(),
                    v: row.v,
                    quantities: vec![],
                    total: 0.0,
                    unit_price: sit.c,
                },
            }
        })
        .collect();
    let structure = check_structure(game, eps);
    GameReport {
        game: export,
        plans,
        structure: StructureJson {
            positivity: structure.positivity_ok(),
            superadditivity: structure.superadditivity_ok(),
            monotonicity: structure.monotonicity_ok(),
            decomposition: structure.decomposition_ok(),
            failures: structure.failures(),
        },
    }
}

pub fn cmd_game(
    path: &Path,
    format: Format,
    precision: usize,
    eps: f64,
) -> Result<Outcome, String> {
    let input = load(path)?;
    let game = build_game(&input.situation).map_err(|e| e.to_string())?;
    let report = game_report(&input.situation, &game, eps);
    let table = report.table(precision);
    ok(render(&report, table, format)?)
}

pub fn cmd_core(
    path: &Path,
    format: Format,
    precision: usize,
    eps: f64,
) -> Result<Outcome, String> {
    let Input { situation: sit, candidate_allocation, candidate_prices } = load(path)?;
    let game = build_game(&sit).map_err(|e| e.to_string())?;

    let payoff_intervals = sit
        .retailer_ids()
        .map(|i| PayoffInterval {
            retailer: i,
            lo: game.value_of(&[i]),
            hi: game.value_of(&[0, i]),
        })
        .collect();
    let coalition_bounds = game
        .retailer_coalitions()
        .filter(|m| m.count_ones() >= 2)
        .map(|m| CoalitionBound { coalition: ids_of(m), at_least: game.value(m) })
        .collect();
    let price_intervals = price_bounds(&sit, &game)
        .map_err(|e| e.to_string())?
        .into_iter()
        .enumerate()
        .map(|(idx, (lo, hi))| PriceInterval { retailer: idx + 1, lo, hi })
        .collect();
    let price_coalition_bounds = game
        .retailer_coalitions()
        .filter(|m| m.count_ones() >= 2)
        .map(|m| {
            let ids = ids_of(m);
            let (weights, bound) = coalition_price_bound(&sit, &game, &ids)?;
            Ok(PriceCoalitionBound { coalition: ids, weights, bound })
        })
        .collect::<Result<Vec<_>, RsError>>()
        .map_err(|e| e.to_string())?;

    let candidate_allocation = match candidate_allocation {
        None => None,
        Some(x) => {
            let reduced = in_core_reduced(&game, &x, eps).map_err(|e| e.to_string())?;
            let full = in_core_full(&game, &x, eps).map_err(|e| e.to_string())?;
            let witness = full.failure.as_ref().or(reduced.failure.as_ref()).map(|f| f.to_string());
            let implied_prices = if full.member {
                Some(
                    prices_from_allocation(&sit, &game, &x, eps).map_err(|e| e.to_string())?.prices,
                )
            } else {
                None
            };
            Some(AllocationVerdict {
                payoffs: x.payoffs.clone(),
                member_reduced: reduced.member,
                member_full: full.member,
                witness,
                implied_prices,
            })
        }
    };

    let candidate_prices = match candidate_prices {
        None => None,
        Some(pv) => Some(match allocation_from_prices(&sit, &game, &pv, eps) {
            Ok(x) => PricesVerdict {
                prices: pv.prices.clone(),
                accepted: true,
                reason: None,
                allocation: Some(x.payoffs),
            },
            Err(e) => PricesVerdict {
                prices: pv.prices.clone(),
                accepted: false,
                reason: Some(e.to_string()),
                allocation: None,
            },
        }),
    };

    let report = CoreReport {
        efficiency_total: game.value(game.grand_mask()),
        payoff_intervals,
        coalition_bounds,
        price_intervals,
        price_coalition_bounds,
        candidate_allocation,
        candidate_prices,
    };
    let table = report.table(precision);
    ok(render(&report, table, format)?)
}

pub fn cmd_allocate(
    path: &Path,
    format: Format,
    precision: usize,
    eps: f64,
) -> Result<Outcome, String> {
    let input = load(path)?;
    let game = build_game(&input.situation).map_err(|e| e.to_string())?;

    let solution = mgpc(&game).map_err(|e| e.to_string())?;
    let xa = altruistic(&game);
    let sh = shapley(&game).map_err(|e| e.to_string())?;

    let member = |x| -> Result<bool, String> {
        Ok(in_core_full(&game, x, eps).map_err(|e| e.to_string())?.member)
    };
    let report = AllocateReport {
        mgpc: MgpcJson {
            beta: solution.beta,
            argmin: solution.argmin_coalitions.clone(),
            payoffs: solution.allocation.payoffs.clone(),
            in_core: member(&solution.allocation)?,
        },
        altruistic: AllocJson { payoffs: xa.payoffs.clone(), in_core: member(&xa)? },
        shapley: AllocJson { payoffs: sh.payoffs.clone(), in_core: member(&sh)? },
        axioms: AxiomsByAllocation {
            mgpc: AxiomsJson::from_report(
                &check_axioms(&game, &solution.allocation, eps).map_err(|e| e.to_string())?,
            ),
            altruistic: AxiomsJson::from_report(
                &check_axioms(&game, &xa, eps).map_err(|e| e.to_string())?,
            ),
            shapley: AxiomsJson::from_report(
                &check_axioms(&game, &sh, eps).map_err(|e| e.to_string())?,
            ),
        },
    };
    let table = report.table(precision);
    ok(render(&report, table, format)?)
}

pub struct VerifyOptions {
    pub inputs: Vec<PathBuf>,
    pub game: Option<PathBuf>,
    pub seed: u64,
    pub instances: usize,
    pub max_retailers: usize,
    pub format: Format,
    pub eps: f64,
}

pub fn cmd_verify(opts: VerifyOptions) -> Result<Outcome, String> {
    let mut properties = Vec::new();
    let mut instances = 0usize;

    if let Some(path) = &opts.game {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let export: GameExport =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let game = RsGame::from_export(&export).map_err(|e| e.to_string())?;
        let table_report = verify::check_game_table(&game, opts.eps);
        instances += table_report.instances_checked;
        properties.extend(table_report.outcomes);
    }

    let extra: Vec<RsSituation> = opts
        .inputs
        .iter()
        .map(|p| load(p).map(|i| i.situation))
        .collect::<Result<Vec<_>, String>>()?;

    if !extra.is_empty() || opts.instances > 0 {
        let cfg = VerifyConfig {
            seed: opts.seed,
            instances: opts.instances,
            max_retailers: opts.max_retailers,
            ..VerifyConfig::default()
        };
        let report = verify::run(&cfg, &extra).map_err(|e| e.to_string())?;
        instances += report.instances_checked;
        properties.extend(report.outcomes);
    }

    let all_pass = properties.iter().all(|p| p.pass);
    let report = VerifyJson {
        properties: properties
            .into_iter()
            .map(|p| PropertyJson { name: p.name.to_string(), pass: p.pass, detail: p.detail })
            .collect(),
        instances,
        all_pass,
    };
    let table = report.table();
    let stdout = render(&report, table, opts.format)?;
    Ok(Outcome { stdout, code: if all_pass { 0 } else { 1 } })
}
