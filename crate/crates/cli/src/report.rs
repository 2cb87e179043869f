//! Serializable report types and their table renderings.
//!
//! JSON output is produced with `serde_json` from plain structs, so field
//! order and float rendering (shortest roundtrip) are deterministic for a
//! fixed input and flag set.

use serde::Serialize;

use rs_chain_core::game::GameExport;
use rs_chain_core::solutions::{AxiomCheck, AxiomReport};

pub fn fmt(v: f64, precision: usize) -> String {
    format!("{v:.precision$}")
}

pub fn ids_text(ids: &[usize]) -> String {
    let parts: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

#[derive(Serialize)]
pub struct SolveReport {
    pub retailers: Vec<RetailerSolve>,
}

#[derive(Serialize)]
pub struct RetailerSolve {
    pub id: usize,
    pub feasible_upper: f64,
    pub value: f64,
    pub optima: Vec<Optimum>,
}

#[derive(Serialize)]
pub struct Optimum {
    pub q: f64,
    pub unit_price: f64,
    pub retailer_profit: f64,
    pub supplier_profit: f64,
}

impl SolveReport {
    pub fn table(&self, precision: usize) -> String {
        let mut out = String::new();
        for r in &self.retailers {
            out.push_str(&format!(
                "retailer {}: feasible orders [0, {}], optimal profit {}\n",
                r.id,
                fmt(r.feasible_upper, precision),
                fmt(r.value, precision)
            ));
            for o in &r.optima {
                out.push_str(&format!(
                    "  q = {}  unit price {}  retailer profit {}  supplier profit {}\n",
                    fmt(o.q, precision),
                    fmt(o.unit_price, precision),
                    fmt(o.retailer_profit, precision),
                    fmt(o.supplier_profit, precision)
                ));
            }
        }
        out
    }
}

#[derive(Serialize)]
pub struct GameReport {
    pub game: GameExport,
    pub plans: Vec<PlanRow>,
    pub structure: StructureJson,
}

#[derive(Serialize)]
pub struct PlanRow {
    pub coalition: Vec<usize>,
    pub v: f64,
    pub quantities: Vec<f64>,
    pub total: f64,
    pub unit_price: f64,
}

#[derive(Serialize)]
pub struct StructureJson {
    pub positivity: bool,
    pub superadditivity: bool,
    pub monotonicity: bool,
    pub decomposition: bool,
    pub failures: Vec<String>,
}

impl GameReport {
    pub fn table(&self, precision: usize) -> String {
        let mut out = String::from("coalition        v                quantities\n");
        for row in &self.plans {
            let qs = if row.quantities.is_empty() {
                "-".to_string()
            } else {
                row.quantities.iter().map(|q| fmt(*q, precision)).collect::<Vec<_>>().join(", ")
            };
            out.push_str(&format!(
                "{:<16} {:<16} ({qs})\n",
                ids_text(&row.coalition),
                fmt(row.v, precision)
            ));
        }
        let s = &self.structure;
        let flag = |b: bool| if b { "ok" } else { "FAIL" };
        out.push_str(&format!(
            "structure: positivity {}, superadditivity {}, monotonicity {}, decomposition {}\n",
            flag(s.positivity),
            flag(s.superadditivity),
            flag(s.monotonicity),
            flag(s.decomposition)
        ));
        for f in &s.failures {
            out.push_str(&format!("  failure: {f}\n"));
        }
        out
    }
}

#[derive(Serialize)]
pub struct CoreReport {
    pub efficiency_total: f64,
    pub payoff_intervals: Vec<PayoffInterval>,
    pub coalition_bounds: Vec<CoalitionBound>,
    pub price_intervals: Vec<PriceInterval>,
    pub price_coalition_bounds: Vec<PriceCoalitionBound>,
    pub candidate_allocation: Option<AllocationVerdict>,
    pub candidate_prices: Option<PricesVerdict>,
}

#[derive(Serialize)]
pub struct PayoffInterval {
    pub retailer: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Serialize)]
pub struct CoalitionBound {
    pub coalition: Vec<usize>,
    pub at_least: f64,
}

#[derive(Serialize)]
pub struct PriceInterval {
    pub retailer: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Serialize)]
pub struct PriceCoalitionBound {
    pub coalition: Vec<usize>,
    pub weights: Vec<f64>,
    pub bound: f64,
}

#[derive(Serialize)]
pub struct AllocationVerdict {
    pub payoffs: Vec<f64>,
    pub member_reduced: bool,
    pub member_full: bool,
    pub witness: Option<String>,
    pub implied_prices: Option<Vec<f64>>,
}

#[derive(Serialize)]
pub struct PricesVerdict {
    pub prices: Vec<f64>,
    pub accepted: bool,
    pub reason: Option<String>,
    pub allocation: Option<Vec<f64>>,
}

impl CoreReport {
    pub fn table(&self, precision: usize) -> String {
        let mut out = String::new();
        out.push_str(&format!("grand coalition value {}\n", fmt(self.efficiency_total, precision)));
        for iv in &self.payoff_intervals {
            out.push_str(&format!(
                "retailer {} payoff in [{}, {}]\n",
                iv.retailer,
                fmt(iv.lo, precision),
                fmt(iv.hi, precision)
            ));
        }
        for b in &self.coalition_bounds {
            out.push_str(&format!(
                "coalition {} keeps at least {}\n",
                ids_text(&b.coalition),
                fmt(b.at_least, precision)
            ));
        }
        for iv in &self.price_intervals {
            out.push_str(&format!(
                "retailer {} implied price in [{}, {}]\n",
                iv.retailer,
                fmt(iv.lo, precision),
                fmt(iv.hi, precision)
            ));
        }
        for b in &self.price_coalition_bounds {
            let lhs: Vec<String> = b
                .coalition
                .iter()
                .zip(&b.weights)
                .map(|(i, w)| format!("{}*w{}", fmt(*w, precision), i))
                .collect();
            out.push_str(&format!(
                "price bound {}: {} <= {}\n",
                ids_text(&b.coalition),
                lhs.join(" + "),
                fmt(b.bound, precision)
            ));
        }
        if let Some(c) = &self.candidate_allocation {
            let payoffs: Vec<String> = c.payoffs.iter().map(|p| fmt(*p, precision)).collect();
            out.push_str(&format!(
                "candidate allocation ({}): member {}\n",
                payoffs.join(", "),
                if c.member_full { "yes" } else { "no" }
            ));
            if let Some(w) = &c.witness {
                out.push_str(&format!("  witness: {w}\n"));
            }
            if let Some(prices) = &c.implied_prices {
                let ps: Vec<String> = prices.iter().map(|p| fmt(*p, precision)).collect();
                out.push_str(&format!("  implied prices: ({})\n", ps.join(", ")));
            }
        }
        if let Some(c) = &self.candidate_prices {
            let ps: Vec<String> = c.prices.iter().map(|p| fmt(*p, precision)).collect();
            out.push_str(&format!(
                "candidate prices ({}): {}\n",
                ps.join(", "),
                if c.accepted { "accepted" } else { "rejected" }
            ));
            if let Some(reason) = &c.reason {
                out.push_str(&format!("  reason: {reason}\n"));
            }
            if let Some(alloc) = &c.allocation {
                let xs: Vec<String> = alloc.iter().map(|p| fmt(*p, precision)).collect();
                out.push_str(&format!("  induced allocation: ({})\n", xs.join(", ")));
            }
        }
        out
    }
}

#[derive(Serialize)]
pub struct AllocateReport {
    pub mgpc: MgpcJson,
    pub altruistic: AllocJson,
    pub shapley: AllocJson,
    pub axioms: AxiomsByAllocation,
}

#[derive(Serialize)]
pub struct MgpcJson {
    pub beta: f64,
    pub argmin: Vec<Vec<usize>>,
    pub payoffs: Vec<f64>,
    pub in_core: bool,
}

#[derive(Serialize)]
pub struct AllocJson {
    pub payoffs: Vec<f64>,
    pub in_core: bool,
}

#[derive(Serialize)]
pub struct AxiomsByAllocation {
    pub mgpc: AxiomsJson,
    pub altruistic: AxiomsJson,
    pub shapley: AxiomsJson,
}

#[derive(Serialize)]
pub struct AxiomsJson {
    pub ef: CheckJson,
    pub sr: CheckJson,
    pub rr: Vec<RrJson>,
    pub pd: CheckJson,
}

#[derive(Serialize)]
pub struct CheckJson {
    pub pass: bool,
    pub residual: f64,
    pub witness: Option<Vec<usize>>,
}

#[derive(Serialize)]
pub struct RrJson {
    pub retailer: usize,
    pub pass: bool,
    pub residual: f64,
    pub witness: Option<Vec<usize>>,
}

fn check_json(c: &AxiomCheck) -> CheckJson {
    CheckJson { pass: c.pass, residual: c.residual, witness: c.witness.clone() }
}

impl AxiomsJson {
    pub fn from_report(report: &AxiomReport) -> Self {
        AxiomsJson {
            ef: check_json(&report.efficiency),
            sr: check_json(&report.retailer_stability),
            rr: report
                .retailer_reduction
                .iter()
                .enumerate()
                .map(|(idx, c)| RrJson {
                    retailer: idx + 1,
                    pass: c.pass,
                    residual: c.residual,
                    witness: c.witness.clone(),
                })
                .collect(),
            pd: check_json(&report.difference_preservation),
        }
    }

    fn summary(&self) -> String {
        let flag = |b: bool| if b { "ok" } else { "FAIL" };
        format!(
            "ef {}, sr {}, rr {}, pd {}",
            flag(self.ef.pass),
            flag(self.sr.pass),
            flag(self.rr.iter().all(|r| r.pass)),
            flag(self.pd.pass)
        )
    }
}

impl AllocateReport {
    pub fn table(&self, precision: usize) -> String {
        let n = self.mgpc.payoffs.len();
        let mut out = String::from("player   mgpc             altruistic       shapley\n");
        for i in 0..n {
            out.push_str(&format!(
                "{:<8} {:<16} {:<16} {}\n",
                i,
                fmt(self.mgpc.payoffs[i], precision),
                fmt(self.altruistic.payoffs[i], precision),
                fmt(self.shapley.payoffs[i], precision)
            ));
        }
        let member = |b: bool| if b { "yes" } else { "no" };
        out.push_str(&format!(
            "in core  {:<16} {:<16} {}\n",
            member(self.mgpc.in_core),
            member(self.altruistic.in_core),
            member(self.shapley.in_core)
        ));
        let argmin: Vec<String> = self.mgpc.argmin.iter().map(|ids| ids_text(ids)).collect();
        out.push_str(&format!(
            "beta {} attained by {}\n",
            fmt(self.mgpc.beta, precision),
            argmin.join(", ")
        ));
        out.push_str(&format!("axioms mgpc: {}\n", self.axioms.mgpc.summary()));
        out.push_str(&format!("axioms altruistic: {}\n", self.axioms.altruistic.summary()));
        out.push_str(&format!("axioms shapley: {}\n", self.axioms.shapley.summary()));
        out
    }
}

#[derive(Serialize)]
pub struct VerifyJson {
    pub properties: Vec<PropertyJson>,
    pub instances: usize,
    pub all_pass: bool,
}

#[derive(Serialize)]
pub struct PropertyJson {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl VerifyJson {
    pub fn table(&self) -> String {
        let mut out = String::new();
        for p in &self.properties {
            out.push_str(&format!(
                "[{}] {} - {}\n",
                if p.pass { "PASS" } else { "FAIL" },
                p.name,
                p.detail
            ));
        }
        out.push_str(&format!(
            "{} properties over {} instances: {}\n",
            self.properties.len(),
            self.instances,
            if self.all_pass { "all pass" } else { "FAILURES" }
        ));
        out
    }
}
