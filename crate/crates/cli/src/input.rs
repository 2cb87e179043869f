//! Input file schema: one JSON document carries the chain instance plus
//! optional candidates to judge. The instance is either a full situation
//! (`retailers` array) or a single-retailer problem (`p` curve).

use std::path::Path;

use serde::Deserialize;

use rs_chain_core::core_analysis::{Allocation, PriceVector};
use rs_chain_core::piecewise::PiecewiseCurve;
use rs_chain_core::RsSituation;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RetailerEntry {
    id: usize,
    p: PiecewiseCurve,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputFile {
    c: f64,
    w: PiecewiseCurve,
    #[serde(default)]
    retailers: Option<Vec<RetailerEntry>>,
    #[serde(default)]
    p: Option<PiecewiseCurve>,
    #[serde(default)]
    candidate_allocation: Option<Allocation>,
    #[serde(default)]
    candidate_prices: Option<PriceVector>,
}

/// A parsed and validated input document.
#[derive(Debug)]
pub struct Input {
    pub situation: RsSituation,
    pub candidate_allocation: Option<Allocation>,
    pub candidate_prices: Option<PriceVector>,
}

pub fn load(path: &Path) -> Result<Input, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse(text: &str) -> Result<Input, String> {
    let file: InputFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let situation = match (file.retailers, file.p) {
        (Some(retailers), None) => {
            let n = retailers.len();
            if n == 0 {
                return Err("the retailers array is empty".into());
            }
            let mut prices: Vec<Option<PiecewiseCurve>> = vec![None; n];
            for r in retailers {
                if r.id == 0 || r.id > n {
                    return Err(format!("retailer ids must be 1..={n} contiguous, got {}", r.id));
                }
                if prices[r.id - 1].is_some() {
                    return Err(format!("duplicate retailer id {}", r.id));
                }
                prices[r.id - 1] = Some(r.p);
            }
            RsSituation::new(file.c, file.w, prices.into_iter().map(Option::unwrap).collect())
        }
        (None, Some(p)) => RsSituation::new(file.c, file.w, vec![p]),
        (Some(_), Some(_)) => {
            return Err("give either a retailers array or a single price curve p, not both".into())
        }
        (None, None) => return Err("missing retailers array (or a single price curve p)".into()),
    };
    let violations = situation.violations();
    if !violations.is_empty() {
        return Err(format!("invalid chain instance: {}", violations.join("; ")));
    }
    Ok(Input {
        situation,
        candidate_allocation: file.candidate_allocation,
        candidate_prices: file.candidate_prices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE: &str = r#"{
        "c": 2.0,
        "w": {"domain_lo": 0.0, "segments": [
            {"lo": 0.0, "hi": 1.0, "alpha": 5.0, "beta": 0.0, "gamma": 0.0},
            {"lo": 1.0, "hi": "inf", "alpha": 2.0, "beta": 0.0, "gamma": 3.0}]},
        "p": {"domain_lo": 0.0, "segments": [
            {"lo": 0.0, "hi": "inf", "alpha": 7.0, "beta": -1.0, "gamma": 0.0}]}
    }"#;

    #[test]
    fn parses_a_single_problem() {
        let input = parse(SINGLE).unwrap();
        assert_eq!(input.situation.n(), 1);
        assert!(input.candidate_allocation.is_none());
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = SINGLE.replace("\"c\": 2.0,", "\"c\": 2.0, \"surprise\": 1,");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn rejects_invalid_instances() {
        // Wholesale price below production cost.
        let text = SINGLE.replace("\"c\": 2.0", "\"c\": 9.0");
        let err = parse(&text).unwrap_err();
        assert!(err.contains("invalid chain instance"), "{err}");
    }
}
