//! Brute-force reference solver.
//!
//! Evaluates the joint-order objective on a dense grid over the full order
//! box and refines the grid around the incumbent. It shares nothing with
//! the breakpoint-analytic solver beyond curve evaluation, which makes it
//! a meaningful cross-check despite being orders of magnitude slower.

use crate::error::{Result, RsError};
use crate::model::RsSituation;

/// Grid maximum of `sum_i (p_i(q_i) - w(q_S)) q_i` over feasible order
/// vectors for the given retailers. Returns the best vector and value.
///
/// `per_dim` grid points per retailer, with `passes - 1` refinements that
/// shrink the box 16x around the incumbent each time.
pub fn grid_coalition_value(
    sit: &RsSituation,
    members: &[usize],
    per_dim: usize,
    passes: usize,
) -> Result<(Vec<f64>, f64)> {
    let mut ids: Vec<usize> = members.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.is_empty() || ids.len() > 3 {
        return Err(RsError::InvalidArgument("the grid reference supports 1..=3 retailers".into()));
    }
    let prices: Vec<_> = ids
        .iter()
        .map(|&i| {
            sit.prices
                .get(i - 1)
                .ok_or_else(|| RsError::InvalidArgument(format!("unknown retailer id {i}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let caps: Vec<f64> = prices
        .iter()
        .map(|p| {
            p.sup_at_least(sit.c)
                .filter(|u| u.is_finite())
                .ok_or_else(|| RsError::ModelAssumption("price never reaches cost".into()))
        })
        .collect::<Result<Vec<f64>>>()?;

    let k = ids.len();
    let mut lo = vec![0.0; k];
    let mut hi = caps.clone();
    let mut best_vec = vec![0.0; k];
    let mut best_val = f64::NEG_INFINITY;

    for _ in 0..passes.max(1) {
        let steps: Vec<f64> =
            lo.iter().zip(&hi).map(|(&a, &b)| (b - a) / (per_dim.max(2) - 1) as f64).collect();
        let mut idx = vec![0usize; k];
        let mut q = vec![0.0; k];
        'outer: loop {
            for (qd, ((&l, &st), &ix)) in q.iter_mut().zip(lo.iter().zip(&steps).zip(&idx)) {
                *qd = l + st * ix as f64;
            }
            let total: f64 = q.iter().sum();
            if let Ok(wval) = sit.w.eval(total) {
                let mut value = 0.0;
                let mut feasible = true;
                for d in 0..k {
                    match prices[d].eval(q[d]) {
                        Ok(pv) if pv >= wval - 1e-12 => value += (pv - wval) * q[d],
                        _ => {
                            feasible = false;
                            break;
                        }
                    }
                }
                if feasible && value > best_val {
                    best_val = value;
                    best_vec.copy_from_slice(&q);
                }
            }
            // Odometer increment over the k-dimensional grid.
            for ix in idx.iter_mut() {
                *ix += 1;
                if *ix < per_dim {
                    continue 'outer;
                }
                *ix = 0;
            }
            break;
        }
        // Shrink the box around the incumbent.
        for d in 0..k {
            let half = (hi[d] - lo[d]) / 32.0;
            lo[d] = (best_vec[d] - half).max(0.0);
            hi[d] = (best_vec[d] + half).min(caps[d]);
        }
    }
    if best_val == f64::NEG_INFINITY {
        return Err(RsError::ModelAssumption("no feasible grid point".into()));
    }
    Ok((best_vec, best_val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn grid_reference_reproduces_known_optima() {
        let sit = fixtures::chain_pair();
        let (vec2, val) = grid_coalition_value(&sit, &[1, 2], 600, 3).unwrap();
        assert!((val - 12.25).abs() < 1e-5, "value {val}");
        assert!((vec2[0] - 2.5).abs() < 1e-2);
        assert!((vec2[1] - 3.0).abs() < 1e-2);
    }

    #[test]
    fn grid_reference_single_retailer() {
        let sit = fixtures::as_situation(&fixtures::chain_single_twin());
        let (_, val) = grid_coalition_value(&sit, &[1], 4000, 3).unwrap();
        assert!((val - 1.25).abs() < 1e-6, "value {val}");
    }
}
