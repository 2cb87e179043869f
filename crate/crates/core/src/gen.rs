//! Seeded random instance generation for property testing.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, RsError};
use crate::model::RsSituation;
use crate::piecewise::{PiecewiseCurve, Segment};

const MAX_ATTEMPTS: usize = 1000;

/// Draws a valid situation with `n` retailers, deterministically per
/// `(n, seed)`.
///
/// Prices are affine `a_i - b_i q`; the wholesale schedule is a constant
/// head with a hyperbolic tail, continuous at the joint and bounded below
/// by a floor strictly above the production cost. Draws violating any
/// model assumption are resampled.
pub fn random_situation(n: usize, seed: u64) -> Result<RsSituation> {
    if n == 0 || n > 6 {
        return Err(RsError::InvalidArgument(format!(
            "random situations support 1..=6 retailers, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    for _ in 0..MAX_ATTEMPTS {
        let sit = draw(&mut rng, n);
        if sit.violations().is_empty() {
            return Ok(sit);
        }
    }
    Err(RsError::GenerationExhausted(MAX_ATTEMPTS))
}

fn draw(rng: &mut ChaCha8Rng, n: usize) -> RsSituation {
    let c: f64 = rng.gen_range(0.5..3.0);
    let w0: f64 = c + rng.gen_range(1.0..4.0);
    let q0: f64 = rng.gen_range(0.5..2.0);
    // Tail floor strictly between cost and the constant head; continuity
    // at q0 fixes the reciprocal coefficient.
    let floor: f64 = c + rng.gen_range(0.1..0.9) * (w0 - c);
    let gamma = (w0 - floor) * q0;
    let w = PiecewiseCurve::new(
        0.0,
        vec![Segment::constant(0.0, q0, w0), Segment::new(q0, f64::INFINITY, floor, 0.0, gamma)],
    );
    let prices = (0..n)
        .map(|_| {
            let a: f64 = w0 + rng.gen_range(0.5..5.0);
            let b: f64 = rng.gen_range(0.2..2.0);
            PiecewiseCurve::affine(a, -b)
        })
        .collect();
    RsSituation::new(c, w, prices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_instances_are_valid() {
        for seed in 0..100 {
            let sit = random_situation(1, seed).unwrap();
            assert!(sit.violations().is_empty(), "seed {seed}");
        }
        let sit = random_situation(2, 1).unwrap();
        assert!(sit.violations().is_empty());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = random_situation(3, 42).unwrap();
        let b = random_situation(3, 42).unwrap();
        assert_eq!(a, b);
        let c = random_situation(3, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn retailer_count_is_bounded() {
        assert!(random_situation(0, 1).is_err());
        assert!(random_situation(7, 1).is_err());
    }
}
