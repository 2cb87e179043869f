//! Central numeric tolerances.
//!
//! Every comparison in the crate routes through one of these constants so
//! that the meaning of "equal" and "at least" is consistent across curve
//! validation, the solvers, and the game-theoretic checks.

/// Continuity and root-finding tolerance for piecewise curves.
pub const CURVE_EPS: f64 = 1e-9;

/// Default comparison tolerance for derived quantities (profits, game
/// values, allocation constraints). Optimizer output carries noise on this
/// order, so stability checks accept violations up to `CMP_EPS`.
pub const CMP_EPS: f64 = 1e-7;

/// Tolerance for exact algebraic identities (profit decomposition,
/// constructor identities). These hold to rounding error, not optimizer
/// error.
pub const IDENTITY_EPS: f64 = 1e-9;

/// Relative tolerance for agreement between the coalition solver and the
/// brute-force grid reference.
pub const ORACLE_REL_EPS: f64 = 1e-5;

/// Relative-or-absolute closeness test: `|a - b| <= eps * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, eps: f64) -> bool {
    (a - b).abs() <= eps * 1f64.max(a.abs()).max(b.abs())
}

/// `a >= b` up to `eps` of slack, scaled like [`close`].
pub fn ge(a: f64, b: f64, eps: f64) -> bool {
    a - b >= -eps * 1f64.max(a.abs()).max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn close_scales_with_magnitude() {
        assert!(close(1_000_000.0, 1_000_000.0 + 5e-3, 1e-7));
        assert!(!close(1.0, 1.0 + 5e-3, 1e-7));
    }

    #[test]
    fn ge_allows_slack() {
        assert!(ge(1.0 - 1e-9, 1.0, 1e-7));
        assert!(!ge(1.0 - 1e-3, 1.0, 1e-7));
    }
}
