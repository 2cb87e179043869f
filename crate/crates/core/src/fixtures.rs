//! Small reference chains used throughout the tests and documentation.
//!
//! Each constructor returns a fully validated instance. The names describe
//! the shape of the instance, not its provenance: `kink` has a wholesale
//! curve with one hyperbolic tail, `twin` admits two optimal order sizes,
//! `pair` instances have two retailers, and `wide` works at order sizes in
//! the tens to hundreds.

use crate::model::{RsProblem, RsSituation};
use crate::piecewise::{PiecewiseCurve, Segment};

/// Single retailer, affine price `7 - q`, wholesale `5` then `2 + 3/q`,
/// cost 2. Unique optimal order size.
pub fn chain_single_kink() -> RsProblem {
    let w = PiecewiseCurve::new(
        0.0,
        vec![Segment::constant(0.0, 1.0, 5.0), Segment::new(1.0, f64::INFINITY, 2.0, 0.0, 3.0)],
    );
    RsProblem::new(2.0, w, PiecewiseCurve::affine(7.0, -1.0))
}

/// Single retailer with two optimal order sizes (3-piece price, 4-piece
/// wholesale schedule, cost 1).
pub fn chain_single_twin() -> RsProblem {
    let p = PiecewiseCurve::new(
        0.0,
        vec![
            Segment::constant(0.0, 1.0, 5.0),
            Segment::new(1.0, 2.0, 6.0, -1.0, 0.0),
            Segment::new(2.0, f64::INFINITY, 5.0, -0.5, 0.0),
        ],
    );
    let w = PiecewiseCurve::new(
        0.0,
        vec![
            Segment::constant(0.0, 1.0, 4.0),
            Segment::new(1.0, 2.0, 3.0, 0.0, 1.0),
            Segment::new(2.0, 2.5, 2.25, 0.0, 2.5),
            Segment::constant(2.5, f64::INFINITY, 3.25),
        ],
    );
    RsProblem::new(1.0, w, p)
}

/// Two retailers with prices `7 - q` and `8 - q`, cost 2, and a wholesale
/// schedule whose stated domain starts at 1/4 (extended constantly to 0).
pub fn chain_pair() -> RsSituation {
    let w = PiecewiseCurve::new(
        0.25,
        vec![Segment::constant(0.25, 1.0, 5.0), Segment::new(1.0, f64::INFINITY, 2.0, 0.0, 3.0)],
    );
    RsSituation::new(
        2.0,
        w,
        vec![PiecewiseCurve::affine(7.0, -1.0), PiecewiseCurve::affine(8.0, -1.0)],
    )
}

/// Same retailers as [`chain_pair`] but with a steeper wholesale tail
/// `9/2 + 1/(2q)`, which shifts the bargaining weight toward the supplier.
pub fn chain_pair_steep() -> RsSituation {
    let w = PiecewiseCurve::new(
        0.0,
        vec![Segment::constant(0.0, 1.0, 5.0), Segment::new(1.0, f64::INFINITY, 4.5, 0.0, 0.5)],
    );
    RsSituation::new(
        2.0,
        w,
        vec![PiecewiseCurve::affine(7.0, -1.0), PiecewiseCurve::affine(8.0, -1.0)],
    )
}

/// Two symmetric retailers with price `50 - q/2`, cost 9/5, and a
/// three-piece wholesale schedule (`11`, `1 + 100/q`, `2`).
pub fn chain_pair_wide() -> RsSituation {
    let w = PiecewiseCurve::new(
        0.0,
        vec![
            Segment::constant(0.0, 10.0, 11.0),
            Segment::new(10.0, 100.0, 1.0, 0.0, 100.0),
            Segment::constant(100.0, f64::INFINITY, 2.0),
        ],
    );
    let p = PiecewiseCurve::affine(50.0, -0.5);
    RsSituation::new(1.8, w, vec![p.clone(), p])
}

/// Wraps a single-retailer problem as a one-retailer situation.
pub fn as_situation(prob: &RsProblem) -> RsSituation {
    RsSituation::new(prob.c, prob.w.clone(), vec![prob.p.clone()])
}
