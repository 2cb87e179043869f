//! Solver library for single-period retailer-supplier distribution chains.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`piecewise`] represents the decreasing, continuous price and
//!    wholesale curves as closed-form segments.
//! 2. [`model`] and [`solve`] define chain instances and find optimal order
//!    quantities for individual retailers, retailer coalitions, and
//!    coalitions that include the supplier.
//! 3. [`game`] turns a chain into a cooperative game over the supplier and
//!    the retailers.
//! 4. [`core_analysis`] and [`solutions`] produce and audit profit
//!    allocations: core membership, the altruistic allocation, the
//!    minimal-gain-per-capita (mgpc) solution and the Shapley value.
//!
//! [`verify`] bundles the property suite that checks every structural
//! guarantee on reference instances and seeded random chains; [`oracle`]
//! holds an independent brute-force solver used to cross-check the
//! optimizer.
//!
//! All types are plain immutable data and every solver is a pure function
//! of its inputs, so instances, games and allocations can be shared and
//! solved across threads freely; the random instance generator is
//! deterministic per seed and owns no global state.
//!
//! ```
//! use rs_chain_core::{altruistic, build_game, in_core_full, mgpc, tol};
//!
//! let sit = rs_chain_core::fixtures::chain_pair();
//! let game = build_game(&sit).unwrap();
//! assert!((game.value_of(&[1, 2]) - 12.25).abs() < 1e-6);
//!
//! // Both canonical allocations are stable against every coalition.
//! let solution = mgpc(&game).unwrap();
//! assert!(in_core_full(&game, &solution.allocation, tol::CMP_EPS).unwrap().member);
//! assert!(in_core_full(&game, &altruistic(&game), tol::CMP_EPS).unwrap().member);
//! ```

pub mod core_analysis;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod gen;
pub mod model;
pub mod oracle;
pub mod piecewise;
pub mod solutions;
pub mod solve;
pub mod tol;
pub mod verify;

pub use core_analysis::{
    allocation_from_prices, altruistic, in_core_full, in_core_reduced, prices_from_allocation,
    Allocation, AllocationLabel, CoreDecision, CoreFailure, PriceVector,
};
pub use error::{Result, RsError};
pub use game::{build_game, check_structure, subgame, GameExport, RsGame};
pub use gen::random_situation;
pub use model::{retailer_profit, supplier_profit, RsProblem, RsSituation};
pub use piecewise::{crossing, PiecewiseCurve, Segment, Violation};
pub use solutions::{
    check_axioms, counterexample_solution, mgpc, shapley, AxiomReport, CounterexampleKind,
    MgpcResult,
};
pub use solve::{
    check_cooperation_profits, solve_coalition, solve_retailer, solve_with_supplier,
    CoalitionSolution,
};
