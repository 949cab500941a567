//! Lipschitz polymatrix games.
//!
//! The crate covers the full path from a coefficient file to an approximate
//! pure Nash equilibrium:
//!
//! * [`game`] and [`profile`] hold the game representation and the exact
//!   pure/mixed payoff, regret and best-response evaluators.
//! * [`check`] scans a game for range and Lipschitz violations and builds a
//!   [`LipschitzWitness`] when the declared parameter is wrong.
//! * [`solver`] finds a mixed approximate equilibrium by logit homotopy
//!   continuation, falling back to smoothed fictitious play for large
//!   games (or an exhaustive grid scan for tiny ones).
//! * [`purify`] turns that mixed profile into a pure one deterministically,
//!   tracing every potential and bound along the way.
//! * [`population`] builds the induced population game and maps its pure
//!   profiles back to uniform mixed profiles of the base game.
//! * [`harness`] has the generators, the random-sampling baseline and the
//!   experiment pipeline behind the `lippoly` binary.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod error;
pub mod game;
pub mod harness;
pub mod io;
pub mod population;
pub mod profile;
pub mod purify;
pub mod solver;

pub use check::{check_game, GameCheck, LipschitzWitness, RangeDirection};
pub use error::{Error, Result};
pub use game::{
    best_response, discrepancy, mixed_payoff, pure_payoff, regret, regret_report, PayoffModel,
    PolymatrixGame, RegretReport,
};
pub use profile::{MixedProfile, PureProfile};

/// Absolute tolerance for every comparison against a bound.
pub const TOL: f64 = 1e-9;

/// Regret values above `-REGRET_FLOOR` are clamped to zero.
pub const REGRET_FLOOR: f64 = 1e-12;
