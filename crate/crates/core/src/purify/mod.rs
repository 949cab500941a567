//! Deterministic purification: mixed approximate equilibrium in, approximate
//! pure equilibrium out.
//!
//! Two pipelines share the same three-stage shape:
//!
//! 1. move probability off clearly bad actions (all players at once), giving
//!    a well-supported equilibrium;
//! 2. round players to pure strategies one at a time, choosing each action so
//!    that the linear part of a quadratic potential does not increase;
//! 3. let every player whose regret is still high switch to a best response
//!    (again all at once).
//!
//! [`binary`] handles two-action games with the sum of squared discrepancies
//! as potential; [`maction`] handles any `m` with the sum of payoff variances
//! over per-player "relevant" action sets. Every bound the construction
//! promises is checked as it is produced; a violation aborts with
//! [`Error::Breach`].

pub mod binary;
pub mod maction;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{argmax_lowest, check_mixed, pure_max_regret, regret_report_unchecked, PayoffModel};
use crate::profile::{MixedProfile, PureProfile};
use crate::TOL;

pub use binary::{
    ane_to_wsne_binary, correct_binary, purify_binary, purify_rounding_binary,
    purify_rounding_binary_in_order, BinaryPurifyTrace, BinaryStep,
};
pub use maction::{
    ane_to_wsne_m, correct_m, purify_m, purify_rounding_m, purify_rounding_m_in_order,
    MActionPurifyTrace, MActionStep, MActionThresholds, RelevantAddition,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurifyMode {
    Binary,
    MAction,
    /// Binary when `m = 2`, m-action otherwise.
    #[default]
    Auto,
}

impl FromStr for PurifyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(PurifyMode::Binary),
            "m_action" | "m-action" | "maction" => Ok(PurifyMode::MAction),
            "auto" => Ok(PurifyMode::Auto),
            other => Err(Error::Validation(format!(
                "unknown mode {other:?} (expected binary, m_action or auto)"
            ))),
        }
    }
}

impl fmt::Display for PurifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PurifyMode::Binary => "binary",
            PurifyMode::MAction => "m_action",
            PurifyMode::Auto => "auto",
        })
    }
}

/// How much of each rounding step a trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceLevel {
    /// Potentials plus intermediate profiles, relevant sets and payoffs.
    Full,
    /// Per-step potentials, coefficients and chosen actions.
    #[default]
    Potentials,
    /// Stage summaries only.
    Off,
}

impl FromStr for TraceLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(TraceLevel::Full),
            "potentials" => Ok(TraceLevel::Potentials),
            "off" => Ok(TraceLevel::Off),
            other => Err(Error::Validation(format!(
                "unknown trace level {other:?} (expected full, potentials or off)"
            ))),
        }
    }
}

/// A bound that failed to hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundBreach {
    pub stage: String,
    pub check: String,
    pub observed: f64,
    pub limit: f64,
    /// Rounding step (0-based position in the player order), when relevant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player: Option<usize>,
}

impl fmt::Display for BoundBreach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} stage, {}: observed {:.6e} exceeds limit {:.6e}",
            self.stage, self.check, self.observed, self.limit
        )?;
        if let Some(step) = self.step {
            write!(f, " at step {step}")?;
        }
        if let Some(player) = self.player {
            write!(f, " (player {player})")?;
        }
        Ok(())
    }
}

impl BoundBreach {
    fn new(stage: &str, check: &str, observed: f64, limit: f64) -> Self {
        Self {
            stage: stage.to_string(),
            check: check.to_string(),
            observed,
            limit,
            step: None,
            player: None,
        }
    }

    fn at_step(mut self, step: usize) -> Self {
        self.step = Some(step);
        self
    }

    fn for_player(mut self, player: usize) -> Self {
        self.player = Some(player);
        self
    }
}

/// `Err(Breach)` unless `observed <= limit + TOL`.
fn ensure(breach: impl FnOnce() -> BoundBreach, observed: f64, limit: f64) -> Result<()> {
    if observed <= limit + TOL {
        Ok(())
    } else {
        Err(Error::Breach(breach()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionStatus {
    Met,
    /// Regret above the required level but within twice it: the pipeline runs
    /// and its final bounds are still enforced.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreconditionCheck {
    pub required: f64,
    pub observed: f64,
    pub worst_player: usize,
    pub status: PreconditionStatus,
}

/// Input regret against `required`: met, relaxed (up to twice), or an error.
fn check_precondition<G: PayoffModel + ?Sized>(
    game: &G,
    profile: &MixedProfile,
    required: f64,
) -> Result<PreconditionCheck> {
    let report = regret_report_unchecked(game, profile);
    let status = if report.max_regret <= required + TOL {
        PreconditionStatus::Met
    } else if report.max_regret <= 2.0 * required + TOL {
        PreconditionStatus::Relaxed
    } else {
        return Err(Error::Precondition {
            player: report.argmax_player,
            regret: report.max_regret,
            allowed: required,
        });
    };
    Ok(PreconditionCheck {
        required,
        observed: report.max_regret,
        worst_player: report.argmax_player,
        status,
    })
}

/// Largest regret of an action in some player's support.
pub fn max_support_regret<G: PayoffModel + ?Sized>(game: &G, profile: &MixedProfile) -> f64 {
    worst_support_regret(game, profile).0
}

/// `(largest support-action regret, lowest player attaining it)`.
fn worst_support_regret<G: PayoffModel + ?Sized>(game: &G, profile: &MixedProfile) -> (f64, usize) {
    let mut worst = (0.0, 0);
    for (i, u) in game.payoff_table(profile).iter().enumerate() {
        let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for j in profile.support(i) {
            if best - u[j] > worst.0 {
                worst = (best - u[j], i);
            }
        }
    }
    worst
}

/// Precondition check for a stage that needs a `bound`-WSNE; no relaxation.
fn check_wsne<G: PayoffModel + ?Sized>(
    game: &G,
    profile: &MixedProfile,
    bound: f64,
) -> Result<PreconditionCheck> {
    let (observed, worst_player) = worst_support_regret(game, profile);
    if observed > bound + TOL {
        return Err(Error::Precondition {
            player: worst_player,
            regret: observed,
            allowed: bound,
        });
    }
    Ok(PreconditionCheck {
        required: bound,
        observed,
        worst_player,
        status: PreconditionStatus::Met,
    })
}

/// Players whose regret in `a` passes `threshold` (`>=` when `inclusive`,
/// `>` otherwise) all switch to their best response against `a`.
///
/// Every decision is made against the input profile before any is applied,
/// so the outcome does not depend on player order. Returns the new profile
/// and the switchers in index order.
pub fn switch_high_regret<G: PayoffModel + ?Sized>(
    game: &G,
    a: &PureProfile,
    threshold: f64,
    inclusive: bool,
) -> (PureProfile, Vec<usize>) {
    let mut out = a.clone();
    let mut switched = Vec::new();
    for i in 0..game.players() {
        let u = game.pure_payoff_vector(i, a);
        let best = argmax_lowest(&u);
        let regret = u[best] - u[a.action(i)];
        let high = if inclusive {
            regret >= threshold
        } else {
            regret > threshold
        };
        if high {
            out.set(i, best);
            switched.push(i);
        }
    }
    (out, switched)
}

/// `lambda / 8`: the input quality the binary pipeline needs.
pub fn binary_epsilon0(lambda: f64) -> f64 {
    lambda / 8.0
}

/// `lambda (70 n^2)^(1/3)`.
pub fn binary_final_bound(n: usize, lambda: f64) -> f64 {
    lambda * (70.0 * (n * n) as f64).cbrt()
}

/// `((m - 1) / m)^2 lambda`: the input quality the m-action pipeline needs.
pub fn m_action_epsilon0(m: usize, lambda: f64) -> f64 {
    let r = (m as f64 - 1.0) / m as f64;
    r * r * lambda
}

/// `6 lambda (n^2 m ln 3m)^(1/3)`.
pub fn m_action_final_bound(n: usize, m: usize, lambda: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    6.0 * lambda * (n * n * m * (3.0 * m).ln()).cbrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum PurifyTrace {
    Binary(BinaryPurifyTrace),
    MAction(MActionPurifyTrace),
}

impl PurifyTrace {
    pub fn precondition(&self) -> &PreconditionCheck {
        match self {
            PurifyTrace::Binary(t) => &t.precondition,
            PurifyTrace::MAction(t) => &t.precondition,
        }
    }

    /// Number of players switched in the final correction.
    pub fn corrections(&self) -> usize {
        match self {
            PurifyTrace::Binary(t) => t.step3_switched.len(),
            PurifyTrace::MAction(t) => t.step3_switched.len(),
        }
    }

    /// Terminal value of the rounding potential.
    pub fn terminal_potential(&self) -> f64 {
        match self {
            PurifyTrace::Binary(t) => t.terminal_cost,
            PurifyTrace::MAction(t) => t.terminal_variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Purification {
    /// The path actually taken (never `Auto`).
    pub mode: PurifyMode,
    pub profile: PureProfile,
    pub final_max_regret: f64,
    pub bound: f64,
    pub trace: PurifyTrace,
}

/// Routes to the binary or m-action pipeline and re-verifies the final
/// profile against the path's regret bound from scratch.
pub fn purify<G: PayoffModel + ?Sized>(
    game: &G,
    profile: &MixedProfile,
    mode: PurifyMode,
    level: TraceLevel,
) -> Result<Purification> {
    check_mixed(game, profile)?;
    let (n, m, lambda) = (game.players(), game.actions(), game.lambda());
    let mode = match mode {
        PurifyMode::Auto if m == 2 => PurifyMode::Binary,
        PurifyMode::Auto => PurifyMode::MAction,
        other => other,
    };
    let (pure, trace, bound) = match mode {
        PurifyMode::Binary => {
            if m != 2 {
                return Err(Error::Unsupported(format!(
                    "binary purification needs m = 2, game has m = {m}"
                )));
            }
            let (a, t) = purify_binary(game, profile, level)?;
            (a, PurifyTrace::Binary(t), binary_final_bound(n, lambda))
        }
        _ => {
            let (a, t) = purify_m(game, profile, level)?;
            (a, PurifyTrace::MAction(t), m_action_final_bound(n, m, lambda))
        }
    };
    let final_max_regret = pure_max_regret(game, &pure);
    ensure(
        || BoundBreach::new("final", "max regret (recomputed)", final_max_regret, bound),
        final_max_regret,
        bound,
    )?;
    Ok(Purification {
        mode,
        profile: pure,
        final_max_regret,
        bound,
        trace,
    })
}

/// Sample variance (divide by `k`) of `u` restricted to `set`.
fn restricted_mean_variance(u: &[f64], set: &[usize]) -> (f64, f64) {
    let k = set.len() as f64;
    let mean = set.iter().map(|&j| u[j]).sum::<f64>() / k;
    let var = set.iter().map(|&j| (u[j] - mean).powi(2)).sum::<f64>() / k;
    (mean, var)
}
