//! Purification for two-action games.
//!
//! Notation: `d_i = u_i(2) - u_i(1)` is player `i`'s discrepancy, `p_i` the
//! probability on the second action, and `C = sum_{i in S} d_i^2` the cost
//! over the relevant players `S` (everyone whose discrepancy has been within
//! `lambda sqrt(n)` at some point).

use serde::{Deserialize, Serialize};

use super::{
    binary_epsilon0, binary_final_bound, check_precondition, check_wsne, ensure, max_support_regret,
    switch_high_regret, BoundBreach, PreconditionCheck, TraceLevel,
};
use crate::error::{Error, Result};
use crate::game::{check_mixed, pure_regrets, PayoffModel};
use crate::profile::{MixedProfile, PureProfile};
use crate::TOL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryStep {
    /// Position in the rounding order.
    pub step: usize,
    pub player: usize,
    /// The player was already pure and kept their action.
    pub skipped: bool,
    /// `A = sum_{i' in S} 2 c_i' l_i'`; absent for skipped steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<f64>,
    pub p_before: f64,
    pub p_after: f64,
    pub chosen_action: usize,
    /// `C` over the relevant set before and after the step.
    pub cost_before: f64,
    pub cost_after: f64,
    /// `4 lambda^2 n + lambda^2 n * |new_members|`.
    pub step_limit: f64,
    pub new_members: Vec<usize>,
    /// `S` after the step (full traces).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relevant: Option<Vec<usize>>,
    /// Every player's `p` after the step (full traces).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
    /// Every player's discrepancy after the step (full traces).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancies: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryPurifyTrace {
    pub n: usize,
    pub lambda: f64,
    pub level: TraceLevel,
    pub precondition: PreconditionCheck,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_profile: Option<MixedProfile>,

    /// Stage 1: players with `|d| > step1_threshold` went pure.
    pub step1_threshold: f64,
    pub step1_switched: Vec<usize>,
    pub wsne_bound: f64,
    pub wsne_max_support_regret: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wsne_profile: Option<MixedProfile>,

    /// Stage 2.
    pub order: Vec<usize>,
    pub initial_relevant: Vec<usize>,
    pub initial_cost: f64,
    pub steps: Vec<BinaryStep>,
    pub final_relevant: Vec<usize>,
    pub terminal_cost: f64,
    pub terminal_cost_bound: f64,
    pub rounded_profile: PureProfile,

    /// Stage 3: players with regret `>= delta` switched.
    pub delta: f64,
    pub step3_switched: Vec<usize>,
    /// `C / delta^2`.
    pub switch_limit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_profile: Option<PureProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_max_regret: Option<f64>,
    pub final_bound: f64,
}

/// `A dp` is non-positive by construction; this absorbs rounding noise.
pub const SLOPE_TOL: f64 = 1e-12;

fn require_binary<G: PayoffModel + ?Sized>(game: &G) -> Result<()> {
    if game.actions() != 2 {
        return Err(Error::Unsupported(format!(
            "binary purification needs m = 2, game has m = {}",
            game.actions()
        )));
    }
    Ok(())
}

fn discrepancies<G: PayoffModel + ?Sized>(game: &G, p: &MixedProfile) -> Vec<f64> {
    game.payoff_table(p).iter().map(|u| u[1] - u[0]).collect()
}

struct Wsne {
    precondition: PreconditionCheck,
    threshold: f64,
    switched: Vec<usize>,
    bound: f64,
    max_support_regret: f64,
    profile: MixedProfile,
}

fn wsne_stage<G: PayoffModel + ?Sized>(game: &G, profile: &MixedProfile) -> Result<Wsne> {
    require_binary(game)?;
    check_mixed(game, profile)?;
    let (n, lambda) = (game.players(), game.lambda());
    let precondition = check_precondition(game, profile, binary_epsilon0(lambda))?;
    let root_n = (n as f64).sqrt();
    let threshold = 0.5 * lambda * root_n;
    let bound = lambda * root_n;

    let d = discrepancies(game, profile);
    let mut out = profile.clone();
    let mut switched = Vec::new();
    for (i, &di) in d.iter().enumerate() {
        if di.abs() > threshold {
            out.set_pure(i, usize::from(di > 0.0));
            switched.push(i);
        }
    }

    let max_support_regret = max_support_regret(game, &out);
    ensure(
        || BoundBreach::new("wsne", "support regret", max_support_regret, bound),
        max_support_regret,
        bound,
    )?;
    let d = discrepancies(game, &out);
    for (i, &di) in d.iter().enumerate() {
        if out.pure_action(i).is_none() {
            ensure(
                || BoundBreach::new("wsne", "mixed-player discrepancy", di.abs(), bound).for_player(i),
                di.abs(),
                bound,
            )?;
        }
    }
    Ok(Wsne {
        precondition,
        threshold,
        switched,
        bound,
        max_support_regret,
        profile: out,
    })
}

/// Stage 1: every player with `|d_i| > (lambda / 2) sqrt(n)` switches (all at
/// once) to their pure best response. The result is a `lambda sqrt(n)`-WSNE.
///
/// The input must be a `lambda / 8`-ANE; up to twice that is accepted with a
/// relaxed precondition flag.
pub fn ane_to_wsne_binary<G: PayoffModel + ?Sized>(
    game: &G,
    profile: &MixedProfile,
) -> Result<MixedProfile> {
    wsne_stage(game, profile).map(|w| w.profile)
}

/// Stage 2 in index order. See [`purify_rounding_binary_in_order`].
pub fn purify_rounding_binary<G: PayoffModel + ?Sized>(
    game: &G,
    wsne: &MixedProfile,
    level: TraceLevel,
) -> Result<(PureProfile, BinaryPurifyTrace)> {
    let order: Vec<usize> = (0..game.players()).collect();
    purify_rounding_binary_in_order(game, wsne, &order, level)
}

/// Stage 2: rounds players to pure strategies in `order`.
///
/// For a mixed player `i`, every relevant discrepancy is linear in `p_i`:
/// `d_i' = c_i' + l_i' p_i`, read off by evaluating the profile at `p_i = 0`
/// and `p_i = 1`. With `A = sum 2 c_i' l_i'` the player goes to 0 if `A > 0`,
/// to 1 if `A < 0`, and to their best response on a tie, so `A dp <= 0`.
/// The trace's stage-1 fields are left empty.
pub fn purify_rounding_binary_in_order<G: PayoffModel + ?Sized>(
    game: &G,
    wsne: &MixedProfile,
    order: &[usize],
    level: TraceLevel,
) -> Result<(PureProfile, BinaryPurifyTrace)> {
    require_binary(game)?;
    check_mixed(game, wsne)?;
    let (n, lambda) = (game.players(), game.lambda());
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::Usage(format!("order must be a permutation of 0..{n}")));
    }
    let bound = lambda * (n as f64).sqrt();
    let precondition = check_wsne(game, wsne, bound)?;

    let full = level == TraceLevel::Full;
    let sq = lambda * lambda * n as f64;
    let mut p = wsne.clone();
    let mut d = discrepancies(game, &p);
    let mut relevant: Vec<bool> = d.iter().map(|x| x.abs() <= bound + TOL).collect();
    let cost = |d: &[f64], s: &[bool]| -> f64 {
        d.iter().zip(s).filter(|(_, &r)| r).map(|(x, _)| x * x).sum()
    };
    let members = |s: &[bool]| -> Vec<usize> { (0..n).filter(|&i| s[i]).collect() };
    let initial_relevant = members(&relevant);
    let mut c_now = cost(&d, &relevant);
    let initial_cost = c_now;
    let mut steps = Vec::new();

    for (k, &i) in order.iter().enumerate() {
        let before = p.p2(i);
        let cost_before = c_now;
        let mut coefficient = None;
        let mut new_members = Vec::new();
        let after;
        if before == 0.0 || before == 1.0 {
            after = before;
        } else {
            let mut p0 = p.clone();
            p0.set_p2(i, 0.0);
            let mut p1 = p.clone();
            p1.set_p2(i, 1.0);
            let d0 = discrepancies(game, &p0);
            let d1 = discrepancies(game, &p1);

            // Linearity: the current discrepancies interpolate the two ends.
            let drift = (0..n)
                .map(|j| (d0[j] + before * (d1[j] - d0[j]) - d[j]).abs())
                .fold(0.0, f64::max);
            ensure(
                || BoundBreach::new("rounding", "discrepancy linearity", drift, 0.0).at_step(k),
                drift,
                0.0,
            )?;

            let a: f64 = (0..n)
                .filter(|&j| relevant[j])
                .map(|j| 2.0 * d0[j] * (d1[j] - d0[j]))
                .sum();
            // at a zero slope, move toward the better response
            after = if a < 0.0 || (a == 0.0 && d[i] > 0.0) { 1.0 } else { 0.0 };
            let slope = a * (after - before);
            if slope > SLOPE_TOL {
                return Err(Error::Breach(
                    BoundBreach::new("rounding", "A * dp", slope, SLOPE_TOL)
                        .at_step(k)
                        .for_player(i),
                ));
            }
            coefficient = Some(a);
            p.set_p2(i, after);
            let previous = std::mem::replace(&mut d, if after == 0.0 { d0 } else { d1 });

            for j in 0..n {
                if relevant[j] {
                    continue;
                }
                if d[j].abs() <= bound + TOL {
                    relevant[j] = true;
                    new_members.push(j);
                } else if (d[j] > 0.0) != (previous[j] > 0.0) {
                    return Err(Error::Breach(
                        BoundBreach::new(
                            "rounding",
                            "sign change outside the relevant set",
                            d[j].abs(),
                            bound,
                        )
                        .at_step(k)
                        .for_player(j),
                    ));
                }
            }
            c_now = cost(&d, &relevant);
        }

        let step_limit = 4.0 * sq + sq * new_members.len() as f64;
        let increase = c_now - cost_before;
        ensure(
            || BoundBreach::new("rounding", "cost increase per step", increase, step_limit).at_step(k),
            increase,
            step_limit,
        )?;
        if level != TraceLevel::Off {
            steps.push(BinaryStep {
                step: k,
                player: i,
                skipped: coefficient.is_none(),
                coefficient,
                p_before: before,
                p_after: after,
                chosen_action: usize::from(after == 1.0),
                cost_before,
                cost_after: c_now,
                step_limit,
                new_members,
                relevant: full.then(|| members(&relevant)),
                profile: full.then(|| (0..n).map(|j| p.p2(j)).collect()),
                discrepancies: full.then(|| d.clone()),
            });
        }
    }

    let terminal_cost_bound = 5.0 * sq * n as f64;
    ensure(
        || BoundBreach::new("rounding", "terminal cost", c_now, terminal_cost_bound),
        c_now,
        terminal_cost_bound,
    )?;
    let rounded = p.to_pure().expect("every player was rounded");

    let trace = BinaryPurifyTrace {
        n,
        lambda,
        level,
        wsne_max_support_regret: precondition.observed,
        precondition,
        input_profile: None,
        step1_threshold: 0.5 * bound,
        step1_switched: Vec::new(),
        wsne_bound: bound,
        wsne_profile: full.then(|| wsne.clone()),
        order: order.to_vec(),
        initial_relevant,
        initial_cost,
        steps,
        final_relevant: members(&relevant),
        terminal_cost: c_now,
        terminal_cost_bound,
        rounded_profile: rounded.clone(),
        delta: delta(n, lambda),
        step3_switched: Vec::new(),
        switch_limit: c_now / delta(n, lambda).powi(2),
        final_profile: None,
        final_max_regret: None,
        final_bound: binary_final_bound(n, lambda),
    };
    Ok((rounded, trace))
}

/// `lambda (20 n^2)^(1/3)`.
fn delta(n: usize, lambda: f64) -> f64 {
    lambda * (20.0 * (n * n) as f64).cbrt()
}

/// Stage 3: every player with regret at least `delta = lambda (20 n^2)^(1/3)`
/// switches to their best response, all at once.
///
/// `pure` must be the rounded profile recorded in `trace`. Checks that
/// players outside the final relevant set have no regret, that the number of
/// switchers is at most `C / delta^2`, and the final `lambda (70 n^2)^(1/3)`
/// bound; fills in the trace's stage-3 fields.
pub fn correct_binary<G: PayoffModel + ?Sized>(
    game: &G,
    pure: &PureProfile,
    trace: &mut BinaryPurifyTrace,
) -> Result<PureProfile> {
    require_binary(game)?;
    let n = game.players();
    if pure != &trace.rounded_profile {
        return Err(Error::Usage(
            "correct_binary needs the profile produced by the rounding stage".into(),
        ));
    }
    let regrets = pure_regrets(game, pure);
    let mut outside = vec![true; n];
    for &i in &trace.final_relevant {
        outside[i] = false;
    }
    for i in (0..n).filter(|&i| outside[i]) {
        ensure(
            || BoundBreach::new("correction", "regret outside the relevant set", regrets[i], 0.0)
                .for_player(i),
            regrets[i],
            0.0,
        )?;
    }

    let (out, switched) = switch_high_regret(game, pure, trace.delta, true);
    ensure(
        || BoundBreach::new("correction", "switcher count", switched.len() as f64, trace.switch_limit),
        switched.len() as f64,
        trace.switch_limit,
    )?;
    let final_max_regret = pure_regrets(game, &out).into_iter().fold(0.0, f64::max);
    ensure(
        || BoundBreach::new("correction", "final max regret", final_max_regret, trace.final_bound),
        final_max_regret,
        trace.final_bound,
    )?;
    trace.step3_switched = switched;
    trace.final_profile = Some(out.clone());
    trace.final_max_regret = Some(final_max_regret);
    Ok(out)
}

/// All three stages.
pub fn purify_binary<G: PayoffModel + ?Sized>(
    game: &G,
    profile: &MixedProfile,
    level: TraceLevel,
) -> Result<(PureProfile, BinaryPurifyTrace)> {
    let w = wsne_stage(game, profile)?;
    let (rounded, mut trace) = purify_rounding_binary(game, &w.profile, level)?;
    trace.precondition = w.precondition;
    trace.step1_threshold = w.threshold;
    trace.step1_switched = w.switched;
    trace.wsne_bound = w.bound;
    trace.wsne_max_support_regret = w.max_support_regret;
    if level == TraceLevel::Full {
        trace.input_profile = Some(profile.clone());
    }
    let out = correct_binary(game, &rounded, &mut trace)?;
    Ok((out, trace))
}
