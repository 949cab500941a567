//! Purification for games with any number of actions.
//!
//! Each player `i` keeps a relevant set `S_i` of actions. The rounding
//! potential is `sum_i var(u_i restricted to S_i)`, the payoff variance over
//! the relevant set. Sets only grow: after every step each player adds its
//! best action outside the set while that action pays at least the set mean.

use serde::{Deserialize, Serialize};

use super::{
    check_precondition, check_wsne, ensure, m_action_epsilon0, m_action_final_bound,
    max_support_regret, restricted_mean_variance, switch_high_regret, BoundBreach,
    PreconditionCheck, TraceLevel,
};
use crate::error::{Error, Result};
use crate::game::{argmax_lowest, check_mixed, pure_regrets, PayoffModel};
use crate::profile::{MixedProfile, PureProfile};
use crate::TOL;

/// `b dp` is non-positive by construction; this absorbs rounding noise.
pub const SLOPE_TOL: f64 = 1e-12;

/// Strictness margin for the relevant-set postcondition.
pub const POSTCONDITION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MActionThresholds {
    /// `((m - 1) / m)^2 lambda`: required input regret.
    pub epsilon0: f64,
    /// `2 sqrt(2 n lambda epsilon0)`: WSNE quality after stage 1.
    pub epsilon1: f64,
    /// `sqrt(2 (n - 1) lambda epsilon0)`: stage-1 action cut-off.
    pub delta0: f64,
    /// `4 lambda (n^2 m ln 3m)^(1/3)`: stage-3 switching threshold.
    pub delta1: f64,
}

impl MActionThresholds {
    pub fn new(n: usize, m: usize, lambda: f64) -> Self {
        let (nf, mf) = (n as f64, m as f64);
        let epsilon0 = m_action_epsilon0(m, lambda);
        Self {
            epsilon0,
            epsilon1: 2.0 * (2.0 * nf * lambda * epsilon0).sqrt(),
            delta0: (2.0 * (nf - 1.0) * lambda * epsilon0).sqrt(),
            delta1: 4.0 * lambda * (nf * nf * mf * (3.0 * mf).ln()).cbrt(),
        }
    }
}

/// Variance bookkeeping for the three budget components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceBudget {
    /// Sum of initial variances; limit `2 (n lambda (m - 1) / m)^2`.
    pub initial: f64,
    pub initial_limit: f64,
    /// Total change from enlarging relevant sets; limit
    /// `4 n lambda^2 (ln(m - 1) + 1)`.
    pub additions: f64,
    pub additions_limit: f64,
    /// Total change from players moving to pure strategies; limit
    /// `((m - 1) / m n lambda)^2`.
    pub movement: f64,
    pub movement_limit: f64,
}

/// One action joining a relevant set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevantAddition {
    pub player: usize,
    pub action: usize,
    /// Set size before the addition.
    pub k: usize,
    /// Payoff of the new action minus the set mean before it joined.
    pub gap: f64,
    /// `(1 / (k + 1)) (k / (k + 1) gap^2 - var)`.
    pub predicted_change: f64,
    /// Change in variance recomputed from scratch.
    pub actual_change: f64,
    /// `4 k lambda^2 / (k + 1)^2`.
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MActionStep {
    pub step: usize,
    pub player: usize,
    /// The player was already pure and kept their action.
    pub skipped: bool,
    pub chosen_action: usize,
    /// Aggregate `b = sum_{i != player} b_i / |S_i|`; absent for skipped steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    /// `b . (e_j - p_before)`.
    pub slope: f64,
    /// Sum of variances before the step, after the move (old sets), and
    /// after the relevant sets were recomputed.
    pub variance_before: f64,
    pub variance_moved: f64,
    pub variance_after: f64,
    /// `(n - 1) ((m - 1) / m lambda)^2`.
    pub movement_limit: f64,
    pub additions: Vec<RelevantAddition>,
    /// Relevant sets after the step (full traces).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relevant: Option<Vec<Vec<usize>>>,
    /// Per-player restricted payoffs, means and variances after the step
    /// (full traces).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restricted_payoffs: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variances: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MActionPurifyTrace {
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub level: TraceLevel,
    pub thresholds: MActionThresholds,
    pub precondition: PreconditionCheck,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_profile: Option<MixedProfile>,

    /// Stage 1: players that moved mass off actions with regret above `delta0`.
    pub step1_moved: Vec<usize>,
    pub wsne_max_support_regret: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wsne_profile: Option<MixedProfile>,

    /// Stage 2.
    pub order: Vec<usize>,
    pub initial_relevant: Vec<Vec<usize>>,
    pub steps: Vec<MActionStep>,
    pub budget: VarianceBudget,
    pub final_relevant: Vec<Vec<usize>>,
    pub terminal_variance: f64,
    /// `8 n^2 lambda^2 ln 3m`.
    pub terminal_variance_bound: f64,
    pub rounded_profile: PureProfile,

    /// Stage 3: players with regret `> delta1` switched.
    pub step3_switched: Vec<usize>,
    /// `16 n^2 lambda^2 m ln(3m) / delta1^2`.
    pub switch_limit: f64,
    /// `2 m * terminal_variance / delta1^2`.
    pub switch_limit_observed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_profile: Option<PureProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_max_regret: Option<f64>,
    pub final_bound: f64,
}

struct Wsne {
    precondition: PreconditionCheck,
    moved: Vec<usize>,
    max_support_regret: f64,
    profile: MixedProfile,
}

fn wsne_stage<G: PayoffModel + ?Sized>(game: &G, profile: &MixedProfile) -> Result<Wsne> {
    check_mixed(game, profile)?;
    let (n, m, lambda) = (game.players(), game.actions(), game.lambda());
    let th = MActionThresholds::new(n, m, lambda);
    let precondition = check_precondition(game, profile, th.epsilon0)?;

    let table = game.payoff_table(profile);
    let mut out = profile.clone();
    let mut moved = Vec::new();
    for (i, u) in table.iter().enumerate() {
        let best = argmax_lowest(u);
        let mut row = profile.row(i).to_vec();
        let mut shifted = 0.0;
        for j in 0..m {
            if row[j] > 0.0 && u[best] - u[j] > th.delta0 {
                shifted += row[j];
                row[j] = 0.0;
            }
        }
        if shifted > 0.0 {
            row[best] += shifted;
            out.raw_mut()[i * m..(i + 1) * m].copy_from_slice(&row);
            moved.push(i);
        }
    }

    let max_support_regret = max_support_regret(game, &out);
    ensure(
        || BoundBreach::new("wsne", "support regret", max_support_regret, th.epsilon1),
        max_support_regret,
        th.epsilon1,
    )?;
    Ok(Wsne {
        precondition,
        moved,
        max_support_regret,
        profile: out,
    })
}

/// Stage 1: every player moves all probability on actions with regret above
/// `delta0` to their best response, all players at once. The result is an
/// `epsilon1`-WSNE.
///
/// The input must be an `epsilon0`-ANE; up to twice that is accepted with a
/// relaxed precondition flag.
pub fn ane_to_wsne_m<G: PayoffModel + ?Sized>(
    game: &G,
    profile: &MixedProfile,
) -> Result<MixedProfile> {
    wsne_stage(game, profile).map(|w| w.profile)
}

/// Stage 2 in index order. See [`purify_rounding_m_in_order`].
pub fn purify_rounding_m<G: PayoffModel + ?Sized>(
    game: &G,
    wsne: &MixedProfile,
    level: TraceLevel,
) -> Result<(PureProfile, MActionPurifyTrace)> {
    let order: Vec<usize> = (0..game.players()).collect();
    purify_rounding_m_in_order(game, wsne, &order, level)
}

/// Adds best outside actions to `set` while they pay at least the set mean.
/// Returns the additions; `set` stays sorted.
fn grow_relevant_set(
    u: &[f64],
    set: &mut Vec<usize>,
    player: usize,
    lambda: f64,
) -> Vec<RelevantAddition> {
    let m = u.len();
    let mut additions = Vec::new();
    loop {
        let (mean, var) = restricted_mean_variance(u, set);
        let outside = (0..m)
            .filter(|j| set.binary_search(j).is_err())
            .fold(None, |best: Option<usize>, j| match best {
                Some(b) if u[b] >= u[j] => Some(b),
                _ => Some(j),
            });
        let Some(j) = outside else { break };
        if u[j] < mean {
            break;
        }
        let k = set.len();
        let kf = k as f64;
        let gap = u[j] - mean;
        let predicted_change = (kf / (kf + 1.0) * gap * gap - var) / (kf + 1.0);
        let pos = set.binary_search(&j).unwrap_err();
        set.insert(pos, j);
        let actual_change = restricted_mean_variance(u, set).1 - var;
        additions.push(RelevantAddition {
            player,
            action: j,
            k,
            gap,
            predicted_change,
            actual_change,
            limit: 4.0 * kf * lambda * lambda / ((kf + 1.0) * (kf + 1.0)),
        });
    }
    additions
}

/// `L` with `u_i(S) - mean = c + L p_ip` for player `i` against `ip`:
/// rows are `beta[i][ip][s][.]` for `s in S`, centred across `ip`'s actions
/// and then across the rows.
fn response_matrix<G: PayoffModel + ?Sized>(game: &G, i: usize, ip: usize, set: &[usize]) -> Vec<Vec<f64>> {
    let m = game.actions();
    let mut rows: Vec<Vec<f64>> = set
        .iter()
        .map(|&s| {
            let row: Vec<f64> = (0..m).map(|jp| game.coefficient(i, ip, s, jp)).collect();
            let mean = row.iter().sum::<f64>() / m as f64;
            row.into_iter().map(|x| x - mean).collect()
        })
        .collect();
    let k = set.len() as f64;
    for jp in 0..m {
        let col_mean = rows.iter().map(|r| r[jp]).sum::<f64>() / k;
        for r in rows.iter_mut() {
            r[jp] -= col_mean;
        }
    }
    rows
}

/// Stage 2: rounds players to pure strategies in `order`.
///
/// On player `i'`'s turn, every other player's centred restricted payoffs
/// are affine in `p_i'`, `c_i + L_i p_i'`, so their variance has linear term
/// `b_i . p_i'` with `b_i = 2 c_i^T L_i`. Player `i'` plays the action of its
/// own relevant set minimising `b = sum_i b_i / |S_i|`, which makes the
/// linear change `b . dp` non-positive. A player that is already pure keeps
/// its action. Afterwards every relevant set is regrown.
///
/// The trace's stage-1 fields are left empty.
pub fn purify_rounding_m_in_order<G: PayoffModel + ?Sized>(
    game: &G,
    wsne: &MixedProfile,
    order: &[usize],
    level: TraceLevel,
) -> Result<(PureProfile, MActionPurifyTrace)> {
    check_mixed(game, wsne)?;
    let (n, m, lambda) = (game.players(), game.actions(), game.lambda());
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::Usage(format!("order must be a permutation of 0..{n}")));
    }
    let th = MActionThresholds::new(n, m, lambda);
    let precondition = check_wsne(game, wsne, th.epsilon1)?;
    let full = level == TraceLevel::Full;
    let (nf, mf) = (n as f64, m as f64);
    let shrink = (mf - 1.0) / mf * lambda;

    let mut p = wsne.clone();
    let mut u = game.payoff_table(&p);
    let mut sets: Vec<Vec<usize>> = u
        .iter()
        .map(|ui| {
            let best = ui.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (0..m).filter(|&j| best - ui[j] <= th.epsilon1 + TOL).collect()
        })
        .collect();
    let initial_relevant = sets.clone();
    let total_variance = |u: &[Vec<f64>], sets: &[Vec<usize>]| -> Vec<f64> {
        u.iter()
            .zip(sets)
            .map(|(ui, s)| restricted_mean_variance(ui, s).1)
            .collect()
    };

    let initial = total_variance(&u, &sets).iter().sum::<f64>();
    let mut budget = VarianceBudget {
        initial,
        initial_limit: 2.0 * (nf * shrink).powi(2),
        additions: 0.0,
        additions_limit: 4.0 * nf * lambda * lambda * ((mf - 1.0).ln() + 1.0),
        movement: 0.0,
        movement_limit: (nf * shrink).powi(2),
    };
    ensure(
        || BoundBreach::new("rounding", "initial variance budget", initial, budget.initial_limit),
        initial,
        budget.initial_limit,
    )?;

    let mut steps = Vec::new();
    let mut current = initial;
    for (k, &ip) in order.iter().enumerate() {
        let variance_before = current;
        let movement_limit = (nf - 1.0) * shrink * shrink;
        let (chosen, coefficients, slope) = match p.pure_action(ip) {
            Some(j) => (j, None, 0.0),
            None => {
                let old = p.row(ip).to_vec();
                let mut b = vec![0.0; m];
                let mut predicted = 0.0;
                let mut plans = Vec::with_capacity(n);
                for i in (0..n).filter(|&i| i != ip) {
                    let set = &sets[i];
                    let kf = set.len() as f64;
                    let l = response_matrix(game, i, ip, set);
                    let (mean, _) = restricted_mean_variance(&u[i], set);
                    let c: Vec<f64> = set
                        .iter()
                        .zip(&l)
                        .map(|(&s, row)| {
                            u[i][s] - mean - row.iter().zip(&old).map(|(a, q)| a * q).sum::<f64>()
                        })
                        .collect();
                    for jp in 0..m {
                        let bi: f64 = 2.0 * c.iter().zip(&l).map(|(cr, row)| cr * row[jp]).sum::<f64>();
                        b[jp] += bi / kf;
                    }
                    plans.push((i, c, l));
                }
                let j = sets[ip]
                    .iter()
                    .copied()
                    .fold(None, |best: Option<usize>, j| match best {
                        Some(bj) if b[bj] <= b[j] => Some(bj),
                        _ => Some(j),
                    })
                    .expect("relevant sets are never empty");
                let slope = b[j] - b.iter().zip(&old).map(|(x, q)| x * q).sum::<f64>();
                if slope > SLOPE_TOL {
                    return Err(Error::Breach(
                        BoundBreach::new("rounding", "b * dp", slope, SLOPE_TOL)
                            .at_step(k)
                            .for_player(ip),
                    ));
                }
                // Variance after the move predicted from the decomposition,
                // cross-checked against the recomputation below.
                for (i, c, l) in &plans {
                    let kf = sets[*i].len() as f64;
                    predicted += c.iter().zip(l).map(|(cr, row)| (cr + row[j]).powi(2)).sum::<f64>() / kf;
                }
                p.set_pure(ip, j);
                u = game.payoff_table(&p);
                let own = restricted_mean_variance(&u[ip], &sets[ip]).1;
                let moved: f64 = total_variance(&u, &sets).iter().sum();
                let drift = (moved - own - predicted).abs();
                ensure(
                    || BoundBreach::new("rounding", "variance decomposition", drift, 0.0).at_step(k),
                    drift,
                    0.0,
                )?;
                (j, Some(b), slope)
            }
        };
        let variance_moved: f64 = total_variance(&u, &sets).iter().sum();
        let moved_by = variance_moved - variance_before;
        ensure(
            || BoundBreach::new("rounding", "movement variance per step", moved_by, movement_limit)
                .at_step(k)
                .for_player(ip),
            moved_by,
            movement_limit,
        )?;
        budget.movement += moved_by;
        ensure(
            || BoundBreach::new("rounding", "movement variance budget", budget.movement, budget.movement_limit)
                .at_step(k),
            budget.movement,
            budget.movement_limit,
        )?;

        let mut additions = Vec::new();
        for i in 0..n {
            let added = grow_relevant_set(&u[i], &mut sets[i], i, lambda);
            for a in &added {
                let check = |name: &'static str, observed: f64, limit: f64| {
                    ensure(
                        || BoundBreach::new("rounding", name, observed, limit).at_step(k).for_player(i),
                        observed,
                        limit,
                    )
                };
                check("addition gap", a.gap, 2.0 * lambda)?;
                check(
                    "addition variance formula",
                    (a.predicted_change - a.actual_change).abs(),
                    0.0,
                )?;
                check("addition variance increase", a.actual_change, a.limit)?;
            }
            let (mean, _) = restricted_mean_variance(&u[i], &sets[i]);
            let outside_best = (0..m)
                .filter(|j| sets[i].binary_search(j).is_err())
                .map(|j| u[i][j])
                .fold(f64::NEG_INFINITY, f64::max);
            if outside_best >= mean + POSTCONDITION_TOL {
                return Err(Error::Breach(
                    BoundBreach::new("rounding", "relevant-set postcondition", outside_best, mean)
                        .at_step(k)
                        .for_player(i),
                ));
            }
            additions.extend(added);
        }
        let variances = total_variance(&u, &sets);
        let variance_after: f64 = variances.iter().sum();
        budget.additions += variance_after - variance_moved;
        ensure(
            || BoundBreach::new("rounding", "addition variance budget", budget.additions, budget.additions_limit)
                .at_step(k),
            budget.additions,
            budget.additions_limit,
        )?;
        current = variance_after;

        if level != TraceLevel::Off {
            steps.push(MActionStep {
                step: k,
                player: ip,
                skipped: coefficients.is_none(),
                chosen_action: chosen,
                coefficients,
                slope,
                variance_before,
                variance_moved,
                variance_after,
                movement_limit,
                additions,
                relevant: full.then(|| sets.clone()),
                restricted_payoffs: full.then(|| {
                    sets.iter()
                        .zip(&u)
                        .map(|(s, ui)| s.iter().map(|&j| ui[j]).collect())
                        .collect()
                }),
                means: full.then(|| {
                    sets.iter()
                        .zip(&u)
                        .map(|(s, ui)| restricted_mean_variance(ui, s).0)
                        .collect()
                }),
                variances: full.then(|| variances.clone()),
            });
        }
    }

    let terminal_variance_bound = 8.0 * nf * nf * lambda * lambda * (3.0 * mf).ln();
    ensure(
        || BoundBreach::new("rounding", "terminal variance", current, terminal_variance_bound),
        current,
        terminal_variance_bound,
    )?;
    let telescoped = budget.initial + budget.additions + budget.movement;
    ensure(
        || BoundBreach::new("rounding", "variance bookkeeping", (telescoped - current).abs(), 0.0),
        (telescoped - current).abs(),
        0.0,
    )?;
    let rounded = p.to_pure().expect("every player was rounded");

    let delta1_sq = th.delta1 * th.delta1;
    let trace = MActionPurifyTrace {
        n,
        m,
        lambda,
        level,
        thresholds: th,
        wsne_max_support_regret: precondition.observed,
        precondition,
        input_profile: None,
        step1_moved: Vec::new(),
        wsne_profile: full.then(|| wsne.clone()),
        order: order.to_vec(),
        initial_relevant,
        steps,
        budget,
        final_relevant: sets,
        terminal_variance: current,
        terminal_variance_bound,
        rounded_profile: rounded.clone(),
        step3_switched: Vec::new(),
        switch_limit: 16.0 * nf * nf * lambda * lambda * mf * (3.0 * mf).ln() / delta1_sq,
        switch_limit_observed: 2.0 * mf * current / delta1_sq,
        final_profile: None,
        final_max_regret: None,
        final_bound: m_action_final_bound(n, m, lambda),
    };
    Ok((rounded, trace))
}

/// Stage 3: every player with regret above `delta1` switches to their best
/// response, all at once.
///
/// `pure` must be the rounded profile recorded in `trace`. Checks that each
/// player's played action and best response lie in its relevant set, the
/// switcher count against both `2 m V / delta1^2` and
/// `16 n^2 lambda^2 m ln(3m) / delta1^2`, and the final
/// `6 lambda (n^2 m ln 3m)^(1/3)` bound; fills in the stage-3 fields.
pub fn correct_m<G: PayoffModel + ?Sized>(
    game: &G,
    pure: &PureProfile,
    trace: &mut MActionPurifyTrace,
) -> Result<PureProfile> {
    if pure != &trace.rounded_profile {
        return Err(Error::Usage(
            "correct_m needs the profile produced by the rounding stage".into(),
        ));
    }
    for i in 0..game.players() {
        let u = game.pure_payoff_vector(i, pure);
        let set = &trace.final_relevant[i];
        for (what, j) in [("played action", pure.action(i)), ("best response", argmax_lowest(&u))] {
            if set.binary_search(&j).is_err() {
                return Err(Error::Breach(
                    BoundBreach::new("correction", &format!("{what} outside the relevant set"), j as f64, 0.0)
                        .for_player(i),
                ));
            }
        }
    }

    let (out, switched) = switch_high_regret(game, pure, trace.thresholds.delta1, false);
    let count = switched.len() as f64;
    ensure(
        || BoundBreach::new("correction", "switcher count (variance)", count, trace.switch_limit_observed),
        count,
        trace.switch_limit_observed,
    )?;
    ensure(
        || BoundBreach::new("correction", "switcher count", count, trace.switch_limit),
        count,
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
pub fn purify_m<G: PayoffModel + ?Sized>(
    game: &G,
    profile: &MixedProfile,
    level: TraceLevel,
) -> Result<(PureProfile, MActionPurifyTrace)> {
    let w = wsne_stage(game, profile)?;
    let (rounded, mut trace) = purify_rounding_m(game, &w.profile, level)?;
    trace.precondition = w.precondition;
    trace.step1_moved = w.moved;
    trace.wsne_max_support_regret = w.max_support_regret;
    if level == TraceLevel::Full {
        trace.input_profile = Some(profile.clone());
    }
    let out = correct_m(game, &rounded, &mut trace)?;
    Ok((out, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PolymatrixGame;

    #[test]
    fn pure_zero_regret_input_is_unchanged() {
        let mut g = PolymatrixGame::zeros(3, 3, 0.2).unwrap();
        g.set_block(0, 1, &[vec![0.0; 3], vec![0.0; 3], vec![0.1; 3]]).unwrap();
        let a = PureProfile::new(vec![2, 0, 1], 3).unwrap();
        let p = MixedProfile::from_pure(&a, 3);
        assert_eq!(ane_to_wsne_m(&g, &p).unwrap(), p);
        let (out, trace) = purify_m(&g, &p, TraceLevel::Potentials).unwrap();
        assert_eq!(out, a);
        assert!(trace.steps.iter().all(|s| s.skipped));
        assert!(trace.step3_switched.is_empty());
    }

    #[test]
    fn forced_mass_move() {
        // Player 0's third action trails the others by 0.5 whatever happens.
        let (n, m, lambda) = (2, 3, 0.5);
        let mut g = PolymatrixGame::zeros(n, m, lambda).unwrap();
        g.set_block(0, 1, &[vec![0.5; 3], vec![0.5; 3], vec![0.0; 3]]).unwrap();
        let th = MActionThresholds::new(n, m, lambda);
        assert!(0.5 > th.delta0 && 0.025 <= th.epsilon0);
        let p = MixedProfile::from_rows(vec![vec![0.5, 0.45, 0.05], vec![1.0, 0.0, 0.0]]).unwrap();
        let w = ane_to_wsne_m(&g, &p).unwrap();
        assert_eq!(w.row(0), &[0.55, 0.45, 0.0]);
        assert_eq!(w.row(1), p.row(1));
    }

    #[test]
    fn thresholds_minimise_the_correction_bound() {
        for (n, m, lambda) in [(20, 3, 0.05), (50, 8, 0.02), (7, 4, 0.3)] {
            let th = MActionThresholds::new(n, m, lambda);
            let (nf, mf) = (n as f64, m as f64);
            let k = 32.0 * nf * nf * lambda.powi(3) * mf * (3.0 * mf).ln();
            let f = |d: f64| d + k / (d * d);
            // golden-section search for the minimiser
            let (mut lo, mut hi) = (1e-6, 100.0);
            let r = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..200 {
                let a = hi - r * (hi - lo);
                let b = lo + r * (hi - lo);
                if f(a) < f(b) {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            let best = 0.5 * (lo + hi);
            assert!((best - th.delta1).abs() < 1e-6 * th.delta1, "{best} {}", th.delta1);
            assert!((f(th.delta1) - 1.5 * th.delta1).abs() < 1e-12);
            assert!((1.5 * th.delta1 - m_action_final_bound(n, m, lambda)).abs() < 1e-12);
        }
    }

    #[test]
    fn addition_formula_matches_recomputation() {
        let u = [0.30, 0.10, 0.29, 0.27, 0.05];
        let mut set = vec![0, 1];
        let added = grow_relevant_set(&u, &mut set, 0, 1.0);
        assert_eq!(set, vec![0, 1, 2, 3]);
        assert_eq!(added.iter().map(|a| a.action).collect::<Vec<_>>(), vec![2, 3]);
        for a in &added {
            assert!((a.predicted_change - a.actual_change).abs() < 1e-15);
        }
    }

    #[test]
    fn response_matrix_columns_have_bounded_spread() {
        let mut g = PolymatrixGame::zeros(2, 3, 0.4).unwrap();
        g.set_block(0, 1, &[vec![0.0, 0.4, 0.2], vec![0.5, 0.1, 0.3], vec![0.0, 0.0, 0.0]])
            .unwrap();
        let l = response_matrix(&g, 0, 1, &[0, 1, 2]);
        let bound = (2.0 / 3.0) * 0.4;
        for jp in 0..3 {
            let col: Vec<f64> = l.iter().map(|r| r[jp]).collect();
            assert!(col.iter().sum::<f64>().abs() < 1e-15);
            let var = col.iter().map(|x| x * x).sum::<f64>() / 3.0;
            assert!(var <= bound * bound + 1e-15);
        }
    }
}
