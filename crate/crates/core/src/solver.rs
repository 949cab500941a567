//! Mixed approximate equilibria.
//!
//! [`solve_mixed`] looks for a profile in which every player plays its logit
//! (softmax) response at a temperature low enough that such a response has
//! regret well below the target.
//!
//! On games where many players mix at equilibrium the smoothed-response fixed
//! point is typically repelling, and damped iteration does not settle on it.
//! The solver therefore first traces the logit fixed point from high
//! temperature downwards by pseudo-arclength continuation (Newton corrector
//! on the payoff advantages). Games too large for dense linear algebra, and
//! the rare paths the tracer loses, fall back to simultaneous smoothed
//! fictitious play with an annealed temperature. Either way the maximum
//! regret is evaluated exactly and the best profile seen is returned.
//! [`brute_force_kuniform`] scans the whole `1/k` grid for tiny games.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{check_mixed, regret_from_payoffs, PayoffModel};
use crate::profile::MixedProfile;

/// Largest grid the exhaustive scan accepts.
pub const GRID_LIMIT: f64 = 1e7;

const ANNEAL_STEPS: usize = 1_500;
const STALL_WINDOW: usize = 300;
const MIN_DAMPING: f64 = 1.0 / 64.0;

/// Newton continuation is skipped above this many unknowns (`n (m - 1)`).
const CONTINUATION_LIMIT: usize = 2_000;
const NEWTON_ITERATIONS: usize = 12;
const NEWTON_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StepSchedule {
    /// Constant step towards the smoothed response.
    Fixed { step: f64 },
    /// Step `1 / (t + 2)` where `t` counts iterations since the temperature
    /// last reached its floor.
    Harmonic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub target_epsilon: f64,
    pub max_iterations: usize,
    pub step_schedule: StepSchedule,
    pub seed: u64,
    /// When set, run the exhaustive `1/k` grid scan instead of the dynamics.
    pub uniform_grid_k: Option<usize>,
    /// Final logit temperature; derived from the target when absent.
    #[serde(default)]
    pub temperature: Option<f64>,
    /// Trace the logit path with Newton steps before falling back to the
    /// dynamics. Only games with at most 2000 `n (m - 1)` unknowns use it.
    #[serde(default = "default_true")]
    pub continuation: bool,
}

fn default_true() -> bool {
    true
}

impl SolverConfig {
    /// Targets the input quality the purifier for this game needs:
    /// `lambda / 8` for two actions, `((m - 1) / m)^2 lambda` otherwise.
    pub fn for_game<G: PayoffModel + ?Sized>(game: &G) -> Self {
        Self {
            target_epsilon: default_target(game.actions(), game.lambda()),
            max_iterations: 20_000,
            step_schedule: StepSchedule::Fixed { step: 0.2 },
            seed: 0,
            uniform_grid_k: None,
            temperature: None,
            continuation: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_epsilon > 0.0) {
            return Err(Error::Validation(format!(
                "target epsilon must be positive, got {}",
                self.target_epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Validation("max_iterations must be at least 1".into()));
        }
        if let StepSchedule::Fixed { step } = self.step_schedule {
            if !(step > 0.0 && step <= 1.0) {
                return Err(Error::Validation(format!("step {step} must lie in (0, 1]")));
            }
        }
        if let Some(t) = self.temperature {
            if !(t > 0.0) {
                return Err(Error::Validation(format!("temperature {t} must be positive")));
            }
        }
        Ok(())
    }
}

pub fn default_target(m: usize, lambda: f64) -> f64 {
    if m == 2 {
        lambda / 8.0
    } else {
        let r = (m as f64 - 1.0) / m as f64;
        r * r * lambda
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub profile: MixedProfile,
    pub achieved_max_regret: f64,
    pub iterations_used: usize,
    pub converged: bool,
    /// Newton iterations spent on the logit continuation (0 when the
    /// dynamics alone reached the target).
    #[serde(default)]
    pub newton_iterations: usize,
}

/// Maximum regret of `profile`, computed from scratch.
pub fn max_regret<G: PayoffModel + ?Sized>(game: &G, profile: &MixedProfile) -> f64 {
    (0..game.players())
        .map(|i| regret_from_payoffs(&game.payoff_vector(i, profile), profile.row(i)))
        .fold(0.0, f64::max)
}

/// Logit-path continuation followed, if that misses the target, by smoothed
/// fictitious play; or the grid scan when `uniform_grid_k` is set.
///
/// Never fails for running out of budget: `converged` is false instead.
pub fn solve_mixed<G: PayoffModel + ?Sized>(game: &G, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    if let Some(k) = config.uniform_grid_k {
        let mut result = brute_force_kuniform(game, k)?;
        result.converged = result.achieved_max_regret <= config.target_epsilon;
        return Ok(result);
    }

    let (n, m) = (game.players(), game.actions());
    let floor = config
        .temperature
        .unwrap_or_else(|| default_temperature(m, config.target_epsilon));
    // Payoff differences are of order lambda * sqrt(n); start above that.
    let start = (game.lambda() * (n as f64).sqrt()).max(floor);

    let mut best_profile = MixedProfile::uniform(n, m);
    let mut best_regret = f64::INFINITY;
    let mut newton_iterations = 0;
    if config.continuation && n * (m - 1) <= CONTINUATION_LIMIT {
        let path = logit_continuation(game, start, floor, config.target_epsilon);
        newton_iterations = path.newton_iterations;
        if let Some((profile, regret)) = path.best {
            best_profile = profile;
            best_regret = regret;
        }
    }

    let mut iterations_used = 0;
    if best_regret > config.target_epsilon {
        let dynamics = smoothed_play(game, config, start, floor);
        iterations_used = dynamics.iterations_used;
        if dynamics.regret < best_regret {
            best_regret = dynamics.regret;
            best_profile = dynamics.profile;
        }
    }

    Ok(SolveResult {
        achieved_max_regret: best_regret,
        converged: best_regret <= config.target_epsilon,
        profile: best_profile,
        iterations_used,
        newton_iterations,
    })
}

struct DynamicsOutcome {
    profile: MixedProfile,
    regret: f64,
    iterations_used: usize,
}

fn smoothed_play<G: PayoffModel + ?Sized>(
    game: &G,
    config: &SolverConfig,
    start: f64,
    floor: f64,
) -> DynamicsOutcome {
    let (n, m) = (game.players(), game.actions());
    let anneal_steps = (config.max_iterations / 4).clamp(1, ANNEAL_STEPS) as f64;
    let decay = (floor / start).powf(1.0 / anneal_steps);

    let mut profile = initial_profile(n, m, config.seed);
    let mut best_profile = profile.clone();
    let mut best_regret = f64::INFINITY;
    let mut temperature = start;
    let mut since_floor = 0usize;
    let mut since_improvement = 0usize;
    let mut damping: f64 = 1.0;
    let mut iterations_used = 0;

    for t in 0..config.max_iterations {
        iterations_used = t + 1;
        let table = game.payoff_table(&profile);
        let regret = table
            .iter()
            .zip(profile.rows())
            .map(|(u, row)| regret_from_payoffs(u, row))
            .fold(0.0, f64::max);
        if regret < best_regret {
            best_regret = regret;
            best_profile.clone_from(&profile);
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
        if regret <= config.target_epsilon {
            break;
        }
        // At the floor temperature a stalled fixed-step run is usually
        // oscillating around a steep fixed point: shrink the step.
        if temperature <= floor && since_improvement >= STALL_WINDOW {
            if damping <= MIN_DAMPING {
                break;
            }
            damping = (damping * 0.5).max(MIN_DAMPING);
            since_improvement = 0;
        }

        let step = match config.step_schedule {
            StepSchedule::Fixed { step } => step * damping,
            StepSchedule::Harmonic => 1.0 / (since_floor as f64 + 2.0),
        };
        let raw = profile.raw_mut();
        for (i, u) in table.iter().enumerate() {
            let response = softmax(u, temperature);
            for (x, r) in raw[i * m..(i + 1) * m].iter_mut().zip(response) {
                *x += step * (r - *x);
            }
        }

        if temperature > floor {
            temperature = (temperature * decay).max(floor);
        } else {
            since_floor += 1;
        }
    }
    DynamicsOutcome {
        profile: best_profile,
        regret: best_regret,
        iterations_used,
    }
}

struct PathOutcome {
    best: Option<(MixedProfile, f64)>,
    newton_iterations: usize,
}

/// Traces the logit fixed point from temperature `start` down to `floor` by
/// pseudo-arclength continuation, which also follows the path through folds
/// where the temperature turns back. Stops early once a point on the path has
/// regret at most `target`.
///
/// Unknowns are scaled payoff advantages over action 0,
/// `w[i][j] = (u_i(j) - u_i(0)) / start` for `j >= 1`, and the log precision
/// `theta = ln(start / tau)`, so the logit response is `softmax(e^theta [0, w])`.
fn logit_continuation<G: PayoffModel + ?Sized>(
    game: &G,
    start: f64,
    floor: f64,
    target: f64,
) -> PathOutcome {
    let (n, m) = (game.players(), game.actions());
    let system = PathSystem::new(game, start);
    let size = n * (m - 1);
    let theta_end = (start / floor).ln();
    let mut outcome = PathOutcome {
        best: None,
        newton_iterations: 0,
    };

    // Below `theta_0` the response map is a contraction, so the fixed point
    // there is unique and lies on the branch that reaches zero precision.
    // Starting any later risks entering that branch past a fold, backwards.
    let theta_0 = system.contraction_theta().min(0.0);
    let mut x = DVector::zeros(size + 1);
    x.rows_mut(0, size)
        .copy_from(&system.advantages(&MixedProfile::uniform(n, m)));
    x[size] = theta_0;
    let (ok, used) = system.correct_at_fixed_theta(&mut x);
    outcome.newton_iterations += used;
    if !ok {
        return outcome;
    }

    let Some(mut t) = system.tangent(&x, None) else {
        return outcome;
    };
    let mut h = INITIAL_ARC_STEP;
    for _ in 0..MAX_ARC_STEPS {
        let profile = system.profile(&x);
        let regret = max_regret(game, &profile);
        if outcome.best.as_ref().is_none_or(|(_, r)| regret < *r) {
            outcome.best = Some((profile, regret));
        }
        if regret <= target || x[size] >= theta_end || x[size] < theta_0 - 1.0 {
            return outcome;
        }

        loop {
            let predicted = &x + &t * h;
            let mut trial = predicted.clone();
            let (ok, used) = system.correct_on_plane(&mut trial, &predicted, &t);
            outcome.newton_iterations += used;
            // Reject steps that needed a long correction or turned sharply:
            // both are signs of having jumped across a hairpin to another
            // stretch of the path.
            let accepted = (ok && (&trial - &predicted).norm() <= 0.5 * h)
                .then(|| system.tangent(&trial, Some(&t)))
                .flatten()
                .filter(|next| next.dot(&t) >= MIN_TANGENT_COSINE);
            if let Some(next) = accepted {
                x = trial;
                t = next;
                if used <= 3 {
                    h = (h * 1.5).min(MAX_ARC_STEP);
                }
                break;
            }
            h *= 0.5;
            if h < MIN_ARC_STEP {
                return outcome;
            }
        }
    }
    outcome
}

const INITIAL_ARC_STEP: f64 = 0.25;
const MAX_ARC_STEP: f64 = 1.0;
const MIN_ARC_STEP: f64 = 1e-6;
const MAX_ARC_STEPS: usize = 5_000;
const MIN_TANGENT_COSINE: f64 = 0.9;

struct PathSystem<'g, G: ?Sized> {
    game: &'g G,
    n: usize,
    m: usize,
    scale: f64,
    /// `A[(i, j - 1), (i', j')] = (beta[i][i'][j][j'] - beta[i][i'][0][j']) / scale`.
    coupling: DMatrix<f64>,
}

impl<'g, G: PayoffModel + ?Sized> PathSystem<'g, G> {
    fn new(game: &'g G, scale: f64) -> Self {
        let (n, m) = (game.players(), game.actions());
        let coupling = DMatrix::from_fn(n * (m - 1), n * m, |r, c| {
            let (i, j, ip, jp) = (r / (m - 1), r % (m - 1) + 1, c / m, c % m);
            (game.coefficient(i, ip, j, jp) - game.coefficient(i, ip, 0, jp)) / scale
        });
        Self {
            game,
            n,
            m,
            scale,
            coupling,
        }
    }

    /// `theta` below which `w -> A softmax(e^theta [0, w])` contracts in the
    /// max norm: the map's Lipschitz constant is at most `2 e^theta |A|_inf`.
    fn contraction_theta(&self) -> f64 {
        let norm = self
            .coupling
            .row_iter()
            .map(|r| r.iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if norm > 0.0 {
            -(2.0 * norm).ln()
        } else {
            0.0
        }
    }

    fn size(&self) -> usize {
        self.n * (self.m - 1)
    }

    fn advantages(&self, profile: &MixedProfile) -> DVector<f64> {
        let table = self.game.payoff_table(profile);
        DVector::from_iterator(
            self.size(),
            table
                .iter()
                .flat_map(|u| u[1..].iter().map(move |x| (x - u[0]) / self.scale)),
        )
    }

    /// `([0, w_i], softmax(e^theta [0, w_i]))`.
    fn row(&self, x: &DVector<f64>, i: usize) -> (Vec<f64>, Vec<f64>) {
        let k = self.m - 1;
        let mut y = Vec::with_capacity(self.m);
        y.push(0.0);
        y.extend_from_slice(&x.as_slice()[i * k..(i + 1) * k]);
        let s = softmax(&y, (-x[self.size()]).exp());
        (y, s)
    }

    fn profile(&self, x: &DVector<f64>) -> MixedProfile {
        let m = self.m;
        let mut profile = MixedProfile::uniform(self.n, m);
        let raw = profile.raw_mut();
        for i in 0..self.n {
            raw[i * m..(i + 1) * m].copy_from_slice(&self.row(x, i).1);
        }
        profile
    }

    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        x.rows(0, self.size()) - self.advantages(&self.profile(x))
    }

    /// `size x (size + 1)` Jacobian of the residual; the last column is the
    /// derivative in `theta`.
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (n, m, k, size) = (self.n, self.m, self.m - 1, self.size());
        let kappa = x[size].exp();
        let mut jac = DMatrix::<f64>::zeros(size, size + 1);
        jac.view_mut((0, 0), (size, size)).fill_with_identity();
        for ip in 0..n {
            let (y, s) = self.row(x, ip);
            let mean: f64 = y.iter().zip(&s).map(|(a, b)| a * b).sum();
            for jp in 0..m {
                let src = self.coupling.column(ip * m + jp);
                // d s_j' / d theta = kappa s_j' (y_j' - mean)
                let dt = kappa * s[jp] * (y[jp] - mean);
                if dt != 0.0 {
                    jac.column_mut(size).axpy(-dt, &src, 1.0);
                }
                // d s_j' / d w_c = kappa s_j' ([j' == c] - s_c)
                for c in 1..m {
                    let d = kappa * s[jp] * (if jp == c { 1.0 } else { 0.0 } - s[c]);
                    if d != 0.0 {
                        jac.column_mut(ip * k + c - 1).axpy(-d, &src, 1.0);
                    }
                }
            }
        }
        jac
    }

    /// Unit null vector of the Jacobian at `x`, oriented along `previous`
    /// (or towards increasing `theta` at the first step).
    fn tangent(&self, x: &DVector<f64>, previous: Option<&DVector<f64>>) -> Option<DVector<f64>> {
        let size = self.size();
        let mut system = self.jacobian(x).insert_row(size, 0.0);
        match previous {
            Some(t) => system.row_mut(size).copy_from(&t.transpose()),
            None => system[(size, size)] = 1.0,
        }
        let mut rhs = DVector::zeros(size + 1);
        rhs[size] = 1.0;
        let t = system.lu().solve(&rhs)?;
        let norm = t.norm();
        (norm.is_finite() && norm > 0.0).then(|| t / norm)
    }

    /// Newton on the residual with `theta` held fixed.
    fn correct_at_fixed_theta(&self, x: &mut DVector<f64>) -> (bool, usize) {
        self.newton(x, None)
    }

    /// Newton on the residual plus `t . (x - predicted) = 0`.
    fn correct_on_plane(
        &self,
        x: &mut DVector<f64>,
        predicted: &DVector<f64>,
        t: &DVector<f64>,
    ) -> (bool, usize) {
        self.newton(x, Some((predicted, t)))
    }

    fn newton(
        &self,
        x: &mut DVector<f64>,
        plane: Option<(&DVector<f64>, &DVector<f64>)>,
    ) -> (bool, usize) {
        let size = self.size();
        let full = |x: &DVector<f64>| {
            let mut r = self.residual(x).insert_row(size, 0.0);
            if let Some((p, t)) = plane {
                r[size] = t.dot(&(x - p));
            }
            r
        };
        let mut r = full(x);
        let mut norm = r.amax();
        for it in 0..NEWTON_ITERATIONS {
            if norm <= NEWTON_TOL {
                return (true, it);
            }
            let mut system = self.jacobian(x).insert_row(size, 0.0);
            match plane {
                Some((_, t)) => system.row_mut(size).copy_from(&t.transpose()),
                None => system[(size, size)] = 1.0,
            }
            let Some(step) = system.lu().solve(&(-&r)) else {
                return (false, it + 1);
            };
            let mut alpha = 1.0;
            loop {
                let candidate = &*x + &step * alpha;
                let rc = full(&candidate);
                let nc = rc.amax();
                if nc < norm * (1.0 - 1e-4 * alpha) || nc <= NEWTON_TOL {
                    *x = candidate;
                    r = rc;
                    norm = nc;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-3 {
                    return (false, it + 1);
                }
            }
        }
        (norm <= NEWTON_TOL, NEWTON_ITERATIONS)
    }
}

/// A logit response at temperature `tau` has regret at most `(m - 1) tau / e`;
/// aim for half the target.
fn default_temperature(m: usize, target: f64) -> f64 {
    0.5 * target * std::f64::consts::E / (m as f64 - 1.0)
}

fn initial_profile(n: usize, m: usize, seed: u64) -> MixedProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profile = MixedProfile::uniform(n, m);
    let raw = profile.raw_mut();
    for row in raw.chunks_mut(m) {
        let noise: Vec<f64> = (0..m).map(|_| 1e-3 * rng.gen::<f64>()).collect();
        row.copy_from_slice(&softmax(&noise, 1.0));
    }
    profile
}

fn softmax(u: &[f64], temperature: f64) -> Vec<f64> {
    let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = u.iter().map(|x| ((x - top) / temperature).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Number of `1/k` grid points on one simplex: `C(k + m - 1, m - 1)`.
fn simplex_grid_size(k: usize, m: usize) -> f64 {
    (1..m).fold(1.0, |acc, r| acc * (k + r) as f64 / r as f64)
}

/// All distributions over `m` actions whose entries are multiples of `1/k`,
/// in lexicographic order of the count vectors.
fn simplex_grid(k: usize, m: usize) -> Vec<Vec<f64>> {
    fn fill(k_left: usize, slot: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if slot == m - 1 {
            cur.push(k_left);
            out.push(cur.iter().map(|&c| c as f64 / k as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=k_left {
            cur.push(c);
            fill(k_left - c, slot + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    fill(k, 0, m, k, &mut Vec::with_capacity(m), &mut out);
    out
}

/// Exact minimizer of the maximum regret over the `1/k`-uniform grid; the
/// first minimizer in enumeration order wins ties.
pub fn brute_force_kuniform<G: PayoffModel + ?Sized>(game: &G, k: usize) -> Result<SolveResult> {
    if k == 0 {
        return Err(Error::Validation("grid resolution k must be at least 1".into()));
    }
    let (n, m) = (game.players(), game.actions());
    let per_player = simplex_grid_size(k, m);
    let total = per_player.powi(n as i32);
    if total > GRID_LIMIT {
        return Err(Error::TooLarge {
            what: format!("1/{k} grid over {n} players x {m} actions"),
            estimate: total,
            limit: GRID_LIMIT,
        });
    }
    let grid = simplex_grid(k, m);
    let mut counter = vec![0usize; n];
    let mut profile = MixedProfile::uniform(n, m);
    for i in 0..n {
        profile.set_row(i, &grid[0])?;
    }
    let mut best = (f64::INFINITY, profile.clone());
    let mut evaluated = 0usize;
    loop {
        evaluated += 1;
        let r = max_regret(game, &profile);
        if r < best.0 {
            best = (r, profile.clone());
        }
        // odometer increment, last player fastest
        let mut i = n;
        loop {
            if i == 0 {
                check_mixed(game, &best.1)?;
                return Ok(SolveResult {
                    profile: best.1,
                    achieved_max_regret: best.0,
                    iterations_used: evaluated,
                    converged: true,
                    newton_iterations: 0,
                });
            }
            i -= 1;
            counter[i] += 1;
            if counter[i] < grid.len() {
                profile.set_row(i, &grid[counter[i]])?;
                break;
            }
            counter[i] = 0;
            profile.set_row(i, &grid[0])?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PolymatrixGame;

    fn coordination() -> PolymatrixGame {
        let mut g = PolymatrixGame::zeros(2, 2, 1.0).unwrap();
        let eye = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        g.set_block(0, 1, &eye).unwrap();
        g.set_block(1, 0, &eye).unwrap();
        g
    }

    fn pennies() -> PolymatrixGame {
        // player 0 wants to match, player 1 wants to mismatch
        let mut g = PolymatrixGame::zeros(2, 2, 1.0).unwrap();
        g.set_block(0, 1, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        g.set_block(1, 0, &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        g
    }

    #[test]
    fn zero_game_converges_immediately() {
        let g = PolymatrixGame::zeros(4, 3, 0.5).unwrap();
        let res = solve_mixed(&g, &SolverConfig::for_game(&g)).unwrap();
        assert!(res.converged);
        assert_eq!(res.achieved_max_regret, 0.0);
        assert_eq!(res.iterations_used, 0);

        let cfg = SolverConfig {
            continuation: false,
            ..SolverConfig::for_game(&g)
        };
        assert_eq!(solve_mixed(&g, &cfg).unwrap().iterations_used, 1);
    }

    #[test]
    fn coordination_reaches_target() {
        let g = coordination();
        let cfg = SolverConfig::for_game(&g);
        let res = solve_mixed(&g, &cfg).unwrap();
        assert!(res.converged, "{res:?}");
        assert!((max_regret(&g, &res.profile) - res.achieved_max_regret).abs() < 1e-12);
        assert!(res.achieved_max_regret <= cfg.target_epsilon);
    }

    #[test]
    fn harmonic_schedule_on_pennies() {
        let g = pennies();
        let cfg = SolverConfig {
            step_schedule: StepSchedule::Harmonic,
            continuation: false,
            ..SolverConfig::for_game(&g)
        };
        let res = solve_mixed(&g, &cfg).unwrap();
        assert!(res.converged, "{res:?}");
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(simplex_grid_size(2, 2), 3.0);
        assert_eq!(simplex_grid_size(3, 3), 10.0);
        assert_eq!(simplex_grid(3, 3).len(), 10);
        assert!(simplex_grid(4, 3)
            .iter()
            .all(|row| (row.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn brute_force_small_cases() {
        let z = PolymatrixGame::zeros(3, 2, 0.5).unwrap();
        assert_eq!(brute_force_kuniform(&z, 1).unwrap().achieved_max_regret, 0.0);

        let res = brute_force_kuniform(&pennies(), 2).unwrap();
        assert_eq!(res.achieved_max_regret, 0.0);
        assert_eq!(res.profile.to_rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);

        let res = brute_force_kuniform(&coordination(), 1).unwrap();
        assert_eq!(res.achieved_max_regret, 0.0);
        let a = res.profile.to_pure().unwrap();
        assert_eq!(a.action(0), a.action(1));
    }

    #[test]
    fn brute_force_refuses_huge_grids() {
        let g = PolymatrixGame::zeros(10, 2, 0.1).unwrap();
        assert!(matches!(
            brute_force_kuniform(&g, 50),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn both_methods_solve_coordination() {
        let g = coordination();
        for continuation in [true, false] {
            let cfg = SolverConfig {
                continuation,
                ..SolverConfig::for_game(&g)
            };
            assert!(solve_mixed(&g, &cfg).unwrap().converged);
        }
    }

    #[test]
    fn deterministic() {
        let g = pennies();
        let cfg = SolverConfig {
            max_iterations: 500,
            seed: 7,
            ..SolverConfig::for_game(&g)
        };
        assert_eq!(solve_mixed(&g, &cfg).unwrap(), solve_mixed(&g, &cfg).unwrap());
    }
}
