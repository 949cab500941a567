//! Polymatrix games and the exact payoff / regret evaluators.
//!
//! A polymatrix game gives player `i` the payoff
//! `u_i(j, p_-i) = sum_{i' != i} sum_{j'} p[i'][j'] * beta[i][i'][j][j']`,
//! which is linear in every opponent's distribution, so mixed payoffs are
//! computed exactly in `O(nm)` per query.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{MixedProfile, PureProfile};
use crate::REGRET_FLOOR;

/// Anything that exposes polymatrix coefficients.
///
/// Implemented by the dense [`PolymatrixGame`] and by the lazy population
/// view; the solver and the purifier work against this trait only. Methods
/// here do not bounds-check; the free functions in this module do.
pub trait PayoffModel: Sync {
    fn players(&self) -> usize;

    fn actions(&self) -> usize;

    /// Declared Lipschitz parameter.
    fn lambda(&self) -> f64;

    /// `beta[i][ip][j][jp]`, zero when `i == ip`.
    fn coefficient(&self, i: usize, ip: usize, j: usize, jp: usize) -> f64;

    /// `u_i(j, p_-i)` for every action `j`; row `i` of `profile` is ignored.
    fn payoff_vector(&self, i: usize, profile: &MixedProfile) -> Vec<f64> {
        let (n, m) = (self.players(), self.actions());
        let mut u = vec![0.0; m];
        for ip in (0..n).filter(|&ip| ip != i) {
            let row = profile.row(ip);
            for (j, uj) in u.iter_mut().enumerate() {
                *uj += row
                    .iter()
                    .enumerate()
                    .map(|(jp, q)| q * self.coefficient(i, ip, j, jp))
                    .sum::<f64>();
            }
        }
        u
    }

    /// `u_i(j, a_-i)` for every action `j`.
    fn pure_payoff_vector(&self, i: usize, profile: &PureProfile) -> Vec<f64> {
        let (n, m) = (self.players(), self.actions());
        (0..m)
            .map(|j| {
                (0..n)
                    .filter(|&ip| ip != i)
                    .map(|ip| self.coefficient(i, ip, j, profile.action(ip)))
                    .sum()
            })
            .collect()
    }

    /// Payoff vectors of every player.
    fn payoff_table(&self, profile: &MixedProfile) -> Vec<Vec<f64>> {
        (0..self.players())
            .map(|i| self.payoff_vector(i, profile))
            .collect()
    }
}

/// Dense coefficient tensor `beta[i][ip][j][jp]` plus the declared `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolymatrixGame {
    n: usize,
    m: usize,
    lambda: f64,
    beta: Vec<f64>,
}

impl PolymatrixGame {
    /// The all-zero game.
    pub fn zeros(n: usize, m: usize, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("a game needs at least one player".into()));
        }
        if m < 2 {
            return Err(Error::Validation(format!(
                "a game needs at least two actions, got {m}"
            )));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Validation(format!(
                "lambda must lie in (0, 1], got {lambda}"
            )));
        }
        Ok(Self {
            n,
            m,
            lambda,
            beta: vec![0.0; n * n * m * m],
        })
    }

    #[inline]
    fn idx(&self, i: usize, ip: usize, j: usize, jp: usize) -> usize {
        ((i * self.n + ip) * self.m + j) * self.m + jp
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn beta(&self, i: usize, ip: usize, j: usize, jp: usize) -> f64 {
        self.beta[self.idx(i, ip, j, jp)]
    }

    pub fn set_beta(&mut self, i: usize, ip: usize, j: usize, jp: usize, value: f64) -> Result<()> {
        self.check_pair(i, ip)?;
        if j >= self.m || jp >= self.m {
            return Err(Error::Usage(format!("action index out of range: ({j}, {jp})")));
        }
        if !value.is_finite() {
            return Err(Error::Validation(format!("coefficient {value} is not finite")));
        }
        let k = self.idx(i, ip, j, jp);
        self.beta[k] = value;
        Ok(())
    }

    /// Overwrites the `m x m` bimatrix block player `i` receives from `ip`.
    pub fn set_block(&mut self, i: usize, ip: usize, matrix: &[Vec<f64>]) -> Result<()> {
        self.check_pair(i, ip)?;
        if matrix.len() != self.m || matrix.iter().any(|r| r.len() != self.m) {
            return Err(Error::Validation(format!(
                "block ({i}, {ip}) must be {m}x{m}",
                m = self.m
            )));
        }
        for (j, row) in matrix.iter().enumerate() {
            for (jp, &v) in row.iter().enumerate() {
                self.set_beta(i, ip, j, jp, v)?;
            }
        }
        Ok(())
    }

    /// The block as rows, for serialization.
    pub fn block(&self, i: usize, ip: usize) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|j| (0..self.m).map(|jp| self.beta(i, ip, j, jp)).collect())
            .collect()
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Validation(format!(
                "lambda must lie in (0, 1], got {lambda}"
            )));
        }
        self.lambda = lambda;
        Ok(self)
    }

    /// The same game with players renumbered: new player `k` is old player
    /// `perm[k]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n || perm.iter().any(|&p| p >= self.n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Usage(format!("not a permutation of 0..{}", self.n)));
        }
        let mut out = Self::zeros(self.n, self.m, self.lambda)?;
        for (k, &i) in perm.iter().enumerate() {
            for (kp, &ip) in perm.iter().enumerate() {
                if k != kp {
                    let (src, dst) = (self.idx(i, ip, 0, 0), out.idx(k, kp, 0, 0));
                    let len = self.m * self.m;
                    out.beta[dst..dst + len].copy_from_slice(&self.beta[src..src + len]);
                }
            }
        }
        Ok(out)
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scale(&mut self, factor: f64) {
        self.beta.iter_mut().for_each(|b| *b *= factor);
    }

    fn check_pair(&self, i: usize, ip: usize) -> Result<()> {
        if i >= self.n || ip >= self.n {
            return Err(Error::Usage(format!(
                "player index out of range: ({i}, {ip}) with n = {}",
                self.n
            )));
        }
        if i == ip {
            return Err(Error::Usage(format!("no self-play block for player {i}")));
        }
        Ok(())
    }
}

impl PayoffModel for PolymatrixGame {
    fn players(&self) -> usize {
        self.n
    }

    fn actions(&self) -> usize {
        self.m
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    fn coefficient(&self, i: usize, ip: usize, j: usize, jp: usize) -> f64 {
        if i == ip {
            0.0
        } else {
            self.beta(i, ip, j, jp)
        }
    }

    fn payoff_vector(&self, i: usize, profile: &MixedProfile) -> Vec<f64> {
        let m = self.m;
        let mut u = vec![0.0; m];
        for ip in (0..self.n).filter(|&ip| ip != i) {
            let row = profile.row(ip);
            let base = self.idx(i, ip, 0, 0);
            let block = &self.beta[base..base + m * m];
            for (uj, brow) in u.iter_mut().zip(block.chunks_exact(m)) {
                *uj += brow.iter().zip(row).map(|(b, q)| b * q).sum::<f64>();
            }
        }
        u
    }

    fn pure_payoff_vector(&self, i: usize, profile: &PureProfile) -> Vec<f64> {
        let m = self.m;
        let mut u = vec![0.0; m];
        for ip in (0..self.n).filter(|&ip| ip != i) {
            let jp = profile.action(ip);
            for (j, uj) in u.iter_mut().enumerate() {
                *uj += self.beta[self.idx(i, ip, j, jp)];
            }
        }
        u
    }
}

/// Per-player regret summary of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub per_player_regret: Vec<f64>,
    pub max_regret: f64,
    pub argmax_player: usize,
}

/// `max_j u[j] - sum_j row[j] * u[j]`, clamped at zero.
pub fn regret_from_payoffs(payoffs: &[f64], row: &[f64]) -> f64 {
    let best = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let played: f64 = payoffs.iter().zip(row).map(|(u, q)| u * q).sum();
    clamp_regret(best - played)
}

pub(crate) fn clamp_regret(r: f64) -> f64 {
    debug_assert!(r > -1e-6, "regret {r} far below zero");
    if r < REGRET_FLOOR {
        r.max(0.0)
    } else {
        r
    }
}

/// Lowest index attaining the maximum.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = j;
        }
    }
    best
}

/// Regret of each action: `max_k u[k] - u[j]`.
pub fn action_regrets(payoffs: &[f64]) -> Vec<f64> {
    let best = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    payoffs.iter().map(|u| best - u).collect()
}

fn check_player<G: PayoffModel + ?Sized>(game: &G, i: usize) -> Result<()> {
    if i >= game.players() {
        return Err(Error::Usage(format!(
            "player {i} out of range (n = {})",
            game.players()
        )));
    }
    Ok(())
}

fn check_action<G: PayoffModel + ?Sized>(game: &G, j: usize) -> Result<()> {
    if j >= game.actions() {
        return Err(Error::Usage(format!(
            "action {j} out of range (m = {})",
            game.actions()
        )));
    }
    Ok(())
}

pub(crate) fn check_mixed<G: PayoffModel + ?Sized>(game: &G, p: &MixedProfile) -> Result<()> {
    if p.players() != game.players() || p.actions() != game.actions() {
        return Err(Error::Validation(format!(
            "profile is {}x{}, game is {}x{}",
            p.players(),
            p.actions(),
            game.players(),
            game.actions()
        )));
    }
    for (i, row) in p.rows().enumerate() {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > crate::TOL || row.iter().any(|q| !(*q >= 0.0)) {
            return Err(Error::Validation(format!(
                "row {i} of the profile is not a distribution"
            )));
        }
    }
    Ok(())
}

fn check_pure<G: PayoffModel + ?Sized>(game: &G, a: &PureProfile) -> Result<()> {
    if a.len() != game.players() {
        return Err(Error::Usage(format!(
            "pure profile has {} entries, game has {} players",
            a.len(),
            game.players()
        )));
    }
    if let Some(&j) = a.actions().iter().find(|&&j| j >= game.actions()) {
        return Err(Error::Usage(format!("action {j} out of range")));
    }
    Ok(())
}

/// `u_i(j, a_-i)`; entry `i` of `others` is ignored.
pub fn pure_payoff<G: PayoffModel + ?Sized>(
    game: &G,
    i: usize,
    j: usize,
    others: &PureProfile,
) -> Result<f64> {
    check_player(game, i)?;
    check_action(game, j)?;
    check_pure(game, others)?;
    Ok(game.pure_payoff_vector(i, others)[j])
}

/// `u_i(j, p_-i)`; row `i` of `others` is ignored.
pub fn mixed_payoff<G: PayoffModel + ?Sized>(
    game: &G,
    i: usize,
    j: usize,
    others: &MixedProfile,
) -> Result<f64> {
    check_player(game, i)?;
    check_action(game, j)?;
    check_mixed(game, others)?;
    Ok(game.payoff_vector(i, others)[j])
}

pub fn regret<G: PayoffModel + ?Sized>(game: &G, i: usize, profile: &MixedProfile) -> Result<f64> {
    check_player(game, i)?;
    check_mixed(game, profile)?;
    Ok(regret_from_payoffs(
        &game.payoff_vector(i, profile),
        profile.row(i),
    ))
}

/// `u_i(2, p_-i) - u_i(1, p_-i)` in a binary game.
pub fn discrepancy<G: PayoffModel + ?Sized>(
    game: &G,
    i: usize,
    profile: &MixedProfile,
) -> Result<f64> {
    if game.actions() != 2 {
        return Err(Error::Unsupported(format!(
            "discrepancy needs m = 2, game has m = {}",
            game.actions()
        )));
    }
    check_player(game, i)?;
    check_mixed(game, profile)?;
    let u = game.payoff_vector(i, profile);
    Ok(u[1] - u[0])
}

/// Best response, lowest index on ties.
pub fn best_response<G: PayoffModel + ?Sized>(
    game: &G,
    i: usize,
    profile: &MixedProfile,
) -> Result<usize> {
    check_player(game, i)?;
    check_mixed(game, profile)?;
    Ok(argmax_lowest(&game.payoff_vector(i, profile)))
}

pub fn regret_report<G: PayoffModel + ?Sized>(
    game: &G,
    profile: &MixedProfile,
) -> Result<RegretReport> {
    check_mixed(game, profile)?;
    Ok(regret_report_unchecked(game, profile))
}

pub(crate) fn regret_report_unchecked<G: PayoffModel + ?Sized>(
    game: &G,
    profile: &MixedProfile,
) -> RegretReport {
    let per_player_regret: Vec<f64> = (0..game.players())
        .map(|i| regret_from_payoffs(&game.payoff_vector(i, profile), profile.row(i)))
        .collect();
    report_from_regrets(per_player_regret)
}

pub(crate) fn report_from_regrets(per_player_regret: Vec<f64>) -> RegretReport {
    let argmax_player = argmax_lowest(&per_player_regret);
    let max_regret = per_player_regret.get(argmax_player).copied().unwrap_or(0.0);
    RegretReport {
        per_player_regret,
        max_regret,
        argmax_player,
    }
}

/// Regret of every player in a pure profile.
pub fn pure_regrets<G: PayoffModel + ?Sized>(game: &G, a: &PureProfile) -> Vec<f64> {
    (0..game.players())
        .map(|i| {
            let u = game.pure_payoff_vector(i, a);
            let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            clamp_regret(best - u[a.action(i)])
        })
        .collect()
}

pub fn pure_max_regret<G: PayoffModel + ?Sized>(game: &G, a: &PureProfile) -> f64 {
    pure_regrets(game, a).into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn coordination() -> PolymatrixGame {
        let mut g = PolymatrixGame::zeros(2, 2, 1.0).unwrap();
        let eye = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        g.set_block(0, 1, &eye).unwrap();
        g.set_block(1, 0, &eye).unwrap();
        g
    }

    #[test]
    fn zero_game_pays_nothing() {
        let g = PolymatrixGame::zeros(3, 2, 0.5).unwrap();
        let a = PureProfile::new(vec![1, 0, 1], 2).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(pure_payoff(&g, i, j, &a).unwrap(), 0.0);
            }
        }
        let p = MixedProfile::uniform(3, 2);
        assert_eq!(regret(&g, 0, &p).unwrap(), 0.0);
        assert_eq!(best_response(&g, 2, &p).unwrap(), 0);
    }

    #[test]
    fn coordination_payoffs() {
        let g = coordination();
        let a = PureProfile::new(vec![0, 0], 2).unwrap();
        assert_eq!(pure_payoff(&g, 0, 0, &a).unwrap(), 1.0);
        let half = MixedProfile::uniform(2, 2);
        assert_eq!(mixed_payoff(&g, 0, 0, &half).unwrap(), 0.5);
        assert_eq!(discrepancy(&g, 0, &half).unwrap(), 0.0);
        let on2 = MixedProfile::from_pure(&PureProfile::new(vec![0, 1], 2).unwrap(), 2);
        assert_eq!(discrepancy(&g, 0, &on2).unwrap(), 1.0);
        assert_eq!(best_response(&g, 0, &on2).unwrap(), 1);
        // player 0 best responds in (1, 1) once it plays 1
        let both2 = MixedProfile::from_pure(&PureProfile::new(vec![1, 1], 2).unwrap(), 2);
        assert_eq!(regret(&g, 0, &both2).unwrap(), 0.0);
        assert_eq!(regret(&g, 0, &on2).unwrap(), 1.0);
    }

    #[test]
    fn index_errors() {
        let g = coordination();
        let a = PureProfile::constant(2, 0);
        assert!(matches!(pure_payoff(&g, 2, 0, &a), Err(Error::Usage(_))));
        assert!(matches!(pure_payoff(&g, 0, 2, &a), Err(Error::Usage(_))));
        assert!(matches!(
            pure_payoff(&g, 0, 0, &PureProfile::constant(3, 0)),
            Err(Error::Usage(_))
        ));
        let bad = MixedProfile::uniform(3, 2);
        assert!(matches!(mixed_payoff(&g, 0, 0, &bad), Err(Error::Validation(_))));
        let g3 = PolymatrixGame::zeros(2, 3, 1.0).unwrap();
        assert!(matches!(
            discrepancy(&g3, 0, &MixedProfile::uniform(2, 3)),
            Err(Error::Unsupported(_))
        ));
        assert!(PolymatrixGame::zeros(2, 2, 0.0).is_err());
        assert!(PolymatrixGame::zeros(2, 2, 1.5).is_err());
        assert!(PolymatrixGame::zeros(2, 1, 0.5).is_err());
    }

    #[test]
    fn relabel_moves_payoffs_with_players() {
        let mut g = PolymatrixGame::zeros(3, 2, 1.0).unwrap();
        g.set_block(0, 2, &[vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        let h = g.relabel(&[2, 0, 1]).unwrap();
        // old 0 is new 1, old 2 is new 0
        assert_eq!(h.block(1, 0), g.block(0, 2));
        assert_eq!(h.block(0, 1), vec![vec![0.0; 2]; 2]);
        assert!(g.relabel(&[0, 0, 1]).is_err());
        assert!(g.relabel(&[0, 1]).is_err());
    }

    #[test]
    fn self_block_is_refused() {
        let mut g = PolymatrixGame::zeros(2, 2, 1.0).unwrap();
        assert!(g.set_beta(1, 1, 0, 0, 0.3).is_err());
    }

    #[test]
    fn regret_report_picks_worst_player() {
        let g = coordination();
        let a = PureProfile::new(vec![0, 1], 2).unwrap();
        let rep = regret_report(&g, &MixedProfile::from_pure(&a, 2)).unwrap();
        assert_eq!(rep.per_player_regret, vec![1.0, 1.0]);
        assert_eq!(rep.argmax_player, 0);
        assert_eq!(pure_max_regret(&g, &a), 1.0);
    }
}
