//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use lippoly::harness::generator::{generate, Family, GeneratorSpec};
use lippoly::solver::{solve_mixed, SolverConfig};
use lippoly::{MixedProfile, PayoffModel, PolymatrixGame, PureProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `u_i(j, a)` read straight off the coefficient tensor.
pub fn resum_pure(game: &PolymatrixGame, i: usize, j: usize, a: &[usize]) -> f64 {
    (0..game.n())
        .filter(|&ip| ip != i)
        .map(|ip| game.beta(i, ip, j, a[ip]))
        .sum()
}

/// Calls `f(profile, probability)` for every pure profile of the players
/// other than `i` (player `i`'s entry is left at 0).
pub fn for_each_opponent_profile(
    p: &MixedProfile,
    i: usize,
    mut f: impl FnMut(&[usize], f64),
) {
    let (n, m) = (p.players(), p.actions());
    let others: Vec<usize> = (0..n).filter(|&k| k != i).collect();
    let mut a = vec![0usize; n];
    let total = m.pow(others.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut prob = 1.0;
        for &k in &others {
            a[k] = c % m;
            c /= m;
            prob *= p.prob(k, a[k]);
        }
        if prob > 0.0 {
            f(&a, prob);
        }
    }
}

/// `u_i(j, p_-i)` as an expectation over every opponent pure profile.
pub fn enumerate_payoff(game: &PolymatrixGame, i: usize, j: usize, p: &MixedProfile) -> f64 {
    let mut total = 0.0;
    for_each_opponent_profile(p, i, |a, prob| total += prob * resum_pure(game, i, j, a));
    total
}

/// Regret of player `i` by enumeration.
pub fn enumerate_regret(game: &PolymatrixGame, i: usize, p: &MixedProfile) -> f64 {
    let u: Vec<f64> = (0..game.m()).map(|j| enumerate_payoff(game, i, j, p)).collect();
    let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let expected: f64 = u.iter().zip(p.row(i)).map(|(x, q)| x * q).sum();
    (best - expected).max(0.0)
}

/// Regret of every player at a pure profile, straight from the tensor.
pub fn oracle_pure_regrets(game: &PolymatrixGame, a: &PureProfile) -> Vec<f64> {
    (0..game.n())
        .map(|i| {
            let u: Vec<f64> = (0..game.m())
                .map(|j| resum_pure(game, i, j, a.actions()))
                .collect();
            let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            best - u[a.action(i)]
        })
        .collect()
}

pub fn oracle_max_regret(game: &PolymatrixGame, a: &PureProfile) -> f64 {
    oracle_pure_regrets(game, a).into_iter().fold(0.0, f64::max)
}

pub fn random_row(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_mixed(rng: &mut impl Rng, n: usize, m: usize) -> MixedProfile {
    MixedProfile::from_rows((0..n).map(|_| random_row(rng, m)).collect()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_game(n: usize, m: usize, lambda: f64, seed: u64) -> PolymatrixGame {
    generate(&GeneratorSpec::new(n, m, lambda, Family::Uniform, seed)).unwrap()
}

/// Solver output at the purifier's default target.
pub fn solved(game: &PolymatrixGame) -> MixedProfile {
    let r = solve_mixed(game, &SolverConfig::for_game(game)).unwrap();
    assert!(r.converged, "solver missed its target: {}", r.achieved_max_regret);
    r.profile
}

/// New player `k` is old player `perm[k]`.
pub fn permute_pure(a: &PureProfile, perm: &[usize], m: usize) -> PureProfile {
    PureProfile::new(perm.iter().map(|&i| a.action(i)).collect(), m).unwrap()
}

pub fn permute_mixed(p: &MixedProfile, perm: &[usize]) -> MixedProfile {
    MixedProfile::from_rows(perm.iter().map(|&i| p.row(i).to_vec()).collect()).unwrap()
}

/// A seeded permutation of `0..n`.
pub fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(&mut rng(seed));
    v
}

/// Discrepancy of every player, recomputed from the tensor.
pub fn oracle_discrepancies(game: &PolymatrixGame, p: &MixedProfile) -> Vec<f64> {
    (0..game.n())
        .map(|i| {
            (0..game.n())
                .filter(|&ip| ip != i)
                .map(|ip| {
                    (0..2)
                        .map(|jp| p.prob(ip, jp) * (game.beta(i, ip, 1, jp) - game.beta(i, ip, 0, jp)))
                        .sum::<f64>()
                })
                .sum()
        })
        .collect()
}

pub fn payoffs_of(game: &impl PayoffModel, p: &MixedProfile) -> Vec<Vec<f64>> {
    game.payoff_table(p)
}
