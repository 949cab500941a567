//! Validity checks: the Lipschitz coefficient scan and the payoff-range
//! inequalities, with witness synthesis for Lipschitz violations.

use serde::{Deserialize, Serialize};

use crate::game::{pure_payoff, PayoffModel};
use crate::profile::PureProfile;
use crate::TOL;

/// Two pure profiles that agree at `player` and whose payoff gap for
/// `player` exceeds `lambda` times their Hamming distance elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzWitness {
    pub player: usize,
    pub profile_a: PureProfile,
    pub profile_b: PureProfile,
    pub observed_gap: f64,
    pub allowed_gap: f64,
}

impl LipschitzWitness {
    /// Recomputes both payoffs from scratch and confirms the violation.
    pub fn verify<G: PayoffModel + ?Sized>(&self, game: &G) -> bool {
        let i = self.player;
        if i >= game.players() || self.profile_a.action(i) != self.profile_b.action(i) {
            return false;
        }
        let ua = pure_payoff(game, i, self.profile_a.action(i), &self.profile_a);
        let ub = pure_payoff(game, i, self.profile_b.action(i), &self.profile_b);
        let (Ok(ua), Ok(ub)) = (ua, ub) else {
            return false;
        };
        let distance = self.profile_a.hamming_excluding(&self.profile_b, i) as f64;
        (ua - ub).abs() > game.lambda() * distance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeDirection {
    /// `sum_{i'} max_{j'} beta > 1`: some payoff exceeds 1.
    AboveOne,
    /// `sum_{i'} min_{j'} beta < 0`: some payoff is negative.
    BelowZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GameCheck {
    Valid,
    RangeViolation {
        player: usize,
        action: usize,
        direction: RangeDirection,
        /// The offending row sum.
        value: f64,
    },
    LipschitzViolation {
        witness: LipschitzWitness,
    },
}

impl GameCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, GameCheck::Valid)
    }
}

/// Largest `|beta[i][i'][j][j'1] - beta[i][i'][j][j'2]|` over the game.
pub fn max_coefficient_spread<G: PayoffModel + ?Sized>(game: &G) -> f64 {
    let (n, m) = (game.players(), game.actions());
    let mut worst = 0.0_f64;
    for i in 0..n {
        for ip in (0..n).filter(|&ip| ip != i) {
            for j in 0..m {
                let (lo, hi) = row_extremes(game, i, ip, j);
                worst = worst.max(hi.1 - lo.1);
            }
        }
    }
    worst
}

/// `((argmin, min), (argmax, max))` of `beta[i][ip][j][·]`, lowest index on ties.
fn row_extremes<G: PayoffModel + ?Sized>(
    game: &G,
    i: usize,
    ip: usize,
    j: usize,
) -> ((usize, f64), (usize, f64)) {
    let mut lo = (0, game.coefficient(i, ip, j, 0));
    let mut hi = lo;
    for jp in 1..game.actions() {
        let b = game.coefficient(i, ip, j, jp);
        if b < lo.1 {
            lo = (jp, b);
        }
        if b > hi.1 {
            hi = (jp, b);
        }
    }
    (lo, hi)
}

/// Runs the Lipschitz scan first, then the `2nm` range inequalities.
///
/// The first coefficient violation in `(i, i', j)` order is reported; its
/// witness gives player `i` action `j`, every other player action 0, and
/// differs only at `i'`.
pub fn check_game<G: PayoffModel + ?Sized>(game: &G) -> GameCheck {
    let (n, m) = (game.players(), game.actions());
    let lambda = game.lambda();

    for i in 0..n {
        for ip in (0..n).filter(|&ip| ip != i) {
            for j in 0..m {
                let (lo, hi) = row_extremes(game, i, ip, j);
                if hi.1 - lo.1 > lambda + TOL {
                    return GameCheck::LipschitzViolation {
                        witness: synthesize_witness(game, i, ip, j, hi.0, lo.0),
                    };
                }
            }
        }
    }

    for i in 0..n {
        for j in 0..m {
            let (mut upper, mut lower) = (0.0, 0.0);
            for ip in (0..n).filter(|&ip| ip != i) {
                let (lo, hi) = row_extremes(game, i, ip, j);
                upper += hi.1;
                lower += lo.1;
            }
            if upper > 1.0 + TOL {
                return GameCheck::RangeViolation {
                    player: i,
                    action: j,
                    direction: RangeDirection::AboveOne,
                    value: upper,
                };
            }
            if lower < -TOL {
                return GameCheck::RangeViolation {
                    player: i,
                    action: j,
                    direction: RangeDirection::BelowZero,
                    value: lower,
                };
            }
        }
    }
    GameCheck::Valid
}

fn synthesize_witness<G: PayoffModel + ?Sized>(
    game: &G,
    i: usize,
    ip: usize,
    j: usize,
    jp_a: usize,
    jp_b: usize,
) -> LipschitzWitness {
    let n = game.players();
    let mut profile_a = PureProfile::constant(n, 0);
    profile_a.set(i, j);
    let mut profile_b = profile_a.clone();
    profile_a.set(ip, jp_a);
    profile_b.set(ip, jp_b);
    let ua = game.pure_payoff_vector(i, &profile_a)[j];
    let ub = game.pure_payoff_vector(i, &profile_b)[j];
    let distance = profile_a.hamming_excluding(&profile_b, i) as f64;
    LipschitzWitness {
        player: i,
        profile_a,
        profile_b,
        observed_gap: (ua - ub).abs(),
        allowed_gap: game.lambda() * distance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PolymatrixGame;

    #[test]
    fn zero_game_is_valid() {
        let g = PolymatrixGame::zeros(4, 3, 0.5).unwrap();
        assert_eq!(check_game(&g), GameCheck::Valid);
    }

    #[test]
    fn unit_coordination_with_small_lambda() {
        let mut g = PolymatrixGame::zeros(2, 2, 0.1).unwrap();
        let eye = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        g.set_block(0, 1, &eye).unwrap();
        g.set_block(1, 0, &eye).unwrap();
        let GameCheck::LipschitzViolation { witness } = check_game(&g) else {
            panic!("expected a witness");
        };
        assert_eq!(witness.player, 0);
        assert_eq!(witness.observed_gap, 1.0);
        assert!((witness.allowed_gap - 0.1).abs() < 1e-15);
        assert_eq!(witness.profile_a.action(0), witness.profile_b.action(0));
        assert!(witness.verify(&g));
    }

    #[test]
    fn range_violations() {
        let mut g = PolymatrixGame::zeros(3, 2, 1.0).unwrap();
        g.set_block(0, 1, &[vec![0.6, 0.6], vec![0.0, 0.0]]).unwrap();
        g.set_block(0, 2, &[vec![0.6, 0.6], vec![0.0, 0.0]]).unwrap();
        assert_eq!(
            check_game(&g),
            GameCheck::RangeViolation {
                player: 0,
                action: 0,
                direction: RangeDirection::AboveOne,
                value: 1.2
            }
        );
        let mut g = PolymatrixGame::zeros(2, 2, 1.0).unwrap();
        g.set_beta(1, 0, 1, 0, -0.1).unwrap();
        g.set_beta(1, 0, 1, 1, -0.1).unwrap();
        assert!(matches!(
            check_game(&g),
            GameCheck::RangeViolation {
                player: 1,
                action: 1,
                direction: RangeDirection::BelowZero,
                ..
            }
        ));
    }

    #[test]
    fn spread_is_max_row_range() {
        let mut g = PolymatrixGame::zeros(2, 3, 1.0).unwrap();
        g.set_block(1, 0, &[vec![0.1, 0.4, 0.2], vec![0.0; 3], vec![0.3, 0.3, 0.0]])
            .unwrap();
        assert!((max_coefficient_spread(&g) - 0.3).abs() < 1e-15);
    }
}
