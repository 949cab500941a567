//! Seeded random game families.
//!
//! Coefficients are drawn in `[0, lambda]`, so every bimatrix row already
//! spreads by at most `lambda`. When a payoff could exceed 1 the rows are
//! shifted down to a zero minimum and, if that is not enough, the whole game
//! is scaled; both operations keep the spread at most `lambda`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::PolymatrixGame;

/// Below this, payoff differences vanish under the comparison tolerance.
const MIN_LAMBDA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Family {
    /// Every coefficient independent in `[0, lambda]`.
    Uniform,
    /// Each `(i, i')` block is present with probability `density`, else zero.
    Sparse(f64),
    /// Convex mix of uniform noise and `lambda * [j == j']` with this weight.
    CoordinationMix(f64),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Uniform => write!(f, "uniform"),
            Family::Sparse(d) => write!(f, "sparse:{d}"),
            Family::CoordinationMix(w) => write!(f, "coordination:{w}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((name, arg)) => (name, Some(arg)),
            None => (s, None),
        };
        let parse_arg = |default: f64| -> Result<f64> {
            arg.map_or(Ok(default), |a| {
                a.parse::<f64>()
                    .map_err(|_| Error::Validation(format!("bad family parameter {a:?}")))
            })
        };
        match name {
            "uniform" | "uniform_coefficients" => Ok(Family::Uniform),
            "sparse" => Ok(Family::Sparse(parse_arg(0.5)?)),
            "coordination" | "coordination_mix" => Ok(Family::CoordinationMix(parse_arg(0.5)?)),
            other => Err(Error::Validation(format!(
                "unknown family {other:?} (expected uniform, sparse:<density> or coordination:<weight>)"
            ))),
        }
    }
}

impl TryFrom<String> for Family {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Family> for String {
    fn from(f: Family) -> String {
        f.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub family: Family,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(n: usize, m: usize, lambda: f64, family: Family, seed: u64) -> Self {
        Self {
            n,
            m,
            lambda,
            family,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Infeasible(format!("need n >= 2, got {}", self.n)));
        }
        if self.m < 2 {
            return Err(Error::Infeasible(format!("need m >= 2, got {}", self.m)));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::Infeasible(format!(
                "lambda must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        if self.lambda < MIN_LAMBDA {
            return Err(Error::Infeasible(format!(
                "lambda {} is below {MIN_LAMBDA}: payoff differences would vanish",
                self.lambda
            )));
        }
        match self.family {
            Family::Sparse(x) | Family::CoordinationMix(x) if !(0.0..=1.0).contains(&x) => Err(
                Error::Infeasible(format!("family parameter {x} must lie in [0, 1]")),
            ),
            _ => Ok(()),
        }
    }
}

/// Deterministic in `spec.seed`; the result always passes `check_game`.
pub fn generate(spec: &GeneratorSpec) -> Result<PolymatrixGame> {
    spec.validate()?;
    let (n, m, lambda) = (spec.n, spec.m, spec.lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut game = PolymatrixGame::zeros(n, m, lambda)?;

    for i in 0..n {
        for ip in (0..n).filter(|&ip| ip != i) {
            let present = match spec.family {
                Family::Sparse(density) => rng.gen::<f64>() < density,
                _ => true,
            };
            if !present {
                continue;
            }
            for j in 0..m {
                for jp in 0..m {
                    let noise = lambda * rng.gen::<f64>();
                    let value = match spec.family {
                        Family::CoordinationMix(w) => {
                            let bonus = if j == jp { lambda } else { 0.0 };
                            (1.0 - w) * noise + w * bonus
                        }
                        _ => noise,
                    };
                    game.set_beta(i, ip, j, jp, value)?;
                }
            }
        }
    }

    if max_upper_sum(&game) > 1.0 {
        shift_rows_to_zero(&mut game);
        let upper = max_upper_sum(&game);
        if upper > 1.0 {
            game.scale(1.0 / upper);
        }
    }
    Ok(game)
}

/// `max_{i,j} sum_{i'} max_{j'} beta[i][i'][j][j']`.
fn max_upper_sum(game: &PolymatrixGame) -> f64 {
    let (n, m) = (game.n(), game.m());
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..m {
            let s: f64 = (0..n)
                .filter(|&ip| ip != i)
                .map(|ip| {
                    (0..m)
                        .map(|jp| game.beta(i, ip, j, jp))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .sum();
            worst = worst.max(s);
        }
    }
    worst
}

fn shift_rows_to_zero(game: &mut PolymatrixGame) {
    let (n, m) = (game.n(), game.m());
    for i in 0..n {
        for ip in (0..n).filter(|&ip| ip != i) {
            for j in 0..m {
                let lo = (0..m)
                    .map(|jp| game.beta(i, ip, j, jp))
                    .fold(f64::INFINITY, f64::min);
                for jp in 0..m {
                    let v = game.beta(i, ip, j, jp) - lo;
                    game.set_beta(i, ip, j, jp, v).expect("indices in range");
                }
            }
        }
    }
}
