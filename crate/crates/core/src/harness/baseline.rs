//! Random-sampling baseline: draw pure profiles from a mixed one and record
//! their regrets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{check_mixed, pure_max_regret, PayoffModel};
use crate::profile::{MixedProfile, PureProfile};

/// `lambda sqrt(8 n ln(2 m n))`: the regret level sampling is known to reach
/// with positive probability.
pub fn existence_threshold(n: usize, m: usize, lambda: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    lambda * (8.0 * n * (2.0 * m * n).ln()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub trials: usize,
    pub seed: u64,
    pub threshold: f64,
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
    /// Share of samples with max regret at most the threshold.
    pub fraction_below_threshold: f64,
    /// Per-sample max regrets in draw order.
    pub regrets: Vec<f64>,
}

/// Draws one pure profile, player by player, by inverse CDF.
pub fn sample_pure(profile: &MixedProfile, rng: &mut impl Rng) -> PureProfile {
    let m = profile.actions();
    let actions = profile
        .rows()
        .map(|row| {
            let x: f64 = rng.gen();
            let mut acc = 0.0;
            row.iter()
                .position(|&q| {
                    acc += q;
                    x < acc
                })
                // rounding can leave the total just under 1
                .unwrap_or_else(|| row.iter().rposition(|&q| q > 0.0).unwrap_or(m - 1))
        })
        .collect();
    PureProfile::new(actions, m).expect("sampled actions are in range")
}

/// `trials` independent draws from `mixed`; deterministic in `seed`.
pub fn sample_baseline<G: PayoffModel + ?Sized>(
    game: &G,
    mixed: &MixedProfile,
    trials: usize,
    seed: u64,
) -> Result<BaselineReport> {
    check_mixed(game, mixed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<PureProfile> = (0..trials).map(|_| sample_pure(mixed, &mut rng)).collect();
    let regrets: Vec<f64> = samples.par_iter().map(|a| pure_max_regret(game, a)).collect();
    let threshold = existence_threshold(game.players(), game.actions(), game.lambda());

    let mut sorted = regrets.clone();
    sorted.sort_by(f64::total_cmp);
    let stat = |f: fn(&[f64]) -> f64| if sorted.is_empty() { 0.0 } else { f(&sorted) };
    Ok(BaselineReport {
        trials,
        seed,
        threshold,
        min: stat(|s| s[0]),
        median: stat(|s| quantile(s, 0.5)),
        mean: stat(|s| s.iter().sum::<f64>() / s.len() as f64),
        max: stat(|s| s[s.len() - 1]),
        fraction_below_threshold: if trials == 0 {
            0.0
        } else {
            regrets.iter().filter(|&&r| r <= threshold).count() as f64 / trials as f64
        },
        regrets,
    })
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
