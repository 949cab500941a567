//! Pure and mixed strategy profiles.
//!
//! Actions and players are 0-based here; the JSON wire format in [`crate::io`]
//! shifts them to 1-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TOL;

/// One action per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PureProfile {
    actions: Vec<usize>,
}

impl PureProfile {
    pub fn new(actions: Vec<usize>, m: usize) -> Result<Self> {
        if let Some((i, &a)) = actions.iter().enumerate().find(|(_, &a)| a >= m) {
            return Err(Error::Usage(format!(
                "player {i} plays action {a}, but only {m} actions exist"
            )));
        }
        Ok(Self { actions })
    }

    /// Every player on action 0.
    pub fn constant(n: usize, action: usize) -> Self {
        Self {
            actions: vec![action; n],
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn action(&self, i: usize) -> usize {
        self.actions[i]
    }

    pub fn set(&mut self, i: usize, action: usize) {
        self.actions[i] = action;
    }

    /// Number of coordinates where the two profiles differ, ignoring `skip`.
    pub fn hamming_excluding(&self, other: &PureProfile, skip: usize) -> usize {
        self.actions
            .iter()
            .zip(&other.actions)
            .enumerate()
            .filter(|&(k, (a, b))| k != skip && a != b)
            .count()
    }
}

/// Row-stochastic `n x m` matrix; row `i` is player `i`'s distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    n: usize,
    m: usize,
    probs: Vec<f64>,
}

impl MixedProfile {
    /// Builds a profile from rows, rejecting anything that is not a
    /// distribution within [`TOL`].
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if m == 0 {
            return Err(Error::Validation("profile has no actions".into()));
        }
        let mut probs = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::Validation(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            check_distribution(i, &row)?;
            probs.extend(row);
        }
        Ok(Self { n, m, probs })
    }

    pub fn uniform(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            probs: vec![1.0 / m as f64; n * m],
        }
    }

    pub fn from_pure(pure: &PureProfile, m: usize) -> Self {
        let n = pure.len();
        let mut probs = vec![0.0; n * m];
        for (i, &a) in pure.actions().iter().enumerate() {
            probs[i * m + a] = 1.0;
        }
        Self { n, m, probs }
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn actions(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.m)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.m + j]
    }

    /// Replaces row `i`. The row is validated.
    pub fn set_row(&mut self, i: usize, row: &[f64]) -> Result<()> {
        if row.len() != self.m {
            return Err(Error::Validation(format!(
                "row has {} entries, expected {}",
                row.len(),
                self.m
            )));
        }
        check_distribution(i, row)?;
        self.probs[i * self.m..(i + 1) * self.m].copy_from_slice(row);
        Ok(())
    }

    /// Row `i` becomes the point mass on `action`.
    pub fn set_pure(&mut self, i: usize, action: usize) {
        let row = &mut self.probs[i * self.m..(i + 1) * self.m];
        row.fill(0.0);
        row[action] = 1.0;
    }

    /// For binary games: probability of the second action.
    pub fn p2(&self, i: usize) -> f64 {
        self.prob(i, 1)
    }

    /// For binary games: row `i` becomes `(1 - q, q)`.
    pub fn set_p2(&mut self, i: usize, q: f64) {
        self.probs[i * self.m] = 1.0 - q;
        self.probs[i * self.m + 1] = q;
    }

    /// The action carrying all of row `i`'s mass, if any.
    pub fn pure_action(&self, i: usize) -> Option<usize> {
        self.row(i).iter().position(|&q| q == 1.0)
    }

    pub fn is_pure_valued(&self) -> bool {
        (0..self.n).all(|i| self.pure_action(i).is_some())
    }

    pub fn to_pure(&self) -> Option<PureProfile> {
        (0..self.n)
            .map(|i| self.pure_action(i))
            .collect::<Option<Vec<_>>>()
            .map(|actions| PureProfile { actions })
    }

    /// Actions with positive probability in row `i`.
    pub fn support(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|(_, &q)| q > 0.0)
            .map(|(j, _)| j)
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [f64] {
        &mut self.probs
    }

    /// Rows already known to be distributions (averages of valid rows).
    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        Self {
            n,
            m,
            probs: rows.concat(),
        }
    }
}

fn check_distribution(i: usize, row: &[f64]) -> Result<()> {
    if let Some(q) = row.iter().find(|q| !q.is_finite() || **q < 0.0) {
        return Err(Error::Validation(format!(
            "row {i} has invalid probability {q}"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > TOL {
        return Err(Error::Validation(format!(
            "row {i} sums to {sum}, not 1"
        )));
    }
    Ok(())
}

/// Total variation distance `0.5 * ||a - b||_1`.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rows() {
        assert!(MixedProfile::from_rows(vec![vec![0.5, 0.6]]).is_err());
        assert!(MixedProfile::from_rows(vec![vec![1.5, -0.5]]).is_err());
        assert!(MixedProfile::from_rows(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        // within tolerance
        assert!(MixedProfile::from_rows(vec![vec![0.5, 0.5 + 5e-10]]).is_ok());
    }

    #[test]
    fn pure_round_trip() {
        let a = PureProfile::new(vec![0, 2, 1], 3).unwrap();
        let p = MixedProfile::from_pure(&a, 3);
        assert!(p.is_pure_valued());
        assert_eq!(p.to_pure().unwrap(), a);
        assert!(PureProfile::new(vec![0, 3], 3).is_err());
    }

    #[test]
    fn hamming_skips_own_coordinate() {
        let a = PureProfile::new(vec![0, 1, 1], 2).unwrap();
        let b = PureProfile::new(vec![1, 1, 0], 2).unwrap();
        assert_eq!(a.hamming_excluding(&b, 0), 1);
        assert_eq!(a.hamming_excluding(&b, 1), 2);
    }

    #[test]
    fn tv_distance() {
        assert_eq!(total_variation(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert!((total_variation(&[0.5, 0.5, 0.0], &[0.25, 0.25, 0.5]) - 0.5).abs() < 1e-15);
    }
}
