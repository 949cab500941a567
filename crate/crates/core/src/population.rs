//! The population game induced by a base game.
//!
//! Every base player `i` becomes `L` replicas `(i, l)`, flat index
//! `i * L + l`. A replica of population `i` meets a replica of population
//! `ip != i` through `beta[i][ip] / L`; replicas of the same population do
//! not interact. Each replica therefore plays the base game against the
//! average behaviour of the other populations, and the induced game is
//! `lambda / L`-Lipschitz.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::check::max_coefficient_spread;
use crate::error::{Error, Result};
use crate::game::{regret_report, PayoffModel, PolymatrixGame};
use crate::profile::{MixedProfile, PureProfile};
use crate::purify::{purify, PurifyMode, TraceLevel};
use crate::solver::{solve_mixed, SolverConfig};

/// Environment variable overriding [`DEFAULT_MEM_BUDGET`].
pub const MEM_BUDGET_VAR: &str = "LIPPOLY_MEM_BUDGET";

/// Largest coefficient count a materialized view may hold.
pub const DEFAULT_MEM_BUDGET: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewMode {
    #[default]
    Lazy,
    Materialized,
}

impl FromStr for ViewMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lazy" => Ok(ViewMode::Lazy),
            "materialized" => Ok(ViewMode::Materialized),
            _ => Err(Error::Usage(format!(
                "unknown view mode {s:?} (expected lazy or materialized)"
            ))),
        }
    }
}

impl fmt::Display for ViewMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViewMode::Lazy => "lazy",
            ViewMode::Materialized => "materialized",
        })
    }
}

/// The coefficient budget from [`MEM_BUDGET_VAR`], or the default.
pub fn memory_budget() -> Result<f64> {
    match std::env::var(MEM_BUDGET_VAR) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|b| *b > 0.0)
            .ok_or_else(|| Error::Usage(format!("{MEM_BUDGET_VAR}={v:?} is not a positive number"))),
        Err(_) => Ok(DEFAULT_MEM_BUDGET),
    }
}

/// Immutable view of the induced game.
#[derive(Debug, Clone)]
pub struct PopulationGame {
    base: PolymatrixGame,
    replication: usize,
    lambda: f64,
    dense: Option<PolymatrixGame>,
}

/// Builds the population view with the budget from the environment.
pub fn induce(base: &PolymatrixGame, replication: usize, mode: ViewMode) -> Result<PopulationGame> {
    induce_with_budget(base, replication, mode, memory_budget()?)
}

/// Builds the population view. A materialized view holds `(nL)^2 m^2`
/// coefficients and is refused when that exceeds `budget`.
pub fn induce_with_budget(
    base: &PolymatrixGame,
    replication: usize,
    mode: ViewMode,
    budget: f64,
) -> Result<PopulationGame> {
    if replication == 0 {
        return Err(Error::Usage("replication L must be at least 1".into()));
    }
    let (n, m) = (base.n(), base.m());
    let lambda = base.lambda() / replication as f64;
    let mut pop = PopulationGame {
        base: base.clone(),
        replication,
        lambda,
        dense: None,
    };
    if mode == ViewMode::Materialized {
        let big_n = (n * replication) as f64;
        let estimate = big_n * big_n * (m * m) as f64;
        if estimate > budget {
            return Err(Error::TooLarge {
                what: format!("materialized population game with n = {n}, L = {replication}, m = {m}"),
                estimate,
                limit: budget,
            });
        }
        pop.dense = Some(pop.materialize()?);
    }
    Ok(pop)
}

impl PopulationGame {
    pub fn base(&self) -> &PolymatrixGame {
        &self.base
    }

    pub fn replication(&self) -> usize {
        self.replication
    }

    pub fn mode(&self) -> ViewMode {
        if self.dense.is_some() {
            ViewMode::Materialized
        } else {
            ViewMode::Lazy
        }
    }

    pub fn flat_index(&self, population: usize, replica: usize) -> usize {
        population * self.replication + replica
    }

    /// `(population, replica)` of a flat player index.
    pub fn replica_of(&self, flat: usize) -> (usize, usize) {
        (flat / self.replication, flat % self.replication)
    }

    /// The dense view, if this one is materialized.
    pub fn dense(&self) -> Option<&PolymatrixGame> {
        self.dense.as_ref()
    }

    fn materialize(&self) -> Result<PolymatrixGame> {
        let (n, m, l) = (self.base.n(), self.base.m(), self.replication);
        let mut g = PolymatrixGame::zeros(n * l, m, self.lambda)?;
        let scale = 1.0 / l as f64;
        for i in 0..n {
            for ip in (0..n).filter(|&ip| ip != i) {
                let block: Vec<Vec<f64>> = self
                    .base
                    .block(i, ip)
                    .into_iter()
                    .map(|r| r.into_iter().map(|b| b * scale).collect())
                    .collect();
                for a in 0..l {
                    for b in 0..l {
                        g.set_block(i * l + a, ip * l + b, &block)?;
                    }
                }
            }
        }
        Ok(g)
    }

    /// Average row of each population, the base-game profile the replicas
    /// face.
    fn population_means(&self, profile: &MixedProfile) -> MixedProfile {
        let (n, m, l) = (self.base.n(), self.base.m(), self.replication);
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![0.0; m];
                for a in 0..l {
                    for (r, q) in row.iter_mut().zip(profile.row(i * l + a)) {
                        *r += q;
                    }
                }
                row.iter_mut().for_each(|r| *r /= l as f64);
                row
            })
            .collect();
        MixedProfile::from_rows_unchecked(rows)
    }

    /// Largest coefficient spread of the induced game: the base spread over `L`.
    pub fn coefficient_spread(&self) -> f64 {
        max_coefficient_spread(&self.base) / self.replication as f64
    }
}

impl PayoffModel for PopulationGame {
    fn players(&self) -> usize {
        self.base.n() * self.replication
    }

    fn actions(&self) -> usize {
        self.base.m()
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn coefficient(&self, i: usize, ip: usize, j: usize, jp: usize) -> f64 {
        if let Some(g) = &self.dense {
            return g.coefficient(i, ip, j, jp);
        }
        let (pi, pip) = (i / self.replication, ip / self.replication);
        if pi == pip {
            0.0
        } else {
            self.base.beta(pi, pip, j, jp) / self.replication as f64
        }
    }

    fn payoff_vector(&self, i: usize, profile: &MixedProfile) -> Vec<f64> {
        match &self.dense {
            Some(g) => g.payoff_vector(i, profile),
            None => self
                .base
                .payoff_vector(i / self.replication, &self.population_means(profile)),
        }
    }

    fn pure_payoff_vector(&self, i: usize, profile: &PureProfile) -> Vec<f64> {
        match &self.dense {
            Some(g) => g.pure_payoff_vector(i, profile),
            None => {
                let p = histogram_profile(self.base.n(), self.base.m(), self.replication, profile);
                self.base.payoff_vector(i / self.replication, &p)
            }
        }
    }

    fn payoff_table(&self, profile: &MixedProfile) -> Vec<Vec<f64>> {
        match &self.dense {
            Some(g) => g.payoff_table(profile),
            None => {
                let base_table = self.base.payoff_table(&self.population_means(profile));
                base_table
                    .into_iter()
                    .flat_map(|u| std::iter::repeat_n(u, self.replication))
                    .collect()
            }
        }
    }
}

fn histogram_profile(n: usize, m: usize, l: usize, pure: &PureProfile) -> MixedProfile {
    let rows = (0..n)
        .map(|i| {
            let mut row = vec![0.0; m];
            for a in 0..l {
                row[pure.action(i * l + a)] += 1.0;
            }
            row.iter_mut().for_each(|r| *r /= l as f64);
            row
        })
        .collect();
    MixedProfile::from_rows_unchecked(rows)
}

/// Empirical action distribution of each population: a `1/L`-uniform mixed
/// profile of the base game.
pub fn aggregate(pop: &PopulationGame, pure: &PureProfile) -> Result<MixedProfile> {
    if pure.len() != pop.players() {
        return Err(Error::Usage(format!(
            "population profile has {} entries, expected {}",
            pure.len(),
            pop.players()
        )));
    }
    if let Some(&bad) = pure.actions().iter().find(|&&a| a >= pop.actions()) {
        return Err(Error::Usage(format!("action {bad} out of range")));
    }
    Ok(histogram_profile(
        pop.base.n(),
        pop.base.m(),
        pop.replication,
        pure,
    ))
}

/// `ceil(n^4 / eps^5)`, the replication the hardness reduction works with.
pub fn hardness_replication(n: usize, epsilon: f64) -> f64 {
    ((n as f64).powi(4) / epsilon.powi(5)).ceil()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub replication: usize,
    pub population_players: usize,
    pub mode: ViewMode,
    /// Declared parameter of the induced game, `lambda / L`.
    pub population_lambda: f64,
    /// Largest coefficient spread of the induced game.
    pub population_spread: f64,
    pub solver_regret: f64,
    pub solver_converged: bool,
    pub purify_mode: PurifyMode,
    /// Max regret of the purified profile in the induced game.
    pub purified_regret: f64,
    pub purify_bound: f64,
    /// Max regret of the aggregated profile in the base game.
    pub aggregated_regret: f64,
    pub epsilon: f64,
    pub within_epsilon: bool,
    pub hardness_l: f64,
    pub meets_hardness_l: bool,
}

/// Solves and purifies the induced game, then aggregates the pure profile
/// back to a `1/L`-uniform profile of `base`.
pub fn reduce_and_solve(
    base: &PolymatrixGame,
    epsilon: f64,
    replication: usize,
    mode: ViewMode,
) -> Result<(MixedProfile, ReductionReport)> {
    if !(epsilon > 0.0) {
        return Err(Error::Usage(format!("epsilon must be positive, got {epsilon}")));
    }
    let pop = induce(base, replication, mode)?;
    let solved = solve_mixed(&pop, &SolverConfig::for_game(&pop))?;
    let purified = purify(&pop, &solved.profile, PurifyMode::Auto, TraceLevel::Off)?;
    let mixed = aggregate(&pop, &purified.profile)?;
    let aggregated_regret = regret_report(base, &mixed)?.max_regret;
    let hardness_l = hardness_replication(base.n(), epsilon);
    let report = ReductionReport {
        n: base.n(),
        m: base.m(),
        lambda: base.lambda(),
        replication,
        population_players: pop.players(),
        mode,
        population_lambda: pop.lambda(),
        population_spread: pop.coefficient_spread(),
        solver_regret: solved.achieved_max_regret,
        solver_converged: solved.converged,
        purify_mode: purified.mode,
        purified_regret: purified.final_max_regret,
        purify_bound: purified.bound,
        aggregated_regret,
        epsilon,
        within_epsilon: aggregated_regret <= epsilon + crate::TOL,
        hardness_l,
        meets_hardness_l: replication as f64 >= hardness_l,
    };
    Ok((mixed, report))
}
