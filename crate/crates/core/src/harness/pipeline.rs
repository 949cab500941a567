//! check, solve, purify, optionally reduce and sample, then verify and
//! record. Instances of an ensemble run in parallel; records come back in
//! instance order.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check::{check_game, GameCheck};
use crate::error::{Error, Result};
use crate::game::{pure_max_regret, PayoffModel, PolymatrixGame};
use crate::harness::baseline::sample_baseline;
use crate::harness::generator::{generate, GeneratorSpec};
use crate::harness::report::{game_digest, InstanceRecord, InstanceStatus, PurifySummary, SolverSummary};
use crate::io::{read_game, WitnessFile};
use crate::population::{reduce_and_solve, ViewMode};
use crate::purify::{purify, PurifyMode, TraceLevel};
use crate::solver::{solve_mixed, SolverConfig};
use crate::TOL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReduceOptions {
    pub replication: usize,
    pub epsilon: f64,
    pub view: ViewMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub mode: PurifyMode,
    pub trace: TraceLevel,
    /// Solver seed.
    pub seed: u64,
    /// Baseline samples per instance; 0 skips the baseline.
    pub baseline_trials: usize,
    pub reduce: Option<ReduceOptions>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            mode: PurifyMode::Auto,
            trace: TraceLevel::Off,
            seed: 0,
            baseline_trials: 0,
            reduce: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    File(PathBuf),
    Generated(GeneratorSpec),
}

impl InstanceSource {
    fn describe(&self) -> String {
        match self {
            InstanceSource::File(p) => p.display().to_string(),
            InstanceSource::Generated(s) => format!(
                "generated n={} m={} lambda={} family={} seed={}",
                s.n, s.m, s.lambda, s.family, s.seed
            ),
        }
    }

    pub fn load(&self) -> Result<PolymatrixGame> {
        match self {
            InstanceSource::File(p) => read_game(p),
            InstanceSource::Generated(s) => generate(s),
        }
    }
}

/// Runs one game through the pipeline. Stage failures land in the record's
/// status; only a report-integrity mismatch is returned as an error.
pub fn run_instance(
    instance: usize,
    source: &str,
    game: &PolymatrixGame,
    options: &PipelineOptions,
) -> Result<InstanceRecord> {
    let mut record = InstanceRecord {
        instance,
        source: source.to_string(),
        n: game.n(),
        m: game.m(),
        lambda: game.lambda(),
        game_digest: game_digest(game),
        status: InstanceStatus::Ok,
        error: None,
        witness: None,
        solver: None,
        purify: None,
        final_regret: None,
        bound: None,
        bound_ratio: None,
        final_profile: None,
        baseline: None,
        reduction: None,
        trace: None,
    };
    let fail = |mut record: InstanceRecord, e: Error, converged: bool| {
        record.status = match e {
            Error::Breach(_) => InstanceStatus::Breach,
            Error::Precondition { .. } if !converged => InstanceStatus::NotConverged,
            _ => InstanceStatus::Invalid,
        };
        record.error = Some(e.to_string());
        record
    };

    match check_game(game) {
        GameCheck::Valid => {}
        GameCheck::LipschitzViolation { witness } => {
            record.status = InstanceStatus::Witness;
            record.witness = Some(WitnessFile::from(&witness));
            return Ok(record);
        }
        range @ GameCheck::RangeViolation { .. } => {
            record.status = InstanceStatus::Invalid;
            record.error = Some(format!(
                "payoff range violated: {}",
                serde_json::to_string(&crate::io::CheckFile::from(&range)).expect("serializes")
            ));
            return Ok(record);
        }
    }

    let mut config = SolverConfig::for_game(game);
    config.seed = options.seed;
    let solved = match solve_mixed(game, &config) {
        Ok(s) => s,
        Err(e) => return Ok(fail(record, e, false)),
    };
    record.solver = Some(SolverSummary {
        target: config.target_epsilon,
        achieved_max_regret: solved.achieved_max_regret,
        converged: solved.converged,
        iterations_used: solved.iterations_used,
        newton_iterations: solved.newton_iterations,
    });

    if options.baseline_trials > 0 {
        match sample_baseline(game, &solved.profile, options.baseline_trials, options.seed) {
            Ok(b) => record.baseline = Some(b),
            Err(e) => return Ok(fail(record, e, solved.converged)),
        }
    }

    let purified = match purify(game, &solved.profile, options.mode, options.trace) {
        Ok(p) => p,
        Err(e) => return Ok(fail(record, e, solved.converged)),
    };
    let recomputed = pure_max_regret(game, &purified.profile);
    if (recomputed - purified.final_max_regret).abs() > TOL {
        return Err(Error::Validation(format!(
            "instance {instance}: recorded regret {} differs from recomputed {recomputed}",
            purified.final_max_regret
        )));
    }
    let pre = purified.trace.precondition();
    record.purify = Some(PurifySummary {
        mode: purified.mode,
        precondition_status: pre.status,
        precondition_required: pre.required,
        precondition_observed: pre.observed,
        corrections: purified.trace.corrections(),
        terminal_potential: purified.trace.terminal_potential(),
    });
    record.final_regret = Some(recomputed);
    record.bound = Some(purified.bound);
    record.bound_ratio = Some(recomputed / purified.bound);
    record.final_profile = Some(purified.profile.actions().iter().map(|a| a + 1).collect());
    if options.trace != TraceLevel::Off {
        record.trace = Some(purified.trace);
    }

    if let Some(r) = &options.reduce {
        match reduce_and_solve(game, r.epsilon, r.replication, r.view) {
            Ok((_, report)) => record.reduction = Some(report),
            Err(e) => return Ok(fail(record, e, solved.converged)),
        }
    }
    if !solved.converged {
        record.status = InstanceStatus::NotConverged;
    }
    Ok(record)
}

/// Loads and runs every source in parallel. A source that cannot be read or
/// parsed aborts the ensemble with its error.
pub fn run_ensemble(sources: &[InstanceSource], options: &PipelineOptions) -> Result<Vec<InstanceRecord>> {
    sources
        .par_iter()
        .enumerate()
        .map(|(k, src)| {
            let game = src.load()?;
            run_instance(k, &src.describe(), &game, options)
        })
        .collect()
}

/// `count` generated instances with seeds `seed, seed + 1, ...`.
pub fn generated_sources(template: &GeneratorSpec, count: usize) -> Vec<InstanceSource> {
    (0..count as u64)
        .map(|k| {
            let mut spec = template.clone();
            spec.seed = template.seed.wrapping_add(k);
            InstanceSource::Generated(spec)
        })
        .collect()
}
