//! Per-instance records, the aggregate summary and their writers.
//!
//! Records go out as JSON lines, one per instance in instance order, with an
//! aggregate JSON document alongside and an optional flat CSV. Nothing
//! time-dependent is recorded, so identical inputs give identical bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::game::PolymatrixGame;
use crate::harness::baseline::{quantile, BaselineReport};
use crate::io::{game_to_json, WitnessFile};
use crate::population::ReductionReport;
use crate::purify::{PreconditionStatus, PurifyMode, PurifyTrace};

/// Hex SHA-256 of the game's canonical JSON.
pub fn game_digest(game: &PolymatrixGame) -> String {
    hex::encode(Sha256::digest(game_to_json(game).as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceStatus {
    Ok,
    /// The game is not Lipschitz for its declared parameter.
    Witness,
    NotConverged,
    /// Malformed game (payoff range) or a stage refused its input.
    Invalid,
    Breach,
}

impl InstanceStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            InstanceStatus::Ok => 0,
            InstanceStatus::Witness => 10,
            InstanceStatus::NotConverged => 20,
            InstanceStatus::Breach => 30,
            InstanceStatus::Invalid => 1,
        }
    }
}

/// Exit code of an ensemble: any breach wins, then invalid input, then
/// non-convergence, then witnesses.
pub fn ensemble_exit_code(statuses: impl IntoIterator<Item = InstanceStatus>) -> i32 {
    let mut worst = None;
    for s in statuses {
        let rank = |s: InstanceStatus| match s {
            InstanceStatus::Ok => 0,
            InstanceStatus::Witness => 1,
            InstanceStatus::NotConverged => 2,
            InstanceStatus::Invalid => 3,
            InstanceStatus::Breach => 4,
        };
        if worst.is_none_or(|w| rank(s) > rank(w)) {
            worst = Some(s);
        }
    }
    worst.map_or(0, InstanceStatus::exit_code)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub target: f64,
    pub achieved_max_regret: f64,
    pub converged: bool,
    pub iterations_used: usize,
    pub newton_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurifySummary {
    pub mode: PurifyMode,
    pub precondition_status: PreconditionStatus,
    pub precondition_required: f64,
    pub precondition_observed: f64,
    pub corrections: usize,
    /// Binary cost or summed variance at the end of rounding.
    pub terminal_potential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub instance: usize,
    /// Game file path or generator description.
    pub source: String,
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub game_digest: String,
    pub status: InstanceStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purify: Option<PurifySummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_regret: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_ratio: Option<f64>,
    /// Final pure profile, 1-based actions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_profile: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionReport>,
    /// Purifier trace (player and action indices 0-based).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PurifyTrace>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub count: usize,
    pub min: f64,
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
    pub max: f64,
    pub mean: f64,
}

impl Quantiles {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(Self {
            count: v.len(),
            min: v[0],
            p10: quantile(&v, 0.1),
            p50: quantile(&v, 0.5),
            p90: quantile(&v, 0.9),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub instances: usize,
    pub ok: usize,
    pub witnesses: usize,
    pub not_converged: usize,
    pub invalid: usize,
    pub breaches: usize,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_regret: Option<Quantiles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_ratio: Option<Quantiles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_regret: Option<Quantiles>,
    /// Per-instance best sampled regret.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_min_regret: Option<Quantiles>,
    /// Per-instance share of samples under the existence threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_fraction_below_threshold: Option<Quantiles>,
}

impl AggregateReport {
    pub fn from_records(records: &[InstanceRecord]) -> Self {
        let count = |s: InstanceStatus| records.iter().filter(|r| r.status == s).count();
        Self {
            instances: records.len(),
            ok: count(InstanceStatus::Ok),
            witnesses: count(InstanceStatus::Witness),
            not_converged: count(InstanceStatus::NotConverged),
            invalid: count(InstanceStatus::Invalid),
            breaches: count(InstanceStatus::Breach),
            exit_code: ensemble_exit_code(records.iter().map(|r| r.status)),
            final_regret: Quantiles::of(records.iter().filter_map(|r| r.final_regret)),
            bound_ratio: Quantiles::of(records.iter().filter_map(|r| r.bound_ratio)),
            solver_regret: Quantiles::of(
                records.iter().filter_map(|r| r.solver.as_ref().map(|s| s.achieved_max_regret)),
            ),
            baseline_min_regret: Quantiles::of(
                records.iter().filter_map(|r| r.baseline.as_ref().map(|b| b.min)),
            ),
            baseline_fraction_below_threshold: Quantiles::of(
                records
                    .iter()
                    .filter_map(|r| r.baseline.as_ref().map(|b| b.fraction_below_threshold)),
            ),
        }
    }
}

/// Flat CSV view of a record.
#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    instance: usize,
    source: &'a str,
    n: usize,
    m: usize,
    lambda: f64,
    game_digest: &'a str,
    status: InstanceStatus,
    solver_regret: Option<f64>,
    solver_converged: Option<bool>,
    purify_mode: Option<PurifyMode>,
    terminal_potential: Option<f64>,
    corrections: Option<usize>,
    final_regret: Option<f64>,
    bound: Option<f64>,
    bound_ratio: Option<f64>,
    baseline_min: Option<f64>,
    baseline_median: Option<f64>,
    baseline_threshold: Option<f64>,
    aggregated_regret: Option<f64>,
}

impl<'a> From<&'a InstanceRecord> for CsvRow<'a> {
    fn from(r: &'a InstanceRecord) -> Self {
        Self {
            instance: r.instance,
            source: &r.source,
            n: r.n,
            m: r.m,
            lambda: r.lambda,
            game_digest: &r.game_digest,
            status: r.status,
            solver_regret: r.solver.as_ref().map(|s| s.achieved_max_regret),
            solver_converged: r.solver.as_ref().map(|s| s.converged),
            purify_mode: r.purify.as_ref().map(|p| p.mode),
            terminal_potential: r.purify.as_ref().map(|p| p.terminal_potential),
            corrections: r.purify.as_ref().map(|p| p.corrections),
            final_regret: r.final_regret,
            bound: r.bound,
            bound_ratio: r.bound_ratio,
            baseline_min: r.baseline.as_ref().map(|b| b.min),
            baseline_median: r.baseline.as_ref().map(|b| b.median),
            baseline_threshold: r.baseline.as_ref().map(|b| b.threshold),
            aggregated_regret: r.reduction.as_ref().map(|x| x.aggregated_regret),
        }
    }
}

pub fn to_jsonl(records: &[InstanceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn to_csv(records: &[InstanceRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(CsvRow::from(r))
            .map_err(|e| Error::Validation(format!("csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Validation(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)
}

/// Writes `instances.jsonl`, `aggregate.json` and, if asked,
/// `instances.csv` into `dir`.
pub fn write_reports(
    dir: &Path,
    records: &[InstanceRecord],
    aggregate: &AggregateReport,
    csv: bool,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    write_file(&dir.join("instances.jsonl"), &to_jsonl(records))?;
    let agg = serde_json::to_string_pretty(aggregate).expect("aggregate serializes") + "\n";
    write_file(&dir.join("aggregate.json"), &agg)?;
    if csv {
        write_file(&dir.join("instances.csv"), &to_csv(records)?)?;
    }
    Ok(())
}
