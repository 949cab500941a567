//! Acceptance criteria, one line each. Runs as a plain binary so the lines
//! always print; exits non-zero if any criterion fails.

mod common;

use std::fmt::Write as _;
use std::time::Instant;

use common::*;
use lippoly::check::{check_game, GameCheck};
use lippoly::game::{mixed_payoff, pure_payoff, regret};
use lippoly::harness::baseline::existence_threshold;
use lippoly::harness::generator::{Family, GeneratorSpec};
use lippoly::harness::pipeline::{generated_sources, run_ensemble, PipelineOptions};
use lippoly::harness::report::{to_csv, to_jsonl, InstanceRecord, InstanceStatus};
use lippoly::population::{aggregate, induce_with_budget, ViewMode};
use lippoly::purify::{
    ane_to_wsne_binary, ane_to_wsne_m, binary_final_bound, m_action_final_bound, purify, purify_binary, purify_m,
    switch_high_regret, MActionThresholds, PurifyMode, PurifyTrace, TraceLevel,
};
use lippoly::solver::{solve_mixed, SolverConfig};
use lippoly::{MixedProfile, PayoffModel, PureProfile};
use rand::Rng;

const TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn final_profile(r: &InstanceRecord) -> Option<PureProfile> {
    let a = r.final_profile.as_ref()?;
    PureProfile::new(a.iter().map(|x| x - 1).collect(), r.m).ok()
}

fn binary_ensemble() -> (Vec<InstanceRecord>, f64) {
    let start = Instant::now();
    let mut records = Vec::new();
    for (k, n) in [20usize, 50, 100, 200].into_iter().enumerate() {
        let template = GeneratorSpec::new(n, 2, 1.0 / n as f64, Family::Uniform, 10_000 * (k as u64 + 1));
        let options = PipelineOptions {
            trace: TraceLevel::Potentials,
            baseline_trials: 1000,
            seed: k as u64,
            ..PipelineOptions::default()
        };
        records.extend(run_ensemble(&generated_sources(&template, 50), &options).unwrap());
    }
    (records, start.elapsed().as_secs_f64())
}

fn criterion_1(records: &[InstanceRecord], secs: f64) -> Outcome {
    let mut bad = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for r in records {
        let lambda = r.lambda;
        let solver_ok = r
            .solver
            .as_ref()
            .is_some_and(|s| s.achieved_max_regret <= lambda / 8.0 + TOL);
        let Some(a) = final_profile(r) else {
            bad.push(format!("{} ({:?})", r.source, r.status));
            continue;
        };
        let g = uniform_game(r.n, 2, lambda, seed_of(r));
        let regret = oracle_max_regret(&g, &a);
        let bound = binary_final_bound(r.n, lambda);
        worst_ratio = worst_ratio.max(regret / bound);
        if !solver_ok || regret > bound + TOL || r.status != InstanceStatus::Ok {
            bad.push(r.source.clone());
        }
    }
    outcome(
        bad.is_empty() && records.len() >= 200 && secs < 120.0,
        format!(
            "{} games, worst final/bound {:.3}, {:.1}s{}",
            records.len(),
            worst_ratio,
            secs,
            failures(&bad)
        ),
    )
}

fn seed_of(r: &InstanceRecord) -> u64 {
    r.source
        .rsplit("seed=")
        .next()
        .and_then(|s| s.parse().ok())
        .expect("generated source names its seed")
}

fn failures(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!(", failing: {}", bad.join("; "))
    }
}

fn criterion_2(records: &[InstanceRecord]) -> Outcome {
    let mut bad = Vec::new();
    let (mut worst_wsne, mut worst_cost, mut worst_switch): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for r in records {
        let Some(PurifyTrace::Binary(t)) = &r.trace else {
            bad.push(r.source.clone());
            continue;
        };
        let (n, lambda) = (t.n as f64, t.lambda);
        let wsne_bound = lambda * n.sqrt();
        let cost_bound = 5.0 * lambda * lambda * n * n;
        let delta = lambda * (20.0 * n * n).cbrt();
        let switch_bound = t.terminal_cost / (delta * delta);
        let switched = t.step3_switched.len() as f64;
        worst_wsne = worst_wsne.max(t.wsne_max_support_regret / wsne_bound);
        worst_cost = worst_cost.max(t.terminal_cost / cost_bound);
        if switch_bound > 0.0 {
            worst_switch = worst_switch.max(switched / switch_bound);
        }
        if t.wsne_max_support_regret > wsne_bound + TOL
            || t.terminal_cost > cost_bound + TOL
            || switched > switch_bound + TOL
            || (t.delta - delta).abs() > 1e-12
        {
            bad.push(r.source.clone());
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "worst ratios: wsne {:.3}, terminal cost {:.3}, switchers {:.3}{}",
            worst_wsne,
            worst_cost,
            worst_switch,
            failures(&bad)
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let (mut count, mut worst_final, mut worst_var): (usize, f64, f64) = (0, 0.0, 0.0);
    for m in [3usize, 4, 8] {
        for n in [20usize, 50] {
            for seed in 0..17u64 {
                count += 1;
                let lambda = 1.0 / n as f64;
                let g = uniform_game(n, m, lambda, 50_000 + 1000 * m as u64 + n as u64 * 10 + seed);
                let solved = solve_mixed(&g, &SolverConfig::for_game(&g)).unwrap();
                let eps0 = MActionThresholds::new(n, m, lambda).epsilon0;
                let tag = format!("n={n} m={m} seed={seed}");
                if solved.achieved_max_regret > eps0 + TOL {
                    bad.push(format!("{tag} solver"));
                    continue;
                }
                match purify_m(&g, &solved.profile, TraceLevel::Off) {
                    Ok((a, t)) => {
                        let (nf, mf) = (n as f64, m as f64);
                        let var_bound = 8.0 * nf * nf * lambda * lambda * (3.0 * mf).ln();
                        let bound = m_action_final_bound(n, m, lambda);
                        let regret = oracle_max_regret(&g, &a);
                        worst_final = worst_final.max(regret / bound);
                        worst_var = worst_var.max(t.terminal_variance / var_bound);
                        if regret > bound + TOL || t.terminal_variance >= var_bound + TOL {
                            bad.push(tag);
                        }
                    }
                    Err(e) => bad.push(format!("{tag}: {e}")),
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && count >= 100 && secs < 180.0,
        format!(
            "{count} games, worst final/bound {worst_final:.3}, worst variance/bound {worst_var:.3}, {secs:.1}s{}",
            failures(&bad)
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        let n = r.gen_range(2..=10);
        let g = uniform_game(n, 2, r.gen_range(0.05..=1.0), 70_000 + k);
        let p = random_mixed(&mut r, n, 2);
        for i in 0..n {
            for j in 0..2 {
                worst = worst.max((mixed_payoff(&g, i, j, &p).unwrap() - enumerate_payoff(&g, i, j, &p)).abs());
            }
        }
    }
    let mut worst_regret: f64 = 0.0;
    for k in 0..50u64 {
        let (n, m) = (r.gen_range(2..=4), r.gen_range(2..=3));
        let g = uniform_game(n, m, r.gen_range(0.05..=1.0), 80_000 + k);
        let p = random_mixed(&mut r, n, m);
        for i in 0..n {
            worst_regret = worst_regret.max((regret(&g, i, &p).unwrap() - enumerate_regret(&g, i, &p)).abs());
        }
    }
    outcome(
        worst <= TOL && worst_regret <= TOL,
        format!("max payoff gap {worst:.1e} over 50 binary games, max regret gap {worst_regret:.1e} over 50 small games"),
    )
}

fn criterion_5() -> Outcome {
    let (n, m, l) = (3usize, 2usize, 50usize);
    let mut bad = Vec::new();
    let mut worst_probe: f64 = 0.0;
    let mut worst_gap = f64::NEG_INFINITY;
    let mut r = rng(5);
    for k in 0..20u64 {
        let g = uniform_game(n, m, 0.5, 90_000 + k);
        let dense = induce_with_budget(&g, l, ViewMode::Materialized, 1e8).unwrap();
        let lazy = induce_with_budget(&g, l, ViewMode::Lazy, 1e8).unwrap();
        let tag = format!("game {k}");
        let d = dense.dense().unwrap();
        if check_game(d) != GameCheck::Valid || (d.lambda() - g.lambda() / l as f64).abs() > 1e-15 {
            bad.push(format!("{tag} check"));
        }
        let solved = solve_mixed(&dense, &SolverConfig::for_game(&dense)).unwrap();
        match purify(&dense, &solved.profile, PurifyMode::Auto, TraceLevel::Off) {
            Ok(pur) => {
                let agg = aggregate(&lazy, &pur.profile).unwrap();
                let uniform = agg.rows().flatten().all(|q| (q * l as f64 - (q * l as f64).round()).abs() < 1e-9);
                let base = (0..n).map(|i| enumerate_regret(&g, i, &agg)).fold(0.0, f64::max);
                let achieved = oracle_max_regret(d, &pur.profile);
                worst_gap = worst_gap.max(base - achieved);
                if !uniform || base > achieved + TOL {
                    bad.push(tag.clone());
                }
            }
            Err(e) => bad.push(format!("{tag}: {e}")),
        }
        for _ in 0..50 {
            let p = random_mixed(&mut r, n * l, m);
            let v = r.gen_range(0..n * l);
            let (a, b) = (lazy.payoff_vector(v, &p), dense.payoff_vector(v, &p));
            for j in 0..m {
                worst_probe = worst_probe.max((a[j] - b[j]).abs());
            }
        }
    }
    outcome(
        bad.is_empty() && worst_probe <= 1e-12,
        format!(
            "20 games, L = {l}: max(base regret - population regret) {worst_gap:.2e}, lazy vs materialized {worst_probe:.1e} over 1000 probes{}",
            failures(&bad)
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let mut bad = Vec::new();
    for k in 0..100u64 {
        let (n, m, lambda) = (r.gen_range(2..=10), r.gen_range(2..=4), r.gen_range(0.02..=0.5));
        let mut g = uniform_game(n, m, lambda, 100_000 + k);
        let i = r.gen_range(0..n);
        let ip = (i + r.gen_range(1..n)) % n;
        let (j, jp) = (r.gen_range(0..m), r.gen_range(0..m));
        g.set_beta(i, ip, j, jp, g.beta(i, ip, j, jp) + 2.0 * lambda).unwrap();
        let GameCheck::LipschitzViolation { witness: w } = check_game(&g) else {
            bad.push(format!("fault {k} missed"));
            continue;
        };
        let ua = pure_payoff(&g, w.player, w.profile_a.action(w.player), &w.profile_a).unwrap();
        let ub = pure_payoff(&g, w.player, w.profile_b.action(w.player), &w.profile_b).unwrap();
        let distance = (0..n)
            .filter(|&q| q != w.player && w.profile_a.action(q) != w.profile_b.action(q))
            .count() as f64;
        let agree = w.profile_a.action(w.player) == w.profile_b.action(w.player);
        if !agree || (ua - ub).abs() <= lambda * distance || w.player != i {
            bad.push(format!("fault {k}"));
        }
    }
    outcome(bad.is_empty(), format!("100 planted faults{}", failures(&bad)))
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    let mut bad = Vec::new();

    // rounding slope and relevant-set growth, recomputed from full traces
    let mut slopes = 0usize;
    for seed in 0..5u64 {
        let n = 30;
        let g = uniform_game(n, 2, 1.0 / n as f64, 110_000 + seed);
        let (out, t) = purify_binary(&g, &solved(&g), TraceLevel::Full).unwrap();
        let mut before = t.wsne_profile.clone().unwrap();
        let mut relevant = t.initial_relevant.clone();
        for step in &t.steps {
            if step.coefficient.is_some() {
                let i = step.player;
                let mut zero = before.clone();
                zero.set_pure(i, 0);
                let mut one = before.clone();
                one.set_pure(i, 1);
                let (d0, d1) = (oracle_discrepancies(&g, &zero), oracle_discrepancies(&g, &one));
                let a: f64 = relevant.iter().map(|&q| 2.0 * d0[q] * (d1[q] - d0[q])).sum();
                slopes += 1;
                if a * (step.p_after - step.p_before) > 1e-12 {
                    bad.push(format!("A dp > 0 at step {}", step.step));
                }
            }
            let now = step.relevant.clone().unwrap();
            if !relevant.iter().all(|x| now.contains(x)) {
                bad.push("binary S shrank".into());
            }
            relevant = now;
            let rows = step.profile.as_ref().unwrap().iter().map(|&q| vec![1.0 - q, q]).collect();
            before = MixedProfile::from_rows(rows).unwrap();
        }
        let regrets = oracle_pure_regrets(&g, &out);
        if (0..n).any(|q| !t.final_relevant.contains(&q) && regrets[q] > TOL) {
            bad.push("regret outside S".into());
        }
    }
    for seed in 0..3u64 {
        let g = uniform_game(20, 4, 0.05, 120_000 + seed);
        let (_, t) = purify_m(&g, &solved(&g), TraceLevel::Full).unwrap();
        let mut sets = t.initial_relevant.clone();
        for step in &t.steps {
            let now = step.relevant.clone().unwrap();
            if step.slope > 1e-12 || sets.iter().zip(&now).any(|(a, b)| !a.iter().all(|x| b.contains(x))) {
                bad.push("m-action step".into());
            }
            sets = now;
        }
    }
    notes.push(format!("{slopes} slopes recomputed"));

    // stages 1 and 3 under player relabelling
    let mut perms = 0;
    for seed in 0..6u64 {
        let (n, m) = (16, 2 + (seed as usize % 3));
        let g = uniform_game(n, m, 1.0 / n as f64, 130_000 + seed);
        let p = solved(&g);
        let perm = shuffled(n, seed);
        let h = g.relabel(&perm).unwrap();
        let q = permute_mixed(&p, &perm);
        let (w, wh) = if m == 2 {
            (ane_to_wsne_binary(&g, &p).unwrap(), ane_to_wsne_binary(&h, &q).unwrap())
        } else {
            (ane_to_wsne_m(&g, &p).unwrap(), ane_to_wsne_m(&h, &q).unwrap())
        };
        if wh != permute_mixed(&w, &perm) {
            bad.push(format!("stage 1 depends on labels (seed {seed})"));
        }
        let a = PureProfile::new((0..n).map(|k| (k * 7 + seed as usize) % m).collect(), m).unwrap();
        let threshold = 0.5 * lippoly::purify::max_support_regret(&g, &MixedProfile::from_pure(&a, m));
        let (x, _) = switch_high_regret(&g, &a, threshold, true);
        let (y, _) = switch_high_regret(&h, &permute_pure(&a, &perm, m), threshold, true);
        if y != permute_pure(&x, &perm, m) {
            bad.push(format!("stage 3 depends on labels (seed {seed})"));
        }
        perms += 1;
    }
    notes.push(format!("{perms} relabellings"));

    // byte-identical reports
    let template = GeneratorSpec::new(20, 3, 0.05, Family::CoordinationMix(0.5), 7);
    let options = PipelineOptions {
        trace: TraceLevel::Full,
        baseline_trials: 50,
        ..PipelineOptions::default()
    };
    let a = run_ensemble(&generated_sources(&template, 4), &options).unwrap();
    let b = run_ensemble(&generated_sources(&template, 4), &options).unwrap();
    if to_jsonl(&a) != to_jsonl(&b) {
        bad.push("reports differ between runs".into());
    }
    notes.push("reports byte-identical".into());
    outcome(bad.is_empty(), format!("{}{}", notes.join(", "), failures(&bad)))
}

fn criterion_8(records: &[InstanceRecord]) -> Outcome {
    let mut table = String::new();
    writeln!(
        table,
        "      n  instances  pipeline_mean  sample_min_mean  sample_median_mean  threshold  below_threshold"
    )
    .unwrap();
    let mut complete = true;
    for n in [20usize, 50, 100, 200] {
        let rs: Vec<&InstanceRecord> = records.iter().filter(|r| r.n == n).collect();
        let k = rs.len() as f64;
        let mut mean = |f: &dyn Fn(&InstanceRecord) -> Option<f64>| {
            let v: Vec<f64> = rs.iter().filter_map(|r| f(r)).collect();
            complete &= v.len() == rs.len();
            v.iter().sum::<f64>() / k
        };
        let pipeline = mean(&|r| r.final_regret);
        let smin = mean(&|r| r.baseline.as_ref().map(|b| b.min));
        let smed = mean(&|r| r.baseline.as_ref().map(|b| b.median));
        let below = mean(&|r| r.baseline.as_ref().map(|b| b.fraction_below_threshold));
        writeln!(
            table,
            "  {n:>5}  {:>9}  {pipeline:>13.5}  {smin:>15.5}  {smed:>18.5}  {:>9.5}  {below:>15.3}",
            rs.len(),
            existence_threshold(n, 2, 1.0 / n as f64)
        )
        .unwrap();
    }
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("baseline_comparison.csv");
    let written = std::fs::write(&path, to_csv(records).unwrap_or_default()).is_ok();
    print!("{table}");
    outcome(
        complete && written,
        format!("table above; per-instance CSV at {}", path.display()),
    )
}

fn main() {
    let mut results = Vec::new();
    let (records, secs) = binary_ensemble();
    results.push(("1", "binary purification bound", criterion_1(&records, secs)));
    results.push(("2", "intermediate binary bounds", criterion_2(&records)));
    results.push(("3", "m-action purification bound", criterion_3()));
    results.push(("4", "oracle equivalence", criterion_4()));
    results.push(("5", "population round trip", criterion_5()));
    results.push(("6", "witness correctness", criterion_6()));
    results.push(("7", "property suite", criterion_7()));
    let c8 = criterion_8(&records);
    results.push(("8", "baseline comparison", c8));

    let mut failed = 0;
    for (id, name, o) in &results {
        println!("[{}] criterion {id} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
