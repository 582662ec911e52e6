//! Suites of trials and their summary tables.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::generate::generate_scenario;
use super::trial::{run_trial, TrialResult};
use crate::baselines::PlannerKind;
use crate::config::Config;

/// Mean and standard error of the mean; SE is 0 below two samples.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One planner's line of the summary table. Times and forces average over
/// trials that reached the goal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlannerRow {
    pub planner: String,
    pub scenarios: usize,
    pub path_planning_success_pct: f64,
    pub execution_success_pct: f64,
    pub execution_time_mean_s: f64,
    pub execution_time_se_s: f64,
    pub cumulative_force_mean_ns: f64,
    pub cumulative_force_se_ns: f64,
    pub force_kn_steps_mean: f64,
    pub force_kn_steps_se: f64,
    pub replans_total: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingRow {
    pub planner: String,
    pub plans: usize,
    pub planner_time_mean_s: f64,
    pub planner_time_se_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateReport {
    pub rows: Vec<PlannerRow>,
    /// Wall-clock planner times, kept apart so the main table is
    /// reproducible byte for byte.
    pub timing: Vec<TimingRow>,
}

fn pct(k: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        100.0 * k as f64 / n as f64
    }
}

/// Folds trials into one row per planner, in `planners` order.
pub fn aggregate(trials: &[TrialResult], planners: &[PlannerKind]) -> AggregateReport {
    let mut rows = Vec::new();
    let mut timing = Vec::new();
    for &kind in planners {
        let mine: Vec<&TrialResult> = trials.iter().filter(|t| t.planner == kind).collect();
        let ok: Vec<&&TrialResult> = mine.iter().filter(|t| t.executed).collect();
        let (tm, tse) = mean_se(&ok.iter().map(|t| t.execution_time).collect::<Vec<_>>());
        let (fm, fse) = mean_se(&ok.iter().map(|t| t.cumulative_force).collect::<Vec<_>>());
        let (km, kse) = mean_se(&ok.iter().map(|t| t.force_kn_steps).collect::<Vec<_>>());
        rows.push(PlannerRow {
            planner: kind.label().to_string(),
            scenarios: mine.len(),
            path_planning_success_pct: pct(
                mine.iter().filter(|t| t.path_found).count(),
                mine.len(),
            ),
            execution_success_pct: pct(ok.len(), mine.len()),
            execution_time_mean_s: tm,
            execution_time_se_s: tse,
            cumulative_force_mean_ns: fm,
            cumulative_force_se_ns: fse,
            force_kn_steps_mean: km,
            force_kn_steps_se: kse,
            replans_total: mine.iter().map(|t| t.replans).sum(),
        });
        let (pm, pse) = mean_se(&mine.iter().map(|t| t.planner_time).collect::<Vec<_>>());
        timing.push(TimingRow {
            planner: kind.label().to_string(),
            plans: mine.len(),
            planner_time_mean_s: pm,
            planner_time_se_s: pse,
        });
    }
    AggregateReport { rows, timing }
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

impl AggregateReport {
    pub fn row(&self, kind: PlannerKind) -> Option<&PlannerRow> {
        self.rows.iter().find(|r| r.planner == kind.label())
    }

    pub fn timing_row(&self, kind: PlannerKind) -> Option<&TimingRow> {
        self.timing.iter().find(|r| r.planner == kind.label())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "planner",
            "scenarios",
            "path_planning_success_pct",
            "execution_success_pct",
            "execution_time_mean_s",
            "execution_time_se_s",
            "cumulative_force_mean_ns",
            "cumulative_force_se_ns",
            "force_kn_steps_mean",
            "force_kn_steps_se",
            "replans_total",
        ])
        .expect("in-memory csv");
        for r in &self.rows {
            w.write_record([
                r.planner.clone(),
                r.scenarios.to_string(),
                f6(r.path_planning_success_pct),
                f6(r.execution_success_pct),
                f6(r.execution_time_mean_s),
                f6(r.execution_time_se_s),
                f6(r.cumulative_force_mean_ns),
                f6(r.cumulative_force_se_ns),
                f6(r.force_kn_steps_mean),
                f6(r.force_kn_steps_se),
                r.replans_total.to_string(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn timing_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "planner",
            "plans",
            "planner_time_mean_s",
            "planner_time_se_s",
        ])
        .expect("in-memory csv");
        for r in &self.timing {
            w.write_record([
                r.planner.clone(),
                r.plans.to_string(),
                format!("{:.9}", r.planner_time_mean_s),
                format!("{:.9}", r.planner_time_se_s),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Per-trial table without wall-clock columns.
pub fn trials_csv(trials: &[TrialResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "seed",
        "planner",
        "path_found",
        "executed",
        "outcome",
        "execution_time_s",
        "cumulative_force_ns",
        "force_kn_steps",
        "replans",
        "cycles",
    ])
    .expect("in-memory csv");
    for t in trials {
        let outcome = serde_json::to_value(t.outcome).expect("enum serializes");
        w.write_record([
            t.seed.to_string(),
            t.planner.label().to_string(),
            t.path_found.to_string(),
            t.executed.to_string(),
            outcome.as_str().unwrap_or_default().to_string(),
            f6(t.execution_time),
            f6(t.cumulative_force),
            f6(t.force_kn_steps),
            t.replans.to_string(),
            t.cycles.to_string(),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutput {
    pub trials: Vec<TrialResult>,
    pub report: AggregateReport,
    /// Seeds whose scenario could not be generated, with the reason.
    pub failed_seeds: Vec<(u64, String)>,
}

pub fn trace_file_name(seed: u64, kind: PlannerKind) -> String {
    format!("seed{seed:04}_{}.jsonl", kind.slug())
}

/// Runs every planner on every seed's generated scenario, in (seed,
/// planner) order. With `out_dir`, writes `report.csv`, `trials.csv`,
/// `planner_timing.csv`, `scenarios/` and `traces/` there.
pub fn run_suite(
    seeds: &[u64],
    planners: &[PlannerKind],
    cfg: &Config,
    out_dir: Option<&Path>,
    mut progress: impl FnMut(&TrialResult),
) -> std::io::Result<SuiteOutput> {
    let dirs = match out_dir {
        Some(d) => {
            let (s, t) = (d.join("scenarios"), d.join("traces"));
            fs::create_dir_all(&s)?;
            fs::create_dir_all(&t)?;
            Some((s, t))
        }
        None => None,
    };
    let mut trials = Vec::new();
    let mut failed_seeds = Vec::new();
    for &seed in seeds {
        let scenario = match generate_scenario(seed, &cfg.generator) {
            Ok(s) => s,
            Err(e) => {
                failed_seeds.push((seed, e.to_string()));
                continue;
            }
        };
        if let Some((sdir, _)) = &dirs {
            fs::write(
                sdir.join(format!("seed{seed:04}.json")),
                scenario.to_json() + "\n",
            )?;
        }
        for &kind in planners {
            let result = match &dirs {
                Some((_, tdir)) => {
                    let path: PathBuf = tdir.join(trace_file_name(seed, kind));
                    let mut w = BufWriter::new(File::create(&path)?);
                    let r = run_trial(&scenario, kind, cfg, Some(&mut w))?;
                    w.flush()?;
                    r
                }
                None => run_trial(&scenario, kind, cfg, None)?,
            };
            progress(&result);
            trials.push(result);
        }
    }
    let report = aggregate(&trials, planners);
    if let Some(d) = out_dir {
        fs::write(d.join("report.csv"), report.to_csv())?;
        fs::write(d.join("trials.csv"), trials_csv(&trials))?;
        fs::write(d.join("planner_timing.csv"), report.timing_csv())?;
    }
    Ok(SuiteOutput {
        trials,
        report,
        failed_seeds,
    })
}
