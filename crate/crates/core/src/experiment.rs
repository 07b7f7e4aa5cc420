//! Paired cooperative / non-cooperative replications and their outputs.
//!
//! Both arms of a replication share the replication seed, so every UE sees
//! the same initial state, traffic and mobility in both arms.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::kernel::{init_scenario, RunOutput};
use crate::metrics::{arm_metrics, interquartile_range, lifetime_summary, usage_time_distribution, ArmMetrics, Estimate, OutageReport};
use crate::rng::replication_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoopMode {
    On,
    Off,
    Paired,
}

impl CoopMode {
    pub fn arms(self) -> &'static [bool] {
        match self {
            CoopMode::On => &[true],
            CoopMode::Off => &[false],
            CoopMode::Paired => &[true, false],
        }
    }
}

impl std::str::FromStr for CoopMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "on" => Ok(CoopMode::On),
            "off" => Ok(CoopMode::Off),
            "paired" => Ok(CoopMode::Paired),
            other => Err(Error::InvalidArgument(format!("--coop expects on, off or paired, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub replications: usize,
    pub targets_s: Vec<f64>,
    pub mode: CoopMode,
    pub parallel: bool,
    pub bin_width_s: f64,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioConfig) -> Self {
        ExperimentConfig {
            scenario,
            replications: 10,
            targets_s: [6.0, 8.0, 10.0].iter().map(|h| h * 3600.0).collect(),
            mode: CoopMode::Paired,
            parallel: true,
            bin_width_s: 1800.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmOutput {
    pub replication: usize,
    pub cooperation: bool,
    pub seed: u64,
    pub output: RunOutput,
}

/// One arm of one replication.
pub fn run_arm(base: &ScenarioConfig, replication: usize, cooperation: bool, targets_s: &[f64]) -> Result<ArmOutput> {
    let seed = replication_seed(base.seed, replication as u64);
    let cfg = ScenarioConfig { seed, cooperation_enabled: cooperation, ..base.clone() };
    let output = init_scenario(&cfg)?.with_snapshots(targets_s).run();
    Ok(ArmOutput { replication, cooperation, seed, output })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// Sorted by `(replication, !cooperation)`.
    pub arms: Vec<ArmOutput>,
    pub reports: Vec<OutageReport>,
}

impl PartialEq for ExperimentConfig {
    fn eq(&self, o: &Self) -> bool {
        self.scenario == o.scenario
            && self.replications == o.replications
            && self.targets_s == o.targets_s
            && self.mode == o.mode
            && self.bin_width_s == o.bin_width_s
    }
}

impl ExperimentResult {
    pub fn arm(&self, cooperation: bool) -> impl Iterator<Item = &ArmOutput> {
        self.arms.iter().filter(move |a| a.cooperation == cooperation)
    }

    pub fn report_at(&self, target_s: f64) -> Option<&OutageReport> {
        self.reports.iter().find(|r| r.target_s == target_s)
    }

    /// Depletion-time mean across replications, per arm.
    pub fn mean_lifetime(&self, cooperation: bool) -> Option<Estimate> {
        let xs: Vec<f64> = self.arm(cooperation).filter_map(|a| lifetime_summary(&a.output.records).mean_s).collect();
        Estimate::from_samples(&xs)
    }

    pub fn censored(&self, cooperation: bool) -> usize {
        self.arm(cooperation).map(|a| lifetime_summary(&a.output.records).censored).sum()
    }

    pub fn iqr(&self, cooperation: bool) -> Option<Estimate> {
        let xs: Vec<f64> = self.arm(cooperation).filter_map(|a| interquartile_range(&a.output.records)).collect();
        Estimate::from_samples(&xs)
    }
}

pub fn aggregate(config: &ExperimentConfig, arms: &[ArmOutput]) -> Result<Vec<OutageReport>> {
    let cap = config.scenario.battery_capacity_j;
    config
        .targets_s
        .iter()
        .map(|&t| {
            let metrics = |coop: bool| -> Result<Vec<ArmMetrics>> {
                arms.iter()
                    .filter(|a| a.cooperation == coop)
                    .map(|a| arm_metrics(&a.output.records, t, cap))
                    .collect()
            };
            Ok(OutageReport::from_arms(t, &metrics(true)?, &metrics(false)?))
        })
        .collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    if config.replications == 0 {
        return Err(Error::InvalidArgument("at least one replication is required".into()));
    }
    config.scenario.validate()?;
    let jobs: Vec<(usize, bool)> = (0..config.replications)
        .flat_map(|r| config.mode.arms().iter().map(move |&c| (r, c)))
        .collect();
    let run = |&(r, c): &(usize, bool)| run_arm(&config.scenario, r, c, &config.targets_s);
    let arms: Vec<ArmOutput> = if config.parallel {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };
    let reports = aggregate(config, &arms)?;
    Ok(ExperimentResult { config: config.clone(), arms, reports })
}

fn arm_name(coop: bool) -> &'static str {
    if coop { "coop" } else { "noncoop" }
}

fn opt_time(t: Option<f64>) -> String {
    t.map_or(String::new(), |t| format!("{t:.6}"))
}

pub fn records_csv(arms: &[ArmOutput]) -> String {
    let mut out = String::from(
        "replication,arm,ue_id,initial_j,depleted_at_s,remaining_j,debited_j,bytes_sent_direct,bytes_sent_d2d,bytes_relayed_for_others\n",
    );
    for a in arms {
        for r in &a.output.records {
            let _ = writeln!(
                out,
                "{},{},{},{:.9},{},{:.9},{:.9},{},{},{}",
                a.replication,
                arm_name(a.cooperation),
                r.ue_id,
                r.initial_j,
                opt_time(r.depleted_at),
                r.remaining_j,
                r.debited_j,
                r.bytes_sent_direct,
                r.bytes_sent_d2d,
                r.bytes_relayed_for_others
            );
        }
    }
    out
}

pub fn associations_csv(arms: &[ArmOutput]) -> String {
    let mut out = String::from(
        "replication,arm,helpee_id,helper_id,established_s,ended_s,reason,distance_at_setup_m,bytes_relayed,bursts_relayed\n",
    );
    for a in arms {
        for s in &a.output.associations {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{},{},{:.3},{},{}",
                a.replication,
                arm_name(a.cooperation),
                s.helpee_id,
                s.helper_id,
                s.established_at,
                opt_time(s.ended_at),
                s.reason.map_or("", |r| r.name()),
                s.distance_at_setup_m,
                s.bytes_relayed,
                s.bursts_relayed
            );
        }
    }
    out
}

/// Pooled empirical CDF of one arm as `time_h,cdf` rows.
pub fn cdf_csv(arms: &[ArmOutput], cooperation: bool, bin_width_s: f64) -> Result<String> {
    let pooled: Vec<_> = arms
        .iter()
        .filter(|a| a.cooperation == cooperation)
        .flat_map(|a| a.output.records.iter().cloned())
        .collect();
    let d = usage_time_distribution(&pooled, bin_width_s)?;
    let mut out = String::from("time_h,cdf\n");
    for (t, f) in &d.cdf {
        let _ = writeln!(out, "{:.6},{:.6}", t / 3600.0, f);
    }
    Ok(out)
}

pub fn histogram_csv(arms: &[ArmOutput], bin_width_s: f64) -> Result<String> {
    let mut out = String::from("arm,bin_start_h,bin_end_h,count\n");
    for coop in [true, false] {
        let pooled: Vec<_> = arms
            .iter()
            .filter(|a| a.cooperation == coop)
            .flat_map(|a| a.output.records.iter().cloned())
            .collect();
        if pooled.is_empty() {
            continue;
        }
        let d = usage_time_distribution(&pooled, bin_width_s)?;
        for (i, c) in d.counts.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{:.4},{:.4},{}",
                arm_name(coop),
                i as f64 * bin_width_s / 3600.0,
                (i + 1) as f64 * bin_width_s / 3600.0,
                c
            );
        }
        if d.censored > 0 {
            let _ = writeln!(out, "{},censored,censored,{}", arm_name(coop), d.censored);
        }
    }
    Ok(out)
}

fn estimate_lines(out: &mut String, key: &str, e: Option<Estimate>, unit: &str) {
    match e {
        Some(e) => {
            let _ = writeln!(out, "{key} = {:.6} {unit}", e.mean);
            let _ = writeln!(out, "{key}_ci95 = {:.6} {unit}", e.half_width);
        }
        None => {
            let _ = writeln!(out, "{key} = undefined");
        }
    }
}

pub fn summary_text(result: &ExperimentResult) -> String {
    let c = &result.config;
    let mut out = String::new();
    let _ = writeln!(out, "# scenario");
    for (k, v) in c.scenario.entries() {
        let _ = writeln!(out, "{k} = {v}");
    }
    let _ = writeln!(out, "\n# experiment");
    let _ = writeln!(out, "replications = {}", c.replications);
    let _ = writeln!(
        out,
        "mode = {}",
        match c.mode {
            CoopMode::On => "on",
            CoopMode::Off => "off",
            CoopMode::Paired => "paired",
        }
    );
    let _ = writeln!(out, "bin_width_s = {:.3}", c.bin_width_s);
    // Calibration knobs left free by the traffic/power model.
    let _ = writeln!(out, "calibration_n_rbs = {}", c.scenario.n_rbs);
    let _ = writeln!(out, "calibration_e_const_j = {:.6} J", c.scenario.e_const_j);
    for coop in [true, false] {
        if result.arm(coop).next().is_none() {
            continue;
        }
        let name = arm_name(coop);
        let _ = writeln!(out, "\n# arm {name}");
        let mean = result.mean_lifetime(coop).map(|e| Estimate { mean: e.mean / 3600.0, half_width: e.half_width / 3600.0, ..e });
        estimate_lines(&mut out, &format!("{name}_mean_depletion_time"), mean, "h");
        let iqr = result.iqr(coop).map(|e| Estimate { mean: e.mean / 3600.0, half_width: e.half_width / 3600.0, ..e });
        estimate_lines(&mut out, &format!("{name}_depletion_iqr"), iqr, "h");
        let _ = writeln!(out, "{name}_censored_ues = {}", result.censored(coop));
        let assoc: usize = result.arm(coop).map(|a| a.output.associations.len()).sum();
        let _ = writeln!(out, "{name}_associations = {assoc}");
    }
    for r in &result.reports {
        let h = r.target_s / 3600.0;
        let _ = writeln!(out, "\n# target {h:.3} h");
        let _ = writeln!(out, "target_{h:.3}h_s = {:.3} s", r.target_s);
        estimate_lines(&mut out, &format!("p_outage_coop_{h:.3}h"), r.p_outage_coop, "fraction");
        estimate_lines(&mut out, &format!("p_outage_noncoop_{h:.3}h"), r.p_outage_noncoop, "fraction");
        estimate_lines(&mut out, &format!("valueless_coop_{h:.3}h"), r.valueless_coop, "fraction_of_capacity");
        estimate_lines(&mut out, &format!("valueless_noncoop_{h:.3}h"), r.valueless_noncoop, "fraction_of_capacity");
    }
    out
}

/// Writes records, associations, CDFs, histogram and summary into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let bin = result.config.bin_width_s;
    let mut files = vec![
        ("records.csv", records_csv(&result.arms)),
        ("associations.csv", associations_csv(&result.arms)),
        ("histogram.csv", histogram_csv(&result.arms, bin)?),
        ("summary.txt", summary_text(result)),
    ];
    for coop in [true, false] {
        if result.arm(coop).next().is_some() {
            let name = if coop { "cdf_coop.csv" } else { "cdf_noncoop.csv" };
            files.push((name, cdf_csv(&result.arms, coop, bin)?));
        }
    }
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
