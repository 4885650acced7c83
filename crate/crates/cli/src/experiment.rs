//! `run` and `sweep`: the (policy, s, seed) grid of OLP experiments.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use pairstream::data::{normalize_features, read_libsvm, split, synth_gaussian};
use pairstream::eval::{auc_score, online_to_batch_report};
use pairstream::learners::{average_hypothesis, olp_run};
use pairstream::{make_stream, Dataset, LabeledPoint, LearnerConfig, LossKind, PairwiseLoss, Policy, RandomSource};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{DataSource, ExperimentArgs, ExperimentConfig};
use crate::output::{emit, render};
use crate::{config_err, runtime, CliResult};

// Sub-streams of a seed's RandomSource family.
const SPLIT_STREAM: u64 = 0;
const ORDER_STREAM: u64 = 1;
const BUFFER_STREAM: u64 = 2;
const SYNTH_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRow {
    pub dataset: String,
    pub policy: String,
    pub s: usize,
    pub seed: u64,
    /// Empty for the metric task, whose hypotheses do not score single points.
    pub auc: Option<f64>,
    pub ensemble_avg_risk: f64,
    pub avg_hyp_risk: f64,
    pub wall_millis: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryRow {
    pub policy: String,
    pub s: usize,
    pub seeds: usize,
    pub auc_mean: Option<f64>,
    pub auc_sd: Option<f64>,
    pub avg_hyp_risk_mean: f64,
}

struct Prepared {
    name: String,
    stream: Vec<LabeledPoint>,
    test: Vec<LabeledPoint>,
}

fn load_base(cfg: &ExperimentConfig) -> CliResult<Option<Dataset>> {
    match &cfg.source {
        DataSource::File(path) => {
            if !path.is_file() {
                return Err(config_err(format!("data file {} not found", path.display())));
            }
            let ds = read_libsvm(path, cfg.label_map).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            Ok(Some(ds))
        }
        DataSource::Synth(_) => Ok(None),
    }
}

fn prepare(cfg: &ExperimentConfig, base: Option<&Dataset>, seed: u64) -> CliResult<Prepared> {
    let raw = match (&cfg.source, base) {
        (DataSource::Synth(spec), _) => synth_gaussian(
            spec.n_pos,
            spec.n_neg,
            spec.dim,
            spec.separation,
            &mut RandomSource::derive(seed, SYNTH_STREAM),
        )
        .map_err(config_err)?,
        (DataSource::File(_), Some(ds)) => ds.clone(),
        (DataSource::File(_), None) => unreachable!("file source is loaded up front"),
    };
    let ds = normalize_features(&raw, cfg.normalize);
    let (train, test) = split(&ds, &cfg.split, &mut RandomSource::derive(seed, SPLIT_STREAM)).map_err(config_err)?;
    let stream = make_stream(&train, &mut RandomSource::derive(seed, ORDER_STREAM)).map_err(runtime)?;
    Ok(Prepared {
        name: raw.name,
        stream,
        test: test.points,
    })
}

fn loss_of(cfg: &ExperimentConfig) -> PairwiseLoss {
    match cfg.loss {
        LossKind::AucHinge => PairwiseLoss::auc(cfg.sigma),
        LossKind::MetricHinge => PairwiseLoss::metric(cfg.sigma),
    }
}

fn one_run(cfg: &ExperimentConfig, data: &Prepared, policy: Policy, s: usize, seed: u64) -> CliResult<RunRow> {
    let start = Instant::now();
    let loss = loss_of(cfg);
    let dim = data.stream[0].dim();
    let mut learner = LearnerConfig::new(loss, dim, s, policy);
    learner.eta = cfg.eta;
    learner.radius = cfg.radius;
    learner.keep_snapshots = false;
    let trace = olp_run(&data.stream, &learner, &mut RandomSource::derive(seed, BUFFER_STREAM)).map_err(runtime)?;
    let avg = average_hypothesis(&trace).map_err(runtime)?;
    let auc = match cfg.loss {
        LossKind::AucHinge => Some(auc_score(&avg, &data.test).map_err(runtime)?),
        LossKind::MetricHinge => None,
    };
    let report = online_to_batch_report(&trace, &data.test, &loss).map_err(runtime)?;
    Ok(RunRow {
        dataset: data.name.clone(),
        policy: policy.name().to_string(),
        s,
        seed,
        auc,
        ensemble_avg_risk: report.ensemble_avg_risk,
        avg_hyp_risk: report.avg_hyp_risk,
        wall_millis: if cfg.record_timing { start.elapsed().as_millis() as u64 } else { 0 },
    })
}

/// Runs the whole grid; rows come back in (policy, s, seed) order.
pub fn run_grid(cfg: &ExperimentConfig) -> CliResult<Vec<RunRow>> {
    let base = load_base(cfg)?;
    let prepared = cfg
        .seeds
        .par_iter()
        .map(|&seed| prepare(cfg, base.as_ref(), seed))
        .collect::<CliResult<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for &policy in &cfg.policies {
        for &s in &cfg.buffer_sizes {
            for (k, &seed) in cfg.seeds.iter().enumerate() {
                jobs.push((policy, s, seed, k));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(policy, s, seed, k)| one_run(cfg, &prepared[k], policy, s, seed))
        .collect()
}

pub fn summarize(rows: &[RunRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let mut j = i;
        while j < rows.len() && rows[j].policy == rows[i].policy && rows[j].s == rows[i].s {
            j += 1;
        }
        let group = &rows[i..j];
        let m = group.len() as f64;
        let aucs: Option<Vec<f64>> = group.iter().map(|r| r.auc).collect();
        let (auc_mean, auc_sd) = match aucs {
            Some(a) => {
                let mean = a.iter().sum::<f64>() / m;
                let sd = if a.len() > 1 {
                    (a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
                } else {
                    0.0
                };
                (Some(mean), Some(sd))
            }
            None => (None, None),
        };
        out.push(SummaryRow {
            policy: rows[i].policy.clone(),
            s: rows[i].s,
            seeds: group.len(),
            auc_mean,
            auc_sd,
            avg_hyp_risk_mean: group.iter().map(|r| r.avg_hyp_risk).sum::<f64>() / m,
        });
        i = j;
    }
    out
}

pub fn cmd_run(args: ExperimentArgs) -> CliResult<()> {
    let cfg = ExperimentConfig::resolve(args)?;
    let rows = run_grid(&cfg)?;
    emit(&render(&rows, cfg.format)?, cfg.out.as_deref())
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Where to write the summary table; stdout when absent.
    #[arg(long)]
    pub summary_out: Option<PathBuf>,
}

pub fn cmd_sweep(args: SweepArgs) -> CliResult<()> {
    let cfg = ExperimentConfig::resolve(args.experiment)?;
    if cfg.buffer_sizes.len() < 2 {
        return Err(config_err("sweep needs ≥2 sizes"));
    }
    let rows = run_grid(&cfg)?;
    let summary = render(&summarize(&rows), cfg.format)?;
    let rows = render(&rows, cfg.format)?;
    match (&cfg.out, &args.summary_out) {
        (None, None) => {
            // Both tables on stdout, separated by a blank line.
            let mut all = rows;
            all.push(b'\n');
            all.extend_from_slice(&summary);
            emit(&all, None)
        }
        (out, summary_out) => {
            emit(&rows, out.as_deref())?;
            emit(&summary, summary_out.as_deref())
        }
    }
}
