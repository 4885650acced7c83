//! Experiment configuration: command-line flags over an optional flat TOML file.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use pairstream::data::{LabelMap, Normalization, SplitSpec};
use pairstream::{LossKind, Policy};
use serde::Deserialize;

use crate::output::Format;
use crate::{config_err, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Auc,
    Metric,
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Task as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// LIBSVM file; without it a synthetic Gaussian task is generated per seed.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    /// Comma-separated policies: fifo, rs, rsx, rsx2.
    #[arg(long)]
    pub policy: Option<String>,
    /// Comma-separated buffer capacities.
    #[arg(long)]
    pub buffer_sizes: Option<String>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Comma-separated seeds or a half-open range `a..b`. Defaults to $PAIRSTREAM_SEED, else 0.
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub train_frac: Option<f64>,
    #[arg(long)]
    pub train_cap: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Flat TOML file with the same keys as the long flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub synth_pos: Option<usize>,
    #[arg(long)]
    pub synth_neg: Option<usize>,
    #[arg(long)]
    pub synth_dim: Option<usize>,
    #[arg(long)]
    pub synth_sep: Option<f64>,
    /// `threshold` (labels > 0 are positive) or `ovr:<class>`.
    #[arg(long)]
    pub label_map: Option<String>,
    /// `unit-l2` or `none`.
    #[arg(long)]
    pub normalize: Option<String>,
    /// Fill the wallMillis column; off by default so repeated runs are byte-identical.
    #[arg(long)]
    pub record_timing: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    data: Option<PathBuf>,
    task: Option<Task>,
    policy: Option<toml::Value>,
    buffer_sizes: Option<toml::Value>,
    eta: Option<f64>,
    radius: Option<f64>,
    sigma: Option<f64>,
    seeds: Option<toml::Value>,
    train_frac: Option<f64>,
    train_cap: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
    synth_pos: Option<usize>,
    synth_neg: Option<usize>,
    synth_dim: Option<usize>,
    synth_sep: Option<f64>,
    label_map: Option<String>,
    normalize: Option<String>,
    record_timing: Option<bool>,
}

fn list_text(v: toml::Value) -> CliResult<String> {
    match v {
        toml::Value::String(s) => Ok(s),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Array(items) => items
            .into_iter()
            .map(list_text)
            .collect::<CliResult<Vec<_>>>()
            .map(|parts| parts.join(",")),
        other => Err(config_err(format!("expected a list, got {other}"))),
    }
}

impl ExperimentArgs {
    /// Fills every unset flag from the `--config` file, if any.
    fn merged(mut self) -> CliResult<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let file: FileConfig =
            toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let list = |v: Option<toml::Value>| v.map(list_text).transpose();
        self.data = self.data.or(file.data);
        self.task = self.task.or(file.task);
        self.policy = self.policy.or(list(file.policy)?);
        self.buffer_sizes = self.buffer_sizes.or(list(file.buffer_sizes)?);
        self.eta = self.eta.or(file.eta);
        self.radius = self.radius.or(file.radius);
        self.sigma = self.sigma.or(file.sigma);
        self.seeds = self.seeds.or(list(file.seeds)?);
        self.train_frac = self.train_frac.or(file.train_frac);
        self.train_cap = self.train_cap.or(file.train_cap);
        self.out = self.out.or(file.out);
        self.format = self.format.or(file.format);
        self.synth_pos = self.synth_pos.or(file.synth_pos);
        self.synth_neg = self.synth_neg.or(file.synth_neg);
        self.synth_dim = self.synth_dim.or(file.synth_dim);
        self.synth_sep = self.synth_sep.or(file.synth_sep);
        self.label_map = self.label_map.or(file.label_map);
        self.normalize = self.normalize.or(file.normalize);
        self.record_timing |= file.record_timing.unwrap_or(false);
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_pos: usize,
    pub n_neg: usize,
    pub dim: usize,
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Synth(SynthSpec),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub loss: LossKind,
    pub policies: Vec<Policy>,
    pub buffer_sizes: Vec<usize>,
    pub eta: f64,
    pub radius: f64,
    pub sigma: f64,
    pub seeds: Vec<u64>,
    pub split: SplitSpec,
    pub label_map: LabelMap,
    pub normalize: Normalization,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub record_timing: bool,
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| config_err(format!("bad {what} '{s}': {e}"))))
        .collect::<CliResult<Vec<T>>>()?;
    if items.is_empty() {
        return Err(config_err(format!("empty {what} list")));
    }
    Ok(items)
}

pub fn parse_seeds(text: &str) -> CliResult<Vec<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| config_err(format!("bad seed range: {e}")))?;
        let b: u64 = b.trim().parse().map_err(|e| config_err(format!("bad seed range: {e}")))?;
        if a >= b {
            return Err(config_err("empty seed range"));
        }
        return Ok((a..b).collect());
    }
    parse_list(text, "seed")
}

pub fn parse_label_map(text: &str) -> CliResult<LabelMap> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("threshold") {
        return Ok(LabelMap::Threshold);
    }
    let class = t
        .strip_prefix("ovr:")
        .ok_or_else(|| config_err(format!("unknown label map '{t}'")))?;
    class
        .parse()
        .map(LabelMap::OneVsRest)
        .map_err(|e| config_err(format!("bad class in label map: {e}")))
}

pub fn master_seed() -> CliResult<u64> {
    match std::env::var("PAIRSTREAM_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|e| config_err(format!("PAIRSTREAM_SEED='{v}': {e}"))),
        Err(_) => Ok(0),
    }
}

fn positive(v: f64, what: &str) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("{what} must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn resolve(args: ExperimentArgs) -> CliResult<Self> {
        let a = args.merged()?;
        let source = match a.data {
            Some(p) => DataSource::File(p),
            None => DataSource::Synth(SynthSpec {
                n_pos: a.synth_pos.unwrap_or(500),
                n_neg: a.synth_neg.unwrap_or(500),
                dim: a.synth_dim.unwrap_or(10),
                separation: a.synth_sep.unwrap_or(3.0),
            }),
        };
        let loss = match a.task.unwrap_or(Task::Auc) {
            Task::Auc => LossKind::AucHinge,
            Task::Metric => LossKind::MetricHinge,
        };
        let policies = parse_list::<Policy>(a.policy.as_deref().unwrap_or("rsx"), "policy")?;
        let buffer_sizes = parse_list::<usize>(a.buffer_sizes.as_deref().unwrap_or("64"), "buffer size")?;
        if buffer_sizes.contains(&0) {
            return Err(config_err("buffer sizes must be positive"));
        }
        let seeds = match a.seeds.as_deref() {
            Some(s) => parse_seeds(s)?,
            None => vec![master_seed()?],
        };
        let sigma = a.sigma.unwrap_or(0.0);
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(config_err("sigma must be nonnegative"));
        }
        let split = SplitSpec {
            train_fraction: a.train_frac.unwrap_or(0.6),
            train_cap: a.train_cap.unwrap_or(20_000),
            seed: 0,
        };
        if !(split.train_fraction > 0.0 && split.train_fraction < 1.0) {
            return Err(config_err("train-frac must be in (0, 1)"));
        }
        Ok(Self {
            source,
            loss,
            policies,
            buffer_sizes,
            eta: positive(a.eta.unwrap_or(1.0), "eta")?,
            radius: positive(a.radius.unwrap_or(1.0), "radius")?,
            sigma,
            seeds,
            split,
            label_map: a.label_map.as_deref().map(parse_label_map).transpose()?.unwrap_or_default(),
            normalize: a
                .normalize
                .as_deref()
                .unwrap_or("unit-l2")
                .parse()
                .map_err(config_err)?,
            out: a.out,
            format: a.format.unwrap_or_default(),
            record_timing: a.record_timing,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_lists_and_ranges() {
        assert_eq!(parse_seeds("3").unwrap(), vec![3]);
        assert_eq!(parse_seeds("1, 5,2").unwrap(), vec![1, 5, 2]);
        assert_eq!(parse_seeds("0..4").unwrap(), vec![0, 1, 2, 3]);
        assert!(parse_seeds("4..4").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn label_maps() {
        assert_eq!(parse_label_map("threshold").unwrap(), LabelMap::Threshold);
        assert_eq!(parse_label_map("ovr:3").unwrap(), LabelMap::OneVsRest(3.0));
        assert!(parse_label_map("other").is_err());
    }

    #[test]
    fn file_values_fill_unset_flags_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        std::fs::write(&path, "policy = [\"rs\", \"rsx\"]\nbuffer-sizes = [16, 64]\neta = 0.5\nseeds = \"0..3\"\n").unwrap();
        let args = ExperimentArgs {
            config: Some(path),
            eta: Some(2.0),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(args).unwrap();
        assert_eq!(cfg.policies, vec![Policy::Rs, Policy::Rsx]);
        assert_eq!(cfg.buffer_sizes, vec![16, 64]);
        assert_eq!(cfg.seeds, vec![0, 1, 2]);
        assert_eq!(cfg.eta, 2.0);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "bogus = 1\n").unwrap();
        let args = ExperimentArgs {
            config: Some(path),
            ..Default::default()
        };
        assert!(matches!(ExperimentConfig::resolve(args), Err(crate::CliError::Config(_))));
    }
}
