//! Dataset ingestion (LIBSVM text), synthetic tasks, splitting and normalization.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::types::{Dataset, LabeledPoint};

/// How raw labels become `{-1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum LabelMap {
    /// `> 0` maps to `+1`, everything else to `-1`. Files with more than two
    /// distinct labels are rejected.
    #[default]
    Threshold,
    /// The given class is `+1`, all others `-1`.
    OneVsRest(f64),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseOptions {
    pub label_map: LabelMap,
    pub name: String,
}

/// Parses `<label> <index>:<value> ...` lines. Indices are 1-based and strictly
/// ascending, missing indices are zero, and `#` starts a comment.
pub fn parse_libsvm(text: &str, options: &ParseOptions) -> Result<Dataset> {
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut distinct = BTreeSet::new();
    let mut dim = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_ascii_whitespace();
        let label_tok = tokens.next().expect("nonempty line");
        let raw_label: f64 = label_tok
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| err(format!("invalid label '{label_tok}'")))?;

        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("malformed feature '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| err(format!("invalid index in '{tok}'")))?;
            let val: f64 = val
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| err(format!("invalid value in '{tok}'")))?;
            if idx <= last {
                return Err(err(format!("index {idx} not ascending (previous {last})")));
            }
            last = idx;
            entries.push((idx, val));
        }
        dim = dim.max(last);

        if options.label_map == LabelMap::Threshold {
            distinct.insert(raw_label.to_bits());
            if distinct.len() > 2 {
                return Err(err(format!(
                    "more than two distinct labels (at '{label_tok}'); pass a one-vs-rest class"
                )));
            }
        }
        rows.push((raw_label, entries));
    }

    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dimension = dim.max(1);
    let points = rows
        .into_iter()
        .map(|(raw, entries)| {
            let mut x = vec![0.0; dimension];
            for (i, v) in entries {
                x[i - 1] = v;
            }
            let y = match options.label_map {
                LabelMap::Threshold => {
                    if raw > 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                LabelMap::OneVsRest(class) => {
                    if raw == class {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            LabeledPoint { features: x, label: y }
        })
        .collect();
    Dataset::new(options.name.clone(), dimension, points)
}

pub fn read_libsvm(path: &Path, label_map: LabelMap) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_libsvm(&text, &ParseOptions { label_map, name })
}

/// Writes nonzero entries only; the last coordinate is written explicitly on the
/// first line so the dimension survives a round trip.
pub fn write_libsvm(dataset: &Dataset) -> String {
    let mut out = String::new();
    let d = dataset.dimension;
    for (row, p) in dataset.points.iter().enumerate() {
        let _ = write!(out, "{}", if p.label > 0.0 { "+1" } else { "-1" });
        for (i, &v) in p.features.iter().enumerate() {
            if v != 0.0 || (row == 0 && i + 1 == d) {
                let _ = write!(out, " {}:{v:?}", i + 1);
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub train_cap: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.6,
            train_cap: 20_000,
            seed: 0,
        }
    }
}

/// Shuffled train/test split; train gets `min(floor(fraction * m), cap)` points.
pub fn split(dataset: &Dataset, spec: &SplitSpec, rng: &mut RandomSource) -> Result<(Dataset, Dataset)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0) {
        return Err(Error::invalid("train fraction must be in (0, 1]"));
    }
    if spec.train_cap == 0 {
        return Err(Error::invalid("train cap must be positive"));
    }
    let m = dataset.len();
    if m < 2 {
        return Err(Error::StreamTooShort { need: 2, got: m });
    }
    let train_len = ((spec.train_fraction * m as f64).floor() as usize).min(spec.train_cap);
    if train_len == 0 || train_len == m {
        return Err(Error::invalid(format!(
            "split of {m} points leaves an empty side (train = {train_len})"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    rng.shuffle(&mut order);
    let pick = |idx: &[usize]| idx.iter().map(|&i| dataset.points[i].clone()).collect();
    let train = Dataset::new(format!("{}-train", dataset.name), dataset.dimension, pick(&order[..train_len]))?;
    let test = Dataset::new(format!("{}-test", dataset.name), dataset.dimension, pick(&order[train_len..]))?;
    Ok((train, test))
}

/// Positives from `N(+mu, I)`, negatives from `N(-mu, I)`, `mu = (separation / 2) e_1`.
/// Positives come first; shuffle with [`crate::make_stream`].
pub fn synth_gaussian(
    n_pos: usize,
    n_neg: usize,
    dim: usize,
    separation: f64,
    rng: &mut RandomSource,
) -> Result<Dataset> {
    if n_pos == 0 || n_neg == 0 || dim == 0 {
        return Err(Error::invalid("synthetic task needs both classes and d >= 1"));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::invalid("separation must be nonnegative"));
    }
    let shift = separation / 2.0;
    let mut points = Vec::with_capacity(n_pos + n_neg);
    for (count, label) in [(n_pos, 1.0), (n_neg, -1.0)] {
        for _ in 0..count {
            let mut x: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            x[0] += label * shift;
            points.push(LabeledPoint { features: x, label });
        }
    }
    Dataset::new("synth", dim, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Normalization {
    #[default]
    UnitL2,
    None,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unit-l2" | "l2" => Ok(Self::UnitL2),
            "none" => Ok(Self::None),
            _ => Err(Error::invalid(format!("unknown normalization '{s}'"))),
        }
    }
}

pub fn normalize_features(dataset: &Dataset, mode: Normalization) -> Dataset {
    let mut out = dataset.clone();
    if mode == Normalization::UnitL2 {
        for p in &mut out.points {
            let n = p.norm();
            if n > 0.0 {
                p.features.iter_mut().for_each(|v| *v /= n);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub name: String,
    pub points: usize,
    pub dimension: usize,
    pub positives: usize,
    pub negatives: usize,
    pub max_l2_norm: f64,
    pub nonzeros: usize,
}

pub fn dataset_stats(dataset: &Dataset) -> DatasetStats {
    let (positives, negatives) = dataset.class_counts();
    DatasetStats {
        name: dataset.name.clone(),
        points: dataset.len(),
        dimension: dataset.dimension,
        positives,
        negatives,
        max_l2_norm: dataset.max_norm(),
        nonzeros: dataset
            .points
            .iter()
            .map(|p| p.features.iter().filter(|&&v| v != 0.0).count())
            .sum(),
    }
}
