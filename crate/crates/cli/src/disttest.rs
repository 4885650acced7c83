//! `disttest`: Monte-Carlo checks of a buffer policy against its sampling law.

use std::path::PathBuf;

use clap::Args;
use pairstream::sampling::dist::{
    chi_square, chi_square_uniform, frequencies, pooled_counts, replacement_pattern_counts, replacement_pattern_law,
    slot_marginal_counts, slot_pair_joint_counts, total_variation,
};
use pairstream::{Policy, RandomSource};
use serde::Serialize;

use crate::output::{emit, render, Format};
use crate::{config_err, runtime, CliError, CliResult};

const ALPHA: f64 = 1e-3;
const TV_LIMIT: f64 = 0.01;
const PATTERN_LIMIT: f64 = 0.005;
const MAX_PATTERN_SLOTS: usize = 10;

#[derive(Debug, Clone, Args)]
pub struct DisttestArgs {
    #[arg(long)]
    pub policy: Policy,
    /// Buffer capacity.
    #[arg(short, long)]
    pub s: usize,
    /// Marginals are read off the buffer that stream element `stream_len` would see.
    #[arg(long, default_value_t = 20)]
    pub stream_len: usize,
    #[arg(long, default_value_t = 200_000)]
    pub trials: usize,
    #[arg(long, env = "PAIRSTREAM_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Per-slot histogram of the final buffers: slot, stream_index, count.
    #[arg(long)]
    pub hist_out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestRow {
    pub test: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistRow {
    pub slot: usize,
    pub stream_index: usize,
    pub count: u64,
}

fn at_most(test: String, statistic: f64, threshold: f64) -> TestRow {
    TestRow {
        test,
        statistic,
        threshold,
        pass: statistic <= threshold,
    }
}

fn chi_row(test: String, t: pairstream::sampling::dist::ChiSquareTest) -> TestRow {
    let threshold = t.critical_value(ALPHA);
    TestRow {
        test,
        statistic: t.statistic,
        threshold,
        pass: t.p_value >= ALPHA,
    }
}

/// RS slot `j` after `steps` updates holds its original element `j + 1` with
/// probability `s / steps`, any later element with probability `1 / steps`.
fn rs_slot_law(s: usize, steps: usize, slot: usize) -> Vec<f64> {
    (1..=steps)
        .map(|e| {
            if e == slot + 1 {
                s as f64 / steps as f64
            } else if e <= s {
                0.0
            } else {
                1.0 / steps as f64
            }
        })
        .collect()
}

pub fn run_tests(
    policy: Policy,
    s: usize,
    stream_len: usize,
    trials: usize,
    seed: u64,
) -> CliResult<(Vec<TestRow>, Vec<HistRow>)> {
    if trials < 10_000 {
        return Err(config_err("disttest needs at least 10^4 trials"));
    }
    if s == 0 {
        return Err(config_err("buffer size must be positive"));
    }
    let steps = stream_len.saturating_sub(1);
    let mut rng = RandomSource::new(seed);
    let marg = slot_marginal_counts(policy, s, steps, trials, &mut rng).map_err(runtime)?;
    let hist = marg
        .iter()
        .enumerate()
        .flat_map(|(slot, row)| {
            row.iter().enumerate().map(move |(i, &count)| HistRow {
                slot,
                stream_index: i + 1,
                count,
            })
        })
        .collect();

    let mut rows = Vec::new();
    match policy {
        Policy::Fifo => {
            if steps < s {
                return Err(config_err("stream too short to fill the buffer"));
            }
            let misplaced: u64 = marg
                .iter()
                .enumerate()
                .map(|(j, row)| trials as u64 - row[steps - s + j])
                .sum();
            rows.push(at_most("fifo-suffix".into(), misplaced as f64, 0.0));
        }
        Policy::Rs => {
            if steps <= s {
                return Err(config_err("stream too short: need stream-len > s + 1"));
            }
            for (j, row) in marg.iter().enumerate() {
                let t = chi_square(row, &rs_slot_law(s, steps, j)).map_err(runtime)?;
                rows.push(chi_row(format!("marginal-slot-{j}"), t));
            }
            let pooled = frequencies(&pooled_counts(&marg));
            let uniform = vec![1.0 / steps as f64; steps];
            rows.push(at_most("pooled-tv".into(), total_variation(&pooled, &uniform), TV_LIMIT));
        }
        Policy::Rsx | Policy::Rsx2 => {
            if steps <= s {
                return Err(config_err("stream too short: need stream-len > s + 1"));
            }
            for (j, row) in marg.iter().enumerate() {
                let t = chi_square_uniform(row).map_err(runtime)?;
                rows.push(chi_row(format!("marginal-slot-{j}"), t));
            }
            if s >= 2 {
                // Small t keeps the joint table at (s + 1)^2 cells.
                let small = s + 1;
                let joint = slot_pair_joint_counts(policy, s, small, trials, (0, 1), &mut rng).map_err(runtime)?;
                let flat: Vec<u64> = joint.into_iter().flatten().collect();
                let product = vec![1.0 / (small * small) as f64; small * small];
                rows.push(at_most(
                    "joint-slots-0-1-tv".into(),
                    total_variation(&frequencies(&flat), &product),
                    TV_LIMIT,
                ));
            }
            if s <= MAX_PATTERN_SLOTS {
                let t = s + 2;
                let law = replacement_pattern_law(s, t).map_err(runtime)?;
                let own = frequencies(&replacement_pattern_counts(policy, s, t, trials, &mut rng).map_err(runtime)?);
                let other_policy = if policy == Policy::Rsx { Policy::Rsx2 } else { Policy::Rsx };
                let other =
                    frequencies(&replacement_pattern_counts(other_policy, s, t, trials, &mut rng).map_err(runtime)?);
                let max_dev = own.iter().zip(&law).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                rows.push(at_most("pattern-law-max-dev".into(), max_dev, PATTERN_LIMIT));
                rows.push(at_most(
                    format!("pattern-vs-{}-tv", other_policy.name()),
                    total_variation(&own, &other),
                    PATTERN_LIMIT,
                ));
            }
        }
    }
    Ok((rows, hist))
}

pub fn cmd_disttest(args: DisttestArgs) -> CliResult<()> {
    let (rows, hist) = run_tests(args.policy, args.s, args.stream_len, args.trials, args.seed)?;
    emit(&render(&rows, args.format)?, args.out.as_deref())?;
    if let Some(path) = &args.hist_out {
        emit(&render(&hist, Format::Csv)?, Some(path))?;
    }
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.test.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("failed: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rs_slot_law_sums_to_one() {
        for slot in 0..3 {
            let law = rs_slot_law(3, 20, slot);
            assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fifo_passes_trivially() {
        let (rows, hist) = run_tests(Policy::Fifo, 3, 10, 10_000, 0).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].pass);
        assert_eq!(hist.len(), 3 * 9);
    }

    #[test]
    fn too_few_trials() {
        assert!(matches!(run_tests(Policy::Rsx, 2, 10, 100, 0), Err(CliError::Config(_))));
    }
}
