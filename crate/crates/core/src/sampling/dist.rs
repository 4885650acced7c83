//! Monte-Carlo helpers for checking the laws the buffer policies are meant to obey.
//!
//! Simulations run at index level: stream element `t` (1-based) is represented by
//! the integer `t`, so counts are indexed by `t - 1`.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{Buffer, Policy};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Runs `trials` independent buffers over the stream `1..=steps` and hands each
/// final slot vector to `visit`.
pub fn simulate_final_buffers(
    policy: Policy,
    capacity: usize,
    steps: usize,
    trials: usize,
    rng: &mut RandomSource,
    mut visit: impl FnMut(&[usize]),
) -> Result<()> {
    let mut slots = Vec::with_capacity(capacity);
    for _ in 0..trials {
        let mut buf = Buffer::new(capacity, policy)?;
        for t in 1..=steps {
            buf.update(t, t, rng)?;
        }
        slots.clear();
        slots.extend(buf.iter().copied());
        visit(&slots);
    }
    Ok(())
}

/// `counts[slot][t - 1]`: how often each slot held stream element `t` after `steps` updates.
pub fn slot_marginal_counts(
    policy: Policy,
    capacity: usize,
    steps: usize,
    trials: usize,
    rng: &mut RandomSource,
) -> Result<Vec<Vec<u64>>> {
    let mut counts = vec![vec![0u64; steps]; capacity.min(steps)];
    simulate_final_buffers(policy, capacity, steps, trials, rng, |slots| {
        for (j, &t) in slots.iter().enumerate() {
            counts[j][t - 1] += 1;
        }
    })?;
    Ok(counts)
}

/// Slot counts summed over slots: `counts[t - 1]` is how often element `t` was buffered.
pub fn pooled_counts(marginals: &[Vec<u64>]) -> Vec<u64> {
    let width = marginals.first().map_or(0, Vec::len);
    (0..width)
        .map(|i| marginals.iter().map(|row| row[i]).sum())
        .collect()
}

/// Joint counts of slots `a` and `b`: `joint[ta - 1][tb - 1]`.
pub fn slot_pair_joint_counts(
    policy: Policy,
    capacity: usize,
    steps: usize,
    trials: usize,
    slots: (usize, usize),
    rng: &mut RandomSource,
) -> Result<Vec<Vec<u64>>> {
    let (a, b) = slots;
    if a >= capacity || b >= capacity || a == b {
        return Err(Error::invalid(format!("bad slot pair ({a}, {b}) for capacity {capacity}")));
    }
    if steps < capacity {
        return Err(Error::invalid("joint test needs a full buffer"));
    }
    let mut joint = vec![vec![0u64; steps]; steps];
    simulate_final_buffers(policy, capacity, steps, trials, rng, |s| {
        joint[s[a] - 1][s[b] - 1] += 1;
    })?;
    Ok(joint)
}

/// Histogram over the `2^s` replacement patterns of the update at step `t`, after the
/// buffer has processed `1..t`. Bit `j` of the pattern index is set iff slot `j`
/// received element `t`.
pub fn replacement_pattern_counts(
    policy: Policy,
    capacity: usize,
    t: usize,
    trials: usize,
    rng: &mut RandomSource,
) -> Result<Vec<u64>> {
    if !matches!(policy, Policy::Rsx | Policy::Rsx2) {
        return Err(Error::invalid("pattern law applies to RSX and RSX2"));
    }
    if t < capacity + 2 {
        return Err(Error::invalid("pattern law applies to normal steps (t >= s + 2)"));
    }
    if capacity > 20 {
        return Err(Error::invalid("too many patterns to tabulate"));
    }
    let mut counts = vec![0u64; 1 << capacity];
    for _ in 0..trials {
        let mut buf = Buffer::new(capacity, policy)?;
        for step in 1..t {
            buf.update(step, step, rng)?;
        }
        let trace = buf.update(t, t, rng)?;
        let pattern = trace.replaced_slots().iter().fold(0usize, |acc, &j| acc | (1 << j));
        counts[pattern] += 1;
    }
    Ok(counts)
}

/// Exact pattern law as a vector aligned with [`replacement_pattern_counts`].
pub fn replacement_pattern_law(capacity: usize, t: usize) -> Result<Vec<f64>> {
    (0..1usize << capacity)
        .map(|pattern| super::replacement_pattern_probability(capacity, t, pattern.count_ones() as usize))
        .collect()
}

pub fn frequencies(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Total variation distance `0.5 * sum |p_i - q_i|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distribution supports differ");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    /// Statistic value at which the p-value equals `alpha`.
    pub fn critical_value(&self, alpha: f64) -> f64 {
        ChiSquared::new(self.dof as f64)
            .map(|d| d.inverse_cdf(1.0 - alpha))
            .unwrap_or(f64::NAN)
    }
}

/// Pearson goodness-of-fit of `counts` against the given cell probabilities.
pub fn chi_square(counts: &[u64], expected_probs: &[f64]) -> Result<ChiSquareTest> {
    if counts.len() != expected_probs.len() || counts.len() < 2 {
        return Err(Error::invalid("chi-square needs at least two matching cells"));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::invalid("chi-square on zero observations"));
    }
    let n = total as f64;
    let mut statistic = 0.0;
    for (&c, &p) in counts.iter().zip(expected_probs) {
        if p <= 0.0 {
            if c > 0 {
                statistic = f64::INFINITY;
            }
            continue;
        }
        let e = n * p;
        statistic += (c as f64 - e).powi(2) / e;
    }
    let dof = expected_probs.iter().filter(|&&p| p > 0.0).count() - 1;
    let p_value = if statistic.is_finite() {
        let dist = ChiSquared::new(dof as f64).map_err(|e| Error::invalid(e.to_string()))?;
        1.0 - dist.cdf(statistic)
    } else {
        0.0
    };
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value,
    })
}

/// Chi-square against the uniform law on `counts.len()` cells.
pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquareTest> {
    let k = counts.len();
    chi_square(counts, &vec![1.0 / k as f64; k])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_basics() {
        assert_eq!(total_variation(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert!((total_variation(&[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!((total_variation(&[0.2, 0.8], &[0.5, 0.5]) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn chi_square_perfect_fit() {
        let t = chi_square_uniform(&[100, 100, 100, 100]).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 3);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_known_value() {
        // (60-50)^2/50 + (40-50)^2/50 = 4 on 1 dof; P(X > 4) = 0.0455003...
        let t = chi_square_uniform(&[60, 40]).unwrap();
        assert!((t.statistic - 4.0).abs() < 1e-12);
        assert!((t.p_value - 0.045_500_263_896_358_57).abs() < 1e-9);
        assert!((t.critical_value(t.p_value) - 4.0).abs() < 1e-6);
    }

    #[test]
    fn chi_square_impossible_cell() {
        let t = chi_square(&[5, 1], &[1.0, 0.0]).unwrap();
        assert_eq!(t.p_value, 0.0);
    }

    #[test]
    fn fifo_final_buffer_is_suffix() {
        let mut rng = RandomSource::new(0);
        simulate_final_buffers(Policy::Fifo, 3, 10, 5, &mut rng, |s| assert_eq!(s, &[8, 9, 10]))
            .unwrap();
    }

    #[test]
    fn pattern_law_sums_to_one() {
        let law = replacement_pattern_law(4, 9).unwrap();
        assert_eq!(law.len(), 16);
        assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pattern_counts_reject_bad_inputs() {
        let mut rng = RandomSource::new(0);
        assert!(replacement_pattern_counts(Policy::Rs, 3, 5, 10, &mut rng).is_err());
        assert!(replacement_pattern_counts(Policy::Rsx, 3, 4, 10, &mut rng).is_err());
    }
}
