//! AUC scoring, regret accounting and online-to-batch risk reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{all_pairs_objective, average_hypothesis, EnsembleTrace};
use crate::losses::{all_pairs_penalty, buffer_penalty, expected_risk, PairwiseLoss};
use crate::types::{Hypothesis, LabeledPoint, TaskKind};

/// Fraction of (positive, negative) pairs ordered correctly by `w.x`, ties counting 1/2.
///
/// Computed from average ranks (Mann–Whitney), `O(m log m)`.
pub fn auc_score(h: &Hypothesis, test: &[LabeledPoint]) -> Result<f64> {
    if h.task != TaskKind::AucLinear {
        return Err(Error::invalid("AUC needs a linear scorer"));
    }
    let mut scored: Vec<(f64, bool)> = Vec::with_capacity(test.len());
    for p in test {
        if p.dim() != h.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: h.weights.len(),
                actual: p.dim(),
            });
        }
        scored.push((h.score(&p.features), p.is_positive()));
    }
    let n_pos = scored.iter().filter(|s| s.1).count();
    let n_neg = scored.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::AucUndefined);
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Ranks are 1-based; a tie group spanning ranks i+1..=j gets (i + 1 + j) / 2.
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < scored.len() {
        let mut j = i + 1;
        while j < scored.len() && scored[j].0 == scored[i].0 {
            j += 1;
        }
        let rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = scored[i..j].iter().filter(|s| s.1).count();
        pos_rank_sum += rank * pos_in_group as f64;
        i = j;
    }
    let p = n_pos as f64;
    Ok((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n_neg as f64))
}

fn check_lengths(trace: &EnsembleTrace, stream: &[LabeledPoint]) -> Result<()> {
    if stream.len() < 2 || trace.len() + 1 != stream.len() {
        return Err(Error::LengthMismatch(format!(
            "trace has {} hypotheses for a stream of {} points",
            trace.len(),
            stream.len()
        )));
    }
    Ok(())
}

/// `sum_{t=2}^{n} L_t(h_{t-1})` over the ensemble.
pub fn ensemble_all_pairs_loss(
    trace: &EnsembleTrace,
    stream: &[LabeledPoint],
    loss: &PairwiseLoss,
) -> Result<f64> {
    check_lengths(trace, stream)?;
    trace
        .hypotheses
        .iter()
        .enumerate()
        .map(|(i, h)| all_pairs_penalty(loss, h, &stream[i + 1], &stream[..=i]))
        .sum()
}

/// All-pairs regret of the ensemble against a fixed reference hypothesis.
pub fn all_pairs_regret(
    trace: &EnsembleTrace,
    stream: &[LabeledPoint],
    loss: &PairwiseLoss,
    reference: &Hypothesis,
) -> Result<f64> {
    check_lengths(trace, stream)?;
    let mut total = 0.0;
    for (i, h) in trace.hypotheses.iter().enumerate() {
        let (z_t, prefix) = (&stream[i + 1], &stream[..=i]);
        total += all_pairs_penalty(loss, h, z_t, prefix)? - all_pairs_penalty(loss, reference, z_t, prefix)?;
    }
    Ok(total)
}

/// Finite-buffer regret, evaluated on the buffer states recorded in the trace.
pub fn finite_buffer_regret(
    trace: &EnsembleTrace,
    stream: &[LabeledPoint],
    loss: &PairwiseLoss,
    reference: &Hypothesis,
) -> Result<f64> {
    check_lengths(trace, stream)?;
    let snapshots = trace.snapshots.as_ref().ok_or(Error::MissingSnapshots)?;
    if snapshots.len() != trace.len() {
        return Err(Error::LengthMismatch(format!(
            "{} snapshots for {} hypotheses",
            snapshots.len(),
            trace.len()
        )));
    }
    let mut total = 0.0;
    for (i, (h, snap)) in trace.hypotheses.iter().zip(snapshots).enumerate() {
        let z_t = &stream[i + 1];
        if let Some(&bad) = snap.iter().find(|&&j| j > i) {
            return Err(Error::invalid(format!("snapshot at step {} holds future index {bad}", i + 2)));
        }
        let buf = || snap.iter().map(|&j| &stream[j]);
        total += buffer_penalty(loss, h, z_t, buf())? - buffer_penalty(loss, reference, z_t, buf())?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub all_pairs_regret: f64,
    pub finite_buffer_regret: f64,
    /// `all_pairs_regret / (n - 1)`.
    pub per_step_all_pairs: f64,
    /// `sum_t L_t(reference)`.
    pub reference_objective: f64,
    pub n: usize,
    pub s: usize,
}

pub fn regret_report(
    trace: &EnsembleTrace,
    stream: &[LabeledPoint],
    loss: &PairwiseLoss,
    reference: &Hypothesis,
    capacity: usize,
) -> Result<RegretReport> {
    let reference_objective = all_pairs_objective(reference, stream, loss)?;
    let all_pairs = all_pairs_regret(trace, stream, loss, reference)?;
    let finite = finite_buffer_regret(trace, stream, loss, reference)?;
    let n = stream.len();
    Ok(RegretReport {
        all_pairs_regret: all_pairs,
        finite_buffer_regret: finite,
        per_step_all_pairs: all_pairs / (n - 1) as f64,
        reference_objective,
        n,
        s: capacity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnlineToBatch {
    /// Mean holdout risk of the ensemble members.
    pub ensemble_avg_risk: f64,
    /// Holdout risk of the averaged hypothesis.
    pub avg_hyp_risk: f64,
    /// Holdout risk of the best single member (selected on the same holdout).
    pub best_hyp_risk: f64,
    pub best_index: usize,
}

pub fn online_to_batch_report(
    trace: &EnsembleTrace,
    holdout: &[LabeledPoint],
    loss: &PairwiseLoss,
) -> Result<OnlineToBatch> {
    if holdout.len() < 2 {
        return Err(Error::StreamTooShort {
            need: 2,
            got: holdout.len(),
        });
    }
    let risks = trace
        .hypotheses
        .iter()
        .map(|h| expected_risk(loss, h, holdout))
        .collect::<Result<Vec<_>>>()?;
    let avg = average_hypothesis(trace)?;
    let (best_index, best_hyp_risk) = risks
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, r)| if r < best.1 { (i, r) } else { best });
    Ok(OnlineToBatch {
        ensemble_avg_risk: risks.iter().sum::<f64>() / risks.len() as f64,
        avg_hyp_risk: expected_risk(loss, &avg, holdout)?,
        best_hyp_risk,
        best_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: &[f64], y: f64) -> LabeledPoint {
        LabeledPoint::new(x.to_vec(), y).unwrap()
    }

    fn lin(w: &[f64]) -> Hypothesis {
        Hypothesis::new(w.to_vec(), TaskKind::AucLinear).unwrap()
    }

    #[test]
    fn auc_examples() {
        // scores equal the single feature under w = 1
        let test = [pt(&[0.9], 1.0), pt(&[0.4], 1.0), pt(&[0.5], -1.0), pt(&[0.1], -1.0)];
        assert_eq!(auc_score(&lin(&[1.0]), &test).unwrap(), 0.75);
        assert_eq!(auc_score(&lin(&[0.0]), &test).unwrap(), 0.5);
        let sep = [pt(&[1.0], 1.0), pt(&[2.0], 1.0), pt(&[-1.0], -1.0)];
        assert_eq!(auc_score(&lin(&[1.0]), &sep).unwrap(), 1.0);
        assert_eq!(auc_score(&lin(&[1.0]), &sep[..2]), Err(Error::AucUndefined));
    }

    #[test]
    fn regret_against_itself_is_zero() {
        let stream = [pt(&[0.1], 1.0), pt(&[0.5], -1.0), pt(&[-0.2], 1.0), pt(&[0.3], -1.0)];
        let h = lin(&[0.4]);
        let trace = EnsembleTrace {
            hypotheses: vec![h.clone(); 3],
            buffer_penalties: vec![0.0; 3],
            snapshots: Some(vec![vec![0], vec![0, 1], vec![1, 2]]),
        };
        let loss = PairwiseLoss::auc(0.0);
        assert_eq!(all_pairs_regret(&trace, &stream, &loss, &h).unwrap(), 0.0);
        assert_eq!(finite_buffer_regret(&trace, &stream, &loss, &h).unwrap(), 0.0);
    }

    #[test]
    fn three_point_regret_by_hand() {
        // z1 = (0, -1), z2 = (1, +1), z3 = (0.5, -1); trace h1 = 0, h2 = 1; reference 2.
        let stream = [pt(&[0.0], -1.0), pt(&[1.0], 1.0), pt(&[0.5], -1.0)];
        let trace = EnsembleTrace {
            hypotheses: vec![lin(&[0.0]), lin(&[1.0])],
            buffer_penalties: vec![0.0; 2],
            snapshots: None,
        };
        let loss = PairwiseLoss::auc(0.0);
        // online: t=2: hinge(0) = 1; t=3: (0 + hinge(1 - 0.5)) / 2 = (0 + 0.5)/2 = 0.25
        // reference w=2: t=2: hinge(2) = 0; t=3: (0 + hinge(2*(1-0.5)=1)) / 2 = 0
        let r = all_pairs_regret(&trace, &stream, &loss, &lin(&[2.0])).unwrap();
        assert!((r - 1.25).abs() < 1e-15);
        assert_eq!(
            finite_buffer_regret(&trace, &stream, &loss, &lin(&[2.0])),
            Err(Error::MissingSnapshots)
        );
    }

    #[test]
    fn length_mismatch() {
        let stream = [pt(&[0.0], -1.0), pt(&[1.0], 1.0)];
        let trace = EnsembleTrace {
            hypotheses: vec![lin(&[0.0]); 2],
            buffer_penalties: vec![0.0; 2],
            snapshots: None,
        };
        assert!(matches!(
            all_pairs_regret(&trace, &stream, &PairwiseLoss::auc(0.0), &lin(&[0.0])),
            Err(Error::LengthMismatch(_))
        ));
    }

    #[test]
    fn online_to_batch_toy() {
        let holdout = [pt(&[1.0], 1.0), pt(&[-1.0], -1.0)];
        let loss = PairwiseLoss::auc(0.0);
        let trace = EnsembleTrace {
            hypotheses: vec![lin(&[0.0]), lin(&[1.0])],
            buffer_penalties: vec![0.0; 2],
            snapshots: None,
        };
        // risks: w=0 -> 1; w=1 -> margin 2 -> 0; average w=0.5 -> margin 1 -> 0.
        let r = online_to_batch_report(&trace, &holdout, &loss).unwrap();
        assert_eq!(r.ensemble_avg_risk, 0.5);
        assert_eq!(r.avg_hyp_risk, 0.0);
        assert_eq!(r.best_hyp_risk, 0.0);
        assert_eq!(r.best_index, 1);

        let constant = EnsembleTrace {
            hypotheses: vec![lin(&[0.3]); 4],
            buffer_penalties: vec![0.0; 4],
            snapshots: None,
        };
        let r = online_to_batch_report(&constant, &holdout, &loss).unwrap();
        assert_eq!(r.ensemble_avg_risk, r.avg_hyp_risk);
    }
}
