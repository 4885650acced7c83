//! The OLP online learner, ensemble selection, and a batch reference minimizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm};
use crate::losses::{expected_risk, LossKind, PairwiseLoss};
use crate::rng::RandomSource;
use crate::sampling::{Buffer, Policy};
use crate::types::{Hypothesis, LabeledPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Step scale; step `t` uses `eta / sqrt(t)`.
    pub eta: f64,
    pub capacity: usize,
    pub policy: Policy,
    /// Hypotheses are projected onto the Euclidean ball of this radius.
    pub radius: f64,
    pub loss: PairwiseLoss,
    pub dimension: usize,
    /// Record the buffer contents (stream indices) used at every step.
    pub keep_snapshots: bool,
}

impl LearnerConfig {
    pub fn new(loss: PairwiseLoss, dimension: usize, capacity: usize, policy: Policy) -> Self {
        Self {
            eta: 1.0,
            capacity,
            policy,
            radius: 1.0,
            loss,
            dimension,
            keep_snapshots: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid("eta must be positive"));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::invalid("radius must be positive"));
        }
        if self.capacity == 0 || self.dimension == 0 {
            return Err(Error::invalid("capacity and dimension must be positive"));
        }
        if !(self.loss.sigma >= 0.0 && self.loss.sigma.is_finite()) {
            return Err(Error::invalid("sigma must be nonnegative"));
        }
        Ok(())
    }

    pub fn step_size(&self, t: usize) -> f64 {
        self.eta / (t as f64).sqrt()
    }
}

/// The ensemble `h_1 .. h_{n-1}` of one run. Entry `i` belongs to step `t = i + 2`:
/// `hypotheses[i]` is `h_{t-1}`, charged `buffer_penalties[i]` on `z_t` against the
/// buffer `snapshots[i]` (0-based stream indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleTrace {
    pub hypotheses: Vec<Hypothesis>,
    pub buffer_penalties: Vec<f64>,
    pub snapshots: Option<Vec<Vec<usize>>>,
}

impl EnsembleTrace {
    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }
}

pub fn project_l2_ball(w: &[f64], radius: f64) -> Vec<f64> {
    let mut v = w.to_vec();
    project_in_place(&mut v, radius);
    v
}

fn project_in_place(w: &mut [f64], radius: f64) {
    let n = norm(w);
    if n > radius {
        w.iter_mut().for_each(|x| *x = *x * radius / n);
    }
}

fn check_stream(stream: &[LabeledPoint], dimension: usize) -> Result<()> {
    for p in stream {
        if p.dim() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                actual: p.dim(),
            });
        }
        if p.label != 1.0 && p.label != -1.0 {
            return Err(Error::InvalidLabel(p.label));
        }
    }
    Ok(())
}

/// Runs OLP over `stream`.
///
/// Starting from `w_0 = 0`, each step `t >= 2` records `h_{t-1} = w_{t-1}` with its
/// buffer penalty, then takes the projected descent step
/// `w_t = P[w_{t-1} - eta_t / |B| * sum_{z in B} g(w_{t-1}, z_t, z)]`,
/// and only afterwards offers `z_t` to the buffer. Step 1 just fills the buffer.
pub fn olp_run(
    stream: &[LabeledPoint],
    config: &LearnerConfig,
    rng: &mut RandomSource,
) -> Result<EnsembleTrace> {
    config.validate()?;
    let n = stream.len();
    if n < 2 {
        return Err(Error::StreamTooShort { need: 2, got: n });
    }
    check_stream(stream, config.dimension)?;

    let loss = &config.loss;
    let mut w = vec![0.0; loss.task().weight_len(config.dimension)];
    let mut grad = vec![0.0; w.len()];
    let mut buffer: Buffer<usize> = Buffer::new(config.capacity, config.policy)?;
    let mut hypotheses = Vec::with_capacity(n - 1);
    let mut penalties = Vec::with_capacity(n - 1);
    let mut snapshots = config.keep_snapshots.then(|| Vec::with_capacity(n - 1));

    for (i, z_t) in stream.iter().enumerate() {
        let t = i + 1;
        if t >= 2 {
            let inv = 1.0 / buffer.len() as f64;
            let mut penalty = 0.0;
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &j in buffer.iter() {
                penalty += loss.loss_unchecked(&w, z_t, &stream[j]);
                loss.add_subgradient(&w, z_t, &stream[j], inv, &mut grad);
            }
            hypotheses.push(Hypothesis {
                weights: w.clone(),
                task: loss.task(),
            });
            penalties.push(penalty * inv);
            if let Some(s) = snapshots.as_mut() {
                s.push(buffer.to_vec());
            }
            axpy(-config.step_size(t), &grad, &mut w);
            project_in_place(&mut w, config.radius);
        }
        buffer.update(i, t, rng)?;
    }

    Ok(EnsembleTrace {
        hypotheses,
        buffer_penalties: penalties,
        snapshots,
    })
}

/// Coordinate-wise mean of the ensemble.
pub fn average_hypothesis(trace: &EnsembleTrace) -> Result<Hypothesis> {
    let first = trace.hypotheses.first().ok_or(Error::EmptyTrace)?;
    let mut acc = vec![0.0; first.weights.len()];
    for h in &trace.hypotheses {
        axpy(1.0, &h.weights, &mut acc);
    }
    let inv = 1.0 / trace.len() as f64;
    acc.iter_mut().for_each(|x| *x *= inv);
    Ok(Hypothesis {
        weights: acc,
        task: first.task,
    })
}

/// Index of the ensemble member with the lowest risk on `validation`; ties go to
/// the smallest index.
pub fn best_hypothesis_index(
    trace: &EnsembleTrace,
    validation: &[LabeledPoint],
    loss: &PairwiseLoss,
) -> Result<(usize, f64)> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut best = (0, f64::INFINITY);
    for (i, h) in trace.hypotheses.iter().enumerate() {
        let r = expected_risk(loss, h, validation)?;
        if r < best.1 {
            best = (i, r);
        }
    }
    Ok(best)
}

pub fn best_hypothesis(
    trace: &EnsembleTrace,
    validation: &[LabeledPoint],
    loss: &PairwiseLoss,
) -> Result<Hypothesis> {
    let (i, _) = best_hypothesis_index(trace, validation, loss)?;
    Ok(trace.hypotheses[i].clone())
}

/// `sum_{t=2}^{n} L_t(h)`: the all-pairs penalties of a fixed hypothesis over a stream.
pub fn all_pairs_objective(h: &Hypothesis, stream: &[LabeledPoint], loss: &PairwiseLoss) -> Result<f64> {
    if stream.len() < 2 {
        return Err(Error::StreamTooShort {
            need: 2,
            got: stream.len(),
        });
    }
    if let Some(p) = stream.first() {
        check_stream(stream, p.dim())?;
        if h.weights.len() != loss.task().weight_len(p.dim()) {
            return Err(Error::DimensionMismatch {
                expected: loss.task().weight_len(p.dim()),
                actual: h.weights.len(),
            });
        }
    }
    Ok(objective_and_gradient(&h.weights, stream, loss, None))
}

/// Objective `sum_t L_t(w)`; when `grad` is given it receives a subgradient of the
/// mean objective `sum_t L_t(w) / (n - 1)`.
fn objective_and_gradient(
    w: &[f64],
    stream: &[LabeledPoint],
    loss: &PairwiseLoss,
    grad: Option<&mut [f64]>,
) -> f64 {
    let n = stream.len();
    let steps = (n - 1) as f64;
    match loss.kind {
        LossKind::AucHinge => {
            let (total, coef, reg_weight) = auc_pair_sums(w, stream, loss);
            if let Some(g) = grad {
                g.iter_mut().for_each(|x| *x = 0.0);
                for (p, &k) in stream.iter().zip(&coef) {
                    if k != 0.0 {
                        axpy(k / steps, &p.features, g);
                    }
                }
                if loss.sigma != 0.0 {
                    axpy(loss.sigma * reg_weight / steps, w, g);
                }
            }
            total
        }
        LossKind::MetricHinge => {
            let mut total = 0.0;
            let mut g = grad;
            if let Some(g) = g.as_deref_mut() {
                g.iter_mut().for_each(|x| *x = 0.0);
            }
            for t in 1..n {
                let c = 1.0 / t as f64;
                for tau in 0..t {
                    total += c * loss.loss_unchecked(w, &stream[t], &stream[tau]);
                    if let Some(g) = g.as_deref_mut() {
                        loss.add_subgradient(w, &stream[t], &stream[tau], c / steps, g);
                    }
                }
            }
            total
        }
    }
}

/// Prefix sums over score ranks.
struct Fenwick(Vec<f64>);

impl Fenwick {
    fn new(n: usize) -> Self {
        Self(vec![0.0; n + 1])
    }

    fn add(&mut self, i: usize, v: f64) {
        let mut i = i + 1;
        while i < self.0.len() {
            self.0[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over ranks `0..i`.
    fn prefix(&self, i: usize) -> f64 {
        let (mut i, mut acc) = (i, 0.0);
        while i > 0 {
            acc += self.0[i];
            i -= i & i.wrapping_neg();
        }
        acc
    }

    fn range(&self, lo: usize, hi: usize) -> f64 {
        self.prefix(hi) - self.prefix(lo)
    }
}

/// AUC hinge objective `sum_t L_t(w)` with per-point subgradient coefficients and
/// the regularizer weight, in `O(n log n)`.
///
/// Pair `(t, tau)`, `tau < t`, with opposite labels has weight `1/t` (0-based `t`) and
/// is active when `y_t (s_t - s_tau) < 1`. A forward pass over `t` sums the active
/// earlier partners; a backward pass sums, for each `tau`, the weights of its active
/// later partners. Both query Fenwick trees keyed by score rank.
fn auc_pair_sums(w: &[f64], stream: &[LabeledPoint], loss: &PairwiseLoss) -> (f64, Vec<f64>, f64) {
    let n = stream.len();
    let scores: Vec<f64> = stream.iter().map(|p| dot(w, &p.features)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let sorted: Vec<f64> = order.iter().map(|&i| scores[i]).collect();
    // Ranks holding scores strictly above / strictly below `v`.
    let above = |v: f64| sorted.partition_point(|&x| x <= v)..n;
    let below = |v: f64| 0..sorted.partition_point(|&x| x < v);

    let reg = loss.regularizer(w);
    let mut coef = vec![0.0; n];
    let mut total = 0.0;
    let mut reg_weight = 0.0;
    // [label is positive] -> (count, score sum) trees
    let mut cnt = [Fenwick::new(n), Fenwick::new(n)];
    let mut sum = [Fenwick::new(n), Fenwick::new(n)];
    let mut seen = [0usize; 2];
    for t in 0..n {
        let pos = stream[t].label > 0.0;
        let y = stream[t].label;
        if t > 0 {
            let c = 1.0 / t as f64;
            let other = usize::from(!pos);
            let r = if pos { above(scores[t] - 1.0) } else { below(scores[t] + 1.0) };
            let k = cnt[other].range(r.start, r.end);
            let ssum = sum[other].range(r.start, r.end);
            // sum over active tau of 1 - y (s_t - s_tau)
            let hinge = k * (1.0 - y * scores[t]) + y * ssum;
            total += c * (hinge + seen[other] as f64 * reg);
            reg_weight += c * seen[other] as f64;
            coef[t] -= c * y * k;
        }
        let me = usize::from(pos);
        cnt[me].add(rank[t], 1.0);
        sum[me].add(rank[t], scores[t]);
        seen[me] += 1;
    }

    // Backward: weights c_t of later partners t, per label of t.
    let mut later = [Fenwick::new(n), Fenwick::new(n)];
    for tau in (0..n).rev() {
        let pos = stream[tau].label > 0.0;
        // Partner t has the other label; active iff y_t (s_t - s_tau) < 1.
        let (r, y_t) = if pos {
            (above(scores[tau] - 1.0), -1.0)
        } else {
            (below(scores[tau] + 1.0), 1.0)
        };
        let other = usize::from(!pos);
        coef[tau] += y_t * later[other].range(r.start, r.end);
        if tau > 0 {
            later[usize::from(pos)].add(rank[tau], 1.0 / tau as f64);
        }
    }
    (total, coef, reg_weight)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchMinimum {
    pub hypothesis: Hypothesis,
    /// `sum_{t=2}^{n} L_t` at the returned hypothesis.
    pub objective: f64,
}

/// Approximate `inf_h sum_t L_t(h)` over the radius-`radius` ball by projected
/// subgradient descent on the mean objective with step `radius / sqrt(k)`, starting
/// from zero. Returns the best iterate seen (the origin counts as iterate 0).
pub fn batch_all_pairs_minimizer(
    stream: &[LabeledPoint],
    loss: &PairwiseLoss,
    radius: f64,
    iterations: usize,
) -> Result<BatchMinimum> {
    if iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius must be positive"));
    }
    let n = stream.len();
    if n < 2 {
        return Err(Error::StreamTooShort { need: 2, got: n });
    }
    let dim = stream[0].dim();
    check_stream(stream, dim)?;

    let mut w = vec![0.0; loss.task().weight_len(dim)];
    let mut g = vec![0.0; w.len()];
    let mut best_w = w.clone();
    let mut best = f64::INFINITY;
    for k in 1..=iterations {
        let obj = objective_and_gradient(&w, stream, loss, Some(&mut g));
        if obj < best {
            best = obj;
            best_w.copy_from_slice(&w);
        }
        if norm(&g) == 0.0 {
            break;
        }
        axpy(-radius / (k as f64).sqrt(), &g, &mut w);
        project_in_place(&mut w, radius);
    }
    let last = objective_and_gradient(&w, stream, loss, None);
    if last < best {
        best = last;
        best_w = w;
    }
    Ok(BatchMinimum {
        hypothesis: Hypothesis {
            weights: best_w,
            task: loss.task(),
        },
        objective: best,
    })
}
