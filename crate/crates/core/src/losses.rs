//! Pairwise hinge losses and the penalty functionals built from them.
//!
//! * AUC: `l(w, z, z') = [y != y'] * (max(0, 1 - a * (w.x - w.x')) + sigma/2 |w|^2)`
//!   with `a = (y - y') / 2` in `{-1, +1}`. Same-label pairs cost nothing.
//! * Metric: `l(W, z, z') = max(0, 1 - y y' (1 - M_W(x, x'))) + sigma/2 |W|_F^2`
//!   with `M_W(x, x') = (x - x')^T W (x - x')`.
//!
//! The hinge kink (`margin == 1`) takes the inactive branch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq, quad_form};
use crate::types::{Hypothesis, LabeledPoint, TaskKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossKind {
    AucHinge,
    MetricHinge,
}

impl LossKind {
    pub fn task(self) -> TaskKind {
        match self {
            LossKind::AucHinge => TaskKind::AucLinear,
            LossKind::MetricHinge => TaskKind::MetricMahalanobis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseLoss {
    pub kind: LossKind,
    /// Strong-convexity parameter of the `sigma/2 |w|^2` regularizer; 0 disables it.
    pub sigma: f64,
}

impl PairwiseLoss {
    pub fn auc(sigma: f64) -> Self {
        Self {
            kind: LossKind::AucHinge,
            sigma,
        }
    }

    pub fn metric(sigma: f64) -> Self {
        Self {
            kind: LossKind::MetricHinge,
            sigma,
        }
    }

    pub fn task(&self) -> TaskKind {
        self.kind.task()
    }

    /// `sigma/2 |w|^2`.
    pub fn regularizer(&self, w: &[f64]) -> f64 {
        0.5 * self.sigma * norm_sq(w)
    }

    pub fn pair_loss(&self, h: &Hypothesis, z: &LabeledPoint, z2: &LabeledPoint) -> Result<f64> {
        self.check(&h.weights, z, z2)?;
        Ok(self.loss_unchecked(&h.weights, z, z2))
    }

    pub fn pair_subgradient(
        &self,
        h: &Hypothesis,
        z: &LabeledPoint,
        z2: &LabeledPoint,
    ) -> Result<Vec<f64>> {
        self.check(&h.weights, z, z2)?;
        let mut g = vec![0.0; h.weights.len()];
        self.add_subgradient(&h.weights, z, z2, 1.0, &mut g);
        Ok(g)
    }

    /// Hinge margin `u`; the loss is `max(0, 1 - u)` plus the regularizer.
    /// `None` for same-label AUC pairs.
    #[inline]
    pub(crate) fn margin(&self, w: &[f64], z: &LabeledPoint, z2: &LabeledPoint) -> Option<f64> {
        match self.kind {
            LossKind::AucHinge => {
                if z.label == z2.label {
                    return None;
                }
                let a = 0.5 * (z.label - z2.label);
                let diff: f64 = w
                    .iter()
                    .zip(z.features.iter().zip(&z2.features))
                    .map(|(wi, (x, x2))| wi * (x - x2))
                    .sum();
                Some(a * diff)
            }
            LossKind::MetricHinge => {
                let d = crate::linalg::sub(&z.features, &z2.features);
                let m = quad_form(w, &d);
                Some(z.label * z2.label * (1.0 - m))
            }
        }
    }

    #[inline]
    pub(crate) fn loss_unchecked(&self, w: &[f64], z: &LabeledPoint, z2: &LabeledPoint) -> f64 {
        match self.margin(w, z, z2) {
            None => 0.0,
            Some(u) => (1.0 - u).max(0.0) + self.regularizer(w),
        }
    }

    /// `out += scale * g` for a subgradient `g` of the pair loss at `w`.
    pub(crate) fn add_subgradient(
        &self,
        w: &[f64],
        z: &LabeledPoint,
        z2: &LabeledPoint,
        scale: f64,
        out: &mut [f64],
    ) {
        let Some(u) = self.margin(w, z, z2) else {
            return;
        };
        if u < 1.0 {
            match self.kind {
                LossKind::AucHinge => {
                    let a = 0.5 * (z.label - z2.label);
                    for ((o, x), x2) in out.iter_mut().zip(&z.features).zip(&z2.features) {
                        *o -= scale * a * (x - x2);
                    }
                }
                LossKind::MetricHinge => {
                    let d = crate::linalg::sub(&z.features, &z2.features);
                    let c = scale * z.label * z2.label;
                    let n = d.len();
                    for i in 0..n {
                        for j in 0..n {
                            out[i * n + j] += c * d[i] * d[j];
                        }
                    }
                }
            }
        }
        if self.sigma != 0.0 {
            crate::linalg::axpy(scale * self.sigma, w, out);
        }
    }

    fn check(&self, w: &[f64], z: &LabeledPoint, z2: &LabeledPoint) -> Result<()> {
        let d = z.dim();
        if z2.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: z2.dim(),
            });
        }
        let need = self.task().weight_len(d);
        if w.len() != need {
            return Err(Error::DimensionMismatch {
                expected: need,
                actual: w.len(),
            });
        }
        for y in [z.label, z2.label] {
            if y != 1.0 && y != -1.0 {
                return Err(Error::InvalidLabel(y));
            }
        }
        Ok(())
    }

    /// Lipschitz constant in `w` over the radius-`radius` ball when every `|x| <= data_norm`.
    pub fn lipschitz_constant(&self, data_norm: f64, radius: f64) -> f64 {
        let hinge = match self.kind {
            LossKind::AucHinge => 2.0 * data_norm,
            LossKind::MetricHinge => 4.0 * data_norm * data_norm,
        };
        hinge + self.sigma * radius
    }

    /// Largest value the loss can take over the radius-`radius` ball when every
    /// `|x| <= data_norm`. Used only to fill `B` in the bound calculators.
    pub fn loss_bound(&self, data_norm: f64, radius: f64) -> f64 {
        let hinge = match self.kind {
            LossKind::AucHinge => 1.0 + radius * 2.0 * data_norm,
            // |1 - M| <= 1 + |W|_F |x - x'|^2
            LossKind::MetricHinge => 2.0 + radius * 4.0 * data_norm * data_norm,
        };
        hinge + 0.5 * self.sigma * radius * radius
    }
}

/// Eq. (1)-style penalty: mean pair loss of `z_t` against every earlier point.
pub fn all_pairs_penalty(
    loss: &PairwiseLoss,
    h: &Hypothesis,
    z_t: &LabeledPoint,
    history: &[LabeledPoint],
) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::NoPairs);
    }
    mean_pair_loss(loss, h, z_t, history.iter()).map(|v| v.expect("nonempty"))
}

/// Mean pair loss of `z_t` against the buffered points, duplicates counted with multiplicity.
pub fn buffer_penalty<'a>(
    loss: &PairwiseLoss,
    h: &Hypothesis,
    z_t: &LabeledPoint,
    buffer: impl IntoIterator<Item = &'a LabeledPoint>,
) -> Result<f64> {
    mean_pair_loss(loss, h, z_t, buffer)?.ok_or(Error::EmptyBuffer)
}

fn mean_pair_loss<'a>(
    loss: &PairwiseLoss,
    h: &Hypothesis,
    z_t: &LabeledPoint,
    others: impl IntoIterator<Item = &'a LabeledPoint>,
) -> Result<Option<f64>> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for z in others {
        if count == 0 {
            loss.check(&h.weights, z_t, z)?;
        }
        sum += loss.loss_unchecked(&h.weights, z_t, z);
        count += 1;
    }
    Ok((count > 0).then(|| sum / count as f64))
}

/// U-statistic estimate of the expected risk over all unordered pairs of `sample`.
///
/// Both losses are symmetric in the pair order, so each unordered pair is counted once.
pub fn expected_risk(loss: &PairwiseLoss, h: &Hypothesis, sample: &[LabeledPoint]) -> Result<f64> {
    let m = sample.len();
    if m < 2 {
        return Err(Error::StreamTooShort { need: 2, got: m });
    }
    loss.check(&h.weights, &sample[0], &sample[1])?;
    for p in sample {
        loss.check(&h.weights, &sample[0], p)?;
    }
    let pairs = (m * (m - 1) / 2) as f64;
    let total = match loss.kind {
        LossKind::AucHinge => auc_hinge_pair_sum(loss, h, sample),
        LossKind::MetricHinge => {
            let mut acc = 0.0;
            for i in 0..m {
                for j in i + 1..m {
                    acc += loss.loss_unchecked(&h.weights, &sample[i], &sample[j]);
                }
            }
            acc
        }
    };
    Ok(total / pairs)
}

/// Sum of AUC pair losses over all unordered pairs in `O(m log m)`: only mixed pairs
/// contribute, and `max(0, 1 - (s_pos - s_neg))` is summed with sorted negative
/// scores and prefix sums.
fn auc_hinge_pair_sum(loss: &PairwiseLoss, h: &Hypothesis, sample: &[LabeledPoint]) -> f64 {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for p in sample {
        let s = dot(&h.weights, &p.features);
        if p.is_positive() {
            pos.push(s);
        } else {
            neg.push(s);
        }
    }
    neg.sort_by(f64::total_cmp);
    let mut suffix = vec![0.0; neg.len() + 1];
    for i in (0..neg.len()).rev() {
        suffix[i] = suffix[i + 1] + neg[i];
    }
    let mut hinge = 0.0;
    for &sp in &pos {
        // Active negatives: 1 - sp + sn > 0  <=>  sn > sp - 1.
        let cut = sp - 1.0;
        let first = neg.partition_point(|&sn| sn <= cut);
        let active = (neg.len() - first) as f64;
        hinge += active * (1.0 - sp) + suffix[first];
    }
    let mixed = (pos.len() * neg.len()) as f64;
    hinge + mixed * loss.regularizer(&h.weights)
}
