//! Closed-form Rademacher-complexity bounds, the contraction rule, excess-risk
//! bound right-hand sides, and a Monte-Carlo estimate of the empirical Rademacher
//! average of the L2-ball AUC class.
//!
//! `log` is the natural logarithm throughout. For the AUC table the data norm is
//! `|X|_p` and the weight norm `|W|_q` with `1/p + 1/q = 1`; note that the prose
//! elsewhere sometimes swaps the two letters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::types::LabeledPoint;

use std::f64::consts::E;

/// Every quantity a bound formula may need. Irrelevant fields are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundInputs {
    pub n: usize,
    pub d: usize,
    /// `|X|_p` for the AUC Lq-ball row.
    pub x_p: f64,
    pub x_2: f64,
    pub x_inf: f64,
    /// Norm bound of the hypothesis class in whichever norm the row uses.
    pub w_norm: f64,
    pub p: f64,
    pub q: f64,
    pub kappa: f64,
    pub num_kernels: usize,
    pub lipschitz: f64,
    pub y_bound: f64,
    pub loss_bound: f64,
    pub delta: f64,
    pub regret: Option<f64>,
    pub s: Option<usize>,
    pub c_d: f64,
}

impl Default for BoundInputs {
    fn default() -> Self {
        Self {
            n: 100,
            d: 10,
            x_p: 1.0,
            x_2: 1.0,
            x_inf: 1.0,
            w_norm: 1.0,
            p: 2.0,
            q: 2.0,
            kappa: 1.0,
            num_kernels: 4,
            lipschitz: 1.0,
            y_bound: 2.0,
            loss_bound: 1.0,
            delta: 0.05,
            regret: None,
            s: None,
            c_d: 1.0,
        }
    }
}

impl BoundInputs {
    fn check_n(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        Ok(self.n as f64)
    }

    fn ln_d(&self) -> Result<f64> {
        if self.d < 2 {
            return Err(Error::invalid("log-d rows need d >= 2"));
        }
        Ok((self.d as f64).ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AucVariant {
    LqBall,
    L1Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricVariant {
    /// `(2,2)` mixed norm (Frobenius).
    Mixed22,
    Mixed21,
    Mixed11,
    /// Trace norm.
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MklVariant {
    L2Sphere,
    L1Simplex,
}

impl AucVariant {
    pub const ALL: [Self; 2] = [Self::LqBall, Self::L1Ball];

    pub fn name(self) -> &'static str {
        match self {
            Self::LqBall => "Lq-ball",
            Self::L1Ball => "L1-ball",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            Self::LqBall => "2*|X|_p*|W|_q*sqrt((p-1)/n)",
            Self::L1Ball => "2*|X|_inf*|W|_1*sqrt(e*ln(d)/n)",
        }
    }
}

impl MetricVariant {
    pub const ALL: [Self; 4] = [Self::Mixed22, Self::Mixed21, Self::Mixed11, Self::Trace];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mixed22 => "(2,2)",
            Self::Mixed21 => "(2,1)",
            Self::Mixed11 => "(1,1)",
            Self::Trace => "S(1)",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            Self::Mixed22 => "|X|_2^2*|W|_(2,2)*sqrt(1/n)",
            Self::Mixed21 => "|X|_2*|X|_inf*|W|_(2,1)*sqrt(e*ln(d)/n)",
            Self::Mixed11 => "|X|_inf^2*|W|_(1,1)*sqrt(2*e*ln(d)/n)",
            Self::Trace => "|X|_2^2*|W|_S(1)*sqrt(e*ln(d)/n)",
        }
    }
}

impl MklVariant {
    pub const ALL: [Self; 2] = [Self::L2Sphere, Self::L1Simplex];

    pub fn name(self) -> &'static str {
        match self {
            Self::L2Sphere => "L2-sphere",
            Self::L1Simplex => "L1-simplex",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            Self::L2Sphere => "kappa^2*sqrt(p/n)",
            Self::L1Simplex => "kappa^2*sqrt(e*ln(p)/n)",
        }
    }
}

pub fn auc_rademacher_bound(variant: AucVariant, inputs: &BoundInputs) -> Result<f64> {
    let n = inputs.check_n()?;
    match variant {
        AucVariant::LqBall => {
            let (p, q) = (inputs.p, inputs.q);
            if !(p > 1.0 && q > 1.0) || (1.0 / p + 1.0 / q - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("p = {p}, q = {q} are not conjugate exponents > 1")));
            }
            Ok(2.0 * inputs.x_p * inputs.w_norm * ((p - 1.0) / n).sqrt())
        }
        AucVariant::L1Ball => {
            let ln_d = inputs.ln_d()?;
            Ok(2.0 * inputs.x_inf * inputs.w_norm * (E * ln_d / n).sqrt())
        }
    }
}

pub fn metric_rademacher_bound(variant: MetricVariant, inputs: &BoundInputs) -> Result<f64> {
    let n = inputs.check_n()?;
    let w = inputs.w_norm;
    Ok(match variant {
        MetricVariant::Mixed22 => inputs.x_2 * inputs.x_2 * w * (1.0 / n).sqrt(),
        MetricVariant::Mixed21 => inputs.x_2 * inputs.x_inf * w * (E * inputs.ln_d()? / n).sqrt(),
        MetricVariant::Mixed11 => {
            inputs.x_inf * inputs.x_inf * w * (2.0 * E * inputs.ln_d()? / n).sqrt()
        }
        MetricVariant::Trace => inputs.x_2 * inputs.x_2 * w * (E * inputs.ln_d()? / n).sqrt(),
    })
}

pub fn mkl_rademacher_bound(variant: MklVariant, inputs: &BoundInputs) -> Result<f64> {
    let n = inputs.check_n()?;
    let k2 = inputs.kappa * inputs.kappa;
    let p = inputs.num_kernels;
    match variant {
        MklVariant::L2Sphere => {
            if p == 0 {
                return Err(Error::invalid("need at least one kernel"));
            }
            Ok(k2 * (p as f64 / n).sqrt())
        }
        MklVariant::L1Simplex => {
            if p < 2 {
                return Err(Error::invalid("simplex row needs at least two kernels"));
            }
            Ok(k2 * (E * (p as f64).ln() / n).sqrt())
        }
    }
}

/// `R_n(l o H) <= L * Y * R_n(H)`.
pub fn contraction_bound(lipschitz: f64, y_bound: f64, rad_of_h: f64) -> Result<f64> {
    if lipschitz < 0.0 || y_bound < 0.0 || rad_of_h < 0.0 {
        return Err(Error::invalid("contraction inputs must be nonnegative"));
    }
    Ok(lipschitz * y_bound * rad_of_h)
}

/// Dimension factor presets: 1 for L2-type classes, `sqrt(e ln d)` for L1/trace classes.
pub fn dimension_factor(sparse: bool, d: usize) -> f64 {
    if sparse && d >= 2 {
        (E * (d as f64).ln()).sqrt()
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExcessRiskKind {
    /// Unbounded buffer:
    /// `4/(n-1) sum_t R_{t-1} + regret/(n-1) + 6 B sqrt(ln(n/delta)/(n-1))`.
    AllPairs,
    /// Buffer of capacity `s`, same constants with the confidence term over `s`:
    /// `4/(n-1) sum_t R_{min(t-1,s)} + regret/(n-1) + 6 B sqrt(ln(n/delta)/s)`.
    /// The constants 4 and 6 are a reporting convention here.
    FiniteBuffer,
}

/// Excess-risk right-hand side. `rad_terms` holds the Rademacher terms for
/// `t = 2..=n` (see [`rademacher_terms`]); their mean is taken over `n - 1`.
pub fn excess_risk_bound_rhs(kind: ExcessRiskKind, inputs: &BoundInputs, rad_terms: &[f64]) -> Result<f64> {
    let n = inputs.n;
    if n < 2 {
        return Err(Error::invalid("n must be at least 2"));
    }
    if !(inputs.delta > 0.0 && inputs.delta < 1.0) {
        return Err(Error::invalid(format!("delta = {} is not in (0, 1)", inputs.delta)));
    }
    let steps = (n - 1) as f64;
    let rad = 4.0 * rad_terms.iter().sum::<f64>() / steps;
    let regret = inputs.regret.unwrap_or(0.0) / steps;
    let log_term = (n as f64 / inputs.delta).ln();
    let confidence = match kind {
        ExcessRiskKind::AllPairs => 6.0 * inputs.loss_bound * (log_term / steps).sqrt(),
        ExcessRiskKind::FiniteBuffer => {
            let s = inputs
                .s
                .filter(|&s| s > 0)
                .ok_or_else(|| Error::invalid("finite-buffer bound needs s"))?;
            6.0 * inputs.loss_bound * (log_term / s as f64).sqrt()
        }
    };
    Ok(rad + regret + confidence)
}

/// Rademacher terms `rate / sqrt(m_t)` for `t = 2..=n`, with `m_t = t - 1`, capped at
/// `cap` when a buffer capacity is given.
pub fn rademacher_terms(rate: f64, n: usize, cap: Option<usize>) -> Vec<f64> {
    (2..=n)
        .map(|t| {
            let m = cap.map_or(t - 1, |s| (t - 1).min(s));
            rate / (m as f64).sqrt()
        })
        .collect()
}

/// Per-step regret rate of OLP with RS-x, constants fixed at 1:
/// `C_d sqrt(ln(n/delta)/s) + sqrt(1/(n-1))`.
pub fn olp_regret_rate_rhs(inputs: &BoundInputs) -> Result<f64> {
    let s = inputs
        .s
        .filter(|&s| s > 0)
        .ok_or_else(|| Error::invalid("regret rate needs s"))?;
    if inputs.n < 2 || !(inputs.delta > 0.0 && inputs.delta < 1.0) {
        return Err(Error::invalid("need n >= 2 and delta in (0, 1)"));
    }
    let n = inputs.n as f64;
    Ok(inputs.c_d * ((n / inputs.delta).ln() / s as f64).sqrt() + (1.0 / (n - 1.0)).sqrt())
}

/// Hypothesis class for the Monte-Carlo estimator: linear pair scorers
/// `(x, x') -> w.(x - x')` with `|w|_2 <= radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearL2Class {
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Monte-Carlo estimate of the Rademacher average of `class` on `sample`.
///
/// Each trial draws an anchor `z` and `z_1..z_n` uniformly with replacement
/// (`n = sample.len()`, all via [`RandomSource::below`], anchor first), then `n`
/// signs, and evaluates the supremum in closed form:
/// `radius * |(1/n) sum_tau eps_tau (x - x_tau)|_2`.
pub fn empirical_rademacher_mc(
    class: LinearL2Class,
    sample: &[LabeledPoint],
    trials: usize,
    rng: &mut RandomSource,
) -> Result<MonteCarloEstimate> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let n = sample.len();
    if n < 2 {
        return Err(Error::StreamTooShort { need: 2, got: n });
    }
    if class.radius < 0.0 {
        return Err(Error::invalid("radius must be nonnegative"));
    }
    let d = sample[0].dim();
    let mut acc = vec![0.0; d];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let anchor = &sample[rng.below(n)].features;
        acc.iter_mut().for_each(|a| *a = 0.0);
        let mut sign_sum = 0.0;
        let mut picks = Vec::with_capacity(n);
        for _ in 0..n {
            picks.push(rng.below(n));
        }
        for &j in &picks {
            let eps = rng.sign();
            sign_sum += eps;
            crate::linalg::axpy(-eps, &sample[j].features, &mut acc);
        }
        // sum eps (x - x_j) = (sum eps) x - sum eps x_j
        crate::linalg::axpy(sign_sum, anchor, &mut acc);
        let v = class.radius * crate::linalg::norm(&acc) / n as f64;
        sum += v;
        sum_sq += v * v;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = if trials > 1 {
        ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / t).sqrt(),
        trials,
    })
}
