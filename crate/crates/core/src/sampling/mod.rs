//! Stream-oblivious buffer update policies.
//!
//! A [`Buffer`] never looks at the values it stores: every keep/evict decision is a
//! function of the step index and the [`RandomSource`] alone. Learners exploit this
//! by buffering stream indices rather than points.
//!
//! Per-step draw budget once the buffer is full (`t > s`):
//!
//! | policy | `t == s + 1`                      | `t > s + 1`                                        |
//! |--------|-----------------------------------|----------------------------------------------------|
//! | FIFO   | none                              | none                                               |
//! | RS     | `bernoulli(s/t)`, then `below(s)` on success | same                                    |
//! | RSX    | `s` x `below(s + 1)` (repopulate) | `s` x `bernoulli(1/t)`, slot 0 first               |
//! | RSX2   | `s` x `below(s + 1)` (repopulate) | `k ~ Binomial(s, 1/t)`, then `k` partial Fisher–Yates picks |
//!
//! While `t <= s` every policy appends without drawing.

pub mod dist;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Policy {
    Fifo,
    Rs,
    Rsx,
    Rsx2,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::Fifo, Policy::Rs, Policy::Rsx, Policy::Rsx2];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Fifo => "FIFO",
            Policy::Rs => "RS",
            Policy::Rsx => "RSX",
            Policy::Rsx2 => "RSX2",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_uppercase();
        match key.as_str() {
            "FIFO" => Ok(Policy::Fifo),
            "RS" => Ok(Policy::Rs),
            "RSX" => Ok(Policy::Rsx),
            "RSX2" | "RSX²" => Ok(Policy::Rsx2),
            _ => Err(Error::invalid(format!("unknown policy '{s}'"))),
        }
    }
}

/// The auxiliary draws one update consumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuxTrace {
    /// `t <= s`: appended, no draws.
    Append,
    /// FIFO overflow: oldest slot dropped, no draws.
    Evict,
    /// RS overflow: one Bernoulli; one slot index only when it succeeded.
    Reservoir { admitted: bool, slot: Option<usize> },
    /// RSX/RSX2 first overflow: `s` picks with replacement from the `s + 1` candidates
    /// (indices `0..s` are the old slots, `s` is the incoming point).
    Repopulate { picks: Vec<usize> },
    /// RSX normal step: one Bernoulli per slot.
    Independent { replaced: Vec<bool> },
    /// RSX2 normal step: one Binomial count and `k` distinct slots.
    Binomial { k: usize, slots: Vec<usize> },
}

impl AuxTrace {
    pub fn bernoulli_draws(&self) -> usize {
        match self {
            AuxTrace::Reservoir { .. } => 1,
            AuxTrace::Independent { replaced } => replaced.len(),
            _ => 0,
        }
    }

    pub fn index_draws(&self) -> usize {
        match self {
            AuxTrace::Reservoir { slot, .. } => usize::from(slot.is_some()),
            AuxTrace::Repopulate { picks } => picks.len(),
            AuxTrace::Binomial { slots, .. } => slots.len(),
            _ => 0,
        }
    }

    pub fn binomial_draws(&self) -> usize {
        usize::from(matches!(self, AuxTrace::Binomial { .. }))
    }

    /// Slots that now hold the incoming point because of a replacement
    /// (empty for `Append`, `Evict` and `Repopulate`).
    pub fn replaced_slots(&self) -> Vec<usize> {
        match self {
            AuxTrace::Reservoir { slot, .. } => slot.iter().copied().collect(),
            AuxTrace::Independent { replaced } => replaced
                .iter()
                .enumerate()
                .filter_map(|(i, &r)| r.then_some(i))
                .collect(),
            AuxTrace::Binomial { slots, .. } => {
                let mut v = slots.clone();
                v.sort_unstable();
                v
            }
            _ => Vec::new(),
        }
    }
}

/// Capacity-bounded multiset of stream items. Duplicates are allowed (RSX, RSX2).
#[derive(Debug, Clone, PartialEq)]
pub struct Buffer<T> {
    // FIFO rotates through the deque; the other policies write slots in place.
    slots: VecDeque<T>,
    capacity: usize,
    policy: Policy,
    seen: usize,
}

impl<T: Clone> Buffer<T> {
    pub fn new(capacity: usize, policy: Policy) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("buffer capacity must be positive"));
        }
        Ok(Self {
            slots: VecDeque::with_capacity(capacity + 1),
            capacity,
            policy,
            seen: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Number of stream points offered so far.
    pub fn seen(&self) -> usize {
        self.seen
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.slots.iter()
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.slots.iter().cloned().collect()
    }

    /// Dispatches on the buffer's policy.
    pub fn update(&mut self, item: T, t: usize, rng: &mut RandomSource) -> Result<AuxTrace> {
        match self.policy {
            Policy::Fifo => self.update_fifo(item, t),
            Policy::Rs => self.update_rs(item, t, rng),
            Policy::Rsx => self.update_rsx(item, t, rng),
            Policy::Rsx2 => self.update_rsx2(item, t, rng),
        }
    }

    pub fn update_fifo(&mut self, item: T, t: usize) -> Result<AuxTrace> {
        self.begin(Policy::Fifo, t)?;
        if self.slots.len() < self.capacity {
            self.slots.push_back(item);
            return Ok(AuxTrace::Append);
        }
        self.slots.pop_front();
        self.slots.push_back(item);
        Ok(AuxTrace::Evict)
    }

    pub fn update_rs(&mut self, item: T, t: usize, rng: &mut RandomSource) -> Result<AuxTrace> {
        self.begin(Policy::Rs, t)?;
        if self.slots.len() < self.capacity {
            self.slots.push_back(item);
            return Ok(AuxTrace::Append);
        }
        let admitted = rng.bernoulli(self.capacity as f64 / t as f64);
        let slot = if admitted {
            let j = rng.below(self.capacity);
            self.slots[j] = item;
            Some(j)
        } else {
            None
        };
        Ok(AuxTrace::Reservoir { admitted, slot })
    }

    pub fn update_rsx(&mut self, item: T, t: usize, rng: &mut RandomSource) -> Result<AuxTrace> {
        self.begin(Policy::Rsx, t)?;
        if let Some(trace) = self.fill_or_repopulate(item.clone(), t, rng) {
            return Ok(trace);
        }
        let p = 1.0 / t as f64;
        let mut replaced = vec![false; self.capacity];
        for (j, slot) in self.slots.iter_mut().enumerate() {
            if rng.bernoulli(p) {
                *slot = item.clone();
                replaced[j] = true;
            }
        }
        Ok(AuxTrace::Independent { replaced })
    }

    pub fn update_rsx2(&mut self, item: T, t: usize, rng: &mut RandomSource) -> Result<AuxTrace> {
        self.begin(Policy::Rsx2, t)?;
        if let Some(trace) = self.fill_or_repopulate(item.clone(), t, rng) {
            return Ok(trace);
        }
        let s = self.capacity;
        let k = binomial(s, 1.0 / t as f64, rng);
        // First k positions of a partial Fisher–Yates permutation of the slot indices.
        let mut order: Vec<usize> = (0..s).collect();
        for i in 0..k {
            let j = i + rng.below(s - i);
            order.swap(i, j);
        }
        order.truncate(k);
        for &j in &order {
            self.slots[j] = item.clone();
        }
        Ok(AuxTrace::Binomial { k, slots: order })
    }

    fn begin(&mut self, expected: Policy, t: usize) -> Result<()> {
        if self.policy != expected {
            return Err(Error::PolicyMismatch {
                expected: expected.name(),
                actual: self.policy.name(),
            });
        }
        if t != self.seen + 1 {
            return Err(Error::StepMismatch {
                seen: self.seen,
                step: t,
            });
        }
        self.seen = t;
        Ok(())
    }

    /// Shared RSX/RSX2 handling of `t <= s + 1`; `None` means a normal step is due.
    fn fill_or_repopulate(&mut self, item: T, t: usize, rng: &mut RandomSource) -> Option<AuxTrace> {
        let s = self.capacity;
        if self.slots.len() < s {
            self.slots.push_back(item);
            return Some(AuxTrace::Append);
        }
        if t == s + 1 {
            let mut pool: Vec<T> = self.slots.drain(..).collect();
            pool.push(item);
            let picks: Vec<usize> = (0..s).map(|_| rng.below(s + 1)).collect();
            self.slots.extend(picks.iter().map(|&i| pool[i].clone()));
            return Some(AuxTrace::Repopulate { picks });
        }
        None
    }
}

/// `Binomial(n, p)` as a sum of `n` Bernoulli draws.
pub fn binomial(n: usize, p: f64, rng: &mut RandomSource) -> usize {
    (0..n).filter(|_| rng.bernoulli(p)).count()
}

/// Probability of one fixed replacement pattern with `k` of `s` slots replaced at step `t`:
/// `(1/t)^k (1 - 1/t)^(s-k)`.
pub fn replacement_pattern_probability(s: usize, t: usize, k: usize) -> Result<f64> {
    if k > s {
        return Err(Error::invalid(format!("k = {k} exceeds s = {s}")));
    }
    if t <= s {
        return Err(Error::invalid(format!("pattern law needs t > s (t = {t}, s = {s})")));
    }
    let p = 1.0 / t as f64;
    Ok(p.powi(k as i32) * (1.0 - p).powi((s - k) as i32))
}
