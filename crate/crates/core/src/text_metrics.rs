//! Character n-gram F-score (chrF).
//!
//! Characters are Unicode scalar values. For each order `n` in `1..=max_n`
//! precision and recall are computed from clipped n-gram overlap; orders for
//! which the reference has no n-grams are left out, the remaining
//! precisions and recalls are averaged, and the F-β score of the averages is
//! reported on a 0-100 scale.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChrfConfig {
    pub max_n: usize,
    pub beta: f64,
    /// Keep whitespace characters inside n-grams.
    pub whitespace_included: bool,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        ChrfConfig {
            max_n: 6,
            beta: 2.0,
            whitespace_included: false,
        }
    }
}

impl ChrfConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_n == 0 {
            return Err("max_n must be at least 1".into());
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(format!("beta must be positive, got {}", self.beta));
        }
        Ok(())
    }
}

fn prepare(text: &str, config: &ChrfConfig) -> Vec<char> {
    if config.whitespace_included {
        text.trim().chars().collect()
    } else {
        text.chars().filter(|c| !c.is_whitespace()).collect()
    }
}

fn ngram_counts(chars: &[char], n: usize) -> HashMap<&[char], u32> {
    let mut counts = HashMap::new();
    if chars.len() >= n {
        for w in chars.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// chrF of `hypothesis` against `reference`, in `[0, 100]`.
///
/// Returns `None` when both strings are empty after preprocessing.
///
/// # Panics
///
/// Panics if `config` is invalid (see [`ChrfConfig::validate`]).
pub fn chrf(hypothesis: &str, reference: &str, config: &ChrfConfig) -> Option<f64> {
    config.validate().expect("invalid chrF config");
    let hyp = prepare(hypothesis, config);
    let refr = prepare(reference, config);
    if hyp.is_empty() && refr.is_empty() {
        return None;
    }
    let mut precision_sum = 0.0;
    let mut recall_sum = 0.0;
    let mut orders = 0usize;
    for n in 1..=config.max_n {
        let ref_counts = ngram_counts(&refr, n);
        let ref_total: u32 = ref_counts.values().sum();
        if ref_total == 0 {
            continue;
        }
        let hyp_counts = ngram_counts(&hyp, n);
        let hyp_total: u32 = hyp_counts.values().sum();
        let matched: u32 = hyp_counts
            .iter()
            .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
            .sum();
        orders += 1;
        recall_sum += f64::from(matched) / f64::from(ref_total);
        if hyp_total > 0 {
            precision_sum += f64::from(matched) / f64::from(hyp_total);
        }
    }
    if orders == 0 {
        return Some(0.0);
    }
    let p = precision_sum / orders as f64;
    let r = recall_sum / orders as f64;
    let beta2 = config.beta * config.beta;
    if p + r == 0.0 {
        return Some(0.0);
    }
    Some((100.0 * (1.0 + beta2) * p * r / (beta2 * p + r)).clamp(0.0, 100.0))
}

/// `(chrF(a, b) + chrF(b, a)) / 2`.
pub fn symmetric_chrf(a: &str, b: &str, config: &ChrfConfig) -> Option<f64> {
    Some((chrf(a, b, config)? + chrf(b, a, config)?) / 2.0)
}
