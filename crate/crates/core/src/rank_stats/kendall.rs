use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};

/// Kendall τ_b together with its exact pair counts.
///
/// The five counts partition the `n(n-1)/2` pairs. `value` is `None` when
/// one of the rankings is constant (a denominator factor is zero).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TauResult {
    pub value: Option<f64>,
    pub concordant: u64,
    pub discordant: u64,
    pub ties_gold_only: u64,
    pub ties_hyp_only: u64,
    pub ties_both: u64,
    /// Number of observations.
    pub n: usize,
}

impl TauResult {
    pub fn pair_count(&self) -> u64 {
        let n = self.n as u64;
        n * n.saturating_sub(1) / 2
    }
}

fn pairs(t: u64) -> u64 {
    t * t.saturating_sub(1) / 2
}

fn cmp(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).expect("finite inputs")
}

/// Sum of `t(t-1)/2` over runs of equal values in an already sorted sequence.
fn tied_pairs<T>(sorted: &[T], eq: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if eq(&w[0], &w[1]) {
            run += 1;
        } else {
            total += pairs(run);
            run = 1;
        }
    }
    if !sorted.is_empty() {
        total += pairs(run);
    }
    total
}

/// Merge sort by hypothesis value, returning the number of strict inversions.
fn sort_count_inversions(v: &mut [(f64, f64)], buf: &mut Vec<(f64, f64)>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = sort_count_inversions(&mut v[..mid], buf) + sort_count_inversions(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j].1 < v[i].1 {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall τ_b between hypothesis and gold scores.
///
/// `τ_b = (C - D) / sqrt((C + D + T_g)(C + D + T_h))`, where pairs tied in
/// both rankings enter neither factor. Counts are exact (Knight's
/// O(n log n) algorithm).
pub fn kendall_tau_b(hyp: &[f64], gold: &[f64]) -> Result<TauResult> {
    if hyp.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: hyp.len(),
            right: gold.len(),
        });
    }
    let n = hyp.len();
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    if hyp.iter().chain(gold).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("kendall_tau_b requires finite values".into()));
    }

    let mut items: Vec<(f64, f64)> = gold.iter().copied().zip(hyp.iter().copied()).collect();
    items.sort_unstable_by(|a, b| cmp(a.0, b.0).then(cmp(a.1, b.1)));
    let tied_gold = tied_pairs(&items, |a, b| a.0 == b.0);
    let tied_both = tied_pairs(&items, |a, b| a.0 == b.0 && a.1 == b.1);

    let mut buf = Vec::with_capacity(n);
    let discordant = sort_count_inversions(&mut items, &mut buf);
    let tied_hyp = tied_pairs(&items, |a, b| a.1 == b.1);

    let total = pairs(n as u64);
    let concordant = total + tied_both - tied_gold - tied_hyp - discordant;
    let not_tied_hyp = total - tied_hyp;
    let not_tied_gold = total - tied_gold;
    let value = (not_tied_hyp > 0 && not_tied_gold > 0).then(|| {
        let num = concordant as f64 - discordant as f64;
        let den = (not_tied_hyp as f64 * not_tied_gold as f64).sqrt();
        (num / den).clamp(-1.0, 1.0)
    });
    Ok(TauResult {
        value,
        concordant,
        discordant,
        ties_gold_only: tied_gold - tied_both,
        ties_hyp_only: tied_hyp - tied_both,
        ties_both: tied_both,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct pair classifier, independent of the merge-sort path.
    fn brute_force(hyp: &[f64], gold: &[f64]) -> TauResult {
        let (mut c, mut d, mut tg, mut th, mut tb) = (0u64, 0u64, 0u64, 0u64, 0u64);
        for i in 0..hyp.len() {
            for j in i + 1..hyp.len() {
                let dg = gold[i] - gold[j];
                let dh = hyp[i] - hyp[j];
                match (dg == 0.0, dh == 0.0) {
                    (true, true) => tb += 1,
                    (true, false) => tg += 1,
                    (false, true) => th += 1,
                    (false, false) if dg * dh > 0.0 => c += 1,
                    _ => d += 1,
                }
            }
        }
        let f1 = (c + d + tg) as f64;
        let f2 = (c + d + th) as f64;
        let value = (f1 > 0.0 && f2 > 0.0).then(|| (c as f64 - d as f64) / (f1 * f2).sqrt());
        TauResult {
            value,
            concordant: c,
            discordant: d,
            ties_gold_only: tg,
            ties_hyp_only: th,
            ties_both: tb,
            n: hyp.len(),
        }
    }

    #[test]
    fn perfect_concordance_and_discordance() {
        assert_eq!(kendall_tau_b(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap().value, Some(1.0));
        assert_eq!(kendall_tau_b(&[3.0, 2.0, 1.0], &[1.0, 2.0, 3.0]).unwrap().value, Some(-1.0));
    }

    #[test]
    fn ties_in_hypothesis() {
        let r = kendall_tau_b(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((r.concordant, r.discordant, r.ties_hyp_only, r.ties_gold_only), (2, 0, 1, 0));
        let expected = 2.0 / 6.0_f64.sqrt();
        assert!((r.value.unwrap() - expected).abs() < 1e-15);
        assert!((r.value.unwrap() - 0.8165).abs() < 1e-4);
    }

    #[test]
    fn constant_hypothesis_is_undefined() {
        let r = kendall_tau_b(&[5.0; 4], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(r.value, None);
        assert_eq!(r.ties_hyp_only, 6);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(kendall_tau_b(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(kendall_tau_b(&[1.0], &[1.0]), Err(Error::TooFewObservations(1))));
        assert!(kendall_tau_b(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn negative_zero_ties_with_zero() {
        let r = kendall_tau_b(&[0.0, -0.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.ties_hyp_only, 1);
    }

    fn tied_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0i32..5, len).prop_map(|v| v.into_iter().map(f64::from).collect())
    }

    proptest! {
        #[test]
        fn matches_brute_force(pair in (2usize..40).prop_flat_map(|n| (tied_vec(n..n + 1), tied_vec(n..n + 1)))) {
            let (h, g) = pair;
            let fast = kendall_tau_b(&h, &g).unwrap();
            let slow = brute_force(&h, &g);
            prop_assert_eq!(fast.concordant, slow.concordant);
            prop_assert_eq!(fast.discordant, slow.discordant);
            prop_assert_eq!(fast.ties_gold_only, slow.ties_gold_only);
            prop_assert_eq!(fast.ties_hyp_only, slow.ties_hyp_only);
            prop_assert_eq!(fast.ties_both, slow.ties_both);
            match (fast.value, slow.value) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12),
                (None, None) => {}
                other => prop_assert!(false, "definedness differs: {:?}", other),
            }
        }

        #[test]
        fn pair_count_identity(pair in (2usize..60).prop_flat_map(|n| (tied_vec(n..n + 1), tied_vec(n..n + 1)))) {
            let (h, g) = pair;
            let r = kendall_tau_b(&h, &g).unwrap();
            prop_assert_eq!(
                r.concordant + r.discordant + r.ties_gold_only + r.ties_hyp_only + r.ties_both,
                r.pair_count()
            );
        }

        #[test]
        fn sign_flip_negates(pair in (2usize..40).prop_flat_map(|n| (tied_vec(n..n + 1), tied_vec(n..n + 1)))) {
            let (h, g) = pair;
            let neg: Vec<f64> = h.iter().map(|v| -v).collect();
            let a = kendall_tau_b(&h, &g).unwrap();
            let b = kendall_tau_b(&neg, &g).unwrap();
            prop_assert_eq!(a.concordant, b.discordant);
            prop_assert_eq!(a.ties_hyp_only, b.ties_hyp_only);
            prop_assert_eq!(a.value.map(|v| -v), b.value);
        }

        #[test]
        fn self_correlation_is_one(h in tied_vec(2..40)) {
            let r = kendall_tau_b(&h, &h).unwrap();
            if h.iter().any(|v| *v != h[0]) {
                prop_assert_eq!(r.value, Some(1.0));
            } else {
                prop_assert_eq!(r.value, None);
            }
        }

        #[test]
        fn monotone_transform_invariance(pair in (2usize..40).prop_flat_map(|n| (tied_vec(n..n + 1), tied_vec(n..n + 1)))) {
            let (h, g) = pair;
            let th: Vec<f64> = h.iter().map(|v| (v * 0.7).exp() + 3.0).collect();
            let tg: Vec<f64> = g.iter().map(|v| v * v * v - 10.0).collect();
            prop_assert_eq!(kendall_tau_b(&h, &g).unwrap(), kendall_tau_b(&th, &tg).unwrap());
        }

        #[test]
        fn bounded(h in prop::collection::vec(-1e3f64..1e3, 2..50), seed in any::<u64>()) {
            let g: Vec<f64> = h.iter().enumerate().map(|(i, v)| ((i as u64 ^ seed) % 7) as f64 + v * 0.0).collect();
            if let Some(v) = kendall_tau_b(&h, &g).unwrap().value {
                prop_assert!((-1.0..=1.0).contains(&v));
            }
        }
    }
}
