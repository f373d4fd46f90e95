//! Property tests over generated test sets.

use std::collections::BTreeMap;

use mtdiff::analysis::{pitfall_correlations, source_variables, Correlation, PitfallAggregation, Variable};
use mtdiff::benchmark::{
    avg_score, budget_sweep, score_histogram, select_top, Budget, HistogramViewKind, PerfectRule, SelectionScope,
};
use mtdiff::corpus::{read_testset, LangPair, LoadOptions, Protocol, TestSet, TestSetBuilder, TestSetFormat};
use mtdiff::estimators::oracle::{oracle, OracleLevel};
use mtdiff::estimators::{random_estimator, text_length_estimate, DifficultyEstimate};
use mtdiff::rank_stats::{dec, Grouping, SkipPolicy};
use mtdiff::significance::{perm_both_test, rank_clusters, PermConfig};
use mtdiff::synthetic::{synthetic_testset, SyntheticConfig};
use mtdiff::text_metrics::{chrf, ChrfConfig};
use mtdiff::tokenize::Tokenizer;
use proptest::prelude::*;

fn small_testset() -> impl Strategy<Value = TestSet> {
    (2usize..14, 2usize..5, 1usize..4, any::<u64>(), 0.0f64..0.9).prop_map(|(segments, systems, languages, seed, w)| {
        synthetic_testset(&SyntheticConfig {
            segments,
            systems,
            languages,
            seed,
            protocol: Protocol::Esa,
            latent_weight: w,
        })
    })
}

/// Copy of `ts` with segment ids relabelled through `rename`.
fn relabel(ts: &TestSet, rename: impl Fn(&str) -> String) -> TestSet {
    let mut b = TestSetBuilder::new();
    for s in ts.segments() {
        b.add_segment(&rename(&s.segment_id), &s.doc_id, &s.source_lang, &s.text, &s.domain, s.source_error_count)
            .unwrap();
    }
    for t in ts.translations() {
        let pair = ts.pair_of(t);
        b.add_translation(
            &rename(&t.segment_id),
            &pair,
            &t.system_id,
            &t.text,
            t.human_score,
            t.protocol,
            t.is_human,
        )
        .unwrap();
    }
    b.build().unwrap()
}

fn free_text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 \t\n\\\\\"é漢ß]{0,20}".prop_map(|s| format!("x{s}"))
}

fn roundtrip_testset() -> impl Strategy<Value = TestSet> {
    prop::collection::vec((free_text(), free_text(), prop::option::of(0u32..5), prop::option::of(0.0f64..100.0)), 1..6)
        .prop_map(|rows| {
            let mut b = TestSetBuilder::new();
            let pair = LangPair::new("en", "de");
            for (i, (src, tgt, errors, score)) in rows.into_iter().enumerate() {
                let id = format!("s{i}");
                b.add_segment(&id, "d", "en", &src, "news", errors).unwrap();
                let protocol = score.map(|_| Protocol::Esa);
                b.add_translation(&id, &pair, "m", &tgt, score, protocol, i % 2 == 0).unwrap();
            }
            b.build().unwrap()
        })
}

fn per_segment_means(ts: &TestSet) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for t in ts.translations() {
        let e = acc.entry(t.segment_id.clone()).or_default();
        e.0 += t.human_score.unwrap();
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

fn selected_ids(est: &DifficultyEstimate, ts: &TestSet, k: usize) -> Vec<String> {
    select_top(est, ts, Budget::Count(k), SelectionScope::Src, &PerfectRule::ByProtocol)
        .unwrap()
        .selected
        .into_iter()
        .map(|s| s.segment_id)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jsonl_and_tsv_roundtrip(ts in roundtrip_testset()) {
        for format in [TestSetFormat::Jsonl, TestSetFormat::Tsv] {
            let mut buf = Vec::new();
            match format {
                TestSetFormat::Jsonl => ts.write_jsonl(&mut buf).unwrap(),
                TestSetFormat::Tsv => ts.write_tsv(&mut buf).unwrap(),
            }
            let back = read_testset(&buf[..], format, &LoadOptions::default(), "mem").unwrap();
            prop_assert_eq!(&back, &ts);
        }
    }

    #[test]
    fn source_only_estimates_ignore_language_and_system(ts in small_testset(), seed in any::<u64>()) {
        for est in [text_length_estimate("len", &ts, Tokenizer::UnicodeWords), random_estimator(&ts, seed)] {
            for t in ts.translations() {
                let full = est.lookup(&t.segment_id, Some(&t.target_lang), Some(&t.system_id));
                prop_assert_eq!(full, est.lookup(&t.segment_id, None, None));
                prop_assert_eq!(full, est.lookup(&t.segment_id, Some("xx"), Some("nobody")));
            }
        }
    }

    #[test]
    fn full_oracle_reproduces_human_scores(ts in small_testset()) {
        let est = oracle(&ts, OracleLevel::Full).unwrap();
        for t in ts.translations() {
            prop_assert_eq!(est.lookup(&t.segment_id, Some(&t.target_lang), Some(&t.system_id)), t.human_score);
        }
    }

    #[test]
    fn full_oracle_dec_is_one(ts in small_testset()) {
        let est = oracle(&ts, OracleLevel::Full).unwrap();
        let report = dec(&est, &ts, Grouping::BySystem, SkipPolicy::Skip).unwrap();
        // every cell with a non-tied gold pair is defined and equal to 1
        for c in &report.cells {
            if let Some(v) = c.value() {
                prop_assert!((v - 1.0).abs() < 1e-12);
            }
        }
        if report.skipped.is_empty() {
            prop_assert_eq!(report.dec, Some(1.0));
        }
    }

    #[test]
    fn dec_and_selection_are_affine_invariant(ts in small_testset(), seed in any::<u64>(), a in 0.01f64..50.0, b in -100.0f64..100.0, k in 1usize..14) {
        let est = random_estimator(&ts, seed);
        let moved = est.affine(a, b);
        let r1 = dec(&est, &ts, Grouping::BySystem, SkipPolicy::Zero);
        let r2 = dec(&moved, &ts, Grouping::BySystem, SkipPolicy::Zero);
        if let (Ok(r1), Ok(r2)) = (r1, r2) {
            for (c1, c2) in r1.cells.iter().zip(&r2.cells) {
                prop_assert_eq!(c1.value(), c2.value());
            }
            prop_assert_eq!(r1.dec, r2.dec);
        }
        let k = k.min(ts.segments().len());
        prop_assert_eq!(selected_ids(&est, &ts, k), selected_ids(&moved, &ts, k));
    }

    #[test]
    fn oracle_src_selection_is_optimal(ts in small_testset(), k in 1usize..14) {
        let n = ts.segments().len();
        let k = k.min(n);
        let means = per_segment_means(&ts);
        let values: Vec<f64> = means.values().copied().collect();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize == k {
                let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| values[i]).sum();
                best = best.min(s / k as f64);
            }
        }
        let est = oracle(&ts, OracleLevel::Src).unwrap();
        let ids = selected_ids(&est, &ts, k);
        let got = ids.iter().map(|id| means[id]).sum::<f64>() / k as f64;
        prop_assert!((got - best).abs() < 1e-9, "selected mean {got}, optimum {best}");
    }

    #[test]
    fn oracle_src_curve_is_non_decreasing(ts in small_testset()) {
        let est = oracle(&ts, OracleLevel::Src).unwrap();
        let n = ts.segments().len();
        let grid: Vec<Budget> = (1..=n).map(Budget::Count).collect();
        let sweep = budget_sweep(&est, &ts, &grid, SelectionScope::Src, &PerfectRule::ByProtocol).unwrap();
        for w in sweep.windows(2) {
            prop_assert!(w[1].macro_avg_score >= w[0].macro_avg_score - 1e-9);
        }
        for p in &sweep {
            prop_assert!((0.0..=1.0).contains(&p.macro_pct_perfect));
        }
        let all: Vec<&str> = ts.segments().iter().map(|s| s.segment_id.as_str()).collect();
        let full = mtdiff::numeric::mean(ts.language_pairs().map(|p| avg_score(&all, &ts, p).unwrap())).unwrap();
        prop_assert!((sweep.last().unwrap().macro_avg_score - full).abs() < 1e-9);
    }

    #[test]
    fn histogram_totals_do_not_depend_on_width(ts in small_testset(), w1 in 0.5f64..40.0, w2 in 0.5f64..40.0) {
        for view in HistogramViewKind::ALL {
            let h1 = score_histogram(&ts, None, view, w1, 100.0).unwrap();
            let h2 = score_histogram(&ts, None, view, w2, 100.0).unwrap();
            prop_assert_eq!(h1.bins.iter().map(|b| b.count).sum::<usize>(), h1.total);
            prop_assert_eq!(h2.bins.iter().map(|b| b.count).sum::<usize>(), h2.total);
            prop_assert_eq!(h1.total, h2.total);
        }
    }

    #[test]
    fn permutation_test_against_itself(ts in small_testset(), seed in any::<u64>()) {
        let est = random_estimator(&ts, seed);
        let other = random_estimator(&ts, seed ^ 0x9e37);
        let cfg = PermConfig::new(40, seed);
        if let Ok(t) = perm_both_test(&est, &est, &ts, &cfg) {
            prop_assert_eq!(t.p_value, 1.0);
            prop_assert_eq!(t.p_value_reverse, 1.0);
        }
        if let Ok(t) = perm_both_test(&est, &other, &ts, &cfg) {
            prop_assert!(t.p_value + t.p_value_reverse >= 1.0);
        }
    }

    #[test]
    fn length_anchor_and_diversity_bounds(ts in small_testset()) {
        let vars = source_variables(&ts, None, Tokenizer::UnicodeWords, &ChrfConfig::default()).unwrap();
        for v in &vars {
            if let Some(d) = v.diversity_chrf {
                prop_assert!((0.0..=100.0).contains(&d));
            }
            if let Some(u) = v.unique_outputs {
                prop_assert!(u > 0.0 && u <= 1.0);
            }
        }
        let len = text_length_estimate("len", &ts, Tokenizer::UnicodeWords);
        let report = pitfall_correlations(&[len], &ts, &vars, PitfallAggregation::Pooled).unwrap();
        if let Some(Correlation::Defined { r, .. }) = report.get("len", Variable::SourceLength) {
            prop_assert_eq!(*r, -1.0);
        }
    }

    #[test]
    fn segment_order_does_not_change_correlations(ts in small_testset(), seed in any::<u64>(), perm_seed in any::<u64>()) {
        // reversing a seeded key order reorders segments without touching their data
        let ids: Vec<String> = ts.segments().iter().map(|s| s.segment_id.clone()).collect();
        let mut keys: Vec<(u64, String)> = ids.iter().map(|id| (mtdiff::estimators::random_score(perm_seed, id).to_bits(), id.clone())).collect();
        keys.sort();
        let rename: BTreeMap<String, String> = keys.iter().enumerate().map(|(i, (_, id))| (id.clone(), format!("p{i:03}"))).collect();
        let shuffled = relabel(&ts, |id| rename[id].clone());

        let est = random_estimator(&ts, seed);
        let moved = DifficultyEstimate::new(
            est.name.clone(),
            mtdiff::corpus::ScoreMap::from_entries(est.scores.iter().map(|(mut k, v)| {
                k.segment_id = rename[&k.segment_id].clone();
                (k, v)
            }))
            .unwrap(),
        );
        let vars = source_variables(&ts, None, Tokenizer::UnicodeWords, &ChrfConfig::default()).unwrap();
        let vars2 = source_variables(&shuffled, None, Tokenizer::UnicodeWords, &ChrfConfig::default()).unwrap();
        for agg in [PitfallAggregation::PerLanguageMean, PitfallAggregation::Pooled] {
            let a = pitfall_correlations(std::slice::from_ref(&est), &ts, &vars, agg).unwrap();
            let b = pitfall_correlations(std::slice::from_ref(&moved), &shuffled, &vars2, agg).unwrap();
            for var in Variable::ALL {
                let (x, y) = (a.get(&est.name, var).unwrap().value(), b.get(&est.name, var).unwrap().value());
                match (x, y) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12, "{var}: {x} vs {y}"),
                    _ => prop_assert_eq!(x, y),
                }
            }
        }
    }

    #[test]
    fn chrf_bounds_identity_and_trim(a in "\\PC{0,40}", b in "\\PC{0,40}") {
        let cfg = ChrfConfig::default();
        if let Some(v) = chrf(&a, &b, &cfg) {
            prop_assert!((0.0..=100.0).contains(&v));
        }
        if a.chars().any(|c| !c.is_whitespace()) {
            prop_assert_eq!(chrf(&a, &a, &cfg), Some(100.0));
        }
        prop_assert_eq!(chrf(&format!("  {a}\t"), &format!("\n{b} "), &cfg), chrf(&a, &b, &cfg));
    }
}

#[test]
fn rank_clusters_are_affine_invariant() {
    let ts = synthetic_testset(&SyntheticConfig {
        segments: 30,
        systems: 3,
        languages: 2,
        seed: 5,
        latent_weight: 0.6,
        ..SyntheticConfig::default()
    });
    let ests = vec![
        oracle(&ts, OracleLevel::Src).unwrap(),
        random_estimator(&ts, 1),
        text_length_estimate("len", &ts, Tokenizer::UnicodeWords),
    ];
    // each estimate gets its own transform
    let moved: Vec<DifficultyEstimate> = ests
        .iter()
        .zip([(1.0, 0.0), (3.5, -20.0), (0.01, 7.0)])
        .map(|(e, (a, b))| e.affine(a, b))
        .collect();
    let cfg = PermConfig::new(200, 11);
    let r1 = rank_clusters(&ests, &ts, 0.05, &cfg).unwrap();
    let r2 = rank_clusters(&moved, &ts, 0.05, &cfg).unwrap();
    assert_eq!(r1.ranks, r2.ranks);
    assert_eq!(r1.p_values, r2.p_values);
}

#[test]
fn builder_rejects_invariant_violations() {
    let pair = LangPair::new("en", "de");
    let mut b = TestSetBuilder::new();
    b.add_segment("s", "d", "en", "Hello.", "news", None).unwrap();
    assert!(b.add_segment("s", "d", "en", "Different.", "news", None).is_err());
    assert!(b.add_segment("t", "d", "en", "   ", "news", None).is_err());
    assert!(b.add_translation("zz", &pair, "m", "x", Some(1.0), Some(Protocol::Esa), false).is_err());
    assert!(b
        .add_translation("s", &LangPair::new("fr", "de"), "m", "x", Some(1.0), Some(Protocol::Esa), false)
        .is_err());
    b.add_translation("s", &pair, "m", "x", Some(1.0), Some(Protocol::Esa), false).unwrap();
    assert!(b.add_translation("s", &pair, "m", "y", Some(2.0), Some(Protocol::Esa), false).is_err());
}
