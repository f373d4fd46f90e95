use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DifficultyEstimate;
use crate::corpus::{FrequencyLexicon, ParseTable, ScoreKey, ScoreMap, TestSet};
use crate::numeric;
use crate::tokenize::Tokenizer;

/// Negated token count: longer texts get lower scores.
pub fn estimate_text_length(text: &str, tokenizer: Tokenizer) -> f64 {
    let n = tokenizer.count(text);
    if n == 0 {
        log::warn!("text has no tokens under {tokenizer:?}: {text:?}");
    }
    -(n as f64)
}

/// Mean lexicon frequency of the text's tokens (OOV tokens count as the
/// lexicon floor). More common words give higher, easier scores.
///
/// `paper_literal` negates the mean, i.e. the "negative average frequency"
/// reading of the heuristic.
pub fn estimate_word_rarity(text: &str, lexicon: &FrequencyLexicon, tokenizer: Tokenizer, paper_literal: bool) -> f64 {
    let tokens = tokenizer.tokens(text);
    let mean = numeric::mean(tokens.iter().map(|t| lexicon.lookup(t))).unwrap_or_else(|| {
        log::warn!("text has no tokens under {tokenizer:?}: {text:?}");
        lexicon.floor
    });
    if paper_literal {
        -mean
    } else {
        mean
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightAggregation {
    #[default]
    Max,
    Mean,
}

/// Negated dependency-tree height; `None` when the segment has no usable parse.
pub fn estimate_syntactic_complexity(segment_id: &str, parses: &ParseTable, aggregation: HeightAggregation) -> Option<f64> {
    let trees = parses.trees(segment_id)?;
    let heights = trees.iter().map(|t| t.height() as f64);
    let height = match aggregation {
        HeightAggregation::Max => heights.fold(None, |acc: Option<f64>, h| Some(acc.map_or(h, |a| a.max(h)))),
        HeightAggregation::Mean => numeric::mean(heights),
    }?;
    Some(-height)
}

/// Score every segment of a test set with a per-text function, in parallel,
/// assembling results in segment order.
fn per_segment(name: &str, testset: &TestSet, f: impl Fn(&str, &str) -> Option<f64> + Sync) -> DifficultyEstimate {
    let values: Vec<(String, Option<f64>)> = testset
        .segments()
        .par_iter()
        .map(|s| (s.segment_id.clone(), f(&s.segment_id, &s.text)))
        .collect();
    let mut scores = ScoreMap::new();
    let mut diagnostics = Vec::new();
    for (id, v) in values {
        match v {
            Some(v) => scores.insert(ScoreKey::source(id), v).expect("unique segment ids"),
            None => diagnostics.push(format!("{name}: no estimate for segment `{id}`")),
        }
    }
    DifficultyEstimate {
        name: name.to_string(),
        scores,
        diagnostics,
    }
}

pub fn text_length_estimate(name: &str, testset: &TestSet, tokenizer: Tokenizer) -> DifficultyEstimate {
    per_segment(name, testset, |_, text| Some(estimate_text_length(text, tokenizer)))
}

pub fn word_rarity_estimate(
    name: &str,
    testset: &TestSet,
    lexicon: &FrequencyLexicon,
    tokenizer: Tokenizer,
    paper_literal: bool,
) -> DifficultyEstimate {
    per_segment(name, testset, |_, text| {
        Some(estimate_word_rarity(text, lexicon, tokenizer, paper_literal))
    })
}

pub fn syntactic_complexity_estimate(
    name: &str,
    testset: &TestSet,
    parses: &ParseTable,
    aggregation: HeightAggregation,
) -> DifficultyEstimate {
    per_segment(name, testset, |id, _| estimate_syntactic_complexity(id, parses, aggregation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{read_parses, DependencyTree};
    use proptest::prelude::*;

    #[test]
    fn text_length_examples() {
        assert_eq!(estimate_text_length("Washington", Tokenizer::UnicodeWords), -1.0);
        assert_eq!(
            estimate_text_length("We cannot allow this to happen.", Tokenizer::UnicodeWords),
            -6.0
        );
        assert_eq!(estimate_text_length("!!!", Tokenizer::UnicodeWords), 0.0);
    }

    #[test]
    fn word_rarity_examples() {
        let lex = FrequencyLexicon::new([("a", 7.0), ("b", 5.0), ("the", 7.73)], 0.0).unwrap();
        assert_eq!(estimate_word_rarity("a b", &lex, Tokenizer::UnicodeWords, false), 6.0);
        assert_eq!(estimate_word_rarity("qqq zzz", &lex, Tokenizer::UnicodeWords, false), 0.0);
        let lex1 = FrequencyLexicon::new([("the", 7.73)], 1.0).unwrap();
        let v = estimate_word_rarity("The xylograph", &lex1, Tokenizer::UnicodeWords, false);
        assert!((v - 4.365).abs() < 1e-12, "{v}");
        assert_eq!(estimate_word_rarity("a b", &lex, Tokenizer::UnicodeWords, true), -6.0);
    }

    #[test]
    fn syntactic_complexity_examples() {
        let mut parses = ParseTable::default();
        parses.insert("flat", DependencyTree::new(vec![0, 1, 1, 1]).unwrap());
        parses.insert("single", DependencyTree::new(vec![0]).unwrap());
        parses.insert("chain", DependencyTree::new(vec![0, 1, 2, 3, 4]).unwrap());
        parses.insert("multi", DependencyTree::new(vec![0, 1]).unwrap());
        parses.insert("multi", DependencyTree::new(vec![0, 1, 2, 3]).unwrap());
        let f = |id| estimate_syntactic_complexity(id, &parses, HeightAggregation::Max);
        assert_eq!(f("single"), Some(-1.0));
        assert_eq!(f("flat"), Some(-2.0));
        assert_eq!(f("chain"), Some(-5.0));
        assert_eq!(f("multi"), Some(-4.0));
        assert_eq!(f("missing"), None);
        assert_eq!(
            estimate_syntactic_complexity("multi", &parses, HeightAggregation::Mean),
            Some(-3.0)
        );
    }

    #[test]
    fn chain_from_conllu() {
        let text = "# segment_id = s\n1\ta\t_\t_\t_\t_\t0\t_\t_\t_\n2\tb\t_\t_\t_\t_\t1\t_\t_\t_\n3\tc\t_\t_\t_\t_\t2\t_\t_\t_\n4\td\t_\t_\t_\t_\t3\t_\t_\t_\n5\te\t_\t_\t_\t_\t4\t_\t_\t_\n";
        let parses = read_parses(text.as_bytes(), "m").unwrap();
        assert_eq!(
            estimate_syntactic_complexity("s", &parses, HeightAggregation::Max),
            Some(-5.0)
        );
    }

    proptest! {
        #[test]
        fn longer_text_scores_strictly_lower(words in prop::collection::vec("[a-z]{1,8}", 1..20), extra in "[a-z]{1,8}") {
            let short = words.join(" ");
            let long = format!("{short} {extra}");
            prop_assert!(estimate_text_length(&long, Tokenizer::UnicodeWords) < estimate_text_length(&short, Tokenizer::UnicodeWords));
        }

        #[test]
        fn rarer_words_score_strictly_lower(freqs in prop::collection::vec(1.0f64..8.0, 1..10), idx in any::<prop::sample::Index>(), drop in 0.1f64..1.0) {
            let tokens: Vec<String> = (0..freqs.len()).map(|i| format!("w{i}")).collect();
            let text = tokens.join(" ");
            let lex = FrequencyLexicon::new(tokens.iter().cloned().zip(freqs.iter().copied()), 0.0).unwrap();
            let i = idx.index(freqs.len());
            let mut rarer = freqs.clone();
            rarer[i] -= drop;
            let lex_rare = FrequencyLexicon::new(tokens.iter().cloned().zip(rarer), 0.0).unwrap();
            prop_assert!(
                estimate_word_rarity(&text, &lex_rare, Tokenizer::UnicodeWords, false)
                    < estimate_word_rarity(&text, &lex, Tokenizer::UnicodeWords, false)
            );
        }

        #[test]
        fn deeper_chain_scores_strictly_lower(n in 1usize..30) {
            let chain = |n: usize| DependencyTree::new((0..n).collect()).unwrap();
            let mut parses = ParseTable::default();
            parses.insert("a", chain(n));
            parses.insert("b", chain(n + 1));
            let a = estimate_syntactic_complexity("a", &parses, HeightAggregation::Max).unwrap();
            let b = estimate_syntactic_complexity("b", &parses, HeightAggregation::Max).unwrap();
            prop_assert!(b < a);
        }
    }
}
