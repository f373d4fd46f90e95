use serde::{Deserialize, Serialize};

use crate::corpus::{LangPair, Translation, TestSet};
use crate::error::{Error, Result};
use crate::numeric;

/// Which human scores count as a perfect translation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerfectRule {
    /// ESA 100, MQM 0; translations with another or no protocol never count.
    #[default]
    ByProtocol,
    /// Scores equal to the given value.
    Equals(f64),
}

impl PerfectRule {
    pub fn is_perfect(&self, translation: &Translation, score: f64) -> bool {
        match self {
            PerfectRule::ByProtocol => translation
                .protocol
                .and_then(|p| p.perfect_score())
                .is_some_and(|p| score == p),
            PerfectRule::Equals(v) => score == *v,
        }
    }
}

/// Scored cells `(translation, score)` of the subset in one language pair.
fn cells<'a>(subset: &[&str], testset: &'a TestSet, pair: &LangPair) -> Result<Vec<(&'a Translation, f64)>> {
    let systems = testset
        .systems(pair)
        .ok_or_else(|| Error::InvalidInput(format!("language pair {pair} not in test set")))?;
    let mut out = Vec::new();
    let mut missing = Vec::new();
    for seg in subset {
        for sys in systems {
            if let Some(t) = testset.translation(seg, &pair.target, sys) {
                match t.human_score {
                    Some(s) => out.push((t, s)),
                    None => missing.push(format!("({seg}, {}, {sys})", pair.target)),
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingHumanScore(missing.join(", ")));
    }
    Ok(out)
}

/// Mean human score over the subset's translations in `pair`:
/// `1 / (B |M_l|) * sum of d_{m,l}(x)` on a full grid.
pub fn avg_score(subset: &[&str], testset: &TestSet, pair: &LangPair) -> Result<f64> {
    let cells = cells(subset, testset, pair)?;
    numeric::mean(cells.iter().map(|c| c.1))
        .ok_or_else(|| Error::InvalidInput(format!("subset has no translations in {pair}")))
}

/// Fraction of the subset's translations in `pair` with a perfect score.
pub fn pct_perfect(subset: &[&str], testset: &TestSet, pair: &LangPair, rule: &PerfectRule) -> Result<f64> {
    let cells = cells(subset, testset, pair)?;
    if cells.is_empty() {
        return Err(Error::InvalidInput(format!("subset has no translations in {pair}")));
    }
    let perfect = cells.iter().filter(|(t, s)| rule.is_perfect(t, *s)).count();
    Ok(perfect as f64 / cells.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Protocol, TestSetBuilder};

    fn grid(scores: [[f64; 2]; 2], protocol: Protocol) -> TestSet {
        let mut b = TestSetBuilder::new();
        let pair = LangPair::new("en", "de");
        for (s, row) in scores.iter().enumerate() {
            let id = format!("s{s}");
            b.add_segment(&id, "d", "en", "x", "news", None).unwrap();
            for (m, v) in row.iter().enumerate() {
                b.add_translation(&id, &pair, &format!("m{m}"), "y", Some(*v), Some(protocol), false)
                    .unwrap();
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn avg_score_examples() {
        let pair = LangPair::new("en", "de");
        let ts = grid([[100.0, 100.0], [100.0, 100.0]], Protocol::Esa);
        assert_eq!(avg_score(&["s0", "s1"], &ts, &pair).unwrap(), 100.0);
        let ts = grid([[80.0, 60.0], [100.0, 40.0]], Protocol::Esa);
        assert_eq!(avg_score(&["s0", "s1"], &ts, &pair).unwrap(), 70.0);
        assert_eq!(avg_score(&["s0"], &ts, &pair).unwrap(), 70.0);
        assert_eq!(avg_score(&["s1"], &ts, &pair).unwrap(), 70.0);
    }

    #[test]
    fn pct_perfect_examples() {
        let pair = LangPair::new("en", "de");
        let rule = PerfectRule::ByProtocol;
        let ts = grid([[80.0, 60.0], [99.0, 40.0]], Protocol::Esa);
        assert_eq!(pct_perfect(&["s0", "s1"], &ts, &pair, &rule).unwrap(), 0.0);
        let ts = grid([[80.0, 60.0], [100.0, 40.0]], Protocol::Esa);
        assert_eq!(pct_perfect(&["s0", "s1"], &ts, &pair, &rule).unwrap(), 0.25);
        let ts = grid([[0.0, -1.0], [0.0, -5.0]], Protocol::Mqm);
        assert_eq!(pct_perfect(&["s0", "s1"], &ts, &pair, &rule).unwrap(), 0.5);
        assert_eq!(avg_score(&["s0", "s1"], &ts, &pair).unwrap(), -1.5);
        assert_eq!(pct_perfect(&["s0", "s1"], &ts, &pair, &PerfectRule::Equals(-1.0)).unwrap(), 0.25);
    }

    #[test]
    fn missing_scores_are_listed() {
        let mut b = TestSetBuilder::new();
        let pair = LangPair::new("en", "de");
        b.add_segment("s0", "d", "en", "x", "news", None).unwrap();
        b.add_translation("s0", &pair, "m0", "y", None, None, false).unwrap();
        b.add_translation("s0", &pair, "m1", "y", None, None, false).unwrap();
        let ts = b.build().unwrap();
        match avg_score(&["s0"], &ts, &pair) {
            Err(Error::MissingHumanScore(cells)) => {
                assert!(cells.contains("m0") && cells.contains("m1"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_subset_is_an_error() {
        let ts = grid([[1.0, 2.0], [3.0, 4.0]], Protocol::Esa);
        assert!(avg_score(&[], &ts, &LangPair::new("en", "de")).is_err());
        assert!(avg_score(&["s0"], &ts, &LangPair::new("en", "ja")).is_err());
    }
}
