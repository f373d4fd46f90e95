use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marker used in score files for "any language" / "any system".
pub const WILDCARD: &str = "*";

/// Direction of a score column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Higher means easier (better expected translation quality).
    QualityLike,
    /// Higher means harder.
    DifficultyLike,
}

impl std::str::FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "quality_like" | "quality" => Ok(Orientation::QualityLike),
            "difficulty_like" | "difficulty" => Ok(Orientation::DifficultyLike),
            _ => Err(format!("unknown orientation `{s}`")),
        }
    }
}

/// Key of a score entry. `None` components are wildcards.
///
/// Only three shapes are valid: `(seg, *, *)`, `(seg, lang, *)` and
/// `(seg, lang, system)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScoreKey {
    pub segment_id: String,
    pub target_lang: Option<String>,
    pub system_id: Option<String>,
}

impl ScoreKey {
    pub fn source(segment_id: impl Into<String>) -> Self {
        ScoreKey {
            segment_id: segment_id.into(),
            target_lang: None,
            system_id: None,
        }
    }

    pub fn language(segment_id: impl Into<String>, target_lang: impl Into<String>) -> Self {
        ScoreKey {
            segment_id: segment_id.into(),
            target_lang: Some(target_lang.into()),
            system_id: None,
        }
    }

    pub fn exact(segment_id: impl Into<String>, target_lang: impl Into<String>, system_id: impl Into<String>) -> Self {
        ScoreKey {
            segment_id: segment_id.into(),
            target_lang: Some(target_lang.into()),
            system_id: Some(system_id.into()),
        }
    }
}

impl fmt::Display for ScoreKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.segment_id,
            self.target_lang.as_deref().unwrap_or(WILDCARD),
            self.system_id.as_deref().unwrap_or(WILDCARD)
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
struct LanguageScores {
    any_system: Option<f64>,
    systems: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct SegmentScores {
    any_language: Option<f64>,
    languages: BTreeMap<String, LanguageScores>,
}

/// Scores keyed by `(segment, language?, system?)` with tiered lookup.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreMap {
    segments: BTreeMap<String, SegmentScores>,
    len: usize,
}

impl ScoreMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Insert a finite score; duplicate keys and `(seg, *, system)` keys are rejected.
    pub fn insert(&mut self, key: ScoreKey, value: f64) -> std::result::Result<(), String> {
        if !value.is_finite() {
            return Err(format!("non-finite score {value} for {key}"));
        }
        let seg = self.segments.entry(key.segment_id.clone()).or_default();
        let slot = match (&key.target_lang, &key.system_id) {
            (None, None) => &mut seg.any_language,
            (Some(lang), None) => &mut seg.languages.entry(lang.clone()).or_default().any_system,
            (Some(lang), Some(sys)) => {
                let lang = seg.languages.entry(lang.clone()).or_default();
                if lang.systems.contains_key(sys) {
                    return Err(format!("duplicate key {key}"));
                }
                lang.systems.insert(sys.clone(), value);
                self.len += 1;
                return Ok(());
            }
            (None, Some(_)) => {
                return Err(format!("unsupported key shape {key}: a system requires a language"));
            }
        };
        if slot.is_some() {
            return Err(format!("duplicate key {key}"));
        }
        *slot = Some(value);
        self.len += 1;
        Ok(())
    }

    /// Resolve a query: exact key, then `(seg, lang, *)`, then `(seg, *, *)`.
    /// Tiers whose query component is `None` are skipped.
    pub fn lookup(&self, segment_id: &str, target_lang: Option<&str>, system_id: Option<&str>) -> Option<f64> {
        let seg = self.segments.get(segment_id)?;
        if let Some(lang) = target_lang.and_then(|l| seg.languages.get(l)) {
            if let Some(v) = system_id.and_then(|s| lang.systems.get(s)) {
                return Some(*v);
            }
            if let Some(v) = lang.any_system {
                return Some(v);
            }
        }
        seg.any_language
    }

    /// Whether any entry exists for the segment.
    pub fn covers_segment(&self, segment_id: &str) -> bool {
        self.segments.contains_key(segment_id)
    }

    /// Whether every key uses wildcard language and system.
    pub fn is_source_only(&self) -> bool {
        self.segments.values().all(|s| s.languages.is_empty())
    }

    /// Entries in key order: segment, then wildcard tiers before concrete ones.
    pub fn iter(&self) -> impl Iterator<Item = (ScoreKey, f64)> + '_ {
        self.segments.iter().flat_map(|(seg, s)| {
            let any = s.any_language.map(|v| (ScoreKey::source(seg.clone()), v));
            let langs = s.languages.iter().flat_map(move |(lang, l)| {
                let any = l.any_system.map(|v| (ScoreKey::language(seg.clone(), lang.clone()), v));
                let systems = l
                    .systems
                    .iter()
                    .map(move |(sys, v)| (ScoreKey::exact(seg.clone(), lang.clone(), sys.clone()), *v));
                any.into_iter().chain(systems)
            });
            any.into_iter().chain(langs)
        })
    }

    /// Apply `f` to every value, keeping keys.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ScoreMap {
        let mut out = self.clone();
        for seg in out.segments.values_mut() {
            if let Some(v) = seg.any_language.as_mut() {
                *v = f(*v);
            }
            for lang in seg.languages.values_mut() {
                if let Some(v) = lang.any_system.as_mut() {
                    *v = f(*v);
                }
                for v in lang.systems.values_mut() {
                    *v = f(*v);
                }
            }
        }
        out
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", SCORE_HEADER)?;
        for (key, v) in self.iter() {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                key.segment_id,
                key.target_lang.as_deref().unwrap_or(WILDCARD),
                key.system_id.as_deref().unwrap_or(WILDCARD),
                v
            )?;
        }
        Ok(())
    }
}

impl ScoreMap {
    /// Build from entries, rejecting the same inputs as [`ScoreMap::insert`].
    pub fn from_entries<T: IntoIterator<Item = (ScoreKey, f64)>>(iter: T) -> std::result::Result<Self, String> {
        let mut map = ScoreMap::new();
        for (k, v) in iter {
            map.insert(k, v)?;
        }
        Ok(map)
    }
}

const SCORE_HEADER: &str = "segment_id\ttarget_lang\tsystem_id\tscore";

/// A named score file, as produced by an external estimator or metric.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    pub name: String,
    pub orientation: Orientation,
    pub scores: ScoreMap,
}

impl ScoreTable {
    pub fn lookup(&self, segment_id: &str, target_lang: Option<&str>, system_id: Option<&str>) -> Option<f64> {
        self.scores.lookup(segment_id, target_lang, system_id)
    }
}

/// Load a score TSV (`segment_id, target_lang|*, system_id|*, score`).
/// A leading header row is optional.
pub fn load_scores(path: impl AsRef<Path>, name: &str, orientation: Orientation) -> Result<ScoreTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_scores(BufReader::new(file), name, orientation, &path.display().to_string())
}

pub fn read_scores<R: BufRead>(reader: R, name: &str, orientation: Orientation, origin: &str) -> Result<ScoreTable> {
    let mut scores = ScoreMap::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let parse_err = |message: String| Error::Parse {
            origin: origin.to_string(),
            line: lineno,
            message,
        };
        let line = line.map_err(|e| parse_err(e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || (lineno == 1 && line == SCORE_HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [seg, lang, sys, score] = fields[..] else {
            return Err(parse_err(format!("expected 4 fields, found {}", fields.len())));
        };
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("bad score `{score}`: {e}")))?;
        let wild = |s: &str| (s != WILDCARD && !s.is_empty()).then(|| s.to_string());
        let key = ScoreKey {
            segment_id: seg.to_string(),
            target_lang: wild(lang),
            system_id: wild(sys),
        };
        scores.insert(key, score).map_err(|message| Error::Validation {
            origin: origin.to_string(),
            line: lineno,
            message,
        })?;
    }
    Ok(ScoreTable {
        name: name.to_string(),
        orientation,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<ScoreTable> {
        read_scores(s.as_bytes(), "t", Orientation::QualityLike, "mem")
    }

    #[test]
    fn source_rows_answer_every_query() {
        let t = read("s1\t*\t*\t0.5\ns2\t*\t*\t0.7\ns3\t*\t*\t0.9\n").unwrap();
        for (lang, sys) in [("de", "A"), ("ja", "B"), ("cs", "human")] {
            assert_eq!(t.lookup("s2", Some(lang), Some(sys)), Some(0.7));
        }
        assert_eq!(t.lookup("s1", None, None), Some(0.5));
        assert!(t.scores.is_source_only());
    }

    #[test]
    fn language_tier_wins_over_source_tier() {
        let t = read("s1\ten-de\t*\t2\ns1\t*\t*\t1\n").unwrap();
        assert_eq!(t.lookup("s1", Some("en-de"), Some("A")), Some(2.0));
        assert_eq!(t.lookup("s1", Some("en-ja"), Some("A")), Some(1.0));
        assert_eq!(t.lookup("s1", None, None), Some(1.0));
    }

    #[test]
    fn exact_tier_wins() {
        let t = read("s1\tde\tA\t3\ns1\tde\t*\t2\n").unwrap();
        assert_eq!(t.lookup("s1", Some("de"), Some("A")), Some(3.0));
        assert_eq!(t.lookup("s1", Some("de"), Some("B")), Some(2.0));
        assert_eq!(t.lookup("s1", None, None), None);
    }

    #[test]
    fn empty_file_gives_empty_table() {
        let t = read("").unwrap();
        assert!(t.scores.is_empty());
        assert_eq!(t.lookup("s1", Some("de"), Some("A")), None);
    }

    #[test]
    fn duplicates_and_non_finite_rejected() {
        assert!(matches!(read("s1\t*\t*\t1\ns1\t*\t*\t2\n"), Err(Error::Validation { line: 2, .. })));
        assert!(matches!(read("s1\t*\t*\tNaN\n"), Err(Error::Validation { line: 1, .. })));
        assert!(matches!(read("s1\t*\t*\tinf\n"), Err(Error::Validation { .. })));
        assert!(matches!(read("s1\t*\t1\n"), Err(Error::Parse { .. })));
        assert!(matches!(read("s1\t*\tA\t1\n"), Err(Error::Validation { .. })));
    }

    #[test]
    fn write_then_read_is_identity() {
        let t = read("s2\tde\tA\t-1.25\ns1\t*\t*\t0.1\ns2\tde\t*\t3\n").unwrap();
        let mut buf = Vec::new();
        t.scores.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(SCORE_HEADER));
        let back = read(&text).unwrap();
        assert_eq!(back.scores, t.scores);
        let mut again = Vec::new();
        back.scores.write_tsv(&mut again).unwrap();
        assert_eq!(buf, again);
    }
}
