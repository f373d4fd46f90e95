use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tokenize::normalize_token;

/// Token frequencies on a Zipf-like scale (higher = more common).
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyLexicon {
    entries: HashMap<String, f64>,
    pub floor: f64,
}

impl FrequencyLexicon {
    /// Build from raw `(token, value)` pairs. Tokens are normalized; when two
    /// spellings collapse to one key the larger value is kept.
    pub fn new<I, S>(entries: I, floor: f64) -> std::result::Result<Self, String>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        if !floor.is_finite() {
            return Err(format!("non-finite floor {floor}"));
        }
        let mut map = HashMap::new();
        for (token, value) in entries {
            if !value.is_finite() {
                return Err(format!("non-finite value for `{}`", token.as_ref()));
            }
            map.entry(normalize_token(token.as_ref()))
                .and_modify(|v: &mut f64| *v = v.max(value))
                .or_insert(value);
        }
        Ok(FrequencyLexicon { entries: map, floor })
    }

    /// Frequency of a token, or the floor when out of vocabulary.
    pub fn lookup(&self, token: &str) -> f64 {
        self.get(token).unwrap_or(self.floor)
    }

    pub fn get(&self, token: &str) -> Option<f64> {
        self.entries.get(&normalize_token(token)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Load a `token<TAB>value` file.
pub fn load_frequency_lexicon(path: impl AsRef<Path>, floor: f64) -> Result<FrequencyLexicon> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let parse_err = |message: String| Error::Parse {
            origin: origin.clone(),
            line: i + 1,
            message,
        };
        let line = line.map_err(|e| parse_err(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (token, value) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected `token<TAB>value`".into()))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("bad value `{value}`: {e}")))?;
        if !value.is_finite() {
            return Err(parse_err(format!("non-finite value for `{token}`")));
        }
        rows.push((token.to_string(), value));
    }
    FrequencyLexicon::new(rows, floor).map_err(Error::InvalidInput)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn lookup_from_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "the\t7.73\nCat\t4.5").unwrap();
        let lex = load_frequency_lexicon(f.path(), 0.0).unwrap();
        assert_eq!(lex.lookup("the"), 7.73);
        assert_eq!(lex.lookup("THE"), 7.73);
        assert_eq!(lex.lookup("cat"), 4.5);
        assert_eq!(lex.lookup("zyzzyva"), 0.0);
    }

    #[test]
    fn case_collisions_keep_max() {
        let lex = FrequencyLexicon::new([("The", 5.0), ("the", 7.0)], 0.0).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.lookup("the"), 7.0);
    }

    #[test]
    fn malformed_rows_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "the 7.73").unwrap();
        assert!(matches!(load_frequency_lexicon(f.path(), 0.0), Err(Error::Parse { line: 1, .. })));
        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "the\tNaN").unwrap();
        assert!(load_frequency_lexicon(g.path(), 0.0).is_err());
    }
}
