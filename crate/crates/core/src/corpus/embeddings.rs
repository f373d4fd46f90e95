use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Sentence embeddings of translations, keyed by `(segment, target_lang, system)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, HashMap<String, HashMap<String, Vec<f64>>>>,
    len: usize,
}

impl EmbeddingTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Dimension shared by all vectors; 0 for an empty table.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, segment_id: &str, target_lang: &str, system_id: &str, vector: Vec<f64>) -> std::result::Result<(), String> {
        if vector.is_empty() {
            return Err("empty vector".into());
        }
        if self.len > 0 && vector.len() != self.dimension {
            return Err(format!(
                "vector of dimension {} in a table of dimension {}",
                vector.len(),
                self.dimension
            ));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err("non-finite vector component".into());
        }
        let slot = self
            .vectors
            .entry(segment_id.to_string())
            .or_default()
            .entry(target_lang.to_string())
            .or_default();
        if slot.contains_key(system_id) {
            return Err(format!("duplicate embedding ({segment_id}, {target_lang}, {system_id})"));
        }
        slot.insert(system_id.to_string(), vector);
        self.dimension = self.dimension.max(slot[system_id].len());
        self.len += 1;
        Ok(())
    }

    pub fn get(&self, segment_id: &str, target_lang: &str, system_id: &str) -> Option<&[f64]> {
        self.vectors
            .get(segment_id)?
            .get(target_lang)?
            .get(system_id)
            .map(Vec::as_slice)
    }
}

#[derive(Deserialize)]
struct Row {
    segment_id: String,
    target_lang: String,
    system_id: String,
    vector: Vec<f64>,
}

/// Load JSONL rows `{"segment_id","target_lang","system_id","vector":[...]}`.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut table = EmbeddingTable::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(&line).map_err(|e| Error::Parse {
            origin: origin.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        table
            .insert(&row.segment_id, &row.target_lang, &row.system_id, row.vector)
            .map_err(|message| Error::Validation {
                origin: origin.clone(),
                line: i + 1,
                message,
            })?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(rows: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for r in rows {
            writeln!(f, "{r}").unwrap();
        }
        f
    }

    #[test]
    fn loads_uniform_vectors() {
        let f = file(&[
            r#"{"segment_id":"s1","target_lang":"de","system_id":"A","vector":[1.0,0.0]}"#,
            r#"{"segment_id":"s1","target_lang":"de","system_id":"B","vector":[0.0,1.0]}"#,
        ]);
        let t = load_embeddings(f.path()).unwrap();
        assert_eq!(t.dimension(), 2);
        assert_eq!(t.get("s1", "de", "B"), Some(&[0.0, 1.0][..]));
        assert_eq!(t.get("s1", "ja", "B"), None);
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let f = file(&[
            r#"{"segment_id":"s1","target_lang":"de","system_id":"A","vector":[1.0,0.0]}"#,
            r#"{"segment_id":"s2","target_lang":"de","system_id":"A","vector":[1.0,0.0,2.0]}"#,
        ]);
        assert!(matches!(load_embeddings(f.path()), Err(Error::Validation { line: 2, .. })));
    }

    #[test]
    fn duplicates_rejected() {
        let row = r#"{"segment_id":"s1","target_lang":"de","system_id":"A","vector":[1.0]}"#;
        assert!(load_embeddings(file(&[row, row]).path()).is_err());
    }
}
