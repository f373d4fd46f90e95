//! CoNLL-U ingestion, reduced to what the syntactic heuristic needs: head
//! indices per token.
//!
//! Each sentence belongs to the segment named by the nearest preceding
//! `# segment_id = ...` comment, so a multi-sentence segment is written as
//! several sentences under one (or repeated) segment comment. Multiword
//! ranges (`3-4`) and empty nodes (`5.1`) are skipped.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// A single-rooted, acyclic dependency tree. `heads[i]` is the head of token
/// `i + 1`; head `0` is the virtual root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyTree {
    heads: Vec<usize>,
}

impl DependencyTree {
    pub fn new(heads: Vec<usize>) -> std::result::Result<Self, String> {
        if heads.is_empty() {
            return Err("empty sentence".into());
        }
        let n = heads.len();
        if let Some((i, h)) = heads.iter().enumerate().find(|(_, &h)| h > n) {
            return Err(format!("token {} has head {h} outside 0..={n}", i + 1));
        }
        let roots = heads.iter().filter(|&&h| h == 0).count();
        if roots != 1 {
            return Err(format!("expected exactly one root, found {roots}"));
        }
        let tree = DependencyTree { heads };
        tree.depths()?;
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn heads(&self) -> &[usize] {
        &self.heads
    }

    /// Longest path length, in edges, from the virtual root to a token.
    /// A single token has height 1; a chain of five tokens has height 5.
    pub fn height(&self) -> usize {
        self.depths().expect("validated at construction").into_iter().max().unwrap_or(0)
    }

    fn depths(&self) -> std::result::Result<Vec<usize>, String> {
        let n = self.heads.len();
        let mut depth = vec![0usize; n + 1];
        // 0 = unvisited, 1 = on current path, 2 = done
        let mut state = vec![0u8; n + 1];
        state[0] = 2;
        let mut path = Vec::new();
        for start in 1..=n {
            let mut node = start;
            while state[node] == 0 {
                state[node] = 1;
                path.push(node);
                node = self.heads[node - 1];
            }
            if state[node] == 1 {
                return Err(format!("cycle through token {node}"));
            }
            while let Some(v) = path.pop() {
                depth[v] = depth[self.heads[v - 1]] + 1;
                state[v] = 2;
            }
        }
        Ok(depth.split_off(1))
    }
}

/// Dependency trees per segment, plus the segments rejected at load time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParseTable {
    trees: BTreeMap<String, Vec<DependencyTree>>,
    rejected: BTreeMap<String, String>,
}

impl ParseTable {
    pub fn trees(&self, segment_id: &str) -> Option<&[DependencyTree]> {
        self.trees.get(segment_id).map(Vec::as_slice)
    }

    /// Segments dropped because one of their sentences was not a valid tree.
    pub fn rejected(&self) -> &BTreeMap<String, String> {
        &self.rejected
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn insert(&mut self, segment_id: impl Into<String>, tree: DependencyTree) {
        let id = segment_id.into();
        if !self.rejected.contains_key(&id) {
            self.trees.entry(id).or_default().push(tree);
        }
    }

    fn reject(&mut self, segment_id: String, reason: String) {
        self.trees.remove(&segment_id);
        self.rejected.entry(segment_id).or_insert(reason);
    }
}

pub fn load_parses(path: impl AsRef<Path>) -> Result<ParseTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_parses(BufReader::new(file), &path.display().to_string())
}

pub fn read_parses<R: BufRead>(reader: R, origin: &str) -> Result<ParseTable> {
    let mut table = ParseTable::default();
    let mut segment: Option<String> = None;
    let mut heads: Vec<usize> = Vec::new();
    let mut sentence_start = 0usize;

    let flush = |table: &mut ParseTable, segment: &Option<String>, heads: &mut Vec<usize>, start: usize| -> Result<()> {
        if heads.is_empty() {
            return Ok(());
        }
        let Some(seg) = segment.clone() else {
            return Err(Error::Parse {
                origin: origin.to_string(),
                line: start,
                message: "sentence without a preceding `# segment_id` comment".into(),
            });
        };
        match DependencyTree::new(std::mem::take(heads)) {
            Ok(tree) => table.insert(seg, tree),
            Err(reason) => {
                log::warn!("{origin}:{start}: rejecting parse of segment `{seg}`: {reason}");
                table.reject(seg, format!("line {start}: {reason}"));
            }
        }
        Ok(())
    };

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let parse_err = |message: String| Error::Parse {
            origin: origin.to_string(),
            line: lineno,
            message,
        };
        let line = line.map_err(|e| parse_err(e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut table, &segment, &mut heads, sentence_start)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "segment_id" {
                    flush(&mut table, &segment, &mut heads, sentence_start)?;
                    segment = Some(value.trim().to_string());
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(parse_err(format!("expected 10 columns, found {}", cols.len())));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|e| parse_err(format!("bad token id `{}`: {e}", cols[0])))?;
        let head: usize = cols[6]
            .parse()
            .map_err(|e| parse_err(format!("bad head `{}`: {e}", cols[6])))?;
        if heads.is_empty() {
            sentence_start = lineno;
        }
        if id != heads.len() + 1 {
            return Err(parse_err(format!("token id {id} out of sequence")));
        }
        heads.push(head);
    }
    flush(&mut table, &segment, &mut heads, sentence_start)?;
    Ok(table)
}
