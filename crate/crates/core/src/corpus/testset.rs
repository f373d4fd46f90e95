use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tsv;
use crate::error::{Error, Result};
use crate::tokenize::normalize_text;

/// Source and target language of a translation direction, displayed as `en-de`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LangPair {
    pub source: String,
    pub target: String,
}

impl LangPair {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        LangPair {
            source: source.into(),
            target: target.into(),
        }
    }
}

impl fmt::Display for LangPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.source, self.target)
    }
}

/// Human annotation protocol of a translation score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Protocol {
    /// Error Span Annotation, scores in `[0, 100]`, 100 is perfect.
    #[serde(rename = "ESA", alias = "esa")]
    Esa,
    /// Multidimensional Quality Metrics, scores in `(-inf, 0]`, 0 is perfect.
    #[serde(rename = "MQM", alias = "mqm")]
    Mqm,
    #[serde(rename = "other", alias = "OTHER")]
    Other,
}

impl Protocol {
    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::Esa => "ESA",
            Protocol::Mqm => "MQM",
            Protocol::Other => "other",
        }
    }

    /// Score that marks a perfect translation, if the protocol defines one.
    pub fn perfect_score(&self) -> Option<f64> {
        match self {
            Protocol::Esa => Some(100.0),
            Protocol::Mqm => Some(0.0),
            Protocol::Other => None,
        }
    }

    fn check_range(&self, score: f64) -> std::result::Result<(), String> {
        match self {
            Protocol::Esa if !(0.0..=100.0).contains(&score) => {
                Err(format!("ESA score {score} outside [0, 100]"))
            }
            Protocol::Mqm if score > 0.0 => Err(format!("MQM score {score} is positive")),
            _ => Ok(()),
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "esa" => Ok(Protocol::Esa),
            "mqm" => Ok(Protocol::Mqm),
            "other" => Ok(Protocol::Other),
            _ => Err(format!("unknown protocol `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceSegment {
    pub segment_id: String,
    pub doc_id: String,
    pub source_lang: String,
    pub text: String,
    pub domain: String,
    pub source_error_count: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Translation {
    pub segment_id: String,
    pub target_lang: String,
    pub system_id: String,
    pub text: String,
    pub human_score: Option<f64>,
    pub protocol: Option<Protocol>,
    pub is_human: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestSetFormat {
    Jsonl,
    Tsv,
}

impl TestSetFormat {
    /// Guess the format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("tab") => TestSetFormat::Tsv,
            _ => TestSetFormat::Jsonl,
        }
    }
}

impl std::str::FromStr for TestSetFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(TestSetFormat::Jsonl),
            "tsv" => Ok(TestSetFormat::Tsv),
            _ => Err(format!("unknown test set format `{s}`")),
        }
    }
}

/// An annotated test set. Immutable once built; every type invariant holds.
///
/// Segments are kept sorted by id and translations by
/// `(segment_id, target_lang, system_id)`, which is also the serialization order.
#[derive(Clone, Debug, PartialEq)]
pub struct TestSet {
    segments: Vec<SourceSegment>,
    translations: Vec<Translation>,
    segment_index: HashMap<String, usize>,
    translation_index: HashMap<(usize, String, String), usize>,
    by_pair: BTreeMap<LangPair, Vec<usize>>,
    systems: BTreeMap<LangPair, BTreeSet<String>>,
}

impl TestSet {
    pub fn segments(&self) -> &[SourceSegment] {
        &self.segments
    }

    pub fn translations(&self) -> &[Translation] {
        &self.translations
    }

    pub fn segment(&self, segment_id: &str) -> Option<&SourceSegment> {
        self.segment_index.get(segment_id).map(|&i| &self.segments[i])
    }

    pub fn segment_position(&self, segment_id: &str) -> Option<usize> {
        self.segment_index.get(segment_id).copied()
    }

    pub fn translation(&self, segment_id: &str, target_lang: &str, system_id: &str) -> Option<&Translation> {
        let seg = *self.segment_index.get(segment_id)?;
        self.translation_index
            .get(&(seg, target_lang.to_string(), system_id.to_string()))
            .map(|&i| &self.translations[i])
    }

    /// Language pairs in lexicographic order.
    pub fn language_pairs(&self) -> impl Iterator<Item = &LangPair> {
        self.systems.keys()
    }

    pub fn systems_per_language(&self) -> &BTreeMap<LangPair, BTreeSet<String>> {
        &self.systems
    }

    pub fn systems(&self, pair: &LangPair) -> Option<&BTreeSet<String>> {
        self.systems.get(pair)
    }

    /// Translations of one language pair, in canonical order.
    pub fn translations_for(&self, pair: &LangPair) -> impl Iterator<Item = &Translation> {
        self.by_pair
            .get(pair)
            .into_iter()
            .flatten()
            .map(move |&i| &self.translations[i])
    }

    pub fn pair_of(&self, translation: &Translation) -> LangPair {
        let source = &self.segment(&translation.segment_id).expect("validated").source_lang;
        LangPair::new(source.clone(), translation.target_lang.clone())
    }

    /// Domains present in the test set.
    pub fn domains(&self) -> BTreeSet<&str> {
        self.segments.iter().map(|s| s.domain.as_str()).collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for row in self.rows() {
            serde_json::to_writer(&mut w, &row)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", TSV_COLUMNS.join("\t"))?;
        for row in self.rows() {
            let fields = [
                tsv::escape(&row.segment_id),
                tsv::escape(&row.doc_id),
                tsv::escape(&row.source_lang),
                tsv::escape(&row.target_lang),
                tsv::escape(&row.domain),
                tsv::escape(&row.source_text),
                tsv::escape(&row.system_id),
                row.is_human.to_string(),
                tsv::escape(&row.translation),
                row.human_score.map(|s| s.to_string()).unwrap_or_default(),
                row.protocol.map(|p| p.as_str().to_string()).unwrap_or_default(),
                row.source_error_count.map(|c| c.to_string()).unwrap_or_default(),
            ];
            writeln!(w, "{}", fields.join("\t"))?;
        }
        Ok(())
    }

    fn rows(&self) -> impl Iterator<Item = Row> + '_ {
        self.translations.iter().map(move |t| {
            let s = self.segment(&t.segment_id).expect("validated");
            Row {
                segment_id: s.segment_id.clone(),
                doc_id: s.doc_id.clone(),
                source_lang: s.source_lang.clone(),
                target_lang: t.target_lang.clone(),
                domain: s.domain.clone(),
                source_text: s.text.clone(),
                system_id: t.system_id.clone(),
                is_human: t.is_human,
                translation: t.text.clone(),
                human_score: t.human_score,
                protocol: t.protocol,
                source_error_count: s.source_error_count,
            }
        })
    }
}

/// Incremental, validating constructor for [`TestSet`].
///
/// Errors are plain messages; the file loaders attach locations to them.
#[derive(Debug, Default)]
pub struct TestSetBuilder {
    segments: BTreeMap<String, SourceSegment>,
    translations: BTreeMap<(String, String, String), Translation>,
    domains: Option<BTreeSet<String>>,
}

impl TestSetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Restrict segment domains to a declared vocabulary.
    pub fn with_domain_vocabulary<I, S>(mut self, domains: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.domains = Some(domains.into_iter().map(Into::into).collect());
        self
    }

    /// Add a source segment. Re-adding an identical segment is a no-op;
    /// conflicting metadata for an existing id is an error.
    pub fn add_segment(
        &mut self,
        segment_id: &str,
        doc_id: &str,
        source_lang: &str,
        text: &str,
        domain: &str,
        source_error_count: Option<u32>,
    ) -> std::result::Result<(), String> {
        if segment_id.is_empty() {
            return Err("empty segment_id".into());
        }
        let text = normalize_text(text);
        if text.trim().is_empty() {
            return Err(format!("segment `{segment_id}` has empty source text"));
        }
        if let Some(vocab) = &self.domains {
            if !vocab.contains(domain) {
                return Err(format!("segment `{segment_id}` has undeclared domain `{domain}`"));
            }
        }
        let segment = SourceSegment {
            segment_id: segment_id.to_string(),
            doc_id: doc_id.to_string(),
            source_lang: source_lang.to_string(),
            text,
            domain: domain.to_string(),
            source_error_count,
        };
        match self.segments.get(segment_id) {
            Some(existing) if *existing != segment => Err(format!(
                "segment `{segment_id}` redeclared with different metadata"
            )),
            Some(_) => Ok(()),
            None => {
                self.segments.insert(segment_id.to_string(), segment);
                Ok(())
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn add_translation(
        &mut self,
        segment_id: &str,
        pair: &LangPair,
        system_id: &str,
        text: &str,
        human_score: Option<f64>,
        protocol: Option<Protocol>,
        is_human: bool,
    ) -> std::result::Result<(), String> {
        let segment = self
            .segments
            .get(segment_id)
            .ok_or_else(|| format!("translation references unknown segment `{segment_id}`"))?;
        if segment.source_lang != pair.source {
            return Err(format!(
                "segment `{segment_id}` is in `{}`, not `{}`",
                segment.source_lang, pair.source
            ));
        }
        if system_id.is_empty() {
            return Err("empty system_id".into());
        }
        if let Some(score) = human_score {
            if !score.is_finite() {
                return Err(format!("non-finite human score {score}"));
            }
            if let Some(p) = protocol {
                p.check_range(score)?;
            }
        } else if protocol.is_some() {
            return Err("protocol is set but human_score is missing".into());
        }
        let key = (segment_id.to_string(), pair.target.clone(), system_id.to_string());
        if self.translations.contains_key(&key) {
            return Err(format!(
                "duplicate translation ({segment_id}, {}, {system_id})",
                pair.target
            ));
        }
        self.translations.insert(
            key,
            Translation {
                segment_id: segment_id.to_string(),
                target_lang: pair.target.clone(),
                system_id: system_id.to_string(),
                text: normalize_text(text),
                human_score,
                protocol,
                is_human,
            },
        );
        Ok(())
    }

    pub fn build(self) -> std::result::Result<TestSet, String> {
        let segments: Vec<SourceSegment> = self.segments.into_values().collect();
        let segment_index: HashMap<String, usize> = segments
            .iter()
            .enumerate()
            .map(|(i, s)| (s.segment_id.clone(), i))
            .collect();
        let translations: Vec<Translation> = self.translations.into_values().collect();
        let mut translation_index = HashMap::with_capacity(translations.len());
        let mut by_pair: BTreeMap<LangPair, Vec<usize>> = BTreeMap::new();
        let mut systems: BTreeMap<LangPair, BTreeSet<String>> = BTreeMap::new();
        for (i, t) in translations.iter().enumerate() {
            let seg = segment_index[&t.segment_id];
            translation_index.insert((seg, t.target_lang.clone(), t.system_id.clone()), i);
            let pair = LangPair::new(segments[seg].source_lang.clone(), t.target_lang.clone());
            by_pair.entry(pair.clone()).or_default().push(i);
            systems.entry(pair).or_default().insert(t.system_id.clone());
        }
        Ok(TestSet {
            segments,
            translations,
            segment_index,
            translation_index,
            by_pair,
            systems,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    segment_id: String,
    doc_id: String,
    source_lang: String,
    target_lang: String,
    domain: String,
    source_text: String,
    system_id: String,
    is_human: bool,
    translation: String,
    human_score: Option<f64>,
    protocol: Option<Protocol>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_error_count: Option<u32>,
}

const TSV_COLUMNS: [&str; 12] = [
    "segment_id",
    "doc_id",
    "source_lang",
    "target_lang",
    "domain",
    "source_text",
    "system_id",
    "is_human",
    "translation",
    "human_score",
    "protocol",
    "source_error_count",
];
const TSV_OPTIONAL: &str = "source_error_count";

/// Options for [`load_testset_with`].
#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    pub domains: Option<BTreeSet<String>>,
}

/// Load a test set. See [`load_testset_with`].
pub fn load_testset(path: impl AsRef<Path>, format: TestSetFormat) -> Result<TestSet> {
    load_testset_with(path, format, &LoadOptions::default())
}

/// Load a test set from JSONL (one object per translation row) or TSV
/// (same columns, header required). The first invalid row aborts loading
/// with its line number.
pub fn load_testset_with(path: impl AsRef<Path>, format: TestSetFormat, options: &LoadOptions) -> Result<TestSet> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_testset(BufReader::new(file), format, options, &path.display().to_string())
}

pub fn read_testset<R: BufRead>(reader: R, format: TestSetFormat, options: &LoadOptions, origin: &str) -> Result<TestSet> {
    let mut builder = TestSetBuilder::new();
    if let Some(d) = &options.domains {
        builder = builder.with_domain_vocabulary(d.iter().cloned());
    }
    let parse_err = |line: usize, message: String| Error::Parse {
        origin: origin.to_string(),
        line,
        message,
    };
    let mut header: Option<Vec<String>> = None;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = match format {
            TestSetFormat::Jsonl => serde_json::from_str(line).map_err(|e| parse_err(lineno, e.to_string()))?,
            TestSetFormat::Tsv => match &header {
                None => {
                    let cols: Vec<String> = line.split('\t').map(str::to_string).collect();
                    for required in TSV_COLUMNS.iter().filter(|c| **c != TSV_OPTIONAL) {
                        if !cols.iter().any(|c| c == required) {
                            return Err(parse_err(lineno, format!("header lacks column `{required}`")));
                        }
                    }
                    header = Some(cols);
                    continue;
                }
                Some(cols) => parse_tsv_row(cols, line).map_err(|m| parse_err(lineno, m))?,
            },
        };
        let invalid = |message: String| Error::Validation {
            origin: origin.to_string(),
            line: lineno,
            message,
        };
        builder
            .add_segment(
                &row.segment_id,
                &row.doc_id,
                &row.source_lang,
                &row.source_text,
                &row.domain,
                row.source_error_count,
            )
            .map_err(invalid)?;
        let pair = LangPair::new(row.source_lang, row.target_lang);
        builder
            .add_translation(
                &row.segment_id,
                &pair,
                &row.system_id,
                &row.translation,
                row.human_score,
                row.protocol,
                row.is_human,
            )
            .map_err(invalid)?;
    }
    builder.build().map_err(Error::InvalidInput)
}

fn parse_tsv_row(header: &[String], line: &str) -> std::result::Result<Row, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != header.len() {
        return Err(format!("expected {} fields, found {}", header.len(), fields.len()));
    }
    let get = |name: &str| -> Option<String> {
        header
            .iter()
            .position(|c| c == name)
            .map(|i| tsv::unescape(fields[i]))
    };
    let req = |name: &str| get(name).ok_or_else(|| format!("missing column `{name}`"));
    let is_human = match req("is_human")?.as_str() {
        "true" | "1" => true,
        "false" | "0" => false,
        other => return Err(format!("bad is_human `{other}`")),
    };
    let human_score = match req("human_score")?.as_str() {
        "" => None,
        s => Some(s.parse::<f64>().map_err(|e| format!("bad human_score `{s}`: {e}"))?),
    };
    let protocol = match req("protocol")?.as_str() {
        "" => None,
        s => Some(s.parse::<Protocol>()?),
    };
    let source_error_count = match get("source_error_count").as_deref() {
        None | Some("") => None,
        Some(s) => Some(s.parse::<u32>().map_err(|e| format!("bad source_error_count `{s}`: {e}"))?),
    };
    Ok(Row {
        segment_id: req("segment_id")?,
        doc_id: req("doc_id")?,
        source_lang: req("source_lang")?,
        target_lang: req("target_lang")?,
        domain: req("domain")?,
        source_text: req("source_text")?,
        system_id: req("system_id")?,
        is_human,
        translation: req("translation")?,
        human_score,
        protocol,
        source_error_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jsonl_row(seg: &str, sys: &str, score: f64) -> String {
        format!(
            r#"{{"segment_id":"{seg}","doc_id":"d1","source_lang":"en","target_lang":"de","domain":"news","source_text":"Text {seg}.","system_id":"{sys}","is_human":false,"translation":"T","human_score":{score},"protocol":"ESA"}}"#
        )
    }

    fn read(s: &str, format: TestSetFormat) -> Result<TestSet> {
        read_testset(s.as_bytes(), format, &LoadOptions::default(), "mem")
    }

    #[test]
    fn two_segments_two_systems() {
        let data = [
            jsonl_row("s1", "A", 90.0),
            jsonl_row("s1", "B", 80.0),
            jsonl_row("s2", "A", 70.0),
            jsonl_row("s2", "B", 60.0),
        ]
        .join("\n");
        let ts = read(&data, TestSetFormat::Jsonl).unwrap();
        assert_eq!(ts.translations().len(), 4);
        assert_eq!(ts.segments().len(), 2);
        let pair = LangPair::new("en", "de");
        assert_eq!(ts.systems(&pair).unwrap().len(), 2);
        assert_eq!(ts.translation("s2", "de", "B").unwrap().human_score, Some(60.0));
    }

    #[test]
    fn esa_out_of_range_names_the_row() {
        let data = [jsonl_row("s1", "A", 90.0), jsonl_row("s1", "B", 101.0)].join("\n");
        let err = read(&data, TestSetFormat::Jsonl).unwrap_err();
        match err {
            Error::Validation { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("ESA"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_translation_rejected() {
        let data = [jsonl_row("s1", "A", 90.0), jsonl_row("s1", "A", 80.0)].join("\n");
        assert!(matches!(
            read(&data, TestSetFormat::Jsonl),
            Err(Error::Validation { line: 2, .. })
        ));
    }

    #[test]
    fn malformed_row_is_a_parse_error() {
        let data = format!("{}\n{{not json", jsonl_row("s1", "A", 90.0));
        assert!(matches!(
            read(&data, TestSetFormat::Jsonl),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn positive_mqm_rejected_and_negative_accepted() {
        let ok = jsonl_row("s1", "A", -5.0).replace("ESA", "MQM");
        assert!(read(&ok, TestSetFormat::Jsonl).is_ok());
        let bad = jsonl_row("s1", "A", 1.0).replace("ESA", "MQM");
        assert!(read(&bad, TestSetFormat::Jsonl).is_err());
    }

    #[test]
    fn protocol_without_score_rejected() {
        let row = jsonl_row("s1", "A", 1.0).replace("\"human_score\":1", "\"human_score\":null");
        assert!(read(&row, TestSetFormat::Jsonl).is_err());
        let raw = row.replace("\"protocol\":\"ESA\"", "\"protocol\":null");
        let ts = read(&raw, TestSetFormat::Jsonl).unwrap();
        assert_eq!(ts.translations()[0].human_score, None);
    }

    #[test]
    fn blank_source_text_rejected() {
        let row = jsonl_row("s1", "A", 1.0).replace("Text s1.", "   ");
        assert!(matches!(read(&row, TestSetFormat::Jsonl), Err(Error::Validation { .. })));
    }

    #[test]
    fn conflicting_segment_metadata_rejected() {
        let a = jsonl_row("s1", "A", 1.0);
        let b = jsonl_row("s1", "B", 1.0).replace("news", "social");
        assert!(read(&format!("{a}\n{b}"), TestSetFormat::Jsonl).is_err());
    }

    #[test]
    fn undeclared_domain_rejected() {
        let opts = LoadOptions {
            domains: Some(["social".to_string()].into()),
        };
        let r = read_testset(jsonl_row("s1", "A", 1.0).as_bytes(), TestSetFormat::Jsonl, &opts, "mem");
        assert!(r.is_err());
    }

    #[test]
    fn tsv_header_required() {
        let data = "s1\td\ten\tde\tnews\tx\tA\tfalse\ty\t90\tESA\n";
        assert!(matches!(read(data, TestSetFormat::Tsv), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn tsv_escapes_survive_roundtrip() {
        let mut b = TestSetBuilder::new();
        b.add_segment("s1", "d", "en", "tab\there\nnewline \\ slash", "news", Some(2))
            .unwrap();
        b.add_translation("s1", &LangPair::new("en", "de"), "A", "x\ty", Some(50.0), Some(Protocol::Esa), true)
            .unwrap();
        let ts = b.build().unwrap();
        let mut buf = Vec::new();
        ts.write_tsv(&mut buf).unwrap();
        let back = read(std::str::from_utf8(&buf).unwrap(), TestSetFormat::Tsv).unwrap();
        assert_eq!(back, ts);
    }

    #[test]
    fn texts_are_nfc_normalized() {
        let row = jsonl_row("s1", "A", 1.0).replace("Text s1.", "Cafe\u{301}");
        let ts = read(&row, TestSetFormat::Jsonl).unwrap();
        assert_eq!(ts.segments()[0].text, "Caf\u{e9}");
    }
}
