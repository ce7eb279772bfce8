//! Publication records and text normalization.
//!
//! Every text field that reaches the index (titles, abstracts, keywords,
//! venue names, and also user queries) goes through [`preprocess_text`]:
//! lowercasing, copyright-notice removal, duplicate punctuation and
//! whitespace collapsing, sentence segmentation and tokenization.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{PaperId, ResearcherId};
use crate::snapshot::{Snapshot, SnapshotError, SnapshotReader, SnapshotWriter, Tag};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv header error: {0}")]
    Csv(#[from] csv::Error),
    #[error("required column `{0}` missing")]
    MissingColumn(&'static str),
    #[error("no parseable publication rows ({skipped} skipped)")]
    Empty { skipped: usize },
}

/// One publication with its fielded text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub paper_id: PaperId,
    pub title: String,
    pub abstract_text: String,
    pub keywords: String,
    pub journal_name: String,
    pub conference_name: String,
    pub authors: Vec<ResearcherId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl InputFormat {
    /// Guess from the file extension; anything other than `.jsonl`/`.json` is csv.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => InputFormat::Jsonl,
            _ => InputFormat::Csv,
        }
    }
}

/// Records in file order plus the number of rejected rows.
#[derive(Debug, Clone)]
pub struct LoadReport {
    pub records: Vec<PublicationRecord>,
    pub skipped: usize,
}

/// Separator for multiple researchers inside the `claimed_users` column.
pub const AUTHOR_SEPARATOR: char = ';';

const REQUIRED: [&str; 5] = ["paper_id", "title", "abstract", "keywords", "claimed_users"];

#[derive(Deserialize)]
#[serde(untagged)]
enum AuthorsField {
    List(Vec<String>),
    Joined(String),
}

#[derive(Deserialize)]
struct RawRow {
    paper_id: Option<serde_json::Value>,
    #[serde(default)]
    title: Option<String>,
    #[serde(default, rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    keywords: Option<String>,
    #[serde(default)]
    journal_name: Option<String>,
    #[serde(default)]
    conference_name: Option<String>,
    #[serde(default)]
    claimed_users: Option<AuthorsField>,
}

fn split_authors(s: &str) -> Vec<ResearcherId> {
    s.split(AUTHOR_SEPARATOR)
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .map(ResearcherId::from)
        .collect()
}

impl RawRow {
    fn into_record(self) -> Option<PublicationRecord> {
        let paper_id = match self.paper_id? {
            serde_json::Value::String(s) if !s.trim().is_empty() => s.trim().to_owned(),
            serde_json::Value::Number(n) => n.to_string(),
            _ => return None,
        };
        let authors = match self.claimed_users? {
            AuthorsField::Joined(s) => split_authors(&s),
            AuthorsField::List(v) => v
                .iter()
                .map(|a| a.trim())
                .filter(|a| !a.is_empty())
                .map(ResearcherId::from)
                .collect(),
        };
        if authors.is_empty() {
            return None;
        }
        Some(PublicationRecord {
            paper_id: PaperId(paper_id),
            title: self.title.unwrap_or_default(),
            abstract_text: self.abstract_text.unwrap_or_default(),
            keywords: self.keywords.unwrap_or_default(),
            journal_name: self.journal_name.unwrap_or_default(),
            conference_name: self.conference_name.unwrap_or_default(),
            authors,
        })
    }
}

/// Load publications; rows without an id, without authors, that fail to
/// parse, or that repeat an earlier id are skipped and counted.
pub fn load_publications(path: &Path, format: InputFormat) -> Result<LoadReport, CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.display().to_string(), source };
    let file = File::open(path).map_err(io_err)?;
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    let mut skipped = 0usize;
    let mut accept = |row: Option<PublicationRecord>, skipped: &mut usize| match row {
        Some(r) if seen.insert(r.paper_id.clone()) => records.push(r),
        _ => *skipped += 1,
    };

    match format {
        InputFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(file);
            let headers = rdr.headers()?.clone();
            for col in REQUIRED {
                if !headers.iter().any(|h| h.trim() == col) {
                    return Err(CorpusError::MissingColumn(col));
                }
            }
            let col = |name: &str| headers.iter().position(|h| h.trim() == name);
            let idx: Vec<Option<usize>> = [
                "paper_id",
                "title",
                "abstract",
                "keywords",
                "journal_name",
                "conference_name",
                "claimed_users",
            ]
            .iter()
            .map(|c| col(c))
            .collect();
            for row in rdr.records() {
                let row = match row {
                    Ok(r) if r.len() == headers.len() => r,
                    _ => {
                        skipped += 1;
                        continue;
                    }
                };
                let get = |i: usize| idx[i].and_then(|c| row.get(c)).map(str::to_owned);
                let raw = RawRow {
                    paper_id: get(0).map(serde_json::Value::String),
                    title: get(1),
                    abstract_text: get(2),
                    keywords: get(3),
                    journal_name: get(4),
                    conference_name: get(5),
                    claimed_users: get(6).map(AuthorsField::Joined),
                };
                accept(raw.into_record(), &mut skipped);
            }
        }
        InputFormat::Jsonl => {
            for line in BufReader::new(file).lines() {
                let line = line.map_err(io_err)?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed = serde_json::from_str::<RawRow>(&line).ok().and_then(RawRow::into_record);
                accept(parsed, &mut skipped);
            }
        }
    }

    if records.is_empty() {
        return Err(CorpusError::Empty { skipped });
    }
    if skipped > 0 {
        log::warn!("{}: skipped {skipped} malformed publication rows", path.display());
    }
    Ok(LoadReport { records, skipped })
}

/// Paper → researchers links and the inverse, taken from the corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Authorship {
    by_paper: BTreeMap<PaperId, Vec<ResearcherId>>,
    by_researcher: BTreeMap<ResearcherId, Vec<PaperId>>,
}

impl Authorship {
    pub fn from_records(records: &[PublicationRecord]) -> Self {
        Self::from_pairs(records.iter().flat_map(|r| r.authors.iter().map(|a| (r.paper_id.clone(), a.clone()))))
    }

    pub fn from_pairs<I: IntoIterator<Item = (PaperId, ResearcherId)>>(pairs: I) -> Self {
        let mut by_paper: BTreeMap<PaperId, Vec<ResearcherId>> = BTreeMap::new();
        let mut by_researcher: BTreeMap<ResearcherId, Vec<PaperId>> = BTreeMap::new();
        for (p, a) in pairs {
            let authors = by_paper.entry(p.clone()).or_default();
            if authors.contains(&a) {
                continue;
            }
            authors.push(a.clone());
            by_researcher.entry(a).or_default().push(p);
        }
        Authorship { by_paper, by_researcher }
    }

    pub fn authors(&self, paper: &PaperId) -> &[ResearcherId] {
        self.by_paper.get(paper).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn papers(&self, researcher: &ResearcherId) -> Option<&[PaperId]> {
        self.by_researcher.get(researcher).map(Vec::as_slice)
    }

    pub fn researchers(&self) -> impl Iterator<Item = &ResearcherId> {
        self.by_researcher.keys()
    }

    pub fn researcher_count(&self) -> usize {
        self.by_researcher.len()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&PaperId, &ResearcherId)> {
        self.by_paper.iter().flat_map(|(p, rs)| rs.iter().map(move |r| (p, r)))
    }
}

impl Snapshot for Authorship {
    const KIND: Tag = *b"AUTH";

    fn to_writer(&self) -> Result<SnapshotWriter, SnapshotError> {
        SnapshotWriter::new(Self::KIND).block(*b"PAPA", &self.by_paper)
    }

    fn from_reader(r: &SnapshotReader) -> Result<Self, SnapshotError> {
        let by_paper: BTreeMap<PaperId, Vec<ResearcherId>> = r.block(*b"PAPA")?;
        Ok(Self::from_pairs(by_paper.into_iter().flat_map(|(p, rs)| rs.into_iter().map(move |r| (p.clone(), r)))))
    }
}

/// One sentence as an ordered list of lowercase tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CleanSentence {
    pub tokens: Vec<String>,
}

impl CleanSentence {
    pub fn new<I, T>(tokens: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        CleanSentence { tokens: tokens.into_iter().map(Into::into).collect() }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Abbreviations whose trailing period does not end a sentence.
const ABBREVIATIONS: [&str; 5] = ["et al.", "e.g.", "i.e.", "fig.", "dr."];

fn copyright_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?:©|\bcopyright\b)[^.!?]*[.!?]?|\ball rights reserved\b[.!?]?")
            .expect("valid copyright pattern")
    })
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '“' | '”' | '‘' | '’' | '«' | '»' | '–' | '—' | '…' | '·' | '•' | '§' | '¶' | '¿' | '¡'
        )
}

/// Collapse runs of the same punctuation character and runs of whitespace.
fn collapse_duplicates(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev: Option<char> = None;
    for c in text.chars() {
        let c = if c.is_whitespace() { ' ' } else { c };
        if let Some(p) = prev {
            if (c == ' ' && p == ' ') || (is_punct(c) && c == p) {
                continue;
            }
        }
        out.push(c);
        prev = Some(c);
    }
    out
}

fn ends_with_abbreviation(text: &str) -> bool {
    ABBREVIATIONS.iter().any(|abbr| {
        text.strip_suffix(abbr).is_some_and(|rest| {
            rest.chars().last().is_none_or(|c| c.is_whitespace() || is_punct(c))
        })
    })
}

/// Split on a terminator followed by a space or end of text.
fn segment(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !is_terminator(c) {
            continue;
        }
        let end = i + c.len_utf8();
        let boundary = match chars.peek() {
            None => true,
            Some(&(_, n)) => n == ' ',
        };
        if boundary && !(c == '.' && ends_with_abbreviation(&text[start..end])) {
            out.push(&text[start..end]);
            start = end;
        }
    }
    if start < text.len() {
        out.push(&text[start..]);
    }
    out
}

fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|t| t.trim_matches(is_punct))
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Normalize raw text into token-segmented sentences. Total and deterministic.
pub fn preprocess_text(raw: &str) -> Vec<CleanSentence> {
    let lower = raw.to_lowercase();
    let stripped = copyright_re().replace_all(&lower, " ");
    let collapsed = collapse_duplicates(&stripped);
    segment(collapsed.trim())
        .into_iter()
        .map(tokenize)
        .filter(|t| !t.is_empty())
        .map(|tokens| CleanSentence { tokens })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn words(s: &[CleanSentence]) -> Vec<Vec<&str>> {
        s.iter().map(|s| s.tokens.iter().map(String::as_str).collect()).collect()
    }

    #[test]
    fn abstract_cleanup_example() {
        let raw = "Automatic paraphrasing is an important component in many natural language \
                   processing tasks. In this article we present a new parallel corpus with \
                   paraphrase annotation. © 2008 Association for Computational Linguistics.";
        let out = preprocess_text(raw);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].tokens.first().unwrap(), "automatic");
        assert_eq!(out[0].tokens.last().unwrap(), "tasks");
        assert_eq!(out[1].tokens.last().unwrap(), "annotation");
        for s in &out {
            assert!(!s.tokens.iter().any(|t| t.contains("association") || t.contains('©')));
        }
    }

    #[test]
    fn empty_and_duplicates() {
        assert!(preprocess_text("").is_empty());
        assert!(preprocess_text("   ").is_empty());
        assert_eq!(words(&preprocess_text("Hello   world!!")), vec![vec!["hello", "world"]]);
    }

    #[test]
    fn copyright_variants() {
        let out = preprocess_text("Deep nets work. © Copyright 2019. All rights reserved");
        assert_eq!(words(&out), vec![vec!["deep", "nets", "work"]]);
        let out = preprocess_text("We study graphs. Copyright 2013 Springer.");
        assert_eq!(words(&out), vec![vec!["we", "study", "graphs"]]);
    }

    #[test]
    fn abbreviations_do_not_split() {
        let out = preprocess_text("Smith et al. proposed it. See fig. 3 for details.");
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].tokens, vec!["smith", "et", "al", "proposed", "it"]);
    }

    #[test]
    fn hyphens_kept() {
        let out = preprocess_text("Human-computer interaction (HCI), today.");
        assert_eq!(words(&out), vec![vec!["human-computer", "interaction", "hci", "today"]]);
    }

    #[test]
    fn terminator_without_space_is_not_a_boundary() {
        let out = preprocess_text("version 2.5 is out? yes!");
        assert_eq!(words(&out), vec![vec!["version", "2.5", "is", "out"], vec!["yes"]]);
    }

    fn write_tmp(name: &str, body: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(name);
        File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        (dir, p)
    }

    #[test]
    fn csv_with_malformed_row() {
        let body = "paper_id,title,abstract,journal_name,conference_name,claimed_users,keywords\n\
                    p1,Automatic paraphrasing,Abs,,ACL,alice;bob,nlp\n\
                    p2,No authors,Abs,,,,kw\n\
                    p3,Graphs,Abs,J,,carol,graphs\n";
        let (_d, p) = write_tmp("c.csv", body);
        let rep = load_publications(&p, InputFormat::Csv).unwrap();
        assert_eq!(rep.records.len(), 2);
        assert_eq!(rep.skipped, 1);
        assert_eq!(rep.records[0].authors, vec![ResearcherId::from("alice"), "bob".into()]);
        assert_eq!(rep.records[1].paper_id.as_str(), "p3");
    }

    #[test]
    fn csv_missing_optional_venue_columns() {
        let body = "paper_id,title,abstract,claimed_users,keywords\np1,T,A,x,k\n";
        let (_d, p) = write_tmp("c.csv", body);
        let rep = load_publications(&p, InputFormat::Csv).unwrap();
        assert_eq!(rep.records[0].journal_name, "");
    }

    #[test]
    fn csv_missing_required_column() {
        let (_d, p) = write_tmp("c.csv", "paper_id,title\np1,T\n");
        assert!(matches!(
            load_publications(&p, InputFormat::Csv),
            Err(CorpusError::MissingColumn("abstract"))
        ));
    }

    #[test]
    fn jsonl_rows() {
        let body = r#"{"paper_id": 7, "title": "A", "abstract": "", "keywords": "", "claimed_users": ["a", "b"]}
not json at all
{"paper_id": "8", "title": "B", "claimed_users": "c"}
{"paper_id": "8", "title": "dup", "claimed_users": "d"}
"#;
        let (_d, p) = write_tmp("c.jsonl", body);
        let rep = load_publications(&p, InputFormat::from_path(&p)).unwrap();
        assert_eq!(rep.records.len(), 2);
        assert_eq!(rep.skipped, 2);
        assert_eq!(rep.records[0].paper_id.as_str(), "7");
        assert_eq!(rep.records[0].authors.len(), 2);
    }

    #[test]
    fn empty_corpus_and_missing_file() {
        let (_d, p) = write_tmp("c.jsonl", "{}\n");
        assert!(matches!(
            load_publications(&p, InputFormat::Jsonl),
            Err(CorpusError::Empty { skipped: 1 })
        ));
        assert!(matches!(
            load_publications(Path::new("/nonexistent/x.csv"), InputFormat::Csv),
            Err(CorpusError::Io { .. })
        ));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn word() -> impl Strategy<Value = String> {
            "[a-zA-Z][a-z0-9-]{2,7}"
                .prop_filter("abbreviation", |w| {
                    !["fig", "dr", "al", "copyright"].contains(&w.to_lowercase().trim_matches('-'))
                })
        }

        fn text() -> impl Strategy<Value = String> {
            let sep = prop_oneof![
                Just(" "),
                Just("  "),
                Just(". "),
                Just("!! "),
                Just(", "),
                Just("? "),
                Just(" \t ")
            ];
            prop::collection::vec((word(), sep), 0..20)
                .prop_map(|v| v.into_iter().map(|(w, s)| format!("{w}{s}")).collect())
        }

        proptest! {
            #[test]
            fn idempotent_on_joined_output(raw in text()) {
                let once = preprocess_text(&raw);
                let joined = once
                    .iter()
                    .map(|s| format!("{}.", s.tokens.join(" ")))
                    .collect::<Vec<_>>()
                    .join(" ");
                prop_assert_eq!(preprocess_text(&joined), once);
            }

            #[test]
            fn output_is_clean(raw in text(), notice in "(© 20[0-9]{2} [A-Z][a-z]+\\.)?") {
                let out = preprocess_text(&format!("{raw}{notice}"));
                for s in &out {
                    for t in &s.tokens {
                        prop_assert!(!t.is_empty());
                        prop_assert!(!t.chars().any(char::is_whitespace));
                        prop_assert!(!t.chars().any(char::is_uppercase));
                        prop_assert!(!t.contains('©'));
                    }
                }
            }
        }
    }
}
