//! Term dictionary construction and dictionary-driven term extraction.

mod lemma;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::CleanSentence;
use crate::snapshot::{Snapshot, SnapshotError, SnapshotReader, SnapshotWriter, Tag};

pub use lemma::lemmatize;

/// Longest dictionary term, in tokens; also the extraction window width.
pub const MAX_TERM_TOKENS: usize = 3;

const DEFAULT_STOP_WORDS: &str = include_str!("../../data/stopwords.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermSource {
    Kb,
    Wiki,
    Both,
}

impl TermSource {
    pub fn includes_kb(self) -> bool {
        matches!(self, TermSource::Kb | TermSource::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictEntry {
    pub source: TermSource,
    /// Corpus occurrence count; only kb-sourced entries carry a nonzero value.
    pub frequency: u64,
}

/// Recognized terms with source tags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TermDictionary {
    entries: BTreeMap<String, DictEntry>,
}

impl TermDictionary {
    pub fn get(&self, term: &str) -> Option<&DictEntry> {
        self.entries.get(term)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.entries.contains_key(term)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &DictEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// A span maps to at most one entry, so a kb term and a wiki-only term
    /// never compete at equal width; longer spans are tried first by the scan.
    fn match_span(&self, span: &str) -> Option<TermSource> {
        let entry = self.entries.get(span)?;
        Some(entry.source)
    }

    /// Replace kb frequencies; counts for terms that are not kb-sourced are ignored.
    pub fn set_kb_frequencies(&mut self, counts: &BTreeMap<String, u64>) {
        for (term, entry) in &mut self.entries {
            entry.frequency = if entry.source.includes_kb() {
                counts.get(term).copied().unwrap_or(0)
            } else {
                0
            };
        }
    }
}

impl Snapshot for TermDictionary {
    const KIND: Tag = *b"DICT";

    fn to_writer(&self) -> Result<SnapshotWriter, SnapshotError> {
        SnapshotWriter::new(Self::KIND).block(*b"ENTR", &self.entries)
    }

    fn from_reader(r: &SnapshotReader) -> Result<Self, SnapshotError> {
        Ok(TermDictionary { entries: r.block(*b"ENTR")? })
    }
}

/// Stop-word set used by the single-token fallback.
#[derive(Debug, Clone, Default)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    pub fn parse(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    /// The bundled English list.
    pub fn english() -> &'static StopWords {
        static SW: OnceLock<StopWords> = OnceLock::new();
        SW.get_or_init(|| StopWords::parse(DEFAULT_STOP_WORDS))
    }

    pub fn contains(&self, w: &str) -> bool {
        self.0.contains(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for StopWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopWords(iter.into_iter().map(Into::into).collect())
    }
}

fn annotation_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\s*\([^()]*\)\s*$").expect("valid annotation pattern"))
}

fn has_namespace(title: &str) -> bool {
    let first = title.split_whitespace().next().unwrap_or("");
    match first.find(':') {
        Some(pos) => pos > 0 && first[..pos].chars().all(char::is_alphanumeric),
        None => false,
    }
}

/// Lowercase, whitespace-normalize and length-check a candidate term.
pub fn normalize_term(raw: &str) -> Option<String> {
    let tokens: Vec<String> = raw.split_whitespace().map(str::to_lowercase).collect();
    if tokens.is_empty() || tokens.len() > MAX_TERM_TOKENS {
        return None;
    }
    Some(tokens.join(" "))
}

/// Drop namespace titles, strip trailing parenthesized annotations and drop
/// anything longer than three tokens.
pub fn clean_wiki_terms<I, S>(raw_terms: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    raw_terms
        .into_iter()
        .filter_map(|raw| {
            let title = raw.as_ref().replace('_', " ");
            let title = title.trim();
            if title.is_empty() || has_namespace(title) {
                return None;
            }
            let stripped = annotation_re().replace(title, "");
            normalize_term(&stripped)
        })
        .collect()
}

/// Union of wiki and kb terms. Kb terms carry their corpus frequency.
pub fn build_dictionary(
    wiki_terms: &BTreeSet<String>,
    kb_terms: &BTreeSet<String>,
    kb_frequencies: &BTreeMap<String, u64>,
) -> TermDictionary {
    let mut entries = BTreeMap::new();
    for t in wiki_terms {
        entries.insert(t.clone(), DictEntry { source: TermSource::Wiki, frequency: 0 });
    }
    for t in kb_terms {
        let frequency = kb_frequencies.get(t).copied().unwrap_or(0);
        let source = if wiki_terms.contains(t) { TermSource::Both } else { TermSource::Kb };
        entries.insert(t.clone(), DictEntry { source, frequency });
    }
    TermDictionary { entries }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExtractedTerm {
    pub surface: String,
    /// Produced by the lemmatized single-token fallback rather than a dictionary match.
    pub single_token: bool,
}

impl ExtractedTerm {
    pub fn as_str(&self) -> &str {
        &self.surface
    }
}

/// Greedy longest-match scan with a window of up to three tokens.
///
/// A dictionary hit consumes its span. When no span of width two or more
/// matches, the single token is emitted as a dictionary term if it is one,
/// skipped if it is a stop word, and emitted lemmatized otherwise.
pub fn extract_terms(
    sentence: &CleanSentence,
    dict: &TermDictionary,
    stop_words: &StopWords,
) -> Vec<ExtractedTerm> {
    let tokens = &sentence.tokens;
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let widest = MAX_TERM_TOKENS.min(tokens.len() - i);
        let mut consumed = false;
        for width in (1..=widest).rev() {
            let span = tokens[i..i + width].join(" ");
            if dict.match_span(&span).is_some() {
                out.push(ExtractedTerm { surface: span, single_token: false });
                i += width;
                consumed = true;
                break;
            }
        }
        if consumed {
            continue;
        }
        let tok = &tokens[i];
        if !stop_words.contains(tok) {
            out.push(ExtractedTerm { surface: lemmatize(tok), single_token: true });
        }
        i += 1;
    }
    out
}

/// Extract terms from every sentence of an already preprocessed text.
pub fn extract_all(
    sentences: &[CleanSentence],
    dict: &TermDictionary,
    stop_words: &StopWords,
) -> Vec<ExtractedTerm> {
    sentences.iter().flat_map(|s| extract_terms(s, dict, stop_words)).collect()
}
