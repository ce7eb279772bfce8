//! Fielded BM25F over a paper-term inverted index.
//!
//! Per field `f` of document `d` the raw term count is length-normalized,
//!
//! ```text
//! x̄(d,f,t) = x(d,f,t) / (1 + B_f · (l(d,f) / l̄_f − 1))
//! ```
//!
//! then the fields are blended, `x̄(d,t) = Σ_f W_f · x̄(d,f,t)`, and the term
//! contributes `x̄(d,t) / (K1 + x̄(d,t)) · w_t` where `w_t` is the IDF weight.
//! The index itself stores only integer counts and lengths; scoring is
//! generic over the scalar type.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{preprocess_text, PublicationRecord};
use crate::ids::PaperId;
use crate::lexicon::{extract_all, StopWords, TermDictionary};
use crate::scalar::Scalar;
use crate::snapshot::{Snapshot, SnapshotError, SnapshotReader, SnapshotWriter, Tag};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("cannot index an empty corpus")]
    EmptyCorpus,
    #[error("unknown paper `{0}`")]
    UnknownPaper(PaperId),
    #[error("invalid BM25F parameters: {0}")]
    InvalidParams(String),
}

/// Indexed publication fields. Journal and conference names share `Venue`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Title,
    Abstract,
    Keywords,
    Venue,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::Title, Field::Abstract, Field::Keywords, Field::Venue];

    pub fn name(self) -> &'static str {
        match self {
            Field::Title => "title",
            Field::Abstract => "abstract",
            Field::Keywords => "keywords",
            Field::Venue => "venue",
        }
    }

    fn text(self, r: &PublicationRecord) -> String {
        match self {
            Field::Title => r.title.clone(),
            Field::Abstract => r.abstract_text.clone(),
            Field::Keywords => r.keywords.clone(),
            Field::Venue => match (r.journal_name.trim(), r.conference_name.trim()) {
                (j, "") => j.to_owned(),
                ("", c) => c.to_owned(),
                (j, c) => format!("{j}. {c}"),
            },
        }
    }
}

/// One value per field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PerField<T> {
    pub title: T,
    #[serde(rename = "abstract")]
    pub abstract_: T,
    pub keywords: T,
    pub venue: T,
}

impl<T: Copy> PerField<T> {
    pub fn splat(v: T) -> Self {
        PerField { title: v, abstract_: v, keywords: v, venue: v }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Field, T)> + '_ {
        Field::ALL.into_iter().map(move |f| (f, self[f]))
    }
}

impl<T> Index<Field> for PerField<T> {
    type Output = T;
    fn index(&self, f: Field) -> &T {
        match f {
            Field::Title => &self.title,
            Field::Abstract => &self.abstract_,
            Field::Keywords => &self.keywords,
            Field::Venue => &self.venue,
        }
    }
}

impl<T> IndexMut<Field> for PerField<T> {
    fn index_mut(&mut self, f: Field) -> &mut T {
        match f {
            Field::Title => &mut self.title,
            Field::Abstract => &mut self.abstract_,
            Field::Keywords => &mut self.keywords,
            Field::Venue => &mut self.venue,
        }
    }
}

/// Field weights `W_f`, length-normalization strengths `B_f` and saturation `K1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25fParams<S> {
    weights: PerField<S>,
    norms: PerField<S>,
    k1: S,
}

impl<S: Scalar> Bm25fParams<S> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(weights: PerField<S>, norms: PerField<S>, k1: S) -> Result<Self, IndexError> {
        for (f, w) in weights.iter() {
            if !(w >= S::zero()) || !w.is_finite() {
                return Err(IndexError::InvalidParams(format!("weight for {} must be >= 0", f.name())));
            }
        }
        for (f, b) in norms.iter() {
            if !(b >= S::zero() && b <= S::one()) {
                return Err(IndexError::InvalidParams(format!("B for {} must lie in [0, 1]", f.name())));
            }
        }
        if !(k1 > S::zero()) || !k1.is_finite() {
            return Err(IndexError::InvalidParams("k1 must be > 0".into()));
        }
        Ok(Bm25fParams { weights, norms, k1 })
    }

    pub fn weight(&self, f: Field) -> S {
        self.weights[f]
    }

    pub fn norm(&self, f: Field) -> S {
        self.norms[f]
    }

    pub fn k1(&self) -> S {
        self.k1
    }

    /// Re-check the invariants, e.g. after deserializing from a config file.
    pub fn validated(self) -> Result<Self, IndexError> {
        Self::new(self.weights, self.norms, self.k1)
    }
}

impl<S: Scalar> Default for Bm25fParams<S> {
    fn default() -> Self {
        let weights = PerField {
            title: S::lit(1.2),
            abstract_: S::lit(1.0),
            keywords: S::lit(1.2),
            venue: S::lit(1.2),
        };
        Bm25fParams { weights, norms: PerField::splat(S::lit(0.75)), k1: S::lit(1.2) }
    }
}

/// Smoothed IDF, `ln(1 + (N − df + 0.5) / (df + 0.5))`; strictly positive.
pub fn idf<S: Scalar>(doc_freq: u32, doc_count: u32) -> S {
    let half = S::lit(0.5);
    let n = S::lit(doc_count as f64);
    let df = S::lit(doc_freq as f64);
    (S::one() + (n - df + half) / (df + half)).ln()
}

/// Corpus-level statistics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldStats {
    pub doc_count: u32,
    /// Sum of field lengths over all documents; the mean is this over `doc_count`.
    pub total_len: PerField<u64>,
    pub doc_freq: BTreeMap<String, u32>,
}

impl FieldStats {
    pub fn avg_len<S: Scalar>(&self, f: Field) -> S {
        if self.doc_count == 0 {
            return S::zero();
        }
        S::lit(self.total_len[f] as f64) / S::lit(self.doc_count as f64)
    }

    pub fn df(&self, term: &str) -> u32 {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn idf<S: Scalar>(&self, term: &str) -> S {
        idf(self.df(term), self.doc_count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posting {
    /// Ordinal into the document table.
    pub doc: u32,
    pub counts: PerField<u32>,
}

impl Posting {
    pub fn total(&self) -> u32 {
        self.counts.iter().map(|(_, c)| c).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocEntry {
    pub paper_id: PaperId,
    /// Field lengths in extracted terms.
    pub lengths: PerField<u32>,
}

/// Inverted index: term → postings with per-field counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperTermIndex {
    docs: Vec<DocEntry>,
    postings: BTreeMap<String, Vec<Posting>>,
    stats: FieldStats,
    by_paper: HashMap<PaperId, u32>,
}

impl PaperTermIndex {
    pub fn from_parts(
        docs: Vec<DocEntry>,
        postings: BTreeMap<String, Vec<Posting>>,
        stats: FieldStats,
    ) -> Self {
        let by_paper =
            docs.iter().enumerate().map(|(i, d)| (d.paper_id.clone(), i as u32)).collect();
        PaperTermIndex { docs, postings, stats, by_paper }
    }

    pub fn docs(&self) -> &[DocEntry] {
        &self.docs
    }

    pub fn stats(&self) -> &FieldStats {
        &self.stats
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn all_postings(&self) -> &BTreeMap<String, Vec<Posting>> {
        &self.postings
    }

    pub fn contains_term(&self, term: &str) -> bool {
        self.postings.contains_key(term)
    }

    pub fn doc(&self, ordinal: u32) -> &DocEntry {
        &self.docs[ordinal as usize]
    }

    pub fn ordinal(&self, paper: &PaperId) -> Option<u32> {
        self.by_paper.get(paper).copied()
    }

    /// Total occurrences of each term over all fields and documents.
    pub fn term_occurrences(&self) -> BTreeMap<String, u64> {
        self.postings
            .iter()
            .map(|(t, ps)| (t.clone(), ps.iter().map(|p| p.total() as u64).sum()))
            .collect()
    }

    /// Score of one posting given the term's IDF weight.
    pub fn posting_score<S: Scalar>(&self, posting: &Posting, idf_weight: S, params: &Bm25fParams<S>) -> S {
        let lengths = &self.docs[posting.doc as usize].lengths;
        let mut blended = S::zero();
        for f in Field::ALL {
            let x = posting.counts[f];
            if x == 0 {
                continue;
            }
            let avg = self.stats.avg_len::<S>(f);
            let b = params.norm(f);
            let norm = if avg > S::zero() {
                S::one() + b * (S::lit(lengths[f] as f64) / avg - S::one())
            } else {
                S::one()
            };
            blended = blended + params.weight(f) * S::lit(x as f64) / norm;
        }
        if blended <= S::zero() {
            return S::zero();
        }
        blended / (params.k1() + blended) * idf_weight
    }

    /// BM25F contribution of `term` to `paper`; zero when the term is absent.
    pub fn bm25f_score<S: Scalar>(
        &self,
        paper: &PaperId,
        term: &str,
        params: &Bm25fParams<S>,
    ) -> Result<S, IndexError> {
        let ord = self.ordinal(paper).ok_or_else(|| IndexError::UnknownPaper(paper.clone()))?;
        let postings = self.postings(term);
        Ok(match postings.binary_search_by_key(&ord, |p| p.doc) {
            Ok(i) => self.posting_score(&postings[i], self.stats.idf(term), params),
            Err(_) => S::zero(),
        })
    }

    /// Every `(posting, score)` for a term, in document order.
    pub fn scored_postings<'a, S: Scalar>(
        &'a self,
        term: &str,
        params: &'a Bm25fParams<S>,
    ) -> impl Iterator<Item = (&'a Posting, S)> + 'a {
        let w = self.stats.idf::<S>(term);
        self.postings(term).iter().map(move |p| (p, self.posting_score(p, w, params)))
    }

    /// BM25F of a whole query against one paper: the sum over query terms.
    pub fn query_score<S: Scalar, T: AsRef<str>>(
        &self,
        paper: &PaperId,
        terms: &[T],
        params: &Bm25fParams<S>,
    ) -> Result<S, IndexError> {
        let mut total = S::zero();
        for t in terms {
            total = total + self.bm25f_score(paper, t.as_ref(), params)?;
        }
        Ok(total)
    }
}

impl Snapshot for PaperTermIndex {
    const KIND: Tag = *b"PIDX";

    fn to_writer(&self) -> Result<SnapshotWriter, SnapshotError> {
        SnapshotWriter::new(Self::KIND)
            .block(*b"STAT", &self.stats)?
            .block(*b"DOCS", &self.docs)?
            .block(*b"POST", &self.postings)
    }

    fn from_reader(r: &SnapshotReader) -> Result<Self, SnapshotError> {
        Ok(PaperTermIndex::from_parts(r.block(*b"DOCS")?, r.block(*b"POST")?, r.block(*b"STAT")?))
    }
}

/// Preprocess and term-extract every field, then count per (doc, field, term).
pub fn build_index(
    records: &[PublicationRecord],
    dict: &TermDictionary,
    stop_words: &StopWords,
) -> Result<PaperTermIndex, IndexError> {
    if records.is_empty() {
        return Err(IndexError::EmptyCorpus);
    }
    let mut docs = Vec::with_capacity(records.len());
    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    let mut total_len = PerField::<u64>::default();

    for (ord, rec) in records.iter().enumerate() {
        let ord = ord as u32;
        let mut lengths = PerField::<u32>::default();
        let mut counts: BTreeMap<String, PerField<u32>> = BTreeMap::new();
        for f in Field::ALL {
            let terms = extract_all(&preprocess_text(&f.text(rec)), dict, stop_words);
            lengths[f] = terms.len() as u32;
            total_len[f] += terms.len() as u64;
            for t in terms {
                counts.entry(t.surface).or_default()[f] += 1;
            }
        }
        for (term, counts) in counts {
            postings.entry(term).or_default().push(Posting { doc: ord, counts });
        }
        docs.push(DocEntry { paper_id: rec.paper_id.clone(), lengths });
    }

    let doc_freq = postings.iter().map(|(t, p)| (t.clone(), p.len() as u32)).collect();
    let stats = FieldStats { doc_count: docs.len() as u32, total_len, doc_freq };
    Ok(PaperTermIndex::from_parts(docs, postings, stats))
}
