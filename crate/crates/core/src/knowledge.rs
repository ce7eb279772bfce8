//! Knowledge-base tables, per-author field-of-study profiles and the hybrid
//! keyword/KB score.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bm25f::{Bm25fParams, PaperTermIndex};
use crate::corpus::{preprocess_text, Authorship};
use crate::ids::{FosId, PaperId, ResearcherId};
use crate::lexicon::{extract_all, normalize_term, StopWords, TermDictionary};
use crate::scalar::{cmp_desc, Scalar};
use crate::snapshot::{Snapshot, SnapshotError, SnapshotReader, SnapshotWriter, Tag};

pub const FOS_FILE: &str = "fields_of_study.tsv";
pub const CHILDREN_FILE: &str = "fos_children.tsv";
pub const RELATED_FILE: &str = "related_fos.tsv";
pub const PAPER_FOS_FILE: &str = "paper_fos.tsv";
pub const PAPER_AUTHORS_FILE: &str = "paper_authors.tsv";

pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{table} row {row}: {msg}")]
    Parse { table: &'static str, row: usize, msg: String },
    #[error("{table} row {row}: duplicate field of study {id}")]
    Duplicate { table: &'static str, row: usize, id: FosId },
    #[error("{table} row {row}: unknown field of study {id}")]
    Dangling { table: &'static str, row: usize, id: FosId },
    #[error("{table} row {row}: score {score} outside (0, 1]")]
    ScoreOutOfRange { table: &'static str, row: usize, score: f64 },
    #[error("children hierarchy has a cycle through field of study {0}")]
    Cycle(FosId),
    #[error("unknown researcher {0}")]
    UnknownResearcher(ResearcherId),
    #[error("alpha {0} outside [0, 1]")]
    InvalidAlpha(f64),
}

/// Input file locations; `related` is optional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KbPaths {
    pub fields_of_study: PathBuf,
    pub children: PathBuf,
    pub related: Option<PathBuf>,
    pub paper_fos: PathBuf,
    pub paper_authors: PathBuf,
}

impl KbPaths {
    /// Standard file names inside `dir`; the related table is used when present.
    pub fn in_dir(dir: &Path) -> Self {
        let related = dir.join(RELATED_FILE);
        KbPaths {
            fields_of_study: dir.join(FOS_FILE),
            children: dir.join(CHILDREN_FILE),
            related: related.exists().then_some(related),
            paper_fos: dir.join(PAPER_FOS_FILE),
            paper_authors: dir.join(PAPER_AUTHORS_FILE),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldOfStudy {
    pub fos_id: FosId,
    pub display_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorFosProfile<S> {
    pub scores: BTreeMap<FosId, S>,
}

/// Validated knowledge base with lookup indexes derived at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase<S> {
    fos: BTreeMap<FosId, FieldOfStudy>,
    children: BTreeMap<FosId, BTreeSet<FosId>>,
    related: BTreeSet<(FosId, FosId)>,
    paper_fos: BTreeMap<PaperId, Vec<(FosId, S)>>,
    paper_authors: BTreeMap<PaperId, Vec<ResearcherId>>,
    by_name: BTreeMap<String, Vec<FosId>>,
    by_author: BTreeMap<ResearcherId, Vec<PaperId>>,
    by_fos: BTreeMap<FosId, Vec<(PaperId, S)>>,
}

fn name_key(name: &str) -> String {
    name.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

struct Rows {
    table: &'static str,
    rows: Vec<(usize, Vec<String>)>,
}

/// Tab-separated rows with 1-based row numbers; a leading header whose first
/// field is not an integer is skipped.
fn read_rows(path: &Path, table: &'static str, min_fields: usize) -> Result<Rows, KbError> {
    let text = fs::read_to_string(path).map_err(|source| KbError::Io { path: path.to_owned(), source })?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(|f| f.trim().to_owned()).collect();
        if i == 0 && fields[0].parse::<i64>().is_err() {
            continue;
        }
        if fields.len() < min_fields {
            return Err(KbError::Parse {
                table,
                row: i + 1,
                msg: format!("expected {min_fields} tab-separated fields, found {}", fields.len()),
            });
        }
        rows.push((i + 1, fields));
    }
    Ok(Rows { table, rows })
}

fn parse_id(table: &'static str, row: usize, s: &str) -> Result<FosId, KbError> {
    s.parse().map_err(|_| KbError::Parse { table, row, msg: format!("bad id {s:?}") })
}

impl<S: Scalar> KnowledgeBase<S> {
    /// Validate raw tables and build the lookup indexes. Row numbers in errors
    /// are positions in the given vectors, starting at 1.
    pub fn from_tables(
        fields: Vec<FieldOfStudy>,
        children: Vec<(FosId, FosId)>,
        related: Vec<(FosId, FosId)>,
        paper_fos: Vec<(PaperId, FosId, S)>,
        paper_authors: Vec<(PaperId, ResearcherId)>,
    ) -> Result<Self, KbError> {
        fn numbered<T>(v: Vec<T>) -> Vec<(usize, T)> {
            v.into_iter().enumerate().map(|(i, x)| (i + 1, x)).collect()
        }
        Self::build(
            numbered(fields),
            numbered(children),
            numbered(related),
            numbered(paper_fos),
            paper_authors,
        )
    }

    fn build(
        fields: Vec<(usize, FieldOfStudy)>,
        children: Vec<(usize, (FosId, FosId))>,
        related: Vec<(usize, (FosId, FosId))>,
        paper_fos: Vec<(usize, (PaperId, FosId, S))>,
        paper_authors: Vec<(PaperId, ResearcherId)>,
    ) -> Result<Self, KbError> {
        let mut fos = BTreeMap::new();
        for (row, f) in fields {
            if f.display_name.trim().is_empty() {
                return Err(KbError::Parse { table: FOS_FILE, row, msg: "empty display name".into() });
            }
            if fos.contains_key(&f.fos_id) {
                return Err(KbError::Duplicate { table: FOS_FILE, row, id: f.fos_id });
            }
            fos.insert(f.fos_id, f);
        }
        let check = |table, row, id: FosId| {
            if fos.contains_key(&id) {
                Ok(())
            } else {
                Err(KbError::Dangling { table, row, id })
            }
        };

        let mut child_map: BTreeMap<FosId, BTreeSet<FosId>> = BTreeMap::new();
        for (row, (parent, child)) in children {
            check(CHILDREN_FILE, row, parent)?;
            check(CHILDREN_FILE, row, child)?;
            child_map.entry(parent).or_default().insert(child);
        }
        if let Some(id) = find_cycle(&child_map) {
            return Err(KbError::Cycle(id));
        }

        let mut related_set = BTreeSet::new();
        for (row, (a, b)) in related {
            check(RELATED_FILE, row, a)?;
            check(RELATED_FILE, row, b)?;
            related_set.insert((a.min(b), a.max(b)));
        }

        let mut pf: BTreeMap<PaperId, Vec<(FosId, S)>> = BTreeMap::new();
        for (row, (paper, id, score)) in paper_fos {
            check(PAPER_FOS_FILE, row, id)?;
            if !(score > S::zero() && score <= S::one()) {
                return Err(KbError::ScoreOutOfRange { table: PAPER_FOS_FILE, row, score: score.as_f64() });
            }
            pf.entry(paper).or_default().push((id, score));
        }
        for tags in pf.values_mut() {
            tags.sort_by_key(|t| t.0);
        }

        let mut pa: BTreeMap<PaperId, Vec<ResearcherId>> = BTreeMap::new();
        for (paper, r) in paper_authors {
            let authors = pa.entry(paper).or_default();
            if !authors.contains(&r) {
                authors.push(r);
            }
        }
        for authors in pa.values_mut() {
            authors.sort();
        }
        Ok(Self::index(fos, child_map, related_set, pf, pa))
    }

    fn index(
        fos: BTreeMap<FosId, FieldOfStudy>,
        children: BTreeMap<FosId, BTreeSet<FosId>>,
        related: BTreeSet<(FosId, FosId)>,
        paper_fos: BTreeMap<PaperId, Vec<(FosId, S)>>,
        paper_authors: BTreeMap<PaperId, Vec<ResearcherId>>,
    ) -> Self {
        let mut by_name: BTreeMap<String, Vec<FosId>> = BTreeMap::new();
        for f in fos.values() {
            by_name.entry(name_key(&f.display_name)).or_default().push(f.fos_id);
        }
        let mut by_author: BTreeMap<ResearcherId, Vec<PaperId>> = BTreeMap::new();
        for (paper, authors) in &paper_authors {
            for a in authors {
                by_author.entry(a.clone()).or_default().push(paper.clone());
            }
        }
        let mut by_fos: BTreeMap<FosId, Vec<(PaperId, S)>> = BTreeMap::new();
        for (paper, tags) in &paper_fos {
            for &(id, s) in tags {
                by_fos.entry(id).or_default().push((paper.clone(), s));
            }
        }
        KnowledgeBase { fos, children, related, paper_fos, paper_authors, by_name, by_author, by_fos }
    }

    pub fn fields(&self) -> impl Iterator<Item = &FieldOfStudy> {
        self.fos.values()
    }

    pub fn field(&self, id: FosId) -> Option<&FieldOfStudy> {
        self.fos.get(&id)
    }

    pub fn children(&self, id: FosId) -> impl Iterator<Item = FosId> + '_ {
        self.children.get(&id).into_iter().flatten().copied()
    }

    pub fn related(&self) -> impl Iterator<Item = (FosId, FosId)> + '_ {
        self.related.iter().copied()
    }

    pub fn paper_tags(&self, paper: &PaperId) -> &[(FosId, S)] {
        self.paper_fos.get(paper).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn paper_authors(&self, paper: &PaperId) -> &[ResearcherId] {
        self.paper_authors.get(paper).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn researchers(&self) -> impl Iterator<Item = &ResearcherId> {
        self.by_author.keys()
    }

    /// Fields whose display name equals `term` after lowercasing and whitespace folding.
    pub fn resolve(&self, term: &str) -> &[FosId] {
        self.by_name.get(&name_key(term)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Display names usable as dictionary terms (at most three tokens).
    pub fn dictionary_terms(&self) -> BTreeSet<String> {
        self.fos.values().filter_map(|f| normalize_term(&f.display_name)).collect()
    }

    pub fn author_profile(&self, researcher: &ResearcherId) -> Result<AuthorFosProfile<S>, KbError> {
        let papers = self.by_author.get(researcher).ok_or_else(|| KbError::UnknownResearcher(researcher.clone()))?;
        let mut scores: BTreeMap<FosId, S> = BTreeMap::new();
        for p in papers {
            for &(id, s) in self.paper_tags(p) {
                let e = scores.entry(id).or_insert(S::zero());
                *e = *e + s;
            }
        }
        Ok(AuthorFosProfile { scores })
    }

    /// Raw KB component per researcher: summed profile scores over every
    /// field matched by a query term.
    pub fn kb_component<T: AsRef<str>>(&self, terms: &[T]) -> BTreeMap<ResearcherId, S> {
        let mut out: BTreeMap<ResearcherId, S> = BTreeMap::new();
        for t in terms {
            for id in self.resolve(t.as_ref()) {
                for (paper, s) in self.by_fos.get(id).into_iter().flatten() {
                    for r in self.paper_authors(paper) {
                        let e = out.entry(r.clone()).or_insert(S::zero());
                        *e = *e + *s;
                    }
                }
            }
        }
        out
    }

    /// Same tables with every confidence multiplied by `c`, skipping range checks.
    pub fn rescaled(&self, c: S) -> Self {
        let paper_fos = self
            .paper_fos
            .iter()
            .map(|(p, tags)| (p.clone(), tags.iter().map(|&(id, s)| (id, s * c)).collect()))
            .collect();
        Self::index(self.fos.clone(), self.children.clone(), self.related.clone(), paper_fos, self.paper_authors.clone())
    }

    /// Write the five tables into `dir` under the standard names.
    pub fn dump(&self, dir: &Path) -> Result<(), KbError> {
        let write = |name: &str, body: String| {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|source| KbError::Io { path, source })
        };
        fs::create_dir_all(dir).map_err(|source| KbError::Io { path: dir.to_owned(), source })?;
        let mut s = String::from("FieldsOfStudyId\tDisplayName\n");
        for f in self.fos.values() {
            s.push_str(&format!("{}\t{}\n", f.fos_id, f.display_name));
        }
        write(FOS_FILE, s)?;
        let mut s = String::from("FieldsOfStudyId\tChildFieldOfStudyId\n");
        for (p, cs) in &self.children {
            for c in cs {
                s.push_str(&format!("{p}\t{c}\n"));
            }
        }
        write(CHILDREN_FILE, s)?;
        let mut s = String::from("FieldOfStudyId1\tFieldOfStudyId2\n");
        for (a, b) in &self.related {
            s.push_str(&format!("{a}\t{b}\n"));
        }
        write(RELATED_FILE, s)?;
        let mut s = String::from("PaperId\tFieldOfStudyId\tScore\n");
        for (p, tags) in &self.paper_fos {
            for (id, score) in tags {
                s.push_str(&format!("{p}\t{id}\t{score}\n"));
            }
        }
        write(PAPER_FOS_FILE, s)?;
        let mut s = String::from("PaperId\tAuthorId\n");
        for (p, authors) in &self.paper_authors {
            for a in authors {
                s.push_str(&format!("{p}\t{a}\n"));
            }
        }
        write(PAPER_AUTHORS_FILE, s)
    }
}

fn find_cycle(children: &BTreeMap<FosId, BTreeSet<FosId>>) -> Option<FosId> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: BTreeMap<FosId, Mark> = BTreeMap::new();
    for &start in children.keys() {
        if marks.contains_key(&start) {
            continue;
        }
        let mut stack: Vec<(FosId, Vec<FosId>)> = vec![(start, children[&start].iter().copied().collect())];
        marks.insert(start, Mark::Active);
        while let Some((node, pending)) = stack.last_mut() {
            match pending.pop() {
                Some(next) => match marks.get(&next) {
                    Some(Mark::Active) => return Some(next),
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(next, Mark::Active);
                        let kids = children.get(&next).map(|c| c.iter().copied().collect()).unwrap_or_default();
                        stack.push((next, kids));
                    }
                },
                None => {
                    marks.insert(*node, Mark::Done);
                    stack.pop();
                }
            }
        }
    }
    None
}

type Numbered<T> = Vec<(usize, T)>;

/// Load the TSV tables. Every table may start with a header row.
pub fn load_kb<S: Scalar>(paths: &KbPaths) -> Result<KnowledgeBase<S>, KbError> {
    let rows = read_rows(&paths.fields_of_study, FOS_FILE, 2)?;
    let fields = rows
        .rows
        .into_iter()
        .map(|(row, f)| Ok((row, FieldOfStudy { fos_id: parse_id(rows.table, row, &f[0])?, display_name: f[1].clone() })))
        .collect::<Result<Vec<_>, KbError>>()?;

    let pairs = |path: &Path, table: &'static str| -> Result<Numbered<(FosId, FosId)>, KbError> {
        read_rows(path, table, 2)?
            .rows
            .into_iter()
            .map(|(row, f)| Ok((row, (parse_id(table, row, &f[0])?, parse_id(table, row, &f[1])?))))
            .collect()
    };
    let children = pairs(&paths.children, CHILDREN_FILE)?;
    let related = match &paths.related {
        Some(p) => pairs(p, RELATED_FILE)?,
        None => Vec::new(),
    };

    let paper_fos = read_rows(&paths.paper_fos, PAPER_FOS_FILE, 3)?
        .rows
        .into_iter()
        .map(|(row, f)| {
            let score = S::from_str_radix(&f[2], 10)
                .map_err(|_| KbError::Parse { table: PAPER_FOS_FILE, row, msg: format!("bad score {:?}", f[2]) })?;
            Ok((row, (PaperId::new(f[0].clone()), parse_id(PAPER_FOS_FILE, row, &f[1])?, score)))
        })
        .collect::<Result<Vec<_>, KbError>>()?;

    let paper_authors = read_rows(&paths.paper_authors, PAPER_AUTHORS_FILE, 2)?
        .rows
        .into_iter()
        .map(|(_, f)| (PaperId::new(f[0].clone()), ResearcherId::new(f[1].clone())))
        .collect();

    KnowledgeBase::build(fields, children, related, paper_fos, paper_authors)
}

#[derive(Serialize, Deserialize)]
struct KbTables<S> {
    fos: Vec<FieldOfStudy>,
    children: Vec<(FosId, FosId)>,
    related: Vec<(FosId, FosId)>,
    paper_fos: BTreeMap<PaperId, Vec<(FosId, S)>>,
    paper_authors: BTreeMap<PaperId, Vec<ResearcherId>>,
}

impl<S: Scalar> Snapshot for KnowledgeBase<S> {
    const KIND: Tag = *b"KBAS";

    fn to_writer(&self) -> Result<SnapshotWriter, SnapshotError> {
        let tables = KbTables {
            fos: self.fos.values().cloned().collect(),
            children: self.children.iter().flat_map(|(&p, cs)| cs.iter().map(move |&c| (p, c))).collect(),
            related: self.related.iter().copied().collect(),
            paper_fos: self.paper_fos.clone(),
            paper_authors: self.paper_authors.clone(),
        };
        SnapshotWriter::new(Self::KIND).block(*b"TABL", &tables)
    }

    fn from_reader(r: &SnapshotReader) -> Result<Self, SnapshotError> {
        let t: KbTables<S> = r.block(*b"TABL")?;
        let paper_fos = t.paper_fos.into_iter().flat_map(|(p, tags)| tags.into_iter().map(move |(id, s)| (p.clone(), id, s)));
        let paper_authors = t.paper_authors.into_iter().flat_map(|(p, rs)| rs.into_iter().map(move |r| (p.clone(), r)));
        KnowledgeBase::from_tables(t.fos, t.children, t.related, paper_fos.collect(), paper_authors.collect())
            .map_err(|e| SnapshotError::Invalid(e.to_string()))
    }
}

/// Min-max scale over the candidate set. A constant column maps to 1 when
/// positive, else 0.
pub fn min_max<S: Scalar>(values: &[S]) -> Vec<S> {
    let (lo, hi) = values.iter().fold((S::infinity(), S::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    values
        .iter()
        .map(|&v| {
            if hi > lo {
                (v - lo) / (hi - lo)
            } else if hi > S::zero() {
                S::one()
            } else {
                S::zero()
            }
        })
        .collect()
}

/// Raw and blended scores of one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridScore<S> {
    pub researcher: ResearcherId,
    pub matching: S,
    pub kb: S,
    pub score: S,
}

/// Keyword matching blended with KB field-of-study confidence.
#[derive(Debug, Clone, Copy)]
pub struct HybridScorer<'a, S> {
    pub index: &'a PaperTermIndex,
    pub authorship: &'a Authorship,
    pub kb: &'a KnowledgeBase<S>,
    pub params: &'a Bm25fParams<S>,
    pub alpha: S,
}

impl<'a, S: Scalar> HybridScorer<'a, S> {
    pub fn new(
        index: &'a PaperTermIndex,
        authorship: &'a Authorship,
        kb: &'a KnowledgeBase<S>,
        params: &'a Bm25fParams<S>,
        alpha: S,
    ) -> Result<Self, KbError> {
        if !(alpha >= S::zero() && alpha <= S::one()) {
            return Err(KbError::InvalidAlpha(alpha.as_f64()));
        }
        Ok(HybridScorer { index, authorship, kb, params, alpha })
    }

    /// Raw matching component: BM25F summed over query terms and the researcher's papers.
    pub fn matching_component<T: AsRef<str>>(&self, terms: &[T]) -> BTreeMap<ResearcherId, S> {
        let mut out: BTreeMap<ResearcherId, S> = BTreeMap::new();
        for t in terms {
            let term = t.as_ref();
            for (posting, s) in self.index.scored_postings(term, self.params) {
                let paper = &self.index.doc(posting.doc).paper_id;
                for r in self.authorship.authors(paper) {
                    let e = out.entry(r.clone()).or_insert(S::zero());
                    *e = *e + s;
                }
            }
        }
        out
    }

    /// Every candidate, descending by blended score, ties by researcher id.
    pub fn score_all<T: AsRef<str>>(&self, terms: &[T]) -> Vec<HybridScore<S>> {
        let m = self.matching_component(terms);
        let k = self.kb.kb_component(terms);
        let candidates: BTreeSet<&ResearcherId> = m
            .iter()
            .chain(k.iter())
            .filter(|(_, &v)| v > S::zero())
            .map(|(r, _)| r)
            .collect();
        let raw_m: Vec<S> = candidates.iter().map(|r| m.get(*r).copied().unwrap_or(S::zero())).collect();
        let raw_k: Vec<S> = candidates.iter().map(|r| k.get(*r).copied().unwrap_or(S::zero())).collect();
        let (nm, nk) = (min_max(&raw_m), min_max(&raw_k));
        let mut out: Vec<HybridScore<S>> = candidates
            .into_iter()
            .enumerate()
            .map(|(i, r)| HybridScore {
                researcher: r.clone(),
                matching: raw_m[i],
                kb: raw_k[i],
                score: self.alpha * nm[i] + (S::one() - self.alpha) * nk[i],
            })
            .collect();
        out.sort_by(|a, b| cmp_desc(a.score, b.score).then_with(|| a.researcher.cmp(&b.researcher)));
        out
    }

    /// Blended score of one researcher; 0 outside the candidate set.
    pub fn hybrid_score<T: AsRef<str>>(&self, terms: &[T], researcher: &ResearcherId) -> S {
        self.score_all(terms).into_iter().find(|h| &h.researcher == researcher).map_or(S::zero(), |h| h.score)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Ok,
    NoTerms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome<S> {
    pub status: SearchStatus,
    /// Distinct extracted query terms, in first-seen order.
    pub terms: Vec<String>,
    pub results: Vec<(ResearcherId, S)>,
}

/// Preprocess and extract query terms, keeping the distinct ones that the
/// index or the KB knows.
pub fn query_terms<S: Scalar>(query: &str, dict: &TermDictionary, stop_words: &StopWords, index: &PaperTermIndex, kb: &KnowledgeBase<S>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    extract_all(&preprocess_text(query), dict, stop_words)
        .into_iter()
        .map(|t| t.surface)
        .filter(|t| index.contains_term(t) || !kb.resolve(t).is_empty())
        .filter(|t| seen.insert(t.clone()))
        .collect()
}

/// Top-`k` researchers for a raw text query.
pub fn search<S: Scalar>(
    query: &str,
    k: usize,
    scorer: &HybridScorer<'_, S>,
    dict: &TermDictionary,
    stop_words: &StopWords,
) -> SearchOutcome<S> {
    let terms = query_terms(query, dict, stop_words, scorer.index, scorer.kb);
    if terms.is_empty() {
        return SearchOutcome { status: SearchStatus::NoTerms, terms, results: Vec::new() };
    }
    let results = scorer.score_all(&terms).into_iter().take(k).map(|h| (h.researcher, h.score)).collect();
    SearchOutcome { status: SearchStatus::Ok, terms, results }
}
