//! Person-term scores: paper-level BM25F aggregated per researcher.
//!
//! Three transformation formulas are available. Each rewards a large summed
//! BM25F (`S`) and many papers containing the term (`n_t`), and normalizes by
//! the researcher's output (`N_a`):
//!
//! ```text
//! #1  (S+1)^w1 · ln(n_t+1)^w2 / ln(N_a+1)^w3
//! #2  (S+1)^w1 · ln(n_t+1)^w2 / (σ(Var(occ))^w3 · ln(N_a+1)^w4)
//! #3  (S+1)^w1 · ln(n_t+1)^w2 / ((tanh(max(AVG_5 − avg_5, 0)) + 1)^w3 · ln(N_a+1)^w4)
//! ```
//!
//! `σ` is the logistic function, `Var` the population variance of per-paper
//! occurrence counts, `avg_5` the mean of the researcher's five best per-paper
//! scores for the term and `AVG_5` the same mean pooled over the five best
//! researchers of a first scoring round.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bm25f::{Bm25fParams, PaperTermIndex};
use crate::corpus::Authorship;
use crate::ids::ResearcherId;
use crate::scalar::{self, Scalar};
use crate::snapshot::{Snapshot, SnapshotError, SnapshotReader, SnapshotWriter, Tag};

/// Papers and researchers pooled into the gold standard.
pub const GOLD_TOP: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum PersonError {
    #[error("unknown researcher `{0}`")]
    UnknownResearcher(ResearcherId),
    #[error("occurrence variance undefined: researcher has no paper containing the term")]
    UndefinedVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    F1,
    F2,
    F3,
}

impl std::str::FromStr for Formula {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "f1" | "1" => Ok(Formula::F1),
            "f2" | "2" => Ok(Formula::F2),
            "f3" | "3" => Ok(Formula::F3),
            other => Err(format!("unknown formula `{other}` (expected f1, f2 or f3)")),
        }
    }
}

/// Exponents of the transformation formulas. Formula #1 ignores `w4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformWeights<S> {
    pub w1: S,
    pub w2: S,
    pub w3: S,
    pub w4: S,
}

impl<S: Scalar> Default for TransformWeights<S> {
    fn default() -> Self {
        TransformWeights { w1: S::one(), w2: S::one(), w3: S::one(), w4: S::one() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorTermStats<S> {
    /// Sum of per-paper BM25F scores of the term over the researcher's papers.
    pub bm25f_sum: S,
    pub papers_with_term: usize,
    pub total_papers: usize,
    /// Raw occurrence count (all fields) per paper containing the term.
    pub occurrences: Vec<u32>,
    /// Up to five largest per-paper scores, descending.
    pub top5_scores: Vec<S>,
}

impl<S: Scalar> AuthorTermStats<S> {
    pub fn empty(total_papers: usize) -> Self {
        AuthorTermStats {
            bm25f_sum: S::zero(),
            papers_with_term: 0,
            total_papers,
            occurrences: Vec::new(),
            top5_scores: Vec::new(),
        }
    }

    fn add_paper(&mut self, score: S, occurrences: u32) {
        self.bm25f_sum = self.bm25f_sum + score;
        self.papers_with_term += 1;
        self.occurrences.push(occurrences);
        let pos = self.top5_scores.partition_point(|&s| s >= score);
        if pos < GOLD_TOP {
            self.top5_scores.insert(pos, score);
            self.top5_scores.truncate(GOLD_TOP);
        }
    }

    pub fn avg5(&self) -> S {
        scalar::mean(&self.top5_scores)
    }
}

/// Pooled mean of the first round's best papers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GoldStandard<S> {
    pub avg5_global: S,
}

/// Statistics of every researcher who has at least one paper containing `term`.
pub fn gather_term_stats<S: Scalar>(
    index: &PaperTermIndex,
    authorship: &Authorship,
    term: &str,
    params: &Bm25fParams<S>,
) -> BTreeMap<ResearcherId, AuthorTermStats<S>> {
    let mut out: BTreeMap<ResearcherId, AuthorTermStats<S>> = BTreeMap::new();
    for (posting, score) in index.scored_postings(term, params) {
        let paper = &index.doc(posting.doc).paper_id;
        for author in authorship.authors(paper) {
            out.entry(author.clone())
                .or_insert_with(|| {
                    AuthorTermStats::empty(authorship.papers(author).map_or(0, <[_]>::len))
                })
                .add_paper(score, posting.total());
        }
    }
    out
}

/// Statistics of one researcher for one term, over exactly their papers.
pub fn gather_stats<S: Scalar>(
    index: &PaperTermIndex,
    authorship: &Authorship,
    term: &str,
    researcher: &ResearcherId,
    params: &Bm25fParams<S>,
) -> Result<AuthorTermStats<S>, PersonError> {
    let papers = authorship
        .papers(researcher)
        .ok_or_else(|| PersonError::UnknownResearcher(researcher.clone()))?;
    let mut stats = AuthorTermStats::empty(papers.len());
    let postings = index.postings(term);
    let w = index.stats().idf::<S>(term);
    let mut ordinals: Vec<u32> = papers.iter().filter_map(|p| index.ordinal(p)).collect();
    ordinals.sort_unstable();
    for ord in ordinals {
        if let Ok(i) = postings.binary_search_by_key(&ord, |p| p.doc) {
            let p = &postings[i];
            stats.add_paper(index.posting_score(p, w, params), p.total());
        }
    }
    Ok(stats)
}

fn numerator<S: Scalar>(st: &AuthorTermStats<S>, w: &TransformWeights<S>) -> S {
    (st.bm25f_sum + S::one()).powf(w.w1) * S::of_usize(st.papers_with_term + 1).ln().powf(w.w2)
}

fn output_norm<S: Scalar>(st: &AuthorTermStats<S>, exponent: S) -> S {
    S::of_usize(st.total_papers + 1).ln().powf(exponent)
}

pub fn formula1<S: Scalar>(stats: &AuthorTermStats<S>, w: &TransformWeights<S>) -> S {
    numerator(stats, w) / output_norm(stats, w.w3)
}

/// Population variance.
pub fn variance<S: Scalar>(xs: &[u32]) -> Option<S> {
    if xs.is_empty() {
        return None;
    }
    let vals: Vec<S> = xs.iter().map(|&x| S::lit(x as f64)).collect();
    let m = scalar::mean(&vals);
    Some(scalar::sum(vals.iter().map(|&v| (v - m) * (v - m))) / S::of_usize(vals.len()))
}

pub fn sigmoid<S: Scalar>(v: S) -> S {
    S::one() / (S::one() + (-v).exp())
}

pub fn formula2<S: Scalar>(stats: &AuthorTermStats<S>, w: &TransformWeights<S>) -> Result<S, PersonError> {
    let var = variance::<S>(&stats.occurrences).ok_or(PersonError::UndefinedVariance)?;
    Ok(numerator(stats, w) / (sigmoid(var).powf(w.w3) * output_norm(stats, w.w4)))
}

/// Penalty factor `(tanh(max(AVG_5 − avg_5, 0)) + 1)^w3`.
pub fn gold_penalty<S: Scalar>(stats: &AuthorTermStats<S>, gold: &GoldStandard<S>, w3: S) -> S {
    let gap = (gold.avg5_global - stats.avg5()).max(S::zero());
    (gap.tanh() + S::one()).powf(w3)
}

pub fn formula3<S: Scalar>(stats: &AuthorTermStats<S>, gold: &GoldStandard<S>, w: &TransformWeights<S>) -> S {
    numerator(stats, w) / (gold_penalty(stats, gold, w.w3) * output_norm(stats, w.w4))
}

/// Descending by score, ties by researcher id.
pub fn rank<S: Scalar>(scores: &mut [(ResearcherId, S)]) {
    scores.sort_by(|a, b| scalar::cmp_desc(a.1, b.1).then_with(|| a.0.cmp(&b.0)));
}

/// Mean of the top five papers of each of the top five ranked researchers.
pub fn compute_gold<S: Scalar>(
    round1_ranking: &[ResearcherId],
    stats: &BTreeMap<ResearcherId, AuthorTermStats<S>>,
) -> GoldStandard<S> {
    let pooled: Vec<S> = round1_ranking
        .iter()
        .take(GOLD_TOP)
        .filter_map(|r| stats.get(r))
        .flat_map(|s| s.top5_scores.iter().take(GOLD_TOP).copied())
        .collect();
    GoldStandard { avg5_global: scalar::mean(&pooled) }
}

/// Formula #3's two rounds for one term: score with `AVG_5 = 0`, pool the
/// leaders' best papers, score again against that gold standard.
pub fn two_round_scores<S: Scalar>(
    stats: &BTreeMap<ResearcherId, AuthorTermStats<S>>,
    w: &TransformWeights<S>,
) -> (GoldStandard<S>, Vec<(ResearcherId, S)>) {
    let zero = GoldStandard::default();
    let mut round1: Vec<(ResearcherId, S)> =
        stats.iter().map(|(r, s)| (r.clone(), formula3(s, &zero, w))).collect();
    rank(&mut round1);
    let leaders: Vec<ResearcherId> = round1.into_iter().map(|(r, _)| r).collect();
    let gold = compute_gold(&leaders, stats);
    let round2 = stats.iter().map(|(r, s)| (r.clone(), formula3(s, &gold, w))).collect();
    (gold, round2)
}

/// Term → (researcher, transformed score), one entry per researcher using the term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonTermIndex<S> {
    pub formula: Formula,
    postings: BTreeMap<String, Vec<(ResearcherId, S)>>,
}

impl<S: Scalar> PersonTermIndex<S> {
    pub fn from_postings(formula: Formula, postings: BTreeMap<String, Vec<(ResearcherId, S)>>) -> Self {
        PersonTermIndex { formula, postings }
    }

    pub fn postings(&self, term: &str) -> &[(ResearcherId, S)] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[(ResearcherId, S)])> {
        self.postings.iter().map(|(t, p)| (t.as_str(), p.as_slice()))
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn posting_count(&self) -> usize {
        self.postings.values().map(Vec::len).sum()
    }

    /// Sorted distinct researchers.
    pub fn researchers(&self) -> Vec<ResearcherId> {
        let mut rs: Vec<ResearcherId> =
            self.postings.values().flatten().map(|(r, _)| r.clone()).collect();
        rs.sort();
        rs.dedup();
        rs
    }
}

impl<S: Scalar> Snapshot for PersonTermIndex<S> {
    const KIND: Tag = *b"PERS";

    fn to_writer(&self) -> Result<SnapshotWriter, SnapshotError> {
        SnapshotWriter::new(Self::KIND).block(*b"FORM", &self.formula)?.block(*b"POST", &self.postings)
    }

    fn from_reader(r: &SnapshotReader) -> Result<Self, SnapshotError> {
        Ok(PersonTermIndex { formula: r.block(*b"FORM")?, postings: r.block(*b"POST")? })
    }
}

/// Apply a formula to every (term, researcher) pair with `n_t ≥ 1`.
pub fn build_person_index<S: Scalar>(
    index: &PaperTermIndex,
    authorship: &Authorship,
    formula: Formula,
    w: &TransformWeights<S>,
    params: &Bm25fParams<S>,
) -> PersonTermIndex<S> {
    let mut postings = BTreeMap::new();
    for term in index.terms() {
        let stats = gather_term_stats(index, authorship, term, params);
        let scored: Vec<(ResearcherId, S)> = match formula {
            Formula::F1 => stats.iter().map(|(r, s)| (r.clone(), formula1(s, w))).collect(),
            Formula::F2 => stats
                .iter()
                .map(|(r, s)| (r.clone(), formula2(s, w).expect("n_t >= 1 for gathered researchers")))
                .collect(),
            Formula::F3 => two_round_scores(&stats, w).1,
        };
        if !scored.is_empty() {
            postings.insert(term.to_owned(), scored);
        }
    }
    PersonTermIndex { formula, postings }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(sum: f64, occ: &[u32], total: usize, top: &[f64]) -> AuthorTermStats<f64> {
        AuthorTermStats {
            bm25f_sum: sum,
            papers_with_term: occ.len(),
            total_papers: total,
            occurrences: occ.to_vec(),
            top5_scores: top.to_vec(),
        }
    }

    fn ones() -> TransformWeights<f64> {
        TransformWeights::default()
    }

    #[test]
    fn formula1_cannot_separate_a_from_b() {
        let a = stats(20.0, &[10, 10, 10, 10, 10], 10, &[]);
        let b = stats(20.0, &[46, 1, 1, 1, 1], 10, &[]);
        assert!((formula1(&a, &ones()) - formula1(&b, &ones())).abs() < 1e-12);
        let expect = 21.0 * 6f64.ln() / 11f64.ln();
        assert!((formula1(&a, &ones()) - expect).abs() < 1e-12);
        assert_eq!(formula1(&stats(0.0, &[], 10, &[]), &ones()), 0.0);
    }

    #[test]
    fn formula2_prefers_even_spread() {
        let a = stats(20.0, &[10, 10, 10, 10, 10], 10, &[]);
        let b = stats(20.0, &[46, 1, 1, 1, 1], 10, &[]);
        let c = stats(3.0, &[1, 1, 1, 1, 1], 10, &[]);
        assert_eq!(variance::<f64>(&a.occurrences), Some(0.0));
        assert_eq!(sigmoid(0.0f64), 0.5);
        let (fa, fb, fc) = (formula2(&a, &ones()).unwrap(), formula2(&b, &ones()).unwrap(), formula2(&c, &ones()).unwrap());
        assert!(fa > fb);
        assert!(fa > fc);
        assert_eq!(formula2(&stats(0.0, &[], 3, &[]), &ones()), Err(PersonError::UndefinedVariance));
    }

    #[test]
    fn formula3_cases() {
        let w = TransformWeights { w1: 1.3, w2: 0.7, w3: 2.0, w4: 0.9 };
        let s = stats(20.0, &[10, 10, 10, 10, 10], 10, &[4.0, 4.0, 4.0, 4.0, 4.0]);
        let f1w = TransformWeights { w1: 1.3, w2: 0.7, w3: 0.9, w4: 0.0 };
        let zero = GoldStandard { avg5_global: 0.0 };
        assert!((formula3(&s, &zero, &w) - formula1(&s, &f1w)).abs() < 1e-12);
        let below = GoldStandard { avg5_global: 3.0 };
        assert_eq!(gold_penalty(&s, &below, 1.0), 1.0);
        let s3 = stats(9.0, &[1, 1, 1], 10, &[3.0, 3.0, 3.0]);
        let gold = GoldStandard { avg5_global: 5.0 };
        let factor = gold_penalty(&s3, &gold, 1.0);
        assert!((factor - (2f64.tanh() + 1.0)).abs() < 1e-12);
        assert!((factor - 1.9640).abs() < 1e-4);
        let w1 = ones();
        assert!((formula3(&s3, &gold, &w1) * factor - formula3(&s3, &zero, &w1)).abs() < 1e-12);
    }

    #[test]
    fn gold_standard() {
        let empty: BTreeMap<ResearcherId, AuthorTermStats<f64>> = BTreeMap::new();
        assert_eq!(compute_gold(&[], &empty).avg5_global, 0.0);
        let one = BTreeMap::from([("r".into(), stats(4.0, &[1], 1, &[4.0]))]);
        assert_eq!(compute_gold(&["r".into()], &one).avg5_global, 4.0);
        let two = BTreeMap::from([
            ("a".into(), stats(6.0, &[1, 1, 1], 3, &[3.0, 2.0, 1.0])),
            ("b".into(), stats(15.0, &[1, 1, 1], 3, &[6.0, 5.0, 4.0])),
        ]);
        let g = compute_gold(&["b".into(), "a".into()], &two);
        assert!((g.avg5_global - 21.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn top5_kept_sorted() {
        let mut s = AuthorTermStats::<f64>::empty(8);
        for v in [1.0, 5.0, 3.0, 7.0, 2.0, 6.0, 0.5, 4.0] {
            s.add_paper(v, 1);
        }
        assert_eq!(s.top5_scores, vec![7.0, 6.0, 5.0, 4.0, 3.0]);
        assert_eq!(s.papers_with_term, 8);
        assert_eq!(s.bm25f_sum, 28.5);
    }

    #[test]
    fn works_in_single_precision() {
        let a = AuthorTermStats::<f32> {
            bm25f_sum: 20.0,
            papers_with_term: 5,
            total_papers: 10,
            occurrences: vec![10; 5],
            top5_scores: vec![],
        };
        let v = formula1(&a, &TransformWeights::default());
        assert!((v - 21.0 * 6f32.ln() / 11f32.ln()).abs() < 1e-4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_stats() -> impl Strategy<Value = AuthorTermStats<f64>> {
            (0.0f64..50.0, prop::collection::vec(1u32..40, 1..8), 0usize..10, prop::collection::vec(0.0f64..10.0, 0..5))
                .prop_map(|(sum, occ, extra, mut top)| {
                    top.sort_by(|a, b| b.partial_cmp(a).unwrap());
                    let n = occ.len();
                    stats(sum, &occ, n + extra, &top)
                })
        }

        fn weights() -> impl Strategy<Value = TransformWeights<f64>> {
            (0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0).prop_map(|(w1, w2, w3, w4)| TransformWeights { w1, w2, w3, w4 })
        }

        proptest! {
            #[test]
            fn formula2_decreasing_in_variance(s in any_stats(), w in weights(), bump in 1u32..30) {
                // Spreading one paper's count away from the rest raises the variance.
                let base = stats(s.bm25f_sum, &vec![5; s.papers_with_term.max(2)], s.total_papers.max(2), &[]);
                let mut spread = base.clone();
                spread.occurrences[0] += bump;
                let vb: f64 = variance(&base.occurrences).unwrap();
                let vs: f64 = variance(&spread.occurrences).unwrap();
                prop_assert!(vs > vb);
                prop_assert!(formula2(&spread, &w).unwrap() < formula2(&base, &w).unwrap());
            }

            #[test]
            fn formula3_penalty_monotone(s in any_stats(), w in weights(), g1 in 0.0f64..10.0, dg in 0.0f64..10.0) {
                let lo = GoldStandard { avg5_global: g1 };
                let hi = GoldStandard { avg5_global: g1 + dg };
                prop_assert!(formula3(&s, &hi, &w) <= formula3(&s, &lo, &w));
                let beaten = GoldStandard { avg5_global: s.avg5() };
                prop_assert_eq!(gold_penalty(&s, &beaten, w.w3), 1.0);
            }

            #[test]
            fn log_linear_in_w1(s in any_stats(), w in weights(), gold in 0.0f64..10.0) {
                let mut w2x = w;
                w2x.w1 = 2.0 * w.w1;
                let g = GoldStandard { avg5_global: gold };
                let expect = w.w1 * (s.bm25f_sum + 1.0).ln();
                let d1 = formula1(&s, &w2x).ln() - formula1(&s, &w).ln();
                let d2 = formula2(&s, &w2x).unwrap().ln() - formula2(&s, &w).unwrap().ln();
                let d3 = formula3(&s, &g, &w2x).ln() - formula3(&s, &g, &w).ln();
                for d in [d1, d2, d3] {
                    prop_assert!((d - expect).abs() < 1e-9 * (1.0 + expect.abs()));
                }
            }
        }
    }
}
