//! libfm text export of person-term scores: `"<score> <researcher>:1 <term>:1"`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::LatentError;
use crate::ids::ResearcherId;
use crate::person::PersonTermIndex;
use crate::scalar::Scalar;

/// Render like C's `%.6g`: six significant digits, trailing zeros dropped.
pub fn format_score(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_owned()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn libfm_line(score: f64, researcher: u64, term: u64) -> String {
    format!("{} {}:1 {}:1", format_score(score), researcher, term)
}

/// Parse a line written by [`libfm_line`] into (score, researcher id, term id).
pub fn parse_libfm_line(line: &str) -> Result<(f64, u64, u64), LatentError> {
    let bad = || LatentError::Parse(line.to_owned());
    let mut parts = line.split(' ');
    let score: f64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let mut feature = || -> Option<u64> { parts.next()?.strip_suffix(":1")?.parse().ok() };
    let r = feature().ok_or_else(bad)?;
    let t = feature().ok_or_else(bad)?;
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok((score, r, t))
}

/// Integer feature ids; researchers and terms never share an id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LibfmIds {
    researchers: BTreeMap<ResearcherId, u64>,
    terms: BTreeMap<String, u64>,
}

impl LibfmIds {
    /// Researchers get `0..R` in id order, terms `R..R+T` in lexicographic order.
    pub fn assign<S: Scalar>(index: &PersonTermIndex<S>) -> Self {
        let researchers: BTreeMap<ResearcherId, u64> =
            index.researchers().into_iter().enumerate().map(|(i, r)| (r, i as u64)).collect();
        let base = researchers.len() as u64;
        let terms = index.terms().enumerate().map(|(i, t)| (t.to_owned(), base + i as u64)).collect();
        LibfmIds { researchers, terms }
    }

    /// Caller-supplied ids; every id must be unique across both maps.
    pub fn from_maps(researchers: BTreeMap<ResearcherId, u64>, terms: BTreeMap<String, u64>) -> Result<Self, LatentError> {
        let mut seen = std::collections::BTreeSet::new();
        for &id in researchers.values().chain(terms.values()) {
            if !seen.insert(id) {
                return Err(LatentError::IdCollision(id));
            }
        }
        Ok(LibfmIds { researchers, terms })
    }

    pub fn researcher(&self, r: &ResearcherId) -> Option<u64> {
        self.researchers.get(r).copied()
    }

    pub fn term(&self, t: &str) -> Option<u64> {
        self.terms.get(t).copied()
    }
}

/// One line per posting, terms in lexicographic order, postings in index order.
pub fn write_libfm<S: Scalar, W: Write>(index: &PersonTermIndex<S>, ids: &LibfmIds, out: &mut W) -> Result<usize, LatentError> {
    let mut lines = 0;
    for (term, postings) in index.iter() {
        let tid = ids.term(term).ok_or_else(|| LatentError::MissingId(term.to_owned()))?;
        for (r, s) in postings {
            let rid = ids.researcher(r).ok_or_else(|| LatentError::MissingId(r.to_string()))?;
            writeln!(out, "{}", libfm_line(s.as_f64(), rid, tid))?;
            lines += 1;
        }
    }
    Ok(lines)
}

pub fn export_libfm<S: Scalar>(index: &PersonTermIndex<S>, ids: &LibfmIds, path: &Path) -> Result<usize, LatentError> {
    let mut out = BufWriter::new(File::create(path)?);
    let n = write_libfm(index, ids, &mut out)?;
    out.flush()?;
    Ok(n)
}
