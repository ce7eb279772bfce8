//! Prefix trie for frequency-ranked query autocomplete.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::TermDictionary;
use crate::snapshot::{Snapshot, SnapshotError, SnapshotReader, SnapshotWriter, Tag};

/// Shortest prefix, in characters, that produces suggestions.
pub const MIN_PREFIX_CHARS: usize = 3;
pub const DEFAULT_LIMIT: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrieError {
    #[error("cannot insert an empty term")]
    EmptyTerm,
    #[error("term {0:?} is not lowercase")]
    NotLowercase(String),
    #[error("term {0:?} is not a kb term but has frequency {1}")]
    NonKbFrequency(String, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Terminal {
    pub frequency: u64,
    pub kb: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Node {
    children: BTreeMap<char, u32>,
    terminal: Option<Terminal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestStatus {
    Ok,
    TooShort,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestion {
    pub term: String,
    pub frequency: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestions {
    pub status: SuggestStatus,
    pub items: Vec<Suggestion>,
}

/// Character trie over dictionary terms, nodes kept in an arena.
#[derive(Debug)]
pub struct SuggestTrie {
    nodes: Vec<Node>,
    terminals: usize,
    touched: AtomicU64,
}

impl Default for SuggestTrie {
    fn default() -> Self {
        SuggestTrie { nodes: vec![Node::default()], terminals: 0, touched: AtomicU64::new(0) }
    }
}

impl Clone for SuggestTrie {
    fn clone(&self) -> Self {
        SuggestTrie { nodes: self.nodes.clone(), terminals: self.terminals, touched: AtomicU64::new(0) }
    }
}

impl PartialEq for SuggestTrie {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
    }
}

impl SuggestTrie {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every dictionary term, with its frequency and kb flag.
    pub fn from_dictionary(dict: &TermDictionary) -> Result<Self, TrieError> {
        let mut t = Self::new();
        for (term, entry) in dict.iter() {
            let kb = entry.source.includes_kb();
            t.insert(term, if kb { entry.frequency } else { 0 }, kb)?;
        }
        Ok(t)
    }

    /// Insert or overwrite a terminal.
    pub fn insert(&mut self, term: &str, frequency: u64, kb: bool) -> Result<(), TrieError> {
        if term.is_empty() {
            return Err(TrieError::EmptyTerm);
        }
        if term.to_lowercase() != term {
            return Err(TrieError::NotLowercase(term.to_owned()));
        }
        if !kb && frequency > 0 {
            return Err(TrieError::NonKbFrequency(term.to_owned(), frequency));
        }
        let mut cur = 0usize;
        for ch in term.chars() {
            cur = match self.nodes[cur].children.get(&ch) {
                Some(&next) => next as usize,
                None => {
                    let next = self.nodes.len();
                    self.nodes.push(Node::default());
                    self.nodes[cur].children.insert(ch, next as u32);
                    next
                }
            };
        }
        if self.nodes[cur].terminal.is_none() {
            self.terminals += 1;
        }
        self.nodes[cur].terminal = Some(Terminal { frequency, kb });
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn terminal_count(&self) -> usize {
        self.terminals
    }

    /// Nodes visited by walks since construction or the last reset.
    pub fn nodes_touched(&self) -> u64 {
        self.touched.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        self.touched.store(0, Ordering::Relaxed);
    }

    fn walk(&self, s: &str) -> Option<usize> {
        let mut cur = 0usize;
        self.touched.fetch_add(1, Ordering::Relaxed);
        for ch in s.chars() {
            cur = *self.nodes[cur].children.get(&ch)? as usize;
            self.touched.fetch_add(1, Ordering::Relaxed);
        }
        Some(cur)
    }

    pub fn lookup(&self, term: &str) -> Option<Terminal> {
        self.walk(term).and_then(|n| self.nodes[n].terminal)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.lookup(term).is_some()
    }

    /// All terminals in lexicographic order.
    pub fn terms(&self) -> Vec<(String, Terminal)> {
        let mut out = Vec::with_capacity(self.terminals);
        self.collect(0, &mut String::new(), &mut out);
        out
    }

    fn collect(&self, node: usize, buf: &mut String, out: &mut Vec<(String, Terminal)>) {
        if let Some(t) = self.nodes[node].terminal {
            out.push((buf.clone(), t));
        }
        for (&ch, &next) in &self.nodes[node].children {
            buf.push(ch);
            self.collect(next as usize, buf, out);
            buf.pop();
        }
    }

    /// Completions of `prefix` (lowercased), frequency descending, ties
    /// lexicographic; prefixes under three characters yield nothing.
    pub fn suggest(&self, prefix: &str, limit: usize) -> Suggestions {
        let prefix = prefix.to_lowercase();
        if prefix.chars().count() < MIN_PREFIX_CHARS {
            return Suggestions { status: SuggestStatus::TooShort, items: Vec::new() };
        }
        let mut items = Vec::new();
        if let Some(start) = self.walk(&prefix) {
            let mut found = Vec::new();
            self.collect(start, &mut prefix.clone(), &mut found);
            found.sort_by(|a, b| b.1.frequency.cmp(&a.1.frequency).then_with(|| a.0.cmp(&b.0)));
            items = found.into_iter().take(limit).map(|(term, t)| Suggestion { term, frequency: t.frequency }).collect();
        }
        Suggestions { status: SuggestStatus::Ok, items }
    }
}

impl Snapshot for SuggestTrie {
    const KIND: Tag = *b"TRIE";

    fn to_writer(&self) -> Result<SnapshotWriter, SnapshotError> {
        SnapshotWriter::new(Self::KIND).block(*b"TERM", &self.terms())
    }

    fn from_reader(r: &SnapshotReader) -> Result<Self, SnapshotError> {
        let terms: Vec<(String, Terminal)> = r.block(*b"TERM")?;
        let mut t = SuggestTrie::new();
        for (term, info) in terms {
            t.insert(&term, info.frequency, info.kb).map_err(|e| SnapshotError::Invalid(e.to_string()))?;
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn machine_trie() -> SuggestTrie {
        let mut t = SuggestTrie::new();
        for (term, f) in [
            ("machine", 120),
            ("machine learning", 300),
            ("machine translation", 80),
            ("machine vision", 40),
            ("machinery", 0),
            ("magnet", 7),
        ] {
            t.insert(term, f, f > 0).unwrap();
        }
        t
    }

    #[test]
    fn nested_prefixes_and_counts() {
        let t = machine_trie();
        assert!(t.contains("machine") && t.contains("machine learning"));
        assert!(!t.contains("machin"));
        assert_eq!(t.terminal_count(), 6);
        let mut t2 = t.clone();
        let before = t2.node_count();
        t2.insert("machine", 1, true).unwrap();
        assert_eq!((t2.node_count(), t2.terminal_count()), (before, 6));
        assert_eq!(t2.lookup("machine").unwrap().frequency, 1);
    }

    #[test]
    fn insert_errors() {
        let mut t = SuggestTrie::new();
        assert_eq!(t.insert("", 0, false), Err(TrieError::EmptyTerm));
        assert!(matches!(t.insert("Machine", 0, false), Err(TrieError::NotLowercase(_))));
        assert!(matches!(t.insert("x", 3, false), Err(TrieError::NonKbFrequency(..))));
    }

    #[test]
    fn machin_completions() {
        let t = machine_trie();
        let s = t.suggest("machin", DEFAULT_LIMIT);
        assert_eq!(s.status, SuggestStatus::Ok);
        let terms: Vec<&str> = s.items.iter().map(|i| i.term.as_str()).collect();
        assert_eq!(terms, vec!["machine learning", "machine", "machine translation", "machine vision", "machinery"]);
        assert_eq!(t.suggest("ma", 10), Suggestions { status: SuggestStatus::TooShort, items: vec![] });
        assert_eq!(t.suggest("xyz", 10), Suggestions { status: SuggestStatus::Ok, items: vec![] });
        assert_eq!(t.suggest("MACHIN", 2).items.len(), 2);
    }

    #[test]
    fn lookup_touches_length_plus_one_nodes() {
        let t = machine_trie();
        t.reset_counter();
        t.lookup("machine learning");
        assert_eq!(t.nodes_touched(), "machine learning".chars().count() as u64 + 1);
    }

    #[test]
    fn unicode_keys() {
        let mut t = SuggestTrie::new();
        t.insert("réseau neuronal", 0, false).unwrap();
        assert_eq!(t.suggest("rés", 10).items[0].term, "réseau neuronal");
        assert_eq!(t.suggest("ré", 10).status, SuggestStatus::TooShort);
    }

    #[test]
    fn snapshot_round_trip() {
        let t = machine_trie();
        let back = SuggestTrie::from_bytes(&t.to_bytes().unwrap()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.terms(), t.terms());
    }

    proptest! {
        #[test]
        fn kb_terms_outrank_others(words in proptest::collection::btree_set("[abc]{3,6}", 1..30), kb_mask in any::<u32>()) {
            let mut t = SuggestTrie::new();
            for (i, w) in words.iter().enumerate() {
                let kb = kb_mask >> (i % 32) & 1 == 1;
                t.insert(w, if kb { 1 + i as u64 } else { 0 }, kb).unwrap();
            }
            for prefix in ["aaa", "abc", "bca", "ccc"] {
                let items = t.suggest(prefix, usize::MAX).items;
                let first_zero = items.iter().position(|s| s.frequency == 0).unwrap_or(items.len());
                prop_assert!(items[first_zero..].iter().all(|s| s.frequency == 0));
                prop_assert!(items[..first_zero].iter().all(|s| t.lookup(&s.term).unwrap().kb));
            }
        }
    }
}
