//! Fixed concept hierarchy, researcher-to-leaf classification and the
//! browse JSON document.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::ResearcherId;
use crate::scalar::{cmp_desc, Scalar};

/// Maximum number of levels, root included.
pub const MAX_DEPTH: usize = 6;
pub const DEFAULT_MAX_LEAVES: usize = 7;
pub const DEFAULT_PERCENTILE: f64 = 75.0;
pub const BROWSE_FORMAT_VERSION: u32 = 1;

/// Small computer-science hierarchy used when no tree file is given.
pub const DEFAULT_TREE: &str = include_str!("../data/default_tree.json");

#[derive(Debug, Error)]
pub enum BrowseError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("tree file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),
    #[error("root {0:?} is not a node")]
    MissingRoot(String),
    #[error("node {parent:?} references missing child {child:?}")]
    MissingChild { parent: String, child: String },
    #[error("node {0:?} has more than one parent")]
    MultipleParents(String),
    #[error("root {0:?} has a parent")]
    RootHasParent(String),
    #[error("node {0:?} is unreachable from the root (cycle or orphan)")]
    Unreachable(String),
    #[error("node {node:?} sits at level {depth}, deeper than {MAX_DEPTH}")]
    TooDeep { node: String, depth: usize },
    #[error("node {0:?} has an empty label")]
    EmptyLabel(String),
    #[error("max_leaves must be at least 1")]
    InvalidCriteria,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNodeSpec {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub children: Vec<String>,
}

/// On-disk tree layout: a flat node list with child references.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeFile {
    pub root: String,
    pub nodes: Vec<TreeNodeSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptNode {
    pub label: String,
    pub children: Vec<String>,
}

/// Validated single-rooted tree of at most [`MAX_DEPTH`] levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptTree {
    root: String,
    nodes: BTreeMap<String, ConceptNode>,
    /// Leaf ids in depth-first order.
    leaves: Vec<String>,
}

impl ConceptTree {
    pub fn from_file(file: TreeFile) -> Result<Self, BrowseError> {
        let mut nodes = BTreeMap::new();
        for n in file.nodes {
            if n.label.trim().is_empty() {
                return Err(BrowseError::EmptyLabel(n.id));
            }
            if nodes.contains_key(&n.id) {
                return Err(BrowseError::DuplicateNode(n.id));
            }
            nodes.insert(n.id, ConceptNode { label: n.label, children: n.children });
        }
        if !nodes.contains_key(&file.root) {
            return Err(BrowseError::MissingRoot(file.root));
        }
        let mut parents: BTreeSet<&str> = BTreeSet::new();
        for (id, n) in &nodes {
            for c in &n.children {
                if !nodes.contains_key(c) {
                    return Err(BrowseError::MissingChild { parent: id.clone(), child: c.clone() });
                }
                if !parents.insert(c) {
                    return Err(BrowseError::MultipleParents(c.clone()));
                }
            }
        }
        if parents.contains(file.root.as_str()) {
            return Err(BrowseError::RootHasParent(file.root));
        }

        let mut leaves = Vec::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![(file.root.as_str(), 1usize)];
        while let Some((id, depth)) = stack.pop() {
            if depth > MAX_DEPTH {
                return Err(BrowseError::TooDeep { node: id.to_owned(), depth });
            }
            seen.insert(id);
            let node = &nodes[id];
            if node.children.is_empty() {
                leaves.push(id.to_owned());
            }
            stack.extend(node.children.iter().rev().map(|c| (c.as_str(), depth + 1)));
        }
        if let Some(orphan) = nodes.keys().find(|k| !seen.contains(k.as_str())) {
            return Err(BrowseError::Unreachable(orphan.clone()));
        }
        Ok(ConceptTree { root: file.root, nodes, leaves })
    }

    pub fn parse(json: &str) -> Result<Self, BrowseError> {
        Self::from_file(serde_json::from_str(json)?)
    }

    pub fn default_tree() -> Self {
        Self::parse(DEFAULT_TREE).expect("bundled tree is valid")
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn node(&self, id: &str) -> Option<&ConceptNode> {
        self.nodes.get(id)
    }

    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    pub fn leaf_labels(&self) -> impl Iterator<Item = &str> {
        self.leaves.iter().map(|id| self.nodes[id].label.as_str())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn to_file(&self) -> TreeFile {
        TreeFile {
            root: self.root.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|(id, n)| TreeNodeSpec { id: id.clone(), label: n.label.clone(), children: n.children.clone() })
                .collect(),
        }
    }
}

pub fn load_tree(path: &Path) -> Result<ConceptTree, BrowseError> {
    let text = fs::read_to_string(path).map_err(|source| BrowseError::Io { path: path.to_owned(), source })?;
    ConceptTree::parse(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold<S> {
    /// Same cut-off for every leaf.
    Fixed(S),
    /// Percentile (0..=100) of each leaf's nonzero scores.
    PerLeafPercentile(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrowseCriteria<S> {
    pub threshold: Threshold<S>,
    pub max_leaves: usize,
}

impl<S: Scalar> Default for BrowseCriteria<S> {
    fn default() -> Self {
        BrowseCriteria { threshold: Threshold::PerLeafPercentile(DEFAULT_PERCENTILE), max_leaves: DEFAULT_MAX_LEAVES }
    }
}

/// Linear-interpolation percentile of unsorted values; `None` when empty.
pub fn percentile<S: Scalar>(values: &[S], pct: f64) -> Option<S> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let pos = pct.clamp(0.0, 100.0) / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = S::lit(pos - lo as f64);
    Some(v[lo] + (v[hi] - v[lo]) * frac)
}

/// Leaf id → researchers, descending by score then id. Empty leaves are absent.
pub type LeafAssignment<S> = BTreeMap<String, Vec<(ResearcherId, S)>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Classification<S> {
    pub assignment: LeafAssignment<S>,
    /// Qualifying threshold used for each leaf; absent when the leaf had no nonzero score.
    pub thresholds: BTreeMap<String, S>,
    /// Researchers placed only through the top-leaf fallback.
    pub fallback: Vec<ResearcherId>,
    /// Researchers with no nonzero leaf score, left unplaced.
    pub unplaced: Vec<ResearcherId>,
}

/// Place researchers into leaves. `scores` maps researcher → leaf label → score.
pub fn classify<S: Scalar>(
    tree: &ConceptTree,
    scores: &BTreeMap<ResearcherId, BTreeMap<String, S>>,
    criteria: &BrowseCriteria<S>,
) -> Result<Classification<S>, BrowseError> {
    if criteria.max_leaves == 0 {
        return Err(BrowseError::InvalidCriteria);
    }
    let leaf_score = |r: &BTreeMap<String, S>, leaf: &str| -> S {
        r.get(&tree.nodes[leaf].label).copied().unwrap_or(S::zero())
    };

    let mut thresholds = BTreeMap::new();
    for leaf in &tree.leaves {
        let nonzero: Vec<S> = scores.values().map(|r| leaf_score(r, leaf)).filter(|&s| s > S::zero()).collect();
        let t = match criteria.threshold {
            Threshold::Fixed(t) => (!nonzero.is_empty()).then_some(t),
            Threshold::PerLeafPercentile(p) => percentile(&nonzero, p),
        };
        if let Some(t) = t {
            thresholds.insert(leaf.clone(), t);
        }
    }

    let mut assignment: LeafAssignment<S> = BTreeMap::new();
    let mut fallback = Vec::new();
    let mut unplaced = Vec::new();
    for (researcher, row) in scores {
        let mut ranked: Vec<(&String, S)> = tree
            .leaves
            .iter()
            .map(|leaf| (leaf, leaf_score(row, leaf)))
            .filter(|&(_, s)| s > S::zero())
            .collect();
        if ranked.is_empty() {
            unplaced.push(researcher.clone());
            continue;
        }
        ranked.sort_by(|a, b| cmp_desc(a.1, b.1).then_with(|| a.0.cmp(b.0)));
        let qualified: Vec<(&String, S)> =
            ranked.iter().copied().filter(|(leaf, s)| thresholds.get(*leaf).is_some_and(|t| *s >= *t)).collect();
        let chosen = if qualified.is_empty() {
            fallback.push(researcher.clone());
            vec![ranked[0]]
        } else {
            qualified.into_iter().take(criteria.max_leaves).collect()
        };
        for (leaf, s) in chosen {
            assignment.entry(leaf.clone()).or_default().push((researcher.clone(), s));
        }
    }
    for list in assignment.values_mut() {
        list.sort_by(|a, b| cmp_desc(a.1, b.1).then_with(|| a.0.cmp(&b.0)));
    }
    Ok(Classification { assignment, thresholds, fallback, unplaced })
}

/// Score table for [`classify`]: every leaf label is run through `score_label`
/// once.
pub fn leaf_scores<S, F>(tree: &ConceptTree, mut score_label: F) -> BTreeMap<ResearcherId, BTreeMap<String, S>>
where
    S: Scalar,
    F: FnMut(&str) -> Vec<(ResearcherId, S)>,
{
    let labels: BTreeSet<&str> = tree.leaf_labels().collect();
    let mut out: BTreeMap<ResearcherId, BTreeMap<String, S>> = BTreeMap::new();
    for label in labels {
        for (r, s) in score_label(label) {
            out.entry(r).or_default().insert(label.to_owned(), s);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedResearcher<S> {
    pub id: ResearcherId,
    pub score: S,
}

/// Emitted node: internal nodes carry `children`, retained leaves carry `researchers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "S: Deserialize<'de>"))]
pub struct BrowseNode<S> {
    pub id: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<BrowseNode<S>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub researchers: Option<Vec<RankedResearcher<S>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "S: Deserialize<'de>"))]
pub struct BrowseDocument<S> {
    pub version: u32,
    pub root: BrowseNode<S>,
}

impl<S: Scalar> BrowseDocument<S> {
    /// Mirror the tree, dropping unassigned leaves and subtrees left without
    /// any leaf. The root is always present.
    pub fn build(tree: &ConceptTree, assignment: &LeafAssignment<S>) -> Self {
        fn walk<S: Scalar>(tree: &ConceptTree, id: &str, a: &LeafAssignment<S>) -> Option<BrowseNode<S>> {
            let node = &tree.nodes[id];
            if node.children.is_empty() {
                let list = a.get(id).filter(|l| !l.is_empty())?;
                return Some(BrowseNode {
                    id: id.to_owned(),
                    label: node.label.clone(),
                    children: Vec::new(),
                    researchers: Some(list.iter().map(|(r, s)| RankedResearcher { id: r.clone(), score: *s }).collect()),
                });
            }
            let children: Vec<BrowseNode<S>> = node.children.iter().filter_map(|c| walk(tree, c, a)).collect();
            (!children.is_empty()).then(|| BrowseNode { id: id.to_owned(), label: node.label.clone(), children, researchers: None })
        }
        let root = walk(tree, &tree.root, assignment).unwrap_or_else(|| BrowseNode {
            id: tree.root.clone(),
            label: tree.nodes[&tree.root].label.clone(),
            children: Vec::new(),
            researchers: None,
        });
        BrowseDocument { version: BROWSE_FORMAT_VERSION, root }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("browse document serializes");
        s.push('\n');
        s
    }

    pub fn parse(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    /// Leaf lists recovered from the document.
    pub fn assignment(&self) -> LeafAssignment<S> {
        fn walk<S: Scalar>(n: &BrowseNode<S>, out: &mut LeafAssignment<S>) {
            if let Some(rs) = &n.researchers {
                out.insert(n.id.clone(), rs.iter().map(|r| (r.id.clone(), r.score)).collect());
            }
            for c in &n.children {
                walk(c, out);
            }
        }
        let mut out = BTreeMap::new();
        walk(&self.root, &mut out);
        out
    }

    /// Subtree rooted at node `id`, if it was emitted.
    pub fn subtree(&self, id: &str) -> Option<&BrowseNode<S>> {
        fn find<'a, S>(n: &'a BrowseNode<S>, id: &str) -> Option<&'a BrowseNode<S>> {
            if n.id == id {
                return Some(n);
            }
            n.children.iter().find_map(|c| find(c, id))
        }
        find(&self.root, id)
    }
}

pub fn emit_browse_json<S: Scalar>(tree: &ConceptTree, assignment: &LeafAssignment<S>, path: &Path) -> Result<(), BrowseError> {
    let doc = BrowseDocument::build(tree, assignment);
    fs::write(path, doc.to_json()).map_err(|source| BrowseError::Io { path: path.to_owned(), source })
}
