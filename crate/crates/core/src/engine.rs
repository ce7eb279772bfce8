//! End-to-end pipeline: build every index from raw inputs, persist and
//! reload them as a snapshot directory, and answer queries.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bm25f::{build_index, Bm25fParams, IndexError, PaperTermIndex};
use crate::browse::{classify, leaf_scores, BrowseCriteria, BrowseDocument, BrowseError, Classification, ConceptTree, TreeFile};
use crate::corpus::{load_publications, Authorship, CorpusError, InputFormat};
use crate::ids::ResearcherId;
use crate::knowledge::{load_kb, search, HybridScorer, KbError, KbPaths, KnowledgeBase, SearchOutcome};
use crate::latent::{LatentError, LatentIndex, NmfConfig, PersonTermMatrix, DEFAULT_RANK};
use crate::latent::{export_libfm, svd::DEFAULT_SEED, LibfmIds};
use crate::lexicon::{build_dictionary, clean_wiki_terms, StopWords, TermDictionary};
use crate::person::{build_person_index, Formula, PersonTermIndex, TransformWeights};
use crate::scalar::Scalar;
use crate::snapshot::{Snapshot, SnapshotError, SnapshotReader, SnapshotWriter, Tag};
use crate::suggest::{SuggestTrie, Suggestions, TrieError};

pub const DICTIONARY_FILE: &str = "dictionary.snap";
pub const PAPER_INDEX_FILE: &str = "paper_index.snap";
pub const AUTHORSHIP_FILE: &str = "authorship.snap";
pub const PERSON_INDEX_FILE: &str = "person_index.snap";
pub const TRIE_FILE: &str = "trie.snap";
pub const KB_FILE: &str = "kb.snap";
pub const SETTINGS_FILE: &str = "engine.snap";

pub const SNAPSHOT_FILES: [&str; 7] =
    [DICTIONARY_FILE, PAPER_INDEX_FILE, AUTHORSHIP_FILE, PERSON_INDEX_FILE, TRIE_FILE, KB_FILE, SETTINGS_FILE];

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Browse(#[from] BrowseError),
    #[error(transparent)]
    Trie(#[from] TrieError),
    #[error(transparent)]
    Latent(#[from] LatentError),
    #[error("{}: {source}", path.display())]
    Snapshot { path: PathBuf, source: SnapshotError },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

/// Tunable scoring parameters; persisted alongside the indexes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig<S> {
    pub bm25f: Bm25fParams<S>,
    pub formula: Formula,
    pub weights: TransformWeights<S>,
    /// Weight of the matching component in the hybrid score.
    pub alpha: S,
    pub browse: BrowseCriteria<S>,
}

impl<S: Scalar> Default for EngineConfig<S> {
    fn default() -> Self {
        EngineConfig {
            bm25f: Bm25fParams::default(),
            formula: Formula::F3,
            weights: TransformWeights::default(),
            alpha: S::lit(crate::knowledge::DEFAULT_ALPHA),
            browse: BrowseCriteria::default(),
        }
    }
}

impl<S: Scalar> EngineConfig<S> {
    pub fn validate(&self) -> Result<(), EngineError> {
        self.bm25f.validated()?;
        if !(self.alpha >= S::zero() && self.alpha <= S::one()) {
            return Err(KbError::InvalidAlpha(self.alpha.as_f64()).into());
        }
        if self.browse.max_leaves == 0 {
            return Err(BrowseError::InvalidCriteria.into());
        }
        Ok(())
    }
}

/// Raw input locations for [`Engine::build`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineInputs {
    pub corpus: PathBuf,
    pub corpus_format: InputFormat,
    /// One title per line; optional.
    pub wiki_titles: Option<PathBuf>,
    pub kb: KbPaths,
    /// One word per line; the bundled English list when absent.
    pub stop_words: Option<PathBuf>,
    /// Concept tree JSON; the bundled tree when absent.
    pub tree: Option<PathBuf>,
}

/// Counters reported by a build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BuildReport {
    pub records: usize,
    pub skipped_rows: usize,
    pub dictionary_terms: usize,
    pub indexed_terms: usize,
    pub researchers: usize,
    pub person_postings: usize,
}

#[derive(Serialize, Deserialize)]
struct Settings<S> {
    config: EngineConfig<S>,
    stop_words: Vec<String>,
    tree: TreeFile,
}

struct SettingsSnap<S>(Settings<S>);

impl<S: Scalar> Snapshot for SettingsSnap<S> {
    const KIND: Tag = *b"ENGN";

    fn to_writer(&self) -> Result<SnapshotWriter, SnapshotError> {
        SnapshotWriter::new(Self::KIND)
            .block(*b"CONF", &self.0.config)?
            .block(*b"STOP", &self.0.stop_words)?
            .block(*b"TREE", &self.0.tree)
    }

    fn from_reader(r: &SnapshotReader) -> Result<Self, SnapshotError> {
        Ok(SettingsSnap(Settings { config: r.block(*b"CONF")?, stop_words: r.block(*b"STOP")?, tree: r.block(*b"TREE")? }))
    }
}

/// Which latent baseline to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentKind {
    Lsa,
    Nmf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatentConfig {
    pub rank: usize,
    /// L2-normalize researcher columns before factorizing.
    pub normalize: bool,
    pub seed: u64,
    pub nmf: NmfConfig,
}

impl Default for LatentConfig {
    fn default() -> Self {
        LatentConfig { rank: DEFAULT_RANK, normalize: false, seed: DEFAULT_SEED, nmf: NmfConfig::default() }
    }
}

/// One query of an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub query: String,
    pub hybrid: Vec<ResearcherId>,
    pub lsa: Vec<ResearcherId>,
    pub nmf: Vec<ResearcherId>,
    pub hybrid_lsa: usize,
    pub hybrid_nmf: usize,
    pub lsa_nmf: usize,
}

/// Size of the intersection of two top-k lists.
pub fn overlap(a: &[ResearcherId], b: &[ResearcherId]) -> usize {
    let sa: BTreeSet<&ResearcherId> = a.iter().collect();
    b.iter().filter(|r| sa.contains(r)).count()
}

/// All query-time state. Immutable once built, shareable across threads.
#[derive(Debug)]
pub struct Engine<S: Scalar> {
    pub config: EngineConfig<S>,
    pub dictionary: TermDictionary,
    pub stop_words: StopWords,
    pub paper_index: PaperTermIndex,
    pub authorship: Authorship,
    pub person_index: PersonTermIndex<S>,
    pub trie: SuggestTrie,
    pub kb: KnowledgeBase<S>,
    pub tree: ConceptTree,
    browse: OnceLock<Classification<S>>,
}

fn read_lines(path: &Path) -> Result<Vec<String>, EngineError> {
    let text = fs::read_to_string(path).map_err(|source| EngineError::Io { path: path.to_owned(), source })?;
    Ok(text.lines().map(str::to_owned).collect())
}

impl<S: Scalar> Engine<S> {
    pub fn build(inputs: &EngineInputs, config: EngineConfig<S>) -> Result<(Self, BuildReport), EngineError> {
        config.validate()?;
        let loaded = load_publications(&inputs.corpus, inputs.corpus_format)?;
        let kb: KnowledgeBase<S> = load_kb(&inputs.kb)?;
        let stop_words = match &inputs.stop_words {
            Some(p) => StopWords::parse(&read_lines(p)?.join("\n")),
            None => StopWords::english().clone(),
        };
        let wiki = match &inputs.wiki_titles {
            Some(p) => clean_wiki_terms(read_lines(p)?),
            None => BTreeSet::new(),
        };
        let tree = match &inputs.tree {
            Some(p) => crate::browse::load_tree(p)?,
            None => ConceptTree::default_tree(),
        };
        let mut dictionary = build_dictionary(&wiki, &kb.dictionary_terms(), &BTreeMap::new());
        let paper_index = build_index(&loaded.records, &dictionary, &stop_words)?;
        dictionary.set_kb_frequencies(&paper_index.term_occurrences());
        let authorship = Authorship::from_records(&loaded.records);
        let person_index = build_person_index(&paper_index, &authorship, config.formula, &config.weights, &config.bm25f);
        let trie = SuggestTrie::from_dictionary(&dictionary)?;
        let report = BuildReport {
            records: loaded.records.len(),
            skipped_rows: loaded.skipped,
            dictionary_terms: dictionary.len(),
            indexed_terms: paper_index.all_postings().len(),
            researchers: authorship.researcher_count(),
            person_postings: person_index.posting_count(),
        };
        log::info!("built engine: {report:?}");
        let engine = Engine {
            config,
            dictionary,
            stop_words,
            paper_index,
            authorship,
            person_index,
            trie,
            kb,
            tree,
            browse: OnceLock::new(),
        };
        Ok((engine, report))
    }

    pub fn save(&self, dir: &Path) -> Result<(), EngineError> {
        fs::create_dir_all(dir).map_err(|source| EngineError::Io { path: dir.to_owned(), source })?;
        let save = |name: &str, w: Result<SnapshotWriter, SnapshotError>| {
            let path = dir.join(name);
            w.and_then(|w| w.write(&path)).map_err(|source| EngineError::Snapshot { path, source })
        };
        let mut stop: Vec<String> = self.stop_words.iter().map(str::to_owned).collect();
        stop.sort();
        save(DICTIONARY_FILE, self.dictionary.to_writer())?;
        save(PAPER_INDEX_FILE, self.paper_index.to_writer())?;
        save(AUTHORSHIP_FILE, self.authorship.to_writer())?;
        save(PERSON_INDEX_FILE, self.person_index.to_writer())?;
        save(TRIE_FILE, self.trie.to_writer())?;
        save(KB_FILE, self.kb.to_writer())?;
        let settings = SettingsSnap(Settings { config: self.config, stop_words: stop, tree: self.tree.to_file() });
        save(SETTINGS_FILE, settings.to_writer())
    }

    pub fn load(dir: &Path) -> Result<Self, EngineError> {
        fn load<T: Snapshot>(dir: &Path, name: &str) -> Result<T, EngineError> {
            let path = dir.join(name);
            T::load(&path).map_err(|source| EngineError::Snapshot { path, source })
        }
        let SettingsSnap(settings) = load::<SettingsSnap<S>>(dir, SETTINGS_FILE)?;
        settings.config.validate()?;
        Ok(Engine {
            config: settings.config,
            dictionary: load(dir, DICTIONARY_FILE)?,
            stop_words: settings.stop_words.into_iter().collect(),
            paper_index: load(dir, PAPER_INDEX_FILE)?,
            authorship: load(dir, AUTHORSHIP_FILE)?,
            person_index: load(dir, PERSON_INDEX_FILE)?,
            trie: load(dir, TRIE_FILE)?,
            kb: load(dir, KB_FILE)?,
            tree: ConceptTree::from_file(settings.tree)?,
            browse: OnceLock::new(),
        })
    }

    pub fn scorer(&self) -> HybridScorer<'_, S> {
        self.scorer_with_alpha(self.config.alpha)
    }

    /// Scorer with a different blend weight; `alpha` is clamped into [0, 1].
    pub fn scorer_with_alpha(&self, alpha: S) -> HybridScorer<'_, S> {
        let alpha = alpha.max(S::zero()).min(S::one());
        HybridScorer { index: &self.paper_index, authorship: &self.authorship, kb: &self.kb, params: &self.config.bm25f, alpha }
    }

    pub fn search(&self, query: &str, k: usize) -> SearchOutcome<S> {
        search(query, k, &self.scorer(), &self.dictionary, &self.stop_words)
    }

    pub fn suggest(&self, prefix: &str, limit: usize) -> Suggestions {
        self.trie.suggest(prefix, limit)
    }

    /// Leaf classification, computed on first use.
    pub fn classification(&self) -> &Classification<S> {
        self.browse.get_or_init(|| {
            let scorer = self.scorer();
            let scores = leaf_scores(&self.tree, |label| {
                let outcome = search(label, usize::MAX, &scorer, &self.dictionary, &self.stop_words);
                outcome.results
            });
            let c = classify(&self.tree, &scores, &self.config.browse).expect("criteria validated at construction");
            if !c.unplaced.is_empty() {
                log::warn!("{} researcher(s) have no leaf score and were not placed", c.unplaced.len());
            }
            c
        })
    }

    pub fn browse(&self) -> BrowseDocument<S> {
        BrowseDocument::build(&self.tree, &self.classification().assignment)
    }

    pub fn latent(&self, kind: LatentKind, cfg: &LatentConfig) -> Result<LatentIndex<S>, LatentError> {
        let m = PersonTermMatrix::from_index(&self.person_index, cfg.normalize);
        let k = m.clamp_rank(cfg.rank);
        match kind {
            LatentKind::Lsa => LatentIndex::lsa(&m, k, cfg.seed),
            LatentKind::Nmf => LatentIndex::nmf(&m, k, &cfg.nmf),
        }
    }

    pub fn export_libfm(&self, path: &Path) -> Result<usize, LatentError> {
        export_libfm(&self.person_index, &LibfmIds::assign(&self.person_index), path)
    }

    /// Top-`k` lists of the hybrid ranking and both latent baselines per query,
    /// with pairwise overlap counts.
    pub fn eval(&self, queries: &[String], k: usize, cfg: &LatentConfig) -> Result<Vec<EvalRow>, LatentError> {
        let lsa = self.latent(LatentKind::Lsa, cfg)?;
        let nmf = self.latent(LatentKind::Nmf, cfg)?;
        let mut rows = Vec::with_capacity(queries.len());
        for q in queries {
            let outcome = self.search(q, k);
            let hybrid: Vec<ResearcherId> = outcome.results.into_iter().map(|(r, _)| r).collect();
            let top = |idx: &LatentIndex<S>| -> Vec<ResearcherId> {
                idx.search(&outcome.terms, k).map(|v| v.into_iter().map(|(r, _)| r).collect()).unwrap_or_default()
            };
            let (l, n) = (top(&lsa), top(&nmf));
            rows.push(EvalRow {
                query: q.clone(),
                hybrid_lsa: overlap(&hybrid, &l),
                hybrid_nmf: overlap(&hybrid, &n),
                lsa_nmf: overlap(&l, &n),
                hybrid,
                lsa: l,
                nmf: n,
            });
        }
        Ok(rows)
    }
}

/// Build from inputs and write the snapshot directory.
pub fn index_to_dir<S: Scalar>(inputs: &EngineInputs, config: EngineConfig<S>, out: &Path) -> Result<BuildReport, EngineError> {
    let (engine, report) = Engine::<S>::build(inputs, config)?;
    engine.save(out)?;
    Ok(report)
}
