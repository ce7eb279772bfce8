//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use expert_core::bm25f::{build_index, Bm25fParams, Field};
use expert_core::browse::{classify, BrowseCriteria, BrowseDocument, BrowseNode, ConceptTree};
use expert_core::corpus::{load_publications, preprocess_text, Authorship, InputFormat, PublicationRecord};
use expert_core::engine::{index_to_dir, EngineConfig, SNAPSHOT_FILES};
use expert_core::knowledge::{HybridScorer, KnowledgeBase};
use expert_core::latent::{
    libfm::{write_libfm, LibfmIds},
    lsa_decompose, nmf_decompose, DenseMatrix, LatentIndex, LatentModel, NmfConfig,
};
use expert_core::lexicon::{build_dictionary, clean_wiki_terms, extract_all, StopWords, TermDictionary};
use expert_core::person::{formula1, formula2, formula3, AuthorTermStats, Formula, GoldStandard, PersonTermIndex, TransformWeights};
use expert_core::service::{dispatch, serve, Client, Request, ServerConfig};
use expert_core::suggest::{SuggestStatus, SuggestTrie};
use expert_core::{Engine, ResearcherId};

type Check = fn() -> Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let checks: &[(&str, Check)] = &[
        ("bm25f_oracle_equivalence", bm25f_oracle),
        ("formula_degeneracy", formula_degeneracy),
        ("term_extraction_examples", term_extraction),
        ("wiki_cleansing", wiki_cleansing),
        ("lsa_against_dense_svd", lsa_oracle),
        ("nmf_monotone_and_planted", nmf_checks),
        ("cosine_scale_invariance", cosine_scale_invariance),
        ("libfm_lines", libfm_lines),
        ("hybrid_degeneracy", hybrid_degeneracy),
        ("browse_constraints", browse_constraints),
        ("trie_suggest", trie_suggest),
        ("service_pipelined_clients", service_pipelined),
        ("index_determinism", index_determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let started = Instant::now();
        let outcome = match panic::catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let ms = started.elapsed().as_millis();
        match outcome {
            Ok(()) => println!("PASS {name} ({ms} ms)"),
            Err(e) => {
                failed += 1;
                println!("FAIL {name} ({ms} ms): {e}");
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn fixture_records() -> Vec<PublicationRecord> {
    let loaded = load_publications(&common::fixtures().join("corpus.csv"), InputFormat::Csv).unwrap();
    loaded.records
}

fn fixture_dictionary() -> TermDictionary {
    let titles = std::fs::read_to_string(common::fixtures().join("wiki_titles.txt")).unwrap();
    let wiki = clean_wiki_terms(titles.lines());
    let kb: BTreeSet<String> =
        ["natural language processing", "machine translation", "machine learning", "computer vision", "data mining"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    build_dictionary(&wiki, &kb, &BTreeMap::new())
}

fn field_text(r: &PublicationRecord, f: usize) -> String {
    match f {
        0 => r.title.clone(),
        1 => r.abstract_text.clone(),
        2 => r.keywords.clone(),
        _ => [r.journal_name.trim(), r.conference_name.trim()]
            .iter()
            .filter(|s| !s.is_empty())
            .copied()
            .collect::<Vec<_>>()
            .join(". "),
    }
}

fn bm25f_oracle() -> Result<(), String> {
    let started = Instant::now();
    let records: Vec<PublicationRecord> = fixture_records().into_iter().take(10).collect();
    ensure!(records.len() == 10, "fixture has {} records", records.len());
    let dict = fixture_dictionary();
    let stop = StopWords::english();
    let index = build_index(&records, &dict, stop).map_err(|e| e.to_string())?;
    let params = Bm25fParams::<f64>::default();

    // Raw per-document, per-field term counts.
    let mut counts: Vec<[BTreeMap<String, f64>; 4]> = Vec::new();
    let mut lengths: Vec<[f64; 4]> = Vec::new();
    for r in &records {
        let mut c: [BTreeMap<String, f64>; 4] = Default::default();
        let mut l = [0.0; 4];
        for f in 0..4 {
            let terms = extract_all(&preprocess_text(&field_text(r, f)), &dict, stop);
            l[f] = terms.len() as f64;
            for t in terms {
                *c[f].entry(t.surface).or_insert(0.0) += 1.0;
            }
        }
        counts.push(c);
        lengths.push(l);
    }
    let n = records.len() as f64;
    let avg: Vec<f64> = (0..4).map(|f| lengths.iter().map(|l| l[f]).sum::<f64>() / n).collect();
    let vocab: BTreeSet<String> = counts.iter().flat_map(|c| c.iter().flat_map(|m| m.keys().cloned())).collect();
    let weights = [1.2, 1.0, 1.2, 1.2];
    let (b, k1) = (0.75, 1.2);
    let fields = [Field::Title, Field::Abstract, Field::Keywords, Field::Venue];
    for (f, field) in fields.iter().enumerate() {
        ensure!(params.weight(*field) == weights[f] && params.norm(*field) == b, "default params differ on {field:?}");
    }
    ensure!(params.k1() == k1, "default k1 differs");

    let mut pairs = 0;
    for term in &vocab {
        let df = counts.iter().filter(|c| c.iter().any(|m| m.contains_key(term))).count() as f64;
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        for (d, r) in records.iter().enumerate() {
            let mut xbar = 0.0;
            for f in 0..4 {
                let x = counts[d][f].get(term).copied().unwrap_or(0.0);
                if x > 0.0 {
                    xbar += weights[f] * x / (1.0 + b * (lengths[d][f] / avg[f] - 1.0));
                }
            }
            let expect = if xbar > 0.0 { xbar / (k1 + xbar) * idf } else { 0.0 };
            let got = index.bm25f_score(&r.paper_id, term, &params).map_err(|e| e.to_string())?;
            ensure!((got - expect).abs() <= 1e-9, "{} / {term}: {got} vs {expect}", r.paper_id);
            pairs += 1;
        }
    }
    ensure!(vocab.len() == index.terms().count(), "vocabulary {} vs index {}", vocab.len(), index.terms().count());
    ensure!(pairs > 500, "only {pairs} pairs compared");
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(())
}

fn stats(sum: f64, occ: &[u32], total: usize, top: &[f64]) -> AuthorTermStats<f64> {
    AuthorTermStats {
        bm25f_sum: sum,
        papers_with_term: occ.len(),
        total_papers: total,
        occurrences: occ.to_vec(),
        top5_scores: top.to_vec(),
    }
}

fn formula_degeneracy() -> Result<(), String> {
    let w = TransformWeights::<f64>::default();
    let a = stats(20.0, &[10, 10, 10, 10, 10], 10, &[4.0; 5]);
    let b = stats(20.0, &[46, 1, 1, 1, 1], 10, &[4.0; 5]);
    let expect = 21.0 * 6f64.ln() / 11f64.ln();
    let (f1a, f1b) = (formula1(&a, &w), formula1(&b, &w));
    ensure!((f1a - f1b).abs() <= 1e-12, "formula 1: {f1a} vs {f1b}");
    ensure!((f1a - expect).abs() <= 1e-12, "formula 1: {f1a} vs closed form {expect}");

    let f2a = formula2(&a, &w).map_err(|e| e.to_string())?;
    let f2b = formula2(&b, &w).map_err(|e| e.to_string())?;
    ensure!(f2a > f2b, "formula 2 does not order A above B: {f2a} vs {f2b}");
    // var(A) = 0, var(B) = 324.
    ensure!((f2a - 2.0 * expect).abs() <= 1e-12, "formula 2 for A: {f2a}");
    let sig_b = 1.0 / (1.0 + (-324f64).exp());
    ensure!((f2b - expect / sig_b).abs() <= 1e-12, "formula 2 for B: {f2b}");

    let zero = GoldStandard { avg5_global: 0.0 };
    for s in [&a, &b] {
        let (f3, f1) = (formula3(s, &zero, &w), formula1(s, &w));
        ensure!((f3 - f1).abs() <= 1e-12, "formula 3 with zero gold: {f3} vs {f1}");
    }
    let w = TransformWeights { w1: 1.4, w2: 0.6, w3: 2.0, w4: 0.8 };
    let f1w = TransformWeights { w3: w.w4, ..w };
    let (f3, f1) = (formula3(&a, &zero, &w), formula1(&a, &f1w));
    ensure!((f3 - f1).abs() <= 1e-12, "formula 3 with zero gold, weighted: {f3} vs {f1}");
    Ok(())
}

fn term_extraction() -> Result<(), String> {
    let wiki: BTreeSet<String> = ["machine translation", "researcher", "natural language processing", "subfield"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let dict = build_dictionary(&wiki, &BTreeSet::new(), &BTreeMap::new());
    let cases: [(&str, &[&str]); 2] = [
        (
            "Machine translation researcher loves natural language processing.",
            &["machine translation", "researcher", "love", "natural language processing"],
        ),
        ("Machine translation is a subfield of natural language processing.", &["machine translation", "subfield", "natural language processing"]),
    ];
    for (text, expect) in cases {
        let got: Vec<String> =
            extract_all(&preprocess_text(text), &dict, StopWords::english()).into_iter().map(|t| t.surface).collect();
        ensure!(got == expect, "{text:?} gave {got:?}");
    }
    Ok(())
}

fn wiki_cleansing() -> Result<(), String> {
    let out = clean_wiki_terms(["File: language.jpg", "Computer Science (Outline)", "List of languages by number of native speakers"]);
    let got: Vec<&str> = out.iter().map(String::as_str).collect();
    ensure!(got == ["computer science"], "got {got:?}");
    Ok(())
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix<f64> {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(0.0..1.0))
}

fn lsa_oracle() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8061);
    let m = random_matrix(&mut rng, 8, 6);
    let na = nalgebra::DMatrix::from_fn(8, 6, |i, j| m[(i, j)]);
    let mut oracle: Vec<f64> = na.svd(false, false).singular_values.iter().copied().collect();
    oracle.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let full = lsa_decompose(&m, 6, 1).map_err(|e| e.to_string())?;
    ensure!(full.singular.len() == 6, "rank {}", full.singular.len());
    for (i, (got, want)) in full.singular.iter().zip(&oracle).enumerate() {
        ensure!((got - want).abs() <= 1e-6, "sigma_{i}: {got} vs {want}");
    }
    let mut prev = f64::INFINITY;
    for k in 1..=6 {
        let model = lsa_decompose(&m, k, 1).map_err(|e| e.to_string())?;
        let err = m.sub(&model.reconstruct()).frobenius();
        let tail: f64 = oracle[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
        ensure!((err - tail).abs() <= 1e-6, "k={k}: error {err} vs optimal {tail}");
        ensure!(err <= prev + 1e-12, "k={k}: error {err} rose above {prev}");
        prev = err;
    }
    Ok(())
}

fn nmf_checks() -> Result<(), String> {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let m = random_matrix(&mut rng, 12, 9);
        let cfg = NmfConfig { max_iters: 300, tol: 0.0, seed };
        let model = nmf_decompose(&m, 3, &cfg).map_err(|e| e.to_string())?;
        ensure!(model.objective.len() == 301, "seed {seed}: {} objective values", model.objective.len());
        for (i, w) in model.objective.windows(2).enumerate() {
            ensure!(w[1] <= w[0], "seed {seed}: objective rose at iteration {}: {} -> {}", i + 1, w[0], w[1]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let w0 = DenseMatrix::from_fn(10, 3, |_, _| rng.random_range(0.1..1.0));
    let h0 = DenseMatrix::from_fn(3, 8, |_, _| rng.random_range(0.1..1.0));
    let m = w0.matmul(&h0);
    let cfg = NmfConfig { max_iters: 20_000, tol: 0.0, seed: 3 };
    let model = nmf_decompose(&m, 3, &cfg).map_err(|e| e.to_string())?;
    let rel = model.relative_error(&m);
    ensure!(rel < 1e-3, "planted rank-3 relative error {rel}");
    Ok(())
}

fn argsort(ranked: &[(ResearcherId, f64)]) -> Vec<ResearcherId> {
    ranked.iter().map(|(r, _)| r.clone()).collect()
}

fn cosine_scale_invariance() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for case in 0..100 {
        let (terms, persons, k) = (rng.random_range(4..12), rng.random_range(3..10), rng.random_range(1..4));
        let vt = random_matrix(&mut rng, k, persons);
        let u = random_matrix(&mut rng, terms, k);
        let singular: Vec<f64> = (0..k).map(|i| 3.0 - i as f64 * 0.5).collect();
        let model = LatentModel::Lsa(expert_core::latent::LsaModel { term_latent: u, singular, latent_person: vt });
        let term_names: Vec<String> = (0..terms).map(|i| format!("t{i:02}")).collect();
        let researchers: Vec<ResearcherId> = (0..persons).map(|j| ResearcherId::new(format!("r{j:02}"))).collect();
        let index = LatentIndex::new(term_names, researchers, model);
        let q: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let base = index.rank_by_cosine(&q).map_err(|e| e.to_string())?;
        let c = 10f64.powf(rng.random_range(-3.0..3.0));
        let scaled: Vec<f64> = q.iter().map(|x| x * c).collect();
        let again = index.rank_by_cosine(&scaled).map_err(|e| e.to_string())?;
        ensure!(argsort(&base) == argsort(&again), "case {case}: order changed under scale {c}");
    }
    Ok(())
}

fn libfm_lines() -> Result<(), String> {
    let postings = BTreeMap::from([
        ("deep learning".to_string(), vec![(ResearcherId::from("a2728"), 2.271)]),
        ("neural network".to_string(), vec![(ResearcherId::from("a2694"), 5.357)]),
    ]);
    let index = PersonTermIndex::from_postings(Formula::F3, postings);
    let ids = LibfmIds::from_maps(
        BTreeMap::from([(ResearcherId::from("a2728"), 2728), (ResearcherId::from("a2694"), 2694)]),
        BTreeMap::from([("deep learning".to_string(), 236991), ("neural network".to_string(), 274922)]),
    )
    .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    let n = write_libfm(&index, &ids, &mut out).map_err(|e| e.to_string())?;
    ensure!(n == 2, "{n} lines");
    let text = String::from_utf8(out).map_err(|e| e.to_string())?;
    ensure!(text == "2.271 2728:1 236991:1\n5.357 2694:1 274922:1\n", "got {text:?}");
    Ok(())
}

fn fixture_engine() -> Engine {
    Engine::build(&common::inputs(), EngineConfig::default()).unwrap().0
}

/// Candidates ordered by one raw component, descending, ties by id.
fn order_by(component: &BTreeMap<ResearcherId, f64>, candidates: &[ResearcherId]) -> Vec<ResearcherId> {
    let mut v: Vec<(ResearcherId, f64)> =
        candidates.iter().map(|r| (r.clone(), component.get(r).copied().unwrap_or(0.0))).collect();
    v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    argsort(&v)
}

fn hybrid_degeneracy() -> Result<(), String> {
    let e = fixture_engine();
    let queries = [
        "natural language processing",
        "machine learning",
        "data mining and cluster analysis",
        "computer vision image segmentation",
        "machine translation for natural language processing",
        "computer network security",
        "machine learning for computer security",
    ];
    let p = &e.config.bm25f;
    for q in queries {
        let terms = e.search(q, 0).terms;
        ensure!(!terms.is_empty(), "{q:?} has no terms");
        let with = |kb: &KnowledgeBase<f64>, alpha: f64| -> Result<Vec<ResearcherId>, String> {
            let s = HybridScorer::new(&e.paper_index, &e.authorship, kb, p, alpha).map_err(|e| e.to_string())?;
            Ok(s.score_all(&terms).into_iter().map(|h| h.researcher).collect())
        };
        let scorer = HybridScorer::new(&e.paper_index, &e.authorship, &e.kb, p, 0.5).map_err(|e| e.to_string())?;
        let m = scorer.matching_component(&terms);
        let k = e.kb.kb_component(&terms);
        let candidates: Vec<ResearcherId> = m
            .iter()
            .chain(k.iter())
            .filter(|(_, &v)| v > 0.0)
            .map(|(r, _)| r.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        ensure!(candidates.len() >= 2, "{q:?}: {} candidates", candidates.len());
        ensure!(with(&e.kb, 1.0)? == order_by(&m, &candidates), "{q:?}: alpha=1 differs from matching order");
        ensure!(with(&e.kb, 0.0)? == order_by(&k, &candidates), "{q:?}: alpha=0 differs from kb order");
        for alpha in [0.25, 0.5, 0.8] {
            let base = with(&e.kb, alpha)?;
            for c in [0.5, 0.1, 0.37] {
                ensure!(with(&e.kb.rescaled(c), alpha)? == base, "{q:?}: rescaling by {c} changed order at alpha {alpha}");
            }
        }
    }
    Ok(())
}

fn collect_leaves<'a>(node: &'a BrowseNode<f64>, depth: usize, out: &mut Vec<(&'a BrowseNode<f64>, usize)>) {
    if node.children.is_empty() {
        out.push((node, depth));
    }
    for c in &node.children {
        collect_leaves(c, depth + 1, out);
    }
}

fn browse_constraints() -> Result<(), String> {
    let tree = ConceptTree::default_tree();
    let labels: Vec<String> = tree.leaf_labels().map(str::to_owned).collect();
    ensure!(labels.len() > 7, "default tree has only {} leaves", labels.len());
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut scores: BTreeMap<ResearcherId, BTreeMap<String, f64>> = BTreeMap::new();
    for i in 0..50 {
        let id = ResearcherId::new(format!("r{i:02}"));
        let row: BTreeMap<String, f64> = match i {
            // Top of every leaf.
            0 => labels.iter().map(|l| (l.clone(), 100.0)).collect(),
            // Barely nonzero everywhere: qualifies nowhere.
            1 | 2 => labels.iter().map(|l| (l.clone(), 1e-3 * (i as f64))).collect(),
            // Nothing at all.
            3 => BTreeMap::new(),
            _ => {
                let mut row = BTreeMap::new();
                for l in &labels {
                    if rng.random_bool(0.4) {
                        row.insert(l.clone(), rng.random_range(0.01..50.0));
                    }
                }
                row
            }
        };
        scores.insert(id, row);
    }
    let criteria = BrowseCriteria::<f64>::default();
    let cls = classify(&tree, &scores, &criteria).map_err(|e| e.to_string())?;

    let mut count: BTreeMap<&ResearcherId, usize> = BTreeMap::new();
    for list in cls.assignment.values() {
        for (r, _) in list {
            *count.entry(r).or_default() += 1;
        }
    }
    for (r, row) in &scores {
        let scored = row.values().any(|&s| s > 0.0);
        let n = count.get(r).copied().unwrap_or(0);
        if scored {
            ensure!((1..=7).contains(&n), "{r} is in {n} leaves");
        } else {
            ensure!(n == 0 && cls.unplaced.contains(r), "{r} has no scores but was placed");
        }
    }
    ensure!(count[&ResearcherId::from("r00")] == 7, "leaf cap not applied");
    ensure!(
        cls.fallback.contains(&ResearcherId::from("r01")) && cls.fallback.contains(&ResearcherId::from("r02")),
        "fallback not exercised: {:?}",
        cls.fallback
    );

    let doc = BrowseDocument::build(&tree, &cls.assignment);
    let parsed: BrowseDocument<f64> = BrowseDocument::parse(&doc.to_json()).map_err(|e| e.to_string())?;
    ensure!(parsed == doc, "browse JSON does not round-trip");
    let mut leaves = Vec::new();
    collect_leaves(&parsed.root, 1, &mut leaves);
    let mut emitted = 0;
    for (node, depth) in leaves {
        ensure!(depth <= 6, "{} at depth {depth}", node.id);
        let rs = node.researchers.as_ref().ok_or_else(|| format!("emitted leaf {} has no researcher list", node.id))?;
        ensure!(!rs.is_empty(), "empty leaf {} emitted", node.id);
        ensure!(
            rs.windows(2).all(|w| w[0].score > w[1].score || (w[0].score == w[1].score && w[0].id < w[1].id)),
            "leaf {} not in descending order",
            node.id
        );
        emitted += 1;
    }
    ensure!(emitted == cls.assignment.len(), "{emitted} leaves emitted for {} assigned", cls.assignment.len());
    Ok(())
}

fn trie_suggest() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let syllables = ["ma", "chi", "ne", "lea", "rn", "ing", "da", "ta", "mi", "com", "pu", "ter", "vi", "sion"];
    let mut dict: BTreeMap<String, u64> = BTreeMap::new();
    while dict.len() < 1000 {
        let n = rng.random_range(2..6);
        let mut w: String = (0..n).map(|_| syllables[rng.random_range(0..syllables.len())]).collect();
        if rng.random_bool(0.3) {
            w.push(' ');
            w.push_str(syllables[rng.random_range(0..syllables.len())]);
        }
        let freq = if rng.random_bool(0.7) { rng.random_range(1..20) } else { 0 };
        dict.insert(w, freq);
    }
    let mut trie = SuggestTrie::new();
    for (t, &f) in &dict {
        trie.insert(t, f, f > 0).map_err(|e| e.to_string())?;
    }
    let short = trie.suggest("ma", 10);
    ensure!(short.status == SuggestStatus::TooShort && short.items.is_empty(), "\"ma\" gave {short:?}");

    let mut prefixes: BTreeSet<String> = dict.keys().flat_map(|t| (3..=t.chars().count().min(6)).map(move |n| t.chars().take(n).collect())).collect();
    prefixes.extend(["zzz", "maz", "machinex"].map(String::from));
    for p in &prefixes {
        let mut oracle: Vec<(&String, u64)> = dict.iter().filter(|(t, _)| t.starts_with(p.as_str())).map(|(t, &f)| (t, f)).collect();
        oracle.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let all = trie.suggest(p, usize::MAX);
        ensure!(all.status == SuggestStatus::Ok, "{p:?} status {:?}", all.status);
        let got: Vec<(&String, u64)> = all.items.iter().map(|s| (&s.term, s.frequency)).collect();
        ensure!(got == oracle, "{p:?}: {} suggestions vs {} by linear scan", got.len(), oracle.len());
        let top = trie.suggest(p, 10);
        ensure!(top.items.len() == oracle.len().min(10), "{p:?}: limit not applied");
        ensure!(top.items[..] == all.items[..top.items.len()], "{p:?}: limited list is not a prefix");
        ensure!(
            all.items.windows(2).all(|w| w[0].frequency > w[1].frequency || (w[0].frequency == w[1].frequency && w[0].term < w[1].term)),
            "{p:?}: ordering broken"
        );
    }
    ensure!(prefixes.len() > 100, "only {} prefixes", prefixes.len());
    Ok(())
}

fn service_pipelined() -> Result<(), String> {
    let started = Instant::now();
    let engine = Arc::new(fixture_engine());
    let server = serve(Arc::clone(&engine), "127.0.0.1:0", ServerConfig::default()).map_err(|e| e.to_string())?;
    let addr = server.local_addr();
    let queries = ["natural language processing", "machine learning", "data mining", "compilers", "of the", "computer vision"];
    let prefixes = ["mac", "ma", "comp", "dat", "zz"];
    let workers: Vec<_> = (0..10)
        .map(|c| {
            let engine = Arc::clone(&engine);
            std::thread::spawn(move || -> Result<usize, String> {
                let mut client = Client::connect(addr).map_err(|e| e.to_string())?;
                let reqs: Vec<Request> = (0..100)
                    .map(|i| {
                        let id = (c * 1000 + i) as i64;
                        match i % 4 {
                            0 => Request::search(queries[i % queries.len()], 1 + i % 7, id),
                            1 => Request::suggest(prefixes[i % prefixes.len()], 5, id),
                            2 => Request::browse((i % 8 == 2).then(|| "artificial_intelligence".to_string()), id),
                            _ => Request::ping(id),
                        }
                    })
                    .collect();
                for r in &reqs {
                    client.send(r).map_err(|e| e.to_string())?;
                }
                for r in &reqs {
                    let resp = client.recv(Duration::from_secs(10)).map_err(|e| e.to_string())?;
                    if resp.request_id != r.request_id {
                        return Err(format!("client {c}: got {:?} expecting {:?}", resp.request_id, r.request_id));
                    }
                    if resp != dispatch(&engine, r) {
                        return Err(format!("client {c}: payload mismatch for {:?}", r.request_id));
                    }
                }
                Ok(reqs.len())
            })
        })
        .collect();
    let mut matched = 0;
    for w in workers {
        matched += w.join().map_err(|_| "client thread panicked".to_string())??;
    }
    server.shutdown();
    ensure!(matched == 1000, "{matched} matched responses");
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(())
}

fn index_determinism() -> Result<(), String> {
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    for d in &dirs {
        index_to_dir(&common::inputs(), EngineConfig::<f64>::default(), d.path()).map_err(|e| e.to_string())?;
    }
    for f in SNAPSHOT_FILES {
        let a = std::fs::read(dirs[0].path().join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dirs[1].path().join(f)).map_err(|e| e.to_string())?;
        ensure!(!a.is_empty() && a == b, "{f} differs between runs");
    }
    let authors = Authorship::from_records(&fixture_records());
    ensure!(authors.researcher_count() == 8, "fixture has {} researchers", authors.researcher_count());
    Ok(())
}
