//! `expertctl`: build snapshots, query them, and serve them over TCP.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::Ordering;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use expert_core::browse::{Threshold, BROWSE_FORMAT_VERSION};
use expert_core::corpus::InputFormat;
use expert_core::engine::{index_to_dir, EngineConfig, EngineInputs, LatentConfig};
use expert_core::knowledge::{KbPaths, SearchStatus};
use expert_core::person::Formula;
use expert_core::service::{self, ServerConfig, DEFAULT_K, DEFAULT_LISTEN_ADDR, ENV_LISTEN_ADDR};
use expert_core::suggest::{SuggestStatus, DEFAULT_LIMIT};
use expert_core::Engine;

use config::FileConfig;

#[derive(Parser)]
#[command(name = "expertctl", version, about = "Expert search over a publication corpus")]
struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct SnapshotArgs {
    /// Directory written by `index`.
    #[arg(long, value_name = "DIR")]
    snapshots: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build every snapshot from the raw inputs.
    Index {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// csv or jsonl; guessed from the extension by default.
        #[arg(long)]
        corpus_format: Option<String>,
        #[arg(long)]
        wiki_titles: Option<PathBuf>,
        /// Directory holding the knowledge-base TSV tables.
        #[arg(long)]
        kb_dir: Option<PathBuf>,
        #[arg(long)]
        stop_words: Option<PathBuf>,
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long)]
        formula: Option<Formula>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Per-leaf percentile used as the browse threshold.
        #[arg(long)]
        percentile: Option<f64>,
        #[arg(long)]
        max_leaves: Option<usize>,
    },
    /// Rank researchers for a query.
    Search {
        #[command(flatten)]
        snap: SnapshotArgs,
        #[arg(long)]
        query: String,
        #[arg(long)]
        k: Option<usize>,
        /// Override the blend weight stored in the snapshot.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Autocomplete a prefix.
    Suggest {
        #[command(flatten)]
        snap: SnapshotArgs,
        #[arg(long)]
        prefix: String,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Emit the browse tree as JSON.
    Browse {
        #[command(flatten)]
        snap: SnapshotArgs,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit only this subtree.
        #[arg(long)]
        node: Option<String>,
    },
    /// Write person-term scores in libfm format.
    ExportLibfm {
        #[command(flatten)]
        snap: SnapshotArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the snapshots over TCP until interrupted.
    Serve {
        #[command(flatten)]
        snap: SnapshotArgs,
        #[arg(long, env = ENV_LISTEN_ADDR)]
        listen: Option<String>,
        #[arg(long)]
        idle_timeout_secs: Option<u64>,
        #[arg(long)]
        max_frame_bytes: Option<usize>,
    },
    /// Compare hybrid, LSA and NMF rankings over a set of queries.
    Eval {
        #[command(flatten)]
        snap: SnapshotArgs,
        /// File with one query per line.
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Extra query; repeatable.
        #[arg(long = "query")]
        query: Vec<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        json: bool,
    },
}

/// Bad invocation or missing inputs; reported with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> anyhow::Result<T> {
    flag.or(file).ok_or_else(|| usage(format!("missing --{name} (flag or config file)")))
}

fn existing(path: PathBuf, what: &str) -> anyhow::Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(usage(format!("{what} {} does not exist", path.display())))
    }
}

fn load_engine(snap: SnapshotArgs, cfg: &FileConfig) -> anyhow::Result<Engine> {
    let dir = existing(required(snap.snapshots, cfg.snapshots.clone(), "snapshots")?, "snapshot directory")?;
    Engine::load(&dir).with_context(|| format!("loading snapshots from {}", dir.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(p) => FileConfig::load(&existing(p.clone(), "config file")?).map_err(|e| usage(format!("{e:#}")))?,
        None => FileConfig::default(),
    };
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Index {
            corpus,
            corpus_format,
            wiki_titles,
            kb_dir,
            stop_words,
            tree,
            out,
            formula,
            alpha,
            percentile,
            max_leaves,
        } => {
            let corpus = existing(required(corpus, cfg.corpus.clone(), "corpus")?, "corpus")?;
            let corpus_format = match corpus_format.or(cfg.corpus_format.clone()).as_deref() {
                None => InputFormat::from_path(&corpus),
                Some("csv") => InputFormat::Csv,
                Some("jsonl") | Some("json") => InputFormat::Jsonl,
                Some(other) => return Err(usage(format!("unknown corpus format {other:?} (expected csv or jsonl)"))),
            };
            let kb_dir = existing(required(kb_dir, cfg.kb_dir.clone(), "kb-dir")?, "knowledge-base directory")?;
            let optional = |flag: Option<PathBuf>, file: Option<PathBuf>, what: &str| -> anyhow::Result<Option<PathBuf>> {
                flag.or(file).map(|p| existing(p, what)).transpose()
            };
            let inputs = EngineInputs {
                corpus,
                corpus_format,
                wiki_titles: optional(wiki_titles, cfg.wiki_titles.clone(), "wiki titles file")?,
                kb: KbPaths::in_dir(&kb_dir),
                stop_words: optional(stop_words, cfg.stop_words.clone(), "stop-word file")?,
                tree: optional(tree, cfg.tree.clone(), "tree file")?,
            };
            let out = required(out, cfg.snapshots.clone(), "out")?;
            let mut config = EngineConfig::<f64>::default();
            if let Some(b) = cfg.bm25f {
                config.bm25f = b.validated().map_err(|e| usage(e.to_string()))?;
            }
            if let Some(w) = cfg.weights {
                config.weights = w;
            }
            config.formula = formula.or(cfg.formula).unwrap_or(config.formula);
            config.alpha = alpha.or(cfg.alpha).unwrap_or(config.alpha);
            if let Some(p) = percentile.or(cfg.percentile) {
                if !(0.0..=100.0).contains(&p) {
                    return Err(usage(format!("percentile {p} outside 0..=100")));
                }
                config.browse.threshold = Threshold::PerLeafPercentile(p);
            }
            config.browse.max_leaves = max_leaves.or(cfg.max_leaves).unwrap_or(config.browse.max_leaves);
            config.validate().map_err(|e| usage(e.to_string()))?;
            let report = index_to_dir(&inputs, config, &out)?;
            writeln!(
                stdout,
                "indexed {} records ({} skipped), {} dictionary terms, {} indexed terms, {} researchers, {} person postings into {}",
                report.records,
                report.skipped_rows,
                report.dictionary_terms,
                report.indexed_terms,
                report.researchers,
                report.person_postings,
                out.display()
            )?;
        }
        Command::Search { snap, query, k, alpha, json } => {
            let engine = load_engine(snap, &cfg)?;
            let k = k.or(cfg.k).unwrap_or(DEFAULT_K);
            let outcome = match alpha.or(cfg.alpha) {
                Some(a) if !(0.0..=1.0).contains(&a) => return Err(usage(format!("alpha {a} outside [0, 1]"))),
                Some(a) => expert_core::knowledge::search(&query, k, &engine.scorer_with_alpha(a), &engine.dictionary, &engine.stop_words),
                None => engine.search(&query, k),
            };
            if json {
                serde_json::to_writer(&mut stdout, &outcome)?;
                writeln!(stdout)?;
            } else if outcome.status == SearchStatus::NoTerms {
                eprintln!("no known terms in query");
            } else {
                for (i, (r, s)) in outcome.results.iter().enumerate() {
                    writeln!(stdout, "{}\t{r}\t{s:.6}", i + 1)?;
                }
            }
        }
        Command::Suggest { snap, prefix, limit, json } => {
            let engine = load_engine(snap, &cfg)?;
            let s = engine.suggest(&prefix, limit.or(cfg.limit).unwrap_or(DEFAULT_LIMIT));
            if json {
                serde_json::to_writer(&mut stdout, &s)?;
                writeln!(stdout)?;
            } else if s.status == SuggestStatus::TooShort {
                eprintln!("prefix too short");
            } else {
                for item in &s.items {
                    writeln!(stdout, "{}\t{}", item.term, item.frequency)?;
                }
            }
        }
        Command::Browse { snap, out, node } => {
            let engine = load_engine(snap, &cfg)?;
            let doc = engine.browse();
            let text = match &node {
                None => doc.to_json(),
                Some(n) => {
                    let sub = doc.subtree(n).ok_or_else(|| anyhow!("no emitted node {n:?}"))?;
                    let mut s = serde_json::to_string_pretty(&serde_json::json!({"version": BROWSE_FORMAT_VERSION, "root": sub}))?;
                    s.push('\n');
                    s
                }
            };
            match out {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => stdout.write_all(text.as_bytes())?,
            }
        }
        Command::ExportLibfm { snap, out } => {
            let engine = load_engine(snap, &cfg)?;
            let n = engine.export_libfm(&out)?;
            writeln!(stdout, "wrote {n} lines to {}", out.display())?;
        }
        Command::Serve { snap, listen, idle_timeout_secs, max_frame_bytes } => {
            let engine = Arc::new(load_engine(snap, &cfg)?);
            let addr = listen.or(cfg.listen.clone()).unwrap_or_else(|| DEFAULT_LISTEN_ADDR.to_owned());
            let mut sc = ServerConfig::default();
            if let Some(s) = idle_timeout_secs.or(cfg.idle_timeout_secs) {
                sc.idle_timeout = Duration::from_secs(s);
            }
            sc.max_frame = max_frame_bytes.or(cfg.max_frame_bytes).unwrap_or(sc.max_frame);
            let handle = service::serve(engine, addr.as_str(), sc).with_context(|| format!("binding {addr}"))?;
            let stop = handle.stop_flag();
            ctrlc::set_handler(move || stop.store(true, Ordering::SeqCst)).context("installing signal handler")?;
            writeln!(stdout, "listening on {}", handle.local_addr())?;
            stdout.flush()?;
            handle.join();
            log::info!("server stopped");
        }
        Command::Eval { snap, queries, query, k, rank, seed, normalize, json } => {
            let engine = load_engine(snap, &cfg)?;
            let mut qs = Vec::new();
            if let Some(p) = queries {
                let p = existing(p, "queries file")?;
                let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                qs.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_owned));
            }
            qs.extend(query);
            if qs.is_empty() {
                return Err(usage("eval needs --queries or --query"));
            }
            let lc = LatentConfig {
                rank: rank.or(cfg.rank).unwrap_or(LatentConfig::default().rank),
                seed: seed.or(cfg.seed).unwrap_or(LatentConfig::default().seed),
                normalize: normalize || cfg.normalize.unwrap_or(false),
                ..LatentConfig::default()
            };
            let rows = engine.eval(&qs, k.or(cfg.k).unwrap_or(DEFAULT_K), &lc)?;
            for row in &rows {
                if json {
                    serde_json::to_writer(&mut stdout, row)?;
                    writeln!(stdout)?;
                } else {
                    let join = |v: &[expert_core::ResearcherId]| v.iter().map(|r| r.as_str()).collect::<Vec<_>>().join(",");
                    writeln!(stdout, "query\t{}", row.query)?;
                    writeln!(stdout, "  hybrid\t{}", join(&row.hybrid))?;
                    writeln!(stdout, "  lsa\t{}", join(&row.lsa))?;
                    writeln!(stdout, "  nmf\t{}", join(&row.nmf))?;
                    writeln!(stdout, "  overlap\thybrid-lsa={} hybrid-nmf={} lsa-nmf={}", row.hybrid_lsa, row.hybrid_nmf, row.lsa_nmf)?;
                }
            }
        }
    }
    Ok(())
}
