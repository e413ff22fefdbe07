use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bien::config::RunConfig;
use bien::corpus::{load_corpus_dir, Abbreviations, CorpusEntry, Document, ParseOptions};
use bien::eval::{
    ablation_csv, ablation_grid, ablation_table, counts_csv, curve_csv, gold_slots, learning_curve, report_cpt,
    report_csv, report_table, run_experiment, score, Ablation, ExperimentConfig,
};
use bien::features::{featurize, Gazetteer, FeatureVector};
use bien::model::{deserialize, Cpt};
use bien::pipeline::{read_text, save_bundle, write_text, Extractor};
use bien::{Error, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "bien", version, about = "Slot extraction with a dynamic Bayesian network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Default)]
struct Common {
    /// key = value settings file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    lexicons: Option<PathBuf>,
    /// Model directory
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// CPT pin rules
    #[arg(long, global = true)]
    pins: Option<PathBuf>,
    /// Comma-separated field names
    #[arg(long, global = true)]
    fields: Option<String>,
    /// all, auto, a feature list, or no-<feature> removals
    #[arg(long, global = true)]
    mask: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    train_frac: Option<f64>,
    /// Use k-fold splits instead of a holdout
    #[arg(long, global = true)]
    folds: Option<usize>,
    #[arg(long, global = true)]
    runs: Option<usize>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Condition tags on the last slot field
    #[arg(long, global = true)]
    memory: Option<bool>,
    /// slot or occurrence
    #[arg(long, global = true)]
    match_mode: Option<String>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Unknown tags are errors
    #[arg(long, global = true)]
    strict: bool,
    /// Re-tokenize annotation columns that disagree with the text
    #[arg(long, global = true)]
    tolerant_columns: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build the gazetteer and per-document feature files
    Prepare,
    /// Train on the whole corpus and write a model directory
    Train {
        /// Model directory whose tables are copied in and frozen
        #[arg(long)]
        freeze_from: Option<PathBuf>,
        /// Comma-separated table names to freeze
        #[arg(long, requires = "freeze_from")]
        freeze: Option<String>,
    },
    /// Insert predicted field tags into text
    Tag {
        /// Input file; stdin when absent or `-`
        input: Option<PathBuf>,
    },
    /// Score a model, or run the split experiment when no model is given
    Eval,
    /// Run the feature-ablation grid
    Ablate,
    /// Precision and recall against training-set size
    Curve {
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8")]
        fractions: String,
    },
    /// Field-level P(Tag | LastTarget) of a trained model
    CptReport,
    /// List suspicious spans in the corpus
    Lint,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::parse(&read_text(p)?)?,
            None => RunConfig::default(),
        };
        let shown = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let overrides: [(&str, Option<String>); 19] = [
            ("corpus", shown(&self.corpus)),
            ("lexicons", shown(&self.lexicons)),
            ("model", shown(&self.model)),
            ("out", shown(&self.out)),
            ("pins", shown(&self.pins)),
            ("fields", self.fields.clone()),
            ("mask", self.mask.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
            ("train_frac", self.train_frac.map(|v| v.to_string())),
            ("folds", self.folds.map(|v| v.to_string())),
            ("runs", self.runs.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("max_iter", self.max_iter.map(|v| v.to_string())),
            ("rel_tol", self.rel_tol.map(|v| v.to_string())),
            ("memory", self.memory.map(|v| v.to_string())),
            ("match_mode", self.match_mode.clone()),
            ("jobs", self.jobs.map(|v| v.to_string())),
            ("strict", self.strict.then(|| "true".into())),
            ("tolerant_columns", self.tolerant_columns.then(|| "true".into())),
        ];
        for (key, val) in overrides {
            if let Some(v) = val {
                cfg.set(key, &v, 0).map_err(|e| match e {
                    Error::Parse { message, .. } => Error::Config(format!("--{}: {message}", key.replace('_', "-"))),
                    other => other,
                })?;
            }
        }
        Ok(cfg)
    }
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::Config(format!("--{flag} is required")))
}

fn load_entries(cfg: &RunConfig) -> Result<Vec<CorpusEntry>> {
    let abbreviations = Abbreviations::builtin();
    let opts = ParseOptions {
        fields: &cfg.fields,
        abbreviations: &abbreviations,
        strict: cfg.strict,
    };
    load_corpus_dir(need(&cfg.corpus, "corpus")?, &opts, cfg.tolerant_columns)
}

fn load_corpus(cfg: &RunConfig) -> Result<Vec<Document>> {
    Ok(load_entries(cfg)?.into_iter().map(|e| e.parsed.document).collect())
}

fn experiment(cfg: &RunConfig, corpus: &[Document]) -> Result<ExperimentConfig> {
    let mut exp = cfg.experiment(corpus)?;
    if let Some(p) = &cfg.pins {
        exp.pin_rules = Some(read_text(p)?);
    }
    Ok(exp)
}

/// Print `text` and, when an output directory is set, also store it there.
fn emit(cfg: &RunConfig, files: &[(&str, &str)], stdout: &str) -> Result<()> {
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        for (name, body) in files {
            write_text(&dir.join(name), body)?;
        }
        write_text(&dir.join("config.txt"), &cfg.to_string())?;
    }
    io::stdout().write_all(stdout.as_bytes()).map_err(|e| Error::io("stdout", e))
}

fn feature_line(out: &mut String, surface: &str, v: &FeatureVector) {
    fn cell<T>(x: Option<T>, f: impl Fn(T) -> String) -> String {
        x.map(f).unwrap_or_else(|| "-".into())
    }
    let _ = writeln!(
        out,
        "{surface}\t{}\t{}\t{}\t{}\t{}\t{}",
        cell(v.lemma, |x| x.to_string()),
        cell(v.pos, |x| x.label().to_string()),
        cell(v.chunk, |x| x.label().to_string()),
        cell(v.semantic, |x| x.label().to_string()),
        cell(v.case, |x| x.label().to_string()),
        cell(v.length, |x| x.label().to_string()),
    );
}

fn cmd_prepare(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let exp = experiment(cfg, &corpus)?;
    let refs: Vec<&Document> = corpus.iter().collect();
    let gaz = Gazetteer::build(&refs, exp.lemmas.clone(), exp.gazetteer)?;
    let tokens: usize = corpus.iter().map(Document::len).sum();
    let mut summary = String::new();
    let _ = writeln!(summary, "{} documents, {tokens} tokens", corpus.len());
    let _ = writeln!(
        summary,
        "gazetteer: {} lemmas kept of {} distinct",
        gaz.vocabulary_size(),
        gaz.listem_count
    );
    let _ = writeln!(summary, "mask: {}", exp.mask);
    for (f, name) in cfg.fields.names().iter().enumerate() {
        let spans: usize = corpus.iter().map(|d| d.gold_spans.iter().filter(|s| s.field == f).count()).sum();
        let absent = corpus.iter().filter(|d| d.gold_spans.iter().all(|s| s.field != f)).count();
        let _ = writeln!(
            summary,
            "{name}: {spans} spans, missing from {absent} documents ({:.1}%)",
            100.0 * absent as f64 / corpus.len() as f64
        );
    }
    if let Some(dir) = &cfg.out {
        let feat_dir = dir.join("features");
        std::fs::create_dir_all(&feat_dir).map_err(|e| Error::io(feat_dir.display().to_string(), e))?;
        write_text(&dir.join("gazetteer.txt"), &gaz.serialize())?;
        corpus.par_iter().try_for_each(|d| {
            let vectors = featurize(d, &gaz, &exp.lexicons, exp.mask)?;
            let mut body = String::new();
            for (t, v) in d.tokens.iter().zip(&vectors) {
                feature_line(&mut body, &t.surface, v);
            }
            write_text(&feat_dir.join(format!("{}.tsv", d.id)), &body)
        })?;
    }
    emit(cfg, &[("summary.txt", &summary)], &summary)
}

fn cmd_train(cfg: &RunConfig, freeze_from: Option<&Path>, freeze: Option<&str>) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let mut exp = experiment(cfg, &corpus)?;
    if let Some(dir) = freeze_from {
        let source = deserialize(&read_text(&dir.join(bien::pipeline::MODEL_FILE))?)?;
        let names: Vec<String> = match freeze {
            Some(list) => list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            None => Vec::new(),
        };
        exp.frozen_tables = names
            .iter()
            .map(|n| {
                source
                    .cpt(n)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("model in {} has no table `{n}`", dir.display())))
            })
            .collect::<Result<Vec<Cpt>>>()?;
    }
    let refs: Vec<&Document> = corpus.iter().collect();
    let trained = exp.fit(&refs)?;
    let dir = cfg.out.as_ref().or(cfg.model.as_ref()).ok_or_else(|| Error::Config("--out or --model is required".into()))?;
    save_bundle(dir, &trained.model, &trained.gazetteer)?;
    let last = trained.trace.last().copied().unwrap_or(0.0);
    println!(
        "trained on {} documents: {} iterations, objective {last}",
        corpus.len(),
        trained.trace.len()
    );
    println!("model written to {}", dir.display());
    Ok(())
}

fn cmd_tag(cfg: &RunConfig, input: Option<&Path>) -> Result<()> {
    let extractor = Extractor::load(need(&cfg.model, "model")?, cfg.lexicon_set()?)?;
    let text = match input {
        Some(p) if p != Path::new("-") => read_text(p)?,
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| Error::io("stdin", e))?;
            s
        }
    };
    let tagged = extractor.tag_text(&text)?;
    match &cfg.out {
        Some(p) => write_text(p, &tagged),
        None => io::stdout().write_all(tagged.as_bytes()).map_err(|e| Error::io("stdout", e)),
    }
}

fn cmd_eval(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    if let Some(dir) = &cfg.model {
        let extractor = Extractor::load(dir, cfg.lexicon_set()?)?;
        let predictions: Vec<_> = corpus.par_iter().map(|d| extractor.extract_document(d)).collect::<Result<_>>()?;
        let gold: Vec<_> = corpus.iter().map(gold_slots).collect();
        let report = score(&predictions, &gold, extractor.fields(), cfg.match_mode)?;
        let table = report_table(&report);
        return emit(cfg, &[("report.txt", &table)], &table);
    }
    let exp = experiment(cfg, &corpus)?;
    let result = run_experiment(&corpus, &cfg.plan(), &exp)?;
    let mut table = report_table(&result.average);
    let _ = writeln!(table, "\n{} runs, match mode {}", result.runs.len(), cfg.match_mode);
    emit(
        cfg,
        &[
            ("report.txt", &table),
            ("report.csv", &report_csv(&result)),
            ("counts.csv", &counts_csv(&result)),
        ],
        &table,
    )
}

fn cmd_ablate(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let exp = experiment(cfg, &corpus)?;
    let rows = ablation_grid(&corpus, &cfg.plan(), &exp, &Ablation::ALL)?;
    let table = ablation_table(&rows);
    emit(cfg, &[("ablation.txt", &table), ("ablation.csv", &ablation_csv(&rows))], &table)
}

fn cmd_curve(cfg: &RunConfig, fractions: &str) -> Result<()> {
    let fractions: Vec<f64> = fractions
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::Config(format!("bad fraction `{s}`"))))
        .collect::<Result<_>>()?;
    let corpus = load_corpus(cfg)?;
    let exp = experiment(cfg, &corpus)?;
    let points = learning_curve(&corpus, &fractions, cfg.runs, cfg.seed, &exp)?;
    let csv = curve_csv(&points);
    emit(cfg, &[("curve.csv", &csv)], &csv)
}

fn cmd_cpt_report(cfg: &RunConfig) -> Result<()> {
    let dir = need(&cfg.model, "model")?;
    let model = deserialize(&read_text(&dir.join(bien::pipeline::MODEL_FILE))?)?;
    let text = report_cpt(&model).to_string();
    emit(cfg, &[("cpt.txt", &text)], &text)
}

fn cmd_lint(cfg: &RunConfig) -> Result<()> {
    let mut out = String::new();
    for e in load_entries(cfg)? {
        let file = e.path.display().to_string();
        for issue in &e.parsed.issues {
            let _ = writeln!(out, "{}", issue.render(&file));
        }
    }
    emit(cfg, &[("lint.txt", &out)], &out)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.common.resolve()?;
    if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Prepare => cmd_prepare(&cfg),
        Command::Train { freeze_from, freeze } => cmd_train(&cfg, freeze_from.as_deref(), freeze.as_deref()),
        Command::Tag { input } => cmd_tag(&cfg, input.as_deref()),
        Command::Eval => cmd_eval(&cfg),
        Command::Ablate => cmd_ablate(&cfg),
        Command::Curve { fractions } => cmd_curve(&cfg, &fractions),
        Command::CptReport => cmd_cpt_report(&cfg),
        Command::Lint => cmd_lint(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bien: error: {}: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
