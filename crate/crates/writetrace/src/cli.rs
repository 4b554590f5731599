//! Command-line surface: thin file-based wiring over the library modules.
//!
//! Subcommands follow the collect -> transform -> mine -> report pipeline:
//! `simgen sessions|corpora` produce data, `lm train|score|curve` and
//! `features extract` transform it, `detect aitext|pairs|copytype` fit and
//! apply the detectors, and `eval roc|report` turn scores into evaluation
//! artifacts. Every run writes a `<out>.manifest.json` audit record beside
//! its primary output; reruns with identical inputs and seeds are
//! byte-identical.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::detect::{
    ai_text_score, build_pair_dataset, fit_biometric_verifier, fit_copy_typing_detector,
    score_pair, score_session, write_detections, DetectionResult, WritingLabel,
};
use crate::error::{Error, Result};
use crate::eval::{
    apply_threshold, auc_quality, confusion, operating_threshold, rates, roc, write_roc_csv,
    OperatingPoint, RocCurve,
};
use crate::event_log::{parse_session_log, write_session_log, ParseOptions, Session};
use crate::features::{extract_features, write_features_csv};
use crate::gbm::{GbmModel, TrainConfig};
use crate::lm::{
    aggregate_prefix_curves, essay_perplexity, prefix_perplexity_curve, sentence_perplexities,
    train_ngram, NGramModel,
};
use crate::manifest::RunManifest;
use crate::simgen::{
    gen_copy_task_dataset, gen_corpora, gen_repeater_dataset, seed_corpus_split, slice_text_pool,
    CorpusSpec, SimConfig,
};

#[derive(Parser)]
#[command(
    name = "writetrace",
    version,
    about = "Writing-process analytics for test security",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    /// TOML config file overriding tool defaults ([lm], [gbm], [simgen]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded synthetic datasets.
    #[command(subcommand)]
    Simgen(SimgenCmd),
    /// Train and apply the n-gram language model.
    #[command(subcommand)]
    Lm(LmCmd),
    /// Extract writing-process features from session logs.
    #[command(subcommand)]
    Features(FeaturesCmd),
    /// Fit and apply the anomaly detectors.
    #[command(subcommand)]
    Detect(DetectCmd),
    /// Evaluate detector scores against labels.
    #[command(subcommand)]
    Eval(EvalCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SessionKind {
    /// Writers with repeated drafting sessions (biometric study data).
    Repeaters,
    /// Half drafting, half transcription, labels in a sidecar file.
    Copytask,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CorporaMode {
    /// Sample essays from a trained language model.
    Lm,
    /// Window the held-out human text pool with typo perturbations.
    Human,
    /// Emit a slice of the bundled seed corpus (no randomness).
    Seed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeedSplit {
    Train,
    Holdout,
}

#[derive(Subcommand)]
enum SimgenCmd {
    /// Generate keystroke sessions in the session-log format.
    Sessions {
        #[arg(long, value_enum)]
        kind: SessionKind,
        /// Number of writers (repeaters kind).
        #[arg(long, default_value_t = 20)]
        writers: usize,
        /// Sessions per writer (repeaters kind).
        #[arg(long = "sessions-per-writer", default_value_t = 2)]
        sessions_per_writer: usize,
        /// Total sessions (copytask kind; split half draft, half transcribe).
        #[arg(long, default_value_t = 40)]
        n: usize,
        /// Typing-task texts, one per line (default: sliced bundled corpus).
        #[arg(long)]
        texts: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate essay corpora, one essay per line.
    Corpora {
        #[arg(long, value_enum)]
        mode: CorporaMode,
        /// Trained model file (lm mode).
        #[arg(long)]
        lm: Option<PathBuf>,
        /// Which bundled slice to emit (seed mode).
        #[arg(long, value_enum)]
        split: Option<SeedSplit>,
        /// Human pool file, one text per line (human mode; default bundled
        /// held-out slice).
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long = "min-words", default_value_t = 400)]
        min_words: usize,
        #[arg(long = "max-words", default_value_t = 600)]
        max_words: usize,
        /// Character typo rate for human mode (default from config).
        #[arg(long = "perturbation-rate")]
        perturbation_rate: Option<f64>,
        /// Required for lm and human modes.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum LmCmd {
    /// Train the n-gram model on a corpus file (one text per line).
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long = "min-count")]
        min_count: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score essays: CSV of (id, n_tokens, ppl).
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        essays: PathBuf,
        /// Emit one row per sentence instead of per essay.
        #[arg(long = "per-sentence")]
        per_sentence: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prefix-length perplexity sweep.
    Curve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        essays: PathBuf,
        #[arg(long = "n-start", default_value_t = 10)]
        n_start: usize,
        #[arg(long = "n-end", default_value_t = 400)]
        n_end: usize,
        #[arg(long, default_value_t = 10)]
        step: usize,
        /// Emit per-essay points instead of the mean/std aggregation.
        #[arg(long = "per-essay")]
        per_essay: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum FeaturesCmd {
    /// Extract the feature catalog, one CSV row per session.
    Extract {
        #[arg(long)]
        sessions: PathBuf,
        /// Keep sessions that fail replay validation.
        #[arg(long = "include-invalid")]
        include_invalid: bool,
        /// Derive JumpInsert kinds from caret discontinuities.
        #[arg(long = "derive-jumps")]
        derive_jumps: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct GbmArgs {
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long = "learning-rate")]
    learning_rate: Option<f64>,
    #[arg(long = "max-depth")]
    max_depth: Option<usize>,
    #[arg(long = "min-leaf")]
    min_leaf: Option<usize>,
}

#[derive(Subcommand)]
enum DetectCmd {
    /// Perplexity-threshold AI-text detection.
    #[command(subcommand)]
    Aitext(AitextCmd),
    /// Keystroke-biometric pair verification.
    #[command(subcommand)]
    Pairs(PairsCmd),
    /// Copy-typing vs drafting detection.
    #[command(subcommand)]
    Copytype(CopytypeCmd),
}

#[derive(Subcommand)]
enum AitextCmd {
    /// Score essays; higher score = more likely model-generated.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        essays: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum PairsCmd {
    /// Fit the same-writer verifier on sampled session pairs.
    Fit {
        #[arg(long)]
        sessions: PathBuf,
        #[arg(long = "n-same")]
        n_same: usize,
        #[arg(long = "n-diff")]
        n_diff: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        gbm: GbmArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score listed session pairs (CSV: id_a,id_b).
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        sessions: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        threshold: Option<f64>,
        /// Flip orientation: higher score = more likely an impostor.
        #[arg(long)]
        impostor: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CopytypeCmd {
    /// Fit the copy-typing detector on labeled sessions.
    Fit {
        #[arg(long)]
        sessions: PathBuf,
        /// CSV of session_id,label with labels draft|transcribe.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        gbm: GbmArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score sessions; higher score = more likely transcription.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        sessions: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum EvalCmd {
    /// Build a ROC curve from a scores file.
    Roc {
        /// CSV with header id,score[,label].
        #[arg(long)]
        scores: PathBuf,
        /// "in-file" for a label column, or a CSV file of id,label.
        #[arg(long, default_value = "in-file")]
        labels: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluation report at a chosen operating point.
    Report {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, default_value = "in-file")]
        labels: String,
        /// "eer" or "fpr:<bound>".
        #[arg(long = "operating-point", default_value = "eer")]
        operating_point: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Tool defaults, overridable from a single TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct ToolConfig {
    lm: LmDefaults,
    gbm: GbmDefaults,
    simgen: SimConfig,
}

#[derive(Debug, Deserialize)]
#[serde(default)]
struct LmDefaults {
    order: usize,
    alpha: f64,
    min_count: u64,
}

impl Default for LmDefaults {
    fn default() -> Self {
        Self {
            order: 3,
            alpha: 0.1,
            min_count: 2,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default)]
struct GbmDefaults {
    n_rounds: usize,
    learning_rate: f64,
    max_depth: usize,
    min_leaf: usize,
}

impl Default for GbmDefaults {
    fn default() -> Self {
        let c = TrainConfig::default();
        Self {
            n_rounds: c.n_rounds,
            learning_rate: c.learning_rate,
            max_depth: c.max_depth,
            min_leaf: c.min_leaf,
        }
    }
}

impl ToolConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| Error::InvalidInput(format!("bad config file: {e}")))
            }
        }
    }

    fn train_config(&self, gbm: &GbmArgs, seed: u64) -> TrainConfig {
        TrainConfig {
            n_rounds: gbm.rounds.unwrap_or(self.gbm.n_rounds),
            learning_rate: gbm.learning_rate.unwrap_or(self.gbm.learning_rate),
            max_depth: gbm.max_depth.unwrap_or(self.gbm.max_depth),
            min_leaf: gbm.min_leaf.unwrap_or(self.gbm.min_leaf),
            seed,
        }
    }
}

/// Parse argv, run, and map errors to exit codes.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
                    print!("{e}");
                    return 0;
                }
                _ => 1,
            };
            eprint!("{e}");
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = ToolConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simgen(cmd) => run_simgen(cmd, &config),
        Command::Lm(cmd) => run_lm(cmd, &config),
        Command::Features(cmd) => run_features(cmd),
        Command::Detect(cmd) => run_detect(cmd, &config),
        Command::Eval(cmd) => run_eval(cmd),
    }
}

fn run_simgen(cmd: SimgenCmd, config: &ToolConfig) -> Result<()> {
    match cmd {
        SimgenCmd::Sessions {
            kind,
            writers,
            sessions_per_writer,
            n,
            texts,
            seed,
            out,
        } => {
            let pool = match &texts {
                Some(path) => read_lines(path)?,
                None => slice_text_pool(crate::simgen::bundled_corpus(), 180),
            };
            let mut manifest = RunManifest::new("simgen sessions").seed(seed);
            if let Some(path) = &texts {
                manifest = manifest.input(path)?;
            }
            let mut outputs = vec![out.clone()];
            match kind {
                SessionKind::Repeaters => {
                    let sessions =
                        gen_repeater_dataset(writers, sessions_per_writer, &pool, seed, &config.simgen)?;
                    write_file(&out, |w| write_session_log(&sessions, w))?;
                    manifest = manifest
                        .param("kind", "repeaters")
                        .param("writers", writers)
                        .param("sessions_per_writer", sessions_per_writer);
                }
                SessionKind::Copytask => {
                    let n_draft = n / 2;
                    let ds = gen_copy_task_dataset(n_draft, n - n_draft, &pool, seed, &config.simgen)?;
                    let sessions: Vec<Session> = ds.iter().map(|(s, _)| s.clone()).collect();
                    write_file(&out, |w| write_session_log(&sessions, w))?;
                    let labels_path = sibling(&out, "labels.csv");
                    write_file(&labels_path, |w| {
                        writeln!(w, "session_id,label")?;
                        for (s, label) in &ds {
                            writeln!(w, "{},{label}", s.session_id)?;
                        }
                        Ok(())
                    })?;
                    outputs.push(labels_path);
                    manifest = manifest.param("kind", "copytask").param("n", n);
                }
            }
            let gen_path = sibling(&out, "gen.toml");
            fs::write(&gen_path, config.simgen.to_toml())?;
            outputs.push(gen_path);
            finish(manifest, &out, &outputs)
        }
        SimgenCmd::Corpora {
            mode,
            lm,
            split,
            corpus,
            n,
            min_words,
            max_words,
            perturbation_rate,
            seed,
            out,
        } => {
            let mut manifest = RunManifest::new("simgen corpora");
            let mut outputs = vec![out.clone()];
            match mode {
                CorporaMode::Seed => {
                    let split = split.ok_or_else(|| {
                        Error::InvalidInput("--split train|holdout is required for --mode seed".into())
                    })?;
                    let (train, holdout) = seed_corpus_split();
                    let texts = match split {
                        SeedSplit::Train => train,
                        SeedSplit::Holdout => holdout,
                    };
                    write_file(&out, |w| {
                        for t in &texts {
                            writeln!(w, "{t}")?;
                        }
                        Ok(())
                    })?;
                    manifest = manifest.param("mode", "seed").param(
                        "split",
                        match split {
                            SeedSplit::Train => "train",
                            SeedSplit::Holdout => "holdout",
                        },
                    );
                }
                CorporaMode::Lm | CorporaMode::Human => {
                    let seed = seed.ok_or_else(|| {
                        Error::InvalidInput("--seed is required for lm and human modes".into())
                    })?;
                    manifest = manifest.seed(seed);
                    let essays = match mode {
                        CorporaMode::Lm => {
                            let model_path = lm.ok_or_else(|| {
                                Error::InvalidInput("--lm <model> is required for --mode lm".into())
                            })?;
                            manifest = manifest.input(&model_path)?;
                            let model = load_ngram(&model_path)?;
                            gen_corpora(
                                &CorpusSpec::LmSampled { lm: &model },
                                n,
                                min_words,
                                max_words,
                                seed,
                            )?
                        }
                        CorporaMode::Human => {
                            let pool = match &corpus {
                                Some(path) => {
                                    manifest = manifest.input(path)?;
                                    read_lines(path)?.join(" ")
                                }
                                None => seed_corpus_split().1.join(" "),
                            };
                            let rate =
                                perturbation_rate.unwrap_or(config.simgen.perturbation_rate);
                            manifest = manifest.param("perturbation_rate", rate);
                            gen_corpora(
                                &CorpusSpec::PerturbedHuman {
                                    pool: &pool,
                                    perturbation_rate: rate,
                                },
                                n,
                                min_words,
                                max_words,
                                seed,
                            )?
                        }
                        CorporaMode::Seed => unreachable!(),
                    };
                    write_file(&out, |w| {
                        for e in &essays {
                            writeln!(w, "{e}")?;
                        }
                        Ok(())
                    })?;
                    let gen_path = sibling(&out, "gen.toml");
                    fs::write(&gen_path, config.simgen.to_toml())?;
                    outputs.push(gen_path);
                    manifest = manifest
                        .param(
                            "mode",
                            match mode {
                                CorporaMode::Lm => "lm",
                                _ => "human",
                            },
                        )
                        .param("n", n)
                        .param("min_words", min_words)
                        .param("max_words", max_words);
                }
            }
            finish(manifest, &out, &outputs)
        }
    }
}

fn run_lm(cmd: LmCmd, config: &ToolConfig) -> Result<()> {
    match cmd {
        LmCmd::Train {
            corpus,
            order,
            alpha,
            min_count,
            out,
        } => {
            let order = order.unwrap_or(config.lm.order);
            let alpha = alpha.unwrap_or(config.lm.alpha);
            let min_count = min_count.unwrap_or(config.lm.min_count);
            let texts = read_lines(&corpus)?;
            let model = train_ngram(&texts, order, alpha, min_count)?;
            write_file(&out, |w| model.save(w))?;
            let manifest = RunManifest::new("lm train")
                .param("order", order)
                .param("alpha", alpha)
                .param("min_count", min_count)
                .param("fingerprint", model.fingerprint())
                .input(&corpus)?;
            finish(manifest, &out, std::slice::from_ref(&out))
        }
        LmCmd::Score {
            model,
            essays,
            per_sentence,
            out,
        } => {
            let lm = load_ngram(&model)?;
            let texts = read_lines(&essays)?;
            write_file(&out, |w| {
                if per_sentence {
                    writeln!(w, "id,sentence,n_tokens,ppl")?;
                    for (i, text) in texts.iter().enumerate() {
                        for (j, report) in sentence_perplexities(&lm, text).iter().enumerate() {
                            writeln!(w, "{},{},{},{}", essay_id(i), j, report.n_tokens, report.ppl)?;
                        }
                    }
                } else {
                    writeln!(w, "id,n_tokens,ppl")?;
                    for (i, text) in texts.iter().enumerate() {
                        let report = essay_perplexity(&lm, text)?;
                        writeln!(w, "{},{},{}", essay_id(i), report.n_tokens, report.ppl)?;
                    }
                }
                Ok(())
            })?;
            let manifest = RunManifest::new("lm score")
                .param("per_sentence", per_sentence)
                .input(&model)?
                .input(&essays)?;
            finish(manifest, &out, std::slice::from_ref(&out))
        }
        LmCmd::Curve {
            model,
            essays,
            n_start,
            n_end,
            step,
            per_essay,
            out,
        } => {
            let lm = load_ngram(&model)?;
            let texts = read_lines(&essays)?;
            let curves: Vec<_> = texts
                .iter()
                .map(|t| prefix_perplexity_curve(&lm, t, n_start, n_end, step))
                .collect();
            write_file(&out, |w| {
                if per_essay {
                    writeln!(w, "id,n_words,ppl")?;
                    for (i, curve) in curves.iter().enumerate() {
                        for (n, ppl) in &curve.points {
                            writeln!(w, "{},{n},{ppl}", essay_id(i))?;
                        }
                    }
                } else {
                    writeln!(w, "n_words,mean_ppl,std_ppl,n_texts")?;
                    for (n, mean, std, count) in &aggregate_prefix_curves(&curves).points {
                        writeln!(w, "{n},{mean},{std},{count}")?;
                    }
                }
                Ok(())
            })?;
            let manifest = RunManifest::new("lm curve")
                .param("n_start", n_start)
                .param("n_end", n_end)
                .param("step", step)
                .param("per_essay", per_essay)
                .input(&model)?
                .input(&essays)?;
            finish(manifest, &out, std::slice::from_ref(&out))
        }
    }
}

fn run_features(cmd: FeaturesCmd) -> Result<()> {
    let FeaturesCmd::Extract {
        sessions,
        include_invalid,
        derive_jumps,
        out,
    } = cmd;
    let parsed = read_sessions(&sessions, derive_jumps)?;
    let mut rows = Vec::new();
    let mut excluded = 0usize;
    for s in &parsed {
        let violations = s.validate();
        if !violations.is_empty() && !include_invalid {
            excluded += 1;
            continue;
        }
        rows.push((s.session_id.clone(), s.writer_id.clone(), extract_features(s)));
    }
    if excluded > 0 {
        eprintln!(
            "excluded {excluded} session(s) with validation violations (use --include-invalid to keep them)"
        );
    }
    write_file(&out, |w| write_features_csv(&rows, w))?;
    let manifest = RunManifest::new("features extract")
        .param("include_invalid", include_invalid)
        .param("derive_jumps", derive_jumps)
        .param("excluded", excluded)
        .input(&sessions)?;
    finish(manifest, &out, std::slice::from_ref(&out))
}

fn run_detect(cmd: DetectCmd, config: &ToolConfig) -> Result<()> {
    match cmd {
        DetectCmd::Aitext(AitextCmd::Score {
            model,
            essays,
            threshold,
            out,
        }) => {
            let lm = load_ngram(&model)?;
            let texts = read_lines(&essays)?;
            let mut results = Vec::with_capacity(texts.len());
            for (i, text) in texts.iter().enumerate() {
                results.push(ai_text_score(&lm, &essay_id(i), text, threshold)?);
            }
            write_file(&out, |w| write_detections(&results, w))?;
            let mut manifest = RunManifest::new("detect aitext score")
                .input(&model)?
                .input(&essays)?;
            if let Some(t) = threshold {
                manifest = manifest.param("threshold", t);
            }
            finish(manifest, &out, std::slice::from_ref(&out))
        }
        DetectCmd::Pairs(PairsCmd::Fit {
            sessions,
            n_same,
            n_diff,
            seed,
            gbm,
            out,
        }) => {
            let parsed = read_valid_sessions(&sessions)?;
            let dataset = build_pair_dataset(&parsed, n_same, n_diff, seed)?;
            let train_config = config.train_config(&gbm, seed);
            let model = fit_biometric_verifier(&dataset, &train_config)?;
            write_file(&out, |w| model.save(w))?;
            let (same, diff) = dataset.class_sizes();
            let manifest = RunManifest::new("detect pairs fit")
                .seed(seed)
                .param("n_same", same)
                .param("n_diff", diff)
                .param("rounds", train_config.n_rounds)
                .input(&sessions)?;
            finish(manifest, &out, std::slice::from_ref(&out))
        }
        DetectCmd::Pairs(PairsCmd::Score {
            model,
            sessions,
            pairs,
            threshold,
            impostor,
            out,
        }) => {
            let gbm_model = load_gbm(&model)?;
            let parsed = read_valid_sessions(&sessions)?;
            let by_id: HashMap<&str, &Session> = parsed
                .iter()
                .map(|s| (s.session_id.as_str(), s))
                .collect();
            let pair_ids = read_pairs_csv(&pairs)?;
            let mut results = Vec::with_capacity(pair_ids.len());
            for (ia, ib) in &pair_ids {
                let a = by_id.get(ia.as_str()).ok_or_else(|| {
                    Error::InvalidInput(format!("pair references unknown session {ia:?}"))
                })?;
                let b = by_id.get(ib.as_str()).ok_or_else(|| {
                    Error::InvalidInput(format!("pair references unknown session {ib:?}"))
                })?;
                let mut r = score_pair(&gbm_model, a, b, None)?;
                if impostor {
                    // Impostor reporting: suspicion is the complement of
                    // same-writer evidence.
                    r.score = -r.score;
                }
                results.push(DetectionResult {
                    decision: threshold.map(|t| r.score >= t),
                    threshold,
                    ..r
                });
            }
            write_file(&out, |w| write_detections(&results, w))?;
            let manifest = RunManifest::new("detect pairs score")
                .param("impostor", impostor)
                .input(&model)?
                .input(&sessions)?
                .input(&pairs)?;
            finish(manifest, &out, std::slice::from_ref(&out))
        }
        DetectCmd::Copytype(CopytypeCmd::Fit {
            sessions,
            labels,
            seed,
            gbm,
            out,
        }) => {
            let parsed = read_valid_sessions(&sessions)?;
            let label_map = read_labels_csv(&labels)?;
            let mut dataset = Vec::with_capacity(parsed.len());
            for s in parsed {
                let label = label_map.get(&s.session_id).copied().ok_or_else(|| {
                    Error::InvalidInput(format!("no label for session {:?}", s.session_id))
                })?;
                dataset.push((s, label));
            }
            let train_config = config.train_config(&gbm, seed);
            let model = fit_copy_typing_detector(&dataset, &train_config)?;
            write_file(&out, |w| model.save(w))?;
            let manifest = RunManifest::new("detect copytype fit")
                .seed(seed)
                .param("rounds", train_config.n_rounds)
                .input(&sessions)?
                .input(&labels)?;
            finish(manifest, &out, std::slice::from_ref(&out))
        }
        DetectCmd::Copytype(CopytypeCmd::Score {
            model,
            sessions,
            threshold,
            out,
        }) => {
            let gbm_model = load_gbm(&model)?;
            let parsed = read_valid_sessions(&sessions)?;
            let mut results = Vec::with_capacity(parsed.len());
            for s in &parsed {
                results.push(score_session(&gbm_model, s, threshold)?);
            }
            write_file(&out, |w| write_detections(&results, w))?;
            let mut manifest = RunManifest::new("detect copytype score")
                .input(&model)?
                .input(&sessions)?;
            if let Some(t) = threshold {
                manifest = manifest.param("threshold", t);
            }
            finish(manifest, &out, std::slice::from_ref(&out))
        }
    }
}

fn run_eval(cmd: EvalCmd) -> Result<()> {
    match cmd {
        EvalCmd::Roc { scores, labels, out } => {
            let (curve, _, _) = load_scored(&scores, &labels)?;
            write_file(&out, |w| write_roc_csv(&curve, w))?;
            println!(
                "auc={} eer={} eer_threshold={} auc_quality={}",
                curve.auc,
                curve.eer,
                curve.eer_threshold,
                auc_quality(curve.auc)?
            );
            let mut manifest = RunManifest::new("eval roc").input(&scores)?;
            if labels != "in-file" {
                manifest = manifest.input(Path::new(&labels))?;
            }
            finish(manifest, &out, std::slice::from_ref(&out))
        }
        EvalCmd::Report {
            scores,
            labels,
            operating_point,
            out,
        } => {
            let point = parse_operating_point(&operating_point)?;
            let (curve, score_values, label_values) = load_scored(&scores, &labels)?;
            let threshold = operating_threshold(&curve, point);
            let decisions = apply_threshold(&score_values, threshold);
            let m = confusion(&label_values, &decisions)?;
            let r = rates(&m);
            let report = EvalReport {
                auc: curve.auc,
                auc_quality: auc_quality(curve.auc)?.to_string(),
                eer: curve.eer,
                operating_point: operating_point.clone(),
                threshold,
                true_pos: m.true_pos,
                false_pos: m.false_pos,
                true_neg: m.true_neg,
                false_neg: m.false_neg,
                fpr: r.fpr,
                fnr: r.fnr,
                tpr: r.tpr,
                tnr: r.tnr,
                accuracy: r.accuracy,
            };
            write_file(&out, |w| {
                serde_json::to_writer_pretty(&mut *w, &report)
                    .map_err(|e| Error::InvalidInput(e.to_string()))?;
                writeln!(w)?;
                Ok(())
            })?;
            println!(
                "auc={} eer={} threshold={} accuracy={}",
                report.auc, report.eer, report.threshold, report.accuracy
            );
            let mut manifest = RunManifest::new("eval report")
                .param("operating_point", &operating_point)
                .input(&scores)?;
            if labels != "in-file" {
                manifest = manifest.input(Path::new(&labels))?;
            }
            finish(manifest, &out, std::slice::from_ref(&out))
        }
    }
}

#[derive(Serialize)]
struct EvalReport {
    auc: f64,
    auc_quality: String,
    eer: f64,
    operating_point: String,
    threshold: f64,
    true_pos: u64,
    false_pos: u64,
    true_neg: u64,
    false_neg: u64,
    fpr: Option<f64>,
    fnr: Option<f64>,
    tpr: Option<f64>,
    tnr: Option<f64>,
    accuracy: f64,
}

fn parse_operating_point(text: &str) -> Result<OperatingPoint> {
    if text == "eer" {
        return Ok(OperatingPoint::Eer);
    }
    if let Some(bound) = text.strip_prefix("fpr:") {
        let bound: f64 = bound
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad fpr bound in {text:?}")))?;
        if !(0.0..=1.0).contains(&bound) {
            return Err(Error::InvalidInput(format!("fpr bound {bound} outside [0, 1]")));
        }
        return Ok(OperatingPoint::FixedFpr(bound));
    }
    Err(Error::InvalidInput(format!(
        "unknown operating point {text:?} (expected eer or fpr:<bound>)"
    )))
}

fn essay_id(index: usize) -> String {
    format!("e{index:04}")
}

fn sibling(out: &Path, extension: &str) -> PathBuf {
    out.with_extension(extension)
}

fn finish(manifest: RunManifest, primary: &Path, outputs: &[PathBuf]) -> Result<()> {
    let mut m = manifest;
    for o in outputs {
        m = m.output(o);
    }
    m.write_beside(primary)
}

/// Open for reading, with the path in the error message.
fn open_file(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn write_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let file = File::create(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Non-empty lines of a UTF-8 file.
fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect())
}

fn read_sessions(path: &Path, derive_jumps: bool) -> Result<Vec<Session>> {
    let reader = BufReader::new(open_file(path)?);
    parse_session_log(reader, ParseOptions { derive_jumps })
}

/// Sessions with validation violations are dropped with a warning.
fn read_valid_sessions(path: &Path) -> Result<Vec<Session>> {
    let all = read_sessions(path, false)?;
    let mut valid = Vec::with_capacity(all.len());
    let mut excluded = 0usize;
    for s in all {
        if s.validate().is_empty() {
            valid.push(s);
        } else {
            excluded += 1;
        }
    }
    if excluded > 0 {
        eprintln!("excluded {excluded} session(s) with validation violations");
    }
    Ok(valid)
}

fn load_ngram(path: &Path) -> Result<NGramModel> {
    NGramModel::load(BufReader::new(open_file(path)?))
}

fn load_gbm(path: &Path) -> Result<GbmModel> {
    GbmModel::load(BufReader::new(open_file(path)?))
}

fn read_pairs_csv(path: &Path) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::Reader::from_reader(BufReader::new(open_file(path)?));
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: i + 2,
            msg: e.to_string(),
        })?;
        let a = rec.get(0).unwrap_or("").to_string();
        let b = rec.get(1).unwrap_or("").to_string();
        if a.is_empty() || b.is_empty() {
            return Err(Error::Parse {
                line: i + 2,
                msg: "pairs file needs id_a,id_b".into(),
            });
        }
        out.push((a, b));
    }
    Ok(out)
}

fn read_labels_csv(path: &Path) -> Result<HashMap<String, WritingLabel>> {
    let mut rdr = csv::Reader::from_reader(BufReader::new(open_file(path)?));
    let mut out = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: i + 2,
            msg: e.to_string(),
        })?;
        let id = rec.get(0).unwrap_or("").to_string();
        let label: WritingLabel = rec.get(1).unwrap_or("").parse()?;
        out.insert(id, label);
    }
    Ok(out)
}

fn parse_label(text: &str) -> Result<bool> {
    match text {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(Error::InvalidInput(format!(
            "bad label {other:?} (expected 0/1/true/false)"
        ))),
    }
}

/// Load a scores file and resolve labels, returning the ROC plus the raw
/// score/label columns in file order.
fn load_scored(scores_path: &Path, labels: &str) -> Result<(RocCurve, Vec<f64>, Vec<bool>)> {
    let mut rdr = csv::Reader::from_reader(BufReader::new(open_file(scores_path)?));
    let headers = rdr
        .headers()
        .map_err(|e| Error::InvalidInput(e.to_string()))?
        .clone();
    let has_label_column = headers.iter().any(|h| h == "label");
    let mut ids = Vec::new();
    let mut score_values = Vec::new();
    let mut inline_labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: i + 2,
            msg: e.to_string(),
        })?;
        ids.push(rec.get(0).unwrap_or("").to_string());
        let score: f64 = rec
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|_| Error::Parse {
                line: i + 2,
                msg: format!("bad score {:?}", rec.get(1).unwrap_or("")),
            })?;
        score_values.push(score);
        if has_label_column {
            inline_labels.push(parse_label(rec.get(2).unwrap_or(""))?);
        }
    }

    let label_values: Vec<bool> = if labels == "in-file" {
        if !has_label_column {
            return Err(Error::InvalidInput(
                "scores file has no label column; pass --labels <file>".into(),
            ));
        }
        inline_labels
    } else {
        let mut rdr = csv::Reader::from_reader(BufReader::new(open_file(Path::new(labels))?));
        let mut map = HashMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                line: i + 2,
                msg: e.to_string(),
            })?;
            map.insert(
                rec.get(0).unwrap_or("").to_string(),
                parse_label(rec.get(1).unwrap_or(""))?,
            );
        }
        ids.iter()
            .map(|id| {
                map.get(id)
                    .copied()
                    .ok_or_else(|| Error::InvalidInput(format!("no label for id {id:?}")))
            })
            .collect::<Result<_>>()?
    };

    let curve = roc(&score_values, &label_values)?;
    Ok((curve, score_values, label_values))
}
