mod config;
mod emit;
mod stages;

use std::fs;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use biaslens::cooccur::{count_cooc_threaded, CoocMatrix};
use biaslens::corpus::{subsample, tokenize_normalize, Vocabulary};
use biaslens::eval::{cda_experiment, CdaExperimentConfig, Measure};
use biaslens::explicit::{esg_view, ppmi_view, ExplicitView};
use biaslens::glove::{train_glove, GloveConfig};
use biaslens::lexicons;
use biaslens::model::EmbeddingModel;
use biaslens::sgns::{train_sgns, NoiseDistribution, SgnsConfig};

use config::RunConfig;
use stages::{read_tokens, Pipeline, Scope};

#[derive(Parser)]
#[command(
    name = "biaslens",
    version,
    about = "Measure concept bias in a text corpus with first-order and second-order association measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExplicitKind {
    Esg,
    Eglove,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Tsv,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the config-driven pipeline end to end.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Rebuild artifacts even when a fresh one exists.
        #[arg(long)]
        force: bool,
        /// Worker cap; overrides the config (results may differ from the
        /// single-worker run when > 1).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Normalize a raw corpus into one tokenized sentence per line.
    Tokenize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Build the vocabulary from a tokenized corpus.
    Vocab {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 200)]
        min_count: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Count windowed co-occurrences.
    Count {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, default_value_t = 5)]
        window: usize,
        /// Subsampling threshold applied to the token stream first; 0 disables.
        #[arg(long, default_value_t = 0.0)]
        sample_t: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train skip-gram with negative sampling.
    TrainSg {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, default_value_t = 300)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 5)]
        negatives: usize,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 0.025)]
        lr: f64,
        #[arg(long, default_value_t = 0.75)]
        noise_exponent: f64,
        #[arg(long, default_value_t = 0.0)]
        sample_t: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train GloVe on a saved count matrix.
    TrainGlove {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, default_value_t = 300)]
        dim: usize,
        #[arg(long, default_value_t = 100.0)]
        x_max: f64,
        #[arg(long, default_value_t = 0.75)]
        weight_exp: f64,
        #[arg(long, default_value_t = 15)]
        epochs: usize,
        #[arg(long, default_value_t = 0.05)]
        lr: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Dump PPMI rows restricted to a context word list.
    Ppmi {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, default_value_t = 0.75)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        shift_k: u64,
        /// One context word per line.
        #[arg(long)]
        contexts: PathBuf,
        /// Words to dump rows for; defaults to the whole vocabulary.
        #[arg(long)]
        words: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Dump explicit rows reconstructed from a trained model (eSG or eGloVe).
    Reconstruct {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        kind: ExplicitKind,
        /// Vocabulary with counts; required for the eSG noise distribution.
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long, default_value_t = 0.75)]
        noise_exponent: f64,
        #[arg(long)]
        contexts: PathBuf,
        #[arg(long)]
        words: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run only the bias measurement stage (dependencies are reused or built).
    Bias {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        force: bool,
        /// Restrict to a comma-separated subset of the configured measures.
        #[arg(long)]
        measures: Option<String>,
        /// Restrict to a comma-separated subset of the configured representations.
        #[arg(long)]
        representations: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run only the correlation stage (dependencies are reused or built).
    Correlate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Counterfactual augmentation experiment: original vs half vs fully
    /// swapped corpus, with bias trajectories per occupation.
    CdaExperiment {
        #[arg(long)]
        config: PathBuf,
        /// Use the bundled involutive pair lexicon (exact symmetry); default
        /// is the configured/bundled full lexicon.
        #[arg(long)]
        symmetric: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Re-emit a saved bias report as TSV or SVG.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: ReportFormat,
        /// Emit the histogram instead of the scatter (SVG) / records (TSV).
        #[arg(long)]
        histogram: bool,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Write the bundled lexicon and sample statistics files to a directory.
    Lexicons {
        #[arg(long)]
        outdir: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 config error, 3 data error, 4 numeric divergence.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<biaslens::Error>() {
            return match e {
                biaslens::Error::Divergence { .. } => 4,
                biaslens::Error::InvalidArgument(_) | biaslens::Error::WrongModelKind { .. } => 2,
                _ => 3,
            };
        }
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
    }
    3
}

/// Marker for configuration-phase failures so they map to exit code 2.
#[derive(Debug)]
struct ConfigError;

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error")
    }
}

impl std::error::Error for ConfigError {}

fn load_config(path: &PathBuf, threads: Option<usize>) -> Result<RunConfig> {
    let mut config = RunConfig::load(path).context(ConfigError)?;
    if let Some(t) = threads {
        config.threads = t.max(1);
    }
    Ok(config)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            force,
            threads,
        } => {
            let config = load_config(&config, threads)?;
            Pipeline::new(config, force).execute(Scope::Full)
        }
        Command::Bias {
            config,
            force,
            measures,
            representations,
            threads,
        } => {
            let config = load_config(&config, threads)?;
            let measures = measures
                .map(|list| {
                    list.split(',')
                        .map(|m| Measure::parse(m.trim()).map_err(anyhow::Error::from))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()
                .context(ConfigError)?;
            let reps = representations
                .map(|list| list.split(',').map(|r| r.trim().to_string()).collect());
            Pipeline::new(config, force).execute(Scope::Bias {
                measures,
                representations: reps,
            })
        }
        Command::Correlate {
            config,
            force,
            threads,
        } => {
            let config = load_config(&config, threads)?;
            Pipeline::new(config, force).execute(Scope::Correlate)
        }
        Command::CdaExperiment {
            config,
            symmetric,
            threads,
        } => {
            let config = load_config(&config, threads)?;
            run_cda(config, symmetric)
        }
        Command::Tokenize { input, output } => {
            let file = fs::File::open(&input)
                .with_context(|| format!("cannot open {}", input.display()))?;
            let sentences = tokenize_normalize(BufReader::new(file))?;
            let mut out = String::new();
            for s in &sentences {
                out.push_str(&s.join(" "));
                out.push('\n');
            }
            fs::write(&output, out)?;
            println!("{} sentences -> {}", sentences.len(), output.display());
            Ok(())
        }
        Command::Vocab {
            input,
            min_count,
            output,
        } => {
            let tokens = read_tokens(&input)?;
            let vocab = Vocabulary::build(&tokens, min_count)?;
            let mut buf = Vec::new();
            vocab.write_tsv(&mut buf)?;
            fs::write(&output, buf)?;
            println!("{} words -> {}", vocab.len(), output.display());
            Ok(())
        }
        Command::Count {
            input,
            vocab,
            window,
            sample_t,
            seed,
            threads,
            output,
        } => {
            let tokens = read_tokens(&input)?;
            let vocab = read_vocab(&vocab)?;
            let sampled = subsample(&tokens, &vocab, sample_t, seed);
            let counts = count_cooc_threaded(&sampled, &vocab, window, threads);
            let mut buf = Vec::new();
            counts.write_tsv(&vocab, &mut buf)?;
            fs::write(&output, buf)?;
            println!("{} stored cells -> {}", counts.nnz(), output.display());
            Ok(())
        }
        Command::TrainSg {
            input,
            vocab,
            dim,
            window,
            negatives,
            epochs,
            lr,
            noise_exponent,
            sample_t,
            seed,
            threads,
            output,
        } => {
            let tokens = read_tokens(&input)?;
            let vocab = read_vocab(&vocab)?;
            let sampled = subsample(&tokens, &vocab, sample_t, seed);
            let config = SgnsConfig {
                dim,
                window,
                negatives,
                epochs,
                lr_start: lr,
                noise_exponent,
                seed,
                threads,
            };
            let model = train_sgns(&sampled, &vocab, &config)?;
            write_model(&model, &output)?;
            println!("sgns d={dim} -> {}", output.display());
            Ok(())
        }
        Command::TrainGlove {
            counts,
            vocab,
            dim,
            x_max,
            weight_exp,
            epochs,
            lr,
            seed,
            threads,
            output,
        } => {
            let vocab = read_vocab(&vocab)?;
            let counts = read_counts(&counts, &vocab)?;
            let config = GloveConfig {
                dim,
                x_max,
                weight_exp,
                epochs,
                lr,
                seed,
                threads,
            };
            let model = train_glove(&counts, &vocab, &config)?;
            write_model(&model, &output)?;
            println!("glove d={dim} -> {}", output.display());
            Ok(())
        }
        Command::Ppmi {
            counts,
            vocab,
            alpha,
            shift_k,
            contexts,
            words,
            output,
        } => {
            let vocab = read_vocab(&vocab)?;
            let counts = read_counts(&counts, &vocab)?;
            let view = ppmi_view(&counts, &vocab, alpha, shift_k)?;
            dump_rows(&view, &contexts, words.as_deref(), &output)
        }
        Command::Reconstruct {
            model,
            kind,
            vocab,
            noise_exponent,
            contexts,
            words,
            output,
        } => {
            let model = read_model(&model)?;
            match kind {
                ExplicitKind::Esg => {
                    let vocab_path = vocab
                        .context("--vocab is required for esg (noise counts)")
                        .context(ConfigError)?;
                    let vocab = read_vocab(&vocab_path)?;
                    model.check_vocab(&vocab)?;
                    let noise = NoiseDistribution::from_vocab(&vocab, noise_exponent)?;
                    let view = esg_view(&model, &noise)?;
                    dump_rows(&view, &contexts, words.as_deref(), &output)
                }
                ExplicitKind::Eglove => {
                    let view = biaslens::explicit::eglove_view(&model)?;
                    dump_rows(&view, &contexts, words.as_deref(), &output)
                }
            }
        }
        Command::Report {
            input,
            format,
            histogram,
            bins,
            output,
        } => {
            let text = fs::read_to_string(&input)
                .with_context(|| format!("cannot read {}", input.display()))?;
            let report = emit::report_from_json(&text)?;
            let rendered = match (format, histogram) {
                (ReportFormat::Tsv, false) => emit::report_tsv(&report, None),
                (ReportFormat::Svg, false) => emit::scatter_svg(&report, None),
                (ReportFormat::Tsv, true) => {
                    emit::histogram_tsv(&biaslens::eval::bias_histogram(&report, bins)?, None)
                }
                (ReportFormat::Svg, true) => {
                    emit::histogram_svg(&biaslens::eval::bias_histogram(&report, bins)?, None)
                }
            };
            fs::write(&output, rendered)?;
            println!("-> {}", output.display());
            Ok(())
        }
        Command::Lexicons { outdir } => {
            fs::create_dir_all(&outdir)?;
            for (name, content) in lexicons::bundled_files() {
                fs::write(outdir.join(name), content)?;
            }
            for (name, content) in lexicons::sample_stats() {
                fs::write(outdir.join(name), content)?;
            }
            println!("bundled files -> {}", outdir.display());
            Ok(())
        }
    }
}

fn read_vocab(path: &PathBuf) -> Result<Vocabulary> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(Vocabulary::read_tsv(BufReader::new(file))?)
}

fn read_counts(path: &PathBuf, vocab: &Vocabulary) -> Result<CoocMatrix> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(CoocMatrix::read_tsv(BufReader::new(file), vocab)?)
}

fn read_model(path: &PathBuf) -> Result<EmbeddingModel> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(EmbeddingModel::read_embx(BufReader::new(file))?)
}

fn write_model(model: &EmbeddingModel, path: &PathBuf) -> Result<()> {
    let mut buf = Vec::new();
    model.write_embx(&mut buf, None)?;
    fs::write(path, buf)?;
    Ok(())
}

/// `word<TAB>context<TAB>value` for every requested (word, context) pair;
/// cells that are undefined for the view (initGloVe zeros) are skipped.
fn dump_rows(
    view: &ExplicitView<'_>,
    contexts: &PathBuf,
    words: Option<&std::path::Path>,
    output: &PathBuf,
) -> Result<()> {
    let file =
        fs::File::open(contexts).with_context(|| format!("cannot open {}", contexts.display()))?;
    let context_words = biaslens::corpus::read_word_list(BufReader::new(file))?;
    let word_list: Vec<String> = match words {
        Some(path) => {
            let file = fs::File::open(path)
                .with_context(|| format!("cannot open {}", path.display()))?;
            biaslens::corpus::read_word_list(BufReader::new(file))?
        }
        None => (0..view.len()).map(|i| view.word_at(i).to_string()).collect(),
    };

    let resolved_contexts: Vec<(String, usize)> = context_words
        .iter()
        .filter_map(|c| match view.lookup(c) {
            Some(idx) => Some((c.clone(), idx)),
            None => {
                log::warn!("context {c:?} not in vocabulary; skipped");
                None
            }
        })
        .collect();
    if resolved_contexts.is_empty() {
        bail!("none of the context words are in the vocabulary");
    }

    let mut out = fs::File::create(output)
        .with_context(|| format!("cannot create {}", output.display()))?;
    writeln!(out, "word\tcontext\tvalue")?;
    let mut rows = 0usize;
    for word in &word_list {
        let Some(w) = view.lookup(word) else {
            log::warn!("word {word:?} not in vocabulary; skipped");
            continue;
        };
        for (context, c) in &resolved_contexts {
            match view.try_value(w, *c) {
                Ok(value) => {
                    writeln!(out, "{word}\t{context}\t{value}")?;
                    rows += 1;
                }
                Err(biaslens::Error::UnobservedCell { .. }) => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }
    println!("{rows} rows -> {}", output.display());
    Ok(())
}

fn run_cda(config: RunConfig, symmetric: bool) -> Result<()> {
    fs::create_dir_all(&config.outdir)?;
    let hash = config.hash();

    let file = fs::File::open(&config.corpus)
        .with_context(|| format!("cannot open corpus {}", config.corpus.display()))?;
    let tokens = tokenize_normalize(BufReader::new(file))?;
    let vocab = Vocabulary::build(&tokens, config.min_count)?;
    let sampled = subsample(&tokens, &vocab, config.sample_t, config.seed);

    let lexicon = if symmetric {
        lexicons::gender_lexicon_symmetric()
    } else {
        stages::load_lexicon(
            config.lexicon_z.as_deref(),
            config.lexicon_z_prime.as_deref(),
            config.lexicon_pairs.as_deref(),
        )?
    };
    let words = match &config.words {
        Some(path) => {
            let file = fs::File::open(path)
                .with_context(|| format!("cannot open word list {}", path.display()))?;
            biaslens::corpus::read_word_list(BufReader::new(file))?
        }
        None => lexicons::occupations().neutral,
    };
    // only occupations present in the original vocabulary are worth tracking
    let words: Vec<String> = words
        .into_iter()
        .filter(|w| vocab.index_of(w).is_some())
        .collect();
    if words.is_empty() {
        bail!("no occupation from the word list appears in the corpus");
    }

    let wants_sg = config
        .representations
        .iter()
        .any(|r| r == "sg" || r == "esg");
    let cda_config = CdaExperimentConfig {
        window: config.window,
        min_count: config.min_count,
        alpha: config.alpha,
        shift_k: config.shift_k,
        ppmi: config.representations.iter().any(|r| r == "ppmi"),
        sgns: wants_sg.then(|| SgnsConfig {
            dim: config.dim,
            window: config.window,
            negatives: config.negatives,
            epochs: config.sg_epochs,
            lr_start: config.sg_lr,
            noise_exponent: config.noise_exponent,
            seed: config.seed,
            threads: config.threads,
        }),
        seed: config.seed,
    };
    if !cda_config.ppmi && cda_config.sgns.is_none() {
        bail!("cda-experiment needs ppmi and/or sg in `representations`");
    }

    let outcome = cda_experiment(&sampled, &lexicon, &words, &cda_config)?;
    let traj_path = config.outdir.join("cda_trajectories.tsv");
    fs::write(&traj_path, emit::trajectories_tsv(&outcome, Some(&hash)))?;
    let agg_path = config.outdir.join("cda_aggregates.tsv");
    fs::write(&agg_path, emit::aggregates_tsv(&outcome, Some(&hash)))?;
    let json_path = config.outdir.join("cda.json");
    let value = serde_json::json!({ "config_hash": hash, "outcome": outcome });
    fs::write(&json_path, serde_json::to_string_pretty(&value)? + "\n")?;

    for aggregate in &outcome.aggregates {
        println!(
            "{}: mean |dpsi| first step {:.6}, second step {:.6}",
            aggregate.method, aggregate.first_step, aggregate.second_step
        );
    }
    println!("-> {}", traj_path.display());
    Ok(())
}
