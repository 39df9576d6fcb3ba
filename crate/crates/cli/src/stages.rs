//! Config-driven pipeline: vocab -> counts -> train -> reconstruct ->
//! measure -> evaluate, with artifact reuse keyed on the config hash.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use biaslens::bias::{
    bias_threshold, normalize_and_classify, BiasRecord, BiasReport, TauPolicy,
};
use biaslens::cooccur::{count_cooc_threaded, CoocMatrix};
use biaslens::corpus::{
    read_pair_list, read_word_list, subsample, tokenize_normalize, ConceptLexicon, Sentence,
    Vocabulary,
};
use biaslens::eval::{
    bias_histogram, correlation_table, load_stats, measure_associations, measure_psi, Measure,
    NamedRep, OccupationStats, Rep, StatsSource,
};
use biaslens::explicit::{
    esg_norm_terms, esg_view_with_norms, init_glove_view, ppmi_view, NormSide,
};
use biaslens::glove::{train_glove, GloveConfig};
use biaslens::lexicons;
use biaslens::model::EmbeddingModel;
use biaslens::sgns::{train_sgns, NoiseDistribution, SgnsConfig};

use crate::config::{RunConfig, TauPool};
use crate::emit;

pub struct Pipeline {
    pub config: RunConfig,
    pub hash: String,
    pub force: bool,
}

/// Which part of the pipeline a command asks for. Dependencies are always
/// ensured (reused when fresh, built otherwise).
pub enum Scope {
    Full,
    Bias {
        measures: Option<Vec<Measure>>,
        representations: Option<Vec<String>>,
    },
    Correlate,
}

/// In-memory state shared across stages once built or loaded.
struct Resources {
    vocab: Vocabulary,
    counts: CoocMatrix,
    sg: Option<EmbeddingModel>,
    glove: Option<EmbeddingModel>,
    esg_norms: Option<(Vec<f64>, Vec<f64>)>,
}

impl Pipeline {
    pub fn new(config: RunConfig, force: bool) -> Pipeline {
        let hash = config.hash();
        Pipeline {
            config,
            hash,
            force,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.config.outdir.join(name)
    }

    /// True when the artifact exists and was produced by this exact config.
    /// An artifact from a different config is an error unless --force.
    fn fresh(&self, path: &Path) -> Result<bool> {
        if self.force || !path.exists() {
            return Ok(false);
        }
        match embedded_hash_of(path)? {
            Some(tag) if tag == self.hash => Ok(true),
            Some(tag) => bail!(
                "{} was built with config {tag}, current is {}; rerun with --force",
                path.display(),
                self.hash
            ),
            None => bail!(
                "{} carries no config tag; rerun with --force",
                path.display()
            ),
        }
    }

    fn write(&self, path: &Path, content: &str) -> Result<()> {
        fs::write(path, content)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }

    pub fn execute(&self, scope: Scope) -> Result<()> {
        fs::create_dir_all(&self.config.outdir).with_context(|| {
            format!("cannot create outdir {}", self.config.outdir.display())
        })?;

        let tokens = self.stage_tokenize().context("stage tokenize")?;
        let vocab = self.stage_vocab(&tokens).context("stage vocab")?;
        let sampled = subsample(&tokens, &vocab, self.config.sample_t, self.config.seed);
        let counts = self.stage_count(&sampled, &vocab).context("stage count")?;

        let wants = |names: &[&str]| {
            self.config
                .representations
                .iter()
                .any(|r| names.contains(&r.as_str()))
        };
        let sg = if wants(&["sg", "esg"]) {
            Some(self.stage_train_sg(&sampled, &vocab).context("stage train-sg")?)
        } else {
            None
        };
        let glove = if wants(&["glove", "eglove"]) {
            Some(
                self.stage_train_glove(&counts, &vocab)
                    .context("stage train-glove")?,
            )
        } else {
            None
        };

        let noise = NoiseDistribution::from_vocab(&vocab, self.config.noise_exponent)?;
        let esg_norms = match (&sg, wants(&["esg"])) {
            (Some(model), true) => Some((
                esg_norm_terms(model, &noise, NormSide::Word),
                esg_norm_terms(model, &noise, NormSide::Context),
            )),
            _ => None,
        };
        let resources = Resources {
            vocab,
            counts,
            sg,
            glove,
            esg_norms,
        };

        match scope {
            Scope::Full => {
                self.stage_bias(&resources, None, None).context("stage bias")?;
                if !self.config.stats.is_empty() {
                    self.stage_correlate(&resources).context("stage correlate")?;
                }
            }
            Scope::Bias {
                measures,
                representations,
            } => {
                self.stage_bias(&resources, measures.as_deref(), representations.as_deref())
                    .context("stage bias")?;
            }
            Scope::Correlate => {
                if self.config.stats.is_empty() {
                    bail!("correlate needs `stats` files in the config");
                }
                self.stage_correlate(&resources).context("stage correlate")?;
            }
        }
        Ok(())
    }

    fn stage_tokenize(&self) -> Result<Vec<Sentence>> {
        let path = self.path("tokens.txt");
        if self.fresh(&path)? {
            println!("tokenize: reusing {}", path.display());
            return read_tokens(&path);
        }
        let file = fs::File::open(&self.config.corpus)
            .with_context(|| format!("cannot open corpus {}", self.config.corpus.display()))?;
        let tokens = tokenize_normalize(BufReader::new(file))?;
        let mut out = String::new();
        out.push_str(&format!("#config={}\n", self.hash));
        for sentence in &tokens {
            out.push_str(&sentence.join(" "));
            out.push('\n');
        }
        self.write(&path, &out)?;
        println!("tokenize: {} sentences -> {}", tokens.len(), path.display());
        Ok(tokens)
    }

    fn stage_vocab(&self, tokens: &[Sentence]) -> Result<Vocabulary> {
        let path = self.path("vocab.tsv");
        if self.fresh(&path)? {
            println!("vocab: reusing {}", path.display());
            let file = fs::File::open(&path)?;
            return Ok(Vocabulary::read_tsv(BufReader::new(file))?);
        }
        let vocab = Vocabulary::build(tokens, self.config.min_count)?;
        let mut buf = Vec::new();
        writeln!(buf, "#config={}", self.hash)?;
        vocab.write_tsv(&mut buf)?;
        self.write(&path, std::str::from_utf8(&buf)?)?;
        println!("vocab: {} words -> {}", vocab.len(), path.display());
        Ok(vocab)
    }

    fn stage_count(&self, sampled: &[Sentence], vocab: &Vocabulary) -> Result<CoocMatrix> {
        let path = self.path("counts.tsv");
        if self.fresh(&path)? {
            println!("count: reusing {}", path.display());
            let file = fs::File::open(&path)?;
            return Ok(CoocMatrix::read_tsv(BufReader::new(file), vocab)?);
        }
        let counts =
            count_cooc_threaded(sampled, vocab, self.config.window, self.config.threads);
        let mut buf = Vec::new();
        writeln!(buf, "#config={}", self.hash)?;
        counts.write_tsv(vocab, &mut buf)?;
        self.write(&path, std::str::from_utf8(&buf)?)?;
        println!(
            "count: {} stored cells -> {}",
            counts.nnz(),
            path.display()
        );
        Ok(counts)
    }

    fn stage_train_sg(&self, sampled: &[Sentence], vocab: &Vocabulary) -> Result<EmbeddingModel> {
        let path = self.path("sg.embx");
        if self.fresh(&path)? {
            println!("train-sg: reusing {}", path.display());
            let file = fs::File::open(&path)?;
            return Ok(EmbeddingModel::read_embx(BufReader::new(file))?);
        }
        let config = SgnsConfig {
            dim: self.config.dim,
            window: self.config.window,
            negatives: self.config.negatives,
            epochs: self.config.sg_epochs,
            lr_start: self.config.sg_lr,
            noise_exponent: self.config.noise_exponent,
            seed: self.config.seed,
            threads: self.config.threads,
        };
        let model = train_sgns(sampled, vocab, &config)?;
        let mut buf = Vec::new();
        model.write_embx(&mut buf, Some(&self.hash))?;
        self.write(&path, std::str::from_utf8(&buf)?)?;
        println!("train-sg: d={} -> {}", config.dim, path.display());
        Ok(model)
    }

    fn stage_train_glove(&self, counts: &CoocMatrix, vocab: &Vocabulary) -> Result<EmbeddingModel> {
        let path = self.path("glove.embx");
        if self.fresh(&path)? {
            println!("train-glove: reusing {}", path.display());
            let file = fs::File::open(&path)?;
            return Ok(EmbeddingModel::read_embx(BufReader::new(file))?);
        }
        let config = GloveConfig {
            dim: self.config.dim,
            x_max: self.config.x_max,
            weight_exp: self.config.weight_exp,
            epochs: self.config.glove_epochs,
            lr: self.config.glove_lr,
            seed: self.config.seed,
            threads: self.config.threads,
        };
        let model = train_glove(counts, vocab, &config)?;
        let mut buf = Vec::new();
        model.write_embx(&mut buf, Some(&self.hash))?;
        self.write(&path, std::str::from_utf8(&buf)?)?;
        println!("train-glove: d={} -> {}", config.dim, path.display());
        Ok(model)
    }

    fn lexicon(&self) -> Result<ConceptLexicon> {
        load_lexicon(
            self.config.lexicon_z.as_deref(),
            self.config.lexicon_z_prime.as_deref(),
            self.config.lexicon_pairs.as_deref(),
        )
    }

    fn report_words(&self) -> Result<Vec<String>> {
        match &self.config.words {
            Some(path) => {
                let file = fs::File::open(path)
                    .with_context(|| format!("cannot open word list {}", path.display()))?;
                Ok(read_word_list(BufReader::new(file))?)
            }
            None => Ok(lexicons::occupations().all()),
        }
    }

    /// Builds the requested representation and hands it to `f`. Explicit
    /// views are cheap to assemble here because the expensive parts (counts,
    /// models, eSG norms) are cached in `Resources`.
    fn with_rep<T>(
        &self,
        name: &str,
        res: &Resources,
        f: impl FnOnce(Rep<'_>) -> Result<T>,
    ) -> Result<T> {
        match name {
            "sg" => f(Rep::Embedding(require(res.sg.as_ref(), "sg")?)),
            "glove" => f(Rep::Embedding(require(res.glove.as_ref(), "glove")?)),
            "ppmi" => {
                let view = ppmi_view(
                    &res.counts,
                    &res.vocab,
                    self.config.alpha,
                    self.config.shift_k,
                )?;
                f(Rep::Explicit(&view))
            }
            "initglove" => {
                let view = init_glove_view(&res.counts, &res.vocab)?;
                f(Rep::Explicit(&view))
            }
            "esg" => {
                let model = require(res.sg.as_ref(), "esg")?;
                let (eta_w, eta_c) = res
                    .esg_norms
                    .clone()
                    .ok_or_else(|| anyhow!("esg norms were not prepared"))?;
                let view = esg_view_with_norms(model, eta_w, eta_c)?;
                f(Rep::Explicit(&view))
            }
            "eglove" => {
                let model = require(res.glove.as_ref(), "eglove")?;
                let view = biaslens::explicit::eglove_view(model)?;
                f(Rep::Explicit(&view))
            }
            other => bail!("unknown representation {other:?}"),
        }
    }

    fn stage_bias(
        &self,
        res: &Resources,
        measures: Option<&[Measure]>,
        representations: Option<&[String]>,
    ) -> Result<()> {
        let lexicon = self.lexicon()?;
        let words = self.report_words()?;
        let vocab_words: Vec<String> = res.vocab.words().map(str::to_string).collect();
        let pool: &[String] = match self.config.tau_pool {
            TauPool::Vocab => &vocab_words,
            TauPool::Words => &words,
        };
        let measures = measures.unwrap_or(&self.config.measures);
        let representations = representations.unwrap_or(&self.config.representations);

        for &measure in measures {
            for rep_name in representations {
                if !combo_is_valid(measure, rep_name) {
                    log::warn!(
                        "skipping {} on {rep_name}: first-order needs an explicit representation",
                        measure.as_str()
                    );
                    continue;
                }
                let stem = format!("{}_{}", measure.as_str(), rep_name);
                let json_path = self.path(&format!("bias_{stem}.json"));
                let tsv_path = self.path(&format!("bias_{stem}.tsv"));
                if self.fresh(&json_path)? && tsv_path.exists() {
                    println!("bias {stem}: reusing {}", json_path.display());
                    continue;
                }
                let report = self.with_rep(rep_name, res, |rep| {
                    self.build_report(&rep, measure, &lexicon, pool, &words, rep_name)
                })?;
                self.write(&json_path, &emit::report_json(&report, Some(&self.hash))?)?;
                self.write(&tsv_path, &emit::report_tsv(&report, Some(&self.hash)))?;
                let has_assoc = report.records.iter().any(|r| r.assoc_z.is_some());
                if has_assoc {
                    let scatter = self.path(&format!("scatter_{stem}.tsv"));
                    self.write(&scatter, &emit::scatter_tsv(&report, Some(&self.hash)))?;
                    if self.config.svg {
                        let svg = self.path(&format!("scatter_{stem}.svg"));
                        self.write(&svg, &emit::scatter_svg(&report, Some(&self.hash)))?;
                    }
                }
                let hist = bias_histogram(&report, self.config.bins)?;
                self.write(
                    &self.path(&format!("hist_{stem}.tsv")),
                    &emit::histogram_tsv(&hist, Some(&self.hash)),
                )?;
                if self.config.svg {
                    self.write(
                        &self.path(&format!("hist_{stem}.svg")),
                        &emit::histogram_svg(&hist, Some(&self.hash)),
                    )?;
                }
                println!(
                    "bias {stem}: {} words, tau={:.6}",
                    report.records.len(),
                    report.tau
                );
            }
        }
        Ok(())
    }

    fn build_report(
        &self,
        rep: &Rep<'_>,
        measure: Measure,
        lexicon: &ConceptLexicon,
        pool: &[String],
        words: &[String],
        rep_name: &str,
    ) -> Result<BiasReport> {
        let mut report = match measure {
            Measure::Directional => {
                // no association pair to normalize; classify raw projections
                let psi = measure_psi(rep, measure, lexicon, pool)?;
                let values: Vec<f64> = psi.iter().map(|&(_, v)| v).collect();
                let tau = bias_threshold(&values)?;
                let records: Vec<BiasRecord> = words
                    .iter()
                    .filter_map(|w| {
                        let &(_, value) = psi.iter().find(|(word, _)| word == w)?;
                        Some(BiasRecord {
                            word: w.clone(),
                            psi: value,
                            assoc_z: None,
                            assoc_z_prime: None,
                            label: BiasReport::label_for(tau, value),
                        })
                    })
                    .collect();
                if records.is_empty() {
                    bail!("none of the report words are in the vocabulary");
                }
                BiasReport {
                    method: measure.as_str().into(),
                    representation: rep_name.into(),
                    tau,
                    params: Default::default(),
                    records,
                }
            }
            _ => {
                let table = measure_associations(rep, measure, lexicon, pool)?;
                normalize_and_classify(
                    &table,
                    words,
                    TauPolicy::MeanAbs,
                    measure.as_str(),
                    rep_name,
                )?
            }
        };
        report
            .params
            .insert("noise_exponent".into(), self.config.noise_exponent.to_string());
        report
            .params
            .insert("alpha".into(), self.config.alpha.to_string());
        report.params.insert("seed".into(), self.config.seed.to_string());
        Ok(report)
    }

    fn stage_correlate(&self, res: &Resources) -> Result<()> {
        let tsv_path = self.path("correlation.tsv");
        let json_path = self.path("correlation.json");
        if self.fresh(&tsv_path)? && json_path.exists() {
            println!("correlate: reusing {}", tsv_path.display());
            return Ok(());
        }
        let lexicon = self.lexicon()?;
        let collections: Vec<OccupationStats> = self
            .config
            .stats
            .iter()
            .map(|path| load_stats_file(path))
            .collect::<Result<_>>()?;
        let refs: Vec<&OccupationStats> = collections.iter().collect();

        // materialize every requested representation up front so the
        // correlation table sees them together
        let wants = |n: &str| self.config.representations.iter().any(|r| r == n);
        let ppmi_v = if wants("ppmi") {
            Some(ppmi_view(
                &res.counts,
                &res.vocab,
                self.config.alpha,
                self.config.shift_k,
            )?)
        } else {
            None
        };
        let initglove_v = if wants("initglove") {
            Some(init_glove_view(&res.counts, &res.vocab)?)
        } else {
            None
        };
        let esg_v = if wants("esg") {
            let model = require(res.sg.as_ref(), "esg")?;
            let (eta_w, eta_c) = res
                .esg_norms
                .clone()
                .ok_or_else(|| anyhow!("esg norms were not prepared"))?;
            Some(esg_view_with_norms(model, eta_w, eta_c)?)
        } else {
            None
        };
        let eglove_v = if wants("eglove") {
            Some(biaslens::explicit::eglove_view(require(
                res.glove.as_ref(),
                "eglove",
            )?)?)
        } else {
            None
        };

        let mut reps: Vec<(String, Rep<'_>)> = Vec::new();
        for name in &self.config.representations {
            let rep = match name.as_str() {
                "sg" => Rep::Embedding(require(res.sg.as_ref(), "sg")?),
                "glove" => Rep::Embedding(require(res.glove.as_ref(), "glove")?),
                "ppmi" => Rep::Explicit(ppmi_v.as_ref().expect("built above")),
                "initglove" => Rep::Explicit(initglove_v.as_ref().expect("built above")),
                "esg" => Rep::Explicit(esg_v.as_ref().expect("built above")),
                "eglove" => Rep::Explicit(eglove_v.as_ref().expect("built above")),
                other => bail!("unknown representation {other:?}"),
            };
            reps.push((name.clone(), rep));
        }

        let mut rows = Vec::new();
        for &measure in &self.config.measures {
            let named: Vec<NamedRep<'_>> = reps
                .iter()
                .filter(|(name, _)| combo_is_valid(measure, name))
                .map(|(name, rep)| NamedRep {
                    name: name.clone(),
                    rep: *rep,
                })
                .collect();
            if named.is_empty() {
                continue;
            }
            rows.extend(correlation_table(&named, &[measure], &refs, &lexicon)?);
        }

        self.write(&tsv_path, &emit::correlation_tsv(&rows, Some(&self.hash)))?;
        self.write(&json_path, &emit::correlation_json(&rows, Some(&self.hash))?)?;
        println!("correlate: {} rows -> {}", rows.len(), tsv_path.display());
        Ok(())
    }
}

fn require<'a, T>(value: Option<&'a T>, rep: &str) -> Result<&'a T> {
    value.ok_or_else(|| anyhow!("representation {rep} needs a model that was not trained"))
}

/// First-order measurement needs an explicit view; initGloVe is excluded
/// because its unobserved cells are undefined (log 0), which any
/// vocabulary-wide pass is guaranteed to hit.
pub fn combo_is_valid(measure: Measure, rep: &str) -> bool {
    match measure {
        Measure::Weam1st => matches!(rep, "ppmi" | "esg" | "eglove"),
        _ => true,
    }
}

pub fn read_tokens(path: &Path) -> Result<Vec<Sentence>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(text
        .lines()
        .filter(|line| !line.starts_with('#') && !line.trim().is_empty())
        .map(|line| line.split_whitespace().map(str::to_string).collect())
        .collect())
}

pub fn load_lexicon(
    z: Option<&Path>,
    z_prime: Option<&Path>,
    pairs: Option<&Path>,
) -> Result<ConceptLexicon> {
    match (z, z_prime) {
        (Some(z_path), Some(zp_path)) => {
            let z_words = read_word_list(BufReader::new(fs::File::open(z_path)?))?;
            let zp_words = read_word_list(BufReader::new(fs::File::open(zp_path)?))?;
            let pair_list = match pairs {
                Some(p) => read_pair_list(
                    BufReader::new(fs::File::open(p)?),
                    &p.display().to_string(),
                )?,
                None => Vec::new(),
            };
            Ok(ConceptLexicon::new(z_words, zp_words, pair_list)?)
        }
        (None, None) => Ok(lexicons::gender_lexicon()),
        _ => bail!("lexicon_z and lexicon_z_prime must be given together"),
    }
}

pub fn load_stats_file(path: &Path) -> Result<OccupationStats> {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    let source = if stem.contains("labor") {
        StatsSource::Labor
    } else if stem.contains("census") {
        StatsSource::Census
    } else {
        StatsSource::Custom
    };
    let file =
        fs::File::open(path).with_context(|| format!("cannot open stats {}", path.display()))?;
    Ok(load_stats(BufReader::new(file), source, &stem)?)
}

/// Extracts the config tag an artifact was written with, across all our
/// formats (`#config=`, embx header, SVG comment, JSON field).
pub fn embedded_hash_of(path: &Path) -> Result<Option<String>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(embedded_hash(&text))
}

fn embedded_hash(text: &str) -> Option<String> {
    for line in text.lines().take(4) {
        if let Some(rest) = line.trim().strip_prefix("#config=") {
            return Some(rest.trim().to_string());
        }
        if line.starts_with("embx ") {
            if let Some(idx) = line.find("config=") {
                return Some(line[idx + "config=".len()..].trim().to_string());
            }
        }
        if let Some(idx) = line.find("<!-- config=") {
            let rest = &line[idx + "<!-- config=".len()..];
            return rest.split_whitespace().next().map(str::to_string);
        }
    }
    if text.trim_start().starts_with('{') {
        if let Some(idx) = text.find("\"config_hash\"") {
            let rest = &text[idx + "\"config_hash\"".len()..];
            let rest = rest.trim_start().strip_prefix(':')?.trim_start();
            if let Some(stripped) = rest.strip_prefix('"') {
                return stripped.split('"').next().map(str::to_string);
            }
        }
    }
    None
}
