//! Flat key=value run configuration with `BIASLENS_*` environment overrides
//! and a content hash that gets embedded into every artifact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use biaslens::eval::Measure;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauPool {
    /// Min-max and threshold pooled over the whole vocabulary (default).
    Vocab,
    /// Pooled over the report word list only.
    Words,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub outdir: PathBuf,
    pub representations: Vec<String>,
    pub measures: Vec<Measure>,
    pub stats: Vec<PathBuf>,
    pub words: Option<PathBuf>,
    pub lexicon_z: Option<PathBuf>,
    pub lexicon_z_prime: Option<PathBuf>,
    pub lexicon_pairs: Option<PathBuf>,
    pub seed: u64,
    pub threads: usize,
    pub min_count: u64,
    pub window: usize,
    pub sample_t: f64,
    pub dim: usize,
    pub sg_epochs: usize,
    pub sg_lr: f64,
    pub negatives: usize,
    pub noise_exponent: f64,
    pub glove_epochs: usize,
    pub glove_lr: f64,
    pub x_max: f64,
    pub weight_exp: f64,
    pub alpha: f64,
    pub shift_k: u64,
    pub tau_pool: TauPool,
    pub svg: bool,
    pub bins: usize,
}

pub const KNOWN_REPRESENTATIONS: [&str; 6] =
    ["sg", "esg", "ppmi", "glove", "eglove", "initglove"];

const KNOWN_KEYS: [&str; 28] = [
    "corpus",
    "outdir",
    "representations",
    "measures",
    "stats",
    "words",
    "lexicon_z",
    "lexicon_z_prime",
    "lexicon_pairs",
    "seed",
    "threads",
    "min_count",
    "window",
    "sample_t",
    "dim",
    "sg_epochs",
    "sg_lr",
    "negatives",
    "noise_exponent",
    "glove_epochs",
    "glove_lr",
    "x_max",
    "weight_exp",
    "alpha",
    "shift_k",
    "tau_pool",
    "svg",
    "bins",
];

impl RunConfig {
    /// Parses the config file, applies `BIASLENS_<KEY>` environment overrides,
    /// and validates before any pipeline work starts.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut values: BTreeMap<String, String> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key = value", path.display(), i + 1))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("{}:{}: unknown config key {key:?}", path.display(), i + 1);
            }
            values.insert(key, value.trim().to_string());
        }
        for key in KNOWN_KEYS {
            let env_key = format!("BIASLENS_{}", key.to_uppercase());
            if let Ok(value) = std::env::var(&env_key) {
                values.insert(key.to_string(), value);
            }
        }
        RunConfig::from_values(values)
    }

    fn from_values(values: BTreeMap<String, String>) -> Result<RunConfig> {
        let get = |key: &str| values.get(key).map(String::as_str);
        let parse_num = |key: &str, default: f64| -> Result<f64> {
            match get(key) {
                Some(v) => v.parse().with_context(|| format!("bad number for {key}: {v:?}")),
                None => Ok(default),
            }
        };
        let parse_int = |key: &str, default: u64| -> Result<u64> {
            match get(key) {
                Some(v) => v.parse().with_context(|| format!("bad integer for {key}: {v:?}")),
                None => Ok(default),
            }
        };
        let parse_path = |key: &str| get(key).map(PathBuf::from);
        let parse_list = |key: &str, default: &[&str]| -> Vec<String> {
            match get(key) {
                Some(v) => v
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect(),
                None => default.iter().map(|s| s.to_string()).collect(),
            }
        };

        let corpus = parse_path("corpus").context("config is missing `corpus`")?;
        let outdir = parse_path("outdir").context("config is missing `outdir`")?;

        let representations = parse_list("representations", &["sg", "esg", "ppmi"]);
        for rep in &representations {
            if !KNOWN_REPRESENTATIONS.contains(&rep.as_str()) {
                bail!(
                    "unknown representation {rep:?}; expected one of {}",
                    KNOWN_REPRESENTATIONS.join(", ")
                );
            }
        }
        let measures = parse_list("measures", &["weam1st", "weam2nd"])
            .iter()
            .map(|m| Measure::parse(m).map_err(anyhow::Error::from))
            .collect::<Result<Vec<_>>>()?;

        let tau_pool = match get("tau_pool").unwrap_or("vocab") {
            "vocab" => TauPool::Vocab,
            "words" => TauPool::Words,
            other => bail!("tau_pool must be `vocab` or `words`, got {other:?}"),
        };
        let svg = match get("svg").unwrap_or("true") {
            "true" | "1" | "yes" => true,
            "false" | "0" | "no" => false,
            other => bail!("svg must be true or false, got {other:?}"),
        };

        let config = RunConfig {
            corpus,
            outdir,
            representations,
            measures,
            stats: parse_list("stats", &[]).into_iter().map(PathBuf::from).collect(),
            words: parse_path("words"),
            lexicon_z: parse_path("lexicon_z"),
            lexicon_z_prime: parse_path("lexicon_z_prime"),
            lexicon_pairs: parse_path("lexicon_pairs"),
            seed: parse_int("seed", 1)?,
            threads: parse_int("threads", 1)? as usize,
            min_count: parse_int("min_count", 200)?,
            window: parse_int("window", 5)? as usize,
            sample_t: parse_num("sample_t", 1e-3)?,
            dim: parse_int("dim", 300)? as usize,
            sg_epochs: parse_int("sg_epochs", 5)? as usize,
            sg_lr: parse_num("sg_lr", 0.025)?,
            negatives: parse_int("negatives", 5)? as usize,
            noise_exponent: parse_num("noise_exponent", 0.75)?,
            glove_epochs: parse_int("glove_epochs", 15)? as usize,
            glove_lr: parse_num("glove_lr", 0.05)?,
            x_max: parse_num("x_max", 100.0)?,
            weight_exp: parse_num("weight_exp", 0.75)?,
            alpha: parse_num("alpha", 0.75)?,
            shift_k: parse_int("shift_k", 1)?,
            tau_pool,
            svg,
            bins: parse_int("bins", 20)? as usize,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if !self.corpus.exists() {
            bail!("corpus file {} does not exist", self.corpus.display());
        }
        if self.window < 1 {
            bail!("window must be at least 1");
        }
        if self.min_count < 1 {
            bail!("min_count must be at least 1");
        }
        if self.shift_k < 1 {
            bail!("shift_k must be at least 1");
        }
        if !(0.0 < self.alpha && self.alpha <= 1.0) {
            bail!("alpha must be in (0, 1]");
        }
        if self.measures.is_empty() || self.representations.is_empty() {
            bail!("need at least one measure and one representation");
        }
        if self.bins < 1 {
            bail!("bins must be at least 1");
        }
        for stats in &self.stats {
            if !stats.exists() {
                bail!("stats file {} does not exist", stats.display());
            }
        }
        Ok(())
    }

    /// Canonical settings dump, the hash input. Includes defaults so the hash
    /// changes exactly when the effective configuration changes.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key}={value}");
        };
        put("corpus", self.corpus.display().to_string());
        put("representations", self.representations.join(","));
        put(
            "measures",
            self.measures
                .iter()
                .map(|m| m.as_str())
                .collect::<Vec<_>>()
                .join(","),
        );
        put(
            "stats",
            self.stats
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        let opt = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        put("words", opt(&self.words));
        put("lexicon_z", opt(&self.lexicon_z));
        put("lexicon_z_prime", opt(&self.lexicon_z_prime));
        put("lexicon_pairs", opt(&self.lexicon_pairs));
        put("seed", self.seed.to_string());
        put("min_count", self.min_count.to_string());
        put("window", self.window.to_string());
        put("sample_t", self.sample_t.to_string());
        put("dim", self.dim.to_string());
        put("sg_epochs", self.sg_epochs.to_string());
        put("sg_lr", self.sg_lr.to_string());
        put("negatives", self.negatives.to_string());
        put("noise_exponent", self.noise_exponent.to_string());
        put("glove_epochs", self.glove_epochs.to_string());
        put("glove_lr", self.glove_lr.to_string());
        put("x_max", self.x_max.to_string());
        put("weight_exp", self.weight_exp.to_string());
        put("alpha", self.alpha.to_string());
        put("shift_k", self.shift_k.to_string());
        put(
            "tau_pool",
            match self.tau_pool {
                TauPool::Vocab => "vocab".to_string(),
                TauPool::Words => "words".to_string(),
            },
        );
        put("svg", self.svg.to_string());
        put("bins", self.bins.to_string());
        // threads deliberately excluded: worker count must not change results
        out
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in &digest[..8] {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }
}
