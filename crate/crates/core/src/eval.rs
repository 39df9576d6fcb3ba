//! Evaluation against external occupation statistics, the counterfactual
//! augmentation experiment, and histogram summaries.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::bias::{
    bias_directional, bias_weam1st, bias_weam2nd, centroid_bias, BiasReport, DirectionalAxis,
    ResolvedLexicon,
};
use crate::cooccur::count_cooc;
use crate::corpus::{cda_augment, AugmentMode, ConceptLexicon, Sentence, Vocabulary};
use crate::explicit::{esg_view, ppmi_view, ExplicitView};
use crate::model::{EmbeddingModel, WordVectors};
use crate::sgns::{train_sgns, NoiseDistribution, SgnsConfig};
use crate::stats::{pearson, spearman};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsSource {
    Labor,
    Census,
    Custom,
}

impl StatsSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            StatsSource::Labor => "labor",
            StatsSource::Census => "census",
            StatsSource::Custom => "custom",
        }
    }
}

/// External ground truth: percent of workers in each occupation reported as
/// female, in `[0, 100]`.
#[derive(Debug, Clone)]
pub struct OccupationStats {
    pub source: StatsSource,
    pub name: String,
    pub records: Vec<(String, f64)>,
}

/// Parses `occupation,percent_female` CSV. Multi-token occupations are
/// skipped with a warning (the vocabulary is single-token).
pub fn load_stats<R: BufRead>(input: R, source: StatsSource, name: &str) -> Result<OccupationStats> {
    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => {
            return Ok(OccupationStats {
                source,
                name: name.to_string(),
                records: Vec::new(),
            })
        }
    };
    if header.trim() != "occupation,percent_female" {
        return Err(Error::Parse {
            path: name.into(),
            line: 1,
            message: "expected header `occupation,percent_female`".into(),
        });
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (occupation, percent) = line.split_once(',').ok_or_else(|| Error::Parse {
            path: name.into(),
            line: i + 1,
            message: "expected occupation,percent_female".into(),
        })?;
        let occupation = occupation.trim().to_lowercase();
        if occupation.split_whitespace().count() != 1 {
            log::warn!("{name}:{}: multi-token occupation {occupation:?} skipped", i + 1);
            continue;
        }
        let percent: f64 = percent.trim().parse().map_err(|_| Error::Parse {
            path: name.into(),
            line: i + 1,
            message: format!("invalid percentage {percent:?}"),
        })?;
        if !(0.0..=100.0).contains(&percent) {
            return Err(Error::Parse {
                path: name.into(),
                line: i + 1,
                message: format!("percentage {percent} outside [0, 100]"),
            });
        }
        records.push((occupation, percent));
    }
    Ok(OccupationStats {
        source,
        name: name.to_string(),
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Directional,
    Centroid,
    Weam2nd,
    Weam1st,
}

impl Measure {
    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::Directional => "directional",
            Measure::Centroid => "centroid",
            Measure::Weam2nd => "weam2nd",
            Measure::Weam1st => "weam1st",
        }
    }

    pub fn parse(s: &str) -> Result<Measure> {
        match s {
            "directional" => Ok(Measure::Directional),
            "centroid" => Ok(Measure::Centroid),
            "weam2nd" => Ok(Measure::Weam2nd),
            "weam1st" => Ok(Measure::Weam1st),
            other => Err(Error::InvalidArgument(format!("unknown measure {other:?}"))),
        }
    }
}

/// A representation a measure can run on: a trained embedding (second-order
/// measures use its word vectors) or an explicit view (second-order measures
/// use rows, the first-order measure reads cells).
#[derive(Clone, Copy)]
pub enum Rep<'a> {
    Embedding(&'a EmbeddingModel),
    Explicit(&'a ExplicitView<'a>),
}

impl<'a> Rep<'a> {
    pub fn vectors(&self) -> &dyn WordVectors {
        match self {
            Rep::Embedding(m) => *m,
            Rep::Explicit(v) => *v,
        }
    }
}

pub struct NamedRep<'a> {
    pub name: String,
    pub rep: Rep<'a>,
}

/// Signed bias of each requested word under one measure and representation.
/// Words missing from the vocabulary are skipped with a warning. Positive
/// values mean "biased toward Z"; with the bundled gender lexicon Z is the
/// female side.
pub fn measure_psi(
    rep: &Rep<'_>,
    measure: Measure,
    lexicon: &ConceptLexicon,
    words: &[String],
) -> Result<Vec<(String, f64)>> {
    let vectors = rep.vectors();
    let resolved = ResolvedLexicon::resolve(lexicon, vectors)?;
    let in_vocab: Vec<(String, usize)> = words
        .iter()
        .filter_map(|w| match vectors.index_of(w) {
            Some(idx) => Some((w.clone(), idx)),
            None => {
                log::warn!("occupation {w:?} not in vocabulary; skipped");
                None
            }
        })
        .collect();

    match measure {
        Measure::Directional => {
            let axis = DirectionalAxis::fit(vectors, &resolved)?;
            in_vocab
                .into_iter()
                .map(|(w, idx)| Ok((w, bias_directional(&axis, &vectors.vector(idx)))))
                .collect()
        }
        Measure::Centroid => in_vocab
            .into_iter()
            .map(|(w, idx)| {
                centroid_bias(vectors, &resolved, &vectors.vector(idx)).map(|psi| (w, psi))
            })
            .collect(),
        Measure::Weam2nd => in_vocab
            .into_iter()
            .map(|(w, idx)| bias_weam2nd(vectors, &resolved, idx).map(|psi| (w, psi)))
            .collect(),
        Measure::Weam1st => {
            let Rep::Explicit(view) = rep else {
                return Err(Error::InvalidArgument(
                    "weam1st needs an explicit representation".into(),
                ));
            };
            in_vocab
                .into_iter()
                .map(|(w, idx)| bias_weam1st(view, &resolved, idx).map(|psi| (w, psi)))
                .collect()
        }
    }
}

/// Raw associations of every requested word to Z and Z' (the inputs to
/// min-max normalization and the scatter plot). Only association-pair
/// measures (centroid, weam2nd, weam1st) support this.
pub fn measure_associations(
    rep: &Rep<'_>,
    measure: Measure,
    lexicon: &ConceptLexicon,
    words: &[String],
) -> Result<crate::bias::AssociationTable> {
    let vectors = rep.vectors();
    let resolved = ResolvedLexicon::resolve(lexicon, vectors)?;
    let mut out = crate::bias::AssociationTable {
        words: Vec::new(),
        to_z: Vec::new(),
        to_z_prime: Vec::new(),
    };
    for word in words {
        let Some(idx) = vectors.index_of(word) else {
            log::warn!("word {word:?} not in vocabulary; skipped");
            continue;
        };
        let (az, azp) = match measure {
            Measure::Centroid => {
                let v_w = vectors.vector(idx);
                let centroid = |set: &[usize]| -> Result<f64> {
                    let mut mean = vec![0.0; vectors.vector_dim()];
                    for &x in set {
                        for (m, val) in mean.iter_mut().zip(vectors.vector(x)) {
                            *m += val;
                        }
                    }
                    for m in mean.iter_mut() {
                        *m /= set.len() as f64;
                    }
                    crate::bias::cosine(&mean, &v_w)
                };
                (centroid(&resolved.z)?, centroid(&resolved.z_prime)?)
            }
            Measure::Weam2nd => (
                crate::bias::weam2nd(vectors, idx, &resolved.z)?,
                crate::bias::weam2nd(vectors, idx, &resolved.z_prime)?,
            ),
            Measure::Weam1st => {
                let Rep::Explicit(view) = rep else {
                    return Err(Error::InvalidArgument(
                        "weam1st needs an explicit representation".into(),
                    ));
                };
                (
                    crate::bias::weam1st(view, idx, &resolved.z)?,
                    crate::bias::weam1st(view, idx, &resolved.z_prime)?,
                )
            }
            Measure::Directional => {
                return Err(Error::InvalidArgument(
                    "directional bias has no association pair; use psi directly".into(),
                ))
            }
        };
        out.words.push(word.clone());
        out.to_z.push(az);
        out.to_z_prime.push(azp);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub representation: String,
    pub measure: Measure,
    pub collection: String,
    pub spearman: f64,
    pub pearson: f64,
    pub n: usize,
}

/// One row per representation x measure x collection. The bias sign follows
/// the lexicon (Z = female with the bundled one), so positive correlation
/// against percent-female is the expected direction.
pub fn correlation_table(
    reps: &[NamedRep<'_>],
    measures: &[Measure],
    collections: &[&OccupationStats],
    lexicon: &ConceptLexicon,
) -> Result<Vec<CorrelationRow>> {
    if reps.is_empty() || collections.is_empty() {
        return Err(Error::InsufficientData {
            reason: "need at least one representation and one collection".into(),
        });
    }
    let mut rows = Vec::new();
    for named in reps {
        for &measure in measures {
            for &stats in collections {
                let words: Vec<String> =
                    stats.records.iter().map(|(w, _)| w.clone()).collect();
                let psi = measure_psi(&named.rep, measure, lexicon, &words)?;
                let mut x = Vec::new();
                let mut y = Vec::new();
                for (word, value) in &psi {
                    let percent = stats
                        .records
                        .iter()
                        .find(|(w, _)| w == word)
                        .map(|&(_, p)| p)
                        .expect("measured word comes from the collection");
                    x.push(percent);
                    y.push(*value);
                }
                if x.len() < 3 {
                    return Err(Error::InsufficientData {
                        reason: format!(
                            "only {} of {} occupations from {} are in the vocabulary",
                            x.len(),
                            stats.records.len(),
                            stats.name
                        ),
                    });
                }
                rows.push(CorrelationRow {
                    representation: named.name.clone(),
                    measure,
                    collection: stats.name.clone(),
                    spearman: spearman(&x, &y)?,
                    pearson: pearson(&x, &y)?,
                    n: x.len(),
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CdaTrajectory {
    pub occupation: String,
    pub method: String,
    pub psi_original: f64,
    pub psi_half: f64,
    pub psi_full: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CdaAggregate {
    pub method: String,
    /// mean |psi_half - psi_original| over the measured occupations
    pub first_step: f64,
    /// mean |psi_full - psi_half|
    pub second_step: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CdaOutcome {
    pub trajectories: Vec<CdaTrajectory>,
    pub aggregates: Vec<CdaAggregate>,
}

#[derive(Debug, Clone)]
pub struct CdaExperimentConfig {
    pub window: usize,
    pub min_count: u64,
    /// Context-distribution smoothing for the PPMI first-order track.
    pub alpha: f64,
    pub shift_k: u64,
    /// Enables the PPMI + first-order track.
    pub ppmi: bool,
    /// Enables the SG + second-order and eSG + first-order tracks; models are
    /// retrained from scratch with the same seed on each corpus.
    pub sgns: Option<SgnsConfig>,
    pub seed: u64,
}

impl Default for CdaExperimentConfig {
    fn default() -> CdaExperimentConfig {
        CdaExperimentConfig {
            window: 5,
            min_count: 1,
            alpha: 0.75,
            shift_k: 1,
            ppmi: true,
            sgns: None,
            seed: 1,
        }
    }
}

/// Builds the half- and fully-augmented corpora, rebuilds every requested
/// representation on each, and reports the bias trajectory of each occupation
/// plus the mean absolute change per augmentation step.
pub fn cda_experiment(
    sentences: &[Sentence],
    lexicon: &ConceptLexicon,
    occupations: &[String],
    config: &CdaExperimentConfig,
) -> Result<CdaOutcome> {
    let half = cda_augment(sentences, lexicon, AugmentMode::Half, config.seed);
    let full = cda_augment(sentences, lexicon, AugmentMode::Full, config.seed);
    let corpora = [sentences, half.as_slice(), full.as_slice()];

    // per corpus: method -> (occupation -> psi)
    let mut stage_results: Vec<Vec<(String, Vec<(String, f64)>)>> = Vec::new();
    for corpus in corpora {
        let vocab = Vocabulary::build(corpus, config.min_count)?;
        let mut methods = Vec::new();
        if config.ppmi {
            let counts = count_cooc(corpus, &vocab, config.window);
            let view = ppmi_view(&counts, &vocab, config.alpha, config.shift_k)?;
            let rep = Rep::Explicit(&view);
            methods.push((
                "weam1st/ppmi".to_string(),
                measure_psi(&rep, Measure::Weam1st, lexicon, occupations)?,
            ));
        }
        if let Some(sgns_config) = &config.sgns {
            let model = train_sgns(corpus, &vocab, sgns_config)?;
            let rep = Rep::Embedding(&model);
            methods.push((
                "weam2nd/sg".to_string(),
                measure_psi(&rep, Measure::Weam2nd, lexicon, occupations)?,
            ));
            let noise = NoiseDistribution::from_vocab(&vocab, sgns_config.noise_exponent)?;
            let view = esg_view(&model, &noise)?;
            let rep = Rep::Explicit(&view);
            methods.push((
                "weam1st/esg".to_string(),
                measure_psi(&rep, Measure::Weam1st, lexicon, occupations)?,
            ));
        }
        stage_results.push(methods);
    }

    let mut trajectories = Vec::new();
    let mut aggregates = Vec::new();
    let method_count = stage_results[0].len();
    for m in 0..method_count {
        let method = stage_results[0][m].0.clone();
        let lookup = |stage: usize, word: &str| -> Option<f64> {
            stage_results[stage][m]
                .1
                .iter()
                .find(|(w, _)| w == word)
                .map(|&(_, psi)| psi)
        };
        let mut first = Vec::new();
        let mut second = Vec::new();
        for occupation in occupations {
            let (Some(o), Some(h), Some(f)) = (
                lookup(0, occupation),
                lookup(1, occupation),
                lookup(2, occupation),
            ) else {
                continue;
            };
            first.push((h - o).abs());
            second.push((f - h).abs());
            trajectories.push(CdaTrajectory {
                occupation: occupation.clone(),
                method: method.clone(),
                psi_original: o,
                psi_half: h,
                psi_full: f,
            });
        }
        if first.is_empty() {
            return Err(Error::InsufficientData {
                reason: "no occupation measurable on all three corpora".into(),
            });
        }
        aggregates.push(CdaAggregate {
            method,
            first_step: first.iter().sum::<f64>() / first.len() as f64,
            second_step: second.iter().sum::<f64>() / second.len() as f64,
        });
    }
    Ok(CdaOutcome {
        trajectories,
        aggregates,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub unbiased: usize,
    pub z_biased: usize,
    pub z_prime_biased: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
}

/// Bins the report's bias values over the symmetric range `[-m, m]` with
/// `m = max |psi|`, splitting each bin's count by label. An all-zero report
/// collapses into the center bin.
pub fn bias_histogram(report: &BiasReport, n_bins: usize) -> Result<Histogram> {
    assert!(n_bins >= 1, "need at least one bin");
    if report.records.is_empty() {
        return Err(Error::EmptyReport);
    }
    let m = report
        .records
        .iter()
        .map(|r| r.psi.abs())
        .fold(0.0, f64::max);
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|i| HistogramBin {
            lo: -m + 2.0 * m * i as f64 / n_bins as f64,
            hi: -m + 2.0 * m * (i + 1) as f64 / n_bins as f64,
            unbiased: 0,
            z_biased: 0,
            z_prime_biased: 0,
        })
        .collect();
    for record in &report.records {
        let idx = if m == 0.0 {
            n_bins / 2
        } else {
            (((record.psi + m) / (2.0 * m) * n_bins as f64) as usize).min(n_bins - 1)
        };
        match record.label {
            crate::bias::BiasLabel::Unbiased => bins[idx].unbiased += 1,
            crate::bias::BiasLabel::ZBiased => bins[idx].z_biased += 1,
            crate::bias::BiasLabel::ZPrimeBiased => bins[idx].z_prime_biased += 1,
        }
    }
    Ok(Histogram { bins })
}
