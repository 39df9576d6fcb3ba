//! Synthetic corpora with planted gender skew, used to calibrate and verify
//! the measures: each synthetic occupation appears in gendered contexts with
//! a known female ratio, so measured bias must recover the planted ordering.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Sentence;
use crate::lexicons;

#[derive(Debug, Clone)]
pub struct PlantedOccupation {
    pub word: String,
    pub female_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct PlantedConfig {
    /// Female-context ratios, one synthetic occupation per entry.
    pub ratios: Vec<f64>,
    /// Gendered sentences generated per occupation.
    pub sentences_per_occupation: usize,
    /// Neutral filler sentences mixed in.
    pub filler_sentences: usize,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> PlantedConfig {
        PlantedConfig {
            ratios: (1..=9).map(|i| i as f64 / 10.0).collect(),
            sentences_per_occupation: 1500,
            filler_sentences: 6000,
            seed: 7,
        }
    }
}

const OCCUPATION_NAMES: [&str; 9] = [
    "weavesmith",
    "glasswright",
    "mapkeeper",
    "inkbinder",
    "stonecaller",
    "reedcutter",
    "lampwright",
    "saltfarmer",
    "bellfounder",
];

const FILLER: [&str; 32] = [
    "the", "a", "an", "old", "young", "near", "busy", "quiet", "village", "market", "harbor",
    "road", "house", "garden", "workshop", "tower", "walked", "talked", "worked", "rested",
    "visited", "stayed", "morning", "evening", "winter", "summer", "again", "often", "slowly",
    "together", "about", "beyond",
];

/// Generates the corpus and the planted ground truth. Every occupation
/// sentence places the occupation next to a female or male definitional word,
/// with the female side chosen at the planted ratio.
pub fn planted_bias_corpus(config: &PlantedConfig) -> (Vec<Sentence>, Vec<PlantedOccupation>) {
    assert!(config.ratios.len() <= OCCUPATION_NAMES.len());
    let lexicon = lexicons::gender_lexicon();
    let female: Vec<&str> = lexicon.z().iter().map(String::as_str).collect();
    let male: Vec<&str> = lexicon.z_prime().iter().map(String::as_str).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let occupations: Vec<PlantedOccupation> = config
        .ratios
        .iter()
        .enumerate()
        .map(|(i, &female_ratio)| PlantedOccupation {
            word: OCCUPATION_NAMES[i].to_string(),
            female_ratio,
        })
        .collect();

    let mut sentences = Vec::new();
    for occ in &occupations {
        for _ in 0..config.sentences_per_occupation {
            let side = if rng.gen::<f64>() < occ.female_ratio {
                &female
            } else {
                &male
            };
            let g = side[rng.gen_range(0..side.len())];
            let g2 = side[rng.gen_range(0..side.len())];
            let f1 = FILLER[rng.gen_range(0..FILLER.len())];
            let f2 = FILLER[rng.gen_range(0..FILLER.len())];
            // two gendered tokens inside the window around the occupation
            let tokens = [
                "the", occ.word.as_str(), "met", g, "and", g2, f1, f2,
            ];
            sentences.push(tokens.iter().map(|t| t.to_string()).collect());
        }
    }
    for _ in 0..config.filler_sentences {
        let n = rng.gen_range(5..10);
        let sentence: Sentence = (0..n)
            .map(|_| FILLER[rng.gen_range(0..FILLER.len())].to_string())
            .collect();
        sentences.push(sentence);
    }

    // deterministic shuffle so occupations are interleaved
    for i in (1..sentences.len()).rev() {
        let j = rng.gen_range(0..=i);
        sentences.swap(i, j);
    }
    (sentences, occupations)
}
