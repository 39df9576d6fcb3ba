//! Corpus ingestion: tokenization, vocabulary construction, frequent-word
//! subsampling and counterfactual (gender-swap) augmentation.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// One input line, normalized to lowercase alphabetic tokens.
pub type Sentence = Vec<String>;

/// Lowercases, strips digits and punctuation (the characters are deleted, not
/// replaced by spaces), and splits the remainder on whitespace. One sentence
/// per input line; empty lines yield no sentence.
pub fn tokenize_normalize<R: BufRead>(input: R) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    for (i, line) in input.split(b'\n').enumerate() {
        let raw = line?;
        let text = std::str::from_utf8(&raw).map_err(|_| Error::InputEncoding { line: i + 1 })?;
        let tokens = tokenize_line(text);
        if !tokens.is_empty() {
            sentences.push(tokens);
        }
    }
    Ok(sentences)
}

/// Normalizes a single line. Pure per-line map, shared by [`tokenize_normalize`].
pub fn tokenize_line(line: &str) -> Sentence {
    line.to_lowercase()
        .split_whitespace()
        .filter_map(|word| {
            let token: String = word.chars().filter(|c| c.is_alphabetic()).collect();
            if token.is_empty() {
                None
            } else {
                Some(token)
            }
        })
        .collect()
}

/// Word ↔ index map with raw (pre-filter) frequencies.
///
/// Indices are dense `0..len()` and ordered by descending raw count with
/// lexicographic tie-break, so identical input always yields identical indices.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total: u64,
    min_count: u64,
}

impl Vocabulary {
    /// Counts tokens and keeps the words with raw frequency `>= min_count`.
    /// `total` keeps counting every token, including filtered ones.
    pub fn build(sentences: &[Sentence], min_count: u64) -> Result<Vocabulary> {
        let mut raw: HashMap<&str, u64> = HashMap::new();
        let mut total = 0u64;
        for sentence in sentences {
            for token in sentence {
                *raw.entry(token.as_str()).or_insert(0) += 1;
                total += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> = raw
            .into_iter()
            .filter(|&(_, count)| count >= min_count)
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        let words: Vec<String> = kept.iter().map(|(w, _)| w.to_string()).collect();
        let counts: Vec<u64> = kept.iter().map(|&(_, c)| c).collect();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(Vocabulary {
            words,
            counts,
            index,
            total,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    /// Total tokens seen before frequency filtering.
    pub fn total_tokens(&self) -> u64 {
        self.total
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Corpus fraction of the word at `idx`.
    pub fn frequency(&self, idx: usize) -> f64 {
        self.counts[idx] as f64 / self.total as f64
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// TSV `word<TAB>count` in index order, with a header recording the
    /// pre-filter total and the frequency floor.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "#vocab\ttotal={}\tmin_count={}", self.total, self.min_count)?;
        for (word, count) in self.words.iter().zip(&self.counts) {
            writeln!(out, "{word}\t{count}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(input: R) -> Result<Vocabulary> {
        let mut words = Vec::new();
        let mut counts = Vec::new();
        let mut total = 0u64;
        let mut min_count = 1u64;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#vocab\t") {
                for field in rest.split('\t') {
                    if let Some(v) = field.strip_prefix("total=") {
                        total = parse_field(v, "vocab", i + 1)?;
                    } else if let Some(v) = field.strip_prefix("min_count=") {
                        min_count = parse_field(v, "vocab", i + 1)?;
                    }
                }
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let (word, count) = line.split_once('\t').ok_or_else(|| Error::Parse {
                path: "vocab".into(),
                line: i + 1,
                message: "expected word<TAB>count".into(),
            })?;
            words.push(word.to_string());
            counts.push(parse_field(count, "vocab", i + 1)?);
        }
        if words.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if total == 0 {
            total = counts.iter().sum();
        }
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(Vocabulary {
            words,
            counts,
            index,
            total,
            min_count,
        })
    }
}

fn parse_field<T: std::str::FromStr>(value: &str, path: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        path: path.into(),
        line,
        message: format!("invalid number {value:?}"),
    })
}

/// Keep probability for a word with corpus fraction `z` under threshold `t`:
/// `min(1, (sqrt(z/t) + 1) * t/z)`.
pub fn keep_probability(z: f64, sample_t: f64) -> f64 {
    (((z / sample_t).sqrt() + 1.0) * sample_t / z).min(1.0)
}

/// Randomly drops frequent in-vocabulary tokens. Out-of-vocabulary tokens are
/// dropped unconditionally first. `sample_t = 0` disables subsampling.
///
/// Each line draws from its own seeded generator, so the result does not
/// depend on how lines are partitioned across workers.
pub fn subsample(
    sentences: &[Sentence],
    vocab: &Vocabulary,
    sample_t: f64,
    seed: u64,
) -> Vec<Sentence> {
    sentences
        .iter()
        .enumerate()
        .filter_map(|(i, sentence)| {
            let mut rng = line_rng(seed, i as u64);
            let kept: Sentence = sentence
                .iter()
                .filter(|token| match vocab.index_of(token) {
                    None => false,
                    Some(idx) => {
                        if sample_t <= 0.0 {
                            return true;
                        }
                        let z = vocab.frequency(idx);
                        let p = keep_probability(z, sample_t);
                        p >= 1.0 || rng.gen::<f64>() < p
                    }
                })
                .cloned()
                .collect();
            if kept.is_empty() {
                None
            } else {
                Some(kept)
            }
        })
        .collect()
}

fn line_rng(seed: u64, line: u64) -> ChaCha8Rng {
    // splitmix64 of the line index, folded into the run seed
    let mut x = line.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(seed ^ (x ^ (x >> 31)))
}

/// Definitional word sets for a concept `Z` and its counterpart `Z'`, with an
/// ordered pair list linking them.
#[derive(Debug, Clone)]
pub struct ConceptLexicon {
    z: Vec<String>,
    z_prime: Vec<String>,
    pairs: Vec<(String, String)>,
}

impl ConceptLexicon {
    /// Validates set disjointness, uniqueness within each set, and that every
    /// pair references words from the sets.
    pub fn new(
        z: Vec<String>,
        z_prime: Vec<String>,
        pairs: Vec<(String, String)>,
    ) -> Result<ConceptLexicon> {
        for (set, name) in [(&z, "Z"), (&z_prime, "Z'")] {
            if set.is_empty() {
                return Err(Error::EmptySet { set: name.into() });
            }
            let mut seen = std::collections::HashSet::new();
            for word in set {
                if !seen.insert(word) {
                    return Err(Error::InvalidArgument(format!(
                        "duplicate word {word:?} in set {name}"
                    )));
                }
            }
        }
        if z.iter().any(|w| z_prime.contains(w)) {
            return Err(Error::InvalidArgument(
                "Z and Z' must be disjoint".to_string(),
            ));
        }
        for (x, x_prime) in &pairs {
            if !z.contains(x) || !z_prime.contains(x_prime) {
                return Err(Error::InvalidArgument(format!(
                    "pair ({x}, {x_prime}) references words outside the sets"
                )));
            }
        }
        Ok(ConceptLexicon { z, z_prime, pairs })
    }

    /// Builds a lexicon whose sets are exactly the (deduplicated) sides of the
    /// pair list.
    pub fn from_pairs(pairs: Vec<(String, String)>) -> Result<ConceptLexicon> {
        let mut z = Vec::new();
        let mut z_prime = Vec::new();
        for (x, x_prime) in &pairs {
            if !z.contains(x) {
                z.push(x.clone());
            }
            if !z_prime.contains(x_prime) {
                z_prime.push(x_prime.clone());
            }
        }
        ConceptLexicon::new(z, z_prime, pairs)
    }

    pub fn z(&self) -> &[String] {
        &self.z
    }

    pub fn z_prime(&self) -> &[String] {
        &self.z_prime
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn contains(&self, word: &str) -> bool {
        self.z.iter().any(|w| w == word) || self.z_prime.iter().any(|w| w == word)
    }

    /// Token swap map induced by the pairs, both directions. When a token
    /// appears in several pairs the first-listed pair wins.
    pub fn swap_map(&self) -> HashMap<&str, &str> {
        let mut map: HashMap<&str, &str> = HashMap::new();
        for (x, x_prime) in &self.pairs {
            map.entry(x.as_str()).or_insert(x_prime.as_str());
            map.entry(x_prime.as_str()).or_insert(x.as_str());
        }
        map
    }
}

/// Loads one word per line, ignoring blank lines.
pub fn read_word_list<R: BufRead>(input: R) -> Result<Vec<String>> {
    let mut words = Vec::new();
    for line in input.lines() {
        let line = line?;
        let word = line.trim();
        if !word.is_empty() {
            words.push(word.to_string());
        }
    }
    Ok(words)
}

/// Loads a two-column TSV pair file (`x<TAB>x'`).
pub fn read_pair_list<R: BufRead>(input: R, path: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (x, x_prime) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: path.into(),
            line: i + 1,
            message: "expected x<TAB>x'".into(),
        })?;
        pairs.push((x.trim().to_string(), x_prime.trim().to_string()));
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentMode {
    /// Append a uniformly random half of the swapped sentences.
    Half,
    /// Append every swapped sentence; exactly doubles the corpus.
    Full,
}

/// Counterfactual augmentation: appends gender-swapped copies of the input
/// sentences. Every token belonging to a pair is replaced by its counterpart;
/// all other tokens pass through unchanged.
pub fn cda_augment(
    sentences: &[Sentence],
    lexicon: &ConceptLexicon,
    mode: AugmentMode,
    seed: u64,
) -> Vec<Sentence> {
    let swap = lexicon.swap_map();
    let swapped: Vec<Sentence> = sentences
        .iter()
        .map(|sentence| swap_sentence(sentence, &swap))
        .collect();

    let mut out = sentences.to_vec();
    match mode {
        AugmentMode::Full => out.extend(swapped),
        AugmentMode::Half => {
            let mut indices: Vec<usize> = (0..swapped.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Fisher-Yates, then keep the first half in corpus order.
            for i in (1..indices.len()).rev() {
                let j = rng.gen_range(0..=i);
                indices.swap(i, j);
            }
            let mut picked: Vec<usize> = indices[..swapped.len() / 2].to_vec();
            picked.sort_unstable();
            out.extend(picked.into_iter().map(|i| swapped[i].clone()));
        }
    }
    out
}

pub fn swap_sentence(sentence: &Sentence, swap: &HashMap<&str, &str>) -> Sentence {
    sentence
        .iter()
        .map(|token| match swap.get(token.as_str()) {
            Some(counterpart) => counterpart.to_string(),
            None => token.clone(),
        })
        .collect()
}
