//! Symmetric windowed co-occurrence counting over tokenized sentences, plus
//! the smoothed context distribution used by PPMI and negative sampling.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::corpus::{Sentence, Vocabulary};
use crate::{Error, Result};

/// Sparse word-by-context co-occurrence counts `#<w,c>` with marginals.
///
/// Contexts are vocabulary words, so the matrix is square. Zero cells are
/// never stored.
#[derive(Debug, Clone)]
pub struct CoocMatrix {
    rows: Vec<HashMap<usize, u64>>,
    word_marginals: Vec<u64>,
    context_marginals: Vec<u64>,
    grand_total: u64,
    window: usize,
}

impl CoocMatrix {
    pub fn vocab_len(&self) -> usize {
        self.rows.len()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// `#<w,c>`; zero when unstored.
    pub fn count(&self, word: usize, context: usize) -> u64 {
        self.rows[word].get(&context).copied().unwrap_or(0)
    }

    pub fn row(&self, word: usize) -> &HashMap<usize, u64> {
        &self.rows[word]
    }

    /// `#<w,.>`
    pub fn word_marginal(&self, word: usize) -> u64 {
        self.word_marginals[word]
    }

    /// `#<.,c>`
    pub fn context_marginal(&self, context: usize) -> u64 {
        self.context_marginals[context]
    }

    pub fn context_marginals(&self) -> &[u64] {
        &self.context_marginals
    }

    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }

    pub fn is_empty(&self) -> bool {
        self.grand_total == 0
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(HashMap::len).sum()
    }

    /// Stored cells in `(word, context)` order. Deterministic.
    pub fn sorted_cells(&self) -> Vec<(usize, usize, u64)> {
        let mut cells: Vec<(usize, usize, u64)> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(w, row)| row.iter().map(move |(&c, &n)| (w, c, n)))
            .collect();
        cells.sort_unstable_by_key(|&(w, c, _)| (w, c));
        cells
    }

    /// TSV persistence: a header with the window and totals, then
    /// `word<TAB>context<TAB>count` triples in index order.
    pub fn write_tsv<W: Write>(&self, vocab: &Vocabulary, mut out: W) -> Result<()> {
        writeln!(
            out,
            "#cooc\twindow={}\ttotal={}\tvocab={}",
            self.window,
            self.grand_total,
            self.vocab_len()
        )?;
        for (w, c, n) in self.sorted_cells() {
            writeln!(out, "{}\t{}\t{}", vocab.word(w), vocab.word(c), n)?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(input: R, vocab: &Vocabulary) -> Result<CoocMatrix> {
        let mut window = 0usize;
        let mut rows = vec![HashMap::new(); vocab.len()];
        let mut builder = MarginalBuilder::new(vocab.len());
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#cooc\t") {
                for field in rest.split('\t') {
                    if let Some(v) = field.strip_prefix("window=") {
                        window = v.parse().map_err(|_| parse_err(i, "bad window"))?;
                    }
                }
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let (word, context, count) = match (fields.next(), fields.next(), fields.next()) {
                (Some(w), Some(c), Some(n)) => (w, c, n),
                _ => return Err(parse_err(i, "expected word<TAB>context<TAB>count")),
            };
            let w = vocab
                .index_of(word)
                .ok_or_else(|| parse_err(i, "word not in vocabulary"))?;
            let c = vocab
                .index_of(context)
                .ok_or_else(|| parse_err(i, "context not in vocabulary"))?;
            let n: u64 = count.parse().map_err(|_| parse_err(i, "bad count"))?;
            rows[w].insert(c, n);
            builder.add(w, c, n);
        }
        Ok(builder.finish(rows, window))
    }
}

fn parse_err(line_idx: usize, message: &str) -> Error {
    Error::Parse {
        path: "cooc".into(),
        line: line_idx + 1,
        message: message.into(),
    }
}

struct MarginalBuilder {
    word_marginals: Vec<u64>,
    context_marginals: Vec<u64>,
    grand_total: u64,
}

impl MarginalBuilder {
    fn new(len: usize) -> Self {
        MarginalBuilder {
            word_marginals: vec![0; len],
            context_marginals: vec![0; len],
            grand_total: 0,
        }
    }

    fn add(&mut self, w: usize, c: usize, n: u64) {
        self.word_marginals[w] += n;
        self.context_marginals[c] += n;
        self.grand_total += n;
    }

    fn finish(self, rows: Vec<HashMap<usize, u64>>, window: usize) -> CoocMatrix {
        CoocMatrix {
            rows,
            word_marginals: self.word_marginals,
            context_marginals: self.context_marginals,
            grand_total: self.grand_total,
            window,
        }
    }
}

/// Counts symmetric-window co-occurrences. Out-of-vocabulary tokens are
/// removed first (the remaining positions close ranks), and windows never
/// cross sentence boundaries. Every ordered pair within the window distance
/// contributes one count, so the matrix is exactly symmetric.
pub fn count_cooc(sentences: &[Sentence], vocab: &Vocabulary, window: usize) -> CoocMatrix {
    count_cooc_threaded(sentences, vocab, window, 1)
}

/// Sharded variant: splits the sentence list across `threads` workers and
/// merges the partial sparse maps. The merge is associative, so the result is
/// identical to the single-threaded count.
pub fn count_cooc_threaded(
    sentences: &[Sentence],
    vocab: &Vocabulary,
    window: usize,
    threads: usize,
) -> CoocMatrix {
    assert!(window >= 1, "window must be at least 1");
    let threads = threads.max(1).min(sentences.len().max(1));
    let chunk = sentences.len().div_ceil(threads.max(1)).max(1);

    let mut partials: Vec<Vec<HashMap<usize, u64>>> = if threads <= 1 {
        vec![count_shard(sentences, vocab, window)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = sentences
                .chunks(chunk)
                .map(|shard| scope.spawn(move || count_shard(shard, vocab, window)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    };

    let mut rows = partials.pop().unwrap_or_else(|| vec![HashMap::new(); vocab.len()]);
    for partial in partials {
        for (row, other) in rows.iter_mut().zip(partial) {
            for (c, n) in other {
                *row.entry(c).or_insert(0) += n;
            }
        }
    }

    let mut builder = MarginalBuilder::new(vocab.len());
    for (w, row) in rows.iter().enumerate() {
        for (&c, &n) in row {
            builder.add(w, c, n);
        }
    }
    builder.finish(rows, window)
}

fn count_shard(
    sentences: &[Sentence],
    vocab: &Vocabulary,
    window: usize,
) -> Vec<HashMap<usize, u64>> {
    let mut rows = vec![HashMap::new(); vocab.len()];
    let mut ids = Vec::new();
    for sentence in sentences {
        ids.clear();
        ids.extend(sentence.iter().filter_map(|t| vocab.index_of(t)));
        for i in 0..ids.len() {
            let hi = (i + window).min(ids.len() - 1);
            for j in (i + 1)..=hi {
                *rows[ids[i]].entry(ids[j]).or_insert(0) += 1;
                *rows[ids[j]].entry(ids[i]).or_insert(0) += 1;
            }
        }
    }
    rows
}

/// Context distribution with smoothing exponent `alpha`:
/// `p_a(c) = #<.,c>^a / sum_c' #<.,c'>^a`.
pub fn smoothed_context_dist(matrix: &CoocMatrix, alpha: f64) -> Result<Vec<f64>> {
    assert!(alpha > 0.0 && alpha <= 1.0, "alpha must be in (0, 1]");
    if matrix.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    smooth_counts(matrix.context_marginals(), alpha)
}

/// Normalized `counts^alpha`; shared by context-distribution smoothing and
/// the negative-sampling noise table.
pub fn smooth_counts(counts: &[u64], alpha: f64) -> Result<Vec<f64>> {
    assert!(alpha >= 0.0, "exponent must be non-negative");
    let powered: Vec<f64> = counts.iter().map(|&n| (n as f64).powf(alpha)).collect();
    let norm: f64 = powered.iter().sum();
    if norm <= 0.0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(powered.into_iter().map(|p| p / norm).collect())
}
