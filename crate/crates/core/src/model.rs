//! Embedding model container shared by the two trainers, and its "embx" text
//! persistence format.

use std::io::{BufRead, Write};

use crate::corpus::Vocabulary;
use crate::{Error, Result};

pub const EMBX_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Sgns,
    Glove,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Sgns => "sgns",
            ModelKind::Glove => "glove",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<ModelKind> {
        match s {
            "sgns" => Ok(ModelKind::Sgns),
            "glove" => Ok(ModelKind::Glove),
            other => Err(Error::InvalidArgument(format!("unknown model tag {other:?}"))),
        }
    }
}

/// Word matrix `V`, context matrix `U`, and (for GloVe) the two bias vectors.
/// Rows are vocabulary indices; both matrices always have the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    kind: ModelKind,
    dim: usize,
    words: Vec<String>,
    v: Vec<f64>,
    u: Vec<f64>,
    b: Vec<f64>,
    b_tilde: Vec<f64>,
}

impl EmbeddingModel {
    pub fn zeros(kind: ModelKind, words: Vec<String>, dim: usize) -> EmbeddingModel {
        let n = words.len();
        let biases = if kind == ModelKind::Glove { n } else { 0 };
        EmbeddingModel {
            kind,
            dim,
            words,
            v: vec![0.0; n * dim],
            u: vec![0.0; n * dim],
            b: vec![0.0; biases],
            b_tilde: vec![0.0; biases],
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_len(&self) -> usize {
        self.words.len()
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.words.iter().position(|w| w == word)
    }

    pub fn v_row(&self, w: usize) -> &[f64] {
        &self.v[w * self.dim..(w + 1) * self.dim]
    }

    pub fn u_row(&self, c: usize) -> &[f64] {
        &self.u[c * self.dim..(c + 1) * self.dim]
    }

    pub fn v_row_mut(&mut self, w: usize) -> &mut [f64] {
        &mut self.v[w * self.dim..(w + 1) * self.dim]
    }

    pub fn u_row_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.u[c * self.dim..(c + 1) * self.dim]
    }

    pub fn has_biases(&self) -> bool {
        !self.b.is_empty()
    }

    pub fn bias(&self, w: usize) -> f64 {
        self.b[w]
    }

    pub fn bias_mut(&mut self, w: usize) -> &mut f64 {
        &mut self.b[w]
    }

    pub fn context_bias(&self, c: usize) -> f64 {
        self.b_tilde[c]
    }

    pub fn context_bias_mut(&mut self, c: usize) -> &mut f64 {
        &mut self.b_tilde[c]
    }

    /// `v_w . u_c`
    pub fn score(&self, w: usize, c: usize) -> f64 {
        dot(self.v_row(w), self.u_row(c))
    }

    /// Flat `V` and `U` buffers, row-major. The trainers update through these.
    pub fn raw_buffers_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.v, &mut self.u)
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().all(|x| x.is_finite())
            && self.u.iter().all(|x| x.is_finite())
            && self.b.iter().all(|x| x.is_finite())
            && self.b_tilde.iter().all(|x| x.is_finite())
    }

    /// Header `embx <version> <|W|> <d> <tag>`, then one line per word with
    /// the V row, the U row, and for GloVe the two biases. Values print in
    /// shortest round-trip form, so save/load is bit-exact. A trailing
    /// `config=<hash>` token on the header is accepted and preserved by the
    /// pipeline.
    pub fn write_embx<W: Write>(&self, mut out: W, config_tag: Option<&str>) -> Result<()> {
        write!(
            out,
            "embx {} {} {} {}",
            EMBX_VERSION,
            self.vocab_len(),
            self.dim,
            self.kind.as_str()
        )?;
        match config_tag {
            Some(tag) => writeln!(out, " config={tag}")?,
            None => writeln!(out)?,
        }
        for w in 0..self.vocab_len() {
            write!(out, "{}", self.words[w])?;
            for x in self.v_row(w) {
                write!(out, " {x}")?;
            }
            for x in self.u_row(w) {
                write!(out, " {x}")?;
            }
            if self.has_biases() {
                write!(out, " {} {}", self.b[w], self.b_tilde[w])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn read_embx<R: BufRead>(input: R) -> Result<EmbeddingModel> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| embx_err(1, "empty file"))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() < 5 || fields[0] != "embx" {
            return Err(embx_err(1, "expected `embx <version> <|W|> <d> <tag>`"));
        }
        let version: u32 = fields[1].parse().map_err(|_| embx_err(1, "bad version"))?;
        if version != EMBX_VERSION {
            return Err(embx_err(1, "unsupported version"));
        }
        let n: usize = fields[2].parse().map_err(|_| embx_err(1, "bad vocab size"))?;
        let dim: usize = fields[3].parse().map_err(|_| embx_err(1, "bad dimension"))?;
        let kind: ModelKind = fields[4].parse()?;

        let mut model = EmbeddingModel::zeros(kind, vec![String::new(); n], dim);
        let per_row = 1 + 2 * dim + if kind == ModelKind::Glove { 2 } else { 0 };
        for (w, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            if w >= n {
                return Err(embx_err(w + 2, "more rows than the header declares"));
            }
            let fields: Vec<&str> = line.split(' ').collect();
            if fields.len() != per_row {
                return Err(embx_err(w + 2, "wrong field count"));
            }
            model.words[w] = fields[0].to_string();
            for d in 0..dim {
                model.v[w * dim + d] = parse_f64(fields[1 + d], w + 2)?;
                model.u[w * dim + d] = parse_f64(fields[1 + dim + d], w + 2)?;
            }
            if kind == ModelKind::Glove {
                model.b[w] = parse_f64(fields[1 + 2 * dim], w + 2)?;
                model.b_tilde[w] = parse_f64(fields[2 + 2 * dim], w + 2)?;
            }
        }
        if model.words.iter().any(String::is_empty) {
            return Err(embx_err(n + 1, "fewer rows than the header declares"));
        }
        Ok(model)
    }

    /// Checks that the model rows line up with a vocabulary.
    pub fn check_vocab(&self, vocab: &Vocabulary) -> Result<()> {
        if self.vocab_len() != vocab.len()
            || (0..vocab.len()).any(|i| self.word(i) != vocab.word(i))
        {
            return Err(Error::InvalidArgument(
                "model words do not match the vocabulary".into(),
            ));
        }
        Ok(())
    }
}

fn embx_err(line: usize, message: &str) -> Error {
    Error::Parse {
        path: "embx".into(),
        line,
        message: message.into(),
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse().map_err(|_| embx_err(line, "bad float"))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Row access shared by low-dimensional embeddings and explicit
/// (vocabulary-dimensional) representations, so the second-order measures
/// work on either.
pub trait WordVectors {
    fn vocab_len(&self) -> usize;
    fn vector_dim(&self) -> usize;
    fn index_of(&self, word: &str) -> Option<usize>;
    fn word(&self, idx: usize) -> &str;
    fn vector(&self, w: usize) -> Vec<f64>;
}

impl WordVectors for EmbeddingModel {
    fn vocab_len(&self) -> usize {
        self.words.len()
    }

    fn vector_dim(&self) -> usize {
        self.dim
    }

    fn index_of(&self, word: &str) -> Option<usize> {
        EmbeddingModel::index_of(self, word)
    }

    fn word(&self, idx: usize) -> &str {
        EmbeddingModel::word(self, idx)
    }

    fn vector(&self, w: usize) -> Vec<f64> {
        self.v_row(w).to_vec()
    }
}
