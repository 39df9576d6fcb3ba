//! Bias measures over word representations: the principal-direction measure,
//! the centroid measure, and the association-mean measures (second-order over
//! vectors, first-order over explicit co-occurrence views), plus thresholding
//! and classification.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::ConceptLexicon;
use crate::explicit::ExplicitView;
use crate::model::{dot, norm, WordVectors};
use crate::{Error, Result};

/// Cosine similarity; undefined for zero vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(dot(a, b) / (na * nb))
}

/// A lexicon resolved against a representation's vocabulary. Definitional
/// words that are missing get dropped (with a warning) and the set sizes
/// shrink accordingly.
pub struct ResolvedLexicon {
    pub z: Vec<usize>,
    pub z_prime: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
}

impl ResolvedLexicon {
    pub fn resolve<V: WordVectors + ?Sized>(
        lexicon: &ConceptLexicon,
        vectors: &V,
    ) -> Result<ResolvedLexicon> {
        let lookup = |words: &[String], set: &str| -> Vec<usize> {
            words
                .iter()
                .filter_map(|w| {
                    let idx = vectors.index_of(w);
                    if idx.is_none() {
                        log::warn!("definitional word {w:?} not in vocabulary; dropped from {set}");
                    }
                    idx
                })
                .collect()
        };
        let z = lookup(lexicon.z(), "Z");
        let z_prime = lookup(lexicon.z_prime(), "Z'");
        if z.is_empty() {
            return Err(Error::EmptySet { set: "Z".into() });
        }
        if z_prime.is_empty() {
            return Err(Error::EmptySet { set: "Z'".into() });
        }
        let pairs = lexicon
            .pairs()
            .iter()
            .filter_map(|(x, x_prime)| {
                Some((vectors.index_of(x)?, vectors.index_of(x_prime)?))
            })
            .collect();
        Ok(ResolvedLexicon { z, z_prime, pairs })
    }

    /// Z and Z' swapped; pair sides flip too.
    pub fn swapped(&self) -> ResolvedLexicon {
        ResolvedLexicon {
            z: self.z_prime.clone(),
            z_prime: self.z.clone(),
            pairs: self.pairs.iter().map(|&(x, xp)| (xp, x)).collect(),
        }
    }
}

/// The principal direction of the pair difference vectors, unit length, with
/// the sign fixed so that the mean projection of the differences is
/// non-negative (ties broken by the first nonzero coordinate being positive).
pub struct DirectionalAxis {
    direction: Vec<f64>,
}

impl DirectionalAxis {
    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    /// Builds the difference matrix `D` (one row `v_x - v_x'` per pair) and
    /// extracts its first right singular vector by power iteration on the
    /// smaller Gram matrix, to relative tolerance 1e-10. `D` is deliberately
    /// not centered: consistent differences share a mean direction.
    pub fn fit<V: WordVectors + ?Sized>(
        vectors: &V,
        lexicon: &ResolvedLexicon,
    ) -> Result<DirectionalAxis> {
        if lexicon.pairs.is_empty() {
            return Err(Error::InsufficientData {
                reason: "no resolvable pairs for the directional axis".into(),
            });
        }
        let rows: Vec<Vec<f64>> = lexicon
            .pairs
            .iter()
            .map(|&(x, x_prime)| {
                let a = vectors.vector(x);
                let b = vectors.vector(x_prime);
                a.iter().zip(&b).map(|(p, q)| p - q).collect()
            })
            .collect();
        let direction = dominant_right_singular(&rows)?;
        Ok(DirectionalAxis {
            direction: fix_sign(direction, &rows),
        })
    }
}

/// First right singular vector of the row matrix, via power iteration on
/// whichever Gram matrix (D^T D or D D^T) is smaller.
fn dominant_right_singular(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = rows.len();
    let d = rows[0].len();
    if rows.iter().all(|r| r.iter().all(|&x| x == 0.0)) {
        return Err(Error::DegenerateAxis);
    }
    if d <= m {
        // gram[i][j] = sum_k D[k][i] * D[k][j]
        let mut gram = vec![vec![0.0; d]; d];
        for row in rows {
            for i in 0..d {
                if row[i] == 0.0 {
                    continue;
                }
                for j in 0..d {
                    gram[i][j] += row[i] * row[j];
                }
            }
        }
        power_iteration(&gram)
    } else {
        // iterate on the m x m Gram of rows, then map back through D^T
        let mut gram = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                gram[i][j] = dot(&rows[i], &rows[j]);
            }
        }
        let left = power_iteration(&gram)?;
        let mut v = vec![0.0; d];
        for (k, row) in rows.iter().enumerate() {
            for (vi, &x) in v.iter_mut().zip(row) {
                *vi += left[k] * x;
            }
        }
        let n = norm(&v);
        if n == 0.0 {
            return Err(Error::DegenerateAxis);
        }
        Ok(v.into_iter().map(|x| x / n).collect())
    }
}

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 100_000;

/// Dominant eigenvector of a symmetric PSD matrix.
fn power_iteration(gram: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = gram.len();
    // deterministic start: the column with the largest norm
    let start = (0..n)
        .max_by(|&a, &b| {
            let na: f64 = gram.iter().map(|r| r[a] * r[a]).sum();
            let nb: f64 = gram.iter().map(|r| r[b] * r[b]).sum();
            na.partial_cmp(&nb).unwrap()
        })
        .unwrap();
    let mut v: Vec<f64> = gram.iter().map(|r| r[start]).collect();
    let mut n0 = norm(&v);
    if n0 == 0.0 {
        // fall back to a basis vector; the matrix is nonzero by precondition
        v = vec![0.0; n];
        v[start] = 1.0;
        n0 = 1.0;
    }
    for x in v.iter_mut() {
        *x /= n0;
    }

    for _ in 0..POWER_MAX_ITERS {
        let mut next: Vec<f64> = gram.iter().map(|row| dot(row, &v)).collect();
        let nn = norm(&next);
        if nn == 0.0 {
            return Err(Error::DegenerateAxis);
        }
        for x in next.iter_mut() {
            *x /= nn;
        }
        let delta: f64 = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        v = next;
        if delta < POWER_TOL {
            break;
        }
    }
    Ok(v)
}

fn fix_sign(mut direction: Vec<f64>, rows: &[Vec<f64>]) -> Vec<f64> {
    let mean_projection: f64 =
        rows.iter().map(|r| dot(r, &direction)).sum::<f64>() / rows.len() as f64;
    let flip = if mean_projection == 0.0 {
        match direction.iter().find(|&&x| x != 0.0) {
            Some(&first) => first < 0.0,
            None => false,
        }
    } else {
        mean_projection < 0.0
    };
    if flip {
        for x in direction.iter_mut() {
            *x = -*x;
        }
    }
    direction
}

/// Projection of the (unnormalized) word vector on the unit axis. Leaving the
/// word vector unnormalized avoids overestimating weakly represented words.
pub fn bias_directional(axis: &DirectionalAxis, v_w: &[f64]) -> f64 {
    dot(&axis.direction, v_w)
}

/// Difference of the cosines to the two set centroids.
pub fn centroid_bias<V: WordVectors + ?Sized>(
    vectors: &V,
    lexicon: &ResolvedLexicon,
    v_w: &[f64],
) -> Result<f64> {
    let centroid = |set: &[usize], name: &str| -> Result<Vec<f64>> {
        let mut mean = vec![0.0; vectors.vector_dim()];
        for &x in set {
            for (m, val) in mean.iter_mut().zip(vectors.vector(x)) {
                *m += val;
            }
        }
        for m in mean.iter_mut() {
            *m /= set.len() as f64;
        }
        if norm(&mean) == 0.0 {
            return Err(Error::ZeroCentroid { set: name.into() });
        }
        Ok(mean)
    };
    let v_z = centroid(&lexicon.z, "Z")?;
    let v_zp = centroid(&lexicon.z_prime, "Z'")?;
    Ok(cosine(&v_z, v_w)? - cosine(&v_zp, v_w)?)
}

/// Mean cosine of `w` to a definitional set.
pub fn weam2nd<V: WordVectors + ?Sized>(vectors: &V, w: usize, set: &[usize]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet { set: "S".into() });
    }
    let v_w = vectors.vector(w);
    let mut sum = 0.0;
    for &x in set {
        sum += cosine(&vectors.vector(x), &v_w)?;
    }
    Ok(sum / set.len() as f64)
}

pub fn bias_weam2nd<V: WordVectors + ?Sized>(
    vectors: &V,
    lexicon: &ResolvedLexicon,
    w: usize,
) -> Result<f64> {
    Ok(weam2nd(vectors, w, &lexicon.z)? - weam2nd(vectors, w, &lexicon.z_prime)?)
}

/// Mean explicit co-occurrence value of `w` with a definitional set.
pub fn weam1st(view: &ExplicitView, w: usize, set: &[usize]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet { set: "S".into() });
    }
    let mut sum = 0.0;
    for &c in set {
        sum += view.try_value(w, c)?;
    }
    Ok(sum / set.len() as f64)
}

pub fn bias_weam1st(view: &ExplicitView, lexicon: &ResolvedLexicon, w: usize) -> Result<f64> {
    Ok(weam1st(view, w, &lexicon.z)? - weam1st(view, w, &lexicon.z_prime)?)
}

/// Threshold separating biased from unbiased words: the mean absolute bias
/// over the supplied values (most sampled words are assumed unbiased, so
/// their mean magnitude marks the noise floor).
pub fn bias_threshold(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasLabel {
    ZBiased,
    ZPrimeBiased,
    Unbiased,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRecord {
    pub word: String,
    /// Signed bias; positive means biased toward Z. On the normalized scale
    /// when the report was min-max normalized.
    pub psi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assoc_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assoc_z_prime: Option<f64>,
    pub label: BiasLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub method: String,
    pub representation: String,
    pub tau: f64,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    pub records: Vec<BiasRecord>,
}

impl BiasReport {
    pub fn label_for(tau: f64, psi: f64) -> BiasLabel {
        if psi.abs() < tau {
            BiasLabel::Unbiased
        } else if psi > 0.0 {
            BiasLabel::ZBiased
        } else {
            BiasLabel::ZPrimeBiased
        }
    }
}

/// Raw associations of every pooled word to Z and Z'.
pub struct AssociationTable {
    pub words: Vec<String>,
    pub to_z: Vec<f64>,
    pub to_z_prime: Vec<f64>,
}

/// How the classification threshold is chosen.
pub enum TauPolicy {
    /// Mean absolute normalized bias over the pooled words.
    MeanAbs,
    Fixed(f64),
}

/// Min-max normalizes the pooled associations (both concepts pooled together,
/// as in the published scatter construction), derives the normalized bias
/// `psi = assoc_z - assoc_z'`, and labels the requested words against the
/// threshold. The pool should usually be the whole vocabulary.
pub fn normalize_and_classify(
    table: &AssociationTable,
    words: &[String],
    tau: TauPolicy,
    method: &str,
    representation: &str,
) -> Result<BiasReport> {
    let pooled_min = table
        .to_z
        .iter()
        .chain(&table.to_z_prime)
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let pooled_max = table
        .to_z
        .iter()
        .chain(&table.to_z_prime)
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(pooled_min < pooled_max) {
        return Err(Error::DegenerateNormalization);
    }
    let scale = pooled_max - pooled_min;
    let normalize = |a: f64| (a - pooled_min) / scale;

    let index: BTreeMap<&str, usize> = table
        .words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();

    let psi_all: Vec<f64> = (0..table.words.len())
        .map(|i| normalize(table.to_z[i]) - normalize(table.to_z_prime[i]))
        .collect();
    let tau = match tau {
        TauPolicy::MeanAbs => bias_threshold(&psi_all)?,
        TauPolicy::Fixed(t) => t,
    };

    let mut records = Vec::with_capacity(words.len());
    for word in words {
        let Some(&i) = index.get(word.as_str()) else {
            log::warn!("word {word:?} has no measured association; skipped");
            continue;
        };
        let az = normalize(table.to_z[i]);
        let azp = normalize(table.to_z_prime[i]);
        let psi = az - azp;
        records.push(BiasRecord {
            word: word.clone(),
            psi,
            assoc_z: Some(az),
            assoc_z_prime: Some(azp),
            label: BiasReport::label_for(tau, psi),
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(BiasReport {
        method: method.to_string(),
        representation: representation.to_string(),
        tau,
        params: BTreeMap::new(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Plain in-memory vectors for measure tests.
    struct Table {
        words: Vec<String>,
        rows: Vec<Vec<f64>>,
    }

    impl Table {
        fn new(entries: &[(&str, Vec<f64>)]) -> Table {
            Table {
                words: entries.iter().map(|(w, _)| w.to_string()).collect(),
                rows: entries.iter().map(|(_, v)| v.clone()).collect(),
            }
        }
    }

    impl WordVectors for Table {
        fn vocab_len(&self) -> usize {
            self.words.len()
        }
        fn vector_dim(&self) -> usize {
            self.rows[0].len()
        }
        fn index_of(&self, word: &str) -> Option<usize> {
            self.words.iter().position(|w| w == word)
        }
        fn word(&self, idx: usize) -> &str {
            &self.words[idx]
        }
        fn vector(&self, w: usize) -> Vec<f64> {
            self.rows[w].clone()
        }
    }

    fn lexicon(z: &[&str], zp: &[&str], pairs: &[(&str, &str)]) -> ConceptLexicon {
        ConceptLexicon::new(
            z.iter().map(|s| s.to_string()).collect(),
            zp.iter().map(|s| s.to_string()).collect(),
            pairs
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((c - 0.70711).abs() < 1e-5);
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn axis_forced_direction() {
        let t = Table::new(&[
            ("x1", vec![3.0, 0.0, 0.0]),
            ("y1", vec![1.0, 0.0, 0.0]),
            ("x2", vec![2.5, 0.0, 0.0]),
            ("y2", vec![0.5, 0.0, 0.0]),
            ("w", vec![1.0, 1.0, 0.0]),
        ]);
        let lex = lexicon(&["x1", "x2"], &["y1", "y2"], &[("x1", "y1"), ("x2", "y2")]);
        let resolved = ResolvedLexicon::resolve(&lex, &t).unwrap();
        let axis = DirectionalAxis::fit(&t, &resolved).unwrap();
        assert!((axis.direction()[0] - 1.0).abs() < 1e-10);
        assert!(axis.direction()[1].abs() < 1e-10);
        assert!(axis.direction()[2].abs() < 1e-10);
    }

    #[test]
    fn axis_matches_closed_form_two_by_two() {
        // rows (2, 0) and (2, 0.2): dominant eigenvector of D^T D
        let t = Table::new(&[
            ("x1", vec![2.0, 0.0]),
            ("y1", vec![0.0, 0.0]),
            ("x2", vec![2.0, 0.2]),
            ("y2", vec![0.0, 0.0]),
        ]);
        let lex = lexicon(&["x1", "x2"], &["y1", "y2"], &[("x1", "y1"), ("x2", "y2")]);
        let resolved = ResolvedLexicon::resolve(&lex, &t).unwrap();
        let axis = DirectionalAxis::fit(&t, &resolved).unwrap();

        // closed form for the symmetric 2x2 gram [[8, 0.4], [0.4, 0.04]]
        let (a, b, c) = (8.0f64, 0.4f64, 0.04f64);
        let lambda = ((a + c) + ((a - c) * (a - c) + 4.0 * b * b).sqrt()) / 2.0;
        let v = [b, lambda - a];
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let expected = [v[0] / n, v[1] / n];
        let got = axis.direction();
        let sign = if got[0] * expected[0] < 0.0 { -1.0 } else { 1.0 };
        assert!((got[0] - sign * expected[0]).abs() < 1e-8);
        assert!((got[1] - sign * expected[1]).abs() < 1e-8);
    }

    #[test]
    fn axis_flips_sign_when_sets_swap() {
        let t = Table::new(&[
            ("x1", vec![1.0, 2.0, -0.5]),
            ("y1", vec![0.0, 1.0, 0.5]),
            ("x2", vec![0.5, 1.5, 0.0]),
            ("y2", vec![-0.5, 0.25, 1.0]),
        ]);
        let lex = lexicon(&["x1", "x2"], &["y1", "y2"], &[("x1", "y1"), ("x2", "y2")]);
        let resolved = ResolvedLexicon::resolve(&lex, &t).unwrap();
        let axis = DirectionalAxis::fit(&t, &resolved).unwrap();
        let swapped = DirectionalAxis::fit(&t, &resolved.swapped()).unwrap();
        for (a, b) in axis.direction().iter().zip(swapped.direction()) {
            assert_eq!(*a, -b);
        }
    }

    #[test]
    fn axis_degenerate_when_all_differences_vanish() {
        let t = Table::new(&[("x1", vec![1.0, 2.0]), ("y1", vec![1.0, 2.0])]);
        let lex = lexicon(&["x1"], &["y1"], &[("x1", "y1")]);
        let resolved = ResolvedLexicon::resolve(&lex, &t).unwrap();
        assert!(matches!(
            DirectionalAxis::fit(&t, &resolved),
            Err(Error::DegenerateAxis)
        ));
    }

    #[test]
    fn directional_bias_examples() {
        let axis = DirectionalAxis {
            direction: vec![1.0, 0.0],
        };
        assert_eq!(bias_directional(&axis, &[0.0, 3.0]), 0.0);
        assert_eq!(bias_directional(&axis, &[1.0, 0.0]), 1.0);
        // linear in the norm of v_w: doubling the vector doubles the bias
        let v = [0.3, -0.8];
        let doubled = [0.6, -1.6];
        assert_eq!(
            2.0 * bias_directional(&axis, &v),
            bias_directional(&axis, &doubled)
        );
    }

    #[test]
    fn centroid_examples() {
        let t = Table::new(&[
            ("z1", vec![1.0, 0.0]),
            ("z2", vec![0.0, 1.0]),
            ("y1", vec![-1.0, 0.0]),
            ("w", vec![1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]),
        ]);
        let lex = lexicon(&["z1", "z2"], &["y1"], &[]);
        let resolved = ResolvedLexicon::resolve(&lex, &t).unwrap();
        let w = t.vector(t.index_of("w").unwrap());
        let psi = centroid_bias(&t, &resolved, &w).unwrap();
        assert!((psi - (1.0 + std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-10);
        assert!((psi - 1.70711).abs() < 1e-5);

        // symmetric centroids cancel
        let sym = Table::new(&[
            ("z1", vec![1.0, 1.0]),
            ("y1", vec![1.0, -1.0]),
            ("w", vec![1.0, 0.0]),
        ]);
        let lex = lexicon(&["z1"], &["y1"], &[]);
        let resolved = ResolvedLexicon::resolve(&lex, &sym).unwrap();
        let w = sym.vector(2);
        assert!(centroid_bias(&sym, &resolved, &w).unwrap().abs() < 1e-15);

        // simple unit case
        let unit = Table::new(&[
            ("z1", vec![1.0, 0.0]),
            ("y1", vec![0.0, 1.0]),
            ("w", vec![1.0, 0.0]),
        ]);
        let lex = lexicon(&["z1"], &["y1"], &[]);
        let resolved = ResolvedLexicon::resolve(&lex, &unit).unwrap();
        let w = unit.vector(2);
        assert!((centroid_bias(&unit, &resolved, &w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centroid_zero_errors() {
        let t = Table::new(&[
            ("z1", vec![1.0, 0.0]),
            ("z2", vec![-1.0, 0.0]),
            ("y1", vec![0.0, 1.0]),
            ("w", vec![1.0, 1.0]),
        ]);
        let lex = lexicon(&["z1", "z2"], &["y1"], &[]);
        let resolved = ResolvedLexicon::resolve(&lex, &t).unwrap();
        let w = t.vector(3);
        assert!(matches!(
            centroid_bias(&t, &resolved, &w),
            Err(Error::ZeroCentroid { .. })
        ));
    }

    #[test]
    fn weam2nd_examples() {
        let t = Table::new(&[
            ("w", vec![1.0, 0.0]),
            ("a", vec![2.0, 0.0]),
            ("b", vec![0.0, 5.0]),
        ]);
        // S = {w} gives exactly 1
        let self_assoc = weam2nd(&t, 0, &[0]).unwrap();
        assert!((self_assoc - 1.0).abs() < 1e-12);
        // cosines 1 and 0 average to 0.5
        let mixed = weam2nd(&t, 0, &[1, 2]).unwrap();
        assert!((mixed - 0.5).abs() < 1e-12);
        assert!(matches!(
            weam2nd(&t, 0, &[]),
            Err(Error::EmptySet { .. })
        ));
    }

    #[test]
    fn weam2nd_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let entries: Vec<(String, Vec<f64>)> = (0..8)
            .map(|i| {
                (
                    format!("w{i}"),
                    (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                )
            })
            .collect();
        let refs: Vec<(&str, Vec<f64>)> = entries
            .iter()
            .map(|(w, v)| (w.as_str(), v.clone()))
            .collect();
        let t = Table::new(&refs);
        let set = [1usize, 3, 4, 6, 7];
        let ours = weam2nd(&t, 0, &set).unwrap();
        let mut naive = 0.0;
        for &x in &set {
            naive += cosine(&t.rows[x], &t.rows[0]).unwrap();
        }
        naive /= set.len() as f64;
        assert!((ours - naive).abs() < 1e-12);
    }

    #[test]
    fn bias_weam2nd_antisymmetry_and_hand_instance() {
        let t = Table::new(&[
            ("w", vec![1.0, 1.0]),
            ("z1", vec![1.0, 0.0]),
            ("y1", vec![0.0, 1.0]),
            ("y2", vec![-1.0, 0.0]),
        ]);
        let lex = lexicon(&["z1"], &["y1", "y2"], &[]);
        let resolved = ResolvedLexicon::resolve(&lex, &t).unwrap();
        let psi = bias_weam2nd(&t, &resolved, 0).unwrap();
        // cos(w,z1) = 1/sqrt 2; mean(cos(w,y1), cos(w,y2)) = (1/sqrt2 - 1/sqrt2)/2 = 0
        assert!((psi - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let swapped = bias_weam2nd(&t, &resolved.swapped(), 0).unwrap();
        assert_eq!(psi, -swapped);

        // Z = Z' means zero
        let lex = lexicon(&["z1"], &["y1"], &[]);
        let mut resolved = ResolvedLexicon::resolve(&lex, &t).unwrap();
        resolved.z_prime = resolved.z.clone();
        assert_eq!(bias_weam2nd(&t, &resolved, 0).unwrap(), 0.0);
    }

    #[test]
    fn weam2nd_invariant_to_scaling_of_w() {
        let t = Table::new(&[
            ("w", vec![0.3, 0.4]),
            ("wx", vec![1.5, 2.0]), // 5x w
            ("a", vec![1.0, -2.0]),
            ("b", vec![0.7, 0.1]),
        ]);
        let set = [2usize, 3];
        let a = weam2nd(&t, 0, &set).unwrap();
        let b = weam2nd(&t, 1, &set).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn measures_invariant_to_set_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let entries: Vec<(String, Vec<f64>)> = (0..10)
            .map(|i| {
                (
                    format!("w{i}"),
                    (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                )
            })
            .collect();
        let refs: Vec<(&str, Vec<f64>)> = entries
            .iter()
            .map(|(w, v)| (w.as_str(), v.clone()))
            .collect();
        let t = Table::new(&refs);
        let resolved = ResolvedLexicon {
            z: vec![1, 2, 3],
            z_prime: vec![4, 5, 6],
            pairs: vec![(1, 4), (2, 5), (3, 6)],
        };
        let shuffled = ResolvedLexicon {
            z: vec![3, 1, 2],
            z_prime: vec![6, 5, 4],
            pairs: vec![(3, 6), (1, 4), (2, 5)],
        };
        let a = bias_weam2nd(&t, &resolved, 0).unwrap();
        let b = bias_weam2nd(&t, &shuffled, 0).unwrap();
        assert!((a - b).abs() < 1e-12);

        let w = t.vector(0);
        let ca = centroid_bias(&t, &resolved, &w).unwrap();
        let cb = centroid_bias(&t, &shuffled, &w).unwrap();
        assert!((ca - cb).abs() < 1e-12);

        let da = DirectionalAxis::fit(&t, &resolved).unwrap();
        let db = DirectionalAxis::fit(&t, &shuffled).unwrap();
        let pa = bias_directional(&da, &w);
        let pb = bias_directional(&db, &w);
        assert!((pa - pb).abs() < 1e-10);
    }

    #[test]
    fn threshold_examples() {
        assert!((bias_threshold(&[0.1, -0.3]).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(bias_threshold(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(bias_threshold(&[]), Err(Error::EmptyReport)));
    }

    #[test]
    fn classify_examples() {
        let table = AssociationTable {
            words: vec!["mid".into(), "hi".into(), "lo".into(), "edge".into()],
            to_z: vec![6.0, 10.0, 2.0, 6.5],
            to_z_prime: vec![6.0, 2.0, 10.0, 6.0],
        };
        let report = normalize_and_classify(
            &table,
            &table.words.clone(),
            TauPolicy::Fixed(0.05),
            "weam2nd",
            "test",
        )
        .unwrap();
        // pooled min 2, max 10: association 6 normalizes to the midpoint
        assert!((report.records[0].assoc_z.unwrap() - 0.5).abs() < 1e-12);
        // psi = 0 is unbiased
        assert_eq!(report.records[0].label, BiasLabel::Unbiased);
        assert_eq!(report.records[1].label, BiasLabel::ZBiased);
        assert_eq!(report.records[2].label, BiasLabel::ZPrimeBiased);
        // just above tau on the Z side
        let edge = &report.records[3];
        assert!(edge.psi > 0.05 && edge.psi < 0.07);
        assert_eq!(edge.label, BiasLabel::ZBiased);
    }

    #[test]
    fn classify_rejects_degenerate_pool() {
        let table = AssociationTable {
            words: vec!["a".into(), "b".into()],
            to_z: vec![1.0, 1.0],
            to_z_prime: vec![1.0, 1.0],
        };
        assert!(matches!(
            normalize_and_classify(
                &table,
                &table.words.clone(),
                TauPolicy::MeanAbs,
                "m",
                "r"
            ),
            Err(Error::DegenerateNormalization)
        ));
    }

    #[test]
    fn scatter_rule_equals_psi_rule() {
        // distance-from-diagonal labeling equals |psi| < tau labeling
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let az: f64 = rng.gen_range(0.0..1.0);
            let azp: f64 = rng.gen_range(0.0..1.0);
            let tau = rng.gen_range(0.01..0.5);
            let psi = az - azp;
            let by_psi = BiasReport::label_for(tau, psi);
            let diagonal_distance = (az - azp).abs();
            let by_scatter = if diagonal_distance < tau {
                BiasLabel::Unbiased
            } else if az > azp {
                BiasLabel::ZBiased
            } else {
                BiasLabel::ZPrimeBiased
            };
            assert_eq!(by_psi, by_scatter);
        }
    }
}
