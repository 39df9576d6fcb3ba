//! End-to-end library flow: corpus in, bias report out, across all four
//! representations.

use std::io::Cursor;

use biaslens::bias::{
    bias_weam1st, normalize_and_classify, ResolvedLexicon, TauPolicy,
};
use biaslens::cooccur::count_cooc;
use biaslens::corpus::{cda_augment, tokenize_normalize, AugmentMode, Vocabulary};
use biaslens::eval::{measure_associations, Measure, Rep};
use biaslens::explicit::{eglove_view, esg_view, init_glove_view, ppmi_view};
use biaslens::glove::{train_glove, GloveConfig};
use biaslens::lexicons;
use biaslens::model::EmbeddingModel;
use biaslens::sgns::{train_sgns, NoiseDistribution, SgnsConfig};

fn skewed_corpus() -> Vec<biaslens::corpus::Sentence> {
    let mut lines = Vec::new();
    for i in 0..120 {
        if i % 10 < 8 {
            lines.push("she is a nurse and her sister visits the nurse");
        } else {
            lines.push("he is a nurse");
        }
        if i % 10 < 3 {
            lines.push("she works as a smith");
        } else {
            lines.push("he works as a smith and his brother knows the smith");
        }
        lines.push("the village market was busy all morning");
    }
    tokenize_normalize(Cursor::new(lines.join("\n"))).unwrap()
}

#[test]
fn full_flow_across_representations() {
    let sentences = skewed_corpus();
    let vocab = Vocabulary::build(&sentences, 1).unwrap();
    let counts = count_cooc(&sentences, &vocab, 5);
    let lexicon = lexicons::gender_lexicon();

    let sg = train_sgns(
        &sentences,
        &vocab,
        &SgnsConfig {
            dim: 12,
            epochs: 4,
            negatives: 3,
            seed: 5,
            ..SgnsConfig::default()
        },
    )
    .unwrap();
    let glove = train_glove(
        &counts,
        &vocab,
        &GloveConfig {
            dim: 12,
            epochs: 20,
            seed: 5,
            ..GloveConfig::default()
        },
    )
    .unwrap();
    let noise = NoiseDistribution::from_vocab(&vocab, 0.75).unwrap();

    let ppmi = ppmi_view(&counts, &vocab, 0.75, 1).unwrap();
    let initg = init_glove_view(&counts, &vocab).unwrap();
    let esg = esg_view(&sg, &noise).unwrap();
    let eglove = eglove_view(&glove).unwrap();

    let words = vec!["nurse".to_string(), "smith".to_string()];
    let pool: Vec<String> = vocab.words().map(str::to_string).collect();

    for (name, rep) in [
        ("ppmi", Rep::Explicit(&ppmi)),
        ("esg", Rep::Explicit(&esg)),
        ("eglove", Rep::Explicit(&eglove)),
    ] {
        let table = measure_associations(&rep, Measure::Weam1st, &lexicon, &pool).unwrap();
        let report =
            normalize_and_classify(&table, &words, TauPolicy::MeanAbs, "weam1st", name).unwrap();
        assert_eq!(report.records.len(), 2);
        let nurse = &report.records[0];
        let smith = &report.records[1];
        // the planted skew: nurse leans female, smith leans male
        assert!(
            nurse.psi > smith.psi,
            "{name}: nurse {} vs smith {}",
            nurse.psi,
            smith.psi
        );
        for r in &report.records {
            let az = r.assoc_z.unwrap();
            let azp = r.assoc_z_prime.unwrap();
            assert!((0.0..=1.0).contains(&az) && (0.0..=1.0).contains(&azp));
        }
    }

    // second-order on the embedding agrees on the direction of the gap
    let rep = Rep::Embedding(&sg);
    let table = measure_associations(&rep, Measure::Weam2nd, &lexicon, &pool).unwrap();
    let report =
        normalize_and_classify(&table, &words, TauPolicy::MeanAbs, "weam2nd", "sg").unwrap();
    assert!(report.records[0].psi > report.records[1].psi);

    // initGloVe rows support second-order use, while a vocabulary-wide
    // first-order pass hits an unobserved (undefined) cell
    let rep = Rep::Explicit(&initg);
    let table = measure_associations(&rep, Measure::Weam2nd, &lexicon, &pool).unwrap();
    assert_eq!(table.words.len(), pool.len());
    let first_order = measure_associations(&rep, Measure::Weam1st, &lexicon, &pool);
    assert!(matches!(
        first_order,
        Err(biaslens::Error::UnobservedCell { .. })
    ));
}

#[test]
fn model_files_survive_the_round_trip_through_training() {
    let sentences = skewed_corpus();
    let vocab = Vocabulary::build(&sentences, 1).unwrap();
    let counts = count_cooc(&sentences, &vocab, 3);
    let glove = train_glove(
        &counts,
        &vocab,
        &GloveConfig {
            dim: 6,
            epochs: 3,
            seed: 2,
            ..GloveConfig::default()
        },
    )
    .unwrap();
    let mut buf = Vec::new();
    glove.write_embx(&mut buf, Some("testhash")).unwrap();
    let back = EmbeddingModel::read_embx(Cursor::new(&buf)).unwrap();
    assert_eq!(glove, back);
    back.check_vocab(&vocab).unwrap();
}

#[test]
fn symmetrized_corpus_zeroes_every_first_order_bias() {
    let sentences = skewed_corpus();
    let lexicon = lexicons::gender_lexicon_symmetric();
    let full = cda_augment(&sentences, &lexicon, AugmentMode::Full, 3);
    let vocab = Vocabulary::build(&full, 1).unwrap();
    let counts = count_cooc(&full, &vocab, 5);
    let view = ppmi_view(&counts, &vocab, 0.75, 1).unwrap();
    let resolved = ResolvedLexicon::resolve(&lexicon, &view).unwrap();
    for w in 0..vocab.len() {
        if lexicon.contains(vocab.word(w)) {
            continue;
        }
        let psi = bias_weam1st(&view, &resolved, w).unwrap();
        assert!(
            psi.abs() < 1e-12,
            "word {} has residual bias {psi}",
            vocab.word(w)
        );
    }
}
