//! Bundled word lists: gender definitional sets, gender swap pairs, and
//! tagged occupation lists.

use std::io::Cursor;

use crate::corpus::{read_pair_list, read_word_list, ConceptLexicon};
use crate::Result;

const GENDER_FEMALE: &str = include_str!("../data/lexicons/gender_female.txt");
const GENDER_MALE: &str = include_str!("../data/lexicons/gender_male.txt");
const GENDER_PAIRS: &str = include_str!("../data/lexicons/gender_pairs.tsv");
const GENDER_PAIRS_SYMMETRIC: &str = include_str!("../data/lexicons/gender_pairs_symmetric.tsv");
const OCC_FEMALE: &str = include_str!("../data/lexicons/occupations_female_specific.txt");
const OCC_MALE: &str = include_str!("../data/lexicons/occupations_male_specific.txt");
const OCC_NEUTRAL: &str = include_str!("../data/lexicons/occupations_neutral.txt");

/// Full gender lexicon: Z = female definitional words, Z' = male, plus the
/// swap pair list as published. The pair list reuses "her" and "daughter" on
/// the female side, so the induced swap map is not an involution; see
/// [`gender_lexicon_symmetric`] when exact swap symmetry matters.
pub fn gender_lexicon() -> ConceptLexicon {
    let z = read_word_list(Cursor::new(GENDER_FEMALE)).expect("bundled list");
    let z_prime = read_word_list(Cursor::new(GENDER_MALE)).expect("bundled list");
    let pairs = read_pair_list(Cursor::new(GENDER_PAIRS), "gender_pairs").expect("bundled list");
    ConceptLexicon::new(z, z_prime, pairs).expect("bundled lexicon is valid")
}

/// Bijective gender pair lexicon: every word belongs to exactly one pair, so
/// the swap map is an involution and full augmentation makes co-occurrence
/// counts exactly symmetric. Z and Z' are the pair sides (27 words each).
pub fn gender_lexicon_symmetric() -> ConceptLexicon {
    let pairs = read_pair_list(Cursor::new(GENDER_PAIRS_SYMMETRIC), "gender_pairs_symmetric")
        .expect("bundled list");
    ConceptLexicon::from_pairs(pairs).expect("bundled lexicon is valid")
}

/// Occupation word lists, tagged as in the published supplemental material.
pub struct OccupationLists {
    pub female_specific: Vec<String>,
    pub male_specific: Vec<String>,
    pub neutral: Vec<String>,
}

impl OccupationLists {
    pub fn all(&self) -> Vec<String> {
        let mut out = self.neutral.clone();
        out.extend(self.female_specific.iter().cloned());
        out.extend(self.male_specific.iter().cloned());
        out
    }
}

pub fn occupations() -> OccupationLists {
    OccupationLists {
        female_specific: read_word_list(Cursor::new(OCC_FEMALE)).expect("bundled list"),
        male_specific: read_word_list(Cursor::new(OCC_MALE)).expect("bundled list"),
        neutral: read_word_list(Cursor::new(OCC_NEUTRAL)).expect("bundled list"),
    }
}

/// Raw bundled files, exposed so the CLI can materialize them for users.
pub fn bundled_files() -> Vec<(&'static str, &'static str)> {
    vec![
        ("gender_female.txt", GENDER_FEMALE),
        ("gender_male.txt", GENDER_MALE),
        ("gender_pairs.tsv", GENDER_PAIRS),
        ("gender_pairs_symmetric.tsv", GENDER_PAIRS_SYMMETRIC),
        ("occupations_female_specific.txt", OCC_FEMALE),
        ("occupations_male_specific.txt", OCC_MALE),
        ("occupations_neutral.txt", OCC_NEUTRAL),
    ]
}

/// Bundled sample occupation statistics, format references for the two
/// published collections.
pub fn sample_stats() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "labor_sample.csv",
            include_str!("../data/stats/labor_sample.csv"),
        ),
        (
            "census_sample.csv",
            include_str!("../data/stats/census_sample.csv"),
        ),
    ]
}

/// Checks that a swap map built from the lexicon's pairs is an involution:
/// applying it twice is the identity on every paired word.
pub fn is_involutive(lexicon: &ConceptLexicon) -> bool {
    let swap = lexicon.swap_map();
    swap.iter()
        .all(|(&from, &to)| swap.get(to) == Some(&from))
}

/// Convenience check used before symmetric-augmentation experiments.
pub fn require_involutive(lexicon: &ConceptLexicon) -> Result<()> {
    if is_involutive(lexicon) {
        Ok(())
    } else {
        Err(crate::Error::InvalidArgument(
            "lexicon pairs do not form an involution; use the symmetric pair list".into(),
        ))
    }
}
