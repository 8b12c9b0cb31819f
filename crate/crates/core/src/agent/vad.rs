//! Valence/arousal/dominance scoring against a term lexicon.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VadVector {
    pub valence: f64,
    pub arousal: f64,
    pub dominance: f64,
}

impl VadVector {
    pub const ZERO: VadVector = VadVector { valence: 0.0, arousal: 0.0, dominance: 0.0 };

    pub const fn new(valence: f64, arousal: f64, dominance: f64) -> Self {
        Self { valence, arousal, dominance }
    }

    pub fn in_range(&self) -> bool {
        [self.valence, self.arousal, self.dominance].iter().all(|x| (-1.0..=1.0).contains(x))
    }

    fn scale(self, k: f64) -> Self {
        Self::new(self.valence * k, self.arousal * k, self.dominance * k)
    }
}

impl Add for VadVector {
    type Output = VadVector;
    fn add(self, o: VadVector) -> VadVector {
        VadVector::new(self.valence + o.valence, self.arousal + o.arousal, self.dominance + o.dominance)
    }
}

/// Scalar mood: the sum of the three components.
pub fn overall_emotion(v: VadVector) -> f64 {
    v.valence + v.arousal + v.dominance
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LexiconError {
    #[error("line {line}: expected 4 tab-separated columns, found {found}")]
    Columns { line: usize, found: usize },
    #[error("line {line}: `{value}` is not a number")]
    Number { line: usize, value: String },
    #[error("line {line}: value {value} outside [-1, 1]")]
    Range { line: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("VAD component {value} outside [-1, 1]")]
pub struct OutOfRange {
    pub value: f64,
}

/// Term -> VAD row. Multi-word terms are stored space-joined.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    entries: BTreeMap<String, VadVector>,
    longest: usize,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, term: &str, row: VadVector) {
        let key = text::lexicon_tokens(term).join(" ");
        if key.is_empty() {
            return;
        }
        self.longest = self.longest.max(key.split(' ').count());
        self.entries.insert(key, row);
    }

    pub fn get(&self, term: &str) -> Option<VadVector> {
        self.entries.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, VadVector)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Parses `term \t valence \t arousal \t dominance` lines. Lines starting
    /// with `#` and blank lines are skipped, as is a leading
    /// `term valence arousal dominance` header row.
    pub fn from_tsv(src: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::new();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim_end_matches('\r');
            if l.trim().is_empty() || l.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = l.split('\t').collect();
            if cols.len() != 4 {
                return Err(LexiconError::Columns { line, found: cols.len() });
            }
            if lex.is_empty() && cols[1].trim().eq_ignore_ascii_case("valence") {
                continue;
            }
            let mut vals = [0.0; 3];
            for (slot, col) in vals.iter_mut().zip(&cols[1..]) {
                let value: f64 =
                    col.trim().parse().map_err(|_| LexiconError::Number { line, value: col.to_string() })?;
                if !(-1.0..=1.0).contains(&value) {
                    return Err(LexiconError::Range { line, value });
                }
                *slot = value;
            }
            lex.insert(cols[0], VadVector::new(vals[0], vals[1], vals[2]));
        }
        Ok(lex)
    }

    /// Lexicon rows matched in `text`, greedy longest phrase first.
    pub fn matches(&self, text: &str) -> Vec<(String, VadVector)> {
        let tokens = text::lexicon_tokens(text);
        let mut hits = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let mut matched = 0;
            for n in (1..=self.longest.min(tokens.len() - i)).rev() {
                let phrase = tokens[i..i + n].join(" ");
                if let Some(row) = self.entries.get(&phrase) {
                    hits.push((phrase, *row));
                    matched = n;
                    break;
                }
            }
            i += matched.max(1);
        }
        hits
    }
}

/// Mean VAD row over lexicon hits; `(0, 0, 0)` when nothing matches.
pub fn score_vad(text: &str, lexicon: &Lexicon) -> VadVector {
    let hits = lexicon.matches(text);
    if hits.is_empty() {
        return VadVector::ZERO;
    }
    let sum = hits.iter().fold(VadVector::ZERO, |acc, (_, r)| acc + *r);
    sum.scale(1.0 / hits.len() as f64)
}

const LOW: f64 = -1.0 / 3.0;
const HIGH: f64 = 1.0 / 3.0;

fn axis_word(value: f64, low: &'static str, high: &'static str) -> Option<&'static str> {
    if value <= LOW {
        Some(low)
    } else if value >= HIGH {
        Some(high)
    } else {
        None
    }
}

/// Natural-language descriptor of an emotion vector.
pub fn vad_to_words(v: VadVector) -> Result<String, OutOfRange> {
    for value in [v.valence, v.arousal, v.dominance] {
        if !(-1.0..=1.0).contains(&value) {
            return Err(OutOfRange { value });
        }
    }
    let words: Vec<&str> = [
        axis_word(v.valence, "unpleasant", "pleasant"),
        axis_word(v.arousal, "calm", "agitated"),
        axis_word(v.dominance, "submissive", "in-control"),
    ]
    .into_iter()
    .flatten()
    .collect();
    if words.is_empty() {
        Ok("emotionally neutral".to_string())
    } else {
        Ok(words.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> Lexicon {
        Lexicon::from_tsv("# sample\nterm\tvalence\tarousal\tdominance\nhappy\t0.9\t0.4\t0.5\nsad\t-0.8\t-0.3\t-0.4\nice cream\t0.7\t0.2\t0.1\nice\t0.0\t-0.1\t0.0\n")
            .unwrap()
    }

    #[test]
    fn empty_and_no_hits_are_zero() {
        assert_eq!(score_vad("", &lex()), VadVector::ZERO);
        assert_eq!(score_vad("table chair window", &lex()), VadVector::ZERO);
    }

    #[test]
    fn single_term_is_its_row() {
        assert_eq!(score_vad("Happy!", &lex()), VadVector::new(0.9, 0.4, 0.5));
    }

    #[test]
    fn two_terms_average() {
        let v = score_vad("happy but sad", &lex());
        assert!((v.valence - 0.05).abs() < 1e-12);
        assert!((v.arousal - 0.05).abs() < 1e-12);
        assert!((v.dominance - 0.05).abs() < 1e-12);
    }

    #[test]
    fn multiword_terms_win_over_unigrams() {
        let hits = lex().matches("I want ice cream and ice");
        let names: Vec<&str> = hits.iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(names, ["ice cream", "ice"]);
    }

    #[test]
    fn overall_is_component_sum() {
        assert_eq!(overall_emotion(VadVector::ZERO), 0.0);
        assert!((overall_emotion(VadVector::new(0.2, 0.1, -0.05)) - 0.25).abs() < 1e-12);
        assert_eq!(overall_emotion(VadVector::new(-1.0, -1.0, -1.0)), -3.0);
    }

    #[test]
    fn words_follow_thirds() {
        assert_eq!(vad_to_words(VadVector::ZERO).unwrap(), "emotionally neutral");
        assert_eq!(vad_to_words(VadVector::new(0.8, 0.5, 0.5)).unwrap(), "pleasant, agitated, in-control");
        assert_eq!(vad_to_words(VadVector::new(-0.5, 0.1, -0.9)).unwrap(), "unpleasant, submissive");
        assert!(vad_to_words(VadVector::new(1.5, 0.0, 0.0)).is_err());
    }

    #[test]
    fn rejects_out_of_range_rows() {
        assert!(matches!(Lexicon::from_tsv("x\t1.2\t0\t0"), Err(LexiconError::Range { line: 1, .. })));
        assert!(matches!(Lexicon::from_tsv("x\t0\t0"), Err(LexiconError::Columns { .. })));
    }

    proptest::proptest! {
        #[test]
        fn permutation_and_duplication_invariant(idx in proptest::collection::vec(0usize..3, 1..8), rot in 0usize..8) {
            let words = ["happy", "sad", "table"];
            let toks: Vec<&str> = idx.iter().map(|&i| words[i]).collect();
            let base = score_vad(&toks.join(" "), &lex());
            let mut rotated = toks.clone();
            let r = rot % rotated.len();
            rotated.rotate_left(r);
            let perm = score_vad(&rotated.join(" "), &lex());
            let mut doubled = toks.clone();
            doubled.extend(toks.iter());
            let dup = score_vad(&doubled.join(" "), &lex());
            for other in [perm, dup] {
                proptest::prop_assert!((base.valence - other.valence).abs() < 1e-12);
                proptest::prop_assert!((base.arousal - other.arousal).abs() < 1e-12);
                proptest::prop_assert!((base.dominance - other.dominance).abs() < 1e-12);
            }
        }

        #[test]
        fn overall_is_linear(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0, e in -1.0f64..1.0, f in -1.0f64..1.0) {
            let x = VadVector::new(a, b, c);
            let y = VadVector::new(d, e, f);
            proptest::prop_assert!((overall_emotion(x) + overall_emotion(y) - overall_emotion(x + y)).abs() < 1e-12);
        }
    }
}
