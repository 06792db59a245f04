//! Character/label-index mapping. Index 0 is the reserved blank label; real
//! characters occupy indices `1..size`, sorted by Unicode code point.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BLANK: usize = 0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codec {
    chars: Vec<char>,
}

impl Codec {
    /// Builds a codec from ground-truth texts: sorted unique characters with
    /// the blank prepended at index 0.
    pub fn from_texts<S: AsRef<str>>(texts: &[S]) -> Result<Codec> {
        if texts.iter().all(|t| t.as_ref().is_empty()) {
            return Err(Error::config("cannot build a codec from empty texts"));
        }
        let set: BTreeSet<char> = texts.iter().flat_map(|t| t.as_ref().chars()).collect();
        Ok(Codec {
            chars: set.into_iter().collect(),
        })
    }

    pub fn from_chars(chars: &[char]) -> Codec {
        let set: BTreeSet<char> = chars.iter().copied().collect();
        Codec {
            chars: set.into_iter().collect(),
        }
    }

    /// Number of labels including the blank.
    pub fn size(&self) -> usize {
        self.chars.len() + 1
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn contains(&self, ch: char) -> bool {
        self.chars.binary_search(&ch).is_ok()
    }

    /// Label index of `ch`, in `1..size`.
    pub fn index_of(&self, ch: char) -> Option<usize> {
        self.chars.binary_search(&ch).ok().map(|i| i + 1)
    }

    /// Character for a non-blank label index.
    pub fn char_of(&self, label: usize) -> Option<char> {
        if label == BLANK {
            return None;
        }
        self.chars.get(label - 1).copied()
    }

    pub fn encode(&self, text: &str) -> Result<LabelSeq> {
        let mut labels = Vec::with_capacity(text.chars().count());
        for ch in text.chars() {
            match self.index_of(ch) {
                Some(i) => labels.push(i),
                None => {
                    return Err(Error::UnsupportedChar {
                        ch,
                        context: "not in codec".into(),
                    })
                }
            }
        }
        Ok(LabelSeq(labels))
    }

    pub fn decode(&self, labels: &LabelSeq) -> String {
        labels
            .iter()
            .filter_map(|&l| self.char_of(l))
            .collect()
    }
}

/// A sequence of non-blank label indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSeq(Vec<usize>);

impl LabelSeq {
    /// Validates that every index is a real label under a codec of
    /// `num_classes` labels (blank included).
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<LabelSeq> {
        for &l in &labels {
            if l == BLANK || l >= num_classes {
                return Err(Error::config(format!(
                    "label {l} out of range 1..{num_classes}"
                )));
            }
        }
        Ok(LabelSeq(labels))
    }

    pub fn from_raw(labels: Vec<usize>) -> LabelSeq {
        LabelSeq(labels)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl std::ops::Index<usize> for LabelSeq {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}
