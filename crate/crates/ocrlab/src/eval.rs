//! Character error rate and error analysis.
//!
//! CER is Levenshtein distance (unit costs) over the ground-truth length.
//! Corpus CER is micro-averaged: pooled distances over pooled truth lengths,
//! which keeps empty lines harmless. Confusion tables are built from a
//! minimal-cost alignment with a deterministic tie preference of
//! substitution over insertion over deletion.

use std::path::Path;

use crate::error::{Error, Result};

/// Levenshtein distance with unit costs, over Unicode scalar values.
pub fn edit_distance(predicted: &str, truth: &str) -> usize {
    let p: Vec<char> = predicted.chars().collect();
    let t: Vec<char> = truth.chars().collect();
    if p.is_empty() {
        return t.len();
    }
    if t.is_empty() {
        return p.len();
    }
    let mut prev: Vec<usize> = (0..=t.len()).collect();
    let mut cur = vec![0usize; t.len() + 1];
    for i in 1..=p.len() {
        cur[0] = i;
        for j in 1..=t.len() {
            let sub = prev[j - 1] + usize::from(p[i - 1] != t[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[t.len()]
}

/// Character error rate of one line: `edit_distance / len(truth)`.
///
/// Both sides empty count as a perfect 0. A non-empty prediction against an
/// empty truth has no meaningful per-line rate; pool such lines through
/// [`corpus_cer`] instead.
pub fn cer(predicted: &str, truth: &str) -> Result<f64> {
    let truth_len = truth.chars().count();
    if truth_len == 0 {
        return if predicted.is_empty() {
            Ok(0.0)
        } else {
            Err(Error::config(
                "per-line CER undefined for empty truth; use corpus_cer",
            ))
        };
    }
    Ok(edit_distance(predicted, truth) as f64 / truth_len as f64)
}

/// Micro-averaged corpus CER: pooled edit distances over pooled truth
/// lengths.
pub fn corpus_cer<P: AsRef<str>, T: AsRef<str>>(pairs: &[(P, T)]) -> Result<f64> {
    let mut dist = 0usize;
    let mut len = 0usize;
    for (p, t) in pairs {
        dist += edit_distance(p.as_ref(), t.as_ref());
        len += t.as_ref().chars().count();
    }
    if len == 0 {
        return Err(Error::config("corpus CER needs at least one non-empty truth"));
    }
    Ok(dist as f64 / len as f64)
}

/// Relative improvement in percent: `100 * (baseline - new) / baseline`.
pub fn relative_improvement(baseline_cer: f64, new_cer: f64) -> Result<f64> {
    if baseline_cer <= 0.0 {
        return Err(Error::config(format!(
            "relative improvement undefined for baseline {baseline_cer}"
        )));
    }
    Ok(100.0 * (baseline_cer - new_cer) / baseline_cer)
}

/// One side of a confusion entry: a character, or the gap marking an
/// insertion/deletion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConfUnit {
    Gap,
    Char(char),
}

impl ConfUnit {
    /// Rendering used in reports: gap as `_`, space spelled out.
    pub fn render(self) -> String {
        match self {
            ConfUnit::Gap => "_".into(),
            ConfUnit::Char(' ') => "SPACE".into(),
            ConfUnit::Char(c) => c.to_string(),
        }
    }
}

/// Edit operations of one aligned line pair.
#[derive(Clone, Debug, Default)]
pub struct EditOps {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    /// `(predicted, true)` unit pairs for every non-match operation.
    pub pairs: Vec<(ConfUnit, ConfUnit)>,
}

impl EditOps {
    pub fn total(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }
}

/// Minimal-cost alignment of one line pair. Among equal-cost traces the
/// preference is substitution, then insertion (spurious predicted char),
/// then deletion (missed true char).
pub fn edit_ops(predicted: &str, truth: &str) -> EditOps {
    let p: Vec<char> = predicted.chars().collect();
    let t: Vec<char> = truth.chars().collect();
    let (m, n) = (p.len(), t.len());
    let mut dp = vec![0usize; (m + 1) * (n + 1)];
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    for i in 0..=m {
        dp[idx(i, 0)] = i;
    }
    for j in 0..=n {
        dp[idx(0, j)] = j;
    }
    for i in 1..=m {
        for j in 1..=n {
            let sub = dp[idx(i - 1, j - 1)] + usize::from(p[i - 1] != t[j - 1]);
            let ins = dp[idx(i - 1, j)] + 1;
            let del = dp[idx(i, j - 1)] + 1;
            dp[idx(i, j)] = sub.min(ins).min(del);
        }
    }

    let mut ops = EditOps::default();
    let (mut i, mut j) = (m, n);
    let mut rev_pairs = Vec::new();
    while i > 0 || j > 0 {
        let here = dp[idx(i, j)];
        if i > 0 && j > 0 && here == dp[idx(i - 1, j - 1)] + usize::from(p[i - 1] != t[j - 1]) {
            if p[i - 1] != t[j - 1] {
                ops.substitutions += 1;
                rev_pairs.push((ConfUnit::Char(p[i - 1]), ConfUnit::Char(t[j - 1])));
            }
            i -= 1;
            j -= 1;
        } else if i > 0 && here == dp[idx(i - 1, j)] + 1 {
            ops.insertions += 1;
            rev_pairs.push((ConfUnit::Char(p[i - 1]), ConfUnit::Gap));
            i -= 1;
        } else {
            ops.deletions += 1;
            rev_pairs.push((ConfUnit::Gap, ConfUnit::Char(t[j - 1])));
            j -= 1;
        }
    }
    rev_pairs.reverse();
    ops.pairs = rev_pairs;
    ops
}

/// Most common `(predicted, true)` error pairs over a corpus, sorted by
/// count descending.
#[derive(Clone, Debug, Default)]
pub struct ConfusionTable {
    /// `(predicted, true, count)`, count-descending.
    pub entries: Vec<(ConfUnit, ConfUnit, usize)>,
    /// Total edit operations over the corpus (before `top_k` truncation).
    pub total_ops: usize,
}

pub fn confusion<P: AsRef<str>, T: AsRef<str>>(
    pairs: &[(P, T)],
    top_k: usize,
) -> ConfusionTable {
    let mut counts: std::collections::BTreeMap<(ConfUnit, ConfUnit), usize> =
        std::collections::BTreeMap::new();
    let mut total = 0usize;
    for (p, t) in pairs {
        let ops = edit_ops(p.as_ref(), t.as_ref());
        total += ops.total();
        for pair in ops.pairs {
            *counts.entry(pair).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(ConfUnit, ConfUnit, usize)> =
        counts.into_iter().map(|((a, b), n)| (a, b, n)).collect();
    entries.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    entries.truncate(top_k);
    ConfusionTable {
        entries,
        total_ops: total,
    }
}

/// CSV with columns `count,predicted,true`; gap rendered `_`, space
/// rendered `SPACE`.
pub fn write_confusion_csv(table: &ConfusionTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["count", "predicted", "true"])?;
    for (p, t, n) in &table.entries {
        w.write_record([n.to_string(), p.render(), t.render()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
