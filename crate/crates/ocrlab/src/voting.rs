//! Sequence voting over multiple predicted transcriptions of the same line.
//!
//! Pairs of texts are aligned by recursive longest-common-substring
//! decomposition: the longest common contiguous run is anchored, the left
//! and right remainders recurse, and remainders with no common character
//! become gap-padded columns. N texts fold into a growing multi-alignment
//! by aligning each next text against the consensus of the rows so far
//! (progressive alignment in input order; a true N-way alignment is
//! intractable). The voted result takes each column's majority candidate,
//! character or gap, with ties broken toward the candidate held by the
//! lowest-index input.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One alignment cell: a character of the source text or a gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Gap,
    Char(char),
}

impl Cell {
    pub fn as_char(self) -> Option<char> {
        match self {
            Cell::Char(c) => Some(c),
            Cell::Gap => None,
        }
    }
}

/// Rows of equal length over characters and gaps. De-gapping row `i`
/// reproduces input `i` exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alignment {
    rows: Vec<Vec<Cell>>,
}

impl Alignment {
    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn degap(&self, row: usize) -> String {
        self.rows[row].iter().filter_map(|c| c.as_char()).collect()
    }
}

/// Longest common contiguous substring of `a` and `b`: `(start_a, start_b,
/// len)` with `len >= 1`, earliest occurrence in `a` (then `b`) on ties.
fn longest_common_substring(a: &[char], b: &[char]) -> Option<(usize, usize, usize)> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let mut best: Option<(usize, usize, usize)> = None;
    // lengths of common suffixes ending at (i, j), rolling row.
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            cur[j] = if a[i - 1] == b[j - 1] {
                prev[j - 1] + 1
            } else {
                0
            };
            let len = cur[j];
            if len > 0 && best.map_or(true, |(_, _, bl)| len > bl) {
                best = Some((i - len, j - len, len));
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

fn align_rec(a: &[char], b: &[char], row_a: &mut Vec<Cell>, row_b: &mut Vec<Cell>) {
    match longest_common_substring(a, b) {
        Some((sa, sb, len)) => {
            align_rec(&a[..sa], &b[..sb], row_a, row_b);
            for k in 0..len {
                row_a.push(Cell::Char(a[sa + k]));
                row_b.push(Cell::Char(b[sb + k]));
            }
            align_rec(&a[sa + len..], &b[sb + len..], row_a, row_b);
        }
        None => {
            // No common character: emit the leftover of `a`, then of `b`.
            for &c in a {
                row_a.push(Cell::Char(c));
                row_b.push(Cell::Gap);
            }
            for &c in b {
                row_a.push(Cell::Gap);
                row_b.push(Cell::Char(c));
            }
        }
    }
}

/// Aligns two texts by recursive longest-common-substring decomposition.
pub fn align_pair(a: &str, b: &str) -> Alignment {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut row_a = Vec::with_capacity(a.len().max(b.len()));
    let mut row_b = Vec::with_capacity(a.len().max(b.len()));
    align_rec(&a, &b, &mut row_a, &mut row_b);
    Alignment {
        rows: vec![row_a, row_b],
    }
}

/// Per-column consensus used while folding: the most frequent non-gap
/// character, ties toward the lowest-index row. Every column holds at least
/// one character, so the consensus maps one-to-one onto columns.
fn consensus(rows: &[Vec<Cell>]) -> Vec<char> {
    let width = rows.first().map_or(0, |r| r.len());
    let mut out = Vec::with_capacity(width);
    for col in 0..width {
        let mut counts: HashMap<char, (usize, usize)> = HashMap::new();
        for (ri, row) in rows.iter().enumerate() {
            if let Cell::Char(c) = row[col] {
                let e = counts.entry(c).or_insert((0, ri));
                e.0 += 1;
            }
        }
        let winner = counts
            .into_iter()
            .max_by(|(ca, (na, ra)), (cb, (nb, rb))| {
                na.cmp(nb)
                    .then(rb.cmp(ra))
                    .then(cb.cmp(ca))
            })
            .map(|(c, _)| c)
            .expect("every alignment column holds at least one character");
        out.push(winner);
    }
    out
}

fn multi_align(seqs: &[&str]) -> Alignment {
    let mut rows: Vec<Vec<Cell>> = vec![seqs[0].chars().map(Cell::Char).collect()];
    for seq in &seqs[1..] {
        let cons: String = consensus(&rows).into_iter().collect();
        let pair = align_pair(&cons, seq);
        let width = pair.width();
        let mut new_rows: Vec<Vec<Cell>> =
            (0..rows.len()).map(|_| Vec::with_capacity(width)).collect();
        let mut new_row: Vec<Cell> = Vec::with_capacity(width);
        let mut old_col = 0usize;
        for j in 0..width {
            match pair.rows[0][j] {
                Cell::Char(_) => {
                    for (r, nr) in rows.iter().zip(new_rows.iter_mut()) {
                        nr.push(r[old_col]);
                    }
                    old_col += 1;
                }
                Cell::Gap => {
                    for nr in new_rows.iter_mut() {
                        nr.push(Cell::Gap);
                    }
                }
            }
            new_row.push(pair.rows[1][j]);
        }
        debug_assert_eq!(old_col, rows.first().map_or(0, |r| r.len()));
        rows = new_rows;
        rows.push(new_row);
    }
    Alignment { rows }
}

/// Tally of one voted column, sorted by count descending (gap last within
/// equal counts).
pub type ColumnTally = Vec<(Cell, usize)>;

#[derive(Clone, Debug)]
pub struct VoteResult {
    pub text: String,
    pub tallies: Vec<ColumnTally>,
    /// Number of columns whose winning count was shared by more than one
    /// candidate.
    pub tie_broken_columns: usize,
}

/// Votes per aligned column across the alignment's rows.
fn vote_alignment(alignment: &Alignment) -> VoteResult {
    let rows = &alignment.rows;
    let mut text = String::new();
    let mut tallies = Vec::with_capacity(alignment.width());
    let mut tie_broken = 0usize;
    for col in 0..alignment.width() {
        let mut counts: HashMap<Cell, (usize, usize)> = HashMap::new();
        for (ri, row) in rows.iter().enumerate() {
            let e = counts.entry(row[col]).or_insert((0, ri));
            e.0 += 1;
        }
        let max_count = counts.values().map(|(n, _)| *n).max().unwrap_or(0);
        let tied: Vec<(Cell, usize)> = counts
            .iter()
            .filter(|(_, (n, _))| *n == max_count)
            .map(|(c, (_, r))| (*c, *r))
            .collect();
        if tied.len() > 1 {
            tie_broken += 1;
        }
        let winner = tied
            .into_iter()
            .min_by(|(ca, ra), (cb, rb)| ra.cmp(rb).then(ca.cmp(cb)))
            .map(|(c, _)| c)
            .unwrap_or(Cell::Gap);
        if let Cell::Char(c) = winner {
            text.push(c);
        }
        let mut tally: ColumnTally = counts.into_iter().map(|(c, (n, _))| (c, n)).collect();
        tally.sort_by(|(ca, na), (cb, nb)| nb.cmp(na).then(ca.cmp(cb)).then(cb.cmp(ca)));
        tallies.push(tally);
    }
    VoteResult {
        text,
        tallies,
        tie_broken_columns: tie_broken,
    }
}

/// Aligns `sequences` progressively and takes the per-column majority.
pub fn vote<S: AsRef<str>>(sequences: &[S]) -> Result<VoteResult> {
    if sequences.is_empty() {
        return Err(Error::config("vote needs at least one sequence"));
    }
    let refs: Vec<&str> = sequences.iter().map(|s| s.as_ref()).collect();
    let alignment = multi_align(&refs);
    Ok(vote_alignment(&alignment))
}

/// Exposed for tests of alignment soundness; voting callers only need
/// [`vote`].
pub fn multi_alignment<S: AsRef<str>>(sequences: &[S]) -> Result<Alignment> {
    if sequences.is_empty() {
        return Err(Error::config("alignment needs at least one sequence"));
    }
    let refs: Vec<&str> = sequences.iter().map(|s| s.as_ref()).collect();
    Ok(multi_align(&refs))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(content.lines().map(str::to_owned).collect())
}

/// Votes line `i` of the output from line `i` of every input file.
/// All files must have the same line count.
pub fn vote_files(inputs: &[PathBuf], out: &Path) -> Result<Vec<VoteResult>> {
    if inputs.is_empty() {
        return Err(Error::config("vote needs at least one input file"));
    }
    let mut columns: Vec<Vec<String>> = Vec::with_capacity(inputs.len());
    let mut expected = None;
    for path in inputs {
        let lines = read_lines(path)?;
        if let Some(n) = expected {
            if lines.len() != n {
                return Err(Error::LineCountMismatch {
                    path: path.clone(),
                    got: lines.len(),
                    expected: n,
                });
            }
        } else {
            expected = Some(lines.len());
        }
        columns.push(lines);
    }
    let n_lines = expected.unwrap_or(0);
    let mut results = Vec::with_capacity(n_lines);
    let mut out_file = fs::File::create(out).map_err(|e| Error::io(out, e))?;
    for i in 0..n_lines {
        let row: Vec<&str> = columns.iter().map(|c| c[i].as_str()).collect();
        let result = vote(&row)?;
        writeln!(out_file, "{}", result.text).map_err(|e| Error::io(out, e))?;
        results.push(result);
    }
    Ok(results)
}

/// Per-column tally report: one CSV row per (line, column, candidate).
/// Gaps render as `_`.
pub fn write_tally_csv(results: &[VoteResult], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["line", "column", "candidate", "count"])?;
    for (li, res) in results.iter().enumerate() {
        for (col, tally) in res.tallies.iter().enumerate() {
            for (cell, count) in tally {
                let cand = match cell {
                    Cell::Gap => "_".to_string(),
                    Cell::Char(c) => c.to_string(),
                };
                w.write_record([
                    li.to_string(),
                    col.to_string(),
                    cand,
                    count.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_pair_aligns_without_gaps() {
        let al = align_pair("abc", "abc");
        assert_eq!(al.width(), 3);
        assert_eq!(al.rows()[0], al.rows()[1]);
        assert!(al.rows()[0].iter().all(|c| matches!(c, Cell::Char(_))));
    }

    #[test]
    fn empty_side_becomes_all_gaps() {
        let al = align_pair("abc", "");
        assert_eq!(al.width(), 3);
        assert!(al.rows()[1].iter().all(|&c| c == Cell::Gap));
        assert_eq!(al.degap(0), "abc");
        assert_eq!(al.degap(1), "");
    }

    #[test]
    fn anchors_longest_common_substring() {
        // Exhaustive scan oracle for the longest common substring.
        let brute = |a: &str, b: &str| -> usize {
            let ac: Vec<char> = a.chars().collect();
            let bc: Vec<char> = b.chars().collect();
            let mut best = 0;
            for i in 0..ac.len() {
                for j in 0..bc.len() {
                    let mut l = 0;
                    while i + l < ac.len() && j + l < bc.len() && ac[i + l] == bc[j + l] {
                        l += 1;
                    }
                    best = best.max(l);
                }
            }
            best
        };
        let (a, b) = ("erors", "errors");
        assert_eq!(brute(a, b), 4); // "rors"
        let ac: Vec<char> = a.chars().collect();
        let bc: Vec<char> = b.chars().collect();
        let (sa, sb, len) = longest_common_substring(&ac, &bc).unwrap();
        assert_eq!(len, 4);
        assert_eq!(&ac[sa..sa + len], &bc[sb..sb + len]);

        let al = align_pair(a, b);
        assert_eq!(al.width(), 6);
        assert_eq!(al.degap(0), a);
        assert_eq!(al.degap(1), b);
        // Exactly one gap column (the missing r).
        let gaps = al.rows()[0].iter().filter(|&&c| c == Cell::Gap).count();
        assert_eq!(gaps, 1);
    }

    #[test]
    fn three_fold_vote_fixes_two_of_three_errors() {
        let folds = [
            "An example senience with erors",
            "A example sentence with erors",
            "An example entence with error",
        ];
        let result = vote(&folds).unwrap();
        assert_eq!(result.text, "An example sentence with erors");
        // Tally counts sum to N in every column.
        for tally in &result.tallies {
            let total: usize = tally.iter().map(|(_, n)| n).sum();
            assert_eq!(total, 3);
        }
    }

    #[test]
    fn unanimity() {
        let result = vote(&["same text"; 5]).unwrap();
        assert_eq!(result.text, "same text");
        assert_eq!(result.tie_broken_columns, 0);
    }

    #[test]
    fn two_way_tie_takes_the_lower_index_input() {
        let result = vote(&["cat", "cut"]).unwrap();
        assert_eq!(result.text, "cat");
        assert!(result.tie_broken_columns >= 1);
    }

    #[test]
    fn majority_dominance() {
        let result = vote(&["right", "wrong", "right"]).unwrap();
        assert_eq!(result.text, "right");
        let result = vote(&["aaa", "bbb", "aaa", "ccc", "aaa"]).unwrap();
        assert_eq!(result.text, "aaa");
    }

    #[test]
    fn single_sequence_votes_to_itself() {
        assert_eq!(vote(&["lonely"]).unwrap().text, "lonely");
        assert!(vote::<&str>(&[]).is_err());
    }

    #[test]
    fn multi_alignment_rows_degap_to_inputs() {
        let seqs = ["kitten", "sitting", "mitten", "bitten", "kitchen"];
        let al = multi_alignment(&seqs).unwrap();
        for (i, s) in seqs.iter().enumerate() {
            assert_eq!(al.degap(i), *s, "row {i}");
        }
    }

    #[test]
    fn non_tied_columns_survive_row_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let base: String = (0..rng.gen_range(3..12))
                .map(|_| (b'a' + rng.gen_range(0..4)) as char)
                .collect();
            let mutate = |rng: &mut ChaCha8Rng, s: &str| -> String {
                let mut out = String::new();
                for c in s.chars() {
                    if !rng.gen_bool(0.85) {
                        continue;
                    }
                    if rng.gen_bool(0.15) {
                        out.push((b'a' + rng.gen_range(0..4)) as char);
                    } else {
                        out.push(c);
                    }
                }
                out
            };
            let seqs: Vec<String> = (0..3).map(|_| mutate(&mut rng, &base)).collect();
            let al = multi_alignment(&seqs).unwrap();
            let direct = vote_alignment(&al);
            // Permute rows of the same alignment; compare per-column winners
            // for columns that are not ties.
            let permuted = Alignment {
                rows: vec![al.rows()[2].clone(), al.rows()[0].clone(), al.rows()[1].clone()],
            };
            let swapped = vote_alignment(&permuted);
            for (col, tally) in direct.tallies.iter().enumerate() {
                let max = tally.iter().map(|(_, n)| *n).max().unwrap();
                let tied = tally.iter().filter(|(_, n)| *n == max).count() > 1;
                if !tied {
                    let w1 = tally.iter().find(|(_, n)| *n == max).unwrap().0;
                    let max2 = swapped.tallies[col].iter().map(|(_, n)| *n).max().unwrap();
                    let w2 = swapped.tallies[col]
                        .iter()
                        .find(|(_, n)| *n == max2)
                        .unwrap()
                        .0;
                    assert_eq!(w1, w2, "column {col} changed without a tie");
                }
            }
        }
    }

    #[test]
    fn vote_files_round_trip_and_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = Vec::new();
        for (i, content) in ["ab\ncd\n", "ab\ncd\n", "ab\ncd\n"].iter().enumerate() {
            let p = dir.path().join(format!("{i}.txt"));
            std::fs::write(&p, content).unwrap();
            paths.push(p);
        }
        let out = dir.path().join("voted.txt");
        let results = vote_files(&paths, &out).unwrap();
        assert_eq!(results.len(), 2);
        assert_eq!(std::fs::read_to_string(&out).unwrap(), "ab\ncd\n");

        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, "only one line\n").unwrap();
        paths.push(bad.clone());
        match vote_files(&paths, &out) {
            Err(Error::LineCountMismatch { path, got: 1, expected: 2 }) => {
                assert_eq!(path, bad);
            }
            other => panic!("expected LineCountMismatch, got {other:?}"),
        }
    }
}
