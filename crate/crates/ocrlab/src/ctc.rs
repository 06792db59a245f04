//! CTC loss (log-space forward-backward) and greedy decoding, each in two
//! variants.
//!
//! The merge variant accepts every frame path whose collapse — adjacent equal
//! labels merged, then blanks removed — equals the target, so repeated
//! characters need a separating blank. The no-merge variant instead consumes
//! each target label at exactly one frame: label states have no self-loop,
//! adjacent labels may follow each other directly even when equal, and its
//! collapse rule only removes blanks.
//!
//! `ctc_loss` returns the gradient with respect to the pre-softmax logits
//! (the probability input is assumed to be a row-wise softmax output); this
//! is the numerically standard formulation and lets the output head skip its
//! own softmax Jacobian during backpropagation.

use crate::codec::{LabelSeq, BLANK};
use crate::error::{Error, Result};
use crate::probs::ProbMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CtcVariant {
    /// Standard path semantics: adjacent equal labels merge unless a blank
    /// separates them.
    Merge,
    /// Each label is emitted at one sole frame; repeats need no blank.
    NoMerge,
}

impl CtcVariant {
    pub fn merge_repeated(self) -> bool {
        self == CtcVariant::Merge
    }
}

/// Fewest frames a valid path can occupy.
pub fn min_path_length(labels: &LabelSeq, variant: CtcVariant) -> usize {
    match variant {
        CtcVariant::Merge => {
            let repeats = labels
                .as_slice()
                .windows(2)
                .filter(|w| w[0] == w[1])
                .count();
            labels.len() + repeats
        }
        CtcVariant::NoMerge => labels.len(),
    }
}

fn lse2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn lse3(a: f64, b: f64, c: f64) -> f64 {
    lse2(lse2(a, b), c)
}

/// Augmented label sequence: blanks interleaved around the labels,
/// `[_, l1, _, l2, ..., _]`, length `2L + 1`.
fn augmented(labels: &LabelSeq) -> Vec<usize> {
    let mut aug = Vec::with_capacity(2 * labels.len() + 1);
    aug.push(BLANK);
    for &l in labels.iter() {
        aug.push(l);
        aug.push(BLANK);
    }
    aug
}

/// CTC loss and gradient.
///
/// Returns `(-ln P, dloss/dlogits)` where `P` sums the probability of every
/// frame path matching `labels` under `variant`, and the gradient is taken
/// with respect to the logits that produced `probs` via row-wise softmax.
pub fn ctc_loss(
    probs: &ProbMatrix,
    labels: &LabelSeq,
    variant: CtcVariant,
) -> Result<(f64, Vec<f64>)> {
    let t_len = probs.frames();
    let classes = probs.classes();
    for &l in labels.iter() {
        if l == BLANK || l >= classes {
            return Err(Error::config(format!(
                "label {l} out of range for {classes} classes"
            )));
        }
    }
    let needed = min_path_length(labels, variant);
    if t_len < needed {
        return Err(Error::LineTooShort {
            needed,
            got: t_len,
            line: None,
        });
    }
    if t_len == 0 {
        return Ok((0.0, Vec::new()));
    }

    let aug = augmented(labels);
    let s_len = aug.len();
    let merge = variant.merge_repeated();

    // ln(prob) per frame/state; ln(0) = -inf marks an impossible emission.
    let lp = |t: usize, k: usize| probs.row(t)[k].ln();

    let mut alpha = vec![f64::NEG_INFINITY; t_len * s_len];
    alpha[0] = lp(0, aug[0]);
    if s_len > 1 {
        alpha[1] = lp(0, aug[1]);
    }
    for t in 1..t_len {
        let (prev, cur) = alpha.split_at_mut(t * s_len);
        let prev = &prev[(t - 1) * s_len..];
        for s in 0..s_len {
            let stay = if merge || aug[s] == BLANK {
                prev[s]
            } else {
                f64::NEG_INFINITY
            };
            let step = if s >= 1 { prev[s - 1] } else { f64::NEG_INFINITY };
            let skip_ok = s >= 2
                && aug[s] != BLANK
                && if merge { aug[s] != aug[s - 2] } else { true };
            let skip = if skip_ok { prev[s - 2] } else { f64::NEG_INFINITY };
            let acc = lse3(stay, step, skip);
            cur[s] = if acc == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                acc + lp(t, aug[s])
            };
        }
    }

    let last = &alpha[(t_len - 1) * s_len..];
    let log_p = if s_len > 1 {
        lse2(last[s_len - 1], last[s_len - 2])
    } else {
        last[s_len - 1]
    };
    if log_p == f64::NEG_INFINITY {
        // Possible only when some required emission has exactly zero
        // probability; the precondition already rules out short frames.
        return Ok((f64::INFINITY, vec![0.0; t_len * classes]));
    }

    let mut beta = vec![f64::NEG_INFINITY; t_len * s_len];
    {
        let tail = &mut beta[(t_len - 1) * s_len..];
        tail[s_len - 1] = lp(t_len - 1, aug[s_len - 1]);
        if s_len > 1 {
            tail[s_len - 2] = lp(t_len - 1, aug[s_len - 2]);
        }
    }
    for t in (0..t_len - 1).rev() {
        let (cur, next) = beta.split_at_mut((t + 1) * s_len);
        let cur = &mut cur[t * s_len..];
        let next = &next[..s_len];
        for s in 0..s_len {
            let stay = if merge || aug[s] == BLANK {
                next[s]
            } else {
                f64::NEG_INFINITY
            };
            let step = if s + 1 < s_len {
                next[s + 1]
            } else {
                f64::NEG_INFINITY
            };
            let skip_ok = s + 2 < s_len
                && aug[s] != BLANK
                && if merge { aug[s] != aug[s + 2] } else { true };
            let skip = if skip_ok { next[s + 2] } else { f64::NEG_INFINITY };
            let acc = lse3(stay, step, skip);
            cur[s] = if acc == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                acc + lp(t, aug[s])
            };
        }
    }

    // dloss/dlogit[t][k] = y[t][k] - Q(t,k) / (P * y[t][k]) with
    // Q(t,k) = sum over states emitting k of alpha*beta.
    let mut grad = vec![0.0; t_len * classes];
    for t in 0..t_len {
        let a_row = &alpha[t * s_len..(t + 1) * s_len];
        let b_row = &beta[t * s_len..(t + 1) * s_len];
        let mut log_q = vec![f64::NEG_INFINITY; classes];
        for s in 0..s_len {
            let ab = a_row[s] + b_row[s];
            if ab != f64::NEG_INFINITY {
                log_q[aug[s]] = lse2(log_q[aug[s]], ab);
            }
        }
        let y_row = probs.row(t);
        let g_row = &mut grad[t * classes..(t + 1) * classes];
        for k in 0..classes {
            let y = y_row[k];
            g_row[k] = if log_q[k] == f64::NEG_INFINITY {
                y
            } else {
                y - (log_q[k] - log_p - y.ln()).exp()
            };
        }
    }

    Ok((-log_p, grad))
}

/// Collapses a frame path to its label sequence under `variant`.
pub fn collapse_path(path: &[usize], variant: CtcVariant) -> Vec<usize> {
    let mut out = Vec::new();
    match variant {
        CtcVariant::Merge => {
            let mut last = BLANK;
            for &k in path {
                if k != BLANK && k != last {
                    out.push(k);
                }
                last = k;
            }
        }
        CtcVariant::NoMerge => {
            out.extend(path.iter().copied().filter(|&k| k != BLANK));
        }
    }
    out
}

/// Greedy decoder: per-frame argmax (ties to the lowest index) followed by
/// the variant's collapse rule.
pub fn ctc_greedy_decode(probs: &ProbMatrix, variant: CtcVariant) -> LabelSeq {
    LabelSeq::from_raw(collapse_path(&probs.argmax_frames(), variant))
}

const ORACLE_PATH_LIMIT: f64 = 1e7;

/// Path-enumeration oracle: sums the probability of every frame path whose
/// collapse equals `labels`. Test-scale only; refuses above `10^7` paths.
pub fn ctc_brute_force(
    probs: &ProbMatrix,
    labels: &LabelSeq,
    variant: CtcVariant,
) -> Result<f64> {
    let t_len = probs.frames();
    let classes = probs.classes();
    let paths = (classes as f64).powi(t_len as i32);
    if paths > ORACLE_PATH_LIMIT {
        return Err(Error::OracleTooLarge {
            paths,
            limit: ORACLE_PATH_LIMIT,
        });
    }
    if t_len == 0 {
        return Ok(if labels.is_empty() { 1.0 } else { 0.0 });
    }

    let target = labels.as_slice();
    let mut total = 0.0;
    let mut path = vec![0usize; t_len];
    loop {
        if collapse_path(&path, variant) == target {
            let p: f64 = path
                .iter()
                .enumerate()
                .map(|(t, &k)| probs.row(t)[k])
                .product();
            total += p;
        }
        // Odometer increment over base-`classes` digits.
        let mut pos = t_len;
        loop {
            if pos == 0 {
                return Ok(total);
            }
            pos -= 1;
            path[pos] += 1;
            if path[pos] < classes {
                break;
            }
            path[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(frames: usize, classes: usize) -> ProbMatrix {
        ProbMatrix::from_vec(
            frames,
            classes,
            vec![1.0 / classes as f64; frames * classes],
        )
        .unwrap()
    }

    fn random_probs(rng: &mut ChaCha8Rng, frames: usize, classes: usize) -> ProbMatrix {
        let mut data = Vec::with_capacity(frames * classes);
        for _ in 0..frames {
            let row: Vec<f64> = (0..classes).map(|_| rng.gen_range(0.05..1.0)).collect();
            let sum: f64 = row.iter().sum();
            data.extend(row.into_iter().map(|v| v / sum));
        }
        ProbMatrix::from_vec(frames, classes, data).unwrap()
    }

    #[test]
    fn uniform_single_label_merge() {
        // Paths over 2 frames collapsing to "a": {_a, a_, aa} -> 3/4.
        let probs = uniform(2, 2);
        let labels = LabelSeq::from_raw(vec![1]);
        let (loss, _) = ctc_loss(&probs, &labels, CtcVariant::Merge).unwrap();
        assert!((loss - (-0.75_f64.ln())).abs() < 1e-12);
        let p = ctc_brute_force(&probs, &labels, CtcVariant::Merge).unwrap();
        assert!((p - 0.75).abs() < 1e-12);
    }

    #[test]
    fn repeated_label_needs_room_under_merge() {
        let probs = uniform(2, 2);
        let labels = LabelSeq::from_raw(vec![1, 1]);
        match ctc_loss(&probs, &labels, CtcVariant::Merge) {
            Err(Error::LineTooShort { needed: 3, got: 2, .. }) => {}
            other => panic!("expected LineTooShort, got {other:?}"),
        }
        // Same instance under no-merge: single path "aa" -> 1/4.
        let (loss, _) = ctc_loss(&probs, &labels, CtcVariant::NoMerge).unwrap();
        assert!((loss - (-0.25_f64.ln())).abs() < 1e-12);
        let p = ctc_brute_force(&probs, &labels, CtcVariant::NoMerge).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
    }

    #[test]
    fn one_hot_valid_path_has_zero_loss() {
        // Frames emit _, a, b: a valid path for "ab" under both variants.
        let probs = ProbMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let labels = LabelSeq::from_raw(vec![1, 2]);
        for variant in [CtcVariant::Merge, CtcVariant::NoMerge] {
            let (loss, _) = ctc_loss(&probs, &labels, variant).unwrap();
            assert!(loss.abs() < 1e-12, "variant {variant:?}: loss {loss}");
            assert_eq!(
                ctc_greedy_decode(&probs, variant).as_slice(),
                labels.as_slice()
            );
        }
    }

    #[test]
    fn labels_longer_than_frames_impossible_under_no_merge() {
        let probs = uniform(2, 3);
        let labels = LabelSeq::from_raw(vec![1, 2, 1]);
        let p = ctc_brute_force(&probs, &labels, CtcVariant::NoMerge).unwrap();
        assert_eq!(p, 0.0);
        assert!(matches!(
            ctc_loss(&probs, &labels, CtcVariant::NoMerge),
            Err(Error::LineTooShort { .. })
        ));
    }

    #[test]
    fn total_probability_over_all_sequences_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let probs = random_probs(&mut rng, 3, 3);
        for variant in [CtcVariant::Merge, CtcVariant::NoMerge] {
            // Group every path by its collapse and sum the group masses.
            let mut total = 0.0;
            let mut seen = std::collections::BTreeSet::new();
            let classes = probs.classes();
            for idx in 0..classes.pow(3) {
                let path = [idx / (classes * classes), (idx / classes) % classes, idx % classes];
                let seq = collapse_path(&path, variant);
                if seen.insert(seq.clone()) {
                    total += ctc_brute_force(&probs, &LabelSeq::from_raw(seq), variant).unwrap();
                }
            }
            assert!((total - 1.0).abs() < 1e-9, "variant {variant:?}: {total}");
        }
    }

    #[test]
    fn forward_backward_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..60 {
            let frames = rng.gen_range(1..=6);
            let classes = rng.gen_range(2..=4);
            let label_len = rng.gen_range(0..=3.min(frames));
            let labels = LabelSeq::from_raw(
                (0..label_len).map(|_| rng.gen_range(1..classes)).collect(),
            );
            let probs = random_probs(&mut rng, frames, classes);
            for variant in [CtcVariant::Merge, CtcVariant::NoMerge] {
                if frames < min_path_length(&labels, variant) {
                    assert!(ctc_loss(&probs, &labels, variant).is_err());
                    continue;
                }
                let (loss, _) = ctc_loss(&probs, &labels, variant).unwrap();
                let p = ctc_brute_force(&probs, &labels, variant).unwrap();
                assert!(
                    ((-loss).exp() - p).abs() <= 1e-9,
                    "case {case} {variant:?}: exp(-loss)={} oracle={}",
                    (-loss).exp(),
                    p
                );
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences_through_softmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let softmax = |logits: &[f64], frames: usize, classes: usize| {
            let mut data = vec![0.0; logits.len()];
            for t in 0..frames {
                let row = &logits[t * classes..(t + 1) * classes];
                let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = row.iter().map(|v| (v - m).exp()).collect();
                let sum: f64 = exps.iter().sum();
                for k in 0..classes {
                    data[t * classes + k] = exps[k] / sum;
                }
            }
            ProbMatrix::from_vec(frames, classes, data).unwrap()
        };
        for variant in [CtcVariant::Merge, CtcVariant::NoMerge] {
            let (frames, classes) = (5, 4);
            let mut logits: Vec<f64> = (0..frames * classes)
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let labels = LabelSeq::from_raw(vec![1, 2, 2]);
            let probs = softmax(&logits, frames, classes);
            let (_, grad) = ctc_loss(&probs, &labels, variant).unwrap();
            let eps = 1e-4;
            for i in 0..logits.len() {
                let orig = logits[i];
                logits[i] = orig + eps;
                let (lp, _) =
                    ctc_loss(&softmax(&logits, frames, classes), &labels, variant).unwrap();
                logits[i] = orig - eps;
                let (lm, _) =
                    ctc_loss(&softmax(&logits, frames, classes), &labels, variant).unwrap();
                logits[i] = orig;
                let fd = (lp - lm) / (2.0 * eps);
                let denom = grad[i].abs().max(fd.abs()).max(1e-8);
                assert!(
                    (grad[i] - fd).abs() / denom <= 1e-3,
                    "{variant:?} logit {i}: analytic {} vs fd {}",
                    grad[i],
                    fd
                );
            }
        }
    }

    #[test]
    fn greedy_decode_collapse_rules() {
        // Frame argmaxes a, a, _, a.
        let probs = ProbMatrix::from_rows(&[
            vec![0.1, 0.9],
            vec![0.2, 0.8],
            vec![0.6, 0.4],
            vec![0.3, 0.7],
        ])
        .unwrap();
        assert_eq!(
            ctc_greedy_decode(&probs, CtcVariant::Merge).as_slice(),
            &[1, 1]
        );

        let all_blank =
            ProbMatrix::from_rows(&[vec![0.9, 0.1], vec![0.9, 0.1], vec![0.9, 0.1]]).unwrap();
        assert!(ctc_greedy_decode(&all_blank, CtcVariant::Merge).is_empty());

        // Frame argmaxes a, a.
        let two_a = ProbMatrix::from_rows(&[vec![0.1, 0.9], vec![0.2, 0.8]]).unwrap();
        assert_eq!(
            ctc_greedy_decode(&two_a, CtcVariant::NoMerge).as_slice(),
            &[1, 1]
        );
        assert_eq!(
            ctc_greedy_decode(&two_a, CtcVariant::Merge).as_slice(),
            &[1]
        );
    }

    #[test]
    fn argmax_tie_breaks_to_lowest_index() {
        let probs = ProbMatrix::from_rows(&[vec![0.25, 0.25, 0.25, 0.25]]).unwrap();
        assert_eq!(probs.argmax_frames(), vec![0]);
    }

    #[test]
    fn loss_finite_for_tiny_probabilities() {
        let p = 1e-30;
        let rest = (1.0 - p) / 1.0;
        let probs = ProbMatrix::from_rows(&[vec![rest, p], vec![rest, p]]).unwrap();
        let labels = LabelSeq::from_raw(vec![1]);
        let (loss, grad) = ctc_loss(&probs, &labels, CtcVariant::Merge).unwrap();
        assert!(loss.is_finite());
        assert!(grad.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn empty_labels_score_blank_paths() {
        let probs = ProbMatrix::from_rows(&[vec![0.7, 0.3], vec![0.6, 0.4]]).unwrap();
        let labels = LabelSeq::from_raw(vec![]);
        let (loss, _) = ctc_loss(&probs, &labels, CtcVariant::Merge).unwrap();
        assert!((loss - (-(0.7_f64 * 0.6).ln())).abs() < 1e-12);
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let probs = uniform(20, 10);
        let labels = LabelSeq::from_raw(vec![1]);
        assert!(matches!(
            ctc_brute_force(&probs, &labels, CtcVariant::Merge),
            Err(Error::OracleTooLarge { .. })
        ));
    }
}
