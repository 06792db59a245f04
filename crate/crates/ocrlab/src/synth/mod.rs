//! Deterministic synthetic text-line corpus: glyph rendering with
//! controlled degradations, word sampling, dataset generation, and fold
//! splitting. The whole corpus is a pure function of (seed, params,
//! line count).

pub mod dataset;
pub mod font;

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub use dataset::{load_dataset, read_manifest, Manifest};

/// Canonical rendered line height in pixels.
pub const LINE_HEIGHT: usize = 32;
/// Horizontal advance per glyph (8 px cell + 1 px spacing).
const ADVANCE: usize = font::GLYPH_W + 1;
const MARGIN: usize = 3;
/// Glyphs sit at rows 8..24 of the 32-row canvas.
const GLYPH_TOP: isize = 8;

/// A rendered grayscale line (values in [0,1], ink = 1) and its
/// transcription.
#[derive(Clone, Debug)]
pub struct LineSample {
    pub image: Tensor,
    pub text: String,
}

/// Degradation knobs. All zero (and `smooth_width <= 1`) renders a clean
/// bitmap concatenation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradationParams {
    /// Max horizontal glyph displacement in pixels.
    pub jitter_px: f64,
    /// Sinusoidal baseline wave amplitude in pixels.
    pub baseline_amp: f64,
    /// Baseline wave period in pixels.
    pub baseline_period: f64,
    /// Standard deviation of additive Gaussian noise.
    pub noise_std: f64,
    /// Per-pixel probability of a salt-or-pepper flip.
    pub salt_pepper: f64,
    /// Box smoothing kernel width; <= 1 disables smoothing.
    pub smooth_width: usize,
    pub seed: u64,
}

impl Default for DegradationParams {
    fn default() -> Self {
        DegradationParams {
            jitter_px: 0.0,
            baseline_amp: 0.0,
            baseline_period: 64.0,
            noise_std: 0.0,
            salt_pepper: 0.0,
            smooth_width: 1,
            seed: 0,
        }
    }
}

impl DegradationParams {
    pub fn validate(&self) -> Result<()> {
        if self.jitter_px < 0.0
            || self.baseline_amp < 0.0
            || self.noise_std < 0.0
            || !(0.0..=1.0).contains(&self.salt_pepper)
        {
            return Err(Error::config("degradation amplitudes must be nonnegative"));
        }
        if self.baseline_amp > 0.0 && self.baseline_period <= 0.0 {
            return Err(Error::config(
                "baseline wave needs a positive period when enabled",
            ));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> DegradationParams {
        DegradationParams {
            seed,
            ..self.clone()
        }
    }
}

/// splitmix64-style mixer used to derive per-line rng streams.
pub(crate) fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standalone Gaussian sampler so the noise statistics can be checked
/// directly.
pub fn gaussian_noise(rng: &mut ChaCha8Rng, std: f64, count: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, std).expect("std validated nonnegative");
    (0..count).map(|_| normal.sample(rng)).collect()
}

/// Renders `text` with the embedded font: glyphs composited left to right
/// with per-glyph horizontal jitter and a sinusoidal baseline offset, then
/// box smoothing, additive Gaussian noise (clipped to [0,1]) and
/// salt-and-pepper flips. Identical (text, params) give identical pixels.
pub fn render_line(text: &str, params: &DegradationParams) -> Result<LineSample> {
    params.validate()?;
    if text.is_empty() {
        return Err(Error::config("cannot render an empty text line"));
    }
    let chars: Vec<char> = text.chars().collect();
    for &c in &chars {
        if !font::supports(c) {
            return Err(Error::UnsupportedChar {
                ch: c,
                context: "not in the embedded font".into(),
            });
        }
    }

    let jitter_pad = params.jitter_px.ceil() as usize;
    let width = 2 * (MARGIN + jitter_pad) + chars.len() * ADVANCE - 1;
    let mut canvas = vec![0.0f64; LINE_HEIGHT * width];
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let phase = if params.baseline_amp > 0.0 {
        rng.gen_range(0.0..TAU)
    } else {
        0.0
    };

    let mut cursor = (MARGIN + jitter_pad) as isize;
    for &c in &chars {
        let dx = if params.jitter_px > 0.0 {
            rng.gen_range(-params.jitter_px..=params.jitter_px).round() as isize
        } else {
            0
        };
        let x0 = cursor + dx;
        let dy = if params.baseline_amp > 0.0 {
            let center = x0 as f64 + font::GLYPH_W as f64 / 2.0;
            (params.baseline_amp * (TAU * center / params.baseline_period + phase).sin()).round()
                as isize
        } else {
            0
        };
        let glyph = font::glyph(c).expect("checked above");
        for (gy, row) in glyph.iter().enumerate() {
            let y = GLYPH_TOP + gy as isize + dy;
            if y < 0 || y >= LINE_HEIGHT as isize {
                continue;
            }
            for gx in 0..font::GLYPH_W {
                if row & (1 << (7 - gx)) != 0 {
                    let x = x0 + gx as isize;
                    if x >= 0 && x < width as isize {
                        canvas[y as usize * width + x as usize] = 1.0;
                    }
                }
            }
        }
        cursor += ADVANCE as isize;
    }

    if params.smooth_width > 1 {
        canvas = box_smooth(&canvas, LINE_HEIGHT, width, params.smooth_width);
    }
    if params.noise_std > 0.0 {
        let noise = gaussian_noise(&mut rng, params.noise_std, canvas.len());
        for (v, n) in canvas.iter_mut().zip(noise) {
            *v = (*v + n).clamp(0.0, 1.0);
        }
    }
    if params.salt_pepper > 0.0 {
        for v in canvas.iter_mut() {
            if rng.gen::<f64>() < params.salt_pepper {
                *v = if rng.gen::<bool>() { 1.0 } else { 0.0 };
            }
        }
    }

    Ok(LineSample {
        image: Tensor::from_vec(&[LINE_HEIGHT, width, 1], canvas)?,
        text: text.to_string(),
    })
}

/// Separable box mean with edge clamping.
fn box_smooth(data: &[f64], h: usize, w: usize, width: usize) -> Vec<f64> {
    let half = width / 2;
    let mut horiz = vec![0.0; data.len()];
    for y in 0..h {
        for x in 0..w {
            let lo = x.saturating_sub(half);
            let hi = (x + half).min(w - 1);
            let sum: f64 = (lo..=hi).map(|xx| data[y * w + xx]).sum();
            horiz[y * w + x] = sum / (hi - lo + 1) as f64;
        }
    }
    let mut out = vec![0.0; data.len()];
    for y in 0..h {
        let lo = y.saturating_sub(half);
        let hi = (y + half).min(h - 1);
        for x in 0..w {
            let sum: f64 = (lo..=hi).map(|yy| horiz[yy * w + x]).sum();
            out[y * w + x] = sum / (hi - lo + 1) as f64;
        }
    }
    out
}

/// Word sampler for ground-truth lines. Doubled-letter words are carried as
/// a separate pool so corpora can guarantee their quota.
#[derive(Clone, Debug)]
pub struct TextSource {
    plain: Vec<&'static str>,
    doubled: Vec<&'static str>,
    words_per_line: (usize, usize),
}

/// True if the text contains a doubled letter (space excluded).
pub fn has_doubled_letter(text: &str) -> bool {
    let chars: Vec<char> = text.chars().collect();
    chars
        .windows(2)
        .any(|w| w[0] == w[1] && w[0] != ' ')
}

impl TextSource {
    /// Eight-letter alphabet {a,e,l,n,o,r,s,t} plus space.
    pub fn small_alphabet() -> TextSource {
        TextSource {
            plain: vec![
                "not", "ten", "rose", "lane", "star", "stone", "alert", "learn", "solar",
                "tenor", "slate", "ornate", "reason", "salt", "lantern", "art", "nest",
            ],
            doubled: vec![
                "letter", "error", "otter", "tall", "sell", "steel", "soon", "loose",
                "rattle", "arrest",
            ],
            words_per_line: (2, 3),
        }
    }

    /// Wider lowercase alphabet.
    pub fn full_alphabet() -> TextSource {
        TextSource {
            plain: vec![
                "the", "quick", "brown", "fox", "jumps", "over", "lazy", "dog", "print",
                "early", "book", "line", "image", "text", "model", "vote", "train", "fold",
                "char", "word",
            ],
            doubled: vec![
                "letter", "coffee", "error", "bubble", "pepper", "cotton", "hammer",
                "kettle", "street", "butter", "school", "tunnel",
            ],
            words_per_line: (2, 4),
        }
    }

    /// Every line contains at least one doubled-letter word.
    pub fn doubled_heavy() -> TextSource {
        TextSource {
            plain: vec!["not", "ten", "rose", "lane", "star"],
            doubled: TextSource::small_alphabet().doubled,
            words_per_line: (2, 3),
        }
    }

    pub fn alphabet(&self) -> BTreeSet<char> {
        let mut set: BTreeSet<char> = self
            .plain
            .iter()
            .chain(self.doubled.iter())
            .flat_map(|w| w.chars())
            .collect();
        set.insert(' ');
        set
    }

    fn any_word(&self, rng: &mut ChaCha8Rng) -> &'static str {
        let total = self.plain.len() + self.doubled.len();
        let i = rng.gen_range(0..total);
        if i < self.plain.len() {
            self.plain[i]
        } else {
            self.doubled[i - self.plain.len()]
        }
    }

    /// One line of words; `force_doubled` guarantees a doubled-letter word.
    pub fn sample_line(&self, rng: &mut ChaCha8Rng, force_doubled: bool) -> String {
        let (lo, hi) = self.words_per_line;
        let n = rng.gen_range(lo..=hi);
        let mut words: Vec<&str> = (0..n).map(|_| self.any_word(rng)).collect();
        if force_doubled && !words.iter().any(|w| has_doubled_letter(w)) {
            let replacement = self.doubled[rng.gen_range(0..self.doubled.len())];
            let slot = rng.gen_range(0..words.len());
            words[slot] = replacement;
        }
        words.join(" ")
    }
}

/// Generates `line_count` rendered lines into `dir` and writes the
/// manifest. Every 10th line is forced to contain a doubled-letter word, so
/// at least 10% of the corpus exercises repeated-character decoding.
pub fn generate_corpus(
    dir: &Path,
    line_count: usize,
    source: &TextSource,
    params: &DegradationParams,
) -> Result<Manifest> {
    if line_count == 0 {
        return Err(Error::config("corpus needs at least one line"));
    }
    params.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut doubled_lines = 0usize;
    for i in 0..line_count {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(params.seed, i as u64));
        let text = source.sample_line(&mut rng, i % 10 == 0);
        if has_doubled_letter(&text) {
            doubled_lines += 1;
        }
        let line_params = params.with_seed(mix_seed(params.seed ^ 0x5EED, i as u64));
        let sample = render_line(&text, &line_params)?;
        dataset::write_sample(dir, i, &sample)?;
    }
    let manifest = Manifest {
        line_count,
        seed: params.seed,
        height: LINE_HEIGHT,
        params: params.clone(),
        alphabet: source.alphabet().into_iter().collect(),
        doubled_letter_lines: doubled_lines,
    };
    dataset::write_manifest(dir, &manifest)?;
    Ok(manifest)
}

/// Five (by default) disjoint index lists over the training subset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub folds: Vec<Vec<usize>>,
}

impl FoldSplit {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Validation indices of fold `i`.
    pub fn validation_of(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// Training indices of fold `i`: every other fold, in fold order.
    pub fn train_of(&self, fold: usize) -> Vec<usize> {
        self.folds
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect()
    }

    pub fn total_len(&self) -> usize {
        self.folds.iter().map(Vec::len).sum()
    }
}

/// Shuffles `0..n_samples`, carves off a disjoint evaluation set, then
/// deals the next `train_size` indices round-robin into `k` folds (sizes
/// differ by at most 1). Deterministic in the seed.
pub fn split_dataset(
    n_samples: usize,
    train_size: usize,
    eval_size: usize,
    k: usize,
    seed: u64,
) -> Result<(FoldSplit, Vec<usize>)> {
    if train_size + eval_size > n_samples {
        return Err(Error::InsufficientSamples {
            requested: train_size + eval_size,
            available: n_samples,
        });
    }
    if k == 0 || train_size < k {
        return Err(Error::config(format!(
            "cannot split {train_size} training lines into {k} folds"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n_samples).collect();
    // Fisher-Yates.
    for i in (1..indices.len()).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
    let eval: Vec<usize> = indices[..eval_size].to_vec();
    let mut folds: Vec<Vec<usize>> = vec![Vec::with_capacity(train_size / k + 1); k];
    for (pos, &idx) in indices[eval_size..eval_size + train_size].iter().enumerate() {
        folds[pos % k].push(idx);
    }
    Ok((FoldSplit { folds }, eval))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_render_is_exact_bitmap_concatenation() {
        let params = DegradationParams::default();
        let sample = render_line("ab", &params).unwrap();
        let (h, w) = (sample.image.shape()[0], sample.image.shape()[1]);
        assert_eq!(h, LINE_HEIGHT);
        assert_eq!(w, 2 * MARGIN + 2 * ADVANCE - 1);
        // Compare against direct glyph stamping.
        for (ci, c) in "ab".chars().enumerate() {
            let glyph = font::glyph(c).unwrap();
            for (gy, row) in glyph.iter().enumerate() {
                for gx in 0..font::GLYPH_W {
                    let expected = f64::from(row & (1 << (7 - gx)) != 0);
                    let x = MARGIN + ci * ADVANCE + gx;
                    let y = GLYPH_TOP as usize + gy;
                    assert_eq!(sample.image.data()[y * w + x], expected, "{c} at {gx},{gy}");
                }
            }
        }
    }

    #[test]
    fn rendering_is_deterministic_under_seed() {
        let params = DegradationParams {
            jitter_px: 1.0,
            baseline_amp: 2.0,
            baseline_period: 40.0,
            noise_std: 0.1,
            salt_pepper: 0.01,
            smooth_width: 3,
            seed: 99,
        };
        let a = render_line("noisy otter", &params).unwrap();
        let b = render_line("noisy otter", &params).unwrap();
        assert_eq!(a.image, b.image);
        let c = render_line("noisy otter", &params.with_seed(100)).unwrap();
        assert_ne!(a.image, c.image);
    }

    #[test]
    fn unsupported_character_is_named() {
        match render_line("naïve", &DegradationParams::default()) {
            Err(Error::UnsupportedChar { ch: 'ï', .. }) => {}
            other => panic!("expected UnsupportedChar, got {other:?}"),
        }
    }

    #[test]
    fn noise_sample_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let samples = gaussian_noise(&mut rng, 0.1, 10_000);
        let mean: f64 = samples.iter().sum::<f64>() / samples.len() as f64;
        let var: f64 =
            samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / samples.len() as f64;
        let std = var.sqrt();
        assert!((std - 0.1).abs() <= 0.01, "std {std}");
        assert!(mean.abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn corpus_generation_writes_everything_and_respects_quota() {
        let dir = tempfile::tempdir().unwrap();
        let source = TextSource::small_alphabet();
        let params = DegradationParams::default().with_seed(7);
        let manifest = generate_corpus(dir.path(), 60, &source, &params).unwrap();
        assert_eq!(manifest.line_count, 60);
        assert!(manifest.doubled_letter_lines * 20 >= 60, "need >= 5%");

        let samples = load_dataset(dir.path()).unwrap();
        assert_eq!(samples.len(), 60);
        let doubled = samples.iter().filter(|s| has_doubled_letter(&s.text)).count();
        assert_eq!(doubled, manifest.doubled_letter_lines);
        for s in &samples {
            assert!(!s.text.is_empty());
            assert_eq!(s.image.shape()[0], LINE_HEIGHT);
        }
    }

    #[test]
    fn corpus_is_byte_deterministic() {
        let source = TextSource::small_alphabet();
        let params = DegradationParams {
            noise_std: 0.05,
            jitter_px: 1.0,
            ..DegradationParams::default()
        }
        .with_seed(123);
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        generate_corpus(dir_a.path(), 8, &source, &params).unwrap();
        generate_corpus(dir_b.path(), 8, &source, &params).unwrap();
        for i in 0..8 {
            let name = dataset::line_image_name(i);
            let a = std::fs::read(dir_a.path().join(&name)).unwrap();
            let b = std::fs::read(dir_b.path().join(&name)).unwrap();
            assert_eq!(a, b, "{name}");
        }
        // Different seed changes texts but keeps the alphabet.
        let dir_c = tempfile::tempdir().unwrap();
        generate_corpus(dir_c.path(), 8, &source, &params.with_seed(124)).unwrap();
        let a = load_dataset(dir_a.path()).unwrap();
        let c = load_dataset(dir_c.path()).unwrap();
        assert_ne!(
            a.iter().map(|s| s.text.clone()).collect::<Vec<_>>(),
            c.iter().map(|s| s.text.clone()).collect::<Vec<_>>()
        );
        let alpha = source.alphabet();
        for s in &c {
            assert!(s.text.chars().all(|ch| alpha.contains(&ch)));
        }
    }

    #[test]
    fn fold_partition_laws() {
        for &train in &[60usize, 100, 150, 250, 500, 1000] {
            let n = train + 210;
            let (split, eval) = split_dataset(n, train, 200, 5, 42).unwrap();
            assert_eq!(split.k(), 5);
            assert_eq!(eval.len(), 200);
            assert_eq!(split.total_len(), train);
            // Pairwise disjoint, disjoint from eval, sizes within 1.
            let mut seen = std::collections::HashSet::new();
            for f in &split.folds {
                for &i in f {
                    assert!(seen.insert(i), "index {i} in two folds");
                    assert!(!eval.contains(&i));
                }
            }
            let sizes: Vec<usize> = split.folds.iter().map(Vec::len).collect();
            let (min, max) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            assert!(max - min <= 1, "{sizes:?}");
            // Train view of fold 0 has everything outside fold 0.
            let train0 = split.train_of(0);
            assert_eq!(train0.len(), train - split.folds[0].len());
        }
    }

    #[test]
    fn split_is_deterministic_and_validates() {
        let a = split_dataset(300, 250, 40, 5, 9).unwrap();
        let b = split_dataset(300, 250, 40, 5, 9).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            split_dataset(100, 90, 20, 5, 0),
            Err(Error::InsufficientSamples { requested: 110, available: 100 })
        ));
        assert!(split_dataset(100, 3, 5, 5, 0).is_err());
    }

    #[test]
    fn preset_sixty_line_split_shapes() {
        let (split, eval) = split_dataset(270, 60, 200, 5, 1).unwrap();
        assert!(split.folds.iter().all(|f| f.len() == 12));
        assert_eq!(split.train_of(2).len(), 48);
        assert_eq!(eval.len(), 200);
    }
}
