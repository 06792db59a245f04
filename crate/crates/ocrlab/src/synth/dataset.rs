//! On-disk dataset format: one binary PGM (`P5`, maxval 255) plus one
//! UTF-8 ground-truth file per line, and a JSON manifest.
//!
//! `line{NNNNNN}.pgm` stores ink as dark on a light background for human
//! viewing; the loader inverts back to ink = 1.0, background = 0.0.
//! `line{NNNNNN}.gt.txt` holds the transcription with no trailing newline.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::{DegradationParams, LineSample, LINE_HEIGHT};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub line_count: usize,
    pub seed: u64,
    pub height: usize,
    pub params: DegradationParams,
    pub alphabet: String,
    pub doubled_letter_lines: usize,
}

pub fn line_image_name(index: usize) -> String {
    format!("line{index:06}.pgm")
}

pub fn line_gt_name(index: usize) -> String {
    format!("line{index:06}.gt.txt")
}

/// Writes `image` (values in [0,1], ink = 1) as a binary PGM with ink dark.
pub fn write_pgm(path: &Path, image: &Tensor) -> Result<()> {
    let shape = image.shape();
    if shape.len() != 3 || shape[2] != 1 {
        return Err(Error::shape(format!(
            "PGM writer expects [H, W, 1], got {shape:?}"
        )));
    }
    let (h, w) = (shape[0], shape[1]);
    let mut bytes = Vec::with_capacity(32 + h * w);
    bytes.extend_from_slice(format!("P5\n{w} {h}\n255\n").as_bytes());
    for &v in image.data() {
        let dark = ((1.0 - v.clamp(0.0, 1.0)) * 255.0).round() as u8;
        bytes.push(dark);
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads a binary PGM back into an `[H, W, 1]` tensor with ink = 1.
pub fn read_pgm(path: &Path) -> Result<Tensor> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let corrupt = |context: &str| Error::Corrupt {
        path: path.to_path_buf(),
        context: context.into(),
    };
    if !bytes.starts_with(b"P5") {
        return Err(corrupt("not a binary PGM (missing P5 magic)"));
    }
    // Header: three whitespace-separated fields after the magic.
    let mut pos = 2usize;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(corrupt("malformed PGM header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| corrupt("malformed PGM header"))?;
    }
    let (w, h, maxval) = (fields[0], fields[1], fields[2]);
    if maxval != 255 {
        return Err(corrupt("PGM maxval must be 255"));
    }
    pos += 1; // single whitespace after maxval
    if bytes.len() < pos + w * h {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            context: format!("expected {} pixels, got {}", w * h, bytes.len() - pos),
        });
    }
    let data: Vec<f64> = bytes[pos..pos + w * h]
        .iter()
        .map(|&b| 1.0 - b as f64 / 255.0)
        .collect();
    Tensor::from_vec(&[h, w, 1], data)
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join("manifest.json");
    let content = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&content)?)
}

pub fn write_sample(dir: &Path, index: usize, sample: &LineSample) -> Result<()> {
    write_pgm(&dir.join(line_image_name(index)), &sample.image)?;
    let gt = dir.join(line_gt_name(index));
    fs::write(&gt, sample.text.as_bytes()).map_err(|e| Error::io(&gt, e))
}

/// Loads every `line*.pgm` / `line*.gt.txt` pair, ordered by filename.
pub fn load_dataset(dir: &Path) -> Result<Vec<LineSample>> {
    let mut image_paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "pgm")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("line"))
        })
        .collect();
    image_paths.sort();
    let mut samples = Vec::with_capacity(image_paths.len());
    for img_path in image_paths {
        let gt_path = img_path.with_extension("").with_extension("gt.txt");
        let text = fs::read_to_string(&gt_path).map_err(|e| Error::io(&gt_path, e))?;
        let image = read_pgm(&img_path)?;
        if image.shape()[0] != LINE_HEIGHT {
            return Err(Error::Corrupt {
                path: img_path,
                context: format!(
                    "line height {} does not match the canonical {}",
                    image.shape()[0],
                    LINE_HEIGHT
                ),
            });
        }
        samples.push(LineSample {
            image,
            text: text.trim_end_matches('\n').to_string(),
        });
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_roundtrip_quantizes_to_one_part_in_255() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        let img = Tensor::from_vec(&[2, 3, 1], vec![0.0, 1.0, 0.5, 0.25, 0.75, 0.1]).unwrap();
        write_pgm(&path, &img).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(back.shape(), &[2, 3, 1]);
        for (a, b) in back.data().iter().zip(img.data()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
        // Exact roundtrip once quantized.
        write_pgm(&path, &back).unwrap();
        let again = read_pgm(&path).unwrap();
        assert_eq!(again, back);
    }

    #[test]
    fn read_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pgm");
        std::fs::write(&path, b"P6\n1 1\n255\nX").unwrap();
        assert!(matches!(read_pgm(&path), Err(Error::Corrupt { .. })));
        std::fs::write(&path, b"P5\n4 4\n255\nab").unwrap();
        assert!(matches!(read_pgm(&path), Err(Error::Truncated { .. })));
    }
}
