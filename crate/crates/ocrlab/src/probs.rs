//! Per-timestep posterior distributions over the codec: the output of a
//! network forward pass and the input to CTC loss/decoding.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ProbMatrix {
    frames: usize,
    classes: usize,
    data: Vec<f64>,
}

impl ProbMatrix {
    pub fn from_vec(frames: usize, classes: usize, data: Vec<f64>) -> Result<ProbMatrix> {
        if frames * classes != data.len() {
            return Err(Error::shape(format!(
                "prob matrix {}x{} needs {} values, got {}",
                frames,
                classes,
                frames * classes,
                data.len()
            )));
        }
        Ok(ProbMatrix {
            frames,
            classes,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<ProbMatrix> {
        let frames = rows.len();
        let classes = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(frames * classes);
        for r in rows {
            if r.len() != classes {
                return Err(Error::shape("ragged prob matrix rows"));
            }
            data.extend_from_slice(r);
        }
        ProbMatrix::from_vec(frames, classes, data)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.classes..(t + 1) * self.classes]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Per-frame argmax; ties resolve to the lowest label index.
    pub fn argmax_frames(&self) -> Vec<usize> {
        (0..self.frames)
            .map(|t| {
                let row = self.row(t);
                let mut best = 0usize;
                for (k, &v) in row.iter().enumerate().skip(1) {
                    if v > row[best] {
                        best = k;
                    }
                }
                best
            })
            .collect()
    }
}
