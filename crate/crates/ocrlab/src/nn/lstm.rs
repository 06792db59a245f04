//! Bidirectional LSTM over `[T, F]` sequences. A standard cell (sigmoid
//! input/forget/output gates, tanh candidate, zero initial states) is run
//! once forward and once backward with independent parameters; the per-step
//! outputs are concatenated to `[T, 2N]`.
//!
//! Gate blocks along the `4N` axis are ordered `[input, forget, candidate,
//! output]`.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::ops::matmul_acc;

#[derive(Clone, Debug)]
pub struct LstmDirParams {
    /// Input weights `[F, 4N]`.
    pub wx: Tensor,
    /// Recurrent weights `[N, 4N]`.
    pub wh: Tensor,
    /// Bias `[4N]`.
    pub b: Tensor,
}

impl LstmDirParams {
    pub fn hidden(&self) -> usize {
        self.wh.shape()[0]
    }
}

#[derive(Clone, Debug)]
pub struct BlstmParams {
    pub fwd: LstmDirParams,
    pub bwd: LstmDirParams,
}

impl BlstmParams {
    pub fn hidden(&self) -> usize {
        self.fwd.hidden()
    }
}

/// Per-direction activations cached for backpropagation, indexed by time.
pub struct LstmDirCache {
    /// Post-activation gate values `[T, 4N]`.
    gates: Vec<f64>,
    /// Cell states `[T, N]`.
    c: Vec<f64>,
    /// `tanh(c)` `[T, N]`.
    hc: Vec<f64>,
    /// Hidden states `[T, N]`.
    h: Vec<f64>,
}

pub struct BlstmCache {
    fwd: LstmDirCache,
    bwd: LstmDirCache,
}

pub struct LstmDirGrads {
    pub dwx: Tensor,
    pub dwh: Tensor,
    pub db: Tensor,
}

pub struct BlstmGrads {
    pub fwd: LstmDirGrads,
    pub bwd: LstmDirGrads,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn scan_time(step: usize, t_len: usize, reverse: bool) -> usize {
    if reverse {
        t_len - 1 - step
    } else {
        step
    }
}

fn forward_dir(input: &Tensor, p: &LstmDirParams, reverse: bool) -> LstmDirCache {
    let (t_len, f_len) = (input.shape()[0], input.shape()[1]);
    let n = p.hidden();
    let g4 = 4 * n;

    // Input projections for the whole sequence in one pass.
    let mut pregates = vec![0.0; t_len * g4];
    for t in 0..t_len {
        pregates[t * g4..(t + 1) * g4].copy_from_slice(p.b.data());
    }
    matmul_acc(input.data(), t_len, f_len, p.wx.data(), g4, &mut pregates);

    let mut cache = LstmDirCache {
        gates: vec![0.0; t_len * g4],
        c: vec![0.0; t_len * n],
        hc: vec![0.0; t_len * n],
        h: vec![0.0; t_len * n],
    };
    let mut h_prev = vec![0.0; n];
    let mut c_prev = vec![0.0; n];
    let mut z = vec![0.0; g4];
    for step in 0..t_len {
        let t = scan_time(step, t_len, reverse);
        z.copy_from_slice(&pregates[t * g4..(t + 1) * g4]);
        for (pi, &hv) in h_prev.iter().enumerate() {
            if hv != 0.0 {
                let w_row = &p.wh.data()[pi * g4..(pi + 1) * g4];
                for (zv, &wv) in z.iter_mut().zip(w_row) {
                    *zv += hv * wv;
                }
            }
        }
        let gates = &mut cache.gates[t * g4..(t + 1) * g4];
        for j in 0..n {
            gates[j] = sigmoid(z[j]);
            gates[n + j] = sigmoid(z[n + j]);
            gates[2 * n + j] = z[2 * n + j].tanh();
            gates[3 * n + j] = sigmoid(z[3 * n + j]);
        }
        let c_row = &mut cache.c[t * n..(t + 1) * n];
        let hc_row = &mut cache.hc[t * n..(t + 1) * n];
        let h_row = &mut cache.h[t * n..(t + 1) * n];
        for j in 0..n {
            let cv = gates[n + j] * c_prev[j] + gates[j] * gates[2 * n + j];
            c_row[j] = cv;
            hc_row[j] = cv.tanh();
            h_row[j] = gates[3 * n + j] * hc_row[j];
        }
        h_prev.copy_from_slice(h_row);
        c_prev.copy_from_slice(c_row);
    }
    cache
}

fn check_input(input: &Tensor, p: &BlstmParams) -> Result<(usize, usize)> {
    let s = input.shape();
    if s.len() != 2 {
        return Err(Error::shape(format!("blstm input must be [T, F], got {s:?}")));
    }
    if s[0] == 0 {
        return Err(Error::shape("blstm input has zero timesteps"));
    }
    let f = p.fwd.wx.shape()[0];
    if s[1] != f {
        return Err(Error::shape(format!(
            "blstm expects {f} features, got {}",
            s[1]
        )));
    }
    Ok((s[0], s[1]))
}

/// Forward pass retaining the activations needed for backpropagation.
pub fn blstm_with_cache(input: &Tensor, p: &BlstmParams) -> Result<(Tensor, BlstmCache)> {
    let (t_len, _) = check_input(input, p)?;
    let n = p.hidden();
    let fwd = forward_dir(input, &p.fwd, false);
    let bwd = forward_dir(input, &p.bwd, true);
    let mut out = Tensor::zeros(&[t_len, 2 * n]);
    let od = out.data_mut();
    for t in 0..t_len {
        od[t * 2 * n..t * 2 * n + n].copy_from_slice(&fwd.h[t * n..(t + 1) * n]);
        od[t * 2 * n + n..(t + 1) * 2 * n].copy_from_slice(&bwd.h[t * n..(t + 1) * n]);
    }
    Ok((out, BlstmCache { fwd, bwd }))
}

/// Forward pass without gradient bookkeeping.
pub fn blstm(input: &Tensor, p: &BlstmParams) -> Result<Tensor> {
    blstm_with_cache(input, p).map(|(out, _)| out)
}

fn backward_dir(
    input: &Tensor,
    p: &LstmDirParams,
    cache: &LstmDirCache,
    dh_seq: &[f64],
    reverse: bool,
    dinput: &mut Tensor,
) -> LstmDirGrads {
    let (t_len, f_len) = (input.shape()[0], input.shape()[1]);
    let n = p.hidden();
    let g4 = 4 * n;
    let mut dwx = Tensor::zeros(p.wx.shape());
    let mut dwh = Tensor::zeros(p.wh.shape());
    let mut db = Tensor::zeros(p.b.shape());

    let mut dh_rec = vec![0.0; n];
    let mut dc_rec = vec![0.0; n];
    let mut dz = vec![0.0; g4];
    let id = input.data();
    let did = dinput.data_mut();
    for step in (0..t_len).rev() {
        let t = scan_time(step, t_len, reverse);
        let gates = &cache.gates[t * g4..(t + 1) * g4];
        let hc = &cache.hc[t * n..(t + 1) * n];
        let c_prev_row = if step > 0 {
            let tp = scan_time(step - 1, t_len, reverse);
            Some(&cache.c[tp * n..(tp + 1) * n])
        } else {
            None
        };
        for j in 0..n {
            let dh = dh_seq[t * n + j] + dh_rec[j];
            let (i, f, g, o) = (gates[j], gates[n + j], gates[2 * n + j], gates[3 * n + j]);
            let d_o = dh * hc[j];
            let dc = dh * o * (1.0 - hc[j] * hc[j]) + dc_rec[j];
            let d_i = dc * g;
            let d_g = dc * i;
            let c_prev = c_prev_row.map_or(0.0, |r| r[j]);
            let d_f = dc * c_prev;
            dz[j] = d_i * i * (1.0 - i);
            dz[n + j] = d_f * f * (1.0 - f);
            dz[2 * n + j] = d_g * (1.0 - g * g);
            dz[3 * n + j] = d_o * o * (1.0 - o);
            dc_rec[j] = dc * f;
        }
        for (bv, &dzv) in db.data_mut().iter_mut().zip(&dz) {
            *bv += dzv;
        }
        // dwx += x_t^T (x) dz ; dx_t = dz . wx^T
        let x_row = &id[t * f_len..(t + 1) * f_len];
        let dx_row = &mut did[t * f_len..(t + 1) * f_len];
        let dwx_d = dwx.data_mut();
        let wx_d = p.wx.data();
        for fi in 0..f_len {
            let xv = x_row[fi];
            let dw_row = &mut dwx_d[fi * g4..(fi + 1) * g4];
            let w_row = &wx_d[fi * g4..(fi + 1) * g4];
            let mut acc = 0.0;
            for u in 0..g4 {
                dw_row[u] += xv * dz[u];
                acc += w_row[u] * dz[u];
            }
            dx_row[fi] += acc;
        }
        if step > 0 {
            let tp = scan_time(step - 1, t_len, reverse);
            let h_prev = &cache.h[tp * n..(tp + 1) * n];
            let dwh_d = dwh.data_mut();
            let wh_d = p.wh.data();
            for pi in 0..n {
                let hv = h_prev[pi];
                let dw_row = &mut dwh_d[pi * g4..(pi + 1) * g4];
                let w_row = &wh_d[pi * g4..(pi + 1) * g4];
                let mut acc = 0.0;
                for u in 0..g4 {
                    dw_row[u] += hv * dz[u];
                    acc += w_row[u] * dz[u];
                }
                dh_rec[pi] = acc;
            }
        }
    }
    LstmDirGrads { dwx, dwh, db }
}

/// Backpropagation through both directions given `dout` of shape `[T, 2N]`.
/// Returns the input gradient and the parameter gradients.
pub fn blstm_backward(
    input: &Tensor,
    p: &BlstmParams,
    cache: &BlstmCache,
    dout: &Tensor,
) -> (Tensor, BlstmGrads) {
    let (t_len, _) = (input.shape()[0], input.shape()[1]);
    let n = p.hidden();
    let mut dh_fwd = vec![0.0; t_len * n];
    let mut dh_bwd = vec![0.0; t_len * n];
    let dod = dout.data();
    for t in 0..t_len {
        dh_fwd[t * n..(t + 1) * n].copy_from_slice(&dod[t * 2 * n..t * 2 * n + n]);
        dh_bwd[t * n..(t + 1) * n].copy_from_slice(&dod[t * 2 * n + n..(t + 1) * 2 * n]);
    }
    let mut dinput = Tensor::zeros(input.shape());
    let fwd = backward_dir(input, &p.fwd, &cache.fwd, &dh_fwd, false, &mut dinput);
    let bwd = backward_dir(input, &p.bwd, &cache.bwd, &dh_bwd, true, &mut dinput);
    (dinput, BlstmGrads { fwd, bwd })
}
