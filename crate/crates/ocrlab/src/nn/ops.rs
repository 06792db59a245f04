//! Forward and backward kernels for the individual layer operations.
//!
//! Layout conventions: images are `[H, W, C]` row-major with channels
//! contiguous, sequences `[T, F]` with the time axis equal to the image
//! width axis, conv kernels `[kh, kw, cin, cout]`, dense weights
//! `[in, out]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::probs::ProbMatrix;
use crate::tensor::Tensor;

/// `out[m,n] += a[m,k] * b[k,n]`
pub(crate) fn matmul_acc(a: &[f64], m: usize, k: usize, b: &[f64], n: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        let a_row = &a[i * k..(i + 1) * k];
        let o_row = &mut out[i * n..(i + 1) * n];
        for (p, &av) in a_row.iter().enumerate() {
            if av != 0.0 {
                let b_row = &b[p * n..(p + 1) * n];
                for (o, &bv) in o_row.iter_mut().zip(b_row) {
                    *o += av * bv;
                }
            }
        }
    }
}

/// 2D convolution with zero padding sized so output extents equal input
/// extents (stride 1). No activation is applied here.
pub fn conv2d(input: &Tensor, weights: &Tensor, bias: &[f64]) -> Result<Tensor> {
    let [h, w, cin] = dims3(input, "conv input")?;
    let ws = weights.shape();
    if ws.len() != 4 {
        return Err(Error::shape(format!(
            "conv weights must be [kh, kw, cin, cout], got {ws:?}"
        )));
    }
    let (kh, kw, wcin, cout) = (ws[0], ws[1], ws[2], ws[3]);
    if kh % 2 == 0 || kw % 2 == 0 {
        return Err(Error::config(format!("conv kernel {kh}x{kw} must be odd")));
    }
    if wcin != cin {
        return Err(Error::config(format!(
            "conv input has {cin} channels but weights expect {wcin}"
        )));
    }
    if bias.len() != cout {
        return Err(Error::config(format!(
            "conv bias has {} entries for {cout} filters",
            bias.len()
        )));
    }

    let (ph, pw) = (kh / 2, kw / 2);
    let mut out = Tensor::zeros(&[h, w, cout]);
    let od = out.data_mut();
    let id = input.data();
    let wd = weights.data();
    for y in 0..h {
        for x in 0..w {
            let o_row = &mut od[(y * w + x) * cout..(y * w + x + 1) * cout];
            o_row.copy_from_slice(bias);
            for dy in 0..kh {
                let iy = y + dy;
                if iy < ph || iy - ph >= h {
                    continue;
                }
                let iy = iy - ph;
                for dx in 0..kw {
                    let ix = x + dx;
                    if ix < pw || ix - pw >= w {
                        continue;
                    }
                    let ix = ix - pw;
                    let i_px = &id[(iy * w + ix) * cin..(iy * w + ix + 1) * cin];
                    let w_base = (dy * kw + dx) * cin * cout;
                    for (ci, &xv) in i_px.iter().enumerate() {
                        if xv != 0.0 {
                            let w_row = &wd[w_base + ci * cout..w_base + (ci + 1) * cout];
                            for (o, &wv) in o_row.iter_mut().zip(w_row) {
                                *o += xv * wv;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Backward pass of [`conv2d`]: gradients for the input, the kernel, and the
/// bias given `dout` of the same extents as the conv output.
pub fn conv2d_backward(
    input: &Tensor,
    weights: &Tensor,
    dout: &Tensor,
) -> Result<(Tensor, Tensor, Vec<f64>)> {
    let [h, w, cin] = dims3(input, "conv input")?;
    let ws = weights.shape();
    let (kh, kw, cout) = (ws[0], ws[1], ws[3]);
    let (ph, pw) = (kh / 2, kw / 2);

    let mut dinput = Tensor::zeros(input.shape());
    let mut dweights = Tensor::zeros(weights.shape());
    let mut dbias = vec![0.0; cout];
    let id = input.data();
    let wd = weights.data();
    let dod = dout.data();
    let did = dinput.data_mut();
    let dwd = dweights.data_mut();
    for y in 0..h {
        for x in 0..w {
            let g_row = &dod[(y * w + x) * cout..(y * w + x + 1) * cout];
            for (b, &g) in dbias.iter_mut().zip(g_row) {
                *b += g;
            }
            for dy in 0..kh {
                let iy = y + dy;
                if iy < ph || iy - ph >= h {
                    continue;
                }
                let iy = iy - ph;
                for dx in 0..kw {
                    let ix = x + dx;
                    if ix < pw || ix - pw >= w {
                        continue;
                    }
                    let ix = ix - pw;
                    let px = (iy * w + ix) * cin;
                    let w_base = (dy * kw + dx) * cin * cout;
                    for ci in 0..cin {
                        let xv = id[px + ci];
                        let w_row = &wd[w_base + ci * cout..w_base + (ci + 1) * cout];
                        let dw_row = &mut dwd[w_base + ci * cout..w_base + (ci + 1) * cout];
                        let mut dx_acc = 0.0;
                        for co in 0..cout {
                            let g = g_row[co];
                            dw_row[co] += xv * g;
                            dx_acc += w_row[co] * g;
                        }
                        did[px + ci] += dx_acc;
                    }
                }
            }
        }
    }
    Ok((dinput, dweights, dbias))
}

/// Max pooling with stride equal to the kernel. Ragged right/bottom windows
/// take the max over the cells that exist. Returns the pooled tensor and the
/// flat input index of each window maximum for exact backward routing.
pub fn maxpool(input: &Tensor, kernel: (usize, usize)) -> Result<(Tensor, Vec<usize>)> {
    let [h, w, ch] = dims3(input, "pool input")?;
    let (kh, kw) = kernel;
    if !(1..=2).contains(&kh) || !(1..=2).contains(&kw) {
        return Err(Error::config(format!(
            "pool kernel extents must be 1 or 2, got {kh}x{kw}"
        )));
    }
    let oh = h.div_ceil(kh);
    let ow = w.div_ceil(kw);
    let mut out = Tensor::zeros(&[oh, ow, ch]);
    let mut argmax = vec![0usize; oh * ow * ch];
    let id = input.data();
    let od = out.data_mut();
    for oy in 0..oh {
        for ox in 0..ow {
            for c in 0..ch {
                let mut best = f64::NEG_INFINITY;
                let mut best_i = usize::MAX;
                for dy in 0..kh {
                    let y = oy * kh + dy;
                    if y >= h {
                        break;
                    }
                    for dx in 0..kw {
                        let x = ox * kw + dx;
                        if x >= w {
                            break;
                        }
                        let i = (y * w + x) * ch + c;
                        if id[i] > best {
                            best = id[i];
                            best_i = i;
                        }
                    }
                }
                let o = (oy * ow + ox) * ch + c;
                od[o] = best;
                argmax[o] = best_i;
            }
        }
    }
    Ok((out, argmax))
}

/// Routes `dout` back to each window's argmax cell.
pub fn maxpool_backward(input_shape: &[usize], argmax: &[usize], dout: &Tensor) -> Tensor {
    let mut dinput = Tensor::zeros(input_shape);
    let did = dinput.data_mut();
    for (&src, &g) in argmax.iter().zip(dout.data()) {
        did[src] += g;
    }
    dinput
}

/// Inverted dropout: zeroes each element with probability `rate` and scales
/// survivors by `1/(1-rate)`, so inference needs no rescaling. The mask is a
/// pure function of the seed.
pub fn dropout_forward(input: &Tensor, rate: f64, seed: u64) -> Result<(Tensor, Vec<f64>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::config(format!("dropout rate {rate} not in [0, 1)")));
    }
    let mut mask = vec![1.0; input.len()];
    if rate > 0.0 {
        let scale = 1.0 / (1.0 - rate);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in &mut mask {
            *m = if rng.gen::<f64>() < rate { 0.0 } else { scale };
        }
    }
    let mut out = input.clone();
    for (o, &m) in out.data_mut().iter_mut().zip(&mask) {
        *o *= m;
    }
    Ok((out, mask))
}

pub fn dropout_backward(dout: &Tensor, mask: &[f64]) -> Tensor {
    let mut din = dout.clone();
    for (d, &m) in din.data_mut().iter_mut().zip(mask) {
        *d *= m;
    }
    din
}

/// Linear projection to `C` classes followed by a row-wise softmax with
/// max-subtraction. Returns the per-frame posterior distribution.
pub fn project_softmax(input: &Tensor, weights: &Tensor, bias: &[f64]) -> Result<ProbMatrix> {
    let logits = project_logits(input, weights, bias)?;
    let t = logits.shape()[0];
    let c = logits.shape()[1];
    let mut data = logits.data().to_vec();
    softmax_rows(&mut data, t, c);
    ProbMatrix::from_vec(t, c, data)
}

pub(crate) fn project_logits(input: &Tensor, weights: &Tensor, bias: &[f64]) -> Result<Tensor> {
    let [t, f] = dims2(input, "projection input")?;
    let ws = weights.shape();
    if ws.len() != 2 || ws[0] != f {
        return Err(Error::shape(format!(
            "projection weights {ws:?} do not accept {f} features"
        )));
    }
    let c = ws[1];
    if bias.len() != c {
        return Err(Error::config(format!(
            "projection bias has {} entries for {c} classes",
            bias.len()
        )));
    }
    let mut out = Tensor::zeros(&[t, c]);
    for row in 0..t {
        out.row_mut(row).copy_from_slice(bias);
    }
    matmul_acc(input.data(), t, f, weights.data(), c, out.data_mut());
    Ok(out)
}

pub(crate) fn softmax_rows(data: &mut [f64], rows: usize, cols: usize) {
    for r in 0..rows {
        let row = &mut data[r * cols..(r + 1) * cols];
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

/// Backward pass of the projection given `dlogits` (the CTC loss already
/// includes the softmax Jacobian in its gradient).
pub(crate) fn project_backward(
    input: &Tensor,
    weights: &Tensor,
    dlogits: &[f64],
) -> (Tensor, Tensor, Vec<f64>) {
    let (t, f) = (input.shape()[0], input.shape()[1]);
    let c = weights.shape()[1];
    let mut dweights = Tensor::zeros(weights.shape());
    let mut dbias = vec![0.0; c];
    let mut dinput = Tensor::zeros(input.shape());
    let id = input.data();
    let wd = weights.data();
    let dwd = dweights.data_mut();
    let did = dinput.data_mut();
    for row in 0..t {
        let g_row = &dlogits[row * c..(row + 1) * c];
        for (b, &g) in dbias.iter_mut().zip(g_row) {
            *b += g;
        }
        let x_row = &id[row * f..(row + 1) * f];
        let dx_row = &mut did[row * f..(row + 1) * f];
        for fi in 0..f {
            let w_row = &wd[fi * c..(fi + 1) * c];
            let dw_row = &mut dwd[fi * c..(fi + 1) * c];
            let xv = x_row[fi];
            let mut acc = 0.0;
            for ci in 0..c {
                dw_row[ci] += xv * g_row[ci];
                acc += w_row[ci] * g_row[ci];
            }
            dx_row[fi] += acc;
        }
    }
    (dinput, dweights, dbias)
}

pub(crate) fn relu_inplace(t: &mut Tensor) {
    for v in t.data_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// dpre = dout where pre > 0, else 0.
pub(crate) fn relu_backward(pre: &Tensor, dout: &Tensor) -> Tensor {
    let mut din = dout.clone();
    for (d, &p) in din.data_mut().iter_mut().zip(pre.data()) {
        if p <= 0.0 {
            *d = 0.0;
        }
    }
    din
}

fn dims3(t: &Tensor, what: &str) -> Result<[usize; 3]> {
    let s = t.shape();
    if s.len() != 3 {
        return Err(Error::shape(format!("{what} must be rank 3, got {s:?}")));
    }
    Ok([s[0], s[1], s[2]])
}

fn dims2(t: &Tensor, what: &str) -> Result<[usize; 2]> {
    let s = t.shape();
    if s.len() != 2 {
        return Err(Error::shape(format!("{what} must be rank 2, got {s:?}")));
    }
    Ok([s[0], s[1]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
        let len = shape.iter().product();
        Tensor::from_vec(shape, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    /// Direct quadruple-loop convolution, kept deliberately naive.
    fn conv_oracle(input: &Tensor, weights: &Tensor, bias: &[f64]) -> Tensor {
        let (h, w, cin) = (input.shape()[0], input.shape()[1], input.shape()[2]);
        let (kh, kw, cout) = (weights.shape()[0], weights.shape()[1], weights.shape()[3]);
        let mut out = Tensor::zeros(&[h, w, cout]);
        for y in 0..h as isize {
            for x in 0..w as isize {
                for co in 0..cout {
                    let mut acc = bias[co];
                    for dy in 0..kh as isize {
                        for dx in 0..kw as isize {
                            let iy = y + dy - (kh as isize) / 2;
                            let ix = x + dx - (kw as isize) / 2;
                            if iy < 0 || iy >= h as isize || ix < 0 || ix >= w as isize {
                                continue;
                            }
                            for ci in 0..cin {
                                let iv = input.data()
                                    [(iy as usize * w + ix as usize) * cin + ci];
                                let wv = weights.data()[((dy as usize * kw + dx as usize)
                                    * cin
                                    + ci)
                                    * cout
                                    + co];
                                acc += iv * wv;
                            }
                        }
                    }
                    out.data_mut()[(y as usize * w + x as usize) * cout + co] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn conv_zero_weights_yield_bias() {
        let input = Tensor::from_vec(&[1, 1, 1], vec![3.5]).unwrap();
        let weights = Tensor::zeros(&[3, 3, 1, 2]);
        let out = conv2d(&input, &weights, &[0.25, -1.5]).unwrap();
        assert_eq!(out.data(), &[0.25, -1.5]);
    }

    #[test]
    fn conv_identity_kernel_passes_input_through() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut input = random_tensor(&mut rng, &[4, 5, 1]);
        for v in input.data_mut() {
            *v = v.abs();
        }
        let mut weights = Tensor::zeros(&[3, 3, 1, 1]);
        // Center tap.
        weights.data_mut()[(1 * 3 + 1) * 1 * 1] = 1.0;
        let out = conv2d(&input, &weights, &[0.0]).unwrap();
        for (a, b) in out.data().iter().zip(input.data()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn conv_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let input = random_tensor(&mut rng, &[5, 7, 2]);
        let weights = random_tensor(&mut rng, &[3, 3, 2, 4]);
        let bias: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = conv2d(&input, &weights, &bias).unwrap();
        let slow = conv_oracle(&input, &weights, &bias);
        for (a, b) in fast.data().iter().zip(slow.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn conv_channel_mismatch_is_config_error() {
        let input = Tensor::zeros(&[2, 2, 3]);
        let weights = Tensor::zeros(&[3, 3, 2, 1]);
        assert!(matches!(
            conv2d(&input, &weights, &[0.0]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn pool_single_window() {
        let input = Tensor::from_vec(&[2, 2, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (out, argmax) = maxpool(&input, (2, 2)).unwrap();
        assert_eq!(out.shape(), &[1, 1, 1]);
        assert_eq!(out.data(), &[4.0]);
        assert_eq!(argmax, vec![3]);
    }

    #[test]
    fn pool_1x2_keeps_rows() {
        let input = Tensor::from_vec(
            &[2, 4, 1],
            vec![1.0, 5.0, 2.0, 0.0, 7.0, 3.0, 9.0, 8.0],
        )
        .unwrap();
        let (out, _) = maxpool(&input, (1, 2)).unwrap();
        assert_eq!(out.shape(), &[2, 2, 1]);
        assert_eq!(out.data(), &[5.0, 2.0, 7.0, 9.0]);
    }

    #[test]
    fn pool_matches_window_scan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let input = random_tensor(&mut rng, &[5, 5, 3]);
        let (out, _) = maxpool(&input, (2, 2)).unwrap();
        assert_eq!(out.shape(), &[3, 3, 3]);
        for oy in 0..3usize {
            for ox in 0..3usize {
                for c in 0..3usize {
                    let mut best = f64::NEG_INFINITY;
                    for dy in 0..2 {
                        for dx in 0..2 {
                            let (y, x) = (oy * 2 + dy, ox * 2 + dx);
                            if y < 5 && x < 5 {
                                best = best.max(input.data()[(y * 5 + x) * 3 + c]);
                            }
                        }
                    }
                    assert_eq!(out.data()[(oy * 3 + ox) * 3 + c], best);
                }
            }
        }
    }

    #[test]
    fn pool_backward_routes_to_argmax() {
        let input = Tensor::from_vec(&[2, 2, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (out, argmax) = maxpool(&input, (2, 2)).unwrap();
        let dout = Tensor::from_vec(out.shape(), vec![5.0]).unwrap();
        let din = maxpool_backward(input.shape(), &argmax, &dout);
        assert_eq!(din.data(), &[0.0, 0.0, 0.0, 5.0]);
    }

    #[test]
    fn pool_rejects_large_kernels() {
        let input = Tensor::zeros(&[4, 4, 1]);
        assert!(maxpool(&input, (3, 1)).is_err());
    }

    #[test]
    fn dropout_rate_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let input = random_tensor(&mut rng, &[4, 6]);
        let (out, mask) = dropout_forward(&input, 0.0, 123).unwrap();
        assert_eq!(out, input);
        assert!(mask.iter().all(|&m| m == 1.0));
    }

    #[test]
    fn dropout_mask_is_seed_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let input = random_tensor(&mut rng, &[10, 10]);
        let (a, mask_a) = dropout_forward(&input, 0.5, 99).unwrap();
        let (b, mask_b) = dropout_forward(&input, 0.5, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(mask_a, mask_b);
        let (_, mask_c) = dropout_forward(&input, 0.5, 100).unwrap();
        assert_ne!(mask_a, mask_c);
    }

    #[test]
    fn dropout_survivor_fraction_concentrates() {
        let input = Tensor::from_vec(&[100000], vec![1.0; 100000]).unwrap();
        let (_, mask) = dropout_forward(&input, 0.5, 7).unwrap();
        let survivors = mask.iter().filter(|&&m| m != 0.0).count();
        let frac = survivors as f64 / mask.len() as f64;
        assert!((frac - 0.5).abs() <= 0.01, "survivor fraction {frac}");
    }

    #[test]
    fn dropout_rejects_rate_one() {
        let input = Tensor::zeros(&[2]);
        assert!(dropout_forward(&input, 1.0, 0).is_err());
    }

    #[test]
    fn softmax_zero_logits_row_is_uniform() {
        let input = Tensor::zeros(&[1, 3]);
        let weights = Tensor::zeros(&[3, 4]);
        let probs = project_softmax(&input, &weights, &[0.0; 4]).unwrap();
        for &p in probs.row(0) {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let logits: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let shifted: Vec<f64> = logits.iter().map(|v| v + 17.5).collect();
        let mut a = logits.clone();
        softmax_rows(&mut a, 1, 4);
        let mut b = shifted;
        softmax_rows(&mut b, 1, 4);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_matches_direct_exp_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let input = random_tensor(&mut rng, &[3, 2]);
        let weights = random_tensor(&mut rng, &[2, 4]);
        let bias: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let probs = project_softmax(&input, &weights, &bias).unwrap();
        let logits = project_logits(&input, &weights, &bias).unwrap();
        for t in 0..3 {
            let row = logits.row(t);
            let sum: f64 = row.iter().map(|v| v.exp()).sum();
            for (k, &p) in probs.row(t).iter().enumerate() {
                assert!((p - row[k].exp() / sum).abs() < 1e-12);
            }
            let total: f64 = probs.row(t).iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
