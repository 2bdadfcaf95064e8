//! 2-D convolution and its transpose, via im2col/col2im plus GEMM.
//!
//! Layout conventions: activations are `[B, C, H, W]`, kernels `[F, C, kh, kw]`,
//! all row-major. The transposed convolution is the exact linear adjoint of the
//! forward convolution with the same kernel, stride, and padding; an
//! `output_padding` in `0..stride` selects which of the stride-ambiguous input
//! heights the adjoint targets.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::tensor::Tensor;

/// Kernel size, stride, and (possibly asymmetric) zero padding of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeom {
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    pub pad_top: usize,
    pub pad_bottom: usize,
    pub pad_left: usize,
    pub pad_right: usize,
}

impl ConvGeom {
    /// Symmetric padding on all sides.
    pub fn symmetric(kh: usize, kw: usize, stride: usize, padding: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::config("stride must be >= 1"));
        }
        if kh == 0 || kw == 0 {
            return Err(Error::config("kernel dimensions must be >= 1"));
        }
        Ok(ConvGeom {
            kh,
            kw,
            stride,
            pad_top: padding,
            pad_bottom: padding,
            pad_left: padding,
            pad_right: padding,
        })
    }

    /// "Same"-style padding: floor(k/2) on each side for odd kernels; even
    /// kernels put the extra row/column on the bottom/right. With stride `s`
    /// this maps height `h` to `ceil(h/s)`.
    pub fn same(kh: usize, kw: usize, stride: usize) -> Result<Self> {
        let mut g = ConvGeom::symmetric(kh, kw, stride, 0)?;
        g.pad_top = (kh - 1) / 2;
        g.pad_bottom = kh / 2;
        g.pad_left = (kw - 1) / 2;
        g.pad_right = kw / 2;
        Ok(g)
    }

    /// Forward output size: floor((h + pads - k)/stride) + 1.
    pub fn out_hw(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        let hp = h + self.pad_top + self.pad_bottom;
        let wp = w + self.pad_left + self.pad_right;
        if self.kh > hp || self.kw > wp {
            return Err(Error::dim(format!(
                "kernel {}x{} exceeds padded input {}x{}",
                self.kh, self.kw, hp, wp
            )));
        }
        Ok(((hp - self.kh) / self.stride + 1, (wp - self.kw) / self.stride + 1))
    }

    /// Transposed output size: (h-1)*stride - pads + k + output_padding.
    pub fn transpose_out_hw(
        &self,
        h: usize,
        w: usize,
        output_padding: usize,
    ) -> Result<(usize, usize)> {
        if output_padding >= self.stride {
            return Err(Error::config(format!(
                "output_padding {} must be < stride {}",
                output_padding, self.stride
            )));
        }
        let oh = ((h - 1) * self.stride + self.kh + output_padding)
            .checked_sub(self.pad_top + self.pad_bottom)
            .ok_or_else(|| Error::dim("transposed output height underflows".into()))?;
        let ow = ((w - 1) * self.stride + self.kw + output_padding)
            .checked_sub(self.pad_left + self.pad_right)
            .ok_or_else(|| Error::dim("transposed output width underflows".into()))?;
        if oh == 0 || ow == 0 {
            return Err(Error::dim("transposed output has a zero dimension".into()));
        }
        Ok((oh, ow))
    }
}

fn check_4d<E: Scalar>(t: &Tensor<E>, what: &str) -> Result<[usize; 4]> {
    match t.shape() {
        [a, b, c, d] => Ok([*a, *b, *c, *d]),
        s => Err(Error::dim(format!("{what} must be 4-D, got {s:?}"))),
    }
}

/// Gather one sample's patches into a `[C*kh*kw, oh*ow]` column matrix.
#[allow(clippy::too_many_arguments)]
fn im2col<E: Scalar>(
    x: &[E],
    c: usize,
    h: usize,
    w: usize,
    g: &ConvGeom,
    oh: usize,
    ow: usize,
    col: &mut [E],
) {
    let plane = h * w;
    let ohw = oh * ow;
    let mut row = 0usize;
    for ci in 0..c {
        let xc = &x[ci * plane..(ci + 1) * plane];
        for ki in 0..g.kh {
            for kj in 0..g.kw {
                let dst = &mut col[row * ohw..(row + 1) * ohw];
                row += 1;
                for oy in 0..oh {
                    let iy = (oy * g.stride + ki) as isize - g.pad_top as isize;
                    let dst_row = &mut dst[oy * ow..(oy + 1) * ow];
                    if iy < 0 || iy >= h as isize {
                        for v in dst_row.iter_mut() {
                            *v = E::ZERO;
                        }
                        continue;
                    }
                    let src_row = &xc[iy as usize * w..(iy as usize + 1) * w];
                    for (ox, v) in dst_row.iter_mut().enumerate() {
                        let ix = (ox * g.stride + kj) as isize - g.pad_left as isize;
                        *v = if ix < 0 || ix >= w as isize {
                            E::ZERO
                        } else {
                            src_row[ix as usize]
                        };
                    }
                }
            }
        }
    }
}

/// Adjoint of `im2col`: scatter-add columns back onto the image plane.
#[allow(clippy::too_many_arguments)]
fn col2im<E: Scalar>(
    col: &[E],
    c: usize,
    h: usize,
    w: usize,
    g: &ConvGeom,
    oh: usize,
    ow: usize,
    x: &mut [E],
) {
    let plane = h * w;
    let ohw = oh * ow;
    let mut row = 0usize;
    for ci in 0..c {
        let xc = &mut x[ci * plane..(ci + 1) * plane];
        for ki in 0..g.kh {
            for kj in 0..g.kw {
                let src = &col[row * ohw..(row + 1) * ohw];
                row += 1;
                for oy in 0..oh {
                    let iy = (oy * g.stride + ki) as isize - g.pad_top as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let dst_row = &mut xc[iy as usize * w..(iy as usize + 1) * w];
                    let src_row = &src[oy * ow..(oy + 1) * ow];
                    for (ox, &v) in src_row.iter().enumerate() {
                        let ix = (ox * g.stride + kj) as isize - g.pad_left as isize;
                        if ix >= 0 && (ix as usize) < w {
                            dst_row[ix as usize] += v;
                        }
                    }
                }
            }
        }
    }
}

fn kernel_dims<E: Scalar>(k: &Tensor<E>, g: &ConvGeom) -> Result<(usize, usize)> {
    let [f, c, kh, kw] = check_4d(k, "kernel")?;
    if kh != g.kh || kw != g.kw {
        return Err(Error::dim(format!(
            "kernel spatial dims {kh}x{kw} disagree with geometry {}x{}",
            g.kh, g.kw
        )));
    }
    Ok((f, c))
}

/// Forward convolution: `[B,C,H,W] * [F,C,kh,kw] -> [B,F,H',W']`.
pub fn conv2d<E: Scalar>(x: &Tensor<E>, k: &Tensor<E>, g: &ConvGeom) -> Result<Tensor<E>> {
    let [b, c, h, w] = check_4d(x, "conv2d input")?;
    let (f, kc) = kernel_dims(k, g)?;
    if kc != c {
        return Err(Error::dim(format!(
            "kernel expects {kc} input channels, input has {c}"
        )));
    }
    let (oh, ow) = g.out_hw(h, w)?;
    let ck = c * g.kh * g.kw;
    let ohw = oh * ow;
    let mut col = vec![E::ZERO; ck * ohw];
    let mut out = Tensor::zeros([b, f, oh, ow]);
    let in_stride = c * h * w;
    let out_stride = f * ohw;
    for bi in 0..b {
        im2col(
            &x.data()[bi * in_stride..(bi + 1) * in_stride],
            c,
            h,
            w,
            g,
            oh,
            ow,
            &mut col,
        );
        // out_b[F, ohw] = K[F, ck] . col[ck, ohw]
        unsafe {
            E::gemm(
                f,
                ck,
                ohw,
                E::ONE,
                k.data().as_ptr(),
                ck as isize,
                1,
                col.as_ptr(),
                ohw as isize,
                1,
                E::ZERO,
                out.data_mut()[bi * out_stride..].as_mut_ptr(),
                ohw as isize,
                1,
            );
        }
    }
    Ok(out)
}

/// Transposed convolution: `[B,F,H,W] * [F,C,kh,kw] -> [B,C,H'',W'']`.
///
/// Exact adjoint of [`conv2d`]: for all `a`, `b`,
/// `<conv2d(a,K), b> == <a, conv2d_transpose(b,K)>` when the shapes
/// correspond under the same geometry.
pub fn conv2d_transpose<E: Scalar>(
    x: &Tensor<E>,
    k: &Tensor<E>,
    g: &ConvGeom,
    output_padding: usize,
) -> Result<Tensor<E>> {
    let [b, f, h, w] = check_4d(x, "conv2d_transpose input")?;
    let (kf, c) = kernel_dims(k, g)?;
    if kf != f {
        return Err(Error::dim(format!(
            "kernel expects {kf} input feature maps, input has {f}"
        )));
    }
    let (oh, ow) = g.transpose_out_hw(h, w, output_padding)?;
    // Sanity: the adjoint direction must reproduce (h, w).
    let (rh, rw) = g.out_hw(oh, ow)?;
    if (rh, rw) != (h, w) {
        return Err(Error::dim(format!(
            "transpose geometry inconsistent: {oh}x{ow} convolves to {rh}x{rw}, expected {h}x{w}"
        )));
    }
    let ck = c * g.kh * g.kw;
    let hw = h * w;
    let mut col = vec![E::ZERO; ck * hw];
    let mut out = Tensor::zeros([b, c, oh, ow]);
    let in_stride = f * hw;
    let out_stride = c * oh * ow;
    for bi in 0..b {
        // col[ck, hw] = K^T[ck, f] . x_b[f, hw]
        unsafe {
            E::gemm(
                ck,
                f,
                hw,
                E::ONE,
                k.data().as_ptr(),
                1,
                ck as isize,
                x.data()[bi * in_stride..].as_ptr(),
                hw as isize,
                1,
                E::ZERO,
                col.as_mut_ptr(),
                hw as isize,
                1,
            );
        }
        col2im(
            &col,
            c,
            oh,
            ow,
            g,
            h,
            w,
            &mut out.data_mut()[bi * out_stride..(bi + 1) * out_stride],
        );
    }
    Ok(out)
}

/// Gradients of [`conv2d`] w.r.t. input and kernel.
pub fn conv2d_backward<E: Scalar>(
    x: &Tensor<E>,
    k: &Tensor<E>,
    dy: &Tensor<E>,
    g: &ConvGeom,
) -> Result<(Tensor<E>, Tensor<E>)> {
    let [b, c, h, w] = check_4d(x, "conv2d input")?;
    let (f, _) = kernel_dims(k, g)?;
    let (oh, ow) = g.out_hw(h, w)?;
    let ck = c * g.kh * g.kw;
    let ohw = oh * ow;
    let mut col = vec![E::ZERO; ck * ohw];
    let mut dx = Tensor::zeros([b, c, h, w]);
    let mut dk = Tensor::zeros(k.shape().to_vec());
    let in_stride = c * h * w;
    let out_stride = f * ohw;
    for bi in 0..b {
        let dy_b = dy.data()[bi * out_stride..].as_ptr();
        // dK[f, ck] += dy_b[f, ohw] . col^T[ohw, ck]
        im2col(
            &x.data()[bi * in_stride..(bi + 1) * in_stride],
            c,
            h,
            w,
            g,
            oh,
            ow,
            &mut col,
        );
        unsafe {
            E::gemm(
                f,
                ohw,
                ck,
                E::ONE,
                dy_b,
                ohw as isize,
                1,
                col.as_ptr(),
                1,
                ohw as isize,
                E::ONE,
                dk.data_mut().as_mut_ptr(),
                ck as isize,
                1,
            );
            // colg[ck, ohw] = K^T . dy_b, then scatter back to dx.
            E::gemm(
                ck,
                f,
                ohw,
                E::ONE,
                k.data().as_ptr(),
                1,
                ck as isize,
                dy_b,
                ohw as isize,
                1,
                E::ZERO,
                col.as_mut_ptr(),
                ohw as isize,
                1,
            );
        }
        col2im(
            &col,
            c,
            h,
            w,
            g,
            oh,
            ow,
            &mut dx.data_mut()[bi * in_stride..(bi + 1) * in_stride],
        );
    }
    Ok((dx, dk))
}

/// Gradients of [`conv2d_transpose`] w.r.t. input and kernel.
pub fn conv2d_transpose_backward<E: Scalar>(
    x: &Tensor<E>,
    k: &Tensor<E>,
    dy: &Tensor<E>,
    g: &ConvGeom,
) -> Result<(Tensor<E>, Tensor<E>)> {
    let [b, f, h, w] = check_4d(x, "conv2d_transpose input")?;
    let (_, c) = kernel_dims(k, g)?;
    let [_, _, oh, ow] = check_4d(dy, "conv2d_transpose output gradient")?;
    let ck = c * g.kh * g.kw;
    let hw = h * w;
    let mut col = vec![E::ZERO; ck * hw];
    let mut dx = Tensor::zeros([b, f, h, w]);
    let mut dk = Tensor::zeros(k.shape().to_vec());
    let in_stride = f * hw;
    let out_stride = c * oh * ow;
    for bi in 0..b {
        im2col(
            &dy.data()[bi * out_stride..(bi + 1) * out_stride],
            c,
            oh,
            ow,
            g,
            h,
            w,
            &mut col,
        );
        unsafe {
            // dx_b[f, hw] = K[f, ck] . col[ck, hw]
            E::gemm(
                f,
                ck,
                hw,
                E::ONE,
                k.data().as_ptr(),
                ck as isize,
                1,
                col.as_ptr(),
                hw as isize,
                1,
                E::ZERO,
                dx.data_mut()[bi * in_stride..].as_mut_ptr(),
                hw as isize,
                1,
            );
            // dK[f, ck] += x_b[f, hw] . col^T[hw, ck]
            E::gemm(
                f,
                hw,
                ck,
                E::ONE,
                x.data()[bi * in_stride..].as_ptr(),
                hw as isize,
                1,
                col.as_ptr(),
                1,
                hw as isize,
                E::ONE,
                dk.data_mut().as_mut_ptr(),
                ck as isize,
                1,
            );
        }
    }
    Ok((dx, dk))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, uniform};

    fn rand_tensor(shape: &[usize], rng: &mut rand_chacha::ChaCha8Rng) -> Tensor<f64> {
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect();
        Tensor::new(shape.to_vec(), data).unwrap()
    }

    /// Direct 6-loop convolution, the independence oracle for the GEMM path.
    fn conv2d_naive(x: &Tensor<f64>, k: &Tensor<f64>, g: &ConvGeom) -> Tensor<f64> {
        let [b, c, h, w] = [x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]];
        let f = k.shape()[0];
        let (oh, ow) = g.out_hw(h, w).unwrap();
        let mut out = Tensor::zeros([b, f, oh, ow]);
        for bi in 0..b {
            for fi in 0..f {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut acc = 0.0;
                        for ci in 0..c {
                            for ki in 0..g.kh {
                                for kj in 0..g.kw {
                                    let iy = (oy * g.stride + ki) as isize - g.pad_top as isize;
                                    let ix = (ox * g.stride + kj) as isize - g.pad_left as isize;
                                    if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                        continue;
                                    }
                                    let xv = x.data()
                                        [((bi * c + ci) * h + iy as usize) * w + ix as usize];
                                    let kv =
                                        k.data()[((fi * c + ci) * g.kh + ki) * g.kw + kj];
                                    acc += xv * kv;
                                }
                            }
                        }
                        out.data_mut()[((bi * f + fi) * oh + oy) * ow + ox] = acc;
                    }
                }
            }
        }
        out
    }

    fn dot(a: &Tensor<f64>, b: &Tensor<f64>) -> f64 {
        a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn all_ones_window_sum() {
        let x = Tensor::filled([1, 1, 3, 3], 1.0);
        let k = Tensor::filled([1, 1, 3, 3], 1.0);
        let g = ConvGeom::symmetric(3, 3, 1, 0).unwrap();
        let y = conv2d(&x, &k, &g).unwrap();
        assert_eq!(y.shape(), &[1, 1, 1, 1]);
        assert_eq!(y.data()[0], 9.0);
    }

    #[test]
    fn dirac_kernel_is_identity() {
        let mut rng = stream_rng(1, 1);
        let x = rand_tensor(&[2, 1, 5, 7], &mut rng);
        let mut k = Tensor::zeros([1, 1, 3, 3]);
        k.data_mut()[4] = 1.0; // center tap
        let g = ConvGeom::symmetric(3, 3, 1, 1).unwrap();
        let y = conv2d(&x, &k, &g).unwrap();
        assert_eq!(y.shape(), x.shape());
        for (a, b) in x.data().iter().zip(y.data()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn strided_conv_matches_naive_oracle() {
        let mut rng = stream_rng(2, 1);
        let x = rand_tensor(&[1, 1, 6, 6], &mut rng);
        let k = rand_tensor(&[1, 1, 3, 3], &mut rng);
        let g = ConvGeom::symmetric(3, 3, 2, 0).unwrap();
        let fast = conv2d(&x, &k, &g).unwrap();
        let slow = conv2d_naive(&x, &k, &g);
        assert_eq!(fast.shape(), slow.shape());
        for (a, b) in fast.data().iter().zip(slow.data()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn random_configs_match_naive_oracle() {
        let mut rng = stream_rng(3, 1);
        for trial in 0..30 {
            let b = 1 + (trial % 2);
            let c = 1 + (trial % 3);
            let f = 1 + (trial % 4);
            let kh = 1 + (trial % 4);
            let kw = 1 + ((trial / 2) % 4);
            let stride = 1 + (trial % 3);
            let pad = trial % 3;
            let h = kh + 3 + (trial % 5);
            let w = kw + 2 + (trial % 4);
            let x = rand_tensor(&[b, c, h, w], &mut rng);
            let k = rand_tensor(&[f, c, kh, kw], &mut rng);
            let g = ConvGeom::symmetric(kh, kw, stride, pad).unwrap();
            let fast = conv2d(&x, &k, &g).unwrap();
            let slow = conv2d_naive(&x, &k, &g);
            for (a, b) in fast.data().iter().zip(slow.data()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transpose_broadcasts_scalar_through_kernel() {
        let x = Tensor::new([1, 1, 1, 1], vec![5.0]).unwrap();
        let k = Tensor::filled([1, 1, 3, 3], 1.0);
        let g = ConvGeom::symmetric(3, 3, 1, 0).unwrap();
        let y = conv2d_transpose(&x, &k, &g, 0).unwrap();
        assert_eq!(y.shape(), &[1, 1, 3, 3]);
        for &v in y.data() {
            assert_eq!(v, 5.0);
        }
    }

    #[test]
    fn transpose_stride2_block_placement() {
        // 2x2 input scattered through a 2x2 kernel at stride 2: disjoint blocks.
        let x = Tensor::new([1, 1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let k = Tensor::new([1, 1, 2, 2], vec![10.0, 20.0, 30.0, 40.0]).unwrap();
        let g = ConvGeom::symmetric(2, 2, 2, 0).unwrap();
        let y = conv2d_transpose(&x, &k, &g, 0).unwrap();
        assert_eq!(y.shape(), &[1, 1, 4, 4]);
        // scatter-add oracle
        let mut expect = [0.0f64; 16];
        for (i, &xv) in [1.0, 2.0, 3.0, 4.0].iter().enumerate() {
            let (iy, ix) = (i / 2 * 2, i % 2 * 2);
            for ki in 0..2 {
                for kj in 0..2 {
                    expect[(iy + ki) * 4 + ix + kj] += xv * k.data()[ki * 2 + kj];
                }
            }
        }
        assert_eq!(y.data(), &expect);
    }

    #[test]
    fn adjoint_identity_random_shapes() {
        let mut rng = stream_rng(4, 1);
        for trial in 0..40 {
            let b = 1 + (trial % 2);
            let c = 1 + (trial % 3);
            let f = 1 + ((trial / 3) % 3);
            let kh = 1 + (trial % 4);
            let kw = 1 + ((trial / 2) % 3);
            let stride = 1 + (trial % 3);
            let pad = trial % 2;
            let h = kh + 2 + (trial % 5);
            let w = kw + 1 + (trial % 6);
            let g = ConvGeom::symmetric(kh, kw, stride, pad).unwrap();
            let a = rand_tensor(&[b, c, h, w], &mut rng);
            let k = rand_tensor(&[f, c, kh, kw], &mut rng);
            let (oh, ow) = g.out_hw(h, w).unwrap();
            let y = rand_tensor(&[b, f, oh, ow], &mut rng);
            // output_padding recovers the exact input height from the floor.
            let (bh, _) = g.transpose_out_hw(oh, ow, 0).unwrap();
            let opad = h - bh;
            if opad >= stride {
                continue;
            }
            let lhs = dot(&conv2d(&a, &k, &g).unwrap(), &y);
            let rhs = dot(&a, &conv2d_transpose(&y, &k, &g, opad).unwrap());
            assert!(
                (lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()),
                "trial {trial}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn channel_mismatch_is_dimension_error() {
        let x = Tensor::<f64>::zeros([1, 2, 4, 4]);
        let k = Tensor::<f64>::zeros([1, 3, 3, 3]);
        let g = ConvGeom::symmetric(3, 3, 1, 0).unwrap();
        assert!(matches!(conv2d(&x, &k, &g), Err(Error::Dim(_))));
    }

    #[test]
    fn same_padding_halves_with_stride_2() {
        for (k, h) in [(30usize, 64usize), (15, 32), (9, 16), (3, 8), (5, 256)] {
            let g = ConvGeom::same(k, k, 2).unwrap();
            let (oh, _) = g.out_hw(h, h).unwrap();
            assert_eq!(oh, h / 2, "k={k} h={h}");
            // transpose with output_padding = stride-1 exactly doubles
            let (th, _) = g.transpose_out_hw(oh, oh, 1).unwrap();
            assert_eq!(th, h);
        }
    }
}
