//! Separable bicubic (Catmull-Rom) resampling with center-aligned
//! coordinates and an antialias prefilter when shrinking. Used for the
//! degradation chain, the backward-warp alignment baseline, and bicubic
//! reference upsampling.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, ImageGrid, Result, SamplingKernel};

/// Resizes to `out_w x out_h`. Per-pixel tap weights are renormalized so
/// constant images stay constant at every scale.
pub fn bicubic_resize(img: &ImageGrid, out_w: usize, out_h: usize) -> Result<ImageGrid> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidArgument("resize target must be >= 1 pixel"));
    }
    let (w, h) = img.dims();
    let horizontal = resample_axis(img.data(), w, h, out_w, true);
    let vertical = resample_axis(&horizontal, out_w, h, out_h, false);
    ImageGrid::new(out_w, out_h, vertical)
}

/// Bicubic upsample by an integer factor.
pub fn bicubic_upsample(img: &ImageGrid, alpha: usize) -> Result<ImageGrid> {
    if alpha < 1 {
        return Err(Error::InvalidArgument("upsample factor must be >= 1"));
    }
    bicubic_resize(img, img.width() * alpha, img.height() * alpha)
}

fn resample_axis(data: &[f64], w: usize, h: usize, out_len: usize, along_x: bool) -> Vec<f64> {
    let in_len = if along_x { w } else { h };
    let other = if along_x { h } else { w };
    let scale = in_len as f64 / out_len as f64;
    // widen the kernel by the scale factor when shrinking
    let filter_scale = scale.max(1.0);
    let support = 2.0 * filter_scale;
    let kernel = SamplingKernel::BicubicA;

    // per-output-index tap list is the same for every row/column
    let mut taps: Vec<(usize, usize, Vec<f64>)> = Vec::with_capacity(out_len);
    for o in 0..out_len {
        let center = (o as f64 + 0.5) * scale - 0.5;
        let lo = (math::ceil(center - support) as i64).max(0) as usize;
        let hi = (math::floor(center + support) as i64).min(in_len as i64 - 1) as usize;
        let mut weights = Vec::with_capacity(hi - lo + 1);
        let mut total = 0.0;
        for i in lo..=hi {
            let x = (i as f64 - center) / filter_scale;
            let wgt = kernel.value(x);
            total += wgt;
            weights.push(wgt);
        }
        for wgt in &mut weights {
            *wgt /= total;
        }
        taps.push((lo, hi, weights));
    }

    let (ow, oh) = if along_x { (out_len, other) } else { (other, out_len) };
    let mut out = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        for x in 0..ow {
            let (line, o) = if along_x { (y, x) } else { (x, y) };
            let (lo, hi, weights) = &taps[o];
            let mut acc = 0.0;
            for (i, wgt) in (*lo..=*hi).zip(weights) {
                let v = if along_x {
                    data[line * w + i]
                } else {
                    data[i * w + line]
                };
                acc += wgt * v;
            }
            out.push(acc);
        }
    }
    out
}
