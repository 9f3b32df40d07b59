//! PSNR and SSIM quality metrics.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, ImageGrid, Result};

/// Sentinel reported instead of +inf when the images are identical.
pub const PSNR_CAP_DB: f64 = 99.0;

/// Peak signal-to-noise ratio in dB, capped at [`PSNR_CAP_DB`].
pub fn psnr(a: &ImageGrid, b: &ImageGrid, peak: f64) -> Result<f64> {
    a.check_same_dims(b)?;
    if !(peak > 0.0) {
        return Err(Error::InvalidArgument("psnr peak must be positive"));
    }
    let n = a.data().len() as f64;
    let mse: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * math::log10(peak * peak / mse)).min(PSNR_CAP_DB))
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn ssim_window_weights() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as isize;
    let mut w = Vec::with_capacity(SSIM_WINDOW * SSIM_WINDOW);
    let mut total = 0.0;
    for j in -half..=half {
        for i in -half..=half {
            let g = math::exp(-((i * i + j * j) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA));
            w.push(g);
            total += g;
        }
    }
    for g in &mut w {
        *g /= total;
    }
    w
}

/// Mean structural similarity over all fully-interior 11x11 Gaussian
/// windows (sigma 1.5, K1 = 0.01, K2 = 0.03).
pub fn ssim(a: &ImageGrid, b: &ImageGrid, dynamic_range: f64) -> Result<f64> {
    a.check_same_dims(b)?;
    let (w, h) = a.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::OutOfBounds("image smaller than the SSIM window"));
    }
    if !(dynamic_range > 0.0) {
        return Err(Error::InvalidArgument("dynamic range must be positive"));
    }
    let c1 = (SSIM_K1 * dynamic_range) * (SSIM_K1 * dynamic_range);
    let c2 = (SSIM_K2 * dynamic_range) * (SSIM_K2 * dynamic_range);
    let weights = ssim_window_weights();
    let half = SSIM_WINDOW / 2;
    let mut acc = 0.0;
    let mut count = 0usize;
    for cy in half..h - half {
        for cx in half..w - half {
            let (mut mu_a, mut mu_b) = (0.0, 0.0);
            let (mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0);
            let mut wi = 0;
            for j in 0..SSIM_WINDOW {
                for i in 0..SSIM_WINDOW {
                    let x = a.get(cx - half + i, cy - half + j);
                    let y = b.get(cx - half + i, cy - half + j);
                    let wgt = weights[wi];
                    wi += 1;
                    mu_a += wgt * x;
                    mu_b += wgt * y;
                    aa += wgt * x * x;
                    bb += wgt * y * y;
                    ab += wgt * x * y;
                }
            }
            let var_a = aa - mu_a * mu_a;
            let var_b = bb - mu_b * mu_b;
            let cov = ab - mu_a * mu_b;
            let num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            let den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            acc += num / den;
            count += 1;
        }
    }
    Ok(acc / count as f64)
}
