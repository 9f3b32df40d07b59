//! Point sampling of an image with a separable kernel.

use crate::math;
use crate::{ImageGrid, SamplingKernel};

/// Value of `img` at real coordinates `(x, y)`.
///
/// Pixels outside the image contribute 0 (zero-padding boundary). Total on
/// finite inputs; coordinates may be arbitrarily far out of bounds.
pub fn sample_at(img: &ImageGrid, x: f64, y: f64, kernel: SamplingKernel) -> f64 {
    let r = kernel.support() as i64;
    let x0 = math::floor(x) as i64;
    let y0 = math::floor(y) as i64;
    let mut acc = 0.0;
    for j in y0 - r + 1..=y0 + r {
        let wy = kernel.value(y - j as f64);
        if wy == 0.0 {
            continue;
        }
        for i in x0 - r + 1..=x0 + r {
            let wx = kernel.value(x - i as f64);
            if wx == 0.0 {
                continue;
            }
            acc += wx * wy * img.get_padded(i as isize, j as isize);
        }
    }
    acc
}

/// Sampled value together with its partial derivatives w.r.t. `x` and `y`.
pub fn sample_with_grad(
    img: &ImageGrid,
    x: f64,
    y: f64,
    kernel: SamplingKernel,
) -> (f64, f64, f64) {
    let r = kernel.support() as i64;
    let x0 = math::floor(x) as i64;
    let y0 = math::floor(y) as i64;
    let (mut val, mut gx, mut gy) = (0.0, 0.0, 0.0);
    for j in y0 - r + 1..=y0 + r {
        let wy = kernel.value(y - j as f64);
        let dy = kernel.derivative(y - j as f64);
        for i in x0 - r + 1..=x0 + r {
            let wx = kernel.value(x - i as f64);
            let dx = kernel.derivative(x - i as f64);
            let p = img.get_padded(i as isize, j as isize);
            val += wx * wy * p;
            gx += dx * wy * p;
            gy += wx * dy * p;
        }
    }
    (val, gx, gy)
}
