//! Linear operators of the LR imaging model: decimation `S`, its transpose
//! (zero-upsampling), backward warp `W`, forward warp `Wᵀ`, and an optional
//! Gaussian blur `K`. Each operator has an exact adjoint under the global
//! zero-padding boundary policy; `materialize_operator` builds the dense
//! matrix of any of them at test scale so the adjoint pairs can be checked
//! column by column.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::sample::sample_at;
use crate::{Error, FlowField, ImageGrid, Result, SamplingKernel};

/// Positive integer decimation scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecimationFactor(usize);

impl DecimationFactor {
    pub fn new(alpha: usize) -> Result<Self> {
        if alpha < 1 {
            return Err(Error::InvalidArgument("decimation factor must be >= 1"));
        }
        Ok(Self(alpha))
    }

    pub fn get(&self) -> usize {
        self.0
    }
}

/// Truncated, normalized Gaussian blur.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurSpec {
    sigma: f64,
    radius: usize,
    weights: Vec<f64>,
}

impl BlurSpec {
    /// Gaussian with truncation radius `ceil(3 sigma)`.
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidArgument("blur sigma must be positive"));
        }
        Self::with_radius(sigma, math::ceil(3.0 * sigma) as usize)
    }

    pub fn with_radius(sigma: f64, radius: usize) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidArgument("blur sigma must be positive"));
        }
        let mut weights: Vec<f64> = (0..=radius as i64)
            .map(|k| math::exp(-0.5 * (k as f64 / sigma) * (k as f64 / sigma)))
            .collect();
        let total: f64 = weights[0] + 2.0 * weights[1..].iter().sum::<f64>();
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self {
            sigma,
            radius,
            weights,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Normalized weight at tap offset `|k| <= radius`.
    pub fn weight(&self, k: isize) -> f64 {
        self.weights[k.unsigned_abs()]
    }
}

/// Keep every `alpha`-th sample starting at index 0 on both axes.
/// Singleton axes pass through unchanged, so 1-D signals work as rows.
pub fn decimate(img: &ImageGrid, f: DecimationFactor) -> Result<ImageGrid> {
    let a = f.get();
    let (w, h) = img.dims();
    let (ax, ay) = (axis_factor(w, a)?, axis_factor(h, a)?);
    let (ow, oh) = (w / ax, h / ay);
    let mut out = ImageGrid::zeros(ow, oh);
    for y in 0..oh {
        for x in 0..ow {
            out.set(x, y, img.get(x * ax, y * ay));
        }
    }
    Ok(out)
}

fn axis_factor(dim: usize, alpha: usize) -> Result<usize> {
    if dim == 1 {
        return Ok(1);
    }
    if dim % alpha != 0 {
        return Err(Error::NotDivisible { dim, factor: alpha });
    }
    Ok(alpha)
}

/// Transpose of [`decimate`]: place each sample at index `alpha * p`, zeros
/// elsewhere. Singleton axes stay singleton, mirroring [`decimate`].
pub fn zero_upsample(img: &ImageGrid, f: DecimationFactor) -> ImageGrid {
    let a = f.get();
    let (w, h) = img.dims();
    let ax = if w == 1 { 1 } else { a };
    let ay = if h == 1 { 1 } else { a };
    let mut out = ImageGrid::zeros(w * ax, h * ay);
    for y in 0..h {
        for x in 0..w {
            out.set(x * ax, y * ay, img.get(x, y));
        }
    }
    out
}

/// Backward (gather) warp: `out[p] = img(x_p + u_p, y_p + v_p)`.
pub fn backward_warp(
    img: &ImageGrid,
    flow: &FlowField,
    kernel: SamplingKernel,
) -> Result<ImageGrid> {
    flow.check_matches_image(img)?;
    let (w, h) = img.dims();
    let mut out = ImageGrid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let (u, v) = flow.at(x, y);
            out.set(x, y, sample_at(img, x as f64 + u, y as f64 + v, kernel));
        }
    }
    Ok(out)
}

/// Forward (scatter) warp, the exact transpose of [`backward_warp`].
///
/// Each source pixel splats its value onto the kernel support around its
/// displaced position; contributions landing outside the image are dropped
/// without renormalization. Accumulation order is a fixed raster scan, so
/// the output is bitwise deterministic.
pub fn forward_warp(
    img: &ImageGrid,
    flow: &FlowField,
    kernel: SamplingKernel,
) -> Result<ImageGrid> {
    flow.check_matches_image(img)?;
    let (w, h) = img.dims();
    let mut out = ImageGrid::zeros(w, h);
    splat_into(&mut out, img, flow, kernel, 1.0, 0.0);
    Ok(out)
}

/// Scatters `img` into `out` with per-pixel targets
/// `scale * (x_p + u_p, y_p + v_p) + offset`. Shared by the warp and the
/// sub-pixel motion compensation layer.
pub(crate) fn splat_into(
    out: &mut ImageGrid,
    img: &ImageGrid,
    flow: &FlowField,
    kernel: SamplingKernel,
    scale: f64,
    offset: f64,
) {
    let (w, h) = img.dims();
    let (ow, oh) = out.dims();
    let r = kernel.support() as i64;
    for y in 0..h {
        for x in 0..w {
            let (u, v) = flow.at(x, y);
            let tx = scale * (x as f64 + u) + offset;
            let ty = scale * (y as f64 + v) + offset;
            let value = img.get(x, y);
            let x0 = math::floor(tx) as i64;
            let y0 = math::floor(ty) as i64;
            for j in (y0 - r + 1).max(0)..=(y0 + r).min(oh as i64 - 1) {
                let wy = kernel.value(ty - j as f64);
                if wy == 0.0 {
                    continue;
                }
                for i in (x0 - r + 1).max(0)..=(x0 + r).min(ow as i64 - 1) {
                    let wx = kernel.value(tx - i as f64);
                    if wx == 0.0 {
                        continue;
                    }
                    let acc = out.get(i as usize, j as usize) + value * wx * wy;
                    out.set(i as usize, j as usize, acc);
                }
            }
        }
    }
}

/// Separable Gaussian convolution with zero padding.
pub fn gaussian_blur(img: &ImageGrid, spec: &BlurSpec) -> ImageGrid {
    let (w, h) = img.dims();
    let r = spec.radius() as isize;
    let mut tmp = ImageGrid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for k in -r..=r {
                acc += spec.weight(k) * img.get_padded(x as isize + k, y as isize);
            }
            tmp.set(x, y, acc);
        }
    }
    let mut out = ImageGrid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for k in -r..=r {
                acc += spec.weight(k) * tmp.get_padded(x as isize, y as isize + k);
            }
            out.set(x, y, acc);
        }
    }
    out
}

/// One of the five imaging-model operators, for dense materialization.
#[derive(Debug, Clone)]
pub enum LinearOp<'a> {
    Decimate(DecimationFactor),
    ZeroUpsample(DecimationFactor),
    BackwardWarp(&'a FlowField, SamplingKernel),
    ForwardWarp(&'a FlowField, SamplingKernel),
    Blur(&'a BlurSpec),
}

/// Dense row-major matrix, used only at test scale.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn transposed(&self) -> DenseMatrix {
        let mut data = vec![0.0; self.data.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                data[c * self.rows + r] = self.get(r, c);
            }
        }
        DenseMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| math::abs(a - b))
            .fold(0.0, f64::max)
    }
}

const MATERIALIZE_CAP: usize = 16;

/// Dense matrix of `op` acting on `width x height` grids, built by applying
/// the operator to every basis vector. Capped at 16x16 inputs.
pub fn materialize_operator(op: &LinearOp, width: usize, height: usize) -> Result<DenseMatrix> {
    if width > MATERIALIZE_CAP || height > MATERIALIZE_CAP {
        return Err(Error::SizeCapExceeded {
            cap: MATERIALIZE_CAP * MATERIALIZE_CAP,
            requested: width * height,
        });
    }
    let n = width * height;
    let apply = |img: &ImageGrid| -> Result<ImageGrid> {
        match op {
            LinearOp::Decimate(f) => decimate(img, *f),
            LinearOp::ZeroUpsample(f) => Ok(zero_upsample(img, *f)),
            LinearOp::BackwardWarp(flow, k) => backward_warp(img, flow, *k),
            LinearOp::ForwardWarp(flow, k) => forward_warp(img, flow, *k),
            LinearOp::Blur(spec) => Ok(gaussian_blur(img, spec)),
        }
    };
    let mut columns: Vec<ImageGrid> = Vec::with_capacity(n);
    for i in 0..n {
        let mut basis = ImageGrid::zeros(width, height);
        basis.data_mut()[i] = 1.0;
        columns.push(apply(&basis)?);
    }
    let rows = columns[0].data().len();
    let mut data = vec![0.0; rows * n];
    for (c, col) in columns.iter().enumerate() {
        for (r, &v) in col.data().iter().enumerate() {
            data[r * n + c] = v;
        }
    }
    Ok(DenseMatrix {
        rows,
        cols: n,
        data,
    })
}
