//! Sub-pixel motion compensation layer: a sampling-grid generator that
//! scales flow-displaced coordinates into an enlarged image space, plus a
//! differentiable forward-splat sampler with analytic gradients w.r.t. the
//! input image and the flow. The layer has no trainable parameters.

use alloc::vec::Vec;

use crate::math;
use crate::ops::splat_into;
use crate::sample::{sample_at, sample_with_grad};
use crate::{Error, FlowField, ImageGrid, Result, SamplingKernel};

/// Layer configuration: scale factor and interpolation kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpmcConfig {
    alpha: f64,
    kernel: SamplingKernel,
    center_aligned: bool,
}

impl SpmcConfig {
    /// Origin-anchored grid with a bilinear kernel.
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument("scale factor must be positive"));
        }
        Ok(Self {
            alpha,
            kernel: SamplingKernel::Bilinear,
            center_aligned: false,
        })
    }

    pub fn with_kernel(mut self, kernel: SamplingKernel) -> Self {
        self.kernel = kernel;
        self
    }

    /// Shift the sampling grid by `(alpha - 1) / 2` so pixel centers align
    /// with center-based resampling conventions. Off by default.
    pub fn with_center_alignment(mut self, on: bool) -> Self {
        self.center_aligned = on;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kernel(&self) -> SamplingKernel {
        self.kernel
    }

    pub fn center_aligned(&self) -> bool {
        self.center_aligned
    }

    fn offset(&self) -> f64 {
        if self.center_aligned {
            (self.alpha - 1.0) / 2.0
        } else {
            0.0
        }
    }

    /// HR dimensions for an LR input of the given size.
    pub fn hr_dims(&self, lr: (usize, usize)) -> Result<(usize, usize)> {
        let w = math::round(lr.0 as f64 * self.alpha) as usize;
        let h = math::round(lr.1 as f64 * self.alpha) as usize;
        if w < 1 || h < 1 {
            return Err(Error::InvalidArgument("scale yields empty HR grid"));
        }
        Ok((w, h))
    }
}

/// Gradients of a scalar loss through the layer.
#[derive(Debug, Clone)]
pub struct SpmcGradients {
    /// Sensitivity w.r.t. the LR input image.
    pub d_image: ImageGrid,
    /// Sensitivity w.r.t. the horizontal flow component.
    pub d_flow_u: Vec<f64>,
    /// Sensitivity w.r.t. the vertical flow component.
    pub d_flow_v: Vec<f64>,
}

/// Transformed HR coordinates `(x_p + u_p, y_p + v_p) * alpha` per LR pixel,
/// row-major.
pub fn spmc_grid(flow: &FlowField, cfg: &SpmcConfig) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = flow.dims();
    let off = cfg.offset();
    let mut xs = Vec::with_capacity(w * h);
    let mut ys = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (u, v) = flow.at(x, y);
            xs.push(cfg.alpha * (x as f64 + u) + off);
            ys.push(cfg.alpha * (y as f64 + v) + off);
        }
    }
    (xs, ys)
}

/// Forward splat: every LR pixel scatters its value onto the HR grid at its
/// transformed coordinates through the kernel.
pub fn spmc_forward(img: &ImageGrid, flow: &FlowField, cfg: &SpmcConfig) -> Result<ImageGrid> {
    flow.check_matches_image(img)?;
    let (ow, oh) = cfg.hr_dims(img.dims())?;
    let mut out = ImageGrid::zeros(ow, oh);
    splat_into(&mut out, img, flow, cfg.kernel(), cfg.alpha(), cfg.offset());
    Ok(out)
}

/// Analytic gradients of the splat w.r.t. image and flow.
///
/// The image gradient is the adjoint of the splat (a gather of `upstream`
/// at the transformed coordinates). The flow gradient at pixel `p` is
/// `alpha * J^L_p` times the kernel-slope gather, so it is exactly 0
/// wherever the input pixel is 0.
pub fn spmc_backward(
    img: &ImageGrid,
    flow: &FlowField,
    cfg: &SpmcConfig,
    upstream: &ImageGrid,
) -> Result<SpmcGradients> {
    flow.check_matches_image(img)?;
    let hr = cfg.hr_dims(img.dims())?;
    if upstream.dims() != hr {
        return Err(Error::DimensionMismatch {
            expected: hr,
            actual: upstream.dims(),
        });
    }
    let (w, h) = img.dims();
    let off = cfg.offset();
    let mut d_image = ImageGrid::zeros(w, h);
    let mut d_flow_u = Vec::with_capacity(w * h);
    let mut d_flow_v = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (u, v) = flow.at(x, y);
            let sx = cfg.alpha * (x as f64 + u) + off;
            let sy = cfg.alpha * (y as f64 + v) + off;
            let (val, gx, gy) = sample_with_grad(upstream, sx, sy, cfg.kernel());
            d_image.set(x, y, val);
            let pixel = img.get(x, y);
            d_flow_u.push(cfg.alpha * pixel * gx);
            d_flow_v.push(cfg.alpha * pixel * gy);
        }
    }
    Ok(SpmcGradients {
        d_image,
        d_flow_u,
        d_flow_v,
    })
}

/// Adjoint of the splat alone: gathers an HR-sized field back onto the LR
/// grid. Equals the image gradient of [`spmc_backward`].
pub fn spmc_adjoint(hr: &ImageGrid, flow: &FlowField, cfg: &SpmcConfig) -> Result<ImageGrid> {
    let (w, h) = flow.dims();
    let expected = cfg.hr_dims((w, h))?;
    if hr.dims() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: hr.dims(),
        });
    }
    let off = cfg.offset();
    let mut out = ImageGrid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let (u, v) = flow.at(x, y);
            let sx = cfg.alpha * (x as f64 + u) + off;
            let sy = cfg.alpha * (y as f64 + v) + off;
            out.set(x, y, sample_at(hr, sx, sy, cfg.kernel()));
        }
    }
    Ok(out)
}

/// Accumulated splat weight per HR pixel: the forward splat applied to the
/// all-ones LR image.
pub fn spmc_weight_map(flow: &FlowField, cfg: &SpmcConfig) -> Result<ImageGrid> {
    let (w, h) = flow.dims();
    spmc_forward(&ImageGrid::filled(w, h, 1.0), flow, cfg)
}
