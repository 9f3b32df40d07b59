//! Classical motion estimation: an unsupervised warping objective (L1 data
//! term plus anisotropic total variation on the flow), gradient-descent
//! refinement with a backtracking line search, and a coarse-to-fine
//! pyramidal wrapper.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::ops::{gaussian_blur, BlurSpec};
use crate::sample::sample_with_grad;
use crate::{Error, FlowField, ImageGrid, Result, SamplingKernel};

/// Charbonnier smoothing width for the L1 terms.
const CHARBONNIER_EPS: f64 = 1e-3;

/// Settings for refinement and the pyramid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowEstimationConfig {
    pub pyramid_levels: usize,
    pub iterations_per_level: usize,
    pub step_size: f64,
    pub lambda1: f64,
    pub kernel: SamplingKernel,
}

impl Default for FlowEstimationConfig {
    // The bicubic kernel is the default sampler for refinement: the tent
    // kernel's zero subgradient at integer offsets kills the data-term
    // gradient exactly at a zero-flow init.
    fn default() -> Self {
        Self {
            pyramid_levels: 3,
            iterations_per_level: 200,
            step_size: 1.0,
            lambda1: 0.01,
            kernel: SamplingKernel::BicubicA,
        }
    }
}

impl FlowEstimationConfig {
    fn validate(&self) -> Result<()> {
        if self.pyramid_levels < 1 {
            return Err(Error::InvalidArgument("pyramid_levels must be >= 1"));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::InvalidArgument("step_size must be positive"));
        }
        if self.lambda1 < 0.0 {
            return Err(Error::InvalidArgument("lambda1 must be >= 0"));
        }
        Ok(())
    }
}

/// Decomposed warping loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpLossReport {
    /// Sum of absolute warp residuals.
    pub data_term: f64,
    /// Anisotropic total variation of `(u, v)`, forward differences.
    pub tv_term: f64,
    /// `data_term + lambda1 * tv_term`.
    pub total: f64,
}

/// Unsupervised warping loss: L1 residual between `target` and the
/// reference backward-warped by `flow`, plus TV regularization on the flow.
pub fn warp_loss(
    reference: &ImageGrid,
    target: &ImageGrid,
    flow: &FlowField,
    lambda1: f64,
) -> Result<WarpLossReport> {
    reference.check_same_dims(target)?;
    flow.check_matches_image(reference)?;
    let warped = crate::ops::backward_warp(reference, flow, SamplingKernel::Bilinear)?;
    let data_term: f64 = target
        .data()
        .iter()
        .zip(warped.data())
        .map(|(t, w)| math::abs(t - w))
        .sum();
    let tv_term = tv_l1(flow);
    Ok(WarpLossReport {
        data_term,
        tv_term,
        total: data_term + lambda1 * tv_term,
    })
}

fn tv_l1(flow: &FlowField) -> f64 {
    let (w, h) = flow.dims();
    let mut acc = 0.0;
    for comp in [flow.u(), flow.v()] {
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    acc += math::abs(comp[i + 1] - comp[i]);
                }
                if y + 1 < h {
                    acc += math::abs(comp[i + w] - comp[i]);
                }
            }
        }
    }
    acc
}

#[inline]
fn charbonnier(x: f64) -> f64 {
    math::sqrt(x * x + CHARBONNIER_EPS * CHARBONNIER_EPS)
}

#[inline]
fn charbonnier_deriv(x: f64) -> f64 {
    x / charbonnier(x)
}

/// Smoothed (Charbonnier) warping objective and its analytic gradient
/// w.r.t. both flow components. This is the function the refinement
/// actually descends; it upper-bounds the L1 loss of [`warp_loss`].
pub fn smoothed_loss_and_grad(
    reference: &ImageGrid,
    target: &ImageGrid,
    flow: &FlowField,
    cfg: &FlowEstimationConfig,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let (loss, du, dv, _) = loss_grad_precond(reference, target, flow, cfg)?;
    Ok((loss, du, dv))
}

/// As [`smoothed_loss_and_grad`], but also returns the per-pixel squared
/// image-gradient energy used as a diagonal preconditioner.
fn loss_grad_precond(
    reference: &ImageGrid,
    target: &ImageGrid,
    flow: &FlowField,
    cfg: &FlowEstimationConfig,
) -> Result<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> {
    reference.check_same_dims(target)?;
    flow.check_matches_image(reference)?;
    let (w, h) = flow.dims();
    let n = w * h;
    let mut du = vec![0.0; n];
    let mut dv = vec![0.0; n];
    let mut energy = vec![0.0; n];
    let mut loss = 0.0;
    // data term
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let (u, v) = flow.at(x, y);
            let (val, gx, gy) =
                sample_with_grad(reference, x as f64 + u, y as f64 + v, cfg.kernel);
            let r = val - target.get(x, y);
            loss += charbonnier(r);
            let dpsi = charbonnier_deriv(r);
            du[i] += dpsi * gx;
            dv[i] += dpsi * gy;
            energy[i] = gx * gx + gy * gy;
        }
    }
    // TV term, forward differences
    let mut tv = 0.0;
    for (comp, grad) in [(flow.u(), &mut du), (flow.v(), &mut dv)] {
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    let d = comp[i + 1] - comp[i];
                    tv += charbonnier(d);
                    let dpsi = cfg.lambda1 * charbonnier_deriv(d);
                    grad[i + 1] += dpsi;
                    grad[i] -= dpsi;
                }
                if y + 1 < h {
                    let d = comp[i + w] - comp[i];
                    tv += charbonnier(d);
                    let dpsi = cfg.lambda1 * charbonnier_deriv(d);
                    grad[i + w] += dpsi;
                    grad[i] -= dpsi;
                }
            }
        }
    }
    Ok((loss + cfg.lambda1 * tv, du, dv, energy))
}

fn smoothed_loss_only(
    reference: &ImageGrid,
    target: &ImageGrid,
    flow: &FlowField,
    cfg: &FlowEstimationConfig,
) -> Result<f64> {
    let warped = crate::ops::backward_warp(reference, flow, cfg.kernel)?;
    let data: f64 = target
        .data()
        .iter()
        .zip(warped.data())
        .map(|(t, w)| charbonnier(w - t))
        .sum();
    let mut tv = 0.0;
    let (w, h) = flow.dims();
    for comp in [flow.u(), flow.v()] {
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    tv += charbonnier(comp[i + 1] - comp[i]);
                }
                if y + 1 < h {
                    tv += charbonnier(comp[i + w] - comp[i]);
                }
            }
        }
    }
    Ok(data + cfg.lambda1 * tv)
}

/// Gradient descent on the smoothed objective with Armijo backtracking
/// (factor 0.5, c = 1e-4), so the per-iteration loss trace is monotone
/// non-increasing. Returns the refined flow and the trace of smoothed
/// objective values (one entry per accepted iterate, starting at the init).
pub fn refine_flow_traced(
    reference: &ImageGrid,
    target: &ImageGrid,
    init: &FlowField,
    cfg: &FlowEstimationConfig,
) -> Result<(FlowField, Vec<f64>)> {
    cfg.validate()?;
    let (w, h) = init.dims();
    let mut flow = init.clone();
    let mut current = smoothed_loss_only(reference, target, &flow, cfg)?;
    let mut trace = vec![current];
    let armijo_c = 1e-4;
    // warm-started step: grow from the last accepted value so the search
    // adapts to the local gradient scale
    let mut step_start = cfg.step_size;
    // floor on the preconditioner so flat regions still take bounded steps
    const PRECOND_FLOOR: f64 = 1e-4;
    for _ in 0..cfg.iterations_per_level {
        let (loss, mut du, mut dv, energy) = loss_grad_precond(reference, target, &flow, cfg)?;
        debug_assert!(loss.is_finite());
        // Gauss-Newton-style diagonal scaling by image-gradient energy
        let mut directional = 0.0;
        for i in 0..du.len() {
            let p = 1.0 / (energy[i] + PRECOND_FLOOR);
            directional += p * (du[i] * du[i] + dv[i] * dv[i]);
            du[i] *= p;
            dv[i] *= p;
        }
        if directional == 0.0 {
            break;
        }
        let mut step = step_start;
        let mut accepted = false;
        while step > 1e-12 {
            let candidate = step_flow(&flow, &du, &dv, step, w, h);
            let cand_loss = smoothed_loss_only(reference, target, &candidate, cfg)?;
            if cand_loss <= current - armijo_c * step * directional {
                flow = candidate;
                current = cand_loss;
                accepted = true;
                step_start = (step * 2.0).min(1e6);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        trace.push(current);
    }
    Ok((flow, trace))
}

fn step_flow(flow: &FlowField, du: &[f64], dv: &[f64], step: f64, w: usize, h: usize) -> FlowField {
    let u = flow
        .u()
        .iter()
        .zip(du)
        .map(|(c, g)| c - step * g)
        .collect();
    let v = flow
        .v()
        .iter()
        .zip(dv)
        .map(|(c, g)| c - step * g)
        .collect();
    FlowField::new(w, h, u, v).expect("refined flow stays finite")
}

/// [`refine_flow_traced`] without the trace. Never returns a flow whose
/// L1 warp loss exceeds the initializer's.
pub fn refine_flow(
    reference: &ImageGrid,
    target: &ImageGrid,
    init: &FlowField,
    cfg: &FlowEstimationConfig,
) -> Result<FlowField> {
    let (refined, _) = refine_flow_traced(reference, target, init, cfg)?;
    let before = warp_loss(reference, target, init, cfg.lambda1)?;
    let after = warp_loss(reference, target, &refined, cfg.lambda1)?;
    Ok(if after.total <= before.total {
        refined
    } else {
        init.clone()
    })
}

/// Coarse-to-fine estimation: a Gaussian-antialiased half-resolution
/// pyramid, refinement per level, and bilinear flow upsampling (values
/// doubled) between levels.
pub fn estimate_flow_pyramidal(
    reference: &ImageGrid,
    target: &ImageGrid,
    cfg: &FlowEstimationConfig,
) -> Result<FlowField> {
    cfg.validate()?;
    reference.check_same_dims(target)?;
    let (w, h) = reference.dims();
    let min_dim = w.min(h);
    if min_dim < 1 << (cfg.pyramid_levels - 1) {
        return Err(Error::InvalidArgument("image too small for pyramid depth"));
    }
    let mut ref_pyr = vec![reference.clone()];
    let mut tgt_pyr = vec![target.clone()];
    for _ in 1..cfg.pyramid_levels {
        ref_pyr.push(downsample_half(ref_pyr.last().unwrap()));
        tgt_pyr.push(downsample_half(tgt_pyr.last().unwrap()));
    }
    let coarsest = ref_pyr.last().unwrap().dims();
    let mut flow = FlowField::zeros(coarsest.0, coarsest.1);
    for level in (0..cfg.pyramid_levels).rev() {
        flow = refine_flow(&ref_pyr[level], &tgt_pyr[level], &flow, cfg)?;
        if level > 0 {
            let (fw, fh) = ref_pyr[level - 1].dims();
            flow = upsample_flow(&flow, fw, fh);
        }
    }
    Ok(flow)
}

fn downsample_half(img: &ImageGrid) -> ImageGrid {
    let blurred = gaussian_blur(img, &BlurSpec::new(1.0).expect("fixed sigma"));
    let (w, h) = img.dims();
    let (ow, oh) = ((w / 2).max(1), (h / 2).max(1));
    let mut out = ImageGrid::zeros(ow, oh);
    for y in 0..oh {
        for x in 0..ow {
            out.set(x, y, blurred.get(2 * x, 2 * y));
        }
    }
    out
}

/// Bilinear upsampling of a flow field to `(fw, fh)` with clamped borders,
/// scaling vectors by 2 for the finer grid.
fn upsample_flow(flow: &FlowField, fw: usize, fh: usize) -> FlowField {
    let (cw, ch) = flow.dims();
    let interp = |comp: &[f64], x: f64, y: f64| -> f64 {
        let xc = x.clamp(0.0, (cw - 1) as f64);
        let yc = y.clamp(0.0, (ch - 1) as f64);
        let x0 = math::floor(xc) as usize;
        let y0 = math::floor(yc) as usize;
        let x1 = (x0 + 1).min(cw - 1);
        let y1 = (y0 + 1).min(ch - 1);
        let fx = xc - x0 as f64;
        let fy = yc - y0 as f64;
        let top = comp[y0 * cw + x0] * (1.0 - fx) + comp[y0 * cw + x1] * fx;
        let bot = comp[y1 * cw + x0] * (1.0 - fx) + comp[y1 * cw + x1] * fx;
        top * (1.0 - fy) + bot * fy
    };
    let mut u = Vec::with_capacity(fw * fh);
    let mut v = Vec::with_capacity(fw * fh);
    for y in 0..fh {
        for x in 0..fw {
            let cx = x as f64 / 2.0;
            let cy = y as f64 / 2.0;
            u.push(2.0 * interp(flow.u(), cx, cy));
            v.push(2.0 * interp(flow.v(), cx, cy));
        }
    }
    FlowField::new(fw, fh, u, v).expect("upsampled flow stays finite")
}
