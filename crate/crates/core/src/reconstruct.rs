//! Multi-frame HR reconstruction: feed-forward shift-and-add over aligned
//! frames and a matrix-free conjugate-gradient solve of the L2 normal
//! equations, with either sub-pixel motion compensation or the
//! backward-warp-then-upsample baseline as the alignment backend.

use alloc::vec::Vec;

use crate::math;
use crate::ops::backward_warp;
use crate::resample::bicubic_upsample;
use crate::spmc::{spmc_adjoint, spmc_forward, spmc_weight_map, SpmcConfig};
use crate::{Error, FlowField, ImageGrid, Result, SamplingKernel, Sequence};

/// Per-HR-pixel splat weight below which a pixel counts as a hole.
pub const HOLE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlignmentMode {
    /// Forward splat onto the HR grid (keeps sub-pixel phase).
    #[default]
    Spmc,
    /// Backward warp in LR space followed by bicubic upsampling.
    BackwardWarp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMode {
    #[default]
    ShiftAndAdd,
    ConjugateGradient,
}

/// Policy for HR pixels that received no splat weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HoleFill {
    Zero,
    #[default]
    BicubicReference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionConfig {
    pub alpha: usize,
    pub alignment: AlignmentMode,
    pub solver: SolverMode,
    pub tikhonov_eps: f64,
    pub cg_max_iters: usize,
    pub cg_tolerance: f64,
    pub hole_fill: HoleFill,
}

impl ReconstructionConfig {
    pub fn new(alpha: usize) -> Result<Self> {
        if alpha < 1 {
            return Err(Error::InvalidArgument("alpha must be >= 1"));
        }
        Ok(Self {
            alpha,
            alignment: AlignmentMode::default(),
            solver: SolverMode::default(),
            tikhonov_eps: 1e-3,
            cg_max_iters: 200,
            cg_tolerance: 1e-10,
            hole_fill: HoleFill::default(),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.alpha < 1 {
            return Err(Error::InvalidArgument("alpha must be >= 1"));
        }
        if !(self.cg_tolerance > 0.0) {
            return Err(Error::InvalidArgument("cg tolerance must be positive"));
        }
        if self.tikhonov_eps < 0.0 {
            return Err(Error::InvalidArgument("tikhonov eps must be >= 0"));
        }
        Ok(())
    }

    fn spmc(&self) -> Result<SpmcConfig> {
        SpmcConfig::new(self.alpha as f64)
    }
}

/// Motion-compensated HR frames with their splat-weight maps and the
/// bicubic-upsampled reference.
#[derive(Debug, Clone)]
pub struct AlignedStack {
    pub frames: Vec<ImageGrid>,
    pub weights: Vec<ImageGrid>,
    pub reference_upsampled: ImageGrid,
}

/// Resolves a per-frame flow list: callers may pass one flow per frame, or
/// one per non-reference frame. The reference flow is always zero.
fn resolve_flows(seq: &Sequence, flows: &[FlowField]) -> Result<Vec<FlowField>> {
    let (w, h) = seq.frame_dims();
    let n = seq.len();
    let zero = FlowField::zeros(w, h);
    let full: Vec<FlowField> = if flows.len() == n {
        let mut out: Vec<FlowField> = flows.to_vec();
        out[seq.reference_index()] = zero;
        out
    } else if flows.len() == n - 1 {
        let mut out = Vec::with_capacity(n);
        let mut it = flows.iter();
        for i in 0..n {
            if i == seq.reference_index() {
                out.push(zero.clone());
            } else {
                out.push(it.next().expect("length checked").clone());
            }
        }
        out
    } else {
        return Err(Error::InvalidArgument(
            "need one flow per frame or per non-reference frame",
        ));
    };
    for flow in &full {
        if flow.dims() != (w, h) {
            return Err(Error::DimensionMismatch {
                expected: (w, h),
                actual: flow.dims(),
            });
        }
    }
    Ok(full)
}

/// Aligns every frame to the reference on the HR grid.
///
/// SPMC mode expects flows in the F_{i->0} orientation and splats each
/// frame with its flow; the weight map is the splat of an all-ones image.
/// Backward-warp mode expects F_{0->i} flows, warps in LR space, upsamples
/// bicubically, and reports unit weights.
pub fn align_stack(
    seq: &Sequence,
    flows: &[FlowField],
    cfg: &ReconstructionConfig,
) -> Result<AlignedStack> {
    cfg.validate()?;
    let flows = resolve_flows(seq, flows)?;
    let reference_upsampled = bicubic_upsample(seq.reference(), cfg.alpha)?;
    let mut frames = Vec::with_capacity(seq.len());
    let mut weights = Vec::with_capacity(seq.len());
    match cfg.alignment {
        AlignmentMode::Spmc => {
            let spmc = cfg.spmc()?;
            for (frame, flow) in seq.frames().iter().zip(&flows) {
                frames.push(spmc_forward(frame, flow, &spmc)?);
                weights.push(spmc_weight_map(flow, &spmc)?);
            }
        }
        AlignmentMode::BackwardWarp => {
            let (hw, hh) = reference_upsampled.dims();
            for (frame, flow) in seq.frames().iter().zip(&flows) {
                let warped = backward_warp(frame, flow, SamplingKernel::Bilinear)?;
                frames.push(bicubic_upsample(&warped, cfg.alpha)?);
                weights.push(ImageGrid::filled(hw, hh, 1.0));
            }
        }
    }
    Ok(AlignedStack {
        frames,
        weights,
        reference_upsampled,
    })
}

/// Feed-forward fusion: accumulated values divided by accumulated splat
/// weights, with the hole-fill policy where no frame contributed.
pub fn shift_and_add(stack: &AlignedStack, cfg: &ReconstructionConfig) -> Result<ImageGrid> {
    cfg.validate()?;
    let first = stack
        .frames
        .first()
        .ok_or(Error::InvalidArgument("empty aligned stack"))?;
    let dims = first.dims();
    if stack.frames.len() != stack.weights.len() {
        return Err(Error::InvalidArgument("frame/weight count mismatch"));
    }
    let n = first.data().len();
    let mut num = alloc::vec![0.0; n];
    let mut den = alloc::vec![0.0; n];
    for (frame, weight) in stack.frames.iter().zip(&stack.weights) {
        if frame.dims() != dims || weight.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: frame.dims(),
            });
        }
        for i in 0..n {
            num[i] += frame.data()[i];
            den[i] += weight.data()[i];
        }
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if den[i] > HOLE_THRESHOLD {
            out.push(num[i] / den[i]);
        } else {
            out.push(match cfg.hole_fill {
                HoleFill::Zero => 0.0,
                HoleFill::BicubicReference => stack.reference_upsampled.data()[i],
            });
        }
    }
    ImageGrid::new(dims.0, dims.1, out)
}

/// Convergence report for the normal-equations solve.
#[derive(Debug, Clone)]
pub struct CgReport {
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual `||b - A x|| / ||b||` per iteration, starting at 1.
    pub residual_history: Vec<f64>,
}

impl CgReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&1.0)
    }
}

/// Conjugate-gradient solve of the normal equations
/// `(sum_i C_i C_i^T + eps I) x = sum_i C_i I^L_i` where `C_i` is the
/// sub-pixel splat of frame `i` (so `C_i^T` is its gather adjoint). The
/// operator is applied matrix-free. On non-convergence the last iterate is
/// still returned, with the report flagging it.
pub fn solve_normal_equations(
    seq: &Sequence,
    flows: &[FlowField],
    cfg: &ReconstructionConfig,
) -> Result<(ImageGrid, CgReport)> {
    cfg.validate()?;
    let flows = resolve_flows(seq, flows)?;
    let spmc = cfg.spmc()?;
    let hr_dims = spmc.hr_dims(seq.frame_dims())?;
    let n = hr_dims.0 * hr_dims.1;

    let apply = |x: &ImageGrid| -> Result<ImageGrid> {
        let mut acc = alloc::vec![0.0; n];
        for flow in &flows {
            let gathered = spmc_adjoint(x, flow, &spmc)?;
            let splatted = spmc_forward(&gathered, flow, &spmc)?;
            for (a, s) in acc.iter_mut().zip(splatted.data()) {
                *a += s;
            }
        }
        if cfg.tikhonov_eps > 0.0 {
            for (a, v) in acc.iter_mut().zip(x.data()) {
                *a += cfg.tikhonov_eps * v;
            }
        }
        ImageGrid::new(hr_dims.0, hr_dims.1, acc)
    };

    let mut b = alloc::vec![0.0; n];
    for (frame, flow) in seq.frames().iter().zip(&flows) {
        let splatted = spmc_forward(frame, flow, &spmc)?;
        for (acc, s) in b.iter_mut().zip(splatted.data()) {
            *acc += s;
        }
    }
    let b = ImageGrid::new(hr_dims.0, hr_dims.1, b)?;
    let b_norm = math::sqrt(b.dot(&b)?);
    if b_norm == 0.0 {
        return Ok((
            ImageGrid::zeros(hr_dims.0, hr_dims.1),
            CgReport {
                iterations: 0,
                converged: true,
                residual_history: alloc::vec![0.0],
            },
        ));
    }

    let mut x = ImageGrid::zeros(hr_dims.0, hr_dims.1);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs_old = r.dot(&r)?;
    let mut history = alloc::vec![1.0];
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.cg_max_iters {
        let ap = apply(&p)?;
        let p_ap = p.dot(&ap)?;
        if p_ap <= 0.0 {
            break; // null-space direction on a semidefinite system
        }
        let step = rs_old / p_ap;
        for (xi, pi) in x.data_mut().iter_mut().zip(p.data()) {
            *xi += step * pi;
        }
        for (ri, api) in r.data_mut().iter_mut().zip(ap.data()) {
            *ri -= step * api;
        }
        let rs_new = r.dot(&r)?;
        iterations += 1;
        history.push(math::sqrt(rs_new) / b_norm);
        if math::sqrt(rs_new) / b_norm <= cfg.cg_tolerance {
            converged = true;
            break;
        }
        let beta = rs_new / rs_old;
        for (pi, ri) in p.data_mut().iter_mut().zip(r.data()) {
            *pi = ri + beta * *pi;
        }
        rs_old = rs_new;
    }
    Ok((
        x,
        CgReport {
            iterations,
            converged,
            residual_history: history,
        },
    ))
}

/// Time-step-weighted squared reconstruction loss: weights ramp linearly
/// from 0.5 at the earliest step to 1.0 at the latest.
pub fn weighted_sr_loss(outputs: &[ImageGrid], truth: &ImageGrid, half_span: usize) -> Result<f64> {
    if outputs.len() != 2 * half_span + 1 {
        return Err(Error::InvalidArgument("need 2T + 1 outputs"));
    }
    let mut acc = 0.0;
    for (i, out) in outputs.iter().enumerate() {
        truth.check_same_dims(out)?;
        let kappa = if half_span == 0 {
            1.0
        } else {
            0.5 + 0.5 * i as f64 / (2.0 * half_span as f64)
        };
        let sq: f64 = truth
            .data()
            .iter()
            .zip(out.data())
            .map(|(t, o)| (t - o) * (t - o))
            .sum();
        acc += kappa * sq;
    }
    Ok(acc)
}

/// Combined objective `sr_loss + lambda2 * me_loss` (default weight 0.01).
pub fn total_loss(sr_loss: f64, me_loss: f64, lambda2: f64) -> Result<f64> {
    if sr_loss < 0.0 || me_loss < 0.0 {
        return Err(Error::InvalidArgument("loss components must be >= 0"));
    }
    Ok(sr_loss + lambda2 * me_loss)
}

/// Default weight on the motion-estimation term of [`total_loss`].
pub const DEFAULT_LAMBDA2: f64 = 0.01;
