//! Built-in verification suites over randomized instances: adjoint
//! identities, finite-difference gradient checks, and the exact-cover
//! recovery theorem. Shared by the `verify` subcommand and the acceptance
//! tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subpix_core::metrics::psnr;
use subpix_core::ops::{
    backward_warp, decimate, forward_warp, gaussian_blur, zero_upsample, BlurSpec,
    DecimationFactor,
};
use subpix_core::reconstruct::{
    align_stack, shift_and_add, solve_normal_equations, HoleFill, ReconstructionConfig,
    SolverMode,
};
use subpix_core::spmc::{spmc_adjoint, spmc_backward, spmc_forward, SpmcConfig};
use subpix_core::synth::{make_exact_sequence, smooth_random_texture, SyntheticSequenceSpec};
use subpix_core::{FlowField, ImageGrid, SamplingKernel, Sequence};

/// Outcome of one named property check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

/// A batch of checks from one suite.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    fn push(&mut self, name: &'static str, max_error: f64, tolerance: f64) {
        self.checks.push(CheckResult {
            name,
            max_error,
            tolerance,
        });
    }

    pub fn merge(&mut self, other: SuiteReport) {
        self.checks.extend(other.checks);
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ImageGrid {
    ImageGrid::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap()
}

fn random_flow(rng: &mut ChaCha8Rng, w: usize, h: usize, max_mag: f64) -> FlowField {
    let u = (0..w * h).map(|_| rng.gen_range(-max_mag..max_mag)).collect();
    let v = (0..w * h).map(|_| rng.gen_range(-max_mag..max_mag)).collect();
    FlowField::new(w, h, u, v).unwrap()
}

/// Random flow whose scaled sampling offsets stay at least `margin` away
/// from integer positions, where the tent kernel is non-differentiable.
fn random_flow_off_kinks(
    rng: &mut ChaCha8Rng,
    w: usize,
    h: usize,
    alpha: f64,
    margin: f64,
) -> FlowField {
    let mut component = || -> Vec<f64> {
        (0..w * h)
            .map(|_| loop {
                let c: f64 = rng.gen_range(-1.5..1.5);
                let frac = (alpha * c).rem_euclid(1.0);
                if frac > margin && frac < 1.0 - margin {
                    return c;
                }
            })
            .collect()
    };
    let u = component();
    let v = component();
    FlowField::new(w, h, u, v).unwrap()
}

/// Inner-product adjoint identities for every operator pair on random
/// 8x8 instances.
pub fn run_adjoint_suite(seed: u64, trials: usize) -> SuiteReport {
    let mut rng = rng(seed);
    let mut report = SuiteReport::default();

    let factor = DecimationFactor::new(2).unwrap();
    let mut dec_err = 0.0f64;
    for _ in 0..trials {
        let x = random_image(&mut rng, 8, 8);
        let y = random_image(&mut rng, 4, 4);
        let lhs = decimate(&x, factor).unwrap().dot(&y).unwrap();
        let rhs = x.dot(&zero_upsample(&y, factor)).unwrap();
        dec_err = dec_err.max((lhs - rhs).abs());
    }
    report.push("adjoint_decimation", dec_err, 1e-10);

    let mut warp_err = 0.0f64;
    for kernel in [SamplingKernel::Bilinear, SamplingKernel::BicubicA] {
        for _ in 0..trials {
            let x = random_image(&mut rng, 8, 8);
            let y = random_image(&mut rng, 8, 8);
            let flow = random_flow(&mut rng, 8, 8, 2.0);
            let lhs = backward_warp(&x, &flow, kernel).unwrap().dot(&y).unwrap();
            let rhs = x.dot(&forward_warp(&y, &flow, kernel).unwrap()).unwrap();
            warp_err = warp_err.max((lhs - rhs).abs());
        }
    }
    report.push("adjoint_warp", warp_err, 1e-10);

    let spec = BlurSpec::new(1.2).unwrap();
    let mut blur_err = 0.0f64;
    for _ in 0..trials {
        let x = random_image(&mut rng, 8, 8);
        let y = random_image(&mut rng, 8, 8);
        let lhs = gaussian_blur(&x, &spec).dot(&y).unwrap();
        let rhs = x.dot(&gaussian_blur(&y, &spec)).unwrap();
        blur_err = blur_err.max((lhs - rhs).abs());
    }
    report.push("adjoint_blur", blur_err, 1e-10);

    let cfg = SpmcConfig::new(2.0).unwrap();
    let mut spmc_err = 0.0f64;
    for _ in 0..trials {
        let x = random_image(&mut rng, 8, 8);
        let y = random_image(&mut rng, 16, 16);
        let flow = random_flow(&mut rng, 8, 8, 1.5);
        let lhs = spmc_forward(&x, &flow, &cfg).unwrap().dot(&y).unwrap();
        let rhs = x.dot(&spmc_adjoint(&y, &flow, &cfg).unwrap()).unwrap();
        spmc_err = spmc_err.max((lhs - rhs).abs());
    }
    report.push("adjoint_spmc", spmc_err, 1e-10);

    report
}

/// Analytic splat gradients against central finite differences on random
/// 6x6 instances kept away from kernel kinks.
pub fn run_gradcheck_suite(seed: u64, trials: usize) -> SuiteReport {
    let cfg = SpmcConfig::new(2.0).unwrap();
    let mut img_err = 0.0f64;
    let mut flow_err = 0.0f64;
    for t in 0..trials as u64 {
        let mut rng = rng(seed.wrapping_add(t));
        let img = random_image(&mut rng, 6, 6);
        let flow = random_flow_off_kinks(&mut rng, 6, 6, 2.0, 1e-2);
        let upstream = random_image(&mut rng, 12, 12);
        let grads = spmc_backward(&img, &flow, &cfg, &upstream).unwrap();

        let h = 1e-3;
        for &i in &[0usize, 14, 21, 35] {
            let bump = |delta: f64| {
                let mut im = img.clone();
                im.data_mut()[i] += delta;
                spmc_forward(&im, &flow, &cfg)
                    .unwrap()
                    .dot(&upstream)
                    .unwrap()
            };
            let fd = (bump(h) - bump(-h)) / (2.0 * h);
            let analytic = grads.d_image.data()[i];
            img_err = img_err.max((analytic - fd).abs() / fd.abs().max(1e-12));
        }

        let h = 1e-4;
        for &i in &[0usize, 18, 27] {
            for comp in 0..2 {
                let bump = |delta: f64| {
                    let mut f = flow.clone();
                    if comp == 0 {
                        f.u_mut()[i] += delta;
                    } else {
                        f.v_mut()[i] += delta;
                    }
                    spmc_forward(&img, &f, &cfg)
                        .unwrap()
                        .dot(&upstream)
                        .unwrap()
                };
                let fd = (bump(h) - bump(-h)) / (2.0 * h);
                let analytic = if comp == 0 {
                    grads.d_flow_u[i]
                } else {
                    grads.d_flow_v[i]
                };
                flow_err = flow_err.max((analytic - fd).abs() / fd.abs().max(1e-8));
            }
        }
    }
    let mut report = SuiteReport::default();
    report.push("gradcheck_image", img_err, 1e-6);
    report.push("gradcheck_flow", flow_err, 1e-4);
    report
}

fn phase_cover_shifts(alpha: usize) -> Vec<(f64, f64)> {
    let mut shifts = Vec::new();
    for dy in 0..alpha {
        for dx in 0..alpha {
            shifts.push((dx as f64 / alpha as f64, dy as f64 / alpha as f64));
        }
    }
    shifts
}

fn max_abs_diff(a: &ImageGrid, b: &ImageGrid) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// The exact-cover recovery theorem plus the fusion identities built on it.
pub fn run_recovery_suite(seed: u64) -> SuiteReport {
    let mut report = SuiteReport::default();

    for (name, alpha) in [
        ("recovery_exact_alpha2", 2usize),
        ("recovery_exact_alpha4", 4usize),
    ] {
        let hr = smooth_random_texture(32, 32, 1.0, seed);
        let cfg = ReconstructionConfig::new(alpha).unwrap();
        let spec = SyntheticSequenceSpec {
            hr_source: hr.clone(),
            shifts: phase_cover_shifts(alpha),
            alpha,
            blur: None,
        };
        let out = make_exact_sequence(&spec).unwrap();
        let stack = align_stack(&out.sequence, &out.true_flows, &cfg).unwrap();
        let sr = shift_and_add(&stack, &cfg).unwrap();
        report.push(name, max_abs_diff(&hr, &sr), 1e-10);
    }

    // duplicated frames add nothing over the single-frame output
    {
        let hr = smooth_random_texture(24, 24, 1.0, seed.wrapping_add(1));
        let cfg = ReconstructionConfig::new(2).unwrap();
        let frame = decimate(&hr, DecimationFactor::new(2).unwrap()).unwrap();
        let single_seq = Sequence::new(vec![frame.clone()], 0).unwrap();
        let single_stack =
            align_stack(&single_seq, &[FlowField::zeros(12, 12)], &cfg).unwrap();
        let single = shift_and_add(&single_stack, &cfg).unwrap();
        let many = Sequence::new(vec![frame.clone(), frame.clone(), frame], 0).unwrap();
        let flows = vec![FlowField::zeros(12, 12); 3];
        let stack = align_stack(&many, &flows, &cfg).unwrap();
        let fused = shift_and_add(&stack, &cfg).unwrap();
        report.push("recovery_duplicated_reference", max_abs_diff(&single, &fused), 1e-12);
    }

    // the unregularized normal-equations solve agrees with direct fusion
    // when the phases tile the lattice
    {
        let hr = smooth_random_texture(24, 24, 1.0, seed.wrapping_add(2));
        let mut cfg = ReconstructionConfig::new(2).unwrap();
        cfg.tikhonov_eps = 0.0;
        cfg.hole_fill = HoleFill::Zero;
        cfg.solver = SolverMode::ConjugateGradient;
        let spec = SyntheticSequenceSpec {
            hr_source: hr,
            shifts: phase_cover_shifts(2),
            alpha: 2,
            blur: None,
        };
        let out = make_exact_sequence(&spec).unwrap();
        let stack = align_stack(&out.sequence, &out.true_flows, &cfg).unwrap();
        let direct = shift_and_add(&stack, &cfg).unwrap();
        let (solved, _) = solve_normal_equations(&out.sequence, &out.true_flows, &cfg).unwrap();
        report.push("recovery_cg_equivalence", max_abs_diff(&direct, &solved), 1e-6);
    }

    // cap-hitting PSNR doubles as a reporting check
    {
        let hr = smooth_random_texture(32, 32, 1.0, seed.wrapping_add(3));
        let cfg = ReconstructionConfig::new(2).unwrap();
        let spec = SyntheticSequenceSpec {
            hr_source: hr.clone(),
            shifts: phase_cover_shifts(2),
            alpha: 2,
            blur: None,
        };
        let out = make_exact_sequence(&spec).unwrap();
        let stack = align_stack(&out.sequence, &out.true_flows, &cfg).unwrap();
        let sr = shift_and_add(&stack, &cfg).unwrap();
        let db = psnr(&hr, &sr, 1.0).unwrap();
        report.push("recovery_psnr_cap", 99.0 - db, 0.0);
    }

    report
}
