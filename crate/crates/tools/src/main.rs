use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use subpix_core::flow::{estimate_flow_pyramidal, refine_flow, warp_loss, FlowEstimationConfig};
use subpix_core::metrics::{psnr, ssim};
use subpix_core::ops::BlurSpec;
use subpix_core::reconstruct::{
    align_stack, shift_and_add, solve_normal_equations, AlignmentMode, HoleFill,
    ReconstructionConfig, SolverMode, HOLE_THRESHOLD,
};
use subpix_core::synth::{
    add_gaussian_noise, degrade_bicubic, make_exact_sequence, DegradationMethod, DegradationSpec,
    SyntheticSequenceSpec,
};
use subpix_core::{FlowField, Sequence};
use subpix_tools::io::{
    flow_file_name, list_frame_files, read_flo, read_image, read_sequence, write_flo,
    write_image, write_sequence, SequenceManifest,
};
use subpix_tools::manifest::RunManifest;
use subpix_tools::verify::{run_adjoint_suite, run_gradcheck_suite, run_recovery_suite, SuiteReport};
use subpix_tools::ToolError;

/// Multi-frame video super-resolution toolkit.
#[derive(Parser)]
#[command(name = "subpix", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate LR frames from HR input.
    Degrade(DegradeArgs),
    /// Estimate optical flow between two frames.
    Flow(FlowArgs),
    /// Fuse an LR sequence into an HR frame.
    Reconstruct(ReconstructArgs),
    /// Compare two images with PSNR/SSIM.
    Eval(EvalArgs),
    /// Run the built-in verification suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DegradeMethod {
    /// Antialiased bicubic downsampling of each input frame.
    Bicubic,
    /// Literal imaging model: shift the first frame, then decimate.
    Exact,
}

#[derive(Args)]
struct DegradeArgs {
    /// Directory of HR input frames (.png or .pgm).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output sequence directory.
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long, default_value_t = 2)]
    alpha: usize,
    #[arg(long, value_enum, default_value_t = DegradeMethod::Bicubic)]
    method: DegradeMethod,
    /// Additive Gaussian noise level (0 disables).
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shift list for --method exact: one "dx dy" pair per line, in LR
    /// pixel units, first line 0 0. True flows are emitted alongside.
    #[arg(long)]
    shifts: Option<PathBuf>,
    /// Optional Gaussian blur sigma applied before decimation (exact
    /// method only).
    #[arg(long)]
    blur_sigma: Option<f64>,
}

#[derive(Args)]
struct FlowArgs {
    /// Reference frame (warped toward the target).
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Target frame.
    #[arg(long)]
    target: PathBuf,
    /// Output .flo path.
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    /// Weight of the TV smoothness term.
    #[arg(long, default_value_t = 0.01)]
    lambda1: f64,
    /// Polish iterations at full resolution whose loss trace is printed.
    #[arg(long, default_value_t = 10)]
    trace_iters: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlignArg {
    /// Sub-pixel splat onto the HR grid.
    Spmc,
    /// Backward warp in LR space, then bicubic upsampling.
    Bw,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    /// Feed-forward shift-and-add fusion.
    Sna,
    /// Conjugate-gradient normal-equations solve.
    Cg,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Sequence directory (frames + manifest.txt).
    #[arg(long = "seq")]
    sequence: PathBuf,
    /// Scale factor; defaults to the sequence manifest value.
    #[arg(long)]
    alpha: Option<usize>,
    #[arg(long, value_enum, default_value_t = AlignArg::Spmc)]
    align: AlignArg,
    #[arg(long, value_enum, default_value_t = SolverArg::Sna)]
    solver: SolverArg,
    /// Directory of flow_{i}_to_ref.flo files, or "auto" to estimate.
    #[arg(long, default_value = "auto")]
    flows: String,
    /// Use only the first N frames.
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Psnr,
    Ssim,
    Both,
}

#[derive(Args)]
struct EvalArgs {
    image_a: PathBuf,
    image_b: PathBuf,
    /// Pixels to crop from every side before computing metrics.
    #[arg(long, default_value_t = 0)]
    border: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Both)]
    metric: MetricArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Adjoint,
    Gradcheck,
    Recovery,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Degrade(args) => cmd_degrade(&args),
        Command::Flow(args) => cmd_flow(&args),
        Command::Reconstruct(args) => cmd_reconstruct(&args),
        Command::Eval(args) => cmd_eval(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn cmd_degrade(args: &DegradeArgs) -> Result<ExitCode, ToolError> {
    let mut manifest = RunManifest::new("degrade");
    manifest.set("in", args.input.display());
    manifest.set("out", args.output.display());
    manifest.set("alpha", args.alpha);
    manifest.set("noise_sigma", args.noise_sigma);
    manifest.set("seed", args.seed);

    match args.method {
        DegradeMethod::Bicubic => {
            manifest.set("method", "bicubic");
            let spec = DegradationSpec::new(args.alpha, DegradationMethod::BicubicChain, args.noise_sigma)?;
            let files = list_frame_files(&args.input)?;
            let mut frames = Vec::with_capacity(files.len());
            for (i, file) in files.iter().enumerate() {
                let hr = read_image(file)?;
                frames.push(degrade_bicubic(&hr, &spec, args.seed.wrapping_add(i as u64))?);
            }
            let seq = Sequence::new(frames, 0)?;
            let seq_manifest = SequenceManifest {
                frames: seq.len(),
                reference_index: 0,
                alpha: args.alpha,
                seed: args.seed,
            };
            write_sequence(&args.output, &seq, &seq_manifest)?;
        }
        DegradeMethod::Exact => {
            manifest.set("method", "exact");
            let shifts_path = args
                .shifts
                .as_ref()
                .ok_or_else(|| ToolError::Format("--method exact requires --shifts".into()))?;
            manifest.set("shifts", shifts_path.display());
            let shifts = read_shifts(shifts_path)?;
            let files = list_frame_files(&args.input)?;
            let hr_source = read_image(&files[0])?;
            let blur = match args.blur_sigma {
                Some(sigma) => Some(BlurSpec::new(sigma)?),
                None => None,
            };
            let spec = SyntheticSequenceSpec {
                hr_source,
                shifts,
                alpha: args.alpha,
                blur,
            };
            let exact = make_exact_sequence(&spec)?;
            let frames: Vec<_> = exact
                .sequence
                .frames()
                .iter()
                .enumerate()
                .map(|(i, frame)| {
                    if args.noise_sigma > 0.0 {
                        add_gaussian_noise(frame, args.noise_sigma, args.seed.wrapping_add(i as u64))
                    } else {
                        frame.clone()
                    }
                })
                .collect();
            let seq = Sequence::new(frames, 0)?;
            let seq_manifest = SequenceManifest {
                frames: seq.len(),
                reference_index: 0,
                alpha: args.alpha,
                seed: args.seed,
            };
            write_sequence(&args.output, &seq, &seq_manifest)?;
            // true flows in the F_{i->0} orientation, one per frame
            for (i, flow) in exact.true_flows.iter().enumerate() {
                write_flo(&args.output.join(flow_file_name(i)), flow)?;
            }
            manifest.set(
                "integer_hr_shifts",
                exact
                    .integer_hr_shift
                    .iter()
                    .map(|b| if *b { "1" } else { "0" })
                    .collect::<Vec<_>>()
                    .join(","),
            );
            manifest.set("flow_orientation", "i_to_ref");
        }
    }
    manifest.write(&args.output.join("run_manifest.txt"))?;
    Ok(ExitCode::SUCCESS)
}

fn read_shifts(path: &Path) -> Result<Vec<(f64, f64)>, ToolError> {
    let text = std::fs::read_to_string(path)?;
    let mut shifts = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |s: Option<&str>| -> Result<f64, ToolError> {
            s.and_then(|s| s.parse().ok())
                .ok_or_else(|| ToolError::Format(format!("bad shift line: {line}")))
        };
        shifts.push((parse(parts.next())?, parse(parts.next())?));
    }
    Ok(shifts)
}

fn cmd_flow(args: &FlowArgs) -> Result<ExitCode, ToolError> {
    let mut manifest = RunManifest::new("flow");
    manifest.set("ref", args.reference.display());
    manifest.set("target", args.target.display());
    manifest.set("out", args.output.display());
    manifest.set("levels", args.levels);
    manifest.set("iters", args.iters);
    manifest.set("lambda1", args.lambda1);

    let reference = read_image(&args.reference)?;
    let target = read_image(&args.target)?;
    let cfg = FlowEstimationConfig {
        pyramid_levels: args.levels,
        iterations_per_level: args.iters,
        lambda1: args.lambda1,
        ..FlowEstimationConfig::default()
    };
    let mut flow = estimate_flow_pyramidal(&reference, &target, &cfg)?;

    // full-resolution polish, one accepted step per printed line; the
    // refinement never accepts a loss increase, so the trace is monotone
    let polish_cfg = FlowEstimationConfig {
        iterations_per_level: 1,
        ..cfg
    };
    let report = warp_loss(&reference, &target, &flow, args.lambda1)?;
    println!(
        "iter=0 data={:.6} tv={:.6} total={:.6}",
        report.data_term, report.tv_term, report.total
    );
    for iter in 1..=args.trace_iters {
        flow = refine_flow(&reference, &target, &flow, &polish_cfg)?;
        let report = warp_loss(&reference, &target, &flow, args.lambda1)?;
        println!(
            "iter={iter} data={:.6} tv={:.6} total={:.6}",
            report.data_term, report.tv_term, report.total
        );
    }
    write_flo(&args.output, &flow)?;
    let manifest_path = args.output.with_extension("manifest.txt");
    manifest.write(&manifest_path)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_reconstruct(args: &ReconstructArgs) -> Result<ExitCode, ToolError> {
    let mut manifest = RunManifest::new("reconstruct");
    manifest.set("seq", args.sequence.display());
    manifest.set("out", args.output.display());

    let (full_seq, seq_manifest) = read_sequence(&args.sequence)?;
    let alpha = args.alpha.unwrap_or(seq_manifest.alpha);
    manifest.set("alpha", alpha);

    let seq = match args.frames {
        Some(n) => {
            if n == 0 || n > full_seq.len() || seq_manifest.reference_index >= n {
                return Err(ToolError::Format(format!(
                    "--frames {n} out of range for a {}-frame sequence",
                    full_seq.len()
                )));
            }
            Sequence::new(
                full_seq.frames()[..n].to_vec(),
                seq_manifest.reference_index,
            )?
        }
        None => full_seq,
    };
    manifest.set("frames", seq.len());

    let mut cfg = ReconstructionConfig::new(alpha)?;
    cfg.alignment = match args.align {
        AlignArg::Spmc => AlignmentMode::Spmc,
        AlignArg::Bw => AlignmentMode::BackwardWarp,
    };
    cfg.solver = match args.solver {
        SolverArg::Sna => SolverMode::ShiftAndAdd,
        SolverArg::Cg => SolverMode::ConjugateGradient,
    };
    manifest.set("align", if matches!(args.align, AlignArg::Spmc) { "spmc" } else { "bw" });
    manifest.set("solver", if matches!(args.solver, SolverArg::Sna) { "sna" } else { "cg" });

    // flows are read or estimated in the F_{i->0} orientation (splatting
    // convention); the backward-warp baseline needs F_{0->i} and gets the
    // negation, which is exact for the global-shift sequences this tool
    // generates
    let to_ref_flows = load_or_estimate_flows(&args.flows, &seq, &mut manifest)?;
    let align_flows: Vec<FlowField> = match cfg.alignment {
        AlignmentMode::Spmc => to_ref_flows,
        AlignmentMode::BackwardWarp => to_ref_flows.iter().map(FlowField::negated).collect(),
    };
    manifest.set(
        "flow_orientation",
        if matches!(cfg.alignment, AlignmentMode::Spmc) { "i_to_ref" } else { "ref_to_i" },
    );

    let stack = align_stack(&seq, &align_flows, &cfg)?;
    for (i, weights) in stack.weights.iter().enumerate() {
        let covered = weights
            .data()
            .iter()
            .filter(|&&w| w > HOLE_THRESHOLD)
            .count();
        let fraction = covered as f64 / weights.data().len() as f64;
        println!("frame_{i}_coverage={fraction:.6}");
        manifest.set(&format!("frame_{i}_coverage"), format!("{fraction:.6}"));
    }

    let output = match cfg.solver {
        SolverMode::ShiftAndAdd => shift_and_add(&stack, &cfg)?,
        SolverMode::ConjugateGradient => {
            if !matches!(cfg.alignment, AlignmentMode::Spmc) {
                return Err(ToolError::Format(
                    "--solver cg requires --align spmc".into(),
                ));
            }
            let (solved, report) = solve_normal_equations(&seq, &align_flows, &cfg)?;
            println!("cg_iterations={}", report.iterations);
            println!("cg_converged={}", report.converged);
            println!("cg_residual={:.3e}", report.final_residual());
            manifest.set("cg_iterations", report.iterations);
            manifest.set("cg_converged", report.converged);
            let mut filled = solved;
            fill_holes(&mut filled, &stack, &cfg);
            filled
        }
    };
    write_image(&args.output, &output)?;
    manifest.write(&args.output.with_extension("manifest.txt"))?;
    Ok(ExitCode::SUCCESS)
}

/// Replaces uncovered HR pixels of a CG solution per the hole-fill policy.
fn fill_holes(
    img: &mut subpix_core::ImageGrid,
    stack: &subpix_core::reconstruct::AlignedStack,
    cfg: &ReconstructionConfig,
) {
    let n = img.data().len();
    let mut total = vec![0.0; n];
    for w in &stack.weights {
        for (t, v) in total.iter_mut().zip(w.data()) {
            *t += v;
        }
    }
    for i in 0..n {
        if total[i] <= HOLE_THRESHOLD {
            img.data_mut()[i] = match cfg.hole_fill {
                HoleFill::Zero => 0.0,
                HoleFill::BicubicReference => stack.reference_upsampled.data()[i],
            };
        }
    }
}

fn load_or_estimate_flows(
    flows_arg: &str,
    seq: &Sequence,
    manifest: &mut RunManifest,
) -> Result<Vec<FlowField>, ToolError> {
    let (w, h) = seq.frame_dims();
    if flows_arg == "auto" {
        manifest.set("flows", "auto");
        let cfg = FlowEstimationConfig::default();
        let mut flows = Vec::with_capacity(seq.len());
        for (i, frame) in seq.frames().iter().enumerate() {
            if i == seq.reference_index() {
                flows.push(FlowField::zeros(w, h));
            } else {
                flows.push(estimate_flow_pyramidal(seq.reference(), frame, &cfg)?);
            }
        }
        Ok(flows)
    } else {
        let dir = PathBuf::from(flows_arg);
        manifest.set("flows", dir.display());
        let mut flows = Vec::with_capacity(seq.len());
        for i in 0..seq.len() {
            if i == seq.reference_index() {
                flows.push(FlowField::zeros(w, h));
                continue;
            }
            let path = dir.join(flow_file_name(i));
            if !path.is_file() {
                return Err(ToolError::MissingInput(path));
            }
            flows.push(read_flo(&path)?);
        }
        Ok(flows)
    }
}

fn cmd_eval(args: &EvalArgs) -> Result<ExitCode, ToolError> {
    let a = read_image(&args.image_a)?.crop_border(args.border)?;
    let b = read_image(&args.image_b)?.crop_border(args.border)?;
    if matches!(args.metric, MetricArg::Psnr | MetricArg::Both) {
        println!("psnr={:.4}", psnr(&a, &b, 1.0)?);
    }
    if matches!(args.metric, MetricArg::Ssim | MetricArg::Both) {
        println!("ssim={:.4}", ssim(&a, &b, 1.0)?);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, ToolError> {
    let mut report = SuiteReport::default();
    if matches!(args.suite, SuiteArg::Adjoint | SuiteArg::All) {
        report.merge(run_adjoint_suite(args.seed, args.trials));
    }
    if matches!(args.suite, SuiteArg::Gradcheck | SuiteArg::All) {
        report.merge(run_gradcheck_suite(args.seed, args.trials));
    }
    if matches!(args.suite, SuiteArg::Recovery | SuiteArg::All) {
        report.merge(run_recovery_suite(args.seed));
    }
    let mut ok = true;
    for check in &report.checks {
        let status = if check.passed() { "pass" } else { "fail" };
        println!(
            "check={} max_error={:.3e} tolerance={:.3e} status={status}",
            check.name, check.max_error, check.tolerance
        );
        ok &= check.passed();
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
