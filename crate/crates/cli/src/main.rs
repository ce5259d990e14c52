//! Command-line front end: certificates, orbit verification, branch tracing.

mod reproduce;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use so2deg::certify::{continuation_certificate, ExistenceCertificate};
use so2deg::galerkin::{
    length_scale, BranchConfig, BranchRecord, ConstantFamily, GalerkinError, OrbitSearch, ParameterFamily,
    ShiftedFamily,
};
use so2deg::{analyze, search_orbit, trace_branch, AnalysisConfig, GalerkinConfig, SystemSpec, Tolerances, Verdict};

#[derive(Parser)]
#[command(name = "so2deg", version, about = "Equivariant-degree existence certificates for periodic orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the existence certificate of a system file.
    Analyze {
        input: PathBuf,
        #[command(flatten)]
        opts: Common,
    },
    /// Certificate, then a Galerkin orbit at the witness mode.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        opts: Common,
        #[command(flatten)]
        galerkin: GalerkinOpts,
        /// Write the accepted orbit as CSV (t, x_1, ..., x_n).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Continuation statement plus numerical branch tracing from a found orbit.
    Trace {
        input: PathBuf,
        #[command(flatten)]
        opts: Common,
        #[command(flatten)]
        galerkin: GalerkinOpts,
        #[arg(long, value_enum, default_value_t = Family::Shifted)]
        family: Family,
        #[arg(long, value_enum, default_value_t = Direction::Both)]
        direction: Direction,
        #[arg(long, default_value_t = 20_000)]
        max_steps: usize,
    },
    /// Rebuild a worked example from fixed inputs and compare every number.
    Reproduce {
        #[arg(value_parser = ["6.5", "6.6", "6.7", "6.8", "6.9"])]
        example: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Quick randomized consistency checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct Common {
    /// Override the period.
    #[arg(long = "T", value_name = "PERIOD")]
    period: Option<String>,
    /// Resonance tolerance, relative to 1 + ||A||_F.
    #[arg(long, default_value_t = Tolerances::default().resonance)]
    tol_res: f64,
    /// Eigenvalue clustering tolerance, relative to 1 + ||A||_F.
    #[arg(long, default_value_t = Tolerances::default().cluster)]
    tol_cluster: f64,
    /// Largest compared Z_k coordinate.
    #[arg(long)]
    kmax: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct GalerkinOpts {
    /// Fourier modes of the initial solve.
    #[arg(long, default_value_t = GalerkinConfig::default().modes)]
    modes: usize,
    #[arg(long, default_value_t = GalerkinConfig::default().newton_tol)]
    newton_tol: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    /// V_lambda = V_0.
    Constant,
    /// V_lambda = V_0 + lambda |x|^2 / 2.
    Shifted,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Up,
    Down,
    Both,
}

/// Exit status: proven / verified.
const OK: u8 = 0;
const ERROR: u8 = 1;
const UNDECIDED: u8 = 2;

fn main() -> ExitCode {
    // `so2deg ... | head` closes stdout early; exit quietly instead of panicking
    let default_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(move |info| {
        let msg = info
            .payload()
            .downcast_ref::<String>()
            .map(String::as_str)
            .or_else(|| info.payload().downcast_ref::<&str>().copied())
            .unwrap_or("");
        if msg.contains("Broken pipe") {
            std::process::exit(OK.into());
        }
        default_hook(info);
    }));
    // usage errors exit with 1; clap's default 2 would read as "not decided"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ERROR } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze { input, opts } => cmd_analyze(&input, &opts),
        Command::Verify {
            input,
            opts,
            galerkin,
            csv,
        } => cmd_verify(&input, &opts, &galerkin, csv.as_deref()),
        Command::Trace {
            input,
            opts,
            galerkin,
            family,
            direction,
            max_steps,
        } => cmd_trace(&input, &opts, &galerkin, family, direction, max_steps),
        Command::Reproduce { example, format } => reproduce::run(&example, format == Format::Json),
        Command::Selftest { seed, format } => selftest::run(seed, format == Format::Json),
    }
}

fn load(input: &Path, opts: &Common) -> Result<SystemSpec> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let spec = SystemSpec::from_json_str(&text).with_context(|| format!("parsing {}", input.display()))?;
    match &opts.period {
        Some(t) => {
            let t = so2deg::spectral::parse_entry(t).context("--T")?;
            Ok(spec.with_period(t)?)
        }
        None => Ok(spec),
    }
}

fn analysis_config(opts: &Common) -> AnalysisConfig {
    AnalysisConfig {
        tolerances: Tolerances {
            cluster: opts.tol_cluster,
            resonance: opts.tol_res,
        },
        k_max: opts.kmax,
    }
}

fn galerkin_config(g: &GalerkinOpts) -> Result<GalerkinConfig> {
    if g.modes == 0 {
        bail!("--modes must be at least 1");
    }
    let d = GalerkinConfig::default();
    Ok(GalerkinConfig {
        modes: g.modes,
        max_modes: d.max_modes.max(g.modes),
        newton_tol: g.newton_tol,
        ..d
    })
}

fn verdict_code(cert: &ExistenceCertificate) -> u8 {
    match cert.verdict {
        Verdict::Proven => OK,
        Verdict::NotDecided => UNDECIDED,
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialise"));
}

fn cmd_analyze(input: &Path, opts: &Common) -> Result<u8> {
    let spec = load(input, opts)?;
    let cert = analyze(&spec, &analysis_config(opts))?;
    match opts.format {
        Format::Json => println!("{}", cert.to_json()),
        Format::Text => print!("{cert}"),
    }
    Ok(verdict_code(&cert))
}

fn search_summary(search: &OrbitSearch) -> String {
    let mut out = String::new();
    for a in &search.attempts {
        out += &format!(
            "  seed at {} ({:?}), amplitude {:.3}: {}\n",
            a.seed.center_id, a.seed.origin, a.seed.amplitude, a.outcome
        );
    }
    if let Some(o) = &search.orbit {
        out += &format!(
            "orbit: minimal period {:.10} (Z_{} isotropy), {} modes, {} Newton steps\n",
            o.minimal_period, o.isotropy_k, o.modes, o.newton_iterations
        );
        out += &format!(
            "  gradient norm {:.2e}, ODE residual {:.2e}, tail {:.2e}\n",
            o.gradient_norm, o.ode_residual, o.tail_ratio
        );
        out += &format!(
            "  sup |u - mean| {:.6}, RK4 ({} steps): deviation {:.2e}, periodicity defect {:.2e}\n",
            o.distance_to_stationary, o.rk4.steps, o.rk4.trajectory_deviation, o.rk4.periodicity_defect
        );
    } else {
        out += "no orbit accepted\n";
    }
    out
}

fn cmd_verify(input: &Path, opts: &Common, g: &GalerkinOpts, csv: Option<&Path>) -> Result<u8> {
    let spec = load(input, opts)?;
    if spec.hessian_only() {
        bail!(GalerkinError::NoPotential);
    }
    let gcfg = galerkin_config(g)?;
    let cert = analyze(&spec, &analysis_config(opts))?;
    let Some(k) = cert.witness_k else {
        match opts.format {
            Format::Json => print_json(&json!({ "certificate": cert, "search": null })),
            Format::Text => println!("{cert}\nno witness coordinate; nothing to verify"),
        }
        return Ok(UNDECIDED);
    };
    let search = search_orbit(&spec, k, &gcfg)?;
    if let (Some(path), Some(orbit)) = (csv, &search.orbit) {
        std::fs::write(path, orbit.fourier_loop.to_csv(1000)).with_context(|| format!("writing {}", path.display()))?;
    }
    match opts.format {
        Format::Json => print_json(&json!({ "certificate": cert, "search": search })),
        Format::Text => {
            println!("verdict: {} (witness Z_{k}, T = {})", cert.verdict, cert.period);
            println!("searching mode {k}");
            print!("{}", search_summary(&search));
        }
    }
    Ok(if search.orbit.is_some() { OK } else { UNDECIDED })
}

fn branch_json(rec: &BranchRecord) -> Value {
    json!({
        "direction": rec.direction,
        "verdict": rec.verdict,
        "reason": rec.reason,
        "steps": rec.steps,
        "final_lambda": rec.final_lambda,
        "isotropy_changes": rec.isotropy_changes,
        "isotropy_constant": rec.isotropy_constant(),
        "symmetry_breaking": rec.symmetry_breaking,
    })
}

fn cmd_trace(
    input: &Path,
    opts: &Common,
    g: &GalerkinOpts,
    family: Family,
    direction: Direction,
    max_steps: usize,
) -> Result<u8> {
    let spec = load(input, opts)?;
    let pot = spec.potential.clone().ok_or(GalerkinError::NoPotential)?;
    let acfg = analysis_config(opts);
    let cert = analyze(&spec, &acfg)?;
    if cert.verdict != Verdict::Proven {
        match opts.format {
            Format::Json => print_json(&json!({ "certificate": cert })),
            Format::Text => println!("{cert}\nbase system not certified; nothing to continue"),
        }
        return Ok(UNDECIDED);
    }
    let cont = continuation_certificate(&spec, &acfg)?;
    let gcfg = galerkin_config(g)?;
    let search = search_orbit(&spec, cont.witness_k, &gcfg)?;
    let Some(orbit) = &search.orbit else {
        match opts.format {
            Format::Json => print_json(&json!({ "continuation": cont, "search": search })),
            Format::Text => print!("{cont}\n{}", search_summary(&search)),
        }
        return Ok(UNDECIDED);
    };
    let fam: Arc<dyn ParameterFamily> = match family {
        Family::Constant => Arc::new(ConstantFamily { base: pot.clone() }),
        Family::Shifted => Arc::new(ShiftedFamily { base: pot.clone() }),
    };
    let sys = so2deg::galerkin::GalerkinSystem::new(pot, spec.v_inf.clone(), spec.period, orbit.modes)?;
    let bcfg = BranchConfig {
        length_scale: length_scale(&spec),
        max_steps,
        ..BranchConfig::default()
    };
    let dirs: &[f64] = match direction {
        Direction::Up => &[1.0],
        Direction::Down => &[-1.0],
        Direction::Both => &[-1.0, 1.0],
    };
    let mut records = Vec::new();
    for &d in dirs {
        records.push(trace_branch(fam.as_ref(), &sys, orbit, d, &bcfg)?);
    }
    match opts.format {
        Format::Json => print_json(&json!({
            "continuation": cont,
            "start": orbit,
            "branches": records.iter().map(branch_json).collect::<Vec<_>>(),
        })),
        Format::Text => {
            print!("{cont}");
            println!(
                "start orbit: mode {}, minimal period {:.10}, residual {:.2e}",
                cont.witness_k, orbit.minimal_period, orbit.ode_residual
            );
            for r in &records {
                println!(
                    "branch lambda {}: {} after {} steps, final lambda {:.6}: {}",
                    if r.direction < 0.0 { "<= 0" } else { ">= 0" },
                    r.verdict,
                    r.steps,
                    r.final_lambda,
                    r.reason
                );
                if r.isotropy_changes.is_empty() {
                    println!("  isotropy constant");
                }
                for (step, from, to) in &r.isotropy_changes {
                    println!("  isotropy change at step {step}: {from:?} -> {to:?}");
                }
                println!("  symmetry breaking: {}", r.symmetry_breaking);
            }
        }
    }
    Ok(OK)
}
