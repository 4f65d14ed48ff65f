//! Command-line surface for the construction kernel.
//!
//! Subcommands: `run` (execute a `.gcs` script), `verify` (claim sweep over
//! a θ grid), `render` (SVG figure), `seed` (reverse construction), and
//! `fixed-points`. Exit codes are a stable contract: 0 success / all claims
//! pass, 1 construction or verification failure, 2 usage or range error.
//!
//! The numeric backend defaults to machine precision; `GEOM_BACKEND=machine`
//! or `GEOM_BACKEND=bigfloat:<bits>` overrides it, and `--backend` wins over
//! the environment.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use trisect::engine::{self, Bindings};
use trisect::methods::{self, MethodId, MethodOptions};
use trisect::render::{self, RenderOptions};
use trisect::scalar::{Backend, BackendSpec, Scalar};
use trisect::script::{self, ScriptSource};
use trisect::verifier::{self, GridSpec, SweepOptions};

use output::{fmt_sig, write_out, OutputFormat};

const EXIT_OK: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "trisect",
    version,
    about = "Ruler-and-compass construction engine, verifier, and renderer"
)]
struct Cli {
    /// Numeric backend: `machine` or `bigfloat:<bits>`.
    #[arg(long, global = true)]
    backend: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a construction script and print its exported points.
    Run(RunArgs),
    /// Sweep a method's claims over a θ grid and report residuals.
    Verify(VerifyArgs),
    /// Render a method figure (or a script) as SVG.
    Render(RenderArgs),
    /// Find the seed angle whose derived angle hits a target.
    Seed(SeedArgs),
    /// Locate fixed points of a method's derived-angle map.
    FixedPoints(FixedPointsArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a `.gcs` script.
    script: PathBuf,
    /// Parameter bindings, repeatable: `--param theta=30`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Angles to measure and print, e.g. `GEB,HBE` (single-letter point
    /// names, vertex in the middle) or `G-E-B` for longer names.
    #[arg(long = "export-angles", value_name = "LIST")]
    export_angles: Option<String>,
    /// Output format for the exported values.
    #[arg(long, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct VerifyArgs {
    /// method1 | method2 | method3
    method: String,
    /// Grid start in degrees.
    #[arg(long)]
    from: f64,
    /// Grid stop in degrees (inclusive).
    #[arg(long)]
    to: f64,
    /// Grid step in degrees.
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    /// Sweep Method I's exterior window (60°, 90°).
    #[arg(long)]
    exterior: bool,
    /// Override the angle-claim tolerance, in degrees.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, default_value = "text")]
    format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// method1 | method2 | method3, or a path to a `.gcs` script.
    target: String,
    /// Seed angle in degrees (required for methods; for scripts use --param).
    #[arg(long)]
    theta: Option<f64>,
    /// Parameter bindings for script targets.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Render Method I's exterior window.
    #[arg(long)]
    exterior: bool,
    #[arg(short, long, value_name = "FILE")]
    output: PathBuf,
    /// Canvas size in pixels.
    #[arg(long, default_value_t = 720.0)]
    size: f64,
    #[arg(long, default_value_t = 48.0)]
    margin: f64,
    #[arg(long)]
    no_labels: bool,
    #[arg(long)]
    no_arcs: bool,
    #[arg(long)]
    no_circles: bool,
}

#[derive(Args)]
struct SeedArgs {
    /// method1 | method2 | method3
    method: String,
    /// Target derived angle β in degrees.
    #[arg(long)]
    beta: f64,
}

#[derive(Args)]
struct FixedPointsArgs {
    /// method1 | method2 | method3
    method: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let backend = match backend_spec(cli.backend.as_deref()) {
        Ok(b) => b,
        Err(msg) => return ExitCode::from(usage_error(&msg)),
    };
    let code = match &cli.command {
        Command::Run(args) => with_backend(backend, RunCmd(args)),
        Command::Verify(args) => with_backend(backend, VerifyCmd(args)),
        Command::Render(args) => with_backend(backend, RenderCmd(args)),
        Command::Seed(args) => with_backend(backend, SeedCmd(args)),
        Command::FixedPoints(args) => with_backend(backend, FixedPointsCmd(args)),
    };
    ExitCode::from(code)
}

fn backend_spec(flag: Option<&str>) -> Result<BackendSpec, String> {
    if let Some(s) = flag {
        return BackendSpec::from_str(s);
    }
    match std::env::var("GEOM_BACKEND") {
        Ok(s) => BackendSpec::from_str(&s),
        Err(_) => Ok(BackendSpec::Machine),
    }
}

/// Runs a generic command body against the selected backend.
fn with_backend(spec: BackendSpec, body: impl CommandBody) -> u8 {
    match spec {
        BackendSpec::Machine => body.call(&Backend::machine()),
        BackendSpec::Bigfloat { precision_bits } => match Backend::bigfloat(precision_bits) {
            Ok(b) => body.call(&b),
            Err(e) => usage_error(&e.to_string()),
        },
    }
}

/// A command body callable at every scalar type; each subcommand is written
/// once, generically, and wrapped in one of these adapters.
trait CommandBody {
    fn call<S: Scalar>(&self, ctx: &Backend<S>) -> u8;
}

struct RunCmd<'a>(&'a RunArgs);
struct VerifyCmd<'a>(&'a VerifyArgs);
struct RenderCmd<'a>(&'a RenderArgs);
struct SeedCmd<'a>(&'a SeedArgs);
struct FixedPointsCmd<'a>(&'a FixedPointsArgs);

impl CommandBody for RunCmd<'_> {
    fn call<S: Scalar>(&self, ctx: &Backend<S>) -> u8 {
        run_script_impl(self.0, ctx)
    }
}
impl CommandBody for VerifyCmd<'_> {
    fn call<S: Scalar>(&self, ctx: &Backend<S>) -> u8 {
        verify_impl(self.0, ctx)
    }
}
impl CommandBody for RenderCmd<'_> {
    fn call<S: Scalar>(&self, ctx: &Backend<S>) -> u8 {
        render_impl(self.0, ctx)
    }
}
impl CommandBody for SeedCmd<'_> {
    fn call<S: Scalar>(&self, ctx: &Backend<S>) -> u8 {
        seed_impl(self.0, ctx)
    }
}
impl CommandBody for FixedPointsCmd<'_> {
    fn call<S: Scalar>(&self, ctx: &Backend<S>) -> u8 {
        fixed_points_impl(self.0, ctx)
    }
}

fn usage_error(msg: &str) -> u8 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn failure(msg: &str) -> u8 {
    eprintln!("error: {msg}");
    EXIT_FAILURE
}

fn parse_bindings(params: &[String]) -> Result<Bindings, String> {
    let mut b = Bindings::new();
    for p in params {
        let Some((name, value)) = p.split_once('=') else {
            return Err(format!("malformed --param `{p}` (expected NAME=VALUE)"));
        };
        let value: f64 = value
            .parse()
            .map_err(|_| format!("malformed value in --param `{p}`"))?;
        b.set(name.trim(), value);
    }
    Ok(b)
}

/// Splits an angle spec into (arm, vertex, arm) names: `GEB` for
/// single-letter names or `G-E-B` in general.
fn parse_angle_spec(spec: &str) -> Result<(String, String, String), String> {
    if spec.contains('-') {
        let parts: Vec<&str> = spec.split('-').collect();
        if parts.len() != 3 || parts.iter().any(|p| p.is_empty()) {
            return Err(format!("angle spec `{spec}` must have three point names"));
        }
        return Ok((parts[0].into(), parts[1].into(), parts[2].into()));
    }
    let chars: Vec<char> = spec.chars().collect();
    if chars.len() != 3 {
        return Err(format!(
            "angle spec `{spec}` must be three single-letter names or use dashes"
        ));
    }
    Ok((
        chars[0].to_string(),
        chars[1].to_string(),
        chars[2].to_string(),
    ))
}

fn run_script_impl<S: Scalar>(args: &RunArgs, ctx: &Backend<S>) -> u8 {
    let text = match std::fs::read_to_string(&args.script) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("cannot read {}: {e}", args.script.display())),
    };
    let name = args
        .script
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| args.script.display().to_string());
    let program = match script::parse(&ScriptSource::new(name, text)) {
        Ok(p) => p,
        Err(e) => return usage_error(&e.to_string()),
    };
    let bindings = match parse_bindings(&args.params) {
        Ok(b) => b,
        Err(msg) => return usage_error(&msg),
    };
    let (env, _trace) = match engine::execute(&program, &bindings, ctx) {
        Ok(r) => r,
        Err(e @ engine::EngineError::MissingBinding(_))
        | Err(e @ engine::EngineError::UnexpectedBinding(_)) => {
            return usage_error(&e.to_string())
        }
        Err(e) => return failure(&e.to_string()),
    };

    let mut angle_lines = Vec::new();
    if let Some(spec_list) = &args.export_angles {
        for spec in spec_list.split(',') {
            let spec = spec.trim();
            if spec.is_empty() {
                continue;
            }
            let (p, v, q) = match parse_angle_spec(spec) {
                Ok(t) => t,
                Err(msg) => return usage_error(&msg),
            };
            match engine::measure_angle(&env, &v, &p, &q, ctx) {
                Ok(a) => angle_lines.push((spec.to_string(), a.to_f64())),
                Err(e) => return failure(&e.to_string()),
            }
        }
    }

    let mut out = String::new();
    match args.format {
        OutputFormat::Text => {
            for name in &program.exports {
                if let Ok(p) = env.point(name) {
                    out.push_str(&format!(
                        "{name}=({}, {})\n",
                        fmt_sig(p.x.to_f64()),
                        fmt_sig(p.y.to_f64())
                    ));
                }
            }
            if !angle_lines.is_empty() {
                let joined: Vec<String> = angle_lines
                    .iter()
                    .map(|(spec, v)| format!("{spec}={}", fmt_sig(*v)))
                    .collect();
                out.push_str(&joined.join(" "));
                out.push('\n');
            }
        }
        OutputFormat::JsonLines => {
            for name in &program.exports {
                if let Ok(p) = env.point(name) {
                    out.push_str(&format!(
                        "{{\"point\":\"{name}\",\"x\":{},\"y\":{}}}\n",
                        p.x.to_f64(),
                        p.y.to_f64()
                    ));
                }
            }
            for (spec, v) in &angle_lines {
                out.push_str(&format!("{{\"angle\":\"{spec}\",\"deg\":{v}}}\n"));
            }
        }
        OutputFormat::Csv => {
            out.push_str("kind,name,x_or_deg,y\n");
            for name in &program.exports {
                if let Ok(p) = env.point(name) {
                    out.push_str(&format!(
                        "point,{name},{},{}\n",
                        p.x.to_f64(),
                        p.y.to_f64()
                    ));
                }
            }
            for (spec, v) in &angle_lines {
                out.push_str(&format!("angle,{spec},{v},\n"));
            }
        }
    }
    print!("{out}");
    EXIT_OK
}

fn verify_impl<S: Scalar>(args: &VerifyArgs, ctx: &Backend<S>) -> u8 {
    let method = match MethodId::from_str(&args.method) {
        Ok(m) => m,
        Err(msg) => return usage_error(&msg),
    };
    let grid = GridSpec::new(args.from, args.to, args.step);
    let opts = SweepOptions {
        exterior: args.exterior,
        angle_tol_deg: args.tolerance,
        skip_fixed_points: false,
    };
    let report = match verifier::sweep(method, grid, opts, ctx) {
        Ok(r) => r,
        Err(e @ verifier::VerifyError::GridOutOfRange { .. }) => {
            return usage_error(&e.to_string())
        }
        Err(e) => return failure(&e.to_string()),
    };
    let rendered = output::render_sweep(&report, args.format);
    if let Err(e) = write_out(args.output.as_deref(), &rendered) {
        return failure(&format!("cannot write output: {e}"));
    }
    if report.all_pass {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn render_impl<S: Scalar>(args: &RenderArgs, ctx: &Backend<S>) -> u8 {
    let looks_like_script = args.target.contains('.') || args.target.contains('/');
    let (trace, marks) = if looks_like_script {
        let bindings = match parse_bindings(&args.params) {
            Ok(mut b) => {
                if let Some(theta) = args.theta {
                    b.set("theta", theta);
                }
                b
            }
            Err(msg) => return usage_error(&msg),
        };
        let text = match std::fs::read_to_string(&args.target) {
            Ok(t) => t,
            Err(e) => return usage_error(&format!("cannot read {}: {e}", args.target)),
        };
        let program = match script::parse(&ScriptSource::new(args.target.clone(), text)) {
            Ok(p) => p,
            Err(e) => return usage_error(&e.to_string()),
        };
        match engine::execute(&program, &bindings, ctx) {
            Ok((_, trace)) => (trace, Vec::new()),
            Err(e @ engine::EngineError::MissingBinding(_))
            | Err(e @ engine::EngineError::UnexpectedBinding(_)) => {
                return usage_error(&e.to_string())
            }
            Err(e) => return failure(&e.to_string()),
        }
    } else {
        let method = match MethodId::from_str(&args.target) {
            Ok(m) => m,
            Err(msg) => return usage_error(&msg),
        };
        let Some(theta) = args.theta else {
            return usage_error("--theta is required when rendering a method");
        };
        let opts = MethodOptions {
            exterior: args.exterior,
        };
        match methods::run_method_full(method, theta, &opts, ctx) {
            Ok((_, _, trace)) => (trace, methods::report_angle_marks(method)),
            Err(e @ methods::MethodError::ThetaOutOfRange { .. }) => {
                return usage_error(&e.to_string())
            }
            Err(e) => return failure(&e.to_string()),
        }
    };

    let render_opts = RenderOptions {
        size_px: args.size,
        margin_px: args.margin,
        show_labels: !args.no_labels,
        show_angle_arcs: !args.no_arcs,
        show_construction_circles: !args.no_circles,
        angle_arcs: marks
            .iter()
            .map(|[a, b, c]| [a.to_string(), b.to_string(), c.to_string()])
            .collect(),
        ..RenderOptions::default()
    };
    let svg = match render::to_svg(&trace, &render_opts) {
        Ok(s) => s,
        Err(e) => return failure(&e.to_string()),
    };
    if let Err(e) = std::fs::write(&args.output, svg) {
        return failure(&format!("cannot write {}: {e}", args.output.display()));
    }
    EXIT_OK
}

fn seed_impl<S: Scalar>(args: &SeedArgs, ctx: &Backend<S>) -> u8 {
    let method = match MethodId::from_str(&args.method) {
        Ok(m) => m,
        Err(msg) => return usage_error(&msg),
    };
    let theta = match methods::inverse_seed(method, args.beta) {
        Ok(t) => t,
        Err(e) => return usage_error(&e.to_string()),
    };
    match methods::run_method(method, theta, ctx) {
        Ok(report) => {
            let beta_back = report.seed_beta().to_f64();
            let pass = (beta_back - args.beta).abs() <= 1e-9;
            println!(
                "theta={} roundtrip_beta={} {}",
                fmt_sig(theta),
                fmt_sig(beta_back),
                if pass { "pass" } else { "fail" }
            );
            if pass {
                EXIT_OK
            } else {
                EXIT_FAILURE
            }
        }
        Err(e) => failure(&e.to_string()),
    }
}

fn fixed_points_impl<S: Scalar>(args: &FixedPointsArgs, ctx: &Backend<S>) -> u8 {
    let method = match MethodId::from_str(&args.method) {
        Ok(m) => m,
        Err(msg) => return usage_error(&msg),
    };
    let points = methods::fixed_points(method, ctx);
    if points.is_empty() {
        println!("{method}: no fixed point in the valid interval");
        return EXIT_OK;
    }
    for theta in points {
        match methods::run_method(method, theta, ctx) {
            Ok(report) => {
                let derived = report.derived().to_f64();
                println!(
                    "{method}: theta={} derived={} residual={:e}",
                    fmt_sig(theta),
                    fmt_sig(derived),
                    derived - theta
                );
            }
            Err(e) => return failure(&e.to_string()),
        }
    }
    EXIT_OK
}
