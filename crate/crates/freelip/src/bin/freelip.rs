//! Command-line surface over the library: validate instance files, build
//! averaged quotients, evaluate norms, apply the averaging projection, and
//! run the verification suite.
//!
//! Exit codes: 0 on success/overall pass, 1 on a verification or validation
//! failure, 2 on input errors (unreadable files, bad flags, malformed
//! specs). `clap` usage errors also exit with 2.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use freelip::free::{kr_norm, lip_norm, FreeVector, LipFunction};
use freelip::group::{average_metric, check_isometric, distortion_bounds};
use freelip::instance::{load_instance, parse_for_verify, AnyInstance, Instance, VerifyTarget};
use freelip::metric::PointedMetricSpace;
use freelip::projections::{project_free, project_lip};
use freelip::quotient::QuotientSpace;
use freelip::scalar::Scalar;
use freelip::verify::{run_target, Status};

#[derive(Parser)]
#[command(
    name = "freelip",
    version,
    about = "Transport norms, group averaging and orbit quotients over finite pointed metric spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an instance file and report whether it is valid.
    Validate {
        /// Instance file (JSON).
        file: PathBuf,
    },
    /// Average the metric over the group, form the orbit quotient, and
    /// print it as an instance document (reusable as input).
    Quotient {
        /// Instance file (JSON).
        file: PathBuf,
        /// Write the quotient instance to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transport norm of a free vector, with an optimal plan.
    Norm {
        /// Instance file (JSON).
        file: PathBuf,
        /// Comma-separated label:coefficient pairs, e.g. "a:1,b:-2".
        /// Coefficients may be integers, decimals, or fractions "p/q".
        #[arg(long)]
        vector: String,
    },
    /// Smallest Lipschitz constant of a function vanishing at the base.
    Lipnorm {
        /// Instance file (JSON).
        file: PathBuf,
        /// Comma-separated label:value pairs; omitted points get value 0.
        #[arg(long)]
        function: String,
    },
    /// Group-average a vector or a function. The action must already be
    /// isometric; otherwise run `quotient` first to average the metric.
    Project {
        /// Instance file (JSON).
        file: PathBuf,
        /// Free vector to average, as label:coefficient pairs.
        #[arg(long, conflicts_with = "function", required_unless_present = "function")]
        vector: Option<String>,
        /// Function to average, as label:value pairs.
        #[arg(long)]
        function: Option<String>,
    },
    /// Run the verification suite and print one line per check.
    Verify {
        /// Instance file (JSON).
        file: PathBuf,
        /// Override the instance's random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the instance's trial count.
        #[arg(long)]
        trials: Option<u32>,
        /// Write the JSON report to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// An input problem: bad file, bad flag value, malformed spec. Exit 2.
struct InputError(String);

impl<T: std::fmt::Display> From<T> for InputError {
    fn from(e: T) -> Self {
        InputError(e.to_string())
    }
}

fn main() -> ExitCode {
    // Die quietly instead of panicking when stdout closes early, e.g. when
    // piping a long report into `head`.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(InputError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, InputError> {
    match command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Quotient { file, out } => {
            let document = match &load_instance(&file)? {
                AnyInstance::Exact(inst) => quotient_document(inst, "exact")?,
                AnyInstance::Float(inst) => quotient_document(inst, "float")?,
            };
            match out {
                Some(path) => std::fs::write(&path, document)
                    .map_err(|e| InputError(format!("cannot write {}: {e}", path.display())))?,
                None => print!("{document}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Norm { file, vector } => {
            match &load_instance(&file)? {
                AnyInstance::Exact(inst) => cmd_norm(inst, &vector)?,
                AnyInstance::Float(inst) => cmd_norm(inst, &vector)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Lipnorm { file, function } => {
            match &load_instance(&file)? {
                AnyInstance::Exact(inst) => cmd_lipnorm(inst, &function)?,
                AnyInstance::Float(inst) => cmd_lipnorm(inst, &function)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Project { file, vector, function } => {
            match &load_instance(&file)? {
                AnyInstance::Exact(inst) => cmd_project(inst, &vector, &function)?,
                AnyInstance::Float(inst) => cmd_project(inst, &vector, &function)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { file, seed, trials, json } => cmd_verify(&file, seed, trials, json),
    }
}

fn cmd_validate(file: &Path) -> Result<ExitCode, InputError> {
    match parse_for_verify(file)? {
        VerifyTarget::Ready(instance) => {
            match &instance {
                AnyInstance::Exact(inst) => describe_instance(inst, "exact"),
                AnyInstance::Float(inst) => describe_instance(inst, "float"),
            }
            Ok(ExitCode::SUCCESS)
        }
        VerifyTarget::Invalid { error, .. } => {
            println!("invalid: {error}");
            Ok(ExitCode::from(1))
        }
    }
}

fn describe_instance<S: Scalar>(inst: &Instance<S>, mode: &str) {
    let bounds = distortion_bounds(&inst.space, &inst.group);
    let (orbits, _) = inst.group.orbits();
    println!("valid ({mode} mode)");
    println!(
        "  space: {} points, base {:?}",
        inst.space.n(),
        inst.space.label(inst.space.base())
    );
    println!(
        "  group: order {}, {} orbit(s)",
        inst.group.order(),
        orbits.len()
    );
    if bounds.is_isometric() {
        println!("  action: isometric");
    } else {
        println!(
            "  action: bi-Lipschitz, r = {}, R = {}",
            bounds.lower, bounds.upper
        );
    }
}

/// Renders the orbit quotient of the averaged metric as an instance
/// document with the same mode, seed, and trial count as the source.
fn quotient_document<S: Scalar>(inst: &Instance<S>, mode: &str) -> Result<String, InputError> {
    let averaged = average_metric(&inst.space, &inst.group)?;
    let q = QuotientSpace::build(&averaged, &inst.group)?;
    let qs = q.space();
    let mut out = String::new();
    out.push_str("{\n");
    let points: Vec<String> = qs
        .labels()
        .iter()
        .map(|l| serde_json::to_string(l).expect("strings always serialize"))
        .collect();
    let _ = writeln!(out, "  \"points\": [{}],", points.join(", "));
    let _ = writeln!(out, "  \"base\": {},", points[qs.base()]);
    out.push_str("  \"metric\": [\n");
    for (i, row) in qs.matrix().iter().enumerate() {
        let cells: Vec<String> =
            row.iter().map(|v| v.to_json().to_string()).collect();
        let _ = write!(out, "    [{}]", cells.join(", "));
        out.push_str(if i + 1 < qs.n() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n");
    out.push_str("  \"generators\": [],\n");
    let _ = writeln!(out, "  \"mode\": \"{mode}\",");
    let _ = writeln!(out, "  \"seed\": {},", inst.seed);
    let _ = writeln!(out, "  \"trials\": {}", inst.trials);
    out.push_str("}\n");
    Ok(out)
}

/// Parses "label:value" assignments, resolving labels against the space.
fn parse_assignments<S: Scalar>(
    space: &PointedMetricSpace<S>,
    text: &str,
) -> Result<Vec<(usize, S)>, InputError> {
    let mut pairs = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (label, value) = part
            .rsplit_once(':')
            .ok_or_else(|| InputError(format!("expected label:value, got {part:?}")))?;
        let label = label.trim();
        let x = space
            .index_of(label)
            .ok_or_else(|| InputError(format!("unknown point label {label:?}")))?;
        let c = S::parse(value.trim())?;
        pairs.push((x, c));
    }
    Ok(pairs)
}

fn function_from_spec<S: Scalar>(
    space: &PointedMetricSpace<S>,
    spec: &str,
) -> Result<LipFunction<S>, InputError> {
    let mut values = vec![S::zero(); space.n()];
    for (x, c) in parse_assignments(space, spec)? {
        values[x] = c;
    }
    Ok(LipFunction::from_values(space, values)?)
}

fn cmd_norm<S: Scalar>(inst: &Instance<S>, spec: &str) -> Result<(), InputError> {
    let space = &inst.space;
    let pairs = parse_assignments(space, spec)?;
    let v = FreeVector::from_pairs(space, &pairs)?;
    let (value, plan) = kr_norm(space, &v);
    println!("vector: {}", v.describe(space));
    println!("norm: {value}");
    if plan.arcs.is_empty() {
        println!("plan: empty");
    } else {
        println!("plan:");
        for arc in &plan.arcs {
            println!(
                "  {} -> {}  amount {}  cost {}",
                space.label(arc.from),
                space.label(arc.to),
                arc.amount,
                arc.amount.clone() * space.d(arc.from, arc.to).clone()
            );
        }
    }
    Ok(())
}

fn cmd_lipnorm<S: Scalar>(inst: &Instance<S>, spec: &str) -> Result<(), InputError> {
    let space = &inst.space;
    let f = function_from_spec(space, spec)?;
    let norm = lip_norm(space, &f);
    println!("lipnorm: {norm}");
    // Report the first pair attaining the constant.
    let mut attained: Option<(usize, usize)> = None;
    let mut best = S::zero();
    for x in 0..space.n() {
        for y in (x + 1)..space.n() {
            let slope = (f.value(x).clone() - f.value(y).clone()).abs()
                / space.d(x, y).clone();
            if attained.is_none() || best.lt_scalar(&slope) {
                best = slope;
                attained = Some((x, y));
            }
        }
    }
    match attained {
        Some((x, y)) => println!(
            "attained on: {} -> {}",
            space.label(x),
            space.label(y)
        ),
        None => println!("attained on: (single point)"),
    }
    Ok(())
}

fn cmd_project<S: Scalar>(
    inst: &Instance<S>,
    vector: &Option<String>,
    function: &Option<String>,
) -> Result<(), InputError> {
    let space = &inst.space;
    check_isometric(space, &inst.group).map_err(|e| {
        InputError(format!(
            "{e}; averaging applies only to isometric actions — run `freelip quotient` to average the metric first"
        ))
    })?;
    if let Some(spec) = vector {
        let v = FreeVector::from_pairs(space, &parse_assignments(space, spec)?)?;
        let averaged = project_free(space, &inst.group, &v)?;
        println!("vector: {}", v.describe(space));
        println!("projected: {}", averaged.describe(space));
    }
    if let Some(spec) = function {
        let f = function_from_spec(space, spec)?;
        let averaged = project_lip(space, &inst.group, &f)?;
        println!("function averaged over the group:");
        for x in 0..space.n() {
            println!("  {}: {}", space.label(x), averaged.value(x));
        }
    }
    Ok(())
}

fn cmd_verify(
    file: &Path,
    seed: Option<u64>,
    trials: Option<u32>,
    json: Option<PathBuf>,
) -> Result<ExitCode, InputError> {
    let mut target = parse_for_verify(file)?;
    if let VerifyTarget::Ready(instance) = &mut target {
        match instance {
            AnyInstance::Exact(inst) => override_run_params(inst, seed, trials),
            AnyInstance::Float(inst) => override_run_params(inst, seed, trials),
        }
    }
    let report = run_target(&target);
    for check in &report.checks {
        match check.status {
            Status::Pass => println!("pass     {}", check.name),
            Status::Skipped => println!("skipped  {}", check.name),
            Status::Fail => println!(
                "FAIL     {}  lhs={} rhs={}  [{}]",
                check.name, check.lhs, check.rhs, check.witness
            ),
        }
    }
    println!(
        "overall: {} ({} checks, {} ms)",
        report.overall.as_str(),
        report.checks.len(),
        report.ms
    );
    if let Some(path) = json {
        std::fs::write(&path, report.to_json())
            .map_err(|e| InputError(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn override_run_params<S: Scalar>(
    inst: &mut Instance<S>,
    seed: Option<u64>,
    trials: Option<u32>,
) {
    if let Some(s) = seed {
        inst.seed = s;
    }
    if let Some(t) = trials {
        inst.trials = t;
    }
}
