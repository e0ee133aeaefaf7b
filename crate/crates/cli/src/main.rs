//! `rmono`: JSON front end for the realization library.
//!
//! Exit codes: 0 for any answer (a refusal is an answer), 1 when the
//! search gave up or a continuation failed, 2 for malformed input.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use rmono::continuation::{monodromy_with, MonodromyOptions, DEFAULT_TOL};
use rmono::equation::{satisfies_fuchs, FUCHS_TOL};
use rmono::realize::RealizeError;
use rmono::sl2z::{sl2z_criterion_with_monodromy, INTEGER_TOL};
use rmono::{
    build_equation, classify, enumerate_family, fuchs_sum, is_realizable, monodromy_of, plan_loops, realize_riemann,
    realize_rsl, sl2z_criterion, Divisor, ExponentTable, HypergeometricParams, MonodromyRep, RepClass,
    RiemannEquation, SearchConfig, C64,
};

#[derive(Parser)]
#[command(name = "rmono", version, about = "Realize 2x2 monodromy by Riemann equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structural class of a representation and whether it is realizable.
    Classify(InputArgs),
    /// Search for a Riemann equation realizing a representation.
    Realize(SearchArgs),
    /// Search for a realization without a first-derivative term.
    Rsl(SearchArgs),
    /// Monodromy generators of an equation by numerical continuation.
    Monodromy(MonodromyArgs),
    /// Decide the SL(2,C) and SL(2,Z) conditions for hypergeometric parameters.
    HypCheck(HypArgs),
    /// Members of the integer hypergeometric family.
    Sl2zFamily(FamilyArgs),
    /// Check the exponent sum of a table and build its equation.
    Fuchs(FuchsArgs),
}

#[derive(Args)]
struct InputArgs {
    /// JSON input file; standard input when absent or `-`.
    input: Option<PathBuf>,
    /// Write the JSON result here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Conjugation residual accepted for a witness.
    #[arg(long, value_parser = positive)]
    tol: Option<f64>,
    /// Largest integer shift tried per exponent.
    #[arg(long)]
    shear_bound: Option<u32>,
    /// Cap on the number of candidate tables.
    #[arg(long)]
    max_candidates: Option<usize>,
}

#[derive(Args)]
struct MonodromyArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Local error tolerance of the integrator.
    #[arg(long, value_parser = positive)]
    tol: Option<f64>,
    /// Also integrate the loop around infinity in the chart w = 1/z.
    #[arg(long)]
    verify_infinity: bool,
    /// Write every accepted integration step as a JSON line.
    #[arg(long)]
    dump_paths: Option<PathBuf>,
}

#[derive(Args)]
struct HypArgs {
    /// Complex values are written `a+bi`.
    #[arg(long, allow_hyphen_values = true)]
    alpha: C64,
    #[arg(long, allow_hyphen_values = true)]
    beta: C64,
    #[arg(long, allow_hyphen_values = true)]
    gamma: C64,
    /// Distance from an integer still counted as integral.
    #[arg(long, value_parser = positive)]
    tol: Option<f64>,
    /// Continuation tolerance used for the integer conjugator.
    #[arg(long, value_parser = positive)]
    monodromy_tol: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FamilyArgs {
    /// A single member; requires `--l`.
    #[arg(long, allow_hyphen_values = true, requires = "l")]
    k: Option<i64>,
    #[arg(long, allow_hyphen_values = true, requires = "k")]
    l: Option<i64>,
    /// Without `--k`/`--l`, list every member with `|k| ≤ k-max`.
    #[arg(long, default_value_t = 4, conflicts_with = "k")]
    k_max: u32,
    #[arg(long, default_value_t = 2, conflicts_with = "l")]
    l_max: u32,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FuchsArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long, value_parser = positive)]
    tol: Option<f64>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        Ok(_) => Err("must be a finite positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Failure classes, mapped to exit codes.
enum Failure {
    Input(anyhow::Error),
    Undecided(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Undecided(_) => 1,
            Failure::Input(_) => 2,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Undecided(e) => e,
        }
    }
}

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn undecided<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Undecided(e.into())
}

type Outcome = Result<(), Failure>;

fn read_input(path: Option<&Path>) -> Result<Value, Failure> {
    let mut text = String::new();
    match path {
        Some(p) if p != Path::new("-") => {
            File::open(p)
                .and_then(|mut f| f.read_to_string(&mut text))
                .with_context(|| format!("reading {}", p.display()))
                .map_err(input)?;
        }
        _ => {
            io::stdin().read_to_string(&mut text).context("reading standard input").map_err(input)?;
        }
    }
    serde_json::from_str(&text).context("input is not valid JSON").map_err(input)
}

/// Inputs without a divisor are placed on `{−1, 1, ∞}`.
fn with_default_divisor(mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        if !map.contains_key("divisor") {
            let d = serde_json::to_value(Divisor::standard()).expect("divisor serializes");
            map.insert("divisor".into(), d);
        }
    }
    v
}

fn parse<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Result<T, Failure> {
    serde_json::from_value(v).with_context(|| format!("input is not a valid {what}")).map_err(input)
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Outcome {
    let mut text = serde_json::to_string(value).context("serializing result").map_err(undecided)?;
    text.push('\n');
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())).map_err(input),
        None => io::stdout().write_all(text.as_bytes()).context("writing standard output").map_err(undecided),
    }
}

#[derive(Serialize)]
struct ClassifyReport {
    #[serde(flatten)]
    class: RepClass,
    realizable: bool,
}

fn cmd_classify(args: &InputArgs) -> Outcome {
    let rep: MonodromyRep = parse(with_default_divisor(read_input(args.input.as_deref())?), "representation")?;
    let report = ClassifyReport {
        class: classify(&rep),
        realizable: is_realizable(&rep).realizable,
    };
    emit(&report, args.output.as_deref())
}

fn search_config(args: &SearchArgs) -> SearchConfig {
    let d = SearchConfig::default();
    SearchConfig {
        shear_bound: args.shear_bound.unwrap_or(d.shear_bound),
        tol: args.tol.unwrap_or(d.tol),
        max_candidates: args.max_candidates.unwrap_or(d.max_candidates),
    }
}

fn realize_failure(e: RealizeError) -> Failure {
    match e {
        RealizeError::SearchExhausted { .. } | RealizeError::Algebra(_) | RealizeError::Continuation(_) => undecided(e),
        RealizeError::NoCandidates(_) | RealizeError::NotSl | RealizeError::InvalidConfig(_) => input(e),
    }
}

fn cmd_realize(args: &SearchArgs, rsl: bool) -> Outcome {
    let rep: MonodromyRep = parse(with_default_divisor(read_input(args.io.input.as_deref())?), "representation")?;
    let cfg = search_config(args);
    let result = if rsl { realize_rsl(&rep, &cfg) } else { realize_riemann(&rep, &cfg) };
    emit(&result.map_err(realize_failure)?, args.io.output.as_deref())
}

fn cmd_monodromy(args: &MonodromyArgs) -> Outcome {
    let eq: RiemannEquation = parse(read_input(args.io.input.as_deref())?, "equation")?;
    let plan = plan_loops(&eq.divisor, None);
    let opts = MonodromyOptions {
        verify_infinity: args.verify_infinity,
    };
    let tol = args.tol.unwrap_or(DEFAULT_TOL);
    let result = match &args.dump_paths {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display())).map_err(input)?;
            let mut out = BufWriter::new(file);
            let mut write_err = None;
            let m = monodromy_with(&eq, &plan, tol, opts, &mut |p| {
                if write_err.is_none() {
                    let line = serde_json::to_string(&p).expect("trace point serializes");
                    if let Err(e) = writeln!(out, "{line}") {
                        write_err = Some(e);
                    }
                }
            });
            if let Some(e) = write_err {
                return Err(input(anyhow::Error::new(e).context("writing path dump")));
            }
            out.flush().context("writing path dump").map_err(input)?;
            m
        }
        None => monodromy_with(&eq, &plan, tol, opts, &mut |_| {}),
    };
    emit(&result.map_err(undecided)?, args.io.output.as_deref())
}

fn cmd_hyp_check(args: &HypArgs) -> Outcome {
    let h = HypergeometricParams::new(args.alpha, args.beta, args.gamma);
    let tol = args.tol.unwrap_or(INTEGER_TOL);
    let mut verdict = sl2z_criterion(&h, tol);
    if verdict.in_sl2z {
        let eq = h.equation();
        let m = monodromy_of(&eq, &plan_loops(&eq.divisor, None), args.monodromy_tol.unwrap_or(DEFAULT_TOL))
            .map_err(undecided)?;
        verdict = sl2z_criterion_with_monodromy(&h, &m.rep(), tol);
    }
    emit(&verdict, args.output.as_deref())
}

fn cmd_family(args: &FamilyArgs) -> Outcome {
    match (args.k, args.l) {
        (Some(k), Some(l)) => emit(&enumerate_family(k, l), args.output.as_deref()),
        _ => {
            let (km, lm) = (i64::from(args.k_max), i64::from(args.l_max));
            let members: Vec<_> = (-km..=km)
                .flat_map(|k| (-lm..=lm).map(move |l| enumerate_family(k, l)))
                .collect();
            emit(&members, args.output.as_deref())
        }
    }
}

#[derive(Deserialize)]
struct FuchsInput {
    divisor: Divisor,
    exponents: ExponentTable,
}

#[derive(Serialize)]
struct FuchsReport {
    fuchs_sum: C64,
    satisfied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    equation: Option<RiemannEquation>,
}

fn cmd_fuchs(args: &FuchsArgs) -> Outcome {
    let table: FuchsInput = parse(with_default_divisor(read_input(args.io.input.as_deref())?), "exponent table")?;
    let satisfied = satisfies_fuchs(&table.exponents, args.tol.unwrap_or(FUCHS_TOL));
    let equation = if satisfied {
        Some(build_equation(table.divisor, table.exponents).map_err(input)?)
    } else {
        None
    };
    let report = FuchsReport {
        fuchs_sum: fuchs_sum(&table.exponents),
        satisfied,
        equation,
    };
    emit(&report, args.io.output.as_deref())
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Realize(a) => cmd_realize(a, false),
        Command::Rsl(a) => cmd_realize(a, true),
        Command::Monodromy(a) => cmd_monodromy(a),
        Command::HypCheck(a) => cmd_hyp_check(a),
        Command::Sl2zFamily(a) => cmd_family(a),
        Command::Fuchs(a) => cmd_fuchs(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rmono: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
