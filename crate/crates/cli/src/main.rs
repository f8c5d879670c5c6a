//! `rzeta`: zeta and digit-restricted Dirichlet series from the command line.
//!
//! Exit codes: 0 ok, 1 failed invariant, 2 usage or invalid input,
//! 3 parameter outside the half-plane of convergence, 4 unsupported
//! configuration.

mod checks;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rug::float::Round;
use serde_json::json;

use rzeta::mgf::{fourier_coefficient, fourier_quadrature};
use rzeta::numerics::{abs, digits_to_bits, log10_abs};
use rzeta::series::{default_level, evaluate_series_with, plan_terms_log10};
use rzeta::{
    parse_digit_spec, ComplexParameter, DigitSet, Error, MomentTable, PrecisionContext,
    SeriesOptions,
};

use report::{bound_up, fixed_complex, fixed_rounded, Params, RunReport};

#[derive(Parser)]
#[command(name = "rzeta", version, about = "Zeta and digit-restricted Dirichlet series via moment recurrences")]
struct Cli {
    /// Worker threads for block sums (defaults to all cores).
    #[arg(long, global = true, env = "RZETA_THREADS")]
    threads: Option<usize>,

    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Riemann zeta function.
    Zeta(SeriesArgs),
    /// Sum of n^-s over integers whose digits all lie in the admissible set.
    Kempner(KempnerArgs),
    /// Dump the rescaled moments u*_m as JSON rows.
    Moments(MomentArgs),
    /// Generating-function consistency checks for one parameter.
    MgfCheck(MgfArgs),
    /// Run invariant families over a parameter grid.
    Check(CheckArgs),
    /// Term counts and timings over a grid of imaginary parts and orders.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SeriesArgs {
    /// `sigma`, `sigma+ti` or `sigma-ti` with decimal literals.
    #[arg(long, allow_hyphen_values = true)]
    s: String,
    #[arg(long, default_value_t = 2)]
    base: u32,
    /// Defaults to 3 for bases 2 and 3, otherwise 2.
    #[arg(long)]
    level: Option<u32>,
    /// Decimal places printed; also the accuracy target.
    #[arg(long, default_value_t = 50)]
    digits_out: u32,
    #[arg(long, default_value_t = 100_000)]
    max_terms: usize,
}

#[derive(Args)]
struct KempnerArgs {
    #[command(flatten)]
    series: SeriesArgs,
    /// Admissible digits: `all`, or a list such as `0-8` or `1,3,5-7`.
    #[arg(long, default_value = "all")]
    digits: String,
}

#[derive(Args)]
struct MomentArgs {
    #[arg(long, allow_hyphen_values = true)]
    s: String,
    #[arg(long, default_value_t = 2)]
    base: u32,
    #[arg(long, default_value = "all")]
    digits: String,
    /// Largest order `m`.
    #[arg(long, default_value_t = 20)]
    max_m: usize,
    /// Significant digits per value.
    #[arg(long, default_value_t = 30)]
    digits_out: u32,
}

#[derive(Args)]
struct MgfArgs {
    #[arg(long, allow_hyphen_values = true)]
    s: String,
    #[arg(long, default_value_t = 2)]
    base: u32,
    #[arg(long, default_value = "all")]
    digits: String,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_enum, default_value = "all")]
    family: checks::Family,
    /// Restrict the grid to this real part.
    #[arg(long)]
    sigma: Option<f64>,
    /// Restrict the grid to this imaginary part.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 20.0, 50.0])]
    t_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 200, 400])]
    m_grid: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    base: u32,
    #[arg(long)]
    level: Option<u32>,
    #[arg(long, default_value_t = 30)]
    digits_out: u32,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BelowAbscissa { .. } | Error::OnAbscissa { .. } => 3,
        Error::SemiConvergent
        | Error::TermCapExceeded { .. }
        | Error::NotFullDigitSet
        | Error::InsufficientPrecision { .. }
        | Error::LevelTooDeep { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("rzeta: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Zeta(args) => series(args, "all", cli.json, "zeta"),
        Command::Kempner(args) => series(&args.series, &args.digits, cli.json, "kempner"),
        Command::Moments(args) => moments(args),
        Command::MgfCheck(args) => mgf_check(args, cli.json),
        Command::Check(args) => check(args, cli.json),
        Command::Bench(args) => bench(args, cli.json),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("rzeta: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn parse_inputs(s: &str, base: u32, digits: &str, digits_out: u32) -> rzeta::Result<(DigitSet, ComplexParameter)> {
    let ds = parse_digit_spec(digits, base)?;
    let s = ComplexParameter::parse(s, digits_to_bits(digits_out + 40))?;
    Ok((ds, s))
}

fn series(args: &SeriesArgs, digits: &str, json: bool, command: &str) -> rzeta::Result<u8> {
    let (ds, s) = parse_inputs(&args.s, args.base, digits, args.digits_out)?;
    let level = args.level.unwrap_or_else(|| default_level(args.base));
    let ctx = PrecisionContext::new(args.digits_out);
    let opts = SeriesOptions {
        max_terms: args.max_terms,
        early_exit: true,
    };
    let start = Instant::now();
    let r = evaluate_series_with(&ds, &s, level, &ctx, &opts, None)?;
    let elapsed_ms = start.elapsed().as_millis();
    let (value_re, value_im) = fixed_complex(&r.value, args.digits_out);
    let report = RunReport {
        params: Params {
            base: ds.base(),
            digits: ds.spec_string(),
            s: args.s.clone(),
            level,
            digits_out: args.digits_out,
        },
        value_re,
        value_im,
        error_bound: bound_up(&r.error_bound),
        terms: r.terms_used,
        level,
        elapsed_ms,
        method: format!("{command}/moment-series"),
        bracket: r
            .bracket
            .as_ref()
            .map(|(lo, hi)| {
                let d = args.digits_out + 2;
                (fixed_rounded(lo, d, Round::Down), fixed_rounded(hi, d, Round::Up))
            }),
    };
    report.print(json);
    Ok(0)
}

fn moments(args: &MomentArgs) -> rzeta::Result<u8> {
    let (ds, s) = parse_inputs(&args.s, args.base, &args.digits, args.digits_out)?;
    let ctx = PrecisionContext::new(args.digits_out).for_plan(args.max_m, 2, 0, 10);
    let table = MomentTable::build(&ds, &s, args.max_m, &ctx)?;
    let sig = Some(args.digits_out as usize);
    for m in 0..=args.max_m {
        let u = table.u_star(m);
        let row = json!({
            "m": m,
            "re": u.real().to_string_radix(10, sig),
            "im": u.imag().to_string_radix(10, sig),
        });
        println!("{row}");
    }
    Ok(0)
}

fn mgf_check(args: &MgfArgs, json: bool) -> rzeta::Result<u8> {
    let (ds, s) = parse_inputs(&args.s, args.base, &args.digits, 30)?;
    s.check_convergence(&ds)?;
    let mut lines = Vec::new();
    let (checked, failure) = checks::mgf_family(&ds, &s)?;
    lines.push(("identities", checked, failure.map(str::to_string)));

    let ctx = PrecisionContext::new(20);
    let mut fourier_failure = None;
    for k in [0, 1] {
        let coefficient = fourier_coefficient(&ds, &s, k, &ctx)?;
        let quad = fourier_quadrature(&ds, &s, k, 1e-12, &ctx)?;
        let d = abs(&rug::Complex::with_val(ctx.bits(), &quad.value - &coefficient.value));
        let allowed = coefficient.log10_tail.max(-12.0) + 1.0;
        if log10_abs(&d) > allowed {
            fourier_failure = Some(format!("Fourier coefficient k={k}"));
        }
    }
    lines.push(("fourier", 2, fourier_failure));

    let failed = lines.iter().any(|(_, _, f)| f.is_some());
    for (name, checked, failure) in &lines {
        print_family(name, *checked, failure.as_deref(), json);
    }
    Ok(if failed { 1 } else { 0 })
}

fn print_family(name: &str, checked: usize, failure: Option<&str>, json: bool) {
    if json {
        let row = json!({"family": name, "checked": checked, "pass": failure.is_none(), "failure": failure});
        println!("{row}");
    } else {
        match failure {
            None => println!("PASS  {name:<12} {checked} checks"),
            Some(f) => println!("FAIL  {name:<12} {f}"),
        }
    }
}

fn check(args: &CheckArgs, json: bool) -> rzeta::Result<u8> {
    let grid = checks::Grid {
        sigma: args.sigma,
        t: args.t,
    };
    let reports = checks::run(args.family, &grid)?;
    for r in &reports {
        print_family(r.family, r.checked, r.failure.as_deref(), json);
    }
    Ok(if reports.iter().all(|r| r.failure.is_none()) { 0 } else { 1 })
}

fn bench(args: &BenchArgs, json: bool) -> rzeta::Result<u8> {
    let ds = DigitSet::full(args.base)?;
    let level = args.level.unwrap_or_else(|| default_level(args.base));
    let ctx = PrecisionContext::new(args.digits_out);
    for &t in &args.t_grid {
        let s = ComplexParameter::from_f64(args.sigma, t);
        let planned = plan_terms_log10(&ds, &s, level, ctx.log10_eps(), 1_000_000)?.terms;
        let start = Instant::now();
        let r = evaluate_series_with(&ds, &s, level, &ctx, &SeriesOptions::default(), None)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        if json {
            println!("{}", json!({"t": t, "terms_needed": r.terms_used, "planned": planned, "elapsed_ms": ms}));
        } else {
            println!("t {t:>8.2}  terms {:>6}  planned {planned:>6}  {ms:>10.2} ms", r.terms_used);
        }
    }
    for &m in &args.m_grid {
        let s = ComplexParameter::real(args.sigma);
        let table_ctx = ctx.for_plan(m, args.base, level, 0);
        let start = Instant::now();
        MomentTable::build(&ds, &s, m, &table_ctx)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        if json {
            println!("{}", json!({"M": m, "elapsed_ms": ms}));
        } else {
            println!("M {m:>8}  {ms:>10.2} ms");
        }
    }
    Ok(0)
}
