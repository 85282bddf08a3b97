//! Command-line front end: `dirlab <subcommand> [flags]`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::THREADS_ENV;
use crate::counting::{self, CountingField, FieldConfig, TestFunction};
use crate::dirichlet::{self, GramMatrix};
use crate::error::{Error, Result};
use crate::operator::{self, NormReport};
use crate::symbols::SymbolMap;
use crate::verify::{CheckRegistry, Context, TheoremId, VerificationReport};

/// Exit code for a failed verification or an out-of-tolerance check.
pub const EXIT_FAILED: i32 = 1;
/// Exit code for usage and numerical errors.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dirlab",
    version,
    about = "Composition operators on the Dirichlet space",
    subcommand_required = false,
    arg_required_else_help = true
)]
pub struct Args {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Symbol spec, e.g. `mobius:p=0.5` or `mobius:p=0.5|slit:c=0.5`.
    #[arg(long, global = true)]
    pub symbol: Option<String>,

    /// Truncation degree(s), comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub trunc: Vec<usize>,

    /// Gram size for `gram`, largest tail index for `essnorm`.
    #[arg(long, global = true)]
    pub size: Option<usize>,

    /// Field grid as `NRxNT` (radial × angular nodes).
    #[arg(long, global = true, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,

    /// Outer radius of the counting field.
    #[arg(long, global = true)]
    pub rmax: Option<f64>,

    /// Radius of the counting contour in the z-disk.
    #[arg(long, global = true)]
    pub contour: Option<f64>,

    /// Tolerance for `radialtest` and `covcheck`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Theorem id for `verify`; all theorems when omitted.
    #[arg(long, global = true)]
    pub theorem: Option<TheoremId>,

    /// Print every numerical default as JSON and exit.
    #[arg(long, global = true)]
    pub show_config: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Gram matrix of the powers of the symbol.
    Gram,
    /// Compression-norm ladder of the composition operator.
    Norm,
    /// Tail norms ||C R_n|| for n = 1..size.
    Essnorm,
    /// Counting field n(w) on a polar grid.
    Counting,
    /// Essentially-radial test of the counting function.
    Radialtest,
    /// Area share of the disk omitted by the image.
    Defect,
    /// Change-of-variable residual for f = 1 and f = |w|^2.
    Covcheck,
    /// Run theorem checks and print their reports.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn parse_grid(text: &str) -> std::result::Result<(usize, usize), String> {
    let (nr, nt) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NRxNT, got `{text}`"))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("`{s}` is not a positive integer"))
    };
    Ok((parse(nr)?, parse(nt)?))
}

/// Parses `argv` (program name first), runs it and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Sizes the global rayon pool from `DIRLAB_THREADS` (unset or 0: all cores).
pub fn init_threads() -> Result<()> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Error::parse(&v, format!("{THREADS_ENV} must be a non-negative integer"))
        })?,
        Err(_) => 0,
    };
    // a pool that was already built (e.g. by a test harness) is kept
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn execute(args: &Args) -> Result<i32> {
    let ctx = Context::default();
    if args.show_config {
        emit_json(args, &ctx.defaults)?;
        return Ok(0);
    }
    let Some(command) = args.command else {
        return Err(Error::Precondition("a subcommand is required".into()));
    };
    match command {
        Command::Gram => gram(args, &ctx),
        Command::Norm => norm(args, &ctx),
        Command::Essnorm => essnorm(args, &ctx),
        Command::Counting => counting_cmd(args, &ctx),
        Command::Radialtest => radialtest(args, &ctx),
        Command::Defect => defect(args, &ctx),
        Command::Covcheck => covcheck(args, &ctx),
        Command::Verify => verify(args, &ctx),
    }
}

fn symbol(args: &Args, ctx: &Context) -> Result<SymbolMap> {
    let spec = args
        .symbol
        .as_deref()
        .ok_or_else(|| Error::Precondition("--symbol is required".into()))?;
    ctx.parse(spec)
}

fn single_trunc(args: &Args, default: usize) -> Result<usize> {
    match args.trunc.as_slice() {
        [] => Ok(default),
        [n] => Ok(*n),
        _ => Err(Error::Precondition(
            "this subcommand takes a single --trunc".into(),
        )),
    }
}

fn field_config(args: &Args, base: FieldConfig) -> FieldConfig {
    let mut cfg = base;
    if let Some((nr, nt)) = args.grid {
        cfg.n_radial = nr;
        cfg.n_angular = nt;
    }
    if let Some(r) = args.rmax {
        cfg.r_max = r;
    }
    if let Some(c) = args.contour {
        cfg.contour_radius = c;
    }
    cfg
}

fn writer(args: &Args) -> Result<Box<dyn Write>> {
    Ok(match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize + ?Sized>(args: &Args, value: &T) -> Result<()> {
    let mut out = writer(args)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn emit_csv<F>(args: &Args, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let mut out = writer(args)?;
    write(&mut out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ComplexEntry {
    re: f64,
    im: f64,
}

impl From<Complex64> for ComplexEntry {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

#[derive(Serialize)]
struct GramOutput {
    symbol: String,
    size: usize,
    truncation: usize,
    max_off_diagonal: f64,
    /// Row `n - 1` holds `<φ^n, φ^m>` for m = 1..size.
    entries: Vec<Vec<ComplexEntry>>,
}

fn gram(args: &Args, ctx: &Context) -> Result<i32> {
    let phi = symbol(args, ctx)?;
    let size = args.size.unwrap_or(ctx.defaults.gram_size);
    if size == 0 {
        return Err(Error::Precondition("--size must be at least 1".into()));
    }
    let truncation = single_trunc(args, ctx.defaults.gram_truncation_for(phi.as_ref()))?;
    let g: GramMatrix = dirichlet::gram_powers(phi.as_ref(), size, truncation);
    if let Some(from) = g.unsafe_from() {
        eprintln!("warning: powers from {from} on exceed the truncation degree {truncation}");
    }
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => emit_csv(args, |w| g.write_csv(w)),
        Format::Json => emit_json(
            args,
            &GramOutput {
                symbol: phi.spec(),
                size,
                truncation,
                max_off_diagonal: g.max_off_diagonal(),
                entries: (1..=size)
                    .map(|n| (1..=size).map(|m| g.get(n, m).into()).collect())
                    .collect(),
            },
        ),
    }?;
    Ok(0)
}

#[derive(Serialize)]
struct NormOutput<'a> {
    symbol: String,
    ladder: &'a [NormReport],
    /// Closed-form norm, given for univalent full maps.
    formula_target: Option<f64>,
}

fn norm(args: &Args, ctx: &Context) -> Result<i32> {
    let phi = symbol(args, ctx)?;
    let truncs = if args.trunc.is_empty() {
        ctx.defaults.truncation_ladder.clone()
    } else {
        args.trunc.clone()
    };
    let ladder = operator::operator_norm_ladder(phi.as_ref(), &truncs)?;
    let formula_target = if phi.univalent() == Some(true) && phi.full() == Some(true) {
        Some(operator::norm_formula(
            phi.eval(Complex64::new(0.0, 0.0)).norm(),
        )?)
    } else {
        None
    };
    match args.format.unwrap_or(Format::Json) {
        Format::Csv => emit_csv(args, |w| operator::write_reports_csv(&ladder, w)),
        Format::Json => emit_json(
            args,
            &NormOutput {
                symbol: phi.spec(),
                ladder: &ladder,
                formula_target,
            },
        ),
    }?;
    Ok(0)
}

#[derive(Serialize)]
struct EssnormOutput<'a> {
    symbol: String,
    truncation: usize,
    /// `s_n = ||C R_n||` for n = 1..n_max.
    profile: &'a [NormReport],
}

fn essnorm(args: &Args, ctx: &Context) -> Result<i32> {
    let phi = symbol(args, ctx)?;
    let truncation = single_trunc(args, ctx.defaults.essnorm_truncation)?;
    let n_max = args.size.unwrap_or(ctx.defaults.essnorm_n_max);
    let m = operator::build_matrix(phi.as_ref(), truncation)?;
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let profile = operator::essential_norm_profile(&m, n_max)?;
            emit_csv(args, |w| operator::write_profile_csv(&profile, w))
        }
        Format::Json => {
            let reports = operator::essential_norm_reports(&m, n_max)?;
            emit_json(
                args,
                &EssnormOutput {
                    symbol: phi.spec(),
                    truncation,
                    profile: &reports,
                },
            )
        }
    }?;
    Ok(0)
}

#[derive(Serialize)]
struct CountingOutput {
    symbol: String,
    config: FieldConfig,
    nodes: usize,
    guarded: usize,
    unsnapped: usize,
    snap_fraction: f64,
    max_count: u32,
    /// `∫ n dA` over the field.
    integral: f64,
}

fn counting_cmd(args: &Args, ctx: &Context) -> Result<i32> {
    let phi = symbol(args, ctx)?;
    let cfg = field_config(args, ctx.defaults.field);
    let field = CountingField::build(phi.as_ref(), &cfg)?;
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => emit_csv(args, |w| field.write_csv(w)),
        Format::Json => emit_json(
            args,
            &CountingOutput {
                symbol: phi.spec(),
                config: cfg,
                nodes: field.values.len(),
                guarded: field.guarded(),
                unsnapped: field.unsnapped(),
                snap_fraction: field.snap_fraction(),
                max_count: field.max_count(),
                integral: field.integrate(|_| Complex64::new(1.0, 0.0)).re,
            },
        ),
    }?;
    Ok(0)
}

#[derive(Serialize)]
struct RadialOutput {
    symbol: String,
    config: FieldConfig,
    #[serde(flatten)]
    report: counting::RadialReport,
}

fn radialtest(args: &Args, ctx: &Context) -> Result<i32> {
    let phi = symbol(args, ctx)?;
    let d = &ctx.defaults;
    let cfg = field_config(args, d.radial_field);
    let tol = args.tol.unwrap_or(d.radial_tolerance);
    let field = CountingField::build(phi.as_ref(), &cfg)?;
    match args.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let profiles = counting::radial_moments(&field, d.radial_k_max);
            emit_csv(args, |w| counting::write_profiles_csv(&profiles, w))
        }
        Format::Json => emit_json(
            args,
            &RadialOutput {
                symbol: phi.spec(),
                config: cfg,
                report: counting::radial_report(&field, d.radial_k_max, tol),
            },
        ),
    }?;
    Ok(0)
}

#[derive(Serialize)]
struct DefectOutput {
    symbol: String,
    config: FieldConfig,
    defect: f64,
    excluded: usize,
}

fn defect(args: &Args, ctx: &Context) -> Result<i32> {
    let phi = symbol(args, ctx)?;
    let cfg = field_config(args, ctx.defaults.defect_field);
    let field = CountingField::build(phi.as_ref(), &cfg)?;
    let out = DefectOutput {
        symbol: phi.spec(),
        config: cfg,
        defect: counting::fullness_defect_of(&field),
        excluded: field.excluded(),
    };
    match args.format.unwrap_or(Format::Json) {
        Format::Csv => emit_csv(args, |w| {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["symbol", "defect", "excluded"])?;
            wtr.write_record([
                &out.symbol,
                &out.defect.to_string(),
                &out.excluded.to_string(),
            ])?;
            wtr.flush()?;
            Ok(())
        }),
        Format::Json => emit_json(args, &out),
    }?;
    Ok(0)
}

#[derive(Serialize)]
struct CovcheckOutput<'a> {
    symbol: String,
    tolerance: f64,
    passed: bool,
    checks: &'a [counting::ChangeOfVariable],
}

fn covcheck(args: &Args, ctx: &Context) -> Result<i32> {
    let phi = symbol(args, ctx)?;
    let d = &ctx.defaults;
    let tol = args.tol.unwrap_or(d.covcheck_tolerance);
    let base = field_config(args, d.field);
    // an explicit --rmax wins over the radius matched to the image
    let cfg = if args.rmax.is_some() {
        base
    } else {
        counting::image_matched_config(phi.as_ref(), &base)
    };
    let field = CountingField::build(phi.as_ref(), &cfg)?;
    let checks: Vec<_> = [TestFunction::One, TestFunction::AbsSquared]
        .into_iter()
        .map(|f| counting::change_of_variable_on(phi.as_ref(), f, &field))
        .collect();
    let passed = checks
        .iter()
        .all(|c| c.residual <= tol + c.exclusion_allowance);
    match args.format.unwrap_or(Format::Json) {
        Format::Csv => emit_csv(args, |w| {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["f", "lhs", "rhs", "residual", "allowance"])?;
            for c in &checks {
                wtr.write_record([
                    c.test_function.name().to_string(),
                    c.lhs.to_string(),
                    c.rhs.to_string(),
                    c.residual.to_string(),
                    c.exclusion_allowance.to_string(),
                ])?;
            }
            wtr.flush()?;
            Ok(())
        }),
        Format::Json => emit_json(
            args,
            &CovcheckOutput {
                symbol: phi.spec(),
                tolerance: tol,
                passed,
                checks: &checks,
            },
        ),
    }?;
    Ok(if passed { 0 } else { EXIT_FAILED })
}

fn verify(args: &Args, ctx: &Context) -> Result<i32> {
    if args.format == Some(Format::Csv) {
        return Err(Error::Precondition("verify writes JSON only".into()));
    }
    let registry = CheckRegistry::standard();
    let reports: Vec<VerificationReport> = match args.theorem {
        Some(id) => registry.run(id, args.symbol.as_deref(), ctx),
        None if args.symbol.is_some() => {
            return Err(Error::Precondition("--symbol needs --theorem".into()));
        }
        None => registry.run_all(ctx),
    };
    emit_json(args, &reports)?;
    for r in &reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        if r.failed.is_empty() {
            eprintln!("{status} {} {}", r.theorem_id, r.symbol_spec);
        } else {
            eprintln!(
                "{status} {} {} ({})",
                r.theorem_id,
                r.symbol_spec,
                r.failed.join(", ")
            );
        }
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    eprintln!(
        "{} of {} reports passed",
        reports.len() - failed,
        reports.len()
    );
    Ok(if failed == 0 { 0 } else { EXIT_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_flag() {
        assert_eq!(parse_grid("64x256"), Ok((64, 256)));
        assert!(parse_grid("64").is_err());
        assert!(parse_grid("0x4").is_err());
    }

    #[test]
    fn flags_after_subcommand() {
        let a = Args::try_parse_from([
            "dirlab",
            "norm",
            "--symbol",
            "mobius:p=0.5",
            "--trunc",
            "64,128",
        ])
        .unwrap();
        assert_eq!(a.command, Some(Command::Norm));
        assert_eq!(a.trunc, vec![64, 128]);
        assert_eq!(a.symbol.as_deref(), Some("mobius:p=0.5"));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["dirlab", "frobnicate"]), EXIT_ERROR);
        assert_eq!(run(["dirlab", "gram", "--bogus"]), EXIT_ERROR);
        assert_eq!(run(["dirlab", "gram"]), EXIT_ERROR);
        assert_eq!(run(["dirlab", "gram", "--symbol", "nope:x=1"]), EXIT_ERROR);
        assert_eq!(
            run(["dirlab", "verify", "--theorem", "no_such"]),
            EXIT_ERROR
        );
    }
}
