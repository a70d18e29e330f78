//! The `kloos` command line.
//!
//! Exit codes: 0 when every asserted case passes, 1 when any report carries
//! a violation, 2 for usage or configuration errors (bad flags, degrees
//! outside a command's guard, malformed hex, unwritable output).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::field::{parse_hex, FieldElement, FieldError, FieldSpec, MAX_DEGREE};
use crate::goethals::{self, BRUTE_FORCE_MAX_DEGREE};
use crate::ksum::{self, residue_mod, KsumError, FAST_MAX_DEGREE, NAIVE_MAX_DEGREE};
use crate::verify::{self, ExponentMode, Family, VerificationReport, VerifyError, CORRECTED_MAX_DEGREE};

pub const DEFAULT_SEED: u64 = 20_190_901;

/// Largest degree for a single direct K(a) evaluation.
pub const SINGLE_KSUM_MAX_DEGREE: u32 = 24;

/// Elements sampled by the field-info self-check above this degree.
const EXHAUSTIVE_SELF_CHECK_MAX: u32 = 16;
const SELF_CHECK_SAMPLES: usize = 4096;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Ksum(#[from] KsumError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Goethals(#[from] goethals::GoethalsError),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: io::Error },
}

fn io_err(path: &Option<PathBuf>) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path
            .as_ref()
            .map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string()),
        source,
    }
}

/// Inclusive degree range written `A..B`, or a single degree `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeRange(pub RangeInclusive<u32>);

impl DegreeRange {
    pub fn single(&self) -> Option<u32> {
        (self.0.start() == self.0.end()).then_some(*self.0.start())
    }
}

pub fn parse_degree_range(s: &str) -> Result<DegreeRange, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| format!("invalid degree {t:?}"))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let m = parse(s)?;
            (m, m)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("degree range {s:?} must satisfy 1 <= A <= B"));
    }
    Ok(DegreeRange(lo..=hi))
}

fn parse_hex_arg(s: &str) -> Result<u64, String> {
    parse_hex(s).map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "kloos", version, about = "Kloosterman sums over GF(2^m) and exhaustive theorem checks")]
pub struct Cli {
    /// Worker threads for parallel sweeps (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for sampled self-checks
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Extension degree or inclusive range A..B
    #[arg(short = 'm', value_parser = parse_degree_range)]
    pub m: DegreeRange,
    /// Reduction polynomial in hex, leading term included (single degree only)
    #[arg(long, value_parser = parse_hex_arg)]
    pub poly: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Field parameters and trace self-check
    FieldInfo {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// A single Kloosterman sum K(a)
    Ksum {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(short = 'a', value_parser = parse_hex_arg)]
        a: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// K(a) for every a in the field
    KsumTable {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value_t = TableMethod::Spectral)]
        method: TableMethod,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solution counts of the Goethals system, for one (b, c) or all pairs
    GoethalsCount {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(short = 'b', value_parser = parse_hex_arg, requires = "c")]
        b: Option<u64>,
        #[arg(short = 'c', value_parser = parse_hex_arg, requires = "b")]
        c: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exhaustively check one theorem family
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, hide = true)]
        expect_residue: Option<u64>,
    },
    /// Scan the ξ-sum families for counterexamples
    ConjectureScan {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 8)]
        n_max: u32,
        /// Exponents of the a-sum: 2i (even) or 2^i (pow2)
        #[arg(long, value_enum, default_value_t = ExponentArg::Even)]
        exponent: ExponentArg,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, hide = true)]
        expect_residue: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Report,
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableMethod {
    Naive,
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Corrected,
    A,
    Xi,
    CubeRoot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExponentArg {
    Even,
    Pow2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    FieldInfo,
    Ksum,
    KsumTable,
    GoethalsCount,
    Verify,
    ConjectureScan,
}

/// A parsed and validated invocation. Fields for every degree in range are
/// constructed during validation, so a bad polynomial or an out-of-guard
/// degree aborts before any work.
#[derive(Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    pub fields: Vec<FieldSpec>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub n_max: u32,
    pub family: Option<FamilyArg>,
    pub exponent: ExponentMode,
    pub method: TableMethod,
    pub a: Option<u64>,
    pub bc: Option<(u64, u64)>,
    pub seed: u64,
    pub residue_override: Option<u64>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let seed = cli.seed;
        let cfg = |command, field: FieldArgs, output: OutputArgs, default_format| RunConfig {
            command,
            fields: Vec::new(),
            output_format: output.format.unwrap_or(default_format),
            output_path: output.out,
            n_max: 0,
            family: None,
            exponent: ExponentMode::EvenPowers,
            method: TableMethod::Spectral,
            a: None,
            bc: None,
            seed,
            residue_override: None,
        }
        .with_degrees(field);
        let config = match cli.command {
            Command::FieldInfo { field, output } => {
                cfg(CommandKind::FieldInfo, field, output, OutputFormat::Plain)?
            }
            Command::Ksum { field, a, output } => RunConfig {
                a: Some(a),
                ..cfg(CommandKind::Ksum, field, output, OutputFormat::Plain)?
            },
            Command::KsumTable { field, method, output } => RunConfig {
                method,
                ..cfg(CommandKind::KsumTable, field, output, OutputFormat::Csv)?
            },
            Command::GoethalsCount { field, b, c, output } => {
                let bc = b.zip(c);
                let default = if bc.is_some() { OutputFormat::Plain } else { OutputFormat::Csv };
                RunConfig {
                    bc,
                    ..cfg(CommandKind::GoethalsCount, field, output, default)?
                }
            }
            Command::Verify { field, family, output, expect_residue } => RunConfig {
                family: Some(family),
                residue_override: expect_residue,
                ..cfg(CommandKind::Verify, field, output, OutputFormat::Plain)?
            },
            Command::ConjectureScan { field, n_max, exponent, output, expect_residue } => RunConfig {
                n_max,
                exponent: match exponent {
                    ExponentArg::Even => ExponentMode::EvenPowers,
                    ExponentArg::Pow2 => ExponentMode::PowersOfTwo,
                },
                residue_override: expect_residue,
                ..cfg(CommandKind::ConjectureScan, field, output, OutputFormat::Plain)?
            },
        };
        config.validate()
    }

    fn with_degrees(mut self, field: FieldArgs) -> Result<Self, CliError> {
        if field.poly.is_some() && field.m.single().is_none() {
            return Err(CliError::Usage("--poly requires a single degree, not a range".into()));
        }
        let (lo, hi) = (*field.m.0.start(), *field.m.0.end());
        if hi > MAX_DEGREE {
            return Err(FieldError::DegreeOutOfRange(hi).into());
        }
        self.fields = (lo..=hi)
            .map(|m| FieldSpec::new(m, field.poly))
            .collect::<Result<_, _>>()?;
        Ok(self)
    }

    fn max_degree(&self) -> u32 {
        match self.command {
            CommandKind::FieldInfo => MAX_DEGREE,
            CommandKind::Ksum => SINGLE_KSUM_MAX_DEGREE,
            CommandKind::KsumTable => match self.method {
                TableMethod::Naive => NAIVE_MAX_DEGREE,
                TableMethod::Spectral => FAST_MAX_DEGREE,
            },
            CommandKind::GoethalsCount => BRUTE_FORCE_MAX_DEGREE,
            CommandKind::Verify => match self.family {
                Some(FamilyArg::Corrected) => CORRECTED_MAX_DEGREE,
                _ => FAST_MAX_DEGREE,
            },
            CommandKind::ConjectureScan => FAST_MAX_DEGREE,
        }
    }

    fn validate(self) -> Result<Self, CliError> {
        let max = self.max_degree();
        if let Some(f) = self.fields.iter().find(|f| f.degree() > max) {
            return Err(CliError::Usage(format!(
                "degree m = {} exceeds this command's limit of {max}",
                f.degree()
            )));
        }
        let table_export = matches!(self.command, CommandKind::KsumTable)
            || (self.command == CommandKind::GoethalsCount && self.bc.is_none());
        if table_export && self.fields.len() != 1 {
            return Err(CliError::Usage("table export takes a single degree".into()));
        }
        let smallest = &self.fields[0];
        for v in self.a.into_iter().chain(self.bc.into_iter().flat_map(|(b, c)| [b, c])) {
            smallest.element(v)?;
        }
        Ok(self)
    }
}

pub struct RunOutcome {
    pub violations: bool,
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err(path))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Executes a validated configuration, writing to `--out` or `stdout`.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let mut out = open_output(&config.output_path)?;
    let outcome = run_to(config, &mut out)?;
    out.flush().map_err(io_err(&config.output_path))?;
    Ok(outcome)
}

/// Same as [`run`] but into an arbitrary sink.
pub fn run_to(config: &RunConfig, out: &mut dyn Write) -> Result<RunOutcome, CliError> {
    let wrap = io_err(&config.output_path);
    match config.command {
        CommandKind::FieldInfo => field_info(config, out),
        CommandKind::Ksum => {
            let mut rows = Vec::new();
            for field in &config.fields {
                let a = field.element(config.a.expect("ksum has -a"))?;
                let k = ksum::kloosterman(field, a);
                rows.push((field, a, k));
            }
            match config.output_format {
                OutputFormat::Plain => {
                    for (f, a, k) in &rows {
                        writeln!(out, "m={} poly={:#X} a={a} K={k} K mod 12 = {}", f.degree(), f.reduction_poly(), residue_mod(*k, 12)).map_err(&wrap)?;
                    }
                }
                OutputFormat::Csv => {
                    writeln!(out, "m,poly_hex,a_hex,K,K_mod12").map_err(&wrap)?;
                    for (f, a, k) in &rows {
                        writeln!(out, "{},{:#X},{a},{k},{}", f.degree(), f.reduction_poly(), residue_mod(*k, 12)).map_err(&wrap)?;
                    }
                }
                OutputFormat::Report => {
                    let docs: Vec<_> = rows
                        .iter()
                        .map(|(f, a, k)| json!({"m": f.degree(), "poly": format!("{:#X}", f.reduction_poly()), "a": a.to_string(), "K": k, "K_mod12": residue_mod(*k, 12)}))
                        .collect();
                    write_json(out, &json!(docs)).map_err(&wrap)?;
                }
            }
            Ok(RunOutcome { violations: false })
        }
        CommandKind::KsumTable => {
            let field = &config.fields[0];
            let table = match config.method {
                TableMethod::Naive => ksum::kloosterman_table_naive(field)?,
                TableMethod::Spectral => ksum::kloosterman_table_fast(field)?,
            };
            match config.output_format {
                OutputFormat::Csv | OutputFormat::Plain => table.write_csv(&mut *out).map_err(&wrap)?,
                OutputFormat::Report => write_json(
                    out,
                    &json!({
                        "m": field.degree(),
                        "poly": format!("{:#X}", field.reduction_poly()),
                        "method": table.method(),
                        "values": table.values(),
                    }),
                )
                .map_err(&wrap)?,
            }
            Ok(RunOutcome { violations: false })
        }
        CommandKind::GoethalsCount => goethals_count(config, out),
        CommandKind::Verify | CommandKind::ConjectureScan => {
            let mut reports = Vec::with_capacity(config.fields.len());
            for field in &config.fields {
                reports.push(run_verifier(config, field)?);
            }
            emit_reports(&reports, config.output_format, out).map_err(&wrap)?;
            Ok(RunOutcome {
                violations: reports.iter().any(|r| !r.violations.is_empty()),
            })
        }
    }
}

fn run_verifier(config: &RunConfig, field: &FieldSpec) -> Result<VerificationReport, CliError> {
    if config.command == CommandKind::ConjectureScan {
        let ks = ksum::kloosterman_table_fast(field)?;
        return Ok(verify::conjecture_scan_with(&ks, config.n_max, config.exponent, config.residue_override));
    }
    let family = match config.family.expect("verify has --family") {
        FamilyArg::Corrected => return Ok(verify::verify_corrected_theorem(field)?),
        FamilyArg::A => Family::A,
        FamilyArg::Xi => Family::Xi,
        FamilyArg::CubeRoot => Family::CubeRoot,
    };
    let ks = ksum::kloosterman_table_fast(field)?;
    Ok(verify::verify_family(&ks, family, config.residue_override))
}

fn write_json(out: &mut dyn Write, value: &serde_json::Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

/// Writes reports as a JSON array, CSV summary rows, or one line each.
pub fn emit_reports(reports: &[VerificationReport], format: OutputFormat, out: &mut dyn Write) -> io::Result<()> {
    match format {
        OutputFormat::Report => {
            serde_json::to_writer_pretty(&mut *out, reports)?;
            writeln!(out)
        }
        OutputFormat::Csv => {
            writeln!(out, "theorem,m,poly_hex,cases_total,cases_checked,cases_skipped,violations,pass")?;
            for r in reports {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    theorem_name(r),
                    r.m,
                    r.poly,
                    r.cases_total,
                    r.cases_checked,
                    r.cases_skipped_degenerate,
                    r.violations.len(),
                    r.pass
                )?;
            }
            Ok(())
        }
        OutputFormat::Plain => {
            for r in reports {
                writeln!(
                    out,
                    "{} m={} poly={} total={} checked={} skipped={} violations={} {} ({:.3}s)",
                    theorem_name(r),
                    r.m,
                    r.poly,
                    r.cases_total,
                    r.cases_checked,
                    r.cases_skipped_degenerate,
                    r.violations.len(),
                    if r.pass { "PASS" } else { "FAIL" },
                    r.elapsed_secs
                )?;
                for v in &r.violations {
                    writeln!(out, "  violation {}: expected {} observed {}", v.inputs, v.expected, v.observed)?;
                }
            }
            Ok(())
        }
    }
}

fn theorem_name(r: &VerificationReport) -> String {
    serde_json::to_value(r.theorem_id)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn field_info(config: &RunConfig, out: &mut dyn Write) -> Result<RunOutcome, CliError> {
    let wrap = io_err(&config.output_path);
    let mut failed = false;
    let mut docs = Vec::new();
    for field in &config.fields {
        let (checked, mode, ok) = trace_self_check(field, config.seed);
        failed |= !ok;
        let roots = field.cube_roots_of_unity();
        docs.push(json!({
            "m": field.degree(),
            "q": field.order(),
            "poly": format!("{:#X}", field.reduction_poly()),
            "tr_one": field.trace(FieldElement::ONE),
            "trace_mask": format!("{:#X}", field.trace_mask()),
            "cube_roots": roots.map(|(x, y)| vec![x.to_string(), y.to_string()]),
            "self_check": {"elements": checked, "mode": mode, "ok": ok},
        }));
    }
    match config.output_format {
        OutputFormat::Report => write_json(out, &json!(docs)).map_err(&wrap)?,
        OutputFormat::Csv => {
            writeln!(out, "m,q,poly_hex,tr_one,trace_mask_hex,cube_roots,self_check_ok").map_err(&wrap)?;
            for d in &docs {
                let roots = d["cube_roots"]
                    .as_array()
                    .map(|r| r.iter().filter_map(|v| v.as_str()).collect::<Vec<_>>().join(" "))
                    .unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    d["m"], d["q"], d["poly"].as_str().unwrap(), d["tr_one"],
                    d["trace_mask"].as_str().unwrap(), roots, d["self_check"]["ok"]
                )
                .map_err(&wrap)?;
            }
        }
        OutputFormat::Plain => {
            for (field, d) in config.fields.iter().zip(&docs) {
                let roots = match field.cube_roots_of_unity() {
                    Some((x, y)) => format!("{x} {y}"),
                    None => "none".to_string(),
                };
                writeln!(
                    out,
                    "m={} q={} poly={:#X} Tr(1)={} trace_mask={:#X} cube_roots={roots} self_check={} ({} elements, {})",
                    field.degree(),
                    field.order(),
                    field.reduction_poly(),
                    field.trace(FieldElement::ONE),
                    field.trace_mask(),
                    if d["self_check"]["ok"] == true { "ok" } else { "FAILED" },
                    d["self_check"]["elements"],
                    d["self_check"]["mode"].as_str().unwrap(),
                )
                .map_err(&wrap)?;
            }
        }
    }
    Ok(RunOutcome { violations: failed })
}

/// Compares the masked trace with the defining sum: exhaustively for small
/// fields, on seeded samples otherwise.
fn trace_self_check(field: &FieldSpec, seed: u64) -> (u64, String, bool) {
    let agree = |a: FieldElement| field.trace(a) == field.trace_by_definition(a);
    if field.degree() <= EXHAUSTIVE_SELF_CHECK_MAX {
        (field.order(), "exhaustive".into(), field.elements().all(agree))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ok = (0..SELF_CHECK_SAMPLES)
            .map(|_| FieldElement::from_bits(rng.gen_range(0..field.order()) as u32))
            .all(agree);
        (SELF_CHECK_SAMPLES as u64, format!("sampled, seed {seed}"), ok)
    }
}

fn goethals_count(config: &RunConfig, out: &mut dyn Write) -> Result<RunOutcome, CliError> {
    let wrap = io_err(&config.output_path);
    if let Some((b, c)) = config.bc {
        let mut docs = Vec::new();
        for field in &config.fields {
            let (b, c) = (field.element(b)?, field.element(c)?);
            let ks = ksum::kloosterman_table_fast(field)?;
            let params = goethals::derive_params(field, b, c);
            let ordered = goethals::mu2_bruteforce(field, b, c)?;
            let brute = goethals::Rational::new(ordered as i64, goethals::ORDERINGS_PER_SOLUTION as i64);
            let closed = goethals::mu2_closed(&ks, b, c);
            let sum = goethals::m2_sum(field, &params);
            let m2c = goethals::m2_closed(&ks, &params);
            let tr_one = field.trace(FieldElement::ONE);
            docs.push(json!({
                "m": field.degree(),
                "poly": format!("{:#X}", field.reduction_poly()),
                "b": b.to_string(), "c": c.to_string(),
                "k1": params.k1.to_string(), "k2": params.k2.to_string(), "l": params.l,
                "degenerate": params.degenerate,
                "ordered_count": ordered,
                "mu2_bruteforce": brute.to_string(),
                "mu2_closed": closed.to_string(),
                "m2_sum": sum.to_string(),
                "m2_closed": m2c.to_string(),
                "mu2_via_m2_sum": goethals::mu2_from_m2(sum, field.trace(c), tr_one).to_string(),
                "mu2_via_m2_closed": goethals::mu2_from_m2(m2c, field.trace(c), tr_one).to_string(),
                "match": brute == closed,
            }));
        }
        match config.output_format {
            OutputFormat::Report => write_json(out, &json!(docs)).map_err(&wrap)?,
            OutputFormat::Csv => {
                writeln!(out, "b_hex,c_hex,mu2_bruteforce,mu2_closed,degenerate_flag,match").map_err(&wrap)?;
                for d in &docs {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        d["b"].as_str().unwrap(), d["c"].as_str().unwrap(),
                        d["mu2_bruteforce"].as_str().unwrap(), d["mu2_closed"].as_str().unwrap(),
                        d["degenerate"].as_bool().unwrap() as u8, d["match"]
                    )
                    .map_err(&wrap)?;
                }
            }
            OutputFormat::Plain => {
                for d in &docs {
                    let obj = d.as_object().unwrap();
                    let line: Vec<String> = obj
                        .iter()
                        .map(|(k, v)| match v.as_str() {
                            Some(s) => format!("{k}={s}"),
                            None => format!("{k}={v}"),
                        })
                        .collect();
                    writeln!(out, "{}", line.join(" ")).map_err(&wrap)?;
                }
            }
        }
        return Ok(RunOutcome { violations: false });
    }

    let field = &config.fields[0];
    let table = goethals::mu2_bruteforce_all(field)?;
    let ks = ksum::kloosterman_table_fast(field)?;
    match config.output_format {
        OutputFormat::Csv => table.write_csv(&ks, &mut *out).map_err(&wrap)?,
        OutputFormat::Plain | OutputFormat::Report => {
            let report = verify::verify_corrected_theorem_from(&table, &ks);
            let discrepancies = goethals::m2_discrepancies(&ks);
            let q = field.order();
            let doc = json!({
                "m": field.degree(),
                "poly": format!("{:#X}", field.reduction_poly()),
                "ordered_total": table.total(),
                "expected_total": q * (q - 2) * (q - 4),
                "nondegenerate_pairs": report.cases_checked,
                "degenerate_pairs": report.cases_skipped_degenerate,
                "closed_form_mismatches": report.violations.len(),
                "m2_sum_vs_closed_disagreements": discrepancies.len(),
                "m2_disagreements": discrepancies.iter().map(|d| json!({
                    "b": d.params.b.to_string(), "c": d.params.c.to_string(),
                    "degenerate": d.params.degenerate,
                    "m2_sum": d.sum.to_string(), "m2_closed": d.closed.to_string(),
                })).collect::<Vec<_>>(),
            });
            if config.output_format == OutputFormat::Report {
                write_json(out, &doc).map_err(&wrap)?;
            } else {
                writeln!(
                    out,
                    "m={} poly={} ordered_total={} expected_total={} nondegenerate={} degenerate={} mismatches={} m2_sum_disagreements={}",
                    doc["m"], doc["poly"].as_str().unwrap(), doc["ordered_total"], doc["expected_total"],
                    doc["nondegenerate_pairs"], doc["degenerate_pairs"], doc["closed_form_mismatches"],
                    doc["m2_sum_vs_closed_disagreements"]
                )
                .map_err(&wrap)?;
            }
        }
    }
    Ok(RunOutcome { violations: false })
}

/// Parses `args`, runs, and returns the process exit code. Diagnostics go
/// to `stderr`.
pub fn main_with_args<I, T>(args: I, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = RunConfig::from_cli(cli).and_then(|config| run(&config));
    match result {
        Ok(outcome) => i32::from(outcome.violations),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            let _ = writeln!(stderr, "usage: kloos <command> -m <A..B> [options]; see `kloos --help`");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_ranges() {
        assert_eq!(parse_degree_range("3..6"), Ok(DegreeRange(3..=6)));
        assert_eq!(parse_degree_range("4"), Ok(DegreeRange(4..=4)));
        assert_eq!(parse_degree_range("2..=5"), Ok(DegreeRange(2..=5)));
        assert!(parse_degree_range("6..3").is_err());
        assert!(parse_degree_range("0").is_err());
        assert!(parse_degree_range("x..3").is_err());
    }

    fn config(args: &[&str]) -> Result<RunConfig, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("kloos").chain(args.iter().copied()))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        RunConfig::from_cli(cli)
    }

    #[test]
    fn guards_reject_before_work() {
        assert!(config(&["verify", "--family", "corrected", "-m", "3..9"]).is_err());
        assert!(config(&["ksum-table", "-m", "17", "--method", "naive"]).is_err());
        assert!(config(&["ksum-table", "-m", "17"]).is_ok());
        assert!(config(&["ksum-table", "-m", "3..4"]).is_err());
        assert!(config(&["field-info", "-m", "3..4", "--poly", "0xB"]).is_err());
        assert!(config(&["field-info", "-m", "4", "--poly", "0x15"]).is_err());
        assert!(config(&["ksum", "-m", "3", "-a", "0x8"]).is_err());
        assert!(config(&["goethals-count", "-m", "11"]).is_err());
        assert!(config(&["goethals-count", "-m", "3", "-b", "0x1"]).is_err());
    }

    #[test]
    fn ksum_plain_output() {
        let cfg = config(&["ksum", "-m", "3", "-a", "0x7"]).unwrap();
        let mut buf = Vec::new();
        run_to(&cfg, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "m=3 poly=0xB a=0x7 K=3 K mod 12 = 3\n"
        );
    }
}
