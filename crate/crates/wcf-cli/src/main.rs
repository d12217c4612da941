//! `wcf` — exact wall-crossing computations on a rank-2 charge lattice.
//!
//! Subcommands: `factor-commutator` prints the slope-ordered invariant table
//! of the basis commutator; `cross-wall` re-factors the sector spanned by a
//! spectrum's extremal rays; `check-support` validates the support property
//! of a stability file; `lift-path` transports stability data along a
//! straight central-charge path, crossing every wall on the way.
//!
//! Exit codes: 0 success; 2 usage or input errors; 3 a factorization
//! produced a non-integral invariant; 4 support-property violation;
//! 5 non-generic wall configuration.  Data goes to stdout, diagnostics to
//! stderr.

mod schema;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::One;
use serde::Serialize;

use wcf_core::factor::FactorError;
use wcf_core::stability::StabilityError;
use wcf_core::{
    check_support, cross_wall, factorize, lift_path, CentralCharge, Charge, Direction, Pairing,
    PathParam, Rat, RationalComplex, RaySpectrum, TorusAuto, TruncationOrder, Wall,
};

#[derive(Parser)]
#[command(
    name = "wcf",
    version,
    about = "Exact wall-crossing factorizations on a rank-2 charge lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor the commutator of the two basis dilogarithm automorphisms
    /// into a clockwise slope-ordered product and print the invariants
    FactorCommutator {
        /// Pairing value on the basis charges (k >= 1)
        #[arg(long)]
        k: u32,
        /// Truncation order N
        #[arg(long, default_value_t = 8)]
        order: u32,
        /// Output format
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
    },
    /// Cross the wall spanned by the extremal rays of the spectrum and
    /// write the re-factored stability data
    CrossWall {
        /// Input stability file (JSON)
        #[arg(long)]
        input: PathBuf,
        /// Truncation order override (defaults to the file's order)
        #[arg(long)]
        order: Option<u32>,
        /// Output stability file (JSON)
        #[arg(long)]
        output: PathBuf,
    },
    /// Check the support property of a stability file
    CheckSupport {
        /// Input stability file (JSON)
        #[arg(long)]
        input: PathBuf,
    },
    /// Transport stability data along the straight central-charge path to
    /// Z_end, crossing every wall in order
    LiftPath {
        /// Input stability file (JSON)
        #[arg(long)]
        input: PathBuf,
        /// Target central charge as four rationals: re(Z(g1)) im(Z(g1)) re(Z(g2)) im(Z(g2))
        #[arg(long, num_args = 4, allow_hyphen_values = true, value_names = ["RE1", "IM1", "RE2", "IM2"])]
        z_end: Vec<String>,
        /// Truncation order override (defaults to the file's order)
        #[arg(long)]
        order: Option<u32>,
        /// Output stability file (JSON)
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

/// An error carrying its process exit code.
pub struct CliError {
    pub code: u8,
    pub message: String,
}

/// Usage and input errors: exit code 2.
pub fn usage(message: impl Into<String>) -> CliError {
    CliError { code: 2, message: message.into() }
}

impl From<StabilityError> for CliError {
    fn from(e: StabilityError) -> CliError {
        let code = match &e {
            StabilityError::Support(_) => 4,
            StabilityError::CentralChargeVanishesOnPath { .. }
            | StabilityError::PermanentlyAligned { .. }
            | StabilityError::TangentWall { .. }
            | StabilityError::EndpointOnWall { .. }
            | StabilityError::CoincidentWalls { .. }
            | StabilityError::KernelNotNegativeAtWall { .. }
            | StabilityError::InvalidWall { .. } => 5,
            StabilityError::DegenerateForm
            | StabilityError::Factor(_)
            | StabilityError::Lattice(_) => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<FactorError> for CliError {
    fn from(e: FactorError) -> CliError {
        CliError { code: 2, message: e.to_string() }
    }
}

impl From<wcf_core::autos::AutoError> for CliError {
    fn from(e: wcf_core::autos::AutoError) -> CliError {
        CliError { code: 2, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = validate_threads().and_then(|()| match cli.command {
        Command::FactorCommutator { k, order, format } => cmd_factor_commutator(k, order, format),
        Command::CrossWall { input, order, output } => cmd_cross_wall(&input, order, &output),
        Command::CheckSupport { input } => cmd_check_support(&input),
        Command::LiftPath { input, z_end, order, output } => {
            cmd_lift_path(&input, &z_end, order, &output)
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Writes data to stdout.  A closed pipe (e.g. piping into `head`) is not
/// an error; other write failures are.
fn write_stdout(text: &str) -> Result<(), CliError> {
    use std::io::Write;
    match std::io::stdout().write_all(text.as_bytes()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(usage(format!("cannot write to stdout: {e}"))),
    }
}

/// `WCF_THREADS` caps internal parallelism (0 = auto).  The current
/// implementation is single-threaded, so the value is validated and
/// otherwise ignored.
fn validate_threads() -> Result<(), CliError> {
    match std::env::var("WCF_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err(usage("WCF_THREADS must be a non-negative integer (0 = auto)"))
        }
        Ok(value) => value.parse::<u32>().map(|_| ()).map_err(|_| {
            usage(format!(
                "WCF_THREADS must be a non-negative integer (0 = auto), got {value:?}"
            ))
        }),
    }
}

#[derive(Serialize)]
struct TableFile {
    k: u32,
    order: u32,
    omega: Vec<schema::OmegaEntry>,
}

fn cmd_factor_commutator(k: u32, order: u32, format: Format) -> Result<(), CliError> {
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let order = TruncationOrder::new(order).map_err(|e| usage(format!("--order: {e}")))?;
    let pairing = Pairing::new(k);
    let one = Rat::one();
    let s = TorusAuto::dilogarithm_flow(Charge::G1, &one, pairing, order)?;
    let t = TorusAuto::dilogarithm_flow(Charge::G2, &one, pairing, order)?;
    let commutator = TorusAuto::commutator(&s, &t)?;
    let spectrum = factorize(&commutator, Direction::Clockwise)?;
    let rows = schema::sorted_entries(&spectrum);
    let out = match format {
        Format::Tsv => rows
            .iter()
            .map(|(p, m, w)| format!("{}\t{}\t{}\t{}\n", p.a, p.b, m, w))
            .collect::<String>(),
        Format::Json => {
            let table = TableFile {
                k,
                order: order.get(),
                omega: rows
                    .iter()
                    .map(|(p, m, w)| schema::OmegaEntry {
                        gamma: [p.a * i64::from(*m), p.b * i64::from(*m)],
                        value: w.to_string(),
                    })
                    .collect(),
            };
            let mut text = serde_json::to_string_pretty(&table)
                .map_err(|e| usage(format!("cannot serialize table: {e}")))?;
            text.push('\n');
            text
        }
    };
    write_stdout(&out)?;
    let fractional: Vec<String> = rows
        .iter()
        .filter(|(_, _, w)| !w.is_integer())
        .map(|(p, m, w)| format!("omega at {} (multiple {m}) = {w}", *p))
        .collect();
    if !fractional.is_empty() {
        return Err(CliError {
            code: 3,
            message: format!("non-integral invariants: {}", fractional.join(", ")),
        });
    }
    Ok(())
}

fn cmd_cross_wall(
    input: &std::path::Path,
    order: Option<u32>,
    output: &std::path::Path,
) -> Result<(), CliError> {
    let data = schema::load(input, order)?;
    let rays = data.spectrum.rays_in(Direction::Clockwise);
    let crossed = if rays.len() <= 1 {
        // Nothing to reorder: a single ray (or none) spans no sector.  The
        // support property is still enforced.
        let report = check_support(&data);
        if !report.holds() {
            return Err(StabilityError::Support(report).into());
        }
        data.clone()
    } else {
        let wall = Wall {
            t: PathParam::Rational(Rat::new(1.into(), 2.into())),
            hi_ray: rays[0],
            lo_ray: rays[rays.len() - 1],
        };
        cross_wall(&data, &wall, Direction::Clockwise)?
    };
    write_stdout(&omega_diff(&data.spectrum, &crossed.spectrum))?;
    schema::save(output, &crossed)
}

fn cmd_check_support(input: &std::path::Path) -> Result<(), CliError> {
    let data = schema::load(input, None)?;
    let report = check_support(&data);
    if report.holds() {
        write_stdout("support property holds\n")
    } else {
        Err(CliError { code: 4, message: report.to_string() })
    }
}

fn cmd_lift_path(
    input: &std::path::Path,
    z_end: &[String],
    order: Option<u32>,
    output: &std::path::Path,
) -> Result<(), CliError> {
    let data = schema::load(input, order)?;
    if z_end.len() != 4 {
        return Err(usage("--z-end takes exactly four rationals: re1 im1 re2 im2"));
    }
    let part = |i: usize, field: &str| schema::parse_rational(&z_end[i], field);
    let target = CentralCharge::new(
        RationalComplex::new(part(0, "z-end[0]")?, part(1, "z-end[1]")?),
        RationalComplex::new(part(2, "z-end[2]")?, part(3, "z-end[3]")?),
    );
    let lifted = lift_path(&data, &target)?;
    write_stdout(&omega_diff(&data.spectrum, &lifted.spectrum))?;
    schema::save(output, &lifted)
}

/// The changed weights, one `omega(a, b): old -> new` line per total
/// charge, in slope-descending then multiple-ascending order.
fn omega_diff(before: &RaySpectrum, after: &RaySpectrum) -> String {
    let mut keys: Vec<(Charge, u32)> = Vec::new();
    let mut seen: BTreeSet<(Charge, u32)> = BTreeSet::new();
    for spectrum in [before, after] {
        for (p, m, _) in schema::sorted_entries(spectrum) {
            if seen.insert((p, m)) {
                keys.push((p, m));
            }
        }
    }
    keys.sort_by(|x, y| {
        wcf_core::slope_compare(x.0, y.0)
            .expect("spectrum rays are nonzero cone charges")
            .then(x.1.cmp(&y.1))
    });
    let mut out = String::new();
    for (p, m) in keys {
        let gamma = p.scaled(i64::from(m));
        let old = before.omega(gamma);
        let new = after.omega(gamma);
        if old != new {
            out.push_str(&format!("omega{gamma}: {old} -> {new}\n"));
        }
    }
    if out.is_empty() {
        out.push_str("no omega changes\n");
    }
    out
}
