//! Command-line front door for the molecular codec: encode and decode
//! files, verify round trips, compute compression statistics and ratio
//! bounds, evaluate batch metrics, and score stability rewards.
//!
//! Standard output carries only data; diagnostics go to standard error.
//! Exit codes are a scripting contract: 0 success, 1 usage error, 2 input
//! parse error, 3 verification failure.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use rcmt_core::analysis::{aggregate, measure, theoretical_bound, CompressionReport};
use rcmt_core::element::ALPHABET_SIZE;
use rcmt_core::metrics::{combine_tallies, tally, StabilityMode, ValenceTable};
use rcmt_core::reward::{reward, HarmonicOracle, RewardBreakdown, RewardConfig};
use rcmt_core::sdf::{parse_sdf_corpus, write_record, SdfRecord, SdfWarnings};
use rcmt_core::{decode, encode, roundtrip_report, Grid, MolecularGraph};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rcmt",
    version,
    about = "Lossless codec between SDF structure files and compact molecular text"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for per-molecule work (default: all processors)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Report style for stats, metrics, and reward
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Convert an .sdf file to one compact line per molecule
    Encode {
        input: PathBuf,
        /// Output path (standard output when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Convert an .rcmt file back to V2000 records
    Decode {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check decode(encode(g)) == g for every record
    Roundtrip { input: PathBuf },
    /// Per-molecule and corpus compression statistics
    Stats {
        input: PathBuf,
        /// Coordinate range L: also print the ratio bound per molecule
        #[arg(long)]
        bound: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Batch validity, stability, and uniqueness metrics (.sdf or .rcmt)
    Metrics {
        input: PathBuf,
        /// Hydrogen handling for stability checks
        #[arg(long, value_enum, default_value_t = Mode::Explicit)]
        mode: Mode,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Stability-weighted reward per molecule (.sdf or .rcmt)
    Reward {
        input: PathBuf,
        /// TOML file with weights, kT, epsilon, lr, reference corpus
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Machine,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Explicit,
    Implicit,
}

impl From<Mode> for StabilityMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Explicit => StabilityMode::ExplicitH,
            Mode::Implicit => StabilityMode::ImplicitH,
        }
    }
}

/// A fatal command failure: message for stderr plus the exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let grid = match grid_from_env() {
        Ok(grid) => grid,
        Err(message) => {
            eprintln!("rcmt: {message}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("rcmt: --jobs must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let outcome = match &cli.command {
        Command::Encode { input, output } => cmd_encode(input, output.as_deref(), grid),
        Command::Decode { input, output } => cmd_decode(input, output.as_deref(), grid),
        Command::Roundtrip { input } => cmd_roundtrip(input, grid),
        Command::Stats {
            input,
            bound,
            output,
        } => cmd_stats(input, *bound, output.as_deref(), cli.format, grid),
        Command::Metrics {
            input,
            mode,
            output,
        } => cmd_metrics(input, (*mode).into(), output.as_deref(), cli.format, grid),
        Command::Reward {
            input,
            config,
            output,
        } => cmd_reward(
            input,
            config.as_deref(),
            output.as_deref(),
            cli.format,
            grid,
        ),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("rcmt: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// RCMT_DELTA overrides the quantization grid (expert use, default 1e-4).
fn grid_from_env() -> Result<Grid, String> {
    match std::env::var("RCMT_DELTA") {
        Ok(raw) => Grid::from_delta_str(&raw).map_err(|e| e.to_string()),
        Err(std::env::VarError::NotPresent) => Ok(Grid::default()),
        Err(e) => Err(format!("RCMT_DELTA: {e}")),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_output(output: Option<&Path>, data: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, data)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(data.as_bytes())
            .map_err(|e| Failure::input(format!("standard output: {e}"))),
    }
}

fn warn_sdf(warnings: &SdfWarnings) {
    if warnings.coords_quantized > 0 {
        eprintln!(
            "rcmt: {} coordinate(s) carried extra decimals and were floored onto the grid",
            warnings.coords_quantized
        );
    }
    if warnings.lines_skipped > 0 {
        eprintln!(
            "rcmt: {} property/data line(s) skipped",
            warnings.lines_skipped
        );
    }
}

fn cmd_encode(input: &Path, output: Option<&Path>, grid: Grid) -> Result<u8, Failure> {
    let text = read_input(input)?;
    let corpus = parse_sdf_corpus(&text, grid);
    warn_sdf(&corpus.warnings);
    let lines: Vec<Result<String, String>> = corpus
        .records
        .par_iter()
        .map(|r| match r {
            Ok(record) => Ok(encode(&record.graph, grid).into_string()),
            Err(e) => Err(e.to_string()),
        })
        .collect();
    let mut data = String::new();
    let mut failed = 0usize;
    for line in lines {
        match line {
            Ok(l) => {
                data.push_str(&l);
                data.push('\n');
            }
            Err(message) => {
                eprintln!("rcmt: {message}");
                failed += 1;
            }
        }
    }
    write_output(output, &data)?;
    if failed > 0 {
        eprintln!("rcmt: {failed} failed");
        Ok(EXIT_INPUT)
    } else {
        Ok(EXIT_OK)
    }
}

fn cmd_decode(input: &Path, output: Option<&Path>, grid: Grid) -> Result<u8, Failure> {
    let text = read_input(input)?;
    let lines: Vec<&str> = text.lines().collect();
    let records: Vec<Result<String, String>> = lines
        .par_iter()
        .enumerate()
        .map(|(idx, line)| {
            decode(line, grid)
                .map(|g| write_record(&SdfRecord::with_default_header(g), grid))
                .map_err(|e| format!("line {}: {e}", idx + 1))
        })
        .collect();
    let mut data = String::new();
    let mut failed = 0usize;
    for record in records {
        match record {
            Ok(r) => data.push_str(&r),
            Err(message) => {
                eprintln!("rcmt: {message}");
                failed += 1;
            }
        }
    }
    write_output(output, &data)?;
    if failed > 0 {
        eprintln!("rcmt: {failed} failed");
        Ok(EXIT_INPUT)
    } else {
        Ok(EXIT_OK)
    }
}

fn cmd_roundtrip(input: &Path, grid: Grid) -> Result<u8, Failure> {
    let text = read_input(input)?;
    let corpus = parse_sdf_corpus(&text, grid);
    warn_sdf(&corpus.warnings);
    let checks: Vec<Result<rcmt_core::RoundtripReport, String>> = corpus
        .records
        .par_iter()
        .map(|r| match r {
            Ok(record) => roundtrip_report(&record.graph, grid)
                .map_err(|e| format!("decode error: {e}")),
            Err(e) => Err(e.to_string()),
        })
        .collect();
    let mut out = String::new();
    let mut parse_failed = 0usize;
    let mut mismatched = 0usize;
    let mut max_rmsd = 0.0f64;
    for (idx, check) in checks.iter().enumerate() {
        let record_no = idx + 1;
        match (&corpus.records[idx], check) {
            (Err(_), Err(message)) => {
                eprintln!("rcmt: {message}");
                let _ = writeln!(out, "record {record_no}: FAIL (unparsed)");
                parse_failed += 1;
            }
            (_, Err(message)) => {
                let _ = writeln!(out, "record {record_no}: FAIL ({message})");
                mismatched += 1;
            }
            (_, Ok(report)) if report.is_lossless() => {
                let _ = writeln!(out, "record {record_no}: PASS");
                max_rmsd = max_rmsd.max(report.rmsd);
            }
            (_, Ok(report)) => {
                let _ = writeln!(
                    out,
                    "record {record_no}: FAIL (elements {} coords {} bonds {} rmsd {})",
                    report.elements_equal, report.coords_equal, report.bonds_equal, report.rmsd
                );
                max_rmsd = max_rmsd.max(report.rmsd);
                mismatched += 1;
            }
        }
    }
    let _ = writeln!(out, "max rmsd: {max_rmsd}");
    write_output(None, &out)?;
    if parse_failed > 0 {
        Ok(EXIT_INPUT)
    } else if mismatched > 0 {
        Ok(EXIT_VERIFY)
    } else {
        Ok(EXIT_OK)
    }
}

#[derive(Serialize)]
struct StatsRow {
    name: String,
    #[serde(flatten)]
    report: CompressionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<f64>,
}

#[derive(Serialize)]
struct StatsOut {
    per_molecule: Vec<StatsRow>,
    mean_ratio: f64,
    median_ratio: f64,
    mean_rate: f64,
    failed: usize,
}

fn cmd_stats(
    input: &Path,
    bound_range: Option<f64>,
    output: Option<&Path>,
    format: Format,
    grid: Grid,
) -> Result<u8, Failure> {
    let text = read_input(input)?;
    let corpus = parse_sdf_corpus(&text, grid);
    warn_sdf(&corpus.warnings);
    if corpus.records.is_empty() {
        return Err(Failure::input("corpus is empty"));
    }
    let mut failed = 0usize;
    for record in &corpus.records {
        if let Err(e) = record {
            eprintln!("rcmt: {e}");
            failed += 1;
        }
    }
    let ok_records: Vec<&SdfRecord> = corpus
        .records
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .collect();
    if ok_records.is_empty() {
        return Err(Failure::input("no record in the corpus was usable"));
    }
    let rows: Vec<StatsRow> = ok_records
        .par_iter()
        .enumerate()
        .map(|(idx, record)| {
            let report = measure(record, grid);
            let bound = bound_range.and_then(|l| {
                theoretical_bound(
                    report.n_atoms as u64,
                    report.n_bonds as u64,
                    l,
                    grid.delta(),
                    ALPHABET_SIZE,
                )
                .ok()
            });
            let title = record.header[0].trim();
            StatsRow {
                name: if title.is_empty() {
                    format!("mol_{}", idx + 1)
                } else {
                    title.to_string()
                },
                report,
                bound,
            }
        })
        .collect();
    let reports: Vec<CompressionReport> = rows.iter().map(|r| r.report.clone()).collect();
    let (mean_ratio, median_ratio, mean_rate) = aggregate(&reports);
    let summary = StatsOut {
        per_molecule: rows,
        mean_ratio,
        median_ratio,
        mean_rate,
        failed,
    };
    let rendered = match format {
        Format::Machine => machine_json(&summary)?,
        Format::Table => {
            let mut t = String::new();
            let name_width = summary
                .per_molecule
                .iter()
                .map(|r| r.name.len())
                .max()
                .unwrap_or(4)
                .max(4);
            let _ = writeln!(
                t,
                "{:<name_width$}  {:>9}  {:>10}  {:>6}{}",
                "name",
                "sdf_chars",
                "rcmt_chars",
                "rate",
                if bound_range.is_some() { "   bound" } else { "" },
            );
            for row in &summary.per_molecule {
                let _ = write!(
                    t,
                    "{:<name_width$}  {:>9}  {:>10}  {:>6.4}",
                    row.name, row.report.sdf_chars, row.report.rcmt_chars, row.report.rate
                );
                if let Some(b) = row.bound {
                    let _ = write!(t, "  {b:.4}");
                } else if bound_range.is_some() {
                    let _ = write!(t, "       -");
                }
                t.push('\n');
            }
            let _ = writeln!(t, "mean ratio    {mean_ratio:.4}");
            let _ = writeln!(t, "median ratio  {median_ratio:.4}");
            let _ = writeln!(t, "mean rate     {mean_rate:.4}");
            let _ = writeln!(t, "failed        {failed}");
            t
        }
    };
    write_output(output, &rendered)?;
    Ok(if failed > 0 { EXIT_INPUT } else { EXIT_OK })
}

/// Reads molecules from .sdf or .rcmt input; failures are reported to
/// standard error and counted, not fatal.
fn load_molecules(input: &Path, grid: Grid) -> Result<(Vec<MolecularGraph>, usize), Failure> {
    let text = read_input(input)?;
    if input.extension().is_some_and(|e| e == "rcmt") {
        let lines: Vec<&str> = text.lines().collect();
        let decoded: Vec<Result<MolecularGraph, String>> = lines
            .par_iter()
            .enumerate()
            .map(|(idx, line)| {
                decode(line, grid).map_err(|e| format!("line {}: {e}", idx + 1))
            })
            .collect();
        let mut molecules = Vec::new();
        let mut failed = 0usize;
        for item in decoded {
            match item {
                Ok(g) => molecules.push(g),
                Err(message) => {
                    eprintln!("rcmt: {message}");
                    failed += 1;
                }
            }
        }
        Ok((molecules, failed))
    } else {
        let corpus = parse_sdf_corpus(&text, grid);
        warn_sdf(&corpus.warnings);
        let mut molecules = Vec::new();
        let mut failed = 0usize;
        for record in corpus.records {
            match record {
                Ok(r) => molecules.push(r.graph),
                Err(e) => {
                    eprintln!("rcmt: {e}");
                    failed += 1;
                }
            }
        }
        Ok((molecules, failed))
    }
}

/// Two-decimal percentages, mirroring the usual metric-table style.
fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn cmd_metrics(
    input: &Path,
    mode: StabilityMode,
    output: Option<&Path>,
    format: Format,
    grid: Grid,
) -> Result<u8, Failure> {
    let (molecules, failed) = load_molecules(input, grid)?;
    if molecules.is_empty() {
        return Err(Failure::input("metrics require at least one molecule"));
    }
    let table = ValenceTable::default();
    let tallies: Vec<_> = molecules
        .par_iter()
        .map(|g| tally(g, &table, mode))
        .collect();
    let mut report = combine_tallies(tallies).expect("nonempty batch");
    report.atom_stability_pct = round2(report.atom_stability_pct);
    report.mol_stability_pct = round2(report.mol_stability_pct);
    report.validity_pct = round2(report.validity_pct);
    report.uniqueness_pct = round2(report.uniqueness_pct);
    let rendered = match format {
        Format::Machine => machine_json(&report)?,
        Format::Table => format!(
            "Atom Stability (%)  {:>7.2}\n\
             Mol Stability (%)   {:>7.2}\n\
             Valid (%)           {:>7.2}\n\
             Unique (%)          {:>7.2}\n\
             molecules           {:>7}\n\
             atoms               {:>7}\n\
             unknown elements    {:>7}\n",
            report.atom_stability_pct,
            report.mol_stability_pct,
            report.validity_pct,
            report.uniqueness_pct,
            report.n_molecules,
            report.n_atoms,
            report.unknown_element_atoms,
        ),
    };
    write_output(output, &rendered)?;
    Ok(if failed > 0 { EXIT_INPUT } else { EXIT_OK })
}

#[derive(Serialize)]
struct RewardRow {
    molecule: usize,
    #[serde(flatten)]
    breakdown: RewardBreakdown,
}

#[derive(Serialize)]
struct RewardOut {
    per_molecule: Vec<RewardRow>,
    mean_total: f64,
    failed: usize,
}

fn cmd_reward(
    input: &Path,
    config_path: Option<&Path>,
    output: Option<&Path>,
    format: Format,
    grid: Grid,
) -> Result<u8, Failure> {
    let config = match config_path {
        Some(path) => {
            let text = read_input(path)?;
            RewardConfig::from_toml_str(&text).map_err(|e| Failure::usage(e.to_string()))?
        }
        None => RewardConfig::default(),
    };
    let (molecules, mut failed) = load_molecules(input, grid)?;
    if molecules.is_empty() {
        return Err(Failure::input("reward requires at least one molecule"));
    }
    let mut oracle = HarmonicOracle::new(grid);
    if let Some(ref reference) = config.reference_corpus {
        let text = read_input(Path::new(reference))?;
        let records = rcmt_core::sdf::parse_sdf(&text, grid)
            .map_err(|e| Failure::input(format!("reference corpus: {e}")))?;
        let graphs: Vec<MolecularGraph> = records.into_iter().map(|r| r.graph).collect();
        oracle
            .calibrate(&graphs)
            .map_err(|e| Failure::input(format!("reference corpus: {e}")))?;
    }
    let table = ValenceTable::default();
    // The seen set accumulates in input order, so duplicates score D = 0.
    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(molecules.len());
    for (idx, g) in molecules.iter().enumerate() {
        match reward(g, config.weights, &oracle, config.thermo, &seen, &table) {
            Ok(breakdown) => {
                seen.insert(g.canonical_hash());
                rows.push(RewardRow {
                    molecule: idx + 1,
                    breakdown,
                });
            }
            Err(e) => {
                eprintln!("rcmt: molecule {}: {e}", idx + 1);
                failed += 1;
            }
        }
    }
    if rows.is_empty() {
        return Err(Failure::input("no molecule could be scored"));
    }
    let mean_total = rows.iter().map(|r| r.breakdown.total).sum::<f64>() / rows.len() as f64;
    let summary = RewardOut {
        per_molecule: rows,
        mean_total,
        failed,
    };
    let rendered = match format {
        Format::Machine => machine_json(&summary)?,
        Format::Table => {
            let mut t = String::new();
            for row in &summary.per_molecule {
                let b = &row.breakdown;
                let _ = writeln!(
                    t,
                    "molecule {:>4}  s_mol {:.6}  s_atom {:.6}  diversity {}  validity {}  total {:.6}",
                    row.molecule, b.s_mol, b.s_atom, b.diversity, b.validity, b.total
                );
            }
            let _ = writeln!(t, "mean total    {mean_total:.6}");
            let _ = writeln!(t, "failed        {failed}");
            t
        }
    };
    write_output(output, &rendered)?;
    Ok(if failed > 0 { EXIT_INPUT } else { EXIT_OK })
}

fn machine_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::input(format!("serialization: {e}")))
}
