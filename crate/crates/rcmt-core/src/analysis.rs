//! Compression measurement: realized character ratios per molecule, corpus
//! aggregates, and the closed-form ratio bound calculator.

use serde::Serialize;
use thiserror::Error;

use crate::codec::encode;
use crate::coord::Grid;
use crate::sdf::{write_record, SdfError, SdfRecord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no record in the corpus was usable")]
    NoUsableRecords,
    #[error("bound arguments must be positive (got {0})")]
    NonPositiveArgument(String),
}

/// Character counts and ratios for one molecule.
///
/// `sdf_chars` counts the full single-record file text (headers, counts
/// line, blocks, "M  END" and "$$$$", with line feeds) as serialized by
/// [`write_record`]; `rcmt_chars` counts the compact line without a
/// trailing newline. `rate` is the reciprocal of `ratio`: smaller is
/// better, so a rate of 0.35 means a 65% character reduction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompressionReport {
    pub sdf_chars: usize,
    pub rcmt_chars: usize,
    pub ratio: f64,
    pub rate: f64,
    pub n_atoms: usize,
    pub n_bonds: usize,
}

/// Per-molecule reports in input order plus exact aggregates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub per_molecule: Vec<CompressionReport>,
    pub mean_ratio: f64,
    pub median_ratio: f64,
    pub mean_rate: f64,
    /// Records skipped because they failed to parse.
    pub failed: usize,
}

/// Measures one record. Deterministic: identical record content gives an
/// identical report.
pub fn measure(record: &SdfRecord, grid: Grid) -> CompressionReport {
    let sdf_chars = write_record(record, grid).chars().count();
    let compact = encode(&record.graph, grid);
    let rcmt_chars = compact.char_count();
    CompressionReport {
        sdf_chars,
        rcmt_chars,
        ratio: sdf_chars as f64 / rcmt_chars as f64,
        rate: rcmt_chars as f64 / sdf_chars as f64,
        n_atoms: record.graph.atom_count(),
        n_bonds: record.graph.bond_count(),
    }
}

/// Measures a stream of per-record parse results in input order. Failed
/// records are counted and skipped.
pub fn corpus_stats<I>(records: I, grid: Grid) -> Result<CorpusSummary, AnalysisError>
where
    I: IntoIterator<Item = Result<SdfRecord, SdfError>>,
{
    let mut per_molecule = Vec::new();
    let mut failed = 0usize;
    let mut any = false;
    for record in records {
        any = true;
        match record {
            Ok(r) => per_molecule.push(measure(&r, grid)),
            Err(_) => failed += 1,
        }
    }
    if !any {
        return Err(AnalysisError::EmptyCorpus);
    }
    if per_molecule.is_empty() {
        return Err(AnalysisError::NoUsableRecords);
    }
    let (mean_ratio, median_ratio, mean_rate) = aggregate(&per_molecule);
    Ok(CorpusSummary {
        per_molecule,
        mean_ratio,
        median_ratio,
        mean_rate,
        failed,
    })
}

/// (mean ratio, median ratio, mean rate) as a deterministic ordered fold.
pub fn aggregate(reports: &[CompressionReport]) -> (f64, f64, f64) {
    let n = reports.len() as f64;
    let mean_ratio = reports.iter().map(|r| r.ratio).sum::<f64>() / n;
    let mean_rate = reports.iter().map(|r| r.rate).sum::<f64>() / n;
    let mut ratios: Vec<f64> = reports.iter().map(|r| r.ratio).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("ratios are finite"));
    let mid = ratios.len() / 2;
    let median_ratio = if ratios.len() % 2 == 1 {
        ratios[mid]
    } else {
        (ratios[mid - 1] + ratios[mid]) / 2.0
    };
    (mean_ratio, median_ratio, mean_rate)
}

/// Closed-form lower-bound estimate for the compression ratio:
///
/// ```text
/// (3N·log10(L) + N·|Σ|) / (N·(|Σ| + 3·log10(1/δ)) + E·log10(4))
/// ```
///
/// where N is the atom count, E the bond count, L the typical coordinate
/// range, δ the grid spacing, and |Σ| the alphabet size (118 elements).
/// Exposed as an informational calculator: its unit accounting is coarse
/// and it can evaluate below the realized ratio, or below 1.
pub fn theoretical_bound(
    n_atoms: u64,
    n_bonds: u64,
    coord_range: f64,
    delta: f64,
    alphabet_size: u32,
) -> Result<f64, AnalysisError> {
    if n_atoms == 0 {
        return Err(AnalysisError::NonPositiveArgument("n_atoms = 0".into()));
    }
    if !(coord_range > 0.0) {
        return Err(AnalysisError::NonPositiveArgument(format!(
            "coord_range = {coord_range}"
        )));
    }
    if !(delta > 0.0) {
        return Err(AnalysisError::NonPositiveArgument(format!("delta = {delta}")));
    }
    if alphabet_size == 0 {
        return Err(AnalysisError::NonPositiveArgument("alphabet_size = 0".into()));
    }
    let n = n_atoms as f64;
    let e = n_bonds as f64;
    let sigma = alphabet_size as f64;
    let numerator = 3.0 * n * coord_range.log10() + n * sigma;
    let denominator = n * (sigma + 3.0 * delta.recip().log10()) + e * 4f64.log10();
    Ok(numerator / denominator)
}
