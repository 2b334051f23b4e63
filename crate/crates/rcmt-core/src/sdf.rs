//! Reader and writer for V2000 structure-data files.
//!
//! Counts line: atom and bond counts right-aligned in 3-wide fields, then a
//! fixed tail ending in "0999 V2000". Atom lines: three 10-wide coordinate
//! fields with 4 decimals, a space, the element symbol left-justified in 3
//! columns, and twelve zero fields. Bond lines: 3-wide i, j, order and a
//! stereo field that is read and discarded. Fields are parsed by column
//! first, with a whitespace-token fallback for loosely formatted files.

use std::collections::HashSet;

use thiserror::Error;

use crate::coord::{parse_units_floor, render_units, Grid, QuantizedCoord};
use crate::element::ElementSymbol;
use crate::graph::{Atom, Bond, BondOrder, MolecularGraph};

/// Record terminator line.
pub const RECORD_TERMINATOR: &str = "$$$$";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SdfError {
    #[error("record {record}, line {line}: malformed counts line: {detail}")]
    MalformedCounts {
        record: usize,
        line: usize,
        detail: String,
    },
    #[error("record {record}, line {line}: V3000 records are not supported")]
    V3000Unsupported { record: usize, line: usize },
    #[error("record {record}, line {line}: truncated record: {detail}")]
    Truncated {
        record: usize,
        line: usize,
        detail: String,
    },
    #[error("record {record}, line {line}: bad atom line: {detail}")]
    BadAtomLine {
        record: usize,
        line: usize,
        detail: String,
    },
    #[error("record {record}, line {line}: unrecognized element symbol {symbol:?}")]
    UnknownElement {
        record: usize,
        line: usize,
        symbol: String,
    },
    #[error("record {record}, line {line}: bad bond line: {detail}")]
    BadBondLine {
        record: usize,
        line: usize,
        detail: String,
    },
    #[error("record {record}, line {line}: bond references atom {index} but molecule has {n_atoms} atoms")]
    BondIndexOutOfRange {
        record: usize,
        line: usize,
        index: usize,
        n_atoms: usize,
    },
    #[error("record {record}, line {line}: bond order {value} outside 1..=4")]
    BadBondOrder {
        record: usize,
        line: usize,
        value: u64,
    },
    #[error("record {record}, line {line}: duplicate bond ({i}, {j})")]
    DuplicateBond {
        record: usize,
        line: usize,
        i: usize,
        j: usize,
    },
}

impl SdfError {
    /// 1-based record index the error occurred in.
    pub fn record(&self) -> usize {
        match self {
            SdfError::MalformedCounts { record, .. }
            | SdfError::V3000Unsupported { record, .. }
            | SdfError::Truncated { record, .. }
            | SdfError::BadAtomLine { record, .. }
            | SdfError::UnknownElement { record, .. }
            | SdfError::BadBondLine { record, .. }
            | SdfError::BondIndexOutOfRange { record, .. }
            | SdfError::BadBondOrder { record, .. }
            | SdfError::DuplicateBond { record, .. } => *record,
        }
    }

    /// 1-based line number in the parsed text.
    pub fn line(&self) -> usize {
        match self {
            SdfError::MalformedCounts { line, .. }
            | SdfError::V3000Unsupported { line, .. }
            | SdfError::Truncated { line, .. }
            | SdfError::BadAtomLine { line, .. }
            | SdfError::UnknownElement { line, .. }
            | SdfError::BadBondLine { line, .. }
            | SdfError::BondIndexOutOfRange { line, .. }
            | SdfError::BadBondOrder { line, .. }
            | SdfError::DuplicateBond { line, .. } => *line,
        }
    }
}

/// One SDF record: the three raw header lines plus the molecular graph.
/// Headers are preserved on parse but are not part of the compact encoding.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SdfRecord {
    pub header: [String; 3],
    pub graph: MolecularGraph,
}

impl SdfRecord {
    /// Record with the fixed header used when materializing decoded graphs.
    pub fn with_default_header(graph: MolecularGraph) -> Self {
        SdfRecord {
            header: [String::new(), "RCMT".to_string(), String::new()],
            graph,
        }
    }
}

/// Counters for tolerated oddities in parsed input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SdfWarnings {
    /// Coordinates carrying more fraction digits than the grid, floored
    /// onto it at parse time.
    pub coords_quantized: usize,
    /// Property or data lines skipped between the bond block and the
    /// record terminator.
    pub lines_skipped: usize,
}

/// Per-record parse results for a whole file. Bad records do not abort the
/// scan, so corpora with occasional junk still process.
#[derive(Debug, Default)]
pub struct SdfCorpus {
    pub records: Vec<Result<SdfRecord, SdfError>>,
    pub warnings: SdfWarnings,
}

/// Parses concatenated V2000 records, failing on the first bad one.
pub fn parse_sdf(text: &str, grid: Grid) -> Result<Vec<SdfRecord>, SdfError> {
    parse_sdf_corpus(text, grid).records.into_iter().collect()
}

/// Parses every record in the text, collecting per-record errors.
pub fn parse_sdf_corpus(text: &str, grid: Grid) -> SdfCorpus {
    let mut corpus = SdfCorpus::default();
    let lines: Vec<&str> = text.lines().collect();
    let mut start = 0usize;
    while start < lines.len() {
        let end = lines[start..]
            .iter()
            .position(|l| l.trim_end() == RECORD_TERMINATOR)
            .map(|p| start + p);
        let record_index = corpus.records.len() + 1;
        match end {
            Some(end) => {
                let chunk = &lines[start..end];
                corpus.records.push(parse_record(
                    chunk,
                    start,
                    record_index,
                    grid,
                    &mut corpus.warnings,
                ));
                start = end + 1;
            }
            None => {
                // Trailing lines with no terminator: blank padding is fine,
                // anything else is a truncated record.
                if let Some(p) = lines[start..].iter().position(|l| !l.trim().is_empty()) {
                    corpus.records.push(Err(SdfError::Truncated {
                        record: record_index,
                        line: start + p + 1,
                        detail: format!("no {RECORD_TERMINATOR} terminator"),
                    }));
                }
                break;
            }
        }
    }
    corpus
}

fn parse_record(
    chunk: &[&str],
    chunk_start: usize, // 0-based offset of the chunk in the whole text
    record: usize,
    grid: Grid,
    warnings: &mut SdfWarnings,
) -> Result<SdfRecord, SdfError> {
    let line_no = |offset: usize| chunk_start + offset + 1;
    if chunk.len() < 4 {
        return Err(SdfError::Truncated {
            record,
            line: line_no(chunk.len().saturating_sub(1)),
            detail: "record shorter than header plus counts line".into(),
        });
    }
    let header = [
        chunk[0].to_string(),
        chunk[1].to_string(),
        chunk[2].to_string(),
    ];
    let (n_atoms, n_bonds) = parse_counts(chunk[3], record, line_no(3))?;

    let mut atoms = Vec::with_capacity(n_atoms);
    for offset in 0..n_atoms {
        let idx = 4 + offset;
        let line = chunk.get(idx).ok_or_else(|| SdfError::Truncated {
            record,
            line: line_no(chunk.len() - 1),
            detail: format!("expected {n_atoms} atom lines"),
        })?;
        atoms.push(parse_atom_line(line, record, line_no(idx), grid, warnings)?);
    }

    let mut bonds = Vec::with_capacity(n_bonds);
    let mut seen = HashSet::with_capacity(n_bonds);
    for offset in 0..n_bonds {
        let idx = 4 + n_atoms + offset;
        let line = chunk.get(idx).ok_or_else(|| SdfError::Truncated {
            record,
            line: line_no(chunk.len() - 1),
            detail: format!("expected {n_bonds} bond lines"),
        })?;
        let bond = parse_bond_line(line, record, line_no(idx), n_atoms)?;
        if !seen.insert((bond.i(), bond.j())) {
            return Err(SdfError::DuplicateBond {
                record,
                line: line_no(idx),
                i: bond.i(),
                j: bond.j(),
            });
        }
        bonds.push(bond);
    }

    // Everything between the bond block and the terminator ("M  END",
    // property lines, data items) is skipped; only the skip is counted.
    warnings.lines_skipped += chunk[4 + n_atoms + n_bonds..]
        .iter()
        .filter(|l| !l.trim().is_empty() && l.trim_end() != "M  END")
        .count();

    let graph = MolecularGraph::new(atoms, bonds).expect("record-level checks cover graph rules");
    Ok(SdfRecord { header, graph })
}

fn parse_counts(line: &str, record: usize, line_no: usize) -> Result<(usize, usize), SdfError> {
    if line.contains("V3000") {
        return Err(SdfError::V3000Unsupported {
            record,
            line: line_no,
        });
    }
    let by_column = || -> Option<(usize, usize)> {
        let a = line.get(0..3)?.trim().parse().ok()?;
        let b = line.get(3..6)?.trim().parse().ok()?;
        Some((a, b))
    };
    let by_tokens = || -> Option<(usize, usize)> {
        let mut tok = line.split_whitespace();
        let a = tok.next()?.parse().ok()?;
        let b = tok.next()?.parse().ok()?;
        Some((a, b))
    };
    by_column()
        .or_else(by_tokens)
        .ok_or_else(|| SdfError::MalformedCounts {
            record,
            line: line_no,
            detail: format!("cannot read atom/bond counts from {line:?}"),
        })
}

fn atom_line_columns(line: &str) -> Option<[&str; 4]> {
    let x = line.get(0..10)?;
    let y = line.get(10..20)?;
    let z = line.get(20..30)?;
    let rest = line.get(31..)?;
    let sym = rest.get(..3).unwrap_or(rest);
    Some([x, y, z, sym])
}

fn atom_line_tokens(line: &str) -> Option<[&str; 4]> {
    let mut tok = line.split_whitespace();
    Some([tok.next()?, tok.next()?, tok.next()?, tok.next()?])
}

/// (position, symbol field, number of floored coordinates)
fn atom_from_fields(
    fields: [&str; 4],
    grid: Grid,
) -> Result<(QuantizedCoord, &str, usize), String> {
    let mut units = [0i64; 3];
    let mut quantized = 0usize;
    for (slot, raw) in units.iter_mut().zip(&fields[..3]) {
        let parsed = parse_units_floor(raw.trim(), grid).map_err(|e| e.to_string())?;
        *slot = parsed.units;
        quantized += usize::from(parsed.quantized);
    }
    let coord =
        QuantizedCoord::new(units[0], units[1], units[2], grid).map_err(|e| e.to_string())?;
    Ok((coord, fields[3].trim(), quantized))
}

fn parse_atom_line(
    line: &str,
    record: usize,
    line_no: usize,
    grid: Grid,
    warnings: &mut SdfWarnings,
) -> Result<Atom, SdfError> {
    let column_attempt = atom_line_columns(line).map(|f| atom_from_fields(f, grid));
    let parsed = match column_attempt {
        Some(Ok(ok)) => Ok(ok),
        first => match atom_line_tokens(line).map(|f| atom_from_fields(f, grid)) {
            Some(Ok(ok)) => Ok(ok),
            Some(Err(e)) => Err(e),
            None => match first {
                Some(Err(e)) => Err(e),
                _ => Err("line too short".to_string()),
            },
        },
    };
    let (position, symbol, quantized) = parsed.map_err(|detail| SdfError::BadAtomLine {
        record,
        line: line_no,
        detail,
    })?;
    warnings.coords_quantized += quantized;
    let element = ElementSymbol::from_symbol(symbol).ok_or_else(|| SdfError::UnknownElement {
        record,
        line: line_no,
        symbol: symbol.to_string(),
    })?;
    Ok(Atom { element, position })
}

fn parse_bond_line(
    line: &str,
    record: usize,
    line_no: usize,
    n_atoms: usize,
) -> Result<Bond, SdfError> {
    let by_column = || -> Option<(u64, u64, u64)> {
        let i = line.get(0..3)?.trim().parse().ok()?;
        let j = line.get(3..6)?.trim().parse().ok()?;
        let o = line.get(6..9)?.trim().parse().ok()?;
        Some((i, j, o))
    };
    let by_tokens = || -> Option<(u64, u64, u64)> {
        let mut tok = line.split_whitespace();
        Some((
            tok.next()?.parse().ok()?,
            tok.next()?.parse().ok()?,
            tok.next()?.parse().ok()?,
        ))
    };
    // The 4th field (stereo flag) and anything after it are discarded.
    let (i, j, order_value) =
        by_column()
            .or_else(by_tokens)
            .ok_or_else(|| SdfError::BadBondLine {
                record,
                line: line_no,
                detail: format!("cannot read i, j, order from {line:?}"),
            })?;
    let order = BondOrder::from_u8(u8::try_from(order_value).unwrap_or(u8::MAX)).map_err(|_| {
        SdfError::BadBondOrder {
            record,
            line: line_no,
            value: order_value,
        }
    })?;
    let (i, j) = (i as usize, j as usize);
    for index in [i, j] {
        if index == 0 || index > n_atoms {
            return Err(SdfError::BondIndexOutOfRange {
                record,
                line: line_no,
                index,
                n_atoms,
            });
        }
    }
    Bond::canonical(i, j, order).map_err(|e| SdfError::BadBondLine {
        record,
        line: line_no,
        detail: e.to_string(),
    })
}

/// Serializes one record, terminator included.
pub fn write_record(record: &SdfRecord, grid: Grid) -> String {
    let g = &record.graph;
    let mut out = String::new();
    for h in &record.header {
        out.push_str(h);
        out.push('\n');
    }
    out.push_str(&format!(
        "{:>3}{:>3}  0  0  0  0  0  0  0  0  0999 V2000\n",
        g.atom_count(),
        g.bond_count()
    ));
    for atom in g.atoms() {
        let [x, y, z] = atom.position.components();
        out.push_str(&format!(
            "{:>10}{:>10}{:>10} {:<3} 0  0  0  0  0  0  0  0  0  0  0  0\n",
            render_units(x, grid),
            render_units(y, grid),
            render_units(z, grid),
            atom.element.symbol(),
        ));
    }
    for bond in g.bonds() {
        out.push_str(&format!(
            "{:>3}{:>3}{:>3}  0\n",
            bond.i(),
            bond.j(),
            bond.order().as_u8()
        ));
    }
    out.push_str("M  END\n");
    out.push_str(RECORD_TERMINATOR);
    out.push('\n');
    out
}

/// Serializes a list of records as one file.
pub fn write_sdf(records: &[SdfRecord], grid: Grid) -> String {
    records.iter().map(|r| write_record(r, grid)).collect()
}
