//! The compact text codec: one line per molecule, atom tokens then sparse
//! bond triples, reversible with exact equality.
//!
//! Line grammar on the default grid:
//!
//! ```text
//! molecule := atoms " | " bonds
//! atoms    := "" | atom (" " atom)*
//! atom     := ELEMENT "@" coord "," coord "," coord
//! coord    := "-"? digit+ "." digit{4}
//! bonds    := "" | bond (" " bond)*
//! bond     := i "-" j ":" order
//! ```
//!
//! Atom tokens appear in atom order; bond tokens are ascending by (i, j)
//! with i < j and each undirected bond emitted once. The decoder is strict:
//! malformed text is rejected with a column position, never repaired.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::coord::{parse_units_exact, render_units, CoordError, Grid, QuantizedCoord};
use crate::element::ElementSymbol;
use crate::graph::{Atom, Bond, BondOrder, MolecularGraph};

/// Separator between the atom and bond sections.
pub const SECTION_SEPARATOR: &str = " | ";

/// A canonical encoded molecule: exactly the line [`encode`] produces,
/// without a trailing newline.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CompactText(String);

impl CompactText {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Character count of the line.
    pub fn char_count(&self) -> usize {
        self.0.chars().count()
    }
}

impl fmt::Display for CompactText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("column {col}: missing \" | \" section separator")]
    MissingSeparator { col: usize },
    #[error("column {col}: {detail}")]
    Grammar { col: usize, detail: String },
    #[error("column {col}: unknown element {symbol:?}")]
    UnknownElement { col: usize, symbol: String },
    #[error("column {col}: bad coordinate: {detail}")]
    BadCoordinate { col: usize, detail: String },
    #[error("column {col}: bond index {index} out of range 1..={n_atoms}")]
    BondIndexOutOfRange {
        col: usize,
        index: usize,
        n_atoms: usize,
    },
    #[error("column {col}: bond ({i}, {j}) is not in ascending i < j form")]
    NonCanonicalBond { col: usize, i: usize, j: usize },
    #[error("column {col}: duplicate bond ({i}, {j})")]
    DuplicateBond { col: usize, i: usize, j: usize },
    #[error("column {col}: bond order {value} outside 1..=4")]
    BadBondOrder { col: usize, value: u64 },
}

impl DecodeError {
    /// 1-based column of the offending text.
    pub fn column(&self) -> usize {
        match self {
            DecodeError::MissingSeparator { col }
            | DecodeError::Grammar { col, .. }
            | DecodeError::UnknownElement { col, .. }
            | DecodeError::BadCoordinate { col, .. }
            | DecodeError::BondIndexOutOfRange { col, .. }
            | DecodeError::NonCanonicalBond { col, .. }
            | DecodeError::DuplicateBond { col, .. }
            | DecodeError::BadBondOrder { col, .. } => *col,
        }
    }
}

/// Floors a real position onto the grid, exactly (no binary-float division).
pub fn quantize(r: [f64; 3], grid: Grid) -> Result<QuantizedCoord, CoordError> {
    QuantizedCoord::from_angstrom(r, grid)
}

/// Encodes a graph as one line: atom tokens in atom order, the section
/// separator, then one token per undirected bond ascending by (i, j).
/// Runs in O(N + E) time and space.
pub fn encode(g: &MolecularGraph, grid: Grid) -> CompactText {
    let mut out = String::with_capacity(g.atom_count() * 28 + g.bond_count() * 8 + 3);
    for (idx, atom) in g.atoms().iter().enumerate() {
        if idx > 0 {
            out.push(' ');
        }
        out.push_str(atom.element.symbol());
        out.push('@');
        let [x, y, z] = atom.position.components();
        out.push_str(&render_units(x, grid));
        out.push(',');
        out.push_str(&render_units(y, grid));
        out.push(',');
        out.push_str(&render_units(z, grid));
    }
    out.push_str(SECTION_SEPARATOR);
    for (idx, bond) in g.bonds().iter().enumerate() {
        if idx > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{}-{}:{}", bond.i(), bond.j(), bond.order().as_u8());
    }
    CompactText(out)
}

/// Decodes one line back into a graph. Elements, coordinates, and the bond
/// set are reconstructed exactly.
pub fn decode(line: &str, grid: Grid) -> Result<MolecularGraph, DecodeError> {
    let sep = line
        .find(SECTION_SEPARATOR)
        .ok_or(DecodeError::MissingSeparator {
            col: line.len() + 1,
        })?;
    let atom_section = &line[..sep];
    let bond_section = &line[sep + SECTION_SEPARATOR.len()..];

    let mut atoms = Vec::new();
    for (col, token) in section_tokens(atom_section, 1) {
        atoms.push(parse_atom_token(token, col, grid)?);
    }

    let n_atoms = atoms.len();
    let mut bonds = Vec::new();
    let mut seen = HashSet::new();
    for (col, token) in section_tokens(bond_section, sep + SECTION_SEPARATOR.len() + 1) {
        let bond = parse_bond_token(token, col, n_atoms)?;
        if !seen.insert((bond.i(), bond.j())) {
            return Err(DecodeError::DuplicateBond {
                col,
                i: bond.i(),
                j: bond.j(),
            });
        }
        bonds.push(bond);
    }
    Ok(MolecularGraph::new(atoms, bonds).expect("token-level checks cover graph rules"))
}

/// Splits a section into single-space-separated tokens with their 1-based
/// start columns. An empty section has no tokens; an empty token (leading,
/// trailing, or doubled space) is reported as such.
fn section_tokens(section: &str, base_col: usize) -> impl Iterator<Item = (usize, &str)> {
    let mut col = base_col;
    let empty = section.is_empty();
    section
        .split(' ')
        .map(move |piece| {
            let start = col;
            col += piece.len() + 1;
            (start, piece)
        })
        .filter(move |_| !empty)
}

fn parse_atom_token(token: &str, col: usize, grid: Grid) -> Result<Atom, DecodeError> {
    if token.is_empty() {
        return Err(DecodeError::Grammar {
            col,
            detail: "empty atom token".into(),
        });
    }
    let at = token.find('@').ok_or_else(|| DecodeError::Grammar {
        col,
        detail: format!("atom token {token:?} has no '@'"),
    })?;
    let symbol = &token[..at];
    let element =
        ElementSymbol::from_symbol(symbol).ok_or_else(|| DecodeError::UnknownElement {
            col,
            symbol: symbol.to_string(),
        })?;
    let coords = &token[at + 1..];
    let mut units = [0i64; 3];
    let mut piece_col = col + at + 1;
    let mut pieces = coords.split(',');
    for slot in &mut units {
        let piece = pieces.next().unwrap_or("");
        *slot = parse_units_exact(piece, grid).map_err(|e| DecodeError::BadCoordinate {
            col: piece_col,
            detail: e.to_string(),
        })?;
        piece_col += piece.len() + 1;
    }
    if pieces.next().is_some() {
        return Err(DecodeError::Grammar {
            col,
            detail: format!("atom token {token:?} has more than three coordinates"),
        });
    }
    let position =
        QuantizedCoord::new(units[0], units[1], units[2], grid).map_err(|e| {
            DecodeError::BadCoordinate {
                col,
                detail: e.to_string(),
            }
        })?;
    Ok(Atom { element, position })
}

fn parse_bond_token(token: &str, col: usize, n_atoms: usize) -> Result<Bond, DecodeError> {
    if token.is_empty() {
        return Err(DecodeError::Grammar {
            col,
            detail: "empty bond token".into(),
        });
    }
    let grammar = |detail: String| DecodeError::Grammar { col, detail };
    let dash = token
        .find('-')
        .ok_or_else(|| grammar(format!("bond token {token:?} has no '-'")))?;
    let colon = token[dash + 1..]
        .find(':')
        .map(|p| dash + 1 + p)
        .ok_or_else(|| grammar(format!("bond token {token:?} has no ':'")))?;
    let i = parse_plain_usize(&token[..dash])
        .ok_or_else(|| grammar(format!("bond token {token:?}: bad first index")))?;
    let j = parse_plain_usize(&token[dash + 1..colon])
        .ok_or_else(|| grammar(format!("bond token {token:?}: bad second index")))?;
    let order_value = parse_plain_usize(&token[colon + 1..])
        .ok_or_else(|| grammar(format!("bond token {token:?}: bad order")))? as u64;
    for index in [i, j] {
        if index == 0 || index > n_atoms {
            return Err(DecodeError::BondIndexOutOfRange {
                col,
                index,
                n_atoms,
            });
        }
    }
    if i >= j {
        return Err(DecodeError::NonCanonicalBond { col, i, j });
    }
    let order = BondOrder::from_u8(u8::try_from(order_value).unwrap_or(u8::MAX))
        .map_err(|_| DecodeError::BadBondOrder {
            col,
            value: order_value,
        })?;
    Ok(Bond::new(i, j, order).expect("indices checked"))
}

/// Digits only: no sign, no leading '+', nonempty.
fn parse_plain_usize(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Field-by-field comparison of a graph against its own decoded encoding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundtripReport {
    pub elements_equal: bool,
    pub coords_equal: bool,
    pub bonds_equal: bool,
    /// Root-mean-square coordinate distance in angstrom, from exact integer
    /// differences (0 atoms gives 0.0).
    pub rmsd: f64,
}

impl RoundtripReport {
    pub fn is_lossless(&self) -> bool {
        self.elements_equal && self.coords_equal && self.bonds_equal && self.rmsd == 0.0
    }
}

/// Runs decode(encode(g)) and compares. Decode failure here indicates a
/// codec bug and is propagated.
pub fn roundtrip_report(g: &MolecularGraph, grid: Grid) -> Result<RoundtripReport, DecodeError> {
    let decoded = decode(encode(g, grid).as_str(), grid)?;
    let same_len = decoded.atom_count() == g.atom_count();
    let elements_equal = same_len
        && g.atoms()
            .iter()
            .zip(decoded.atoms())
            .all(|(a, b)| a.element == b.element);
    let coords_equal = same_len
        && g.atoms()
            .iter()
            .zip(decoded.atoms())
            .all(|(a, b)| a.position == b.position);
    let bonds_equal = g.bonds() == decoded.bonds();
    let rmsd = if same_len {
        let mut sum: i128 = 0;
        for (a, b) in g.atoms().iter().zip(decoded.atoms()) {
            let pa = a.position.components();
            let pb = b.position.components();
            for axis in 0..3 {
                let d = (pa[axis] - pb[axis]) as i128;
                sum += d * d;
            }
        }
        if g.atom_count() == 0 || sum == 0 {
            0.0
        } else {
            (sum as f64 / g.atom_count() as f64).sqrt() * grid.delta()
        }
    } else {
        f64::NAN
    };
    Ok(RoundtripReport {
        elements_equal,
        coords_equal,
        bonds_equal,
        rmsd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn grid() -> Grid {
        Grid::default()
    }

    const SAMPLE_LINE: &str = "C@-2.9010,12.7890,-16.4760 O@-3.6540,13.0410,-15.5400 \
         C@-2.7620,11.3220,-16.8420 O@-1.7390,10.9930,-17.5170 O@-3.6980,10.5520,-16.4260 \
         C@-1.8410,14.9530,-16.4260 N@-2.2290,13.7370,-17.1450 C@-1.3860,16.1600,-17.2870 \
         O@-2.2170,17.1100,-17.3780 O@-0.2300,16.1240,-17.7680 | \
         1-2:2 1-3:1 1-7:1 3-4:2 3-5:1 6-7:2 6-8:1 8-9:2 8-10:1";

    #[test]
    fn encodes_sample_molecule_exactly() {
        let line = encode(&fixtures::sample_graph(), grid());
        assert_eq!(line.as_str(), SAMPLE_LINE);
    }

    #[test]
    fn decodes_sample_line_back_to_graph() {
        let g = decode(SAMPLE_LINE, grid()).unwrap();
        assert_eq!(g, fixtures::sample_graph());
    }

    #[test]
    fn single_atom_line_has_trailing_separator() {
        let g = MolecularGraph::new(
            vec![Atom {
                element: ElementSymbol::from_symbol("H").unwrap(),
                position: QuantizedCoord::new(0, 0, 0, grid()).unwrap(),
            }],
            vec![],
        )
        .unwrap();
        let line = encode(&g, grid());
        assert_eq!(line.as_str(), "H@0.0000,0.0000,0.0000 | ");
        assert_eq!(decode(line.as_str(), grid()).unwrap(), g);
    }

    #[test]
    fn empty_molecule_encodes_to_bare_separator() {
        let line = encode(&MolecularGraph::empty(), grid());
        assert_eq!(line.as_str(), " | ");
        let g = decode(" | ", grid()).unwrap();
        assert_eq!(g.atom_count(), 0);
        assert_eq!(g.bond_count(), 0);
    }

    #[test]
    fn token_counts_match_graph() {
        let g = fixtures::sample_graph();
        let line = encode(&g, grid());
        let text = line.as_str();
        let sep = text.find(SECTION_SEPARATOR).unwrap();
        let atom_tokens = text[..sep].split(' ').count();
        let bond_tokens = text[sep + 3..].split(' ').count();
        assert_eq!(atom_tokens, g.atom_count());
        assert_eq!(bond_tokens, g.bond_count());
    }

    #[test]
    fn rejects_unpadded_coordinates() {
        let err = decode("C@0,0,0 | ", grid()).unwrap_err();
        match err {
            DecodeError::BadCoordinate { col, .. } => assert_eq!(col, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_separator() {
        let err = decode("C@0.0000,0.0000,0.0000", grid()).unwrap_err();
        assert!(matches!(err, DecodeError::MissingSeparator { .. }));
    }

    #[test]
    fn rejects_unknown_element() {
        let err = decode("Zz@0.0000,0.0000,0.0000 | ", grid()).unwrap_err();
        assert!(matches!(err, DecodeError::UnknownElement { ref symbol, .. } if symbol == "Zz"));
    }

    #[test]
    fn rejects_noncanonical_bond() {
        let line = "C@0.0000,0.0000,0.0000 H@1.0000,0.0000,0.0000 | 2-1:1";
        let err = decode(line, grid()).unwrap_err();
        assert!(matches!(err, DecodeError::NonCanonicalBond { i: 2, j: 1, .. }));
    }

    #[test]
    fn rejects_out_of_range_bond_index() {
        let line = "C@0.0000,0.0000,0.0000 | 1-2:1";
        let err = decode(line, grid()).unwrap_err();
        assert!(matches!(
            err,
            DecodeError::BondIndexOutOfRange {
                index: 2,
                n_atoms: 1,
                ..
            }
        ));
    }

    #[test]
    fn rejects_duplicate_bond() {
        let line = "C@0.0000,0.0000,0.0000 H@1.0000,0.0000,0.0000 | 1-2:1 1-2:1";
        let err = decode(line, grid()).unwrap_err();
        assert!(matches!(err, DecodeError::DuplicateBond { i: 1, j: 2, .. }));
    }

    #[test]
    fn rejects_bad_order() {
        let line = "C@0.0000,0.0000,0.0000 H@1.0000,0.0000,0.0000 | 1-2:5";
        let err = decode(line, grid()).unwrap_err();
        assert!(matches!(err, DecodeError::BadBondOrder { value: 5, .. }));
    }

    #[test]
    fn rejects_doubled_spaces() {
        let line = "C@0.0000,0.0000,0.0000  H@1.0000,0.0000,0.0000 | ";
        assert!(decode(line, grid()).is_err());
    }

    #[test]
    fn rejects_signed_bond_indices() {
        let line = "C@0.0000,0.0000,0.0000 H@1.0000,0.0000,0.0000 | 1-+2:1";
        assert!(decode(line, grid()).is_err());
    }

    #[test]
    fn quantize_matches_exact_floor_example() {
        let q = quantize([-2.90104, 12.78905, 0.0], grid()).unwrap();
        assert_eq!(q.components(), [-29011, 127890, 0]);
        let same = quantize([-2.9010, 12.7890, -16.4760], grid()).unwrap();
        assert_eq!(same.components(), [-29010, 127890, -164760]);
    }

    #[test]
    fn roundtrip_report_sample_is_lossless() {
        let report = roundtrip_report(&fixtures::sample_graph(), grid()).unwrap();
        assert!(report.elements_equal);
        assert!(report.coords_equal);
        assert!(report.bonds_equal);
        assert_eq!(report.rmsd, 0.0);
        assert!(report.is_lossless());
    }

    #[test]
    fn roundtrip_report_empty_molecule() {
        let report = roundtrip_report(&MolecularGraph::empty(), grid()).unwrap();
        assert!(report.is_lossless());
        assert_eq!(report.rmsd, 0.0);
    }

    #[test]
    fn encode_is_idempotent_through_text() {
        let mut rng = fixtures::SplitMix64::new(21);
        for _ in 0..50 {
            let g = fixtures::random_graph(&mut rng, 30);
            let once = encode(&g, grid());
            let again = encode(&decode(once.as_str(), grid()).unwrap(), grid());
            assert_eq!(once, again);
        }
    }

    #[test]
    fn coarse_grid_changes_token_width() {
        let g2 = Grid::new(2).unwrap();
        let atom = Atom {
            element: ElementSymbol::from_symbol("C").unwrap(),
            position: QuantizedCoord::new(150, -25, 0, g2).unwrap(),
        };
        let g = MolecularGraph::new(vec![atom], vec![]).unwrap();
        let line = encode(&g, g2);
        assert_eq!(line.as_str(), "C@1.50,-0.25,0.00 | ");
        assert_eq!(decode(line.as_str(), g2).unwrap(), g);
    }
}
