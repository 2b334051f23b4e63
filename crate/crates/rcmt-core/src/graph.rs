//! Molecular graph model: atoms with exact grid coordinates plus typed bonds.
//!
//! Graphs are immutable after construction and all operations here are pure,
//! so values can be shared freely across threads.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coord::QuantizedCoord;
use crate::element::ElementSymbol;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("bond order {0} is outside 1..=4")]
    BadBondOrder(u8),
    #[error("bond ({i}, {j}) is not in canonical i < j form")]
    BadBondIndices { i: usize, j: usize },
    #[error("bond ({i}, {j}) references a missing atom (molecule has {n_atoms})")]
    BondIndexOutOfRange { i: usize, j: usize, n_atoms: usize },
    #[error("duplicate bond ({i}, {j})")]
    DuplicateBond { i: usize, j: usize },
    #[error("atom index {index} out of range 1..={n_atoms}")]
    AtomIndexOutOfRange { index: usize, n_atoms: usize },
}

/// Bond order between two atoms. Order 0 (no bond) is represented by the
/// absence of a [`Bond`], never stored.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single = 1,
    Double = 2,
    Triple = 3,
    Aromatic = 4,
}

impl BondOrder {
    pub fn from_u8(v: u8) -> Result<Self, GraphError> {
        match v {
            1 => Ok(BondOrder::Single),
            2 => Ok(BondOrder::Double),
            3 => Ok(BondOrder::Triple),
            4 => Ok(BondOrder::Aromatic),
            other => Err(GraphError::BadBondOrder(other)),
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for BondOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// An atom: element plus exact grid position.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub element: ElementSymbol,
    pub position: QuantizedCoord,
}

/// An undirected bond in canonical orientation: 1-based indices with i < j.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bond {
    i: usize,
    j: usize,
    order: BondOrder,
}

impl Bond {
    /// Requires 1 <= i < j. Use [`Bond::canonical`] to normalize orientation.
    pub fn new(i: usize, j: usize, order: BondOrder) -> Result<Self, GraphError> {
        if i == 0 || i >= j {
            return Err(GraphError::BadBondIndices { i, j });
        }
        Ok(Bond { i, j, order })
    }

    /// Builds a bond from endpoints in either orientation; rejects self-bonds.
    pub fn canonical(a: usize, b: usize, order: BondOrder) -> Result<Self, GraphError> {
        Bond::new(a.min(b), a.max(b), order)
    }

    pub fn i(self) -> usize {
        self.i
    }

    pub fn j(self) -> usize {
        self.j
    }

    pub fn order(self) -> BondOrder {
        self.order
    }
}

/// How aromatic bonds contribute to valence sums. `Integer` counts an
/// aromatic bond as 1; `KekuleFree` counts it as 3/2 in exact half units.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ValenceMode {
    #[default]
    Integer,
    KekuleFree,
}

/// A bond-order sum in exact half units (so 3/2 per aromatic bond needs no
/// floating point).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Valence(u32);

impl Valence {
    pub const ZERO: Valence = Valence(0);

    pub fn from_int(v: u32) -> Self {
        Valence(v * 2)
    }

    pub fn half_units(self) -> u32 {
        self.0
    }

    /// The integral value, or `None` for half-integers like 3/2.
    pub fn as_int(self) -> Option<u32> {
        (self.0 % 2 == 0).then_some(self.0 / 2)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for Valence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0 / 2)
        }
    }
}

/// The labeled molecular graph: an ordered atom list plus a canonical,
/// duplicate-free bond list sorted by (i, j).
///
/// Atom order is significant (encoding and decoding preserve it); bond list
/// order is not, so construction sorts it.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct MolecularGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
}

impl MolecularGraph {
    pub fn new(atoms: Vec<Atom>, mut bonds: Vec<Bond>) -> Result<Self, GraphError> {
        let n = atoms.len();
        let mut seen = HashSet::with_capacity(bonds.len());
        for b in &bonds {
            if b.j > n {
                return Err(GraphError::BondIndexOutOfRange {
                    i: b.i,
                    j: b.j,
                    n_atoms: n,
                });
            }
            if !seen.insert((b.i, b.j)) {
                return Err(GraphError::DuplicateBond { i: b.i, j: b.j });
            }
        }
        bonds.sort_unstable();
        Ok(MolecularGraph { atoms, bonds })
    }

    pub fn empty() -> Self {
        MolecularGraph {
            atoms: Vec::new(),
            bonds: Vec::new(),
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// The symmetric bond-order matrix with entries in {0,1,2,3,4} and a
    /// zero diagonal. O(N^2) memory; intended for small molecules.
    pub fn bond_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.atoms.len();
        let mut m = vec![vec![0u8; n]; n];
        for b in &self.bonds {
            let (i, j) = (b.i - 1, b.j - 1);
            m[i][j] = b.order.as_u8();
            m[j][i] = b.order.as_u8();
        }
        m
    }

    /// Sum of bond orders incident to the 1-based atom `index`.
    pub fn valence_sum(&self, index: usize, mode: ValenceMode) -> Result<Valence, GraphError> {
        let n = self.atoms.len();
        if index == 0 || index > n {
            return Err(GraphError::AtomIndexOutOfRange { index, n_atoms: n });
        }
        let mut halves = 0u32;
        for b in &self.bonds {
            if b.i == index || b.j == index {
                halves += bond_halves(b.order, mode);
            }
        }
        Ok(Valence(halves))
    }

    /// Valence sums for every atom in one O(N + E) pass.
    pub fn valences(&self, mode: ValenceMode) -> Vec<Valence> {
        let mut halves = vec![0u32; self.atoms.len()];
        for b in &self.bonds {
            let h = bond_halves(b.order, mode);
            halves[b.i - 1] += h;
            halves[b.j - 1] += h;
        }
        halves.into_iter().map(Valence).collect()
    }

    /// Adjacency as (neighbor 1-based index, order) lists per atom.
    pub fn adjacency(&self) -> Vec<Vec<(usize, BondOrder)>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for b in &self.bonds {
            adj[b.i - 1].push((b.j, b.order));
            adj[b.j - 1].push((b.i, b.order));
        }
        adj
    }

    /// Topology digest, invariant under atom reordering (with bond indices
    /// remapped) and rigid motion. Coordinates are excluded: two conformers
    /// of one topology hash identically.
    ///
    /// Weisfeiler-Lehman style refinement: colors start from the element
    /// symbol, then each round folds in the sorted multiset of
    /// (neighbor color, bond order), for N rounds. The digest is a hash of
    /// the sorted final colors.
    pub fn canonical_hash(&self) -> u64 {
        let n = self.atoms.len();
        let adj = self.adjacency();
        let mut colors: Vec<u64> = self
            .atoms
            .iter()
            .map(|a| hash_one(a.element.symbol()))
            .collect();
        let mut scratch = Vec::new();
        for _ in 0..n {
            let mut next = Vec::with_capacity(n);
            for (idx, neighbors) in adj.iter().enumerate() {
                scratch.clear();
                scratch.extend(
                    neighbors
                        .iter()
                        .map(|&(nb, order)| (colors[nb - 1], order.as_u8())),
                );
                scratch.sort_unstable();
                let mut h = DefaultHasher::new();
                h.write_u64(colors[idx]);
                for &(c, o) in &scratch {
                    h.write_u64(c);
                    h.write_u8(o);
                }
                next.push(h.finish());
            }
            colors = next;
        }
        colors.sort_unstable();
        let mut h = DefaultHasher::new();
        h.write_usize(n);
        for c in colors {
            h.write_u64(c);
        }
        h.finish()
    }
}

fn bond_halves(order: BondOrder, mode: ValenceMode) -> u32 {
    match (order, mode) {
        (BondOrder::Aromatic, ValenceMode::Integer) => 2,
        (BondOrder::Aromatic, ValenceMode::KekuleFree) => 3,
        (o, _) => 2 * o.as_u8() as u32,
    }
}

fn hash_one(value: impl Hash) -> u64 {
    let mut h = DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coord::Grid;

    fn carbon_at(x: i64, y: i64, z: i64) -> Atom {
        Atom {
            element: ElementSymbol::from_symbol("C").unwrap(),
            position: QuantizedCoord::new(x, y, z, Grid::default()).unwrap(),
        }
    }

    fn atom(sym: &str) -> Atom {
        Atom {
            element: ElementSymbol::from_symbol(sym).unwrap(),
            position: QuantizedCoord::new(0, 0, 0, Grid::default()).unwrap(),
        }
    }

    fn methane() -> MolecularGraph {
        let atoms = vec![atom("C"), atom("H"), atom("H"), atom("H"), atom("H")];
        let bonds = (2..=5)
            .map(|j| Bond::new(1, j, BondOrder::Single).unwrap())
            .collect();
        MolecularGraph::new(atoms, bonds).unwrap()
    }

    fn ammonia() -> MolecularGraph {
        let atoms = vec![atom("N"), atom("H"), atom("H"), atom("H")];
        let bonds = (2..=4)
            .map(|j| Bond::new(1, j, BondOrder::Single).unwrap())
            .collect();
        MolecularGraph::new(atoms, bonds).unwrap()
    }

    #[test]
    fn bond_rejects_noncanonical_indices() {
        assert!(Bond::new(2, 1, BondOrder::Single).is_err());
        assert!(Bond::new(1, 1, BondOrder::Single).is_err());
        assert!(Bond::new(0, 1, BondOrder::Single).is_err());
        assert!(Bond::canonical(3, 1, BondOrder::Single).is_ok());
        assert!(Bond::canonical(2, 2, BondOrder::Single).is_err());
    }

    #[test]
    fn graph_rejects_out_of_range_and_duplicate_bonds() {
        let atoms = vec![atom("C"), atom("O")];
        let err = MolecularGraph::new(
            atoms.clone(),
            vec![Bond::new(1, 3, BondOrder::Single).unwrap()],
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::BondIndexOutOfRange { .. }));
        let err = MolecularGraph::new(
            atoms,
            vec![
                Bond::new(1, 2, BondOrder::Single).unwrap(),
                Bond::new(1, 2, BondOrder::Double).unwrap(),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::DuplicateBond { i: 1, j: 2 }));
    }

    #[test]
    fn bond_matrix_two_atoms() {
        let atoms = vec![atom("C"), atom("O")];
        let g =
            MolecularGraph::new(atoms, vec![Bond::new(1, 2, BondOrder::Single).unwrap()]).unwrap();
        assert_eq!(g.bond_matrix(), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn bond_matrix_empty_edge_set_is_zero() {
        let g = MolecularGraph::new(vec![atom("C"), atom("N"), atom("O")], vec![]).unwrap();
        assert_eq!(g.bond_matrix(), vec![vec![0; 3]; 3]);
    }

    #[test]
    fn valence_sum_counts_orders() {
        let g = methane();
        assert_eq!(
            g.valence_sum(1, ValenceMode::Integer).unwrap(),
            Valence::from_int(4)
        );
        assert_eq!(
            g.valence_sum(2, ValenceMode::Integer).unwrap(),
            Valence::from_int(1)
        );
        let lone = MolecularGraph::new(vec![atom("C")], vec![]).unwrap();
        assert_eq!(
            lone.valence_sum(1, ValenceMode::Integer).unwrap(),
            Valence::ZERO
        );
        assert!(lone.valence_sum(2, ValenceMode::Integer).is_err());
        assert!(lone.valence_sum(0, ValenceMode::Integer).is_err());
    }

    #[test]
    fn aromatic_valence_depends_on_mode() {
        let atoms = vec![atom("C"), atom("C")];
        let g =
            MolecularGraph::new(atoms, vec![Bond::new(1, 2, BondOrder::Aromatic).unwrap()])
                .unwrap();
        assert_eq!(
            g.valence_sum(1, ValenceMode::Integer).unwrap(),
            Valence::from_int(1)
        );
        let v = g.valence_sum(1, ValenceMode::KekuleFree).unwrap();
        assert_eq!(v.half_units(), 3);
        assert_eq!(v.as_int(), None);
        assert_eq!(v.as_f64(), 1.5);
        assert_eq!(v.to_string(), "1.5");
    }

    #[test]
    fn valences_matches_per_atom_valence_sum() {
        let g = methane();
        let all = g.valences(ValenceMode::Integer);
        for i in 1..=g.atom_count() {
            assert_eq!(all[i - 1], g.valence_sum(i, ValenceMode::Integer).unwrap());
        }
    }

    #[test]
    fn hash_invariant_under_atom_permutation() {
        let g = methane();
        // Reverse the atom list and remap bond indices.
        let n = g.atom_count();
        let atoms: Vec<Atom> = g.atoms().iter().rev().copied().collect();
        let bonds: Vec<Bond> = g
            .bonds()
            .iter()
            .map(|b| Bond::canonical(n + 1 - b.i(), n + 1 - b.j(), b.order()).unwrap())
            .collect();
        let permuted = MolecularGraph::new(atoms, bonds).unwrap();
        assert_eq!(g.canonical_hash(), permuted.canonical_hash());
    }

    #[test]
    fn hash_separates_methane_from_ammonia() {
        assert_ne!(methane().canonical_hash(), ammonia().canonical_hash());
    }

    #[test]
    fn hash_ignores_coordinates() {
        let a = MolecularGraph::new(vec![carbon_at(0, 0, 0)], vec![]).unwrap();
        let b = MolecularGraph::new(vec![carbon_at(10000, 0, 0)], vec![]).unwrap();
        assert_eq!(a.canonical_hash(), b.canonical_hash());
    }

    #[test]
    fn hash_distinguishes_bond_orders() {
        let atoms = vec![atom("C"), atom("C")];
        let single = MolecularGraph::new(
            atoms.clone(),
            vec![Bond::new(1, 2, BondOrder::Single).unwrap()],
        )
        .unwrap();
        let double =
            MolecularGraph::new(atoms, vec![Bond::new(1, 2, BondOrder::Double).unwrap()]).unwrap();
        assert_ne!(single.canonical_hash(), double.canonical_hash());
    }

    #[test]
    fn bonds_are_sorted_on_construction() {
        let atoms = vec![atom("C"), atom("C"), atom("C")];
        let g = MolecularGraph::new(
            atoms,
            vec![
                Bond::new(2, 3, BondOrder::Single).unwrap(),
                Bond::new(1, 2, BondOrder::Double).unwrap(),
            ],
        )
        .unwrap();
        let pairs: Vec<(usize, usize)> = g.bonds().iter().map(|b| (b.i(), b.j())).collect();
        assert_eq!(pairs, vec![(1, 2), (2, 3)]);
    }
}
