//! Batch evaluation metrics over decoded molecules: per-atom and per-molecule
//! valence stability, chemical validity, and topological uniqueness.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::element::ElementSymbol;
use crate::graph::{MolecularGraph, Valence, ValenceMode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("metrics require at least one molecule")]
    EmptyBatch,
}

/// Allowed total valences per element. Unlisted elements are treated as
/// unknown: their atoms count as unstable and are tallied separately so a
/// large corpus still completes.
#[derive(Clone, Debug)]
pub struct ValenceTable {
    allowed: HashMap<ElementSymbol, Vec<u32>>,
}

impl Default for ValenceTable {
    fn default() -> Self {
        let defaults: [(&str, &[u32]); 12] = [
            ("H", &[1]),
            ("C", &[4]),
            ("N", &[3]),
            ("O", &[2]),
            ("F", &[1]),
            ("B", &[3]),
            ("Si", &[4]),
            ("P", &[3, 5]),
            ("S", &[2, 4, 6]),
            ("Cl", &[1]),
            ("Br", &[1]),
            ("I", &[1]),
        ];
        let allowed = defaults
            .iter()
            .map(|(sym, vals)| {
                (
                    ElementSymbol::from_symbol(sym).expect("table symbol"),
                    vals.to_vec(),
                )
            })
            .collect();
        ValenceTable { allowed }
    }
}

impl ValenceTable {
    /// Adds or replaces an element's allowed valence set. Every allowed
    /// valence must be >= 1.
    pub fn set(&mut self, element: ElementSymbol, valences: Vec<u32>) {
        assert!(
            valences.iter().all(|&v| v >= 1),
            "allowed valences must be >= 1"
        );
        self.allowed.insert(element, valences);
    }

    pub fn allowed(&self, element: ElementSymbol) -> Option<&[u32]> {
        self.allowed.get(&element).map(|v| v.as_slice())
    }

    pub fn max_allowed(&self, element: ElementSymbol) -> Option<u32> {
        self.allowed(element)
            .and_then(|vals| vals.iter().copied().max())
    }
}

/// Hydrogen handling for stability checks. `ExplicitH` requires the bond
/// order sum to be exactly an allowed valence; `ImplicitH` only requires it
/// not to exceed the maximum (missing hydrogens assumed implicit).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum StabilityMode {
    #[default]
    ExplicitH,
    ImplicitH,
}

/// Per-atom stability verdict.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AtomVerdict {
    Stable,
    Unstable,
    UnknownElement,
}

/// Batch percentages in the 0..=100 range plus evaluation counts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub atom_stability_pct: f64,
    pub mol_stability_pct: f64,
    pub validity_pct: f64,
    /// Distinct topologies among valid molecules, as a percentage of the
    /// valid count.
    pub uniqueness_pct: f64,
    pub n_molecules: usize,
    pub n_atoms: usize,
    /// Atoms whose element has no entry in the valence table.
    pub unknown_element_atoms: usize,
}

/// Classifies one atom's local environment. Valences are bond-order sums in
/// integer counting mode (an aromatic bond contributes 1).
pub fn atom_verdict(
    g: &MolecularGraph,
    index: usize,
    table: &ValenceTable,
    mode: StabilityMode,
) -> AtomVerdict {
    let valence = g
        .valence_sum(index, ValenceMode::Integer)
        .expect("caller provides a valid index");
    verdict_for(g.atoms()[index - 1].element, valence, table, mode)
}

fn verdict_for(
    element: ElementSymbol,
    valence: Valence,
    table: &ValenceTable,
    mode: StabilityMode,
) -> AtomVerdict {
    let Some(allowed) = table.allowed(element) else {
        return AtomVerdict::UnknownElement;
    };
    let stable = match mode {
        StabilityMode::ExplicitH => valence
            .as_int()
            .is_some_and(|v| allowed.contains(&v)),
        StabilityMode::ImplicitH => {
            let max = allowed.iter().copied().max().unwrap_or(0);
            valence <= Valence::from_int(max)
        }
    };
    if stable {
        AtomVerdict::Stable
    } else {
        AtomVerdict::Unstable
    }
}

/// True iff the atom's valence passes for its element. Unknown elements
/// count as unstable.
pub fn atom_stable(
    g: &MolecularGraph,
    index: usize,
    table: &ValenceTable,
    mode: StabilityMode,
) -> bool {
    atom_verdict(g, index, table, mode) == AtomVerdict::Stable
}

/// True iff every atom is stable. Vacuously true for the empty molecule.
pub fn molecule_stable(g: &MolecularGraph, table: &ValenceTable, mode: StabilityMode) -> bool {
    let valences = g.valences(ValenceMode::Integer);
    g.atoms()
        .iter()
        .zip(valences)
        .all(|(a, v)| verdict_for(a.element, v, table, mode) == AtomVerdict::Stable)
}

/// Chemical validity: at least one atom and every atom within its element's
/// maximum valence (implicit-hydrogen reading). Connectivity is not
/// required, so multi-fragment molecules can be valid.
pub fn is_valid(g: &MolecularGraph, table: &ValenceTable) -> bool {
    g.atom_count() >= 1 && molecule_stable(g, table, StabilityMode::ImplicitH)
}

/// Per-molecule evaluation result, combinable order-independently into a
/// [`MetricsReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoleculeTally {
    pub n_atoms: usize,
    pub stable_atoms: usize,
    pub unknown_atoms: usize,
    pub molecule_stable: bool,
    pub valid: bool,
    /// Topology digest, present iff the molecule is valid.
    pub digest: Option<u64>,
}

/// Evaluates one molecule.
pub fn tally(g: &MolecularGraph, table: &ValenceTable, mode: StabilityMode) -> MoleculeTally {
    let valences = g.valences(ValenceMode::Integer);
    let mut stable_atoms = 0usize;
    let mut unknown_atoms = 0usize;
    let mut molecule_stable = true;
    for (atom, valence) in g.atoms().iter().zip(valences) {
        match verdict_for(atom.element, valence, table, mode) {
            AtomVerdict::Stable => stable_atoms += 1,
            AtomVerdict::Unstable => molecule_stable = false,
            AtomVerdict::UnknownElement => {
                unknown_atoms += 1;
                molecule_stable = false;
            }
        }
    }
    let valid = is_valid(g, table);
    MoleculeTally {
        n_atoms: g.atom_count(),
        stable_atoms,
        unknown_atoms,
        molecule_stable,
        valid,
        digest: valid.then(|| g.canonical_hash()),
    }
}

/// Folds per-molecule tallies into the batch report. The result does not
/// depend on tally order.
pub fn combine_tallies<I>(tallies: I) -> Result<MetricsReport, MetricsError>
where
    I: IntoIterator<Item = MoleculeTally>,
{
    let mut n = 0usize;
    let mut stable_atoms = 0usize;
    let mut total_atoms = 0usize;
    let mut unknown_atoms = 0usize;
    let mut stable_molecules = 0usize;
    let mut valid_molecules = 0usize;
    let mut digests: HashSet<u64> = HashSet::new();
    for t in tallies {
        n += 1;
        total_atoms += t.n_atoms;
        stable_atoms += t.stable_atoms;
        unknown_atoms += t.unknown_atoms;
        stable_molecules += usize::from(t.molecule_stable);
        valid_molecules += usize::from(t.valid);
        if let Some(d) = t.digest {
            digests.insert(d);
        }
    }
    if n == 0 {
        return Err(MetricsError::EmptyBatch);
    }
    let pct = |num: usize, den: usize| {
        if den == 0 {
            100.0
        } else {
            num as f64 / den as f64 * 100.0
        }
    };
    let uniqueness_pct = if valid_molecules == 0 {
        0.0
    } else {
        pct(digests.len(), valid_molecules)
    };
    Ok(MetricsReport {
        atom_stability_pct: pct(stable_atoms, total_atoms),
        mol_stability_pct: pct(stable_molecules, n),
        validity_pct: pct(valid_molecules, n),
        uniqueness_pct,
        n_molecules: n,
        n_atoms: total_atoms,
        unknown_element_atoms: unknown_atoms,
    })
}

/// Evaluates a batch. Atom stability is counted over all atoms of all
/// molecules; uniqueness is the fraction of distinct canonical digests
/// among valid molecules (0 when nothing is valid).
pub fn batch_metrics(
    molecules: &[MolecularGraph],
    table: &ValenceTable,
    mode: StabilityMode,
) -> Result<MetricsReport, MetricsError> {
    combine_tallies(molecules.iter().map(|g| tally(g, table, mode)))
}
