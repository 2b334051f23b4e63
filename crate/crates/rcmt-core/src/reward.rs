//! Stability-reward mathematics: Boltzmann stability scores from a pluggable
//! energy oracle, novelty and validity terms, the weighted composite reward,
//! and the clipped policy-gradient surrogate with its ascent step.
//!
//! No policy network lives here; ratios, advantages, and parameters are
//! plain numbers supplied by the caller.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coord::Grid;
use crate::element::ElementSymbol;
use crate::graph::{BondOrder, MolecularGraph, ValenceMode};
use crate::metrics::{is_valid, ValenceTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RewardError {
    #[error("energy oracle returned a non-finite value")]
    NonFiniteEnergy,
    #[error("molecule has no atoms")]
    EmptyMolecule,
    #[error("kT must be positive (got {0})")]
    BadTemperature(f64),
    #[error(
        "stability weights must dominate: w_mol + w_atom > w_div + w_valid \
         (got {w_mol} + {w_atom} <= {w_div} + {w_valid})"
    )]
    WeightConstraint {
        w_mol: f64,
        w_atom: f64,
        w_div: f64,
        w_valid: f64,
    },
    #[error("weights must be finite and nonnegative")]
    BadWeight,
    #[error("ratios and advantages differ in length ({ratios} vs {advantages})")]
    LengthMismatch { ratios: usize, advantages: usize },
    #[error("need at least one (ratio, advantage) pair")]
    EmptyBatch,
    #[error("probability ratios must be positive and finite (got {0})")]
    BadRatio(f64),
    #[error("epsilon must lie in (0, 1) (got {0})")]
    BadEpsilon(f64),
    #[error("learning rate must be finite and nonnegative (got {0})")]
    BadLearningRate(f64),
    #[error("parameter and gradient vectors differ in length ({params} vs {gradient})")]
    ParamLengthMismatch { params: usize, gradient: usize },
    #[error("bad reward configuration: {0}")]
    BadConfig(String),
}

/// Energy backend: total and per-atom energies in reduced units, plus the
/// reference values the Boltzmann scores are measured against.
pub trait EnergyOracle {
    fn total_energy(&self, g: &MolecularGraph) -> Result<f64, RewardError>;
    /// Local energy of the 1-based `atom` within the molecular context.
    fn local_energy(&self, g: &MolecularGraph, atom: usize) -> Result<f64, RewardError>;
    /// Reference total energy (from stable molecules, or 0 by default).
    fn reference_energy(&self) -> f64;
    /// Reference local energy for an atom of this element.
    fn local_reference(&self, element: ElementSymbol) -> f64;
}

/// kT as one product in reduced units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thermostat {
    kt: f64,
}

impl Default for Thermostat {
    fn default() -> Self {
        Thermostat { kt: 1.0 }
    }
}

impl Thermostat {
    pub fn new(kt: f64) -> Result<Self, RewardError> {
        if !(kt > 0.0 && kt.is_finite()) {
            return Err(RewardError::BadTemperature(kt));
        }
        Ok(Thermostat { kt })
    }

    pub fn kt(self) -> f64 {
        self.kt
    }
}

/// Composite reward weights. Construction enforces the dominance constraint
/// w_mol + w_atom > w_div + w_valid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RewardWeights {
    w_mol: f64,
    w_atom: f64,
    w_div: f64,
    w_valid: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            w_mol: 0.4,
            w_atom: 0.3,
            w_div: 0.2,
            w_valid: 0.1,
        }
    }
}

impl RewardWeights {
    pub fn new(w_mol: f64, w_atom: f64, w_div: f64, w_valid: f64) -> Result<Self, RewardError> {
        for w in [w_mol, w_atom, w_div, w_valid] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(RewardError::BadWeight);
            }
        }
        if !(w_mol + w_atom > w_div + w_valid) {
            return Err(RewardError::WeightConstraint {
                w_mol,
                w_atom,
                w_div,
                w_valid,
            });
        }
        Ok(RewardWeights {
            w_mol,
            w_atom,
            w_div,
            w_valid,
        })
    }

    pub fn w_mol(self) -> f64 {
        self.w_mol
    }

    pub fn w_atom(self) -> f64 {
        self.w_atom
    }

    pub fn w_div(self) -> f64 {
        self.w_div
    }

    pub fn w_valid(self) -> f64 {
        self.w_valid
    }

    /// Weighted total, combined as (stability pair) + (auxiliary pair).
    /// With the default weights and all-unit terms this is exactly 1.0.
    pub fn combine(self, s_mol: f64, s_atom: f64, diversity: f64, validity: f64) -> f64 {
        (self.w_mol * s_mol + self.w_atom * s_atom)
            + (self.w_div * diversity + self.w_valid * validity)
    }
}

/// The four reward terms and their weighted total.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RewardBreakdown {
    pub s_mol: f64,
    pub s_atom: f64,
    pub diversity: f64,
    pub validity: f64,
    pub total: f64,
}

/// Boltzmann stability of the whole molecule:
/// exp(-(E_total - E_ref) / kT). Values above 1 are possible when the
/// energy sits below the reference; the formula is applied literally.
pub fn molecular_stability_score(
    g: &MolecularGraph,
    oracle: &dyn EnergyOracle,
    thermo: Thermostat,
) -> Result<f64, RewardError> {
    let total = oracle.total_energy(g)?;
    if !total.is_finite() {
        return Err(RewardError::NonFiniteEnergy);
    }
    Ok((-(total - oracle.reference_energy()) / thermo.kt()).exp())
}

/// Mean per-atom Boltzmann factor:
/// (1/N) Σ exp(-(E_local(i) - E_local_ref(element)) / kT).
pub fn atomic_stability_score(
    g: &MolecularGraph,
    oracle: &dyn EnergyOracle,
    thermo: Thermostat,
) -> Result<f64, RewardError> {
    let n = g.atom_count();
    if n == 0 {
        return Err(RewardError::EmptyMolecule);
    }
    let mut sum = 0.0;
    for (idx, atom) in g.atoms().iter().enumerate() {
        let local = oracle.local_energy(g, idx + 1)?;
        if !local.is_finite() {
            return Err(RewardError::NonFiniteEnergy);
        }
        sum += (-(local - oracle.local_reference(atom.element)) / thermo.kt()).exp();
    }
    Ok(sum / n as f64)
}

/// Set-novelty: 1 if the molecule's topology digest is unseen, else 0. The
/// caller owns the seen set and decides when to insert.
pub fn diversity(g: &MolecularGraph, seen: &HashSet<u64>) -> f64 {
    if seen.contains(&g.canonical_hash()) {
        0.0
    } else {
        1.0
    }
}

/// Composes the four terms into a [`RewardBreakdown`]. Validity is the 0/1
/// indicator from [`is_valid`].
pub fn reward(
    g: &MolecularGraph,
    weights: RewardWeights,
    oracle: &dyn EnergyOracle,
    thermo: Thermostat,
    seen: &HashSet<u64>,
    table: &ValenceTable,
) -> Result<RewardBreakdown, RewardError> {
    let s_mol = molecular_stability_score(g, oracle, thermo)?;
    let s_atom = atomic_stability_score(g, oracle, thermo)?;
    let d = diversity(g, seen);
    let v = if is_valid(g, table) { 1.0 } else { 0.0 };
    Ok(RewardBreakdown {
        s_mol,
        s_atom,
        diversity: d,
        validity: v,
        total: weights.combine(s_mol, s_atom, d, v),
    })
}

/// Empirical mean of min(r·A, clip(r, 1-ε, 1+ε)·A) over the batch.
pub fn ppo_clip_objective(
    ratios: &[f64],
    advantages: &[f64],
    epsilon: f64,
) -> Result<f64, RewardError> {
    if ratios.len() != advantages.len() {
        return Err(RewardError::LengthMismatch {
            ratios: ratios.len(),
            advantages: advantages.len(),
        });
    }
    if ratios.is_empty() {
        return Err(RewardError::EmptyBatch);
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(RewardError::BadEpsilon(epsilon));
    }
    let mut sum = 0.0;
    for (&r, &a) in ratios.iter().zip(advantages) {
        if !(r > 0.0 && r.is_finite()) {
            return Err(RewardError::BadRatio(r));
        }
        let clipped = r.clamp(1.0 - epsilon, 1.0 + epsilon);
        sum += (r * a).min(clipped * a);
    }
    Ok(sum / ratios.len() as f64)
}

/// One gradient-ascent step on the surrogate: θ + lr·∇.
pub fn policy_step(params: &[f64], gradient: &[f64], lr: f64) -> Result<Vec<f64>, RewardError> {
    if params.len() != gradient.len() {
        return Err(RewardError::ParamLengthMismatch {
            params: params.len(),
            gradient: gradient.len(),
        });
    }
    if !(lr.is_finite() && lr >= 0.0) {
        return Err(RewardError::BadLearningRate(lr));
    }
    Ok(params
        .iter()
        .zip(gradient)
        .map(|(&p, &g)| p + lr * g)
        .collect())
}

/// Reference bond lengths in angstrom by element pair and order. Pairs not
/// listed fall back to 1.5 Å. These constants are implementation defaults
/// for the bundled oracle, not measurements.
fn rest_length(a: ElementSymbol, b: ElementSymbol, order: BondOrder) -> f64 {
    let (x, y) = if a.symbol() <= b.symbol() {
        (a.symbol(), b.symbol())
    } else {
        (b.symbol(), a.symbol())
    };
    match (x, y, order) {
        ("C", "C", BondOrder::Single) => 1.54,
        ("C", "C", BondOrder::Double) => 1.34,
        ("C", "C", BondOrder::Triple) => 1.20,
        ("C", "H", BondOrder::Single) => 1.09,
        ("C", "O", BondOrder::Single) => 1.43,
        ("C", "O", BondOrder::Double) => 1.23,
        ("H", "O", BondOrder::Single) => 0.96,
        ("H", "N", BondOrder::Single) => 1.01,
        ("C", "N", BondOrder::Single) => 1.47,
        _ => 1.50,
    }
}

/// The bundled energy model: harmonic bond-length penalties plus a valence
/// deviation penalty per atom, in reduced units.
///
/// E_total = Σ_bonds k·(ℓ - ℓ₀)² + Σ_atoms p·dev², where dev is the
/// distance from the atom's bond-order sum to the nearest allowed valence
/// (0 for elements without a table entry). An atom's local energy is half
/// of each incident bond term plus its own valence term, so local energies
/// sum to the total.
pub struct HarmonicOracle {
    bond_k: f64,
    valence_k: f64,
    grid: Grid,
    table: ValenceTable,
    e_ref: f64,
    local_refs: HashMap<ElementSymbol, f64>,
}

impl Default for HarmonicOracle {
    fn default() -> Self {
        HarmonicOracle::new(Grid::default())
    }
}

impl HarmonicOracle {
    pub fn new(grid: Grid) -> Self {
        HarmonicOracle {
            bond_k: 10.0,
            valence_k: 5.0,
            grid,
            table: ValenceTable::default(),
            e_ref: 0.0,
            local_refs: HashMap::new(),
        }
    }

    /// Sets E_ref and the per-element local references to the mean energies
    /// over a reference corpus of stable molecules.
    pub fn calibrate(&mut self, reference: &[MolecularGraph]) -> Result<(), RewardError> {
        if reference.is_empty() {
            return Ok(());
        }
        let mut total = 0.0;
        let mut local_sums: HashMap<ElementSymbol, (f64, usize)> = HashMap::new();
        for g in reference {
            total += self.total_energy(g)?;
            for (idx, atom) in g.atoms().iter().enumerate() {
                let e = self.local_energy(g, idx + 1)?;
                let entry = local_sums.entry(atom.element).or_insert((0.0, 0));
                entry.0 += e;
                entry.1 += 1;
            }
        }
        self.e_ref = total / reference.len() as f64;
        self.local_refs = local_sums
            .into_iter()
            .map(|(elem, (sum, count))| (elem, sum / count as f64))
            .collect();
        Ok(())
    }

    /// Total energy evaluated at explicit positions (one per atom, in
    /// angstrom) instead of the graph's own coordinates. This is the
    /// function the analytic gradient differentiates.
    pub fn energy_at(&self, g: &MolecularGraph, positions: &[[f64; 3]]) -> f64 {
        let mut e = 0.0;
        for bond in g.bonds() {
            let pa = positions[bond.i() - 1];
            let pb = positions[bond.j() - 1];
            let len = distance(pa, pb);
            let rest = rest_length(
                g.atoms()[bond.i() - 1].element,
                g.atoms()[bond.j() - 1].element,
                bond.order(),
            );
            e += self.bond_k * (len - rest) * (len - rest);
        }
        for (idx, _) in g.atoms().iter().enumerate() {
            let dev = self.valence_deviation(g, idx + 1);
            e += self.valence_k * dev * dev;
        }
        e
    }

    /// Analytic gradient of [`HarmonicOracle::energy_at`] with respect to
    /// each atom position, at the graph's own coordinates. Valence terms do
    /// not depend on positions, so only bond terms contribute.
    pub fn total_energy_gradient(&self, g: &MolecularGraph) -> Vec<[f64; 3]> {
        let positions = self.positions(g);
        let mut grad = vec![[0.0; 3]; g.atom_count()];
        for bond in g.bonds() {
            let (ia, ib) = (bond.i() - 1, bond.j() - 1);
            let pa = positions[ia];
            let pb = positions[ib];
            let len = distance(pa, pb);
            if len == 0.0 {
                continue; // coincident atoms: the bond term is flat-bottomed
            }
            let rest = rest_length(g.atoms()[ia].element, g.atoms()[ib].element, bond.order());
            let scale = 2.0 * self.bond_k * (len - rest) / len;
            for axis in 0..3 {
                let d = pa[axis] - pb[axis];
                grad[ia][axis] += scale * d;
                grad[ib][axis] -= scale * d;
            }
        }
        grad
    }

    /// Graph coordinates in angstrom.
    pub fn positions(&self, g: &MolecularGraph) -> Vec<[f64; 3]> {
        g.atoms()
            .iter()
            .map(|a| a.position.to_angstrom(self.grid))
            .collect()
    }

    fn valence_deviation(&self, g: &MolecularGraph, atom: usize) -> f64 {
        let element = g.atoms()[atom - 1].element;
        let Some(allowed) = self.table.allowed(element) else {
            return 0.0;
        };
        let v = g
            .valence_sum(atom, ValenceMode::Integer)
            .expect("atom index is in range")
            .as_f64();
        allowed
            .iter()
            .map(|&a| (v - a as f64).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

impl EnergyOracle for HarmonicOracle {
    fn total_energy(&self, g: &MolecularGraph) -> Result<f64, RewardError> {
        let e = self.energy_at(g, &self.positions(g));
        if e.is_finite() {
            Ok(e)
        } else {
            Err(RewardError::NonFiniteEnergy)
        }
    }

    fn local_energy(&self, g: &MolecularGraph, atom: usize) -> Result<f64, RewardError> {
        let positions = self.positions(g);
        let mut e = 0.0;
        for bond in g.bonds() {
            if bond.i() != atom && bond.j() != atom {
                continue;
            }
            let pa = positions[bond.i() - 1];
            let pb = positions[bond.j() - 1];
            let len = distance(pa, pb);
            let rest = rest_length(
                g.atoms()[bond.i() - 1].element,
                g.atoms()[bond.j() - 1].element,
                bond.order(),
            );
            e += 0.5 * self.bond_k * (len - rest) * (len - rest);
        }
        let dev = self.valence_deviation(g, atom);
        e += self.valence_k * dev * dev;
        if e.is_finite() {
            Ok(e)
        } else {
            Err(RewardError::NonFiniteEnergy)
        }
    }

    fn reference_energy(&self) -> f64 {
        self.e_ref
    }

    fn local_reference(&self, element: ElementSymbol) -> f64 {
        self.local_refs.get(&element).copied().unwrap_or(0.0)
    }
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// On-disk reward configuration (TOML). Missing fields take defaults.
///
/// ```toml
/// kt = 1.0
/// epsilon = 0.2
/// lr = 1e-3
/// reference_corpus = "stable.sdf"
///
/// [weights]
/// mol = 0.4
/// atom = 0.3
/// diversity = 0.2
/// validity = 0.1
/// ```
#[derive(Clone, Debug, Deserialize, Default)]
pub struct RewardConfigFile {
    pub weights: Option<WeightsSection>,
    pub kt: Option<f64>,
    pub epsilon: Option<f64>,
    pub lr: Option<f64>,
    pub reference_corpus: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct WeightsSection {
    pub mol: f64,
    pub atom: f64,
    pub diversity: f64,
    pub validity: f64,
}

/// Validated reward configuration.
#[derive(Clone, Debug)]
pub struct RewardConfig {
    pub weights: RewardWeights,
    pub thermo: Thermostat,
    pub epsilon: f64,
    pub lr: f64,
    pub reference_corpus: Option<String>,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            weights: RewardWeights::default(),
            thermo: Thermostat::default(),
            epsilon: 0.2,
            lr: 1e-3,
            reference_corpus: None,
        }
    }
}

impl RewardConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, RewardError> {
        let file: RewardConfigFile =
            toml::from_str(text).map_err(|e| RewardError::BadConfig(e.to_string()))?;
        let defaults = RewardConfig::default();
        let weights = match file.weights {
            Some(w) => RewardWeights::new(w.mol, w.atom, w.diversity, w.validity)?,
            None => defaults.weights,
        };
        let thermo = match file.kt {
            Some(kt) => Thermostat::new(kt)?,
            None => defaults.thermo,
        };
        let epsilon = file.epsilon.unwrap_or(defaults.epsilon);
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(RewardError::BadEpsilon(epsilon));
        }
        let lr = file.lr.unwrap_or(defaults.lr);
        if !(lr.is_finite() && lr >= 0.0) {
            return Err(RewardError::BadLearningRate(lr));
        }
        Ok(RewardConfig {
            weights,
            thermo,
            epsilon,
            lr,
            reference_corpus: file.reference_corpus,
        })
    }
}
