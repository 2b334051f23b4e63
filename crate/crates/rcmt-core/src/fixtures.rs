//! Sample data and deterministic generators shared by the test suites and
//! benchmarks. Everything here is seeded and platform-independent so fixture
//! corpora are byte-stable across runs.

use crate::coord::{Grid, QuantizedCoord};
use crate::element::ElementSymbol;
use crate::graph::{Atom, Bond, BondOrder, MolecularGraph};
use crate::sdf::SdfRecord;

/// A 10-atom, 9-bond carbamate-like molecule with a stereo flag on one
/// double bond, as a single V2000 record.
pub const SAMPLE_SDF: &str = "\
sample
 RCMT 3D

 10  9  0  0  0  0  0  0  0  0  0999 V2000
   -2.9010   12.7890  -16.4760 C   0  0  0  0  0  0  0  0  0  0  0  0
   -3.6540   13.0410  -15.5400 O   0  0  0  0  0  0  0  0  0  0  0  0
   -2.7620   11.3220  -16.8420 C   0  0  0  0  0  0  0  0  0  0  0  0
   -1.7390   10.9930  -17.5170 O   0  0  0  0  0  0  0  0  0  0  0  0
   -3.6980   10.5520  -16.4260 O   0  0  0  0  0  0  0  0  0  0  0  0
   -1.8410   14.9530  -16.4260 C   0  0  0  0  0  0  0  0  0  0  0  0
   -2.2290   13.7370  -17.1450 N   0  0  0  0  0  0  0  0  0  0  0  0
   -1.3860   16.1600  -17.2870 C   0  0  0  0  0  0  0  0  0  0  0  0
   -2.2170   17.1100  -17.3780 O   0  0  0  0  0  0  0  0  0  0  0  0
   -0.2300   16.1240  -17.7680 O   0  0  0  0  0  0  0  0  0  0  0  0
  1  3  1  0
  1  7  1  0
  1  2  2  0
  3  4  2  0
  3  5  1  0
  6  8  1  0
  6  7  2  3
  8  9  2  0
  8 10  1  0
M  END
$$$$
";

/// The parsed [`SAMPLE_SDF`] record.
pub fn sample_record() -> SdfRecord {
    crate::sdf::parse_sdf(SAMPLE_SDF, Grid::default())
        .expect("sample record parses")
        .remove(0)
}

/// The graph of [`SAMPLE_SDF`].
pub fn sample_graph() -> MolecularGraph {
    sample_record().graph
}

/// SplitMix64: a tiny deterministic generator, stable across platforms.
#[derive(Clone, Debug)]
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform-ish value in 0..bound (modulo bias is irrelevant here).
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }

    /// Uniform value in [0, 1).
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in lo..=hi.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }
}

fn element(sym: &str) -> ElementSymbol {
    ElementSymbol::from_symbol(sym).expect("known symbol")
}

/// An arbitrary valid graph: any element, coordinates within ±100 Å, a
/// random duplicate-free bond set with all four orders. Exercises the codec
/// rather than chemistry.
pub fn random_graph(rng: &mut SplitMix64, max_atoms: usize) -> MolecularGraph {
    let grid = Grid::default();
    let n = 1 + rng.below(max_atoms as u64) as usize;
    let atoms: Vec<Atom> = (0..n)
        .map(|_| Atom {
            element: ElementSymbol::from_atomic_number(1 + rng.below(118) as u8).unwrap(),
            position: QuantizedCoord::new(
                rng.range_i64(-1_000_000, 1_000_000),
                rng.range_i64(-1_000_000, 1_000_000),
                rng.range_i64(-1_000_000, 1_000_000),
                grid,
            )
            .expect("in range"),
        })
        .collect();
    let mut bonds = Vec::new();
    if n >= 2 {
        let max_bonds = (2 * n).min(n * (n - 1) / 2);
        let target = rng.below(max_bonds as u64 + 1) as usize;
        let mut seen = std::collections::HashSet::new();
        let mut attempts = 0;
        while bonds.len() < target && attempts < target * 20 {
            attempts += 1;
            let a = 1 + rng.below(n as u64) as usize;
            let b = 1 + rng.below(n as u64) as usize;
            if a == b {
                continue;
            }
            let (i, j) = (a.min(b), a.max(b));
            if !seen.insert((i, j)) {
                continue;
            }
            let order = BondOrder::from_u8(1 + rng.below(4) as u8).unwrap();
            bonds.push(Bond::new(i, j, order).unwrap());
        }
    }
    MolecularGraph::new(atoms, bonds).expect("generated graph is valid")
}

const ORGANIC_HEAVY: [(&str, u32); 4] = [("C", 4), ("N", 3), ("O", 2), ("F", 1)];

/// A small organic molecule with explicit hydrogens: a random heavy-atom
/// tree with every remaining valence slot filled by H, 10..=29 atoms total.
/// Every atom satisfies its element's valence exactly, so these molecules
/// are valid and stable by construction.
pub fn random_organic(rng: &mut SplitMix64) -> MolecularGraph {
    loop {
        if let Some(g) = try_random_organic(rng) {
            if (10..=29).contains(&g.atom_count()) {
                return g;
            }
        }
    }
}

fn try_random_organic(rng: &mut SplitMix64) -> Option<MolecularGraph> {
    let grid = Grid::default();
    let heavy = 3 + rng.below(7) as usize; // 3..=9 heavy atoms
    let mut kinds = Vec::with_capacity(heavy);
    for i in 0..heavy {
        let roll = rng.below(100);
        let pick = if i == 0 || roll < 60 {
            0 // carbon backbone keeps molecules growable
        } else if roll < 75 {
            1
        } else if roll < 90 {
            2
        } else {
            3
        };
        kinds.push(pick);
    }
    let mut remaining: Vec<u32> = kinds.iter().map(|&k| ORGANIC_HEAVY[k].1).collect();
    let mut positions = vec![[0i64; 3]; heavy];
    positions[0] = [0, 0, 0];
    let mut bonds = Vec::new();
    for child in 1..heavy {
        let candidates: Vec<usize> = (0..child).filter(|&p| remaining[p] >= 1).collect();
        let parent = *candidates.get(rng.below(candidates.len().max(1) as u64) as usize)?;
        let both = remaining[parent].min(remaining[child]);
        let roll = rng.below(100);
        let order = if both >= 3 && roll < 8 {
            3
        } else if both >= 2 && roll < 30 {
            2
        } else {
            1
        };
        remaining[parent] -= order;
        remaining[child] -= order;
        positions[child] = offset_position(rng, positions[parent], 10_900, 15_400);
        bonds.push(Bond::canonical(parent + 1, child + 1, BondOrder::from_u8(order as u8).unwrap()).unwrap());
    }
    let mut atoms: Vec<Atom> = kinds
        .iter()
        .zip(&positions)
        .map(|(&k, &p)| Atom {
            element: element(ORGANIC_HEAVY[k].0),
            position: QuantizedCoord::new(p[0], p[1], p[2], grid).unwrap(),
        })
        .collect();
    // Fill every leftover valence slot with an explicit hydrogen.
    for heavy_idx in 0..heavy {
        for _ in 0..remaining[heavy_idx] {
            let p = offset_position(rng, positions[heavy_idx], 9_600, 10_900);
            atoms.push(Atom {
                element: element("H"),
                position: QuantizedCoord::new(p[0], p[1], p[2], grid).unwrap(),
            });
            bonds.push(
                Bond::canonical(heavy_idx + 1, atoms.len(), BondOrder::Single).unwrap(),
            );
        }
    }
    Some(MolecularGraph::new(atoms, bonds).expect("constructed organic molecule is valid"))
}

/// Parent position plus a random direction scaled to a length (in grid
/// units) drawn from lo..=hi.
fn offset_position(rng: &mut SplitMix64, from: [i64; 3], lo: i64, hi: i64) -> [i64; 3] {
    let len = rng.range_i64(lo, hi) as f64;
    loop {
        let v = [
            rng.unit_f64() * 2.0 - 1.0,
            rng.unit_f64() * 2.0 - 1.0,
            rng.unit_f64() * 2.0 - 1.0,
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm < 1e-3 || norm > 1.0 {
            continue;
        }
        let mut out = from;
        for (slot, c) in out.iter_mut().zip(v) {
            *slot += (c / norm * len) as i64;
        }
        return out;
    }
}

/// A uniformly random permutation of 0..n.
pub fn random_permutation(rng: &mut SplitMix64, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        perm.swap(i, j);
    }
    perm
}

/// Rebuilds a graph with atoms reordered and bond endpoints remapped.
/// `perm[old_zero_based] = new_zero_based`.
pub fn permute_atoms(g: &MolecularGraph, perm: &[usize]) -> MolecularGraph {
    assert_eq!(perm.len(), g.atom_count());
    let mut atoms: Vec<Atom> = g.atoms().to_vec();
    for (old, &new) in perm.iter().enumerate() {
        atoms[new] = g.atoms()[old];
    }
    let bonds: Vec<Bond> = g
        .bonds()
        .iter()
        .map(|b| {
            Bond::canonical(perm[b.i() - 1] + 1, perm[b.j() - 1] + 1, b.order())
                .expect("permutation keeps endpoints distinct")
        })
        .collect();
    MolecularGraph::new(atoms, bonds).expect("permuted graph stays valid")
}

/// A deterministic corpus of organic molecules as SDF records.
pub fn organic_corpus(rng: &mut SplitMix64, count: usize) -> Vec<SdfRecord> {
    (0..count)
        .map(|i| SdfRecord {
            header: [format!("mol_{i}"), " RCMT 3D".to_string(), String::new()],
            graph: random_organic(rng),
        })
        .collect()
}

/// An n-atom carbon chain with consecutive single bonds, coordinates kept
/// inside the allowed range regardless of n. Used for scaling checks.
pub fn chain_graph(n: usize) -> MolecularGraph {
    let grid = Grid::default();
    let atoms: Vec<Atom> = (0..n)
        .map(|i| Atom {
            element: element("C"),
            position: QuantizedCoord::new(
                ((i % 1000) as i64) * 15_400,
                ((i / 1000) as i64) * 15_400,
                0,
                grid,
            )
            .expect("chain coordinates stay in range"),
        })
        .collect();
    let bonds: Vec<Bond> = (1..n)
        .map(|i| Bond::new(i, i + 1, BondOrder::Single).unwrap())
        .collect();
    MolecularGraph::new(atoms, bonds).expect("chain is valid")
}
