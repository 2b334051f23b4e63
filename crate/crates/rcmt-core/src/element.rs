//! Chemical element symbols (the periodic-table alphabet).

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// Number of known elements (H through Og).
pub const ALPHABET_SIZE: u32 = 118;

/// Symbols indexed by atomic number minus one.
const SYMBOLS: [&str; ALPHABET_SIZE as usize] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu",
    "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt",
    "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np",
    "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
    "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
];

fn symbol_index() -> &'static HashMap<&'static str, u8> {
    static INDEX: OnceLock<HashMap<&'static str, u8>> = OnceLock::new();
    INDEX.get_or_init(|| {
        SYMBOLS
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, (i + 1) as u8))
            .collect()
    })
}

/// A recognized chemical element, stored by atomic number.
///
/// Lookup is case-sensitive with standard capitalization ("C", "Cl", "Br").
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementSymbol(u8);

impl ElementSymbol {
    /// Looks a symbol up in the periodic table. `None` for anything that is
    /// not one of the 118 standard symbols, including wrong capitalization.
    pub fn from_symbol(symbol: &str) -> Option<Self> {
        symbol_index().get(symbol).map(|&n| ElementSymbol(n))
    }

    /// Element with the given atomic number, 1..=118.
    pub fn from_atomic_number(number: u8) -> Option<Self> {
        (1..=ALPHABET_SIZE as u8)
            .contains(&number)
            .then_some(ElementSymbol(number))
    }

    /// Atomic number, 1..=118.
    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        SYMBOLS[(self.0 - 1) as usize]
    }
}

impl fmt::Display for ElementSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl fmt::Debug for ElementSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ElementSymbol({})", self.symbol())
    }
}

impl Serialize for ElementSymbol {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for ElementSymbol {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ElementSymbol::from_symbol(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown element symbol {s:?}")))
    }
}
