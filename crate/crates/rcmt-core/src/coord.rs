//! Exact fixed-point coordinates on the quantization grid.
//!
//! A coordinate is stored as a signed integer count of grid units, where one
//! unit is delta = 10^-decimals angstrom (default 1e-4). All text conversion
//! is exact decimal arithmetic; binary floating point never touches the
//! stored values, so round trips are bit-identical by construction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coordinate magnitudes above this (in angstrom) are rejected as absurd.
pub const MAX_ABS_ANGSTROM: f64 = 1.0e4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoordError {
    #[error("coordinate magnitude exceeds {MAX_ABS_ANGSTROM} Å")]
    OutOfRange,
    #[error("coordinate is not a finite number")]
    NotFinite,
    #[error("malformed fixed-point number: {0}")]
    Malformed(String),
    #[error("unsupported quantization grid {0:?}: use 1e-0 through 1e-9")]
    BadDelta(String),
}

/// Quantization grid delta = 10^-decimals angstrom.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Grid {
    decimals: u8,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { decimals: 4 }
    }
}

impl Grid {
    /// Grid with delta = 10^-decimals. Supported range: 0..=9 decimals.
    pub fn new(decimals: u8) -> Result<Self, CoordError> {
        if decimals > 9 {
            return Err(CoordError::BadDelta(format!("1e-{decimals}")));
        }
        Ok(Grid { decimals })
    }

    /// Parses a delta spelled as a decimal or scientific literal ("1e-4",
    /// "0.001"). Only exact negative powers of ten are accepted.
    pub fn from_delta_str(s: &str) -> Result<Self, CoordError> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| CoordError::BadDelta(s.to_string()))?;
        for decimals in 0..=9u8 {
            if v == 10f64.powi(-(decimals as i32)) {
                return Ok(Grid { decimals });
            }
        }
        Err(CoordError::BadDelta(s.to_string()))
    }

    pub fn decimals(self) -> u8 {
        self.decimals
    }

    /// Grid spacing in angstrom.
    pub fn delta(self) -> f64 {
        10f64.powi(-(self.decimals as i32))
    }

    /// Units per angstrom (10^decimals).
    pub fn scale(self) -> i64 {
        10i64.pow(self.decimals as u32)
    }

    /// Largest allowed unit count: MAX_ABS_ANGSTROM on this grid.
    pub fn max_units(self) -> i64 {
        10i64.pow(4 + self.decimals as u32)
    }
}

/// Renders a unit count as decimal text with exactly `grid.decimals()`
/// fraction digits, a leading "-" for negatives and no "+".
pub fn render_units(k: i64, grid: Grid) -> String {
    let sign = if k < 0 { "-" } else { "" };
    let abs = k.unsigned_abs();
    if grid.decimals == 0 {
        return format!("{sign}{abs}");
    }
    let scale = grid.scale() as u64;
    format!(
        "{sign}{}.{:0width$}",
        abs / scale,
        abs % scale,
        width = grid.decimals as usize
    )
}

/// Parses the exact textual form produced by [`render_units`]: an optional
/// "-", at least one integer digit, and exactly `grid.decimals()` fraction
/// digits. Anything else is malformed.
pub fn parse_units_exact(s: &str, grid: Grid) -> Result<i64, CoordError> {
    let bytes = s.as_bytes();
    let (neg, rest) = match bytes.first() {
        Some(b'-') => (true, &bytes[1..]),
        _ => (false, bytes),
    };
    let want = grid.decimals as usize;
    let (int_digits, frac_digits): (&[u8], &[u8]) = if want == 0 {
        (rest, b"")
    } else {
        let dot = rest
            .iter()
            .position(|&c| c == b'.')
            .ok_or_else(|| CoordError::Malformed(format!("{s:?}: missing decimal point")))?;
        (&rest[..dot], &rest[dot + 1..])
    };
    if int_digits.is_empty() {
        return Err(CoordError::Malformed(format!("{s:?}: missing integer digits")));
    }
    if want > 0 && frac_digits.len() != want {
        return Err(CoordError::Malformed(format!(
            "{s:?}: expected exactly {want} fraction digits"
        )));
    }
    let int_value = digits_value(int_digits, s)?;
    let frac_value = digits_value(frac_digits, s)?;
    let magnitude = int_value
        .checked_mul(grid.scale() as i128)
        .and_then(|v| v.checked_add(frac_value))
        .ok_or(CoordError::OutOfRange)?;
    finish_units(magnitude, neg, grid)
}

/// Result of a lenient fixed-point parse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FloorParsed {
    pub units: i64,
    /// True when digits beyond the grid resolution were nonzero and the
    /// value was floored onto the grid.
    pub quantized: bool,
}

/// Parses a decimal number of any precision and floors it onto the grid
/// (toward negative infinity), exactly, without binary floating point.
/// Accepts an optional leading "+" or "-", and a fraction of any length.
pub fn parse_units_floor(s: &str, grid: Grid) -> Result<FloorParsed, CoordError> {
    let bytes = s.as_bytes();
    let (neg, rest) = match bytes.first() {
        Some(b'-') => (true, &bytes[1..]),
        Some(b'+') => (false, &bytes[1..]),
        _ => (false, bytes),
    };
    let dot = rest.iter().position(|&c| c == b'.');
    let (int_digits, frac_digits): (&[u8], &[u8]) = match dot {
        Some(p) => (&rest[..p], &rest[p + 1..]),
        None => (rest, b""),
    };
    if int_digits.is_empty() && frac_digits.is_empty() {
        return Err(CoordError::Malformed(format!("{s:?}: no digits")));
    }
    let want = grid.decimals as usize;
    let (kept, dropped) = if frac_digits.len() > want {
        frac_digits.split_at(want)
    } else {
        (frac_digits, &b""[..])
    };
    if dropped.iter().any(|c| !c.is_ascii_digit()) {
        return Err(CoordError::Malformed(format!("{s:?}: bad digit")));
    }
    let mut frac_value = digits_value(kept, s)?;
    // Pad short fractions up to the grid resolution.
    for _ in kept.len()..want {
        frac_value *= 10;
    }
    let int_value = digits_value(int_digits, s)?;
    let magnitude = int_value
        .checked_mul(grid.scale() as i128)
        .and_then(|v| v.checked_add(frac_value))
        .ok_or(CoordError::OutOfRange)?;
    let remainder_nonzero = dropped.iter().any(|&c| c != b'0');
    // Floor toward -inf: negatives with a nonzero dropped tail step down one.
    let adjusted = if neg && remainder_nonzero {
        magnitude + 1
    } else {
        magnitude
    };
    let units = finish_units(adjusted, neg, grid)?;
    Ok(FloorParsed {
        units,
        quantized: remainder_nonzero,
    })
}

fn digits_value(digits: &[u8], whole: &str) -> Result<i128, CoordError> {
    if digits.len() > 30 {
        return Err(CoordError::OutOfRange);
    }
    let mut v: i128 = 0;
    for &c in digits {
        if !c.is_ascii_digit() {
            return Err(CoordError::Malformed(format!("{whole:?}: bad digit")));
        }
        v = v * 10 + (c - b'0') as i128;
    }
    Ok(v)
}

fn finish_units(magnitude: i128, neg: bool, grid: Grid) -> Result<i64, CoordError> {
    if magnitude > grid.max_units() as i128 {
        return Err(CoordError::OutOfRange);
    }
    let v = magnitude as i64;
    Ok(if neg { -v } else { v })
}

/// Floors a real coordinate onto the grid: floor(r / delta) grid units.
///
/// The input is read as the decimal literal it round-trips to (Rust's float
/// formatting yields the shortest such decimal), then floored by exact
/// decimal arithmetic. A value written as 12.7890 therefore stays on the
/// grid even though the nearest double sits a hair below it; binary-float
/// division is never involved.
pub fn quantize_component(r: f64, grid: Grid) -> Result<i64, CoordError> {
    if !r.is_finite() {
        return Err(CoordError::NotFinite);
    }
    if r.abs() > MAX_ABS_ANGSTROM {
        return Err(CoordError::OutOfRange);
    }
    Ok(parse_units_floor(&format!("{r}"), grid)?.units)
}

/// A 3D position in grid units. Components are bounded by
/// [`Grid::max_units`], i.e. 1e8 on the default grid.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct QuantizedCoord {
    x: i64,
    y: i64,
    z: i64,
}

impl QuantizedCoord {
    pub fn new(x: i64, y: i64, z: i64, grid: Grid) -> Result<Self, CoordError> {
        let max = grid.max_units();
        for v in [x, y, z] {
            if v.abs() > max {
                return Err(CoordError::OutOfRange);
            }
        }
        Ok(QuantizedCoord { x, y, z })
    }

    /// Quantizes a real position via [`quantize_component`] per axis.
    pub fn from_angstrom(r: [f64; 3], grid: Grid) -> Result<Self, CoordError> {
        Ok(QuantizedCoord {
            x: quantize_component(r[0], grid)?,
            y: quantize_component(r[1], grid)?,
            z: quantize_component(r[2], grid)?,
        })
    }

    pub fn x(self) -> i64 {
        self.x
    }

    pub fn y(self) -> i64 {
        self.y
    }

    pub fn z(self) -> i64 {
        self.z
    }

    pub fn components(self) -> [i64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn to_angstrom(self, grid: Grid) -> [f64; 3] {
        let d = grid.delta();
        [self.x as f64 * d, self.y as f64 * d, self.z as f64 * d]
    }
}
