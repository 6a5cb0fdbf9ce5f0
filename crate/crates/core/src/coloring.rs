//! Proper 3-colorings of the torus, their zero-sets, imbalance and phase
//! classification, plus the JSON interchange format.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rho::Rho;
use crate::torus::{Direction, Edge, Parity, Torus, TorusError, VertexSet};

/// The three colors are `0, 1, 2`; `0` is the distinguished color whose
/// placement on the two sublattices defines the phases.
pub const COLORS: u8 = 3;

/// The map fixing `0` and exchanging `1` and `2`.
#[inline]
pub fn swap_nonzero(c: u8) -> u8 {
    match c {
        1 => 2,
        2 => 1,
        c => c,
    }
}

#[derive(Debug, Error)]
pub enum ColoringError {
    #[error("expected {expected} colors, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("vertex {index} has color {value}, expected 0, 1 or 2")]
    BadValue { index: usize, value: i64 },
    #[error("edge ({}, {}) is monochromatic", .edge.tail, .edge.dir)]
    Improper { edge: Edge },
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Colors packed two bits per vertex.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PackedColors {
    words: Vec<u64>,
    len: usize,
}

impl fmt::Debug for PackedColors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len).map(|i| char::from(b'0' + self.get(i))).collect();
        write!(f, "PackedColors({s})")
    }
}

impl PackedColors {
    pub fn zeros(len: usize) -> PackedColors {
        PackedColors {
            words: vec![0; len.div_ceil(32)],
            len,
        }
    }

    /// Packs `raw` without range checks; values must be below 4.
    pub fn from_slice(raw: &[u8]) -> PackedColors {
        let mut p = PackedColors::zeros(raw.len());
        for (i, &c) in raw.iter().enumerate() {
            p.set(i, c);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        ((self.words[i >> 5] >> ((i & 31) * 2)) & 3) as u8
    }

    #[inline]
    pub fn set(&mut self, i: usize, c: u8) {
        let shift = (i & 31) * 2;
        let w = &mut self.words[i >> 5];
        *w = (*w & !(3u64 << shift)) | ((c as u64 & 3) << shift);
    }

    pub fn to_vec(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Balanced,
    EvenPhase,
    OddPhase,
}

impl Phase {
    /// Phase of an imbalance against the threshold `ρ·n/2`.
    pub fn of(imbalance: i64, rho: Rho, n: usize) -> Phase {
        let t = rho.half_threshold(n);
        if imbalance > t {
            Phase::EvenPhase
        } else if imbalance < -t {
            Phase::OddPhase
        } else {
            Phase::Balanced
        }
    }

    pub fn opposite(self) -> Phase {
        match self {
            Phase::EvenPhase => Phase::OddPhase,
            Phase::OddPhase => Phase::EvenPhase,
            Phase::Balanced => Phase::Balanced,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Balanced => "balanced",
            Phase::EvenPhase => "even",
            Phase::OddPhase => "odd",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseClass {
    pub tag: Phase,
    pub rho: Rho,
    pub imbalance: i64,
}

/// A proper 3-coloring of a torus. Immutable once validated.
#[derive(Clone, PartialEq, Eq)]
pub struct Coloring {
    torus: Torus,
    colors: PackedColors,
}

impl fmt::Debug for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coloring({:?}, {:?})", self.torus, self.colors)
    }
}

/// JSON interchange: `{"L": int, "d": int, "colors": [int, ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringFile {
    #[serde(rename = "L")]
    pub side: usize,
    pub d: usize,
    pub colors: Vec<i64>,
}

impl Coloring {
    /// Checks length, value range and properness; reports the first
    /// violation in index order.
    pub fn validate(torus: &Torus, raw: &[i64]) -> Result<Coloring, ColoringError> {
        if raw.len() != torus.len() {
            return Err(ColoringError::LengthMismatch {
                expected: torus.len(),
                found: raw.len(),
            });
        }
        let mut colors = PackedColors::zeros(raw.len());
        for (index, &value) in raw.iter().enumerate() {
            if !(0..COLORS as i64).contains(&value) {
                return Err(ColoringError::BadValue { index, value });
            }
            colors.set(index, value as u8);
        }
        Coloring::from_packed(torus, colors)
    }

    pub fn from_bytes(torus: &Torus, raw: &[u8]) -> Result<Coloring, ColoringError> {
        let wide: Vec<i64> = raw.iter().map(|&c| c as i64).collect();
        Coloring::validate(torus, &wide)
    }

    pub fn from_packed(torus: &Torus, colors: PackedColors) -> Result<Coloring, ColoringError> {
        if colors.len() != torus.len() {
            return Err(ColoringError::LengthMismatch {
                expected: torus.len(),
                found: colors.len(),
            });
        }
        if let Some(edge) = first_monochromatic_edge(torus, &colors) {
            return Err(ColoringError::Improper { edge });
        }
        Ok(Coloring {
            torus: torus.clone(),
            colors,
        })
    }

    pub(crate) fn from_packed_unchecked(torus: &Torus, colors: PackedColors) -> Coloring {
        debug_assert!(first_monochromatic_edge(torus, &colors).is_none());
        Coloring {
            torus: torus.clone(),
            colors,
        }
    }

    /// `0` on the class `zero_on`, `1` on the other class.
    pub fn ground_state(torus: &Torus, zero_on: Parity) -> Coloring {
        let mut colors = PackedColors::zeros(torus.len());
        for v in 0..torus.len() {
            colors.set(v, if torus.parity(v) == zero_on { 0 } else { 1 });
        }
        Coloring::from_packed_unchecked(torus, colors)
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    #[inline]
    pub fn color(&self, v: usize) -> u8 {
        self.colors.get(v)
    }

    pub fn packed(&self) -> &PackedColors {
        &self.colors
    }

    pub fn to_vec(&self) -> Vec<u8> {
        self.colors.to_vec()
    }

    /// `I(χ) = χ⁻¹(0)`.
    pub fn zero_set(&self) -> VertexSet {
        self.torus
            .vertex_set((0..self.torus.len()).filter(|&v| self.color(v) == 0))
    }

    /// `(|I^E|, |I^O|)`.
    pub fn zero_counts(&self) -> (usize, usize) {
        let mut counts = (0, 0);
        for v in 0..self.torus.len() {
            if self.color(v) == 0 {
                match self.torus.parity(v) {
                    Parity::Even => counts.0 += 1,
                    Parity::Odd => counts.1 += 1,
                }
            }
        }
        counts
    }

    /// `|I^E| - |I^O|`.
    pub fn imbalance(&self) -> i64 {
        let (e, o) = self.zero_counts();
        e as i64 - o as i64
    }

    pub fn classify(&self, rho: Rho) -> PhaseClass {
        let imbalance = self.imbalance();
        PhaseClass {
            tag: Phase::of(imbalance, rho, self.torus.len()),
            rho,
            imbalance,
        }
    }

    pub fn permute_colors(&self, perm: [u8; 3]) -> Coloring {
        let mut colors = PackedColors::zeros(self.torus.len());
        for v in 0..self.torus.len() {
            colors.set(v, perm[self.color(v) as usize]);
        }
        Coloring::from_packed_unchecked(&self.torus, colors)
    }

    /// The coloring `v ↦ χ(σ_{-s}(v))`, whose zero-set is `σ_s(I(χ))`.
    pub fn shifted(&self, dir: Direction) -> Coloring {
        let mut colors = PackedColors::zeros(self.torus.len());
        for v in 0..self.torus.len() {
            colors.set(self.torus.neighbor(v, dir), self.color(v));
        }
        Coloring::from_packed_unchecked(&self.torus, colors)
    }

    /// Number of vertices where the colorings differ.
    pub fn hamming(&self, other: &Coloring) -> usize {
        (0..self.torus.len())
            .filter(|&v| self.color(v) != other.color(v))
            .count()
    }

    pub fn to_file(&self) -> ColoringFile {
        ColoringFile {
            side: self.torus.side(),
            d: self.torus.dim(),
            colors: (0..self.torus.len()).map(|v| self.color(v) as i64).collect(),
        }
    }

    pub fn from_file(file: &ColoringFile) -> Result<Coloring, ColoringError> {
        let torus = Torus::new(file.side, file.d)?;
        Coloring::validate(&torus, &file.colors)
    }

    pub fn from_json(s: &str) -> Result<Coloring, ColoringError> {
        Coloring::from_file(&serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("coloring serializes")
    }

    pub fn read(path: &Path) -> Result<Coloring, ColoringError> {
        Coloring::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), ColoringError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Scans the `d·L^d` edges once, each from its tail in positive directions.
pub fn first_monochromatic_edge(torus: &Torus, colors: &PackedColors) -> Option<Edge> {
    let mut first: Option<Edge> = None;
    for v in 0..torus.len() {
        let c = colors.get(v);
        for dir in torus.directions().into_iter().filter(|d| d.is_positive()) {
            let u = torus.neighbor(v, dir);
            if colors.get(u) == c {
                let e = torus.edge(v, u).expect("adjacent");
                if first.is_none_or(|f| e < f) {
                    first = Some(e);
                }
            }
        }
    }
    first
}

/// `true` iff no edge joins two vertices of `set`.
pub fn is_independent(torus: &Torus, set: &VertexSet) -> bool {
    set.iter()
        .all(|v| torus.neighbors(v).all(|u| !set.contains(u)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t42() -> Torus {
        Torus::new(4, 2).unwrap()
    }

    fn two_color(t: &Torus, even: i64, odd: i64) -> Vec<i64> {
        (0..t.len())
            .map(|v| if t.is_even(v) { even } else { odd })
            .collect()
    }

    fn single_zero(t: &Torus) -> Vec<i64> {
        let mut raw = two_color(t, 1, 2);
        raw[t.index(&[0, 0])] = 0;
        raw
    }

    /// Brute-force properness over all unordered vertex pairs.
    fn oracle_proper(t: &Torus, raw: &[i64]) -> bool {
        for u in 0..t.len() {
            for v in u + 1..t.len() {
                let cu = t.coords(u);
                let cv = t.coords(v);
                let diff: Vec<usize> = (0..t.dim()).filter(|&a| cu[a] != cv[a]).collect();
                if diff.len() == 1 {
                    let a = diff[0];
                    let delta = (cu[a] + t.side() - cv[a]) % t.side();
                    if (delta == 1 || delta == t.side() - 1) && raw[u] == raw[v] {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn validate_examples() {
        let t = t42();
        let c = Coloring::validate(&t, &two_color(&t, 1, 2)).unwrap();
        assert!(c.zero_set().is_empty());
        assert!(matches!(
            Coloring::validate(&t, &two_color(&t, 0, 0)),
            Err(ColoringError::Improper { .. })
        ));
        let raw = single_zero(&t);
        assert!(oracle_proper(&t, &raw));
        assert!(Coloring::validate(&t, &raw).is_ok());
        assert!(matches!(
            Coloring::validate(&t, &raw[..15]),
            Err(ColoringError::LengthMismatch { expected: 16, found: 15 })
        ));
        let mut bad = raw.clone();
        bad[3] = 7;
        assert!(matches!(
            Coloring::validate(&t, &bad),
            Err(ColoringError::BadValue { index: 3, value: 7 })
        ));
    }

    #[test]
    fn reports_first_violating_edge() {
        let t = Torus::new(4, 1).unwrap();
        let err = Coloring::validate(&t, &[1, 2, 2, 1]).unwrap_err();
        match err {
            ColoringError::Improper { edge } => {
                assert_eq!(edge.tail, 0);
                assert_eq!(edge.head(&t), 3);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn imbalance_examples() {
        let t = t42();
        let even = Coloring::validate(&t, &two_color(&t, 0, 1)).unwrap();
        assert_eq!(even.imbalance(), 8);
        let odd = Coloring::validate(&t, &two_color(&t, 1, 0)).unwrap();
        assert_eq!(odd.imbalance(), -8);
        let single = Coloring::validate(&t, &single_zero(&t)).unwrap();
        assert_eq!(single.imbalance(), 1);
    }

    #[test]
    fn classify_examples() {
        let t = t42();
        let rho: Rho = "0.22".parse().unwrap();
        let even = Coloring::ground_state(&t, Parity::Even);
        assert_eq!(even.classify(rho).tag, Phase::EvenPhase);
        assert_eq!(Phase::of(0, rho, 16), Phase::Balanced);
        assert_eq!(Phase::of(0, "0.01".parse().unwrap(), 16), Phase::Balanced);
        assert_eq!(Phase::of(1, rho, 16), Phase::Balanced);
        assert_eq!(Phase::of(2, rho, 16), Phase::EvenPhase);
        assert_eq!(Phase::of(-2, rho, 16), Phase::OddPhase);
        // the weak inequality: imbalance exactly ρn/2 is balanced
        assert_eq!(Phase::of(2, "0.25".parse().unwrap(), 16), Phase::Balanced);
    }

    #[test]
    fn ground_states() {
        let t = t42();
        let rho: Rho = "0.22".parse().unwrap();
        let e = Coloring::ground_state(&t, Parity::Even);
        let o = Coloring::ground_state(&t, Parity::Odd);
        assert_eq!(e.imbalance(), 8);
        assert_eq!(o.imbalance(), -8);
        assert_eq!(e.classify(rho).tag, Phase::EvenPhase);
        assert_eq!(o.classify(rho).tag, Phase::OddPhase);
        assert!(is_independent(&t, &e.zero_set()));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let t = t42();
        let c = Coloring::validate(&t, &single_zero(&t)).unwrap();
        let back = Coloring::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let bad = r#"{"L": 4, "d": 1, "colors": [0, 0, 1, 2]}"#;
        assert!(matches!(Coloring::from_json(bad), Err(ColoringError::Improper { .. })));
        let odd_side = r#"{"L": 3, "d": 1, "colors": [0, 1, 2]}"#;
        assert!(matches!(Coloring::from_json(odd_side), Err(ColoringError::Torus(_))));
    }

    #[test]
    fn packed_round_trip() {
        let raw: Vec<u8> = (0..77).map(|i| (i * 7 % 3) as u8).collect();
        assert_eq!(PackedColors::from_slice(&raw).to_vec(), raw);
    }
}
