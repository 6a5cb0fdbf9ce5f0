//! Exact rational locality parameter `ρ ∈ (0, 1]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RhoError {
    #[error("ρ must lie in (0, 1] (got {0})")]
    OutOfRange(String),
    #[error("cannot parse ρ from {0:?}")]
    Parse(String),
}

/// `ρ = num/den` in lowest terms with `0 < num ≤ den`. The endpoint `ρ = 1`
/// is admitted so that the all-balanced limit can be expressed.
///
/// Decimal input such as `"0.22"` is read exactly as `11/50`; a float is read
/// through its shortest round-trip decimal representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RhoRepr", into = "String")]
pub struct Rho {
    num: u64,
    den: u64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RhoRepr {
    Text(String),
    Number(f64),
}

impl TryFrom<RhoRepr> for Rho {
    type Error = RhoError;

    fn try_from(r: RhoRepr) -> Result<Self, Self::Error> {
        match r {
            RhoRepr::Text(s) => s.parse(),
            RhoRepr::Number(x) => Rho::from_f64(x),
        }
    }
}

impl From<Rho> for String {
    fn from(r: Rho) -> String {
        r.to_string()
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rho {
    pub fn new(num: u64, den: u64) -> Result<Rho, RhoError> {
        if den == 0 || num == 0 || num > den {
            return Err(RhoError::OutOfRange(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Rho {
            num: num / g,
            den: den / g,
        })
    }

    pub fn from_f64(x: f64) -> Result<Rho, RhoError> {
        if !x.is_finite() || x <= 0.0 || x > 1.0 {
            return Err(RhoError::OutOfRange(x.to_string()));
        }
        format!("{x}").parse()
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `⌊ρ·n/2⌋`: an imbalance `m` is balanced iff `|m|` is at most this.
    pub fn half_threshold(&self, n: usize) -> i64 {
        ((self.num as u128 * n as u128) / (2 * self.den as u128)) as i64
    }

    /// `⌊ρ·n⌋`, the most vertices a ρ-local move may recolor.
    pub fn max_changes(&self, n: usize) -> usize {
        ((self.num as u128 * n as u128) / self.den as u128) as usize
    }
}

impl fmt::Display for Rho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rho {
    type Err = RhoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || RhoError::Parse(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            return Rho::new(n, d);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if (int.is_empty() && frac.is_empty())
            || !int.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || frac.len() > 18
        {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac_v: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int
            .checked_mul(den)
            .and_then(|x| x.checked_add(frac_v))
            .ok_or_else(bad)?;
        Rho::new(num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions_exactly() {
        assert_eq!("0.22".parse::<Rho>().unwrap(), Rho::new(11, 50).unwrap());
        assert_eq!("11/50".parse::<Rho>().unwrap(), Rho::new(22, 100).unwrap());
        assert_eq!(".5".parse::<Rho>().unwrap(), Rho::new(1, 2).unwrap());
        assert_eq!(Rho::from_f64(0.22).unwrap(), Rho::new(11, 50).unwrap());
        assert_eq!("1.0".parse::<Rho>().unwrap(), Rho::new(1, 1).unwrap());
        assert!("1.5".parse::<Rho>().is_err());
        assert!("0".parse::<Rho>().is_err());
        assert!("abc".parse::<Rho>().is_err());
        assert!("-0.1".parse::<Rho>().is_err());
    }

    #[test]
    fn thresholds_are_floors() {
        let r = Rho::new(11, 50).unwrap();
        // 0.22 * 16 / 2 = 1.76
        assert_eq!(r.half_threshold(16), 1);
        assert_eq!(r.max_changes(16), 3);
        let q = Rho::new(1, 4).unwrap();
        // exactly 2.0 at n = 16 stays balanced
        assert_eq!(q.half_threshold(16), 2);
    }

    #[test]
    fn serde_accepts_string_or_number() {
        let a: Rho = serde_json::from_str("\"0.1\"").unwrap();
        let b: Rho = serde_json::from_str("0.1").unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), "\"1/10\"");
    }
}
