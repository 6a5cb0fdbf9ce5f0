//! Closed-form counting checks: the binary entropy condition `H(ρ) + ρ < 1`,
//! the Chernoff bound on binomial tails, the component count behind the
//! free-choice bound and a census of colorings with few zeros on one side.
//!
//! All logarithms are base 2.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coloring::Phase;
use crate::exactgibbs::StateIndex;
use crate::rho::Rho;
use crate::torus::{Parity, Torus, VertexSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("ρ must lie strictly between 0 and 1 (got {0})")]
    RhoDomain(String),
    #[error("β must lie in (0, 1/2] (got {0})")]
    BetaDomain(String),
    #[error("M must be positive")]
    EmptyTrials,
    #[error("A must lie in the even class and B in the odd class")]
    WrongClass,
    #[error("edge between A and B at {0}-{1}")]
    Adjacent(usize, usize),
}

/// `H(x) = −x log x − (1−x) log(1−x)`, with `H(0) = H(1) = 0`.
pub fn entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyParams {
    pub rho: Rho,
    pub h_of_rho: f64,
    /// `H(ρ) + ρ`.
    pub condition_value: f64,
    pub satisfied: bool,
}

pub fn entropy_condition(rho: Rho) -> Result<EntropyParams, BoundsError> {
    if rho.numer() >= rho.denom() {
        return Err(BoundsError::RhoDomain(rho.to_string()));
    }
    let r = rho.to_f64();
    let h = entropy(r);
    Ok(EntropyParams {
        rho,
        h_of_rho: h,
        condition_value: h + r,
        satisfied: h + r < 1.0,
    })
}

/// The root of `H(x) + x = 1` in `(0, 1/2)` by bisection; `H(x) + x` is
/// increasing there, so the condition holds exactly below the root.
pub fn entropy_threshold(tolerance: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if entropy(mid) + mid < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exponent `ρ + d^{−1/2} + 1/d + H(1/(2√d)) + H(ρ + 1/(2√d))` of the
/// small-class count, to be compared with `1`.
pub fn small_class_exponent(rho: f64, dim: usize) -> f64 {
    let d = dim as f64;
    let e = 1.0 / (2.0 * d.sqrt());
    rho + 1.0 / d.sqrt() + 1.0 / d + entropy(e) + entropy(rho + e)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChernoffCheck {
    pub m: u64,
    pub beta: String,
    /// `⌊βM⌋`.
    pub cutoff: u64,
    /// `Σ_{i ≤ βM} C(M, i)`, exact.
    pub lhs: String,
    /// `2^{H(β) M}`.
    pub rhs: f64,
    pub holds: bool,
}

/// Compares the binomial tail `Σ_{i ≤ ⌊βM⌋} C(M, i)` with `2^{H(β)M}`.
pub fn chernoff_bound_check(m: u64, beta: Ratio<u64>) -> Result<ChernoffCheck, BoundsError> {
    if m == 0 {
        return Err(BoundsError::EmptyTrials);
    }
    if beta.numer().is_zero() || beta > Ratio::new(1, 2) {
        return Err(BoundsError::BetaDomain(beta.to_string()));
    }
    let cutoff = (u128::from(m) * u128::from(*beta.numer()) / u128::from(*beta.denom())) as u64;
    let mut term = BigUint::from(1u32);
    let mut lhs = term.clone();
    for i in 1..=cutoff {
        term = term * BigUint::from(m - i + 1) / BigUint::from(i);
        lhs += &term;
    }
    let b = *beta.numer() as f64 / *beta.denom() as f64;
    let exponent = entropy(b) * m as f64;
    let holds = lhs.bits() <= exponent.floor() as u64 || lhs.to_f64().is_some_and(|x| x.log2() <= exponent);
    Ok(ChernoffCheck {
        m,
        beta: beta.to_string(),
        cutoff,
        lhs: lhs.to_string(),
        rhs: exponent.exp2(),
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompCount {
    /// Components of `V \ (A ∪ B ∪ ∂★A ∪ ∂★B)`.
    pub comp: usize,
    pub star_a: usize,
    pub star_b: usize,
    /// `comp · 2d ≤ L^d`.
    pub holds: bool,
}

fn check_pair(torus: &Torus, a: &VertexSet, b: &VertexSet) -> Result<(), BoundsError> {
    if !a.is_subset(&torus.class(Parity::Even)) || !b.is_subset(&torus.class(Parity::Odd)) {
        return Err(BoundsError::WrongClass);
    }
    for x in a.iter() {
        if let Some(y) = torus.neighbors(x).find(|&y| b.contains(y)) {
            return Err(BoundsError::Adjacent(x, y));
        }
    }
    Ok(())
}

/// Requires `A ⊆ E`, `B ⊆ O` with no edge between them.
pub fn comp_count(torus: &Torus, a: &VertexSet, b: &VertexSet) -> Result<CompCount, BoundsError> {
    check_pair(torus, a, b)?;
    let star_a = torus.star_boundary(a).expect("A lies in one class");
    let star_b = torus.star_boundary(b).expect("B lies in one class");
    let removed = a.union(b).union(&star_a).union(&star_b);
    let comp = torus.components(&removed.complement()).len();
    Ok(CompCount {
        comp,
        star_a: star_a.len(),
        star_b: star_b.len(),
        holds: comp * torus.degree() <= torus.len(),
    })
}

/// `|∂★A| + |∂★B| + comp(A, B)`: once the zero set is `A ∪ B`, each starred
/// vertex and each remaining component has two colorings.
pub fn free_choice_exponent(torus: &Torus, a: &VertexSet, b: &VertexSet) -> Result<usize, BoundsError> {
    let c = comp_count(torus, a, b)?;
    Ok(c.star_a + c.star_b + c.comp)
}

/// A random valid pair: `A` keeps each even vertex with probability `p_a`,
/// then `B` keeps each odd vertex not adjacent to `A` with probability `p_b`.
pub fn random_valid_pair<R: Rng>(torus: &Torus, rng: &mut R, p_a: f64, p_b: f64) -> (VertexSet, VertexSet) {
    let a = torus.vertex_set(torus.class(Parity::Even).iter().filter(|_| rng.gen_bool(p_a)));
    let blocked = torus.exterior_boundary(&a);
    let b = torus.vertex_set(
        torus
            .class(Parity::Odd)
            .iter()
            .filter(|&y| !blocked.contains(y) && rng.gen_bool(p_b)),
    );
    (a, b)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreeChoiceReport {
    pub pairs: usize,
    /// Pairs whose exact coloring count exceeds `2^{exponent}`.
    pub violations: Vec<(Vec<usize>, Vec<usize>)>,
    /// Pairs whose count equals `2^{exponent}`.
    pub tight: usize,
}

/// For every valid `(A, B)` compares the number of enumerated colorings with
/// zero set exactly `A ∪ B` against `2^{|∂★A|+|∂★B|+comp(A,B)}`.
pub fn free_choice_check(idx: &StateIndex) -> FreeChoiceReport {
    let torus = idx.torus();
    let n = torus.len();
    let mut by_zeros: HashMap<u64, u64> = HashMap::new();
    for i in 0..idx.len() {
        let mask = idx
            .colors(i)
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .fold(0u64, |m, (v, _)| m | 1 << v);
        *by_zeros.entry(mask).or_default() += 1;
    }
    let evens = torus.class(Parity::Even).to_vec();
    let odds = torus.class(Parity::Odd).to_vec();
    let mut report = FreeChoiceReport {
        pairs: 0,
        violations: Vec::new(),
        tight: 0,
    };
    for am in 0u64..(1 << evens.len()) {
        let a = torus.vertex_set(evens.iter().enumerate().filter(|(i, _)| am >> i & 1 == 1).map(|(_, &v)| v));
        let blocked = torus.exterior_boundary(&a);
        for bm in 0u64..(1 << odds.len()) {
            let b = torus.vertex_set(odds.iter().enumerate().filter(|(i, _)| bm >> i & 1 == 1).map(|(_, &v)| v));
            if !b.is_disjoint(&blocked) {
                continue;
            }
            report.pairs += 1;
            let e = free_choice_exponent(torus, &a, &b).expect("valid pair");
            let mask = a.union(&b).iter().fold(0u64, |m, v| m | 1 << v);
            let count = by_zeros.get(&mask).copied().unwrap_or(0);
            debug_assert!(n <= 64);
            if e >= 64 || count < 1u64 << e {
                continue;
            }
            if count == 1u64 << e {
                report.tight += 1;
            } else {
                report.violations.push((a.to_vec(), b.to_vec()));
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Census {
    /// Colorings with `min(|I^E|, |I^O|) ≤ L^d / (4√d)`, over all colorings.
    pub small: u64,
    /// The same restricted to balanced colorings.
    pub small_balanced: u64,
    pub total: u64,
    pub balanced_total: u64,
    pub fraction: f64,
    pub balanced_fraction: f64,
}

/// `min ≤ L^d/(4√d)`, decided as `16 · min² · d ≤ (L^d)²`.
pub fn is_small(torus: &Torus, zeros_even: usize, zeros_odd: usize) -> bool {
    let m = zeros_even.min(zeros_odd) as u128;
    let n = torus.len() as u128;
    16 * m * m * torus.dim() as u128 <= n * n
}

pub fn small_class_census(idx: &StateIndex, rho: Rho) -> Census {
    let torus = idx.torus();
    let mut c = Census {
        small: 0,
        small_balanced: 0,
        total: idx.len() as u64,
        balanced_total: 0,
        fraction: 0.0,
        balanced_fraction: 0.0,
    };
    for i in 0..idx.len() {
        let colors = idx.colors(i);
        let ze = (0..colors.len()).filter(|&v| colors[v] == 0 && torus.is_even(v)).count();
        let zo = (0..colors.len()).filter(|&v| colors[v] == 0 && !torus.is_even(v)).count();
        let balanced = idx.phase(i, rho) == Phase::Balanced;
        let small = is_small(torus, ze, zo);
        c.balanced_total += u64::from(balanced);
        c.small += u64::from(small);
        c.small_balanced += u64::from(small && balanced);
    }
    c.fraction = c.small as f64 / c.total.max(1) as f64;
    c.balanced_fraction = c.small_balanced as f64 / c.balanced_total.max(1) as f64;
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgibbs::{enumerate, DEFAULT_STATE_BUDGET};

    fn rho(s: &str) -> Rho {
        s.parse().unwrap()
    }

    #[test]
    fn entropy_basics() {
        assert_eq!(entropy(0.0), 0.0);
        assert_eq!(entropy(1.0), 0.0);
        assert!((entropy(0.5) - 1.0).abs() < 1e-15);
        for x in [0.01, 0.1, 0.22, 0.37] {
            assert!((entropy(x) - entropy(1.0 - x)).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_condition_examples() {
        let p = entropy_condition(rho("0.22")).unwrap();
        assert!(p.satisfied);
        let half = entropy_condition(rho("0.5")).unwrap();
        assert!((half.condition_value - 1.5).abs() < 1e-12);
        assert!(!half.satisfied);
        let tiny = entropy_condition(rho("1/1000000")).unwrap();
        assert!(tiny.condition_value < 1e-4 && tiny.satisfied);
        assert!(entropy_condition(rho("1")).is_err());
    }

    #[test]
    fn threshold_brackets_the_condition() {
        let t = entropy_threshold(1e-12);
        assert!(entropy(t - 1e-9) + t - 1e-9 < 1.0);
        assert!(entropy(t + 1e-9) + t + 1e-9 > 1.0);
        assert!(t > 0.22 && t < 0.23);
    }

    #[test]
    fn chernoff_examples() {
        let c = chernoff_bound_check(10, Ratio::new(1, 5)).unwrap();
        assert_eq!((c.cutoff, c.lhs.as_str()), (2, "56"));
        assert!((c.rhs - 149.0).abs() < 0.1);
        assert!(c.holds);
        let c = chernoff_bound_check(1, Ratio::new(1, 2)).unwrap();
        assert_eq!((c.cutoff, c.lhs.as_str()), (0, "1"));
        assert!((c.rhs - 2.0).abs() < 1e-12);
        assert!(c.holds);
        assert!(chernoff_bound_check(10, Ratio::new(3, 5)).is_err());
        assert!(chernoff_bound_check(0, Ratio::new(1, 5)).is_err());
    }

    #[test]
    fn comp_examples() {
        let t = Torus::new(4, 2).unwrap();
        let origin = t.vertex_set([0]);
        let c = comp_count(&t, &origin, &t.empty_set()).unwrap();
        assert_eq!((c.star_a, c.comp), (0, 1));
        assert!(c.holds);
        let c = comp_count(&t, &t.empty_set(), &t.empty_set()).unwrap();
        assert_eq!(c.comp, 1);
        let one = t.vertex_set([t.index(&[1, 0])]);
        assert_eq!(comp_count(&t, &origin, &one), Err(BoundsError::Adjacent(0, t.index(&[1, 0]))));
        assert_eq!(comp_count(&t, &one, &t.empty_set()), Err(BoundsError::WrongClass));
    }

    #[test]
    fn free_choice_is_exact_on_the_cycle() {
        let idx = enumerate(&Torus::new(4, 1).unwrap(), DEFAULT_STATE_BUDGET).unwrap();
        let r = free_choice_check(&idx);
        assert!(r.violations.is_empty());
        // 4 empty-or-one-sided pairs per side plus the two-sided ones; every
        // zero set is realized with exactly the free-choice multiplicity
        assert_eq!(r.tight, r.pairs);
    }

    #[test]
    fn census_on_cycle() {
        let t = Torus::new(4, 1).unwrap();
        let idx = enumerate(&t, DEFAULT_STATE_BUDGET).unwrap();
        // oracle: threshold L/(4√1) = 1, so min(|I^E|, |I^O|) ≤ 1 is always true on a 4-cycle
        let oracle = (0..idx.len())
            .filter(|&i| {
                let c = idx.colors(i);
                let ze = [0, 2].iter().filter(|&&v| c[v] == 0).count();
                let zo = [1, 3].iter().filter(|&&v| c[v] == 0).count();
                ze.min(zo) <= 1
            })
            .count() as u64;
        let a = small_class_census(&idx, rho("0.1"));
        let b = small_class_census(&idx, rho("0.22"));
        assert_eq!(a.small, oracle);
        assert_eq!(a.small, 18);
        assert_eq!(a.small, b.small);
        assert_eq!(a.total, 18);
    }

    #[test]
    fn zero_free_colorings_are_small() {
        let t = Torus::new(4, 2).unwrap();
        assert!(is_small(&t, 0, 0));
        assert!(is_small(&t, 8, 0));
        // L^d/(4√d) = 16/(4√2) ≈ 2.83
        assert!(is_small(&t, 2, 5));
        assert!(!is_small(&t, 3, 3));
    }
}
