//! Surgery inside a zero-free cutset: the shift maps `χ ↦ χ^s_S`, their
//! inverse, the flow weights `ν`, approximations with their uncertainty sets
//! `Q`, the direction rule, good triples and the bound `B(K′, L′)`.
//!
//! Everything is phrased for a cutset of parity `P`. The "inner" class is `P`
//! and the "outer" class is the other one, so for an even cutset `A^inner` is
//! `A^E`, `Q^inner` is `Q^E` and so on. The shift acts on `W = V \ C`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::coloring::{first_monochromatic_edge, Coloring, PackedColors};
use crate::cutset::{verify_properties, Cutset, Property, Witness};
use crate::torus::{Direction, Edge, Parity, Torus, VertexSet};

/// Largest `|U|` for which every `L ⊆ U` is tried in the good-triple search.
pub const MAX_TRIPLE_SEARCH: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PeierlsError {
    #[error("cutset fails {property:?} at {witness:?}")]
    Precondition { property: Property, witness: Option<Witness> },
    #[error("vertex {0} of S is not in W^s")]
    NotInWs(usize),
    #[error("result is improper at edge {0:?}")]
    Improper(Edge),
    #[error("coloring is not an image of the shift map (differs at vertex {0})")]
    NotInImage(usize),
    #[error("|U| = {0} exceeds the search limit")]
    SearchTooLarge(usize),
}

/// The transposition of colors `1` and `2`, fixing `0`.
pub fn f(c: u8) -> u8 {
    crate::coloring::swap_nonzero(c)
}

/// `W^s = {x ∈ ∂_int W : σ_{−s}(x) ∉ W}`.
pub fn w_s(torus: &Torus, w: &VertexSet, s: Direction) -> VertexSet {
    let back = s.reverse();
    torus.vertex_set(
        torus
            .interior_boundary(w)
            .iter()
            .filter(|&x| !w.contains(torus.neighbor(x, back))),
    )
}

/// `(A^inner, A^outer)` together with the derived uncertainty sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Approximation {
    pub parity: Parity,
    pub a_inner: VertexSet,
    pub a_outer: VertexSet,
    /// `A^inner ∩ ∂_ext(outer \ A^outer)`.
    pub q_inner: VertexSet,
    /// `(outer \ A^outer) ∩ ∂_ext A^inner`.
    pub q_outer: VertexSet,
}

impl Approximation {
    pub fn new(torus: &Torus, parity: Parity, a_inner: VertexSet, a_outer: VertexSet) -> Approximation {
        let outer_rest = torus.class(parity.flip()).difference(&a_outer);
        let q_inner = a_inner.intersection(&torus.exterior_boundary(&outer_rest));
        let q_outer = outer_rest.intersection(&torus.exterior_boundary(&a_inner));
        Approximation {
            parity,
            a_inner,
            a_outer,
            q_inner,
            q_outer,
        }
    }

    /// `A = (W^inner, W^outer)`.
    pub fn exact(torus: &Torus, cs: &Cutset) -> Approximation {
        Approximation::new(
            torus,
            cs.parity,
            torus.part(&cs.w, cs.parity),
            torus.part(&cs.w, cs.parity.flip()),
        )
    }

    /// Edges of the bipartite graph between `Q^inner` and `Q^outer`.
    pub fn q_edges(&self, torus: &Torus) -> Vec<(usize, usize)> {
        self.q_inner
            .iter()
            .flat_map(|x| {
                torus
                    .neighbors(x)
                    .filter(|&y| self.q_outer.contains(y))
                    .map(move |y| (x, y))
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

/// `2d − deg ≤ √d`, decided exactly.
fn degree_ok(torus: &Torus, deg: usize) -> bool {
    let gap = torus.degree() - deg;
    gap * gap <= torus.dim()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApproximationCheck {
    pub inner_covers_w: bool,
    pub outer_within_w: bool,
    /// A vertex of `A^inner` with too few neighbors in `A^outer`.
    pub inner_degree_witness: Option<usize>,
    /// A vertex of `outer \ A^outer` with too few neighbors in `inner \ A^inner`.
    pub outer_degree_witness: Option<usize>,
}

impl ApproximationCheck {
    pub fn holds(&self) -> bool {
        self.inner_covers_w && self.outer_within_w && self.inner_degree_witness.is_none() && self.outer_degree_witness.is_none()
    }
}

pub fn check_approximation(torus: &Torus, a: &Approximation, cs: &Cutset) -> ApproximationCheck {
    let inner = torus.class(cs.parity);
    let outer = torus.class(cs.parity.flip());
    let inner_rest = inner.difference(&a.a_inner);
    ApproximationCheck {
        inner_covers_w: a.parity == cs.parity && cs.w.intersection(&inner).is_subset(&a.a_inner) && a.a_inner.is_subset(&inner),
        outer_within_w: a.a_outer.is_subset(&cs.w.intersection(&outer)),
        inner_degree_witness: a
            .a_inner
            .iter()
            .find(|&x| !degree_ok(torus, torus.degree_in(x, &a.a_outer))),
        outer_degree_witness: outer
            .difference(&a.a_outer)
            .iter()
            .find(|&y| !degree_ok(torus, torus.degree_in(y, &inner_rest))),
    }
}

pub fn is_approximation(torus: &Torus, a: &Approximation, cs: &Cutset) -> bool {
    check_approximation(torus, a, cs).holds()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DirectionStat {
    pub s: Direction,
    pub w_s: usize,
    /// `|σ_s(Q^inner) ∩ Q^outer|`.
    pub overlap: usize,
    /// `|W^s| ≥ 0.8 (w_outer − w_inner)`.
    pub size_ok: bool,
    /// `overlap ≤ 5 |W^s| / √d`.
    pub overlap_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DirectionChoice {
    pub s: Direction,
    pub met_conditions: bool,
    pub diagnostics: Vec<DirectionStat>,
}

/// The first direction in the order `+1, −1, +2, …` meeting both conditions,
/// else the first one maximizing `|W^s|`.
pub fn choose_direction(torus: &Torus, cs: &Cutset, a: &Approximation) -> DirectionChoice {
    let excess = cs.w_outer() as i64 - cs.w_inner() as i64;
    let d = torus.dim() as i64;
    let diagnostics: Vec<DirectionStat> = torus
        .directions()
        .into_iter()
        .map(|s| {
            let ws = w_s(torus, &cs.w, s).len() as i64;
            let overlap = torus.shift(&a.q_inner, s).intersection(&a.q_outer).len() as i64;
            DirectionStat {
                s,
                w_s: ws as usize,
                overlap: overlap as usize,
                size_ok: 5 * ws >= 4 * excess,
                overlap_ok: overlap * overlap * d <= 25 * ws * ws,
            }
        })
        .collect();
    let chosen = diagnostics.iter().find(|st| st.size_ok && st.overlap_ok);
    let (s, met) = match chosen {
        Some(st) => (st.s, true),
        None => {
            let best = diagnostics.iter().map(|st| st.w_s).max().unwrap_or(0);
            (diagnostics.iter().find(|st| st.w_s == best).expect("2d ≥ 2 directions").s, false)
        }
    };
    DirectionChoice {
        s,
        met_conditions: met,
        diagnostics,
    }
}

/// A coloring, one of its cutsets and a direction, with the flow split
/// `C = W^s ∩ A^outer ∩ σ_s(Q^inner)`, `D = W^s \ C`.
#[derive(Debug, Clone)]
pub struct ShiftContext {
    pub chi: Coloring,
    pub w: VertexSet,
    pub s: Direction,
    pub w_s: VertexSet,
    pub c: VertexSet,
    pub d: VertexSet,
}

impl ShiftContext {
    /// Requires the boundary-parity and zero-freeness properties of `cs`,
    /// which are what make every shifted coloring proper.
    pub fn new(chi: &Coloring, cs: &Cutset, s: Direction, a: &Approximation) -> Result<ShiftContext, PeierlsError> {
        let torus = chi.torus();
        let report = verify_properties(torus, cs, &chi.zero_set());
        for property in [Property::BoundaryParity, Property::ZeroFree] {
            if !report.passed(property) {
                let witness = report.checks.iter().find(|c| c.property == property).and_then(|c| c.witness.clone());
                return Err(PeierlsError::Precondition { property, witness });
            }
        }
        let ws = w_s(torus, &cs.w, s);
        let c = ws.intersection(&a.a_outer).intersection(&torus.shift(&a.q_inner, s));
        let d = ws.difference(&c);
        Ok(ShiftContext {
            chi: chi.clone(),
            w: cs.w.clone(),
            s,
            w_s: ws,
            c,
            d,
        })
    }

    pub fn torus(&self) -> &Torus {
        self.chi.torus()
    }

    /// Subsets of `W^s` indexed by the bits of `mask` over `W^s` in increasing order.
    pub fn subset(&self, mask: u64) -> VertexSet {
        self.torus().vertex_set(
            self.w_s
                .iter()
                .enumerate()
                .filter(|(i, _)| *i < 64 && mask >> i & 1 == 1)
                .map(|(_, v)| v),
        )
    }
}

/// `χ^s_S`: `0` on `S`, `χ` on `(W^s \ S) ∪ (V \ W)` and `f(χ(σ_{−s}(v)))`
/// on `W \ W^s`.
pub fn shift_coloring(ctx: &ShiftContext, s_set: &VertexSet) -> Result<Coloring, PeierlsError> {
    if let Some(v) = s_set.difference(&ctx.w_s).first() {
        return Err(PeierlsError::NotInWs(v));
    }
    let torus = ctx.torus();
    let back = ctx.s.reverse();
    let mut colors = PackedColors::zeros(torus.len());
    for v in 0..torus.len() {
        let c = if s_set.contains(v) {
            0
        } else if ctx.w_s.contains(v) || !ctx.w.contains(v) {
            ctx.chi.color(v)
        } else {
            f(ctx.chi.color(torus.neighbor(v, back)))
        };
        colors.set(v, c);
    }
    if let Some(e) = first_monochromatic_edge(torus, &colors) {
        return Err(PeierlsError::Improper(e));
    }
    Ok(Coloring::from_packed_unchecked(torus, colors))
}

/// `χ` from `χ′`: `χ′` off `W` and `f(χ′(σ_s(v)))` on `W`.
pub fn reconstruct(chi_prime: &Coloring, w: &VertexSet, s: Direction) -> Result<Coloring, PeierlsError> {
    let torus = chi_prime.torus();
    let mut colors = chi_prime.packed().clone();
    for v in w.iter() {
        colors.set(v, f(chi_prime.color(torus.neighbor(v, s))));
    }
    if let Some(e) = first_monochromatic_edge(torus, &colors) {
        return Err(PeierlsError::Improper(e));
    }
    Ok(Coloring::from_packed_unchecked(torus, colors))
}

fn power(base: u64, exp: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(base).pow(exp as u32))
}

/// `ν(χ, χ′) = (1/4)^{|C ∩ I′|} (3/4)^{|C \ I′|} (1/2)^{|D|}` for an image `χ′`.
pub fn flow_weight(ctx: &ShiftContext, chi_prime: &Coloring) -> Result<BigRational, PeierlsError> {
    let zeros = chi_prime.zero_set();
    let expected = shift_coloring(ctx, &ctx.w_s.intersection(&zeros))?;
    if let Some(v) = (0..expected.torus().len()).find(|&v| expected.color(v) != chi_prime.color(v)) {
        return Err(PeierlsError::NotInImage(v));
    }
    let hit = ctx.c.intersection(&zeros).len();
    let miss = ctx.c.len() - hit;
    Ok(power(3, miss) / (power(4, hit + miss) * power(2, ctx.d.len())))
}

/// `U = Q^inner ∩ σ_{−s}(I(χ′))`.
pub fn u_set(torus: &Torus, a: &Approximation, chi_prime: &Coloring, s: Direction) -> VertexSet {
    a.q_inner.intersection(&torus.shift(&chi_prime.zero_set(), s.reverse()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub k: VertexSet,
    pub l: VertexSet,
    pub m: VertexSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Goodness {
    /// `K ∪ L ∪ M` covers every edge between `Q^inner` and `Q^outer`.
    pub cover: bool,
    /// No vertex can be dropped from the cover.
    pub minimal: bool,
    /// `K ⊆ Q^outer`, `L ⊆ U`, `M ⊆ Q^inner \ U`.
    pub containment: bool,
    /// `K = ∂_ext(U \ L) ∩ Q^outer`.
    pub k_rule: bool,
}

impl Goodness {
    pub fn is_good(&self) -> bool {
        self.cover && self.minimal && self.containment && self.k_rule
    }
}

fn k_of(torus: &Torus, a: &Approximation, u: &VertexSet, l: &VertexSet) -> VertexSet {
    torus.exterior_boundary(&u.difference(l)).intersection(&a.q_outer)
}

pub fn goodness(torus: &Torus, a: &Approximation, u: &VertexSet, t: &Triple) -> Goodness {
    let cover_set = t.k.union(&t.l).union(&t.m);
    let edges = a.q_edges(torus);
    let cover = edges.iter().all(|&(x, y)| cover_set.contains(x) || cover_set.contains(y));
    // each cover vertex needs an edge whose other end is uncovered
    let minimal = cover
        && cover_set.iter().all(|z| {
            edges
                .iter()
                .any(|&(x, y)| (x == z && !cover_set.contains(y)) || (y == z && !cover_set.contains(x)))
        });
    Goodness {
        cover,
        minimal,
        containment: t.k.is_subset(&a.q_outer) && t.l.is_subset(u) && t.m.is_subset(&a.q_inner.difference(u)),
        k_rule: t.k == k_of(torus, a, u, &t.l),
    }
}

/// `(K̂, L̂, M̂) = (W ∩ Q^outer, U \ W, (Q^inner \ U) \ W)`.
pub fn hat_triple(torus: &Torus, w: &VertexSet, a: &Approximation, u: &VertexSet) -> (Triple, Goodness) {
    let t = Triple {
        k: w.intersection(&a.q_outer),
        l: u.difference(w),
        m: a.q_inner.difference(u).difference(w),
    };
    let g = goodness(torus, a, u, &t);
    (t, g)
}

/// Search order: `|K| + |L|`, then sorted `K`, then sorted `L`.
type TripleKey = (usize, Vec<usize>, Vec<usize>);

/// A good triple with `|K| + |L|` least, ties broken lexicographically on
/// the sorted vertex lists of `K` then `L`. Every `L ⊆ U` is tried; `K` is
/// then determined and `M` is forced to the vertices of `Q^inner \ U` with a
/// neighbor in `Q^outer \ K`.
pub fn least_good_triple(torus: &Torus, a: &Approximation, u: &VertexSet) -> Result<Option<Triple>, PeierlsError> {
    let us = u.to_vec();
    if us.len() > MAX_TRIPLE_SEARCH {
        return Err(PeierlsError::SearchTooLarge(us.len()));
    }
    let free = a.q_inner.difference(u);
    let mut best: Option<(TripleKey, Triple)> = None;
    for mask in 0u32..(1 << us.len()) {
        let l = torus.vertex_set(us.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v));
        let k = k_of(torus, a, u, &l);
        let open = a.q_outer.difference(&k);
        let m = torus.vertex_set(free.iter().filter(|&x| torus.neighbors(x).any(|y| open.contains(y))));
        let t = Triple { k, l, m };
        if !goodness(torus, a, u, &t).is_good() {
            continue;
        }
        let key = (t.k.len() + t.l.len(), t.k.to_vec(), t.l.to_vec());
        if best.as_ref().is_none_or(|(b, _)| key < *b) {
            best = Some((key, t));
        }
    }
    Ok(best.map(|(_, t)| t))
}

/// Size of a minimum vertex cover of the `Q` bipartite graph, equal to the
/// size of a maximum matching.
pub fn minimum_cover_size(torus: &Torus, a: &Approximation) -> usize {
    let left = a.q_inner.to_vec();
    let right = a.q_outer.to_vec();
    let adj: Vec<Vec<usize>> = left
        .iter()
        .map(|&x| (0..right.len()).filter(|&j| torus.are_adjacent(x, right[j])).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; right.len()];
    fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, adj, owner, seen)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    (0..left.len())
        .filter(|&i| augment(i, &adj, &mut owner, &mut vec![false; right.len()]))
        .count()
}

/// `K̂` as recovered from `(K₀, K′, L′)`: `(K₀ \ K′) ∪ (∂_ext L′ ∩ Q^outer)`.
pub fn recovered_k_hat(torus: &Torus, a: &Approximation, k0: &VertexSet, k_prime: &VertexSet, l_prime: &VertexSet) -> VertexSet {
    k0.difference(k_prime)
        .union(&torus.exterior_boundary(l_prime).intersection(&a.q_outer))
}

/// A nonnegative number `q · √3^e` with `q` rational and `e ∈ {0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surd {
    pub rational: BigRational,
    pub root3: bool,
}

impl Surd {
    pub fn rational(q: BigRational) -> Surd {
        Surd { rational: q, root3: false }
    }

    /// `(√3/2)^m`.
    pub fn half_root3_pow(m: usize) -> Surd {
        Surd {
            rational: power(3, m / 2) / power(2, m),
            root3: m % 2 == 1,
        }
    }

    pub fn square(&self) -> BigRational {
        let sq = &self.rational * &self.rational;
        if self.root3 {
            sq * BigRational::from_integer(3.into())
        } else {
            sq
        }
    }

    pub fn to_f64(&self) -> f64 {
        let q = self.rational.to_f64().unwrap_or(f64::NAN);
        if self.root3 {
            q * 3f64.sqrt()
        } else {
            q
        }
    }

    pub fn scale(&self, q: &BigRational) -> Surd {
        Surd {
            rational: &self.rational * q,
            root3: self.root3,
        }
    }

    /// Sum of two surds of the same kind.
    pub fn checked_add(&self, other: &Surd) -> Option<Surd> {
        if self.rational.is_zero() {
            return Some(other.clone());
        }
        if other.rational.is_zero() {
            return Some(self.clone());
        }
        (self.root3 == other.root3).then(|| Surd {
            rational: &self.rational + &other.rational,
            root3: self.root3,
        })
    }

    /// Order of two nonnegative surds, through their squares.
    pub fn cmp_nonneg(&self, other: &Surd) -> Ordering {
        self.square().cmp(&other.square())
    }
}

/// `B(K′, L′) = (√3/2)^{w_o − w_e} · 2^{|K₀|} / (3^{|K₀|+|L₀|} · 2^{|K′|−|L′|})`,
/// with `w_o ≥ w_e` the outer and inner class counts of `W`.
pub fn b_weight(w_inner: usize, w_outer: usize, k0: usize, l0: usize, k_prime: usize, l_prime: usize) -> Surd {
    assert!(w_outer >= w_inner, "B(K′, L′) needs w_outer ≥ w_inner");
    let q = power(2, k0 + l_prime) / (power(3, k0 + l0) * power(2, k_prime));
    Surd::half_root3_pow(w_outer - w_inner).scale(&q)
}

/// `Σ_{K′ ⊆ K₀, L′ ⊆ L₀} B(K′, L′)` by summing over subset sizes with
/// binomial multiplicities.
pub fn b_weight_total(w_inner: usize, w_outer: usize, k0: usize, l0: usize) -> Surd {
    let mut total = Surd::rational(BigRational::zero());
    let binom = |n: usize, k: usize| -> BigRational {
        let mut b = BigInt::one();
        for i in 0..k {
            b = b * BigInt::from(n - i) / BigInt::from(i + 1);
        }
        BigRational::from_integer(b)
    };
    for kp in 0..=k0 {
        for lp in 0..=l0 {
            let term = b_weight(w_inner, w_outer, k0, l0, kp, lp).scale(&(binom(k0, kp) * binom(l0, lp)));
            total = total.checked_add(&term).expect("terms share the √3 factor");
        }
    }
    total
}
