//! The even discrete torus `T_{L,d} = {0..L-1}^d` with nearest-neighbor
//! adjacency mod `L`, its even/odd bipartition, and the vertex-set operators
//! used throughout the crate (edge boundary, inner/outer vertex boundary,
//! closure, star boundary, coordinate shifts, components).
//!
//! Vertices are indexed row-major: the first coordinate is the most
//! significant digit in base `L`. This bijection is part of every file format
//! the crate reads or writes.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest vertex count accepted by [`Torus::new`].
pub const DEFAULT_VERTEX_BUDGET: usize = 1 << 26;

/// Neighbor tables are materialized only below this many entries.
const NEIGHBOR_TABLE_LIMIT: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TorusError {
    #[error("L must be even ≥ 4 (got {0})")]
    InvalidSide(usize),
    #[error("d must be ≥ 1 (got {0})")]
    InvalidDimension(usize),
    #[error("T_{{{side},{dim}}} exceeds the vertex budget of {budget}")]
    OverBudget {
        side: usize,
        dim: usize,
        budget: usize,
    },
    #[error("direction {dir} is not one of ±1..=±{dim}")]
    InvalidDirection { dir: i32, dim: usize },
    #[error("vertex set meets both parity classes")]
    MixedParity,
    #[error("vertex set has universe {found}, torus has {expected} vertices")]
    UniverseMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => f.write_str("even"),
            Parity::Odd => f.write_str("odd"),
        }
    }
}

/// A signed coordinate direction `s ∈ {±1, …, ±d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i32", try_from = "i32")]
pub struct Direction(i32);

impl Direction {
    pub fn new(s: i32, dim: usize) -> Result<Direction, TorusError> {
        if s == 0 || s.unsigned_abs() as usize > dim {
            return Err(TorusError::InvalidDirection { dir: s, dim });
        }
        Ok(Direction(s))
    }

    /// All `2d` directions in the order `+1, -1, +2, -2, …`.
    pub fn all(dim: usize) -> Vec<Direction> {
        (1..=dim as i32).flat_map(|a| [Direction(a), Direction(-a)]).collect()
    }

    pub fn value(self) -> i32 {
        self.0
    }

    /// Zero-based coordinate axis.
    pub fn axis(self) -> usize {
        self.0.unsigned_abs() as usize - 1
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn reverse(self) -> Direction {
        Direction(-self.0)
    }

    /// Position in [`Direction::all`].
    pub fn slot(self) -> usize {
        2 * self.axis() + usize::from(self.0 < 0)
    }
}

impl From<Direction> for i32 {
    fn from(d: Direction) -> i32 {
        d.0
    }
}

impl TryFrom<i32> for Direction {
    type Error = TorusError;

    fn try_from(s: i32) -> Result<Self, Self::Error> {
        if s == 0 {
            return Err(TorusError::InvalidDirection { dir: 0, dim: 0 });
        }
        Ok(Direction(s))
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.0)
    }
}

/// An edge, identified by its smaller endpoint and the direction leading to
/// the other endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub dir: Direction,
}

impl PartialOrd for Direction {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Direction {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.slot().cmp(&other.slot())
    }
}

impl Edge {
    pub fn head(&self, torus: &Torus) -> usize {
        torus.neighbor(self.tail, self.dir)
    }
}

/// Dense vertex subset of a fixed torus.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VertexSet {
    bits: FixedBitSet,
}

impl VertexSet {
    pub fn empty(universe: usize) -> VertexSet {
        VertexSet {
            bits: FixedBitSet::with_capacity(universe),
        }
    }

    pub fn full(universe: usize) -> VertexSet {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        VertexSet { bits }
    }

    pub fn from_vertices<I: IntoIterator<Item = usize>>(universe: usize, vertices: I) -> VertexSet {
        let mut set = VertexSet::empty(universe);
        for v in vertices {
            set.insert(v);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    /// Cardinality.
    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.bits.contains(v)
    }

    pub fn insert(&mut self, v: usize) {
        self.bits.insert(v);
    }

    pub fn remove(&mut self, v: usize) {
        self.bits.set(v, false);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<usize> {
        self.bits.minimum()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        VertexSet { bits }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        VertexSet { bits }
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        VertexSet { bits }
    }

    pub fn complement(&self) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        VertexSet { bits }
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }
}

/// Boundary data of a vertex set `X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundary {
    /// `∇(X)`: one entry per edge with exactly one end in `X`, sorted.
    pub edges: Vec<Edge>,
    /// `∂_int X`.
    pub interior: VertexSet,
    /// `∂_ext X`.
    pub exterior: VertexSet,
    /// `X⁺ = X ∪ ∂_ext X`.
    pub closure: VertexSet,
}

/// The graph `T_{L,d}`. Immutable; clones share the neighbor table.
#[derive(Clone)]
pub struct Torus {
    side: usize,
    dim: usize,
    len: usize,
    strides: Vec<usize>,
    odd: Arc<FixedBitSet>,
    table: Option<Arc<[u32]>>,
}

impl fmt::Debug for Torus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T_{{{},{}}}", self.side, self.dim)
    }
}

impl PartialEq for Torus {
    fn eq(&self, other: &Self) -> bool {
        self.side == other.side && self.dim == other.dim
    }
}

impl Eq for Torus {}

impl Torus {
    pub fn new(side: usize, dim: usize) -> Result<Torus, TorusError> {
        Torus::with_budget(side, dim, DEFAULT_VERTEX_BUDGET)
    }

    pub fn with_budget(side: usize, dim: usize, budget: usize) -> Result<Torus, TorusError> {
        if side < 4 || !side.is_multiple_of(2) {
            return Err(TorusError::InvalidSide(side));
        }
        if dim == 0 {
            return Err(TorusError::InvalidDimension(dim));
        }
        let over = TorusError::OverBudget { side, dim, budget };
        let len = (0..dim)
            .try_fold(1usize, |acc, _| acc.checked_mul(side))
            .ok_or_else(|| over.clone())?;
        if len > budget {
            return Err(over);
        }
        let mut strides = vec![1usize; dim];
        for axis in (0..dim.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * side;
        }
        let mut torus = Torus {
            side,
            dim,
            len,
            strides,
            odd: Arc::new(FixedBitSet::new()),
            table: None,
        };
        let mut odd = FixedBitSet::with_capacity(len);
        for v in 0..len {
            let sum: usize = (0..dim).map(|a| torus.coord(v, a)).sum();
            if sum % 2 == 1 {
                odd.insert(v);
            }
        }
        torus.odd = Arc::new(odd);
        if len * 2 * dim <= NEIGHBOR_TABLE_LIMIT {
            let mut table = Vec::with_capacity(len * 2 * dim);
            for v in 0..len {
                for dir in Direction::all(dim) {
                    table.push(torus.compute_neighbor(v, dir) as u32);
                }
            }
            torus.table = Some(table.into());
        }
        Ok(torus)
    }

    /// Side length `L`.
    pub fn side(&self) -> usize {
        self.side
    }

    /// Dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vertices `L^d`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn degree(&self) -> usize {
        2 * self.dim
    }

    /// Number of edges `d·L^d`.
    pub fn edge_count(&self) -> usize {
        self.dim * self.len
    }

    pub fn direction(&self, s: i32) -> Result<Direction, TorusError> {
        Direction::new(s, self.dim)
    }

    pub fn directions(&self) -> Vec<Direction> {
        Direction::all(self.dim)
    }

    #[inline]
    pub fn coord(&self, v: usize, axis: usize) -> usize {
        (v / self.strides[axis]) % self.side
    }

    pub fn coords(&self, v: usize) -> Vec<usize> {
        (0..self.dim).map(|a| self.coord(v, a)).collect()
    }

    /// Row-major index of a coordinate vector (entries reduced mod `L`).
    pub fn index(&self, coords: &[usize]) -> usize {
        assert_eq!(coords.len(), self.dim, "coordinate vector has wrong dimension");
        coords
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| (c % self.side) * s)
            .sum()
    }

    #[inline]
    pub fn parity(&self, v: usize) -> Parity {
        if self.odd.contains(v) {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    #[inline]
    pub fn is_even(&self, v: usize) -> bool {
        !self.odd.contains(v)
    }

    fn compute_neighbor(&self, v: usize, dir: Direction) -> usize {
        let stride = self.strides[dir.axis()];
        let c = (v / stride) % self.side;
        if dir.is_positive() {
            if c + 1 == self.side {
                v - (self.side - 1) * stride
            } else {
                v + stride
            }
        } else if c == 0 {
            v + (self.side - 1) * stride
        } else {
            v - stride
        }
    }

    /// `σ_s(v) = v + e_s`.
    #[inline]
    pub fn neighbor(&self, v: usize, dir: Direction) -> usize {
        match &self.table {
            Some(t) => t[v * 2 * self.dim + dir.slot()] as usize,
            None => self.compute_neighbor(v, dir),
        }
    }

    /// Neighbor in slot `k` of [`Direction::all`].
    #[inline]
    pub fn neighbor_slot(&self, v: usize, k: usize) -> usize {
        match &self.table {
            Some(t) => t[v * 2 * self.dim + k] as usize,
            None => {
                let a = (k / 2 + 1) as i32;
                self.compute_neighbor(v, Direction(if k.is_multiple_of(2) { a } else { -a }))
            }
        }
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..2 * self.dim).map(move |k| self.neighbor_slot(v, k))
    }

    pub fn are_adjacent(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).any(|w| w == v)
    }

    /// Canonical edge between adjacent `u` and `v`.
    pub fn edge(&self, u: usize, v: usize) -> Option<Edge> {
        let (tail, head) = if u < v { (u, v) } else { (v, u) };
        self.directions()
            .into_iter()
            .find(|&dir| self.neighbor(tail, dir) == head)
            .map(|dir| Edge { tail, dir })
    }

    /// Coordinatewise sum `u + v` mod `L`.
    pub fn translate(&self, u: usize, by: usize) -> usize {
        (0..self.dim)
            .map(|a| ((self.coord(u, a) + self.coord(by, a)) % self.side) * self.strides[a])
            .sum()
    }

    /// Reflection `x_axis ↦ -x_axis` mod `L`.
    pub fn reflect(&self, v: usize, axis: usize) -> usize {
        let c = self.coord(v, axis);
        let r = (self.side - c) % self.side;
        v - c * self.strides[axis] + r * self.strides[axis]
    }

    /// Exchange coordinates `a` and `b`.
    pub fn swap_axes(&self, v: usize, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coord(v, a), self.coord(v, b));
        v - ca * self.strides[a] - cb * self.strides[b] + cb * self.strides[a] + ca * self.strides[b]
    }

    pub fn empty_set(&self) -> VertexSet {
        VertexSet::empty(self.len)
    }

    pub fn full_set(&self) -> VertexSet {
        VertexSet::full(self.len)
    }

    pub fn vertex_set<I: IntoIterator<Item = usize>>(&self, vertices: I) -> VertexSet {
        VertexSet::from_vertices(self.len, vertices)
    }

    pub fn class(&self, parity: Parity) -> VertexSet {
        let odd = VertexSet {
            bits: (*self.odd).clone(),
        };
        match parity {
            Parity::Odd => odd,
            Parity::Even => odd.complement(),
        }
    }

    /// `X ∩ E` or `X ∩ O`.
    pub fn part(&self, x: &VertexSet, parity: Parity) -> VertexSet {
        x.intersection(&self.class(parity))
    }

    pub fn check_universe(&self, x: &VertexSet) -> Result<(), TorusError> {
        if x.universe() != self.len {
            return Err(TorusError::UniverseMismatch {
                expected: self.len,
                found: x.universe(),
            });
        }
        Ok(())
    }

    /// Number of neighbors of `v` lying in `x`.
    pub fn degree_in(&self, v: usize, x: &VertexSet) -> usize {
        self.neighbors(v).filter(|&u| x.contains(u)).count()
    }

    /// `∇(X)`, sorted canonically.
    pub fn edge_boundary(&self, x: &VertexSet) -> Vec<Edge> {
        let mut edges = Vec::new();
        for v in x.iter() {
            for u in self.neighbors(v) {
                if !x.contains(u) {
                    edges.push(self.edge(v, u).expect("neighbors are adjacent"));
                }
            }
        }
        edges.sort_unstable();
        edges
    }

    /// `∂_int X`.
    pub fn interior_boundary(&self, x: &VertexSet) -> VertexSet {
        let mut out = self.empty_set();
        for v in x.iter() {
            if self.neighbors(v).any(|u| !x.contains(u)) {
                out.insert(v);
            }
        }
        out
    }

    /// `∂_ext X`.
    pub fn exterior_boundary(&self, x: &VertexSet) -> VertexSet {
        let mut out = self.empty_set();
        for v in x.iter() {
            for u in self.neighbors(v) {
                if !x.contains(u) {
                    out.insert(u);
                }
            }
        }
        out
    }

    /// `X⁺ = X ∪ ∂_ext X`.
    pub fn closure(&self, x: &VertexSet) -> VertexSet {
        x.union(&self.exterior_boundary(x))
    }

    pub fn boundary(&self, x: &VertexSet) -> Boundary {
        let exterior = self.exterior_boundary(x);
        Boundary {
            edges: self.edge_boundary(x),
            interior: self.interior_boundary(x),
            closure: x.union(&exterior),
            exterior,
        }
    }

    /// `∂★T = {x : ∂x ⊆ T}` for `T` inside a single parity class.
    pub fn star_boundary(&self, t: &VertexSet) -> Result<VertexSet, TorusError> {
        self.check_universe(t)?;
        let has_even = !self.part(t, Parity::Even).is_empty();
        let has_odd = !self.part(t, Parity::Odd).is_empty();
        if has_even && has_odd {
            return Err(TorusError::MixedParity);
        }
        let mut out = self.empty_set();
        for x in self.exterior_boundary(t).iter() {
            if self.neighbors(x).all(|u| t.contains(u)) {
                out.insert(x);
            }
        }
        Ok(out)
    }

    /// `σ_s(X) = {x + e_s : x ∈ X}`.
    pub fn shift(&self, x: &VertexSet, dir: Direction) -> VertexSet {
        let mut out = self.empty_set();
        for v in x.iter() {
            out.insert(self.neighbor(v, dir));
        }
        out
    }

    /// Connected components of the subgraph induced by `x`, ordered by their
    /// smallest vertex.
    pub fn components(&self, x: &VertexSet) -> Vec<VertexSet> {
        let mut seen = self.empty_set();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in x.iter() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = self.empty_set();
            seen.insert(start);
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                comp.insert(v);
                for u in self.neighbors(v) {
                    if x.contains(u) && !seen.contains(u) {
                        seen.insert(u);
                        queue.push_back(u);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self, x: &VertexSet) -> bool {
        match x.first() {
            None => true,
            Some(_) => self.components(x).len() == 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t42() -> Torus {
        Torus::new(4, 2).unwrap()
    }

    #[test]
    fn cycle_and_square() {
        let c = Torus::new(4, 1).unwrap();
        assert_eq!(c.len(), 4);
        for v in 0..4 {
            let mut n: Vec<_> = c.neighbors(v).collect();
            n.sort();
            let mut want = vec![(v + 1) % 4, (v + 3) % 4];
            want.sort();
            assert_eq!(n, want);
        }
        let t = t42();
        assert_eq!(t.len(), 16);
        assert!((0..16).all(|v| t.neighbors(v).count() == 4));
        assert_eq!(t.class(Parity::Even).len(), 8);
        assert_eq!(t.class(Parity::Odd).len(), 8);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(Torus::new(3, 2), Err(TorusError::InvalidSide(3)));
        assert_eq!(Torus::new(2, 2), Err(TorusError::InvalidSide(2)));
        assert_eq!(Torus::new(4, 0), Err(TorusError::InvalidDimension(0)));
        assert!(matches!(
            Torus::with_budget(8, 3, 100),
            Err(TorusError::OverBudget { .. })
        ));
        assert!(matches!(Torus::new(4, 200), Err(TorusError::OverBudget { .. })));
    }

    #[test]
    fn distinct_neighbors_and_parity() {
        for (l, d) in [(4, 1), (4, 2), (6, 2), (4, 3)] {
            let t = Torus::new(l, d).unwrap();
            for v in 0..t.len() {
                let mut n: Vec<_> = t.neighbors(v).collect();
                n.sort();
                n.dedup();
                assert_eq!(n.len(), 2 * d);
                for u in n {
                    assert_ne!(t.parity(u), t.parity(v));
                    let diff: usize = (0..d)
                        .map(|a| {
                            let (x, y) = (t.coord(u, a), t.coord(v, a));
                            usize::from(x != y)
                        })
                        .sum();
                    assert_eq!(diff, 1);
                }
            }
        }
    }

    #[test]
    fn computed_neighbors_match_table() {
        let t = Torus::new(6, 3).unwrap();
        for v in 0..t.len() {
            for dir in t.directions() {
                assert_eq!(t.neighbor(v, dir), t.compute_neighbor(v, dir));
            }
        }
    }

    #[test]
    fn empty_boundary() {
        let t = t42();
        let b = t.boundary(&t.empty_set());
        assert!(b.edges.is_empty());
        assert!(b.interior.is_empty() && b.exterior.is_empty() && b.closure.is_empty());
    }

    #[test]
    fn single_vertex_boundary() {
        let t = t42();
        let origin = t.index(&[0, 0]);
        let x = t.vertex_set([origin]);
        let b = t.boundary(&x);
        assert_eq!(b.edges.len(), 4);
        let want = t.vertex_set([
            t.index(&[1, 0]),
            t.index(&[3, 0]),
            t.index(&[0, 1]),
            t.index(&[0, 3]),
        ]);
        assert_eq!(b.exterior, want);
        assert_eq!(b.interior, x);
    }

    #[test]
    fn plus_shape_has_twelve_boundary_edges() {
        let t = t42();
        let origin = t.index(&[0, 0]);
        let plus = t.closure(&t.vertex_set([origin]));
        assert_eq!(plus.len(), 5);
        // oracle: count ordered pairs (u in X, w not in X) over raw coordinates
        let mut count = 0;
        for u in plus.iter() {
            let cu = t.coords(u);
            for w in 0..t.len() {
                let cw = t.coords(w);
                let diffs: Vec<usize> = (0..2)
                    .filter(|&a| cu[a] != cw[a])
                    .map(|a| (cu[a] + 4 - cw[a]) % 4)
                    .collect();
                if diffs.len() == 1 && (diffs[0] == 1 || diffs[0] == 3) && !plus.contains(w) {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 12);
        assert_eq!(t.edge_boundary(&plus).len(), 12);
    }

    #[test]
    fn star_boundary_examples() {
        let t = t42();
        let origin = t.index(&[0, 0]);
        assert!(t.star_boundary(&t.vertex_set([origin])).unwrap().is_empty());
        assert_eq!(
            t.star_boundary(&t.class(Parity::Even)).unwrap(),
            t.class(Parity::Odd)
        );
        let ring = t.exterior_boundary(&t.vertex_set([origin]));
        // oracle: a vertex qualifies iff all four of its neighbors are in the ring
        let oracle = t.vertex_set((0..16).filter(|&v| {
            let c = t.coords(v);
            [(1, 0), (3, 0), (0, 1), (0, 3)].iter().all(|&(dx, dy)| {
                ring.contains(t.index(&[(c[0] + dx) % 4, (c[1] + dy) % 4]))
            })
        }));
        let star = t.star_boundary(&ring).unwrap();
        assert_eq!(star, oracle);
        // the antipode's neighbors are disjoint from the ring
        assert_eq!(star, t.vertex_set([origin]));
        let mixed = t.vertex_set([origin, t.index(&[1, 0])]);
        assert_eq!(t.star_boundary(&mixed), Err(TorusError::MixedParity));
    }

    #[test]
    fn shift_examples() {
        let t = t42();
        let x = t.vertex_set([t.index(&[0, 0])]);
        let p1 = t.direction(1).unwrap();
        assert_eq!(t.shift(&x, p1), t.vertex_set([t.index(&[1, 0])]));
        assert_eq!(t.shift(&x, p1.reverse()), t.vertex_set([t.index(&[3, 0])]));
        assert!(t.direction(3).is_err());
        assert!(t.direction(0).is_err());
    }

    #[test]
    fn shifts_are_automorphisms_that_flip_parity() {
        for (l, d) in [(4, 2), (4, 3)] {
            let t = Torus::new(l, d).unwrap();
            for dir in t.directions() {
                assert_eq!(t.shift(&t.class(Parity::Even), dir), t.class(Parity::Odd));
                if d == 2 {
                    for u in 0..t.len() {
                        for v in 0..t.len() {
                            assert_eq!(
                                t.are_adjacent(u, v),
                                t.are_adjacent(t.neighbor(u, dir), t.neighbor(v, dir))
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn components_of_two_blobs() {
        let t = Torus::new(6, 1).unwrap();
        let x = t.vertex_set([0, 1, 3]);
        let comps = t.components(&x);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], t.vertex_set([0, 1]));
        assert!(!t.is_connected(&x));
        assert!(t.is_connected(&t.full_set()));
    }

    #[test]
    fn reflections_and_axis_swaps_preserve_adjacency() {
        let t = Torus::new(4, 3).unwrap();
        for v in 0..t.len() {
            for u in t.neighbors(v).collect::<Vec<_>>() {
                assert!(t.are_adjacent(t.reflect(u, 1), t.reflect(v, 1)));
                assert!(t.are_adjacent(t.swap_axes(u, 0, 2), t.swap_axes(v, 0, 2)));
            }
        }
    }
}
