//! Exhaustive ground truth on tiny tori: the full list of proper colorings,
//! exact transition kernels, total-variation mixing times and the conductance
//! lower bound `τ ≥ π(A) / (8 π(M))`.
//!
//! A coloring is encoded as a `u128` with two bits per vertex and vertex `0`
//! in the most significant digit, so numeric order on codes is lexicographic
//! order on color arrays. This limits enumeration to `L^d ≤ 64`.

use std::collections::{BTreeMap, VecDeque};
use std::io::{self, Write};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::coloring::{Coloring, PackedColors, Phase};
use crate::glauber::{validate_spec, ChainError, ChainKind, ChainSpec};
use crate::rho::Rho;
use crate::torus::Torus;

pub const DEFAULT_STATE_BUDGET: u64 = 1_000_000;
pub const DEFAULT_KERNEL_BUDGET: usize = 5_000;
pub const DEFAULT_MIXING_CAP: u64 = 100_000;
/// Largest slice, in vertices, whose colorings the transfer-matrix oracle lists by brute force.
pub const MAX_SLICE_VERTICES: usize = 12;
pub const MAX_SLICE_STATES: usize = 300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("refused: {detail} exceeds the budget of {budget}")]
    OverBudget { budget: u64, detail: String },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("kernel is reducible: state {from} does not communicate with state {to}")]
    Reducible { from: usize, to: usize },
    #[error("kernel is periodic with period {0}")]
    Periodic(u64),
    #[error("worst-start TV is still {tv} after {cap} steps")]
    CapReached { cap: u64, tv: f64 },
    #[error("transition {from} -> {to} leaves A without entering M")]
    HypothesisViolated { from: usize, to: usize },
    #[error("π(A) = {0} exceeds 1/2")]
    LargeA(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("kernel is not invariant under {0}")]
    NotInvariant(String),
    #[error("kernel has {kernel} states but the index has {index}")]
    SizeMismatch { kernel: usize, index: usize },
}

pub fn encode(colors: &[u8]) -> u128 {
    colors.iter().fold(0u128, |acc, &c| (acc << 2) | u128::from(c))
}

pub fn decode(code: u128, n: usize) -> Vec<u8> {
    (0..n).map(|v| color_at(code, n, v)).collect()
}

#[inline]
fn color_at(code: u128, n: usize, v: usize) -> u8 {
    ((code >> (2 * (n - 1 - v))) & 3) as u8
}

#[inline]
fn with_color(code: u128, n: usize, v: usize, c: u8) -> u128 {
    let shift = 2 * (n - 1 - v);
    (code & !(3u128 << shift)) | (u128::from(c) << shift)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PhaseCounts {
    pub balanced: u64,
    pub even: u64,
    pub odd: u64,
}

impl PhaseCounts {
    pub fn total(&self) -> u64 {
        self.balanced + self.even + self.odd
    }
}

/// Every proper coloring of one torus, indexed in lexicographic order.
#[derive(Debug, Clone)]
pub struct StateIndex {
    torus: Torus,
    codes: Vec<u128>,
    imbalances: Vec<i64>,
}

/// Lists all proper colorings by backtracking with forward checking. Refuses
/// up front when the `2^{n/2+1}` ground-state family alone exceeds `budget`,
/// and aborts without a partial result once the count passes it.
pub fn enumerate(torus: &Torus, budget: u64) -> Result<StateIndex, ExactError> {
    let n = torus.len();
    if n > 64 {
        return Err(ExactError::OverBudget {
            budget,
            detail: format!("a torus with {n} > 64 vertices"),
        });
    }
    if 1u64 << (n / 2 + 1) > budget {
        return Err(ExactError::OverBudget {
            budget,
            detail: format!("at least 2^{} colorings", n / 2 + 1),
        });
    }
    let later: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut us: Vec<usize> = torus.neighbors(v).filter(|&u| u > v).collect();
            us.sort_unstable();
            us.dedup();
            us
        })
        .collect();

    struct Search<'a> {
        n: usize,
        later: &'a [Vec<usize>],
        domains: Vec<u8>,
        colors: Vec<u8>,
        out: Vec<u128>,
        budget: u64,
    }

    impl Search<'_> {
        fn go(&mut self, v: usize) -> bool {
            if v == self.n {
                self.out.push(encode(&self.colors));
                return self.out.len() as u64 <= self.budget;
            }
            for c in 0..3u8 {
                if self.domains[v] & (1 << c) == 0 {
                    continue;
                }
                self.colors[v] = c;
                let mut saved = Vec::with_capacity(self.later[v].len());
                let mut wiped = false;
                for &u in &self.later[v] {
                    saved.push((u, self.domains[u]));
                    self.domains[u] &= !(1 << c);
                    if self.domains[u] == 0 {
                        wiped = true;
                        break;
                    }
                }
                let ok = wiped || self.go(v + 1);
                for (u, d) in saved {
                    self.domains[u] = d;
                }
                if !ok {
                    return false;
                }
            }
            true
        }
    }

    let mut search = Search {
        n,
        later: &later,
        domains: vec![0b111; n],
        colors: vec![0; n],
        out: Vec::new(),
        budget,
    };
    if !search.go(0) {
        return Err(ExactError::OverBudget {
            budget,
            detail: "the number of proper colorings".into(),
        });
    }
    let codes = search.out;
    let imbalances = codes
        .iter()
        .map(|&code| {
            (0..n)
                .filter(|&v| color_at(code, n, v) == 0)
                .map(|v| if torus.is_even(v) { 1 } else { -1 })
                .sum()
        })
        .collect();
    Ok(StateIndex {
        torus: torus.clone(),
        codes,
        imbalances,
    })
}

impl StateIndex {
    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[u128] {
        &self.codes
    }

    pub fn code(&self, i: usize) -> u128 {
        self.codes[i]
    }

    pub fn colors(&self, i: usize) -> Vec<u8> {
        decode(self.codes[i], self.torus.len())
    }

    pub fn coloring(&self, i: usize) -> Coloring {
        Coloring::from_packed_unchecked(&self.torus, PackedColors::from_slice(&self.colors(i)))
    }

    pub fn index_of_code(&self, code: u128) -> Option<usize> {
        self.codes.binary_search(&code).ok()
    }

    pub fn index_of(&self, chi: &Coloring) -> Option<usize> {
        if chi.torus() != &self.torus {
            return None;
        }
        self.index_of_code(encode(&chi.to_vec()))
    }

    pub fn imbalance(&self, i: usize) -> i64 {
        self.imbalances[i]
    }

    pub fn phase(&self, i: usize, rho: Rho) -> Phase {
        Phase::of(self.imbalances[i], rho, self.torus.len())
    }

    pub fn class_counts(&self, rho: Rho) -> PhaseCounts {
        let mut counts = PhaseCounts::default();
        for i in 0..self.len() {
            match self.phase(i, rho) {
                Phase::Balanced => counts.balanced += 1,
                Phase::EvenPhase => counts.even += 1,
                Phase::OddPhase => counts.odd += 1,
            }
        }
        counts
    }
}

/// Counts proper colorings as `trace(M^L)`, where `M` is the compatibility
/// matrix between proper colorings of one `(d−1)`-dimensional slice.
pub fn transfer_matrix_count(torus: &Torus) -> Result<BigUint, ExactError> {
    let side = torus.side();
    let dim = torus.dim();
    let slice_len = side.pow(dim as u32 - 1);
    if slice_len > MAX_SLICE_VERTICES {
        return Err(ExactError::OverBudget {
            budget: MAX_SLICE_VERTICES as u64,
            detail: format!("a slice of {slice_len} vertices"),
        });
    }
    let slice_edges: Vec<(usize, usize)> = if dim == 1 {
        Vec::new()
    } else {
        let slice = Torus::new(side, dim - 1).expect("slice of a valid torus");
        (0..slice_len)
            .flat_map(|v| slice.neighbors(v).filter(move |&u| u > v).map(move |u| (v, u)))
            .collect()
    };
    let mut states: Vec<Vec<u8>> = Vec::new();
    for mut x in 0..3usize.pow(slice_len as u32) {
        let mut s = vec![0u8; slice_len];
        for c in s.iter_mut() {
            *c = (x % 3) as u8;
            x /= 3;
        }
        if slice_edges.iter().all(|&(a, b)| s[a] != s[b]) {
            states.push(s);
        }
    }
    let k = states.len();
    if k > MAX_SLICE_STATES {
        return Err(ExactError::OverBudget {
            budget: MAX_SLICE_STATES as u64,
            detail: format!("{k} slice states"),
        });
    }
    let m: Vec<Vec<BigUint>> = states
        .iter()
        .map(|a| {
            states
                .iter()
                .map(|b| {
                    if a.iter().zip(b).all(|(x, y)| x != y) {
                        BigUint::one()
                    } else {
                        BigUint::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mul = |x: &Vec<Vec<BigUint>>, y: &Vec<Vec<BigUint>>| -> Vec<Vec<BigUint>> {
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| (0..k).fold(BigUint::zero(), |acc, l| acc + &x[i][l] * &y[l][j]))
                    .collect()
            })
            .collect()
    };
    let mut power = m.clone();
    for _ in 1..side {
        power = mul(&power, &m);
    }
    Ok((0..k).fold(BigUint::zero(), |acc, i| acc + &power[i][i]))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseMeasure {
    pub counts: PhaseCounts,
    #[serde(serialize_with = "ser_ratio")]
    pub balanced: BigRational,
    #[serde(serialize_with = "ser_ratio")]
    pub even: BigRational,
    #[serde(serialize_with = "ser_ratio")]
    pub odd: BigRational,
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Exact uniform-measure probabilities of the three phase classes.
pub fn stationary_measure(idx: &StateIndex, rho: Rho) -> PhaseMeasure {
    let counts = idx.class_counts(rho);
    let total = counts.total();
    PhaseMeasure {
        counts,
        balanced: ratio(counts.balanced, total),
        even: ratio(counts.even, total),
        odd: ratio(counts.odd, total),
    }
}

/// A sparse row-stochastic matrix with exact entries and an `f64` copy.
#[derive(Debug, Clone)]
pub struct ExactKernel {
    kind: Option<ChainKind>,
    rows: Vec<Vec<(usize, BigRational)>>,
    approx: Vec<Vec<(usize, f64)>>,
}

impl ExactKernel {
    /// Builds a kernel from explicit rows; entries in a row may repeat and are
    /// summed. Every row must be a probability vector.
    pub fn from_rows(rows: Vec<Vec<(usize, BigRational)>>) -> Result<ExactKernel, ExactError> {
        let n = rows.len();
        let mut merged = Vec::with_capacity(n);
        for (i, row) in rows.into_iter().enumerate() {
            let mut acc: BTreeMap<usize, BigRational> = BTreeMap::new();
            for (j, p) in row {
                if j >= n {
                    return Err(ExactError::InvalidKernel(format!("row {i} points to state {j}")));
                }
                if p < BigRational::zero() {
                    return Err(ExactError::InvalidKernel(format!("negative entry at ({i}, {j})")));
                }
                *acc.entry(j).or_insert_with(BigRational::zero) += p;
            }
            let sum: BigRational = acc.values().cloned().sum();
            if !sum.is_one() {
                return Err(ExactError::InvalidKernel(format!("row {i} sums to {sum}")));
            }
            merged.push(acc.into_iter().filter(|(_, p)| !p.is_zero()).collect());
        }
        Ok(Self::with_rows(None, merged))
    }

    fn with_rows(kind: Option<ChainKind>, rows: Vec<Vec<(usize, BigRational)>>) -> ExactKernel {
        let approx = rows
            .iter()
            .map(|r| r.iter().map(|(j, p)| (*j, p.to_f64().unwrap_or(f64::NAN))).collect())
            .collect();
        ExactKernel { kind, rows, approx }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn kind(&self) -> Option<ChainKind> {
        self.kind
    }

    pub fn row(&self, i: usize) -> &[(usize, BigRational)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        match self.rows[i].binary_search_by_key(&j, |(c, _)| *c) {
            Ok(pos) => self.rows[i][pos].1.clone(),
            Err(_) => BigRational::zero(),
        }
    }

    pub fn row_sums_are_one(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.iter().map(|(_, p)| p.clone()).sum::<BigRational>().is_one())
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.approx
            .iter()
            .map(|r| (r.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.len()).all(|i| self.rows[i].iter().all(|(j, p)| self.entry(*j, i) == *p))
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        let mut cols = vec![BigRational::zero(); self.len()];
        for r in &self.rows {
            for (j, p) in r {
                cols[*j] += p;
            }
        }
        cols.iter().all(|c| c.is_one())
    }

    /// One step of the chain applied to a row distribution.
    pub fn step(&self, dist: &[f64]) -> Vec<f64> {
        let mut next = vec![0.0; self.len()];
        for (i, &mass) in dist.iter().enumerate() {
            if mass != 0.0 {
                for &(j, p) in &self.approx[i] {
                    next[j] += mass * p;
                }
            }
        }
        next
    }

    fn reaches_all(&self, reverse: bool) -> Option<usize> {
        let n = self.len();
        let mut adj = vec![Vec::new(); n];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, _) in r {
                if reverse {
                    adj[*j].push(i);
                } else {
                    adj[i].push(*j);
                }
            }
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    /// Period of an irreducible kernel: the gcd of `level(i) + 1 − level(j)`
    /// over all positive transitions, with BFS levels from state 0.
    fn period(&self) -> u64 {
        let n = self.len();
        let mut level = vec![u64::MAX; n];
        level[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for (w, _) in &self.rows[u] {
                if level[*w] == u64::MAX {
                    level[*w] = level[u] + 1;
                    queue.push_back(*w);
                }
            }
        }
        let mut g = 0u64;
        for (i, r) in self.rows.iter().enumerate() {
            for (j, _) in r {
                let d = (level[i] as i64 + 1 - level[*j] as i64).unsigned_abs();
                g = gcd(g, d);
            }
        }
        g
    }

    pub fn check_ergodic(&self) -> Result<(), ExactError> {
        if self.is_empty() {
            return Err(ExactError::InvalidKernel("no states".into()));
        }
        if let Some(to) = self.reaches_all(false) {
            return Err(ExactError::Reducible { from: 0, to });
        }
        if let Some(from) = self.reaches_all(true) {
            return Err(ExactError::Reducible { from, to: 0 });
        }
        let lazy = (0..self.len()).any(|i| !self.entry(i, i).is_zero());
        if !lazy {
            let p = self.period();
            if p != 1 {
                return Err(ExactError::Periodic(p));
            }
        }
        Ok(())
    }

    /// Whether `P(g·i, g·j) = P(i, j)` for the state permutation `perm`.
    pub fn is_invariant(&self, perm: &[usize]) -> bool {
        (0..self.len()).all(|i| {
            let gi = perm[i];
            self.rows[i].len() == self.rows[gi].len()
                && self.rows[i].iter().all(|(j, p)| self.entry(gi, perm[*j]) == *p)
        })
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// All connected vertex sets of size `1..=k`, listed by scanning vertex
/// combinations.
pub fn connected_blocks(torus: &Torus, k: usize) -> Vec<Vec<usize>> {
    let n = torus.len();
    let mut out = Vec::new();
    let mut combo: Vec<usize> = Vec::with_capacity(k);
    fn rec(torus: &Torus, n: usize, k: usize, start: usize, combo: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !combo.is_empty() && torus.is_connected(&torus.vertex_set(combo.iter().copied())) {
            out.push(combo.clone());
        }
        if combo.len() == k {
            return;
        }
        for v in start..n {
            combo.push(v);
            rec(torus, n, k, v + 1, combo, out);
            combo.pop();
        }
    }
    rec(torus, n, k, 0, &mut combo, &mut out);
    out
}

/// The exact one-step kernel of the chain described by `spec` on the states
/// of `idx`. Built without reference to the simulation code.
pub fn exact_kernel(idx: &StateIndex, spec: &ChainSpec, budget: usize) -> Result<ExactKernel, ExactError> {
    if idx.len() > budget {
        return Err(ExactError::OverBudget {
            budget: budget as u64,
            detail: format!("{} states", idx.len()),
        });
    }
    let torus = idx.torus();
    validate_spec(torus, spec)?;
    let n = torus.len();
    let nbrs: Vec<Vec<usize>> = (0..n).map(|v| torus.neighbors(v).collect()).collect();
    let lookup = |code: u128| idx.index_of_code(code).expect("proper move leads to an indexed state");
    let rows = match spec.kind {
        ChainKind::Metropolis => {
            let w = ratio(1, 3 * n as u64);
            (0..idx.len())
                .map(|i| {
                    let code = idx.code(i);
                    let mut row: Vec<(usize, BigRational)> = Vec::new();
                    for (v, around) in nbrs.iter().enumerate() {
                        for j in 0..3u8 {
                            if j != color_at(code, n, v) && around.iter().all(|&u| color_at(code, n, u) != j) {
                                row.push((lookup(with_color(code, n, v, j)), w.clone()));
                            }
                        }
                    }
                    let stay = BigRational::one() - w.clone() * BigRational::from_integer(row.len().into());
                    row.push((i, stay));
                    row.sort_by_key(|(j, _)| *j);
                    row
                })
                .collect()
        }
        ChainKind::RhoLocalBlock { block_size } => {
            let blocks = connected_blocks(torus, block_size);
            let nb = blocks.len() as u64;
            (0..idx.len())
                .map(|i| {
                    let code = idx.code(i);
                    // target -> (completion count -> number of blocks)
                    let mut acc: BTreeMap<usize, BTreeMap<u64, u64>> = BTreeMap::new();
                    for block in &blocks {
                        let mut targets = Vec::new();
                        for a in 0..3usize.pow(block.len() as u32) {
                            let mut new = code;
                            let mut x = a;
                            for &v in block {
                                new = with_color(new, n, v, (x % 3) as u8);
                                x /= 3;
                            }
                            let proper = block
                                .iter()
                                .all(|&v| nbrs[v].iter().all(|&u| color_at(new, n, u) != color_at(new, n, v)));
                            if proper {
                                targets.push(new);
                            }
                        }
                        let count = targets.len() as u64;
                        for t in targets {
                            *acc.entry(lookup(t)).or_default().entry(count).or_default() += 1;
                        }
                    }
                    acc.into_iter()
                        .map(|(j, by_count)| {
                            let p: BigRational = by_count.into_iter().map(|(c, m)| ratio(m, c * nb)).sum();
                            (j, p)
                        })
                        .collect()
                })
                .collect()
        }
    };
    Ok(ExactKernel::with_rows(Some(spec.kind), rows))
}

/// A state permutation induced by a lattice automorphism or a color permutation.
#[derive(Debug, Clone)]
pub struct Symmetry {
    pub name: String,
    pub perm: Vec<usize>,
}

/// Generators of the symmetry group acting on states: unit translations along
/// each axis, reflection of axis 0, swaps of axis 0 with every other axis and
/// two transpositions generating all color permutations.
pub fn symmetry_generators(idx: &StateIndex) -> Vec<Symmetry> {
    let t = idx.torus();
    let n = t.len();
    let mut vertex_maps: Vec<(String, Vec<usize>)> = Vec::new();
    for a in 0..t.dim() {
        let mut e = vec![0; t.dim()];
        e[a] = 1;
        let by = t.index(&e);
        vertex_maps.push((format!("translate axis {a}"), (0..n).map(|v| t.translate(v, by)).collect()));
    }
    vertex_maps.push(("reflect axis 0".into(), (0..n).map(|v| t.reflect(v, 0)).collect()));
    for a in 1..t.dim() {
        vertex_maps.push((format!("swap axes 0 and {a}"), (0..n).map(|v| t.swap_axes(v, 0, a)).collect()));
    }
    let mut out = Vec::new();
    for (name, g) in vertex_maps {
        let perm = (0..idx.len())
            .map(|i| {
                let old = idx.colors(i);
                let mut new = vec![0u8; n];
                for v in 0..n {
                    new[g[v]] = old[v];
                }
                idx.index_of_code(encode(&new)).expect("automorphisms preserve properness")
            })
            .collect();
        out.push(Symmetry { name, perm });
    }
    for (name, map) in [("swap colors 0 and 1", [1u8, 0, 2]), ("swap colors 1 and 2", [0u8, 2, 1])] {
        let perm = (0..idx.len())
            .map(|i| {
                let new: Vec<u8> = idx.colors(i).into_iter().map(|c| map[c as usize]).collect();
                idx.index_of_code(encode(&new)).expect("color permutations preserve properness")
            })
            .collect();
        out.push(Symmetry { name: name.into(), perm });
    }
    out
}

/// One representative (the least index) per orbit of the symmetry group,
/// after checking that `kernel` commutes with every generator.
pub fn orbit_representatives(idx: &StateIndex, kernel: &ExactKernel) -> Result<Vec<usize>, ExactError> {
    if idx.len() != kernel.len() {
        return Err(ExactError::SizeMismatch {
            kernel: kernel.len(),
            index: idx.len(),
        });
    }
    let mut parent: Vec<usize> = (0..idx.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for g in symmetry_generators(idx) {
        if !kernel.is_invariant(&g.perm) {
            return Err(ExactError::NotInvariant(g.name));
        }
        for (i, &j) in g.perm.iter().enumerate() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut reps: Vec<usize> = (0..idx.len()).map(|i| find(&mut parent, i)).collect();
    reps.sort_unstable();
    reps.dedup();
    Ok(reps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingReport {
    /// Least `t_0` with worst-start TV at most `1/e` for every `t > t_0`.
    pub tau: u64,
    /// Worst-start TV distance at `t = 0, 1, …` up to the first crossing.
    pub curve: Vec<f64>,
    pub starts: Vec<usize>,
}

fn tv_to_uniform(dist: &[f64]) -> f64 {
    let u = 1.0 / dist.len() as f64;
    0.5 * dist.iter().map(|p| (p - u).abs()).sum::<f64>()
}

/// Mixing time over all start states.
pub fn exact_mixing_time(kernel: &ExactKernel, cap: u64) -> Result<MixingReport, ExactError> {
    let starts: Vec<usize> = (0..kernel.len()).collect();
    exact_mixing_time_from(kernel, &starts, cap)
}

/// Mixing time with starts reduced to one state per symmetry orbit; the
/// worst-start TV is constant on orbits of a kernel the group commutes with.
pub fn exact_mixing_time_reduced(idx: &StateIndex, kernel: &ExactKernel, cap: u64) -> Result<MixingReport, ExactError> {
    let starts = orbit_representatives(idx, kernel)?;
    exact_mixing_time_from(kernel, &starts, cap)
}

/// Worst-start TV from `starts` is nonincreasing in `t`, so the first `t*`
/// with TV ≤ 1/e gives `τ = max(t* − 1, 0)`.
pub fn exact_mixing_time_from(kernel: &ExactKernel, starts: &[usize], cap: u64) -> Result<MixingReport, ExactError> {
    kernel.check_ergodic()?;
    if !kernel.is_doubly_stochastic() {
        return Err(ExactError::InvalidKernel("stationary measure is not uniform".into()));
    }
    let n = kernel.len();
    let limit = (-1.0f64).exp();
    let mut dists: Vec<Vec<f64>> = starts
        .iter()
        .map(|&s| {
            let mut d = vec![0.0; n];
            d[s] = 1.0;
            d
        })
        .collect();
    let worst = |ds: &[Vec<f64>]| ds.iter().map(|d| tv_to_uniform(d)).fold(0.0, f64::max);
    let mut curve = vec![worst(&dists)];
    let mut t = 0u64;
    while *curve.last().expect("nonempty") > limit {
        if t == cap {
            return Err(ExactError::CapReached {
                cap,
                tv: *curve.last().expect("nonempty"),
            });
        }
        for d in dists.iter_mut() {
            *d = kernel.step(d);
        }
        t += 1;
        curve.push(worst(&dists));
    }
    Ok(MixingReport {
        tau: t.saturating_sub(1),
        curve,
        starts: starts.to_vec(),
    })
}

/// TV distance to uniform after `steps` steps from `start`.
pub fn power_iteration_tv(kernel: &ExactKernel, start: usize, steps: u64) -> f64 {
    let mut d = vec![0.0; kernel.len()];
    d[start] = 1.0;
    for _ in 0..steps {
        d = kernel.step(&d);
    }
    tv_to_uniform(&d)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    Finite(BigRational),
    Infinite,
}

impl Bound {
    pub fn to_f64(&self) -> f64 {
        match self {
            Bound::Finite(r) => r.to_f64().unwrap_or(f64::NAN),
            Bound::Infinite => f64::INFINITY,
        }
    }

    /// Whether `t ≥ self`.
    pub fn is_at_most(&self, t: u64) -> bool {
        match self {
            Bound::Finite(r) => *r <= BigRational::from_integer(t.into()),
            Bound::Infinite => false,
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Finite(r) => write!(f, "{r}"),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

/// `π(A) / (8 π(M))` and `(1 − π(A)) / (16 π(M))`; infinite when `π(M) = 0`.
pub fn conductance_bound(pi_a: &BigRational, pi_m: &BigRational) -> (Bound, Bound) {
    if pi_m.is_zero() {
        return (Bound::Infinite, Bound::Infinite);
    }
    let eight = BigRational::from_integer(8.into());
    let sixteen = BigRational::from_integer(16.into());
    (
        Bound::Finite(pi_a / (eight * pi_m)),
        Bound::Finite((BigRational::one() - pi_a) / (sixteen * pi_m)),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConductanceReport {
    pub pi_a: BigRational,
    pub pi_m: BigRational,
    pub bound: Bound,
    pub symmetrized: Bound,
}

/// The conductance bound for `A` = even phase and `M` = balanced states, after
/// checking on the kernel that no transition leads from `A` straight to the
/// odd phase.
pub fn exact_conductance_bound(idx: &StateIndex, kernel: &ExactKernel, rho: Rho) -> Result<ConductanceReport, ExactError> {
    if idx.len() != kernel.len() {
        return Err(ExactError::SizeMismatch {
            kernel: kernel.len(),
            index: idx.len(),
        });
    }
    for i in 0..idx.len() {
        if idx.phase(i, rho) != Phase::EvenPhase {
            continue;
        }
        for (j, p) in kernel.row(i) {
            if !p.is_zero() && idx.phase(*j, rho) == Phase::OddPhase {
                return Err(ExactError::HypothesisViolated { from: i, to: *j });
            }
        }
    }
    let m = stationary_measure(idx, rho);
    if m.even > ratio(1, 2) {
        return Err(ExactError::LargeA(m.even.to_string()));
    }
    let (bound, symmetrized) = conductance_bound(&m.even, &m.balanced);
    Ok(ConductanceReport {
        pi_a: m.even,
        pi_m: m.balanced,
        bound,
        symmetrized,
    })
}

#[derive(Serialize)]
struct DumpLine<'a> {
    index: usize,
    #[serde(rename = "L")]
    side: usize,
    d: usize,
    colors: &'a [u8],
    imbalance: i64,
}

/// One JSON object per line, in index order.
pub fn write_enumeration<W: Write>(idx: &StateIndex, mut w: W) -> io::Result<()> {
    for i in 0..idx.len() {
        let colors = idx.colors(i);
        let line = DumpLine {
            index: i,
            side: idx.torus().side(),
            d: idx.torus().dim(),
            colors: &colors,
            imbalance: idx.imbalance(i),
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Sparse triplets `row,col,probability` with exact probabilities `a/b`.
pub fn write_kernel_triplets<W: Write>(kernel: &ExactKernel, mut w: W) -> io::Result<()> {
    writeln!(w, "row,col,probability")?;
    for i in 0..kernel.len() {
        for (j, p) in kernel.row(i) {
            writeln!(w, "{i},{j},{p}")?;
        }
    }
    Ok(())
}
