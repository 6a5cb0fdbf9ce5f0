//! Markov chains on proper 3-colorings: the single-site Metropolis chain and
//! a block chain that recolors a random connected block of at most
//! `⌊ρ·L^d⌋` vertices per step.
//!
//! Randomness comes from `ChaCha8Rng` seeded with `seed_from_u64(seed)`; replica
//! `k` of an experiment uses stream `k` of the same seed (see
//! [`replica_rng`]). The Metropolis chain draws one integer `r` uniform in
//! `0..3n` per step and reads it as vertex `r / 3`, color `r % 3`.

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{Coloring, PackedColors, Phase};
use crate::rho::Rho;
use crate::torus::Torus;

/// Recorded in every output bundle.
pub const GENERATOR_NAME: &str =
    "ChaCha8Rng (rand_chacha 0.3): seed_from_u64(seed), set_stream(replica)";

/// Exhaustive recoloring enumerates `3^k` assignments per step.
pub const MAX_BLOCK_SIZE: usize = 6;

/// Refuse block families larger than this many anchored shapes.
pub const MAX_SHAPES: usize = 1 << 21;

pub fn replica_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("block size must be at least 1")]
    EmptyBlock,
    #[error("block size {block_size} exceeds ⌊ρ·L^d⌋ = {max}")]
    NotRhoLocal { block_size: usize, max: usize },
    #[error("block size {0} exceeds the enumeration limit {MAX_BLOCK_SIZE}")]
    BlockTooLarge(usize),
    #[error("block family has more than {MAX_SHAPES} shapes")]
    FamilyTooLarge,
    #[error("sample stride must be positive")]
    ZeroStride,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainKind {
    Metropolis,
    RhoLocalBlock { block_size: usize },
}

impl ChainKind {
    pub fn name(&self) -> String {
        match self {
            ChainKind::Metropolis => "metropolis".into(),
            ChainKind::RhoLocalBlock { block_size } => format!("block{block_size}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub kind: ChainKind,
    pub rho: Rho,
    pub seed: u64,
    /// Replica stream within `seed`.
    #[serde(default)]
    pub stream: u64,
    pub steps: u64,
    /// Record the imbalance every `stride` steps.
    pub stride: u64,
}

impl ChainSpec {
    pub fn metropolis(rho: Rho, seed: u64, steps: u64) -> ChainSpec {
        ChainSpec {
            kind: ChainKind::Metropolis,
            rho,
            seed,
            stream: 0,
            steps,
            stride: 1,
        }
    }
}

/// Connected vertex sets of size `1..=max_size`, stored as the shapes that
/// contain vertex `0`; every block is a translate of such a shape.
#[derive(Debug, Clone)]
pub struct BlockFamily {
    torus: Torus,
    max_size: usize,
    shapes: Vec<Vec<usize>>,
}

impl BlockFamily {
    pub fn new(torus: &Torus, max_size: usize) -> Result<BlockFamily, ChainError> {
        if max_size == 0 {
            return Err(ChainError::EmptyBlock);
        }
        if max_size > MAX_BLOCK_SIZE {
            return Err(ChainError::BlockTooLarge(max_size));
        }
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut frontier: HashSet<Vec<usize>> = HashSet::from([vec![0usize]]);
        all.insert(vec![0]);
        for _ in 1..max_size {
            let mut next = HashSet::new();
            for set in &frontier {
                for &v in set {
                    for u in torus.neighbors(v) {
                        if let Err(pos) = set.binary_search(&u) {
                            let mut grown = set.clone();
                            grown.insert(pos, u);
                            next.insert(grown);
                        }
                    }
                }
            }
            all.extend(next.iter().cloned());
            if all.len() > MAX_SHAPES {
                return Err(ChainError::FamilyTooLarge);
            }
            frontier = next;
        }
        Ok(BlockFamily {
            torus: torus.clone(),
            max_size,
            shapes: all.into_iter().collect(),
        })
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn shape_count(&self) -> usize {
        self.shapes.len()
    }

    fn place(&self, shape: &[usize], at: usize) -> Vec<usize> {
        let mut block: Vec<usize> = shape.iter().map(|&u| self.torus.translate(u, at)).collect();
        block.sort_unstable();
        block
    }

    /// Every block exactly once, sorted.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut all = BTreeSet::new();
        for v in 0..self.torus.len() {
            for shape in &self.shapes {
                all.insert(self.place(shape, v));
            }
        }
        all.into_iter().collect()
    }

    /// A block drawn uniformly from [`BlockFamily::blocks`]: a uniform anchor
    /// and shape hit each block `|B|` ways, so accepting with probability
    /// `1/|B|` flattens the draw.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        loop {
            let v = rng.gen_range(0..self.torus.len());
            let shape = &self.shapes[rng.gen_range(0..self.shapes.len())];
            if rng.gen_range(0..shape.len()) == 0 {
                return self.place(shape, v);
            }
        }
    }
}

/// All proper recolorings of `block` given the colors outside it, in
/// lexicographic order over the block's vertices.
pub fn block_completions(torus: &Torus, colors: &PackedColors, block: &[usize]) -> Vec<Vec<u8>> {
    let k = block.len();
    let mut out = Vec::new();
    let mut assign = vec![0u8; k];
    let total = 3usize.pow(k as u32);
    'outer: for code in 0..total {
        let mut c = code;
        for i in (0..k).rev() {
            assign[i] = (c % 3) as u8;
            c /= 3;
        }
        for (i, &v) in block.iter().enumerate() {
            for u in torus.neighbors(v) {
                let cu = match block.iter().position(|&b| b == u) {
                    Some(j) => assign[j],
                    None => colors.get(u),
                };
                if cu == assign[i] {
                    continue 'outer;
                }
            }
        }
        out.push(assign.clone());
    }
    out
}

fn metropolis_move<R: Rng>(torus: &Torus, colors: &mut PackedColors, rng: &mut R) -> Option<(usize, u8, u8)> {
    let n = torus.len() as u64;
    let r = rng.gen_range(0..3 * n);
    let v = (r / 3) as usize;
    let j = (r % 3) as u8;
    let cur = colors.get(v);
    if j == cur {
        return None;
    }
    for k in 0..torus.degree() {
        if colors.get(torus.neighbor_slot(v, k)) == j {
            return None;
        }
    }
    colors.set(v, j);
    Some((v, cur, j))
}

fn block_move<R: Rng>(
    torus: &Torus,
    family: &BlockFamily,
    colors: &mut PackedColors,
    rng: &mut R,
) -> Vec<(usize, u8, u8)> {
    let block = family.sample(rng);
    let options = block_completions(torus, colors, &block);
    // The proposal is uniform over completions sharing one boundary, so it is
    // symmetric and the Metropolis acceptance ratio is identically 1.
    let pick = &options[rng.gen_range(0..options.len())];
    let mut changes = Vec::new();
    for (&v, &c) in block.iter().zip(pick) {
        let old = colors.get(v);
        if old != c {
            colors.set(v, c);
            changes.push((v, old, c));
        }
    }
    changes
}

/// One Metropolis step from `chi`.
pub fn metropolis_step<R: Rng>(chi: &Coloring, rng: &mut R) -> Coloring {
    let mut colors = chi.packed().clone();
    metropolis_move(chi.torus(), &mut colors, rng);
    Coloring::from_packed_unchecked(chi.torus(), colors)
}

/// One block-chain step from `chi`.
pub fn rho_local_step<R: Rng>(chi: &Coloring, family: &BlockFamily, rng: &mut R) -> Coloring {
    let mut colors = chi.packed().clone();
    block_move(chi.torus(), family, &mut colors, rng);
    Coloring::from_packed_unchecked(chi.torus(), colors)
}

/// Checks that `spec` describes a ρ-local chain on `torus`.
pub fn validate_spec(torus: &Torus, spec: &ChainSpec) -> Result<(), ChainError> {
    if spec.stride == 0 {
        return Err(ChainError::ZeroStride);
    }
    if let ChainKind::RhoLocalBlock { block_size } = spec.kind {
        if block_size == 0 {
            return Err(ChainError::EmptyBlock);
        }
        let max = spec.rho.max_changes(torus.len());
        if block_size > max {
            return Err(ChainError::NotRhoLocal { block_size, max });
        }
        if block_size > MAX_BLOCK_SIZE {
            return Err(ChainError::BlockTooLarge(block_size));
        }
    }
    Ok(())
}

enum Mover {
    Metropolis,
    Block(BlockFamily),
}

/// A running chain with an owned, mutable state.
pub struct Chain {
    torus: Torus,
    colors: PackedColors,
    zeros_even: i64,
    zeros_odd: i64,
    rng: ChaCha8Rng,
    mover: Mover,
}

impl Chain {
    pub fn new(start: &Coloring, spec: &ChainSpec) -> Result<Chain, ChainError> {
        let torus = start.torus().clone();
        validate_spec(&torus, spec)?;
        let mover = match spec.kind {
            ChainKind::Metropolis => Mover::Metropolis,
            ChainKind::RhoLocalBlock { block_size } => Mover::Block(BlockFamily::new(&torus, block_size)?),
        };
        let (e, o) = start.zero_counts();
        Ok(Chain {
            torus,
            colors: start.packed().clone(),
            zeros_even: e as i64,
            zeros_odd: o as i64,
            rng: replica_rng(spec.seed, spec.stream),
            mover,
        })
    }

    #[inline]
    fn record(&mut self, v: usize, old: u8, new: u8) {
        let delta = i64::from(new == 0) - i64::from(old == 0);
        if delta != 0 {
            if self.torus.is_even(v) {
                self.zeros_even += delta;
            } else {
                self.zeros_odd += delta;
            }
        }
    }

    /// Advances one step; returns the number of recolored vertices.
    pub fn step(&mut self) -> usize {
        match &self.mover {
            Mover::Metropolis => match metropolis_move(&self.torus, &mut self.colors, &mut self.rng) {
                Some((v, old, new)) => {
                    self.record(v, old, new);
                    1
                }
                None => 0,
            },
            Mover::Block(family) => {
                let changes = block_move(&self.torus, family, &mut self.colors, &mut self.rng);
                for &(v, old, new) in &changes {
                    self.record(v, old, new);
                }
                changes.len()
            }
        }
    }

    pub fn imbalance(&self) -> i64 {
        self.zeros_even - self.zeros_odd
    }

    pub fn coloring(&self) -> Coloring {
        Coloring::from_packed_unchecked(&self.torus, self.colors.clone())
    }

    pub fn is_proper(&self) -> bool {
        crate::coloring::first_monochromatic_edge(&self.torus, &self.colors).is_none()
    }
}

/// Per-step and per-sample hooks for [`run_observed`].
pub trait Observer {
    fn on_step(&mut self, _step: u64, _changed: usize, _imbalance: i64) {}
    fn on_sample(&mut self, _step: u64, _chain: &Chain) {}
}

impl Observer for () {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub sample_stride: u64,
    pub steps: u64,
    /// Imbalance at steps `0, stride, 2·stride, …`.
    pub imbalances: Vec<i64>,
    pub phase_tags: Vec<Phase>,
    pub start_phase: Phase,
    /// First step whose state lies in the phase opposite to the start.
    pub escape_step: Option<u64>,
    /// Number of states among steps `0..=steps` that are balanced.
    pub balanced_steps: u64,
    /// Largest number of vertices recolored by a single step.
    pub max_changed: usize,
}

impl Trajectory {
    pub fn balanced_fraction(&self) -> f64 {
        self.balanced_steps as f64 / (self.steps + 1) as f64
    }
}

pub fn run(start: &Coloring, spec: &ChainSpec) -> Result<Trajectory, ChainError> {
    run_observed(start, spec, &mut ())
}

pub fn run_observed<O: Observer + ?Sized>(
    start: &Coloring,
    spec: &ChainSpec,
    observer: &mut O,
) -> Result<Trajectory, ChainError> {
    let mut chain = Chain::new(start, spec)?;
    let n = chain.torus.len();
    let threshold = spec.rho.half_threshold(n);
    let phase = |m: i64| {
        if m > threshold {
            Phase::EvenPhase
        } else if m < -threshold {
            Phase::OddPhase
        } else {
            Phase::Balanced
        }
    };
    let start_phase = phase(chain.imbalance());
    let target = match start_phase {
        Phase::Balanced => None,
        p => Some(p.opposite()),
    };
    let mut traj = Trajectory {
        sample_stride: spec.stride,
        steps: spec.steps,
        imbalances: vec![chain.imbalance()],
        phase_tags: vec![start_phase],
        start_phase,
        escape_step: None,
        balanced_steps: u64::from(start_phase == Phase::Balanced),
        max_changed: 0,
    };
    observer.on_sample(0, &chain);
    for t in 1..=spec.steps {
        let changed = chain.step();
        traj.max_changed = traj.max_changed.max(changed);
        let m = chain.imbalance();
        let p = phase(m);
        if p == Phase::Balanced {
            traj.balanced_steps += 1;
        }
        if traj.escape_step.is_none() && target == Some(p) {
            traj.escape_step = Some(t);
        }
        observer.on_step(t, changed, m);
        if t % spec.stride == 0 {
            debug_assert!(chain.is_proper(), "chain left the proper colorings at step {t}");
            traj.imbalances.push(m);
            traj.phase_tags.push(p);
            observer.on_sample(t, &chain);
        }
    }
    Ok(traj)
}
