//! Zero-free cutsets of a coloring.
//!
//! For each parity `P`, each component `R` of `(I^P)^+` and each component `C`
//! of `V \ R`, the cutset is `γ = ∇(C)` with `W = V \ C`. Its interior is the
//! smaller of `C` and `W`, with ties going to `W`.
//!
//! Properties are stated for a cutset of parity `P`; "inner" is the class `P`
//! and "outer" the other class. For an even cutset this reads
//! `∂_int W ⊆ O`, `∂_ext W ⊆ E`, `W^O = ∂_ext W^E`, `W^E = {y ∈ E : ∂y ⊆ W^O}`
//! and `|γ| = 2d(w_o − w_e)`.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::coloring::Coloring;
use crate::torus::{Edge, Parity, Torus, VertexSet};

#[derive(Debug, Clone)]
pub struct Cutset {
    pub parity: Parity,
    pub gamma: Vec<Edge>,
    /// The component of `(I^P)^+` this cutset was built from.
    pub r: VertexSet,
    pub c: VertexSet,
    pub w: VertexSet,
    pub interior_is_w: bool,
    pub w_e: usize,
    pub w_o: usize,
    pub properties_verified: bool,
    /// `|γ| ≥ L^{d−1}`.
    pub topologically_nontrivial: bool,
}

impl Cutset {
    fn build(torus: &Torus, parity: Parity, r: &VertexSet, c: VertexSet) -> Cutset {
        let w = c.complement();
        let gamma = torus.edge_boundary(&c);
        let w_e = torus.part(&w, Parity::Even).len();
        let w_o = w.len() - w_e;
        let nontrivial = gamma.len() >= torus.side().pow(torus.dim() as u32 - 1);
        Cutset {
            parity,
            gamma,
            r: r.clone(),
            interior_is_w: w.len() <= c.len(),
            c,
            w,
            w_e,
            w_o,
            properties_verified: false,
            topologically_nontrivial: nontrivial,
        }
    }

    pub fn size(&self) -> usize {
        self.gamma.len()
    }

    pub fn interior(&self) -> &VertexSet {
        if self.interior_is_w {
            &self.w
        } else {
            &self.c
        }
    }

    /// `|W ∩ P|` for the cutset's own parity `P`.
    pub fn w_inner(&self) -> usize {
        match self.parity {
            Parity::Even => self.w_e,
            Parity::Odd => self.w_o,
        }
    }

    pub fn w_outer(&self) -> usize {
        match self.parity {
            Parity::Even => self.w_o,
            Parity::Odd => self.w_e,
        }
    }

    /// `W^E` of the cutset.
    pub fn w_even(&self, torus: &Torus) -> VertexSet {
        torus.part(&self.w, Parity::Even)
    }

    pub fn summary(&self, report: &PropertyReport) -> CutsetSummary {
        CutsetSummary {
            parity: self.parity,
            gamma_size: self.size(),
            w_e: self.w_e,
            w_o: self.w_o,
            interior_size: self.interior().len(),
            interior_is_w: self.interior_is_w,
            properties_verified: self.properties_verified,
            topologically_nontrivial: self.topologically_nontrivial,
            checks: report.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    /// `C` and `W` are nonempty, connected and partition `V`.
    Minimal,
    /// `∂_int W` lies in the outer class and `∂_ext W` in the inner class.
    BoundaryParity,
    /// Neither `∂_int W` nor `∂_ext W` meets `I`.
    ZeroFree,
    /// `W^outer = ∂_ext W^inner`.
    OuterIsExterior,
    /// `W^inner = {y ∈ inner : ∂y ⊆ W^outer}`.
    InnerIsClosed,
    /// `|γ| = 2d(w_outer − w_inner)`.
    EdgeCount,
}

pub const HARD_PROPERTIES: [Property; 6] = [
    Property::Minimal,
    Property::BoundaryParity,
    Property::ZeroFree,
    Property::OuterIsExterior,
    Property::InnerIsClosed,
    Property::EdgeCount,
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Vertex { vertex: usize },
    Count { expected: i64, actual: i64 },
    Part { side: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyCheck {
    pub property: Property,
    pub witness: Option<Witness>,
}

/// `|γ| ≥ max{|W|^{1−1/d}, d^{1.9}}`, a large-`d` statement recorded for information.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeBound {
    pub gamma: usize,
    pub volume_term: f64,
    pub dimension_term: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
    pub size_bound: SizeBound,
}

impl PropertyReport {
    pub fn passed(&self, p: Property) -> bool {
        self.checks.iter().any(|c| c.property == p && c.witness.is_none())
    }

    pub fn hard_ok(&self) -> bool {
        self.checks.iter().all(|c| c.witness.is_none())
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.checks.iter().filter(|c| c.witness.is_some())
    }
}

fn first_outside(a: &VertexSet, b: &VertexSet) -> Option<Witness> {
    a.difference(b).first().map(|vertex| Witness::Vertex { vertex })
}

/// Evaluates every hard property of `cs` against the zero set `zeros`.
pub fn verify_properties(torus: &Torus, cs: &Cutset, zeros: &VertexSet) -> PropertyReport {
    let inner = torus.class(cs.parity);
    let outer = torus.class(cs.parity.flip());
    let w = &cs.w;
    let int_w = torus.interior_boundary(w);
    let ext_w = torus.exterior_boundary(w);

    let minimal = if cs.c.is_empty() || !torus.is_connected(&cs.c) {
        Some(Witness::Part { side: "C" })
    } else if w.is_empty() || !torus.is_connected(w) {
        Some(Witness::Part { side: "W" })
    } else if cs.c.union(w) != torus.full_set() || !cs.c.is_disjoint(w) {
        Some(Witness::Part { side: "partition" })
    } else {
        None
    };

    let parity = first_outside(&int_w, &outer).or_else(|| first_outside(&ext_w, &inner));
    let zero_free = int_w
        .intersection(zeros)
        .first()
        .or_else(|| ext_w.intersection(zeros).first())
        .map(|vertex| Witness::Vertex { vertex });

    let w_in = w.intersection(&inner);
    let w_out = w.intersection(&outer);
    let ext_in = torus.exterior_boundary(&w_in);
    let outer_rule = first_outside(&w_out, &ext_in).or_else(|| first_outside(&ext_in, &w_out));
    let closed: VertexSet = torus.vertex_set(inner.iter().filter(|&y| torus.neighbors(y).all(|u| w_out.contains(u))));
    let inner_rule = first_outside(&w_in, &closed).or_else(|| first_outside(&closed, &w_in));

    let expected = 2 * torus.dim() as i64 * (w_out.len() as i64 - w_in.len() as i64);
    let count = (expected != cs.size() as i64).then_some(Witness::Count {
        expected,
        actual: cs.size() as i64,
    });

    let d = torus.dim() as f64;
    let volume_term = (w.len() as f64).powf(1.0 - 1.0 / d);
    let dimension_term = d.powf(1.9);
    PropertyReport {
        checks: vec![
            PropertyCheck { property: Property::Minimal, witness: minimal },
            PropertyCheck { property: Property::BoundaryParity, witness: parity },
            PropertyCheck { property: Property::ZeroFree, witness: zero_free },
            PropertyCheck { property: Property::OuterIsExterior, witness: outer_rule },
            PropertyCheck { property: Property::InnerIsClosed, witness: inner_rule },
            PropertyCheck { property: Property::EdgeCount, witness: count },
        ],
        size_bound: SizeBound {
            gamma: cs.size(),
            volume_term,
            dimension_term,
            holds: cs.size() as f64 >= volume_term.max(dimension_term),
        },
    }
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub cutsets: Vec<Cutset>,
    pub reports: Vec<PropertyReport>,
    /// Some `R` covered the whole torus, so its complement yields no cutset.
    pub wraps_torus: bool,
}

/// All cutsets of `χ`, even ones first, each with its property report.
pub fn extract_all(chi: &Coloring) -> Extraction {
    let torus = chi.torus();
    let zeros = chi.zero_set();
    let mut out = Extraction {
        cutsets: Vec::new(),
        reports: Vec::new(),
        wraps_torus: false,
    };
    for parity in [Parity::Even, Parity::Odd] {
        let ip = torus.part(&zeros, parity);
        if ip.is_empty() {
            continue;
        }
        for r in torus.components(&torus.closure(&ip)) {
            let rest = r.complement();
            if rest.is_empty() {
                out.wraps_torus = true;
                continue;
            }
            for c in torus.components(&rest) {
                let mut cs = Cutset::build(torus, parity, &r, c);
                let report = verify_properties(torus, &cs, &zeros);
                cs.properties_verified = report.hard_ok();
                out.cutsets.push(cs);
                out.reports.push(report);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub gamma: Vec<Cutset>,
    pub parity: Parity,
    /// Interiors are pairwise disjoint and cover `I^P`.
    pub coverage_ok: bool,
    pub wraps_torus: bool,
}

impl Selection {
    /// Membership in the even class: coverage achieved with even cutsets.
    pub fn is_even_class(&self) -> bool {
        self.coverage_ok && self.parity == Parity::Even
    }
}

fn greedy(torus: &Torus, all: &[Cutset], zeros: &VertexSet, parity: Parity) -> (Vec<Cutset>, bool) {
    let mut candidates: Vec<&Cutset> = all.iter().filter(|c| c.parity == parity).collect();
    candidates.sort_by(|a, b| {
        b.interior()
            .len()
            .cmp(&a.interior().len())
            .then_with(|| a.interior().to_vec().cmp(&b.interior().to_vec()))
    });
    candidates.dedup_by(|a, b| a.c == b.c);
    let mut kept: Vec<Cutset> = Vec::new();
    let mut covered = torus.empty_set();
    for cs in candidates {
        if cs.interior().is_disjoint(&covered) {
            covered.union_with(cs.interior());
            kept.push(cs.clone());
        }
    }
    let ok = torus.part(zeros, parity).is_subset(&covered);
    (kept, ok)
}

/// Greedy choice of cutsets with disjoint interiors covering `I^E`, falling
/// back to the odd analogue. A parity with no zeros is never chosen unless
/// `I` is empty, so coverage is vacuous only for zero-free colorings. Failure
/// is reported through `coverage_ok`.
pub fn select_gamma(chi: &Coloring) -> Selection {
    let torus = chi.torus();
    let zeros = chi.zero_set();
    let ex = extract_all(chi);
    let mut first = None;
    for parity in [Parity::Even, Parity::Odd] {
        let (gamma, ok) = greedy(torus, &ex.cutsets, &zeros, parity);
        let vacuous = torus.part(&zeros, parity).is_empty();
        if ok && (!vacuous || zeros.is_empty()) {
            return Selection {
                gamma,
                parity,
                coverage_ok: true,
                wraps_torus: ex.wraps_torus,
            };
        }
        first.get_or_insert(gamma);
    }
    Selection {
        gamma: first.unwrap_or_default(),
        parity: Parity::Even,
        coverage_ok: false,
        wraps_torus: ex.wraps_torus,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CutsetError {
    #[error("no cutsets to bucket")]
    Empty,
    #[error("the weight |γ|^(d/(d−1)) is undefined for d = 1")]
    LineTorus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicBuckets {
    /// Bucket `i` holds the positions of cutsets with `2^{i−1} ≤ |γ| < 2^i`.
    pub buckets: BTreeMap<u32, Vec<usize>>,
    /// `Σ |γ|^{d/(d−1)}` per bucket.
    pub weights: BTreeMap<u32, f64>,
    pub selected: u32,
    /// Number of cutsets in the selected bucket.
    pub ell: usize,
}

pub fn dyadic_index(size: usize) -> u32 {
    usize::BITS - size.leading_zeros()
}

/// Buckets cutset sizes dyadically and selects the smallest `i` with
/// `Σ_{Γ_i} |γ|^{d/(d−1)} ≥ (6/π²) · Σ_Γ |γ|^{d/(d−1)} / i²`. Such an `i`
/// exists because the right-hand sides sum to the total over `i ≥ 1`.
pub fn dyadic_buckets(sizes: &[usize], dim: usize) -> Result<DyadicBuckets, CutsetError> {
    if sizes.is_empty() {
        return Err(CutsetError::Empty);
    }
    if dim < 2 {
        return Err(CutsetError::LineTorus);
    }
    let exponent = dim as f64 / (dim as f64 - 1.0);
    let mut buckets: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut weights: BTreeMap<u32, f64> = BTreeMap::new();
    for (k, &s) in sizes.iter().enumerate() {
        let i = dyadic_index(s);
        buckets.entry(i).or_default().push(k);
        *weights.entry(i).or_default() += (s as f64).powf(exponent);
    }
    let total: f64 = weights.values().sum();
    let c = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let selected = weights
        .iter()
        .find(|(&i, &w)| w >= c * total / f64::from(i * i))
        .or_else(|| weights.iter().max_by(|a, b| (a.1 * f64::from(a.0 * a.0)).total_cmp(&(b.1 * f64::from(b.0 * b.0)))))
        .map(|(&i, _)| i)
        .expect("nonempty");
    Ok(DyadicBuckets {
        ell: buckets[&selected].len(),
        buckets,
        weights,
        selected,
    })
}

/// A sequence of `(cutset size, vertex)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Profile {
    pub entries: Vec<(usize, usize)>,
}

/// Whether distinct cutsets of `gamma` can be assigned to the entries of `p`
/// with matching size and vertex in `W^E`. Decided by augmenting paths.
pub fn matches_profile(torus: &Torus, gamma: &[Cutset], p: &Profile) -> bool {
    let w_even: Vec<VertexSet> = gamma.iter().map(|cs| cs.w_even(torus)).collect();
    let adj: Vec<Vec<usize>> = p
        .entries
        .iter()
        .map(|&(c, v)| {
            (0..gamma.len())
                .filter(|&j| gamma[j].size() == c && v < torus.len() && w_even[j].contains(v))
                .collect()
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; gamma.len()];
    fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, adj, owner, seen)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    (0..adj.len()).all(|i| augment(i, &adj, &mut owner, &mut vec![false; gamma.len()]))
}

/// Whether `χ` is in the even class and its selected cutsets contain a
/// subfamily with profile `p`.
pub fn profile_membership(chi: &Coloring, p: &Profile) -> bool {
    let sel = select_gamma(chi);
    sel.is_even_class() && matches_profile(chi.torus(), &sel.gamma, p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutsetSummary {
    pub parity: Parity,
    pub gamma_size: usize,
    pub w_e: usize,
    pub w_o: usize,
    pub interior_size: usize,
    pub interior_is_w: bool,
    pub properties_verified: bool,
    pub topologically_nontrivial: bool,
    pub checks: PropertyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutsetReport {
    pub wraps_torus: bool,
    pub cutsets: Vec<CutsetSummary>,
    pub selected_parity: Parity,
    pub selected: Vec<usize>,
    pub coverage_ok: bool,
}

/// Extraction and selection for `χ` in serializable form; `selected` lists
/// positions in `cutsets`.
pub fn report(chi: &Coloring) -> CutsetReport {
    let ex = extract_all(chi);
    let sel = select_gamma(chi);
    let selected = sel
        .gamma
        .iter()
        .filter_map(|g| ex.cutsets.iter().position(|c| c.parity == g.parity && c.c == g.c))
        .collect();
    CutsetReport {
        wraps_torus: ex.wraps_torus,
        cutsets: ex.cutsets.iter().zip(&ex.reports).map(|(c, r)| c.summary(r)).collect(),
        selected_parity: sel.parity,
        selected,
        coverage_ok: sel.coverage_ok,
    }
}
