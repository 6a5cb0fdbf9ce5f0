//! Verification suites run by `torpid verify`.
//!
//! Hard checks decide the exit status; everything under `info` is reported
//! without affecting it.

use std::collections::BTreeSet;
use std::str::FromStr;

use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use torpid_core::bounds::{self, chernoff_bound_check, comp_count, entropy_condition, free_choice_check, random_valid_pair};
use torpid_core::cutset::{extract_all, select_gamma, verify_properties, Property};
use torpid_core::exactgibbs::{
    self, enumerate, exact_conductance_bound, exact_kernel, exact_mixing_time, exact_mixing_time_reduced,
    power_iteration_tv, ExactError, StateIndex, DEFAULT_KERNEL_BUDGET, DEFAULT_MIXING_CAP, DEFAULT_STATE_BUDGET,
};
use torpid_core::glauber::{replica_rng, run_observed, Chain, ChainSpec, Observer};
use torpid_core::peierls::{reconstruct, shift_coloring, Approximation, ShiftContext};
use torpid_core::{Coloring, Parity, Rho, Torus};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Cutset,
    Shift,
    Flow,
    Reconstruct,
    Bounds,
    Kernel,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Cutset, Suite::Shift, Suite::Flow, Suite::Reconstruct, Suite::Bounds, Suite::Kernel];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Cutset => "cutset",
            Suite::Shift => "shift",
            Suite::Flow => "flow",
            Suite::Reconstruct => "reconstruct",
            Suite::Bounds => "bounds",
            Suite::Kernel => "kernel",
        }
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| CliError::InvalidParams(format!("unknown suite {s:?}")))
    }
}

/// Comma-separated suite names, deduplicated and in canonical order.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>, CliError> {
    let set: BTreeSet<Suite> = s.split(',').map(|x| x.trim().parse()).collect::<Result<_, _>>()?;
    if set.is_empty() {
        return Err(CliError::InvalidParams("no suites given".into()));
    }
    Ok(set.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub instance: String,
    pub hard_checks: u64,
    pub hard_failures: u64,
    pub first_witness: Option<Value>,
    pub info: Value,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.hard_failures == 0
    }

    pub fn into_result(self) -> Result<SuiteReport, CliError> {
        if self.passed() {
            return Ok(self);
        }
        Err(CliError::VerifyFailed {
            suite: self.suite.name().into(),
            message: format!("{} of {} hard checks failed on {}", self.hard_failures, self.hard_checks, self.instance),
            witness: self.first_witness.unwrap_or(Value::Null),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub rho: Rho,
    /// Colorings drawn by MCMC when the instance cannot be enumerated.
    pub samples: usize,
    pub seed: u64,
    /// Subsets of `W^s` are enumerated up to `2^subset_cap`, sampled beyond.
    pub subset_cap: u32,
    pub random_pairs: usize,
    pub state_budget: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            rho: Rho::new(11, 50).expect("0.22 is in range"),
            samples: 100,
            seed: 1,
            subset_cap: 12,
            random_pairs: 10_000,
            state_budget: DEFAULT_STATE_BUDGET,
        }
    }
}

pub fn instance_name(torus: &Torus) -> String {
    format!("T_{{{},{}}}", torus.side(), torus.dim())
}

pub struct Corpus {
    pub colorings: Vec<Coloring>,
    pub exhaustive: bool,
}

/// Every proper coloring when enumeration fits the budget, otherwise
/// `opts.samples` Metropolis samples.
pub fn corpus(torus: &Torus, opts: &VerifyOptions) -> Result<Corpus, CliError> {
    match enumerate(torus, opts.state_budget) {
        Ok(idx) => Ok(Corpus {
            colorings: (0..idx.len()).map(|i| idx.coloring(i)).collect(),
            exhaustive: true,
        }),
        Err(ExactError::OverBudget { .. }) => Ok(Corpus {
            colorings: mcmc_samples(torus, opts.samples, opts.rho, opts.seed)?,
            exhaustive: false,
        }),
        Err(e) => Err(e.into()),
    }
}

struct Collect(Vec<Coloring>);

impl Observer for Collect {
    fn on_sample(&mut self, step: u64, chain: &Chain) {
        if step > 0 {
            self.0.push(chain.coloring());
        }
    }
}

/// `count` Metropolis states from the even ground state, `50·n` steps apart.
pub fn mcmc_samples(torus: &Torus, count: usize, rho: Rho, seed: u64) -> Result<Vec<Coloring>, CliError> {
    let thin = 50 * torus.len() as u64;
    let spec = ChainSpec {
        stride: thin,
        ..ChainSpec::metropolis(rho, seed, thin * count as u64)
    };
    let mut out = Collect(Vec::with_capacity(count));
    run_observed(&Coloring::ground_state(torus, Parity::Even), &spec, &mut out)?;
    Ok(out.0)
}

fn colors_json(chi: &Coloring) -> Value {
    json!(chi.to_vec())
}

/// Extraction commutes with every unit translation: cutsets of the shifted
/// coloring are the shifted cutsets, with the parity label flipped.
pub fn covariance_witness(chi: &Coloring) -> Option<Value> {
    let torus = chi.torus();
    let key = |p: Parity, c: Vec<usize>, w: Vec<usize>| (p, c, w);
    let ex = extract_all(chi);
    for s in torus.directions() {
        let mut expected: Vec<_> = ex
            .cutsets
            .iter()
            .map(|cs| key(cs.parity.flip(), torus.shift(&cs.c, s).to_vec(), torus.shift(&cs.w, s).to_vec()))
            .collect();
        let mut actual: Vec<_> = extract_all(&chi.shifted(s))
            .cutsets
            .iter()
            .map(|cs| key(cs.parity, cs.c.to_vec(), cs.w.to_vec()))
            .collect();
        expected.sort();
        actual.sort();
        if expected != actual {
            return Some(json!({ "coloring": colors_json(chi), "direction": s.value() }));
        }
    }
    None
}

#[derive(Debug, Default, Clone)]
struct Tally {
    checks: u64,
    failures: u64,
    witness: Option<Value>,
}

impl Tally {
    fn check(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checks += other.checks;
        self.failures += other.failures;
        if self.witness.is_none() {
            self.witness = other.witness;
        }
        self
    }

    fn report(self, suite: Suite, torus: &Torus, info: Value) -> SuiteReport {
        SuiteReport {
            suite,
            instance: instance_name(torus),
            hard_checks: self.checks,
            hard_failures: self.failures,
            first_witness: self.witness,
            info,
        }
    }
}

#[derive(Debug, Default)]
struct CutsetTally {
    props: Tally,
    cov: Tally,
    by_property: [u64; 6],
    cutsets: u64,
    failing_with_zeros: u64,
    selected: u64,
    selected_failing: u64,
    selected_failing_with_zeros: u64,
}

impl CutsetTally {
    fn merge(self, o: CutsetTally) -> CutsetTally {
        let mut by_property = self.by_property;
        for (a, b) in by_property.iter_mut().zip(o.by_property) {
            *a += b;
        }
        CutsetTally {
            props: self.props.merge(o.props),
            cov: self.cov.merge(o.cov),
            by_property,
            cutsets: self.cutsets + o.cutsets,
            failing_with_zeros: self.failing_with_zeros + o.failing_with_zeros,
            selected: self.selected + o.selected,
            selected_failing: self.selected_failing + o.selected_failing,
            selected_failing_with_zeros: self.selected_failing_with_zeros + o.selected_failing_with_zeros,
        }
    }
}

/// Hard properties of every extracted cutset plus translation covariance.
/// Counts restricted to the selected family `Γ` are informational.
pub fn cutset_suite(torus: &Torus, corpus: &Corpus) -> SuiteReport {
    let per: Vec<CutsetTally> = corpus
        .colorings
        .par_iter()
        .map(|chi| {
            let ex = extract_all(chi);
            let zeros = chi.zero_set();
            let mut t = CutsetTally {
                cutsets: ex.cutsets.len() as u64,
                ..CutsetTally::default()
            };
            for (cs, report) in ex.cutsets.iter().zip(&ex.reports) {
                for (k, check) in report.checks.iter().enumerate() {
                    if check.witness.is_some() {
                        t.by_property[k] += 1;
                    }
                }
                if !report.hard_ok() && !cs.interior().is_disjoint(&zeros) {
                    t.failing_with_zeros += 1;
                }
                t.props.check(report.hard_ok(), || {
                    json!({
                        "coloring": colors_json(chi),
                        "parity": cs.parity,
                        "c": cs.c.to_vec(),
                        "failures": report.failures().collect::<Vec<_>>(),
                    })
                });
            }
            for cs in select_gamma(chi).gamma {
                t.selected += 1;
                if !verify_properties(chi.torus(), &cs, &zeros).hard_ok() {
                    t.selected_failing += 1;
                    if !cs.interior().is_disjoint(&zeros) {
                        t.selected_failing_with_zeros += 1;
                    }
                }
            }
            let w = covariance_witness(chi);
            let ok = w.is_none();
            t.cov.check(ok, || w.unwrap_or(Value::Null));
            t
        })
        .collect();
    let t = per.into_iter().fold(CutsetTally::default(), CutsetTally::merge);
    let (props, cov, by_property) = (t.props, t.cov, t.by_property);
    let names = [
        Property::Minimal,
        Property::BoundaryParity,
        Property::ZeroFree,
        Property::OuterIsExterior,
        Property::InnerIsClosed,
        Property::EdgeCount,
    ];
    let info = json!({
        "colorings": corpus.colorings.len(),
        "exhaustive": corpus.exhaustive,
        "cutsets": t.cutsets,
        "cutsets_failing": props.failures,
        "cutsets_failing_with_zeros_inside": t.failing_with_zeros,
        "selected_cutsets": t.selected,
        "selected_failing": t.selected_failing,
        "selected_failing_with_zeros_inside": t.selected_failing_with_zeros,
        "failures_by_property": names
            .iter()
            .zip(by_property)
            .map(|(p, n)| (json!(p).as_str().unwrap_or_default().to_string(), n))
            .collect::<std::collections::BTreeMap<_, _>>(),
        "covariance_checks": cov.checks,
        "covariance_failures": cov.failures,
        "covariance_witness": cov.witness,
    });
    props.merge(cov).report(Suite::Cutset, torus, info)
}

/// Outcome of the shift surgery over a corpus; feeds the shift,
/// reconstruct and flow suites.
#[derive(Debug, Clone, Default)]
pub struct ShiftRun {
    pub colorings_with_gamma: u64,
    pub contexts: u64,
    pub sampled_contexts: u64,
    pub subsets: u64,
    shift: Tally,
    reconstruct: Tally,
    flow: Tally,
    flow_skipped: u64,
}

impl ShiftRun {
    fn merge(self, o: ShiftRun) -> ShiftRun {
        ShiftRun {
            colorings_with_gamma: self.colorings_with_gamma + o.colorings_with_gamma,
            contexts: self.contexts + o.contexts,
            sampled_contexts: self.sampled_contexts + o.sampled_contexts,
            subsets: self.subsets + o.subsets,
            shift: self.shift.merge(o.shift),
            reconstruct: self.reconstruct.merge(o.reconstruct),
            flow: self.flow.merge(o.flow),
            flow_skipped: self.flow_skipped + o.flow_skipped,
        }
    }
}

fn shift_one(index: usize, chi: &Coloring, opts: &VerifyOptions) -> ShiftRun {
    let torus = chi.torus();
    let mut run = ShiftRun::default();
    let sel = select_gamma(chi);
    if sel.gamma.is_empty() {
        return run;
    }
    run.colorings_with_gamma = 1;
    for (g, cs) in sel.gamma.iter().enumerate() {
        let a = Approximation::exact(torus, cs);
        for s in torus.directions() {
            run.contexts += 1;
            let where_ = || json!({ "coloring": colors_json(chi), "parity": cs.parity, "c": cs.c.to_vec(), "s": s.value() });
            let ctx = match ShiftContext::new(chi, cs, s, &a) {
                Ok(ctx) => ctx,
                Err(e) => {
                    let w = json!({ "at": where_(), "error": e.to_string() });
                    run.shift.check(false, || w.clone());
                    run.reconstruct.check(false, || w.clone());
                    run.flow.check(false, || w);
                    continue;
                }
            };
            let k = ctx.w_s.len();
            let exhaustive = k <= opts.subset_cap as usize;
            let subsets: Vec<_> = if exhaustive {
                (0..1u64 << k).map(|m| ctx.subset(m)).collect()
            } else {
                run.sampled_contexts += 1;
                let stream = ((index as u64) << 16) | ((g as u64) << 8) | s.slot() as u64;
                let mut rng = replica_rng(opts.seed, stream);
                (0..1u64 << opts.subset_cap)
                    .map(|_| torus.vertex_set(ctx.w_s.iter().filter(|_| rng.gen_bool(0.5))))
                    .collect()
            };
            let mut total = BigRational::zero();
            let mut flow_ok = true;
            for set in &subsets {
                run.subsets += 1;
                let image = shift_coloring(&ctx, set);
                let wit = |e: String| json!({ "at": where_(), "S": set.to_vec(), "error": e });
                run.shift.check(image.is_ok(), || wit(image.as_ref().err().map(|e| e.to_string()).unwrap_or_default()));
                let Ok(image) = image else {
                    flow_ok = false;
                    continue;
                };
                let back = reconstruct(&image, &ctx.w, s);
                let same = back.as_ref().is_ok_and(|b| b == chi);
                run.reconstruct.check(same, || wit(match &back {
                    Ok(b) => format!("reconstruction differs at {} vertices", b.hamming(chi)),
                    Err(e) => e.to_string(),
                }));
                if exhaustive {
                    match torpid_core::peierls::flow_weight(&ctx, &image) {
                        Ok(nu) => total += nu,
                        Err(_) => flow_ok = false,
                    }
                }
            }
            if exhaustive {
                let exact = flow_ok && total.is_one();
                run.flow.check(exact, || json!({ "at": where_(), "sum": total.to_string() }));
            } else {
                run.flow_skipped += 1;
            }
        }
    }
    run
}

/// For every coloring with nonempty selected `Γ`, every selected cutset, every
/// direction `s` and every `S ⊆ W^s` (sampled past the cap): `χ^s_S` is proper,
/// reconstructs to `χ`, and the flow weights over all `S` sum to exactly one.
pub fn shift_run(corpus: &Corpus, opts: &VerifyOptions) -> ShiftRun {
    corpus
        .colorings
        .par_iter()
        .enumerate()
        .map(|(i, chi)| shift_one(i, chi, opts))
        .reduce(ShiftRun::default, ShiftRun::merge)
}

impl ShiftRun {
    fn info(&self, corpus: &Corpus) -> Value {
        json!({
            "colorings": corpus.colorings.len(),
            "exhaustive": corpus.exhaustive,
            "colorings_with_gamma": self.colorings_with_gamma,
            "contexts": self.contexts,
            "sampled_contexts": self.sampled_contexts,
            "subsets": self.subsets,
            "flow_skipped_sampled_contexts": self.flow_skipped,
        })
    }

    pub fn report(&self, suite: Suite, torus: &Torus, corpus: &Corpus) -> SuiteReport {
        let tally = match suite {
            Suite::Shift => self.shift.clone(),
            Suite::Reconstruct => self.reconstruct.clone(),
            Suite::Flow => self.flow.clone(),
            _ => panic!("{} is not a shift suite", suite.name()),
        };
        tally.report(suite, torus, self.info(corpus))
    }
}

/// The Chernoff grid over `M ≤ 64` with `β ∈ {k/M} ∪ {k/64} ∪ {k/100}`,
/// `comp` bounds on small and random pairs, and the free-choice bound on
/// `T_{4,1}`. The entropy condition, the small-class exponent and, when the
/// instance enumerates, the small-class census are informational.
pub fn bounds_suite(torus: &Torus, opts: &VerifyOptions) -> Result<SuiteReport, CliError> {
    let mut chernoff = Tally::default();
    for m in 1..=64u64 {
        let mut betas: BTreeSet<Ratio<u64>> = (1..=m / 2).map(|k| Ratio::new(k, m)).collect();
        betas.extend((1..=32).map(|k| Ratio::new(k, 64)));
        betas.extend((1..=50).map(|k| Ratio::new(k, 100)));
        for beta in betas {
            let c = chernoff_bound_check(m, beta)?;
            chernoff.check(c.holds, || json!(c));
        }
    }

    let mut comp = Tally::default();
    // every valid pair with |A| + |B| ≤ 3, then random pairs
    let n = torus.len();
    let mut small: Vec<Vec<usize>> = vec![vec![]];
    for x in 0..n {
        small.push(vec![x]);
        for y in x + 1..n {
            small.push(vec![x, y]);
            for z in y + 1..n {
                small.push(vec![x, y, z]);
            }
        }
    }
    for vs in &small {
        let a = torus.vertex_set(vs.iter().copied().filter(|&v| torus.is_even(v)));
        let b = torus.vertex_set(vs.iter().copied().filter(|&v| !torus.is_even(v)));
        if let Ok(c) = comp_count(torus, &a, &b) {
            comp.check(c.holds, || json!({ "A": a.to_vec(), "B": b.to_vec(), "comp": c.comp }));
        }
    }
    let mut rng = replica_rng(opts.seed, 0xb0);
    for _ in 0..opts.random_pairs {
        let (pa, pb) = (rng.gen_range(0.0..0.6), rng.gen_range(0.0..0.6));
        let (a, b) = random_valid_pair(torus, &mut rng, pa, pb);
        let c = comp_count(torus, &a, &b)?;
        comp.check(c.holds, || json!({ "A": a.to_vec(), "B": b.to_vec(), "comp": c.comp }));
    }

    let cycle = Torus::new(4, 1)?;
    let fc = free_choice_check(&enumerate(&cycle, DEFAULT_STATE_BUDGET)?);
    let mut free = Tally::default();
    for _ in 0..fc.pairs - fc.violations.len() {
        free.check(true, || Value::Null);
    }
    for v in &fc.violations {
        free.check(false, || json!({ "torus": "T_{4,1}", "A": v.0, "B": v.1 }));
    }

    let entropy = entropy_condition(opts.rho)?;
    let census = match enumerate(torus, opts.state_budget) {
        Ok(idx) => json!(bounds::small_class_census(&idx, opts.rho)),
        Err(e) => json!({ "skipped": e.to_string() }),
    };
    let info = json!({
        "chernoff_checks": chernoff.checks,
        "comp_checks": comp.checks,
        "free_choice_pairs": fc.pairs,
        "free_choice_tight": fc.tight,
        "entropy": entropy,
        "entropy_threshold": bounds::entropy_threshold(1e-12),
        "small_class_exponent": bounds::small_class_exponent(opts.rho.to_f64(), torus.dim()),
        "small_class_census": census,
    });
    Ok(chernoff.merge(comp).merge(free).report(Suite::Bounds, torus, info))
}

/// Exact Metropolis kernel: symmetric, doubly stochastic, ergodic, converging
/// to uniform, and mixing no faster than the conductance bound.
pub fn kernel_suite(torus: &Torus, opts: &VerifyOptions) -> Result<SuiteReport, CliError> {
    let idx = enumerate(torus, opts.state_budget)?;
    let spec = ChainSpec::metropolis(opts.rho, opts.seed, 0);
    let kernel = exact_kernel(&idx, &spec, DEFAULT_KERNEL_BUDGET)?;
    let mut t = Tally::default();
    t.check(kernel.is_symmetric(), || json!("kernel is not symmetric"));
    t.check(kernel.is_doubly_stochastic(), || json!("kernel is not doubly stochastic"));
    let ergodic = kernel.check_ergodic();
    t.check(ergodic.is_ok(), || json!(ergodic.as_ref().err().map(|e| e.to_string())));
    let conductance = conductance_check(&idx, &kernel, opts.rho)?;
    t.check(conductance.holds, || json!(conductance));
    Ok(t.report(Suite::Kernel, torus, json!({ "states": idx.len(), "conductance": conductance })))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConductanceCheck {
    pub rho: Rho,
    pub pi_a: String,
    pub pi_m: String,
    pub bound: String,
    pub bound_f64: f64,
    pub symmetrized: String,
    pub tau: u64,
    pub starts: usize,
    /// `τ ≥ π(A)/(8π(M))`, compared exactly.
    pub holds: bool,
    pub tv_after_tau_plus_one: f64,
}

/// The support hypothesis is checked on every kernel row before the bound is
/// formed; `τ` uses orbit-reduced starts from dimension 2 up.
pub fn conductance_check(idx: &StateIndex, kernel: &exactgibbs::ExactKernel, rho: Rho) -> Result<ConductanceCheck, CliError> {
    let report = exact_conductance_bound(idx, kernel, rho)?;
    let mixing = if idx.torus().dim() >= 2 {
        exact_mixing_time_reduced(idx, kernel, DEFAULT_MIXING_CAP)?
    } else {
        exact_mixing_time(kernel, DEFAULT_MIXING_CAP)?
    };
    let worst = mixing
        .starts
        .iter()
        .map(|&s| power_iteration_tv(kernel, s, mixing.tau + 1))
        .fold(0.0, f64::max);
    Ok(ConductanceCheck {
        rho,
        pi_a: report.pi_a.to_string(),
        pi_m: report.pi_m.to_string(),
        bound: report.bound.to_string(),
        bound_f64: report.bound.to_f64(),
        symmetrized: report.symmetrized.to_string(),
        tau: mixing.tau,
        starts: mixing.starts.len(),
        holds: report.bound.is_at_most(mixing.tau),
        tv_after_tau_plus_one: worst,
    })
}

/// Runs `suites` on `torus`; the shift family shares one pass over the corpus.
pub fn run_suites(torus: &Torus, suites: &[Suite], opts: &VerifyOptions) -> Result<Vec<SuiteReport>, CliError> {
    let needs_corpus = suites.iter().any(|s| matches!(s, Suite::Cutset | Suite::Shift | Suite::Flow | Suite::Reconstruct));
    let corpus = if needs_corpus { Some(corpus(torus, opts)?) } else { None };
    let needs_shift = suites.iter().any(|s| matches!(s, Suite::Shift | Suite::Flow | Suite::Reconstruct));
    let shift = match (&corpus, needs_shift) {
        (Some(c), true) => Some(shift_run(c, opts)),
        _ => None,
    };
    let mut out = Vec::new();
    for &suite in suites {
        let report = match suite {
            Suite::Cutset => cutset_suite(torus, corpus.as_ref().expect("corpus built")),
            Suite::Shift | Suite::Flow | Suite::Reconstruct => {
                shift.as_ref().expect("shift run").report(suite, torus, corpus.as_ref().expect("corpus built"))
            }
            Suite::Bounds => bounds_suite(torus, opts)?,
            Suite::Kernel => kernel_suite(torus, opts)?,
        };
        out.push(report);
    }
    Ok(out)
}
