//! Randomized invariants across modules.

use proptest::prelude::*;
use torpid_core::bounds::{chernoff_bound_check, comp_count, entropy, random_valid_pair};
use torpid_core::coloring::is_independent;
use torpid_core::cutset::{extract_all, select_gamma};
use torpid_core::exactgibbs::{enumerate, DEFAULT_STATE_BUDGET};
use torpid_core::glauber::{replica_rng, run, Chain, ChainKind, ChainSpec};
use torpid_core::peierls::{flow_weight, reconstruct, shift_coloring, Approximation, ShiftContext};
use torpid_core::{Coloring, Parity, Phase, Rho, Torus};

fn torus_strategy() -> impl Strategy<Value = Torus> {
    prop_oneof![
        Just((4usize, 1usize)),
        Just((6, 1)),
        Just((4, 2)),
        Just((6, 2)),
        Just((4, 3))
    ]
    .prop_map(|(l, d)| Torus::new(l, d).unwrap())
}

fn subset(t: &Torus, bits: &[bool]) -> torpid_core::VertexSet {
    t.vertex_set((0..t.len()).filter(|&v| bits[v % bits.len()]))
}

/// A Metropolis state `steps` moves from the even ground state.
fn mcmc(t: &Torus, seed: u64, steps: u64) -> Coloring {
    let spec = ChainSpec::metropolis(Rho::new(1, 2).unwrap(), seed, steps);
    let mut chain = Chain::new(&Coloring::ground_state(t, Parity::Even), &spec).unwrap();
    for _ in 0..steps {
        chain.step();
    }
    chain.coloring()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_identities(t in torus_strategy(), bits in prop::collection::vec(any::<bool>(), 1..64)) {
        let x = subset(&t, &bits);
        let degree_sum: usize = x.iter().map(|v| t.degree() - t.degree_in(v, &x)).sum();
        prop_assert_eq!(t.edge_boundary(&x).len(), degree_sum);
        prop_assert!(t.interior_boundary(&x).is_subset(&x));
        prop_assert!(t.exterior_boundary(&x).is_disjoint(&x));
        prop_assert_eq!(t.closure(&x), x.union(&t.exterior_boundary(&x)));
    }

    #[test]
    fn shifts_commute_with_boundaries(t in torus_strategy(), bits in prop::collection::vec(any::<bool>(), 1..64), k in 0usize..6) {
        let x = subset(&t, &bits);
        let s = t.directions()[k % t.directions().len()];
        prop_assert_eq!(t.shift(&t.exterior_boundary(&x), s), t.exterior_boundary(&t.shift(&x, s)));
        prop_assert_eq!(t.shift(&t.interior_boundary(&x), s), t.interior_boundary(&t.shift(&x, s)));
        prop_assert_eq!(t.shift(&t.shift(&x, s), s.reverse()), x);
    }

    #[test]
    fn chains_stay_proper_and_local(
        seed in any::<u64>(),
        block in 1usize..=3,
        which in 0usize..3,
    ) {
        let t = Torus::new(4, [1, 2, 3][which]).unwrap();
        let rho = Rho::new(3, 4).unwrap();
        for kind in [ChainKind::Metropolis, ChainKind::RhoLocalBlock { block_size: block }] {
            let spec = ChainSpec { kind, rho, seed, stream: 0, steps: 400, stride: 1 };
            let mut chain = Chain::new(&Coloring::ground_state(&t, Parity::Odd), &spec).unwrap();
            for _ in 0..400 {
                let before = chain.coloring();
                let changed = chain.step();
                let after = chain.coloring();
                prop_assert!(chain.is_proper());
                prop_assert_eq!(before.hamming(&after), changed);
                prop_assert!(changed <= rho.max_changes(t.len()));
                prop_assert_eq!(chain.imbalance(), after.imbalance());
                prop_assert!(is_independent(&t, &after.zero_set()));
            }
        }
    }

    #[test]
    fn color_swap_and_shift_covariance_of_phase(seed in any::<u64>(), k in 0usize..4) {
        let t = Torus::new(4, 2).unwrap();
        let chi = mcmc(&t, seed, 300);
        let rho = Rho::new(11, 50).unwrap();
        let swapped = chi.permute_colors([0, 2, 1]);
        prop_assert_eq!(swapped.zero_set(), chi.zero_set());
        prop_assert_eq!(swapped.classify(rho), chi.classify(rho));
        let moved = chi.shifted(t.directions()[k]).classify(rho);
        let here = chi.classify(rho);
        prop_assert_eq!(moved.imbalance, -here.imbalance);
        prop_assert_eq!(moved.tag, here.tag.opposite());
    }

    #[test]
    fn extraction_is_translation_covariant(seed in any::<u64>(), k in 0usize..6) {
        let t = Torus::new(4, 3).unwrap();
        let chi = mcmc(&t, seed, 3_000);
        let s = t.directions()[k];
        let mut expected: Vec<_> = extract_all(&chi)
            .cutsets
            .iter()
            .map(|cs| (cs.parity.flip(), t.shift(&cs.c, s).to_vec(), cs.size()))
            .collect();
        let mut actual: Vec<_> = extract_all(&chi.shifted(s))
            .cutsets
            .iter()
            .map(|cs| (cs.parity, cs.c.to_vec(), cs.size()))
            .collect();
        expected.sort();
        actual.sort();
        prop_assert_eq!(expected, actual);
    }

    #[test]
    fn selected_interiors_are_disjoint(seed in any::<u64>()) {
        let t = Torus::new(4, 3).unwrap();
        let chi = mcmc(&t, seed, 3_000);
        let sel = select_gamma(&chi);
        if sel.coverage_ok {
            for (i, a) in sel.gamma.iter().enumerate() {
                for b in &sel.gamma[i + 1..] {
                    prop_assert!(a.interior().is_disjoint(b.interior()));
                }
            }
        }
    }

    #[test]
    fn shifted_colorings_are_proper_and_invertible(seed in any::<u64>(), mask in any::<u64>()) {
        let t = Torus::new(4, 3).unwrap();
        let chi = mcmc(&t, seed, 3_000);
        for cs in select_gamma(&chi).gamma {
            let a = Approximation::exact(&t, &cs);
            for s in t.directions() {
                let ctx = ShiftContext::new(&chi, &cs, s, &a).unwrap();
                let image = shift_coloring(&ctx, &ctx.subset(mask)).unwrap();
                prop_assert_eq!(reconstruct(&image, &ctx.w, s).unwrap(), chi.clone());
                prop_assert!(flow_weight(&ctx, &image).is_ok());
            }
        }
    }

    #[test]
    fn chernoff_holds(m in 1u64..=64, num in 1u64..=32) {
        let c = chernoff_bound_check(m, num_rational::Ratio::new(num, 64)).unwrap();
        prop_assert!(c.holds, "{:?}", c);
    }

    #[test]
    fn entropy_is_symmetric(x in 0.0f64..1.0) {
        prop_assert!((entropy(x) - entropy(1.0 - x)).abs() < 1e-12);
        prop_assert!(entropy(x) <= 1.0 + 1e-15);
    }

    #[test]
    fn comp_bound_on_random_pairs(seed in any::<u64>(), pa in 0.0f64..0.7, pb in 0.0f64..0.7, big in any::<bool>()) {
        let t = Torus::new(4, if big { 3 } else { 2 }).unwrap();
        let mut rng = replica_rng(seed, 0);
        let (a, b) = random_valid_pair(&t, &mut rng, pa, pb);
        let c = comp_count(&t, &a, &b).unwrap();
        prop_assert!(c.holds, "{:?} {:?} {:?}", a, b, c);
    }

    #[test]
    fn rho_round_trips(num in 1u64..1000, extra in 0u64..1000) {
        let r = Rho::new(num, num + extra).unwrap();
        prop_assert_eq!(r.to_string().parse::<Rho>().unwrap(), r);
        let json = serde_json::to_string(&r).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rho>(&json).unwrap(), r);
    }

    #[test]
    fn coloring_json_round_trips(seed in any::<u64>()) {
        let t = Torus::new(4, 2).unwrap();
        let chi = mcmc(&t, seed, 200);
        prop_assert_eq!(Coloring::from_json(&chi.to_json()).unwrap(), chi);
    }
}

#[test]
fn shifts_are_automorphisms_flipping_parity() {
    for d in [2, 3] {
        let t = Torus::new(4, d).unwrap();
        for s in t.directions() {
            let moved = |v: usize| t.neighbor(v, s);
            assert_eq!(t.shift(&t.class(Parity::Even), s), t.class(Parity::Odd));
            if d == 2 {
                for u in 0..t.len() {
                    for v in 0..t.len() {
                        assert_eq!(t.are_adjacent(u, v), t.are_adjacent(moved(u), moved(v)));
                    }
                }
            }
        }
    }
}

#[test]
fn phase_symmetry_exhaustive_on_cycle() {
    let t = Torus::new(4, 1).unwrap();
    let idx = enumerate(&t, DEFAULT_STATE_BUDGET).unwrap();
    for rho in ["0.1", "0.22", "0.5", "1"] {
        let rho: Rho = rho.parse().unwrap();
        for i in 0..idx.len() {
            let chi = idx.coloring(i);
            assert!(is_independent(&t, &chi.zero_set()));
            for s in t.directions() {
                let a = chi.classify(rho);
                let b = chi.shifted(s).classify(rho);
                assert_eq!(b.imbalance, -a.imbalance);
                assert_eq!(b.tag, a.tag.opposite());
                if a.tag == Phase::Balanced {
                    assert_eq!(b.tag, Phase::Balanced);
                }
            }
        }
    }
}

#[test]
fn trajectories_are_reproducible() {
    let t = Torus::new(4, 3).unwrap();
    let spec = ChainSpec {
        stride: 7,
        ..ChainSpec::metropolis(Rho::new(11, 50).unwrap(), 42, 5_000)
    };
    let start = Coloring::ground_state(&t, Parity::Even);
    assert_eq!(run(&start, &spec).unwrap(), run(&start, &spec).unwrap());
    let other = ChainSpec { stream: 1, ..spec };
    assert_ne!(run(&start, &spec).unwrap().imbalances, run(&start, &other).unwrap().imbalances);
}
