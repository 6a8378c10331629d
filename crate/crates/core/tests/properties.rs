use std::collections::VecDeque;
use std::f64::consts::PI;

use proptest::prelude::*;

use nodalmag::harness::random::{max_betti, random_graph};
use nodalmag::nodal::sign_changes;
use nodalmag::operators::{
    build_cut, build_decorated, build_magnetic, build_plain, perturbation_matrix, reduce_gauge, CutParams,
    EdgePhaseAssignment, MagneticPhases,
};
use nodalmag::spectral::eigenvalues;
use nodalmag::{CycleStructure, Graph};

fn graph_strategy() -> impl Strategy<Value = Graph> {
    (any::<u64>(), 2usize..=10, 0usize..=5).prop_map(|(seed, n, beta)| {
        random_graph(seed, n, beta.min(max_betti(n))).expect("feasible by construction")
    })
}

fn graph_with_cycles() -> impl Strategy<Value = Graph> {
    (any::<u64>(), 3usize..=9, 1usize..=4).prop_map(|(seed, n, beta)| {
        random_graph(seed, n, beta.min(max_betti(n))).expect("feasible by construction")
    })
}

/// Number of components and whether the edge set contains a cycle, by
/// breadth-first search.
fn components_and_cycle(n: usize, edges: &[(usize, usize)]) -> (usize, bool) {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut visited_edges = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        components += 1;
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                visited_edges += 1;
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    // a forest on n vertices with c components has n - c edges
    (components, visited_edges / 2 != n - components)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn betti_is_edges_minus_vertices_plus_one(g in graph_strategy()) {
        let cs = CycleStructure::new(&g, None);
        prop_assert_eq!(cs.betti() + g.n_vertices(), g.n_edges() + 1);
        prop_assert_eq!(cs.surplus_edges().len(), cs.betti());
    }

    #[test]
    fn removing_surplus_edges_leaves_a_spanning_tree(g in graph_strategy(), seed in proptest::option::of(any::<u64>())) {
        let cs = CycleStructure::new(&g, seed);
        let rest: Vec<_> = g.edges().iter().copied().filter(|e| !cs.surplus_edges().contains(e)).collect();
        prop_assert_eq!(components_and_cycle(g.n_vertices(), &rest), (1, false));
    }

    #[test]
    fn cycle_structure_is_deterministic(g in graph_strategy(), seed in proptest::option::of(any::<u64>())) {
        prop_assert_eq!(CycleStructure::new(&g, seed), CycleStructure::new(&g, seed));
    }

    #[test]
    fn operators_are_exactly_hermitian(
        g in graph_with_cycles(),
        alpha in proptest::collection::vec(-10.0f64..10.0, 4),
        gamma in proptest::collection::vec(prop_oneof![-20.0f64..-0.01, 0.01f64..20.0], 4),
    ) {
        let cs = CycleStructure::new(&g, None);
        let b = cs.betti();
        prop_assert!(build_plain(&g).is_exactly_hermitian());
        let mag = build_magnetic(&g, &cs, &MagneticPhases::new(alpha[..b].to_vec())).unwrap();
        prop_assert!(mag.is_exactly_hermitian());
        let cut = build_cut(&g, &cs, &CutParams::new(gamma[..b].to_vec()).unwrap()).unwrap();
        prop_assert!(cut.is_exactly_hermitian() && cut.is_real());
    }

    #[test]
    fn phases_zero_or_pi_give_real_operators(g in graph_with_cycles(), flips in proptest::collection::vec(any::<bool>(), 4)) {
        let cs = CycleStructure::new(&g, None);
        let alpha: Vec<f64> = flips[..cs.betti()].iter().map(|&f| if f { PI } else { 0.0 }).collect();
        let mag = build_magnetic(&g, &cs, &MagneticPhases::new(alpha)).unwrap();
        prop_assert!(mag.is_real());
    }

    #[test]
    fn cut_plus_perturbations_is_magnetic(
        g in graph_with_cycles(),
        alpha in proptest::collection::vec(-PI..PI, 4),
        gamma in proptest::collection::vec(prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], 4),
    ) {
        let cs = CycleStructure::new(&g, None);
        let b = cs.betti();
        let mag = build_magnetic(&g, &cs, &MagneticPhases::new(alpha[..b].to_vec())).unwrap();
        let mut sum = build_cut(&g, &cs, &CutParams::new(gamma[..b].to_vec()).unwrap()).unwrap();
        for j in 0..b {
            sum = sum.add(&perturbation_matrix(&g, &cs, j, gamma[j], alpha[j]).unwrap());
        }
        let scale = 1.0 + gamma.iter().map(|x| x.abs().max(1.0 / x.abs())).sum::<f64>();
        for u in 0..g.n_vertices() {
            for v in 0..g.n_vertices() {
                prop_assert!((sum.entry(u, v) - mag.entry(u, v)).norm() <= 1e-14 * scale);
            }
        }
    }

    #[test]
    fn perturbation_has_rank_one(
        g in graph_with_cycles(),
        alpha in -PI..PI,
        gamma in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
    ) {
        let cs = CycleStructure::new(&g, None);
        let b = perturbation_matrix(&g, &cs, 0, gamma, alpha).unwrap();
        let sv = b.matrix().clone().singular_values();
        let mut sv: Vec<f64> = sv.iter().copied().collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        prop_assert!(sv[1] < 1e-12 * sv[0]);
    }

    #[test]
    fn gauge_reduction_preserves_spectrum(g in graph_with_cycles(), seed in any::<u64>(), tree in proptest::option::of(any::<u64>())) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cs = CycleStructure::new(&g, tree);
        let entries: Vec<_> = g.edges().iter().map(|&e| (e, rng.gen_range(-PI..PI))).collect();
        let a = EdgePhaseAssignment::from_entries(&g, &entries).unwrap();
        let full = eigenvalues(&build_decorated(&g, &a).unwrap());
        let reduced = eigenvalues(&build_magnetic(&g, &cs, &reduce_gauge(&g, &cs, &a).unwrap()).unwrap());
        for (x, y) in full.iter().zip(&reduced) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn bands_are_even_in_the_phases(g in graph_with_cycles(), alpha in proptest::collection::vec(-PI..PI, 4)) {
        let cs = CycleStructure::new(&g, None);
        let a = alpha[..cs.betti()].to_vec();
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        let plus = eigenvalues(&build_magnetic(&g, &cs, &MagneticPhases::new(a)).unwrap());
        let minus = eigenvalues(&build_magnetic(&g, &cs, &MagneticPhases::new(neg)).unwrap());
        for (x, y) in plus.iter().zip(&minus) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn sign_changes_ignore_global_sign_and_scale(
        g in graph_strategy(),
        signs in proptest::collection::vec(any::<bool>(), 10),
        mags in proptest::collection::vec(0.1f64..2.0, 10),
        scale in 1e-3f64..1e3,
    ) {
        let f: Vec<f64> = (0..g.n_vertices()).map(|i| if signs[i] { mags[i] } else { -mags[i] }).collect();
        let base = sign_changes(&g, &f).unwrap();
        let neg: Vec<f64> = f.iter().map(|x| -x).collect();
        let scaled: Vec<f64> = f.iter().map(|x| x * scale).collect();
        prop_assert_eq!(sign_changes(&g, &neg).unwrap(), base);
        prop_assert_eq!(sign_changes(&g, &scaled).unwrap(), base);
        prop_assert!(base <= g.n_edges());
    }
}
