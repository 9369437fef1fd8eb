//! Randomized invariants of the graph primitives, the decomposition, the
//! connectivity labels and the subset labels.

mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    brute_connected, brute_cut, decomposition_holds, fault_sets, gnp, hub_graph, random_terminals, two_groups_survive,
    Dsu,
};
use ftsteiner::decomp::{decompose, minimal_steiner_forest, verify_decomposition};
use ftsteiner::graph::{components, separates, subdivide_edges};
use ftsteiner::st::{build_reach_labels, build_st_labels, query_reach, query_st, ReachLabel, StLabel};
use ftsteiner::subset::{build_coarse_subset_label, build_subset_label, query_coarse_subset_label, SubsetKind};
use ftsteiner::{is_steiner_cut, Graph, TerminalSet, Vertex};

fn small_instance(seed: u64, max_n: usize) -> (Graph, TerminalSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_n);
    let p = rng.gen_range(0.1..0.7);
    let g = gnp(&mut rng, n, p);
    let u = random_terminals(&mut rng, n, 0);
    (g, u)
}

fn random_subset(rng: &mut impl Rng, n: usize, p: f64) -> Vec<Vertex> {
    (0..n as Vertex).filter(|_| rng.gen_bool(p)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn steiner_cut_matches_brute_force(seed in any::<u64>()) {
        let (g, u) = small_instance(seed, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let faults = random_subset(&mut rng, g.n(), 0.3);
        prop_assert_eq!(is_steiner_cut(&g, &u, &faults), brute_cut(&g, &u, &faults));
    }

    #[test]
    fn at_most_one_terminal_is_never_cut(seed in any::<u64>()) {
        let (g, _) = small_instance(seed, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let one = TerminalSet::new(g.n(), [rng.gen_range(0..g.n() as Vertex)]).unwrap();
        let faults = random_subset(&mut rng, g.n(), 0.4);
        prop_assert!(!is_steiner_cut(&g, &one, &faults));
        prop_assert!(!is_steiner_cut(&g, &TerminalSet::new(g.n(), []).unwrap(), &faults));
    }

    #[test]
    fn separation_is_monotone_in_the_cut(seed in any::<u64>()) {
        let (g, u) = small_instance(seed, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let k = random_subset(&mut rng, g.n(), 0.2);
        if separates(&g, &k, u.as_slice()) {
            // Grow K while keeping one separated pair of W out of it.
            let comps = components(&g, &k);
            let rest: Vec<Vertex> = u.iter().filter(|t| !k.contains(t)).collect();
            let (a, b) = rest
                .iter()
                .flat_map(|&a| rest.iter().map(move |&b| (a, b)))
                .find(|&(a, b)| !comps.connected(a, b))
                .unwrap();
            let mut bigger = k.clone();
            bigger.extend(random_subset(&mut rng, g.n(), 0.3).into_iter().filter(|&v| v != a && v != b));
            bigger.sort_unstable();
            bigger.dedup();
            prop_assert!(separates(&g, &bigger, u.as_slice()));
        }
    }

    #[test]
    fn subdivision_turns_edge_faults_into_vertex_faults(seed in any::<u64>()) {
        let (g, _) = small_instance(seed, 7);
        let s = subdivide_edges(&g);
        let edges = g.edges().to_vec();
        let mut sets: Vec<Vec<(Vertex, Vertex)>> = vec![vec![]];
        for (i, &e) in edges.iter().enumerate() {
            sets.push(vec![e]);
            for &e2 in &edges[i + 1..] {
                sets.push(vec![e, e2]);
            }
        }
        for dead in sets {
            let mut dsu = Dsu::new(g.n());
            for e in edges.iter().filter(|e| !dead.contains(e)) {
                dsu.union(e.0 as usize, e.1 as usize);
            }
            let removed: Vec<Vertex> = dead.iter().map(|&(a, b)| s.edge_vertex(a, b).unwrap()).collect();
            let comps = components(&s.graph, &removed);
            for a in 0..g.n() {
                for b in a + 1..g.n() {
                    prop_assert_eq!(comps.connected(a as Vertex, b as Vertex), dsu.find(a) == dsu.find(b));
                }
            }
        }
    }

    #[test]
    fn steiner_cut_is_invariant_under_relabeling(seed in any::<u64>()) {
        let (g, u) = small_instance(seed, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        let mut perm: Vec<Vertex> = (0..g.n() as Vertex).collect();
        perm.shuffle(&mut rng);
        let pg = Graph::new(g.n(), g.edges().iter().map(|&(a, b)| (perm[a as usize], perm[b as usize]))).unwrap();
        let pu = TerminalSet::new(g.n(), u.iter().map(|t| perm[t as usize])).unwrap();
        for faults in fault_sets(g.n(), 2) {
            let mapped: Vec<Vertex> = faults.iter().map(|&v| perm[v as usize]).collect();
            prop_assert_eq!(is_steiner_cut(&g, &u, &faults), is_steiner_cut(&pg, &pu, &mapped));
        }
    }

    #[test]
    fn decomposition_properties_hold(seed in any::<u64>(), r in 3usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(5..60);
        let (g, u) = if rng.gen_bool(0.5) {
            let p = rng.gen_range(0.02..0.3);
            let g = gnp(&mut rng, n, p);
            let u = random_terminals(&mut rng, n, 0);
            (g, u)
        } else {
            let (hubs, leaves) = (rng.gen_range(1..4), rng.gen_range(3..10));
            hub_graph(&mut rng, hubs, leaves, 0.05)
        };
        let d = decompose(&g, &u, r).unwrap();
        prop_assert!(verify_decomposition(&g, &u, r, &d).all_hold());
        prop_assert!(decomposition_holds(&g, &u, r, &d));
        let again = decompose(&g, &u, r).unwrap();
        prop_assert_eq!(serde_json::to_string(&d).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn minimal_forest_leaves_are_terminals_and_high_degrees_are_few(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(3..50);
        let p = rng.gen_range(0.05..0.4);
        let g = gnp(&mut rng, n, p);
        let u = random_terminals(&mut rng, n, 0);
        let t = minimal_steiner_forest(&g, &u);
        let mut dsu = Dsu::new(n);
        for &(a, b) in t.edges() {
            prop_assert!(g.has_edge(a, b));
            prop_assert!(dsu.find(a as usize) != dsu.find(b as usize));
            dsu.union(a as usize, b as usize);
        }
        let mut degree = vec![0usize; n];
        for &(a, b) in t.edges() {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        for (v, &deg) in degree.iter().enumerate() {
            if deg == 1 {
                prop_assert!(u.contains(v as Vertex), "non-terminal leaf {}", v);
            }
        }
        for r in 3..8 {
            let mut leaves = vec![0usize; n];
            let mut high = vec![0usize; n];
            for (v, &deg) in degree.iter().enumerate() {
                let root = dsu.find(v);
                leaves[root] += usize::from(deg == 1);
                high[root] += usize::from(deg >= r);
            }
            for root in 0..n {
                prop_assert!(high[root] * (r - 2) <= leaves[root].saturating_sub(2), "r={} tree {}", r, root);
            }
        }
    }

    #[test]
    fn st_labels_match_bfs(seed in any::<u64>(), f in 1usize..=2) {
        let (g, _) = small_instance(seed, 8);
        let labels = build_st_labels(&g, f).unwrap();
        let n = g.n() as Vertex;
        for faults in fault_sets(g.n(), f).into_iter().chain([vec![]]) {
            let fl: Vec<&StLabel> = faults.iter().map(|&v| &labels[v as usize]).collect();
            for s in (0..n).filter(|v| !faults.contains(v)) {
                for t in (s..n).filter(|v| !faults.contains(v)) {
                    let got = query_st(&fl, &labels[s as usize], &labels[t as usize]).unwrap();
                    prop_assert_eq!(got, brute_connected(&g, &faults, s, t));
                }
            }
        }
    }

    #[test]
    fn reach_agrees_with_st_over_terminals(seed in any::<u64>(), f in 1usize..=2) {
        let (g, u) = small_instance(seed, 8);
        let st = build_st_labels(&g, f).unwrap();
        let reach = build_reach_labels(&g, &u, f).unwrap();
        let n = g.n() as Vertex;
        for faults in fault_sets(g.n(), f).into_iter().filter(|fs| fs.len() < f).chain([vec![]]) {
            let sf: Vec<&StLabel> = faults.iter().map(|&v| &st[v as usize]).collect();
            let rf: Vec<&ReachLabel> = faults.iter().map(|&v| &reach[v as usize]).collect();
            for x in (0..n).filter(|v| !faults.contains(v)) {
                let via_st = u
                    .iter()
                    .filter(|t| !faults.contains(t))
                    .any(|t| query_st(&sf, &st[x as usize], &st[t as usize]).unwrap());
                prop_assert_eq!(query_reach(&reach[x as usize], &rf).unwrap(), via_st);
            }
        }
    }

    #[test]
    fn subset_labels_are_exact_and_well_formed(seed in any::<u64>(), f in 1usize..=3) {
        let (g, u) = small_instance(seed, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
        let k = random_subset(&mut rng, g.n(), 0.3);
        let label = build_subset_label(&g, &u, &k, f).unwrap();
        let coarse = build_coarse_subset_label(&g, &u, &k, f);
        let groups: Vec<&Vec<Vertex>> = match label.kind() {
            SubsetKind::AlwaysYes => vec![],
            SubsetKind::BigLast { small_groups } => {
                prop_assert!(small_groups.iter().map(Vec::len).sum::<usize>() <= f);
                small_groups.iter().collect()
            }
            SubsetKind::SmallAll { groups } => {
                prop_assert!(groups.iter().map(Vec::len).sum::<usize>() <= 3 * f);
                groups.iter().collect()
            }
        };
        prop_assert!(groups.iter().all(|grp| !grp.is_empty()));
        prop_assert!(groups.windows(2).all(|w| w[0].len() <= w[1].len()));
        let mut members: Vec<Vertex> = groups.iter().flat_map(|grp| grp.iter().copied()).collect();
        let total = members.len();
        members.sort_unstable();
        members.dedup();
        prop_assert_eq!(members.len(), total);
        for faults in fault_sets(g.n(), f).into_iter().chain([vec![]]) {
            let truth = two_groups_survive(&g, &u, &k, &faults);
            prop_assert_eq!(ftsteiner::subset::query_subset_label(&label, &faults), truth);
            prop_assert_eq!(query_coarse_subset_label(&coarse, &faults), truth);
        }
    }
}
