//! Randomized invariants of the two labeling schemes and the verifier, on
//! sparse random graphs and on hub graphs that force high-degree vertices.

mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_cut, fault_sets, gnp, hub_graph, random_terminals, two_groups_survive, Dsu};
use ftsteiner::scheme::{build_labels, query, query_with, LabelBody, Pivot, Role, SchemeLabel, Witness};
use ftsteiner::verify::{exhaustive_verify, VerifyOptions};
use ftsteiner::warmup::{build_warmup_labels, query_warmup, WarmupLabel};
use ftsteiner::{Error, Graph, SchemeKind, TerminalSet, Vertex};

fn instance(seed: u64) -> (Graph, TerminalSet, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match rng.gen_range(0..4) {
        0 => {
            let n = rng.gen_range(3..=11);
            let p = rng.gen_range(0.15..0.6);
            let g = gnp(&mut rng, n, p);
            let u = random_terminals(&mut rng, n, 2);
            (g, u, rng.gen_range(1..=3))
        }
        1 => {
            let leaves = rng.gen_range(7..=10);
            let (g, u) = hub_graph(&mut rng, 1, leaves, 0.05);
            (g, u, 2)
        }
        2 => {
            let (g, u) = hub_graph(&mut rng, 2, 6, 0.05);
            (g, u, 2)
        }
        _ => {
            let (g, u) = hub_graph(&mut rng, 1, 12, 0.05);
            (g, u, 3)
        }
    }
}

fn refs<'a>(labels: &'a [SchemeLabel], faults: &[Vertex]) -> Vec<&'a SchemeLabel> {
    faults.iter().map(|&v| &labels[v as usize]).collect()
}

/// Replays a YES witness against the graph.
fn witness_holds(g: &Graph, u: &TerminalSet, faults: &[Vertex], w: &Witness) -> bool {
    match w {
        Witness::CutBit { vertex } => faults == [*vertex] && brute_cut(g, u, faults),
        Witness::Subset { k } => k.iter().all(|v| faults.contains(v)) && two_groups_survive(g, u, k, faults),
        Witness::DisconnectedPair { pivot, other } => {
            let mut dsu = Dsu::new(g.n());
            for &(a, b) in g.edges() {
                if !faults.contains(&a) && !faults.contains(&b) {
                    dsu.union(a as usize, b as usize);
                }
            }
            let alive = |v: Vertex| !faults.contains(&v);
            let mut reaches = |v: Vertex| u.iter().any(|t| alive(t) && dsu.find(t as usize) == dsu.find(v as usize));
            let both_reach = reaches(*pivot) && reaches(*other);
            alive(*pivot) && alive(*other) && both_reach && dsu.find(*pivot as usize) != dsu.find(*other as usize)
        }
    }
}

#[test]
fn hub_instances_do_exercise_high_degree_vertices() {
    let with_bad =
        (0..64u64).map(instance).filter(|(g, u, f)| !build_labels(g, u, *f).unwrap()[0].bad_set().is_empty()).count();
    assert!(with_bad >= 20, "only {with_bad} of 64 instances have high-degree vertices");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn main_scheme_is_sound_and_complete(seed in any::<u64>()) {
        let (g, u, f) = instance(seed);
        let labels = build_labels(&g, &u, f).unwrap();
        for faults in fault_sets(g.n(), f) {
            let ans = query(&refs(&labels, &faults)).unwrap();
            prop_assert_eq!(ans.verdict, brute_cut(&g, &u, &faults), "F={:?}", faults);
            prop_assert_eq!(ans.verdict, ans.witness.is_some());
            if let Some(w) = &ans.witness {
                prop_assert!(witness_holds(&g, &u, &faults, w), "F={:?} witness {:?}", faults, w);
            }
            let other = query_with(&refs(&labels, &faults), Pivot::Largest).unwrap();
            prop_assert_eq!(other.verdict, ans.verdict);
        }
    }

    #[test]
    fn every_label_stores_all_bad_vertices(seed in any::<u64>()) {
        let (g, u, f) = instance(seed);
        let labels = build_labels(&g, &u, f).unwrap();
        let bad = labels[0].bad_set();
        let r = labels[0].meta().r as usize;
        let binom = |n: usize, k: usize| (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1));
        for label in &labels {
            // Every query sees all of B − F among its stored entries.
            prop_assert_eq!(label.bad_set(), bad.clone());
            if let LabelBody::Full(full) = label.body() {
                match full.role() {
                    Role::Low { neighbors } => {
                        prop_assert!(!bad.contains(&label.owner()));
                        prop_assert!(neighbors.len() <= r);
                    }
                    Role::High { hat_map } => {
                        prop_assert!(bad.contains(&label.owner()));
                        let bound: usize = (0..f.min(bad.len())).map(|k| binom(bad.len() - 1, k)).sum();
                        prop_assert!(hat_map.len() <= bound);
                        prop_assert!(hat_map.keys().all(|k| k.contains(&label.owner()) && k.len() <= f));
                    }
                }
            }
        }
    }

    #[test]
    fn main_scheme_is_invariant_under_relabeling(seed in any::<u64>()) {
        let (g, u, f) = instance(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let mut perm: Vec<Vertex> = (0..g.n() as Vertex).collect();
        perm.shuffle(&mut rng);
        let pg = Graph::new(g.n(), g.edges().iter().map(|&(a, b)| (perm[a as usize], perm[b as usize]))).unwrap();
        let pu = TerminalSet::new(g.n(), u.iter().map(|t| perm[t as usize])).unwrap();
        let labels = build_labels(&g, &u, f).unwrap();
        let plabels = build_labels(&pg, &pu, f).unwrap();
        for faults in fault_sets(g.n(), f) {
            let mapped: Vec<Vertex> = faults.iter().map(|&v| perm[v as usize]).collect();
            prop_assert_eq!(
                query(&refs(&labels, &faults)).unwrap().verdict,
                query(&refs(&plabels, &mapped)).unwrap().verdict
            );
        }
    }

    #[test]
    fn warmup_agrees_with_main_scheme(seed in any::<u64>()) {
        let (g, u, f) = instance(seed);
        let warm = match build_warmup_labels(&g, &u, f) {
            Ok(w) => w,
            Err(Error::RecursionBudgetExceeded { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let main = build_labels(&g, &u, f).unwrap();
        for faults in fault_sets(g.n(), f) {
            let w: Vec<&WarmupLabel> = faults.iter().map(|&v| &warm[v as usize]).collect();
            let verdict = query_warmup(&w).unwrap();
            prop_assert_eq!(verdict, brute_cut(&g, &u, &faults), "F={:?}", faults);
            prop_assert_eq!(verdict, query(&refs(&main, &faults)).unwrap().verdict);
        }
    }

    #[test]
    fn labels_roundtrip_through_bytes(seed in any::<u64>()) {
        let (g, u, f) = instance(seed);
        for label in build_labels(&g, &u, f).unwrap() {
            prop_assert_eq!(SchemeLabel::from_bytes(&label.to_bytes()).unwrap(), label);
        }
        if let Ok(warm) = build_warmup_labels(&g, &u, f) {
            for label in warm {
                prop_assert_eq!(WarmupLabel::from_bytes(&label.to_bytes()).unwrap(), label);
            }
        }
    }
}

#[test]
fn verification_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = gnp(&mut rng, 40, 0.1);
    let u = random_terminals(&mut rng, 40, 2);
    let opts = VerifyOptions { budget: 100, samples: 300, seed: 5, ..Default::default() };
    for scheme in [SchemeKind::Main, SchemeKind::Warmup] {
        let a = exhaustive_verify(&g, &u, 3, scheme, &opts).unwrap();
        let b = exhaustive_verify(&g, &u, 3, scheme, &opts).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.pass, "{scheme:?}: {:?}", a.mismatches.first());
    }
}
