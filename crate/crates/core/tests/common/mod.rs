//! Brute-force helpers shared by the integration tests. They only use the
//! library's graph accessors, never its connectivity code.

#![allow(dead_code)]

use ftsteiner::decomp::Decomposition;
use ftsteiner::{Graph, TerminalSet, Vertex};
use rand::seq::index::sample;
use rand::Rng;

pub struct Dsu(Vec<usize>);

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.0[v] != v {
            self.0[v] = self.0[self.0[v]];
            v = self.0[v];
        }
        v
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// Some two surviving terminals end up in different components once
/// `dead_vertices` and `dead_edges` are deleted.
pub fn brute_cut_mixed(
    n: usize,
    edges: &[(Vertex, Vertex)],
    terminals: &[Vertex],
    dead_vertices: &[Vertex],
    dead_edges: &[(Vertex, Vertex)],
) -> bool {
    let mut dsu = Dsu::new(n);
    for &(a, b) in edges {
        if dead_vertices.contains(&a) || dead_vertices.contains(&b) || dead_edges.contains(&(a, b)) {
            continue;
        }
        dsu.union(a as usize, b as usize);
    }
    let alive: Vec<usize> =
        terminals.iter().filter(|t| !dead_vertices.contains(t)).map(|&t| dsu.find(t as usize)).collect();
    alive.windows(2).any(|w| w[0] != w[1])
}

pub fn brute_cut(g: &Graph, u: &TerminalSet, faults: &[Vertex]) -> bool {
    brute_cut_mixed(g.n(), g.edges(), u.as_slice(), faults, &[])
}

/// Whether `s` and `t` are joined in `g − faults`.
pub fn brute_connected(g: &Graph, faults: &[Vertex], s: Vertex, t: Vertex) -> bool {
    if faults.contains(&s) || faults.contains(&t) {
        return false;
    }
    let mut dsu = Dsu::new(g.n());
    for &(a, b) in g.edges() {
        if !faults.contains(&a) && !faults.contains(&b) {
            dsu.union(a as usize, b as usize);
        }
    }
    dsu.find(s as usize) == dsu.find(t as usize)
}

/// Whether some terminal of `u − faults` is joined to `x` in `g − faults`.
pub fn brute_reach(g: &Graph, u: &TerminalSet, faults: &[Vertex], x: Vertex) -> bool {
    u.iter().any(|t| brute_connected(g, faults, x, t))
}

pub fn gnp(rng: &mut impl Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for a in 0..n as Vertex {
        for b in a + 1..n as Vertex {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn random_terminals(rng: &mut impl Rng, n: usize, min: usize) -> TerminalSet {
    let k = rng.gen_range(min.min(n)..=n);
    TerminalSet::new(n, sample(rng, n, k).into_iter().map(|v| v as Vertex)).unwrap()
}

pub fn fault_sets(n: usize, f: usize) -> Vec<Vec<Vertex>> {
    fn rec(n: Vertex, f: usize, start: Vertex, cur: &mut Vec<Vertex>, out: &mut Vec<Vec<Vertex>>) {
        for v in start..n {
            cur.push(v);
            out.push(cur.clone());
            if cur.len() < f {
                rec(n, f, v + 1, cur, out);
            }
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n as Vertex, f, 0, &mut Vec::new(), &mut out);
    out
}

/// Whether two terminals outside `k ∪ faults` are split in `g − k`.
pub fn two_groups_survive(g: &Graph, u: &TerminalSet, k: &[Vertex], faults: &[Vertex]) -> bool {
    let mut dsu = Dsu::new(g.n());
    for &(a, b) in g.edges() {
        if !k.contains(&a) && !k.contains(&b) {
            dsu.union(a as usize, b as usize);
        }
    }
    let mut roots: Vec<usize> =
        u.iter().filter(|t| !k.contains(t) && !faults.contains(t)).map(|t| dsu.find(t as usize)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len() >= 2
}

/// Independent check of the three decomposition properties.
pub fn decomposition_holds(g: &Graph, u: &TerminalSet, r: usize, d: &Decomposition) -> bool {
    let n = g.n();
    let bad = |v: Vertex| d.bad.contains(&v);
    let mut in_g = Dsu::new(n);
    let mut in_g_minus_b = Dsu::new(n);
    for &(a, b) in g.edges() {
        in_g.union(a as usize, b as usize);
        if !bad(a) && !bad(b) {
            in_g_minus_b.union(a as usize, b as usize);
        }
    }
    let mut in_t = Dsu::new(n);
    let mut in_t_minus_b = Dsu::new(n);
    let mut degree = vec![0usize; n];
    for &(a, b) in d.forest.edges() {
        if !g.has_edge(a, b) || in_t.find(a as usize) == in_t.find(b as usize) {
            return false;
        }
        in_t.union(a as usize, b as usize);
        if !bad(a) && !bad(b) {
            in_t_minus_b.union(a as usize, b as usize);
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
    }
    let ts = u.as_slice();
    for (i, &a) in ts.iter().enumerate() {
        for &b in &ts[i + 1..] {
            let (a, b) = (a as usize, b as usize);
            if in_g.find(a) == in_g.find(b) && in_t.find(a) != in_t.find(b) {
                return false;
            }
            if !bad(a as Vertex)
                && !bad(b as Vertex)
                && in_g_minus_b.find(a) == in_g_minus_b.find(b)
                && in_t_minus_b.find(a) != in_t_minus_b.find(b)
            {
                return false;
            }
        }
    }
    let p2 = degree.iter().all(|&deg| deg <= r);
    let bad_terminals = d.bad.iter().filter(|&&b| u.contains(b)).count();
    let p3 = (d.bad.len() * (r - 2) < u.len() || d.bad.is_empty())
        && (bad_terminals * (r - 1) < u.len() || bad_terminals == 0);
    p2 && p3
}

/// Hubs on a path, each with private terminal leaves, plus a few random
/// chords between leaves. Small enough for exhaustive checks, and the hubs
/// usually keep a high forest degree.
pub fn hub_graph(rng: &mut impl Rng, hubs: usize, leaves: usize, chord_p: f64) -> (Graph, TerminalSet) {
    let n = hubs * (leaves + 1);
    let mut edges: Vec<(Vertex, Vertex)> = (1..hubs as Vertex).map(|h| (h - 1, h)).collect();
    let leaf_ids: Vec<Vertex> = (hubs as Vertex..n as Vertex).collect();
    for (i, &leaf) in leaf_ids.iter().enumerate() {
        edges.push(((i / leaves) as Vertex, leaf));
    }
    for (i, &a) in leaf_ids.iter().enumerate() {
        for &b in &leaf_ids[i + 1..] {
            if rng.gen_bool(chord_p) {
                edges.push((a, b));
            }
        }
    }
    let g = Graph::new(n, edges).unwrap();
    let u = TerminalSet::new(n, leaf_ids).unwrap();
    (g, u)
}
