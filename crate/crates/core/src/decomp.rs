//! Steiner forests with few high-degree vertices.
//!
//! [`decompose`] returns a pair `(T, B)` such that
//!
//! * **P1** `T` is a Steiner forest for `U` in `G`, and `T − B` is a Steiner
//!   forest for `U − B` in `G − B`;
//! * **P2** every vertex of `T − B` has degree at most `r`;
//! * **P3** `|B| < |U|/(r−2)` and `|B ∩ U| < |U|/(r−1)`.
//!
//! The construction is a Fürer–Raghavachari style local search over an
//! edge-minimal Steiner forest. A swap adds a path whose inner vertices are
//! outside `T`, closing a cycle through some vertex `w`, and drops one of
//! `w`'s cycle edges. Swaps are only taken when `w` has degree at least two
//! more than either path endpoint, so the degree sequence of `T` decreases
//! lexicographically and the search terminates.
//!
//! `B` always consists of forest vertices of degree `≥ r` (plus, in rare
//! stuck configurations, a few repair vertices). Since every leaf of `T` is a
//! terminal, a tree with `ℓ` leaves has at most `(ℓ−2)/(r−2)` vertices of
//! degree `≥ r`, which gives P3. The result is machine-checked by
//! [`verify_decomposition`] before it is returned.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{components, components_masked, Graph, TerminalSet, Vertex};

const NONE: u32 = u32::MAX;

/// A forest given by its edge set, with a per-vertex degree table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SteinerForest {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    #[serde(skip)]
    degree: Vec<u32>,
}

impl SteinerForest {
    /// Wraps an edge list without checking it is a forest; see
    /// [`verify_decomposition`] for that.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Self {
        let mut edges: Vec<_> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort_unstable();
        edges.dedup();
        let mut degree = vec![0; n];
        for &(a, b) in &edges {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        SteinerForest { n, edges, degree }
    }

    fn from_adjacency(adj: &[Vec<Vertex>]) -> Self {
        let edges = adj
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| (a as Vertex) < b).map(move |&b| (a as Vertex, b)));
        Self::from_edges(adj.len(), edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.degree[v as usize] as usize
    }

    pub fn max_degree(&self) -> usize {
        self.degree.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn adjacency(&self) -> Vec<Vec<Vertex>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Leaf count of each tree with at least one edge.
    pub fn leaves_per_tree(&self) -> Vec<usize> {
        let g = Graph::new(self.n, self.edges.iter().copied()).expect("forest edges are simple");
        let comps = components(&g, &[]);
        let mut leaves = vec![0usize; comps.count()];
        let mut has_edge = vec![false; comps.count()];
        for v in 0..self.n as Vertex {
            let c = comps.of(v).unwrap() as usize;
            has_edge[c] |= self.degree(v) > 0;
            if self.degree(v) == 1 {
                leaves[c] += 1;
            }
        }
        leaves.into_iter().zip(has_edge).filter(|&(_, e)| e).map(|(l, _)| l).collect()
    }
}

/// Output of [`decompose`]: the forest `T`, the bad set `B` (sorted), and the
/// degree threshold `r` it was built for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub forest: SteinerForest,
    pub bad: Vec<Vertex>,
    pub threshold: usize,
}

impl Decomposition {
    pub fn is_bad(&self, v: Vertex) -> bool {
        self.bad.binary_search(&v).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecompWitness {
    /// A forest edge missing from the graph, or one closing a cycle.
    NotAForest {
        a: Vertex,
        b: Vertex,
    },
    /// Terminals connected in `G` but not in `T`.
    SplitInForest {
        a: Vertex,
        b: Vertex,
    },
    /// Terminals connected in `G − B` but not in `T − B`.
    SplitAfterRemoval {
        a: Vertex,
        b: Vertex,
    },
    DegreeAboveThreshold {
        vertex: Vertex,
        degree: usize,
    },
    TooManyBad {
        bad: usize,
        terminals: usize,
    },
    TooManyBadTerminals {
        bad_terminals: usize,
        terminals: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompReport {
    pub p1_holds: bool,
    pub p2_holds: bool,
    pub p3_holds: bool,
    pub witnesses: Vec<DecompWitness>,
}

impl DecompReport {
    pub fn all_hold(&self) -> bool {
        self.p1_holds && self.p2_holds && self.p3_holds
    }
}

impl fmt::Display for DecompReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P1={} P2={} P3={}", self.p1_holds, self.p2_holds, self.p3_holds)?;
        if let Some(w) = self.witnesses.first() {
            write!(f, " (first witness: {w:?})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DecompOptions {
    /// Swap budget; `None` means `50·n`.
    pub max_swaps: Option<usize>,
    /// Lower the forest's degrees globally before enforcing P1.
    pub reduce_degrees: bool,
}

impl Default for DecompOptions {
    fn default() -> Self {
        DecompOptions { max_swaps: None, reduce_degrees: true }
    }
}

/// Machine-checks P1–P3 for `d` against `(g, u, r)`.
pub fn verify_decomposition(g: &Graph, u: &TerminalSet, r: usize, d: &Decomposition) -> DecompReport {
    let n = g.n();
    let mut witnesses = Vec::new();
    let bad_mask = crate::graph::vertex_mask(n, &d.bad);

    let mut p1 = true;
    let mut dsu = Dsu::new(n);
    let mut dsu_minus_bad = Dsu::new(n);
    for &(a, b) in d.forest.edges() {
        if (a as usize) >= n || (b as usize) >= n || !g.has_edge(a, b) || !dsu.union(a, b) {
            p1 = false;
            witnesses.push(DecompWitness::NotAForest { a, b });
            continue;
        }
        if !bad_mask[a as usize] && !bad_mask[b as usize] {
            dsu_minus_bad.union(a, b);
        }
    }

    let mut check_steiner = |comps: crate::graph::Components, dsu: &mut Dsu, after_removal: bool| {
        let mut first: Vec<Option<Vertex>> = vec![None; comps.count()];
        for t in u.iter() {
            let Some(c) = comps.of(t) else { continue };
            match first[c as usize] {
                None => first[c as usize] = Some(t),
                Some(t0) if dsu.find(t0) != dsu.find(t) => {
                    p1 = false;
                    witnesses.push(if after_removal {
                        DecompWitness::SplitAfterRemoval { a: t0, b: t }
                    } else {
                        DecompWitness::SplitInForest { a: t0, b: t }
                    });
                }
                Some(_) => {}
            }
        }
    };
    check_steiner(components(g, &[]), &mut dsu, false);
    check_steiner(components_masked(g, &bad_mask), &mut dsu_minus_bad, true);

    let mut p2 = true;
    let mut degree_minus_bad = vec![0usize; n];
    for &(a, b) in d.forest.edges() {
        if (a as usize) < n && (b as usize) < n && !bad_mask[a as usize] && !bad_mask[b as usize] {
            degree_minus_bad[a as usize] += 1;
            degree_minus_bad[b as usize] += 1;
        }
    }
    for (v, &deg) in degree_minus_bad.iter().enumerate() {
        if deg > r {
            p2 = false;
            witnesses.push(DecompWitness::DegreeAboveThreshold { vertex: v as Vertex, degree: deg });
        }
    }

    let k = u.len();
    let bad_terminals = d.bad.iter().filter(|&&b| u.contains(b)).count();
    let few_bad = d.bad.is_empty() || d.bad.len() * (r.saturating_sub(2)) < k;
    let few_bad_terminals = bad_terminals == 0 || bad_terminals * (r.saturating_sub(1)) < k;
    if !few_bad {
        witnesses.push(DecompWitness::TooManyBad { bad: d.bad.len(), terminals: k });
    }
    if !few_bad_terminals {
        witnesses.push(DecompWitness::TooManyBadTerminals { bad_terminals, terminals: k });
    }

    DecompReport { p1_holds: p1, p2_holds: p2, p3_holds: few_bad && few_bad_terminals, witnesses }
}

/// Number of forest vertices with degree at least `r`.
pub fn count_high_degree_bound(forest: &SteinerForest, r: usize) -> usize {
    let count = (0..forest.n() as Vertex).filter(|&v| forest.degree(v) >= r).count();
    debug_assert!(r < 3 || count as f64 <= high_degree_fact_bound(forest, r) + 1e-9);
    count
}

/// `Σ (ℓ−2)/(r−2)` over the trees of `forest`, `ℓ` being the leaf count.
pub fn high_degree_fact_bound(forest: &SteinerForest, r: usize) -> f64 {
    assert!(r >= 3, "degree threshold must be at least 3");
    forest.leaves_per_tree().into_iter().map(|l| l.saturating_sub(2) as f64 / (r - 2) as f64).sum()
}

/// Edge-minimal Steiner forest via the shortest-path heuristic: each tree
/// grows from its smallest terminal by repeatedly attaching the nearest
/// unreached terminal (smallest id on ties), then non-terminal leaves are
/// pruned.
pub fn minimal_steiner_forest(g: &Graph, u: &TerminalSet) -> SteinerForest {
    let n = g.n();
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    let mut in_tree = vec![false; n];
    let mut tree_vertices: Vec<Vertex> = Vec::new();
    let comps = components(g, &[]);
    let mut terminals_by_comp: Vec<Vec<Vertex>> = vec![Vec::new(); comps.count()];
    for t in u.iter() {
        terminals_by_comp[comps.of(t).unwrap() as usize].push(t);
    }

    let mut dist = vec![NONE; n];
    let mut parent = vec![NONE; n];
    for terminals in terminals_by_comp.iter().filter(|ts| !ts.is_empty()) {
        tree_vertices.clear();
        tree_vertices.push(terminals[0]);
        in_tree[terminals[0] as usize] = true;
        let mut remaining = terminals.len() - 1;
        while remaining > 0 {
            // Multi-source BFS from the current tree, stopping at the first
            // level that contains an unreached terminal.
            let mut touched = Vec::new();
            let mut frontier: Vec<Vertex> = tree_vertices.clone();
            frontier.sort_unstable();
            for &v in &frontier {
                dist[v as usize] = 0;
                touched.push(v);
            }
            let mut found = None;
            while found.is_none() && !frontier.is_empty() {
                let mut next = Vec::new();
                for &v in &frontier {
                    for &w in g.neighbors(v) {
                        if dist[w as usize] == NONE {
                            dist[w as usize] = dist[v as usize] + 1;
                            parent[w as usize] = v;
                            touched.push(w);
                            next.push(w);
                        }
                    }
                }
                found = next.iter().copied().filter(|&w| u.contains(w)).min();
                frontier = next;
            }
            let target = found.expect("terminals of one component are mutually reachable");
            let mut v = target;
            while !in_tree[v as usize] {
                in_tree[v as usize] = true;
                tree_vertices.push(v);
                if u.contains(v) {
                    remaining -= 1;
                }
                let p = parent[v as usize];
                adj[v as usize].push(p);
                adj[p as usize].push(v);
                v = p;
            }
            for w in touched {
                dist[w as usize] = NONE;
                parent[w as usize] = NONE;
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut search = Search::new(g, u, adj, usize::MAX);
    search.prune_all();
    SteinerForest::from_adjacency(&search.adj)
}

/// Builds `(T, B)` for threshold `r ≥ 3`; see the module docs.
pub fn decompose(g: &Graph, u: &TerminalSet, r: usize) -> Result<Decomposition> {
    decompose_with(g, u, r, &DecompOptions::default())
}

pub fn decompose_with(g: &Graph, u: &TerminalSet, r: usize, opts: &DecompOptions) -> Result<Decomposition> {
    if r < 3 {
        return Err(Error::InvalidArgument(format!("degree threshold r={r} must be at least 3")));
    }
    let forest = minimal_steiner_forest(g, u);
    let max_swaps = opts.max_swaps.unwrap_or(50 * g.n().max(1));
    let mut search = Search::new(g, u, forest.adjacency(), max_swaps);
    if opts.reduce_degrees {
        search.reduce_degrees();
    }
    let bad = search.enforce_steiner_after_removal(r);
    let decomposition = Decomposition {
        forest: SteinerForest::from_adjacency(&search.adj),
        bad: bad.unwrap_or_default(),
        threshold: r,
    };
    let report = verify_decomposition(g, u, r, &decomposition);
    if search.exhausted || !report.all_hold() {
        return Err(Error::DecompositionFailed { swaps: search.swaps, report: Box::new(report) });
    }
    Ok(decomposition)
}

/// A connection between two different components of `T − W`: endpoints are
/// forest vertices, inner vertices are outside the forest.
struct Candidate {
    a: Vertex,
    b: Vertex,
    /// Region of non-forest vertices joining them, or `NONE` for a direct edge.
    region: u32,
}

struct Search<'g> {
    g: &'g Graph,
    is_terminal: Vec<bool>,
    adj: Vec<Vec<Vertex>>,
    swaps: usize,
    max_swaps: usize,
    exhausted: bool,
}

impl<'g> Search<'g> {
    fn new(g: &'g Graph, u: &TerminalSet, adj: Vec<Vec<Vertex>>, max_swaps: usize) -> Self {
        let is_terminal = crate::graph::vertex_mask(g.n(), u.as_slice());
        Search { g, is_terminal, adj, swaps: 0, max_swaps, exhausted: false }
    }

    fn deg(&self, v: Vertex) -> usize {
        self.adj[v as usize].len()
    }

    fn in_tree(&self, v: Vertex) -> bool {
        !self.adj[v as usize].is_empty() || self.is_terminal[v as usize]
    }

    fn add_edge(&mut self, a: Vertex, b: Vertex) {
        for (x, y) in [(a, b), (b, a)] {
            let list = &mut self.adj[x as usize];
            let pos = list.binary_search(&y).expect_err("edge already in forest");
            list.insert(pos, y);
        }
    }

    fn remove_edge(&mut self, a: Vertex, b: Vertex) {
        for (x, y) in [(a, b), (b, a)] {
            let list = &mut self.adj[x as usize];
            let pos = list.binary_search(&y).expect("edge in forest");
            list.remove(pos);
        }
    }

    fn prune_from(&mut self, mut stack: Vec<Vertex>) {
        while let Some(v) = stack.pop() {
            if self.is_terminal[v as usize] || self.adj[v as usize].len() != 1 {
                continue;
            }
            let p = self.adj[v as usize][0];
            self.remove_edge(v, p);
            stack.push(p);
        }
    }

    fn prune_all(&mut self) {
        let leaves = (0..self.g.n() as Vertex).filter(|&v| self.deg(v) == 1).collect();
        self.prune_from(leaves);
    }

    /// Adds `path` (inner vertices outside the forest), drops edge `(w, x)`,
    /// then prunes.
    fn apply_swap(&mut self, path: &[Vertex], w: Vertex, x: Vertex) {
        for pair in path.windows(2) {
            self.add_edge(pair[0], pair[1]);
        }
        self.remove_edge(w, x);
        self.prune_from(vec![w, x]);
        self.swaps += 1;
        if self.swaps >= self.max_swaps {
            self.exhausted = true;
        }
    }

    /// Forest path from `a` to `b`, both endpoints included.
    fn tree_path(&self, a: Vertex, b: Vertex) -> Vec<Vertex> {
        let mut parent = vec![NONE; self.g.n()];
        parent[a as usize] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            if v == b {
                break;
            }
            for &w in &self.adj[v as usize] {
                if parent[w as usize] == NONE {
                    parent[w as usize] = v;
                    queue.push_back(w);
                }
            }
        }
        assert_ne!(parent[b as usize], NONE, "endpoints lie in one tree");
        let mut path = vec![b];
        let mut v = b;
        while v != a {
            v = parent[v as usize];
            path.push(v);
        }
        path.reverse();
        path
    }

    /// Tries one improving swap that lowers the degree of `w`: a path with
    /// inner vertices outside the forest joining two subtrees hanging off
    /// `w`, whose endpoints have degree at most `deg(w) − 2`.
    fn try_reduce(&mut self, w: Vertex) -> bool {
        let d = self.deg(w);
        if d < 3 || self.exhausted {
            return false;
        }
        let limit = d - 2;
        let n = self.g.n();

        let mut piece = vec![NONE; n];
        piece[w as usize] = NONE - 1;
        for (i, &c) in self.adj[w as usize].iter().enumerate() {
            piece[c as usize] = i as u32;
            let mut queue = VecDeque::from([c]);
            while let Some(v) = queue.pop_front() {
                for &x in &self.adj[v as usize] {
                    if piece[x as usize] == NONE {
                        piece[x as usize] = i as u32;
                        queue.push_back(x);
                    }
                }
            }
        }
        let allowed = |s: &Self, v: Vertex| piece[v as usize] < NONE - 1 && s.deg(v) <= limit;

        // BFS through non-forest vertices from every allowed endpoint;
        // `origin` is the endpoint a vertex was reached from.
        let mut origin = vec![NONE; n];
        let mut parent = vec![NONE; n];
        let mut queue = VecDeque::new();
        for v in 0..n as Vertex {
            if allowed(self, v) {
                origin[v as usize] = v;
                queue.push_back(v);
            }
        }
        let mut found = None;
        'bfs: while let Some(x) = queue.pop_front() {
            let ox = origin[x as usize];
            for &y in self.g.neighbors(x) {
                if y == w {
                    continue;
                }
                if self.in_tree(y) {
                    if allowed(self, y) && piece[y as usize] != piece[ox as usize] && !self.adj[x as usize].contains(&y)
                    {
                        found = Some((x, y, NONE));
                        break 'bfs;
                    }
                } else if origin[y as usize] == NONE {
                    origin[y as usize] = ox;
                    parent[y as usize] = x;
                    queue.push_back(y);
                } else if piece[origin[y as usize] as usize] != piece[ox as usize] {
                    found = Some((x, y, origin[y as usize]));
                    break 'bfs;
                }
            }
        }
        let Some((x, y, y_origin)) = found else { return false };

        let trace = |mut v: Vertex| {
            let mut out = vec![v];
            while parent[v as usize] != NONE {
                v = parent[v as usize];
                out.push(v);
            }
            out
        };
        let mut path = trace(x);
        path.reverse();
        if y_origin == NONE {
            path.push(y);
        } else {
            path.extend(trace(y));
        }
        let a = path[0];
        let root_a = self.adj[w as usize][piece[a as usize] as usize];
        self.apply_swap(&path, w, root_a);
        true
    }

    /// Repeatedly lowers the highest degrees while improving swaps exist.
    fn reduce_degrees(&mut self) {
        // Keep half of the budget for the P1 phase.
        let budget = self.max_swaps / 2;
        'outer: while self.swaps < budget {
            let mut order: Vec<Vertex> = (0..self.g.n() as Vertex).filter(|&v| self.deg(v) >= 3).collect();
            order.sort_by_key(|&v| (std::cmp::Reverse(self.deg(v)), v));
            for v in order {
                if self.try_reduce(v) {
                    continue 'outer;
                }
            }
            break;
        }
    }

    /// Local search until `T − W` is a Steiner forest for `U − W` in `G − W`.
    /// Returns `W`, or `None` when the swap budget ran out.
    fn enforce_steiner_after_removal(&mut self, r: usize) -> Option<Vec<Vertex>> {
        let n = self.g.n();
        let mut unmarked: BTreeSet<Vertex> = BTreeSet::new();
        let mut pinned: BTreeSet<Vertex> = BTreeSet::new();
        let mut extras: BTreeSet<Vertex> = BTreeSet::new();
        let iteration_cap = (self.max_swaps + 1).saturating_mul(3 * n + 3);

        'outer: for _ in 0..iteration_cap {
            if self.exhausted {
                return None;
            }
            extras.retain(|&v| self.in_tree(v));
            pinned.retain(|&v| self.deg(v) >= r);
            unmarked.retain(|&v| self.deg(v) == r);

            let in_w: Vec<bool> = (0..n as Vertex)
                .map(|v| {
                    let d = self.deg(v);
                    d > r || (d == r && !unmarked.contains(&v)) || pinned.contains(&v) || extras.contains(&v)
                })
                .collect();

            let label = self.forest_labels(&in_w);
            let g_minus_w = components_masked(self.g, &in_w);
            let mut first_label = vec![NONE; g_minus_w.count()];
            let mut violating = vec![false; g_minus_w.count()];
            for t in (0..n as Vertex).filter(|&t| self.is_terminal[t as usize] && !in_w[t as usize]) {
                let c = g_minus_w.of(t).unwrap() as usize;
                if first_label[c] == NONE {
                    first_label[c] = label[t as usize];
                } else if first_label[c] != label[t as usize] {
                    violating[c] = true;
                }
            }
            if !violating.iter().any(|&v| v) {
                return Some((0..n as Vertex).filter(|&v| in_w[v as usize]).collect());
            }

            let (candidates, region) = self.candidates(&in_w, &label, &g_minus_w, &violating);
            debug_assert!(!candidates.is_empty());

            // 1. An improving swap through a high-degree vertex of W.
            for c in &candidates {
                let tree_path = self.tree_path(c.a, c.b);
                let Some(&w) = tree_path[1..tree_path.len() - 1]
                    .iter()
                    .filter(|&&v| in_w[v as usize])
                    .max_by_key(|&&v| (self.deg(v), std::cmp::Reverse(v)))
                else {
                    continue;
                };
                if self.deg(w) >= self.deg(c.a).max(self.deg(c.b)) + 2 {
                    let pos = tree_path.iter().position(|&v| v == w).unwrap();
                    let path = self.connection_path(c, &region);
                    self.apply_swap(&path, w, tree_path[pos - 1]);
                    unmarked.clear();
                    pinned.clear();
                    continue 'outer;
                }
            }

            // 2. Unmark degree-r vertices on a blocked cycle: they may stay in
            //    T − B since P2 allows degree r.
            let mut progressed = false;
            for c in &candidates {
                let tree_path = self.tree_path(c.a, c.b);
                let freeable: Vec<Vertex> = tree_path
                    .iter()
                    .copied()
                    .filter(|&v| in_w[v as usize] && self.deg(v) == r && !pinned.contains(&v) && !extras.contains(&v))
                    .collect();
                if !freeable.is_empty() {
                    unmarked.extend(freeable);
                    progressed = true;
                    break;
                }
            }
            if progressed {
                continue;
            }

            // 3. Free an endpoint or a blocking vertex by a swap elsewhere.
            for c in &candidates {
                let tree_path = self.tree_path(c.a, c.b);
                let mut targets: Vec<Vertex> = vec![c.a, c.b];
                targets.extend(tree_path.iter().copied().filter(|&v| in_w[v as usize]));
                if targets.into_iter().any(|v| self.try_reduce(v)) {
                    unmarked.clear();
                    pinned.clear();
                    progressed = true;
                    break;
                }
            }
            if progressed {
                continue;
            }

            // 4. Stuck: block one endpoint.
            let c = &candidates[0];
            let e = [c.a, c.b]
                .into_iter()
                .max_by_key(|&v| (self.deg(v) >= r, !self.is_terminal[v as usize], self.deg(v), std::cmp::Reverse(v)))
                .unwrap();
            if self.deg(e) >= r {
                unmarked.remove(&e);
                pinned.insert(e);
            } else {
                extras.insert(e);
            }
        }
        self.exhausted = true;
        None
    }

    /// Component labels of `T − W`; `NONE` outside the forest or in `W`.
    fn forest_labels(&self, in_w: &[bool]) -> Vec<u32> {
        let n = self.g.n();
        let mut label = vec![NONE; n];
        let mut next = 0u32;
        for s in 0..n as Vertex {
            if in_w[s as usize] || label[s as usize] != NONE || !self.in_tree(s) {
                continue;
            }
            label[s as usize] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &x in &self.adj[v as usize] {
                    if !in_w[x as usize] && label[x as usize] == NONE {
                        label[x as usize] = next;
                        queue.push_back(x);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Connections between distinct `T − W` components inside violating
    /// components of `G − W`, best (lowest endpoint degree) first. Also
    /// returns the region id of each non-forest vertex.
    fn candidates(
        &self,
        in_w: &[bool],
        label: &[u32],
        g_minus_w: &crate::graph::Components,
        violating: &[bool],
    ) -> (Vec<Candidate>, Vec<u32>) {
        let n = self.g.n();
        let live = |v: Vertex| !in_w[v as usize] && violating[g_minus_w.of(v).unwrap() as usize];
        let mut out = Vec::new();

        for &(a, b) in self.g.edges() {
            if live(a)
                && label[a as usize] != NONE
                && label[b as usize] != NONE
                && label[a as usize] != label[b as usize]
            {
                out.push(Candidate { a, b, region: NONE });
            }
        }

        let mut region = vec![NONE; n];
        let mut next = 0u32;
        for s in 0..n as Vertex {
            if region[s as usize] != NONE || !live(s) || self.in_tree(s) {
                continue;
            }
            region[s as usize] = next;
            let mut members = vec![s];
            let mut queue = VecDeque::from([s]);
            let mut contacts: Vec<Vertex> = Vec::new();
            while let Some(v) = queue.pop_front() {
                for &x in self.g.neighbors(v) {
                    if in_w[x as usize] {
                        continue;
                    }
                    if self.in_tree(x) {
                        contacts.push(x);
                    } else if region[x as usize] == NONE {
                        region[x as usize] = next;
                        members.push(x);
                        queue.push_back(x);
                    }
                }
            }
            // Best contact per forest component, then pair the overall best
            // with each other component's best.
            contacts.sort_by_key(|&v| (label[v as usize], self.deg(v), v));
            contacts.dedup_by_key(|v| label[*v as usize]);
            contacts.sort_by_key(|&v| (self.deg(v), v));
            if let Some((&first, rest)) = contacts.split_first() {
                for &other in rest {
                    out.push(Candidate { a: first, b: other, region: next });
                }
            }
            next += 1;
        }
        out.sort_by_key(|c| {
            let (da, db) = (self.deg(c.a), self.deg(c.b));
            (da.max(db), da + db, c.a.min(c.b), c.a.max(c.b))
        });
        (out, region)
    }

    /// Concrete path `a … b` for a candidate, inner vertices from its region.
    fn connection_path(&self, c: &Candidate, region: &[u32]) -> Vec<Vertex> {
        if c.region == NONE {
            return vec![c.a, c.b];
        }
        let n = self.g.n();
        let mut parent = vec![NONE; n];
        parent[c.a as usize] = c.a;
        let mut queue = VecDeque::from([c.a]);
        while let Some(v) = queue.pop_front() {
            for &x in self.g.neighbors(v) {
                if x == c.b && v != c.a {
                    let mut path = vec![c.b];
                    let mut y = v;
                    while y != c.a {
                        path.push(y);
                        y = parent[y as usize];
                    }
                    path.push(c.a);
                    path.reverse();
                    return path;
                }
                if region[x as usize] == c.region && parent[x as usize] == NONE {
                    parent[x as usize] = v;
                    queue.push_back(x);
                }
            }
        }
        unreachable!("candidate endpoints both touch their region")
    }
}

/// Union-find over vertex ids.
struct Dsu {
    parent: Vec<u32>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, v: Vertex) -> u32 {
        let mut root = v;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut v = v;
        while self.parent[v as usize] != root {
            let next = self.parent[v as usize];
            self.parent[v as usize] = root;
            v = next;
        }
        root
    }

    /// Returns false if `a` and `b` were already joined.
    fn union(&mut self, a: Vertex, b: Vertex) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi as usize] = lo;
        true
    }
}
