//! Undirected simple graphs, terminal sets, and the connectivity primitives
//! every other module is checked against.
//!
//! Graphs are immutable once built. Vertex deletions are expressed as a
//! removed-set passed to the traversal, never by mutating the graph.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub type Vertex = u32;

const NONE: u32 = u32::MAX;

/// Undirected simple graph over the dense vertex ids `0..n`, stored as CSR.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Sorted, each pair normalized to `a < b`.
    edges: Vec<(Vertex, Vertex)>,
    offsets: Vec<usize>,
    adjacency: Vec<Vertex>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and endpoints
    /// outside `0..n`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self> {
        if n >= NONE as usize {
            return Err(Error::InvalidGraph(format!("{n} vertices do not fit 32-bit ids")));
        }
        let mut normalized = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) has an endpoint outside 0..{n}")));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        Ok(Self::from_sorted(n, normalized))
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted(n, Vec::new())
    }

    fn from_sorted(n: usize, edges: Vec<(Vertex, Vertex)>) -> Self {
        let mut degree = vec![0usize; n];
        for &(a, b) in &edges {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![0; 2 * edges.len()];
        for &(a, b) in &edges {
            adjacency[fill[a as usize]] = b;
            fill[a as usize] += 1;
            adjacency[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        for v in 0..n {
            adjacency[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Graph { n, edges, offsets, adjacency }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let v = v as usize;
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        (a as usize) < self.n && (b as usize) < self.n && self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Same vertex ids with every edge touching `removed` dropped; the
    /// removed vertices stay behind as isolated ids.
    pub fn without_vertices(&self, removed: &[Vertex]) -> Graph {
        let mask = vertex_mask(self.n, removed);
        let edges = self.edges.iter().copied().filter(|&(a, b)| !mask[a as usize] && !mask[b as usize]).collect();
        Self::from_sorted(self.n, edges)
    }

    /// Adds one vertex with id `n` adjacent to each vertex of `attach`.
    pub fn with_apex(&self, attach: &[Vertex]) -> Graph {
        let z = self.n as Vertex;
        let mut edges = self.edges.clone();
        let mut attach = attach.to_vec();
        attach.sort_unstable();
        attach.dedup();
        edges.extend(attach.into_iter().map(|u| (u, z)));
        edges.sort_unstable();
        Self::from_sorted(self.n + 1, edges)
    }
}

pub(crate) fn vertex_mask(n: usize, vertices: &[Vertex]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &v in vertices {
        if (v as usize) < n {
            mask[v as usize] = true;
        }
    }
    mask
}

fn sorted_unique(n: usize, ids: impl IntoIterator<Item = Vertex>, what: &str) -> Result<Vec<Vertex>> {
    let mut ids: Vec<Vertex> = ids.into_iter().collect();
    if let Some(&bad) = ids.iter().find(|&&v| v as usize >= n) {
        return Err(Error::InvalidArgument(format!("{what} {bad} is outside 0..{n}")));
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

/// The designated terminal set `U`, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TerminalSet {
    terminals: Vec<Vertex>,
}

impl TerminalSet {
    pub fn new(n: usize, terminals: impl IntoIterator<Item = Vertex>) -> Result<Self> {
        Ok(TerminalSet { terminals: sorted_unique(n, terminals, "terminal")? })
    }

    pub fn all(n: usize) -> Self {
        TerminalSet { terminals: (0..n as Vertex).collect() }
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.terminals
    }

    pub fn len(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.terminals.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.terminals.iter().copied()
    }

    /// `U − removed`.
    pub fn without(&self, removed: &[Vertex]) -> TerminalSet {
        TerminalSet { terminals: self.terminals.iter().copied().filter(|t| !removed.contains(t)).collect() }
    }
}

/// A query set `F` of failed vertices together with the scheme bound `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultSet {
    faults: Vec<Vertex>,
    bound: usize,
}

impl FaultSet {
    pub fn new(n: usize, bound: usize, faults: impl IntoIterator<Item = Vertex>) -> Result<Self> {
        let faults = sorted_unique(n, faults, "fault")?;
        if faults.len() > bound {
            return Err(Error::TooManyFaults { size: faults.len(), bound });
        }
        Ok(FaultSet { faults, bound })
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.faults
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.faults.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faults.is_empty()
    }
}

/// Connected components of `G − removed`.
#[derive(Clone, Debug)]
pub struct Components {
    label: Vec<u32>,
    count: usize,
}

impl Components {
    /// Component index of `v`, or `None` if `v` was removed. Components are
    /// numbered in order of their smallest vertex.
    pub fn of(&self, v: Vertex) -> Option<u32> {
        match self.label[v as usize] {
            NONE => None,
            c => Some(c),
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn connected(&self, a: Vertex, b: Vertex) -> bool {
        matches!((self.of(a), self.of(b)), (Some(x), Some(y)) if x == y)
    }

    /// The partition itself, each part sorted.
    pub fn groups(&self) -> Vec<Vec<Vertex>> {
        let mut groups = vec![Vec::new(); self.count];
        for (v, &c) in self.label.iter().enumerate() {
            if c != NONE {
                groups[c as usize].push(v as Vertex);
            }
        }
        groups
    }
}

pub fn components(g: &Graph, removed: &[Vertex]) -> Components {
    components_masked(g, &vertex_mask(g.n(), removed))
}

pub(crate) fn components_masked(g: &Graph, removed: &[bool]) -> Components {
    let n = g.n();
    let mut label = vec![NONE; n];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if removed[start] || label[start] != NONE {
            continue;
        }
        label[start] = count;
        queue.push_back(start as Vertex);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if !removed[w as usize] && label[w as usize] == NONE {
                    label[w as usize] = count;
                    queue.push_back(w);
                }
            }
        }
        count += 1;
    }
    Components { label, count: count as usize }
}

/// Whether two vertices of `w_set − k_set` are disconnected in `G − k_set`.
pub fn separates(g: &Graph, k_set: &[Vertex], w_set: &[Vertex]) -> bool {
    let comps = components(g, k_set);
    let mut first = None;
    for &w in w_set {
        if let Some(c) = comps.of(w) {
            match first {
                None => first = Some(c),
                Some(c0) if c0 != c => return true,
                _ => {}
            }
        }
    }
    false
}

/// Ground truth for the whole crate: does `F` separate the terminals?
pub fn is_steiner_cut(g: &Graph, u: &TerminalSet, faults: &[Vertex]) -> bool {
    separates(g, faults, u.as_slice())
}

/// The edge-fault reduction: every edge `e = (a, b)` is replaced by a path
/// `a – v_e – b`, so failing `e` becomes failing the vertex `v_e`.
#[derive(Clone, Debug)]
pub struct Subdivision {
    pub graph: Graph,
    original_n: usize,
    original_edges: Vec<(Vertex, Vertex)>,
}

impl Subdivision {
    pub fn original_n(&self) -> usize {
        self.original_n
    }

    /// The middle vertex `v_e` standing in for edge `(a, b)`.
    pub fn edge_vertex(&self, a: Vertex, b: Vertex) -> Option<Vertex> {
        let key = (a.min(b), a.max(b));
        self.original_edges.binary_search(&key).ok().map(|i| (self.original_n + i) as Vertex)
    }

    /// `(edge, v_e)` pairs in edge order.
    pub fn edge_map(&self) -> impl Iterator<Item = ((Vertex, Vertex), Vertex)> + '_ {
        self.original_edges.iter().enumerate().map(|(i, &e)| (e, (self.original_n + i) as Vertex))
    }
}

pub fn subdivide_edges(g: &Graph) -> Subdivision {
    let n = g.n();
    let mut edges = Vec::with_capacity(2 * g.m());
    for (i, &(a, b)) in g.edges().iter().enumerate() {
        let mid = (n + i) as Vertex;
        edges.push((a, mid));
        edges.push((b, mid));
    }
    edges.sort_unstable();
    Subdivision { graph: Graph::from_sorted(n + g.m(), edges), original_n: n, original_edges: g.edges().to_vec() }
}
