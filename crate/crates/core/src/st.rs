//! Fault-tolerant pairwise connectivity labels and the terminal-reach labels
//! derived from them.
//!
//! The scheme only consumes these through [`ConnectivityBackend`]: a label is
//! an opaque, self-contained byte string and every query is answered from
//! label bytes alone. The shipped [`ExhaustiveBackend`] is correct for any
//! number of faults but embeds the whole graph in every payload, so its sizes
//! say nothing about the scheme itself; label size is measured in entries
//! elsewhere.
//!
//! Exhaustive payload wire format, all integers LEB128 varints:
//!
//! ```text
//! tag[4] = "EXHV" | version u8 = 1 | vertex | n | m | edges
//! ```
//!
//! `edges` is the sorted list of pairs `(a, b)`, `a < b`, each written as
//! `a - a_prev` followed by `b - b_prev` when `a` repeats, else `b - a`.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use crate::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::graph::{vertex_mask, Graph, TerminalSet, Vertex};

pub const EXHAUSTIVE_TAG: [u8; 4] = *b"EXHV";
const EXHAUSTIVE_VERSION: u8 = 1;

/// Pairwise connectivity label of one vertex.
#[derive(Clone, PartialEq, Eq)]
pub struct StLabel {
    vertex: Vertex,
    payload: Arc<[u8]>,
}

impl fmt::Debug for StLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StLabel")
            .field("vertex", &self.vertex)
            .field("backend", &String::from_utf8_lossy(&self.backend_tag()))
            .field("bytes", &self.payload.len())
            .finish()
    }
}

impl StLabel {
    /// Parses a payload produced by any registered backend.
    pub fn from_payload(payload: &[u8]) -> Result<Self> {
        let tag = payload_tag(payload)?;
        let vertex = backend_for(tag)?.vertex_of(payload)?;
        Ok(StLabel { vertex, payload: payload.into() })
    }

    pub fn vertex(&self) -> Vertex {
        self.vertex
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn backend_tag(&self) -> [u8; 4] {
        payload_tag(&self.payload).unwrap_or([0; 4])
    }

    /// Whether both labels come from the same labeled instance.
    pub fn same_instance(&self, other: &StLabel) -> Result<bool> {
        let backend = backend_for(self.backend_tag())?;
        if other.backend_tag() != self.backend_tag() {
            return Ok(false);
        }
        Ok(backend.instance_key(&self.payload)? == backend.instance_key(&other.payload)?)
    }
}

fn payload_tag(payload: &[u8]) -> Result<[u8; 4]> {
    payload
        .get(..4)
        .map(|t| [t[0], t[1], t[2], t[3]])
        .ok_or_else(|| Error::malformed("payload shorter than its backend tag"))
}

/// A provider of f-fault-tolerant s-t connectivity labels.
pub trait ConnectivityBackend: Send + Sync {
    fn tag(&self) -> [u8; 4];

    /// One label per vertex, indexed by vertex id.
    fn build(&self, g: &Graph, f: usize) -> Vec<StLabel>;

    fn vertex_of(&self, payload: &[u8]) -> Result<Vertex>;

    /// Bytes identifying the labeled instance; identical across one build.
    fn instance_key<'a>(&self, payload: &'a [u8]) -> Result<&'a [u8]>;

    /// Whether `s` and `t` are connected once the owners of `faults` fail.
    fn connected(&self, faults: &[&StLabel], s: &StLabel, t: &StLabel) -> Result<bool>;
}

/// Every payload carries the full graph; a query decodes it and runs BFS.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExhaustiveBackend;

struct ExhaustiveHeader<'a> {
    vertex: Vertex,
    instance: &'a [u8],
}

impl ExhaustiveBackend {
    fn header<'a>(&self, payload: &'a [u8]) -> Result<ExhaustiveHeader<'a>> {
        let mut r = ByteReader::new(payload);
        if r.take(4)? != EXHAUSTIVE_TAG {
            return Err(Error::malformed("not an exhaustive-backend payload"));
        }
        let version = r.u8()?;
        if version != EXHAUSTIVE_VERSION {
            return Err(Error::malformed(format!("unsupported payload version {version}")));
        }
        let vertex = r.varint_u32()?;
        let instance = &payload[r.position()..];
        Ok(ExhaustiveHeader { vertex, instance })
    }

    fn encode_instance(g: &Graph) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.varint(g.n() as u64);
        w.varint(g.m() as u64);
        let mut prev = (0u32, 0u32);
        for &(a, b) in g.edges() {
            w.varint(u64::from(a - prev.0));
            if a == prev.0 {
                w.varint(u64::from(b - prev.1));
            } else {
                w.varint(u64::from(b - a));
            }
            prev = (a, b);
        }
        w.finish()
    }

    fn decode_instance(instance: &[u8]) -> Result<Graph> {
        let mut r = ByteReader::new(instance);
        let n = r.varint()?;
        if n >= u64::from(u32::MAX) {
            return Err(Error::malformed("vertex count out of range"));
        }
        let m = r.count()?;
        let mut edges = Vec::with_capacity(m);
        let mut prev = (0u64, 0u64);
        for i in 0..m {
            let da = r.varint()?;
            let db = r.varint()?;
            let a = prev.0 + da;
            let b = if da == 0 && i > 0 { prev.1 + db } else { a + db };
            if db == 0 || b >= n {
                return Err(Error::malformed("edge list out of order or out of range"));
            }
            edges.push((a as Vertex, b as Vertex));
            prev = (a, b);
        }
        r.expect_end()?;
        Graph::new(n as usize, edges).map_err(|e| Error::malformed(e.to_string()))
    }
}

impl ConnectivityBackend for ExhaustiveBackend {
    fn tag(&self) -> [u8; 4] {
        EXHAUSTIVE_TAG
    }

    fn build(&self, g: &Graph, _f: usize) -> Vec<StLabel> {
        let instance = Self::encode_instance(g);
        (0..g.n() as Vertex)
            .map(|v| {
                let mut w = ByteWriter::new();
                w.bytes(&EXHAUSTIVE_TAG);
                w.u8(EXHAUSTIVE_VERSION);
                w.varint(u64::from(v));
                w.bytes(&instance);
                StLabel { vertex: v, payload: w.finish().into() }
            })
            .collect()
    }

    fn vertex_of(&self, payload: &[u8]) -> Result<Vertex> {
        Ok(self.header(payload)?.vertex)
    }

    fn instance_key<'a>(&self, payload: &'a [u8]) -> Result<&'a [u8]> {
        Ok(self.header(payload)?.instance)
    }

    fn connected(&self, faults: &[&StLabel], s: &StLabel, t: &StLabel) -> Result<bool> {
        let s_hdr = self.header(&s.payload)?;
        let t_hdr = self.header(&t.payload)?;
        let mut failed = Vec::with_capacity(faults.len());
        for hdr in faults.iter().map(|l| self.header(&l.payload)) {
            let hdr = hdr?;
            if hdr.instance != s_hdr.instance {
                return Err(Error::mix("connectivity labels describe different graphs"));
            }
            failed.push(hdr.vertex);
        }
        if t_hdr.instance != s_hdr.instance {
            return Err(Error::mix("connectivity labels describe different graphs"));
        }
        let g = Self::decode_instance(s_hdr.instance)?;
        let (s_vertex, t_vertex, n) = (s_hdr.vertex, t_hdr.vertex, g.n());
        if s_vertex as usize >= n || t_vertex as usize >= n {
            return Err(Error::malformed("label vertex outside its graph"));
        }
        let removed = vertex_mask(n, &failed);
        if removed[s_vertex as usize] || removed[t_vertex as usize] {
            return Ok(false);
        }
        Ok(bfs_reaches(&g, &removed, s_vertex, t_vertex))
    }
}

fn bfs_reaches(g: &Graph, removed: &[bool], s: Vertex, t: Vertex) -> bool {
    if s == t {
        return true;
    }
    let mut seen = removed.to_vec();
    seen[s as usize] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if w == t {
                return true;
            }
            if !seen[w as usize] {
                seen[w as usize] = true;
                queue.push_back(w);
            }
        }
    }
    false
}

static EXHAUSTIVE: ExhaustiveBackend = ExhaustiveBackend;

pub fn default_backend() -> &'static dyn ConnectivityBackend {
    &EXHAUSTIVE
}

pub fn backend_for(tag: [u8; 4]) -> Result<&'static dyn ConnectivityBackend> {
    match tag {
        EXHAUSTIVE_TAG => Ok(&EXHAUSTIVE),
        other => Err(Error::UnknownBackend(other)),
    }
}

fn check_f(f: usize) -> Result<()> {
    if f == 0 {
        return Err(Error::InvalidArgument("fault bound f must be at least 1".into()));
    }
    Ok(())
}

pub fn build_st_labels(g: &Graph, f: usize) -> Result<Vec<StLabel>> {
    build_st_labels_with(default_backend(), g, f)
}

pub fn build_st_labels_with(backend: &dyn ConnectivityBackend, g: &Graph, f: usize) -> Result<Vec<StLabel>> {
    check_f(f)?;
    Ok(backend.build(g, f))
}

/// Decides whether `s` and `t` are connected after the owners of `faults`
/// fail, from the labels alone.
pub fn query_st(faults: &[&StLabel], s: &StLabel, t: &StLabel) -> Result<bool> {
    let tag = s.backend_tag();
    for label in faults.iter().copied().chain([t]) {
        if label.backend_tag() != tag {
            return Err(Error::BackendMismatch(tag, label.backend_tag()));
        }
    }
    backend_for(tag)?.connected(faults, s, t)
}

/// Terminal-reach label: the connectivity labels of `v` and of `z` in the graph
/// with an apex `z` joined to every terminal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachLabel {
    vertex: Vertex,
    own: StLabel,
    apex: StLabel,
}

impl ReachLabel {
    pub fn new(own: StLabel, apex: StLabel) -> Result<Self> {
        if own.vertex() == apex.vertex() || !own.same_instance(&apex)? {
            return Err(Error::mix("reach label halves do not belong together"));
        }
        Ok(ReachLabel { vertex: own.vertex(), own, apex })
    }

    pub fn vertex(&self) -> Vertex {
        self.vertex
    }

    pub fn own(&self) -> &StLabel {
        &self.own
    }

    pub fn apex(&self) -> &StLabel {
        &self.apex
    }
}

pub fn build_reach_labels(g: &Graph, u: &TerminalSet, f: usize) -> Result<Vec<ReachLabel>> {
    build_reach_labels_with(default_backend(), g, u, f)
}

pub fn build_reach_labels_with(
    backend: &dyn ConnectivityBackend,
    g: &Graph,
    u: &TerminalSet,
    f: usize,
) -> Result<Vec<ReachLabel>> {
    check_f(f)?;
    let apex_graph = g.with_apex(u.as_slice());
    let mut labels = backend.build(&apex_graph, f);
    let apex = labels.pop().expect("apex graph has at least one vertex");
    Ok(labels.into_iter().map(|own| ReachLabel { vertex: own.vertex(), own, apex: apex.clone() }).collect())
}

/// Whether `x` reaches some terminal once the owners of `faults` fail.
pub fn query_reach(x: &ReachLabel, faults: &[&ReachLabel]) -> Result<bool> {
    let own: Vec<&StLabel> = faults.iter().map(|r| &r.own).collect();
    query_st(&own, &x.own, &x.apex)
}

/// Star entry `(v, connectivity label, reach label)`: the unit in which
/// scheme labels are measured.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarLabel {
    vertex: Vertex,
    st: StLabel,
    reach: ReachLabel,
}

impl StarLabel {
    pub fn new(vertex: Vertex, st: StLabel, reach: ReachLabel) -> Result<Self> {
        if st.vertex() != vertex || reach.vertex() != vertex {
            return Err(Error::mix(format!(
                "entry for vertex {vertex} holds labels of {} and {}",
                st.vertex(),
                reach.vertex()
            )));
        }
        Ok(StarLabel { vertex, st, reach })
    }

    pub fn vertex(&self) -> Vertex {
        self.vertex
    }

    pub fn st(&self) -> &StLabel {
        &self.st
    }

    pub fn reach(&self) -> &ReachLabel {
        &self.reach
    }
}

pub fn build_star_labels(g: &Graph, u: &TerminalSet, f: usize) -> Result<Vec<StarLabel>> {
    let st = build_st_labels(g, f)?;
    let reach = build_reach_labels(g, u, f)?;
    Ok(st.into_iter().zip(reach).map(|(st, reach)| StarLabel { vertex: st.vertex(), st, reach }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::components;

    fn path(n: usize) -> Graph {
        Graph::new(n, (1..n as Vertex).map(|i| (i - 1, i))).unwrap()
    }

    fn c4() -> Graph {
        Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    fn st(labels: &[StLabel], faults: &[Vertex], s: Vertex, t: Vertex) -> bool {
        let f: Vec<&StLabel> = faults.iter().map(|&v| &labels[v as usize]).collect();
        query_st(&f, &labels[s as usize], &labels[t as usize]).unwrap()
    }

    fn reach(labels: &[ReachLabel], faults: &[Vertex], x: Vertex) -> bool {
        let f: Vec<&ReachLabel> = faults.iter().map(|&v| &labels[v as usize]).collect();
        query_reach(&labels[x as usize], &f).unwrap()
    }

    #[test]
    fn st_examples() {
        let labels = build_st_labels(&path(3), 1).unwrap();
        assert!(!st(&labels, &[1], 0, 2));
        assert!(st(&labels, &[], 1, 1));
        assert!(st(&labels, &[], 0, 2));

        let labels = build_st_labels(&c4(), 2).unwrap();
        assert!(!st(&labels, &[1, 3], 0, 2));
        assert!(st(&labels, &[1], 0, 2));
    }

    #[test]
    fn zero_fault_bound_rejected() {
        assert!(build_st_labels(&path(2), 0).is_err());
    }

    #[test]
    fn reach_examples() {
        let g = path(3);
        let labels = build_reach_labels(&g, &TerminalSet::new(3, [0]).unwrap(), 1).unwrap();
        assert!(!reach(&labels, &[1], 2));
        assert!(reach(&labels, &[2], 0));

        let g = path(5);
        let u = TerminalSet::new(5, [0, 4]).unwrap();
        let labels = build_reach_labels(&g, &u, 2).unwrap();
        assert!(reach(&labels, &[2], 1));
        assert!(!reach(&labels, &[1, 3], 2));
        assert!(!reach(&labels, &[0, 4], 2));
    }

    #[test]
    fn empty_terminal_set_never_reaches() {
        let g = path(4);
        let labels = build_reach_labels(&g, &TerminalSet::default(), 1).unwrap();
        for x in 0..4 {
            assert!(!reach(&labels, &[], x));
        }
    }

    #[test]
    fn payload_roundtrip_and_exhaustive_oracle() {
        let g = Graph::new(6, [(0, 1), (1, 2), (2, 0), (3, 4), (2, 3), (4, 5)]).unwrap();
        let labels: Vec<StLabel> =
            build_st_labels(&g, 2).unwrap().iter().map(|l| StLabel::from_payload(l.payload()).unwrap()).collect();
        for a in 0..6 {
            for b in a..6 {
                for s in 0..6 {
                    for t in 0..6 {
                        let faults: Vec<Vertex> = if a == b { vec![a] } else { vec![a, b] };
                        if faults.contains(&s) || faults.contains(&t) {
                            continue;
                        }
                        let truth = components(&g, &faults).connected(s, t);
                        assert_eq!(st(&labels, &faults, s, t), truth);
                    }
                }
            }
        }
    }

    #[test]
    fn mixing_instances_is_an_error() {
        let a = build_st_labels(&path(3), 1).unwrap();
        let b = build_st_labels(&c4(), 1).unwrap();
        assert!(matches!(query_st(&[&b[1]], &a[0], &a[2]), Err(Error::LabelMix(_))));

        let mut forged = a[0].payload().to_vec();
        forged[..4].copy_from_slice(b"ZZZZ");
        assert!(StLabel::from_payload(&forged).is_err());
        let forged = StLabel { vertex: 0, payload: forged.into() };
        assert!(matches!(query_st(&[], &a[2], &forged), Err(Error::BackendMismatch(..))));
    }

    #[test]
    fn decoder_rejects_corrupt_edges() {
        let g = path(4);
        let mut bad = ExhaustiveBackend::encode_instance(&g);
        *bad.last_mut().unwrap() = 9;
        assert!(ExhaustiveBackend::decode_instance(&bad).is_err());
        assert_eq!(ExhaustiveBackend::decode_instance(&ExhaustiveBackend::encode_instance(&g)).unwrap(), g);
    }
}
