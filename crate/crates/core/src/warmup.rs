//! The recursive baseline scheme with labels of roughly
//! `|U|^{1−1/2^{f−1}}` entries.
//!
//! Level `k` works on `H = G − R` for a removed set `R` (vertex ids are kept).
//! It takes an edge-minimal Steiner forest `T` of `H` and calls the vertices
//! of degree at least `r_k` high. The label of `x` at level `k` holds the
//! entry of `x`, the level-`(k−1)` label of `x` in `H − y` for every high
//! `y ≠ x`, and the entries of all `T`-neighbours when `x` is not high.
//! Level 1 is the single cut bit.
//!
//! A query with a high vertex in `F` removes the smallest one and recurses.
//! Otherwise two `T`-neighbours of `F` that reach terminals but not each
//! other witness a cut.
//!
//! Each level also stores its cut bit and the subset label of `∅` for `H`.
//! The bit answers `|F| = 1` at every level, including a single high vertex.
//! The subset label catches
//! terminals that were already apart in `H`, which no forest path can see.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::codec::{ByteReader, ByteWriter};
use crate::decomp::minimal_steiner_forest;
use crate::error::{Error, Result};
use crate::graph::{is_steiner_cut, Graph, TerminalSet, Vertex};
use crate::scheme::ceil_fractional_power;
use crate::st::{build_star_labels, query_reach, query_st, ReachLabel, StLabel, StarLabel};
use crate::subset::{build_subset_label, query_subset_label, Bits, SubsetLabel};

const MAGIC: &[u8; 4] = b"FTWL";
const VERSION: u8 = 1;

/// Default cap on the number of sub-instances one build may create.
pub const DEFAULT_RECURSION_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WarmupLabel {
    owner: Vertex,
    n: u32,
    f: u32,
    terminals: u32,
    top: Arc<WarmupLevel>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WarmupLevel {
    level: u32,
    /// Vertices removed from `G` to obtain this level's graph, sorted.
    removed: Vec<Vertex>,
    /// Whether the owner alone separates this level's terminals.
    cut_bit: bool,
    body: LevelBody,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LevelBody {
    /// Level 1: the cut bit is the whole label.
    Bit,
    /// At most one terminal left: nothing can be separated.
    Trivial,
    Full(LevelDetail),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelDetail {
    star_self: StarLabel,
    hat_empty: SubsetLabel,
    high: bool,
    /// Forest neighbours, sorted; empty for high owners.
    neighbors: Vec<StarLabel>,
    /// `(y, label of the owner in H − y)` for high `y ≠ owner`, sorted by `y`.
    children: Vec<(Vertex, Arc<WarmupLevel>)>,
}

impl WarmupLabel {
    pub fn owner(&self) -> Vertex {
        self.owner
    }

    pub fn top(&self) -> &WarmupLevel {
        &self.top
    }

    /// Entries stored across all levels: one for the owner plus one per
    /// forest neighbour at each full level.
    pub fn star_entry_count(&self) -> usize {
        self.top.star_entry_count()
    }
}

impl WarmupLevel {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn removed(&self) -> &[Vertex] {
        &self.removed
    }

    pub fn cut_bit(&self) -> bool {
        self.cut_bit
    }

    pub fn body(&self) -> &LevelBody {
        &self.body
    }

    pub fn star_entry_count(&self) -> usize {
        match &self.body {
            LevelBody::Full(d) => {
                1 + d.neighbors.len() + d.children.iter().map(|(_, c)| c.star_entry_count()).sum::<usize>()
            }
            _ => 0,
        }
    }
}

impl LevelDetail {
    pub fn is_high(&self) -> bool {
        self.high
    }

    pub fn neighbors(&self) -> &[StarLabel] {
        &self.neighbors
    }

    pub fn children(&self) -> &[(Vertex, Arc<WarmupLevel>)] {
        &self.children
    }
}

/// `r_k = max(3, ⌈|U|^{1−1/2^{k−1}}⌉)` for `k ≥ 2`.
pub fn warmup_threshold(k: usize, u_size: usize) -> usize {
    assert!(k >= 2, "thresholds start at level 2");
    let root = if k > 32 {
        u_size as u64
    } else {
        let den = 1u64 << (k - 1);
        ceil_fractional_power(u_size as u64, (den - 1) as u32, den as u32)
    };
    (root as usize).max(3)
}

type LevelSet = Arc<Vec<Option<Arc<WarmupLevel>>>>;

struct Builder<'a> {
    g: &'a Graph,
    u: &'a TerminalSet,
    budget: usize,
    built: usize,
    memo: HashMap<(Vec<Vertex>, usize), LevelSet>,
}

impl Builder<'_> {
    fn level(&mut self, removed: Vec<Vertex>, k: usize) -> Result<LevelSet> {
        if let Some(hit) = self.memo.get(&(removed.clone(), k)) {
            return Ok(hit.clone());
        }
        self.built += 1;
        if self.built > self.budget {
            return Err(Error::RecursionBudgetExceeded { cap: self.budget });
        }
        let n = self.g.n();
        let h = self.g.without_vertices(&removed);
        let u_h = self.u.without(&removed);
        let alive: Vec<Vertex> = (0..n as Vertex).filter(|v| removed.binary_search(v).is_err()).collect();
        let cut_bit = |x: Vertex| is_steiner_cut(&h, &u_h, &[x]);
        let make = |x: Vertex, body: LevelBody| {
            Arc::new(WarmupLevel { level: k as u32, removed: removed.clone(), cut_bit: cut_bit(x), body })
        };
        let mut out: Vec<Option<Arc<WarmupLevel>>> = vec![None; n];

        if k == 1 || u_h.len() <= 1 {
            let body = if k == 1 { LevelBody::Bit } else { LevelBody::Trivial };
            for &x in &alive {
                out[x as usize] = Some(make(x, body.clone()));
            }
        } else {
            let forest = minimal_steiner_forest(&h, &u_h);
            let r = warmup_threshold(k, u_h.len());
            let high: Vec<Vertex> = alive.iter().copied().filter(|&v| forest.degree(v) >= r).collect();
            let stars = build_star_labels(&h, &u_h, k)?;
            let hat_empty = build_subset_label(&h, &u_h, &[], k)?;
            let mut subs: Vec<(Vertex, LevelSet)> = Vec::with_capacity(high.len());
            for &y in &high {
                let mut next = removed.clone();
                let pos = next.binary_search(&y).unwrap_err();
                next.insert(pos, y);
                subs.push((y, self.level(next, k - 1)?));
            }
            let adj = forest.adjacency();
            for &x in &alive {
                let is_high = high.binary_search(&x).is_ok();
                let neighbors = if is_high {
                    Vec::new()
                } else {
                    adj[x as usize].iter().map(|&y| stars[y as usize].clone()).collect()
                };
                let children = subs
                    .iter()
                    .filter(|(y, _)| *y != x)
                    .map(|(y, set)| (*y, set[x as usize].clone().expect("owner survives removal of another vertex")))
                    .collect();
                let detail = LevelDetail {
                    star_self: stars[x as usize].clone(),
                    hat_empty: hat_empty.clone(),
                    high: is_high,
                    neighbors,
                    children,
                };
                out[x as usize] = Some(make(x, LevelBody::Full(detail)));
            }
        }
        let set = Arc::new(out);
        self.memo.insert((removed, k), set.clone());
        Ok(set)
    }
}

pub fn build_warmup_labels(g: &Graph, u: &TerminalSet, f: usize) -> Result<Vec<WarmupLabel>> {
    build_warmup_labels_with_budget(g, u, f, DEFAULT_RECURSION_BUDGET)
}

/// As [`build_warmup_labels`], refusing once more than `budget` sub-instances
/// would be built.
pub fn build_warmup_labels_with_budget(
    g: &Graph,
    u: &TerminalSet,
    f: usize,
    budget: usize,
) -> Result<Vec<WarmupLabel>> {
    if f == 0 {
        return Err(Error::InvalidArgument("fault bound f must be at least 1".into()));
    }
    let mut builder = Builder { g, u, budget, built: 0, memo: HashMap::new() };
    let top = builder.level(Vec::new(), f)?;
    Ok(top
        .iter()
        .enumerate()
        .map(|(x, level)| WarmupLabel {
            owner: x as Vertex,
            n: g.n() as u32,
            f: f as u32,
            terminals: u.len() as u32,
            top: level.clone().expect("nothing is removed at the top level"),
        })
        .collect())
}

/// Decides whether the owners of `labels` form a Steiner cut.
pub fn query_warmup(labels: &[&WarmupLabel]) -> Result<bool> {
    let Some(first) = labels.first() else {
        return Err(Error::InvalidArgument("a query needs at least one label".into()));
    };
    let mut faults: BTreeMap<Vertex, &WarmupLabel> = BTreeMap::new();
    for &label in labels {
        if (label.n, label.f, label.terminals) != (first.n, first.f, first.terminals) {
            return Err(Error::mix("labels come from different builds"));
        }
        if let Some(prev) = faults.insert(label.owner, label) {
            if prev != label {
                return Err(Error::mix(format!("two different labels for vertex {}", label.owner)));
            }
        }
    }
    if faults.len() > first.f as usize {
        return Err(Error::TooManyFaults { size: faults.len(), bound: first.f as usize });
    }
    let levels: Vec<(Vertex, &WarmupLevel)> = faults.iter().map(|(&x, l)| (x, &*l.top)).collect();
    query_level(&levels)
}

fn query_level(levels: &[(Vertex, &WarmupLevel)]) -> Result<bool> {
    let (_, head) = levels[0];
    if levels.iter().any(|(_, l)| l.level != head.level || l.removed != head.removed) {
        return Err(Error::mix("labels disagree on the recursion level"));
    }
    if levels.len() > head.level as usize {
        return Err(Error::TooManyFaults { size: levels.len(), bound: head.level as usize });
    }
    if levels.len() == 1 {
        return Ok(head.cut_bit);
    }
    let mut details = Vec::with_capacity(levels.len());
    for (_, l) in levels {
        match &l.body {
            LevelBody::Full(d) => details.push(d),
            LevelBody::Trivial if matches!(head.body, LevelBody::Trivial) => {}
            _ => return Err(Error::mix("label kinds differ within one level")),
        }
    }
    if details.is_empty() {
        return Ok(false);
    }
    let fault_ids: Vec<Vertex> = levels.iter().map(|(x, _)| *x).collect();

    // One high vertex in F: drop it and recurse on H − y.
    if let Some(pos) = details.iter().position(|d| d.high) {
        let y = fault_ids[pos];
        let mut sub = Vec::with_capacity(levels.len() - 1);
        for (i, d) in details.iter().enumerate() {
            if i == pos {
                continue;
            }
            let child = d
                .children
                .binary_search_by_key(&y, |(c, _)| *c)
                .map_err(|_| Error::mix(format!("vertex {} has no label for the removal of {y}", fault_ids[i])))?;
            sub.push((fault_ids[i], &*d.children[child].1));
        }
        return query_level(&sub);
    }

    // All low degree.
    if details.iter().any(|d| d.hat_empty != details[0].hat_empty) {
        return Err(Error::mix("labels disagree on the empty subset label"));
    }
    if query_subset_label(&details[0].hat_empty, &fault_ids) {
        return Ok(true);
    }
    let mut stored: BTreeMap<Vertex, &StarLabel> = BTreeMap::new();
    for star in details.iter().flat_map(|d| &d.neighbors) {
        if fault_ids.contains(&star.vertex()) {
            continue;
        }
        if let Some(prev) = stored.insert(star.vertex(), star) {
            if prev != star {
                return Err(Error::mix(format!("conflicting entries for vertex {}", star.vertex())));
            }
        }
    }
    let fault_st: Vec<&StLabel> = details.iter().map(|d| d.star_self.st()).collect();
    let fault_reach: Vec<&ReachLabel> = details.iter().map(|d| d.star_self.reach()).collect();
    let mut reaching = Vec::new();
    for &star in stored.values() {
        if query_reach(star.reach(), &fault_reach)? {
            reaching.push(star);
        }
    }
    let Some((&pivot, rest)) = reaching.split_first() else { return Ok(false) };
    for &other in rest {
        if !query_st(&fault_st, pivot.st(), other.st())? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct WarmupStats {
    pub labels: usize,
    pub max_star_entries: usize,
    pub mean_star_entries: f64,
    pub max_serialized_bits: usize,
}

pub fn warmup_stats(labels: &[WarmupLabel]) -> WarmupStats {
    let counts: Vec<usize> = labels.iter().map(WarmupLabel::star_entry_count).collect();
    let total: usize = counts.iter().sum();
    WarmupStats {
        labels: labels.len(),
        max_star_entries: counts.iter().copied().max().unwrap_or(0),
        mean_star_entries: if labels.is_empty() { 0.0 } else { total as f64 / labels.len() as f64 },
        max_serialized_bits: labels.iter().map(|l| 8 * l.to_bytes().len()).max().unwrap_or(0),
    }
}

const BODY_BIT: u8 = 0;
const BODY_TRIVIAL: u8 = 1;
const BODY_FULL: u8 = 2;

impl WarmupLabel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.bytes(MAGIC);
        w.u8(VERSION);
        for v in [self.owner, self.n, self.f, self.terminals] {
            w.varint(u64::from(v));
        }
        write_level(&mut w, &self.top);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        if r.take(4)? != MAGIC || r.u8()? != VERSION {
            return Err(Error::malformed("not a warm-up label"));
        }
        let owner = r.varint_u32()?;
        let n = r.varint_u32()?;
        let f = r.varint_u32()?;
        let terminals = r.varint_u32()?;
        if owner >= n || f == 0 || terminals > n {
            return Err(Error::malformed("warm-up header out of range"));
        }
        let top = read_level(&mut r, owner, n, &[])?;
        if top.level != f {
            return Err(Error::malformed("top level differs from f"));
        }
        r.expect_end()?;
        Ok(WarmupLabel { owner, n, f, terminals, top: Arc::new(top) })
    }
}

fn write_star(w: &mut ByteWriter, star: &StarLabel) {
    w.varint(u64::from(star.vertex()));
    w.blob(star.st().payload());
    w.blob(star.reach().own().payload());
    w.blob(star.reach().apex().payload());
}

fn read_star(r: &mut ByteReader<'_>, n: u32) -> Result<StarLabel> {
    let vertex = r.varint_u32()?;
    let st = StLabel::from_payload(r.blob()?)?;
    let own = StLabel::from_payload(r.blob()?)?;
    let apex = StLabel::from_payload(r.blob()?)?;
    if apex.vertex() != n {
        return Err(Error::malformed("apex payload does not belong to the apex vertex"));
    }
    StarLabel::new(vertex, st, ReachLabel::new(own, apex)?)
}

fn write_level(w: &mut ByteWriter, level: &WarmupLevel) {
    w.varint(u64::from(level.level));
    w.varint(level.removed.len() as u64);
    for &v in &level.removed {
        w.varint(u64::from(v));
    }
    w.u8(u8::from(level.cut_bit));
    match &level.body {
        LevelBody::Bit => w.u8(BODY_BIT),
        LevelBody::Trivial => w.u8(BODY_TRIVIAL),
        LevelBody::Full(d) => {
            w.u8(BODY_FULL);
            w.u8(u8::from(d.high));
            write_star(w, &d.star_self);
            let bits = d.hat_empty.to_bits();
            w.varint(bits.len() as u64);
            w.bytes(bits.as_raw_slice());
            w.varint(d.neighbors.len() as u64);
            for star in &d.neighbors {
                write_star(w, star);
            }
            w.varint(d.children.len() as u64);
            for (y, child) in &d.children {
                w.varint(u64::from(*y));
                write_level(w, child);
            }
        }
    }
}

fn read_level(r: &mut ByteReader<'_>, owner: Vertex, n: u32, expect_removed: &[Vertex]) -> Result<WarmupLevel> {
    let level = r.varint_u32()?;
    let count = r.count()?;
    let removed: Vec<Vertex> = (0..count).map(|_| r.varint_u32()).collect::<Result<_>>()?;
    if level == 0 || removed != expect_removed || removed.binary_search(&owner).is_ok() {
        return Err(Error::malformed("inconsistent recursion level"));
    }
    let cut_bit = match r.u8()? {
        0 => false,
        1 => true,
        _ => return Err(Error::malformed("cut bit must be 0 or 1")),
    };
    let body = match r.u8()? {
        BODY_BIT if level == 1 => LevelBody::Bit,
        BODY_TRIVIAL if level >= 2 && !cut_bit => LevelBody::Trivial,
        BODY_FULL if level >= 2 => {
            let high = match r.u8()? {
                0 => false,
                1 => true,
                _ => return Err(Error::malformed("high flag must be 0 or 1")),
            };
            let star_self = read_star(r, n)?;
            if star_self.vertex() != owner {
                return Err(Error::malformed("self entry belongs to another vertex"));
            }
            let len = r.varint()?;
            let bytes =
                r.take(usize::try_from(len.div_ceil(8)).map_err(|_| Error::malformed("bit length too large"))?)?;
            let mut bits = Bits::from_slice(bytes);
            if bits[len as usize..].any() {
                return Err(Error::malformed("nonzero padding bits"));
            }
            bits.truncate(len as usize);
            let hat_empty = SubsetLabel::from_bits(&bits, n, level)?;
            let neighbor_count = r.count()?;
            let mut neighbors: Vec<StarLabel> = Vec::with_capacity(neighbor_count);
            for _ in 0..neighbor_count {
                let star = read_star(r, n)?;
                if star.vertex() >= n
                    || star.vertex() == owner
                    || neighbors.last().is_some_and(|p| p.vertex() >= star.vertex())
                    || !star.st().same_instance(star_self.st())?
                {
                    return Err(Error::malformed("invalid neighbour entry"));
                }
                neighbors.push(star);
            }
            if high && !neighbors.is_empty() {
                return Err(Error::malformed("high vertex with stored neighbours"));
            }
            let child_count = r.count()?;
            let mut children: Vec<(Vertex, Arc<WarmupLevel>)> = Vec::with_capacity(child_count);
            for _ in 0..child_count {
                let y = r.varint_u32()?;
                if y >= n
                    || y == owner
                    || children.last().is_some_and(|(p, _)| *p >= y)
                    || removed.binary_search(&y).is_ok()
                {
                    return Err(Error::malformed("invalid child key"));
                }
                let mut next = removed.clone();
                next.insert(next.binary_search(&y).unwrap_err(), y);
                let child = read_level(r, owner, n, &next)?;
                if child.level != level - 1 {
                    return Err(Error::malformed("child level out of sequence"));
                }
                children.push((y, Arc::new(child)));
            }
            LevelBody::Full(LevelDetail { star_self, hat_empty, high, neighbors, children })
        }
        _ => return Err(Error::malformed("level body inconsistent with its level")),
    };
    Ok(WarmupLevel { level, removed, cut_bit, body })
}
