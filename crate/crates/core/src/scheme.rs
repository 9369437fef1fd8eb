//! The labeling scheme for `f ≥ 1` faults.
//!
//! For `f ≥ 2` the graph is decomposed with threshold
//! `r = ⌈|U|^{1−1/f}⌉ + 2` into a Steiner forest `T` and a small set `B` of
//! high-degree vertices. The label of `x` holds star entries (pairwise
//! connectivity plus terminal-reach labels) for `x`, for a terminal `u_x`
//! reachable from `x` in `G − B`, and for every vertex of `B`; plus the subset
//! label of `∅`. A vertex outside `B` also keeps the entries of its `T − B`
//! neighbours, while a vertex of `B` keeps the subset label of every `K ⊆ B`
//! of size at most `f` that contains it.
//!
//! A query first asks the subset label of `F ∩ B` whether the bad part of
//! `F` already splits the surviving terminals. Otherwise every stored entry
//! outside `F` that still reaches a terminal is compared against one pivot;
//! any disconnected pair is a witness.
//!
//! With `f = 1` a label is the single bit "is `{x}` a Steiner cut", and with
//! `|U| ≤ 1` every label answers no.
//!
//! # Byte format
//!
//! ```text
//! "FTSL" | version | kind | owner | n | f | r | |U|          (varints)
//! kind 0 (constant):  nothing
//! kind 1 (cut bit):   u8 0/1
//! kind 2 (full):      apex payload
//!                     entry count, entries sorted by vertex:
//!                       vertex | st payload | reach payload
//!                     self index | u_x index + 1 (0 = none)
//!                     |B| | indices of B
//!                     subset label of ∅ as bit length | bytes
//!                     role: 0 low  | neighbour count | indices
//!                           1 high | subset count | (|K| | ids | bit length | bytes)*
//! ```
//!
//! Entries that appear in several sections are stored once and referenced by
//! index.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{ByteReader, ByteWriter};
use crate::decomp::decompose;
use crate::error::{Error, Result};
use crate::graph::{components, is_steiner_cut, Graph, TerminalSet, Vertex};
use crate::st::{build_star_labels, query_reach, query_st, ReachLabel, StLabel, StarLabel};
use crate::subset::{build_subset_label, query_subset_label, Bits, SubsetLabel};

const MAGIC: &[u8; 4] = b"FTSL";
const VERSION: u8 = 1;

/// Build parameters shared by every label of one labeling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LabelMeta {
    pub n: u32,
    pub f: u32,
    /// Degree threshold; 0 when no decomposition was made.
    pub r: u32,
    pub terminals: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeLabel {
    owner: Vertex,
    meta: LabelMeta,
    body: LabelBody,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelBody {
    /// At most one terminal: nothing can be separated.
    Constant,
    /// `f = 1`: whether the owner alone is a Steiner cut.
    CutBit(bool),
    Full(Box<FullLabel>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullLabel {
    star_self: StarLabel,
    star_ux: Option<StarLabel>,
    /// Sorted by vertex.
    star_bad: Vec<StarLabel>,
    hat_empty: SubsetLabel,
    role: Role,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Role {
    /// Owner outside `B`: entries of its `T − B` neighbours, sorted by vertex.
    Low { neighbors: Vec<StarLabel> },
    /// Owner in `B`: the subset label of each `K ⊆ B` containing it, `|K| ≤ f`.
    High { hat_map: BTreeMap<Vec<Vertex>, SubsetLabel> },
}

impl SchemeLabel {
    pub fn owner(&self) -> Vertex {
        self.owner
    }

    pub fn meta(&self) -> LabelMeta {
        self.meta
    }

    pub fn body(&self) -> &LabelBody {
        &self.body
    }

    /// Number of star entries the label logically carries:
    /// `2 + |B| + deg_{T−B}(x)` for full labels, 0 otherwise.
    pub fn star_entry_count(&self) -> usize {
        match &self.body {
            LabelBody::Full(full) => {
                let neighbors = match &full.role {
                    Role::Low { neighbors } => neighbors.len(),
                    Role::High { .. } => 0,
                };
                2 + full.star_bad.len() + neighbors
            }
            _ => 0,
        }
    }

    /// `1 + |hat_map|` for full labels, 0 otherwise.
    pub fn hat_entry_count(&self) -> usize {
        match &self.body {
            LabelBody::Full(full) => {
                1 + match &full.role {
                    Role::High { hat_map } => hat_map.len(),
                    Role::Low { .. } => 0,
                }
            }
            _ => 0,
        }
    }

    /// Bad vertices `B` as recorded in the label (empty unless full).
    pub fn bad_set(&self) -> Vec<Vertex> {
        match &self.body {
            LabelBody::Full(full) => full.star_bad.iter().map(StarLabel::vertex).collect(),
            _ => Vec::new(),
        }
    }
}

impl FullLabel {
    pub fn star_self(&self) -> &StarLabel {
        &self.star_self
    }

    pub fn star_ux(&self) -> Option<&StarLabel> {
        self.star_ux.as_ref()
    }

    pub fn star_bad(&self) -> &[StarLabel] {
        &self.star_bad
    }

    pub fn hat_empty(&self) -> &SubsetLabel {
        &self.hat_empty
    }

    pub fn role(&self) -> &Role {
        &self.role
    }

    fn stars(&self) -> impl Iterator<Item = &StarLabel> {
        let neighbors: &[StarLabel] = match &self.role {
            Role::Low { neighbors } => neighbors,
            Role::High { .. } => &[],
        };
        std::iter::once(&self.star_self).chain(&self.star_ux).chain(&self.star_bad).chain(neighbors)
    }
}

/// `⌈|U|^{1−1/f}⌉ + 2`, computed exactly as the least `c` with
/// `c^f ≥ |U|^{f−1}`.
pub fn degree_threshold(terminals: usize, f: usize) -> usize {
    assert!(f >= 1);
    ceil_fractional_power(terminals as u64, f as u32 - 1, f as u32) as usize + 2
}

/// Least `c` with `c^den ≥ base^num`.
pub(crate) fn ceil_fractional_power(base: u64, num: u32, den: u32) -> u64 {
    let estimate = (base as f64).powf(num as f64 / den as f64).ceil() as u64;
    let Some(target) = u128::from(base).checked_pow(num) else {
        return estimate;
    };
    let reaches = |c: u64| u128::from(c).checked_pow(den).is_none_or(|p| p >= target);
    let mut c = estimate.saturating_sub(2);
    while !reaches(c) {
        c += 1;
    }
    while c > 0 && reaches(c - 1) {
        c -= 1;
    }
    c
}

/// Builds one label per vertex, indexed by vertex id.
pub fn build_labels(g: &Graph, u: &TerminalSet, f: usize) -> Result<Vec<SchemeLabel>> {
    if f == 0 {
        return Err(Error::InvalidArgument("fault bound f must be at least 1".into()));
    }
    let n = g.n();
    let meta = |r: usize| LabelMeta { n: n as u32, f: f as u32, r: r as u32, terminals: u.len() as u32 };

    if f == 1 {
        let m = meta(0);
        return Ok((0..n as Vertex)
            .into_par_iter()
            .map(|x| SchemeLabel { owner: x, meta: m, body: LabelBody::CutBit(is_steiner_cut(g, u, &[x])) })
            .collect());
    }
    if u.len() <= 1 {
        let m = meta(0);
        return Ok((0..n as Vertex).map(|x| SchemeLabel { owner: x, meta: m, body: LabelBody::Constant }).collect());
    }

    let r = degree_threshold(u.len(), f);
    let d = decompose(g, u, r)?;
    let bad = &d.bad;
    let stars = build_star_labels(g, u, f)?;

    // u_x: smallest terminal in x's component of G − B.
    let comps = components(g, bad);
    let mut first_terminal = vec![None; comps.count()];
    for t in u.iter() {
        if let Some(c) = comps.of(t) {
            first_terminal[c as usize].get_or_insert(t);
        }
    }

    let subsets: Vec<Vec<Vertex>> = subsets_up_to(bad, f);
    let hats: Vec<(Vec<Vertex>, SubsetLabel)> =
        subsets.into_par_iter().map(|k| build_subset_label(g, u, &k, f).map(|h| (k, h))).collect::<Result<_>>()?;
    let hat_empty = build_subset_label(g, u, &[], f)?;
    let star_bad: Vec<StarLabel> = bad.iter().map(|&b| stars[b as usize].clone()).collect();
    let tree_adj = d.forest.adjacency();
    let m = meta(r);

    Ok((0..n as Vertex)
        .into_par_iter()
        .map(|x| {
            let ux = comps.of(x).and_then(|c| first_terminal[c as usize]);
            let role = if d.is_bad(x) {
                let hat_map = hats
                    .iter()
                    .filter(|(k, _)| k.binary_search(&x).is_ok())
                    .map(|(k, h)| (k.clone(), h.clone()))
                    .collect();
                Role::High { hat_map }
            } else {
                let neighbors = tree_adj[x as usize]
                    .iter()
                    .filter(|&&y| !d.is_bad(y))
                    .map(|&y| stars[y as usize].clone())
                    .collect();
                Role::Low { neighbors }
            };
            let full = FullLabel {
                star_self: stars[x as usize].clone(),
                star_ux: ux.map(|t| stars[t as usize].clone()),
                star_bad: star_bad.clone(),
                hat_empty: hat_empty.clone(),
                role,
            };
            SchemeLabel { owner: x, meta: m, body: LabelBody::Full(Box::new(full)) }
        })
        .collect())
}

/// Nonempty subsets of the sorted set `items` with at most `f` members, in
/// lexicographic order.
fn subsets_up_to(items: &[Vertex], f: usize) -> Vec<Vec<Vertex>> {
    fn extend(items: &[Vertex], start: usize, f: usize, current: &mut Vec<Vertex>, out: &mut Vec<Vec<Vertex>>) {
        for i in start..items.len() {
            current.push(items[i]);
            out.push(current.clone());
            if current.len() < f {
                extend(items, i + 1, f, current, out);
            }
            current.pop();
        }
    }
    let mut out = Vec::new();
    extend(items, 0, f, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The single faulty vertex is a cut vertex for the terminals.
    CutBit { vertex: Vertex },
    /// `K = F ∩ B` already separates the surviving terminals.
    Subset { k: Vec<Vertex> },
    /// Both vertices reach terminals but not each other.
    DisconnectedPair { pivot: Vertex, other: Vertex },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QueryAnswer {
    pub verdict: bool,
    pub witness: Option<Witness>,
}

impl QueryAnswer {
    const NO: QueryAnswer = QueryAnswer { verdict: false, witness: None };

    fn yes(witness: Witness) -> Self {
        QueryAnswer { verdict: true, witness: Some(witness) }
    }
}

/// Which reaching entry the others are compared against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Pivot {
    #[default]
    Smallest,
    Largest,
}

/// Decides whether the owners of `labels` form a Steiner cut.
pub fn query(labels: &[&SchemeLabel]) -> Result<QueryAnswer> {
    query_with(labels, Pivot::Smallest)
}

pub fn query_with(labels: &[&SchemeLabel], pivot: Pivot) -> Result<QueryAnswer> {
    let Some(first) = labels.first() else {
        return Err(Error::InvalidArgument("a query needs at least one label".into()));
    };
    let meta = first.meta;
    let mut faults: Vec<&SchemeLabel> = Vec::with_capacity(labels.len());
    for &label in labels {
        if label.meta != meta {
            return Err(Error::mix(format!("metadata of vertex {} differs from vertex {}", label.owner, first.owner)));
        }
        match faults.iter().find(|l| l.owner == label.owner) {
            Some(&seen) if seen != label => {
                return Err(Error::mix(format!("two different labels for vertex {}", label.owner)));
            }
            Some(_) => {}
            None => faults.push(label),
        }
    }
    if faults.len() > meta.f as usize {
        return Err(Error::TooManyFaults { size: faults.len(), bound: meta.f as usize });
    }
    faults.sort_by_key(|l| l.owner);
    let fault_ids: Vec<Vertex> = faults.iter().map(|l| l.owner).collect();

    let full: Vec<&FullLabel> = match &first.body {
        LabelBody::Constant => {
            ensure_all(&faults, |b| matches!(b, LabelBody::Constant))?;
            return Ok(QueryAnswer::NO);
        }
        LabelBody::CutBit(_) => {
            ensure_all(&faults, |b| matches!(b, LabelBody::CutBit(_)))?;
            let LabelBody::CutBit(bit) = faults[0].body else { unreachable!() };
            return Ok(if bit { QueryAnswer::yes(Witness::CutBit { vertex: fault_ids[0] }) } else { QueryAnswer::NO });
        }
        LabelBody::Full(_) => faults
            .iter()
            .map(|l| match &l.body {
                LabelBody::Full(full) => Ok(&**full),
                _ => Err(Error::mix("label kinds differ")),
            })
            .collect::<Result<_>>()?,
    };

    let bad: Vec<Vertex> = full[0].star_bad.iter().map(StarLabel::vertex).collect();
    for label in &full[1..] {
        if label.star_bad.iter().map(StarLabel::vertex).ne(bad.iter().copied()) || label.hat_empty != full[0].hat_empty
        {
            return Err(Error::mix("labels disagree on the bad set"));
        }
    }

    // Does K = F ∩ B already separate U − F?
    let k: Vec<Vertex> = fault_ids.iter().copied().filter(|v| bad.binary_search(v).is_ok()).collect();
    let hat = if k.is_empty() {
        &full[0].hat_empty
    } else {
        let holder = full[fault_ids.iter().position(|&v| v == k[0]).unwrap()];
        match &holder.role {
            Role::High { hat_map } => {
                hat_map.get(&k).ok_or_else(|| Error::mix(format!("no subset label for {k:?} in vertex {}", k[0])))?
            }
            Role::Low { .. } => return Err(Error::mix(format!("vertex {} is in B but stores no subset labels", k[0]))),
        }
    };
    if query_subset_label(hat, &fault_ids) {
        return Ok(QueryAnswer::yes(Witness::Subset { k }));
    }

    // Stored entries outside F, deduplicated by vertex.
    let mut stored: BTreeMap<Vertex, &StarLabel> = BTreeMap::new();
    for star in full.iter().flat_map(|l| l.stars()) {
        if fault_ids.binary_search(&star.vertex()).is_ok() {
            continue;
        }
        if let Some(prev) = stored.insert(star.vertex(), star) {
            if prev != star {
                return Err(Error::mix(format!("conflicting entries for vertex {}", star.vertex())));
            }
        }
    }

    let fault_st: Vec<&StLabel> = full.iter().map(|l| l.star_self.st()).collect();
    let fault_reach: Vec<&ReachLabel> = full.iter().map(|l| l.star_self.reach()).collect();
    let mut reaching = Vec::new();
    for &star in stored.values() {
        if query_reach(star.reach(), &fault_reach)? {
            reaching.push(star);
        }
    }
    let chosen = match pivot {
        Pivot::Smallest => reaching.first(),
        Pivot::Largest => reaching.last(),
    };
    let Some(&chosen) = chosen else { return Ok(QueryAnswer::NO) };
    for &other in &reaching {
        if other.vertex() != chosen.vertex() && !query_st(&fault_st, chosen.st(), other.st())? {
            return Ok(QueryAnswer::yes(Witness::DisconnectedPair { pivot: chosen.vertex(), other: other.vertex() }));
        }
    }
    Ok(QueryAnswer::NO)
}

fn ensure_all(labels: &[&SchemeLabel], pred: impl Fn(&LabelBody) -> bool) -> Result<()> {
    if labels.iter().all(|l| pred(&l.body)) {
        Ok(())
    } else {
        Err(Error::mix("label kinds differ"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelStats {
    pub labels: usize,
    pub max_star_entries: usize,
    pub mean_star_entries: f64,
    pub max_hat_entries: usize,
    pub mean_hat_entries: f64,
    /// Whole serialized label, header included. Dominated by the connectivity
    /// backend, so only meaningful relative to that backend.
    pub max_serialized_bits: usize,
    /// Body bits without the header; 1 for cut-bit labels.
    pub max_payload_bits: usize,
    pub r: usize,
    pub bad_count: usize,
}

pub fn label_stats(labels: &[SchemeLabel]) -> LabelStats {
    let count = labels.len();
    let mean = |sum: usize| if count == 0 { 0.0 } else { sum as f64 / count as f64 };
    let stars: Vec<usize> = labels.iter().map(SchemeLabel::star_entry_count).collect();
    let hats: Vec<usize> = labels.iter().map(SchemeLabel::hat_entry_count).collect();
    let sizes: Vec<(usize, usize)> = labels
        .par_iter()
        .map(|l| {
            let total = l.encoded_len();
            let payload = match l.body {
                LabelBody::Constant => 0,
                LabelBody::CutBit(_) => 1,
                LabelBody::Full(_) => 8 * (total - l.header_len()),
            };
            (8 * total, payload)
        })
        .collect();
    LabelStats {
        labels: count,
        max_star_entries: stars.iter().copied().max().unwrap_or(0),
        mean_star_entries: mean(stars.iter().sum()),
        max_hat_entries: hats.iter().copied().max().unwrap_or(0),
        mean_hat_entries: mean(hats.iter().sum()),
        max_serialized_bits: sizes.iter().map(|s| s.0).max().unwrap_or(0),
        max_payload_bits: sizes.iter().map(|s| s.1).max().unwrap_or(0),
        r: labels.first().map_or(0, |l| l.meta.r as usize),
        bad_count: labels.first().map_or(0, |l| l.bad_set().len()),
    }
}

const KIND_CONSTANT: u8 = 0;
const KIND_CUT_BIT: u8 = 1;
const KIND_FULL: u8 = 2;

fn write_bits(w: &mut ByteWriter, bits: &Bits) {
    w.varint(bits.len() as u64);
    w.bytes(bits.as_raw_slice());
}

fn read_bits(r: &mut ByteReader<'_>) -> Result<Bits> {
    let len = r.varint()?;
    let bytes = r.take(len.div_ceil(8).try_into().map_err(|_| Error::malformed("bit length too large"))?)?;
    let mut bits = Bits::from_slice(bytes);
    if bits[len as usize..].any() {
        return Err(Error::malformed("nonzero padding bits"));
    }
    bits.truncate(len as usize);
    Ok(bits)
}

fn read_subset(r: &mut ByteReader<'_>, meta: LabelMeta) -> Result<SubsetLabel> {
    let bits = read_bits(r)?;
    SubsetLabel::from_bits(&bits, meta.n, meta.f)
}

impl SchemeLabel {
    fn header_len(&self) -> usize {
        let mut w = ByteWriter::new();
        self.write_header(&mut w, 0);
        w.finish().len()
    }

    fn write_header(&self, w: &mut ByteWriter, kind: u8) {
        w.bytes(MAGIC);
        w.u8(VERSION);
        w.u8(kind);
        for v in [self.owner, self.meta.n, self.meta.f, self.meta.r, self.meta.terminals] {
            w.varint(u64::from(v));
        }
    }

    pub fn encoded_len(&self) -> usize {
        self.to_bytes().len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        match &self.body {
            LabelBody::Constant => self.write_header(&mut w, KIND_CONSTANT),
            LabelBody::CutBit(bit) => {
                self.write_header(&mut w, KIND_CUT_BIT);
                w.u8(u8::from(*bit));
            }
            LabelBody::Full(full) => {
                self.write_header(&mut w, KIND_FULL);
                w.blob(full.star_self.reach().apex().payload());
                let mut table: Vec<&StarLabel> = full.stars().collect();
                table.sort_by_key(|s| s.vertex());
                table.dedup_by_key(|s| s.vertex());
                let index = |v: Vertex| table.binary_search_by_key(&v, |s| s.vertex()).unwrap() as u64;
                w.varint(table.len() as u64);
                for star in &table {
                    w.varint(u64::from(star.vertex()));
                    w.blob(star.st().payload());
                    w.blob(star.reach().own().payload());
                }
                w.varint(index(full.star_self.vertex()));
                w.varint(full.star_ux.as_ref().map_or(0, |s| index(s.vertex()) + 1));
                w.varint(full.star_bad.len() as u64);
                for star in &full.star_bad {
                    w.varint(index(star.vertex()));
                }
                write_bits(&mut w, &full.hat_empty.to_bits());
                match &full.role {
                    Role::Low { neighbors } => {
                        w.u8(0);
                        w.varint(neighbors.len() as u64);
                        for star in neighbors {
                            w.varint(index(star.vertex()));
                        }
                    }
                    Role::High { hat_map } => {
                        w.u8(1);
                        w.varint(hat_map.len() as u64);
                        for (k, hat) in hat_map {
                            w.varint(k.len() as u64);
                            for &v in k {
                                w.varint(u64::from(v));
                            }
                            write_bits(&mut w, &hat.to_bits());
                        }
                    }
                }
            }
        }
        w.finish()
    }

    /// Decodes and validates one label; the bytes must hold exactly one.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        if r.take(4)? != MAGIC {
            return Err(Error::malformed("not a scheme label"));
        }
        if r.u8()? != VERSION {
            return Err(Error::malformed("unsupported scheme label version"));
        }
        let kind = r.u8()?;
        let owner = r.varint_u32()?;
        let meta = LabelMeta { n: r.varint_u32()?, f: r.varint_u32()?, r: r.varint_u32()?, terminals: r.varint_u32()? };
        if owner >= meta.n || meta.f == 0 || meta.terminals > meta.n {
            return Err(Error::malformed("label header out of range"));
        }
        let body = match kind {
            KIND_CONSTANT if meta.r == 0 && meta.f >= 2 && meta.terminals <= 1 => LabelBody::Constant,
            KIND_CUT_BIT if meta.r == 0 && meta.f == 1 => match r.u8()? {
                0 => LabelBody::CutBit(false),
                1 => LabelBody::CutBit(true),
                _ => return Err(Error::malformed("cut bit must be 0 or 1")),
            },
            KIND_FULL
                if meta.f >= 2
                    && meta.terminals >= 2
                    && meta.r as usize == degree_threshold(meta.terminals as usize, meta.f as usize) =>
            {
                LabelBody::Full(Box::new(read_full(&mut r, owner, meta)?))
            }
            _ => return Err(Error::malformed("label kind inconsistent with its header")),
        };
        r.expect_end()?;
        Ok(SchemeLabel { owner, meta, body })
    }
}

fn read_full(r: &mut ByteReader<'_>, owner: Vertex, meta: LabelMeta) -> Result<FullLabel> {
    let apex = StLabel::from_payload(r.blob()?)?;
    if apex.vertex() != meta.n {
        return Err(Error::malformed("apex payload does not belong to the apex vertex"));
    }
    let count = r.count()?;
    let mut table: Vec<StarLabel> = Vec::with_capacity(count);
    for _ in 0..count {
        let vertex = r.varint_u32()?;
        if vertex >= meta.n || table.last().is_some_and(|prev| prev.vertex() >= vertex) {
            return Err(Error::malformed("entry vertices out of range or order"));
        }
        let st = StLabel::from_payload(r.blob()?)?;
        let own = StLabel::from_payload(r.blob()?)?;
        let star = StarLabel::new(vertex, st, ReachLabel::new(own, apex.clone())?)?;
        if let Some(first) = table.first() {
            if !first.st().same_instance(star.st())? {
                return Err(Error::mix("entries of one label come from different instances"));
            }
        }
        table.push(star);
    }
    let entry = |i: u64| -> Result<StarLabel> {
        usize::try_from(i)
            .ok()
            .and_then(|i| table.get(i))
            .cloned()
            .ok_or_else(|| Error::malformed("entry index out of range"))
    };
    let star_self = entry(r.varint()?)?;
    if star_self.vertex() != owner {
        return Err(Error::malformed("self entry belongs to another vertex"));
    }
    let star_ux = match r.varint()? {
        0 => None,
        i => Some(entry(i - 1)?),
    };
    let bad_count = r.count()?;
    let mut star_bad: Vec<StarLabel> = Vec::with_capacity(bad_count);
    for _ in 0..bad_count {
        let star = entry(r.varint()?)?;
        if star_bad.last().is_some_and(|prev| prev.vertex() >= star.vertex()) {
            return Err(Error::malformed("bad set not sorted"));
        }
        star_bad.push(star);
    }
    let bad: Vec<Vertex> = star_bad.iter().map(StarLabel::vertex).collect();
    let hat_empty = read_subset(r, meta)?;
    let owner_bad = bad.binary_search(&owner).is_ok();
    let role = match r.u8()? {
        0 if !owner_bad => {
            let len = r.count()?;
            if len > meta.r as usize {
                return Err(Error::malformed("more forest neighbours than the threshold allows"));
            }
            let mut neighbors: Vec<StarLabel> = Vec::with_capacity(len);
            for _ in 0..len {
                let star = entry(r.varint()?)?;
                let v = star.vertex();
                if v == owner || bad.binary_search(&v).is_ok() || neighbors.last().is_some_and(|p| p.vertex() >= v) {
                    return Err(Error::malformed("invalid forest neighbour list"));
                }
                neighbors.push(star);
            }
            Role::Low { neighbors }
        }
        1 if owner_bad => {
            let len = r.count()?;
            let mut hat_map = BTreeMap::new();
            let mut last: Option<Vec<Vertex>> = None;
            for _ in 0..len {
                let size = r.count()?;
                if size == 0 || size > meta.f as usize {
                    return Err(Error::malformed("subset size out of range"));
                }
                let k: Vec<Vertex> = (0..size).map(|_| r.varint_u32()).collect::<Result<_>>()?;
                let valid = k.windows(2).all(|w| w[0] < w[1])
                    && k.iter().all(|v| bad.binary_search(v).is_ok())
                    && k.binary_search(&owner).is_ok()
                    && last.as_ref().is_none_or(|prev| prev < &k);
                if !valid {
                    return Err(Error::malformed("invalid subset key"));
                }
                hat_map.insert(k.clone(), read_subset(r, meta)?);
                last = Some(k);
            }
            if hat_map.len() != subsets_containing_count(bad.len(), meta.f as usize) {
                return Err(Error::malformed("subset label table incomplete"));
            }
            Role::High { hat_map }
        }
        _ => return Err(Error::malformed("role inconsistent with the bad set")),
    };
    let full = FullLabel { star_self, star_ux, star_bad, hat_empty, role };
    let mut used = vec![false; table.len()];
    for star in full.stars() {
        used[table.binary_search_by_key(&star.vertex(), |s| s.vertex()).unwrap()] = true;
    }
    if used.contains(&false) {
        return Err(Error::malformed("unreferenced entry"));
    }
    Ok(full)
}

/// `Σ_{j<f} C(|B|−1, j)`: subsets of `B` of size at most `f` containing a
/// fixed member.
fn subsets_containing_count(bad: usize, f: usize) -> usize {
    if bad == 0 {
        return 0;
    }
    let mut total = 0usize;
    let mut binom = 1usize;
    for j in 0..f.min(bad) {
        total += binom;
        binom = binom * (bad - 1 - j) / (j + 1);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::new(n, (1..n as Vertex).map(|i| (i - 1, i))).unwrap()
    }

    fn c4() -> Graph {
        Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    fn ask(labels: &[SchemeLabel], faults: &[Vertex]) -> QueryAnswer {
        let refs: Vec<&SchemeLabel> = faults.iter().map(|&v| &labels[v as usize]).collect();
        query(&refs).unwrap()
    }

    #[test]
    fn thresholds() {
        assert_eq!(degree_threshold(16, 2), 6);
        assert_eq!(degree_threshold(17, 2), 7);
        assert_eq!(degree_threshold(64, 3), 18);
        assert_eq!(degree_threshold(1, 2), 3);
        assert_eq!(degree_threshold(1000, 1), 3);
        assert_eq!(ceil_fractional_power(256, 3, 4), 64);
        assert!(ceil_fractional_power(u64::MAX, 40, 41) > 0);
    }

    #[test]
    fn single_fault_labels_are_cut_bits() {
        let g = path(3);
        let u = TerminalSet::new(3, [0, 2]).unwrap();
        let labels = build_labels(&g, &u, 1).unwrap();
        let bits: Vec<_> = labels.iter().map(|l| l.body().clone()).collect();
        assert_eq!(bits, vec![LabelBody::CutBit(false), LabelBody::CutBit(true), LabelBody::CutBit(false)]);
        assert!(ask(&labels, &[1]).verdict);
        let stats = label_stats(&labels);
        assert_eq!(stats.max_payload_bits, 1);
        assert_eq!(labels[1].to_bytes().len(), labels[1].header_len() + 1);
    }

    #[test]
    fn path_and_cycle_queries() {
        let g = path(3);
        let u = TerminalSet::new(3, [0, 2]).unwrap();
        let labels = build_labels(&g, &u, 2).unwrap();
        assert!(ask(&labels, &[1]).verdict);
        assert!(!ask(&labels, &[0]).verdict);

        let g = c4();
        let u = TerminalSet::new(4, [0, 2]).unwrap();
        let labels = build_labels(&g, &u, 2).unwrap();
        assert!(!ask(&labels, &[1]).verdict);
        assert!(ask(&labels, &[1, 3]).verdict);
        assert!(!ask(&labels, &[0, 1]).verdict);
    }

    #[test]
    fn agrees_with_oracle_everywhere_on_a_star() {
        let g = Graph::new(6, (1..6).map(|v| (0, v))).unwrap();
        let u = TerminalSet::new(6, 1..6).unwrap();
        for f in 1..=3 {
            let labels = build_labels(&g, &u, f).unwrap();
            for a in 0..6 {
                for b in a..6 {
                    for c in b..6 {
                        let mut fs = vec![a, b, c];
                        fs.dedup();
                        if fs.len() > f {
                            continue;
                        }
                        let ans = ask(&labels, &fs);
                        assert_eq!(ans.verdict, is_steiner_cut(&g, &u, &fs), "f={f} F={fs:?}");
                        assert_eq!(ans.verdict, ans.witness.is_some());
                        let largest: Vec<&SchemeLabel> = fs.iter().map(|&v| &labels[v as usize]).collect();
                        assert_eq!(query_with(&largest, Pivot::Largest).unwrap().verdict, ans.verdict);
                    }
                }
            }
        }
    }

    #[test]
    fn high_vertices_hold_their_subsets() {
        // Three hubs each joined to four private leaves, hubs on a path.
        let mut edges = vec![(0, 1), (1, 2)];
        let mut next = 3;
        for hub in 0..3 {
            for _ in 0..6 {
                edges.push((hub, next));
                next += 1;
            }
        }
        let g = Graph::new(next as usize, edges).unwrap();
        let u = TerminalSet::new(g.n(), 3..next).unwrap();
        let labels = build_labels(&g, &u, 2).unwrap();
        let b = labels[0].bad_set();
        assert_eq!(b, vec![0, 1, 2]);
        for &x in &b {
            assert_eq!(labels[x as usize].hat_entry_count(), 1 + 3);
        }
        assert_eq!(labels[3].star_entry_count(), 2 + 3);
        assert!(ask(&labels, &[1]).verdict);
        assert!(!ask(&labels, &[3, 4]).verdict);
    }

    #[test]
    fn tiny_terminal_sets_give_constant_labels() {
        let g = path(4);
        let u = TerminalSet::new(4, [2]).unwrap();
        let labels = build_labels(&g, &u, 2).unwrap();
        assert!(labels.iter().all(|l| *l.body() == LabelBody::Constant));
        assert!(!ask(&labels, &[1, 3]).verdict);
    }

    #[test]
    fn byte_roundtrip_and_mixing() {
        let g = c4();
        let u = TerminalSet::new(4, [0, 2]).unwrap();
        let labels = build_labels(&g, &u, 2).unwrap();
        for label in &labels {
            let back = SchemeLabel::from_bytes(&label.to_bytes()).unwrap();
            assert_eq!(&back, label);
        }
        let other = build_labels(&path(4), &u, 2).unwrap();
        assert!(matches!(query(&[&labels[1], &other[3]]), Err(Error::LabelMix(_))));
        assert!(matches!(query(&[&labels[1], &labels[2], &labels[3]]), Err(Error::TooManyFaults { .. })));
        let mut bytes = labels[1].to_bytes();
        bytes.push(0);
        assert!(SchemeLabel::from_bytes(&bytes).is_err());
    }

    #[test]
    fn subset_counting() {
        assert_eq!(subsets_up_to(&[1, 2, 3], 2), vec![vec![1], vec![1, 2], vec![1, 3], vec![2], vec![2, 3], vec![3]]);
        assert_eq!(subsets_containing_count(3, 2), 3);
        assert_eq!(subsets_containing_count(5, 3), 1 + 4 + 6);
        assert_eq!(subsets_containing_count(2, 5), 2);
    }
}
