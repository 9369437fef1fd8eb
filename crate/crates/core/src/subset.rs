//! Subset labels for a vertex set `K`: an `O(f log n)`-bit summary of how
//! the terminals fall into the components of `G − K`, enough to decide for
//! any `|F| ≤ f` whether `K` separates `U − F` knowing only the ids in `F`.
//!
//! Let `U_1, …, U_p` be the terminal sets of the terminal-bearing components
//! of `G − K`, sorted by size. Three cases:
//!
//! * some split point `q` leaves more than `f` terminals on both sides: the
//!   answer is always yes;
//! * otherwise, if `|U_p| > f`, that group always survives and the label
//!   keeps only the at most `f` terminals of `U_1, …, U_{p−1}`;
//! * otherwise all groups together hold at most `3f` terminals and are kept.
//!
//! Bit layout (MSB first): a 2-bit tag (`00` always-yes, `01` big-last,
//! `10` small-all), then per stored group its size in `⌈log₂(f+1)⌉` bits
//! followed by its ids in `⌈log₂ n⌉` bits each, and a zero size as
//! terminator. `n` and `f` come from the surrounding label.

use bitvec::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{components, Graph, TerminalSet, Vertex};

pub type Bits = BitVec<u8, Msb0>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SubsetKind {
    AlwaysYes,
    /// `U_1, …, U_{p−1}`; the omitted `U_p` has more than `f` terminals.
    BigLast {
        small_groups: Vec<Vec<Vertex>>,
    },
    SmallAll {
        groups: Vec<Vec<Vertex>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsetLabel {
    n: u32,
    f: u32,
    kind: SubsetKind,
}

const TAG_ALWAYS: u8 = 0b00;
const TAG_BIG_LAST: u8 = 0b01;
const TAG_SMALL_ALL: u8 = 0b10;

fn ceil_log2(x: u64) -> usize {
    if x <= 1 {
        0
    } else {
        (64 - (x - 1).leading_zeros()) as usize
    }
}

pub(crate) fn id_width(n: u32) -> usize {
    ceil_log2(u64::from(n)).max(1)
}

fn size_width(f: u32) -> usize {
    ceil_log2(u64::from(f) + 1)
}

/// Terminal sets of the terminal-bearing components of `G − K`, sorted by
/// size with ties broken by smallest member.
fn terminal_groups(g: &Graph, u: &TerminalSet, k_set: &[Vertex]) -> Vec<Vec<Vertex>> {
    let comps = components(g, k_set);
    let mut by_comp: Vec<Vec<Vertex>> = vec![Vec::new(); comps.count()];
    for t in u.iter() {
        if let Some(c) = comps.of(t) {
            by_comp[c as usize].push(t);
        }
    }
    let mut groups: Vec<Vec<Vertex>> = by_comp.into_iter().filter(|grp| !grp.is_empty()).collect();
    groups.sort_by(|a, b| (a.len(), a[0]).cmp(&(b.len(), b[0])));
    groups
}

fn has_balanced_split(sizes: impl Iterator<Item = usize> + Clone, f: usize) -> bool {
    let total: usize = sizes.clone().sum();
    let mut prefix = 0;
    sizes.into_iter().any(|s| {
        prefix += s;
        prefix > f && total - prefix > f
    })
}

fn survives(group: &[Vertex], faults: &[Vertex]) -> bool {
    group.iter().any(|t| !faults.contains(t))
}

pub fn build_subset_label(g: &Graph, u: &TerminalSet, k_set: &[Vertex], f: usize) -> Result<SubsetLabel> {
    if f == 0 {
        return Err(Error::InvalidArgument("fault bound f must be at least 1".into()));
    }
    let mut groups = terminal_groups(g, u, k_set);
    let total: usize = groups.iter().map(Vec::len).sum();
    let kind = if has_balanced_split(groups.iter().map(Vec::len), f) {
        SubsetKind::AlwaysYes
    } else if groups.last().is_some_and(|last| last.len() > f) {
        groups.pop();
        let stored: usize = groups.iter().map(Vec::len).sum();
        if stored > f {
            return Err(Error::InternalBoundViolated(format!("big-last label stores {stored} terminals, f={f}")));
        }
        SubsetKind::BigLast { small_groups: groups }
    } else {
        if total > 3 * f {
            return Err(Error::InternalBoundViolated(format!("small-all label stores {total} terminals, f={f}")));
        }
        SubsetKind::SmallAll { groups }
    };
    Ok(SubsetLabel { n: g.n() as u32, f: f as u32, kind })
}

/// Whether `K` separates `U − F`, i.e. at least two groups keep a terminal
/// outside `faults`. Expects `|faults| ≤ f`.
pub fn query_subset_label(label: &SubsetLabel, faults: &[Vertex]) -> bool {
    match &label.kind {
        SubsetKind::AlwaysYes => true,
        SubsetKind::BigLast { small_groups } => small_groups.iter().any(|grp| survives(grp, faults)),
        SubsetKind::SmallAll { groups } => groups.iter().filter(|grp| survives(grp, faults)).nth(1).is_some(),
    }
}

impl SubsetLabel {
    pub fn kind(&self) -> &SubsetKind {
        &self.kind
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    fn stored_groups(&self) -> &[Vec<Vertex>] {
        match &self.kind {
            SubsetKind::AlwaysYes => &[],
            SubsetKind::BigLast { small_groups } => small_groups,
            SubsetKind::SmallAll { groups } => groups,
        }
    }

    pub fn bit_len(&self) -> usize {
        if self.kind == SubsetKind::AlwaysYes {
            return 2;
        }
        let groups = self.stored_groups();
        let ids: usize = groups.iter().map(Vec::len).sum();
        2 + (groups.len() + 1) * size_width(self.f) + ids * id_width(self.n)
    }

    pub fn to_bits(&self) -> Bits {
        let mut bits = Bits::with_capacity(self.bit_len());
        let tag = match self.kind {
            SubsetKind::AlwaysYes => TAG_ALWAYS,
            SubsetKind::BigLast { .. } => TAG_BIG_LAST,
            SubsetKind::SmallAll { .. } => TAG_SMALL_ALL,
        };
        push_bits(&mut bits, u64::from(tag), 2);
        if self.kind != SubsetKind::AlwaysYes {
            let (sw, iw) = (size_width(self.f), id_width(self.n));
            for group in self.stored_groups() {
                push_bits(&mut bits, group.len() as u64, sw);
                for &t in group {
                    push_bits(&mut bits, u64::from(t), iw);
                }
            }
            push_bits(&mut bits, 0, sw);
        }
        debug_assert_eq!(bits.len(), self.bit_len());
        bits
    }

    /// Decodes and validates; the input must be exactly one canonical label.
    pub fn from_bits(bits: &BitSlice<u8, Msb0>, n: u32, f: u32) -> Result<Self> {
        if f == 0 {
            return Err(Error::malformed("subset label with f = 0"));
        }
        let mut cursor = BitCursor { bits, pos: 0 };
        let tag = cursor.read(2)? as u8;
        let kind = match tag {
            TAG_ALWAYS => SubsetKind::AlwaysYes,
            TAG_BIG_LAST | TAG_SMALL_ALL => {
                let groups = read_groups(&mut cursor, n, f)?;
                let sizes = groups.iter().map(Vec::len);
                let total: usize = sizes.clone().sum();
                if tag == TAG_BIG_LAST {
                    if total > f as usize {
                        return Err(Error::malformed("big-last label stores more than f terminals"));
                    }
                    SubsetKind::BigLast { small_groups: groups }
                } else {
                    if total > 3 * f as usize || has_balanced_split(sizes, f as usize) {
                        return Err(Error::malformed("small-all label is not canonical"));
                    }
                    SubsetKind::SmallAll { groups }
                }
            }
            _ => return Err(Error::malformed("unknown subset label tag")),
        };
        if cursor.pos != bits.len() {
            return Err(Error::malformed("trailing bits after subset label"));
        }
        Ok(SubsetLabel { n, f, kind })
    }
}

fn read_groups(cursor: &mut BitCursor<'_>, n: u32, f: u32) -> Result<Vec<Vec<Vertex>>> {
    let (sw, iw) = (size_width(f), id_width(n));
    let mut groups: Vec<Vec<Vertex>> = Vec::new();
    let mut seen: Vec<Vertex> = Vec::new();
    loop {
        let size = cursor.read(sw)? as usize;
        if size == 0 {
            break;
        }
        if size > f as usize {
            return Err(Error::malformed("group larger than f"));
        }
        let mut group = Vec::with_capacity(size);
        for _ in 0..size {
            let t = cursor.read(iw)?;
            if t >= u64::from(n) || group.last().is_some_and(|&prev| u64::from(prev) >= t) {
                return Err(Error::malformed("terminal ids out of range or order"));
            }
            group.push(t as Vertex);
        }
        if let Some(prev) = groups.last() {
            if (prev.len(), prev[0]) >= (group.len(), group[0]) {
                return Err(Error::malformed("groups not sorted by size"));
            }
        }
        seen.extend_from_slice(&group);
        groups.push(group);
    }
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::malformed("groups overlap"));
    }
    Ok(groups)
}

fn push_bits(bits: &mut Bits, value: u64, width: usize) {
    for i in (0..width).rev() {
        bits.push((value >> i) & 1 == 1);
    }
}

struct BitCursor<'a> {
    bits: &'a BitSlice<u8, Msb0>,
    pos: usize,
}

impl BitCursor<'_> {
    fn read(&mut self, width: usize) -> Result<u64> {
        let end = self.pos + width;
        if end > self.bits.len() {
            return Err(Error::malformed("subset label truncated"));
        }
        let value = self.bits[self.pos..end].iter().fold(0u64, |acc, b| (acc << 1) | u64::from(*b));
        self.pos = end;
        Ok(value)
    }
}

/// The simpler `O(f² log n)` variant: up to `f+1` groups, up to `f+1`
/// terminals of each, plus a flag recording that more groups exist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoarseSubsetLabel {
    groups: Vec<Vec<Vertex>>,
    more_groups: bool,
}

pub fn build_coarse_subset_label(g: &Graph, u: &TerminalSet, k_set: &[Vertex], f: usize) -> CoarseSubsetLabel {
    let mut groups = terminal_groups(g, u, k_set);
    let more_groups = groups.len() > f + 1;
    groups.truncate(f + 1);
    for group in &mut groups {
        group.truncate(f + 1);
    }
    CoarseSubsetLabel { groups, more_groups }
}

pub fn query_coarse_subset_label(label: &CoarseSubsetLabel, faults: &[Vertex]) -> bool {
    // With f+2 or more groups, at most f can lose every terminal.
    label.more_groups || label.groups.iter().filter(|grp| survives(grp, faults)).nth(1).is_some()
}

impl CoarseSubsetLabel {
    pub fn stored_terminals(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }
}
