//! Label sets for either scheme and the indexed file that stores them.
//!
//! ```text
//! "FTLF" | version u8 | scheme u8 (0 main, 1 warm-up) | count u32
//! edge map flag u8 [ original n u32 | entries u32 | (a u32 | b u32 | vertex u32)* ]
//! index: count × (vertex u32 | offset u64 | length u64)
//! label records, offsets relative to the end of the index
//! ```
//!
//! Integers are little-endian. A query reads the header and index, then seeks
//! to the records of the faulty vertices only.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Subdivision, TerminalSet, Vertex};
use crate::scheme::{build_labels, query, SchemeLabel};
use crate::warmup::{build_warmup_labels, query_warmup, WarmupLabel};

const MAGIC: &[u8; 4] = b"FTLF";
const VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    #[default]
    Main,
    Warmup,
}

impl SchemeKind {
    fn tag(self) -> u8 {
        match self {
            SchemeKind::Main => 0,
            SchemeKind::Warmup => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(SchemeKind::Main),
            1 => Ok(SchemeKind::Warmup),
            _ => Err(Error::malformed(format!("unknown scheme tag {tag}"))),
        }
    }
}

/// All labels of one build, indexed by vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelSet {
    Main(Vec<SchemeLabel>),
    Warmup(Vec<WarmupLabel>),
}

impl LabelSet {
    pub fn build(g: &Graph, u: &TerminalSet, f: usize, kind: SchemeKind) -> Result<Self> {
        Ok(match kind {
            SchemeKind::Main => LabelSet::Main(build_labels(g, u, f)?),
            SchemeKind::Warmup => LabelSet::Warmup(build_warmup_labels(g, u, f)?),
        })
    }

    pub fn kind(&self) -> SchemeKind {
        match self {
            LabelSet::Main(_) => SchemeKind::Main,
            LabelSet::Warmup(_) => SchemeKind::Warmup,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            LabelSet::Main(l) => l.len(),
            LabelSet::Warmup(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Answers a query for the vertices `faults` using their labels only.
    pub fn query(&self, faults: &[Vertex]) -> Result<bool> {
        let check = |v: Vertex| {
            if (v as usize) < self.len() {
                Ok(v as usize)
            } else {
                Err(Error::InvalidArgument(format!("vertex {v} outside 0..{}", self.len())))
            }
        };
        match self {
            LabelSet::Main(labels) => {
                let refs: Vec<&SchemeLabel> =
                    faults.iter().map(|&v| check(v).map(|i| &labels[i])).collect::<Result<_>>()?;
                Ok(query(&refs)?.verdict)
            }
            LabelSet::Warmup(labels) => {
                let refs: Vec<&WarmupLabel> =
                    faults.iter().map(|&v| check(v).map(|i| &labels[i])).collect::<Result<_>>()?;
                query_warmup(&refs)
            }
        }
    }

    pub fn label_bytes(&self, v: Vertex) -> Vec<u8> {
        match self {
            LabelSet::Main(l) => l[v as usize].to_bytes(),
            LabelSet::Warmup(l) => l[v as usize].to_bytes(),
        }
    }

    /// Replaces the label of `v` by the decoding of `bytes`.
    pub fn replace_from_bytes(&mut self, v: Vertex, bytes: &[u8]) -> Result<()> {
        let owner = match self {
            LabelSet::Main(l) => {
                let label = SchemeLabel::from_bytes(bytes)?;
                let owner = label.owner();
                l[v as usize] = label;
                owner
            }
            LabelSet::Warmup(l) => {
                let label = WarmupLabel::from_bytes(bytes)?;
                let owner = label.owner();
                l[v as usize] = label;
                owner
            }
        };
        if owner != v {
            return Err(Error::mix(format!("record for vertex {v} holds the label of {owner}")));
        }
        Ok(())
    }
}

/// Original edge `(a, b)` to the vertex subdividing it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeMap {
    pub original_n: usize,
    pub map: BTreeMap<(Vertex, Vertex), Vertex>,
}

impl EdgeMap {
    pub fn from_subdivision(s: &Subdivision) -> Self {
        EdgeMap { original_n: s.original_n(), map: s.edge_map().collect() }
    }

    pub fn vertex_for(&self, a: Vertex, b: Vertex) -> Option<Vertex> {
        self.map.get(&(a.min(b), a.max(b))).copied()
    }
}

/// A fault token: a vertex id or an edge `a-b` of the original graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultToken {
    Vertex(Vertex),
    Edge(Vertex, Vertex),
}

/// Parses a comma-separated list such as `1,3,4-7`.
pub fn parse_fault_list(text: &str) -> Result<Vec<FaultToken>> {
    let bad = |tok: &str| Error::InvalidArgument(format!("invalid fault token {tok:?}"));
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|tok| match tok.split_once('-') {
            Some((a, b)) => {
                Ok(FaultToken::Edge(a.trim().parse().map_err(|_| bad(tok))?, b.trim().parse().map_err(|_| bad(tok))?))
            }
            None => tok.parse().map(FaultToken::Vertex).map_err(|_| bad(tok)),
        })
        .collect()
}

/// Maps tokens to label owners; edges need an edge map.
pub fn resolve_faults(tokens: &[FaultToken], edges: Option<&EdgeMap>) -> Result<Vec<Vertex>> {
    let mut out = Vec::with_capacity(tokens.len());
    for &tok in tokens {
        out.push(match tok {
            FaultToken::Vertex(v) => {
                if let Some(map) = edges {
                    if v as usize >= map.original_n {
                        return Err(Error::InvalidArgument(format!("vertex {v} is not an original vertex")));
                    }
                }
                v
            }
            FaultToken::Edge(a, b) => edges
                .ok_or_else(|| Error::InvalidArgument("edge faults need labels built with --subdivide".into()))?
                .vertex_for(a, b)
                .ok_or_else(|| Error::InvalidArgument(format!("{a}-{b} is not an edge")))?,
        });
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn write_label_file(path: impl AsRef<Path>, labels: &LabelSet, edges: Option<&EdgeMap>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&[VERSION, labels.kind().tag()])?;
    out.write_all(&(labels.len() as u32).to_le_bytes())?;
    match edges {
        None => out.write_all(&[0])?,
        Some(map) => {
            out.write_all(&[1])?;
            out.write_all(&(map.original_n as u32).to_le_bytes())?;
            out.write_all(&(map.map.len() as u32).to_le_bytes())?;
            for (&(a, b), &v) in &map.map {
                for x in [a, b, v] {
                    out.write_all(&x.to_le_bytes())?;
                }
            }
        }
    }
    let records: Vec<Vec<u8>> = (0..labels.len() as Vertex).map(|v| labels.label_bytes(v)).collect();
    let mut offset = 0u64;
    for (v, rec) in records.iter().enumerate() {
        out.write_all(&(v as u32).to_le_bytes())?;
        out.write_all(&offset.to_le_bytes())?;
        out.write_all(&(rec.len() as u64).to_le_bytes())?;
        offset += rec.len() as u64;
    }
    for rec in &records {
        out.write_all(rec)?;
    }
    out.flush()?;
    Ok(())
}

/// An open label file; only the header and index are held in memory.
pub struct LabelFile {
    reader: BufReader<File>,
    kind: SchemeKind,
    edges: Option<EdgeMap>,
    index: Vec<(u64, u64)>,
    data_start: u64,
    data_len: u64,
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(|_| Error::malformed("label file truncated"))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(|_| Error::malformed("label file truncated"))?;
    Ok(u64::from_le_bytes(buf))
}

impl LabelFile {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path)?;
        let file_len = file.metadata()?.len();
        let mut reader = BufReader::new(file);
        let mut head = [0u8; 6];
        reader.read_exact(&mut head).map_err(|_| Error::malformed("label file truncated"))?;
        if &head[..4] != MAGIC || head[4] != VERSION {
            return Err(Error::malformed("not a label file"));
        }
        let kind = SchemeKind::from_tag(head[5])?;
        let count = read_u32(&mut reader)? as usize;
        let mut flag = [0u8; 1];
        reader.read_exact(&mut flag).map_err(|_| Error::malformed("label file truncated"))?;
        let edges = match flag[0] {
            0 => None,
            1 => {
                let original_n = read_u32(&mut reader)? as usize;
                let entries = read_u32(&mut reader)?;
                let mut map = BTreeMap::new();
                for _ in 0..entries {
                    let (a, b, v) = (read_u32(&mut reader)?, read_u32(&mut reader)?, read_u32(&mut reader)?);
                    if a >= b || (v as usize) >= count || map.insert((a, b), v).is_some() {
                        return Err(Error::malformed("invalid edge map entry"));
                    }
                }
                Some(EdgeMap { original_n, map })
            }
            _ => return Err(Error::malformed("invalid edge map flag")),
        };
        let mut index = Vec::with_capacity(count.min(1 << 20));
        for v in 0..count {
            if read_u32(&mut reader)? as usize != v {
                return Err(Error::malformed("label index out of order"));
            }
            index.push((read_u64(&mut reader)?, read_u64(&mut reader)?));
        }
        let data_start = reader.stream_position()?;
        let data_len = file_len - data_start;
        if index.iter().any(|&(off, len)| off.checked_add(len).is_none_or(|end| end > data_len)) {
            return Err(Error::malformed("label record outside the file"));
        }
        Ok(LabelFile { reader, kind, edges, index, data_start, data_len })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn edge_map(&self) -> Option<&EdgeMap> {
        self.edges.as_ref()
    }

    pub fn record(&mut self, v: Vertex) -> Result<Vec<u8>> {
        let &(offset, len) = self
            .index
            .get(v as usize)
            .ok_or_else(|| Error::InvalidArgument(format!("vertex {v} outside 0..{}", self.index.len())))?;
        debug_assert!(offset + len <= self.data_len);
        self.reader.seek(SeekFrom::Start(self.data_start + offset))?;
        let mut buf = vec![0u8; len as usize];
        self.reader.read_exact(&mut buf)?;
        Ok(buf)
    }

    /// Reads and decodes the records of `faults`, then answers the query.
    pub fn query(&mut self, faults: &[Vertex]) -> Result<bool> {
        match self.kind {
            SchemeKind::Main => {
                let labels: Vec<SchemeLabel> = faults.iter().map(|&v| self.decode_main(v)).collect::<Result<_>>()?;
                Ok(query(&labels.iter().collect::<Vec<_>>())?.verdict)
            }
            SchemeKind::Warmup => {
                let labels: Vec<WarmupLabel> = faults.iter().map(|&v| self.decode_warmup(v)).collect::<Result<_>>()?;
                query_warmup(&labels.iter().collect::<Vec<_>>())
            }
        }
    }

    fn decode_main(&mut self, v: Vertex) -> Result<SchemeLabel> {
        let label = SchemeLabel::from_bytes(&self.record(v)?)?;
        if label.owner() != v {
            return Err(Error::mix(format!("record for vertex {v} holds the label of {}", label.owner())));
        }
        Ok(label)
    }

    fn decode_warmup(&mut self, v: Vertex) -> Result<WarmupLabel> {
        let label = WarmupLabel::from_bytes(&self.record(v)?)?;
        if label.owner() != v {
            return Err(Error::mix(format!("record for vertex {v} holds the label of {}", label.owner())));
        }
        Ok(label)
    }

    /// Decodes every record.
    pub fn read_all(&mut self) -> Result<LabelSet> {
        let n = self.len() as Vertex;
        Ok(match self.kind {
            SchemeKind::Main => LabelSet::Main((0..n).map(|v| self.decode_main(v)).collect::<Result<_>>()?),
            SchemeKind::Warmup => LabelSet::Warmup((0..n).map(|v| self.decode_warmup(v)).collect::<Result<_>>()?),
        })
    }
}
