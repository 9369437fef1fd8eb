//! Fault-tolerant Steiner connectivity labeling.
//!
//! Every vertex of a graph `G` with terminal set `U` receives a label. Given
//! the labels of a fault set `F` with `|F| ≤ f`, [`scheme::query`] decides
//! whether `F` is a Steiner cut, meaning some two terminals outside `F` are
//! disconnected in `G − F`. No other information is consulted.
//!
//! * [`graph`]: graphs, terminal sets, components and the cut oracle.
//! * [`decomp`]: Steiner forests with few high-degree vertices.
//! * [`st`]: pluggable pairwise connectivity and terminal-reach labels.
//! * [`subset`]: compact summaries of how a vertex set splits the terminals.
//! * [`scheme`] and [`warmup`]: the two labeling schemes.
//! * [`verify`], [`harness`], [`labelfile`]: checking, experiments, storage.

pub mod decomp;
pub mod error;
pub mod format;
pub mod graph;
pub mod harness;
pub mod labelfile;
pub mod scheme;
pub mod st;
pub mod subset;
pub mod verify;
pub mod warmup;

pub(crate) mod codec;

pub use error::{Error, Result};
pub use graph::{is_steiner_cut, FaultSet, Graph, TerminalSet, Vertex};
pub use labelfile::{LabelSet, SchemeKind};
pub use scheme::{build_labels, query, QueryAnswer, SchemeLabel};
pub use warmup::{build_warmup_labels, query_warmup, WarmupLabel};
