//! C ABI over the `ftsteiner` library.
//!
//! Every function returns an [`FtsStatus`]; results go through out-pointers.
//! Graphs and labelings are opaque handles released with their `_free`
//! function. After a non-`Ok` status, [`fts_last_error`] describes the
//! failure for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use ftsteiner::format::parse_instance;
use ftsteiner::warmup::query_warmup;
use ftsteiner::{is_steiner_cut, query, Error, Graph, LabelSet, SchemeKind, SchemeLabel, TerminalSet, WarmupLabel};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FtsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Decomposition = 4,
    Malformed = 5,
    LabelMix = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FtsScheme {
    Main = 0,
    Warmup = 1,
}

impl From<FtsScheme> for SchemeKind {
    fn from(s: FtsScheme) -> Self {
        match s {
            FtsScheme::Main => SchemeKind::Main,
            FtsScheme::Warmup => SchemeKind::Warmup,
        }
    }
}

/// Bytes owned by the library; release with [`fts_buffer_free`].
#[repr(C)]
pub struct FtsBuffer {
    pub data: *mut u8,
    pub len: usize,
}

/// A graph together with its terminal set.
pub struct FtsGraph {
    graph: Graph,
    terminals: TerminalSet,
}

pub struct FtsLabeling {
    labels: LabelSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> FtsStatus {
    match e {
        Error::Parse { .. } | Error::Io(_) => FtsStatus::Parse,
        Error::InvalidGraph(_) | Error::InvalidArgument(_) | Error::TooManyFaults { .. } => FtsStatus::InvalidArgument,
        Error::DecompositionFailed { .. } => FtsStatus::Decomposition,
        Error::MalformedBits(_) | Error::UnknownBackend(_) => FtsStatus::Malformed,
        Error::LabelMix(_) | Error::BackendMismatch(..) => FtsStatus::LabelMix,
        _ => FtsStatus::Internal,
    }
}

/// Runs `body`, turning errors and panics into a status plus a message.
fn guard(body: impl FnOnce() -> Result<(), (FtsStatus, String)>) -> FtsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FtsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FtsStatus::Internal
        }
    }
}

fn lib(e: Error) -> (FtsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FtsStatus, String) {
    (FtsStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or point to `len` readable elements.
unsafe fn array<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (FtsStatus, String)> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(slice::from_raw_parts(p, len))
    }
}

/// # Safety
/// `p` must be null or a valid, aligned pointer.
unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (FtsStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fts_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses the text instance format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out_graph` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fts_graph_from_text(text: *const c_char, out_graph: *mut *mut FtsGraph) -> FtsStatus {
    guard(|| {
        let slot = out(out_graph, "out_graph")?;
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text).to_str().map_err(|e| (FtsStatus::Parse, e.to_string()))?;
        let (graph, terminals) = parse_instance(text).map_err(lib)?;
        *slot = Box::into_raw(Box::new(FtsGraph { graph, terminals }));
        Ok(())
    })
}

/// Builds a graph from `m` edges given as `2m` endpoint ids and `k` terminals.
///
/// # Safety
/// `edges` must hold `2 * m` values, `terminals` `k` values, and `out_graph`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fts_graph_new(
    n: usize,
    edges: *const u32,
    m: usize,
    terminals: *const u32,
    k: usize,
    out_graph: *mut *mut FtsGraph,
) -> FtsStatus {
    guard(|| {
        let slot = out(out_graph, "out_graph")?;
        let ends = array(
            edges,
            m.checked_mul(2).ok_or((FtsStatus::InvalidArgument, "edge count overflows".into()))?,
            "edges",
        )?;
        let terms = array(terminals, k, "terminals")?;
        let graph = Graph::new(n, ends.chunks_exact(2).map(|e| (e[0], e[1]))).map_err(lib)?;
        let terminals = TerminalSet::new(n, terms.iter().copied()).map_err(lib)?;
        *slot = Box::into_raw(Box::new(FtsGraph { graph, terminals }));
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fts_graph_free(graph: *mut FtsGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle and `out_n` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fts_graph_vertex_count(graph: *const FtsGraph, out_n: *mut usize) -> FtsStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        *out(out_n, "out_n")? = g.graph.n();
        Ok(())
    })
}

/// Whether deleting `faults` separates two surviving terminals.
///
/// # Safety
/// `graph` must be a live handle, `faults` must hold `len` ids and
/// `out_cut` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fts_is_steiner_cut(
    graph: *const FtsGraph,
    faults: *const u32,
    len: usize,
    out_cut: *mut bool,
) -> FtsStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        let faults = array(faults, len, "faults")?;
        if let Some(&v) = faults.iter().find(|&&v| v as usize >= g.graph.n()) {
            return Err((FtsStatus::InvalidArgument, format!("vertex {v} out of range")));
        }
        *out(out_cut, "out_cut")? = is_steiner_cut(&g.graph, &g.terminals, faults);
        Ok(())
    })
}

/// Labels every vertex for fault sets of up to `f` vertices.
///
/// # Safety
/// `graph` must be a live handle and `out_labeling` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fts_labeling_build(
    graph: *const FtsGraph,
    f: usize,
    scheme: FtsScheme,
    out_labeling: *mut *mut FtsLabeling,
) -> FtsStatus {
    guard(|| {
        let slot = out(out_labeling, "out_labeling")?;
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        let labels = LabelSet::build(&g.graph, &g.terminals, f, scheme.into()).map_err(lib)?;
        *slot = Box::into_raw(Box::new(FtsLabeling { labels }));
        Ok(())
    })
}

/// # Safety
/// `labeling` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fts_labeling_free(labeling: *mut FtsLabeling) {
    if !labeling.is_null() {
        drop(Box::from_raw(labeling));
    }
}

/// # Safety
/// `labeling` must be a live handle and `out_len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fts_labeling_len(labeling: *const FtsLabeling, out_len: *mut usize) -> FtsStatus {
    guard(|| {
        let l = labeling.as_ref().ok_or_else(|| null("labeling"))?;
        *out(out_len, "out_len")? = l.labels.len();
        Ok(())
    })
}

/// Answers a query from the labels of `faults`.
///
/// # Safety
/// `labeling` must be a live handle, `faults` must hold `len` ids and
/// `out_cut` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fts_labeling_query(
    labeling: *const FtsLabeling,
    faults: *const u32,
    len: usize,
    out_cut: *mut bool,
) -> FtsStatus {
    guard(|| {
        let l = labeling.as_ref().ok_or_else(|| null("labeling"))?;
        let faults = array(faults, len, "faults")?;
        if let Some(&v) = faults.iter().find(|&&v| v as usize >= l.labels.len()) {
            return Err((FtsStatus::InvalidArgument, format!("vertex {v} out of range")));
        }
        *out(out_cut, "out_cut")? = l.labels.query(faults).map_err(lib)?;
        Ok(())
    })
}

/// Serialized label of `vertex`.
///
/// # Safety
/// `labeling` must be a live handle and `out_buf` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fts_label_serialize(
    labeling: *const FtsLabeling,
    vertex: u32,
    out_buf: *mut FtsBuffer,
) -> FtsStatus {
    guard(|| {
        let slot = out(out_buf, "out_buf")?;
        let l = labeling.as_ref().ok_or_else(|| null("labeling"))?;
        if vertex as usize >= l.labels.len() {
            return Err((FtsStatus::InvalidArgument, format!("vertex {vertex} out of range")));
        }
        let bytes = l.labels.label_bytes(vertex).into_boxed_slice();
        let len = bytes.len();
        *slot = FtsBuffer { data: Box::into_raw(bytes) as *mut u8, len };
        Ok(())
    })
}

/// # Safety
/// `buf` must come from [`fts_label_serialize`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fts_buffer_free(buf: FtsBuffer) {
    if !buf.data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(buf.data, buf.len)));
    }
}

/// Answers a query from serialized labels alone, without any graph.
///
/// # Safety
/// `labels` and `lens` must each hold `count` entries, each `labels[i]`
/// pointing to `lens[i]` bytes; `out_cut` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fts_query_serialized(
    scheme: FtsScheme,
    labels: *const *const u8,
    lens: *const usize,
    count: usize,
    out_cut: *mut bool,
) -> FtsStatus {
    guard(|| {
        let slot = out(out_cut, "out_cut")?;
        let ptrs = array(labels, count, "labels")?;
        let lens = array(lens, count, "lens")?;
        let blobs =
            ptrs.iter().zip(lens).map(|(&p, &len)| array(p, len, "label bytes")).collect::<Result<Vec<&[u8]>, _>>()?;
        *slot = match scheme {
            FtsScheme::Main => {
                let decoded =
                    blobs.iter().map(|b| SchemeLabel::from_bytes(b)).collect::<Result<Vec<_>, _>>().map_err(lib)?;
                query(&decoded.iter().collect::<Vec<_>>()).map_err(lib)?.verdict
            }
            FtsScheme::Warmup => {
                let decoded =
                    blobs.iter().map(|b| WarmupLabel::from_bytes(b)).collect::<Result<Vec<_>, _>>().map_err(lib)?;
                query_warmup(&decoded.iter().collect::<Vec<_>>()).map_err(lib)?
            }
        };
        Ok(())
    })
}
