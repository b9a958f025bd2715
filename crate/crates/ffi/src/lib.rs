//! C ABI over `kpkit`.
//!
//! Graphs and results are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`KpkitStatus`]; on failure a message is available from
//! [`kpkit_last_error`] until the next failing call on the same thread.
//! Strings passed in must be NUL-terminated UTF-8.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kpkit::graph::{self, Graph, GraphError, NodeId};
use kpkit::ingest::{self, IngestError, LogFormat, RoleTable};
use kpkit::keyplayer::{self, KeyPlayerError, KpMethod};
use kpkit::report::{self, ExportFormat, ReportError};

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KpkitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidConfig = 4,
    UnknownNode = 5,
    Degenerate = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KpkitMethod {
    Neg = 0,
    Pos = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KpkitExportFormat {
    Dot = 0,
    Graphml = 1,
}

/// Search parameters. Obtain defaults from [`kpkit_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KpkitConfig {
    pub k: usize,
    pub restarts: usize,
    pub rng_seed: u64,
    pub reach_distance_m: u32,
    pub max_sweeps: usize,
}

/// Fragmentation before and after removing a node set.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KpkitDelta {
    pub initial: f64,
    pub final_: f64,
    pub change: f64,
}

/// Opaque network handle.
pub struct KpkitGraph {
    graph: Graph,
    roles: RoleTable,
}

/// Opaque key-player result handle.
pub struct KpkitResult {
    method: KpMethod,
    fit: f64,
    chosen: Vec<CString>,
}

struct Failure(KpkitStatus, String);

type Outcome<T> = Result<T, Failure>;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        let status = match e {
            GraphError::UnknownNode(_) | GraphError::UnknownEndpoint(..) => KpkitStatus::UnknownNode,
            GraphError::DegenerateGraph(_) => KpkitStatus::Degenerate,
            GraphError::EmptyId | GraphError::SelfLoop(_) => KpkitStatus::ParseError,
            GraphError::EmptySources => KpkitStatus::InvalidConfig,
        };
        Failure(status, e.to_string())
    }
}

impl From<KeyPlayerError> for Failure {
    fn from(e: KeyPlayerError) -> Self {
        match e {
            KeyPlayerError::Graph(g) => g.into(),
            KeyPlayerError::DegenerateResidual { .. } => Failure(KpkitStatus::Degenerate, e.to_string()),
            other => Failure(KpkitStatus::InvalidConfig, other.to_string()),
        }
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Graph(g) => g.into(),
            ReportError::KeyPlayer(k) => k.into(),
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        Failure(KpkitStatus::ParseError, e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Outcome<()>) -> KpkitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KpkitStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            KpkitStatus::Internal
        }
    }
}

fn null() -> Failure {
    Failure(KpkitStatus::NullPointer, "null pointer argument".into())
}

unsafe fn text<'a>(p: *const c_char) -> Outcome<&'a str> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(KpkitStatus::InvalidUtf8, e.to_string()))
}

unsafe fn node_id(p: *const c_char) -> Outcome<NodeId> {
    Ok(NodeId::new(text(p)?)?)
}

unsafe fn node_set(nodes: *const *const c_char, len: usize) -> Outcome<BTreeSet<NodeId>> {
    if len == 0 {
        return Ok(BTreeSet::new());
    }
    if nodes.is_null() {
        return Err(null());
    }
    std::slice::from_raw_parts(nodes, len).iter().map(|&p| node_id(p)).collect()
}

unsafe fn graph_ref<'a>(g: *const KpkitGraph) -> Outcome<&'a KpkitGraph> {
    g.as_ref().ok_or_else(null)
}

unsafe fn put<T>(out: *mut T, value: T) -> Outcome<()> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

fn boxed_graph(graph: Graph) -> *mut KpkitGraph {
    Box::into_raw(Box::new(KpkitGraph { graph, roles: RoleTable::new() }))
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn kpkit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread. Empty if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn kpkit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a graph from interaction-log CSV text
/// (`source,target,kind,timestamp`).
///
/// # Safety
/// `csv` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn kpkit_graph_from_interactions_csv(
    csv: *const c_char,
    out: *mut *mut KpkitGraph,
) -> KpkitStatus {
    guard(|| {
        let records = ingest::parse_interaction_log(text(csv)?.as_bytes(), LogFormat::Csv)?;
        put(out, boxed_graph(ingest::interaction_network(&records)))
    })
}

/// Builds a co-appearance graph from photo-log CSV text
/// (`photo_id,participant,timestamp`).
///
/// # Safety
/// `csv` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn kpkit_graph_from_photos_csv(csv: *const c_char, out: *mut *mut KpkitGraph) -> KpkitStatus {
    guard(|| {
        let photos = ingest::parse_photo_log(text(csv)?.as_bytes(), LogFormat::Csv)?;
        put(out, boxed_graph(ingest::co_appearance_network(&photos)))
    })
}

/// Builds a graph from parallel arrays of edge endpoints. Nodes are the
/// endpoints that appear.
///
/// # Safety
/// `sources` and `targets` must each hold `len` valid C strings.
#[no_mangle]
pub unsafe extern "C" fn kpkit_graph_from_edges(
    sources: *const *const c_char,
    targets: *const *const c_char,
    len: usize,
    out: *mut *mut KpkitGraph,
) -> KpkitStatus {
    guard(|| {
        if len > 0 && (sources.is_null() || targets.is_null()) {
            return Err(null());
        }
        let mut edges = Vec::with_capacity(len);
        for i in 0..len {
            edges.push((node_id(*sources.add(i))?, node_id(*targets.add(i))?));
        }
        put(out, boxed_graph(Graph::from_edges(edges)?))
    })
}

/// Attaches a role table (`node_id,role` CSV) used by export coloring.
///
/// # Safety
/// `g` must be a live graph handle and `csv` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn kpkit_graph_set_roles_csv(g: *mut KpkitGraph, csv: *const c_char) -> KpkitStatus {
    guard(|| {
        let handle = g.as_mut().ok_or_else(null)?;
        handle.roles = ingest::parse_roles(text(csv)?.as_bytes())?;
        Ok(())
    })
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `g` must come from a `kpkit_graph_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn kpkit_graph_free(g: *mut KpkitGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Node count, 0 for null.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn kpkit_graph_node_count(g: *const KpkitGraph) -> usize {
    g.as_ref().map_or(0, |h| h.graph.node_count())
}

/// Edge count, 0 for null.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn kpkit_graph_edge_count(g: *const KpkitGraph) -> usize {
    g.as_ref().map_or(0, |h| h.graph.edge_count())
}

/// Share of node pairs that cannot reach each other.
///
/// # Safety
/// `g` must be a live graph handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kpkit_graph_fragmentation(g: *const KpkitGraph, out: *mut f64) -> KpkitStatus {
    guard(|| put(out, graph::fragmentation(&graph_ref(g)?.graph)?))
}

/// Edge density.
///
/// # Safety
/// `g` must be a live graph handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kpkit_graph_density(g: *const KpkitGraph, out: *mut f64) -> KpkitStatus {
    guard(|| put(out, graph::graph_density(&graph_ref(g)?.graph)?))
}

/// Fragmentation change from removing `nodes`.
///
/// # Safety
/// `g` must be a live graph handle, `nodes` must hold `len` valid C strings
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kpkit_removal_impact(
    g: *const KpkitGraph,
    nodes: *const *const c_char,
    len: usize,
    out: *mut KpkitDelta,
) -> KpkitStatus {
    guard(|| {
        let d = keyplayer::removal_impact(&graph_ref(g)?.graph, &node_set(nodes, len)?)?;
        put(out, KpkitDelta { initial: d.initial, final_: d.final_, change: d.change })
    })
}

/// Default search parameters.
#[no_mangle]
pub extern "C" fn kpkit_config_default() -> KpkitConfig {
    let d = keyplayer::KpConfig::default();
    KpkitConfig {
        k: d.k,
        restarts: d.restarts,
        rng_seed: d.rng_seed,
        reach_distance_m: d.reach_distance_m,
        max_sweeps: d.max_sweeps,
    }
}

/// Runs the restarted greedy search.
///
/// # Safety
/// `g` must be a live graph handle, `cfg` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kpkit_select_key_players(
    g: *const KpkitGraph,
    method: KpkitMethod,
    cfg: *const KpkitConfig,
    out: *mut *mut KpkitResult,
) -> KpkitStatus {
    guard(|| {
        let c = cfg.as_ref().ok_or_else(null)?;
        let cfg = keyplayer::KpConfig {
            k: c.k,
            restarts: c.restarts,
            rng_seed: c.rng_seed,
            reach_distance_m: c.reach_distance_m,
            max_sweeps: c.max_sweeps,
        };
        let method = match method {
            KpkitMethod::Neg => KpMethod::Neg,
            KpkitMethod::Pos => KpMethod::Pos,
        };
        let r = keyplayer::select_key_players(&graph_ref(g)?.graph, method, &cfg)?;
        let chosen = r
            .chosen
            .iter()
            .map(|n| CString::new(n.as_str()).map_err(|e| Failure(KpkitStatus::Internal, e.to_string())))
            .collect::<Outcome<_>>()?;
        put(out, Box::into_raw(Box::new(KpkitResult { method: r.method, fit: r.fit, chosen })))
    })
}

/// Releases a result. Null is ignored.
///
/// # Safety
/// `r` must come from [`kpkit_select_key_players`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn kpkit_result_free(r: *mut KpkitResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Fit of the chosen set, NaN for null.
///
/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn kpkit_result_fit(r: *const KpkitResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.fit)
}

/// Number of chosen nodes, 0 for null.
///
/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn kpkit_result_size(r: *const KpkitResult) -> usize {
    r.as_ref().map_or(0, |r| r.chosen.len())
}

/// The `i`-th chosen node in identifier order, or null if out of range. The
/// string is owned by the result.
///
/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn kpkit_result_node(r: *const KpkitResult, i: usize) -> *const c_char {
    r.as_ref().and_then(|r| r.chosen.get(i)).map_or(ptr::null(), |s| s.as_ptr())
}

/// Method the result was computed with.
///
/// # Safety
/// `r` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn kpkit_result_method(r: *const KpkitResult, out: *mut KpkitMethod) -> KpkitStatus {
    guard(|| {
        let method = match r.as_ref().ok_or_else(null)?.method {
            KpMethod::Neg => KpkitMethod::Neg,
            KpMethod::Pos => KpkitMethod::Pos,
        };
        put(out, method)
    })
}

/// Renders the graph as DOT or GraphML, highlighting the chosen set of
/// `highlight` if non-null. Free the string with [`kpkit_string_free`].
///
/// # Safety
/// `g` must be a live graph handle, `highlight` null or a live result handle,
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kpkit_graph_export(
    g: *const KpkitGraph,
    highlight: *const KpkitResult,
    format: KpkitExportFormat,
    out: *mut *mut c_char,
) -> KpkitStatus {
    guard(|| {
        let h = graph_ref(g)?;
        let chosen = match highlight.as_ref() {
            Some(r) => r
                .chosen
                .iter()
                .map(|s| Ok(NodeId::new(s.to_str().map_err(|e| Failure(KpkitStatus::InvalidUtf8, e.to_string()))?)?))
                .collect::<Outcome<BTreeSet<_>>>()?,
            None => BTreeSet::new(),
        };
        let format = match format {
            KpkitExportFormat::Dot => ExportFormat::Dot,
            KpkitExportFormat::Graphml => ExportFormat::Graphml,
        };
        let body = report::export_graph(&h.graph, &h.roles, &chosen, format)?;
        let c = CString::new(body).map_err(|e| Failure(KpkitStatus::Internal, e.to_string()))?;
        put(out, c.into_raw())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from [`kpkit_graph_export`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn kpkit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
