//! C ABI over the `polaris` library.
//!
//! Objects cross the boundary as opaque handles created by `*_new`-style
//! functions and released with the matching `*_free`. Fallible functions
//! return a [`PolarisStatus`]; on failure [`polaris_last_error`] describes
//! the problem for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use polaris::evaluation::precision_recall;
use polaris::estimation::estimate_network;
use polaris::io;
use polaris::rng::substream;
use polaris::scoring::{network_score, FoldChange, ScoreKind};
use polaris::synthesis::{generate_network, sample, SynthesisConfig};
use polaris::{Dag, Dataset, Error, LearnOptions, MpnType, Network};

pub const POLARIS_MPN_CMPN: u32 = 0;
pub const POLARIS_MPN_DMPN: u32 = 1;
pub const POLARIS_MPN_XMPN: u32 = 2;

pub const POLARIS_SCORE_BIC: u32 = 0;
pub const POLARIS_SCORE_POLARIS: u32 = 1;
pub const POLARIS_SCORE_DIPROG: u32 = 2;

pub const POLARIS_FILTER_DEFAULT: i32 = -1;
pub const POLARIS_FILTER_OFF: i32 = 0;
pub const POLARIS_FILTER_ON: i32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarisStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    TooLarge = 5,
    Infeasible = 6,
    Mismatch = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// A monotonic progression network: structure, CPDs, type and epsilon.
pub struct PolarisNetwork {
    inner: Network,
}

/// Binary samples with named variables.
pub struct PolarisDataset {
    inner: Dataset,
}

/// Outcome of [`polaris_learn`].
pub struct PolarisLearnResult {
    dag: Dag,
    score: f64,
    edges: Vec<FoldChange>,
    options: LearnOptions,
    epsilon: Option<f64>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PolarisLearnOptions {
    /// One of the `POLARIS_MPN_*` constants.
    pub mpn_type: u32,
    /// One of the `POLARIS_SCORE_*` constants.
    pub score: u32,
    /// Noise level; required by the DiProg score, ignored otherwise.
    pub epsilon: f64,
    pub max_parents: usize,
    pub pseudocount: f64,
    /// One of the `POLARIS_FILTER_*` constants.
    pub filter: i32,
    /// Threshold used when `filter` is `POLARIS_FILTER_ON`.
    pub alpha_threshold: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(PolarisStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidConfig { .. }
            | Error::IndexOutOfRange { .. }
            | Error::SelfLoop { .. }
            | Error::DuplicateParent { .. }
            | Error::CycleDetected(_)
            | Error::EdgeNotPresent { .. }
            | Error::NonPositiveAlpha { .. } => PolarisStatus::InvalidArgument,
            Error::InfeasibleConfig(_) | Error::InfeasibleCache { .. } => PolarisStatus::Infeasible,
            Error::TooLarge { .. } => PolarisStatus::TooLarge,
            Error::NodeMismatch(_) => PolarisStatus::Mismatch,
            Error::Io(_) => PolarisStatus::Io,
            _ => PolarisStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: PolarisStatus, message: impl Into<String>) -> Failure {
    Failure(status, message.into())
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PolarisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            PolarisStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            PolarisStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller passes either null or a live handle from this library.
    unsafe { p.as_ref() }.ok_or_else(|| fail(PolarisStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller passes either null or a writable location.
    unsafe { p.as_mut() }.ok_or_else(|| fail(PolarisStatus::NullPointer, format!("{what} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(PolarisStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null and NUL-terminated per the caller contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(PolarisStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(PolarisStatus::Parse, "output contains a NUL byte"))
}

fn mpn_type(code: u32) -> Result<MpnType, Failure> {
    match code {
        POLARIS_MPN_CMPN => Ok(MpnType::Cmpn),
        POLARIS_MPN_DMPN => Ok(MpnType::Dmpn),
        POLARIS_MPN_XMPN => Ok(MpnType::Xmpn),
        _ => Err(fail(PolarisStatus::InvalidArgument, format!("unknown MPN type {code}"))),
    }
}

fn score_kind(code: u32, epsilon: f64) -> Result<ScoreKind, Failure> {
    match code {
        POLARIS_SCORE_BIC => Ok(ScoreKind::Bic),
        POLARIS_SCORE_POLARIS => Ok(ScoreKind::Polaris),
        POLARIS_SCORE_DIPROG => Ok(ScoreKind::diprog(epsilon)?),
        _ => Err(fail(PolarisStatus::InvalidArgument, format!("unknown score {code}"))),
    }
}

/// Writes `(from, to)` pairs into caller buffers; `written` always receives the edge count.
unsafe fn write_edges(
    edges: &[(usize, usize)],
    confidences: Option<&[f64]>,
    from: *mut usize,
    to: *mut usize,
    confidence: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> Result<(), Failure> {
    // SAFETY: forwarded caller contract.
    *unsafe { out_ptr(written, "written") }? = edges.len();
    if edges.len() > capacity {
        return Err(fail(
            PolarisStatus::BufferTooSmall,
            format!("{} edges do not fit in capacity {capacity}", edges.len()),
        ));
    }
    if edges.is_empty() {
        return Ok(());
    }
    if from.is_null() || to.is_null() {
        return Err(fail(PolarisStatus::NullPointer, "edge buffers are null"));
    }
    for (i, &(a, b)) in edges.iter().enumerate() {
        // SAFETY: buffers hold at least `capacity >= edges.len()` elements.
        unsafe {
            *from.add(i) = a;
            *to.add(i) = b;
            if let (Some(c), false) = (confidences, confidence.is_null()) {
                *confidence.add(i) = c[i];
            }
        }
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn polaris_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn polaris_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. Accepts NULL.
///
/// # Safety
/// `s` must be NULL or a string produced by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn polaris_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by `CString::into_raw` in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Generates a random network with default CPD ranges for `epsilon`.
///
/// # Safety
/// `out` must be a valid location for a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn polaris_network_generate(
    n: usize,
    mpn: u32,
    epsilon: f64,
    max_parents: usize,
    forbid_transitive: bool,
    faithful: bool,
    seed: u64,
    out: *mut *mut PolarisNetwork,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let out = unsafe { out_ptr(out, "out") }?;
        let mut config = SynthesisConfig::new(n, mpn_type(mpn)?, epsilon);
        config.max_parents = max_parents;
        config.forbid_transitive_edges = forbid_transitive;
        config.require_faithful = faithful;
        config.seed = seed;
        let inner = generate_network(&config)?;
        *out = Box::into_raw(Box::new(PolarisNetwork { inner }));
        Ok(())
    })
}

/// Parses a network from its JSON text.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn polaris_network_from_json(
    json: *const c_char,
    out: *mut *mut PolarisNetwork,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let (text, out) = unsafe { (c_str(json, "json")?, out_ptr(out, "out")?) };
        let inner = io::network_from_json(text)?;
        *out = Box::into_raw(Box::new(PolarisNetwork { inner }));
        Ok(())
    })
}

/// Serializes a network to JSON; free the result with `polaris_string_free`.
///
/// # Safety
/// `network` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn polaris_network_to_json(
    network: *const PolarisNetwork,
    out: *mut *mut c_char,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let (net, out) = unsafe { (borrow(network, "network")?, out_ptr(out, "out")?) };
        *out = into_c_string(io::network_to_json(&net.inner))?;
        Ok(())
    })
}

/// # Safety
/// `network` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn polaris_network_free(network: *mut PolarisNetwork) {
    if !network.is_null() {
        // SAFETY: created by `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(network) });
    }
}

/// Number of variables; 0 for NULL.
///
/// # Safety
/// `network` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polaris_network_node_count(network: *const PolarisNetwork) -> usize {
    // SAFETY: forwarded caller contract.
    unsafe { network.as_ref() }.map_or(0, |n| n.inner.n())
}

/// Number of edges; 0 for NULL.
///
/// # Safety
/// `network` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polaris_network_edge_count(network: *const PolarisNetwork) -> usize {
    // SAFETY: forwarded caller contract.
    unsafe { network.as_ref() }.map_or(0, |n| n.inner.dag().edge_count())
}

/// Copies the sorted edge list into `from`/`to`, each holding `capacity`
/// entries. `written` receives the edge count even when the buffers are
/// too small.
///
/// # Safety
/// Buffers must hold `capacity` elements; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn polaris_network_edges(
    network: *const PolarisNetwork,
    from: *mut usize,
    to: *mut usize,
    capacity: usize,
    written: *mut usize,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let net = unsafe { borrow(network, "network") }?;
        let edges = net.inner.dag().edges();
        // SAFETY: forwarded caller contract.
        unsafe { write_edges(&edges, None, from, to, ptr::null_mut(), capacity, written) }
    })
}

/// Draws `m` samples, seeded by `seed`.
///
/// # Safety
/// `network` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn polaris_network_sample(
    network: *const PolarisNetwork,
    m: usize,
    seed: u64,
    out: *mut *mut PolarisDataset,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let (net, out) = unsafe { (borrow(network, "network")?, out_ptr(out, "out")?) };
        let mut rng = substream(seed, "sample", &[]);
        let inner = sample(&net.inner, m, &mut rng)?;
        *out = Box::into_raw(Box::new(PolarisDataset { inner }));
        Ok(())
    })
}

/// Builds a dataset from `m * n` row-major 0/1 bytes; variables are named
/// `X0`, `X1`, ...
///
/// # Safety
/// `values` must point to `m * n` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn polaris_dataset_from_values(
    values: *const u8,
    m: usize,
    n: usize,
    out: *mut *mut PolarisDataset,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let out = unsafe { out_ptr(out, "out") }?;
        let len = m
            .checked_mul(n)
            .ok_or_else(|| fail(PolarisStatus::InvalidArgument, "m * n overflows"))?;
        if values.is_null() && len > 0 {
            return Err(fail(PolarisStatus::NullPointer, "values is null"));
        }
        let data = if len == 0 {
            Vec::new()
        } else {
            // SAFETY: `values` holds `len` bytes per the caller contract.
            unsafe { std::slice::from_raw_parts(values, len) }.to_vec()
        };
        let names = (0..n).map(|i| format!("X{i}")).collect();
        let inner = Dataset::from_flat(names, data)?;
        *out = Box::into_raw(Box::new(PolarisDataset { inner }));
        Ok(())
    })
}

/// Parses CSV text: a header of names, then rows of 0/1.
///
/// # Safety
/// `csv` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn polaris_dataset_from_csv(
    csv: *const c_char,
    out: *mut *mut PolarisDataset,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let (text, out) = unsafe { (c_str(csv, "csv")?, out_ptr(out, "out")?) };
        let inner = io::dataset_from_csv(text)?;
        *out = Box::into_raw(Box::new(PolarisDataset { inner }));
        Ok(())
    })
}

/// Serializes a dataset as CSV; free the result with `polaris_string_free`.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn polaris_dataset_to_csv(
    dataset: *const PolarisDataset,
    out: *mut *mut c_char,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let (ds, out) = unsafe { (borrow(dataset, "dataset")?, out_ptr(out, "out")?) };
        *out = into_c_string(io::dataset_to_csv(&ds.inner))?;
        Ok(())
    })
}

/// Sample count; 0 for NULL.
///
/// # Safety
/// `dataset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polaris_dataset_sample_count(dataset: *const PolarisDataset) -> usize {
    // SAFETY: forwarded caller contract.
    unsafe { dataset.as_ref() }.map_or(0, |d| d.inner.m())
}

/// Variable count; 0 for NULL.
///
/// # Safety
/// `dataset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polaris_dataset_variable_count(dataset: *const PolarisDataset) -> usize {
    // SAFETY: forwarded caller contract.
    unsafe { dataset.as_ref() }.map_or(0, |d| d.inner.n())
}

/// # Safety
/// `dataset` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn polaris_dataset_free(dataset: *mut PolarisDataset) {
    if !dataset.is_null() {
        // SAFETY: created by `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(dataset) });
    }
}

/// Default options: three parents, pseudocount 1, alpha filter for POLARIS only.
#[no_mangle]
pub extern "C" fn polaris_learn_options_default(mpn_type: u32, score: u32) -> PolarisLearnOptions {
    PolarisLearnOptions {
        mpn_type,
        score,
        epsilon: f64::NAN,
        max_parents: polaris::search::DEFAULT_MAX_PARENTS,
        pseudocount: 1.0,
        filter: POLARIS_FILTER_DEFAULT,
        alpha_threshold: polaris::filtering::DEFAULT_ALPHA_THRESHOLD,
    }
}

/// Learns a structure by exact search.
///
/// # Safety
/// `dataset` must be a live handle; `options` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn polaris_learn(
    dataset: *const PolarisDataset,
    options: *const PolarisLearnOptions,
    out: *mut *mut PolarisLearnResult,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let (ds, o, out) = unsafe {
            (
                borrow(dataset, "dataset")?,
                borrow(options, "options")?,
                out_ptr(out, "out")?,
            )
        };
        let mut opts = LearnOptions::new(mpn_type(o.mpn_type)?, score_kind(o.score, o.epsilon)?);
        opts.max_parents = o.max_parents;
        opts.pseudocount = o.pseudocount;
        opts.alpha_threshold = match o.filter {
            POLARIS_FILTER_DEFAULT => opts.alpha_threshold,
            POLARIS_FILTER_OFF => None,
            POLARIS_FILTER_ON => Some(o.alpha_threshold),
            f => return Err(fail(PolarisStatus::InvalidArgument, format!("unknown filter mode {f}"))),
        };
        let outcome = polaris::learn(&ds.inner, &opts)?;
        *out = Box::into_raw(Box::new(PolarisLearnResult {
            dag: outcome.dag,
            score: outcome.diagnostics.score,
            edges: outcome.diagnostics.edges,
            options: opts,
            epsilon: (o.score == POLARIS_SCORE_DIPROG).then_some(o.epsilon),
        }));
        Ok(())
    })
}

/// Total score of the learned structure; NaN for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polaris_learn_result_score(result: *const PolarisLearnResult) -> f64 {
    // SAFETY: forwarded caller contract.
    unsafe { result.as_ref() }.map_or(f64::NAN, |r| r.score)
}

/// Number of learned edges; 0 for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polaris_learn_result_edge_count(result: *const PolarisLearnResult) -> usize {
    // SAFETY: forwarded caller contract.
    unsafe { result.as_ref() }.map_or(0, |r| r.dag.edge_count())
}

/// Learned edges with their confidence (score drop when the edge is
/// removed). `confidence` may be NULL.
///
/// # Safety
/// Non-null buffers must hold `capacity` elements; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn polaris_learn_result_edges(
    result: *const PolarisLearnResult,
    from: *mut usize,
    to: *mut usize,
    confidence: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let r = unsafe { borrow(result, "result") }?;
        let edges: Vec<_> = r.edges.iter().map(|f| (f.from, f.to)).collect();
        let conf: Vec<f64> = r.edges.iter().map(FoldChange::confidence).collect();
        // SAFETY: forwarded caller contract.
        unsafe { write_edges(&edges, Some(&conf), from, to, confidence, capacity, written) }
    })
}

/// Fits CPDs for the learned structure and returns a network handle.
///
/// # Safety
/// `result` and `dataset` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn polaris_learn_result_to_network(
    result: *const PolarisLearnResult,
    dataset: *const PolarisDataset,
    out: *mut *mut PolarisNetwork,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let (r, ds, out) = unsafe {
            (
                borrow(result, "result")?,
                borrow(dataset, "dataset")?,
                out_ptr(out, "out")?,
            )
        };
        let inner = estimate_network(
            &ds.inner,
            &r.dag,
            r.options.mpn_type,
            r.epsilon,
            r.options.pseudocount,
        )?;
        *out = Box::into_raw(Box::new(PolarisNetwork { inner }));
        Ok(())
    })
}

/// # Safety
/// `result` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn polaris_learn_result_free(result: *mut PolarisLearnResult) {
    if !result.is_null() {
        // SAFETY: created by `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Scores the structure of `network` against `dataset`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn polaris_network_score(
    dataset: *const PolarisDataset,
    network: *const PolarisNetwork,
    mpn: u32,
    score: u32,
    epsilon: f64,
    pseudocount: f64,
    out: *mut f64,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let (ds, net, out) = unsafe {
            (
                borrow(dataset, "dataset")?,
                borrow(network, "network")?,
                out_ptr(out, "out")?,
            )
        };
        let kind = score_kind(score, epsilon)?;
        *out = network_score(&ds.inner, net.inner.dag(), mpn_type(mpn)?, kind, pseudocount)?;
        Ok(())
    })
}

/// Directed-edge precision and recall of `learned` against `truth`.
///
/// # Safety
/// Handles must be live; `precision` and `recall` must be writable.
#[no_mangle]
pub unsafe extern "C" fn polaris_precision_recall(
    truth: *const PolarisNetwork,
    learned: *const PolarisNetwork,
    precision: *mut f64,
    recall: *mut f64,
) -> PolarisStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let (t, l, p, r) = unsafe {
            (
                borrow(truth, "truth")?,
                borrow(learned, "learned")?,
                out_ptr(precision, "precision")?,
                out_ptr(recall, "recall")?,
            )
        };
        (*p, *r) = precision_recall(t.inner.dag(), l.inner.dag())?;
        Ok(())
    })
}
