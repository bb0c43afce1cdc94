//! C ABI for the `senmap` library.
//!
//! Objects cross the boundary as opaque handles that the caller frees with the
//! matching `*_free` function. Every fallible call returns an `int32_t`
//! status: `SENMAP_OK` on success, one of the small `SENMAP_ERR_*` codes for
//! boundary problems, or the library's error-class code (10 and up). The
//! message of the last failure on the calling thread is available from
//! [`senmap_last_error`].
//!
//! Labels and sizes are `size_t`; features and probabilities are `double`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use senmap::experiment::frame_error_rate;
use senmap::mapping::{
    phone_map, senone_map, ConfusionCounts, LabelInventory, LabelMap, SenoneToPhoneTable,
};
use senmap::multitask::{prune, MultiHeadNetwork};
use senmap::nnet::{init_network, Network};
use senmap::{Error, FrameSet};

pub const SENMAP_OK: i32 = 0;
pub const SENMAP_ERR_NULL: i32 = 1;
pub const SENMAP_ERR_PANIC: i32 = 2;
pub const SENMAP_ERR_UTF8: i32 = 3;
pub const SENMAP_ERR_BUFFER: i32 = 4;

pub const SENMAP_ERR_INVALID_ARCHITECTURE: i32 = 10;
pub const SENMAP_ERR_SHAPE: i32 = 11;
pub const SENMAP_ERR_LABEL_RANGE: i32 = 12;
pub const SENMAP_ERR_RANGE: i32 = 13;
pub const SENMAP_ERR_EMPTY_DATA: i32 = 14;
pub const SENMAP_ERR_CONFIG: i32 = 15;
pub const SENMAP_ERR_INCOMPLETE_TABLE: i32 = 16;
pub const SENMAP_ERR_INCOMPLETE_MAP: i32 = 17;
pub const SENMAP_ERR_DUPLICATE_ENTRY: i32 = 18;
pub const SENMAP_ERR_INCOMPLETE_MAPSET: i32 = 19;
pub const SENMAP_ERR_UNKNOWN_LANGUAGE: i32 = 20;
pub const SENMAP_ERR_INVENTORY: i32 = 21;
pub const SENMAP_ERR_FRACTION: i32 = 22;
pub const SENMAP_ERR_SPEC: i32 = 23;
pub const SENMAP_ERR_MISSING_BASELINE: i32 = 24;
pub const SENMAP_ERR_PARSE: i32 = 25;
pub const SENMAP_ERR_FORMAT: i32 = 26;
pub const SENMAP_ERR_IO: i32 = 27;

/// Single-head feed-forward network.
pub struct SenmapNetwork(Network);

/// Shared hidden stack with one output head per language.
pub struct SenmapMultiHead(MultiHeadNetwork);

/// Total map between two label inventories.
pub struct SenmapLabelMap(LabelMap);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

enum Failure {
    Null(&'static str),
    Utf8,
    Buffer { need: usize, have: usize },
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> i32 {
    let (code, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            return SENMAP_OK;
        }
        Ok(Err(Failure::Null(what))) => (SENMAP_ERR_NULL, format!("null pointer: {what}")),
        Ok(Err(Failure::Utf8)) => (SENMAP_ERR_UTF8, "path is not valid UTF-8".to_string()),
        Ok(Err(Failure::Buffer { need, have })) => (
            SENMAP_ERR_BUFFER,
            format!("output buffer holds {have} values, {need} needed"),
        ),
        Ok(Err(Failure::Lib(e))) => (e.code(), e.to_string()),
        Err(_) => (SENMAP_ERR_PANIC, "internal panic".to_string()),
    };
    set_last_error(msg);
    code
}

unsafe fn href<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Failure::Utf8)
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn senmap_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn senmap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Seeded network with layer widths `dims[0..n_dims]` (input first).
///
/// # Safety
/// `dims` must point to `n_dims` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn senmap_network_init(
    dims: *const usize,
    n_dims: usize,
    seed: u64,
    out: *mut *mut SenmapNetwork,
) -> i32 {
    guard(|| {
        let net = init_network(slice(dims, n_dims, "dims")?, seed)?;
        put(out, SenmapNetwork(net))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn senmap_network_load(path_: *const c_char, out: *mut *mut SenmapNetwork) -> i32 {
    guard(|| {
        let net = Network::load(&path(path_)?)?;
        put(out, SenmapNetwork(net))
    })
}

/// # Safety
/// `net` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn senmap_network_save(net: *const SenmapNetwork, path_: *const c_char) -> i32 {
    guard(|| Ok(href(net, "net")?.0.save(&path(path_)?)?))
}

/// # Safety
/// `net` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn senmap_network_free(net: *mut SenmapNetwork) {
    free(net)
}

/// Input width, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn senmap_network_input_dim(net: *const SenmapNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.input_dim())
}

/// Output width, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn senmap_network_output_dim(net: *const SenmapNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.output_dim())
}

/// Writes the output posterior of one frame into `probs[0..n_probs]`, which
/// must hold at least the output width.
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn senmap_network_forward(
    net: *const SenmapNetwork,
    features: *const f64,
    n_features: usize,
    probs: *mut f64,
    n_probs: usize,
) -> i32 {
    guard(|| {
        let net = &href(net, "net")?.0;
        let post = net.forward(slice(features, n_features, "features")?)?;
        if n_probs < post.probs.len() {
            return Err(Failure::Buffer {
                need: post.probs.len(),
                have: n_probs,
            });
        }
        slice_mut(probs, n_probs, "probs")?[..post.probs.len()].copy_from_slice(&post.probs);
        Ok(())
    })
}

/// Most probable label of one frame (lowest index on ties).
///
/// # Safety
/// Pointers must be valid for the given lengths; `label` writable.
#[no_mangle]
pub unsafe extern "C" fn senmap_network_predict(
    net: *const SenmapNetwork,
    features: *const f64,
    n_features: usize,
    label: *mut usize,
) -> i32 {
    guard(|| {
        let net = &href(net, "net")?.0;
        let l = net.predict(slice(features, n_features, "features")?)?;
        *label.as_mut().ok_or(Failure::Null("label"))? = l;
        Ok(())
    })
}

/// Frame error rate in percent over `n_frames` row-major frames of width
/// `dim` with reference `labels`.
///
/// # Safety
/// `features` must hold `n_frames * dim` values and `labels` `n_frames`.
#[no_mangle]
pub unsafe extern "C" fn senmap_frame_error_rate(
    net: *const SenmapNetwork,
    features: *const f64,
    labels: *const usize,
    n_frames: usize,
    dim: usize,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let net = &href(net, "net")?.0;
        let total = n_frames.checked_mul(dim).ok_or(Failure::Buffer {
            need: usize::MAX,
            have: 0,
        })?;
        let feats = slice(features, total, "features")?;
        let labels = slice(labels, n_frames, "labels")?;
        let mut frames = FrameSet::with_capacity(dim, n_frames);
        for (i, &l) in labels.iter().enumerate() {
            frames.push(&feats[i * dim..(i + 1) * dim], 0, l, i as u32)?;
        }
        *out.as_mut().ok_or(Failure::Null("out"))? = frame_error_rate(net, &frames)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn senmap_multihead_load(path_: *const c_char, out: *mut *mut SenmapMultiHead) -> i32 {
    guard(|| {
        let net = MultiHeadNetwork::load(&path(path_)?)?;
        put(out, SenmapMultiHead(net))
    })
}

/// # Safety
/// `net` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn senmap_multihead_free(net: *mut SenmapMultiHead) {
    free(net)
}

/// Number of heads, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn senmap_multihead_num_heads(net: *const SenmapMultiHead) -> usize {
    net.as_ref().map_or(0, |n| n.0.num_heads())
}

/// Posterior of the head serving `language`.
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn senmap_multihead_forward(
    net: *const SenmapMultiHead,
    language: usize,
    features: *const f64,
    n_features: usize,
    probs: *mut f64,
    n_probs: usize,
) -> i32 {
    guard(|| {
        let net = &href(net, "net")?.0;
        let head = net.head_of(language)?;
        let post = net.forward_head(slice(features, n_features, "features")?, head)?;
        if n_probs < post.probs.len() {
            return Err(Failure::Buffer {
                need: post.probs.len(),
                have: n_probs,
            });
        }
        slice_mut(probs, n_probs, "probs")?[..post.probs.len()].copy_from_slice(&post.probs);
        Ok(())
    })
}

/// Single-head network made of the shared stack and `language`'s head.
///
/// # Safety
/// `net` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn senmap_multihead_prune(
    net: *const SenmapMultiHead,
    language: usize,
    out: *mut *mut SenmapNetwork,
) -> i32 {
    guard(|| {
        let pruned = prune(&href(net, "net")?.0, language)?;
        put(out, SenmapNetwork(pruned))
    })
}

/// Senone map from a row-major `n_source x n_target` count matrix.
///
/// # Safety
/// `counts` must hold `n_source * n_target` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn senmap_senone_map_from_counts(
    counts: *const u64,
    n_source: usize,
    n_target: usize,
    source_task: usize,
    target_task: usize,
    out: *mut *mut SenmapLabelMap,
) -> i32 {
    guard(|| {
        let c = ConfusionCounts::from_matrix(
            LabelInventory::senones(source_task, n_source)?,
            LabelInventory::senones(target_task, n_target)?,
            slice(counts, n_source.saturating_mul(n_target), "counts")?.to_vec(),
        )?;
        put(out, SenmapLabelMap(senone_map(&c)))
    })
}

/// Phone map from senone counts and the senone-to-phone tables of both
/// languages (`g_source[n_source]` with values below `source_phones`, and
/// likewise for the target).
///
/// # Safety
/// Arrays must hold the stated number of values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn senmap_phone_map_from_counts(
    counts: *const u64,
    n_source: usize,
    n_target: usize,
    g_source: *const usize,
    source_phones: usize,
    g_target: *const usize,
    target_phones: usize,
    out: *mut *mut SenmapLabelMap,
) -> i32 {
    guard(|| {
        let c = ConfusionCounts::from_matrix(
            LabelInventory::senones(0, n_source)?,
            LabelInventory::senones(1, n_target)?,
            slice(counts, n_source.saturating_mul(n_target), "counts")?.to_vec(),
        )?;
        let gs = SenoneToPhoneTable::new(0, source_phones, slice(g_source, n_source, "g_source")?.to_vec())?;
        let gt = SenoneToPhoneTable::new(1, target_phones, slice(g_target, n_target, "g_target")?.to_vec())?;
        put(out, SenmapLabelMap(phone_map(&c, &gs, &gt)?))
    })
}

/// Reads a map file between senone inventories of the given sizes.
///
/// # Safety
/// `path` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn senmap_map_load(
    path_: *const c_char,
    source_size: usize,
    target_size: usize,
    out: *mut *mut SenmapLabelMap,
) -> i32 {
    guard(|| {
        let p = path(path_)?;
        let text = std::fs::read_to_string(&p).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        })?;
        let map = LabelMap::parse(
            &text,
            &p,
            LabelInventory::senones(0, source_size)?,
            LabelInventory::senones(1, target_size)?,
            senmap::mapping::Provenance::DataDrivenSenone,
        )?;
        put(out, SenmapLabelMap(map))
    })
}

/// # Safety
/// `map` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn senmap_map_save(map: *const SenmapLabelMap, path_: *const c_char) -> i32 {
    guard(|| Ok(href(map, "map")?.0.save(&path(path_)?)?))
}

/// # Safety
/// `map` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn senmap_map_free(map: *mut SenmapLabelMap) {
    free(map)
}

/// Size of the source inventory, or 0 for a null handle.
///
/// # Safety
/// `map` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn senmap_map_len(map: *const SenmapLabelMap) -> usize {
    map.as_ref().map_or(0, |m| m.0.table().len())
}

/// # Safety
/// `map` must come from this library and `target` be writable.
#[no_mangle]
pub unsafe extern "C" fn senmap_map_get(map: *const SenmapLabelMap, source: usize, target: *mut usize) -> i32 {
    guard(|| {
        let t = href(map, "map")?.0.get(source)?;
        *target.as_mut().ok_or(Failure::Null("target"))? = t;
        Ok(())
    })
}

/// Maps `n` labels from `input` into `output`. The buffers may alias.
///
/// # Safety
/// Both arrays must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn senmap_map_apply(
    map: *const SenmapLabelMap,
    input: *const usize,
    output: *mut usize,
    n: usize,
) -> i32 {
    guard(|| {
        let map = &href(map, "map")?.0;
        let mapped = slice(input, n, "input")?
            .iter()
            .map(|&l| map.get(l))
            .collect::<Result<Vec<_>, _>>()?;
        if n > 0 {
            if output.is_null() {
                return Err(Failure::Null("output"));
            }
            ptr::copy(mapped.as_ptr(), output, n);
        }
        Ok(())
    })
}
