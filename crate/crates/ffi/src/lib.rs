//! C interface to the bien extractor.
//!
//! Every function returns a [`BienStatus`]. On failure the message is kept
//! per thread and can be read with [`bien_last_error_message`]. Strings
//! handed out must be released with [`bien_string_free`], slot arrays with
//! [`bien_slots_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use bien::features::LexiconSet;
use bien::pipeline::Extractor;
use bien::Error;

/// Opaque handle to a loaded model.
pub struct BienExtractor {
    inner: Extractor,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BienStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    /// Malformed or inconsistent input data or model files.
    Data = 4,
    /// Impossible evidence or a numerical failure.
    Numeric = 5,
    Panic = 6,
}

/// One extracted slot. `start`/`end` are byte offsets into the input.
#[repr(C)]
pub struct BienSlot {
    pub field: u32,
    pub start: usize,
    pub end: usize,
    /// Normalized filler, NUL-terminated.
    pub text: *mut c_char,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BienStatus {
    match e {
        Error::Io { .. } => BienStatus::Io,
        Error::ZeroProbabilityEvidence { .. } | Error::Numeric(_) => BienStatus::Numeric,
        _ => BienStatus::Data,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (BienStatus, String)>) -> BienStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            BienStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BienStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (BienStatus, String) {
    (status_of(&e), format!("{}: {e}", e.code()))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (BienStatus, String)> {
    if p.is_null() {
        return Err((BienStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (BienStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Load a model directory. `lexicon_dir` may be null for the built-in
/// lexicons. On success `*out` owns a handle for [`bien_extractor_free`].
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bien_extractor_load(
    model_dir: *const c_char,
    lexicon_dir: *const c_char,
    out: *mut *mut BienExtractor,
) -> BienStatus {
    guard(|| {
        if out.is_null() {
            return Err((BienStatus::NullArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let dir = str_arg(model_dir, "model_dir")?;
        let lexicons = if lexicon_dir.is_null() {
            LexiconSet::builtin()
        } else {
            LexiconSet::load_dir(Path::new(str_arg(lexicon_dir, "lexicon_dir")?)).map_err(lib_err)?
        };
        let inner = Extractor::load(Path::new(dir), lexicons).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(BienExtractor { inner }));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`bien_extractor_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn bien_extractor_free(handle: *mut BienExtractor) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of target fields of the model.
///
/// # Safety
/// `handle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bien_field_count(handle: *const BienExtractor, out: *mut usize) -> BienStatus {
    guard(|| {
        if handle.is_null() || out.is_null() {
            return Err((BienStatus::NullArgument, "handle or out is null".into()));
        }
        *out = (*handle).inner.fields().len();
        Ok(())
    })
}

/// Name of field `index`, as a new string.
///
/// # Safety
/// `handle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bien_field_name(handle: *const BienExtractor, index: usize, out: *mut *mut c_char) -> BienStatus {
    guard(|| {
        if handle.is_null() || out.is_null() {
            return Err((BienStatus::NullArgument, "handle or out is null".into()));
        }
        let fields = (*handle).inner.fields();
        if index >= fields.len() {
            return Err((BienStatus::Data, format!("field index {index} out of range")));
        }
        *out = c_string(fields.name(index).to_string());
        Ok(())
    })
}

/// Copy of `text` with `<field>` / `</field>` around each predicted slot.
///
/// # Safety
/// `handle` must be a live handle, `text` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bien_tag_text(handle: *const BienExtractor, text: *const c_char, out: *mut *mut c_char) -> BienStatus {
    guard(|| {
        if handle.is_null() || out.is_null() {
            return Err((BienStatus::NullArgument, "handle or out is null".into()));
        }
        *out = ptr::null_mut();
        let text = str_arg(text, "text")?;
        *out = c_string((*handle).inner.tag_text(text).map_err(lib_err)?);
        Ok(())
    })
}

/// Predicted slots of `text`. `*slots` receives an array of `*len` entries
/// (null when empty), released with [`bien_slots_free`].
///
/// # Safety
/// `handle` must be a live handle, `text` NUL-terminated, `slots` and `len`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bien_extract(
    handle: *const BienExtractor,
    text: *const c_char,
    slots: *mut *mut BienSlot,
    len: *mut usize,
) -> BienStatus {
    guard(|| {
        if handle.is_null() || slots.is_null() || len.is_null() {
            return Err((BienStatus::NullArgument, "handle, slots or len is null".into()));
        }
        *slots = ptr::null_mut();
        *len = 0;
        let text = str_arg(text, "text")?;
        let found = (*handle).inner.locate(text).map_err(lib_err)?;
        if found.is_empty() {
            return Ok(());
        }
        let items: Box<[BienSlot]> = found
            .into_iter()
            .map(|s| BienSlot {
                field: s.field as u32,
                start: s.start,
                end: s.end,
                text: c_string(s.text),
            })
            .collect();
        *len = items.len();
        *slots = Box::into_raw(items) as *mut BienSlot;
        Ok(())
    })
}

/// # Safety
/// `slots`/`len` must come from one [`bien_extract`] call, or be null/0.
#[no_mangle]
pub unsafe extern "C" fn bien_slots_free(slots: *mut BienSlot, len: usize) {
    if slots.is_null() {
        return;
    }
    let items = Box::from_raw(ptr::slice_from_raw_parts_mut(slots, len));
    for s in items.iter() {
        bien_string_free(s.text);
    }
}

/// Field-level P(next slot field | last slot field) table as text.
///
/// # Safety
/// `handle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bien_cpt_report(handle: *const BienExtractor, out: *mut *mut c_char) -> BienStatus {
    guard(|| {
        if handle.is_null() || out.is_null() {
            return Err((BienStatus::NullArgument, "handle or out is null".into()));
        }
        *out = c_string(bien::eval::report_cpt((*handle).inner.model()).to_string());
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn bien_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bien_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
