//! C ABI over the `kandinsky` library.
//!
//! Every fallible function returns a [`KpStatus`] and writes its result
//! through an out-pointer. On failure a message is available from
//! [`kp_last_error_message`] on the same thread until the next call.
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Strings returned through `char **`
//! are released with [`kp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kandinsky::dsl::{EvalContext, Statement};
use kandinsky::model::{validate_figure, Figure, UniverseConfig};
use kandinsky::render::{render_svg, RenderStyle};
use kandinsky::sampler::{sample_figure, stream_rng, SamplerConfig, Stream};
use kandinsky::splits::{chernoff_divergence, Distribution};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidJson = 4,
    InvalidFigure = 5,
    InvalidUniverse = 6,
    SampleFailed = 7,
    RenderFailed = 8,
    InvalidArgument = 9,
    Panic = 10,
}

/// A parsed statement.
pub struct KpStatement(Statement);

/// A figure: an ordered list of objects on the unit canvas.
pub struct KpFigure(Figure);

/// A universe configuration.
pub struct KpUniverse(UniverseConfig);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(KpStatus, String);

fn fail<T>(status: KpStatus, msg: impl std::fmt::Display) -> Result<T, Fail> {
    Err(Fail(status, msg.to_string()))
}

/// Runs `f`, records any failure message, and turns panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> KpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return fail(KpStatus::NullPointer, format!("{name} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|e| fail(KpStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().map_or_else(|| fail(KpStatus::NullPointer, format!("{name} is null")), Ok)
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().map_or_else(|| fail(KpStatus::NullPointer, format!("{name} is null")), Ok)
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s).map(CString::into_raw).or_else(|e| fail(KpStatus::InvalidArgument, e))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn kp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kp_statement_parse(text: *const c_char, out: *mut *mut KpStatement) -> KpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        let s = Statement::parse(text).or_else(|e| fail(KpStatus::ParseError, e))?;
        *out = Box::into_raw(Box::new(KpStatement(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle from [`kp_statement_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kp_statement_free(s: *mut KpStatement) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Truth value of the statement on the figure. `universe` may be NULL, in
/// which case the default universe's size threshold applies.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kp_statement_evaluate(
    s: *const KpStatement,
    f: *const KpFigure,
    universe: *const KpUniverse,
    out: *mut bool,
) -> KpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let s = ref_arg(s, "statement")?;
        let f = ref_arg(f, "figure")?;
        let ctx = match universe.as_ref() {
            Some(u) => EvalContext::for_universe(&u.0),
            None => EvalContext::default(),
        };
        *out = s.0.evaluate(&f.0, &ctx);
        Ok(())
    })
}

/// English rendering of the statement.
///
/// # Safety
/// `s` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kp_statement_render_text(s: *const KpStatement, out: *mut *mut c_char) -> KpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let s = ref_arg(s, "statement")?;
        *out = c_string(s.0.render_text())?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kp_universe_default(out: *mut *mut KpUniverse) -> KpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(KpUniverse(UniverseConfig::default())));
        Ok(())
    })
}

/// Universe from a JSON object; missing fields take their defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kp_universe_from_json(json: *const c_char, out: *mut *mut KpUniverse) -> KpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let json = str_arg(json, "json")?;
        let u: UniverseConfig = serde_json::from_str(json).or_else(|e| fail(KpStatus::InvalidJson, e))?;
        u.validate().or_else(|e| fail(KpStatus::InvalidUniverse, e))?;
        *out = Box::into_raw(Box::new(KpUniverse(u)));
        Ok(())
    })
}

/// # Safety
/// `u` must be NULL or a live universe handle.
#[no_mangle]
pub unsafe extern "C" fn kp_universe_free(u: *mut KpUniverse) {
    if !u.is_null() {
        drop(Box::from_raw(u));
    }
}

/// Figure from `{"objects": [...]}` JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kp_figure_from_json(json: *const c_char, out: *mut *mut KpFigure) -> KpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let json = str_arg(json, "json")?;
        let f: Figure = serde_json::from_str(json).or_else(|e| fail(KpStatus::InvalidJson, e))?;
        *out = Box::into_raw(Box::new(KpFigure(f)));
        Ok(())
    })
}

/// # Safety
/// `f` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kp_figure_to_json(f: *const KpFigure, out: *mut *mut c_char) -> KpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let f = ref_arg(f, "figure")?;
        let json = serde_json::to_string(&f.0).or_else(|e| fail(KpStatus::InvalidFigure, e))?;
        *out = c_string(json)?;
        Ok(())
    })
}

/// Number of objects, or 0 for NULL.
///
/// # Safety
/// `f` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn kp_figure_len(f: *const KpFigure) -> usize {
    f.as_ref().map_or(0, |f| f.0.len())
}

/// # Safety
/// `f` must be NULL or a live figure handle.
#[no_mangle]
pub unsafe extern "C" fn kp_figure_free(f: *mut KpFigure) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Checks the figure against the universe. `*ok` is false when any rule is
/// broken; the violations are then in the last error message.
///
/// # Safety
/// Handles must be live; `ok` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kp_figure_validate(f: *const KpFigure, u: *const KpUniverse, ok: *mut bool) -> KpStatus {
    let mut violations = None;
    let status = guard(|| {
        let ok = out_arg(ok, "ok")?;
        let f = ref_arg(f, "figure")?;
        let u = ref_arg(u, "universe")?;
        let report = validate_figure(&f.0, &u.0);
        *ok = report.is_ok();
        if !report.is_ok() {
            violations = Some(report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "));
        }
        Ok(())
    });
    if let Some(v) = violations {
        set_error(v);
    }
    status
}

/// Samples one figure. The same (universe, seed, index) always yields the
/// same figure.
///
/// # Safety
/// `u` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kp_figure_sample(u: *const KpUniverse, seed: u64, index: u64, out: *mut *mut KpFigure) -> KpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let u = ref_arg(u, "universe")?;
        let mut rng = stream_rng(seed, Stream::Figure, index);
        let f = sample_figure(&u.0, &SamplerConfig::default(), &mut rng).or_else(|e| fail(KpStatus::SampleFailed, e))?;
        *out = Box::into_raw(Box::new(KpFigure(f)));
        Ok(())
    })
}

/// SVG text of the figure on a `canvas_px` square canvas with the default
/// palette.
///
/// # Safety
/// `f` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kp_render_svg(f: *const KpFigure, canvas_px: u32, out: *mut *mut c_char) -> KpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let f = ref_arg(f, "figure")?;
        let style = RenderStyle { canvas_px, ..RenderStyle::default() };
        let svg = render_svg(&f.0, &style).or_else(|e| fail(KpStatus::RenderFailed, e))?;
        *out = c_string(svg)?;
        Ok(())
    })
}

/// Chernoff divergence `1 - sum p^alpha q^(1-alpha)` between two weight
/// vectors over the same `len` keys. Weights are normalized first.
///
/// # Safety
/// `p` and `q` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kp_chernoff_divergence(
    p: *const f64,
    q: *const f64,
    len: usize,
    alpha: f64,
    out: *mut f64,
) -> KpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if len == 0 {
            return fail(KpStatus::InvalidArgument, "len must be > 0");
        }
        if p.is_null() || q.is_null() {
            return fail(KpStatus::NullPointer, "p and q must not be null");
        }
        let to_dist = |w: &[f64], name: &str| -> Result<Distribution, Fail> {
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) || w.iter().sum::<f64>() <= 0.0 {
                return fail(KpStatus::InvalidArgument, format!("{name} needs finite non-negative weights with positive sum"));
            }
            let counts = w.iter().enumerate().filter(|(_, v)| **v > 0.0).map(|(i, v)| (format!("{i}"), *v)).collect();
            Ok(Distribution::from_counts(&counts))
        };
        let p = to_dist(std::slice::from_raw_parts(p, len), "p")?;
        let q = to_dist(std::slice::from_raw_parts(q, len), "q")?;
        *out = chernoff_divergence(&p, &q, alpha).or_else(|e| fail(KpStatus::InvalidArgument, e))?;
        Ok(())
    })
}
