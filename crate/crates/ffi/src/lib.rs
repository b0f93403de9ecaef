//! C ABI over the covstar engine.
//!
//! Charts and forms are opaque heap handles released with their `_free`
//! function. Every entry point returns a [`CovstarStatus`]; on failure the
//! message is available from [`covstar_last_error`] on the same thread.
//! Strings returned through `char **` outputs are owned by the caller and
//! released with [`covstar_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use covstar::constraints::run_suite;
use covstar::harness::{verify, Suite, TrialConfig};
use covstar::io::{fixture, form_to_json, parse_chart, parse_form, star_to_json};
use covstar::{bracket, star, ChartGeometry, Error, TensorValuedForm};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovstarStatus {
    Ok = 0,
    /// Null pointer or a string that is not UTF-8.
    InvalidArgument = 1,
    /// Malformed chart, form or expression text.
    Input = 2,
    /// A constraint or premise the operation needs does not hold.
    Precondition = 3,
    /// Operation not available in the chart's mode.
    Mode = 4,
    UnsupportedOrder = 5,
    /// Operands of incompatible dimension or shape.
    Shape = 6,
    /// Internal panic, caught at the boundary.
    Panic = 7,
}

/// Opaque chart handle.
pub struct CovstarChart(ChartGeometry);

/// Opaque tensor-valued form handle.
pub struct CovstarForm(TensorValuedForm);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CovstarStatus {
    match e {
        Error::Precondition(_) => CovstarStatus::Precondition,
        Error::Mode(_) => CovstarStatus::Mode,
        Error::UnsupportedOrder { .. } => CovstarStatus::UnsupportedOrder,
        Error::DimensionMismatch { .. } | Error::Shape(_) => CovstarStatus::Shape,
        _ => CovstarStatus::Input,
    }
}

struct Fail(CovstarStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(what: &str) -> Fail {
    Fail(CovstarStatus::InvalidArgument, what.to_string())
}

/// Runs `f`, records any error or panic and converts it to a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CovstarStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CovstarStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            CovstarStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not UTF-8")))
}

unsafe fn chart<'a>(p: *const CovstarChart) -> Result<&'a ChartGeometry, Fail> {
    p.as_ref()
        .map(|c| &c.0)
        .ok_or_else(|| invalid("chart is null"))
}

unsafe fn form<'a>(p: *const CovstarForm) -> Result<&'a TensorValuedForm, Fail> {
    p.as_ref()
        .map(|f| &f.0)
        .ok_or_else(|| invalid("form is null"))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    *out = CString::new(s).expect("JSON has no NUL").into_raw();
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn covstar_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn covstar_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a chart from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covstar_chart_from_json(
    json: *const c_char,
    out: *mut *mut CovstarChart,
) -> CovstarStatus {
    guard(|| {
        let g = parse_chart(text(json, "json")?)?;
        put(out, CovstarChart(g))
    })
}

/// Loads a built-in fixture chart by name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covstar_chart_fixture(
    name: *const c_char,
    out: *mut *mut CovstarChart,
) -> CovstarStatus {
    guard(|| {
        let g = fixture(text(name, "name")?)?;
        put(out, CovstarChart(g))
    })
}

/// # Safety
/// `c` must be null or a chart handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn covstar_chart_free(c: *mut CovstarChart) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Dimension of the chart, 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live chart handle.
#[no_mangle]
pub unsafe extern "C" fn covstar_chart_dimension(c: *const CovstarChart) -> usize {
    c.as_ref().map_or(0, |c| c.0.dimension())
}

/// Runs the constraint suite. Writes the report JSON to `out_json` and
/// whether the chart is admissible to `admissible`.
///
/// # Safety
/// `c` must be a live chart handle; outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn covstar_chart_check(
    c: *const CovstarChart,
    admissible: *mut bool,
    out_json: *mut *mut c_char,
) -> CovstarStatus {
    guard(|| {
        let g = chart(c)?;
        if admissible.is_null() {
            return Err(invalid("admissible is null"));
        }
        let report = run_suite(g);
        *admissible = report.admissible;
        put_string(out_json, report.to_json().to_string())
    })
}

/// Parses a form in the form-file JSON format for the chart's dimension.
///
/// # Safety
/// `c` must be a live chart handle, `json` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn covstar_form_from_json(
    c: *const CovstarChart,
    json: *const c_char,
    out: *mut *mut CovstarForm,
) -> CovstarStatus {
    guard(|| {
        let g = chart(c)?;
        let f = parse_form(text(json, "json")?, g.dimension())?;
        put(out, CovstarForm(f))
    })
}

/// # Safety
/// `f` must be a live form handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covstar_form_to_json(
    f: *const CovstarForm,
    out: *mut *mut c_char,
) -> CovstarStatus {
    guard(|| put_string(out, form_to_json(form(f)?).to_string()))
}

/// # Safety
/// `f` must be null or a form handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn covstar_form_free(f: *mut CovstarForm) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Poisson bracket `{a, b}` as a new form.
///
/// # Safety
/// Handles must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covstar_bracket(
    c: *const CovstarChart,
    a: *const CovstarForm,
    b: *const CovstarForm,
    out: *mut *mut CovstarForm,
) -> CovstarStatus {
    guard(|| {
        let r = bracket::poisson_bracket(form(a)?, form(b)?, chart(c)?)?;
        put(out, CovstarForm(r))
    })
}

/// Star product coefficient `C_n(a, b)` as a new form.
///
/// # Safety
/// Handles must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covstar_star_coefficient(
    c: *const CovstarChart,
    a: *const CovstarForm,
    b: *const CovstarForm,
    n: usize,
    out: *mut *mut CovstarForm,
) -> CovstarStatus {
    guard(|| {
        let s = star::star(form(a)?, form(b)?, chart(c)?, n)?;
        put(out, CovstarForm(s.coefficient(n).clone()))
    })
}

/// Star product through `hbar^order` as a JSON array of forms.
///
/// # Safety
/// Handles must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covstar_star_json(
    c: *const CovstarChart,
    a: *const CovstarForm,
    b: *const CovstarForm,
    order: usize,
    out: *mut *mut c_char,
) -> CovstarStatus {
    guard(|| {
        let s = star::star(form(a)?, form(b)?, chart(c)?, order)?;
        put_string(out, star_to_json(&s).to_string())
    })
}

/// Runs a seeded trial suite without timing fields. `exit_code` receives
/// 0 (passed), 1 (a trial failed) or 3 (a prerequisite failed).
///
/// # Safety
/// `c` must be a live chart handle, `suite` NUL-terminated, outputs valid.
#[no_mangle]
pub unsafe extern "C" fn covstar_verify(
    c: *const CovstarChart,
    suite: *const c_char,
    seed: u64,
    trials: usize,
    exit_code: *mut i32,
    out_json: *mut *mut c_char,
) -> CovstarStatus {
    guard(|| {
        let g = chart(c)?;
        let suite: Suite = text(suite, "suite")?.parse()?;
        if exit_code.is_null() {
            return Err(invalid("exit_code is null"));
        }
        let cfg = TrialConfig {
            seed,
            trials,
            timing: false,
            ..TrialConfig::default()
        };
        let report = verify(g, suite, &cfg)?;
        *exit_code = report.exit_code();
        put_string(out_json, report.to_json())
    })
}
