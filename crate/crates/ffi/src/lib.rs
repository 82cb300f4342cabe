//! C interface to `finlab`.
//!
//! Objects are opaque handles created by `*_new`/`*_load`/`*_parse`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`FinlabStatus`]; on failure a message is available from
//! [`finlab_last_error`] on the same thread until the next failing call.
//! Strings returned by the library are owned by the caller and must be
//! released with [`finlab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use finlab::envmodel::EnvModel;
use finlab::experiments::{self, Report};
use finlab::logic::{self, FiniteInterpretation};
use finlab::planner::Planner;
use finlab::utility::{DiscountSpec, RewardCodec, UtilitySpec};
use finlab::values::{self, ValueProfile};
use finlab::{Error, InteractionHistory};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FinlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    ImpossibleHistory = 5,
    ResourceCap = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FinlabAggregate {
    Mean = 0,
    Maximin = 1,
    Weighted = 2,
}

pub struct FinlabModel(EnvModel);
pub struct FinlabInterpretation(FiniteInterpretation);
pub struct FinlabReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> FinlabStatus {
    match e {
        Error::Syntax { .. }
        | Error::Format { .. }
        | Error::Arity { .. }
        | Error::Kind(_)
        | Error::Codec(_) => FinlabStatus::Parse,
        Error::ImpossibleHistory => FinlabStatus::ImpossibleHistory,
        Error::ResourceCap(_) => FinlabStatus::ResourceCap,
        Error::Io(_) => FinlabStatus::Io,
        _ => FinlabStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (FinlabStatus, String)>) -> FinlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FinlabStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            FinlabStatus::Panic
        }
    }
}

fn lib(e: Error) -> (FinlabStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FinlabStatus, String) {
    (FinlabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FinlabStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (FinlabStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(
    p: *const T,
    len: usize,
    what: &str,
) -> Result<&'a [T], (FinlabStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (FinlabStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn finlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn finlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a builtin model (`table41`, `hitman`, `bernoulli:P`,
/// `delusion63:ALPHA`, `delusion64`) or a model file.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `model` writable.
#[no_mangle]
pub unsafe extern "C" fn finlab_model_load(
    spec: *const c_char,
    model: *mut *mut FinlabModel,
) -> FinlabStatus {
    guard(|| {
        let spec = text(spec, "spec")?;
        let slot = out(model, "model")?;
        *slot = boxed(FinlabModel(experiments::load_model(spec).map_err(lib)?));
        Ok(())
    })
}

/// Parses a model from its text format.
///
/// # Safety
/// `source` must be a NUL-terminated string and `model` writable.
#[no_mangle]
pub unsafe extern "C" fn finlab_model_parse(
    source: *const c_char,
    model: *mut *mut FinlabModel,
) -> FinlabStatus {
    guard(|| {
        let source = text(source, "source")?;
        let slot = out(model, "model")?;
        *slot = boxed(FinlabModel(
            finlab::envmodel::parse_model(source).map_err(lib)?,
        ));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn finlab_model_free(model: *mut FinlabModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; the output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn finlab_model_dims(
    model: *const FinlabModel,
    n_states: *mut usize,
    n_actions: *mut usize,
    n_observations: *mut usize,
) -> FinlabStatus {
    guard(|| {
        let q = &model.as_ref().ok_or_else(|| null("model"))?.0;
        for (p, v) in [
            (n_states, q.n_states()),
            (n_actions, q.n_actions()),
            (n_observations, q.n_observations()),
        ] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

unsafe fn history(
    q: &EnvModel,
    actions: *const usize,
    observations: *const usize,
    len: usize,
) -> Result<InteractionHistory, (FinlabStatus, String)> {
    let a = slice(actions, len, "actions")?;
    let o = slice(observations, len, "observations")?;
    let pairs: Vec<_> = a.iter().copied().zip(o.iter().copied()).collect();
    InteractionHistory::from_pairs(q.n_actions(), q.n_observations(), &pairs).map_err(lib)
}

/// Probability of the observations given the actions, `rho(h)`.
///
/// # Safety
/// `actions` and `observations` must each hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn finlab_model_history_probability(
    model: *const FinlabModel,
    actions: *const usize,
    observations: *const usize,
    len: usize,
    probability: *mut f64,
) -> FinlabStatus {
    guard(|| {
        let q = &model.as_ref().ok_or_else(|| null("model"))?.0;
        let h = history(q, actions, observations, len)?;
        *out(probability, "probability")? = q.history_probability(&h);
        Ok(())
    })
}

/// Best next action for a reward-maximizing agent after the given history.
/// Observations factor as `o = o' * grid_len + reward_index`; utility is
/// discounted geometrically with `gamma` over `horizon` steps.
///
/// # Safety
/// `actions`/`observations` must hold `len` elements and `grid` `grid_len`.
#[no_mangle]
pub unsafe extern "C" fn finlab_model_best_action(
    model: *const FinlabModel,
    actions: *const usize,
    observations: *const usize,
    len: usize,
    grid: *const f64,
    grid_len: usize,
    gamma: f64,
    horizon: usize,
    action: *mut usize,
) -> FinlabStatus {
    guard(|| {
        let q = &model.as_ref().ok_or_else(|| null("model"))?.0;
        let h = history(q, actions, observations, len)?;
        let grid = slice(grid, grid_len, "grid")?.to_vec();
        let u = UtilitySpec::Reward(RewardCodec::new(grid).map_err(lib)?);
        let planner = Planner::new(q, &u, DiscountSpec::geometric(gamma).map_err(lib)?, horizon);
        *out(action, "action")? = planner.best_action(&h).map_err(lib)?;
        Ok(())
    })
}

/// The three-element field with `+`, `*`, `0` and `1`.
#[no_mangle]
pub extern "C" fn finlab_interpretation_gf3() -> *mut FinlabInterpretation {
    boxed(FinlabInterpretation(logic::gf3()))
}

/// # Safety
/// `source` must be a NUL-terminated string and `interp` writable.
#[no_mangle]
pub unsafe extern "C" fn finlab_interpretation_parse(
    source: *const c_char,
    interp: *mut *mut FinlabInterpretation,
) -> FinlabStatus {
    guard(|| {
        let source = text(source, "source")?;
        let slot = out(interp, "interp")?;
        *slot = boxed(FinlabInterpretation(
            logic::parse_interpretation(source).map_err(lib)?,
        ));
        Ok(())
    })
}

/// # Safety
/// `interp` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn finlab_interpretation_free(interp: *mut FinlabInterpretation) {
    if !interp.is_null() {
        drop(Box::from_raw(interp));
    }
}

/// Decides a statement in the interpretation.
///
/// # Safety
/// `interp` must be a live handle and `statement` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn finlab_decide(
    interp: *const FinlabInterpretation,
    statement: *const c_char,
    verdict: *mut bool,
) -> FinlabStatus {
    guard(|| {
        let m = &interp.as_ref().ok_or_else(|| null("interp"))?.0;
        let f = logic::parse_formula(text(statement, "statement")?).map_err(lib)?;
        *out(verdict, "verdict")? = logic::decide(&f, m).map_err(lib)?;
        Ok(())
    })
}

/// Aggregates a profile of member values in `[0, 1]`. `alive` may be null
/// (all alive); `weights` is only read for [`FinlabAggregate::Weighted`].
///
/// # Safety
/// Non-null arrays must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn finlab_aggregate(
    values: *const f64,
    alive: *const bool,
    weights: *const f64,
    len: usize,
    kind: FinlabAggregate,
    result: *mut f64,
) -> FinlabStatus {
    guard(|| {
        let v = slice(values, len, "values")?;
        let alive = if alive.is_null() {
            None
        } else {
            Some(slice(alive, len, "alive")?)
        };
        let weights = match kind {
            FinlabAggregate::Weighted => Some(slice(weights, len, "weights")?),
            _ => None,
        };
        let mut p = ValueProfile::new();
        for (i, &x) in v.iter().enumerate() {
            p.push(
                &i.to_string(),
                x,
                alive.is_none_or(|a| a[i]),
                weights.map(|w| w[i]),
            );
        }
        let x = match kind {
            FinlabAggregate::Mean => values::aggregate_mean(&p),
            FinlabAggregate::Maximin => values::aggregate_maximin(&p),
            FinlabAggregate::Weighted => values::aggregate_weighted(&p),
        }
        .map_err(lib)?;
        *out(result, "result")? = x;
        Ok(())
    })
}

/// Runs an experiment by its command-line name. `config_json` may be null
/// for defaults.
///
/// # Safety
/// `name` and non-null `config_json` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn finlab_experiment_run(
    name: *const c_char,
    config_json: *const c_char,
    report: *mut *mut FinlabReport,
) -> FinlabStatus {
    guard(|| {
        let name = text(name, "name")?;
        let cfg = if config_json.is_null() {
            serde_json::Value::Null
        } else {
            serde_json::from_str(text(config_json, "config_json")?)
                .map_err(|e| (FinlabStatus::Parse, format!("config: {e}")))?
        };
        let slot = out(report, "report")?;
        *slot = boxed(FinlabReport(
            experiments::run_named(name, &cfg).map_err(lib)?,
        ));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn finlab_report_free(report: *mut FinlabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Whether every checked metric passed; false for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn finlab_report_all_pass(report: *const FinlabReport) -> bool {
    report.as_ref().is_some_and(|r| r.0.all_pass())
}

/// Numeric value of a named metric.
///
/// # Safety
/// `report` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn finlab_report_metric(
    report: *const FinlabReport,
    name: *const c_char,
    value: *mut f64,
) -> FinlabStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.0;
        let name = text(name, "name")?;
        let v = r.num(name).ok_or_else(|| {
            (
                FinlabStatus::InvalidArgument,
                format!("no numeric metric {name}"),
            )
        })?;
        *out(value, "value")? = v;
        Ok(())
    })
}

/// The report as JSON; release with [`finlab_string_free`].
///
/// # Safety
/// `report` must be a live handle and `json` writable.
#[no_mangle]
pub unsafe extern "C" fn finlab_report_json(
    report: *const FinlabReport,
    json: *mut *mut c_char,
) -> FinlabStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.0;
        let s = serde_json::to_string(r).map_err(|e| (FinlabStatus::Io, e.to_string()))?;
        let slot = out(json, "json")?;
        *slot = CString::new(s)
            .map_err(|e| (FinlabStatus::Io, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// Writes `report.json`, `metrics.csv` and table CSVs into `dir`.
///
/// # Safety
/// `report` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn finlab_report_emit(
    report: *const FinlabReport,
    dir: *const c_char,
) -> FinlabStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.0;
        r.emit(Path::new(text(dir, "dir")?)).map_err(lib)
    })
}
