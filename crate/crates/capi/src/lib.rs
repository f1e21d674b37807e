//! C interface to the channel simulator.
//!
//! The surface follows common C library conventions:
//!
//! * Opaque handles ([`risim_scenario`], [`risim_tables`]) created and
//!   destroyed by this library; callers never see their layout.
//! * Every fallible call returns a [`risim_status`] code and, on failure,
//!   stores a human-readable message retrievable with
//!   [`risim_last_error`] (per thread, valid until the next call on that
//!   thread).
//! * Strings handed out as `char**` are heap copies owned by the caller
//!   and must be released with [`risim_string_free`].
//! * Panics never unwind across the boundary; they are caught and
//!   reported as `RISIM_STATUS_RUNTIME_ERROR`.
//!
//! Handles are immutable after creation, so sharing a `const` handle
//! across threads for concurrent runs is safe.  Status codes mirror the
//! CLI exit codes: configuration problems map to
//! `RISIM_STATUS_CONFIG_ERROR` (2) and runtime problems to
//! `RISIM_STATUS_RUNTIME_ERROR` (3).

#![allow(non_camel_case_types)]
#![allow(clippy::missing_safety_doc)] // every extern fn carries a # Safety section

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use risim::clusters::EvolutionMode;
use risim::experiments::{self, RunOptions};
use risim::output::{write_tables, OutputTable, RunStamp};
use risim::scenario::{Scenario, PRESET_NAMES};
use risim::Error as CoreError;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum risim_status {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// The scenario could not be read, parsed, or validated.
    ConfigError = 2,
    /// The computation or an output write failed, or an argument was out
    /// of its domain.
    RuntimeError = 3,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 4,
}

/// Cluster birth–death interpretation, for `risim_run_options`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum risim_evolution_mode {
    /// Keep whatever the scenario configures.
    ScenarioDefault = 0,
    /// Survival-probability reading (the default interpretation).
    Corrected = 1,
    /// Verbatim death-probability reading, kept for auditability.
    PaperLiteral = 2,
}

/// Which statistic a `risim_run` call produces.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum risim_experiment {
    /// Time autocorrelation, estimator and closed form.
    Acf = 0,
    /// Spatial cross-correlation along one array.
    Ccf = 1,
    /// RMS delay-spread distribution, baseline and doubled spreads.
    DsCdf = 2,
    /// Received-power sweeps over surface size and link distance.
    Pathloss = 3,
}

/// Execution knobs for `risim_run`.
///
/// Obtain scenario defaults with `risim_scenario_default_options`, then
/// override fields as needed.  `workers == 0` means "use all cores".
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct risim_run_options {
    /// Base seed for all random draws.
    pub seed: u64,
    /// Ensemble members per statistical estimate.
    pub ensemble: usize,
    /// Worker thread count; 0 uses every available core.  Results are
    /// byte-identical for any value.
    pub workers: usize,
    /// One of the `risim_evolution_mode` values.
    pub evolution_mode: i32,
}

/// Opaque parsed-and-validated scenario handle.
pub struct risim_scenario {
    inner: Scenario,
}

/// Opaque result set: the tables produced by one `risim_run` call plus
/// the provenance stamp written into their file headers.
pub struct risim_tables {
    tables: Vec<OutputTable>,
    stamp: RunStamp,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default());
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::default());
}

fn fail(err: CoreError) -> risim_status {
    let status = match err {
        CoreError::Io { .. } | CoreError::Parse(_) | CoreError::InvalidScenario(_) => {
            risim_status::ConfigError
        }
        CoreError::InvalidArgument(_)
        | CoreError::IndexOutOfRange(_)
        | CoreError::Output { .. } => risim_status::RuntimeError,
    };
    set_last_error(err.to_string());
    status
}

fn fail_null(name: &str) -> risim_status {
    set_last_error(format!("null pointer passed for `{name}`"));
    risim_status::NullPointer
}

/// Run `body` with panics converted to `RISIM_STATUS_RUNTIME_ERROR` and
/// the per-thread error message cleared on entry.
fn guarded(body: impl FnOnce() -> risim_status) -> risim_status {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal error: unexpected panic inside the library".into());
            risim_status::RuntimeError
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, risim_status> {
    if ptr.is_null() {
        return Err(fail_null(name));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error(format!("`{name}` is not valid UTF-8"));
        risim_status::InvalidUtf8
    })
}

unsafe fn give_string(value: &str, out: *mut *mut c_char) -> risim_status {
    let c = CString::new(value.replace('\0', " ")).unwrap_or_default();
    *out = c.into_raw();
    risim_status::Ok
}

unsafe fn give_scenario(scenario: Scenario, out: *mut *mut risim_scenario) -> risim_status {
    match scenario.validate() {
        Ok(()) => {
            *out = Box::into_raw(Box::new(risim_scenario { inner: scenario }));
            risim_status::Ok
        }
        Err(e) => fail(e),
    }
}

unsafe fn table_at<'a>(
    tables: *const risim_tables,
    index: usize,
) -> Result<&'a OutputTable, risim_status> {
    if tables.is_null() {
        return Err(fail_null("tables"));
    }
    let set = &*tables;
    set.tables.get(index).ok_or_else(|| {
        fail(CoreError::IndexOutOfRange(format!(
            "table {index} of a {}-table result set",
            set.tables.len()
        )))
    })
}

/// Library version as a static NUL-terminated string; never null, never
/// freed by the caller.
#[no_mangle]
pub extern "C" fn risim_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(risim::VERSION).unwrap_or_default())
        .as_ptr()
}

/// Message describing the most recent failure on the calling thread, or
/// an empty string after a success.  The pointer stays valid until the
/// next library call on the same thread; copy it if you need it longer.
#[no_mangle]
pub extern "C" fn risim_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Number of built-in example scenarios.
#[no_mangle]
pub extern "C" fn risim_preset_count() -> usize {
    PRESET_NAMES.len()
}

/// Name of built-in scenario `index` (see `risim_preset_count`), as a
/// fresh string for `risim_string_free`.
///
/// # Safety
/// `out` must be a valid pointer to a `char*`.
#[no_mangle]
pub unsafe extern "C" fn risim_preset_name(index: usize, out: *mut *mut c_char) -> risim_status {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        match PRESET_NAMES.get(index) {
            Some(name) => give_string(name, out),
            None => fail(CoreError::IndexOutOfRange(format!(
                "preset {index} of {}",
                PRESET_NAMES.len()
            ))),
        }
    })
}

/// Parse and validate a scenario from TOML text.  On success `*out` owns
/// the handle; release it with `risim_scenario_free`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid
/// pointer to a `risim_scenario*`.
#[no_mangle]
pub unsafe extern "C" fn risim_scenario_from_toml(
    text: *const c_char,
    out: *mut *mut risim_scenario,
) -> risim_status {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        let text = match read_str(text, "text") {
            Ok(t) => t,
            Err(status) => return status,
        };
        match Scenario::from_toml_str(text) {
            Ok(s) => give_scenario(s, out),
            Err(e) => fail(e),
        }
    })
}

/// Parse and validate a scenario from a TOML file.
///
/// # Safety
/// `path` must be a valid NUL-terminated UTF-8 string and `out` a valid
/// pointer to a `risim_scenario*`.
#[no_mangle]
pub unsafe extern "C" fn risim_scenario_from_file(
    path: *const c_char,
    out: *mut *mut risim_scenario,
) -> risim_status {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        let path = match read_str(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match Scenario::from_file(path) {
            Ok(s) => give_scenario(s, out),
            Err(e) => fail(e),
        }
    })
}

/// Load one of the built-in example scenarios by name.
///
/// # Safety
/// `name` must be a valid NUL-terminated string and `out` a valid
/// pointer to a `risim_scenario*`.
#[no_mangle]
pub unsafe extern "C" fn risim_scenario_preset(
    name: *const c_char,
    out: *mut *mut risim_scenario,
) -> risim_status {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        let name = match read_str(name, "name") {
            Ok(n) => n,
            Err(status) => return status,
        };
        match Scenario::preset(name) {
            Ok(s) => give_scenario(s, out),
            Err(e) => fail(e),
        }
    })
}

/// Re-run full validation on a handle.  Handles from the constructors
/// are already validated; this re-checks at no risk.
///
/// # Safety
/// `scenario` must be a live handle from one of the constructors.
#[no_mangle]
pub unsafe extern "C" fn risim_scenario_validate(scenario: *const risim_scenario) -> risim_status {
    guarded(|| {
        if scenario.is_null() {
            return fail_null("scenario");
        }
        match (*scenario).inner.validate() {
            Ok(()) => risim_status::Ok,
            Err(e) => fail(e),
        }
    })
}

/// The scenario's human-readable label, for `risim_string_free`.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn risim_scenario_label(
    scenario: *const risim_scenario,
    out: *mut *mut c_char,
) -> risim_status {
    guarded(|| {
        if scenario.is_null() {
            return fail_null("scenario");
        }
        if out.is_null() {
            return fail_null("out");
        }
        give_string(&(*scenario).inner.label, out)
    })
}

/// Sixteen-hex-digit digest of the fully resolved configuration; two
/// scenarios with equal digests produce identical results under equal
/// options.  Free with `risim_string_free`.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn risim_scenario_config_hash(
    scenario: *const risim_scenario,
    out: *mut *mut c_char,
) -> risim_status {
    guarded(|| {
        if scenario.is_null() {
            return fail_null("scenario");
        }
        if out.is_null() {
            return fail_null("out");
        }
        match (*scenario).inner.config_hash() {
            Ok(h) => give_string(&h, out),
            Err(e) => fail(e),
        }
    })
}

/// The fully resolved configuration as canonical TOML text (every
/// default filled in), for `risim_string_free`.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn risim_scenario_canonical_toml(
    scenario: *const risim_scenario,
    out: *mut *mut c_char,
) -> risim_status {
    guarded(|| {
        if scenario.is_null() {
            return fail_null("scenario");
        }
        if out.is_null() {
            return fail_null("out");
        }
        match (*scenario).inner.canonical_toml() {
            Ok(t) => give_string(&t, out),
            Err(e) => fail(e),
        }
    })
}

/// Fill `out` with the run options the scenario itself configures
/// (evolution mode is left at `RISIM_EVOLUTION_MODE_SCENARIO_DEFAULT`).
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn risim_scenario_default_options(
    scenario: *const risim_scenario,
    out: *mut risim_run_options,
) -> risim_status {
    guarded(|| {
        if scenario.is_null() {
            return fail_null("scenario");
        }
        if out.is_null() {
            return fail_null("out");
        }
        let defaults = RunOptions::from_scenario(&(*scenario).inner);
        *out = risim_run_options {
            seed: defaults.seed,
            ensemble: defaults.ensemble,
            workers: defaults.workers,
            evolution_mode: risim_evolution_mode::ScenarioDefault as i32,
        };
        risim_status::Ok
    })
}

/// Release a scenario handle.  Null is accepted and ignored.
///
/// # Safety
/// `scenario` must be null or a live handle, and must not be used after
/// this call.
#[no_mangle]
pub unsafe extern "C" fn risim_scenario_free(scenario: *mut risim_scenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

fn convert_options(raw: &risim_run_options) -> Result<RunOptions, CoreError> {
    let mode = match raw.evolution_mode {
        m if m == risim_evolution_mode::ScenarioDefault as i32 => None,
        m if m == risim_evolution_mode::Corrected as i32 => Some(EvolutionMode::Corrected),
        m if m == risim_evolution_mode::PaperLiteral as i32 => Some(EvolutionMode::PaperLiteral),
        other => {
            return Err(CoreError::arg(format!(
                "unknown evolution mode {other}; use a risim_evolution_mode value"
            )))
        }
    };
    Ok(RunOptions {
        seed: raw.seed,
        ensemble: raw.ensemble,
        workers: raw.workers,
        mode,
    })
}

/// Run one experiment and hand back the produced tables.  `options` may
/// be null to use the scenario's own run settings.  On success `*out`
/// owns the result set; release it with `risim_tables_free`.
///
/// # Safety
/// `scenario` must be a live handle, `options` null or a valid pointer,
/// and `out` a valid pointer to a `risim_tables*`.
#[no_mangle]
pub unsafe extern "C" fn risim_run(
    scenario: *const risim_scenario,
    experiment: i32,
    options: *const risim_run_options,
    out: *mut *mut risim_tables,
) -> risim_status {
    guarded(|| {
        if scenario.is_null() {
            return fail_null("scenario");
        }
        if out.is_null() {
            return fail_null("out");
        }
        let scenario = &(*scenario).inner;
        let opts = if options.is_null() {
            RunOptions::from_scenario(scenario)
        } else {
            match convert_options(&*options) {
                Ok(o) => o,
                Err(e) => return fail(e),
            }
        };
        let run = match experiment {
            e if e == risim_experiment::Acf as i32 => experiments::run_acf,
            e if e == risim_experiment::Ccf as i32 => experiments::run_ccf,
            e if e == risim_experiment::DsCdf as i32 => experiments::run_ds_cdf,
            e if e == risim_experiment::Pathloss as i32 => experiments::run_pathloss,
            other => {
                return fail(CoreError::arg(format!(
                    "unknown experiment {other}; use a risim_experiment value"
                )))
            }
        };
        let stamp = match experiments::run_stamp(scenario, &opts) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        match run(scenario, &opts) {
            Ok(tables) => {
                *out = Box::into_raw(Box::new(risim_tables { tables, stamp }));
                risim_status::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of tables in a result set; 0 for a null handle.
///
/// # Safety
/// `tables` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn risim_tables_count(tables: *const risim_tables) -> usize {
    if tables.is_null() {
        0
    } else {
        (*tables).tables.len()
    }
}

/// Name of table `index` (also its output file stem), for
/// `risim_string_free`.
///
/// # Safety
/// `tables` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn risim_tables_name(
    tables: *const risim_tables,
    index: usize,
    out: *mut *mut c_char,
) -> risim_status {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        match table_at(tables, index) {
            Ok(table) => give_string(&table.name, out),
            Err(status) => status,
        }
    })
}

/// Row and column counts of table `index`.
///
/// # Safety
/// `tables` must be a live handle; `rows` and `cols` must be valid
/// pointers.
#[no_mangle]
pub unsafe extern "C" fn risim_tables_dims(
    tables: *const risim_tables,
    index: usize,
    rows: *mut usize,
    cols: *mut usize,
) -> risim_status {
    guarded(|| {
        if rows.is_null() {
            return fail_null("rows");
        }
        if cols.is_null() {
            return fail_null("cols");
        }
        match table_at(tables, index) {
            Ok(table) => {
                *rows = table.rows.len();
                *cols = table.columns.len();
                risim_status::Ok
            }
            Err(status) => status,
        }
    })
}

/// Name of one column of one table, for `risim_string_free`.
///
/// # Safety
/// `tables` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn risim_tables_column_name(
    tables: *const risim_tables,
    index: usize,
    column: usize,
    out: *mut *mut c_char,
) -> risim_status {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        match table_at(tables, index) {
            Ok(table) => match table.columns.get(column) {
                Some(c) => give_string(&c.name, out),
                None => fail(CoreError::IndexOutOfRange(format!(
                    "column {column} of a {}-column table",
                    table.columns.len()
                ))),
            },
            Err(status) => status,
        }
    })
}

/// Unit of one column of one table (dimensionless columns report "1"),
/// for `risim_string_free`.
///
/// # Safety
/// `tables` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn risim_tables_column_unit(
    tables: *const risim_tables,
    index: usize,
    column: usize,
    out: *mut *mut c_char,
) -> risim_status {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        match table_at(tables, index) {
            Ok(table) => match table.columns.get(column) {
                Some(c) => give_string(&c.unit, out),
                None => fail(CoreError::IndexOutOfRange(format!(
                    "column {column} of a {}-column table",
                    table.columns.len()
                ))),
            },
            Err(status) => status,
        }
    })
}

/// Copy table `index` into `buffer` in row-major order.  `len` must be
/// exactly rows × cols (see `risim_tables_dims`).
///
/// # Safety
/// `tables` must be a live handle and `buffer` must point to at least
/// `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn risim_tables_copy_data(
    tables: *const risim_tables,
    index: usize,
    buffer: *mut f64,
    len: usize,
) -> risim_status {
    guarded(|| {
        if buffer.is_null() {
            return fail_null("buffer");
        }
        match table_at(tables, index) {
            Ok(table) => {
                let rows = table.rows.len();
                let cols = table.columns.len();
                if len != rows * cols {
                    return fail(CoreError::arg(format!(
                        "buffer holds {len} values but table {index} is {rows} x {cols}"
                    )));
                }
                let slice = std::slice::from_raw_parts_mut(buffer, len);
                for (r, row) in table.rows.iter().enumerate() {
                    slice[r * cols..(r + 1) * cols].copy_from_slice(row);
                }
                risim_status::Ok
            }
            Err(status) => status,
        }
    })
}

/// Write every table of the result set into directory `dir` (created if
/// missing), one self-describing text file per table, exactly as the
/// command-line tool does.
///
/// # Safety
/// `tables` must be a live handle and `dir` a valid NUL-terminated
/// UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn risim_tables_write(
    tables: *const risim_tables,
    dir: *const c_char,
) -> risim_status {
    guarded(|| {
        if tables.is_null() {
            return fail_null("tables");
        }
        let dir = match read_str(dir, "dir") {
            Ok(d) => d,
            Err(status) => return status,
        };
        let set = &*tables;
        match write_tables(&set.tables, dir, &set.stamp) {
            Ok(_) => risim_status::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Release a result set.  Null is accepted and ignored.
///
/// # Safety
/// `tables` must be null or a live handle, and must not be used after
/// this call.
#[no_mangle]
pub unsafe extern "C" fn risim_tables_free(tables: *mut risim_tables) {
    if !tables.is_null() {
        drop(Box::from_raw(tables));
    }
}

/// Release a string obtained from this library.  Null is accepted and
/// ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, and must not
/// be used after this call.
#[no_mangle]
pub unsafe extern "C" fn risim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
