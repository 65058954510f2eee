//! C ABI over the `regsched` simulator.
//!
//! Configurations and results are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`RegschedStatus`]; on failure a description is available from
//! [`regsched_last_error`] on the same thread until the next failing call.
//! Panics never cross the boundary; they are reported as
//! [`RegschedStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use regsched::cli::{self, CliError};
use regsched::engine::{self, ExperimentStats, Summary};
use regsched::model::{validate_config, SimConfig};
use regsched::stats::Estimate;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegschedStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Invalid = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Opaque simulation configuration.
pub struct RegschedConfig {
    inner: SimConfig,
}

/// Opaque experiment result.
pub struct RegschedStats {
    experiment: ExperimentStats,
    summary: Summary,
}

/// Mean across replications; `stderr` is NaN with one replication and both
/// are NaN when the quantity is undefined.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegschedEstimate {
    pub mean: f64,
    pub stderr: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegschedLinkSummary {
    pub mean_q: RegschedEstimate,
    pub std_q: RegschedEstimate,
    pub mean_t: RegschedEstimate,
    pub e_i: RegschedEstimate,
    pub e_i2: RegschedEstimate,
    pub norm_i2: RegschedEstimate,
    pub var_i: RegschedEstimate,
    pub p_service: RegschedEstimate,
    pub mean_unused: RegschedEstimate,
    pub mean_departed: RegschedEstimate,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegschedAggregate {
    pub replications: usize,
    pub num_links: usize,
    pub total_mean_q: RegschedEstimate,
    pub sum_alpha_mean_q: RegschedEstimate,
    pub sum_mean_t: RegschedEstimate,
    pub total_mean_unused: RegschedEstimate,
    pub regularity_metric: RegschedEstimate,
    pub weighted_norm_i2: RegschedEstimate,
    pub lemma1_residual_max: RegschedEstimate,
    pub lemma2_r1: RegschedEstimate,
    pub lemma2_r2: RegschedEstimate,
}

/// Analytic quantities; NaN where undefined (see the CLI `bounds` command).
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegschedBounds {
    pub additive_eps: f64,
    pub multiplicative_eps: f64,
    pub drift_constant: f64,
    pub queue_bound: f64,
    pub lower_bound: f64,
    pub upper_bound_conservative: f64,
    /// NaN unless all arrival rates are equal.
    pub symmetric_threshold: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RegschedStatus, String);

impl From<regsched::Error> for Failure {
    fn from(e: regsched::Error) -> Self {
        Failure(RegschedStatus::Invalid, e.to_string())
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e {
            CliError::Io { .. } => RegschedStatus::Io,
            CliError::Parse { .. } => RegschedStatus::Parse,
            CliError::Invalid(_) => RegschedStatus::Invalid,
            CliError::OutOfRegion => RegschedStatus::OutOfRange,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RegschedStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RegschedStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            RegschedStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(RegschedStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(RegschedStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn mut_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn estimate(e: Estimate) -> RegschedEstimate {
    RegschedEstimate {
        mean: e.mean,
        stderr: e.stderr.unwrap_or(f64::NAN),
    }
}

fn estimate_opt(e: Option<Estimate>) -> RegschedEstimate {
    e.map(estimate).unwrap_or(RegschedEstimate {
        mean: f64::NAN,
        stderr: f64::NAN,
    })
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn regsched_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses and validates a TOML configuration.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regsched_config_parse(text: *const c_char, out: *mut *mut RegschedConfig) -> RegschedStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        let inner = cli::parse_config_str(text, Path::new("<memory>"))?;
        *out = Box::into_raw(Box::new(RegschedConfig { inner }));
        Ok(())
    })
}

/// Reads, parses and validates a TOML configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regsched_config_load(path: *const c_char, out: *mut *mut RegschedConfig) -> RegschedStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let inner = cli::parse_config(Path::new(path))?;
        *out = Box::into_raw(Box::new(RegschedConfig { inner }));
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn regsched_config_free(config: *mut RegschedConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regsched_config_num_links(config: *const RegschedConfig, out: *mut usize) -> RegschedStatus {
    guard(|| {
        *mut_arg(out, "out")? = ref_arg(config, "config")?.inner.num_links();
        Ok(())
    })
}

/// Replaces the run parameters. The handle is unchanged on failure.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn regsched_config_set_run(
    config: *mut RegschedConfig,
    horizon: u64,
    warmup: u64,
    seed: u64,
    replications: usize,
) -> RegschedStatus {
    guard(|| {
        let config = mut_arg(config, "config")?;
        let mut next = config.inner.clone();
        next.run.horizon = horizon;
        next.run.warmup = warmup;
        next.run.seed = seed;
        next.run.replications = replications;
        config.inner = validate_config(&next)?;
        Ok(())
    })
}

/// Replaces the policy's gamma. The handle is unchanged on failure.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn regsched_config_set_gamma(config: *mut RegschedConfig, gamma: f64) -> RegschedStatus {
    guard(|| {
        let config = mut_arg(config, "config")?;
        let mut next = config.inner.clone();
        next.policy.gamma = gamma;
        config.inner = validate_config(&next)?;
        Ok(())
    })
}

/// Computes capacity margins and analytic bounds.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regsched_bounds(config: *const RegschedConfig, out: *mut RegschedBounds) -> RegschedStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        let r = engine::bounds_report(&ref_arg(config, "config")?.inner)?;
        *out = RegschedBounds {
            additive_eps: r.margin.additive_eps,
            multiplicative_eps: r.margin.multiplicative_eps,
            drift_constant: r.drift_constant,
            queue_bound: r.queue_bound,
            lower_bound: r.lower_bound,
            upper_bound_conservative: r.upper_bound_conservative,
            symmetric_threshold: r.symmetric_threshold.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Runs all replications on at most `jobs` threads (0 = one per core).
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regsched_run(
    config: *const RegschedConfig,
    jobs: usize,
    out: *mut *mut RegschedStats,
) -> RegschedStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        let experiment = engine::run_experiment(&ref_arg(config, "config")?.inner, jobs)?;
        let summary = experiment.summary();
        *out = Box::into_raw(Box::new(RegschedStats { experiment, summary }));
        Ok(())
    })
}

/// # Safety
/// `stats` must be null or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn regsched_stats_free(stats: *mut RegschedStats) {
    if !stats.is_null() {
        drop(Box::from_raw(stats));
    }
}

/// # Safety
/// `stats` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regsched_stats_link(
    stats: *const RegschedStats,
    link: usize,
    out: *mut RegschedLinkSummary,
) -> RegschedStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        let links = &ref_arg(stats, "stats")?.summary.links;
        let l = links.get(link).ok_or_else(|| {
            Failure(
                RegschedStatus::OutOfRange,
                format!("link {link} out of range for {} links", links.len()),
            )
        })?;
        *out = RegschedLinkSummary {
            mean_q: estimate(l.mean_q),
            std_q: estimate(l.std_q),
            mean_t: estimate(l.mean_t),
            e_i: estimate_opt(l.e_i),
            e_i2: estimate_opt(l.e_i2),
            norm_i2: estimate_opt(l.norm_i2),
            var_i: estimate_opt(l.var_i),
            p_service: estimate(l.p_service),
            mean_unused: estimate(l.mean_unused),
            mean_departed: estimate(l.mean_departed),
        };
        Ok(())
    })
}

/// # Safety
/// `stats` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regsched_stats_aggregate(stats: *const RegschedStats, out: *mut RegschedAggregate) -> RegschedStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        let stats = ref_arg(stats, "stats")?;
        let s = &stats.summary;
        *out = RegschedAggregate {
            replications: stats.experiment.replications(),
            num_links: s.links.len(),
            total_mean_q: estimate(s.total_mean_q),
            sum_alpha_mean_q: estimate(s.sum_alpha_mean_q),
            sum_mean_t: estimate(s.sum_mean_t),
            total_mean_unused: estimate(s.total_mean_unused),
            regularity_metric: estimate(s.regularity_metric),
            weighted_norm_i2: estimate_opt(s.weighted_norm_i2),
            lemma1_residual_max: estimate_opt(s.lemma1_residual_max),
            lemma2_r1: estimate(s.lemma2_r1),
            lemma2_r2: estimate(s.lemma2_r2),
        };
        Ok(())
    })
}

/// Renders the result in the CLI `run` CSV format. Release the string with
/// [`regsched_string_free`].
///
/// # Safety
/// `stats` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regsched_stats_to_csv(stats: *const RegschedStats, out: *mut *mut c_char) -> RegschedStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        let csv = cli::run_csv(&ref_arg(stats, "stats")?.experiment);
        *out = CString::new(csv).expect("csv has no NUL bytes").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn regsched_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
