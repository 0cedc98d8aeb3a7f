//! C ABI over the `skewinfo` library.
//!
//! Distributions are opaque handles created by `skewinfo_spec_*` and
//! released with `skewinfo_spec_free`. Every fallible call returns a
//! `SkewinfoStatus`; on failure `skewinfo_last_error` describes the cause
//! for the calling thread. Seeded estimates match the `skewinfo` command
//! line tool bit for bit.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nalgebra::{DMatrix, DVector};
use skewinfo::entropy::{entropy, McEstimate};
use skewinfo::information::{kl_lcfusn_vs_lsn, mutual_information_of, Direction, LsnSpec};
use skewinfo::oracle::{entropy_quadrature, QuadratureConfig};
use skewinfo::specfile::{load_spec, parse_spec};
use skewinfo::{DistributionSpec, Error, LogDensity, Partition, SeedStream};

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewinfoStatus {
    Ok = 0,
    NullPointer = 1,
    /// Invalid parameters, dimensions, or unparsable input.
    InvalidInput = 2,
    /// A numerical routine failed to converge.
    Numerical = 3,
    /// A Rust panic was caught at the boundary.
    Panic = 4,
}

/// Opaque distribution handle.
pub struct SkewinfoSpec(DistributionSpec);

/// Opaque multivariate log-skew-normal handle.
pub struct SkewinfoLsn(LsnSpec);

/// A Monte Carlo estimate in nats.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SkewinfoEstimate {
    pub value: f64,
    pub std_error: f64,
    pub closed_form_part: f64,
    pub mc_part: f64,
    pub bias_bound: f64,
    pub n_samples: u64,
}

impl From<McEstimate> for SkewinfoEstimate {
    fn from(e: McEstimate) -> Self {
        SkewinfoEstimate {
            value: e.value,
            std_error: e.std_error,
            closed_form_part: e.closed_form_part,
            mc_part: e.mc_part,
            bias_bound: e.bias_bound,
            n_samples: e.n_samples as u64,
        }
    }
}

pub const SKEWINFO_DIRECTION_Z_TO_Y: c_int = 0;
pub const SKEWINFO_DIRECTION_Y_TO_Z: c_int = 1;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn guard<F: FnOnce() -> Outcome>(f: F) -> SkewinfoStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkewinfoStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            SkewinfoStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            if e.is_input_error() {
                SkewinfoStatus::InvalidInput
            } else {
                SkewinfoStatus::Numerical
            }
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SkewinfoStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &'static str) -> std::result::Result<(), Failure> {
    if p.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null or point to `len` readable doubles.
unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> std::result::Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, what)?;
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or a NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &'static str) -> std::result::Result<&'a str, Failure> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::Parse(format!("{what} is not valid UTF-8"))))
}

fn boxed_spec(spec: DistributionSpec, out: *mut *mut SkewinfoSpec) {
    // SAFETY: callers check `out` before building the spec.
    unsafe { *out = Box::into_raw(Box::new(SkewinfoSpec(spec))) };
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn skewinfo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn skewinfo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON distribution description. Relative CSV paths are
/// resolved against the current directory.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_spec_from_json(json: *const c_char, out: *mut *mut SkewinfoSpec) -> SkewinfoStatus {
    guard(|| {
        non_null(out, "out")?;
        let json = text(json, "json")?;
        boxed_spec(parse_spec(json, Path::new("."), "<json>")?, out);
        Ok(())
    })
}

/// Loads a JSON distribution file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_spec_load(path: *const c_char, out: *mut *mut SkewinfoSpec) -> SkewinfoStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = text(path, "path")?;
        boxed_spec(load_spec(Path::new(path))?, out);
        Ok(())
    })
}

/// Univariate family. `family`: 0 Normal, 1 Log-Normal, 2 Skew-Normal,
/// 3 Log-Skew-Normal. `sigma` is the scale; `alpha` is ignored for the
/// normal kernels.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_spec_univariate(
    family: c_int,
    mu: f64,
    sigma: f64,
    alpha: f64,
    out: *mut *mut SkewinfoSpec,
) -> SkewinfoStatus {
    guard(|| {
        non_null(out, "out")?;
        let spec = match family {
            0 => DistributionSpec::normal(mu, sigma)?,
            1 => DistributionSpec::log_normal(mu, sigma)?,
            2 => DistributionSpec::skew_normal(mu, sigma, alpha)?,
            3 => DistributionSpec::log_skew_normal(mu, sigma, alpha)?,
            other => return Err(Error::InvalidParameter(format!("unknown univariate family code {other}")).into()),
        };
        boxed_spec(spec, out);
        Ok(())
    })
}

/// CFUSN (`log_family == 0`) or LCFUSN law. `mu` has `n` entries, `sigma`
/// is `n x n` and `delta` is `n x m`, both row-major.
///
/// # Safety
/// Pointers must reference arrays of the stated sizes; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_spec_cfusn(
    n: usize,
    m: usize,
    mu: *const f64,
    sigma: *const f64,
    delta: *const f64,
    log_family: c_int,
    out: *mut *mut SkewinfoSpec,
) -> SkewinfoStatus {
    guard(|| {
        non_null(out, "out")?;
        let mu = DVector::from_column_slice(slice(mu, n, "mu")?);
        let sigma = DMatrix::from_row_slice(n, n, slice(sigma, n * n, "sigma")?);
        let delta = DMatrix::from_row_slice(n, m, slice(delta, n * m, "delta")?);
        let spec = if log_family == 0 {
            DistributionSpec::cfusn(mu, sigma, delta)?
        } else {
            DistributionSpec::lcfusn(mu, sigma, delta)?
        };
        boxed_spec(spec, out);
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `spec` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_spec_free(spec: *mut SkewinfoSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Dimension `n` and skewing dimension `m` of a distribution.
///
/// # Safety
/// `spec` must be a live handle; `n` and `m` writable.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_spec_dims(spec: *const SkewinfoSpec, n: *mut usize, m: *mut usize) -> SkewinfoStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(n, "n")?;
        non_null(m, "m")?;
        *n = (*spec).0.dim();
        *m = (*spec).0.skew_dim();
        Ok(())
    })
}

/// Natural log of the density at `x` (length `len`).
///
/// # Safety
/// `spec` must be a live handle, `x` must hold `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_log_pdf(
    spec: *const SkewinfoSpec,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> SkewinfoStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(out, "out")?;
        *out = (*spec).0.log_pdf(slice(x, len, "x")?)?;
        Ok(())
    })
}

/// Shannon entropy in nats: exact for normal kernels, Monte Carlo with
/// `n_samples` draws otherwise.
///
/// # Safety
/// `spec` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_entropy(
    spec: *const SkewinfoSpec,
    seed: u64,
    n_samples: usize,
    out: *mut SkewinfoEstimate,
) -> SkewinfoStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(out, "out")?;
        let stream = SeedStream::with_domain(seed, "entropy");
        *out = entropy(&(*spec).0, &stream, n_samples)?.into();
        Ok(())
    })
}

/// Entropy by deterministic quadrature (dimension 1 or 2).
///
/// # Safety
/// `spec` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_entropy_quadrature(spec: *const SkewinfoSpec, out: *mut f64) -> SkewinfoStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(out, "out")?;
        *out = entropy_quadrature(&(*spec).0, &QuadratureConfig::default())?;
        Ok(())
    })
}

/// Mutual information between the first `n1` coordinates and the rest of
/// a canonical CFUSN / LCFUSN vector.
///
/// # Safety
/// `spec` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_mutual_information(
    spec: *const SkewinfoSpec,
    n1: usize,
    seed: u64,
    n_samples: usize,
    out: *mut SkewinfoEstimate,
) -> SkewinfoStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(out, "out")?;
        let s = &(*spec).0;
        let n = s.dim();
        if n1 == 0 || n1 >= n {
            return Err(Error::InvalidPartition(format!("leading block size must lie in 1..{n}, got {n1}")).into());
        }
        let part = Partition::new(n1, n - n1)?;
        let stream = SeedStream::with_domain(seed, "mutinfo");
        *out = mutual_information_of(s, &part, &stream, n_samples)?.into();
        Ok(())
    })
}

/// Multivariate LSN law; `sigma` is `n x n` row-major.
///
/// # Safety
/// Pointers must reference arrays of the stated sizes; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_lsn_new(
    n: usize,
    mu: *const f64,
    sigma: *const f64,
    alpha: *const f64,
    out: *mut *mut SkewinfoLsn,
) -> SkewinfoStatus {
    guard(|| {
        non_null(out, "out")?;
        let mu = DVector::from_column_slice(slice(mu, n, "mu")?);
        let sigma = DMatrix::from_row_slice(n, n, slice(sigma, n * n, "sigma")?);
        let alpha = DVector::from_column_slice(slice(alpha, n, "alpha")?);
        *out = Box::into_raw(Box::new(SkewinfoLsn(LsnSpec::new(mu, sigma, alpha)?)));
        Ok(())
    })
}

/// Releases an LSN handle. NULL is ignored.
///
/// # Safety
/// `lsn` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_lsn_free(lsn: *mut SkewinfoLsn) {
    if !lsn.is_null() {
        drop(Box::from_raw(lsn));
    }
}

/// Divergence between an LCFUSN law and an LSN law sharing `(mu, Sigma)`.
/// `direction` is `SKEWINFO_DIRECTION_Z_TO_Y` for `D(LCFUSN || LSN)` or
/// `SKEWINFO_DIRECTION_Y_TO_Z` for the reverse.
///
/// # Safety
/// `spec` and `lsn` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewinfo_kl(
    spec: *const SkewinfoSpec,
    lsn: *const SkewinfoLsn,
    direction: c_int,
    seed: u64,
    n_samples: usize,
    out: *mut SkewinfoEstimate,
) -> SkewinfoStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(lsn, "lsn")?;
        non_null(out, "out")?;
        let dir = match direction {
            SKEWINFO_DIRECTION_Z_TO_Y => Direction::ZToY,
            SKEWINFO_DIRECTION_Y_TO_Z => Direction::YToZ,
            other => return Err(Error::InvalidParameter(format!("unknown direction {other}")).into()),
        };
        let stream = SeedStream::with_domain(seed, "kl");
        *out = kl_lcfusn_vs_lsn(&(*spec).0, &(*lsn).0, dir, &stream, n_samples)?.into();
        Ok(())
    })
}
