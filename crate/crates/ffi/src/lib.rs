//! C ABI for `intval`.
//!
//! Every function returns an [`IvpStatus`]. On failure a one-line message is
//! available from [`ivp_last_error_message`] on the same thread. Strings
//! handed out by the library are freed with [`ivp_string_free`]; artifacts
//! with [`ivp_artifact_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use intval::construct::{construct_prescribed, construct_transfer, Artifact, TransferOptions};
use intval::design::{DesignOptions, LengthSpec};
use intval::poly::{fixed_divisor, RationalPoly};
use intval::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IvpStatus {
    Ok = 0,
    InvalidArgument = 1,
    Parse = 2,
    NotPrime = 3,
    Io = 4,
    Json = 5,
    /// The computation could not be completed, for example because a
    /// search limit was reached.
    Computation = 6,
    /// `ivp_artifact_verify` found failing checks.
    VerificationFailed = 7,
    NullPointer = 8,
    Utf8 = 9,
    Panic = 10,
}

/// A constructed or loaded artifact.
pub struct IvpArtifact {
    inner: Artifact,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> IvpStatus {
    match e {
        Error::InvalidArgument(_) => IvpStatus::InvalidArgument,
        Error::Parse { .. } => IvpStatus::Parse,
        Error::NotPrime(_) => IvpStatus::NotPrime,
        Error::Io(_) => IvpStatus::Io,
        Error::Json(_) => IvpStatus::Json,
        _ => IvpStatus::Computation,
    }
}

struct Fail(IvpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<IvpStatus, Fail>) -> IvpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(s)) => {
            if s == IvpStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            s
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            IvpStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail(IvpStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(IvpStatus::Utf8, "argument is not valid UTF-8".into()))
}

fn check_out<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        Err(Fail(IvpStatus::NullPointer, "null output pointer".into()))
    } else {
        Ok(())
    }
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(IvpStatus::Utf8, "output contains a NUL byte".into()))
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// owned by the library and valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn ivp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ivp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Fixed divisor of a polynomial in text form, e.g. "[0,-1,1]", written as
/// a decimal string to `*out`.
///
/// # Safety
/// `poly` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ivp_fixed_divisor(poly: *const c_char, out: *mut *mut c_char) -> IvpStatus {
    guard(|| {
        check_out(out)?;
        let g: RationalPoly = read_str(poly)?.parse()?;
        let d = if g.den() == &1.into() {
            fixed_divisor(g.num())?
        } else {
            g.fixed_divisor()?
        };
        *out = into_c_string(d.to_string())?;
        Ok(IvpStatus::Ok)
    })
}

/// Whether "[c0,..]/den" is integer-valued.
///
/// # Safety
/// `poly` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ivp_is_member(poly: *const c_char, out: *mut bool) -> IvpStatus {
    guard(|| {
        check_out(out)?;
        let g: RationalPoly = read_str(poly)?.parse()?;
        *out = g.is_int_valued();
        Ok(IvpStatus::Ok)
    })
}

/// Builds an element of Int(Z) whose set of factorization lengths is
/// `lengths[0..count]` (each at least 2). `prime` selects the prime of the
/// design; pass 0 for the default.
///
/// # Safety
/// `lengths` must point to `count` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ivp_construct_lengths(
    lengths: *const u32,
    count: usize,
    prime: u64,
    out: *mut *mut IvpArtifact,
) -> IvpStatus {
    guard(|| {
        check_out(out)?;
        if lengths.is_null() && count > 0 {
            return Err(Fail(IvpStatus::NullPointer, "null lengths array".into()));
        }
        let ks = if count == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(lengths, count)
        };
        let spec = LengthSpec::from_lengths(ks)?;
        let opts = DesignOptions {
            prime: (prime != 0).then_some(prime),
            c_extra: Vec::new(),
        };
        let a = construct_prescribed(&spec, &opts)?;
        *out = Box::into_raw(Box::new(IvpArtifact {
            inner: Artifact::Prescribed(a),
        }));
        Ok(IvpStatus::Ok)
    })
}

/// Builds the transfer witness for `n`. `primes` may be NULL for the first
/// `n` odd primes, or point to `n` distinct odd primes.
///
/// # Safety
/// `primes` must be NULL or point to `n` readable values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ivp_construct_transfer(
    n: u32,
    primes: *const u64,
    out: *mut *mut IvpArtifact,
) -> IvpStatus {
    guard(|| {
        check_out(out)?;
        let opts = TransferOptions {
            primes: (!primes.is_null()).then(|| std::slice::from_raw_parts(primes, n as usize).to_vec()),
            c_extra: Vec::new(),
        };
        let t = construct_transfer(n, &opts)?;
        *out = Box::into_raw(Box::new(IvpArtifact {
            inner: Artifact::Transfer(t),
        }));
        Ok(IvpStatus::Ok)
    })
}

/// Parses an artifact from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ivp_artifact_from_json(json: *const c_char, out: *mut *mut IvpArtifact) -> IvpStatus {
    guard(|| {
        check_out(out)?;
        let inner = Artifact::from_json(read_str(json)?)?;
        *out = Box::into_raw(Box::new(IvpArtifact { inner }));
        Ok(IvpStatus::Ok)
    })
}

/// Serializes an artifact; free the result with `ivp_string_free`.
///
/// # Safety
/// `a` must be a live artifact; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ivp_artifact_to_json(a: *const IvpArtifact, out: *mut *mut c_char) -> IvpStatus {
    guard(|| {
        check_out(out)?;
        let a = artifact_ref(a)?;
        *out = into_c_string(a.inner.to_json()?)?;
        Ok(IvpStatus::Ok)
    })
}

/// Runs every check. Returns `IVP_STATUS_VERIFICATION_FAILED` if any check
/// fails; the number of failing checks goes to `*failed` when non-NULL.
///
/// # Safety
/// `a` must be a live artifact; `failed` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ivp_artifact_verify(a: *const IvpArtifact, failed: *mut usize) -> IvpStatus {
    guard(|| {
        let a = artifact_ref(a)?;
        let rep = a.inner.verify();
        let bad: Vec<String> = rep.failures().map(|c| c.name.clone()).collect();
        if !failed.is_null() {
            *failed = bad.len();
        }
        if bad.is_empty() {
            Ok(IvpStatus::Ok)
        } else {
            Err(Fail(
                IvpStatus::VerificationFailed,
                format!("failed checks: {}", bad.join(", ")),
            ))
        }
    })
}

/// Factorization lengths: one per factorization for a prescribed-lengths
/// artifact, the distinct lengths of x·H for a transfer artifact. Writes up
/// to `cap` values to `buf` and the total count to `*count`.
///
/// # Safety
/// `a` must be a live artifact; `buf` must hold `cap` values (or be NULL
/// with `cap == 0`); `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ivp_artifact_lengths(
    a: *const IvpArtifact,
    buf: *mut usize,
    cap: usize,
    count: *mut usize,
) -> IvpStatus {
    guard(|| {
        check_out(count)?;
        let a = artifact_ref(a)?;
        let lengths = match &a.inner {
            Artifact::Prescribed(p) => &p.lengths,
            Artifact::Transfer(t) => &t.xh_lengths,
        };
        *count = lengths.len();
        if !buf.is_null() {
            for (i, &l) in lengths.iter().take(cap).enumerate() {
                *buf.add(i) = l;
            }
        }
        Ok(IvpStatus::Ok)
    })
}

/// Degree of `H`.
///
/// # Safety
/// `a` must be a live artifact; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ivp_artifact_degree(a: *const IvpArtifact, out: *mut usize) -> IvpStatus {
    guard(|| {
        check_out(out)?;
        let a = artifact_ref(a)?;
        *out = match &a.inner {
            Artifact::Prescribed(p) => p.degree(),
            Artifact::Transfer(t) => t.h.degree().unwrap_or(0),
        };
        Ok(IvpStatus::Ok)
    })
}

/// Releases an artifact. NULL is ignored.
///
/// # Safety
/// `a` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ivp_artifact_free(a: *mut IvpArtifact) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

unsafe fn artifact_ref<'a>(a: *const IvpArtifact) -> Result<&'a IvpArtifact, Fail> {
    a.as_ref()
        .ok_or_else(|| Fail(IvpStatus::NullPointer, "null artifact".into()))
}
