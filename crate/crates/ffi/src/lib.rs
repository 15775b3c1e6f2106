//! C interface to `trigdisc`.
//!
//! Objects are opaque heap handles released with the matching `*_free`.
//! Every fallible call returns a [`TdStatus`]; on failure the message is
//! kept per thread and can be read with [`td_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use num_complex::Complex64;
use trigdisc::grids::full_grid;
use trigdisc::indexset::{box_set, hyperbolic_cross};
use trigdisc::korobov::{cubature_exactness, exact_discretization};
use trigdisc::montecarlo::{certify_l2_constants, random_nodes};
use trigdisc::polynomial::{lq_norm, random_polynomial, Ensemble, NormSpec};
use trigdisc::sparsify::bss_ratio_bound;
use trigdisc::{Error, IndexSet, PointSet, TrigPolynomial};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SpectrumViolation = 4,
    ZeroPolynomial = 5,
    Uncertified = 6,
    CapExceeded = 7,
    Numerical = 8,
    Parse = 9,
    Io = 10,
    Panic = 11,
}

/// Finite set of integer frequency vectors.
pub struct TdIndexSet(IndexSet);

/// Weighted nodes on the torus.
pub struct TdPointSet(PointSet);

/// Trigonometric polynomial with complex coefficients.
pub struct TdPolynomial(TrigPolynomial);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TdStatus {
    match e {
        Error::ZeroDimension | Error::InvalidArgument(_) => TdStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => TdStatus::DimensionMismatch,
        Error::SpectrumViolation(_) => TdStatus::SpectrumViolation,
        Error::ZeroPolynomial(_) => TdStatus::ZeroPolynomial,
        Error::Uncertified(_) | Error::NoGenerator { .. } => TdStatus::Uncertified,
        Error::CapExceeded { .. } => TdStatus::CapExceeded,
        Error::NotTightFrame { .. } | Error::BarrierStall { .. } | Error::EigenResidual { .. } => {
            TdStatus::Numerical
        }
        Error::Parse { .. } => TdStatus::Parse,
        Error::Io(_) => TdStatus::Io,
    }
}

fn fail(status: TdStatus, msg: impl Into<String>) -> TdStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), TdStatus>>(f: F) -> TdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TdStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(TdStatus::Panic, "internal panic"),
    }
}

fn check<T>(r: trigdisc::Result<T>) -> Result<T, TdStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, TdStatus> {
    p.as_ref()
        .ok_or_else(|| fail(TdStatus::NullPointer, "null handle"))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), TdStatus> {
    if out.is_null() {
        return Err(fail(TdStatus::NullPointer, "null output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn slice_in<'a, T>(p: *const T, len: usize) -> Result<&'a [T], TdStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(TdStatus::NullPointer, "null array"));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(p: *mut T, v: T) -> Result<(), TdStatus> {
    if p.is_null() {
        return Err(fail(TdStatus::NullPointer, "null output pointer"));
    }
    *p = v;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn td_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length
/// without the terminator, or 0 if there is none.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn td_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Step hyperbolic cross `Q_n` in dimension `d`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_indexset_hyperbolic(
    n: u32,
    d: usize,
    out: *mut *mut TdIndexSet,
) -> TdStatus {
    guard(|| store(out, TdIndexSet(check(hyperbolic_cross(n, d))?)))
}

/// Box `Π(N)` with half-widths `n[0..d]`.
///
/// # Safety
/// `n` must point to `d` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn td_indexset_box(
    n: *const u32,
    d: usize,
    out: *mut *mut TdIndexSet,
) -> TdStatus {
    guard(|| {
        let n = slice_in(n, d)?;
        store(out, TdIndexSet(check(box_set(n))?))
    })
}

/// Set from `count` vectors stored row-major in `data` (`count·d` values).
///
/// # Safety
/// `data` must point to `count·d` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn td_indexset_from_vectors(
    d: usize,
    data: *const i64,
    count: usize,
    out: *mut *mut TdIndexSet,
) -> TdStatus {
    guard(|| {
        if d == 0 {
            return Err(fail(
                TdStatus::InvalidArgument,
                "dimension must be at least 1",
            ));
        }
        let len = count
            .checked_mul(d)
            .ok_or_else(|| fail(TdStatus::InvalidArgument, "size overflow"))?;
        let data = slice_in(data, len)?;
        store(
            out,
            TdIndexSet(check(IndexSet::new(d, data.chunks_exact(d)))?),
        )
    })
}

/// Difference set `{m − k : m, k ∈ set}`.
///
/// # Safety
/// `set` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn td_indexset_difference(
    set: *const TdIndexSet,
    out: *mut *mut TdIndexSet,
) -> TdStatus {
    guard(|| store(out, TdIndexSet(borrow(set)?.0.difference_set())))
}

/// Number of vectors; 0 for a null handle.
///
/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn td_indexset_len(set: *const TdIndexSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// Dimension; 0 for a null handle.
///
/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn td_indexset_dim(set: *const TdIndexSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.dim())
}

/// Copies vector `i` (canonical order) into `out[0..dim]`.
///
/// # Safety
/// `set` must be a live handle; `out` must hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn td_indexset_get(
    set: *const TdIndexSet,
    i: usize,
    out: *mut i64,
) -> TdStatus {
    guard(|| {
        let s = &borrow(set)?.0;
        if i >= s.len() {
            return Err(fail(
                TdStatus::InvalidArgument,
                format!("index {i} out of range"),
            ));
        }
        if out.is_null() {
            return Err(fail(TdStatus::NullPointer, "null output pointer"));
        }
        ptr::copy_nonoverlapping(s.get(i).as_ptr(), out, s.dim());
        Ok(())
    })
}

/// # Safety
/// `set` must be a handle from this library or null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn td_indexset_free(set: *mut TdIndexSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Korobov node set exact for `L₂` on `set`; writes the prime and generator.
///
/// # Safety
/// `set` must be a live handle; the output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn td_pointset_korobov(
    set: *const TdIndexSet,
    out: *mut *mut TdPointSet,
    p: *mut u64,
    a: *mut u64,
) -> TdStatus {
    guard(|| {
        let (params, nodes) = check(exact_discretization(&borrow(set)?.0))?;
        write_out(p, params.p)?;
        write_out(a, params.a)?;
        store(out, TdPointSet(nodes))
    })
}

/// Full tensor grid with `2N_j + 1` points per axis.
///
/// # Safety
/// `n` must point to `d` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn td_pointset_full_grid(
    n: *const u32,
    d: usize,
    out: *mut *mut TdPointSet,
) -> TdStatus {
    guard(|| {
        let n = slice_in(n, d)?;
        store(out, TdPointSet(check(full_grid(n))?))
    })
}

/// `m` i.i.d. uniform nodes with equal weights.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn td_pointset_random(
    m: usize,
    d: usize,
    seed: u64,
    out: *mut *mut TdPointSet,
) -> TdStatus {
    guard(|| store(out, TdPointSet(check(random_nodes(m, d, seed))?)))
}

/// # Safety
/// `ps` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn td_pointset_len(ps: *const TdPointSet) -> usize {
    ps.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `ps` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn td_pointset_dim(ps: *const TdPointSet) -> usize {
    ps.as_ref().map_or(0, |s| s.0.dim())
}

/// Copies node `i` into `x[0..dim]` and its weight into `w`.
///
/// # Safety
/// `ps` must be a live handle; `x` must hold `dim` values; `w` may be null.
#[no_mangle]
pub unsafe extern "C" fn td_pointset_node(
    ps: *const TdPointSet,
    i: usize,
    x: *mut f64,
    w: *mut f64,
) -> TdStatus {
    guard(|| {
        let s = &borrow(ps)?.0;
        if i >= s.len() {
            return Err(fail(
                TdStatus::InvalidArgument,
                format!("index {i} out of range"),
            ));
        }
        if x.is_null() {
            return Err(fail(TdStatus::NullPointer, "null output pointer"));
        }
        ptr::copy_nonoverlapping(s.node(i).as_ptr(), x, s.dim());
        if !w.is_null() {
            *w = s.weights()[i];
        }
        Ok(())
    })
}

/// # Safety
/// `ps` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn td_pointset_free(ps: *mut TdPointSet) {
    if !ps.is_null() {
        drop(Box::from_raw(ps));
    }
}

/// Extreme eigenvalues of the weighted Gram matrix of `set` at `ps`.
///
/// # Safety
/// Handles must be live; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn td_certify_l2(
    set: *const TdIndexSet,
    ps: *const TdPointSet,
    lower: *mut f64,
    upper: *mut f64,
) -> TdStatus {
    guard(|| {
        let c = check(certify_l2_constants(&borrow(set)?.0, &borrow(ps)?.0))?;
        write_out(lower, c.lower)?;
        write_out(upper, c.upper)
    })
}

/// `max_{m ∈ lambda} |Σ w_ν e^{i⟨m,ξ^ν⟩} − δ_{m,0}|`.
///
/// # Safety
/// Handles must be live; `defect` must be valid.
#[no_mangle]
pub unsafe extern "C" fn td_cubature_defect(
    lambda: *const TdIndexSet,
    ps: *const TdPointSet,
    defect: *mut f64,
) -> TdStatus {
    guard(|| {
        write_out(
            defect,
            check(cubature_exactness(&borrow(lambda)?.0, &borrow(ps)?.0))?,
        )
    })
}

/// Polynomial with the given coefficients on the canonical order of `set`.
///
/// # Safety
/// `re` and `im` must hold `len(set)` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn td_polynomial_from_coeffs(
    set: *const TdIndexSet,
    re: *const f64,
    im: *const f64,
    out: *mut *mut TdPolynomial,
) -> TdStatus {
    guard(|| {
        let s = &borrow(set)?.0;
        let re = slice_in(re, s.len())?;
        let im = slice_in(im, s.len())?;
        let coeffs = re
            .iter()
            .zip(im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        store(
            out,
            TdPolynomial(check(TrigPolynomial::from_coeffs(s.clone(), coeffs))?),
        )
    })
}

/// Complex Gaussian coefficients on `set`.
///
/// # Safety
/// `set` must be live; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn td_polynomial_random(
    set: *const TdIndexSet,
    seed: u64,
    out: *mut *mut TdPolynomial,
) -> TdStatus {
    guard(|| {
        let t = check(random_polynomial(
            &borrow(set)?.0,
            seed,
            Ensemble::GaussianCoeffs,
            false,
        ))?;
        store(out, TdPolynomial(t))
    })
}

/// Value at `x[0..dim]`.
///
/// # Safety
/// `poly` must be live; `x` must hold `dim` values; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn td_polynomial_evaluate(
    poly: *const TdPolynomial,
    x: *const f64,
    re: *mut f64,
    im: *mut f64,
) -> TdStatus {
    guard(|| {
        let t = &borrow(poly)?.0;
        let v = check(t.evaluate(slice_in(x, t.dim())?))?;
        write_out(re, v.re)?;
        write_out(im, v.im)
    })
}

/// `‖t‖_q` for `1 ≤ q < ∞`, or the sup norm for `q = +∞`.
///
/// # Safety
/// `poly` must be live; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn td_polynomial_lq_norm(
    poly: *const TdPolynomial,
    q: f64,
    out: *mut f64,
) -> TdStatus {
    guard(|| {
        let t = &borrow(poly)?.0;
        let spec = if q == f64::INFINITY {
            NormSpec::inf()
        } else {
            check(NormSpec::q(q))?
        };
        write_out(out, check(lq_norm(t, spec))?)
    })
}

/// # Safety
/// `poly` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn td_polynomial_free(poly: *mut TdPolynomial) {
    if !poly.is_null() {
        drop(Box::from_raw(poly));
    }
}

/// `(d + 1 + 2√d)/(d + 1 − 2√d)`.
#[no_mangle]
pub extern "C" fn td_bss_ratio_bound(oversample: f64) -> f64 {
    bss_ratio_bound(oversample)
}
