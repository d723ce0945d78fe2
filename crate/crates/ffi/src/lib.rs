//! C bindings for `gamow`.
//!
//! Objects are opaque heap handles created by `gamow_*_new` and released by
//! the matching `gamow_*_free`. Every call returns a [`GamowStatus`]; on
//! failure the message is kept per thread and can be read back with
//! [`gamow_last_error_message`].
//!
//! Matrices are written row-major: element `k * dim + l` is the coefficient
//! of `|k><l|`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gamow::jordan::{evolution_matrix, hamiltonian_matrix, Normalization};
use gamow::smatrix::{
    self, BackgroundPhase, RationalTerm, RationalTestFunction, ResonancePole, SMatrixModel, TestFunctionPair,
};
use gamow::states::{self, StateOperator};
use gamow::{uniqueness, Error};
use num_complex::Complex64;

pub const GAMOW_NORMALIZATION_DERIVATIVE: u32 = 0;
pub const GAMOW_NORMALIZATION_FACTORIAL: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GamowComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for GamowComplex {
    fn from(z: Complex64) -> Self {
        GamowComplex { re: z.re, im: z.im }
    }
}

impl From<GamowComplex> for Complex64 {
    fn from(z: GamowComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GamowStatus {
    Ok = 0,
    NullPointer,
    InvalidParameter,
    PoleEvaluation,
    NoConvergence,
    IndexOutOfRange,
    NegativeTime,
    WrongRepresentation,
    EmptyGrid,
    ConfigInvalid,
    JTooLarge,
    Io,
    BufferTooSmall,
    Panic,
}

/// S-matrix model: pole, background phase and gauge flag.
pub struct GamowModel(SMatrixModel);

/// Test function `sum_j c_j / (w - i a_j)^m_j`.
pub struct GamowTestFunction(RationalTestFunction);

/// The `r`-dimensional span of the Gamow vectors of one pole.
pub struct GamowSubspace(gamow::jordan::GamowSubspace);

/// A state operator on the Gamow subspace.
pub struct GamowState(StateOperator);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GamowStatus {
    match e {
        Error::InvalidParameter(_) => GamowStatus::InvalidParameter,
        Error::PoleEvaluation { .. } => GamowStatus::PoleEvaluation,
        Error::NoConvergence { .. } => GamowStatus::NoConvergence,
        Error::IndexOutOfRange { .. } => GamowStatus::IndexOutOfRange,
        Error::NegativeTime(_) => GamowStatus::NegativeTime,
        Error::WrongRepresentation { .. } => GamowStatus::WrongRepresentation,
        Error::EmptyGrid => GamowStatus::EmptyGrid,
        Error::ConfigInvalid(_) => GamowStatus::ConfigInvalid,
        Error::JTooLarge { .. } => GamowStatus::JTooLarge,
        Error::Io(_) => GamowStatus::Io,
    }
}

struct Failure(GamowStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type FfiResult = Result<(), Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> GamowStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GamowStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            GamowStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(GamowStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T: Copy>(out: *mut T, len: usize, values: &[T]) -> FfiResult {
    if len < values.len() {
        return Err(Failure(
            GamowStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if values.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn write_one<T>(out: *mut T, value: T) -> FfiResult {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> FfiResult {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn matrix_values(m: &gamow::algebra::SquareMatrix<Complex64>) -> Vec<GamowComplex> {
    m.rows().flat_map(|row| row.iter().map(|&z| z.into())).collect()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the length needed including the NUL, or 0 if
/// the last call succeeded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gamow_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Creates a model. `gamma` holds the coefficients of the background phase
/// polynomial in ascending powers; `n_gamma == 0` means no background.
///
/// # Safety
/// `gamma` must point to `n_gamma` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gamow_model_new(
    energy: f64,
    width: f64,
    order: usize,
    gamma: *const f64,
    n_gamma: usize,
    absorb_gauge: bool,
    out: *mut *mut GamowModel,
) -> GamowStatus {
    guard(|| {
        let pole = ResonancePole::new(energy, width, order)?;
        let background = match slice(gamma, n_gamma, "gamma")? {
            [] => BackgroundPhase::Constant(0.0),
            [c] => BackgroundPhase::Constant(*c),
            many => BackgroundPhase::Polynomial(many.to_vec()),
        };
        let model = SMatrixModel::new(pole).with_background(background)?.with_absorb_gauge(absorb_gauge);
        write_handle(out, GamowModel(model))
    })
}

/// # Safety
/// `model` must be null or a handle from [`gamow_model_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn gamow_model_free(model: *mut GamowModel) {
    release(model);
}

/// `S(omega)` on the second sheet.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gamow_s_matrix_eval(
    model: *const GamowModel,
    omega: GamowComplex,
    out: *mut GamowComplex,
) -> GamowStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        write_one(out, smatrix::s_matrix_eval(m, omega.into())?.into())
    })
}

/// Partial-fraction coefficients `c_1..c_r` of the resonant factor.
///
/// # Safety
/// `model` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn gamow_pole_expansion_coeffs(
    model: *const GamowModel,
    out: *mut GamowComplex,
    len: usize,
) -> GamowStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let c: Vec<GamowComplex> = smatrix::pole_expansion_coeffs(m).into_iter().map(Into::into).collect();
        write_out(out, len, &c)
    })
}

/// Normalized `|1/(E - z_R)^(n+1)|^2` on `grid`.
///
/// # Safety
/// `model` must be a live handle; `grid` and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gamow_lineshape(
    model: *const GamowModel,
    n: usize,
    grid: *const f64,
    out: *mut f64,
    len: usize,
) -> GamowStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let values = smatrix::lineshape(m, n, slice(grid, len, "grid")?)?;
        write_out(out, len, &values)
    })
}

/// Builds `sum_j c[j] / (w - i a[j])^m[j]`.
///
/// # Safety
/// `a`, `m` and `c` must each hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gamow_test_function_new(
    a: *const f64,
    m: *const u32,
    c: *const GamowComplex,
    n: usize,
    out: *mut *mut GamowTestFunction,
) -> GamowStatus {
    guard(|| {
        let (a, m, c) = (slice(a, n, "a")?, slice(m, n, "m")?, slice(c, n, "c")?);
        let terms = (0..n)
            .map(|j| RationalTerm::new(a[j], m[j], c[j].into()))
            .collect::<gamow::Result<Vec<_>>>()?;
        write_handle(out, GamowTestFunction(RationalTestFunction::new(terms)))
    })
}

/// # Safety
/// `f` must be null or a handle from [`gamow_test_function_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn gamow_test_function_free(f: *mut GamowTestFunction) {
    release(f);
}

/// Pole term of `(psi(t), phi)`.
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gamow_pole_term(
    model: *const GamowModel,
    psi: *const GamowTestFunction,
    phi: *const GamowTestFunction,
    t: f64,
    out: *mut GamowComplex,
) -> GamowStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let pair = TestFunctionPair::new(deref(psi, "psi")?.0.clone(), deref(phi, "phi")?.0.clone());
        write_one(out, smatrix::pole_term_at(&pair, m, t)?.into())
    })
}

/// Gamow-vector expansion coefficients `b_0..b_{r-1}` of `phi`.
///
/// # Safety
/// Handles must be live; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn gamow_expansion_coeffs(
    model: *const GamowModel,
    phi: *const GamowTestFunction,
    out: *mut GamowComplex,
    len: usize,
) -> GamowStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let b = smatrix::expansion_coeffs(&deref(phi, "phi")?.0, m)?;
        let b: Vec<GamowComplex> = b.into_iter().map(Into::into).collect();
        write_out(out, len, &b)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gamow_subspace_new(
    energy: f64,
    width: f64,
    order: usize,
    normalization: u32,
    out: *mut *mut GamowSubspace,
) -> GamowStatus {
    guard(|| {
        let normalization = match normalization {
            GAMOW_NORMALIZATION_DERIVATIVE => Normalization::Derivative,
            GAMOW_NORMALIZATION_FACTORIAL => Normalization::Factorial,
            other => {
                return Err(Failure(GamowStatus::InvalidParameter, format!("unknown normalization {other}")));
            }
        };
        let space = gamow::jordan::GamowSubspace::new(ResonancePole::new(energy, width, order)?, normalization);
        write_handle(out, GamowSubspace(space))
    })
}

/// # Safety
/// `space` must be null or a handle from [`gamow_subspace_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn gamow_subspace_free(space: *mut GamowSubspace) {
    release(space);
}

/// Dimension `r`, or 0 for a null handle.
///
/// # Safety
/// `space` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn gamow_subspace_dim(space: *const GamowSubspace) -> usize {
    space.as_ref().map_or(0, |s| s.0.dim())
}

/// Hamiltonian on the subspace, `dim * dim` values.
///
/// # Safety
/// `space` must be live; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn gamow_hamiltonian(
    space: *const GamowSubspace,
    out: *mut GamowComplex,
    len: usize,
) -> GamowStatus {
    guard(|| {
        let s = &deref(space, "space")?.0;
        write_out(out, len, &matrix_values(&hamiltonian_matrix(s).matrix))
    })
}

/// Evolution `exp(-iHt)` for `t >= 0`, `dim * dim` values.
///
/// # Safety
/// `space` must be live; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn gamow_evolution(
    space: *const GamowSubspace,
    t: f64,
    out: *mut GamowComplex,
    len: usize,
) -> GamowStatus {
    guard(|| {
        let s = &deref(space, "space")?.0;
        write_out(out, len, &matrix_values(&evolution_matrix(s, t)?.matrix))
    })
}

/// `W^(n)`, the exponentially decaying operator of order `n < dim`.
///
/// # Safety
/// `space` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gamow_state_w_n(
    space: *const GamowSubspace,
    n: usize,
    out: *mut *mut GamowState,
) -> GamowStatus {
    guard(|| {
        let s = &deref(space, "space")?.0;
        write_handle(out, GamowState(states::w_n(s, n)?))
    })
}

/// `W`, the sum of all `W^(n)` scaled by `2 pi Gamma`.
///
/// # Safety
/// `space` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gamow_state_w_total(space: *const GamowSubspace, out: *mut *mut GamowState) -> GamowStatus {
    guard(|| {
        let s = &deref(space, "space")?.0;
        write_handle(out, GamowState(states::w_total(s)))
    })
}

/// The dyad `|k><l|`.
///
/// # Safety
/// `space` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gamow_state_dyad(
    space: *const GamowSubspace,
    k: usize,
    l: usize,
    out: *mut *mut GamowState,
) -> GamowStatus {
    guard(|| {
        let s = &deref(space, "space")?.0;
        write_handle(out, GamowState(states::dyad(s, k, l)?))
    })
}

/// # Safety
/// `state` must be null or a handle from a `gamow_state_*` constructor, freed once.
#[no_mangle]
pub unsafe extern "C" fn gamow_state_free(state: *mut GamowState) {
    release(state);
}

/// Matrix of the operator, `dim * dim` values.
///
/// # Safety
/// `state` must be live; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn gamow_state_matrix(
    state: *const GamowState,
    out: *mut GamowComplex,
    len: usize,
) -> GamowStatus {
    guard(|| write_out(out, len, &matrix_values(&deref(state, "state")?.0.matrix())))
}

/// Matrix of `W(t)` for `t >= 0`, `dim * dim` values.
///
/// # Safety
/// `state` must be live; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn gamow_state_evolve(
    state: *const GamowState,
    t: f64,
    out: *mut GamowComplex,
    len: usize,
) -> GamowStatus {
    guard(|| {
        let evolved = states::evolve_operator(&deref(state, "state")?.0, t)?;
        write_out(out, len, &matrix_values(&evolved.value()))
    })
}

/// Largest relative deviation of `W(t)` from `exp(-Gamma t) W` over `times`.
///
/// # Safety
/// `state` must be live; `times` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gamow_decay_deviation(
    state: *const GamowState,
    times: *const f64,
    n: usize,
    out: *mut f64,
) -> GamowStatus {
    guard(|| {
        let d = states::decay_deviation(&deref(state, "state")?.0, slice(times, n, "times")?)?;
        write_one(out, d)
    })
}

/// Exact uniqueness certificate for `j`. Writes whether it passed and the
/// nullspace dimension; either pointer may be null.
///
/// # Safety
/// Non-null pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn gamow_uniqueness_certify(j: usize, passed: *mut bool, dimension: *mut usize) -> GamowStatus {
    guard(|| {
        let cert = uniqueness::certify(j)?;
        if !passed.is_null() {
            passed.write(cert.passed);
        }
        if !dimension.is_null() {
            dimension.write(cert.nullspace_dimension);
        }
        Ok(())
    })
}

/// The certificate for `j` as a JSON string. Free it with [`gamow_string_free`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gamow_uniqueness_report_json(j: usize, out: *mut *mut c_char) -> GamowStatus {
    guard(|| {
        let json = uniqueness::certify(j)?.to_json();
        let s = CString::new(json).map_err(|e| Failure(GamowStatus::Panic, e.to_string()))?;
        write_one(out, s.into_raw())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gamow_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
