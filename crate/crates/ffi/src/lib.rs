//! C ABI over the `gdicke` library.
//!
//! Every fallible function returns a [`GdStatus`]; on anything but
//! `GD_STATUS_OK` the message is kept per thread and can be copied out with
//! [`gd_last_error_message`]. Objects are opaque handles created by a `_new`
//! function and released by the matching `_free`. Panics never cross the
//! boundary; they come back as `GD_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gdicke::ed::{default_cutoff, ground_state, observables, EdObservables, FiniteModel, GroundState};
use gdicke::gaussian::{analyze, energy_gap, entanglement_entropy, PointAnalysis};
use gdicke::model::{classify_phase, ModelParams, Phase};
use gdicke::solver::{minimize, SolverOptions};
use gdicke::sweep::{fit_exponent, locate_critical, AxisName, TransitionOrder};
use gdicke::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdStatus {
    Ok = 0,
    InvalidParams = 1,
    NonConvergence = 2,
    InvalidExpansionPoint = 3,
    UnstableMode = 4,
    UncertaintyViolation = 5,
    DimensionCap = 6,
    NoConvergence = 7,
    NoBoundaryInBracket = 8,
    MultipleBoundaries = 9,
    InsufficientPoints = 10,
    NonPositiveValue = 11,
    InvalidSpec = 12,
    NullPointer = 13,
    BufferTooSmall = 14,
    Panic = 15,
}

impl From<&Error> for GdStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParams(_) => GdStatus::InvalidParams,
            Error::NonConvergence { .. } => GdStatus::NonConvergence,
            Error::InvalidExpansionPoint { .. } => GdStatus::InvalidExpansionPoint,
            Error::UnstableMode { .. } => GdStatus::UnstableMode,
            Error::UncertaintyViolation { .. } => GdStatus::UncertaintyViolation,
            Error::DimensionCap { .. } => GdStatus::DimensionCap,
            Error::NoConvergence { .. } => GdStatus::NoConvergence,
            Error::NoBoundaryInBracket { .. } => GdStatus::NoBoundaryInBracket,
            Error::MultipleBoundaries { .. } => GdStatus::MultipleBoundaries,
            Error::InsufficientPoints { .. } => GdStatus::InsufficientPoints,
            Error::NonPositiveValue { .. } => GdStatus::NonPositiveValue,
            Error::InvalidSpec(_) => GdStatus::InvalidSpec,
        }
    }
}

/// Phase codes 1, 2, 3 for phases I, II, III.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdPhase {
    ParamagneticNormal = 1,
    FerromagneticSuperradiant = 2,
    AntiferromagneticNormal = 3,
}

impl From<Phase> for GdPhase {
    fn from(p: Phase) -> Self {
        match p {
            Phase::ParamagneticNormal => GdPhase::ParamagneticNormal,
            Phase::FerromagneticSuperradiant => GdPhase::FerromagneticSuperradiant,
            Phase::AntiferromagneticNormal => GdPhase::AntiferromagneticNormal,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdAxis {
    Chi = 0,
    Lambda = 1,
    Omega = 2,
}

impl From<GdAxis> for AxisName {
    fn from(a: GdAxis) -> Self {
        match a {
            GdAxis::Chi => AxisName::Chi,
            GdAxis::Lambda => AxisName::Lambda,
            GdAxis::Omega => AxisName::Omega,
        }
    }
}

/// Model couplings.
pub struct GdModel {
    params: ModelParams,
}

/// Gaussian fluctuation analysis at the mean-field ground state.
pub struct GdSpectrum {
    analysis: PointAnalysis,
}

/// Two lowest finite-J levels and ground-state expectation values.
pub struct GdGroundState {
    model: FiniteModel,
    result: GroundState,
    obs: EdObservables,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdMeanField {
    pub theta1: f64,
    pub theta2: f64,
    pub alpha: f64,
    pub energy: f64,
    pub gradient_norm: f64,
    pub phase: GdPhase,
    pub degenerate: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdCriticalPoint {
    pub value: f64,
    pub width: f64,
    pub lower_phase: GdPhase,
    pub upper_phase: GdPhase,
    pub first_order: bool,
    /// NaN for a first-order transition.
    pub gap_minimum_at: f64,
    /// NaN for a first-order transition.
    pub gap_minimum: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope. Not called `stderr`, which is a macro in C.
    pub slope_stderr: f64,
    pub points: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdEdSummary {
    pub dim: usize,
    pub n_cut: usize,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub residual: f64,
    pub degenerate: bool,
    /// ⟨Π⟩ of the ground state.
    pub parity: f64,
    /// ⟨J₁ₓ⟩/J, ⟨J₂ₓ⟩/J
    pub jx1: f64,
    pub jx2: f64,
    /// ⟨N_B⟩/N
    pub nb: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(GdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(GdStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GdStatus::NullPointer, format!("{what} is null"))
}

fn guard<F>(f: F) -> GdStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            GdStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            GdStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn write_slice(p: *mut f64, values: &[f64], what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), p, values.len());
    Ok(())
}

/// Copies the calling thread's last error message, NUL-terminated, into
/// `buf` and returns the buffer size needed (message length + 1). Nothing is
/// written when `buf` is null or `cap` is too small.
///
/// # Safety
/// `buf` must be null or point to at least `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gd_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let needed = msg.len() + 1;
        if !buf.is_null() && cap >= needed {
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, msg.len());
            *buf.add(msg.len()) = 0;
        }
        needed
    })
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn gd_status_name(status: GdStatus) -> *const c_char {
    let s: &'static CStr = match status {
        GdStatus::Ok => c"Ok",
        GdStatus::InvalidParams => c"InvalidParams",
        GdStatus::NonConvergence => c"NonConvergence",
        GdStatus::InvalidExpansionPoint => c"InvalidExpansionPoint",
        GdStatus::UnstableMode => c"UnstableMode",
        GdStatus::UncertaintyViolation => c"UncertaintyViolation",
        GdStatus::DimensionCap => c"DimensionCap",
        GdStatus::NoConvergence => c"NoConvergence",
        GdStatus::NoBoundaryInBracket => c"NoBoundaryInBracket",
        GdStatus::MultipleBoundaries => c"MultipleBoundaries",
        GdStatus::InsufficientPoints => c"InsufficientPoints",
        GdStatus::NonPositiveValue => c"NonPositiveValue",
        GdStatus::InvalidSpec => c"InvalidSpec",
        GdStatus::NullPointer => c"NullPointer",
        GdStatus::BufferTooSmall => c"BufferTooSmall",
        GdStatus::Panic => c"Panic",
    };
    s.as_ptr()
}

/// # Safety
/// `out` must be a valid pointer; on success `*out` owns a new model that
/// must be released with [`gd_model_free`].
#[no_mangle]
pub unsafe extern "C" fn gd_model_new(
    spin_freq: f64,
    boson_freq: f64,
    chi: f64,
    lambda: f64,
    out: *mut *mut GdModel,
) -> GdStatus {
    guard(|| {
        let params = ModelParams::new(spin_freq, boson_freq, chi, lambda)?;
        write_out(out, Box::into_raw(Box::new(GdModel { params })), "out")
    })
}

/// # Safety
/// `model` must be null or a pointer from [`gd_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_model_free(model: *mut GdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Replaces one coupling. The model is left unchanged if the result is invalid.
///
/// # Safety
/// `model` must be a live handle from [`gd_model_new`].
#[no_mangle]
pub unsafe extern "C" fn gd_model_set(model: *mut GdModel, axis: GdAxis, value: f64) -> GdStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        let next = AxisName::from(axis).apply(&m.params, value);
        next.validate()?;
        m.params = next;
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gd_classify_phase(model: *const GdModel, out: *mut GdPhase) -> GdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        write_out(out, classify_phase(&m.params).phase.into(), "out")
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gd_minimize(model: *const GdModel, out: *mut GdMeanField) -> GdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let s = minimize(&m.params, &SolverOptions::default())?;
        let r = GdMeanField {
            theta1: s.config.theta1,
            theta2: s.config.theta2,
            alpha: s.config.alpha,
            energy: s.energy,
            gradient_norm: s.gradient_norm,
            phase: s.branch.phase.into(),
            degenerate: s.degenerate_partner.is_some(),
        };
        write_out(out, r, "out")
    })
}

/// Smallest normal-mode energy at the mean-field ground state.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gd_energy_gap(model: *const GdModel, out: *mut f64) -> GdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        write_out(out, energy_gap(&m.params)?, "out")
    })
}

/// Entropy (nats) of one mode with standard deviations `dx`, `dp`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gd_entanglement_entropy(dx: f64, dp: f64, out: *mut f64) -> GdStatus {
    guard(|| write_out(out, entanglement_entropy(dx, dp)?, "out"))
}

/// # Safety
/// `model` must be a live handle; on success `*out` owns a spectrum to be
/// released with [`gd_spectrum_free`].
#[no_mangle]
pub unsafe extern "C" fn gd_spectrum_new(model: *const GdModel, out: *mut *mut GdSpectrum) -> GdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let analysis = analyze(&m.params, &SolverOptions::default())?;
        write_out(out, Box::into_raw(Box::new(GdSpectrum { analysis })), "out")
    })
}

/// # Safety
/// `spectrum` must be null or a pointer from [`gd_spectrum_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_spectrum_free(spectrum: *mut GdSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Writes the three normal-mode energies, ascending.
///
/// # Safety
/// `out` must have room for 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn gd_spectrum_deltas(spectrum: *const GdSpectrum, out: *mut f64) -> GdStatus {
    guard(|| write_slice(out, &deref(spectrum, "spectrum")?.analysis.spectrum.deltas, "out"))
}

/// Writes `(Δxᵢ)²` and `(Δpᵢ)²` for the two spin modes and the boson.
///
/// # Safety
/// `dx2` and `dp2` must each have room for 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn gd_spectrum_variances(spectrum: *const GdSpectrum, dx2: *mut f64, dp2: *mut f64) -> GdStatus {
    guard(|| {
        let f = deref(spectrum, "spectrum")?.analysis.fluctuations;
        write_slice(dx2, &f.dx2, "dx2")?;
        write_slice(dp2, &f.dp2, "dp2")
    })
}

/// # Safety
/// `out` must have room for 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn gd_spectrum_entropies(spectrum: *const GdSpectrum, out: *mut f64) -> GdStatus {
    guard(|| {
        let s = deref(spectrum, "spectrum")?.analysis.fluctuations.entropies()?;
        write_slice(out, &s, "out")
    })
}

/// Row-major 6×6 covariance matrix in the `(x₁, x₂, x₃, p₁, p₂, p₃)` order.
///
/// # Safety
/// `out` must have room for 36 doubles.
#[no_mangle]
pub unsafe extern "C" fn gd_spectrum_covariance(spectrum: *const GdSpectrum, out: *mut f64) -> GdStatus {
    guard(|| {
        let c = deref(spectrum, "spectrum")?.analysis.spectrum.covariance;
        write_slice(out, c.transpose().as_slice(), "out")
    })
}

/// Row-major 6×6 symplectic matrix S with `Sᵀ H S = diag(Δ, Δ)`.
///
/// # Safety
/// `out` must have room for 36 doubles.
#[no_mangle]
pub unsafe extern "C" fn gd_spectrum_symplectic(spectrum: *const GdSpectrum, out: *mut f64) -> GdStatus {
    guard(|| {
        let s = deref(spectrum, "spectrum")?.analysis.spectrum.symplectic;
        write_slice(out, s.transpose().as_slice(), "out")
    })
}

/// Phase boundary along `axis` inside `[lo, hi]`, starting from the model's
/// other couplings.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gd_locate_critical(
    model: *const GdModel,
    axis: GdAxis,
    lo: f64,
    hi: f64,
    out: *mut GdCriticalPoint,
) -> GdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let c = locate_critical(&m.params, axis.into(), lo, hi)?;
        let r = GdCriticalPoint {
            value: c.value,
            width: c.width,
            lower_phase: c.lower_phase.into(),
            upper_phase: c.upper_phase.into(),
            first_order: c.order == TransitionOrder::First,
            gap_minimum_at: c.gap_minimum_at.unwrap_or(f64::NAN),
            gap_minimum: c.gap_minimum.unwrap_or(f64::NAN),
        };
        write_out(out, r, "out")
    })
}

/// Log-log least squares over the points with `dmin <= distance <= dmax`.
///
/// # Safety
/// `distances` and `values` must each point to `n` doubles; `out` must be
/// valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gd_fit_exponent(
    distances: *const f64,
    values: *const f64,
    n: usize,
    dmin: f64,
    dmax: f64,
    out: *mut GdExponentFit,
) -> GdStatus {
    guard(|| {
        if n > 0 && (distances.is_null() || values.is_null()) {
            return Err(null("series"));
        }
        let series: Vec<(f64, f64)> = (0..n).map(|i| (*distances.add(i), *values.add(i))).collect();
        let f = fit_exponent(&series, (dmin, dmax))?;
        write_out(
            out,
            GdExponentFit { slope: f.slope, intercept: f.intercept, slope_stderr: f.stderr, points: f.points },
            "out",
        )
    })
}

/// Exact diagonalization with `two_j` spins per ensemble. `n_cut = 0`
/// selects the default Fock cutoff.
///
/// # Safety
/// `model` must be a live handle; on success `*out` owns a result to be
/// released with [`gd_ground_state_free`].
#[no_mangle]
pub unsafe extern "C" fn gd_ground_state_new(
    model: *const GdModel,
    two_j: usize,
    n_cut: usize,
    out: *mut *mut GdGroundState,
) -> GdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let n_cut = if n_cut == 0 { default_cutoff(&m.params) } else { n_cut };
        let fm = FiniteModel::new(m.params, two_j, n_cut)?;
        let result = ground_state(&fm)?;
        let obs = observables(&fm, &result.state);
        write_out(out, Box::into_raw(Box::new(GdGroundState { model: fm, result, obs })), "out")
    })
}

/// # Safety
/// `state` must be null or a pointer from [`gd_ground_state_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gd_ground_state_free(state: *mut GdGroundState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gd_ground_state_summary(state: *const GdGroundState, out: *mut GdEdSummary) -> GdStatus {
    guard(|| {
        let g = deref(state, "state")?;
        let (r, o, j) = (&g.result, &g.obs, g.model.j());
        let s = GdEdSummary {
            dim: g.model.dim(),
            n_cut: g.model.n_cut,
            e0: r.e0,
            e1: r.e1,
            gap: r.gap,
            residual: r.residual,
            degenerate: r.degenerate,
            parity: o.parity,
            jx1: o.jx1 / j,
            jx2: o.jx2 / j,
            nb: o.nb / g.model.two_j as f64,
        };
        write_out(out, s, "out")
    })
}

/// Copies the ground-state vector (basis index `((m₁+J)(2J+1) + m₂+J)·n_cut + n`).
///
/// # Safety
/// `out` must have room for `len` doubles; `len` must be at least the
/// Hilbert space dimension reported by [`gd_ground_state_summary`].
#[no_mangle]
pub unsafe extern "C" fn gd_ground_state_vector(state: *const GdGroundState, out: *mut f64, len: usize) -> GdStatus {
    guard(|| {
        let g = deref(state, "state")?;
        let v = &g.result.state;
        if len < v.len() {
            return Err(Failure(GdStatus::BufferTooSmall, format!("need {} doubles, got {len}", v.len())));
        }
        write_slice(out, v, "out")
    })
}

/// Crate version, NUL-terminated.
#[no_mangle]
pub extern "C" fn gd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
