//! C ABI over the gkdv laboratory.
//!
//! Objects cross the boundary as opaque handles created by `gkdv_*_new`-style constructors and
//! released with the matching `gkdv_*_free`. Every fallible call returns a [`GkdvStatus`]; on
//! failure the message is kept per thread and read back with [`gkdv_last_error_message`].
//! Panics never unwind into C: they surface as [`GkdvStatus::Panic`].

use gkdv::profiles::{BreatherParams, InitialData, SolitonParams, SuperposeOptions};
use gkdv::scattering::{schrodinger_spectrum, zs_spectrum, ScatteringOptions, SpectrumResult};
use gkdv::solver::{evolve, EvolveOptions, Trajectory};
use gkdv::{spectral, Error, Exponent, Field, GridSpec};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result of every fallible call. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkdvStatus {
    Ok = 0,
    NullPointer = 1,
    BufferTooSmall = 2,
    InvalidParameter = 3,
    Overlap = 4,
    Domain = 5,
    Blowup = 6,
    WrongExponent = 7,
    NoConvergence = 8,
    UnresolvedSpectrum = 9,
    Diagnostic = 10,
    Panic = 11,
}

impl From<&Error> for GkdvStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Overlap(_) => GkdvStatus::Overlap,
            Error::Domain(_) | Error::Decay(_) => GkdvStatus::Domain,
            Error::Blowup { .. } => GkdvStatus::Blowup,
            Error::WrongExponent { .. } => GkdvStatus::WrongExponent,
            Error::NoConvergence { .. } => GkdvStatus::NoConvergence,
            Error::UnresolvedSpectrum(_) => GkdvStatus::UnresolvedSpectrum,
            Error::Diagnostic(_)
            | Error::Separation(_)
            | Error::Closeness { .. }
            | Error::SpeedRange(_)
            | Error::SpectralTail { .. }
            | Error::NonPositiveValue { .. } => GkdvStatus::Diagnostic,
            _ => GkdvStatus::InvalidParameter,
        }
    }
}

/// One solution snapshot on a periodic grid.
pub struct GkdvField(Field);

/// Stored frames of a run, with its truncation cause if it ended early.
pub struct GkdvTrajectory(Trajectory);

/// Discrete spectrum of a potential with its predicted soliton and breather content.
pub struct GkdvSpectrum(SpectrumResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), GkdvFail>) -> GkdvStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GkdvStatus::Ok,
        Ok(Err(GkdvFail(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {message}"));
            GkdvStatus::Panic
        }
    }
}

struct GkdvFail(GkdvStatus, String);

impl From<Error> for GkdvFail {
    fn from(e: Error) -> Self {
        GkdvFail((&e).into(), e.to_string())
    }
}

fn null(what: &str) -> GkdvFail {
    GkdvFail(GkdvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, GkdvFail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slot<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, GkdvFail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn make_field(length: f64, n: usize, dt: f64, p: u32, data: InitialData) -> Result<Field, Error> {
    let grid = GridSpec::new(length, n, dt)?;
    data.realize(Exponent::new(p)?, &grid)
}

/// Copies `values` into `out` when it is large enough; always reports the needed length.
unsafe fn copy_out(values: &[f64], out: *mut f64, capacity: usize, needed: *mut usize) -> Result<(), GkdvFail> {
    if let Some(n) = needed.as_mut() {
        *n = values.len();
    }
    if capacity < values.len() {
        return Err(GkdvFail(
            GkdvStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", values.len()),
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

/// Length of the last error message on this thread, excluding the terminating NUL; 0 if none.
#[no_mangle]
pub extern "C" fn gkdv_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copies the last error message on this thread into `buf` (NUL-terminated, truncated to fit).
/// Returns the number of bytes written excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gkdv_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    if buf.is_null() || capacity == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        let n = bytes.len().min(capacity - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gkdv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Field from `n` grid values on [−L/2, L/2) for exponent `p` at time `t`.
///
/// # Safety
/// `values` must point to `n` readable doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_new(
    length: f64,
    n: usize,
    dt: f64,
    p: u32,
    t: f64,
    values: *const f64,
    out: *mut *mut GkdvField,
) -> GkdvStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        *out = ptr::null_mut();
        if values.is_null() {
            return Err(null("values"));
        }
        let data = std::slice::from_raw_parts(values, n).to_vec();
        let field = Field::new(GridSpec::new(length, n, dt)?, Exponent::new(p)?, t, data)?;
        *out = Box::into_raw(Box::new(GkdvField(field)));
        Ok(())
    })
}

/// Sum of solitons of speeds `speeds[i]` centred at `centers[i]`; overlapping or edge-touching
/// layouts are refused.
///
/// # Safety
/// `speeds` and `centers` must point to `count` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_solitons(
    length: f64,
    n: usize,
    dt: f64,
    p: u32,
    speeds: *const f64,
    centers: *const f64,
    count: usize,
    out: *mut *mut GkdvField,
) -> GkdvStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        *out = ptr::null_mut();
        if count > 0 && (speeds.is_null() || centers.is_null()) {
            return Err(null("speeds or centers"));
        }
        let solitons: Vec<SolitonParams> = (0..count)
            .map(|i| SolitonParams::new(*speeds.add(i), *centers.add(i)))
            .collect();
        let data = InitialData::Superposition {
            solitons,
            options: SuperposeOptions::default(),
        };
        *out = Box::into_raw(Box::new(GkdvField(make_field(length, n, dt, p, data)?)));
        Ok(())
    })
}

/// mKdV breather with parameters (α, β) and shifts (x₁, x₂) at t = 0.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_breather(
    length: f64,
    n: usize,
    dt: f64,
    alpha: f64,
    beta: f64,
    x1: f64,
    x2: f64,
    out: *mut *mut GkdvField,
) -> GkdvStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        *out = ptr::null_mut();
        let data = InitialData::Breather(BreatherParams::new(alpha, beta, x1, x2)?);
        *out = Box::into_raw(Box::new(GkdvField(make_field(length, n, dt, 3, data)?)));
        Ok(())
    })
}

/// Releases a field; null is ignored.
///
/// # Safety
/// `field` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_free(field: *mut GkdvField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of grid values, 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_len(field: *const GkdvField) -> usize {
    field.as_ref().map_or(0, |f| f.0.len())
}

/// Copies the grid values into `out`; `needed` (optional) receives the value count.
///
/// # Safety
/// `field` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_values(
    field: *const GkdvField,
    out: *mut f64,
    capacity: usize,
    needed: *mut usize,
) -> GkdvStatus {
    guard(|| copy_out(handle(field, "field")?.0.values(), out, capacity, needed))
}

/// Time stamp, mass ∫u² and energy of a field.
///
/// # Safety
/// `field` must be a live handle; each output pointer must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_invariants(
    field: *const GkdvField,
    t: *mut f64,
    mass: *mut f64,
    energy: *mut f64,
) -> GkdvStatus {
    guard(|| {
        let u = &handle(field, "field")?.0;
        if let Some(t) = t.as_mut() {
            *t = u.t();
        }
        if let Some(m) = mass.as_mut() {
            *m = spectral::mass(u);
        }
        if let Some(e) = energy.as_mut() {
            *e = spectral::energy(u);
        }
        Ok(())
    })
}

/// Evolves a field over `t_final` (a multiple of its dt), storing every `frame_stride` steps.
/// A run stopped by blow-up or boundary contact still yields its partial trajectory; query
/// [`gkdv_trajectory_truncated`].
///
/// # Safety
/// `field` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gkdv_evolve(
    field: *const GkdvField,
    t_final: f64,
    frame_stride: usize,
    out: *mut *mut GkdvTrajectory,
) -> GkdvStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        *out = ptr::null_mut();
        let u = &handle(field, "field")?.0;
        let options = EvolveOptions {
            frame_stride,
            ..Default::default()
        };
        let traj = evolve(u, t_final, &options, &mut [])?;
        *out = Box::into_raw(Box::new(GkdvTrajectory(traj)));
        Ok(())
    })
}

/// Releases a trajectory; null is ignored.
///
/// # Safety
/// `traj` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gkdv_trajectory_free(traj: *mut GkdvTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of stored frames, 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gkdv_trajectory_len(traj: *const GkdvTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Status of the cause that ended the run early, or `Ok` if it reached its final time. The
/// cause's message becomes the thread's last error.
///
/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gkdv_trajectory_truncated(traj: *const GkdvTrajectory) -> GkdvStatus {
    guard(|| match handle(traj, "trajectory")?.0.truncation() {
        Some(e) => Err(e.clone().into()),
        None => Ok(()),
    })
}

/// Copy of stored frame `index` (0-based) as a new field handle.
///
/// # Safety
/// `traj` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gkdv_trajectory_frame(
    traj: *const GkdvTrajectory,
    index: usize,
    out: *mut *mut GkdvField,
) -> GkdvStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        *out = ptr::null_mut();
        let frames = handle(traj, "trajectory")?.0.frames();
        let f = frames.get(index).ok_or_else(|| {
            GkdvFail(
                GkdvStatus::InvalidParameter,
                format!("frame {index} of {}", frames.len()),
            )
        })?;
        *out = Box::into_raw(Box::new(GkdvField(f.clone())));
        Ok(())
    })
}

/// Largest relative mass and energy drift over the stored frames.
///
/// # Safety
/// `traj` must be a live handle; each output pointer must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn gkdv_trajectory_drifts(
    traj: *const GkdvTrajectory,
    mass: *mut f64,
    energy: *mut f64,
) -> GkdvStatus {
    guard(|| {
        let t = &handle(traj, "trajectory")?.0;
        if let Some(m) = mass.as_mut() {
            *m = t.mass_drift();
        }
        if let Some(e) = energy.as_mut() {
            *e = t.energy_drift();
        }
        Ok(())
    })
}

/// Discrete spectrum of a field: Schrödinger for p = 2, Zakharov–Shabat for p = 3.
/// `points` = 0 uses the field's grid size.
///
/// # Safety
/// `field` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gkdv_spectrum(
    field: *const GkdvField,
    points: usize,
    out: *mut *mut GkdvSpectrum,
) -> GkdvStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        *out = ptr::null_mut();
        let u = &handle(field, "field")?.0;
        let options = ScatteringOptions {
            points: (points > 0).then_some(points),
            ..Default::default()
        };
        let spec = match u.p().get() {
            2 => schrodinger_spectrum(u, &options)?,
            3 => zs_spectrum(u, &options)?,
            p => return Err(Error::WrongExponent { expected: 3, found: p }.into()),
        };
        *out = Box::into_raw(Box::new(GkdvSpectrum(spec)));
        Ok(())
    })
}

/// Releases a spectrum; null is ignored.
///
/// # Safety
/// `spec` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gkdv_spectrum_free(spec: *mut GkdvSpectrum) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Calibrated eigenvalues as separate real and imaginary parts; `needed` receives the count.
///
/// # Safety
/// `spec` must be a live handle; `re` and `im` must each hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn gkdv_spectrum_eigenvalues(
    spec: *const GkdvSpectrum,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
    needed: *mut usize,
) -> GkdvStatus {
    guard(|| {
        let ev = &handle(spec, "spectrum")?.0.eigenvalues;
        let r: Vec<f64> = ev.iter().map(|z| z.re).collect();
        let i: Vec<f64> = ev.iter().map(|z| z.im).collect();
        copy_out(&r, re, capacity, needed)?;
        copy_out(&i, im, capacity, needed)
    })
}

/// Predicted soliton speeds, ascending; `needed` receives the count.
///
/// # Safety
/// `spec` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn gkdv_spectrum_speeds(
    spec: *const GkdvSpectrum,
    out: *mut f64,
    capacity: usize,
    needed: *mut usize,
) -> GkdvStatus {
    guard(|| {
        let speeds: Vec<f64> = handle(spec, "spectrum")?
            .0
            .predicted_solitons
            .iter()
            .map(|s| s.c)
            .collect();
        copy_out(&speeds, out, capacity, needed)
    })
}

/// Predicted breathers as interleaved (α, β) pairs; `needed` receives the pair count.
///
/// # Safety
/// `spec` must be a live handle; `out` must hold `2 * capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn gkdv_spectrum_breathers(
    spec: *const GkdvSpectrum,
    out: *mut f64,
    capacity: usize,
    needed: *mut usize,
) -> GkdvStatus {
    guard(|| {
        let b = &handle(spec, "spectrum")?.0.predicted_breathers;
        if let Some(n) = needed.as_mut() {
            *n = b.len();
        }
        let flat: Vec<f64> = b.iter().flat_map(|b| [b.alpha, b.beta]).collect();
        copy_out(&flat, out, 2 * capacity, ptr::null_mut())
    })
}

/// 1 when the spectrum is generic (distinct speeds, no soliton/breather velocity coincidence),
/// 0 otherwise, −1 for a null handle.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gkdv_spectrum_generic(spec: *const GkdvSpectrum) -> i32 {
    spec.as_ref().map_or(-1, |s| i32::from(s.0.generic))
}
