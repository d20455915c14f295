//! C ABI over the kemmer engine.
//!
//! Every function returns a [`KemmerStatus`]; results come back through
//! out-pointers. On failure the message is kept per thread and can be read
//! with [`kemmer_last_error`]. Objects are opaque handles released by their
//! `_free` function; passing NULL to a `_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use kemmer::algebra::C64;
use kemmer::checks::{run_criterion, Scale};
use kemmer::dkp::{representation, verify_algebra, DkpRep, SpinKind};
use kemmer::fields::{nr_gaussian, NrFieldSpec};
use kemmer::guidance::{integrate, velocity_at, CurrentSource, GuidanceConfig, GuideField, Termination, Trajectory};
use kemmer::scenario::{execute, list_scenarios, prepare, ScenarioConfig};
use kemmer::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KemmerStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed or inconsistent configuration.
    InvalidConfig = 3,
    /// Physics precondition failed (off-shell mode, node, out of domain, ...).
    Domain = 4,
    Io = 5,
    /// Index or buffer size out of range.
    OutOfRange = 6,
    Panic = 7,
}

/// How a trajectory ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KemmerTermination {
    Completed = 0,
    NodeAbort = 1,
    DomainExit = 2,
}

/// Validated scenario, ready to run.
pub struct KemmerScenario {
    config: ScenarioConfig,
}

/// Borrowed view of a built-in DKP representation.
pub struct KemmerRep {
    rep: &'static DkpRep,
}

/// Nonrelativistic Gaussian packet, spin 0 or 1.
pub struct KemmerNrField {
    field: GuideField,
    kind: SpinKind,
}

/// Integrated single-particle trajectory.
pub struct KemmerTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KemmerStatus {
    match e {
        Error::Config(_) => KemmerStatus::InvalidConfig,
        Error::Io(_) => KemmerStatus::Io,
        Error::ParticleIndex { .. } | Error::DimensionMismatch { .. } | Error::CapacityExceeded { .. } => {
            KemmerStatus::OutOfRange
        }
        _ => KemmerStatus::Domain,
    }
}

struct Fail(KemmerStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(KemmerStatus::NullPointer, format!("{what} is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> KemmerStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KemmerStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            KemmerStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(KemmerStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn array3(p: *const f64, what: &str) -> Result<[f64; 3], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok([*p, *p.add(1), *p.add(2)])
}

fn spin_kind(spin: u32) -> Result<SpinKind, Fail> {
    match spin {
        0 => Ok(SpinKind::Spin0),
        1 => Ok(SpinKind::Spin1),
        s => Err(Fail(KemmerStatus::InvalidConfig, format!("spin must be 0 or 1, got {s}"))),
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kemmer_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kemmer_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Scenario catalog text; release with `kemmer_string_free`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kemmer_list_scenarios(out: *mut *mut c_char) -> KemmerStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = CString::new(list_scenarios()).map_err(|e| Fail(KemmerStatus::Panic, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Parses and validates a TOML scenario.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kemmer_scenario_parse(toml: *const c_char, out: *mut *mut KemmerScenario) -> KemmerStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let config = ScenarioConfig::parse(str_arg(toml, "toml")?)?;
        prepare(&config, None)?;
        *out = Box::into_raw(Box::new(KemmerScenario { config }));
        Ok(())
    })
}

/// Runs a scenario into the existing directory `out_dir`. `passed` receives
/// 1 when every check passed, else 0.
///
/// # Safety
/// `scenario` must be a live handle, `out_dir` a NUL-terminated string and
/// `passed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kemmer_scenario_run(
    scenario: *const KemmerScenario,
    out_dir: *const c_char,
    seed: u64,
    use_seed: bool,
    passed: *mut i32,
) -> KemmerStatus {
    guard(|| {
        let s = ref_arg(scenario, "scenario")?;
        let dir = str_arg(out_dir, "out_dir")?;
        let passed = out_arg(passed, "passed")?;
        let prepared = prepare(&s.config, use_seed.then_some(seed))?;
        let report = execute(&prepared, Path::new(dir), false)?;
        *passed = i32::from(report.passed());
        Ok(())
    })
}

/// # Safety
/// `scenario` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kemmer_scenario_free(scenario: *mut KemmerScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs one acceptance criterion (1..=10).
///
/// # Safety
/// `passed` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kemmer_verify_criterion(id: u32, fast: bool, seed: u64, passed: *mut i32) -> KemmerStatus {
    guard(|| {
        let passed = out_arg(passed, "passed")?;
        if !(1..=10).contains(&id) {
            return Err(Fail(KemmerStatus::OutOfRange, format!("criterion {id} is outside 1..=10")));
        }
        let c = run_criterion(id as usize, if fast { Scale::Fast } else { Scale::Full }, seed);
        *passed = i32::from(c.passed());
        Ok(())
    })
}

/// The spin-0 (5-dim) or spin-1 (10-dim) representation.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kemmer_rep_new(spin: u32, out: *mut *mut KemmerRep) -> KemmerStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(KemmerRep { rep: representation(spin_kind(spin)?) }));
        Ok(())
    })
}

/// # Safety
/// `rep` must be a live handle and `dim` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kemmer_rep_dimension(rep: *const KemmerRep, dim: *mut usize) -> KemmerStatus {
    guard(|| {
        *out_arg(dim, "dim")? = ref_arg(rep, "rep")?.rep.dimension();
        Ok(())
    })
}

/// Copies `beta^mu` row-major as interleaved `re, im` into `buf`, which
/// must hold `2 * dim * dim` doubles.
///
/// # Safety
/// `rep` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn kemmer_rep_beta(rep: *const KemmerRep, mu: u32, buf: *mut f64, len: usize) -> KemmerStatus {
    guard(|| {
        let rep = ref_arg(rep, "rep")?.rep;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if mu > 3 {
            return Err(Fail(KemmerStatus::OutOfRange, format!("mu = {mu} is outside 0..=3")));
        }
        let m = rep.beta(mu as usize).as_slice();
        if len < 2 * m.len() {
            return Err(Fail(KemmerStatus::OutOfRange, format!("buffer holds {len} doubles, need {}", 2 * m.len())));
        }
        let out = std::slice::from_raw_parts_mut(buf, 2 * m.len());
        for (pair, z) in out.chunks_exact_mut(2).zip(m) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(())
    })
}

/// Largest residual of the DKP algebra over all index triples.
///
/// # Safety
/// `rep` must be a live handle and `max_residual` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kemmer_rep_verify(rep: *const KemmerRep, max_residual: *mut f64) -> KemmerStatus {
    guard(|| {
        let r = verify_algebra(ref_arg(rep, "rep")?.rep);
        *out_arg(max_residual, "max_residual")? = r.max_residual;
        Ok(())
    })
}

/// # Safety
/// `rep` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kemmer_rep_free(rep: *mut KemmerRep) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// Gaussian packet of width `sigma` centred at `center[3]` with wave vector
/// `k[3]`. Spin 1 needs `eps` as 6 doubles (`re, im` per axis), normalised
/// here; spin 0 requires `eps == NULL`.
///
/// # Safety
/// `center` and `k` must point to 3 doubles, `eps` to 6 or be NULL, and
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kemmer_nr_gaussian(
    spin: u32,
    mass: f64,
    sigma: f64,
    center: *const f64,
    k: *const f64,
    eps: *const f64,
    out: *mut *mut KemmerNrField,
) -> KemmerStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let kind = spin_kind(spin)?;
        let eps = if eps.is_null() {
            None
        } else {
            let e: [C64; 3] = std::array::from_fn(|i| C64::new(*eps.add(2 * i), *eps.add(2 * i + 1)));
            let n = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !(n > 0.0 && n.is_finite()) {
                return Err(Fail(KemmerStatus::InvalidConfig, "eps must be a nonzero finite vector".into()));
            }
            Some(e.map(|z| z / n))
        };
        let spec: NrFieldSpec = nr_gaussian(kind, mass, sigma, array3(center, "center")?, array3(k, "k")?, eps)?;
        *out = Box::into_raw(Box::new(KemmerNrField { field: GuideField::Nr(Arc::new(spec)), kind }));
        Ok(())
    })
}

fn nr_config(kind: SpinKind, dt: f64, max_steps: usize, node_threshold: f64) -> Result<GuidanceConfig, Error> {
    let source = match kind {
        SpinKind::Spin0 => CurrentSource::NrSpin0,
        SpinKind::Spin1 => CurrentSource::NrSpin1,
    };
    GuidanceConfig::new(source, dt, max_steps, node_threshold)
}

/// Guidance velocity `v[3]` and density at `(t, x[3])`.
///
/// # Safety
/// `field` must be a live handle, `x` must point to 3 doubles, `v` to room
/// for 3 and `density` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kemmer_nr_velocity(
    field: *const KemmerNrField,
    t: f64,
    x: *const f64,
    v: *mut f64,
    density: *mut f64,
) -> KemmerStatus {
    guard(|| {
        let f = ref_arg(field, "field")?;
        let x = array3(x, "x")?;
        if v.is_null() {
            return Err(null("v"));
        }
        let density = out_arg(density, "density")?;
        let s = velocity_at(&f.field, &nr_config(f.kind, 1.0, 1, f64::MIN_POSITIVE)?, t, &[x])?;
        std::ptr::copy_nonoverlapping(s.velocities[0].as_ptr(), v, 3);
        *density = s.density;
        Ok(())
    })
}

/// # Safety
/// `field` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kemmer_nr_field_free(field: *mut KemmerNrField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// RK4 from `(t0, x0[3])` to `t1` with steps no longer than `dt`.
///
/// # Safety
/// `field` must be a live handle, `x0` must point to 3 doubles and `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kemmer_nr_integrate(
    field: *const KemmerNrField,
    dt: f64,
    max_steps: usize,
    node_threshold: f64,
    x0: *const f64,
    t0: f64,
    t1: f64,
    out: *mut *mut KemmerTrajectory,
) -> KemmerStatus {
    guard(|| {
        let f = ref_arg(field, "field")?;
        let out = out_arg(out, "out")?;
        let config = nr_config(f.kind, dt, max_steps, node_threshold)?;
        let inner = integrate(&f.field, &config, array3(x0, "x0")?, t0, t1)?;
        *out = Box::into_raw(Box::new(KemmerTrajectory { inner }));
        Ok(())
    })
}

/// # Safety
/// `tr` must be a live handle and `len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kemmer_trajectory_len(tr: *const KemmerTrajectory, len: *mut usize) -> KemmerStatus {
    guard(|| {
        *out_arg(len, "len")? = ref_arg(tr, "trajectory")?.inner.samples.len();
        Ok(())
    })
}

/// # Safety
/// `tr` must be a live handle and `termination` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kemmer_trajectory_termination(
    tr: *const KemmerTrajectory,
    termination: *mut KemmerTermination,
) -> KemmerStatus {
    guard(|| {
        *out_arg(termination, "termination")? = match ref_arg(tr, "trajectory")?.inner.termination {
            Termination::Completed => KemmerTermination::Completed,
            Termination::NodeAbort => KemmerTermination::NodeAbort,
            Termination::DomainExit => KemmerTermination::DomainExit,
        };
        Ok(())
    })
}

/// Time and position of sample `index`.
///
/// # Safety
/// `tr` must be a live handle, `t` valid and `x` room for 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn kemmer_trajectory_sample(
    tr: *const KemmerTrajectory,
    index: usize,
    t: *mut f64,
    x: *mut f64,
) -> KemmerStatus {
    guard(|| {
        let samples = &ref_arg(tr, "trajectory")?.inner.samples;
        let t = out_arg(t, "t")?;
        if x.is_null() {
            return Err(null("x"));
        }
        let s = samples
            .get(index)
            .ok_or_else(|| Fail(KemmerStatus::OutOfRange, format!("sample {index} of {}", samples.len())))?;
        *t = s.t;
        std::ptr::copy_nonoverlapping(s.positions[0].as_ptr(), x, 3);
        Ok(())
    })
}

/// # Safety
/// `tr` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kemmer_trajectory_free(tr: *mut KemmerTrajectory) {
    if !tr.is_null() {
        drop(Box::from_raw(tr));
    }
}
