//! C ABI over the `zzlab` simulator.
//!
//! Devices are opaque handles created by `zz_device_new_*` and released with
//! `zz_device_free`. Every fallible call returns a [`ZzStatus`]; on failure a
//! human-readable message is available from `zz_last_error_message` on the
//! same thread until the next failing call.
//!
//! Units follow the Rust API: mode and pulse frequencies in GHz,
//! anharmonicities, couplings and ZZ rates in MHz, times in ns, angles in rad.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use zzlab::{CalibrationSettings, CouplingSpec, DeviceSpec, Error, GateKind, GateMetrics, ModeSpec, Objective, PulseSpec};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZzStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Out-of-range parameter, dimension, grid or gate code.
    InvalidArgument = 2,
    /// A closed-form expression hit a pole.
    Singular = 3,
    /// Propagation or frame construction failed numerically.
    Numerical = 4,
    /// The calibration search found no usable point.
    CalibrationFailed = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

pub const ZZ_GATE_CZ: u32 = 0;
pub const ZZ_GATE_ISWAP: u32 = 1;
/// Partial swap; `angle` is θ.
pub const ZZ_GATE_XY: u32 = 2;
/// Controlled phase; `angle` is φ.
pub const ZZ_GATE_CPHASE: u32 = 3;

pub const ZZ_OBJECTIVE_LEAKAGE: u32 = 0;
pub const ZZ_OBJECTIVE_INFIDELITY: u32 = 1;

/// Opaque device handle.
pub struct ZzDevice {
    spec: DeviceSpec,
}

/// One transmon-like mode.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ZzMode {
    pub freq_ghz: f64,
    pub anharm_mhz: f64,
    pub levels: u32,
}

/// Gate selector. `angle` is read only for `ZZ_GATE_XY` and `ZZ_GATE_CPHASE`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ZzGate {
    pub kind: u32,
    pub angle: f64,
}

/// Flat-top flux pulse on mode a.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ZzPulse {
    pub parking_ghz: f64,
    pub interaction_ghz: f64,
    pub overshoot_mhz: f64,
    pub hold_ns: f64,
    pub ramp_ns: f64,
    pub time_step_ns: f64,
    pub padding_ns: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ZzGateMetrics {
    pub fidelity: f64,
    pub eps_leak: f64,
    pub eps_swap: f64,
    pub theta: f64,
    pub phi: f64,
    pub delta_theta: f64,
    pub delta_phi: f64,
    pub virtual_z_a: f64,
    pub virtual_z_b: f64,
}

/// Hold-time grid and overshoot search bounds for `zz_calibrate_gate`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ZzCalibrationSettings {
    pub hold_min_ns: f64,
    pub hold_max_ns: f64,
    pub hold_step_ns: f64,
    pub overshoot_min_mhz: f64,
    pub overshoot_max_mhz: f64,
    pub objective: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ZzCalibration {
    pub hold_ns: f64,
    pub overshoot_mhz: f64,
    pub objective_value: f64,
    pub metrics: ZzGateMetrics,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("nul bytes removed")));
}

fn status_of(err: &Error) -> ZzStatus {
    match err {
        Error::InvalidDimension(_)
        | Error::LevelOutOfRange { .. }
        | Error::InvalidParameter(_)
        | Error::InvalidGrid(_)
        | Error::Domain { .. }
        | Error::Branch { .. } => ZzStatus::InvalidArgument,
        Error::Pole(_) => ZzStatus::Singular,
        Error::StepSize { .. } | Error::Frame(_) => ZzStatus::Numerical,
        Error::Calibration(_) => ZzStatus::CalibrationFailed,
    }
}

/// Runs `f`, recording errors and turning panics into `ZzStatus::Panic`.
fn guard(f: impl FnOnce() -> Result<(), ZzStatus>) -> ZzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZzStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ZzStatus::Panic
        }
    }
}

fn fail(err: Error) -> ZzStatus {
    set_error(err.to_string());
    status_of(&err)
}

fn null(name: &str) -> ZzStatus {
    set_error(format!("{name} is null"));
    ZzStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, ZzStatus> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, ZzStatus> {
    p.as_mut().ok_or_else(|| null(name))
}

fn mode(m: &ZzMode) -> ModeSpec {
    ModeSpec::new(m.freq_ghz, m.anharm_mhz).with_levels(m.levels as usize)
}

fn gate_kind(g: &ZzGate) -> Result<GateKind, ZzStatus> {
    match g.kind {
        ZZ_GATE_CZ => Ok(GateKind::Cz),
        ZZ_GATE_ISWAP => Ok(GateKind::ISwap),
        ZZ_GATE_XY => Ok(GateKind::Xy { theta: g.angle }),
        ZZ_GATE_CPHASE => Ok(GateKind::CPhase { phi: g.angle }),
        k => {
            set_error(format!("unknown gate kind {k}"));
            Err(ZzStatus::InvalidArgument)
        }
    }
}

fn pulse_spec(p: &ZzPulse) -> PulseSpec {
    PulseSpec {
        parking_ghz: p.parking_ghz,
        interaction_ghz: p.interaction_ghz,
        overshoot_mhz: p.overshoot_mhz,
        hold_ns: p.hold_ns,
        ramp_ns: p.ramp_ns,
        time_step_ns: p.time_step_ns,
        padding_ns: p.padding_ns,
    }
}

fn metrics(m: &GateMetrics) -> ZzGateMetrics {
    ZzGateMetrics {
        fidelity: m.fidelity,
        eps_leak: m.epsilon_leak,
        eps_swap: m.epsilon_swap,
        theta: m.theta_measured,
        phi: m.phi_measured,
        delta_theta: m.delta_theta,
        delta_phi: m.delta_phi,
        virtual_z_a: m.virtual_z.0,
        virtual_z_b: m.virtual_z.1,
    }
}

fn new_device(spec: DeviceSpec, out_device: *mut *mut ZzDevice) -> ZzStatus {
    guard(|| {
        let slot = unsafe { out(out_device, "out_device")? };
        *slot = std::ptr::null_mut();
        spec.validate().map_err(fail)?;
        *slot = Box::into_raw(Box::new(ZzDevice { spec }));
        Ok(())
    })
}

/// Creates a device with a direct exchange coupling `g_mhz`.
///
/// # Safety
/// `mode_a` and `mode_b` must be null or valid; `out_device` must be null or
/// writable. On success `*out_device` owns a handle for `zz_device_free`.
#[no_mangle]
pub unsafe extern "C" fn zz_device_new_direct(
    mode_a: *const ZzMode,
    mode_b: *const ZzMode,
    g_mhz: f64,
    out_device: *mut *mut ZzDevice,
) -> ZzStatus {
    let (a, b) = match (deref(mode_a, "mode_a"), deref(mode_b, "mode_b")) {
        (Ok(a), Ok(b)) => (mode(a), mode(b)),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    new_device(DeviceSpec::direct(a, b, g_mhz), out_device)
}

/// Creates a device whose modes both couple to a bus resonator.
///
/// # Safety
/// Same contract as `zz_device_new_direct`.
#[no_mangle]
pub unsafe extern "C" fn zz_device_new_resonator(
    mode_a: *const ZzMode,
    mode_b: *const ZzMode,
    resonator_ghz: f64,
    g_a_mhz: f64,
    g_b_mhz: f64,
    resonator_levels: u32,
    out_device: *mut *mut ZzDevice,
) -> ZzStatus {
    let (a, b) = match (deref(mode_a, "mode_a"), deref(mode_b, "mode_b")) {
        (Ok(a), Ok(b)) => (mode(a), mode(b)),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    let coupling =
        CouplingSpec::ViaResonator { freq_ghz: resonator_ghz, g_a_mhz, g_b_mhz, levels: resonator_levels as usize };
    new_device(DeviceSpec { mode_a: a, mode_b: b, coupling }, out_device)
}

/// Releases a device. Null is a no-op.
///
/// # Safety
/// `device` must be null or a handle from `zz_device_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zz_device_free(device: *mut ZzDevice) {
    if !device.is_null() {
        drop(Box::from_raw(device));
    }
}

/// Dimension of the device Hilbert space.
///
/// # Safety
/// `device` must be null or a live handle; `out_dim` null or writable.
#[no_mangle]
pub unsafe extern "C" fn zz_device_dimension(device: *const ZzDevice, out_dim: *mut usize) -> ZzStatus {
    guard(|| {
        let d = deref(device, "device")?;
        *out(out_dim, "out_dim")? = d.spec.dimension();
        Ok(())
    })
}

/// ZZ rate in MHz from exact diagonalization. `out_degenerate` may be null;
/// otherwise it receives 1 when the labeling near |11> is ambiguous.
///
/// # Safety
/// `device` must be null or a live handle; output pointers null or writable.
#[no_mangle]
pub unsafe extern "C" fn zz_zeta_numeric(
    device: *const ZzDevice,
    out_zeta_mhz: *mut f64,
    out_degenerate: *mut i32,
) -> ZzStatus {
    guard(|| {
        let d = deref(device, "device")?;
        let slot = out(out_zeta_mhz, "out_zeta_mhz")?;
        let r = zzlab::zz_numeric(&d.spec).map_err(fail)?;
        *slot = r.zeta_mhz;
        if let Some(flag) = out_degenerate.as_mut() {
            *flag = r.degenerate as i32;
        }
        Ok(())
    })
}

type ClosedForm = fn(f64, f64, f64, f64) -> zzlab::Result<zzlab::ZzResult>;

fn closed_form(f: ClosedForm, delta: f64, alpha_a: f64, alpha_b: f64, g: f64, out_zeta: *mut f64) -> ZzStatus {
    guard(|| {
        let slot = unsafe { out(out_zeta, "out_zeta_mhz")? };
        *slot = f(delta, alpha_a, alpha_b, g).map_err(fail)?.zeta_mhz;
        Ok(())
    })
}

/// Fourth-order closed-form ZZ rate of a directly coupled pair, all in MHz.
/// Returns `ZzStatus::Singular` at a pole.
///
/// # Safety
/// `out_zeta_mhz` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn zz_zeta_analytic(
    delta_mhz: f64,
    alpha_a_mhz: f64,
    alpha_b_mhz: f64,
    g_mhz: f64,
    out_zeta_mhz: *mut f64,
) -> ZzStatus {
    closed_form(zzlab::zz_analytic, delta_mhz, alpha_a_mhz, alpha_b_mhz, g_mhz, out_zeta_mhz)
}

/// Second-order perturbative ZZ rate, all in MHz.
///
/// # Safety
/// `out_zeta_mhz` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn zz_zeta_perturbative(
    delta_mhz: f64,
    alpha_a_mhz: f64,
    alpha_b_mhz: f64,
    g_mhz: f64,
    out_zeta_mhz: *mut f64,
) -> ZzStatus {
    closed_form(zzlab::zz_perturbative, delta_mhz, alpha_a_mhz, alpha_b_mhz, g_mhz, out_zeta_mhz)
}

/// Fills `out_pulse` with default ramp, time step and padding for `gate`,
/// parked at mode a's frequency and targeting the gate's resonance.
///
/// # Safety
/// `device` and `gate` must be null or valid; `out_pulse` null or writable.
#[no_mangle]
pub unsafe extern "C" fn zz_pulse_default(
    device: *const ZzDevice,
    gate: *const ZzGate,
    hold_ns: f64,
    out_pulse: *mut ZzPulse,
) -> ZzStatus {
    guard(|| {
        let d = deref(device, "device")?;
        let kind = gate_kind(deref(gate, "gate")?)?;
        let slot = out(out_pulse, "out_pulse")?;
        let p = PulseSpec::new(d.spec.mode_a.freq_ghz, kind.interaction_ghz(&d.spec), hold_ns);
        *slot = ZzPulse {
            parking_ghz: p.parking_ghz,
            interaction_ghz: p.interaction_ghz,
            overshoot_mhz: p.overshoot_mhz,
            hold_ns: p.hold_ns,
            ramp_ns: p.ramp_ns,
            time_step_ns: p.time_step_ns,
            padding_ns: p.padding_ns,
        };
        Ok(())
    })
}

/// Propagates `pulse` on `device` and scores the result against `gate`.
///
/// # Safety
/// Pointer arguments must be null or valid; `out_metrics` null or writable.
#[no_mangle]
pub unsafe extern "C" fn zz_simulate_gate(
    device: *const ZzDevice,
    pulse: *const ZzPulse,
    gate: *const ZzGate,
    out_metrics: *mut ZzGateMetrics,
) -> ZzStatus {
    guard(|| {
        let d = deref(device, "device")?;
        let p = pulse_spec(deref(pulse, "pulse")?);
        let kind = gate_kind(deref(gate, "gate")?)?;
        let slot = out(out_metrics, "out_metrics")?;
        *slot = metrics(&zzlab::simulate_gate(&d.spec, &p, kind).map_err(fail)?);
        Ok(())
    })
}

/// Scans the hold grid, optimizing the overshoot at each hold, and returns the
/// best point. Ramp, time step and padding take their defaults.
///
/// # Safety
/// Pointer arguments must be null or valid; `out_result` null or writable.
#[no_mangle]
pub unsafe extern "C" fn zz_calibrate_gate(
    device: *const ZzDevice,
    gate: *const ZzGate,
    settings: *const ZzCalibrationSettings,
    out_result: *mut ZzCalibration,
) -> ZzStatus {
    guard(|| {
        let d = deref(device, "device")?;
        let kind = gate_kind(deref(gate, "gate")?)?;
        let s = deref(settings, "settings")?;
        let slot = out(out_result, "out_result")?;
        let mut cs = CalibrationSettings::new((s.hold_min_ns, s.hold_max_ns));
        cs.hold_step_ns = s.hold_step_ns;
        cs.overshoot_bounds = (s.overshoot_min_mhz, s.overshoot_max_mhz);
        cs.objective = match s.objective {
            ZZ_OBJECTIVE_LEAKAGE => Objective::Leakage,
            ZZ_OBJECTIVE_INFIDELITY => Objective::Infidelity,
            k => {
                set_error(format!("unknown objective {k}"));
                return Err(ZzStatus::InvalidArgument);
            }
        };
        let r = zzlab::calibrate_gate_with(&d.spec, kind, &cs).map_err(fail)?;
        *slot = ZzCalibration {
            hold_ns: r.best_hold,
            overshoot_mhz: r.best_overshoot,
            objective_value: r.objective_value,
            metrics: metrics(&r.metrics_at_optimum),
        };
        Ok(())
    })
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn zz_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn zz_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}
