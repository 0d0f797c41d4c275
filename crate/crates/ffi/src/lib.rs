//! C ABI over the simulator: an opaque handle owning the plant and its
//! parameters, status-code errors with a per-handle message string, and a
//! flat run-report struct. The build script generates `include/pals.h`.
//!
//! Handles are not thread-safe; use one per thread. Strings returned by
//! the API stay valid until the next call on the same handle.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use pals_core::compensation::CompensationCoefficients;
use pals_core::controllers::ControllerKind;
use pals_core::fitting;
use pals_core::maneuvers::ManeuverKind;
use pals_core::metrics::RunReport;
use pals_core::params::Config;
use pals_core::plant::Plant;
use pals_core::simulation::{run_maneuver, ManeuverOptions};
use pals_core::PalsError;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PalsStatus {
    /// Success.
    Ok = 0,
    /// Null pointer, malformed UTF-8, or an unknown name.
    InvalidArgument = 1,
    /// Integration left the physically sane region.
    NumericalDivergence = 3,
    /// Bad parameter file or an operation precondition not met.
    ConfigError = 4,
    /// Calibration sweep or least-squares fit failed.
    CalibrationFailed = 5,
    /// File could not be read, written, or parsed.
    IoError = 6,
    /// Unexpected internal failure; the handle stays usable.
    Internal = 7,
}

/// Per-run scalar summary. Times in seconds, angles in radians.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PalsRunReport {
    pub rms_roll: f64,
    pub rms_pitch: f64,
    pub peak_roll: f64,
    pub peak_pitch: f64,
    /// Roll settling time; negative when the run never settles.
    pub settling_time: f64,
    /// First rollover-threshold crossing; negative when none.
    pub rollover_time: f64,
    /// Number of detected two-wheel-lift episodes.
    pub two_wheel_lift_count: u32,
    /// Episodes whose lifted side regained contact before the run ended.
    pub closed_lift_count: u32,
    /// True when the run was cut short at the roll hard limit.
    pub truncated: bool,
}

/// Maneuver knobs. Any field at or below zero keeps its default.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PalsRunOptions {
    /// Fishhook entrance speed [mph].
    pub mes_mph: f64,
    /// Sinusoid steer frequency [Hz].
    pub frequency_hz: f64,
    /// Sinusoid steering-wheel amplitude [deg].
    pub amplitude_deg: f64,
    /// Steady-cornering duration factor (1.0 = full-length ramp).
    pub scale: f64,
}

/// Opaque simulator handle. Create with `pals_sim_new`, destroy with
/// `pals_sim_free`.
pub struct PalsSim {
    plant: Plant,
    config: Config,
    coefficients: Option<CompensationCoefficients>,
    last_error: CString,
}

impl PalsSim {
    fn set_error(&mut self, message: &str) {
        self.last_error = CString::new(message.replace('\0', " ")).unwrap();
    }

    fn fail(&mut self, err: &PalsError) -> PalsStatus {
        self.set_error(&err.to_string());
        status_of(err)
    }
}

fn status_of(err: &PalsError) -> PalsStatus {
    match err {
        PalsError::Config(_) => PalsStatus::ConfigError,
        PalsError::NumericalDivergence { .. } => PalsStatus::NumericalDivergence,
        PalsError::CalibrationAborted(_)
        | PalsError::IllConditioned { .. }
        | PalsError::Stage1NotConverged(_) => PalsStatus::CalibrationFailed,
        PalsError::Io(_) | PalsError::Parse(_) | PalsError::InvalidTelemetry(_) => {
            PalsStatus::IoError
        }
        PalsError::WindowMismatch(_) => PalsStatus::Internal,
    }
}

/// Borrows a required C string argument.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, String> {
    if ptr.is_null() {
        return Err(format!("{what} must not be null"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| format!("{what} is not valid UTF-8"))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn pals_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates a simulator from a TOML parameter file, or from built-in
/// defaults when `config_path` is null. On failure `*out` is null.
///
/// # Safety
/// `out` must be a valid pointer; `config_path` must be null or a valid
/// nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pals_sim_new(
    config_path: *const c_char,
    out: *mut *mut PalsSim,
) -> PalsStatus {
    if out.is_null() {
        return PalsStatus::InvalidArgument;
    }
    *out = ptr::null_mut();
    let config = if config_path.is_null() {
        Config::default()
    } else {
        let path = match required_str(config_path, "config_path") {
            Ok(s) => s,
            Err(_) => return PalsStatus::InvalidArgument,
        };
        match Config::load(Path::new(path)) {
            Ok(c) => c,
            Err(e) => return status_of(&e),
        }
    };
    let plant = match Plant::new(&config.vehicle) {
        Ok(p) => p,
        Err(e) => return status_of(&e),
    };
    let sim = Box::new(PalsSim {
        plant,
        config,
        coefficients: None,
        last_error: CString::default(),
    });
    *out = Box::into_raw(sim);
    PalsStatus::Ok
}

/// Destroys a handle. Null is a no-op.
///
/// # Safety
/// `sim` must be null or a pointer from `pals_sim_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pals_sim_free(sim: *mut PalsSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Message for the most recent failure on this handle; empty when the
/// last call succeeded. Valid until the next call on the handle.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pals_sim_last_error(sim: *const PalsSim) -> *const c_char {
    match sim.as_ref() {
        Some(s) => s.last_error.as_ptr(),
        None => c"".as_ptr(),
    }
}

/// Runs the calibration sweeps and stores the fitted compensation
/// coefficients in the handle for subsequent feedforward runs.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pals_sim_calibrate(sim: *mut PalsSim) -> PalsStatus {
    let Some(sim) = sim.as_mut() else {
        return PalsStatus::InvalidArgument;
    };
    sim.set_error("");
    let result = catch_unwind(AssertUnwindSafe(|| fitting::calibrate(&sim.plant, &sim.config)));
    match result {
        Ok(Ok(calibration)) => {
            sim.coefficients = Some(calibration.coefficients);
            PalsStatus::Ok
        }
        Ok(Err(e)) => sim.fail(&e),
        Err(_) => {
            sim.set_error("internal panic during calibration");
            PalsStatus::Internal
        }
    }
}

/// Loads compensation coefficients from a file written by
/// `pals_sim_save_coefficients` or the CLI's fit command.
///
/// # Safety
/// `sim` must be a live handle; `path` a valid nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pals_sim_load_coefficients(
    sim: *mut PalsSim,
    path: *const c_char,
) -> PalsStatus {
    let Some(sim) = sim.as_mut() else {
        return PalsStatus::InvalidArgument;
    };
    sim.set_error("");
    let path = match required_str(path, "path") {
        Ok(s) => s,
        Err(m) => {
            sim.set_error(&m);
            return PalsStatus::InvalidArgument;
        }
    };
    match CompensationCoefficients::load(Path::new(path)) {
        Ok(c) => {
            sim.coefficients = Some(c);
            PalsStatus::Ok
        }
        Err(e) => sim.fail(&e),
    }
}

/// Writes the handle's coefficients to a file.
///
/// # Safety
/// `sim` must be a live handle; `path` a valid nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pals_sim_save_coefficients(
    sim: *mut PalsSim,
    path: *const c_char,
) -> PalsStatus {
    let Some(sim) = sim.as_mut() else {
        return PalsStatus::InvalidArgument;
    };
    sim.set_error("");
    let path = match required_str(path, "path") {
        Ok(s) => s,
        Err(m) => {
            sim.set_error(&m);
            return PalsStatus::InvalidArgument;
        }
    };
    let Some(coefficients) = &sim.coefficients else {
        sim.set_error("no coefficients loaded; calibrate or load a file first");
        return PalsStatus::ConfigError;
    };
    match coefficients.save(Path::new(path)) {
        Ok(()) => PalsStatus::Ok,
        Err(e) => sim.fail(&e),
    }
}

/// Simulates one maneuver under one controller.
///
/// `maneuver` is one of `step-steer`, `steady-cornering`, `brake-in-turn`,
/// `accel-brake`, `fishhook`, `sinusoid`; `controller` is `passive`,
/// `pals-pid`, or `ff-pid-non` (which requires coefficients). `options`
/// may be null for defaults. When `telemetry_csv_path` is non-null the
/// decimated telemetry is written there. When `report` is non-null it is
/// filled with the run summary.
///
/// # Safety
/// `sim` must be a live handle; string arguments must be null or valid
/// nul-terminated strings; `options` and `report` null or valid.
#[no_mangle]
pub unsafe extern "C" fn pals_sim_run(
    sim: *mut PalsSim,
    maneuver: *const c_char,
    controller: *const c_char,
    options: *const PalsRunOptions,
    telemetry_csv_path: *const c_char,
    report: *mut PalsRunReport,
) -> PalsStatus {
    let Some(sim) = sim.as_mut() else {
        return PalsStatus::InvalidArgument;
    };
    sim.set_error("");

    let parsed = (|| -> Result<(ManeuverKind, ControllerKind), String> {
        let m = required_str(maneuver, "maneuver")?;
        let c = required_str(controller, "controller")?;
        let m: ManeuverKind = m.parse().map_err(|e: PalsError| e.to_string())?;
        let c: ControllerKind = c.parse().map_err(|e: PalsError| e.to_string())?;
        Ok((m, c))
    })();
    let (maneuver, controller) = match parsed {
        Ok(pair) => pair,
        Err(m) => {
            sim.set_error(&m);
            return PalsStatus::InvalidArgument;
        }
    };

    let coefficients = match controller {
        ControllerKind::FfPidNon => match &sim.coefficients {
            Some(c) => Some(c),
            None => {
                sim.set_error(
                    "ff-pid-non requires coefficients; calibrate or load a file first",
                );
                return PalsStatus::ConfigError;
            }
        },
        _ => None,
    };

    let mut run_options = ManeuverOptions::from_config(&sim.config);
    if let Some(o) = options.as_ref() {
        if o.mes_mph > 0.0 {
            run_options.mes_mph = o.mes_mph;
        }
        if o.frequency_hz > 0.0 {
            run_options.frequency_hz = o.frequency_hz;
        }
        if o.amplitude_deg > 0.0 {
            run_options.amplitude_deg = o.amplitude_deg;
        }
        if o.scale > 0.0 {
            run_options.scale = o.scale;
        }
    }

    let outcome = catch_unwind(AssertUnwindSafe(|| {
        run_maneuver(
            &sim.plant,
            &sim.config,
            maneuver,
            controller,
            coefficients,
            &run_options,
        )
    }));
    let outcome = match outcome {
        Ok(Ok(o)) => o,
        Ok(Err(ref e)) => return sim.fail(e),
        Err(_) => {
            sim.set_error("internal panic during simulation");
            return PalsStatus::Internal;
        }
    };

    if !telemetry_csv_path.is_null() {
        let path = match required_str(telemetry_csv_path, "telemetry_csv_path") {
            Ok(s) => s,
            Err(m) => {
                sim.set_error(&m);
                return PalsStatus::InvalidArgument;
            }
        };
        let digits = sim.config.sim.csv_significant_digits;
        if let Err(ref e) = outcome.telemetry.save(Path::new(path), digits) {
            return sim.fail(e);
        }
    }

    if let Some(report) = report.as_mut() {
        let summary = match RunReport::new(&outcome.telemetry, None) {
            Ok(s) => s,
            Err(ref e) => return sim.fail(e),
        };
        *report = PalsRunReport {
            rms_roll: summary.rms_roll,
            rms_pitch: summary.rms_pitch,
            peak_roll: summary.peak_roll,
            peak_pitch: summary.peak_pitch,
            settling_time: summary.settling_time.unwrap_or(-1.0),
            rollover_time: summary.rolled_over.unwrap_or(-1.0),
            two_wheel_lift_count: summary.two_wheel_lift.len() as u32,
            closed_lift_count: summary
                .two_wheel_lift
                .iter()
                .filter(|iv| iv.is_closed())
                .count() as u32,
            truncated: outcome.truncated_roll.is_some(),
        };
    }
    PalsStatus::Ok
}

#[cfg(test)]
mod tests {
    use super::*;

    fn new_sim() -> *mut PalsSim {
        let mut sim: *mut PalsSim = ptr::null_mut();
        let status = unsafe { pals_sim_new(ptr::null(), &mut sim) };
        assert_eq!(status, PalsStatus::Ok);
        assert!(!sim.is_null());
        sim
    }

    fn cstring(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn version_is_a_nonempty_string() {
        let v = unsafe { CStr::from_ptr(pals_version()) };
        assert!(!v.to_str().unwrap().is_empty());
    }

    #[test]
    fn null_handling_is_defensive() {
        unsafe {
            assert_eq!(pals_sim_new(ptr::null(), ptr::null_mut()), PalsStatus::InvalidArgument);
            pals_sim_free(ptr::null_mut());
            assert_eq!(pals_sim_calibrate(ptr::null_mut()), PalsStatus::InvalidArgument);
            let msg = CStr::from_ptr(pals_sim_last_error(ptr::null()));
            assert_eq!(msg.to_str().unwrap(), "");
        }
    }

    #[test]
    fn passive_run_reports_and_writes_telemetry() {
        let sim = new_sim();
        let dir = tempfile::tempdir().unwrap();
        let csv = cstring(dir.path().join("run.csv").to_str().unwrap());
        let maneuver = cstring("fishhook");
        let controller = cstring("passive");
        let mut report = PalsRunReport {
            rms_roll: 0.0,
            rms_pitch: 0.0,
            peak_roll: 0.0,
            peak_pitch: 0.0,
            settling_time: 0.0,
            rollover_time: 0.0,
            two_wheel_lift_count: 0,
            closed_lift_count: 0,
            truncated: false,
        };
        let status = unsafe {
            pals_sim_run(
                sim,
                maneuver.as_ptr(),
                controller.as_ptr(),
                ptr::null(),
                csv.as_ptr(),
                &mut report,
            )
        };
        assert_eq!(status, PalsStatus::Ok);
        // This maneuver overwhelms the passive car, so the report must say so.
        assert!(report.truncated);
        assert!(report.rollover_time > 0.0);
        assert!(report.peak_roll > 0.7);
        assert!(report.two_wheel_lift_count >= 1);

        let telemetry =
            pals_core::telemetry::Telemetry::load(&dir.path().join("run.csv")).unwrap();
        assert!(telemetry.len() > 100);
        unsafe { pals_sim_free(sim) };
    }

    #[test]
    fn feedforward_requires_then_uses_coefficients() {
        let sim = new_sim();
        let maneuver = cstring("step-steer");
        let controller = cstring("ff-pid-non");

        let status = unsafe {
            pals_sim_run(sim, maneuver.as_ptr(), controller.as_ptr(), ptr::null(), ptr::null(), ptr::null_mut())
        };
        assert_eq!(status, PalsStatus::ConfigError);
        let msg = unsafe { CStr::from_ptr(pals_sim_last_error(sim)) };
        assert!(msg.to_str().unwrap().contains("coefficients"));

        assert_eq!(unsafe { pals_sim_calibrate(sim) }, PalsStatus::Ok);

        let dir = tempfile::tempdir().unwrap();
        let coeff_path = cstring(dir.path().join("coeffs.txt").to_str().unwrap());
        assert_eq!(
            unsafe { pals_sim_save_coefficients(sim, coeff_path.as_ptr()) },
            PalsStatus::Ok
        );
        assert_eq!(
            unsafe { pals_sim_load_coefficients(sim, coeff_path.as_ptr()) },
            PalsStatus::Ok
        );

        let mut report = PalsRunReport {
            rms_roll: 0.0,
            rms_pitch: 0.0,
            peak_roll: 0.0,
            peak_pitch: 0.0,
            settling_time: 0.0,
            rollover_time: 0.0,
            two_wheel_lift_count: 0,
            closed_lift_count: 0,
            truncated: false,
        };
        let status = unsafe {
            pals_sim_run(
                sim,
                maneuver.as_ptr(),
                controller.as_ptr(),
                ptr::null(),
                ptr::null(),
                &mut report,
            )
        };
        assert_eq!(status, PalsStatus::Ok);
        assert!(!report.truncated);
        assert!(report.rollover_time < 0.0);
        assert!(report.peak_roll < 0.2);
        unsafe { pals_sim_free(sim) };
    }

    #[test]
    fn unknown_names_are_invalid_arguments() {
        let sim = new_sim();
        let maneuver = cstring("barrel-roll");
        let controller = cstring("passive");
        let status = unsafe {
            pals_sim_run(sim, maneuver.as_ptr(), controller.as_ptr(), ptr::null(), ptr::null(), ptr::null_mut())
        };
        assert_eq!(status, PalsStatus::InvalidArgument);
        let msg = unsafe { CStr::from_ptr(pals_sim_last_error(sim)) };
        assert!(msg.to_str().unwrap().contains("barrel-roll"));
        unsafe { pals_sim_free(sim) };
    }

    #[test]
    fn generated_header_covers_the_api() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pals.h");
        let text = std::fs::read_to_string(header).unwrap();
        for name in [
            "pals_version",
            "pals_sim_new",
            "pals_sim_free",
            "pals_sim_run",
            "pals_sim_calibrate",
            "pals_sim_load_coefficients",
            "pals_sim_save_coefficients",
            "pals_sim_last_error",
            "PalsStatus",
            "PalsRunReport",
            "PalsRunOptions",
        ] {
            assert!(text.contains(name), "header is missing {name}");
        }
        // The handle must stay opaque.
        assert!(text.contains("typedef struct PalsSim PalsSim;"));
    }
}
