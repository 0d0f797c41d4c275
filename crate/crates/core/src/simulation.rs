//! Closed-loop runner: drives the plant with a maneuver driver and a
//! controller, records telemetry, and handles the fishhook's two-stage
//! orchestration.
//!
//! Per integrator step the runner feeds the driver a small feedback view,
//! resolves speed-hold requests through the longitudinal PI, updates the
//! controller on low-passed accelerations, then advances the plant. Rows
//! are recorded every `decimation` steps at the pre-step state so forces,
//! torques, and state share one timestamp. A run that reaches 1.4 rad of
//! roll is truncated and flagged rather than failed; genuine integrator
//! blow-ups surface as errors.

use crate::compensation::CompensationCoefficients;
use crate::controllers::{Controller, ControllerKind, Measurements};
use crate::maneuvers::{
    AccelBrake, BrakeInTurn, ConstantAccel, Driver, DriverOutput, FishhookStage1, FishhookStage2,
    Longitudinal, ManeuverKind, PlantView, SinusoidSteer, SpeedHoldPi, StepSteer, SteadyCornering,
    MPH,
};
use crate::params::Config;
use crate::plant::Plant;
use crate::state::{DriveMode, DriverInput, VehicleState};
use crate::telemetry::{Telemetry, TelemetryRow};
use crate::{PalsError, Result};

/// Roll magnitude at which a run is cut short and flagged [rad].
pub const ROLL_TRUNCATION: f64 = 1.4;

/// First-order low-pass with a cutoff in Hz.
#[derive(Debug, Clone, Copy)]
pub struct LowPass {
    value: f64,
    tau: f64,
}

impl LowPass {
    pub fn new(cutoff_hz: f64) -> Self {
        Self { value: 0.0, tau: 1.0 / (2.0 * std::f64::consts::PI * cutoff_hz) }
    }

    pub fn update(&mut self, x: f64, dt: f64) -> f64 {
        self.value += (x - self.value) * (dt / (self.tau + dt));
        self.value
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Result of one closed-loop run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub telemetry: Telemetry,
    /// Set when the run was cut short by the roll limit, with the time.
    pub truncated_roll: Option<f64>,
    pub final_state: VehicleState,
}

impl RunOutcome {
    pub fn rolled_past_limit(&self) -> bool {
        self.truncated_roll.is_some()
    }
}

/// Runs `driver` against a fresh controller of the given kind from the
/// given initial state. `time_limit` is a hard cap against drivers that
/// never report completion.
pub fn run_driver(
    plant: &Plant,
    config: &Config,
    kind: ControllerKind,
    coefficients: Option<&CompensationCoefficients>,
    driver: &mut dyn Driver,
    initial_state: VehicleState,
    time_limit: f64,
) -> Result<RunOutcome> {
    let mut controller = Controller::new(kind, config, coefficients.cloned())?;
    let dt = config.sim.dt;
    let decimation = config.sim.decimation;
    let mut state = initial_state;
    let mut speed_pi = SpeedHoldPi::default();
    let mut ax_filter = LowPass::new(config.control.accel_filter_cutoff_hz);
    let mut ay_filter = LowPass::new(config.control.accel_filter_cutoff_hz);

    let mut telemetry = Telemetry::new();
    telemetry.set_meta("controller", kind.name());
    telemetry.set_meta("dt", dt * decimation as f64);
    telemetry.set_meta("integrator_dt", dt);
    telemetry.set_meta("decimation", decimation);

    let mut truncated_roll = None;
    let mut step_index: u64 = 0;
    loop {
        let view = PlantView {
            time: state.time,
            forward_speed: state.velocity.x,
            yaw_rate: state.angular_velocity.z,
            roll_rate: state.angular_velocity.x,
            filtered_ay: ay_filter.value(),
        };
        let DriverOutput { steer, longitudinal, finished } = driver.update(&view, dt);
        if finished {
            break;
        }
        if state.time >= time_limit {
            telemetry.set_meta("time_limit_hit", state.time);
            break;
        }

        let (commanded_ax, mode) = match longitudinal {
            Longitudinal::HoldSpeed(target) => {
                (speed_pi.update(target, state.velocity.x, dt), DriveMode::SpeedHold(target))
            }
            Longitudinal::Accel(ax) => (ax, DriveMode::AccelCommand),
        };
        let input = DriverInput { steer, commanded_ax, mode };

        let measurements = Measurements {
            pitch: state.pitch(),
            roll: state.roll(),
            ax: ax_filter.value(),
            ay: ay_filter.value(),
        };
        let torques = controller.update(&measurements, dt);

        let (next, info) = plant.step(&state, &input, &torques, dt)?;

        if step_index % decimation as u64 == 0 {
            telemetry.push(TelemetryRow::from_parts(
                &state,
                &info.forces,
                controller.last_reference,
                torques,
                controller.last_feedforward,
                info.measured_ax,
                info.measured_ay,
                steer,
                commanded_ax,
            ));
        }

        ax_filter.update(info.measured_ax, dt);
        ay_filter.update(info.measured_ay, dt);
        state = next;
        step_index += 1;

        if state.roll().abs() >= ROLL_TRUNCATION {
            truncated_roll = Some(state.time);
            telemetry.set_meta("truncated_roll", state.time);
            break;
        }
    }

    Ok(RunOutcome { telemetry, truncated_roll, final_state: state })
}

/// Maneuver parameters resolvable from the CLI.
#[derive(Debug, Clone, Copy)]
pub struct ManeuverOptions {
    /// Fishhook maneuver entrance speed [mph].
    pub mes_mph: f64,
    /// Sinusoid frequency [Hz].
    pub frequency_hz: f64,
    /// Sinusoid steering-wheel amplitude [deg].
    pub amplitude_deg: f64,
    /// Steady-cornering duration factor.
    pub scale: f64,
}

impl ManeuverOptions {
    pub fn from_config(config: &Config) -> Self {
        Self {
            mes_mph: 50.0,
            frequency_hz: config.sweeps.frequencies_hz.first().copied().unwrap_or(0.2),
            amplitude_deg: config.sweeps.sinusoid_amplitude_deg,
            scale: config.sweeps.steady_cornering_scale,
        }
    }
}

/// Runs the fishhook's slow stage-1 ramp under the same controller and
/// returns the road-wheel angle at the 0.3 g crossing.
pub fn fishhook_delta_ini(
    plant: &Plant,
    config: &Config,
    kind: ControllerKind,
    coefficients: Option<&CompensationCoefficients>,
) -> Result<f64> {
    let mut stage1 = FishhookStage1::new(&config.control);
    let initial = plant.equilibrium_at_speed(stage1.initial_speed());
    run_driver(plant, config, kind, coefficients, &mut stage1, initial, 40.0)?;
    stage1.captured.ok_or_else(|| {
        PalsError::Stage1NotConverged(
            "lateral acceleration never reached 0.3 g before the wheel limit".into(),
        )
    })
}

/// Builds and runs one named maneuver end to end, including the fishhook
/// stage-1 prerequisite. Telemetry carries the resolved parameters.
pub fn run_maneuver(
    plant: &Plant,
    config: &Config,
    maneuver: ManeuverKind,
    kind: ControllerKind,
    coefficients: Option<&CompensationCoefficients>,
    options: &ManeuverOptions,
) -> Result<RunOutcome> {
    let control = &config.control;
    let mut outcome = match maneuver {
        ManeuverKind::StepSteer => {
            let mut driver = StepSteer::new(control);
            let initial = plant.equilibrium_at_speed(driver.initial_speed());
            run_driver(plant, config, kind, coefficients, &mut driver, initial, 6.0)?
        }
        ManeuverKind::SteadyCornering => {
            let mut driver = SteadyCornering::new(control, options.scale)?;
            let initial = plant.equilibrium_at_speed(driver.initial_speed());
            let limit = driver.duration() + 1.0;
            let mut outcome =
                run_driver(plant, config, kind, coefficients, &mut driver, initial, limit)?;
            outcome.telemetry.set_meta("scale", options.scale);
            outcome
        }
        ManeuverKind::BrakeInTurn => {
            let mut driver = BrakeInTurn::new(control);
            let initial = plant.equilibrium_at_speed(driver.initial_speed());
            let mut outcome =
                run_driver(plant, config, kind, coefficients, &mut driver, initial, 25.0)?;
            outcome.telemetry.set_meta("brake_time", driver.brake_time());
            outcome
        }
        ManeuverKind::AccelBrake => {
            let mut driver = AccelBrake::new();
            let initial = plant.equilibrium_at_speed(driver.initial_speed());
            run_driver(plant, config, kind, coefficients, &mut driver, initial, 30.0)?
        }
        ManeuverKind::Fishhook => {
            let delta_ini = fishhook_delta_ini(plant, config, kind, coefficients)?;
            let speed = options.mes_mph * MPH;
            let mut driver = FishhookStage2::new(control, delta_ini, speed)?;
            let initial = plant.equilibrium_at_speed(speed);
            let mut outcome =
                run_driver(plant, config, kind, coefficients, &mut driver, initial, 30.0)?;
            outcome.telemetry.set_meta("mes_mph", options.mes_mph);
            outcome.telemetry.set_meta("delta_ini_road", format!("{delta_ini:.6e}"));
            outcome
        }
        ManeuverKind::Sinusoid => {
            let mut driver = SinusoidSteer::new(control, options.frequency_hz, options.amplitude_deg)?;
            let initial = plant.equilibrium_at_speed(driver.initial_speed());
            let limit = driver.duration() + 1.0;
            let mut outcome =
                run_driver(plant, config, kind, coefficients, &mut driver, initial, limit)?;
            outcome.telemetry.set_meta("frequency_hz", options.frequency_hz);
            outcome.telemetry.set_meta("amplitude_deg", options.amplitude_deg);
            outcome
        }
    };
    outcome.telemetry.set_meta("maneuver", maneuver.name());
    Ok(outcome)
}

/// Constant-acceleration straight run from an arbitrary entry speed; the
/// calibration sweep's workhorse.
pub fn run_constant_accel(
    plant: &Plant,
    config: &Config,
    kind: ControllerKind,
    coefficients: Option<&CompensationCoefficients>,
    ax: f64,
    entry_speed: f64,
    duration: f64,
) -> Result<RunOutcome> {
    let mut driver = ConstantAccel { ax, duration };
    let initial = plant.equilibrium_at_speed(entry_speed);
    run_driver(plant, config, kind, coefficients, &mut driver, initial, duration + 1.0)
}
