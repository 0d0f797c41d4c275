//! Driver models for the test maneuvers.
//!
//! Each driver turns wall-clock simulation time plus a little feedback
//! (forward speed, yaw rate, filtered lateral acceleration, roll rate)
//! into a road-wheel steer angle and a longitudinal request. Steering
//! targets are specified at the steering wheel and divided by the
//! steering ratio here, so the plant only ever sees road-wheel angles.
//!
//! The fishhook is split in two: stage 1 slowly ramps the wheel at 50 mph
//! to find the angle producing 0.3 g, stage 2 runs the ramp-reverse-hold
//! profile scaled by 6.5 times that angle, with the reversal timed by the
//! roll-rate drop the procedure prescribes.

use crate::params::ControlConfig;
use crate::{PalsError, Result};

/// 100 km/h in m/s, the constant-speed maneuvers' target.
pub const SPEED_100_KMH: f64 = 100.0 / 3.6;
/// 80 km/h in m/s, the brake-in-turn entry speed.
pub const SPEED_80_KMH: f64 = 80.0 / 3.6;
/// Meters per second per mph.
pub const MPH: f64 = 0.44704;

const DEG: f64 = std::f64::consts::PI / 180.0;

/// Feedback visible to a driver before each step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantView {
    pub time: f64,
    pub forward_speed: f64,
    pub yaw_rate: f64,
    pub roll_rate: f64,
    /// Lateral acceleration through the controller's low-pass [m/s^2].
    pub filtered_ay: f64,
}

/// Longitudinal request accompanying a steer angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Longitudinal {
    /// Track a speed [m/s]; the runner resolves this through the PI loop.
    HoldSpeed(f64),
    /// Command an acceleration [m/s^2] directly.
    Accel(f64),
}

/// One step of driver output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverOutput {
    /// Road-wheel steer [rad], positive right.
    pub steer: f64,
    pub longitudinal: Longitudinal,
    /// True when the maneuver is complete at this sample.
    pub finished: bool,
}

pub trait Driver {
    fn update(&mut self, view: &PlantView, dt: f64) -> DriverOutput;
}

/// Steering-wheel angle [rad] converted to road-wheel, clamped at the stop.
fn road(wheel_rad: f64, control: &ControlConfig) -> f64 {
    (wheel_rad / control.steering_ratio).clamp(-control.steer_stop, control.steer_stop)
}

/// Step steer: hold 100 km/h, ramp the wheel to 48.6 degrees at
/// 500 deg/s, hold five seconds total.
#[derive(Debug, Clone)]
pub struct StepSteer {
    target: f64,
    rate: f64,
    duration: f64,
}

impl StepSteer {
    pub fn new(control: &ControlConfig) -> Self {
        Self {
            target: road(48.6 * DEG, control),
            rate: 500.0 * DEG / control.steering_ratio,
            duration: 5.0,
        }
    }

    pub fn initial_speed(&self) -> f64 {
        SPEED_100_KMH
    }
}

impl Driver for StepSteer {
    fn update(&mut self, view: &PlantView, _dt: f64) -> DriverOutput {
        DriverOutput {
            steer: (self.rate * view.time).min(self.target),
            longitudinal: Longitudinal::HoldSpeed(SPEED_100_KMH),
            finished: view.time >= self.duration,
        }
    }
}

/// Steady cornering: hold 100 km/h while the wheel ramps linearly to
/// 60 degrees over `400 * scale` seconds. Optionally ends early once the
/// filtered lateral acceleration passes a threshold (the calibration
/// sweep stops before the ramp end drives the plant over).
#[derive(Debug, Clone)]
pub struct SteadyCornering {
    end_angle: f64,
    duration: f64,
    stop_at_ay: Option<f64>,
}

impl SteadyCornering {
    pub fn new(control: &ControlConfig, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(PalsError::Config(format!("scale must lie in (0, 1], got {scale}")));
        }
        Ok(Self { end_angle: road(60.0 * DEG, control), duration: 400.0 * scale, stop_at_ay: None })
    }

    pub fn with_ay_stop(mut self, ay: f64) -> Self {
        self.stop_at_ay = Some(ay);
        self
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn initial_speed(&self) -> f64 {
        SPEED_100_KMH
    }
}

impl Driver for SteadyCornering {
    fn update(&mut self, view: &PlantView, _dt: f64) -> DriverOutput {
        let frac = (view.time / self.duration).clamp(0.0, 1.0);
        let past_threshold = self.stop_at_ay.is_some_and(|ay| view.filtered_ay.abs() >= ay);
        DriverOutput {
            steer: self.end_angle * frac,
            longitudinal: Longitudinal::HoldSpeed(SPEED_100_KMH),
            finished: view.time >= self.duration || past_threshold,
        }
    }
}

/// Brake in turn: hold an 80 km/h, 100 m circle with a yaw-rate PI, then
/// freeze the steer and brake at -5 m/s^2 to standstill plus a one-second
/// tail.
#[derive(Debug, Clone)]
pub struct BrakeInTurn {
    steer: f64,
    integral: f64,
    frozen: Option<f64>,
    stop_time: Option<f64>,
    steer_stop: f64,
    brake_time: f64,
}

impl BrakeInTurn {
    pub const RADIUS: f64 = 100.0;
    const KP: f64 = 0.25;
    const KI: f64 = 0.20;
    const MAX_STEER_RATE: f64 = 0.3;

    pub fn new(control: &ControlConfig) -> Self {
        Self {
            steer: 0.0,
            integral: 0.0,
            frozen: None,
            stop_time: None,
            steer_stop: control.steer_stop,
            brake_time: 5.0,
        }
    }

    pub fn initial_speed(&self) -> f64 {
        SPEED_80_KMH
    }

    pub fn brake_time(&self) -> f64 {
        self.brake_time
    }
}

impl Driver for BrakeInTurn {
    fn update(&mut self, view: &PlantView, dt: f64) -> DriverOutput {
        if view.time < self.brake_time {
            let target_yaw_rate = SPEED_80_KMH / Self::RADIUS;
            let err = target_yaw_rate - view.yaw_rate;
            self.integral = (self.integral + err * dt).clamp(-0.5, 0.5);
            let command = Self::KP * err + Self::KI * self.integral;
            let step = (command - self.steer).clamp(-Self::MAX_STEER_RATE * dt, Self::MAX_STEER_RATE * dt);
            self.steer = (self.steer + step).clamp(-self.steer_stop, self.steer_stop);
            return DriverOutput {
                steer: self.steer,
                longitudinal: Longitudinal::HoldSpeed(SPEED_80_KMH),
                finished: false,
            };
        }
        let frozen = *self.frozen.get_or_insert(self.steer);
        if self.stop_time.is_none() && view.forward_speed < 0.1 {
            self.stop_time = Some(view.time);
        }
        let (ax, finished) = match self.stop_time {
            Some(stopped) => (0.0, view.time >= stopped + 1.0),
            None => (-5.0, false),
        };
        DriverOutput { steer: frozen, longitudinal: Longitudinal::Accel(ax), finished }
    }
}

/// Straight-line acceleration and emergency stop: accelerate from 1 km/h
/// to 100 km/h, hold two seconds, then command a hard stop and coast for
/// a one-second tail.
#[derive(Debug, Clone)]
pub struct AccelBrake {
    phase: AccelBrakePhase,
    /// Commanded during the launch [m/s^2]: 99 km/h over 6.5 s.
    pub accel: f64,
    /// Emergency stop command [m/s^2]; the realized deceleration is
    /// whatever the friction budget allows.
    pub emergency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum AccelBrakePhase {
    Launch,
    Hold { until: f64 },
    Emergency,
    Tail { until: f64 },
}

impl AccelBrake {
    pub fn new() -> Self {
        // 1 to 100 km/h is 27.5 m/s gained over 6.5 s.
        Self { phase: AccelBrakePhase::Launch, accel: 27.5 / 6.5, emergency: -16.0 }
    }

    pub fn initial_speed(&self) -> f64 {
        1.0 / 3.6
    }
}

impl Default for AccelBrake {
    fn default() -> Self {
        Self::new()
    }
}

impl Driver for AccelBrake {
    fn update(&mut self, view: &PlantView, _dt: f64) -> DriverOutput {
        loop {
            match self.phase {
                AccelBrakePhase::Launch => {
                    if view.forward_speed >= SPEED_100_KMH {
                        self.phase = AccelBrakePhase::Hold { until: view.time + 2.0 };
                        continue;
                    }
                    return DriverOutput {
                        steer: 0.0,
                        longitudinal: Longitudinal::Accel(self.accel),
                        finished: false,
                    };
                }
                AccelBrakePhase::Hold { until } => {
                    if view.time >= until {
                        self.phase = AccelBrakePhase::Emergency;
                        continue;
                    }
                    return DriverOutput {
                        steer: 0.0,
                        longitudinal: Longitudinal::Accel(0.0),
                        finished: false,
                    };
                }
                AccelBrakePhase::Emergency => {
                    if view.forward_speed < 0.1 {
                        self.phase = AccelBrakePhase::Tail { until: view.time + 1.0 };
                        continue;
                    }
                    return DriverOutput {
                        steer: 0.0,
                        longitudinal: Longitudinal::Accel(self.emergency),
                        finished: false,
                    };
                }
                AccelBrakePhase::Tail { until } => {
                    return DriverOutput {
                        steer: 0.0,
                        longitudinal: Longitudinal::Accel(0.0),
                        finished: view.time >= until,
                    };
                }
            }
        }
    }
}

/// Fishhook stage 1: at 50 mph, ramp the wheel at 10 deg/s until the
/// filtered lateral acceleration first reaches 0.3 g, and record the
/// wheel angle there. Gives up at 270 degrees of wheel.
#[derive(Debug, Clone)]
pub struct FishhookStage1 {
    rate: f64,
    abort_angle: f64,
    threshold: f64,
    /// Road-wheel angle captured at the 0.3 g crossing.
    pub captured: Option<f64>,
    done: bool,
}

impl FishhookStage1 {
    pub const SPEED: f64 = 50.0 * MPH;

    pub fn new(control: &ControlConfig) -> Self {
        Self {
            rate: 10.0 * DEG / control.steering_ratio,
            abort_angle: road(270.0 * DEG, control),
            threshold: 0.3 * crate::params::GRAVITY,
            captured: None,
            done: false,
        }
    }

    pub fn initial_speed(&self) -> f64 {
        Self::SPEED
    }
}

impl Driver for FishhookStage1 {
    fn update(&mut self, view: &PlantView, _dt: f64) -> DriverOutput {
        let steer = (self.rate * view.time).min(self.abort_angle);
        if self.captured.is_none() && view.filtered_ay >= self.threshold {
            self.captured = Some(steer);
            self.done = true;
        }
        if steer >= self.abort_angle {
            self.done = true;
        }
        DriverOutput {
            steer,
            longitudinal: Longitudinal::HoldSpeed(Self::SPEED),
            finished: self.done,
        }
    }
}

/// Fishhook stage 2: one second straight at the maneuver entrance speed
/// (throttle released throughout), ramp to +6.5 times the stage-1 angle
/// at 720 deg/s, dwell until the roll rate has peaked and fallen back
/// below 1.5 deg/s, reverse to the opposite angle, hold three seconds,
/// return to zero over two seconds, then a two-second tail.
#[derive(Debug, Clone)]
pub struct FishhookStage2 {
    target: f64,
    rate: f64,
    entrance_speed: f64,
    phase: FishhookPhase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum FishhookPhase {
    Straight,
    RampUp { start: f64 },
    Dwell { entered: f64, armed: bool },
    Reverse { start: f64 },
    HoldBack { until: f64 },
    Return { start: f64 },
    Tail { until: f64 },
}

impl FishhookStage2 {
    /// Roll-rate threshold arming and firing the reversal [rad/s].
    pub const ROLL_RATE_TRIGGER: f64 = 1.5 * DEG;
    /// Reversal waits at most this long after the ramp tops out [s].
    pub const DWELL_DEADLINE: f64 = 4.0;

    pub fn new(control: &ControlConfig, delta_ini_road: f64, entrance_speed: f64) -> Result<Self> {
        if !(delta_ini_road > 0.0) || !delta_ini_road.is_finite() {
            return Err(PalsError::Config(format!(
                "stage-1 steer angle must be positive, got {delta_ini_road}"
            )));
        }
        Ok(Self {
            target: (6.5 * delta_ini_road).clamp(0.0, control.steer_stop),
            rate: 720.0 * DEG / control.steering_ratio,
            entrance_speed,
            phase: FishhookPhase::Straight,
        })
    }

    pub fn initial_speed(&self) -> f64 {
        self.entrance_speed
    }
}

impl Driver for FishhookStage2 {
    fn update(&mut self, view: &PlantView, _dt: f64) -> DriverOutput {
        let t = view.time;
        let mut finished = false;
        // Phase boundaries are anchored to exact profile times; only the
        // reversal is pinned to the observed trigger instant.
        let steer = loop {
            match self.phase {
                FishhookPhase::Straight => {
                    if t >= 1.0 {
                        self.phase = FishhookPhase::RampUp { start: 1.0 };
                        continue;
                    }
                    break 0.0;
                }
                FishhookPhase::RampUp { start } => {
                    if t >= start + self.target / self.rate {
                        self.phase =
                            FishhookPhase::Dwell { entered: start + self.target / self.rate, armed: false };
                        continue;
                    }
                    break self.rate * (t - start);
                }
                FishhookPhase::Dwell { entered, armed } => {
                    let magnitude = view.roll_rate.abs();
                    let armed = armed || magnitude > Self::ROLL_RATE_TRIGGER;
                    let fire = (armed && magnitude < Self::ROLL_RATE_TRIGGER)
                        || t >= entered + Self::DWELL_DEADLINE;
                    if fire {
                        self.phase = FishhookPhase::Reverse { start: t };
                        continue;
                    }
                    self.phase = FishhookPhase::Dwell { entered, armed };
                    break self.target;
                }
                FishhookPhase::Reverse { start } => {
                    let reach = start + 2.0 * self.target / self.rate;
                    if t >= reach {
                        self.phase = FishhookPhase::HoldBack { until: reach + 3.0 };
                        continue;
                    }
                    break self.target - self.rate * (t - start);
                }
                FishhookPhase::HoldBack { until } => {
                    if t >= until {
                        self.phase = FishhookPhase::Return { start: until };
                        continue;
                    }
                    break -self.target;
                }
                FishhookPhase::Return { start } => {
                    if t >= start + 2.0 {
                        self.phase = FishhookPhase::Tail { until: start + 4.0 };
                        continue;
                    }
                    break -self.target * (1.0 - (t - start) / 2.0);
                }
                FishhookPhase::Tail { until } => {
                    finished = t >= until;
                    break 0.0;
                }
            }
        };
        DriverOutput { steer, longitudinal: Longitudinal::Accel(0.0), finished }
    }
}

/// Sinusoidal steer at 100 km/h: ten full periods of the given frequency.
#[derive(Debug, Clone)]
pub struct SinusoidSteer {
    amplitude: f64,
    omega: f64,
    duration: f64,
}

impl SinusoidSteer {
    pub fn new(control: &ControlConfig, frequency_hz: f64, amplitude_wheel_deg: f64) -> Result<Self> {
        if !(frequency_hz > 0.0) {
            return Err(PalsError::Config(format!("frequency must be positive, got {frequency_hz}")));
        }
        Ok(Self {
            amplitude: road(amplitude_wheel_deg * DEG, control),
            omega: 2.0 * std::f64::consts::PI * frequency_hz,
            duration: 10.0 / frequency_hz,
        })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn initial_speed(&self) -> f64 {
        SPEED_100_KMH
    }
}

impl Driver for SinusoidSteer {
    fn update(&mut self, view: &PlantView, _dt: f64) -> DriverOutput {
        DriverOutput {
            steer: self.amplitude * (self.omega * view.time).sin(),
            longitudinal: Longitudinal::HoldSpeed(SPEED_100_KMH),
            finished: view.time >= self.duration,
        }
    }
}

/// Constant-acceleration straight run used by the calibration sweeps.
#[derive(Debug, Clone)]
pub struct ConstantAccel {
    pub ax: f64,
    pub duration: f64,
}

impl Driver for ConstantAccel {
    fn update(&mut self, view: &PlantView, _dt: f64) -> DriverOutput {
        DriverOutput {
            steer: 0.0,
            longitudinal: Longitudinal::Accel(self.ax),
            finished: view.time >= self.duration,
        }
    }
}

/// Longitudinal PI resolving `HoldSpeed` into an acceleration command.
#[derive(Debug, Clone)]
pub struct SpeedHoldPi {
    kp: f64,
    ki: f64,
    limit: f64,
    integral: f64,
}

impl Default for SpeedHoldPi {
    fn default() -> Self {
        Self { kp: 1.5, ki: 0.4, limit: 6.0, integral: 0.0 }
    }
}

impl SpeedHoldPi {
    pub fn update(&mut self, target: f64, forward_speed: f64, dt: f64) -> f64 {
        let err = target - forward_speed;
        self.integral += err * dt;
        let integral_cap = self.limit / self.ki;
        self.integral = self.integral.clamp(-integral_cap, integral_cap);
        (self.kp * err + self.ki * self.integral).clamp(-self.limit, self.limit)
    }
}

/// Maneuver selection, by the names the CLI exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManeuverKind {
    StepSteer,
    SteadyCornering,
    BrakeInTurn,
    AccelBrake,
    Fishhook,
    Sinusoid,
}

impl ManeuverKind {
    pub const ALL: [ManeuverKind; 6] = [
        ManeuverKind::StepSteer,
        ManeuverKind::SteadyCornering,
        ManeuverKind::BrakeInTurn,
        ManeuverKind::AccelBrake,
        ManeuverKind::Fishhook,
        ManeuverKind::Sinusoid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ManeuverKind::StepSteer => "step-steer",
            ManeuverKind::SteadyCornering => "steady-cornering",
            ManeuverKind::BrakeInTurn => "brake-in-turn",
            ManeuverKind::AccelBrake => "accel-brake",
            ManeuverKind::Fishhook => "fishhook",
            ManeuverKind::Sinusoid => "sinusoid",
        }
    }
}

impl std::str::FromStr for ManeuverKind {
    type Err = PalsError;

    fn from_str(s: &str) -> Result<Self> {
        ManeuverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ManeuverKind::ALL.iter().map(|k| k.name()).collect();
                PalsError::Config(format!("unknown maneuver {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

impl std::fmt::Display for ManeuverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
