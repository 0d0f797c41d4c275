//! Vehicle, controller, and simulation parameters with TOML config I/O.
//!
//! Defaults describe a heavy SUV-class test vehicle. Every field can be
//! overridden from a config file; `Config::load` rejects unknown keys so
//! typos fail loudly.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::{PalsError, Result};

/// Standard gravity [m/s^2].
pub const GRAVITY: f64 = 9.81;

/// Corner count. Index order is fixed: 0 = front-left, 1 = front-right,
/// 2 = rear-left, 3 = rear-right.
pub const NUM_CORNERS: usize = 4;

/// Corner indices of the left side (front-left, rear-left).
pub const LEFT_CORNERS: [usize; 2] = [0, 2];
/// Corner indices of the right side (front-right, rear-right).
pub const RIGHT_CORNERS: [usize; 2] = [1, 3];

/// Full-car physical parameters.
///
/// Lengths in m, masses in kg, stiffnesses in N/m, damping in N·s/m,
/// inertias in kg·m^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    /// Sprung (chassis) mass.
    pub sprung_mass: f64,
    /// Unsprung mass per front corner (wheel, upright, rocker share).
    pub unsprung_mass_front: f64,
    /// Unsprung mass per rear corner.
    pub unsprung_mass_rear: f64,
    /// Chassis mass center height above ground at nominal ride.
    pub cmc_height: f64,
    /// Longitudinal distance, mass center to front axle.
    pub wheelbase_front: f64,
    /// Longitudinal distance, mass center to rear axle.
    pub wheelbase_rear: f64,
    /// Front track width.
    pub track_front: f64,
    /// Rear track width.
    pub track_rear: f64,
    pub wheel_radius_front: f64,
    pub wheel_radius_rear: f64,
    /// Suspension spring rate per front corner.
    pub spring_stiffness_front: f64,
    /// Suspension spring rate per rear corner.
    pub spring_stiffness_rear: f64,
    /// Suspension damper rate per front corner.
    pub suspension_damping_front: f64,
    /// Suspension damper rate per rear corner.
    pub suspension_damping_rear: f64,
    /// Vertical tire spring rate (all corners).
    pub tire_stiffness: f64,
    /// Vertical tire damping (all corners).
    pub tire_damping: f64,
    /// Rear share of the outboard compensation distribution, sigma.
    /// The front share is 1 - sigma.
    pub ocd_rear_ratio: f64,
    /// Aerodynamic downforce coefficient, front axle (0 disables).
    /// Per-corner downforce is 0.5 * c * vx^2.
    pub aero_coeff_front: f64,
    /// Aerodynamic downforce coefficient, rear axle.
    pub aero_coeff_rear: f64,
    /// Chassis roll inertia about x.
    pub roll_inertia: f64,
    /// Chassis pitch inertia about y.
    pub pitch_inertia: f64,
    /// Chassis yaw inertia about z.
    pub yaw_inertia: f64,
    /// Cornering stiffness load sensitivity c1 [1/rad]:
    /// C_alpha(Fz) = c1*Fz - c2*Fz^2.
    pub cornering_c1: f64,
    /// Cornering stiffness load sensitivity c2 [1/(N·rad)].
    pub cornering_c2: f64,
    /// Tire-road friction coefficient.
    pub friction_coefficient: f64,
    /// Rocker-torque to equivalent-vertical-force factor per corner
    /// [rad/m]: F = beta * T. Sign convention: positive torque pushes the
    /// chassis corner up and the wheel down.
    pub beta: [f64; NUM_CORNERS],
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            sprung_mass: 2700.0,
            unsprung_mass_front: 62.5,
            unsprung_mass_rear: 62.5,
            cmc_height: 0.71,
            wheelbase_front: 1.538,
            wheelbase_rear: 1.538,
            track_front: 1.677,
            track_rear: 1.696,
            wheel_radius_front: 0.385,
            wheel_radius_rear: 0.385,
            spring_stiffness_front: 53_500.0,
            spring_stiffness_rear: 53_100.0,
            // 0.3 damping ratio of the corner bounce mode:
            // c = 2*0.3*sqrt(k_s * m_s/4), rounded to 0.1 N·s/m.
            suspension_damping_front: 3605.6,
            suspension_damping_rear: 3592.1,
            tire_stiffness: 290_000.0,
            tire_damping: 300.0,
            ocd_rear_ratio: 0.43,
            aero_coeff_front: 0.0,
            aero_coeff_rear: 0.0,
            roll_inertia: 900.0,
            // Dynamic index I/(m_s*b_f*b_r) ~ 0.7, where lower values let
            // the brake-onset pitch transient outrun the feedback loop.
            pitch_inertia: 4500.0,
            yaw_inertia: 3200.0,
            cornering_c1: 15.0,
            cornering_c2: 5.0e-4,
            friction_coefficient: 1.065,
            beta: [20.0; NUM_CORNERS],
        }
    }
}

impl VehicleParams {
    pub fn total_mass(&self) -> f64 {
        self.sprung_mass + 2.0 * self.unsprung_mass_front + 2.0 * self.unsprung_mass_rear
    }

    pub fn total_weight(&self) -> f64 {
        self.total_mass() * GRAVITY
    }

    pub fn wheelbase(&self) -> f64 {
        self.wheelbase_front + self.wheelbase_rear
    }

    /// Body-frame (x, y) of a corner's suspension attachment, at mass
    /// center height. y is positive to the right.
    pub fn corner_position(&self, corner: usize) -> (f64, f64) {
        match corner {
            0 => (self.wheelbase_front, -0.5 * self.track_front),
            1 => (self.wheelbase_front, 0.5 * self.track_front),
            2 => (-self.wheelbase_rear, -0.5 * self.track_rear),
            3 => (-self.wheelbase_rear, 0.5 * self.track_rear),
            _ => panic!("corner index out of range: {corner}"),
        }
    }

    pub fn is_front(corner: usize) -> bool {
        corner < 2
    }

    pub fn unsprung_mass(&self, corner: usize) -> f64 {
        if Self::is_front(corner) {
            self.unsprung_mass_front
        } else {
            self.unsprung_mass_rear
        }
    }

    pub fn wheel_radius(&self, corner: usize) -> f64 {
        if Self::is_front(corner) {
            self.wheel_radius_front
        } else {
            self.wheel_radius_rear
        }
    }

    pub fn spring_stiffness(&self, corner: usize) -> f64 {
        if Self::is_front(corner) {
            self.spring_stiffness_front
        } else {
            self.spring_stiffness_rear
        }
    }

    pub fn suspension_damping(&self, corner: usize) -> f64 {
        if Self::is_front(corner) {
            self.suspension_damping_front
        } else {
            self.suspension_damping_rear
        }
    }

    /// Static sprung load carried by one corner's suspension.
    pub fn static_corner_sprung_load(&self, corner: usize) -> f64 {
        let l = self.wheelbase();
        // Front axle carries the rear-lever share and vice versa.
        let axle_share = if Self::is_front(corner) {
            self.wheelbase_rear / l
        } else {
            self.wheelbase_front / l
        };
        0.5 * axle_share * self.sprung_mass * GRAVITY
    }

    /// Static vertical tire load at one corner (sprung share plus the
    /// unsprung weight standing on the tire).
    pub fn static_corner_tire_load(&self, corner: usize) -> f64 {
        self.static_corner_sprung_load(corner) + self.unsprung_mass(corner) * GRAVITY
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sprung_mass", self.sprung_mass),
            ("unsprung_mass_front", self.unsprung_mass_front),
            ("unsprung_mass_rear", self.unsprung_mass_rear),
            ("cmc_height", self.cmc_height),
            ("wheelbase_front", self.wheelbase_front),
            ("wheelbase_rear", self.wheelbase_rear),
            ("track_front", self.track_front),
            ("track_rear", self.track_rear),
            ("wheel_radius_front", self.wheel_radius_front),
            ("wheel_radius_rear", self.wheel_radius_rear),
            ("spring_stiffness_front", self.spring_stiffness_front),
            ("spring_stiffness_rear", self.spring_stiffness_rear),
            ("tire_stiffness", self.tire_stiffness),
            ("roll_inertia", self.roll_inertia),
            ("pitch_inertia", self.pitch_inertia),
            ("yaw_inertia", self.yaw_inertia),
            ("friction_coefficient", self.friction_coefficient),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(PalsError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("suspension_damping_front", self.suspension_damping_front),
            ("suspension_damping_rear", self.suspension_damping_rear),
            ("tire_damping", self.tire_damping),
            ("aero_coeff_front", self.aero_coeff_front),
            ("aero_coeff_rear", self.aero_coeff_rear),
            ("cornering_c1", self.cornering_c1),
            ("cornering_c2", self.cornering_c2),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(PalsError::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.ocd_rear_ratio) {
            return Err(PalsError::Config(format!(
                "ocd_rear_ratio must lie in [0, 1], got {}",
                self.ocd_rear_ratio
            )));
        }
        for (i, b) in self.beta.iter().enumerate() {
            if *b == 0.0 || !b.is_finite() {
                return Err(PalsError::Config(format!(
                    "beta for corner {} must be finite and non-zero, got {b}",
                    i + 1
                )));
            }
        }
        if self.cmc_height <= self.wheel_radius_front.min(self.wheel_radius_rear) {
            return Err(PalsError::Config(
                "cmc_height must exceed the wheel radius".into(),
            ));
        }
        Ok(())
    }
}

/// One PID gain triple. Units: kp [N·m/rad], ki [N·m/(rad·s)], kd [N·m·s/rad].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidTriple {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

/// Gains for the two attitude objectives, split by axle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub pitch_front: PidTriple,
    pub pitch_rear: PidTriple,
    pub roll_front: PidTriple,
    pub roll_rear: PidTriple,
}

/// Gain sets for the two active schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainSets {
    /// Stand-alone multi-objective PID.
    pub pals_pid: PidGains,
    /// Retuned (softer) PID that runs under the feedforward layer.
    pub ff_pid: PidGains,
}

impl Default for GainSets {
    fn default() -> Self {
        Self {
            pals_pid: PidGains {
                pitch_front: PidTriple { kp: 1000.0, ki: 20_000.0, kd: 4.0 },
                pitch_rear: PidTriple { kp: 1000.0, ki: 20_000.0, kd: 4.0 },
                roll_front: PidTriple { kp: 500.0, ki: 5000.0, kd: 4.0 },
                roll_rear: PidTriple { kp: 500.0, ki: 5000.0, kd: 4.0 },
            },
            ff_pid: PidGains {
                pitch_front: PidTriple { kp: 100.0, ki: 2500.0, kd: 2.0 },
                pitch_rear: PidTriple { kp: 100.0, ki: 2500.0, kd: 2.0 },
                roll_front: PidTriple { kp: 50.0, ki: 1500.0, kd: 2.0 },
                roll_rear: PidTriple { kp: 50.0, ki: 1500.0, kd: 2.0 },
            },
        }
    }
}

/// Actuator limits and controller filter constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConfig {
    /// Hard torque saturation per rocker [N·m].
    pub peak_torque: f64,
    /// Continuous torque rating, front rockers [N·m] (warning metric only).
    pub continuous_torque_front: f64,
    /// Continuous torque rating, rear rockers [N·m].
    pub continuous_torque_rear: f64,
    /// First-order actuator tracking time constant [s].
    pub actuator_tau: f64,
    /// First-order low-pass on the PID derivative [s].
    pub derivative_tau: f64,
    /// Cutoff of the acceleration low-pass feeding the feedforward [Hz].
    pub accel_filter_cutoff_hz: f64,
    /// Steering-wheel to road-wheel ratio.
    pub steering_ratio: f64,
    /// Road-wheel steering stop [rad].
    pub steer_stop: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            peak_torque: 273.0,
            continuous_torque_front: 166.0,
            continuous_torque_rear: 165.0,
            actuator_tau: 0.010,
            derivative_tau: 0.010,
            accel_filter_cutoff_hz: 5.0,
            // 20:1 lands the step-steer plateau near 8 m/s^2 lateral; a
            // quicker rack makes the front axle plow well short of that.
            steering_ratio: 20.0,
            steer_stop: 0.6,
        }
    }
}

impl ControlConfig {
    pub fn continuous_torque(&self, corner: usize) -> f64 {
        if VehicleParams::is_front(corner) {
            self.continuous_torque_front
        } else {
            self.continuous_torque_rear
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak_torque > 0.0) {
            return Err(PalsError::Config("peak_torque must be positive".into()));
        }
        if !(self.actuator_tau > 0.0) || !(self.derivative_tau > 0.0) {
            return Err(PalsError::Config("actuator and derivative time constants must be positive".into()));
        }
        if !(self.accel_filter_cutoff_hz > 0.0) {
            return Err(PalsError::Config("accel_filter_cutoff_hz must be positive".into()));
        }
        if !(self.steering_ratio > 0.0) || !(self.steer_stop > 0.0) {
            return Err(PalsError::Config("steering_ratio and steer_stop must be positive".into()));
        }
        Ok(())
    }
}

/// Integration and telemetry settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Fixed integrator step [s]. Must lie in (0, 0.005].
    pub dt: f64,
    /// Telemetry keeps every n-th integrator step.
    pub decimation: usize,
    /// Significant digits written to telemetry CSV.
    pub csv_significant_digits: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 0.001, decimation: 10, csv_significant_digits: 9 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.005) {
            return Err(PalsError::Config(format!(
                "dt must lie in (0, 0.005], got {}",
                self.dt
            )));
        }
        if self.decimation == 0 {
            return Err(PalsError::Config("decimation must be >= 1".into()));
        }
        if !(1..=17).contains(&self.csv_significant_digits) {
            return Err(PalsError::Config("csv_significant_digits must lie in 1..=17".into()));
        }
        Ok(())
    }
}

/// Sweep lists for the CLI and the acceptance studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Fishhook maneuver entrance speeds [mph].
    pub mes_mph: Vec<f64>,
    /// Sinusoid steer frequencies [Hz].
    pub frequencies_hz: Vec<f64>,
    /// Sinusoid steering-wheel amplitude [deg].
    pub sinusoid_amplitude_deg: f64,
    /// Desk-scale factor for the slow cornering ramp (1.0 = full 400 s).
    pub steady_cornering_scale: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            mes_mph: vec![35.0, 40.0, 45.0, 50.0],
            frequencies_hz: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            sinusoid_amplitude_deg: 25.0,
            steady_cornering_scale: 0.1,
        }
    }
}

/// Root config: everything a run needs besides the maneuver choice.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub vehicle: VehicleParams,
    pub gains: GainSets,
    pub control: ControlConfig,
    pub sim: SimConfig,
    pub sweeps: SweepConfig,
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate()?;
        self.control.validate()?;
        self.sim.validate()?;
        if self.sweeps.mes_mph.is_empty() || self.sweeps.frequencies_hz.is_empty() {
            return Err(PalsError::Config("sweep lists must not be empty".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: Config = toml::from_str(&text)
            .map_err(|e| PalsError::Parse(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| PalsError::Parse(format!("serializing config: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}
