//! Plant state, per-corner force records, and driver inputs.

use nalgebra::Vector3;

use crate::params::NUM_CORNERS;

/// Full plant state: 6-DOF chassis plus four vertical unsprung DOF.
///
/// World frame: x forward (at zero yaw), y right, z down with the ground
/// plane at z = 0, so a point at height h above ground sits at z = -h.
/// Chassis attitude is ZYX Euler (yaw-pitch-roll); velocity and angular
/// velocity are expressed in the body frame.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    /// Simulation time [s].
    pub time: f64,
    /// World position of the chassis mass center [m], z down.
    pub position: Vector3<f64>,
    /// Attitude (roll, pitch, yaw) [rad].
    pub attitude: Vector3<f64>,
    /// Body-frame velocity (vx, vy, vz) [m/s].
    pub velocity: Vector3<f64>,
    /// Body-frame angular velocity (p, q, r) [rad/s].
    pub angular_velocity: Vector3<f64>,
    /// World-frame vertical position of each unsprung mass center [m],
    /// z down (a wheel center at height h has entry -h).
    pub unsprung_z: [f64; NUM_CORNERS],
    /// World-frame vertical velocity of each unsprung mass [m/s], z down.
    pub unsprung_vz: [f64; NUM_CORNERS],
}

impl VehicleState {
    pub fn roll(&self) -> f64 {
        self.attitude.x
    }

    pub fn pitch(&self) -> f64 {
        self.attitude.y
    }

    pub fn yaw(&self) -> f64 {
        self.attitude.z
    }

    /// Height of the chassis mass center above ground.
    pub fn ride_height(&self) -> f64 {
        -self.position.z
    }
}

/// Forces resolved at one integration step, per corner [N].
///
/// `vertical_tire` is the ground normal force (>= 0). `lateral_tire` and
/// `longitudinal_tire` are body-frame horizontal tire forces at the contact
/// patch. `suspension` is the spring+damper force along world vertical,
/// positive pushing chassis and wheel apart. `actuator` is the equivalent
/// vertical force beta*T with the same sign convention.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CornerForces {
    pub vertical_tire: [f64; NUM_CORNERS],
    pub lateral_tire: [f64; NUM_CORNERS],
    pub longitudinal_tire: [f64; NUM_CORNERS],
    pub suspension: [f64; NUM_CORNERS],
    pub actuator: [f64; NUM_CORNERS],
}

/// How the driver model commands longitudinal motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveMode {
    /// Hold a target speed [m/s] with the longitudinal PI loop.
    SpeedHold(f64),
    /// Command a longitudinal acceleration directly.
    AccelCommand,
}

/// Driver command for one integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverInput {
    /// Road-wheel steer angle [rad]; positive steers right.
    pub steer: f64,
    /// Commanded longitudinal acceleration [m/s^2]. For `SpeedHold` this
    /// is the already-resolved PI output.
    pub commanded_ax: f64,
    pub mode: DriveMode,
}

impl DriverInput {
    pub fn coast() -> Self {
        Self { steer: 0.0, commanded_ax: 0.0, mode: DriveMode::AccelCommand }
    }
}
