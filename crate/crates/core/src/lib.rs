//! Full-car vehicle dynamics with a parallel active link suspension (PALS)
//! control stack.
//!
//! The crate simulates a 14-DOF full car (6-DOF chassis plus four vertical
//! unsprung masses) whose double-wishbone corners carry a rocker-actuated
//! active link in parallel with the spring-damper. Rocker torque at each
//! corner converts to an equivalent vertical force between sprung and
//! unsprung mass through a geometry factor `beta`, which is what the
//! controllers command.
//!
//! Modules, roughly bottom-up:
//!
//! - [`params`]: vehicle/controller/simulation parameters and config I/O
//! - [`state`]: plant state and per-corner force records
//! - [`plant`]: tire forces, rigid-body dynamics, fixed-step RK4
//! - [`compensation`]: steady-state and polynomial load-transfer models,
//!   torque/force conversion
//! - [`controllers`]: multi-objective PID, feedforward, actuator tracking
//! - [`maneuvers`]: open/closed-loop driver inputs for the six test maneuvers
//! - [`simulation`]: the run loop tying plant + controller + driver together
//! - [`fitting`]: calibration sweeps and least-squares coefficient fits
//! - [`telemetry`]: time-series capture and CSV round-trip
//! - [`metrics`]: run reports, lift/rollover detection, RMS comparisons
//! - [`svg`]: standalone plot emission for the CLI
//!
//! Axis conventions (used consistently everywhere): body frame x forward,
//! y right, z down; positive roll = right side down, positive pitch =
//! nose up, positive yaw = right turn. Corners are indexed 1 = front-left,
//! 2 = front-right, 3 = rear-left, 4 = rear-right (arrays are 0-based,
//! telemetry columns 1-based).

pub mod compensation;
pub mod controllers;
pub mod fitting;
pub mod maneuvers;
pub mod metrics;
pub mod params;
pub mod plant;
pub mod simulation;
pub mod state;
pub mod svg;
pub mod telemetry;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, thiserror::Error)]
pub enum PalsError {
    /// Invalid parameter set, config file, or operation precondition.
    #[error("config error: {0}")]
    Config(String),
    /// Integration produced a state outside sanity bounds (NaN, absurd
    /// speeds or displacements). Large roll is not divergence; it is
    /// reported as rollover by the metrics module.
    #[error("numerical divergence at t = {time:.3} s: {what}")]
    NumericalDivergence { time: f64, what: String },
    /// A calibration sweep rolled over, diverged, or produced too few
    /// usable samples.
    #[error("calibration aborted: {0}")]
    CalibrationAborted(String),
    /// The least-squares design matrix is numerically rank deficient.
    #[error("ill-conditioned fit: design matrix condition number {cond:.3e} exceeds {limit:.1e}")]
    IllConditioned { cond: f64, limit: f64 },
    /// The fishhook's slow-ramp stage never reached the target lateral
    /// acceleration before the steering stop.
    #[error("fishhook stage 1 did not converge: {0}")]
    Stage1NotConverged(String),
    /// Telemetry series cannot be compared sample-by-sample.
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    /// A telemetry file or series violates its structural contract.
    #[error("invalid telemetry: {0}")]
    InvalidTelemetry(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, PalsError>;
