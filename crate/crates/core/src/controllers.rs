//! Attitude controllers and the rocker-actuator model.
//!
//! Three schemes share one interface:
//!
//! - `passive`: actuators commanded to zero (spring-damper only);
//! - `pals-pid`: multi-objective PID on pitch and roll. The pitch
//!   objective commands equal torques within an axle, opposite between
//!   axles; the roll objective commands opposite torques across each
//!   axle. Per-corner torque is the sum of both objectives;
//! - `ff-pid-non`: feedforward from the fitted load-transfer polynomial
//!   plus a retuned (softer) PID of the same structure.
//!
//! The feedforward converts each predicted tire-load increment to the
//! rocker torque that *carries* it, `T_i = dF_i / beta_i`, so the spring
//! deflects less and the chassis stays level. Total load transfer itself
//! is fixed by rigid-body balance; what the actuator changes is how much
//! of it flows through spring deflection, i.e. attitude.
//!
//! Every reference torque passes through a first-order actuator lag and a
//! hard saturation at the peak rocker rating. PID integrators are clamped
//! so their contribution alone can never exceed that rating (anti-windup).

use crate::compensation::CompensationCoefficients;
use crate::params::{Config, ControlConfig, PidGains, NUM_CORNERS};
use crate::{PalsError, Result};

/// Feedback and feedforward inputs for one controller update.
///
/// Accelerations are the body-frame kinematic values, already low-passed
/// by the runner (5 Hz by default).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measurements {
    /// Chassis pitch [rad], positive nose up.
    pub pitch: f64,
    /// Chassis roll [rad], positive right side down.
    pub roll: f64,
    /// Filtered longitudinal acceleration [m/s^2].
    pub ax: f64,
    /// Filtered lateral acceleration [m/s^2], positive to the right.
    pub ay: f64,
}

/// Integrator and derivative-filter state for the two PID objectives.
#[derive(Debug, Clone, Default)]
pub struct PidState {
    integral_pitch: f64,
    integral_roll: f64,
    prev_pitch: f64,
    prev_roll: f64,
    deriv_pitch: f64,
    deriv_roll: f64,
    primed: bool,
}

impl PidState {
    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

/// One multi-objective PID update.
///
/// Pitch law: front torques `-(kp*pitch + ki*int + kd*dpitch)`, rear
/// torques the same magnitude with opposite sign. Roll law: left torques
/// `-(kp*roll + ki*int + kd*droll)`, right torques opposite, both axles
/// in the same rotational direction. Derivatives are backward differences
/// through a first-order low-pass with time constant `derivative_tau`.
/// Integrals are clamped so `ki * |integral| <= peak_torque`.
pub fn pid_torques(
    state: &mut PidState,
    pitch: f64,
    roll: f64,
    gains: &PidGains,
    dt: f64,
    derivative_tau: f64,
    peak_torque: f64,
) -> [f64; NUM_CORNERS] {
    if !state.primed {
        state.prev_pitch = pitch;
        state.prev_roll = roll;
        state.primed = true;
    }
    let alpha = dt / derivative_tau;
    let raw_dpitch = (pitch - state.prev_pitch) / dt;
    let raw_droll = (roll - state.prev_roll) / dt;
    state.deriv_pitch += (raw_dpitch - state.deriv_pitch) * alpha;
    state.deriv_roll += (raw_droll - state.deriv_roll) * alpha;
    state.prev_pitch = pitch;
    state.prev_roll = roll;

    state.integral_pitch += pitch * dt;
    state.integral_roll += roll * dt;
    let clamp_integral = |integral: &mut f64, ki_front: f64, ki_rear: f64| {
        let ki = ki_front.max(ki_rear);
        if ki > 0.0 {
            let limit = peak_torque / ki;
            *integral = integral.clamp(-limit, limit);
        }
    };
    clamp_integral(&mut state.integral_pitch, gains.pitch_front.ki, gains.pitch_rear.ki);
    clamp_integral(&mut state.integral_roll, gains.roll_front.ki, gains.roll_rear.ki);

    let term = |g: &crate::params::PidTriple, err: f64, integral: f64, deriv: f64| {
        g.kp * err + g.ki * integral + g.kd * deriv
    };
    let pitch_front = term(&gains.pitch_front, pitch, state.integral_pitch, state.deriv_pitch);
    let pitch_rear = term(&gains.pitch_rear, pitch, state.integral_pitch, state.deriv_pitch);
    let roll_front = term(&gains.roll_front, roll, state.integral_roll, state.deriv_roll);
    let roll_rear = term(&gains.roll_rear, roll, state.integral_roll, state.deriv_roll);

    [
        -pitch_front - roll_front,
        -pitch_front + roll_front,
        pitch_rear - roll_rear,
        pitch_rear + roll_rear,
    ]
}

/// Feedforward rocker torques for a fitted compensation model at the
/// filtered operating point: `T_i = dF_i / beta_i`, the torque whose
/// equivalent vertical force carries the predicted increment.
pub fn feedforward_torques(
    coeffs: &CompensationCoefficients,
    ax: f64,
    ay: f64,
    beta: &[f64; NUM_CORNERS],
) -> [f64; NUM_CORNERS] {
    let increment = coeffs.increment(ax, ay).per_corner();
    let mut torques = [0.0; NUM_CORNERS];
    for i in 0..NUM_CORNERS {
        torques[i] = increment[i] / beta[i];
    }
    torques
}

/// Element-wise sum of the feedforward and feedback layers.
pub fn compose_torques(
    feedforward: &[f64; NUM_CORNERS],
    feedback: &[f64; NUM_CORNERS],
) -> [f64; NUM_CORNERS] {
    let mut out = [0.0; NUM_CORNERS];
    for i in 0..NUM_CORNERS {
        out[i] = feedforward[i] + feedback[i];
    }
    out
}

/// First-order actuator tracking toward the saturated reference:
/// `actual += (clamp(reference) - actual) * dt / tau`. The output can
/// never leave the saturation band.
pub fn actuator_track(
    actual: &mut [f64; NUM_CORNERS],
    reference: &[f64; NUM_CORNERS],
    dt: f64,
    tau: f64,
    peak_torque: f64,
) {
    let alpha = (dt / tau).min(1.0);
    for i in 0..NUM_CORNERS {
        let target = reference[i].clamp(-peak_torque, peak_torque);
        actual[i] += (target - actual[i]) * alpha;
        actual[i] = actual[i].clamp(-peak_torque, peak_torque);
    }
}

/// Controller selection, by the names the CLI exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    Passive,
    PalsPid,
    FfPidNon,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] =
        [ControllerKind::Passive, ControllerKind::PalsPid, ControllerKind::FfPidNon];

    pub fn name(&self) -> &'static str {
        match self {
            ControllerKind::Passive => "passive",
            ControllerKind::PalsPid => "pals-pid",
            ControllerKind::FfPidNon => "ff-pid-non",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = PalsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "passive" => Ok(ControllerKind::Passive),
            "pals-pid" => Ok(ControllerKind::PalsPid),
            "ff-pid-non" => Ok(ControllerKind::FfPidNon),
            other => Err(PalsError::Config(format!(
                "unknown controller {other:?}; expected passive, pals-pid, or ff-pid-non"
            ))),
        }
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A configured controller instance with actuator state.
#[derive(Debug, Clone)]
pub struct Controller {
    kind: ControllerKind,
    gains: Option<PidGains>,
    coeffs: Option<CompensationCoefficients>,
    beta: [f64; NUM_CORNERS],
    control: ControlConfig,
    pid: PidState,
    actual: [f64; NUM_CORNERS],
    /// Reference (commanded) torques from the last update, pre-actuator.
    pub last_reference: [f64; NUM_CORNERS],
    /// Feedforward share of the last reference (zero for PID-only).
    pub last_feedforward: [f64; NUM_CORNERS],
}

impl Controller {
    /// Builds a controller. `ff-pid-non` requires fitted coefficients.
    pub fn new(
        kind: ControllerKind,
        config: &Config,
        coeffs: Option<CompensationCoefficients>,
    ) -> Result<Self> {
        let gains = match kind {
            ControllerKind::Passive => None,
            ControllerKind::PalsPid => Some(config.gains.pals_pid),
            ControllerKind::FfPidNon => Some(config.gains.ff_pid),
        };
        if kind == ControllerKind::FfPidNon && coeffs.is_none() {
            return Err(PalsError::Config(
                "ff-pid-non requires fitted compensation coefficients".into(),
            ));
        }
        Ok(Self {
            kind,
            gains,
            coeffs: if kind == ControllerKind::FfPidNon { coeffs } else { None },
            beta: config.vehicle.beta,
            control: config.control,
            pid: PidState::default(),
            actual: [0.0; NUM_CORNERS],
            last_reference: [0.0; NUM_CORNERS],
            last_feedforward: [0.0; NUM_CORNERS],
        })
    }

    pub fn kind(&self) -> ControllerKind {
        self.kind
    }

    /// One control step. Returns the actuator torques actually applied.
    pub fn update(&mut self, meas: &Measurements, dt: f64) -> [f64; NUM_CORNERS] {
        let feedback = match &self.gains {
            Some(gains) => pid_torques(
                &mut self.pid,
                meas.pitch,
                meas.roll,
                gains,
                dt,
                self.control.derivative_tau,
                self.control.peak_torque,
            ),
            None => [0.0; NUM_CORNERS],
        };
        let feedforward = match &self.coeffs {
            Some(coeffs) => feedforward_torques(coeffs, meas.ax, meas.ay, &self.beta),
            None => [0.0; NUM_CORNERS],
        };
        let reference = compose_torques(&feedforward, &feedback);
        actuator_track(
            &mut self.actual,
            &reference,
            dt,
            self.control.actuator_tau,
            self.control.peak_torque,
        );
        self.last_reference = reference;
        self.last_feedforward = feedforward;
        self.actual
    }

    pub fn actual_torques(&self) -> [f64; NUM_CORNERS] {
        self.actual
    }
}
