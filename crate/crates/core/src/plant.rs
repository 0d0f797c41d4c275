//! Full-car plant: a rigid chassis with six degrees of freedom plus four
//! vertically sprung unsprung masses, integrated with fixed-step RK4.
//!
//! Frames: body x forward, y right, z down; world z down with the ground
//! plane at z = 0, so a mass center h above ground sits at z = -h.
//! Attitude is yaw-pitch-roll; positive roll drops the right side,
//! positive pitch lifts the nose, positive yaw turns right.
//!
//! Per corner the model applies:
//! - a spring-damper along world vertical between the chassis attachment
//!   (at mass-center height) and the wheel center, preloaded with the
//!   static corner load so the nominal configuration is an exact fixed
//!   point;
//! - the rocker actuator as an equivalent vertical force beta*T, positive
//!   pushing the chassis corner up and the wheel down;
//! - a one-sided vertical tire force from compression and its rate;
//! - ground-plane tire forces at the contact patch: lateral from a
//!   load-dependent cornering stiffness saturated by the friction
//!   ellipse, longitudinal from the driver's acceleration request split
//!   evenly across the corners and clamped per corner.
//!
//! Horizontal translation carries the full vehicle mass; the unsprung
//! masses have no independent horizontal freedom.

use nalgebra::{Rotation3, Vector3};

use crate::params::{VehicleParams, GRAVITY, NUM_CORNERS};
use crate::state::{CornerForces, DriverInput, VehicleState};
use crate::{PalsError, Result};

/// Flat state dimension used by the integrator.
pub const STATE_DIM: usize = 20;

/// Vertical tire force [N] from compression [m] and compression rate
/// [m/s]. Zero when the tire is off the ground, never negative.
pub fn tire_vertical_force(compression: f64, rate: f64, p: &VehicleParams) -> f64 {
    if compression <= 0.0 {
        0.0
    } else {
        (p.tire_stiffness * compression + p.tire_damping * rate).max(0.0)
    }
}

/// Load-dependent cornering stiffness [N/rad], floored at zero.
pub fn cornering_stiffness(vertical_load: f64, p: &VehicleParams) -> f64 {
    (p.cornering_c1 * vertical_load - p.cornering_c2 * vertical_load * vertical_load).max(0.0)
}

/// Lateral tire force [N] in the wheel frame for a slip angle [rad],
/// saturated by the friction ellipse given the longitudinal force already
/// claimed at this corner. Positive slip (velocity to the right of the
/// wheel heading) produces a leftward force.
pub fn lateral_tire_force(slip: f64, vertical_load: f64, longitudinal: f64, p: &VehicleParams) -> f64 {
    let grip = p.friction_coefficient * vertical_load;
    let budget = (grip * grip - longitudinal * longitudinal).max(0.0).sqrt();
    -(cornering_stiffness(vertical_load, p) * slip).clamp(-budget, budget)
}

/// Forces and ground-plane accelerations resolved at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub forces: CornerForces,
    /// Ground-plane longitudinal acceleration in the yaw frame [m/s^2].
    pub measured_ax: f64,
    /// Ground-plane lateral acceleration, positive right [m/s^2].
    pub measured_ay: f64,
}

#[derive(Debug, Clone)]
pub struct Plant {
    p: VehicleParams,
    /// Attachment-to-wheel-center distance when the springs carry exactly
    /// the static load; suspension deflection is measured from here.
    nominal_length: [f64; NUM_CORNERS],
    static_spring_force: [f64; NUM_CORNERS],
    inertia: Vector3<f64>,
}

impl Plant {
    pub fn new(params: &VehicleParams) -> Result<Self> {
        params.validate()?;
        let mut nominal_length = [0.0; NUM_CORNERS];
        let mut static_spring_force = [0.0; NUM_CORNERS];
        for i in 0..NUM_CORNERS {
            let compression = params.static_corner_tire_load(i) / params.tire_stiffness;
            let wheel_center_z = compression - params.wheel_radius(i);
            nominal_length[i] = wheel_center_z + params.cmc_height;
            static_spring_force[i] = params.static_corner_sprung_load(i);
        }
        Ok(Self {
            p: params.clone(),
            nominal_length,
            static_spring_force,
            inertia: Vector3::new(params.roll_inertia, params.pitch_inertia, params.yaw_inertia),
        })
    }

    pub fn params(&self) -> &VehicleParams {
        &self.p
    }

    /// The exact static fixed point: level chassis at nominal ride height,
    /// tires compressed by their static load, everything at rest.
    pub fn static_equilibrium(&self) -> VehicleState {
        let mut unsprung_z = [0.0; NUM_CORNERS];
        for i in 0..NUM_CORNERS {
            let compression = self.p.static_corner_tire_load(i) / self.p.tire_stiffness;
            unsprung_z[i] = compression - self.p.wheel_radius(i);
        }
        VehicleState {
            time: 0.0,
            position: Vector3::new(0.0, 0.0, -self.p.cmc_height),
            attitude: Vector3::zeros(),
            velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
            unsprung_z,
            unsprung_vz: [0.0; NUM_CORNERS],
        }
    }

    /// Static equilibrium plus an initial forward speed [m/s].
    pub fn equilibrium_at_speed(&self, vx: f64) -> VehicleState {
        let mut state = self.static_equilibrium();
        state.velocity.x = vx;
        state
    }

    /// Forces and measured accelerations at a state, without stepping.
    pub fn evaluate(&self, state: &VehicleState, input: &DriverInput, torques: &[f64; NUM_CORNERS]) -> StepInfo {
        let (_, info) = self.dynamics(&pack(state), input, torques);
        info
    }

    /// One RK4 step of length `dt`. Also returns the forces and measured
    /// accelerations at the starting state, aligned with `state.time`.
    pub fn step(
        &self,
        state: &VehicleState,
        input: &DriverInput,
        torques: &[f64; NUM_CORNERS],
        dt: f64,
    ) -> Result<(VehicleState, StepInfo)> {
        let y0 = pack(state);
        let (k1, info) = self.dynamics(&y0, input, torques);
        let (k2, _) = self.dynamics(&offset(&y0, &k1, 0.5 * dt), input, torques);
        let (k3, _) = self.dynamics(&offset(&y0, &k2, 0.5 * dt), input, torques);
        let (k4, _) = self.dynamics(&offset(&y0, &k3, dt), input, torques);
        let mut y = y0;
        for i in 0..STATE_DIM {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let next = unpack(&y, state.time + dt);
        self.check_sane(&next)?;
        Ok((next, info))
    }

    fn check_sane(&self, state: &VehicleState) -> Result<()> {
        let y = pack(state);
        for v in y {
            if !v.is_finite() {
                return Err(PalsError::NumericalDivergence {
                    time: state.time,
                    what: "non-finite state entry".into(),
                });
            }
        }
        let checks = [
            (state.position.z.abs() <= 50.0, "chassis height out of range"),
            (state.attitude.x.abs() <= std::f64::consts::PI, "roll angle out of range"),
            (state.attitude.y.abs() <= 1.5, "pitch angle out of range"),
            (state.velocity.norm() <= 200.0, "chassis speed out of range"),
            (state.angular_velocity.norm() <= 100.0, "body rates out of range"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(PalsError::NumericalDivergence { time: state.time, what: what.into() });
            }
        }
        for z in state.unsprung_z {
            if z.abs() > 10.0 {
                return Err(PalsError::NumericalDivergence {
                    time: state.time,
                    what: "unsprung position out of range".into(),
                });
            }
        }
        Ok(())
    }

    /// Time derivative of the packed state, plus the force record.
    fn dynamics(&self, y: &[f64; STATE_DIM], input: &DriverInput, torques: &[f64; NUM_CORNERS]) -> ([f64; STATE_DIM], StepInfo) {
        let p = &self.p;
        let (roll, pitch, yaw) = (y[3], y[4], y[5]);
        let v_body = Vector3::new(y[6], y[7], y[8]);
        let omega = Vector3::new(y[9], y[10], y[11]);
        let rot = Rotation3::from_euler_angles(roll, pitch, yaw);
        // Rotation from the yaw-aligned ground frame into the body frame;
        // ground-plane tire forces only tilt by roll and pitch.
        let tilt = Rotation3::from_euler_angles(roll, pitch, 0.0);

        let mut forces = CornerForces::default();
        let mut unsprung_acc = [0.0; NUM_CORNERS];
        // Ground-plane force sums in the yaw frame, vertical chassis force
        // sum (world z, down positive), and body-frame moment about the
        // mass center.
        let mut f_planar = Vector3::zeros();
        let mut f_down = p.sprung_mass * GRAVITY;
        let mut moment = Vector3::zeros();

        for i in 0..NUM_CORNERS {
            let (cx, cy) = p.corner_position(i);
            let r_attach = Vector3::new(cx, cy, 0.0);
            let zu = y[12 + i];
            let vzu = y[16 + i];

            // Suspension deflection, positive in compression.
            let attach_z = y[2] + (rot * r_attach).z;
            let attach_vz = (rot * (v_body + omega.cross(&r_attach))).z;
            let deflection = self.nominal_length[i] - (zu - attach_z);
            let deflection_rate = attach_vz - vzu;
            let f_susp = self.static_spring_force[i]
                + p.spring_stiffness(i) * deflection
                + p.suspension_damping(i) * deflection_rate;
            let f_act = p.beta[i] * torques[i];

            let compression = p.wheel_radius(i) + zu;
            let f_tire = tire_vertical_force(compression, vzu, p);

            // Ground-plane tire forces in the yaw frame at the patch.
            let steer = if VehicleParams::is_front(i) { input.steer } else { 0.0 };
            let vcx = v_body.x - omega.z * cy;
            let vcy = v_body.y + omega.z * cx;
            let slip = f64::atan2(vcy, vcx.abs().max(1.0)) - steer;
            let grip = p.friction_coefficient * f_tire;
            let fx_wheel = (p.total_mass() * input.commanded_ax / NUM_CORNERS as f64).clamp(-grip, grip);
            let fy_wheel = lateral_tire_force(slip, f_tire, fx_wheel, p);
            let (sin_d, cos_d) = steer.sin_cos();
            let fx = fx_wheel * cos_d - fy_wheel * sin_d;
            let fy = fx_wheel * sin_d + fy_wheel * cos_d;

            let aero_coeff = if VehicleParams::is_front(i) { p.aero_coeff_front } else { p.aero_coeff_rear };
            let downforce = 0.5 * aero_coeff * v_body.x * v_body.x;

            forces.vertical_tire[i] = f_tire;
            forces.lateral_tire[i] = fy;
            forces.longitudinal_tire[i] = fx;
            forces.suspension[i] = f_susp;
            forces.actuator[i] = f_act;

            unsprung_acc[i] = GRAVITY + (f_susp + f_act - f_tire) / p.unsprung_mass(i);

            f_planar += Vector3::new(fx, fy, 0.0);
            f_down += downforce - (f_susp + f_act);

            // Moments about the mass center in body axes: corner forces at
            // the attachment, patch forces one mass-center height below.
            let f_corner_body = tilt.inverse() * Vector3::new(0.0, 0.0, downforce - (f_susp + f_act));
            moment += r_attach.cross(&f_corner_body);
            let f_patch_body = tilt.inverse() * Vector3::new(fx, fy, 0.0);
            moment += Vector3::new(cx, cy, p.cmc_height).cross(&f_patch_body);
        }

        let m_total = p.total_mass();
        let (sin_y, cos_y) = yaw.sin_cos();
        let a_world = Vector3::new(
            (f_planar.x * cos_y - f_planar.y * sin_y) / m_total,
            (f_planar.x * sin_y + f_planar.y * cos_y) / m_total,
            f_down / p.sprung_mass,
        );
        let a_body = rot.inverse() * a_world;
        let v_dot = a_body - omega.cross(&v_body);

        let gyro = omega.cross(&self.inertia.component_mul(&omega));
        let omega_dot = (moment - gyro).component_div(&self.inertia);

        let (sin_r, cos_r) = roll.sin_cos();
        let cos_p = pitch.cos().abs().max(1e-3) * pitch.cos().signum_or_one();
        let tan_p = pitch.tan().clamp(-1e3, 1e3);
        let euler_dot = Vector3::new(
            omega.x + (omega.y * sin_r + omega.z * cos_r) * tan_p,
            omega.y * cos_r - omega.z * sin_r,
            (omega.y * sin_r + omega.z * cos_r) / cos_p,
        );

        let p_dot = rot * v_body;

        let mut dy = [0.0; STATE_DIM];
        dy[0] = p_dot.x;
        dy[1] = p_dot.y;
        dy[2] = p_dot.z;
        dy[3] = euler_dot.x;
        dy[4] = euler_dot.y;
        dy[5] = euler_dot.z;
        dy[6] = v_dot.x;
        dy[7] = v_dot.y;
        dy[8] = v_dot.z;
        dy[9] = omega_dot.x;
        dy[10] = omega_dot.y;
        dy[11] = omega_dot.z;
        for i in 0..NUM_CORNERS {
            dy[12 + i] = y[16 + i];
            dy[16 + i] = unsprung_acc[i];
        }

        let info = StepInfo {
            forces,
            measured_ax: f_planar.x / m_total,
            measured_ay: f_planar.y / m_total,
        };
        (dy, info)
    }
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}

impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

fn pack(s: &VehicleState) -> [f64; STATE_DIM] {
    let mut y = [0.0; STATE_DIM];
    y[0] = s.position.x;
    y[1] = s.position.y;
    y[2] = s.position.z;
    y[3] = s.attitude.x;
    y[4] = s.attitude.y;
    y[5] = s.attitude.z;
    y[6] = s.velocity.x;
    y[7] = s.velocity.y;
    y[8] = s.velocity.z;
    y[9] = s.angular_velocity.x;
    y[10] = s.angular_velocity.y;
    y[11] = s.angular_velocity.z;
    y[12..16].copy_from_slice(&s.unsprung_z);
    y[16..20].copy_from_slice(&s.unsprung_vz);
    y
}

fn unpack(y: &[f64; STATE_DIM], time: f64) -> VehicleState {
    let mut unsprung_z = [0.0; NUM_CORNERS];
    let mut unsprung_vz = [0.0; NUM_CORNERS];
    unsprung_z.copy_from_slice(&y[12..16]);
    unsprung_vz.copy_from_slice(&y[16..20]);
    VehicleState {
        time,
        position: Vector3::new(y[0], y[1], y[2]),
        attitude: Vector3::new(y[3], y[4], y[5]),
        velocity: Vector3::new(y[6], y[7], y[8]),
        angular_velocity: Vector3::new(y[9], y[10], y[11]),
        unsprung_z,
        unsprung_vz,
    }
}

fn offset(y: &[f64; STATE_DIM], k: &[f64; STATE_DIM], h: f64) -> [f64; STATE_DIM] {
    let mut out = *y;
    for i in 0..STATE_DIM {
        out[i] += h * k[i];
    }
    out
}
