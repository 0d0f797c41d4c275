//! Load-transfer compensation models and torque/force conversion.
//!
//! Two predictors of the per-corner vertical tire-force increment are
//! provided:
//!
//! - the *steady-state* model, an algebraic rigid-body estimate built from
//!   mass geometry: the longitudinal increment is
//!   `[m_s*h + 2*(m_uf*R_f + m_ur*R_r)] * ax / (2*(b_f + b_r))` on each
//!   front corner (mirrored on the rear), and the lateral roll moment
//!   `M_x = [m_s*h + 2*(m_uf*R_f + m_ur*R_r)] * ay` splits across the
//!   axles as `(1-sigma)*M_x/t_f` front and `sigma*M_x/t_r` rear, with a
//!   left/right antisymmetric pattern;
//! - the *polynomial* model, fitted to the plant (cubic in lateral
//!   acceleration, linear in longitudinal, both through the origin), see
//!   the fitting module.
//!
//! The increment converts to a rocker torque through the linkage factor
//! `beta = dF/dT`: `T = F / beta`, `F = beta * T`.
//!
//! Sign pattern (fixed): a pure-ax increment is equal on both corners of
//! an axle and opposite between axles; a pure-ay increment is opposite
//! across each axle (left vs right) with independently scaled front and
//! rear magnitudes; aero downforce adds equally on both corners of an
//! axle.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::params::{VehicleParams, NUM_CORNERS};
use crate::{PalsError, Result};

/// Inertia-height numerator shared by both steady-state channels:
/// `m_s*h_cmc + 2*(m_uf*R_whf + m_ur*R_whr)`.
fn transfer_numerator(p: &VehicleParams) -> f64 {
    p.sprung_mass * p.cmc_height
        + 2.0 * (p.unsprung_mass_front * p.wheel_radius_front
            + p.unsprung_mass_rear * p.wheel_radius_rear)
}

/// Front-corner tire-force increment for a longitudinal acceleration
/// `ax` [m/s^2]. The rear corners carry the negated value.
pub fn steady_state_ax_increment(ax: f64, p: &VehicleParams) -> f64 {
    transfer_numerator(p) * ax / (2.0 * (p.wheelbase_front + p.wheelbase_rear))
}

/// (front-left, rear-left) tire-force increments for a lateral
/// acceleration `ay` [m/s^2]. Right corners carry the negated values.
pub fn steady_state_ay_increment(ay: f64, p: &VehicleParams) -> (f64, f64) {
    let moment = transfer_numerator(p) * ay;
    let front = (1.0 - p.ocd_rear_ratio) * moment / p.track_front;
    let rear = p.ocd_rear_ratio * moment / p.track_rear;
    (front, rear)
}

/// (front, rear) per-corner aerodynamic downforce at longitudinal speed
/// `vx` [m/s]: `0.5 * c * vx^2` per corner, same sign on both corners of
/// an axle.
pub fn aero_increment(vx: f64, p: &VehicleParams) -> (f64, f64) {
    let v2 = vx * vx;
    (0.5 * p.aero_coeff_front * v2, 0.5 * p.aero_coeff_rear * v2)
}

/// Per-corner load-transfer prediction split into its three components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadTransferIncrement {
    /// Longitudinal component per corner [N].
    pub ax_part: [f64; NUM_CORNERS],
    /// Lateral component per corner [N].
    pub ay_part: [f64; NUM_CORNERS],
    /// Aerodynamic component per corner [N].
    pub aero_part: [f64; NUM_CORNERS],
}

impl LoadTransferIncrement {
    /// Steady-state model evaluated at an operating point.
    pub fn steady_state(ax: f64, ay: f64, vx: f64, p: &VehicleParams) -> Self {
        let dax = steady_state_ax_increment(ax, p);
        let (day_f, day_r) = steady_state_ay_increment(ay, p);
        let (aero_f, aero_r) = aero_increment(vx, p);
        Self {
            ax_part: [dax, dax, -dax, -dax],
            ay_part: [day_f, -day_f, day_r, -day_r],
            aero_part: [aero_f, aero_f, aero_r, aero_r],
        }
    }

    /// Component sum per corner.
    pub fn per_corner(&self) -> [f64; NUM_CORNERS] {
        let mut out = [0.0; NUM_CORNERS];
        for i in 0..NUM_CORNERS {
            out[i] = self.ax_part[i] + self.ay_part[i] + self.aero_part[i];
        }
        out
    }
}

/// Fitted polynomial compensation model.
///
/// Per corner i the predicted increment is
/// `slope_i*ax + p1_i*ay + p2_i*ay^2 + p3_i*ay^3` (no constant term: zero
/// acceleration predicts zero increment by construction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompensationCoefficients {
    /// Cubic lateral coefficients (p1, p2, p3) per corner.
    pub lateral: [[f64; 3]; NUM_CORNERS],
    /// Linear longitudinal slope per corner.
    pub longitudinal: [f64; NUM_CORNERS],
}

impl CompensationCoefficients {
    /// Predicted increment at one corner.
    pub fn predict_corner(&self, corner: usize, ax: f64, ay: f64) -> f64 {
        let [p1, p2, p3] = self.lateral[corner];
        self.longitudinal[corner] * ax + p1 * ay + p2 * ay * ay + p3 * ay * ay * ay
    }

    /// Polynomial model evaluated at an operating point. The aero part is
    /// zero: the fit absorbs whatever speed-dependent load the calibration
    /// runs carried.
    pub fn increment(&self, ax: f64, ay: f64) -> LoadTransferIncrement {
        let mut ax_part = [0.0; NUM_CORNERS];
        let mut ay_part = [0.0; NUM_CORNERS];
        for i in 0..NUM_CORNERS {
            ax_part[i] = self.longitudinal[i] * ax;
            let [p1, p2, p3] = self.lateral[i];
            ay_part[i] = p1 * ay + p2 * ay * ay + p3 * ay * ay * ay;
        }
        LoadTransferIncrement { ax_part, ay_part, aero_part: [0.0; NUM_CORNERS] }
    }

    /// Writes the coefficients as a plain-text table, corner-major:
    /// one line per corner holding `ax_slope p1 p2 p3` at full precision.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = String::from(
            "# load-transfer compensation coefficients\n\
             # corner-major, corners ordered front-left front-right rear-left rear-right\n\
             # columns: ax_slope[N/(m/s^2)] ay_p1[N/(m/s^2)] ay_p2[N/(m/s^2)^2] ay_p3[N/(m/s^2)^3]\n",
        );
        for i in 0..NUM_CORNERS {
            let [p1, p2, p3] = self.lateral[i];
            text.push_str(&format!(
                "{:.17e} {:.17e} {:.17e} {:.17e}\n",
                self.longitudinal[i], p1, p2, p3
            ));
        }
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|e| {
                        PalsError::Parse(format!(
                            "{} line {}: bad number {tok:?}: {e}",
                            path.display(),
                            lineno + 1
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            if fields.len() != 4 {
                return Err(PalsError::Parse(format!(
                    "{} line {}: expected 4 columns, got {}",
                    path.display(),
                    lineno + 1,
                    fields.len()
                )));
            }
            rows.push(fields);
        }
        if rows.len() != NUM_CORNERS {
            return Err(PalsError::Parse(format!(
                "{}: expected {NUM_CORNERS} coefficient rows, got {}",
                path.display(),
                rows.len()
            )));
        }
        let mut lateral = [[0.0; 3]; NUM_CORNERS];
        let mut longitudinal = [0.0; NUM_CORNERS];
        for (i, row) in rows.iter().enumerate() {
            longitudinal[i] = row[0];
            lateral[i] = [row[1], row[2], row[3]];
        }
        Ok(Self { lateral, longitudinal })
    }
}

/// Rocker torque that produces a given equivalent vertical force.
/// Errors when `beta` is zero (degenerate linkage).
pub fn force_to_torque(force: f64, beta: f64) -> Result<f64> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(PalsError::Config(format!(
            "torque conversion requires finite non-zero beta, got {beta}"
        )));
    }
    Ok(force / beta)
}

/// Equivalent vertical force produced by a rocker torque. Exact inverse
/// of [`force_to_torque`].
pub fn torque_to_force(torque: f64, beta: f64) -> f64 {
    beta * torque
}
