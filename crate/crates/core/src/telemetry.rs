//! Run telemetry: a fixed-schema time series with CSV persistence.
//!
//! Files carry `# key = value` metadata lines, one header row, then data
//! rows in scientific notation with a configurable number of significant
//! digits (default 9). Writing a loaded file reproduces it byte for byte,
//! so archived runs can be rewritten without drift.

use std::path::Path;

use crate::params::{ControlConfig, VehicleParams, NUM_CORNERS};
use crate::state::{CornerForces, VehicleState};
use crate::{PalsError, Result};

/// Column count of the fixed schema.
pub const NUM_COLUMNS: usize = 57;

/// Column names, in file order.
pub const COLUMN_NAMES: [&str; NUM_COLUMNS] = [
    "time", "x", "y", "z", "roll", "pitch", "yaw", "vx", "vy", "vz", "wx", "wy", "wz",
    "zu1", "zu2", "zu3", "zu4", "vzu1", "vzu2", "vzu3", "vzu4",
    "ftz1", "ftz2", "ftz3", "ftz4", "fty1", "fty2", "fty3", "fty4",
    "ftx1", "ftx2", "ftx3", "ftx4", "fsusp1", "fsusp2", "fsusp3", "fsusp4",
    "fact1", "fact2", "fact3", "fact4", "tcmd1", "tcmd2", "tcmd3", "tcmd4",
    "tact1", "tact2", "tact3", "tact4", "tff1", "tff2", "tff3", "tff4",
    "ax", "ay", "steer", "ax_cmd",
];

/// One telemetry sample. Angles in rad, forces in N, torques in N·m.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TelemetryRow {
    pub time: f64,
    pub position: [f64; 3],
    /// roll, pitch, yaw.
    pub attitude: [f64; 3],
    pub velocity: [f64; 3],
    pub angular_velocity: [f64; 3],
    pub unsprung_z: [f64; NUM_CORNERS],
    pub unsprung_vz: [f64; NUM_CORNERS],
    pub tire_vertical: [f64; NUM_CORNERS],
    pub tire_lateral: [f64; NUM_CORNERS],
    pub tire_longitudinal: [f64; NUM_CORNERS],
    pub suspension: [f64; NUM_CORNERS],
    pub actuator_force: [f64; NUM_CORNERS],
    /// Controller reference torques, before the actuator lag.
    pub torque_command: [f64; NUM_CORNERS],
    /// Torques the actuators actually applied.
    pub torque_actual: [f64; NUM_CORNERS],
    /// Feedforward share of the command (zero for PID-only schemes).
    pub torque_feedforward: [f64; NUM_CORNERS],
    /// Measured ground-plane accelerations [m/s^2].
    pub ax: f64,
    pub ay: f64,
    /// Road-wheel steer angle [rad].
    pub steer: f64,
    /// Commanded longitudinal acceleration [m/s^2].
    pub ax_command: f64,
}

impl TelemetryRow {
    pub fn from_parts(
        state: &VehicleState,
        forces: &CornerForces,
        torque_command: [f64; NUM_CORNERS],
        torque_actual: [f64; NUM_CORNERS],
        torque_feedforward: [f64; NUM_CORNERS],
        ax: f64,
        ay: f64,
        steer: f64,
        ax_command: f64,
    ) -> Self {
        Self {
            time: state.time,
            position: [state.position.x, state.position.y, state.position.z],
            attitude: [state.attitude.x, state.attitude.y, state.attitude.z],
            velocity: [state.velocity.x, state.velocity.y, state.velocity.z],
            angular_velocity: [
                state.angular_velocity.x,
                state.angular_velocity.y,
                state.angular_velocity.z,
            ],
            unsprung_z: state.unsprung_z,
            unsprung_vz: state.unsprung_vz,
            tire_vertical: forces.vertical_tire,
            tire_lateral: forces.lateral_tire,
            tire_longitudinal: forces.longitudinal_tire,
            suspension: forces.suspension,
            actuator_force: forces.actuator,
            torque_command,
            torque_actual,
            torque_feedforward,
            ax,
            ay,
            steer,
            ax_command,
        }
    }

    pub fn roll(&self) -> f64 {
        self.attitude[0]
    }

    pub fn pitch(&self) -> f64 {
        self.attitude[1]
    }

    fn to_values(self) -> [f64; NUM_COLUMNS] {
        let mut v = [0.0; NUM_COLUMNS];
        v[0] = self.time;
        v[1..4].copy_from_slice(&self.position);
        v[4..7].copy_from_slice(&self.attitude);
        v[7..10].copy_from_slice(&self.velocity);
        v[10..13].copy_from_slice(&self.angular_velocity);
        v[13..17].copy_from_slice(&self.unsprung_z);
        v[17..21].copy_from_slice(&self.unsprung_vz);
        v[21..25].copy_from_slice(&self.tire_vertical);
        v[25..29].copy_from_slice(&self.tire_lateral);
        v[29..33].copy_from_slice(&self.tire_longitudinal);
        v[33..37].copy_from_slice(&self.suspension);
        v[37..41].copy_from_slice(&self.actuator_force);
        v[41..45].copy_from_slice(&self.torque_command);
        v[45..49].copy_from_slice(&self.torque_actual);
        v[49..53].copy_from_slice(&self.torque_feedforward);
        v[53] = self.ax;
        v[54] = self.ay;
        v[55] = self.steer;
        v[56] = self.ax_command;
        v
    }

    fn from_values(v: &[f64; NUM_COLUMNS]) -> Self {
        let grab4 = |offset: usize| -> [f64; 4] { [v[offset], v[offset + 1], v[offset + 2], v[offset + 3]] };
        Self {
            time: v[0],
            position: [v[1], v[2], v[3]],
            attitude: [v[4], v[5], v[6]],
            velocity: [v[7], v[8], v[9]],
            angular_velocity: [v[10], v[11], v[12]],
            unsprung_z: grab4(13),
            unsprung_vz: grab4(17),
            tire_vertical: grab4(21),
            tire_lateral: grab4(25),
            tire_longitudinal: grab4(29),
            suspension: grab4(33),
            actuator_force: grab4(37),
            torque_command: grab4(41),
            torque_actual: grab4(45),
            torque_feedforward: grab4(49),
            ax: v[53],
            ay: v[54],
            steer: v[55],
            ax_command: v[56],
        }
    }
}

/// A recorded run: ordered metadata plus uniformly sampled rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Telemetry {
    metadata: Vec<(String, String)>,
    rows: Vec<TelemetryRow>,
}

impl Telemetry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a metadata entry. Keys and values must be single-line.
    pub fn set_meta(&mut self, key: &str, value: impl std::fmt::Display) {
        let value = value.to_string();
        debug_assert!(!key.contains('\n') && !value.contains('\n'));
        if let Some(entry) = self.metadata.iter_mut().find(|(k, _)| k == key) {
            entry.1 = value;
        } else {
            self.metadata.push((key.to_string(), value));
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn push(&mut self, row: TelemetryRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[TelemetryRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Extracts one column as a vector.
    pub fn series<F: Fn(&TelemetryRow) -> f64>(&self, f: F) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Sample spacing, when at least two rows exist.
    pub fn dt(&self) -> Option<f64> {
        (self.rows.len() >= 2).then(|| self.rows[1].time - self.rows[0].time)
    }

    pub fn start_time(&self) -> Option<f64> {
        self.rows.first().map(|r| r.time)
    }

    pub fn end_time(&self) -> Option<f64> {
        self.rows.last().map(|r| r.time)
    }

    /// Physical and structural consistency of a recorded run: tire loads
    /// non-negative, lateral forces within the friction budget, actuator
    /// torques within the hard rating, timestamps strictly increasing and
    /// uniform.
    pub fn validate(&self, vehicle: &VehicleParams, control: &ControlConfig) -> Result<()> {
        let fail = |row: usize, what: String| {
            Err(PalsError::InvalidTelemetry(format!("row {row}: {what}")))
        };
        for (k, row) in self.rows.iter().enumerate() {
            for i in 0..NUM_CORNERS {
                let ftz = row.tire_vertical[i];
                if ftz < -1e-9 {
                    return fail(k, format!("negative tire load {ftz} at corner {}", i + 1));
                }
                let budget = vehicle.friction_coefficient * ftz;
                // Tolerance covers the CSV's 9-digit rounding.
                let eps = 1e-6 * budget.abs() + 1e-3;
                if row.tire_lateral[i].abs() > budget + eps {
                    return fail(
                        k,
                        format!(
                            "lateral force {} exceeds friction budget {budget} at corner {}",
                            row.tire_lateral[i],
                            i + 1
                        ),
                    );
                }
                let peak = control.peak_torque;
                if row.torque_actual[i].abs() > peak * (1.0 + 1e-9) + 1e-6 {
                    return fail(
                        k,
                        format!("actuator torque {} exceeds rating {peak}", row.torque_actual[i]),
                    );
                }
            }
        }
        if self.rows.len() >= 2 {
            let dt = self.rows[1].time - self.rows[0].time;
            if dt <= 0.0 {
                return fail(1, "time not increasing".into());
            }
            for k in 1..self.rows.len() {
                let step = self.rows[k].time - self.rows[k - 1].time;
                if (step - dt).abs() > 1e-9 {
                    return fail(k, format!("non-uniform time step {step} vs {dt}"));
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path, significant_digits: usize) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w, significant_digits)?;
        Ok(())
    }

    pub fn write_to(&self, w: &mut impl std::io::Write, significant_digits: usize) -> Result<()> {
        let precision = significant_digits.saturating_sub(1).min(17);
        for (k, v) in &self.metadata {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "{}", COLUMN_NAMES.join(","))?;
        let mut line = String::with_capacity(NUM_COLUMNS * 18);
        for row in &self.rows {
            line.clear();
            for (i, v) in row.to_values().iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{v:.precision$e}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            PalsError::InvalidTelemetry(m) => {
                PalsError::InvalidTelemetry(format!("{}: {m}", path.display()))
            }
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Telemetry::new();
        let mut saw_header = false;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if saw_header {
                    return Err(PalsError::InvalidTelemetry(format!(
                        "line {}: metadata after the header",
                        n + 1
                    )));
                }
                let (k, v) = meta.split_once('=').ok_or_else(|| {
                    PalsError::InvalidTelemetry(format!("line {}: malformed metadata", n + 1))
                })?;
                out.metadata.push((k.trim().to_string(), v.trim().to_string()));
                continue;
            }
            if !saw_header {
                if line != COLUMN_NAMES.join(",") {
                    return Err(PalsError::InvalidTelemetry(format!(
                        "line {}: unexpected header",
                        n + 1
                    )));
                }
                saw_header = true;
                continue;
            }
            let mut values = [0.0; NUM_COLUMNS];
            let mut count = 0;
            for (i, field) in line.split(',').enumerate() {
                if i >= NUM_COLUMNS {
                    return Err(PalsError::InvalidTelemetry(format!(
                        "line {}: too many columns",
                        n + 1
                    )));
                }
                values[i] = field.parse().map_err(|_| {
                    PalsError::InvalidTelemetry(format!(
                        "line {}: bad number {field:?} in column {}",
                        n + 1,
                        COLUMN_NAMES[i]
                    ))
                })?;
                count = i + 1;
            }
            if count != NUM_COLUMNS {
                return Err(PalsError::InvalidTelemetry(format!(
                    "line {}: expected {NUM_COLUMNS} columns, got {count}",
                    n + 1
                )));
            }
            out.rows.push(TelemetryRow::from_values(&values));
        }
        if !saw_header {
            return Err(PalsError::InvalidTelemetry("missing header line".into()));
        }
        Ok(out)
    }
}
