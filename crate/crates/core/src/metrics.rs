//! Derived run metrics: attitude RMS and peaks, settling time, two-wheel
//! lift intervals, rollover detection, and cross-controller RMS ratios.
//!
//! Everything here is pure post-processing over telemetry. Comparative
//! metrics insist on identical time bases; traces of different length are
//! compared over the common prefix (a truncated run ends the window for
//! everyone).

use crate::params::{LEFT_CORNERS, RIGHT_CORNERS};
use crate::telemetry::Telemetry;
use crate::{PalsError, Result};

/// Roll magnitude that counts as a rollover [rad]. Far above any
/// controlled response, well below geometric capsize.
pub const ROLLOVER_THRESHOLD: f64 = 0.7;

/// Vertical load at or below which a wheel counts as lifted [N].
/// Nonzero to avoid chatter at the contact clamp boundary.
pub const LIFT_EPSILON: f64 = 1.0;

/// Fraction of the reference magnitude defining the settling band.
pub const SETTLING_BAND: f64 = 0.05;

/// Which side of the car a lift interval belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn corners(self) -> [usize; 2] {
        match self {
            Side::Left => LEFT_CORNERS,
            Side::Right => RIGHT_CORNERS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// A period during which both wheels on one side carried no load.
///
/// `start` and `end` are the first and last lifted sample times. `end`
/// is `None` while the side never regains load before the trace ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftInterval {
    pub side: Side,
    pub start: f64,
    pub end: Option<f64>,
}

impl LiftInterval {
    /// True when the side regained load before the telemetry ended.
    pub fn is_closed(&self) -> bool {
        self.end.is_some()
    }
}

/// Scans both sides for simultaneous two-wheel lift. An interval opens
/// when both same-side vertical tire forces drop to the lift epsilon or
/// below, and closes when either wheel regains load. Intervals are
/// returned ordered by start time.
pub fn detect_two_wheel_lift(telemetry: &Telemetry) -> Vec<LiftInterval> {
    let mut intervals = Vec::new();
    for side in [Side::Left, Side::Right] {
        let [a, b] = side.corners();
        let mut open: Option<(f64, f64)> = None;
        for row in telemetry.rows() {
            let lifted =
                row.tire_vertical[a] <= LIFT_EPSILON && row.tire_vertical[b] <= LIFT_EPSILON;
            match (&mut open, lifted) {
                (None, true) => open = Some((row.time, row.time)),
                (Some((_, last)), true) => *last = row.time,
                (Some((start, last)), false) => {
                    intervals.push(LiftInterval { side, start: *start, end: Some(*last) });
                    open = None;
                }
                (None, false) => {}
            }
        }
        if let Some((start, _)) = open {
            intervals.push(LiftInterval { side, start, end: None });
        }
    }
    intervals.sort_by(|x, y| x.start.total_cmp(&y.start));
    intervals
}

/// First time the roll magnitude crosses the rollover threshold, if any.
pub fn detect_rollover(telemetry: &Telemetry) -> Option<f64> {
    telemetry.rows().iter().find(|r| r.roll().abs() > ROLLOVER_THRESHOLD).map(|r| r.time)
}

/// Root-mean-square of a series. Zero for an empty slice.
pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// Largest absolute value in a series. Zero for an empty slice.
pub fn peak_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Last entry into the settling band around the final value.
///
/// The band is `final ± SETTLING_BAND·max(|final|, peak deviation)`; the
/// peak-deviation floor keeps the band meaningful for signals that decay
/// to zero. Returns the first time after the last excursion outside the
/// band, the first sample time when the signal never leaves it, and
/// `None` for an empty series.
pub fn settling_time(times: &[f64], values: &[f64]) -> Option<f64> {
    if times.is_empty() || times.len() != values.len() {
        return None;
    }
    let last = *values.last().unwrap();
    let peak_dev = values.iter().fold(0.0f64, |m, v| m.max((v - last).abs()));
    let band = SETTLING_BAND * last.abs().max(peak_dev);
    settling_time_in_band(times, values, band)
}

/// [`settling_time`] with an explicit absolute band half-width instead of
/// one derived from the trace itself. Use this to compare runs fairly: a
/// per-trace relative band shrinks with the peak, so the better-behaved
/// run would otherwise be judged against the stricter target.
pub fn settling_time_in_band(times: &[f64], values: &[f64], band: f64) -> Option<f64> {
    if times.is_empty() || times.len() != values.len() || !band.is_finite() || band < 0.0 {
        return None;
    }
    let last = *values.last().unwrap();
    let outside = values.iter().rposition(|v| (v - last).abs() > band);
    match outside {
        Some(i) if i + 1 < times.len() => Some(times[i + 1]),
        Some(_) => Some(*times.last().unwrap()),
        None => Some(times[0]),
    }
}

/// Checks two traces share a time base (start and sample spacing), then
/// returns the common prefix length.
fn common_window(a: &Telemetry, b: &Telemetry) -> Result<usize> {
    if a.is_empty() || b.is_empty() {
        return Err(PalsError::WindowMismatch("cannot compare an empty trace".into()));
    }
    let (dta, dtb) = (a.dt(), b.dt());
    match (dta, dtb) {
        (Some(x), Some(y)) if (x - y).abs() <= 1e-9 => {}
        (None, None) => {}
        _ => {
            return Err(PalsError::WindowMismatch(format!(
                "sample spacing differs: {dta:?} vs {dtb:?}"
            )))
        }
    }
    let (ta, tb) = (a.start_time().unwrap(), b.start_time().unwrap());
    if (ta - tb).abs() > 1e-9 {
        return Err(PalsError::WindowMismatch(format!("start times differ: {ta} vs {tb}")));
    }
    Ok(a.len().min(b.len()))
}

/// Roll RMS of `active` relative to `reference` over their common window.
///
/// Identical traces give exactly 1.0 and a roll-free active trace gives
/// 0.0. A roll-free reference against a rolling active trace returns
/// infinity.
pub fn roll_rms_ratio(active: &Telemetry, reference: &Telemetry) -> Result<f64> {
    let n = common_window(active, reference)?;
    let a = rms(&active.series(|r| r.roll())[..n]);
    let p = rms(&reference.series(|r| r.roll())[..n]);
    if p == 0.0 {
        return Ok(if a == 0.0 { 1.0 } else { f64::INFINITY });
    }
    Ok(a / p)
}

/// Summary metrics for one run, optionally referenced against a passive
/// run of the same maneuver.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub rms_roll: f64,
    pub rms_pitch: f64,
    pub peak_roll: f64,
    pub peak_pitch: f64,
    /// Settling time of the roll signal [s].
    pub settling_time: Option<f64>,
    pub two_wheel_lift: Vec<LiftInterval>,
    /// First threshold crossing [s], when the run rolled over.
    pub rolled_over: Option<f64>,
    pub roll_rms_ratio_vs_passive: Option<f64>,
}

impl RunReport {
    pub fn new(telemetry: &Telemetry, passive: Option<&Telemetry>) -> Result<Self> {
        let times = telemetry.series(|r| r.time);
        let roll = telemetry.series(|r| r.roll());
        let pitch = telemetry.series(|r| r.pitch());
        let ratio = match passive {
            Some(p) => Some(roll_rms_ratio(telemetry, p)?),
            None => None,
        };
        Ok(Self {
            rms_roll: rms(&roll),
            rms_pitch: rms(&pitch),
            peak_roll: peak_abs(&roll),
            peak_pitch: peak_abs(&pitch),
            settling_time: settling_time(&times, &roll),
            two_wheel_lift: detect_two_wheel_lift(telemetry),
            rolled_over: detect_rollover(telemetry),
            roll_rms_ratio_vs_passive: ratio,
        })
    }

    /// One human-readable line per metric, for the CLI.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("rms roll      {:.6} rad", self.rms_roll),
            format!("rms pitch     {:.6} rad", self.rms_pitch),
            format!("peak roll     {:.6} rad", self.peak_roll),
            format!("peak pitch    {:.6} rad", self.peak_pitch),
        ];
        match self.settling_time {
            Some(t) => lines.push(format!("roll settling {t:.3} s")),
            None => lines.push("roll settling n/a".into()),
        }
        match self.rolled_over {
            Some(t) => lines.push(format!("rolled over at {t:.3} s")),
            None => lines.push("no rollover".into()),
        }
        if self.two_wheel_lift.is_empty() {
            lines.push("no two-wheel lift".into());
        }
        for iv in &self.two_wheel_lift {
            match iv.end {
                Some(end) => lines.push(format!(
                    "two-wheel lift ({}) {:.3} s to {:.3} s",
                    iv.side.name(),
                    iv.start,
                    end
                )),
                None => lines.push(format!(
                    "two-wheel lift ({}) from {:.3} s, never regained",
                    iv.side.name(),
                    iv.start
                )),
            }
        }
        if let Some(r) = self.roll_rms_ratio_vs_passive {
            lines.push(format!("roll RMS ratio vs passive {r:.4}"));
        }
        lines
    }
}
