//! Acceptance gate: oracle checks for every closed-form relation, property
//! suites for the fit and the torque conversions, and the maneuver-level
//! trend comparisons the simulator must reproduce. One test per criterion,
//! numbered c01..c14; each prints a PASS line with its measured margin
//! (visible with --nocapture). Tolerances and runtime budgets are pinned
//! inline next to each assertion.

use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pals_core::compensation::{
    force_to_torque, steady_state_ax_increment, steady_state_ay_increment, torque_to_force,
    LoadTransferIncrement,
};
use pals_core::controllers::{Controller, ControllerKind, Measurements};
use pals_core::fitting::{self, fit_coefficients, Calibration, CalibrationSample};
use pals_core::maneuvers::ManeuverKind;
use pals_core::metrics::{settling_time_in_band, RunReport};
use pals_core::params::Config;
use pals_core::plant::Plant;
use pals_core::simulation::{run_constant_accel, run_maneuver, ManeuverOptions, RunOutcome};
use pals_core::telemetry::Telemetry;

fn config() -> &'static Config {
    static CONFIG: OnceLock<Config> = OnceLock::new();
    CONFIG.get_or_init(Config::default)
}

fn plant() -> &'static Plant {
    static PLANT: OnceLock<Plant> = OnceLock::new();
    PLANT.get_or_init(|| Plant::new(&config().vehicle).unwrap())
}

fn calibration() -> &'static Calibration {
    static CAL: OnceLock<Calibration> = OnceLock::new();
    CAL.get_or_init(|| fitting::calibrate(plant(), config()).unwrap())
}

/// Runs one maneuver and enforces the every-telemetry invariants (tire
/// loads non-negative, friction budget respected, actuator rating never
/// exceeded, uniform decimated time base).
fn run(maneuver: ManeuverKind, kind: ControllerKind, options: &ManeuverOptions) -> RunOutcome {
    let coeffs = match kind {
        ControllerKind::FfPidNon => Some(&calibration().coefficients),
        _ => None,
    };
    let outcome = run_maneuver(plant(), config(), maneuver, kind, coeffs, options).unwrap();
    outcome.telemetry.validate(&config().vehicle, &config().control).unwrap();
    outcome
}

fn default_options() -> ManeuverOptions {
    ManeuverOptions::from_config(config())
}

fn report(outcome: &RunOutcome, passive: Option<&Telemetry>) -> RunReport {
    RunReport::new(&outcome.telemetry, passive).unwrap()
}

fn finish(label: &str, detail: String, started: Instant, budget_s: f64) {
    let took = started.elapsed().as_secs_f64();
    assert!(
        took < budget_s,
        "{label} exceeded its runtime budget: {took:.3} s >= {budget_s} s"
    );
    println!("PASS {label}: {detail} ({took:.3} s)");
}

#[test]
fn c01_longitudinal_transfer_oracle() {
    let started = Instant::now();
    let value = steady_state_ax_increment(1.0, &config().vehicle);
    // Independent arithmetic from the default parameters: numerator is
    // sprung mass times CMC height plus the unsprung rim terms, divided by
    // twice the wheelbase.
    let numerator = 2700.0 * 0.71 + 2.0 * (62.5 * 0.385 + 62.5 * 0.385);
    let exact = numerator / (2.0 * (1.538 + 1.538));
    let rel = (value - exact).abs() / exact;
    assert!(rel <= 1e-9, "ax increment {value} vs {exact}, rel err {rel:.3e}");
    // 327.25 is the same reference rounded to hundredths of a newton.
    let rounded = 327.25;
    let rel_rounded = (value - rounded).abs() / rounded;
    assert!(rel_rounded <= 1e-4, "ax increment {value} vs rounded {rounded}");
    finish(
        "c01 longitudinal transfer oracle",
        format!("1 m/s^2 -> {value:.4} N, rel err {rel:.1e} <= 1e-9 vs closed form"),
        started,
        0.001,
    );
}

#[test]
fn c02_lateral_transfer_oracle() {
    let started = Instant::now();
    let (front, rear) = steady_state_ay_increment(1.0, &config().vehicle);
    // Independent arithmetic: the transfer moment splits 57/43 between the
    // axles and divides by each track width. 1e-9 binds against these
    // closed forms.
    let numerator = 2700.0 * 0.71 + 2.0 * (62.5 * 0.385 + 62.5 * 0.385);
    let exact_front = 0.57 * numerator / 1.677;
    let exact_rear = 0.43 * numerator / 1.696;
    let rel_front = (front - exact_front).abs() / exact_front;
    let rel_rear = (rear - exact_rear).abs() / exact_rear;
    assert!(rel_front <= 1e-9, "front {front} vs {exact_front}");
    assert!(rel_rear <= 1e-9, "rear {rear} vs {exact_rear}");
    // 684.27 / 510.46 are the references rounded to hundredths (the two
    // roundings are not mutually consistent past that, hence 1e-4 here).
    assert!((front - 684.27).abs() / 684.27 <= 1e-4, "front {front} vs rounded");
    assert!((rear - 510.46).abs() / 510.46 <= 1e-4, "rear {rear} vs rounded");
    finish(
        "c02 lateral transfer oracle",
        format!(
            "1 m/s^2 -> front {front:.4} N, rear {rear:.4} N, rel err {:.1e}/{:.1e}",
            rel_front, rel_rear
        ),
        started,
        0.001,
    );
}

#[test]
fn c03_steady_state_structure_holds_exactly() {
    let started = Instant::now();
    let p = &config().vehicle;
    let mut rng = ChaCha8Rng::seed_from_u64(0xace5);
    for _ in 0..1000 {
        let ax: f64 = rng.gen_range(-12.0..12.0);
        let ay: f64 = rng.gen_range(-12.0..12.0);
        let inc = LoadTransferIncrement::steady_state(ax, ay, 0.0, p);

        // Front/rear antisymmetry of the longitudinal channel and
        // left/right antisymmetry of the lateral channel, exactly.
        assert_eq!(inc.ax_part[0], inc.ax_part[1]);
        assert_eq!(inc.ax_part[2], inc.ax_part[3]);
        assert_eq!(inc.ax_part[2], -inc.ax_part[0]);
        assert_eq!(inc.ay_part[1], -inc.ay_part[0]);
        assert_eq!(inc.ay_part[3], -inc.ay_part[2]);

        // Each channel sums to zero across the four corners, exactly.
        assert_eq!(inc.ax_part.iter().sum::<f64>(), 0.0);
        assert_eq!(inc.ay_part.iter().sum::<f64>(), 0.0);

        // Odd in (ax, ay), exactly.
        let neg = LoadTransferIncrement::steady_state(-ax, -ay, 0.0, p);
        for i in 0..4 {
            assert_eq!(neg.ax_part[i], -inc.ax_part[i]);
            assert_eq!(neg.ay_part[i], -inc.ay_part[i]);
        }

        // Linear: doubling the input doubles every component, exactly.
        let twice = LoadTransferIncrement::steady_state(2.0 * ax, 2.0 * ay, 0.0, p);
        for i in 0..4 {
            assert_eq!(twice.ax_part[i], 2.0 * inc.ax_part[i]);
            assert_eq!(twice.ay_part[i], 2.0 * inc.ay_part[i]);
        }
    }
    finish(
        "c03 steady-state structural invariants",
        "1000 random inputs: antisymmetry, zero sum, oddness, linearity all exact".into(),
        started,
        5.0,
    );
}

#[test]
fn c04_pid_oracle() {
    let started = Instant::now();
    let mut controller = Controller::new(ControllerKind::PalsPid, config(), None).unwrap();
    let dt = 1e-3;
    let meas = Measurements { pitch: 0.01, roll: 0.0, ax: 0.0, ay: 0.0 };
    for _ in 0..1000 {
        controller.update(&meas, dt);
    }
    // kp*0.01 + ki*0.01*1s = 1000*0.01 + 20000*0.01*1.0 = 210, applied
    // with the front-left sign convention.
    let t1 = controller.last_reference[0];
    let expected = -210.0;
    let rel = (t1 - expected).abs() / expected.abs();
    assert!(rel <= 0.01, "T1 {t1} vs {expected}, rel err {rel:.4}");
    finish(
        "c04 pid oracle",
        format!("pitch 0.01 rad for 1 s -> T1 {t1:.2} N m (target -210 +/- 1%)"),
        started,
        0.010,
    );
}

#[test]
fn c05_torque_conversion_and_saturation() {
    let started = Instant::now();
    // Exactly representable pairs round-trip bit-exactly.
    for &(force, beta) in
        &[(5460.0, 20.0), (-5460.0, 20.0), (273.0 * 16.0, 16.0), (1024.0, 32.0), (0.0, 20.0)]
    {
        let torque = force_to_torque(force, beta).unwrap();
        assert_eq!(torque_to_force(torque, beta), force);
    }
    // Arbitrary doubles round-trip to within one unit in the last place
    // (a single multiply and a single divide each round once).
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe7a);
    for _ in 0..1000 {
        let force: f64 = rng.gen_range(-10_000.0..10_000.0);
        let beta: f64 = rng.gen_range(1.0..50.0);
        let back = torque_to_force(force_to_torque(force, beta).unwrap(), beta);
        assert!(
            (back - force).abs() <= force.abs() * f64::EPSILON,
            "roundtrip {force} -> {back} at beta {beta}"
        );
    }
    // Saturation respected on an end-to-end telemetry: the hardest-working
    // maneuver for the roll PID. Every run() in this suite applies the
    // same validation, so the bound holds across all acceptance runs.
    let outcome = run(ManeuverKind::StepSteer, ControllerKind::PalsPid, &default_options());
    let peak = config().control.peak_torque;
    let worst = outcome
        .telemetry
        .rows()
        .iter()
        .flat_map(|r| r.torque_actual.iter().map(|t| t.abs()))
        .fold(0.0_f64, f64::max);
    assert!(worst <= peak * (1.0 + 1e-9));
    finish(
        "c05 torque conversion + saturation",
        format!("roundtrip exact on representable pairs, <= 1 ulp random; peak |T| {worst:.1} <= {peak} N m"),
        started,
        30.0,
    );
}

/// Ground truth for the synthetic fit-recovery checks.
const TRUE_LATERAL: [[f64; 3]; 4] = [
    [700.0, 8.0, 1.2],
    [-700.0, 8.0, -1.2],
    [520.0, -6.0, 0.9],
    [-520.0, -6.0, -0.9],
];
const TRUE_LONGITUDINAL: [f64; 4] = [-330.0, -330.0, 310.0, 310.0];

fn synthetic_channels(
    noise_sigma: f64,
    seed: u64,
) -> (Vec<CalibrationSample>, Vec<CalibrationSample>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move |rng: &mut ChaCha8Rng| -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut lateral = Vec::new();
    for k in 0..200 {
        let ay = -8.5 + 17.0 * (k as f64) / 199.0;
        let mut delta = [0.0; 4];
        for i in 0..4 {
            let [p1, p2, p3] = TRUE_LATERAL[i];
            delta[i] = p1 * ay + p2 * ay * ay + p3 * ay * ay * ay + noise_sigma * gauss(&mut rng);
        }
        lateral.push(CalibrationSample { ax: 0.0, ay, delta_ftz: delta });
    }
    let mut longitudinal = Vec::new();
    for k in 0..200 {
        let ax = -8.0 + 16.0 * (k as f64) / 199.0;
        let mut delta = [0.0; 4];
        for i in 0..4 {
            delta[i] = TRUE_LONGITUDINAL[i] * ax + noise_sigma * gauss(&mut rng);
        }
        longitudinal.push(CalibrationSample { ax, ay: 0.0, delta_ftz: delta });
    }
    (lateral, longitudinal)
}

#[test]
fn c06_fit_recovery() {
    let started = Instant::now();

    // Noiseless: recovery to 1e-6 relative.
    let (lateral, longitudinal) = synthetic_channels(0.0, 1);
    let (coeffs, _, _) = fit_coefficients(&lateral, &longitudinal).unwrap();
    for i in 0..4 {
        for t in 0..3 {
            let rel = (coeffs.lateral[i][t] - TRUE_LATERAL[i][t]).abs() / TRUE_LATERAL[i][t].abs();
            assert!(rel <= 1e-6, "lateral corner {i} term {t}: rel {rel:.2e}");
        }
        let rel =
            (coeffs.longitudinal[i] - TRUE_LONGITUDINAL[i]).abs() / TRUE_LONGITUDINAL[i].abs();
        assert!(rel <= 1e-6, "longitudinal corner {i}: rel {rel:.2e}");
    }

    // Noisy: over 100 seeded trials at sigma = 50 N, at least 99% of all
    // coefficient estimates land within 3 standard errors (3-sigma
    // coverage is 99.73%, so a handful of misses is expected noise).
    let sigma = 50.0;
    let design = DMatrix::from_fn(lateral.len(), 3, |r, c| lateral[r].ay.powi(c as i32 + 1));
    let xtx_inv = (design.transpose() * &design).try_inverse().unwrap();
    let lateral_se: Vec<f64> = (0..3).map(|t| sigma * xtx_inv[(t, t)].sqrt()).collect();
    let sxx: f64 = longitudinal.iter().map(|s| s.ax * s.ax).sum();
    let longitudinal_se = sigma / sxx.sqrt();

    let mut total = 0u32;
    let mut within = 0u32;
    for trial in 0..100u64 {
        let (lat, lon) = synthetic_channels(sigma, 1000 + trial);
        let (c, _, _) = fit_coefficients(&lat, &lon).unwrap();
        for i in 0..4 {
            for t in 0..3 {
                total += 1;
                if (c.lateral[i][t] - TRUE_LATERAL[i][t]).abs() <= 3.0 * lateral_se[t] {
                    within += 1;
                }
            }
            total += 1;
            if (c.longitudinal[i] - TRUE_LONGITUDINAL[i]).abs() <= 3.0 * longitudinal_se {
                within += 1;
            }
        }
    }
    let rate = f64::from(within) / f64::from(total);
    assert!(rate >= 0.99, "3-SE coverage {rate:.4} over {total} estimates");
    finish(
        "c06 fit recovery",
        format!("noiseless <= 1e-6 rel; noisy 3-SE coverage {rate:.4} over {total} estimates"),
        started,
        60.0,
    );
}

#[test]
fn c07_static_equilibrium() {
    let started = Instant::now();
    let outcome = run_constant_accel(
        plant(),
        config(),
        ControllerKind::Passive,
        None,
        0.0,
        0.0,
        1.0,
    )
    .unwrap();
    let last = outcome.telemetry.rows().last().unwrap();
    let total: f64 = last.tire_vertical.iter().sum();
    let expected = 28939.5; // (2700 + 4 * 62.5) * 9.81
    let rel = (total - expected).abs() / expected;
    assert!(rel <= 0.001, "settled tire load sum {total} vs {expected}, rel {rel:.2e}");
    finish(
        "c07 static equilibrium",
        format!("settled total tire load {total:.1} N (target {expected} +/- 0.1%)"),
        started,
        5.0,
    );
}

#[test]
fn c08_step_steer_roll_mitigation() {
    let started = Instant::now();
    let options = default_options();
    let passive = run(ManeuverKind::StepSteer, ControllerKind::Passive, &options);
    let pals = run(ManeuverKind::StepSteer, ControllerKind::PalsPid, &options);
    let ff = run(ManeuverKind::StepSteer, ControllerKind::FfPidNon, &options);

    let pals_ratio =
        report(&pals, Some(&passive.telemetry)).roll_rms_ratio_vs_passive.unwrap();
    let ff_ratio = report(&ff, Some(&passive.telemetry)).roll_rms_ratio_vs_passive.unwrap();
    assert!(pals_ratio <= 0.75, "pals-pid roll RMS ratio {pals_ratio:.4}");
    assert!(
        ff_ratio <= pals_ratio - 0.03,
        "ff-pid-non ratio {ff_ratio:.4} vs pals-pid {pals_ratio:.4}"
    );
    finish(
        "c08 step-steer roll mitigation",
        format!("roll RMS ratio pals-pid {pals_ratio:.4} <= 0.75, ff-pid-non {ff_ratio:.4} <= {:.4}", pals_ratio - 0.03),
        started,
        30.0,
    );
}

#[test]
fn c09_steady_cornering_neutralization() {
    let started = Instant::now();
    let options = default_options(); // scale 0.1
    let limit_rad = 0.15_f64.to_radians();
    let mut worst = 0.0_f64;
    for kind in [ControllerKind::PalsPid, ControllerKind::FfPidNon] {
        let outcome = run(ManeuverKind::SteadyCornering, kind, &options);
        for row in outcome.telemetry.rows() {
            if row.ay.abs() <= 3.0 {
                let roll = row.roll().abs();
                worst = worst.max(roll);
                assert!(
                    roll <= limit_rad,
                    "{} roll {:.5} rad at t {:.2} s (ay {:.2})",
                    kind.name(),
                    row.roll(),
                    row.time,
                    row.ay
                );
            }
        }
    }
    finish(
        "c09 steady-cornering neutralization",
        format!("|roll| <= 0.15 deg while |ay| <= 3 m/s^2; worst {:.4} deg", worst.to_degrees()),
        started,
        60.0,
    );
}

#[test]
fn c10_brake_in_turn_pitch_and_settling() {
    let started = Instant::now();
    let options = default_options();
    let passive = run(ManeuverKind::BrakeInTurn, ControllerKind::Passive, &options);
    let pals = run(ManeuverKind::BrakeInTurn, ControllerKind::PalsPid, &options);
    let ff = run(ManeuverKind::BrakeInTurn, ControllerKind::FfPidNon, &options);

    let mean_abs_pitch = |o: &RunOutcome| {
        let rows = o.telemetry.rows();
        rows.iter().map(|r| r.pitch().abs()).sum::<f64>() / rows.len() as f64
    };
    let p_pitch = mean_abs_pitch(&passive);
    let pals_pitch = mean_abs_pitch(&pals);
    let ff_pitch = mean_abs_pitch(&ff);
    assert!(pals_pitch <= 0.5 * p_pitch, "pals-pid mean |pitch| {pals_pitch:.5} vs passive {p_pitch:.5}");
    assert!(ff_pitch <= 0.5 * p_pitch, "ff-pid-non mean |pitch| {ff_pitch:.5} vs passive {p_pitch:.5}");

    // Settling compared inside one shared absolute band (5% of the passive
    // run's peak roll deviation). A per-run relative band would shrink with
    // each controller's own peak and judge the better run against the
    // stricter target.
    let roll_series = |o: &RunOutcome| -> (Vec<f64>, Vec<f64>) {
        let rows = o.telemetry.rows();
        (rows.iter().map(|r| r.time).collect(), rows.iter().map(|r| r.roll()).collect())
    };
    let (_, passive_roll) = roll_series(&passive);
    let passive_final = *passive_roll.last().unwrap();
    let passive_peak_dev =
        passive_roll.iter().fold(0.0f64, |m, v| m.max((v - passive_final).abs()));
    let band = 0.05 * passive_peak_dev;
    let (pals_t, pals_roll) = roll_series(&pals);
    let (ff_t, ff_roll) = roll_series(&ff);
    let pals_settling =
        settling_time_in_band(&pals_t, &pals_roll, band).expect("pals-pid roll settles");
    let ff_settling = settling_time_in_band(&ff_t, &ff_roll, band).expect("ff-pid-non roll settles");
    assert!(
        ff_settling < pals_settling,
        "roll settling ff {ff_settling:.3} s vs pals {pals_settling:.3} s (band {band:.5} rad)"
    );
    finish(
        "c10 brake-in-turn pitch + settling",
        format!(
            "mean |pitch| passive {p_pitch:.4}, pals {pals_pitch:.4}, ff {ff_pitch:.4} rad; settling ff {ff_settling:.2} s < pals {pals_settling:.2} s"
        ),
        started,
        30.0,
    );
}

#[test]
fn c11_accel_brake_pitch_control() {
    let started = Instant::now();
    let options = default_options();
    let passive = run(ManeuverKind::AccelBrake, ControllerKind::Passive, &options);
    let pals = run(ManeuverKind::AccelBrake, ControllerKind::PalsPid, &options);
    let ff = run(ManeuverKind::AccelBrake, ControllerKind::FfPidNon, &options);

    // Emergency phase: hard brake command while still moving.
    let peak_emergency_pitch = |o: &RunOutcome| {
        o.telemetry
            .rows()
            .iter()
            .filter(|r| r.ax_command < -10.0 && r.velocity[0] > 2.0)
            .map(|r| r.pitch().abs())
            .fold(0.0_f64, f64::max)
    };
    let p_peak = peak_emergency_pitch(&passive);
    let pals_peak = peak_emergency_pitch(&pals);
    let ff_peak = peak_emergency_pitch(&ff);
    assert!(pals_peak <= 0.7 * p_peak, "pals-pid emergency peak pitch {pals_peak:.5} vs passive {p_peak:.5}");
    assert!(ff_peak <= 0.7 * p_peak, "ff-pid-non emergency peak pitch {ff_peak:.5} vs passive {p_peak:.5}");

    // Acceleration phase: positive drive command.
    let mean_accel_pitch = |o: &RunOutcome| {
        let rows: Vec<f64> = o
            .telemetry
            .rows()
            .iter()
            .filter(|r| r.ax_command > 1.0)
            .map(|r| r.pitch().abs())
            .collect();
        rows.iter().sum::<f64>() / rows.len() as f64
    };
    let pals_accel = mean_accel_pitch(&pals);
    let ff_accel = mean_accel_pitch(&ff);
    assert!(
        ff_accel <= 0.5 * pals_accel,
        "ff-pid-non accel-phase mean pitch {ff_accel:.6} vs pals-pid {pals_accel:.6}"
    );
    finish(
        "c11 accel-brake pitch control",
        format!(
            "emergency peak pitch passive {p_peak:.4}, pals {pals_peak:.4}, ff {ff_peak:.4} rad; accel-phase mean ff {ff_accel:.5} <= half of pals {pals_accel:.5}"
        ),
        started,
        30.0,
    );
}

#[test]
fn c12_fishhook_ordering() {
    let started = Instant::now();
    let mut options = default_options();
    let speeds = &config().sweeps.mes_mph;

    #[derive(Clone, Copy, Default)]
    struct Cell {
        rolled: bool,
        closed_lift: bool,
    }
    let mut grid = vec![[Cell::default(); 3]; speeds.len()];
    for (col, kind) in ControllerKind::ALL.into_iter().enumerate() {
        for (row, &mes) in speeds.iter().enumerate() {
            options.mes_mph = mes;
            let outcome = run(ManeuverKind::Fishhook, kind, &options);
            let rep = report(&outcome, None);
            grid[row][col] = Cell {
                rolled: rep.rolled_over.is_some(),
                closed_lift: rep.two_wheel_lift.iter().any(|iv| iv.is_closed()),
            };
        }
    }

    // m1: passive rolls, both actives survive. m2 > m1: the roll PID
    // rolls while the feedforward stack survives with a closed
    // two-wheel-lift episode.
    let m1 = speeds
        .iter()
        .enumerate()
        .find(|&(r, _)| grid[r][0].rolled && !grid[r][1].rolled && !grid[r][2].rolled)
        .map(|(r, &m)| (r, m));
    let (m1_row, m1) = m1.expect("no entrance speed where only the passive car rolls");
    let m2 = speeds
        .iter()
        .enumerate()
        .skip(m1_row + 1)
        .find(|&(r, _)| grid[r][1].rolled && !grid[r][2].rolled && grid[r][2].closed_lift)
        .map(|(_, &m)| m);
    let m2 = m2.expect(
        "no higher entrance speed where the roll PID rolls and the feedforward stack survives with transient lift",
    );
    finish(
        "c12 fishhook ordering",
        format!("passive rolls at {m1:.0} mph with actives intact; pals-pid rolls at {m2:.0} mph while ff-pid-non survives with a closing two-wheel lift"),
        started,
        300.0,
    );
}

#[test]
fn c13_sinusoid_frequency_sweep() {
    let started = Instant::now();
    let mut options = default_options();
    let mut detail = Vec::new();
    for &freq in &config().sweeps.frequencies_hz {
        options.frequency_hz = freq;
        let passive = run(ManeuverKind::Sinusoid, ControllerKind::Passive, &options);
        let pals = run(ManeuverKind::Sinusoid, ControllerKind::PalsPid, &options);
        let ff = run(ManeuverKind::Sinusoid, ControllerKind::FfPidNon, &options);
        let pals_ratio =
            report(&pals, Some(&passive.telemetry)).roll_rms_ratio_vs_passive.unwrap();
        let ff_ratio = report(&ff, Some(&passive.telemetry)).roll_rms_ratio_vs_passive.unwrap();
        assert!(
            ff_ratio < pals_ratio,
            "at {freq} Hz: ff ratio {ff_ratio:.4} !< pals ratio {pals_ratio:.4}"
        );
        detail.push(format!("{freq:.1} Hz {ff_ratio:.2}<{pals_ratio:.2}"));
    }
    finish(
        "c13 sinusoid frequency sweep",
        format!("ff-pid-non roll RMS ratio below pals-pid at every frequency: {}", detail.join(", ")),
        started,
        120.0,
    );
}

#[test]
fn c14_feedforward_dominance() {
    let started = Instant::now();
    let options = default_options();
    let outcome = run(ManeuverKind::SteadyCornering, ControllerKind::FfPidNon, &options);

    // Settled window: past the initial transient and inside the fitted
    // envelope, where the commanded torque is doing quasi-static work.
    let mut pid_sum = 0.0;
    let mut total_sum = 0.0;
    let mut samples = 0usize;
    for row in outcome.telemetry.rows() {
        if row.time < 2.0 || row.ay.abs() > 8.0 {
            continue;
        }
        for i in 0..4 {
            pid_sum += (row.torque_command[i] - row.torque_feedforward[i]).abs();
            total_sum += row.torque_command[i].abs();
            samples += 1;
        }
    }
    assert!(samples > 1000, "too few settled samples: {samples}");
    let share = pid_sum / total_sum;
    assert!(share <= 0.25, "mean PID share {share:.4} of commanded torque");
    finish(
        "c14 feedforward dominance",
        format!("PID share {:.1}% of commanded torque over {samples} settled samples", share * 100.0),
        started,
        60.0,
    );
}
