//! Command-line front end: calibration, single runs, controller
//! comparisons, and the two standard sweeps. Every run writes a telemetry
//! CSV with a full metadata header and a pair of SVG plots.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pals_core::compensation::CompensationCoefficients;
use pals_core::controllers::ControllerKind;
use pals_core::fitting::{self, Calibration};
use pals_core::maneuvers::ManeuverKind;
use pals_core::metrics::RunReport;
use pals_core::params::Config;
use pals_core::plant::Plant;
use pals_core::simulation::{run_maneuver, ManeuverOptions, RunOutcome};
use pals_core::svg::{self, BarChart, LineChart, Series};
use pals_core::telemetry::Telemetry;
use pals_core::{PalsError, Result};

const RAD_TO_DEG: f64 = 180.0 / std::f64::consts::PI;

#[derive(Parser)]
#[command(
    name = "palsim",
    version,
    about = "Full-car suspension simulator with a pluggable active control stack"
)]
struct Cli {
    /// TOML parameter file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for telemetry, plots, and coefficient files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate the load-transfer compensation polynomials against the
    /// plant and write the coefficient file plus the raw sample table.
    Fit,

    /// Simulate one maneuver under one controller.
    Run {
        /// step-steer | steady-cornering | brake-in-turn | accel-brake |
        /// fishhook | sinusoid
        #[arg(long)]
        maneuver: ManeuverKind,

        /// passive | pals-pid | ff-pid-non
        #[arg(long, default_value = "passive")]
        controller: ControllerKind,

        #[command(flatten)]
        opts: RunOpts,
    },

    /// Run all three controllers on one maneuver and report each active
    /// stack against the passive baseline.
    Compare {
        /// step-steer | steady-cornering | brake-in-turn | accel-brake |
        /// fishhook | sinusoid
        #[arg(long)]
        maneuver: ManeuverKind,

        #[command(flatten)]
        opts: RunOpts,
    },

    /// Fishhook entrance-speed sweep over every controller.
    SweepMes {
        #[command(flatten)]
        opts: RunOpts,
    },

    /// Sinusoid frequency sweep over every controller, reporting roll RMS
    /// ratios against passive per frequency.
    SweepFreq {
        #[command(flatten)]
        opts: RunOpts,
    },
}

/// Options shared by everything that simulates.
#[derive(clap::Args)]
struct RunOpts {
    /// Fishhook entrance speed [mph].
    #[arg(long)]
    mes: Option<f64>,

    /// Sinusoid steer frequency [Hz].
    #[arg(long)]
    freq: Option<f64>,

    /// Sinusoid steering-wheel amplitude [deg].
    #[arg(long)]
    amp: Option<f64>,

    /// Steady-cornering duration factor (1.0 = full 400 s ramp).
    #[arg(long)]
    scale: Option<f64>,

    /// Coefficient file for ff-pid-non. Without it, an existing
    /// <out>/coefficients.txt is reused, else a calibration runs first.
    #[arg(long)]
    coeffs: Option<PathBuf>,

    /// Exit with status 2 when any simulated run rolls over.
    #[arg(long)]
    fail_on_rollover: bool,
}

impl RunOpts {
    fn maneuver_options(&self, config: &Config) -> ManeuverOptions {
        let mut options = ManeuverOptions::from_config(config);
        if let Some(v) = self.mes {
            options.mes_mph = v;
        }
        if let Some(v) = self.freq {
            options.frequency_hz = v;
        }
        if let Some(v) = self.amp {
            options.amplitude_deg = v;
        }
        if let Some(v) = self.scale {
            options.scale = v;
        }
        options
    }
}

fn main() -> ExitCode {
    // Exit code 2 is reserved for rollover, so usage errors map to 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(PalsError::NumericalDivergence { time, what }) => {
            eprintln!("error: numerical divergence at t = {time:.3} s: {what}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    std::fs::create_dir_all(&cli.out)?;
    let plant = Plant::new(&config.vehicle)?;

    match &cli.command {
        Command::Fit => {
            run_fit(&plant, &config, &cli.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { maneuver, controller, opts } => {
            run_single(&plant, &config, &cli.out, *maneuver, *controller, opts)
        }
        Command::Compare { maneuver, opts } => {
            run_compare(&plant, &config, &cli.out, *maneuver, opts)
        }
        Command::SweepMes { opts } => run_sweep_mes(&plant, &config, &cli.out, opts),
        Command::SweepFreq { opts } => run_sweep_freq(&plant, &config, &cli.out, opts),
    }
}

fn run_fit(plant: &Plant, config: &Config, out: &Path) -> Result<()> {
    println!("calibrating against the plant (lateral ramp + longitudinal levels)...");
    let calibration = fitting::calibrate(plant, config)?;
    write_fit_outputs(&calibration, out)?;
    print_fit_summary(&calibration);
    Ok(())
}

fn write_fit_outputs(calibration: &Calibration, out: &Path) -> Result<()> {
    let coeff_path = out.join("coefficients.txt");
    calibration.coefficients.save(&coeff_path)?;
    let table_path = out.join("calibration_samples.csv");
    fitting::save_sample_table(&table_path, calibration)?;
    println!("coefficients -> {}", coeff_path.display());
    println!("sample table -> {}", table_path.display());
    Ok(())
}

fn print_fit_summary(calibration: &Calibration) {
    let channels = [
        ("lateral", &calibration.lateral_report, calibration.lateral_samples.len()),
        ("longitudinal", &calibration.longitudinal_report, calibration.longitudinal_samples.len()),
    ];
    for (name, report, count) in channels {
        println!("{name} channel: {count} samples");
        for corner in 0..4 {
            println!(
                "  corner {}: residual rms {:8.2} N over a {:9.2} N range",
                corner + 1,
                report.residual_rms[corner],
                report.delta_range[corner]
            );
        }
    }
}

/// Loads or produces the compensation coefficients a feedforward run needs.
fn ensure_coefficients(
    plant: &Plant,
    config: &Config,
    opts: &RunOpts,
    out: &Path,
) -> Result<CompensationCoefficients> {
    if let Some(path) = &opts.coeffs {
        return CompensationCoefficients::load(path);
    }
    let default_path = out.join("coefficients.txt");
    if default_path.exists() {
        println!("using coefficients from {}", default_path.display());
        return CompensationCoefficients::load(&default_path);
    }
    println!("no coefficient file found; calibrating first...");
    let calibration = fitting::calibrate(plant, config)?;
    write_fit_outputs(&calibration, out)?;
    Ok(calibration.coefficients)
}

/// One simulated run: maneuver metadata, validation, CSV, plots.
struct CompletedRun {
    controller: ControllerKind,
    outcome: RunOutcome,
    report: RunReport,
}

fn simulate(
    plant: &Plant,
    config: &Config,
    maneuver: ManeuverKind,
    controller: ControllerKind,
    coefficients: Option<&CompensationCoefficients>,
    options: &ManeuverOptions,
    passive_reference: Option<&Telemetry>,
) -> Result<CompletedRun> {
    let mut outcome = run_maneuver(plant, config, maneuver, controller, coefficients, options)?;
    outcome.telemetry.set_meta("maneuver", maneuver.name());
    append_config_metadata(&mut outcome.telemetry, config);
    outcome.telemetry.validate(&config.vehicle, &config.control)?;
    let report = RunReport::new(&outcome.telemetry, passive_reference)?;
    Ok(CompletedRun { controller, outcome, report })
}

/// Flattens every resolved parameter into the telemetry header so a CSV
/// is self-describing without the config file that produced it.
fn append_config_metadata(telemetry: &mut Telemetry, config: &Config) {
    fn walk(prefix: &str, value: &toml::Value, telemetry: &mut Telemetry) {
        match value {
            toml::Value::Table(map) => {
                for (key, child) in map {
                    walk(&format!("{prefix}.{key}"), child, telemetry);
                }
            }
            leaf => telemetry.set_meta(prefix, leaf),
        }
    }
    let value = toml::Value::try_from(config).expect("config serializes to TOML");
    walk("config", &value, telemetry);
}

fn save_run(out: &Path, stem: &str, run: &CompletedRun, config: &Config) -> Result<PathBuf> {
    let csv_path = out.join(format!("{stem}.csv"));
    run.outcome
        .telemetry
        .save(&csv_path, config.sim.csv_significant_digits)?;
    Ok(csv_path)
}

fn attitude_plot(out: &Path, stem: &str, runs: &[&CompletedRun]) -> Result<()> {
    let mut roll = Vec::new();
    let mut pitch = Vec::new();
    for run in runs {
        let t = &run.outcome.telemetry;
        let name = run.controller.name();
        roll.push(Series::new(
            name,
            t.rows().iter().map(|r| (r.time, r.roll() * RAD_TO_DEG)).collect(),
        ));
        pitch.push(Series::new(
            name,
            t.rows().iter().map(|r| (r.time, r.pitch() * RAD_TO_DEG)).collect(),
        ));
    }
    let roll_chart = LineChart {
        title: format!("{stem}: chassis roll"),
        x_label: "time [s]".into(),
        y_label: "roll [deg]".into(),
        series: roll,
    };
    svg::save(&out.join(format!("{stem}_roll.svg")), &roll_chart.render())?;
    let pitch_chart = LineChart {
        title: format!("{stem}: chassis pitch"),
        x_label: "time [s]".into(),
        y_label: "pitch [deg]".into(),
        series: pitch,
    };
    svg::save(&out.join(format!("{stem}_pitch.svg")), &pitch_chart.render())?;
    Ok(())
}

fn torque_plot(out: &Path, stem: &str, runs: &[&CompletedRun]) -> Result<()> {
    let mut series = Vec::new();
    for run in runs {
        if run.controller == ControllerKind::Passive {
            continue;
        }
        let t = &run.outcome.telemetry;
        series.push(Series::new(
            format!("{} command", run.controller.name()),
            t.rows().iter().map(|r| (r.time, r.torque_command[0])).collect(),
        ));
        series.push(Series::new(
            format!("{} actual", run.controller.name()),
            t.rows().iter().map(|r| (r.time, r.torque_actual[0])).collect(),
        ));
    }
    if series.is_empty() {
        return Ok(());
    }
    let chart = LineChart {
        title: format!("{stem}: front-left rocker torque"),
        x_label: "time [s]".into(),
        y_label: "torque [N m]".into(),
        series,
    };
    svg::save(&out.join(format!("{stem}_torque.svg")), &chart.render())
}

fn print_report(label: &str, run: &CompletedRun) {
    println!("[{label}]");
    for line in run.report.summary_lines() {
        println!("  {line}");
    }
}

fn rollover_exit(runs: &[&CompletedRun], fail_on_rollover: bool) -> ExitCode {
    let any = runs.iter().any(|r| r.report.rolled_over.is_some());
    if any && fail_on_rollover {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn run_single(
    plant: &Plant,
    config: &Config,
    out: &Path,
    maneuver: ManeuverKind,
    controller: ControllerKind,
    opts: &RunOpts,
) -> Result<ExitCode> {
    let coefficients = match controller {
        ControllerKind::FfPidNon => Some(ensure_coefficients(plant, config, opts, out)?),
        _ => None,
    };
    let options = opts.maneuver_options(config);
    let run = simulate(plant, config, maneuver, controller, coefficients.as_ref(), &options, None)?;
    let stem = run_stem(maneuver, controller, &options);
    let csv_path = save_run(out, &stem, &run, config)?;
    attitude_plot(out, &stem, &[&run])?;
    torque_plot(out, &stem, &[&run])?;
    println!("telemetry -> {}", csv_path.display());
    print_report(&stem, &run);
    Ok(rollover_exit(&[&run], opts.fail_on_rollover))
}

/// File stem carrying the parameters that distinguish repeat invocations.
fn run_stem(maneuver: ManeuverKind, controller: ControllerKind, options: &ManeuverOptions) -> String {
    let suffix = match maneuver {
        ManeuverKind::Fishhook => format!("_mes{:.0}", options.mes_mph),
        ManeuverKind::Sinusoid => format!("_f{:.1}", options.frequency_hz),
        _ => String::new(),
    };
    format!("{}_{}{suffix}", maneuver.name(), controller.name())
}

fn run_compare(
    plant: &Plant,
    config: &Config,
    out: &Path,
    maneuver: ManeuverKind,
    opts: &RunOpts,
) -> Result<ExitCode> {
    let coefficients = ensure_coefficients(plant, config, opts, out)?;
    let options = opts.maneuver_options(config);

    let passive = simulate(plant, config, maneuver, ControllerKind::Passive, None, &options, None)?;
    let mut runs = vec![passive];
    for kind in [ControllerKind::PalsPid, ControllerKind::FfPidNon] {
        let coeffs = (kind == ControllerKind::FfPidNon).then_some(&coefficients);
        let run = simulate(
            plant,
            config,
            maneuver,
            kind,
            coeffs,
            &options,
            Some(&runs[0].outcome.telemetry),
        )?;
        runs.push(run);
    }

    for run in &runs {
        let stem = run_stem(maneuver, run.controller, &options);
        let csv_path = save_run(out, &stem, run, config)?;
        println!("telemetry -> {}", csv_path.display());
    }

    let all: Vec<&CompletedRun> = runs.iter().collect();
    let stem = maneuver.name();
    attitude_plot(out, stem, &all)?;
    torque_plot(out, stem, &all)?;

    let ratios: Vec<f64> = runs[1..]
        .iter()
        .map(|r| r.report.roll_rms_ratio_vs_passive.unwrap_or(f64::NAN))
        .collect();
    let chart = BarChart {
        title: format!("{stem}: roll RMS ratio vs passive"),
        y_label: "ratio".into(),
        groups: vec![stem.to_string()],
        series: runs[1..]
            .iter()
            .zip(&ratios)
            .map(|(r, ratio)| (r.controller.name().to_string(), vec![*ratio]))
            .collect(),
    };
    svg::save(&out.join(format!("{stem}_rms_ratio.svg")), &chart.render())?;

    for run in &runs {
        print_report(&run_stem(maneuver, run.controller, &options), run);
    }
    Ok(rollover_exit(&all, opts.fail_on_rollover))
}

fn run_sweep_mes(plant: &Plant, config: &Config, out: &Path, opts: &RunOpts) -> Result<ExitCode> {
    let coefficients = ensure_coefficients(plant, config, opts, out)?;
    let mut options = opts.maneuver_options(config);
    let speeds = config.sweeps.mes_mph.clone();

    let mut peak_by_controller: Vec<(String, Vec<f64>)> = Vec::new();
    let mut all_runs: Vec<CompletedRun> = Vec::new();
    println!("fishhook entrance-speed sweep: {speeds:?} mph");
    for kind in ControllerKind::ALL {
        let coeffs = (kind == ControllerKind::FfPidNon).then_some(&coefficients);
        let mut peaks = Vec::new();
        for &mes in &speeds {
            options.mes_mph = mes;
            let run = simulate(plant, config, ManeuverKind::Fishhook, kind, coeffs, &options, None)?;
            let stem = run_stem(ManeuverKind::Fishhook, kind, &options);
            save_run(out, &stem, &run, config)?;
            let verdict = match run.report.rolled_over {
                Some(t) => format!("rolled over at {t:.2} s"),
                None => format!("survived, peak roll {:.3} rad", run.report.peak_roll),
            };
            let lifts = run
                .report
                .two_wheel_lift
                .iter()
                .map(|iv| {
                    let end = iv.end.map_or("open".to_string(), |e| format!("{e:.2}"));
                    format!("{}[{:.2},{end}]", iv.side.name(), iv.start)
                })
                .collect::<Vec<_>>()
                .join(" ");
            println!("  {:10} mes {mes:4.0}: {verdict}  {lifts}", kind.name());
            peaks.push(run.report.peak_roll);
            all_runs.push(run);
        }
        peak_by_controller.push((kind.name().to_string(), peaks));
    }

    let chart = BarChart {
        title: "fishhook sweep: peak roll by entrance speed".into(),
        y_label: "peak roll [rad]".into(),
        groups: speeds.iter().map(|m| format!("{m:.0} mph")).collect(),
        series: peak_by_controller,
    };
    svg::save(&out.join("sweep_mes_peak_roll.svg"), &chart.render())?;

    let refs: Vec<&CompletedRun> = all_runs.iter().collect();
    Ok(rollover_exit(&refs, opts.fail_on_rollover))
}

fn run_sweep_freq(plant: &Plant, config: &Config, out: &Path, opts: &RunOpts) -> Result<ExitCode> {
    let coefficients = ensure_coefficients(plant, config, opts, out)?;
    let mut options = opts.maneuver_options(config);
    let freqs = config.sweeps.frequencies_hz.clone();

    let mut ratio_by_controller: Vec<(String, Vec<f64>)> =
        vec![("pals-pid".into(), Vec::new()), ("ff-pid-non".into(), Vec::new())];
    let mut all_runs: Vec<CompletedRun> = Vec::new();
    println!("sinusoid frequency sweep: {freqs:?} Hz");
    for &freq in &freqs {
        options.frequency_hz = freq;
        let passive =
            simulate(plant, config, ManeuverKind::Sinusoid, ControllerKind::Passive, None, &options, None)?;
        let passive_stem = run_stem(ManeuverKind::Sinusoid, ControllerKind::Passive, &options);
        save_run(out, &passive_stem, &passive, config)?;

        for (slot, kind) in [ControllerKind::PalsPid, ControllerKind::FfPidNon].into_iter().enumerate() {
            let coeffs = (kind == ControllerKind::FfPidNon).then_some(&coefficients);
            let run = simulate(
                plant,
                config,
                ManeuverKind::Sinusoid,
                kind,
                coeffs,
                &options,
                Some(&passive.outcome.telemetry),
            )?;
            let stem = run_stem(ManeuverKind::Sinusoid, kind, &options);
            save_run(out, &stem, &run, config)?;
            let ratio = run.report.roll_rms_ratio_vs_passive.unwrap_or(f64::NAN);
            println!("  {freq:.1} Hz {:10}: roll RMS ratio {ratio:.4}", kind.name());
            ratio_by_controller[slot].1.push(ratio);
            all_runs.push(run);
        }
        all_runs.push(passive);
    }

    let chart = BarChart {
        title: "sinusoid sweep: roll RMS ratio vs passive".into(),
        y_label: "ratio".into(),
        groups: freqs.iter().map(|f| format!("{f:.1} Hz")).collect(),
        series: ratio_by_controller,
    };
    svg::save(&out.join("sweep_freq_rms_ratio.svg"), &chart.render())?;

    let refs: Vec<&CompletedRun> = all_runs.iter().collect();
    Ok(rollover_exit(&refs, opts.fail_on_rollover))
}
