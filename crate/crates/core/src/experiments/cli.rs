//! `memsvib` command line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use super::response::{backbone, hysteresis_gap, run_response_curve, write_jumps_csv, write_response_csv};
use super::sweep::{run_frequency_sweep, sweep_summary_json, write_sweep_csv, FrequencyGrid, SweepSpec};
use super::transient::{run_transient, write_cycles_csv, write_envelope_csv, TransientSpec};
use super::{operating_point, ResponseSpec, SweepDirection};
use crate::analysis::{
    analytic_energy_series, coupling_coeffs, error_stats, imposed_trajectory, numeric_energy_series,
    write_energy_csv,
};
use crate::config::MirrorFile;
use crate::control::{run_pll_loop, write_history_csv, Control, PllGains, PllOptions};
use crate::error::{Error, Result};
use crate::sim::{integrate, measure_cycles, IntegratorConfig};
use crate::vibration::{peak_from_g_rms, Axis, VibrationProfile};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "memsvib", version, about = "Resonant MEMS mirror under single-tone vibration")]
struct Cli {
    /// Mirror description file (TOML); the built-in mirror when omitted.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// PLL proportional gain.
    #[arg(long, global = true)]
    kp: Option<f64>,
    /// PLL integral gain.
    #[arg(long, global = true)]
    ki: Option<f64>,
    /// Drive duty cycle.
    #[arg(long, global = true)]
    duty: Option<f64>,
    /// Drive high voltage [V].
    #[arg(long, global = true)]
    voltage: Option<f64>,
    /// Relative tolerance of the adaptive integrator.
    #[arg(long, global = true)]
    rtol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Directions {
    Up,
    Down,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ControlArg {
    Open,
    Pll,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EnergySource {
    Imposed,
    Simulated,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stepped actuation-frequency sweep without vibration.
    Respcurve {
        #[arg(long, value_enum, default_value = "both")]
        direction: Directions,
        /// Normalized actuation frequency range and step.
        #[arg(long, default_value_t = 0.95)]
        start: f64,
        #[arg(long, default_value_t = 1.20)]
        end: f64,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
    },
    /// Tone switched on at the settled operating point.
    Transient {
        #[arg(long)]
        axis: Axis,
        /// Tone frequency / f_ref.
        #[arg(long)]
        fnorm: f64,
        #[arg(long, default_value_t = 2.0)]
        grms: f64,
        #[arg(long, value_enum, default_value = "open")]
        control: ControlArg,
        #[arg(long, default_value_t = 200)]
        pre_cycles: usize,
        #[arg(long, default_value_t = 3000)]
        post_cycles: usize,
        /// Vibration axis misalignment [deg].
        #[arg(long, default_value_t = 0.0)]
        misalign_deg: f64,
    },
    /// STD errors over a grid of tone frequencies.
    Sweep {
        #[arg(long)]
        axis: Axis,
        #[arg(long, value_enum, default_value = "open")]
        control: ControlArg,
        #[arg(long, default_value_t = 2.0)]
        grms: f64,
        #[arg(long, default_value_t = 0.42)]
        start: f64,
        #[arg(long, default_value_t = 2.09)]
        end: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 0.0005)]
        fine_step: f64,
        /// Half-width of the refined regions around 1 and 2 (0 disables).
        #[arg(long, default_value_t = 0.05)]
        fine_width: f64,
        #[arg(long, default_value_t = 0.0)]
        misalign_deg: f64,
    },
    /// Per-period vibration energy: quadrature against the closed form.
    Energy {
        #[arg(long)]
        axis: Axis,
        /// Tone frequency / mirror frequency.
        #[arg(long)]
        fnorm: f64,
        #[arg(long, default_value_t = 2.0)]
        grms: f64,
        /// Imposed amplitude [rad] (imposed source only).
        #[arg(long, default_value_t = 0.2)]
        theta: f64,
        #[arg(long, default_value_t = 400)]
        periods: usize,
        #[arg(long, value_enum, default_value = "imposed")]
        source: EnergySource,
    },
    /// PLL run from the settled open-loop state, optionally with a tone.
    Plldemo {
        #[arg(long)]
        axis: Option<Axis>,
        #[arg(long, default_value_t = 1.0)]
        fnorm: f64,
        #[arg(long, default_value_t = 2.0)]
        grms: f64,
        /// Mirror periods to simulate.
        #[arg(long, default_value_t = 2000)]
        periods: usize,
        /// First PLL period relative to the settled period.
        #[arg(long, default_value_t = 1.0)]
        period_scale: f64,
    },
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e @ (Error::Divergence { .. } | Error::StepUnderflow { .. })) => {
            let path = cli.out.join("diagnostics.txt");
            let written = std::fs::create_dir_all(&cli.out)
                .and_then(|_| std::fs::write(&path, format!("{e}\n{e:?}\n{:#?}\n", cli)));
            eprintln!("error: {e}");
            match written {
                Ok(()) => eprintln!("diagnostics: {}", path.display()),
                Err(w) => eprintln!("could not write diagnostics: {w}"),
            }
            EXIT_DIVERGENCE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json(dir: &Path, name: &str, v: &serde_json::Value) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| Error::Io(e.into()))?;
    writeln!(w)?;
    Ok(())
}

fn control_of(arg: ControlArg, gains: PllGains) -> Control {
    match arg {
        ControlArg::Open => Control::OpenLoop,
        ControlArg::Pll => Control::Pll(PllOptions::with_gains(gains)),
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let mut file = match &cli.params {
        Some(p) => MirrorFile::load(p)?,
        None => MirrorFile::builtin(),
    };
    if let Some(v) = cli.kp {
        file.pll.kp = v;
    }
    if let Some(v) = cli.ki {
        file.pll.ki = v;
    }
    if let Some(v) = cli.duty {
        file.drive.duty = v;
    }
    if let Some(v) = cli.voltage {
        file.drive.hv_voltage = v;
    }
    file.drive.validate()?;
    let params = &file.mirror;
    let mut integ = IntegratorConfig::for_mirror(params);
    if let Some(r) = cli.rtol {
        integ = integ.with_tolerances(r, 1e-12 * params.theta_ref);
    }
    std::fs::create_dir_all(&cli.out)?;
    let out = cli.out.as_path();
    let tr = params.theta_ref;

    match cli.command {
        Command::Respcurve { direction, start, end, step } => {
            let spec = ResponseSpec { start, end, step, ..Default::default() };
            let dirs: &[SweepDirection] = match direction {
                Directions::Up => &[SweepDirection::Up],
                Directions::Down => &[SweepDirection::Down],
                Directions::Both => &[SweepDirection::Up, SweepDirection::Down],
            };
            let curves = dirs
                .iter()
                .map(|&d| run_response_curve(params, file.drive, d, &spec, &integ))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<_> = curves.iter().collect();
            write_response_csv(&refs, tr, create(out, "respcurve.csv")?)?;
            write_jumps_csv(&refs, tr, create(out, "jumps.csv")?)?;
            let amps: Vec<f64> = (1..=40).map(|i| 0.025 * i as f64 * tr).collect();
            let mean_v2 = file.drive.duty * file.drive.hv_voltage.powi(2);
            let bb = backbone(params, mean_v2, &amps)?;
            let mut w = create(out, "backbone.csv")?;
            writeln!(w, "# memsvib backbone v1")?;
            writeln!(w, "# amplitude / theta_ref, free-oscillation frequency / f_ref at the mean-square drive voltage")?;
            writeln!(w, "amplitude,frequency")?;
            for (a, f) in &bb {
                writeln!(w, "{:.6},{:.10}", a / tr, f / params.f_ref)?;
            }
            let gap = (curves.len() == 2).then(|| hysteresis_gap(&curves[0], &curves[1]));
            let summary = serde_json::json!({
                "format": "memsvib respcurve-summary v1",
                "curves": curves.iter().map(|c| serde_json::json!({
                    "direction": c.direction,
                    "oscillating_range": c.oscillating_range(),
                    "jumps": c.jumps.iter().map(|j| serde_json::json!({
                        "from_fnorm": j.from.fnorm, "to_fnorm": j.to.fnorm,
                        "from_amplitude": j.from.amplitude / tr, "to_amplitude": j.to.amplitude / tr,
                    })).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "hysteresis_gap": gap,
            });
            write_json(out, "summary.json", &summary)?;
            for c in &curves {
                println!("{}: oscillating range {:?}, {} jump(s)", c.direction, c.oscillating_range(), c.jumps.len());
            }
        }
        Command::Transient {
            axis,
            fnorm,
            grms,
            control,
            pre_cycles,
            post_cycles,
            misalign_deg,
        } => {
            let op = operating_point(params, file.drive, &integ)?;
            let spec = TransientSpec {
                axis,
                g_rms: grms,
                fnorm,
                misalignment: misalign_deg.to_radians(),
                control: control_of(control, file.pll),
                pre_cycles,
                post_cycles,
            };
            let rep = run_transient(params, &op, &spec, &integ)?;
            rep.trace.write_csv(create(out, "trace.csv")?)?;
            write_cycles_csv(&rep.cycles, create(out, "cycles.csv")?)?;
            write_envelope_csv(&rep, params, create(out, "envelope.csv")?)?;
            if !rep.pll_history.is_empty() {
                write_history_csv(&rep.pll_history, create(out, "pll_history.csv")?)?;
            }
            let v = serde_json::to_value(&rep).map_err(|e| Error::Io(e.into()))?;
            write_json(out, "summary.json", &v)?;
            println!(
                "beat: expected {:.5}, amplitude envelope {:.5}, frequency envelope {:.5} (bin {:.5})",
                rep.expected_beat, rep.amplitude_beat.frequency, rep.frequency_beat.frequency, rep.amplitude_beat.bin_width
            );
            println!(
                "STD amplitude {:.4} %, STD frequency {:.5} %",
                rep.after.std_amplitude_pct, rep.after.std_frequency_pct
            );
        }
        Command::Sweep {
            axis,
            control,
            grms,
            start,
            end,
            step,
            fine_step,
            fine_width,
            misalign_deg,
        } => {
            let grid = FrequencyGrid {
                start,
                end,
                step,
                fine_step,
                fine_halfwidth: fine_width,
                fine_centres: vec![1.0, 2.0],
            }
            .build()?;
            let mut spec = SweepSpec::new(axis, control_of(control, file.pll), grid);
            spec.g_rms = grms;
            spec.misalignment = misalign_deg.to_radians();
            let op = operating_point(params, file.drive, &integ)?;
            let res = run_frequency_sweep(&spec, params, &op, &integ)?;
            write_sweep_csv(&res, create(out, "sweep.csv")?)?;
            write_json(out, "summary.json", &sweep_summary_json(&res))?;
            println!("{} points, {} failed", res.rows.len(), res.failed_rows());
            for f in &res.features {
                println!("{:?} {:?} at {:.4}: {:.4} %", f.kind, f.metric, f.fnorm, f.value);
            }
        }
        Command::Energy {
            axis,
            fnorm,
            grms,
            theta,
            periods,
            source,
        } => {
            let (trace, amp, f_m, profile) = match source {
                EnergySource::Imposed => {
                    let f_m = params.f_ref;
                    let profile = VibrationProfile::tone(axis, peak_from_g_rms(grms), fnorm * f_m);
                    (imposed_trajectory(theta, f_m, periods, 64)?, theta, f_m, profile)
                }
                EnergySource::Simulated => {
                    let op = operating_point(params, file.drive, &integ)?;
                    let f_m = 0.5 * op.actuation_frequency();
                    let profile = VibrationProfile::tone(axis, peak_from_g_rms(grms), fnorm * f_m);
                    let mut drive = op.open_loop_drive()?;
                    let tr = integrate(params, op.state, &mut drive, &profile, periods as f64 / f_m, &integ)?;
                    (tr, op.amplitude, f_m, profile)
                }
            };
            let coeffs = coupling_coeffs(params.mass, params.com_offset, amp)?;
            let numeric = numeric_energy_series(&trace, params, &profile)?;
            // The quadrature over [t, t + T] is compared with the closed form at the window centre.
            let mid: Vec<f64> = numeric.iter().map(|x| x.0 + 0.5 / f_m).collect();
            let analytic = analytic_energy_series(&coeffs, f_m, &profile, &mid)?;
            let times: Vec<f64> = numeric.iter().map(|x| x.0).collect();
            let values: Vec<f64> = numeric.iter().map(|x| x.1).collect();
            write_energy_csv(&times, &values, &analytic, create(out, "energy.csv")?)?;
            let peak = |x: &[f64]| x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let summary = serde_json::json!({
                "format": "memsvib energy-summary v1",
                "axis": axis.to_string(),
                "mirror_frequency_hz": f_m,
                "amplitude_rad": amp,
                "coefficients": coeffs,
                "peak_numeric_j": peak(&values),
                "peak_analytic_j": peak(&analytic),
            });
            write_json(out, "summary.json", &summary)?;
            println!("peak |dE|: numeric {:.6e} J, closed form {:.6e} J", peak(&values), peak(&analytic));
        }
        Command::Plldemo {
            axis,
            fnorm,
            grms,
            periods,
            period_scale,
        } => {
            let op = operating_point(params, file.drive, &integ)?;
            let f_m = 0.5 * op.actuation_frequency();
            let profile = match axis {
                Some(a) => VibrationProfile::tone(a, peak_from_g_rms(grms), fnorm * params.f_ref),
                None => VibrationProfile::none(),
            };
            let options = PllOptions {
                gains: file.pll,
                t_beta_ref: None,
                initial_period_scale: period_scale,
            };
            let t_end = periods as f64 / f_m;
            let run = match run_pll_loop(params, &op, &profile, options, t_end, &integ) {
                Ok(r) => r,
                Err(Error::LockLost { t, amplitude, history }) => {
                    write_history_csv(&history, create(out, "pll_history.csv")?)?;
                    return Err(Error::LockLost { t, amplitude, history: Vec::new() });
                }
                Err(e) => return Err(e),
            };
            run.trace.write_csv(create(out, "trace.csv")?)?;
            write_history_csv(&run.history, create(out, "pll_history.csv")?)?;
            let cycles = measure_cycles(&run.trace)?;
            let half = 0.5 * t_end;
            let stats = error_stats(&cycles, (half, t_end), (params.theta_ref, params.f_ref)).ok();
            let last_error = run.history.last().map(|r| r.error);
            let summary = serde_json::json!({
                "format": "memsvib plldemo-summary v1",
                "gains": file.pll,
                "t_beta_ref": -op.last_crossing,
                "resyncs": run.resyncs,
                "updates": run.history.len(),
                "last_phase_error_s": last_error,
                "second_half_stats": stats,
            });
            write_json(out, "summary.json", &summary)?;
            println!("{} PLL updates, last phase error {:?} s", run.history.len(), last_error);
            if let Some(s) = stats {
                println!("mean frequency {:.8} f_ref, STD amplitude {:.4} %", s.mean_frequency, s.std_amplitude_pct);
            }
        }
    }
    Ok(())
}
