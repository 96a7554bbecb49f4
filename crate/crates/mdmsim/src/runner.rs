//! Execute a validated experiment config: render every artifact in
//! memory first (a failing run writes nothing), then emit the data files
//! and their checksum manifest. Reruns with the same config and seed
//! produce byte-identical data files; only the manifest timestamp may
//! differ.

use std::path::PathBuf;

use log::info;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{
    BankCalibrateConfig, DemixConfig, Experiment, ExperimentConfig, MziSweepConfig,
    NetworkRunConfig,
};
use crate::coupler::coupling_ratio;
use crate::error::Result;
use crate::io::{self, columnar, fmt_f64, matrix_block, Artifact};
use crate::linalg;
use crate::mzi::{disambiguate, fit_fringes, recover_alpha, sweep, sweep_noisy};
use crate::network::demix_detailed;
use crate::weightbank::{apply_mixing, bank_output, calibrate, ChannelPowerVector};

/// Environment variable that overrides the config's `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "MDMSIM_OUTPUT_DIR";

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    /// Directory the files were written into.
    pub dir: PathBuf,
    /// Data files plus the manifest (last entry).
    pub files: Vec<PathBuf>,
    /// One-line result summary (also logged).
    pub summary: String,
}

/// The config's output directory, unless `MDMSIM_OUTPUT_DIR` overrides it.
pub fn resolve_output_dir(config: &ExperimentConfig) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => config.output_dir.clone(),
    }
}

/// Run the configured experiment into its resolved output directory.
pub fn run(config: &ExperimentConfig) -> Result<RunArtifacts> {
    run_into(config, resolve_output_dir(config))
}

/// Run the configured experiment into an explicit directory.
pub fn run_into(config: &ExperimentConfig, dir: PathBuf) -> Result<RunArtifacts> {
    let (artifacts, summary) = render(config)?;
    let files = io::write_all(&dir, &artifacts)?;
    info!("{summary}");
    Ok(RunArtifacts {
        dir,
        files,
        summary,
    })
}

/// Render all artifacts of the configured experiment without touching the
/// filesystem. Validates first; an invalid config renders nothing.
pub fn render(config: &ExperimentConfig) -> Result<(Vec<Artifact>, String)> {
    config.validate()?;
    let mut rng = config.rng();
    match config.experiment {
        Experiment::MziSweep => {
            render_mzi_sweep(config.seed, config.mzi_sweep.as_ref().unwrap(), &mut rng)
        }
        Experiment::BankCalibrate => render_bank_calibrate(
            config.seed,
            config.bank_calibrate.as_ref().unwrap(),
            &mut rng,
        ),
        Experiment::NetworkRun => {
            render_network_run(config.seed, config.network_run.as_ref().unwrap(), &mut rng)
        }
        Experiment::Demix => render_demix(config.seed, config.demix.as_ref().unwrap(), &mut rng),
    }
}

/// Sweep the asymmetric test structure, fit the fringes, recover the
/// coupling-ratio candidates. Artifacts: `spectrum.txt`, `fringe_fit.txt`.
fn render_mzi_sweep(
    seed: u64,
    section: &MziSweepConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(Vec<Artifact>, String)> {
    let spec = section.to_spec()?;
    let design_alpha = coupling_ratio(&spec.coupler)?;
    let spectrum = if section.noise_sigma > 0.0 {
        sweep_noisy(&spec, section.noise_sigma, rng)?
    } else {
        sweep(&spec)?
    };
    let fit = fit_fringes(&spectrum)?;
    let candidates = recover_alpha(fit.er_db)?;
    let selected = disambiguate(candidates, &spec.coupler)?;

    let description = vec![
        "experiment: mzi-sweep (asymmetric interferometer transmission)".to_string(),
        format!("seed {seed}"),
        format!("design_coupling_alpha {}", fmt_f64(design_alpha)),
        format!("noise_sigma {}", fmt_f64(section.noise_sigma)),
    ];
    let rows: Vec<Vec<String>> = spectrum
        .points()
        .iter()
        .map(|&(wl, t)| vec![fmt_f64(wl), fmt_f64(t)])
        .collect();
    let spectrum_file = Artifact::new(
        "spectrum.txt",
        columnar(&description, &["wavelength_nm", "transmission"], &rows),
    );

    let fit_description = vec![
        "experiment: mzi-sweep (fringe fit and recovered coupling)".to_string(),
        format!("seed {seed}"),
        format!("design_coupling_alpha {}", fmt_f64(design_alpha)),
    ];
    let fit_columns = [
        "er_db",
        "fringes",
        "offset",
        "amplitude",
        "angular_frequency",
        "phase",
        "max_transmission",
        "min_transmission",
        "rms_residual",
        "min_clamped",
        "er_capped",
        "alpha_low",
        "alpha_high",
        "alpha_selected",
    ];
    let fit_row = vec![
        fmt_f64(fit.er_db),
        fmt_f64(fit.fringes),
        fmt_f64(fit.offset),
        fmt_f64(fit.amplitude),
        fmt_f64(fit.angular_frequency),
        fmt_f64(fit.phase),
        fmt_f64(fit.max_transmission),
        fmt_f64(fit.min_transmission),
        fmt_f64(fit.rms_residual),
        (fit.min_clamped as u8).to_string(),
        (fit.er_capped as u8).to_string(),
        fmt_f64(candidates.0),
        fmt_f64(candidates.1),
        fmt_f64(selected),
    ];
    let fit_file = Artifact::new(
        "fringe_fit.txt",
        columnar(&fit_description, &fit_columns, &[fit_row]),
    );

    let summary = format!(
        "mzi-sweep: ER {:.2} dB over {:.1} fringes; alpha candidates ({:.6}, {:.6}), selected {:.6} (design {:.6})",
        fit.er_db, fit.fringes, candidates.0, candidates.1, selected, design_alpha
    );
    Ok((vec![spectrum_file, fit_file], summary))
}

/// Probe an idealized bank through the configured mixing and export the
/// measured power matrix. Artifact: `calibration.txt`.
fn render_bank_calibrate(
    seed: u64,
    section: &BankCalibrateConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(Vec<Artifact>, String)> {
    let mut hardware = section.bank()?;
    let grid = hardware.grid();
    let mix = section.mixing.build(section.modes, rng);
    let mut noise = if section.noise_sigma > 0.0 {
        Some(Normal::new(0.0, section.noise_sigma).expect("validated sigma"))
    } else {
        None
    };

    let calibration = calibrate(
        |w, p| {
            hardware
                .set_weights(w)
                .expect("idealized bank realizes one-hot probe weights");
            let mixed = apply_mixing(&mix, p, &grid).expect("probe dimensions are consistent");
            let y = bank_output(&hardware, &mixed)
                .expect("bank and probe dimensions agree")
                .weighted_sum;
            y + noise.as_mut().map_or(0.0, |n| n.sample(rng))
        },
        section.modes,
        section.residual_tol,
    )?;

    let condition = match linalg::invert(&calibration.power) {
        Ok(inverse) => linalg::condition_1norm(&calibration.power, &inverse),
        Err(_) => f64::INFINITY,
    };
    let description = vec![
        "experiment: bank-calibrate (measured power mixing matrix)".to_string(),
        format!("seed {seed}"),
        format!("modes {}", section.modes),
        format!("mixing {}", section.mixing.describe()),
        format!("noise_sigma {}", fmt_f64(section.noise_sigma)),
        format!("stochastic_residual {}", fmt_f64(calibration.stochastic_residual)),
        format!("consistent {}", calibration.consistent),
        format!("condition_1norm {}", fmt_f64(condition)),
    ];
    let file = Artifact::new(
        "calibration.txt",
        matrix_block(&description, &calibration.power),
    );
    let summary = format!(
        "bank-calibrate: residual {:.3e} (consistent: {}), condition {:.3e}",
        calibration.stochastic_residual, calibration.consistent, condition
    );
    Ok((vec![file], summary))
}

/// Iterate the recurrent network to a fixed point and dump the
/// trajectory. Artifact: `trajectory.txt`.
fn render_network_run(
    seed: u64,
    section: &NetworkRunConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(Vec<Artifact>, String)> {
    let (mut net, weights) = section.build(rng)?;
    let mut saturated = false;
    if section.compensate {
        let reports = net.compensate_weights(&weights)?;
        saturated = reports.iter().any(|r| r.saturated);
    } else {
        for (bank, w) in weights.iter().enumerate() {
            net.set_bank_weights(bank, w)?;
        }
    }

    let run = net.run_to_fixed_point(None, section.tolerance, section.max_iterations)?;
    info!(
        "network-run: converged={} after {} iterations",
        run.converged, run.iterations
    );

    let n = net.neuron_count();
    let mut description = vec![
        "experiment: network-run (damped fixed-point iteration)".to_string(),
        format!("seed {seed}"),
        format!("neurons {n}"),
        format!("mixing {}", section.mixing.describe()),
        format!("compensated {}", section.compensate),
        format!("weights_saturated {saturated}"),
        format!("converged {}", run.converged),
        format!("iterations {}", run.iterations),
    ];
    let fixed_point: Vec<String> = run.state.iter().map(|&v| fmt_f64(v)).collect();
    description.push(format!("fixed_point {}", fixed_point.join(" ")));

    let mut columns: Vec<String> = vec!["iteration".to_string()];
    for i in 0..n {
        columns.push(format!("drive_{i}"));
    }
    for i in 0..n {
        columns.push(format!("output_{i}"));
    }
    columns.push("residual".to_string());
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();

    let rows: Vec<Vec<String>> = run
        .trajectory
        .iter()
        .map(|point| {
            let mut row = Vec::with_capacity(2 * n + 2);
            row.push(point.iteration.to_string());
            row.extend(point.drives.iter().map(|&v| fmt_f64(v)));
            row.extend(point.outputs.iter().map(|&v| fmt_f64(v)));
            row.push(fmt_f64(point.residual));
            row
        })
        .collect();
    let file = Artifact::new(
        "trajectory.txt",
        columnar(&description, &column_refs, &rows),
    );
    let summary = format!(
        "network-run: converged={} after {} iterations; fixed point [{}]",
        run.converged,
        run.iterations,
        run.state
            .iter()
            .map(|v| format!("{v:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok((vec![file], summary))
}

/// Scramble the configured input powers with the mixing and recover them
/// with inverse-row weight banks. Artifact: `demix.txt`.
fn render_demix(
    seed: u64,
    section: &DemixConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(Vec<Artifact>, String)> {
    let mut banks = section.banks()?;
    let mix = section.mixing.build(section.modes, rng);
    let input = ChannelPowerVector::new(section.input_powers.clone())?;
    let result = demix_detailed(&mut banks, mix.power(), &input)?;

    let n = section.modes;
    let power = mix.power();
    let mixed: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| power[[i, j]] * input.values()[j]).sum())
        .collect();
    let worst = input
        .values()
        .iter()
        .zip(result.recovered.values())
        .map(|(i, r)| (i - r).abs())
        .fold(0.0, f64::max);

    let scales: Vec<String> = result.scales.iter().map(|&s| fmt_f64(s)).collect();
    let description = vec![
        "experiment: demix (inverse-row weight banks undo the bus mixing)".to_string(),
        format!("seed {seed}"),
        format!("modes {n}"),
        format!("mixing {}", section.mixing.describe()),
        format!("bank_weight_scales {}", scales.join(" ")),
        format!("worst_recovery_error {}", fmt_f64(worst)),
    ];
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            vec![
                i.to_string(),
                fmt_f64(input.values()[i]),
                fmt_f64(mixed[i]),
                fmt_f64(result.recovered.values()[i]),
                fmt_f64((input.values()[i] - result.recovered.values()[i]).abs()),
            ]
        })
        .collect();
    let file = Artifact::new(
        "demix.txt",
        columnar(
            &description,
            &["channel", "input_power", "mixed_power", "recovered_power", "abs_error"],
            &rows,
        ),
    );
    let summary = format!("demix: worst recovery error {worst:.3e} across {n} modes");
    Ok((vec![file], summary))
}
