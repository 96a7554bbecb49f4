//! Experiment configuration: one TOML file names an experiment, a seed,
//! and an output directory, plus a parameter section per experiment.
//! Everything is validated before any simulation starts, so an invalid
//! config never produces output files. All randomness (mixing draws,
//! probe noise) flows from the single seed through ChaCha12, a fixed,
//! portable generator.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Deserialize;

use crate::coupler::CouplerSpec;
use crate::error::{Error, Result};
use crate::mrr::RingSpec;
use crate::mzi::{MziSpec, WavelengthWindow};
use crate::network::{HairpinNetwork, NeuronSpec};
use crate::weightbank::{BankSpec, MixingMatrix, WeightVector};

/// Which experiment a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    MziSweep,
    BankCalibrate,
    NetworkRun,
    Demix,
}

impl Experiment {
    /// The config-file spelling, also used for section names (with `-`
    /// replaced by `_`).
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::MziSweep => "mzi-sweep",
            Experiment::BankCalibrate => "bank-calibrate",
            Experiment::NetworkRun => "network-run",
            Experiment::Demix => "demix",
        }
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Top-level config. Exactly one parameter section is required: the one
/// matching `experiment`. Extra sections are allowed (and validated), so
/// one file can serve as a base for several runs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Seed for every randomized construction in the run.
    pub seed: u64,
    /// Where data files and the manifest land (overridable by the
    /// `MDMSIM_OUTPUT_DIR` environment variable).
    pub output_dir: PathBuf,
    #[serde(default)]
    pub mzi_sweep: Option<MziSweepConfig>,
    #[serde(default)]
    pub bank_calibrate: Option<BankCalibrateConfig>,
    #[serde(default)]
    pub network_run: Option<NetworkRunConfig>,
    #[serde(default)]
    pub demix: Option<DemixConfig>,
}

impl ExperimentConfig {
    /// Parse a TOML string and validate it.
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Load and validate a config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// The deterministic generator all randomness in the run flows from.
    pub fn rng(&self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.seed)
    }

    /// Check every present section and require the one the experiment
    /// references. Errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::config("output_dir", "must not be empty"));
        }
        if let Some(c) = &self.mzi_sweep {
            c.validate()?;
        }
        if let Some(c) = &self.bank_calibrate {
            c.validate()?;
        }
        if let Some(c) = &self.network_run {
            c.validate()?;
        }
        if let Some(c) = &self.demix {
            c.validate()?;
        }
        let present = match self.experiment {
            Experiment::MziSweep => self.mzi_sweep.is_some(),
            Experiment::BankCalibrate => self.bank_calibrate.is_some(),
            Experiment::NetworkRun => self.network_run.is_some(),
            Experiment::Demix => self.demix.is_some(),
        };
        if !present {
            let section = self.experiment.name().replace('-', "_");
            return Err(Error::config(
                section.clone(),
                format!("section [{section}] required by experiment = \"{}\"", self.experiment),
            ));
        }
        Ok(())
    }
}

/// Mode-selective coupler parameters, mirroring the device spec.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerConfig {
    pub width_nm: f64,
    pub length_um: f64,
    pub target_mode: usize,
    pub matched_width_nm: f64,
    pub beat_length_um: f64,
    pub detuning_slope_per_nm: f64,
}

impl CouplerConfig {
    pub fn to_spec(&self) -> CouplerSpec {
        CouplerSpec {
            width_nm: self.width_nm,
            length_um: self.length_um,
            target_mode: self.target_mode,
            matched_width_nm: self.matched_width_nm,
            beat_length_um: self.beat_length_um,
            detuning_slope_per_nm: self.detuning_slope_per_nm,
        }
    }
}

/// Wavelength sweep window.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub start_nm: f64,
    pub stop_nm: f64,
    pub points: usize,
}

/// `mzi-sweep`: sweep an asymmetric test structure, fit the fringes, and
/// report the extinction ratio and recovered coupling candidates.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MziSweepConfig {
    pub coupler: CouplerConfig,
    pub delta_length_um: f64,
    pub group_index: f64,
    pub window: WindowConfig,
    /// Additive transmission noise sigma (0 = noiseless sweep).
    #[serde(default)]
    pub noise_sigma: f64,
}

impl MziSweepConfig {
    pub fn to_spec(&self) -> Result<MziSpec> {
        let spec = MziSpec {
            coupler: self.coupler.to_spec(),
            delta_length_um: self.delta_length_um,
            group_index: self.group_index,
            window: WavelengthWindow {
                start_nm: self.window.start_nm,
                stop_nm: self.window.stop_nm,
                points: self.window.points,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        self.to_spec()?;
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::config(
                "mzi_sweep.noise_sigma",
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

/// How the bus mixes modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixKind {
    Identity,
    Flip,
    Rotation,
    Random,
}

/// Mixing selection: identity / flip / a two-mode rotation with a given
/// same-mode power fraction / a seeded random unitary.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingConfig {
    pub kind: MixKind,
    /// Rotation only: fraction of power staying in its own mode.
    #[serde(default)]
    pub power_cos2: Option<f64>,
}

impl MixingConfig {
    fn validate(&self, modes: usize, field: &str) -> Result<()> {
        match self.kind {
            MixKind::Rotation => {
                if modes != 2 {
                    return Err(Error::config(
                        format!("{field}.kind"),
                        format!("rotation mixing needs exactly 2 modes, got {modes}"),
                    ));
                }
                match self.power_cos2 {
                    Some(c) if c.is_finite() && 0.0 < c && c < 1.0 => Ok(()),
                    _ => Err(Error::config(
                        format!("{field}.power_cos2"),
                        "rotation mixing requires power_cos2 strictly inside (0, 1)",
                    )),
                }
            }
            _ => {
                if self.power_cos2.is_some() {
                    return Err(Error::config(
                        format!("{field}.power_cos2"),
                        format!("only meaningful for kind = \"rotation\", not {:?}", self.kind),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Header-friendly description of the mixing choice.
    pub fn describe(&self) -> String {
        match (self.kind, self.power_cos2) {
            (MixKind::Rotation, Some(c)) => format!("rotation(power_cos2={c})"),
            (kind, _) => format!("{kind:?}").to_lowercase(),
        }
    }

    /// Build the mixing matrix (assumes `validate` passed).
    pub fn build(&self, modes: usize, rng: &mut ChaCha12Rng) -> MixingMatrix {
        match self.kind {
            MixKind::Identity => MixingMatrix::identity(modes),
            MixKind::Flip => MixingMatrix::flip(modes),
            MixKind::Rotation => {
                let c = self.power_cos2.expect("validated rotation");
                MixingMatrix::rotation(c.sqrt().acos())
            }
            MixKind::Random => MixingMatrix::random(modes, rng),
        }
    }
}

/// `bank-calibrate`: probe an idealized weight bank through a chosen
/// mixing and export the measured power matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankCalibrateConfig {
    pub modes: usize,
    #[serde(default = "default_carrier_nm")]
    pub carrier_wavelength_nm: f64,
    pub mixing: MixingConfig,
    /// Additive photodiode noise sigma per probe (0 = noiseless).
    #[serde(default)]
    pub noise_sigma: f64,
    /// Row/column-sum residual above which the calibration is flagged.
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
}

impl BankCalibrateConfig {
    pub fn bank(&self) -> Result<BankSpec> {
        BankSpec::idealized(self.modes, &[self.carrier_wavelength_nm])
    }

    fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::config("bank_calibrate.modes", "must be >= 1"));
        }
        self.bank()
            .map_err(|e| Error::config("bank_calibrate", e.to_string()))?;
        self.mixing.validate(self.modes, "bank_calibrate.mixing")?;
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::config(
                "bank_calibrate.noise_sigma",
                "must be finite and >= 0",
            ));
        }
        if !(self.residual_tol.is_finite() && self.residual_tol > 0.0) {
            return Err(Error::config(
                "bank_calibrate.residual_tol",
                "must be finite and > 0",
            ));
        }
        Ok(())
    }
}

/// One neuron of the recurrent network.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronConfig {
    pub mode_channel: usize,
    pub pump_power_w: f64,
    #[serde(default)]
    pub bias: f64,
    #[serde(default = "default_gain")]
    pub gain: f64,
    pub resonance_nm: f64,
    pub fwhm_nm: f64,
    pub heater_shift_nm_per_unit: f64,
    #[serde(default = "default_max_drop")]
    pub max_drop: f64,
}

impl NeuronConfig {
    pub fn to_spec(&self) -> NeuronSpec {
        NeuronSpec {
            axon_ring: RingSpec {
                resonance_nm: self.resonance_nm,
                fwhm_nm: self.fwhm_nm,
                heater_shift_nm_per_unit: self.heater_shift_nm_per_unit,
                max_drop: self.max_drop,
            },
            pump_power_w: self.pump_power_w,
            mode_channel: self.mode_channel,
            bias: self.bias,
            gain: self.gain,
        }
    }
}

/// `network-run`: iterate the recurrent network to a fixed point and dump
/// the trajectory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkRunConfig {
    pub pump_wavelength_nm: f64,
    #[serde(default = "default_fixed_drop")]
    pub fixed_drop: f64,
    pub mixing: MixingConfig,
    /// Pre-distort bank weights to cancel the bus mixing.
    #[serde(default)]
    pub compensate: bool,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Flip the balanced-photodiode feedback sign.
    #[serde(default)]
    pub invert_feedback: bool,
    /// Per-bank weight rows (banks x modes).
    pub weights: Vec<Vec<f64>>,
    pub neurons: Vec<NeuronConfig>,
}

impl NetworkRunConfig {
    /// Build the network plus the requested per-bank weights (not yet
    /// applied; the runner decides between direct and compensated setting).
    pub fn build(&self, rng: &mut ChaCha12Rng) -> Result<(HairpinNetwork, Vec<WeightVector>)> {
        let n = self.neurons.len();
        let neurons: Vec<NeuronSpec> = self.neurons.iter().map(|c| c.to_spec()).collect();
        let banks = (0..n)
            .map(|_| BankSpec::idealized(n, &[self.pump_wavelength_nm]))
            .collect::<Result<Vec<_>>>()?;
        let mix = self.mixing.build(n, rng);
        let mut net = HairpinNetwork::new(neurons, banks, self.fixed_drop, mix, self.pump_wavelength_nm)?;
        net.invert_feedback = self.invert_feedback;
        let weights = self
            .weights
            .iter()
            .map(|row| WeightVector::new(row.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok((net, weights))
    }

    fn validate(&self) -> Result<()> {
        let n = self.neurons.len();
        if n == 0 {
            return Err(Error::config("network_run.neurons", "need at least one neuron"));
        }
        if self.weights.len() != n {
            return Err(Error::config(
                "network_run.weights",
                format!("need one weight row per neuron: {} rows vs {n} neurons", self.weights.len()),
            ));
        }
        for (i, row) in self.weights.iter().enumerate() {
            if row.len() != n {
                return Err(Error::config(
                    "network_run.weights",
                    format!("row {i} has {} entries, expected {n}", row.len()),
                ));
            }
            WeightVector::new(row.clone())
                .map_err(|e| Error::config("network_run.weights", e.to_string()))?;
        }
        self.mixing.validate(n, "network_run.mixing")?;
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::config(
                "network_run.tolerance",
                "must be finite and > 0",
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("network_run.max_iterations", "must be >= 1"));
        }
        // Building exercises the remaining device validation without
        // consuming the run's RNG stream.
        let mut probe_rng = ChaCha12Rng::seed_from_u64(0);
        self.build(&mut probe_rng)
            .map_err(|e| Error::config("network_run", e.to_string()))?;
        Ok(())
    }
}

/// `demix`: recover unmixed channel powers with banks carrying the rows
/// of the inverse power matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemixConfig {
    pub modes: usize,
    #[serde(default = "default_carrier_nm")]
    pub carrier_wavelength_nm: f64,
    pub mixing: MixingConfig,
    /// The unmixed channel powers the bus then scrambles.
    pub input_powers: Vec<f64>,
}

impl DemixConfig {
    pub fn banks(&self) -> Result<Vec<BankSpec>> {
        (0..self.modes)
            .map(|_| BankSpec::idealized(self.modes, &[self.carrier_wavelength_nm]))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::config("demix.modes", "must be >= 1"));
        }
        if self.input_powers.len() != self.modes {
            return Err(Error::config(
                "demix.input_powers",
                format!("{} entries vs {} modes", self.input_powers.len(), self.modes),
            ));
        }
        if self.input_powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::config(
                "demix.input_powers",
                "powers must be finite and >= 0",
            ));
        }
        self.banks()
            .map_err(|e| Error::config("demix", e.to_string()))?;
        self.mixing.validate(self.modes, "demix.mixing")?;
        Ok(())
    }
}

fn default_carrier_nm() -> f64 {
    1550.0
}

fn default_residual_tol() -> f64 {
    1e-6
}

fn default_gain() -> f64 {
    1.0
}

fn default_max_drop() -> f64 {
    1.0
}

fn default_fixed_drop() -> f64 {
    0.5
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_max_iterations() -> usize {
    10_000
}
