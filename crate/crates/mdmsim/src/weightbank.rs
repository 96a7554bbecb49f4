//! MDM/WDM weight bank: a grid of microrings (one stage per mode, one
//! ring per wavelength) whose drop-minus-through balanced-photodiode sum
//! realizes a signed dot product y = w . p over channel powers, the
//! intermodal mixing the bus imposes on those powers, and the one-hot
//! probe calibration plus inverse-matrix compensation that undoes it.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;

use crate::core::{random_unitary, ChannelGrid};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mrr::{drop_fraction, solve_heater_for_weight, HeaterState, RingSpec};

/// Mixing matrices with a 1-norm condition number beyond this are
/// rejected as uninvertible in practice.
pub const CONDITION_LIMIT: f64 = 1e8;

/// Signed per-channel weights, each in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        for (i, &v) in w.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("weight {i}")));
            }
            if v.abs() > 1.0 {
                return Err(Error::InvalidParameter {
                    name: "weight",
                    message: format!("w[{i}] = {v} outside [-1, 1]"),
                });
            }
        }
        Ok(Self(w))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// +1 on `channel`, 0 elsewhere (mode-selection probe).
    pub fn one_hot(dim: usize, channel: usize) -> Self {
        let mut w = vec![0.0; dim];
        w[channel] = 1.0;
        Self(w)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, p: &ChannelPowerVector) -> Result<f64> {
        if self.len() != p.len() {
            return Err(Error::DimensionMismatch {
                context: "weight . power dot product".into(),
                left: self.len(),
                right: p.len(),
            });
        }
        Ok(self.0.iter().zip(p.values()).map(|(w, p)| w * p).sum())
    }
}

/// Nonnegative optical power per channel (the |x|^2 the bank weights).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPowerVector(Vec<f64>);

impl ChannelPowerVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        for (i, &v) in p.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("channel power {i}")));
            }
            if v < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "channel power",
                    message: format!("p[{i}] = {v} is negative"),
                });
            }
        }
        Ok(Self(p))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// Unit power on `channel`, dark elsewhere (calibration probe).
    pub fn one_hot(dim: usize, channel: usize) -> Self {
        let mut p = vec![0.0; dim];
        p[channel] = 1.0;
        Self(p)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// One weight bank: ring grid in mode-major channel order plus the
/// carrier wavelength of every wavelength column.
#[derive(Debug, Clone, PartialEq)]
pub struct BankSpec {
    modes: usize,
    carrier_wavelengths_nm: Vec<f64>,
    rings: Vec<RingSpec>,
    heaters: Vec<HeaterState>,
}

impl BankSpec {
    /// Build from an explicit ring grid (mode-major: ring for channel
    /// (mode m, wavelength k) at index m * wavelengths + k). All heaters
    /// start at zero drive.
    pub fn new(
        modes: usize,
        carrier_wavelengths_nm: Vec<f64>,
        rings: Vec<RingSpec>,
    ) -> Result<Self> {
        let wavelengths = carrier_wavelengths_nm.len();
        if modes == 0 || wavelengths == 0 {
            return Err(Error::InvalidParameter {
                name: "bank dimensions",
                message: format!("{modes} modes x {wavelengths} wavelengths"),
            });
        }
        if rings.len() != modes * wavelengths {
            return Err(Error::DimensionMismatch {
                context: "bank ring grid".into(),
                left: rings.len(),
                right: modes * wavelengths,
            });
        }
        for &wl in &carrier_wavelengths_nm {
            if !(wl.is_finite() && wl > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "carrier_wavelengths_nm",
                    message: format!("carrier {wl} must be finite and > 0"),
                });
            }
        }
        for ring in &rings {
            ring.validate()?;
        }
        let heaters = vec![HeaterState::OFF; rings.len()];
        Ok(Self {
            modes,
            carrier_wavelengths_nm,
            rings,
            heaters,
        })
    }

    /// A bank of idealized rings: resonance parked on each carrier,
    /// max_drop 1 and enough heater authority to detune essentially to
    /// zero drop, so every weight in [-1, 1] is realizable. The test and
    /// demo fixture.
    pub fn idealized(modes: usize, carrier_wavelengths_nm: &[f64]) -> Result<Self> {
        let rings = (0..modes)
            .flat_map(|_| {
                carrier_wavelengths_nm.iter().map(|&wl| RingSpec {
                    resonance_nm: wl,
                    fwhm_nm: 0.2,
                    heater_shift_nm_per_unit: 1e4,
                    max_drop: 1.0,
                })
            })
            .collect();
        Self::new(modes, carrier_wavelengths_nm.to_vec(), rings)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn wavelengths(&self) -> usize {
        self.carrier_wavelengths_nm.len()
    }

    pub fn channels(&self) -> usize {
        self.rings.len()
    }

    pub fn grid(&self) -> ChannelGrid {
        ChannelGrid::new(self.modes, self.wavelengths())
    }

    pub fn carrier_wavelengths_nm(&self) -> &[f64] {
        &self.carrier_wavelengths_nm
    }

    pub fn ring(&self, channel: usize) -> &RingSpec {
        &self.rings[channel]
    }

    pub fn heater(&self, channel: usize) -> HeaterState {
        self.heaters[channel]
    }

    /// Carrier wavelength of a channel (its wavelength-column carrier).
    pub fn carrier_of_channel(&self, channel: usize) -> f64 {
        self.carrier_wavelengths_nm[channel % self.wavelengths()]
    }

    /// Current drop fraction theta of every channel's ring at its carrier.
    pub fn drop_fractions(&self) -> Vec<f64> {
        (0..self.channels())
            .map(|c| drop_fraction(&self.rings[c], self.heaters[c], self.carrier_of_channel(c)))
            .collect()
    }

    /// The weight each channel currently realizes, w = 2 theta - 1.
    pub fn weights(&self) -> WeightVector {
        WeightVector(
            self.drop_fractions()
                .into_iter()
                .map(|theta| 2.0 * theta - 1.0)
                .collect(),
        )
    }

    /// Retune every heater so the bank realizes y = w . p: channel c gets
    /// drop target theta_c = (w_c + 1) / 2. Unreachable targets name the
    /// channel and the reachable weight range; no heater changes on error.
    pub fn set_weights(&mut self, w: &WeightVector) -> Result<()> {
        if w.len() != self.channels() {
            return Err(Error::DimensionMismatch {
                context: "bank weights".into(),
                left: w.len(),
                right: self.channels(),
            });
        }
        let mut staged = Vec::with_capacity(self.channels());
        for (c, &wc) in w.values().iter().enumerate() {
            let theta = (wc + 1.0) / 2.0;
            let heater =
                solve_heater_for_weight(&self.rings[c], self.carrier_of_channel(c), theta)
                    .map_err(|e| match e {
                        Error::UnreachableWeight {
                            target: _,
                            min,
                            max,
                            ..
                        } => Error::UnreachableWeight {
                            channel: c,
                            target: wc,
                            min: 2.0 * min - 1.0,
                            max: 2.0 * max - 1.0,
                        },
                        other => other,
                    })?;
            staged.push(heater);
        }
        self.heaters = staged;
        Ok(())
    }
}

/// What the balanced photodiodes see: the signed sum plus both rails.
#[derive(Debug, Clone, PartialEq)]
pub struct BankReadout {
    /// y = sum over channels of (drop_c - through_c).
    pub weighted_sum: f64,
    pub drop: ChannelPowerVector,
    pub through: ChannelPowerVector,
}

/// Split every channel at its ring and subtract the rails:
/// y = sum (2 theta_c - 1) p_c.
pub fn bank_output(bank: &BankSpec, input: &ChannelPowerVector) -> Result<BankReadout> {
    if input.len() != bank.channels() {
        return Err(Error::DimensionMismatch {
            context: "bank input".into(),
            left: input.len(),
            right: bank.channels(),
        });
    }
    let theta = bank.drop_fractions();
    let mut drop = Vec::with_capacity(input.len());
    let mut through = Vec::with_capacity(input.len());
    let mut y = 0.0;
    for (c, &p) in input.values().iter().enumerate() {
        let d = theta[c] * p;
        let t = p - d; // conserves power by construction
        drop.push(d);
        through.push(t);
        y += d - t;
    }
    Ok(BankReadout {
        weighted_sum: y,
        drop: ChannelPowerVector(drop),
        through: ChannelPowerVector(through),
    })
}

/// Unitary intermodal mixing and its elementwise power-domain image.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    amplitude: Array2<Complex64>,
    power: Array2<f64>,
}

impl MixingMatrix {
    /// Wrap an amplitude matrix, verifying unitarity (1e-12) and the
    /// double stochasticity of its power image (1e-10).
    pub fn from_amplitude(amplitude: Array2<Complex64>) -> Result<Self> {
        let n = amplitude.nrows();
        if amplitude.ncols() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: amplitude.ncols(),
            });
        }
        let mut max_dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += amplitude[[k, i]].conj() * amplitude[[k, j]];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((acc - want).norm());
            }
        }
        if max_dev > crate::core::UNITARITY_TOL {
            return Err(Error::NotLossless { deviation: max_dev });
        }
        let power = amplitude.mapv(|z| z.norm_sqr());
        let worst = (0..n)
            .map(|i| {
                let row: f64 = power.row(i).sum();
                let col: f64 = power.column(i).sum();
                (row - 1.0).abs().max((col - 1.0).abs())
            })
            .fold(0.0, f64::max);
        if worst > 1e-10 {
            return Err(Error::NotLossless { deviation: worst });
        }
        Ok(Self { amplitude, power })
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            amplitude: Array2::eye(modes),
            power: Array2::eye(modes),
        }
    }

    /// Real 2x2 rotation by `angle`: power matrix [[c^2, s^2], [s^2, c^2]].
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let amplitude = ndarray::array![
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)]
        ];
        let power = amplitude.mapv(|z| z.norm_sqr());
        Self { amplitude, power }
    }

    /// Full mode reversal (mode m -> modes-1-m).
    pub fn flip(modes: usize) -> Self {
        let mut amplitude = Array2::zeros((modes, modes));
        for m in 0..modes {
            amplitude[[m, modes - 1 - m]] = Complex64::new(1.0, 0.0);
        }
        let power = amplitude.mapv(|z: Complex64| z.norm_sqr());
        Self { amplitude, power }
    }

    /// Haar-random unitary mixing over `modes` modes.
    pub fn random<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Self {
        let u = random_unitary(modes, rng);
        Self::from_amplitude(u.entries().clone()).expect("random unitary is unitary")
    }

    pub fn modes(&self) -> usize {
        self.amplitude.nrows()
    }

    pub fn amplitude(&self) -> &Array2<Complex64> {
        &self.amplitude
    }

    pub fn power(&self) -> &Array2<f64> {
        &self.power
    }
}

/// Mix channel powers: within each wavelength column, p' = |M|^2 p across
/// modes. Total power is conserved (doubly stochastic power matrix).
pub fn apply_mixing(
    mix: &MixingMatrix,
    p: &ChannelPowerVector,
    grid: &ChannelGrid,
) -> Result<ChannelPowerVector> {
    if mix.modes() != grid.modes {
        return Err(Error::DimensionMismatch {
            context: "mixing matrix vs mode count".into(),
            left: mix.modes(),
            right: grid.modes,
        });
    }
    if p.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            context: "mixing input".into(),
            left: p.len(),
            right: grid.len(),
        });
    }
    let (modes, wavelengths) = (grid.modes, grid.wavelengths);
    let mut out = vec![0.0; p.len()];
    for k in 0..wavelengths {
        for i in 0..modes {
            let mut acc = 0.0;
            for j in 0..modes {
                acc += mix.power[[i, j]] * p.values()[j * wavelengths + k];
            }
            // Doubly stochastic rows keep this nonnegative; rounding can
            // produce a harmless -0.
            out[i * wavelengths + k] = acc.max(0.0);
        }
    }
    Ok(ChannelPowerVector(out))
}

/// A measured power mixing matrix and how lossless it looks.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    /// Entry (i, j): fraction of mode-j input power arriving in mode i.
    pub power: Array2<f64>,
    /// Worst row/column sum deviation from 1.
    pub stochastic_residual: f64,
    /// Residual within the requested tolerance?
    pub consistent: bool,
}

/// Measure a power mixing matrix through one-hot probes: unit power on
/// mode j with the bank selecting mode i reads out exactly |M|^2_ij.
/// `probe` plays the hardware: given (weights, input powers) it returns
/// the balanced-photodiode sum of the mixed powers.
pub fn calibrate<F>(mut probe: F, n_modes: usize, residual_tol: f64) -> Result<Calibration>
where
    F: FnMut(&WeightVector, &ChannelPowerVector) -> f64,
{
    if n_modes == 0 {
        return Err(Error::InvalidParameter {
            name: "n_modes",
            message: "need at least one mode".into(),
        });
    }
    if !(residual_tol.is_finite() && residual_tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "residual_tol",
            message: format!("{residual_tol} must be finite and > 0"),
        });
    }
    let mut power = Array2::zeros((n_modes, n_modes));
    for i in 0..n_modes {
        let select = WeightVector::one_hot(n_modes, i);
        for j in 0..n_modes {
            let light = ChannelPowerVector::one_hot(n_modes, j);
            power[[i, j]] = probe(&select, &light);
        }
    }
    let stochastic_residual = (0..n_modes)
        .map(|i| {
            let row: f64 = power.row(i).sum();
            let col: f64 = power.column(i).sum();
            (row - 1.0).abs().max((col - 1.0).abs())
        })
        .fold(0.0, f64::max);
    let consistent = stochastic_residual <= residual_tol;
    if !consistent {
        log::warn!(
            "calibration inconsistent with lossless mixing: residual {stochastic_residual:.3e} \
             exceeds {residual_tol:.1e}"
        );
    }
    Ok(Calibration {
        power,
        stochastic_residual,
        consistent,
    })
}

/// Weights corrected for a known power mix, with saturation bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensatedWeights {
    /// The settable weights (clamped into [-1, 1] where needed).
    pub weights: WeightVector,
    /// The exact w . (|M|^2)^-1 before clamping.
    pub requested: Vec<f64>,
    /// Any |requested| exceeded 1 (clamped; y will deviate from w . p).
    pub saturated: bool,
    /// Largest uniform scale that would fit the request in [-1, 1]
    /// (1 when nothing saturated).
    pub fit_scale: f64,
    /// 1-norm condition number of the power mix.
    pub condition: f64,
}

/// Pre-distort weights so the bank's output on mixed powers equals the
/// intended w . p: w' = w (|M|^2)^-1, applied per wavelength block.
pub fn compensate(w: &WeightVector, power_mix: &Array2<f64>) -> Result<CompensatedWeights> {
    let n = power_mix.nrows();
    if power_mix.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: power_mix.ncols(),
        });
    }
    if n == 0 || w.len() % n != 0 {
        return Err(Error::DimensionMismatch {
            context: "weights vs power mix blocks".into(),
            left: w.len(),
            right: n,
        });
    }
    let inv = linalg::invert(power_mix)?;
    let condition = linalg::condition_1norm(power_mix, &inv);
    if condition > CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            condition,
            limit: CONDITION_LIMIT,
        });
    }
    let wavelengths = w.len() / n;
    let mut requested = vec![0.0; w.len()];
    for k in 0..wavelengths {
        for i in 0..n {
            let mut acc = 0.0;
            for m in 0..n {
                acc += w.values()[m * wavelengths + k] * inv[[m, i]];
            }
            requested[i * wavelengths + k] = acc;
        }
    }
    let peak = requested.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let saturated = peak > 1.0;
    if saturated {
        log::warn!(
            "weight saturation: compensated peak {peak:.6} exceeds 1; clamping \
             (uniform scale {:.6} would fit)",
            1.0 / peak
        );
    }
    let weights = WeightVector(requested.iter().map(|v| v.clamp(-1.0, 1.0)).collect());
    Ok(CompensatedWeights {
        weights,
        requested,
        saturated,
        fit_scale: if saturated { 1.0 / peak } else { 1.0 },
        condition,
    })
}

/// Fixed-drop cascade stage: divert `fixed_drop` of every channel into a
/// weighting bank (the fold flips the mode order of the diverted block)
/// and pass the rest down the bus.
pub fn cascade(
    fixed_drop: f64,
    bank: &BankSpec,
    input: &ChannelPowerVector,
) -> Result<(BankReadout, ChannelPowerVector)> {
    if !(fixed_drop.is_finite() && 0.0 < fixed_drop && fixed_drop < 1.0) {
        return Err(Error::InvalidParameter {
            name: "fixed_drop",
            message: format!("{fixed_drop} must lie strictly inside (0, 1)"),
        });
    }
    if input.len() != bank.channels() {
        return Err(Error::DimensionMismatch {
            context: "cascade input".into(),
            left: input.len(),
            right: bank.channels(),
        });
    }
    let (modes, wavelengths) = (bank.modes(), bank.wavelengths());
    let mut diverted = vec![0.0; input.len()];
    for m in 0..modes {
        for k in 0..wavelengths {
            diverted[(modes - 1 - m) * wavelengths + k] =
                fixed_drop * input.values()[m * wavelengths + k];
        }
    }
    let readout = bank_output(bank, &ChannelPowerVector(diverted))?;
    let continue_bus = ChannelPowerVector(
        input
            .values()
            .iter()
            .map(|&p| (1.0 - fixed_drop) * p)
            .collect(),
    );
    Ok((readout, continue_bus))
}
