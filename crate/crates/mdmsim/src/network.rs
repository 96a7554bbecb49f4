//! Recurrent "hairpin" network: Lorentzian microring axons on one side of
//! a folded bus, weight banks on the other, electrical feedback closing
//! the loop. A cascade bank taps a fixed share of the bus for the first
//! neuron (the fold flips the mode order of the tap) and a terminal bank
//! serves the last; fixed points are found by damped synchronous
//! iteration. Also hosts the all-optical demixing application: N banks
//! carrying the rows of the inverse power mix recover unmixed channels.

use ndarray::Array2;

use crate::core::ChannelGrid;
use crate::error::{Error, Result};
use crate::linalg;
use crate::mrr::{drop_fraction, HeaterState, RingSpec};
use crate::weightbank::{
    apply_mixing, bank_output, cascade, compensate, BankSpec, ChannelPowerVector,
    CompensatedWeights, MixingMatrix, WeightVector,
};

/// Damping factor of the synchronous update x <- (1-b) x + b step(x).
pub const DAMPING: f64 = 0.5;

/// One neuron: a pump laser modulated by a heater-driven Lorentzian ring.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronSpec {
    /// The axon modulator.
    pub axon_ring: RingSpec,
    /// Pump power the axon modulates, in watts.
    pub pump_power_w: f64,
    /// Bus mode this neuron's output occupies.
    pub mode_channel: usize,
    /// Offset added to the electrical drive before the heater.
    pub bias: f64,
    /// Electrical gain between photodiode current and heater drive
    /// (collapses the drive amplifier into one number).
    pub gain: f64,
}

impl NeuronSpec {
    pub fn validate(&self) -> Result<()> {
        self.axon_ring.validate()?;
        if !(self.pump_power_w.is_finite() && self.pump_power_w > 0.0) {
            return Err(Error::InvalidParameter {
                name: "pump_power_w",
                message: format!("{} must be finite and > 0", self.pump_power_w),
            });
        }
        if !self.bias.is_finite() || !self.gain.is_finite() {
            return Err(Error::NonFinite("neuron bias/gain".into()));
        }
        Ok(())
    }
}

/// Optical output power of a neuron at a given electrical drive: the pump
/// through the axon's Lorentzian, heater at gain * drive + bias (clamped
/// to the physical [0, 1] drive range).
pub fn axon_response(neuron: &NeuronSpec, pump_wavelength_nm: f64, drive: f64) -> Result<f64> {
    if !drive.is_finite() {
        return Err(Error::NonFinite("axon drive".into()));
    }
    let heater = HeaterState::new((neuron.gain * drive + neuron.bias).clamp(0.0, 1.0))?;
    Ok(neuron.pump_power_w * drop_fraction(&neuron.axon_ring, heater, pump_wavelength_nm))
}

/// The folded two-sided bus network (N-generic; the studied device has
/// two neurons on two modes of one wavelength).
#[derive(Debug, Clone, PartialEq)]
pub struct HairpinNetwork {
    neurons: Vec<NeuronSpec>,
    /// banks[0..n-1] are fixed-drop cascade taps, banks[n-1] is terminal;
    /// bank i feeds neuron i's drive.
    banks: Vec<BankSpec>,
    fixed_drop: f64,
    bus_mix: MixingMatrix,
    pump_wavelength_nm: f64,
    /// Flip the balanced-photodiode sign (default: drop minus through).
    pub invert_feedback: bool,
}

impl HairpinNetwork {
    pub fn new(
        neurons: Vec<NeuronSpec>,
        banks: Vec<BankSpec>,
        fixed_drop: f64,
        bus_mix: MixingMatrix,
        pump_wavelength_nm: f64,
    ) -> Result<Self> {
        let n = neurons.len();
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "neurons",
                message: "need at least one neuron".into(),
            });
        }
        if banks.len() != n {
            return Err(Error::DimensionMismatch {
                context: "banks vs neurons".into(),
                left: banks.len(),
                right: n,
            });
        }
        if bus_mix.modes() != n {
            return Err(Error::DimensionMismatch {
                context: "bus mix vs neurons".into(),
                left: bus_mix.modes(),
                right: n,
            });
        }
        if n > 1 && !(fixed_drop.is_finite() && 0.0 < fixed_drop && fixed_drop < 1.0) {
            return Err(Error::InvalidParameter {
                name: "fixed_drop",
                message: format!("{fixed_drop} must lie strictly inside (0, 1)"),
            });
        }
        let mut seen = vec![false; n];
        for neuron in &neurons {
            neuron.validate()?;
            let m = neuron.mode_channel;
            if m >= n || seen[m] {
                return Err(Error::InvalidParameter {
                    name: "mode_channel",
                    message: format!("mode {m} missing or claimed twice over {n} modes"),
                });
            }
            seen[m] = true;
        }
        for bank in &banks {
            if bank.modes() != n || bank.wavelengths() != 1 {
                return Err(Error::InvalidParameter {
                    name: "banks",
                    message: format!(
                        "each bank must span {n} modes x 1 wavelength, got {} x {}",
                        bank.modes(),
                        bank.wavelengths()
                    ),
                });
            }
            let carrier = bank.carrier_wavelengths_nm()[0];
            if (carrier - pump_wavelength_nm).abs() > 1e-9 {
                return Err(Error::InvalidParameter {
                    name: "banks",
                    message: format!(
                        "bank carrier {carrier} nm does not match pump {pump_wavelength_nm} nm"
                    ),
                });
            }
        }
        Ok(Self {
            neurons,
            banks,
            fixed_drop,
            bus_mix,
            pump_wavelength_nm,
            invert_feedback: false,
        })
    }

    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }

    pub fn neurons(&self) -> &[NeuronSpec] {
        &self.neurons
    }

    pub fn banks(&self) -> &[BankSpec] {
        &self.banks
    }

    pub fn bus_mix(&self) -> &MixingMatrix {
        &self.bus_mix
    }

    pub fn pump_wavelength_nm(&self) -> f64 {
        self.pump_wavelength_nm
    }

    /// Total pump power injected (the passivity budget).
    pub fn total_pump_power_w(&self) -> f64 {
        self.neurons.iter().map(|n| n.pump_power_w).sum()
    }

    /// Set bank `bank`'s weights directly (no compensation).
    pub fn set_bank_weights(&mut self, bank: usize, w: &WeightVector) -> Result<()> {
        if bank >= self.banks.len() {
            return Err(Error::InvalidParameter {
                name: "bank",
                message: format!("index {bank} out of {}", self.banks.len()),
            });
        }
        self.banks[bank].set_weights(w)
    }

    /// Axon outputs with zero electrical drive (bias only): the state the
    /// network idles in before feedback, and the default starting point.
    pub fn quiescent_state(&self) -> Result<Vec<f64>> {
        self.neurons
            .iter()
            .map(|n| axon_response(n, self.pump_wavelength_nm, 0.0))
            .collect()
    }

    /// Power map each bank sees under an identity bus mix: the cascade
    /// taps apply their drop share and the fold's mode flip, the terminal
    /// bank gets whatever share of the bus survives.
    pub fn reference_input_maps(&self) -> Vec<Array2<f64>> {
        let n = self.neuron_count();
        let mut maps = Vec::with_capacity(n);
        let mut pass = 1.0; // bus share surviving to this stage
        for b in 0..n {
            let mut map = Array2::zeros((n, n));
            if b + 1 < n {
                // tap: divert fixed_drop with a mode flip
                for m in 0..n {
                    map[[n - 1 - m, m]] = self.fixed_drop * pass;
                }
                pass *= 1.0 - self.fixed_drop;
            } else {
                for m in 0..n {
                    map[[m, m]] = pass;
                }
            }
            maps.push(map);
        }
        maps
    }

    /// Measure each bank's input map by probing: unit power on one axon
    /// mode at a time, bank weights selecting one channel at a time, so
    /// entry (i, j) of bank b's map is that probe's photodiode reading.
    /// Bank heaters are restored afterwards.
    pub fn calibrate_bank_maps(&mut self) -> Result<Vec<Array2<f64>>> {
        let n = self.neuron_count();
        let saved: Vec<BankSpec> = self.banks.clone();
        let mut maps = vec![Array2::zeros((n, n)); n];
        for i in 0..n {
            let select = WeightVector::one_hot(n, i);
            for bank in &mut self.banks {
                bank.set_weights(&select)?;
            }
            for j in 0..n {
                // Unit power emerging on mode j at the axon side.
                let mut bus = vec![0.0; n];
                bus[j] = 1.0;
                let drives = self.bank_drives(&bus)?;
                for (b, &y) in drives.iter().enumerate() {
                    maps[b][[i, j]] = y;
                }
            }
        }
        self.banks = saved;
        Ok(maps)
    }

    /// Pre-distort per-bank weights so the mixed network computes what the
    /// identity-mix network would: bank b gets w_b R_b Y_b^-1, where R_b
    /// is its reference map and Y_b its measured (probed) map.
    pub fn compensate_weights(
        &mut self,
        targets: &[WeightVector],
    ) -> Result<Vec<CompensatedWeights>> {
        let n = self.neuron_count();
        if targets.len() != n {
            return Err(Error::DimensionMismatch {
                context: "weight targets vs banks".into(),
                left: targets.len(),
                right: n,
            });
        }
        let measured = self.calibrate_bank_maps()?;
        let reference = self.reference_input_maps();
        let mut reports = Vec::with_capacity(n);
        for b in 0..n {
            // w R Y^-1 = w (Y R^-1)^-1: reuse the weight-compensation path
            // with the effective power matrix Y R^-1.
            let ref_inv = linalg::invert(&reference[b])?;
            let effective = measured[b].dot(&ref_inv);
            let comp = compensate(&targets[b], &effective)?;
            self.banks[b].set_weights(&comp.weights)?;
            reports.push(comp);
        }
        Ok(reports)
    }

    /// Photodiode sums of every bank for given axon-side bus powers.
    fn bank_drives(&self, bus_powers: &[f64]) -> Result<Vec<f64>> {
        let n = self.neuron_count();
        let grid = ChannelGrid::new(n, 1);
        let sign = if self.invert_feedback { -1.0 } else { 1.0 };
        let bus = ChannelPowerVector::new(bus_powers.to_vec())?;
        let mut p = apply_mixing(&self.bus_mix, &bus, &grid)?;
        let mut drives = vec![0.0; n];
        for b in 0..n - 1 {
            let (readout, rest) = cascade(self.fixed_drop, &self.banks[b], &p)?;
            drives[b] = sign * readout.weighted_sum;
            p = rest;
        }
        drives[n - 1] = sign * bank_output(&self.banks[n - 1], &p)?.weighted_sum;
        Ok(drives)
    }

    /// One synchronous update (undamped): axon outputs -> bus -> mixing ->
    /// banks -> drives -> new axon outputs. Also returns the drives.
    pub fn step_with_drives(&self, state: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.neuron_count();
        if state.len() != n {
            return Err(Error::DimensionMismatch {
                context: "network state".into(),
                left: state.len(),
                right: n,
            });
        }
        let mut bus = vec![0.0; n];
        for (i, neuron) in self.neurons.iter().enumerate() {
            bus[neuron.mode_channel] = state[i].max(0.0);
        }
        let drives = self.bank_drives(&bus)?;
        let outputs = self
            .neurons
            .iter()
            .zip(&drives)
            .map(|(neuron, &drive)| axon_response(neuron, self.pump_wavelength_nm, drive))
            .collect::<Result<Vec<f64>>>()?;
        Ok((outputs, drives))
    }

    pub fn step(&self, state: &[f64]) -> Result<Vec<f64>> {
        Ok(self.step_with_drives(state)?.0)
    }

    /// Damped iteration to a fixed point. Starts from `initial` (default:
    /// the quiescent state) and stops when the per-iteration state change
    /// drops below `tol` in the max norm, or at `max_iter` with an honest
    /// converged = false.
    pub fn run_to_fixed_point(
        &self,
        initial: Option<&[f64]>,
        tol: f64,
        max_iter: usize,
    ) -> Result<FixedPointRun> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                message: format!("{tol} must be finite and > 0"),
            });
        }
        let mut state = match initial {
            Some(s) => {
                if s.len() != self.neuron_count() {
                    return Err(Error::DimensionMismatch {
                        context: "initial state".into(),
                        left: s.len(),
                        right: self.neuron_count(),
                    });
                }
                if s.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "initial state",
                        message: "powers must be finite and nonnegative".into(),
                    });
                }
                s.to_vec()
            }
            None => self.quiescent_state()?,
        };
        let mut trajectory = Vec::new();
        for iteration in 1..=max_iter {
            let (raw, drives) = self.step_with_drives(&state)?;
            let mut residual = 0.0f64;
            let next: Vec<f64> = state
                .iter()
                .zip(&raw)
                .map(|(&x, &gx)| (1.0 - DAMPING) * x + DAMPING * gx)
                .collect();
            for (a, b) in state.iter().zip(&next) {
                residual = residual.max((a - b).abs());
            }
            state = next;
            trajectory.push(TrajectoryPoint {
                iteration,
                drives,
                outputs: state.clone(),
                residual,
            });
            if residual < tol {
                return Ok(FixedPointRun {
                    state,
                    iterations: iteration,
                    converged: true,
                    trajectory,
                });
            }
        }
        Ok(FixedPointRun {
            state,
            iterations: max_iter,
            converged: false,
            trajectory,
        })
    }
}

/// One row of a fixed-point trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    /// Electrical drive each bank fed its neuron this iteration.
    pub drives: Vec<f64>,
    /// Damped axon output powers after the update.
    pub outputs: Vec<f64>,
    /// Max-norm state change of the update.
    pub residual: f64,
}

/// Outcome of a damped fixed-point run.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointRun {
    pub state: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trajectory: Vec<TrajectoryPoint>,
}

/// Result of optical demixing: the recovered channel powers plus the
/// per-bank optical scaling that kept inverse rows inside the weight rail.
#[derive(Debug, Clone, PartialEq)]
pub struct DemixResult {
    pub recovered: ChannelPowerVector,
    /// Optical scale applied to bank i's weights (its electrical readout
    /// was divided by the same factor).
    pub scales: Vec<f64>,
}

/// Weight rail demix banks are scaled to: inverse-matrix rows can exceed
/// the +-1 weight range, so each row is scaled onto this rail optically
/// and the bank's electrical output is rescaled back.
pub const DEMIX_WEIGHT_RAIL: f64 = 0.8;

/// Invert a power mix entirely in the optical domain: the bus mixes
/// `input` with `power_mix`, then bank i (carrying row i of the inverse,
/// rail-scaled) reads out channel i of the original vector.
pub fn demix(
    banks: &mut [BankSpec],
    power_mix: &Array2<f64>,
    input: &ChannelPowerVector,
) -> Result<ChannelPowerVector> {
    Ok(demix_detailed(banks, power_mix, input)?.recovered)
}

/// `demix`, also reporting the per-bank rail scales.
pub fn demix_detailed(
    banks: &mut [BankSpec],
    power_mix: &Array2<f64>,
    input: &ChannelPowerVector,
) -> Result<DemixResult> {
    let n = power_mix.nrows();
    if power_mix.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: power_mix.ncols(),
        });
    }
    if banks.len() != n {
        return Err(Error::DimensionMismatch {
            context: "demix banks vs modes".into(),
            left: banks.len(),
            right: n,
        });
    }
    if input.len() != n {
        return Err(Error::DimensionMismatch {
            context: "demix input vs modes".into(),
            left: input.len(),
            right: n,
        });
    }
    for bank in banks.iter() {
        if bank.modes() != n || bank.wavelengths() != 1 {
            return Err(Error::InvalidParameter {
                name: "banks",
                message: format!(
                    "each demix bank must span {n} modes x 1 wavelength, got {} x {}",
                    bank.modes(),
                    bank.wavelengths()
                ),
            });
        }
    }
    let inv = linalg::invert(power_mix)?;
    let condition = linalg::condition_1norm(power_mix, &inv);
    if condition > crate::weightbank::CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            condition,
            limit: crate::weightbank::CONDITION_LIMIT,
        });
    }

    // Apply the raw power matrix directly (it need not be doubly
    // stochastic here; the caller may pass a calibrated estimate).
    let mixed = ChannelPowerVector::new(
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| power_mix[[i, j]] * input.values()[j])
                    .sum::<f64>()
                    .max(0.0)
            })
            .collect(),
    )?;

    let mut recovered = Vec::with_capacity(n);
    let mut scales = Vec::with_capacity(n);
    for (i, bank) in banks.iter_mut().enumerate() {
        let row: Vec<f64> = (0..n).map(|j| inv[[i, j]]).collect();
        let peak = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if peak == 0.0 {
            return Err(Error::Singular);
        }
        let scale = DEMIX_WEIGHT_RAIL / peak;
        let scaled: Vec<f64> = row.iter().map(|v| v * scale).collect();
        bank.set_weights(&WeightVector::new(scaled)?)?;
        let y = bank_output(bank, &mixed)?.weighted_sum;
        recovered.push((y / scale).max(0.0));
        scales.push(scale);
    }
    Ok(DemixResult {
        recovered: ChannelPowerVector::new(recovered)?,
        scales,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    const PUMP_NM: f64 = 1550.0;

    fn axon() -> RingSpec {
        // Heater sweeps the resonance across the pump: peak at drive 0.25.
        RingSpec {
            resonance_nm: 1549.5,
            fwhm_nm: 1.0,
            heater_shift_nm_per_unit: 2.0,
            max_drop: 1.0,
        }
    }

    fn neuron(mode: usize) -> NeuronSpec {
        NeuronSpec {
            axon_ring: axon(),
            pump_power_w: 1.0,
            mode_channel: mode,
            bias: 0.05,
            gain: 0.25,
        }
    }

    fn two_neuron_net(mix: MixingMatrix) -> HairpinNetwork {
        let banks = vec![
            BankSpec::idealized(2, &[PUMP_NM]).unwrap(),
            BankSpec::idealized(2, &[PUMP_NM]).unwrap(),
        ];
        HairpinNetwork::new(vec![neuron(0), neuron(1)], banks, 0.5, mix, PUMP_NM).unwrap()
    }

    fn w(values: &[f64]) -> WeightVector {
        WeightVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn axon_peak_and_one_fwhm_detuning() {
        let n = neuron(0);
        // Heater drive h places the resonance at 1549.5 + 2 h; the peak
        // needs h = 0.25, i.e. gain * drive + bias = 0.25.
        let drive = (0.25 - n.bias) / n.gain;
        let p = axon_response(&n, PUMP_NM, drive).unwrap();
        assert!((p - n.pump_power_w * n.axon_ring.max_drop).abs() < 1e-12);

        // One FWHM past the peak: 1 / (1 + 4) of the maximum.
        let drive_off = (0.25 + n.axon_ring.fwhm_nm / 2.0 - n.bias) / n.gain;
        let p_off = axon_response(&n, PUMP_NM, drive_off).unwrap();
        assert!((p_off - p / 5.0).abs() < 1e-12);
    }

    #[test]
    fn axon_decreases_past_peak() {
        let n = neuron(0);
        let peak_drive = (0.25 - n.bias) / n.gain;
        let mut last = f64::INFINITY;
        for k in 0..20 {
            let drive = peak_drive + k as f64 * 0.1;
            let p = axon_response(&n, PUMP_NM, drive).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn zero_weights_converge_immediately() {
        let mut net = two_neuron_net(MixingMatrix::identity(2));
        net.set_bank_weights(0, &w(&[0.0, 0.0])).unwrap();
        net.set_bank_weights(1, &w(&[0.0, 0.0])).unwrap();
        let run = net.run_to_fixed_point(None, 1e-10, 100).unwrap();
        assert!(run.converged);
        assert!(run.iterations <= 2, "took {} iterations", run.iterations);
        let quiescent = net.quiescent_state().unwrap();
        for (s, q) in run.state.iter().zip(&quiescent) {
            assert!((s - q).abs() < 1e-10);
        }
    }

    #[test]
    fn self_excitation_matches_cobweb_oracle() {
        // One neuron, one terminal bank, small positive self-weight: the
        // network reduces to the 1-D map x -> axon(gain w x + bias).
        let bank = BankSpec::idealized(1, &[PUMP_NM]).unwrap();
        let mut net = HairpinNetwork::new(
            vec![neuron(0)],
            vec![bank],
            0.5,
            MixingMatrix::identity(1),
            PUMP_NM,
        )
        .unwrap();
        let weight = 0.2;
        net.set_bank_weights(0, &w(&[weight])).unwrap();

        let run = net.run_to_fixed_point(None, 1e-12, 10_000).unwrap();
        assert!(run.converged);

        // Independent oracle: bisect f(x) - x on [0, pump].
        let n = neuron(0);
        let f = |x: f64| axon_response(&n, PUMP_NM, weight * x).unwrap();
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        assert!(f(lo) - lo >= 0.0 && f(hi) - hi <= 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) - mid >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!(
            (run.state[0] - oracle).abs() < 1e-9,
            "fixed point {} vs oracle {oracle}",
            run.state[0]
        );

        // Monotone cobweb approach (map slope is positive here).
        for pair in run.trajectory.windows(2) {
            assert!(pair[1].outputs[0] >= pair[0].outputs[0] - 1e-12);
        }
    }

    #[test]
    fn mutual_inhibition_fixed_point_is_unique() {
        let mut net = two_neuron_net(MixingMatrix::identity(2));
        // Weak cross-inhibition; diagonal zero. Bank 0 sees the flipped
        // diverted block, so its "other neuron" channel is index 0.
        net.set_bank_weights(0, &w(&[-0.3, 0.0])).unwrap();
        net.set_bank_weights(1, &w(&[-0.3, 0.0])).unwrap();
        let tol = 1e-10;
        let reference = net.run_to_fixed_point(None, tol, 10_000).unwrap();
        assert!(reference.converged);

        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..10 {
            let init: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..1.0)).collect();
            let run = net.run_to_fixed_point(Some(&init), tol, 10_000).unwrap();
            assert!(run.converged);
            for (a, b) in run.state.iter().zip(&reference.state) {
                assert!(
                    (a - b).abs() < 10.0 * tol,
                    "fixed points diverge: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn bank_power_never_exceeds_pump_budget() {
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        let mut net = two_neuron_net(MixingMatrix::random(2, &mut rng));
        net.set_bank_weights(0, &w(&[0.4, -0.2])).unwrap();
        net.set_bank_weights(1, &w(&[-0.1, 0.3])).unwrap();
        let budget = net.total_pump_power_w();
        let run = net.run_to_fixed_point(None, 1e-10, 10_000).unwrap();
        assert!(run.converged);
        for point in &run.trajectory {
            let total: f64 = point.outputs.iter().sum();
            assert!(total <= budget + 1e-12, "passivity violated: {total}");
        }
    }

    #[test]
    fn runs_are_bit_deterministic() {
        let mut rng = ChaCha12Rng::seed_from_u64(57);
        let mix = MixingMatrix::random(2, &mut rng);
        let mut net = two_neuron_net(mix);
        net.set_bank_weights(0, &w(&[0.25, -0.35])).unwrap();
        net.set_bank_weights(1, &w(&[-0.15, 0.2])).unwrap();
        let a = net.run_to_fixed_point(None, 1e-12, 10_000).unwrap();
        let b = net.run_to_fixed_point(None, 1e-12, 10_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reference_maps_match_identity_mix_probing() {
        // Probing an identity-mix network must reproduce the analytic
        // reference maps.
        let mut net = two_neuron_net(MixingMatrix::identity(2));
        let probed = net.calibrate_bank_maps().unwrap();
        let reference = net.reference_input_maps();
        for (p, r) in probed.iter().zip(&reference) {
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        (p[[i, j]] - r[[i, j]]).abs() < 1e-9,
                        "map entry ({i},{j}): probed {} vs reference {}",
                        p[[i, j]],
                        r[[i, j]]
                    );
                }
            }
        }
    }

    #[test]
    fn compensation_restores_identity_mix_fixed_point() {
        let targets = [w(&[0.3, -0.2]), w(&[-0.25, 0.15])];
        let tol = 1e-12;

        let mut reference = two_neuron_net(MixingMatrix::identity(2));
        reference.set_bank_weights(0, &targets[0]).unwrap();
        reference.set_bank_weights(1, &targets[1]).unwrap();
        let ref_run = reference.run_to_fixed_point(None, tol, 10_000).unwrap();
        assert!(ref_run.converged);

        let mut rng = ChaCha12Rng::seed_from_u64(101);
        let mut tested = 0;
        while tested < 3 {
            let mix = MixingMatrix::random(2, &mut rng);
            let mut net = two_neuron_net(mix.clone());

            // Uncompensated: same weights straight onto the mixed bus.
            net.set_bank_weights(0, &targets[0]).unwrap();
            net.set_bank_weights(1, &targets[1]).unwrap();
            let raw_run = net.run_to_fixed_point(None, tol, 10_000).unwrap();

            match net.compensate_weights(&targets) {
                Ok(c) if c.iter().all(|r| !r.saturated) => {}
                _ => continue, // strong mix: compensation would clip
            }
            let comp_run = net.run_to_fixed_point(None, tol, 10_000).unwrap();
            assert!(comp_run.converged);

            let comp_err = comp_run
                .state
                .iter()
                .zip(&ref_run.state)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let raw_err = raw_run
                .state
                .iter()
                .zip(&ref_run.state)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(comp_err < 1e-6, "compensated error {comp_err}");
            assert!(
                raw_err > comp_err,
                "mixing was a no-op here: raw {raw_err} vs comp {comp_err}"
            );
            tested += 1;
        }
    }

    #[test]
    fn demix_identity_and_swap_return_input() {
        let input = ChannelPowerVector::new(vec![0.7, 0.1]).unwrap();
        let mut banks = vec![
            BankSpec::idealized(2, &[PUMP_NM]).unwrap(),
            BankSpec::idealized(2, &[PUMP_NM]).unwrap(),
        ];
        let id = MixingMatrix::identity(2);
        let out = demix(&mut banks, id.power(), &input).unwrap();
        for (o, i) in out.values().iter().zip(input.values()) {
            assert!((o - i).abs() < 1e-9);
        }

        let swap = MixingMatrix::flip(2);
        let out = demix(&mut banks, swap.power(), &input).unwrap();
        for (o, i) in out.values().iter().zip(input.values()) {
            assert!((o - i).abs() < 1e-9, "swap not undone: {o} vs {i}");
        }
    }

    #[test]
    fn demix_recovers_random_four_mode_mix() {
        let mut rng = ChaCha12Rng::seed_from_u64(67);
        let mut banks: Vec<BankSpec> = (0..4)
            .map(|_| BankSpec::idealized(4, &[PUMP_NM]).unwrap())
            .collect();
        for _ in 0..10 {
            let mix = MixingMatrix::random(4, &mut rng);
            let input: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..1.0)).collect();
            let input = ChannelPowerVector::new(input).unwrap();
            let out = demix(&mut banks, mix.power(), &input).unwrap();
            for (o, i) in out.values().iter().zip(input.values()) {
                assert!((o - i).abs() < 1e-9, "{o} vs {i}");
            }
        }
    }

    #[test]
    fn demix_crosstalk_suppression_exceeds_80_db() {
        let mut rng = ChaCha12Rng::seed_from_u64(71);
        let mix = MixingMatrix::random(4, &mut rng);
        let mut banks: Vec<BankSpec> = (0..4)
            .map(|_| BankSpec::idealized(4, &[PUMP_NM]).unwrap())
            .collect();
        for j in 0..4 {
            let input = ChannelPowerVector::one_hot(4, j);
            let out = demix(&mut banks, mix.power(), &input).unwrap();
            let signal = out.values()[j];
            let leak = out
                .values()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, v)| v.abs())
                .fold(0.0, f64::max)
                .max(1e-30);
            let suppression_db = 10.0 * (signal / leak).log10();
            assert!(
                suppression_db > 80.0,
                "mode {j}: only {suppression_db:.1} dB"
            );
        }
    }

    #[test]
    fn network_validation_catches_mismatches() {
        let banks = vec![
            BankSpec::idealized(2, &[PUMP_NM]).unwrap(),
            BankSpec::idealized(2, &[PUMP_NM]).unwrap(),
        ];
        // Duplicate mode channel.
        assert!(HairpinNetwork::new(
            vec![neuron(0), neuron(0)],
            banks.clone(),
            0.5,
            MixingMatrix::identity(2),
            PUMP_NM,
        )
        .is_err());
        // Bank carrier off the pump wavelength.
        let odd_banks = vec![
            BankSpec::idealized(2, &[PUMP_NM + 1.0]).unwrap(),
            BankSpec::idealized(2, &[PUMP_NM]).unwrap(),
        ];
        assert!(HairpinNetwork::new(
            vec![neuron(0), neuron(1)],
            odd_banks,
            0.5,
            MixingMatrix::identity(2),
            PUMP_NM,
        )
        .is_err());
    }
}
