//! Two microring neurons on a folded bus, iterated to a fixed point.
//!
//! Each neuron is a pump laser modulated by a heater-driven Lorentzian
//! ring; its output power rides one bus mode. On the way back down the
//! fold, a cascade bank taps half the bus (flipping the mode order) to
//! drive neuron 0 and a terminal bank drives neuron 1, closing the loop
//! electrically. Damped synchronous iteration finds the fixed point.
//! The example runs mutual inhibition on a clean bus, then scrambles the
//! bus and shows that probe-calibrated weight compensation restores the
//! clean fixed point.
//!
//! Run with: cargo run --example hairpin_network

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use mdmsim::mrr::RingSpec;
use mdmsim::network::{HairpinNetwork, NeuronSpec};
use mdmsim::weightbank::{BankSpec, MixingMatrix, WeightVector};

const PUMP_NM: f64 = 1550.0;

fn neuron(mode: usize) -> NeuronSpec {
    NeuronSpec {
        axon_ring: RingSpec {
            resonance_nm: 1549.5,
            fwhm_nm: 1.0,
            heater_shift_nm_per_unit: 2.0,
            max_drop: 1.0,
        },
        pump_power_w: 1.0,
        mode_channel: mode,
        bias: 0.05,
        gain: 0.25,
    }
}

fn network(mix: MixingMatrix) -> mdmsim::Result<HairpinNetwork> {
    let banks = vec![
        BankSpec::idealized(2, &[PUMP_NM])?,
        BankSpec::idealized(2, &[PUMP_NM])?,
    ];
    HairpinNetwork::new(vec![neuron(0), neuron(1)], banks, 0.5, mix, PUMP_NM)
}

fn main() -> mdmsim::Result<()> {
    // Asymmetric weighting (inhibition plus a little self-excitation on
    // neuron 1): the fixed point is asymmetric, so bus mixing visibly
    // moves it. A symmetric state would slip through any lossless mixing
    // untouched -- row sums of the power matrix are 1.
    let weights = [
        WeightVector::new(vec![-0.30, 0.10])?,
        WeightVector::new(vec![0.20, -0.15])?,
    ];

    let mut clean = network(MixingMatrix::identity(2))?;
    clean.set_bank_weights(0, &weights[0])?;
    clean.set_bank_weights(1, &weights[1])?;
    let reference = clean.run_to_fixed_point(None, 1e-12, 10_000)?;
    println!(
        "clean bus: converged={} in {} iterations",
        reference.converged, reference.iterations
    );
    println!("fixed point: [{:.9}, {:.9}]", reference.state[0], reference.state[1]);
    println!("first iterations (drive, output per neuron):");
    for point in reference.trajectory.iter().take(5) {
        println!(
            "  it {:>2}: drives [{:+.6}, {:+.6}] outputs [{:.6}, {:.6}] residual {:.2e}",
            point.iteration,
            point.drives[0],
            point.drives[1],
            point.outputs[0],
            point.outputs[1],
            point.residual
        );
    }

    // Scramble the bus and run the same weights uncompensated. Strong
    // scrambles would push the compensated weights past the +-1 range,
    // so draw until the power matrix is comfortably invertible.
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let mix = loop {
        let candidate = MixingMatrix::random(2, &mut rng);
        let p = candidate.power();
        let det = p[[0, 0]] * p[[1, 1]] - p[[0, 1]] * p[[1, 0]];
        if det.abs() > 0.4 {
            break candidate;
        }
    };
    println!();
    println!(
        "mixed bus (same-mode power fraction {:.3}):",
        mix.power()[[0, 0]]
    );
    let mut mixed_net = network(mix)?;
    mixed_net.set_bank_weights(0, &weights[0])?;
    mixed_net.set_bank_weights(1, &weights[1])?;
    let raw = mixed_net.run_to_fixed_point(None, 1e-12, 10_000)?;
    let raw_err = raw
        .state
        .iter()
        .zip(&reference.state)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("  uncompensated fixed point: [{:.9}, {:.9}]", raw.state[0], raw.state[1]);
    println!("  deviation from clean bus:  {raw_err:.3e}");

    // Compensate: probe each bank's input map with one-hot probes, then
    // load w R Y^-1 so the mixed hardware computes the clean network.
    let reports = mixed_net.compensate_weights(&weights)?;
    assert!(reports.iter().all(|r| !r.saturated));
    let comp = mixed_net.run_to_fixed_point(None, 1e-12, 10_000)?;
    let comp_err = comp
        .state
        .iter()
        .zip(&reference.state)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("  compensated fixed point:   [{:.9}, {:.9}]", comp.state[0], comp.state[1]);
    println!("  deviation from clean bus:  {comp_err:.3e}");
    Ok(())
}
