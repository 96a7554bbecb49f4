//! Measuring an unknown mode-mixing matrix with one-hot probes.
//!
//! Modes mix along the bus (bends, imperfect couplers), so the power a
//! bank channel sees is a scrambled version of what entered. Probing
//! with unit power on mode j while the bank selects channel i reads the
//! power matrix entry |M|^2_ij directly. The measured matrix should be
//! doubly stochastic (rows and columns sum to 1 for lossless mixing);
//! noise on the probes shows up as a stochastic residual.
//!
//! Run with: cargo run --example bank_calibration

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use mdmsim::weightbank::{apply_mixing, bank_output, calibrate, BankSpec, MixingMatrix};

fn main() -> mdmsim::Result<()> {
    let modes = 4;
    let carrier = 1550.0;
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let mix = MixingMatrix::random(modes, &mut rng);

    let mut hardware = BankSpec::idealized(modes, &[carrier])?;
    let grid = hardware.grid();

    // Noiseless probes: the calibration is exact.
    let clean = calibrate(
        |w, p| {
            hardware.set_weights(w).expect("one-hot probe weights");
            let mixed = apply_mixing(&mix, p, &grid).expect("probe dimensions");
            bank_output(&hardware, &mixed).expect("bank readout").weighted_sum
        },
        modes,
        1e-6,
    )?;

    println!("true power matrix vs noiseless calibration (worst entry error):");
    let mut worst = 0.0f64;
    for i in 0..modes {
        for j in 0..modes {
            worst = worst.max((clean.power[[i, j]] - mix.power()[[i, j]]).abs());
        }
    }
    for i in 0..modes {
        let row: Vec<String> = (0..modes).map(|j| format!("{:.6}", clean.power[[i, j]])).collect();
        println!("  [{}]", row.join(", "));
    }
    println!("worst entry error: {worst:.2e}");
    println!(
        "stochastic residual: {:.2e} (consistent: {})",
        clean.stochastic_residual, clean.consistent
    );

    // Noisy probes: each photodiode reading carries additive noise; the
    // residual reports how far the estimate drifts from doubly
    // stochastic, flagging a questionable calibration.
    let sigma = 1e-3;
    let noise = Normal::new(0.0, sigma).expect("valid sigma");
    let noisy = calibrate(
        |w, p| {
            hardware.set_weights(w).expect("one-hot probe weights");
            let mixed = apply_mixing(&mix, p, &grid).expect("probe dimensions");
            bank_output(&hardware, &mixed).expect("bank readout").weighted_sum
                + noise.sample(&mut rng)
        },
        modes,
        1e-6,
    )?;
    let mut worst_noisy = 0.0f64;
    for i in 0..modes {
        for j in 0..modes {
            worst_noisy = worst_noisy.max((noisy.power[[i, j]] - mix.power()[[i, j]]).abs());
        }
    }
    println!();
    println!("with probe noise sigma = {sigma:.0e}:");
    println!("worst entry error: {worst_noisy:.2e}");
    println!(
        "stochastic residual: {:.2e} (consistent at 1e-6: {})",
        noisy.stochastic_residual, noisy.consistent
    );
    Ok(())
}
