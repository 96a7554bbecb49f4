//! Microring weights: from heater drive to signed weight.
//!
//! A ring's drop port traces a Lorentzian as the heater detunes its
//! resonance, so a weight bank sets each channel's drop fraction theta
//! by solving the Lorentzian for the heater drive; the balanced
//! photodiode then reads w = 2 theta - 1 per channel. This example walks
//! the Lorentzian, shows what a ring with limited heater authority can
//! and cannot reach, round-trips weights on a bank with full authority,
//! and measures the off-carrier crosstalk of a parked ring.
//!
//! Run with: cargo run --example ring_weights

use mdmsim::mrr::{
    drop_fraction, reachable_drop_range, solve_heater_for_weight, HeaterState, RingSpec,
};
use mdmsim::weightbank::{bank_output, BankSpec, ChannelPowerVector, WeightVector};

fn main() -> mdmsim::Result<()> {
    // A realistic ring: 0.2 nm linewidth, heater pulls the resonance by
    // at most 0.5 nm -- only 2.5 linewidths of authority.
    let ring = RingSpec {
        resonance_nm: 1550.0,
        fwhm_nm: 0.2,
        heater_shift_nm_per_unit: 0.5,
        max_drop: 1.0,
    };
    let carrier = 1550.0;

    println!("drop fraction vs heater drive (carrier on the cold resonance):");
    println!("{:>8} {:>12}", "drive", "theta");
    for i in 0..=10 {
        let drive = i as f64 / 10.0;
        let theta = drop_fraction(&ring, HeaterState::new(drive)?, carrier);
        println!("{drive:>8.2} {theta:>12.6}");
    }

    let (lo, hi) = reachable_drop_range(&ring, carrier);
    println!();
    println!("reachable drop range: [{lo:.6}, {hi:.6}]");
    println!("reachable weight range: [{:+.6}, {:+.6}]", 2.0 * lo - 1.0, 2.0 * hi - 1.0);
    match solve_heater_for_weight(&ring, carrier, 0.0) {
        Ok(_) => println!("weight -1 (theta 0): reachable"),
        Err(e) => println!("weight -1 (theta 0): {e}"),
    }

    // Full round trip needs enough authority to park the resonance far
    // off the carrier; the idealized bank has it.
    let mut bank = BankSpec::idealized(2, &[carrier])?;
    println!();
    println!("weight round trip on a 2-mode bank with full heater authority:");
    println!("{:>8} {:>14} {:>10}", "w", "realized", "error");
    for i in 0..=8 {
        let w = -1.0 + 0.25 * i as f64;
        bank.set_weights(&WeightVector::new(vec![w, 0.0])?)?;
        let realized = bank.weights().values()[0];
        println!("{w:>8.2} {realized:>14.9} {:>10.2e}", (realized - w).abs());
    }

    // A ring parked on its own carrier barely touches a neighbor 2 nm
    // away: the Lorentzian falls off as 1/(1 + (2 detune / fwhm)^2).
    let neighbor = carrier + 2.0;
    let parked = drop_fraction(&ring, HeaterState::OFF, neighbor);
    println!();
    println!(
        "crosstalk onto a carrier {:.0} linewidths away: theta = {parked:.3e} ({:.1} dB below max_drop)",
        (neighbor - carrier) / ring.fwhm_nm,
        10.0 * (parked / ring.max_drop).log10()
    );

    // The same statement at bank level: select mode 0 only, inject power
    // on both modes, and compare the photodiode sum with and without
    // power on the unselected mode.
    bank.set_weights(&WeightVector::new(vec![1.0, 0.0])?)?;
    let alone = bank_output(&bank, &ChannelPowerVector::new(vec![1.0, 0.0])?)?.weighted_sum;
    let with_neighbor = bank_output(&bank, &ChannelPowerVector::new(vec![1.0, 1.0])?)?.weighted_sum;
    println!(
        "bank selectivity: y(mode 0 alone) = {alone:.9}, y(plus unit power on mode 1) = {with_neighbor:.9}"
    );
    Ok(())
}
