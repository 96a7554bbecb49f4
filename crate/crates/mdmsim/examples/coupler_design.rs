//! Designing a mode-selective coupler from an effective-index table.
//!
//! A narrow access waveguide couples selectively into one bus mode when
//! its fundamental mode's effective index matches that bus mode's. This
//! example loads a width -> effective-index table, solves for the
//! phase-matched width, and then maps the coupling ratio against width
//! (detuning penalty) and against interaction length (beat oscillation).
//!
//! Run with: cargo run --example coupler_design

use std::path::PathBuf;

use mdmsim::coupler::{coupling_ratio, matched_width, CouplerSpec, IndexMatchModel};

fn main() -> mdmsim::Result<()> {
    let table = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/neff_sample.txt");
    let model = IndexMatchModel::load(&table)?;
    let (lo, hi) = model.width_range_nm();
    println!(
        "index table: {} modes over widths {lo}..{hi} nm ({})",
        model.modes(),
        table.display()
    );

    // The bus mode we target has effective index 2.650; find the access
    // width whose fundamental mode matches it.
    let reference_index = 2.650;
    let width = matched_width(&model, 0, reference_index)?;
    println!("phase-matched width for reference index {reference_index}: {width} nm");

    let design = |width_nm: f64, length_um: f64| CouplerSpec {
        width_nm,
        length_um,
        target_mode: 1,
        matched_width_nm: width,
        beat_length_um: 60.0,
        detuning_slope_per_nm: 2.0e-3,
    };

    // Half the beat length transfers all power at exact phase match; any
    // width error detunes the coupler and caps the transferable power.
    println!();
    println!("coupling ratio vs width at the full-transfer length:");
    println!("{:>10} {:>12}", "width", "alpha");
    for offset in [-50.0, -30.0, -10.0, 0.0, 10.0, 30.0, 50.0] {
        let spec = design(width + offset, 30.0);
        println!("{:>10.1} {:>12.6}", width + offset, coupling_ratio(&spec)?);
    }

    println!();
    println!("coupling ratio vs length at the matched width (beat = 60 um):");
    println!("{:>10} {:>12}", "length", "alpha");
    for length in [5.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0] {
        let spec = design(width, length);
        println!("{length:>10.1} {:>12.6}", coupling_ratio(&spec)?);
    }
    Ok(())
}
