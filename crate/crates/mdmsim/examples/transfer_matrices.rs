//! Transfer-matrix building blocks: couplers, phase arms, composition.
//!
//! Every device in the simulator is a unitary transfer matrix acting on
//! complex mode/wavelength amplitudes. This example builds a coupler
//! matrix, checks its unitarity, composes the asymmetric interferometer
//! as coupler . phase . coupler, and confirms the matrix route agrees
//! with the closed-form transmission to machine precision -- the same
//! identity the test suite enforces across thousands of random draws.
//!
//! Run with: cargo run --example transfer_matrices

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use mdmsim::core::{random_unitary, ComplexField, UNITARITY_TOL};
use mdmsim::coupler::{coupler_matrix, embedded_coupler_matrix};
use mdmsim::mzi::{mzi_transfer_matrix, mzi_transmission};

fn main() -> mdmsim::Result<()> {
    // A 2x2 coupler moving 30 % of the power across.
    let alpha = 0.3;
    let coupler = coupler_matrix(alpha)?;
    println!("coupler(alpha = {alpha}):");
    println!("  unitarity deviation: {:.2e} (tolerance {UNITARITY_TOL:.0e})", coupler.unitarity_deviation());
    let out = coupler.apply(&ComplexField::basis(2, 0))?;
    println!("  unit power in port 0 -> output powers {:?}", out.powers());

    // The same coupler embedded in a 4-channel bus touches only the two
    // channels it connects.
    let embedded = embedded_coupler_matrix(alpha, 4, 1, 3)?;
    let untouched = embedded.apply(&ComplexField::basis(4, 0))?;
    println!(
        "  embedded in 4 channels (ports 1 and 3): channel 0 passes with power {:.1}",
        untouched.powers()[0]
    );

    // Interferometer = coupler . phase . coupler; the closed form and
    // the matrix product agree to machine precision.
    println!();
    println!("closed form vs matrix product for the asymmetric interferometer:");
    let mut rng = ChaCha12Rng::seed_from_u64(123);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let alpha: f64 = rand::Rng::gen_range(&mut rng, 0.0..=1.0);
        let phase: f64 = rand::Rng::gen_range(&mut rng, 0.0..std::f64::consts::TAU);
        let closed = mzi_transmission(alpha, phase)?;
        let matrix = mzi_transfer_matrix(alpha, phase)?;
        let t = matrix.apply(&ComplexField::basis(2, 0))?.powers()[0];
        worst = worst.max((closed - t).abs());
    }
    println!("  worst |closed - matrix| over 1000 random (alpha, phase): {worst:.2e}");

    // Random lossless devices conserve power exactly.
    println!();
    println!("random unitaries conserve power:");
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let device = random_unitary(8, &mut rng);
    let input = ComplexField::basis(8, 3);
    let output = device.apply(&input)?;
    println!(
        "  8-channel device: unitarity deviation {:.2e}, output power sum {:.17}",
        device.unitarity_deviation(),
        output.total_power()
    );
    Ok(())
}
