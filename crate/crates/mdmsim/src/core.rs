//! Complex linear-algebra substrate and channel bookkeeping shared by the
//! device models: channel indexing, field vectors, transfer matrices.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Per-entry tolerance for the default unitarity check.
pub const UNITARITY_TOL: f64 = 1e-12;

/// One optical channel: a (spatial mode, wavelength slot) pair.
///
/// Channel vectors are ordered mode-major, wavelength-minor everywhere:
/// `index = mode_index * wavelengths + wavelength_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Channel {
    pub mode_index: usize,
    pub wavelength_index: usize,
}

/// The mode x wavelength channel layout of a bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelGrid {
    pub modes: usize,
    pub wavelengths: usize,
}

impl ChannelGrid {
    pub fn new(modes: usize, wavelengths: usize) -> Self {
        Self { modes, wavelengths }
    }

    pub fn len(&self) -> usize {
        self.modes * self.wavelengths
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of a channel, or an error if it lies outside the grid.
    pub fn index(&self, ch: Channel) -> Result<usize> {
        if ch.mode_index >= self.modes {
            return Err(Error::InvalidParameter {
                name: "mode_index",
                message: format!("{} >= mode count {}", ch.mode_index, self.modes),
            });
        }
        if ch.wavelength_index >= self.wavelengths {
            return Err(Error::InvalidParameter {
                name: "wavelength_index",
                message: format!("{} >= wavelength count {}", ch.wavelength_index, self.wavelengths),
            });
        }
        Ok(ch.mode_index * self.wavelengths + ch.wavelength_index)
    }

    /// Channel at a flat index.
    pub fn channel(&self, index: usize) -> Channel {
        Channel {
            mode_index: index / self.wavelengths,
            wavelength_index: index % self.wavelengths,
        }
    }

    /// All channels in flat order. Never yields duplicates.
    pub fn channels(&self) -> impl Iterator<Item = Channel> + '_ {
        (0..self.len()).map(|i| self.channel(i))
    }
}

/// Complex amplitude per channel, normalized so |a|^2 is optical power in
/// watts relative to a 1 W reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    amplitudes: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("field amplitude".into()));
        }
        Ok(Self { amplitudes })
    }

    /// Unit power on a single channel, zero elsewhere.
    pub fn basis(dim: usize, channel: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[channel] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Total optical power sum(|a_i|^2).
    pub fn total_power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Per-channel powers |a_i|^2.
    pub fn powers(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Square complex matrix acting on channel vectors.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    entries: Array2<Complex64>,
    label: String,
    lossless: bool,
}

impl TransferMatrix {
    /// General transfer matrix. Must be square; entries must be finite.
    pub fn new(entries: Array2<Complex64>, label: impl Into<String>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if entries.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
            return Err(Error::NonFinite("transfer matrix entry".into()));
        }
        Ok(Self {
            entries,
            label: label.into(),
            lossless: false,
        })
    }

    /// Transfer matrix flagged lossless; rejected unless unitary to 1e-12
    /// per entry.
    pub fn lossless(entries: Array2<Complex64>, label: impl Into<String>) -> Result<Self> {
        let mut m = Self::new(entries, label)?;
        let dev = m.unitarity_deviation();
        if dev > UNITARITY_TOL {
            return Err(Error::NotLossless { deviation: dev });
        }
        m.lossless = true;
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: Array2::eye(dim),
            label: "identity".into(),
            lossless: true,
        }
    }

    /// Diagonal matrix of pure phases exp(j*phi_i). Always lossless.
    pub fn diagonal_phases(phases: &[f64], label: impl Into<String>) -> Self {
        let mut entries = Array2::zeros((phases.len(), phases.len()));
        for (i, &phi) in phases.iter().enumerate() {
            entries[[i, i]] = Complex64::from_polar(1.0, phi);
        }
        Self {
            entries,
            label: label.into(),
            lossless: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_lossless(&self) -> bool {
        self.lossless
    }

    /// Apply to a field: output amplitudes = M * input.
    pub fn apply(&self, field: &ComplexField) -> Result<ComplexField> {
        if self.dim() != field.len() {
            return Err(Error::DimensionMismatch {
                context: format!("apply `{}` to field", self.label),
                left: self.dim(),
                right: field.len(),
            });
        }
        let n = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += self.entries[[i, j]] * field.amplitudes[j];
            }
            out[i] = acc;
        }
        Ok(ComplexField { amplitudes: out })
    }

    /// Matrix product self * other (self acts after other).
    pub fn compose(&self, other: &TransferMatrix) -> Result<TransferMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context: format!("compose `{}` with `{}`", self.label, other.label),
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(TransferMatrix {
            entries: self.entries.dot(&other.entries),
            label: format!("{}*{}", self.label, other.label),
            lossless: self.lossless && other.lossless,
        })
    }

    /// Max-entry deviation of M†M from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut max_dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                // (M†M)[i,j] = sum_k conj(M[k,i]) M[k,j]
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.entries[[k, i]].conj() * self.entries[[k, j]];
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((acc - expected).norm());
            }
        }
        max_dev
    }

    /// True iff M†M deviates from the identity by at most `tol` per entry.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }
}

/// Random unitary via Gram-Schmidt orthonormalization of a complex Gaussian
/// matrix, re-orthogonalized once to push the residual to machine precision.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> TransferMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect();

    for pass in 0..2 {
        for j in 0..dim {
            for k in 0..j {
                let proj: Complex64 = (0..dim).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..dim {
                    let corr = proj * cols[k][i];
                    cols[j][i] -= corr;
                }
            }
            let norm: f64 = cols[j].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            // A zero column is vanishingly unlikely; resample if it happens.
            if norm < 1e-12 && pass == 0 {
                for a in cols[j].iter_mut() {
                    *a = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                }
                let n2: f64 = cols[j].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                for a in cols[j].iter_mut() {
                    *a /= n2;
                }
                continue;
            }
            for a in cols[j].iter_mut() {
                *a /= norm;
            }
        }
    }

    let mut entries = Array2::zeros((dim, dim));
    for j in 0..dim {
        for i in 0..dim {
            entries[[i, j]] = cols[j][i];
        }
    }
    TransferMatrix {
        entries,
        label: "random-unitary".into(),
        lossless: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_apply_returns_same_field() {
        let f = ComplexField::new(vec![c(0.3, 0.1), c(-0.2, 0.7), c(0.0, -1.1)]).unwrap();
        let out = TransferMatrix::identity(3).apply(&f).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn full_cross_coupler_maps_bar_to_cross_with_j() {
        // alpha = 1: diagonal 0, off-diagonal j
        let m = crate::coupler::coupler_matrix(1.0).unwrap();
        let f = ComplexField::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let out = m.apply(&f).unwrap();
        assert!((out.amplitudes()[0] - c(0.0, 0.0)).norm() < 1e-15);
        assert!((out.amplitudes()[1] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn random_unitary_conserves_power() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let u = random_unitary(3, &mut rng);
        let f = ComplexField::new(vec![c(0.4, -0.3), c(0.1, 0.9), c(-0.5, 0.2)]).unwrap();
        let out = u.apply(&f).unwrap();
        let rel = (out.total_power() - f.total_power()).abs() / f.total_power();
        assert!(rel < 1e-10, "relative power error {rel}");
    }

    #[test]
    fn apply_rejects_dimension_mismatch_naming_both() {
        let f = ComplexField::new(vec![c(1.0, 0.0); 2]).unwrap();
        let err = TransferMatrix::identity(3).apply(&f).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('3') && msg.contains('2'), "diagnostic was: {msg}");
    }

    #[test]
    fn compose_identity_is_noop() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let a = random_unitary(4, &mut rng);
        let prod = a.compose(&TransferMatrix::identity(4)).unwrap();
        for (x, y) in prod.entries().iter().zip(a.entries().iter()) {
            assert!((x - y).norm() < 1e-15);
        }
        let ii = TransferMatrix::identity(2)
            .compose(&TransferMatrix::identity(2))
            .unwrap();
        assert!(ii.is_unitary(1e-15));
        assert!((ii.entries()[[0, 0]] - 1.0).norm() < 1e-15);
        assert!(ii.entries()[[0, 1]].norm() < 1e-15);
    }

    #[test]
    fn two_half_couplers_swap_up_to_global_phase() {
        let half = crate::coupler::coupler_matrix(0.5).unwrap();
        let m = half.compose(&half).unwrap();
        // Full swap up to global phase: zero diagonal, unit-magnitude off-diagonal.
        assert!(m.entries()[[0, 0]].norm() < 1e-15);
        assert!(m.entries()[[1, 1]].norm() < 1e-15);
        assert!((m.entries()[[0, 1]].norm() - 1.0).abs() < 1e-15);
        assert!((m.entries()[[1, 0]].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compose_of_unitaries_is_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..8 {
            let a = random_unitary(5, &mut rng);
            let b = random_unitary(5, &mut rng);
            assert!(a.compose(&b).unwrap().is_unitary(1e-12));
        }
    }

    #[test]
    fn is_unitary_examples() {
        assert!(TransferMatrix::identity(4).is_unitary(1e-12));

        let mut d = Array2::zeros((2, 2));
        d[[0, 0]] = c(0.5, 0.0);
        d[[1, 1]] = c(1.0, 0.0);
        let m = TransferMatrix::new(d, "diag(0.5,1)").unwrap();
        assert!(!m.is_unitary(1e-12));

        for alpha in [0.0, 0.25, 0.5, 1.0] {
            assert!(crate::coupler::coupler_matrix(alpha).unwrap().is_unitary(1e-12));
        }
    }

    #[test]
    fn lossless_constructor_rejects_nonunitary() {
        let mut d = Array2::zeros((2, 2));
        d[[0, 0]] = c(0.5, 0.0);
        d[[1, 1]] = c(1.0, 0.0);
        assert!(matches!(
            TransferMatrix::lossless(d, "bad"),
            Err(Error::NotLossless { .. })
        ));
    }

    #[test]
    fn channel_grid_indexing_is_mode_major() {
        let grid = ChannelGrid::new(4, 4);
        let ch = Channel {
            mode_index: 2,
            wavelength_index: 3,
        };
        assert_eq!(grid.index(ch).unwrap(), 11);
        assert_eq!(grid.channel(11), ch);
        // no duplicates over the full enumeration
        let all: Vec<_> = grid.channels().collect();
        let mut dedup = all.clone();
        dedup.sort_by_key(|c| (c.mode_index, c.wavelength_index));
        dedup.dedup();
        assert_eq!(all.len(), dedup.len());
        // out-of-grid channels are rejected
        assert!(grid
            .index(Channel {
                mode_index: 4,
                wavelength_index: 0
            })
            .is_err());
    }

    #[test]
    fn field_rejects_non_finite() {
        assert!(ComplexField::new(vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexField::new(vec![c(0.0, f64::INFINITY)]).is_err());
    }

    proptest! {
        #[test]
        fn power_conserved_through_random_unitary(seed in 0u64..1000, dim in 2usize..6) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let u = random_unitary(dim, &mut rng);
            let amps: Vec<Complex64> = (0..dim)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let f = ComplexField::new(amps).unwrap();
            prop_assume!(f.total_power() > 1e-6);
            let out = u.apply(&f).unwrap();
            let rel = (out.total_power() - f.total_power()).abs() / f.total_power();
            prop_assert!(rel < 1e-10);
        }

        #[test]
        fn compose_is_associative(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let a = random_unitary(4, &mut rng);
            let b = random_unitary(4, &mut rng);
            let c_m = random_unitary(4, &mut rng);
            let left = a.compose(&b).unwrap().compose(&c_m).unwrap();
            let right = a.compose(&b.compose(&c_m).unwrap()).unwrap();
            for (x, y) in left.entries().iter().zip(right.entries().iter()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }
}
