//! Asymmetric directional coupler between a single-mode waveguide and one
//! mode of a multi-mode bus, modeled with two-waveguide coupled-mode theory:
//! peak transfer F = kappa^2/(kappa^2 + delta^2) with detuning delta linear
//! in the width error, reducing to the ideal beat-length oscillation when
//! the widths are index-matched.

use std::f64::consts::PI;
use std::io::BufRead;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::core::TransferMatrix;
use crate::error::{Error, Result};

/// Geometry and model parameters of one mode-selective coupler.
///
/// `matched_width_nm` and `beat_length_um` are design inputs (typically read
/// off eigenmode simulations); the shipped defaults in configs are
/// placeholders, not fabrication data.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplerSpec {
    /// Multi-mode waveguide width W.
    pub width_nm: f64,
    /// Coupling length L.
    pub length_um: f64,
    /// Mode order being coupled (0 = fundamental).
    pub target_mode: usize,
    /// Width at which the effective indices match for `target_mode`.
    pub matched_width_nm: f64,
    /// Spatial period of the power oscillation at the matched width.
    pub beat_length_um: f64,
    /// d(delta)/dW: phase-mismatch growth per nm of width error, in 1/um/nm.
    pub detuning_slope_per_nm: f64,
}

impl CouplerSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("width_nm", self.width_nm),
            ("length_um", self.length_um),
            ("matched_width_nm", self.matched_width_nm),
            ("beat_length_um", self.beat_length_um),
            ("detuning_slope_per_nm", self.detuning_slope_per_nm),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("coupler {name}")));
            }
        }
        if self.width_nm <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "width_nm",
                message: format!("{} must be > 0", self.width_nm),
            });
        }
        if self.length_um <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "length_um",
                message: format!("{} must be > 0", self.length_um),
            });
        }
        if self.beat_length_um <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "beat_length_um",
                message: format!("{} must be > 0", self.beat_length_um),
            });
        }
        if self.detuning_slope_per_nm < 0.0 {
            return Err(Error::InvalidParameter {
                name: "detuning_slope_per_nm",
                message: format!("{} must be >= 0", self.detuning_slope_per_nm),
            });
        }
        Ok(())
    }

    /// Coupled-mode coupling coefficient kappa = pi / beat_length, in 1/um.
    pub fn coupling_strength_per_um(&self) -> f64 {
        PI / self.beat_length_um
    }

    /// Phase mismatch delta at the current width, in 1/um.
    pub fn detuning_per_um(&self) -> f64 {
        self.detuning_slope_per_nm * (self.width_nm - self.matched_width_nm)
    }

    /// Length of full peak transfer pi / (2 sqrt(kappa^2 + delta^2)), in um.
    /// Equals half the beat length at the matched width.
    pub fn effective_transfer_length_um(&self) -> f64 {
        let kappa = self.coupling_strength_per_um();
        let delta = self.detuning_per_um();
        PI / (2.0 * (kappa * kappa + delta * delta).sqrt())
    }
}

/// Power coupling ratio alpha in [0, 1] of a coupler.
///
/// alpha(L) = F * sin^2(g L) with g = sqrt(kappa^2 + delta^2) and
/// F = kappa^2 / g^2. At the matched width this is exactly the ideal
/// (1 - cos(2 pi L / beat_length)) / 2 oscillation.
pub fn coupling_ratio(spec: &CouplerSpec) -> Result<f64> {
    spec.validate()?;
    let kappa = spec.coupling_strength_per_um();
    let delta = spec.detuning_per_um();
    let g2 = kappa * kappa + delta * delta;
    let peak = kappa * kappa / g2;
    let s = (g2.sqrt() * spec.length_um).sin();
    Ok((peak * s * s).clamp(0.0, 1.0))
}

/// The 2x2 coupler matrix [[sqrt(1-a), j sqrt(a)], [j sqrt(a), sqrt(1-a)]]
/// on the two coupled channels. Always unitary.
pub fn coupler_matrix(alpha: f64) -> Result<TransferMatrix> {
    embedded_coupler_matrix(alpha, 2, 0, 1)
}

/// Coupler matrix embedded in a `dim`-channel bus at channels `a` and `b`,
/// identity on every other channel.
pub fn embedded_coupler_matrix(
    alpha: f64,
    dim: usize,
    a: usize,
    b: usize,
) -> Result<TransferMatrix> {
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if a >= dim || b >= dim || a == b {
        return Err(Error::InvalidParameter {
            name: "coupled channels",
            message: format!("indices ({a}, {b}) invalid for dimension {dim}"),
        });
    }
    let bar = Complex64::new((1.0 - alpha).sqrt(), 0.0);
    let cross = Complex64::new(0.0, alpha.sqrt());
    let mut entries = Array2::eye(dim);
    entries[[a, a]] = bar;
    entries[[b, b]] = bar;
    entries[[a, b]] = cross;
    entries[[b, a]] = cross;
    TransferMatrix::lossless(entries, format!("coupler(alpha={alpha})"))
}

/// Effective-index-vs-width samples for each guided mode, interpolated
/// piecewise linearly. Widths strictly increase; so does each mode's index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMatchModel {
    widths_nm: Vec<f64>,
    // indices[mode][sample]
    indices: Vec<Vec<f64>>,
}

impl IndexMatchModel {
    /// Build from rows of (width, [neff per mode]) samples.
    pub fn new(widths_nm: Vec<f64>, indices_per_mode: Vec<Vec<f64>>) -> Result<Self> {
        if widths_nm.len() < 2 {
            return Err(Error::InvalidTable("need at least two width samples".into()));
        }
        if !widths_nm.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidTable("widths must be strictly increasing".into()));
        }
        if indices_per_mode.is_empty() {
            return Err(Error::InvalidTable("need at least one mode column".into()));
        }
        for (mode, col) in indices_per_mode.iter().enumerate() {
            if col.len() != widths_nm.len() {
                return Err(Error::InvalidTable(format!(
                    "mode {mode} has {} samples, expected {}",
                    col.len(),
                    widths_nm.len()
                )));
            }
            if !col.windows(2).all(|v| v[1] > v[0]) {
                return Err(Error::InvalidTable(format!(
                    "mode {mode} effective index must strictly increase with width"
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("mode {mode} effective index")));
            }
        }
        Ok(Self {
            widths_nm,
            indices: indices_per_mode,
        })
    }

    /// Parse the columnar text format: one row per width sample,
    /// `width_nm neff_mode0 neff_mode1 ...`, with '#' comment lines.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut widths = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        Error::Parse(format!("line {}: bad number `{tok}`", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            if vals.len() < 2 {
                return Err(Error::Parse(format!(
                    "line {}: need width plus at least one index column",
                    lineno + 1
                )));
            }
            if let Some(first) = rows.first() {
                if vals.len() - 1 != first.len() {
                    return Err(Error::Parse(format!(
                        "line {}: inconsistent column count",
                        lineno + 1
                    )));
                }
            }
            widths.push(vals[0]);
            rows.push(vals[1..].to_vec());
        }
        let n_modes = rows.first().map(|r| r.len()).unwrap_or(0);
        let indices = (0..n_modes)
            .map(|m| rows.iter().map(|r| r[m]).collect())
            .collect();
        Self::new(widths, indices)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut text = String::new();
        for line in std::io::BufReader::new(file).lines() {
            text.push_str(&line?);
            text.push('\n');
        }
        Self::from_text(&text)
    }

    pub fn modes(&self) -> usize {
        self.indices.len()
    }

    pub fn width_range_nm(&self) -> (f64, f64) {
        (self.widths_nm[0], *self.widths_nm.last().unwrap())
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes() {
            return Err(Error::InvalidParameter {
                name: "mode",
                message: format!("{mode} >= mode count {}", self.modes()),
            });
        }
        Ok(())
    }
}

/// Piecewise-linear effective index of `mode` at `width_nm`. Queries outside
/// the table range are rejected rather than extrapolated.
pub fn effective_index(model: &IndexMatchModel, mode: usize, width_nm: f64) -> Result<f64> {
    model.check_mode(mode)?;
    let (min, max) = model.width_range_nm();
    if !(min..=max).contains(&width_nm) {
        return Err(Error::WidthOutOfRange {
            width_nm,
            min_nm: min,
            max_nm: max,
        });
    }
    let w = &model.widths_nm;
    let seg = match w.binary_search_by(|probe| probe.partial_cmp(&width_nm).unwrap()) {
        Ok(i) => return Ok(model.indices[mode][i]),
        Err(i) => i - 1, // width_nm > w[0] here, so i >= 1
    };
    let t = (width_nm - w[seg]) / (w[seg + 1] - w[seg]);
    let col = &model.indices[mode];
    Ok(col[seg] + t * (col[seg + 1] - col[seg]))
}

/// Width at which `mode`'s effective index equals `reference_index`, solved
/// exactly on the linear segment that brackets it. Unique because the index
/// is strictly increasing in width.
pub fn matched_width(model: &IndexMatchModel, mode: usize, reference_index: f64) -> Result<f64> {
    model.check_mode(mode)?;
    let col = &model.indices[mode];
    let first = col[0];
    let last = *col.last().unwrap();
    if reference_index < first || reference_index > last {
        return Err(Error::NoIndexMatch {
            mode,
            reference: reference_index,
        });
    }
    let seg = col
        .windows(2)
        .position(|v| v[0] <= reference_index && reference_index <= v[1])
        .expect("reference bracketed above");
    let t = (reference_index - col[seg]) / (col[seg + 1] - col[seg]);
    let w = &model.widths_nm;
    Ok(w[seg] + t * (w[seg + 1] - w[seg]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matched_spec(length_um: f64) -> CouplerSpec {
        CouplerSpec {
            width_nm: 930.0,
            length_um,
            target_mode: 2,
            matched_width_nm: 930.0,
            beat_length_um: 60.0,
            detuning_slope_per_nm: 0.01,
        }
    }

    #[test]
    fn matched_half_beat_gives_full_transfer() {
        let a = coupling_ratio(&matched_spec(30.0)).unwrap();
        assert!((a - 1.0).abs() < 1e-9, "alpha = {a}");
    }

    #[test]
    fn matched_quarter_beat_gives_half_transfer() {
        let a = coupling_ratio(&matched_spec(15.0)).unwrap();
        assert!((a - 0.5).abs() < 1e-9, "alpha = {a}");
    }

    #[test]
    fn matched_full_beat_gives_zero_transfer() {
        let a = coupling_ratio(&matched_spec(60.0)).unwrap();
        assert!(a.abs() < 1e-9, "alpha = {a}");
    }

    #[test]
    fn detuned_by_kappa_peaks_at_half() {
        // delta = kappa halves the peak transfer; the peak sits at the
        // effective transfer length.
        let mut spec = matched_spec(0.0);
        let kappa = spec.coupling_strength_per_um();
        spec.width_nm = spec.matched_width_nm + kappa / spec.detuning_slope_per_nm;
        spec.length_um = spec.effective_transfer_length_um();
        let a = coupling_ratio(&spec).unwrap();
        assert!((a - 0.5).abs() < 1e-9, "alpha = {a}");
    }

    #[test]
    fn alpha_is_periodic_with_twice_effective_length_and_zero_at_origin() {
        let mut spec = matched_spec(13.7);
        spec.width_nm = 944.0;
        let period = 2.0 * spec.effective_transfer_length_um();
        let a0 = coupling_ratio(&spec).unwrap();
        spec.length_um += period;
        let a1 = coupling_ratio(&spec).unwrap();
        assert!((a0 - a1).abs() < 1e-9);

        let mut tiny = matched_spec(1e-12);
        tiny.width_nm = 944.0;
        assert!(coupling_ratio(&tiny).unwrap() < 1e-20);
    }

    #[test]
    fn alpha_peaks_at_matched_width() {
        // Scan +-50 nm around the matched width at the half-beat design length.
        let best = coupling_ratio(&matched_spec(30.0)).unwrap();
        for step in -50..=50 {
            let mut spec = matched_spec(30.0);
            spec.width_nm = spec.matched_width_nm + step as f64;
            let a = coupling_ratio(&spec).unwrap();
            assert!(a <= best + 1e-12, "alpha({}) = {a} exceeds matched {best}", spec.width_nm);
        }
    }

    #[test]
    fn detuning_penalty_is_symmetric() {
        for delta_nm in [3.0, 11.0, 27.5] {
            let mut plus = matched_spec(21.0);
            plus.width_nm += delta_nm;
            let mut minus = matched_spec(21.0);
            minus.width_nm -= delta_nm;
            let ap = coupling_ratio(&plus).unwrap();
            let am = coupling_ratio(&minus).unwrap();
            assert!((ap - am).abs() < 1e-12);
        }
    }

    #[test]
    fn coupler_matrix_examples() {
        let id = coupler_matrix(0.0).unwrap();
        assert!((id.entries()[[0, 0]] - 1.0).norm() < 1e-15);
        assert!(id.entries()[[0, 1]].norm() < 1e-15);

        let cross = coupler_matrix(1.0).unwrap();
        assert!(cross.entries()[[0, 0]].norm() < 1e-15);
        assert!((cross.entries()[[0, 1]] - Complex64::new(0.0, 1.0)).norm() < 1e-15);

        let half = coupler_matrix(0.5).unwrap();
        for e in half.entries().iter() {
            assert!((e.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }

        assert!(matches!(coupler_matrix(1.2), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(coupler_matrix(-0.1), Err(Error::AlphaOutOfRange(_))));
    }

    #[test]
    fn coupler_matrix_structure_and_unitarity() {
        for i in 0..=20 {
            let alpha = i as f64 / 20.0;
            let m = coupler_matrix(alpha).unwrap();
            assert!(m.is_unitary(1e-12));
            let e = m.entries();
            assert!((e[[0, 0]] - e[[1, 1]]).norm() < 1e-15);
            assert!((e[[0, 1]] - e[[1, 0]]).norm() < 1e-15);
            assert!((e[[0, 0]].re - (1.0 - alpha).sqrt()).abs() < 1e-15);
            assert!((e[[0, 1]].im - alpha.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn embedded_coupler_is_identity_elsewhere() {
        let m = embedded_coupler_matrix(0.3, 4, 1, 3).unwrap();
        assert!(m.is_unitary(1e-12));
        assert!((m.entries()[[0, 0]] - 1.0).norm() < 1e-15);
        assert!((m.entries()[[2, 2]] - 1.0).norm() < 1e-15);
        assert!((m.entries()[[1, 3]] - Complex64::new(0.0, 0.3f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn coupling_ratio_rejects_bad_specs() {
        let mut spec = matched_spec(30.0);
        spec.beat_length_um = f64::NAN;
        assert!(coupling_ratio(&spec).is_err());
        let mut spec = matched_spec(30.0);
        spec.length_um = -1.0;
        assert!(coupling_ratio(&spec).is_err());
    }

    fn sample_table() -> IndexMatchModel {
        IndexMatchModel::new(
            vec![600.0, 700.0, 800.0, 900.0, 1000.0],
            vec![
                vec![2.50, 2.58, 2.64, 2.69, 2.73],
                vec![2.10, 2.26, 2.38, 2.47, 2.54],
            ],
        )
        .unwrap()
    }

    #[test]
    fn effective_index_at_sample_and_midpoint() {
        let model = sample_table();
        assert_eq!(effective_index(&model, 0, 800.0).unwrap(), 2.64);
        let mid = effective_index(&model, 1, 750.0).unwrap();
        assert!((mid - (2.26 + 2.38) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn effective_index_rejects_out_of_range() {
        let model = sample_table();
        assert!(matches!(
            effective_index(&model, 0, 599.9),
            Err(Error::WidthOutOfRange { .. })
        ));
        assert!(matches!(
            effective_index(&model, 0, 1000.1),
            Err(Error::WidthOutOfRange { .. })
        ));
    }

    #[test]
    fn matched_width_agrees_with_bisection_oracle() {
        let model = sample_table();
        let reference = 2.43; // single-mode waveguide index
        let solved = matched_width(&model, 1, reference).unwrap();

        // independent bisection on the interpolant, to 1e-6 nm
        let (mut lo, mut hi) = model.width_range_nm();
        while hi - lo > 1e-6 {
            let mid = 0.5 * (lo + hi);
            if effective_index(&model, 1, mid).unwrap() < reference {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!(
            (solved - oracle).abs() < 1e-6,
            "solved {solved} vs bisection {oracle}"
        );
        assert!((effective_index(&model, 1, solved).unwrap() - reference).abs() < 1e-12);
    }

    #[test]
    fn table_parser_reads_columnar_text() {
        let text = "\
# width_nm neff_mode0 neff_mode1
600 2.50 2.10
700 2.58 2.26

800 2.64 2.38
";
        let model = IndexMatchModel::from_text(text).unwrap();
        assert_eq!(model.modes(), 2);
        assert_eq!(effective_index(&model, 0, 700.0).unwrap(), 2.58);
    }

    #[test]
    fn table_validation_catches_non_monotone() {
        assert!(IndexMatchModel::new(
            vec![600.0, 600.0],
            vec![vec![2.5, 2.6]]
        )
        .is_err());
        assert!(IndexMatchModel::new(
            vec![600.0, 700.0],
            vec![vec![2.6, 2.5]]
        )
        .is_err());
        assert!(IndexMatchModel::from_text("600 2.5\n700 2.6 2.7\n").is_err());
    }
}
