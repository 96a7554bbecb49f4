//! Asymmetric Mach-Zehnder test structure: two identical mode-selective
//! couplers around a path-length imbalance. The bar-port spectrum is a
//! raised cosine whose extinction ratio encodes the coupling ratio alpha;
//! this module generates the spectrum and runs the inverse pipeline
//! (fringe fit -> extinction ratio -> alpha, with the alpha vs 1-alpha
//! branch disambiguated from the design geometry).

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::core::TransferMatrix;
use crate::coupler::{coupler_matrix, coupling_ratio, CouplerSpec};
use crate::error::{Error, Result};

/// Transmission below this is reported as the floor (fit of an ideal
/// 50/50 device can reach an exact zero, where the dB ratio diverges).
pub const MIN_TRANSMISSION_FLOOR: f64 = 1e-12;

/// Extinction ratios are capped here and flagged; together with the
/// transmission floor this keeps the alpha recovered from a capped
/// measurement within 5e-7 of 1/2.
pub const ER_CEILING_DB: f64 = 120.0;

/// Evenly spaced wavelength sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavelengthWindow {
    pub start_nm: f64,
    pub stop_nm: f64,
    pub points: usize,
}

impl WavelengthWindow {
    pub fn validate(&self) -> Result<()> {
        if !self.start_nm.is_finite() || !self.stop_nm.is_finite() {
            return Err(Error::NonFinite("wavelength window".into()));
        }
        if self.start_nm <= 0.0 || self.start_nm >= self.stop_nm {
            return Err(Error::InvalidParameter {
                name: "wavelength_window",
                message: format!(
                    "need 0 < start < stop, got [{}, {}]",
                    self.start_nm, self.stop_nm
                ),
            });
        }
        if self.points < 16 {
            return Err(Error::InvalidParameter {
                name: "wavelength_window",
                message: format!("need at least 16 points, got {}", self.points),
            });
        }
        Ok(())
    }

    /// The sampling wavelengths, endpoints included.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        let step = (self.stop_nm - self.start_nm) / (n - 1) as f64;
        (0..n).map(|i| self.start_nm + i as f64 * step).collect()
    }
}

/// One asymmetric MZI: identical couplers, arm imbalance, group index.
#[derive(Debug, Clone, PartialEq)]
pub struct MziSpec {
    pub coupler: CouplerSpec,
    /// Arm path-length difference, > 0.
    pub delta_length_um: f64,
    /// Group index used in the arm phase 2 pi n_g dL / lambda.
    pub group_index: f64,
    pub window: WavelengthWindow,
}

impl MziSpec {
    pub fn validate(&self) -> Result<()> {
        self.coupler.validate()?;
        self.window.validate()?;
        if !(self.delta_length_um.is_finite() && self.delta_length_um > 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta_length_um",
                message: format!("{} must be finite and > 0", self.delta_length_um),
            });
        }
        if !(self.group_index.is_finite() && self.group_index > 0.0) {
            return Err(Error::InvalidParameter {
                name: "group_index",
                message: format!("{} must be finite and > 0", self.group_index),
            });
        }
        Ok(())
    }

    /// Arm phase difference at a wavelength.
    pub fn arm_phase(&self, wavelength_nm: f64) -> f64 {
        let delta_length_nm = self.delta_length_um * 1e3;
        2.0 * std::f64::consts::PI * self.group_index * delta_length_nm / wavelength_nm
    }
}

/// A sampled transmission spectrum, wavelengths strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    points: Vec<(f64, f64)>,
    /// How far transmissions may exceed [0, 1] (0 for ideal data,
    /// widened for additive-noise sweeps).
    noise_band: f64,
}

impl Spectrum {
    /// An ideal spectrum: transmissions must lie in [0, 1] within 1e-12.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        Self::with_noise_band(points, 0.0)
    }

    /// A measured spectrum whose transmissions may leave [0, 1] by up to
    /// `noise_band` (unclamped additive noise keeps the fringe fit
    /// unbiased near zero-transmission minima).
    pub fn with_noise_band(points: Vec<(f64, f64)>, noise_band: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "spectrum",
                message: format!("need at least 2 points, got {}", points.len()),
            });
        }
        if !noise_band.is_finite() || noise_band < 0.0 {
            return Err(Error::InvalidParameter {
                name: "noise_band",
                message: format!("{noise_band} must be finite and >= 0"),
            });
        }
        let slack = noise_band + 1e-12;
        for &(wl, t) in &points {
            if !wl.is_finite() || !t.is_finite() {
                return Err(Error::NonFinite("spectrum point".into()));
            }
            if t < -slack || t > 1.0 + slack {
                return Err(Error::InvalidParameter {
                    name: "spectrum",
                    message: format!("transmission {t} at {wl} nm outside [0, 1] + {slack:.1e}"),
                });
            }
        }
        if !points.windows(2).all(|p| p[1].0 > p[0].0) {
            return Err(Error::InvalidParameter {
                name: "spectrum",
                message: "wavelengths must be strictly increasing".into(),
            });
        }
        Ok(Self { points, noise_band })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn noise_band(&self) -> f64 {
        self.noise_band
    }
}

/// Bar-port power transmission alpha^2 + (1-alpha)^2 - 2 alpha (1-alpha) cos(phase).
pub fn mzi_transmission(alpha: f64, phase: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if !phase.is_finite() {
        return Err(Error::NonFinite("phase".into()));
    }
    let bar = 1.0 - alpha;
    Ok(alpha * alpha + bar * bar - 2.0 * alpha * bar * phase.cos())
}

/// diag(exp(j phase), 1): the arm-imbalance phase on the first channel.
pub fn phase_matrix(phase: f64) -> TransferMatrix {
    TransferMatrix::diagonal_phases(&[phase, 0.0], format!("arm phase {phase:.6}"))
}

/// Full 2x2 MZI matrix: coupler, arm phase, coupler composed in that order.
pub fn mzi_transfer_matrix(alpha: f64, phase: f64) -> Result<TransferMatrix> {
    let c = coupler_matrix(alpha)?;
    c.compose(&phase_matrix(phase))?.compose(&c)
}

/// Spectrum of an MZI with a directly imposed coupling ratio (test
/// injection point; `sweep` derives alpha from the coupler geometry).
pub fn synthetic_spectrum(
    alpha: f64,
    delta_length_um: f64,
    group_index: f64,
    window: &WavelengthWindow,
) -> Result<Spectrum> {
    window.validate()?;
    let delta_length_nm = delta_length_um * 1e3;
    let points = window
        .grid()
        .into_iter()
        .map(|wl| {
            let phase = 2.0 * std::f64::consts::PI * group_index * delta_length_nm / wl;
            mzi_transmission(alpha, phase).map(|t| (wl, t.clamp(0.0, 1.0)))
        })
        .collect::<Result<_>>()?;
    Spectrum::new(points)
}

/// Noiseless spectral sweep of the MZI described by `spec`.
pub fn sweep(spec: &MziSpec) -> Result<Spectrum> {
    spec.validate()?;
    let alpha = coupling_ratio(&spec.coupler)?;
    synthetic_spectrum(alpha, spec.delta_length_um, spec.group_index, &spec.window)
}

/// Sweep with zero-mean Gaussian detector noise of standard deviation
/// `sigma` added to each transmission sample (left unclamped).
pub fn sweep_noisy(spec: &MziSpec, sigma: f64, rng: &mut impl Rng) -> Result<Spectrum> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            message: format!("{sigma} must be finite and >= 0"),
        });
    }
    let clean = sweep(spec)?;
    let normal = Normal::new(0.0, sigma).expect("sigma validated above");
    let points = clean
        .points()
        .iter()
        .map(|&(wl, t)| (wl, t + normal.sample(rng)))
        .collect();
    // 8 sigma of slack: a one-in-1e15 outlier is a data bug, not noise.
    Spectrum::with_noise_band(points, 8.0 * sigma)
}

/// Result of the least-squares fringe fit
/// T(lambda) ~ offset + amplitude * cos(angular_frequency / lambda + phase).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    /// DC offset of the fitted cosine.
    pub offset: f64,
    /// Cosine amplitude (for an ideal device this is 2 alpha (1 - alpha)).
    pub amplitude: f64,
    /// Fringe frequency in the 1/wavelength domain, rad * nm.
    pub angular_frequency: f64,
    /// Cosine phase at 1/lambda = 0.
    pub phase: f64,
    /// Fitted maximum transmission (offset + amplitude).
    pub max_transmission: f64,
    /// Fitted minimum, floored at `MIN_TRANSMISSION_FLOOR`.
    pub min_transmission: f64,
    /// Extinction ratio 10 log10(max/min), capped at `ER_CEILING_DB`.
    pub er_db: f64,
    /// Number of full fringe periods the spectrum spans.
    pub fringes: f64,
    /// Root-mean-square fit residual.
    pub rms_residual: f64,
    /// Fitted minimum fell below the floor and was clamped.
    pub min_clamped: bool,
    /// Extinction ratio hit the ceiling and was capped.
    pub er_capped: bool,
}

/// Least-squares solve of y ~ c0 + a cos(w x) + b sin(w x) at fixed w,
/// returning (c0, a, b, sse).
fn cosine_ls(x: &[f64], y: &[f64], omega: f64) -> (f64, f64, f64, f64) {
    // 3x3 normal equations, accumulated in one pass.
    let mut s = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let (sn, cs) = (omega * xi).sin_cos();
        let basis = [1.0, cs, sn];
        for i in 0..3 {
            for j in i..3 {
                s[i][j] += basis[i] * basis[j];
            }
            r[i] += basis[i] * yi;
        }
    }
    for i in 0..3 {
        for j in 0..i {
            s[i][j] = s[j][i];
        }
    }
    // Gaussian elimination with partial pivoting on the 3x3 system.
    let mut m = [
        [s[0][0], s[0][1], s[0][2], r[0]],
        [s[1][0], s[1][1], s[1][2], r[1]],
        [s[2][0], s[2][1], s[2][2], r[2]],
    ];
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        if m[col][col] == 0.0 {
            // Degenerate basis (e.g. omega = 0); caller treats this as a
            // hopeless frequency via the huge SSE.
            return (0.0, 0.0, 0.0, f64::INFINITY);
        }
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut coef = [0.0f64; 3];
    for i in (0..3).rev() {
        let mut acc = m[i][3];
        for k in i + 1..3 {
            acc -= m[i][k] * coef[k];
        }
        coef[i] = acc / m[i][i];
    }
    let (c0, a, b) = (coef[0], coef[1], coef[2]);
    let mut sse = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let (sn, cs) = (omega * xi).sin_cos();
        let d = yi - (c0 + a * cs + b * sn);
        sse += d * d;
    }
    (c0, a, b, sse)
}

/// Count threshold crossings of y about its mid-level with hysteresis,
/// for a first guess at the fringe frequency.
fn hysteresis_crossings(y: &[f64], mid: f64, band: f64) -> usize {
    let mut state: Option<bool> = None; // Some(true) = last confirmed above
    let mut crossings = 0;
    for &v in y {
        let above = if v > mid + band {
            Some(true)
        } else if v < mid - band {
            Some(false)
        } else {
            None
        };
        if let Some(a) = above {
            if let Some(prev) = state {
                if prev != a {
                    crossings += 1;
                }
            }
            state = Some(a);
        }
    }
    crossings
}

/// Golden-section minimization of f over [lo, hi].
fn golden_min(mut lo: f64, mut hi: f64, iters: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618033988749895;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Fit the fringe model to a spectrum and derive the extinction ratio.
///
/// The fit runs in x = 1/wavelength, where an ideal MZI spectrum is an
/// exact cosine: a hysteresis crossing count seeds the frequency, a local
/// grid plus golden-section search refines it, and a linear least-squares
/// solve gives offset and amplitude at each trial frequency. Extrema come
/// from the fitted curve, not raw samples, so coarse grids that miss the
/// true extrema do not bias the ratio.
pub fn fit_fringes(spectrum: &Spectrum) -> Result<FringeFit> {
    let pts = spectrum.points();
    let n = pts.len();
    let x_raw: Vec<f64> = pts.iter().map(|p| 1.0 / p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    // 1/wavelength decreases along the grid; centering both improves
    // conditioning and leaves the cosine model unchanged.
    let x_mean = x_raw.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = x_raw.iter().map(|v| v - x_mean).collect();
    let span = (x.first().unwrap() - x.last().unwrap()).abs();

    let y_max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y_min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let ptp = y_max - y_min;

    // A flat spectrum carries no fringe information: unit max/min ratio.
    if ptp <= 1e-12 * y_max.abs().max(1.0) {
        let level = 0.5 * (y_max + y_min);
        return Ok(FringeFit {
            offset: level,
            amplitude: 0.0,
            angular_frequency: 0.0,
            phase: 0.0,
            max_transmission: level,
            min_transmission: level.max(MIN_TRANSMISSION_FLOOR),
            er_db: 0.0,
            fringes: 0.0,
            rms_residual: 0.0,
            min_clamped: level < MIN_TRANSMISSION_FLOOR,
            er_capped: false,
        });
    }

    let mid = 0.5 * (y_max + y_min);
    let crossings = hysteresis_crossings(&y, mid, 0.25 * ptp);
    if crossings < 2 {
        return Err(Error::InsufficientFringes {
            fringes: crossings as f64 / 2.0,
        });
    }

    // crossings/2 full periods over the span, so omega ~ pi * crossings / span;
    // the count can be off by one at each edge, so search a generous bracket.
    let omega0 = std::f64::consts::PI * crossings as f64 / span;
    let rel = 1.5 / crossings as f64;
    let lo = omega0 * (1.0 - rel).max(0.3);
    let hi = omega0 * (1.0 + rel);
    let grid_n = 61;
    let mut best = (f64::INFINITY, lo);
    for i in 0..grid_n {
        let w = lo + (hi - lo) * i as f64 / (grid_n - 1) as f64;
        let (_, _, _, sse) = cosine_ls(&x, &y, w);
        if sse < best.0 {
            best = (sse, w);
        }
    }
    let step = (hi - lo) / (grid_n - 1) as f64;
    let omega = golden_min(best.1 - step, best.1 + step, 80, |w| {
        cosine_ls(&x, &y, w).3
    });

    let (c0, a, b, sse) = cosine_ls(&x, &y, omega);
    let amplitude = a.hypot(b);
    let fringes = omega * span / (2.0 * std::f64::consts::PI);
    if fringes < 0.999 {
        return Err(Error::InsufficientFringes { fringes });
    }

    let max_t = c0 + amplitude;
    let raw_min = c0 - amplitude;
    let min_clamped = raw_min < MIN_TRANSMISSION_FLOOR;
    let min_t = raw_min.max(MIN_TRANSMISSION_FLOOR);
    // A floored minimum makes the ratio a measurement-floor artifact, so
    // it saturates straight to the ceiling.
    let er_raw = 10.0 * (max_t / min_t).log10();
    let er_capped = min_clamped || er_raw > ER_CEILING_DB;
    let er_db = if er_capped {
        ER_CEILING_DB
    } else {
        er_raw.max(0.0)
    };

    // Shift the phase back to the uncentered 1/wavelength axis.
    let phase_centered = (-b).atan2(a);
    let phase = (phase_centered - omega * x_mean).rem_euclid(2.0 * std::f64::consts::PI);

    Ok(FringeFit {
        offset: c0,
        amplitude,
        angular_frequency: omega,
        phase,
        max_transmission: max_t,
        min_transmission: min_t,
        er_db,
        fringes,
        rms_residual: (sse / n as f64).sqrt(),
        min_clamped,
        er_capped,
    })
}

/// Extinction ratio in dB from the fitted fringe extrema.
pub fn extinction_ratio(spectrum: &Spectrum) -> Result<f64> {
    fit_fringes(spectrum).map(|fit| fit.er_db)
}

/// The extinction ratio an ideal device with coupling ratio `alpha`
/// produces: -20 log10 |1 - 2 alpha| (infinite at alpha = 1/2).
pub fn ideal_extinction_ratio_db(alpha: f64) -> f64 {
    -20.0 * (1.0 - 2.0 * alpha).abs().log10()
}

/// Invert an extinction ratio to the two coupling-ratio candidates
/// (alpha_low, alpha_high); they always sum to exactly 1.
pub fn recover_alpha(er_db: f64) -> Result<(f64, f64)> {
    if er_db.is_nan() || er_db < 0.0 {
        return Err(Error::NegativeExtinctionRatio(er_db));
    }
    // er_db = +inf is the ideal 50/50 device: both candidates collapse.
    let r = 10f64.powf(-er_db / 20.0);
    let low = (1.0 - r) / 2.0;
    Ok((low, 1.0 - low))
}

/// Pick the candidate closer to the coupling ratio the design geometry
/// predicts; ties go to the larger candidate with a warning.
pub fn disambiguate(candidates: (f64, f64), spec: &CouplerSpec) -> Result<f64> {
    let predicted = coupling_ratio(spec)?;
    let (lo, hi) = candidates;
    let (d_lo, d_hi) = ((predicted - lo).abs(), (predicted - hi).abs());
    if d_lo < d_hi {
        Ok(lo)
    } else {
        if d_lo == d_hi && lo != hi {
            log::warn!(
                "coupling-ratio candidates ({lo}, {hi}) equidistant from predicted {predicted}; \
                 choosing the larger"
            );
        }
        Ok(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn test_window() -> WavelengthWindow {
        WavelengthWindow {
            start_nm: 1540.0,
            stop_nm: 1560.0,
            points: 2001,
        }
    }

    /// Coupler whose geometry lands exactly on `alpha` (matched width,
    /// length solved from the beat oscillation).
    fn coupler_for_alpha(alpha: f64) -> CouplerSpec {
        let beat = 60.0;
        let length = alpha.sqrt().asin() / (std::f64::consts::PI / beat);
        CouplerSpec {
            width_nm: 930.0,
            length_um: length.max(1e-6),
            target_mode: 1,
            matched_width_nm: 930.0,
            beat_length_um: beat,
            detuning_slope_per_nm: 0.01,
        }
    }

    fn spec_for_alpha(alpha: f64) -> MziSpec {
        MziSpec {
            coupler: coupler_for_alpha(alpha),
            delta_length_um: 150.0,
            group_index: 2.35,
            window: test_window(),
        }
    }

    #[test]
    fn transmission_closed_form_examples() {
        assert!((mzi_transmission(0.0, 1.23).unwrap() - 1.0).abs() < 1e-15);
        assert!((mzi_transmission(0.5, std::f64::consts::PI).unwrap() - 1.0).abs() < 1e-15);
        assert!(mzi_transmission(0.5, 0.0).unwrap().abs() < 1e-15);
        assert!((mzi_transmission(0.25, 0.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(mzi_transmission(1.1, 0.0).is_err());
    }

    #[test]
    fn scalar_formula_matches_matrix_composition() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..200 {
            let alpha: f64 = rng.gen();
            let phase: f64 = rng.gen_range(-10.0..10.0);
            let scalar = mzi_transmission(alpha, phase).unwrap();
            let m = mzi_transfer_matrix(alpha, phase).unwrap();
            let matrix = m.entries()[[0, 0]].norm_sqr();
            assert!(
                (scalar - matrix).abs() < 1e-12,
                "alpha={alpha} phase={phase}: {scalar} vs {matrix}"
            );
        }
    }

    #[test]
    fn mzi_matrix_entry_is_bar_amplitude() {
        let (alpha, phase) = (0.3, 0.9);
        let m = mzi_transfer_matrix(alpha, phase).unwrap();
        let expected = (1.0 - alpha) * Complex64::new(0.0, phase).exp() - alpha;
        assert!((m.entries()[[0, 0]] - expected).norm() < 1e-14);
    }

    #[test]
    fn zero_coupling_gives_flat_unit_spectrum() {
        let s = synthetic_spectrum(0.0, 150.0, 2.35, &test_window()).unwrap();
        assert!(s.points().iter().all(|&(_, t)| (t - 1.0).abs() < 1e-15));
        assert_eq!(extinction_ratio(&s).unwrap(), 0.0);
    }

    #[test]
    fn half_coupling_spectrum_spans_full_range() {
        let s = synthetic_spectrum(0.5, 150.0, 2.35, &test_window()).unwrap();
        let fit = fit_fringes(&s).unwrap();
        assert!(fit.fringes >= 2.5, "fringes = {}", fit.fringes);
        // Fitted extrema hit the analytic ones; raw samples only get as
        // close as the grid allows.
        assert!((fit.max_transmission - 1.0).abs() < 1e-9);
        assert!(fit.min_transmission <= MIN_TRANSMISSION_FLOOR * 1.001);
        assert!(fit.min_clamped && fit.er_capped);
        assert_eq!(fit.er_db, ER_CEILING_DB);
        let raw_max = s.points().iter().map(|p| p.1).fold(f64::MIN, f64::max);
        assert!(raw_max > 1.0 - 1e-4 && raw_max <= 1.0);
    }

    #[test]
    fn fringe_spacing_matches_free_spectral_range() {
        let (dl_um, ng) = (150.0, 2.35);
        let s = synthetic_spectrum(0.5, dl_um, ng, &test_window()).unwrap();
        // Locate adjacent transmission minima with parabolic refinement.
        let pts = s.points();
        let mut minima = Vec::new();
        for i in 1..pts.len() - 1 {
            if pts[i].1 < pts[i - 1].1 && pts[i].1 < pts[i + 1].1 {
                // vertex of the parabola through the three samples
                let (x0, y0) = pts[i - 1];
                let (x1, y1) = pts[i];
                let (_, y2) = pts[i + 1];
                let h = x1 - x0;
                let refined = x1 + h * (y0 - y2) / (2.0 * (y0 - 2.0 * y1 + y2));
                minima.push(refined);
            }
        }
        assert!(minima.len() >= 2, "found {} minima", minima.len());
        for pair in minima.windows(2) {
            let spacing = pair[1] - pair[0];
            let analytic = pair[0] * pair[1] / (ng * dl_um * 1e3);
            assert!(
                (spacing - analytic).abs() < 1e-3 * analytic,
                "spacing {spacing} vs analytic {analytic}"
            );
        }
    }

    #[test]
    fn extinction_ratio_quarter_coupling() {
        let s = synthetic_spectrum(0.25, 150.0, 2.35, &test_window()).unwrap();
        let er = extinction_ratio(&s).unwrap();
        let ideal = ideal_extinction_ratio_db(0.25); // 10 log10(4) = 6.0206
        assert!((er - ideal).abs() < 1e-9, "er = {er}, ideal = {ideal}");
        assert!((er - 6.0206).abs() < 1e-4);
    }

    #[test]
    fn fitted_er_matches_closed_form_across_alpha() {
        for i in 1..=9 {
            let alpha = 0.05 * i as f64; // 0.05 ..= 0.45
            let s = synthetic_spectrum(alpha, 150.0, 2.35, &test_window()).unwrap();
            let er = extinction_ratio(&s).unwrap();
            let ideal = ideal_extinction_ratio_db(alpha);
            assert!(
                (er - ideal).abs() < 0.01,
                "alpha={alpha}: fitted {er} vs ideal {ideal}"
            );
        }
    }

    #[test]
    fn recover_alpha_examples() {
        let (lo, hi) = recover_alpha(0.0).unwrap();
        assert_eq!((lo, hi), (0.0, 1.0));

        let (lo, hi) = recover_alpha(f64::INFINITY).unwrap();
        assert_eq!((lo, hi), (0.5, 0.5));

        let (lo, hi) = recover_alpha(ideal_extinction_ratio_db(0.25)).unwrap();
        assert!((lo - 0.25).abs() < 1e-12 && (hi - 0.75).abs() < 1e-12);

        assert!(recover_alpha(-0.1).is_err());
    }

    #[test]
    fn recovered_candidates_sum_to_one_exactly() {
        for er in [0.0, 0.3, 3.0, 6.0206, 17.5, 60.0, 120.0] {
            let (lo, hi) = recover_alpha(er).unwrap();
            assert_eq!(lo + hi, 1.0, "er = {er}");
        }
    }

    #[test]
    fn disambiguate_picks_nearest_candidate() {
        let spec = coupler_for_alpha(0.85);
        assert_eq!(disambiguate((0.1, 0.9), &spec).unwrap(), 0.9);
        let spec = coupler_for_alpha(0.15);
        assert_eq!(disambiguate((0.1, 0.9), &spec).unwrap(), 0.1);
        let spec = coupler_for_alpha(0.5);
        assert_eq!(disambiguate((0.5, 0.5), &spec).unwrap(), 0.5);
    }

    #[test]
    fn noiseless_round_trip_recovers_alpha() {
        for alpha in [0.15, 0.5, 0.7] {
            let spec = spec_for_alpha(alpha);
            let s = sweep(&spec).unwrap();
            let er = extinction_ratio(&s).unwrap();
            let recovered = disambiguate(recover_alpha(er).unwrap(), &spec.coupler).unwrap();
            assert!(
                (recovered - alpha).abs() < 1e-6,
                "alpha {alpha} recovered as {recovered}"
            );
        }
    }

    #[test]
    fn noisy_sweep_is_deterministic_and_in_band() {
        let spec = spec_for_alpha(0.3);
        let mut rng_a = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        let mut rng_b = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        let a = sweep_noisy(&spec, 1e-3, &mut rng_a).unwrap();
        let b = sweep_noisy(&spec, 1e-3, &mut rng_b).unwrap();
        assert_eq!(a, b);
        assert!(a.points().iter().zip(sweep(&spec).unwrap().points()).all(
            |(&(_, noisy), &(_, clean))| (noisy - clean).abs() <= 8.0 * 1e-3
        ));
    }

    #[test]
    fn too_narrow_window_is_rejected() {
        // ~0.4 fringe across the window: unfittable.
        let window = WavelengthWindow {
            start_nm: 1549.0,
            stop_nm: 1551.0,
            points: 256,
        };
        let s = synthetic_spectrum(0.3, 50.0, 2.35, &window).unwrap();
        match extinction_ratio(&s) {
            Err(Error::InsufficientFringes { .. }) => {}
            other => panic!("expected insufficient-fringes error, got {other:?}"),
        }
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![(1550.0, 0.5)]).is_err());
        assert!(Spectrum::new(vec![(1550.0, 0.5), (1549.0, 0.5)]).is_err());
        assert!(Spectrum::new(vec![(1550.0, 1.5), (1551.0, 0.5)]).is_err());
        assert!(Spectrum::with_noise_band(vec![(1550.0, 1.002), (1551.0, 0.5)], 8e-3).is_ok());
        assert!(Spectrum::new(vec![(1550.0, f64::NAN), (1551.0, 0.5)]).is_err());
    }

    proptest! {
        #[test]
        fn transmission_stays_in_unit_interval(alpha in 0.0f64..=1.0, phase in -50.0f64..50.0) {
            let t = mzi_transmission(alpha, phase).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&t));
        }

        #[test]
        fn round_trip_on_random_alpha(alpha in 0.02f64..=0.98) {
            let spec = spec_for_alpha(alpha);
            let s = sweep(&spec).unwrap();
            let er = extinction_ratio(&s).unwrap();
            let recovered = disambiguate(recover_alpha(er).unwrap(), &spec.coupler).unwrap();
            prop_assert!((recovered - alpha).abs() < 1e-6);
        }
    }
}
