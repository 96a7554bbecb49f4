//! Microring resonator as a heater-tuned Lorentzian power splitter: drop
//! fraction theta peaks where the (heater-shifted) resonance meets the
//! carrier wavelength, and the remaining 1 - theta continues on the
//! through path. Used both as the weight element of a bank and as the
//! nonlinear axon of a neuron.

use crate::error::{Error, Result};

/// Static parameters of one ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingSpec {
    /// Resonance wavelength at zero heater drive.
    pub resonance_nm: f64,
    /// Lorentzian full width at half maximum.
    pub fwhm_nm: f64,
    /// Resonance shift per unit heater drive (thermal red-shift).
    pub heater_shift_nm_per_unit: f64,
    /// Peak drop-port power fraction, in (0, 1].
    pub max_drop: f64,
}

impl RingSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("resonance_nm", self.resonance_nm),
            ("fwhm_nm", self.fwhm_nm),
            ("heater_shift_nm_per_unit", self.heater_shift_nm_per_unit),
            ("max_drop", self.max_drop),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("ring {name}")));
            }
        }
        if self.fwhm_nm <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "fwhm_nm",
                message: format!("{} must be > 0", self.fwhm_nm),
            });
        }
        if !(self.max_drop > 0.0 && self.max_drop <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "max_drop",
                message: format!("{} must be in (0, 1]", self.max_drop),
            });
        }
        Ok(())
    }

    /// Resonance wavelength at a given heater drive.
    pub fn shifted_resonance_nm(&self, heater: HeaterState) -> f64 {
        self.resonance_nm + self.heater_shift_nm_per_unit * heater.drive()
    }
}

/// Normalized heater setting, clamped into [0, 1] on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeaterState {
    drive: f64,
}

impl HeaterState {
    pub const OFF: HeaterState = HeaterState { drive: 0.0 };

    /// Clamps into [0, 1]; non-finite drives are rejected.
    pub fn new(drive: f64) -> Result<Self> {
        if !drive.is_finite() {
            return Err(Error::NonFinite("heater drive".into()));
        }
        Ok(Self {
            drive: drive.clamp(0.0, 1.0),
        })
    }

    pub fn drive(&self) -> f64 {
        self.drive
    }
}

/// Drop-port power fraction theta at `wavelength_nm`:
/// max_drop / (1 + (2 (lambda - lambda_res(h)) / fwhm)^2).
/// The through port carries exactly 1 - theta.
pub fn drop_fraction(ring: &RingSpec, heater: HeaterState, wavelength_nm: f64) -> f64 {
    let detune = 2.0 * (wavelength_nm - ring.shifted_resonance_nm(heater)) / ring.fwhm_nm;
    ring.max_drop / (1.0 + detune * detune)
}

/// The drop fractions reachable at `wavelength_nm` over drive in [0, 1],
/// as (min, max). The Lorentzian is unimodal in drive, so both extremes
/// sit at an endpoint unless the resonance can be parked on the carrier.
pub fn reachable_drop_range(ring: &RingSpec, wavelength_nm: f64) -> (f64, f64) {
    let at_zero = drop_fraction(ring, HeaterState::OFF, wavelength_nm);
    let at_full = drop_fraction(
        ring,
        HeaterState { drive: 1.0 },
        wavelength_nm,
    );
    let lo = at_zero.min(at_full);
    // On-resonance drive is in range iff the shift needed lies in [0, 1].
    let needed = (wavelength_nm - ring.resonance_nm) / ring.heater_shift_nm_per_unit;
    let hi = if ring.heater_shift_nm_per_unit != 0.0 && (0.0..=1.0).contains(&needed) {
        ring.max_drop
    } else {
        at_zero.max(at_full)
    };
    (lo, hi)
}

/// Invert the Lorentzian: the heater drive at which `drop_fraction`
/// equals `target_theta` at `wavelength_nm`, exact to the closed form.
/// Of the two detuning roots the smaller drive is returned. Targets
/// outside the reachable range (beyond a 1e-9 boundary allowance) are
/// rejected with the range in the error.
pub fn solve_heater_for_weight(
    ring: &RingSpec,
    wavelength_nm: f64,
    target_theta: f64,
) -> Result<HeaterState> {
    ring.validate()?;
    if !target_theta.is_finite() {
        return Err(Error::NonFinite("target drop fraction".into()));
    }
    let (reach_lo, reach_hi) = reachable_drop_range(ring, wavelength_nm);
    let out_of_reach = |target: f64| Error::UnreachableWeight {
        channel: 0,
        target,
        min: reach_lo,
        max: reach_hi,
    };
    // Tolerate tiny excursions past the boundary so that round-tripped
    // extremes (weight exactly +1/-1) survive floating-point rounding.
    const EDGE: f64 = 1e-9;
    if target_theta < reach_lo - EDGE || target_theta > reach_hi + EDGE {
        return Err(out_of_reach(target_theta));
    }
    let theta = target_theta.clamp(reach_lo, reach_hi);

    if ring.heater_shift_nm_per_unit == 0.0 {
        // No tuning authority: the drive is irrelevant, the fixed detuning
        // either already realizes the target or nothing does.
        let h = HeaterState::OFF;
        if (drop_fraction(ring, h, wavelength_nm) - theta).abs() <= 1e-9 {
            return Ok(h);
        }
        return Err(out_of_reach(target_theta));
    }

    if theta == ring.max_drop {
        // Park the resonance on the carrier.
        let drive = (wavelength_nm - ring.resonance_nm) / ring.heater_shift_nm_per_unit;
        return HeaterState::new(drive.clamp(0.0, 1.0));
    }
    // theta = max_drop / (1 + u^2) with u = 2 (lambda - res - s h) / fwhm:
    // |u| = sqrt(max_drop / theta - 1), two signs -> two drive roots.
    let u = (ring.max_drop / theta - 1.0).sqrt();
    let offset = wavelength_nm - ring.resonance_nm;
    let half_width = 0.5 * ring.fwhm_nm * u;
    let mut candidates = [
        (offset - half_width) / ring.heater_shift_nm_per_unit,
        (offset + half_width) / ring.heater_shift_nm_per_unit,
    ];
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for drive in candidates {
        // Accept roots a hair outside [0, 1]: clamping them back moves
        // theta by less than the 1e-9 round-trip tolerance.
        if (-EDGE..=1.0 + EDGE).contains(&drive) {
            let h = HeaterState::new(drive.clamp(0.0, 1.0))?;
            if (drop_fraction(ring, h, wavelength_nm) - theta).abs() <= 1e-9 {
                return Ok(h);
            }
        }
    }
    Err(out_of_reach(target_theta))
}
