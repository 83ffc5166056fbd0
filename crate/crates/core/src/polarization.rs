//! Feed polarization of an orthogonally fed patch driven by a coupler or
//! divider.
//!
//! The antenna is two ideal matched loads: output port 2 drives the
//! x-directed feed and output port 3 the y-directed feed through a
//! quarter-wave delay line. The axial ratio is the feed power ratio
//! `|Ex|^2 / |Ey|^2` in dB, not the ellipse axial ratio of the radiated wave.
//!
//! Handedness follows the IEEE definition for the wave leaving the patch
//! along `-z` with `e^{jwt}` phasors: `Im(Ex conj(Ey)) > 0`, where the y
//! component lags x, is left-handed (LHCP, clockwise as seen by the
//! receiver).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shifter::synth_c_section;
use crate::sim::nodal::SMatrix;
use crate::sim::twoport::TwoPortMatrix;

/// Output port feeding the x-directed probe.
pub const X_PORT: usize = 2;
/// Output port feeding the y-directed probe.
pub const Y_PORT: usize = 3;
/// Value reported when one field component vanishes.
pub const AXIAL_RATIO_SATURATION_DB: f64 = 200.0;

/// Relative size of `Im(Ex conj(Ey))` below which the field is linear.
const LINEAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JonesVector {
    pub ex: Complex64,
    pub ey: Complex64,
}

impl JonesVector {
    /// Normalize so that `|ex|^2 + |ey|^2 = 1`.
    pub fn new(ex: Complex64, ey: Complex64) -> Result<Self> {
        let norm = (ex.norm_sqr() + ey.norm_sqr()).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput(
                "field vector has zero or non-finite magnitude".into(),
            ));
        }
        Ok(JonesVector {
            ex: ex / norm,
            ey: ey / norm,
        })
    }

    pub fn handedness(&self) -> Handedness {
        let cross = (self.ex * self.ey.conj()).im;
        if cross.abs() <= LINEAR_TOL {
            Handedness::Linear
        } else if cross > 0.0 {
            Handedness::Lhcp
        } else {
            Handedness::Rhcp
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Handedness {
    Lhcp,
    Rhcp,
    Linear,
}

/// Delay inserted in the y feed path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeedDelay {
    /// No delay line: both feeds see the divider outputs directly.
    None,
    /// Plain matched line, 90 degrees at `f1`, scaling with frequency.
    #[default]
    QuarterWave,
    /// Dual-band quarter-wave equivalent (a matched C-section): -90 deg at
    /// `f1` and -270 deg at `f2`.
    DualBand { f2: f64 },
}

impl FeedDelay {
    pub fn from_flag(quarter_wave: bool) -> Self {
        if quarter_wave {
            FeedDelay::QuarterWave
        } else {
            FeedDelay::None
        }
    }

    /// Transmission factor of the delay at frequency `f`.
    pub fn transmission(&self, f: f64, f1: f64) -> Result<Complex64> {
        if !(f.is_finite() && f > 0.0 && f1.is_finite() && f1 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "frequencies must be positive (got f={f}, f1={f1})"
            )));
        }
        match *self {
            FeedDelay::None => Ok(Complex64::new(1.0, 0.0)),
            FeedDelay::QuarterWave => Ok(Complex64::from_polar(
                1.0,
                -std::f64::consts::FRAC_PI_2 * f / f1,
            )),
            FeedDelay::DualBand { f2 } => {
                let cs = synth_c_section(f2 / f1, 1.0)?;
                let crate::types::ShifterParams::CSection {
                    theta_delta,
                    z_even,
                    z_odd,
                } = cs
                else {
                    unreachable!("synth_c_section yields a C-section")
                };
                let abcd = TwoPortMatrix::c_section(z_even, z_odd, theta_delta * f / f1);
                Ok(abcd.s_params(1.0)[1][0])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationReport {
    pub frequency_hz: f64,
    pub excited_port: usize,
    pub ex: Complex64,
    pub ey: Complex64,
    pub axial_ratio_db: f64,
    pub handedness: Handedness,
}

/// Field produced when `excited` is driven and the outputs `x_port` and
/// `y_port` feed the patch, the latter through `delay`.
pub fn feed_polarization(
    s: &SMatrix,
    excited: usize,
    x_port: usize,
    y_port: usize,
    delay: FeedDelay,
    f: f64,
    f1: f64,
) -> Result<(JonesVector, Handedness)> {
    let n = s.nports();
    for p in [excited, x_port, y_port] {
        if p == 0 || p > n {
            return Err(Error::PortInvalid(p));
        }
    }
    if excited == x_port || excited == y_port {
        return Err(Error::PortInvalid(excited));
    }
    if x_port == y_port {
        return Err(Error::PortInvalid(y_port));
    }
    let ex = s.s(x_port, excited);
    let ey = s.s(y_port, excited) * delay.transmission(f, f1)?;
    let j = JonesVector::new(ex, ey)?;
    Ok((j, j.handedness()))
}

/// `10 log10(|ex|^2 / |ey|^2)`, saturated at +/-200 dB when a component
/// vanishes.
pub fn axial_ratio_db(j: &JonesVector) -> f64 {
    let (px, py) = (j.ex.norm_sqr(), j.ey.norm_sqr());
    if py == 0.0 {
        return AXIAL_RATIO_SATURATION_DB;
    }
    if px == 0.0 {
        return -AXIAL_RATIO_SATURATION_DB;
    }
    (10.0 * (px / py).log10()).clamp(-AXIAL_RATIO_SATURATION_DB, AXIAL_RATIO_SATURATION_DB)
}

/// Report for the standard feed arrangement (x on port 2, y on port 3).
pub fn polarization_report(
    s: &SMatrix,
    excited: usize,
    delay: FeedDelay,
    f1: f64,
) -> Result<PolarizationReport> {
    let f = s.freq_hz;
    let (j, handedness) = feed_polarization(s, excited, X_PORT, Y_PORT, delay, f, f1)?;
    Ok(PolarizationReport {
        frequency_hz: f,
        excited_port: excited,
        ex: j.ex,
        ey: j.ey,
        axial_ratio_db: axial_ratio_db(&j),
        handedness,
    })
}
