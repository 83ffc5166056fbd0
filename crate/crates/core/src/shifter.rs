//! Dual-band 90-degree phase shifters.
//!
//! Each network behaves as a `{Z_gamma, 90 deg}` line at `f1` and as a
//! `{Z_gamma, 270 deg}` line at `f2 = m f1`. Two of them in cascade give a
//! phase inversion at both frequencies. All electrical lengths equal
//! `pi / (m + 1)` (the T-structure stub is twice that), so only `m` and the
//! reference impedance enter the synthesis.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ShifterParams, Topology};

/// Distance, in radians, from a vanishing denominator at which synthesis is
/// refused.
pub const SINGULARITY_TOL: f64 = 1e-9;

fn check_inputs(m: f64, z_gamma: f64) -> Result<f64> {
    if !(m.is_finite() && m > 1.0) {
        return Err(Error::SingularSynthesis {
            m,
            reason: "frequency ratio must exceed 1",
        });
    }
    if !(z_gamma.is_finite() && z_gamma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "z_gamma must be positive (got {z_gamma})"
        )));
    }
    Ok(PI / (m + 1.0))
}

/// Coupled-line C-section: `theta = pi/(m+1)`, `Ze = Zg tan(theta)`,
/// `Zo = Zg cot(theta)`.
pub fn synth_c_section(m: f64, z_gamma: f64) -> Result<ShifterParams> {
    let theta = check_inputs(m, z_gamma)?;
    if (FRAC_PI_2 - theta).abs() < SINGULARITY_TOL {
        return Err(Error::SingularSynthesis {
            m,
            reason: "C-section length approaches 90 deg",
        });
    }
    let t = theta.tan();
    Ok(ShifterParams::CSection {
        theta_delta: theta,
        z_even: z_gamma * t,
        z_odd: z_gamma / t,
    })
}

/// Pi-structure: series line `{Z1, theta}` with an open stub `{Z2, theta}` at
/// each end.
pub fn synth_pi(m: f64, z_gamma: f64) -> Result<ShifterParams> {
    let theta = check_inputs(m, z_gamma)?;
    let (s, c) = theta.sin_cos();
    if c.abs() < SINGULARITY_TOL {
        return Err(Error::SingularSynthesis {
            m,
            reason: "cos(theta_1pi) vanishes",
        });
    }
    Ok(ShifterParams::PiStructure {
        theta_1pi: theta,
        theta_2pi: theta,
        z_1pi: z_gamma / s,
        z_2pi: z_gamma * theta.tan() / c,
    })
}

/// T-structure: two series lines `{Z1, theta}` with an open stub
/// `{Z2, 2 theta}` at the junction. Singular at `m = 3`, where the stub
/// impedance diverges.
pub fn synth_t(m: f64, z_gamma: f64) -> Result<ShifterParams> {
    let theta = check_inputs(m, z_gamma)?;
    let cos2 = (2.0 * theta).cos();
    if (2.0 * theta - FRAC_PI_2).abs() < SINGULARITY_TOL {
        return Err(Error::SingularSynthesis {
            m,
            reason: "cos(2 theta_1t) vanishes; Z2t diverges",
        });
    }
    let z_2t = z_gamma * theta.cos().powi(2) * (2.0 * theta).tan() / cos2;
    if z_2t <= 0.0 {
        return Err(Error::NegativeImpedance {
            what: "z_2t",
            value: z_2t,
        });
    }
    Ok(ShifterParams::TStructure {
        theta_1t: theta,
        theta_2t: 2.0 * theta,
        z_1t: z_gamma / theta.tan(),
        z_2t,
    })
}

/// Synthesize the requested topology. `IdealTl` yields a plain quarter-wave
/// line, which is exact at `f1` only.
pub fn synth(topology: Topology, m: f64, z_gamma: f64) -> Result<ShifterParams> {
    match topology {
        Topology::CSection => synth_c_section(m, z_gamma),
        Topology::Pi => synth_pi(m, z_gamma),
        Topology::T => synth_t(m, z_gamma),
        Topology::IdealTl => {
            check_inputs(m, z_gamma)?;
            Ok(ShifterParams::IdealLine { z: z_gamma })
        }
    }
}

/// Closed interval of realizable characteristic impedances, in ohms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceWindow {
    pub z_min: f64,
    pub z_max: f64,
}

impl ImpedanceWindow {
    pub const fn new(z_min: f64, z_max: f64) -> Self {
        ImpedanceWindow { z_min, z_max }
    }

    pub fn validate(&self) -> Result<()> {
        if self.z_min.is_nan() || self.z_max.is_nan() || self.z_min < 0.0 || self.z_max < self.z_min
        {
            return Err(Error::InvalidInput(format!(
                "invalid impedance window [{}, {}]",
                self.z_min, self.z_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, z: f64) -> bool {
        z >= self.z_min && z <= self.z_max
    }
}

impl Default for ImpedanceWindow {
    fn default() -> Self {
        ImpedanceWindow::new(20.0, 150.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceCheck {
    pub name: String,
    pub value: f64,
    pub in_window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub window: ImpedanceWindow,
    pub checks: Vec<ImpedanceCheck>,
    pub feasible: bool,
    pub advisory: String,
}

impl FeasibilityReport {
    fn from_checks(window: ImpedanceWindow, checks: Vec<ImpedanceCheck>, advisory: String) -> Self {
        let feasible = checks.iter().all(|c| c.in_window);
        FeasibilityReport {
            window,
            checks,
            feasible,
            advisory,
        }
    }

    /// Adds further impedances (for instance the ring lines) to the report.
    pub fn with_extra(mut self, extra: &[(&str, f64)]) -> Self {
        for &(name, value) in extra {
            self.checks.push(ImpedanceCheck {
                name: name.to_string(),
                value,
                in_window: self.window.contains(value),
            });
        }
        self.feasible = self.checks.iter().all(|c| c.in_window);
        self
    }

    /// One warning line per out-of-window impedance.
    pub fn warnings(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.in_window)
            .map(|c| {
                format!(
                    "{} = {:.2} ohm is outside the realizable window [{}, {}] ohm. {}",
                    c.name, c.value, self.window.z_min, self.window.z_max, self.advisory
                )
            })
            .collect()
    }
}

/// Frequency-ratio range over which each topology usually gives realizable
/// impedances (equal split, 50 ohm).
pub fn guidance_interval(topology: Topology) -> Option<(f64, f64)> {
    match topology {
        Topology::CSection => Some((2.0, 2.75)),
        Topology::Pi => Some((2.25, 2.9)),
        Topology::T => Some((1.75, 2.25)),
        Topology::IdealTl => None,
    }
}

fn advisory_text(topology: Topology) -> String {
    match guidance_interval(topology) {
        Some((lo, hi)) => {
            format!("The {topology} shifter is typically realizable for {lo} <= m <= {hi}.")
        }
        None => "Plain quarter-wave lines are exact at f1 only.".to_string(),
    }
}

/// Compare every shifter impedance against `window`.
pub fn check_feasibility(params: &ShifterParams, window: ImpedanceWindow) -> FeasibilityReport {
    let checks = params
        .impedances()
        .into_iter()
        .map(|(name, value)| ImpedanceCheck {
            name: name.to_string(),
            value,
            in_window: value.is_finite() && window.contains(value),
        })
        .collect();
    FeasibilityReport::from_checks(window, checks, advisory_text(params.topology()))
}
