//! Chain (ABCD) matrices of the ideal elements.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::{Element, ShifterParams};

/// Angles closer than this to a pole are treated as singular.
pub const POLE_TOL: f64 = 1e-9;

const J: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPortMatrix {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl TwoPortMatrix {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        TwoPortMatrix { a, b, c, d }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        TwoPortMatrix::new(one, zero, zero, one)
    }

    /// Frequency-independent 180 degree phase inverter.
    pub fn inverter() -> Self {
        let m1 = Complex64::new(-1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        TwoPortMatrix::new(m1, zero, zero, m1)
    }

    /// Lossless line of impedance `z` and electrical length `theta`.
    pub fn line(z: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        TwoPortMatrix::new(c.into(), J * (z * s), J * (s / z), c.into())
    }

    /// Shunt admittance `y` across the through path.
    pub fn shunt(y: Complex64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        TwoPortMatrix::new(one, Complex64::new(0.0, 0.0), y, one)
    }

    /// Coupled-line pair with the far ends connected. Written in sine/cosine
    /// form so it stays finite at `theta = 90 deg`.
    pub fn c_section(z_even: f64, z_odd: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let den = z_even * c * c + z_odd * s * s;
        let a = (z_even * c * c - z_odd * s * s) / den;
        TwoPortMatrix::new(
            a.into(),
            J * (2.0 * z_even * z_odd * s * c / den),
            J * (2.0 * s * c / den),
            a.into(),
        )
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// S-parameters `[[S11, S12], [S21, S22]]` for real reference `z0` at
    /// both ports.
    pub fn s_params(&self, z0: f64) -> [[Complex64; 2]; 2] {
        let (a, b, c, d) = (self.a, self.b / z0, self.c * z0, self.d);
        let den = a + b + c + d;
        [
            [(a + b - c - d) / den, 2.0 * self.det() / den],
            [2.0 / den, (-a + b - c + d) / den],
        ]
    }

    /// Image impedance seen at port 1, `sqrt(A B / (C D))`.
    pub fn image_impedance(&self) -> Complex64 {
        (self.a * self.b / (self.c * self.d)).sqrt()
    }

    /// Y-parameters, or `None` when `B` vanishes.
    pub fn to_y(&self) -> Option<[[Complex64; 2]; 2]> {
        if self.b.norm() < 1e-300 {
            return None;
        }
        let det = self.det();
        Some([
            [self.d / self.b, -det / self.b],
            [-1.0 / self.b, self.a / self.b],
        ])
    }
}

impl Mul for TwoPortMatrix {
    type Output = TwoPortMatrix;

    fn mul(self, o: TwoPortMatrix) -> TwoPortMatrix {
        TwoPortMatrix::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// Distance from `x` to the nearest point of `offset + n * period`.
fn distance_to_lattice(x: f64, offset: f64, period: f64) -> f64 {
    let r = (x - offset).rem_euclid(period);
    r.min(period - r)
}

/// How close the element's angle at `theta` is to a point where its nodal
/// stamp is undefined. Resistors never are.
pub fn pole_distance(elem: &Element, theta: f64) -> f64 {
    match elem {
        Element::TlSection { .. } => distance_to_lattice(theta, 0.0, PI),
        Element::OpenStub { .. } => distance_to_lattice(theta, FRAC_PI_2, PI),
        Element::CSection { .. } => distance_to_lattice(theta, 0.0, FRAC_PI_2),
        Element::ShuntResistor { .. } => f64::INFINITY,
    }
}

/// Admittance of a one-terminal element to ground.
pub fn shunt_admittance(elem: &Element, f: f64, f1: f64) -> Result<Complex64> {
    match *elem {
        Element::OpenStub { z, theta_at_f1 } => {
            let theta = theta_at_f1 * f / f1;
            if pole_distance(elem, theta) < POLE_TOL {
                return Err(Error::EvaluationSingular {
                    theta_deg: theta.to_degrees(),
                });
            }
            Ok(J * (theta.tan() / z))
        }
        Element::ShuntResistor { r } => Ok(Complex64::new(1.0 / r, 0.0)),
        _ => Err(Error::InvalidNetwork(format!(
            "{elem:?} is not a shunt element"
        ))),
    }
}

/// Chain matrix of an element at frequency `f`. Shunt elements are returned
/// as shunt two-ports.
pub fn element_two_port(elem: &Element, f: f64, f1: f64) -> Result<TwoPortMatrix> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::InvalidInput(format!(
            "frequency must be positive (got {f})"
        )));
    }
    match *elem {
        Element::TlSection { z, theta_at_f1 } => Ok(TwoPortMatrix::line(z, theta_at_f1 * f / f1)),
        Element::CSection {
            z_even,
            z_odd,
            theta_at_f1,
        } => Ok(TwoPortMatrix::c_section(
            z_even,
            z_odd,
            theta_at_f1 * f / f1,
        )),
        Element::OpenStub { .. } | Element::ShuntResistor { .. } => {
            Ok(TwoPortMatrix::shunt(shunt_admittance(elem, f, f1)?))
        }
    }
}

/// Chain matrix of one 90-degree shifter at frequency `f`.
pub fn shifter_two_port(params: &ShifterParams, f: f64, f1: f64) -> Result<TwoPortMatrix> {
    let scale = f / f1;
    let stub = |z: f64, theta: f64| {
        element_two_port(
            &Element::OpenStub {
                z,
                theta_at_f1: theta,
            },
            f,
            f1,
        )
    };
    Ok(match *params {
        ShifterParams::CSection {
            theta_delta,
            z_even,
            z_odd,
        } => TwoPortMatrix::c_section(z_even, z_odd, theta_delta * scale),
        ShifterParams::PiStructure {
            theta_1pi,
            theta_2pi,
            z_1pi,
            z_2pi,
        } => {
            let s = stub(z_2pi, theta_2pi)?;
            s * TwoPortMatrix::line(z_1pi, theta_1pi * scale) * s
        }
        ShifterParams::TStructure {
            theta_1t,
            theta_2t,
            z_1t,
            z_2t,
        } => {
            let l = TwoPortMatrix::line(z_1t, theta_1t * scale);
            l * stub(z_2t, theta_2t)? * l
        }
        ShifterParams::IdealLine { z } => TwoPortMatrix::line(z, FRAC_PI_2 * scale),
    })
}
