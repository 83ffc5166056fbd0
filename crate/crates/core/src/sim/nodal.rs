//! Nodal-admittance assembly and Y to S conversion.
//!
//! Every branch is stamped into an extended node admittance matrix (ground
//! is the implicit reference). Internal nodes and branch currents are
//! removed with a Schur complement and the resulting port admittance matrix
//! is converted to S with the ports' real reference impedances.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::twoport::{element_two_port, pole_distance, shunt_admittance, POLE_TOL};
use crate::types::{Branch, Element, Network};

/// Relative frequency offset used to step off an ideal-line pole.
pub const POLE_PERTURBATION: f64 = 1e-9;

/// Scattering matrix at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SMatrix {
    /// Requested frequency, Hz.
    pub freq_hz: f64,
    /// Frequency actually evaluated; differs from `freq_hz` when the point
    /// sat on a pole and was perturbed.
    pub evaluated_hz: f64,
    pub perturbed: bool,
    pub z_ref: Vec<f64>,
    #[serde(with = "complex_matrix")]
    pub data: DMatrix<Complex64>,
}

impl SMatrix {
    pub fn nports(&self) -> usize {
        self.data.nrows()
    }

    /// Entry `S(out, in)` with 1-based port numbers.
    pub fn s(&self, out: usize, input: usize) -> Complex64 {
        self.data[(out - 1, input - 1)]
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.nports();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)]).norm());
            }
        }
        worst
    }

    /// Largest entry of `|S^H S - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.nports();
        let p = self.data.adjoint() * &self.data - DMatrix::<Complex64>::identity(n, n);
        p.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_singular_value(&self) -> f64 {
        self.data
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

mod complex_matrix {
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<Complex64>, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("S-matrix must be square"));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(rows[i][j][0], rows[i][j][1])
        }))
    }
}

/// Closest approach of any element to a pole at frequency `f`.
fn min_pole_distance(net: &Network, f: f64) -> f64 {
    net.branches()
        .iter()
        .filter_map(|b| {
            b.element()
                .theta_at(f, net.f1_hz())
                .map(|t| pole_distance(b.element(), t))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Reference impedance used to scale an element's branch-current unknowns.
fn current_scale(elem: &Element) -> f64 {
    match *elem {
        Element::TlSection { z, .. } | Element::OpenStub { z, .. } => z,
        Element::CSection { z_even, z_odd, .. } => (z_even * z_odd).sqrt(),
        Element::ShuntResistor { r } => r,
    }
}

/// Extended nodal matrix at frequency `f`.
///
/// The first `nodes().len()` unknowns are node voltages and their rows are
/// Kirchhoff current sums. Every two-port adds its two terminal currents
/// (scaled by its reference impedance) as unknowns, constrained by its chain
/// matrix, so a line stays well conditioned through `sin(theta) = 0`. An
/// open stub with `|tan(theta)| > 1` is written in impedance form for the
/// same reason.
pub fn extended_admittance(net: &Network, f: f64) -> Result<DMatrix<Complex64>> {
    let n = net.nodes().len();
    let f1 = net.f1_hz();
    let mut extra = 0;
    for b in net.branches() {
        match b {
            Branch::Series { .. } => extra += 2,
            Branch::Shunt {
                element: Element::OpenStub { theta_at_f1, .. },
                ..
            } => {
                if (theta_at_f1 * f / f1).tan().abs() > 1.0 {
                    extra += 1;
                }
            }
            Branch::Shunt { .. } => {}
        }
    }
    let mut m = DMatrix::<Complex64>::zeros(n + extra, n + extra);
    let idx = |name: &str| net.node_index(name).expect("validated network");
    let one = Complex64::new(1.0, 0.0);
    let j = Complex64::new(0.0, 1.0);
    let mut k = n;
    for branch in net.branches() {
        match branch {
            Branch::Series { element, from, to } => {
                let t = element_two_port(element, f, f1)?;
                let zs = current_scale(element);
                let (a, b, k1, k2) = (idx(from), idx(to), k, k + 1);
                k += 2;
                // V_a - A V_b + B i_b = 0 and i_a - C V_b + D i_b = 0, with
                // i_a, i_b the currents entering the element
                m[(k1, a)] += one;
                m[(k1, b)] -= t.a;
                m[(k1, k2)] += t.b / zs;
                m[(k2, k1)] += one;
                m[(k2, b)] -= t.c * zs;
                m[(k2, k2)] += t.d;
                m[(a, k1)] += one / zs;
                m[(b, k2)] += one / zs;
            }
            Branch::Shunt {
                element: Element::OpenStub { z, theta_at_f1 },
                node,
            } => {
                let a = idx(node);
                let theta = theta_at_f1 * f / f1;
                let (s, c) = theta.sin_cos();
                if (s / c).abs() <= 1.0 {
                    m[(a, a)] += j * (s / c) / *z;
                } else {
                    // V = -j z cot(theta) i
                    m[(k, a)] += one;
                    m[(k, k)] += j * (c / s);
                    m[(a, k)] += one / *z;
                    k += 1;
                }
            }
            Branch::Shunt { element, node } => {
                let a = idx(node);
                m[(a, a)] += shunt_admittance(element, f, f1)?;
            }
        }
    }
    Ok(m)
}

/// Port admittance matrix after eliminating every internal unknown.
pub fn port_admittance(net: &Network, f: f64) -> Result<DMatrix<Complex64>> {
    let y = extended_admittance(net, f)?;
    let port_idx: Vec<usize> = net
        .ports()
        .iter()
        .map(|p| net.node_index(&p.node).expect("validated"))
        .collect();
    let internal: Vec<usize> = (0..y.nrows()).filter(|i| !port_idx.contains(i)).collect();
    let np = port_idx.len();
    let ni = internal.len();

    let ypp = DMatrix::from_fn(np, np, |i, j| y[(port_idx[i], port_idx[j])]);
    if ni == 0 {
        return Ok(ypp);
    }
    let ypi = DMatrix::from_fn(np, ni, |i, j| y[(port_idx[i], internal[j])]);
    let yip = DMatrix::from_fn(ni, np, |i, j| y[(internal[i], port_idx[j])]);
    let yii = DMatrix::from_fn(ni, ni, |i, j| y[(internal[i], internal[j])]);

    let x = yii
        .lu()
        .solve(&yip)
        .ok_or(Error::SingularAssembly { freq_hz: f })?;
    let reduced = ypp - ypi * x;
    if reduced
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::SingularAssembly { freq_hz: f });
    }
    Ok(reduced)
}

/// Convert a port admittance matrix to S for real reference impedances.
pub fn y_to_s(y: &DMatrix<Complex64>, z_ref: &[f64]) -> Result<DMatrix<Complex64>> {
    let n = y.nrows();
    let root: Vec<f64> = z_ref.iter().map(|z| z.sqrt()).collect();
    let yn = DMatrix::from_fn(n, n, |i, j| y[(i, j)] * root[i] * root[j]);
    let id = DMatrix::<Complex64>::identity(n, n);
    let inv = (&id + &yn)
        .try_inverse()
        .ok_or(Error::SingularAssembly { freq_hz: f64::NAN })?;
    Ok((&id - &yn) * inv)
}

/// `S = 2 sqrt(G) (Y + G)^-1 sqrt(G) - I` with `G` the port reference
/// conductances. `(Y + G)^-1` is read off as the port block of the inverse of
/// the terminated extended matrix, which equals the inverse of its Schur
/// complement. Near a line pole `Y` itself grows without bound while this
/// block stays small, so the port admittance matrix is never formed.
fn terminated_sparams(net: &Network, f: f64, z_ref: &[f64]) -> Option<DMatrix<Complex64>> {
    let mut m = extended_admittance(net, f).ok()?;
    let port_idx: Vec<usize> = net
        .ports()
        .iter()
        .map(|p| net.node_index(&p.node).expect("validated"))
        .collect();
    let np = port_idx.len();
    let mut rhs = DMatrix::<Complex64>::zeros(m.nrows(), np);
    for (p, (&node, &z0)) in port_idx.iter().zip(z_ref).enumerate() {
        m[(node, node)] += Complex64::new(1.0 / z0, 0.0);
        rhs[(node, p)] = Complex64::new(1.0, 0.0);
    }
    let x = m.lu().solve(&rhs)?;
    let s = DMatrix::from_fn(np, np, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        x[(port_idx[i], j)] * (2.0 / (z_ref[i] * z_ref[j]).sqrt()) - delta
    });
    s.iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
        .then_some(s)
}

/// S-parameters of `net` at frequency `f`. Frequencies within `POLE_TOL`
/// radians of an element pole are nudged upward by parts in 1e9 and flagged.
pub fn assemble_sparams(net: &Network, f: f64) -> Result<SMatrix> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::InvalidInput(format!(
            "frequency must be positive (got {f})"
        )));
    }
    let mut f_eval = f;
    let mut perturbed = false;
    let mut offset = POLE_PERTURBATION;
    while min_pole_distance(net, f_eval) < POLE_TOL {
        if offset > 1e-6 {
            return Err(Error::SingularAssembly { freq_hz: f });
        }
        f_eval = f * (1.0 + offset);
        perturbed = true;
        offset *= 2.0;
    }
    let z_ref: Vec<f64> = net.ports().iter().map(|p| p.z0).collect();
    let data =
        terminated_sparams(net, f_eval, &z_ref).ok_or(Error::SingularAssembly { freq_hz: f })?;
    Ok(SMatrix {
        freq_hz: f,
        evaluated_hz: f_eval,
        perturbed,
        z_ref,
        data,
    })
}
