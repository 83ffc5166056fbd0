//! Independent reference evaluation shared by the integration tests.
//!
//! The oracle never touches the library's chain matrices or its Schur
//! reduction. Lines are stamped from their closed-form Y-parameters, a
//! C-section is stamped as a full four-port coupled-line admittance matrix
//! with both far ends on a hidden node, and S follows from solving the
//! terminated nodal system once per excited port.

#![allow(dead_code)]

use dualband::{Branch, Element, Network, Port};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::Rng;

const J: Complex64 = Complex64::new(0.0, 1.0);

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

fn csc(x: f64) -> f64 {
    1.0 / x.sin()
}

/// Four-port impedance matrix of a symmetric coupled-line section. Ports 1
/// and 4 are the two ends of line 1; ports 2 and 3 the ends of line 2, with
/// 1 and 2 on the same side.
pub fn coupled_line_z(ze: f64, zo: f64, theta: f64) -> DMatrix<Complex64> {
    let a = -J * 0.5 * (ze + zo) * cot(theta);
    let b = -J * 0.5 * (ze - zo) * cot(theta);
    let c = -J * 0.5 * (ze - zo) * csc(theta);
    let d = -J * 0.5 * (ze + zo) * csc(theta);
    DMatrix::from_row_slice(4, 4, &[a, b, c, d, b, a, d, c, c, d, a, b, d, c, b, a])
}

/// Nodal S-parameters of `net` at `f`, computed independently.
pub fn oracle_sparams(net: &Network, f: f64) -> DMatrix<Complex64> {
    let f1 = net.f1_hz();
    let mut names: Vec<String> = net.nodes().to_vec();
    let mut extra = 0;
    let mut stamps: Vec<(Vec<usize>, DMatrix<Complex64>)> = Vec::new();
    let index = |names: &[String], n: &str| names.iter().position(|x| x == n).unwrap();
    for b in net.branches() {
        match b {
            Branch::Series {
                element: Element::TlSection { z, theta_at_f1 },
                from,
                to,
            } => {
                let t = theta_at_f1 * f / f1;
                let y11 = -J * cot(t) / *z;
                let y12 = J * csc(t) / *z;
                let m = DMatrix::from_row_slice(2, 2, &[y11, y12, y12, y11]);
                stamps.push((vec![index(&names, from), index(&names, to)], m));
            }
            Branch::Series {
                element:
                    Element::CSection {
                        z_even,
                        z_odd,
                        theta_at_f1,
                    },
                from,
                to,
            } => {
                let t = theta_at_f1 * f / f1;
                let y4 = coupled_line_z(*z_even, *z_odd, t)
                    .try_inverse()
                    .expect("coupled-line Z invertible");
                names.push(format!("__far{extra}"));
                extra += 1;
                let far = names.len() - 1;
                stamps.push((vec![index(&names, from), index(&names, to), far, far], y4));
            }
            Branch::Shunt {
                element: Element::OpenStub { z, theta_at_f1 },
                node,
            } => {
                let t = theta_at_f1 * f / f1;
                stamps.push((
                    vec![index(&names, node)],
                    DMatrix::from_element(1, 1, J * t.tan() / *z),
                ));
            }
            Branch::Shunt {
                element: Element::ShuntResistor { r },
                node,
            } => {
                stamps.push((
                    vec![index(&names, node)],
                    DMatrix::from_element(1, 1, Complex64::new(1.0 / r, 0.0)),
                ));
            }
            other => panic!("unexpected branch {other:?}"),
        }
    }
    let n = names.len();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for (nodes, m) in &stamps {
        for (i, &a) in nodes.iter().enumerate() {
            for (k, &b) in nodes.iter().enumerate() {
                y[(a, b)] += m[(i, k)];
            }
        }
    }
    let ports: Vec<(usize, f64)> = net
        .ports()
        .iter()
        .map(|p| (index(&names, &p.node), p.z0))
        .collect();
    for &(node, z0) in &ports {
        y[(node, node)] += Complex64::new(1.0 / z0, 0.0);
    }
    let lu = y.lu();
    let np = ports.len();
    let mut s = DMatrix::<Complex64>::zeros(np, np);
    for (jx, &(nj, zj)) in ports.iter().enumerate() {
        let mut rhs = DVector::<Complex64>::zeros(n);
        rhs[nj] = Complex64::new(2.0 / zj.sqrt(), 0.0);
        let v = lu.solve(&rhs).expect("terminated network is solvable");
        for (ix, &(ni, zi)) in ports.iter().enumerate() {
            s[(ix, jx)] = v[ni] / zi.sqrt() - if ix == jx { 1.0 } else { 0.0 };
        }
    }
    s
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn near_pole(x: f64, period: f64, offset: f64) -> bool {
    let r = (x - offset).rem_euclid(period);
    r.min(period - r) < 0.05
}

/// A random connected network of 2 to 6 nodes with 1 to 4 ports and a
/// frequency at which every element is at least 0.05 rad from a pole.
pub fn random_network(rng: &mut StdRng) -> (Network, f64) {
    use std::f64::consts::{FRAC_PI_2, PI};
    loop {
        let nn = rng.gen_range(2..=6);
        let nodes: Vec<String> = (0..nn).map(|i| format!("n{i}")).collect();
        let np = rng.gen_range(1..=nn.min(4));
        let ports: Vec<Port> = (0..np)
            .map(|i| Port {
                node: nodes[i].clone(),
                z0: rng.gen_range(25.0..100.0),
            })
            .collect();
        let mut branches = Vec::new();
        let series = |rng: &mut StdRng, a: usize, b: usize| {
            let theta = rng.gen_range(0.1..3.0);
            let element = if rng.gen_bool(0.3) {
                let zo = rng.gen_range(20.0..60.0);
                Element::CSection {
                    z_even: zo + rng.gen_range(5.0..80.0),
                    z_odd: zo,
                    theta_at_f1: theta,
                }
            } else {
                Element::TlSection {
                    z: rng.gen_range(20.0..150.0),
                    theta_at_f1: theta,
                }
            };
            Branch::Series {
                element,
                from: nodes[a].clone(),
                to: nodes[b].clone(),
            }
        };
        for i in 1..nn {
            let j = rng.gen_range(0..i);
            branches.push(series(rng, j, i));
        }
        for _ in 0..rng.gen_range(0..3) {
            let a = rng.gen_range(0..nn);
            let b = rng.gen_range(0..nn);
            if a != b {
                branches.push(series(rng, a, b));
            }
        }
        for _ in 0..rng.gen_range(0..4) {
            let node = nodes[rng.gen_range(0..nn)].clone();
            let element = if rng.gen_bool(0.5) {
                Element::OpenStub {
                    z: rng.gen_range(20.0..150.0),
                    theta_at_f1: rng.gen_range(0.1..3.0),
                }
            } else {
                Element::ShuntResistor {
                    r: rng.gen_range(10.0..500.0),
                }
            };
            branches.push(Branch::Shunt { element, node });
        }
        let f = 1e9 * rng.gen_range(0.3..1.7);
        let bad = branches.iter().any(|b| match *b.element() {
            Element::TlSection { theta_at_f1, .. } => near_pole(theta_at_f1 * f / 1e9, PI, 0.0),
            Element::CSection { theta_at_f1, .. } => {
                near_pole(theta_at_f1 * f / 1e9, FRAC_PI_2, 0.0)
            }
            Element::OpenStub { theta_at_f1, .. } => {
                near_pole(theta_at_f1 * f / 1e9, PI, FRAC_PI_2)
            }
            Element::ShuntResistor { .. } => false,
        });
        if bad {
            continue;
        }
        return (
            Network::new(nodes, ports, branches, 1e9).expect("generated network is valid"),
            f,
        );
    }
}
