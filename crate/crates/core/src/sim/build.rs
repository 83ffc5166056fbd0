//! Netlist builders for the ring coupler and the Gysel divider.
//!
//! Port nodes are named `p1`..`p4`. Coupler ring: `p1-p3` is `{Za, ta}`,
//! `p1-p2` and `p3-p4` are `{Zb, tb}`, and `p2-p4` is a shifter, a `{Za, ta}`
//! line and a second shifter. Divider: `p1-p2` `{Zb, tb}`, `p1-p3`
//! `{Za, ta}`, then the isolation path `p2 -{Za, ta}- a -[180 deg]- b
//! -{Zb, tb}- p3` with `R2` at `a` and `R3` at `b`.

use crate::error::{Error, Result};
use crate::solver::{Design, IsolationResistors};
use crate::types::{Branch, Device, Element, Network, Port, RingSolution, ShifterParams};
use std::f64::consts::FRAC_PI_2;

struct NetBuilder {
    nodes: Vec<String>,
    ports: Vec<Port>,
    branches: Vec<Branch>,
}

impl NetBuilder {
    fn new() -> Self {
        NetBuilder {
            nodes: Vec::new(),
            ports: Vec::new(),
            branches: Vec::new(),
        }
    }

    fn node(&mut self, name: &str) -> String {
        if !self.nodes.iter().any(|n| n == name) {
            self.nodes.push(name.to_string());
        }
        name.to_string()
    }

    fn port(&mut self, name: &str, z0: f64) -> String {
        let n = self.node(name);
        self.ports.push(Port {
            node: n.clone(),
            z0,
        });
        n
    }

    fn line(&mut self, from: &str, to: &str, z: f64, theta: f64) {
        self.branches.push(Branch::Series {
            element: Element::TlSection {
                z,
                theta_at_f1: theta,
            },
            from: from.into(),
            to: to.into(),
        });
    }

    fn stub(&mut self, node: &str, z: f64, theta: f64) {
        self.branches.push(Branch::Shunt {
            element: Element::OpenStub {
                z,
                theta_at_f1: theta,
            },
            node: node.into(),
        });
    }

    fn resistor(&mut self, node: &str, r: f64) {
        self.branches.push(Branch::Shunt {
            element: Element::ShuntResistor { r },
            node: node.into(),
        });
    }

    fn c_section(&mut self, from: &str, to: &str, z_even: f64, z_odd: f64, theta: f64) {
        self.branches.push(Branch::Series {
            element: Element::CSection {
                z_even,
                z_odd,
                theta_at_f1: theta,
            },
            from: from.into(),
            to: to.into(),
        });
    }

    /// One 90-degree shifter between `from` and `to`; `tag` names any
    /// internal node it needs.
    fn shifter(&mut self, params: &ShifterParams, from: &str, to: &str, tag: &str) {
        match *params {
            ShifterParams::CSection {
                theta_delta,
                z_even,
                z_odd,
            } => self.c_section(from, to, z_even, z_odd, theta_delta),
            ShifterParams::PiStructure {
                theta_1pi,
                theta_2pi,
                z_1pi,
                z_2pi,
            } => {
                self.stub(from, z_2pi, theta_2pi);
                self.line(from, to, z_1pi, theta_1pi);
                self.stub(to, z_2pi, theta_2pi);
            }
            ShifterParams::TStructure {
                theta_1t,
                theta_2t,
                z_1t,
                z_2t,
            } => {
                let mid = self.node(&format!("{tag}_t"));
                self.line(from, &mid, z_1t, theta_1t);
                self.stub(&mid, z_2t, theta_2t);
                self.line(&mid, to, z_1t, theta_1t);
            }
            ShifterParams::IdealLine { z } => self.line(from, to, z, FRAC_PI_2),
        }
    }

    /// Two cascaded shifters forming a 180-degree section. Adjacent Pi stubs
    /// merge into one stub of half the impedance; adjacent T lines merge into
    /// one line of twice the length.
    fn half_wave(&mut self, params: &ShifterParams, from: &str, to: &str, tag: &str) {
        match *params {
            ShifterParams::CSection { .. } | ShifterParams::IdealLine { .. } => {
                let mid = self.node(&format!("{tag}_mid"));
                self.shifter(params, from, &mid, &format!("{tag}_1"));
                self.shifter(params, &mid, to, &format!("{tag}_2"));
            }
            ShifterParams::PiStructure {
                theta_1pi,
                theta_2pi,
                z_1pi,
                z_2pi,
            } => {
                let mid = self.node(&format!("{tag}_mid"));
                self.stub(from, z_2pi, theta_2pi);
                self.line(from, &mid, z_1pi, theta_1pi);
                self.stub(&mid, z_2pi / 2.0, theta_2pi);
                self.line(&mid, to, z_1pi, theta_1pi);
                self.stub(to, z_2pi, theta_2pi);
            }
            ShifterParams::TStructure {
                theta_1t,
                theta_2t,
                z_1t,
                z_2t,
            } => {
                let t1 = self.node(&format!("{tag}_t1"));
                let t2 = self.node(&format!("{tag}_t2"));
                self.line(from, &t1, z_1t, theta_1t);
                self.stub(&t1, z_2t, theta_2t);
                self.line(&t1, &t2, z_1t, 2.0 * theta_1t);
                self.stub(&t2, z_2t, theta_2t);
                self.line(&t2, to, z_1t, theta_1t);
            }
        }
    }

    fn finish(self, f1_hz: f64) -> Result<Network> {
        Network::new(self.nodes, self.ports, self.branches, f1_hz)
    }
}

fn check_solution(sol: &RingSolution) -> Result<()> {
    let ok = [sol.theta_alpha, sol.theta_beta, sol.z_alpha, sol.z_beta]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
    if ok {
        Ok(())
    } else {
        Err(Error::TopologyMismatch(format!(
            "ring solution is not physical: {sol:?}"
        )))
    }
}

/// A single shifter as a two-port between `p1` and `p2`, both ports
/// referenced to `z_gamma`.
pub fn build_shifter_network(shifter: &ShifterParams, z_gamma: f64, f1_hz: f64) -> Result<Network> {
    let mut b = NetBuilder::new();
    let p1 = b.port("p1", z_gamma);
    let p2 = b.port("p2", z_gamma);
    b.shifter(shifter, &p1, &p2, "s");
    b.finish(f1_hz)
}

/// Four-port dual-band rat-race coupler.
pub fn build_rrc_network(
    sol: &RingSolution,
    shifter: &ShifterParams,
    z0: f64,
    f1_hz: f64,
) -> Result<Network> {
    check_solution(sol)?;
    let mut b = NetBuilder::new();
    let p1 = b.port("p1", z0);
    let p2 = b.port("p2", z0);
    let p3 = b.port("p3", z0);
    let p4 = b.port("p4", z0);
    let x = b.node("x");
    let y = b.node("y");
    b.line(&p1, &p3, sol.z_alpha, sol.theta_alpha);
    b.line(&p1, &p2, sol.z_beta, sol.theta_beta);
    b.line(&p3, &p4, sol.z_beta, sol.theta_beta);
    b.shifter(shifter, &p2, &x, "s1");
    b.line(&x, &y, sol.z_alpha, sol.theta_alpha);
    b.shifter(shifter, &y, &p4, "s2");
    b.finish(f1_hz)
}

/// Three-port dual-band Gysel power divider.
pub fn build_gpd_network(
    sol: &RingSolution,
    shifter: &ShifterParams,
    resistors: &IsolationResistors,
    z0: f64,
    f1_hz: f64,
) -> Result<Network> {
    check_solution(sol)?;
    if !(resistors.r2 > 0.0 && resistors.r3 > 0.0) {
        return Err(Error::TopologyMismatch(
            "isolation resistors must be positive".into(),
        ));
    }
    let mut b = NetBuilder::new();
    let p1 = b.port("p1", z0);
    let p2 = b.port("p2", z0);
    let p3 = b.port("p3", z0);
    let a = b.node("a");
    let c = b.node("b");
    b.line(&p1, &p2, sol.z_beta, sol.theta_beta);
    b.line(&p1, &p3, sol.z_alpha, sol.theta_alpha);
    b.line(&p2, &a, sol.z_alpha, sol.theta_alpha);
    b.resistor(&a, resistors.r2);
    b.half_wave(shifter, &a, &c, "h");
    b.resistor(&c, resistors.r3);
    b.line(&c, &p3, sol.z_beta, sol.theta_beta);
    b.finish(f1_hz)
}

/// Netlist for a finished design.
pub fn build_network(design: &Design) -> Result<Network> {
    let spec = &design.spec;
    match spec.device {
        Device::Rrc => build_rrc_network(&design.solution, &design.shifter, spec.z0, spec.f1),
        Device::Gpd => {
            let r = design.resistors.ok_or_else(|| {
                Error::TopologyMismatch("divider design has no isolation resistors".into())
            })?;
            build_gpd_network(&design.solution, &design.shifter, &r, spec.z0, spec.f1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shifter::{synth_pi, synth_t};
    use crate::solver::{solve_ring, SolverOptions};

    fn is_line(e: &Element) -> bool {
        matches!(e, Element::TlSection { .. })
    }
    fn is_stub(e: &Element) -> bool {
        matches!(e, Element::OpenStub { .. })
    }

    #[test]
    fn element_counts_follow_schematics() {
        let sol = solve_ring(2.5, 1.0, 2.0, 50.0, &SolverOptions::default()).unwrap();
        let c = crate::shifter::synth_c_section(2.5, sol.z_alpha).unwrap();
        let net = build_rrc_network(&sol, &c, 50.0, 1e9).unwrap();
        assert_eq!(net.ports().len(), 4);
        assert_eq!(net.count_elements(is_line), 4);
        assert_eq!(
            net.count_elements(|e| matches!(e, Element::CSection { .. })),
            2
        );

        let pi = synth_pi(2.5, sol.z_alpha).unwrap();
        let net = build_rrc_network(&sol, &pi, 50.0, 1e9).unwrap();
        assert_eq!(net.count_elements(is_stub), 4);
        assert_eq!(net.count_elements(is_line), 6);

        let t = synth_t(2.0, sol.z_alpha).unwrap();
        let net = build_rrc_network(&sol, &t, 50.0, 1e9).unwrap();
        assert_eq!(net.count_elements(is_stub), 2);
        assert_eq!(net.count_elements(is_line), 8);
    }

    #[test]
    fn gpd_merges_center_elements() {
        let sol = solve_ring(2.5, 1.0, 1.0, 50.0, &SolverOptions::default()).unwrap();
        let r = IsolationResistors {
            r2: 100.0,
            r3: 100.0,
        };
        let pi = synth_pi(2.5, 50.0).unwrap();
        let net = build_gpd_network(&sol, &pi, &r, 50.0, 1e9).unwrap();
        assert_eq!(net.count_elements(is_stub), 3);
        let ShifterParams::PiStructure { z_2pi, .. } = pi else {
            panic!()
        };
        assert!(net
            .branches()
            .iter()
            .any(|b| matches!(b.element(), Element::OpenStub { z, .. } if (*z - z_2pi / 2.0).abs() < 1e-12)));

        let t = synth_t(2.5, 50.0).unwrap();
        let net = build_gpd_network(&sol, &t, &r, 50.0, 1e9).unwrap();
        let ShifterParams::TStructure { theta_1t, .. } = t else {
            panic!()
        };
        assert!(net.branches().iter().any(
            |b| matches!(b.element(), Element::TlSection { theta_at_f1, .. } if (*theta_at_f1 - 2.0 * theta_1t).abs() < 1e-12)
        ));
        assert_eq!(
            net.count_elements(|e| matches!(e, Element::ShuntResistor { .. })),
            2
        );
    }
}
