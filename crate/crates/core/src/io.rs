//! JSON interchange forms. Angles are in degrees, impedances in ohms and
//! frequencies in Hz; the library types use radians internally.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shifter::{FeasibilityReport, ImpedanceWindow};
use crate::solver::{self, Design, IsolationResistors, ResistorChoice, SolverOptions};
use crate::types::{
    db_to_linear, linear_to_db, Branch, DesignSpec, Device, Element, Network, Port, ShifterParams,
    Topology,
};

fn default_z0() -> f64 {
    50.0
}

/// A design request as accepted by the CLI and the HTTP service. Each
/// division ratio is given either linearly (`n1`) or in dB (`n1_db`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignRequest {
    #[serde(default = "default_device")]
    pub device: Device,
    pub topology: Topology,
    #[serde(alias = "f1_hz")]
    pub f1: f64,
    #[serde(alias = "f2_hz")]
    pub f2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2_db: Option<f64>,
    #[serde(default = "default_z0", alias = "z0_ohm")]
    pub z0: f64,
    #[serde(
        default,
        alias = "z_gamma_ohm",
        skip_serializing_if = "Option::is_none"
    )]
    pub z_gamma: Option<f64>,
    /// `"balanced"` or `"n=<value>"`; dividers only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_choice: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<ImpedanceWindow>,
}

fn default_device() -> Device {
    Device::Rrc
}

fn pick_ratio(name: &str, linear: Option<f64>, db: Option<f64>) -> Result<f64> {
    match (linear, db) {
        (Some(n), None) => Ok(n),
        (None, Some(d)) if d.is_finite() => Ok(db_to_linear(d)),
        (None, Some(d)) => Err(Error::InvalidInput(format!(
            "{name}_db must be finite (got {d})"
        ))),
        (Some(_), Some(_)) => Err(Error::InvalidInput(format!(
            "give either {name} or {name}_db, not both"
        ))),
        (None, None) => Err(Error::InvalidInput(format!(
            "missing {name} (or {name}_db)"
        ))),
    }
}

impl DesignRequest {
    pub fn spec(&self) -> Result<DesignSpec> {
        let n1 = pick_ratio("n1", self.n1, self.n1_db)?;
        let n2 = pick_ratio("n2", self.n2, self.n2_db)?;
        let spec = DesignSpec::new(
            self.f1,
            self.f2,
            n1,
            n2,
            self.z0,
            self.topology,
            self.device,
        )?;
        match self.z_gamma {
            Some(z) => spec.with_z_gamma(z),
            None => Ok(spec),
        }
    }

    pub fn resistor_choice(&self) -> Result<ResistorChoice> {
        self.r_choice
            .as_deref()
            .map_or(Ok(ResistorChoice::Balanced), str::parse)
    }

    pub fn window(&self) -> Result<ImpedanceWindow> {
        let w = self.window.unwrap_or_default();
        w.validate()?;
        Ok(w)
    }

    /// Solve the request into a complete design.
    pub fn design(&self, opts: &SolverOptions) -> Result<Design> {
        let spec = self.spec()?;
        let window = self.window()?;
        match spec.device {
            Device::Rrc => solver::design_rrc_with_window(&spec, opts, window),
            Device::Gpd => {
                solver::design_gpd_with_window(&spec, opts, self.resistor_choice()?, window)
            }
        }
    }
}

/// Either a bare request or a saved design report carrying one.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DesignSource {
    Report(Box<DesignReport>),
    Request(DesignRequest),
}

impl DesignSource {
    /// Parse either form. A value with a `request` member is read as a saved
    /// report; anything else as a bare request, so schema errors name the
    /// offending request field.
    pub fn from_value(v: serde_json::Value) -> Result<Self> {
        let parse = |e: serde_json::Error| Error::Parse(e.to_string());
        if v.get("request").is_some() {
            Ok(DesignSource::Report(Box::new(
                serde_json::from_value(v).map_err(parse)?,
            )))
        } else {
            Ok(DesignSource::Request(
                serde_json::from_value(v).map_err(parse)?,
            ))
        }
    }

    pub fn request(&self) -> &DesignRequest {
        match self {
            DesignSource::Report(r) => &r.request,
            DesignSource::Request(r) => r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecReport {
    pub f1_hz: f64,
    pub f2_hz: f64,
    pub m: f64,
    pub k: f64,
    pub n1: f64,
    pub n2: f64,
    pub n1_db: f64,
    pub n2_db: f64,
    pub z0_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub theta_alpha_deg: f64,
    pub theta_beta_deg: f64,
    pub phi1_deg: f64,
    pub phi2_deg: f64,
    pub z_alpha_ohm: f64,
    pub z_beta_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShifterReport {
    CSection {
        theta_delta_deg: f64,
        z_even_ohm: f64,
        z_odd_ohm: f64,
    },
    PiStructure {
        theta_1pi_deg: f64,
        theta_2pi_deg: f64,
        z_1pi_ohm: f64,
        z_2pi_ohm: f64,
    },
    TStructure {
        theta_1t_deg: f64,
        theta_2t_deg: f64,
        z_1t_ohm: f64,
        z_2t_ohm: f64,
    },
    IdealLine {
        theta_deg: f64,
        z_ohm: f64,
    },
}

impl From<&ShifterParams> for ShifterReport {
    fn from(p: &ShifterParams) -> Self {
        match *p {
            ShifterParams::CSection {
                theta_delta,
                z_even,
                z_odd,
            } => ShifterReport::CSection {
                theta_delta_deg: theta_delta.to_degrees(),
                z_even_ohm: z_even,
                z_odd_ohm: z_odd,
            },
            ShifterParams::PiStructure {
                theta_1pi,
                theta_2pi,
                z_1pi,
                z_2pi,
            } => ShifterReport::PiStructure {
                theta_1pi_deg: theta_1pi.to_degrees(),
                theta_2pi_deg: theta_2pi.to_degrees(),
                z_1pi_ohm: z_1pi,
                z_2pi_ohm: z_2pi,
            },
            ShifterParams::TStructure {
                theta_1t,
                theta_2t,
                z_1t,
                z_2t,
            } => ShifterReport::TStructure {
                theta_1t_deg: theta_1t.to_degrees(),
                theta_2t_deg: theta_2t.to_degrees(),
                z_1t_ohm: z_1t,
                z_2t_ohm: z_2t,
            },
            ShifterParams::IdealLine { z } => ShifterReport::IdealLine {
                theta_deg: 90.0,
                z_ohm: z,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistorReport {
    pub r2_ohm: f64,
    pub r3_ohm: f64,
}

impl From<&IsolationResistors> for ResistorReport {
    fn from(r: &IsolationResistors) -> Self {
        ResistorReport {
            r2_ohm: r.r2,
            r3_ohm: r.r3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub dualband: f64,
    pub impedance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resistors: Option<f64>,
}

/// A solved design in interface units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub request: DesignRequest,
    pub device: Device,
    pub topology: Topology,
    pub spec: SpecReport,
    pub solution: SolutionReport,
    pub z_gamma_ohm: f64,
    pub shifter: ShifterReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resistors: Option<ResistorReport>,
    pub feasibility: FeasibilityReport,
    pub residuals: Residuals,
    pub warnings: Vec<String>,
}

impl DesignReport {
    pub fn new(request: &DesignRequest, d: &Design) -> Self {
        let s = &d.spec;
        let sol = &d.solution;
        DesignReport {
            request: request.clone(),
            device: s.device,
            topology: s.topology,
            spec: SpecReport {
                f1_hz: s.f1,
                f2_hz: s.f2,
                m: s.m(),
                k: s.k(),
                n1: s.n1,
                n2: s.n2,
                n1_db: linear_to_db(s.n1),
                n2_db: linear_to_db(s.n2),
                z0_ohm: s.z0,
            },
            solution: SolutionReport {
                theta_alpha_deg: sol.theta_alpha.to_degrees(),
                theta_beta_deg: sol.theta_beta.to_degrees(),
                phi1_deg: sol.phi1.to_degrees(),
                phi2_deg: sol.phi2.to_degrees(),
                z_alpha_ohm: sol.z_alpha,
                z_beta_ohm: sol.z_beta,
            },
            z_gamma_ohm: d.z_gamma,
            shifter: ShifterReport::from(&d.shifter),
            resistors: d.resistors.as_ref().map(ResistorReport::from),
            feasibility: d.feasibility.clone(),
            residuals: Residuals {
                dualband: sol.residual_dualband,
                impedance: sol.residual_impedance,
                resistors: d.resistors.map(|r| r.residual(s.z0)),
            },
            warnings: d.warnings.clone(),
        }
    }
}

/// Netlist branch in interface units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BranchJson {
    Tl {
        z: f64,
        theta_deg_at_f1: f64,
        from: String,
        to: String,
    },
    Stub {
        z: f64,
        theta_deg_at_f1: f64,
        node: String,
    },
    Csection {
        z_even: f64,
        z_odd: f64,
        theta_deg_at_f1: f64,
        from: String,
        to: String,
    },
    Resistor {
        r: f64,
        node: String,
    },
}

/// Netlist JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetlistJson {
    pub nodes: Vec<String>,
    pub ports: Vec<Port>,
    pub branches: Vec<BranchJson>,
    pub f1_hz: f64,
}

impl From<&Network> for NetlistJson {
    fn from(net: &Network) -> Self {
        let branches = net
            .branches()
            .iter()
            .map(|b| match b {
                Branch::Series {
                    element: Element::TlSection { z, theta_at_f1 },
                    from,
                    to,
                } => BranchJson::Tl {
                    z: *z,
                    theta_deg_at_f1: theta_at_f1.to_degrees(),
                    from: from.clone(),
                    to: to.clone(),
                },
                Branch::Series {
                    element:
                        Element::CSection {
                            z_even,
                            z_odd,
                            theta_at_f1,
                        },
                    from,
                    to,
                } => BranchJson::Csection {
                    z_even: *z_even,
                    z_odd: *z_odd,
                    theta_deg_at_f1: theta_at_f1.to_degrees(),
                    from: from.clone(),
                    to: to.clone(),
                },
                Branch::Shunt {
                    element: Element::OpenStub { z, theta_at_f1 },
                    node,
                } => BranchJson::Stub {
                    z: *z,
                    theta_deg_at_f1: theta_at_f1.to_degrees(),
                    node: node.clone(),
                },
                Branch::Shunt {
                    element: Element::ShuntResistor { r },
                    node,
                } => BranchJson::Resistor {
                    r: *r,
                    node: node.clone(),
                },
                other => unreachable!("network validation forbids {other:?}"),
            })
            .collect();
        NetlistJson {
            nodes: net.nodes().to_vec(),
            ports: net.ports().to_vec(),
            branches,
            f1_hz: net.f1_hz(),
        }
    }
}

impl TryFrom<NetlistJson> for Network {
    type Error = Error;

    fn try_from(j: NetlistJson) -> Result<Network> {
        let branches = j
            .branches
            .into_iter()
            .map(|b| match b {
                BranchJson::Tl {
                    z,
                    theta_deg_at_f1,
                    from,
                    to,
                } => Branch::Series {
                    element: Element::TlSection {
                        z,
                        theta_at_f1: theta_deg_at_f1.to_radians(),
                    },
                    from,
                    to,
                },
                BranchJson::Csection {
                    z_even,
                    z_odd,
                    theta_deg_at_f1,
                    from,
                    to,
                } => Branch::Series {
                    element: Element::CSection {
                        z_even,
                        z_odd,
                        theta_at_f1: theta_deg_at_f1.to_radians(),
                    },
                    from,
                    to,
                },
                BranchJson::Stub {
                    z,
                    theta_deg_at_f1,
                    node,
                } => Branch::Shunt {
                    element: Element::OpenStub {
                        z,
                        theta_at_f1: theta_deg_at_f1.to_radians(),
                    },
                    node,
                },
                BranchJson::Resistor { r, node } => Branch::Shunt {
                    element: Element::ShuntResistor { r },
                    node,
                },
            })
            .collect();
        Network::new(j.nodes, j.ports, branches, j.f1_hz)
    }
}

/// Parse a netlist JSON document into a validated network.
pub fn parse_netlist(text: &str) -> Result<Network> {
    let j: NetlistJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Network::try_from(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::build_network;

    fn golden_request() -> DesignRequest {
        serde_json::from_str(r#"{"topology": "c", "f1": 1e9, "f2": 2.4e9, "n1": 2, "n2": 0.5}"#)
            .unwrap()
    }

    #[test]
    fn request_defaults_and_report() {
        let req = golden_request();
        assert_eq!(req.device, Device::Rrc);
        assert_eq!(req.z0, 50.0);
        let d = req.design(&SolverOptions::default()).unwrap();
        let rep = DesignReport::new(&req, &d);
        assert!((rep.solution.theta_alpha_deg - 46.04).abs() < 0.01);
        let ShifterReport::CSection {
            theta_delta_deg, ..
        } = rep.shifter
        else {
            panic!()
        };
        assert!((theta_delta_deg - 52.94).abs() < 0.01);
        let text = serde_json::to_string(&rep).unwrap();
        let src: DesignSource = serde_json::from_str(&text).unwrap();
        assert!(matches!(src, DesignSource::Report(_)));
        assert_eq!(src.request(), &req);
    }

    #[test]
    fn ratio_forms() {
        let mut req = golden_request();
        req.n1 = None;
        req.n1_db = Some(3.0);
        assert!((req.spec().unwrap().n1 - 10f64.powf(0.3)).abs() < 1e-12);
        req.n1 = Some(2.0);
        assert!(req.spec().is_err());
        req.n1 = None;
        req.n1_db = None;
        assert!(req.spec().is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let r: std::result::Result<DesignRequest, _> = serde_json::from_str(
            r#"{"topology": "c", "f1": 1e9, "f2": 2e9, "n1": 1, "n2": 1, "bogus": 1}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn netlist_round_trip() {
        let mut req = golden_request();
        req.device = Device::Gpd;
        req.topology = Topology::Pi;
        let net = build_network(&req.design(&SolverOptions::default()).unwrap()).unwrap();
        let j = NetlistJson::from(&net);
        let text = serde_json::to_string_pretty(&j).unwrap();
        assert!(text.contains("\"kind\": \"stub\""));
        assert!(text.contains("\"theta_deg_at_f1\""));
        let back = parse_netlist(&text).unwrap();
        assert_eq!(back.nodes(), net.nodes());
        assert_eq!(back.branches().len(), net.branches().len());
        for (a, b) in back.branches().iter().zip(net.branches()) {
            let (ta, tb) = (
                a.element().theta_at(1e9, 1e9),
                b.element().theta_at(1e9, 1e9),
            );
            if let (Some(x), Some(y)) = (ta, tb) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn netlist_schema_example() {
        let text = r#"{"nodes": ["n1", "n2"], "ports": [{"node": "n1", "z0": 50.0}, {"node": "n2", "z0": 50.0}],
            "branches": [{"kind": "tl", "z": 44.8, "theta_deg_at_f1": 46.04, "from": "n1", "to": "n2"}], "f1_hz": 1.0e9}"#;
        let net = parse_netlist(text).unwrap();
        assert_eq!(net.ports().len(), 2);
        assert!(
            parse_netlist(r#"{"nodes": [], "ports": [], "branches": [], "f1_hz": 1e9}"#).is_err()
        );
    }
}
