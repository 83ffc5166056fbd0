//! Shared value types: design intent, solved ring parameters, phase-shifter
//! parameters, circuit elements, multiport netlists and frequency grids.
//!
//! Internally everything is in Hz, ohms and radians. Degrees and dB only
//! appear at the I/O boundary (JSON, CLI, CSV).

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved node identifier for ground.
pub const GROUND: &str = "0";

/// Largest supported frequency ratio `f2 / f1`.
pub const MAX_FREQUENCY_RATIO: f64 = 10.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Dual-band 90-degree equivalent used in place of the quarter-wave lines of
/// the 180-degree path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    #[serde(alias = "c", alias = "C_SECTION")]
    CSection,
    #[serde(alias = "PI")]
    Pi,
    #[serde(alias = "T")]
    T,
    /// Plain quarter-wave lines; single-band reference design.
    #[serde(alias = "tl", alias = "IDEAL_TL")]
    IdealTl,
}

impl Topology {
    pub const DUAL_BAND: [Topology; 3] = [Topology::CSection, Topology::Pi, Topology::T];

    pub fn as_str(self) -> &'static str {
        match self {
            Topology::CSection => "c_section",
            Topology::Pi => "pi",
            Topology::T => "t",
            Topology::IdealTl => "ideal_tl",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c" | "c_section" | "csection" => Ok(Topology::CSection),
            "pi" => Ok(Topology::Pi),
            "t" => Ok(Topology::T),
            "tl" | "ideal_tl" => Ok(Topology::IdealTl),
            other => Err(Error::Parse(format!("unknown topology '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Device {
    #[serde(alias = "RRC")]
    Rrc,
    #[serde(alias = "GPD")]
    Gpd,
}

impl Device {
    pub fn as_str(self) -> &'static str {
        match self {
            Device::Rrc => "rrc",
            Device::Gpd => "gpd",
        }
    }
}

impl FromStr for Device {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rrc" => Ok(Device::Rrc),
            "gpd" => Ok(Device::Gpd),
            other => Err(Error::Parse(format!("unknown device '{other}'"))),
        }
    }
}

/// Design intent: two operating frequencies, the power-division ratio
/// `n = |S31|^2 / |S21|^2` required at each, and the port impedance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub f1: f64,
    pub f2: f64,
    /// Linear power-division ratio at `f1`.
    pub n1: f64,
    /// Linear power-division ratio at `f2`.
    pub n2: f64,
    pub z0: f64,
    /// Reference impedance of the phase shifters. `None` means the device
    /// default: the solved `Z_alpha` for a coupler, `z0` for a divider.
    #[serde(default)]
    pub z_gamma: Option<f64>,
    pub topology: Topology,
    pub device: Device,
}

impl DesignSpec {
    /// Build and validate a spec from linear power-division ratios.
    pub fn new(
        f1: f64,
        f2: f64,
        n1: f64,
        n2: f64,
        z0: f64,
        topology: Topology,
        device: Device,
    ) -> Result<Self> {
        let spec = DesignSpec {
            f1,
            f2,
            n1,
            n2,
            z0,
            z_gamma: None,
            topology,
            device,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_z_gamma(mut self, z_gamma: f64) -> Result<Self> {
        self.z_gamma = Some(z_gamma);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f1.is_finite() && self.f2.is_finite() && self.f1 > 0.0 && self.f2 > 0.0) {
            return Err(Error::NonPositiveFrequency {
                f1: self.f1,
                f2: self.f2,
            });
        }
        let m = self.m();
        if !(m > 1.0 && m <= MAX_FREQUENCY_RATIO) {
            return Err(Error::RatioOutOfRange { m });
        }
        for (name, n) in [("n1", self.n1), ("n2", self.n2)] {
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive and finite (got {n})"
                )));
            }
        }
        if !(self.z0.is_finite() && self.z0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "z0 must be positive (got {})",
                self.z0
            )));
        }
        if let Some(zg) = self.z_gamma {
            if !(zg.is_finite() && zg > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "z_gamma must be positive (got {zg})"
                )));
            }
        }
        Ok(())
    }

    /// Frequency ratio `f2 / f1`.
    pub fn m(&self) -> f64 {
        self.f2 / self.f1
    }

    /// Ratio of the two division ratios, `n2 / n1`.
    pub fn k(&self) -> f64 {
        self.n2 / self.n1
    }
}

/// Build a coupler spec with power-division ratios given in dB.
pub fn make_rrc_spec(
    f1: f64,
    f2: f64,
    n1_db: f64,
    n2_db: f64,
    z0: f64,
    topology: Topology,
) -> Result<DesignSpec> {
    if !(n1_db.is_finite() && n2_db.is_finite()) {
        return Err(Error::InvalidInput(
            "power-division ratios must be finite".into(),
        ));
    }
    DesignSpec::new(
        f1,
        f2,
        db_to_linear(n1_db),
        db_to_linear(n2_db),
        z0,
        topology,
        Device::Rrc,
    )
}

/// Solved electrical parameters of the ring, all referred to `f1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSolution {
    pub theta_alpha: f64,
    pub theta_beta: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub z_alpha: f64,
    pub z_beta: f64,
    /// Largest absolute residual of the two dual-band conditions.
    pub residual_dualband: f64,
    /// Largest relative disagreement between the `f1` and `f2` forms of the
    /// impedance expressions.
    pub residual_impedance: f64,
}

/// Parameters of a dual-band 90-degree equivalent network. Angles at `f1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShifterParams {
    CSection {
        theta_delta: f64,
        z_even: f64,
        z_odd: f64,
    },
    PiStructure {
        theta_1pi: f64,
        theta_2pi: f64,
        z_1pi: f64,
        z_2pi: f64,
    },
    TStructure {
        theta_1t: f64,
        theta_2t: f64,
        z_1t: f64,
        z_2t: f64,
    },
    /// A single quarter-wave line at `f1`.
    IdealLine { z: f64 },
}

impl ShifterParams {
    pub fn topology(&self) -> Topology {
        match self {
            ShifterParams::CSection { .. } => Topology::CSection,
            ShifterParams::PiStructure { .. } => Topology::Pi,
            ShifterParams::TStructure { .. } => Topology::T,
            ShifterParams::IdealLine { .. } => Topology::IdealTl,
        }
    }

    /// Named characteristic impedances, in ohms.
    pub fn impedances(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ShifterParams::CSection { z_even, z_odd, .. } => {
                vec![("z_even", z_even), ("z_odd", z_odd)]
            }
            ShifterParams::PiStructure { z_1pi, z_2pi, .. } => {
                vec![("z_1pi", z_1pi), ("z_2pi", z_2pi)]
            }
            ShifterParams::TStructure { z_1t, z_2t, .. } => vec![("z_1t", z_1t), ("z_2t", z_2t)],
            ShifterParams::IdealLine { z } => vec![("z", z)],
        }
    }
}

/// An ideal circuit element. Electrical lengths are stored at `f1` and scale
/// linearly with frequency; characteristic impedances do not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    /// Lossless transmission line between two nodes.
    TlSection { z: f64, theta_at_f1: f64 },
    /// Open-circuited stub hanging off a node.
    OpenStub { z: f64, theta_at_f1: f64 },
    /// Coupled-line pair with its far ends tied together (Schiffman section).
    CSection {
        z_even: f64,
        z_odd: f64,
        theta_at_f1: f64,
    },
    /// Resistor from a node to ground.
    ShuntResistor { r: f64 },
}

impl Element {
    /// Electrical length at frequency `f`, or `None` for resistors.
    pub fn theta_at(&self, f: f64, f1: f64) -> Option<f64> {
        match *self {
            Element::TlSection { theta_at_f1, .. }
            | Element::OpenStub { theta_at_f1, .. }
            | Element::CSection { theta_at_f1, .. } => Some(theta_at_f1 * (f / f1)),
            Element::ShuntResistor { .. } => None,
        }
    }

    pub fn is_two_port(&self) -> bool {
        matches!(self, Element::TlSection { .. } | Element::CSection { .. })
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let valid = match *self {
            Element::TlSection { z, theta_at_f1 } | Element::OpenStub { z, theta_at_f1 } => {
                ok(z) && ok(theta_at_f1)
            }
            Element::CSection {
                z_even,
                z_odd,
                theta_at_f1,
            } => ok(z_even) && ok(z_odd) && ok(theta_at_f1),
            Element::ShuntResistor { r } => ok(r),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidNetwork(format!(
                "element parameters must be positive and finite: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Port {
    pub node: String,
    pub z0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Branch {
    /// Two-port element between `from` and `to`, both referenced to ground.
    Series {
        element: Element,
        from: String,
        to: String,
    },
    /// One-terminal element from `node` to ground.
    Shunt { element: Element, node: String },
}

impl Branch {
    pub fn element(&self) -> &Element {
        match self {
            Branch::Series { element, .. } | Branch::Shunt { element, .. } => element,
        }
    }
}

/// Flattened multiport netlist of ideal elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<String>,
    ports: Vec<Port>,
    branches: Vec<Branch>,
    f1_hz: f64,
}

impl Network {
    pub fn new(
        nodes: Vec<String>,
        ports: Vec<Port>,
        branches: Vec<Branch>,
        f1_hz: f64,
    ) -> Result<Self> {
        if !(f1_hz.is_finite() && f1_hz > 0.0) {
            return Err(Error::InvalidNetwork(format!(
                "f1_hz must be positive (got {f1_hz})"
            )));
        }
        let mut index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if n == GROUND {
                return Err(Error::InvalidNetwork(
                    "ground '0' must not be listed as a node".into(),
                ));
            }
            if index.insert(n.as_str(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate node '{n}'")));
            }
        }
        if ports.is_empty() {
            return Err(Error::InvalidNetwork("network has no ports".into()));
        }
        let mut seen = HashSet::new();
        for p in &ports {
            if !index.contains_key(p.node.as_str()) {
                return Err(Error::InvalidNetwork(format!(
                    "port node '{}' is not a node",
                    p.node
                )));
            }
            if !seen.insert(p.node.as_str()) {
                return Err(Error::InvalidNetwork(format!(
                    "node '{}' used by more than one port",
                    p.node
                )));
            }
            if !(p.z0.is_finite() && p.z0 > 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "port '{}' has invalid z0 {}",
                    p.node, p.z0
                )));
            }
        }

        let mut adjacency = vec![Vec::new(); nodes.len()];
        let lookup = |name: &str| -> Result<usize> {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidNetwork(format!("unknown node '{name}'")))
        };
        for b in &branches {
            b.element().validate()?;
            match b {
                Branch::Series { element, from, to } => {
                    if !element.is_two_port() {
                        return Err(Error::InvalidNetwork(format!(
                            "{element:?} cannot be placed in series"
                        )));
                    }
                    let (a, c) = (lookup(from)?, lookup(to)?);
                    if a == c {
                        return Err(Error::InvalidNetwork(format!(
                            "series element loops on node '{from}'"
                        )));
                    }
                    adjacency[a].push(c);
                    adjacency[c].push(a);
                }
                Branch::Shunt { element, node } => {
                    if element.is_two_port() {
                        return Err(Error::InvalidNetwork(format!(
                            "{element:?} cannot be placed as a shunt"
                        )));
                    }
                    lookup(node)?;
                }
            }
        }

        // every node must be reachable from the ports through series elements
        let mut visited = vec![false; nodes.len()];
        let start = index[ports[0].node.as_str()];
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(n) = queue.pop_front() {
            for &next in &adjacency[n] {
                if !visited[next] {
                    visited[next] = true;
                    queue.push_back(next);
                }
            }
        }
        if let Some(i) = visited.iter().position(|v| !v) {
            return Err(Error::InvalidNetwork(format!(
                "node '{}' is not connected to the ports",
                nodes[i]
            )));
        }

        Ok(Network {
            nodes,
            ports,
            branches,
            f1_hz,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn f1_hz(&self) -> f64 {
        self.f1_hz
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn count_elements(&self, pred: impl Fn(&Element) -> bool) -> usize {
        self.branches.iter().filter(|b| pred(b.element())).count()
    }
}

/// Strictly increasing list of positive frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyGrid(Vec<f64>);

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("frequency grid is empty".into()));
        }
        if points.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidInput(
                "frequencies must be positive and finite".into(),
            ));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "frequencies must be strictly increasing".into(),
            ));
        }
        Ok(FrequencyGrid(points))
    }

    /// `points` evenly spaced frequencies from `start` to `stop` inclusive.
    pub fn linear(start: f64, stop: f64, points: usize) -> Result<Self> {
        match points {
            0 => Err(Error::InvalidInput("grid needs at least one point".into())),
            1 => FrequencyGrid::new(vec![start]),
            _ => {
                if stop <= start {
                    return Err(Error::InvalidInput(
                        "stop frequency must exceed start".into(),
                    ));
                }
                let step = (stop - start) / (points - 1) as f64;
                FrequencyGrid::new((0..points).map(|i| start + step * i as f64).collect())
            }
        }
    }

    /// Default sweep: 201 points from `0.5 f1` to `1.25 f2`.
    pub fn default_for(f1: f64, f2: f64) -> Result<Self> {
        FrequencyGrid::linear(0.5 * f1, 1.25 * f2, 201)
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for FrequencyGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        FrequencyGrid::new(v)
    }
}

impl From<FrequencyGrid> for Vec<f64> {
    fn from(g: FrequencyGrid) -> Self {
        g.0
    }
}
