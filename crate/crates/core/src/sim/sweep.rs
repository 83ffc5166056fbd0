//! Frequency sweeps, metric channels and the ideal design-frequency targets.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::{hz, sig6};
use crate::sim::nodal::{assemble_sparams, SMatrix};
use crate::types::{Device, FrequencyGrid, Network};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub freq_hz: f64,
    pub s: Option<SMatrix>,
    /// Error code when this point could not be evaluated.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub nports: usize,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.freq_hz).collect()
    }

    pub fn perturbed_count(&self) -> usize {
        self.points
            .iter()
            .filter(|p| p.s.as_ref().is_some_and(|s| s.perturbed))
            .count()
    }

    pub fn failed_count(&self) -> usize {
        self.points.iter().filter(|p| p.s.is_none()).count()
    }
}

/// Evaluate `net` at every grid point. Points are independent and computed
/// in parallel; failures become flagged gaps instead of aborting the sweep.
pub fn sweep(net: &Network, grid: &FrequencyGrid) -> SweepResult {
    let points = grid
        .points()
        .par_iter()
        .map(|&f| match assemble_sparams(net, f) {
            Ok(s) => SweepPoint {
                freq_hz: f,
                s: Some(s),
                error: None,
            },
            Err(e) => SweepPoint {
                freq_hz: f,
                s: None,
                error: Some(e.code().to_string()),
            },
        })
        .collect();
    SweepResult {
        nports: net.ports().len(),
        points,
    }
}

/// Which physical port plays which role (1-based port numbers).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleMap {
    pub input: usize,
    /// Output carrying `1 / sqrt(1 + n)` of the input amplitude.
    pub through: usize,
    /// Output carrying `sqrt(n / (1 + n))` of the input amplitude.
    pub coupled: usize,
    /// Difference port of a coupler; `None` for a divider.
    pub isolated: Option<usize>,
}

impl RoleMap {
    pub const RRC: RoleMap = RoleMap {
        input: 1,
        through: 2,
        coupled: 3,
        isolated: Some(4),
    };
    pub const GPD: RoleMap = RoleMap {
        input: 1,
        through: 2,
        coupled: 3,
        isolated: None,
    };

    pub fn for_device(device: Device) -> Self {
        match device {
            Device::Rrc => RoleMap::RRC,
            Device::Gpd => RoleMap::GPD,
        }
    }

    fn validate(&self, nports: usize) -> Result<()> {
        let mut ports = vec![self.input, self.through, self.coupled];
        ports.extend(self.isolated);
        if ports.iter().any(|&p| p == 0 || p > nports) {
            return Err(Error::RoleMapInvalid(format!(
                "port out of range 1..={nports}: {self:?}"
            )));
        }
        let mut sorted = ports.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != ports.len() {
            return Err(Error::RoleMapInvalid(format!(
                "ports must be distinct: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub unit: String,
    /// `None` where the sweep point failed.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricChannels {
    pub frequency_hz: Vec<f64>,
    pub channels: Vec<Channel>,
}

impl MetricChannels {
    pub fn channel(&self, name: &str) -> Option<&Channel> {
        self.channels.iter().find(|c| c.name == name)
    }

    /// Value of `name` at the grid point closest to `f`.
    pub fn value_near(&self, name: &str, f: f64) -> Option<f64> {
        let ch = self.channel(name)?;
        let i = self
            .frequency_hz
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - f).abs().total_cmp(&(b.1 - f).abs()))?
            .0;
        ch.values[i]
    }

    /// Wide CSV: `frequency_hz` followed by one column per channel in the
    /// fixed extraction order. Failed points leave empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frequency_hz");
        for c in &self.channels {
            out.push(',');
            out.push_str(&c.name);
        }
        out.push('\n');
        for (i, f) in self.frequency_hz.iter().enumerate() {
            out.push_str(&hz(*f));
            for c in &self.channels {
                out.push(',');
                if let Some(v) = c.values[i] {
                    out.push_str(&sig6(v));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Keep at most `max_points` samples, evenly strided. The last point is
    /// always kept.
    pub fn decimate(&self, max_points: usize) -> MetricChannels {
        let n = self.frequency_hz.len();
        if n <= max_points || max_points < 2 {
            return self.clone();
        }
        let stride = (n - 1).div_ceil(max_points - 1);
        let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
        if *idx.last().unwrap() != n - 1 {
            idx.push(n - 1);
        }
        MetricChannels {
            frequency_hz: idx.iter().map(|&i| self.frequency_hz[i]).collect(),
            channels: self
                .channels
                .iter()
                .map(|c| Channel {
                    name: c.name.clone(),
                    unit: c.unit.clone(),
                    values: idx.iter().map(|&i| c.values[i]).collect(),
                })
                .collect(),
        }
    }
}

pub fn mag_db(z: Complex64) -> f64 {
    20.0 * z.norm().log10()
}

/// Phase difference in degrees wrapped to `(-180, 180]`.
pub fn wrap_degrees(deg: f64) -> f64 {
    let mut w = deg.rem_euclid(360.0);
    if w > 180.0 {
        w -= 360.0;
    }
    w
}

fn phase_diff_deg(a: Complex64, b: Complex64) -> f64 {
    wrap_degrees((a.arg() - b.arg()).to_degrees())
}

/// Derive the standard channels from a sweep.
///
/// `imbalance_db` is the division ratio seen from the input,
/// `|S(coupled)|^2 / |S(through)|^2` in dB, so an ideal design reads
/// `10 log10(n)` at each design frequency. From the difference port the same
/// ratio is `|S(through)|^2 / |S(coupled)|^2`. Phase differences are
/// `angle S(through) - angle S(coupled)`, wrapped to `(-180, 180]`.
pub fn extract_metrics(sw: &SweepResult, roles: RoleMap) -> Result<MetricChannels> {
    roles.validate(sw.nports)?;
    type Metric = Box<dyn Fn(&SMatrix) -> f64>;
    let mut channels: Vec<(String, &str, Metric)> = Vec::new();
    for p in 1..=sw.nports {
        channels.push((
            format!("s{p}{p}_db"),
            "dB",
            Box::new(move |s: &SMatrix| mag_db(s.s(p, p))),
        ));
    }
    let (i, t, c) = (roles.input, roles.through, roles.coupled);
    channels.push((
        format!("s{t}{i}_db"),
        "dB",
        Box::new(move |s| mag_db(s.s(t, i))),
    ));
    channels.push((
        format!("s{c}{i}_db"),
        "dB",
        Box::new(move |s| mag_db(s.s(c, i))),
    ));
    channels.push((
        "imbalance_db".into(),
        "dB",
        Box::new(move |s| mag_db(s.s(c, i)) - mag_db(s.s(t, i))),
    ));
    channels.push((
        "phase_diff_deg".into(),
        "deg",
        Box::new(move |s| phase_diff_deg(s.s(t, i), s.s(c, i))),
    ));
    channels.push((
        "isolation_db".into(),
        "dB",
        Box::new(move |s| mag_db(s.s(t, c))),
    ));
    if let Some(x) = roles.isolated {
        channels.push((
            format!("s{x}{i}_db"),
            "dB",
            Box::new(move |s| mag_db(s.s(x, i))),
        ));
        channels.push((
            "imbalance_iso_db".into(),
            "dB",
            Box::new(move |s| mag_db(s.s(t, x)) - mag_db(s.s(c, x))),
        ));
        channels.push((
            "phase_diff_iso_deg".into(),
            "deg",
            Box::new(move |s| phase_diff_deg(s.s(t, x), s.s(c, x))),
        ));
    }

    Ok(MetricChannels {
        frequency_hz: sw.frequencies(),
        channels: channels
            .into_iter()
            .map(|(name, unit, f)| Channel {
                name,
                unit: unit.to_string(),
                values: sw.points.iter().map(|p| p.s.as_ref().map(&f)).collect(),
            })
            .collect(),
    })
}

/// Ideal scattering matrix at a design frequency, without the common phase
/// factor: the coupler target for 4 ports, the divider target for 3.
pub fn target_matrix(nports: usize, n: f64) -> Result<DMatrix<Complex64>> {
    let a = 1.0 / (1.0 + n).sqrt();
    let b = n.sqrt() * a;
    let rows: Vec<Vec<f64>> = match nports {
        4 => vec![
            vec![0.0, a, b, 0.0],
            vec![a, 0.0, 0.0, -b],
            vec![b, 0.0, 0.0, a],
            vec![0.0, -b, a, 0.0],
        ],
        3 => vec![vec![0.0, a, b], vec![a, 0.0, 0.0], vec![b, 0.0, 0.0]],
        _ => {
            return Err(Error::TopologyMismatch(format!(
                "no ideal target for a {nports}-port"
            )))
        }
    };
    Ok(DMatrix::from_fn(nports, nports, |i, j| {
        Complex64::new(rows[i][j], 0.0)
    }))
}

/// Largest entrywise deviation of `s` from the ideal target with ratio `n`,
/// after removing the common phase taken from `S21`.
pub fn design_frequency_error(s: &SMatrix, n: f64) -> Result<f64> {
    let target = target_matrix(s.nports(), n)?;
    let s21 = s.s(2, 1);
    if s21.norm() == 0.0 {
        return Ok(f64::INFINITY);
    }
    let phase = s21 / s21.norm();
    let mut worst = 0.0f64;
    for i in 0..s.nports() {
        for j in 0..s.nports() {
            worst = worst.max((s.data[(i, j)] - phase * target[(i, j)]).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::build::build_rrc_network;
    use crate::solver::{solve_ring, SolverOptions};
    use crate::types::{Branch, Element, Port, ShifterParams};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn phase_wrapping() {
        assert_eq!(wrap_degrees(180.0), 180.0);
        assert_eq!(wrap_degrees(-180.0), 180.0);
        assert!((wrap_degrees(190.0) + 170.0).abs() < 1e-12);
        assert!((wrap_degrees(-370.0) + 10.0).abs() < 1e-12);
    }

    #[test]
    fn single_point_sweep_equals_assembly() {
        let sol = solve_ring(2.0, 1.0, 1.0, 50.0, &SolverOptions::default()).unwrap();
        let net = build_rrc_network(
            &sol,
            &ShifterParams::IdealLine { z: sol.z_alpha },
            50.0,
            1e9,
        )
        .unwrap();
        let sw = sweep(&net, &FrequencyGrid::new(vec![1e9]).unwrap());
        assert_eq!(sw.points.len(), 1);
        assert_eq!(
            sw.points[0].s.as_ref().unwrap(),
            &assemble_sparams(&net, 1e9).unwrap()
        );
    }

    #[test]
    fn equal_split_has_zero_imbalance() {
        let sol = solve_ring(2.0, 1.0, 1.0, 50.0, &SolverOptions::default()).unwrap();
        let net = build_rrc_network(
            &sol,
            &ShifterParams::IdealLine { z: sol.z_alpha },
            50.0,
            1e9,
        )
        .unwrap();
        let sw = sweep(&net, &FrequencyGrid::new(vec![1e9]).unwrap());
        let m = extract_metrics(&sw, RoleMap::RRC).unwrap();
        assert!(m.value_near("imbalance_db", 1e9).unwrap().abs() < 1e-9);
        assert!(m.value_near("phase_diff_deg", 1e9).unwrap().abs() < 1e-6);
    }

    #[test]
    fn pole_on_grid_is_flagged() {
        // a half-wave line at f1 has a Y-parameter pole exactly at f1
        let net = Network::new(
            vec!["a".into(), "b".into()],
            vec![
                Port {
                    node: "a".into(),
                    z0: 50.0,
                },
                Port {
                    node: "b".into(),
                    z0: 50.0,
                },
            ],
            vec![Branch::Series {
                element: Element::TlSection {
                    z: 70.0,
                    theta_at_f1: PI,
                },
                from: "a".into(),
                to: "b".into(),
            }],
            1e9,
        )
        .unwrap();
        let grid = FrequencyGrid::new(vec![0.99e9, 1e9, 1.01e9]).unwrap();
        let sw = sweep(&net, &grid);
        assert_eq!(sw.perturbed_count(), 1);
        let s = sw.points[1].s.as_ref().unwrap();
        assert!(s.perturbed);
        // neighbouring offsets bracket the perturbed value
        for off in [1e-6, -1e-6] {
            let near = assemble_sparams(&net, 1e9 * (1.0 + off)).unwrap();
            assert!((near.s(2, 1) - s.s(2, 1)).norm() < 1e-4);
            assert!(!near.perturbed);
        }
    }

    #[test]
    fn role_map_validation() {
        let sol = solve_ring(2.0, 1.0, 1.0, 50.0, &SolverOptions::default()).unwrap();
        let net = build_rrc_network(
            &sol,
            &ShifterParams::IdealLine { z: sol.z_alpha },
            50.0,
            1e9,
        )
        .unwrap();
        let sw = sweep(&net, &FrequencyGrid::new(vec![1e9]).unwrap());
        let bad = RoleMap {
            input: 1,
            through: 1,
            coupled: 3,
            isolated: None,
        };
        assert!(matches!(
            extract_metrics(&sw, bad),
            Err(Error::RoleMapInvalid(_))
        ));
        let bad = RoleMap {
            input: 1,
            through: 2,
            coupled: 5,
            isolated: None,
        };
        assert!(extract_metrics(&sw, bad).is_err());
    }

    #[test]
    fn decimation_keeps_endpoints() {
        let m = MetricChannels {
            frequency_hz: (0..5000).map(|i| i as f64 + 1.0).collect(),
            channels: vec![Channel {
                name: "x".into(),
                unit: "dB".into(),
                values: (0..5000).map(|i| Some(i as f64)).collect(),
            }],
        };
        let d = m.decimate(2000);
        assert!(d.frequency_hz.len() <= 2000);
        assert_eq!(d.frequency_hz[0], 1.0);
        assert_eq!(*d.frequency_hz.last().unwrap(), 5000.0);
        let _ = FRAC_PI_2;
    }
}
