//! Simulation and polarization reports shared by the command line and the
//! HTTP service.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{DesignReport, DesignRequest, ShifterReport};
use crate::polarization::{polarization_report, FeedDelay, PolarizationReport};
use crate::shifter::ImpedanceWindow;
use crate::sim::sweep::mag_db;
use crate::sim::{
    assemble_sparams, build_network, design_frequency_error, extract_metrics, sweep,
    MetricChannels, RoleMap, SweepResult,
};
use crate::solver::{Design, SolverOptions};
use crate::space::{feasible_intervals, normalize_k_set, sweep_figure, Figure, MRange, SpaceTable};
use crate::types::{FrequencyGrid, Topology};

/// Channel payload bound for charting clients.
pub const MAX_CHART_POINTS: usize = 2000;

/// Largest supported sweep.
pub const MAX_GRID_POINTS: usize = 100_000;

/// Linear frequency grid. Missing bounds default to `0.5 f1 .. 1.25 f2`
/// and missing `points` to 201.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRequest {
    #[serde(default, alias = "fstart", skip_serializing_if = "Option::is_none")]
    pub fstart_hz: Option<f64>,
    #[serde(default, alias = "fstop", skip_serializing_if = "Option::is_none")]
    pub fstop_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl GridRequest {
    pub fn resolve(&self, f1: f64, f2: f64) -> Result<FrequencyGrid> {
        let points = self.points.unwrap_or(201);
        if points > MAX_GRID_POINTS {
            return Err(Error::InvalidInput(format!(
                "at most {MAX_GRID_POINTS} grid points (got {points})"
            )));
        }
        let start = self.fstart_hz.unwrap_or(0.5 * f1);
        let stop = self.fstop_hz.unwrap_or(1.25 * f2);
        FrequencyGrid::linear(start, stop, points)
    }
}

/// Agreement with the ideal scattering matrix at one design frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactnessCheck {
    pub frequency_hz: f64,
    pub division_ratio: f64,
    /// Largest entrywise deviation after removing the common phase.
    pub max_error: f64,
    pub s11_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedPoint {
    pub frequency_hz: f64,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub design: DesignReport,
    pub nports: usize,
    pub points: usize,
    pub perturbed_points: usize,
    pub failed_points: Vec<FailedPoint>,
    pub exactness: Vec<ExactnessCheck>,
    pub metrics: MetricChannels,
}

/// A solved design together with its sweep.
pub struct Simulation {
    pub design: Design,
    pub sweep: SweepResult,
    pub report: SimulationReport,
}

/// Exactness at both design frequencies.
pub fn exactness(design: &Design) -> Result<Vec<ExactnessCheck>> {
    let net = build_network(design)?;
    let spec = &design.spec;
    [(spec.f1, spec.n1), (spec.f2, spec.n2)]
        .into_iter()
        .map(|(f, n)| {
            let s = assemble_sparams(&net, f)?;
            Ok(ExactnessCheck {
                frequency_hz: f,
                division_ratio: n,
                max_error: design_frequency_error(&s, n)?,
                s11_db: mag_db(s.s(1, 1)),
            })
        })
        .collect()
}

/// Solve `request`, sweep it over `grid` and summarise. Metric channels are
/// decimated to at most `max_chart_points` samples; pass `usize::MAX` to keep
/// every point.
pub fn simulate(
    request: &DesignRequest,
    grid: &FrequencyGrid,
    max_chart_points: usize,
    opts: &SolverOptions,
) -> Result<Simulation> {
    let design = request.design(opts)?;
    let net = build_network(&design)?;
    let sw = sweep(&net, grid);
    let metrics =
        extract_metrics(&sw, RoleMap::for_device(design.spec.device))?.decimate(max_chart_points);
    let failed_points = sw
        .points
        .iter()
        .filter_map(|p| {
            p.error.as_ref().map(|c| FailedPoint {
                frequency_hz: p.freq_hz,
                code: c.clone(),
            })
        })
        .collect();
    let report = SimulationReport {
        design: DesignReport::new(request, &design),
        nports: sw.nports,
        points: sw.points.len(),
        perturbed_points: sw.perturbed_count(),
        failed_points,
        exactness: exactness(&design)?,
        metrics,
    };
    Ok(Simulation {
        design,
        sweep: sw,
        report,
    })
}

/// Feed polarization with input `port` driven, at each frequency in
/// `frequencies` (both design frequencies when empty).
pub fn polarization(
    request: &DesignRequest,
    port: usize,
    delay: FeedDelay,
    frequencies: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<PolarizationReport>> {
    let design = request.design(opts)?;
    let net = build_network(&design)?;
    let spec = &design.spec;
    let fs: Vec<f64> = if frequencies.is_empty() {
        vec![spec.f1, spec.f2]
    } else {
        frequencies.to_vec()
    };
    fs.iter()
        .map(|&f| {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "frequency must be positive (got {f})"
                )));
            }
            polarization_report(&assemble_sparams(&net, f)?, port, delay, spec.f1)
        })
        .collect()
}

/// Parameters of a design-space sweep. Defaults reproduce the published
/// figures: `m` from 1.1 to 3.0 in steps of 0.01, `k` in {1, 2, 4, 10},
/// `n1 = 1`, 50 ohm and a [20, 150] ohm window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceQuery {
    #[serde(default = "default_k")]
    pub k: Vec<f64>,
    #[serde(default = "default_m_start")]
    pub m_start: f64,
    #[serde(default = "default_m_stop")]
    pub m_stop: f64,
    #[serde(default = "default_m_step")]
    pub m_step: f64,
    #[serde(default = "default_n1")]
    pub n1: f64,
    #[serde(default = "default_z0")]
    pub z0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<ImpedanceWindow>,
}

fn default_k() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 10.0]
}
fn default_m_start() -> f64 {
    1.1
}
fn default_m_stop() -> f64 {
    3.0
}
fn default_m_step() -> f64 {
    0.01
}
fn default_n1() -> f64 {
    1.0
}
fn default_z0() -> f64 {
    50.0
}

impl Default for SpaceQuery {
    fn default() -> Self {
        SpaceQuery {
            k: default_k(),
            m_start: default_m_start(),
            m_stop: default_m_stop(),
            m_step: default_m_step(),
            n1: default_n1(),
            z0: default_z0(),
            topology: None,
            window: None,
        }
    }
}

/// Which published panel a sweep reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    Lengths,
    Impedances,
    Shifter,
}

impl std::str::FromStr for FigureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lengths" => Ok(FigureKind::Lengths),
            "impedances" => Ok(FigureKind::Impedances),
            "shifter" => Ok(FigureKind::Shifter),
            other => Err(Error::Parse(format!(
                "unknown figure '{other}' (lengths, impedances or shifter)"
            ))),
        }
    }
}

/// Default window for feasibility maps.
pub const FIGURE_WINDOW: ImpedanceWindow = ImpedanceWindow::new(20.0, 150.0);

impl SpaceQuery {
    pub fn run(&self, kind: FigureKind, opts: &SolverOptions) -> Result<SpaceTable> {
        let ms = MRange::new(self.m_start, self.m_stop, self.m_step)?;
        let ks = normalize_k_set(&self.k)?;
        if !(self.n1.is_finite() && self.n1 > 0.0 && self.z0.is_finite() && self.z0 > 0.0) {
            return Err(Error::InvalidInput("n1 and z0 must be positive".into()));
        }
        let figure = match kind {
            FigureKind::Lengths => Figure::Lengths,
            FigureKind::Impedances => Figure::Impedances,
            FigureKind::Shifter => match self.topology {
                Some(t) if t != Topology::IdealTl => Figure::Shifter(t),
                _ => {
                    return Err(Error::InvalidInput(
                        "shifter sweep needs topology c, pi or t".into(),
                    ))
                }
            },
        };
        sweep_figure(
            figure,
            &ms,
            &ks,
            self.n1,
            self.z0,
            self.window.unwrap_or(FIGURE_WINDOW),
            opts,
        )
    }
}

/// One sweep cell in interface units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceRowReport {
    pub m: f64,
    pub k: f64,
    pub converged: bool,
    pub theta_alpha_deg: Option<f64>,
    pub theta_beta_deg: Option<f64>,
    pub phi1_deg: Option<f64>,
    pub phi2_deg: Option<f64>,
    pub z_alpha_ohm: Option<f64>,
    pub z_beta_ohm: Option<f64>,
    pub residual_dualband: Option<f64>,
    pub residual_impedance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifter: Option<ShifterReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible: Option<bool>,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleIntervals {
    pub k: f64,
    pub intervals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceReport {
    pub figure: FigureKind,
    pub n1: f64,
    pub z0_ohm: f64,
    pub topology: Option<Topology>,
    pub window: Option<ImpedanceWindow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feasible_intervals: Vec<FeasibleIntervals>,
    pub rows: Vec<SpaceRowReport>,
}

impl SpaceReport {
    pub fn new(figure: FigureKind, t: &SpaceTable) -> Self {
        let deg = |v: Option<f64>| v.map(f64::to_degrees);
        let rows = t
            .rows
            .iter()
            .map(|r| SpaceRowReport {
                m: r.m,
                k: r.k,
                converged: r.converged,
                theta_alpha_deg: deg(r.theta_alpha),
                theta_beta_deg: deg(r.theta_beta),
                phi1_deg: deg(r.phi1),
                phi2_deg: deg(r.phi2),
                z_alpha_ohm: r.z_alpha,
                z_beta_ohm: r.z_beta,
                residual_dualband: r.residual_dualband,
                residual_impedance: r.residual_impedance,
                shifter: r.shifter.as_ref().map(|c| ShifterReport::from(&c.params)),
                feasible: r.shifter.as_ref().map(|c| c.feasible),
                flag: r.flag.clone(),
            })
            .collect();
        let mut ks: Vec<f64> = t.rows.iter().map(|r| r.k).collect();
        ks.dedup();
        let feasible_intervals = if t.topology.is_some() {
            ks.iter()
                .map(|&k| FeasibleIntervals {
                    k,
                    intervals: feasible_intervals(t, k),
                })
                .collect()
        } else {
            Vec::new()
        };
        SpaceReport {
            figure,
            n1: t.n1,
            z0_ohm: t.z0,
            topology: t.topology,
            window: t.window,
            feasible_intervals,
            rows,
        }
    }
}
