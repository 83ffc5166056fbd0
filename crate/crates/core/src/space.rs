//! Design-space sweeps over the frequency ratio `m` and ratio-of-ratios `k`.
//!
//! Each `k` curve walks `m` in ascending order and warm-starts the solver
//! from the previous point, which keeps every curve on one continuous branch.
//! Curves are independent and run in parallel. Cells that fail are flagged,
//! never fatal, so tables keep their shape and plots show gaps.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig6;
use crate::shifter::{self, check_feasibility, ImpedanceWindow};
use crate::solver::{
    ring_from_lengths, solve_electrical_lengths, solve_electrical_lengths_from, SolverOptions,
};
use crate::types::{ShifterParams, Topology, MAX_FREQUENCY_RATIO};

/// Ring impedances outside this band are flagged as unrealizable.
pub const PLAUSIBLE_IMPEDANCE: (f64, f64) = (5.0, 500.0);

/// Inclusive, evenly stepped range of frequency ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl MRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let r = MRange { start, stop, step };
        r.validate()?;
        Ok(r)
    }

    /// The published-figure domain `1.1 ..= 3.0` in steps of `0.01`.
    pub fn figure_default() -> Self {
        MRange {
            start: 1.1,
            stop: 3.0,
            step: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.start.is_finite() && self.stop.is_finite() && self.step.is_finite();
        if !ok
            || self.start <= 1.0
            || self.stop < self.start
            || self.stop > MAX_FREQUENCY_RATIO
            || self.step <= 0.0
        {
            return Err(Error::InvalidInput(format!(
                "m range must satisfy 1 < start <= stop <= {MAX_FREQUENCY_RATIO} with a positive step (got {self:?})"
            )));
        }
        if (self.stop - self.start) / self.step > 1e6 {
            return Err(Error::InvalidInput("m range has too many points".into()));
        }
        Ok(())
    }

    /// Grid points, computed as `start + i step` and rounded to 12 decimals
    /// so that nominal values such as 2.4 come out exact.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| ((self.start + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

/// Parse a comma-separated `k` list such as `"1,2,4,10"`.
pub fn parse_k_list(text: &str) -> Result<Vec<f64>> {
    let ks = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad k value '{}'", t.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    normalize_k_set(&ks)
}

/// Sorted, de-duplicated `k` values; rejects non-positive entries.
pub fn normalize_k_set(ks: &[f64]) -> Result<Vec<f64>> {
    if ks.is_empty() {
        return Err(Error::InvalidInput("k set is empty".into()));
    }
    if let Some(bad) = ks.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "k values must be positive and finite (got {bad})"
        )));
    }
    let mut v = ks.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShifterCell {
    pub params: ShifterParams,
    pub feasible: bool,
}

/// One `(m, k)` cell. Angles in radians, impedances in ohms. Fields are
/// `None` when the corresponding stage failed; `flag` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceRow {
    pub m: f64,
    pub k: f64,
    pub converged: bool,
    pub theta_alpha: Option<f64>,
    pub theta_beta: Option<f64>,
    pub phi1: Option<f64>,
    pub phi2: Option<f64>,
    pub z_alpha: Option<f64>,
    pub z_beta: Option<f64>,
    pub residual_dualband: Option<f64>,
    pub residual_impedance: Option<f64>,
    pub shifter: Option<ShifterCell>,
    pub flag: Option<String>,
}

impl SpaceRow {
    fn empty(m: f64, k: f64, flag: String) -> Self {
        SpaceRow {
            m,
            k,
            converged: false,
            theta_alpha: None,
            theta_beta: None,
            phi1: None,
            phi2: None,
            z_alpha: None,
            z_beta: None,
            residual_dualband: None,
            residual_impedance: None,
            shifter: None,
            flag: Some(flag),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Figure {
    Lengths,
    Impedances,
    Shifter(Topology),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTable {
    pub n1: f64,
    pub z0: f64,
    pub topology: Option<Topology>,
    pub window: Option<ImpedanceWindow>,
    pub rows: Vec<SpaceRow>,
}

fn curve(ms: &[f64], k: f64, n1: f64, z0: f64, opts: &SolverOptions) -> Vec<SpaceRow> {
    let mut seed: Option<(f64, f64)> = None;
    ms.iter()
        .map(|&m| {
            let solved = match seed {
                Some(s) => solve_electrical_lengths_from(m, k, s, opts),
                None => solve_electrical_lengths(m, k, opts),
            };
            let (ta, tb) = match solved {
                Ok(p) => p,
                Err(e) => {
                    seed = None;
                    return SpaceRow::empty(m, k, e.code().to_string());
                }
            };
            seed = Some((ta, tb));
            let mut row = SpaceRow::empty(m, k, String::new());
            row.flag = None;
            row.theta_alpha = Some(ta);
            row.theta_beta = Some(tb);
            match ring_from_lengths(ta, tb, m, n1, n1 * k, z0) {
                Ok(sol) => {
                    row.converged = true;
                    row.phi1 = Some(sol.phi1);
                    row.phi2 = Some(sol.phi2);
                    row.z_alpha = Some(sol.z_alpha);
                    row.z_beta = Some(sol.z_beta);
                    row.residual_dualband = Some(sol.residual_dualband);
                    row.residual_impedance = Some(sol.residual_impedance);
                    let (lo, hi) = PLAUSIBLE_IMPEDANCE;
                    if [sol.z_alpha, sol.z_beta].iter().any(|z| *z < lo || *z > hi) {
                        row.flag = Some("impedance_out_of_range".into());
                    }
                }
                Err(e) => row.flag = Some(e.code().to_string()),
            }
            row
        })
        .collect()
}

fn run(ms: &MRange, ks: &[f64], n1: f64, z0: f64, opts: &SolverOptions) -> Result<Vec<SpaceRow>> {
    ms.validate()?;
    opts.validate()?;
    if !(n1.is_finite() && n1 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "n1 must be positive and finite (got {n1})"
        )));
    }
    if !(z0.is_finite() && z0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "z0 must be positive (got {z0})"
        )));
    }
    let ks = normalize_k_set(ks)?;
    let points = ms.points();
    let curves: Vec<Vec<SpaceRow>> = ks
        .par_iter()
        .map(|&k| curve(&points, k, n1, z0, opts))
        .collect();
    Ok(curves.into_iter().flatten().collect())
}

/// Ring lengths over the grid, for `n1 = 1` and a 50 ohm reference.
pub fn sweep_lengths(ms: &MRange, ks: &[f64], opts: &SolverOptions) -> Result<SpaceTable> {
    sweep_impedances(ms, ks, 1.0, 50.0, opts)
}

/// Lengths, phase shifts and ring impedances over the grid.
pub fn sweep_impedances(
    ms: &MRange,
    ks: &[f64],
    n1: f64,
    z0: f64,
    opts: &SolverOptions,
) -> Result<SpaceTable> {
    Ok(SpaceTable {
        n1,
        z0,
        topology: None,
        window: None,
        rows: run(ms, ks, n1, z0, opts)?,
    })
}

/// Shifter parameters over the grid, synthesized with `Z_gamma = Z_alpha`,
/// and the feasibility verdict of each cell under `window`.
pub fn sweep_shifter(
    topology: Topology,
    ms: &MRange,
    ks: &[f64],
    n1: f64,
    z0: f64,
    window: ImpedanceWindow,
    opts: &SolverOptions,
) -> Result<SpaceTable> {
    window.validate()?;
    let mut rows = run(ms, ks, n1, z0, opts)?;
    for row in rows.iter_mut().filter(|r| r.converged) {
        let za = row.z_alpha.expect("converged rows carry impedances");
        match shifter::synth(topology, row.m, za) {
            Ok(params) => {
                let feasible = check_feasibility(&params, window).feasible;
                row.shifter = Some(ShifterCell { params, feasible });
            }
            Err(e) => row.flag = Some(e.code().to_string()),
        }
    }
    Ok(SpaceTable {
        n1,
        z0,
        topology: Some(topology),
        window: Some(window),
        rows,
    })
}

/// Run the sweep behind one of the published figures.
pub fn sweep_figure(
    figure: Figure,
    ms: &MRange,
    ks: &[f64],
    n1: f64,
    z0: f64,
    window: ImpedanceWindow,
    opts: &SolverOptions,
) -> Result<SpaceTable> {
    match figure {
        Figure::Lengths => sweep_lengths(ms, ks, opts),
        Figure::Impedances => sweep_impedances(ms, ks, n1, z0, opts),
        Figure::Shifter(t) => sweep_shifter(t, ms, ks, n1, z0, window, opts),
    }
}

/// Maximal runs of consecutive feasible `m` values on the curve for `k`,
/// as closed intervals `[first, last]`.
pub fn feasible_intervals(table: &SpaceTable, k: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut run: Option<(f64, f64)> = None;
    for row in table.rows.iter().filter(|r| r.k == k) {
        let ok = row.shifter.as_ref().is_some_and(|s| s.feasible);
        run = match (run, ok) {
            (None, true) => Some((row.m, row.m)),
            (Some((a, _)), true) => Some((a, row.m)),
            (Some(r), false) => {
                out.push(r);
                None
            }
            (None, false) => None,
        };
    }
    out.extend(run);
    out
}

/// True when some feasible interval for `k` covers `[lo, hi]`.
pub fn covers(table: &SpaceTable, k: f64, lo: f64, hi: f64) -> bool {
    feasible_intervals(table, k)
        .iter()
        .any(|&(a, b)| a <= lo + 1e-9 && b >= hi - 1e-9)
}

fn shifter_columns(topology: Topology) -> &'static [&'static str] {
    match topology {
        Topology::CSection => &["theta_delta_deg", "z_even_ohm", "z_odd_ohm", "feasible"],
        Topology::Pi => &[
            "theta_1pi_deg",
            "theta_2pi_deg",
            "z_1pi_ohm",
            "z_2pi_ohm",
            "feasible",
        ],
        Topology::T => &[
            "theta_1t_deg",
            "theta_2t_deg",
            "z_1t_ohm",
            "z_2t_ohm",
            "feasible",
        ],
        Topology::IdealTl => &["z_ohm", "feasible"],
    }
}

fn shifter_values(p: &ShifterParams) -> Vec<f64> {
    match *p {
        ShifterParams::CSection {
            theta_delta,
            z_even,
            z_odd,
        } => vec![theta_delta.to_degrees(), z_even, z_odd],
        ShifterParams::PiStructure {
            theta_1pi,
            theta_2pi,
            z_1pi,
            z_2pi,
        } => {
            vec![theta_1pi.to_degrees(), theta_2pi.to_degrees(), z_1pi, z_2pi]
        }
        ShifterParams::TStructure {
            theta_1t,
            theta_2t,
            z_1t,
            z_2t,
        } => {
            vec![theta_1t.to_degrees(), theta_2t.to_degrees(), z_1t, z_2t]
        }
        ShifterParams::IdealLine { z } => vec![z],
    }
}

impl SpaceTable {
    /// CSV with the fixed ring columns, then any shifter columns, then `flag`.
    /// Empty cells mark values that could not be computed.
    pub fn to_csv(&self) -> String {
        let mut header: Vec<&str> = vec![
            "m",
            "k",
            "theta_alpha_deg",
            "theta_beta_deg",
            "phi1_deg",
            "phi2_deg",
            "z_alpha_ohm",
            "z_beta_ohm",
            "converged",
        ];
        if let Some(t) = self.topology {
            header.extend_from_slice(shifter_columns(t));
        }
        header.push("flag");
        let mut out = header.join(",");
        out.push('\n');
        let opt = |v: Option<f64>, deg: bool| {
            v.map(|x| sig6(if deg { x.to_degrees() } else { x }))
                .unwrap_or_default()
        };
        for r in &self.rows {
            let mut cells = vec![
                sig6(r.m),
                sig6(r.k),
                opt(r.theta_alpha, true),
                opt(r.theta_beta, true),
                opt(r.phi1, true),
                opt(r.phi2, true),
                opt(r.z_alpha, false),
                opt(r.z_beta, false),
                r.converged.to_string(),
            ];
            if let Some(t) = self.topology {
                match &r.shifter {
                    Some(cell) => {
                        cells.extend(shifter_values(&cell.params).into_iter().map(sig6));
                        cells.push(cell.feasible.to_string());
                    }
                    None => {
                        cells.extend(std::iter::repeat_n(String::new(), shifter_columns(t).len()))
                    }
                }
            }
            cells.push(r.flag.clone().unwrap_or_default());
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_list_parsing() {
        assert_eq!(
            parse_k_list("4, 1,2,10,2").unwrap(),
            vec![1.0, 2.0, 4.0, 10.0]
        );
        for bad in ["", "1,,2", "1,x", "0", "-1,2"] {
            assert!(parse_k_list(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn range_points_are_clean() {
        let r = MRange::figure_default();
        let p = r.points();
        assert_eq!(p.len(), 191);
        assert_eq!(p[0], 1.1);
        assert_eq!(p[130], 2.4);
        assert_eq!(*p.last().unwrap(), 3.0);
        assert!(MRange::new(1.0, 2.0, 0.1).is_err());
        assert!(MRange::new(2.0, 1.5, 0.1).is_err());
    }

    #[test]
    fn rows_ordered_by_k_then_m() {
        let t = sweep_lengths(
            &MRange::new(1.5, 2.5, 0.1).unwrap(),
            &[4.0, 1.0, 2.0, 1.0],
            &SolverOptions::default(),
        )
        .unwrap();
        let keys: Vec<(f64, f64)> = t.rows.iter().map(|r| (r.k, r.m)).collect();
        for w in keys.windows(2) {
            assert!(w[0] < w[1], "{w:?}");
        }
        assert_eq!(t.rows.len(), 33);
    }

    #[test]
    fn equal_ratio_curve_is_closed_form() {
        let t =
            sweep_lengths(&MRange::figure_default(), &[1.0], &SolverOptions::default()).unwrap();
        for r in &t.rows {
            let expect = 180.0 / (1.0 + r.m);
            assert!(
                (r.theta_alpha.unwrap().to_degrees() - expect).abs() < 1e-8,
                "m={}",
                r.m
            );
            assert!((r.theta_beta.unwrap().to_degrees() - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn m_three_is_flagged_not_fatal() {
        let t = sweep_lengths(
            &MRange::new(2.9, 3.0, 0.1).unwrap(),
            &[2.0],
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows[0].converged);
        assert!(!t.rows[1].converged);
        assert!(t.rows[1].flag.is_some());
    }

    #[test]
    fn bad_inputs_rejected() {
        let r = MRange::figure_default();
        assert!(sweep_lengths(&r, &[], &SolverOptions::default()).is_err());
        assert!(sweep_lengths(&r, &[0.0], &SolverOptions::default()).is_err());
        assert!(sweep_impedances(&r, &[1.0], 0.0, 50.0, &SolverOptions::default()).is_err());
    }

    #[test]
    fn intervals_from_flags() {
        let mk = |m: f64, ok: bool| {
            let mut row = SpaceRow::empty(m, 1.0, String::new());
            row.shifter = Some(ShifterCell {
                params: ShifterParams::IdealLine { z: 50.0 },
                feasible: ok,
            });
            row
        };
        let table = SpaceTable {
            n1: 1.0,
            z0: 50.0,
            topology: Some(Topology::IdealTl),
            window: None,
            rows: vec![
                mk(1.0, false),
                mk(1.1, true),
                mk(1.2, true),
                mk(1.3, false),
                mk(1.4, true),
            ],
        };
        assert_eq!(
            feasible_intervals(&table, 1.0),
            vec![(1.1, 1.2), (1.4, 1.4)]
        );
        assert!(covers(&table, 1.0, 1.1, 1.2));
        assert!(!covers(&table, 1.0, 1.1, 1.4));
    }

    #[test]
    fn csv_shape() {
        let t = sweep_shifter(
            Topology::CSection,
            &MRange::new(2.0, 2.2, 0.1).unwrap(),
            &[1.0],
            1.0,
            50.0,
            ImpedanceWindow::default(),
            &SolverOptions::default(),
        )
        .unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[0],
            "m,k,theta_alpha_deg,theta_beta_deg,phi1_deg,phi2_deg,z_alpha_ohm,z_beta_ohm,converged,theta_delta_deg,z_even_ohm,z_odd_ohm,feasible,flag"
        );
        assert!(lines[1].starts_with("2,1,60,60,"));
        assert_eq!(lines[1].split(',').count(), 14);
    }
}
