//! Dual-band ring conditions and complete coupler/divider designs.
//!
//! The two ring lengths `theta_alpha`, `theta_beta` (at `f1`) must satisfy
//!
//! ```text
//! sin(m tb) / sin(tb) = sqrt(k) sin(m ta) / sin(ta)
//! cos(m (ta - tb)) / cos(ta - tb) = cos(m (ta + tb)) / cos(ta + tb)
//! ```
//!
//! At `k = 1` the root is `ta = tb = pi / (1 + m)`. For other `k` the solver
//! starts from that closed form and continues in `ln k` with damped Newton
//! steps, which keeps it on the branch that connects to the equal-ratio
//! design. A coarse grid scan is the fallback when continuation stalls.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shifter::{self, FeasibilityReport, ImpedanceWindow};
use crate::types::{DesignSpec, Device, RingSolution, ShifterParams};

/// Points closer than this to a zero of a denominator are rejected.
const NEAR_SINGULAR: f64 = 1e-9;
/// Central-difference step of the numerical Jacobian, radians.
const JACOBIAN_STEP: f64 = 1e-7;
/// Maximum relative disagreement tolerated between the two frequency forms of
/// the impedance expressions.
pub const IMPEDANCE_CONSISTENCY_TOL: f64 = 1e-8;
/// Phase shifts closer than this to 0 or pi make the impedances degenerate.
const PHASE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub grid_n: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            max_iter: 100,
            grid_n: 721,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 || self.max_iter == 0 || self.grid_n < 2 {
            return Err(Error::InvalidInput(format!(
                "invalid solver options {self:?}"
            )));
        }
        Ok(())
    }
}

/// Residuals of the two dual-band conditions, or `None` when a denominator
/// is too close to zero to evaluate them.
pub fn dualband_residuals(m: f64, k: f64, ta: f64, tb: f64) -> Option<[f64; 2]> {
    let (sa, sb) = (ta.sin(), tb.sin());
    let (cd, cs) = ((ta - tb).cos(), (ta + tb).cos());
    if sa.abs() < NEAR_SINGULAR
        || sb.abs() < NEAR_SINGULAR
        || cd.abs() < NEAR_SINGULAR
        || cs.abs() < NEAR_SINGULAR
    {
        return None;
    }
    let r1 = (m * tb).sin() / sb - k.sqrt() * (m * ta).sin() / sa;
    let r2 = (m * (ta - tb)).cos() / cd - (m * (ta + tb)).cos() / cs;
    Some([r1, r2])
}

fn residual_norm(r: [f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

fn in_open_interval(x: f64) -> bool {
    x > 0.0 && x < PI
}

/// Damped Newton iteration from `start`. Returns the root and its residual.
fn newton(m: f64, k: f64, start: (f64, f64), opts: &SolverOptions) -> Option<((f64, f64), f64)> {
    let (mut ta, mut tb) = start;
    let mut r = dualband_residuals(m, k, ta, tb)?;
    let mut norm = residual_norm(r);
    for _ in 0..opts.max_iter {
        if norm < opts.tol {
            return Some(((ta, tb), norm));
        }
        let h = JACOBIAN_STEP;
        let col = |da: f64, db: f64| -> Option<[f64; 2]> {
            let p = dualband_residuals(m, k, ta + da, tb + db)?;
            let q = dualband_residuals(m, k, ta - da, tb - db)?;
            Some([(p[0] - q[0]) / (2.0 * h), (p[1] - q[1]) / (2.0 * h)])
        };
        let ja = col(h, 0.0)?;
        let jb = col(0.0, h)?;
        let det = ja[0] * jb[1] - jb[0] * ja[1];
        if !det.is_finite() || det.abs() < 1e-300 {
            return None;
        }
        let da = -(r[0] * jb[1] - jb[0] * r[1]) / det;
        let db = -(ja[0] * r[1] - r[0] * ja[1]) / det;

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (na, nb) = (ta + lambda * da, tb + lambda * db);
            if in_open_interval(na) && in_open_interval(nb) {
                if let Some(nr) = dualband_residuals(m, k, na, nb) {
                    let nn = residual_norm(nr);
                    if nn < norm {
                        ta = na;
                        tb = nb;
                        r = nr;
                        norm = nn;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (norm < opts.tol).then_some(((ta, tb), norm))
}

/// Continue the root from `k = 1` toward `k_target >= 1` in `ln k`.
fn continue_in_k(m: f64, k_target: f64, opts: &SolverOptions) -> Option<(f64, f64)> {
    let closed = PI / (1.0 + m);
    let target = k_target.ln();
    let mut s = 0.0;
    let mut point = (closed, closed);
    let mut previous: Option<(f64, (f64, f64))> = None;
    let mut step = target.min(0.25);
    while s < target {
        let next_s = (s + step).min(target);
        // secant predictor along the path
        let guess = match previous {
            Some((ps, pp)) if s > ps => {
                let t = (next_s - s) / (s - ps);
                (
                    point.0 + t * (point.0 - pp.0),
                    point.1 + t * (point.1 - pp.1),
                )
            }
            _ => point,
        };
        let corrected = newton(m, next_s.exp(), guess, opts)
            .or_else(|| newton(m, next_s.exp(), point, opts))
            .filter(|((a, b), _)| (a - point.0).abs() < 0.2 && (b - point.1).abs() < 0.2);
        match corrected {
            Some((p, _)) => {
                previous = Some((s, point));
                point = p;
                s = next_s;
                step = (step * 1.5).min(0.5);
            }
            None => {
                step *= 0.5;
                if step < 1e-6 {
                    return None;
                }
            }
        }
    }
    Some(point)
}

/// Scan the residual norm over `(0, pi)^2` and polish the best cells.
fn grid_fallback(m: f64, k: f64, near: (f64, f64), opts: &SolverOptions) -> Option<(f64, f64)> {
    let n = opts.grid_n;
    let h = PI / n as f64;
    let mut cells: Vec<(f64, (f64, f64))> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (ta, tb) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            if let Some(r) = dualband_residuals(m, k, ta, tb) {
                cells.push((residual_norm(r), (ta, tb)));
            }
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut roots: Vec<(f64, f64)> = cells
        .iter()
        .take(64)
        .filter_map(|&(_, start)| newton(m, k, start, opts).map(|(p, _)| p))
        .filter(|&(a, b)| in_open_interval(a) && in_open_interval(b))
        .collect();
    let dist = |p: &(f64, f64)| (p.0 - near.0).hypot(p.1 - near.1);
    roots.sort_by(|a, b| dist(a).total_cmp(&dist(b)));
    roots.first().copied()
}

fn solve_k_at_least_one(m: f64, k: f64, opts: &SolverOptions) -> Result<(f64, f64)> {
    let closed = PI / (1.0 + m);
    if k == 1.0 {
        // exact even where the conditions themselves are 0/0 (m = 3); the
        // ring stage reports that degeneracy
        return Ok((closed, closed));
    }
    if let Some(p) = continue_in_k(m, k, opts) {
        return Ok(p);
    }
    if dualband_residuals(m, 1.0, closed, closed).is_none() {
        return Err(Error::SingularPoint { m, k });
    }
    grid_fallback(m, k, (closed, closed), opts).ok_or(Error::NoSolutionFound { m, k })
}

fn check_mk(m: f64, k: f64) -> Result<()> {
    if !(m > 1.0 && m <= crate::types::MAX_FREQUENCY_RATIO) {
        return Err(Error::RatioOutOfRange { m });
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "k must be positive and finite (got {k})"
        )));
    }
    Ok(())
}

/// Solve the dual-band conditions for `(theta_alpha, theta_beta)` at `f1`.
///
/// `k < 1` is served from the `1/k` solution with the two lengths swapped,
/// which is an exact symmetry of the conditions.
pub fn solve_electrical_lengths(m: f64, k: f64, opts: &SolverOptions) -> Result<(f64, f64)> {
    check_mk(m, k)?;
    opts.validate()?;
    if k >= 1.0 {
        solve_k_at_least_one(m, k, opts)
    } else {
        solve_k_at_least_one(m, 1.0 / k, opts).map(|(a, b)| (b, a))
    }
}

/// Continuation directly in `ln k` toward `k` in either direction, without
/// using the interchange symmetry. Exposed so the symmetry can be checked
/// against an independent route.
pub fn solve_electrical_lengths_direct(m: f64, k: f64, opts: &SolverOptions) -> Result<(f64, f64)> {
    check_mk(m, k)?;
    opts.validate()?;
    if k >= 1.0 {
        return solve_k_at_least_one(m, k, opts);
    }
    let closed = PI / (1.0 + m);
    let target = k.ln();
    let mut s = 0.0;
    let mut point = (closed, closed);
    let mut step = 0.05;
    while s > target {
        let next_s = (s - step).max(target);
        match newton(m, next_s.exp(), point, opts) {
            Some((p, _)) => {
                point = p;
                s = next_s;
            }
            None => {
                step *= 0.5;
                if step < 1e-6 {
                    return Err(Error::NoSolutionFound { m, k });
                }
            }
        }
    }
    Ok(point)
}

/// Warm-started solve from a nearby root; used by parameter sweeps. Falls
/// back to the full solve when Newton from `seed` fails.
pub fn solve_electrical_lengths_from(
    m: f64,
    k: f64,
    seed: (f64, f64),
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    check_mk(m, k)?;
    match newton(m, k, seed, opts) {
        Some(((a, b), _)) if (a - seed.0).abs() < 0.2 && (b - seed.1).abs() < 0.2 => Ok((a, b)),
        _ => solve_electrical_lengths(m, k, opts),
    }
}

fn phase_from_arg(arg: f64) -> Result<f64> {
    if !arg.is_finite() || arg.abs() > 1.0 + 1e-12 {
        return Err(Error::PhaseOutOfRange { arg });
    }
    let phi = arg.clamp(-1.0, 1.0).acos();
    if !(PHASE_TOL..=PI - PHASE_TOL).contains(&phi) {
        return Err(Error::DegeneratePhase {
            phi_deg: phi.to_degrees(),
        });
    }
    Ok(phi)
}

/// Transmission phase shifts at `f1` and `f2`, principal values in `(0, pi)`.
pub fn compute_phase_shifts(ta: f64, tb: f64, m: f64, n1: f64, n2: f64) -> Result<(f64, f64)> {
    let arg1 = (n1.sqrt() * ta.cos() + tb.cos()) / (n1 + 1.0).sqrt();
    let arg2 = (n2.sqrt() * (m * ta).cos() + (m * tb).cos()) / (n2 + 1.0).sqrt();
    Ok((phase_from_arg(arg1)?, phase_from_arg(arg2)?))
}

/// Ring impedances from the `f1` forms, plus the relative disagreement with
/// the `f2` forms.
#[allow(clippy::too_many_arguments)]
pub fn compute_ring_impedances(
    ta: f64,
    tb: f64,
    phi1: f64,
    phi2: f64,
    m: f64,
    n1: f64,
    n2: f64,
    z0: f64,
) -> Result<(f64, f64, f64)> {
    for theta in [ta, tb, m * ta, m * tb] {
        if theta.sin().abs() < 1e-12 {
            return Err(Error::SingularLength {
                theta_deg: theta.to_degrees(),
            });
        }
    }
    let za1 = z0 * ((1.0 + n1) / n1).sqrt() * phi1.sin() / ta.sin();
    let za2 = z0 * ((1.0 + n2) / n2).sqrt() * phi2.sin() / (m * ta).sin();
    let zb1 = z0 * (1.0 + n1).sqrt() * phi1.sin() / tb.sin();
    let zb2 = z0 * (1.0 + n2).sqrt() * phi2.sin() / (m * tb).sin();
    if za1.is_nan() || za1 <= 0.0 {
        return Err(Error::NegativeImpedance {
            what: "z_alpha",
            value: za1,
        });
    }
    if zb1.is_nan() || zb1 <= 0.0 {
        return Err(Error::NegativeImpedance {
            what: "z_beta",
            value: zb1,
        });
    }
    let residual = ((za1 - za2).abs() / za1).max((zb1 - zb2).abs() / zb1);
    Ok((za1, zb1, residual))
}

/// Assemble a full ring solution from already-solved lengths.
pub fn ring_from_lengths(
    ta: f64,
    tb: f64,
    m: f64,
    n1: f64,
    n2: f64,
    z0: f64,
) -> Result<RingSolution> {
    let residual_dualband = dualband_residuals(m, n2 / n1, ta, tb)
        .map(residual_norm)
        .ok_or(Error::SingularPoint { m, k: n2 / n1 })?;
    let (phi1, phi2) = compute_phase_shifts(ta, tb, m, n1, n2)?;
    let (z_alpha, z_beta, residual_impedance) =
        compute_ring_impedances(ta, tb, phi1, phi2, m, n1, n2, z0)?;
    if residual_impedance > IMPEDANCE_CONSISTENCY_TOL {
        // the two frequency forms disagree: not a dual-band design
        return Err(Error::NoSolutionFound { m, k: n2 / n1 });
    }
    Ok(RingSolution {
        theta_alpha: ta,
        theta_beta: tb,
        phi1,
        phi2,
        z_alpha,
        z_beta,
        residual_dualband,
        residual_impedance,
    })
}

/// Solve the ring for frequency ratio `m`, linear ratios `n1`, `n2` and port
/// impedance `z0`.
pub fn solve_ring(m: f64, n1: f64, n2: f64, z0: f64, opts: &SolverOptions) -> Result<RingSolution> {
    if !(n1 > 0.0 && n2 > 0.0 && n1.is_finite() && n2.is_finite()) {
        return Err(Error::InvalidInput(
            "power-division ratios must be positive".into(),
        ));
    }
    let (ta, tb) = solve_electrical_lengths(m, n2 / n1, opts)?;
    ring_from_lengths(ta, tb, m, n1, n2, z0)
}

/// Map a solution at `(n1, k)` to the one at `(1/n1, 1/k)`: the lengths and
/// the impedances trade places, the phase shifts are unchanged.
pub fn interchange_symmetry_map(sol: &RingSolution) -> RingSolution {
    RingSolution {
        theta_alpha: sol.theta_beta,
        theta_beta: sol.theta_alpha,
        z_alpha: sol.z_beta,
        z_beta: sol.z_alpha,
        ..*sol
    }
}

/// Isolation resistors of the divider; `1/r2 + 1/r3 = 1/z0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolationResistors {
    pub r2: f64,
    pub r3: f64,
}

impl IsolationResistors {
    /// `|1/r2 + 1/r3 - 1/z0|`, scaled by `z0`.
    pub fn residual(&self, z0: f64) -> f64 {
        ((1.0 / self.r2 + 1.0 / self.r3 - 1.0 / z0) * z0).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
#[derive(Default)]
pub enum ResistorChoice {
    /// `r2 = r3 = 2 z0`.
    #[default]
    Balanced,
    /// `r2 = (n + 1) z0`, `r3 = (n + 1) z0 / n`.
    Explicit(f64),
}

impl std::str::FromStr for ResistorChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "balanced" {
            return Ok(ResistorChoice::Balanced);
        }
        if let Some(v) = s.strip_prefix("n=") {
            let n: f64 = v
                .parse()
                .map_err(|_| Error::Parse(format!("invalid resistor ratio '{v}'")))?;
            return Ok(ResistorChoice::Explicit(n));
        }
        Err(Error::Parse(format!(
            "resistor choice must be 'balanced' or 'n=<value>' (got '{s}')"
        )))
    }
}

pub fn isolation_resistors(choice: ResistorChoice, z0: f64) -> Result<IsolationResistors> {
    match choice {
        ResistorChoice::Balanced => Ok(IsolationResistors {
            r2: 2.0 * z0,
            r3: 2.0 * z0,
        }),
        ResistorChoice::Explicit(n) => {
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "resistor ratio n must be positive (got {n})"
                )));
            }
            Ok(IsolationResistors {
                r2: (n + 1.0) * z0,
                r3: (n + 1.0) * z0 / n,
            })
        }
    }
}

/// A complete electrical design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub spec: DesignSpec,
    pub solution: RingSolution,
    /// Reference impedance the shifters were synthesized for.
    pub z_gamma: f64,
    pub shifter: ShifterParams,
    pub resistors: Option<IsolationResistors>,
    pub feasibility: FeasibilityReport,
    pub warnings: Vec<String>,
}

fn finish_design(
    spec: &DesignSpec,
    solution: RingSolution,
    z_gamma: f64,
    resistors: Option<IsolationResistors>,
    window: ImpedanceWindow,
    mut warnings: Vec<String>,
) -> Result<Design> {
    window.validate()?;
    let shifter = shifter::synth(spec.topology, spec.m(), z_gamma)?;
    let feasibility = shifter::check_feasibility(&shifter, window)
        .with_extra(&[("z_alpha", solution.z_alpha), ("z_beta", solution.z_beta)]);
    warnings.extend(feasibility.warnings());
    Ok(Design {
        spec: *spec,
        solution,
        z_gamma,
        shifter,
        resistors,
        feasibility,
        warnings,
    })
}

/// Rat-race coupler: solve the ring, then synthesize the shifters with
/// `Z_gamma = Z_alpha`.
pub fn design_rrc(spec: &DesignSpec, opts: &SolverOptions) -> Result<Design> {
    design_rrc_with_window(spec, opts, ImpedanceWindow::default())
}

pub fn design_rrc_with_window(
    spec: &DesignSpec,
    opts: &SolverOptions,
    window: ImpedanceWindow,
) -> Result<Design> {
    spec.validate()?;
    let solution = solve_ring(spec.m(), spec.n1, spec.n2, spec.z0, opts)?;
    let mut warnings = Vec::new();
    if spec.z_gamma.is_some() {
        warnings.push(
            "z_gamma is ignored for a rat-race coupler; the shifters use Z_alpha".to_string(),
        );
    }
    let mut spec = *spec;
    spec.device = Device::Rrc;
    finish_design(&spec, solution, solution.z_alpha, None, window, warnings)
}

/// Gysel divider: same ring as the coupler; the 180-degree section uses
/// `spec.z_gamma` (default `z0`) and the isolation resistors follow `choice`.
pub fn design_gpd(
    spec: &DesignSpec,
    opts: &SolverOptions,
    choice: ResistorChoice,
) -> Result<Design> {
    design_gpd_with_window(spec, opts, choice, ImpedanceWindow::default())
}

pub fn design_gpd_with_window(
    spec: &DesignSpec,
    opts: &SolverOptions,
    choice: ResistorChoice,
    window: ImpedanceWindow,
) -> Result<Design> {
    spec.validate()?;
    let solution = solve_ring(spec.m(), spec.n1, spec.n2, spec.z0, opts)?;
    let resistors = isolation_resistors(choice, spec.z0)?;
    let mut spec = *spec;
    spec.device = Device::Gpd;
    let z_gamma = spec.z_gamma.unwrap_or(spec.z0);
    finish_design(
        &spec,
        solution,
        z_gamma,
        Some(resistors),
        window,
        Vec::new(),
    )
}

/// Dispatch on `spec.device`.
pub fn design(spec: &DesignSpec, opts: &SolverOptions, choice: ResistorChoice) -> Result<Design> {
    match spec.device {
        Device::Rrc => design_rrc(spec, opts),
        Device::Gpd => design_gpd(spec, opts, choice),
    }
}
