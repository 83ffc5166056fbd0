//! Isolation-path equivalence for the divider.
//!
//! With port 1 matched and ports 2 and 3 driven in odd mode, the divider's
//! isolation path reduces to a two-port between ports 2 and 3. That path is
//! equivalent to `{Za, ta}`, an ideal inversion with `Z0` to ground, then
//! `{Zb, tb}`. Splitting the `Z0` load into `R2` and `R3` on either side of
//! the inversion gives the same two-port whenever `1/R2 + 1/R3 = 1/Z0`.

use num_complex::Complex64;

use crate::sim::twoport::TwoPortMatrix;
use crate::solver::IsolationResistors;
use crate::types::RingSolution;

fn g(r: f64) -> TwoPortMatrix {
    TwoPortMatrix::shunt(Complex64::new(1.0 / r, 0.0))
}

/// Reference form: single `Z0` load behind the inversion.
pub fn isolation_reference(sol: &RingSolution, z0: f64, scale: f64) -> TwoPortMatrix {
    TwoPortMatrix::line(sol.z_alpha, sol.theta_alpha * scale)
        * TwoPortMatrix::inverter()
        * g(z0)
        * TwoPortMatrix::line(sol.z_beta, sol.theta_beta * scale)
}

/// Split form: `R2` before and `R3` after the inversion.
pub fn isolation_split(sol: &RingSolution, r: &IsolationResistors, scale: f64) -> TwoPortMatrix {
    TwoPortMatrix::line(sol.z_alpha, sol.theta_alpha * scale)
        * g(r.r2)
        * TwoPortMatrix::inverter()
        * g(r.r3)
        * TwoPortMatrix::line(sol.z_beta, sol.theta_beta * scale)
}

/// Largest S-parameter difference between the two forms at `f / f1 = scale`.
pub fn isolation_equivalence_error(
    sol: &RingSolution,
    r: &IsolationResistors,
    z0: f64,
    scale: f64,
) -> f64 {
    let a = isolation_reference(sol, z0, scale).s_params(z0);
    let b = isolation_split(sol, r, scale).s_params(z0);
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((a[i][j] - b[i][j]).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{isolation_resistors, solve_ring, ResistorChoice, SolverOptions};

    #[test]
    fn split_matches_reference() {
        let sol = solve_ring(2.0, 2.0, 0.5, 50.0, &SolverOptions::default()).unwrap();
        for choice in [
            ResistorChoice::Balanced,
            ResistorChoice::Explicit(2.0),
            ResistorChoice::Explicit(0.3),
        ] {
            let r = isolation_resistors(choice, 50.0).unwrap();
            for scale in [0.3, 1.0, 1.7, 2.0, 2.6] {
                assert!(isolation_equivalence_error(&sol, &r, 50.0, scale) < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_split_differs() {
        let sol = solve_ring(2.0, 1.0, 1.0, 50.0, &SolverOptions::default()).unwrap();
        let r = IsolationResistors {
            r2: 100.0,
            r3: 200.0,
        };
        assert!(isolation_equivalence_error(&sol, &r, 50.0, 1.0) > 1e-3);
    }
}
