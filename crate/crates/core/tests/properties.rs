//! Property suites over randomly drawn designs.

mod common;

use std::f64::consts::PI;

use dualband::polarization::{axial_ratio_db, feed_polarization, FeedDelay};
use dualband::sim::isolation::isolation_equivalence_error;
use dualband::sim::{assemble_sparams, build_network, design_frequency_error, sweep};
use dualband::solver::{
    design, dualband_residuals, interchange_symmetry_map, solve_electrical_lengths,
    solve_electrical_lengths_direct, solve_ring, IsolationResistors, ResistorChoice, SolverOptions,
};
use dualband::space::{sweep_impedances, MRange};
use dualband::{DesignSpec, Device, FrequencyGrid, Topology};
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn topology() -> impl Strategy<Value = Topology> {
    prop_oneof![
        Just(Topology::CSection),
        Just(Topology::Pi),
        Just(Topology::T)
    ]
}

fn device() -> impl Strategy<Value = Device> {
    prop_oneof![Just(Device::Rrc), Just(Device::Gpd)]
}

fn spec_strategy() -> impl Strategy<Value = DesignSpec> {
    (
        1.6f64..2.9,
        log_uniform(0.1, 10.0),
        log_uniform(0.25, 4.0),
        topology(),
        device(),
    )
        .prop_map(|(m, k, n1, t, d)| DesignSpec::new(1e9, m * 1e9, n1, n1 * k, 50.0, t, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn designs_are_exact_at_both_bands(spec in spec_strategy()) {
        let d = design(&spec, &SolverOptions::default(), ResistorChoice::Balanced).unwrap();
        prop_assert!(d.solution.residual_dualband < 1e-10);
        prop_assert!(d.solution.residual_impedance < 1e-8);
        let net = build_network(&d).unwrap();
        for (f, n) in [(spec.f1, spec.n1), (spec.f2, spec.n2)] {
            let s = assemble_sparams(&net, f).unwrap();
            prop_assert!(design_frequency_error(&s, n).unwrap() < 1e-6);
            prop_assert!(20.0 * s.s(1, 1).norm().log10() < -100.0);
        }
    }

    #[test]
    fn swept_networks_reciprocal_lossless_passive(spec in spec_strategy()) {
        let d = design(&spec, &SolverOptions::default(), ResistorChoice::Explicit(1.7)).unwrap();
        let net = build_network(&d).unwrap();
        let sw = sweep(&net, &FrequencyGrid::default_for(spec.f1, spec.f2).unwrap());
        for p in &sw.points {
            let Some(s) = &p.s else { continue };
            prop_assert!(s.max_asymmetry() < 1e-9, "asymmetry {} at {}", s.max_asymmetry(), p.freq_hz);
            match spec.device {
                Device::Rrc => prop_assert!(s.unitarity_error() < 1e-8, "unitarity {} at {}", s.unitarity_error(), p.freq_hz),
                Device::Gpd => prop_assert!(s.max_singular_value() <= 1.0 + 1e-9),
            }
        }
    }

    #[test]
    fn equal_ratio_closed_form(m in 1.05f64..9.9) {
        let (a, b) = solve_electrical_lengths(m, 1.0, &SolverOptions::default()).unwrap();
        let expect = PI / (1.0 + m);
        prop_assert!((a - expect).abs() < 1e-12 && (b - expect).abs() < 1e-12);
    }

    #[test]
    fn interchange_symmetry(m in 1.2f64..2.9, k in log_uniform(1.01, 10.0), n1 in log_uniform(0.25, 4.0)) {
        let opts = SolverOptions::default();
        let (a, b) = solve_electrical_lengths(m, k, &opts).unwrap();
        let (ai, bi) = solve_electrical_lengths_direct(m, 1.0 / k, &opts).unwrap();
        prop_assert!((a - bi).abs() < 1e-8 && (b - ai).abs() < 1e-8);
        let r = dualband_residuals(m, 1.0 / k, ai, bi).unwrap();
        prop_assert!(r[0].abs().max(r[1].abs()) < 1e-10);

        let sol = solve_ring(m, n1, n1 * k, 50.0, &opts).unwrap();
        let inv = solve_ring(m, 1.0 / n1, 1.0 / (n1 * k), 50.0, &opts).unwrap();
        let mapped = interchange_symmetry_map(&sol);
        prop_assert!((mapped.z_alpha - inv.z_alpha).abs() < 1e-8 * inv.z_alpha);
        prop_assert!((mapped.z_beta - inv.z_beta).abs() < 1e-8 * inv.z_beta);
        prop_assert!((mapped.phi1 - inv.phi1).abs() < 1e-8 && (mapped.phi2 - inv.phi2).abs() < 1e-8);
    }

    #[test]
    fn isolation_split_equivalence(n in log_uniform(0.05, 20.0), scale in 0.2f64..3.5, spec in spec_strategy()) {
        let sol = solve_ring(spec.m(), spec.n1, spec.n2, 50.0, &SolverOptions::default()).unwrap();
        let r = IsolationResistors { r2: (n + 1.0) * 50.0, r3: (n + 1.0) * 50.0 / n };
        prop_assert!(r.residual(50.0) < 1e-12);
        prop_assert!(isolation_equivalence_error(&sol, &r, 50.0, scale) < 1e-9);
    }

    #[test]
    fn divider_isolation_at_design_bands(spec in spec_strategy(), n in log_uniform(0.2, 5.0)) {
        let mut spec = spec;
        spec.device = Device::Gpd;
        let d = design(&spec, &SolverOptions::default(), ResistorChoice::Explicit(n)).unwrap();
        let net = build_network(&d).unwrap();
        for f in [spec.f1, spec.f2] {
            let s = assemble_sparams(&net, f).unwrap();
            for (i, j) in [(2, 3), (2, 2), (3, 3)] {
                prop_assert!(20.0 * s.s(i, j).norm().log10() < -100.0);
            }
        }
    }

    #[test]
    fn port_one_and_four_mirror(m in 1.6f64..2.9, k in log_uniform(0.1, 10.0), n1 in log_uniform(0.25, 4.0)) {
        let spec = DesignSpec::new(1e9, m * 1e9, n1, n1 * k, 50.0, Topology::CSection, Device::Rrc).unwrap();
        let d = design(&spec, &SolverOptions::default(), ResistorChoice::Balanced).unwrap();
        let net = build_network(&d).unwrap();
        let delay = FeedDelay::DualBand { f2: spec.f2 };
        for f in [spec.f1, spec.f2] {
            let s = assemble_sparams(&net, f).unwrap();
            let (j1, h1) = feed_polarization(&s, 1, 2, 3, delay, f, spec.f1).unwrap();
            let (j4, h4) = feed_polarization(&s, 4, 2, 3, delay, f, spec.f1).unwrap();
            prop_assert!((axial_ratio_db(&j1) + axial_ratio_db(&j4)).abs() < 1e-9);
            prop_assert_ne!(h1, h4);
        }
    }
}

#[test]
fn curves_are_continuous_in_m() {
    let t = sweep_impedances(
        &MRange::new(1.1, 2.95, 0.01).unwrap(),
        &[0.1, 0.5, 2.0, 10.0],
        1.0,
        50.0,
        &SolverOptions::default(),
    )
    .unwrap();
    for w in t.rows.windows(2) {
        if w[0].k != w[1].k {
            continue;
        }
        let (Some(a0), Some(a1)) = (w[0].theta_alpha, w[1].theta_alpha) else {
            continue;
        };
        let (b0, b1) = (w[0].theta_beta.unwrap(), w[1].theta_beta.unwrap());
        assert!(
            (a0 - a1).abs() < 0.1 && (b0 - b1).abs() < 0.1,
            "jump at m={} k={}",
            w[1].m,
            w[1].k
        );
    }
}

#[test]
fn impedance_panels_mirror() {
    let ms = MRange::new(1.5, 2.8, 0.1).unwrap();
    let opts = SolverOptions::default();
    for n1 in [0.5, 2.0] {
        let a = sweep_impedances(&ms, &[2.0, 4.0], n1, 50.0, &opts).unwrap();
        let b = sweep_impedances(&ms, &[0.5, 0.25], 1.0 / n1, 50.0, &opts).unwrap();
        for ra in &a.rows {
            let rb = b
                .rows
                .iter()
                .find(|r| (r.k - 1.0 / ra.k).abs() < 1e-12 && r.m == ra.m)
                .unwrap();
            assert!((ra.theta_alpha.unwrap() - rb.theta_beta.unwrap()).abs() < 1e-8);
            assert!((ra.z_alpha.unwrap() - rb.z_beta.unwrap()).abs() < 1e-6);
            assert!((ra.z_beta.unwrap() - rb.z_alpha.unwrap()).abs() < 1e-6);
        }
    }
}
