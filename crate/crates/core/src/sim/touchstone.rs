//! Touchstone v1.1 export and import (real/imaginary format, Hz).

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sim::nodal::SMatrix;
use crate::sim::sweep::SweepResult;

/// Render a sweep as Touchstone text. Failed points are skipped and listed
/// in a comment. Two-port data uses the v1.1 order `S11 S21 S12 S22`;
/// larger networks write one matrix row per line.
pub fn write_touchstone(sw: &SweepResult, z_ref: f64) -> String {
    let n = sw.nports;
    let mut out = String::new();
    let _ = writeln!(out, "! {n}-port S-parameters");
    let skipped: Vec<String> = sw
        .points
        .iter()
        .filter(|p| p.s.is_none())
        .map(|p| format!("{:e}", p.freq_hz))
        .collect();
    if !skipped.is_empty() {
        let _ = writeln!(out, "! skipped singular points: {}", skipped.join(" "));
    }
    let _ = writeln!(out, "# HZ S RI R {}", fmt_num(z_ref));
    for p in &sw.points {
        let Some(s) = &p.s else { continue };
        let _ = write!(out, "{}", fmt_num(p.freq_hz));
        if n == 2 {
            for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let z = s.data[(i, j)];
                let _ = write!(out, " {} {}", fmt_num(z.re), fmt_num(z.im));
            }
            out.push('\n');
        } else {
            for i in 0..n {
                if i > 0 {
                    out.push(' ');
                }
                for j in 0..n {
                    let z = s.data[(i, j)];
                    let _ = write!(out, " {} {}", fmt_num(z.re), fmt_num(z.im));
                }
                out.push('\n');
            }
        }
    }
    out
}

fn fmt_num(x: f64) -> String {
    format!("{x:.12e}")
}

/// Parse Touchstone text written for an `nports`-port network. Accepts the
/// RI, MA and DB formats and the HZ/KHZ/MHZ/GHZ units.
pub fn parse_touchstone(text: &str, nports: usize) -> Result<Vec<SMatrix>> {
    if nports == 0 {
        return Err(Error::Parse("port count must be positive".into()));
    }
    let mut unit = 1e9;
    let mut format = "MA".to_string();
    let mut z_ref = 50.0;
    let mut tokens: Vec<f64> = Vec::new();
    let mut seen_option = false;
    for raw in text.lines() {
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(opts) = line.strip_prefix('#') {
            if seen_option {
                continue;
            }
            seen_option = true;
            let words: Vec<String> = opts
                .split_whitespace()
                .map(|w| w.to_ascii_uppercase())
                .collect();
            let mut i = 0;
            while i < words.len() {
                match words[i].as_str() {
                    "HZ" => unit = 1.0,
                    "KHZ" => unit = 1e3,
                    "MHZ" => unit = 1e6,
                    "GHZ" => unit = 1e9,
                    "S" => {}
                    "RI" | "MA" | "DB" => format = words[i].clone(),
                    "R" => {
                        i += 1;
                        z_ref = words
                            .get(i)
                            .and_then(|w| w.parse().ok())
                            .ok_or_else(|| Error::Parse("missing reference resistance".into()))?;
                    }
                    other => return Err(Error::Parse(format!("unsupported option `{other}`"))),
                }
                i += 1;
            }
            continue;
        }
        for w in line.split_whitespace() {
            tokens.push(
                w.parse()
                    .map_err(|_| Error::Parse(format!("bad number `{w}`")))?,
            );
        }
    }

    let per_point = 1 + 2 * nports * nports;
    if !tokens.len().is_multiple_of(per_point) {
        return Err(Error::Parse(format!(
            "{} values is not a multiple of {per_point} for a {nports}-port",
            tokens.len()
        )));
    }
    let to_complex = |a: f64, b: f64| -> Complex64 {
        match format.as_str() {
            "RI" => Complex64::new(a, b),
            "MA" => Complex64::from_polar(a, b.to_radians()),
            _ => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    };
    Ok(tokens
        .chunks(per_point)
        .map(|c| {
            let f = c[0] * unit;
            let vals: Vec<Complex64> = c[1..].chunks(2).map(|p| to_complex(p[0], p[1])).collect();
            let data = if nports == 2 {
                DMatrix::from_row_slice(2, 2, &[vals[0], vals[2], vals[1], vals[3]])
            } else {
                DMatrix::from_row_slice(nports, nports, &vals)
            };
            SMatrix {
                freq_hz: f,
                evaluated_hz: f,
                perturbed: false,
                z_ref: vec![z_ref; nports],
                data,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::sweep::{sweep, SweepPoint};
    use crate::types::{Branch, Element, FrequencyGrid, Network, Port};

    fn line_net() -> Network {
        Network::new(
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
                    z: 80.0,
                    theta_at_f1: 1.0,
                },
                from: "a".into(),
                to: "b".into(),
            }],
            1e9,
        )
        .unwrap()
    }

    #[test]
    fn two_port_round_trip_preserves_order() {
        let net = line_net();
        let sw = sweep(&net, &FrequencyGrid::linear(0.5e9, 2e9, 7).unwrap());
        let text = write_touchstone(&sw, 50.0);
        assert!(text.contains("# HZ S RI R 5.000000000000e1"));
        let back = parse_touchstone(&text, 2).unwrap();
        assert_eq!(back.len(), 7);
        for (a, b) in back.iter().zip(&sw.points) {
            let s = b.s.as_ref().unwrap();
            assert!((a.data.clone() - s.data.clone())
                .iter()
                .all(|z| z.norm() < 1e-11));
        }
    }

    #[test]
    fn skips_failed_points() {
        let mut sw = sweep(&line_net(), &FrequencyGrid::linear(1e9, 2e9, 2).unwrap());
        sw.points.push(SweepPoint {
            freq_hz: 3e9,
            s: None,
            error: Some("singular_assembly".into()),
        });
        let text = write_touchstone(&sw, 50.0);
        assert!(text.contains("skipped singular points"));
        assert_eq!(parse_touchstone(&text, 2).unwrap().len(), 2);
    }

    #[test]
    fn parses_ma_and_db() {
        let ma = "# GHZ S MA R 50\n1.0 0.5 90 1 0 1 0 0.5 -90\n";
        let s = &parse_touchstone(ma, 2).unwrap()[0];
        assert_eq!(s.freq_hz, 1e9);
        assert!((s.s(1, 1) - Complex64::new(0.0, 0.5)).norm() < 1e-12);
        let db = "# MHZ S DB R 75\n100 -6.0206 0 0 0 0 0 -6.0206 180\n";
        let s = &parse_touchstone(db, 2).unwrap()[0];
        assert!((s.s(2, 2) + 0.5).norm() < 1e-5);
        assert_eq!(s.z_ref, vec![75.0, 75.0]);
    }

    #[test]
    fn rejects_ragged_data() {
        assert!(parse_touchstone("# HZ S RI R 50\n1 2 3\n", 2).is_err());
        assert!(parse_touchstone("# HZ Y RI R 50\n", 2).is_err());
    }
}
