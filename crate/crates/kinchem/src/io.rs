//! Text formats: checkpoints, the diagnostics CSV and the run manifest.
//!
//! Checkpoints are a text header (grids, parameters, time) followed by the
//! row-major phase-space values with 17 significant digits, which round-trips
//! `f64` exactly. The CSV uses the same formatting so identical runs produce
//! identical bytes.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::config::VelocitySetKind;
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{KinchemError, Result};
use crate::kinsolver::{PhaseGrid, PhaseState};
use crate::velocity::VelocitySet;

/// Shortest-exact decimal for an `f64` (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header + payload checkpoint of a phase-space state.
pub fn emit_checkpoint(state: &PhaseState<f64>, kind: VelocitySetKind, chi0: f64, alpha: f64) -> String {
    let grid = &state.grid;
    let mut out = String::new();
    out.push_str("kinchem checkpoint 1\n");
    let kind_s = match kind {
        VelocitySetKind::Ball => "ball",
        VelocitySetKind::Sphere => "sphere",
    };
    let _ = writeln!(out, "kind {kind_s}");
    let _ = writeln!(out, "R {}", fmt_f64(grid.vset.radius));
    let _ = writeln!(out, "chi0 {}", fmt_f64(chi0));
    let _ = writeln!(out, "alpha {}", fmt_f64(alpha));
    let _ = writeln!(out, "t {}", fmt_f64(state.t));
    let _ = writeln!(out, "outflow {}", fmt_f64(state.outflow));
    let _ = writeln!(out, "nr {}", grid.nr);
    let _ = writeln!(out, "nw {}", grid.nw());
    let _ = writeln!(out, "nphi {}", grid.nphi());
    let _ = writeln!(out, "r_max {}", fmt_f64(grid.r_max));
    let _ = writeln!(out, "data {}", state.g.len());
    for v in &state.g {
        let _ = writeln!(out, "{}", fmt_f64(*v));
    }
    out
}

/// Parse a checkpoint back into a state (grids are rebuilt from the header).
pub fn parse_checkpoint(text: &str) -> Result<(PhaseState<f64>, VelocitySetKind, f64, f64)> {
    let mut lines = text.lines();
    let magic = lines
        .next()
        .ok_or_else(|| KinchemError::Checkpoint("empty file".into()))?;
    if magic != "kinchem checkpoint 1" {
        return Err(KinchemError::Checkpoint(format!(
            "unrecognized header '{magic}'"
        )));
    }
    let mut kind = None;
    let mut radius = None;
    let mut chi0 = None;
    let mut alpha = None;
    let mut t = None;
    let mut outflow = None;
    let mut nr = None;
    let mut nw = None;
    let mut nphi = None;
    let mut r_max = None;
    let mut count = None;
    for line in lines.by_ref() {
        let mut it = line.splitn(2, ' ');
        let key = it
            .next()
            .ok_or_else(|| KinchemError::Checkpoint("malformed header line".into()))?;
        let val = it
            .next()
            .ok_or_else(|| KinchemError::Checkpoint(format!("missing value for '{key}'")))?;
        let parse_f = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| KinchemError::Checkpoint(format!("bad float '{v}'")))
        };
        let parse_u = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| KinchemError::Checkpoint(format!("bad integer '{v}'")))
        };
        match key {
            "kind" => {
                kind = Some(match val {
                    "ball" => VelocitySetKind::Ball,
                    "sphere" => VelocitySetKind::Sphere,
                    other => {
                        return Err(KinchemError::Checkpoint(format!(
                            "unknown velocity-set kind '{other}'"
                        )))
                    }
                })
            }
            "R" => radius = Some(parse_f(val)?),
            "chi0" => chi0 = Some(parse_f(val)?),
            "alpha" => alpha = Some(parse_f(val)?),
            "t" => t = Some(parse_f(val)?),
            "outflow" => outflow = Some(parse_f(val)?),
            "nr" => nr = Some(parse_u(val)?),
            "nw" => nw = Some(parse_u(val)?),
            "nphi" => nphi = Some(parse_u(val)?),
            "r_max" => r_max = Some(parse_f(val)?),
            "data" => {
                count = Some(parse_u(val)?);
                break;
            }
            other => {
                return Err(KinchemError::Checkpoint(format!(
                    "unknown header key '{other}'"
                )))
            }
        }
    }
    let missing = |name: &str| KinchemError::Checkpoint(format!("missing header field '{name}'"));
    let kind = kind.ok_or_else(|| missing("kind"))?;
    let radius = radius.ok_or_else(|| missing("R"))?;
    let chi0 = chi0.ok_or_else(|| missing("chi0"))?;
    let alpha = alpha.ok_or_else(|| missing("alpha"))?;
    let t = t.ok_or_else(|| missing("t"))?;
    let outflow = outflow.ok_or_else(|| missing("outflow"))?;
    let nr = nr.ok_or_else(|| missing("nr"))?;
    let nw = nw.ok_or_else(|| missing("nw"))?;
    let nphi = nphi.ok_or_else(|| missing("nphi"))?;
    let r_max = r_max.ok_or_else(|| missing("r_max"))?;
    let count = count.ok_or_else(|| missing("data"))?;

    let vset = match kind {
        VelocitySetKind::Ball => VelocitySet::ball(radius, nw, nphi)?,
        VelocitySetKind::Sphere => VelocitySet::sphere(radius, nphi)?,
    };
    let grid: Arc<PhaseGrid<f64>> = PhaseGrid::new(nr, r_max, vset)?;
    if grid.n_cells() != count {
        return Err(KinchemError::Checkpoint(format!(
            "payload size {count} does not match the grid ({} cells)",
            grid.n_cells()
        )));
    }
    let mut g = Vec::with_capacity(count);
    for line in lines {
        let v: f64 = line
            .parse()
            .map_err(|_| KinchemError::Checkpoint(format!("bad payload value '{line}'")))?;
        g.push(v);
    }
    if g.len() != count {
        return Err(KinchemError::Checkpoint(format!(
            "expected {count} values, found {}",
            g.len()
        )));
    }
    Ok((
        PhaseState {
            grid,
            t,
            g,
            outflow,
        },
        kind,
        chi0,
        alpha,
    ))
}

/// CSV header for a monitored-norm list: `t,M,I,dIdt,K,norm_p{p}q{q}...,excess`.
pub fn csv_header(monitored: &[(f64, f64)]) -> String {
    let mut head = String::from("t,M,I,dIdt,K");
    for &(p, q) in monitored {
        let _ = write!(head, ",norm_p{p}q{q}");
    }
    head.push_str(",excess\n");
    head
}

pub fn csv_row(rec: &DiagnosticsRecord<f64>) -> String {
    let mut row = String::new();
    let _ = write!(
        row,
        "{},{},{},{},{}",
        fmt_f64(rec.t),
        fmt_f64(rec.mass),
        fmt_f64(rec.i2),
        fmt_f64(rec.didt),
        fmt_f64(rec.k)
    );
    for &n in &rec.norms {
        let _ = write!(row, ",{}", fmt_f64(n));
    }
    match rec.excess {
        Some(e) => {
            let _ = write!(row, ",{}", fmt_f64(e));
        }
        None => row.push_str(",nan"),
    }
    row.push('\n');
    row
}

pub fn csv_document(monitored: &[(f64, f64)], records: &[DiagnosticsRecord<f64>]) -> String {
    let mut out = csv_header(monitored);
    for rec in records {
        out.push_str(&csv_row(rec));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::velocity::VelocitySet;
    use proptest::prelude::*;

    #[test]
    fn checkpoint_round_trip_bit_exact() {
        let vset = VelocitySet::ball(1.0, 4, 8).unwrap();
        let grid = PhaseGrid::new(8, 2.0, vset).unwrap();
        let mut st =
            PhaseState::from_fn(grid, |r: f64, w, phi| (r * 3.1 + w).sin().abs() * (phi + 4.0));
        st.t = 0.874561239871;
        st.outflow = 1.234e-5;
        let text = emit_checkpoint(&st, VelocitySetKind::Ball, 1.5, 0.25);
        let (back, kind, chi0, alpha) = parse_checkpoint(&text).unwrap();
        assert_eq!(kind, VelocitySetKind::Ball);
        assert_eq!(chi0, 1.5);
        assert_eq!(alpha, 0.25);
        assert_eq!(back.t, st.t);
        assert_eq!(back.outflow, st.outflow);
        assert_eq!(back.g, st.g);
        // emit again: identical bytes
        assert_eq!(emit_checkpoint(&back, kind, chi0, alpha), text);
    }

    #[test]
    fn checkpoint_rejects_garbage() {
        assert!(parse_checkpoint("not a checkpoint").is_err());
        let vset = VelocitySet::ball(1.0, 4, 8).unwrap();
        let grid = PhaseGrid::new(8, 2.0, vset).unwrap();
        let st = PhaseState::zero(grid);
        let text = emit_checkpoint(&st, VelocitySetKind::Ball, 1.0, 0.0);
        let truncated = &text[..text.len() - 40];
        assert!(parse_checkpoint(truncated).is_err());
    }

    #[test]
    fn csv_shape() {
        let rec = DiagnosticsRecord {
            t: 0.5,
            mass: 1.0,
            i2: 2.0,
            didt: -0.25,
            k: 0.125,
            norms: vec![3.0, 4.0],
            excess: None,
        };
        let doc = csv_document(&[(3.0, 1.5), (4.0, 2.0)], &[rec]);
        let mut lines = doc.lines();
        assert_eq!(lines.next().unwrap(), "t,M,I,dIdt,K,norm_p3q1.5,norm_p4q2,excess");
        let row = lines.next().unwrap();
        assert!(row.ends_with(",nan"));
        assert_eq!(row.split(',').count(), 8);
    }

    proptest! {
        #[test]
        fn f64_text_round_trip(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
