//! Trajectory, event and metric export.
//!
//! CSV files use CRLF line ends, a `.` decimal separator and 17 significant
//! digits, so every double round-trips exactly.

use std::io::Write;

use serde::Serialize;
use stickslip::hybridsim::{CycleMetrics, PhaseKind, PhaseSegment, Sample, Trajectory};
use stickslip::sysmodel::State;

pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "x1", "x2", "x3", "phase", "gamma_active"];

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn phase_name(kind: PhaseKind) -> &'static str {
    match kind {
        PhaseKind::Slip => "slip",
        PhaseKind::Stick => "stick",
    }
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(w)
}

pub fn write_trajectory_csv<W: Write>(w: W, samples: &[Sample]) -> csv::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for s in samples {
        out.write_record([
            fmt_f64(s.state.t),
            fmt_f64(s.state.x1),
            fmt_f64(s.state.x2),
            fmt_f64(s.state.x3),
            phase_name(s.kind).to_string(),
            fmt_f64(s.gamma_active),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SampleRow {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub phase: &'static str,
    pub gamma_active: f64,
}

pub fn trajectory_json(samples: &[Sample]) -> String {
    let rows: Vec<SampleRow> = samples
        .iter()
        .map(|s| SampleRow {
            t: s.state.t,
            x1: s.state.x1,
            x2: s.state.x2,
            x3: s.state.x3,
            phase: phase_name(s.kind),
            gamma_active: s.gamma_active,
        })
        .collect();
    to_json(&rows)
}

#[derive(Debug, Serialize)]
pub struct RunEvents<'a> {
    pub run: usize,
    pub initial: State,
    pub segments: &'a [PhaseSegment],
}

#[derive(Debug, Serialize)]
pub struct RunMetrics<'a> {
    pub run: usize,
    pub initial: State,
    pub metrics: &'a CycleMetrics,
}

pub fn events_json(runs: &[(usize, &Trajectory)]) -> String {
    let rows: Vec<RunEvents> = runs
        .iter()
        .map(|(k, t)| RunEvents {
            run: *k,
            initial: t.segments[0].entry_state,
            segments: &t.segments,
        })
        .collect();
    to_json(&rows)
}

pub fn metrics_json(runs: &[(usize, &Trajectory)]) -> String {
    let rows: Vec<RunMetrics> = runs
        .iter()
        .map(|(k, t)| RunMetrics {
            run: *k,
            initial: t.segments[0].entry_state,
            metrics: &t.metrics,
        })
        .collect();
    to_json(&rows)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use stickslip::hybridsim::{simulate, SimConfig};
    use stickslip::sysmodel::SystemParams;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-12.5), "-1.2500000000000000e1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        for v in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, f64::MAX] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn csv_has_header_and_crlf() {
        let p = SystemParams::new(1.5, 0.66, 0.08, 1.0).unwrap();
        let cfg = SimConfig {
            horizon: 1.0,
            output_step: 0.5,
            ..SimConfig::default()
        };
        let traj = simulate(&p, State::initial(0.0, 0.5, 0.0), &cfg).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj.samples).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split("\r\n").collect();
        assert_eq!(lines[0], "t,x1,x2,x3,phase,gamma_active");
        assert_eq!(lines.len(), 3 + 2);
        assert!(lines[1].ends_with(",stick,0.0000000000000000e0"));
        assert_eq!(*lines.last().unwrap(), "");
    }
}
