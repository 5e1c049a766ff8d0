//! Solver trace as CSV: `iter,objective,rel_change,frame_ops`.
//!
//! Floats use Rust's shortest round-trip formatting, so a trace written
//! twice from the same run is byte-identical and parses back exactly.

use std::fmt::Write;

use ppxa_core::ppxa::TraceRecord;

pub const HEADER: &str = "iter,objective,rel_change,frame_ops";

fn float(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

pub fn to_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(32 * (trace.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for t in trace {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            t.iter,
            float(t.objective),
            float(t.rel_change),
            t.frame_ops
        );
    }
    out
}

pub fn from_csv(text: &str) -> Result<Vec<TraceRecord>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err(format!("trace must start with `{HEADER}`"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || format!("line {}: malformed record `{line}`", i + 2);
            let f: Vec<&str> = line.split(',').collect();
            let [iter, obj, rel, ops] = f[..] else {
                return Err(bad());
            };
            Ok(TraceRecord {
                iter: iter.parse().map_err(|_| bad())?,
                objective: obj.parse().map_err(|_| bad())?,
                rel_change: rel.parse().map_err(|_| bad())?,
                frame_ops: ops.parse().map_err(|_| bad())?,
            })
        })
        .collect()
}
