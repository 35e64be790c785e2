use std::io::{BufRead, Write};

use crate::numerics::NumericsError;

pub const TRACE_HEADER: &str = "iter,objective,primal_residual,alpha_t,seconds";

/// One row of an iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    /// `‖Ax + By − c‖₂`.
    pub primal_residual: f64,
    pub alpha_t: Option<f64>,
    /// Wall time since the start of the run; zero when timing is disabled.
    pub seconds: f64,
    /// Objective at the running averages, when the monitor computes it.
    pub objective_avg: Option<f64>,
}

impl TraceRecord {
    /// Same record with the timing column cleared, for determinism comparisons.
    pub fn without_timing(&self) -> TraceRecord {
        TraceRecord { seconds: 0.0, ..self.clone() }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Writes the delimited trace. The `objective_avg` column is appended only
/// when at least one record carries it.
pub fn write_trace<W: Write>(records: &[TraceRecord], mut out: W) -> std::io::Result<()> {
    let with_avg = records.iter().any(|r| r.objective_avg.is_some());
    if with_avg {
        writeln!(out, "{TRACE_HEADER},objective_avg")?;
    } else {
        writeln!(out, "{TRACE_HEADER}")?;
    }
    for r in records {
        write!(
            out,
            "{},{:e},{:e},{},{:e}",
            r.iter,
            r.objective,
            r.primal_residual,
            fmt_opt(r.alpha_t),
            r.seconds
        )?;
        if with_avg {
            write!(out, ",{}", fmt_opt(r.objective_avg))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceRecord>, NumericsError> {
    let mut lines = input.lines().enumerate();
    let bad = |line: usize, message: String| NumericsError::Parse { line, message };
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty trace".into()))?;
    let header = header?;
    let columns: Vec<&str> = header.trim().split(',').collect();
    if columns.len() < 5 || columns[..5].join(",") != TRACE_HEADER {
        return Err(bad(1, format!("unexpected trace header `{header}`")));
    }
    let avg_col = columns.iter().position(|c| *c == "objective_avg");
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != columns.len() {
            return Err(bad(lineno, format!("expected {} fields, found {}", columns.len(), fields.len())));
        }
        let num = |s: &str| -> Result<f64, NumericsError> {
            s.parse::<f64>().map_err(|_| bad(lineno, format!("bad number `{s}`")))
        };
        let opt = |s: &str| -> Result<Option<f64>, NumericsError> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        out.push(TraceRecord {
            iter: fields[0].parse().map_err(|_| bad(lineno, format!("bad iteration `{}`", fields[0])))?,
            objective: num(fields[1])?,
            primal_residual: num(fields[2])?,
            alpha_t: opt(fields[3])?,
            seconds: num(fields[4])?,
            objective_avg: match avg_col {
                Some(c) => opt(fields[c])?,
                None => None,
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_empty_alpha_column() {
        let recs = vec![TraceRecord {
            iter: 1,
            objective: 2.5,
            primal_residual: 0.0,
            alpha_t: None,
            seconds: 0.0,
            objective_avg: None,
        }];
        let mut buf = Vec::new();
        write_trace(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "iter,objective,primal_residual,alpha_t,seconds\n1,2.5e0,0e0,,0e0\n");
        assert_eq!(read_trace(text.as_bytes()).unwrap(), recs);
    }

    #[test]
    fn optional_columns_round_trip() {
        let recs: Vec<TraceRecord> = (1..=3)
            .map(|i| TraceRecord {
                iter: i,
                objective: 1.0 / i as f64,
                primal_residual: 0.1 * i as f64,
                alpha_t: Some(0.3),
                seconds: 0.01,
                objective_avg: Some(std::f64::consts::PI),
            })
            .collect();
        let mut buf = Vec::new();
        write_trace(&recs, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("iter,objective,primal_residual,alpha_t,seconds,objective_avg\n"));
        assert_eq!(read_trace(&buf[..]).unwrap(), recs);
        assert!(read_trace("a,b\n".as_bytes()).is_err());
    }
}
