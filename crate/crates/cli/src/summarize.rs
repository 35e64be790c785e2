//! Trace summaries in a whitespace-separated layout that gnuplot reads
//! directly: `#` comment headers, one row per trace, and with `series`
//! one data block per trace separated by two blank lines (`index N`).

use std::fmt::Write as _;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use ncadmm_core::admm::{read_trace, TraceRecord, TRACE_HEADER};
use ncadmm_core::diagnostics::TraceSummary;

use crate::error::CliError;

/// Expands directories into the trace CSVs they contain, sorted by name.
pub fn collect_traces(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| CliError::io(path, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "csv") && is_trace(p))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(path.clone());
        }
    }
    if out.is_empty() {
        return Err(CliError::Io("no trace files found".into()));
    }
    Ok(out)
}

fn is_trace(path: &Path) -> bool {
    std::fs::read_to_string(path).is_ok_and(|t| t.lines().next().is_some_and(|h| h.starts_with(TRACE_HEADER)))
}

fn load(path: &Path) -> Result<Vec<TraceRecord>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_trace(BufReader::new(file)).map_err(|e| CliError::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), |x| format!("{x:e}"))
}

pub fn summarize(paths: &[PathBuf], series: bool) -> Result<String, CliError> {
    let files = collect_traces(paths)?;
    let traces = files.iter().map(|f| load(f)).collect::<Result<Vec<_>, _>>()?;
    let mut out = String::new();
    out.push_str("# trace iterations first_objective final_objective min_objective final_objective_avg final_residual min_alpha seconds\n");
    for (file, trace) in files.iter().zip(&traces) {
        let name = file.file_name().map_or_else(|| file.display().to_string(), |n| n.to_string_lossy().into_owned());
        match TraceSummary::from_records(trace) {
            Some(s) => writeln!(
                out,
                "{name} {} {:e} {:e} {:e} {} {:e} {} {:e}",
                s.iterations,
                s.first_objective,
                s.final_objective,
                s.min_objective,
                opt(s.final_objective_avg),
                s.final_primal_residual,
                opt(s.min_alpha),
                s.total_seconds
            ),
            None => writeln!(out, "{name} 0 NaN NaN NaN NaN NaN NaN 0"),
        }
        .expect("writing to a String cannot fail");
    }
    if series {
        for (file, trace) in files.iter().zip(&traces) {
            out.push_str("\n\n");
            writeln!(out, "# {}", file.display()).expect("writing to a String cannot fail");
            out.push_str("# iter objective objective_avg primal_residual alpha_t\n");
            for r in trace {
                writeln!(
                    out,
                    "{} {:e} {} {:e} {}",
                    r.iter,
                    r.objective,
                    opt(r.objective_avg),
                    r.primal_residual,
                    opt(r.alpha_t)
                )
                .expect("writing to a String cannot fail");
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ncadmm_core::admm::write_trace;

    fn record(iter: usize, objective: f64) -> TraceRecord {
        TraceRecord { iter, objective, primal_residual: 0.5, alpha_t: None, seconds: 0.0, objective_avg: Some(objective) }
    }

    #[test]
    fn directory_summary_lists_each_trace() {
        let dir = tempfile::tempdir().unwrap();
        for (name, last) in [("b.csv", 2.0), ("a.csv", 1.0)] {
            let f = std::fs::File::create(dir.path().join(name)).unwrap();
            write_trace(&[record(1, 4.0), record(2, last)], f).unwrap();
        }
        std::fs::write(dir.path().join("other.csv"), "x,y\n1,2\n").unwrap();
        let text = summarize(&[dir.path().to_path_buf()], true).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).collect();
        assert!(rows[0].starts_with("a.csv 2 4e0 1e0 1e0 1e0 5e-1 NaN"), "{}", rows[0]);
        assert!(rows[1].starts_with("b.csv 2 4e0 2e0"));
        assert_eq!(text.matches("\n\n\n").count(), 2);
        assert_eq!(rows.len(), 2 + 4);
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(summarize(&[dir.path().to_path_buf()], false), Err(CliError::Io(_))));
    }
}
