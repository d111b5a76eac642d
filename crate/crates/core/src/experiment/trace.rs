use std::io::{Read, Write};

use crate::error::ExperimentError;

pub const TRACE_HEADER: [&str; 6] = ["iteration", "touched_nodes", "exploitability", "wall_ms", "rsn_loss", "asn_loss"];
pub const COVERAGE_HEADER: [&str; 2] = ["iteration", "coverage"];

/// One evaluation point of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: u64,
    pub touched_nodes: u64,
    pub exploitability: f64,
    pub wall_ms: Option<u64>,
    pub rsn_loss: Option<f64>,
    pub asn_loss: Option<f64>,
    /// Written to the separate coverage file.
    pub coverage: Option<f64>,
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Raises an error unless iterations strictly increase and touched nodes never decrease.
pub fn check_trace(rows: &[TraceRow]) -> Result<(), ExperimentError> {
    for pair in rows.windows(2) {
        if pair[1].iteration <= pair[0].iteration {
            return Err(ExperimentError::Trace(format!("iteration {} follows {}", pair[1].iteration, pair[0].iteration)));
        }
        if pair[1].touched_nodes < pair[0].touched_nodes {
            return Err(ExperimentError::Trace(format!("touched nodes decrease at iteration {}", pair[1].iteration)));
        }
    }
    Ok(())
}

pub fn write_trace(rows: &[TraceRow], out: impl Write) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in rows {
        w.write_record([
            r.iteration.to_string(),
            r.touched_nodes.to_string(),
            r.exploitability.to_string(),
            opt(r.wall_ms),
            opt(r.rsn_loss),
            opt(r.asn_loss),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_coverage(rows: &[TraceRow], out: impl Write) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COVERAGE_HEADER)?;
    for r in rows {
        if let Some(c) = r.coverage {
            w.write_record([r.iteration.to_string(), c.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, i: usize, line: u64) -> Result<Option<T>, ExperimentError> {
    let raw = record.get(i).unwrap_or("").trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse()
        .map(Some)
        .map_err(|_| ExperimentError::Trace(format!("line {}: cannot parse {} `{}`", line, TRACE_HEADER[i], raw)))
}

pub fn read_trace(input: impl Read) -> Result<Vec<TraceRow>, ExperimentError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != TRACE_HEADER {
        return Err(ExperimentError::Trace(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let line = i as u64 + 2;
        let required = |v: Option<u64>, name: &str| {
            v.ok_or_else(|| ExperimentError::Trace(format!("line {}: missing {}", line, name)))
        };
        rows.push(TraceRow {
            iteration: required(field(&record, 0, line)?, "iteration")?,
            touched_nodes: required(field(&record, 1, line)?, "touched_nodes")?,
            exploitability: field(&record, 2, line)?
                .ok_or_else(|| ExperimentError::Trace(format!("line {}: missing exploitability", line)))?,
            wall_ms: field(&record, 3, line)?,
            rsn_loss: field(&record, 4, line)?,
            asn_loss: field(&record, 5, line)?,
            coverage: None,
        });
    }
    check_trace(&rows)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(iteration: u64, touched: u64) -> TraceRow {
        TraceRow {
            iteration,
            touched_nodes: touched,
            exploitability: 0.5 / iteration as f64,
            wall_ms: None,
            rsn_loss: Some(1e-5),
            asn_loss: None,
            coverage: Some(0.25),
        }
    }

    #[test]
    fn header_and_round_trip() {
        let rows = vec![row(1, 10), row(2, 20), row(4, 40)];
        let mut buf = Vec::new();
        write_trace(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iteration,touched_nodes,exploitability,wall_ms,rsn_loss,asn_loss\n"));
        assert!(text.contains("\n1,10,0.5,,0.00001,\n"));
        let back = read_trace(&buf[..]).unwrap();
        let expected: Vec<TraceRow> = rows.iter().map(|r| TraceRow { coverage: None, ..*r }).collect();
        assert_eq!(back, expected);
    }

    #[test]
    fn rejects_non_monotone_traces() {
        assert!(check_trace(&[row(2, 10), row(2, 20)]).is_err());
        assert!(check_trace(&[row(1, 20), row(2, 10)]).is_err());
        assert!(read_trace("iteration,exploitability\n1,0.5\n".as_bytes()).is_err());
    }
}
