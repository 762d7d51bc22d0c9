//! CSV trace files.
//!
//! The first line is `# verscale-trace v1 scenario=<name>`. The second is the
//! column header: `time_s,kind,cpu_pct,decision,total_replicas`, then for
//! every version `v` the group `v.score,v.replicas,v.restarts_window,
//! v.rt_stddev_ms,v.mem_stddev_mb,v.lb_weight,v.rt_mean_ms`, then `df`.
//! Absent values are empty fields. Floats carry six decimals.

use std::io::{self, BufRead, BufReader, Read, Write};

use verscale_core::{DiversityFactor, RecordKind, TraceRecord, TraceSink, VersionReport};

pub const MAGIC: &str = "# verscale-trace v1";

const GROUP: [&str; 7] = [
    "score",
    "replicas",
    "restarts_window",
    "rt_stddev_ms",
    "mem_stddev_mb",
    "lb_weight",
    "rt_mean_ms",
];

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("malformed trace at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn malformed(line: usize, reason: impl Into<String>) -> TraceError {
    TraceError::Malformed {
        line,
        reason: reason.into(),
    }
}

/// A parsed trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub scenario: String,
    pub versions: Vec<String>,
    pub records: Vec<TraceRecord>,
}

pub fn header(versions: &[String]) -> Vec<String> {
    let mut cols: Vec<String> = ["time_s", "kind", "cpu_pct", "decision", "total_replicas"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for v in versions {
        cols.extend(GROUP.iter().map(|g| format!("{v}.{g}")));
    }
    cols.push("df".into());
    cols
}

fn float(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn int(v: Option<u32>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row(record: &TraceRecord, n: usize) -> Vec<String> {
    let mut fields = vec![
        record.time_s.to_string(),
        record.kind.as_str().to_string(),
        float(record.cpu_pct),
        record.decision.clone(),
        int(record.total_replicas),
    ];
    let empty = VersionReport::default();
    for i in 0..n {
        let v = record.versions.get(i).unwrap_or(&empty);
        fields.extend([
            float(v.score),
            int(v.replicas),
            int(v.restarts_window),
            float(v.rt_stddev_ms),
            float(v.mem_stddev_mb),
            int(v.lb_weight),
            float(v.rt_mean_ms),
        ]);
    }
    fields.push(record.diversity.map(|d| d.to_string()).unwrap_or_default());
    fields
}

/// Streams records to `W` as they arrive. The first write error is kept and
/// returned by [`TraceWriter::finish`]; later records are discarded.
#[derive(Debug)]
pub struct TraceWriter<W: Write> {
    csv: csv::Writer<W>,
    versions: usize,
    error: Option<TraceError>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(mut out: W, scenario: &str, versions: &[String]) -> Result<Self, TraceError> {
        writeln!(out, "{MAGIC} scenario={scenario}")?;
        let mut csv = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        csv.write_record(header(versions))?;
        Ok(TraceWriter {
            csv,
            versions: versions.len(),
            error: None,
        })
    }

    /// Flushes and returns the underlying writer.
    pub fn finish(mut self) -> Result<W, TraceError> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.csv.flush()?;
        self.csv
            .into_inner()
            .map_err(|e| TraceError::Io(io::Error::other(e.to_string())))
    }
}

impl<W: Write> TraceSink for TraceWriter<W> {
    fn record(&mut self, record: TraceRecord) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = self.csv.write_record(row(&record, self.versions)) {
            self.error = Some(e.into());
        }
    }
}

/// Renders a complete trace in memory.
pub fn write_trace(trace: &Trace) -> Result<String, TraceError> {
    let mut w = TraceWriter::new(Vec::new(), &trace.scenario, &trace.versions)?;
    for r in &trace.records {
        w.record(r.clone());
    }
    let bytes = w.finish()?;
    Ok(String::from_utf8(bytes).expect("trace is UTF-8"))
}

fn parse_opt<T: std::str::FromStr>(
    field: &str,
    line: usize,
    col: &str,
) -> Result<Option<T>, TraceError> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| malformed(line, format!("bad value `{field}` in column {col}")))
}

fn parse_df(field: &str, line: usize) -> Result<Option<DiversityFactor>, TraceError> {
    match field {
        "" => Ok(None),
        "uniform" => Ok(Some(DiversityFactor::Uniform)),
        v => parse_opt::<f64>(v, line, "df").map(|x| x.map(DiversityFactor::Value)),
    }
}

pub fn parse_trace(input: impl Read) -> Result<Trace, TraceError> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    if reader.read_line(&mut first)? == 0 {
        return Err(malformed(1, "empty trace"));
    }
    let scenario = first
        .trim_end_matches(['\r', '\n'])
        .strip_prefix(MAGIC)
        .and_then(|rest| rest.strip_prefix(" scenario="))
        .ok_or_else(|| malformed(1, format!("expected `{MAGIC} scenario=<name>`")))?
        .to_string();

    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let head = csv
        .headers()
        .map_err(|_| malformed(2, "missing column header"))?
        .clone();
    if head.is_empty() || (head.len() == 1 && head[0].is_empty()) {
        return Err(malformed(2, "missing column header"));
    }
    let versions: Vec<String> = head
        .iter()
        .filter_map(|c| c.strip_suffix(".score"))
        .map(str::to_string)
        .collect();
    let expected = header(&versions);
    if head.iter().ne(expected.iter().map(String::as_str)) {
        return Err(malformed(2, "column header does not match the v1 layout"));
    }

    let n = versions.len();
    let mut records = Vec::new();
    let mut last_time = 0;
    for (i, result) in csv.records().enumerate() {
        let line = i + 3;
        let rec = result.map_err(|e| malformed(line, e.to_string()))?;
        let time_s: u64 = rec[0].parse().map_err(|_| malformed(line, "bad time_s"))?;
        if time_s < last_time {
            return Err(malformed(line, "records out of time order"));
        }
        last_time = time_s;
        let kind = RecordKind::parse(&rec[1])
            .ok_or_else(|| malformed(line, format!("unknown kind `{}`", &rec[1])))?;
        let mut reports = Vec::with_capacity(n);
        for v in 0..n {
            let base = 5 + v * GROUP.len();
            let col = |k: usize| &rec[base + k];
            reports.push(VersionReport {
                score: parse_opt(col(0), line, "score")?,
                replicas: parse_opt(col(1), line, "replicas")?,
                restarts_window: parse_opt(col(2), line, "restarts_window")?,
                rt_stddev_ms: parse_opt(col(3), line, "rt_stddev_ms")?,
                mem_stddev_mb: parse_opt(col(4), line, "mem_stddev_mb")?,
                lb_weight: parse_opt(col(5), line, "lb_weight")?,
                rt_mean_ms: parse_opt(col(6), line, "rt_mean_ms")?,
            });
        }
        records.push(TraceRecord {
            time_s,
            kind,
            cpu_pct: parse_opt(&rec[2], line, "cpu_pct")?,
            decision: rec[3].to_string(),
            total_replicas: parse_opt(&rec[4], line, "total_replicas")?,
            versions: reports,
            diversity: parse_df(&rec[rec.len() - 1], line)?,
        });
    }
    Ok(Trace {
        scenario,
        versions,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trace {
        Trace {
            scenario: "t".into(),
            versions: vec!["a".into(), "b".into()],
            records: vec![
                TraceRecord {
                    time_s: 0,
                    kind: RecordKind::Reconfig,
                    cpu_pct: None,
                    decision: "generation=0".into(),
                    total_replicas: Some(4),
                    versions: vec![
                        VersionReport {
                            lb_weight: Some(50),
                            ..Default::default()
                        },
                        VersionReport {
                            lb_weight: Some(50),
                            ..Default::default()
                        },
                    ],
                    diversity: None,
                },
                TraceRecord {
                    time_s: 120,
                    kind: RecordKind::Action,
                    cpu_pct: Some(12.5),
                    decision: "Decrease".into(),
                    total_replicas: Some(3),
                    versions: vec![
                        VersionReport {
                            score: Some(0.25),
                            replicas: Some(1),
                            ..Default::default()
                        },
                        VersionReport {
                            score: Some(0.75),
                            replicas: Some(2),
                            ..Default::default()
                        },
                    ],
                    diversity: Some(DiversityFactor::Value(2.0)),
                },
            ],
        }
    }

    #[test]
    fn round_trips() {
        let t = sample();
        let text = write_trace(&t).unwrap();
        assert!(text.starts_with(
            "# verscale-trace v1 scenario=t\ntime_s,kind,cpu_pct,decision,total_replicas,a.score,"
        ));
        assert_eq!(parse_trace(text.as_bytes()).unwrap(), t);
    }

    #[test]
    fn empty_input_is_malformed() {
        assert!(matches!(
            parse_trace(&b""[..]),
            Err(TraceError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_trace(&b"# verscale-trace v1 scenario=x\n"[..]),
            Err(TraceError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn rejects_bad_rows() {
        let text = write_trace(&sample()).unwrap();
        let bad = text.replace("Decrease", "Decrease\n7,Bogus");
        assert!(parse_trace(bad.as_bytes()).is_err());
        let bad = text.replace("# verscale-trace v1", "# other");
        assert!(parse_trace(bad.as_bytes()).is_err());
    }
}
