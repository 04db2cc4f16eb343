//! Dataset files: read, validate, write, and summarize.
//!
//! The canonical dataset schema is comma-separated UTF-8 with a mandatory
//! header and one event per line:
//!
//! ```text
//! producer_id,seq_id,dt,cst,srect,srest,crt,payload_bytes
//! ```
//!
//! All times are integer milliseconds since the Unix epoch. Files whose
//! columns carry different names can be read through a [`ColumnMapping`].
//! Reading validates every record and returns the stream sorted into
//! fusion-center arrival order.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::buffer::{BufferSample, EmittedEvent};
use crate::error::{Error, Result};
use crate::eval::RunResult;
use crate::event::{Event, detect_ooo_by_dt, sort_arrival_order};
use crate::strategy::nearest_rank;

/// Canonical dataset header, in column order.
pub const DATASET_HEADER: [&str; 8] = [
    "producer_id",
    "seq_id",
    "dt",
    "cst",
    "srect",
    "srest",
    "crt",
    "payload_bytes",
];

/// Maps the canonical field names onto the column names found in a file.
#[derive(Debug, Clone)]
pub struct ColumnMapping {
    pub producer_id: String,
    pub seq_id: String,
    pub dt: String,
    pub cst: String,
    pub srect: String,
    pub srest: String,
    pub crt: String,
    pub payload_bytes: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            producer_id: "producer_id".into(),
            seq_id: "seq_id".into(),
            dt: "dt".into(),
            cst: "cst".into(),
            srect: "srect".into(),
            srest: "srest".into(),
            crt: "crt".into(),
            payload_bytes: "payload_bytes".into(),
        }
    }
}

impl ColumnMapping {
    /// Parses overrides like `"seq_id=sid,dt=detection_time"`; fields not
    /// mentioned keep their canonical names.
    pub fn parse(overrides: &str) -> Result<Self> {
        let mut mapping = Self::default();
        for pair in overrides.split(',').filter(|p| !p.trim().is_empty()) {
            let (field, column) = pair.split_once('=').ok_or_else(|| {
                Error::InvalidParam(format!("column mapping needs field=column, got '{pair}'"))
            })?;
            let column = column.trim().to_owned();
            match field.trim() {
                "producer_id" => mapping.producer_id = column,
                "seq_id" => mapping.seq_id = column,
                "dt" => mapping.dt = column,
                "cst" => mapping.cst = column,
                "srect" => mapping.srect = column,
                "srest" => mapping.srest = column,
                "crt" => mapping.crt = column,
                "payload_bytes" => mapping.payload_bytes = column,
                other => {
                    return Err(Error::InvalidParam(format!(
                        "unknown dataset field '{other}'"
                    )));
                }
            }
        }
        Ok(mapping)
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_owned(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_owned(),
        source,
    }
}

/// Reads a dataset with canonical column names.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<Event>> {
    read_dataset_with_mapping(path, &ColumnMapping::default())
}

/// Reads a dataset whose columns are named per `mapping`. Records are
/// validated and the result is sorted into arrival order.
pub fn read_dataset_with_mapping(
    path: impl AsRef<Path>,
    mapping: &ColumnMapping,
) -> Result<Vec<Event>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err(path))?;

    let headers = reader.headers().map_err(csv_err(path))?.clone();
    let index_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::BadHeader {
                path: path.to_owned(),
                detail: format!("missing column '{name}'"),
            })
    };
    let producer_col = index_of(&mapping.producer_id)?;
    let seq_col = index_of(&mapping.seq_id)?;
    let dt_col = index_of(&mapping.dt)?;
    let cst_col = index_of(&mapping.cst)?;
    let srect_col = index_of(&mapping.srect)?;
    let srest_col = index_of(&mapping.srest)?;
    let crt_col = index_of(&mapping.crt)?;
    let payload_col = index_of(&mapping.payload_bytes)?;

    let mut events = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for record in reader.records() {
        let record = record.map_err(csv_err(path))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |col: usize| -> Result<&str> {
            record.get(col).ok_or_else(|| Error::MalformedRow {
                path: path.to_owned(),
                line,
                detail: format!("missing field {col}"),
            })
        };
        let int = |col: usize, name: &str| -> Result<i64> {
            field(col)?.parse().map_err(|_| Error::MalformedRow {
                path: path.to_owned(),
                line,
                detail: format!("bad integer in '{name}': '{}'", field(col).unwrap_or("")),
            })
        };
        let uint = |col: usize, name: &str| -> Result<u64> {
            field(col)?.parse().map_err(|_| Error::MalformedRow {
                path: path.to_owned(),
                line,
                detail: format!("bad integer in '{name}': '{}'", field(col).unwrap_or("")),
            })
        };

        let event = Event {
            producer_id: field(producer_col)?.to_owned(),
            seq_id: uint(seq_col, "seq_id")?,
            dt: int(dt_col, "dt")?,
            cst: int(cst_col, "cst")?,
            srect: int(srect_col, "srect")?,
            srest: int(srest_col, "srest")?,
            crt: int(crt_col, "crt")?,
            payload_bytes: uint(payload_col, "payload_bytes")?,
        };
        event.validate()?;
        if !seen.insert((event.producer_id.clone(), event.seq_id)) {
            return Err(Error::DuplicateEvent {
                producer_id: event.producer_id,
                seq_id: event.seq_id,
            });
        }
        events.push(event);
    }
    sort_arrival_order(&mut events);
    Ok(events)
}

/// Writes a dataset in the canonical schema.
pub fn write_dataset(events: &[Event], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    dataset_to_writer(events, file).map_err(csv_err(path))
}

/// Writes the canonical dataset CSV to any writer.
pub fn dataset_to_writer<W: Write>(
    events: &[Event],
    writer: W,
) -> std::result::Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(DATASET_HEADER)?;
    for e in events {
        out.write_record([
            e.producer_id.as_str(),
            &e.seq_id.to_string(),
            &e.dt.to_string(),
            &e.cst.to_string(),
            &e.srect.to_string(),
            &e.srest.to_string(),
            &e.crt.to_string(),
            &e.payload_bytes.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes an emission log:
/// `producer_id,seq_id,dt,srect,emit_clock,compensated,buffer_time_used`.
pub fn write_emission_log(emissions: &[EmittedEvent], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    emission_log_to_writer(emissions, file).map_err(csv_err(path))
}

/// Writes the emission log CSV to any writer.
pub fn emission_log_to_writer<W: Write>(
    emissions: &[EmittedEvent],
    writer: W,
) -> std::result::Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "producer_id",
        "seq_id",
        "dt",
        "srect",
        "emit_clock",
        "compensated",
        "buffer_time_used",
    ])?;
    for e in emissions {
        out.write_record([
            e.event.producer_id.as_str(),
            &e.event.seq_id.to_string(),
            &e.event.dt.to_string(),
            &e.event.srect.to_string(),
            &e.emit_clock.to_string(),
            if e.compensated { "true" } else { "false" },
            &e.buffer_time_used.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes one metrics row per run:
/// `dataset,algorithm,params,events,ooo_events,not_compensated,
/// not_compensated_pct,mean_buffer_ms,min_required_buffer_ms,overfit_pct`.
/// A run that needed no buffer at all leaves `overfit_pct` empty.
pub fn write_metrics(results: &[RunResult], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    metrics_to_writer(results, file).map_err(csv_err(path))
}

/// Writes the metrics CSV to any writer.
pub fn metrics_to_writer<W: Write>(
    results: &[RunResult],
    writer: W,
) -> std::result::Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "dataset",
        "algorithm",
        "params",
        "events",
        "ooo_events",
        "not_compensated",
        "not_compensated_pct",
        "mean_buffer_ms",
        "min_required_buffer_ms",
        "overfit_pct",
    ])?;
    for r in results {
        out.write_record([
            r.dataset.as_str(),
            r.algorithm.name(),
            r.params.as_str(),
            &r.events.to_string(),
            &r.ooo_events.to_string(),
            &r.not_compensated.to_string(),
            &r.not_compensated_pct.to_string(),
            &r.mean_buffer_ms.to_string(),
            &r.min_required_buffer_ms.to_string(),
            &r.overfit_pct.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a plot-ready buffer-time series: `event_index,srect,buffer_ms`.
pub fn write_buffer_series(series: &[BufferSample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    buffer_series_to_writer(series, file).map_err(csv_err(path))
}

/// Writes the buffer-series CSV to any writer.
pub fn buffer_series_to_writer<W: Write>(
    series: &[BufferSample],
    writer: W,
) -> std::result::Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["event_index", "srect", "buffer_ms"])?;
    for s in series {
        out.write_record([
            s.event_index.to_string(),
            s.srect.to_string(),
            s.buffer_ms.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Distribution of full processing times, all in milliseconds.
/// Quartiles use the nearest-rank convention; the standard deviation uses
/// the n-1 divisor.
#[derive(Debug, Clone, PartialEq)]
pub struct FptStats {
    pub min: i64,
    pub q1: i64,
    pub median: i64,
    pub mean: f64,
    pub q3: i64,
    pub max: i64,
    pub stddev: f64,
}

/// Session-level summary of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub event_count: usize,
    pub client_count: usize,
    /// Out-of-order events by detection time, in the given arrival order.
    pub ooo_count_by_dt: usize,
    pub ooo_pct: f64,
    pub fpt: FptStats,
    /// Net payload throughput at the server, KiB per second over the
    /// observed session span.
    pub server_kib_s: f64,
    /// Server rate divided by the number of clients.
    pub client_kib_s: f64,
}

/// Summarizes a dataset given in arrival order.
pub fn summarize(events: &[Event]) -> Result<DatasetSummary> {
    if events.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut fpts: Vec<i64> = events.iter().map(Event::full_proc_ms).collect();
    fpts.sort_unstable();
    let n = fpts.len();
    let mean = fpts.iter().sum::<i64>() as f64 / n as f64;
    let stddev = if n >= 2 {
        let ss: f64 = fpts.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let fpt = FptStats {
        min: fpts[0],
        q1: nearest_rank(&fpts, 0.25),
        median: nearest_rank(&fpts, 0.50),
        mean,
        q3: nearest_rank(&fpts, 0.75),
        max: fpts[n - 1],
        stddev,
    };

    let ooo_count_by_dt = detect_ooo_by_dt(events).iter().filter(|&&f| f).count();
    let mut clients: Vec<&str> = events.iter().map(|e| e.producer_id.as_str()).collect();
    clients.sort_unstable();
    clients.dedup();
    let client_count = clients.len();

    let span_ms =
        events.iter().map(|e| e.srect).max().unwrap() - events.iter().map(|e| e.dt).min().unwrap();
    let total_bytes: u64 = events.iter().map(|e| e.payload_bytes).sum();
    let server_kib_s = if span_ms > 0 {
        (total_bytes as f64 / 1024.0) / (span_ms as f64 / 1000.0)
    } else {
        0.0
    };

    Ok(DatasetSummary {
        event_count: n,
        client_count,
        ooo_count_by_dt,
        ooo_pct: 100.0 * ooo_count_by_dt as f64 / n as f64,
        fpt,
        server_kib_s,
        client_kib_s: server_kib_s / client_count as f64,
    })
}

/// Writes a one-row summary CSV.
pub fn write_summary(summary: &DatasetSummary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    summary_to_writer(summary, file).map_err(csv_err(path))
}

/// Writes the summary CSV to any writer.
pub fn summary_to_writer<W: Write>(
    summary: &DatasetSummary,
    writer: W,
) -> std::result::Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "events",
        "clients",
        "ooo_by_dt",
        "ooo_pct",
        "fpt_min",
        "fpt_q1",
        "fpt_median",
        "fpt_mean",
        "fpt_q3",
        "fpt_max",
        "fpt_stddev",
        "server_kib_s",
        "client_kib_s",
    ])?;
    out.write_record([
        summary.event_count.to_string(),
        summary.client_count.to_string(),
        summary.ooo_count_by_dt.to_string(),
        summary.ooo_pct.to_string(),
        summary.fpt.min.to_string(),
        summary.fpt.q1.to_string(),
        summary.fpt.median.to_string(),
        summary.fpt.mean.to_string(),
        summary.fpt.q3.to_string(),
        summary.fpt.max.to_string(),
        summary.fpt.stddev.to_string(),
        summary.server_kib_s.to_string(),
        summary.client_kib_s.to_string(),
    ])?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{DelayModel, IntervalSchedule, WorkloadSpec, generate};

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn empty_body_with_valid_header_is_empty_stream() {
        let f = write_temp("producer_id,seq_id,dt,cst,srect,srest,crt,payload_bytes\n");
        assert!(read_dataset(f.path()).unwrap().is_empty());
    }

    #[test]
    fn rows_come_back_in_arrival_order() {
        let f = write_temp(
            "producer_id,seq_id,dt,cst,srect,srest,crt,payload_bytes\n\
             a,2,30,30,90,90,90,0\n\
             b,1,10,10,40,40,40,0\n\
             a,1,5,5,50,50,50,0\n",
        );
        let events = read_dataset(f.path()).unwrap();
        let srects: Vec<i64> = events.iter().map(|e| e.srect).collect();
        assert_eq!(srects, vec![40, 50, 90]);
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let f = write_temp(
            "producer_id,seq_id,dt,cst,srect,srest,crt,payload_bytes\n\
             a,1,10,10,40,40,40,0\n\
             a,2,oops,10,40,40,40,0\n",
        );
        match read_dataset(f.path()).unwrap_err() {
            Error::MalformedRow { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn invariant_violation_identifies_record() {
        let f = write_temp(
            "producer_id,seq_id,dt,cst,srect,srest,crt,payload_bytes\n\
             late,7,100,90,140,140,140,0\n",
        );
        match read_dataset(f.path()).unwrap_err() {
            Error::InvalidEvent {
                producer_id,
                seq_id,
                ..
            } => {
                assert_eq!(producer_id, "late");
                assert_eq!(seq_id, 7);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_producer_seq_rejected() {
        let f = write_temp(
            "producer_id,seq_id,dt,cst,srect,srest,crt,payload_bytes\n\
             a,1,10,10,40,40,40,0\n\
             a,1,11,11,41,41,41,0\n",
        );
        assert!(matches!(
            read_dataset(f.path()),
            Err(Error::DuplicateEvent { .. })
        ));
    }

    #[test]
    fn missing_column_is_a_header_error() {
        let f = write_temp("producer_id,seq_id,dt,cst,srect,srest,crt\na,1,1,1,1,1,1\n");
        assert!(matches!(
            read_dataset(f.path()),
            Err(Error::BadHeader { .. })
        ));
    }

    #[test]
    fn column_mapping_reads_foreign_names() {
        let f = write_temp(
            "client,sid,detection,send,received,responded,confirmed,bytes\n\
             a,1,10,11,40,41,42,128\n",
        );
        let mapping = ColumnMapping::parse(
            "producer_id=client,seq_id=sid,dt=detection,cst=send,srect=received,\
             srest=responded,crt=confirmed,payload_bytes=bytes",
        )
        .unwrap();
        let events = read_dataset_with_mapping(f.path(), &mapping).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].dt, 10);
        assert_eq!(events[0].payload_bytes, 128);
        assert!(ColumnMapping::parse("nonsense=x").is_err());
    }

    #[test]
    fn round_trip_is_field_exact() {
        let spec = WorkloadSpec {
            producers: 5,
            session_s: 40,
            interval: IntervalSchedule::Constant { interval_ms: 200 },
            delay: DelayModel::Uniform {
                lo_ms: 0,
                hi_ms: 700,
            },
            payload_bytes: 512,
            seed: 42,
        };
        let events = generate(&spec).unwrap();
        assert_eq!(events.len(), 1000);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        write_dataset(&events, &path).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), events);
    }

    #[test]
    fn summarize_constant_fpt() {
        let events: Vec<Event> = (0..40)
            .map(|i| Event {
                producer_id: format!("p{}", i % 2),
                seq_id: i / 2,
                dt: i as i64 * 100,
                cst: i as i64 * 100,
                srect: i as i64 * 100 + 55,
                srest: i as i64 * 100 + 55,
                crt: i as i64 * 100 + 55,
                payload_bytes: 0,
            })
            .collect();
        let s = summarize(&events).unwrap();
        assert_eq!(s.event_count, 40);
        assert_eq!(s.client_count, 2);
        assert_eq!(s.ooo_count_by_dt, 0);
        assert_eq!(s.fpt.min, 55);
        assert_eq!(s.fpt.q1, 55);
        assert_eq!(s.fpt.median, 55);
        assert_eq!(s.fpt.mean, 55.0);
        assert_eq!(s.fpt.q3, 55);
        assert_eq!(s.fpt.max, 55);
        assert_eq!(s.fpt.stddev, 0.0);
    }

    #[test]
    fn summarize_matches_independent_recomputation() {
        let spec = WorkloadSpec {
            producers: 4,
            session_s: 10,
            interval: IntervalSchedule::Constant { interval_ms: 200 },
            delay: DelayModel::Uniform {
                lo_ms: 10,
                hi_ms: 600,
            },
            payload_bytes: 100,
            seed: 3,
        };
        let events = generate(&spec).unwrap();
        assert_eq!(events.len(), 200);
        let s = summarize(&events).unwrap();

        // Spreadsheet-style recomputation, coded independently.
        let mut fpts: Vec<i64> = events.iter().map(|e| e.crt - e.dt).collect();
        fpts.sort();
        let pick = |frac: f64| {
            let rank = (frac * fpts.len() as f64).ceil() as usize;
            fpts[rank.max(1) - 1]
        };
        let mean = fpts.iter().map(|&v| v as f64).sum::<f64>() / fpts.len() as f64;
        let var = fpts
            .iter()
            .map(|&v| (v as f64 - mean) * (v as f64 - mean))
            .sum::<f64>()
            / (fpts.len() - 1) as f64;
        let mut ooo = 0usize;
        for j in 1..events.len() {
            if events[..j].iter().any(|e| e.dt > events[j].dt) {
                ooo += 1;
            }
        }

        assert_eq!(s.fpt.min, fpts[0]);
        assert_eq!(s.fpt.max, *fpts.last().unwrap());
        assert_eq!(s.fpt.q1, pick(0.25));
        assert_eq!(s.fpt.median, pick(0.50));
        assert_eq!(s.fpt.q3, pick(0.75));
        assert!((s.fpt.mean - mean).abs() < 1e-9);
        assert!((s.fpt.stddev - var.sqrt()).abs() < 1e-9);
        assert_eq!(s.ooo_count_by_dt, ooo);
        assert!((s.ooo_pct - 100.0 * ooo as f64 / 200.0).abs() < 1e-9);
    }

    #[test]
    fn fpt_stats_ignore_arrival_permutation() {
        let spec = WorkloadSpec {
            producers: 3,
            session_s: 8,
            interval: IntervalSchedule::Constant { interval_ms: 100 },
            delay: DelayModel::Uniform {
                lo_ms: 5,
                hi_ms: 400,
            },
            payload_bytes: 0,
            seed: 8,
        };
        let events = generate(&spec).unwrap();
        let base = summarize(&events).unwrap();
        let mut reversed = events.clone();
        reversed.reverse();
        let permuted = summarize(&reversed).unwrap();
        assert_eq!(base.fpt, permuted.fpt);
        assert_eq!(base.client_count, permuted.client_count);
    }

    #[test]
    fn summarize_rejects_empty() {
        assert!(matches!(summarize(&[]), Err(Error::EmptyDataset)));
    }

    #[test]
    fn emission_log_row_count_matches_dataset() {
        use crate::buffer::{EngineConfig, run_replay};
        use crate::strategy::Algorithm;
        let spec = WorkloadSpec {
            producers: 3,
            session_s: 6,
            interval: IntervalSchedule::Constant { interval_ms: 100 },
            delay: DelayModel::Uniform {
                lo_ms: 5,
                hi_ms: 300,
            },
            payload_bytes: 0,
            seed: 4,
        };
        let events = generate(&spec).unwrap();
        let mut strategy = Algorithm::Bsttda
            .build(&Algorithm::Bsttda.default_config())
            .unwrap();
        let out = run_replay(&events, strategy.as_mut(), &EngineConfig::default()).unwrap();
        let mut bytes = Vec::new();
        emission_log_to_writer(&out.emissions, &mut bytes).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.lines().count(), events.len() + 1);
        assert!(text.starts_with("producer_id,seq_id,dt,srect,emit_clock,compensated,"));
    }
}
