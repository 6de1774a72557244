//! CSV artifacts. Numbers are written with Rust's shortest round-trip float
//! formatting, so identical runs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use hcsnet_core::handover::{Label, Signaled};
use hcsnet_core::metrics::empirical_cdf;

use crate::error::{SimError, SimResult};
use crate::scenario::ScenarioOutput;
use crate::sweep::SweepRow;

pub const CDF_CSV: &str = "cdf.csv";
pub const TIMINGS_CSV: &str = "timings.csv";
pub const HANDOVER_LOG_CSV: &str = "handover_log.csv";
pub const OVERHEAD_CSV: &str = "overhead.csv";
pub const LABELS_CSV: &str = "labels.csv";
pub const LAYOUT_CSV: &str = "layout.csv";
pub const SWEEP_CSV: &str = "sweep.csv";

pub const TIMING_NOTE: &str = "wall-clock measurement; not reproducible";

/// In-memory CSV document.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> SimResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| SimError::Csv {
            path: PathBuf::from("<memory>"),
            message: e.to_string(),
        };
        w.write_record(&self.header).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        w.into_inner().map_err(|e| SimError::Csv {
            path: PathBuf::from("<memory>"),
            message: e.to_string(),
        })
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn cdf_table(out: &ScenarioOutput) -> SimResult<Table> {
    let mut t = Table::new(&["scheme", "value", "probability"]);
    for s in &out.comp.samples {
        if s.spectral_efficiency.is_empty() {
            continue;
        }
        for (v, p) in empirical_cdf(&s.spectral_efficiency)? {
            t.push(vec![s.scheme.name().into(), num(v), num(p)]);
        }
    }
    Ok(t)
}

pub fn timings_table(out: &ScenarioOutput) -> Table {
    let mut t = Table::new(&["scheme", "n_rrhs", "wall_time_s", "iterations", "note"]);
    for r in &out.timings {
        t.push(vec![
            r.scheme.name().into(),
            r.n_rrhs.to_string(),
            num(r.wall_time_s),
            r.iterations.to_string(),
            TIMING_NOTE.into(),
        ]);
    }
    t
}

pub fn handover_log_table(out: &ScenarioOutput) -> Table {
    let mut t = Table::new(&[
        "t_s", "ue_id", "source", "target", "inter_pool", "label", "overhead", "scheme",
    ]);
    for run in &out.handover {
        for h in &run.handovers {
            t.push(vec![
                format!("{:.3}", h.t_complete),
                h.ue.to_string(),
                h.source.to_string(),
                h.target.to_string(),
                h.inter_pool.to_string(),
                h.label.name().into(),
                num(h.overhead()),
                run.scheme.name().into(),
            ]);
        }
    }
    t
}

pub fn overhead_table(out: &ScenarioOutput) -> Table {
    let mut t = Table::new(&[
        "scheme",
        "handovers",
        "suppressed",
        "rlf",
        "sessions",
        "overhead",
        "overhead_to_srrh",
        "overhead_per_session",
    ]);
    for run in &out.handover {
        t.push(vec![
            run.scheme.name().into(),
            run.handovers.len().to_string(),
            run.suppressed.len().to_string(),
            run.rlfs.len().to_string(),
            run.sessions.to_string(),
            num(run.overhead()),
            num(run.overhead_to_srrh()),
            num(run.overhead_per_session()),
        ]);
    }
    t
}

pub fn labels_table(out: &ScenarioOutput) -> Table {
    let mut t = Table::new(&["scheme", "event", "label", "count"]);
    for run in &out.handover {
        for label in Label::ALL {
            let ho = run.handovers.iter().filter(|h| h.label == label).count();
            let rlf = run.rlfs.iter().filter(|(_, l)| *l == label).count();
            for (event, count) in [("handover", ho), ("rlf", rlf)] {
                t.push(vec![
                    run.scheme.name().into(),
                    event.into(),
                    label.name().into(),
                    count.to_string(),
                ]);
            }
        }
    }
    t
}

pub fn sweep_table(param: &str, rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&["param", "value", "scheme", "metric", "mean", "std", "reps"]);
    for r in rows {
        t.push(vec![
            param.into(),
            r.value.clone(),
            r.scheme.clone(),
            r.metric.clone(),
            num(r.mean),
            num(r.std),
            r.reps.to_string(),
        ]);
    }
    t
}

pub fn ensure_dir(dir: &Path) -> SimResult<()> {
    fs::create_dir_all(dir).map_err(SimError::io(dir))
}

/// Writes all documents, or none if any of them fails to serialize.
pub fn write_tables(dir: &Path, tables: &[(&str, &Table)]) -> SimResult<()> {
    let encoded: Vec<(PathBuf, Vec<u8>)> = tables
        .iter()
        .map(|(name, t)| Ok((dir.join(name), t.to_bytes()?)))
        .collect::<SimResult<_>>()?;
    ensure_dir(dir)?;
    for (path, bytes) in encoded {
        fs::write(&path, bytes).map_err(SimError::io(&path))?;
    }
    Ok(())
}

pub fn write_run(dir: &Path, out: &ScenarioOutput) -> SimResult<()> {
    let cdf = cdf_table(out)?;
    let timings = timings_table(out);
    let log = handover_log_table(out);
    let overhead = overhead_table(out);
    let labels = labels_table(out);
    write_tables(
        dir,
        &[
            (CDF_CSV, &cdf),
            (TIMINGS_CSV, &timings),
            (HANDOVER_LOG_CSV, &log),
            (OVERHEAD_CSV, &overhead),
            (LABELS_CSV, &labels),
        ],
    )?;
    let layout_path = dir.join(LAYOUT_CSV);
    fs::write(&layout_path, out.layout.to_csv()).map_err(SimError::io(&layout_path))
}

/// Reads a CSV written by this module into header-keyed string records.
pub fn read_csv(path: &Path) -> SimResult<Vec<csv::StringRecord>> {
    let fail = |message: String| SimError::Csv {
        path: path.to_path_buf(),
        message,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| fail(e.to_string()))?;
    r.records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| fail(e.to_string()))
}
