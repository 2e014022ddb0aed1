//! Verification report logs (one JSON object per line) and the summary
//! tables computed from them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use spikecheck_core::{SnnModel, SpikeTimes, Verdict, VerdictKind};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dcs,
    Smt,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Dcs => "dcs",
            Self::Smt => "smt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportVerdict {
    Robust,
    NotRobust,
    Unknown,
}

impl From<VerdictKind> for ReportVerdict {
    fn from(k: VerdictKind) -> Self {
        match k {
            VerdictKind::Robust => Self::Robust,
            VerdictKind::NotRobust => Self::NotRobust,
            VerdictKind::Unknown => Self::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleRecord {
    pub input: Vec<u32>,
    pub output_times: Vec<u32>,
    pub predicted: usize,
    pub strict: bool,
}

/// Benchmark grid coordinates of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellShape {
    pub time_steps: u32,
    pub inputs: usize,
    pub hidden: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub instance: String,
    pub method: Method,
    pub delta: u32,
    pub label: usize,
    pub verdict: ReportVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub counterexample: Option<CounterexampleRecord>,
    /// Only meaningful for the direct search.
    pub perturbations_checked: Option<u64>,
    pub wall_time_s: f64,
    pub model_hash: String,
    pub input_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<CellShape>,
}

impl ReportRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        instance: impl Into<String>,
        method: Method,
        model: &SnnModel,
        input: &SpikeTimes,
        label: usize,
        delta: u32,
        verdict: &Verdict,
        cell: Option<CellShape>,
    ) -> Self {
        Self {
            instance: instance.into(),
            method,
            delta,
            label,
            verdict: verdict.kind().into(),
            reason: verdict.reason().map(str::to_owned),
            counterexample: verdict.counterexample().map(|c| CounterexampleRecord {
                input: c.input.times.clone(),
                output_times: c.output_times.clone(),
                predicted: c.prediction.label,
                strict: c.prediction.strict,
            }),
            perturbations_checked: (method == Method::Dcs).then_some(verdict.stats.perturbations_checked),
            wall_time_s: verdict.stats.wall_time.as_secs_f64(),
            model_hash: model.short_hash(),
            input_hash: input.short_hash(),
            cell,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }
}

/// Append-only report file. Appends from several threads are serialized.
#[derive(Debug)]
pub struct ReportLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl ReportLog {
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(Error::io(&path))?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn append(&self, record: &ReportRecord) -> Result<()> {
        let mut line = record.to_line();
        line.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(line.as_bytes())
            .and_then(|()| file.flush())
            .map_err(Error::io(&self.path))
    }
}

pub fn append_report(record: &ReportRecord, path: impl AsRef<Path>) -> Result<()> {
    ReportLog::open(path.as_ref())?.append(record)
}

pub fn read_reports(path: impl AsRef<Path>) -> Result<Vec<ReportRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(Error::io(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Schema(format!("{} line {}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

/// Sample mean and standard deviation (`n - 1` denominator; zero for a
/// single sample).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

impl TimeStats {
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { n, mean, sd })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub method: Method,
    pub delta: u32,
    pub cell: Option<CellShape>,
}

/// One summary line. Times exclude unknown (timed-out) runs, which are
/// only counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub key: CellKey,
    pub robust: usize,
    pub not_robust: usize,
    pub unknown: usize,
    pub time: Option<TimeStats>,
    pub robust_time: Option<TimeStats>,
    pub not_robust_time: Option<TimeStats>,
}

pub fn summarize(records: &[ReportRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<CellKey, Vec<&ReportRecord>> = BTreeMap::new();
    for r in records {
        let key = CellKey {
            method: r.method,
            delta: r.delta,
            cell: r.cell,
        };
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(key, rs)| {
            let times = |want: Option<ReportVerdict>| -> Vec<f64> {
                rs.iter()
                    .filter(|r| r.verdict != ReportVerdict::Unknown)
                    .filter(|r| want.is_none_or(|w| r.verdict == w))
                    .map(|r| r.wall_time_s)
                    .collect()
            };
            let count = |v| rs.iter().filter(|r| r.verdict == v).count();
            SummaryRow {
                key,
                robust: count(ReportVerdict::Robust),
                not_robust: count(ReportVerdict::NotRobust),
                unknown: count(ReportVerdict::Unknown),
                time: TimeStats::of(&times(None)),
                robust_time: TimeStats::of(&times(Some(ReportVerdict::Robust))),
                not_robust_time: TimeStats::of(&times(Some(ReportVerdict::NotRobust))),
            }
        })
        .collect()
}

fn fmt_stats(s: Option<TimeStats>) -> String {
    s.map_or_else(|| "-".into(), |s| format!("{:.6} ± {:.6}", s.mean, s.sd))
}

fn cell_fields(key: &CellKey) -> [String; 3] {
    match key.cell {
        Some(c) => [c.time_steps.to_string(), c.inputs.to_string(), c.hidden.to_string()],
        None => ["".into(), "".into(), "".into()],
    }
}

/// Human-readable table, one row per cell, times in seconds.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:<6} {:>5} {:>5} {:>6} {:>6} {:>6} {:>6} {:>7} {:>28} {:>28}\n",
        "method", "T", "in", "hidden", "delta", "robust", "!rob", "timeout", "robust time (s)", "not robust time (s)"
    );
    for r in rows {
        let [t, i, h] = cell_fields(&r.key);
        let _ = writeln!(
            out,
            "{:<6} {:>5} {:>5} {:>6} {:>6} {:>6} {:>6} {:>7} {:>28} {:>28}",
            r.key.method.as_str(),
            t,
            i,
            h,
            r.key.delta,
            r.robust,
            r.not_robust,
            r.unknown,
            fmt_stats(r.robust_time),
            fmt_stats(r.not_robust_time),
        );
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "method,time_steps,inputs,hidden,delta,robust,not_robust,unknown,mean_s,sd_s,robust_mean_s,robust_sd_s,not_robust_mean_s,not_robust_sd_s\n",
    );
    let pair = |s: Option<TimeStats>| s.map_or_else(|| ",".to_string(), |s| format!("{},{}", s.mean, s.sd));
    for r in rows {
        let [t, i, h] = cell_fields(&r.key);
        let _ = writeln!(
            out,
            "{},{t},{i},{h},{},{},{},{},{},{},{}",
            r.key.method.as_str(),
            r.key.delta,
            r.robust,
            r.not_robust,
            r.unknown,
            pair(r.time),
            pair(r.robust_time),
            pair(r.not_robust_time),
        );
    }
    out
}

/// Ordinary least-squares line through `points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: Vec<(f64, f64)>,
}

/// `None` with fewer than two distinct abscissae.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if points.len() < 2 || sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(LinearFit {
        slope,
        intercept,
        r2,
        points: points.to_vec(),
    })
}

/// Fit of mean wall time against `T` for one `(method, delta, inputs,
/// hidden)` slice of the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTrend {
    pub method: Method,
    pub delta: u32,
    pub inputs: usize,
    pub hidden: usize,
    pub fit: LinearFit,
}

pub fn time_trends(rows: &[SummaryRow]) -> Vec<TimeTrend> {
    let mut slices: BTreeMap<(Method, u32, usize, usize), Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        if let (Some(c), Some(t)) = (r.key.cell, r.time) {
            slices
                .entry((r.key.method, r.key.delta, c.inputs, c.hidden))
                .or_default()
                .push((f64::from(c.time_steps), t.mean));
        }
    }
    slices
        .into_iter()
        .filter_map(|((method, delta, inputs, hidden), pts)| {
            linear_fit(&pts).map(|fit| TimeTrend {
                method,
                delta,
                inputs,
                hidden,
                fit,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats() {
        let s = TimeStats::of(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.n, s.mean, s.sd), (3, 2.0, 1.0));
        assert_eq!(TimeStats::of(&[4.0]).unwrap().sd, 0.0);
        assert!(TimeStats::of(&[]).is_none());
    }

    #[test]
    fn fit_exact_line() {
        let f = linear_fit(&[(1.0, 3.0), (2.0, 5.0), (4.0, 9.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
    }

    #[test]
    fn fit_r2_against_hand_values() {
        // y = (0, 1, 0, 1) over x = 0..4: slope 0.2, intercept 0.2, R^2 = 0.2
        let f = linear_fit(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).unwrap();
        assert!((f.slope - 0.2).abs() < 1e-12);
        assert!((f.intercept - 0.2).abs() < 1e-12);
        assert!((f.r2 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn empty_summary() {
        assert!(summarize(&[]).is_empty());
    }
}
