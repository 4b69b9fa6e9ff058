use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Connected,
    /// Hit the round cap before connecting.
    TimedOut,
    /// Halted at a requested round.
    Stopped,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Connected => "connected",
            RunStatus::TimedOut => "timed-out",
            RunStatus::Stopped => "stopped",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunStatus {
    type Err = TableError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "connected" => Ok(RunStatus::Connected),
            "timed-out" => Ok(RunStatus::TimedOut),
            "stopped" => Ok(RunStatus::Stopped),
            other => Err(TableError::Field("status", other.to_string())),
        }
    }
}

/// `(N, Y_1..Y_K, ω-count)` at one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub round: u64,
    pub y: Vec<u64>,
    pub omega_components: u64,
}

/// Outcome of one simulated process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rule: String,
    pub k: u32,
    pub n: u64,
    pub seed: u64,
    pub status: RunStatus,
    pub t_con: Option<u64>,
    /// Rounds played.
    pub rounds: u64,
    /// `T_k` at index `k - 1`; `None` while `Y_k > 0`.
    pub t_k: Vec<Option<u64>>,
    /// Sizes whose `T_k` equals `T_con`. Empty means "none".
    pub last_size: Vec<u32>,
    pub giant_time: Option<u64>,
    pub snapshots: Vec<Snapshot>,
    pub rng: String,
}

impl RunRecord {
    pub fn is_connected(&self) -> bool {
        self.status == RunStatus::Connected
    }

    /// Weight this run contributes to "last size = k" (ties split evenly).
    pub fn last_size_weight(&self, k: u32) -> f64 {
        if self.last_size.contains(&k) {
            1.0 / self.last_size.len() as f64
        } else {
            0.0
        }
    }

    pub fn snapshot_at(&self, round: u64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.round == round)
    }
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad {0} value {1:?}")]
    Field(&'static str, String),
    #[error("header mismatch: {0}")]
    Header(String),
    #[error("runs mix different K values")]
    MixedK,
    #[error("snapshot row refers to unknown run {0}")]
    UnknownRun(usize),
}

fn opt(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt(name: &'static str, s: &str) -> Result<Option<u64>, TableError> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|_| TableError::Field(name, s.to_string()))
    }
}

fn parse_u64(name: &'static str, s: &str) -> Result<u64, TableError> {
    s.parse().map_err(|_| TableError::Field(name, s.to_string()))
}

fn format_last_size(sizes: &[u32]) -> String {
    if sizes.is_empty() {
        "none".to_string()
    } else {
        sizes.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
    }
}

fn run_header(k: u32) -> Vec<String> {
    let mut h: Vec<String> = ["rule", "n", "seed", "status", "t_con"].map(String::from).to_vec();
    h.extend((1..=k).map(|i| format!("t_{i}")));
    h.extend(["last_size", "giant_time"].map(String::from));
    h
}

fn snapshot_header(k: u32) -> Vec<String> {
    let mut h = vec!["run".to_string(), "N".to_string()];
    h.extend((1..=k).map(|i| format!("Y_{i}")));
    h.push("omega_count".to_string());
    h
}

fn common_k(records: &[RunRecord]) -> Result<u32, TableError> {
    let k = records.first().map_or(1, |r| r.k);
    if records.iter().any(|r| r.k != k) {
        return Err(TableError::MixedK);
    }
    Ok(k)
}

/// Writes one row per run: `rule,n,seed,status,t_con,t_1..t_K,last_size,giant_time`.
pub fn write_runs<W: io::Write>(out: W, records: &[RunRecord]) -> Result<(), TableError> {
    let k = common_k(records)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(run_header(k))?;
    for r in records {
        let mut row = vec![
            r.rule.clone(),
            r.n.to_string(),
            r.seed.to_string(),
            r.status.to_string(),
            opt(r.t_con),
        ];
        row.extend(r.t_k.iter().map(|&t| opt(t)));
        row.push(format_last_size(&r.last_size));
        row.push(opt(r.giant_time));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the companion snapshot table: `run,N,Y_1..Y_K,omega_count`, where
/// `run` is the row index in the run table.
pub fn write_snapshots<W: io::Write>(out: W, records: &[RunRecord]) -> Result<(), TableError> {
    let k = common_k(records)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(snapshot_header(k))?;
    for (i, r) in records.iter().enumerate() {
        for s in &r.snapshots {
            let mut row = vec![i.to_string(), s.round.to_string()];
            row.extend(s.y.iter().map(u64::to_string));
            row.push(s.omega_components.to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a run table (and optionally its snapshot table) back into records.
/// Fields not present in the tables (`rounds`, `rng`) are reconstructed as
/// `t_con` or `0` and left empty respectively.
pub fn read_runs<R: io::Read, S: io::Read>(runs: R, snapshots: Option<S>) -> Result<Vec<RunRecord>, TableError> {
    let mut rd = csv::Reader::from_reader(runs);
    let headers = rd.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let k = cols.iter().filter(|c| c.starts_with("t_") && *c != &"t_con").count() as u32;
    if cols != run_header(k).iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(TableError::Header(headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let t_con = parse_opt("t_con", &row[4])?;
        let t_k = (0..k as usize)
            .map(|i| parse_opt("t_k", &row[5 + i]))
            .collect::<Result<Vec<_>, _>>()?;
        let ls = &row[5 + k as usize];
        let last_size = if ls == "none" {
            Vec::new()
        } else {
            ls.split(';')
                .map(|s| s.parse().map_err(|_| TableError::Field("last_size", ls.to_string())))
                .collect::<Result<Vec<u32>, _>>()?
        };
        out.push(RunRecord {
            rule: row[0].to_string(),
            k,
            n: parse_u64("n", &row[1])?,
            seed: parse_u64("seed", &row[2])?,
            status: row[3].parse()?,
            t_con,
            rounds: t_con.unwrap_or(0),
            t_k,
            last_size,
            giant_time: parse_opt("giant_time", &row[6 + k as usize])?,
            snapshots: Vec::new(),
            rng: String::new(),
        });
    }
    if let Some(snapshots) = snapshots {
        let mut rd = csv::Reader::from_reader(snapshots);
        let headers = rd.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != snapshot_header(k).iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(TableError::Header(headers.iter().collect::<Vec<_>>().join(",")));
        }
        for row in rd.records() {
            let row = row?;
            let run = parse_u64("run", &row[0])? as usize;
            let y = (0..k as usize)
                .map(|i| parse_u64("Y_k", &row[2 + i]))
                .collect::<Result<Vec<_>, _>>()?;
            let snap = Snapshot {
                round: parse_u64("N", &row[1])?,
                y,
                omega_components: parse_u64("omega_count", &row[2 + k as usize])?,
            };
            out.get_mut(run).ok_or(TableError::UnknownRun(run))?.snapshots.push(snap);
        }
    }
    Ok(out)
}
