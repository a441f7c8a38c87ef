//! Benchmark runner: one child process per instance under wall-clock and CPU
//! limits, verification of synthesized controllers, scoring, ranking, and
//! cactus-plot data.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::fs;
use std::io;
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::SolverChoice;
use crate::synthesis::quality_score;

/// Wall-clock limit per instance, in seconds.
pub const DEFAULT_WALL_LIMIT: f64 = 3600.0;
/// Extended profile: longer wall-clock limit and a CPU budget of four times that.
pub const EXTENDED_WALL_LIMIT: f64 = 10_000.0;
pub const EXTENDED_CPU_LIMIT: f64 = 40_000.0;
/// Tolerated overshoot of the wall-clock limit by the polling loop.
pub const GRACE_SECS: f64 = 5.0;

pub const REFS_FILE: &str = "refs.csv";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read suite {path}: {source}")]
    Suite { path: String, source: io::Error },
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Track {
    Safety,
    Parity,
}

impl Track {
    fn accepts(self, path: &Path) -> bool {
        let ext = path.extension().and_then(|e| e.to_str());
        match self {
            Track::Safety => ext == Some("aag"),
            Track::Parity => matches!(ext, Some("ehoa" | "hoa")),
        }
    }
}

impl FromStr for Track {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "safety" => Ok(Track::Safety),
            "parity" => Ok(Track::Parity),
            other => Err(format!("unknown track {other:?} (safety|parity)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "real")]
    Realizability,
    #[serde(rename = "synth")]
    Synthesis,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" | "realizability" => Ok(Mode::Realizability),
            "synth" | "synthesis" => Ok(Mode::Synthesis),
            other => Err(format!("unknown mode {other:?} (real|synth)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Realizability => "real",
            Mode::Synthesis => "synth",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RunVerdict {
    Realizable,
    Unrealizable,
    Timeout,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verified {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "N/A")]
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: String,
    pub instance: String,
    pub track: Track,
    pub mode: Mode,
    pub verdict: RunVerdict,
    pub wall_time: f64,
    pub cpu_time: f64,
    pub gates: Option<u64>,
    pub verified: Verified,
    pub quality: Option<f64>,
}

impl RunRecord {
    /// Answered within the limits; a synthesized controller must also pass model
    /// checking. An unrealizable verdict produces no controller to check.
    pub fn solved(&self) -> bool {
        match self.verdict {
            RunVerdict::Unrealizable => true,
            RunVerdict::Realizable => self.mode == Mode::Realizability || self.verified == Verified::Pass,
            RunVerdict::Timeout | RunVerdict::Error => false,
        }
    }

    fn points(&self) -> f64 {
        if self.verified == Verified::Pass {
            self.quality.unwrap_or(0.0)
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigSummary {
    pub config: String,
    pub solved: usize,
    pub quality: f64,
    /// Total wall time over solved instances.
    pub wall_time: f64,
    pub cpu_time: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scoreboard {
    pub records: Vec<RunRecord>,
}

impl Scoreboard {
    pub fn merge(&mut self, other: Scoreboard) {
        self.records.extend(other.records);
        self.sort();
    }

    fn sort(&mut self) {
        self.records
            .sort_by(|a, b| (&a.config, &a.instance).cmp(&(&b.config, &b.instance)));
    }

    pub fn summaries(&self) -> Vec<ConfigSummary> {
        let mut by: BTreeMap<&str, ConfigSummary> = BTreeMap::new();
        for r in &self.records {
            let s = by.entry(&r.config).or_insert_with(|| ConfigSummary {
                config: r.config.clone(),
                solved: 0,
                quality: 0.0,
                wall_time: 0.0,
                cpu_time: 0.0,
            });
            if r.solved() {
                s.solved += 1;
                s.wall_time += r.wall_time;
                s.cpu_time += r.cpu_time;
            }
            s.quality += r.points();
        }
        by.into_values().collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), BenchError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
        w.write_record(SCOREBOARD_HEADER)?;
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Scoreboard, BenchError> {
        let mut rd = csv::Reader::from_path(path)?;
        let records = rd.deserialize().collect::<Result<Vec<RunRecord>, _>>()?;
        let mut board = Scoreboard { records };
        board.sort();
        Ok(board)
    }
}

const SCOREBOARD_HEADER: [&str; 10] = [
    "config",
    "instance",
    "track",
    "mode",
    "verdict",
    "wall_time",
    "cpu_time",
    "gates",
    "verified",
    "quality",
];

/// Configurations ordered by solved count (desc) and by quality points (desc);
/// ties go to the smaller total wall time.
#[derive(Clone, Debug, PartialEq)]
pub struct Ranking {
    pub by_solved: Vec<ConfigSummary>,
    pub by_quality: Vec<ConfigSummary>,
}

pub fn rank(board: &Scoreboard) -> Ranking {
    let mut by_solved = board.summaries();
    by_solved.sort_by(|a, b| b.solved.cmp(&a.solved).then(a.wall_time.total_cmp(&b.wall_time)));
    let mut by_quality = board.summaries();
    by_quality.sort_by(|a, b| {
        b.quality
            .total_cmp(&a.quality)
            .then(a.wall_time.total_cmp(&b.wall_time))
    });
    Ranking { by_solved, by_quality }
}

/// One point of a cactus series: after `solved` instances (cheapest first),
/// the accumulated cost.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CactusPoint {
    pub config: String,
    pub solved: usize,
    pub cumulative: f64,
}

fn cactus(board: &Scoreboard, cost: impl Fn(&RunRecord) -> Option<f64>) -> Vec<CactusPoint> {
    let mut per: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in &board.records {
        if r.solved() {
            if let Some(c) = cost(r) {
                per.entry(&r.config).or_default().push(c);
            }
        }
    }
    let mut out = Vec::new();
    for (config, mut costs) in per {
        costs.sort_by(f64::total_cmp);
        let mut acc = 0.0;
        for (k, c) in costs.into_iter().enumerate() {
            acc += c;
            out.push(CactusPoint {
                config: config.to_string(),
                solved: k + 1,
                cumulative: acc,
            });
        }
    }
    out
}

/// Cumulative wall time over solved instances, per configuration.
pub fn cactus_time(board: &Scoreboard) -> Vec<CactusPoint> {
    cactus(board, |r| Some(r.wall_time))
}

/// Cumulative gate count over solved synthesis instances, per configuration.
pub fn cactus_size(board: &Scoreboard) -> Vec<CactusPoint> {
    cactus(board, |r| r.gates.map(|g| g as f64))
}

fn write_cactus(path: &Path, column: &str, points: &[CactusPoint]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["config", "solved", column])?;
    for p in points {
        w.write_record([p.config.clone(), p.solved.to_string(), format!("{}", p.cumulative)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn ranking_markdown(board: &Scoreboard) -> String {
    let r = rank(board);
    let mut s = String::new();
    s.push_str("# Ranking\n\n## Solved instances\n\n");
    s.push_str("| rank | config | solved | wall time (s) | cpu time (s) |\n|---|---|---|---|---|\n");
    for (k, c) in r.by_solved.iter().enumerate() {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {:.3} | {:.3} |",
            k + 1,
            c.config,
            c.solved,
            c.wall_time,
            c.cpu_time
        );
    }
    s.push_str("\n## Quality\n\n");
    s.push_str("| rank | config | points | solved | wall time (s) |\n|---|---|---|---|---|\n");
    for (k, c) in r.by_quality.iter().enumerate() {
        let _ = writeln!(
            s,
            "| {} | {} | {:.3} | {} | {:.3} |",
            k + 1,
            c.config,
            c.quality,
            c.solved,
            c.wall_time
        );
    }
    s
}

/// Writes `scoreboard.csv`, `cactus_time.csv`, `cactus_size.csv`, and `ranking.md`.
pub fn emit_report(board: &Scoreboard, dir: &Path) -> Result<(), BenchError> {
    fs::create_dir_all(dir)?;
    board.write_csv(&dir.join("scoreboard.csv"))?;
    write_cactus(&dir.join("cactus_time.csv"), "cumulative_time", &cactus_time(board))?;
    write_cactus(&dir.join("cactus_size.csv"), "cumulative_gates", &cactus_size(board))?;
    fs::write(dir.join("ranking.md"), ranking_markdown(board))?;
    Ok(())
}

/// What a worker process prints (as one JSON line) on success.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerReport {
    pub realizable: bool,
    pub gates: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    /// Label of this configuration in the scoreboard.
    pub name: String,
    pub suite: PathBuf,
    pub track: Track,
    pub mode: Mode,
    pub wall_limit: f64,
    pub cpu_limit: f64,
    pub workers: usize,
    pub solver: SolverChoice,
    /// Command prefix of the worker; the runner appends
    /// `worker --spec FILE --mode M --solver S [--controller OUT]`.
    pub worker: Vec<String>,
    /// Command prefix of the verifier; the runner appends
    /// `verify --spec FILE --controller OUT`.
    pub verifier: Vec<String>,
    /// Scratch directory for controllers and worker output.
    pub scratch: PathBuf,
}

impl BenchConfig {
    /// Configuration using the running executable for workers and verification.
    pub fn new(suite: PathBuf, track: Track, mode: Mode, scratch: PathBuf) -> io::Result<BenchConfig> {
        let exe = std::env::current_exe()?.display().to_string();
        Ok(BenchConfig {
            name: SolverChoice::default().to_string(),
            suite,
            track,
            mode,
            wall_limit: DEFAULT_WALL_LIMIT,
            cpu_limit: DEFAULT_WALL_LIMIT,
            workers: 1,
            solver: SolverChoice::default(),
            worker: vec![exe.clone()],
            verifier: vec![exe],
            scratch,
        })
    }

    pub fn extended_profile(mut self) -> BenchConfig {
        self.wall_limit = EXTENDED_WALL_LIMIT;
        self.cpu_limit = EXTENDED_CPU_LIMIT;
        self
    }
}

/// How a limited child process ended.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChildRun {
    /// Exit code, or `None` when killed by a signal.
    pub code: Option<i32>,
    pub wall: f64,
    /// User CPU seconds of the child.
    pub cpu: f64,
    pub wall_exceeded: bool,
    pub cpu_exceeded: bool,
}

/// Runs `cmd` in its own process group with an RLIMIT_CPU budget, killing the
/// group once `wall_limit` seconds have passed.
pub fn run_limited(cmd: &mut Command, wall_limit: f64, cpu_limit: f64) -> io::Result<ChildRun> {
    let cpu_secs = cpu_limit.ceil().max(1.0) as libc::rlim_t;
    // SAFETY: only async-signal-safe calls between fork and exec.
    unsafe {
        cmd.pre_exec(move || {
            if libc::setpgid(0, 0) != 0 {
                return Err(io::Error::last_os_error());
            }
            let lim = libc::rlimit {
                rlim_cur: cpu_secs,
                rlim_max: cpu_secs + 1,
            };
            if libc::setrlimit(libc::RLIMIT_CPU, &lim) != 0 {
                return Err(io::Error::last_os_error());
            }
            Ok(())
        });
    }
    let child = cmd.spawn()?;
    let pid = child.id() as libc::pid_t;
    let start = Instant::now();
    let mut status: libc::c_int = 0;
    // SAFETY: rusage is plain old data.
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let mut wall_exceeded = false;
    let mut nap = Duration::from_millis(1);
    loop {
        // SAFETY: valid pointers to locals; pid is our unreaped child.
        let r = unsafe { libc::wait4(pid, &mut status, libc::WNOHANG, &mut usage) };
        if r == pid {
            break;
        }
        if r < 0 {
            let err = io::Error::last_os_error();
            if err.kind() == io::ErrorKind::Interrupted {
                continue;
            }
            return Err(err);
        }
        if start.elapsed().as_secs_f64() >= wall_limit {
            wall_exceeded = true;
            // SAFETY: signalling our own process group.
            unsafe {
                libc::killpg(pid, libc::SIGKILL);
            }
            loop {
                // SAFETY: as above, blocking reap.
                let r = unsafe { libc::wait4(pid, &mut status, 0, &mut usage) };
                if r == pid {
                    break;
                }
                let err = io::Error::last_os_error();
                if err.kind() != io::ErrorKind::Interrupted {
                    return Err(err);
                }
            }
            break;
        }
        std::thread::sleep(nap);
        nap = (nap * 2).min(Duration::from_millis(20));
    }
    let wall = start.elapsed().as_secs_f64();
    // the child is reaped; make sure no stray group members survive
    // SAFETY: signalling a process group we created.
    unsafe {
        libc::killpg(pid, libc::SIGKILL);
    }
    drop(child);
    let cpu = usage.ru_utime.tv_sec as f64 + usage.ru_utime.tv_usec as f64 * 1e-6;
    let signaled = libc::WIFSIGNALED(status);
    let code = if libc::WIFEXITED(status) {
        Some(libc::WEXITSTATUS(status))
    } else {
        None
    };
    let cpu_exceeded = !wall_exceeded && (cpu >= cpu_limit || (signaled && libc::WTERMSIG(status) == libc::SIGXCPU));
    Ok(ChildRun {
        code,
        wall,
        cpu,
        wall_exceeded,
        cpu_exceeded,
    })
}

/// Instance files of the track in `dir`, sorted by name.
pub fn suite_instances(dir: &Path, track: Track) -> Result<Vec<PathBuf>, BenchError> {
    let entries = fs::read_dir(dir).map_err(|source| BenchError::Suite {
        path: dir.display().to_string(),
        source,
    })?;
    let mut files = Vec::new();
    for e in entries {
        let path = e
            .map_err(|source| BenchError::Suite {
                path: dir.display().to_string(),
                source,
            })?
            .path();
        if path.is_file() && track.accepts(&path) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Instance id used in records and in the reference table: the file stem.
pub fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Reads `instance,ref_gates` rows; a missing file yields an empty table.
pub fn read_refs(path: &Path) -> Result<HashMap<String, u64>, BenchError> {
    if !path.exists() {
        return Ok(HashMap::new());
    }
    #[derive(Deserialize)]
    struct Row {
        instance: String,
        ref_gates: u64,
    }
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = HashMap::new();
    for row in rd.deserialize() {
        let row: Row = row?;
        out.insert(row.instance, row.ref_gates);
    }
    Ok(out)
}

fn command(prefix: &[String]) -> Result<Command, BenchError> {
    let (program, args) = prefix
        .split_first()
        .ok_or_else(|| BenchError::Config("empty command".into()))?;
    let mut cmd = Command::new(program);
    cmd.args(args);
    Ok(cmd)
}

fn run_instance(cfg: &BenchConfig, refs: &HashMap<String, u64>, path: &Path) -> Result<RunRecord, BenchError> {
    let id = instance_id(path);
    let dir = cfg.scratch.join(&cfg.name);
    fs::create_dir_all(&dir)?;
    let out_path = dir.join(format!("{id}.out"));
    let ctrl_path = dir.join(format!("{id}.controller.aag"));
    let _ = fs::remove_file(&ctrl_path);

    let mut cmd = command(&cfg.worker)?;
    cmd.arg("worker")
        .arg("--spec")
        .arg(path)
        .arg("--mode")
        .arg(cfg.mode.to_string())
        .arg("--solver")
        .arg(cfg.solver.to_string());
    if cfg.mode == Mode::Synthesis {
        cmd.arg("--controller").arg(&ctrl_path);
    }
    cmd.stdin(Stdio::null())
        .stdout(Stdio::from(fs::File::create(&out_path)?))
        .stderr(Stdio::null());
    let run = run_limited(&mut cmd, cfg.wall_limit, cfg.cpu_limit)?;

    let mut record = RunRecord {
        config: cfg.name.clone(),
        instance: id.clone(),
        track: cfg.track,
        mode: cfg.mode,
        verdict: RunVerdict::Error,
        wall_time: run.wall,
        cpu_time: run.cpu,
        gates: None,
        verified: Verified::NotApplicable,
        quality: None,
    };
    if run.wall_exceeded || run.cpu_exceeded {
        record.verdict = RunVerdict::Timeout;
        return Ok(record);
    }
    let report: Option<WorkerReport> = if run.code == Some(0) {
        fs::read_to_string(&out_path)
            .ok()
            .and_then(|text| text.lines().rev().find_map(|l| serde_json::from_str(l).ok()))
    } else {
        None
    };
    let Some(report) = report else {
        return Ok(record);
    };
    record.verdict = if report.realizable {
        RunVerdict::Realizable
    } else {
        RunVerdict::Unrealizable
    };
    if cfg.mode == Mode::Synthesis && report.realizable {
        record.gates = report.gates;
        let mut v = command(&cfg.verifier)?;
        v.arg("verify")
            .arg("--spec")
            .arg(path)
            .arg("--controller")
            .arg(&ctrl_path)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null());
        let check = run_limited(&mut v, cfg.wall_limit, cfg.cpu_limit)?;
        record.verified = if check.code == Some(0) && !check.wall_exceeded && !check.cpu_exceeded {
            Verified::Pass
        } else {
            Verified::Fail
        };
        if record.verified == Verified::Pass {
            let size = report.gates.unwrap_or(0);
            let reference = refs.get(&id).copied().unwrap_or(size);
            record.quality = Some(quality_score(size, reference));
        }
    }
    Ok(record)
}

/// Runs every instance of the suite with up to `workers` concurrent children.
/// Records come back sorted by instance.
pub fn run_suite(cfg: &BenchConfig) -> Result<Scoreboard, BenchError> {
    if !(cfg.wall_limit > 0.0 && cfg.cpu_limit > 0.0) {
        return Err(BenchError::Config("limits must be positive".into()));
    }
    let files = suite_instances(&cfg.suite, cfg.track)?;
    let refs = read_refs(&cfg.suite.join(REFS_FILE))?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Result<RunRecord, BenchError>>> = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..cfg.workers.max(1).min(files.len().max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = files.get(k) else { break };
                log::info!("running {}", path.display());
                let r = run_instance(cfg, &refs, path);
                results.lock().unwrap().push(r);
            });
        }
    });
    let mut board = Scoreboard {
        records: results.into_inner().unwrap().into_iter().collect::<Result<_, _>>()?,
    };
    board.sort();
    Ok(board)
}
