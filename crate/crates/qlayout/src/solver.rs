//! Running an SMT-LIB2 solver as a subprocess, one process per check.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use qlayout_core::model::{parse_response, ModelError, Response};
use qlayout_core::search::Checker;
use wait_timeout::ChildExt;

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "QLAYOUT_SOLVER";

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("could not start solver `{path}`: {source}")]
    Spawn {
        path: String,
        source: std::io::Error,
    },
    #[error("solver i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver exited with status {status}: {stderr}")]
    Exit { status: String, stderr: String },
    #[error(transparent)]
    Parse(#[from] ModelError),
    #[error("solver exceeded {0:?}")]
    Timeout(Duration),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub path: PathBuf,
    pub args: Vec<OsString>,
    pub timeout: Option<Duration>,
}

impl Default for SolverConfig {
    /// `$QLAYOUT_SOLVER` or `z3`, reading the script from standard input.
    fn default() -> Self {
        let path = std::env::var_os(SOLVER_ENV)
            .filter(|p| !p.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("z3"));
        let args = default_args(&path);
        SolverConfig {
            path,
            args,
            timeout: None,
        }
    }
}

/// Standard-input flags for solvers we know about.
pub fn default_args(path: &std::path::Path) -> Vec<OsString> {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    let args: &[&str] = match stem.as_str() {
        "z3" => &["-in", "-smt2"],
        "cvc5" | "cvc4" => &["--lang=smt2", "--incremental"],
        "bitwuzla" | "boolector" => &["--lang", "smt2"],
        "yices-smt2" => &["--incremental"],
        _ => &[],
    };
    args.iter().map(OsString::from).collect()
}

impl SolverConfig {
    pub fn with_path(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let args = default_args(&path);
        SolverConfig {
            path,
            args,
            timeout: None,
        }
    }

    pub fn with_timeout(mut self, timeout: Option<Duration>) -> Self {
        self.timeout = timeout;
        self
    }

    /// Whether the executable can be started at all.
    pub fn available(&self) -> bool {
        Command::new(&self.path)
            .arg("--version")
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .is_ok()
    }

    /// Feeds `script` to a fresh solver process and parses its answer.
    pub fn run(&self, script: &str) -> Result<Response, SolverError> {
        let mut child = Command::new(&self.path)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| SolverError::Spawn {
                path: self.path.display().to_string(),
                source,
            })?;

        let mut stdin = child.stdin.take().expect("stdin is piped");
        let input = script.to_owned();
        let writer = thread::spawn(move || stdin.write_all(input.as_bytes()));
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let reader = thread::spawn(move || {
            let mut s = String::new();
            stdout.read_to_string(&mut s).map(|_| s)
        });
        let mut stderr = child.stderr.take().expect("stderr is piped");
        let err_reader = thread::spawn(move || {
            let mut s = String::new();
            let _ = stderr.read_to_string(&mut s);
            s
        });

        let status = match self.timeout {
            Some(limit) => match child.wait_timeout(limit)? {
                Some(status) => status,
                None => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(SolverError::Timeout(limit));
                }
            },
            None => child.wait()?,
        };
        // a solver that stops reading early is fine as long as it answered
        let _ = writer.join().expect("writer thread");
        let out = reader.join().expect("reader thread")?;
        let err = err_reader.join().expect("stderr thread");

        match (parse_response(&out), status.success()) {
            // some solvers exit non-zero after refusing `get-value` on unsat
            (Ok(Response::Unsat), _) => Ok(Response::Unsat),
            (Ok(r), true) => Ok(r),
            (Err(e), true) => Err(SolverError::Parse(e)),
            (_, false) => Err(SolverError::Exit {
                status: status.to_string(),
                stderr: first_line(&err, &out),
            }),
        }
    }
}

fn first_line(stderr: &str, stdout: &str) -> String {
    let text = if stderr.trim().is_empty() { stdout } else { stderr };
    text.lines().next().unwrap_or("").trim().to_owned()
}

/// [`Checker`] over a configured solver, timing each call.
#[derive(Debug, Clone)]
pub struct ProcessChecker {
    config: SolverConfig,
    last: Option<f64>,
    scripts: usize,
}

impl ProcessChecker {
    pub fn new(config: SolverConfig) -> Self {
        ProcessChecker {
            config,
            last: None,
            scripts: 0,
        }
    }

    /// Number of scripts sent so far.
    pub fn scripts(&self) -> usize {
        self.scripts
    }
}

impl Checker for ProcessChecker {
    type Error = SolverError;

    fn check(&mut self, script: &str) -> Result<Response, SolverError> {
        self.scripts += 1;
        let start = Instant::now();
        let r = self.config.run(script);
        self.last = Some(start.elapsed().as_secs_f64());
        r
    }

    fn last_elapsed(&self) -> Option<f64> {
        self.last
    }
}
