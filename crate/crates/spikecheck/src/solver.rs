//! Running an external SMT-LIB 2 solver as a child process.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use spikecheck_core::smt::{parse_solver_output, SolverOutcome, SolverStatus};
use wait_timeout::ChildExt;

/// How to invoke the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    /// Program and arguments separated by whitespace (no shell quoting).
    /// The solver must read the script from standard input.
    pub command: String,
    pub timeout: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            command: "z3 -in".into(),
            timeout: None,
        }
    }
}

impl SolverConfig {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            timeout: None,
        }
    }

    pub fn with_timeout(mut self, timeout: Option<Duration>) -> Self {
        self.timeout = timeout;
        self
    }
}

/// Feed `script` to the solver and parse what it prints.
///
/// Never fails: spawn errors, malformed output and timeouts all come back
/// as an unknown status with `reason` set (`"timeout"` for the latter).
pub fn solve(script: &str, command: &str, timeout: Option<Duration>) -> SolverOutcome {
    let start = Instant::now();
    let mut words = command.split_whitespace();
    let Some(program) = words.next() else {
        return SolverOutcome::unknown("empty solver command", String::new(), start.elapsed());
    };
    let mut child = match Command::new(program)
        .args(words)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => {
            return SolverOutcome::unknown(format!("cannot start `{command}`: {e}"), String::new(), start.elapsed())
        }
    };

    // Writer and reader run on their own threads so that neither pipe can
    // fill up and block the other side.
    let mut stdin = child.stdin.take().expect("piped stdin");
    let owned = script.to_owned();
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(owned.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });

    let status = match timeout {
        Some(limit) => child.wait_timeout(limit.saturating_sub(start.elapsed())),
        None => child.wait().map(Some),
    };
    let timed_out = match status {
        Ok(Some(_)) => false,
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            true
        }
        Err(e) => {
            let _ = child.kill();
            let _ = child.wait();
            return SolverOutcome::unknown(format!("waiting for solver: {e}"), String::new(), start.elapsed());
        }
    };
    let _ = writer.join();
    let raw = reader.join().unwrap_or_default();
    let wall_time = start.elapsed();

    if timed_out {
        return SolverOutcome::unknown("timeout", raw, wall_time);
    }
    match parse_solver_output(&raw) {
        Ok((SolverStatus::Unknown, _)) => SolverOutcome::unknown("solver answered unknown", raw, wall_time),
        Ok((status, assignment)) => SolverOutcome {
            status,
            assignment,
            raw,
            wall_time,
            reason: None,
        },
        Err(e) => SolverOutcome::unknown(format!("malformed solver output: {e}"), raw, wall_time),
    }
}
