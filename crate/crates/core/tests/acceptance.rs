//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qflow::validate::{run_check, CheckOutcome, CHECK_NAMES};

/// Wall-clock budgets for the criteria that carry one.
fn budget(id: u8) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(5)),
        3 => Some(Duration::from_secs(60)),
        5 => Some(Duration::from_secs(120)),
        _ => None,
    }
}

fn figure_bytes(command: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qflow"))
        .args([command, "--seed", "42"])
        .output()
        .map_err(|e| format!("cannot run qflow: {e}"))?;
    if !out.status.success() {
        return Err(format!("qflow {command} exited with {}", out.status));
    }
    Ok(out.stdout)
}

/// Determinism checked through the installed binary, two separate processes per figure.
fn binary_determinism() -> CheckOutcome {
    let start = Instant::now();
    let mut problems = Vec::new();
    for command in ["fig1a", "fig1b", "fig2"] {
        match (figure_bytes(command), figure_bytes(command)) {
            (Ok(a), Ok(b)) if a == b && !a.is_empty() => {}
            (Ok(_), Ok(_)) => problems.push(format!("{command} differs")),
            (Err(e), _) | (_, Err(e)) => problems.push(e),
        }
    }
    CheckOutcome {
        id: 10,
        name: CHECK_NAMES[9],
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            "fig1a, fig1b, fig2 byte-identical across two runs of the binary".into()
        } else {
            problems.join("; ")
        },
        elapsed: start.elapsed(),
    }
}

fn main() -> ExitCode {
    let mut failures = 0;
    for id in 1..=10u8 {
        let mut outcome = if id == 10 {
            binary_determinism()
        } else {
            run_check(id)
        };
        if let Some(limit) = budget(id) {
            if outcome.elapsed > limit {
                outcome.passed = false;
                outcome
                    .detail
                    .push_str(&format!("; over the {} s budget", limit.as_secs()));
            }
        }
        if !outcome.passed {
            failures += 1;
        }
        println!("{}", outcome.line());
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
