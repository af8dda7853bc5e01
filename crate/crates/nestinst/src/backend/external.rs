//! External solver client: runs a configured SMT solver on the emitted
//! script and maps its answer back to a verdict.

use std::io::Write as _;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::core::Term;
use crate::error::{Error, Result};

use super::smtlib::emit_smtlib;
use super::{GroundProblem, Model, Value, Verdict};

/// Environment variable consulted for the default solver command.
pub const SOLVER_ENV: &str = "NESTINST_SOLVER";

/// Runs `solver_command` (whitespace-split; the script path is appended) and
/// maps the first `sat`/`unsat`/`unknown` token of its output. Process or
/// parse failures degrade to `Unknown` with a diagnostic.
pub fn external_check(
    prob: &GroundProblem,
    solver_command: &str,
    timeout: Duration,
) -> Result<Verdict> {
    let script = emit_smtlib(prob)?;
    let mut parts = solver_command.split_whitespace();
    let Some(program) = parts.next() else {
        return Ok(Verdict::Unknown { reason: "empty solver command".into() });
    };
    let args: Vec<&str> = parts.collect();
    let dir = std::env::temp_dir();
    let path = dir.join(format!(
        "nestinst-{}-{}.smt2",
        std::process::id(),
        Instant::now().elapsed().as_nanos()
    ));
    {
        let mut file = std::fs::File::create(&path)?;
        file.write_all(script.as_bytes())?;
    }
    let spawned = Command::new(program)
        .args(&args)
        .arg(&path)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn();
    let mut child = match spawned {
        Ok(c) => c,
        Err(e) => {
            let _ = std::fs::remove_file(&path);
            return Ok(Verdict::Unknown { reason: format!("solver spawn failed: {e}") });
        }
    };
    let deadline = Instant::now() + timeout;
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if Instant::now() > deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    let _ = std::fs::remove_file(&path);
                    return Ok(Verdict::Unknown { reason: "solver timeout".into() });
                }
                std::thread::sleep(Duration::from_millis(10));
            }
            Err(e) => {
                let _ = std::fs::remove_file(&path);
                return Ok(Verdict::Unknown { reason: format!("solver wait failed: {e}") });
            }
        }
    }
    let output = child.wait_with_output();
    let _ = std::fs::remove_file(&path);
    let output = match output {
        Ok(o) => o,
        Err(e) => return Ok(Verdict::Unknown { reason: format!("solver output unavailable: {e}") }),
    };
    let stdout = String::from_utf8_lossy(&output.stdout);
    parse_solver_output(prob, &stdout)
}

/// Maps solver output to a verdict. The first status token wins; on `sat`
/// the model is parsed best-effort from `define-fun` lines.
pub fn parse_solver_output(prob: &GroundProblem, stdout: &str) -> Result<Verdict> {
    for line in stdout.lines() {
        match line.trim() {
            "sat" => {
                return Ok(Verdict::Sat(parse_model(prob, stdout)));
            }
            "unsat" => return Ok(Verdict::UnsatExternal),
            "unknown" => return Ok(Verdict::Unknown { reason: "solver returned unknown".into() }),
            _ => continue,
        }
    }
    Ok(Verdict::Unknown {
        reason: format!(
            "unparseable solver output: {:?}",
            stdout.lines().next().unwrap_or("")
        ),
    })
}

/// Best-effort extraction of integer constant values from
/// `(define-fun NAME () Int VALUE)` fragments.
fn parse_model(prob: &GroundProblem, stdout: &str) -> Model {
    let mut model = Model::default();
    let text = stdout.replace('\n', " ");
    let mut rest = text.as_str();
    while let Some(pos) = rest.find("(define-fun ") {
        rest = &rest[pos + "(define-fun ".len()..];
        let mut tokens = rest.split_whitespace();
        let Some(raw_name) = tokens.next() else { break };
        let name = raw_name.trim_matches('|');
        let Some(open) = tokens.next() else { break };
        if open != "()" {
            continue;
        }
        let Some(sort) = tokens.next() else { break };
        if sort != "Int" {
            continue;
        }
        let Some(value) = tokens.next() else { break };
        let parsed = if value == "(-" {
            tokens
                .next()
                .and_then(|v| v.trim_end_matches(')').parse::<i64>().ok())
                .map(|v| -v)
        } else {
            value.trim_end_matches(')').parse::<i64>().ok()
        };
        if let (Some(v), Some(f)) = (parsed, prob.sig.func_by_name(name)) {
            model.assignment.insert(Term::cst(f), Value::Int(v));
        }
    }
    model
}

/// Resolves the solver command: explicit flag first, then the environment.
pub fn resolve_solver(flag: Option<&str>) -> Option<String> {
    flag.map(str::to_string)
        .or_else(|| std::env::var(SOLVER_ENV).ok())
}

/// Convenience used by tests and the pipeline: external check with the
/// resolved command, erroring when none is configured.
pub fn external_check_default(prob: &GroundProblem, flag: Option<&str>, timeout: Duration) -> Result<Verdict> {
    match resolve_solver(flag) {
        Some(cmd) => external_check(prob, &cmd, timeout),
        None => Err(Error::Config(format!(
            "no external solver configured; set {SOLVER_ENV} or pass --solver"
        ))),
    }
}
