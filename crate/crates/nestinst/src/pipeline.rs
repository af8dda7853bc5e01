//! Pipeline driver: preprocessing passes, fragment validation, the combined
//! instantiation, and the ground backend, assembled into a report.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::backend::external::external_check_default;
use crate::backend::smtlib::emit_smtlib;
use crate::backend::{
    bounded_model_search, default_free_domain, default_window, GroundProblem, Value, Verdict,
};
use crate::combine::{simplify, CombinedProcedure};
use crate::core::{Clause, FuncId, SortId};
use crate::error::{Error, Result};
use crate::frame::passes::{eliminate_store, normalize_literals, unprime};
use crate::frame::shift::{shift, shiftability_check};
use crate::frame::spec::{BaseScheme, LeafScheme, Problem};
use crate::frame::{copy_sorts, validate_problem};
use crate::inst::automata::TreeAutomaton;
use crate::inst::target::{HyperLinking, Identity, InstantiationOutcome, TargetProcedure};
use crate::problem::print::{print_clause, print_problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Bounded,
    Smtlib,
    External,
}

#[derive(Debug, Clone)]
pub struct Flags {
    pub backend: BackendKind,
    /// Symmetric search window half-width; the default derives from the
    /// problem's numerals and constant count.
    pub window: Option<i64>,
    pub free_domain: Option<usize>,
    pub max_rounds: usize,
    pub no_chi: bool,
    pub shift: bool,
    pub copy_elements: bool,
    pub emit_instances: Option<std::path::PathBuf>,
    pub emit_script: Option<std::path::PathBuf>,
    pub solver: Option<String>,
    pub timeout: Duration,
    pub node_cap: u64,
    pub with_timings: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            backend: BackendKind::Bounded,
            window: None,
            free_domain: None,
            max_rounds: 16,
            no_chi: false,
            shift: false,
            copy_elements: false,
            emit_instances: None,
            emit_script: None,
            solver: None,
            timeout: Duration::from_secs(60),
            node_cap: 50_000_000,
            with_timings: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub verdict: VerdictReport,
    pub instance_count: usize,
    pub pools: Vec<PoolReport>,
    pub chi_axioms: Vec<String>,
    pub incomplete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift_offsets: Option<Vec<ShiftReport>>,
    pub timings: Option<Timings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emitted_script: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emitted_instances: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<(i64, i64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Vec<(String, String)>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoolReport {
    pub level: u8,
    pub scheme: String,
    pub pool: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftReport {
    pub array: String,
    pub offset: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub pipeline_ms: u128,
    pub solve_ms: u128,
}

/// The final ground stage produced by the pipeline, reusable by callers that
/// need more than the report.
pub struct PipelineOutput {
    pub report: Report,
    pub ground: GroundProblem,
    pub verdict: Verdict,
    /// Combined instances before simplification (primed symbols intact).
    pub pre_simplification: Vec<Clause>,
    pub outcome: InstantiationOutcome,
    /// Signature the combined instances live in (pre-merge).
    pub staged_sig: crate::core::Signature,
}

/// Builds the combined procedure the theory stack describes.
pub fn build_procedure(problem: &Problem, flags: &Flags) -> Result<Box<dyn TargetProcedure>> {
    let leaf: Box<dyn TargetProcedure> = match problem.stack.leaf {
        LeafScheme::Fol => Box::new(HyperLinking {
            round_limit: flags.max_rounds,
            ..Default::default()
        }),
        LeafScheme::GroundArrays => Box::new(Identity),
    };
    let mut proc = leaf;
    for level in problem.stack.levels.iter().rev() {
        proc = Box::new(CombinedProcedure::new(level.clone(), proc, flags.no_chi));
    }
    Ok(proc)
}

fn membership_tables(problem: &Problem) -> (BTreeSet<SortId>, Vec<(FuncId, TreeAutomaton)>) {
    let mut sorts = BTreeSet::new();
    let mut preds = Vec::new();
    for lv in &problem.stack.levels {
        if let BaseScheme::Membership { predicates, .. } = &lv.scheme {
            sorts.insert(lv.sort);
            preds.extend(predicates.iter().cloned());
        }
    }
    (sorts, preds)
}

pub fn run_pipeline(problem: &Problem, flags: &Flags) -> Result<PipelineOutput> {
    let t0 = Instant::now();
    let mut problem = problem.clone();

    problem.clauses = normalize_literals(&problem.sig, &problem.clauses);
    problem.clauses =
        eliminate_store(&problem.sig, &problem.clauses).map_err(|e| e.in_stage("eliminate-store"))?;
    // Store elimination introduces reads at the written index, which need
    // the same abstraction treatment as any other ground index.
    problem.clauses = normalize_literals(&problem.sig, &problem.clauses);
    if flags.copy_elements {
        let idx = problem
            .stack
            .levels
            .first()
            .map(|lv| lv.sort)
            .ok_or_else(|| Error::Config("no base level to copy from".into()))?;
        problem = copy_sorts(&problem, idx).map_err(|e| e.in_stage("copy-sorts"))?;
        // Copying can introduce comparisons on the element side that still
        // need lowering, so the normalization pass runs once more.
        problem.clauses = normalize_literals(&problem.sig, &problem.clauses);
    }
    let mut shift_report = None;
    if flags.shift {
        let lambda = shiftability_check(&problem).map_err(|e| e.in_stage("shift"))?;
        match lambda {
            Some(lambda) => {
                shift_report = Some(
                    lambda
                        .iter()
                        .map(|(arr, off)| ShiftReport {
                            array: problem.sig.func(*arr).name.clone(),
                            offset: off
                                .render(&problem.sig, problem.stack.levels[0].sort)
                                .display(&problem.sig)
                                .to_string(),
                        })
                        .collect::<Vec<_>>(),
                );
                problem = shift(&problem, &lambda).map_err(|e| e.in_stage("shift"))?;
            }
            None => {
                return Err(Error::Unsupported(
                    "clause set is not shiftable: offset constraints are inconsistent".into(),
                )
                .in_stage("shift"))
            }
        }
    }
    validate_problem(&problem).map_err(|e| e.in_stage("validate"))?;

    let procedure = build_procedure(&problem, flags)?;
    let mut sig = problem.sig.clone();
    let outcome = procedure
        .apply(&mut sig, &problem.clauses)
        .map_err(|e| e.in_stage("combine"))?;

    let (herbrand_sorts, membership) = membership_tables(&problem);
    let simplified = simplify(&sig, &outcome.instances, &herbrand_sorts, &membership);
    let chi_axioms = outcome.aux_axioms.clone();

    // Merge primed copies back together, then build the ground problem.
    let mut all = simplified.clone();
    let n_instances = all.len();
    all.extend(chi_axioms.iter().cloned());
    let (ground_sig, unprimed) =
        unprime(&sig, &all, &problem.copy_links).map_err(|e| e.in_stage("unprime"))?;
    let (clauses, chis) = unprimed.split_at(n_instances);
    let mut ground = GroundProblem::new(ground_sig, clauses.to_vec(), chis.to_vec())
        .map_err(|e| e.in_stage("ground"))?;
    ground.herbrand_sorts = herbrand_sorts
        .iter()
        .filter_map(|s| ground.sig.sort_by_name(&problem.sig.sort(*s).name))
        .collect();

    let pipeline_ms = t0.elapsed().as_millis();
    let t1 = Instant::now();
    let window = flags
        .window
        .map(|n| (-n, n))
        .unwrap_or_else(|| default_window(&ground));
    let free_domain = flags.free_domain.unwrap_or_else(|| default_free_domain(&ground));
    let mut emitted_script = None;
    let verdict = match flags.backend {
        BackendKind::Bounded => bounded_model_search(&ground, window, free_domain, flags.node_cap)
            .map_err(|e| e.in_stage("bounded-search"))?,
        BackendKind::Smtlib => {
            let script = emit_smtlib(&ground).map_err(|e| e.in_stage("emit"))?;
            let path = flags
                .emit_script
                .clone()
                .unwrap_or_else(|| std::path::PathBuf::from("problem.smt2"));
            std::fs::write(&path, &script)?;
            emitted_script = Some(path.display().to_string());
            Verdict::Unknown { reason: "script emitted, not solved".into() }
        }
        BackendKind::External => {
            if let Some(path) = &flags.emit_script {
                let script = emit_smtlib(&ground).map_err(|e| e.in_stage("emit"))?;
                std::fs::write(path, &script)?;
                emitted_script = Some(path.display().to_string());
            }
            external_check_default(&ground, flags.solver.as_deref(), flags.timeout)
                .map_err(|e| e.in_stage("external"))?
        }
    };
    let solve_ms = t1.elapsed().as_millis();

    // Incomplete saturation keeps unsat verdicts but weakens sat to unknown.
    let verdict = match (outcome.incomplete, verdict) {
        (true, Verdict::Sat(_)) => Verdict::Unknown {
            reason: "round limit reached before a fixpoint; a model of the instances may not lift"
                .into(),
        },
        (_, v) => v,
    };

    let mut emitted_instances = None;
    if let Some(path) = &flags.emit_instances {
        let text = print_ground_problem(&ground, &problem)?;
        std::fs::write(path, &text)?;
        emitted_instances = Some(path.display().to_string());
    }
    if let Some(path) = &flags.emit_script {
        if flags.backend == BackendKind::Bounded {
            let script = emit_smtlib(&ground).map_err(|e| e.in_stage("emit"))?;
            std::fs::write(path, &script)?;
            emitted_script = Some(path.display().to_string());
        }
    }

    let report = Report {
        report_version: 1,
        verdict: verdict_report(&ground, &verdict),
        instance_count: ground.clauses.len(),
        pools: outcome
            .level_pools
            .iter()
            .map(|lp| PoolReport {
                level: lp.level,
                scheme: lp.scheme.clone(),
                pool: lp.pool.clone(),
            })
            .collect(),
        chi_axioms: ground
            .chi_axioms
            .iter()
            .map(|c| print_clause(&ground.sig, c))
            .collect(),
        incomplete: outcome.incomplete,
        shift_offsets: shift_report,
        timings: flags.with_timings.then_some(Timings { pipeline_ms, solve_ms }),
        emitted_script,
        emitted_instances,
    };
    Ok(PipelineOutput {
        report,
        pre_simplification: outcome.instances.clone(),
        ground,
        verdict,
        outcome,
        staged_sig: sig,
    })
}

fn verdict_report(ground: &GroundProblem, v: &Verdict) -> VerdictReport {
    match v {
        Verdict::Sat(model) => VerdictReport {
            kind: "sat".into(),
            window: None,
            reason: None,
            model: Some(
                model
                    .assignment
                    .iter()
                    .map(|(t, val)| {
                        let rendered = match val {
                            Value::Int(n) => n.to_string(),
                            Value::Elem(e) => format!("e{e}"),
                            Value::Bool(b) => b.to_string(),
                            Value::Herb(t) => t.display(&ground.sig).to_string(),
                        };
                        (t.display(&ground.sig).to_string(), rendered)
                    })
                    .collect(),
            ),
        },
        Verdict::UnsatWithinBounds { window } => VerdictReport {
            kind: "unsat-within-bounds".into(),
            window: Some(*window),
            reason: None,
            model: None,
        },
        Verdict::UnsatExternal => VerdictReport {
            kind: "unsat-external".into(),
            window: None,
            reason: None,
            model: None,
        },
        Verdict::Unknown { reason } => VerdictReport {
            kind: "unknown".into(),
            window: None,
            reason: Some(reason.clone()),
            model: None,
        },
    }
}

/// Prints the ground stage as a re-parseable problem file. Solving the
/// emitted file again yields the same verdict: the clause set is ground, so
/// instantiation is the identity up to fresh upper-bound axioms.
pub fn print_ground_problem(ground: &GroundProblem, original: &Problem) -> Result<String> {
    use crate::frame::spec::{BaseLevel, TheoryStack};
    let sig = &ground.sig;
    let primary_int = sig.sorts().find(|(_, d)| d.integer).map(|(id, _)| id);
    let stack = match primary_int {
        Some(sort) => TheoryStack {
            levels: vec![BaseLevel {
                level: 0,
                sort,
                scheme: BaseScheme::Presburger { modulus_cap: u64::MAX },
            }],
            leaf: LeafScheme::GroundArrays,
            leaf_level: 1,
        },
        None => original.stack.clone(),
    };
    let emitted = Problem {
        sig: sig.clone(),
        stack,
        clauses: ground.clauses.iter().chain(&ground.chi_axioms).cloned().collect(),
        copy_links: vec![],
    };
    Ok(print_problem(&emitted))
}

/// Exit-code convention: 0 sat, 1 unsat, 2 unknown.
pub fn exit_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Sat(_) => 0,
        Verdict::UnsatWithinBounds { .. } | Verdict::UnsatExternal => 1,
        Verdict::Unknown { .. } => 2,
    }
}

/// Renders the report as deterministic JSON.
pub fn report_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// Plain-text rendering of the report.
pub fn report_text(report: &Report) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "verdict: {}", report.verdict.kind).unwrap();
    if let Some((lo, hi)) = report.verdict.window {
        writeln!(out, "window: [{lo}, {hi}]").unwrap();
    }
    if let Some(reason) = &report.verdict.reason {
        writeln!(out, "reason: {reason}").unwrap();
    }
    if let Some(model) = &report.verdict.model {
        for (name, val) in model {
            writeln!(out, "  {name} = {val}").unwrap();
        }
    }
    writeln!(out, "instances: {}", report.instance_count).unwrap();
    for pool in &report.pools {
        writeln!(
            out,
            "pool level {} ({}): {{{}}}",
            pool.level,
            pool.scheme,
            pool.pool.join(", ")
        )
        .unwrap();
    }
    if !report.chi_axioms.is_empty() {
        writeln!(out, "bound axioms: {}", report.chi_axioms.join("  ")).unwrap();
    }
    if let Some(offsets) = &report.shift_offsets {
        for s in offsets {
            writeln!(out, "shift {} by {}", s.array, s.offset).unwrap();
        }
    }
    if report.incomplete {
        writeln!(out, "warning: saturation stopped at the round limit").unwrap();
    }
    if let Some(t) = &report.timings {
        writeln!(out, "timings: pipeline {}ms, solve {}ms", t.pipeline_ms, t.solve_ms).unwrap();
    }
    if let Some(p) = &report.emitted_script {
        writeln!(out, "script: {p}").unwrap();
    }
    if let Some(p) = &report.emitted_instances {
        writeln!(out, "instances file: {p}").unwrap();
    }
    out
}

/// Parses, runs and reports in one call (used by the CLI and tests).
pub fn solve_text(text: &str, flags: &Flags) -> Result<PipelineOutput> {
    let problem = crate::problem::parse::parse_problem(text)?;
    run_pipeline(&problem, flags)
}
