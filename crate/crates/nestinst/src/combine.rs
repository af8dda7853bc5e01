//! The combined instantiation procedure: the target scheme runs on the
//! placeholder-grounded target parts, its substitutions are recovered by
//! matching and lifted back, and the base scheme's pool grounds what remains.
//! A combined procedure is itself a target procedure, so levels nest.

use std::collections::BTreeSet;

use crate::core::{match_clause, Clause, FuncKind, Signature, SortId, Substitution, Term, Var};
use crate::error::{Error, Result};
use crate::frame::passes::eval_ground_literal;
use crate::frame::spec::{decompose, diamond_ground_clause, BaseLevel, BaseScheme};
use crate::inst::membership;
use crate::inst::presburger::{self, all_maps};
use crate::inst::target::{
    InstantiationOutcome, Provenance, TargetProcedure, TerminationClass,
};

pub struct CombinedProcedure {
    pub base: BaseLevel,
    pub target: Box<dyn TargetProcedure>,
    pub no_chi: bool,
}

impl CombinedProcedure {
    pub fn new(base: BaseLevel, target: Box<dyn TargetProcedure>, no_chi: bool) -> Self {
        CombinedProcedure { base, target, no_chi }
    }
}

/// Replaces every variable of the level's base sort by the reserved
/// placeholder constant.
pub fn diamond_ground(sig: &mut Signature, clauses: &[Clause], level: u8) -> Vec<Clause> {
    clauses
        .iter()
        .map(|c| diamond_ground_clause(sig, c, level))
        .collect()
}

/// All substitutions theta such that the grounded target part instantiated
/// by theta occurs in the outcome, found extensionally by matching.
pub fn recover_thetas(target_diamond: &Clause, outcome: &InstantiationOutcome) -> Vec<Substitution> {
    let mut all: BTreeSet<Substitution> = BTreeSet::new();
    for inst in &outcome.instances {
        for theta in match_clause(target_diamond, inst) {
            all.insert(theta);
        }
    }
    all.into_iter().collect()
}

/// Lifts theta by replacing each occurrence of this level's placeholder
/// constant in the codomain with a distinct fresh base variable.
fn lift_theta(sig: &Signature, theta: &Substitution, dia_sort: SortId) -> Substitution {
    let dia = sig
        .funcs()
        .find(|(_, d)| d.kind == FuncKind::Diamond && d.result == dia_sort)
        .map(|(id, _)| id);
    let Some(dia) = dia else { return theta.clone() };
    let mut counter = 0usize;
    let mut out = Substitution::new();
    for (v, t) in theta.iter() {
        out.bind(v.clone(), replace_diamond(t, dia, dia_sort, &mut counter));
    }
    out
}

fn replace_diamond(t: &Term, dia: crate::core::FuncId, sort: SortId, counter: &mut usize) -> Term {
    match t {
        Term::App(f, args) if *f == dia && args.is_empty() => {
            let v = Term::var(format!("_w{}", *counter), sort);
            *counter += 1;
            v
        }
        Term::App(f, args) => Term::App(
            *f,
            args.iter().map(|a| replace_diamond(a, dia, sort, counter)).collect(),
        ),
        _ => t.clone(),
    }
}

impl CombinedProcedure {
    pub fn combine(&self, sig: &mut Signature, clauses: &[Clause]) -> Result<InstantiationOutcome> {
        let level = self.base.level;
        // Split every clause and ground the base variables of the target
        // parts with the placeholder constant.
        let mut decomposed = Vec::with_capacity(clauses.len());
        for (i, c) in clauses.iter().enumerate() {
            decomposed.push(decompose(sig, c, level, i)?);
        }
        let target_diamond: Vec<Clause> = decomposed
            .iter()
            .map(|d| diamond_ground_clause(sig, &d.target_part, level))
            .collect();
        let target_outcome = self.target.apply(sig, &target_diamond)?;

        // Base fragment of this level.
        let base_parts: Vec<Clause> = decomposed.iter().map(|d| d.base_part.clone()).collect();
        let (pool_terms, aux) = match &self.base.scheme {
            BaseScheme::Presburger { modulus_cap } => {
                let fragment =
                    presburger::validate_fragment(sig, &base_parts, self.base.sort, *modulus_cap)?;
                let pool = presburger::compute_pool(sig, &base_parts, &fragment, self.no_chi)?;
                let aux = presburger::chi_axioms(sig, &fragment, self.no_chi)?;
                (pool.terms(sig, self.base.sort), aux)
            }
            BaseScheme::Membership { constructors, predicates, predicate_cap } => {
                let fragment = membership::validate_fragment(
                    sig,
                    &base_parts,
                    self.base.sort,
                    predicates,
                    constructors,
                )?;
                (membership::compute_g_in(sig, &fragment, *predicate_cap)?, vec![])
            }
        };

        let mut outcome = InstantiationOutcome {
            pool_used: pool_terms.clone(),
            incomplete: target_outcome.incomplete,
            ..Default::default()
        };
        outcome.aux_axioms = aux;
        outcome.aux_axioms.extend(target_outcome.aux_axioms.iter().cloned());
        outcome.aux_axioms.sort();
        outcome.aux_axioms.dedup();
        let scheme_name = match self.base.scheme {
            BaseScheme::Presburger { .. } => "presburger",
            BaseScheme::Membership { .. } => "membership",
        };
        outcome.level_pools.push(crate::inst::target::LevelPool {
            level: self.base.level,
            scheme: scheme_name.into(),
            pool: pool_terms.iter().map(|t| t.display(sig).to_string()).collect(),
        });
        outcome.level_pools.extend(target_outcome.level_pools.iter().cloned());

        for (i, clause) in clauses.iter().enumerate() {
            let thetas = recover_thetas(&target_diamond[i], &target_outcome);
            for theta in thetas {
                let lifted = lift_theta(sig, &theta, self.base.sort);
                let staged = lifted.apply_clause(clause);
                // Everything left must be instantiable by this level's pool.
                let stray: Vec<Var> = staged
                    .vars()
                    .into_iter()
                    .filter(|v| v.sort != self.base.sort)
                    .collect();
                if let Some(v) = stray.first() {
                    return Err(Error::Contract(format!(
                        "target scheme `{}` left variable `{}` uninstantiated",
                        self.target.name(),
                        v.name
                    )));
                }
                // Instances are kept in raw applied form: an enclosing level
                // recovers substitutions by syntactic matching against them,
                // so no normalization may intervene here.
                for sigma in all_maps(&staged, &pool_terms, self.base.sort, sig)? {
                    outcome.push(
                        sigma.apply_clause(&staged),
                        Provenance { origin: i, subst: lifted.then(&sigma) },
                    );
                }
            }
        }
        outcome.sort();
        Ok(outcome)
    }
}

impl TargetProcedure for CombinedProcedure {
    fn name(&self) -> String {
        let base = match self.base.scheme {
            BaseScheme::Presburger { .. } => "presburger",
            BaseScheme::Membership { .. } => "membership",
        };
        format!("combine({base}@{}, {})", self.base.level, self.target.name())
    }

    fn termination(&self) -> TerminationClass {
        self.target.termination()
    }

    fn apply(&self, sig: &mut Signature, clauses: &[Clause]) -> Result<InstantiationOutcome> {
        self.combine(sig, clauses)
    }
}

/// Verdict-preserving cleanup: literals fixed false by the theory are
/// dropped, clauses containing a literal fixed true are removed, duplicates
/// collapse. The empty clause is kept when a clause loses every literal.
pub fn simplify(
    sig: &Signature,
    clauses: &[Clause],
    herbrand_sorts: &BTreeSet<SortId>,
    membership: &[(crate::core::FuncId, crate::inst::automata::TreeAutomaton)],
) -> Vec<Clause> {
    let mut out: Vec<Clause> = Vec::new();
    'clauses: for clause in clauses {
        let mut kept = Vec::new();
        for lit in clause.literals() {
            match eval_ground_literal(sig, lit, herbrand_sorts, membership) {
                Some(true) => continue 'clauses,
                Some(false) => {}
                None => kept.push(lit.clone()),
            }
        }
        let simplified = Clause::new(kept);
        if !out.contains(&simplified) {
            out.push(simplified);
        }
    }
    out.sort();
    out
}
