//! The base-complete procedure for term algebras with membership
//! constraints: the pool collects disequality right-hand sides plus one
//! witness per non-empty predicate-set intersection.

use std::collections::{BTreeMap, BTreeSet};

use crate::core::{Clause, FuncId, Literal, Signature, SortId, Term};
use crate::error::{Error, Result};
use crate::inst::automata::{emptiness_witness, intersect, TreeAutomaton};
use crate::inst::target::{InstantiationOutcome, Provenance};

#[derive(Debug, Clone)]
pub struct MembershipFragment {
    pub sort: SortId,
    pub constructors: Vec<FuncId>,
    pub predicates: Vec<(FuncId, TreeAutomaton)>,
    /// Ground right-hand sides of disequality literals.
    pub neq_terms: Vec<Term>,
}

/// Validates the clause set: every non-ground literal over the sort is a
/// negated predicate on a variable or a disequality against a ground term.
pub fn validate_fragment(
    sig: &Signature,
    clauses: &[Clause],
    sort: SortId,
    predicates: &[(FuncId, TreeAutomaton)],
    constructors: &[FuncId],
) -> Result<MembershipFragment> {
    let level = sig.level(sort);
    let pred_ids: BTreeSet<FuncId> = predicates.iter().map(|(p, _)| *p).collect();
    let mut neq_terms: BTreeSet<Term> = BTreeSet::new();
    for clause in clauses {
        for lit in clause.literals() {
            if lit.is_ground() {
                continue;
            }
            if let Some((atom, pos)) = lit.pred_atom(sig) {
                let Term::App(p, args) = atom else {
                    return Err(bad(sig, lit, level));
                };
                if pred_ids.contains(p) {
                    if pos || !matches!(args.as_slice(), [Term::Var(_)]) {
                        return Err(bad(sig, lit, level));
                    }
                    continue;
                }
                return Err(bad(sig, lit, level));
            }
            // Equational literal over the algebra sort.
            if lit.pos || lit.lhs.sort(sig) != sort {
                return Err(bad(sig, lit, level));
            }
            match (&lit.lhs, &lit.rhs) {
                (Term::Var(_), t) | (t, Term::Var(_)) if t.is_ground() => {
                    neq_terms.insert(t.clone());
                }
                _ => return Err(bad(sig, lit, level)),
            }
        }
    }
    Ok(MembershipFragment {
        sort,
        constructors: constructors.to_vec(),
        predicates: predicates.to_vec(),
        neq_terms: neq_terms.into_iter().collect(),
    })
}

fn bad(sig: &Signature, lit: &Literal, level: u8) -> Error {
    Error::fragment(
        level,
        format!("literal {} is outside the membership fragment", lit.display(sig)),
    )
}

/// The pool: all disequality terms, plus one witness per subset of the
/// predicate table whose denotations intersect. The witness for the empty
/// subset is the minimal ground constructor term.
pub fn compute_g_in(
    sig: &Signature,
    fragment: &MembershipFragment,
    predicate_cap: usize,
) -> Result<Vec<Term>> {
    let n = fragment.predicates.len();
    if n > predicate_cap {
        return Err(Error::ResourceLimit(format!(
            "{n} membership predicates exceed the subset-enumeration cap {predicate_cap}"
        )));
    }
    let mut pool: BTreeSet<Term> = fragment.neq_terms.iter().cloned().collect();
    // Lazily memoized intersection automata keyed by subset bitmask, built
    // by extending the subset without its lowest bit.
    let mut memo: BTreeMap<u64, Option<TreeAutomaton>> = BTreeMap::new();
    let universal = TreeAutomaton::universal(&fragment.constructors, sig);
    memo.insert(0, Some(universal));
    for mask in 0u64..(1u64 << n) {
        let auto = intersection_for(sig, fragment, mask, &mut memo);
        if let Some(a) = auto {
            if let Some(witness) = emptiness_witness(sig, &a) {
                pool.insert(witness);
            }
        }
    }
    Ok(pool.into_iter().collect())
}

fn intersection_for(
    sig: &Signature,
    fragment: &MembershipFragment,
    mask: u64,
    memo: &mut BTreeMap<u64, Option<TreeAutomaton>>,
) -> Option<TreeAutomaton> {
    if let Some(a) = memo.get(&mask) {
        return a.clone();
    }
    let low = mask.trailing_zeros() as usize;
    let rest = mask & (mask - 1);
    let rest_auto = intersection_for(sig, fragment, rest, memo)?;
    let combined = intersect(sig, &fragment.constructors, &[&rest_auto, &fragment.predicates[low].1]);
    let pruned = prune_unreachable(combined);
    let result = if pruned.transitions.is_empty() && mask != 0 { None } else { Some(pruned) };
    memo.insert(mask, result.clone());
    result
}

/// Drops states with no bottom-up derivation, keeping products small.
fn prune_unreachable(a: TreeAutomaton) -> TreeAutomaton {
    let mut reachable: BTreeSet<usize> = BTreeSet::new();
    loop {
        let mut changed = false;
        for (_, qs, q) in &a.transitions {
            if !reachable.contains(q) && qs.iter().all(|s| reachable.contains(s)) {
                reachable.insert(*q);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let remap: BTreeMap<usize, usize> =
        reachable.iter().enumerate().map(|(i, q)| (*q, i)).collect();
    TreeAutomaton {
        num_states: remap.len(),
        final_states: a
            .final_states
            .iter()
            .filter_map(|q| remap.get(q).copied())
            .collect(),
        transitions: a
            .transitions
            .iter()
            .filter_map(|(f, qs, q)| {
                let args: Option<Vec<usize>> = qs.iter().map(|s| remap.get(s).copied()).collect();
                Some((*f, args?, *remap.get(q)?))
            })
            .collect(),
    }
}

/// Uniform instantiation over the membership pool.
pub fn theta_in(
    sig: &Signature,
    clauses: &[Clause],
    fragment: &MembershipFragment,
    predicate_cap: usize,
) -> Result<InstantiationOutcome> {
    let pool = compute_g_in(sig, fragment, predicate_cap)?;
    let mut outcome = InstantiationOutcome { pool_used: pool.clone(), ..Default::default() };
    for (i, clause) in clauses.iter().enumerate() {
        for subst in crate::inst::presburger::all_maps(clause, &pool, fragment.sort, sig)? {
            let inst = subst.apply_clause(clause);
            outcome.push(inst, Provenance { origin: i, subst: subst.clone() });
        }
    }
    outcome.sort();
    Ok(outcome)
}

/// Evaluates a ground membership atom by running the predicate's automaton.
pub fn eval_membership(
    fragment_preds: &[(FuncId, TreeAutomaton)],
    p: FuncId,
    arg: &Term,
) -> Option<bool> {
    fragment_preds
        .iter()
        .find(|(q, _)| *q == p)
        .map(|(_, a)| a.accepts(arg))
}
