//! Target-complete instantiation procedures: hyper-linking for first-order
//! logic without equality, and the identity procedure for ground array
//! theories.

use std::collections::{BTreeMap, BTreeSet};

use crate::core::{mgu, Clause, Signature, Substitution, Term, Var};
use crate::error::{Error, Result};

/// The result of running an instantiation procedure: instances plus where
/// each came from, the term pool used (when uniform), and any auxiliary
/// ground axioms the theory level contributes.
#[derive(Debug, Clone, Default)]
pub struct InstantiationOutcome {
    pub instances: Vec<Clause>,
    pub provenance: BTreeMap<Clause, Vec<Provenance>>,
    pub pool_used: Vec<Term>,
    pub aux_axioms: Vec<Clause>,
    /// Rendered pools per combination level, outermost first (reporting).
    pub level_pools: Vec<LevelPool>,
    /// Set when saturation stopped at the round limit instead of a fixpoint;
    /// unsat verdicts stay sound, sat verdicts degrade to unknown.
    pub incomplete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelPool {
    pub level: u8,
    pub scheme: String,
    pub pool: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Provenance {
    pub origin: usize,
    pub subst: Substitution,
}

impl InstantiationOutcome {
    pub fn push(&mut self, clause: Clause, prov: Provenance) {
        let entry = self.provenance.entry(clause.clone()).or_default();
        if !entry.contains(&prov) {
            entry.push(prov);
        }
        if !self.instances.contains(&clause) {
            self.instances.push(clause);
        }
    }

    pub fn sort(&mut self) {
        self.instances.sort();
        self.instances.dedup();
    }
}

/// How a target procedure terminates, reported for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationClass {
    Always,
    HerbrandFinite,
    BoundedRounds,
}

/// The contract every target scheme satisfies: complete on base-ground
/// instance sets, monotonic, and preserving under base-term renamings.
pub trait TargetProcedure {
    fn name(&self) -> String;
    fn termination(&self) -> TerminationClass;
    fn apply(&self, sig: &mut Signature, clauses: &[Clause]) -> Result<InstantiationOutcome>;
}

/// Canonical variable renaming used to deduplicate clause variants: variables
/// are renamed by first occurrence in the canonical literal order, iterated a
/// few times so the order stabilizes.
pub fn canon_variant(clause: &Clause) -> Clause {
    let mut c = clause.clone();
    for pass in 0..4 {
        let mut order: Vec<Var> = Vec::new();
        for lit in c.literals() {
            for t in lit.lhs.subterms().into_iter().chain(lit.rhs.subterms()) {
                if let Term::Var(v) = t {
                    if !order.contains(v) {
                        order.push(v.clone());
                    }
                }
            }
        }
        let mut subst = Substitution::new();
        for (i, v) in order.iter().enumerate() {
            subst.bind(v.clone(), Term::var(format!("_h{pass}_{i}"), v.sort));
        }
        let next = subst.apply_clause(&c);
        if next == c {
            break;
        }
        c = next;
    }
    c
}

/// Hyper-linking for first-order logic without equality.
pub struct HyperLinking {
    pub round_limit: usize,
    /// Safety valve on the saturated set size.
    pub instance_cap: usize,
}

impl Default for HyperLinking {
    fn default() -> Self {
        HyperLinking { round_limit: 16, instance_cap: 100_000 }
    }
}

#[derive(Debug, Clone)]
pub struct SetEntry {
    clause: Clause,
    origin: usize,
    from_origin: Substitution,
}

/// One hyper-linking round over a bare clause set: the instances the rule
/// derives that are not already present (up to variable renaming).
pub fn hyperlink_round(sig: &Signature, clauses: &[Clause]) -> Result<Vec<Clause>> {
    for c in clauses {
        for l in c.literals() {
            if !l.is_pred_sugar(sig) {
                return Err(Error::fragment(
                    sig.leaf_level(),
                    format!("equational atom {} in hyper-linking input", l.display(sig)),
                ));
            }
        }
    }
    let set: Vec<SetEntry> = clauses
        .iter()
        .enumerate()
        .map(|(i, c)| SetEntry { clause: c.clone(), origin: i, from_origin: Substitution::new() })
        .collect();
    let seen: BTreeSet<Clause> = set.iter().map(|e| canon_variant(&e.clause)).collect();
    Ok(HyperLinking::round(sig, &set, &seen)?.into_iter().map(|e| e.clause).collect())
}

impl HyperLinking {
    /// One round of the hyper-linking rule over the current set: for every
    /// clause and every complement-unifiable partner tuple, the instantiated
    /// nucleus is produced. Returns only conclusions new to the set.
    pub fn round(sig: &Signature, set: &[SetEntry], seen: &BTreeSet<Clause>) -> Result<Vec<SetEntry>> {
        let mut fresh: Vec<SetEntry> = Vec::new();
        let mut fresh_keys: BTreeSet<Clause> = BTreeSet::new();
        for (nuc_idx, nucleus) in set.iter().enumerate() {
            if nucleus.clause.is_empty() {
                continue;
            }
            let lits = nucleus.clause.literals().to_vec();
            let mut stack = vec![(0usize, Substitution::new())];
            while let Some((slot, subst)) = stack.pop() {
                if slot == lits.len() {
                    let conclusion: Clause = lits.iter().map(|l| subst.apply_literal(l)).collect();
                    let key = canon_variant(&conclusion);
                    if !seen.contains(&key) && !fresh_keys.contains(&key) {
                        fresh_keys.insert(key);
                        fresh.push(SetEntry {
                            clause: conclusion,
                            origin: nucleus.origin,
                            from_origin: nucleus.from_origin.then(&subst),
                        });
                    }
                    continue;
                }
                let lit = subst.apply_literal(&lits[slot]);
                for (p_idx, partner) in set.iter().enumerate() {
                    for (m_idx, m) in partner.clause.literals().iter().enumerate() {
                        if m.pos == lit.pos {
                            continue;
                        }
                        // Rename the partner apart from the nucleus and from
                        // the other slots.
                        let renamed = rename_apart(m, nuc_idx, p_idx, slot, m_idx);
                        let pair = [(lit.lhs.clone(), renamed.lhs.clone()), (lit.rhs.clone(), renamed.rhs.clone())];
                        match mgu(sig, &pair) {
                            Ok(Some(sigma)) => {
                                stack.push((slot + 1, subst.then(&sigma)));
                            }
                            Ok(None) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
        Ok(fresh)
    }
}

fn rename_apart(lit: &crate::core::Literal, nuc: usize, p: usize, slot: usize, m: usize) -> crate::core::Literal {
    let mut vars = BTreeSet::new();
    lit.vars(&mut vars);
    let subst = Substitution::from_pairs(vars.into_iter().map(|v| {
        let fresh = Term::var(format!("_r{nuc}_{p}_{slot}_{m}_{}", v.name), v.sort);
        (v, fresh)
    }));
    subst.apply_literal(lit)
}

impl TargetProcedure for HyperLinking {
    fn name(&self) -> String {
        "fol".into()
    }

    fn termination(&self) -> TerminationClass {
        TerminationClass::BoundedRounds
    }

    fn apply(&self, sig: &mut Signature, clauses: &[Clause]) -> Result<InstantiationOutcome> {
        for c in clauses {
            for l in c.literals() {
                if !l.is_pred_sugar(sig) {
                    return Err(Error::fragment(
                        sig.leaf_level(),
                        format!(
                            "equational atom {} is outside first-order logic without equality",
                            l.display(sig)
                        ),
                    ));
                }
            }
        }
        let mut set: Vec<SetEntry> = clauses
            .iter()
            .enumerate()
            .map(|(i, c)| SetEntry { clause: c.clone(), origin: i, from_origin: Substitution::new() })
            .collect();
        let mut seen: BTreeSet<Clause> = set.iter().map(|e| canon_variant(&e.clause)).collect();
        let mut incomplete = true;
        for _round in 0..self.round_limit {
            let fresh = HyperLinking::round(sig, &set, &seen)?;
            if fresh.is_empty() {
                incomplete = false;
                break;
            }
            for e in fresh {
                seen.insert(canon_variant(&e.clause));
                set.push(e);
            }
            if set.len() > self.instance_cap {
                return Err(Error::ResourceLimit(format!(
                    "hyper-linking exceeded {} clauses",
                    self.instance_cap
                )));
            }
        }
        // Ground every remaining variable with the reserved constant of its
        // sort.
        let mut outcome = InstantiationOutcome { incomplete, ..Default::default() };
        for entry in set {
            let vars = entry.clause.vars();
            let grounding = Substitution::from_pairs(vars.into_iter().map(|v| {
                let bot = sig.bot(v.sort);
                (v, Term::cst(bot))
            }));
            let grounded = grounding.apply_clause(&entry.clause);
            outcome.push(
                grounded,
                Provenance { origin: entry.origin, subst: entry.from_origin.then(&grounding) },
            );
        }
        outcome.sort();
        Ok(outcome)
    }
}

/// The identity procedure: leaf clauses are already ground once the base
/// levels have instantiated their variables.
pub struct Identity;

impl TargetProcedure for Identity {
    fn name(&self) -> String {
        "id".into()
    }

    fn termination(&self) -> TerminationClass {
        TerminationClass::Always
    }

    fn apply(&self, sig: &mut Signature, clauses: &[Clause]) -> Result<InstantiationOutcome> {
        let mut outcome = InstantiationOutcome::default();
        for (i, c) in clauses.iter().enumerate() {
            if let Some(v) = c.vars().into_iter().next() {
                return Err(Error::fragment(
                    sig.leaf_level(),
                    format!("residual target variable `{}` under the identity scheme", v.name),
                ));
            }
            outcome.push(c.clone(), Provenance { origin: i, subst: Substitution::new() });
        }
        outcome.sort();
        Ok(outcome)
    }
}
