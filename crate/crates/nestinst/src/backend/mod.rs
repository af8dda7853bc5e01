//! Deciding the ground problem: clause evaluation, an exhaustive bounded
//! model finder, script emission and the external solver client.

pub mod external;
pub mod smtlib;

use std::collections::{BTreeMap, BTreeSet};

use crate::core::{Clause, FuncId, FuncKind, Literal, Signature, SortId, Term};
use crate::error::{Error, Result};
use crate::inst::automata::TreeAutomaton;

/// A fully ground clause set together with everything needed to interpret
/// it: the signature (integer-sort tags live on the sorts), the upper-bound
/// axioms, and the membership predicate tables for free-algebra sorts.
#[derive(Debug, Clone)]
pub struct GroundProblem {
    pub sig: Signature,
    pub clauses: Vec<Clause>,
    pub chi_axioms: Vec<Clause>,
    /// Membership predicate denotations (evaluated syntactically).
    pub membership: Vec<(FuncId, TreeAutomaton)>,
    /// Sorts interpreted as their own ground terms (free constructor
    /// algebras).
    pub herbrand_sorts: BTreeSet<SortId>,
}

impl GroundProblem {
    pub fn new(sig: Signature, clauses: Vec<Clause>, chi_axioms: Vec<Clause>) -> Result<Self> {
        let p = GroundProblem {
            sig,
            clauses,
            chi_axioms,
            membership: vec![],
            herbrand_sorts: BTreeSet::new(),
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        for c in self.clauses.iter().chain(&self.chi_axioms) {
            if !c.is_ground() {
                return Err(Error::Contract(format!(
                    "ground problem contains variables: {}",
                    c.display(&self.sig)
                )));
            }
            c.sort_check(&self.sig)?;
        }
        Ok(())
    }

    pub fn all_clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().chain(&self.chi_axioms)
    }
}

/// Values of ground terms under a model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Elem(usize),
    Bool(bool),
    /// Free-algebra terms denote themselves.
    Herb(Term),
}

/// An interpretation of the problem's uninterpreted material: one value per
/// maximal uninterpreted application (constants included). Congruence is the
/// search's responsibility; evaluation only reads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    pub assignment: BTreeMap<Term, Value>,
}

impl Model {
    pub fn eval_term(&self, prob: &GroundProblem, t: &Term) -> Result<Value> {
        let sig = &prob.sig;
        match t {
            Term::Num(n, _) => Ok(Value::Int(*n)),
            Term::Var(v) => Err(Error::Contract(format!("variable `{}` in ground evaluation", v.name))),
            Term::App(f, args) => {
                let decl = sig.func(*f);
                match decl.kind {
                    FuncKind::True => Ok(Value::Bool(true)),
                    FuncKind::Plus | FuncKind::Minus => {
                        let (a, b) = (self.eval_int(prob, &args[0])?, self.eval_int(prob, &args[1])?);
                        Ok(Value::Int(if decl.kind == FuncKind::Plus { a + b } else { a - b }))
                    }
                    FuncKind::Succ => Ok(Value::Int(self.eval_int(prob, &args[0])? + 1)),
                    FuncKind::Pred => Ok(Value::Int(self.eval_int(prob, &args[0])? - 1)),
                    FuncKind::Le => {
                        Ok(Value::Bool(self.eval_int(prob, &args[0])? <= self.eval_int(prob, &args[1])?))
                    }
                    FuncKind::Lt => {
                        Ok(Value::Bool(self.eval_int(prob, &args[0])? < self.eval_int(prob, &args[1])?))
                    }
                    FuncKind::EqMod(k) => {
                        let d = self.eval_int(prob, &args[0])? - self.eval_int(prob, &args[1])?;
                        Ok(Value::Bool(d.rem_euclid(k as i64) == 0))
                    }
                    _ => {
                        if let Some((_, auto)) = prob.membership.iter().find(|(p, _)| p == f) {
                            return Ok(Value::Bool(auto.accepts(&args[0])));
                        }
                        if prob.herbrand_sorts.contains(&decl.result) {
                            return Ok(Value::Herb(t.clone()));
                        }
                        self.assignment
                            .get(t)
                            .cloned()
                            .ok_or_else(|| Error::Contract(format!(
                                "no value for `{}`",
                                t.display(sig)
                            )))
                    }
                }
            }
        }
    }

    fn eval_int(&self, prob: &GroundProblem, t: &Term) -> Result<i64> {
        match self.eval_term(prob, t)? {
            Value::Int(n) => Ok(n),
            other => Err(Error::Contract(format!("expected integer, got {other:?}"))),
        }
    }

    pub fn eval_literal(&self, prob: &GroundProblem, lit: &Literal) -> Result<bool> {
        let l = self.eval_term(prob, &lit.lhs)?;
        let r = self.eval_term(prob, &lit.rhs)?;
        Ok((l == r) == lit.pos)
    }
}

/// Disjunctive evaluation of a ground clause under a model.
pub fn evaluate_clause(prob: &GroundProblem, model: &Model, clause: &Clause) -> Result<bool> {
    for lit in clause.literals() {
        if model.eval_literal(prob, lit)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(Model),
    UnsatWithinBounds { window: (i64, i64) },
    UnsatExternal,
    Unknown { reason: String },
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "sat",
            Verdict::UnsatWithinBounds { .. } => "unsat-within-bounds",
            Verdict::UnsatExternal => "unsat-external",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

/// One assignable slot: a maximal uninterpreted application.
#[derive(Debug, Clone)]
struct Slot {
    term: Term,
    func: FuncId,
    args: Vec<Term>,
    domain: SlotDomain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum SlotDomain {
    Int,
    /// Assigned after everything it depends on, one past the running max.
    ChiInt,
    Elem,
    Bool,
}

fn collect_slots(prob: &GroundProblem) -> Result<Vec<Slot>> {
    let sig = &prob.sig;
    let mut seen: BTreeSet<Term> = BTreeSet::new();
    let mut order: Vec<Term> = Vec::new();
    let mut core_terms: BTreeSet<Term> = BTreeSet::new();
    for (ci, clause) in prob.all_clauses().enumerate() {
        let in_core = ci < prob.clauses.len();
        for lit in clause.literals() {
            for side in [&lit.lhs, &lit.rhs] {
                collect_term_slots(prob, side, &mut seen, &mut order)?;
                if in_core {
                    for sub in side.subterms() {
                        core_terms.insert((*sub).clone());
                    }
                }
            }
        }
    }
    // Dependency order: by subterm count then term order; upper-bound
    // constants after every plain slot, chi-dependent slots after them, and
    // slots occurring only in the bound axioms at the very end (they never
    // constrain the rest).
    let mentions_chi = |t: &Term| {
        t.subterms()
            .iter()
            .any(|s| matches!(s, Term::App(f, _) if sig.func(*f).kind == FuncKind::Chi))
    };
    order.sort_by_key(|t| {
        let chi_rank = if matches!(t, Term::App(f, _) if sig.func(*f).kind == FuncKind::Chi) {
            1
        } else if mentions_chi(t) {
            2
        } else if !core_terms.contains(t) {
            3
        } else {
            0
        };
        (chi_rank, t.subterms().len(), t.clone())
    });
    let mut slots = Vec::new();
    for t in order {
        let Term::App(f, args) = &t else { continue };
        let decl = sig.func(*f);
        let sort = sig.sort(decl.result);
        let domain = if decl.kind == FuncKind::Chi {
            SlotDomain::ChiInt
        } else if sort.integer {
            SlotDomain::Int
        } else if sort.is_bool {
            SlotDomain::Bool
        } else if sort.real {
            return Err(Error::Unsupported(
                "real-sorted terms need the external backend".into(),
            ));
        } else {
            SlotDomain::Elem
        };
        slots.push(Slot { term: t.clone(), func: *f, args: args.clone(), domain });
    }
    Ok(slots)
}

fn collect_term_slots(
    prob: &GroundProblem,
    t: &Term,
    seen: &mut BTreeSet<Term>,
    order: &mut Vec<Term>,
) -> Result<()> {
    let sig = &prob.sig;
    match t {
        Term::Num(..) => Ok(()),
        Term::Var(v) => Err(Error::Contract(format!("variable `{}` in ground problem", v.name))),
        Term::App(f, args) => {
            for a in args {
                collect_term_slots(prob, a, seen, order)?;
            }
            let decl = sig.func(*f);
            let interpreted = decl.kind.is_arith_op()
                || decl.kind.is_arith_pred()
                || decl.kind == FuncKind::True
                || prob.membership.iter().any(|(p, _)| p == f)
                || prob.herbrand_sorts.contains(&decl.result);
            if !interpreted && seen.insert(t.clone()) {
                order.push(t.clone());
            }
            Ok(())
        }
    }
}

struct Search<'a> {
    prob: &'a GroundProblem,
    slots: Vec<Slot>,
    /// For each slot, the clauses mentioning it (checked incrementally).
    watch: Vec<Vec<usize>>,
    all_clauses: Vec<&'a Clause>,
    window: (i64, i64),
    free_domain: usize,
    node_cap: u64,
    nodes: u64,
    model: Model,
    congruence: BTreeMap<(FuncId, Vec<Value>), Value>,
    /// Highest element id used so far per free sort (symmetry breaking).
    elem_high: BTreeMap<crate::core::SortId, usize>,
}

impl Search<'_> {
    /// Partial clause evaluation: `Some(false)` only when every literal is
    /// decided false under the current assignment.
    fn clause_alive(&self, ci: usize) -> Result<bool> {
        let mut undecided = false;
        for lit in self.all_clauses[ci].literals() {
            match (
                self.model.eval_term(self.prob, &lit.lhs),
                self.model.eval_term(self.prob, &lit.rhs),
            ) {
                (Ok(l), Ok(r)) => {
                    if (l == r) == lit.pos {
                        return Ok(true);
                    }
                }
                _ => undecided = true,
            }
        }
        Ok(undecided)
    }

    fn dfs(&mut self, depth: usize) -> Result<Option<Model>> {
        self.nodes += 1;
        if self.nodes > self.node_cap {
            return Err(Error::ResourceLimit("bounded search node cap".into()));
        }
        if depth == self.slots.len() {
            return Ok(Some(self.model.clone()));
        }
        let slot = self.slots[depth].clone();
        let args: Vec<Value> = slot
            .args
            .iter()
            .map(|a| self.model.eval_term(self.prob, a))
            .collect::<Result<_>>()?;
        let key = (slot.func, args);
        let forced = self.congruence.get(&key).cloned();
        let candidates: Vec<Value> = match &forced {
            Some(v) => vec![v.clone()],
            None => match slot.domain {
                SlotDomain::Int => (self.window.0..=self.window.1).map(Value::Int).collect(),
                SlotDomain::ChiInt => {
                    let mut hi = self.window.1;
                    for v in self.model.assignment.values() {
                        if let Value::Int(n) = v {
                            hi = hi.max(*n);
                        }
                    }
                    let slack = i64::from(max_modulus(&self.prob.sig));
                    vec![Value::Int(hi + slack + 1)]
                }
                SlotDomain::Elem => {
                    // Element values are interchangeable: only the equality
                    // pattern matters, so one fresh id suffices.
                    let sort = self.prob.sig.func(slot.func).result;
                    let high = self.elem_high.get(&sort).copied().unwrap_or(0);
                    (0..high.saturating_add(1).min(self.free_domain))
                        .map(Value::Elem)
                        .collect()
                }
                SlotDomain::Bool => vec![Value::Bool(false), Value::Bool(true)],
            },
        };
        let sort = self.prob.sig.func(slot.func).result;
        for v in candidates {
            self.model.assignment.insert(slot.term.clone(), v.clone());
            let saved_high = self.elem_high.get(&sort).copied();
            if let Value::Elem(e) = &v {
                let h = self.elem_high.entry(sort).or_insert(0);
                *h = (*h).max(e + 1);
            }
            if forced.is_none() {
                self.congruence.insert(key.clone(), v);
            }
            let mut alive = true;
            for &ci in &self.watch[depth] {
                if !self.clause_alive(ci)? {
                    alive = false;
                    break;
                }
            }
            let r = if alive { self.dfs(depth + 1)? } else { None };
            if forced.is_none() {
                self.congruence.remove(&key);
            }
            match saved_high {
                Some(h) => {
                    self.elem_high.insert(sort, h);
                }
                None => {
                    self.elem_high.remove(&sort);
                }
            }
            self.model.assignment.remove(&slot.term);
            if r.is_some() {
                return Ok(r);
            }
        }
        Ok(None)
    }
}

/// Exhaustive search over integer constants in the window and free-sort
/// constants over a finite element domain, with functional congruence
/// enforced during enumeration. The upper-bound constants are not
/// enumerated: they are pinned just above everything already assigned, which
/// makes their axioms hold by construction.
pub fn bounded_model_search(
    prob: &GroundProblem,
    window: (i64, i64),
    free_domain: usize,
    node_cap: u64,
) -> Result<Verdict> {
    if window.0 > window.1 {
        return Err(Error::Config("empty search window".into()));
    }
    let slots = collect_slots(prob)?;
    let all_clauses: Vec<&Clause> = prob.all_clauses().collect();
    let slot_index: BTreeMap<Term, usize> =
        slots.iter().enumerate().map(|(i, s)| (s.term.clone(), i)).collect();
    // Clauses with no slots at all are decided up front.
    for clause in &all_clauses {
        let has_slot = clause.literals().iter().any(|lit| {
            [&lit.lhs, &lit.rhs]
                .iter()
                .any(|side| side.subterms().iter().any(|sub| slot_index.contains_key(sub)))
        });
        if !has_slot {
            let decided = evaluate_clause(prob, &Model::default(), clause)?;
            if !decided {
                return Ok(Verdict::UnsatWithinBounds { window });
            }
        }
    }
    // Each slot watches the clauses mentioning it, rechecked on assignment.
    let mut watch: Vec<Vec<usize>> = vec![Vec::new(); slots.len()];
    for (ci, clause) in all_clauses.iter().enumerate() {
        for lit in clause.literals() {
            for side in [&lit.lhs, &lit.rhs] {
                for sub in side.subterms() {
                    if let Some(i) = slot_index.get(sub) {
                        if !watch[*i].contains(&ci) {
                            watch[*i].push(ci);
                        }
                    }
                }
            }
        }
    }
    let mut search = Search {
        prob,
        slots,
        watch,
        all_clauses,
        window,
        free_domain: free_domain.max(1),
        node_cap,
        nodes: 0,
        model: Model::default(),
        congruence: BTreeMap::new(),
        elem_high: BTreeMap::new(),
    };
    let found = match search.dfs(0) {
        Ok(found) => found,
        Err(Error::ResourceLimit(_)) => return Ok(Verdict::Unknown { reason: "bound".into() }),
        Err(e) => return Err(e),
    };
    match found {
        Some(model) => {
            // Self-check before reporting satisfiable.
            for clause in prob.all_clauses() {
                if !evaluate_clause(prob, &model, clause)? {
                    return Err(Error::Contract(format!(
                        "model fails clause {}",
                        clause.display(&prob.sig)
                    )));
                }
            }
            Ok(Verdict::Sat(model))
        }
        None => Ok(Verdict::UnsatWithinBounds { window }),
    }
}

fn max_modulus(sig: &Signature) -> u32 {
    sig.funcs()
        .filter_map(|(_, d)| match d.kind {
            FuncKind::EqMod(k) => Some(k as u32),
            _ => None,
        })
        .max()
        .unwrap_or(1)
}

/// The default window: from `min(0, least numeral) - m` up to
/// `max numeral + (count of distinct integer constants + 2) * m`.
pub fn default_window(prob: &GroundProblem) -> (i64, i64) {
    let sig = &prob.sig;
    let mut lo = 0i64;
    let mut hi = 0i64;
    let mut consts: BTreeSet<Term> = BTreeSet::new();
    for clause in prob.all_clauses() {
        for lit in clause.literals() {
            for side in [&lit.lhs, &lit.rhs] {
                for sub in side.subterms() {
                    match sub {
                        Term::Num(n, _) => {
                            lo = lo.min(*n);
                            hi = hi.max(*n);
                        }
                        Term::App(f, args)
                            if args.is_empty()
                                && sig.sort(sig.func(*f).result).integer
                                && sig.func(*f).kind != FuncKind::Chi =>
                        {
                            consts.insert(sub.clone());
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    let m = i64::from(max_modulus(sig));
    (lo - m, hi + (consts.len() as i64 + 2) * m)
}

/// Free-sort element domain default: the number of distinct free-sort ground
/// terms occurring in the problem.
pub fn default_free_domain(prob: &GroundProblem) -> usize {
    let sig = &prob.sig;
    let mut terms: BTreeSet<Term> = BTreeSet::new();
    for clause in prob.all_clauses() {
        for lit in clause.literals() {
            for side in [&lit.lhs, &lit.rhs] {
                for sub in side.subterms() {
                    let sort = sig.sort(sub.sort(sig));
                    if !sort.integer && !sort.is_bool && !sort.real {
                        terms.insert(sub.clone());
                    }
                }
            }
        }
    }
    terms.len().max(1)
}
