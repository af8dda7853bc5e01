//! Substitutions, base-ground instantiation and substitution decomposition.

use std::collections::{BTreeMap, BTreeSet};

use crate::core::signature::{Signature, SortKind};
use crate::core::term::{Clause, Literal, Term, Var};
use crate::error::{Error, Result};

/// Finite map from variables to terms of equal sort; variables outside the
/// domain are fixed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn singleton(v: Var, t: Term) -> Self {
        let mut s = Substitution::new();
        s.bind(v, t);
        s
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Self {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            s.bind(v, t);
        }
        s
    }

    /// Binds `v` to `t`; binding a variable to itself removes it from the
    /// domain.
    pub fn bind(&mut self, v: Var, t: Term) {
        if let Term::Var(w) = &t {
            if *w == v {
                self.map.remove(&v);
                return;
            }
        }
        self.map.insert(v, t);
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.map.values().all(Term::is_ground)
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| self.apply_term(a)).collect()),
            Term::Num(..) => t.clone(),
        }
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        Literal::new(l.pos, self.apply_term(&l.lhs), self.apply_term(&l.rhs))
    }

    pub fn apply_clause(&self, c: &Clause) -> Clause {
        c.literals().iter().map(|l| self.apply_literal(l)).collect()
    }

    /// Composition: `(self.then(other))(x) = other(self(x))`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in &self.map {
            out.bind(v.clone(), other.apply_term(t));
        }
        for (v, t) in &other.map {
            if !out.map.contains_key(v) && !self.map.contains_key(v) {
                out.bind(v.clone(), t.clone());
            }
        }
        out
    }

    /// Restricts the substitution to the given variable set.
    pub fn restrict(&self, vars: &BTreeSet<Var>) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(v, _)| vars.contains(v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect(),
        }
    }
}

/// Replaces exactly the base variables of an expression using `assignment`.
/// Fails if the assignment touches target variables or is not ground.
pub fn b_ground_instance(
    sig: &Signature,
    clause: &Clause,
    assignment: &Substitution,
) -> Result<Clause> {
    for (v, t) in assignment.iter() {
        if sig.sort(v.sort).kind != SortKind::Base {
            return Err(Error::Contract(format!(
                "base-ground assignment touches target variable `{}`",
                v.name
            )));
        }
        if !t.is_ground() {
            return Err(Error::Contract(format!(
                "assignment for `{}` is not ground",
                v.name
            )));
        }
    }
    Ok(assignment.apply_clause(clause))
}

/// A total map on ground base terms represented as a finite table with
/// identity default, lifted to expressions by rewriting maximal ground base
/// subterms.
#[derive(Debug, Clone, Default)]
pub struct BMapping {
    table: BTreeMap<Term, Term>,
}

impl BMapping {
    pub fn new() -> Self {
        BMapping::default()
    }

    pub fn insert(&mut self, from: Term, to: Term) {
        self.table.insert(from, to);
    }

    pub fn map_term(&self, sig: &Signature, t: &Term) -> Term {
        if t.is_ground() && sig.sort(t.sort(sig)).kind == SortKind::Base {
            if let Some(img) = self.table.get(t) {
                return img.clone();
            }
            return t.clone();
        }
        match t {
            Term::App(f, args) => {
                Term::App(*f, args.iter().map(|a| self.map_term(sig, a)).collect())
            }
            _ => t.clone(),
        }
    }

    pub fn map_literal(&self, sig: &Signature, l: &Literal) -> Literal {
        Literal::new(l.pos, self.map_term(sig, &l.lhs), self.map_term(sig, &l.rhs))
    }

    pub fn map_clause(&self, sig: &Signature, c: &Clause) -> Clause {
        c.literals().iter().map(|l| self.map_literal(sig, l)).collect()
    }
}

fn stable_hash(s: &str) -> u64 {
    // FNV-1a, stable across runs for deterministic fresh names.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Splits a ground substitution into a target part followed by a base part:
/// the target part keeps the shape of each image with maximal ground base
/// subterms abstracted into variables, the base part grounds those variables.
pub fn decompose_ground_subst(
    sig: &Signature,
    subst: &Substitution,
) -> Result<(Substitution, Substitution)> {
    if !subst.is_ground() {
        return Err(Error::Contract("decomposition requires a ground substitution".into()));
    }
    // Maximal ground base subterms across all images of target variables.
    let mut base_terms: BTreeSet<Term> = BTreeSet::new();
    for (v, t) in subst.iter() {
        if sig.sort(v.sort).kind == SortKind::Target {
            collect_max_base(sig, t, &mut base_terms);
        }
    }
    // Choose an abstraction variable per base term, reusing a domain variable
    // that already maps to the term when one exists.
    let mut nu: BTreeMap<Term, Var> = BTreeMap::new();
    for t in &base_terms {
        let reuse = subst
            .iter()
            .find(|(v, img)| sig.sort(v.sort).kind == SortKind::Base && *img == t)
            .map(|(v, _)| v.clone());
        let var = reuse.unwrap_or_else(|| {
            let mut render = String::new();
            render_stable(sig, t, &mut render);
            Var::new(format!("_v{:x}", stable_hash(&render)), t.sort(sig))
        });
        nu.insert(t.clone(), var);
    }
    let mut target = Substitution::new();
    let mut base = Substitution::new();
    for (v, t) in subst.iter() {
        if sig.sort(v.sort).kind == SortKind::Target {
            target.bind(v.clone(), abstract_base(sig, t, &nu));
        } else {
            base.bind(v.clone(), t.clone());
        }
    }
    for (t, v) in &nu {
        base.bind(v.clone(), t.clone());
    }
    Ok((target, base))
}

fn collect_max_base(sig: &Signature, t: &Term, out: &mut BTreeSet<Term>) {
    if t.is_ground() && sig.sort(t.sort(sig)).kind == SortKind::Base {
        out.insert(t.clone());
        return;
    }
    if let Term::App(_, args) = t {
        for a in args {
            collect_max_base(sig, a, out);
        }
    }
}

fn abstract_base(sig: &Signature, t: &Term, nu: &BTreeMap<Term, Var>) -> Term {
    if let Some(v) = nu.get(t) {
        if t.is_ground() && sig.sort(t.sort(sig)).kind == SortKind::Base {
            return Term::Var(v.clone());
        }
    }
    match t {
        Term::App(f, args) => Term::App(*f, args.iter().map(|a| abstract_base(sig, a, nu)).collect()),
        _ => t.clone(),
    }
}

fn render_stable(sig: &Signature, t: &Term, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(&v.name),
        Term::Num(n, _) => out.push_str(&n.to_string()),
        Term::App(f, args) => {
            out.push('(');
            out.push_str(&sig.func(*f).name);
            for a in args {
                out.push(' ');
                render_stable(sig, a, out);
            }
            out.push(')');
        }
    }
}
