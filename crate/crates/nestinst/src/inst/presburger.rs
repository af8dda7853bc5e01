//! The base-complete procedure for the guarded Presburger fragment: uniform
//! instantiation with the pool `{ t - l | t in B_S, 0 <= l < m }` anchored by
//! the reserved upper-bound constant.

use std::collections::BTreeSet;

use crate::core::{Clause, FuncKind, Literal, Signature, SortId, Substitution, Term};
use crate::error::{Error, Result};
use crate::frame::linear::{canon_literal, normalize_linear, LinearForm};
use crate::frame::lt_literal;
use crate::inst::target::{InstantiationOutcome, Provenance};

/// The inferred fragment data: the ground guard terms, the congruence
/// modulus, and the sort the fragment lives at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresburgerFragment {
    pub sort: SortId,
    /// Canonicalized ground terms occurring in the clause set (never the
    /// reserved upper-bound constant).
    pub terms: Vec<LinearForm>,
    /// Least common multiple of every congruence modulus, 1 when none occur.
    pub modulus: u64,
}

/// The instantiation pool: `base_terms` with every downward step below the
/// modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundPool {
    pub base_terms: Vec<LinearForm>,
    pub pool: Vec<LinearForm>,
}

impl GroundPool {
    pub fn terms(&self, sig: &Signature, sort: SortId) -> Vec<Term> {
        self.pool.iter().map(|lf| lf.render(sig, sort)).collect()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Shape analysis of a literal over the fragment sort. `d` is the linear
/// difference of the comparison's sides.
enum Shape {
    Ground,
    VarLeGround { ground: LinearForm },
    GroundLeVar,
    VarLeVar,
    CongVarGround,
}

fn literal_shape(sig: &Signature, lit: &Literal, sort: SortId) -> Result<Shape> {
    if lit.is_ground() {
        return Ok(Shape::Ground);
    }
    let Term::App(f, args) = &lit.lhs else {
        return Err(bad_literal(sig, lit));
    };
    let kind = sig.func(*f).kind;
    if !matches!(kind, FuncKind::Le | FuncKind::EqMod(_)) || args[0].sort(sig) != sort {
        return Err(bad_literal(sig, lit));
    }
    if lit.pos {
        // Positive non-ground comparisons are outside the fragment.
        return Err(bad_literal(sig, lit));
    }
    let d = normalize_linear(sig, &args[0])?.sub(&normalize_linear(sig, &args[1])?);
    let mut vars: Vec<(Term, i64)> = Vec::new();
    let mut ground = LinearForm { offset: d.offset, coeffs: Default::default() };
    for (t, c) in &d.coeffs {
        if matches!(t, Term::Var(_)) {
            vars.push((t.clone(), *c));
        } else {
            ground.coeffs.insert(t.clone(), *c);
        }
    }
    match kind {
        FuncKind::EqMod(_) => match vars.as_slice() {
            [(_, c)] if c.abs() == 1 => Ok(Shape::CongVarGround),
            _ => Err(bad_literal(sig, lit)),
        },
        FuncKind::Le => match vars.as_slice() {
            [(_, 1)] => Ok(Shape::VarLeGround { ground: ground.negate() }),
            [(_, -1)] => Ok(Shape::GroundLeVar),
            [(_, 1), (_, -1)] | [(_, -1), (_, 1)] => {
                if ground.is_zero() {
                    Ok(Shape::VarLeVar)
                } else {
                    Err(bad_literal(sig, lit))
                }
            }
            _ => Err(bad_literal(sig, lit)),
        },
        _ => unreachable!(),
    }
}

fn bad_literal(sig: &Signature, lit: &Literal) -> Error {
    Error::fragment(
        0,
        format!("literal {} is outside the Presburger fragment", lit.display(sig)),
    )
}

/// Checks every non-ground literal against the permitted shapes and infers
/// the fragment: all ground terms of the sort, and the modulus as the least
/// common multiple of every congruence.
pub fn validate_fragment(
    sig: &Signature,
    clauses: &[Clause],
    sort: SortId,
    modulus_cap: u64,
) -> Result<PresburgerFragment> {
    let level = sig.level(sort);
    let mut modulus: u64 = 1;
    let mut terms: BTreeSet<LinearForm> = BTreeSet::new();
    let chi_name = format!("chi{}", "'".repeat(level as usize));
    for clause in clauses {
        for lit in clause.literals() {
            for side in [&lit.lhs, &lit.rhs] {
                collect_ground_terms(sig, side, sort, &chi_name, &mut terms);
            }
            if let Term::App(f, _) = &lit.lhs {
                if let FuncKind::EqMod(k) = sig.func(*f).kind {
                    if k == 0 {
                        return Err(bad_literal(sig, lit));
                    }
                    modulus = lcm(modulus, k);
                    if modulus > modulus_cap {
                        return Err(Error::ResourceLimit(format!(
                            "congruence modulus {modulus} exceeds the cap {modulus_cap}"
                        )));
                    }
                }
            }
            literal_shape(sig, lit, sort).map(|_| ()).map_err(|e| match e {
                Error::FragmentViolation { msg, .. } => Error::FragmentViolation { level, msg },
                other => other,
            })?;
        }
    }
    Ok(PresburgerFragment { sort, terms: terms.into_iter().collect(), modulus })
}

fn collect_ground_terms(
    sig: &Signature,
    t: &Term,
    sort: SortId,
    chi_name: &str,
    out: &mut BTreeSet<LinearForm>,
) {
    if t.is_ground() && t.sort(sig) == sort {
        if let Ok(lf) = normalize_linear(sig, t) {
            let mentions_chi = lf.coeffs.keys().any(|a| {
                matches!(a, Term::App(f, _) if sig.func(*f).name == chi_name)
            });
            if !mentions_chi {
                out.insert(lf);
            }
        }
        return;
    }
    if let Term::App(_, args) = t {
        for a in args {
            collect_ground_terms(sig, a, sort, chi_name, out);
        }
    }
}

/// Computes `B_S` (the reserved constant plus every ground right operand of a
/// variable-bounding comparison) and the pool `G`.
pub fn compute_pool(
    sig: &mut Signature,
    clauses: &[Clause],
    fragment: &PresburgerFragment,
    no_chi: bool,
) -> Result<GroundPool> {
    let mut base: BTreeSet<LinearForm> = BTreeSet::new();
    if !no_chi {
        let chi = sig.chi(fragment.sort);
        base.insert(LinearForm::atom(Term::cst(chi)));
    }
    for clause in clauses {
        for lit in clause.literals() {
            if let Shape::VarLeGround { ground } = literal_shape(sig, lit, fragment.sort)? {
                base.insert(ground);
            }
        }
    }
    let mut pool: BTreeSet<LinearForm> = BTreeSet::new();
    for t in &base {
        for l in 0..fragment.modulus {
            pool.insert(t.shift(-(l as i64)));
        }
    }
    Ok(GroundPool {
        base_terms: base.into_iter().collect(),
        pool: pool.into_iter().collect(),
    })
}

/// Uniform instantiation: every clause instantiated with every total map
/// from its variables into the pool.
pub fn theta_z(
    sig: &mut Signature,
    clauses: &[Clause],
    fragment: &PresburgerFragment,
    no_chi: bool,
) -> Result<InstantiationOutcome> {
    let pool = compute_pool(sig, clauses, fragment, no_chi)?;
    let pool_terms = pool.terms(sig, fragment.sort);
    let mut outcome = InstantiationOutcome {
        pool_used: pool_terms.clone(),
        aux_axioms: chi_axioms(sig, fragment, no_chi)?,
        ..Default::default()
    };
    for (i, clause) in clauses.iter().enumerate() {
        for subst in all_maps(clause, &pool_terms, fragment.sort, sig)? {
            let inst: Clause = subst
                .apply_clause(clause)
                .literals()
                .iter()
                .map(|l| canon_literal(sig, l))
                .collect();
            outcome.push(inst, Provenance { origin: i, subst });
        }
    }
    outcome.sort();
    Ok(outcome)
}

/// All total maps from the clause's variables into the pool. Every variable
/// must live at the fragment sort.
pub fn all_maps(
    clause: &Clause,
    pool: &[Term],
    sort: SortId,
    sig: &Signature,
) -> Result<Vec<Substitution>> {
    let vars: Vec<_> = clause.vars().into_iter().collect();
    for v in &vars {
        if v.sort != sort {
            return Err(Error::Contract(format!(
                "variable `{}` of sort `{}` cannot be instantiated by this level",
                v.name,
                sig.sort(v.sort).name
            )));
        }
    }
    if vars.is_empty() {
        return Ok(vec![Substitution::new()]);
    }
    if pool.is_empty() {
        return Ok(vec![]);
    }
    let mut out = vec![Substitution::new()];
    for v in vars {
        let mut next = Vec::with_capacity(out.len() * pool.len());
        for partial in &out {
            for t in pool {
                let mut s = partial.clone();
                s.bind(v.clone(), t.clone());
                next.push(s);
            }
        }
        out = next;
    }
    Ok(out)
}

/// One axiom `t + m < chi` per fragment term.
pub fn chi_axioms(sig: &mut Signature, fragment: &PresburgerFragment, no_chi: bool) -> Result<Vec<Clause>> {
    if no_chi {
        return Ok(vec![]);
    }
    let chi = sig.chi(fragment.sort);
    let mut out = Vec::new();
    for t in &fragment.terms {
        let lhs = t.shift(fragment.modulus as i64).render(sig, fragment.sort);
        out.push(Clause::new(vec![lt_literal(sig, true, lhs, Term::cst(chi))]));
    }
    out.sort();
    out.dedup();
    Ok(out)
}
