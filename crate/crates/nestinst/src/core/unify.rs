//! Unification and matching.

use std::collections::BTreeSet;

use crate::core::signature::Signature;
use crate::core::subst::Substitution;
use crate::core::term::{Clause, Literal, Term};
#[cfg(test)]
use crate::core::term::Var;
use crate::error::{Error, Result};

/// Most general unifier of a list of term pairs, or `None` when the pairs are
/// not unifiable. Sort-incompatible pairs are a validation error, distinct
/// from unification failure. The returned unifier is idempotent.
pub fn mgu(sig: &Signature, pairs: &[(Term, Term)]) -> Result<Option<Substitution>> {
    for (l, r) in pairs {
        if l.sort(sig) != r.sort(sig) {
            return Err(Error::Sort(format!(
                "cannot unify terms of sorts `{}` and `{}`",
                sig.sort(l.sort(sig)).name,
                sig.sort(r.sort(sig)).name
            )));
        }
    }
    let mut work: Vec<(Term, Term)> = pairs.to_vec();
    let mut subst = Substitution::new();
    while let Some((l, r)) = work.pop() {
        let l = subst.apply_term(&l);
        let r = subst.apply_term(&r);
        match (l, r) {
            (a, b) if a == b => {}
            (Term::Var(v), t) | (t, Term::Var(v)) => {
                if t.contains_var(&v) {
                    return Ok(None); // occurs check
                }
                let binding = Substitution::singleton(v, t);
                subst = subst.then(&binding);
            }
            (Term::App(f, fa), Term::App(g, ga)) => {
                if f != g || fa.len() != ga.len() {
                    return Ok(None);
                }
                work.extend(fa.into_iter().zip(ga));
            }
            _ => return Ok(None),
        }
    }
    // Normalize to an idempotent unifier.
    let mut out = Substitution::new();
    for (v, t) in subst.iter() {
        out.bind(v.clone(), fully_apply(&subst, t));
    }
    Ok(Some(out))
}

fn fully_apply(s: &Substitution, t: &Term) -> Term {
    let next = s.apply_term(t);
    if next == *t {
        next
    } else {
        fully_apply(s, &next)
    }
}

/// First-order matching: extends `acc` so that `pattern * acc = target`, with
/// bindings allowed only on pattern variables.
pub fn match_term(pattern: &Term, target: &Term, acc: &mut Substitution) -> bool {
    match (pattern, target) {
        (Term::Var(v), t) => match acc.get(v) {
            Some(bound) => bound == t,
            None => {
                acc.bind(v.clone(), t.clone());
                true
            }
        },
        (Term::Num(a, s), Term::Num(b, s2)) => a == b && s == s2,
        (Term::App(f, fa), Term::App(g, ga)) => {
            f == g
                && fa.len() == ga.len()
                && fa.iter().zip(ga).all(|(p, t)| match_term(p, t, acc))
        }
        _ => false,
    }
}

fn match_literal(pattern: &Literal, target: &Literal, acc: &mut Substitution) -> bool {
    pattern.pos == target.pos
        && {
            let mut probe = acc.clone();
            if match_term(&pattern.lhs, &target.lhs, &mut probe)
                && match_term(&pattern.rhs, &target.rhs, &mut probe)
            {
                *acc = probe;
                true
            } else {
                false
            }
        }
}

/// All substitutions `theta` with `pattern * theta == ground` as literal
/// sets, found by assigning each pattern literal to some ground literal.
pub fn match_clause(pattern: &Clause, ground: &Clause) -> Vec<Substitution> {
    if pattern.is_empty() {
        return if ground.is_empty() { vec![Substitution::new()] } else { vec![] };
    }
    if ground.is_empty() {
        return vec![];
    }
    let mut results: BTreeSet<Substitution> = BTreeSet::new();
    let mut acc = Substitution::new();
    assign(pattern.literals(), 0, ground, &mut acc, &mut results);
    results
        .into_iter()
        .filter(|theta| &theta.apply_clause(pattern) == ground)
        .collect()
}

fn assign(
    pats: &[Literal],
    idx: usize,
    ground: &Clause,
    acc: &mut Substitution,
    out: &mut BTreeSet<Substitution>,
) {
    if idx == pats.len() {
        out.insert(acc.clone());
        return;
    }
    for g in ground.literals() {
        let mut next = acc.clone();
        if match_literal(&pats[idx], g, &mut next) {
            assign(pats, idx + 1, ground, &mut next, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::signature::{SortId, SortKind};

    struct Fx {
        sig: Signature,
        nat: SortId,
        elem: SortId,
    }

    fn fx() -> Fx {
        let mut sig = Signature::new();
        let nat = sig.add_sort("nat", SortKind::Base, 0, true).unwrap();
        let elem = sig.add_sort("elem", SortKind::Target, 1, false).unwrap();
        sig.true_const(1);
        Fx { sig, nat, elem }
    }

    #[test]
    fn textbook_unifier() {
        let mut f = fx();
        let b1 = f.sig.bool_sort(1);
        let p = f.sig.add_func("p", vec![f.elem, f.elem], b1).unwrap();
        let a = f.sig.add_func("a", vec![], f.elem).unwrap();
        let c = f.sig.add_func("c", vec![], f.elem).unwrap();
        let x = Term::var("x", f.elem);
        let y = Term::var("y", f.elem);
        let lhs = Term::App(p, vec![x.clone(), Term::cst(c)]);
        let rhs = Term::App(p, vec![Term::cst(a), y.clone()]);
        let s = mgu(&f.sig, &[(lhs.clone(), rhs.clone())]).unwrap().unwrap();
        assert_eq!(s.apply_term(&lhs), s.apply_term(&rhs));
        assert_eq!(s.get(&Var::new("x", f.elem)), Some(&Term::cst(a)));
        assert_eq!(s.get(&Var::new("y", f.elem)), Some(&Term::cst(c)));
        // Idempotence.
        for (_, t) in s.iter() {
            assert_eq!(s.apply_term(t), *t);
        }
    }

    #[test]
    fn occurs_check_fails() {
        let mut f = fx();
        let g = f.sig.add_func("g", vec![f.elem], f.elem).unwrap();
        let x = Term::var("x", f.elem);
        let gx = Term::App(g, vec![x.clone()]);
        assert_eq!(mgu(&f.sig, &[(x, gx)]).unwrap(), None);
    }

    #[test]
    fn clash_fails() {
        let mut f = fx();
        let b1 = f.sig.bool_sort(1);
        let q = f.sig.add_func("q", vec![f.elem, f.elem], b1).unwrap();
        let c = f.sig.add_func("c", vec![], f.elem).unwrap();
        let d = f.sig.add_func("d", vec![], f.elem).unwrap();
        let x = Term::var("x", f.elem);
        let lhs = Term::App(q, vec![x.clone(), x.clone()]);
        let rhs = Term::App(q, vec![Term::cst(c), Term::cst(d)]);
        assert_eq!(mgu(&f.sig, &[(lhs, rhs)]).unwrap(), None);
    }

    #[test]
    fn sort_mismatch_is_error() {
        let f = fx();
        let x = Term::var("x", f.nat);
        let y = Term::var("y", f.elem);
        assert!(mgu(&f.sig, &[(x, y)]).is_err());
    }

    #[test]
    fn match_clause_set_collapse() {
        let mut f = fx();
        let b1 = f.sig.bool_sort(1);
        let tt = f.sig.true_const(1);
        let p = f.sig.add_func("p", vec![f.elem], b1).unwrap();
        let a = f.sig.add_func("a", vec![], f.elem).unwrap();
        let atom = |t: Term| Literal::eq(Term::App(p, vec![t]), Term::cst(tt));
        let pattern = Clause::new(vec![atom(Term::var("x", f.elem)), atom(Term::var("y", f.elem))]);
        let ground = Clause::new(vec![atom(Term::cst(a))]);
        let matches = match_clause(&pattern, &ground);
        assert_eq!(matches.len(), 1);
        let theta = &matches[0];
        assert_eq!(theta.get(&Var::new("x", f.elem)), Some(&Term::cst(a)));
        assert_eq!(theta.get(&Var::new("y", f.elem)), Some(&Term::cst(a)));
    }

    #[test]
    fn match_clause_two_vars() {
        let mut f = fx();
        let b1 = f.sig.bool_sort(1);
        let tt = f.sig.true_const(1);
        let r = f.sig.add_func("r", vec![f.elem, f.elem, f.elem], b1).unwrap();
        let dia = f.sig.add_func("dd", vec![], f.elem).unwrap();
        let c = f.sig.add_func("c", vec![], f.elem).unwrap();
        let d = f.sig.add_func("d", vec![], f.elem).unwrap();
        let atom = |a: Term, b: Term, cc: Term| Literal::eq(Term::App(r, vec![a, b, cc]), Term::cst(tt));
        let pattern = Clause::new(vec![atom(
            Term::cst(dia),
            Term::var("x", f.elem),
            Term::var("y", f.elem),
        )]);
        let ground = Clause::new(vec![atom(Term::cst(dia), Term::cst(c), Term::cst(d))]);
        let ms = match_clause(&pattern, &ground);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].get(&Var::new("x", f.elem)), Some(&Term::cst(c)));
        assert_eq!(ms[0].get(&Var::new("y", f.elem)), Some(&Term::cst(d)));
    }

    #[test]
    fn match_clause_no_match_is_empty() {
        let mut f = fx();
        let b1 = f.sig.bool_sort(1);
        let tt = f.sig.true_const(1);
        let p = f.sig.add_func("p", vec![f.elem], b1).unwrap();
        let q = f.sig.add_func("q", vec![f.elem], b1).unwrap();
        let a = f.sig.add_func("a", vec![], f.elem).unwrap();
        let patom = |t: Term| Literal::eq(Term::App(p, vec![t]), Term::cst(tt));
        let qatom = |t: Term| Literal::eq(Term::App(q, vec![t]), Term::cst(tt));
        let pattern = Clause::new(vec![patom(Term::var("x", f.elem))]);
        let ground = Clause::new(vec![qatom(Term::cst(a))]);
        assert!(match_clause(&pattern, &ground).is_empty());
    }
}
