//! Clause-set preprocessing: literal normalization, store elimination, and
//! the inverse of sort copying.

use std::collections::{BTreeMap, BTreeSet};

use crate::core::{
    Clause, FuncId, FuncKind, Literal, Signature, SortId, SortKind, Term, Var,
};
use crate::error::{Error, Result};
use crate::frame::linear::{canon_literal, normalize_linear};

/// Rewrites strict comparisons into the non-strict shapes and abstracts
/// non-variable lower-level arguments out of higher-level atoms behind fresh
/// guarded variables. The pass is total; fragment validators run afterwards.
pub fn normalize_literals(sig: &Signature, clauses: &[Clause]) -> Vec<Clause> {
    clauses.iter().map(|c| normalize_clause(sig, c)).collect()
}

fn normalize_clause(sig: &Signature, clause: &Clause) -> Clause {
    let mut lits: Vec<Literal> = Vec::new();
    for l in clause.literals() {
        // Non-ground integer disequations split into the two permitted
        // negative bounds: x != t is x > t or x < t.
        let int_eq = !l.is_pred_sugar(sig) && sig.sort(l.lhs.sort(sig)).integer;
        if int_eq && !l.pos && !l.is_ground() {
            lits.push(le_lit(sig, false, l.lhs.clone(), l.rhs.clone()));
            lits.push(le_lit(sig, false, l.rhs.clone(), l.lhs.clone()));
        } else {
            lits.push(lower_strict(sig, l));
        }
    }

    // Collect terms needing abstraction: non-variable arguments whose sort
    // level is below the owning symbol's level.
    let mut targets: Vec<Term> = Vec::new();
    for l in &lits {
        collect_abstractions(sig, &l.lhs, &mut targets);
        collect_abstractions(sig, &l.rhs, &mut targets);
    }
    if targets.is_empty() {
        return Clause::new(lits);
    }
    let clause_vars = clause.vars();
    let mut guards: Vec<Literal> = Vec::new();
    let mut n = 0;
    for u in targets {
        let sort = u.sort(sig);
        let mut name = format!("_g{n}");
        while clause_vars.contains(&Var::new(name.clone(), sort)) {
            n += 1;
            name = format!("_g{n}");
        }
        let v = Var::new(name, sort);
        n += 1;
        let vt = Term::Var(v.clone());
        if sig.sort(sort).integer {
            guards.push(le_lit(sig, false, vt.clone(), u.clone()));
            guards.push(le_lit(sig, false, u.clone(), vt.clone()));
        } else {
            guards.push(Literal::neq(vt.clone(), u.clone()));
        }
        for l in &mut lits {
            *l = Literal::new(
                l.pos,
                replace_under_parents(sig, &l.lhs, &u, &vt),
                replace_under_parents(sig, &l.rhs, &u, &vt),
            );
        }
    }
    lits.extend(guards);
    Clause::new(lits)
}

/// Arguments that sit below their parent symbol's level and are not
/// variables must be abstracted (deduplicated, in first-occurrence order).
/// Store definitions are exempt: they are rewritten away wholesale by the
/// elimination pass, which requires their ground shape intact.
fn collect_abstractions(sig: &Signature, t: &Term, out: &mut Vec<Term>) {
    if let Term::App(f, args) = t {
        let decl = sig.func(*f);
        if decl.name.starts_with("store") {
            return;
        }
        let parent_level = sig.level(decl.result);
        for (arg, _slot) in args.iter().zip(&decl.args) {
            let arg_level = sig.level(arg.sort(sig));
            if arg_level < parent_level && !matches!(arg, Term::Var(_)) {
                if !out.contains(arg) {
                    out.push(arg.clone());
                }
            } else {
                collect_abstractions(sig, arg, out);
            }
        }
    }
}

fn replace_under_parents(sig: &Signature, t: &Term, from: &Term, to: &Term) -> Term {
    if let Term::App(f, args) = t {
        let decl = sig.func(*f);
        let parent_level = sig.level(decl.result);
        let new_args = args
            .iter()
            .map(|arg| {
                let arg_level = sig.level(arg.sort(sig));
                if arg == from && arg_level < parent_level {
                    to.clone()
                } else {
                    replace_under_parents(sig, arg, from, to)
                }
            })
            .collect();
        Term::App(*f, new_args)
    } else {
        t.clone()
    }
}

fn lower_strict(sig: &Signature, lit: &Literal) -> Literal {
    let Term::App(f, args) = &lit.lhs else { return lit.clone() };
    if sig.func(*f).kind != FuncKind::Lt {
        return lit.clone();
    }
    let (u, v) = (args[0].clone(), args[1].clone());
    let sort = u.sort(sig);
    let lowered = if matches!(v, Term::Var(_)) && !matches!(u, Term::Var(_)) {
        // t < x becomes t + 1 <= x.
        let plus = sig.arith_func(sort, FuncKind::Plus).expect("+");
        le_lit(sig, lit.pos, Term::App(plus, vec![u, Term::Num(1, sort)]), v)
    } else {
        // u < v becomes u <= v - 1.
        let minus = sig.arith_func(sort, FuncKind::Minus).expect("-");
        le_lit(sig, lit.pos, u, Term::App(minus, vec![v, Term::Num(1, sort)]))
    };
    canon_literal(sig, &lowered)
}

fn le_lit(sig: &Signature, pos: bool, u: Term, v: Term) -> Literal {
    crate::frame::spec::le_literal(sig, pos, u, v)
}

/// Replaces every ground store definition `s = store(t, i, a)` by the three
/// clauses fixing `select(s, i)` and framing the other indices.
pub fn eliminate_store(sig: &Signature, clauses: &[Clause]) -> Result<Vec<Clause>> {
    let store_ids: BTreeSet<FuncId> = sig
        .funcs()
        .filter(|(_, d)| d.name == "store" || d.name.starts_with("store'"))
        .map(|(id, _)| id)
        .collect();
    if store_ids.is_empty() {
        return Ok(clauses.to_vec());
    }
    let mut out = Vec::new();
    let mut fresh = 0usize;
    for clause in clauses {
        let uses_store = clause.literals().iter().any(|l| {
            [&l.lhs, &l.rhs]
                .iter()
                .any(|t| t.subterms().iter().any(|s| matches!(s, Term::App(f, _) if store_ids.contains(f))))
        });
        if !uses_store {
            out.push(clause.clone());
            continue;
        }
        // Only the shape `s = store(t, i, a)` as a ground unit clause is
        // supported; the user must name intermediate arrays.
        if clause.len() != 1 {
            return Err(Error::Unsupported(format!(
                "store occurs outside a unit definition: {}",
                clause.display(sig)
            )));
        }
        let lit = &clause.literals()[0];
        if !lit.pos || !lit.is_ground() {
            return Err(Error::Unsupported(format!(
                "store definition must be a positive ground equation: {}",
                lit.display(sig)
            )));
        }
        let (s, store_app) = match (&lit.lhs, &lit.rhs) {
            (l, r @ Term::App(f, _)) if store_ids.contains(f) => (l.clone(), r.clone()),
            (l @ Term::App(f, _), r) if store_ids.contains(f) => (r.clone(), l.clone()),
            _ => {
                return Err(Error::Unsupported(format!(
                    "store definition must equate an array with a store: {}",
                    lit.display(sig)
                )))
            }
        };
        let Term::App(_, store_args) = &store_app else { unreachable!() };
        let (t, i, a) = (store_args[0].clone(), store_args[1].clone(), store_args[2].clone());
        for arg in [&s, &t, &i, &a] {
            if arg.subterms().iter().any(|u| matches!(u, Term::App(f, _) if store_ids.contains(f))) {
                return Err(Error::Unsupported(
                    "nested store: name the intermediate array".into(),
                ));
            }
        }
        let arr_sort = s.sort(sig);
        let idx_sort = i.sort(sig);
        let select = sig
            .funcs()
            .find(|(_, d)| {
                d.name.starts_with("select") && d.args.first() == Some(&arr_sort) && d.args.get(1) == Some(&idx_sort)
            })
            .map(|(id, _)| id)
            .ok_or_else(|| Error::Unsupported("store without a matching select".into()))?;
        let sel = |arr: Term, idx: Term| Term::App(select, vec![arr, idx]);
        let z = Term::var(format!("_z{fresh}"), idx_sort);
        fresh += 1;
        let plus = sig.arith_func(idx_sort, FuncKind::Plus).expect("+");
        let minus = sig.arith_func(idx_sort, FuncKind::Minus).expect("-");
        out.push(Clause::new(vec![Literal::eq(sel(s.clone(), i.clone()), a)]));
        out.push(Clause::new(vec![
            le_lit(sig, false, Term::App(plus, vec![i.clone(), Term::Num(1, idx_sort)]), z.clone()),
            Literal::eq(sel(s.clone(), z.clone()), sel(t.clone(), z.clone())),
        ]));
        out.push(Clause::new(vec![
            le_lit(sig, false, z.clone(), Term::App(minus, vec![i.clone(), Term::Num(1, idx_sort)])),
            Literal::eq(sel(s.clone(), z.clone()), sel(t, z)),
        ]));
    }
    Ok(out)
}

/// Evaluates a ground literal syntactically where the theory fixes its truth
/// value: closed arithmetic comparisons, congruence on numerals, reflexive
/// comparisons, membership atoms, and (dis)equations over free-algebra
/// sorts.
pub fn eval_ground_literal(
    sig: &Signature,
    lit: &Literal,
    herbrand_sorts: &BTreeSet<SortId>,
    membership: &[(FuncId, crate::inst::automata::TreeAutomaton)],
) -> Option<bool> {
    if !lit.is_ground() {
        return None;
    }
    if let Term::App(f, args) = &lit.lhs {
        if let Some((_, auto)) = membership.iter().find(|(p, _)| p == f) {
            return Some(auto.accepts(&args[0]) == lit.pos);
        }
        let kind = sig.func(*f).kind;
        match kind {
            FuncKind::Le | FuncKind::Lt | FuncKind::EqMod(_) => {
                let a = normalize_linear(sig, &args[0]).ok()?;
                let b = normalize_linear(sig, &args[1]).ok()?;
                let d = a.sub(&b);
                let atom = match kind {
                    FuncKind::Le => {
                        if d.is_constant() {
                            d.offset <= 0
                        } else {
                            return None;
                        }
                    }
                    FuncKind::Lt => {
                        if d.is_constant() {
                            d.offset < 0
                        } else {
                            return None;
                        }
                    }
                    FuncKind::EqMod(k) => {
                        if d.is_constant() {
                            d.offset.rem_euclid(k as i64) == 0
                        } else {
                            return None;
                        }
                    }
                    _ => unreachable!(),
                };
                return Some(atom == lit.pos);
            }
            _ => {}
        }
    }
    let sort = lit.lhs.sort(sig);
    if sig.sort(sort).integer {
        let a = normalize_linear(sig, &lit.lhs).ok()?;
        let b = normalize_linear(sig, &lit.rhs).ok()?;
        let d = a.sub(&b);
        if d.is_constant() {
            return Some((d.offset == 0) == lit.pos);
        }
        return None;
    }
    if lit.lhs == lit.rhs && !sig.sort(sort).is_bool {
        return Some(lit.pos);
    }
    if herbrand_sorts.contains(&sort) {
        // Free constructor algebra: distinct ground terms denote distinct
        // values.
        return Some((lit.lhs == lit.rhs) == lit.pos);
    }
    None
}

/// Merges every primed integer copy back into the outermost integer sort and
/// collapses recorded shared-constant links. Sound on ground problems.
pub fn unprime(
    sig: &Signature,
    clauses: &[Clause],
    links: &[(FuncId, FuncId)],
) -> Result<(Signature, Vec<Clause>)> {
    let primary = sig
        .sorts()
        .filter(|(_, d)| d.integer)
        .min_by_key(|(_, d)| d.level)
        .map(|(id, _)| id);
    let Some(primary) = primary else {
        return Ok((sig.clone(), clauses.to_vec()));
    };
    let mut out = Signature::new();
    let mut sort_map: BTreeMap<SortId, SortId> = BTreeMap::new();
    let leaf = sig.leaf_level();
    // Primary integer sort first, at level 0.
    let new_primary = out.add_sort(&sig.sort(primary).name, SortKind::Base, 0, true)?;
    sort_map.insert(primary, new_primary);
    for (id, d) in sig.sorts() {
        if id == primary || d.is_bool {
            continue;
        }
        if d.integer {
            sort_map.insert(id, new_primary);
        } else {
            let level = if d.level == 0 { 0 } else { leaf.max(1) };
            let ns = out.add_sort(&d.name, d.kind, level, false)?;
            sort_map.insert(id, ns);
        }
    }
    out.install_arith(new_primary, &[])?;
    out.true_const(0);
    let link_map: BTreeMap<FuncId, FuncId> = links.iter().map(|(idx, elem)| (*elem, *idx)).collect();
    let mut func_map: BTreeMap<FuncId, FuncId> = BTreeMap::new();
    for (id, d) in sig.funcs() {
        if link_map.contains_key(&id) {
            continue; // merged into its index copy below
        }
        let new_id = match d.kind {
            FuncKind::True => out.true_const(0),
            FuncKind::Le => out.arith_func(new_primary, FuncKind::Le).unwrap(),
            FuncKind::Lt => out.arith_func(new_primary, FuncKind::Lt).unwrap(),
            FuncKind::Plus => out.arith_func(new_primary, FuncKind::Plus).unwrap(),
            FuncKind::Minus => out.arith_func(new_primary, FuncKind::Minus).unwrap(),
            FuncKind::Succ => out.arith_func(new_primary, FuncKind::Succ).unwrap(),
            FuncKind::Pred => out.arith_func(new_primary, FuncKind::Pred).unwrap(),
            FuncKind::EqMod(k) => out.eqmod(new_primary, k)?,
            _ => {
                let args = d.args.iter().map(|s| map_sort(&sort_map, *s, &out, sig)).collect();
                let result = map_sort(&sort_map, d.result, &out, sig);
                out.add_func_inner(&d.name, args, result, d.kind)?
            }
        };
        func_map.insert(id, new_id);
    }
    for (elem, idx) in &link_map {
        let mapped = *func_map
            .get(idx)
            .ok_or_else(|| Error::Config("copy link to unknown constant".into()))?;
        func_map.insert(*elem, mapped);
    }
    let rewritten = clauses
        .iter()
        .map(|c| {
            c.literals()
                .iter()
                .map(|l| {
                    Literal::new(
                        l.pos,
                        map_term(&func_map, &sort_map, &l.lhs, &out, sig),
                        map_term(&func_map, &sort_map, &l.rhs, &out, sig),
                    )
                })
                .collect::<Clause>()
        })
        .collect();
    Ok((out, rewritten))
}

fn map_sort(map: &BTreeMap<SortId, SortId>, s: SortId, new_sig: &Signature, old_sig: &Signature) -> SortId {
    if let Some(n) = map.get(&s) {
        return *n;
    }
    // Boolean sorts: same level bucket collapses to bool at level 0 for
    // merged arithmetic, otherwise keep the leaf-level bool.
    let d = old_sig.sort(s);
    debug_assert!(d.is_bool);
    new_sig
        .sort_by_name("bool")
        .unwrap_or_else(|| panic!("bool sort installed"))
}

fn map_term(
    fmap: &BTreeMap<FuncId, FuncId>,
    smap: &BTreeMap<SortId, SortId>,
    t: &Term,
    new_sig: &Signature,
    old_sig: &Signature,
) -> Term {
    match t {
        Term::Var(v) => Term::var(v.name.clone(), map_sort(smap, v.sort, new_sig, old_sig)),
        Term::Num(n, s) => Term::Num(*n, map_sort(smap, *s, new_sig, old_sig)),
        Term::App(f, args) => Term::App(
            fmap[f],
            args.iter().map(|a| map_term(fmap, smap, a, new_sig, old_sig)).collect(),
        ),
    }
}
