//! Quantifier-free SMT-LIB 2 script emission for ground problems.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::core::{FuncKind, Literal, Signature, SortId, Term};
use crate::error::{Error, Result};

use super::GroundProblem;

fn smt_symbol(name: &str) -> String {
    let simple = name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple && !name.is_empty() && !name.chars().next().unwrap().is_ascii_digit() {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

fn sort_name(sig: &Signature, s: SortId) -> String {
    let d = sig.sort(s);
    if d.integer {
        "Int".into()
    } else if d.real {
        "Real".into()
    } else if d.is_bool {
        "Bool".into()
    } else {
        smt_symbol(&d.name)
    }
}

fn emit_term(sig: &Signature, t: &Term, out: &mut String) -> Result<()> {
    match t {
        Term::Var(v) => Err(Error::Contract(format!("variable `{}` in emitted term", v.name))),
        Term::Num(n, _) => {
            if *n < 0 {
                write!(out, "(- {})", -n).unwrap();
            } else {
                write!(out, "{n}").unwrap();
            }
            Ok(())
        }
        Term::App(f, args) => {
            let decl = sig.func(*f);
            let head = match decl.kind {
                FuncKind::Le => "<=".to_string(),
                FuncKind::Lt => "<".to_string(),
                FuncKind::Plus => "+".to_string(),
                FuncKind::Minus => "-".to_string(),
                FuncKind::Succ | FuncKind::Pred => String::new(),
                FuncKind::EqMod(_) => String::new(),
                FuncKind::True => "true".to_string(),
                _ => smt_symbol(&decl.name),
            };
            match decl.kind {
                FuncKind::Succ => {
                    out.push_str("(+ ");
                    emit_term(sig, &args[0], out)?;
                    out.push_str(" 1)");
                }
                FuncKind::Pred => {
                    out.push_str("(- ");
                    emit_term(sig, &args[0], out)?;
                    out.push_str(" 1)");
                }
                FuncKind::EqMod(k) => {
                    // x eqmod_k t becomes (= (mod (- x t) k) 0).
                    out.push_str("(= (mod (- ");
                    emit_term(sig, &args[0], out)?;
                    out.push(' ');
                    emit_term(sig, &args[1], out)?;
                    write!(out, ") {k}) 0)").unwrap();
                }
                _ if args.is_empty() => out.push_str(&head),
                _ => {
                    write!(out, "({head}").unwrap();
                    for a in args {
                        out.push(' ');
                        emit_term(sig, a, out)?;
                    }
                    out.push(')');
                }
            }
            Ok(())
        }
    }
}

fn emit_literal(sig: &Signature, lit: &Literal, out: &mut String) -> Result<()> {
    let body = {
        let mut b = String::new();
        if lit.is_pred_sugar(sig) {
            emit_term(sig, &lit.lhs, &mut b)?;
        } else {
            b.push_str("(= ");
            emit_term(sig, &lit.lhs, &mut b)?;
            b.push(' ');
            emit_term(sig, &lit.rhs, &mut b)?;
            b.push(')');
        }
        b
    };
    if lit.pos {
        out.push_str(&body);
    } else {
        write!(out, "(not {body})").unwrap();
    }
    Ok(())
}

/// Emits a quantifier-free script: sort and function declarations in
/// deterministic name order, one assertion per clause, upper-bound axioms
/// included, and a distinctness assertion per free-algebra sort. Byte
/// identical across runs for identical problems.
pub fn emit_smtlib(prob: &GroundProblem) -> Result<String> {
    let sig = &prob.sig;
    if !prob.membership.is_empty() {
        // Membership atoms are decidable syntactically; they must have been
        // evaluated away before emission.
        for clause in prob.all_clauses() {
            for lit in clause.literals() {
                if let Term::App(f, _) = &lit.lhs {
                    if prob.membership.iter().any(|(p, _)| p == f) {
                        return Err(Error::Unsupported(
                            "membership atom survived preprocessing".into(),
                        ));
                    }
                }
            }
        }
    }
    let mut used_sorts: BTreeSet<SortId> = BTreeSet::new();
    let mut used_funcs: BTreeSet<crate::core::FuncId> = BTreeSet::new();
    let mut herbrand_terms: BTreeSet<Term> = BTreeSet::new();
    let mut has_real = false;
    for clause in prob.all_clauses() {
        for lit in clause.literals() {
            for side in [&lit.lhs, &lit.rhs] {
                for sub in side.subterms() {
                    let s = sub.sort(sig);
                    has_real |= sig.sort(s).real;
                    used_sorts.insert(s);
                    if prob.herbrand_sorts.contains(&s) {
                        herbrand_terms.insert((*sub).clone());
                    }
                    if let Term::App(f, _) = sub {
                        let kind = sig.func(*f).kind;
                        if !kind.is_arith_op() && !kind.is_arith_pred() && kind != FuncKind::True {
                            used_funcs.insert(*f);
                        }
                    }
                }
            }
        }
    }
    let mut out = String::new();
    let logic = if has_real { "QF_UFLIRA" } else { "QF_UFLIA" };
    writeln!(out, "(set-logic {logic})").unwrap();
    writeln!(out, "(set-option :produce-models true)").unwrap();
    // Free sorts, by name.
    let mut free_sorts: Vec<SortId> = used_sorts
        .iter()
        .copied()
        .filter(|s| {
            let d = sig.sort(*s);
            !d.integer && !d.is_bool && !d.real
        })
        .collect();
    free_sorts.sort_by_key(|s| sig.sort(*s).name.clone());
    for s in &free_sorts {
        writeln!(out, "(declare-sort {} 0)", smt_symbol(&sig.sort(*s).name)).unwrap();
    }
    let mut funcs: Vec<_> = used_funcs.into_iter().collect();
    funcs.sort_by_key(|f| sig.func(*f).name.clone());
    for f in funcs {
        let d = sig.func(f);
        let args: Vec<String> = d.args.iter().map(|a| sort_name(sig, *a)).collect();
        writeln!(
            out,
            "(declare-fun {} ({}) {})",
            smt_symbol(&d.name),
            args.join(" "),
            sort_name(sig, d.result)
        )
        .unwrap();
    }
    // Free constructor algebras: distinct ground terms denote distinct
    // values.
    if herbrand_terms.len() > 1 {
        out.push_str("(assert (distinct");
        for t in &herbrand_terms {
            out.push(' ');
            emit_term(sig, t, &mut out)?;
        }
        out.push_str("))\n");
    }
    for clause in prob.all_clauses() {
        out.push_str("(assert ");
        match clause.literals() {
            [] => out.push_str("false"),
            [single] => emit_literal(sig, single, &mut out)?,
            lits => {
                out.push_str("(or");
                for lit in lits {
                    out.push(' ');
                    emit_literal(sig, lit, &mut out)?;
                }
                out.push(')');
            }
        }
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n(get-model)\n");
    Ok(out)
}
