//! Problem printer: renders a problem back to the surface syntax. Printing
//! then parsing yields the same problem up to whitespace.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::core::{Clause, FuncKind, Literal, Signature, SortKind, Term, Var};
use crate::frame::spec::{BaseScheme, LeafScheme, Problem, TheoryStack};
use crate::inst::automata::TreeAutomaton;

pub fn print_problem(problem: &Problem) -> String {
    let sig = &problem.sig;
    let mut out = String::from("(problem\n  (sorts");
    for (_, d) in sig.sorts() {
        if d.is_bool {
            continue;
        }
        let role = match d.kind {
            SortKind::Base => "base",
            SortKind::Target => "target",
        };
        write!(out, " ({} {role}", d.name).unwrap();
        if d.kind == SortKind::Base {
            write!(out, " {}", d.level).unwrap();
        }
        if d.real {
            out.push_str(" real");
        }
        out.push(')');
    }
    out.push_str(")\n  (functions");
    let membership_preds: BTreeSet<_> = problem
        .stack
        .levels
        .iter()
        .filter_map(|lv| match &lv.scheme {
            BaseScheme::Membership { predicates, .. } => {
                Some(predicates.iter().map(|(p, _)| *p).collect::<Vec<_>>())
            }
            _ => None,
        })
        .flatten()
        .collect();
    for (id, d) in sig.funcs() {
        if d.kind != FuncKind::User || membership_preds.contains(&id) {
            continue;
        }
        let args: Vec<&str> = d.args.iter().map(|s| sig.sort(*s).name.as_str()).collect();
        let result = sort_surface_name(sig, d.result);
        write!(out, " ({} ({}) {result})", d.name, args.join(" ")).unwrap();
    }
    out.push_str(")\n");
    // Variables, collected from the clauses.
    let mut vars: BTreeSet<Var> = BTreeSet::new();
    for c in &problem.clauses {
        vars.extend(c.vars());
    }
    if !vars.is_empty() {
        out.push_str("  (vars");
        for v in &vars {
            write!(out, " ({} {})", v.name, sig.sort(v.sort).name).unwrap();
        }
        out.push_str(")\n");
    }
    out.push_str("  ");
    print_theory(&mut out, sig, &problem.stack);
    out.push_str("\n  (clauses\n");
    for c in &problem.clauses {
        out.push_str("    ");
        out.push_str(&print_clause(sig, c));
        out.push('\n');
    }
    out.push_str("  ))\n");
    out
}

fn sort_surface_name(sig: &Signature, s: crate::core::SortId) -> String {
    let d = sig.sort(s);
    if d.is_bool {
        "bool".into()
    } else {
        d.name.clone()
    }
}

fn print_theory(out: &mut String, sig: &Signature, stack: &TheoryStack) {
    out.push_str("(theory ");
    fn base_text(sig: &Signature, scheme: &BaseScheme) -> String {
        match scheme {
            BaseScheme::Presburger { modulus_cap } => {
                if *modulus_cap == 64 {
                    "(base presburger)".into()
                } else {
                    format!("(base presburger (modulus-cap {modulus_cap}))")
                }
            }
            BaseScheme::Membership { constructors, predicates, .. } => {
                let mut s = String::from("(base membership (constructors");
                for c in constructors {
                    write!(s, " {}", sig.func(*c).name).unwrap();
                }
                s.push(')');
                if !predicates.is_empty() {
                    s.push_str(" (predicates");
                    for (p, auto) in predicates {
                        s.push(' ');
                        s.push_str(&print_automaton(sig, &sig.func(*p).name, auto));
                    }
                    s.push(')');
                }
                s.push(')');
                s
            }
        }
    }
    fn leaf_text(leaf: LeafScheme) -> &'static str {
        match leaf {
            LeafScheme::Fol => "(target fol)",
            LeafScheme::GroundArrays => "(target ground-arrays)",
        }
    }
    // Innermost first, then wrap.
    let mut text = leaf_text(stack.leaf).to_string();
    for lv in stack.levels.iter().skip(1).rev() {
        text = format!("(target (nested {} {text}))", base_text(sig, &lv.scheme));
    }
    write!(out, "{} {text})", base_text(sig, &stack.levels[0].scheme)).unwrap();
}

fn print_automaton(sig: &Signature, name: &str, auto: &TreeAutomaton) -> String {
    let mut s = format!("({name} (states");
    for q in 0..auto.num_states {
        write!(s, " q{q}").unwrap();
    }
    s.push_str(") (final");
    for q in &auto.final_states {
        write!(s, " q{q}").unwrap();
    }
    s.push_str(") (rules");
    for (f, args, res) in &auto.transitions {
        let arg_names: Vec<String> = args.iter().map(|q| format!("q{q}")).collect();
        write!(s, " ({} ({}) q{res})", sig.func(*f).name, arg_names.join(" ")).unwrap();
    }
    s.push_str("))");
    s
}

pub fn print_term(sig: &Signature, t: &Term) -> String {
    match t {
        Term::Var(v) => v.name.clone(),
        Term::Num(n, _) => n.to_string(),
        Term::App(f, args) => {
            let d = sig.func(*f);
            let head = match d.kind {
                FuncKind::Plus => plain_op("+", &d.name),
                FuncKind::Minus => plain_op("-", &d.name),
                FuncKind::Succ => plain_op("succ", &d.name),
                FuncKind::Pred => plain_op("pred", &d.name),
                _ => d.name.clone(),
            };
            if args.is_empty() {
                head
            } else {
                let parts: Vec<String> = args.iter().map(|a| print_term(sig, a)).collect();
                format!("({head} {})", parts.join(" "))
            }
        }
    }
}

fn plain_op(base: &str, name: &str) -> String {
    // keep the primes: +'' stays +'' so the parser re-resolves the level
    let primes = name.trim_start_matches(base);
    format!("{base}{primes}")
}

pub fn print_literal(sig: &Signature, lit: &Literal) -> String {
    let body = if lit.is_pred_sugar(sig) {
        if let Term::App(f, args) = &lit.lhs {
            let d = sig.func(*f);
            match d.kind {
                FuncKind::Le | FuncKind::Lt => {
                    let op = if d.kind == FuncKind::Le { "<=" } else { "<" };
                    let primes = "'".repeat(sig.level(d.args[0]) as usize);
                    format!(
                        "({op}{primes} {} {})",
                        print_term(sig, &args[0]),
                        print_term(sig, &args[1])
                    )
                }
                FuncKind::EqMod(k) => format!(
                    "(eqmod {k} {} {})",
                    print_term(sig, &args[0]),
                    print_term(sig, &args[1])
                ),
                _ => print_term(sig, &lit.lhs),
            }
        } else {
            print_term(sig, &lit.lhs)
        }
    } else {
        format!("(= {} {})", print_term(sig, &lit.lhs), print_term(sig, &lit.rhs))
    };
    if lit.pos {
        body
    } else {
        format!("(not {body})")
    }
}

pub fn print_clause(sig: &Signature, c: &Clause) -> String {
    let lits: Vec<String> = c.literals().iter().map(|l| print_literal(sig, l)).collect();
    format!("(or {})", lits.join(" "))
}
