//! Canonical linear forms for integer-sorted terms.
//!
//! A linear form is an integer offset plus a multiset of opaque atoms
//! (symbolic constants, reserved constants, or ground applications whose head
//! is not an arithmetic operation). Two integer terms are considered
//! equivalent exactly when their forms are equal.

use std::collections::BTreeMap;

use crate::core::{FuncKind, Literal, Signature, SortId, Term};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct LinearForm {
    pub offset: i64,
    pub coeffs: BTreeMap<Term, i64>,
}

impl LinearForm {
    pub fn constant(n: i64) -> Self {
        LinearForm { offset: n, coeffs: BTreeMap::new() }
    }

    pub fn atom(t: Term) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(t, 1);
        LinearForm { offset: 0, coeffs }
    }

    pub fn add(&self, other: &LinearForm) -> LinearForm {
        let mut out = self.clone();
        out.offset += other.offset;
        for (t, c) in &other.coeffs {
            let e = out.coeffs.entry(t.clone()).or_insert(0);
            *e += c;
            if *e == 0 {
                out.coeffs.remove(t);
            }
        }
        out
    }

    pub fn negate(&self) -> LinearForm {
        LinearForm {
            offset: -self.offset,
            coeffs: self.coeffs.iter().map(|(t, c)| (t.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &LinearForm) -> LinearForm {
        self.add(&other.negate())
    }

    pub fn shift(&self, n: i64) -> LinearForm {
        let mut out = self.clone();
        out.offset += n;
        out
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.offset == 0 && self.coeffs.is_empty()
    }

    /// Splits into the positively- and negatively-signed halves, both with
    /// non-negative entries, such that `self = pos - neg`.
    pub fn split(&self) -> (LinearForm, LinearForm) {
        let mut pos = LinearForm::default();
        let mut neg = LinearForm::default();
        if self.offset >= 0 {
            pos.offset = self.offset;
        } else {
            neg.offset = -self.offset;
        }
        for (t, c) in &self.coeffs {
            if *c > 0 {
                pos.coeffs.insert(t.clone(), *c);
            } else {
                neg.coeffs.insert(t.clone(), -*c);
            }
        }
        (pos, neg)
    }

    /// Rebuilds a term over the arithmetic vocabulary of `sort`. The result
    /// is deterministic: atoms in order, positive offset appended, negative
    /// parts subtracted.
    pub fn render(&self, sig: &Signature, sort: SortId) -> Term {
        if self.coeffs.is_empty() {
            return Term::Num(self.offset, sort);
        }
        let plus = sig.arith_func(sort, FuncKind::Plus).expect("arith sort has +");
        let minus = sig.arith_func(sort, FuncKind::Minus).expect("arith sort has -");
        let mut acc: Option<Term> = None;
        for (t, c) in &self.coeffs {
            if *c <= 0 {
                continue;
            }
            for _ in 0..*c {
                acc = Some(match acc {
                    None => t.clone(),
                    Some(prev) => Term::App(plus, vec![prev, t.clone()]),
                });
            }
        }
        if self.offset > 0 {
            let n = Term::Num(self.offset, sort);
            acc = Some(match acc {
                None => n,
                Some(prev) => Term::App(plus, vec![prev, n]),
            });
        }
        let mut acc = acc.unwrap_or(Term::Num(0, sort));
        for (t, c) in &self.coeffs {
            if *c >= 0 {
                continue;
            }
            for _ in 0..(-*c) {
                acc = Term::App(minus, vec![acc, t.clone()]);
            }
        }
        if self.offset < 0 {
            acc = Term::App(minus, vec![acc, Term::Num(-self.offset, sort)]);
        }
        acc
    }
}

/// Canonical linear form of an integer-sorted term. Heads other than the
/// builtin arithmetic operations become opaque atoms (their arguments are
/// left untouched), so `select(t, dia_nat)` counts as a single symbolic
/// constant.
pub fn normalize_linear(sig: &Signature, term: &Term) -> Result<LinearForm> {
    let sort = term.sort(sig);
    if !sig.sort(sort).integer {
        return Err(Error::Unsupported(format!(
            "`{}` is not an integer-sorted term",
            term.display(sig)
        )));
    }
    Ok(linear_form(sig, term))
}

fn linear_form(sig: &Signature, term: &Term) -> LinearForm {
    match term {
        Term::Num(n, _) => LinearForm::constant(*n),
        Term::Var(_) => LinearForm::atom(term.clone()),
        Term::App(f, args) => match sig.func(*f).kind {
            FuncKind::Plus => linear_form(sig, &args[0]).add(&linear_form(sig, &args[1])),
            FuncKind::Minus => linear_form(sig, &args[0]).sub(&linear_form(sig, &args[1])),
            FuncKind::Succ => linear_form(sig, &args[0]).shift(1),
            FuncKind::Pred => linear_form(sig, &args[0]).shift(-1),
            _ => LinearForm::atom(term.clone()),
        },
    }
}

/// Canonicalizes an integer term: linear form, rendered back.
pub fn canon_int_term(sig: &Signature, term: &Term) -> Term {
    let sort = term.sort(sig);
    if !sig.sort(sort).integer || !matches!(term, Term::App(..) | Term::Num(..)) {
        return term.clone();
    }
    match term {
        Term::App(f, _) if sig.func(*f).kind.is_arith_op() => {
            linear_form(sig, term).render(sig, sort)
        }
        Term::Num(..) => term.clone(),
        _ => term.clone(),
    }
}

/// Canonicalizes arithmetic comparison atoms: `u <= v` is rewritten so that
/// each side is a non-negative linear combination and no atom occurs on both
/// sides. Equations and congruences between integer terms are ordered
/// deterministically. Non-arithmetic literals pass through with their
/// integer-sorted arguments canonicalized.
pub fn canon_literal(sig: &Signature, lit: &Literal) -> Literal {
    if let Term::App(f, args) = &lit.lhs {
        let kind = sig.func(*f).kind;
        match kind {
            FuncKind::Le | FuncKind::Lt => {
                let d = linear_form(sig, &args[0]).sub(&linear_form(sig, &args[1]));
                let (pos, neg) = d.split();
                let sort = args[0].sort(sig);
                return Literal::new(
                    lit.pos,
                    Term::App(*f, vec![pos.render(sig, sort), neg.render(sig, sort)]),
                    lit.rhs.clone(),
                );
            }
            FuncKind::EqMod(_) => {
                let sort = args[0].sort(sig);
                let a = linear_form(sig, &args[0]);
                let b = linear_form(sig, &args[1]);
                let (x, y) = if a <= b { (a, b) } else { (b, a) };
                return Literal::new(
                    lit.pos,
                    Term::App(*f, vec![x.render(sig, sort), y.render(sig, sort)]),
                    lit.rhs.clone(),
                );
            }
            _ => {}
        }
    }
    // Equations between integer terms: difference-normalized, ordered sides.
    let ls = lit.lhs.sort(sig);
    if sig.sort(ls).integer {
        let d = linear_form(sig, &lit.lhs).sub(&linear_form(sig, &lit.rhs));
        let (pos, neg) = d.split();
        let (x, y) = if pos <= neg { (pos, neg) } else { (neg, pos) };
        return Literal::new(lit.pos, x.render(sig, ls), y.render(sig, ls));
    }
    let map_args = |t: &Term| -> Term {
        match t {
            Term::App(f, args) => {
                Term::App(*f, args.iter().map(|a| canon_int_term_deep(sig, a)).collect())
            }
            _ => t.clone(),
        }
    };
    Literal::new(lit.pos, map_args(&lit.lhs), map_args(&lit.rhs))
}

fn canon_int_term_deep(sig: &Signature, t: &Term) -> Term {
    let sort = t.sort(sig);
    if sig.sort(sort).integer {
        return linear_form(sig, t).render(sig, sort);
    }
    match t {
        Term::App(f, args) => {
            Term::App(*f, args.iter().map(|a| canon_int_term_deep(sig, a)).collect())
        }
        _ => t.clone(),
    }
}
