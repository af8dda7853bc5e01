//! Terms, literals and clauses over a multi-sorted signature.

use std::collections::BTreeSet;
use std::fmt;

use crate::core::signature::{FuncId, FuncKind, Signature, SortId};
use crate::error::{Error, Result};

/// A variable carries its sort inline.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub sort: SortId,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: SortId) -> Self {
        Var { name: name.into(), sort }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    App(FuncId, Vec<Term>),
    /// Integer numeral of a given integer sort.
    Num(i64, SortId),
}

impl Term {
    pub fn var(name: impl Into<String>, sort: SortId) -> Self {
        Term::Var(Var::new(name, sort))
    }

    pub fn cst(f: FuncId) -> Self {
        Term::App(f, vec![])
    }

    pub fn sort(&self, sig: &Signature) -> SortId {
        match self {
            Term::Var(v) => v.sort,
            Term::App(f, _) => sig.func(*f).result,
            Term::Num(_, s) => *s,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
            Term::Num(..) => true,
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => {
                for a in args {
                    a.vars(out);
                }
            }
            Term::Num(..) => {}
        }
    }

    /// Depth-first iteration over all subterms including the term itself.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            if let Term::App(_, args) = out[i] {
                out.extend(args.iter());
            }
            i += 1;
        }
        out
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|t| t.contains_var(v)),
            Term::Num(..) => false,
        }
    }

    /// Sanity-checks argument sorts against the signature.
    pub fn sort_check(&self, sig: &Signature) -> Result<()> {
        match self {
            Term::Var(_) | Term::Num(..) => Ok(()),
            Term::App(f, args) => {
                let decl = sig.func(*f);
                if decl.args.len() != args.len() {
                    return Err(Error::Sort(format!(
                        "`{}` expects {} arguments, got {}",
                        decl.name,
                        decl.args.len(),
                        args.len()
                    )));
                }
                for (expected, arg) in decl.args.iter().zip(args) {
                    let got = arg.sort(sig);
                    if got != *expected {
                        return Err(Error::Sort(format!(
                            "argument of `{}` has sort `{}`, expected `{}`",
                            decl.name,
                            sig.sort(got).name,
                            sig.sort(*expected).name
                        )));
                    }
                    arg.sort_check(sig)?;
                }
                Ok(())
            }
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(v) => write!(f, "{}", v.name),
            Term::Num(n, _) => write!(f, "{n}"),
            Term::App(func, args) => {
                let name = &self.sig.func(*func).name;
                if args.is_empty() {
                    write!(f, "{name}")
                } else {
                    write!(f, "({name}")?;
                    for a in args {
                        write!(f, " {}", a.display(self.sig))?;
                    }
                    write!(f, ")")
                }
            }
        }
    }
}

/// A literal is a signed equation; predicate atoms are stored as
/// `p(t...) = true` with the boolean constant of the owning level.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub pos: bool,
    pub lhs: Term,
    pub rhs: Term,
}

impl Literal {
    pub fn new(pos: bool, lhs: Term, rhs: Term) -> Self {
        Literal { pos, lhs, rhs }
    }

    pub fn eq(lhs: Term, rhs: Term) -> Self {
        Literal::new(true, lhs, rhs)
    }

    pub fn neq(lhs: Term, rhs: Term) -> Self {
        Literal::new(false, lhs, rhs)
    }

    pub fn negated(&self) -> Self {
        Literal::new(!self.pos, self.lhs.clone(), self.rhs.clone())
    }

    pub fn is_ground(&self) -> bool {
        self.lhs.is_ground() && self.rhs.is_ground()
    }

    pub fn vars(&self, out: &mut BTreeSet<Var>) {
        self.lhs.vars(out);
        self.rhs.vars(out);
    }

    /// True when the right side is a boolean `true` constant, i.e. the
    /// literal is predicate sugar rather than an equational atom.
    pub fn is_pred_sugar(&self, sig: &Signature) -> bool {
        matches!(&self.rhs, Term::App(f, args) if args.is_empty() && sig.func(*f).kind == FuncKind::True)
    }

    /// The atom `p(t...)` when this literal is predicate sugar.
    pub fn pred_atom(&self, sig: &Signature) -> Option<(&Term, bool)> {
        if self.is_pred_sugar(sig) {
            Some((&self.lhs, self.pos))
        } else {
            None
        }
    }

    pub fn sort_check(&self, sig: &Signature) -> Result<()> {
        self.lhs.sort_check(sig)?;
        self.rhs.sort_check(sig)?;
        let (ls, rs) = (self.lhs.sort(sig), self.rhs.sort(sig));
        if ls != rs {
            return Err(Error::Sort(format!(
                "equation between sorts `{}` and `{}`",
                sig.sort(ls).name,
                sig.sort(rs).name
            )));
        }
        Ok(())
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> LiteralDisplay<'a> {
        LiteralDisplay { lit: self, sig }
    }
}

pub struct LiteralDisplay<'a> {
    lit: &'a Literal,
    sig: &'a Signature,
}

impl fmt::Display for LiteralDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lit.is_pred_sugar(self.sig) {
            if self.lit.pos {
                write!(f, "{}", self.lit.lhs.display(self.sig))
            } else {
                write!(f, "(not {})", self.lit.lhs.display(self.sig))
            }
        } else {
            let op = if self.lit.pos { "=" } else { "!=" };
            write!(
                f,
                "({op} {} {})",
                self.lit.lhs.display(self.sig),
                self.lit.rhs.display(self.sig)
            )
        }
    }
}

/// A clause is a finite set of literals; the literal list is kept sorted and
/// deduplicated so clause equality is set equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    pub fn new(mut lits: Vec<Literal>) -> Self {
        lits.sort();
        lits.dedup();
        Clause { lits }
    }

    pub fn empty() -> Self {
        Clause { lits: vec![] }
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn is_ground(&self) -> bool {
        self.lits.iter().all(Literal::is_ground)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for l in &self.lits {
            l.vars(&mut out);
        }
        out
    }

    pub fn contains(&self, lit: &Literal) -> bool {
        self.lits.binary_search(lit).is_ok()
    }

    /// True when every literal of `self` occurs in `other`.
    pub fn subset_of(&self, other: &Clause) -> bool {
        self.lits.iter().all(|l| other.contains(l))
    }

    pub fn union(&self, other: &Clause) -> Clause {
        let mut lits = self.lits.clone();
        lits.extend(other.lits.iter().cloned());
        Clause::new(lits)
    }

    pub fn sort_check(&self, sig: &Signature) -> Result<()> {
        for l in &self.lits {
            l.sort_check(sig)?;
        }
        Ok(())
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> ClauseDisplay<'a> {
        ClauseDisplay { clause: self, sig }
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        Clause::new(iter.into_iter().collect())
    }
}

pub struct ClauseDisplay<'a> {
    clause: &'a Clause,
    sig: &'a Signature,
}

impl fmt::Display for ClauseDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(or")?;
        for l in self.clause.literals() {
            write!(f, " {}", l.display(self.sig))?;
        }
        write!(f, ")")
    }
}
