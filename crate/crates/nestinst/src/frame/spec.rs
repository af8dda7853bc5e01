//! Executable theory specifications: the level stack, clause classification
//! against the hierarchic fragment, and base/target decomposition.

use std::collections::BTreeSet;

use crate::core::{Clause, FuncKind, Literal, Signature, SortId, SortKind, Term, Var};
use crate::error::{Error, Result};
use crate::inst::automata::TreeAutomaton;

/// Which base-complete scheme instantiates a base level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseScheme {
    Presburger {
        /// Upper bound on the least common multiple of congruence moduli.
        modulus_cap: u64,
    },
    Membership {
        /// Free constructors of the term-algebra sort.
        constructors: Vec<crate::core::FuncId>,
        /// Predicate table: each monadic predicate with its denotation.
        predicates: Vec<(crate::core::FuncId, TreeAutomaton)>,
        /// Cap on the predicate count (subset enumeration is exponential).
        predicate_cap: usize,
    },
}

/// One base level of the stack: a scheme owning a single sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseLevel {
    pub level: u8,
    pub sort: SortId,
    pub scheme: BaseScheme,
}

/// The scheme applied to the leaf target sorts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafScheme {
    /// Hyper-linking instantiation for first-order logic without equality.
    Fol,
    /// Identity: the leaf clauses are already ground once base variables are
    /// instantiated (array/element theories).
    GroundArrays,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoryStack {
    pub levels: Vec<BaseLevel>,
    pub leaf: LeafScheme,
    pub leaf_level: u8,
}

impl TheoryStack {
    pub fn validate(&self, sig: &Signature) -> Result<()> {
        for (i, lv) in self.levels.iter().enumerate() {
            if lv.level != i as u8 {
                return Err(Error::Config(format!(
                    "base level {} declared out of order",
                    lv.level
                )));
            }
            if sig.level(lv.sort) != lv.level {
                return Err(Error::Config(format!(
                    "sort `{}` has level {}, expected {}",
                    sig.sort(lv.sort).name,
                    sig.level(lv.sort),
                    lv.level
                )));
            }
            if matches!(lv.scheme, BaseScheme::Presburger { .. }) && !sig.sort(lv.sort).integer {
                return Err(Error::Config(format!(
                    "sort `{}` is not integer-interpreted",
                    sig.sort(lv.sort).name
                )));
            }
        }
        if self.leaf_level != self.levels.len() as u8 {
            return Err(Error::Config("leaf level does not close the stack".into()));
        }
        Ok(())
    }
}

/// A full problem: signature, theory stack and input clauses.
#[derive(Debug, Clone)]
pub struct Problem {
    pub sig: Signature,
    pub stack: TheoryStack,
    pub clauses: Vec<Clause>,
    /// Shared-constant links produced by sort copying: (index copy, element copy).
    pub copy_links: Vec<(crate::core::FuncId, crate::core::FuncId)>,
}

/// A clause split into its base part and target part relative to a level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecomposedClause {
    pub base_part: Clause,
    pub target_part: Clause,
    pub origin: usize,
}

/// The level an atom belongs to: the level of the predicate's boolean result
/// for predicate sugar, the level of the sides' sort for equations.
pub fn atom_level(sig: &Signature, lit: &Literal) -> u8 {
    sig.level(lit.lhs.sort(sig))
}

/// True when the term is admissible inside a base literal of `level`: built
/// from variables of the level's sorts and level-local function structure,
/// with ground terms of the sort treated as opaque.
fn base_term_ok(sig: &Signature, t: &Term, level: u8) -> bool {
    if t.is_ground() {
        return sig.level(t.sort(sig)) == level;
    }
    match t {
        Term::Var(v) => sig.level(v.sort) == level,
        Term::Num(..) => true,
        Term::App(f, args) => {
            sig.level(sig.func(*f).result) == level
                && sig.func(*f).args.iter().all(|s| sig.level(*s) == level)
                && args.iter().all(|a| base_term_ok(sig, a, level))
        }
    }
}

/// True when the term is a target term relative to `level`: its sort lives
/// strictly above the level and it contains no non-variable subterm of the
/// level's sorts and no variable below the level.
fn target_term_ok(sig: &Signature, t: &Term, level: u8) -> bool {
    match t {
        Term::Var(v) => sig.level(v.sort) >= level,
        Term::Num(_, s) => sig.level(*s) > level,
        Term::App(f, args) => {
            sig.level(sig.func(*f).result) > level && args.iter().all(|a| target_side_ok(sig, a, level))
        }
    }
}

fn target_side_ok(sig: &Signature, t: &Term, level: u8) -> bool {
    match t {
        Term::Var(v) => sig.level(v.sort) >= level,
        Term::Num(_, s) => sig.level(*s) != level,
        Term::App(f, args) => {
            // Non-variable subterms of the level itself are forbidden inside
            // target atoms; anything below the level must be ground (opaque).
            let lv = sig.level(sig.func(*f).result);
            if lv == level {
                return false;
            }
            if lv < level {
                return t.is_ground();
            }
            args.iter().all(|a| target_side_ok(sig, a, level))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LitClass {
    Base,
    Target,
}

/// Classifies one literal relative to a base level, or reports why it fits
/// neither side of the hierarchic expansion.
pub fn classify_literal(sig: &Signature, lit: &Literal, level: u8) -> Result<LitClass> {
    let al = atom_level(sig, lit);
    if al == level {
        for side in [&lit.lhs, &lit.rhs] {
            if !base_term_ok(sig, side, level) {
                return Err(Error::fragment(
                    level,
                    format!(
                        "literal {} mixes levels inside a base atom",
                        lit.display(sig)
                    ),
                ));
            }
        }
        return Ok(LitClass::Base);
    }
    if al > level {
        for side in [&lit.lhs, &lit.rhs] {
            if !target_term_ok(sig, side, level) {
                return Err(Error::fragment(
                    level,
                    format!(
                        "literal {} contains a non-variable level-{} term inside a target atom",
                        lit.display(sig),
                        level
                    ),
                ));
            }
        }
        return Ok(LitClass::Target);
    }
    Err(Error::fragment(
        level,
        format!(
            "literal {} belongs to level {} which was already instantiated",
            lit.display(sig),
            al
        ),
    ))
}

/// True iff every term of the clause lives in the base fragment of `level`.
pub fn validate_omega_b(sig: &Signature, clause: &Clause, level: u8) -> bool {
    clause
        .literals()
        .iter()
        .all(|l| matches!(classify_literal(sig, l, level), Ok(LitClass::Base)))
}

/// True iff the clause satisfies the target-side conditions of `level`.
pub fn validate_omega_n(sig: &Signature, clause: &Clause, level: u8) -> bool {
    clause
        .literals()
        .iter()
        .all(|l| matches!(classify_literal(sig, l, level), Ok(LitClass::Target)))
}

/// Splits a clause into base and target parts; the split is unique since the
/// literal classes are disjoint.
pub fn decompose(sig: &Signature, clause: &Clause, level: u8, origin: usize) -> Result<DecomposedClause> {
    let mut base = Vec::new();
    let mut target = Vec::new();
    for lit in clause.literals() {
        match classify_literal(sig, lit, level)? {
            LitClass::Base => base.push(lit.clone()),
            LitClass::Target => target.push(lit.clone()),
        }
    }
    Ok(DecomposedClause {
        base_part: Clause::new(base),
        target_part: Clause::new(target),
        origin,
    })
}

/// Checks that every clause decomposes at every level of the stack, walking
/// the same grounding steps the combiner performs.
pub fn validate_problem(problem: &Problem) -> Result<()> {
    problem.stack.validate(&problem.sig)?;
    let mut clauses = problem.clauses.clone();
    let mut sig = problem.sig.clone();
    for lv in &problem.stack.levels {
        let mut targets = Vec::new();
        for (i, c) in clauses.iter().enumerate() {
            let dec = decompose(&sig, c, lv.level, i)?;
            targets.push(dec.target_part);
        }
        // Ground this level's variables with the placeholder constant and
        // validate the next level on the result.
        clauses = targets
            .into_iter()
            .map(|c| diamond_ground_clause(&mut sig, &c, lv.level))
            .collect();
    }
    // Leaf-level sanity: for the identity scheme no target variables remain.
    if problem.stack.leaf == LeafScheme::GroundArrays {
        for c in &clauses {
            if !c.is_ground() {
                return Err(Error::fragment(
                    problem.stack.leaf_level,
                    format!(
                        "clause {} keeps target variables but the leaf scheme is identity",
                        c.display(&sig)
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Replaces every variable of the level's sorts by the reserved placeholder
/// constant of its sort.
pub fn diamond_ground_clause(sig: &mut Signature, clause: &Clause, level: u8) -> Clause {
    let vars: BTreeSet<Var> = clause
        .vars()
        .into_iter()
        .filter(|v| sig.level(v.sort) == level)
        .collect();
    if vars.is_empty() {
        return clause.clone();
    }
    let subst = crate::core::Substitution::from_pairs(
        vars.into_iter()
            .map(|v| {
                let dia = sig.diamond(v.sort);
                (v, Term::cst(dia))
            })
            .collect::<Vec<_>>(),
    );
    subst.apply_clause(clause)
}

/// Builds the literal `u <= v` (positive or negated) at the sort's level.
pub fn le_literal(sig: &Signature, pos: bool, u: Term, v: Term) -> Literal {
    let sort = u.sort(sig);
    let le = sig.arith_func(sort, FuncKind::Le).expect("<= installed");
    let level = sig.level(sort);
    let tt = sig
        .func_by_name(&format!("true{}", "'".repeat(level as usize)))
        .expect("true installed");
    Literal::new(pos, Term::App(le, vec![u, v]), Term::cst(tt))
}

/// Builds `u < v` (used by the upper-bound axioms).
pub fn lt_literal(sig: &Signature, pos: bool, u: Term, v: Term) -> Literal {
    let sort = u.sort(sig);
    let lt = sig.arith_func(sort, FuncKind::Lt).expect("< installed");
    let level = sig.level(sort);
    let tt = sig
        .func_by_name(&format!("true{}", "'".repeat(level as usize)))
        .expect("true installed");
    Literal::new(pos, Term::App(lt, vec![u, v]), Term::cst(tt))
}

/// Reserved sorts/kinds helper: is this sort owned by a Presburger level?
pub fn presburger_sort(stack: &TheoryStack, sort: SortId) -> bool {
    stack
        .levels
        .iter()
        .any(|lv| lv.sort == sort && matches!(lv.scheme, BaseScheme::Presburger { .. }))
}

impl SortKind {
    pub fn from_level(level: u8, leaf: u8) -> SortKind {
        if level < leaf {
            SortKind::Base
        } else {
            SortKind::Target
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::Signature;

    /// nat (base, level 0), elem + array (target, level 1), select, plus two
    /// integer constants. Mirrors the flat array setting.
    pub(crate) fn flat_arrays() -> (Signature, SortId, SortId, SortId) {
        let mut sig = Signature::new();
        let nat = sig.add_sort("nat", SortKind::Base, 0, true).unwrap();
        let arr = sig.add_sort("array", SortKind::Target, 1, false).unwrap();
        let elem = sig.add_sort("elem", SortKind::Target, 1, false).unwrap();
        sig.install_arith(nat, &[]).unwrap();
        sig.true_const(1);
        sig.add_func("t", vec![], arr).unwrap();
        sig.add_func("t2", vec![], arr).unwrap();
        sig.add_func("v", vec![], elem).unwrap();
        sig.add_func("a", vec![], nat).unwrap();
        sig.add_func("b", vec![], nat).unwrap();
        sig.add_func("select", vec![arr, nat], elem).unwrap();
        (sig, nat, arr, elem)
    }

    fn sel(sig: &Signature, arr_c: &str, idx: Term) -> Term {
        let select = sig.func_by_name("select").unwrap();
        let t = sig.func_by_name(arr_c).unwrap();
        Term::App(select, vec![Term::cst(t), idx])
    }

    #[test]
    fn omega_b_accepts_pure_base() {
        let (sig, nat, _, _) = flat_arrays();
        let a = Term::cst(sig.func_by_name("a").unwrap());
        let x = Term::var("x", nat);
        let c = Clause::new(vec![le_literal(&sig, false, x, a)]);
        assert!(validate_omega_b(&sig, &c, 0));
        assert!(!validate_omega_n(&sig, &c, 0));
    }

    #[test]
    fn omega_b_rejects_select() {
        let (sig, nat, _, elem) = flat_arrays();
        let x = Term::var("x", nat);
        let v = Term::var("v", elem);
        let c = Clause::new(vec![Literal::eq(sel(&sig, "t", x), v)]);
        assert!(!validate_omega_b(&sig, &c, 0));
        assert!(validate_omega_n(&sig, &c, 0));
    }

    #[test]
    fn omega_b_two_var_guards() {
        let (sig, nat, _, _) = flat_arrays();
        let x = Term::var("x", nat);
        let y = Term::var("y", nat);
        let b = Term::cst(sig.func_by_name("b").unwrap());
        let c = Clause::new(vec![
            le_literal(&sig, false, x, Term::var("y", nat)),
            le_literal(&sig, false, y, b),
        ]);
        let _ = x;
        assert!(validate_omega_b(&sig, &c, 0));
    }

    #[test]
    fn omega_n_rejects_nonvariable_base_subterm() {
        let (sig, nat, _, _) = flat_arrays();
        // select(t2, i + 1) = u has the non-variable base term i + 1.
        let plus = sig.func_by_name("+").unwrap();
        let i = Term::var("i", nat);
        let idx = Term::App(plus, vec![i, Term::Num(1, nat)]);
        let u = Term::var(
            "u",
            sig.sort_by_name("elem").map(|_| sig.sort_by_name("elem").unwrap()).unwrap(),
        );
        let c = Clause::new(vec![Literal::eq(sel(&sig, "t2", idx), u)]);
        assert!(!validate_omega_n(&sig, &c, 0));
        assert!(decompose(&sig, &c, 0, 0).is_err());
    }

    #[test]
    fn decompose_splits_guarded_select() {
        let (sig, nat, _, elem) = flat_arrays();
        let x = Term::var("x", nat);
        let a = Term::cst(sig.func_by_name("a").unwrap());
        let one = Term::var("one", elem);
        let guard = le_literal(&sig, false, a.clone(), x.clone());
        let body = Literal::eq(sel(&sig, "t", x), one);
        let c = Clause::new(vec![guard.clone(), body.clone()]);
        let dec = decompose(&sig, &c, 0, 7).unwrap();
        assert_eq!(dec.base_part, Clause::new(vec![guard]));
        assert_eq!(dec.target_part, Clause::new(vec![body]));
        assert_eq!(dec.origin, 7);
        assert_eq!(dec.base_part.union(&dec.target_part), c);
    }

    #[test]
    fn pure_ground_arith_is_base_only() {
        let (sig, _, _, _) = flat_arrays();
        let a = Term::cst(sig.func_by_name("a").unwrap());
        let b = Term::cst(sig.func_by_name("b").unwrap());
        let c = Clause::new(vec![le_literal(&sig, true, a, b)]);
        let dec = decompose(&sig, &c, 0, 0).unwrap();
        assert_eq!(dec.base_part, c);
        assert!(dec.target_part.is_empty());
    }
}
