//! Shiftable clause sets: absorbing per-array index offsets into renamed
//! arrays so the result fits the hierarchic fragment.

use std::collections::{BTreeMap, BTreeSet};

use crate::core::{Clause, FuncId, FuncKind, Literal, Signature, Term, Var};
use crate::error::{Error, Result};
use crate::frame::linear::{canon_literal, normalize_linear, LinearForm};
use crate::frame::spec::{classify_literal, LitClass, Problem};

/// A shift assignment: one ground index offset per array constant.
pub type Lambda = BTreeMap<FuncId, LinearForm>;

/// Union-find over array constants with linear-form offsets to the
/// representative, plus a virtual zero node for unshifted material.
struct OffsetUf {
    ids: Vec<Option<FuncId>>,
    parent: Vec<usize>,
    /// offset[i]: lambda(i) - lambda(parent(i)).
    offset: Vec<LinearForm>,
}

impl OffsetUf {
    fn new() -> Self {
        // Slot 0 is the virtual zero node.
        OffsetUf { ids: vec![None], parent: vec![0], offset: vec![LinearForm::default()] }
    }

    fn node(&mut self, id: Option<FuncId>) -> usize {
        if let Some(pos) = self.ids.iter().position(|x| *x == id) {
            return pos;
        }
        self.ids.push(id);
        self.parent.push(self.ids.len() - 1);
        self.offset.push(LinearForm::default());
        self.ids.len() - 1
    }

    /// Returns the representative and the offset of `x` relative to it.
    fn find(&mut self, x: usize) -> (usize, LinearForm) {
        if self.parent[x] == x {
            return (x, self.offset[x].clone());
        }
        let (root, parent_off) = self.find(self.parent[x]);
        let total = self.offset[x].add(&parent_off);
        self.parent[x] = root;
        self.offset[x] = total.clone();
        (root, total)
    }

    /// Imposes `lambda(a) - lambda(b) = d`; false on contradiction.
    fn merge(&mut self, a: usize, b: usize, d: &LinearForm) -> bool {
        let (ra, oa) = self.find(a);
        let (rb, ob) = self.find(b);
        if ra == rb {
            return oa.sub(&ob) == *d;
        }
        // Attach rb under ra: lambda(rb) = lambda(a) - d - ob + ... solved so
        // that lambda(a) - lambda(b) = d holds.
        self.parent[rb] = ra;
        self.offset[rb] = oa.sub(d).sub(&ob);
        true
    }
}

fn coeff_sum(lf: &LinearForm) -> i64 {
    lf.coeffs.values().sum::<i64>()
}

/// Select applications `select(A, x)` with a variable index, per clause.
fn indexed_selects(sig: &Signature, clause: &Clause) -> Vec<(FuncId, Var)> {
    let mut out = Vec::new();
    for lit in clause.literals() {
        for side in [&lit.lhs, &lit.rhs] {
            for sub in side.subterms() {
                if let Term::App(f, args) = sub {
                    if sig.func(*f).name.starts_with("select") && args.len() == 2 {
                        if let (Term::App(arr, a_args), Term::Var(v)) = (&args[0], &args[1]) {
                            if a_args.is_empty() {
                                out.push((*arr, v.clone()));
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Decides whether the set is shiftable and returns the offset map, `None`
/// when the induced difference constraints are inconsistent. Clauses whose
/// non-ground index literals fall outside the permitted shapes are a
/// fragment violation.
pub fn shiftability_check(problem: &Problem) -> Result<Option<Lambda>> {
    let sig = &problem.sig;
    let Some(level0) = problem.stack.levels.first() else {
        return Ok(Some(Lambda::new()));
    };
    let idx_sort = level0.sort;
    let mut uf = OffsetUf::new();
    let mut arrays: BTreeSet<FuncId> = BTreeSet::new();

    for clause in &problem.clauses {
        let selects = indexed_selects(sig, clause);
        let arr_of = |v: &Var| -> Option<FuncId> {
            selects.iter().find(|(_, w)| w == v).map(|(a, _)| *a)
        };
        for (a, _) in &selects {
            arrays.insert(*a);
        }
        // Condition: same variable indexing two arrays forces equal offsets.
        for (a, v) in &selects {
            for (b, w) in &selects {
                if v == w && a != b {
                    let na = uf.node(Some(*a));
                    let nb = uf.node(Some(*b));
                    if !uf.merge(na, nb, &LinearForm::default()) {
                        return Ok(None);
                    }
                }
            }
        }
        for lit in clause.literals() {
            match classify_literal(sig, lit, level0.level) {
                Ok(LitClass::Base) => {}
                Ok(LitClass::Target) => {
                    // Array equations force equal offsets.
                    if !lit.is_pred_sugar(sig) {
                        if let (Term::App(a, aa), Term::App(b, ba)) = (&lit.lhs, &lit.rhs) {
                            let arrayish = |f: &FuncId| {
                                sig.funcs().any(|(s, d)| {
                                    d.name.starts_with("select") && d.args.first() == Some(&sig.func(*f).result) && s != *f
                                })
                            };
                            if aa.is_empty() && ba.is_empty() && lit.pos && arrayish(a) && arrayish(b) {
                                let na = uf.node(Some(*a));
                                let nb = uf.node(Some(*b));
                                arrays.insert(*a);
                                arrays.insert(*b);
                                if !uf.merge(na, nb, &LinearForm::default()) {
                                    return Ok(None);
                                }
                            }
                        }
                    }
                    continue;
                }
                Err(e) => return Err(e),
            }
            if lit.is_ground() {
                continue;
            }
            // Non-ground index literal: must be a negative <= or congruence
            // in the permitted shapes.
            let Term::App(f, args) = &lit.lhs else {
                return Err(shape_error(sig, lit));
            };
            let kind = sig.func(*f).kind;
            if lit.pos || args[0].sort(sig) != idx_sort {
                return Err(shape_error(sig, lit));
            }
            let d = normalize_linear(sig, &args[0])?.sub(&normalize_linear(sig, &args[1])?);
            let mut vars: Vec<(Var, i64)> = Vec::new();
            let mut ground = LinearForm { offset: d.offset, coeffs: BTreeMap::new() };
            for (t, c) in &d.coeffs {
                match t {
                    Term::Var(v) => vars.push((v.clone(), *c)),
                    _ => {
                        ground.coeffs.insert(t.clone(), *c);
                    }
                }
            }
            match kind {
                FuncKind::EqMod(_) => {
                    if vars.len() == 1 && vars[0].1.abs() == 1 {
                        continue;
                    }
                    return Err(shape_error(sig, lit));
                }
                FuncKind::Le => {}
                _ => return Err(shape_error(sig, lit)),
            }
            match vars.as_slice() {
                [(_, c)] if c.abs() == 1 => {} // x <= t or t <= x: no constraint
                [(x, 1), (y, -1)] | [(y, -1), (x, 1)] => {
                    // Atom x <= y + s with s = -ground.
                    let s = ground.negate();
                    let nx = uf.node(arr_of(x));
                    let ny = uf.node(arr_of(y));
                    if !uf.merge(nx, ny, &s) {
                        return Ok(None);
                    }
                }
                _ => return Err(shape_error(sig, lit)),
            }
        }
    }

    // Read offsets back, normalizing each component: the zero node pins its
    // component, any other component is shifted so its least offset is zero.
    let mut lambda = Lambda::new();
    let mut components: BTreeMap<usize, Vec<(FuncId, LinearForm)>> = BTreeMap::new();
    for arr in &arrays {
        let n = uf.node(Some(*arr));
        let (root, off) = uf.find(n);
        components.entry(root).or_default().push((*arr, off));
    }
    let (zero_root, zero_off) = uf.find(0);
    for (root, members) in components {
        let base = if root == zero_root {
            zero_off.clone()
        } else {
            members
                .iter()
                .map(|(_, o)| o.clone())
                .min_by_key(|o| (coeff_sum(o), o.offset, o.clone()))
                .unwrap_or_default()
        };
        for (arr, off) in members {
            lambda.insert(arr, off.sub(&base));
        }
    }
    Ok(Some(lambda))
}

fn shape_error(sig: &Signature, lit: &Literal) -> Error {
    Error::fragment(
        0,
        format!("literal {} is outside the shiftable shapes", lit.display(sig)),
    )
}

/// Applies the shift: indexes of each array are translated by its offset and
/// every array constant is renamed to a fresh primed copy. The result is
/// equisatisfiable with the input and lies in the hierarchic fragment.
pub fn shift(problem: &Problem, lambda: &Lambda) -> Result<Problem> {
    let mut sig = problem.sig.clone();
    let Some(level0) = problem.stack.levels.first() else {
        return Ok(problem.clone());
    };
    let idx_sort = level0.sort;
    // Fresh primed copies of every shifted array constant.
    let mut renames: BTreeMap<FuncId, FuncId> = BTreeMap::new();
    for (arr, _) in lambda {
        let name = format!("{}'", sig.func(*arr).name);
        let sort = sig.func(*arr).result;
        let id = match sig.func_by_name(&name) {
            Some(id) => id,
            None => sig.add_func_inner(&name, vec![], sort, FuncKind::User)?,
        };
        renames.insert(*arr, id);
    }
    let plus = sig.arith_func(idx_sort, FuncKind::Plus).expect("+");
    let mut new_clauses = Vec::new();
    for clause in &problem.clauses {
        let selects = indexed_selects(&problem.sig, clause);
        // First translate every select-indexed variable by its array offset.
        let mut subst = crate::core::Substitution::new();
        for (arr, v) in &selects {
            let off = lambda.get(arr).cloned().unwrap_or_default();
            if off.is_zero() {
                continue;
            }
            let shifted = Term::App(plus, vec![Term::Var(v.clone()), off.render(&sig, idx_sort)]);
            subst.bind(v.clone(), shifted);
        }
        let moved = subst.apply_clause(clause);
        // Then rewrite selects to the primed arrays with compensated indexes
        // and rename every other array occurrence.
        let rewritten: Clause = moved
            .literals()
            .iter()
            .map(|l| {
                let lit = Literal::new(
                    l.pos,
                    shift_term(&sig, &l.lhs, lambda, &renames, idx_sort),
                    shift_term(&sig, &l.rhs, lambda, &renames, idx_sort),
                );
                canon_literal(&sig, &lit)
            })
            .collect();
        new_clauses.push(rewritten);
    }
    Ok(Problem {
        sig,
        stack: problem.stack.clone(),
        clauses: new_clauses,
        copy_links: problem.copy_links.clone(),
    })
}

fn shift_term(
    sig: &Signature,
    t: &Term,
    lambda: &Lambda,
    renames: &BTreeMap<FuncId, FuncId>,
    idx_sort: crate::core::SortId,
) -> Term {
    match t {
        Term::App(f, args) if sig.func(*f).name.starts_with("select") && args.len() == 2 => {
            let arr = &args[0];
            let idx = shift_term(sig, &args[1], lambda, renames, idx_sort);
            if let Term::App(a, a_args) = arr {
                if a_args.is_empty() {
                    if let Some(off) = lambda.get(a) {
                        let new_arr = Term::cst(renames[a]);
                        let new_idx = if off.is_zero() {
                            idx
                        } else {
                            let minus = sig.arith_func(idx_sort, FuncKind::Minus).expect("-");
                            Term::App(minus, vec![idx, off.render(sig, idx_sort)])
                        };
                        return Term::App(*f, vec![new_arr, new_idx]);
                    }
                }
            }
            Term::App(*f, vec![shift_term(sig, arr, lambda, renames, idx_sort), idx])
        }
        Term::App(f, args) if args.is_empty() && renames.contains_key(f) => Term::cst(renames[f]),
        Term::App(f, args) => Term::App(
            *f,
            args.iter().map(|a| shift_term(sig, a, lambda, renames, idx_sort)).collect(),
        ),
        _ => t.clone(),
    }
}
