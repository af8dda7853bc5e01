//! Sort copying: splits an integer sort used both as array index and array
//! element into the index original and a primed element copy, so the clause
//! set fits the hierarchic fragment.

use std::collections::BTreeMap;

use crate::core::{Clause, FuncId, FuncKind, Literal, Signature, SortId, SortKind, Term};
use crate::error::{Error, Result};
use crate::frame::spec::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    Idx,
    Elem,
}

struct Uf {
    parent: Vec<usize>,
    tag: Vec<Option<Tag>>,
}

impl Uf {
    fn new() -> Self {
        Uf { parent: vec![], tag: vec![] }
    }

    fn fresh(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.tag.push(None);
        self.parent.len() - 1
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }

    fn seed(&mut self, x: usize, t: Tag) -> Result<()> {
        let r = self.find(x);
        match self.tag[r] {
            None => {
                self.tag[r] = Some(t);
                Ok(())
            }
            Some(existing) if existing == t => Ok(()),
            Some(_) => Err(mixed_use()),
        }
    }

    fn union(&mut self, a: usize, b: usize) -> Result<()> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        let merged = match (self.tag[ra], self.tag[rb]) {
            (Some(x), Some(y)) if x != y => return Err(mixed_use()),
            (Some(x), _) | (_, Some(x)) => Some(x),
            (None, None) => None,
        };
        self.parent[rb] = ra;
        self.tag[ra] = merged;
        Ok(())
    }

    fn resolved(&mut self, x: usize) -> Tag {
        let r = self.find(x);
        self.tag[r].unwrap_or(Tag::Idx)
    }
}

fn mixed_use() -> Error {
    Error::fragment(0, "a term is used both as array index and as array element".to_string())
}

/// Rewrites a problem whose selects produce values of the index sort into one
/// over a primed element copy of that sort, recording shared-constant links
/// for the later merge. Problems without index-valued selects pass through.
pub fn copy_sorts(problem: &Problem, idx_sort: SortId) -> Result<Problem> {
    let sig = &problem.sig;
    let selects: Vec<FuncId> = sig
        .funcs()
        .filter(|(_, d)| d.name.starts_with("select") && d.result == idx_sort && d.args.len() == 2)
        .map(|(id, _)| id)
        .collect();
    if selects.is_empty() {
        return Ok(problem.clone());
    }

    // Resolve an Idx/Elem tag for each occurrence of the index sort, clause
    // by clause (occurrences listed in literal-side prefix order).
    let mut clause_plans: Vec<Vec<Vec<Tag>>> = Vec::new();
    for clause in &problem.clauses {
        let mut uf = Uf::new();
        let mut var_groups: BTreeMap<String, usize> = BTreeMap::new();
        let mut occs: Vec<Vec<usize>> = Vec::new();
        for lit in clause.literals() {
            let mut lit_occs = Vec::new();
            let atom_group = uf.fresh();
            for side in [&lit.lhs, &lit.rhs] {
                walk(sig, idx_sort, &selects, side, Some(atom_group), &mut uf, &mut var_groups, &mut lit_occs)?;
            }
            occs.push(lit_occs);
        }
        clause_plans.push(
            occs.iter()
                .map(|lits| lits.iter().map(|g| uf.resolved(*g)).collect())
                .collect(),
        );
    }

    let mut out_sig = sig.clone();
    let idx_name = sig.sort(idx_sort).name.clone();
    let leaf = sig.leaf_level().max(1);
    let elem_sort = out_sig.add_sort(&format!("{idx_name}'"), SortKind::Target, leaf, true)?;
    out_sig.install_arith(elem_sort, &[])?;
    for &s in &selects {
        out_sig.retype_func_result(s, elem_sort);
    }
    let mut links: Vec<(FuncId, FuncId)> = problem.copy_links.clone();
    let mut new_clauses = Vec::new();
    for (clause, plan) in problem.clauses.iter().zip(&clause_plans) {
        let mut lits = Vec::new();
        for (lit, tags) in clause.literals().iter().zip(plan) {
            let mut cursor = 0usize;
            let lhs = rewrite(&mut out_sig, idx_sort, elem_sort, &selects, &lit.lhs, tags, &mut cursor, &mut links)?;
            let rhs = rewrite(&mut out_sig, idx_sort, elem_sort, &selects, &lit.rhs, tags, &mut cursor, &mut links)?;
            // Predicate sugar over a now-primed comparison needs the primed
            // boolean constant on the right.
            let rhs = fix_true_level(&mut out_sig, &lhs, rhs);
            lits.push(Literal::new(lit.pos, lhs, rhs));
        }
        new_clauses.push(Clause::new(lits));
    }
    Ok(Problem {
        sig: out_sig,
        stack: problem.stack.clone(),
        clauses: new_clauses,
        copy_links: links,
    })
}

/// Walks a term, creating one group per occurrence of the index sort in
/// prefix order. `ctx` is a group the occurrence must join, when any.
#[allow(clippy::too_many_arguments)]
fn walk(
    sig: &Signature,
    idx_sort: SortId,
    selects: &[FuncId],
    t: &Term,
    ctx: Option<usize>,
    uf: &mut Uf,
    var_groups: &mut BTreeMap<String, usize>,
    occs: &mut Vec<usize>,
) -> Result<()> {
    let group = if t.sort(sig) == idx_sort {
        let g = uf.fresh();
        if let Some(c) = ctx {
            uf.union(g, c)?;
        }
        occs.push(g);
        Some(g)
    } else {
        None
    };
    match t {
        Term::Var(v) => {
            if let Some(g) = group {
                let vg = *var_groups.entry(v.name.clone()).or_insert_with(|| uf.fresh());
                uf.union(g, vg)?;
            }
        }
        Term::Num(..) => {}
        Term::App(f, args) => {
            if selects.contains(f) {
                if let Some(g) = group {
                    uf.seed(g, Tag::Elem)?;
                }
                walk(sig, idx_sort, selects, &args[0], None, uf, var_groups, occs)?;
                let before = occs.len();
                walk(sig, idx_sort, selects, &args[1], None, uf, var_groups, occs)?;
                if occs.len() > before {
                    uf.seed(occs[before], Tag::Idx)?;
                }
            } else {
                let kind = sig.func(*f).kind;
                for arg in args {
                    let child_ctx = if arg.sort(sig) == idx_sort
                        && (kind.is_arith_op() || kind.is_arith_pred())
                    {
                        group.or(ctx)
                    } else {
                        None
                    };
                    walk(sig, idx_sort, selects, arg, child_ctx, uf, var_groups, occs)?;
                }
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn rewrite(
    sig: &mut Signature,
    idx_sort: SortId,
    elem_sort: SortId,
    selects: &[FuncId],
    t: &Term,
    tags: &[Tag],
    cursor: &mut usize,
    links: &mut Vec<(FuncId, FuncId)>,
) -> Result<Term> {
    let tag = if t.sort_pre_retype(sig, idx_sort, elem_sort, selects) {
        let tg = tags[*cursor];
        *cursor += 1;
        Some(tg)
    } else {
        None
    };
    match t {
        Term::Var(v) => Ok(match tag {
            Some(Tag::Elem) => Term::var(v.name.clone(), elem_sort),
            _ => t.clone(),
        }),
        Term::Num(n, _) => Ok(match tag {
            Some(Tag::Elem) => Term::Num(*n, elem_sort),
            _ => t.clone(),
        }),
        Term::App(f, args) => {
            let kind = sig.func(*f).kind;
            let nullary_user = sig.func(*f).args.is_empty() && kind == FuncKind::User;
            let name = sig.func(*f).name.clone();
            let new_args: Vec<Term> = args
                .iter()
                .map(|a| rewrite(sig, idx_sort, elem_sort, selects, a, tags, cursor, links))
                .collect::<Result<_>>()?;
            if selects.contains(f) {
                return Ok(Term::App(*f, new_args));
            }
            if kind.is_arith_pred() && new_args.iter().any(|a| a.sort(sig) == elem_sort) {
                let primed = primed_counterpart(sig, *f, elem_sort)?;
                return Ok(Term::App(primed, new_args));
            }
            match tag {
                Some(Tag::Elem) => {
                    if nullary_user {
                        let primed = elem_const(sig, *f, elem_sort, links)?;
                        Ok(Term::App(primed, vec![]))
                    } else if kind.is_arith_op() {
                        let primed = primed_counterpart(sig, *f, elem_sort)?;
                        Ok(Term::App(primed, new_args))
                    } else {
                        Err(Error::Unsupported(format!(
                            "cannot copy `{name}` to the element side"
                        )))
                    }
                }
                _ => Ok(Term::App(*f, new_args)),
            }
        }
    }
}

trait SortPreRetype {
    fn sort_pre_retype(&self, sig: &Signature, idx: SortId, elem: SortId, selects: &[FuncId]) -> bool;
}

impl SortPreRetype for Term {
    /// Whether this occurrence was index-sorted when the tags were computed.
    /// Selects have already been retyped in `sig`, so `select(...)` counts as
    /// an occurrence even though its new sort is the element copy.
    fn sort_pre_retype(&self, sig: &Signature, idx: SortId, _elem: SortId, selects: &[FuncId]) -> bool {
        match self {
            Term::App(f, _) if selects.contains(f) => true,
            _ => self.sort(sig) == idx,
        }
    }
}

fn primed_counterpart(sig: &mut Signature, f: FuncId, elem_sort: SortId) -> Result<FuncId> {
    let kind = sig.func(f).kind;
    sig.arith_func(elem_sort, kind)
        .or_else(|| match kind {
            FuncKind::EqMod(k) => sig.eqmod(elem_sort, k).ok(),
            _ => None,
        })
        .ok_or_else(|| Error::Config("primed arithmetic not installed".into()))
}

fn elem_const(sig: &mut Signature, f: FuncId, elem_sort: SortId, links: &mut Vec<(FuncId, FuncId)>) -> Result<FuncId> {
    let name = format!("{}'", sig.func(f).name);
    if let Some(id) = sig.func_by_name(&name) {
        return Ok(id);
    }
    let id = sig.add_func_inner(&name, vec![], elem_sort, FuncKind::User)?;
    links.push((f, id));
    Ok(id)
}

/// Aligns the boolean constant of predicate sugar with the (possibly primed)
/// predicate on the left.
fn fix_true_level(sig: &mut Signature, lhs: &Term, rhs: Term) -> Term {
    if let (Term::App(f, _), Term::App(r, _)) = (lhs, &rhs) {
        if sig.func(*r).kind == FuncKind::True {
            let level = sig.level(sig.func(*f).result);
            let tt = sig.true_const(level);
            return Term::cst(tt);
        }
    }
    rhs
}
