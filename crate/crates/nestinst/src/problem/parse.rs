//! Problem-file parser: builds the signature, theory stack and clause set
//! from the s-expression surface syntax.

use std::collections::BTreeMap;

use crate::core::{Clause, FuncId, FuncKind, Literal, Signature, SortId, SortKind, Term, Var};
use crate::error::{Error, Result};
use crate::frame::spec::{BaseLevel, BaseScheme, LeafScheme, Problem, TheoryStack};
use crate::inst::automata::TreeAutomaton;
use crate::problem::sexpr::{parse_one, SExpr};

#[derive(Debug, Clone)]
struct SortSpec {
    name: String,
    base: bool,
    level: Option<u8>,
    real: bool,
    /// Integer-interpreted target sort (array elements holding integers).
    int: bool,
    pos: (usize, usize),
}

#[derive(Debug, Clone)]
enum BaseSchemeSpec {
    Presburger { modulus_cap: u64 },
    Membership { constructors: Vec<String>, predicates: Vec<PredSpec> },
}

#[derive(Debug, Clone)]
struct PredSpec {
    name: String,
    body: PredBody,
}

#[derive(Debug, Clone)]
enum PredBody {
    Automaton { states: Vec<String>, finals: Vec<String>, rules: Vec<(String, Vec<String>, String)> },
    FiniteSet { terms: Vec<SExpr> },
}

#[derive(Debug, Clone)]
enum TargetSpec {
    Fol,
    GroundArrays,
    Nested(Box<(BaseSchemeSpec, TargetSpec)>),
}

/// Parses and fully sort-checks a problem file.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let top = parse_one(text)?;
    let items = top.items().ok_or_else(|| top.err("expected (problem ...)"))?;
    if items.first().and_then(SExpr::atom) != Some("problem") {
        return Err(top.err("expected (problem ...)"));
    }
    let mut sorts: Vec<SortSpec> = Vec::new();
    let mut functions: Vec<&SExpr> = Vec::new();
    let mut vars_decl: Vec<&SExpr> = Vec::new();
    let mut theory: Option<&SExpr> = None;
    let mut clauses_sx: Vec<&SExpr> = Vec::new();
    for section in &items[1..] {
        let sitems = section.items().ok_or_else(|| section.err("expected a section list"))?;
        match sitems.first().and_then(SExpr::atom) {
            Some("sorts") => {
                for s in &sitems[1..] {
                    sorts.push(parse_sort_spec(s)?);
                }
            }
            Some("functions") => functions.extend(&sitems[1..]),
            Some("vars") => vars_decl.extend(&sitems[1..]),
            Some("theory") => theory = Some(section),
            Some("clauses") => clauses_sx.extend(&sitems[1..]),
            Some(other) => return Err(section.err(format!("unknown section `{other}`"))),
            None => return Err(section.err("expected a section name")),
        }
    }
    let theory = theory.ok_or_else(|| top.err("missing (theory ...) section"))?;
    let (base_specs, leaf) = parse_theory(theory)?;

    // Assign levels: base sorts in declaration order take the stack levels;
    // target sorts sit at the leaf level.
    let n_levels = base_specs.len() as u8;
    let mut next_base_level = 0u8;
    for s in &mut sorts {
        if s.base {
            if s.level.is_none() {
                s.level = Some(next_base_level);
            }
            next_base_level = next_base_level.max(s.level.unwrap() + 1);
        }
    }
    let mut sig = Signature::new();
    let mut level_sorts: BTreeMap<u8, SortId> = BTreeMap::new();
    for s in &sorts {
        let (line, col) = s.pos;
        let perr = |msg: String| Error::Parse { line, col, msg };
        let (kind, level) = if s.base {
            let level = s.level.unwrap();
            if level >= n_levels {
                return Err(perr(format!(
                    "base sort `{}` at level {level} but the theory stack has {n_levels} base level(s)",
                    s.name
                )));
            }
            (SortKind::Base, level)
        } else {
            (SortKind::Target, n_levels)
        };
        let integer = (s.base
            && matches!(base_specs[level as usize], BaseSchemeSpec::Presburger { .. }))
            || (!s.base && s.int);
        let id = sig.add_sort(&s.name, kind, level, integer)?;
        if s.real {
            sig.set_real(id);
        }
        if !s.base && s.int {
            sig.install_arith(id, &[])?;
        }
        if s.base {
            if level_sorts.insert(level, id).is_some() {
                return Err(perr(format!("two base sorts declared at level {level}")));
            }
        }
    }
    for (level, spec) in base_specs.iter().enumerate() {
        let level = level as u8;
        let sort = *level_sorts
            .get(&level)
            .ok_or_else(|| theory.err(format!("no base sort declared for level {level}")))?;
        if matches!(spec, BaseSchemeSpec::Presburger { .. }) {
            sig.install_arith(sort, &[])?;
        } else {
            sig.true_const(level);
            sig.bool_sort(level);
        }
    }
    sig.true_const(n_levels);
    sig.bool_sort(n_levels);

    // User functions. A result sort of `bool` means the leaf boolean.
    for f in functions {
        let fitems = f.items().ok_or_else(|| f.err("expected (name (args) result)"))?;
        let [name, args, result] = fitems else {
            return Err(f.err("expected (name (args) result)"));
        };
        let name = name.atom().ok_or_else(|| name.err("expected a function name"))?;
        let arg_ids = args
            .items()
            .ok_or_else(|| args.err("expected an argument sort list"))?
            .iter()
            .map(|a| resolve_sort(&sig, a))
            .collect::<Result<Vec<_>>>()?;
        let result_id = resolve_sort(&sig, result)?;
        sig.add_func(name, arg_ids, result_id)?;
    }

    // Membership predicate tables need the constructors declared above.
    let mut stack_levels: Vec<BaseLevel> = Vec::new();
    for (level, spec) in base_specs.iter().enumerate() {
        let level = level as u8;
        let sort = level_sorts[&level];
        let scheme = match spec {
            BaseSchemeSpec::Presburger { modulus_cap } => {
                BaseScheme::Presburger { modulus_cap: *modulus_cap }
            }
            BaseSchemeSpec::Membership { constructors, predicates } => {
                let ctor_ids: Vec<FuncId> = constructors
                    .iter()
                    .map(|n| {
                        sig.func_by_name(n).ok_or_else(|| {
                            theory.err(format!("unknown constructor `{n}`"))
                        })
                    })
                    .collect::<Result<_>>()?;
                for &c in &ctor_ids {
                    let d = sig.func(c);
                    if d.result != sort || d.args.iter().any(|a| *a != sort) {
                        return Err(theory.err(format!(
                            "constructor `{}` is not an operator of the algebra sort",
                            d.name
                        )));
                    }
                }
                let mut table = Vec::new();
                let b = sig.bool_sort(level);
                for pred in predicates {
                    let pid = sig.add_func(&pred.name, vec![sort], b)?;
                    let auto = build_automaton(&sig, &ctor_ids, pred, sort)?;
                    table.push((pid, auto));
                }
                BaseScheme::Membership {
                    constructors: ctor_ids,
                    predicates: table,
                    predicate_cap: 12,
                }
            }
        };
        stack_levels.push(BaseLevel { level, sort, scheme });
    }
    let leaf_scheme = flatten_leaf(&leaf);
    let stack = TheoryStack { levels: stack_levels, leaf: leaf_scheme, leaf_level: n_levels };

    // Variables.
    let mut vars: BTreeMap<String, Var> = BTreeMap::new();
    for v in vars_decl {
        let vitems = v.items().ok_or_else(|| v.err("expected (name sort)"))?;
        let [name, sort] = vitems else {
            return Err(v.err("expected (name sort)"));
        };
        let name = name.atom().ok_or_else(|| name.err("expected a variable name"))?;
        if name.starts_with('_') {
            return Err(v.err("variable names starting with `_` are reserved"));
        }
        let sort_id = resolve_sort(&sig, sort)?;
        if sig.func_by_name(name).is_some() {
            return Err(v.err(format!("`{name}` is already a function symbol")));
        }
        vars.insert(name.to_string(), Var::new(name, sort_id));
    }

    let mut ctx = Ctx { sig, vars };
    let mut clauses = Vec::new();
    for c in clauses_sx {
        clauses.push(ctx.clause(c)?);
    }
    let problem = Problem { sig: ctx.sig, stack, clauses, copy_links: vec![] };
    problem.sig.check_inhabited()?;
    problem.stack.validate(&problem.sig)?;
    for c in &problem.clauses {
        c.sort_check(&problem.sig)?;
    }
    Ok(problem)
}

fn parse_sort_spec(s: &SExpr) -> Result<SortSpec> {
    let items = s.items().ok_or_else(|| s.err("expected (name base|target ...)"))?;
    let name = items
        .first()
        .and_then(SExpr::atom)
        .ok_or_else(|| s.err("expected a sort name"))?;
    let role = items
        .get(1)
        .and_then(SExpr::atom)
        .ok_or_else(|| s.err("expected `base` or `target`"))?;
    let base = match role {
        "base" => true,
        "target" => false,
        other => return Err(s.err(format!("expected `base` or `target`, got `{other}`"))),
    };
    let mut level = None;
    let mut real = false;
    let mut int = false;
    for extra in &items[2..] {
        match extra.atom() {
            Some("real") => real = true,
            Some("int") => int = true,
            Some(n) => {
                level = Some(n.parse::<u8>().map_err(|_| extra.err("expected a level number"))?)
            }
            None => return Err(extra.err("unexpected sort attribute")),
        }
    }
    Ok(SortSpec { name: name.to_string(), base, level, real, int, pos: s.pos() })
}

fn parse_theory(s: &SExpr) -> Result<(Vec<BaseSchemeSpec>, TargetSpec)> {
    let items = s.items().unwrap();
    let [_kw, base, target] = items else {
        return Err(s.err("expected (theory (base ...) (target ...))"));
    };
    let base_spec = parse_base(base)?;
    let target_spec = parse_target(target)?;
    // Flatten nesting into the level list.
    let mut levels = vec![base_spec];
    let mut leaf = target_spec;
    loop {
        match leaf {
            TargetSpec::Nested(inner) => {
                let (b, t) = *inner;
                levels.push(b);
                leaf = t;
            }
            done => return Ok((levels, done)),
        }
    }
}

fn flatten_leaf(t: &TargetSpec) -> LeafScheme {
    match t {
        TargetSpec::Fol => LeafScheme::Fol,
        TargetSpec::GroundArrays => LeafScheme::GroundArrays,
        TargetSpec::Nested(_) => unreachable!("nesting flattened by parse_theory"),
    }
}

fn parse_base(s: &SExpr) -> Result<BaseSchemeSpec> {
    let items = s.items().ok_or_else(|| s.err("expected (base ...)"))?;
    if items.first().and_then(SExpr::atom) != Some("base") {
        return Err(s.err("expected (base ...)"));
    }
    match items.get(1).and_then(SExpr::atom) {
        Some("presburger") => {
            let mut modulus_cap = 64;
            for extra in &items[2..] {
                let e = extra.items().ok_or_else(|| extra.err("expected (modulus-cap N)"))?;
                match (e.first().and_then(SExpr::atom), e.get(1).and_then(SExpr::atom)) {
                    (Some("modulus-cap"), Some(n)) => {
                        modulus_cap = n.parse().map_err(|_| extra.err("bad modulus cap"))?
                    }
                    _ => return Err(extra.err("unexpected base option")),
                }
            }
            Ok(BaseSchemeSpec::Presburger { modulus_cap })
        }
        Some("membership") => {
            let mut constructors = Vec::new();
            let mut predicates = Vec::new();
            for extra in &items[2..] {
                let e = extra.items().ok_or_else(|| extra.err("expected a membership option"))?;
                match e.first().and_then(SExpr::atom) {
                    Some("constructors") => {
                        for c in &e[1..] {
                            constructors.push(
                                c.atom()
                                    .ok_or_else(|| c.err("expected a constructor name"))?
                                    .to_string(),
                            );
                        }
                    }
                    Some("predicates") => {
                        for p in &e[1..] {
                            predicates.push(parse_pred(p)?);
                        }
                    }
                    _ => return Err(extra.err("unexpected membership option")),
                }
            }
            Ok(BaseSchemeSpec::Membership { constructors, predicates })
        }
        _ => Err(s.err("expected `presburger` or `membership`")),
    }
}

fn parse_target(s: &SExpr) -> Result<TargetSpec> {
    let items = s.items().ok_or_else(|| s.err("expected (target ...)"))?;
    if items.first().and_then(SExpr::atom) != Some("target") {
        return Err(s.err("expected (target ...)"));
    }
    let body = items.get(1).ok_or_else(|| s.err("missing target scheme"))?;
    match body.atom() {
        Some("fol") => Ok(TargetSpec::Fol),
        Some("ground-arrays") => Ok(TargetSpec::GroundArrays),
        Some(other) => Err(body.err(format!("unknown target scheme `{other}`"))),
        None => {
            let nested = body.items().unwrap();
            if nested.first().and_then(SExpr::atom) != Some("nested") {
                return Err(body.err("expected (nested (base ...) (target ...))"));
            }
            let [_kw, b, t] = nested else {
                return Err(body.err("expected (nested (base ...) (target ...))"));
            };
            Ok(TargetSpec::Nested(Box::new((parse_base(b)?, parse_target(t)?))))
        }
    }
}

fn parse_pred(p: &SExpr) -> Result<PredSpec> {
    let items = p.items().ok_or_else(|| p.err("expected a predicate description"))?;
    let name = items
        .first()
        .and_then(SExpr::atom)
        .ok_or_else(|| p.err("expected a predicate name"))?
        .to_string();
    if items.len() == 2 {
        if let Some(set) = items[1].items() {
            if set.first().and_then(SExpr::atom) == Some("set") {
                return Ok(PredSpec {
                    name,
                    body: PredBody::FiniteSet { terms: set[1..].to_vec() },
                });
            }
        }
    }
    let mut states = Vec::new();
    let mut finals = Vec::new();
    let mut rules = Vec::new();
    for part in &items[1..] {
        let e = part.items().ok_or_else(|| part.err("expected (states|final|rules ...)"))?;
        match e.first().and_then(SExpr::atom) {
            Some("states") => {
                for q in &e[1..] {
                    states.push(q.atom().ok_or_else(|| q.err("expected a state name"))?.to_string());
                }
            }
            Some("final") => {
                for q in &e[1..] {
                    finals.push(q.atom().ok_or_else(|| q.err("expected a state name"))?.to_string());
                }
            }
            Some("rules") => {
                for r in &e[1..] {
                    let ritems = r.items().ok_or_else(|| r.err("expected (f (q...) q)"))?;
                    let [f, args, res] = ritems else {
                        return Err(r.err("expected (f (q...) q)"));
                    };
                    let f = f.atom().ok_or_else(|| f.err("expected a constructor"))?.to_string();
                    let arg_states = args
                        .items()
                        .ok_or_else(|| args.err("expected a state list"))?
                        .iter()
                        .map(|q| {
                            q.atom().map(str::to_string).ok_or_else(|| q.err("expected a state"))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let res = res.atom().ok_or_else(|| res.err("expected a state"))?.to_string();
                    rules.push((f, arg_states, res));
                }
            }
            _ => return Err(part.err("expected states, final or rules")),
        }
    }
    Ok(PredSpec { name, body: PredBody::Automaton { states, finals, rules } })
}

fn build_automaton(
    sig: &Signature,
    ctors: &[FuncId],
    pred: &PredSpec,
    sort: SortId,
) -> Result<TreeAutomaton> {
    match &pred.body {
        PredBody::FiniteSet { terms } => {
            let mut ctx = Ctx { sig: sig.clone(), vars: BTreeMap::new() };
            let ground: Vec<Term> = terms
                .iter()
                .map(|t| ctx.term(t, Some(sort)))
                .collect::<Result<_>>()?;
            for t in &ground {
                if !t.is_ground() {
                    return Err(Error::Config(format!(
                        "finite-set member `{}` is not ground",
                        t.display(sig)
                    )));
                }
            }
            Ok(TreeAutomaton::from_terms(&ground))
        }
        PredBody::Automaton { states, finals, rules } => {
            let index = |q: &str| -> Result<usize> {
                states
                    .iter()
                    .position(|s| s == q)
                    .ok_or_else(|| Error::Config(format!("unknown state `{q}` in `{}`", pred.name)))
            };
            let mut auto = TreeAutomaton::new(states.len());
            for q in finals {
                auto.final_states.insert(index(q)?);
            }
            for (f, args, res) in rules {
                let fid = sig
                    .func_by_name(f)
                    .filter(|id| ctors.contains(id))
                    .ok_or_else(|| Error::Config(format!("rule constructor `{f}` not declared")))?;
                if sig.func(fid).args.len() != args.len() {
                    return Err(Error::Config(format!("rule arity mismatch for `{f}`")));
                }
                let arg_states = args.iter().map(|q| index(q)).collect::<Result<Vec<_>>>()?;
                auto.add_transition(fid, arg_states, index(res)?);
            }
            Ok(auto)
        }
    }
}

fn resolve_sort(sig: &Signature, s: &SExpr) -> Result<SortId> {
    let name = s.atom().ok_or_else(|| s.err("expected a sort name"))?;
    if name == "bool" {
        return Ok(sig
            .sort_by_name(&format!("bool{}", "'".repeat(sig.leaf_level() as usize)))
            .expect("leaf bool installed"));
    }
    sig.sort_by_name(name)
        .ok_or_else(|| s.err(format!("unknown sort `{name}`")))
}

struct Ctx {
    sig: Signature,
    vars: BTreeMap<String, Var>,
}

impl Ctx {
    fn clause(&mut self, sx: &SExpr) -> Result<Clause> {
        if sx.atom().is_some() {
            return Ok(Clause::new(vec![self.literal(sx)?]));
        }
        let items = sx.items().unwrap();
        if items.first().and_then(SExpr::atom) == Some("or") {
            let lits = items[1..]
                .iter()
                .map(|l| self.literal(l))
                .collect::<Result<Vec<_>>>()?;
            Ok(Clause::new(lits))
        } else {
            Ok(Clause::new(vec![self.literal(sx)?]))
        }
    }

    fn literal(&mut self, sx: &SExpr) -> Result<Literal> {
        if let Some(name) = sx.atom() {
            // Bare nullary predicate.
            let t = self.term(sx, None)?;
            return self.pred_literal(sx, t, true, name);
        }
        let items = sx.items().unwrap();
        let head = items
            .first()
            .and_then(SExpr::atom)
            .ok_or_else(|| sx.err("expected a literal"))?;
        match head {
            "not" => {
                let [_kw, inner] = items else {
                    return Err(sx.err("expected (not literal)"));
                };
                Ok(self.literal(inner)?.negated())
            }
            "=" => {
                let [_kw, l, r] = items else {
                    return Err(sx.err("expected (= t u)"));
                };
                let (lt, rt) = self.pair(l, r)?;
                let sort = lt.sort(&self.sig);
                if self.sig.sort(sort).is_bool {
                    return Err(sx.err("equations between boolean terms are not supported"));
                }
                if rt.sort(&self.sig) != sort {
                    return Err(sx.err("equation between different sorts"));
                }
                Ok(Literal::eq(lt, rt))
            }
            "<=" | "<" | ">=" | ">" => {
                let [_kw, l, r] = items else {
                    return Err(sx.err(format!("expected ({head} t u)")));
                };
                let (lt, rt) = self.pair(l, r)?;
                let (lt, rt) = if head == ">=" || head == ">" { (rt, lt) } else { (lt, rt) };
                let sort = lt.sort(&self.sig);
                if !self.sig.sort(sort).integer && !self.sig.sort(sort).real {
                    return Err(sx.err("comparison over a non-arithmetic sort"));
                }
                let kind = if head == "<=" || head == ">=" { FuncKind::Le } else { FuncKind::Lt };
                let op = self
                    .sig
                    .arith_func(sort, kind)
                    .ok_or_else(|| sx.err("no ordering installed for this sort"))?;
                let level = self.sig.level(sort);
                let tt = self.sig.true_const(level);
                Ok(Literal::eq(Term::App(op, vec![lt, rt]), Term::cst(tt)))
            }
            "eqmod" => {
                let [_kw, k, l, r] = items else {
                    return Err(sx.err("expected (eqmod k t u)"));
                };
                let k: u64 = k
                    .atom()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| sx.err("expected a positive modulus"))?;
                if k == 0 {
                    return Err(sx.err("modulus must be positive"));
                }
                let (lt, rt) = self.pair(l, r)?;
                let sort = lt.sort(&self.sig);
                if !self.sig.sort(sort).integer {
                    return Err(sx.err("congruence over a non-integer sort"));
                }
                let op = self.sig.eqmod(sort, k)?;
                let level = self.sig.level(sort);
                let tt = self.sig.true_const(level);
                Ok(Literal::eq(Term::App(op, vec![lt, rt]), Term::cst(tt)))
            }
            _ => {
                let t = self.term(sx, None)?;
                self.pred_literal(sx, t, true, head)
            }
        }
    }

    fn pred_literal(&mut self, sx: &SExpr, t: Term, pos: bool, name: &str) -> Result<Literal> {
        let sort = t.sort(&self.sig);
        if !self.sig.sort(sort).is_bool {
            return Err(sx.err(format!("`{name}` is not a predicate")));
        }
        let level = self.sig.level(sort);
        let tt = self.sig.true_const(level);
        Ok(Literal::new(pos, t, Term::cst(tt)))
    }

    /// Parses two term operands, letting a bare numeral borrow the other
    /// side's sort.
    fn pair(&mut self, l: &SExpr, r: &SExpr) -> Result<(Term, Term)> {
        let l_num = l.atom().map(|a| a.parse::<i64>().is_ok()).unwrap_or(false);
        if l_num {
            let rt = self.term(r, None)?;
            let sort = rt.sort(&self.sig);
            let lt = self.term(l, Some(sort))?;
            Ok((lt, rt))
        } else {
            let lt = self.term(l, None)?;
            let sort = lt.sort(&self.sig);
            let rt = self.term(r, Some(sort))?;
            Ok((lt, rt))
        }
    }

    fn term(&mut self, sx: &SExpr, expected: Option<SortId>) -> Result<Term> {
        match sx {
            SExpr::Atom { text, .. } => {
                if let Ok(n) = text.parse::<i64>() {
                    let sort = match expected {
                        Some(s) if self.sig.sort(s).integer => s,
                        Some(s) => {
                            return Err(sx.err(format!(
                                "numeral where sort `{}` was expected",
                                self.sig.sort(s).name
                            )))
                        }
                        None => self.only_integer_sort().ok_or_else(|| {
                            sx.err("numeral needs context to pick its sort")
                        })?,
                    };
                    return Ok(Term::Num(n, sort));
                }
                if let Some(v) = self.vars.get(text) {
                    self.check_expected(sx, v.sort, expected)?;
                    return Ok(Term::Var(v.clone()));
                }
                if let Some(t) = self.reserved_constant(text)? {
                    self.check_expected(sx, t.sort(&self.sig), expected)?;
                    return Ok(t);
                }
                let f = self
                    .sig
                    .func_by_name(text)
                    .ok_or_else(|| sx.err(format!("unknown symbol `{text}`")))?;
                if !self.sig.func(f).args.is_empty() {
                    return Err(sx.err(format!("`{text}` expects arguments")));
                }
                self.check_expected(sx, self.sig.func(f).result, expected)?;
                Ok(Term::cst(f))
            }
            SExpr::List { items, .. } => {
                let head = items
                    .first()
                    .and_then(SExpr::atom)
                    .ok_or_else(|| sx.err("expected a function application"))?;
                // Arithmetic operators resolve through their operand sort.
                if let Some(base) = head.strip_suffix_primes(&["+", "-", "succ", "pred"]) {
                    let args = &items[1..];
                    let first = args
                        .iter()
                        .find(|a| a.atom().map(|t| t.parse::<i64>().is_err()).unwrap_or(true));
                    let sort = match first {
                        Some(a) => self.term(a, expected)?.sort(&self.sig),
                        None => expected
                            .or_else(|| self.only_integer_sort())
                            .ok_or_else(|| sx.err("numeral needs context to pick its sort"))?,
                    };
                    let kind = match base {
                        "+" => FuncKind::Plus,
                        "-" => FuncKind::Minus,
                        "succ" => FuncKind::Succ,
                        _ => FuncKind::Pred,
                    };
                    let op = self
                        .sig
                        .arith_func(sort, kind)
                        .ok_or_else(|| sx.err("no arithmetic installed for this sort"))?;
                    let decl_args = self.sig.func(op).args.clone();
                    if decl_args.len() != args.len() {
                        return Err(sx.err(format!("`{head}` expects {} arguments", decl_args.len())));
                    }
                    let parsed = args
                        .iter()
                        .zip(&decl_args)
                        .map(|(a, s)| self.term(a, Some(*s)))
                        .collect::<Result<Vec<_>>>()?;
                    self.check_expected(sx, self.sig.func(op).result, expected)?;
                    return Ok(Term::App(op, parsed));
                }
                let f = self
                    .sig
                    .func_by_name(head)
                    .ok_or_else(|| sx.err(format!("unknown function `{head}`")))?;
                let decl_args = self.sig.func(f).args.clone();
                if decl_args.len() != items.len() - 1 {
                    return Err(sx.err(format!(
                        "`{head}` expects {} arguments, got {}",
                        decl_args.len(),
                        items.len() - 1
                    )));
                }
                let parsed = items[1..]
                    .iter()
                    .zip(&decl_args)
                    .map(|(a, s)| self.term(a, Some(*s)))
                    .collect::<Result<Vec<_>>>()?;
                self.check_expected(sx, self.sig.func(f).result, expected)?;
                Ok(Term::App(f, parsed))
            }
        }
    }

    /// Reserved constants are recognized by name so emitted instance files
    /// can be re-parsed without declaring them.
    fn reserved_constant(&mut self, name: &str) -> Result<Option<Term>> {
        if let Some(primes) = name.strip_prefix("chi") {
            if primes.chars().all(|c| c == '\'') {
                let level = primes.len() as u8;
                let sort = self
                    .sig
                    .sorts()
                    .find(|(_, d)| d.level == level && d.integer)
                    .map(|(id, _)| id);
                if let Some(sort) = sort {
                    return Ok(Some(Term::cst(self.sig.chi(sort))));
                }
            }
        }
        for (prefix, which) in [("dia_", true), ("bot_", false)] {
            if let Some(sort_name) = name.strip_prefix(prefix) {
                if let Some(sort) = self.sig.sort_by_name(sort_name) {
                    let f = if which { self.sig.diamond(sort) } else { self.sig.bot(sort) };
                    return Ok(Some(Term::cst(f)));
                }
            }
        }
        Ok(None)
    }

    fn only_integer_sort(&self) -> Option<SortId> {
        let mut ints = self.sig.sorts().filter(|(_, d)| d.integer);
        match (ints.next(), ints.next()) {
            (Some((id, _)), None) => Some(id),
            _ => None,
        }
    }

    fn check_expected(&self, sx: &SExpr, got: SortId, expected: Option<SortId>) -> Result<()> {
        if let Some(e) = expected {
            if e != got {
                return Err(sx.err(format!(
                    "expected sort `{}`, got `{}`",
                    self.sig.sort(e).name,
                    self.sig.sort(got).name
                )));
            }
        }
        Ok(())
    }
}

trait PrimeSuffix {
    fn strip_suffix_primes<'a>(&self, bases: &[&'a str]) -> Option<&'a str>;
}

impl PrimeSuffix for str {
    /// `+''` strips to `+`; returns the base operator when the whole name is
    /// a known operator followed by primes.
    fn strip_suffix_primes<'a>(&self, bases: &[&'a str]) -> Option<&'a str> {
        let trimmed = self.trim_end_matches('\'');
        bases.iter().find(|b| **b == trimmed).copied()
    }
}
