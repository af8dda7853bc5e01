//! Multi-sorted signatures.
//!
//! Sorts carry a nesting level: level 0 is the outermost base theory, each
//! enclosed base theory gets the next level, and the leaf target sorts sit at
//! the highest level. Function symbols are checked against the hierarchy so
//! that no value can flow from a higher level into a lower one except through
//! ground (opaque) terms of leaf sorts.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SortId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SortKind {
    Base,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortDecl {
    pub name: String,
    pub kind: SortKind,
    pub level: u8,
    /// True for sorts interpreted over the integers (native or primed copies).
    pub integer: bool,
    /// True for the per-level boolean sorts injected by the builder.
    pub is_bool: bool,
    /// True for real-valued element sorts (supported through script
    /// emission only; the bounded backend refuses them).
    pub real: bool,
}

/// Roles a function symbol can play. Builtin arithmetic symbols exist once per
/// integer sort; everything the user declares is `User`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FuncKind {
    User,
    True,
    Le,
    Lt,
    EqMod(u64),
    Plus,
    Minus,
    Succ,
    Pred,
    /// Reserved placeholder constant used while the target scheme runs.
    Diamond,
    /// Reserved constant grounding leftover target variables.
    Bot,
    /// Reserved upper-bound constant of a Presburger level.
    Chi,
}

impl FuncKind {
    pub fn is_reserved(self) -> bool {
        matches!(self, FuncKind::Diamond | FuncKind::Bot | FuncKind::Chi)
    }

    pub fn is_arith_op(self) -> bool {
        matches!(
            self,
            FuncKind::Plus | FuncKind::Minus | FuncKind::Succ | FuncKind::Pred
        )
    }

    pub fn is_arith_pred(self) -> bool {
        matches!(self, FuncKind::Le | FuncKind::Lt | FuncKind::EqMod(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncDecl {
    pub name: String,
    pub args: Vec<SortId>,
    pub result: SortId,
    pub kind: FuncKind,
}

#[derive(Debug, Clone, Default)]
pub struct Signature {
    sorts: Vec<SortDecl>,
    funcs: Vec<FuncDecl>,
    sort_names: BTreeMap<String, SortId>,
    func_names: BTreeMap<String, FuncId>,
    /// Highest level in use; sorts at this level are the leaf target sorts.
    leaf_level: u8,
}

fn primes(level: u8) -> String {
    "'".repeat(level as usize)
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    pub fn leaf_level(&self) -> u8 {
        self.leaf_level
    }

    pub fn sorts(&self) -> impl Iterator<Item = (SortId, &SortDecl)> {
        self.sorts.iter().enumerate().map(|(i, d)| (SortId(i as u32), d))
    }

    pub fn funcs(&self) -> impl Iterator<Item = (FuncId, &FuncDecl)> {
        self.funcs.iter().enumerate().map(|(i, d)| (FuncId(i as u32), d))
    }

    pub fn sort(&self, id: SortId) -> &SortDecl {
        &self.sorts[id.0 as usize]
    }

    pub fn func(&self, id: FuncId) -> &FuncDecl {
        &self.funcs[id.0 as usize]
    }

    pub fn sort_by_name(&self, name: &str) -> Option<SortId> {
        self.sort_names.get(name).copied()
    }

    pub fn func_by_name(&self, name: &str) -> Option<FuncId> {
        self.func_names.get(name).copied()
    }

    pub fn level(&self, sort: SortId) -> u8 {
        self.sort(sort).level
    }

    pub fn add_sort(&mut self, name: &str, kind: SortKind, level: u8, integer: bool) -> Result<SortId> {
        self.add_sort_inner(name, kind, level, integer, false)
    }

    fn add_sort_inner(&mut self, name: &str, kind: SortKind, level: u8, integer: bool, is_bool: bool) -> Result<SortId> {
        if self.sort_names.contains_key(name) {
            return Err(Error::Signature(format!("sort `{name}` declared twice")));
        }
        let id = SortId(self.sorts.len() as u32);
        self.sorts.push(SortDecl { name: name.to_string(), kind, level, integer, is_bool, real: false });
        self.sort_names.insert(name.to_string(), id);
        self.leaf_level = self.leaf_level.max(level);
        Ok(id)
    }

    /// Declares a user function symbol, enforcing the level hierarchy: a
    /// result at base level `k` may only take arguments at levels `<= k`,
    /// except that inner base levels (`k >= 1`) may additionally consume leaf
    /// sorts (such terms can only ever occur ground).
    pub fn add_func(&mut self, name: &str, args: Vec<SortId>, result: SortId) -> Result<FuncId> {
        if is_reserved_name(name) {
            return Err(Error::Signature(format!("`{name}` is a reserved symbol name")));
        }
        let rk = self.level(result);
        // Index-valued selects are admitted pending sort copying, which
        // retypes them; the fragment validators reject any uncopied use.
        let pending_copy = name.starts_with("select")
            && self.sort(result).integer
            && args.first().map(|a| self.level(*a) == self.leaf_level).unwrap_or(false);
        if rk < self.leaf_level && !self.sort(result).is_bool && !pending_copy {
            for &a in &args {
                let j = self.level(a);
                if j > rk && (rk == 0 || j < self.leaf_level) {
                    return Err(Error::Signature(format!(
                        "function `{name}` maps a level-{j} argument to a level-{rk} result"
                    )));
                }
            }
        }
        self.add_func_inner(name, args, result, FuncKind::User)
    }

    pub(crate) fn add_func_inner(
        &mut self,
        name: &str,
        args: Vec<SortId>,
        result: SortId,
        kind: FuncKind,
    ) -> Result<FuncId> {
        if self.func_names.contains_key(name) {
            return Err(Error::Signature(format!("function `{name}` declared twice")));
        }
        let id = FuncId(self.funcs.len() as u32);
        self.funcs.push(FuncDecl { name: name.to_string(), args, result, kind });
        self.func_names.insert(name.to_string(), id);
        Ok(id)
    }

    /// The boolean sort owned by `level`, creating it on first use.
    pub fn bool_sort(&mut self, level: u8) -> SortId {
        let name = format!("bool{}", primes(level));
        if let Some(id) = self.sort_by_name(&name) {
            return id;
        }
        let kind = if level < self.leaf_level { SortKind::Base } else { SortKind::Target };
        self.add_sort_inner(&name, kind, level, false, true).expect("fresh bool sort")
    }

    pub fn true_const(&mut self, level: u8) -> FuncId {
        let name = format!("true{}", primes(level));
        if let Some(id) = self.func_by_name(&name) {
            return id;
        }
        let b = self.bool_sort(level);
        self.add_func_inner(&name, vec![], b, FuncKind::True).expect("fresh true")
    }

    /// Installs the arithmetic vocabulary

    /// for an integer sort: ordering and congruence predicates plus the
    /// linear operations, all owned by the sort's level.
    pub fn install_arith(&mut self, sort: SortId, moduli: &[u64]) -> Result<()> {
        let level = self.level(sort);
        let p = primes(level);
        self.true_const(level);
        let b = self.bool_sort(level);
        let defs: Vec<(String, Vec<SortId>, SortId, FuncKind)> = vec![
            (format!("<={p}"), vec![sort, sort], b, FuncKind::Le),
            (format!("<{p}"), vec![sort, sort], b, FuncKind::Lt),
            (format!("+{p}"), vec![sort, sort], sort, FuncKind::Plus),
            (format!("-{p}"), vec![sort, sort], sort, FuncKind::Minus),
            (format!("succ{p}"), vec![sort], sort, FuncKind::Succ),
            (format!("pred{p}"), vec![sort], sort, FuncKind::Pred),
        ];
        for (name, args, result, kind) in defs {
            if self.func_by_name(&name).is_none() {
                self.add_func_inner(&name, args, result, kind)?;
            }
        }
        for &k in moduli {
            self.eqmod(sort, k)?;
        }
        Ok(())
    }

    pub fn eqmod(&mut self, sort: SortId, k: u64) -> Result<FuncId> {
        let level = self.level(sort);
        let name = format!("eqmod{}_{k}", primes(level));
        if let Some(id) = self.func_by_name(&name) {
            return Ok(id);
        }
        let b = self.bool_sort(level);
        self.add_func_inner(&name, vec![sort, sort], b, FuncKind::EqMod(k))
    }

    pub fn arith_func(&self, sort: SortId, want: FuncKind) -> Option<FuncId> {
        self.funcs().find_map(|(id, d)| {
            if d.kind == want && d.args.first().copied().unwrap_or(d.result) == sort && (d.result == sort || self.sort(d.result).is_bool) {
                Some(id)
            } else {
                None
            }
        })
    }

    /// The reserved placeholder constant of a sort, created on demand.
    pub fn diamond(&mut self, sort: SortId) -> FuncId {
        let name = format!("dia_{}", self.sort(sort).name);
        if let Some(id) = self.func_by_name(&name) {
            return id;
        }
        self.add_func_inner(&name, vec![], sort, FuncKind::Diamond).expect("fresh diamond")
    }

    pub fn bot(&mut self, sort: SortId) -> FuncId {
        let name = format!("bot_{}", self.sort(sort).name);
        if let Some(id) = self.func_by_name(&name) {
            return id;
        }
        self.add_func_inner(&name, vec![], sort, FuncKind::Bot).expect("fresh bot")
    }

    pub fn chi(&mut self, sort: SortId) -> FuncId {
        let name = format!("chi{}", primes(self.level(sort)));
        if let Some(id) = self.func_by_name(&name) {
            return id;
        }
        self.add_func_inner(&name, vec![], sort, FuncKind::Chi).expect("fresh chi")
    }

    /// Marks a sort as real-valued.
    pub fn set_real(&mut self, s: SortId) {
        self.sorts[s.0 as usize].real = true;
    }

    /// Changes a function's result sort in place (used by sort copying,
    /// where `select` keeps its identity but produces the element copy).
    pub fn retype_func_result(&mut self, f: FuncId, new_result: SortId) {
        self.funcs[f.0 as usize].result = new_result;
    }

    /// Constants (nullary user or reserved functions) of a given sort.
    pub fn constants_of(&self, sort: SortId) -> Vec<FuncId> {
        self.funcs()
            .filter(|(_, d)| d.args.is_empty() && d.result == sort)
            .map(|(id, _)| id)
            .collect()
    }

    /// Every declared sort must be inhabited by at least one ground term.
    pub fn check_inhabited(&self) -> Result<()> {
        let mut inhabited = vec![false; self.sorts.len()];
        for (i, d) in self.sorts.iter().enumerate() {
            if d.integer || d.is_bool {
                inhabited[i] = true;
            }
        }
        loop {
            let mut changed = false;
            for d in &self.funcs {
                if !inhabited[d.result.0 as usize] && d.args.iter().all(|a| inhabited[a.0 as usize]) {
                    inhabited[d.result.0 as usize] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for (i, d) in self.sorts.iter().enumerate() {
            if !inhabited[i] {
                return Err(Error::Signature(format!(
                    "sort `{}` has no constant symbol",
                    d.name
                )));
            }
        }
        Ok(())
    }
}

pub fn is_reserved_name(name: &str) -> bool {
    name == "true"
        || name.starts_with("chi")
        || name.starts_with("dia_")
        || name.starts_with("bot_")
        || name.starts_with('_')
}

impl fmt::Display for SortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}
