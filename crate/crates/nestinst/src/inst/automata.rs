//! Bottom-up tree automata over a free constructor signature.

use std::collections::{BTreeMap, BTreeSet};

use crate::core::{FuncId, Signature, Term};

/// A bottom-up tree automaton. States are small integers local to the
/// automaton; transitions map a constructor applied to argument states to a
/// result state. Determinism is not required.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TreeAutomaton {
    pub num_states: usize,
    pub final_states: BTreeSet<usize>,
    /// Transitions `f(q_1,...,q_n) -> q`.
    pub transitions: Vec<(FuncId, Vec<usize>, usize)>,
}

impl TreeAutomaton {
    pub fn new(num_states: usize) -> Self {
        TreeAutomaton { num_states, ..Default::default() }
    }

    pub fn add_transition(&mut self, f: FuncId, args: Vec<usize>, result: usize) {
        self.num_states = self
            .num_states
            .max(result + 1)
            .max(args.iter().map(|q| q + 1).max().unwrap_or(0));
        self.transitions.push((f, args, result));
        self.transitions.sort();
        self.transitions.dedup();
    }

    /// Accepts every ground term over the given constructors.
    pub fn universal(constructors: &[FuncId], sig: &Signature) -> Self {
        let mut a = TreeAutomaton::new(1);
        a.final_states.insert(0);
        for &f in constructors {
            let n = sig.func(f).args.len();
            a.add_transition(f, vec![0; n], 0);
        }
        a
    }

    /// Accepts exactly the given ground terms.
    pub fn from_terms(terms: &[Term]) -> Self {
        let mut a = TreeAutomaton::default();
        let mut state_of: BTreeMap<Term, usize> = BTreeMap::new();
        for t in terms {
            let q = build_states(t, &mut state_of, &mut a);
            a.final_states.insert(q);
        }
        a.num_states = a.num_states.max(state_of.len());
        a
    }

    /// The set of states reachable on `t`, bottom-up.
    pub fn run(&self, t: &Term) -> BTreeSet<usize> {
        match t {
            Term::App(f, args) => {
                let arg_states: Vec<BTreeSet<usize>> = args.iter().map(|a| self.run(a)).collect();
                let mut out = BTreeSet::new();
                for (g, qs, q) in &self.transitions {
                    if g == f
                        && qs.len() == arg_states.len()
                        && qs.iter().zip(&arg_states).all(|(q, set)| set.contains(q))
                    {
                        out.insert(*q);
                    }
                }
                out
            }
            _ => BTreeSet::new(),
        }
    }

    pub fn accepts(&self, t: &Term) -> bool {
        self.run(t).iter().any(|q| self.final_states.contains(q))
    }
}

fn build_states(t: &Term, state_of: &mut BTreeMap<Term, usize>, a: &mut TreeAutomaton) -> usize {
    if let Some(q) = state_of.get(t) {
        return *q;
    }
    let Term::App(f, args) = t else {
        panic!("finite-set automata require ground constructor terms");
    };
    let arg_states: Vec<usize> = args.iter().map(|s| build_states(s, state_of, a)).collect();
    let q = state_of.len();
    state_of.insert(t.clone(), q);
    a.add_transition(*f, arg_states, q);
    q
}

/// Product construction accepting the intersection of all languages. The
/// empty intersection is the universal language over `constructors`.
pub fn intersect(sig: &Signature, constructors: &[FuncId], automata: &[&TreeAutomaton]) -> TreeAutomaton {
    match automata {
        [] => TreeAutomaton::universal(constructors, sig),
        [a] => (*a).clone(),
        [first, rest @ ..] => {
            let mut acc = (*first).clone();
            for b in rest {
                acc = product(&acc, b);
            }
            acc
        }
    }
}

fn product(a: &TreeAutomaton, b: &TreeAutomaton) -> TreeAutomaton {
    let pair = |qa: usize, qb: usize| qa * b.num_states + qb;
    let mut out = TreeAutomaton::new(a.num_states.max(1) * b.num_states.max(1));
    for qa in &a.final_states {
        for qb in &b.final_states {
            out.final_states.insert(pair(*qa, *qb));
        }
    }
    for (f, qs_a, q_a) in &a.transitions {
        for (g, qs_b, q_b) in &b.transitions {
            if f == g && qs_a.len() == qs_b.len() {
                let args = qs_a.iter().zip(qs_b).map(|(x, y)| pair(*x, *y)).collect();
                out.transitions.push((*f, args, pair(*q_a, *q_b)));
            }
        }
    }
    out.transitions.sort();
    out.transitions.dedup();
    out
}

/// Term ordering used to break witness ties: size first, then constructor
/// names lexicographically, recursing over arguments.
fn term_order(sig: &Signature, s: &Term, t: &Term) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let size = |u: &Term| u.subterms().len();
    match size(s).cmp(&size(t)) {
        Ordering::Equal => {}
        o => return o,
    }
    match (s, t) {
        (Term::App(f, fa), Term::App(g, ga)) => {
            match sig.func(*f).name.cmp(&sig.func(*g).name) {
                Ordering::Equal => {}
                o => return o,
            }
            for (x, y) in fa.iter().zip(ga) {
                match term_order(sig, x, y) {
                    Ordering::Equal => {}
                    o => return o,
                }
            }
            Ordering::Equal
        }
        _ => Ordering::Equal,
    }
}

/// A minimal accepted ground term, or `None` when the language is empty.
/// Minimality is by term size with lexicographic tie-breaking, so the
/// witness is deterministic.
pub fn emptiness_witness(sig: &Signature, automaton: &TreeAutomaton) -> Option<Term> {
    let n = automaton.num_states;
    let mut best: Vec<Option<Term>> = vec![None; n];
    loop {
        let mut changed = false;
        for (f, qs, q) in &automaton.transitions {
            let args: Option<Vec<Term>> = qs.iter().map(|s| best[*s].clone()).collect();
            let Some(args) = args else { continue };
            let cand = Term::App(*f, args);
            let better = match &best[*q] {
                None => true,
                Some(cur) => term_order(sig, &cand, cur) == std::cmp::Ordering::Less,
            };
            if better {
                best[*q] = Some(cand);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    automaton
        .final_states
        .iter()
        .filter_map(|q| best[*q].clone())
        .min_by(|a, b| term_order(sig, a, b))
}
