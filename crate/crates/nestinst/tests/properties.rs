//! Randomized property suites: instantiation soundness, pool monotonicity
//! and disjunction stability, preservation under base-term renamings, and
//! desk-scale equisatisfiability against the bounded oracle.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use nestinst::backend::{bounded_model_search, GroundProblem, Verdict};
use nestinst::combine::CombinedProcedure;
use nestinst::core::{
    match_clause, BMapping, Clause, FuncId, Literal, Signature, SortId, SortKind, Substitution,
    Term, Var,
};
use nestinst::frame::spec::{BaseLevel, BaseScheme};
use nestinst::frame::{le_literal, normalize_linear};
use nestinst::inst::automata::{emptiness_witness, intersect, TreeAutomaton};
use nestinst::inst::membership::{self, MembershipFragment};
use nestinst::inst::presburger::{compute_pool, theta_z, validate_fragment};
use nestinst::inst::target::{HyperLinking, TargetProcedure};

/// Fixture: one integer base sort, one free target sort, a couple of
/// predicates and constants.
struct Fx {
    sig: Signature,
    nat: SortId,
    elem: SortId,
    p: FuncId,
    q: FuncId,
    elems: Vec<FuncId>,
}

fn fx() -> Fx {
    let mut sig = Signature::new();
    let nat = sig.add_sort("nat", SortKind::Base, 0, true).unwrap();
    let elem = sig.add_sort("elem", SortKind::Target, 1, false).unwrap();
    sig.install_arith(nat, &[2]).unwrap();
    sig.true_const(1);
    let b1 = sig.bool_sort(1);
    let p = sig.add_func("p", vec![nat, elem], b1).unwrap();
    let q = sig.add_func("q", vec![elem], b1).unwrap();
    let elems = (0..2)
        .map(|i| sig.add_func(&format!("c{i}"), vec![], elem).unwrap())
        .collect();
    Fx { sig, nat, elem, p, q, elems }
}

fn tt(sig: &Signature, level: u8) -> Term {
    Term::cst(sig.func_by_name(&format!("true{}", "'".repeat(level as usize))).unwrap())
}

/// Random clause in the guarded fragment: numeral bounds, an optional
/// congruence, and predicate literals over the free sort.
fn random_clause(fx: &Fx, rng: &mut StdRng, allow_target: bool) -> Clause {
    let mut lits = Vec::new();
    let n_vars = rng.random_range(0..=2usize);
    let vars: Vec<Var> = (0..n_vars).map(|i| Var::new(format!("x{i}"), fx.nat)).collect();
    let n_lits = rng.random_range(1..=3usize);
    let eqmod2 = fx.sig.func_by_name("eqmod_2").unwrap();
    for _ in 0..n_lits {
        let k = Term::Num(rng.random_range(0..=4i64), fx.nat);
        let choice = rng.random_range(0..5u8);
        match choice {
            0 if !vars.is_empty() => {
                let v = Term::Var(vars[rng.random_range(0..vars.len())].clone());
                if rng.random_bool(0.5) {
                    lits.push(le_literal(&fx.sig, false, v, k));
                } else {
                    lits.push(le_literal(&fx.sig, false, k, v));
                }
            }
            1 if vars.len() == 2 => {
                lits.push(le_literal(
                    &fx.sig,
                    false,
                    Term::Var(vars[0].clone()),
                    Term::Var(vars[1].clone()),
                ));
            }
            2 if !vars.is_empty() => {
                let v = Term::Var(vars[rng.random_range(0..vars.len())].clone());
                lits.push(Literal::new(
                    false,
                    Term::App(eqmod2, vec![v, k]),
                    tt(&fx.sig, 0),
                ));
            }
            3 if allow_target => {
                // Predicate literal over a guard variable or a numeral.
                let idx = if !vars.is_empty() && rng.random_bool(0.7) {
                    Term::Var(vars[rng.random_range(0..vars.len())].clone())
                } else {
                    k.clone()
                };
                let e = Term::cst(fx.elems[rng.random_range(0..fx.elems.len())]);
                lits.push(Literal::new(
                    rng.random_bool(0.5),
                    Term::App(fx.p, vec![idx, e]),
                    tt(&fx.sig, 1),
                ));
            }
            _ => {
                // Ground comparison.
                let k2 = Term::Num(rng.random_range(0..=4i64), fx.nat);
                lits.push(le_literal(&fx.sig, rng.random_bool(0.5), k, k2));
            }
        }
    }
    Clause::new(lits)
}

fn base_only(fx: &Fx, rng: &mut StdRng, n: usize) -> Vec<Clause> {
    (0..n).map(|_| random_clause(fx, rng, false)).collect()
}

/// Instantiation soundness: every produced instance matches a ground
/// instance of its origin clause, checked extensionally by matching.
#[test]
fn soundness_of_combined_instances() {
    let mut rng = StdRng::seed_from_u64(11);
    let mut checked = 0usize;
    for round in 0..200 {
        let f = fx();
        let mut sig = f.sig.clone();
        let n = rng.random_range(1..=3usize);
        let clauses: Vec<Clause> = (0..n)
            .map(|_| {
                let c = random_clause(&f, &mut rng, true);
                nestinst::frame::passes::normalize_literals(&sig, &[c]).remove(0)
            })
            .collect();
        let proc = CombinedProcedure::new(
            BaseLevel { level: 0, sort: f.nat, scheme: BaseScheme::Presburger { modulus_cap: 64 } },
            Box::new(HyperLinking::default()),
            round % 2 == 0,
        );
        let Ok(out) = proc.combine(&mut sig, &clauses) else {
            continue; // fragment rejection is fine for random input
        };
        for inst in &out.instances {
            let matched = clauses.iter().any(|origin| {
                // Instances of an origin with variables are recovered by
                // matching; ground origins must reappear verbatim.
                if origin.vars().is_empty() {
                    origin == inst
                } else {
                    !match_clause(origin, inst).is_empty()
                }
            });
            assert!(
                matched,
                "instance {} does not match any input clause",
                inst.display(&sig)
            );
            checked += 1;
        }
    }
    assert!(checked > 200, "only {checked} instances checked");
    println!("PROPERTY soundness: {checked} instances matched");
}

/// Pool monotonicity: adding clauses only grows the pool and the instance
/// set.
#[test]
fn presburger_pool_monotonicity() {
    let mut rng = StdRng::seed_from_u64(23);
    let mut runs = 0;
    for _ in 0..100 {
        let f = fx();
        let mut sig = f.sig.clone();
        let n1 = rng.random_range(1..=2usize);
        let small = base_only(&f, &mut rng, n1);
        let mut large = small.clone();
        let n2 = rng.random_range(1..=2usize);
        large.extend(base_only(&f, &mut rng, n2));
        let (Ok(frag_s), Ok(frag_l)) = (
            validate_fragment(&sig, &small, f.nat, 64),
            validate_fragment(&sig, &large, f.nat, 64),
        ) else {
            continue;
        };
        let pool_s = compute_pool(&mut sig, &small, &frag_s, false).unwrap();
        let pool_l = compute_pool(&mut sig, &large, &frag_l, false).unwrap();
        let ps: BTreeSet<_> = pool_s.pool.iter().cloned().collect();
        let pl: BTreeSet<_> = pool_l.pool.iter().cloned().collect();
        assert!(ps.is_subset(&pl), "pool not monotone");
        let out_s = theta_z(&mut sig, &small, &frag_s, false).unwrap();
        let out_l = theta_z(&mut sig, &large, &frag_l, false).unwrap();
        let is_: BTreeSet<_> = out_s.instances.iter().cloned().collect();
        let il: BTreeSet<_> = out_l.instances.iter().cloned().collect();
        assert!(is_.is_subset(&il), "instances not monotone");
        runs += 1;
    }
    assert!(runs >= 80, "too few valid runs: {runs}");
    println!("PROPERTY pool monotonicity: {runs} pairs");
}

/// Disjunction stability: disjoining pure instances of existing clauses
/// leaves the pool unchanged.
#[test]
fn presburger_disjunction_stability() {
    let mut rng = StdRng::seed_from_u64(37);
    let mut runs = 0;
    for _ in 0..100 {
        let f = fx();
        let mut sig = f.sig.clone();
        let nb = rng.random_range(1..=3usize);
        let base = base_only(&f, &mut rng, nb);
        let Ok(frag) = validate_fragment(&sig, &base, f.nat, 64) else { continue };
        let pool = compute_pool(&mut sig, &base, &frag, false).unwrap();
        // Sample a disjunction of pure (variable-renamed, possibly merged)
        // instances of the base clauses.
        let mut big = base.clone();
        for sample in 0..rng.random_range(1..=3usize) {
            let mut lits = Vec::new();
            for _ in 0..rng.random_range(1..=2usize) {
                let c = &base[rng.random_range(0..base.len())];
                let vars: Vec<Var> = c.vars().into_iter().collect();
                let renaming = Substitution::from_pairs(vars.iter().map(|v| {
                    let fresh = rng.random_range(0..3u8);
                    (v.clone(), Term::var(format!("y{sample}_{fresh}"), v.sort))
                }));
                lits.extend(renaming.apply_clause(c).literals().iter().cloned());
            }
            big.push(Clause::new(lits));
        }
        let Ok(frag_big) = validate_fragment(&sig, &big, f.nat, 64) else { continue };
        let pool_big = compute_pool(&mut sig, &big, &frag_big, false).unwrap();
        assert_eq!(pool.base_terms, pool_big.base_terms, "base terms changed");
        assert_eq!(pool.pool, pool_big.pool, "pool changed under disjunctive closure");
        runs += 1;
    }
    assert!(runs >= 80, "too few valid runs: {runs}");
    println!("PROPERTY disjunction stability: {runs} closures");
}

/// Collects the maximal ground base terms occurring in a clause set.
fn ground_base_terms(sig: &Signature, clauses: &[Clause], nat: SortId) -> Vec<Term> {
    let mut out = BTreeSet::new();
    for c in clauses {
        for l in c.literals() {
            for side in [&l.lhs, &l.rhs] {
                for sub in side.subterms() {
                    if sub.is_ground() && sub.sort(sig) == nat {
                        out.insert((*sub).clone());
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Preservation: renaming ground base terms commutes with saturation, i.e.
/// the image of every instance under the renaming is derivable from the
/// renamed input.
#[test]
fn hyperlinking_preserves_base_renamings() {
    let mut rng = StdRng::seed_from_u64(41);
    let mut runs = 0;
    'outer: for _ in 0..100 {
        let f = fx();
        let mut sig = f.sig.clone();
        let dia = Term::cst(sig.diamond(f.nat));
        // Base-ground clause set: indices are numerals or the placeholder.
        let n = rng.random_range(1..=3usize);
        let mut clauses = Vec::new();
        for _ in 0..n {
            let mut lits = Vec::new();
            for _ in 0..rng.random_range(1..=2usize) {
                let idx = if rng.random_bool(0.5) {
                    dia.clone()
                } else {
                    Term::Num(rng.random_range(0..=2i64), f.nat)
                };
                let e = if rng.random_bool(0.5) {
                    Term::cst(f.elems[rng.random_range(0..f.elems.len())])
                } else {
                    Term::var(format!("v{}", rng.random_range(0..2u8)), f.elem)
                };
                lits.push(Literal::new(
                    rng.random_bool(0.5),
                    Term::App(f.p, vec![idx, e]),
                    tt(&sig, 1),
                ));
            }
            clauses.push(Clause::new(lits));
        }
        let proc = HyperLinking::default();
        let Ok(out) = proc.apply(&mut sig, &clauses) else { continue };
        if out.incomplete {
            continue;
        }
        // Random renaming of the ground base terms.
        let pool = ground_base_terms(&sig, &clauses, f.nat);
        let mut gamma = BMapping::new();
        for t in &pool {
            let img = if rng.random_bool(0.4) {
                dia.clone()
            } else {
                Term::Num(rng.random_range(0..=2i64), f.nat)
            };
            gamma.insert(t.clone(), img);
        }
        let renamed: Vec<Clause> = clauses.iter().map(|c| gamma.map_clause(&sig, c)).collect();
        let Ok(out_renamed) = proc.apply(&mut sig, &renamed) else { continue };
        if out_renamed.incomplete {
            continue;
        }
        let image: BTreeSet<Clause> = out_renamed.instances.iter().cloned().collect();
        for inst in &out.instances {
            let mapped = gamma.map_clause(&sig, inst);
            if !image.contains(&mapped) {
                panic!(
                    "renamed instance {} missing from saturation of the renamed set",
                    mapped.display(&sig)
                );
            }
        }
        runs += 1;
        if runs >= 100 {
            break 'outer;
        }
    }
    assert!(runs >= 60, "too few fixpoint runs: {runs}");
    println!("PROPERTY preservation (saturation): {runs} renamings");
}

/// Preservation for the full combined procedure under renamings of the
/// occurring ground base terms. The renaming translates every numeral
/// uniformly, so it respects the offsets the pool derives from the guards.
#[test]
fn combined_preserves_base_renamings() {
    fn shift_term(t: &Term, s: i64) -> Term {
        match t {
            Term::Num(n, sort) => Term::Num(n + s, *sort),
            Term::App(f, args) => {
                Term::App(*f, args.iter().map(|a| shift_term(a, s)).collect())
            }
            Term::Var(_) => t.clone(),
        }
    }
    fn shift_clause(c: &Clause, s: i64) -> Clause {
        c.literals()
            .iter()
            .map(|l| Literal::new(l.pos, shift_term(&l.lhs, s), shift_term(&l.rhs, s)))
            .collect()
    }
    let mut rng = StdRng::seed_from_u64(43);
    let mut runs = 0;
    for _ in 0..100 {
        let f = fx();
        let mut sig = f.sig.clone();
        let clauses: Vec<Clause> = (0..rng.random_range(1..=2usize))
            .map(|_| {
                let c = random_clause(&f, &mut rng, true);
                nestinst::frame::passes::normalize_literals(&sig, &[c]).remove(0)
            })
            .collect();
        let proc = CombinedProcedure::new(
            BaseLevel { level: 0, sort: f.nat, scheme: BaseScheme::Presburger { modulus_cap: 64 } },
            Box::new(HyperLinking::default()),
            true,
        );
        let Ok(out) = proc.combine(&mut sig, &clauses) else { continue };
        if out.incomplete {
            continue;
        }
        let shift = rng.random_range(0..=2i64);
        let renamed: Vec<Clause> = clauses.iter().map(|c| shift_clause(c, shift)).collect();
        let Ok(out_renamed) = proc.combine(&mut sig, &renamed) else { continue };
        let image: BTreeSet<Clause> = out_renamed.instances.iter().cloned().collect();
        for inst in &out.instances {
            let mapped = shift_clause(inst, shift);
            assert!(
                image.contains(&mapped),
                "combined instance image {} missing",
                mapped.display(&sig)
            );
        }
        runs += 1;
    }
    assert!(runs >= 60, "too few runs: {runs}");
    println!("PROPERTY preservation (combined): {runs} renamings");
}

/// Ground expansion of a quantified clause set over a finite window: integer
/// variables range over the window, free variables over the declared
/// constants.
fn expand_over_window(
    sig: &Signature,
    clauses: &[Clause],
    window: (i64, i64),
    elems: &[FuncId],
    nat: SortId,
    elem: SortId,
) -> Vec<Clause> {
    let mut out = Vec::new();
    for clause in clauses {
        let vars: Vec<Var> = clause.vars().into_iter().collect();
        let mut assignments: Vec<Substitution> = vec![Substitution::new()];
        for v in &vars {
            let candidates: Vec<Term> = if v.sort == nat {
                (window.0..=window.1).map(|k| Term::Num(k, nat)).collect()
            } else if v.sort == elem {
                elems.iter().map(|e| Term::cst(*e)).collect()
            } else {
                panic!("unexpected sort in expansion");
            };
            let mut next = Vec::with_capacity(assignments.len() * candidates.len());
            for a in &assignments {
                for c in &candidates {
                    let mut s = a.clone();
                    s.bind(v.clone(), c.clone());
                    next.push(s);
                }
            }
            assignments = next;
        }
        for a in assignments {
            out.push(a.apply_clause(clause));
        }
    }
    out
}

/// Desk-scale equisatisfiability: on random hierarchic problems with a
/// finite target universe, the bounded search agrees on satisfiability
/// between the window expansion of the input and the combined instance set.
#[test]
fn combined_equisatisfiable_with_input() {
    let mut rng = StdRng::seed_from_u64(53);
    let window = (-3i64, 7i64);
    let mut runs = 0;
    let mut sat = 0;
    while runs < 50 {
        let f = fx();
        let mut sig = f.sig.clone();
        let clauses: Vec<Clause> = (0..rng.random_range(1..=3usize))
            .map(|_| {
                let c = random_clause(&f, &mut rng, true);
                nestinst::frame::passes::normalize_literals(&sig, &[c]).remove(0)
            })
            .collect();
        let proc = CombinedProcedure::new(
            BaseLevel { level: 0, sort: f.nat, scheme: BaseScheme::Presburger { modulus_cap: 64 } },
            Box::new(HyperLinking::default()),
            false,
        );
        let Ok(out) = proc.combine(&mut sig, &clauses) else { continue };
        if out.incomplete {
            continue;
        }
        let expansion = expand_over_window(&sig, &clauses, window, &f.elems, f.nat, f.elem);
        let direct = GroundProblem::new(sig.clone(), expansion, vec![]).unwrap();
        let v_direct = bounded_model_search(&direct, window, 4, 20_000_000).unwrap();
        let mut inst = GroundProblem::new(sig.clone(), out.instances.clone(), out.aux_axioms.clone()).unwrap();
        inst.herbrand_sorts = BTreeSet::new();
        let v_inst = bounded_model_search(&inst, window, 4, 20_000_000).unwrap();
        let agree = matches!(
            (&v_direct, &v_inst),
            (Verdict::Sat(_), Verdict::Sat(_))
                | (Verdict::UnsatWithinBounds { .. }, Verdict::UnsatWithinBounds { .. })
        );
        assert!(
            agree,
            "disagreement: direct {:?} vs instances {:?} on {:?}",
            v_direct.kind(),
            v_inst.kind(),
            clauses.iter().map(|c| c.display(&sig).to_string()).collect::<Vec<_>>()
        );
        if matches!(v_direct, Verdict::Sat(_)) {
            sat += 1;
        }
        runs += 1;
    }
    // Both verdicts must actually occur for the suite to mean anything.
    assert!(sat > 5 && sat < 45, "degenerate sample: {sat}/50 satisfiable");
    println!("PROPERTY equisatisfiability: 50 problems, {sat} satisfiable");
}

/// Random bottom-up automaton over z/0, f/1, g/1.
fn random_automaton(rng: &mut StdRng, ctors: &[(FuncId, usize)]) -> TreeAutomaton {
    let states = rng.random_range(1..=2usize);
    let mut auto = TreeAutomaton::new(states);
    for (fid, arity) in ctors {
        // Each constructor gets at least one transition to keep languages
        // inhabited most of the time.
        let n = rng.random_range(1..=2usize);
        for _ in 0..n {
            let args: Vec<usize> = (0..*arity).map(|_| rng.random_range(0..states)).collect();
            auto.add_transition(*fid, args, rng.random_range(0..states));
        }
    }
    auto.final_states.insert(rng.random_range(0..states));
    auto
}

/// Membership suite: every subset witness is accepted by its predicates, and
/// the instantiated set agrees with the depth-bounded evaluation of the
/// quantified input.
#[test]
fn membership_witnesses_and_equisatisfiability() {
    let mut rng = StdRng::seed_from_u64(61);
    let mut runs = 0;
    let mut unsat = 0;
    while runs < 50 {
        let mut sig = Signature::new();
        let alg = sig.add_sort("alg", SortKind::Base, 0, false).unwrap();
        let _elem = sig.add_sort("elem", SortKind::Target, 1, false).unwrap();
        sig.true_const(0);
        let b0 = sig.bool_sort(0);
        let z = sig.add_func("z", vec![], alg).unwrap();
        let fc = sig.add_func("f", vec![alg], alg).unwrap();
        let ctors = [(z, 0usize), (fc, 1usize)];
        let n_preds = rng.random_range(1..=3usize);
        let mut predicates = Vec::new();
        for i in 0..n_preds {
            let pid = sig.add_func(&format!("m{i}"), vec![alg], b0).unwrap();
            predicates.push((pid, random_automaton(&mut rng, &ctors)));
        }
        // Random ground terms up to depth 2 for disequalities.
        let mut ground = vec![Term::cst(z)];
        for _ in 0..2 {
            let last = ground.last().unwrap().clone();
            ground.push(Term::App(fc, vec![last]));
        }
        let truec = tt(&sig, 0);
        let mut clauses = Vec::new();
        for _ in 0..rng.random_range(1..=3usize) {
            let mut lits = Vec::new();
            for _ in 0..rng.random_range(1..=2usize) {
                let x = Term::var("x", alg);
                match rng.random_range(0..3u8) {
                    0 => {
                        let (pid, _) = predicates[rng.random_range(0..predicates.len())];
                        lits.push(Literal::new(false, Term::App(pid, vec![x]), truec.clone()));
                    }
                    1 => {
                        let t = ground[rng.random_range(0..ground.len())].clone();
                        lits.push(Literal::neq(x, t));
                    }
                    _ => {
                        let (pid, _) = predicates[rng.random_range(0..predicates.len())];
                        let t = ground[rng.random_range(0..ground.len())].clone();
                        lits.push(Literal::new(
                            rng.random_bool(0.5),
                            Term::App(pid, vec![t]),
                            truec.clone(),
                        ));
                    }
                }
            }
            clauses.push(Clause::new(lits));
        }
        let fragment = membership::validate_fragment(
            &sig,
            &clauses,
            alg,
            &predicates,
            &[z, fc],
        )
        .unwrap();
        // Witness check: every subset witness is accepted by every automaton
        // of the subset.
        for mask in 1u64..(1 << n_preds) {
            let members: Vec<&TreeAutomaton> = predicates
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, (_, a))| a)
                .collect();
            let inter = intersect(&sig, &[z, fc], &members);
            if let Some(w) = emptiness_witness(&sig, &inter) {
                for a in &members {
                    assert!(a.accepts(&w), "witness not accepted by its predicate");
                }
            }
        }
        let out = membership::theta_in(&sig, &clauses, &fragment, 12).unwrap();
        // Fixed-interpretation evaluation: the instantiated set's verdict.
        let herb: BTreeSet<SortId> = [alg].into_iter().collect();
        let eval_set = |cs: &[Clause]| -> bool {
            cs.iter().all(|c| {
                c.literals().iter().any(|l| {
                    nestinst::frame::passes::eval_ground_literal(&sig, l, &herb, &predicates)
                        == Some(true)
                })
            })
        };
        let inst_sat = eval_set(&out.instances);
        // Depth-5 oracle: enumerate ground terms and check every clause at
        // every assignment.
        let mut universe = vec![Term::cst(z)];
        for _ in 0..5 {
            let next = Term::App(fc, vec![universe.last().unwrap().clone()]);
            universe.push(next);
        }
        let oracle_sat = clauses.iter().all(|c| {
            let vars: Vec<Var> = c.vars().into_iter().collect();
            if vars.is_empty() {
                return c
                    .literals()
                    .iter()
                    .any(|l| nestinst::frame::passes::eval_ground_literal(&sig, l, &herb, &predicates) == Some(true));
            }
            universe.iter().all(|t| {
                let subst = Substitution::singleton(vars[0].clone(), t.clone());
                let g = subst.apply_clause(c);
                g.literals().iter().any(|l| {
                    nestinst::frame::passes::eval_ground_literal(&sig, l, &herb, &predicates)
                        == Some(true)
                })
            })
        });
        assert_eq!(
            inst_sat, oracle_sat,
            "membership disagreement on {:?}",
            clauses.iter().map(|c| c.display(&sig).to_string()).collect::<Vec<_>>()
        );
        if !oracle_sat {
            unsat += 1;
        }
        runs += 1;
    }
    assert!(unsat > 5 && unsat < 45, "degenerate sample: {unsat}/50 unsatisfiable");
    println!("PROPERTY membership: 50 problems, {unsat} unsatisfiable");
}

/// Membership pools are finite and monotone in the clause set.
#[test]
fn membership_pool_monotone() {
    let mut rng = StdRng::seed_from_u64(67);
    for _ in 0..50 {
        let mut sig = Signature::new();
        let alg = sig.add_sort("alg", SortKind::Base, 0, false).unwrap();
        sig.true_const(0);
        let b0 = sig.bool_sort(0);
        let z = sig.add_func("z", vec![], alg).unwrap();
        let fc = sig.add_func("f", vec![alg], alg).unwrap();
        let pid = sig.add_func("m0", vec![alg], b0).unwrap();
        let auto = random_automaton(&mut rng, &[(z, 0), (fc, 1)]);
        let mut ground = vec![Term::cst(z)];
        for _ in 0..3 {
            ground.push(Term::App(fc, vec![ground.last().unwrap().clone()]));
        }
        let neq = |t: &Term| Clause::new(vec![Literal::neq(Term::var("x", alg), t.clone())]);
        let small = vec![neq(&ground[rng.random_range(0..2)])];
        let mut large = small.clone();
        large.push(neq(&ground[rng.random_range(0..ground.len())]));
        let frag = |cs: &[Clause]| MembershipFragment {
            sort: alg,
            constructors: vec![z, fc],
            predicates: vec![(pid, auto.clone())],
            neq_terms: cs
                .iter()
                .flat_map(|c| c.literals())
                .filter_map(|l| if l.rhs.is_ground() { Some(l.rhs.clone()) } else { None })
                .collect(),
        };
        let ps: BTreeSet<Term> =
            membership::compute_g_in(&sig, &frag(&small), 12).unwrap().into_iter().collect();
        let pl: BTreeSet<Term> =
            membership::compute_g_in(&sig, &frag(&large), 12).unwrap().into_iter().collect();
        assert!(ps.is_subset(&pl));
        assert!(pl.len() < 32, "pool unexpectedly large");
    }
    println!("PROPERTY membership pool monotone: 50 pairs");
}

/// Substitution decomposition round-trips on random ground substitutions.
#[test]
fn decomposition_round_trip() {
    let mut rng = StdRng::seed_from_u64(71);
    let f = fx();
    let mut sig = f.sig.clone();
    let g = sig.add_func("g", vec![f.elem, f.nat], f.elem).unwrap();
    for _ in 0..200 {
        let mut subst = Substitution::new();
        let n = rng.random_range(1..=3usize);
        for i in 0..n {
            if rng.random_bool(0.5) {
                let depth = rng.random_range(0..=2usize);
                let mut t = Term::cst(f.elems[rng.random_range(0..f.elems.len())]);
                for _ in 0..depth {
                    t = Term::App(g, vec![t, Term::Num(rng.random_range(0..=3i64), f.nat)]);
                }
                subst.bind(Var::new(format!("e{i}"), f.elem), t);
            } else {
                subst.bind(
                    Var::new(format!("n{i}"), f.nat),
                    Term::Num(rng.random_range(0..=3i64), f.nat),
                );
            }
        }
        let (target, base) = nestinst::core::decompose_ground_subst(&sig, &subst).unwrap();
        for (v, img) in subst.iter() {
            let via = base.apply_term(&target.apply_term(&Term::Var(v.clone())));
            assert_eq!(&via, img, "round trip failed for {}", v.name);
        }
        // The target half never keeps a non-variable base subterm.
        for (_, img) in target.iter() {
            for sub in img.subterms() {
                if sig.sort(sub.sort(&sig)).kind == SortKind::Base {
                    assert!(
                        matches!(sub, Term::Var(_)),
                        "base subterm {} left in the target half",
                        sub.display(&sig)
                    );
                }
            }
        }
    }
    println!("PROPERTY decomposition round trip: 200 substitutions");
}

/// Matching agrees with a brute-force enumeration of substitutions built
/// from the ground clause's subterms.
#[test]
fn match_clause_vs_brute_force() {
    let mut rng = StdRng::seed_from_u64(73);
    let f = fx();
    let sig = &f.sig;
    let truec = tt(sig, 1);
    for _ in 0..300 {
        // Pattern: up to 3 literals over p(nat numeral or var, elem var or
        // constant).
        let mut pattern_lits = Vec::new();
        for _ in 0..rng.random_range(1..=3usize) {
            let idx = if rng.random_bool(0.4) {
                Term::Num(rng.random_range(0..=1i64), f.nat)
            } else {
                Term::var(format!("i{}", rng.random_range(0..2u8)), f.nat)
            };
            let e = if rng.random_bool(0.4) {
                Term::cst(f.elems[rng.random_range(0..f.elems.len())])
            } else {
                Term::var(format!("e{}", rng.random_range(0..2u8)), f.elem)
            };
            pattern_lits.push(Literal::new(
                rng.random_bool(0.7),
                Term::App(f.p, vec![idx, e]),
                truec.clone(),
            ));
        }
        let pattern = Clause::new(pattern_lits);
        // Ground clause of up to 3 literals.
        let mut ground_lits = Vec::new();
        for _ in 0..rng.random_range(1..=3usize) {
            ground_lits.push(Literal::new(
                rng.random_bool(0.7),
                Term::App(
                    f.p,
                    vec![
                        Term::Num(rng.random_range(0..=1i64), f.nat),
                        Term::cst(f.elems[rng.random_range(0..f.elems.len())]),
                    ],
                ),
                truec.clone(),
            ));
        }
        let ground = Clause::new(ground_lits);
        let found: BTreeSet<Substitution> = match_clause(&pattern, &ground).into_iter().collect();
        // Brute force: all substitutions from the pattern variables into the
        // ground clause's subterms of matching sort.
        let mut nat_candidates = BTreeSet::new();
        let mut elem_candidates = BTreeSet::new();
        for l in ground.literals() {
            for sub in l.lhs.subterms() {
                if sub.sort(sig) == f.nat {
                    nat_candidates.insert(sub.clone());
                }
                if sub.sort(sig) == f.elem {
                    elem_candidates.insert(sub.clone());
                }
            }
        }
        let vars: Vec<Var> = pattern.vars().into_iter().collect();
        let mut all = vec![Substitution::new()];
        for v in &vars {
            let cands: Vec<Term> = if v.sort == f.nat {
                nat_candidates.iter().cloned().collect()
            } else {
                elem_candidates.iter().cloned().collect()
            };
            let mut next = Vec::new();
            for a in &all {
                for c in &cands {
                    let mut s = a.clone();
                    s.bind(v.clone(), c.clone());
                    next.push(s);
                }
            }
            all = next;
        }
        let brute: BTreeSet<Substitution> = all
            .into_iter()
            .filter(|s| &s.apply_clause(&pattern) == &ground)
            .collect();
        assert_eq!(found, brute, "matching disagrees with brute force");
    }
    println!("PROPERTY matching vs brute force: 300 cases");
}

/// Shift transport: evaluating an original clause at an assignment agrees
/// with evaluating its shifted image at the translated assignment, for any
/// interpretation of the arrays. Pointwise equivalence of the images gives
/// equisatisfiability of the sets.
#[test]
fn shift_preserves_verdicts() {
    let mut rng = StdRng::seed_from_u64(79);
    let mut runs = 0;
    let mut falsified = 0usize;
    let mut satisfied = 0usize;
    while runs < 40 {
        let mut sig = Signature::new();
        let nat = sig.add_sort("nat", SortKind::Base, 0, true).unwrap();
        let arr = sig.add_sort("array", SortKind::Target, 1, false).unwrap();
        let val = sig.add_sort("val", SortKind::Target, 1, false).unwrap();
        sig.install_arith(nat, &[]).unwrap();
        sig.true_const(1);
        let select = sig.add_func("select", vec![arr, nat], val).unwrap();
        let arrays: Vec<FuncId> = (0..2)
            .map(|i| sig.add_func(&format!("t{i}"), vec![], arr).unwrap())
            .collect();
        let v0 = sig.add_func("v0", vec![], val).unwrap();
        let offsets: Vec<i64> = arrays.iter().map(|_| rng.random_range(0..=3i64)).collect();
        let sel = |a: usize, i: Term| Term::App(select, vec![Term::cst(arrays[a]), i]);
        let mut clauses = Vec::new();
        let mut var_arrays: Vec<std::collections::BTreeMap<String, usize>> = Vec::new();
        for ci in 0..rng.random_range(1..=3usize) {
            let x = Term::var(format!("x{ci}"), nat);
            let y = Term::var(format!("y{ci}"), nat);
            let a = rng.random_range(0..2usize);
            let b = rng.random_range(0..2usize);
            let mut lits = vec![
                le_literal(
                    &sig,
                    false,
                    x.clone(),
                    Term::App(
                        sig.arith_func(nat, nestinst::core::FuncKind::Plus).unwrap(),
                        vec![y.clone(), Term::Num(offsets[a] - offsets[b], nat)],
                    ),
                ),
                Literal::new(rng.random_bool(0.7), sel(a, x.clone()), sel(b, y.clone())),
            ];
            if rng.random_bool(0.5) {
                lits.push(le_literal(
                    &sig,
                    false,
                    x.clone(),
                    Term::Num(rng.random_range(0..=8i64), nat),
                ));
            }
            if rng.random_bool(0.3) {
                lits.push(Literal::new(rng.random_bool(0.5), sel(a, x.clone()), Term::cst(v0)));
            }
            var_arrays.push(
                [(format!("x{ci}"), a), (format!("y{ci}"), b)].into_iter().collect(),
            );
            clauses.push(Clause::new(lits));
        }
        let problem = nestinst::frame::spec::Problem {
            sig: sig.clone(),
            stack: nestinst::frame::spec::TheoryStack {
                levels: vec![BaseLevel {
                    level: 0,
                    sort: nat,
                    scheme: BaseScheme::Presburger { modulus_cap: 64 },
                }],
                leaf: nestinst::frame::spec::LeafScheme::GroundArrays,
                leaf_level: 1,
            },
            clauses: clauses.clone(),
            copy_links: vec![],
        };
        let Ok(Some(lambda)) = nestinst::frame::shift::shiftability_check(&problem) else {
            continue;
        };
        let shifted = nestinst::frame::shift::shift(&problem, &lambda).unwrap();
        let lam_of = |a: usize| lambda.get(&arrays[a]).map(|lf| lf.offset).unwrap_or(0);

        // One shared random interpretation: each original array is a random
        // finite function; the primed copy reads the original at the
        // translated position.
        let lo = -12i64;
        let hi = 20i64;
        let table: Vec<Vec<i64>> = (0..2)
            .map(|_| (lo..=hi).map(|_| rng.random_range(0..3i64)).collect())
            .collect();
        let read = |sig: &Signature, f: FuncId, idx: i64| -> i64 {
            let name = sig.func(f).name.clone();
            let base = name.trim_end_matches('\'');
            let which = arrays
                .iter()
                .position(|a| sig.func(*a).name == base)
                .expect("array constant");
            let off = if name.ends_with('\'') { lam_of(which) } else { 0 };
            let pos = idx + off;
            if pos < lo || pos > hi {
                return -1;
            }
            table[which][(pos - lo) as usize]
        };
        fn eval_int(sig: &Signature, t: &Term, env: &std::collections::BTreeMap<String, i64>) -> i64 {
            match t {
                Term::Num(n, _) => *n,
                Term::Var(v) => env[&v.name],
                Term::App(f, args) => match sig.func(*f).kind {
                    nestinst::core::FuncKind::Plus => {
                        eval_int(sig, &args[0], env) + eval_int(sig, &args[1], env)
                    }
                    nestinst::core::FuncKind::Minus => {
                        eval_int(sig, &args[0], env) - eval_int(sig, &args[1], env)
                    }
                    nestinst::core::FuncKind::Succ => eval_int(sig, &args[0], env) + 1,
                    nestinst::core::FuncKind::Pred => eval_int(sig, &args[0], env) - 1,
                    _ => panic!("unexpected integer term"),
                },
            }
        }
        fn eval_clause(
            sig: &Signature,
            c: &Clause,
            env: &std::collections::BTreeMap<String, i64>,
            read: &dyn Fn(&Signature, FuncId, i64) -> i64,
        ) -> bool {
            c.literals().iter().any(|lit| {
                if lit.is_pred_sugar(sig) {
                    let Term::App(f, args) = &lit.lhs else { unreachable!() };
                    let holds = match sig.func(*f).kind {
                        nestinst::core::FuncKind::Le => {
                            eval_int(sig, &args[0], env) <= eval_int(sig, &args[1], env)
                        }
                        nestinst::core::FuncKind::Lt => {
                            eval_int(sig, &args[0], env) < eval_int(sig, &args[1], env)
                        }
                        _ => panic!("unexpected atom"),
                    };
                    holds == lit.pos
                } else {
                    let value = |t: &Term| -> i64 {
                        match t {
                            Term::App(f, args) if sig.func(*f).name.starts_with("select") => {
                                let Term::App(a, _) = &args[0] else { panic!("array") };
                                read(sig, *a, eval_int(sig, &args[1], env))
                            }
                            Term::App(_, args) if args.is_empty() => -7,
                            _ => panic!("unexpected element term"),
                        }
                    };
                    (value(&lit.lhs) == value(&lit.rhs)) == lit.pos
                }
            })
        }
        // Pointwise transport at random assignments.
        for _ in 0..20 {
            for (ci, clause) in clauses.iter().enumerate() {
                let mut env = std::collections::BTreeMap::new();
                let mut env_shifted = std::collections::BTreeMap::new();
                for v in clause.vars() {
                    let value = rng.random_range(-5i64..=10);
                    env.insert(v.name.clone(), value);
                    let shift_by = var_arrays[ci].get(&v.name).map(|a| lam_of(*a)).unwrap_or(0);
                    env_shifted.insert(v.name.clone(), value - shift_by);
                }
                let before = eval_clause(&sig, clause, &env, &read);
                let after = eval_clause(&shifted.sig, &shifted.clauses[ci], &env_shifted, &read);
                assert_eq!(
                    before, after,
                    "transport mismatch on {} vs {}",
                    clause.display(&sig),
                    shifted.clauses[ci].display(&shifted.sig)
                );
                if before {
                    satisfied += 1;
                } else {
                    falsified += 1;
                }
            }
        }
        runs += 1;
    }
    assert!(falsified > 20 && satisfied > 20, "degenerate sample: {satisfied} sat / {falsified} unsat");
    println!("PROPERTY shift transport: 40 sets, {satisfied} satisfied / {falsified} falsified evaluations");
}

/// The normalized linear forms dedupe equal offsets computed differently.
#[test]
fn linear_forms_deduplicate() {
    let f = fx();
    let mut sig = f.sig.clone();
    let a = sig.add_func("a", vec![], f.nat).unwrap();
    let minus = sig.arith_func(f.nat, nestinst::core::FuncKind::Minus).unwrap();
    let pred = sig.arith_func(f.nat, nestinst::core::FuncKind::Pred).unwrap();
    let via_minus = Term::App(minus, vec![Term::cst(a), Term::Num(1, f.nat)]);
    let via_pred = Term::App(pred, vec![Term::cst(a)]);
    assert_eq!(
        normalize_linear(&sig, &via_minus).unwrap(),
        normalize_linear(&sig, &via_pred).unwrap()
    );
}
