//! Random and exhaustive generators: formulas, measures, structures.
//!
//! The validity sweeps draw random axiom instances and random structures from
//! here, and the bounded model search walks the exhaustive catalogs. All
//! randomness flows through a caller-supplied [`ChaCha8Rng`] so every report
//! is reproducible from its seed.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::axioms::{Bindings, Schema};
use crate::backends::{
    embed_preferential, EpsPolyPPD, Kappa, KappaRanking, Measure, PossibilityMeasure,
    PreferentialOrder,
};
use crate::order::{BitMat, PlausibilityPoset};
use crate::plausibility::ExplicitMeasure;
use crate::statistical::StatisticalStructure;
use crate::subjective::{Interpretation, SubjectiveStructure};
use crate::syntax::{Formula, Ident, Lang, Term, Vocabulary};
use crate::{Rat, WorldSet};

/// The semantic classes a sweep or search can range over. Finite preferential
/// orders are always well-founded, so `Pref` and `PrefWf` draw from the same
/// generator; they diverge only on infinite models, which live in the
/// scenarios module.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructClass {
    Qpl,
    Eps,
    Kappa,
    Poss,
    PrefWf,
    Pref,
}

impl StructClass {
    pub const ALL: [StructClass; 6] = [
        StructClass::Qpl,
        StructClass::Eps,
        StructClass::Kappa,
        StructClass::Poss,
        StructClass::PrefWf,
        StructClass::Pref,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StructClass::Qpl => "qpl",
            StructClass::Eps => "eps",
            StructClass::Kappa => "kappa",
            StructClass::Poss => "poss",
            StructClass::PrefWf => "pref-wf",
            StructClass::Pref => "pref",
        }
    }

    pub fn parse(s: &str) -> Option<StructClass> {
        StructClass::ALL.iter().copied().find(|c| c.name() == s)
    }
}

impl std::fmt::Display for StructClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The fixed vocabulary the subjective sweeps run over: two unary predicates,
/// one binary, a constant, and a unary function.
pub fn sweep_vocab() -> Vocabulary {
    let mut v = Vocabulary::default();
    v.record_predicate("P", 1).unwrap();
    v.record_predicate("Q", 1).unwrap();
    v.record_predicate("R", 2).unwrap();
    v.record_function("c", 0).unwrap();
    v.record_function("f", 1).unwrap();
    v
}

/// The statistical sweeps' vocabulary: predicates only, since terms in
/// statistical formulas stay variable-shaped here.
pub fn sweep_vocab_stat() -> Vocabulary {
    let mut v = Vocabulary::default();
    v.record_predicate("P", 1).unwrap();
    v.record_predicate("Q", 1).unwrap();
    v.record_predicate("R", 2).unwrap();
    v
}

fn subj_pool() -> Vec<Ident> {
    vec!["x".into(), "y".into(), "z".into()]
}

fn stat_pool(k: usize) -> Vec<Ident> {
    (1..=k).map(|i| format!("x{i}")).collect()
}

fn random_term(rng: &mut ChaCha8Rng, vocab: &Vocabulary, pool: &[Ident]) -> Term {
    let zeroary: Vec<&Ident> = vocab
        .functions
        .iter()
        .filter(|(_, &a)| a == 0)
        .map(|(n, _)| n)
        .collect();
    let unary: Vec<&Ident> = vocab
        .functions
        .iter()
        .filter(|(_, &a)| a == 1)
        .map(|(n, _)| n)
        .collect();
    let roll = rng.gen_range(0..10);
    if roll < 7 || (zeroary.is_empty() && unary.is_empty()) {
        Term::Var(pool.choose(rng).unwrap().clone())
    } else if roll < 9 && !zeroary.is_empty() {
        Term::Func(zeroary.choose(rng).unwrap().to_string(), Vec::new())
    } else if let Some(f) = unary.choose(rng) {
        Term::Func(
            f.to_string(),
            vec![Term::Var(pool.choose(rng).unwrap().clone())],
        )
    } else {
        Term::Var(pool.choose(rng).unwrap().clone())
    }
}

fn random_atom(rng: &mut ChaCha8Rng, vocab: &Vocabulary, pool: &[Ident]) -> Formula {
    let roll = rng.gen_range(0..10);
    if roll < 1 {
        return if rng.gen() { Formula::True } else { Formula::False };
    }
    if roll < 3 {
        return Formula::eq(
            random_term(rng, vocab, pool),
            random_term(rng, vocab, pool),
        );
    }
    let preds: Vec<(&Ident, &usize)> = vocab.predicates.iter().collect();
    let (name, &arity) = preds[rng.gen_range(0..preds.len())];
    let args = (0..arity).map(|_| random_term(rng, vocab, pool)).collect();
    Formula::atom(name, args)
}

/// A random subjective formula over `vocab`, with nesting capped at `depth`.
/// Node weights: 40% Boolean connective, 25% conditional, 20% quantifier,
/// 15% atom.
pub fn random_formula_subj(rng: &mut ChaCha8Rng, vocab: &Vocabulary, depth: usize) -> Formula {
    random_formula_inner(rng, Lang::Subj, vocab, &subj_pool(), depth)
}

/// A random statistical formula whose variables all come from the first `k`
/// coordinates. Same node weights as the subjective generator.
pub fn random_formula_stat(
    rng: &mut ChaCha8Rng,
    vocab: &Vocabulary,
    k: usize,
    depth: usize,
) -> Formula {
    random_formula_inner(rng, Lang::Stat, vocab, &stat_pool(k), depth)
}

fn random_formula_inner(
    rng: &mut ChaCha8Rng,
    lang: Lang,
    vocab: &Vocabulary,
    pool: &[Ident],
    depth: usize,
) -> Formula {
    if depth == 0 {
        return random_atom(rng, vocab, pool);
    }
    let sub = |rng: &mut ChaCha8Rng| random_formula_inner(rng, lang, vocab, pool, depth - 1);
    match rng.gen_range(0..100) {
        0..=39 => {
            let a = sub(rng);
            match rng.gen_range(0..4) {
                0 => a.neg(),
                1 => a.and(sub(rng)),
                2 => a.or(sub(rng)),
                _ => a.implies(sub(rng)),
            }
        }
        40..=64 => {
            let a = sub(rng);
            let b = sub(rng);
            match lang {
                Lang::Subj => a.cond(b),
                Lang::Stat => {
                    let mut xs = BTreeSet::new();
                    xs.insert(pool.choose(rng).unwrap().clone());
                    for v in pool {
                        if rng.gen_bool(0.3) {
                            xs.insert(v.clone());
                        }
                    }
                    Formula::cond_stat(xs, a, b)
                }
            }
        }
        65..=84 => {
            let v = pool.choose(rng).unwrap().clone();
            let body = sub(rng);
            if rng.gen() {
                Formula::Forall(v, Box::new(body))
            } else {
                Formula::Exists(v, Box::new(body))
            }
        }
        _ => random_atom(rng, vocab, pool),
    }
}

/// A random quantifier- and conditional-free formula: Boolean combinations
/// of atoms only, the shape F5 admits.
pub fn random_formula_flat(rng: &mut ChaCha8Rng, vocab: &Vocabulary, depth: usize) -> Formula {
    let pool = subj_pool();
    fn inner(rng: &mut ChaCha8Rng, vocab: &Vocabulary, pool: &[Ident], depth: usize) -> Formula {
        if depth == 0 || rng.gen_bool(0.3) {
            return random_atom(rng, vocab, pool);
        }
        let a = inner(rng, vocab, pool, depth - 1);
        match rng.gen_range(0..4) {
            0 => a.neg(),
            1 => a.and(inner(rng, vocab, pool, depth - 1)),
            2 => a.or(inner(rng, vocab, pool, depth - 1)),
            _ => a.implies(inner(rng, vocab, pool, depth - 1)),
        }
    }
    inner(rng, vocab, &pool, depth)
}

/// Rewrite a random subset of the occurrences of `x` in a flat formula to
/// `y`, producing a legal F5 partner for it.
pub fn rewrite_some(rng: &mut ChaCha8Rng, f: &Formula, x: &str, y: &str) -> Formula {
    fn term(rng: &mut ChaCha8Rng, t: &Term, x: &str, y: &str) -> Term {
        match t {
            Term::Var(v) if v == x && rng.gen() => Term::Var(y.to_string()),
            Term::Var(v) => Term::Var(v.clone()),
            Term::Func(g, args) => Term::Func(
                g.clone(),
                args.iter().map(|a| term(rng, a, x, y)).collect(),
            ),
        }
    }
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(p, args) => {
            Formula::atom(p, args.iter().map(|a| term(rng, a, x, y)).collect())
        }
        Formula::Eq(a, b) => Formula::eq(term(rng, a, x, y), term(rng, b, x, y)),
        Formula::Not(g) => rewrite_some(rng, g, x, y).neg(),
        Formula::And(a, b) => rewrite_some(rng, a, x, y).and(rewrite_some(rng, b, x, y)),
        Formula::Or(a, b) => rewrite_some(rng, a, x, y).or(rewrite_some(rng, b, x, y)),
        Formula::Implies(a, b) => rewrite_some(rng, a, x, y).implies(rewrite_some(rng, b, x, y)),
        _ => f.clone(),
    }
}

fn random_tautology(rng: &mut ChaCha8Rng, a: Formula, b: Formula) -> Formula {
    match rng.gen_range(0..6) {
        0 => a.clone().or(a.neg()),
        1 => a.clone().implies(b.implies(a)),
        2 => a.clone().and(b).implies(a),
        3 => a.clone().implies(a.or(b)),
        4 => a.clone().implies(b.clone()).and(a.clone()).implies(b),
        _ => a.clone().and(a.neg()).implies(Formula::False),
    }
}

/// Random well-formed bindings for `schema`: every side condition is met by
/// construction, so [`crate::axioms::instantiate`] always succeeds on the
/// result. Statistical schemas draw their variables from the first `k`
/// coordinates; `Forall3p` needs `k >= 2`.
pub fn random_bindings_for(
    rng: &mut ChaCha8Rng,
    schema: Schema,
    vocab: &Vocabulary,
    k: usize,
) -> Bindings {
    let pool = subj_pool();
    let pick = |rng: &mut ChaCha8Rng| pool.choose(rng).unwrap().clone();
    match schema {
        Schema::C0 => {
            let a = random_formula_subj(rng, vocab, 2);
            let b = random_formula_subj(rng, vocab, 2);
            Bindings::new().f("phi", random_tautology(rng, a, b))
        }
        Schema::C1 => Bindings::new().f("phi", random_formula_subj(rng, vocab, 2)),
        Schema::C2 => Bindings::new()
            .f("phi", random_formula_subj(rng, vocab, 2))
            .f("psi1", random_formula_subj(rng, vocab, 2))
            .f("psi2", random_formula_subj(rng, vocab, 2)),
        Schema::C3 | Schema::C4 => Bindings::new()
            .f("phi1", random_formula_subj(rng, vocab, 2))
            .f("phi2", random_formula_subj(rng, vocab, 2))
            .f("psi", random_formula_subj(rng, vocab, 2)),
        Schema::C5 => Bindings::new()
            .f("phi", random_formula_subj(rng, vocab, 2))
            .f("psi", random_formula_subj(rng, vocab, 2)),
        Schema::C6 => Bindings::new()
            .f("phi", random_formula_subj(rng, vocab, 2))
            .f("psi", random_formula_subj(rng, vocab, 2))
            .f("xi", random_formula_subj(rng, vocab, 2)),
        Schema::C7 => Bindings::new(),
        Schema::F1 => {
            let phi = random_formula_subj(rng, vocab, 2);
            let x = pick(rng);
            let t = if phi.contains_conditional() {
                Term::Var(pick(rng))
            } else {
                random_term(rng, vocab, &pool)
            };
            let t = if phi.substitute(&x, &t).is_ok() {
                t
            } else {
                Term::Var(x.clone())
            };
            Bindings::new().f("phi", phi).v("x", &x).t("t", t)
        }
        Schema::F2 => Bindings::new()
            .f("phi", random_formula_subj(rng, vocab, 2))
            .f("psi", random_formula_subj(rng, vocab, 2))
            .v("x", &pick(rng)),
        Schema::F3 => {
            let (phi, x) = formula_avoiding(rng, vocab, &pool);
            Bindings::new().f("phi", phi).v("x", &x)
        }
        Schema::F4 => Bindings::new().v("x", &pick(rng)),
        Schema::F5 => {
            let phi = random_formula_flat(rng, vocab, 2);
            let x = pick(rng);
            let y = pick(rng);
            let phi_prime = rewrite_some(rng, &phi, &x, &y);
            Bindings::new()
                .f("phi", phi)
                .f("phi_prime", phi_prime)
                .v("x", &x)
                .v("y", &y)
        }
        Schema::F6 | Schema::F7 => Bindings::new().v("x", &pick(rng)).v("y", &pick(rng)),
        Schema::Forall3 => {
            let (phi, x) = formula_avoiding(rng, vocab, &pool);
            Bindings::new()
                .f("phi", phi)
                .f("psi", random_formula_subj(rng, vocab, 2))
                .v("x", &x)
        }
        Schema::A3StarN => Bindings::new()
            .f("phi", random_formula_subj(rng, vocab, 2))
            .v("x", &pick(rng)),
        Schema::A3StarOr | Schema::A3StarOrMat => {
            let (psi, x) = formula_avoiding(rng, vocab, &pool);
            Bindings::new()
                .f("phi", random_formula_subj(rng, vocab, 2))
                .f("psi", psi)
                .v("x", &x)
        }
        Schema::C0p => {
            let a = random_formula_stat(rng, vocab, k, 2);
            let b = random_formula_stat(rng, vocab, k, 2);
            Bindings::new().f("phi", random_tautology(rng, a, b))
        }
        Schema::C1p => Bindings::new()
            .f("phi", random_formula_stat(rng, vocab, k, 2))
            .xs(random_varset(rng, k)),
        Schema::C2p | Schema::R2p => Bindings::new()
            .f("phi", random_formula_stat(rng, vocab, k, 2))
            .f("psi1", random_formula_stat(rng, vocab, k, 2))
            .f("psi2", random_formula_stat(rng, vocab, k, 2))
            .xs(random_varset(rng, k)),
        Schema::C3p | Schema::C4p | Schema::R1p => Bindings::new()
            .f("phi1", random_formula_stat(rng, vocab, k, 2))
            .f("phi2", random_formula_stat(rng, vocab, k, 2))
            .f("psi", random_formula_stat(rng, vocab, k, 2))
            .xs(random_varset(rng, k)),
        Schema::U => Bindings::new()
            .f("phi", random_formula_stat(rng, vocab, k, 2))
            .f("psi", random_formula_stat(rng, vocab, k, 2))
            .xs(random_varset(rng, k)),
        Schema::Ren => {
            if k < 2 {
                return Bindings::new()
                    .f("phi", Formula::True)
                    .f("psi", Formula::True)
                    .v("x", "x1")
                    .v("y", "x1")
                    .xs(["x1"]);
            }
            Bindings::new()
                .f("phi", random_formula_stat(rng, vocab, 1, 2))
                .f("psi", random_formula_stat(rng, vocab, 1, 2))
                .v("x", "x1")
                .v("y", "x2")
                .xs(["x1"])
        }
        Schema::C6p => Bindings::new()
            .f("phi", random_formula_stat(rng, vocab, k, 2))
            .f("psi", random_formula_stat(rng, vocab, k, 2))
            .f("xi", random_formula_stat(rng, vocab, k, 2))
            .xs(random_varset(rng, k)),
        Schema::C7p => Bindings::new().xs(random_varset(rng, k)),
        Schema::Forall3p => {
            assert!(k >= 2, "forall3' instances need a second coordinate");
            Bindings::new()
                .f("phi", random_formula_stat(rng, vocab, 1, 2))
                .f("psi", random_formula_stat(rng, vocab, k, 2))
                .v("y", "x2")
                .xs(["x1"])
        }
        Schema::Prod => {
            let phi_prime = if k >= 2 {
                random_formula_stat(rng, vocab, 1, 2)
                    .substitute("x1", &Term::Var("x2".into()))
                    .expect("renaming into a fresh coordinate")
            } else {
                Formula::True
            };
            Bindings::new()
                .f("phi", random_formula_stat(rng, vocab, 1, 2))
                .f("psi", random_formula_stat(rng, vocab, 1, 2))
                .f("phi_prime", phi_prime)
                .xs(["x1"])
        }
    }
}

/// A formula plus a pool variable that is not free in it, for the schemas
/// that demand one.
fn formula_avoiding(
    rng: &mut ChaCha8Rng,
    vocab: &Vocabulary,
    pool: &[Ident],
) -> (Formula, Ident) {
    for _ in 0..20 {
        let f = random_formula_subj(rng, vocab, 2);
        let free = f.free_vars();
        let spare: Vec<&Ident> = pool.iter().filter(|v| !free.contains(*v)).collect();
        if let Some(x) = spare.choose(rng) {
            return (f, (*x).clone());
        }
    }
    (Formula::True, pool[0].clone())
}

fn random_varset(rng: &mut ChaCha8Rng, k: usize) -> BTreeSet<Ident> {
    let pool = stat_pool(k);
    let mut xs = BTreeSet::new();
    xs.insert(pool.choose(rng).unwrap().clone());
    for v in &pool {
        if rng.gen_bool(0.3) {
            xs.insert(v.clone());
        }
    }
    xs
}

/// A random measure over `n` worlds from the named class.
pub fn random_measure(rng: &mut ChaCha8Rng, class: StructClass, n: usize) -> Measure {
    match class {
        StructClass::Kappa => Measure::Kappa(random_kappa(rng, n)),
        StructClass::Poss => Measure::Possibility(random_possibility(rng, n)),
        StructClass::Pref | StructClass::PrefWf => {
            Measure::Preferential(PreferentialOrder::new(random_strict_order(rng, n)).unwrap())
        }
        StructClass::Eps => Measure::Ppd(random_ppd(rng, n)),
        StructClass::Qpl => Measure::Explicit(random_qualitative(rng, n)),
    }
}

pub fn random_kappa(rng: &mut ChaCha8Rng, n: usize) -> KappaRanking {
    let mut ranks: Vec<Kappa> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.15) {
                Kappa::Inf
            } else {
                Kappa::Fin(rng.gen_range(0..4))
            }
        })
        .collect();
    let zero = rng.gen_range(0..n);
    ranks[zero] = Kappa::Fin(0);
    KappaRanking::new(ranks).unwrap()
}

pub fn random_possibility(rng: &mut ChaCha8Rng, n: usize) -> PossibilityMeasure<Rat> {
    let palette = [
        Rat::new(0, 1),
        Rat::new(1, 4),
        Rat::new(1, 2),
        Rat::new(3, 4),
        Rat::new(1, 1),
    ];
    let mut weights: Vec<Rat> = (0..n).map(|_| *palette.choose(rng).unwrap()).collect();
    let one = rng.gen_range(0..n);
    weights[one] = Rat::new(1, 1);
    PossibilityMeasure::new(weights).unwrap()
}

pub fn random_ppd(rng: &mut ChaCha8Rng, n: usize) -> EpsPolyPPD<Rat> {
    let mut terms: Vec<(Rat, u32)> = (0..n)
        .map(|_| (Rat::new(rng.gen_range(1..4), 1), rng.gen_range(0..4)))
        .collect();
    let lead = rng.gen_range(0..n);
    terms[lead].1 = 0;
    EpsPolyPPD::new(terms).unwrap()
}

/// A random strict partial order: a random DAG on a shuffled axis, closed
/// under transitivity.
pub fn random_strict_order(rng: &mut ChaCha8Rng, n: usize) -> BitMat {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut m = BitMat::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(0.4) {
                m.set(perm[i], perm[j], true);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if m.get(i, k) {
                for j in 0..n {
                    if m.get(k, j) {
                        m.set(i, j, true);
                    }
                }
            }
        }
    }
    m
}

/// A random qualitative plausibility measure. Draws from the backend
/// embeddings most of the time (they are qualitative by construction) and
/// from rejection-sampled poset assignments for the rest, so the output
/// exercises genuinely partial value orders.
pub fn random_qualitative(rng: &mut ChaCha8Rng, n: usize) -> ExplicitMeasure {
    match rng.gen_range(0..4) {
        0 => random_kappa(rng, n).to_plausibility().unwrap(),
        1 => random_possibility(rng, n).to_plausibility().unwrap(),
        2 => embed_preferential(&PreferentialOrder::new(random_strict_order(rng, n)).unwrap()),
        _ => {
            for _ in 0..40 {
                if let Some(m) = random_poset_measure(rng, n) {
                    return m;
                }
            }
            embed_preferential(&PreferentialOrder::new(random_strict_order(rng, n)).unwrap())
        }
    }
}

fn random_poset_measure(rng: &mut ChaCha8Rng, n: usize) -> Option<ExplicitMeasure> {
    let m = random_monotone_measure(rng, n)?;
    match m.check_qualitative() {
        Ok(None) => Some(m),
        _ => None,
    }
}

/// A random measure satisfying A1 over a random catalog poset, with no
/// qualitativeness filter: A2 or A3 may well fail, which is exactly what the
/// negative-control sweeps want.
pub fn random_monotone_measure(rng: &mut ChaCha8Rng, n: usize) -> Option<ExplicitMeasure> {
    let catalog = bounded_posets(6);
    let poset = catalog[rng.gen_range(0..catalog.len())].clone();
    let size = 1usize << n;
    let mut assign = vec![usize::MAX; size];
    assign[0] = poset.bot();
    assign[size - 1] = poset.top();
    for mask in 1..size - 1 {
        let candidates: Vec<usize> = (0..poset.len())
            .filter(|&v| {
                (0..n).all(|w| {
                    let sub = mask & !(1 << w);
                    sub == mask || poset.leq(assign[sub], v)
                })
            })
            .collect();
        assign[mask] = *candidates.choose(rng)?;
    }
    ExplicitMeasure::new(n, poset, assign).ok()
}

fn random_interp(rng: &mut ChaCha8Rng, vocab: &Vocabulary, dom: usize) -> Interpretation {
    let mut interp = Interpretation::new();
    for (name, &arity) in &vocab.predicates {
        let mut tuples = Vec::new();
        let mut idx = vec![0usize; arity];
        loop {
            if rng.gen_bool(0.5) {
                tuples.push(idx.clone());
            }
            let mut i = 0;
            while i < arity {
                idx[i] += 1;
                if idx[i] < dom {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == arity {
                break;
            }
        }
        interp = interp.pred(name, tuples);
    }
    for (name, &arity) in &vocab.functions {
        if arity == 0 {
            interp = interp.constant(name, rng.gen_range(0..dom));
        } else {
            let mut table = Vec::new();
            let mut idx = vec![0usize; arity];
            loop {
                table.push((idx.clone(), rng.gen_range(0..dom)));
                let mut i = 0;
                while i < arity {
                    idx[i] += 1;
                    if idx[i] < dom {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == arity {
                    break;
                }
            }
            interp = interp.func(name, table);
        }
    }
    interp
}

/// A random subjective structure over [`sweep_vocab`]: domain and world
/// counts drawn up to the caps, fresh interpretation per world, measure from
/// the named class.
pub fn random_subjective(
    rng: &mut ChaCha8Rng,
    class: StructClass,
    max_dom: usize,
    max_worlds: usize,
) -> SubjectiveStructure {
    let vocab = sweep_vocab();
    let dom = rng.gen_range(1..=max_dom);
    let n = rng.gen_range(1..=max_worlds);
    let pl = random_measure(rng, class, n);
    let interps = (0..n).map(|_| random_interp(rng, &vocab, dom)).collect();
    SubjectiveStructure::new(dom, pl, interps, vocab).unwrap()
}

/// A random REN-symmetric qualitative statistical structure: the measure is
/// a product lifted from per-element weights (κ sums or possibility minima),
/// hence invariant under coordinate permutations.
pub fn random_statistical(
    rng: &mut ChaCha8Rng,
    max_dom: usize,
    max_k: usize,
) -> StatisticalStructure {
    let k = rng.gen_range(1..=max_k);
    random_statistical_with_k(rng, max_dom, k)
}

/// As [`random_statistical`], but with the coordinate count pinned; sweeps
/// over schemas that need two coordinates force `k = 2` through this.
pub fn random_statistical_with_k(
    rng: &mut ChaCha8Rng,
    max_dom: usize,
    k: usize,
) -> StatisticalStructure {
    let vocab = sweep_vocab_stat();
    let dom = rng.gen_range(1..=max_dom);
    let points = dom.pow(k as u32);
    let coord = |p: usize, i: usize| p / dom.pow(i as u32) % dom;
    let pl = if rng.gen() {
        let elem_rank: Vec<u64> = {
            let mut r: Vec<u64> = (0..dom).map(|_| rng.gen_range(0..3)).collect();
            r[rng.gen_range(0..dom)] = 0;
            r
        };
        let ranks = (0..points)
            .map(|p| Kappa::Fin((0..k).map(|i| elem_rank[coord(p, i)]).sum()))
            .collect();
        Measure::Kappa(KappaRanking::new(ranks).unwrap())
    } else {
        let palette = [Rat::new(1, 4), Rat::new(1, 2), Rat::new(1, 1)];
        let elem_w: Vec<Rat> = {
            let mut w: Vec<Rat> = (0..dom).map(|_| *palette.choose(rng).unwrap()).collect();
            w[rng.gen_range(0..dom)] = Rat::new(1, 1);
            w
        };
        let weights = (0..points)
            .map(|p| (0..k).map(|i| elem_w[coord(p, i)]).min().unwrap())
            .collect();
        Measure::Possibility(PossibilityMeasure::new(weights).unwrap())
    };
    let interp = random_interp(rng, &vocab, dom);
    StatisticalStructure::new(dom, k, interp, pl, vocab).unwrap()
}

/// All labeled strict partial orders on `n` elements.
pub fn all_strict_orders(n: usize) -> Vec<BitMat> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    'candidates: for mask in 0u32..(1 << pairs.len()) {
        let mut m = BitMat::new(n);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 != 0 {
                m.set(i, j, true);
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !m.get(i, j) {
                    continue;
                }
                if m.get(j, i) {
                    continue 'candidates;
                }
                for k in 0..n {
                    if m.get(j, k) && !m.get(i, k) {
                        continue 'candidates;
                    }
                }
            }
        }
        out.push(m);
    }
    out
}

/// Every pointed poset with at most `max` elements, up to isomorphism: a
/// least and a greatest element wrapped around each isomorphism class of
/// strict partial orders on the middle layer. Ordered by size, then by the
/// lexicographically least adjacency encoding, so enumeration-based searches
/// are deterministic.
pub fn bounded_posets(max: usize) -> Vec<PlausibilityPoset> {
    assert!(max >= 1);
    let mut out = Vec::new();
    if max >= 1 {
        out.push(PlausibilityPoset::chain(1));
    }
    for m in 0..=max.saturating_sub(2) {
        let mut canon_seen: Vec<Vec<bool>> = Vec::new();
        let mut reps: Vec<BitMat> = Vec::new();
        for cand in all_strict_orders(m) {
            let canon = canonical_relation(&cand);
            if !canon_seen.contains(&canon) {
                canon_seen.push(canon);
                reps.push(cand);
            }
        }
        let mut keyed: Vec<(Vec<bool>, BitMat)> = reps
            .into_iter()
            .map(|r| (canonical_relation(&r), r))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        for (_, rel) in keyed {
            let n = m + 2;
            let bot = m;
            let top = m + 1;
            let mut pairs = Vec::new();
            for i in 0..m {
                for j in 0..m {
                    if rel.get(i, j) {
                        pairs.push((i, j));
                    }
                }
            }
            let p = PlausibilityPoset::from_leq_pairs(n, &pairs, bot, top);
            p.validate().expect("catalog posets are valid");
            out.push(p);
        }
    }
    out
}

/// Minimal adjacency encoding over all relabelings, the isomorphism-class
/// key for [`bounded_posets`].
fn canonical_relation(m: &BitMat) -> Vec<bool> {
    let n = m.size();
    let mut perms = vec![(0..n).collect::<Vec<usize>>()];
    // Heap's algorithm.
    let mut arr: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                arr.swap(0, i);
            } else {
                arr.swap(c[i], i);
            }
            perms.push(arr.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let mut best: Option<Vec<bool>> = None;
    for p in perms {
        let mut enc = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                enc.push(m.get(p[i], p[j]));
            }
        }
        if best.as_ref().is_none_or(|b| enc < *b) {
            best = Some(enc);
        }
    }
    best.unwrap_or_default()
}

/// All subsets of `0..n` as world sets, ∅ first.
pub fn all_world_sets(n: usize) -> impl Iterator<Item = WorldSet> {
    WorldSet::all(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plausibility::PlausCmp;
    use crate::syntax::parse;

    #[test]
    fn strict_order_census() {
        assert_eq!(all_strict_orders(1).len(), 1);
        assert_eq!(all_strict_orders(2).len(), 3);
        assert_eq!(all_strict_orders(3).len(), 19);
        assert_eq!(all_strict_orders(4).len(), 219);
    }

    #[test]
    fn poset_catalog_census() {
        // 1 one-point poset, then middles of size 0..=4 giving
        // 1 + 1 + 2 + 5 + 16 bounded posets.
        let catalog = bounded_posets(6);
        assert_eq!(catalog.len(), 26);
        for p in &catalog {
            assert!(p.validate().is_ok());
            assert!(p.len() <= 6);
        }
        let diamonds = catalog
            .iter()
            .filter(|p| p.len() == 4 && p.cmp(0, 1).is_none())
            .count();
        assert_eq!(diamonds, 1);
    }

    #[test]
    fn random_formulas_parse_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vocab = sweep_vocab();
        for _ in 0..200 {
            let f = random_formula_subj(&mut rng, &vocab, 4);
            let text = f.to_string();
            let back = parse(&text, Lang::Subj).unwrap_or_else(|e| panic!("{text}: {e}"));
            assert_eq!(back, f, "{text}");
        }
        let vocab = sweep_vocab_stat();
        for _ in 0..200 {
            let f = random_formula_stat(&mut rng, &vocab, 2, 4);
            let text = f.to_string();
            let back = parse(&text, Lang::Stat).unwrap_or_else(|e| panic!("{text}: {e}"));
            assert_eq!(back, f, "{text}");
        }
    }

    #[test]
    fn qualitative_samples_are_qualitative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.gen_range(1..=4);
            let m = random_qualitative(&mut rng, n);
            assert_eq!(m.check_qualitative().unwrap(), None);
        }
    }

    #[test]
    fn statistical_samples_are_ren_symmetric() {
        use crate::statistical::{check_ren, RenOutcome};
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let s = random_statistical(&mut rng, 3, 2);
            assert!(matches!(check_ren(&s), RenOutcome::Ok));
        }
    }

    #[test]
    fn random_structures_evaluate_random_formulas() {
        use crate::subjective::eval_subj;
        use crate::subjective::Valuation;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for class in StructClass::ALL {
            for _ in 0..20 {
                let s = random_subjective(&mut rng, class, 3, 4);
                let f = random_formula_subj(&mut rng, s.vocab(), 3);
                let mut v = Valuation::new();
                for x in f.free_vars() {
                    v.set(&x, rng.gen_range(0..s.dom_size()));
                }
                eval_subj(&s, 0, &v, &f).unwrap();
            }
        }
    }

    #[test]
    fn poset_measures_respect_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut hits = 0;
        for _ in 0..200 {
            if let Some(m) = random_poset_measure(&mut rng, 3) {
                hits += 1;
                for a in WorldSet::all(3) {
                    for b in WorldSet::all(3) {
                        if a.union(b) == b {
                            assert!(m.values().leq(m.pl(a), m.pl(b)));
                        }
                    }
                }
                assert!(!PlausCmp::is_bot(&m, &WorldSet::full(3)) || m.is_degenerate());
            }
        }
        assert!(hits > 0, "rejection sampling never succeeded");
    }
}
