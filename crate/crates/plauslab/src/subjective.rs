//! First-order subjective structures and the satisfaction relation for the
//! subjective conditional language.
//!
//! A structure fixes a finite domain, a finite world space with a
//! plausibility measure over it, and a per-world interpretation of every
//! vocabulary symbol. Constants are 0-ary functions interpreted per world,
//! so they are nonrigid unless the model happens to agree everywhere.
//! Formula extensions are world sets, and the conditional compares the
//! plausibility of `⟦φ∧ψ⟧` against `⟦φ∧¬ψ⟧` through whichever measure
//! backend the structure carries.

use crate::backends::Measure;
use crate::syntax::{Formula, Ident, Term, VocabError, Vocabulary};
use crate::WorldSet;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Per-world interpretation: predicate symbols get tuple sets, function
/// symbols get total tables. Constants are 0-ary functions whose table has
/// the single key `[]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Interpretation {
    pub preds: BTreeMap<Ident, BTreeSet<Vec<usize>>>,
    pub funcs: BTreeMap<Ident, BTreeMap<Vec<usize>, usize>>,
}

impl Interpretation {
    pub fn new() -> Interpretation {
        Interpretation::default()
    }

    pub fn pred<I: IntoIterator<Item = Vec<usize>>>(mut self, name: &str, tuples: I) -> Self {
        self.preds
            .insert(name.to_string(), tuples.into_iter().collect());
        self
    }

    pub fn constant(mut self, name: &str, value: usize) -> Self {
        self.funcs
            .insert(name.to_string(), BTreeMap::from([(vec![], value)]));
        self
    }

    pub fn func<I: IntoIterator<Item = (Vec<usize>, usize)>>(mut self, name: &str, table: I) -> Self {
        self.funcs
            .insert(name.to_string(), table.into_iter().collect());
        self
    }
}

/// Variable assignment into the domain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Valuation(BTreeMap<Ident, usize>);

impl Valuation {
    pub fn new() -> Valuation {
        Valuation::default()
    }

    pub fn bind(mut self, var: &str, value: usize) -> Valuation {
        self.0.insert(var.to_string(), value);
        self
    }

    pub fn set(&mut self, var: &str, value: usize) {
        self.0.insert(var.to_string(), value);
    }

    pub fn get(&self, var: &str) -> Option<usize> {
        self.0.get(var).copied()
    }
}

/// A malformed structure.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("the domain must be nonempty")]
    EmptyDomain,
    #[error("measure covers {measure} worlds but {interps} interpretations were given")]
    WorldCountMismatch { measure: usize, interps: usize },
    #[error("{got} worlds exceed the structure cap of {cap}")]
    TooManyWorlds { got: usize, cap: usize },
    #[error("world {world} does not interpret {symbol}")]
    MissingSymbol { world: usize, symbol: Ident },
    #[error("world {world} interprets {symbol} at the wrong arity (expected {arity})")]
    BadArity {
        world: usize,
        symbol: Ident,
        arity: usize,
    },
    #[error("world {world}: function {symbol} is not total on the domain")]
    PartialFunction { world: usize, symbol: Ident },
    #[error("world {world}: {symbol} mentions an element outside the domain")]
    ElementOutOfRange { world: usize, symbol: Ident },
    #[error("measure covers {measure} points but the valuation space has {points}")]
    PointCountMismatch { measure: usize, points: usize },
    #[error("{got} valuation points exceed the cap of {cap}")]
    TooManyPoints { got: usize, cap: usize },
}

/// Evaluation failure: the formula does not fit the structure or the
/// valuation.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("free variable {0} is not bound by the valuation")]
    UnboundVariable(Ident),
    #[error("predicate {0} is not in the structure's vocabulary")]
    UnknownPredicate(Ident),
    #[error("function {0} is not in the structure's vocabulary")]
    UnknownFunction(Ident),
    #[error("{symbol} used at arity {found}, structure interprets it at {expected}")]
    ArityMismatch {
        symbol: Ident,
        expected: usize,
        found: usize,
    },
    #[error("statistical conditional has no meaning in a subjective structure")]
    StatConditional,
    #[error("subjective operator has no meaning in a statistical structure")]
    SubjConditional,
    #[error("{0} is not a statistical variable (expected x1, x2, ...)")]
    NotStatVariable(Ident),
    #[error("variable {var} exceeds the structure's {k} coordinates")]
    VariableOutOfRange { var: Ident, k: usize },
    #[error("world {world} out of range ({n_worlds} worlds)")]
    WorldOutOfRange { world: usize, n_worlds: usize },
    #[error(transparent)]
    Vocab(#[from] VocabError),
}

pub const MAX_STRUCTURE_WORLDS: usize = 12;

/// A subjective structure `(Dom, W, Pl, π)`.
#[derive(Clone, Debug)]
pub struct SubjectiveStructure {
    dom: usize,
    pl: Measure,
    interps: Vec<Interpretation>,
    vocab: Vocabulary,
}

impl SubjectiveStructure {
    pub fn new(
        dom: usize,
        pl: Measure,
        interps: Vec<Interpretation>,
        vocab: Vocabulary,
    ) -> Result<SubjectiveStructure, StructureError> {
        if dom == 0 {
            return Err(StructureError::EmptyDomain);
        }
        if pl.n_worlds() != interps.len() {
            return Err(StructureError::WorldCountMismatch {
                measure: pl.n_worlds(),
                interps: interps.len(),
            });
        }
        if interps.len() > MAX_STRUCTURE_WORLDS {
            return Err(StructureError::TooManyWorlds {
                got: interps.len(),
                cap: MAX_STRUCTURE_WORLDS,
            });
        }
        for (w, interp) in interps.iter().enumerate() {
            validate_interp(dom, w, interp, &vocab)?;
        }
        Ok(SubjectiveStructure {
            dom,
            pl,
            interps,
            vocab,
        })
    }

    pub fn dom_size(&self) -> usize {
        self.dom
    }

    pub fn n_worlds(&self) -> usize {
        self.interps.len()
    }

    pub fn pl(&self) -> &Measure {
        &self.pl
    }

    pub fn interp(&self, w: usize) -> &Interpretation {
        &self.interps[w]
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Formula fits the structure: vocabulary agrees, free variables are
    /// bound, and no statistical conditional appears.
    fn precheck(&self, f: &Formula, v: &Valuation) -> Result<(), EvalError> {
        let fv = Vocabulary::collect([f])?;
        for (p, &ar) in &fv.predicates {
            match self.vocab.predicates.get(p) {
                None => return Err(EvalError::UnknownPredicate(p.clone())),
                Some(&expected) if expected != ar => {
                    return Err(EvalError::ArityMismatch {
                        symbol: p.clone(),
                        expected,
                        found: ar,
                    })
                }
                _ => {}
            }
        }
        for (g, &ar) in &fv.functions {
            match self.vocab.functions.get(g) {
                None => return Err(EvalError::UnknownFunction(g.clone())),
                Some(&expected) if expected != ar => {
                    return Err(EvalError::ArityMismatch {
                        symbol: g.clone(),
                        expected,
                        found: ar,
                    })
                }
                _ => {}
            }
        }
        for x in f.free_vars() {
            if v.get(&x).is_none() {
                return Err(EvalError::UnboundVariable(x));
            }
        }
        if has_stat(f) {
            return Err(EvalError::StatConditional);
        }
        Ok(())
    }

    fn term_val(&self, w: usize, v: &BTreeMap<Ident, usize>, t: &Term) -> usize {
        match t {
            Term::Var(x) => v[x],
            Term::Func(g, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.term_val(w, v, a)).collect();
                self.interps[w].funcs[g][&vals]
            }
        }
    }

    fn ext_rec(&self, v: &mut BTreeMap<Ident, usize>, f: &Formula, memo: &mut Memo) -> WorldSet {
        let key = (
            f as *const Formula as usize,
            f.free_vars().iter().map(|x| v[x]).collect::<Vec<_>>(),
        );
        if let Some(&ws) = memo.get(&key) {
            return ws;
        }
        let n = self.n_worlds();
        let full = WorldSet::full(n);
        let out = match f {
            Formula::True => full,
            Formula::False => WorldSet::EMPTY,
            Formula::Atom(p, args) => {
                let mut ws = WorldSet::EMPTY;
                for w in 0..n {
                    let tuple: Vec<usize> = args.iter().map(|t| self.term_val(w, v, t)).collect();
                    if self.interps[w].preds[p].contains(&tuple) {
                        ws.insert(w);
                    }
                }
                ws
            }
            Formula::Eq(a, b) => {
                let mut ws = WorldSet::EMPTY;
                for w in 0..n {
                    if self.term_val(w, v, a) == self.term_val(w, v, b) {
                        ws.insert(w);
                    }
                }
                ws
            }
            Formula::Not(g) => full.diff(self.ext_rec(v, g, memo)),
            Formula::And(a, b) => self.ext_rec(v, a, memo).inter(self.ext_rec(v, b, memo)),
            Formula::Or(a, b) => self.ext_rec(v, a, memo).union(self.ext_rec(v, b, memo)),
            Formula::Implies(a, b) => full
                .diff(self.ext_rec(v, a, memo))
                .union(self.ext_rec(v, b, memo)),
            Formula::Forall(x, body) => {
                let prev = v.remove(x);
                let mut ws = full;
                for d in 0..self.dom {
                    v.insert(x.clone(), d);
                    ws = ws.inter(self.ext_rec(v, body, memo));
                }
                restore(v, x, prev);
                ws
            }
            Formula::Exists(x, body) => {
                let prev = v.remove(x);
                let mut ws = WorldSet::EMPTY;
                for d in 0..self.dom {
                    v.insert(x.clone(), d);
                    ws = ws.union(self.ext_rec(v, body, memo));
                }
                restore(v, x, prev);
                ws
            }
            Formula::CondSubj(a, b) => {
                let ea = self.ext_rec(v, a, memo);
                let eb = self.ext_rec(v, b, memo);
                if self.pl.cond_sat(ea, eb) {
                    full
                } else {
                    WorldSet::EMPTY
                }
            }
            Formula::CondStat(..) => unreachable!("rejected by precheck"),
        };
        memo.insert(key, out);
        out
    }
}

/// One world's interpretation covers the vocabulary with correct arities,
/// total functions, and in-range elements.
pub(crate) fn validate_interp(
    dom: usize,
    world: usize,
    interp: &Interpretation,
    vocab: &Vocabulary,
) -> Result<(), StructureError> {
    for (p, &arity) in &vocab.predicates {
        let tuples = interp.preds.get(p).ok_or(StructureError::MissingSymbol {
            world,
            symbol: p.clone(),
        })?;
        for t in tuples {
            if t.len() != arity {
                return Err(StructureError::BadArity {
                    world,
                    symbol: p.clone(),
                    arity,
                });
            }
            if t.iter().any(|&e| e >= dom) {
                return Err(StructureError::ElementOutOfRange {
                    world,
                    symbol: p.clone(),
                });
            }
        }
    }
    for (g, &arity) in &vocab.functions {
        let table = interp.funcs.get(g).ok_or(StructureError::MissingSymbol {
            world,
            symbol: g.clone(),
        })?;
        let expected = dom.pow(arity as u32);
        if table.len() != expected {
            return Err(StructureError::PartialFunction {
                world,
                symbol: g.clone(),
            });
        }
        for (args, &val) in table {
            if args.len() != arity {
                return Err(StructureError::BadArity {
                    world,
                    symbol: g.clone(),
                    arity,
                });
            }
            if args.iter().any(|&e| e >= dom) || val >= dom {
                return Err(StructureError::ElementOutOfRange {
                    world,
                    symbol: g.clone(),
                });
            }
        }
    }
    Ok(())
}

type Memo = HashMap<(usize, Vec<usize>), WorldSet>;

fn restore(v: &mut BTreeMap<Ident, usize>, x: &str, prev: Option<usize>) {
    match prev {
        Some(d) => {
            v.insert(x.to_string(), d);
        }
        None => {
            v.remove(x);
        }
    }
}

fn has_stat(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => false,
        Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => has_stat(g),
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Implies(a, b)
        | Formula::CondSubj(a, b) => has_stat(a) || has_stat(b),
        Formula::CondStat(..) => true,
    }
}

/// `⟦f⟧_(PL,v)`: the set of worlds satisfying `f` under `v`.
pub fn extension(
    s: &SubjectiveStructure,
    v: &Valuation,
    f: &Formula,
) -> Result<WorldSet, EvalError> {
    s.precheck(f, v)?;
    let mut vals = v.0.clone();
    let mut memo = Memo::new();
    Ok(s.ext_rec(&mut vals, f, &mut memo))
}

/// Truth of `f` at world `w` under valuation `v`.
pub fn eval_subj(
    s: &SubjectiveStructure,
    w: usize,
    v: &Valuation,
    f: &Formula,
) -> Result<bool, EvalError> {
    if w >= s.n_worlds() {
        return Err(EvalError::WorldOutOfRange {
            world: w,
            n_worlds: s.n_worlds(),
        });
    }
    Ok(extension(s, v, f)?.contains(w))
}

/// Whether a constant denotes the same element in every world.
pub fn check_rigid(s: &SubjectiveStructure, c: &str) -> Result<bool, EvalError> {
    match s.vocab.functions.get(c) {
        None => return Err(EvalError::UnknownFunction(c.to_string())),
        Some(&ar) if ar != 0 => {
            return Err(EvalError::ArityMismatch {
                symbol: c.to_string(),
                expected: 0,
                found: ar,
            })
        }
        _ => {}
    }
    let first = s.interps[0].funcs[c][&vec![]];
    Ok(s.interps.iter().all(|i| i.funcs[c][&vec![]] == first))
}

/// Whether `∃x N(x=c)` holds: the constant is rigid up to plausibility,
/// ignoring worlds whose deviation has plausibility ⊥.
pub fn check_rigid_semantic(s: &SubjectiveStructure, c: &str) -> Result<bool, EvalError> {
    let eq = Formula::Eq(Term::Var("x".into()), Term::Func(c.to_string(), vec![]));
    let f = Formula::Exists(
        "x".into(),
        Box::new(Formula::CondSubj(
            Box::new(Formula::Not(Box::new(eq))),
            Box::new(Formula::False),
        )),
    );
    eval_subj(s, 0, &Valuation::new(), &f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{Kappa, KappaRanking, PossibilityMeasure};
    use crate::order::PlausibilityPoset;
    use crate::plausibility::ExplicitMeasure;
    use crate::syntax::{parse, Lang};
    use crate::Rat;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn kappa_measure(ranks: &[u64]) -> Measure {
        Measure::Kappa(
            KappaRanking::new(ranks.iter().map(|&r| Kappa::Fin(r)).collect()).unwrap(),
        )
    }

    fn tweety_vocab() -> Vocabulary {
        let f = parse(
            "forall x (Bird(x) => Fly(x)) & (true => Bird(tweety) & ~Fly(tweety))",
            Lang::Subj,
        )
        .unwrap();
        Vocabulary::collect([&f]).unwrap()
    }

    fn tweety_interps() -> Vec<Interpretation> {
        vec![
            Interpretation::new()
                .pred("Bird", [vec![0]])
                .pred("Fly", [])
                .constant("tweety", 0),
            Interpretation::new()
                .pred("Bird", [vec![1]])
                .pred("Fly", [])
                .constant("tweety", 1),
        ]
    }

    #[test]
    fn nonrigid_tweety_consistency() {
        let pl = ExplicitMeasure::new(2, PlausibilityPoset::chain(2), vec![0, 0, 0, 1]).unwrap();
        assert!(pl.check_qualitative().unwrap().is_some());
        let s =
            SubjectiveStructure::new(2, Measure::Explicit(pl), tweety_interps(), tweety_vocab())
                .unwrap();
        let f = parse(
            "forall x (Bird(x) => Fly(x)) & (true => Bird(tweety) & ~Fly(tweety))",
            Lang::Subj,
        )
        .unwrap();
        let v = Valuation::new();
        assert_eq!(eval_subj(&s, 0, &v, &f), Ok(true));
        assert_eq!(eval_subj(&s, 1, &v, &f), Ok(true));
        assert!(!check_rigid(&s, "tweety").unwrap());

        // a qualitative measure over the same frame refutes the conjunction
        let s2 = SubjectiveStructure::new(2, kappa_measure(&[0, 0]), tweety_interps(), tweety_vocab())
            .unwrap();
        assert_eq!(eval_subj(&s2, 0, &v, &f), Ok(false));
    }

    #[test]
    fn conditional_is_reflexive() {
        let s = SubjectiveStructure::new(
            2,
            kappa_measure(&[0, 1]),
            tweety_interps(),
            tweety_vocab(),
        )
        .unwrap();
        let v = Valuation::new();
        for phi in [
            "Bird(tweety)",
            "false",
            "forall x Fly(x)",
            "Bird(tweety) & ~Fly(tweety)",
        ] {
            let f = parse(&format!("({phi}) => ({phi})"), Lang::Subj).unwrap();
            for w in 0..2 {
                assert_eq!(eval_subj(&s, w, &v, &f), Ok(true), "phi = {phi}");
            }
        }
    }

    #[test]
    fn equality_under_n() {
        let s = SubjectiveStructure::new(
            2,
            kappa_measure(&[0, 1]),
            tweety_interps(),
            tweety_vocab(),
        )
        .unwrap();
        let f = parse("N (x = y)", Lang::Subj).unwrap();
        let same = Valuation::new().bind("x", 1).bind("y", 1);
        let diff = Valuation::new().bind("x", 0).bind("y", 1);
        assert_eq!(eval_subj(&s, 0, &same, &f), Ok(true));
        assert_eq!(eval_subj(&s, 0, &diff, &f), Ok(false));
        assert_eq!(
            eval_subj(&s, 0, &Valuation::new().bind("x", 0), &f),
            Err(EvalError::UnboundVariable("y".into()))
        );
    }

    fn lottery_truncation(n: usize) -> SubjectiveStructure {
        let f = parse("Winner(x)", Lang::Subj).unwrap();
        let vocab = Vocabulary::collect([&f]).unwrap();
        let interps = (0..n)
            .map(|w| Interpretation::new().pred("Winner", [vec![w]]))
            .collect();
        SubjectiveStructure::new(n, kappa_measure(&vec![0; n]), interps, vocab).unwrap()
    }

    #[test]
    fn extension_basics() {
        let s = lottery_truncation(3);
        let t = parse("true", Lang::Subj).unwrap();
        assert_eq!(extension(&s, &Valuation::new(), &t), Ok(WorldSet::full(3)));

        let win = parse("Winner(x)", Lang::Subj).unwrap();
        let not_win = parse("~Winner(x)", Lang::Subj).unwrap();
        for d in 0..3 {
            let v = Valuation::new().bind("x", d);
            assert_eq!(extension(&s, &v, &win), Ok(WorldSet::singleton(d)));
            assert_eq!(
                extension(&s, &v, &not_win),
                Ok(WorldSet::full(3).diff(WorldSet::singleton(d)))
            );
        }
    }

    fn nonrigid_p_structure() -> SubjectiveStructure {
        let f = parse("forall x ~N P(x) & N P(c)", Lang::Subj).unwrap();
        let vocab = Vocabulary::collect([&f]).unwrap();
        let pl = ExplicitMeasure::new(2, PlausibilityPoset::chain(3), vec![0, 1, 1, 2]).unwrap();
        let interps = vec![
            Interpretation::new().pred("P", [vec![0]]).constant("c", 0),
            Interpretation::new().pred("P", [vec![1]]).constant("c", 1),
        ];
        SubjectiveStructure::new(2, Measure::Explicit(pl), interps, vocab).unwrap()
    }

    #[test]
    fn nonrigid_constant_satisfies_np_without_witness() {
        let s = nonrigid_p_structure();
        let f = parse("forall x ~N P(x) & N P(c)", Lang::Subj).unwrap();
        let v = Valuation::new();
        assert_eq!(eval_subj(&s, 0, &v, &f), Ok(true));
        assert_eq!(eval_subj(&s, 1, &v, &f), Ok(true));
        assert!(!check_rigid(&s, "c").unwrap());
        assert!(!check_rigid_semantic(&s, "c").unwrap());
    }

    #[test]
    fn rigidity_modes() {
        let f = parse("P(c)", Lang::Subj).unwrap();
        let vocab = Vocabulary::collect([&f]).unwrap();

        let constant = vec![
            Interpretation::new().pred("P", [vec![0]]).constant("c", 1),
            Interpretation::new().pred("P", []).constant("c", 1),
        ];
        let s = SubjectiveStructure::new(2, kappa_measure(&[0, 0]), constant, vocab.clone())
            .unwrap();
        assert!(check_rigid(&s, "c").unwrap());
        assert!(check_rigid_semantic(&s, "c").unwrap());

        let single = vec![Interpretation::new().pred("P", [vec![0]]).constant("c", 0)];
        let s1 = SubjectiveStructure::new(2, kappa_measure(&[0]), single, vocab.clone()).unwrap();
        assert!(check_rigid(&s1, "c").unwrap());
        assert!(check_rigid_semantic(&s1, "c").unwrap());

        // deviation confined to a bottom-plausibility world: only the
        // semantic mode forgives it
        let pl = ExplicitMeasure::new(2, PlausibilityPoset::chain(2), vec![0, 1, 0, 1]).unwrap();
        let drifting = vec![
            Interpretation::new().pred("P", [vec![0]]).constant("c", 0),
            Interpretation::new().pred("P", [vec![0]]).constant("c", 1),
        ];
        let s2 = SubjectiveStructure::new(2, Measure::Explicit(pl), drifting, vocab).unwrap();
        assert!(!check_rigid(&s2, "c").unwrap());
        assert!(check_rigid_semantic(&s2, "c").unwrap());
    }

    fn random_structure(rng: &mut ChaCha8Rng, vocab: &Vocabulary) -> SubjectiveStructure {
        let dom = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=4);
        let pl = match rng.gen_range(0..3) {
            0 => {
                let mut ranks: Vec<Kappa> = (0..n)
                    .map(|_| {
                        if rng.gen_bool(0.1) {
                            Kappa::Inf
                        } else {
                            Kappa::Fin(rng.gen_range(0..3))
                        }
                    })
                    .collect();
                let z = rng.gen_range(0..n);
                ranks[z] = Kappa::Fin(0);
                Measure::Kappa(KappaRanking::new(ranks).unwrap())
            }
            1 => {
                let mut weights: Vec<Rat> =
                    (0..n).map(|_| Rat::new(rng.gen_range(0..=3), 3)).collect();
                let o = rng.gen_range(0..n);
                weights[o] = Rat::new(1, 1);
                Measure::Possibility(PossibilityMeasure::new(weights).unwrap())
            }
            _ => {
                let mut strict = crate::order::BitMat::new(n);
                for i in 0..n {
                    for j in (i + 1)..n {
                        if rng.gen_bool(0.4) {
                            strict.set(i, j, true);
                        }
                    }
                }
                strict.reflexive_transitive_close();
                for i in 0..n {
                    strict.set(i, i, false);
                }
                Measure::Preferential(crate::backends::PreferentialOrder::new(strict).unwrap())
            }
        };
        let interps = (0..n)
            .map(|_| {
                let mut i = Interpretation::new();
                for (p, &ar) in &vocab.predicates {
                    let mut tuples = BTreeSet::new();
                    let mut stack = vec![vec![]];
                    while let Some(t) = stack.pop() {
                        if t.len() == ar {
                            if rng.gen_bool(0.5) {
                                tuples.insert(t);
                            }
                            continue;
                        }
                        for d in 0..dom {
                            let mut t2 = t.clone();
                            t2.push(d);
                            stack.push(t2);
                        }
                    }
                    i.preds.insert(p.clone(), tuples);
                }
                for (g, &ar) in &vocab.functions {
                    let mut table = BTreeMap::new();
                    let mut stack = vec![vec![]];
                    while let Some(t) = stack.pop() {
                        if t.len() == ar {
                            table.insert(t, rng.gen_range(0..dom));
                            continue;
                        }
                        for d in 0..dom {
                            let mut t2 = t.clone();
                            t2.push(d);
                            stack.push(t2);
                        }
                    }
                    i.funcs.insert(g.clone(), table);
                }
                i
            })
            .collect();
        SubjectiveStructure::new(dom, pl, interps, vocab.clone()).unwrap()
    }

    fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
        let var = |rng: &mut ChaCha8Rng| {
            Term::Var(if rng.gen_bool(0.5) { "x" } else { "y" }.to_string())
        };
        if depth == 0 {
            return match rng.gen_range(0..4) {
                0 => Formula::Atom("P".into(), vec![var(rng)]),
                1 => Formula::Atom("Q".into(), vec![var(rng), var(rng)]),
                2 => Formula::Eq(var(rng), Term::Func("c".into(), vec![])),
                _ => Formula::Atom("P".into(), vec![Term::Func("c".into(), vec![])]),
            };
        }
        let sub = |rng: &mut ChaCha8Rng| Box::new(random_formula(rng, depth - 1));
        match rng.gen_range(0..7) {
            0 => Formula::Not(sub(rng)),
            1 => Formula::And(sub(rng), sub(rng)),
            2 => Formula::Or(sub(rng), sub(rng)),
            3 => Formula::Implies(sub(rng), sub(rng)),
            4 => Formula::Forall(
                if rng.gen_bool(0.5) { "x" } else { "y" }.to_string(),
                sub(rng),
            ),
            5 => Formula::Exists("x".to_string(), sub(rng)),
            _ => Formula::CondSubj(sub(rng), sub(rng)),
        }
    }

    fn fuzz_vocab() -> Vocabulary {
        let f = parse("P(x) & Q(x, y) & P(c)", Lang::Subj).unwrap();
        Vocabulary::collect([&f]).unwrap()
    }

    #[test]
    fn sentence_truth_ignores_the_valuation() {
        let vocab = fuzz_vocab();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..60 {
            let s = random_structure(&mut rng, &vocab);
            let f = random_formula(&mut rng, 3).universal_closure();
            let v1 = Valuation::new().bind("x", 0).bind("y", 0);
            let v2 = Valuation::new()
                .bind("x", rng.gen_range(0..s.dom_size()))
                .bind("y", rng.gen_range(0..s.dom_size()));
            for w in 0..s.n_worlds() {
                assert_eq!(eval_subj(&s, w, &v1, &f), eval_subj(&s, w, &v2, &f));
            }
        }
    }

    #[test]
    fn conditional_truth_ignores_the_world() {
        let vocab = fuzz_vocab();
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        for _ in 0..60 {
            let s = random_structure(&mut rng, &vocab);
            let f = Formula::CondSubj(
                Box::new(random_formula(&mut rng, 2)),
                Box::new(random_formula(&mut rng, 2)),
            );
            let v = Valuation::new().bind("x", 0).bind("y", 0);
            let at0 = eval_subj(&s, 0, &v, &f).unwrap();
            for w in 1..s.n_worlds() {
                assert_eq!(eval_subj(&s, w, &v, &f), Ok(at0));
            }
        }
    }

    #[test]
    fn variable_equality_ignores_the_world() {
        let vocab = fuzz_vocab();
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let f = parse("x = y", Lang::Subj).unwrap();
        for _ in 0..20 {
            let s = random_structure(&mut rng, &vocab);
            for dx in 0..s.dom_size() {
                for dy in 0..s.dom_size() {
                    let v = Valuation::new().bind("x", dx).bind("y", dy);
                    let at0 = eval_subj(&s, 0, &v, &f).unwrap();
                    assert_eq!(at0, dx == dy);
                    for w in 1..s.n_worlds() {
                        assert_eq!(eval_subj(&s, w, &v, &f), Ok(at0));
                    }
                }
            }
        }
    }

    fn zero_ary_structure(pl: Measure, truth: &[(bool, bool, bool)]) -> SubjectiveStructure {
        let f = parse("pa & pb & pc", Lang::Subj).unwrap();
        let vocab = Vocabulary::collect([&f]).unwrap();
        let interps = truth
            .iter()
            .map(|&(a, b, c)| {
                let mut i = Interpretation::new();
                i.preds
                    .insert("pa".into(), if a { [vec![]].into() } else { BTreeSet::new() });
                i.preds
                    .insert("pb".into(), if b { [vec![]].into() } else { BTreeSet::new() });
                i.preds
                    .insert("pc".into(), if c { [vec![]].into() } else { BTreeSet::new() });
                i
            })
            .collect();
        SubjectiveStructure::new(1, pl, interps, vocab).unwrap()
    }

    /// A counting measure violates A2, and the AND rule breaks with it.
    #[test]
    fn and_rule_fails_without_qualitativeness() {
        let poset = PlausibilityPoset::chain(4);
        let assign: Vec<usize> = (0u64..8).map(|m| m.count_ones() as usize).collect();
        let pl = ExplicitMeasure::new(3, poset, assign).unwrap();
        assert!(pl.check_qualitative().unwrap().is_some());
        let s = zero_ary_structure(
            Measure::Explicit(pl),
            &[(true, false, false), (false, true, false), (false, false, true)],
        );
        let v = Valuation::new();
        let p1 = parse("pa | pb | pc => pa | pb", Lang::Subj).unwrap();
        let p2 = parse("pa | pb | pc => pa | pc", Lang::Subj).unwrap();
        let conc = parse("pa | pb | pc => (pa | pb) & (pa | pc)", Lang::Subj).unwrap();
        assert_eq!(eval_subj(&s, 0, &v, &p1), Ok(true));
        assert_eq!(eval_subj(&s, 0, &v, &p2), Ok(true));
        assert_eq!(eval_subj(&s, 0, &v, &conc), Ok(false));
    }

    #[test]
    fn klm_rules_hold_on_qualitative_structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        let mut and_fired = 0;
        let mut or_fired = 0;
        let mut cm_fired = 0;
        let v = Valuation::new();
        for _ in 0..300 {
            let n = rng.gen_range(1..=4);
            let mut ranks: Vec<Kappa> = (0..n).map(|_| Kappa::Fin(rng.gen_range(0..3))).collect();
            let z = rng.gen_range(0..n);
            ranks[z] = Kappa::Fin(0);
            let truth: Vec<(bool, bool, bool)> = (0..n)
                .map(|_| (rng.gen_bool(0.5), rng.gen_bool(0.5), rng.gen_bool(0.5)))
                .collect();
            let s = zero_ary_structure(
                Measure::Kappa(KappaRanking::new(ranks).unwrap()),
                &truth,
            );
            let atoms = ["pa", "pb", "pc", "pa | pb", "pa & pc", "~pb"];
            let phi = atoms[rng.gen_range(0..atoms.len())];
            let phi2 = atoms[rng.gen_range(0..atoms.len())];
            let psi1 = atoms[rng.gen_range(0..atoms.len())];
            let psi2 = atoms[rng.gen_range(0..atoms.len())];
            let holds = |formula: &str, s: &SubjectiveStructure| {
                eval_subj(s, 0, &v, &parse(formula, Lang::Subj).unwrap()).unwrap()
            };
            if holds(&format!("({phi}) => ({psi1})"), &s)
                && holds(&format!("({phi}) => ({psi2})"), &s)
            {
                and_fired += 1;
                assert!(holds(&format!("({phi}) => ({psi1}) & ({psi2})"), &s));
                cm_fired += 1;
                assert!(holds(&format!("({phi}) & ({psi2}) => ({psi1})"), &s));
            }
            if holds(&format!("({phi}) => ({psi1})"), &s)
                && holds(&format!("({phi2}) => ({psi1})"), &s)
            {
                or_fired += 1;
                assert!(holds(&format!("({phi}) | ({phi2}) => ({psi1})"), &s));
            }
        }
        assert!(and_fired > 20 && or_fired > 20 && cm_fired > 20);
    }

    #[test]
    fn structure_validation() {
        let vocab = tweety_vocab();
        assert!(matches!(
            SubjectiveStructure::new(0, kappa_measure(&[0]), vec![], vocab.clone()),
            Err(StructureError::EmptyDomain)
        ));
        assert!(matches!(
            SubjectiveStructure::new(2, kappa_measure(&[0, 0]), tweety_interps()[..1].to_vec(), vocab.clone()),
            Err(StructureError::WorldCountMismatch { .. })
        ));
        let missing = vec![
            Interpretation::new().pred("Bird", [vec![0]]).constant("tweety", 0),
            tweety_interps().remove(1),
        ];
        assert!(matches!(
            SubjectiveStructure::new(2, kappa_measure(&[0, 0]), missing, vocab.clone()),
            Err(StructureError::MissingSymbol { .. })
        ));
        let stray = vec![
            Interpretation::new()
                .pred("Bird", [vec![5]])
                .pred("Fly", [])
                .constant("tweety", 0),
        ];
        assert!(matches!(
            SubjectiveStructure::new(2, kappa_measure(&[0]), stray, vocab.clone()),
            Err(StructureError::ElementOutOfRange { .. })
        ));

        let s = SubjectiveStructure::new(2, kappa_measure(&[0, 1]), tweety_interps(), vocab)
            .unwrap();
        let v = Valuation::new();
        let unknown = parse("Swims(tweety)", Lang::Subj).unwrap();
        assert_eq!(
            eval_subj(&s, 0, &v, &unknown),
            Err(EvalError::UnknownPredicate("Swims".into()))
        );
        let wrong_arity = parse("Bird(tweety, tweety)", Lang::Subj).unwrap();
        assert!(matches!(
            eval_subj(&s, 0, &v, &wrong_arity),
            Err(EvalError::ArityMismatch { .. })
        ));
        let stat = Formula::CondStat(
            ["x1".to_string()].into(),
            Box::new(Formula::True),
            Box::new(Formula::True),
        );
        assert_eq!(eval_subj(&s, 0, &v, &stat), Err(EvalError::StatConditional));
        assert!(matches!(
            eval_subj(&s, 7, &v, &Formula::True),
            Err(EvalError::WorldOutOfRange { .. })
        ));
    }
}
