//! Statistical structures and satisfaction for the statistical conditional
//! language.
//!
//! A statistical structure has one rigid interpretation and a plausibility
//! measure over the valuation space `Dom^k`, where `k` bounds the variable
//! indices a session may mention. A point of that space assigns every
//! coordinate; formula extensions are point sets. The conditional
//! `⟶_X(φ,ψ)` compares `⟦φ∧ψ⟧` against `⟦φ∧¬ψ⟧` as cylinders: free
//! variables of the pair outside `X` are pinned to their ambient values,
//! while `X` and every coordinate the pair does not mention range over the
//! whole domain. Renaming invariance (REN) asks the measure to be symmetric
//! under coordinate permutations.

use crate::backends::Measure;
use crate::subjective::{
    validate_interp, EvalError, Interpretation, StructureError, Valuation,
};
use crate::syntax::{is_stat_variable, Formula, Ident, Term, Vocabulary};
use crate::WorldSet;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashMap};

pub const MAX_POINTS: usize = 64;

/// A statistical structure `(Dom, π, Pl)` truncated to `k` coordinates.
#[derive(Clone, Debug)]
pub struct StatisticalStructure {
    dom: usize,
    k: usize,
    interp: Interpretation,
    pl: Measure,
    vocab: Vocabulary,
}

/// Coordinate index of a statistical variable: `x3` → 2.
fn stat_index(name: &str) -> Option<usize> {
    if is_stat_variable(name) {
        name[1..].parse::<usize>().ok().map(|i| i - 1)
    } else {
        None
    }
}

impl StatisticalStructure {
    pub fn new(
        dom: usize,
        k: usize,
        interp: Interpretation,
        pl: Measure,
        vocab: Vocabulary,
    ) -> Result<StatisticalStructure, StructureError> {
        if dom == 0 {
            return Err(StructureError::EmptyDomain);
        }
        if k == 0 {
            return Err(StructureError::EmptyDomain);
        }
        let points = dom
            .checked_pow(k as u32)
            .filter(|&p| p <= MAX_POINTS)
            .ok_or(StructureError::TooManyPoints {
                got: usize::MAX,
                cap: MAX_POINTS,
            })?;
        if points > MAX_POINTS {
            return Err(StructureError::TooManyPoints {
                got: points,
                cap: MAX_POINTS,
            });
        }
        if pl.n_worlds() != points {
            return Err(StructureError::PointCountMismatch {
                measure: pl.n_worlds(),
                points,
            });
        }
        validate_interp(dom, 0, &interp, &vocab)?;
        Ok(StatisticalStructure {
            dom,
            k,
            interp,
            pl,
            vocab,
        })
    }

    pub fn dom_size(&self) -> usize {
        self.dom
    }

    pub fn slots(&self) -> usize {
        self.k
    }

    pub fn n_points(&self) -> usize {
        self.dom.pow(self.k as u32)
    }

    pub fn pl(&self) -> &Measure {
        &self.pl
    }

    pub fn interp(&self) -> &Interpretation {
        &self.interp
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Coordinate `i` of point `p`.
    pub fn coord(&self, p: usize, i: usize) -> usize {
        p / self.dom.pow(i as u32) % self.dom
    }

    /// Point `p` with coordinate `i` replaced by `d`.
    pub fn with_coord(&self, p: usize, i: usize, d: usize) -> usize {
        let stride = self.dom.pow(i as u32);
        p - self.coord(p, i) * stride + d * stride
    }

    /// The point a valuation denotes; coordinates the valuation does not
    /// mention sit at element 0.
    pub fn point(&self, v: &Valuation) -> usize {
        let mut p = 0;
        for i in 0..self.k {
            if let Some(d) = v.get(&format!("x{}", i + 1)) {
                p = self.with_coord(p, i, d);
            }
        }
        p
    }

    fn precheck(&self, f: &Formula, v: &Valuation) -> Result<(), EvalError> {
        let fvoc = Vocabulary::collect([f])?;
        for (p, &ar) in &fvoc.predicates {
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
        for (g, &ar) in &fvoc.functions {
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
        check_stat_vars(f, self.k)?;
        for x in f.free_vars() {
            if v.get(&x).is_none() {
                return Err(EvalError::UnboundVariable(x));
            }
        }
        Ok(())
    }

    fn term_val(&self, p: usize, t: &Term) -> usize {
        match t {
            Term::Var(x) => self.coord(p, stat_index(x).expect("checked")),
            Term::Func(g, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.term_val(p, a)).collect();
                self.interp.funcs[g][&vals]
            }
        }
    }

    fn ext_rec(&self, f: &Formula, memo: &mut HashMap<usize, WorldSet>) -> WorldSet {
        let key = f as *const Formula as usize;
        if let Some(&ws) = memo.get(&key) {
            return ws;
        }
        let n = self.n_points();
        let full = WorldSet::full(n);
        let out = match f {
            Formula::True => full,
            Formula::False => WorldSet::EMPTY,
            Formula::Atom(pr, args) => {
                let mut ws = WorldSet::EMPTY;
                for p in 0..n {
                    let tuple: Vec<usize> = args.iter().map(|t| self.term_val(p, t)).collect();
                    if self.interp.preds[pr].contains(&tuple) {
                        ws.insert(p);
                    }
                }
                ws
            }
            Formula::Eq(a, b) => {
                let mut ws = WorldSet::EMPTY;
                for p in 0..n {
                    if self.term_val(p, a) == self.term_val(p, b) {
                        ws.insert(p);
                    }
                }
                ws
            }
            Formula::Not(g) => full.diff(self.ext_rec(g, memo)),
            Formula::And(a, b) => self.ext_rec(a, memo).inter(self.ext_rec(b, memo)),
            Formula::Or(a, b) => self.ext_rec(a, memo).union(self.ext_rec(b, memo)),
            Formula::Implies(a, b) => {
                full.diff(self.ext_rec(a, memo)).union(self.ext_rec(b, memo))
            }
            Formula::Forall(x, body) => {
                let i = stat_index(x).expect("checked");
                let e = self.ext_rec(body, memo);
                let mut ws = WorldSet::EMPTY;
                for p in 0..n {
                    if (0..self.dom).all(|d| e.contains(self.with_coord(p, i, d))) {
                        ws.insert(p);
                    }
                }
                ws
            }
            Formula::Exists(x, body) => {
                let i = stat_index(x).expect("checked");
                let e = self.ext_rec(body, memo);
                let mut ws = WorldSet::EMPTY;
                for p in 0..n {
                    if (0..self.dom).any(|d| e.contains(self.with_coord(p, i, d))) {
                        ws.insert(p);
                    }
                }
                ws
            }
            Formula::CondStat(xs, a, b) => {
                let ea = self.ext_rec(a, memo);
                let eb = self.ext_rec(b, memo);
                // truth at v depends only on the anchored coordinates, so
                // the extension is a union of anchor classes
                let fa = a.free_vars();
                let fb = b.free_vars();
                let anchored: Vec<usize> = (0..self.k)
                    .filter(|&i| {
                        let x = format!("x{}", i + 1);
                        !xs.contains(&x) && (fa.contains(&x) || fb.contains(&x))
                    })
                    .collect();
                let vary: Vec<usize> =
                    (0..self.k).filter(|i| !anchored.contains(i)).collect();
                let mut ws = WorldSet::EMPTY;
                let mut seen = WorldSet::EMPTY;
                for p in 0..n {
                    if seen.contains(p) {
                        continue;
                    }
                    let class = self.sim_class(p, &vary);
                    seen = seen.union(class);
                    let sa = self.anchor_cylinder(ea, p, &anchored);
                    let sb = self.anchor_cylinder(eb, p, &anchored);
                    if self.pl.cond_sat(sa, sb) {
                        ws = ws.union(class);
                    }
                }
                ws
            }
            Formula::CondSubj(..) => unreachable!("rejected by precheck"),
        };
        memo.insert(key, out);
        out
    }

    /// Points landing in `set` after the anchored coordinates are
    /// overwritten with their values at `p`: the cylinder extension of the
    /// anchored restriction of `set`.
    fn anchor_cylinder(&self, set: WorldSet, p: usize, anchored: &[usize]) -> WorldSet {
        let mut out = WorldSet::EMPTY;
        for q in 0..self.n_points() {
            let mut qa = q;
            for &i in anchored {
                qa = self.with_coord(qa, i, self.coord(p, i));
            }
            if set.contains(qa) {
                out.insert(q);
            }
        }
        out
    }

    /// All points agreeing with `p` outside the varying coordinates.
    fn sim_class(&self, p: usize, vary: &[usize]) -> WorldSet {
        let mut class = WorldSet::singleton(p);
        for &i in vary {
            let mut wider = WorldSet::EMPTY;
            for q in class.iter() {
                for d in 0..self.dom {
                    wider.insert(self.with_coord(q, i, d));
                }
            }
            class = wider;
        }
        class
    }
}

/// Every variable mentioned anywhere in `f` (free, bound, or in a
/// conditional subscript) must be a statistical variable within `k`.
fn check_stat_vars(f: &Formula, k: usize) -> Result<(), EvalError> {
    let mut vars = BTreeSet::new();
    collect_vars(f, &mut vars)?;
    for x in vars {
        match stat_index(&x) {
            None => return Err(EvalError::NotStatVariable(x)),
            Some(i) if i >= k => return Err(EvalError::VariableOutOfRange { var: x, k }),
            _ => {}
        }
    }
    Ok(())
}

fn collect_vars(f: &Formula, out: &mut BTreeSet<Ident>) -> Result<(), EvalError> {
    match f {
        Formula::True | Formula::False => Ok(()),
        Formula::Atom(_, args) => {
            for t in args {
                out.extend(t.vars());
            }
            Ok(())
        }
        Formula::Eq(a, b) => {
            out.extend(a.vars());
            out.extend(b.vars());
            Ok(())
        }
        Formula::Not(g) => collect_vars(g, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            collect_vars(a, out)?;
            collect_vars(b, out)
        }
        Formula::Forall(x, g) | Formula::Exists(x, g) => {
            out.insert(x.clone());
            collect_vars(g, out)
        }
        Formula::CondStat(xs, a, b) => {
            out.extend(xs.iter().cloned());
            collect_vars(a, out)?;
            collect_vars(b, out)
        }
        Formula::CondSubj(..) => Err(EvalError::SubjConditional),
    }
}

/// `⟦f⟧`: the set of valuation points satisfying `f`.
pub fn extension_stat(s: &StatisticalStructure, f: &Formula) -> Result<WorldSet, EvalError> {
    s.precheck(f, &all_zero_valuation(s.k))?;
    let mut memo = HashMap::new();
    Ok(s.ext_rec(f, &mut memo))
}

fn all_zero_valuation(k: usize) -> Valuation {
    let mut v = Valuation::new();
    for i in 1..=k {
        v.set(&format!("x{i}"), 0);
    }
    v
}

/// Truth of `f` under valuation `v`.
pub fn eval_stat(s: &StatisticalStructure, v: &Valuation, f: &Formula) -> Result<bool, EvalError> {
    s.precheck(f, v)?;
    let mut memo = HashMap::new();
    Ok(s.ext_rec(f, &mut memo).contains(s.point(v)))
}

/// Outcome of the renaming-invariance check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RenOutcome {
    Ok,
    Violation { perm: Vec<usize>, set: WorldSet },
}

/// Whether the measure is invariant under coordinate permutations:
/// `Pl(A^h) = Pl(A)` for every permutation `h` of the `k` coordinates.
/// Exhaustive over subsets when the space has at most 16 points, sampled
/// (fixed seed) otherwise.
pub fn check_ren(s: &StatisticalStructure) -> RenOutcome {
    let n = s.n_points();
    let perms = permutations(s.k);
    let image = |a: WorldSet, h: &[usize]| {
        let mut out = WorldSet::EMPTY;
        for p in a.iter() {
            let mut q = 0;
            for (i, &hi) in h.iter().enumerate() {
                q = s.with_coord(q, i, s.coord(p, hi));
            }
            out.insert(q);
        }
        out
    };
    let probe = |a: WorldSet| {
        for h in &perms[1..] {
            let ah = image(a, h);
            if !s.pl.pl_eq(a, ah) {
                return Some(RenOutcome::Violation {
                    perm: h.clone(),
                    set: a,
                });
            }
        }
        None
    };
    if n <= 16 {
        for a in WorldSet::all(n) {
            if let Some(v) = probe(a) {
                return v;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..4096 {
            let mask: u64 = rng.gen::<u64>() & WorldSet::full(n).0;
            if let Some(v) = probe(WorldSet(mask)) {
                return v;
            }
        }
    }
    RenOutcome::Ok
}

/// All permutations of `0..k` via Heap's algorithm, identity first.
fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![(0..k).collect::<Vec<_>>()];
    let mut arr: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                arr.swap(0, i);
            } else {
                arr.swap(c[i], i);
            }
            out.push(arr.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// One instance of the product property: if `Pl` ranks the cylinder over
/// `A` (coordinates `x1..xn`) no higher than the cylinder over `A'`, the
/// ranking survives conjoining a cylinder over `B` (coordinates
/// `x(n+1)..x(n+m)`).
pub fn check_product_property(
    s: &StatisticalStructure,
    n: usize,
    m: usize,
    a: &BTreeSet<Vec<usize>>,
    a_prime: &BTreeSet<Vec<usize>>,
    b: &BTreeSet<Vec<usize>>,
) -> Result<bool, EvalError> {
    if n + m > s.k {
        return Err(EvalError::VariableOutOfRange {
            var: format!("x{}", n + m),
            k: s.k,
        });
    }
    for t in a.iter().chain(a_prime) {
        if t.len() != n || t.iter().any(|&e| e >= s.dom) {
            return Err(EvalError::ArityMismatch {
                symbol: "product-property A".into(),
                expected: n,
                found: t.len(),
            });
        }
    }
    for t in b {
        if t.len() != m || t.iter().any(|&e| e >= s.dom) {
            return Err(EvalError::ArityMismatch {
                symbol: "product-property B".into(),
                expected: m,
                found: t.len(),
            });
        }
    }
    let cyl = |tuples: &BTreeSet<Vec<usize>>, offset: usize, width: usize| {
        let mut out = WorldSet::EMPTY;
        for p in 0..s.n_points() {
            let proj: Vec<usize> = (0..width).map(|i| s.coord(p, offset + i)).collect();
            if tuples.contains(&proj) {
                out.insert(p);
            }
        }
        out
    };
    let ca = cyl(a, 0, n);
    let ca2 = cyl(a_prime, 0, n);
    let cb = cyl(b, n, m);
    Ok(!s.pl.pl_leq(ca, ca2) || s.pl.pl_leq(ca.inter(cb), ca2.inter(cb)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{Kappa, KappaRanking, PossibilityMeasure};
    use crate::order::PlausibilityPoset;
    use crate::plausibility::ExplicitMeasure;
    use crate::syntax::{parse, Lang};
    use crate::Rat;

    fn vocab_pq() -> Vocabulary {
        let f = parse("P(x1) & Q(x1, x2)", Lang::Stat).unwrap();
        Vocabulary::collect([&f]).unwrap()
    }

    fn kappa_points(ranks: Vec<u64>) -> Measure {
        Measure::Kappa(KappaRanking::new(ranks.into_iter().map(Kappa::Fin).collect()).unwrap())
    }

    /// κ product measure: the rank of a point is the sum of per-coordinate
    /// ranks. Symmetric by construction.
    fn kappa_product(s_dom: usize, k: usize, coord_ranks: &[u64]) -> Measure {
        let points = s_dom.pow(k as u32);
        let ranks = (0..points)
            .map(|p| {
                Kappa::Fin(
                    (0..k)
                        .map(|i| coord_ranks[p / s_dom.pow(i as u32) % s_dom])
                        .sum(),
                )
            })
            .collect();
        Measure::Kappa(KappaRanking::new(ranks).unwrap())
    }

    fn structure(dom: usize, k: usize, pl: Measure, p_of: &[usize]) -> StatisticalStructure {
        let interp = Interpretation::new()
            .pred("P", p_of.iter().map(|&d| vec![d]).collect::<Vec<_>>())
            .pred("Q", []);
        StatisticalStructure::new(dom, k, interp, pl, vocab_pq()).unwrap()
    }

    #[test]
    fn stat_conditional_is_reflexive() {
        let s = structure(2, 2, kappa_product(2, 2, &[0, 1]), &[0]);
        let v = Valuation::new().bind("x1", 0).bind("x2", 0);
        for phi in ["P(x1)", "Q(x1, x2)", "false", "P(x1) | P(x2)"] {
            let f = parse(&format!("({phi}) =[x1]=> ({phi})"), Lang::Stat).unwrap();
            assert_eq!(eval_stat(&s, &v, &f), Ok(true), "phi = {phi}");
        }
    }

    #[test]
    fn uniform_pair_rejects_default() {
        // Pl({d1}) = Pl({d2}) < Pl(dom): the slice comparison ties, so the
        // default is rejected
        let pl = ExplicitMeasure::new(2, PlausibilityPoset::chain(3), vec![0, 1, 1, 2]).unwrap();
        let s = structure(2, 1, Measure::Explicit(pl), &[0]);
        let f = parse("true =[x1]=> P(x1)", Lang::Stat).unwrap();
        let v = Valuation::new().bind("x1", 0);
        assert_eq!(eval_stat(&s, &v, &f), Ok(false));

        // breaking the tie in favor of P accepts it
        let pl2 = ExplicitMeasure::new(2, PlausibilityPoset::chain(3), vec![0, 2, 1, 2]).unwrap();
        let s2 = structure(2, 1, Measure::Explicit(pl2), &[0]);
        assert_eq!(eval_stat(&s2, &v, &f), Ok(true));
    }

    fn random_symmetric_structure(rng: &mut ChaCha8Rng) -> StatisticalStructure {
        let dom = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=2);
        let coord_ranks: Vec<u64> = {
            let mut r: Vec<u64> = (0..dom).map(|_| rng.gen_range(0..3)).collect();
            r[rng.gen_range(0..dom)] = 0;
            r
        };
        let p_of: Vec<usize> = (0..dom).filter(|_| rng.gen_bool(0.5)).collect();
        structure(dom, k, kappa_product(dom, k, &coord_ranks), &p_of)
    }

    fn random_stat_formula(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
        let var = |rng: &mut ChaCha8Rng| {
            Term::Var(if rng.gen_bool(0.5) { "x1" } else { "x2" }.to_string())
        };
        if depth == 0 {
            return match rng.gen_range(0..3) {
                0 => Formula::Atom("P".into(), vec![var(rng)]),
                1 => Formula::Atom("Q".into(), vec![var(rng), var(rng)]),
                _ => Formula::Eq(var(rng), var(rng)),
            };
        }
        let sub = |rng: &mut ChaCha8Rng| Box::new(random_stat_formula(rng, depth - 1));
        match rng.gen_range(0..7) {
            0 => Formula::Not(sub(rng)),
            1 => Formula::And(sub(rng), sub(rng)),
            2 => Formula::Or(sub(rng), sub(rng)),
            3 => Formula::Implies(sub(rng), sub(rng)),
            4 => Formula::Forall(
                if rng.gen_bool(0.5) { "x1" } else { "x2" }.to_string(),
                sub(rng),
            ),
            5 => Formula::Exists("x1".to_string(), sub(rng)),
            _ => {
                let xs: BTreeSet<Ident> = if rng.gen_bool(0.5) {
                    ["x1".to_string()].into()
                } else {
                    ["x1".to_string(), "x2".to_string()].into()
                };
                Formula::CondStat(xs, sub(rng), sub(rng))
            }
        }
    }

    #[test]
    fn axiom_u_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let mut fired = 0;
        for _ in 0..200 {
            let s = random_symmetric_structure(&mut rng);
            if s.slots() < 2 {
                continue;
            }
            let psi = random_stat_formula(&mut rng, 2);
            let phi = random_stat_formula(&mut rng, 2);
            let forall_psi = Formula::Forall(
                "x1".into(),
                Box::new(Formula::Forall("x2".into(), Box::new(psi.clone()))),
            );
            let v = Valuation::new().bind("x1", 0).bind("x2", 0);
            if eval_stat(&s, &v, &forall_psi).unwrap() {
                fired += 1;
                let cond = Formula::CondStat(
                    ["x1".to_string(), "x2".to_string()].into(),
                    Box::new(phi),
                    Box::new(psi),
                );
                assert!(eval_stat(&s, &v, &cond).unwrap());
            }
        }
        assert!(fired > 10);
    }

    #[test]
    fn ren_accepts_products_and_small_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        for _ in 0..40 {
            let s = random_symmetric_structure(&mut rng);
            assert_eq!(check_ren(&s), RenOutcome::Ok);
        }
        // k = 1 is vacuously symmetric, whatever the measure
        let s = structure(3, 1, kappa_points(vec![0, 2, 1]), &[0]);
        assert_eq!(check_ren(&s), RenOutcome::Ok);
    }

    #[test]
    fn ren_flags_asymmetry() {
        // rank (d0,d1) differently from (d1,d0)
        let mut ranks = vec![0u64; 4];
        ranks[1] = 2; // point (d1, d0)
        ranks[2] = 1; // point (d0, d1)
        let s = structure(2, 2, kappa_points(ranks), &[0]);
        match check_ren(&s) {
            RenOutcome::Violation { perm, set } => {
                assert_eq!(perm, vec![1, 0]);
                assert!(set.contains(1) ^ set.contains(2));
            }
            RenOutcome::Ok => panic!("asymmetric measure passed REN"),
        }
    }

    /// Renaming a variable the subscript binds (to a fresh one) preserves
    /// truth at every valuation when the measure is symmetric.
    #[test]
    fn renaming_bound_variables_is_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        for _ in 0..150 {
            let dom = rng.gen_range(1..=2);
            let coord_ranks: Vec<u64> = {
                let mut r: Vec<u64> = (0..dom).map(|_| rng.gen_range(0..3)).collect();
                r[rng.gen_range(0..dom)] = 0;
                r
            };
            let p_of: Vec<usize> = (0..dom).filter(|_| rng.gen_bool(0.5)).collect();
            let s = structure(dom, 3, kappa_product(dom, 3, &coord_ranks), &p_of);

            // rename x1 to the fresh x3; x2 stays anchored when outside X
            let phi = random_stat_formula(&mut rng, 2);
            let psi = random_stat_formula(&mut rng, 2);
            let xs: BTreeSet<Ident> = if rng.gen_bool(0.5) {
                ["x1".to_string()].into()
            } else {
                ["x1".to_string(), "x2".to_string()].into()
            };
            let xs_renamed: BTreeSet<Ident> = xs
                .iter()
                .map(|x| if x == "x1" { "x3".to_string() } else { x.clone() })
                .collect();
            let orig = Formula::CondStat(xs, Box::new(phi.clone()), Box::new(psi.clone()));
            let renamed = Formula::CondStat(
                xs_renamed,
                Box::new(phi.substitute("x1", &Term::Var("x3".into())).unwrap()),
                Box::new(psi.substitute("x1", &Term::Var("x3".into())).unwrap()),
            );
            for p in 0..s.n_points() {
                let mut v = Valuation::new();
                for i in 0..3 {
                    v.set(&format!("x{}", i + 1), s.coord(p, i));
                }
                assert_eq!(
                    eval_stat(&s, &v, &orig).unwrap(),
                    eval_stat(&s, &v, &renamed).unwrap(),
                    "orig = {orig:?}"
                );
            }
        }
    }

    /// Pins the reading of the conditional's comparison sets. Anchoring
    /// every non-X coordinate of the space would make this pair diverge at
    /// v = (d0, d1): along x1 the slice through (d0, d1) beats its
    /// complement, while along x2 the slice through (d0, d0) ties. As
    /// cylinders both conditionals are false everywhere.
    #[test]
    fn renaming_survives_the_asymmetric_tail() {
        let half = Rat::new(1, 2);
        let one = Rat::from_integer(1);
        let pl = PossibilityMeasure::new(vec![one, one, one, half]).unwrap();
        let interp = Interpretation::new()
            .pred("P", (0..2).map(|d| vec![d]).collect::<Vec<_>>())
            .pred("Q", [vec![0]]);
        let f = parse("P(x1) & Q(x2)", Lang::Stat).unwrap();
        let vocab = Vocabulary::collect([&f]).unwrap();
        let s = StatisticalStructure::new(2, 2, interp, Measure::Possibility(pl), vocab)
            .unwrap();
        assert_eq!(check_ren(&s), RenOutcome::Ok);

        let orig = parse("P(x1) =[x1]=> Q(x1)", Lang::Stat).unwrap();
        let renamed = parse("P(x2) =[x2]=> Q(x2)", Lang::Stat).unwrap();
        for p in 0..s.n_points() {
            let v = Valuation::new()
                .bind("x1", s.coord(p, 0))
                .bind("x2", s.coord(p, 1));
            assert_eq!(eval_stat(&s, &v, &orig), Ok(false));
            assert_eq!(eval_stat(&s, &v, &renamed), Ok(false));
        }
    }

    /// Renaming a variable the subscript does not bind can change truth:
    /// the subscript slices along different axes before and after.
    #[test]
    fn renaming_free_variables_is_unsound() {
        let s = structure(2, 3, kappa_product(2, 3, &[0, 0]), &[1]);
        let orig = parse("P(x2) =[x1]=> Q(x1, x1)", Lang::Stat).unwrap();
        let renamed = parse("P(x3) =[x1]=> Q(x1, x1)", Lang::Stat).unwrap();
        let v = Valuation::new().bind("x1", 0).bind("x2", 0).bind("x3", 1);
        assert_eq!(eval_stat(&s, &v, &orig), Ok(true));
        assert_eq!(eval_stat(&s, &v, &renamed), Ok(false));
    }

    #[test]
    fn product_property_trivial_and_product_cases() {
        let full_b: BTreeSet<Vec<usize>> = (0..3).map(|d| vec![d]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(84);
        for _ in 0..20 {
            let dom = 3;
            let coord_ranks: Vec<u64> = {
                let mut r: Vec<u64> = (0..dom).map(|_| rng.gen_range(0..3)).collect();
                r[rng.gen_range(0..dom)] = 0;
                r
            };
            let s = structure(dom, 2, kappa_product(dom, 2, &coord_ranks), &[0]);
            let subsets: Vec<BTreeSet<Vec<usize>>> = (0..(1 << dom))
                .map(|mask| {
                    (0..dom)
                        .filter(|d| mask >> d & 1 == 1)
                        .map(|d| vec![d])
                        .collect()
                })
                .collect();
            for a in &subsets {
                for a2 in &subsets {
                    assert_eq!(
                        check_product_property(&s, 1, 1, a, a2, &full_b),
                        Ok(true)
                    );
                    for b in &subsets {
                        assert_eq!(
                            check_product_property(&s, 1, 1, a, a2, b),
                            Ok(true),
                            "product measure must satisfy the product property"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn product_property_fails_off_products() {
        // diagonal κ: (0,0) and (1,1) plausible, the mixed points less so;
        // symmetric under the swap yet not a product
        let s = structure(2, 2, kappa_points(vec![0, 1, 1, 0]), &[0]);
        assert_eq!(check_ren(&s), RenOutcome::Ok);
        let a: BTreeSet<Vec<usize>> = [vec![0]].into();
        let a2: BTreeSet<Vec<usize>> = [vec![1]].into();
        let b: BTreeSet<Vec<usize>> = [vec![0]].into();
        assert_eq!(check_product_property(&s, 1, 1, &a, &a2, &b), Ok(false));

        // a small search also finds such instances without being told
        let mut rng = ChaCha8Rng::seed_from_u64(85);
        let mut found = false;
        'search: for _ in 0..200 {
            let r01 = rng.gen_range(0..3);
            let ranks = vec![rng.gen_range(0..3), r01, r01, rng.gen_range(0..3)];
            if !ranks.contains(&0) {
                continue;
            }
            let s = structure(2, 2, kappa_points(ranks), &[0]);
            let subsets: Vec<BTreeSet<Vec<usize>>> = (0..4usize)
                .map(|mask| (0..2).filter(|d| mask >> d & 1 == 1).map(|d| vec![d]).collect())
                .collect();
            for a in &subsets {
                for a2 in &subsets {
                    for b in &subsets {
                        if check_product_property(&s, 1, 1, a, a2, b) == Ok(false) {
                            found = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn closed_formulas_ignore_the_valuation() {
        let mut rng = ChaCha8Rng::seed_from_u64(86);
        for _ in 0..60 {
            let s = random_symmetric_structure(&mut rng);
            if s.slots() < 2 {
                continue;
            }
            let f = random_stat_formula(&mut rng, 3).universal_closure();
            let v1 = Valuation::new().bind("x1", 0).bind("x2", 0);
            let v2 = Valuation::new()
                .bind("x1", rng.gen_range(0..s.dom_size()))
                .bind("x2", rng.gen_range(0..s.dom_size()));
            assert_eq!(eval_stat(&s, &v1, &f), eval_stat(&s, &v2, &f));
        }
    }

    #[test]
    fn stat_validation() {
        let s = structure(2, 2, kappa_product(2, 2, &[0, 0]), &[0]);
        let v = Valuation::new().bind("x1", 0).bind("x2", 0);

        let deep = parse("P(x3)", Lang::Stat).unwrap();
        assert_eq!(
            eval_stat(&s, &v, &deep),
            Err(EvalError::VariableOutOfRange {
                var: "x3".into(),
                k: 2
            })
        );

        let unbound = parse("P(x2)", Lang::Stat).unwrap();
        assert_eq!(
            eval_stat(&s, &Valuation::new(), &unbound),
            Err(EvalError::UnboundVariable("x2".into()))
        );

        let subj = Formula::CondSubj(Box::new(Formula::True), Box::new(Formula::True));
        assert_eq!(eval_stat(&s, &v, &subj), Err(EvalError::SubjConditional));

        let nonstat = Formula::Atom("P".into(), vec![Term::Var("y".into())]);
        assert_eq!(
            eval_stat(&s, &Valuation::new().bind("y", 0), &nonstat),
            Err(EvalError::NotStatVariable("y".into()))
        );

        assert!(matches!(
            StatisticalStructure::new(
                2,
                2,
                Interpretation::new().pred("P", []).pred("Q", []),
                kappa_points(vec![0, 0]),
                vocab_pq(),
            ),
            Err(StructureError::PointCountMismatch { .. })
        ));
    }

    #[test]
    fn extension_matches_pointwise_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(87);
        for _ in 0..40 {
            let s = random_symmetric_structure(&mut rng);
            if s.slots() < 2 {
                continue;
            }
            let f = random_stat_formula(&mut rng, 3);
            let ext = extension_stat(&s, &f).unwrap();
            for p in 0..s.n_points() {
                let mut v = Valuation::new();
                for i in 0..s.slots() {
                    v.set(&format!("x{}", i + 1), s.coord(p, i));
                }
                assert_eq!(eval_stat(&s, &v, &f), Ok(ext.contains(p)));
            }
        }
    }
}
