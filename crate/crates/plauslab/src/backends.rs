//! The four graded backends - possibility measures, κ-rankings,
//! preferential orders, and ε-polynomial parametrized probability
//! distributions - with direct conditional-satisfaction tests and their
//! embeddings into plausibility measures.
//!
//! Each backend decides `phi => psi` by comparing `⟦φ∧ψ⟧` against
//! `⟦φ∧¬ψ⟧` in its own currency (sup of weights, min of ranks, preferred
//! worlds, limiting odds). The embeddings exist to witness that all four are
//! special cases of the plausibility clause; the test suite checks the
//! agreement exhaustively on small world spaces.

use crate::order::{lub_close, BitMat, StrictOrderViolation};
use crate::plausibility::{ExplicitMeasure, MeasureError, PlausCmp, SetAlg};
use crate::{Rat, Scalar, WorldSet};
use num_traits::Zero;
use std::cmp::Ordering;

/// Possibility measure on a finite world space: `Poss(A)` is the maximum
/// weight of a member, 0 for the empty set. Weights live in `[0, 1]` and
/// some world must reach 1.
#[derive(Clone, Debug)]
pub struct PossibilityMeasure<S: Scalar = Rat> {
    weights: Vec<S>,
}

/// Invalid backend parameters.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("possibility weights must lie in [0,1] and reach 1 (world {0} offends)")]
    BadPossibility(usize),
    #[error("no world of rank 0: κ must be normalized")]
    KappaNotNormalized,
    #[error("PPD world {0} needs a positive coefficient")]
    BadCoefficient(usize),
    #[error("no world of exponent 0: PPD probabilities would vanish in the limit")]
    NoLeadWorld,
    #[error("empty world space")]
    NoWorlds,
    #[error(transparent)]
    StrictOrder(#[from] StrictOrderViolation),
}

impl<S: Scalar> PossibilityMeasure<S> {
    pub fn new(weights: Vec<S>) -> Result<Self, BackendError> {
        if weights.is_empty() {
            return Err(BackendError::NoWorlds);
        }
        let mut saw_one = false;
        for (i, w) in weights.iter().enumerate() {
            if *w < S::zero() || *w > S::one() {
                return Err(BackendError::BadPossibility(i));
            }
            if *w == S::one() {
                saw_one = true;
            }
        }
        if !saw_one {
            return Err(BackendError::BadPossibility(weights.len() - 1));
        }
        Ok(PossibilityMeasure { weights })
    }

    /// Skip the normalization check. Used for deliberate truncations of
    /// countable measures (the finite prefix of `Poss(w_i) = i/(i+1)` never
    /// reaches 1).
    pub fn new_unchecked(weights: Vec<S>) -> Self {
        PossibilityMeasure { weights }
    }

    pub fn n_worlds(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, w: usize) -> &S {
        &self.weights[w]
    }

    /// `Poss(A)`: the maximal member weight, zero for ∅.
    pub fn poss(&self, a: WorldSet) -> S {
        let mut best = S::zero();
        for w in a.iter() {
            if self.weights[w] > best {
                best = self.weights[w].clone();
            }
        }
        best
    }

    pub fn cond_sat(&self, a: WorldSet, b: WorldSet) -> bool {
        self.poss(a) == S::zero() || self.poss(a.inter(b)) > self.poss(a.diff(b))
    }

    /// Direct image as a finite plausibility measure: the value chain is the
    /// sorted list of achievable `Poss` values.
    pub fn to_plausibility(&self) -> Result<ExplicitMeasure, MeasureError> {
        let n = self.n_worlds();
        let mut levels: Vec<S> = vec![S::zero()];
        for w in &self.weights {
            if !levels.contains(w) {
                levels.push(w.clone());
            }
        }
        levels.sort_by(|a, b| a.partial_cmp(b).expect("possibility weights comparable"));
        let poset = crate::order::PlausibilityPoset::chain(levels.len());
        let assign: Vec<usize> = WorldSet::all(n)
            .map(|m| levels.iter().position(|v| *v == self.poss(m)).unwrap())
            .collect();
        ExplicitMeasure::new(n, poset, assign)
    }
}

/// The conditional clause of possibility structures.
pub fn cond_sat_possibility<S: Scalar>(p: &PossibilityMeasure<S>, a: WorldSet, b: WorldSet) -> bool {
    p.cond_sat(a, b)
}

/// A rank: natural degree of surprise, or ∞ for the impossible.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Kappa {
    Fin(u64),
    Inf,
}

impl std::fmt::Display for Kappa {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Kappa::Fin(k) => write!(f, "{k}"),
            Kappa::Inf => write!(f, "inf"),
        }
    }
}

/// κ-ranking on a finite world space: `κ(A)` is the least member rank, ∞
/// for the empty set. Some world must have rank 0.
#[derive(Clone, Debug)]
pub struct KappaRanking {
    ranks: Vec<Kappa>,
}

impl KappaRanking {
    pub fn new(ranks: Vec<Kappa>) -> Result<Self, BackendError> {
        if ranks.is_empty() {
            return Err(BackendError::NoWorlds);
        }
        if !ranks.contains(&Kappa::Fin(0)) {
            return Err(BackendError::KappaNotNormalized);
        }
        Ok(KappaRanking { ranks })
    }

    pub fn n_worlds(&self) -> usize {
        self.ranks.len()
    }

    pub fn rank(&self, w: usize) -> Kappa {
        self.ranks[w]
    }

    /// `κ(A)`: the least member rank, ∞ for ∅.
    pub fn kappa(&self, a: WorldSet) -> Kappa {
        a.iter().map(|w| self.ranks[w]).min().unwrap_or(Kappa::Inf)
    }

    pub fn cond_sat(&self, a: WorldSet, b: WorldSet) -> bool {
        self.kappa(a) == Kappa::Inf || self.kappa(a.inter(b)) < self.kappa(a.diff(b))
    }

    /// Direct image as a plausibility measure. Ranks order by surprise, so
    /// the image chain is reversed: κ = ∞ lands on ⊥ and κ = 0 on ⊤.
    pub fn to_plausibility(&self) -> Result<ExplicitMeasure, MeasureError> {
        let n = self.n_worlds();
        let mut levels: Vec<Kappa> = vec![Kappa::Inf];
        for r in &self.ranks {
            if !levels.contains(r) {
                levels.push(*r);
            }
        }
        // descending rank = ascending plausibility
        levels.sort_by(|a, b| b.cmp(a));
        let poset = crate::order::PlausibilityPoset::chain(levels.len());
        let assign: Vec<usize> = WorldSet::all(n)
            .map(|m| levels.iter().position(|v| *v == self.kappa(m)).unwrap())
            .collect();
        ExplicitMeasure::new(n, poset, assign)
    }
}

/// The conditional clause of κ-structures.
pub fn cond_sat_kappa(k: &KappaRanking, a: WorldSet, b: WorldSet) -> bool {
    k.cond_sat(a, b)
}

/// Strict preference order on a finite world space. `strict.get(v, w)` reads
/// "v is preferred to w". Finite orders are always well-founded.
#[derive(Clone, Debug)]
pub struct PreferentialOrder {
    strict: BitMat,
    well_founded: bool,
}

impl PreferentialOrder {
    pub fn new(strict: BitMat) -> Result<Self, BackendError> {
        if strict.size() == 0 {
            return Err(BackendError::NoWorlds);
        }
        crate::order::validate_strict_order(&strict)?;
        Ok(PreferentialOrder {
            strict,
            well_founded: true,
        })
    }

    pub fn n_worlds(&self) -> usize {
        self.strict.size()
    }

    pub fn well_founded(&self) -> bool {
        self.well_founded
    }

    pub fn prefers(&self, v: usize, w: usize) -> bool {
        self.strict.get(v, w)
    }

    pub fn strict(&self) -> &BitMat {
        &self.strict
    }

    /// The ≺-minimal members of a set.
    pub fn minimal(&self, a: WorldSet) -> WorldSet {
        let mut out = WorldSet::EMPTY;
        for w in a.iter() {
            if !a.iter().any(|v| self.prefers(v, w)) {
                out.insert(w);
            }
        }
        out
    }

    /// The Lewis-style clause, sound without well-foundedness: each world of
    /// `A` sees a no-less-preferred world of `A∩B` below which `A ⇒ B`
    /// holds throughout.
    pub fn cond_sat(&self, a: WorldSet, b: WorldSet) -> bool {
        let ab = a.inter(b);
        a.iter().all(|w1| {
            ab.iter().any(|w2| {
                (w2 == w1 || self.prefers(w2, w1))
                    && (0..self.n_worlds()).all(|w3| {
                        !self.prefers(w3, w2) || !a.contains(w3) || b.contains(w3)
                    })
            })
        })
    }

    /// The well-founded shortcut: all most-preferred `A`-worlds satisfy `B`.
    pub fn cond_sat_minimal(&self, a: WorldSet, b: WorldSet) -> bool {
        self.minimal(a).is_subset(b)
    }
}

/// The conditional clause of preferential structures.
pub fn cond_sat_preferential(p: &PreferentialOrder, a: WorldSet, b: WorldSet) -> bool {
    p.cond_sat(a, b)
}

/// Embed a preferential order as a plausibility measure via the lub-closure
/// of the flipped base order.
pub fn embed_preferential(p: &PreferentialOrder) -> ExplicitMeasure {
    let n = p.n_worlds();
    let cl = lub_close(n, p.strict()).expect("validated on construction");
    let assign: Vec<usize> = WorldSet::all(n).map(|m| cl.value_of(m)).collect();
    ExplicitMeasure::new_unchecked(n, cl.values().clone(), assign)
}

/// ε-polynomial parametrized probability distribution: world `w` carries
/// unnormalized probability `coeff_w · ε^{exp_w}`. As ε → 0 the conditional
/// probabilities converge, and the limits depend only on least exponents
/// (with coefficients as tie-breakers that keep ties strictly below 1).
#[derive(Clone, Debug)]
pub struct EpsPolyPPD<S: Scalar = Rat> {
    terms: Vec<(S, u32)>,
}

impl<S: Scalar> EpsPolyPPD<S> {
    pub fn new(terms: Vec<(S, u32)>) -> Result<Self, BackendError> {
        if terms.is_empty() {
            return Err(BackendError::NoWorlds);
        }
        for (i, (c, _)) in terms.iter().enumerate() {
            if *c <= S::zero() {
                return Err(BackendError::BadCoefficient(i));
            }
        }
        if !terms.iter().any(|(_, e)| *e == 0) {
            return Err(BackendError::NoLeadWorld);
        }
        Ok(EpsPolyPPD { terms })
    }

    pub fn n_worlds(&self) -> usize {
        self.terms.len()
    }

    pub fn term(&self, w: usize) -> &(S, u32) {
        &self.terms[w]
    }

    /// Least exponent over the members; `None` for ∅ (order ∞).
    pub fn ord(&self, a: WorldSet) -> Option<u32> {
        a.iter().map(|w| self.terms[w].1).min()
    }

    /// `lim Pr_ε(B | A∪B) = 1`, the embedded plausibility order.
    pub fn leq(&self, a: WorldSet, b: WorldSet) -> bool {
        let lead = a.diff(b);
        match (self.ord(lead), self.ord(b)) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(d), Some(o)) => d > o,
        }
    }

    pub fn cond_sat(&self, a: WorldSet, b: WorldSet) -> bool {
        if a.is_empty() {
            return true;
        }
        match (self.ord(a.diff(b)), self.ord(a.inter(b))) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(d), Some(i)) => d > i,
        }
    }
}

/// The conditional clause of PPD structures: the conditional probability of
/// ψ given φ tends to 1 (vacuously when `Pr(φ)` vanishes identically).
pub fn cond_sat_ppd<S: Scalar>(d: &EpsPolyPPD<S>, a: WorldSet, b: WorldSet) -> bool {
    d.cond_sat(a, b)
}

/// Comparison oracle for the plausibility order embedded in a PPD. The
/// order is a partial preorder on sets; `Equal` answers mean mutual `leq`,
/// never set identity.
#[derive(Clone, Debug)]
pub struct PpdOracle<S: Scalar = Rat> {
    ppd: EpsPolyPPD<S>,
}

/// Wrap a PPD as a plausibility comparison oracle.
pub fn embed_ppd<S: Scalar>(d: &EpsPolyPPD<S>) -> PpdOracle<S> {
    PpdOracle { ppd: d.clone() }
}

impl<S: Scalar> PpdOracle<S> {
    pub fn leq(&self, a: WorldSet, b: WorldSet) -> bool {
        self.ppd.leq(a, b)
    }
}

impl<S: Scalar> PlausCmp for PpdOracle<S> {
    type Set = WorldSet;

    fn pl_cmp(&self, a: &WorldSet, b: &WorldSet) -> Option<Ordering> {
        match (self.leq(*a, *b), self.leq(*b, *a)) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => None,
        }
    }

    fn is_bot(&self, a: &WorldSet) -> bool {
        a.is_empty()
    }
}

/// A measure a finite structure can carry: extensional plausibility or one
/// of the four backends, all answering the same conditional clause.
#[derive(Clone, Debug)]
pub enum Measure {
    Explicit(ExplicitMeasure),
    Possibility(PossibilityMeasure<Rat>),
    Kappa(KappaRanking),
    Preferential(PreferentialOrder),
    Ppd(EpsPolyPPD<Rat>),
}

impl Measure {
    pub fn n_worlds(&self) -> usize {
        match self {
            Measure::Explicit(m) => m.n_worlds(),
            Measure::Possibility(p) => p.n_worlds(),
            Measure::Kappa(k) => k.n_worlds(),
            Measure::Preferential(p) => p.n_worlds(),
            Measure::Ppd(d) => d.n_worlds(),
        }
    }

    /// The conditional clause `Pl(A) = ⊥ or Pl(A∩B) > Pl(A∖B)` in each
    /// backend's own terms.
    pub fn cond_sat(&self, a: WorldSet, b: WorldSet) -> bool {
        match self {
            Measure::Explicit(m) => m.cond_sat(a, b),
            Measure::Possibility(p) => p.cond_sat(a, b),
            Measure::Kappa(k) => k.cond_sat(a, b),
            Measure::Preferential(p) => p.cond_sat(a, b),
            Measure::Ppd(d) => d.cond_sat(a, b),
        }
    }

    /// Whether the set's plausibility is ⊥.
    pub fn is_bot(&self, a: WorldSet) -> bool {
        match self {
            Measure::Explicit(m) => PlausCmp::is_bot(m, &a),
            Measure::Possibility(p) => p.poss(a) == Rat::zero(),
            Measure::Kappa(k) => k.kappa(a) == Kappa::Inf,
            Measure::Preferential(_) => a.is_empty(),
            Measure::Ppd(_) => a.is_empty(),
        }
    }

    /// The embedded plausibility comparison `Pl(A) ≤ Pl(B)`.
    pub fn pl_leq(&self, a: WorldSet, b: WorldSet) -> bool {
        match self {
            Measure::Explicit(m) => m.values().leq(m.pl(a), m.pl(b)),
            Measure::Possibility(p) => p.poss(a) <= p.poss(b),
            Measure::Kappa(k) => k.kappa(a) >= k.kappa(b),
            Measure::Preferential(p) => crate::order::prec_embed_leq(p.strict(), a, b),
            Measure::Ppd(d) => d.leq(a, b),
        }
    }

    /// Whether two sets have equal plausibility.
    pub fn pl_eq(&self, a: WorldSet, b: WorldSet) -> bool {
        self.pl_leq(a, b) && self.pl_leq(b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn possibility_clause_examples() {
        let p = PossibilityMeasure::new(vec![r(1, 1), r(1, 2)]).unwrap();
        assert!(p.cond_sat(WorldSet::full(2), WorldSet::singleton(0)));
        assert!(p.cond_sat(WorldSet::EMPTY, WorldSet::singleton(1)));

        // truncated lottery: weights i/(i+1) never reach 1
        assert!(PossibilityMeasure::new(vec![r(1, 2), r(2, 3), r(3, 4), r(4, 5)]).is_err());
        let trunc =
            PossibilityMeasure::new_unchecked(vec![r(1, 2), r(2, 3), r(3, 4), r(4, 5)]);
        assert!(!trunc.cond_sat(WorldSet::full(4), WorldSet::EMPTY));
        assert_eq!(trunc.poss(WorldSet::full(4)), r(4, 5));

        assert!(PossibilityMeasure::new(vec![r(3, 2), r(1, 1)]).is_err());
    }

    #[test]
    fn kappa_clause_examples() {
        let k = KappaRanking::new(vec![Kappa::Fin(0), Kappa::Fin(1)]).unwrap();
        assert!(k.cond_sat(WorldSet::full(2), WorldSet::singleton(0)));

        let k2 = KappaRanking::new(vec![Kappa::Fin(0), Kappa::Inf]).unwrap();
        // A carries only ∞ ranks: vacuous
        assert!(k2.cond_sat(WorldSet::singleton(1), WorldSet::EMPTY));
        assert_eq!(k2.kappa(WorldSet::singleton(1)), Kappa::Inf);

        let flat = KappaRanking::new(vec![Kappa::Fin(0), Kappa::Fin(0)]).unwrap();
        assert!(!flat.cond_sat(WorldSet::full(2), WorldSet::singleton(0)));

        assert!(KappaRanking::new(vec![Kappa::Fin(1), Kappa::Fin(2)]).is_err());
    }

    fn chain2() -> PreferentialOrder {
        let mut m = BitMat::new(2);
        m.set(0, 1, true);
        PreferentialOrder::new(m).unwrap()
    }

    #[test]
    fn preferential_clause_examples() {
        let p = chain2();
        assert!(p.cond_sat(WorldSet::full(2), WorldSet::singleton(0)));
        assert!(!p.cond_sat(WorldSet::full(2), WorldSet::singleton(1)));
        assert!(p.cond_sat(WorldSet::EMPTY, WorldSet::EMPTY));

        let anti = PreferentialOrder::new(BitMat::new(2)).unwrap();
        assert!(!anti.cond_sat(WorldSet::full(2), WorldSet::singleton(0)));
        assert!(anti.well_founded());
    }

    #[test]
    fn ppd_clause_examples() {
        let d = EpsPolyPPD::new(vec![(r(1, 1), 0), (r(1, 1), 1)]).unwrap();
        assert!(d.cond_sat(WorldSet::full(2), WorldSet::singleton(0)));

        let tie = EpsPolyPPD::new(vec![(r(1, 1), 0), (r(2, 1), 0)]).unwrap();
        assert!(!tie.cond_sat(WorldSet::full(2), WorldSet::singleton(0)));

        assert!(d.cond_sat(WorldSet::EMPTY, WorldSet::singleton(0)));

        assert!(EpsPolyPPD::new(vec![(r(0, 1), 0)]).is_err());
        assert!(EpsPolyPPD::<Rat>::new(vec![(r(1, 1), 1)]).is_err());
    }

    #[test]
    fn to_plausibility_examples() {
        let p = PossibilityMeasure::new(vec![r(1, 1), r(1, 2)]).unwrap();
        let m = p.to_plausibility().unwrap();
        assert!(m
            .values()
            .lt(m.pl(WorldSet::singleton(1)), m.pl(WorldSet::singleton(0))));

        let k = KappaRanking::new(vec![Kappa::Fin(0), Kappa::Fin(2)]).unwrap();
        let mk = k.to_plausibility().unwrap();
        assert!(mk
            .values()
            .lt(mk.pl(WorldSet::singleton(1)), mk.pl(WorldSet::singleton(0))));

        let k2 = KappaRanking::new(vec![Kappa::Fin(0), Kappa::Inf]).unwrap();
        let mk2 = k2.to_plausibility().unwrap();
        assert_eq!(mk2.pl(WorldSet::singleton(1)), mk2.values().bot());
    }

    #[test]
    fn images_are_qualitative() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let n = rng.gen_range(1..=5);
            let mut weights: Vec<Rat> =
                (0..n).map(|_| r(rng.gen_range(0..=4), 4)).collect();
            let top = rng.gen_range(0..n);
            weights[top] = r(1, 1);
            let p = PossibilityMeasure::new(weights).unwrap();
            assert_eq!(p.to_plausibility().unwrap().check_qualitative().unwrap(), None);

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
            let k = KappaRanking::new(ranks).unwrap();
            assert_eq!(k.to_plausibility().unwrap().check_qualitative().unwrap(), None);
        }
    }

    use crate::gen::all_strict_orders;

    #[test]
    fn lewis_clause_agrees_with_minimal_worlds_when_finite() {
        for strict in all_strict_orders(3) {
            let p = PreferentialOrder::new(strict).unwrap();
            for a in WorldSet::all(3) {
                for b in WorldSet::all(3) {
                    assert_eq!(p.cond_sat(a, b), p.cond_sat_minimal(a, b));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let strict = crate::gen::random_strict_order(&mut rng, 5);
            let p = PreferentialOrder::new(strict).unwrap();
            for a in WorldSet::all(5) {
                for b in WorldSet::all(5) {
                    assert_eq!(p.cond_sat(a, b), p.cond_sat_minimal(a, b));
                }
            }
        }
    }

    #[test]
    fn preferential_embedding_equivalence() {
        for strict in all_strict_orders(3) {
            let p = PreferentialOrder::new(strict).unwrap();
            let m = embed_preferential(&p);
            for a in WorldSet::all(3) {
                for b in WorldSet::all(3) {
                    assert_eq!(p.cond_sat(a, b), m.cond_sat(a, b));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let strict = crate::gen::random_strict_order(&mut rng, 5);
            let p = PreferentialOrder::new(strict).unwrap();
            let m = embed_preferential(&p);
            for a in WorldSet::all(5) {
                for b in WorldSet::all(5) {
                    assert_eq!(p.cond_sat(a, b), m.cond_sat(a, b));
                }
            }
        }
    }

    #[test]
    fn preferential_embedding_shapes() {
        let m = embed_preferential(&chain2());
        assert!(m
            .values()
            .lt(m.pl(WorldSet::singleton(1)), m.pl(WorldSet::singleton(0))));
        assert_eq!(m.pl(WorldSet::singleton(0)), m.pl(WorldSet::full(2)));

        let anti = PreferentialOrder::new(BitMat::new(2)).unwrap();
        let m = embed_preferential(&anti);
        assert_eq!(
            m.values()
                .cmp(m.pl(WorldSet::singleton(0)), m.pl(WorldSet::singleton(1))),
            None
        );

        let anti3 = PreferentialOrder::new(BitMat::new(3)).unwrap();
        let m3 = embed_preferential(&anti3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(
                        m3.values().cmp(
                            m3.pl(WorldSet::singleton(i)),
                            m3.pl(WorldSet::singleton(j))
                        ),
                        None
                    );
                }
            }
        }
    }

    /// Exhaustive PPD census: every exponent pattern in {0..3}^n with a lead
    /// world, coefficients ranging over {1,2,3}.
    fn for_each_small_ppd(n: usize, mut f: impl FnMut(&EpsPolyPPD<Rat>)) {
        let mut exps = vec![0u32; n];
        loop {
            if exps.contains(&0) {
                let mut coeffs = vec![1i64; n];
                loop {
                    let terms: Vec<(Rat, u32)> = coeffs
                        .iter()
                        .zip(&exps)
                        .map(|(&c, &e)| (Rat::new(c, 1), e))
                        .collect();
                    f(&EpsPolyPPD::new(terms).unwrap());
                    let mut i = 0;
                    loop {
                        if i == n {
                            break;
                        }
                        coeffs[i] += 1;
                        if coeffs[i] <= 3 {
                            break;
                        }
                        coeffs[i] = 1;
                        i += 1;
                    }
                    if i == n {
                        break;
                    }
                }
            }
            let mut i = 0;
            loop {
                if i == n {
                    break;
                }
                exps[i] += 1;
                if exps[i] <= 3 {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }

    #[test]
    fn ppd_embedding_equivalence_exhaustive() {
        for n in 1..=4 {
            let mut count = 0usize;
            for_each_small_ppd(n, |d| {
                count += 1;
                let oracle = embed_ppd(d);
                for a in WorldSet::all(n) {
                    for b in WorldSet::all(n) {
                        let direct = d.cond_sat(a, b);
                        let via = PlausCmp::is_bot(&oracle, &a)
                            || oracle.pl_gt(&a.inter(b), &a.diff(b));
                        assert_eq!(direct, via, "n={n} a={a:?} b={b:?} d={d:?}");
                    }
                }
            });
            assert!(count > 0);
        }
    }

    #[test]
    fn ppd_oracle_is_a_partial_preorder() {
        for_each_small_ppd(3, |d| {
            let o = embed_ppd(d);
            for a in WorldSet::all(3) {
                assert!(o.leq(a, a));
                for b in WorldSet::all(3) {
                    if a.is_subset(b) {
                        assert!(o.leq(a, b));
                    }
                    for c in WorldSet::all(3) {
                        if o.leq(a, b) && o.leq(b, c) {
                            assert!(o.leq(a, c), "transitivity {a:?} {b:?} {c:?} {d:?}");
                        }
                    }
                }
            }
        });
    }

    #[test]
    fn ppd_oracle_examples() {
        let d = EpsPolyPPD::new(vec![(r(1, 1), 0), (r(1, 1), 2)]).unwrap();
        let o = embed_ppd(&d);
        // disjoint sets of different order compare strictly
        assert!(o.leq(WorldSet::singleton(1), WorldSet::singleton(0)));
        assert!(!o.leq(WorldSet::singleton(0), WorldSet::singleton(1)));
        assert_eq!(
            o.pl_cmp(&WorldSet::EMPTY, &WorldSet::EMPTY),
            Some(Ordering::Equal)
        );
        assert_eq!(
            o.pl_cmp(&WorldSet::singleton(0), &WorldSet::full(2)),
            Some(Ordering::Equal)
        );
    }

    #[test]
    fn measure_enum_dispatch() {
        let meas = Measure::Preferential(chain2());
        assert!(meas.cond_sat(WorldSet::full(2), WorldSet::singleton(0)));
        assert!(meas.is_bot(WorldSet::EMPTY));
        assert!(!meas.is_bot(WorldSet::singleton(1)));
        assert_eq!(meas.n_worlds(), 2);
        assert!(meas.pl_eq(WorldSet::singleton(0), WorldSet::full(2)));
        assert!(!meas.pl_eq(WorldSet::singleton(0), WorldSet::singleton(1)));
    }
}
