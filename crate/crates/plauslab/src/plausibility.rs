//! Plausibility measures over finite world spaces and over the
//! finite-or-cofinite algebra of a countable world space, together with the
//! qualitativeness conditions.
//!
//! A measure maps sets to elements of a pointed poset with `Pl(∅) = ⊥`,
//! `Pl(Ω) = ⊤`, and monotonicity under inclusion (A1). Qualitative measures
//! additionally satisfy, for pairwise disjoint sets:
//!
//! * A2: if `Pl(A∪B) > Pl(C)` and `Pl(A∪C) > Pl(B)` then `Pl(A) > Pl(B∪C)`;
//! * A3: if `Pl(A) = Pl(B) = ⊥` then `Pl(A∪B) = ⊥`.
//!
//! The infinitary variants A2*, A2† and A3* separate the graded semantics
//! once the domain is infinite; they are exposed as instance checkers so the
//! countable witnesses of the lottery family can be evaluated exactly.

use crate::order::{PlausibilityPoset, PosetViolation};
use crate::{Rat, WorldSet};
use num_traits::Zero;
use std::cmp::Ordering;
use std::collections::BTreeSet;

/// Hard cap for the exhaustive qualitativeness sweep.
pub const MAX_QUALITATIVE_WORLDS: usize = 12;

/// Set algebra shared by finite world sets and finite-or-cofinite sets.
pub trait SetAlg: Clone + PartialEq {
    fn empty() -> Self;
    fn union(&self, other: &Self) -> Self;
    fn inter(&self, other: &Self) -> Self;
    fn diff(&self, other: &Self) -> Self;
    fn is_empty(&self) -> bool;

    fn is_disjoint(&self, other: &Self) -> bool {
        self.inter(other).is_empty()
    }
}

impl SetAlg for WorldSet {
    fn empty() -> Self {
        WorldSet::EMPTY
    }
    fn union(&self, other: &Self) -> Self {
        WorldSet::union(*self, *other)
    }
    fn inter(&self, other: &Self) -> Self {
        WorldSet::inter(*self, *other)
    }
    fn diff(&self, other: &Self) -> Self {
        WorldSet::diff(*self, *other)
    }
    fn is_empty(&self) -> bool {
        WorldSet::is_empty(*self)
    }
}

/// Anything that compares plausibility values of sets. `pl_cmp` is a partial
/// comparison: incomparable values answer `None`, and `Equal` means the two
/// sets have the same plausibility (not that they are the same set).
pub trait PlausCmp {
    type Set: SetAlg;

    fn pl_cmp(&self, a: &Self::Set, b: &Self::Set) -> Option<Ordering>;

    fn is_bot(&self, a: &Self::Set) -> bool;

    fn pl_gt(&self, a: &Self::Set, b: &Self::Set) -> bool {
        self.pl_cmp(a, b) == Some(Ordering::Greater)
    }

    /// The conditional clause: `phi => psi` holds iff the antecedent's set
    /// is at bottom or `Pl(A∩B) > Pl(A−B)`.
    fn cond_sat_sets(&self, a: &Self::Set, b: &Self::Set) -> bool {
        self.is_bot(a) || self.pl_gt(&a.inter(b), &a.diff(b))
    }
}

/// Construction-time failure of a finite plausibility measure.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    #[error("assignment covers {got} sets, expected {expected}")]
    AssignLength { expected: usize, got: usize },
    #[error("assigned value {0} out of poset range")]
    ValueOutOfRange(usize),
    #[error("value poset invalid: {0}")]
    Poset(#[from] PosetViolation),
    #[error("empty set must get bottom")]
    EmptyNotBot,
    #[error("full carrier must get top")]
    CarrierNotTop,
    #[error("monotonicity fails: adding world {world} to {set:?} decreases or detaches plausibility")]
    NotMonotone { set: WorldSet, world: usize },
    #[error("carrier of {got} worlds exceeds cap {cap}")]
    TooManyWorlds { got: usize, cap: usize },
}

/// A2/A3 counterexample found by the exhaustive sweep.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum QualViolation {
    #[error("A2 fails at A={a:?} B={b:?} C={c:?}")]
    A2 { a: WorldSet, b: WorldSet, c: WorldSet },
    #[error("A3 fails at A={a:?} B={b:?}")]
    A3 { a: WorldSet, b: WorldSet },
}

/// Finite plausibility measure stored extensionally: one poset element per
/// subset of the carrier.
#[derive(Clone, Debug)]
pub struct ExplicitMeasure {
    n_worlds: usize,
    values: PlausibilityPoset,
    assign: Vec<usize>,
}

impl ExplicitMeasure {
    /// Validates the poset, the `∅ → ⊥` / `Ω → ⊤` anchors, and A1.
    pub fn new(
        n_worlds: usize,
        values: PlausibilityPoset,
        assign: Vec<usize>,
    ) -> Result<ExplicitMeasure, MeasureError> {
        if n_worlds > MAX_QUALITATIVE_WORLDS {
            return Err(MeasureError::TooManyWorlds {
                got: n_worlds,
                cap: MAX_QUALITATIVE_WORLDS,
            });
        }
        let size = 1usize << n_worlds;
        if assign.len() != size {
            return Err(MeasureError::AssignLength {
                expected: size,
                got: assign.len(),
            });
        }
        if let Some(&v) = assign.iter().find(|&&v| v >= values.len()) {
            return Err(MeasureError::ValueOutOfRange(v));
        }
        values.validate()?;
        if assign[0] != values.bot() {
            return Err(MeasureError::EmptyNotBot);
        }
        if assign[size - 1] != values.top() {
            return Err(MeasureError::CarrierNotTop);
        }
        let m = ExplicitMeasure {
            n_worlds,
            values,
            assign,
        };
        for mask in WorldSet::all(n_worlds) {
            for w in 0..n_worlds {
                if !mask.contains(w) {
                    let bigger = mask.union(WorldSet::singleton(w));
                    if !m.values.leq(m.pl(mask), m.pl(bigger)) {
                        return Err(MeasureError::NotMonotone { set: mask, world: w });
                    }
                }
            }
        }
        Ok(m)
    }

    /// Build without checking A1 or the anchors. For internal search loops
    /// that maintain the invariants incrementally.
    pub(crate) fn new_unchecked(
        n_worlds: usize,
        values: PlausibilityPoset,
        assign: Vec<usize>,
    ) -> ExplicitMeasure {
        ExplicitMeasure {
            n_worlds,
            values,
            assign,
        }
    }

    pub fn n_worlds(&self) -> usize {
        self.n_worlds
    }

    pub fn values(&self) -> &PlausibilityPoset {
        &self.values
    }

    pub fn pl(&self, a: WorldSet) -> usize {
        self.assign[a.0 as usize]
    }

    pub fn cond_sat(&self, a: WorldSet, b: WorldSet) -> bool {
        self.cond_sat_sets(&a, &b)
    }

    /// True when the whole domain sits at bottom, which makes every
    /// conditional with a nonempty antecedent vacuously false or true by the
    /// bottom clause alone.
    pub fn is_degenerate(&self) -> bool {
        self.values.bot() == self.values.top()
    }

    /// Exhaustive A2/A3 sweep over pairwise-disjoint triples and pairs.
    pub fn check_qualitative(&self) -> Result<Option<QualViolation>, MeasureError> {
        if self.n_worlds > MAX_QUALITATIVE_WORLDS {
            return Err(MeasureError::TooManyWorlds {
                got: self.n_worlds,
                cap: MAX_QUALITATIVE_WORLDS,
            });
        }
        let n = self.n_worlds;
        let full = WorldSet::full(n);
        // A3 over disjoint pairs
        for a in WorldSet::all(n) {
            let rest = full.diff(a);
            let mut b = rest.0;
            loop {
                let bs = WorldSet(b);
                if self.is_bot(&a) && self.is_bot(&bs) && !self.is_bot(&a.union(bs)) {
                    return Ok(Some(QualViolation::A3 { a, b: bs }));
                }
                if b == 0 {
                    break;
                }
                b = (b - 1) & rest.0;
            }
        }
        // A2 over disjoint triples
        for a in WorldSet::all(n) {
            let rest_a = full.diff(a);
            let mut b = rest_a.0;
            loop {
                let bs = WorldSet(b);
                let rest_ab = rest_a.diff(bs);
                let mut c = rest_ab.0;
                loop {
                    let cs = WorldSet(c);
                    if self.pl_gt(&a.union(bs), &cs)
                        && self.pl_gt(&a.union(cs), &bs)
                        && !self.pl_gt(&a, &bs.union(cs))
                    {
                        return Ok(Some(QualViolation::A2 { a, b: bs, c: cs }));
                    }
                    if c == 0 {
                        break;
                    }
                    c = (c - 1) & rest_ab.0;
                }
                if b == 0 {
                    break;
                }
                b = (b - 1) & rest_a.0;
            }
        }
        Ok(None)
    }
}

impl PlausCmp for ExplicitMeasure {
    type Set = WorldSet;

    fn pl_cmp(&self, a: &WorldSet, b: &WorldSet) -> Option<Ordering> {
        self.values.cmp(self.pl(*a), self.pl(*b))
    }

    fn is_bot(&self, a: &WorldSet) -> bool {
        self.pl(*a) == self.values.bot()
    }
}

/// A finite or cofinite subset of the countable index set {1, 2, 3, ...}.
/// `Cofin(s)` is the complement of the finite set `s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CofiniteSet {
    Fin(BTreeSet<u64>),
    Cofin(BTreeSet<u64>),
}

impl CofiniteSet {
    pub fn finite<I: IntoIterator<Item = u64>>(items: I) -> CofiniteSet {
        CofiniteSet::Fin(items.into_iter().collect())
    }

    pub fn cofinite<I: IntoIterator<Item = u64>>(excluded: I) -> CofiniteSet {
        CofiniteSet::Cofin(excluded.into_iter().collect())
    }

    pub fn singleton(i: u64) -> CofiniteSet {
        CofiniteSet::finite([i])
    }

    pub fn everything() -> CofiniteSet {
        CofiniteSet::cofinite([])
    }

    pub fn complement(&self) -> CofiniteSet {
        match self {
            CofiniteSet::Fin(s) => CofiniteSet::Cofin(s.clone()),
            CofiniteSet::Cofin(s) => CofiniteSet::Fin(s.clone()),
        }
    }

    pub fn contains(&self, i: u64) -> bool {
        match self {
            CofiniteSet::Fin(s) => s.contains(&i),
            CofiniteSet::Cofin(s) => !s.contains(&i),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, CofiniteSet::Fin(_))
    }

    /// Support of the representation: members if finite, non-members if
    /// cofinite.
    pub fn support(&self) -> &BTreeSet<u64> {
        match self {
            CofiniteSet::Fin(s) | CofiniteSet::Cofin(s) => s,
        }
    }

    /// Copy with the membership of `i` set to `member`.
    pub fn with_member(&self, i: u64, member: bool) -> CofiniteSet {
        let mut s = self.support().clone();
        let keep = match self {
            CofiniteSet::Fin(_) => member,
            CofiniteSet::Cofin(_) => !member,
        };
        if keep {
            s.insert(i);
        } else {
            s.remove(&i);
        }
        match self {
            CofiniteSet::Fin(_) => CofiniteSet::Fin(s),
            CofiniteSet::Cofin(_) => CofiniteSet::Cofin(s),
        }
    }

    /// Intersection with `{0, ..., c}`, always finite.
    pub fn restrict_le(&self, c: u64) -> CofiniteSet {
        match self {
            CofiniteSet::Fin(s) => {
                CofiniteSet::Fin(s.iter().copied().filter(|&i| i <= c).collect())
            }
            CofiniteSet::Cofin(s) => {
                CofiniteSet::Fin((0..=c).filter(|i| !s.contains(i)).collect())
            }
        }
    }
}

impl SetAlg for CofiniteSet {
    fn empty() -> Self {
        CofiniteSet::Fin(BTreeSet::new())
    }

    fn union(&self, other: &Self) -> Self {
        use CofiniteSet::*;
        match (self, other) {
            (Fin(a), Fin(b)) => Fin(a.union(b).cloned().collect()),
            (Fin(a), Cofin(b)) => Cofin(b.difference(a).cloned().collect()),
            (Cofin(a), Fin(b)) => Cofin(a.difference(b).cloned().collect()),
            (Cofin(a), Cofin(b)) => Cofin(a.intersection(b).cloned().collect()),
        }
    }

    fn inter(&self, other: &Self) -> Self {
        use CofiniteSet::*;
        match (self, other) {
            (Fin(a), Fin(b)) => Fin(a.intersection(b).cloned().collect()),
            (Fin(a), Cofin(b)) => Fin(a.difference(b).cloned().collect()),
            (Cofin(a), Fin(b)) => Fin(b.difference(a).cloned().collect()),
            (Cofin(a), Cofin(b)) => Cofin(a.union(b).cloned().collect()),
        }
    }

    fn diff(&self, other: &Self) -> Self {
        self.inter(&other.complement())
    }

    fn is_empty(&self) -> bool {
        matches!(self, CofiniteSet::Fin(s) if s.is_empty())
    }
}

/// Which countable lottery measure to build.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CofiniteSpec {
    /// ∅ → 0, nonempty finite → 1/2, cofinite → 1.
    Lottery,
    /// ∅ → 0, finite with w1 → 3/4, finite without w1 → 1/2, cofinite → 1.
    Crooked,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum CofiniteRule {
    Lottery,
    Crooked,
    NullLottery,
}

/// Plausibility measure on the finite/cofinite algebra whose values are
/// exact rationals forming a chain.
#[derive(Clone, Debug)]
pub struct CofiniteMeasure {
    rule: CofiniteRule,
}

/// The countable measures of the lottery family.
pub fn cofinite_measure(spec: CofiniteSpec) -> CofiniteMeasure {
    CofiniteMeasure {
        rule: match spec {
            CofiniteSpec::Lottery => CofiniteRule::Lottery,
            CofiniteSpec::Crooked => CofiniteRule::Crooked,
        },
    }
}

impl CofiniteMeasure {
    /// Every finite set (empty or not) → 0, every cofinite set → 1. Still
    /// qualitative; separates `forall x N phi` from `N forall x phi`.
    pub fn null_lottery() -> CofiniteMeasure {
        CofiniteMeasure {
            rule: CofiniteRule::NullLottery,
        }
    }

    pub fn value(&self, s: &CofiniteSet) -> Rat {
        match self.rule {
            CofiniteRule::Lottery => match s {
                CofiniteSet::Fin(m) if m.is_empty() => Rat::zero(),
                CofiniteSet::Fin(_) => Rat::new(1, 2),
                CofiniteSet::Cofin(_) => Rat::new(1, 1),
            },
            CofiniteRule::Crooked => match s {
                CofiniteSet::Fin(m) if m.is_empty() => Rat::zero(),
                CofiniteSet::Fin(m) if m.contains(&1) => Rat::new(3, 4),
                CofiniteSet::Fin(_) => Rat::new(1, 2),
                CofiniteSet::Cofin(_) => Rat::new(1, 1),
            },
            CofiniteRule::NullLottery => match s {
                CofiniteSet::Fin(_) => Rat::zero(),
                CofiniteSet::Cofin(_) => Rat::new(1, 1),
            },
        }
    }
}

impl PlausCmp for CofiniteMeasure {
    type Set = CofiniteSet;

    fn pl_cmp(&self, a: &CofiniteSet, b: &CofiniteSet) -> Option<Ordering> {
        self.value(a).partial_cmp(&self.value(b))
    }

    fn is_bot(&self, a: &CofiniteSet) -> bool {
        self.value(a).is_zero()
    }
}

/// Outcome of evaluating one instance of an implication-shaped condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceOutcome {
    pub premise: bool,
    pub conclusion: bool,
}

impl InstanceOutcome {
    pub fn holds(&self) -> bool {
        !self.premise || self.conclusion
    }
}

/// Malformed instance handed to an A2*/A2† checker.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("parts {0} and {1} overlap")]
    OverlappingParts(usize, usize),
    #[error("A0 is not one of the parts")]
    A0NotInParts,
}

fn find_part<S: SetAlg>(a0: &S, parts: &[S]) -> Result<usize, InstanceError> {
    for (i, p) in parts.iter().enumerate() {
        for (j, q) in parts.iter().enumerate().skip(i + 1) {
            if !p.is_disjoint(q) {
                return Err(InstanceError::OverlappingParts(i, j));
            }
        }
    }
    parts
        .iter()
        .position(|p| p == a0)
        .ok_or(InstanceError::A0NotInParts)
}

fn union_all<S: SetAlg>(parts: &[S]) -> S {
    parts.iter().fold(S::empty(), |acc, p| acc.union(p))
}

/// One instance of A2*: if `Pl(A−Ai) > Pl(Ai)` for every part other than
/// `A0`, then `Pl(A0) > Pl(A−A0)`.
pub fn check_a2star_instance<M: PlausCmp>(
    m: &M,
    a0: &M::Set,
    parts: &[M::Set],
) -> Result<InstanceOutcome, InstanceError> {
    let i0 = find_part(a0, parts)?;
    let a = union_all(parts);
    let premise = parts
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != i0)
        .all(|(_, ai)| m.pl_gt(&a.diff(ai), ai));
    let conclusion = m.pl_gt(a0, &a.diff(a0));
    Ok(InstanceOutcome { premise, conclusion })
}

/// One instance of A2†: if `Pl(A0) > Pl(Ai)` for every part other than
/// `A0`, then `Pl(A0)` is not strictly below `Pl(A−A0)`.
pub fn check_a2dagger_instance<M: PlausCmp>(
    m: &M,
    a0: &M::Set,
    parts: &[M::Set],
) -> Result<InstanceOutcome, InstanceError> {
    let i0 = find_part(a0, parts)?;
    let a = union_all(parts);
    let premise = parts
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != i0)
        .all(|(_, ai)| m.pl_gt(a0, ai));
    let conclusion = m.pl_cmp(a0, &a.diff(a0)) != Some(Ordering::Less);
    Ok(InstanceOutcome { premise, conclusion })
}

/// One instance of A3*: if every part has plausibility ⊥ then so does the
/// union. Parts need not be disjoint.
pub fn check_a3star_instance<M: PlausCmp>(m: &M, parts: &[M::Set]) -> InstanceOutcome {
    let premise = parts.iter().all(|p| m.is_bot(p));
    let conclusion = m.is_bot(&union_all(parts));
    InstanceOutcome { premise, conclusion }
}

/// Indices that decide a [`CofiniteMeasure`] value: the measure rules only
/// look at emptiness, membership of index 1, and finiteness, so checking a
/// per-index property at index 1 and at one fresh index covers the whole
/// countable tail exactly.
fn probe_indices(a0: &CofiniteSet) -> Vec<u64> {
    let mut special: BTreeSet<u64> = a0.support().clone();
    special.insert(1);
    let fresh = special.iter().max().unwrap() + 1;
    special.insert(fresh);
    special.into_iter().collect()
}

/// A2* for the countable partition consisting of `a0` together with the
/// singleton `{j}` for every index `j` outside `a0`. This is the shape of
/// the lottery witnesses, where the union of all parts is the whole space.
pub fn check_a2star_singletons(m: &CofiniteMeasure, a0: &CofiniteSet) -> InstanceOutcome {
    let everything = CofiniteSet::everything();
    let premise = probe_indices(a0)
        .into_iter()
        .filter(|&j| !a0.contains(j))
        .all(|j| {
            let aj = CofiniteSet::singleton(j);
            m.pl_gt(&everything.diff(&aj), &aj)
        });
    let conclusion = m.pl_gt(a0, &everything.diff(a0));
    InstanceOutcome { premise, conclusion }
}

/// A2† for the same singleton-family partition as
/// [`check_a2star_singletons`].
pub fn check_a2dagger_singletons(m: &CofiniteMeasure, a0: &CofiniteSet) -> InstanceOutcome {
    let everything = CofiniteSet::everything();
    let premise = probe_indices(a0)
        .into_iter()
        .filter(|&j| !a0.contains(j))
        .all(|j| m.pl_gt(a0, &CofiniteSet::singleton(j)));
    let conclusion = m.pl_cmp(a0, &everything.diff(a0)) != Some(Ordering::Less);
    InstanceOutcome { premise, conclusion }
}

/// A3* for the family of all singletons drawn from `over`: if every
/// singleton is at ⊥, then `over` itself must be. Finite `over` is checked
/// by enumeration, cofinite `over` through the decisive probe indices.
pub fn check_a3star_singletons(m: &CofiniteMeasure, over: &CofiniteSet) -> InstanceOutcome {
    let premise = match over {
        CofiniteSet::Fin(s) => s
            .iter()
            .all(|&j| m.is_bot(&CofiniteSet::singleton(j))),
        CofiniteSet::Cofin(_) => probe_indices(over)
            .into_iter()
            .filter(|&j| over.contains(j))
            .all(|j| m.is_bot(&CofiniteSet::singleton(j))),
    };
    let conclusion = m.is_bot(over);
    InstanceOutcome { premise, conclusion }
}
