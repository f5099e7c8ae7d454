//! Countably infinite models realized symbolically: the lottery family over
//! ℕ-indexed worlds, the married example over a statistical slice, and the
//! finite nonrigid Tweety structure.
//!
//! Every extension is kept inside the finite/cofinite algebra over the index
//! set, so evaluation is exact. Quantifiers over the countable index set are
//! decided by checking every index up to a per-scenario horizon and then
//! collapsing the tail: membership far from any index is uniform, membership
//! near an index follows a parity pattern of bounded window, and both claims
//! are audited by sampling the tail at three indices (`m+1`, `m+2`, `m+17`).
//! A failed audit or a tail that escapes the algebra is reported as an
//! error, never guessed.

use std::collections::BTreeMap;

use crate::plausibility::{
    check_a2dagger_singletons, check_a2star_singletons, cofinite_measure, CofiniteMeasure,
    CofiniteSet, CofiniteSpec, ExplicitMeasure, InstanceOutcome, PlausCmp, SetAlg,
};
use crate::backends::Measure;
use crate::order::PlausibilityPoset;
use crate::subjective::{EvalError, Interpretation, SubjectiveStructure};
use crate::syntax::{parse, Formula, Ident, Lang, Term, Vocabulary};
use crate::Rat;

use num_traits::{One, Zero};

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 7] = [
    "lottery",
    "crooked",
    "possibility-lottery",
    "preferential-chain",
    "null-lottery",
    "married",
    "tweety-nonrigid",
];

/// Evaluation failure in a symbolic scenario.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("quantifier tail escapes the finite/cofinite algebra")]
    OutsideAlgebra,
    #[error("tail uniformity audit failed at sample index {0}; the scenario bound is too small for this formula")]
    Uniformity(u64),
    #[error("{0}")]
    Unsupported(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// How a scenario measures sets of indices.
#[derive(Clone, Debug)]
pub enum ScenarioMeasure {
    /// Exact rational values determined by finiteness (and, for the crooked
    /// rule, membership of index 1).
    Cofinite(CofiniteMeasure),
    /// `Poss(w_i) = i/(i+1)`; a set's value is the supremum, so finite sets
    /// take the value of their largest index and cofinite sets take 1.
    Possibility,
    /// The strict chain `... ≺ w_3 ≺ w_2 ≺ w_1` with higher indices more
    /// preferred; it has no minimal world.
    Chain,
}

fn poss_value(s: &CofiniteSet) -> Rat {
    match s {
        CofiniteSet::Fin(m) => m
            .iter()
            .max()
            .map_or_else(Rat::zero, |&i| Rat::new(i as i64, i as i64 + 1)),
        CofiniteSet::Cofin(_) => Rat::one(),
    }
}

/// The chain's conditional in closed form: every sufficiently preferred
/// `a`-index must land in `b`, which on the chain means `a − b` is finite
/// and is outdone by some later member of `a ∩ b`.
fn cond_sat_chain(a: &CofiniteSet, b: &CofiniteSet) -> bool {
    if a.is_empty() {
        return true;
    }
    let dropped = a.diff(b);
    if !dropped.is_finite() {
        return false;
    }
    let kept = a.inter(b);
    match (&kept, dropped.support().iter().max()) {
        (_, None) => true,
        (CofiniteSet::Cofin(_), Some(_)) => true,
        (CofiniteSet::Fin(k), Some(&dm)) => k.iter().max().is_some_and(|&km| km > dm),
    }
}

impl ScenarioMeasure {
    /// The conditional clause for extensions in the algebra.
    pub fn cond_sat(&self, a: &CofiniteSet, b: &CofiniteSet) -> bool {
        match self {
            ScenarioMeasure::Cofinite(m) => m.cond_sat_sets(a, b),
            ScenarioMeasure::Possibility => {
                a.is_empty() || poss_value(&a.inter(b)) > poss_value(&a.diff(b))
            }
            ScenarioMeasure::Chain => cond_sat_chain(a, b),
        }
    }
}

/// What a term denotes inside a scenario: a concrete index, or the running
/// point of the statistical slice.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AtomArg {
    Idx(u64),
    Slice,
}

/// A countable model whose predicate extensions are hand-written functions
/// into the finite/cofinite algebra.
///
/// `bound` and `window` form the uniformity certificate: past
/// `max(bound, mentioned indices + window)` the extension of any fixed
/// formula depends only on distance to the mentioned indices (within
/// `window`) and parity. The certificate is audited at evaluation time, not
/// proven.
#[derive(Clone)]
pub struct SymbolicScenario {
    name: &'static str,
    kind: ScenarioKind,
    measure: ScenarioMeasure,
    vocab: Vocabulary,
    atoms: fn(&str, &[AtomArg]) -> Option<CofiniteSet>,
    first_index: u64,
    bound: u64,
    window: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum ScenarioKind {
    Subjective,
    Statistical,
}

impl SymbolicScenario {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn measure(&self) -> &ScenarioMeasure {
        &self.measure
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Statistical scenarios evaluate `=[x1]=>`; subjective ones `=>`.
    pub fn is_statistical(&self) -> bool {
        self.kind == ScenarioKind::Statistical
    }

    /// The set of real indices. Indices below `first_index` do not exist.
    fn carrier(&self) -> CofiniteSet {
        CofiniteSet::cofinite(0..self.first_index)
    }

    /// Clamp a set to the carrier. Complements reintroduce the indices
    /// below `first_index`, so every operation's result passes through
    /// here.
    fn norm(&self, s: CofiniteSet) -> CofiniteSet {
        if self.first_index == 0 {
            return s;
        }
        match s {
            CofiniteSet::Fin(m) => CofiniteSet::Fin(
                m.into_iter().filter(|&i| i >= self.first_index).collect(),
            ),
            CofiniteSet::Cofin(mut ex) => {
                ex.extend(0..self.first_index);
                CofiniteSet::Cofin(ex)
            }
        }
    }

    fn constant(&self, b: bool) -> CofiniteSet {
        if b {
            self.carrier()
        } else {
            CofiniteSet::empty()
        }
    }

    fn precheck(&self, f: &Formula) -> Result<(), ScenarioError> {
        let used = Vocabulary::collect([f]).map_err(EvalError::from)?;
        for (p, &ar) in &used.predicates {
            match self.vocab.predicates.get(p) {
                None => return Err(EvalError::UnknownPredicate(p.clone()).into()),
                Some(&expected) if expected != ar => {
                    return Err(EvalError::ArityMismatch {
                        symbol: p.clone(),
                        expected,
                        found: ar,
                    }
                    .into())
                }
                _ => {}
            }
        }
        if let Some(g) = used.functions.keys().next() {
            return Err(EvalError::UnknownFunction(g.clone()).into());
        }
        if let Some(x) = f.free_vars().into_iter().next() {
            return Err(EvalError::UnboundVariable(x).into());
        }
        Ok(())
    }

    fn resolve(&self, t: &Term, v: &BTreeMap<Ident, u64>) -> Result<AtomArg, ScenarioError> {
        match t {
            Term::Var(x) => {
                if let Some(&i) = v.get(x) {
                    Ok(AtomArg::Idx(i))
                } else if self.kind == ScenarioKind::Statistical && x == "x1" {
                    Ok(AtomArg::Slice)
                } else {
                    Err(EvalError::UnboundVariable(x.clone()).into())
                }
            }
            Term::Func(_, _) => Err(ScenarioError::Unsupported(
                "symbolic scenarios do not interpret function symbols",
            )),
        }
    }

    /// The extension of `f` under `v`, as a subset of the carrier. For
    /// subjective scenarios the carrier indexes worlds; for statistical
    /// ones it indexes the `x1`-slice.
    fn ext(
        &self,
        f: &Formula,
        v: &mut BTreeMap<Ident, u64>,
    ) -> Result<CofiniteSet, ScenarioError> {
        let out = match f {
            Formula::True => self.carrier(),
            Formula::False => CofiniteSet::empty(),
            Formula::Atom(p, args) => {
                let mut resolved = Vec::with_capacity(args.len());
                for t in args {
                    resolved.push(self.resolve(t, v)?);
                }
                (self.atoms)(p, &resolved).ok_or(ScenarioError::Unsupported(
                    "atom outside the scenario's vocabulary",
                ))?
            }
            Formula::Eq(s, t) => match (self.resolve(s, v)?, self.resolve(t, v)?) {
                (AtomArg::Idx(i), AtomArg::Idx(j)) => self.constant(i == j),
                (AtomArg::Slice, AtomArg::Idx(i)) | (AtomArg::Idx(i), AtomArg::Slice) => {
                    CofiniteSet::singleton(i)
                }
                (AtomArg::Slice, AtomArg::Slice) => self.carrier(),
            },
            Formula::Not(g) => self.ext(g, v)?.complement(),
            Formula::And(a, b) => self.ext(a, v)?.inter(&self.ext(b, v)?),
            Formula::Or(a, b) => self.ext(a, v)?.union(&self.ext(b, v)?),
            Formula::Implies(a, b) => self.ext(a, v)?.complement().union(&self.ext(b, v)?),
            Formula::Forall(x, body) => self.quantify(x, body, v, true)?,
            Formula::Exists(x, body) => self.quantify(x, body, v, false)?,
            Formula::CondSubj(a, b) => {
                if self.kind != ScenarioKind::Subjective {
                    return Err(EvalError::SubjConditional.into());
                }
                let ea = self.ext(a, v)?;
                let eb = self.ext(b, v)?;
                self.constant(self.measure.cond_sat(&ea, &eb))
            }
            Formula::CondStat(xs, a, b) => {
                if self.kind != ScenarioKind::Statistical {
                    return Err(EvalError::StatConditional.into());
                }
                if xs.len() != 1 || !xs.contains("x1") {
                    return Err(ScenarioError::Unsupported(
                        "this scenario only measures conditionals over {x1}",
                    ));
                }
                let saved = v.remove("x1");
                let ea = self.ext(a, v);
                let eb = self.ext(b, v);
                if let Some(old) = saved {
                    v.insert("x1".to_string(), old);
                }
                self.constant(self.measure.cond_sat(&ea?, &eb?))
            }
        };
        Ok(self.norm(out))
    }

    fn horizon(&self, v: &BTreeMap<Ident, u64>) -> u64 {
        let mentioned = v.values().copied().max().unwrap_or(0);
        self.bound
            .max(self.window)
            .max(mentioned + self.window)
    }

    fn quantify(
        &self,
        x: &Ident,
        body: &Formula,
        v: &mut BTreeMap<Ident, u64>,
        forall: bool,
    ) -> Result<CofiniteSet, ScenarioError> {
        let saved = v.remove(x);
        let result = self.quantify_shadowed(x, body, v, forall);
        match saved {
            Some(old) => {
                v.insert(x.clone(), old);
            }
            None => {
                v.remove(x);
            }
        }
        result
    }

    fn quantify_shadowed(
        &self,
        x: &Ident,
        body: &Formula,
        v: &mut BTreeMap<Ident, u64>,
        forall: bool,
    ) -> Result<CofiniteSet, ScenarioError> {
        let m = self.horizon(v);
        let mut acc = self.constant(forall);
        for i in self.first_index..=m {
            v.insert(x.clone(), i);
            let e = self.ext(body, v)?;
            acc = if forall { acc.inter(&e) } else { acc.union(&e) };
        }
        let centers = [m + 1, m + 2, m + 17];
        let mut samples = Vec::with_capacity(3);
        for &g in &centers {
            v.insert(x.clone(), g);
            samples.push(self.ext(body, v)?);
        }
        let far = self.far_set(&samples, &centers)?;
        let pat = self.window_patterns(&samples, &centers)?;
        let tail = self.tail_set(&far, &pat, m, forall)?;
        Ok(if forall {
            acc.inter(&tail)
        } else {
            acc.union(&tail)
        })
    }

    /// Membership far away from the quantified index, derived from the
    /// third sample with its own window patched from the first. Each sample
    /// may then deviate from it only inside its own window.
    fn far_set(
        &self,
        samples: &[CofiniteSet],
        centers: &[u64; 3],
    ) -> Result<CofiniteSet, ScenarioError> {
        let w = self.window;
        let mut far = samples[2].clone();
        for j in centers[2] - w..=centers[2] + w {
            far = far.with_member(j, samples[0].contains(j));
        }
        for (s, &g) in samples.iter().zip(centers) {
            let off = s.diff(&far).union(&far.diff(s));
            match off {
                CofiniteSet::Fin(d) => {
                    if d.iter().any(|&j| j + w < g || j > g + w) {
                        return Err(ScenarioError::Uniformity(g));
                    }
                }
                CofiniteSet::Cofin(_) => return Err(ScenarioError::Uniformity(g)),
            }
        }
        Ok(far)
    }

    /// Membership at offset `delta` from a tail index, per index parity:
    /// `pat[delta + window][index % 2]`. The first two samples have
    /// opposite parities and define the table; the third, sixteen past the
    /// first, must reproduce it.
    fn window_patterns(
        &self,
        samples: &[CofiniteSet],
        centers: &[u64; 3],
    ) -> Result<Vec<[bool; 2]>, ScenarioError> {
        let w = self.window as i64;
        let mut pat = vec![[false; 2]; (2 * w + 1) as usize];
        for d in -w..=w {
            for s in 0..2 {
                let g = centers[s];
                pat[(d + w) as usize][(g % 2) as usize] =
                    samples[s].contains((g as i64 + d) as u64);
            }
        }
        let g = centers[2];
        for d in -w..=w {
            if samples[2].contains((g as i64 + d) as u64)
                != pat[(d + w) as usize][(g % 2) as usize]
            {
                return Err(ScenarioError::Uniformity(g));
            }
        }
        Ok(pat)
    }

    /// Combined window constraint at `j` over the tail indices near `j`:
    /// conjunction for `forall`, disjunction for `exists`.
    fn near_combined(&self, pat: &[[bool; 2]], j: u64, m: u64, forall: bool) -> bool {
        let w = self.window as i64;
        let mut out = forall;
        for d in -w..=w {
            let i = j as i64 - d;
            if i > m as i64 {
                let p = pat[(d + w) as usize][(i % 2) as usize];
                out = if forall { out && p } else { out || p };
            }
        }
        out
    }

    /// `⋂_{i>m} E(i)` (or the union, for `exists`), assembled from the far
    /// set and the window patterns.
    fn tail_set(
        &self,
        far: &CofiniteSet,
        pat: &[[bool; 2]],
        m: u64,
        forall: bool,
    ) -> Result<CofiniteSet, ScenarioError> {
        let w = self.window;
        let mut out = far.clone();
        // indices within reach of some tail window get spelled out one by
        // one; past m + w every window applies and only parity matters
        for j in (m.saturating_sub(w) + 1)..=(m + w) {
            let near = self.near_combined(pat, j, m, forall);
            let memb = if forall {
                far.contains(j) && near
            } else {
                far.contains(j) || near
            };
            out = out.with_member(j, memb);
        }
        let deep = [m + w + 1, m + w + 2];
        let c = [
            self.near_combined(pat, deep[0], m, forall),
            self.near_combined(pat, deep[1], m, forall),
        ];
        if c[0] == c[1] {
            if forall && !c[0] {
                out = out.restrict_le(m + w);
            } else if !forall && c[0] {
                out = out.union(&CofiniteSet::cofinite(0..=m + w));
            }
            return Ok(out);
        }
        let deep_c = |j: u64| if j % 2 == deep[0] % 2 { c[0] } else { c[1] };
        match far {
            CofiniteSet::Fin(members) if forall => {
                for &j in members.iter().filter(|&&j| j > m + w) {
                    if !deep_c(j) {
                        out = out.with_member(j, false);
                    }
                }
                Ok(out)
            }
            CofiniteSet::Cofin(gaps) if !forall => {
                for &j in gaps.iter().filter(|&&j| j > m + w) {
                    if deep_c(j) {
                        out = out.with_member(j, true);
                    }
                }
                Ok(out)
            }
            // a parity-striped deep tail over an infinite carrier is
            // neither finite nor cofinite
            _ => Err(ScenarioError::OutsideAlgebra),
        }
    }
}

/// Truth of a sentence: its extension is the whole carrier. Subjective
/// sentences built from conditionals are index-uniform, so this coincides
/// with truth at each world; for statistical sentences it is truth at every
/// point of the slice.
pub fn eval_scenario(s: &SymbolicScenario, f: &Formula) -> Result<bool, ScenarioError> {
    s.precheck(f)?;
    let mut v = BTreeMap::new();
    Ok(s.ext(f, &mut v)? == s.carrier())
}

fn winner_vocab() -> Vocabulary {
    Vocabulary {
        predicates: BTreeMap::from([("Winner".to_string(), 1)]),
        functions: BTreeMap::new(),
    }
}

fn winner_atoms(pred: &str, args: &[AtomArg]) -> Option<CofiniteSet> {
    match (pred, args) {
        ("Winner", [AtomArg::Idx(i)]) => Some(CofiniteSet::singleton(*i)),
        _ => None,
    }
}

fn married_vocab() -> Vocabulary {
    Vocabulary {
        predicates: BTreeMap::from([("Married".to_string(), 2)]),
        functions: BTreeMap::new(),
    }
}

/// Everyone is married to exactly one partner: `2i ↔ 2i+1`.
fn married_atoms(pred: &str, args: &[AtomArg]) -> Option<CofiniteSet> {
    match (pred, args) {
        ("Married", [a, b]) => Some(match (a, b) {
            (AtomArg::Idx(i), AtomArg::Idx(j)) => {
                if *i ^ 1 == *j {
                    CofiniteSet::everything()
                } else {
                    CofiniteSet::empty()
                }
            }
            (AtomArg::Slice, AtomArg::Idx(j)) | (AtomArg::Idx(j), AtomArg::Slice) => {
                CofiniteSet::singleton(*j ^ 1)
            }
            (AtomArg::Slice, AtomArg::Slice) => CofiniteSet::empty(),
        }),
        _ => None,
    }
}

/// Worlds `w_1, w_2, ...` with exactly one winner each; ∅ → 0, finite
/// nonempty → 1/2, cofinite → 1.
pub fn lottery() -> SymbolicScenario {
    SymbolicScenario {
        name: "lottery",
        kind: ScenarioKind::Subjective,
        measure: ScenarioMeasure::Cofinite(cofinite_measure(CofiniteSpec::Lottery)),
        vocab: winner_vocab(),
        atoms: winner_atoms,
        first_index: 1,
        bound: 2,
        window: 0,
    }
}

/// The same worlds under the rigged measure: finite sets containing `w_1`
/// get 3/4 instead of 1/2, so ticket 1 beats every other ticket pairwise.
pub fn crooked() -> SymbolicScenario {
    SymbolicScenario {
        name: "crooked",
        measure: ScenarioMeasure::Cofinite(cofinite_measure(CofiniteSpec::Crooked)),
        ..lottery()
    }
}

/// The lottery worlds measured by `Poss(w_i) = i/(i+1)`.
pub fn possibility_lottery() -> SymbolicScenario {
    SymbolicScenario {
        name: "possibility-lottery",
        measure: ScenarioMeasure::Possibility,
        ..lottery()
    }
}

/// The lottery worlds on the preference chain `... ≺ w_3 ≺ w_2 ≺ w_1`.
pub fn preferential_chain() -> SymbolicScenario {
    SymbolicScenario {
        name: "preferential-chain",
        measure: ScenarioMeasure::Chain,
        ..lottery()
    }
}

/// The lottery worlds where every finite set is null: still qualitative,
/// and it separates `forall x N phi` from `N forall x phi`.
pub fn null_lottery() -> SymbolicScenario {
    SymbolicScenario {
        name: "null-lottery",
        measure: ScenarioMeasure::Cofinite(CofiniteMeasure::null_lottery()),
        ..lottery()
    }
}

/// Domain ℕ with `Married = {(2i, 2i+1), (2i+1, 2i)}` and a lottery-style
/// cofinite measure over the `x1`-slice.
pub fn married() -> SymbolicScenario {
    SymbolicScenario {
        name: "married",
        kind: ScenarioKind::Statistical,
        measure: ScenarioMeasure::Cofinite(cofinite_measure(CofiniteSpec::Lottery)),
        vocab: married_vocab(),
        atoms: married_atoms,
        first_index: 0,
        bound: 2,
        window: 1,
    }
}

/// Two worlds disagreeing about who tweety is: the generic bird flies, yet
/// tweety plausibly doesn't. Consistent only because `tweety` is nonrigid.
pub fn tweety_nonrigid() -> SubjectiveStructure {
    let pl = ExplicitMeasure::new(2, PlausibilityPoset::chain(2), vec![0, 0, 0, 1])
        .expect("valid measure");
    let interps = vec![
        Interpretation::new()
            .pred("Bird", [vec![0]])
            .pred("Fly", [])
            .constant("tweety", 0),
        Interpretation::new()
            .pred("Bird", [vec![1]])
            .pred("Fly", [])
            .constant("tweety", 1),
    ];
    let vocab = Vocabulary::collect([&tweety_sentence()]).expect("closed vocabulary");
    SubjectiveStructure::new(2, Measure::Explicit(pl), interps, vocab)
        .expect("valid structure")
}

/// A named builtin: a countable scenario, or a finite structure where two
/// worlds suffice.
pub enum BuiltinModel {
    Scenario(SymbolicScenario),
    Finite(SubjectiveStructure),
}

pub fn builtin(name: &str) -> Option<BuiltinModel> {
    Some(match name {
        "lottery" => BuiltinModel::Scenario(lottery()),
        "crooked" => BuiltinModel::Scenario(crooked()),
        "possibility-lottery" => BuiltinModel::Scenario(possibility_lottery()),
        "preferential-chain" => BuiltinModel::Scenario(preferential_chain()),
        "null-lottery" => BuiltinModel::Scenario(null_lottery()),
        "married" => BuiltinModel::Scenario(married()),
        "tweety-nonrigid" => BuiltinModel::Finite(tweety_nonrigid()),
        _ => return None,
    })
}

/// Every ticket is expected to lose.
pub fn each_loses() -> Formula {
    parse("forall x (true => ~Winner(x))", Lang::Subj).expect("well-formed")
}

/// Some ticket is expected to win.
pub fn someone_wins() -> Formula {
    parse("true => exists x Winner(x)", Lang::Subj).expect("well-formed")
}

/// The conjunction characterizing a fair lottery.
pub fn lottery_sentence() -> Formula {
    each_loses().and(someone_wins())
}

/// The overreaching universal: expectedly, no ticket at all wins.
pub fn nobody_wins() -> Formula {
    parse("true => forall x ~Winner(x)", Lang::Subj).expect("well-formed")
}

/// Some ticket beats every other ticket in the pairwise comparison.
pub fn crooked_sentence() -> Formula {
    parse(
        "exists y forall x (~(x = y) -> ((Winner(x) | Winner(y)) => Winner(y)))",
        Lang::Subj,
    )
    .expect("well-formed")
}

/// A typical individual is not married to any fixed partner.
pub fn married_typical() -> Formula {
    parse("forall x2 (true =[x1]=> ~Married(x1, x2))", Lang::Stat).expect("well-formed")
}

/// The fallacious exchange: a typical individual is married to nobody.
pub fn married_overreach() -> Formula {
    parse("true =[x1]=> forall x2 ~Married(x1, x2)", Lang::Stat).expect("well-formed")
}

/// Birds fly, yet tweety plausibly doesn't.
pub fn tweety_sentence() -> Formula {
    parse(
        "forall x (Bird(x) => Fly(x)) & (true => Bird(tweety) & ~Fly(tweety))",
        Lang::Subj,
    )
    .expect("well-formed")
}

/// Pushing a universal through the conditional, instantiated to the
/// lottery vocabulary.
pub fn forall_exchange_instance() -> Formula {
    each_loses().implies(nobody_wins())
}

/// Pushing a universal through necessity, instantiated likewise.
pub fn nec_exchange_instance() -> Formula {
    parse(
        "(forall x (N ~Winner(x))) -> (N forall x ~Winner(x))",
        Lang::Subj,
    )
    .expect("well-formed")
}

/// A crooked lottery forces the empty conditional.
pub fn crooked_collapse_instance() -> Formula {
    lottery_sentence()
        .and(crooked_sentence())
        .implies(Formula::True.cond(Formula::False))
}

/// A failing partition instance of a cofinite scenario, with the exact
/// values driving it. Parts are the distinguished `a0` plus one singleton
/// per remaining index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessReport {
    /// Which closure condition the partition refutes.
    pub condition: &'static str,
    /// The distinguished part.
    pub a0: CofiniteSet,
    pub pl_a0: Rat,
    /// A generic singleton part.
    pub pl_part: Rat,
    /// The union without that singleton.
    pub pl_rest_of_part: Rat,
    /// The union without the distinguished part.
    pub pl_rest_of_a0: Rat,
    pub outcome: InstanceOutcome,
}

/// The scenario's refuting partition. The plain and null lotteries refute
/// A2* with `a0 = ∅`; the crooked lottery instead refutes A2† with
/// `a0 = {1}`. Scenarios without a cofinite measure have no such report.
pub fn a2star_witness(s: &SymbolicScenario) -> Result<WitnessReport, ScenarioError> {
    let m = match &s.measure {
        ScenarioMeasure::Cofinite(m) => m,
        _ => {
            return Err(ScenarioError::Unsupported(
                "witness reports need a cofinite measure",
            ))
        }
    };
    let everything = CofiniteSet::everything();
    let generic = CofiniteSet::singleton(2);
    if s.name == "crooked" {
        let a0 = CofiniteSet::singleton(1);
        Ok(WitnessReport {
            condition: "A2†",
            pl_a0: m.value(&a0),
            pl_part: m.value(&generic),
            pl_rest_of_part: m.value(&everything.diff(&generic)),
            pl_rest_of_a0: m.value(&everything.diff(&a0)),
            outcome: check_a2dagger_singletons(m, &a0),
            a0,
        })
    } else {
        let a0 = CofiniteSet::empty();
        Ok(WitnessReport {
            condition: "A2*",
            pl_a0: m.value(&a0),
            pl_part: m.value(&generic),
            pl_rest_of_part: m.value(&everything.diff(&generic)),
            pl_rest_of_a0: m.value(&everything.diff(&a0)),
            outcome: check_a2star_singletons(m, &a0),
            a0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{Kappa, KappaRanking, PossibilityMeasure, PreferentialOrder};
    use crate::order::BitMat;
    use crate::plausibility::check_a2star_instance;
    use crate::subjective::{check_rigid, eval_subj, Valuation};
    use crate::WorldSet;

    fn truth(s: &SymbolicScenario, f: &Formula) -> bool {
        eval_scenario(s, f).unwrap()
    }

    #[test]
    fn lottery_expects_every_ticket_to_lose_but_one_to_win() {
        let s = lottery();
        assert!(truth(&s, &each_loses()));
        assert!(truth(&s, &someone_wins()));
        assert!(truth(&s, &lottery_sentence()));
        assert!(!truth(&s, &nobody_wins()));
        let collapse = Formula::True.cond(Formula::False);
        assert!(!truth(&s, &collapse));
        assert!(!truth(&s, &crooked_sentence()));
    }

    #[test]
    fn forall_exchange_fails_in_the_lottery() {
        assert!(!truth(&lottery(), &forall_exchange_instance()));
    }

    #[test]
    fn forall_exchange_holds_in_finite_qualitative_structures() {
        let vocab = winner_vocab();
        // one extra world where nobody wins, ranked strictly more normal,
        // makes the premise hold non-vacuously
        let mut interps = vec![Interpretation::new().pred("Winner", [])];
        for d in 0..3 {
            interps.push(Interpretation::new().pred("Winner", [vec![d]]));
        }
        let ranks = KappaRanking::new(vec![
            Kappa::Fin(0),
            Kappa::Fin(1),
            Kappa::Fin(1),
            Kappa::Fin(1),
        ])
        .unwrap();
        let s = SubjectiveStructure::new(
            3,
            Measure::Kappa(ranks),
            interps.clone(),
            vocab.clone(),
        )
        .unwrap();
        let v = Valuation::new();
        assert_eq!(eval_subj(&s, 0, &v, &each_loses()), Ok(true));
        assert_eq!(eval_subj(&s, 0, &v, &nobody_wins()), Ok(true));
        assert_eq!(eval_subj(&s, 0, &v, &forall_exchange_instance()), Ok(true));

        let poss = PossibilityMeasure::new(vec![
            Rat::one(),
            Rat::new(1, 2),
            Rat::new(1, 3),
            Rat::new(1, 4),
        ])
        .unwrap();
        let s = SubjectiveStructure::new(3, Measure::Possibility(poss), interps.clone(), vocab.clone())
            .unwrap();
        assert_eq!(eval_subj(&s, 0, &v, &forall_exchange_instance()), Ok(true));

        let mut strict = BitMat::new(4);
        for w in 1..4 {
            strict.set(0, w, true);
        }
        let pref = PreferentialOrder::new(strict).unwrap();
        let s = SubjectiveStructure::new(3, Measure::Preferential(pref), interps, vocab).unwrap();
        assert_eq!(eval_subj(&s, 0, &v, &forall_exchange_instance()), Ok(true));
    }

    #[test]
    fn crooked_measure_satisfies_both_sentences_without_collapsing() {
        let s = crooked();
        assert!(truth(&s, &lottery_sentence()));
        assert!(truth(&s, &crooked_sentence()));
        assert!(!truth(&s, &Formula::True.cond(Formula::False)));
        assert!(!truth(&s, &crooked_collapse_instance()));
    }

    #[test]
    fn possibility_lottery_rejects_the_crooked_sentence() {
        let s = possibility_lottery();
        assert!(truth(&s, &lottery_sentence()));
        assert!(!truth(&s, &crooked_sentence()));
        assert!(truth(&s, &crooked_collapse_instance()));
        assert!(!truth(&s, &nobody_wins()));
    }

    #[test]
    fn preferential_chain_rejects_the_crooked_sentence() {
        let s = preferential_chain();
        assert!(truth(&s, &lottery_sentence()));
        assert!(!truth(&s, &crooked_sentence()));
        assert!(!truth(&s, &Formula::True.cond(Formula::False)));
        assert!(truth(&s, &crooked_collapse_instance()));
    }

    #[test]
    fn nec_exchange_separates_null_lottery_from_the_rest() {
        assert!(!truth(&null_lottery(), &nec_exchange_instance()));
        assert!(truth(&lottery(), &nec_exchange_instance()));
        assert!(truth(&possibility_lottery(), &nec_exchange_instance()));
        assert!(truth(&preferential_chain(), &nec_exchange_instance()));
    }

    #[test]
    fn nec_exchange_holds_in_finite_backends() {
        let vocab = winner_vocab();
        let interps: Vec<Interpretation> = (0..3)
            .map(|d| Interpretation::new().pred("Winner", [vec![d]]))
            .collect();
        let f = nec_exchange_instance();
        let v = Valuation::new();

        let ranks =
            KappaRanking::new(vec![Kappa::Fin(0), Kappa::Fin(1), Kappa::Fin(2)]).unwrap();
        let s = SubjectiveStructure::new(3, Measure::Kappa(ranks), interps.clone(), vocab.clone())
            .unwrap();
        assert_eq!(eval_subj(&s, 0, &v, &f), Ok(true));

        let poss =
            PossibilityMeasure::new(vec![Rat::one(), Rat::new(1, 2), Rat::new(1, 3)]).unwrap();
        let s = SubjectiveStructure::new(3, Measure::Possibility(poss), interps, vocab).unwrap();
        assert_eq!(eval_subj(&s, 0, &v, &f), Ok(true));
    }

    #[test]
    fn married_statistics_stop_before_the_universal() {
        let s = married();
        assert!(truth(&s, &married_typical()));
        assert!(!truth(&s, &married_overreach()));
    }

    #[test]
    fn tweety_builtin_is_consistent_and_nonrigid() {
        let s = match builtin("tweety-nonrigid") {
            Some(BuiltinModel::Finite(s)) => s,
            _ => panic!("expected a finite builtin"),
        };
        let v = Valuation::new();
        for w in 0..2 {
            assert_eq!(eval_subj(&s, w, &v, &tweety_sentence()), Ok(true));
        }
        assert_eq!(check_rigid(&s, "tweety"), Ok(false));
    }

    #[test]
    fn builtin_covers_every_name() {
        for name in BUILTIN_NAMES {
            assert!(builtin(name).is_some(), "{name} missing");
        }
        assert!(builtin("casino").is_none());
    }

    #[test]
    fn witness_reports_carry_the_exact_values() {
        let r = a2star_witness(&lottery()).unwrap();
        assert_eq!(r.condition, "A2*");
        assert_eq!(r.pl_rest_of_part, Rat::one());
        assert_eq!(r.pl_part, Rat::new(1, 2));
        assert_eq!(r.pl_a0, Rat::zero());
        assert!(r.outcome.premise && !r.outcome.conclusion);

        let r = a2star_witness(&crooked()).unwrap();
        assert_eq!(r.condition, "A2†");
        assert_eq!(r.a0, CofiniteSet::singleton(1));
        assert_eq!(r.pl_a0, Rat::new(3, 4));
        assert_eq!(r.pl_part, Rat::new(1, 2));
        assert_eq!(r.pl_rest_of_a0, Rat::one());
        assert!(r.outcome.premise && !r.outcome.conclusion);

        let r = a2star_witness(&null_lottery()).unwrap();
        assert!(r.outcome.premise && !r.outcome.conclusion);

        assert_eq!(
            a2star_witness(&possibility_lottery()),
            Err(ScenarioError::Unsupported(
                "witness reports need a cofinite measure"
            ))
        );
    }

    /// Truncating the lottery measure to finitely many worlds leaves no
    /// failing A2* instance: the premise needs Pl(A − Ai) strictly above a
    /// nonempty part's 1/2, which only the full space reaches.
    #[test]
    fn finite_truncations_admit_no_failing_instance() {
        for n in 1..=6usize {
            let full = (1usize << n) - 1;
            let assign: Vec<usize> = (0..=full)
                .map(|m| if m == 0 { 0 } else if m == full { 2 } else { 1 })
                .collect();
            let pl = ExplicitMeasure::new(n, PlausibilityPoset::chain(3), assign).unwrap();
            // every assignment of worlds to parts A0..A3 or to the outside
            let mut assignment = vec![0usize; n];
            loop {
                let mut parts = vec![WorldSet::EMPTY; 4];
                for (w, &p) in assignment.iter().enumerate() {
                    if p < 4 {
                        parts[p].insert(w);
                    }
                }
                let a0 = parts[0];
                let outcome = check_a2star_instance(&pl, &a0, &parts).unwrap();
                assert!(
                    outcome.holds(),
                    "n={n} parts={parts:?} premise held but conclusion failed"
                );
                let mut k = 0;
                while k < n && assignment[k] == 4 {
                    assignment[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
                assignment[k] += 1;
            }
        }
    }

    fn plain_scenario(atoms: fn(&str, &[AtomArg]) -> Option<CofiniteSet>) -> SymbolicScenario {
        SymbolicScenario {
            atoms,
            ..lottery()
        }
    }

    fn even_winner(pred: &str, args: &[AtomArg]) -> Option<CofiniteSet> {
        match (pred, args) {
            ("Winner", [AtomArg::Idx(i)]) => Some(if i % 2 == 0 {
                CofiniteSet::singleton(*i)
            } else {
                CofiniteSet::empty()
            }),
            _ => None,
        }
    }

    fn eventually_empty(pred: &str, args: &[AtomArg]) -> Option<CofiniteSet> {
        match (pred, args) {
            ("Winner", [AtomArg::Idx(i)]) => Some(if *i <= 10 {
                CofiniteSet::singleton(*i)
            } else {
                CofiniteSet::empty()
            }),
            _ => None,
        }
    }

    #[test]
    fn parity_striped_tail_is_reported_outside_the_algebra() {
        let s = plain_scenario(even_winner);
        let f = parse("exists x Winner(x)", Lang::Subj).unwrap();
        assert_eq!(eval_scenario(&s, &f), Err(ScenarioError::OutsideAlgebra));
    }

    #[test]
    fn drifting_tail_fails_the_uniformity_audit() {
        let s = plain_scenario(eventually_empty);
        let f = parse("exists x Winner(x)", Lang::Subj).unwrap();
        assert_eq!(eval_scenario(&s, &f), Err(ScenarioError::Uniformity(19)));
        // with an honest bound the same extensions evaluate fine
        let honest = SymbolicScenario {
            bound: 10,
            ..plain_scenario(eventually_empty)
        };
        assert_eq!(eval_scenario(&honest, &f), Ok(false));
        let g = parse("exists x ~Winner(x)", Lang::Subj).unwrap();
        assert_eq!(eval_scenario(&honest, &g), Ok(true));
    }

    #[test]
    fn scenarios_reject_foreign_syntax() {
        let s = lottery();
        let f = parse("Lucky(x1) =[x1]=> Lucky(x1)", Lang::Stat).unwrap();
        assert_eq!(
            eval_scenario(&s, &f),
            Err(ScenarioError::Eval(EvalError::UnknownPredicate(
                "Lucky".to_string()
            )))
        );
        let f = parse("true =[x1]=> Winner(x1)", Lang::Stat).unwrap();
        assert_eq!(
            eval_scenario(&s, &f),
            Err(ScenarioError::Eval(EvalError::StatConditional))
        );
        let f = parse("true => exists x2 Married(x2, x2)", Lang::Subj).unwrap();
        assert_eq!(
            eval_scenario(&married(), &f),
            Err(ScenarioError::Eval(EvalError::SubjConditional))
        );
        let f = parse("Winner(x)", Lang::Subj).unwrap();
        assert_eq!(
            eval_scenario(&s, &f),
            Err(ScenarioError::Eval(EvalError::UnboundVariable(
                "x".to_string()
            )))
        );
    }

    #[test]
    fn equality_over_the_slice_is_the_diagonal() {
        let s = married();
        let f = parse("forall x2 (true =[x1]=> ~(x1 = x2))", Lang::Stat).unwrap();
        assert!(truth(&s, &f));
        let g = parse("true =[x1]=> x1 = x1", Lang::Stat).unwrap();
        assert!(truth(&s, &g));
    }
}
