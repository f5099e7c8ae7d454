//! Randomized soundness sweeps: draw structures from a semantic class, draw
//! schema instances, and hunt for falsifying worlds and valuations. Also the
//! set-level KLM rules used as the behavioral fingerprint of A2.

use rand_chacha::ChaCha8Rng;

use super::{instantiate, Schema};
use crate::gen::{
    random_bindings_for, random_monotone_measure, random_statistical_with_k, random_subjective,
    sweep_vocab, sweep_vocab_stat, StructClass,
};
use crate::plausibility::{ExplicitMeasure, QualViolation};
use crate::statistical::{eval_stat, StatisticalStructure};
use crate::subjective::{eval_subj, SubjectiveStructure, Valuation};
use crate::syntax::{Formula, Ident};
use crate::WorldSet;

/// Tally of a sweep, with the first falsification kept as a witness.
#[derive(Clone, Debug, Default)]
pub struct SweepOutcome {
    pub structures: usize,
    pub instances: usize,
    pub violations: usize,
    pub first: Option<SweepViolation>,
}

#[derive(Clone, Debug)]
pub struct SweepViolation {
    pub schema: Option<Schema>,
    pub formula: Formula,
    /// Falsifying world for subjective sweeps; statistical sweeps have none.
    pub world: Option<usize>,
    pub valuation: Vec<(Ident, usize)>,
    pub structure: String,
}

impl SweepOutcome {
    fn record(
        &mut self,
        schema: Option<Schema>,
        formula: &Formula,
        world: Option<usize>,
        valuation: Vec<(Ident, usize)>,
        structure: &dyn std::fmt::Debug,
    ) {
        self.violations += 1;
        if self.first.is_none() {
            self.first = Some(SweepViolation {
                schema,
                formula: formula.clone(),
                world,
                valuation,
                structure: format!("{structure:?}"),
            });
        }
    }
}

/// First `(world, valuation)` falsifying `f`, if any.
fn falsified_subj(s: &SubjectiveStructure, f: &Formula) -> Option<(usize, Vec<(Ident, usize)>)> {
    let free: Vec<Ident> = f.free_vars().into_iter().collect();
    let d = s.dom_size();
    let points = d.pow(free.len() as u32);
    for w in 0..s.n_worlds() {
        for pt in 0..points {
            let mut v = Valuation::new();
            let mut rest = pt;
            for x in &free {
                v.set(x, rest % d);
                rest /= d;
            }
            if !eval_subj(s, w, &v, f).expect("sweep instance fits the sweep structure") {
                let picked = free.iter().map(|x| (x.clone(), v.get(x).unwrap())).collect();
                return Some((w, picked));
            }
        }
    }
    None
}

/// First falsifying valuation of the free coordinates, if any.
fn falsified_stat(s: &StatisticalStructure, f: &Formula) -> Option<Vec<(Ident, usize)>> {
    let free: Vec<Ident> = f.free_vars().into_iter().collect();
    let d = s.dom_size();
    let points = d.pow(free.len() as u32);
    for pt in 0..points {
        let mut v = Valuation::new();
        let mut rest = pt;
        for x in &free {
            v.set(x, rest % d);
            rest /= d;
        }
        if !eval_stat(s, &v, f).expect("sweep instance fits the sweep structure") {
            return Some(free.iter().map(|x| (x.clone(), v.get(x).unwrap())).collect());
        }
    }
    None
}

/// Evaluate one fixed formula over `trials` random structures of the class.
pub fn sweep_formula_subj(
    rng: &mut ChaCha8Rng,
    f: &Formula,
    class: StructClass,
    trials: usize,
    max_dom: usize,
    max_worlds: usize,
) -> SweepOutcome {
    let mut out = SweepOutcome::default();
    for _ in 0..trials {
        let s = random_subjective(rng, class, max_dom, max_worlds);
        out.structures += 1;
        out.instances += 1;
        if let Some((w, val)) = falsified_subj(&s, f) {
            out.record(None, f, Some(w), val, &s);
        }
    }
    out
}

/// Evaluate one fixed statistical formula over random product structures.
pub fn sweep_formula_stat(
    rng: &mut ChaCha8Rng,
    f: &Formula,
    trials: usize,
    max_dom: usize,
    k: usize,
) -> SweepOutcome {
    let mut out = SweepOutcome::default();
    for _ in 0..trials {
        let s = random_statistical_with_k(rng, max_dom, k);
        out.structures += 1;
        out.instances += 1;
        if let Some(val) = falsified_stat(&s, f) {
            out.record(None, f, None, val, &s);
        }
    }
    out
}

/// For each random structure, test fresh random instances of every schema.
pub fn sweep_system_subj(
    rng: &mut ChaCha8Rng,
    schemas: &[Schema],
    class: StructClass,
    structures: usize,
    instances: usize,
    max_dom: usize,
    max_worlds: usize,
) -> SweepOutcome {
    let vocab = sweep_vocab();
    let mut out = SweepOutcome::default();
    for _ in 0..structures {
        let s = random_subjective(rng, class, max_dom, max_worlds);
        out.structures += 1;
        for &schema in schemas {
            for _ in 0..instances {
                let b = random_bindings_for(rng, schema, &vocab, 0);
                let inst = instantiate(schema, &b).expect("generated bindings are valid");
                out.instances += 1;
                if let Some((w, val)) = falsified_subj(&s, &inst) {
                    out.record(Some(schema), &inst, Some(w), val, &s);
                }
            }
        }
    }
    out
}

pub fn sweep_schema_subj(
    rng: &mut ChaCha8Rng,
    schema: Schema,
    class: StructClass,
    structures: usize,
    instances: usize,
    max_dom: usize,
    max_worlds: usize,
) -> SweepOutcome {
    sweep_system_subj(
        rng,
        &[schema],
        class,
        structures,
        instances,
        max_dom,
        max_worlds,
    )
}

/// Statistical analogue of [`sweep_system_subj`] over REN-symmetric product
/// structures. Structures draw one or two coordinates; schemas that need a
/// second coordinate force `k = 2`.
pub fn sweep_system_stat(
    rng: &mut ChaCha8Rng,
    schemas: &[Schema],
    structures: usize,
    instances: usize,
    max_dom: usize,
    max_k: usize,
) -> SweepOutcome {
    use rand::Rng;
    let vocab = sweep_vocab_stat();
    let need_two = schemas.contains(&Schema::Forall3p);
    let mut out = SweepOutcome::default();
    for _ in 0..structures {
        let k = if need_two { 2 } else { rng.gen_range(1..=max_k) };
        let s = random_statistical_with_k(rng, max_dom, k);
        out.structures += 1;
        for &schema in schemas {
            for _ in 0..instances {
                let b = random_bindings_for(rng, schema, &vocab, s.slots());
                let inst = instantiate(schema, &b).expect("generated bindings are valid");
                out.instances += 1;
                if let Some(val) = falsified_stat(&s, &inst) {
                    out.record(Some(schema), &inst, None, val, &s);
                }
            }
        }
    }
    out
}

pub fn sweep_schema_stat(
    rng: &mut ChaCha8Rng,
    schema: Schema,
    structures: usize,
    instances: usize,
    max_dom: usize,
    max_k: usize,
) -> SweepOutcome {
    sweep_system_stat(rng, &[schema], structures, instances, max_dom, max_k)
}

/// The three conditional closure rules a qualitative measure must honor at
/// the level of raw world sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlmRule {
    And,
    Or,
    Cm,
}

impl std::fmt::Display for KlmRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KlmRule::And => "AND",
            KlmRule::Or => "OR",
            KlmRule::Cm => "CM",
        })
    }
}

/// Exhaustive scan for an AND / OR / CM failure over all set triples.
/// Qualitative measures never produce one; measures with a broken A2 tend to
/// produce one almost immediately.
pub fn klm_violation(m: &ExplicitMeasure) -> Option<(KlmRule, WorldSet, WorldSet, WorldSet)> {
    let n = m.n_worlds();
    for a in WorldSet::all(n) {
        for b in WorldSet::all(n) {
            for c in WorldSet::all(n) {
                if m.cond_sat(a, b) && m.cond_sat(a, c) {
                    if !m.cond_sat(a, b.inter(c)) {
                        return Some((KlmRule::And, a, b, c));
                    }
                    if !m.cond_sat(a.inter(b), c) {
                        return Some((KlmRule::Cm, a, b, c));
                    }
                }
                if m.cond_sat(a, c) && m.cond_sat(b, c) && !m.cond_sat(a.union(b), c) {
                    return Some((KlmRule::Or, a, b, c));
                }
            }
        }
    }
    None
}

/// Rejection-sample an A1-respecting measure whose A2 fails. `None` if the
/// sampler never hits one, which at `n >= 3` does not happen in practice.
pub fn random_a2_broken(rng: &mut ChaCha8Rng, n: usize) -> Option<ExplicitMeasure> {
    for _ in 0..10_000 {
        let Some(m) = random_monotone_measure(rng, n) else {
            continue;
        };
        if matches!(
            m.check_qualitative(),
            Ok(Some(QualViolation::A2 { .. }))
        ) {
            return Some(m);
        }
    }
    None
}
