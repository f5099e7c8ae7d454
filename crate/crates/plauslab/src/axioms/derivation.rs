//! Hilbert-style derivations: premises, schema instances, modus ponens, and
//! the two conditional congruence rules, checked line by line.

use super::{as_cond, as_iff, as_implies, instantiate, Bindings, Schema, SchemaError};
use crate::syntax::{parse, Formula, Lang};

/// One derivation step: the asserted formula and why it may be asserted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub formula: Formula,
    pub just: Justification,
}

/// Line references are 1-based, as in a written proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    /// Taken as given; premises need no support.
    Premise,
    /// An instance (or universal generalization of one) of a schema.
    Axiom(Schema, Bindings),
    /// Modus ponens: line `j` must be `formula_i -> current`.
    Mp(usize, usize),
    /// From `phi1 <-> phi2` on the cited line, conclude
    /// `(phi1 => psi) <-> (phi2 => psi)`.
    R1(usize),
    /// From `psi1 -> psi2` on the cited line, conclude
    /// `(phi => psi1) -> (phi => psi2)`.
    R2(usize),
}

impl std::fmt::Display for Justification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Justification::Premise => write!(f, "premise"),
            Justification::Axiom(s, _) => write!(f, "axiom {s}"),
            Justification::Mp(i, j) => write!(f, "MP {i},{j}"),
            Justification::R1(i) => write!(f, "R1 {i}"),
            Justification::R2(i) => write!(f, "R2 {i}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Derivation {
    pub lines: Vec<Line>,
}

impl Derivation {
    pub fn premise(mut self, f: Formula) -> Derivation {
        self.lines.push(Line {
            formula: f,
            just: Justification::Premise,
        });
        self
    }

    pub fn axiom(mut self, f: Formula, schema: Schema, b: Bindings) -> Derivation {
        self.lines.push(Line {
            formula: f,
            just: Justification::Axiom(schema, b),
        });
        self
    }

    pub fn mp(mut self, f: Formula, i: usize, j: usize) -> Derivation {
        self.lines.push(Line {
            formula: f,
            just: Justification::Mp(i, j),
        });
        self
    }

    pub fn r1(mut self, f: Formula, i: usize) -> Derivation {
        self.lines.push(Line {
            formula: f,
            just: Justification::R1(i),
        });
        self
    }

    pub fn r2(mut self, f: Formula, i: usize) -> Derivation {
        self.lines.push(Line {
            formula: f,
            just: Justification::R2(i),
        });
        self
    }

    /// The derived formula: the last line.
    pub fn conclusion(&self) -> Option<&Formula> {
        self.lines.last().map(|l| &l.formula)
    }
}

impl std::fmt::Display for Derivation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let width = self.lines.len().to_string().len();
        for (i, line) in self.lines.iter().enumerate() {
            writeln!(
                f,
                "{:>width$}. {}    [{}]",
                i + 1,
                line.formula,
                line.just,
                width = width
            )?;
        }
        Ok(())
    }
}

/// Why a line does not check.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BadLine {
    #[error("schema {0} is not enabled in this system")]
    SchemaNotEnabled(Schema),
    #[error(transparent)]
    Schema(SchemaError),
    #[error("the bindings instantiate to `{expected}`, not to this line")]
    WrongInstance { expected: Formula },
    #[error("reference to line {cited} is out of range here")]
    BadReference { cited: usize },
    #[error("cited lines do not fit modus ponens")]
    MpMismatch,
    #[error("cited line and conclusion do not fit R1")]
    R1Mismatch,
    #[error("cited line and conclusion do not fit R2")]
    R2Mismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct DerivationError {
    /// 1-based, matching written-proof numbering.
    pub line: usize,
    pub reason: BadLine,
}

/// Check every line of `d` against the enabled schemas. Axiom lines may be
/// universal generalizations of their instance; rule lines must match
/// exactly.
pub fn check_derivation(d: &Derivation, enabled: &[Schema]) -> Result<(), DerivationError> {
    let fail = |line: usize, reason: BadLine| Err(DerivationError { line, reason });
    for (idx, line) in d.lines.iter().enumerate() {
        let no = idx + 1;
        let cited = |r: usize| -> Result<&Formula, DerivationError> {
            if r == 0 || r >= no {
                Err(DerivationError {
                    line: no,
                    reason: BadLine::BadReference { cited: r },
                })
            } else {
                Ok(&d.lines[r - 1].formula)
            }
        };
        match &line.just {
            Justification::Premise => {}
            Justification::Axiom(schema, b) => {
                if !enabled.contains(schema) {
                    return fail(no, BadLine::SchemaNotEnabled(*schema));
                }
                let inst = match instantiate(*schema, b) {
                    Ok(f) => f,
                    Err(e) => return fail(no, BadLine::Schema(e)),
                };
                if *line.formula.strip_forall_prefix() != inst {
                    return fail(no, BadLine::WrongInstance { expected: inst });
                }
            }
            Justification::Mp(i, j) => {
                let minor = cited(*i)?;
                let major = cited(*j)?;
                match as_implies(major) {
                    Some((a, b)) if a == minor && *b == line.formula => {}
                    _ => return fail(no, BadLine::MpMismatch),
                }
            }
            Justification::R1(i) => {
                let prem = cited(*i)?;
                let ok = (|| {
                    let (phi1, phi2) = as_iff(prem)?;
                    let (l, r) = as_iff(&line.formula)?;
                    let (p1, q1) = as_cond(l)?;
                    let (p2, q2) = as_cond(r)?;
                    Some(p1 == phi1 && p2 == phi2 && q1 == q2)
                })();
                if ok != Some(true) {
                    return fail(no, BadLine::R1Mismatch);
                }
            }
            Justification::R2(i) => {
                let prem = cited(*i)?;
                let ok = (|| {
                    let (psi1, psi2) = as_implies(prem)?;
                    let (l, r) = as_implies(&line.formula)?;
                    let (p1, q1) = as_cond(l)?;
                    let (p2, q2) = as_cond(r)?;
                    Some(p1 == p2 && q1 == psi1 && q2 == psi2)
                })();
                if ok != Some(true) {
                    return fail(no, BadLine::R2Mismatch);
                }
            }
        }
    }
    Ok(())
}

fn subj(s: &str) -> Formula {
    parse(s, Lang::Subj).expect("well-formed derivation line")
}

/// The lottery derivation: from `forall x (true => ~Winner(x))` and the
/// expectation that not every ticket loses, the exchange schema `forall3`
/// yields `true => false`. The existential premise appears in its dual
/// universal form so the final contradiction is purely propositional.
pub fn lottery_derivation() -> Derivation {
    let all_lose = subj("forall x (true => ~Winner(x))");
    let not_all = subj("true => ~forall x ~Winner(x)");
    let collect = subj("true => forall x ~Winner(x)");
    let pair = collect.clone().and(not_all.clone());
    let merged = subj("true => (forall x ~Winner(x)) & ~(forall x ~Winner(x))");
    let absurd = subj("((forall x ~Winner(x)) & ~(forall x ~Winner(x))) -> false");
    let falsum = subj("true => false");

    Derivation::default()
        .premise(all_lose.clone())
        .premise(not_all.clone())
        .axiom(
            all_lose.implies(collect.clone()),
            Schema::Forall3,
            Bindings::new()
                .f("phi", subj("true"))
                .f("psi", subj("~Winner(x)"))
                .v("x", "x"),
        )
        .mp(collect.clone(), 1, 3)
        .axiom(
            collect.clone().implies(not_all.clone().implies(pair.clone())),
            Schema::C0,
            Bindings::new().f(
                "phi",
                collect.clone().implies(not_all.clone().implies(pair.clone())),
            ),
        )
        .mp(not_all.clone().implies(pair.clone()), 4, 5)
        .mp(pair.clone(), 2, 6)
        .axiom(
            pair.clone().implies(merged.clone()),
            Schema::C2,
            Bindings::new()
                .f("phi", subj("true"))
                .f("psi1", subj("forall x ~Winner(x)"))
                .f("psi2", subj("~forall x ~Winner(x)")),
        )
        .mp(merged.clone(), 7, 8)
        .axiom(absurd.clone(), Schema::C0, Bindings::new().f("phi", absurd))
        .r2(merged.implies(falsum.clone()), 10)
        .mp(falsum, 9, 11)
}

/// Ten corrupted variants of [`lottery_derivation`], each broken in one
/// place: wrong instance formulas, misdirected citations, non-tautologies
/// fed to C0, rule shape mismatches, and an out-of-range reference. Every
/// one must be rejected.
pub fn lottery_mutations() -> Vec<Derivation> {
    let base = lottery_derivation();
    let mut out = Vec::new();
    let mut edit = |f: &dyn Fn(&mut Derivation)| {
        let mut d = base.clone();
        f(&mut d);
        out.push(d);
    };
    // Dropped negation in the exchange instance.
    edit(&|d| {
        d.lines[2].formula =
            subj("(forall x (true => ~Winner(x))) -> (true => forall x Winner(x))");
    });
    // Right formula, wrong schema.
    edit(&|d| {
        if let Justification::Axiom(s, _) = &mut d.lines[2].just {
            *s = Schema::C2;
        }
    });
    // Modus ponens with the roles of the cited lines swapped.
    edit(&|d| d.lines[3].just = Justification::Mp(3, 1));
    // A near-tautology that is not one.
    edit(&|d| {
        let bogus = subj(
            "(true => forall x ~Winner(x)) -> ((true => ~forall x ~Winner(x)) -> \
             ((true => ~forall x ~Winner(x)) & ~(true => forall x ~Winner(x))))",
        );
        d.lines[4].formula = bogus.clone();
        d.lines[4].just = Justification::Axiom(Schema::C0, Bindings::new().f("phi", bogus));
    });
    // Citing the wrong major premise.
    edit(&|d| d.lines[6].just = Justification::Mp(2, 5));
    // Corrupted bindings under an intact formula.
    edit(&|d| {
        if let Justification::Axiom(_, b) = &mut d.lines[7].just {
            b.formulas.insert("psi2".into(), subj("Winner(x)"));
        }
    });
    // Weakening the contradiction line to a harmless tautology.
    edit(&|d| {
        let soft = subj("((forall x ~Winner(x)) & ~(forall x ~Winner(x))) -> true");
        d.lines[9].formula = soft.clone();
        d.lines[9].just = Justification::Axiom(Schema::C0, Bindings::new().f("phi", soft));
    });
    // R1 where R2 is required.
    edit(&|d| d.lines[10].just = Justification::R1(10));
    // Reference past the end of the proof.
    edit(&|d| d.lines[11].just = Justification::Mp(9, 13));
    // Flipping the conclusion.
    edit(&|d| d.lines[11].formula = subj("~(true => false)"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::c_subj;

    fn with_forall3() -> Vec<Schema> {
        let mut v = c_subj();
        v.push(Schema::Forall3);
        v
    }

    #[test]
    fn lottery_derivation_checks_with_forall3() {
        let d = lottery_derivation();
        assert_eq!(check_derivation(&d, &with_forall3()), Ok(()));
        assert_eq!(d.conclusion(), Some(&subj("true => false")));
    }

    #[test]
    fn lottery_derivation_fails_exactly_at_the_exchange_step() {
        let d = lottery_derivation();
        let err = check_derivation(&d, &c_subj()).unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.reason, BadLine::SchemaNotEnabled(Schema::Forall3));
    }

    #[test]
    fn all_mutations_are_rejected() {
        let muts = lottery_mutations();
        assert_eq!(muts.len(), 10);
        for (i, m) in muts.iter().enumerate() {
            assert!(
                check_derivation(m, &with_forall3()).is_err(),
                "mutation {i} was accepted"
            );
        }
    }

    #[test]
    fn mutation_errors_are_specific() {
        let muts = lottery_mutations();
        let err = |i: usize| check_derivation(&muts[i], &with_forall3()).unwrap_err();
        assert!(matches!(err(0).reason, BadLine::WrongInstance { .. }));
        assert!(matches!(err(1).reason, BadLine::Schema(_)));
        assert_eq!(err(2).reason, BadLine::MpMismatch);
        assert_eq!(err(3).reason, BadLine::Schema(SchemaError::NotATautology));
        assert_eq!(err(4).reason, BadLine::MpMismatch);
        assert!(matches!(err(5).reason, BadLine::WrongInstance { .. }));
        assert_eq!(err(6).reason, BadLine::R2Mismatch);
        assert_eq!(err(6).line, 11);
        assert_eq!(err(7).reason, BadLine::R1Mismatch);
        assert_eq!(err(8).reason, BadLine::BadReference { cited: 13 });
        assert_eq!(err(9).reason, BadLine::MpMismatch);
    }

    #[test]
    fn generalized_axiom_lines_are_accepted() {
        let inst = subj("(P(c) => Q(c)) & (P(c) => Q(c)) -> (P(c) => Q(c) & Q(c))");
        let d = Derivation::default().axiom(
            subj("forall z ((P(c) => Q(c)) & (P(c) => Q(c)) -> (P(c) => Q(c) & Q(c)))"),
            Schema::C2,
            Bindings::new()
                .f("phi", subj("P(c)"))
                .f("psi1", subj("Q(c)"))
                .f("psi2", subj("Q(c)")),
        );
        assert_eq!(check_derivation(&d, &c_subj()), Ok(()));
        let exact = Derivation::default().axiom(
            inst,
            Schema::C2,
            Bindings::new()
                .f("phi", subj("P(c)"))
                .f("psi1", subj("Q(c)"))
                .f("psi2", subj("Q(c)")),
        );
        assert_eq!(check_derivation(&exact, &c_subj()), Ok(()));
    }

    #[test]
    fn r1_rule_checks_shape() {
        let prem = subj("P(c) <-> Q(c)");
        let good = subj("(P(c) => R(c, c)) <-> (Q(c) => R(c, c))");
        let d = Derivation::default().premise(prem.clone()).r1(good, 1);
        assert_eq!(check_derivation(&d, &c_subj()), Ok(()));
        let bad = subj("(P(c) => R(c, c)) <-> (P(c) => R(c, c))");
        let d = Derivation::default().premise(prem).r1(bad, 1);
        assert_eq!(
            check_derivation(&d, &c_subj()).unwrap_err().reason,
            BadLine::R1Mismatch
        );
    }
}
