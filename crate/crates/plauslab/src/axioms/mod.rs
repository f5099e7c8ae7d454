//! Axiom schemas of the subjective and statistical systems, with three
//! faces: instantiation (bindings in, concrete formula out, side conditions
//! enforced), recognition (formula in, bindings out), and Hilbert-style
//! derivation checking built on top of both.
//!
//! The subjective base system is C0–C5 plus F1–F7 with modus ponens and the
//! two conditional congruence rules; C6, C7 and the exchange schema `∀3`
//! are optional strengthenings tied to narrower semantic classes. The
//! statistical base is C0′–C4′, R1′, R2′, U and Ren, with C6′, C7′, ∀3′ and
//! Prod as the optional layer. Two further schemas, `A3*-N` and the two
//! readings of `A3*-OR`, capture the infinitary-union principle that
//! separates the well-behaved backends from general plausibility.

mod derivation;
mod search;
mod validity;

pub use derivation::{
    check_derivation, lottery_derivation, lottery_mutations, BadLine, Derivation, DerivationError,
    Justification, Line,
};
pub use search::{
    find_countermodel, find_model, Rigidity, SearchBounds, SearchError, SearchOpts, SearchOutcome,
    SearchStats, SearchWitness,
};
pub use validity::{
    klm_violation, random_a2_broken, sweep_formula_stat, sweep_formula_subj, sweep_schema_stat,
    sweep_schema_subj, sweep_system_stat, sweep_system_subj, KlmRule, SweepOutcome, SweepViolation,
};

use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{is_stat_variable, Formula, Ident, SubstError, Term};

/// Every schema the instantiator and recognizer know. Unprimed names belong
/// to the subjective language, primed ones to the statistical language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Schema {
    C0,
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    Forall3,
    A3StarN,
    A3StarOr,
    A3StarOrMat,
    C0p,
    C1p,
    C2p,
    C3p,
    C4p,
    R1p,
    R2p,
    U,
    Ren,
    C6p,
    C7p,
    Forall3p,
    Prod,
}

impl Schema {
    pub const ALL: [Schema; 32] = [
        Schema::C0,
        Schema::C1,
        Schema::C2,
        Schema::C3,
        Schema::C4,
        Schema::C5,
        Schema::C6,
        Schema::C7,
        Schema::F1,
        Schema::F2,
        Schema::F3,
        Schema::F4,
        Schema::F5,
        Schema::F6,
        Schema::F7,
        Schema::Forall3,
        Schema::A3StarN,
        Schema::A3StarOr,
        Schema::A3StarOrMat,
        Schema::C0p,
        Schema::C1p,
        Schema::C2p,
        Schema::C3p,
        Schema::C4p,
        Schema::R1p,
        Schema::R2p,
        Schema::U,
        Schema::Ren,
        Schema::C6p,
        Schema::C7p,
        Schema::Forall3p,
        Schema::Prod,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Schema::C0 => "C0",
            Schema::C1 => "C1",
            Schema::C2 => "C2",
            Schema::C3 => "C3",
            Schema::C4 => "C4",
            Schema::C5 => "C5",
            Schema::C6 => "C6",
            Schema::C7 => "C7",
            Schema::F1 => "F1",
            Schema::F2 => "F2",
            Schema::F3 => "F3",
            Schema::F4 => "F4",
            Schema::F5 => "F5",
            Schema::F6 => "F6",
            Schema::F7 => "F7",
            Schema::Forall3 => "forall3",
            Schema::A3StarN => "A3*-N",
            Schema::A3StarOr => "A3*-OR",
            Schema::A3StarOrMat => "A3*-OR-mat",
            Schema::C0p => "C0'",
            Schema::C1p => "C1'",
            Schema::C2p => "C2'",
            Schema::C3p => "C3'",
            Schema::C4p => "C4'",
            Schema::R1p => "R1'",
            Schema::R2p => "R2'",
            Schema::U => "U",
            Schema::Ren => "Ren",
            Schema::C6p => "C6'",
            Schema::C7p => "C7'",
            Schema::Forall3p => "forall3'",
            Schema::Prod => "Prod",
        }
    }

    pub fn parse(s: &str) -> Option<Schema> {
        Schema::ALL.iter().copied().find(|c| c.name() == s)
    }

    /// Whether the schema belongs to the statistical language.
    pub fn is_statistical(self) -> bool {
        matches!(
            self,
            Schema::C0p
                | Schema::C1p
                | Schema::C2p
                | Schema::C3p
                | Schema::C4p
                | Schema::R1p
                | Schema::R2p
                | Schema::U
                | Schema::Ren
                | Schema::C6p
                | Schema::C7p
                | Schema::Forall3p
                | Schema::Prod
        )
    }
}

impl std::fmt::Display for Schema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The subjective base system: C0–C5 and F1–F7. Modus ponens and the two
/// congruence rules live in the derivation checker, not here.
pub fn c_subj() -> Vec<Schema> {
    vec![
        Schema::C0,
        Schema::C1,
        Schema::C2,
        Schema::C3,
        Schema::C4,
        Schema::C5,
        Schema::F1,
        Schema::F2,
        Schema::F3,
        Schema::F4,
        Schema::F5,
        Schema::F6,
        Schema::F7,
    ]
}

/// The statistical base system: C0′–C4′, R1′, R2′, U and Ren.
pub fn c_stat() -> Vec<Schema> {
    vec![
        Schema::C0p,
        Schema::C1p,
        Schema::C2p,
        Schema::C3p,
        Schema::C4p,
        Schema::R1p,
        Schema::R2p,
        Schema::U,
        Schema::Ren,
    ]
}

/// Slot assignments for a schema: formulas by name (`phi`, `psi1`, ...),
/// variables (`x`, `y`), a term (`t`), and the conditional's variable set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings {
    pub formulas: BTreeMap<String, Formula>,
    pub vars: BTreeMap<String, Ident>,
    pub terms: BTreeMap<String, Term>,
    pub varset: Option<BTreeSet<Ident>>,
}

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }

    pub fn f(mut self, slot: &str, formula: Formula) -> Bindings {
        self.formulas.insert(slot.to_string(), formula);
        self
    }

    pub fn v(mut self, slot: &str, var: &str) -> Bindings {
        self.vars.insert(slot.to_string(), var.to_string());
        self
    }

    pub fn t(mut self, slot: &str, term: Term) -> Bindings {
        self.terms.insert(slot.to_string(), term);
        self
    }

    pub fn xs<I: IntoIterator<Item = S>, S: Into<Ident>>(mut self, vars: I) -> Bindings {
        self.varset = Some(vars.into_iter().map(Into::into).collect());
        self
    }

    fn formula(&self, slot: &'static str) -> Result<&Formula, SchemaError> {
        self.formulas
            .get(slot)
            .ok_or(SchemaError::MissingSlot(slot))
    }

    fn var(&self, slot: &'static str) -> Result<&Ident, SchemaError> {
        self.vars.get(slot).ok_or(SchemaError::MissingSlot(slot))
    }

    fn term(&self, slot: &'static str) -> Result<&Term, SchemaError> {
        self.terms.get(slot).ok_or(SchemaError::MissingSlot(slot))
    }

    fn set(&self) -> Result<&BTreeSet<Ident>, SchemaError> {
        let xs = self
            .varset
            .as_ref()
            .ok_or(SchemaError::MissingSlot("varset"))?;
        if xs.is_empty() {
            return Err(SchemaError::EmptyVarSet);
        }
        for x in xs {
            if !is_stat_variable(x) {
                return Err(SchemaError::NotStatVariable(x.clone()));
            }
        }
        Ok(xs)
    }
}

/// Instantiation failure: a missing slot or a violated side condition.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("binding slot `{0}` is missing")]
    MissingSlot(&'static str),
    #[error("formula is not a propositional tautology")]
    NotATautology,
    #[error("formula is outside the decidable first-order whitelist")]
    NotInWhitelist,
    #[error("truth-table check needs {0} atoms, more than the cap of {MAX_PROP_ATOMS}")]
    TooManyAtoms(usize),
    #[error(transparent)]
    Substitution(#[from] SubstError),
    #[error("variable {var} must not occur free in `{slot}`")]
    VarFreeIn { var: Ident, slot: &'static str },
    #[error("variable {var} must not occur in `{slot}`")]
    VarOccursIn { var: Ident, slot: &'static str },
    #[error("variable {0} is not in the conditional's variable set")]
    NotInVarSet(Ident),
    #[error("variable {0} is already in the conditional's variable set")]
    AlreadyInVarSet(Ident),
    #[error("variable {0} is free on both sides of the product split")]
    SharedFreeVariable(Ident),
    #[error("`{0}` must be conditional-free")]
    NotConditionalFree(&'static str),
    #[error("`{0}` must be quantifier-free")]
    NotQuantifierFree(&'static str),
    #[error("`phi_prime` does not arise from `phi` by renaming occurrences of x to y")]
    BadRewrite,
    #[error("{0} is not a statistical variable (x1, x2, ...)")]
    NotStatVariable(Ident),
    #[error("the conditional's variable set must not be empty")]
    EmptyVarSet,
}

/// Truth-table cap for the propositional checks.
pub const MAX_PROP_ATOMS: usize = 20;

/// Build the concrete instance of `schema` under `b`, enforcing every side
/// condition. Errors name the failed condition.
pub fn instantiate(schema: Schema, b: &Bindings) -> Result<Formula, SchemaError> {
    match schema {
        Schema::C0 => {
            let phi = b.formula("phi")?;
            if !is_prop_tautology(phi)? {
                return Err(SchemaError::NotATautology);
            }
            Ok(phi.clone())
        }
        Schema::C1 => {
            let phi = b.formula("phi")?;
            Ok(phi.clone().cond(phi.clone()))
        }
        Schema::C2 => {
            let phi = b.formula("phi")?;
            let psi1 = b.formula("psi1")?;
            let psi2 = b.formula("psi2")?;
            Ok(phi
                .clone()
                .cond(psi1.clone())
                .and(phi.clone().cond(psi2.clone()))
                .implies(phi.clone().cond(psi1.clone().and(psi2.clone()))))
        }
        Schema::C3 => {
            let phi1 = b.formula("phi1")?;
            let phi2 = b.formula("phi2")?;
            let psi = b.formula("psi")?;
            Ok(phi1
                .clone()
                .cond(psi.clone())
                .and(phi2.clone().cond(psi.clone()))
                .implies(phi1.clone().or(phi2.clone()).cond(psi.clone())))
        }
        Schema::C4 => {
            let phi1 = b.formula("phi1")?;
            let phi2 = b.formula("phi2")?;
            let psi = b.formula("psi")?;
            Ok(phi1
                .clone()
                .cond(phi2.clone())
                .and(phi1.clone().cond(psi.clone()))
                .implies(phi1.clone().and(phi2.clone()).cond(psi.clone())))
        }
        Schema::C5 => {
            let phi = b.formula("phi")?;
            let psi = b.formula("psi")?;
            let c = phi.clone().cond(psi.clone());
            Ok(c
                .clone()
                .implies(c.clone().nec())
                .and(c.clone().neg().implies(c.neg().nec())))
        }
        Schema::C6 => {
            let phi = b.formula("phi")?;
            let psi = b.formula("psi")?;
            let xi = b.formula("xi")?;
            Ok(phi
                .clone()
                .cond(psi.clone())
                .and(phi.clone().cond(xi.clone().neg()).neg())
                .implies(phi.clone().and(xi.clone()).cond(psi.clone())))
        }
        Schema::C7 => Ok(Formula::True.cond(Formula::False).neg()),
        Schema::F1 => {
            let phi = b.formula("phi")?;
            let x = b.var("x")?;
            let t = b.term("t")?;
            let body = phi.substitute(x, t)?;
            Ok(Formula::Forall(x.clone(), Box::new(phi.clone())).implies(body))
        }
        Schema::F2 => {
            let phi = b.formula("phi")?;
            let psi = b.formula("psi")?;
            let x = b.var("x")?;
            Ok(
                Formula::Forall(x.clone(), Box::new(phi.clone().implies(psi.clone()))).implies(
                    Formula::Forall(x.clone(), Box::new(phi.clone()))
                        .implies(Formula::Forall(x.clone(), Box::new(psi.clone()))),
                ),
            )
        }
        Schema::F3 => {
            let phi = b.formula("phi")?;
            let x = b.var("x")?;
            if phi.free_vars().contains(x) {
                return Err(SchemaError::VarFreeIn {
                    var: x.clone(),
                    slot: "phi",
                });
            }
            Ok(phi
                .clone()
                .implies(Formula::Forall(x.clone(), Box::new(phi.clone()))))
        }
        Schema::F4 => {
            let x = b.var("x")?;
            Ok(Formula::eq(Term::Var(x.clone()), Term::Var(x.clone())))
        }
        Schema::F5 => {
            let phi = b.formula("phi")?;
            let phi_prime = b.formula("phi_prime")?;
            let x = b.var("x")?;
            let y = b.var("y")?;
            if phi.contains_conditional() {
                return Err(SchemaError::NotConditionalFree("phi"));
            }
            if !phi.is_quantifier_and_conditional_free() {
                return Err(SchemaError::NotQuantifierFree("phi"));
            }
            if !rewrites_to(phi, phi_prime, x, y) {
                return Err(SchemaError::BadRewrite);
            }
            Ok(
                Formula::eq(Term::Var(x.clone()), Term::Var(y.clone()))
                    .implies(phi.clone().implies(phi_prime.clone())),
            )
        }
        Schema::F6 => {
            let x = b.var("x")?;
            let y = b.var("y")?;
            let eq = Formula::eq(Term::Var(x.clone()), Term::Var(y.clone()));
            Ok(eq.clone().implies(eq.nec()))
        }
        Schema::F7 => {
            let x = b.var("x")?;
            let y = b.var("y")?;
            let ne = Formula::eq(Term::Var(x.clone()), Term::Var(y.clone())).neg();
            Ok(ne.clone().implies(ne.nec()))
        }
        Schema::Forall3 => {
            let phi = b.formula("phi")?;
            let psi = b.formula("psi")?;
            let x = b.var("x")?;
            if phi.free_vars().contains(x) {
                return Err(SchemaError::VarFreeIn {
                    var: x.clone(),
                    slot: "phi",
                });
            }
            Ok(
                Formula::Forall(x.clone(), Box::new(phi.clone().cond(psi.clone()))).implies(
                    phi.clone()
                        .cond(Formula::Forall(x.clone(), Box::new(psi.clone()))),
                ),
            )
        }
        Schema::A3StarN => {
            let phi = b.formula("phi")?;
            let x = b.var("x")?;
            Ok(
                Formula::Forall(x.clone(), Box::new(phi.clone().nec())).implies(
                    Formula::Forall(x.clone(), Box::new(phi.clone())).nec(),
                ),
            )
        }
        Schema::A3StarOr | Schema::A3StarOrMat => {
            let phi = b.formula("phi")?;
            let psi = b.formula("psi")?;
            let x = b.var("x")?;
            if psi.free_vars().contains(x) {
                return Err(SchemaError::VarFreeIn {
                    var: x.clone(),
                    slot: "psi",
                });
            }
            let lhs = Formula::Forall(x.clone(), Box::new(phi.clone().cond(psi.clone())));
            let ex = Formula::Exists(x.clone(), Box::new(phi.clone()));
            Ok(if schema == Schema::A3StarOr {
                lhs.implies(ex.cond(psi.clone()))
            } else {
                lhs.implies(ex.implies(psi.clone()))
            })
        }
        Schema::C0p => {
            let phi = b.formula("phi")?;
            if !in_stat_whitelist(phi)? {
                return Err(SchemaError::NotInWhitelist);
            }
            Ok(phi.clone())
        }
        Schema::C1p => {
            let xs = b.set()?;
            let phi = b.formula("phi")?;
            Ok(Formula::cond_stat(
                xs.iter().cloned(),
                phi.clone(),
                phi.clone(),
            ))
        }
        Schema::C2p => {
            let xs = b.set()?;
            let phi = b.formula("phi")?;
            let psi1 = b.formula("psi1")?;
            let psi2 = b.formula("psi2")?;
            let c = |l: Formula, r: Formula| Formula::cond_stat(xs.iter().cloned(), l, r);
            Ok(c(phi.clone(), psi1.clone())
                .and(c(phi.clone(), psi2.clone()))
                .implies(c(phi.clone(), psi1.clone().and(psi2.clone()))))
        }
        Schema::C3p => {
            let xs = b.set()?;
            let phi1 = b.formula("phi1")?;
            let phi2 = b.formula("phi2")?;
            let psi = b.formula("psi")?;
            let c = |l: Formula, r: Formula| Formula::cond_stat(xs.iter().cloned(), l, r);
            Ok(c(phi1.clone(), psi.clone())
                .and(c(phi2.clone(), psi.clone()))
                .implies(c(phi1.clone().or(phi2.clone()), psi.clone())))
        }
        Schema::C4p => {
            let xs = b.set()?;
            let phi1 = b.formula("phi1")?;
            let phi2 = b.formula("phi2")?;
            let psi = b.formula("psi")?;
            let c = |l: Formula, r: Formula| Formula::cond_stat(xs.iter().cloned(), l, r);
            Ok(c(phi1.clone(), phi2.clone())
                .and(c(phi1.clone(), psi.clone()))
                .implies(c(phi1.clone().and(phi2.clone()), psi.clone())))
        }
        Schema::R1p => {
            let xs = b.set()?;
            let phi1 = b.formula("phi1")?;
            let phi2 = b.formula("phi2")?;
            let psi = b.formula("psi")?;
            let c = |l: Formula, r: Formula| Formula::cond_stat(xs.iter().cloned(), l, r);
            let prem = forall_over(xs, phi1.clone().iff(phi2.clone()));
            Ok(prem.implies(
                c(phi1.clone(), psi.clone()).implies(c(phi2.clone(), psi.clone())),
            ))
        }
        Schema::R2p => {
            let xs = b.set()?;
            let phi = b.formula("phi")?;
            let psi1 = b.formula("psi1")?;
            let psi2 = b.formula("psi2")?;
            let c = |l: Formula, r: Formula| Formula::cond_stat(xs.iter().cloned(), l, r);
            let prem = forall_over(xs, psi1.clone().implies(psi2.clone()));
            Ok(prem.implies(
                c(phi.clone(), psi1.clone()).implies(c(phi.clone(), psi2.clone())),
            ))
        }
        Schema::U => {
            let xs = b.set()?;
            let phi = b.formula("phi")?;
            let psi = b.formula("psi")?;
            let prem = forall_over(xs, psi.clone());
            Ok(prem.implies(Formula::cond_stat(
                xs.iter().cloned(),
                phi.clone(),
                psi.clone(),
            )))
        }
        Schema::Ren => {
            let xs = b.set()?;
            let phi = b.formula("phi")?;
            let psi = b.formula("psi")?;
            let x = b.var("x")?;
            let y = b.var("y")?;
            if !is_stat_variable(x) {
                return Err(SchemaError::NotStatVariable(x.clone()));
            }
            if !is_stat_variable(y) {
                return Err(SchemaError::NotStatVariable(y.clone()));
            }
            if !xs.contains(x) {
                return Err(SchemaError::NotInVarSet(x.clone()));
            }
            if x != y && xs.contains(y) {
                return Err(SchemaError::AlreadyInVarSet(y.clone()));
            }
            if occurs_in(phi, y) {
                return Err(SchemaError::VarOccursIn {
                    var: y.clone(),
                    slot: "phi",
                });
            }
            if occurs_in(psi, y) {
                return Err(SchemaError::VarOccursIn {
                    var: y.clone(),
                    slot: "psi",
                });
            }
            let mut ys = xs.clone();
            ys.remove(x);
            ys.insert(y.clone());
            let yt = Term::Var(y.clone());
            let phi2 = phi.substitute(x, &yt)?;
            let psi2 = psi.substitute(x, &yt)?;
            Ok(
                Formula::cond_stat(xs.iter().cloned(), phi.clone(), psi.clone())
                    .implies(Formula::cond_stat(ys, phi2, psi2)),
            )
        }
        Schema::C6p => {
            let xs = b.set()?;
            let phi = b.formula("phi")?;
            let psi = b.formula("psi")?;
            let xi = b.formula("xi")?;
            let c = |l: Formula, r: Formula| Formula::cond_stat(xs.iter().cloned(), l, r);
            Ok(c(phi.clone(), psi.clone())
                .and(c(phi.clone(), xi.clone().neg()).neg())
                .implies(c(phi.clone().and(xi.clone()), psi.clone())))
        }
        Schema::C7p => {
            let xs = b.set()?;
            Ok(Formula::cond_stat(xs.iter().cloned(), Formula::True, Formula::False).neg())
        }
        Schema::Forall3p => {
            let xs = b.set()?;
            let phi = b.formula("phi")?;
            let psi = b.formula("psi")?;
            let y = b.var("y")?;
            if phi.free_vars().contains(y) {
                return Err(SchemaError::VarFreeIn {
                    var: y.clone(),
                    slot: "phi",
                });
            }
            if xs.contains(y) {
                return Err(SchemaError::AlreadyInVarSet(y.clone()));
            }
            let c = |l: Formula, r: Formula| Formula::cond_stat(xs.iter().cloned(), l, r);
            Ok(
                Formula::Forall(y.clone(), Box::new(c(phi.clone(), psi.clone()))).implies(c(
                    phi.clone(),
                    Formula::Forall(y.clone(), Box::new(psi.clone())),
                )),
            )
        }
        Schema::Prod => {
            let xs = b.set()?;
            let phi = b.formula("phi")?;
            let psi = b.formula("psi")?;
            let phi_prime = b.formula("phi_prime")?;
            let mut shared = phi.free_vars();
            let mut rhs = psi.free_vars();
            shared.append(&mut rhs);
            if let Some(v) = phi_prime.free_vars().intersection(&shared).next() {
                return Err(SchemaError::SharedFreeVariable(v.clone()));
            }
            let c = |l: Formula, r: Formula| Formula::cond_stat(xs.iter().cloned(), l, r);
            Ok(c(phi.clone(), psi.clone()).implies(c(
                phi.clone().and(phi_prime.clone()),
                psi.clone(),
            )))
        }
    }
}

/// `∀x1 ∀x2 ... body` over the set in its sorted order.
fn forall_over(xs: &BTreeSet<Ident>, body: Formula) -> Formula {
    let mut out = body;
    for x in xs.iter().rev() {
        out = Formula::Forall(x.clone(), Box::new(out));
    }
    out
}

/// Whether `v` occurs anywhere in the formula: free, bound, or as a binder.
fn occurs_in(f: &Formula, v: &str) -> bool {
    fn term(t: &Term, v: &str) -> bool {
        match t {
            Term::Var(x) => x == v,
            Term::Func(_, args) => args.iter().any(|a| term(a, v)),
        }
    }
    match f {
        Formula::True | Formula::False => false,
        Formula::Atom(_, args) => args.iter().any(|a| term(a, v)),
        Formula::Eq(a, b) => term(a, v) || term(b, v),
        Formula::Not(g) => occurs_in(g, v),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            occurs_in(a, v) || occurs_in(b, v)
        }
        Formula::Forall(x, body) | Formula::Exists(x, body) => x == v || occurs_in(body, v),
        Formula::CondSubj(a, b) => occurs_in(a, v) || occurs_in(b, v),
        Formula::CondStat(xs, a, b) => xs.contains(v) || occurs_in(a, v) || occurs_in(b, v),
    }
}

/// Whether `b` is `a` with some (possibly none, possibly all) occurrences of
/// `x` turned into `y`. Only meaningful for quantifier- and conditional-free
/// formulas, where every occurrence is free.
fn rewrites_to(a: &Formula, b: &Formula, x: &str, y: &str) -> bool {
    fn term(a: &Term, b: &Term, x: &str, y: &str) -> bool {
        match (a, b) {
            (Term::Var(va), Term::Var(vb)) => va == vb || (va == x && vb == y),
            (Term::Func(ga, aa), Term::Func(gb, ab)) => {
                ga == gb && aa.len() == ab.len() && aa.iter().zip(ab).all(|(s, t)| term(s, t, x, y))
            }
            _ => false,
        }
    }
    match (a, b) {
        (Formula::True, Formula::True) | (Formula::False, Formula::False) => true,
        (Formula::Atom(p, aa), Formula::Atom(q, ab)) => {
            p == q && aa.len() == ab.len() && aa.iter().zip(ab).all(|(s, t)| term(s, t, x, y))
        }
        (Formula::Eq(a1, a2), Formula::Eq(b1, b2)) => term(a1, b1, x, y) && term(a2, b2, x, y),
        (Formula::Not(fa), Formula::Not(fb)) => rewrites_to(fa, fb, x, y),
        (Formula::And(a1, a2), Formula::And(b1, b2))
        | (Formula::Or(a1, a2), Formula::Or(b1, b2))
        | (Formula::Implies(a1, a2), Formula::Implies(b1, b2)) => {
            rewrites_to(a1, b1, x, y) && rewrites_to(a2, b2, x, y)
        }
        _ => false,
    }
}

/// The propositional atoms of a formula: its maximal non-Boolean
/// subformulas, deduplicated structurally.
fn prop_atoms<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Not(g) => prop_atoms(g, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            prop_atoms(a, out);
            prop_atoms(b, out);
        }
        _ => {
            if !out.contains(&f) {
                out.push(f);
            }
        }
    }
}

fn eval_prop(f: &Formula, atoms: &[&Formula], mask: u32) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Not(g) => !eval_prop(g, atoms, mask),
        Formula::And(a, b) => eval_prop(a, atoms, mask) && eval_prop(b, atoms, mask),
        Formula::Or(a, b) => eval_prop(a, atoms, mask) || eval_prop(b, atoms, mask),
        Formula::Implies(a, b) => !eval_prop(a, atoms, mask) || eval_prop(b, atoms, mask),
        _ => {
            let i = atoms.iter().position(|g| *g == f).expect("atom collected");
            mask >> i & 1 != 0
        }
    }
}

/// Truth-table tautology check treating maximal non-Boolean subformulas as
/// atoms. Errs above [`MAX_PROP_ATOMS`] atoms.
pub fn is_prop_tautology(f: &Formula) -> Result<bool, SchemaError> {
    let mut atoms = Vec::new();
    prop_atoms(f, &mut atoms);
    if atoms.len() > MAX_PROP_ATOMS {
        return Err(SchemaError::TooManyAtoms(atoms.len()));
    }
    for mask in 0u32..(1 << atoms.len()) {
        if !eval_prop(f, &atoms, mask) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The decidable stand-in for "all valid first-order formulas": a
/// propositional tautology over first-order atoms, or an instance shaped
/// like one of F1–F5. Everything in the whitelist is valid; the converse is
/// of course hopeless.
pub fn in_stat_whitelist(f: &Formula) -> Result<bool, SchemaError> {
    if is_prop_tautology(f)? {
        return Ok(true);
    }
    Ok([Schema::F1, Schema::F2, Schema::F3, Schema::F4, Schema::F5]
        .iter()
        .any(|s| match_schema(*s, f).is_some()))
}

/// Recognize an instance of `schema`, universal generalizations included.
/// Returns bindings that re-instantiate to the stripped matrix.
pub fn match_schema(schema: Schema, f: &Formula) -> Option<Bindings> {
    let m = f.strip_forall_prefix();
    let b = match_matrix(schema, m)?;
    // The recognizer is trusted only as far as re-instantiation confirms.
    match instantiate(schema, &b) {
        Ok(inst) if inst == *m => Some(b),
        _ => None,
    }
}

fn match_matrix(schema: Schema, f: &Formula) -> Option<Bindings> {
    use Formula::*;
    match schema {
        Schema::C0 => match is_prop_tautology(f) {
            Ok(true) => Some(Bindings::new().f("phi", f.clone())),
            _ => None,
        },
        Schema::C0p => match in_stat_whitelist(f) {
            Ok(true) => Some(Bindings::new().f("phi", f.clone())),
            _ => None,
        },
        Schema::C1 => {
            if let CondSubj(a, b) = f {
                if a == b {
                    return Some(Bindings::new().f("phi", (**a).clone()));
                }
            }
            None
        }
        Schema::C2 => {
            let (lhs, rhs) = as_implies(f)?;
            let (c1, c2) = as_and(lhs)?;
            let (p1, q1) = as_cond(c1)?;
            let (p2, q2) = as_cond(c2)?;
            let (p3, q3) = as_cond(rhs)?;
            let (r1, r2) = as_and(q3)?;
            if p1 == p2 && p1 == p3 && q1 == r1 && q2 == r2 {
                Some(
                    Bindings::new()
                        .f("phi", p1.clone())
                        .f("psi1", q1.clone())
                        .f("psi2", q2.clone()),
                )
            } else {
                None
            }
        }
        Schema::C3 => {
            let (lhs, rhs) = as_implies(f)?;
            let (c1, c2) = as_and(lhs)?;
            let (p1, q1) = as_cond(c1)?;
            let (p2, q2) = as_cond(c2)?;
            let (p3, q3) = as_cond(rhs)?;
            let (r1, r2) = as_or(p3)?;
            if q1 == q2 && q1 == q3 && p1 == r1 && p2 == r2 {
                Some(
                    Bindings::new()
                        .f("phi1", p1.clone())
                        .f("phi2", p2.clone())
                        .f("psi", q1.clone()),
                )
            } else {
                None
            }
        }
        Schema::C4 => {
            let (lhs, rhs) = as_implies(f)?;
            let (c1, c2) = as_and(lhs)?;
            let (p1, q1) = as_cond(c1)?;
            let (p2, q2) = as_cond(c2)?;
            let (p3, q3) = as_cond(rhs)?;
            let (r1, r2) = as_and(p3)?;
            if p1 == p2 && p1 == r1 && q1 == r2 && q2 == q3 {
                Some(
                    Bindings::new()
                        .f("phi1", p1.clone())
                        .f("phi2", q1.clone())
                        .f("psi", q2.clone()),
                )
            } else {
                None
            }
        }
        Schema::C5 => {
            let (w1, w2) = as_and(f)?;
            let (c1, n1) = as_implies(w1)?;
            let (nc, n2) = as_implies(w2)?;
            let (phi, psi) = as_cond(c1)?;
            let Not(c2) = nc else { return None };
            if c2.as_ref() != c1 {
                return None;
            }
            let b1 = n1.as_nec()?;
            let b2 = n2.as_nec()?;
            if b1 == c1 {
                if let Not(inner) = b2 {
                    if inner.as_ref() == c1 {
                        return Some(
                            Bindings::new().f("phi", phi.clone()).f("psi", psi.clone()),
                        );
                    }
                }
            }
            None
        }
        Schema::C6 => {
            let (lhs, rhs) = as_implies(f)?;
            let (c1, negc) = as_and(lhs)?;
            let (p1, q1) = as_cond(c1)?;
            let Not(c2) = negc else { return None };
            let (p2, nxi) = as_cond(c2)?;
            let Not(xi) = nxi else { return None };
            let (p3, q3) = as_cond(rhs)?;
            let (r1, r2) = as_and(p3)?;
            if p1 == p2 && p1 == r1 && xi.as_ref() == r2 && q1 == q3 {
                Some(
                    Bindings::new()
                        .f("phi", p1.clone())
                        .f("psi", q1.clone())
                        .f("xi", (**xi).clone()),
                )
            } else {
                None
            }
        }
        Schema::C7 => {
            if *f == Formula::True.cond(Formula::False).neg() {
                Some(Bindings::new())
            } else {
                None
            }
        }
        Schema::F1 => {
            let (lhs, rhs) = as_implies(f)?;
            let Forall(x, phi) = lhs else { return None };
            let t = infer_substitution(phi, rhs, x)?;
            Some(
                Bindings::new()
                    .f("phi", (**phi).clone())
                    .v("x", x)
                    .t("t", t),
            )
        }
        Schema::F2 => {
            let (lhs, rhs) = as_implies(f)?;
            let Forall(x, body) = lhs else { return None };
            let (phi, psi) = as_implies(body)?;
            let (l2, r2) = as_implies(rhs)?;
            let Forall(x2, phi2) = l2 else { return None };
            let Forall(x3, psi2) = r2 else { return None };
            if x == x2 && x == x3 && phi == phi2.as_ref() && psi == psi2.as_ref() {
                Some(
                    Bindings::new()
                        .f("phi", phi.clone())
                        .f("psi", psi.clone())
                        .v("x", x),
                )
            } else {
                None
            }
        }
        Schema::F3 => {
            let (lhs, rhs) = as_implies(f)?;
            let Forall(x, body) = rhs else { return None };
            if body.as_ref() == lhs && !lhs.free_vars().contains(x) {
                Some(Bindings::new().f("phi", lhs.clone()).v("x", x))
            } else {
                None
            }
        }
        Schema::F4 => {
            if let Eq(Term::Var(a), Term::Var(b)) = f {
                if a == b {
                    return Some(Bindings::new().v("x", a));
                }
            }
            None
        }
        Schema::F5 => {
            let (eq, rest) = as_implies(f)?;
            let Eq(Term::Var(x), Term::Var(y)) = eq else {
                return None;
            };
            let (phi, phi_prime) = as_implies(rest)?;
            if phi.is_quantifier_and_conditional_free() && rewrites_to(phi, phi_prime, x, y) {
                Some(
                    Bindings::new()
                        .f("phi", phi.clone())
                        .f("phi_prime", phi_prime.clone())
                        .v("x", x)
                        .v("y", y),
                )
            } else {
                None
            }
        }
        Schema::F6 => {
            let (eq, rhs) = as_implies(f)?;
            let Eq(Term::Var(x), Term::Var(y)) = eq else {
                return None;
            };
            if rhs.as_nec()? == eq {
                Some(Bindings::new().v("x", x).v("y", y))
            } else {
                None
            }
        }
        Schema::F7 => {
            let (ne, rhs) = as_implies(f)?;
            let Not(eq) = ne else { return None };
            let Eq(Term::Var(x), Term::Var(y)) = eq.as_ref() else {
                return None;
            };
            if rhs.as_nec()? == ne {
                Some(Bindings::new().v("x", x).v("y", y))
            } else {
                None
            }
        }
        Schema::Forall3 => {
            let (lhs, rhs) = as_implies(f)?;
            let Forall(x, body) = lhs else { return None };
            let (phi, psi) = as_cond(body)?;
            let (phi2, rhs2) = as_cond(rhs)?;
            let Forall(x2, psi2) = rhs2 else { return None };
            if x == x2 && phi == phi2 && psi == psi2.as_ref() && !phi.free_vars().contains(x) {
                Some(
                    Bindings::new()
                        .f("phi", phi.clone())
                        .f("psi", psi.clone())
                        .v("x", x),
                )
            } else {
                None
            }
        }
        Schema::A3StarN => {
            let (lhs, rhs) = as_implies(f)?;
            let Forall(x, body) = lhs else { return None };
            let phi = body.as_nec()?;
            let inner = rhs.as_nec()?;
            let Forall(x2, phi2) = inner else { return None };
            if x == x2 && phi == phi2.as_ref() {
                Some(Bindings::new().f("phi", phi.clone()).v("x", x))
            } else {
                None
            }
        }
        Schema::A3StarOr => {
            let (lhs, rhs) = as_implies(f)?;
            let Forall(x, body) = lhs else { return None };
            let (phi, psi) = as_cond(body)?;
            let (ex, psi2) = as_cond(rhs)?;
            let Exists(x2, phi2) = ex else { return None };
            if x == x2 && phi == phi2.as_ref() && psi == psi2 && !psi.free_vars().contains(x) {
                Some(
                    Bindings::new()
                        .f("phi", phi.clone())
                        .f("psi", psi.clone())
                        .v("x", x),
                )
            } else {
                None
            }
        }
        Schema::A3StarOrMat => {
            let (lhs, rhs) = as_implies(f)?;
            let Forall(x, body) = lhs else { return None };
            let (phi, psi) = as_cond(body)?;
            let (ex, psi2) = as_implies(rhs)?;
            let Exists(x2, phi2) = ex else { return None };
            if x == x2 && phi == phi2.as_ref() && psi == psi2 && !psi.free_vars().contains(x) {
                Some(
                    Bindings::new()
                        .f("phi", phi.clone())
                        .f("psi", psi.clone())
                        .v("x", x),
                )
            } else {
                None
            }
        }
        Schema::C1p => {
            let CondStat(xs, a, b) = f else { return None };
            if a == b {
                Some(
                    Bindings::new()
                        .f("phi", (**a).clone())
                        .xs(xs.iter().cloned()),
                )
            } else {
                None
            }
        }
        Schema::C2p => {
            let (lhs, rhs) = as_implies(f)?;
            let (c1, c2) = as_and(lhs)?;
            let (xs1, p1, q1) = as_cond_stat(c1)?;
            let (xs2, p2, q2) = as_cond_stat(c2)?;
            let (xs3, p3, q3) = as_cond_stat(rhs)?;
            let (r1, r2) = as_and(q3)?;
            if xs1 == xs2 && xs1 == xs3 && p1 == p2 && p1 == p3 && q1 == r1 && q2 == r2 {
                Some(
                    Bindings::new()
                        .f("phi", p1.clone())
                        .f("psi1", q1.clone())
                        .f("psi2", q2.clone())
                        .xs(xs1.iter().cloned()),
                )
            } else {
                None
            }
        }
        Schema::C3p => {
            let (lhs, rhs) = as_implies(f)?;
            let (c1, c2) = as_and(lhs)?;
            let (xs1, p1, q1) = as_cond_stat(c1)?;
            let (xs2, p2, q2) = as_cond_stat(c2)?;
            let (xs3, p3, q3) = as_cond_stat(rhs)?;
            let (r1, r2) = as_or(p3)?;
            if xs1 == xs2 && xs1 == xs3 && q1 == q2 && q1 == q3 && p1 == r1 && p2 == r2 {
                Some(
                    Bindings::new()
                        .f("phi1", p1.clone())
                        .f("phi2", p2.clone())
                        .f("psi", q1.clone())
                        .xs(xs1.iter().cloned()),
                )
            } else {
                None
            }
        }
        Schema::C4p => {
            let (lhs, rhs) = as_implies(f)?;
            let (c1, c2) = as_and(lhs)?;
            let (xs1, p1, q1) = as_cond_stat(c1)?;
            let (xs2, p2, q2) = as_cond_stat(c2)?;
            let (xs3, p3, q3) = as_cond_stat(rhs)?;
            let (r1, r2) = as_and(p3)?;
            if xs1 == xs2
                && xs1 == xs3
                && p1 == p2
                && p1 == r1
                && q1 == r2
                && q2 == q3
            {
                Some(
                    Bindings::new()
                        .f("phi1", p1.clone())
                        .f("phi2", q1.clone())
                        .f("psi", q2.clone())
                        .xs(xs1.iter().cloned()),
                )
            } else {
                None
            }
        }
        Schema::R1p => {
            let (prem, rest) = as_implies(f)?;
            let (l, r) = as_implies(rest)?;
            let (xs1, p1, q1) = as_cond_stat(l)?;
            let (xs2, p2, q2) = as_cond_stat(r)?;
            if xs1 != xs2 || q1 != q2 {
                return None;
            }
            let body = peel_forall_set(prem, xs1)?;
            let (a, bfm) = as_iff(body)?;
            if a == p1 && bfm == p2 {
                Some(
                    Bindings::new()
                        .f("phi1", p1.clone())
                        .f("phi2", p2.clone())
                        .f("psi", q1.clone())
                        .xs(xs1.iter().cloned()),
                )
            } else {
                None
            }
        }
        Schema::R2p => {
            let (prem, rest) = as_implies(f)?;
            let (l, r) = as_implies(rest)?;
            let (xs1, p1, q1) = as_cond_stat(l)?;
            let (xs2, p2, q2) = as_cond_stat(r)?;
            if xs1 != xs2 || p1 != p2 {
                return None;
            }
            let body = peel_forall_set(prem, xs1)?;
            let (a, bfm) = as_implies(body)?;
            if a == q1 && bfm == q2 {
                Some(
                    Bindings::new()
                        .f("phi", p1.clone())
                        .f("psi1", q1.clone())
                        .f("psi2", q2.clone())
                        .xs(xs1.iter().cloned()),
                )
            } else {
                None
            }
        }
        Schema::U => {
            let (prem, rhs) = as_implies(f)?;
            let (xs, phi, psi) = as_cond_stat(rhs)?;
            let body = peel_forall_set(prem, xs)?;
            if body == psi {
                Some(
                    Bindings::new()
                        .f("phi", phi.clone())
                        .f("psi", psi.clone())
                        .xs(xs.iter().cloned()),
                )
            } else {
                None
            }
        }
        Schema::Ren => {
            let (lhs, rhs) = as_implies(f)?;
            let (xs, phi, psi) = as_cond_stat(lhs)?;
            let (ys, phi2, psi2) = as_cond_stat(rhs)?;
            let mut gone = xs.difference(ys);
            let mut came = ys.difference(xs);
            match (gone.next(), came.next()) {
                (Some(x), Some(y)) if gone.next().is_none() && came.next().is_none() => {
                    let yt = Term::Var(y.clone());
                    if !occurs_in(phi, y)
                        && !occurs_in(psi, y)
                        && phi.substitute(x, &yt).ok().as_ref() == Some(phi2)
                        && psi.substitute(x, &yt).ok().as_ref() == Some(psi2)
                    {
                        Some(
                            Bindings::new()
                                .f("phi", phi.clone())
                                .f("psi", psi.clone())
                                .v("x", x)
                                .v("y", y)
                                .xs(xs.iter().cloned()),
                        )
                    } else {
                        None
                    }
                }
                (None, None) => {
                    if phi != phi2 || psi != psi2 {
                        return None;
                    }
                    // Degenerate renaming x to itself; any member of X absent
                    // from both operands qualifies.
                    let x = xs
                        .iter()
                        .find(|x| !occurs_in(phi, x) && !occurs_in(psi, x))?;
                    Some(
                        Bindings::new()
                            .f("phi", phi.clone())
                            .f("psi", psi.clone())
                            .v("x", x)
                            .v("y", x)
                            .xs(xs.iter().cloned()),
                    )
                }
                _ => None,
            }
        }
        Schema::C6p => {
            let (lhs, rhs) = as_implies(f)?;
            let (c1, negc) = as_and(lhs)?;
            let (xs1, p1, q1) = as_cond_stat(c1)?;
            let Not(c2) = negc else { return None };
            let (xs2, p2, nxi) = as_cond_stat(c2)?;
            let Not(xi) = nxi else { return None };
            let (xs3, p3, q3) = as_cond_stat(rhs)?;
            let (r1, r2) = as_and(p3)?;
            if xs1 == xs2 && xs1 == xs3 && p1 == p2 && p1 == r1 && xi.as_ref() == r2 && q1 == q3
            {
                Some(
                    Bindings::new()
                        .f("phi", p1.clone())
                        .f("psi", q1.clone())
                        .f("xi", (**xi).clone())
                        .xs(xs1.iter().cloned()),
                )
            } else {
                None
            }
        }
        Schema::C7p => {
            let Not(inner) = f else { return None };
            let (xs, p, q) = as_cond_stat(inner)?;
            if *p == Formula::True && *q == Formula::False {
                Some(Bindings::new().xs(xs.iter().cloned()))
            } else {
                None
            }
        }
        Schema::Forall3p => {
            let (lhs, rhs) = as_implies(f)?;
            let Forall(y, body) = lhs else { return None };
            let (xs1, phi, psi) = as_cond_stat(body)?;
            let (xs2, phi2, rhs2) = as_cond_stat(rhs)?;
            let Forall(y2, psi2) = rhs2 else { return None };
            if xs1 == xs2
                && y == y2
                && phi == phi2
                && psi == psi2.as_ref()
                && !phi.free_vars().contains(y)
                && !xs1.contains(y)
            {
                Some(
                    Bindings::new()
                        .f("phi", phi.clone())
                        .f("psi", psi.clone())
                        .v("y", y)
                        .xs(xs1.iter().cloned()),
                )
            } else {
                None
            }
        }
        Schema::Prod => {
            let (lhs, rhs) = as_implies(f)?;
            let (xs1, phi, psi) = as_cond_stat(lhs)?;
            let (xs2, both, psi2) = as_cond_stat(rhs)?;
            if xs1 != xs2 || psi != psi2 {
                return None;
            }
            let (phi2, phi_prime) = as_and(both)?;
            if phi != phi2 {
                return None;
            }
            Some(
                Bindings::new()
                    .f("phi", phi.clone())
                    .f("psi", psi.clone())
                    .f("phi_prime", phi_prime.clone())
                    .xs(xs1.iter().cloned()),
            )
        }
    }
}

fn as_implies(f: &Formula) -> Option<(&Formula, &Formula)> {
    if let Formula::Implies(a, b) = f {
        Some((a, b))
    } else {
        None
    }
}

fn as_and(f: &Formula) -> Option<(&Formula, &Formula)> {
    if let Formula::And(a, b) = f {
        Some((a, b))
    } else {
        None
    }
}

fn as_or(f: &Formula) -> Option<(&Formula, &Formula)> {
    if let Formula::Or(a, b) = f {
        Some((a, b))
    } else {
        None
    }
}

fn as_cond(f: &Formula) -> Option<(&Formula, &Formula)> {
    if let Formula::CondSubj(a, b) = f {
        Some((a, b))
    } else {
        None
    }
}

fn as_cond_stat(f: &Formula) -> Option<(&BTreeSet<Ident>, &Formula, &Formula)> {
    if let Formula::CondStat(xs, a, b) = f {
        Some((xs, a, b))
    } else {
        None
    }
}

/// Recognize the stored shape of `phi <-> psi`.
fn as_iff(f: &Formula) -> Option<(&Formula, &Formula)> {
    let (l, r) = as_and(f)?;
    let (a, b) = as_implies(l)?;
    let (b2, a2) = as_implies(r)?;
    if a == a2 && b == b2 {
        Some((a, b))
    } else {
        None
    }
}

/// Peel a universal prefix binding exactly the given set, any order.
fn peel_forall_set<'a>(f: &'a Formula, xs: &BTreeSet<Ident>) -> Option<&'a Formula> {
    let mut seen = BTreeSet::new();
    let mut cur = f;
    while seen.len() < xs.len() {
        let Formula::Forall(x, body) = cur else {
            return None;
        };
        if !xs.contains(x) || !seen.insert(x.clone()) {
            return None;
        }
        cur = body;
    }
    Some(cur)
}

/// Find the term `t` with `phi[x/t] = psi`, walking the two formulas in
/// lockstep. Returns `Var(x)` itself when `x` never occurs free.
fn infer_substitution(phi: &Formula, psi: &Formula, x: &str) -> Option<Term> {
    fn term(a: &Term, b: &Term, x: &str, active: bool, out: &mut Option<Term>) -> bool {
        match a {
            Term::Var(v) if v == x && active => match out {
                None => {
                    *out = Some(b.clone());
                    true
                }
                Some(t) => t == b,
            },
            Term::Var(v) => matches!(b, Term::Var(w) if w == v),
            Term::Func(g, args) => match b {
                Term::Func(h, bargs) if g == h && args.len() == bargs.len() => args
                    .iter()
                    .zip(bargs)
                    .all(|(s, t2)| term(s, t2, x, active, out)),
                _ => false,
            },
        }
    }
    fn walk(a: &Formula, b: &Formula, x: &str, active: bool, out: &mut Option<Term>) -> bool {
        use Formula::*;
        match (a, b) {
            (True, True) | (False, False) => true,
            (Atom(p, aa), Atom(q, ab)) => {
                p == q
                    && aa.len() == ab.len()
                    && aa.iter().zip(ab).all(|(s, t)| term(s, t, x, active, out))
            }
            (Eq(a1, a2), Eq(b1, b2)) => {
                term(a1, b1, x, active, out) && term(a2, b2, x, active, out)
            }
            (Not(fa), Not(fb)) => walk(fa, fb, x, active, out),
            (And(a1, a2), And(b1, b2))
            | (Or(a1, a2), Or(b1, b2))
            | (Implies(a1, a2), Implies(b1, b2))
            | (CondSubj(a1, a2), CondSubj(b1, b2)) => {
                walk(a1, b1, x, active, out) && walk(a2, b2, x, active, out)
            }
            (Forall(va, fa), Forall(vb, fb)) | (Exists(va, fa), Exists(vb, fb)) => {
                va == vb && walk(fa, fb, x, active && va != x, out)
            }
            (CondStat(xsa, a1, a2), CondStat(xsb, b1, b2)) => {
                let inner_active = active && !xsa.contains(x);
                xsa == xsb
                    && walk(a1, b1, x, inner_active, out)
                    && walk(a2, b2, x, inner_active, out)
            }
            _ => false,
        }
    }
    let mut out = None;
    if !walk(phi, psi, x, true, &mut out) {
        return None;
    }
    let t = out.unwrap_or(Term::Var(x.to_string()));
    // Reject inferences that only matched because of capture.
    if phi.substitute(x, &t).ok()? == *psi {
        Some(t)
    } else {
        None
    }
}
