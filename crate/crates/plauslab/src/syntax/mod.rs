//! Terms, formulas, and variable bookkeeping for both conditional languages.
//!
//! The subjective language has a binary conditional `phi => psi`; the
//! statistical language instead has the indexed family `phi =[x1,x2]=> psi`,
//! whose variable set binds occurrences in both operands exactly as a
//! quantifier block would. A single AST covers both; parsing is handed a
//! [`Lang`] flag and rejects operators from the other language.

mod parse;
mod print;

pub use parse::{parse, ParseError};

use std::collections::{BTreeMap, BTreeSet};

/// Symbol and variable names.
pub type Ident = String;

/// Language selector attached at parse time.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Lang {
    Subj,
    Stat,
}

/// First-order terms. Constants are 0-ary functions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(Ident),
    Func(Ident, Vec<Term>),
}

impl Term {
    /// All variables occurring in the term.
    pub fn vars(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Ident>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Func(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    fn substitute(&self, var: &str, t: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => t.clone(),
            Term::Var(_) => self.clone(),
            Term::Func(f, args) => Term::Func(
                f.clone(),
                args.iter().map(|a| a.substitute(var, t)).collect(),
            ),
        }
    }
}

/// Formulas of either language.
///
/// `N phi` is surface sugar for `~phi => false` and never appears as its own
/// node; the parser expands it and the printer folds it back.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    True,
    False,
    Atom(Ident, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Ident, Box<Formula>),
    Exists(Ident, Box<Formula>),
    CondSubj(Box<Formula>, Box<Formula>),
    CondStat(BTreeSet<Ident>, Box<Formula>, Box<Formula>),
}

/// Convenience constructor for a variable term.
pub fn var(name: &str) -> Term {
    Term::Var(name.to_string())
}

/// Convenience constructor for a constant (0-ary function) term.
pub fn cnst(name: &str) -> Term {
    Term::Func(name.to_string(), Vec::new())
}

/// Convenience constructor for a function application term.
pub fn func(name: &str, args: Vec<Term>) -> Term {
    Term::Func(name.to_string(), args)
}

impl Formula {
    pub fn atom(pred: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(pred.to_string(), args)
    }

    pub fn eq(lhs: Term, rhs: Term) -> Formula {
        Formula::Eq(lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, rhs: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn implies(self, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(self), Box::new(rhs))
    }

    /// `phi <-> psi`, stored as the conjunction of the two implications.
    pub fn iff(self, rhs: Formula) -> Formula {
        self.clone()
            .implies(rhs.clone())
            .and(rhs.implies(self))
    }

    /// Subjective conditional `self => rhs`.
    pub fn cond(self, rhs: Formula) -> Formula {
        Formula::CondSubj(Box::new(self), Box::new(rhs))
    }

    /// Statistical conditional `self =[vars]=> rhs`.
    pub fn cond_stat<I: IntoIterator<Item = S>, S: Into<Ident>>(
        vars: I,
        lhs: Formula,
        rhs: Formula,
    ) -> Formula {
        let set: BTreeSet<Ident> = vars.into_iter().map(Into::into).collect();
        Formula::CondStat(set, Box::new(lhs), Box::new(rhs))
    }

    /// `N self`, i.e. `~self => false`.
    pub fn nec(self) -> Formula {
        self.neg().cond(Formula::False)
    }

    /// Recognize the `N` sugar: returns the body if the formula is
    /// `~phi => false`.
    pub fn as_nec(&self) -> Option<&Formula> {
        if let Formula::CondSubj(lhs, rhs) = self {
            if let (Formula::Not(body), Formula::False) = (lhs.as_ref(), rhs.as_ref()) {
                return Some(body);
            }
        }
        None
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(body))
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(body))
    }

    /// Free variables. Quantifiers bind one variable; the statistical
    /// conditional binds its whole variable set in both operands.
    pub fn free_vars(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out, &mut Vec::new());
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Ident>, bound: &mut Vec<Ident>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, args) => {
                for t in args {
                    for v in t.vars() {
                        if !bound.contains(&v) {
                            out.insert(v);
                        }
                    }
                }
            }
            Formula::Eq(a, b) => {
                for t in [a, b] {
                    for v in t.vars() {
                        if !bound.contains(&v) {
                            out.insert(v);
                        }
                    }
                }
            }
            Formula::Not(f) => f.collect_free(out, bound),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(out, bound);
                b.collect_free(out, bound);
            }
            Formula::CondSubj(a, b) => {
                a.collect_free(out, bound);
                b.collect_free(out, bound);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                bound.push(v.clone());
                body.collect_free(out, bound);
                bound.pop();
            }
            Formula::CondStat(vars, a, b) => {
                let depth = bound.len();
                bound.extend(vars.iter().cloned());
                a.collect_free(out, bound);
                b.collect_free(out, bound);
                bound.truncate(depth);
            }
        }
    }

    /// True when the formula contains a conditional operator (of either
    /// language) anywhere, including under binders. The substitutability
    /// restriction keys off this.
    pub fn contains_conditional(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => false,
            Formula::Not(f) => f.contains_conditional(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.contains_conditional() || b.contains_conditional()
            }
            Formula::Forall(_, f) | Formula::Exists(_, f) => f.contains_conditional(),
            Formula::CondSubj(..) | Formula::CondStat(..) => true,
        }
    }

    /// True when the formula contains no quantifier and no conditional, the
    /// shape required of the equality-substitution axiom.
    pub fn is_quantifier_and_conditional_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => true,
            Formula::Not(f) => f.is_quantifier_and_conditional_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_quantifier_and_conditional_free() && b.is_quantifier_and_conditional_free()
            }
            Formula::Forall(..)
            | Formula::Exists(..)
            | Formula::CondSubj(..)
            | Formula::CondStat(..) => false,
        }
    }

    /// Whether `t` may be substituted for free occurrences of `var`.
    ///
    /// Two conditions: no variable of `t` may be captured by a binder
    /// (quantifier or statistical variable set), and if the formula mentions
    /// any conditional then only variables are substitutable.
    pub fn substitutable(&self, var: &str, t: &Term) -> bool {
        if self.contains_conditional() && !matches!(t, Term::Var(_)) {
            return false;
        }
        self.capture_free(var, &t.vars(), &mut Vec::new())
    }

    fn capture_free(&self, var: &str, tvars: &BTreeSet<Ident>, bound: &mut Vec<Ident>) -> bool {
        match self {
            Formula::True | Formula::False => true,
            Formula::Atom(_, args) => {
                !args.iter().any(|a| a.vars().contains(var))
                    || bound.iter().all(|b| !tvars.contains(b))
            }
            Formula::Eq(a, b) => {
                !(a.vars().contains(var) || b.vars().contains(var))
                    || bound.iter().all(|b| !tvars.contains(b))
            }
            Formula::Not(f) => f.capture_free(var, tvars, bound),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.capture_free(var, tvars, bound) && b.capture_free(var, tvars, bound)
            }
            Formula::CondSubj(a, b) => {
                a.capture_free(var, tvars, bound) && b.capture_free(var, tvars, bound)
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                if v == var {
                    return true;
                }
                bound.push(v.clone());
                let ok = body.capture_free(var, tvars, bound);
                bound.pop();
                ok
            }
            Formula::CondStat(vars, a, b) => {
                if vars.contains(var) {
                    return true;
                }
                let depth = bound.len();
                bound.extend(vars.iter().cloned());
                let ok =
                    a.capture_free(var, tvars, bound) && b.capture_free(var, tvars, bound);
                bound.truncate(depth);
                ok
            }
        }
    }

    /// Capture-avoiding substitution of `t` for free occurrences of `var`.
    /// Pairs that fail [`Formula::substitutable`] are rejected rather than
    /// repaired by renaming.
    pub fn substitute(&self, var: &str, t: &Term) -> Result<Formula, SubstError> {
        if !self.substitutable(var, t) {
            return Err(SubstError {
                var: var.to_string(),
                term: t.clone(),
            });
        }
        Ok(self.substitute_unchecked(var, t))
    }

    fn substitute_unchecked(&self, var: &str, t: &Term) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(p, args) => Formula::Atom(
                p.clone(),
                args.iter().map(|a| a.substitute(var, t)).collect(),
            ),
            Formula::Eq(a, b) => Formula::Eq(a.substitute(var, t), b.substitute(var, t)),
            Formula::Not(f) => Formula::Not(Box::new(f.substitute_unchecked(var, t))),
            Formula::And(a, b) => Formula::And(
                Box::new(a.substitute_unchecked(var, t)),
                Box::new(b.substitute_unchecked(var, t)),
            ),
            Formula::Or(a, b) => Formula::Or(
                Box::new(a.substitute_unchecked(var, t)),
                Box::new(b.substitute_unchecked(var, t)),
            ),
            Formula::Implies(a, b) => Formula::Implies(
                Box::new(a.substitute_unchecked(var, t)),
                Box::new(b.substitute_unchecked(var, t)),
            ),
            Formula::CondSubj(a, b) => Formula::CondSubj(
                Box::new(a.substitute_unchecked(var, t)),
                Box::new(b.substitute_unchecked(var, t)),
            ),
            Formula::Forall(v, body) => {
                if v == var {
                    self.clone()
                } else {
                    Formula::Forall(v.clone(), Box::new(body.substitute_unchecked(var, t)))
                }
            }
            Formula::Exists(v, body) => {
                if v == var {
                    self.clone()
                } else {
                    Formula::Exists(v.clone(), Box::new(body.substitute_unchecked(var, t)))
                }
            }
            Formula::CondStat(vars, a, b) => {
                if vars.contains(var) {
                    self.clone()
                } else {
                    Formula::CondStat(
                        vars.clone(),
                        Box::new(a.substitute_unchecked(var, t)),
                        Box::new(b.substitute_unchecked(var, t)),
                    )
                }
            }
        }
    }

    /// Universal closure: a `forall` prefix over the free variables in
    /// lexicographic order.
    pub fn universal_closure(&self) -> Formula {
        let mut out = self.clone();
        for v in self.free_vars().into_iter().rev() {
            out = Formula::Forall(v, Box::new(out));
        }
        out
    }

    /// Strip a (possibly empty) universal prefix, returning the matrix.
    pub fn strip_forall_prefix(&self) -> &Formula {
        let mut f = self;
        while let Formula::Forall(_, body) = f {
            f = body;
        }
        f
    }
}

/// Failed substitution: `t` is not substitutable for `var`.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("term {term:?} is not substitutable for {var}")]
pub struct SubstError {
    pub var: Ident,
    pub term: Term,
}

/// Predicate and function symbols with their arities. The two namespaces
/// must not overlap.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub predicates: BTreeMap<Ident, usize>,
    pub functions: BTreeMap<Ident, usize>,
}

/// Arity or namespace violation while collecting a vocabulary.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VocabError {
    #[error("symbol {symbol} used with arity {found} but previously {expected}")]
    ArityMismatch {
        symbol: Ident,
        expected: usize,
        found: usize,
    },
    #[error("symbol {0} used as both predicate and function")]
    NamespaceClash(Ident),
}

impl Vocabulary {
    pub fn record_predicate(&mut self, symbol: &str, arity: usize) -> Result<(), VocabError> {
        if self.functions.contains_key(symbol) {
            return Err(VocabError::NamespaceClash(symbol.to_string()));
        }
        match self.predicates.get(symbol) {
            Some(&a) if a != arity => Err(VocabError::ArityMismatch {
                symbol: symbol.to_string(),
                expected: a,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.predicates.insert(symbol.to_string(), arity);
                Ok(())
            }
        }
    }

    pub fn record_function(&mut self, symbol: &str, arity: usize) -> Result<(), VocabError> {
        if self.predicates.contains_key(symbol) {
            return Err(VocabError::NamespaceClash(symbol.to_string()));
        }
        match self.functions.get(symbol) {
            Some(&a) if a != arity => Err(VocabError::ArityMismatch {
                symbol: symbol.to_string(),
                expected: a,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.functions.insert(symbol.to_string(), arity);
                Ok(())
            }
        }
    }

    fn absorb_term(&mut self, t: &Term) -> Result<(), VocabError> {
        if let Term::Func(f, args) = t {
            self.record_function(f, args.len())?;
            for a in args {
                self.absorb_term(a)?;
            }
        }
        Ok(())
    }

    /// Record every symbol occurring in the formula.
    pub fn absorb(&mut self, f: &Formula) -> Result<(), VocabError> {
        match f {
            Formula::True | Formula::False => Ok(()),
            Formula::Atom(p, args) => {
                self.record_predicate(p, args.len())?;
                for a in args {
                    self.absorb_term(a)?;
                }
                Ok(())
            }
            Formula::Eq(a, b) => {
                self.absorb_term(a)?;
                self.absorb_term(b)
            }
            Formula::Not(g) => self.absorb(g),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::CondSubj(a, b) => {
                self.absorb(a)?;
                self.absorb(b)
            }
            Formula::Forall(_, g) | Formula::Exists(_, g) => self.absorb(g),
            Formula::CondStat(_, a, b) => {
                self.absorb(a)?;
                self.absorb(b)
            }
        }
    }

    /// Collect the vocabulary of a formula set, checking consistency.
    pub fn collect<'a, I: IntoIterator<Item = &'a Formula>>(
        formulas: I,
    ) -> Result<Vocabulary, VocabError> {
        let mut v = Vocabulary::default();
        for f in formulas {
            v.absorb(f)?;
        }
        Ok(v)
    }
}

/// Whether an identifier is variable-shaped: a single letter `u`..`z`
/// followed by optional digits. Everything else names a symbol.
pub fn is_variable_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if ('u'..='z').contains(&c) => chars.all(|c| c.is_ascii_digit()),
        _ => false,
    }
}

/// Whether an identifier is a statistical variable: `x1`, `x2`, ...
pub fn is_stat_variable(s: &str) -> bool {
    let rest = match s.strip_prefix('x') {
        Some(r) => r,
        None => return false,
    };
    !rest.is_empty()
        && !rest.starts_with('0')
        && rest.chars().all(|c| c.is_ascii_digit())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn winner(t: Term) -> Formula {
        Formula::atom("Winner", vec![t])
    }

    #[test]
    fn free_vars_binders() {
        let f = Formula::cond_stat(
            ["x"],
            Formula::atom("P", vec![var("x"), var("y")]),
            Formula::atom("Q", vec![var("x")]),
        );
        assert_eq!(f.free_vars(), BTreeSet::from(["y".to_string()]));

        let g = Formula::forall("x", Formula::atom("P", vec![var("x")]));
        assert!(g.free_vars().is_empty());

        let e = Formula::eq(var("x"), var("y"));
        assert_eq!(
            e.free_vars(),
            BTreeSet::from(["x".to_string(), "y".to_string()])
        );
    }

    #[test]
    fn substitution_basics() {
        let p = Formula::atom("P", vec![var("x")]);
        assert_eq!(
            p.substitute("x", &cnst("c")).unwrap(),
            Formula::atom("P", vec![cnst("c")])
        );

        let capture = Formula::forall("y", Formula::eq(var("x"), var("y")).neg());
        assert!(capture.substitute("x", &var("y")).is_err());

        let cond = Formula::atom("P", vec![var("x")]).cond(Formula::atom("Q", vec![var("x")]));
        assert_eq!(
            cond.substitute("x", &var("y")).unwrap(),
            Formula::atom("P", vec![var("y")]).cond(Formula::atom("Q", vec![var("y")]))
        );
        assert!(cond.substitute("x", &cnst("c")).is_err());
    }

    #[test]
    fn substitutable_cases() {
        let bool_only = Formula::atom("P", vec![var("x")]).and(Formula::atom("Q", vec![var("x")]));
        assert!(bool_only.substitutable("x", &func("f", vec![cnst("c")])));

        let vacuous = Formula::forall("x", Formula::atom("P", vec![var("x")]));
        assert!(vacuous.substitutable("x", &cnst("c")));

        let stat = Formula::cond_stat(
            ["x1"],
            Formula::atom("P", vec![var("x1"), var("x2")]),
            Formula::atom("Q", vec![var("x1")]),
        );
        assert!(!stat.substitutable("x2", &cnst("c")));
        assert!(stat.substitutable("x2", &var("x3")));
        assert!(!stat.substitutable("x2", &var("x1")));
    }

    #[test]
    fn free_vars_after_substitution() {
        let f = winner(var("x")).or(winner(var("z")));
        let g = f.substitute("x", &var("y")).unwrap();
        assert_eq!(
            g.free_vars(),
            BTreeSet::from(["y".to_string(), "z".to_string()])
        );
    }

    #[test]
    fn universal_closure_order() {
        let f = Formula::atom("P", vec![var("y"), var("x")]);
        let closed = f.universal_closure();
        assert_eq!(
            closed,
            Formula::forall("x", Formula::forall("y", f.clone()))
        );
        assert!(closed.free_vars().is_empty());

        let sentence = Formula::forall("x", Formula::atom("P", vec![var("x")]));
        assert_eq!(sentence.universal_closure(), sentence);

        let stat = Formula::cond_stat(
            ["x"],
            Formula::atom("P", vec![var("x")]),
            Formula::atom("Q", vec![var("x"), var("y")]),
        );
        assert_eq!(
            stat.universal_closure(),
            Formula::forall("y", stat.clone())
        );
    }

    #[test]
    fn nec_sugar_shape() {
        let f = winner(cnst("c")).nec();
        assert_eq!(
            f,
            Formula::CondSubj(
                Box::new(Formula::Not(Box::new(winner(cnst("c"))))),
                Box::new(Formula::False)
            )
        );
        assert_eq!(f.as_nec(), Some(&winner(cnst("c"))));
    }

    #[test]
    fn vocabulary_consistency() {
        let f = Formula::atom("P", vec![var("x"), cnst("c")]);
        let g = Formula::atom("P", vec![var("x")]);
        assert!(Vocabulary::collect([&f, &g]).is_err());

        let h = Formula::atom("c", vec![var("x")]);
        assert!(matches!(
            Vocabulary::collect([&f, &h]),
            Err(VocabError::NamespaceClash(_))
        ));

        let v = Vocabulary::collect([&f]).unwrap();
        assert_eq!(v.predicates.get("P"), Some(&2));
        assert_eq!(v.functions.get("c"), Some(&0));
    }

    #[test]
    fn variable_ident_shapes() {
        for good in ["x", "y", "z", "u", "x1", "w12", "v0"] {
            assert!(is_variable_ident(good), "{good}");
        }
        for bad in ["c", "Tweety", "xy", "x1a", "P", "winner", "a1"] {
            assert!(!is_variable_ident(bad), "{bad}");
        }
        for good in ["x1", "x2", "x10"] {
            assert!(is_stat_variable(good), "{good}");
        }
        for bad in ["x", "x0", "x01", "y1", "c"] {
            assert!(!is_stat_variable(bad), "{bad}");
        }
    }
}
