//! Pretty-printer emitting the same grammar the parser accepts, with minimal
//! parentheses. `~phi => false` is folded back to `N phi` on output.

use super::{Formula, Term};
use std::fmt;

const PREC_COND: u8 = 0;
const PREC_IFF: u8 = 1;
const PREC_IMPLIES: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_UNARY: u8 = 5;
const PREC_ATOM: u8 = 6;

fn prec(f: &Formula) -> u8 {
    if f.as_nec().is_some() {
        return PREC_UNARY;
    }
    match f {
        Formula::CondSubj(..) | Formula::CondStat(..) => PREC_COND,
        Formula::Implies(..) => PREC_IMPLIES,
        Formula::Or(..) => PREC_OR,
        Formula::And(..) => PREC_AND,
        Formula::Not(..) | Formula::Forall(..) | Formula::Exists(..) => PREC_UNARY,
        Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => PREC_ATOM,
    }
}

fn write_formula(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(f) < min {
        write!(out, "(")?;
        write_formula(f, PREC_COND, out)?;
        return write!(out, ")");
    }
    if let Some(body) = f.as_nec() {
        write!(out, "N ")?;
        return write_formula(body, PREC_UNARY, out);
    }
    match f {
        Formula::True => write!(out, "true"),
        Formula::False => write!(out, "false"),
        Formula::Atom(p, args) => {
            write!(out, "{p}")?;
            if !args.is_empty() {
                write!(out, "(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(out, ",")?;
                    }
                    write!(out, "{a}")?;
                }
                write!(out, ")")?;
            }
            Ok(())
        }
        Formula::Eq(a, b) => write!(out, "{a} = {b}"),
        Formula::Not(g) => {
            write!(out, "~")?;
            write_formula(g, PREC_UNARY, out)
        }
        Formula::And(a, b) => {
            write_formula(a, PREC_AND, out)?;
            write!(out, " & ")?;
            write_formula(b, PREC_AND + 1, out)
        }
        Formula::Or(a, b) => {
            write_formula(a, PREC_OR, out)?;
            write!(out, " | ")?;
            write_formula(b, PREC_OR + 1, out)
        }
        Formula::Implies(a, b) => {
            write_formula(a, PREC_IMPLIES + 1, out)?;
            write!(out, " -> ")?;
            write_formula(b, PREC_IMPLIES, out)
        }
        Formula::Forall(v, body) => {
            write!(out, "forall {v} ")?;
            write_formula(body, PREC_UNARY, out)
        }
        Formula::Exists(v, body) => {
            write!(out, "exists {v} ")?;
            write_formula(body, PREC_UNARY, out)
        }
        Formula::CondSubj(a, b) => {
            write_formula(a, PREC_IFF, out)?;
            write!(out, " => ")?;
            write_formula(b, PREC_IFF, out)
        }
        Formula::CondStat(vars, a, b) => {
            write_formula(a, PREC_IFF, out)?;
            write!(out, " =[")?;
            for (i, v) in vars.iter().enumerate() {
                if i > 0 {
                    write!(out, ",")?;
                }
                write!(out, "{v}")?;
            }
            write!(out, "]=> ")?;
            write_formula(b, PREC_IFF, out)
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(out, "{v}"),
            Term::Func(f, args) => {
                write!(out, "{f}")?;
                if !args.is_empty() {
                    write!(out, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(out, ",")?;
                        }
                        write!(out, "{a}")?;
                    }
                    write!(out, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, PREC_COND, out)
    }
}
