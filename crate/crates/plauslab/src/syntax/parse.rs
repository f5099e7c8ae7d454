//! Hand-rolled lexer and recursive-descent parser for the concrete grammar.
//!
//! Precedence, loosest first: conditionals (`=>`, `=[X]=>`, non-associative),
//! `<->` (right), `->` (right), `|`, `&`, unary (`~`, `N`, quantifiers).
//! Conditional operands sit at `<->` level, so nesting a conditional inside
//! another requires parentheses. Identifiers matching `[u-z][0-9]*` are
//! variables; everything else names a predicate or function symbol.

use super::{is_stat_variable, is_variable_ident, Formula, Lang, Term, VocabError, Vocabulary};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("lex error at byte {pos}: {msg}")]
    Lex { pos: usize, msg: String },
    #[error("parse error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error(transparent)]
    Vocab(#[from] VocabError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    EqSign,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    IffArrow,
    FatArrow,
    StatOpen,
    StatClose,
    KwTrue,
    KwFalse,
    KwForall,
    KwExists,
    KwNec,
    End,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier {name}"),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::EqSign => "=",
            Tok::Tilde => "~",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Arrow => "->",
            Tok::IffArrow => "<->",
            Tok::FatArrow => "=>",
            Tok::StatOpen => "=[",
            Tok::StatClose => "]=>",
            Tok::KwTrue => "true",
            Tok::KwFalse => "false",
            Tok::KwForall => "forall",
            Tok::KwExists => "exists",
            Tok::KwNec => "N",
            Tok::End => "end of input",
        };
        write!(f, "{s}")
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            b'~' => {
                toks.push((Tok::Tilde, i));
                i += 1;
            }
            b'&' => {
                toks.push((Tok::Amp, i));
                i += 1;
            }
            b'|' => {
                toks.push((Tok::Pipe, i));
                i += 1;
            }
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Arrow, i));
                    i += 2;
                } else {
                    return Err(ParseError::Lex {
                        pos: i,
                        msg: "expected -> after -".into(),
                    });
                }
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') {
                    toks.push((Tok::IffArrow, i));
                    i += 3;
                } else {
                    return Err(ParseError::Lex {
                        pos: i,
                        msg: "expected <-> after <".into(),
                    });
                }
            }
            b'=' => match bytes.get(i + 1) {
                Some(&b'>') => {
                    toks.push((Tok::FatArrow, i));
                    i += 2;
                }
                Some(&b'[') => {
                    toks.push((Tok::StatOpen, i));
                    i += 2;
                }
                _ => {
                    toks.push((Tok::EqSign, i));
                    i += 1;
                }
            },
            b']' => {
                if bytes.get(i + 1) == Some(&b'=') && bytes.get(i + 2) == Some(&b'>') {
                    toks.push((Tok::StatClose, i));
                    i += 3;
                } else {
                    return Err(ParseError::Lex {
                        pos: i,
                        msg: "expected ]=> after ]".into(),
                    });
                }
            }
            _ if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "true" => Tok::KwTrue,
                    "false" => Tok::KwFalse,
                    "forall" => Tok::KwForall,
                    "exists" => Tok::KwExists,
                    "N" => Tok::KwNec,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((tok, start));
            }
            _ => {
                return Err(ParseError::Lex {
                    pos: i,
                    msg: format!("unexpected character {:?}", c as char),
                });
            }
        }
    }
    toks.push((Tok::End, bytes.len()));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    lang: Lang,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn check_variable(&self, name: &str) -> Result<(), ParseError> {
        if !is_variable_ident(name) {
            return self.err(format!(
                "{name} is not a variable (variables match [u-z][0-9]*)"
            ));
        }
        if self.lang == Lang::Stat && !is_stat_variable(name) {
            return self.err(format!(
                "statistical variables are x1, x2, ...; found {name}"
            ));
        }
        Ok(())
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.iff()?;
        let f = match self.peek() {
            Tok::FatArrow => {
                if self.lang == Lang::Stat {
                    return self.err(
                        "subjective conditional => is not part of the statistical language",
                    );
                }
                self.bump();
                let rhs = self.iff()?;
                lhs.cond(rhs)
            }
            Tok::StatOpen => {
                if self.lang == Lang::Subj {
                    return self.err(
                        "statistical conditional =[..]=> is not part of the subjective language",
                    );
                }
                self.bump();
                let vars = self.stat_varset()?;
                let rhs = self.iff()?;
                Formula::CondStat(vars, Box::new(lhs), Box::new(rhs))
            }
            _ => return Ok(lhs),
        };
        if matches!(self.peek(), Tok::FatArrow | Tok::StatOpen) {
            return self.err("conditionals do not associate; parenthesize the inner one");
        }
        Ok(f)
    }

    fn stat_varset(&mut self) -> Result<BTreeSet<String>, ParseError> {
        let mut vars = BTreeSet::new();
        loop {
            match self.bump() {
                Tok::Ident(name) => {
                    self.check_variable(&name)?;
                    if !vars.insert(name.clone()) {
                        return self.err(format!("duplicate variable {name} in conditional"));
                    }
                }
                other => return self.err(format!("expected variable, found {other}")),
            }
            match self.bump() {
                Tok::Comma => continue,
                Tok::StatClose => break,
                other => return self.err(format!("expected , or ]=>, found {other}")),
            }
        }
        if vars.is_empty() {
            return self.err("statistical conditional needs a nonempty variable set");
        }
        Ok(vars)
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.implies()?;
        if *self.peek() == Tok::IffArrow {
            self.bump();
            let rhs = self.iff()?;
            Ok(lhs.iff(rhs))
        } else {
            Ok(lhs)
        }
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implies()?;
            Ok(lhs.implies(rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            lhs = lhs.or(self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            lhs = lhs.and(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Tok::KwNec => {
                if self.lang == Lang::Stat {
                    return self.err("N is not part of the statistical language");
                }
                self.bump();
                Ok(self.unary()?.nec())
            }
            Tok::KwForall | Tok::KwExists => {
                let forall = *self.peek() == Tok::KwForall;
                self.bump();
                let name = match self.bump() {
                    Tok::Ident(name) => name,
                    other => return self.err(format!("expected variable, found {other}")),
                };
                self.check_variable(&name)?;
                let body = self.unary()?;
                Ok(if forall {
                    Formula::Forall(name, Box::new(body))
                } else {
                    Formula::Exists(name, Box::new(body))
                })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::KwTrue => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::KwFalse => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(_) => {
                let t = self.term()?;
                if *self.peek() == Tok::EqSign {
                    self.bump();
                    let rhs = self.term()?;
                    Ok(Formula::Eq(t, rhs))
                } else {
                    match t {
                        Term::Func(p, args) => Ok(Formula::Atom(p, args)),
                        Term::Var(v) => {
                            self.err(format!("bare variable {v} is not a formula"))
                        }
                    }
                }
            }
            other => self.err(format!("expected a formula, found {other}")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let name = match self.bump() {
            Tok::Ident(name) => name,
            other => return self.err(format!("expected a term, found {other}")),
        };
        if is_variable_ident(&name) {
            self.check_variable(&name)?;
            if *self.peek() == Tok::LParen {
                return self.err(format!("variable {name} cannot take arguments"));
            }
            return Ok(Term::Var(name));
        }
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            if *self.peek() == Tok::RParen {
                self.bump();
            } else {
                loop {
                    args.push(self.term()?);
                    match self.bump() {
                        Tok::Comma => continue,
                        Tok::RParen => break,
                        other => return self.err(format!("expected , or ), found {other}")),
                    }
                }
            }
        }
        Ok(Term::Func(name, args))
    }
}

/// Parse a formula of the given language, checking arity consistency and the
/// language's operator and variable restrictions.
pub fn parse(text: &str, lang: Lang) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, lang };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.err(format!("unexpected {} after formula", p.peek()));
    }
    Vocabulary::collect([&f])?;
    Ok(f)
}
