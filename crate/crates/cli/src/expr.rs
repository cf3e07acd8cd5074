//! The constant-expression grammar accepted by `--alpha`, `--beta` and chain
//! file headers:
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | primary
//! primary := INTEGER | "(" expr ")" | "root" "(" expr "," INTEGER ")"
//! ```
//!
//! `root(x, n)` is the real nonnegative `n`-th root, `n >= 2`.

use dioph::realnum::RealExpr;
use num_bigint::BigInt;

/// Bumped whenever the grammar gains syntax; written into chain headers.
pub const GRAMMAR_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("at column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("{0}")]
    Value(#[from] dioph::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i].parse().expect("ascii digits");
            out.push((start + 1, Tok::Int(n)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start + 1, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/(),".contains(c) {
            out.push((i + 1, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ExprError::Syntax {
                col: i + 1,
                msg: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(c, _)| *c)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            col: self.col(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail(format!("expected {c:?}"))
        }
    }

    fn expr(&mut self) -> Result<RealExpr, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = RealExpr::add(acc, self.term()?);
            } else if self.eat('-') {
                acc = RealExpr::sub(acc, self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RealExpr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = RealExpr::mul(acc, self.unary()?);
            } else if self.eat('/') {
                acc = RealExpr::div(acc, self.unary()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RealExpr, ExprError> {
        if self.eat('-') {
            let x = self.unary()?;
            return Ok(RealExpr::sub(RealExpr::int(0), x));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<RealExpr, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(RealExpr::int(n))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) if name == "root" => {
                self.pos += 1;
                self.expect('(')?;
                let radicand = self.expr()?;
                self.expect(',')?;
                let index = match self.peek() {
                    Some(Tok::Int(n)) => match u32::try_from(n) {
                        Ok(i) if i >= 2 => i,
                        _ => return self.fail("root index must be an integer >= 2"),
                    },
                    _ => return self.fail("expected a root index"),
                };
                self.pos += 1;
                self.expect(')')?;
                Ok(RealExpr::root(radicand, index)?)
            }
            Some(Tok::Ident(name)) => self.fail(format!("unknown function {name:?}")),
            Some(t) => self.fail(format!("unexpected token {t:?}")),
            None => self.fail("unexpected end of expression"),
        }
    }
}

/// Parses one expression; trailing input is an error.
pub fn parse_expr(src: &str) -> Result<RealExpr, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len() + 1,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.fail("trailing input");
    }
    Ok(e)
}
