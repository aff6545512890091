//! Expressions for weakly holomorphic modular functions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' ['-'] int)?
//! base   := atom | int | '(' expr ')'
//! atom   := ('j' | 'J' | 'J' int | 'E4' | 'E6' | 'eta') '(' int? 'z' ')'
//! ```
//!
//! An integer literal divided by an integer literal is read as one rational constant.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomKind {
    /// `j`
    SmallJ,
    /// `J = j − 744`
    J,
    /// Faber function `J_m`
    Jm(u32),
    E4,
    E6,
    Eta,
}

/// A level one function evaluated at `k·z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub kind: AtomKind,
    pub scale: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModFuncExpr {
    Const(BigRational),
    Atom(Atom),
    Neg(Box<ModFuncExpr>),
    Add(Box<ModFuncExpr>, Box<ModFuncExpr>),
    Sub(Box<ModFuncExpr>, Box<ModFuncExpr>),
    Mul(Box<ModFuncExpr>, Box<ModFuncExpr>),
    Div(Box<ModFuncExpr>, Box<ModFuncExpr>),
    Pow(Box<ModFuncExpr>, i64),
}

impl ModFuncExpr {
    pub fn atom(kind: AtomKind, scale: u64) -> Self {
        ModFuncExpr::Atom(Atom { kind, scale })
    }

    /// All atoms, in order of first appearance.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Atom>) {
        match self {
            ModFuncExpr::Const(_) => {}
            ModFuncExpr::Atom(a) => {
                if !out.contains(a) {
                    out.push(*a);
                }
            }
            ModFuncExpr::Neg(x) | ModFuncExpr::Pow(x, _) => x.collect_atoms(out),
            ModFuncExpr::Add(x, y)
            | ModFuncExpr::Sub(x, y)
            | ModFuncExpr::Mul(x, y)
            | ModFuncExpr::Div(x, y) => {
                x.collect_atoms(out);
                y.collect_atoms(out);
            }
        }
    }

    /// Whether every atom scale divides `n`.
    pub fn has_level(&self, n: u64) -> bool {
        self.atoms().iter().all(|a| n % a.scale == 0)
    }

    fn precedence(&self) -> u8 {
        match self {
            ModFuncExpr::Add(..) | ModFuncExpr::Sub(..) => 1,
            ModFuncExpr::Mul(..) | ModFuncExpr::Div(..) => 2,
            ModFuncExpr::Const(c) if !c.is_integer() => 2,
            ModFuncExpr::Neg(_) => 3,
            ModFuncExpr::Pow(..) => 4,
            ModFuncExpr::Const(_) | ModFuncExpr::Atom(_) => 5,
        }
    }

    fn is_int_const(&self) -> bool {
        matches!(self, ModFuncExpr::Const(c) if c.is_integer())
    }
}

fn wrap(e: &ModFuncExpr, min: u8) -> String {
    if e.precedence() < min {
        format!("({e})")
    } else {
        e.to_string()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            AtomKind::SmallJ => "j".to_string(),
            AtomKind::J => "J".to_string(),
            AtomKind::Jm(m) => format!("J{m}"),
            AtomKind::E4 => "E4".to_string(),
            AtomKind::E6 => "E6".to_string(),
            AtomKind::Eta => "eta".to_string(),
        };
        if self.scale == 1 {
            write!(f, "{name}(z)")
        } else {
            write!(f, "{name}({}z)", self.scale)
        }
    }
}

impl fmt::Display for ModFuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModFuncExpr::Const(c) => write!(f, "{c}"),
            ModFuncExpr::Atom(a) => write!(f, "{a}"),
            ModFuncExpr::Neg(x) => write!(f, "-{}", wrap(x, 3)),
            ModFuncExpr::Add(x, y) => write!(f, "{} + {}", wrap(x, 1), wrap(y, 2)),
            ModFuncExpr::Sub(x, y) => write!(f, "{} - {}", wrap(x, 1), wrap(y, 2)),
            ModFuncExpr::Mul(x, y) => write!(f, "{}*{}", wrap(x, 2), wrap(y, 3)),
            ModFuncExpr::Div(x, y) => {
                // keep `(2)/3` from being read back as the constant 2/3
                let left = if x.is_int_const() && y.is_int_const() {
                    format!("({x})")
                } else {
                    wrap(x, 2)
                };
                write!(f, "{left}/{}", wrap(y, 3))
            }
            ModFuncExpr::Pow(x, e) => write!(f, "{}^{e}", wrap(x, 5)),
        }
    }
}

pub fn render(e: &ModFuncExpr) -> String {
    e.to_string()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn int(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    fn small_int(&mut self) -> Result<i64> {
        let start = self.pos;
        let v = self.int()?;
        i64::try_from(v).or_else(|_| {
            self.pos = start;
            self.err("integer too large")
        })
    }

    fn expr(&mut self) -> Result<ModFuncExpr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = ModFuncExpr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = ModFuncExpr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<ModFuncExpr> {
        let (mut lhs, mut literal) = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = ModFuncExpr::Mul(Box::new(lhs), Box::new(self.factor()?.0));
            } else if self.eat(b'/') {
                let at = self.pos;
                let (rhs, rhs_literal) = self.factor()?;
                if matches!(&rhs, ModFuncExpr::Const(c) if c.is_zero()) {
                    self.pos = at;
                    return self.err("division by zero literal");
                }
                lhs = match (lhs, rhs) {
                    (ModFuncExpr::Const(p), ModFuncExpr::Const(q)) if literal && rhs_literal => {
                        ModFuncExpr::Const(p / q)
                    }
                    (l, r) => ModFuncExpr::Div(Box::new(l), Box::new(r)),
                };
            } else {
                return Ok(lhs);
            }
            literal = false;
        }
    }

    /// Returns the factor and whether it is a bare integer literal.
    fn factor(&mut self) -> Result<(ModFuncExpr, bool)> {
        if self.eat(b'-') {
            let (x, _) = self.factor()?;
            return Ok((ModFuncExpr::Neg(Box::new(x)), false));
        }
        let (base, literal) = self.base()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let e = self.small_int()?;
            return Ok((
                ModFuncExpr::Pow(Box::new(base), if neg { -e } else { e }),
                false,
            ));
        }
        Ok((base, literal))
    }

    fn base(&mut self) -> Result<(ModFuncExpr, bool)> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok((e, false))
            }
            Some(c) if c.is_ascii_digit() => Ok((
                ModFuncExpr::Const(BigRational::from_integer(self.int()?)),
                true,
            )),
            Some(c) if c.is_ascii_alphabetic() => Ok((self.atom()?, false)),
            Some(c) => self.err(format!("unexpected '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn atom(&mut self) -> Result<ModFuncExpr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let kind = match name {
            "j" => AtomKind::SmallJ,
            "J" => AtomKind::J,
            "E4" => AtomKind::E4,
            "E6" => AtomKind::E6,
            "eta" => AtomKind::Eta,
            _ => match name.strip_prefix('J').and_then(|m| m.parse::<u32>().ok()) {
                Some(m) if m >= 1 && !name[1..].starts_with('0') => AtomKind::Jm(m),
                _ => {
                    self.pos = start;
                    return self.err(format!("unknown atom '{name}'"));
                }
            },
        };
        self.expect(b'(')?;
        let scale = if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let at = self.pos;
            let k = self.small_int()?;
            if k < 1 {
                self.pos = at;
                return self.err("scale must be positive");
            }
            k as u64
        } else {
            1
        };
        if self.peek() != Some(b'z') {
            return self.err("expected 'z'");
        }
        self.pos += 1;
        self.expect(b')')?;
        Ok(ModFuncExpr::atom(kind, scale))
    }
}

pub fn parse_modfunc(text: &str) -> Result<ModFuncExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(e)
}

impl std::str::FromStr for ModFuncExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_modfunc(s)
    }
}
