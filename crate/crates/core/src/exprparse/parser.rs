use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::lexer::{tokenize, Token, TokenKind};
use super::{ParseError, ParseErrorKind};
use crate::opcore::{Coeff, Kind};
use crate::phasespace::Coord;

pub const MAX_EXPONENT: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constant {
    I,
    Hbar,
    SqrtHalfHbar,
    InvHbar,
    Number(BigRational),
}

impl Constant {
    pub fn to_coeff(&self) -> Coeff {
        match self {
            Constant::I => Coeff::i(),
            Constant::Hbar => Coeff::hbar(),
            Constant::SqrtHalfHbar => Coeff::sqrt_half_hbar(),
            Constant::InvHbar => Coeff::inv_hbar(),
            Constant::Number(r) => Coeff::from_rational(r.clone()),
        }
    }
}

/// A resolved variable name. Modes are 0-based; `q` and `q1` both mean mode 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symbol {
    Phase { mode: u32, coord: Coord },
    Operator { mode: u32, kind: Kind },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprAst {
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, u32),
    Neg(Box<ExprAst>),
    Var { symbol: Symbol, pos: usize },
    Const(Constant),
}

impl ExprAst {
    /// Variables in source order with their byte offsets.
    pub fn symbols(&self) -> Vec<(Symbol, usize)> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut Vec<(Symbol, usize)>) {
        match self {
            ExprAst::Add(a, b) | ExprAst::Sub(a, b) | ExprAst::Mul(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            ExprAst::Pow(a, _) | ExprAst::Neg(a) => a.collect_symbols(out),
            ExprAst::Var { symbol, pos } => out.push((*symbol, *pos)),
            ExprAst::Const(_) => {}
        }
    }
}

const OPERAND: &[&str] = &["variable", "number", "constant", "'('", "'-'"];

fn resolve_ident(name: &str, pos: usize) -> Result<ExprAst, ParseError> {
    match name {
        "i" => return Ok(ExprAst::Const(Constant::I)),
        "hbar" => return Ok(ExprAst::Const(Constant::Hbar)),
        "sqrt_half_hbar" => return Ok(ExprAst::Const(Constant::SqrtHalfHbar)),
        "inv_hbar" => return Ok(ExprAst::Const(Constant::InvHbar)),
        _ => {}
    }
    let unknown = || {
        ParseError::new(
            pos,
            ParseErrorKind::UnknownIdentifier(name.to_string()),
            vec!["q", "p", "Q", "P", "a", "ad", "i", "hbar"],
        )
    };
    let split = name.find(|c: char| c.is_ascii_digit()).unwrap_or(name.len());
    let (base, index) = name.split_at(split);
    let mode = if index.is_empty() {
        0
    } else {
        if !index.bytes().all(|b| b.is_ascii_digit()) || index.starts_with('0') {
            return Err(unknown());
        }
        match index.parse::<u32>() {
            Ok(n) if n >= 1 => n - 1,
            _ => return Err(unknown()),
        }
    };
    let symbol = match base {
        "q" => Symbol::Phase { mode, coord: Coord::Q },
        "p" => Symbol::Phase { mode, coord: Coord::P },
        "Q" => Symbol::Operator { mode, kind: Kind::Q },
        "P" => Symbol::Operator { mode, kind: Kind::P },
        "a" => Symbol::Operator { mode, kind: Kind::A },
        "ad" => Symbol::Operator { mode, kind: Kind::Adag },
        _ => return Err(unknown()),
    };
    Ok(ExprAst::Var { symbol, pos })
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        let t = self.peek();
        ParseError::new(t.pos, ParseErrorKind::Syntax { found: t.describe() }, expected.to_vec())
    }

    fn expr(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().kind {
                TokenKind::Plus => {
                    self.bump();
                    lhs = ExprAst::Add(Box::new(lhs), Box::new(self.term()?));
                }
                TokenKind::Minus => {
                    self.bump();
                    lhs = ExprAst::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.factor()?;
        while self.peek().kind == TokenKind::Star {
            self.bump();
            lhs = ExprAst::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<ExprAst, ParseError> {
        let base = self.base()?;
        if self.peek().kind != TokenKind::Caret {
            return Ok(base);
        }
        self.bump();
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Number { value, integral: true } => {
                self.bump();
                match value.to_integer().to_u32() {
                    Some(e) if e <= MAX_EXPONENT => Ok(ExprAst::Pow(Box::new(base), e)),
                    _ => Err(ParseError::new(
                        tok.pos,
                        ParseErrorKind::ExponentOverflow { max: MAX_EXPONENT },
                        vec!["unsigned integer <= 64"],
                    )),
                }
            }
            _ => Err(self.unexpected(&["unsigned integer"])),
        }
    }

    fn base(&mut self) -> Result<ExprAst, ParseError> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Ident => {
                self.bump();
                resolve_ident(&tok.lexeme, tok.pos)
            }
            TokenKind::Number { value, .. } => {
                self.bump();
                Ok(ExprAst::Const(Constant::Number(value)))
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                if self.peek().kind != TokenKind::RParen {
                    return Err(self.unexpected(&["')'", "'+'", "'-'", "'*'", "'^'"]));
                }
                self.bump();
                Ok(inner)
            }
            TokenKind::Minus => {
                self.bump();
                Ok(ExprAst::Neg(Box::new(self.factor()?)))
            }
            _ => Err(self.unexpected(OPERAND)),
        }
    }
}

/// Parses text into an expression tree without interpreting variables.
pub fn parse_ast(text: &str) -> Result<ExprAst, ParseError> {
    let mut p = Parser { tokens: tokenize(text)?, at: 0 };
    let ast = p.expr()?;
    if p.peek().kind != TokenKind::End {
        return Err(p.unexpected(&["'+'", "'-'", "'*'", "'^'", "end of input"]));
    }
    Ok(ast)
}
