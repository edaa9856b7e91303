//! Text front end for phase-space polynomials and operator polynomials.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := base ('^' uint)?
//! base   := var | const | '(' expr ')' | '-' factor
//! ```
//!
//! Variables are `q p` (commutative) or `Q P a ad` (operators), each with an
//! optional 1-based mode index (`q2`, `ad3`); an unindexed name is mode 1.
//! Constants are `i`, `hbar`, `sqrt_half_hbar`, `inv_hbar` and unsigned
//! numbers written `12`, `0.25` or `3/4`, all read exactly.

mod lexer;
mod parser;
mod render;

use std::fmt;

use thiserror::Error;

pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_ast, Constant, ExprAst, Symbol, MAX_EXPONENT};
pub use render::{render_coeff, render_operator, render_phase};

use crate::opcore::{Generator, OpError, OperatorPoly};
use crate::phasespace::{PhasePoly, PhaseVar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax { found: String },
    ExponentOverflow { max: u32 },
    ZeroDenominator,
    UnknownIdentifier(String),
    /// Phase variables and operators in one expression, or two operator
    /// families on one mode.
    MixedKinds(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax { found } => write!(f, "unexpected {found}"),
            ParseErrorKind::ExponentOverflow { max } => write!(f, "exponent larger than {max}"),
            ParseErrorKind::ZeroDenominator => write!(f, "zero denominator"),
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier '{name}'"),
            ParseErrorKind::MixedKinds(msg) => write!(f, "mode error: {msg}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: {kind}; expected {}", expected.join(" or "))]
pub struct ParseError {
    /// Byte offset into the input.
    pub offset: usize,
    pub kind: ParseErrorKind,
    pub expected: Vec<&'static str>,
}

impl ParseError {
    pub fn new(offset: usize, kind: ParseErrorKind, expected: Vec<&'static str>) -> Self {
        ParseError { offset, kind, expected }
    }
}

/// Result of [`parse_expr`]: which polynomial kind the text described.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedExpr {
    Phase(PhasePoly),
    Operator(OperatorPoly),
}

fn mixed(pos: usize, msg: &str) -> ParseError {
    ParseError::new(pos, ParseErrorKind::MixedKinds(msg.to_string()), vec!["q", "p"])
}

fn phase_from_ast(ast: &ExprAst) -> Result<PhasePoly, ParseError> {
    Ok(match ast {
        ExprAst::Add(a, b) => &phase_from_ast(a)? + &phase_from_ast(b)?,
        ExprAst::Sub(a, b) => &phase_from_ast(a)? - &phase_from_ast(b)?,
        ExprAst::Mul(a, b) => &phase_from_ast(a)? * &phase_from_ast(b)?,
        ExprAst::Pow(a, e) => phase_from_ast(a)?.pow(*e),
        ExprAst::Neg(a) => -&phase_from_ast(a)?,
        ExprAst::Const(c) => PhasePoly::constant(c.to_coeff()),
        ExprAst::Var { symbol, pos } => match *symbol {
            Symbol::Phase { mode, coord } => PhasePoly::var(PhaseVar { mode, coord }),
            Symbol::Operator { .. } => {
                return Err(mixed(*pos, "operator in a phase-space expression"));
            }
        },
    })
}

fn operator_from_ast(ast: &ExprAst) -> Result<OperatorPoly, ParseError> {
    let kind_err = |e: OpError| match e {
        OpError::KindMismatch { mode } => {
            let pos = first_pos_of_mode(ast, mode);
            ParseError::new(
                pos,
                ParseErrorKind::MixedKinds(format!(
                    "mode {} mixes (Q, P) with (a, ad)",
                    mode + 1
                )),
                vec!["Q", "P"],
            )
        }
        other => unreachable!("operator product only fails on kind mismatch: {other}"),
    };
    Ok(match ast {
        ExprAst::Add(a, b) | ExprAst::Sub(a, b) => {
            let (x, y) = (operator_from_ast(a)?, operator_from_ast(b)?);
            let sum = if matches!(ast, ExprAst::Add(..)) { &x + &y } else { &x - &y };
            sum.families().map_err(kind_err)?;
            sum
        }
        ExprAst::Mul(a, b) => operator_from_ast(a)?
            .multiply(&operator_from_ast(b)?)
            .map_err(kind_err)?,
        ExprAst::Pow(a, e) => operator_from_ast(a)?.pow(*e).map_err(kind_err)?,
        ExprAst::Neg(a) => -&operator_from_ast(a)?,
        ExprAst::Const(c) => OperatorPoly::constant(c.to_coeff()),
        ExprAst::Var { symbol, pos } => match *symbol {
            Symbol::Operator { mode, kind } => {
                OperatorPoly::word(crate::opcore::OperatorWord::from_letters([Generator::new(mode, kind)]))
            }
            Symbol::Phase { .. } => {
                return Err(mixed(*pos, "phase-space variable in an operator expression"));
            }
        },
    })
}

fn first_pos_of_mode(ast: &ExprAst, mode: u32) -> usize {
    ast.symbols()
        .into_iter()
        .find(|(s, _)| matches!(s, Symbol::Operator { mode: m, .. } if *m == mode))
        .map(|(_, p)| p)
        .unwrap_or(0)
}

/// Parses a commutative polynomial in `q`, `p` variables.
pub fn parse_phase_expr(text: &str) -> Result<PhasePoly, ParseError> {
    phase_from_ast(&parse_ast(text)?)
}

/// Parses a noncommutative operator polynomial; factor order is preserved.
pub fn parse_operator_expr(text: &str) -> Result<OperatorPoly, ParseError> {
    operator_from_ast(&parse_ast(text)?)
}

/// Parses either kind, decided by the variables present. Expressions without
/// variables are phase-space constants.
pub fn parse_expr(text: &str) -> Result<ParsedExpr, ParseError> {
    let ast = parse_ast(text)?;
    let symbols = ast.symbols();
    match symbols.first() {
        Some((Symbol::Operator { .. }, _)) => {
            if let Some((_, pos)) = symbols.iter().find(|(s, _)| matches!(s, Symbol::Phase { .. })) {
                return Err(mixed(*pos, "cannot mix q, p with Q, P, a, ad"));
            }
            Ok(ParsedExpr::Operator(operator_from_ast(&ast)?))
        }
        _ => {
            if let Some((_, pos)) = symbols.iter().find(|(s, _)| matches!(s, Symbol::Operator { .. })) {
                return Err(mixed(*pos, "cannot mix q, p with Q, P, a, ad"));
            }
            Ok(ParsedExpr::Phase(phase_from_ast(&ast)?))
        }
    }
}
