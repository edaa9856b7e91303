use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{ParseError, ParseErrorKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    /// Unsigned literal; `integral` is false for `1.5` and `1/2` forms.
    Number { value: BigRational, integral: bool },
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Byte offset of the first character.
    pub pos: usize,
}

impl Token {
    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::End => "end of input".to_string(),
            _ => format!("'{}'", self.lexeme),
        }
    }
}

fn digits_end(bytes: &[u8], start: usize) -> usize {
    let mut i = start;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    i
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match c {
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'^' => Some(TokenKind::Caret),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = single {
            i += 1;
            out.push(Token { kind, lexeme: text[start..i].to_string(), pos: start });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { kind: TokenKind::Ident, lexeme: text[start..i].to_string(), pos: start });
            continue;
        }
        if c.is_ascii_digit() {
            i = digits_end(bytes, i);
            let whole: BigInt = text[start..i].parse().expect("ascii digits");
            let (value, integral) = match bytes.get(i) {
                Some(b'.') => {
                    let frac_start = i + 1;
                    let frac_end = digits_end(bytes, frac_start);
                    if frac_end == frac_start {
                        return Err(ParseError::new(
                            frac_start,
                            ParseErrorKind::Syntax { found: found_at(text, frac_start) },
                            vec!["digit"],
                        ));
                    }
                    i = frac_end;
                    let scale = num_traits::pow(BigInt::from(10), frac_end - frac_start);
                    let frac: BigInt = text[frac_start..frac_end].parse().expect("ascii digits");
                    (BigRational::new(whole * &scale + frac, scale), false)
                }
                Some(b'/') => {
                    let den_start = i + 1;
                    let den_end = digits_end(bytes, den_start);
                    if den_end == den_start {
                        return Err(ParseError::new(
                            den_start,
                            ParseErrorKind::Syntax { found: found_at(text, den_start) },
                            vec!["digit"],
                        ));
                    }
                    let den: BigInt = text[den_start..den_end].parse().expect("ascii digits");
                    if den.is_zero() {
                        return Err(ParseError::new(den_start, ParseErrorKind::ZeroDenominator, vec!["nonzero denominator"]));
                    }
                    i = den_end;
                    (BigRational::new(whole, den), false)
                }
                _ => (BigRational::from_integer(whole), true),
            };
            out.push(Token {
                kind: TokenKind::Number { value, integral },
                lexeme: text[start..i].to_string(),
                pos: start,
            });
            continue;
        }
        return Err(ParseError::new(
            start,
            ParseErrorKind::Syntax { found: found_at(text, start) },
            vec!["variable", "number", "constant", "'('", "operator"],
        ));
    }
    out.push(Token { kind: TokenKind::End, lexeme: String::new(), pos: text.len() });
    Ok(out)
}

fn found_at(text: &str, pos: usize) -> String {
    match text[pos..].chars().next() {
        Some(c) => format!("'{c}'"),
        None => "end of input".to_string(),
    }
}
