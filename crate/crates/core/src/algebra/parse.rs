//! Operator-expression parser.
//!
//! Grammar (whitespace ignored, positions are byte offsets):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary | power)*    juxtaposition multiplies: `2i X`, `3(a + ad)`
//! unary   := ('+' | '-') unary | power
//! power   := atom ('^' INTEGER)?
//! atom    := NUMBER | 'a' | 'ad' | 'X' | 'P' | 'i' | '(' expr ')'
//! ```
//!
//! `a` is the annihilation operator, `ad` the creation operator,
//! `X = (ad + a)/sqrt(2)`, `P = i(ad - a)/sqrt(2)` and `i` the imaginary unit.
//! Numbers accept decimal and exponent notation (`0.5`, `1e-3`).

use num_complex::Complex;

use crate::algebra::LadderPolynomial;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn err(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match ch {
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Star,
            '^' => Token::Caret,
            '(' => Token::LParen,
            ')' => Token::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent part, only when followed by a digit or sign+digit
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value = text
                    .parse::<f64>()
                    .map_err(|_| err(start, format!("malformed number `{text}`")))?;
                out.push((start, Token::Number(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
                continue;
            }
            other => return Err(err(start, format!("unexpected character `{other}`"))),
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a, T> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    end: usize,
    _scalar: std::marker::PhantomData<T>,
}

impl<'a, T: Real> Parser<'a, T> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<LadderPolynomial<T>> {
        let mut acc = self.term()?;
        while let Some(tok) = self.peek() {
            match tok {
                Token::Plus => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Token::Minus => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn starts_factor(tok: &Token) -> bool {
        matches!(tok, Token::Number(_) | Token::Ident(_) | Token::LParen)
    }

    fn term(&mut self) -> Result<LadderPolynomial<T>> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    acc = acc.product(&self.unary()?)?;
                }
                Some(tok) if Self::starts_factor(tok) => {
                    acc = acc.product(&self.power()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<LadderPolynomial<T>> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<LadderPolynomial<T>> {
        let base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.pos += 1;
            let at = self.offset();
            match self.peek() {
                Some(Token::Number(v)) if v.fract() == 0.0 && *v >= 0.0 && *v <= 64.0 => {
                    let e = *v as u32;
                    self.pos += 1;
                    return base.powi(e);
                }
                _ => return Err(err(at, "exponent must be a non-negative integer ≤ 64")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<LadderPolynomial<T>> {
        let at = self.offset();
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| err(at, "unexpected end of expression"))?;
        self.pos += 1;
        match tok {
            Token::Number(v) => Ok(LadderPolynomial::scalar(Complex::new(T::lit(v), T::zero()))),
            Token::Ident(name) => match name.as_str() {
                "a" => Ok(LadderPolynomial::annihilation()),
                "ad" => Ok(LadderPolynomial::creation()),
                "X" => Ok(LadderPolynomial::position()),
                "P" => Ok(LadderPolynomial::momentum()),
                "i" => Ok(LadderPolynomial::scalar(Complex::i())),
                other => Err(err(at, format!("unknown symbol `{other}`"))),
            },
            Token::LParen => {
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(err(self.offset(), "expected `)`")),
                }
            }
            other => Err(err(at, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses an operator expression such as `X^2 - P^2` or `ad^2 + a^2`.
pub fn parse_operator<T: Real>(src: &str) -> Result<LadderPolynomial<T>> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(err(0, "empty expression"));
    }
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end: src.len(),
        _scalar: std::marker::PhantomData,
    };
    let poly = parser.expr()?;
    if parser.pos != tokens.len() {
        return Err(err(parser.offset(), "trailing input"));
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Poly = LadderPolynomial<f64>;

    fn p(src: &str) -> Poly {
        parse_operator(src).unwrap()
    }

    #[test]
    fn quadrature_literals() {
        assert_eq!(p("X"), Poly::position());
        assert_eq!(p("P"), Poly::momentum());
    }

    #[test]
    fn squeeze_generator_two_spellings() {
        let a = p("ad^2 + a^2");
        let b = p("X^2 - P^2");
        assert!(a.approx_eq(&b, 1e-12), "{a} vs {b}");
    }

    #[test]
    fn implicit_multiplication_and_unary_minus() {
        let two_i_x = Poly::position().scale(Complex::new(0.0, 2.0));
        assert!(p("2i X").approx_eq(&two_i_x, 1e-12));
        assert!(p("2*i*X").approx_eq(&two_i_x, 1e-12));
        assert!(p("-X^2").approx_eq(&-p("X*X"), 1e-12));
        assert!(p("1e-1 X").approx_eq(&Poly::position().scale_real(0.1), 1e-15));
    }

    #[test]
    fn number_operator() {
        assert_eq!(p("ad a"), Poly::number());
        assert!(p("a ad").approx_eq(&(&Poly::number() + &Poly::identity()), 0.0));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_operator::<f64>("X + Q") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        match parse_operator::<f64>("(X + P") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 6),
            other => panic!("{other:?}"),
        }
        match parse_operator::<f64>("X^1.5") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
        match parse_operator::<f64>("X $ P") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_operator::<f64>("").is_err());
        assert!(parse_operator::<f64>("X )").is_err());
    }

    #[test]
    fn display_parses_back() {
        let orig = p("0.3 ad^2 a - 2i X + 1.25");
        let back = p(&orig.to_string());
        assert!(orig.approx_eq(&back, 1e-12), "{orig} -> {back}");
    }
}
