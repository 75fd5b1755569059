//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 't' | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus (`-x^2` is `-(x^2)`) and is right
//! associative. Exponents must be constant. There is no implicit
//! multiplication.

use std::f64::consts::{E, PI};

use thiserror::Error;

use super::lexer::{tokenize, Token, TokenKind};
use super::{BinOp, Expr, Func, Var};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("at position {pos}: {kind}")]
pub struct ParseError {
    /// Byte offset into the source text.
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("malformed number '{0}'")]
    BadNumber(String),
    #[error("unexpected {0}")]
    UnexpectedToken(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("function '{name}' takes 1 argument, got {got}")]
    Arity { name: String, got: usize },
    #[error("function '{0}' must be called with parentheses")]
    MissingCall(String),
    #[error("exponent must be a constant expression")]
    NonConstantExponent,
    #[error("exponent does not evaluate to a finite number")]
    InvalidExponent,
}

/// Parses infix text into an expression tree.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens: &tokens,
        cursor: 0,
        end: src.len(),
    };
    let expr = p.expr()?;
    match p.peek() {
        None => Ok(expr),
        Some(tok) => Err(p.unexpected(tok)),
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    cursor: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.cursor)
    }

    fn next(&mut self) -> Result<&'a Token, ParseError> {
        let tok = self.tokens.get(self.cursor).ok_or(ParseError {
            pos: self.end,
            kind: ParseErrorKind::UnexpectedEnd,
        })?;
        self.cursor += 1;
        Ok(tok)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.cursor += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, tok: &Token) -> ParseError {
        ParseError {
            pos: tok.pos,
            kind: ParseErrorKind::UnexpectedToken(describe(&tok.kind)),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), ParseError> {
        let tok = self.next()?;
        if tok.kind == kind {
            Ok(())
        } else {
            Err(self.unexpected(tok))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(&TokenKind::Plus) {
                BinOp::Add
            } else if self.eat(&TokenKind::Minus) {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(&TokenKind::Star) {
                BinOp::Mul
            } else if self.eat(&TokenKind::Slash) {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&TokenKind::Minus) {
            Ok(Expr::neg(self.unary()?))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        let Some(caret) = self.peek().filter(|t| t.kind == TokenKind::Caret) else {
            return Ok(base);
        };
        self.cursor += 1;
        let exponent = self.unary()?;
        if exponent.depends_on(Var::T) || exponent.depends_on(Var::X) {
            return Err(ParseError {
                pos: caret.pos,
                kind: ParseErrorKind::NonConstantExponent,
            });
        }
        let value = exponent.eval(0.0, 0.0).map_err(|_| ParseError {
            pos: caret.pos,
            kind: ParseErrorKind::InvalidExponent,
        })?;
        Ok(Expr::pow(base, value))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let tok = self.next()?;
        match &tok.kind {
            TokenKind::Number(v) => Ok(Expr::Const(*v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::Ident(name) => self.identifier(name, tok.pos),
            _ => Err(self.unexpected(tok)),
        }
    }

    fn identifier(&mut self, name: &str, pos: usize) -> Result<Expr, ParseError> {
        match name {
            "t" => return Ok(Expr::Var(Var::T)),
            "x" => return Ok(Expr::Var(Var::X)),
            "pi" => return Ok(Expr::Const(PI)),
            "e" => return Ok(Expr::Const(E)),
            _ => {}
        }
        let Some(func) = Func::from_name(name) else {
            return Err(ParseError {
                pos,
                kind: ParseErrorKind::UnknownIdentifier(name.to_string()),
            });
        };
        if !self.eat(&TokenKind::LParen) {
            return Err(ParseError {
                pos,
                kind: ParseErrorKind::MissingCall(name.to_string()),
            });
        }
        let mut args = vec![self.expr()?];
        while self.eat(&TokenKind::Comma) {
            args.push(self.expr()?);
        }
        self.expect(TokenKind::RParen)?;
        if args.len() != 1 {
            return Err(ParseError {
                pos,
                kind: ParseErrorKind::Arity {
                    name: name.to_string(),
                    got: args.len(),
                },
            });
        }
        Ok(Expr::call(func, args.pop().expect("one argument")))
    }
}

fn describe(kind: &TokenKind) -> String {
    match kind {
        TokenKind::Number(v) => format!("number {v}"),
        TokenKind::Ident(s) => format!("identifier '{s}'"),
        TokenKind::Plus => "'+'".into(),
        TokenKind::Minus => "'-'".into(),
        TokenKind::Star => "'*'".into(),
        TokenKind::Slash => "'/'".into(),
        TokenKind::Caret => "'^'".into(),
        TokenKind::LParen => "'('".into(),
        TokenKind::RParen => "')'".into(),
        TokenKind::Comma => "','".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(src: &str) -> ParseErrorKind {
        parse(src).unwrap_err().kind
    }

    #[test]
    fn reads_sum_with_call() {
        let expected = Expr::binary(
            BinOp::Add,
            Expr::Var(Var::T),
            Expr::call(Func::Sin, Expr::Var(Var::X)),
        );
        assert_eq!(parse("t + sin(x)").unwrap(), expected);
    }

    #[test]
    fn reads_f1() {
        let num = Expr::binary(
            BinOp::Add,
            Expr::Var(Var::T),
            Expr::call(Func::Sin, Expr::Var(Var::X)),
        );
        let den = Expr::binary(
            BinOp::Add,
            Expr::binary(
                BinOp::Mul,
                Expr::Const(2.0),
                Expr::pow(Expr::Var(Var::X), 2.0),
            ),
            Expr::Const(4.0),
        );
        assert_eq!(
            parse("(t + sin(x)) / (2*x^2 + 4)").unwrap(),
            Expr::binary(BinOp::Div, num, den)
        );
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("-x^2").unwrap().eval(0.0, 3.0).unwrap(), -9.0);
        assert_eq!(parse("2^3^2").unwrap().eval(0.0, 0.0).unwrap(), 512.0);
        assert_eq!(parse("2^-1").unwrap().eval(0.0, 0.0).unwrap(), 0.5);
        assert_eq!(parse("1 - 2 - 3").unwrap().eval(0.0, 0.0).unwrap(), -4.0);
        assert_eq!(parse("8 / 4 / 2").unwrap().eval(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(parse("-2 * -3").unwrap().eval(0.0, 0.0).unwrap(), 6.0);
        assert_eq!(parse("x^(1/2)").unwrap().eval(0.0, 4.0).unwrap(), 2.0);
    }

    #[test]
    fn syntax_errors() {
        let err = parse("x e").unwrap_err();
        assert_eq!(err.pos, 2);
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedToken(_)));

        let err = parse("x +").unwrap_err();
        assert_eq!(
            err,
            ParseError {
                pos: 3,
                kind: ParseErrorKind::UnexpectedEnd
            }
        );

        assert_eq!(kind("y + 1"), ParseErrorKind::UnknownIdentifier("y".into()));
        assert_eq!(
            kind("sin(x, t)"),
            ParseErrorKind::Arity {
                name: "sin".into(),
                got: 2
            }
        );
        assert_eq!(kind("sin x"), ParseErrorKind::MissingCall("sin".into()));
        assert_eq!(kind("x^t"), ParseErrorKind::NonConstantExponent);
        assert_eq!(kind("x^(1/0)"), ParseErrorKind::InvalidExponent);
        assert!(matches!(kind("(x + 1"), ParseErrorKind::UnexpectedEnd));
        assert!(matches!(kind("2 (x)"), ParseErrorKind::UnexpectedToken(_)));
        assert!(matches!(kind("+x"), ParseErrorKind::UnexpectedToken(_)));
        assert!(matches!(kind(""), ParseErrorKind::UnexpectedEnd));
    }
}
