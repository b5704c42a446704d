//! Recursive-descent parser.
//!
//! Grammar (see `docs/grammar.ebnf` for the published form):
//!
//! ```text
//! expr   := term  (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" unary)?          (right-associative)
//! atom   := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! `^` binds tighter than unary minus on its left (`-u^2` is `-(u^2)`), and
//! the exponent position accepts a leading sign (`u^-2`).

use super::ast::{BinOp, Expr, Func};
use super::token::{Token, TokenKind};
use super::ExprError;

struct Parser<'a> {
    tokens: &'a [Token],
    declared: &'a [String],
    cursor: usize,
}

/// Parses a token stream into an expression tree. Every identifier that is
/// not a function call must appear in `declared`.
pub fn parse(tokens: &[Token], declared: &[String]) -> Result<Expr, ExprError> {
    let mut p = Parser {
        tokens,
        declared,
        cursor: 0,
    };
    let expr = p.expr()?;
    if let Some(tok) = p.peek() {
        return Err(ExprError::TrailingTokens {
            lexeme: tok.lexeme.clone(),
            pos: tok.pos,
        });
    }
    Ok(expr)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.cursor)
    }

    fn advance(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.cursor);
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn peek_op(&self, ops: &[&str]) -> Option<&'a Token> {
        let t = self.peek()?;
        if t.kind == TokenKind::Op && ops.contains(&t.lexeme.as_str()) {
            Some(t)
        } else {
            None
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(tok) = self.peek_op(&["+", "-"]) {
            let op = if tok.lexeme == "+" { BinOp::Add } else { BinOp::Sub };
            let pos = tok.pos;
            self.cursor += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(tok) = self.peek_op(&["*", "/"]) {
            let op = if tok.lexeme == "*" { BinOp::Mul } else { BinOp::Div };
            let pos = tok.pos;
            self.cursor += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek_op(&["-"]).is_some() {
            self.cursor += 1;
            let inner = self.unary()?;
            // fold a literal sign into the constant so `u^-2` stays an
            // integer-exponent power
            if let Expr::Const(c) = inner {
                return Ok(Expr::Const(-c));
            }
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if let Some(tok) = self.peek_op(&["^"]) {
            let pos = tok.pos;
            self.cursor += 1;
            let exp = self.unary()?;
            if let Expr::Const(c) = exp {
                if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
                    return Ok(Expr::PowInt {
                        base: Box::new(base),
                        exp: c as i32,
                        pos,
                    });
                }
            }
            return Ok(Expr::Binary {
                op: BinOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exp),
                pos,
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let tok = self.advance().ok_or(ExprError::UnexpectedEnd)?;
        match tok.kind {
            TokenKind::Number => {
                let value: f64 = tok.lexeme.parse().map_err(|_| ExprError::BadNumber {
                    lexeme: tok.lexeme.clone(),
                    pos: tok.pos,
                })?;
                Ok(Expr::Const(value))
            }
            TokenKind::Ident => {
                if matches!(self.peek(), Some(t) if t.kind == TokenKind::LParen) {
                    return self.call(tok);
                }
                if !self.declared.iter().any(|d| d == &tok.lexeme) {
                    return Err(ExprError::UndeclaredIdentifier {
                        name: tok.lexeme.clone(),
                        pos: tok.pos,
                    });
                }
                Ok(Expr::Var(tok.lexeme.clone()))
            }
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen(tok.pos)?;
                Ok(inner)
            }
            _ => Err(ExprError::UnexpectedToken {
                lexeme: tok.lexeme.clone(),
                pos: tok.pos,
            }),
        }
    }

    fn call(&mut self, name_tok: &Token) -> Result<Expr, ExprError> {
        let func = Func::from_name(&name_tok.lexeme).ok_or(ExprError::UnknownFunction {
            name: name_tok.lexeme.clone(),
            pos: name_tok.pos,
        })?;
        let lparen = self.advance().expect("peeked LParen");
        let mut args = vec![self.expr()?];
        while matches!(self.peek(), Some(t) if t.kind == TokenKind::Comma) {
            self.cursor += 1;
            args.push(self.expr()?);
        }
        self.expect_rparen(lparen.pos)?;
        if args.len() != func.arity() {
            return Err(ExprError::WrongArity {
                func: func.name(),
                expected: func.arity(),
                got: args.len(),
                pos: name_tok.pos,
            });
        }
        Ok(Expr::Call {
            func,
            args,
            pos: name_tok.pos,
        })
    }

    fn expect_rparen(&mut self, open_pos: usize) -> Result<(), ExprError> {
        match self.advance() {
            Some(t) if t.kind == TokenKind::RParen => Ok(()),
            Some(t) => Err(ExprError::UnbalancedParen {
                open_pos,
                found: Some(t.lexeme.clone()),
                pos: t.pos,
            }),
            None => Err(ExprError::UnbalancedParen {
                open_pos,
                found: None,
                pos: open_pos,
            }),
        }
    }
}
