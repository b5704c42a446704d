//! Expression DSL for model right-hand sides.
//!
//! Models are data: each equation is a closed-form expression over declared
//! state variables, fixed parameters, and the bifurcation parameter. This
//! module lexes and parses that text, evaluates it in IEEE double precision,
//! and differentiates it exactly with forward-mode dual numbers (one seed
//! variable per pass).
//!
//! Everything here is immutable after construction and evaluation is pure,
//! so values can be shared and evaluated from any number of threads.

mod ast;
mod compile;
mod dual;
mod parser;
mod token;

pub use ast::{BinOp, Expr, Func};
pub use compile::CompiledExpr;
pub use dual::{Dual, Scalar};
pub use parser::parse;
pub use token::{tokenize, Token, TokenKind};

use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("unexpected character '{character}' at byte {pos}")]
    Lex { character: char, pos: usize },
    #[error("malformed number '{lexeme}' at byte {pos}")]
    BadNumber { lexeme: String, pos: usize },
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("unexpected token '{lexeme}' at byte {pos}")]
    UnexpectedToken { lexeme: String, pos: usize },
    #[error("trailing input starting with '{lexeme}' at byte {pos}")]
    TrailingTokens { lexeme: String, pos: usize },
    #[error("unbalanced parenthesis opened at byte {open_pos}")]
    UnbalancedParen {
        open_pos: usize,
        found: Option<String>,
        pos: usize,
    },
    #[error("undeclared identifier '{name}' at byte {pos}")]
    UndeclaredIdentifier { name: String, pos: usize },
    #[error("unknown function '{name}' at byte {pos}")]
    UnknownFunction { name: String, pos: usize },
    #[error("{func} takes {expected} argument(s), got {got} (at byte {pos})")]
    WrongArity {
        func: &'static str,
        expected: usize,
        got: usize,
        pos: usize,
    },
    #[error("expression nests deeper than supported ({depth} stack slots)")]
    ExpressionTooDeep { depth: usize },
    #[error("no binding supplied for variable '{name}'")]
    UnboundVariable { name: String },
    #[error("division by zero (operator at byte {pos})")]
    DivisionByZero { pos: usize },
    #[error("log of non-positive value {operand} (at byte {pos})")]
    LogDomain { operand: f64, pos: usize },
    #[error("sqrt of negative value {operand} (at byte {pos})")]
    SqrtDomain { operand: f64, pos: usize },
    #[error("negative base {base} raised to non-integer exponent {exponent} (at byte {pos})")]
    PowDomain {
        base: f64,
        exponent: f64,
        pos: usize,
    },
}

/// Tokenizes and parses in one step.
pub fn parse_source(source: &str, declared: &[String]) -> Result<Expr, ExprError> {
    parse(&tokenize(source)?, declared)
}

fn bind(bindings: &BTreeMap<String, f64>) -> (Vec<String>, Vec<f64>) {
    let names: Vec<String> = bindings.keys().cloned().collect();
    let values: Vec<f64> = bindings.values().copied().collect();
    (names, values)
}

/// Evaluates `ast` under `bindings`. Every variable in the tree must be
/// bound. Domain violations (division by zero, log of a non-positive value,
/// sqrt of a negative) report the offending operator's source position.
pub fn eval(ast: &Expr, bindings: &BTreeMap<String, f64>) -> Result<f64, ExprError> {
    let (names, values) = bind(bindings);
    CompiledExpr::compile(ast, &names)?.eval(&values)
}

/// Evaluates `ast` and its exact partial derivative with respect to `seed`.
/// The value component is bit-identical to [`eval`] on the same inputs.
pub fn eval_dual(ast: &Expr, bindings: &BTreeMap<String, f64>, seed: &str) -> Result<Dual, ExprError> {
    let (names, values) = bind(bindings);
    let seed_slot = names
        .iter()
        .position(|n| n == seed)
        .ok_or_else(|| ExprError::UnboundVariable {
            name: seed.to_string(),
        })?;
    CompiledExpr::compile(ast, &names)?.eval_dual(&values, seed_slot)
}

/// Partial derivatives with respect to each of `seeds`, one forward pass per
/// seed.
pub fn gradient(
    ast: &Expr,
    bindings: &BTreeMap<String, f64>,
    seeds: &[&str],
) -> Result<Vec<f64>, ExprError> {
    let (names, values) = bind(bindings);
    let compiled = CompiledExpr::compile(ast, &names)?;
    seeds
        .iter()
        .map(|seed| {
            let slot = names
                .iter()
                .position(|n| n == seed)
                .ok_or_else(|| ExprError::UnboundVariable {
                    name: seed.to_string(),
                })?;
            Ok(compiled.eval_dual(&values, slot)?.deriv)
        })
        .collect()
}

#[cfg(test)]
mod tests;
