//! Slot-compiled expression programs.
//!
//! The tree interpreter is fine for one-off evaluation, but the training
//! loop evaluates the same right-hand sides hundreds of millions of times.
//! `CompiledExpr` flattens a tree to postfix instructions with variables
//! resolved to slot indices, so the hot path does no name lookups and no
//! allocation.

use super::ast::{BinOp, Expr, Func};
use super::dual::{Dual, Scalar};
use super::ExprError;

const MAX_STACK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
enum Instr {
    Const(f64),
    Load(u32),
    Add,
    Sub,
    Mul,
    Div { pos: u32 },
    Neg,
    Pow { pos: u32 },
    PowInt { exp: i32, pos: u32 },
    Exp,
    Log { pos: u32 },
    Tanh,
    Sqrt { pos: u32 },
    Abs,
    Min,
    Max,
}

/// A compiled expression bound to a fixed slot layout.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    code: Vec<Instr>,
    n_slots: usize,
}

impl CompiledExpr {
    /// Compiles `expr` against `slots`, the ordered list of variable names
    /// the evaluator will supply. Every variable in the expression must
    /// appear in `slots`.
    pub fn compile(expr: &Expr, slots: &[String]) -> Result<CompiledExpr, ExprError> {
        let mut code = Vec::new();
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        emit(expr, slots, &mut code, &mut depth, &mut max_depth)?;
        if max_depth > MAX_STACK {
            return Err(ExprError::ExpressionTooDeep { depth: max_depth });
        }
        Ok(CompiledExpr {
            code,
            n_slots: slots.len(),
        })
    }

    /// Plain evaluation over slot values.
    pub fn eval(&self, slots: &[f64]) -> Result<f64, ExprError> {
        self.run::<f64>(slots, usize::MAX).map(|v| v.value())
    }

    /// Evaluation carrying the derivative with respect to the variable in
    /// `seed_slot`. The value component equals `eval` bit for bit.
    pub fn eval_dual(&self, slots: &[f64], seed_slot: usize) -> Result<Dual, ExprError> {
        self.run::<Dual>(slots, seed_slot)
    }

    fn run<S: Scalar>(&self, slots: &[f64], seed_slot: usize) -> Result<S, ExprError> {
        debug_assert_eq!(slots.len(), self.n_slots);
        let mut stack = [S::from_const(0.0); MAX_STACK];
        let mut sp = 0usize;
        macro_rules! pop {
            () => {{
                sp -= 1;
                stack[sp]
            }};
        }
        macro_rules! push {
            ($v:expr) => {{
                stack[sp] = $v;
                sp += 1;
            }};
        }
        for instr in &self.code {
            match *instr {
                Instr::Const(c) => push!(S::from_const(c)),
                Instr::Load(idx) => {
                    let idx = idx as usize;
                    push!(S::load(slots[idx], idx == seed_slot));
                }
                Instr::Add => {
                    let b = pop!();
                    let a = pop!();
                    push!(a.add(b));
                }
                Instr::Sub => {
                    let b = pop!();
                    let a = pop!();
                    push!(a.sub(b));
                }
                Instr::Mul => {
                    let b = pop!();
                    let a = pop!();
                    push!(a.mul(b));
                }
                Instr::Div { pos } => {
                    let b = pop!();
                    let a = pop!();
                    if b.value() == 0.0 {
                        return Err(ExprError::DivisionByZero { pos: pos as usize });
                    }
                    push!(a.div(b));
                }
                Instr::Neg => {
                    let a = pop!();
                    push!(a.neg());
                }
                Instr::Pow { pos } => {
                    let e = pop!();
                    let a = pop!();
                    if a.value() < 0.0 && e.value().fract() != 0.0 {
                        return Err(ExprError::PowDomain {
                            base: a.value(),
                            exponent: e.value(),
                            pos: pos as usize,
                        });
                    }
                    push!(a.powf(e));
                }
                Instr::PowInt { exp, pos } => {
                    let a = pop!();
                    if exp < 0 && a.value() == 0.0 {
                        return Err(ExprError::DivisionByZero { pos: pos as usize });
                    }
                    push!(powi(a, exp));
                }
                Instr::Exp => {
                    let a = pop!();
                    push!(a.exp());
                }
                Instr::Log { pos } => {
                    let a = pop!();
                    if a.value() <= 0.0 {
                        return Err(ExprError::LogDomain {
                            operand: a.value(),
                            pos: pos as usize,
                        });
                    }
                    push!(a.log());
                }
                Instr::Tanh => {
                    let a = pop!();
                    push!(a.tanh());
                }
                Instr::Sqrt { pos } => {
                    let a = pop!();
                    if a.value() < 0.0 {
                        return Err(ExprError::SqrtDomain {
                            operand: a.value(),
                            pos: pos as usize,
                        });
                    }
                    push!(a.sqrt());
                }
                Instr::Abs => {
                    let a = pop!();
                    push!(a.abs());
                }
                Instr::Min => {
                    let b = pop!();
                    let a = pop!();
                    push!(a.min(b));
                }
                Instr::Max => {
                    let b = pop!();
                    let a = pop!();
                    push!(a.max(b));
                }
            }
        }
        debug_assert_eq!(sp, 1);
        Ok(stack[0])
    }
}

/// Integer powers by repeated multiplication; negative exponents take the
/// reciprocal of the positive power. Shared by both scalar instantiations so
/// the value components agree exactly.
fn powi<S: Scalar>(x: S, n: i32) -> S {
    if n == 0 {
        return S::from_const(1.0);
    }
    let mut acc = x;
    for _ in 1..n.unsigned_abs() {
        acc = acc.mul(x);
    }
    if n < 0 {
        S::from_const(1.0).div(acc)
    } else {
        acc
    }
}

fn emit(
    expr: &Expr,
    slots: &[String],
    code: &mut Vec<Instr>,
    depth: &mut usize,
    max_depth: &mut usize,
) -> Result<(), ExprError> {
    match expr {
        Expr::Const(c) => {
            code.push(Instr::Const(*c));
            bump(depth, max_depth);
        }
        Expr::Var(name) => {
            let idx = slots
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| ExprError::UnboundVariable { name: name.clone() })?;
            code.push(Instr::Load(idx as u32));
            bump(depth, max_depth);
        }
        Expr::Neg(inner) => {
            emit(inner, slots, code, depth, max_depth)?;
            code.push(Instr::Neg);
        }
        Expr::Binary { op, lhs, rhs, pos } => {
            emit(lhs, slots, code, depth, max_depth)?;
            emit(rhs, slots, code, depth, max_depth)?;
            code.push(match op {
                BinOp::Add => Instr::Add,
                BinOp::Sub => Instr::Sub,
                BinOp::Mul => Instr::Mul,
                BinOp::Div => Instr::Div { pos: *pos as u32 },
                BinOp::Pow => Instr::Pow { pos: *pos as u32 },
            });
            *depth -= 1;
        }
        Expr::PowInt { base, exp, pos } => {
            emit(base, slots, code, depth, max_depth)?;
            code.push(Instr::PowInt {
                exp: *exp,
                pos: *pos as u32,
            });
        }
        Expr::Call { func, args, pos } => {
            for a in args {
                emit(a, slots, code, depth, max_depth)?;
            }
            code.push(match func {
                Func::Exp => Instr::Exp,
                Func::Log => Instr::Log { pos: *pos as u32 },
                Func::Tanh => Instr::Tanh,
                Func::Sqrt => Instr::Sqrt { pos: *pos as u32 },
                Func::Abs => Instr::Abs,
                Func::Min => Instr::Min,
                Func::Max => Instr::Max,
            });
            *depth -= args.len() - 1;
        }
    }
    Ok(())
}

fn bump(depth: &mut usize, max_depth: &mut usize) {
    *depth += 1;
    if *depth > *max_depth {
        *max_depth = *depth;
    }
}
