//! Expression tree and the canonical printer.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Built-in function set. Closed under dual-number differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Tanh,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "tanh" => Func::Tanh,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }
}

/// Parsed arithmetic expression.
///
/// Nodes that can fail at evaluation time (division, `log`, `sqrt`, powers)
/// carry the byte offset of their operator in the original source so runtime
/// errors can point back at it. Integer-constant exponents are folded into
/// `PowInt` at parse time and evaluated by repeated multiplication.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        pos: usize,
    },
    PowInt {
        base: Box<Expr>,
        exp: i32,
        pos: usize,
    },
    Call {
        func: Func,
        args: Vec<Expr>,
        pos: usize,
    },
}

impl Expr {
    /// All variable names referenced anywhere in the tree.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(inner) => inner.collect_variables(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.collect_variables(out);
                rhs.collect_variables(out);
            }
            Expr::PowInt { base, .. } => base.collect_variables(out),
            Expr::Call { args, .. } => {
                for a in args {
                    a.collect_variables(out);
                }
            }
        }
    }

    /// Canonical source form. Guaranteed to parse back to an expression that
    /// evaluates identically (round-trip property).
    pub fn to_source(&self) -> String {
        self.to_string()
    }

    // Precedence levels used by both the parser and the printer:
    // 1 add/sub, 2 mul/div, 3 unary minus, 4 power, 5 atoms.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op: BinOp::Add, .. } | Expr::Binary { op: BinOp::Sub, .. } => 1,
            Expr::Binary { op: BinOp::Mul, .. } | Expr::Binary { op: BinOp::Div, .. } => 2,
            Expr::Neg(_) => 3,
            Expr::Binary { op: BinOp::Pow, .. } | Expr::PowInt { .. } => 4,
            Expr::Const(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let prec = self.precedence();
        let parens = prec < min_prec;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(c) => write!(f, "{c}")?,
            Expr::Var(name) => write!(f, "{name}")?,
            Expr::Neg(inner) => {
                write!(f, "-")?;
                inner.fmt_at(f, 3)?;
            }
            Expr::Binary { op, lhs, rhs, .. } => {
                let (sym, left_min, right_min) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    // right-associative: a^b^c prints and reparses as a^(b^c)
                    BinOp::Pow => ("^", 5, 3),
                };
                lhs.fmt_at(f, left_min)?;
                write!(f, "{sym}")?;
                rhs.fmt_at(f, right_min)?;
            }
            Expr::PowInt { base, exp, .. } => {
                base.fmt_at(f, 5)?;
                write!(f, "^{exp}")?;
            }
            Expr::Call { func, args, .. } => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    a.fmt_at(f, 1)?;
                }
                write!(f, ")")?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}
