//! Forward-mode dual numbers and the scalar abstraction shared by the
//! plain and differentiating evaluators.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// A value together with its derivative with respect to one seed variable.
///
/// Arithmetic follows the dual-number rules, e.g.
/// `(a, a') * (b, b') = (a*b, a*b' + a'*b)`. The value component of every
/// operation is computed by exactly the same `f64` arithmetic as a plain
/// evaluation, so `eval_dual(..).value` is bit-identical to `eval(..)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    /// A constant: derivative zero.
    pub fn constant(value: f64) -> Self {
        Dual { value, deriv: 0.0 }
    }

    /// The seed variable itself: derivative one.
    pub fn seed(value: f64) -> Self {
        Dual { value, deriv: 1.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            value: self.value + o.value,
            deriv: self.deriv + o.deriv,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            value: self.value - o.value,
            deriv: self.deriv - o.deriv,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            value: self.value * o.value,
            deriv: self.value * o.deriv + self.deriv * o.value,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual {
            value: self.value / o.value,
            deriv: (self.deriv * o.value - self.value * o.deriv) / (o.value * o.value),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            value: -self.value,
            deriv: -self.deriv,
        }
    }
}

/// Operations every evaluation scalar must support. Implemented for `f64`
/// (plain evaluation) and [`Dual`] (forward-mode differentiation). Domain
/// checking is the evaluator's job; these operations are total and follow
/// IEEE semantics outside their domains.
pub trait Scalar: Copy {
    fn from_const(c: f64) -> Self;
    /// A variable read. `is_seed` is true exactly when the variable is the
    /// one being differentiated against; `f64` ignores it.
    fn load(value: f64, is_seed: bool) -> Self;
    /// The plain value component, used for domain checks and branching.
    fn value(self) -> f64;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    fn neg(self) -> Self;
    fn powf(self, e: Self) -> Self;
    fn exp(self) -> Self;
    fn log(self) -> Self;
    fn tanh(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn min(self, o: Self) -> Self;
    fn max(self, o: Self) -> Self;
}

impl Scalar for f64 {
    fn from_const(c: f64) -> Self {
        c
    }
    fn load(value: f64, _is_seed: bool) -> Self {
        value
    }
    fn value(self) -> f64 {
        self
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn neg(self) -> Self {
        -self
    }
    fn powf(self, e: Self) -> Self {
        self.powf(e)
    }
    fn exp(self) -> Self {
        self.exp()
    }
    fn log(self) -> Self {
        self.ln()
    }
    fn tanh(self) -> Self {
        self.tanh()
    }
    fn sqrt(self) -> Self {
        self.sqrt()
    }
    fn abs(self) -> Self {
        self.abs()
    }
    // ties resolve to the first argument; mirrored by the Dual impl
    fn min(self, o: Self) -> Self {
        if self <= o {
            self
        } else {
            o
        }
    }
    fn max(self, o: Self) -> Self {
        if self >= o {
            self
        } else {
            o
        }
    }
}

impl Scalar for Dual {
    fn from_const(c: f64) -> Self {
        Dual::constant(c)
    }
    fn load(value: f64, is_seed: bool) -> Self {
        Dual {
            value,
            deriv: if is_seed { 1.0 } else { 0.0 },
        }
    }
    fn value(self) -> f64 {
        self.value
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn neg(self) -> Self {
        -self
    }
    fn powf(self, e: Self) -> Self {
        let value = self.value.powf(e.value);
        // split the two chain-rule terms so that a zero tangent on either
        // side never drags ln(0) or 0^(negative) into the derivative
        let mut deriv = 0.0;
        if self.deriv != 0.0 {
            deriv += e.value * self.value.powf(e.value - 1.0) * self.deriv;
        }
        if e.deriv != 0.0 {
            deriv += value * self.value.ln() * e.deriv;
        }
        Dual { value, deriv }
    }
    fn exp(self) -> Self {
        let value = self.value.exp();
        Dual {
            value,
            deriv: value * self.deriv,
        }
    }
    fn log(self) -> Self {
        Dual {
            value: self.value.ln(),
            deriv: self.deriv / self.value,
        }
    }
    fn tanh(self) -> Self {
        let value = self.value.tanh();
        Dual {
            value,
            deriv: (1.0 - value * value) * self.deriv,
        }
    }
    fn sqrt(self) -> Self {
        let value = self.value.sqrt();
        let deriv = if self.deriv == 0.0 {
            0.0
        } else {
            self.deriv / (2.0 * value)
        };
        Dual { value, deriv }
    }
    // right-hand subgradient at the kink: abs'(0) = 1
    fn abs(self) -> Self {
        if self.value >= 0.0 {
            Dual {
                value: self.value,
                deriv: self.deriv,
            }
        } else {
            Dual {
                value: -self.value,
                deriv: -self.deriv,
            }
        }
    }
    fn min(self, o: Self) -> Self {
        if self.value <= o.value {
            self
        } else {
            o
        }
    }
    fn max(self, o: Self) -> Self {
        if self.value >= o.value {
            self
        } else {
            o
        }
    }
}
