//! Scalar expressions of time with exact symbolic differentiation.
//!
//! The language covers literals, named parameters, the time variable `t`,
//! the constant `pi`, the binary operators `+ - * / ^` (with `^` binding
//! tightest and right-associative, then unary minus, then `* /`, then
//! `+ -`), and the functions `sin cos tan asin acos atan sinh cosh tanh
//! exp log sqrt abs`.
//!
//! Expressions are immutable trees: evaluation is pure, and
//! [`Expr::differentiate`] returns a new tree whose evaluation equals the
//! time derivative wherever both are defined. No simplification is
//! performed beyond folding of literal subtrees.

mod diff;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use parse::parse;

/// Parameter bindings used by [`Expr::eval`].
pub type Params = BTreeMap<String, f64>;

/// Builds a [`Params`] map from name/value pairs.
pub fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Unary functions supported by the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Asin,
    Acos,
    Atan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Asin => "asin",
            Func::Acos => "acos",
            Func::Atan => "atan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "asin" => Func::Asin,
            "acos" => Func::Acos,
            "atan" => Func::Atan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Expression tree. `pi` parses to `Num(std::f64::consts::PI)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Time,
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Error raised while parsing. Offsets are 1-based byte positions.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } => *offset,
            ParseError::UnknownFunction { offset, .. } => *offset,
        }
    }
}

/// Error raised when binding an expression to parameter values.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unbound parameter `{0}`")]
    Unbound(String),
}

/// Error raised while evaluating.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
    #[error("domain violation in {op}: {detail} (argument {arg})")]
    Domain {
        op: &'static str,
        detail: &'static str,
        arg: f64,
    },
}

impl Expr {
    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::Bin(BinOp::Pow, Box::new(self), Box::new(exponent))
    }

    pub fn call(f: Func, e: Expr) -> Expr {
        Expr::Call(f, Box::new(e))
    }

    /// Names of all parameters appearing in the tree.
    pub fn free_params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Time => {}
            Expr::Param(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_params(out),
            Expr::Bin(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    /// Evaluates at time `t` with the given parameter bindings.
    ///
    /// Domain violations (log of a non-positive value, square root of a
    /// negative value, division by zero, inverse trig outside [-1, 1],
    /// fractional powers of negatives) are reported as errors rather than
    /// propagated as NaN.
    pub fn eval(&self, t: f64, params: &Params) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Time => t,
            Expr::Param(name) => *params
                .get(name)
                .ok_or_else(|| EvalError::UnboundParam(name.clone()))?,
            Expr::Neg(e) => -e.eval(t, params)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval(t, params)?;
                let y = b.eval(t, params)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(EvalError::Domain {
                                op: "/",
                                detail: "division by zero",
                                arg: y,
                            });
                        }
                        x / y
                    }
                    BinOp::Pow => {
                        if x == 0.0 && y < 0.0 {
                            return Err(EvalError::Domain {
                                op: "^",
                                detail: "zero base with negative exponent",
                                arg: y,
                            });
                        }
                        if x < 0.0 && y.fract() != 0.0 {
                            return Err(EvalError::Domain {
                                op: "^",
                                detail: "negative base with fractional exponent",
                                arg: x,
                            });
                        }
                        x.powf(y)
                    }
                }
            }
            Expr::Call(f, e) => {
                let x = e.eval(t, params)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Asin => {
                        if !(-1.0..=1.0).contains(&x) {
                            return Err(EvalError::Domain {
                                op: "asin",
                                detail: "argument outside [-1, 1]",
                                arg: x,
                            });
                        }
                        x.asin()
                    }
                    Func::Acos => {
                        if !(-1.0..=1.0).contains(&x) {
                            return Err(EvalError::Domain {
                                op: "acos",
                                detail: "argument outside [-1, 1]",
                                arg: x,
                            });
                        }
                        x.acos()
                    }
                    Func::Atan => x.atan(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::Domain {
                                op: "log",
                                detail: "argument not positive",
                                arg: x,
                            });
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::Domain {
                                op: "sqrt",
                                detail: "argument negative",
                                arg: x,
                            });
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                }
            }
        };
        if v.is_nan() {
            return Err(EvalError::Domain {
                op: "arithmetic",
                detail: "result is NaN",
                arg: v,
            });
        }
        Ok(v)
    }

    /// Folds literal subtrees and applies a few neutral-element identities
    /// (`x+0`, `x*1`, `x*0`, `x/1`, `x^1`, `x^0`). Anything that cannot be
    /// evaluated without a domain error is left untouched.
    pub fn fold(self) -> Expr {
        fn lit(e: &Expr) -> Option<f64> {
            match e {
                Expr::Num(v) => Some(*v),
                _ => None,
            }
        }
        let folded = match self {
            Expr::Neg(e) => -e.fold(),
            Expr::Bin(op, a, b) => {
                let a = a.fold();
                let b = b.fold();
                let (la, lb) = (lit(&a), lit(&b));
                match op {
                    BinOp::Add => {
                        if la == Some(0.0) {
                            return b;
                        }
                        if lb == Some(0.0) {
                            return a;
                        }
                    }
                    BinOp::Sub => {
                        if lb == Some(0.0) {
                            return a;
                        }
                        if la == Some(0.0) {
                            return -b;
                        }
                    }
                    BinOp::Mul => {
                        if la == Some(0.0) || lb == Some(0.0) {
                            return Expr::Num(0.0);
                        }
                        if la == Some(1.0) {
                            return b;
                        }
                        if lb == Some(1.0) {
                            return a;
                        }
                    }
                    BinOp::Div => {
                        if lb == Some(1.0) {
                            return a;
                        }
                    }
                    BinOp::Pow => {
                        if lb == Some(1.0) {
                            return a;
                        }
                        if lb == Some(0.0) {
                            return Expr::Num(1.0);
                        }
                    }
                }
                Expr::Bin(op, Box::new(a), Box::new(b))
            }
            Expr::Call(f, e) => Expr::Call(f, Box::new(e.fold())),
            leaf => leaf,
        };
        if let Expr::Num(_) | Expr::Time | Expr::Param(_) = folded {
            return folded;
        }
        if folded.free_params().is_empty() && !folded.depends_on_time() {
            if let Ok(v) = folded.eval(0.0, &Params::new()) {
                if v.is_finite() {
                    return Expr::Num(v);
                }
            }
        }
        folded
    }

    fn depends_on_time(&self) -> bool {
        match self {
            Expr::Time => true,
            Expr::Num(_) | Expr::Param(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on_time(),
            Expr::Bin(_, a, b) => a.depends_on_time() || b.depends_on_time(),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Add, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Sub, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Mul, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Div, Box::new(self), Box::new(rhs))
    }
}

// Negating a literal folds immediately so that `-2` parses and prints as
// the same tree.
impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Num(v) => Expr::Num(-v),
            other => Expr::Neg(Box::new(other)),
        }
    }
}

// Precedence levels for printing: Add/Sub 1, Mul/Div 2, unary minus 3, Pow 4.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Num(v) if *v < 0.0 => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, e: &Expr, need: bool) -> fmt::Result {
            if need {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Time => write!(f, "t"),
            Expr::Param(name) => write!(f, "{name}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                paren(f, e, prec(e) < 3)
            }
            Expr::Bin(op, a, b) => {
                let (sym, p) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    // Right-associative; the left operand must bind tighter.
                    paren(f, a, prec(a) <= p)?;
                    write!(f, "{sym}")?;
                    paren(f, b, prec(b) < 3)
                } else {
                    paren(f, a, prec(a) < p)?;
                    write!(f, "{sym}")?;
                    // Left-associative; same-precedence right operands need parens.
                    paren(f, b, prec(b) <= p && matches!(b.as_ref(), Expr::Bin(..)))
                }
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}
