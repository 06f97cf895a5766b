//! Symbolic differentiation with respect to `t`.

use super::{BinOp, Expr, Func};

impl Expr {
    /// Returns an expression whose evaluation equals `d/dt` of `self`
    /// wherever both are defined. The result is folded but not otherwise
    /// simplified.
    pub fn differentiate(&self) -> Expr {
        self.d().fold()
    }

    fn d(&self) -> Expr {
        let num = Expr::Num;
        match self {
            Expr::Num(_) | Expr::Param(_) => num(0.0),
            Expr::Time => num(1.0),
            Expr::Neg(e) => -e.d(),
            Expr::Bin(BinOp::Add, a, b) => a.d() + b.d(),
            Expr::Bin(BinOp::Sub, a, b) => a.d() - b.d(),
            Expr::Bin(BinOp::Mul, a, b) => a.d() * (**b).clone() + (**a).clone() * b.d(),
            Expr::Bin(BinOp::Div, a, b) => {
                (a.d() * (**b).clone() - (**a).clone() * b.d()) / (**b).clone().pow(num(2.0))
            }
            Expr::Bin(BinOp::Pow, base, exponent) => {
                let u = (**base).clone();
                let v = (**exponent).clone();
                match (base.as_ref(), exponent.as_ref()) {
                    // n·u^(n−1)·u̇ for a literal exponent
                    (_, Expr::Num(n)) => num(*n) * u.pow(num(n - 1.0)) * base.d(),
                    // a^v·ln(a)·v̇ for a literal base
                    (Expr::Num(a), _) => u.pow(v) * Expr::call(Func::Log, num(*a)) * exponent.d(),
                    // u^v·(v̇·ln u + v·u̇/u)
                    _ => {
                        u.clone().pow(v.clone())
                            * (exponent.d() * Expr::call(Func::Log, u.clone()) + v * base.d() / u)
                    }
                }
            }
            Expr::Call(f, inner) => {
                let u = inner.as_ref();
                let square = |e: Expr| e.pow(num(2.0));
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, u.clone()),
                    Func::Cos => -Expr::call(Func::Sin, u.clone()),
                    Func::Tan => num(1.0) / square(Expr::call(Func::Cos, u.clone())),
                    Func::Asin => num(1.0) / Expr::call(Func::Sqrt, num(1.0) - square(u.clone())),
                    Func::Acos => {
                        -(num(1.0) / Expr::call(Func::Sqrt, num(1.0) - square(u.clone())))
                    }
                    Func::Atan => num(1.0) / (num(1.0) + square(u.clone())),
                    Func::Sinh => Expr::call(Func::Cosh, u.clone()),
                    Func::Cosh => Expr::call(Func::Sinh, u.clone()),
                    Func::Tanh => num(1.0) / square(Expr::call(Func::Cosh, u.clone())),
                    Func::Exp => Expr::call(Func::Exp, u.clone()),
                    Func::Log => num(1.0) / u.clone(),
                    Func::Sqrt => num(1.0) / (num(2.0) * Expr::call(Func::Sqrt, u.clone())),
                    // d|u|/dt = u·u̇/|u|, undefined at u = 0
                    Func::Abs => u.clone() / Expr::call(Func::Abs, u.clone()),
                };
                outer * u.d()
            }
        }
    }
}
