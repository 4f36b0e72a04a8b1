use std::fmt;

use crate::families::lambert::{lambert_w, Branch};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sec,
    Exp,
    Ln,
    Sqrt,
    Abs,
    /// Principal Lambert W.
    W,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sec,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Abs,
        Func::W,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sec => "sec",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::W => "W",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sec => 1.0 / x.cos(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
            Func::W => lambert_w(x, Branch::Principal).unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }
}

/// Expression tree over the single variable `xi`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Const(Constant),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) if v == 0.0 => num(0.0),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), b) if x == 0.0 => b,
        (a, Expr::Num(y)) if y == 0.0 => a,
        (Expr::Num(x), Expr::Num(y)) => num(x + y),
        (a, Expr::Neg(b)) => sub(a, *b),
        (a, b) => Expr::Bin(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, Expr::Num(y)) if y == 0.0 => a,
        (Expr::Num(x), b) if x == 0.0 => neg(b),
        (Expr::Num(x), Expr::Num(y)) => num(x - y),
        (a, b) => Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), _) | (_, Expr::Num(x)) if x == 0.0 => num(0.0),
        (Expr::Num(x), b) if x == 1.0 => b,
        (a, Expr::Num(y)) if y == 1.0 => a,
        (Expr::Num(x), Expr::Num(y)) => num(x * y),
        (Expr::Neg(a), b) => neg(mul(*a, b)),
        (a, Expr::Neg(b)) => neg(mul(a, *b)),
        (a, b) => Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), _) if x == 0.0 => num(0.0),
        (a, Expr::Num(y)) if y == 1.0 => a,
        (Expr::Neg(a), b) => neg(div(*a, b)),
        (a, b) => Expr::Bin(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (_, Expr::Num(y)) if y == 0.0 => num(1.0),
        (a, Expr::Num(y)) if y == 1.0 => a,
        (a, b) => Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b)),
    }
}

impl Expr {
    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => xi,
            Expr::Const(c) => c.value(),
            Expr::Neg(a) => -a.eval(xi),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(xi), b.eval(xi));
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(xi)),
        }
    }

    fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Symbolic derivative with respect to `xi`.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::Const(_) => num(0.0),
            Expr::Var => num(1.0),
            Expr::Neg(a) => neg(a.derivative()),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                let (da, db) = (a.derivative(), b.derivative());
                match op {
                    BinOp::Add => add(da, db),
                    BinOp::Sub => sub(da, db),
                    BinOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                    BinOp::Div => div(
                        sub(mul(da, b.clone()), mul(a, db)),
                        pow(b, num(2.0)),
                    ),
                    BinOp::Pow => {
                        if b.is_constant() {
                            // b a^(b-1) a'
                            let lowered = match &b {
                                Expr::Num(v) => num(v - 1.0),
                                other => sub(other.clone(), num(1.0)),
                            };
                            mul(mul(b, pow(a, lowered)), da)
                        } else {
                            // a^b (b' ln a + b a'/a)
                            let whole = pow(a.clone(), b.clone());
                            mul(
                                whole,
                                add(
                                    mul(db, call(Func::Ln, a.clone())),
                                    div(mul(b, da), a),
                                ),
                            )
                        }
                    }
                }
            }
            Expr::Call(f, a) => {
                let a = a.as_ref().clone();
                let da = a.derivative();
                let outer = match f {
                    Func::Sin => call(Func::Cos, a),
                    Func::Cos => neg(call(Func::Sin, a)),
                    Func::Tan => pow(call(Func::Sec, a), num(2.0)),
                    Func::Sec => mul(call(Func::Sec, a.clone()), call(Func::Tan, a)),
                    Func::Exp => call(Func::Exp, a),
                    Func::Ln => div(num(1.0), a),
                    Func::Sqrt => div(num(1.0), mul(num(2.0), call(Func::Sqrt, a))),
                    // d|a| = a/|a| away from 0
                    Func::Abs => div(a.clone(), call(Func::Abs, a)),
                    // W'(a) = 1 / (e^W(a) + a), regular at a = 0
                    Func::W => div(
                        num(1.0),
                        add(call(Func::Exp, call(Func::W, a.clone())), a),
                    ),
                };
                mul(outer, da)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.is_sign_negative() => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Debug formatting is the shortest representation that round-trips
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var => write!(f, "xi"),
            Expr::Const(c) => write!(f, "{}", c.name()),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_wrapped(f, a, a.precedence() < 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let p = self.precedence();
                let (sym, left_parens, right_parens) = match op {
                    BinOp::Add => (" + ", a.precedence() < p, b.precedence() <= p),
                    BinOp::Sub => (" - ", a.precedence() < p, b.precedence() <= p),
                    BinOp::Mul => (" * ", a.precedence() < p, b.precedence() <= p),
                    BinOp::Div => (" / ", a.precedence() < p, b.precedence() <= p),
                    // right-associative; the exponent may be a signed factor
                    BinOp::Pow => ("^", a.precedence() <= p, b.precedence() < 3),
                };
                write_wrapped(f, a, left_parens)?;
                write!(f, "{sym}")?;
                write_wrapped(f, b, right_parens)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::dsl::parse_expression;

    fn d(src: &str, xi: f64) -> (f64, f64) {
        let e = parse_expression(src).unwrap();
        (e.derivative().eval(xi), e.derivative().derivative().eval(xi))
    }

    #[test]
    fn derivatives_of_elementary_functions() {
        let (d1, d2) = d("sin(2*xi)", 0.3);
        assert!((d1 - 2.0 * (0.6f64).cos()).abs() < 1e-15);
        assert!((d2 + 4.0 * (0.6f64).sin()).abs() < 1e-14);
        let (d1, _) = d("sec(xi)", 0.4);
        assert!((d1 - (0.4f64).tan() / (0.4f64).cos()).abs() < 1e-15);
        let (d1, _) = d("abs(xi)^3", -2.0);
        assert!((d1 + 12.0).abs() < 1e-12);
        let (d1, _) = d("xi^xi", 2.0);
        assert!((d1 - 4.0 * (1.0 + 2f64.ln())).abs() < 1e-13);
        let (d1, _) = d("W(xi)", 0.0);
        assert!((d1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn printing_is_minimal_but_faithful() {
        let e = parse_expression("-(xi+1)^2 / (2*(xi-3)) - -4").unwrap();
        assert_eq!(e.to_string(), "-(xi + 1.0)^2.0 / (2.0 * (xi - 3.0)) - -4.0");
        assert_eq!(parse_expression(&e.to_string()).unwrap(), e);
        let e = parse_expression("2^-xi^2").unwrap();
        assert_eq!(e.to_string(), "2.0^-xi^2.0");
    }
}
