//! Recursive-descent parser for profile expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | 'xi' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! ```

use crate::dsl::ast::{BinOp, Constant, Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                // exponent only if digits follow, otherwise `2e` would swallow the constant e
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if b"+-*/^()".contains(&c) {
            out.push((i, Tok::Sym(c as char)));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(Error::Parse {
                offset: i,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expected(&self, what: &[&str]) -> Error {
        Error::Parse {
            offset: self.offset(),
            message: format!(
                "expected one of {{{}}}, found {}",
                what.join(", "),
                self.peek().describe()
            ),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.expected(&["`)`", "operator"]));
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "xi" => return Ok(Expr::Var),
                    "pi" => return Ok(Expr::Const(Constant::Pi)),
                    "e" => return Ok(Expr::Const(Constant::E)),
                    _ => {}
                }
                let func = Func::from_name(&name).ok_or_else(|| Error::Parse {
                    offset: at,
                    message: format!("unknown identifier `{name}`"),
                })?;
                if !self.eat('(') {
                    return Err(self.expected(&["`(`"]));
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(self.expected(&["`)`", "operator"]));
                }
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.expected(&["number", "identifier", "`(`", "`-`"])),
        }
    }
}

pub fn parse_expression(text: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.expected(&["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_documented_examples() {
        assert!((parse_expression("sqrt(xi/20)").unwrap().eval(20.0) - 1.0).abs() < 1e-15);
        let e = std::f64::consts::E;
        assert!((parse_expression("20*ln(xi)").unwrap().eval(e) - 20.0).abs() < 1e-14);
        let v = parse_expression("sqrt(tan(xi/20))").unwrap().eval(5.0 * std::f64::consts::PI);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_associativity() {
        let ev = |s: &str| parse_expression(s).unwrap().eval(2.0);
        assert_eq!(ev("2^3^2"), 512.0);
        assert_eq!(ev("-2^2"), -4.0);
        assert_eq!(ev("2^-1"), 0.5);
        assert_eq!(ev("1 - 2 - 3"), -4.0);
        assert_eq!(ev("8 / 4 / 2"), 1.0);
        assert_eq!(ev("xi*e - 2*e"), 0.0);
        assert_eq!(ev("1.5e1 + 2E-1"), 15.2);
        assert!((ev("2 * pi") - std::f64::consts::TAU).abs() < 1e-15);
    }

    #[test]
    fn error_positions() {
        match parse_expression("sqrt(xi/20") {
            Err(Error::Parse { offset, message }) => {
                assert_eq!(offset, 10);
                assert!(message.contains("`)`"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        match parse_expression("2 * foo(xi)") {
            Err(Error::Parse { offset, message }) => {
                assert_eq!(offset, 4);
                assert!(message.contains("unknown identifier `foo`"));
            }
            other => panic!("{other:?}"),
        }
        match parse_expression("x + 1") {
            Err(Error::Parse { offset: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expression("1 +"), Err(Error::Parse { offset: 3, .. })));
        assert!(matches!(parse_expression("1 $ 2"), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(parse_expression("(1) (2)"), Err(Error::Parse { offset: 4, .. })));
        assert!(matches!(parse_expression("sin xi"), Err(Error::Parse { offset: 4, .. })));
    }
}
