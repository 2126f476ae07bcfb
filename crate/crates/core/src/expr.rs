//! Tiny expression grammar for boundary data: `+ - * / ^`, parentheses,
//! numbers, named variables, and the functions `sin cos cosh arccosh exp ln
//! min max`. Hand-parsed recursive descent; deliberately no general
//! interpreter.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call1(Func1, Box<Expr>),
    Call2(Func2, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy)]
pub enum Func1 {
    Sin,
    Cos,
    Cosh,
    Arccosh,
    Exp,
    Ln,
}

#[derive(Debug, Clone, Copy)]
pub enum Func2 {
    Min,
    Max,
}

/// Parsed expression bound to a fixed variable list.
#[derive(Debug, Clone)]
pub struct BoundExpr {
    expr: Expr,
    pub source: String,
    pub vars: Vec<String>,
}

impl BoundExpr {
    pub fn eval(&self, values: &[f64]) -> f64 {
        eval(&self.expr, values)
    }
}

fn eval(e: &Expr, v: &[f64]) -> f64 {
    match e {
        Expr::Num(x) => *x,
        Expr::Var(i) => v[*i],
        Expr::Neg(a) => -eval(a, v),
        Expr::Add(a, b) => eval(a, v) + eval(b, v),
        Expr::Sub(a, b) => eval(a, v) - eval(b, v),
        Expr::Mul(a, b) => eval(a, v) * eval(b, v),
        Expr::Div(a, b) => eval(a, v) / eval(b, v),
        Expr::Pow(a, b) => eval(a, v).powf(eval(b, v)),
        Expr::Call1(f, a) => {
            let x = eval(a, v);
            match f {
                Func1::Sin => x.sin(),
                Func1::Cos => x.cos(),
                Func1::Cosh => x.cosh(),
                Func1::Arccosh => x.acosh(),
                Func1::Exp => x.exp(),
                Func1::Ln => x.ln(),
            }
        }
        Expr::Call2(f, a, b) => {
            let x = eval(a, v);
            let y = eval(b, v);
            match f {
                Func2::Min => x.min(y),
                Func2::Max => x.max(y),
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.bump() {
            Some(x) if x == c => Ok(()),
            other => Err(Error::Config(format!(
                "expected `{}` at byte {} of expression, found {:?}",
                c as char,
                self.pos,
                other.map(|b| b as char)
            ))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        // unary minus binds looser than the power
        if self.peek() == Some(b'-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.bump();
            // right associative; the exponent may carry its own sign
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            other => Err(Error::Config(format!(
                "unexpected token {:?} at byte {} of expression",
                other.map(|b| b as char),
                self.pos
            ))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && self.pos + 1 < self.src.len()
                && (self.src[self.pos + 1].is_ascii_digit()
                    || self.src[self.pos + 1] == b'-'
                    || self.src[self.pos + 1] == b'+')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Config(format!("bad number `{text}` in expression")))
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        if self.peek() == Some(b'(') {
            self.bump();
            let one = |f: Func1, p: &mut Self| -> Result<Expr> {
                let a = p.expr()?;
                p.expect(b')')?;
                Ok(Expr::Call1(f, Box::new(a)))
            };
            let two = |f: Func2, p: &mut Self| -> Result<Expr> {
                let a = p.expr()?;
                p.expect(b',')?;
                let b = p.expr()?;
                p.expect(b')')?;
                Ok(Expr::Call2(f, Box::new(a), Box::new(b)))
            };
            return match name.as_str() {
                "sin" => one(Func1::Sin, self),
                "cos" => one(Func1::Cos, self),
                "cosh" => one(Func1::Cosh, self),
                "arccosh" | "acosh" => one(Func1::Arccosh, self),
                "exp" => one(Func1::Exp, self),
                "ln" => one(Func1::Ln, self),
                "min" => two(Func2::Min, self),
                "max" => two(Func2::Max, self),
                other => Err(Error::Config(format!("unknown function `{other}`"))),
            };
        }
        match self.vars.iter().position(|v| v == &name) {
            Some(i) => Ok(Expr::Var(i)),
            None => Err(Error::Config(format!(
                "unknown variable `{name}` (available: {})",
                self.vars.join(", ")
            ))),
        }
    }
}

/// Parse `src` against a fixed variable list.
pub fn parse(src: &str, vars: &[String]) -> Result<BoundExpr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, vars };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::Config(format!(
            "trailing characters at byte {} of expression `{src}`",
            p.pos
        )));
    }
    Ok(BoundExpr { expr, source: src.to_string(), vars: vars.to_vec() })
}
