//! Symbolic vector expressions in the generators a_i, b_i of H, with the
//! genus `g` as a free parameter.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum    := ['-'] term (('+' | '-') term)*
//! term   := sym (('*' | '/') sym)*
//! sym    := tens ('<->' tens)*          (x)<->(y) = x@y + y@x
//! tens   := wedge ('@' wedge)*
//! wedge  := atom ('^' atom)*            scalar^scalar is a power
//! atom   := int | g | w | a<i> | b<i> | a{expr} | b{expr}
//!         | '(' sum ')' | '[' sum ']' | lie(x, y)
//!         | sum(i=lo..hi, ..., i!=j : body) | name | name(args)
//! ```
//!
//! `w` is ω = Σ a_i^b_i and `[..]` marks a factor of an inner space.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;
use torelli_core::exterior::{gen_a, gen_b};
use torelli_core::rep_spaces::Formal;
use torelli_core::scalar_linalg::{rat, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error("{0}")]
    Eval(String),
}

fn eval_err<T>(msg: impl Into<String>) -> Result<T, ExprError> {
    Err(ExprError::Eval(msg.into()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i64),
    Genus,
    Omega,
    Gen { is_a: bool, index: Box<Expr> },
    Name(String),
    Call(String, Vec<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Sym(Box<Expr>, Box<Expr>),
    Tensor(Box<Expr>, Box<Expr>),
    Wedge(Box<Expr>, Box<Expr>),
    Group(Box<Expr>),
    Lie(Box<Expr>, Box<Expr>),
    Sum { ranges: Vec<(String, Expr, Expr)>, excluded: Vec<(Expr, Expr)>, body: Box<Expr> },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Sym(&'static str),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    const SYMBOLS: [&str; 16] = ["<->", "..", "!=", "(", ")", "[", "]", "{", "}", ",", "+", "-", "*", "/", "^", "@"];
    let s = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < s.len() {
        let c = s[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start..i].parse::<i64>().map_err(|_| ExprError::Parse { col: start + 1, msg: "integer too large".into() })?;
            out.push((Tok::Int(n), start + 1));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start + 1));
            continue;
        }
        if c == b':' || c == b'=' {
            out.push((Tok::Sym(if c == b':' { ":" } else { "=" }), i + 1));
            i += 1;
            continue;
        }
        for sym in SYMBOLS {
            if s[i..].starts_with(sym.as_bytes()) {
                out.push((Tok::Sym(sym), i + 1));
                i += sym.len();
                continue 'outer;
            }
        }
        return Err(ExprError::Parse { col: i + 1, msg: format!("unexpected character '{}'", c as char) });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse { col: self.col(), msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.peek_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ExprError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected '{s}'"))
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut e = if self.eat("-") { Expr::Neg(Box::new(self.term()?)) } else { self.term()? };
        loop {
            if self.eat("+") {
                e = Expr::Add(Box::new(e), Box::new(self.term()?));
            } else if self.eat("-") {
                e = Expr::Sub(Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut e = self.sym()?;
        loop {
            if self.eat("*") {
                e = Expr::Mul(Box::new(e), Box::new(self.sym()?));
            } else if self.eat("/") {
                e = Expr::Div(Box::new(e), Box::new(self.sym()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn sym(&mut self) -> Result<Expr, ExprError> {
        let mut e = self.tens()?;
        while self.eat("<->") {
            e = Expr::Sym(Box::new(e), Box::new(self.tens()?));
        }
        Ok(e)
    }

    fn tens(&mut self) -> Result<Expr, ExprError> {
        let mut e = self.wedge()?;
        while self.eat("@") {
            e = Expr::Tensor(Box::new(e), Box::new(self.wedge()?));
        }
        Ok(e)
    }

    fn wedge(&mut self) -> Result<Expr, ExprError> {
        let mut e = self.atom()?;
        while self.eat("^") {
            e = Expr::Wedge(Box::new(e), Box::new(self.atom()?));
        }
        Ok(e)
    }

    fn args(&mut self) -> Result<Vec<Expr>, ExprError> {
        let mut out = Vec::new();
        if self.eat(")") {
            return Ok(out);
        }
        loop {
            out.push(self.sum()?);
            if self.eat(")") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn summation(&mut self) -> Result<Expr, ExprError> {
        let mut ranges = Vec::new();
        let mut excluded = Vec::new();
        loop {
            let save = self.pos;
            if let Some(Tok::Ident(name)) = self.peek().cloned() {
                self.pos += 1;
                if self.eat("=") {
                    let lo = self.sum()?;
                    self.expect("..")?;
                    let hi = self.sum()?;
                    ranges.push((name, lo, hi));
                } else {
                    self.pos = save;
                    let l = self.sum()?;
                    self.expect("!=")?;
                    let r = self.sum()?;
                    excluded.push((l, r));
                }
            } else {
                return self.err("expected a range 'i=lo..hi' or a condition 'i!=j'");
            }
            if self.eat(":") {
                break;
            }
            self.expect(",")?;
        }
        if ranges.is_empty() {
            return self.err("sum needs at least one range");
        }
        let body = self.sum()?;
        self.expect(")")?;
        Ok(Expr::Sum { ranges, excluded, body: Box::new(body) })
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let Some((tok, _)) = self.toks.get(self.pos).cloned() else {
            return self.err("unexpected end of input");
        };
        self.pos += 1;
        match tok {
            Tok::Int(n) => Ok(Expr::Int(n)),
            Tok::Sym("(") => {
                let e = self.sum()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Sym("[") => {
                let e = self.sum()?;
                self.expect("]")?;
                Ok(Expr::Group(Box::new(e)))
            }
            Tok::Ident(name) => {
                if (name == "a" || name == "b") && self.eat("{") {
                    let index = self.sum()?;
                    self.expect("}")?;
                    return Ok(Expr::Gen { is_a: name == "a", index: Box::new(index) });
                }
                let bytes = name.as_bytes();
                if bytes.len() > 1 && (bytes[0] == b'a' || bytes[0] == b'b') && bytes[1..].iter().all(u8::is_ascii_digit) {
                    let n: i64 = name[1..].parse().map_err(|_| ExprError::Parse { col: self.col(), msg: "bad index".into() })?;
                    return Ok(Expr::Gen { is_a: bytes[0] == b'a', index: Box::new(Expr::Int(n)) });
                }
                match name.as_str() {
                    "g" => Ok(Expr::Genus),
                    "w" => Ok(Expr::Omega),
                    "sum" => {
                        self.expect("(")?;
                        self.summation()
                    }
                    "lie" => {
                        self.expect("(")?;
                        let mut a = self.args()?;
                        if a.len() != 2 {
                            self.pos -= 1;
                            return self.err("lie takes two arguments");
                        }
                        let y = a.pop().unwrap();
                        let x = a.pop().unwrap();
                        Ok(Expr::Lie(Box::new(x), Box::new(y)))
                    }
                    _ => {
                        if self.eat("(") {
                            Ok(Expr::Call(name, self.args()?))
                        } else {
                            Ok(Expr::Name(name))
                        }
                    }
                }
            }
            Tok::Sym(s) => {
                self.pos -= 1;
                self.err(format!("unexpected '{s}'"))
            }
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() + 1 };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// A named vector, possibly with integer parameters.
#[derive(Clone, Debug)]
pub struct Def {
    pub params: Vec<String>,
    pub body: Expr,
}

pub type Defs = BTreeMap<String, Def>;

/// Evaluation context: the genus, bound integer variables and named vectors.
#[derive(Clone, Debug)]
pub struct Env<'a> {
    pub g: usize,
    pub ints: BTreeMap<String, Rational>,
    pub defs: &'a Defs,
    depth: usize,
}

impl<'a> Env<'a> {
    pub fn new(g: usize, defs: &'a Defs) -> Self {
        Env { g, ints: BTreeMap::new(), defs, depth: 0 }
    }

    pub fn bind(&self, name: &str, value: i64) -> Env<'a> {
        let mut e = self.clone();
        e.ints.insert(name.to_string(), rat(value));
        e
    }
}

fn scalar_of(f: &Formal, what: &str) -> Result<Rational, ExprError> {
    f.as_scalar().ok_or_else(|| ExprError::Eval(format!("{what} must be a scalar")))
}

/// Evaluates an expression that must be an integer.
pub fn eval_int(e: &Expr, env: &Env) -> Result<i64, ExprError> {
    let v = scalar_of(&eval(e, env)?, "index")?;
    if !v.is_integer() {
        return eval_err(format!("index {v} is not an integer"));
    }
    v.to_integer().to_i64().ok_or_else(|| ExprError::Eval("index out of range".into()))
}

fn eval_index(e: &Expr, env: &Env) -> Result<usize, ExprError> {
    let k = eval_int(e, env)?;
    if k < 1 || k as usize > env.g {
        return eval_err(format!("generator index {k} outside 1..{}", env.g));
    }
    Ok(k as usize)
}

pub fn eval(e: &Expr, env: &Env) -> Result<Formal, ExprError> {
    let bin = |x: &Expr, y: &Expr| -> Result<(Formal, Formal), ExprError> { Ok((eval(x, env)?, eval(y, env)?)) };
    Ok(match e {
        Expr::Int(n) => Formal::scalar(rat(*n)),
        Expr::Genus => Formal::scalar(rat(env.g as i64)),
        Expr::Omega => Formal::omega(env.g),
        Expr::Gen { is_a, index } => {
            let k = eval_index(index, env)?;
            Formal::gen(if *is_a { gen_a(env.g, k) } else { gen_b(env.g, k) })
        }
        Expr::Name(n) => {
            if let Some(v) = env.ints.get(n) {
                Formal::scalar(v.clone())
            } else {
                call(n, &[], env)?
            }
        }
        Expr::Call(n, args) => call(n, args, env)?,
        Expr::Neg(x) => eval(x, env)?.scale(&-Rational::one()),
        Expr::Add(x, y) => {
            let (a, b) = bin(x, y)?;
            a.add(&b)
        }
        Expr::Sub(x, y) => {
            let (a, b) = bin(x, y)?;
            a.sub(&b)
        }
        Expr::Mul(x, y) => {
            let (a, b) = bin(x, y)?;
            match (a.as_scalar(), b.as_scalar()) {
                (Some(s), _) => b.scale(&s),
                (_, Some(s)) => a.scale(&s),
                _ => return eval_err("'*' needs a scalar factor; use ^, @ or <-> for products of vectors"),
            }
        }
        Expr::Div(x, y) => {
            let (a, b) = bin(x, y)?;
            let d = scalar_of(&b, "divisor")?;
            if d.is_zero() {
                return eval_err("division by zero");
            }
            a.scale(&(Rational::one() / d))
        }
        Expr::Sym(x, y) => {
            let (a, b) = bin(x, y)?;
            a.sym_product(&b)
        }
        Expr::Tensor(x, y) => {
            let (a, b) = bin(x, y)?;
            a.tensor(&b)
        }
        Expr::Wedge(x, y) => {
            let (a, b) = bin(x, y)?;
            match (a.as_scalar(), b.as_scalar()) {
                (Some(base), Some(exp)) => {
                    if !exp.is_integer() || exp.is_negative() {
                        return eval_err("exponent must be a non-negative integer");
                    }
                    let n = exp.to_integer().to_u32().ok_or_else(|| ExprError::Eval("exponent too large".into()))?;
                    Formal::scalar(num_traits::pow(base, n as usize))
                }
                _ => a.wedge(&b),
            }
        }
        Expr::Group(x) => eval(x, env)?.group(),
        Expr::Lie(x, y) => {
            let (a, b) = bin(x, y)?;
            a.lie(&b)
        }
        Expr::Sum { ranges, excluded, body } => {
            let mut acc = Formal::zero();
            sum_over(ranges, excluded, body, env, &mut acc)?;
            acc
        }
    })
}

fn sum_over(ranges: &[(String, Expr, Expr)], excluded: &[(Expr, Expr)], body: &Expr, env: &Env, acc: &mut Formal) -> Result<(), ExprError> {
    let Some(((name, lo, hi), rest)) = ranges.split_first() else {
        for (l, r) in excluded {
            if eval_int(l, env)? == eval_int(r, env)? {
                return Ok(());
            }
        }
        *acc = acc.add(&eval(body, env)?);
        return Ok(());
    };
    let (lo, hi) = (eval_int(lo, env)?, eval_int(hi, env)?);
    for k in lo..=hi {
        sum_over(rest, excluded, body, &env.bind(name, k), acc)?;
    }
    Ok(())
}

fn call(name: &str, args: &[Expr], env: &Env) -> Result<Formal, ExprError> {
    let def = env.defs.get(name).ok_or_else(|| ExprError::Eval(format!("unknown name '{name}'")))?;
    if def.params.len() != args.len() {
        return eval_err(format!("'{name}' takes {} arguments, got {}", def.params.len(), args.len()));
    }
    if env.depth > 32 {
        return eval_err(format!("definition of '{name}' is recursive"));
    }
    let mut inner = Env { g: env.g, ints: BTreeMap::new(), defs: env.defs, depth: env.depth + 1 };
    for (p, a) in def.params.iter().zip(args) {
        inner.ints.insert(p.clone(), scalar_of(&eval(a, env)?, "argument")?);
    }
    eval(&def.body, &inner)
}

/// Parses and evaluates in one step.
pub fn evaluate(text: &str, env: &Env) -> Result<Formal, ExprError> {
    eval(&parse(text)?, env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use torelli_core::scalar_linalg::ratio;

    fn ev(text: &str, g: usize) -> Formal {
        let defs = Defs::new();
        evaluate(text, &Env::new(g, &defs)).unwrap()
    }

    #[test]
    fn scalar_arithmetic() {
        assert_eq!(ev("-(g-1)^2", 6).as_scalar(), Some(rat(-25)));
        assert_eq!(ev("-8/(g-1)^2", 5).as_scalar(), Some(ratio(-1, 2)));
        assert_eq!(ev("2*(g-2) - 3", 4).as_scalar(), Some(rat(1)));
    }

    #[test]
    fn generators_and_products() {
        let g = 4;
        let x = ev("a1^b{g}", g);
        assert_eq!(x, Formal::a(g, 1).wedge(&Formal::b(g, 4)));
        assert_eq!(ev("a{g-1}", g), Formal::a(g, 3));
        assert_eq!(ev("w", g), Formal::omega(g));
        assert_eq!(ev("(a1)<->(b2)", g), Formal::a(g, 1).sym_product(&Formal::b(g, 2)));
    }

    #[test]
    fn scalar_times_wedge_binds_looser() {
        let g = 5;
        let x = ev("(g-1)*a1^b1^a2 - a2^w", g);
        let y = Formal::a(g, 1).wedge(&Formal::b(g, 1)).wedge(&Formal::a(g, 2)).scale(&rat(4)).sub(&Formal::a(g, 2).wedge(&Formal::omega(g)));
        assert_eq!(x, y);
    }

    #[test]
    fn sums_with_exclusions() {
        let g = 4;
        let s = ev("sum(i=1..g, j=1..g, i!=j : a{i}^a{j})", g);
        let space = torelli_core::rep_spaces::build(&torelli_core::rep_spaces::ModuleExpr::parse("wedge(2,H)").unwrap(), g).unwrap();
        assert!(space.embed(&s).unwrap().is_zero());
        let t = ev("sum(i=1..g : a{i}^b{i})", g);
        assert_eq!(t, Formal::omega(g));
    }

    #[test]
    fn named_definitions() {
        let mut defs = Defs::new();
        defs.insert("x".into(), Def { params: vec!["i".into()], body: parse("a{i}^b{i}").unwrap() });
        defs.insert("y".into(), Def { params: vec![], body: parse("x(1) + x(2)").unwrap() });
        let env = Env::new(3, &defs);
        let v = evaluate("y", &env).unwrap();
        assert_eq!(v, Formal::a(3, 1).wedge(&Formal::b(3, 1)).add(&Formal::a(3, 2).wedge(&Formal::b(3, 2))));
    }

    #[test]
    fn errors_carry_columns() {
        match parse("a1 ^ (b2") {
            Err(ExprError::Parse { col, .. }) => assert_eq!(col, 9),
            other => panic!("{other:?}"),
        }
        match parse("a1 $ b2") {
            Err(ExprError::Parse { col, .. }) => assert_eq!(col, 4),
            other => panic!("{other:?}"),
        }
        let defs = Defs::new();
        assert!(evaluate("a{g+1}", &Env::new(3, &defs)).is_err());
        assert!(evaluate("a1*b1", &Env::new(3, &defs)).is_err());
    }
}
