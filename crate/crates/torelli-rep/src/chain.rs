//! Operator chains written in composition order, e.g.
//! `X(g-2) o E(g-2,4) o E(3,g-1) o E(1,g) o pi6`, applied right to left.
//! A leading `-` negates the result.

use std::sync::Arc;

use num_traits::One;
use thiserror::Error;
use torelli_core::equivariant_maps::{bracket, c3p, contract_elem, p4, p_map, pi6, q_elem, q_map, qp, wedge_out, Elem, MapError};
use torelli_core::rep_spaces::{build, ModuleExpr, ModuleSpace, Op};
use torelli_core::scalar_linalg::{Rational, SparseVector};

use crate::expr::{self, eval_int, Env, Expr, ExprError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("chain parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("{0}")]
    Index(String),
}

impl From<torelli_core::rep_spaces::SpaceError> for ChainError {
    fn from(e: torelli_core::rep_spaces::SpaceError) -> Self {
        ChainError::Map(MapError::Space(e))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub name: String,
    pub args: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub negate: bool,
    /// Steps in written order; the last one is applied first.
    pub steps: Vec<Step>,
}

const STEPS: [(&str, usize); 19] = [
    ("E", 2),
    ("X", 1),
    ("XX", 2),
    ("swap", 2),
    ("C", 0),
    ("C2", 0),
    ("C4", 0),
    ("C6", 0),
    ("qproj", 0),
    ("pi6", 0),
    ("wedge", 0),
    ("bracket", 0),
    ("p", 0),
    ("q", 0),
    ("qp", 0),
    ("p4", 0),
    ("c3p", 0),
    ("c3p_id", 0),
    ("id", 0),
];

fn split_top(text: &str) -> Vec<(usize, &str)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => depth -= 1,
            _ => {}
        }
        if depth == 0 {
            if text[i..].starts_with('∘') {
                out.push((start, &text[start..i]));
                i += '∘'.len_utf8();
                start = i;
                continue;
            }
            let spaced_o =
                bytes[i] == b'o' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) && (i + 1 == bytes.len() || bytes[i + 1].is_ascii_whitespace());
            if spaced_o {
                out.push((start, &text[start..i]));
                i += 1;
                start = i;
                continue;
            }
        }
        i += 1;
    }
    out.push((start, &text[start..]));
    out
}

impl Chain {
    pub fn identity() -> Chain {
        Chain { negate: false, steps: vec![] }
    }

    pub fn parse(text: &str) -> Result<Chain, ChainError> {
        let trimmed = text.trim_start();
        let lead = text.len() - trimmed.len();
        let (negate, body, offset) = match trimmed.strip_prefix('-') {
            Some(r) => (true, r, lead + 1),
            None => (false, trimmed, lead),
        };
        if body.trim().is_empty() {
            return Ok(Chain { negate, steps: vec![] });
        }
        let mut steps = Vec::new();
        for (at, piece) in split_top(body) {
            let col = offset + at + (piece.len() - piece.trim_start().len()) + 1;
            let p = piece.trim();
            let perr = |msg: String| ChainError::Parse { col, msg };
            if p.is_empty() {
                return Err(perr("empty step".into()));
            }
            let (name, argtext) = match p.find('(') {
                Some(k) => {
                    if !p.ends_with(')') {
                        return Err(perr(format!("unclosed argument list in '{p}'")));
                    }
                    (&p[..k], Some(&p[k + 1..p.len() - 1]))
                }
                None => (p, None),
            };
            let mut args = Vec::new();
            if let Some(a) = argtext {
                for (j, part) in split_args(a).into_iter().enumerate() {
                    let e = expr::parse(part).map_err(|e| match e {
                        ExprError::Parse { msg, .. } => perr(format!("argument {}: {msg}", j + 1)),
                        other => ChainError::Expr(other),
                    })?;
                    args.push(e);
                }
            }
            let name = if name == "X" && args.len() == 2 { "XX" } else { name };
            let arity = STEPS.iter().find(|(n, _)| *n == name).map(|(_, a)| *a).ok_or_else(|| perr(format!("unknown operator '{name}'")))?;
            if arity != args.len() {
                return Err(perr(format!("'{name}' takes {arity} arguments, got {}", args.len())));
            }
            steps.push(Step { name: name.to_string(), args });
        }
        Ok(Chain { negate, steps })
    }

    pub fn apply(&self, start: Elem, env: &Env) -> Result<Elem, ChainError> {
        let mut cur = start;
        for step in self.steps.iter().rev() {
            cur = apply_step(step, cur, env)?;
        }
        if self.negate {
            cur = cur.scaled(&-Rational::one());
        }
        Ok(cur)
    }
}

fn split_args(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

fn index(e: &Expr, env: &Env) -> Result<usize, ChainError> {
    let k = eval_int(e, env)?;
    if k < 1 || k as usize > env.g {
        return Err(ChainError::Index(format!("operator index {k} outside 1..{}", env.g)));
    }
    Ok(k as usize)
}

fn act(cur: Elem, op: Op, g: usize) -> Result<Elem, ChainError> {
    op.check(g).map_err(|e| ChainError::Index(e.to_string()))?;
    Ok(cur.act(op)?)
}

fn contract_to(cur: Elem, degree: usize) -> Result<Elem, ChainError> {
    let k = cur.space.ext_degree();
    if k != Some(degree) {
        return Err(ChainError::Map(MapError::Domain(format!("C{degree}"), cur.space.expr().to_string())));
    }
    Ok(contract_elem(&cur)?)
}

fn apply_step(step: &Step, cur: Elem, env: &Env) -> Result<Elem, ChainError> {
    let g = env.g;
    let i = |k: usize| index(&step.args[k], env);
    Ok(match step.name.as_str() {
        "E" => act(cur, Op::E(i(0)?, i(1)?), g)?,
        "X" => act(cur, Op::X(i(0)?), g)?,
        "XX" => act(cur, Op::XSym(i(0)?, i(1)?), g)?,
        "swap" => act(cur, Op::Swap(i(0)?, i(1)?), g)?,
        "C" => contract_elem(&cur)?,
        "C2" => contract_to(cur, 2)?,
        "C4" => contract_to(cur, 4)?,
        "C6" => contract_to(cur, 6)?,
        "qproj" => q_elem(&cur)?,
        "pi6" => pi6(&cur)?,
        "wedge" => wedge_out(&cur)?,
        "bracket" => bracket(&cur)?,
        "p" => p_map(&cur)?,
        "q" => q_map(&cur)?,
        "qp" => qp(&cur)?,
        "p4" => p4(&cur)?,
        "c3p" => c3p(&cur)?,
        "c3p_id" => c3p_tensor_id(&cur)?,
        "id" => cur,
        other => return Err(ChainError::Index(format!("unknown operator '{other}'"))),
    })
}

/// (C₃∘p) ⊗ id on (((∧²V)⊗V*) ⊗ M).
fn c3p_tensor_id(e: &Elem) -> Result<Elem, ChainError> {
    let g = e.g();
    let (left, right) = e.space.tensor_parts().ok_or_else(|| MapError::Domain("c3p_id".into(), e.space.expr().to_string()))?;
    let left = left.clone();
    let right: Arc<ModuleSpace> = right.clone();
    let target = build(&ModuleExpr::tensor(ModuleExpr::StdV, right.expr().clone()), g)?;
    let rd = right.dim();
    let mut out = SparseVector::new();
    for (k, c) in e.vec.iter() {
        let img = c3p(&Elem::new(left.clone(), SparseVector::unit(k / rd)))?;
        for (a, ca) in img.vec.iter() {
            out.add_at(a * rd + k % rd, &(ca * c));
        }
    }
    Ok(Elem::new(target, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Defs;
    use torelli_core::rep_spaces::Formal;

    fn elem(space: &str, text: &str, g: usize) -> Elem {
        let defs = Defs::new();
        let env = Env::new(g, &defs);
        let s = build(&ModuleExpr::parse(space).unwrap(), g).unwrap();
        let v = s.embed(&expr::evaluate(text, &env).unwrap()).unwrap();
        Elem::new(s, v)
    }

    #[test]
    fn parses_composition_order() {
        let c = Chain::parse("-E(2,g) o C").unwrap();
        assert!(c.negate);
        assert_eq!(c.steps.len(), 2);
        assert_eq!(c.steps[1].name, "C");
        let d = Chain::parse("X(g-1) ∘ E(g-1,3) ∘ pi6").unwrap();
        assert_eq!(d.steps.len(), 3);
        assert_eq!(Chain::parse("X(1,2)").unwrap().steps[0].name, "XX");
    }

    #[test]
    fn reports_bad_steps() {
        match Chain::parse("E(1,2) o foo") {
            Err(ChainError::Parse { col, .. }) => assert_eq!(col, 10),
            other => panic!("{other:?}"),
        }
        assert!(Chain::parse("E(1) o C").is_err());
        assert!(Chain::parse("E(1,2 o C").is_err());
    }

    #[test]
    fn applies_right_to_left() {
        let g = 4;
        let defs = Defs::new();
        let env = Env::new(g, &defs);
        let start = elem("wedge(3,H)", "a1^b1^b2", g);
        let out = Chain::parse("-E(2,g) o C").unwrap().apply(start, &env).unwrap();
        let expect = out.space.embed(&Formal::b(g, g)).unwrap();
        assert_eq!(out.vec, expect);
    }

    #[test]
    fn degenerate_indices_are_rejected() {
        let g = 4;
        let defs = Defs::new();
        let env = Env::new(g, &defs);
        let start = elem("wedge(3,H)", "a1^b1^b2", g);
        assert!(Chain::parse("E(2,2)").unwrap().apply(start.clone(), &env).is_err());
        assert!(Chain::parse("E(1,g+1)").unwrap().apply(start, &env).is_err());
    }
}
