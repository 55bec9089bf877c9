//! A small subset of LiE's command language:
//! `tensor([..],[..],(An))`, `alt_tensor(k,[..],(An))`, `sym_tensor(k,[..],(An))`
//! and `branch([..],(Cn)->(An-1))` (also `Gamma[..]` for the first argument).

use thiserror::Error;
use torelli_core::characters::{Algebra, IrrepLabel};
use torelli_core::decompose::{branch_c_to_a, power_decompose, tensor_decompose, Decomposition, PowerKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LieError {
    #[error("column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("{0}")]
    Rank(String),
    #[error("{0}")]
    Compute(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LieCommand {
    Tensor(IrrepLabel, IrrepLabel),
    Power(PowerKind, usize, IrrepLabel),
    Branch(IrrepLabel),
}

struct Lexer<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LieError> {
        Err(LieError::Syntax { col: self.pos + 1, msg: msg.into() })
    }

    fn ws(&mut self) {
        while self.s[self.pos..].starts_with([' ', '\t']) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.s[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), LieError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.err(format!("expected '{tok}'"))
        }
    }

    fn ident(&mut self) -> String {
        self.ws();
        let id: String = self.s[self.pos..].chars().take_while(|c| c.is_ascii_alphabetic() || *c == '_').collect();
        self.pos += id.len();
        id
    }

    fn int(&mut self) -> Result<i64, LieError> {
        self.ws();
        let neg = self.s[self.pos..].starts_with('-');
        let start = self.pos;
        if neg {
            self.pos += 1;
        }
        let digits: String = self.s[self.pos..].chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            self.pos = start;
            return self.err("expected an integer");
        }
        self.pos += digits.len();
        Ok(self.s[start..self.pos].parse().unwrap())
    }

    fn weight(&mut self) -> Result<(usize, Vec<i32>), LieError> {
        self.ws();
        let at = self.pos;
        self.expect("[")?;
        let mut v = Vec::new();
        loop {
            let n = self.int()?;
            if n < 0 {
                return Err(LieError::Syntax { col: at + 1, msg: "weights must be dominant".into() });
            }
            v.push(n as i32);
            if self.eat("]") {
                break;
            }
            self.expect(",")?;
        }
        Ok((at, v))
    }

    /// `(An)` or `(Cn)`.
    fn group(&mut self) -> Result<(Algebra, usize), LieError> {
        self.expect("(")?;
        self.ws();
        let alg = match self.s[self.pos..].chars().next() {
            Some('A') => Algebra::A,
            Some('C') => Algebra::C,
            _ => return self.err("expected a group A<n> or C<n>"),
        };
        self.pos += 1;
        let n = self.int()?;
        if n < 1 {
            return self.err("rank must be positive");
        }
        self.expect(")")?;
        Ok((alg, n as usize))
    }
}

fn label(alg: Algebra, n: usize, coords: Vec<i32>, at: usize) -> Result<IrrepLabel, LieError> {
    if coords.len() != n {
        return Err(LieError::Rank(format!("weight at column {} has {} entries, group has rank {n}", at + 1, coords.len())));
    }
    if alg == Algebra::C && n < 2 {
        return Err(LieError::Rank("C_n needs n >= 2".into()));
    }
    IrrepLabel::new(alg, coords).map_err(|e| LieError::Compute(e.to_string()))
}

pub fn parse(text: &str) -> Result<LieCommand, LieError> {
    let mut lx = Lexer { s: text.trim_end_matches([';', '\n', ' ']), pos: 0 };
    let name = lx.ident();
    lx.expect("(")?;
    let cmd = match name.as_str() {
        "tensor" => {
            let (a1, w1) = lx.weight()?;
            lx.expect(",")?;
            let (a2, w2) = lx.weight()?;
            lx.expect(",")?;
            let (alg, n) = lx.group()?;
            LieCommand::Tensor(label(alg, n, w1, a1)?, label(alg, n, w2, a2)?)
        }
        "alt_tensor" | "sym_tensor" => {
            let k = lx.int()?;
            if k < 0 {
                return lx.err("power must be non-negative");
            }
            lx.expect(",")?;
            let (a, w) = lx.weight()?;
            lx.expect(",")?;
            let (alg, n) = lx.group()?;
            let kind = if name == "alt_tensor" { PowerKind::Alt } else { PowerKind::Sym };
            LieCommand::Power(kind, k as usize, label(alg, n, w, a)?)
        }
        "branch" => {
            lx.ws();
            lx.eat("Gamma");
            let (a, w) = lx.weight()?;
            lx.expect(",")?;
            let (alg, n) = lx.group()?;
            if alg != Algebra::C {
                return Err(LieError::Rank("branching is from C_n".into()));
            }
            lx.expect("->")?;
            let (to, m) = lx.group()?;
            if to != Algebra::A || m + 1 != n {
                return Err(LieError::Rank(format!("C{n} branches to A{}", n - 1)));
            }
            LieCommand::Branch(label(alg, n, w, a)?)
        }
        "" => return lx.err("expected a command"),
        other => return Err(LieError::Syntax { col: 1, msg: format!("unsupported command '{other}'") }),
    };
    lx.expect(")")?;
    lx.ws();
    if lx.pos != lx.s.len() {
        return lx.err("trailing input");
    }
    Ok(cmd)
}

pub fn run(cmd: &LieCommand) -> Result<Decomposition, LieError> {
    let r = match cmd {
        LieCommand::Tensor(a, b) => tensor_decompose(a, b),
        LieCommand::Power(kind, k, l) => power_decompose(*kind, *k, l),
        LieCommand::Branch(l) => branch_c_to_a(l),
    };
    r.map_err(|e| LieError::Compute(e.to_string()))
}

/// LiE-style rendering: one summand per line, continued with ` +`.
pub fn format(d: &Decomposition) -> String {
    let s = d.to_string();
    s.replace(" + ", " +\n")
}

pub fn command(text: &str) -> Result<String, LieError> {
    Ok(format(&run(&parse(text)?)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tensor() {
        assert_eq!(command("tensor([1,0],[0,1],(A2))").unwrap(), "1X[1,1] +\n1X[0,0]");
    }

    #[test]
    fn powers_and_branch() {
        let out = command("alt_tensor(2,[1,0,0],(A3))").unwrap();
        assert_eq!(out, "1X[0,1,0]");
        let out = command("sym_tensor(2,[1,0],(A2))").unwrap();
        assert_eq!(out, "1X[2,0]");
        let b = run(&parse("branch(Gamma[0,1,0,0,0,0],(C6)->(A5))").unwrap()).unwrap();
        assert_eq!(b.total(), 3);
        assert_eq!(parse("branch([0,1,0,0,0,0],(C6)->(A5))").unwrap(), parse("branch(Gamma[0,1,0,0,0,0],(C6)->(A5))").unwrap());
    }

    #[test]
    fn errors_carry_columns() {
        match parse("tensor([1,0],[0,1] (A2))") {
            Err(LieError::Syntax { col, .. }) => assert_eq!(col, 20),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("tensor([1,0],[0,1,0],(A2))"), Err(LieError::Rank(_))));
        assert!(matches!(parse("plethysm([1],(A1))"), Err(LieError::Syntax { col: 1, .. })));
        assert!(matches!(parse("branch([0,1],(C2)->(A3))"), Err(LieError::Rank(_))));
    }
}
