//! Representation spaces built from V, V* and H = V ⊕ V*, with canonical
//! bases, weights, and the actions of E_ij, X_i, X_ij and handleswaps.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exterior::{self, gen_a, gen_b, gen_name, ExtVec};
use crate::scalar_linalg::{fmt_rational, rat, Echelon, Rational, SpanSolver, SparseVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("unsupported construction: {0}")]
    Unsupported(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("operator {0} does not act on {1}")]
    NotActionable(String, String),
    #[error("vector is not in {0}")]
    NotInSpace(String),
    #[error("cannot read {0} as an element of {1}")]
    Shape(String, String),
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModuleExpr {
    StdV,
    DualV,
    FullH,
    Tensor(Box<ModuleExpr>, Box<ModuleExpr>),
    Wedge(usize, Box<ModuleExpr>),
    Sym(usize, Box<ModuleExpr>),
    DirectSum(Vec<ModuleExpr>),
    /// Span of the monomials of ∧³H with at most two a-factors.
    SubmoduleU,
    /// U modulo H·ω, realized inside the q-complement.
    SubmoduleUbar,
    /// (∧³H)/H, realized as the image of q.
    QuotientByTripleA,
    /// ((∧²V)⊗V)/∧³V by coset reduction.
    QuotientWedge3V,
    /// ((∧²V)⊗V*)/V by coset reduction.
    QuotientByV,
    /// ((∧²V)⊗V*) ⊕ Sym²(V*).
    SpaceW,
    /// (((∧²V)⊗V*)/V) ⊕ Sym²(V*).
    SpaceWbar,
    /// Degree-3 part of the free Lie algebra on H, inside H⊗H⊗H.
    FreeLieDeg3,
}

impl ModuleExpr {
    pub fn tensor(a: ModuleExpr, b: ModuleExpr) -> Self {
        ModuleExpr::Tensor(Box::new(a), Box::new(b))
    }
    pub fn wedge(k: usize, a: ModuleExpr) -> Self {
        ModuleExpr::Wedge(k, Box::new(a))
    }
    pub fn sym(k: usize, a: ModuleExpr) -> Self {
        ModuleExpr::Sym(k, Box::new(a))
    }

    /// Whether the X-operators act, i.e. no leaf is V on its own (X_i sends V
    /// into V*; on V* it acts by zero).
    pub fn x_actionable(&self) -> bool {
        use ModuleExpr::*;
        match self {
            FullH | DualV | SubmoduleU | SubmoduleUbar | QuotientByTripleA | FreeLieDeg3 => true,
            StdV | QuotientWedge3V | QuotientByV | SpaceW | SpaceWbar => false,
            Tensor(a, b) => a.x_actionable() && b.x_actionable(),
            Wedge(_, a) | Sym(_, a) => a.x_actionable(),
            DirectSum(v) => v.iter().all(|e| e.x_actionable()),
        }
    }

    /// The same construction with V and V* exchanged, where that is again a
    /// leaf construction.
    pub fn dual(&self) -> Option<ModuleExpr> {
        use ModuleExpr::*;
        Some(match self {
            StdV => DualV,
            DualV => StdV,
            FullH => FullH,
            Tensor(a, b) => ModuleExpr::tensor(a.dual()?, b.dual()?),
            Wedge(k, a) => ModuleExpr::wedge(*k, a.dual()?),
            Sym(k, a) => ModuleExpr::sym(*k, a.dual()?),
            DirectSum(v) => DirectSum(v.iter().map(|e| e.dual()).collect::<Option<_>>()?),
            _ => return None,
        })
    }

    pub fn parse(text: &str) -> Result<ModuleExpr, SpaceError> {
        let mut p = ExprParser { s: text.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }
}

impl fmt::Display for ModuleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ModuleExpr::*;
        match self {
            StdV => write!(f, "V"),
            DualV => write!(f, "dualV"),
            FullH => write!(f, "H"),
            Tensor(a, b) => write!(f, "tensor({a},{b})"),
            Wedge(k, a) => write!(f, "wedge({k},{a})"),
            Sym(k, a) => write!(f, "sym({k},{a})"),
            DirectSum(v) => {
                let parts: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                write!(f, "sum({})", parts.join(","))
            }
            SubmoduleU => write!(f, "U"),
            SubmoduleUbar => write!(f, "Ubar"),
            QuotientByTripleA => write!(f, "wedge3H_mod_H"),
            QuotientWedge3V => write!(f, "wedge2V_V_mod_wedge3V"),
            QuotientByV => write!(f, "wedge2V_dualV_mod_V"),
            SpaceW => write!(f, "W"),
            SpaceWbar => write!(f, "Wbar"),
            FreeLieDeg3 => write!(f, "L3H"),
        }
    }
}

struct ExprParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn err(&self, msg: &str) -> SpaceError {
        SpaceError::Parse { col: self.pos + 1, msg: msg.to_string() }
    }
    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }
    fn eat(&mut self, c: u8) -> Result<(), SpaceError> {
        self.ws();
        if self.pos < self.s.len() && self.s[self.pos] == c {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }
    fn ident(&mut self) -> Result<String, SpaceError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_' || self.s[self.pos] == b'*') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a name"));
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }
    fn number(&mut self) -> Result<usize, SpaceError> {
        let id = self.ident()?;
        id.parse().map_err(|_| self.err("expected a number"))
    }
    fn expr(&mut self) -> Result<ModuleExpr, SpaceError> {
        use ModuleExpr::*;
        let start = self.pos;
        let name = self.ident()?;
        let leaf = match name.as_str() {
            "V" => Some(StdV),
            "dualV" | "Vd" | "V*" => Some(DualV),
            "H" => Some(FullH),
            "U" => Some(SubmoduleU),
            "Ubar" => Some(SubmoduleUbar),
            "wedge3H_mod_H" => Some(QuotientByTripleA),
            "wedge2V_V_mod_wedge3V" => Some(QuotientWedge3V),
            "wedge2V_dualV_mod_V" => Some(QuotientByV),
            "W" => Some(SpaceW),
            "Wbar" => Some(SpaceWbar),
            "L3H" => Some(FreeLieDeg3),
            "wedge2_ubar" => Some(ModuleExpr::wedge(2, SubmoduleUbar)),
            "wedge2_u" => Some(ModuleExpr::wedge(2, SubmoduleU)),
            _ => None,
        };
        if let Some(e) = leaf {
            return Ok(e);
        }
        self.eat(b'(')?;
        let e = match name.as_str() {
            "tensor" => {
                let a = self.expr()?;
                let mut out = a;
                loop {
                    self.ws();
                    if self.pos < self.s.len() && self.s[self.pos] == b',' {
                        self.pos += 1;
                        let b = self.expr()?;
                        out = ModuleExpr::tensor(out, b);
                    } else {
                        break;
                    }
                }
                out
            }
            "wedge" | "sym" => {
                let k = self.number()?;
                self.eat(b',')?;
                let a = self.expr()?;
                if name == "wedge" {
                    ModuleExpr::wedge(k, a)
                } else {
                    ModuleExpr::sym(k, a)
                }
            }
            "sum" => {
                let mut parts = vec![self.expr()?];
                loop {
                    self.ws();
                    if self.pos < self.s.len() && self.s[self.pos] == b',' {
                        self.pos += 1;
                        parts.push(self.expr()?);
                    } else {
                        break;
                    }
                }
                DirectSum(parts)
            }
            _ => {
                self.pos = start;
                return Err(self.err(&format!("unknown space '{name}'")));
            }
        };
        self.eat(b')')?;
        Ok(e)
    }
}

/// Lie-algebra and group elements acting on H (indices 1-based, as in E_ij).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    /// E_ij: a_k ↦ δ_jk a_i, b_k ↦ −δ_ik b_j.
    E(usize, usize),
    /// X_i: a_i ↦ b_i.
    X(usize),
    /// X_ij: a_i ↦ b_j, a_j ↦ b_i.
    XSym(usize, usize),
    /// Diagonal Cartan element reading the i-th epsilon coordinate.
    Diag(usize),
    /// Handleswap a_i ↔ a_j, b_i ↔ b_j (acts as a group element).
    Swap(usize, usize),
}

impl Op {
    pub fn is_group(&self) -> bool {
        matches!(self, Op::Swap(..))
    }

    pub fn check(&self, g: usize) -> Result<(), SpaceError> {
        let ok = |i: usize| i >= 1 && i <= g;
        let valid = match *self {
            Op::E(i, j) | Op::Swap(i, j) | Op::XSym(i, j) => ok(i) && ok(j) && i != j,
            Op::X(i) | Op::Diag(i) => ok(i),
        };
        if valid {
            Ok(())
        } else {
            Err(SpaceError::Index(format!("{self} at g={g}")))
        }
    }

    /// Image of the generator `h` of H.
    pub fn on_generator(&self, g: usize, h: usize) -> Vec<(usize, i64)> {
        let is_a = h < g;
        let k = if is_a { h + 1 } else { h - g + 1 };
        match *self {
            Op::E(i, j) => {
                if is_a && k == j {
                    vec![(gen_a(g, i), 1)]
                } else if !is_a && k == i {
                    vec![(gen_b(g, j), -1)]
                } else {
                    vec![]
                }
            }
            Op::X(i) => {
                if is_a && k == i {
                    vec![(gen_b(g, i), 1)]
                } else {
                    vec![]
                }
            }
            Op::XSym(i, j) => {
                if is_a && k == i {
                    vec![(gen_b(g, j), 1)]
                } else if is_a && k == j {
                    vec![(gen_b(g, i), 1)]
                } else {
                    vec![]
                }
            }
            Op::Diag(i) => {
                if k != i {
                    vec![]
                } else if is_a {
                    vec![(h, 1)]
                } else {
                    vec![(h, -1)]
                }
            }
            Op::Swap(i, j) => {
                let t = if k == i {
                    j
                } else if k == j {
                    i
                } else {
                    k
                };
                vec![(if is_a { gen_a(g, t) } else { gen_b(g, t) }, 1)]
            }
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::E(i, j) => write!(f, "E({i},{j})"),
            Op::X(i) => write!(f, "X({i})"),
            Op::XSym(i, j) => write!(f, "X({i},{j})"),
            Op::Diag(i) => write!(f, "D({i})"),
            Op::Swap(i, j) => write!(f, "swap({i},{j})"),
        }
    }
}

/// A formal multilinear word in the generators of H, before it is read into
/// a particular space. Ungrouped products flatten; `Group` marks a factor
/// that belongs to an inner space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    One,
    Gen(usize),
    Wedge(Vec<Term>),
    Tensor(Vec<Term>),
    Group(Box<Term>),
    Lie(Box<Term>, Box<Term>),
}

impl Term {
    fn strip(&self) -> &Term {
        match self {
            Term::Group(t) => t.strip(),
            t => t,
        }
    }

    fn wedge_items(&self) -> Vec<Term> {
        match self {
            Term::One => vec![],
            Term::Wedge(v) => v.clone(),
            t => vec![t.clone()],
        }
    }

    fn tensor_items(&self) -> Vec<Term> {
        match self {
            Term::One => vec![],
            Term::Tensor(v) => v.clone(),
            t => vec![t.clone()],
        }
    }

    fn from_items(items: Vec<Term>, wedge: bool) -> Term {
        match items.len() {
            0 => Term::One,
            1 => items.into_iter().next().unwrap(),
            _ => {
                if wedge {
                    Term::Wedge(items)
                } else {
                    Term::Tensor(items)
                }
            }
        }
    }

    pub fn render(&self, g: usize) -> String {
        match self {
            Term::One => "1".into(),
            Term::Gen(h) => gen_name(g, *h),
            Term::Wedge(v) => v.iter().map(|t| t.render_factor(g)).collect::<Vec<_>>().join("^"),
            Term::Tensor(v) => v.iter().map(|t| t.render_factor(g)).collect::<Vec<_>>().join("@"),
            Term::Group(t) => format!("[{}]", t.render(g)),
            Term::Lie(a, b) => format!("lie({},{})", a.render(g), b.render(g)),
        }
    }

    fn render_factor(&self, g: usize) -> String {
        match self {
            Term::Wedge(_) | Term::Tensor(_) => format!("({})", self.render(g)),
            t => t.render(g),
        }
    }
}

/// Finite linear combination of terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Formal {
    pub terms: BTreeMap<Term, Rational>,
}

impl Formal {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn scalar(c: Rational) -> Self {
        let mut f = Self::zero();
        f.add_term(Term::One, c);
        f
    }
    pub fn term(t: Term) -> Self {
        let mut f = Self::zero();
        f.add_term(t, Rational::one());
        f
    }
    pub fn gen(h: usize) -> Self {
        Self::term(Term::Gen(h))
    }
    pub fn a(g: usize, k: usize) -> Self {
        Self::gen(gen_a(g, k))
    }
    pub fn b(g: usize, k: usize) -> Self {
        Self::gen(gen_b(g, k))
    }
    pub fn omega(g: usize) -> Self {
        let mut f = Self::zero();
        for i in 1..=g {
            f = f.add(&Self::a(g, i).wedge(&Self::b(g, i)));
        }
        f
    }
    pub fn from_ext(v: &ExtVec) -> Self {
        let mut f = Self::zero();
        for (m, c) in v {
            let t = Term::from_items(m.iter().map(|h| Term::Gen(*h)).collect(), true);
            f.add_term(t, c.clone());
        }
        f
    }
    pub fn add_term(&mut self, t: Term, c: Rational) {
        if c.is_zero() {
            return;
        }
        let remove = {
            let e = self.terms.entry(t.clone()).or_insert_with(Rational::zero);
            *e += c;
            e.is_zero()
        };
        if remove {
            self.terms.remove(&t);
        }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn add(&self, o: &Formal) -> Formal {
        let mut out = self.clone();
        for (t, c) in &o.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }
    pub fn sub(&self, o: &Formal) -> Formal {
        self.add(&o.scale(&-Rational::one()))
    }
    pub fn scale(&self, c: &Rational) -> Formal {
        let mut out = Formal::zero();
        for (t, x) in &self.terms {
            out.add_term(t.clone(), x * c);
        }
        out
    }
    /// The scalar value, if this is a multiple of `One`.
    pub fn as_scalar(&self) -> Option<Rational> {
        if self.terms.is_empty() {
            return Some(Rational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Term::One) {
                return Some(c.clone());
            }
        }
        None
    }
    fn product<F: Fn(&Term, &Term) -> Term>(&self, o: &Formal, f: F) -> Formal {
        let mut out = Formal::zero();
        for (s, cs) in &self.terms {
            for (t, ct) in &o.terms {
                out.add_term(f(s, t), cs * ct);
            }
        }
        out
    }
    pub fn wedge(&self, o: &Formal) -> Formal {
        self.product(o, |s, t| {
            let mut items = s.wedge_items();
            items.extend(t.wedge_items());
            Term::from_items(items, true)
        })
    }
    pub fn tensor(&self, o: &Formal) -> Formal {
        self.product(o, |s, t| {
            let mut items = s.tensor_items();
            items.extend(t.tensor_items());
            Term::from_items(items, false)
        })
    }
    /// (x)↔(y) = x⊗y + y⊗x.
    pub fn sym_product(&self, o: &Formal) -> Formal {
        self.tensor(o).add(&o.tensor(self))
    }
    pub fn lie(&self, o: &Formal) -> Formal {
        self.product(o, |s, t| Term::Lie(Box::new(s.clone()), Box::new(t.clone())))
    }
    pub fn group(&self) -> Formal {
        let mut out = Formal::zero();
        for (t, c) in &self.terms {
            let t = match t {
                Term::Group(_) | Term::Gen(_) | Term::One => t.clone(),
                t => Term::Group(Box::new(t.clone())),
            };
            out.add_term(t, c.clone());
        }
        out
    }
    pub fn render(&self, g: usize) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms.iter().map(|(t, c)| format!("{}*{}", fmt_rational(c), t.render(g))).collect::<Vec<_>>().join(" + ")
    }
}

fn expand_lie(t: &Term) -> Formal {
    match t {
        Term::Lie(x, y) => {
            let fx = expand_lie(x);
            let fy = expand_lie(y);
            fx.tensor(&fy).sub(&fy.tensor(&fx))
        }
        Term::Group(x) => expand_lie(x),
        Term::Tensor(v) => {
            let mut acc = Formal::scalar(Rational::one());
            for x in v {
                acc = acc.tensor(&expand_lie(x));
            }
            acc
        }
        t => Formal::term(t.clone()),
    }
}

fn contains_lie(t: &Term) -> bool {
    match t {
        Term::Lie(..) => true,
        Term::Group(x) => contains_lie(x),
        Term::Tensor(v) | Term::Wedge(v) => v.iter().any(contains_lie),
        _ => false,
    }
}

enum Kind {
    Leaf {
        pos: HashMap<usize, usize>,
        gens: Vec<usize>,
    },
    Tensor {
        left: Arc<ModuleSpace>,
        right: Arc<ModuleSpace>,
    },
    Power {
        alt: bool,
        k: usize,
        inner: Arc<ModuleSpace>,
        elems: Vec<Vec<usize>>,
        index: HashMap<Vec<usize>, usize>,
    },
    Sum {
        parts: Vec<Arc<ModuleSpace>>,
        offsets: Vec<usize>,
    },
    Sub {
        parent: Arc<ModuleSpace>,
        picks: Vec<usize>,
        index: HashMap<usize, usize>,
    },
    Span {
        parent: Arc<ModuleSpace>,
        lifts: Vec<SparseVector>,
        labels: Vec<String>,
        solver: SpanSolver,
        gen_to_basis: HashMap<usize, usize>,
        q_project: bool,
    },
    Quot {
        parent: Arc<ModuleSpace>,
        reps: Vec<usize>,
        index: HashMap<usize, usize>,
        sub: Echelon,
    },
}

/// A constructed representation with an ordered basis of weight vectors.
pub struct ModuleSpace {
    expr: ModuleExpr,
    g: usize,
    kind: Kind,
    weights: Vec<Vec<i32>>,
    cache: Mutex<HashMap<(Op, usize), SparseVector>>,
}

impl fmt::Debug for ModuleSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModuleSpace({}, g={}, dim={})", self.expr, self.g, self.dim())
    }
}

type Registry = Mutex<HashMap<(ModuleExpr, usize), Arc<ModuleSpace>>>;

fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Builds (or fetches the memoized) space for `expr` at genus `g`.
pub fn build(expr: &ModuleExpr, g: usize) -> Result<Arc<ModuleSpace>, SpaceError> {
    if let Some(s) = registry().lock().unwrap().get(&(expr.clone(), g)) {
        return Ok(s.clone());
    }
    let s = Arc::new(ModuleSpace::construct(expr, g)?);
    let mut reg = registry().lock().unwrap();
    Ok(reg.entry((expr.clone(), g)).or_insert(s).clone())
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

pub fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Number of distinct orderings of a sorted multiset.
pub fn arrangements(m: &[usize]) -> u64 {
    let mut fact = 1u64;
    for i in 2..=m.len() as u64 {
        fact *= i;
    }
    let mut i = 0;
    while i < m.len() {
        let mut j = i;
        while j < m.len() && m[j] == m[i] {
            j += 1;
        }
        for t in 2..=(j - i) as u64 {
            fact /= t;
        }
        i = j;
    }
    fact
}

fn distinct_permutations(m: &[usize]) -> Vec<Vec<usize>> {
    let mut v = m.to_vec();
    v.sort();
    let mut out = vec![v.clone()];
    loop {
        let n = v.len();
        if n < 2 {
            break;
        }
        let mut i = n - 1;
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = n - 1;
        while v[j] <= v[i - 1] {
            j -= 1;
        }
        v.swap(i - 1, j);
        v[i..].reverse();
        out.push(v.clone());
    }
    out
}

fn add_vec(out: &mut SparseVector, v: &SparseVector, c: &Rational) {
    out.add_scaled(v, c);
}

fn lyndon_words3(n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let w = [x, y, z];
                let r1 = [y, z, x];
                let r2 = [z, x, y];
                if w < r1 && w < r2 {
                    out.push(w);
                }
            }
        }
    }
    out
}

impl ModuleSpace {
    fn with_kind(expr: &ModuleExpr, g: usize, kind: Kind, weights: Vec<Vec<i32>>) -> Self {
        ModuleSpace { expr: expr.clone(), g, kind, weights, cache: Mutex::new(HashMap::new()) }
    }

    fn construct(expr: &ModuleExpr, g: usize) -> Result<ModuleSpace, SpaceError> {
        use ModuleExpr as M;
        if g < 2 {
            return Err(SpaceError::Unsupported(format!("{expr} needs g >= 2")));
        }
        let leaf = |gens: Vec<usize>| {
            let pos = gens.iter().enumerate().map(|(i, h)| (*h, i)).collect();
            let weights = gens
                .iter()
                .map(|&h| {
                    let mut w = vec![0i32; g];
                    if h < g {
                        w[h] = 1;
                    } else {
                        w[h - g] = -1;
                    }
                    w
                })
                .collect();
            ModuleSpace::with_kind(expr, g, Kind::Leaf { pos, gens }, weights)
        };
        let h3 = || build(&M::wedge(3, M::FullH), g);
        Ok(match expr {
            M::StdV => leaf((0..g).collect()),
            M::DualV => leaf((g..2 * g).collect()),
            M::FullH => leaf((0..2 * g).collect()),
            M::Tensor(a, b) => {
                let left = build(a, g)?;
                let right = build(b, g)?;
                let mut weights = Vec::with_capacity(left.dim() * right.dim());
                for wl in &left.weights {
                    for wr in &right.weights {
                        weights.push(wl.iter().zip(wr).map(|(x, y)| x + y).collect());
                    }
                }
                ModuleSpace::with_kind(expr, g, Kind::Tensor { left, right }, weights)
            }
            M::Wedge(k, a) | M::Sym(k, a) => {
                let alt = matches!(expr, M::Wedge(..));
                let inner = build(a, g)?;
                let elems = if alt { subsets(inner.dim(), *k) } else { multisets(inner.dim(), *k) };
                let index = elems.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
                let weights = elems
                    .iter()
                    .map(|e| {
                        let mut w = vec![0i32; g];
                        for &x in e {
                            for (t, c) in inner.weights[x].iter().enumerate() {
                                w[t] += c;
                            }
                        }
                        w
                    })
                    .collect();
                ModuleSpace::with_kind(expr, g, Kind::Power { alt, k: *k, inner, elems, index }, weights)
            }
            M::DirectSum(list) => {
                let parts: Vec<Arc<ModuleSpace>> = list.iter().map(|e| build(e, g)).collect::<Result<_, _>>()?;
                let mut offsets = Vec::new();
                let mut weights = Vec::new();
                for p in &parts {
                    offsets.push(weights.len());
                    weights.extend(p.weights.iter().cloned());
                }
                ModuleSpace::with_kind(expr, g, Kind::Sum { parts, offsets }, weights)
            }
            M::SpaceW => {
                let e = M::DirectSum(vec![M::tensor(M::wedge(2, M::StdV), M::DualV), M::sym(2, M::DualV)]);
                let inner = build(&e, g)?;
                return ModuleSpace::alias(expr, g, &inner);
            }
            M::SpaceWbar => {
                if g < 3 {
                    return Err(SpaceError::Unsupported("Wbar needs g >= 3".into()));
                }
                let e = M::DirectSum(vec![M::QuotientByV, M::sym(2, M::DualV)]);
                let inner = build(&e, g)?;
                return ModuleSpace::alias(expr, g, &inner);
            }
            M::SubmoduleU => {
                let parent = h3()?;
                let picks: Vec<usize> = match &parent.kind {
                    Kind::Power { elems, .. } => (0..elems.len()).filter(|&i| elems[i].iter().any(|&h| h >= g)).collect(),
                    _ => unreachable!(),
                };
                let index = picks.iter().enumerate().map(|(i, p)| (*p, i)).collect();
                let weights = picks.iter().map(|&p| parent.weights[p].clone()).collect();
                ModuleSpace::with_kind(expr, g, Kind::Sub { parent, picks, index }, weights)
            }
            M::SubmoduleUbar | M::QuotientByTripleA => {
                let parent = h3()?;
                let only_u = matches!(expr, M::SubmoduleUbar);
                let mut cands = Vec::new();
                if let Kind::Power { elems, .. } = &parent.kind {
                    for (i, e) in elems.iter().enumerate() {
                        if only_u && e.iter().all(|&h| h < g) {
                            continue;
                        }
                        let v = parent.q_of_index(i);
                        let label = format!("q({})", e.iter().map(|h| gen_name(g, *h)).collect::<Vec<_>>().join("^"));
                        cands.push((label, v));
                    }
                }
                ModuleSpace::span(expr, g, parent, cands, true)
            }
            M::FreeLieDeg3 => {
                let parent = build(&M::tensor(M::FullH, M::tensor(M::FullH, M::FullH)), g)?;
                let mut cands = Vec::new();
                for w in lyndon_words3(2 * g) {
                    let gens: Vec<Formal> = w.iter().map(|&h| Formal::gen(h)).collect();
                    let (lie, label) = if w[1] < w[2] {
                        (gens[0].lie(&gens[1].lie(&gens[2])), format!("lie({},lie({},{}))", gen_name(g, w[0]), gen_name(g, w[1]), gen_name(g, w[2])))
                    } else {
                        (gens[0].lie(&gens[1]).lie(&gens[2]), format!("lie(lie({},{}),{})", gen_name(g, w[0]), gen_name(g, w[1]), gen_name(g, w[2])))
                    };
                    cands.push((label, parent.embed(&lie)?));
                }
                ModuleSpace::span(expr, g, parent, cands, false)
            }
            M::QuotientWedge3V => {
                if g < 3 {
                    return Err(SpaceError::Unsupported("needs g >= 3".into()));
                }
                let parent = build(&M::tensor(M::wedge(2, M::StdV), M::StdV), g)?;
                let mut sub = Vec::new();
                for s in subsets(g, 3) {
                    let [x, y, z] = [s[0] + 1, s[1] + 1, s[2] + 1];
                    let a = |k| Formal::a(g, k);
                    let f = a(x).wedge(&a(y)).tensor(&a(z)).add(&a(y).wedge(&a(z)).tensor(&a(x))).add(&a(z).wedge(&a(x)).tensor(&a(y)));
                    sub.push(parent.embed(&f)?);
                }
                ModuleSpace::quotient(expr, g, parent, sub)?
            }
            M::QuotientByV => {
                if g < 3 {
                    return Err(SpaceError::Unsupported("needs g >= 3".into()));
                }
                let parent = build(&M::tensor(M::wedge(2, M::StdV), M::DualV), g)?;
                let mut sub = Vec::new();
                for i in 1..=g {
                    let mut f = Formal::zero();
                    for k in (1..=g).filter(|&k| k != i) {
                        f = f.add(&Formal::a(g, i).wedge(&Formal::a(g, k)).tensor(&Formal::b(g, k)));
                    }
                    sub.push(parent.embed(&f)?);
                }
                ModuleSpace::quotient(expr, g, parent, sub)?
            }
        })
    }

    fn alias(expr: &ModuleExpr, g: usize, inner: &Arc<ModuleSpace>) -> Result<ModuleSpace, SpaceError> {
        let kind = match &inner.kind {
            Kind::Sum { parts, offsets } => Kind::Sum { parts: parts.clone(), offsets: offsets.clone() },
            _ => unreachable!(),
        };
        Ok(ModuleSpace::with_kind(expr, g, kind, inner.weights.clone()))
    }

    fn span(expr: &ModuleExpr, g: usize, parent: Arc<ModuleSpace>, cands: Vec<(String, SparseVector)>, q_project: bool) -> ModuleSpace {
        let mut solver = SpanSolver::new();
        let mut lifts = Vec::new();
        let mut labels = Vec::new();
        let mut gen_to_basis = HashMap::new();
        let mut weights = Vec::new();
        for (label, v) in cands {
            let id = solver.generators();
            if solver.push(&v) {
                gen_to_basis.insert(id, lifts.len());
                let w = v.leading().map(|(i, _)| parent.weights[i].clone()).unwrap();
                weights.push(w);
                lifts.push(v);
                labels.push(label);
            }
        }
        ModuleSpace::with_kind(expr, g, Kind::Span { parent, lifts, labels, solver, gen_to_basis, q_project }, weights)
    }

    fn quotient(expr: &ModuleExpr, g: usize, parent: Arc<ModuleSpace>, sub: Vec<SparseVector>) -> Result<ModuleSpace, SpaceError> {
        let sub = Echelon::from_rows(sub);
        let reps: Vec<usize> = (0..parent.dim()).filter(|&i| !sub.is_pivot(i)).collect();
        let index = reps.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let weights = reps.iter().map(|&r| parent.weights[r].clone()).collect();
        Ok(ModuleSpace::with_kind(expr, g, Kind::Quot { parent, reps, index, sub }, weights))
    }

    fn q_of_index(&self, i: usize) -> SparseVector {
        let ext = self.to_ext(&SparseVector::unit(i)).expect("wedge of H");
        let q = exterior::q_project(self.g, &ext);
        self.from_ext(&q).expect("q lands in the same wedge power")
    }

    pub fn expr(&self) -> &ModuleExpr {
        &self.expr
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn x_actionable(&self) -> bool {
        self.expr.x_actionable()
    }

    /// Weight of a basis vector in epsilon coordinates (a_k ↦ +L_k, b_k ↦ −L_k).
    pub fn weight_eps(&self, i: usize) -> &[i32] {
        &self.weights[i]
    }

    pub fn weights_eps(&self) -> &[Vec<i32>] {
        &self.weights
    }

    /// Weight of a basis vector in SL_g fundamental coordinates.
    pub fn weight_of(&self, i: usize) -> Vec<i32> {
        crate::characters::eps_to_fund(crate::characters::Algebra::A, &self.weights[i])
    }

    /// Basis indices grouped by SL_g weight.
    pub fn weight_spaces(&self) -> BTreeMap<Vec<i32>, Vec<usize>> {
        let mut out: BTreeMap<Vec<i32>, Vec<usize>> = BTreeMap::new();
        for i in 0..self.dim() {
            out.entry(self.weight_of(i)).or_default().push(i);
        }
        out
    }

    /// Number of tensor factors a flat `@`-product must supply for this space.
    pub fn arity(&self) -> usize {
        match &self.kind {
            Kind::Leaf { .. } => 1,
            Kind::Tensor { left, right } => left.arity() + right.arity(),
            Kind::Power { alt: true, .. } => 1,
            Kind::Power { alt: false, k, inner, .. } => k * inner.arity(),
            Kind::Sum { parts, .. } => parts.first().map_or(1, |p| p.arity()),
            Kind::Sub { parent, .. } | Kind::Span { parent, .. } | Kind::Quot { parent, .. } => parent.arity(),
        }
    }

    /// For spaces realized inside a parent, the parent.
    pub fn parent(&self) -> Option<&Arc<ModuleSpace>> {
        match &self.kind {
            Kind::Sub { parent, .. } | Kind::Span { parent, .. } | Kind::Quot { parent, .. } => Some(parent),
            _ => None,
        }
    }

    /// The inner space of a wedge or symmetric power.
    pub fn power_inner(&self) -> Option<(bool, usize, &Arc<ModuleSpace>)> {
        match &self.kind {
            Kind::Power { alt, k, inner, .. } => Some((*alt, *k, inner)),
            _ => None,
        }
    }

    pub fn power_elem(&self, i: usize) -> Option<&[usize]> {
        match &self.kind {
            Kind::Power { elems, .. } => Some(&elems[i]),
            _ => None,
        }
    }

    pub fn power_index(&self, e: &[usize]) -> Option<usize> {
        match &self.kind {
            Kind::Power { index, .. } => index.get(e).copied(),
            _ => None,
        }
    }

    pub fn tensor_parts(&self) -> Option<(&Arc<ModuleSpace>, &Arc<ModuleSpace>)> {
        match &self.kind {
            Kind::Tensor { left, right } => Some((left, right)),
            _ => None,
        }
    }

    pub fn sum_parts(&self) -> Option<(&[Arc<ModuleSpace>], &[usize])> {
        match &self.kind {
            Kind::Sum { parts, offsets } => Some((parts, offsets)),
            _ => None,
        }
    }

    /// Whether this is H itself.
    pub fn is_full_h(&self) -> bool {
        self.expr == ModuleExpr::FullH
    }

    pub fn leaf_generator(&self, i: usize) -> Option<usize> {
        match &self.kind {
            Kind::Leaf { gens, .. } => Some(gens[i]),
            _ => None,
        }
    }

    pub fn label(&self, i: usize) -> String {
        match &self.kind {
            Kind::Leaf { gens, .. } => gen_name(self.g, gens[i]),
            Kind::Tensor { left, right } => {
                let r = right.dim();
                format!("({})@({})", left.label(i / r), right.label(i % r))
            }
            Kind::Power { alt, inner, elems, .. } => {
                let e = &elems[i];
                if e.is_empty() {
                    return "1".into();
                }
                let leafy = matches!(inner.kind, Kind::Leaf { .. });
                if *alt {
                    let parts: Vec<String> = e.iter().map(|x| if leafy { inner.label(*x) } else { format!("[{}]", inner.label(*x)) }).collect();
                    parts.join("^")
                } else {
                    let parts: Vec<String> = e.iter().map(|x| inner.label(*x)).collect();
                    format!("sym({})", parts.join(","))
                }
            }
            Kind::Sum { parts, offsets } => {
                let p = offsets.iter().rposition(|&o| o <= i).unwrap();
                parts[p].label(i - offsets[p])
            }
            Kind::Sub { parent, picks, .. } => parent.label(picks[i]),
            Kind::Span { labels, .. } => labels[i].clone(),
            Kind::Quot { parent, reps, .. } => format!("[{}]", parent.label(reps[i])),
        }
    }

    pub fn format_vec(&self, v: &SparseVector) -> String {
        if v.is_zero() {
            return "0".into();
        }
        v.iter().map(|(i, c)| format!("{}*{}", fmt_rational(c), self.label(i))).collect::<Vec<_>>().join(" + ")
    }

    fn check_index(&self, i: usize) -> Result<(), SpaceError> {
        if i < self.dim() {
            Ok(())
        } else {
            Err(SpaceError::Index(format!("basis index {i} in {}", self.expr)))
        }
    }

    /// Image of basis vector `i` under `op`.
    pub fn act_basis(&self, op: Op, i: usize) -> Result<SparseVector, SpaceError> {
        op.check(self.g)?;
        self.check_index(i)?;
        if matches!(op, Op::X(_) | Op::XSym(..)) && !self.x_actionable() {
            return Err(SpaceError::NotActionable(op.to_string(), self.expr.to_string()));
        }
        let cached = matches!(self.kind, Kind::Sub { .. } | Kind::Span { .. } | Kind::Quot { .. });
        if cached {
            if let Some(v) = self.cache.lock().unwrap().get(&(op, i)) {
                return Ok(v.clone());
            }
        }
        let v = self.act_basis_uncached(op, i)?;
        if cached {
            self.cache.lock().unwrap().insert((op, i), v.clone());
        }
        Ok(v)
    }

    fn act_basis_uncached(&self, op: Op, i: usize) -> Result<SparseVector, SpaceError> {
        let g = self.g;
        match &self.kind {
            Kind::Leaf { pos, gens } => {
                let mut out = SparseVector::new();
                for (h, c) in op.on_generator(g, gens[i]) {
                    match pos.get(&h) {
                        Some(&j) => out.add_at(j, &rat(c)),
                        None => return Err(SpaceError::NotActionable(op.to_string(), self.expr.to_string())),
                    }
                }
                Ok(out)
            }
            Kind::Tensor { left, right } => {
                let r = right.dim();
                let (li, ri) = (i / r, i % r);
                let lv = left.act_basis(op, li)?;
                let rv = right.act_basis(op, ri)?;
                let mut out = SparseVector::new();
                if op.is_group() {
                    for (x, cx) in lv.iter() {
                        for (y, cy) in rv.iter() {
                            out.add_at(x * r + y, &(cx * cy));
                        }
                    }
                } else {
                    for (x, c) in lv.iter() {
                        out.add_at(x * r + ri, c);
                    }
                    for (y, c) in rv.iter() {
                        out.add_at(li * r + y, c);
                    }
                }
                Ok(out)
            }
            Kind::Power { alt, inner, elems, index, .. } => {
                let e = &elems[i];
                let mut out = SparseVector::new();
                if op.is_group() {
                    let images: Vec<SparseVector> = e.iter().map(|&x| inner.act_basis(op, x)).collect::<Result<_, _>>()?;
                    if *alt {
                        for (m, c) in expand_alt(&images) {
                            out.add_at(index[&m], &c);
                        }
                    } else {
                        for arr in distinct_permutations(e) {
                            let imgs: Vec<&SparseVector> = arr.iter().map(|x| &images[e.iter().position(|y| y == x).unwrap()]).collect();
                            for (word, c) in expand_tensor(&imgs) {
                                let mut m = word.clone();
                                m.sort();
                                let a = arrangements(&m);
                                out.add_at(index[&m], &(c / rat(a as i64)));
                            }
                        }
                    }
                    return Ok(out);
                }
                if *alt {
                    for p in 0..e.len() {
                        let img = inner.act_basis(op, e[p])?;
                        let rest: Vec<usize> = e.iter().enumerate().filter(|(t, _)| *t != p).map(|(_, x)| *x).collect();
                        for (y, c) in img.iter() {
                            if rest.contains(&y) {
                                continue;
                            }
                            let pos = rest.partition_point(|&z| z < y);
                            let mut m = rest.clone();
                            m.insert(pos, y);
                            let neg = (p as isize - pos as isize).abs() % 2 == 1;
                            out.add_at(index[&m], &if neg { -c.clone() } else { c.clone() });
                        }
                    }
                } else {
                    let mut seen = Vec::new();
                    for (p, &x) in e.iter().enumerate() {
                        if seen.contains(&x) {
                            continue;
                        }
                        seen.push(x);
                        let img = inner.act_basis(op, x)?;
                        for (y, c) in img.iter() {
                            let mut m = e.clone();
                            m.remove(p);
                            let pos = m.partition_point(|&z| z <= y);
                            m.insert(pos, y);
                            let mult = m.iter().filter(|&&z| z == y).count() as i64;
                            out.add_at(index[&m], &(c * rat(mult)));
                        }
                    }
                }
                Ok(out)
            }
            Kind::Sum { parts, offsets } => {
                let p = offsets.iter().rposition(|&o| o <= i).unwrap();
                let v = parts[p].act_basis(op, i - offsets[p])?;
                Ok(v.map_indices(|j| j + offsets[p]))
            }
            Kind::Sub { parent, picks, index } => {
                let v = parent.act_basis(op, picks[i])?;
                let mut out = SparseVector::new();
                for (j, c) in v.iter() {
                    match index.get(&j) {
                        Some(&t) => out.add_at(t, c),
                        None => return Err(SpaceError::NotActionable(op.to_string(), self.expr.to_string())),
                    }
                }
                Ok(out)
            }
            Kind::Span { parent, lifts, .. } => {
                let v = parent.act(op, &lifts[i])?;
                self.solve_in_span(&v).ok_or_else(|| SpaceError::NotActionable(op.to_string(), self.expr.to_string()))
            }
            Kind::Quot { parent, reps, .. } => {
                let v = parent.act_basis(op, reps[i])?;
                self.reduce_quot(&v)
            }
        }
    }

    /// Image of an arbitrary vector under `op`.
    pub fn act(&self, op: Op, v: &SparseVector) -> Result<SparseVector, SpaceError> {
        let mut out = SparseVector::new();
        for (i, c) in v.iter() {
            add_vec(&mut out, &self.act_basis(op, i)?, c);
        }
        Ok(out)
    }

    pub fn act_e(&self, i: usize, j: usize, v: &SparseVector) -> Result<SparseVector, SpaceError> {
        self.act(Op::E(i, j), v)
    }

    pub fn act_x(&self, i: usize, v: &SparseVector) -> Result<SparseVector, SpaceError> {
        self.act(Op::X(i), v)
    }

    pub fn handleswap(&self, i: usize, j: usize, v: &SparseVector) -> Result<SparseVector, SpaceError> {
        self.act(Op::Swap(i, j), v)
    }

    fn solve_in_span(&self, v: &SparseVector) -> Option<SparseVector> {
        match &self.kind {
            Kind::Span { solver, gen_to_basis, .. } => {
                let c = solver.solve(v)?;
                Some(c.map_indices(|id| gen_to_basis[&id]))
            }
            _ => None,
        }
    }

    fn reduce_quot(&self, v: &SparseVector) -> Result<SparseVector, SpaceError> {
        match &self.kind {
            Kind::Quot { index, sub, .. } => {
                let r = sub.reduce(v);
                let mut out = SparseVector::new();
                for (j, c) in r.iter() {
                    out.add_at(index[&j], c);
                }
                Ok(out)
            }
            _ => unreachable!(),
        }
    }

    /// Reads a parent vector into this derived space (projecting by q where
    /// the space is realized as the image of q).
    pub fn from_parent(&self, v: &SparseVector) -> Result<SparseVector, SpaceError> {
        match &self.kind {
            Kind::Sub { index, .. } => {
                let mut out = SparseVector::new();
                for (j, c) in v.iter() {
                    match index.get(&j) {
                        Some(&t) => out.add_at(t, c),
                        None => return Err(SpaceError::NotInSpace(self.expr.to_string())),
                    }
                }
                Ok(out)
            }
            Kind::Span { parent, q_project, .. } => {
                let w = if *q_project {
                    let ext = parent.to_ext(v).ok_or_else(|| SpaceError::NotInSpace(self.expr.to_string()))?;
                    parent.from_ext(&exterior::q_project(self.g, &ext))?
                } else {
                    v.clone()
                };
                self.solve_in_span(&w).ok_or_else(|| SpaceError::NotInSpace(self.expr.to_string()))
            }
            Kind::Quot { .. } => self.reduce_quot(v),
            _ => Ok(v.clone()),
        }
    }

    /// Representative in the parent space (the identity for non-derived spaces).
    pub fn to_parent(&self, v: &SparseVector) -> SparseVector {
        match &self.kind {
            Kind::Sub { picks, .. } => v.map_indices(|i| picks[i]),
            Kind::Span { lifts, .. } => {
                let mut out = SparseVector::new();
                for (i, c) in v.iter() {
                    out.add_scaled(&lifts[i], c);
                }
                out
            }
            Kind::Quot { reps, .. } => v.map_indices(|i| reps[i]),
            _ => v.clone(),
        }
    }

    /// If this space is ∧ᵏH, or lives inside it, the exterior-algebra form of `v`.
    pub fn to_ext(&self, v: &SparseVector) -> Option<ExtVec> {
        match &self.kind {
            Kind::Power { alt: true, inner, elems, .. } if inner.is_full_h() => {
                let mut out = ExtVec::new();
                for (i, c) in v.iter() {
                    exterior::add_term(&mut out, elems[i].clone(), c);
                }
                Some(out)
            }
            Kind::Sub { parent, .. } | Kind::Span { parent, .. } => parent.to_ext(&self.to_parent(v)),
            _ => None,
        }
    }

    /// Degree k when this space is ∧ᵏH or a subquotient realized inside it.
    pub fn ext_degree(&self) -> Option<usize> {
        match &self.kind {
            Kind::Power { alt: true, inner, k, .. } if inner.is_full_h() => Some(*k),
            Kind::Sub { parent, .. } | Kind::Span { parent, .. } => parent.ext_degree(),
            _ => None,
        }
    }

    pub fn from_ext(&self, v: &ExtVec) -> Result<SparseVector, SpaceError> {
        match &self.kind {
            Kind::Power { alt: true, inner, index, k, .. } if inner.is_full_h() => {
                let mut out = SparseVector::new();
                for (m, c) in v {
                    if m.len() != *k {
                        return Err(SpaceError::NotInSpace(self.expr.to_string()));
                    }
                    out.add_at(index[m], c);
                }
                Ok(out)
            }
            Kind::Sub { parent, .. } | Kind::Span { parent, .. } => self.from_parent(&parent.from_ext(v)?),
            _ => Err(SpaceError::NotInSpace(self.expr.to_string())),
        }
    }

    /// Reads a formal expression into this space.
    pub fn embed(&self, f: &Formal) -> Result<SparseVector, SpaceError> {
        if let Kind::Span { parent, q_project: false, .. } = &self.kind {
            let mut pv = SparseVector::new();
            for (t, c) in &f.terms {
                let lifted = expand_lie(t);
                pv.add_scaled(&parent.embed(&lifted)?, c);
            }
            return self.from_parent(&pv);
        }
        let mut out = SparseVector::new();
        for (t, c) in &f.terms {
            out.add_scaled(&self.embed_term(t)?, c);
        }
        Ok(out)
    }

    fn shape_err(&self, t: &Term) -> SpaceError {
        SpaceError::Shape(t.render(self.g), self.expr.to_string())
    }

    pub fn embed_term(&self, t: &Term) -> Result<SparseVector, SpaceError> {
        let t = t.strip();
        if contains_lie(t) && !matches!(self.kind, Kind::Tensor { .. } | Kind::Span { .. }) {
            return self.embed(&expand_lie(t));
        }
        match &self.kind {
            Kind::Leaf { pos, .. } => match t {
                Term::Gen(h) => pos.get(h).map(|&i| SparseVector::unit(i)).ok_or_else(|| self.shape_err(t)),
                _ => Err(self.shape_err(t)),
            },
            Kind::Tensor { left, right } => {
                if let Term::Lie(..) = t {
                    return self.embed(&expand_lie(t));
                }
                let items = match t {
                    Term::Tensor(v) => v.clone(),
                    _ => return Err(self.shape_err(t)),
                };
                let split = if items.len() == 2 { 1 } else { left.arity() };
                if split == 0 || split >= items.len() {
                    return Err(self.shape_err(t));
                }
                let lt = Term::from_items(items[..split].to_vec(), false);
                let rt = Term::from_items(items[split..].to_vec(), false);
                let lv = left.embed_term(&lt)?;
                let rv = right.embed_term(&rt)?;
                let r = right.dim();
                let mut out = SparseVector::new();
                for (x, cx) in lv.iter() {
                    for (y, cy) in rv.iter() {
                        out.add_at(x * r + y, &(cx * cy));
                    }
                }
                Ok(out)
            }
            Kind::Power { alt, k, inner, index, .. } => {
                let mut items = if *alt { t.wedge_items() } else { t.tensor_items() };
                if !*alt && items.len() != *k && inner.arity() > 1 && items.len() == k * inner.arity() {
                    let a = inner.arity();
                    items = items.chunks(a).map(|c| Term::from_items(c.to_vec(), false)).collect();
                }
                if items.len() != *k {
                    return Err(self.shape_err(t));
                }
                let vecs: Vec<SparseVector> = items.iter().map(|x| inner.embed_term(x)).collect::<Result<_, _>>()?;
                let mut out = SparseVector::new();
                if *alt {
                    for (m, c) in expand_alt(&vecs) {
                        out.add_at(index[&m], &c);
                    }
                } else {
                    let refs: Vec<&SparseVector> = vecs.iter().collect();
                    for (word, c) in expand_tensor(&refs) {
                        let mut m = word;
                        m.sort();
                        let a = arrangements(&m);
                        out.add_at(index[&m], &(c / rat(a as i64)));
                    }
                }
                Ok(out)
            }
            Kind::Sum { parts, offsets } => {
                for (p, off) in parts.iter().zip(offsets) {
                    if let Ok(v) = p.embed_term(t) {
                        return Ok(v.map_indices(|j| j + off));
                    }
                }
                Err(self.shape_err(t))
            }
            Kind::Sub { parent, .. } | Kind::Quot { parent, .. } => {
                let v = parent.embed_term(t)?;
                self.from_parent(&v)
            }
            Kind::Span { parent, .. } => {
                let v = parent.embed(&expand_lie(t))?;
                self.from_parent(&v)
            }
        }
    }

    /// Applies a linear map given on basis vectors to `v`.
    pub fn map_linear<F>(&self, v: &SparseVector, mut f: F) -> Result<SparseVector, SpaceError>
    where
        F: FnMut(usize) -> Result<SparseVector, SpaceError>,
    {
        let mut out = SparseVector::new();
        for (i, c) in v.iter() {
            out.add_scaled(&f(i)?, c);
        }
        Ok(out)
    }
}

/// Expands x_1 ∧ … ∧ x_k over sorted index lists with signs.
pub fn expand_alt(vecs: &[SparseVector]) -> Vec<(Vec<usize>, Rational)> {
    let mut acc: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    acc.insert(vec![], Rational::one());
    for v in vecs {
        let mut next: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (m, c) in &acc {
            for (y, cy) in v.iter() {
                if m.contains(&y) {
                    continue;
                }
                let pos = m.partition_point(|&z| z < y);
                let mut m2 = m.clone();
                m2.insert(pos, y);
                let neg = (m.len() - pos) % 2 == 1;
                let val = c * cy;
                let e = next.entry(m2).or_insert_with(Rational::zero);
                if neg {
                    *e -= val;
                } else {
                    *e += val;
                }
            }
        }
        next.retain(|_, c| !c.is_zero());
        acc = next;
    }
    acc.into_iter().collect()
}

/// Expands x_1 ⊗ … ⊗ x_k over index words.
pub fn expand_tensor(vecs: &[&SparseVector]) -> Vec<(Vec<usize>, Rational)> {
    let mut acc: Vec<(Vec<usize>, Rational)> = vec![(vec![], Rational::one())];
    for v in vecs {
        let mut next = Vec::new();
        for (m, c) in &acc {
            for (y, cy) in v.iter() {
                let mut m2 = m.clone();
                m2.push(y);
                next.push((m2, c * cy));
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{eps_to_fund, Algebra};
    use proptest::prelude::*;

    fn sp(text: &str, g: usize) -> Arc<ModuleSpace> {
        build(&ModuleExpr::parse(text).unwrap(), g).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(sp("wedge(3,H)", 3).dim(), 20);
        assert_eq!(sp("U", 3).dim(), 19);
        assert_eq!(sp("U", 6).dim(), 200);
        assert_eq!(sp("Ubar", 3).dim(), 13);
        assert_eq!(sp("W", 3).dim(), 15);
        assert_eq!(sp("Wbar", 3).dim(), 12);
        assert_eq!(sp("wedge3H_mod_H", 4).dim(), 48);
        assert_eq!(sp("wedge2V_V_mod_wedge3V", 4).dim(), 4 * 6 - 4);
        let n = 6;
        assert_eq!(sp("L3H", 3).dim(), (n * n * n - n) / 3);
    }

    #[test]
    fn expr_round_trip() {
        for text in ["wedge(2,tensor(wedge(2,V),dualV))", "sym(2,wedge(2,H))", "sum(V,dualV)", "Ubar", "L3H"] {
            let e = ModuleExpr::parse(text).unwrap();
            assert_eq!(ModuleExpr::parse(&e.to_string()).unwrap(), e);
        }
        match ModuleExpr::parse("wedge(2,Q)") {
            Err(SpaceError::Parse { col, .. }) => assert_eq!(col, 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn e12_examples() {
        let g = 5;
        let h = sp("H", g);
        let b1 = h.embed(&Formal::b(g, 1)).unwrap();
        assert_eq!(h.act_e(1, 2, &b1).unwrap(), h.embed(&Formal::b(g, 2).scale(&rat(-1))).unwrap());
        let t3 = sp("tensor(H,tensor(H,H))", g);
        let a = |k| Formal::a(g, k);
        let v = t3.embed(&a(2).tensor(&a(3)).tensor(&Formal::b(g, 1))).unwrap();
        let expect = a(1).tensor(&a(3)).tensor(&Formal::b(g, 1)).sub(&a(2).tensor(&a(3)).tensor(&Formal::b(g, 2)));
        assert_eq!(t3.act_e(1, 2, &v).unwrap(), t3.embed(&expect).unwrap());
        let w3 = sp("wedge(3,H)", g);
        let v = w3.embed(&a(1).wedge(&a(2)).wedge(&a(3))).unwrap();
        assert!(w3.act_e(1, 2, &v).unwrap().is_zero());
        let v = t3.embed(&a(3).tensor(&a(4)).tensor(&a(5))).unwrap();
        assert!(t3.act_e(1, 2, &v).unwrap().is_zero());
    }

    #[test]
    fn x_examples() {
        let g = 3;
        let h = sp("H", g);
        assert_eq!(h.act_x(1, &h.embed(&Formal::a(g, 1)).unwrap()).unwrap(), h.embed(&Formal::b(g, 1)).unwrap());
        assert!(h.act_x(1, &h.embed(&Formal::b(g, 2)).unwrap()).unwrap().is_zero());
        let w2 = sp("wedge(2,H)", g);
        let v = w2.embed(&Formal::a(g, 1).wedge(&Formal::b(g, 2))).unwrap();
        let e = w2.embed(&Formal::b(g, 1).wedge(&Formal::b(g, 2))).unwrap();
        assert_eq!(w2.act_x(1, &v).unwrap(), e);
        let v = sp("V", g);
        assert!(matches!(v.act_x(1, &SparseVector::unit(0)), Err(SpaceError::NotActionable(..))));
    }

    #[test]
    fn handleswap_examples() {
        let g = 3;
        let w3 = sp("wedge(3,H)", g);
        let (a, b) = (|k| Formal::a(g, k), |k| Formal::b(g, k));
        let v = w3.embed(&a(1).wedge(&b(1)).wedge(&a(2))).unwrap();
        // a2^b2^a1 resorted is +a1^a2^b2 (two transpositions)
        let (neg, sorted) = exterior::sort_with_sign(&[gen_a(g, 2), gen_b(g, 2), gen_a(g, 1)]).unwrap();
        assert!(!neg);
        let e = w3.embed(&a(1).wedge(&a(2)).wedge(&b(2))).unwrap();
        assert_eq!(w3.handleswap(1, 2, &v).unwrap(), e);
        assert_eq!(w3.from_ext(&exterior::monomial(&sorted)).unwrap(), e);
        let s2 = sp("sym(2,dualV)", g);
        let v = s2.embed(&b(2).tensor(&b(2))).unwrap();
        assert_eq!(s2.handleswap(1, 3, &v).unwrap(), v);
    }

    #[test]
    fn weights_in_fundamental_coordinates() {
        let g = 5;
        let w2 = sp("wedge(2,V)", g);
        let v = w2.embed(&Formal::a(g, 1).wedge(&Formal::a(g, 2))).unwrap();
        let i = v.leading().unwrap().0;
        assert_eq!(w2.weight_of(i), vec![0, 1, 0, 0]);
        let h = sp("H", g);
        let i = h.embed(&Formal::b(g, g)).unwrap().leading().unwrap().0;
        assert_eq!(h.weight_of(i), vec![0, 0, 0, 1]);
        let t = sp("tensor(V,dualV)", g);
        let i = t.embed(&Formal::a(g, 2).tensor(&Formal::b(g, 2))).unwrap().leading().unwrap().0;
        assert_eq!(t.weight_of(i), vec![0, 0, 0, 0]);
    }

    #[test]
    fn sym_basis_is_orbit_sums() {
        let g = 3;
        let s2 = sp("sym(2,dualV)", g);
        let b = |k| Formal::b(g, k);
        let v = s2.embed(&b(1).tensor(&b(2)).add(&b(2).tensor(&b(1)))).unwrap();
        assert_eq!(v.nnz(), 1);
        assert_eq!(v.leading().unwrap().1, &rat(1));
        let v = s2.embed(&b(1).sym_product(&b(1))).unwrap();
        assert_eq!(v.leading().unwrap().1, &rat(2));
    }

    #[test]
    fn quotient_representatives_vanish() {
        let g = 4;
        let q = sp("wedge3H_mod_H", g);
        let a1w = Formal::a(g, 1).wedge(&Formal::omega(g));
        assert!(q.embed(&a1w).unwrap().is_zero());
        for op in [Op::E(1, 2), Op::E(3, 1), Op::X(2)] {
            let full = sp("wedge(3,H)", g);
            let v = full.embed(&a1w).unwrap();
            let image = full.act(op, &v).unwrap();
            assert!(q.from_parent(&image).unwrap().is_zero());
        }
        let qv = sp("wedge2V_V_mod_wedge3V", g);
        let a = |k| Formal::a(g, k);
        let rel = a(1).wedge(&a(2)).tensor(&a(3)).add(&a(2).wedge(&a(3)).tensor(&a(1))).add(&a(3).wedge(&a(1)).tensor(&a(2)));
        assert!(qv.embed(&rel).unwrap().is_zero());
    }

    #[test]
    fn free_lie_jacobi() {
        let g = 2;
        let l = sp("L3H", g);
        let (a, b, c) = (Formal::a(g, 1), Formal::b(g, 2), Formal::a(g, 2));
        let j = a.lie(&b.lie(&c)).add(&b.lie(&c.lie(&a))).add(&c.lie(&a.lie(&b)));
        assert!(l.embed(&j).unwrap().is_zero());
        let x = a.lie(&b.lie(&c));
        assert!(!l.embed(&x).unwrap().is_zero());
    }

    fn cartan_matches(space: &ModuleSpace) {
        let g = space.g();
        for i in 0..space.dim() {
            for t in 1..=g {
                let v = space.act_basis(Op::Diag(t), i).unwrap();
                let w = space.weight_eps(i)[t - 1];
                assert_eq!(v, SparseVector::unit(i).scaled(&rat(w as i64)), "{} basis {}", space.expr(), i);
            }
        }
    }

    #[test]
    fn cartan_consistency() {
        for text in ["wedge(3,H)", "U", "Ubar", "W", "Wbar", "sym(2,wedge(2,H))", "wedge2V_V_mod_wedge3V", "L3H"] {
            cartan_matches(&sp(text, 3));
        }
    }

    #[test]
    fn commutator_of_raising_and_lowering_is_diagonal() {
        let s = sp("wedge(2,tensor(wedge(2,V),dualV))", 3);
        for i in 0..s.dim() {
            for (p, q) in [(1, 2), (2, 3), (1, 3)] {
                let x = SparseVector::unit(i);
                let a = s.act(Op::E(p, q), &s.act(Op::E(q, p), &x).unwrap()).unwrap();
                let b = s.act(Op::E(q, p), &s.act(Op::E(p, q), &x).unwrap()).unwrap();
                let h = &a - &b;
                let w = s.weight_eps(i);
                let expect = x.scaled(&rat((w[p - 1] - w[q - 1]) as i64));
                assert_eq!(h, expect);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn derivation_law(i in 1usize..5, j in 1usize..5, x in 0usize..10, y in 0usize..10, z in 0usize..10) {
            prop_assume!(i != j);
            let g = 5;
            let h = sp("H", g);
            let t = sp("tensor(H,tensor(H,H))", g);
            let (u, v, w) = (SparseVector::unit(x), SparseVector::unit(y), SparseVector::unit(z));
            let f = |s: &SparseVector| Formal::gen(h.leaf_generator(s.leading().unwrap().0).unwrap());
            let prod = t.embed(&f(&u).tensor(&f(&v)).tensor(&f(&w))).unwrap();
            let lhs = t.act_e(i, j, &prod).unwrap();
            let mut rhs = SparseVector::new();
            for (k, base) in [&u, &v, &w].iter().enumerate() {
                let img = h.act_e(i, j, base).unwrap();
                for (idx, c) in img.iter() {
                    let mut parts = [f(&u), f(&v), f(&w)];
                    parts[k] = Formal::gen(h.leaf_generator(idx).unwrap());
                    let term = parts[0].tensor(&parts[1]).tensor(&parts[2]);
                    rhs.add_scaled(&t.embed(&term).unwrap(), c);
                }
            }
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn weight_additivity(x in 0usize..8, y in 0usize..8) {
            let g = 4;
            let t = sp("tensor(H,H)", g);
            let h = sp("H", g);
            let idx = x * 8 + y;
            let sum: Vec<i32> = h.weight_eps(x).iter().zip(h.weight_eps(y)).map(|(a, b)| a + b).collect();
            prop_assert_eq!(t.weight_eps(idx), &sum[..]);
            prop_assert_eq!(eps_to_fund(Algebra::A, &sum), t.weight_of(idx));
        }
    }
}
