//! Automorphisms of the free group F_g, the Johnson homomorphisms J and J₂
//! on IA_g, and τ on bounding-pair data.
//!
//! Classes in γ_n/γ_{n+1} are read off the Magnus expansion x_i ↦ 1 + X_i,
//! truncated above degree 3.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::exterior::{self, gen_a, gen_b, omega_form, ExtVec};
use crate::rep_spaces::{build, Formal, ModuleExpr, ModuleSpace, SpaceError};
use crate::scalar_linalg::{rat, ratio, SparseVector};

/// Sign pinning J(C_ij) = −(a_i∧a_j)⊗b_j.
const SIGN_J: i64 = -1;
/// Sign pinning J₂([C₁₂,C₂₁]) = −(a₁∧a₂)⊗a₁⊗b₁ − (a₁∧a₂)⊗a₂⊗b₂.
const SIGN_J2: i64 = -1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeGroupError {
    #[error("generator index {0} outside 1..={1}")]
    Index(usize, usize),
    #[error("indices must be distinct: {0}")]
    Distinct(String),
    #[error("not in IA_g: x{0} is moved nontrivially in homology")]
    NotIa(usize),
    #[error("not in IA_g(2): J is nonzero")]
    NotIa2,
    #[error("automorphism has no stored inverse")]
    NoInverse,
    #[error("genus mismatch: {0} vs {1}")]
    Genus(usize, usize),
    #[error("bounding pair data: {0}")]
    Descriptor(String),
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A freely reduced word; letter ±i stands for x_i^{±1}.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeWord(Vec<i32>);

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord(Vec::new())
    }

    pub fn gen(i: usize) -> Self {
        FreeWord(vec![i as i32])
    }

    pub fn from_letters(letters: &[i32]) -> Self {
        let mut w = FreeWord::identity();
        for &l in letters {
            w.push(l);
        }
        w
    }

    fn push(&mut self, l: i32) {
        assert!(l != 0, "letter 0");
        if self.0.last() == Some(&-l) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, o: &FreeWord) -> FreeWord {
        let mut w = self.clone();
        for &l in &o.0 {
            w.push(l);
        }
        w
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| -l).collect())
    }

    /// [u,v] = u v u⁻¹ v⁻¹.
    pub fn commutator(u: &FreeWord, v: &FreeWord) -> FreeWord {
        u.mul(v).mul(&u.inverse()).mul(&v.inverse())
    }

    /// Replaces x_i by images[i−1].
    pub fn substitute(&self, images: &[FreeWord]) -> FreeWord {
        let mut w = FreeWord::identity();
        for &l in &self.0 {
            let img = &images[l.unsigned_abs() as usize - 1];
            let piece = if l > 0 { img.clone() } else { img.inverse() };
            for &m in &piece.0 {
                w.push(m);
            }
        }
        w
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|&l| if l > 0 { format!("x{l}") } else { format!("x{}^-1", -l) }).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Truncated Magnus expansion: words in X_1..X_g of length ≤ 3.
pub type Series = BTreeMap<Vec<u8>, i64>;

const MAX_DEG: usize = 3;

fn series_mul(x: &Series, y: &Series) -> Series {
    let mut out = Series::new();
    for (u, cu) in x {
        for (v, cv) in y {
            if u.len() + v.len() > MAX_DEG {
                continue;
            }
            let mut w = u.clone();
            w.extend(v);
            let e = out.entry(w).or_insert(0);
            *e += cu * cv;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn letter_series(l: i32) -> Series {
    let i = (l.unsigned_abs() - 1) as u8;
    let mut s = Series::new();
    s.insert(vec![], 1);
    if l > 0 {
        s.insert(vec![i], 1);
    } else {
        for d in 1..=MAX_DEG {
            s.insert(vec![i; d], if d % 2 == 1 { -1 } else { 1 });
        }
    }
    s
}

pub fn magnus(w: &FreeWord) -> Series {
    let mut s = Series::new();
    s.insert(vec![], 1);
    for &l in w.letters() {
        s = series_mul(&s, &letter_series(l));
    }
    s
}

/// Largest n ≤ 4 with w ∈ γ_n, read from the lowest nonconstant Magnus degree.
pub fn filtration_degree(w: &FreeWord) -> usize {
    magnus(w).keys().filter(|k| !k.is_empty()).map(|k| k.len()).min().unwrap_or(MAX_DEG + 1)
}

/// An endomorphism of F_g given by the images of x_1..x_g, with the inverse
/// when known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeGroupEndo {
    g: usize,
    images: Vec<FreeWord>,
    inverse: Option<Vec<FreeWord>>,
}

impl FreeGroupEndo {
    pub fn identity(g: usize) -> Self {
        let images: Vec<FreeWord> = (1..=g).map(FreeWord::gen).collect();
        FreeGroupEndo { g, inverse: Some(images.clone()), images }
    }

    pub fn from_images(images: Vec<FreeWord>, inverse: Option<Vec<FreeWord>>) -> Self {
        FreeGroupEndo { g: images.len(), images, inverse }
    }

    fn check(g: usize, idx: &[usize]) -> Result<(), FreeGroupError> {
        for &i in idx {
            if i == 0 || i > g {
                return Err(FreeGroupError::Index(i, g));
            }
        }
        for (a, &i) in idx.iter().enumerate() {
            if idx[..a].contains(&i) {
                return Err(FreeGroupError::Distinct(format!("{idx:?}")));
            }
        }
        Ok(())
    }

    /// C_ij: x_j ↦ x_i x_j x_i⁻¹.
    pub fn conj(g: usize, i: usize, j: usize) -> Result<Self, FreeGroupError> {
        Self::check(g, &[i, j])?;
        let mut e = Self::identity(g);
        let (xi, xj) = (FreeWord::gen(i), FreeWord::gen(j));
        e.images[j - 1] = xi.mul(&xj).mul(&xi.inverse());
        e.inverse.as_mut().unwrap()[j - 1] = xi.inverse().mul(&xj).mul(&xi);
        Ok(e)
    }

    /// M_ijk: x_k ↦ x_k [x_i, x_j].
    pub fn magnus_gen(g: usize, i: usize, j: usize, k: usize) -> Result<Self, FreeGroupError> {
        Self::check(g, &[i, j, k])?;
        let mut e = Self::identity(g);
        let (xi, xj, xk) = (FreeWord::gen(i), FreeWord::gen(j), FreeWord::gen(k));
        e.images[k - 1] = xk.mul(&FreeWord::commutator(&xi, &xj));
        e.inverse.as_mut().unwrap()[k - 1] = xk.mul(&FreeWord::commutator(&xj, &xi));
        Ok(e)
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn images(&self) -> &[FreeWord] {
        &self.images
    }

    pub fn apply(&self, w: &FreeWord) -> FreeWord {
        w.substitute(&self.images)
    }

    /// (f∘h)(x) = f(h(x)).
    pub fn compose(&self, h: &FreeGroupEndo) -> Result<FreeGroupEndo, FreeGroupError> {
        if self.g != h.g {
            return Err(FreeGroupError::Genus(self.g, h.g));
        }
        let images = h.images.iter().map(|w| self.apply(w)).collect();
        let inverse = match (&self.inverse, &h.inverse) {
            (Some(fi), Some(hi)) => Some(fi.iter().map(|w| w.substitute(hi)).collect()),
            _ => None,
        };
        Ok(FreeGroupEndo { g: self.g, images, inverse })
    }

    pub fn inverse(&self) -> Result<FreeGroupEndo, FreeGroupError> {
        let inv = self.inverse.clone().ok_or(FreeGroupError::NoInverse)?;
        Ok(FreeGroupEndo { g: self.g, images: inv, inverse: Some(self.images.clone()) })
    }

    /// f h f⁻¹ h⁻¹.
    pub fn commutator(f: &FreeGroupEndo, h: &FreeGroupEndo) -> Result<FreeGroupEndo, FreeGroupError> {
        f.compose(h)?.compose(&f.inverse()?)?.compose(&h.inverse()?)
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, w)| *w == FreeWord::gen(i + 1))
    }

    /// f(x_k) x_k⁻¹ for each k.
    pub fn displacements(&self) -> Vec<FreeWord> {
        self.images.iter().enumerate().map(|(k, w)| w.mul(&FreeWord::gen(k + 1).inverse())).collect()
    }

    pub fn parse(text: &str, g: usize) -> Result<FreeGroupEndo, FreeGroupError> {
        let mut p = EndoParser { s: text.as_bytes(), pos: 0, g };
        let e = p.expr()?;
        p.ws();
        if p.pos < p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }
}

impl fmt::Display for FreeGroupEndo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let moved: Vec<String> =
            self.images.iter().enumerate().filter(|(i, w)| **w != FreeWord::gen(i + 1)).map(|(i, w)| format!("x{} -> {}", i + 1, w)).collect();
        if moved.is_empty() {
            write!(f, "id")
        } else {
            write!(f, "{}", moved.join(", "))
        }
    }
}

struct EndoParser<'a> {
    s: &'a [u8],
    pos: usize,
    g: usize,
}

impl EndoParser<'_> {
    fn err(&self, msg: &str) -> FreeGroupError {
        FreeGroupError::Parse { col: self.pos + 1, msg: msg.into() }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> Result<(), FreeGroupError> {
        self.ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn ident(&mut self) -> String {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<usize, FreeGroupError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| FreeGroupError::Parse { col: start + 1, msg: "expected index".into() })
    }

    fn args<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, FreeGroupError>) -> Result<Vec<T>, FreeGroupError> {
        self.eat(b'(')?;
        let mut out = vec![item(self)?];
        loop {
            self.ws();
            match self.s.get(self.pos) {
                Some(b',') => {
                    self.pos += 1;
                    out.push(item(self)?);
                }
                Some(b')') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.err("expected ',' or ')'")),
            }
        }
    }

    fn expr(&mut self) -> Result<FreeGroupEndo, FreeGroupError> {
        self.ws();
        let col = self.pos;
        let name = self.ident();
        let g = self.g;
        let at = |e: FreeGroupError| match e {
            FreeGroupError::Parse { .. } => e,
            e => FreeGroupError::Parse { col: col + 1, msg: e.to_string() },
        };
        match name.as_str() {
            "id" => Ok(FreeGroupEndo::identity(g)),
            "C" => {
                let a = self.args(|p| p.number())?;
                if a.len() != 2 {
                    return Err(at(FreeGroupError::Distinct("C takes two indices".into())));
                }
                FreeGroupEndo::conj(g, a[0], a[1]).map_err(at)
            }
            "M" => {
                let a = self.args(|p| p.number())?;
                if a.len() != 3 {
                    return Err(at(FreeGroupError::Distinct("M takes three indices".into())));
                }
                FreeGroupEndo::magnus_gen(g, a[0], a[1], a[2]).map_err(at)
            }
            "comm" => {
                let a = self.args(|p| p.expr())?;
                if a.len() != 2 {
                    return Err(FreeGroupError::Parse { col: col + 1, msg: "comm takes two arguments".into() });
                }
                FreeGroupEndo::commutator(&a[0], &a[1]).map_err(at)
            }
            "prod" => {
                let a = self.args(|p| p.expr())?;
                let mut acc = FreeGroupEndo::identity(g);
                for e in &a {
                    acc = acc.compose(e).map_err(at)?;
                }
                Ok(acc)
            }
            "inv" => {
                let a = self.args(|p| p.expr())?;
                if a.len() != 1 {
                    return Err(FreeGroupError::Parse { col: col + 1, msg: "inv takes one argument".into() });
                }
                a[0].inverse().map_err(at)
            }
            "" => Err(self.err("expected an automorphism")),
            other => Err(FreeGroupError::Parse { col: col + 1, msg: format!("unknown name '{other}'") }),
        }
    }
}

pub fn j_target(g: usize) -> Result<Arc<ModuleSpace>, SpaceError> {
    build(&ModuleExpr::tensor(ModuleExpr::wedge(2, ModuleExpr::StdV), ModuleExpr::DualV), g)
}

pub fn j2_target(g: usize) -> Result<Arc<ModuleSpace>, SpaceError> {
    build(&ModuleExpr::tensor(ModuleExpr::QuotientWedge3V, ModuleExpr::DualV), g)
}

/// J(f) = Σ_k class(f(x_k)x_k⁻¹ ∈ γ₂/γ₃ ≅ ∧²V) ⊗ b_k, signed by SIGN_J.
pub fn johnson_j(f: &FreeGroupEndo) -> Result<SparseVector, FreeGroupError> {
    let g = f.g();
    let (a, b) = (|k| Formal::a(g, k), |k| Formal::b(g, k));
    let mut out = Formal::zero();
    for (k, w) in f.displacements().iter().enumerate() {
        let s = magnus(w);
        if s.keys().any(|m| m.len() == 1) {
            return Err(FreeGroupError::NotIa(k + 1));
        }
        for (m, c) in &s {
            if m.len() == 2 && m[0] < m[1] {
                let t = a(m[0] as usize + 1).wedge(&a(m[1] as usize + 1)).tensor(&b(k + 1));
                out = out.add(&t.scale(&rat(SIGN_J * c)));
            }
        }
    }
    Ok(j_target(g)?.embed(&out)?)
}

/// J₂(f) for f ∈ IA_g(2): the degree-3 Lie class of each f(x_k)x_k⁻¹, sent to
/// (∧²V⊗V)/∧³V by u⊗v⊗w ↦ (u∧v)⊗w / 3, so [[x,y],z] ↦ (x∧y)⊗z.
pub fn johnson_j2(f: &FreeGroupEndo) -> Result<SparseVector, FreeGroupError> {
    if !johnson_j(f)?.is_zero() {
        return Err(FreeGroupError::NotIa2);
    }
    let g = f.g();
    let a = |k| Formal::a(g, k);
    let b = |k| Formal::b(g, k);
    let mut out = Formal::zero();
    for (k, w) in f.displacements().iter().enumerate() {
        for (m, c) in &magnus(w) {
            if m.len() == 3 && m[0] != m[1] {
                let t = a(m[0] as usize + 1).wedge(&a(m[1] as usize + 1)).tensor(&a(m[2] as usize + 1)).tensor(&b(k + 1));
                out = out.add(&t.scale(&(rat(SIGN_J2 * c) * ratio(1, 3))));
            }
        }
    }
    Ok(j2_target(g)?.embed(&out)?)
}

/// Homological data of a genus-k bounding pair: symplectic pairs (x_i, y_i)
/// and the class c, as integer coordinates on a_1..a_g, b_1..b_g.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundingPairDescriptor {
    pub g: usize,
    pub pairs: Vec<(Vec<i64>, Vec<i64>)>,
    pub class: Vec<i64>,
}

fn pairing(g: usize, x: &[i64], y: &[i64]) -> i64 {
    let mut s = 0;
    for (i, &xi) in x.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            if xi != 0 && yj != 0 {
                s += xi * yj * omega_form(g, i, j);
            }
        }
    }
    s
}

fn h_ext(v: &[i64]) -> ExtVec {
    let mut out = ExtVec::new();
    for (i, &c) in v.iter().enumerate() {
        if c != 0 {
            exterior::add_scaled(&mut out, &exterior::monomial(&[i]), &rat(c));
        }
    }
    out
}

impl BoundingPairDescriptor {
    /// Pairs (a_j, b_j) for j in `indices` with class c.
    pub fn standard(g: usize, indices: &[usize], class: Vec<i64>) -> Self {
        let unit = |h: usize| {
            let mut v = vec![0; 2 * g];
            v[h] = 1;
            v
        };
        let pairs = indices.iter().map(|&j| (unit(gen_a(g, j)), unit(gen_b(g, j)))).collect();
        BoundingPairDescriptor { g, pairs, class }
    }

    pub fn validate(&self) -> Result<(), FreeGroupError> {
        let g = self.g;
        let bad = |m: String| Err(FreeGroupError::Descriptor(m));
        let all = self.pairs.iter().flat_map(|(x, y)| [x, y]).chain([&self.class]);
        if all.clone().any(|v| v.len() != 2 * g) {
            return bad(format!("vectors must have {} coordinates", 2 * g));
        }
        for (i, (x, y)) in self.pairs.iter().enumerate() {
            if pairing(g, x, y) != 1 {
                return bad(format!("pair {} has ω(x,y) ≠ 1", i + 1));
            }
            for (x2, y2) in &self.pairs[i + 1..] {
                if [pairing(g, x, x2), pairing(g, x, y2), pairing(g, y, x2), pairing(g, y, y2)] != [0; 4] {
                    return bad(format!("pair {} is not orthogonal to the later pairs", i + 1));
                }
            }
            if pairing(g, x, &self.class) != 0 || pairing(g, y, &self.class) != 0 {
                return bad(format!("class is not orthogonal to pair {}", i + 1));
            }
        }
        Ok(())
    }
}

/// τ = (Σ x_i∧y_i) ∧ c.
pub fn tau_bounding_pair(d: &BoundingPairDescriptor) -> Result<ExtVec, FreeGroupError> {
    d.validate()?;
    let mut w = ExtVec::new();
    for (x, y) in &d.pairs {
        exterior::add_scaled(&mut w, &exterior::wedge(&h_ext(x), &h_ext(y)), &rat(1));
    }
    Ok(exterior::wedge(&w, &h_ext(&d.class)))
}
