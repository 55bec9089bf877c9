//! Equivariant maps between the constructed spaces: contractions, the q
//! splitting, π into ∧⁶H, the bracket ∧²(∧³H) → Sym²(∧²H), the maps p and q
//! through H ⊗ L₃(H), unipotent coinvariants and the Johnson image spaces.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::One;
use thiserror::Error;

use crate::characters::{Algebra, Character};
use crate::decompose::{decompose_character, Decomposition};
use crate::exterior::{self, gen_a, gen_b, omega_form, ExtVec};
use crate::rep_spaces::{build, ModuleExpr, ModuleSpace, Op, SpaceError};
use crate::scalar_linalg::{rat, ratio, Echelon, Rational, SparseVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("{0} is not defined on {1}")]
    Domain(String, String),
    #[error("contraction needs degree at least 2, got {0}")]
    Degree(usize),
}

/// A vector together with the space it lives in.
#[derive(Clone)]
pub struct Elem {
    pub space: Arc<ModuleSpace>,
    pub vec: SparseVector,
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self.space.format_vec(&self.vec), self.space.expr())
    }
}

impl PartialEq for Elem {
    fn eq(&self, other: &Self) -> bool {
        self.space.expr() == other.space.expr() && self.space.g() == other.space.g() && self.vec == other.vec
    }
}

impl Elem {
    pub fn new(space: Arc<ModuleSpace>, vec: SparseVector) -> Self {
        Elem { space, vec }
    }

    pub fn g(&self) -> usize {
        self.space.g()
    }

    pub fn is_zero(&self) -> bool {
        self.vec.is_zero()
    }

    /// An element of ∧ᵏH.
    pub fn from_ext(g: usize, k: usize, v: &ExtVec) -> Result<Elem, MapError> {
        let space = wedge_h(g, k)?;
        let vec = space.from_ext(v)?;
        Ok(Elem { space, vec })
    }

    pub fn ext(&self) -> Option<ExtVec> {
        self.space.to_ext(&self.vec)
    }

    pub fn scaled(&self, c: &Rational) -> Elem {
        Elem { space: self.space.clone(), vec: self.vec.scaled(c) }
    }

    pub fn act(&self, op: Op) -> Result<Elem, MapError> {
        Ok(Elem { space: self.space.clone(), vec: self.space.act(op, &self.vec)? })
    }

    /// The scalar when this is an element of ∧⁰H.
    pub fn as_scalar(&self) -> Option<Rational> {
        if self.space.ext_degree() == Some(0) {
            Some(self.vec.get(0))
        } else {
            None
        }
    }

    pub fn render(&self) -> String {
        if let Some(c) = self.as_scalar() {
            return crate::scalar_linalg::fmt_rational(&c);
        }
        self.space.format_vec(&self.vec)
    }
}

pub fn wedge_h(g: usize, k: usize) -> Result<Arc<ModuleSpace>, SpaceError> {
    build(&ModuleExpr::wedge(k, ModuleExpr::FullH), g)
}

pub fn sym2_wedge2_h(g: usize) -> Result<Arc<ModuleSpace>, SpaceError> {
    build(&ModuleExpr::sym(2, ModuleExpr::wedge(2, ModuleExpr::FullH)), g)
}

pub fn h_tensor_l3(g: usize) -> Result<Arc<ModuleSpace>, SpaceError> {
    build(&ModuleExpr::tensor(ModuleExpr::FullH, ModuleExpr::FreeLieDeg3), g)
}

/// ω = Σ a_i ∧ b_i.
pub fn omega(g: usize) -> ExtVec {
    exterior::omega(g)
}

/// C_k on ∧ᵏH.
pub fn contract(g: usize, v: &ExtVec) -> Result<ExtVec, MapError> {
    match exterior::degree_of(v) {
        Some(k) if k < 2 => Err(MapError::Degree(k)),
        _ => Ok(exterior::contract(g, v)),
    }
}

/// (q(v), (1/(g−1)) C₃(v) ∧ ω) for v ∈ ∧³H.
pub fn q_split(g: usize, v: &ExtVec) -> Result<(ExtVec, ExtVec), MapError> {
    match exterior::degree_of(v) {
        Some(3) | None => Ok(exterior::q_split(g, v)),
        Some(k) => Err(MapError::Domain("q".into(), format!("degree {k}"))),
    }
}

fn domain_err(name: &str, space: &ModuleSpace) -> MapError {
    MapError::Domain(name.into(), space.expr().to_string())
}

/// Exterior-algebra value of a basis element whose factors all live in ∧•H:
/// wedge powers, tensor products and sums of such spaces multiply out.
fn basis_ext_factors(space: &ModuleSpace, i: usize) -> Option<Vec<ExtVec>> {
    if let Some(e) = space.to_ext(&SparseVector::unit(i)) {
        return Some(vec![e]);
    }
    if space.is_full_h() {
        let h = space.leaf_generator(i)?;
        return Some(vec![exterior::monomial(&[h])]);
    }
    if let Some((true, _, inner)) = space.power_inner() {
        let mut out = Vec::new();
        for &x in space.power_elem(i)? {
            out.extend(basis_ext_factors(inner, x)?);
        }
        return Some(out);
    }
    if let Some((l, r)) = space.tensor_parts() {
        let rd = r.dim();
        let mut out = basis_ext_factors(l, i / rd)?;
        out.extend(basis_ext_factors(r, i % rd)?);
        return Some(out);
    }
    None
}

/// Multiplies out all factors in ∧•H (π for ∧²(∧³H)-type inputs).
pub fn wedge_out(e: &Elem) -> Result<Elem, MapError> {
    let mut out = ExtVec::new();
    for (i, c) in e.vec.iter() {
        let factors = basis_ext_factors(&e.space, i).ok_or_else(|| domain_err("wedge product", &e.space))?;
        let mut acc: ExtVec = [(vec![], Rational::one())].into_iter().collect();
        for f in &factors {
            acc = exterior::wedge(&acc, f);
        }
        exterior::add_scaled(&mut out, &acc, c);
    }
    let deg = (0..e.space.dim())
        .find_map(|i| basis_ext_factors(&e.space, i))
        .map(|f| f.iter().map(|x| x.keys().next().map_or(0, |m| m.len())).sum())
        .unwrap_or(0);
    Elem::from_ext(e.g(), deg, &out)
}

/// π: ∧²(∧³H-like) → ∧⁶H.
pub fn pi6(e: &Elem) -> Result<Elem, MapError> {
    let out = wedge_out(e)?;
    if out.space.ext_degree() != Some(6) {
        return Err(domain_err("pi6", &e.space));
    }
    Ok(out)
}

pub fn contract_elem(e: &Elem) -> Result<Elem, MapError> {
    let v = e.ext().ok_or_else(|| domain_err("contraction", &e.space))?;
    let k = e.space.ext_degree().unwrap_or(0);
    if k < 2 {
        return Err(MapError::Degree(k));
    }
    let c = contract(e.g(), &v)?;
    let space = wedge_h(e.g(), k - 2)?;
    let vec = space.from_ext(&c)?;
    Ok(Elem { space, vec })
}

pub fn q_elem(e: &Elem) -> Result<Elem, MapError> {
    if e.space.ext_degree() != Some(3) {
        return Err(domain_err("q", &e.space));
    }
    let v = e.ext().unwrap();
    Elem::from_ext(e.g(), 3, &exterior::q_project(e.g(), &v))
}

/// Adds c·(u)↔(v) to a vector of Sym²(∧²H), u, v sorted monomials.
fn add_sym_pair(s: &ModuleSpace, w2: &ModuleSpace, out: &mut SparseVector, u: &[usize], v: &[usize], c: &Rational) {
    let iu = w2.power_index(u).expect("wedge-2 monomial");
    let iv = w2.power_index(v).expect("wedge-2 monomial");
    let (key, c) = if iu == iv {
        ([iu, iu], c * rat(2))
    } else if iu < iv {
        ([iu, iv], c.clone())
    } else {
        ([iv, iu], c.clone())
    };
    out.add_at(s.power_index(&key).expect("sym-2 pair"), &c);
}

fn without(m: &[usize], i: usize) -> Vec<usize> {
    m.iter().enumerate().filter(|(t, _)| *t != i).map(|(_, x)| *x).collect()
}

/// [x]∧[y] ↦ Σ_{i,j} (−1)^{i+j} ω(x_i, y_j) (x∖x_i) ↔ (y∖y_j) on ∧³H × ∧³H.
pub fn bracket_pair(g: usize, x: &ExtVec, y: &ExtVec) -> Result<SparseVector, MapError> {
    let s = sym2_wedge2_h(g)?;
    let w2 = wedge_h(g, 2)?;
    let mut out = SparseVector::new();
    for (m1, c1) in x {
        for (m2, c2) in y {
            if m1.len() != 3 || m2.len() != 3 {
                return Err(MapError::Domain("bracket".into(), "non-cubic factor".into()));
            }
            for i in 0..3 {
                for j in 0..3 {
                    let w = omega_form(g, m1[i], m2[j]);
                    if w == 0 {
                        continue;
                    }
                    let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                    let c = c1 * c2 * rat(sign * w);
                    add_sym_pair(&s, &w2, &mut out, &without(m1, i), &without(m2, j), &c);
                }
            }
        }
    }
    Ok(out)
}

/// The bracket on ∧²X or X⊗Y with X, Y inside ∧³H.
pub fn bracket(e: &Elem) -> Result<Elem, MapError> {
    let g = e.g();
    let mut out = SparseVector::new();
    for (i, c) in e.vec.iter() {
        let f = basis_ext_factors(&e.space, i).ok_or_else(|| domain_err("bracket", &e.space))?;
        if f.len() != 2 {
            return Err(domain_err("bracket", &e.space));
        }
        out.add_scaled(&bracket_pair(g, &f[0], &f[1])?, c);
    }
    Ok(Elem { space: sym2_wedge2_h(g)?, vec: out })
}

/// The pairs (u, v, weight) with Σ weight·(u)↔(v) equal to a Sym²(∧²H) basis vector.
fn sym_basis_pairs(s: &ModuleSpace, i: usize) -> Option<(Vec<usize>, Vec<usize>, Rational)> {
    let (_, _, w2) = s.power_inner()?;
    let e = s.power_elem(i)?;
    let u = w2.power_elem(e[0])?.to_vec();
    let v = w2.power_elem(e[1])?.to_vec();
    let w = if e[0] == e[1] { ratio(1, 2) } else { Rational::one() };
    Some((u, v, w))
}

fn check_sym2_wedge2(e: &Elem, name: &str) -> Result<(), MapError> {
    let expect = ModuleExpr::sym(2, ModuleExpr::wedge(2, ModuleExpr::FullH));
    if *e.space.expr() != expect {
        return Err(domain_err(name, &e.space));
    }
    Ok(())
}

/// q on a generator a ⊗ [b,[c,d]]: 2ω(a,b) c∧d + ω(a,c) b∧d − ω(a,d) b∧c.
pub fn q_map_term(g: usize, a: usize, b: usize, c: usize, d: usize) -> ExtVec {
    let mut out = ExtVec::new();
    let mut put = |w: i64, x: usize, y: usize, k: i64| {
        if w != 0 {
            exterior::add_scaled(&mut out, &exterior::monomial(&[x, y]), &rat(w * k));
        }
    };
    put(omega_form(g, a, b), c, d, 2);
    put(omega_form(g, a, c), b, d, 1);
    put(omega_form(g, a, d), b, c, -1);
    out
}

/// q∘p on (a∧b) ↔ (c∧d), applying q termwise to the four terms of p.
pub fn qp_generator(g: usize, u: &[usize], v: &[usize]) -> ExtVec {
    let (a, b, c, d) = (u[0], u[1], v[0], v[1]);
    let mut out = ExtVec::new();
    exterior::add_scaled(&mut out, &q_map_term(g, a, b, c, d), &Rational::one());
    exterior::add_scaled(&mut out, &q_map_term(g, b, a, c, d), &-Rational::one());
    exterior::add_scaled(&mut out, &q_map_term(g, c, d, a, b), &Rational::one());
    exterior::add_scaled(&mut out, &q_map_term(g, d, c, a, b), &-Rational::one());
    out
}

/// q∘p on Sym²(∧²H), evaluated termwise.
pub fn qp(e: &Elem) -> Result<Elem, MapError> {
    check_sym2_wedge2(e, "qp")?;
    let g = e.g();
    let mut out = ExtVec::new();
    for (i, c) in e.vec.iter() {
        let (u, v, w) = sym_basis_pairs(&e.space, i).unwrap();
        exterior::add_scaled(&mut out, &qp_generator(g, &u, &v), &(c * w));
    }
    let space = wedge_h(g, 2)?;
    let vec = space.from_ext(&out)?;
    Ok(Elem { space, vec })
}

/// p: Sym²(∧²H) → H ⊗ L₃(H).
pub fn p_map(e: &Elem) -> Result<Elem, MapError> {
    check_sym2_wedge2(e, "p")?;
    let g = e.g();
    let target = h_tensor_l3(g)?;
    let mut out = SparseVector::new();
    for (i, c) in e.vec.iter() {
        let (u, v, w) = sym_basis_pairs(&e.space, i).unwrap();
        let img = p_generator(&target, &u, &v)?;
        out.add_scaled(&img, &(c * w));
    }
    Ok(Elem { space: target, vec: out })
}

fn p_generator(target: &ModuleSpace, u: &[usize], v: &[usize]) -> Result<SparseVector, MapError> {
    use crate::rep_spaces::Formal;
    let x = |h: usize| Formal::gen(h);
    let (a, b, c, d) = (u[0], u[1], v[0], v[1]);
    let f = x(a)
        .tensor(&x(b).lie(&x(c).lie(&x(d))))
        .sub(&x(b).tensor(&x(a).lie(&x(c).lie(&x(d)))))
        .add(&x(c).tensor(&x(d).lie(&x(a).lie(&x(b)))))
        .sub(&x(d).tensor(&x(c).lie(&x(a).lie(&x(b)))));
    Ok(target.embed(&f)?)
}

/// q on H ⊗ L₃(H) (or on H⊗H⊗H⊗H): a⊗x⊗y⊗z ↦ ω(a,x) y∧z. On brackets this
/// is the generator rule of q, so q is well defined on the free-Lie quotient.
pub fn q_map(e: &Elem) -> Result<Elem, MapError> {
    let g = e.g();
    let (left, right) = e.space.tensor_parts().ok_or_else(|| domain_err("q", &e.space))?;
    if !left.is_full_h() {
        return Err(domain_err("q", &e.space));
    }
    let n = 2 * g;
    let rd = right.dim();
    let mut out = ExtVec::new();
    for (i, c) in e.vec.iter() {
        let a = left.leaf_generator(i / rd).unwrap();
        let r = SparseVector::unit(i % rd);
        let words = right.to_parent(&r);
        let top = match right.parent() {
            Some(p) => p.clone(),
            None => build(right.expr(), g)?,
        };
        if top.dim() != n * n * n {
            return Err(domain_err("q", &e.space));
        }
        for (w, cw) in words.iter() {
            let (x, y, z) = (w / (n * n), (w / n) % n, w % n);
            let om = omega_form(g, a, x);
            if om != 0 {
                exterior::add_scaled(&mut out, &exterior::monomial(&[y, z]), &(c * cw * rat(om)));
            }
        }
    }
    let space = wedge_h(g, 2)?;
    let vec = space.from_ext(&out)?;
    Ok(Elem { space, vec })
}

/// (u)↔(v) ↦ u∧v from Sym²(∧²H) to ∧⁴H.
pub fn p4(e: &Elem) -> Result<Elem, MapError> {
    check_sym2_wedge2(e, "p4")?;
    let g = e.g();
    let mut out = ExtVec::new();
    for (i, c) in e.vec.iter() {
        let (u, v, w) = sym_basis_pairs(&e.space, i).unwrap();
        let m = exterior::wedge(&exterior::monomial(&u), &exterior::monomial(&v));
        exterior::add_scaled(&mut out, &m, &(c * w));
    }
    let space = wedge_h(g, 4)?;
    let vec = space.from_ext(&out)?;
    Ok(Elem { space, vec })
}

/// a_i∧a_j⊗b_k ↦ ω(a_j,b_k) a_i − ω(a_i,b_k) a_j on (∧²V)⊗V*, or on the first
/// summand of W.
pub fn c3p(e: &Elem) -> Result<Elem, MapError> {
    let g = e.g();
    let t = build(&ModuleExpr::tensor(ModuleExpr::wedge(2, ModuleExpr::StdV), ModuleExpr::DualV), g)?;
    let (base, offset) = if e.space.expr() == t.expr() {
        (t.clone(), 0)
    } else if let Some((parts, offsets)) = e.space.sum_parts() {
        if parts[0].expr() != t.expr() {
            return Err(domain_err("c3p", &e.space));
        }
        (parts[0].clone(), offsets[0])
    } else {
        return Err(domain_err("c3p", &e.space));
    };
    let (l, r) = base.tensor_parts().unwrap();
    let v = build(&ModuleExpr::StdV, g)?;
    let mut out = SparseVector::new();
    for (i, c) in e.vec.iter() {
        if i < offset || i >= offset + base.dim() {
            continue;
        }
        let j = i - offset;
        let pair = l.power_elem(j / r.dim()).unwrap();
        let bk = r.leaf_generator(j % r.dim()).unwrap();
        let (ai, aj) = (pair[0], pair[1]);
        let w1 = omega_form(g, aj, bk);
        if w1 != 0 {
            out.add_at(ai, &(c * rat(w1)));
        }
        let w2 = omega_form(g, ai, bk);
        if w2 != 0 {
            out.add_at(aj, &(c * rat(-w2)));
        }
    }
    Ok(Elem { space: v, vec: out })
}

/// The coinvariant quotient M / Σ_N N(M) for N ∈ {X_i, X_ij}.
pub fn unipotent_coinvariants(space: &ModuleSpace) -> Result<(usize, Decomposition), MapError> {
    if !space.x_actionable() {
        return Err(MapError::Space(SpaceError::NotActionable("X".into(), space.expr().to_string())));
    }
    let g = space.g();
    let mut ops = Vec::new();
    for i in 1..=g {
        ops.push(Op::X(i));
        for j in i + 1..=g {
            ops.push(Op::XSym(i, j));
        }
    }
    let mut by_weight: BTreeMap<Vec<i32>, Echelon> = BTreeMap::new();
    for i in 0..space.dim() {
        for op in &ops {
            let img = space.act_basis(*op, i)?;
            if let Some((j, _)) = img.leading() {
                by_weight.entry(space.weight_eps(j).to_vec()).or_default().insert(img);
            }
        }
    }
    let mut ch = Character::new(Algebra::A, g - 1);
    for w in space.weights_eps() {
        ch.add_eps(w, 1);
    }
    let mut rank = 0;
    for (w, ech) in &by_weight {
        ch.add_eps(w, -(ech.rank() as i64));
        rank += ech.rank();
    }
    let d = decompose_character(&ch).expect("quotient of a module");
    Ok((space.dim() - rank, d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JohnsonImage {
    U,
    Ubar,
    W,
    Wbar,
}

pub fn johnson_image_basis(which: JohnsonImage, g: usize) -> Result<Arc<ModuleSpace>, SpaceError> {
    let e = match which {
        JohnsonImage::U => ModuleExpr::SubmoduleU,
        JohnsonImage::Ubar => ModuleExpr::SubmoduleUbar,
        JohnsonImage::W => ModuleExpr::SpaceW,
        JohnsonImage::Wbar => ModuleExpr::SpaceWbar,
    };
    build(&e, g)
}

/// The five generator families of U inside ∧³H.
pub fn u_generator_families(g: usize) -> Vec<(&'static str, Vec<ExtVec>)> {
    let (a, b) = (|k| gen_a(g, k), |k| gen_b(g, k));
    let m = |l: &[usize]| exterior::monomial(l);
    let r = 1..=g;
    let mut fam: Vec<(&'static str, Vec<ExtVec>)> =
        vec![("a_i^b_i^a_j", vec![]), ("a_i^b_i^b_j", vec![]), ("a_i^a_j^b_k", vec![]), ("a_i^b_j^b_k", vec![]), ("b_i^b_j^b_k", vec![])];
    for i in r.clone() {
        for j in r.clone() {
            if i != j {
                fam[0].1.push(m(&[a(i), b(i), a(j)]));
                fam[1].1.push(m(&[a(i), b(i), b(j)]));
            }
            for k in r.clone() {
                if i != j && j != k && i != k {
                    fam[2].1.push(m(&[a(i), a(j), b(k)]));
                    fam[3].1.push(m(&[a(i), b(j), b(k)]));
                    fam[4].1.push(m(&[b(i), b(j), b(k)]));
                }
            }
        }
    }
    for f in fam.iter_mut() {
        f.1.retain(|v| !v.is_empty());
    }
    fam
}

/// The five families spanning Ū inside the q-complement of ∧³H.
pub fn ubar_families(g: usize) -> Vec<(&'static str, Vec<ExtVec>)> {
    let (a, b) = (|k| gen_a(g, k), |k| gen_b(g, k));
    let m = |l: &[usize]| exterior::monomial(l);
    let om = omega(g);
    let inv = ratio(1, g as i64 - 1);
    let mut out: Vec<(&'static str, Vec<ExtVec>)> = vec![
        ("a_i^a_j^b_k", vec![]),
        ("a_i^b_j^b_k", vec![]),
        ("b_i^b_j^b_k", vec![]),
        ("a_i^a_j^b_j - a_i^omega/(g-1)", vec![]),
        ("b_i^a_j^b_j - b_i^omega/(g-1)", vec![]),
    ];
    for i in 1..=g {
        for j in 1..=g {
            for k in 1..=g {
                if i < j && k != i && k != j {
                    out[0].1.push(m(&[a(i), a(j), b(k)]));
                }
                if i != j && i != k && j < k {
                    out[1].1.push(m(&[a(i), b(j), b(k)]));
                }
                if i < j && j < k {
                    out[2].1.push(m(&[b(i), b(j), b(k)]));
                }
            }
            if i != j {
                for (x, name) in [(a(i), 3), (b(i), 4)] {
                    let mut v = m(&[x, a(j), b(j)]);
                    let corr = exterior::wedge(&m(&[x]), &om);
                    exterior::add_scaled(&mut v, &corr, &-inv.clone());
                    out[name].1.push(v);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::IrrepLabel;
    use crate::rep_spaces::Formal;
    use crate::scalar_linalg::{membership, SpanSolver};
    use proptest::prelude::*;

    fn mono(l: &[usize]) -> ExtVec {
        exterior::monomial(l)
    }

    fn elem(g: usize, text: &str, f: &Formal) -> Elem {
        let s = build(&ModuleExpr::parse(text).unwrap(), g).unwrap();
        let v = s.embed(f).unwrap();
        Elem::new(s, v)
    }

    #[test]
    fn contraction_examples() {
        let g = 4;
        let (a, b) = (|k| gen_a(g, k), |k| gen_b(g, k));
        assert_eq!(contract(g, &mono(&[a(1), b(1), b(2)])).unwrap(), mono(&[b(2)]));
        assert!(contract(g, &mono(&[a(1), a(2), a(3)])).unwrap().is_empty());
        assert_eq!(contract(g, &omega(g)).unwrap().get(&vec![]), Some(&rat(4)));
        assert!(matches!(contract(g, &mono(&[a(1)])), Err(MapError::Degree(1))));
        let mut v = ExtVec::new();
        for (i, j) in [(2, 3), (1, 3), (1, 2)] {
            exterior::add_scaled(&mut v, &mono(&[a(i), b(i), a(j), b(j)]), &rat(1));
        }
        let c4 = contract(g, &v).unwrap();
        let c2 = contract(g, &c4).unwrap();
        assert_eq!(c2.get(&vec![]), Some(&rat(6)));
    }

    #[test]
    fn q_split_examples() {
        let g = 5;
        let (a, b) = (|k| gen_a(g, k), |k| gen_b(g, k));
        let a1w = exterior::wedge(&mono(&[a(1)]), &omega(g));
        let (q, h) = q_split(g, &a1w).unwrap();
        assert!(q.is_empty());
        assert_eq!(h, a1w);
        let v = mono(&[a(1), a(2), b(3)]);
        assert_eq!(q_split(g, &v).unwrap(), (v.clone(), ExtVec::new()));
        let v = mono(&[a(1), a(2), b(2)]);
        let (q, h) = q_split(g, &v).unwrap();
        assert_eq!(h, exterior::scaled(&a1w, &ratio(1, 4)));
        let mut expect = v.clone();
        exterior::add_scaled(&mut expect, &a1w, &ratio(-1, 4));
        assert_eq!(q, expect);
    }

    #[test]
    fn bracket_examples() {
        let g = 4;
        let (a, b) = (|k| gen_a(g, k), |k| gen_b(g, k));
        let s = sym2_wedge2_h(g).unwrap();
        let w = |x: usize, y: usize| Formal::gen(x).wedge(&Formal::gen(y));
        let got = bracket_pair(g, &mono(&[a(1), a(2), b(3)]), &mono(&[b(1), b(2), a(3)])).unwrap();
        let expect =
            w(a(2), b(3)).sym_product(&w(b(2), a(3))).add(&w(a(1), b(3)).sym_product(&w(b(1), a(3)))).sub(&w(a(1), a(2)).sym_product(&w(b(1), b(2))));
        assert_eq!(got, s.embed(&expect).unwrap());
        let got = bracket_pair(g, &mono(&[b(g - 1), b(g), a(1)]), &mono(&[b(g - 1), b(g), b(1)])).unwrap();
        let u = w(b(g - 1), b(g));
        assert_eq!(got, s.embed(&u.sym_product(&u)).unwrap());
        assert!(bracket_pair(g, &mono(&[b(1), b(2), b(3)]), &mono(&[b(4), b(1), b(2)])).unwrap().is_zero());
    }

    #[test]
    fn qp_generator_worked_example() {
        let g = 5;
        let (a, b) = (|k| gen_a(g, k), |k| gen_b(g, k));
        let s = sym2_wedge2_h(g).unwrap();
        let w = |x: usize, y: usize| Formal::gen(x).wedge(&Formal::gen(y));
        let v = s.embed(&w(a(1), a(2)).sym_product(&w(a(1), b(1)))).unwrap();
        let out = qp(&Elem::new(s.clone(), v.clone())).unwrap();
        assert_eq!(out.ext().unwrap(), exterior::scaled(&mono(&[a(1), a(2)]), &rat(6)));
        let through_l3 = q_map(&p_map(&Elem::new(s, v)).unwrap()).unwrap();
        assert_eq!(through_l3, out);
    }

    #[test]
    fn qp_type_table() {
        for g in 5..=7 {
            let (a, b) = (|k| gen_a(g, k), |k| gen_b(g, k));
            let s = sym2_wedge2_h(g).unwrap();
            let w = |x: usize, y: usize| Formal::gen(x).wedge(&Formal::gen(y));
            let a12 = exterior::monomial(&[a(1), a(2)]);
            let check = |f: Formal, k: i64| {
                let out = qp(&Elem::new(s.clone(), s.embed(&f).unwrap())).unwrap();
                assert_eq!(out.ext().unwrap(), exterior::scaled(&a12, &rat(k)), "g={g}");
            };
            for i in 1..=2 {
                check(w(a(1), a(2)).sym_product(&w(a(i), b(i))), 6);
            }
            for i in 3..=g {
                check(w(a(1), a(2)).sym_product(&w(a(i), b(i))), 4);
                check(w(a(1), a(i)).sym_product(&w(a(2), b(i))), 2);
                check(w(a(1), b(i)).sym_product(&w(a(2), a(i))), -2);
            }
        }
    }

    #[test]
    fn bracket_composites() {
        for g in 5..=7 {
            let gi = g as i64;
            let (a, b) = (|k| Formal::a(g, k), |k| Formal::b(g, k));
            let om = Formal::omega(g);
            let a12 = exterior::monomial(&[gen_a(g, 1), gen_a(g, 2)]);
            let run = |f: Formal| qp(&bracket(&elem(g, "wedge(2,wedge(3,H))", &f)).unwrap()).unwrap().ext().unwrap();
            let x = a(1).wedge(&om).group();
            let y = a(2).wedge(&om).group();
            assert_eq!(run(x.wedge(&y)), exterior::scaled(&a12, &rat(-4 * gi - 4)));
            let inv = ratio(1, gi - 1);
            let x = a(1).wedge(&a(3)).wedge(&b(3)).sub(&a(1).wedge(&om).scale(&inv)).group();
            let y = a(2).wedge(&a(4)).wedge(&b(4)).sub(&a(2).wedge(&om).scale(&inv)).group();
            // cross terms cancel: (a1∧a2)↔(a3∧b3) is of the ±4 type, not ±6
            assert_eq!(run(x.wedge(&y)), exterior::scaled(&a12, &(rat(-4 * gi - 4) * &inv * &inv)));
            let x = a(3).wedge(&om).group();
            let y = a(1).wedge(&a(2)).wedge(&b(3)).group();
            // (a3∧a2)↔(a1∧b3) = −(a1∧b3)↔(a2∧a3) contributes +2
            assert_eq!(run(x.wedge(&y)), exterior::scaled(&a12, &rat(4 * gi + 4)));
        }
    }

    #[test]
    fn trivial_module_chain() {
        let g = 3;
        let (a, b) = (|k| gen_a(g, k), |k| gen_b(g, k));
        let w3 = wedge_h(g, 3).unwrap();
        let x = Formal::gen(a(1)).wedge(&Formal::gen(a(2))).wedge(&Formal::gen(b(3)));
        let y = Formal::gen(b(1)).wedge(&Formal::gen(b(2))).wedge(&Formal::gen(a(3)));
        let _ = w3;
        let e = elem(g, "wedge(2,wedge(3,H))", &x.group().wedge(&y.group()));
        let s = bracket(&e).unwrap();
        let four = p4(&s).unwrap();
        let two = contract_elem(&contract_elem(&four).unwrap()).unwrap();
        assert_eq!(two.as_scalar(), Some(rat(6)));
    }

    #[test]
    fn ubar_membership_example() {
        let g = 4;
        let (a, b) = (|k| gen_a(g, k), |k| gen_b(g, k));
        let fams = ubar_families(g);
        let fam = &fams[3].1;
        let w3 = wedge_h(g, 3).unwrap();
        let span: Vec<SparseVector> = fam.iter().map(|v| w3.from_ext(v).unwrap()).collect();
        let target = w3.from_ext(&exterior::q_project(g, &mono(&[a(1), a(2), b(2)]))).unwrap();
        // family 3 lists (i,j) = (1,2) first
        let one: Vec<SparseVector> = vec![span[0].clone()];
        let c = membership(&target, &one, w3.dim()).unwrap().unwrap();
        assert_eq!(c, vec![rat(1)]);
        assert!(membership(&target, &span, w3.dim()).unwrap().is_some());
    }

    #[test]
    fn families_span_images() {
        for g in 3..5 {
            let w3 = wedge_h(g, 3).unwrap();
            let mut s = SpanSolver::new();
            for (_, f) in u_generator_families(g) {
                for v in f {
                    s.push(&w3.from_ext(&v).unwrap());
                }
            }
            assert_eq!(s.rank(), johnson_image_basis(JohnsonImage::U, g).unwrap().dim());
            let mut s = SpanSolver::new();
            let mut count = 0;
            for (_, f) in ubar_families(g) {
                for v in f {
                    count += 1;
                    s.push(&w3.from_ext(&v).unwrap());
                }
            }
            let ubar = johnson_image_basis(JohnsonImage::Ubar, g).unwrap();
            assert_eq!(s.rank(), ubar.dim());
            assert_eq!(count - s.rank(), 2 * g);
        }
        assert_eq!(johnson_image_basis(JohnsonImage::Wbar, 3).unwrap().dim(), 12);
    }

    #[test]
    fn coinvariants() {
        let g = 3;
        let s = build(&ModuleExpr::wedge(3, ModuleExpr::FullH), g).unwrap();
        let (dim, d) = unipotent_coinvariants(&s).unwrap();
        let expect = Decomposition::from_parts(Algebra::A, 2, [(IrrepLabel::phi(&[0, 0]), 1), (IrrepLabel::phi(&[1, 0]), 1)]);
        assert_eq!(dim, 4);
        assert_eq!(d, expect);
        let dual = build(&ModuleExpr::DualV, g).unwrap();
        let (dim, d) = unipotent_coinvariants(&dual).unwrap();
        assert_eq!(dim, 3);
        assert_eq!(d, Decomposition::from_parts(Algebra::A, 2, [(IrrepLabel::phi(&[0, 1]), 1)]));
        let triv = build(&ModuleExpr::wedge(0, ModuleExpr::FullH), g).unwrap();
        assert_eq!(unipotent_coinvariants(&triv).unwrap().0, 1);
        let v = build(&ModuleExpr::StdV, g).unwrap();
        assert!(unipotent_coinvariants(&v).is_err());
    }

    #[test]
    fn c3p_example() {
        let g = 3;
        let (a, b) = (|k| Formal::a(g, k), |k| Formal::b(g, k));
        let e = elem(g, "tensor(wedge(2,V),dualV)", &a(1).wedge(&a(2)).tensor(&b(2)));
        let out = c3p(&e).unwrap();
        assert_eq!(out.vec, SparseVector::unit(0));
    }

    fn rand_ext3(g: usize, seed: &[(usize, usize, usize, i64)]) -> ExtVec {
        let mut v = ExtVec::new();
        for &(x, y, z, c) in seed {
            let n = 2 * g;
            exterior::add_scaled(&mut v, &mono(&[x % n, y % n, z % n]), &rat(c));
        }
        v
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]
        #[test]
        fn maps_commute_with_e(
            seed1 in proptest::collection::vec((0usize..8, 0usize..8, 0usize..8, -3i64..4), 1..4),
            seed2 in proptest::collection::vec((0usize..8, 0usize..8, 0usize..8, -3i64..4), 1..4),
            i in 1usize..5, j in 1usize..5,
        ) {
            prop_assume!(i != j);
            let g = 4;
            let x = rand_ext3(g, &seed1);
            let y = rand_ext3(g, &seed2);
            let w3 = wedge_h(g, 3).unwrap();
            let op = Op::E(i, j);
            let act = |v: &ExtVec| w3.to_ext(&w3.act(op, &w3.from_ext(v).unwrap()).unwrap()).unwrap();
            // contraction
            let lhs = Elem::from_ext(g, 1, &contract(g, &act(&x)).unwrap());
            let c = Elem::from_ext(g, 1, &contract(g, &x).unwrap());
            if let (Ok(l), Ok(c)) = (lhs, c) {
                prop_assert_eq!(l, c.act(op).unwrap());
            }
            // q
            let qx = Elem::from_ext(g, 3, &exterior::q_project(g, &x)).ok();
            let qax = Elem::from_ext(g, 3, &exterior::q_project(g, &act(&x))).ok();
            if let (Some(a), Some(b)) = (qx, qax) {
                prop_assert_eq!(a.act(op).unwrap(), b);
            }
            // bracket and qp
            let s = sym2_wedge2_h(g).unwrap();
            let br = bracket_pair(g, &x, &y).unwrap();
            let br_act = &bracket_pair(g, &act(&x), &y).unwrap() + &bracket_pair(g, &x, &act(&y)).unwrap();
            prop_assert_eq!(s.act(op, &br).unwrap(), br_act.clone());
            let q1 = qp(&Elem::new(s.clone(), br)).unwrap();
            let q2 = qp(&Elem::new(s.clone(), br_act)).unwrap();
            prop_assert_eq!(q1.act(op).unwrap(), q2);
        }

        #[test]
        fn bracket_is_antisymmetric(
            seed1 in proptest::collection::vec((0usize..8, 0usize..8, 0usize..8, -3i64..4), 1..4),
            seed2 in proptest::collection::vec((0usize..8, 0usize..8, 0usize..8, -3i64..4), 1..4),
        ) {
            let g = 4;
            let x = rand_ext3(g, &seed1);
            let y = rand_ext3(g, &seed2);
            let l = bracket_pair(g, &x, &y).unwrap();
            let r = bracket_pair(g, &y, &x).unwrap();
            prop_assert_eq!(l, -&r);
        }

        #[test]
        fn q_is_well_defined_on_brackets(x in 0usize..8, y in 0usize..8, z in 0usize..8, w in 0usize..8) {
            let g = 4;
            let t = h_tensor_l3(g).unwrap();
            let f = |h: usize| Formal::gen(h);
            let v = t.embed(&f(x).tensor(&f(y).lie(&f(z).lie(&f(w))))).unwrap();
            let got = q_map(&Elem::new(t, v)).unwrap();
            let expect = q_map_term(g, x, y, z, w);
            prop_assert_eq!(got.ext().unwrap_or_default(), expect);
        }
    }
}
