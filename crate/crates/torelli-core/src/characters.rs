//! Formal characters of A_{g−1} and C_g modules: Weyl dimensions, Freudenthal
//! multiplicities and Weyl-orbit expansion.
//!
//! Weights are handled internally in epsilon coordinates (L_1, …, L_n) and
//! exposed in fundamental-weight coordinates.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::rep_spaces::ModuleSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algebra {
    /// sl_g, labels Φ with g−1 coordinates.
    A,
    /// sp_2g, labels Γ with g coordinates.
    C,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharacterError {
    #[error("bad label: {0}")]
    Label(String),
    #[error("not a module character: {0}")]
    NotModule(String),
    #[error("mismatched algebras or ranks")]
    Mismatch,
}

/// Highest-weight label in fundamental coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IrrepLabel {
    pub algebra: Algebra,
    pub coords: Vec<i32>,
}

impl IrrepLabel {
    pub fn new(algebra: Algebra, coords: Vec<i32>) -> Result<Self, CharacterError> {
        if coords.is_empty() || coords.iter().any(|&c| c < 0) {
            return Err(CharacterError::Label(format!("{coords:?}")));
        }
        Ok(IrrepLabel { algebra, coords })
    }

    pub fn phi(coords: &[i32]) -> Self {
        IrrepLabel::new(Algebra::A, coords.to_vec()).expect("valid label")
    }

    /// Γ label padded with trailing zeros to rank g.
    pub fn gamma(coords: &[i32], g: usize) -> Self {
        let mut c = coords.to_vec();
        c.resize(g.max(c.len()), 0);
        IrrepLabel::new(Algebra::C, c).expect("valid label")
    }

    pub fn trivial(algebra: Algebra, rank: usize) -> Self {
        IrrepLabel { algebra, coords: vec![0; rank] }
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    /// Number of epsilon coordinates (g for both types).
    pub fn eps_len(&self) -> usize {
        eps_len(self.algebra, self.rank())
    }

    pub fn eps(&self) -> Vec<i32> {
        fund_to_eps(self.algebra, &self.coords)
    }

    /// Φ_{a,…,z} ↦ Φ_{z,…,a}; the identity on type C.
    pub fn dual(&self) -> Self {
        let mut c = self.coords.clone();
        if self.algebra == Algebra::A {
            c.reverse();
        }
        IrrepLabel { algebra: self.algebra, coords: c }
    }

    /// Parses `Phi[0,1,0]` / `Gamma[0,2]` (or bare `[..]` with a given algebra).
    pub fn parse(text: &str, default: Option<Algebra>) -> Result<Self, CharacterError> {
        let t = text.trim();
        let (alg, rest) = if let Some(r) = t.strip_prefix("Phi") {
            (Algebra::A, r)
        } else if let Some(r) = t.strip_prefix("Gamma") {
            (Algebra::C, r)
        } else {
            (default.ok_or_else(|| CharacterError::Label(t.into()))?, t)
        };
        let inner = rest.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(|| CharacterError::Label(t.into()))?;
        let coords = inner.split(',').map(|s| s.trim().parse::<i32>()).collect::<Result<Vec<_>, _>>().map_err(|_| CharacterError::Label(t.into()))?;
        IrrepLabel::new(alg, coords)
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.algebra {
            Algebra::A => "Phi",
            Algebra::C => "Gamma",
        };
        let c: Vec<String> = self.coords.iter().map(|x| x.to_string()).collect();
        write!(f, "{name}[{}]", c.join(","))
    }
}

pub fn eps_len(algebra: Algebra, rank: usize) -> usize {
    match algebra {
        Algebra::A => rank + 1,
        Algebra::C => rank,
    }
}

pub fn fund_len(algebra: Algebra, eps_len: usize) -> usize {
    match algebra {
        Algebra::A => eps_len - 1,
        Algebra::C => eps_len,
    }
}

pub fn eps_to_fund(algebra: Algebra, eps: &[i32]) -> Vec<i32> {
    let n = eps.len();
    let mut out: Vec<i32> = (0..n.saturating_sub(1)).map(|i| eps[i] - eps[i + 1]).collect();
    if algebra == Algebra::C {
        out.push(eps[n - 1]);
    }
    out
}

/// Epsilon representative with last coordinate 0 (type A) of a fundamental weight.
pub fn fund_to_eps(algebra: Algebra, fund: &[i32]) -> Vec<i32> {
    let n = eps_len(algebra, fund.len());
    let mut out = vec![0i32; n];
    let mut acc = 0;
    for i in (0..fund.len()).rev() {
        acc += fund[i];
        out[i] = acc;
    }
    out
}

fn rho(algebra: Algebra, n: usize) -> Vec<i64> {
    match algebra {
        Algebra::A => (0..n).map(|i| (n - 1 - i) as i64).collect(),
        Algebra::C => (0..n).map(|i| (n - i) as i64).collect(),
    }
}

fn positive_roots(algebra: Algebra, n: usize) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut r = vec![0; n];
            r[i] = 1;
            r[j] = -1;
            out.push(r);
            if algebra == Algebra::C {
                let mut r = vec![0; n];
                r[i] = 1;
                r[j] = 1;
                out.push(r);
            }
        }
        if algebra == Algebra::C {
            let mut r = vec![0; n];
            r[i] = 2;
            out.push(r);
        }
    }
    out
}

/// Dominant Weyl conjugate in epsilon coordinates.
pub fn dominant_rep(algebra: Algebra, eps: &[i32]) -> Vec<i32> {
    let mut v = eps.to_vec();
    if algebra == Algebra::C {
        for x in v.iter_mut() {
            *x = x.abs();
        }
    }
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

pub fn weyl_dim(label: &IrrepLabel) -> u128 {
    let n = label.eps_len();
    let lam = label.eps();
    let r = rho(label.algebra, n);
    let l: Vec<i64> = lam.iter().zip(&r).map(|(a, b)| *a as i64 + b).collect();
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..n {
        for j in i + 1..n {
            num *= BigInt::from(l[i] - l[j]);
            den *= BigInt::from(r[i] - r[j]);
            if label.algebra == Algebra::C {
                num *= BigInt::from(l[i] + l[j]);
                den *= BigInt::from(r[i] + r[j]);
            }
        }
        if label.algebra == Algebra::C {
            num *= BigInt::from(l[i]);
            den *= BigInt::from(r[i]);
        }
    }
    let q = BigRational::new(num, den);
    assert!(q.is_integer(), "Weyl dimension not integral");
    q.to_integer().to_u128().expect("dimension fits in u128")
}

fn dot(a: &[i32], b: &[i32]) -> i128 {
    a.iter().zip(b).map(|(x, y)| *x as i128 * *y as i128).sum()
}

/// Dominant epsilon weights μ ≤ λ.
fn dominant_below(algebra: Algebra, lam: &[i32]) -> Vec<Vec<i32>> {
    let n = lam.len();
    let total: i32 = lam.iter().sum();
    let prefix: Vec<i32> = lam
        .iter()
        .scan(0, |s, x| {
            *s += x;
            Some(*s)
        })
        .collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    #[allow(clippy::too_many_arguments)]
    fn rec(algebra: Algebra, n: usize, total: i32, prefix: &[i32], cur: &mut Vec<i32>, sum: i32, out: &mut Vec<Vec<i32>>) {
        let i = cur.len();
        if i == n {
            let ok = match algebra {
                Algebra::A => sum == total,
                Algebra::C => sum <= total && (total - sum) % 2 == 0,
            };
            if ok {
                out.push(cur.clone());
            }
            return;
        }
        let upper = cur.last().copied().unwrap_or(i32::MAX).min(prefix[i] - sum);
        let lower = match algebra {
            Algebra::A => {
                // remaining n−i entries, each ≤ the current one, must reach total
                0.max(total - sum - (n - i - 1) as i32 * upper.max(0)).min(upper.max(0))
            }
            Algebra::C => 0,
        };
        if upper < 0 {
            return;
        }
        for x in (lower..=upper).rev() {
            if algebra == Algebra::A && sum + x + (n - i - 1) as i32 * x < total {
                break;
            }
            cur.push(x);
            rec(algebra, n, total, prefix, cur, sum + x, out);
            cur.pop();
        }
    }
    rec(algebra, n, total, &prefix, &mut cur, 0, &mut out);
    out
}

type MultCache = Mutex<HashMap<IrrepLabel, Arc<BTreeMap<Vec<i32>, i64>>>>;

fn mult_cache() -> &'static MultCache {
    static C: OnceLock<MultCache> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Multiplicities of the dominant weights of L(λ), keyed by epsilon coordinates.
pub fn dominant_multiplicities(label: &IrrepLabel) -> Arc<BTreeMap<Vec<i32>, i64>> {
    if let Some(m) = mult_cache().lock().unwrap().get(label) {
        return m.clone();
    }
    let m = Arc::new(freudenthal(label));
    mult_cache().lock().unwrap().insert(label.clone(), m.clone());
    m
}

fn freudenthal(label: &IrrepLabel) -> BTreeMap<Vec<i32>, i64> {
    let alg = label.algebra;
    let lam = label.eps();
    let n = lam.len();
    let r: Vec<i32> = rho(alg, n).into_iter().map(|x| x as i32).collect();
    let roots = positive_roots(alg, n);
    let mut doms = dominant_below(alg, &lam);
    doms.sort_by_key(|m| std::cmp::Reverse(dot(m, &r)));
    let lr: Vec<i32> = lam.iter().zip(&r).map(|(a, b)| a + b).collect();
    let norm_lr = dot(&lr, &lr);
    let mut mult: BTreeMap<Vec<i32>, i64> = BTreeMap::new();
    for mu in doms {
        if mu == lam {
            mult.insert(mu, 1);
            continue;
        }
        let mr: Vec<i32> = mu.iter().zip(&r).map(|(a, b)| a + b).collect();
        let den = norm_lr - dot(&mr, &mr);
        let mut num: i128 = 0;
        for a in &roots {
            let mut k = 1;
            loop {
                let w: Vec<i32> = mu.iter().zip(a).map(|(x, y)| x + k * y).collect();
                let d = dominant_rep(alg, &w);
                let m = match mult.get(&d) {
                    Some(&m) => m,
                    None => break,
                };
                num += m as i128 * dot(&w, a);
                k += 1;
            }
        }
        num *= 2;
        assert!(den > 0 && num % den == 0, "Freudenthal recursion not integral");
        let m = (num / den) as i64;
        if m > 0 {
            mult.insert(mu, m);
        }
    }
    mult
}

/// Distinct Weyl conjugates of a dominant epsilon weight.
pub fn weyl_orbit(algebra: Algebra, dom: &[i32]) -> Vec<Vec<i32>> {
    let mut perms = vec![];
    let mut v = dom.to_vec();
    v.sort();
    loop {
        perms.push(v.clone());
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
    }
    if algebra == Algebra::A {
        return perms;
    }
    let mut out = Vec::new();
    for p in perms {
        let nz: Vec<usize> = (0..p.len()).filter(|&i| p[i] != 0).collect();
        for mask in 0u64..(1u64 << nz.len()) {
            let mut w = p.clone();
            for (b, &i) in nz.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    w[i] = -w[i];
                }
            }
            out.push(w);
        }
    }
    out
}

/// Weight multiset with multiplicities, keyed by fundamental coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    pub algebra: Algebra,
    pub rank: usize,
    pub entries: BTreeMap<Vec<i32>, i64>,
}

impl Character {
    pub fn new(algebra: Algebra, rank: usize) -> Self {
        Character { algebra, rank, entries: BTreeMap::new() }
    }

    pub fn add(&mut self, fund: Vec<i32>, m: i64) {
        if m == 0 {
            return;
        }
        let e = self.entries.entry(fund.clone()).or_insert(0);
        *e += m;
        if *e == 0 {
            self.entries.remove(&fund);
        }
    }

    pub fn add_eps(&mut self, eps: &[i32], m: i64) {
        self.add(eps_to_fund(self.algebra, eps), m);
    }

    pub fn add_character(&mut self, other: &Character, scale: i64) {
        for (w, m) in &other.entries {
            self.add(w.clone(), m * scale);
        }
    }

    pub fn mass(&self) -> i64 {
        self.entries.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, fund: &[i32]) -> i64 {
        self.entries.get(fund).copied().unwrap_or(0)
    }

    pub fn dominant_part(&self) -> BTreeMap<Vec<i32>, i64> {
        self.entries.iter().filter(|(w, _)| w.iter().all(|&c| c >= 0)).map(|(w, m)| (w.clone(), *m)).collect()
    }

    /// Checks invariance under the simple reflections.
    pub fn is_weyl_symmetric(&self) -> bool {
        let n = eps_len(self.algebra, self.rank);
        for (w, m) in &self.entries {
            let e = fund_to_eps(self.algebra, w);
            for s in 0..n {
                let mut r = e.clone();
                if s + 1 < n {
                    r.swap(s, s + 1);
                } else if self.algebra == Algebra::C {
                    r[s] = -r[s];
                } else {
                    continue;
                }
                if self.get(&eps_to_fund(self.algebra, &r)) != *m {
                    return false;
                }
            }
        }
        true
    }

    /// Character of the Adams operation x ↦ x² (weights doubled).
    pub fn adams2(&self) -> Character {
        let mut out = Character::new(self.algebra, self.rank);
        for (w, m) in &self.entries {
            out.add(w.iter().map(|c| 2 * c).collect(), *m);
        }
        out
    }

    pub fn product(&self, other: &Character) -> Character {
        let mut out = Character::new(self.algebra, self.rank);
        let mut acc: HashMap<Vec<i32>, i64> = HashMap::new();
        for (w1, m1) in &self.entries {
            for (w2, m2) in &other.entries {
                let w: Vec<i32> = w1.iter().zip(w2).map(|(a, b)| a + b).collect();
                *acc.entry(w).or_insert(0) += m1 * m2;
            }
        }
        for (w, m) in acc {
            out.add(w, m);
        }
        out
    }
}

pub fn irrep_character(label: &IrrepLabel) -> Character {
    let mut out = Character::new(label.algebra, label.rank());
    for (dom, m) in dominant_multiplicities(label).iter() {
        for w in weyl_orbit(label.algebra, dom) {
            out.add_eps(&w, *m);
        }
    }
    out
}

/// Character of a constructed space restricted to sl_g.
pub fn module_character(space: &ModuleSpace) -> Character {
    module_character_as(space, Algebra::A)
}

/// Character of a constructed space for sl_g (A) or, when the space is an
/// Sp-module built over H, for sp_2g (C).
pub fn module_character_as(space: &ModuleSpace, algebra: Algebra) -> Character {
    let g = space.g();
    let mut out = Character::new(algebra, fund_len(algebra, g));
    let mut acc: HashMap<&[i32], i64> = HashMap::new();
    for w in space.weights_eps() {
        *acc.entry(w.as_slice()).or_insert(0) += 1;
    }
    for (w, m) in acc {
        out.add_eps(w, m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep_spaces::{build, ModuleExpr};
    use proptest::prelude::*;

    #[test]
    fn dimensions() {
        assert_eq!(weyl_dim(&IrrepLabel::phi(&[1, 0, 0, 0])), 5);
        assert_eq!(weyl_dim(&IrrepLabel::phi(&[1, 2])), 15);
        assert_eq!(weyl_dim(&IrrepLabel::gamma(&[0, 0, 1], 3)), 14);
        assert_eq!(weyl_dim(&IrrepLabel::gamma(&[0, 1], 3)), 14);
        assert_eq!(weyl_dim(&IrrepLabel::gamma(&[1], 4)), 8);
    }

    #[test]
    fn sl2_adjoint() {
        let c = irrep_character(&IrrepLabel::phi(&[2]));
        let expect: BTreeMap<Vec<i32>, i64> = [(vec![2], 1), (vec![0], 1), (vec![-2], 1)].into_iter().collect();
        assert_eq!(c.entries, expect);
    }

    #[test]
    fn wedge2v_matches_fundamental() {
        for g in 3..7 {
            let s = build(&ModuleExpr::wedge(2, ModuleExpr::StdV), g).unwrap();
            let mut l = vec![0; g - 1];
            l[1] = 1;
            assert_eq!(module_character(&s), irrep_character(&IrrepLabel::phi(&l)));
        }
    }

    #[test]
    fn gamma01_is_wedge2h_mod_trivial() {
        let g = 3;
        let s = build(&ModuleExpr::wedge(2, ModuleExpr::FullH), g).unwrap();
        let mut c = module_character_as(&s, Algebra::C);
        c.add(vec![0; g], -1);
        let gam = irrep_character(&IrrepLabel::gamma(&[0, 1], g));
        assert_eq!(gam.mass(), 14);
        assert_eq!(c, gam);
    }

    #[test]
    fn wedge2_sym2_dual_is_irreducible() {
        let g = 3;
        let s = build(&ModuleExpr::wedge(2, ModuleExpr::sym(2, ModuleExpr::DualV)), g).unwrap();
        let c = module_character(&s);
        assert_eq!(c.mass(), 15);
        assert_eq!(c, irrep_character(&IrrepLabel::phi(&[1, 2])));
    }

    #[test]
    fn label_parsing() {
        let l = IrrepLabel::parse("Phi[0,1,0,0,1]", None).unwrap();
        assert_eq!(l.to_string(), "Phi[0,1,0,0,1]");
        assert_eq!(IrrepLabel::parse("Gamma[0,2]", None).unwrap().algebra, Algebra::C);
        assert!(IrrepLabel::parse("Psi[1]", None).is_err());
    }

    fn small_label() -> impl Strategy<Value = IrrepLabel> {
        (prop_oneof![Just(Algebra::A), Just(Algebra::C)], proptest::collection::vec(0i32..3, 1..5))
            .prop_map(|(a, c)| IrrepLabel { algebra: a, coords: c })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn mass_is_weyl_dim(l in small_label()) {
            let c = irrep_character(&l);
            prop_assert_eq!(c.mass() as u128, weyl_dim(&l));
        }

        #[test]
        fn characters_are_weyl_symmetric(l in small_label()) {
            prop_assert!(irrep_character(&l).is_weyl_symmetric());
        }
    }

    #[test]
    fn module_mass_is_dimension() {
        for (text, g) in [("U", 3), ("W", 3), ("sym(2,wedge(2,H))", 3), ("tensor(V,dualV)", 4)] {
            let s = build(&ModuleExpr::parse(text).unwrap(), g).unwrap();
            assert_eq!(module_character(&s).mass() as usize, s.dim());
        }
    }
}
