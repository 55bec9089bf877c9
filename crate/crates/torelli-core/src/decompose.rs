//! Decomposition into irreducibles by character subtraction and by
//! highest-weight vectors, plethysms, Sp→SL branching and generated submodules.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use rayon::prelude::*;

use crate::characters::{
    dominant_multiplicities, eps_len, eps_to_fund, fund_to_eps, irrep_character, module_character, weyl_dim, Algebra, Character, CharacterError,
    IrrepLabel,
};
use crate::rep_spaces::{ModuleSpace, Op, SpaceError};
use crate::scalar_linalg::{kernel_basis, Echelon, SparseMatrix, SparseVector};

/// Multiset of irreducible labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub algebra: Algebra,
    pub rank: usize,
    pub parts: BTreeMap<IrrepLabel, u64>,
}

impl Decomposition {
    pub fn new(algebra: Algebra, rank: usize) -> Self {
        Decomposition { algebra, rank, parts: BTreeMap::new() }
    }

    pub fn from_parts<I: IntoIterator<Item = (IrrepLabel, u64)>>(algebra: Algebra, rank: usize, parts: I) -> Self {
        let mut d = Decomposition::new(algebra, rank);
        for (l, m) in parts {
            d.add(l, m);
        }
        d
    }

    pub fn add(&mut self, l: IrrepLabel, m: u64) {
        if m > 0 {
            *self.parts.entry(l).or_insert(0) += m;
        }
    }

    pub fn merge(&mut self, other: &Decomposition) {
        for (l, m) in &other.parts {
            self.add(l.clone(), *m);
        }
    }

    pub fn multiplicity(&self, l: &IrrepLabel) -> u64 {
        self.parts.get(l).copied().unwrap_or(0)
    }

    pub fn dimension(&self) -> u128 {
        self.parts.iter().map(|(l, m)| weyl_dim(l) * *m as u128).sum()
    }

    pub fn total(&self) -> u64 {
        self.parts.values().sum()
    }

    /// Whether every summand of `self` occurs in `other` at least as often.
    pub fn is_submultiset_of(&self, other: &Decomposition) -> bool {
        self.parts.iter().all(|(l, m)| other.multiplicity(l) >= *m)
    }

    /// `self − other`, or `None` when `other` is not contained in `self`.
    pub fn minus(&self, other: &Decomposition) -> Option<Decomposition> {
        if !other.is_submultiset_of(self) {
            return None;
        }
        let mut out = Decomposition::new(self.algebra, self.rank);
        for (l, m) in &self.parts {
            out.add(l.clone(), m - other.multiplicity(l));
        }
        Some(out)
    }

    pub fn dual(&self) -> Decomposition {
        Decomposition::from_parts(self.algebra, self.rank, self.parts.iter().map(|(l, m)| (l.dual(), *m)))
    }

    pub fn character(&self) -> Character {
        let mut c = Character::new(self.algebra, self.rank);
        for (l, m) in &self.parts {
            c.add_character(&irrep_character(l), *m as i64);
        }
        c
    }

    /// Summands in display order: highest first.
    pub fn ordered(&self) -> Vec<(&IrrepLabel, u64)> {
        let mut v: Vec<(&IrrepLabel, u64)> = self.parts.iter().map(|(l, m)| (l, *m)).collect();
        v.sort_by_key(|x| std::cmp::Reverse(order_key(self.algebra, &x.0.coords)));
        v
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .ordered()
            .into_iter()
            .map(|(l, m)| {
                let c: Vec<String> = l.coords.iter().map(|x| x.to_string()).collect();
                format!("{m}X[{}]", c.join(","))
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// ⟨μ, 2ρ⟩ (in a shift-invariant normalization), then lexicographic.
fn order_key(algebra: Algebra, fund: &[i32]) -> (i64, Vec<i32>) {
    let eps = fund_to_eps(algebra, fund);
    let n = eps.len() as i64;
    let h: i64 = eps
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let r = match algebra {
                Algebra::A => n - 1 - 2 * i as i64,
                Algebra::C => 2 * (n - i as i64),
            };
            e as i64 * r
        })
        .sum();
    (h, fund.to_vec())
}

/// Greedy subtraction of irreducible characters from the dominant part.
pub fn decompose_character(c: &Character) -> Result<Decomposition, CharacterError> {
    let alg = c.algebra;
    if !c.is_weyl_symmetric() {
        return Err(CharacterError::NotModule("character is not Weyl-symmetric".into()));
    }
    let mut rem: BTreeMap<Vec<i32>, i64> = c.dominant_part();
    if let Some((w, m)) = rem.iter().find(|(_, m)| **m < 0) {
        return Err(CharacterError::NotModule(format!("weight {w:?} has multiplicity {m}")));
    }
    let mut out = Decomposition::new(alg, c.rank);
    loop {
        rem.retain(|_, m| *m != 0);
        let top = match rem.keys().max_by_key(|w| order_key(alg, w)) {
            Some(t) => t.clone(),
            None => break,
        };
        let m = rem[&top];
        let label = IrrepLabel { algebra: alg, coords: top };
        for (eps, k) in dominant_multiplicities(&label).iter() {
            let key = eps_to_fund(alg, eps);
            let e = rem.entry(key.clone()).or_insert(0);
            *e -= k * m;
            if *e < 0 {
                return Err(CharacterError::NotModule(format!("weight {key:?} went negative")));
            }
        }
        out.add(label, m as u64);
    }
    Ok(out)
}

pub fn tensor_decompose(l1: &IrrepLabel, l2: &IrrepLabel) -> Result<Decomposition, CharacterError> {
    if l1.algebra != l2.algebra || l1.rank() != l2.rank() {
        return Err(CharacterError::Mismatch);
    }
    decompose_character(&irrep_character(l1).product(&irrep_character(l2)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerKind {
    Alt,
    Sym,
}

fn adams(c: &Character, k: i32) -> Character {
    let mut out = Character::new(c.algebra, c.rank);
    for (w, m) in &c.entries {
        out.add(w.iter().map(|x| x * k).collect(), *m);
    }
    out
}

/// Character of ∧ᵏ or Symᵏ by the Newton identities in the power sums χ(xⁱ).
pub fn power_character(kind: PowerKind, k: usize, c: &Character) -> Character {
    let mut e: Vec<Character> = vec![{
        let mut one = Character::new(c.algebra, c.rank);
        one.add(vec![0; c.rank], 1);
        one
    }];
    let p: Vec<Character> = (0..=k).map(|i| adams(c, i as i32)).collect();
    for n in 1..=k {
        let mut acc = Character::new(c.algebra, c.rank);
        for i in 1..=n {
            let sign = match kind {
                PowerKind::Alt if i % 2 == 0 => -1,
                _ => 1,
            };
            acc.add_character(&e[n - i].product(&p[i]), sign);
        }
        let mut div = Character::new(c.algebra, c.rank);
        for (w, m) in acc.entries {
            assert!(m % n as i64 == 0, "Newton identity not integral");
            div.add(w, m / n as i64);
        }
        e.push(div);
    }
    e.pop().unwrap()
}

pub fn power_decompose(kind: PowerKind, k: usize, l: &IrrepLabel) -> Result<Decomposition, CharacterError> {
    decompose_character(&power_character(kind, k, &irrep_character(l)))
}

/// Restriction of an sp_2g irreducible to sl_g along L_i ↦ L_i.
pub fn branch_c_to_a(l: &IrrepLabel) -> Result<Decomposition, CharacterError> {
    if l.algebra != Algebra::C {
        return Err(CharacterError::Mismatch);
    }
    let g = l.rank();
    let full = irrep_character(l);
    let mut a = Character::new(Algebra::A, g - 1);
    for (w, m) in &full.entries {
        a.add_eps(&fund_to_eps(Algebra::C, w), *m);
    }
    decompose_character(&a)
}

/// Basis of the highest-weight space at one weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HwvWitness {
    pub weight: Vec<i32>,
    pub vectors: Vec<SparseVector>,
}

pub fn raising_ops(g: usize) -> Vec<Op> {
    (1..g).map(|i| Op::E(i, i + 1)).collect()
}

/// Applies every raising operator E_{i,i+1}; true when all images vanish.
pub fn is_highest_weight_vector(space: &ModuleSpace, v: &SparseVector) -> Result<bool, SpaceError> {
    for op in raising_ops(space.g()) {
        if !space.act(op, v)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The common weight of `v` (fundamental coordinates), if it is a weight vector.
pub fn weight_of_vector(space: &ModuleSpace, v: &SparseVector) -> Option<Vec<i32>> {
    let mut w: Option<Vec<i32>> = None;
    for i in v.support() {
        let wi = space.weight_of(i);
        match &w {
            None => w = Some(wi),
            Some(x) if *x == wi => {}
            _ => return None,
        }
    }
    w
}

fn kernel_on_basis(space: &ModuleSpace, basis: &[usize]) -> Result<Vec<SparseVector>, SpaceError> {
    let mut rows: BTreeMap<(usize, usize), SparseVector> = BTreeMap::new();
    for (j, &b) in basis.iter().enumerate() {
        for (k, op) in raising_ops(space.g()).into_iter().enumerate() {
            for (t, c) in space.act_basis(op, b)?.iter() {
                rows.entry((k, t)).or_default().add_at(j, c);
            }
        }
    }
    let m = SparseMatrix::from_rows(basis.len(), rows.into_values().collect()).expect("row width");
    Ok(kernel_basis(&m).into_iter().map(|k| SparseVector::from_pairs(k.into_pairs().map(|(j, c)| (basis[j], c)))).collect())
}

/// Kernel of all raising operators on the weight-`w` space.
pub fn hwv_solve(space: &ModuleSpace, w: &[i32]) -> Result<HwvWitness, SpaceError> {
    let basis: Vec<usize> = (0..space.dim()).filter(|&i| space.weight_of(i) == w).collect();
    Ok(HwvWitness { weight: w.to_vec(), vectors: kernel_on_basis(space, &basis)? })
}

/// Decomposition read off from highest-weight spaces, one per dominant weight.
pub fn decompose_module(space: &ModuleSpace) -> Result<(Decomposition, Vec<HwvWitness>), SpaceError> {
    let g = space.g();
    let spaces: Vec<(Vec<i32>, Vec<usize>)> = space.weight_spaces().into_iter().filter(|(w, _)| w.iter().all(|&c| c >= 0)).collect();
    let witnesses: Vec<HwvWitness> = spaces
        .par_iter()
        .map(|(w, basis)| Ok(HwvWitness { weight: w.clone(), vectors: kernel_on_basis(space, basis)? }))
        .collect::<Result<_, SpaceError>>()?;
    let mut d = Decomposition::new(Algebra::A, g - 1);
    for w in &witnesses {
        d.add(IrrepLabel { algebra: Algebra::A, coords: w.weight.clone() }, w.vectors.len() as u64);
    }
    Ok((d, witnesses.into_iter().filter(|w| !w.vectors.is_empty()).collect()))
}

/// Character route: decompose_character ∘ module_character.
pub fn decompose_space_by_character(space: &ModuleSpace) -> Result<Decomposition, CharacterError> {
    decompose_character(&module_character(space))
}

/// Smallest subspace containing `v` stable under all E_ij and handleswaps.
pub struct GeneratedSubmodule {
    pub dim: usize,
    pub decomposition: Decomposition,
    pub basis: Vec<SparseVector>,
}

pub fn generated_submodule(space: &ModuleSpace, v: &SparseVector) -> Result<GeneratedSubmodule, SpaceError> {
    let g = space.g();
    let mut ops = Vec::new();
    for i in 1..=g {
        for j in 1..=g {
            if i != j {
                ops.push(Op::E(i, j));
                if i < j {
                    ops.push(Op::Swap(i, j));
                }
            }
        }
    }
    let mut by_weight: HashMap<Vec<i32>, Echelon> = HashMap::new();
    let mut queue: VecDeque<SparseVector> = VecDeque::new();
    let mut basis = Vec::new();
    let offer = |w: SparseVector, by_weight: &mut HashMap<Vec<i32>, Echelon>, queue: &mut VecDeque<SparseVector>| {
        let mut parts: BTreeMap<Vec<i32>, SparseVector> = BTreeMap::new();
        for (i, c) in w.iter() {
            parts.entry(space.weight_eps(i).to_vec()).or_default().add_at(i, c);
        }
        for (wt, part) in parts {
            let ech = by_weight.entry(wt).or_default();
            let r = ech.reduce(&part);
            if !r.is_zero() {
                ech.insert(r.clone());
                queue.push_back(r);
            }
        }
    };
    offer(v.clone(), &mut by_weight, &mut queue);
    while let Some(x) = queue.pop_front() {
        basis.push(x.clone());
        let images: Vec<SparseVector> = ops.par_iter().map(|op| space.act(*op, &x)).collect::<Result<_, SpaceError>>()?;
        for im in images {
            if !im.is_zero() {
                offer(im, &mut by_weight, &mut queue);
            }
        }
    }
    let mut c = Character::new(Algebra::A, g - 1);
    for (wt, ech) in &by_weight {
        c.add_eps(wt, ech.rank() as i64);
    }
    let decomposition = decompose_character(&c).expect("a submodule has a module character");
    Ok(GeneratedSubmodule { dim: basis.len(), decomposition, basis })
}

/// Convenience: labels on the A side in fundamental coordinates of rank g−1.
pub fn phi(coords: &[i32]) -> IrrepLabel {
    IrrepLabel::phi(coords)
}

pub fn eps_rank(algebra: Algebra, rank: usize) -> usize {
    eps_len(algebra, rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep_spaces::{build, Formal, ModuleExpr};
    use crate::scalar_linalg::rat;

    fn sp(text: &str, g: usize) -> std::sync::Arc<ModuleSpace> {
        build(&ModuleExpr::parse(text).unwrap(), g).unwrap()
    }

    fn unit_label(g: usize, positions: &[usize]) -> IrrepLabel {
        let mut c = vec![0; g - 1];
        for &p in positions {
            c[p - 1] += 1;
        }
        IrrepLabel::phi(&c)
    }

    #[test]
    fn adjoint_plus_trivial() {
        let d = decompose_space_by_character(&sp("tensor(V,dualV)", 3)).unwrap();
        assert_eq!(d.to_string(), "1X[1,1] + 1X[0,0]");
        let t = tensor_decompose(&phi(&[1, 0]), &phi(&[0, 1])).unwrap();
        assert_eq!(t, d);
    }

    #[test]
    fn wedge3h_g6() {
        let g = 6;
        let d = decompose_space_by_character(&sp("wedge(3,H)", g)).unwrap();
        let expect = Decomposition::from_parts(
            Algebra::A,
            g - 1,
            [
                unit_label(g, &[3]),
                unit_label(g, &[2, 5]),
                unit_label(g, &[1]),
                unit_label(g, &[1, 4]),
                unit_label(g, &[5]),
                unit_label(g, &[3]).dual(),
            ]
            .into_iter()
            .map(|l| (l, 1)),
        );
        assert_eq!(d, expect);
    }

    #[test]
    fn methods_agree_on_wedge3h() {
        let s = sp("wedge(3,H)", 4);
        assert_eq!(decompose_module(&s).unwrap().0, decompose_space_by_character(&s).unwrap());
    }

    #[test]
    fn sym2_dual_witness() {
        let g = 3;
        let s = sp("sym(2,dualV)", g);
        let (d, w) = decompose_module(&s).unwrap();
        assert_eq!(d.total(), 1);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].weight, vec![0, 2]);
        let bg = Formal::b(g, g);
        let v = s.embed(&bg.tensor(&bg)).unwrap();
        assert_eq!(w[0].vectors.len(), 1);
        assert_eq!(w[0].vectors[0].leading().map(|x| x.0), v.leading().map(|x| x.0));
    }

    #[test]
    fn appendix_style_kernel() {
        let g = 5;
        let s = sp("tensor(tensor(wedge(2,V),dualV),sym(2,dualV))", g);
        let a = |k| Formal::a(g, k);
        let b = |k| Formal::b(g, k);
        let v1 = a(1).wedge(&a(2)).tensor(&b(g - 1)).group().tensor(&b(g).tensor(&b(g)).group());
        let v2 = a(1).wedge(&a(2)).tensor(&b(g)).group().tensor(&b(g - 1).sym_product(&b(g)).group());
        let v = s.embed(&v1.scale(&rat(-2)).add(&v2)).unwrap();
        assert!(is_highest_weight_vector(&s, &v).unwrap());
        assert_eq!(weight_of_vector(&s, &v).unwrap(), vec![0, 1, 1, 1]);
        let hw = hwv_solve(&s, &[0, 1, 1, 1]).unwrap();
        assert_eq!(hw.vectors.len(), 1);
        assert_eq!(hw.vectors[0].nnz(), 2);
    }

    #[test]
    fn g3_identity() {
        let d = decompose_space_by_character(&sp("wedge(2,tensor(wedge(2,V),dualV))", 3)).unwrap();
        let expect = Decomposition::from_parts(Algebra::A, 2, [(phi(&[0, 1]), 2), (phi(&[1, 2]), 2)]);
        assert_eq!(d, expect);
        assert_eq!(d.dimension(), 36);
    }

    #[test]
    fn wedge2_sym2_plethysm() {
        for g in 3..6 {
            let mut l = vec![0; g - 1];
            l[g - 2] = 2;
            let d = power_decompose(PowerKind::Alt, 2, &IrrepLabel::phi(&l)).unwrap();
            let mut e = vec![0; g - 1];
            e[g - 2] = 2;
            e[g - 3] += 1;
            assert_eq!(d, Decomposition::from_parts(Algebra::A, g - 1, [(IrrepLabel::phi(&e), 1)]));
        }
    }

    #[test]
    fn plethysm_matches_module() {
        let g = 4;
        let s = sp("wedge(2,wedge(2,V))", g);
        let p = power_decompose(PowerKind::Alt, 2, &phi(&[0, 1, 0])).unwrap();
        assert_eq!(p, decompose_space_by_character(&s).unwrap());
        let s = sp("sym(3,V)", g);
        let p = power_decompose(PowerKind::Sym, 3, &phi(&[1, 0, 0])).unwrap();
        assert_eq!(p, decompose_space_by_character(&s).unwrap());
    }

    #[test]
    fn branch_standard_and_gamma01() {
        for g in 3..7 {
            let d = branch_c_to_a(&IrrepLabel::gamma(&[1], g)).unwrap();
            let expect = Decomposition::from_parts(Algebra::A, g - 1, [(unit_label(g, &[1]), 1), (unit_label(g, &[g - 1]), 1)]);
            assert_eq!(d, expect);
        }
        for g in 5..7 {
            let l = IrrepLabel::gamma(&[0, 1], g);
            let d = branch_c_to_a(&l).unwrap();
            let expect = Decomposition::from_parts(
                Algebra::A,
                g - 1,
                [(unit_label(g, &[2]), 1), (unit_label(g, &[1, g - 1]), 1), (unit_label(g, &[g - 2]), 1)],
            );
            assert_eq!(d, expect);
            assert_eq!(d.dimension(), weyl_dim(&l));
        }
    }

    #[test]
    fn orbit_of_b1b1() {
        for g in 3..5 {
            let s = sp("sym(2,dualV)", g);
            let b1 = Formal::b(g, 1);
            let v = s.embed(&b1.tensor(&b1)).unwrap();
            let sub = generated_submodule(&s, &v).unwrap();
            assert_eq!(sub.dim, g * (g + 1) / 2);
        }
        let s = sp("V", 3);
        assert_eq!(generated_submodule(&s, &SparseVector::new()).unwrap().dim, 0);
    }

    #[test]
    fn not_a_module_character() {
        let mut c = Character::new(Algebra::A, 2);
        c.add(vec![1, 0], 1);
        assert!(decompose_character(&c).is_err());
        let mut c = irrep_character(&phi(&[1, 1]));
        c.add(vec![0, 0], -1);
        match decompose_character(&c) {
            Err(CharacterError::NotModule(_)) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duality_rule() {
        let g = 4;
        let d = decompose_space_by_character(&sp("tensor(wedge(2,V),dualV)", g)).unwrap();
        let dd = decompose_space_by_character(&sp("tensor(wedge(2,dualV),V)", g)).unwrap();
        assert_eq!(d.dual(), dd);
    }
}
