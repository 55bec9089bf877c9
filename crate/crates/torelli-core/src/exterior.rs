//! Exterior algebra on H with the symplectic form ω, keyed by sorted lists of
//! generator indices (a_k ↦ k−1, b_k ↦ g+k−1).

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::scalar_linalg::{rat, Rational};

pub type ExtVec = BTreeMap<Vec<usize>, Rational>;

pub fn gen_a(g: usize, k: usize) -> usize {
    debug_assert!(k >= 1 && k <= g);
    k - 1
}

pub fn gen_b(g: usize, k: usize) -> usize {
    debug_assert!(k >= 1 && k <= g);
    g + k - 1
}

pub fn gen_name(g: usize, h: usize) -> String {
    if h < g {
        format!("a{}", h + 1)
    } else {
        format!("b{}", h - g + 1)
    }
}

/// ω(x, y) for generators: ω(a_i, b_i) = 1 = −ω(b_i, a_i), zero otherwise.
pub fn omega_form(g: usize, x: usize, y: usize) -> i64 {
    if x < g && y == x + g {
        1
    } else if y < g && x == y + g {
        -1
    } else {
        0
    }
}

pub fn add_term(v: &mut ExtVec, key: Vec<usize>, c: &Rational) {
    if c.is_zero() {
        return;
    }
    let remove = {
        let e = v.entry(key.clone()).or_insert_with(Rational::zero);
        *e += c;
        e.is_zero()
    };
    if remove {
        v.remove(&key);
    }
}

pub fn add_scaled(v: &mut ExtVec, w: &ExtVec, c: &Rational) {
    for (k, x) in w {
        add_term(v, k.clone(), &(x * c));
    }
}

pub fn scaled(v: &ExtVec, c: &Rational) -> ExtVec {
    let mut out = ExtVec::new();
    add_scaled(&mut out, v, c);
    out
}

pub fn monomial(list: &[usize]) -> ExtVec {
    let mut v = ExtVec::new();
    if let Some((neg, sorted)) = sort_with_sign(list) {
        add_term(&mut v, sorted, &if neg { -Rational::one() } else { Rational::one() });
    }
    v
}

/// Sorts `list`, returning the permutation parity; `None` on a repeated entry.
pub fn sort_with_sign(list: &[usize]) -> Option<(bool, Vec<usize>)> {
    let mut v = list.to_vec();
    let mut neg = false;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            neg = !neg;
            j -= 1;
        }
        if j > 0 && v[j - 1] == v[j] {
            return None;
        }
    }
    Some((neg, v))
}

/// Product of two sorted monomials with the sign of the merge.
pub fn wedge_mono(a: &[usize], b: &[usize]) -> Option<(bool, Vec<usize>)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut neg = false;
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            if (a.len() - i) % 2 == 1 {
                neg = !neg;
            }
            out.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    Some((neg, out))
}

pub fn wedge(x: &ExtVec, y: &ExtVec) -> ExtVec {
    let mut out = ExtVec::new();
    for (a, ca) in x {
        for (b, cb) in y {
            if let Some((neg, m)) = wedge_mono(a, b) {
                let c = ca * cb;
                add_term(&mut out, m, &if neg { -c } else { c });
            }
        }
    }
    out
}

/// ω = Σ a_i ∧ b_i.
pub fn omega(g: usize) -> ExtVec {
    let mut v = ExtVec::new();
    for i in 1..=g {
        add_term(&mut v, vec![gen_a(g, i), gen_b(g, i)], &Rational::one());
    }
    v
}

/// C_k(x_1∧…∧x_k) = Σ_{i<j} (−1)^{i+j+1} ω(x_i,x_j) x_1∧…x̂_i…x̂_j…∧x_k.
pub fn contract(g: usize, v: &ExtVec) -> ExtVec {
    let mut out = ExtVec::new();
    for (m, c) in v {
        for p in 0..m.len() {
            for q in p + 1..m.len() {
                let w = omega_form(g, m[p], m[q]);
                if w == 0 {
                    continue;
                }
                // 1-based exponent (p+1)+(q+1)+1
                let sign = if (p + q + 3) % 2 == 0 { 1 } else { -1 };
                let rest: Vec<usize> = m.iter().enumerate().filter(|(t, _)| *t != p && *t != q).map(|(_, x)| *x).collect();
                add_term(&mut out, rest, &(c * rat(sign * w)));
            }
        }
    }
    out
}

/// Splits v ∈ ∧³H as q(v) + (1/(g−1)) C₃(v)∧ω with C₃(q(v)) = 0.
pub fn q_split(g: usize, v: &ExtVec) -> (ExtVec, ExtVec) {
    let h = scaled(&wedge(&contract(g, v), &omega(g)), &Rational::new(1.into(), (g as i64 - 1).into()));
    let mut qv = v.clone();
    add_scaled(&mut qv, &h, &-Rational::one());
    (qv, h)
}

pub fn q_project(g: usize, v: &ExtVec) -> ExtVec {
    q_split(g, v).0
}

pub fn degree_of(v: &ExtVec) -> Option<usize> {
    v.keys().next().map(|k| k.len())
}

pub fn format_ext(g: usize, v: &ExtVec) -> String {
    if v.is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = v
        .iter()
        .map(|(m, c)| {
            let mono = if m.is_empty() { "1".to_string() } else { m.iter().map(|h| gen_name(g, *h)).collect::<Vec<_>>().join("^") };
            format!("{}*{}", crate::scalar_linalg::fmt_rational(c), mono)
        })
        .collect();
    parts.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_examples() {
        let g = 3;
        let v = monomial(&[gen_a(g, 1), gen_b(g, 1), gen_b(g, 2)]);
        assert_eq!(contract(g, &v), monomial(&[gen_b(g, 2)]));
        let aaa = monomial(&[0, 1, 2]);
        assert!(contract(g, &aaa).is_empty());
        let c2 = contract(g, &omega(g));
        assert_eq!(c2.get(&vec![]), Some(&rat(3)));
    }

    #[test]
    fn q_kills_h_wedge_omega() {
        for g in 2..6 {
            let a1w = wedge(&monomial(&[0]), &omega(g));
            let (q, h) = q_split(g, &a1w);
            assert!(q.is_empty());
            assert_eq!(h, a1w);
        }
    }

    #[test]
    fn merge_sign_matches_sort() {
        let a = vec![1, 4, 6];
        let b = vec![0, 5];
        let (neg, m) = wedge_mono(&a, &b).unwrap();
        let mut cat = a.clone();
        cat.extend(&b);
        let (neg2, m2) = sort_with_sign(&cat).unwrap();
        assert_eq!((neg, m), (neg2, m2));
        assert!(wedge_mono(&[1, 2], &[2]).is_none());
    }
}
