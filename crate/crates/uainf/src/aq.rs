//! André–Quillen cohomology of unital associative algebras concentrated in degree 0,
//! computed from the cotangent complex `A ⊗ uAs^¡(A) ⊗ A`, together with the normalized
//! Hochschild complex used as an independent oracle.
//!
//! An element `a ⊗ (μ̄_n^S ⊗ b_1 ⋯ b_{n−|S|}) ⊗ c` sits in homological degree `n − 1 + |S|`
//! (its weight), so `A ⊗ A ⊗ A` is degree 0, and cochains on the weight `w` part form
//! cochain degree `w`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::algebra::{Bimodule, UnitalDga};
use crate::comb::Comb;
use crate::error::{Error, Result};
use crate::linalg::sparse_rank;
use crate::multilinear::tuples;
use crate::rational::{one, sign, Rational};
use crate::shapes::Corolla;

/// `(a, μ̄_n^S, (b_1, …, b_{n−|S|}), c)`.
pub type CotangentKey = (usize, Corolla, Vec<usize>, usize);
pub type CotangentElement = Comb<CotangentKey>;

pub fn weight(c: Corolla) -> usize {
    c.cooperad_degree() as usize
}

pub struct Cotangent<'a> {
    alg: &'a UnitalDga,
}

fn drop_leaf(c: Corolla, leaf: usize) -> Corolla {
    let m = c.mask();
    let low = m & ((1u32 << (leaf - 1)) - 1);
    let high = (m >> leaf) << (leaf - 1);
    Corolla::from_mask(c.n() - 1, low | high)
}

impl<'a> Cotangent<'a> {
    pub fn new(alg: &'a UnitalDga) -> Result<Self> {
        if !alg.is_concentrated_in_degree_zero() {
            return Err(Error::Invalid("the cotangent complex is implemented for algebras concentrated in degree 0".into()));
        }
        Ok(Cotangent { alg })
    }

    pub fn algebra(&self) -> &UnitalDga {
        self.alg
    }

    fn product(&self, x: usize, y: usize) -> Comb<usize> {
        self.alg.product.apply_basis(&[x, y])
    }

    /// Generators `1 ⊗ (μ̄_n^S ⊗ b⃗) ⊗ 1` of the given weight.
    pub fn generators(&self, w: usize) -> Vec<(Corolla, Vec<usize>)> {
        let dim = self.alg.complex.dim();
        Corolla::all_up_to(w + 1)
            .into_iter()
            .filter(|c| weight(*c) == w)
            .flat_map(|c| tuples(dim, c.arity()).into_iter().map(move |t| (c, t)))
            .collect()
    }

    /// All basis elements of the given weight.
    pub fn basis(&self, w: usize) -> Vec<CotangentKey> {
        let dim = self.alg.complex.dim();
        self.generators(w)
            .into_iter()
            .flat_map(|(c, t)| {
                let mut v = Vec::with_capacity(dim * dim);
                for a in 0..dim {
                    for z in 0..dim {
                        v.push((a, c, t.clone(), z));
                    }
                }
                v
            })
            .collect()
    }

    pub fn unit_generator(&self, c: Corolla, args: Vec<usize>) -> CotangentKey {
        (self.alg.unit, c, args, self.alg.unit)
    }

    /// `ε₁ a·b₁ ⊗ μ̄_{n−1}^{S−1}(b₂ ⋯) ⊗ c + (−1)^n ε₂ a ⊗ μ̄_{n−1}^S(⋯ b_{k−1}) ⊗ b_k·c`.
    pub fn delta_l(&self, key: &CotangentKey) -> CotangentElement {
        let (a, c, b, z) = key;
        let n = c.n();
        let mut out = Comb::new();
        if n < 2 {
            return out;
        }
        if !c.is_corked(1) {
            for (x, q) in &self.product(*a, b[0]) {
                out.add_term((*x, drop_leaf(*c, 1), b[1..].to_vec(), *z), q.clone());
            }
        }
        if !c.is_corked(n) {
            let k = b.len();
            for (x, q) in &self.product(b[k - 1], *z) {
                out.add_term((*a, drop_leaf(*c, n), b[..k - 1].to_vec(), *x), q * sign(n as i64));
            }
        }
        out
    }

    /// `−Σ_{u ∈ S} (−1)^{n+|S₁|} a ⊗ μ̄_n^{S∖u}(⋯ 1_A ⋯) ⊗ c`.
    pub fn delta_cork(&self, key: &CotangentKey) -> CotangentElement {
        let (a, c, b, z) = key;
        let n = c.n();
        let mut out = Comb::new();
        for (before, u) in c.corks().into_iter().enumerate() {
            let mut args = b.clone();
            args.insert(u - 1 - before, self.alg.unit);
            let nc = Corolla::from_mask(n, c.mask() & !(1 << (u - 1)));
            out.add_term((*a, nc, args, *z), -sign((n + before) as i64));
        }
        out
    }

    /// `−Σ_t (−1)^t a ⊗ μ̄_{n−1}^{S₂ ⊔ (S₂′−1)}(⋯ b_t·b_{t+1} ⋯) ⊗ c` over adjacent open leaves.
    pub fn delta_gamma(&self, key: &CotangentKey) -> CotangentElement {
        let (a, c, b, z) = key;
        let n = c.n();
        let mut out = Comb::new();
        let mut before = 0;
        for t in 1..n {
            if c.is_corked(t) {
                before += 1;
                continue;
            }
            if c.is_corked(t + 1) {
                continue;
            }
            let j = t - 1 - before;
            let nc = drop_leaf(*c, t + 1);
            for (x, q) in &self.product(b[j], b[j + 1]) {
                let mut args = b[..j].to_vec();
                args.push(*x);
                args.extend_from_slice(&b[j + 2..]);
                out.add_term((*a, nc, args, *z), -(q * sign(t as i64)));
            }
        }
        out
    }

    /// `d_φ = −δ^l + δ_cork + δ_γ`.
    pub fn d(&self, key: &CotangentKey) -> CotangentElement {
        let mut out = self.delta_l(key).negated();
        out.add_comb(self.delta_cork(key));
        out.add_comb(self.delta_gamma(key));
        out
    }

    /// The differential `d⁰ = −δ^l + δ_γ` of the associated graded for the cork filtration.
    pub fn d_graded(&self, key: &CotangentKey) -> CotangentElement {
        let mut out = self.delta_l(key).negated();
        out.add_comb(self.delta_gamma(key));
        out
    }

    pub fn apply(&self, f: impl Fn(&CotangentKey) -> CotangentElement, x: &CotangentElement) -> CotangentElement {
        let mut out = Comb::new();
        for (k, q) in x {
            out.add_scaled(&f(k), q);
        }
        out
    }

    /// `h(a ⊗ μ̄_n^S(b⃗) ⊗ c) = −1 ⊗ μ̄_{n+1}^{S+1}(a, b⃗) ⊗ c`.
    pub fn contracting_homotopy(&self, key: &CotangentKey) -> CotangentElement {
        let (a, c, b, z) = key;
        let mut args = vec![*a];
        args.extend_from_slice(b);
        Comb::single((self.alg.unit, Corolla::from_mask(c.n() + 1, c.mask() << 1), args, *z), -one())
    }

    /// `h(a ⊗ μ̄_n^S(b⃗) ⊗ c) = (−1)^{min S} a ⊗ μ̄_{n+1}^{S+1}(b_1 ⋯ b_{min S − 1} 1_A b_{min S} ⋯) ⊗ c`,
    /// zero on cork-free elements.
    pub fn graded_homotopy(&self, key: &CotangentKey) -> CotangentElement {
        let (a, c, b, z) = key;
        let Some(&m) = c.corks().first() else {
            return Comb::new();
        };
        let mut args = b.clone();
        args.insert(m - 1, self.alg.unit);
        Comb::single((*a, Corolla::from_mask(c.n() + 1, c.mask() << 1), args, *z), sign(m as i64))
    }

    /// Keys of the given weight on which `d_φ² ≠ 0`.
    pub fn d_squared_failures(&self, w: usize, all_elements: bool) -> Vec<CotangentKey> {
        let keys = if all_elements {
            self.basis(w)
        } else {
            self.generators(w).into_iter().map(|(c, t)| self.unit_generator(c, t)).collect()
        };
        let mut bad: Vec<CotangentKey> =
            keys.into_par_iter().filter(|k| !self.apply(|x| self.d(x), &self.d(k)).is_zero()).collect();
        bad.sort();
        bad
    }

    /// Keys of the given weight where `d h + h d ≠ id`.
    pub fn homotopy_failures(&self, w: usize) -> Vec<CotangentKey> {
        let mut bad: Vec<CotangentKey> = self
            .basis(w)
            .into_par_iter()
            .filter(|k| {
                let mut e = self.apply(|x| self.d(x), &self.contracting_homotopy(k));
                e.add_comb(self.apply(|x| self.contracting_homotopy(x), &self.d(k)));
                e != Comb::basis(k.clone())
            })
            .collect();
        bad.sort();
        bad
    }

    /// Keys of the given weight where `id − i∘p ≠ d⁰h + hd⁰` on the associated graded page.
    pub fn graded_retract_failures(&self, w: usize) -> Vec<CotangentKey> {
        let mut bad: Vec<CotangentKey> = self
            .basis(w)
            .into_par_iter()
            .filter(|k| {
                let mut e = self.apply(|x| self.d_graded(x), &self.graded_homotopy(k));
                e.add_comb(self.apply(|x| self.graded_homotopy(x), &self.d_graded(k)));
                let expected = if k.1.cork_count() > 0 { Comb::basis(k.clone()) } else { Comb::new() };
                e != expected
            })
            .collect();
        bad.sort();
        bad
    }

    /// Keys of the given weight on which the graded page differential does not square to zero.
    pub fn graded_d_squared_failures(&self, w: usize) -> Vec<CotangentKey> {
        self.basis(w).into_par_iter().filter(|k| !self.apply(|x| self.d_graded(x), &self.d_graded(k)).is_zero()).collect()
    }

    /// Keys where the cork-free part is not a subcomplex of the graded page.
    pub fn inclusion_failures(&self, w: usize) -> Vec<CotangentKey> {
        self.basis(w)
            .into_par_iter()
            .filter(|k| k.1.cork_count() == 0 && self.d_graded(k).keys().any(|x| x.1.cork_count() > 0))
            .collect()
    }

    /// Rank of the coboundary from cochains on weight `w` to cochains on weight `w + 1`.
    fn coboundary_rank(&self, m: &Bimodule, w: usize) -> usize {
        let dim_m = m.module.dim();
        let cols: BTreeMap<(Corolla, Vec<usize>), usize> =
            self.generators(w).into_iter().enumerate().map(|(i, g)| (g, i)).collect();
        let rows: Vec<BTreeMap<usize, Rational>> = self
            .generators(w + 1)
            .into_par_iter()
            .flat_map_iter(|(c, t)| {
                let dx = self.d(&self.unit_generator(c, t));
                let mut rows: Vec<BTreeMap<usize, Rational>> = vec![BTreeMap::new(); dim_m];
                for ((a, c2, t2, z), q) in &dx {
                    let col = cols[&(*c2, t2.clone())];
                    for m_in in 0..dim_m {
                        let image = m.act_right(&m.act_left(&Comb::basis(*a), &Comb::basis(m_in)), &Comb::basis(*z));
                        for (m_out, r) in &image {
                            let e = rows[*m_out].entry(col * dim_m + m_in).or_insert_with(Rational::default);
                            *e += q * r;
                        }
                    }
                }
                rows.into_iter().map(|mut r| {
                    r.retain(|_, v| *v != Rational::default());
                    r
                })
            })
            .collect();
        sparse_rank(rows)
    }

    /// `dim H^w_{uAs}(A, M)` for `w = 0..=max_degree`.
    pub fn cohomology(&self, m: &Bimodule, max_degree: usize) -> Result<Vec<usize>> {
        m.validate(self.alg)?;
        let ranks: Vec<usize> = (0..=max_degree).into_par_iter().map(|w| self.coboundary_rank(m, w)).collect();
        Ok((0..=max_degree)
            .map(|w| {
                let dim = self.generators(w).len() * m.module.dim();
                dim - ranks[w] - if w == 0 { 0 } else { ranks[w - 1] }
            })
            .collect())
    }
}

/// `dim HH^n(A, M)` for `n = 0..=max_degree` from the normalized Hochschild complex
/// `Hom(Ā^{⊗n}, M)` with `Ā` spanned by the basis elements other than the unit.
pub fn hochschild_cohomology(alg: &UnitalDga, m: &Bimodule, max_degree: usize) -> Result<Vec<usize>> {
    if !alg.is_concentrated_in_degree_zero() {
        return Err(Error::Invalid("Hochschild cohomology is implemented for algebras concentrated in degree 0".into()));
    }
    m.validate(alg)?;
    let bar: Vec<usize> = (0..alg.complex.dim()).filter(|&i| i != alg.unit).collect();
    let dim_m = m.module.dim();
    let rank = |n: usize| -> usize {
        let cols: BTreeMap<Vec<usize>, usize> = tuples(bar.len(), n).into_iter().enumerate().map(|(i, t)| (t, i)).collect();
        let pos: BTreeMap<usize, usize> = bar.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let rows: Vec<BTreeMap<usize, Rational>> = tuples(bar.len(), n + 1)
            .into_par_iter()
            .flat_map_iter(|t| {
                let xs: Vec<usize> = t.iter().map(|&i| bar[i]).collect();
                let mut rows: Vec<BTreeMap<usize, Rational>> = vec![BTreeMap::new(); dim_m];
                let mut add = |col_t: Vec<usize>, left: Option<usize>, right: Option<usize>, q: Rational| {
                    let col = cols[&col_t];
                    for m_in in 0..dim_m {
                        let mut v = Comb::basis(m_in);
                        if let Some(a) = left {
                            v = m.act_left(&Comb::basis(a), &v);
                        }
                        if let Some(a) = right {
                            v = m.act_right(&v, &Comb::basis(a));
                        }
                        for (m_out, r) in &v {
                            *rows[*m_out].entry(col * dim_m + m_in).or_insert_with(Rational::default) += &q * r;
                        }
                    }
                };
                add(t[1..].to_vec(), Some(xs[0]), None, one());
                for i in 0..n {
                    for (p, q) in &alg.product.apply_basis(&[xs[i], xs[i + 1]]) {
                        if let Some(&pi) = pos.get(p) {
                            let mut ct = t[..i].to_vec();
                            ct.push(pi);
                            ct.extend_from_slice(&t[i + 2..]);
                            add(ct, None, None, q * sign(i as i64 + 1));
                        }
                    }
                }
                add(t[..n].to_vec(), None, Some(xs[n]), sign(n as i64 + 1));
                rows.into_iter().map(|mut r| {
                    r.retain(|_, v| *v != Rational::default());
                    r
                })
            })
            .collect();
        sparse_rank(rows)
    };
    let ranks: Vec<usize> = (0..=max_degree).into_par_iter().map(rank).collect();
    Ok((0..=max_degree)
        .map(|n| bar.len().pow(n as u32) * dim_m - ranks[n] - if n == 0 { 0 } else { ranks[n - 1] })
        .collect())
}

/// One row of the comparison `dim H^n_{uAs}(A, M)` against `dim HH^{n+1}(A, M)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftRow {
    pub degree: usize,
    pub aq: usize,
    pub hochschild: usize,
}

impl ShiftRow {
    pub fn agrees(&self) -> bool {
        self.aq == self.hochschild
    }
}

/// Compares `H^n_{uAs}` with `HH^{n+1}` for `1 ≤ n ≤ max_degree`.
pub fn compare_shift(alg: &UnitalDga, m: &Bimodule, max_degree: usize) -> Result<Vec<ShiftRow>> {
    if max_degree < 1 {
        return Err(Error::Invalid("max degree must be at least 1".into()));
    }
    let aq = Cotangent::new(alg)?.cohomology(m, max_degree)?;
    let hh = hochschild_cohomology(alg, m, max_degree + 1)?;
    Ok((1..=max_degree).map(|n| ShiftRow { degree: n, aq: aq[n], hochschild: hh[n + 1] }).collect())
}
