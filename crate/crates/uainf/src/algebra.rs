//! Presentations of unital dg algebras and bimodules, plus the standard fixtures.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::comb::Comb;
use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::multilinear::{tabulate_with, MultilinearMap};
use crate::rational::{int, one, sign, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitalDga {
    pub complex: Arc<ChainComplex>,
    pub unit: usize,
    pub product: MultilinearMap,
}

impl UnitalDga {
    pub fn new(complex: Arc<ChainComplex>, unit: &str, product: MultilinearMap) -> Result<Self> {
        let unit = complex.index_of(unit).ok_or_else(|| Error::Invalid(format!("unknown unit {unit:?}")))?;
        let a = UnitalDga { complex, unit, product };
        a.validate()?;
        Ok(a)
    }

    pub fn unit_name(&self) -> &str {
        self.complex.name(self.unit)
    }

    pub fn mul(&self, x: &Comb<usize>, y: &Comb<usize>) -> Comb<usize> {
        self.product.apply(&[x.clone(), y.clone()])
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.complex;
        if self.product.arity() != 2 || self.product.degree() != 0 || self.product.source() != c || self.product.target() != c {
            return Err(Error::Invalid("product must be a degree 0 binary operation on the carrier".into()));
        }
        if c.degree(self.unit) != 0 || !c.d(self.unit).is_zero() {
            return Err(Error::Invalid("unit must be a degree 0 cycle".into()));
        }
        let n = c.dim();
        let u = Comb::basis(self.unit);
        for a in 0..n {
            let e = Comb::basis(a);
            if self.mul(&u, &e) != e || self.mul(&e, &u) != e {
                return Err(Error::Invalid(format!("unit is not a two-sided unit on {:?}", c.name(a))));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = self.product.apply_basis(&[a, b]);
                for z in 0..n {
                    let left = self.mul(&ab, &Comb::basis(z));
                    let right = self.mul(&Comb::basis(a), &self.product.apply_basis(&[b, z]));
                    if left != right {
                        return Err(Error::Invalid(format!(
                            "product is not associative on ({}, {}, {})",
                            c.name(a),
                            c.name(b),
                            c.name(z)
                        )));
                    }
                }
                let mut leibniz = self.mul(&c.d(a).clone(), &Comb::basis(b));
                leibniz.add_scaled(&self.mul(&Comb::basis(a), c.d(b)), &sign(c.degree(a)));
                if c.apply_d(&ab) != leibniz {
                    return Err(Error::Invalid(format!("d is not a derivation on ({}, {})", c.name(a), c.name(b))));
                }
            }
        }
        Ok(())
    }

    pub fn is_concentrated_in_degree_zero(&self) -> bool {
        self.complex.degrees().iter().all(|&d| d == 0)
    }
}

/// Bimodule over a unital algebra concentrated in degree zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bimodule {
    pub module: Arc<ChainComplex>,
    /// `left[a][m]` = a·m
    pub left: Vec<Vec<Comb<usize>>>,
    /// `right[m][a]` = m·a
    pub right: Vec<Vec<Comb<usize>>>,
}

impl Bimodule {
    pub fn regular(a: &UnitalDga) -> Self {
        let n = a.complex.dim();
        let table: Vec<Vec<Comb<usize>>> = (0..n).map(|x| (0..n).map(|y| a.product.apply_basis(&[x, y])).collect()).collect();
        Bimodule { module: a.complex.clone(), left: table.clone(), right: table }
    }

    pub fn act_left(&self, a: &Comb<usize>, m: &Comb<usize>) -> Comb<usize> {
        let mut out = Comb::new();
        for (x, p) in a {
            for (y, q) in m {
                out.add_scaled(&self.left[*x][*y], &(p * q));
            }
        }
        out
    }

    pub fn act_right(&self, m: &Comb<usize>, a: &Comb<usize>) -> Comb<usize> {
        let mut out = Comb::new();
        for (y, q) in m {
            for (x, p) in a {
                out.add_scaled(&self.right[*y][*x], &(p * q));
            }
        }
        out
    }

    pub fn validate(&self, a: &UnitalDga) -> Result<()> {
        let n = a.complex.dim();
        let k = self.module.dim();
        if self.left.len() != n || self.right.len() != k || self.left.iter().any(|r| r.len() != k) || self.right.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("bimodule action tables have the wrong size".into()));
        }
        if !self.module.degrees().iter().all(|&d| d == 0) || !self.module.has_zero_differential() {
            return Err(Error::Invalid("bimodule must be concentrated in degree 0".into()));
        }
        let u = Comb::basis(a.unit);
        for m in 0..k {
            let e = Comb::basis(m);
            if self.act_left(&u, &e) != e || self.act_right(&e, &u) != e {
                return Err(Error::Invalid("unit does not act as the identity".into()));
            }
            for x in 0..n {
                for y in 0..n {
                    let (ex, ey) = (Comb::basis(x), Comb::basis(y));
                    let xy = a.mul(&ex, &ey);
                    if self.act_left(&xy, &e) != self.act_left(&ex, &self.act_left(&ey, &e))
                        || self.act_right(&e, &xy) != self.act_right(&self.act_right(&e, &ex), &ey)
                        || self.act_right(&self.act_left(&ex, &e), &ey) != self.act_left(&ex, &self.act_right(&e, &ey))
                    {
                        return Err(Error::Invalid("bimodule actions are not associative".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

fn product_from_table(c: &Arc<ChainComplex>, table: &[(&str, &str, &[(&str, i64)])]) -> MultilinearMap {
    let mut m = MultilinearMap::zero(c.clone(), c.clone(), 2, 0);
    for (a, b, out) in table {
        let v: Comb<usize> = out.iter().map(|(n, q)| (c.index_of(n).unwrap(), int(*q))).collect();
        m.set(vec![c.index_of(a).unwrap(), c.index_of(b).unwrap()], v).unwrap();
    }
    m
}

fn with_unit(c: &Arc<ChainComplex>, unit: &str, rest: &[(&str, &str, &[(&str, i64)])]) -> MultilinearMap {
    let mut table: Vec<(&str, &str, Vec<(&str, i64)>)> = Vec::new();
    for n in c.names() {
        table.push((unit, n.as_str(), vec![(n.as_str(), 1)]));
        if n != unit {
            table.push((n.as_str(), unit, vec![(n.as_str(), 1)]));
        }
    }
    for (a, b, o) in rest {
        table.push((a, b, o.to_vec()));
    }
    let refs: Vec<(&str, &str, &[(&str, i64)])> = table.iter().map(|(a, b, o)| (*a, *b, o.as_slice())).collect();
    product_from_table(c, &refs)
}

/// The ground field.
pub fn ground_field() -> UnitalDga {
    let c = Arc::new(ChainComplex::graded(vec![("1".into(), 0)]).unwrap());
    let p = with_unit(&c, "1", &[]);
    UnitalDga::new(c, "1", p).unwrap()
}

/// `𝕂[x]/(x²)` with zero differential.
pub fn fixture_a1() -> UnitalDga {
    let c = Arc::new(ChainComplex::graded(vec![("1".into(), 0), ("x".into(), 0)]).unwrap());
    let p = with_unit(&c, "1", &[]);
    UnitalDga::new(c, "1", p).unwrap()
}

/// `span{1, x, y}` with `|y| = 1`, `dy = x`, all products of `x`, `y` zero.
pub fn fixture_a2() -> UnitalDga {
    let c = Arc::new(
        ChainComplex::new(vec![("1".into(), 0), ("x".into(), 0), ("y".into(), 1)], &[("y".into(), "x".into(), one())]).unwrap(),
    );
    let p = with_unit(&c, "1", &[]);
    UnitalDga::new(c, "1", p).unwrap()
}

/// `A ⊗ B` with `(a ⊗ b)(a′ ⊗ b′) = (−1)^{|b||a′|} aa′ ⊗ bb′`; basis names are `a.b`.
pub fn tensor(x: &UnitalDga, y: &UnitalDga) -> Result<UnitalDga> {
    let (a, b) = (&x.complex, &y.complex);
    let m = b.dim();
    let idx = |i: usize, j: usize| i * m + j;
    let mut basis = Vec::new();
    let mut diff = Vec::new();
    for i in 0..a.dim() {
        for j in 0..m {
            let name = format!("{}.{}", a.name(i), b.name(j));
            basis.push((name.clone(), a.degree(i) + b.degree(j)));
            for (k, q) in a.d(i) {
                diff.push((name.clone(), format!("{}.{}", a.name(*k), b.name(j)), q.clone()));
            }
            for (k, q) in b.d(j) {
                diff.push((name.clone(), format!("{}.{}", a.name(i), b.name(*k)), q * sign(a.degree(i))));
            }
        }
    }
    let mut merged: std::collections::BTreeMap<(String, String), Rational> = std::collections::BTreeMap::new();
    for (s, t, q) in diff {
        *merged.entry((s, t)).or_insert_with(crate::rational::zero) += q;
    }
    let diff: Vec<(String, String, Rational)> = merged.into_iter().filter(|(_, q)| *q != crate::rational::zero()).map(|((s, t), q)| (s, t, q)).collect();
    let c = Arc::new(ChainComplex::new(basis, &diff)?);
    let product = tabulate_with(c.clone(), c.clone(), 2, 0, |inp, _| {
        let (i1, j1, i2, j2) = (inp[0] / m, inp[0] % m, inp[1] / m, inp[1] % m);
        let s = sign(b.degree(j1) * a.degree(i2));
        let mut out = Comb::new();
        for (k, p) in &x.product.apply_basis(&[i1, i2]) {
            for (l, q) in &y.product.apply_basis(&[j1, j2]) {
                out.add_term(idx(*k, *l), &s * p * q);
            }
        }
        out
    });
    let unit = format!("{}.{}", x.unit_name(), y.unit_name());
    UnitalDga::new(c, &unit, product)
}

/// `𝕂[z]/(z³)` with `|z| = −1` and zero differential.
pub fn fixture_truncated_polynomial() -> UnitalDga {
    let c = Arc::new(ChainComplex::graded(vec![("1".into(), 0), ("z".into(), -1), ("zz".into(), -2)]).unwrap());
    let p = with_unit(&c, "1", &[("z", "z", &[("zz", 1)])]);
    UnitalDga::new(c, "1", p).unwrap()
}

/// A dg algebra with a nonvanishing triple Massey product `⟨a, b, c⟩ = [sc − at]`:
/// `ab = ds`, `bc = dt`, `abc = d(sc) = d(at)`, all other products of non-units zero.
pub fn fixture_massey() -> UnitalDga {
    let basis = [("1", 0), ("a", 0), ("b", 0), ("c", 0), ("ab", 0), ("bc", 0), ("abc", 0), ("s", 1), ("t", 1), ("sc", 1), ("at", 1)];
    let d = [("s", "ab"), ("t", "bc"), ("sc", "abc"), ("at", "abc")];
    let c = Arc::new(
        ChainComplex::new(
            basis.iter().map(|(n, k)| (n.to_string(), *k)).collect(),
            &d.iter().map(|(x, y)| (x.to_string(), y.to_string(), one())).collect::<Vec<_>>(),
        )
        .unwrap(),
    );
    let p = with_unit(
        &c,
        "1",
        &[
            ("a", "b", &[("ab", 1)]),
            ("b", "c", &[("bc", 1)]),
            ("ab", "c", &[("abc", 1)]),
            ("a", "bc", &[("abc", 1)]),
            ("s", "c", &[("sc", 1)]),
            ("a", "t", &[("at", 1)]),
        ],
    );
    UnitalDga::new(c, "1", p).unwrap()
}

/// The 2×2 matrix algebra with basis `e11, e12, e21, e22` and unit `1 = e11 + e22`
/// presented on the basis `1, e11, e12, e21`.
pub fn fixture_m2() -> UnitalDga {
    let c = Arc::new(
        ChainComplex::graded(vec![("1".into(), 0), ("e11".into(), 0), ("e12".into(), 0), ("e21".into(), 0)]).unwrap(),
    );
    // e22 = 1 - e11
    let table: &[(&str, &str, &[(&str, i64)])] = &[
        ("e11", "e11", &[("e11", 1)]),
        ("e11", "e12", &[("e12", 1)]),
        ("e11", "e21", &[]),
        ("e12", "e11", &[]),
        ("e12", "e12", &[]),
        ("e12", "e21", &[("e11", 1)]),
        ("e21", "e11", &[("e21", 1)]),
        ("e21", "e12", &[("1", 1), ("e11", -1)]),
        ("e21", "e21", &[]),
    ];
    let p = with_unit(&c, "1", table);
    UnitalDga::new(c, "1", p).unwrap()
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num: i64 = rng.gen_range(-3..=3);
    let den: i64 = rng.gen_range(1..=2);
    Rational::new(num.into(), den.into())
}

/// Transports `a` along a random degree-preserving change of basis that fixes the
/// unit; the result is isomorphic to `a` but has generic structure constants.
pub fn scramble(a: &UnitalDga, rng: &mut ChaCha8Rng) -> UnitalDga {
    let c = &a.complex;
    let n = c.dim();
    // columns of g are the images of the new basis vectors in the old basis
    let g = loop {
        let mut g = Matrix::zeros(n, n);
        for j in 0..n {
            if j == a.unit {
                g.set(j, j, one());
                continue;
            }
            for i in 0..n {
                if c.degree(i) == c.degree(j) {
                    g.set(i, j, random_rational(rng));
                }
            }
        }
        if g.inverse().is_some() {
            break g;
        }
    };
    let ginv = g.inverse().unwrap();
    let to_old = |j: usize| -> Comb<usize> { (0..n).map(|i| (i, g.get(i, j).clone())).collect() };
    let to_new = |x: &Comb<usize>| -> Comb<usize> {
        let mut out = Comb::new();
        for (i, q) in x {
            for r in 0..n {
                out.add_term(r, ginv.get(r, *i) * q);
            }
        }
        out
    };
    let mut diff = Vec::new();
    for j in 0..n {
        let dj = to_new(&c.apply_d(&to_old(j)));
        for (t, q) in &dj {
            diff.push((c.name(j).to_string(), c.name(*t).to_string(), q.clone()));
        }
    }
    let basis: Vec<(String, i64)> = (0..n).map(|i| (c.name(i).to_string(), c.degree(i))).collect();
    let nc = Arc::new(ChainComplex::new(basis, &diff).expect("transported complex"));
    let prod = tabulate_with(nc.clone(), nc.clone(), 2, 0, |t, _| to_new(&a.mul(&to_old(t[0]), &to_old(t[1]))));
    UnitalDga::new(nc, a.unit_name(), prod).expect("transported algebra")
}

/// A small unital dga with nontrivial homology in degrees 0 and 1:
/// `Λ(e) ⊗ 𝕂[x]/(x²)` with `de = x` (variant 0) or `A2 ⊕ 𝕂z` with `z` a square-zero
/// degree 1 cycle (variant 1), scrambled by a seeded change of basis.
pub fn random_unital_dga(seed: u64) -> UnitalDga {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = if rng.gen_bool(0.5) {
        let c = Arc::new(
            ChainComplex::new(
                vec![("1".into(), 0), ("x".into(), 0), ("e".into(), 1), ("xe".into(), 1)],
                &[("e".into(), "x".into(), one())],
            )
            .unwrap(),
        );
        let p = with_unit(&c, "1", &[("x", "e", &[("xe", 1)]), ("e", "x", &[("xe", 1)])]);
        UnitalDga::new(c, "1", p).unwrap()
    } else {
        let c = Arc::new(
            ChainComplex::new(
                vec![("1".into(), 0), ("x".into(), 0), ("y".into(), 1), ("z".into(), 1)],
                &[("y".into(), "x".into(), one())],
            )
            .unwrap(),
        );
        let p = with_unit(&c, "1", &[]);
        UnitalDga::new(c, "1", p).unwrap()
    };
    scramble(&base, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        for a in [ground_field(), fixture_a1(), fixture_a2(), fixture_m2()] {
            a.validate().unwrap();
            if a.is_concentrated_in_degree_zero() {
                Bimodule::regular(&a).validate(&a).unwrap();
            }
        }
        for seed in 0..6 {
            random_unital_dga(seed).validate().unwrap();
        }
    }

    #[test]
    fn tensor_products_are_valid() {
        let t = tensor(&fixture_truncated_polynomial(), &fixture_a2()).unwrap();
        assert_eq!(t.complex.dim(), 9);
        assert_eq!(t.unit_name(), "1.1");
        tensor(&fixture_massey(), &fixture_a2()).unwrap();
    }

    #[test]
    fn m2_is_matrix_algebra() {
        let m = fixture_m2();
        let c = &m.complex;
        let e12 = Comb::basis(c.index_of("e12").unwrap());
        let e21 = Comb::basis(c.index_of("e21").unwrap());
        let mut e22 = Comb::basis(m.unit);
        e22.add_term(c.index_of("e11").unwrap(), int(-1));
        assert_eq!(m.mul(&e21, &e12), e22);
        assert_eq!(m.mul(&e22, &e22), e22);
    }

    #[test]
    fn nonassociative_rejected() {
        let c = Arc::new(ChainComplex::graded(vec![("1".into(), 0), ("a".into(), 0), ("b".into(), 0)]).unwrap());
        let p = with_unit(&c, "1", &[("a", "a", &[("b", 1)]), ("a", "b", &[("a", 1)])]);
        let err = UnitalDga::new(c, "1", p).unwrap_err();
        assert!(err.to_string().contains("associative"), "{err}");
    }
}
