//! The rectification `Ω_κ B_ι A`: the free unital algebra on the weight-truncated bar
//! construction with differential `d₁ − d₂`, the universal ∞-morphism `I_A`, and the
//! factorization of ∞-morphisms into strict targets through it.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::bar::{weight, BarConstruction, BarKey};
use crate::comb::Comb;
use crate::error::{Error, Result};
use crate::multilinear::tuples;
use crate::rational::{one, sign};
use crate::shapes::Corolla;
use crate::structures::{morphism_defect_at, Components, DefectReport, InfinityMorphism, MorphismTarget, UAInfStructure};

/// A noncommutative monomial in bar generators; the empty word is the unit.
pub type Word = Vec<BarKey>;
pub type RectifiedElement = Comb<Word>;

pub struct Rectification<'a> {
    bar: BarConstruction<'a>,
    structure: &'a UAInfStructure,
    max_weight: usize,
}

impl<'a> Rectification<'a> {
    pub fn new(structure: &'a UAInfStructure, max_weight: usize) -> Result<Self> {
        Ok(Rectification { bar: BarConstruction::new(structure, max_weight)?, structure, max_weight })
    }

    pub fn bar(&self) -> &BarConstruction<'a> {
        &self.bar
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    pub fn generator(key: BarKey) -> RectifiedElement {
        Comb::basis(vec![key])
    }

    pub fn unit() -> RectifiedElement {
        Comb::basis(Vec::new())
    }

    pub fn in_window(&self, key: &BarKey) -> bool {
        weight(key.0) <= self.max_weight
    }

    /// Generators of weight at most the window.
    pub fn generators(&self) -> Vec<BarKey> {
        self.bar.basis()
    }

    pub fn word_degree(&self, w: &[BarKey]) -> i64 {
        w.iter().map(|k| self.bar.degree(k)).sum()
    }

    pub fn multiply(x: &RectifiedElement, y: &RectifiedElement) -> RectifiedElement {
        let mut out = Comb::new();
        for (a, p) in x {
            for (b, q) in y {
                let mut w = a.clone();
                w.extend(b.iter().cloned());
                out.add_term(w, p * q);
            }
        }
        out
    }

    /// `d₂` on a generator: the part of the coproduct seen by `κ`, which sends `μ̄_2` to the
    /// product and `μ̄_1^{{1}}` to the unit.
    pub fn d2_generator(&self, key: &BarKey) -> RectifiedElement {
        let a = self.structure.carrier();
        let (c, args) = key;
        let mut out = Comb::new();
        let product = Corolla::new(2, &[]).expect("corolla");
        for (t, coeff) in crate::structures::coproduct(*c).iter() {
            if t.outer == Corolla::unit() {
                out.add_term(Vec::new(), coeff.clone());
            } else if t.outer == product {
                let (l, r) = (t.inners[0], t.inners[1]);
                let k = l.arity();
                let passed: i64 = args[..k].iter().map(|&i| a.degree(i)).sum();
                let s = coeff * sign(r.cooperad_degree() * passed);
                out.add_term(vec![(l, args[..k].to_vec()), (r, args[k..].to_vec())], s);
            }
        }
        out
    }

    /// `d₁ − d₂` on a generator; `d₁` is the bar differential.
    pub fn d_generator(&self, key: &BarKey) -> RectifiedElement {
        let mut out: RectifiedElement = self.bar.d(key).into_iter().map(|(k, q)| (vec![k], q)).collect();
        out.add_scaled(&self.d2_generator(key), &-one());
        out
    }

    /// The derivation extending [`Self::d_generator`].
    pub fn d(&self, x: &RectifiedElement) -> RectifiedElement {
        let mut out = Comb::new();
        for (w, q) in x {
            let mut passed = 0i64;
            for j in 0..w.len() {
                let dg = self.d_generator(&w[j]);
                let s = q * sign(passed);
                for (mid, r) in &dg {
                    let mut nw = w[..j].to_vec();
                    nw.extend(mid.iter().cloned());
                    nw.extend(w[j + 1..].iter().cloned());
                    out.add_term(nw, &s * r);
                }
                passed += self.bar.degree(&w[j]);
            }
        }
        out
    }

    /// Generators (within the window) on which `d² ≠ 0`.
    pub fn d_squared_failures(&self) -> Vec<BarKey> {
        let mut bad: Vec<BarKey> =
            self.generators().into_par_iter().filter(|g| !self.d(&self.d(&Self::generator(g.clone()))).is_zero()).collect();
        bad.sort();
        bad
    }

    /// Words of length at most `max_len` and total degree `degree`; needs a nonnegatively
    /// graded carrier so that the enumeration is finite.
    pub fn words(&self, degree: i64, max_len: usize) -> Result<Vec<Word>> {
        let gens = self.generators();
        let degs: Vec<i64> = gens.iter().map(|g| self.bar.degree(g)).collect();
        if degs.iter().any(|&d| d < 0) {
            return Err(Error::Invalid("word enumeration needs a nonnegatively graded carrier".into()));
        }
        let mut out = Vec::new();
        let mut stack: Vec<(Word, i64)> = vec![(Vec::new(), 0)];
        while let Some((w, d)) = stack.pop() {
            if d == degree {
                out.push(w.clone());
            }
            if w.len() < max_len {
                for (g, &dg) in gens.iter().zip(&degs) {
                    if d + dg <= degree {
                        let mut nw = w.clone();
                        nw.push(g.clone());
                        stack.push((nw, d + dg));
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Homology in one degree of the truncation by word length: cycles among words of length
    /// at most `max_len` modulo boundaries of words of length below it.
    pub fn truncated_homology_dim(&self, degree: i64, max_len: usize) -> Result<usize> {
        let rank = |words: Vec<Word>| {
            let mut index = std::collections::BTreeMap::new();
            let rows: Vec<_> = words
                .iter()
                .map(|w| {
                    let dw = self.d(&Self::generator_word(w));
                    dw.iter()
                        .map(|(k, q)| {
                            let n = index.len();
                            (*index.entry(k.clone()).or_insert(n), q.clone())
                        })
                        .collect()
                })
                .collect();
            crate::linalg::sparse_rank(rows)
        };
        let here = self.words(degree, max_len)?;
        let n = here.len();
        let cycles = n - rank(here);
        let boundaries = if max_len == 0 { 0 } else { rank(self.words(degree + 1, max_len - 1)?) };
        Ok(cycles - boundaries)
    }

    fn generator_word(w: &Word) -> RectifiedElement {
        Comb::basis(w.clone())
    }

    /// `I_A : A ⇝ Ω_κ B_ι A`, `i_n^S(a⃗) = [μ_n^S ⊗ a⃗]`.
    pub fn universal_morphism(&self) -> UniversalMorphism<'_, 'a> {
        UniversalMorphism { rect: self }
    }
}

impl MorphismTarget for Rectification<'_> {
    type Key = Word;

    fn key_degree(&self, k: &Word) -> i64 {
        self.word_degree(k)
    }

    fn d(&self, x: &RectifiedElement) -> RectifiedElement {
        Rectification::d(self, x)
    }

    fn operation_is_zero(&self, c: Corolla) -> bool {
        !(c == Corolla::unit() || c == Corolla::new(2, &[]).expect("corolla"))
    }

    fn operation(&self, c: Corolla, args: &[RectifiedElement]) -> RectifiedElement {
        if c == Corolla::unit() {
            Self::unit()
        } else if args.len() == 2 && c.cork_count() == 0 {
            Self::multiply(&args[0], &args[1])
        } else {
            Comb::new()
        }
    }
}

pub struct UniversalMorphism<'r, 'a> {
    rect: &'r Rectification<'a>,
}

impl Components<Word> for UniversalMorphism<'_, '_> {
    fn is_zero(&self, c: Corolla) -> bool {
        weight(c) > self.rect.max_weight
    }

    fn eval(&self, c: Corolla, inputs: &[usize]) -> RectifiedElement {
        Rectification::generator((c, inputs.to_vec()))
    }
}

impl UniversalMorphism<'_, '_> {
    /// Checks the ∞-morphism equations for all corollas with `n ≤ bound` inside the window.
    pub fn verify(&self, bound: usize) -> Result<DefectReport> {
        let s = self.rect.structure;
        let dim = s.carrier().dim();
        let corollas: Vec<Corolla> = Corolla::all_up_to(bound).into_iter().filter(|c| weight(*c) <= self.rect.max_weight).collect();
        if corollas.iter().any(|c| c.n() > s.bound()) {
            return Err(Error::Bound("structure bound below the check bound".into()));
        }
        let rows = corollas
            .into_par_iter()
            .map(|c| {
                let bad = tuples(dim, c.arity()).iter().filter(|t| !morphism_defect_at(s, self.rect, self, c, t).is_zero()).count();
                (c, bad)
            })
            .collect();
        Ok(DefectReport { bound, rows })
    }
}

/// The algebra map `f̃ : Ω_κ B_ι A → B` determined by an ∞-morphism into a strict `B`.
pub struct Factorization<'a> {
    pub morphism: &'a InfinityMorphism,
}

impl<'a> Factorization<'a> {
    pub fn new(morphism: &'a InfinityMorphism) -> Result<Self> {
        let b = morphism.target();
        for (c, m) in b.maps() {
            let strict = c.n() == 2 && c.cork_count() == 0 || *c == Corolla::unit();
            if !strict && !m.is_zero() {
                return Err(Error::Invalid(format!("target is not strict: {c} is nonzero")));
            }
        }
        Ok(Factorization { morphism })
    }

    /// `f̃([μ_n^S ⊗ a⃗]) = f_n^S(a⃗)`.
    pub fn on_generator(&self, key: &BarKey) -> Comb<usize> {
        self.morphism.component(key.0).map(|m| m.apply_basis(&key.1)).unwrap_or_default()
    }

    pub fn apply(&self, x: &RectifiedElement) -> Comb<usize> {
        let b = self.morphism.target();
        let product = b.map(Corolla::new(2, &[]).expect("corolla"));
        let mut out = Comb::new();
        for (w, q) in x {
            let mut acc = b.unit_element();
            for g in w {
                acc = product.apply(&[acc, self.on_generator(g)]);
                if acc.is_zero() {
                    break;
                }
            }
            out.add_scaled(&acc, q);
        }
        out
    }

    /// Generators on which `d_B f̃ ≠ f̃ d`.
    pub fn chain_map_failures(&self, rect: &Rectification<'_>) -> Vec<BarKey> {
        let b = self.morphism.target().carrier().clone();
        let bound = self.morphism.bound();
        let mut bad: Vec<BarKey> = rect
            .generators()
            .into_par_iter()
            .filter(|g| g.0.n() <= bound)
            .filter(|g| b.apply_d(&self.on_generator(g)) != self.apply(&rect.d(&Rectification::generator(g.clone()))))
            .collect();
        bad.sort();
        bad
    }

    /// Corollas where `f̃ ∘ I_A ≠ F`.
    pub fn factorization_failures(&self, rect: &Rectification<'_>) -> Vec<Corolla> {
        let dim = self.morphism.source().carrier().dim();
        let i = rect.universal_morphism();
        Corolla::all_up_to(self.morphism.bound())
            .into_iter()
            .filter(|c| weight(*c) <= rect.max_weight)
            .filter(|c| {
                tuples(dim, c.arity()).iter().any(|t| self.apply(&i.eval(*c, t)) != self.morphism.component(*c).unwrap().apply_basis(t))
            })
            .collect()
    }
}

pub fn tsv_keys(structure: &UAInfStructure, keys: &[BarKey]) -> String {
    let a = structure.carrier();
    let mut s = String::from("n\tS\tinputs\n");
    for (c, args) in keys {
        let names: Vec<&str> = args.iter().map(|&i| a.name(i)).collect();
        let _ = writeln!(s, "{}\t{}\t{}", c.n(), c.cork_label(), names.join(","));
    }
    s
}

/// The rectification of a strict algebra seen through its bar window, with `I_A`.
pub fn rectify(structure: &UAInfStructure, max_weight: usize) -> Result<Rectification<'_>> {
    Rectification::new(structure, max_weight)
}

/// Convenience for tests and the CLI: `F = I_B`-style data on shared structures.
pub fn strict_target(p: &crate::algebra::UnitalDga, bound: usize) -> Result<Arc<UAInfStructure>> {
    Ok(Arc::new(UAInfStructure::from_unital_dga(p, bound)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{fixture_a1, fixture_a2, ground_field};

    #[test]
    fn d_squared_vanishes_on_generators() {
        for p in [fixture_a1(), fixture_a2()] {
            let s = UAInfStructure::from_unital_dga(&p, 5).unwrap();
            let r = Rectification::new(&s, 3).unwrap();
            assert!(r.d_squared_failures().is_empty());
        }
    }

    #[test]
    fn weight_two_generator() {
        let p = fixture_a1();
        let s = UAInfStructure::from_unital_dga(&p, 3).unwrap();
        let r = Rectification::new(&s, 1).unwrap();
        let x = p.complex.index_of("x").unwrap();
        let one_idx = p.unit;
        let m2 = Corolla::new(2, &[]).unwrap();
        let d = r.d(&Rectification::generator((m2, vec![x, one_idx])));
        // product of classes against the class of the product
        let id = Corolla::identity();
        assert_ne!(d.coeff(&vec![(id, vec![x])]), crate::rational::zero());
        assert_ne!(d.coeff(&vec![(id, vec![x]), (id, vec![one_idx])]), crate::rational::zero());
    }

    #[test]
    fn universal_morphism_is_an_infinity_morphism() {
        for p in [ground_field(), fixture_a1(), fixture_a2()] {
            let s = UAInfStructure::from_unital_dga(&p, 4).unwrap();
            let r = Rectification::new(&s, 3).unwrap();
            let report = r.universal_morphism().verify(3).unwrap();
            assert!(report.passed(), "{}", report.tsv());
        }
    }

    #[test]
    fn factorization_through_transferred_morphisms() {
        let mut corked = 0;
        for seed in 0..3 {
            let p = crate::algebra::random_unital_dga(seed);
            let a = UAInfStructure::from_unital_dga(&p, 4).unwrap();
            let sdr = crate::transfer::random_sdr(&p.complex, None, seed).unwrap();
            let f = crate::transfer::transfer_morphism(&a, &sdr, 4).unwrap();
            assert!(f.verify(3).unwrap().passed());
            corked += f.components().filter(|(c, m)| c.cork_count() > 0 && !m.is_zero()).count();
            let r = Rectification::new(f.source(), 3).unwrap();
            let fac = Factorization::new(&f).unwrap();
            assert!(fac.chain_map_failures(&r).is_empty());
            assert!(fac.factorization_failures(&r).is_empty());
        }
        assert!(corked > 0);
    }

    #[test]
    fn strict_augmentation_kills_higher_generators() {
        let p = fixture_a2();
        let a = Arc::new(UAInfStructure::from_unital_dga(&p, 4).unwrap());
        let k = strict_target(&ground_field(), 4).unwrap();
        let mut eps = crate::multilinear::MultilinearMap::zero(a.carrier().clone(), k.carrier().clone(), 1, 0);
        eps.set(vec![p.unit], Comb::basis(0)).unwrap();
        let f = InfinityMorphism::strict(a.clone(), k, eps, 3).unwrap();
        assert!(f.verify(3).unwrap().passed());
        let r = Rectification::new(&a, 3).unwrap();
        let fac = Factorization::new(&f).unwrap();
        assert!(fac.chain_map_failures(&r).is_empty());
        for g in r.generators() {
            if g.0 != Corolla::identity() {
                assert!(fac.on_generator(&g).is_zero());
            }
        }
    }

    #[test]
    fn degree_zero_homology_of_a1() {
        let s = UAInfStructure::from_unital_dga(&fixture_a1(), 3).unwrap();
        let r = Rectification::new(&s, 2).unwrap();
        for len in 2..=4 {
            assert_eq!(r.truncated_homology_dim(0, len).unwrap(), 2);
        }
    }

    #[test]
    fn factorization_of_identity_and_corrupted_morphism() {
        let p = fixture_a2();
        let s = Arc::new(UAInfStructure::from_unital_dga(&p, 4).unwrap());
        let r = Rectification::new(&s, 3).unwrap();
        let id = InfinityMorphism::identity(s.clone(), 3);
        let f = Factorization::new(&id).unwrap();
        assert!(f.chain_map_failures(&r).is_empty());
        assert!(f.factorization_failures(&r).is_empty());
        for seed in 0..4 {
            let mut bad = id.clone();
            for (c, m) in crate::structures::random_components(s.carrier(), 3, seed) {
                if c.n() >= 2 {
                    bad.set(c, m).unwrap();
                }
            }
            let morphism_ok = bad.verify(3).unwrap().passed();
            let f = Factorization::new(&bad).unwrap();
            assert_eq!(morphism_ok, f.chain_map_failures(&r).is_empty());
            assert!(!morphism_ok);
            assert!(f.factorization_failures(&r).is_empty());
        }
    }
}
