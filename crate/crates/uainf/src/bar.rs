//! The curved bar construction `uAs^¡(A)` of a `uA∞`-algebra, truncated by weight.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::comb::Comb;
use crate::cooperad::{curvature, infinitesimal, Infinitesimal};
use crate::error::{Error, Result};
use crate::multilinear::tuples;
use crate::rational::{sign, zero};
use crate::shapes::Corolla;
use crate::structures::UAInfStructure;

/// A basis element `μ̄_n^S ⊗ a_1 ⊗ … ⊗ a_k` of the bar construction.
pub type BarKey = (Corolla, Vec<usize>);
pub type BarElement = Comb<BarKey>;

/// The weight `n − 1 + |S|` of a cooperad corolla.
pub fn weight(c: Corolla) -> usize {
    c.cooperad_degree() as usize
}

pub struct BarConstruction<'a> {
    structure: &'a UAInfStructure,
    max_weight: usize,
}

impl<'a> BarConstruction<'a> {
    /// Needs operations up to arity `max_weight + 1`.
    pub fn new(structure: &'a UAInfStructure, max_weight: usize) -> Result<Self> {
        if structure.bound() < max_weight + 1 {
            return Err(Error::Bound(format!("bound too small: weight {max_weight} needs operations up to arity {}", max_weight + 1)));
        }
        Ok(BarConstruction { structure, max_weight })
    }

    pub fn degree(&self, key: &BarKey) -> i64 {
        let a = self.structure.carrier();
        key.0.cooperad_degree() + key.1.iter().map(|&i| a.degree(i)).sum::<i64>()
    }

    /// All basis elements of weight at most the truncation.
    pub fn basis(&self) -> Vec<BarKey> {
        let dim = self.structure.carrier().dim();
        Corolla::all_up_to(self.max_weight + 1)
            .into_iter()
            .filter(|c| weight(*c) <= self.max_weight)
            .flat_map(|c| tuples(dim, c.arity()).into_iter().map(move |t| (c, t)))
            .collect()
    }

    /// The internal part: `d_A` applied to one tensor factor.
    pub fn d_internal(&self, key: &BarKey) -> BarElement {
        let a = self.structure.carrier();
        let (c, args) = key;
        let mut out = Comb::new();
        let mut passed = c.cooperad_degree();
        for j in 0..args.len() {
            for (k, q) in a.d(args[j]) {
                let mut v = args.clone();
                v[j] = *k;
                out.add_term((*c, v), q * sign(passed));
            }
            passed += a.degree(args[j]);
        }
        out
    }

    /// The part coming from the operations: one `μ_ν` applied to consecutive inputs.
    pub fn d_operations(&self, key: &BarKey) -> BarElement {
        let a = self.structure.carrier();
        let (c, args) = key;
        let mut out = Comb::new();
        for t in infinitesimal(*c, Infinitesimal::Unreduced) {
            if t.inner.is_identity() || self.structure.is_zero_at(t.inner) {
                continue;
            }
            let p = t.slot() - 1;
            let k = t.inner.arity();
            let mu = self.structure.map(t.inner);
            let before: i64 = args[..p].iter().map(|&i| a.degree(i)).sum();
            let s = &t.coeff * sign(t.outer.cooperad_degree() + mu.degree() * before);
            for (v, q) in &mu.apply_basis(&args[p..p + k]) {
                let mut new = args[..p].to_vec();
                new.push(*v);
                new.extend_from_slice(&args[p + k..]);
                out.add_term((t.outer, new), &s * q);
            }
        }
        out
    }

    pub fn d(&self, key: &BarKey) -> BarElement {
        let mut out = self.d_internal(key);
        out.add_comb(self.d_operations(key));
        out
    }

    pub fn apply(&self, x: &BarElement) -> BarElement {
        let mut out = Comb::new();
        for (k, q) in x {
            out.add_scaled(&self.d(k), q);
        }
        out
    }

    /// `(θ ⊗ id) Δ_(1)`: the curvature of the cooperad acting on the bar construction.
    pub fn curvature_term(&self, key: &BarKey) -> BarElement {
        let (c, args) = key;
        let mut out = Comb::new();
        for t in infinitesimal(*c, Infinitesimal::Unreduced) {
            let th = curvature(t.outer);
            if th != zero() {
                out.add_term((t.inner, args.clone()), th * &t.coeff);
            }
        }
        out
    }

    /// `D² − (θ ⊗ id)Δ` on one basis element.
    pub fn defect_at(&self, key: &BarKey) -> BarElement {
        let mut out = self.apply(&self.d(key));
        out.add_scaled(&self.curvature_term(key), &-crate::rational::one());
        out
    }

    /// Checks `D² = (θ ⊗ id)Δ` on every basis element; returns the failing ones.
    pub fn codifferential_defect(&self) -> Vec<BarKey> {
        let mut bad: Vec<BarKey> = self.basis().into_par_iter().filter(|k| !self.defect_at(k).is_zero()).collect();
        bad.sort();
        bad
    }

    pub fn tsv(&self, failures: &[BarKey]) -> String {
        let a = self.structure.carrier();
        let mut s = String::from("n\tS\tinputs\n");
        for (c, args) in failures {
            let names: Vec<&str> = args.iter().map(|&i| a.name(i)).collect();
            let _ = writeln!(s, "{}\t{}\t{}", c.n(), c.cork_label(), names.join(","));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{fixture_a1, fixture_a2, fixture_m2};
    use crate::rational::int;

    #[test]
    fn strict_algebras_give_codifferentials() {
        for p in [fixture_a1(), fixture_a2(), fixture_m2()] {
            let s = UAInfStructure::from_unital_dga(&p, 4).unwrap();
            let b = BarConstruction::new(&s, 3).unwrap();
            assert!(b.codifferential_defect().is_empty());
        }
    }

    #[test]
    fn bound_is_enforced() {
        let s = UAInfStructure::from_unital_dga(&fixture_a1(), 3).unwrap();
        assert!(BarConstruction::new(&s, 3).is_err());
    }

    #[test]
    fn unit_term() {
        let p = fixture_a1();
        let s = UAInfStructure::from_unital_dga(&p, 2).unwrap();
        let b = BarConstruction::new(&s, 1).unwrap();
        // D(μ̄_1^{{1}}) = | ⊗ u
        let d = b.d(&(Corolla::unit(), vec![]));
        assert_eq!(d, Comb::basis((Corolla::identity(), vec![p.unit])));
    }

    #[test]
    fn wrong_sign_is_detected() {
        let p = fixture_a2();
        let mut s = UAInfStructure::from_unital_dga(&p, 4).unwrap();
        let c = Corolla::new(2, &[]).unwrap();
        let neg = s.map(c).scaled(&int(-1));
        s.set(c, neg).unwrap();
        assert!(!BarConstruction::new(&s, 3).unwrap().codifferential_defect().is_empty());
    }

    #[test]
    fn curvature_witness() {
        let p = fixture_a1();
        let s = UAInfStructure::from_unital_dga(&p, 3).unwrap();
        let b = BarConstruction::new(&s, 2).unwrap();
        let x = p.complex.index_of("x").unwrap();
        for c in [Corolla::new(2, &[1]).unwrap(), Corolla::new(2, &[2]).unwrap()] {
            let key = (c, vec![x]);
            let expected = Comb::single((Corolla::identity(), vec![x]), int(-1));
            assert_eq!(b.apply(&b.d(&key)), expected);
            assert_eq!(b.curvature_term(&key), expected);
        }
    }

    #[test]
    fn zero_algebra_has_zero_differential() {
        let z = std::sync::Arc::new(crate::complex::ChainComplex::graded(vec![]).unwrap());
        let s = UAInfStructure::zero(z, 4);
        let b = BarConstruction::new(&s, 3).unwrap();
        for k in b.basis() {
            if k.0 != Corolla::unit() {
                assert!(b.d(&k).is_zero());
            }
        }
    }
}
