//! Graded multilinear maps between finite complexes and Koszul-signed evaluation of
//! composites.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::comb::Comb;
use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::rational::{one, sign, Rational};

/// `A^{⊗ arity} → B` of a fixed degree, stored sparsely on basis tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearMap {
    source: Arc<ChainComplex>,
    target: Arc<ChainComplex>,
    arity: usize,
    degree: i64,
    entries: BTreeMap<Vec<usize>, Comb<usize>>,
}

impl MultilinearMap {
    pub fn zero(source: Arc<ChainComplex>, target: Arc<ChainComplex>, arity: usize, degree: i64) -> Self {
        MultilinearMap { source, target, arity, degree, entries: BTreeMap::new() }
    }

    pub fn identity(c: Arc<ChainComplex>) -> Self {
        let mut m = Self::zero(c.clone(), c.clone(), 1, 0);
        for i in 0..c.dim() {
            m.entries.insert(vec![i], Comb::basis(i));
        }
        m
    }

    /// Arity-zero map picking out an element of `target`.
    pub fn element(source: Arc<ChainComplex>, target: Arc<ChainComplex>, degree: i64, value: Comb<usize>) -> Self {
        let mut m = Self::zero(source, target, 0, degree);
        m.set_unchecked(vec![], value);
        m
    }

    pub fn source(&self) -> &Arc<ChainComplex> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ChainComplex> {
        &self.target
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, Comb<usize>> {
        &self.entries
    }

    pub fn input_degree(&self, inputs: &[usize]) -> i64 {
        inputs.iter().map(|&i| self.source.degree(i)).sum()
    }

    /// Sets the value on a basis tuple, checking arity and degree.
    pub fn set(&mut self, inputs: Vec<usize>, value: Comb<usize>) -> Result<()> {
        if inputs.len() != self.arity || inputs.iter().any(|&i| i >= self.source.dim()) {
            return Err(Error::Invalid("input tuple does not match the map".into()));
        }
        let want = self.input_degree(&inputs) + self.degree;
        if value.keys().any(|&k| k >= self.target.dim() || self.target.degree(k) != want) {
            return Err(Error::Invalid(format!("entry violates degree {}", self.degree)));
        }
        self.set_unchecked(inputs, value);
        Ok(())
    }

    pub(crate) fn set_unchecked(&mut self, inputs: Vec<usize>, value: Comb<usize>) {
        if value.is_zero() {
            self.entries.remove(&inputs);
        } else {
            self.entries.insert(inputs, value);
        }
    }

    pub fn apply_basis(&self, inputs: &[usize]) -> Comb<usize> {
        self.entries.get(inputs).cloned().unwrap_or_default()
    }

    /// Multilinear extension to combinations (no signs: the map acts first).
    pub fn apply(&self, args: &[Comb<usize>]) -> Comb<usize> {
        debug_assert_eq!(args.len(), self.arity);
        let mut out = Comb::new();
        if args.iter().any(|a| a.is_zero()) {
            return out;
        }
        let lists: Vec<Vec<(&usize, &Rational)>> = args.iter().map(|a| a.iter().collect()).collect();
        let mut idx = vec![0usize; lists.len()];
        let mut key = vec![0usize; lists.len()];
        loop {
            let mut coeff = one();
            for (j, l) in lists.iter().enumerate() {
                key[j] = *l[idx[j]].0;
                coeff *= l[idx[j]].1;
            }
            if let Some(v) = self.entries.get(&key) {
                out.add_scaled(v, &coeff);
            }
            let mut j = lists.len();
            loop {
                if j == 0 {
                    return out;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < lists[j].len() {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    pub fn add_scaled(&mut self, other: &MultilinearMap, scale: &Rational) -> Result<()> {
        self.check_same_shape(other)?;
        for (k, v) in &other.entries {
            let mut cur = self.entries.remove(k).unwrap_or_default();
            cur.add_scaled(v, scale);
            self.set_unchecked(k.clone(), cur);
        }
        Ok(())
    }

    pub fn scaled(&self, scale: &Rational) -> Self {
        let mut out = Self::zero(self.source.clone(), self.target.clone(), self.arity, self.degree);
        for (k, v) in &self.entries {
            out.set_unchecked(k.clone(), v.clone().scaled(scale));
        }
        out
    }

    fn check_same_shape(&self, other: &MultilinearMap) -> Result<()> {
        if self.arity != other.arity || self.degree != other.degree || self.source != other.source || self.target != other.target {
            return Err(Error::Mismatch("maps of different shape".into()));
        }
        Ok(())
    }

    /// Partial composition `self ∘_slot inner` (slot is 1-based).
    pub fn compose_at(&self, slot: usize, inner: &MultilinearMap) -> Result<MultilinearMap> {
        if slot == 0 || slot > self.arity {
            return Err(Error::Invalid(format!("slot {slot} out of range for arity {}", self.arity)));
        }
        if inner.target != self.source || (self.arity > 1 && inner.source != self.source) {
            return Err(Error::Mismatch("compose_at: incompatible spaces".into()));
        }
        let children: Vec<Expr> = (1..=self.arity)
            .map(|j| if j == slot { Expr::apply(inner, vec![Expr::Input; inner.arity]) } else { Expr::Input })
            .collect();
        let e = Expr::apply(self, children);
        Ok(tabulate(&[(one(), e)], inner.source.clone(), self.target.clone()))
    }

    /// `∂f = d ∘ f − (−1)^{|f|} Σ_j f ∘_j d`.
    pub fn boundary(&self) -> MultilinearMap {
        let ds = self.source.differential_map();
        let dt = self.target.differential_map();
        let mut terms = vec![(one(), Expr::apply(&dt, vec![Expr::apply(self, vec![Expr::Input; self.arity])]))];
        for j in 0..self.arity {
            let children = (0..self.arity)
                .map(|t| if t == j { Expr::apply(&ds, vec![Expr::Input]) } else { Expr::Input })
                .collect();
            terms.push((-sign(self.degree), Expr::apply(self, children)));
        }
        tabulate(&terms, self.source.clone(), self.target.clone())
    }

    /// Reinterprets the map between equal complexes held in different allocations.
    pub fn with_spaces(mut self, source: Arc<ChainComplex>, target: Arc<ChainComplex>) -> Self {
        debug_assert!(*source == *self.source && *target == *self.target);
        self.source = source;
        self.target = target;
        self
    }
}

/// A composite of maps: `Input` consumes the next argument.
#[derive(Clone, Debug)]
pub enum Expr<'a> {
    Input,
    Apply { map: &'a MultilinearMap, children: Vec<Expr<'a>>, arity: usize, degree: i64 },
}

impl<'a> Expr<'a> {
    pub fn apply(map: &'a MultilinearMap, children: Vec<Expr<'a>>) -> Self {
        assert_eq!(children.len(), map.arity(), "child count must match arity");
        let arity = children.iter().map(Expr::arity).sum();
        let degree = map.degree() + children.iter().map(Expr::degree).sum::<i64>();
        Expr::Apply { map, children, arity, degree }
    }

    pub fn arity(&self) -> usize {
        match self {
            Expr::Input => 1,
            Expr::Apply { arity, .. } => *arity,
        }
    }

    pub fn degree(&self) -> i64 {
        match self {
            Expr::Input => 0,
            Expr::Apply { degree, .. } => *degree,
        }
    }

    /// Evaluates on basis inputs with the Koszul rule
    /// `(f_1 ⊗ … ⊗ f_k)(x_1 ⊗ … ⊗ x_k) = ± f_1(x_1) ⊗ … ⊗ f_k(x_k)`.
    pub fn eval(&self, inputs: &[usize], input_degrees: &[i64]) -> Comb<usize> {
        match self {
            Expr::Input => Comb::basis(inputs[0]),
            Expr::Apply { map, children, .. } => {
                let mut pos = 0;
                let mut passed = 0i64;
                let mut exponent = 0i64;
                let mut args = Vec::with_capacity(children.len());
                for c in children {
                    let k = c.arity();
                    exponent += c.degree() * passed;
                    let v = c.eval(&inputs[pos..pos + k], &input_degrees[pos..pos + k]);
                    if v.is_zero() {
                        return Comb::new();
                    }
                    args.push(v);
                    passed += input_degrees[pos..pos + k].iter().sum::<i64>();
                    pos += k;
                }
                let out = map.apply(&args);
                if exponent % 2 != 0 {
                    out.negated()
                } else {
                    out
                }
            }
        }
    }
}

/// A map with small random integer entries (about half of the admissible coefficients nonzero).
pub fn random_map(source: Arc<ChainComplex>, target: Arc<ChainComplex>, arity: usize, degree: i64, rng: &mut impl rand::Rng) -> MultilinearMap {
    let mut m = MultilinearMap::zero(source.clone(), target.clone(), arity, degree);
    for t in tuples(source.dim(), arity) {
        let d = m.input_degree(&t) + degree;
        let mut v = Comb::new();
        for j in target.basis_in_degree(d) {
            if rng.gen_bool(0.5) {
                v.add_term(j, Rational::from_integer(rng.gen_range(-2i64..=2).into()));
            }
        }
        if !v.is_zero() {
            m.entries.insert(t, v);
        }
    }
    m
}

/// All basis tuples of the given length, in lexicographic order.
pub fn tuples(dim: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if dim == 0 && len > 0 {
        return out;
    }
    let mut t = vec![0usize; len];
    loop {
        out.push(t.clone());
        let mut j = len;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            t[j] += 1;
            if t[j] < dim {
                break;
            }
            t[j] = 0;
        }
    }
}

/// Tabulates `Σ coeff · expr` as a map `source^{⊗k} → target`.
pub fn tabulate(terms: &[(Rational, Expr<'_>)], source: Arc<ChainComplex>, target: Arc<ChainComplex>) -> MultilinearMap {
    let arity = terms.first().map(|t| t.1.arity()).unwrap_or(0);
    let degree = terms.first().map(|t| t.1.degree()).unwrap_or(0);
    debug_assert!(terms.iter().all(|t| t.1.arity() == arity && t.1.degree() == degree));
    tabulate_with(source, target, arity, degree, |inputs, degs| {
        let mut acc = Comb::new();
        for (q, e) in terms {
            acc.add_scaled(&e.eval(inputs, degs), q);
        }
        acc
    })
}

/// Tabulates an arbitrary function of basis tuples (evaluated in parallel; the
/// result is keyed, so it does not depend on scheduling).
pub fn tabulate_with<F>(source: Arc<ChainComplex>, target: Arc<ChainComplex>, arity: usize, degree: i64, f: F) -> MultilinearMap
where
    F: Fn(&[usize], &[i64]) -> Comb<usize> + Sync,
{
    let all = tuples(source.dim(), arity);
    let values: Vec<(Vec<usize>, Comb<usize>)> = all
        .into_par_iter()
        .filter_map(|t| {
            let degs: Vec<i64> = t.iter().map(|&i| source.degree(i)).collect();
            let v = f(&t, &degs);
            (!v.is_zero()).then_some((t, v))
        })
        .collect();
    let mut m = MultilinearMap::zero(source, target, arity, degree);
    for (k, v) in values {
        m.entries.insert(k, v);
    }
    m
}
