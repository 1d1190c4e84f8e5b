//! Sparse rational linear combinations over an ordered key set.

use std::collections::btree_map::{self, BTreeMap};
use std::fmt;

use num_traits::Zero;

use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Comb<K: Ord> {
    terms: BTreeMap<K, Rational>,
}

impl<K: Ord> Default for Comb<K> {
    fn default() -> Self {
        Comb { terms: BTreeMap::new() }
    }
}

impl<K: Ord + fmt::Debug> fmt::Debug for Comb<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(k, v)| (k, v.to_string()))).finish()
    }
}

impl<K: Ord> Comb<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(key: K, coeff: Rational) -> Self {
        let mut c = Self::new();
        c.add_term(key, coeff);
        c
    }

    pub fn basis(key: K) -> Self {
        Self::single(key, crate::rational::one())
    }

    pub fn add_term(&mut self, key: K, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Comb<K>, scale: &Rational)
    where
        K: Clone,
    {
        if scale.is_zero() {
            return;
        }
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v * scale);
        }
    }

    pub fn add_comb(&mut self, other: Comb<K>) {
        for (k, v) in other.terms {
            self.add_term(k, v);
        }
    }

    pub fn sub_comb(&mut self, other: Comb<K>) {
        for (k, v) in other.terms {
            self.add_term(k, -v);
        }
    }

    pub fn scaled(mut self, scale: &Rational) -> Self {
        if scale.is_zero() {
            return Self::new();
        }
        for v in self.terms.values_mut() {
            *v *= scale;
        }
        self
    }

    pub fn negated(mut self) -> Self {
        for v in self.terms.values_mut() {
            *v = -v.clone();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &K) -> Rational {
        self.terms.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> btree_map::Iter<'_, K, Rational> {
        self.terms.iter()
    }

    pub fn keys(&self) -> btree_map::Keys<'_, K, Rational> {
        self.terms.keys()
    }

    pub fn map_keys<L: Ord>(self, mut f: impl FnMut(K) -> L) -> Comb<L> {
        let mut out = Comb::new();
        for (k, v) in self.terms {
            out.add_term(f(k), v);
        }
        out
    }
}

impl<K: Ord> IntoIterator for Comb<K> {
    type Item = (K, Rational);
    type IntoIter = btree_map::IntoIter<K, Rational>;
    fn into_iter(self) -> Self::IntoIter {
        self.terms.into_iter()
    }
}

impl<'a, K: Ord> IntoIterator for &'a Comb<K> {
    type Item = (&'a K, &'a Rational);
    type IntoIter = btree_map::Iter<'a, K, Rational>;
    fn into_iter(self) -> Self::IntoIter {
        self.terms.iter()
    }
}

impl<K: Ord> FromIterator<(K, Rational)> for Comb<K> {
    fn from_iter<I: IntoIterator<Item = (K, Rational)>>(iter: I) -> Self {
        let mut c = Comb::new();
        for (k, v) in iter {
            c.add_term(k, v);
        }
        c
    }
}
