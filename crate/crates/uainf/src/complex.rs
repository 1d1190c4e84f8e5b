//! Finite graded chain complexes over the rationals (homological grading, `d` of degree −1).

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::Zero;

use crate::comb::Comb;
use crate::error::{Error, Result};
use crate::linalg::{independent_subset, Matrix};
use crate::multilinear::MultilinearMap;
use crate::rational::{one, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    names: Vec<String>,
    degrees: Vec<i64>,
    diff: Vec<Comb<usize>>,
}

impl ChainComplex {
    /// Builds a complex from `(name, degree)` pairs and differential entries
    /// `(source, target, coeff)` meaning `d(source)` has `coeff` on `target`.
    /// The basis is stored in lexicographic name order.
    pub fn new(basis: Vec<(String, i64)>, differential: &[(String, String, Rational)]) -> Result<Self> {
        let mut basis = basis;
        basis.sort_by(|a, b| a.0.cmp(&b.0));
        for w in basis.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Invalid(format!("duplicate basis name {:?}", w[0].0)));
            }
        }
        let names: Vec<String> = basis.iter().map(|b| b.0.clone()).collect();
        let degrees: Vec<i64> = basis.iter().map(|b| b.1).collect();
        let mut c = ChainComplex { diff: vec![Comb::new(); names.len()], names, degrees };
        for (s, t, q) in differential {
            let si = c.index_of(s).ok_or_else(|| Error::Invalid(format!("unknown basis name {s:?}")))?;
            let ti = c.index_of(t).ok_or_else(|| Error::Invalid(format!("unknown basis name {t:?}")))?;
            if !q.is_zero() && c.degrees[ti] != c.degrees[si] - 1 {
                return Err(Error::Invalid(format!("differential {s} -> {t} does not have degree -1")));
            }
            c.diff[si].add_term(ti, q.clone());
        }
        c.validate()?;
        Ok(c)
    }

    /// Complex with zero differential.
    pub fn graded(basis: Vec<(String, i64)>) -> Result<Self> {
        Self::new(basis, &[])
    }

    pub fn zero() -> Self {
        ChainComplex { names: vec![], degrees: vec![], diff: vec![] }
    }

    fn validate(&self) -> Result<()> {
        for i in 0..self.dim() {
            if !self.apply_d(&self.diff[i]).is_zero() {
                return Err(Error::Invalid(format!("d^2 != 0 on {:?}", self.names[i])));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn d(&self, i: usize) -> &Comb<usize> {
        &self.diff[i]
    }

    pub fn has_zero_differential(&self) -> bool {
        self.diff.iter().all(|d| d.is_zero())
    }

    pub fn apply_d(&self, x: &Comb<usize>) -> Comb<usize> {
        let mut out = Comb::new();
        for (i, q) in x {
            out.add_scaled(&self.diff[*i], q);
        }
        out
    }

    pub fn degree_set(&self) -> BTreeSet<i64> {
        self.degrees.iter().copied().collect()
    }

    pub fn basis_in_degree(&self, k: i64) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degrees[i] == k).collect()
    }

    /// Degree of a homogeneous combination; `None` for zero or inhomogeneous input.
    pub fn degree_of(&self, x: &Comb<usize>) -> Option<i64> {
        let degs: BTreeSet<i64> = x.keys().map(|&i| self.degrees[i]).collect();
        if degs.len() == 1 {
            degs.into_iter().next()
        } else {
            None
        }
    }

    /// The differential as an arity-one map of degree −1.
    pub fn differential_map(self: &Arc<Self>) -> MultilinearMap {
        let mut m = MultilinearMap::zero(self.clone(), self.clone(), 1, -1);
        for i in 0..self.dim() {
            m.set_unchecked(vec![i], self.diff[i].clone());
        }
        m
    }

    fn matrix_in_degree(&self, k: i64) -> (Vec<usize>, Vec<usize>, Matrix) {
        let src = self.basis_in_degree(k);
        let tgt = self.basis_in_degree(k - 1);
        let mut m = Matrix::zeros(tgt.len(), src.len());
        for (c, &s) in src.iter().enumerate() {
            for (t, q) in &self.diff[s] {
                let r = tgt.iter().position(|x| x == t).expect("degree -1 differential");
                m.set(r, c, q.clone());
            }
        }
        (src, tgt, m)
    }
}

fn comb_from_coords(basis: &[usize], coords: &[Rational]) -> Comb<usize> {
    basis.iter().zip(coords).map(|(&b, q)| (b, q.clone())).collect()
}

fn coords_of(basis: &[usize], x: &Comb<usize>) -> Vec<Rational> {
    basis.iter().map(|b| x.coeff(b)).collect()
}

/// Splitting of one degree: `C_k = B ⊕ H ⊕ W` with `B = d(W_{k+1})`.
#[derive(Clone, Debug)]
pub struct DegreeSplitting {
    pub degree: i64,
    pub basis: Vec<usize>,
    /// boundary basis, each `d` of the matching `w` vector one degree up
    pub boundaries: Vec<Vec<Rational>>,
    pub boundary_preimages: Vec<Vec<Rational>>,
    pub homology: Vec<Vec<Rational>>,
    pub complement: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug)]
pub struct Homology {
    pub dims: BTreeMap<i64, usize>,
    pub representatives: BTreeMap<i64, Vec<Comb<usize>>>,
    pub splittings: BTreeMap<i64, DegreeSplitting>,
}

/// Homology with explicit splitting data. `prefer` lists cycles to use first as
/// homology representatives (in order), when they are independent modulo boundaries.
pub fn homology_with(c: &ChainComplex, prefer: &[Comb<usize>]) -> Homology {
    let degrees: Vec<i64> = c.degree_set().into_iter().collect();
    // complements W_k first: complement of cycles inside C_k
    let mut complements: BTreeMap<i64, Vec<Vec<Rational>>> = BTreeMap::new();
    let mut cycles: BTreeMap<i64, Vec<Vec<Rational>>> = BTreeMap::new();
    for &k in &degrees {
        let (src, _, m) = c.matrix_in_degree(k);
        let z = m.kernel();
        let n = src.len();
        let mut cand = z.clone();
        for i in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[i] = one();
            cand.push(e);
        }
        let keep = independent_subset(n, &cand);
        let w: Vec<Vec<Rational>> = keep.into_iter().filter(|&i| i >= z.len()).map(|i| cand[i].clone()).collect();
        complements.insert(k, w);
        cycles.insert(k, z);
    }
    let mut splittings = BTreeMap::new();
    let mut dims = BTreeMap::new();
    let mut reps = BTreeMap::new();
    for &k in &degrees {
        let basis = c.basis_in_degree(k);
        let n = basis.len();
        let up = c.basis_in_degree(k + 1);
        let mut boundaries = Vec::new();
        let mut preimages = Vec::new();
        for w in complements.get(&(k + 1)).into_iter().flatten() {
            let img = c.apply_d(&comb_from_coords(&up, w));
            boundaries.push(coords_of(&basis, &img));
            preimages.push(w.clone());
        }
        let mut cand = boundaries.clone();
        for p in prefer {
            if c.degree_of(p) == Some(k) && c.apply_d(p).is_zero() {
                cand.push(coords_of(&basis, p));
            }
        }
        for i in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[i] = one();
            if c.d(basis[i]).is_zero() {
                cand.push(e);
            }
        }
        cand.extend(cycles[&k].iter().cloned());
        let keep = independent_subset(n, &cand);
        let homology: Vec<Vec<Rational>> =
            keep.into_iter().filter(|&i| i >= boundaries.len()).map(|i| cand[i].clone()).collect();
        dims.insert(k, homology.len());
        reps.insert(k, homology.iter().map(|h| comb_from_coords(&basis, h)).collect());
        splittings.insert(
            k,
            DegreeSplitting {
                degree: k,
                basis,
                boundaries,
                boundary_preimages: preimages,
                homology,
                complement: complements[&k].clone(),
            },
        );
    }
    Homology { dims, representatives: reps, splittings }
}

pub fn homology(c: &ChainComplex) -> Homology {
    homology_with(c, &[])
}

/// Strong deformation retract `(i, p, h)` of `a` onto `v`.
#[derive(Clone, Debug)]
pub struct Sdr {
    pub v: Arc<ChainComplex>,
    pub a: Arc<ChainComplex>,
    pub i: MultilinearMap,
    pub p: MultilinearMap,
    pub h: MultilinearMap,
}

impl Sdr {
    pub fn identity(c: Arc<ChainComplex>) -> Self {
        Sdr {
            v: c.clone(),
            a: c.clone(),
            i: MultilinearMap::identity(c.clone()),
            p: MultilinearMap::identity(c.clone()),
            h: MultilinearMap::zero(c.clone(), c, 1, 1),
        }
    }

    /// Checks `pi = id`, chain-map property of `i` and `p`, and `dh + hd = id − ip`;
    /// with `side_conditions` also `hi = 0`, `ph = 0`, `hh = 0`.
    pub fn check(&self, side_conditions: bool) -> Result<()> {
        let shape = |m: &MultilinearMap, s: &Arc<ChainComplex>, t: &Arc<ChainComplex>, deg: i64| {
            m.arity() == 1 && m.degree() == deg && m.source() == s && m.target() == t
        };
        if !shape(&self.i, &self.v, &self.a, 0) || !shape(&self.p, &self.a, &self.v, 0) || !shape(&self.h, &self.a, &self.a, 1) {
            return Err(Error::Mismatch("SDR maps have wrong shape".into()));
        }
        let fail = |what: &str| Err(Error::Invalid(format!("SDR identity fails: {what}")));
        if !self.i.boundary().is_zero() {
            return fail("i is not a chain map");
        }
        if !self.p.boundary().is_zero() {
            return fail("p is not a chain map");
        }
        let pi = self.p.compose_at(1, &self.i)?;
        if pi != MultilinearMap::identity(self.v.clone()) {
            return fail("p i = id");
        }
        let ip = self.i.compose_at(1, &self.p)?;
        let mut rhs = MultilinearMap::identity(self.a.clone());
        rhs.add_scaled(&ip, &(-one()))?;
        if self.h.boundary() != rhs {
            return fail("dh + hd = id - ip");
        }
        if side_conditions {
            if !self.h.compose_at(1, &self.i)?.is_zero() {
                return fail("h i = 0");
            }
            if !self.p.compose_at(1, &self.h)?.is_zero() {
                return fail("p h = 0");
            }
            if !self.h.compose_at(1, &self.h)?.is_zero() {
                return fail("h h = 0");
            }
        }
        Ok(())
    }
}

/// SDR of `c` onto its homology (zero differential). With `normalize`, the named
/// cycle is kept as a homology representative so that `h(normalize) = 0`.
pub fn sdr_to_homology(c: &Arc<ChainComplex>, normalize: Option<&str>) -> Result<Sdr> {
    let mut prefer = Vec::new();
    let mut norm_idx = None;
    if let Some(name) = normalize {
        let idx = c.index_of(name).ok_or_else(|| Error::Invalid(format!("unknown basis name {name:?}")))?;
        if !c.d(idx).is_zero() {
            return Err(Error::CannotNormalize);
        }
        prefer.push(Comb::basis(idx));
        norm_idx = Some(idx);
    }
    let hom = homology_with(c, &prefer);
    if let Some(idx) = norm_idx {
        let k = c.degree(idx);
        let sp = &hom.splittings[&k];
        let pos = sp.basis.iter().position(|&b| b == idx).unwrap();
        let is_rep = sp.homology.iter().any(|h| h.iter().enumerate().all(|(j, q)| q.is_zero() == (j != pos)));
        if !is_rep {
            return Err(Error::CannotNormalize);
        }
    }
    // name homology classes by their representative when it is a basis vector
    let mut vbasis: Vec<(String, i64)> = Vec::new();
    let mut class_of: Vec<(i64, usize, String)> = Vec::new();
    for (k, sp) in &hom.splittings {
        for (j, h) in sp.homology.iter().enumerate() {
            let nz: Vec<usize> = (0..h.len()).filter(|&t| !h[t].is_zero()).collect();
            let name = if nz.len() == 1 && h[nz[0]] == one() {
                c.name(sp.basis[nz[0]]).to_string()
            } else {
                format!("[{k}.{j}]")
            };
            vbasis.push((name.clone(), *k));
            class_of.push((*k, j, name));
        }
    }
    let v = Arc::new(ChainComplex::graded(vbasis)?);
    let mut i = MultilinearMap::zero(v.clone(), c.clone(), 1, 0);
    let mut p = MultilinearMap::zero(c.clone(), v.clone(), 1, 0);
    let mut h = MultilinearMap::zero(c.clone(), c.clone(), 1, 1);
    for (k, j, name) in &class_of {
        let sp = &hom.splittings[k];
        let vi = v.index_of(name).unwrap();
        i.set_unchecked(vec![vi], comb_from_coords(&sp.basis, &sp.homology[*j]));
    }
    for (k, sp) in &hom.splittings {
        let n = sp.basis.len();
        if n == 0 {
            continue;
        }
        let mut cols = sp.boundaries.clone();
        cols.extend(sp.homology.iter().cloned());
        cols.extend(sp.complement.iter().cloned());
        let change = Matrix::from_columns(n, &cols).inverse().expect("splitting spans the degree");
        let nb = sp.boundaries.len();
        let nh = sp.homology.len();
        let up = c.basis_in_degree(k + 1);
        let hclass: Vec<usize> = class_of
            .iter()
            .filter(|(kk, _, _)| kk == k)
            .map(|(_, _, name)| v.index_of(name).unwrap())
            .collect();
        for (col, &b) in sp.basis.iter().enumerate() {
            let mut e = vec![Rational::zero(); n];
            e[col] = one();
            let coords = change.mul_vec(&e);
            let mut pv = Comb::new();
            for t in 0..nh {
                pv.add_term(hclass[t], coords[nb + t].clone());
            }
            p.set_unchecked(vec![b], pv);
            let mut hv = Comb::new();
            for t in 0..nb {
                hv.add_scaled(&comb_from_coords(&up, &sp.boundary_preimages[t]), &coords[t]);
            }
            h.set_unchecked(vec![b], hv);
        }
    }
    let sdr = Sdr { v, a: c.clone(), i, p, h };
    debug_assert!(sdr.check(true).is_ok());
    Ok(sdr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    pub(crate) fn a2() -> Arc<ChainComplex> {
        Arc::new(
            ChainComplex::new(
                vec![("1".into(), 0), ("x".into(), 0), ("y".into(), 1)],
                &[("y".into(), "x".into(), int(1))],
            )
            .unwrap(),
        )
    }

    #[test]
    fn rejects_bad_complexes() {
        assert!(ChainComplex::new(vec![("a".into(), 0), ("a".into(), 1)], &[]).is_err());
        assert!(ChainComplex::new(vec![("a".into(), 0), ("b".into(), 0)], &[("a".into(), "b".into(), int(1))]).is_err());
        assert!(ChainComplex::new(vec![("a".into(), 0)], &[("a".into(), "z".into(), int(1))]).is_err());
        let bad = ChainComplex::new(
            vec![("a".into(), 2), ("b".into(), 1), ("c".into(), 0)],
            &[("a".into(), "b".into(), int(1)), ("b".into(), "c".into(), int(1))],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn homology_examples() {
        let zero_d = ChainComplex::graded(vec![("1".into(), 0), ("x".into(), 0)]).unwrap();
        assert_eq!(homology(&zero_d).dims, BTreeMap::from([(0, 2)]));
        assert_eq!(homology(&a2()).dims, BTreeMap::from([(0, 1), (1, 0)]));
    }

    #[test]
    fn sdr_examples() {
        let c = a2();
        let s = sdr_to_homology(&c, Some("1")).unwrap();
        s.check(true).unwrap();
        assert_eq!(s.v.names(), &["1".to_string()]);
        let (one_, x, y) = (c.index_of("1").unwrap(), c.index_of("x").unwrap(), c.index_of("y").unwrap());
        assert_eq!(s.h.apply_basis(&[x]), Comb::basis(y));
        assert!(s.h.apply_basis(&[y]).is_zero());
        assert!(s.h.apply_basis(&[one_]).is_zero());
        assert!(s.p.apply_basis(&[x]).is_zero());
        assert_eq!(s.i.apply_basis(&[0]), Comb::basis(one_));

        let zw = Arc::new(ChainComplex::new(vec![("z".into(), 1), ("w".into(), 0)], &[("z".into(), "w".into(), int(1))]).unwrap());
        let s = sdr_to_homology(&zw, None).unwrap();
        assert_eq!(s.v.dim(), 0);
        assert_eq!(s.h.apply_basis(&[zw.index_of("w").unwrap()]), Comb::basis(zw.index_of("z").unwrap()));
        assert_eq!(sdr_to_homology(&zw, Some("w")).unwrap_err(), Error::CannotNormalize);
        assert_eq!(sdr_to_homology(&zw, Some("z")).unwrap_err(), Error::CannotNormalize);
        assert_eq!(sdr_to_homology(&a2(), Some("x")).unwrap_err(), Error::CannotNormalize);
    }

    #[test]
    fn zero_differential_gives_identity() {
        let c = Arc::new(ChainComplex::graded(vec![("1".into(), 0), ("x".into(), 0)]).unwrap());
        let s = sdr_to_homology(&c, None).unwrap();
        assert_eq!(s.v.names(), c.names());
        assert_eq!(s.i, MultilinearMap::identity(c.clone()));
        assert!(s.h.is_zero());
    }
}
