//! `uA∞`-algebra structures, strictly unital `A∞`-algebras and ∞-morphisms on finite complexes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::algebra::UnitalDga;
use crate::comb::Comb;
use crate::complex::{sdr_to_homology, ChainComplex};
use crate::cooperad::{curvature, full_coproduct, infinitesimal, Infinitesimal, TwoLevel};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::multilinear::{tabulate_with, Expr, MultilinearMap};
use crate::operad::{Convention, Differential, FreeElement, Tree};
use crate::rational::{one, sign, zero, Rational};
use crate::shapes::Corolla;

type CoproductTerms = Arc<Vec<(TwoLevel, Rational)>>;

/// Memoised full coproduct.
pub(crate) fn coproduct(c: Corolla) -> CoproductTerms {
    static CACHE: OnceLock<Mutex<BTreeMap<Corolla, CoproductTerms>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&c) {
        return v.clone();
    }
    let v: CoproductTerms = Arc::new(full_coproduct(c).into_iter().collect());
    cache.lock().unwrap().insert(c, v.clone());
    v
}

/// Multilinear extension of a function on basis tuples.
pub(crate) fn expand<K: Ord + Clone>(args: &[Comb<usize>], f: &dyn Fn(&[usize]) -> Comb<K>) -> Comb<K> {
    let mut out = Comb::new();
    if args.iter().any(Comb::is_zero) {
        return out;
    }
    let lists: Vec<Vec<(usize, Rational)>> = args.iter().map(|a| a.iter().map(|(k, v)| (*k, v.clone())).collect()).collect();
    let mut idx = vec![0usize; lists.len()];
    loop {
        let key: Vec<usize> = idx.iter().enumerate().map(|(j, &i)| lists[j][i].0).collect();
        let coeff = idx.iter().enumerate().fold(one(), |acc, (j, &i)| acc * &lists[j][i].1);
        out.add_scaled(&f(&key), &coeff);
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

/// `Σ_{(ν_0; ν_1, …, ν_k) ∈ Δ(c)} ± outer_{ν_0}(inner_{ν_1}(a⃗_1), …, inner_{ν_k}(a⃗_k))`, the
/// sign being the coproduct coefficient times `(−1)^{Σ_j |ν_j| (|a⃗_1| + … + |a⃗_{j−1}|)}`.
pub(crate) fn coalgebra_sum<K: Ord + Clone, O: Ord + Clone>(
    c: Corolla,
    inputs: &[usize],
    degs: &[i64],
    skip_identity_outer: bool,
    inner: &dyn Fn(Corolla, &[usize]) -> Comb<K>,
    inner_zero: &dyn Fn(Corolla) -> bool,
    outer: &dyn Fn(Corolla, &[Comb<K>]) -> Comb<O>,
    outer_zero: &dyn Fn(Corolla) -> bool,
) -> Comb<O> {
    let mut out = Comb::new();
    'terms: for (t, coeff) in coproduct(c).iter() {
        if (skip_identity_outer && t.outer.is_identity()) || outer_zero(t.outer) {
            continue;
        }
        if t.inners.iter().any(|x| inner_zero(*x)) {
            continue;
        }
        let mut pos = 0;
        let mut passed = 0i64;
        let mut e = 0i64;
        let mut values = Vec::with_capacity(t.inners.len());
        for nu in &t.inners {
            let k = nu.arity();
            e += nu.cooperad_degree() * passed;
            let v = inner(*nu, &inputs[pos..pos + k]);
            if v.is_zero() {
                continue 'terms;
            }
            values.push(v);
            passed += degs[pos..pos + k].iter().sum::<i64>();
            pos += k;
        }
        out.add_scaled(&outer(t.outer, &values), &(coeff * sign(e)));
    }
    out
}

/// Nonzero defects found by a checker, one row per corolla in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectReport {
    pub bound: usize,
    /// `(corolla, number of nonzero entries of the defect)`.
    pub rows: Vec<(Corolla, usize)>,
}

impl DefectReport {
    pub fn failures(&self) -> Vec<Corolla> {
        self.rows.iter().filter(|r| r.1 > 0).map(|r| r.0).collect()
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.1 == 0)
    }

    pub fn tsv(&self) -> String {
        let mut s = String::from("n\tS\tstatus\tdefect_entries\n");
        for (c, k) in &self.rows {
            let _ = writeln!(s, "{}\t{}\t{}\t{}", c.n(), c.cork_label(), if *k == 0 { "ok" } else { "defect" }, k);
        }
        s
    }
}

fn check_bound(c: Corolla, bound: usize) -> Result<()> {
    if c.n() > bound {
        return Err(Error::Bound(format!("{c} exceeds bound {bound}")));
    }
    Ok(())
}

/// A `uA∞`-structure truncated at `bound`: one map per generator `μ_n^S` with `n ≤ bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UAInfStructure {
    carrier: Arc<ChainComplex>,
    bound: usize,
    maps: BTreeMap<Corolla, MultilinearMap>,
}

impl UAInfStructure {
    pub fn zero(carrier: Arc<ChainComplex>, bound: usize) -> Self {
        let maps = Corolla::generators_up_to(bound)
            .into_iter()
            .map(|g| (g, MultilinearMap::zero(carrier.clone(), carrier.clone(), g.arity(), g.generator_degree())))
            .collect();
        UAInfStructure { carrier, bound, maps }
    }

    pub fn carrier(&self) -> &Arc<ChainComplex> {
        &self.carrier
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn maps(&self) -> impl Iterator<Item = (&Corolla, &MultilinearMap)> {
        self.maps.iter()
    }

    pub fn get(&self, c: Corolla) -> Result<&MultilinearMap> {
        self.maps.get(&c).ok_or_else(|| Error::Bound(format!("{c} is not a generator within bound {}", self.bound)))
    }

    /// The map of a generator within the bound.
    pub fn map(&self, c: Corolla) -> &MultilinearMap {
        self.get(c).expect("generator within bound")
    }

    pub fn is_zero_at(&self, c: Corolla) -> bool {
        self.maps.get(&c).map_or(true, MultilinearMap::is_zero)
    }

    pub fn set(&mut self, c: Corolla, m: MultilinearMap) -> Result<()> {
        let slot = self.get(c)?;
        if m.arity() != slot.arity() || m.degree() != slot.degree() {
            return Err(Error::Invalid(format!("{c} needs arity {} and degree {}", slot.arity(), slot.degree())));
        }
        if **m.target() != *self.carrier || (m.arity() > 0 && **m.source() != *self.carrier) {
            return Err(Error::Mismatch(format!("{c} does not act on the carrier")));
        }
        let m = m.with_spaces(self.carrier.clone(), self.carrier.clone());
        self.maps.insert(c, m);
        Ok(())
    }

    /// `u = μ_1^{{1}}()`.
    pub fn unit_element(&self) -> Comb<usize> {
        self.map(Corolla::unit()).apply_basis(&[])
    }

    /// Same maps with a different bound (new generators are zero).
    pub fn with_bound(&self, bound: usize) -> Self {
        let mut out = Self::zero(self.carrier.clone(), bound);
        for (c, m) in &self.maps {
            if c.n() <= bound {
                out.maps.insert(*c, m.clone());
            }
        }
        out
    }

    /// The strict structure: `μ_2^∅` the product, `μ_1^{{1}}` the unit, all else zero.
    pub fn from_unital_dga(p: &UnitalDga, bound: usize) -> Result<Self> {
        p.validate()?;
        let bound = bound.max(2);
        let c = p.complex.clone();
        let mut s = Self::zero(c.clone(), bound);
        s.set(Corolla::new(2, &[])?, p.product.clone())?;
        s.set(Corolla::unit(), MultilinearMap::element(c.clone(), c, 0, Comb::basis(p.unit)))?;
        Ok(s)
    }

    /// `μ_n^∅ = μ_n`, `μ_1^{{1}} = u`, all corked maps of arity ≥ 2 zero.
    pub fn from_suainf(x: &SUAInfStructure, bound: usize) -> Result<Self> {
        x.check_unit()?;
        Ok(x.embed(bound))
    }

    /// Evaluates an element of the free operad in `End(carrier)`.
    pub fn evaluate(&self, x: &FreeElement, arity: usize, degree: i64) -> Result<MultilinearMap> {
        fn build<'a>(s: &'a UAInfStructure, t: &Tree) -> Result<Option<Expr<'a>>> {
            match t {
                Tree::Leaf => Ok(Some(Expr::Input)),
                Tree::Node(c, ch) => {
                    let m = s.get(*c)?;
                    if m.is_zero() {
                        return Ok(None);
                    }
                    let mut kids = Vec::with_capacity(ch.len());
                    for x in ch {
                        match build(s, x)? {
                            Some(e) => kids.push(e),
                            None => return Ok(None),
                        }
                    }
                    Ok(Some(Expr::apply(m, kids)))
                }
            }
        }
        let mut terms = Vec::new();
        for (t, q) in x {
            if t.arity() != arity || t.degree() != degree {
                return Err(Error::Mismatch(format!("term {t} has the wrong arity or degree")));
            }
            if let Some(e) = build(self, t)? {
                terms.push((q.clone(), e));
            }
        }
        Ok(tabulate_with(self.carrier.clone(), self.carrier.clone(), arity, degree, |inp, degs| {
            let mut acc = Comb::new();
            for (q, e) in &terms {
                acc.add_scaled(&e.eval(inp, degs), q);
            }
            acc
        }))
    }

    /// `∂(μ_n^S) − (image of d μ_n^S)`.
    pub fn relation_defect(&self, c: Corolla) -> Result<MultilinearMap> {
        self.relation_defect_with(c, &Differential::new(c.n(), Convention::Consistent))
    }

    pub fn relation_defect_with(&self, c: Corolla, d: &Differential) -> Result<MultilinearMap> {
        let lhs = self.get(c)?.boundary();
        let rhs = self.evaluate(&d.on_generator(c), c.arity(), c.generator_degree() - 1)?;
        let mut out = lhs;
        out.add_scaled(&rhs, &-one())?;
        Ok(out)
    }

    /// All relations with `n ≤ bound`.
    pub fn verify(&self, bound: usize) -> Result<DefectReport> {
        if bound > self.bound {
            return Err(Error::Bound(format!("structure is only known up to {}", self.bound)));
        }
        let d = Differential::new(bound, Convention::Consistent);
        let rows: Result<Vec<(Corolla, usize)>> = Corolla::generators_up_to(bound)
            .into_par_iter()
            .map(|c| Ok((c, self.relation_defect_with(c, &d)?.entries().len())))
            .collect();
        Ok(DefectReport { bound, rows: rows? })
    }

    /// The twisting morphism `α(μ̄_n^S) = μ_n^S`.
    pub fn alpha(&self) -> ConvolutionMap {
        ConvolutionMap { carrier: self.carrier.clone(), degree: -1, values: self.maps.clone() }
    }

    /// `∂(α) + α ⋆ α − Θ` at `μ̄_n^S`.
    pub fn mc_defect(&self, c: Corolla) -> Result<MultilinearMap> {
        check_bound(c, self.bound)?;
        let alpha = self.alpha();
        let mut out = alpha.value(c).boundary();
        out.add_scaled(&convolution_star(&alpha, &alpha, c)?, &one())?;
        out.add_scaled(&theta(self.carrier.clone()).value(c), &-one())?;
        Ok(out)
    }

    pub fn mc_report(&self, bound: usize) -> Result<DefectReport> {
        check_bound(Corolla::new(bound.max(1), &[])?, self.bound)?;
        let rows: Result<Vec<(Corolla, usize)>> = Corolla::generators_up_to(bound)
            .into_par_iter()
            .map(|c| Ok((c, self.mc_defect(c)?.entries().len())))
            .collect();
        Ok(DefectReport { bound, rows: rows? })
    }
}

/// A linear map `uAs^¡ → End(carrier)` of fixed degree, given on corollas (absent = zero).
#[derive(Clone, Debug)]
pub struct ConvolutionMap {
    pub carrier: Arc<ChainComplex>,
    pub degree: i64,
    pub values: BTreeMap<Corolla, MultilinearMap>,
}

impl ConvolutionMap {
    pub fn value(&self, c: Corolla) -> MultilinearMap {
        self.values.get(&c).cloned().unwrap_or_else(|| {
            MultilinearMap::zero(self.carrier.clone(), self.carrier.clone(), c.arity(), self.degree + c.cooperad_degree())
        })
    }
}

/// `Θ = u ∘ θ`: `−id` on `μ̄_2^{{1}}` and `μ̄_2^{{2}}`.
pub fn theta(carrier: Arc<ChainComplex>) -> ConvolutionMap {
    let mut values = BTreeMap::new();
    for c in Corolla::all_with(2) {
        let k = curvature(c);
        if k != zero() {
            values.insert(c, MultilinearMap::identity(carrier.clone()).scaled(&k));
        }
    }
    ConvolutionMap { carrier, degree: -2, values }
}

/// `(f ⋆ g)(c) = Σ_{Δ_(1)(c)} ± f(c_(1)) ∘_i g(c_(2))`, trivial factors included.
pub fn convolution_star(f: &ConvolutionMap, g: &ConvolutionMap, c: Corolla) -> Result<MultilinearMap> {
    if f.carrier != g.carrier {
        return Err(Error::Mismatch("convolution of maps on different carriers".into()));
    }
    let mut out = MultilinearMap::zero(f.carrier.clone(), f.carrier.clone(), c.arity(), f.degree + g.degree + c.cooperad_degree());
    for t in infinitesimal(c, Infinitesimal::Unreduced) {
        let (Some(a), Some(b)) = (f.values.get(&t.outer), g.values.get(&t.inner)) else { continue };
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let s = &t.coeff * sign(g.degree * t.outer.cooperad_degree());
        out.add_scaled(&a.compose_at(t.slot(), b)?, &s)?;
    }
    Ok(out)
}

/// A strictly unital `A∞`-algebra: maps `μ_n` (`n ≥ 2`) and a strict unit.
#[derive(Clone, Debug)]
pub struct SUAInfStructure {
    pub carrier: Arc<ChainComplex>,
    pub unit: Comb<usize>,
    /// `μ_n` for `2 ≤ n ≤ bound`.
    pub products: BTreeMap<usize, MultilinearMap>,
    pub bound: usize,
}

impl SUAInfStructure {
    pub fn new(carrier: Arc<ChainComplex>, unit: Comb<usize>, products: BTreeMap<usize, MultilinearMap>, bound: usize) -> Result<Self> {
        let x = SUAInfStructure { carrier, unit, products, bound };
        x.check_unit()?;
        let report = x.embed(bound).verify(bound)?;
        if !report.passed() {
            return Err(Error::Defect(format!("A∞ relations fail at {:?}", report.failures())));
        }
        Ok(x)
    }

    fn embed(&self, bound: usize) -> UAInfStructure {
        let c = self.carrier.clone();
        let mut s = UAInfStructure::zero(c.clone(), bound.max(1));
        for (&n, m) in &self.products {
            if n <= bound {
                let _ = s.set(Corolla::new(n, &[]).unwrap(), m.clone());
            }
        }
        let _ = s.set(Corolla::unit(), MultilinearMap::element(c.clone(), c, 0, self.unit.clone()));
        s
    }

    fn check_unit(&self) -> Result<()> {
        let c = &self.carrier;
        if self.unit.keys().any(|&k| c.degree(k) != 0) {
            return Err(Error::Invalid("unit must have degree 0".into()));
        }
        if !c.apply_d(&self.unit).is_zero() {
            return Err(Error::Invalid("unit is not a cycle".into()));
        }
        for (&n, m) in &self.products {
            if n < 2 || m.arity() != n || m.degree() != n as i64 - 2 {
                return Err(Error::Invalid(format!("μ_{n} has the wrong shape")));
            }
            for j in 0..n {
                for rest in crate::multilinear::tuples(c.dim(), n - 1) {
                    let mut args: Vec<Comb<usize>> = rest.iter().map(|&i| Comb::basis(i)).collect();
                    args.insert(j, self.unit.clone());
                    let v = m.apply(&args);
                    let expected = if n == 2 { args[1 - j].clone() } else { Comb::new() };
                    if v != expected {
                        return Err(Error::Invalid(format!("unit axiom fails for μ_{n} in slot {}", j + 1)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Targets of ∞-morphisms: a complex with operations `μ_c` acting on combinations of keys.
pub trait MorphismTarget: Sync {
    type Key: Ord + Clone + Send + Sync;
    fn key_degree(&self, k: &Self::Key) -> i64;
    fn d(&self, x: &Comb<Self::Key>) -> Comb<Self::Key>;
    fn operation_is_zero(&self, c: Corolla) -> bool;
    fn operation(&self, c: Corolla, args: &[Comb<Self::Key>]) -> Comb<Self::Key>;
}

impl MorphismTarget for UAInfStructure {
    type Key = usize;

    fn key_degree(&self, k: &usize) -> i64 {
        self.carrier.degree(*k)
    }

    fn d(&self, x: &Comb<usize>) -> Comb<usize> {
        self.carrier.apply_d(x)
    }

    fn operation_is_zero(&self, c: Corolla) -> bool {
        self.is_zero_at(c)
    }

    fn operation(&self, c: Corolla, args: &[Comb<usize>]) -> Comb<usize> {
        self.map(c).apply(args)
    }
}

/// Components `f_n^S` of a map `uAs^¡(A) → B`, evaluated on basis tuples of the source.
pub trait Components<K: Ord>: Sync {
    fn is_zero(&self, c: Corolla) -> bool;
    fn eval(&self, c: Corolla, inputs: &[usize]) -> Comb<K>;
}

/// `∂(f_n^S) − (pre-composition) + (post-composition)` on one basis tuple.
pub fn morphism_defect_at<T: MorphismTarget>(
    source: &UAInfStructure,
    target: &T,
    f: &dyn Components<T::Key>,
    c: Corolla,
    inputs: &[usize],
) -> Comb<T::Key> {
    let a = source.carrier();
    let degs: Vec<i64> = inputs.iter().map(|&i| a.degree(i)).collect();
    let fd = c.cooperad_degree();
    let mut out = target.d(&f.eval(c, inputs));
    // f ∘ d
    for j in 0..inputs.len() {
        let before: i64 = degs[..j].iter().sum();
        let s = -sign(fd + before);
        for (k, q) in a.d(inputs[j]) {
            let mut v = inputs.to_vec();
            v[j] = *k;
            out.add_scaled(&f.eval(c, &v), &(&s * q));
        }
    }
    // pre-composition with the source operations
    for t in infinitesimal(c, Infinitesimal::Unreduced) {
        if t.inner.is_identity() || source.is_zero_at(t.inner) || f.is_zero(t.outer) {
            continue;
        }
        let p = t.slot() - 1;
        let k = t.inner.arity();
        let mu = source.map(t.inner);
        let value = mu.apply_basis(&inputs[p..p + k]);
        if value.is_zero() {
            continue;
        }
        let before: i64 = degs[..p].iter().sum();
        let s = -(&t.coeff * sign(t.outer.cooperad_degree() + mu.degree() * before));
        let mut args: Vec<Comb<usize>> = inputs[..p].iter().map(|&i| Comb::basis(i)).collect();
        args.push(value);
        args.extend(inputs[p + k..].iter().map(|&i| Comb::basis(i)));
        out.add_scaled(&expand(&args, &|key| f.eval(t.outer, key)), &s);
    }
    // post-composition with the target operations
    let post = coalgebra_sum(
        c,
        inputs,
        &degs,
        true,
        &|nu, inp| f.eval(nu, inp),
        &|nu| f.is_zero(nu),
        &|nu0, args| target.operation(nu0, args),
        &|nu0| target.operation_is_zero(nu0),
    );
    out.add_comb(post);
    out
}

/// An ∞-morphism between finite `uA∞`-algebras, truncated at `bound`.
#[derive(Clone, Debug)]
pub struct InfinityMorphism {
    source: Arc<UAInfStructure>,
    target: Arc<UAInfStructure>,
    bound: usize,
    components: BTreeMap<Corolla, MultilinearMap>,
}

impl Components<usize> for InfinityMorphism {
    fn is_zero(&self, c: Corolla) -> bool {
        self.components.get(&c).map_or(true, MultilinearMap::is_zero)
    }

    fn eval(&self, c: Corolla, inputs: &[usize]) -> Comb<usize> {
        self.components.get(&c).map(|m| m.apply_basis(inputs)).unwrap_or_default()
    }
}

impl InfinityMorphism {
    pub fn zero(source: Arc<UAInfStructure>, target: Arc<UAInfStructure>, bound: usize) -> Self {
        let components = Corolla::all_up_to(bound)
            .into_iter()
            .map(|c| (c, MultilinearMap::zero(source.carrier().clone(), target.carrier().clone(), c.arity(), c.cooperad_degree())))
            .collect();
        InfinityMorphism { source, target, bound, components }
    }

    /// The strict morphism with `f_1^∅ = f` and all other components zero.
    pub fn strict(source: Arc<UAInfStructure>, target: Arc<UAInfStructure>, f: MultilinearMap, bound: usize) -> Result<Self> {
        let mut m = Self::zero(source, target, bound);
        m.set(Corolla::identity(), f)?;
        Ok(m)
    }

    pub fn identity(s: Arc<UAInfStructure>, bound: usize) -> Self {
        let id = MultilinearMap::identity(s.carrier().clone());
        Self::strict(s.clone(), s, id, bound).expect("identity has the right shape")
    }

    pub fn source(&self) -> &Arc<UAInfStructure> {
        &self.source
    }

    pub fn target(&self) -> &Arc<UAInfStructure> {
        &self.target
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn components(&self) -> impl Iterator<Item = (&Corolla, &MultilinearMap)> {
        self.components.iter()
    }

    pub fn component(&self, c: Corolla) -> Result<&MultilinearMap> {
        self.components.get(&c).ok_or_else(|| Error::Bound(format!("{c} exceeds bound {}", self.bound)))
    }

    pub fn set(&mut self, c: Corolla, m: MultilinearMap) -> Result<()> {
        let slot = self.component(c)?;
        if m.arity() != slot.arity() || m.degree() != slot.degree() {
            return Err(Error::Invalid(format!("component {c} needs arity {} and degree {}", slot.arity(), slot.degree())));
        }
        if **m.target() != **self.target.carrier() || (m.arity() > 0 && **m.source() != **self.source.carrier()) {
            return Err(Error::Mismatch(format!("component {c} has the wrong spaces")));
        }
        let m = m.with_spaces(self.source.carrier().clone(), self.target.carrier().clone());
        self.components.insert(c, m);
        Ok(())
    }

    pub fn morphism_defect(&self, c: Corolla) -> Result<MultilinearMap> {
        check_bound(c, self.bound)?;
        check_bound(c, self.source.bound())?;
        check_bound(c, self.target.bound())?;
        Ok(tabulate_with(self.source.carrier().clone(), self.target.carrier().clone(), c.arity(), c.cooperad_degree() - 1, |inp, _| {
            morphism_defect_at(&self.source, &*self.target, self, c, inp)
        }))
    }

    pub fn verify(&self, bound: usize) -> Result<DefectReport> {
        let rows: Result<Vec<(Corolla, usize)>> = Corolla::all_up_to(bound)
            .into_par_iter()
            .map(|c| Ok((c, self.morphism_defect(c)?.entries().len())))
            .collect();
        Ok(DefectReport { bound, rows: rows? })
    }

    /// `f_1^∅` induces an isomorphism in homology.
    pub fn is_quasi_isomorphism(&self) -> Result<bool> {
        let sa = sdr_to_homology(self.source.carrier(), None)?;
        let sb = sdr_to_homology(self.target.carrier(), None)?;
        let f = self.component(Corolla::identity())?;
        let induced = sb.p.compose_at(1, &f.compose_at(1, &sa.i)?)?;
        let (hv, hw) = (&sa.v, &sb.v);
        for k in hv.degree_set().union(&hw.degree_set()) {
            let src = hv.basis_in_degree(*k);
            let tgt = hw.basis_in_degree(*k);
            if src.len() != tgt.len() {
                return Ok(false);
            }
            let cols: Vec<Vec<Rational>> = src
                .iter()
                .map(|&i| {
                    let v = induced.apply_basis(&[i]);
                    tgt.iter().map(|j| v.coeff(j)).collect()
                })
                .collect();
            if Matrix::from_columns(tgt.len(), &cols).rank() != src.len() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Pushes `s` forward along the ∞-isomorphism with `f_1^∅ = id` and the given higher
/// components (missing ones are zero): returns the unique structure making it an ∞-morphism.
pub fn push_forward(s: &Arc<UAInfStructure>, higher: &BTreeMap<Corolla, MultilinearMap>) -> Result<InfinityMorphism> {
    let bound = s.bound();
    let a = s.carrier().clone();
    let mut f = InfinityMorphism::identity(s.clone(), bound);
    for (c, m) in higher {
        if c.is_identity() {
            return Err(Error::Invalid("the linear part is fixed to the identity".into()));
        }
        f.set(*c, m.clone())?;
    }
    let mut order = Corolla::generators_up_to(bound);
    order.sort_by_key(|c| (c.cooperad_degree(), *c));
    let mut target = UAInfStructure::zero(a.clone(), bound);
    for c in order {
        let defect = tabulate_with(a.clone(), a.clone(), c.arity(), c.generator_degree(), |inp, _| morphism_defect_at(s, &target, &f, c, inp));
        target.set(c, defect.scaled(&-one()))?;
    }
    f.target = Arc::new(target);
    Ok(f)
}

/// Random higher components for [`push_forward`].
pub fn random_components(carrier: &Arc<ChainComplex>, bound: usize, seed: u64) -> BTreeMap<Corolla, MultilinearMap> {
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Corolla::all_up_to(bound)
        .into_iter()
        .filter(|c| !c.is_identity())
        .map(|c| (c, crate::multilinear::random_map(carrier.clone(), carrier.clone(), c.arity(), c.cooperad_degree(), &mut rng)))
        .collect()
}

/// `(G ∘ F)_n^S = Σ_{Δ} ± g_{ν_0}(f_{ν_1}, …, f_{ν_k})`.
pub fn compose_morphisms(g: &InfinityMorphism, f: &InfinityMorphism, bound: usize) -> Result<InfinityMorphism> {
    if **g.source() != **f.target() {
        return Err(Error::Mismatch("the first morphism does not start where the second ends".into()));
    }
    let bound = bound.min(f.bound).min(g.bound);
    let mut out = InfinityMorphism::zero(f.source.clone(), g.target.clone(), bound);
    let comps: Vec<(Corolla, MultilinearMap)> = Corolla::all_up_to(bound)
        .into_par_iter()
        .map(|c| {
            let m = tabulate_with(f.source.carrier().clone(), g.target.carrier().clone(), c.arity(), c.cooperad_degree(), |inp, degs| {
                coalgebra_sum(
                    c,
                    inp,
                    degs,
                    false,
                    &|nu, x| f.eval(nu, x),
                    &|nu| Components::is_zero(f, nu),
                    &|nu0, args| g.components[&nu0].apply(args),
                    &|nu0| Components::is_zero(g, nu0),
                )
            });
            (c, m)
        })
        .collect();
    for (c, m) in comps {
        out.components.insert(c, m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{fixture_a1, fixture_a2, ground_field};
    use crate::rational::int;

    fn c(n: usize, s: &[usize]) -> Corolla {
        Corolla::new(n, s).unwrap()
    }

    #[test]
    fn strict_structures_verify() {
        for p in [fixture_a1(), fixture_a2(), ground_field()] {
            let s = UAInfStructure::from_unital_dga(&p, 5).unwrap();
            assert!(s.verify(5).unwrap().passed());
            assert!(s.mc_report(5).unwrap().passed());
        }
        let k = UAInfStructure::from_unital_dga(&ground_field(), 3).unwrap();
        assert_eq!(k.map(c(2, &[])).apply_basis(&[0, 0]), Comb::basis(0));
        assert_eq!(k.unit_element(), Comb::basis(0));
        let z = UAInfStructure::zero(Arc::new(ChainComplex::zero()), 4);
        assert!(z.verify(4).unwrap().passed());
    }

    #[test]
    fn unit_homotopy_defect_is_its_boundary() {
        let p = fixture_a2();
        let mut s = UAInfStructure::from_unital_dga(&p, 3).unwrap();
        let a = p.complex.clone();
        let (x, y) = (a.index_of("x").unwrap(), a.index_of("y").unwrap());
        // μ_2^{{1}}: A → A of degree 1, x ↦ y
        let mut m = MultilinearMap::zero(a.clone(), a.clone(), 1, 1);
        m.set(vec![x], Comb::basis(y)).unwrap();
        s.set(c(2, &[1]), m.clone()).unwrap();
        assert_eq!(s.relation_defect(c(2, &[1])).unwrap(), m.boundary());
        assert!(!s.verify(3).unwrap().passed());
    }

    #[test]
    fn mc_theta_component() {
        let a = fixture_a1().complex.clone();
        let th = theta(a.clone());
        assert_eq!(th.value(c(2, &[1])), MultilinearMap::identity(a.clone()).scaled(&-one()));
        assert!(th.value(c(2, &[1, 2])).is_zero());
        let z = UAInfStructure::zero(a.clone(), 3);
        assert_eq!(z.mc_defect(c(2, &[1])).unwrap(), MultilinearMap::identity(a).scaled(&one()));
    }

    #[test]
    fn corrupted_sign_is_detected() {
        let p = fixture_a1();
        let mut s = UAInfStructure::from_unital_dga(&p, 4).unwrap();
        let neg = s.map(c(2, &[])).scaled(&int(-1));
        s.set(c(2, &[]), neg).unwrap();
        assert!(!s.verify(4).unwrap().passed());
        assert!(!s.mc_report(4).unwrap().passed());
    }

    #[test]
    fn identity_morphism_and_unit_component() {
        let s = Arc::new(UAInfStructure::from_unital_dga(&fixture_a2(), 4).unwrap());
        let id = InfinityMorphism::identity(s.clone(), 4);
        assert!(id.verify(4).unwrap().passed());
        assert!(id.is_quasi_isomorphism().unwrap());
        let a = s.carrier().clone();
        let y = a.index_of("y").unwrap();
        let mut f = id.clone();
        f.set(Corolla::unit(), MultilinearMap::element(a.clone(), a.clone(), 1, Comb::basis(y))).unwrap();
        let defect = f.morphism_defect(Corolla::unit()).unwrap();
        // ∂(f_1^{{1}}) − (f_1^∅(u_A) − u_B) = d(y) = x
        assert_eq!(defect.apply_basis(&[]), Comb::basis(a.index_of("x").unwrap()));
    }

    #[test]
    fn strict_maps() {
        let k = Arc::new(UAInfStructure::from_unital_dga(&ground_field(), 3).unwrap());
        let a1 = Arc::new(UAInfStructure::from_unital_dga(&fixture_a1(), 3).unwrap());
        let ca = a1.carrier().clone();
        let (one_idx, x) = (ca.index_of("1").unwrap(), ca.index_of("x").unwrap());
        // the unit map 𝕂 → A1 is an algebra map
        let mut f = MultilinearMap::zero(k.carrier().clone(), ca.clone(), 1, 0);
        f.set(vec![0], Comb::basis(one_idx)).unwrap();
        let m = InfinityMorphism::strict(k.clone(), a1.clone(), f, 3).unwrap();
        assert!(m.verify(3).unwrap().passed());
        // 1 ↦ x preserves neither unit nor product
        let mut g = MultilinearMap::zero(k.carrier().clone(), ca, 1, 0);
        g.set(vec![0], Comb::basis(x)).unwrap();
        let bad = InfinityMorphism::strict(k, a1, g, 3).unwrap();
        let failures = bad.verify(3).unwrap().failures();
        assert!(failures.contains(&c(2, &[])) && failures.contains(&Corolla::unit()));
    }

    #[test]
    fn composition_with_identity() {
        let s = Arc::new(UAInfStructure::from_unital_dga(&fixture_a1(), 3).unwrap());
        let id = InfinityMorphism::identity(s.clone(), 3);
        let a = s.carrier().clone();
        let x = a.index_of("x").unwrap();
        let mut f = id.clone();
        let mut h = MultilinearMap::zero(a.clone(), a.clone(), 1, 2);
        let _ = h.set(vec![x], Comb::new());
        f.set(c(2, &[1]), h).unwrap();
        let comp = compose_morphisms(&id, &f, 3).unwrap();
        for (k, m) in f.components() {
            assert_eq!(comp.component(*k).unwrap(), m);
        }
        let comp = compose_morphisms(&f, &id, 3).unwrap();
        for (k, m) in f.components() {
            assert_eq!(comp.component(*k).unwrap(), m);
        }
    }

    #[test]
    fn suainf_embedding() {
        let p = fixture_a1();
        let x = SUAInfStructure::new(p.complex.clone(), Comb::basis(p.unit), BTreeMap::from([(2, p.product.clone())]), 4).unwrap();
        let s = UAInfStructure::from_suainf(&x, 4).unwrap();
        assert_eq!(s, UAInfStructure::from_unital_dga(&p, 4).unwrap());
        let bad = SUAInfStructure::new(p.complex.clone(), Comb::new(), BTreeMap::from([(2, p.product.clone())]), 3);
        assert!(bad.is_err());
    }

    #[test]
    fn convolution_laws() {
        let s = UAInfStructure::from_unital_dga(&fixture_a2(), 4).unwrap();
        let carrier = s.carrier().clone();
        let th = theta(carrier.clone());
        let f = s.alpha();
        for c in Corolla::all_up_to(4) {
            let a = convolution_star(&f, &th, c).unwrap();
            let b = convolution_star(&th, &f, c).unwrap();
            assert_eq!(a, b, "{c}");
            assert!(f.value(c).boundary().boundary().is_zero());
        }
    }

    pub(crate) fn wide_complex() -> Arc<ChainComplex> {
        let basis = [("a", -2), ("b", -1), ("c", 0), ("e", 1), ("f", 2), ("g", 0)];
        let basis = basis.iter().map(|(n, d)| (n.to_string(), *d)).collect();
        Arc::new(ChainComplex::new(basis, &[("b".into(), "a".into(), one()), ("f".into(), "e".into(), int(2))]).unwrap())
    }

    pub(crate) fn random_structure(carrier: Arc<ChainComplex>, bound: usize, seed: u64) -> UAInfStructure {
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut s = UAInfStructure::zero(carrier.clone(), bound);
        for g in Corolla::generators_up_to(bound) {
            let m = crate::multilinear::random_map(carrier.clone(), carrier.clone(), g.arity(), g.generator_degree(), &mut rng);
            s.set(g, m).unwrap();
        }
        s
    }

    #[test]
    fn push_forward_gives_valid_structures() {
        let p = crate::algebra::tensor(&crate::algebra::fixture_truncated_polynomial(), &fixture_a2()).unwrap();
        let s = Arc::new(UAInfStructure::from_unital_dga(&p, 4).unwrap());
        let f = push_forward(&s, &random_components(s.carrier(), 4, 7)).unwrap();
        let t = f.target().clone();
        let corked = t.maps().filter(|(c, m)| c.cork_count() > 0 && c.n() >= 2 && !m.is_zero()).count();
        assert!(corked > 5);
        assert!(t.verify(4).unwrap().passed());
        assert!(t.mc_report(4).unwrap().passed());
        assert!(crate::bar::BarConstruction::new(&t.with_bound(4), 3).unwrap().codifferential_defect().is_empty());
        assert!(f.verify(4).unwrap().passed());
    }

    #[test]
    fn relation_and_maurer_cartan_agree() {
        for seed in 0..3 {
            let s = random_structure(wide_complex(), 4, seed);
            let mut nonzero = 0;
            for g in Corolla::generators_up_to(4) {
                let r = s.relation_defect(g).unwrap();
                let m = s.mc_defect(g).unwrap();
                nonzero += usize::from(!r.is_zero());
                assert_eq!(r, m, "{g}");
            }
            assert!(nonzero > 10);
            // the printed cork-crossing exponent does not match the Maurer–Cartan form
            let literal = Differential::new(4, Convention::Literal);
            let differ = Corolla::generators_up_to(4).into_iter().filter(|g| s.relation_defect_with(*g, &literal).unwrap() != s.mc_defect(*g).unwrap());
            assert!(differ.count() > 0);
        }
    }
}
