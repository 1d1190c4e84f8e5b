//! Homotopy transfer of `uA∞`-structures along strong deformation retracts.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::UnitalDga;
use crate::comb::Comb;
use crate::complex::{sdr_to_homology, ChainComplex, Sdr};
use crate::cooperad::TwoLevel;
use crate::error::{Error, Result};
use crate::multilinear::{tabulate_with, Expr, MultilinearMap};
use crate::rational::{one, Rational};
use crate::shapes::{enumerate_trees, CorkKind, CorkedTree, Corolla};
use crate::structures::{coalgebra_sum, coproduct, Components, InfinityMorphism, SUAInfStructure, UAInfStructure};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `p` at the root.
    Structure,
    /// `h` at the root.
    Morphism,
}

/// The data a transfer evaluates in: the structure on `A`, the retract, and `h(u_A)`.
pub struct TransferContext<'a> {
    pub structure: &'a UAInfStructure,
    pub sdr: &'a Sdr,
    hu: MultilinearMap,
}

impl<'a> TransferContext<'a> {
    /// Checks the retract identities, and with `side_conditions` also `hi = 0`, `ph = 0`, `hh = 0`.
    pub fn new(structure: &'a UAInfStructure, sdr: &'a Sdr, side_conditions: bool) -> Result<Self> {
        if **structure.carrier() != *sdr.a {
            return Err(Error::Mismatch("the retract is not of the structure's carrier".into()));
        }
        sdr.check(side_conditions)?;
        let a = sdr.a.clone();
        let u = structure.unit_element();
        let hu = MultilinearMap::element(a.clone(), a, 1, sdr.h.apply(&[u]));
        Ok(TransferContext { structure, sdr, hu })
    }

    /// `h(u_A)`.
    pub fn h_unit(&self) -> Comb<usize> {
        self.hu.apply_basis(&[])
    }

    fn expr(&self, t: &CorkedTree, internal: bool) -> Result<Option<Expr<'_>>> {
        Ok(match t {
            CorkedTree::Leaf => Some(Expr::apply(&self.sdr.i, vec![Expr::Input])),
            CorkedTree::Cork(CorkKind::Disconnected) => (!self.hu.is_zero()).then(|| Expr::apply(&self.hu, vec![])),
            CorkedTree::Cork(CorkKind::Connected) => {
                let m = self.structure.get(Corolla::unit())?;
                (!m.is_zero()).then(|| Expr::apply(m, vec![]))
            }
            CorkedTree::Vertex(ch) => {
                let m = self.structure.get(CorkedTree::vertex_corolla(ch))?;
                if m.is_zero() {
                    return Ok(None);
                }
                let mut kids = Vec::new();
                for c in ch {
                    if matches!(c, CorkedTree::Cork(CorkKind::Connected)) {
                        continue;
                    }
                    match self.expr(c, true)? {
                        Some(e) => kids.push(e),
                        None => return Ok(None),
                    }
                }
                let e = Expr::apply(m, kids);
                Some(if internal { Expr::apply(&self.sdr.h, vec![e]) } else { e })
            }
        })
    }

    /// Evaluates one tree: `μ_A` at the vertices, `h` on internal edges, `h(u_A)` at
    /// disconnected corks, `i` at open leaves, and `p` or `h` at the root.
    pub fn evaluate_tree(&self, t: &CorkedTree, mode: Mode) -> Result<MultilinearMap> {
        let (v, a) = (self.sdr.v.clone(), self.sdr.a.clone());
        let (root, degree) = match mode {
            Mode::Structure => (&self.sdr.p, t.corolla().generator_degree()),
            Mode::Morphism => (&self.sdr.h, t.corolla().cooperad_degree()),
        };
        let target = if mode == Mode::Structure { v.clone() } else { a };
        match self.expr(t, false)? {
            None => Ok(MultilinearMap::zero(v, target, t.arity(), degree)),
            Some(e) => {
                let e = Expr::apply(root, vec![e]);
                Ok(tabulate_with(v, target, t.arity(), degree, |inp, degs| e.eval(inp, degs)))
            }
        }
    }

    /// `Σ_{T ∈ 𝒯_n^S} σ(T) · evaluate_tree(T)`.
    pub fn tree_sum(&self, c: Corolla, mode: Mode) -> Result<MultilinearMap> {
        let (v, a) = (self.sdr.v.clone(), self.sdr.a.clone());
        let target = if mode == Mode::Structure { v.clone() } else { a };
        let degree = if mode == Mode::Structure { c.generator_degree() } else { c.cooperad_degree() };
        let parts: Result<Vec<MultilinearMap>> = enumerate_trees(c)
            .into_par_iter()
            .filter_map(|t| {
                let s = tree_sign(&t, mode);
                if s == crate::rational::zero() {
                    return None;
                }
                Some(self.evaluate_tree(&t, mode).map(|m| m.scaled(&s)))
            })
            .collect();
        let mut out = MultilinearMap::zero(v, target, c.arity(), degree);
        for m in parts? {
            out.add_scaled(&m, &one())?;
        }
        Ok(out)
    }
}

/// The corolla a child subtree contributes to the two-level decomposition of its parent.
fn child_corolla(t: &CorkedTree) -> Corolla {
    match t {
        CorkedTree::Leaf => Corolla::identity(),
        _ => t.corolla(),
    }
}

/// The sign of a tree in the transfer sums: the product over internal vertices of the
/// coefficient of (vertex corolla; child corollas) in the full coproduct of the subtree,
/// times `−1` for every edge carrying `h` (internal edges, disconnected corks, and the
/// root in morphism mode).
pub fn tree_sign(t: &CorkedTree, mode: Mode) -> Rational {
    let root = if mode == Mode::Morphism { -one() } else { one() };
    root * coproduct_sign(t, false)
}

fn coproduct_sign(t: &CorkedTree, internal: bool) -> Rational {
    match t {
        CorkedTree::Leaf | CorkedTree::Cork(CorkKind::Connected) => one(),
        CorkedTree::Cork(CorkKind::Disconnected) => -one(),
        CorkedTree::Vertex(ch) => {
            let outer = CorkedTree::vertex_corolla(ch);
            let inners: Vec<Corolla> = ch.iter().filter(|c| !matches!(c, CorkedTree::Cork(CorkKind::Connected))).map(child_corolla).collect();
            let key = TwoLevel { outer, inners };
            let Some(q) = coproduct(t.corolla()).iter().find(|(k, _)| *k == key).map(|x| x.1.clone()) else {
                return crate::rational::zero();
            };
            let q = if internal { -q } else { q };
            ch.iter().fold(q, |acc, c| acc * coproduct_sign(c, true))
        }
    }
}

/// Components of the transferred ∞-morphism computed by the coalgebraic recursion
/// `i_c = −h ∘ Σ_{Δ(c)} μ_{ν_0}(i_{ν_1}, …)`, and the transferred operations `p ∘ Σ …`.
pub fn recursive_transfer(ctx: &TransferContext<'_>, bound: usize) -> (BTreeMap<Corolla, MultilinearMap>, BTreeMap<Corolla, MultilinearMap>) {
    struct Partial<'b>(&'b BTreeMap<Corolla, MultilinearMap>);
    impl Components<usize> for Partial<'_> {
        fn is_zero(&self, c: Corolla) -> bool {
            self.0[&c].is_zero()
        }
        fn eval(&self, c: Corolla, inputs: &[usize]) -> Comb<usize> {
            self.0[&c].apply_basis(inputs)
        }
    }
    let (v, a) = (ctx.sdr.v.clone(), ctx.sdr.a.clone());
    let mut inc = BTreeMap::from([(Corolla::identity(), ctx.sdr.i.clone())]);
    let mut ops = BTreeMap::new();
    let mut order = Corolla::all_up_to(bound);
    order.retain(|c| !c.is_identity());
    order.sort_by_key(|c| (c.cooperad_degree(), *c));
    for c in order {
        let known = Partial(&inc);
        let s = tabulate_with(v.clone(), a.clone(), c.arity(), c.generator_degree(), |inp, degs| {
            coalgebra_sum(
                c,
                inp,
                degs,
                true,
                &|nu, x| known.eval(nu, x),
                &|nu| known.is_zero(nu),
                &|nu0, args| ctx.structure.map(nu0).apply(args),
                &|nu0| ctx.structure.is_zero_at(nu0),
            )
        });
        let ic = ctx.sdr.h.compose_at(1, &s).expect("h after S").scaled(&-one());
        ops.insert(c, ctx.sdr.p.compose_at(1, &s).expect("p after S"));
        inc.insert(c, ic);
    }
    (inc, ops)
}

/// The transferred structure on the retract, `μ_n^S(V) = Σ_T σ(T) evaluate_tree(T)`.
pub fn transfer_structure(a: &UAInfStructure, sdr: &Sdr, bound: usize) -> Result<UAInfStructure> {
    let ctx = TransferContext::new(a, sdr, true)?;
    transfer_structure_in(&ctx, bound)
}

pub fn transfer_structure_in(ctx: &TransferContext<'_>, bound: usize) -> Result<UAInfStructure> {
    check_bound(ctx, bound)?;
    let mut out = UAInfStructure::zero(ctx.sdr.v.clone(), bound);
    for c in Corolla::generators_up_to(bound) {
        out.set(c, ctx.tree_sum(c, Mode::Structure)?)?;
    }
    Ok(out)
}

/// The ∞-quasi-isomorphism `V ⇝ A` with `i_1^∅ = i` and `i_n^S = Σ_T σ(T) evaluate_tree(T)`.
pub fn transfer_morphism(a: &UAInfStructure, sdr: &Sdr, bound: usize) -> Result<InfinityMorphism> {
    let ctx = TransferContext::new(a, sdr, true)?;
    let v = Arc::new(transfer_structure_in(&ctx, bound)?);
    transfer_morphism_in(&ctx, v, bound)
}

pub fn transfer_morphism_in(ctx: &TransferContext<'_>, v: Arc<UAInfStructure>, bound: usize) -> Result<InfinityMorphism> {
    check_bound(ctx, bound)?;
    let mut m = InfinityMorphism::strict(v, Arc::new(ctx.structure.clone()), ctx.sdr.i.clone(), bound)?;
    for c in Corolla::all_up_to(bound) {
        if !c.is_identity() {
            m.set(c, ctx.tree_sum(c, Mode::Morphism)?)?;
        }
    }
    Ok(m)
}

fn check_bound(ctx: &TransferContext<'_>, bound: usize) -> Result<()> {
    if bound > ctx.structure.bound() {
        return Err(Error::Bound(format!("the structure on A is only known up to {}", ctx.structure.bound())));
    }
    Ok(())
}

/// A minimal strictly unital model on homology, transferred along a retract with `h(1) = 0`.
pub fn minimal_suainf_model(p: &UnitalDga, bound: usize) -> Result<(SUAInfStructure, InfinityMorphism)> {
    let a = UAInfStructure::from_unital_dga(p, bound)?;
    let sdr = sdr_to_homology(&p.complex, Some(p.unit_name()))?;
    let ctx = TransferContext::new(&a, &sdr, true)?;
    let v = Arc::new(transfer_structure_in(&ctx, bound)?);
    let m = transfer_morphism_in(&ctx, v.clone(), bound)?;
    for c in Corolla::all_up_to(bound) {
        if c.cork_count() == 0 {
            continue;
        }
        if c.n() >= 2 && !v.map(c).is_zero() {
            return Err(Error::Defect(format!("transferred {c} does not vanish")));
        }
        if !m.component(c)?.is_zero() {
            return Err(Error::Defect(format!("morphism component {c} does not vanish")));
        }
    }
    let products = (2..=bound).map(|n| (n, v.map(Corolla::new(n, &[]).unwrap()).clone())).collect();
    let s = SUAInfStructure::new(v.carrier().clone(), v.unit_element(), products, bound)?;
    Ok((s, m))
}

/// Restores `hi = 0`, `ph = 0`, `hh = 0` by `h ↦ π h π` followed by `h ↦ h d h`, where
/// `π = id − ip`.
pub fn impose_side_conditions(sdr: &Sdr) -> Result<Sdr> {
    let a = sdr.a.clone();
    let mut pi = MultilinearMap::identity(a.clone());
    pi.add_scaled(&sdr.i.compose_at(1, &sdr.p)?, &-one())?;
    let h1 = pi.compose_at(1, &sdr.h.compose_at(1, &pi)?)?;
    let d = a.differential_map();
    let h2 = h1.compose_at(1, &d.compose_at(1, &h1)?)?;
    Ok(Sdr { h: h2, ..sdr.clone() })
}

/// An SDR of `c` onto its homology, made generic: the homology basis is changed by a
/// random invertible matrix and, unless `normalize` names the unit, `i` is moved by
/// `d ∘ k` for a random `k` so that `h` need not kill any cycle.
pub fn random_sdr(c: &Arc<ChainComplex>, normalize: Option<&str>, seed: u64) -> Result<Sdr> {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let base = sdr_to_homology(c, normalize)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let v = base.v.clone();
    let (mut g, mut ginv) = (MultilinearMap::zero(v.clone(), v.clone(), 1, 0), MultilinearMap::zero(v.clone(), v.clone(), 1, 0));
    for k in v.degree_set() {
        let idx = v.basis_in_degree(k);
        let n = idx.len();
        let (m, inv) = loop {
            let mut m = crate::linalg::Matrix::identity(n);
            for r in 0..n {
                for col in 0..n {
                    m.set(r, col, Rational::from_integer(rng.gen_range(-2i64..=2).into()));
                }
            }
            if let Some(pos) = normalize.and_then(|_| idx.iter().position(|&j| base.i.apply_basis(&[j]) == Comb::basis(c.index_of(normalize.unwrap()).unwrap()))) {
                for r in 0..n {
                    m.set(r, pos, Rational::from_integer(i64::from(r == pos).into()));
                }
            }
            if let Some(inv) = m.inverse() {
                break (m, inv);
            }
        };
        for (col, &j) in idx.iter().enumerate() {
            g.set(vec![j], idx.iter().enumerate().map(|(r, &i)| (i, m.get(r, col).clone())).collect())?;
            ginv.set(vec![j], idx.iter().enumerate().map(|(r, &i)| (i, inv.get(r, col).clone())).collect())?;
        }
    }
    let mut i = base.i.compose_at(1, &g)?;
    let p = ginv.compose_at(1, &base.p)?;
    let mut h = base.h.clone();
    if normalize.is_none() {
        let k = crate::multilinear::random_map(v.clone(), base.a.clone(), 1, 1, &mut rng);
        let dk = base.a.differential_map().compose_at(1, &k)?;
        i.add_scaled(&dk, &one())?;
        h.add_scaled(&k.compose_at(1, &p)?, &-one())?;
    }
    impose_side_conditions(&Sdr { v, a: base.a, i, p, h })
}

/// Breaks the side conditions of `sdr` without breaking the retract identities, by adding
/// `i ∘ ψ ∘ p` to `h` for a random degree one `ψ` on the (differential-free) retract.
pub fn perturb_side_conditions(sdr: &Sdr, seed: u64) -> Result<Sdr> {
    use rand_chacha::rand_core::SeedableRng;
    if !sdr.v.has_zero_differential() {
        return Err(Error::Invalid("the retract must have zero differential".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let psi = crate::multilinear::random_map(sdr.v.clone(), sdr.v.clone(), 1, 1, &mut rng);
    let mut h = sdr.h.clone();
    h.add_scaled(&sdr.i.compose_at(1, &psi.compose_at(1, &sdr.p)?)?, &one())?;
    Ok(Sdr { h, ..sdr.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{fixture_a1, fixture_a2, random_unital_dga};
    use crate::shapes::parse_tree;

    fn c(n: usize, s: &[usize]) -> Corolla {
        Corolla::new(n, s).unwrap()
    }

    #[test]
    fn recursion_gives_valid_structures() {
        let p = random_unital_dga(3);
        let a = UAInfStructure::from_unital_dga(&p, 4).unwrap();
        let sdr = random_sdr(&p.complex, None, 1).unwrap();
        let ctx = TransferContext::new(&a, &sdr, true).unwrap();
        let (inc, ops) = recursive_transfer(&ctx, 4);
        let mut v = UAInfStructure::zero(sdr.v.clone(), 4);
        for (k, m) in ops {
            v.set(k, m).unwrap();
        }
        let report = v.verify(4).unwrap();
        assert!(report.passed(), "{}", report.tsv());
        let mut m = InfinityMorphism::zero(Arc::new(v), Arc::new(a), 4);
        for (k, x) in inc {
            m.set(k, x).unwrap();
        }
        let report = m.verify(4).unwrap();
        assert!(report.passed(), "{}", report.tsv());
    }

    #[test]
    fn tree_sum_matches_recursion() {
        let p = random_unital_dga(5);
        let a = UAInfStructure::from_unital_dga(&p, 4).unwrap();
        let sdr = random_sdr(&p.complex, None, 2).unwrap();
        let ctx = TransferContext::new(&a, &sdr, true).unwrap();
        let (inc, ops) = recursive_transfer(&ctx, 4);
        for (k, m) in &ops {
            assert_eq!(&ctx.tree_sum(*k, Mode::Structure).unwrap(), m, "{k}");
        }
        for (k, m) in &inc {
            if !k.is_identity() {
                assert_eq!(&ctx.tree_sum(*k, Mode::Morphism).unwrap(), m, "{k}");
            }
        }
    }

    #[test]
    fn non_strict_input() {
        let p = crate::algebra::tensor(&crate::algebra::fixture_truncated_polynomial(), &fixture_a2()).unwrap();
        let s = Arc::new(UAInfStructure::from_unital_dga(&p, 3).unwrap());
        let f = crate::structures::push_forward(&s, &crate::structures::random_components(s.carrier(), 3, 7)).unwrap();
        let a = f.target().clone();
        let sdr = random_sdr(&p.complex, None, 0).unwrap();
        let ctx = TransferContext::new(&a, &sdr, true).unwrap();
        assert!(!ctx.h_unit().is_zero());
        let (inc, ops) = recursive_transfer(&ctx, 3);
        let v = Arc::new(transfer_structure_in(&ctx, 3).unwrap());
        for (k, m) in &ops {
            assert_eq!(v.map(*k), m, "{k}");
        }
        assert!(v.verify(3).unwrap().passed());
        let m = transfer_morphism_in(&ctx, v, 3).unwrap();
        for (k, x) in &inc {
            assert_eq!(m.component(*k).unwrap(), x, "{k}");
        }
        assert!(m.verify(3).unwrap().passed());
    }

    #[test]
    fn literal_epsilon_signs_break_non_strict_transfer() {
        let p = crate::algebra::tensor(&crate::algebra::fixture_truncated_polynomial(), &fixture_a2()).unwrap();
        let s = Arc::new(UAInfStructure::from_unital_dga(&p, 3).unwrap());
        let a = crate::structures::push_forward(&s, &crate::structures::random_components(s.carrier(), 3, 7)).unwrap().target().clone();
        let sdr = random_sdr(&p.complex, None, 0).unwrap();
        let ctx = TransferContext::new(&a, &sdr, true).unwrap();
        let mut v = UAInfStructure::zero(sdr.v.clone(), 3);
        for g in Corolla::generators_up_to(3) {
            let mut m = MultilinearMap::zero(sdr.v.clone(), sdr.v.clone(), g.arity(), g.generator_degree());
            for t in enumerate_trees(g) {
                let e = if crate::shapes::epsilon(&t) % 2 == 0 { one() } else { -one() };
                m.add_scaled(&ctx.evaluate_tree(&t, Mode::Structure).unwrap(), &e).unwrap();
            }
            v.set(g, m).unwrap();
        }
        assert!(!v.verify(3).unwrap().passed());
    }

    #[test]
    fn displayed_two_leaf_signs() {
        let sign_of = |t: &str, mode| tree_sign(&parse_tree(t).unwrap(), mode);
        // μ_2^{{1}}(V) = −p μ_2(h u_A, i −) + p μ_2^{{1}}(A) i
        assert_eq!(sign_of("(1*d 2)", Mode::Structure), -one());
        assert_eq!(sign_of("(1*c 2)", Mode::Structure), one());
        // i_2^{{2}} = h μ_2(i −, h u_A) − h μ_2^{{2}}(A) i
        assert_eq!(sign_of("(1 2*d)", Mode::Morphism), one());
        assert_eq!(sign_of("(1 2*c)", Mode::Morphism), -one());
    }

    #[test]
    fn identity_retract_reproduces_the_structure() {
        let p = fixture_a1();
        let a = UAInfStructure::from_unital_dga(&p, 4).unwrap();
        let sdr = Sdr::identity(p.complex.clone());
        assert_eq!(transfer_structure(&a, &sdr, 4).unwrap(), a);
        let m = transfer_morphism(&a, &sdr, 4).unwrap();
        for (k, x) in m.components() {
            assert_eq!(x.is_zero(), !k.is_identity(), "{k}");
        }
    }

    #[test]
    fn small_tree_evaluations() {
        let p = fixture_a2();
        let a = UAInfStructure::from_unital_dga(&p, 3).unwrap();
        let sdr = sdr_to_homology(&p.complex, None).unwrap();
        let ctx = TransferContext::new(&a, &sdr, true).unwrap();
        let two = ctx.evaluate_tree(&parse_tree("(1 2)").unwrap(), Mode::Structure).unwrap();
        for x in 0..sdr.v.dim() {
            for y in 0..sdr.v.dim() {
                let expected = sdr.p.apply(&[a.map(c(2, &[])).apply(&[sdr.i.apply_basis(&[x]), sdr.i.apply_basis(&[y])])]);
                assert_eq!(two.apply_basis(&[x, y]), expected);
            }
        }
        let u = ctx.evaluate_tree(&parse_tree("1*c").unwrap_or(CorkedTree::Cork(CorkKind::Connected)), Mode::Structure).unwrap();
        assert_eq!(u.apply_basis(&[]), sdr.p.apply(&[a.unit_element()]));
    }

    #[test]
    fn strict_unit_vanishing() {
        for p in [fixture_a2(), random_unital_dga(1), random_unital_dga(2)] {
            let (s, m) = minimal_suainf_model(&p, 4).unwrap();
            assert_eq!(s.carrier.dim(), crate::complex::homology(&p.complex).dims.values().sum::<usize>());
            assert!(m.is_quasi_isomorphism().unwrap());
        }
    }

    #[test]
    fn side_conditions_are_not_needed() {
        let p = random_unital_dga(4);
        let a = UAInfStructure::from_unital_dga(&p, 4).unwrap();
        let sdr = perturb_side_conditions(&random_sdr(&p.complex, None, 3).unwrap(), 9).unwrap();
        assert!(sdr.check(true).is_err());
        let ctx = TransferContext::new(&a, &sdr, false).unwrap();
        let v = Arc::new(transfer_structure_in(&ctx, 4).unwrap());
        assert!(v.verify(4).unwrap().passed());
        // the morphism also needs h i = 0: its defect at μ̄_2^{{1}} is h(i(v))
        let r = transfer_morphism_in(&ctx, v, 4).unwrap().verify(4).unwrap();
        assert_eq!(r.failures(), vec![c(2, &[1]), c(2, &[2])]);
    }
}
