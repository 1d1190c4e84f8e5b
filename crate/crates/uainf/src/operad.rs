//! The quasi-free operad `uA∞ = Ω uAs^¡` on generators `μ_n^S` of degree `n + |S| − 2`.
//!
//! A tree is identified with the word of its vertices in preorder; composing trees
//! permutes these words and picks up the Koszul sign of the permutation.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::comb::Comb;
use crate::cooperad::{curvature, infinitesimal, Infinitesimal};
use crate::error::{Error, Result};
use crate::rational::{one, sign, Rational};
use crate::shapes::Corolla;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Tree {
    /// The identity `|`.
    Leaf,
    /// A generator with one subtree per uncorked input.
    Node(Corolla, Vec<Tree>),
}

pub type FreeElement = Comb<Tree>;

impl Tree {
    pub fn generator(c: Corolla) -> Tree {
        Tree::Node(c, vec![Tree::Leaf; c.arity()])
    }

    pub fn arity(&self) -> usize {
        match self {
            Tree::Leaf => 1,
            Tree::Node(_, ch) => ch.iter().map(Tree::arity).sum(),
        }
    }

    pub fn degree(&self) -> i64 {
        match self {
            Tree::Leaf => 0,
            Tree::Node(c, ch) => c.generator_degree() + ch.iter().map(Tree::degree).sum::<i64>(),
        }
    }

    /// Vertex corollas in preorder.
    pub fn vertices(&self) -> Vec<Corolla> {
        let mut out = Vec::new();
        fn go(t: &Tree, out: &mut Vec<Corolla>) {
            if let Tree::Node(c, ch) = t {
                out.push(*c);
                ch.iter().for_each(|x| go(x, out));
            }
        }
        go(self, &mut out);
        out
    }

    /// For every leaf, the total degree of the vertices after it in preorder.
    fn degree_after_leaves(&self) -> Vec<i64> {
        let total = self.degree();
        let mut out = Vec::new();
        fn go(t: &Tree, seen: &mut i64, total: i64, out: &mut Vec<i64>) {
            match t {
                Tree::Leaf => out.push(total - *seen),
                Tree::Node(c, ch) => {
                    *seen += c.generator_degree();
                    ch.iter().for_each(|x| go(x, seen, total, out));
                }
            }
        }
        go(self, &mut 0, total, &mut out);
        out
    }

    fn fill(&self, children: &mut std::vec::IntoIter<Tree>) -> Tree {
        match self {
            Tree::Leaf => children.next().expect("enough subtrees"),
            Tree::Node(c, ch) => Tree::Node(*c, ch.iter().map(|x| x.fill(children)).collect()),
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf => f.write_str("|"),
            Tree::Node(c, ch) => {
                write!(f, "{c}")?;
                if !ch.is_empty() {
                    f.write_char('(')?;
                    for (i, x) in ch.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{x}")?;
                    }
                    f.write_char(')')?;
                }
                Ok(())
            }
        }
    }
}

/// `γ(x; t_1, …, t_k)` with its Koszul sign.
pub fn compose(x: &Tree, children: Vec<Tree>) -> (Rational, Tree) {
    assert_eq!(children.len(), x.arity(), "one subtree per leaf");
    let after = x.degree_after_leaves();
    let e: i64 = children.iter().zip(&after).map(|(t, a)| t.degree() * a).sum();
    (sign(e), x.fill(&mut children.into_iter()))
}

/// Partial composition `outer ∘_slot inner`.
pub fn graft(outer: &Tree, slot: usize, inner: &Tree) -> Result<FreeElement> {
    let k = outer.arity();
    if slot == 0 || slot > k {
        return Err(Error::Bound(format!("slot {slot} outside 1..={k}")));
    }
    let children: Vec<Tree> = (1..=k).map(|i| if i == slot { inner.clone() } else { Tree::Leaf }).collect();
    let (s, t) = compose(outer, children);
    Ok(Comb::single(t, s))
}

pub fn graft_elements(outer: &FreeElement, slot: usize, inner: &FreeElement) -> Result<FreeElement> {
    let mut out = Comb::new();
    for (a, x) in outer {
        for (b, y) in inner {
            out.add_scaled(&graft(a, slot, b)?, &(x * y));
        }
    }
    Ok(out)
}

/// Which cork-crossing exponent the quadratic part of the differential uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// `|S₂||S″₁|`, matching the coproduct and the morphism equations.
    Consistent,
    /// `|S₂||S′₁|` as printed in the differential of the cobar construction.
    Literal,
    /// A deliberate mutation that drops the cork-crossing sign, for exercising defect reports.
    SignFault,
}

/// `d(μ_n^S)` on a generator.
pub fn differential(g: Corolla, conv: Convention) -> Result<FreeElement> {
    if !g.is_generator() {
        return Err(Error::Invalid(format!("{g} is not a generator")));
    }
    let mut out = Comb::new();
    let theta = curvature(g);
    out.add_term(Tree::Leaf, theta);
    for t in infinitesimal(g, Infinitesimal::Generators) {
        let s1 = t.outer.cork_count();
        let cross = match conv {
            Convention::Consistent => t.inner.cork_count() * t.right_corks(),
            Convention::Literal => t.inner.cork_count() * t.left_corks(),
            Convention::SignFault => 0,
        };
        let e = t.q * (t.r + s1) + cross + t.p + 1;
        let composed = graft(&Tree::generator(t.outer), t.slot(), &Tree::generator(t.inner))?;
        out.add_scaled(&composed, &sign(e as i64));
    }
    Ok(out)
}

/// Caches generator differentials up to an arity bound.
pub struct Differential {
    conv: Convention,
    table: BTreeMap<Corolla, FreeElement>,
}

impl Differential {
    pub fn new(max_n: usize, conv: Convention) -> Self {
        let table = Corolla::generators_up_to(max_n)
            .into_iter()
            .map(|g| (g, differential(g, conv).expect("generator")))
            .collect();
        Differential { conv, table }
    }

    pub fn convention(&self) -> Convention {
        self.conv
    }

    pub fn on_generator(&self, g: Corolla) -> FreeElement {
        match self.table.get(&g) {
            Some(x) => x.clone(),
            None => differential(g, self.conv).expect("generator"),
        }
    }

    fn on_tree(&self, t: &Tree) -> Vec<(Rational, Tree)> {
        let Tree::Node(c, ch) = t else { return vec![] };
        let mut out = Vec::new();
        for (x, k) in &self.on_generator(*c) {
            let (s, tree) = compose(x, ch.clone());
            out.push((k * s, tree));
        }
        let mut prefix = c.generator_degree();
        for (i, child) in ch.iter().enumerate() {
            for (k, replaced) in self.on_tree(child) {
                let mut v = ch.clone();
                v[i] = replaced;
                out.push((k * sign(prefix), Tree::Node(*c, v)));
            }
            prefix += child.degree();
        }
        out
    }

    /// Leibniz extension of the generator differential.
    pub fn extend(&self, x: &FreeElement) -> FreeElement {
        let mut out = Comb::new();
        for (t, k) in x {
            for (s, tree) in self.on_tree(t) {
                out.add_term(tree, k * s);
            }
        }
        out
    }
}

pub fn extend_derivation(x: &FreeElement, conv: Convention) -> FreeElement {
    let max_n = x.keys().flat_map(|t| t.vertices()).map(|c| c.n()).max().unwrap_or(1);
    Differential::new(max_n, conv).extend(x)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DSquaredRow {
    pub generator: Corolla,
    pub defect_terms: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DSquaredReport {
    pub max_arity: usize,
    pub rows: Vec<DSquaredRow>,
}

impl DSquaredReport {
    pub fn defects(&self) -> impl Iterator<Item = &DSquaredRow> {
        self.rows.iter().filter(|r| r.defect_terms > 0)
    }

    pub fn passed(&self) -> bool {
        self.defects().next().is_none()
    }

    /// `n<TAB>S<TAB>status<TAB>defect-term-count` per generator.
    pub fn tsv(&self) -> String {
        let mut s = String::from("n\tS\tstatus\tdefect_terms\n");
        for r in &self.rows {
            let status = if r.defect_terms == 0 { "ok" } else { "defect" };
            let _ = writeln!(s, "{}\t{}\t{}\t{}", r.generator.n(), r.generator.cork_label(), status, r.defect_terms);
        }
        s
    }
}

/// `d²` on every generator with at most `max_arity` drawn leaves.
pub fn check_d_squared(max_arity: usize, conv: Convention) -> DSquaredReport {
    let d = Differential::new(max_arity, conv);
    let rows = Corolla::generators_up_to(max_arity)
        .into_par_iter()
        .map(|g| DSquaredRow { generator: g, defect_terms: d.extend(&d.on_generator(g)).len() })
        .collect();
    DSquaredReport { max_arity, rows }
}

/// Image in `uAs`, one coefficient per arity (each `uAs(k)` is one-dimensional).
pub fn project_to_uas(x: &FreeElement) -> BTreeMap<usize, Rational> {
    let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
    for (t, k) in x {
        let strict = t.vertices().iter().all(|c| *c == Corolla::unit() || (c.n() == 2 && c.cork_count() == 0));
        if strict {
            *out.entry(t.arity()).or_insert_with(crate::rational::zero) += k;
        }
    }
    out.retain(|_, v| *v != crate::rational::zero());
    out
}

/// Quotient by the ideal generated by `μ_n^S` with `n ≥ 2`, `S ≠ ∅`.
pub fn project_to_suainf(x: &FreeElement) -> FreeElement {
    x.iter()
        .filter(|(t, _)| t.vertices().iter().all(|c| c.n() < 2 || c.cork_count() == 0))
        .map(|(t, k)| (t.clone(), k.clone()))
        .collect()
}

pub fn generator_element(c: Corolla) -> FreeElement {
    Comb::single(Tree::generator(c), one())
}
