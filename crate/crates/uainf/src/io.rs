//! JSON file formats for algebras, bimodules, structures and ∞-morphisms.
//!
//! Coefficients are exact rationals written as strings (`"3"`, `"-1/2"`). Linear
//! combinations are lists of `[basis name, coefficient]` pairs in basis order.
//! Operations and components are listed by `n`, then cork list, then input tuple.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{Bimodule, UnitalDga};
use crate::comb::Comb;
use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::multilinear::MultilinearMap;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::shapes::Corolla;
use crate::structures::{InfinityMorphism, UAInfStructure};

pub type Terms = Vec<(String, String)>;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub name: String,
    pub degree: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct DifferentialEntry {
    pub of: String,
    pub terms: Terms,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ComplexFile {
    pub basis: Vec<BasisEntry>,
    #[serde(default)]
    pub differential: Vec<DifferentialEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ProductEntry {
    pub left: String,
    pub right: String,
    pub terms: Terms,
}

/// Products involving the unit may be omitted; they are filled in as `1·a = a·1 = a`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub basis: Vec<BasisEntry>,
    #[serde(default)]
    pub differential: Vec<DifferentialEntry>,
    pub unit: String,
    #[serde(default)]
    pub product: Vec<ProductEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    pub algebra: String,
    pub module: String,
    pub terms: Terms,
}

/// Unit actions may be omitted.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct BimoduleFile {
    pub basis: Vec<String>,
    #[serde(default)]
    pub left: Vec<ActionEntry>,
    #[serde(default)]
    pub right: Vec<ActionEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub inputs: Vec<String>,
    pub terms: Terms,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct OperationEntry {
    pub n: usize,
    pub corks: Vec<usize>,
    pub degree: i64,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub carrier: ComplexFile,
    pub bound: usize,
    pub operations: Vec<OperationEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct MorphismFile {
    pub source: StructureFile,
    pub target: StructureFile,
    pub bound: usize,
    pub components: Vec<OperationEntry>,
}

fn index(c: &ChainComplex, name: &str) -> Result<usize> {
    c.index_of(name).ok_or_else(|| Error::Parse(format!("unknown basis name {name:?}")))
}

fn parse_terms(c: &ChainComplex, terms: &Terms) -> Result<Comb<usize>> {
    let mut out = Comb::new();
    for (name, q) in terms {
        out.add_term(index(c, name)?, parse_rational(q)?);
    }
    Ok(out)
}

fn write_terms(c: &ChainComplex, x: &Comb<usize>) -> Terms {
    x.iter().map(|(i, q)| (c.name(*i).to_string(), format_rational(q))).collect()
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn to_json<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("serializable");
    s.push('\n');
    s
}

fn build_complex(basis: &[BasisEntry], differential: &[DifferentialEntry]) -> Result<ChainComplex> {
    let b: Vec<(String, i64)> = basis.iter().map(|e| (e.name.clone(), e.degree)).collect();
    let mut d: Vec<(String, String, Rational)> = Vec::new();
    for entry in differential {
        for (t, q) in &entry.terms {
            d.push((entry.of.clone(), t.clone(), parse_rational(q)?));
        }
    }
    ChainComplex::new(b, &d).map_err(|e| match e {
        Error::Invalid(m) => Error::Parse(m),
        other => other,
    })
}

fn complex_file(c: &ChainComplex) -> ComplexFile {
    let basis = (0..c.dim()).map(|i| BasisEntry { name: c.name(i).to_string(), degree: c.degree(i) }).collect();
    let differential = (0..c.dim())
        .filter(|&i| !c.d(i).is_zero())
        .map(|i| DifferentialEntry { of: c.name(i).to_string(), terms: write_terms(c, c.d(i)) })
        .collect();
    ComplexFile { basis, differential }
}

pub fn parse_complex(text: &str) -> Result<ChainComplex> {
    let f: ComplexFile = from_json(text)?;
    build_complex(&f.basis, &f.differential)
}

pub fn parse_algebra(text: &str) -> Result<UnitalDga> {
    algebra_from_file(&from_json(text)?)
}

pub fn algebra_from_file(f: &AlgebraFile) -> Result<UnitalDga> {
    let c = Arc::new(build_complex(&f.basis, &f.differential)?);
    let unit = index(&c, &f.unit)?;
    let mut table: BTreeMap<Vec<usize>, Comb<usize>> = BTreeMap::new();
    for e in &f.product {
        let key = vec![index(&c, &e.left)?, index(&c, &e.right)?];
        if table.insert(key, parse_terms(&c, &e.terms)?).is_some() {
            return Err(Error::Parse(format!("duplicate product entry {} * {}", e.left, e.right)));
        }
    }
    for a in 0..c.dim() {
        table.entry(vec![unit, a]).or_insert_with(|| Comb::basis(a));
        table.entry(vec![a, unit]).or_insert_with(|| Comb::basis(a));
    }
    let mut product = MultilinearMap::zero(c.clone(), c.clone(), 2, 0);
    for (k, v) in table {
        product.set(k, v).map_err(|e| Error::Parse(format!("product: {e}")))?;
    }
    UnitalDga::new(c, &f.unit, product)
}

pub fn algebra_file(p: &UnitalDga) -> AlgebraFile {
    let c = &p.complex;
    let cf = complex_file(c);
    let product = p
        .product
        .entries()
        .iter()
        .filter(|(k, _)| k[0] != p.unit && k[1] != p.unit)
        .map(|(k, v)| ProductEntry { left: c.name(k[0]).into(), right: c.name(k[1]).into(), terms: write_terms(c, v) })
        .collect();
    AlgebraFile { basis: cf.basis, differential: cf.differential, unit: p.unit_name().into(), product }
}

pub fn write_algebra(p: &UnitalDga) -> String {
    to_json(&algebra_file(p))
}

pub fn parse_bimodule(text: &str, alg: &UnitalDga) -> Result<Bimodule> {
    let f: BimoduleFile = from_json(text)?;
    let module = Arc::new(
        ChainComplex::graded(f.basis.iter().map(|n| (n.clone(), 0)).collect()).map_err(|e| Error::Parse(e.to_string()))?,
    );
    let (n, k) = (alg.complex.dim(), module.dim());
    let mut left = vec![vec![Comb::new(); k]; n];
    let mut right = vec![vec![Comb::new(); n]; k];
    for m in 0..k {
        left[alg.unit][m] = Comb::basis(m);
        right[m][alg.unit] = Comb::basis(m);
    }
    for e in &f.left {
        left[index(&alg.complex, &e.algebra)?][index(&module, &e.module)?] = parse_terms(&module, &e.terms)?;
    }
    for e in &f.right {
        right[index(&module, &e.module)?][index(&alg.complex, &e.algebra)?] = parse_terms(&module, &e.terms)?;
    }
    let b = Bimodule { module, left, right };
    b.validate(alg)?;
    Ok(b)
}

pub fn write_bimodule(b: &Bimodule, alg: &UnitalDga) -> String {
    let (a, m) = (&alg.complex, &b.module);
    let mut f = BimoduleFile { basis: m.names().to_vec(), left: vec![], right: vec![] };
    for x in (0..a.dim()).filter(|&x| x != alg.unit) {
        for y in 0..m.dim() {
            if !b.left[x][y].is_zero() {
                f.left.push(ActionEntry { algebra: a.name(x).into(), module: m.name(y).into(), terms: write_terms(m, &b.left[x][y]) });
            }
            if !b.right[y][x].is_zero() {
                f.right.push(ActionEntry { algebra: a.name(x).into(), module: m.name(y).into(), terms: write_terms(m, &b.right[y][x]) });
            }
        }
    }
    f.right.sort_by(|p, q| (index(m, &p.module).ok(), index(a, &p.algebra).ok()).cmp(&(index(m, &q.module).ok(), index(a, &q.algebra).ok())));
    to_json(&f)
}

fn operation_entries<'a>(
    maps: impl Iterator<Item = (&'a Corolla, &'a MultilinearMap)>,
    source: &ChainComplex,
    target: &ChainComplex,
) -> Vec<OperationEntry> {
    let mut out: Vec<OperationEntry> = maps
        .filter(|(_, m)| !m.is_zero())
        .map(|(c, m)| OperationEntry {
            n: c.n(),
            corks: c.corks(),
            degree: m.degree(),
            entries: m
                .entries()
                .iter()
                .map(|(k, v)| Entry { inputs: k.iter().map(|&i| source.name(i).to_string()).collect(), terms: write_terms(target, v) })
                .collect(),
        })
        .collect();
    out.sort_by(|a, b| (a.n, &a.corks).cmp(&(b.n, &b.corks)));
    out
}

fn fill(
    ops: &[OperationEntry],
    source: &Arc<ChainComplex>,
    target: &Arc<ChainComplex>,
    degree_of: impl Fn(Corolla) -> i64,
    mut set: impl FnMut(Corolla, MultilinearMap) -> Result<()>,
) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for op in ops {
        let c = Corolla::new(op.n, &op.corks).map_err(|e| Error::Parse(e.to_string()))?;
        if c.corks() != op.corks {
            return Err(Error::Parse(format!("cork list of {c} must be sorted without repeats")));
        }
        if !seen.insert(c) {
            return Err(Error::Parse(format!("duplicate entry for {c}")));
        }
        if op.degree != degree_of(c) {
            return Err(Error::Parse(format!("{c} must have degree {}, file says {}", degree_of(c), op.degree)));
        }
        let mut m = MultilinearMap::zero(source.clone(), target.clone(), c.arity(), op.degree);
        for e in &op.entries {
            let inputs = e.inputs.iter().map(|n| index(source, n)).collect::<Result<Vec<_>>>()?;
            m.set(inputs, parse_terms(target, &e.terms)?).map_err(|err| Error::Parse(format!("{c}: {err}")))?;
        }
        set(c, m).map_err(|err| Error::Parse(err.to_string()))?;
    }
    Ok(())
}

pub fn structure_from_file(f: &StructureFile) -> Result<UAInfStructure> {
    let c = Arc::new(build_complex(&f.carrier.basis, &f.carrier.differential)?);
    if f.bound == 0 {
        return Err(Error::Parse("bound must be at least 1".into()));
    }
    let mut s = UAInfStructure::zero(c.clone(), f.bound);
    fill(&f.operations, &c, &c, |g| g.generator_degree(), |g, m| s.set(g, m))?;
    Ok(s)
}

pub fn structure_file(s: &UAInfStructure) -> StructureFile {
    let c = s.carrier();
    StructureFile { carrier: complex_file(c), bound: s.bound(), operations: operation_entries(s.maps(), c, c) }
}

pub fn parse_structure(text: &str) -> Result<UAInfStructure> {
    structure_from_file(&from_json(text)?)
}

pub fn write_structure(s: &UAInfStructure) -> String {
    to_json(&structure_file(s))
}

pub fn parse_morphism(text: &str) -> Result<InfinityMorphism> {
    let f: MorphismFile = from_json(text)?;
    let source = Arc::new(structure_from_file(&f.source)?);
    let target = Arc::new(structure_from_file(&f.target)?);
    if f.bound == 0 {
        return Err(Error::Parse("bound must be at least 1".into()));
    }
    let (sc, tc) = (source.carrier().clone(), target.carrier().clone());
    let mut m = InfinityMorphism::zero(source, target, f.bound);
    fill(&f.components, &sc, &tc, |c| c.cooperad_degree(), |c, x| m.set(c, x))?;
    Ok(m)
}

pub fn write_morphism(m: &InfinityMorphism) -> String {
    let f = MorphismFile {
        source: structure_file(m.source()),
        target: structure_file(m.target()),
        bound: m.bound(),
        components: operation_entries(m.components(), m.source().carrier(), m.target().carrier()),
    };
    to_json(&f)
}
