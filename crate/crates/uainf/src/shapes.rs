//! Corked corollas `μ_n^S` and the corked planar trees indexing the transfer formulae.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of drawn leaves supported by the cork bitmask.
pub const MAX_LEAVES: usize = 31;

/// The corolla `μ_n^S`: `n` drawn leaves with corks on the positions in `S ⊆ {1..n}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Corolla {
    n: u8,
    corks: u32,
}

impl Corolla {
    pub fn new(n: usize, corks: &[usize]) -> Result<Self> {
        if n == 0 || n > MAX_LEAVES {
            return Err(Error::Invalid(format!("corolla needs 1..={MAX_LEAVES} leaves, got {n}")));
        }
        let mut mask = 0u32;
        for &s in corks {
            if s == 0 || s > n {
                return Err(Error::Invalid(format!("cork position {s} outside 1..={n}")));
            }
            mask |= 1 << (s - 1);
        }
        Ok(Corolla { n: n as u8, corks: mask })
    }

    pub fn from_mask(n: usize, corks: u32) -> Self {
        debug_assert!(n >= 1 && n <= MAX_LEAVES && (corks >> n) == 0);
        Corolla { n: n as u8, corks }
    }

    /// The identity `|`.
    pub fn identity() -> Self {
        Corolla { n: 1, corks: 0 }
    }

    /// The corked edge `μ_1^{{1}}`.
    pub fn unit() -> Self {
        Corolla { n: 1, corks: 1 }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn mask(&self) -> u32 {
        self.corks
    }

    pub fn cork_count(&self) -> usize {
        self.corks.count_ones() as usize
    }

    pub fn corks(&self) -> Vec<usize> {
        (1..=self.n()).filter(|&i| self.is_corked(i)).collect()
    }

    pub fn is_corked(&self, pos: usize) -> bool {
        pos >= 1 && pos <= self.n() && self.corks & (1 << (pos - 1)) != 0
    }

    /// Number of inputs `n − |S|`.
    pub fn arity(&self) -> usize {
        self.n() - self.cork_count()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Degree in the cooperad: `n − 1 + |S|`.
    pub fn cooperad_degree(&self) -> i64 {
        self.n() as i64 - 1 + self.cork_count() as i64
    }

    /// Degree of the generator of `uA∞` (and of the structure map): `n + |S| − 2`.
    pub fn generator_degree(&self) -> i64 {
        self.cooperad_degree() - 1
    }

    /// Generators of `uA∞`: `n ≥ 2`, or the corked edge.
    pub fn is_generator(&self) -> bool {
        self.n() >= 2 || *self == Self::unit()
    }

    /// All `2^n` corollas with `n` drawn leaves, in canonical order.
    pub fn all_with(n: usize) -> Vec<Corolla> {
        let mut v: Vec<Corolla> = (0..(1u32 << n)).map(|m| Corolla::from_mask(n, m)).collect();
        v.sort();
        v
    }

    /// Every corolla with at most `max_n` leaves, the identity included.
    pub fn all_up_to(max_n: usize) -> Vec<Corolla> {
        (1..=max_n).flat_map(Corolla::all_with).collect()
    }

    /// Generators `μ_n^S` with `n ≤ max_n`, canonical order.
    pub fn generators_up_to(max_n: usize) -> Vec<Corolla> {
        Self::all_up_to(max_n).into_iter().filter(|c| c.is_generator()).collect()
    }

    /// The cork set formatted as `{1,4}`.
    pub fn cork_label(&self) -> String {
        let parts: Vec<String> = self.corks().iter().map(|c| c.to_string()).collect();
        format!("{{{}}}", parts.join(","))
    }
}

impl Ord for Corolla {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| self.corks().cmp(&other.corks()))
    }
}

impl PartialOrd for Corolla {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Corolla {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "μ{}^{}", self.n, self.cork_label())
    }
}

impl fmt::Display for Corolla {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CorkKind {
    Connected,
    Disconnected,
}

/// A planar rooted tree with internal vertices of arity ≥ 2 whose leaves may carry
/// connected or disconnected corks. The corked edge `Cork(Connected)` on its own is
/// the unique element of `𝒯_1^{{1}}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CorkedTree {
    Leaf,
    Cork(CorkKind),
    Vertex(Vec<CorkedTree>),
}

impl CorkedTree {
    pub fn leaf_count(&self) -> usize {
        match self {
            CorkedTree::Leaf | CorkedTree::Cork(_) => 1,
            CorkedTree::Vertex(ch) => ch.iter().map(CorkedTree::leaf_count).sum(),
        }
    }

    /// Leaves that do not carry a connected cork.
    pub fn open_leaf_count(&self) -> usize {
        match self {
            CorkedTree::Leaf | CorkedTree::Cork(CorkKind::Disconnected) => 1,
            CorkedTree::Cork(CorkKind::Connected) => 0,
            CorkedTree::Vertex(ch) => ch.iter().map(CorkedTree::open_leaf_count).sum(),
        }
    }

    /// Number of inputs of the evaluated operation (uncorked leaves).
    pub fn arity(&self) -> usize {
        match self {
            CorkedTree::Leaf => 1,
            CorkedTree::Cork(_) => 0,
            CorkedTree::Vertex(ch) => ch.iter().map(CorkedTree::arity).sum(),
        }
    }

    /// The corolla `(n, S)` this tree is indexed by.
    pub fn corolla(&self) -> Corolla {
        let mut corks = Vec::new();
        let mut pos = 0;
        self.walk_leaves(&mut |t| {
            pos += 1;
            if matches!(t, CorkedTree::Cork(_)) {
                corks.push(pos);
            }
        });
        Corolla::new(pos, &corks).expect("tree leaves fit a corolla")
    }

    fn walk_leaves(&self, f: &mut impl FnMut(&CorkedTree)) {
        match self {
            CorkedTree::Vertex(ch) => ch.iter().for_each(|c| c.walk_leaves(f)),
            leaf => f(leaf),
        }
    }

    /// Cork labels in leaf order (`true` = disconnected).
    pub fn cork_bits(&self) -> Vec<bool> {
        let mut out = Vec::new();
        self.walk_leaves(&mut |t| {
            if let CorkedTree::Cork(k) = t {
                out.push(*k == CorkKind::Disconnected);
            }
        });
        out
    }

    /// Depth-first, left-to-right arity sequence (leaves and corks count as 0).
    pub fn shape_code(&self) -> Vec<usize> {
        let mut out = Vec::new();
        fn go(t: &CorkedTree, out: &mut Vec<usize>) {
            match t {
                CorkedTree::Vertex(ch) => {
                    out.push(ch.len());
                    ch.iter().for_each(|c| go(c, out));
                }
                _ => out.push(0),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.shape_code().cmp(&other.shape_code()).then_with(|| self.cork_bits().cmp(&other.cork_bits()))
    }

    /// Internal vertices in preorder, each given by its path of child indices.
    pub fn vertex_paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        fn go(t: &CorkedTree, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if let CorkedTree::Vertex(ch) = t {
                out.push(path.clone());
                for (i, c) in ch.iter().enumerate() {
                    path.push(i);
                    go(c, path, out);
                    path.pop();
                }
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn subtree(&self, path: &[usize]) -> Option<&CorkedTree> {
        let mut t = self;
        for &i in path {
            match t {
                CorkedTree::Vertex(ch) => t = ch.get(i)?,
                _ => return None,
            }
        }
        Some(t)
    }

    pub fn internal_vertex_count(&self) -> usize {
        self.vertex_paths().len()
    }

    /// The corolla `μ_{|in(v)|}^{S(v)}` sitting at a vertex: corks at its connected-cork inputs.
    pub fn vertex_corolla(children: &[CorkedTree]) -> Corolla {
        let corks: Vec<usize> = children
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c, CorkedTree::Cork(CorkKind::Connected)))
            .map(|(i, _)| i + 1)
            .collect();
        Corolla::new(children.len(), &corks).expect("vertex arity within bounds")
    }
}

impl fmt::Display for CorkedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}

fn shapes(n: usize) -> Vec<CorkedTree> {
    let mut out = Vec::new();
    if n == 1 {
        out.push(CorkedTree::Leaf);
        return out;
    }
    // compositions of n into k ≥ 2 parts
    fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 1 {
            return vec![vec![n]];
        }
        let mut out = Vec::new();
        for first in 1..=n - (k - 1) {
            for mut rest in compositions(n - first, k - 1) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    for k in 2..=n {
        for comp in compositions(n, k) {
            let mut acc: Vec<Vec<CorkedTree>> = vec![vec![]];
            for &part in &comp {
                let subs = shapes(part);
                acc = acc
                    .into_iter()
                    .flat_map(|prefix| {
                        subs.iter().map(move |s| {
                            let mut p = prefix.clone();
                            p.push(s.clone());
                            p
                        })
                    })
                    .collect();
            }
            out.extend(acc.into_iter().map(CorkedTree::Vertex));
        }
    }
    out
}

fn decorate(t: &CorkedTree, labels: &[Option<CorkKind>], pos: &mut usize) -> CorkedTree {
    match t {
        CorkedTree::Vertex(ch) => CorkedTree::Vertex(ch.iter().map(|c| decorate(c, labels, pos)).collect()),
        _ => {
            let l = labels[*pos];
            *pos += 1;
            match l {
                None => CorkedTree::Leaf,
                Some(k) => CorkedTree::Cork(k),
            }
        }
    }
}

/// The tree set `𝒯_n^S` in canonical order.
pub fn enumerate_trees(c: Corolla) -> Vec<CorkedTree> {
    let n = c.n();
    if c == Corolla::unit() {
        return vec![CorkedTree::Cork(CorkKind::Connected)];
    }
    let corks = c.corks();
    let mut out = Vec::new();
    for shape in shapes(n) {
        for bits in 0..(1u32 << corks.len()) {
            let mut labels = vec![None; n];
            for (j, &s) in corks.iter().enumerate() {
                labels[s - 1] = Some(if bits & (1 << j) != 0 { CorkKind::Disconnected } else { CorkKind::Connected });
            }
            out.push(decorate(&shape, &labels, &mut 0));
        }
    }
    out.sort_by(|a, b| a.canonical_cmp(b));
    out
}

/// `(l, c)` for the incoming edge `edge` (0-based) of the vertex at `vertex`.
pub fn leaf_stats(t: &CorkedTree, vertex: &[usize], edge: usize) -> Result<(usize, usize)> {
    let Some(CorkedTree::Vertex(ch)) = t.subtree(vertex) else {
        return Err(Error::Invalid("path does not name an internal vertex".into()));
    };
    if edge >= ch.len() {
        return Err(Error::Invalid(format!("vertex has no incoming edge {edge}")));
    }
    let l = ch[edge].open_leaf_count();
    let c = ch[edge + 1..].iter().filter(|x| !matches!(x, CorkedTree::Cork(CorkKind::Connected))).count();
    Ok((l, c))
}

/// `ε(T) = Σ_v [Σ_{i<j} (l_i + 1) l_j + Σ_{connected corks i} c_i] mod 2`.
pub fn epsilon(t: &CorkedTree) -> u8 {
    let mut total = 0usize;
    for path in t.vertex_paths() {
        let Some(CorkedTree::Vertex(ch)) = t.subtree(&path) else { unreachable!() };
        let ls: Vec<usize> = ch.iter().map(CorkedTree::open_leaf_count).collect();
        for j in 0..ls.len() {
            for i in 0..j {
                total += (ls[i] + 1) * ls[j];
            }
        }
        for (i, c) in ch.iter().enumerate() {
            if matches!(c, CorkedTree::Cork(CorkKind::Connected)) {
                total += leaf_stats(t, &path, i).unwrap().1;
            }
        }
    }
    (total % 2) as u8
}

/// Canonical text form, e.g. `((1*c 2) 3 (4*d 5))`.
pub fn serialize(t: &CorkedTree) -> String {
    fn go(t: &CorkedTree, pos: &mut usize, out: &mut String) {
        match t {
            CorkedTree::Vertex(ch) => {
                out.push('(');
                for (i, c) in ch.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    go(c, pos, out);
                }
                out.push(')');
            }
            CorkedTree::Leaf => {
                *pos += 1;
                out.push_str(&pos.to_string());
            }
            CorkedTree::Cork(k) => {
                *pos += 1;
                out.push_str(&pos.to_string());
                out.push_str(if *k == CorkKind::Connected { "*c" } else { "*d" });
            }
        }
    }
    let mut s = String::new();
    go(t, &mut 0, &mut s);
    s
}

/// Parses the canonical text form. Leaves must be numbered `1..n` left to right and
/// every internal vertex must have at least two inputs.
pub fn parse_tree(input: &str) -> Result<CorkedTree> {
    struct P<'a> {
        s: &'a [u8],
        i: usize,
        next_leaf: usize,
        depth: usize,
    }
    impl P<'_> {
        fn err(&self, msg: &str) -> Error {
            Error::Parse(format!("tree: {msg} at byte {}", self.i))
        }
        fn skip_ws(&mut self) {
            while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
                self.i += 1;
            }
        }
        fn node(&mut self) -> Result<CorkedTree> {
            self.skip_ws();
            match self.s.get(self.i) {
                Some(b'(') => {
                    self.depth += 1;
                    if self.depth > MAX_LEAVES {
                        return Err(self.err("nesting too deep"));
                    }
                    self.i += 1;
                    let mut ch = Vec::new();
                    loop {
                        self.skip_ws();
                        if self.s.get(self.i) == Some(&b')') {
                            self.i += 1;
                            break;
                        }
                        if self.i >= self.s.len() {
                            return Err(self.err("unclosed parenthesis"));
                        }
                        ch.push(self.node()?);
                    }
                    self.depth -= 1;
                    if ch.len() < 2 {
                        return Err(self.err("internal vertex with fewer than two inputs"));
                    }
                    Ok(CorkedTree::Vertex(ch))
                }
                Some(b) if b.is_ascii_digit() => {
                    let start = self.i;
                    while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                        self.i += 1;
                    }
                    let txt = std::str::from_utf8(&self.s[start..self.i]).unwrap();
                    let v: usize = txt.parse().map_err(|_| self.err("bad leaf index"))?;
                    self.next_leaf += 1;
                    if v != self.next_leaf || v > MAX_LEAVES {
                        return Err(self.err("leaves must be numbered 1..n from left to right"));
                    }
                    if self.s.get(self.i) == Some(&b'*') {
                        let kind = match self.s.get(self.i + 1) {
                            Some(b'c') => CorkKind::Connected,
                            Some(b'd') => CorkKind::Disconnected,
                            _ => return Err(self.err("cork marker must be *c or *d")),
                        };
                        self.i += 2;
                        Ok(CorkedTree::Cork(kind))
                    } else {
                        Ok(CorkedTree::Leaf)
                    }
                }
                _ => Err(self.err("expected '(' or a leaf index")),
            }
        }
    }
    let mut p = P { s: input.as_bytes(), i: 0, next_leaf: 0, depth: 0 };
    let t = p.node()?;
    p.skip_ws();
    if p.i != p.s.len() {
        return Err(p.err("trailing input"));
    }
    if t == CorkedTree::Cork(CorkKind::Disconnected) {
        return Err(Error::Parse("tree: a lone corked edge is connected".into()));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: usize, s: &[usize]) -> Corolla {
        Corolla::new(n, s).unwrap()
    }

    #[test]
    fn corolla_degrees() {
        assert_eq!(c(1, &[]).cooperad_degree(), 0);
        assert_eq!(c(1, &[1]).cooperad_degree(), 1);
        assert_eq!(c(5, &[1, 4]).cooperad_degree(), 6);
        assert_eq!(c(5, &[1, 4]).generator_degree(), 5);
        assert_eq!(c(5, &[1, 4]).arity(), 3);
        assert!(!Corolla::identity().is_generator());
        assert!(Corolla::unit().is_generator());
        assert!(Corolla::new(2, &[3]).is_err());
        assert!(Corolla::new(0, &[]).is_err());
    }

    #[test]
    fn canonical_corolla_order_is_lexicographic_in_s() {
        let all = Corolla::all_with(3);
        let labels: Vec<String> = all.iter().map(|c| c.cork_label()).collect();
        assert_eq!(labels, ["{}", "{1}", "{1,2}", "{1,2,3}", "{1,3}", "{2}", "{2,3}", "{3}"]);
        assert_eq!(Corolla::generators_up_to(6).len(), 4 + 8 + 16 + 32 + 64 + 1);
    }

    #[test]
    fn small_tree_sets() {
        assert_eq!(enumerate_trees(c(1, &[1])), vec![CorkedTree::Cork(CorkKind::Connected)]);
        assert_eq!(enumerate_trees(c(1, &[])), vec![CorkedTree::Leaf]);
        assert_eq!(enumerate_trees(c(2, &[])).len(), 1);
        assert_eq!(enumerate_trees(c(3, &[])).len(), 3);
        assert_eq!(enumerate_trees(c(3, &[2])).len(), 6);
    }

    #[test]
    fn schroeder_counts() {
        // little Schröder numbers: planar trees, internal arity ≥ 2
        let expected = [1usize, 1, 3, 11, 45, 197];
        for n in 1..=6 {
            assert_eq!(enumerate_trees(c(n, &[])).len(), expected[n - 1], "n = {n}");
        }
    }

    #[test]
    fn epsilon_examples() {
        for n in 2..=6 {
            let corolla = CorkedTree::Vertex(vec![CorkedTree::Leaf; n]);
            assert_eq!(epsilon(&corolla), 0);
        }
        let t = parse_tree("(1*c 2)").unwrap();
        assert_eq!(epsilon(&t), 0);
        assert_eq!(leaf_stats(&t, &[], 0).unwrap(), (0, 1));
        assert_eq!(leaf_stats(&t, &[], 1).unwrap(), (1, 0));
        assert!(leaf_stats(&t, &[], 2).is_err());
        assert!(leaf_stats(&t, &[0], 0).is_err());
    }

    #[test]
    fn serialization_examples() {
        let t = parse_tree("((1*c 2) 3 (4*d 5))").unwrap();
        assert_eq!(serialize(&t), "((1*c 2) 3 (4*d 5))");
        assert_eq!(t.corolla(), c(5, &[1, 4]));
        assert_eq!(t.arity(), 3);
        for bad in ["", "(1)", "(1 3)", "(2 1)", "((1 2)", "(1 2))", "(1*x 2)", "1*d", "(1 2) 3", "(1 2 a)"] {
            assert!(parse_tree(bad).is_err(), "{bad:?}");
        }
        assert_eq!(parse_tree("1*c").unwrap(), CorkedTree::Cork(CorkKind::Connected));
    }

    #[test]
    fn trees_are_sorted_and_distinct() {
        for n in 1..=4 {
            for cor in Corolla::all_with(n) {
                let ts = enumerate_trees(cor);
                for w in ts.windows(2) {
                    assert_eq!(w[0].canonical_cmp(&w[1]), Ordering::Less);
                }
                assert!(ts.iter().all(|t| t.corolla() == cor));
            }
        }
    }
}
