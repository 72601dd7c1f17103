//! Immutable simple graphs with bitset adjacency rows.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::vertex_set::VertexSet;

/// An undirected simple graph on vertices `0..n`.
///
/// Adjacency is stored as one [`VertexSet`] row per vertex. Rows are kept
/// symmetric and loop-free by every constructor. Optional per-vertex labels
/// record a class index (for multipartite constructions); they carry no
/// structural meaning.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<VertexSet>,
    labels: Option<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![VertexSet::empty(n); n],
            labels: None,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut adj = Vec::with_capacity(n);
        for v in 0..n {
            let mut row = VertexSet::full(n);
            row.remove(v);
            adj.push(row);
        }
        Graph { n, adj, labels: None }
    }

    /// Builds a graph from an edge list. Loops, duplicates and out-of-range
    /// endpoints are rejected.
    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<Self> {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::BadParameter(format!("loop at vertex {u}")));
            }
            if g.adj[u].contains(v) {
                return Err(Error::BadParameter(format!("duplicate edge {u} {v}")));
            }
            g.adj[u].insert(v);
            g.adj[v].insert(u);
        }
        Ok(g)
    }

    /// Complete multipartite graph; vertices are numbered class by class and
    /// labelled with their class index.
    pub fn complete_multipartite(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::BadSizes("no classes given".into()));
        }
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::BadSizes(format!("class {i} has size 0")));
        }
        Ok(Self::multipartite_allowing_empty(sizes))
    }

    /// Like [`Graph::complete_multipartite`] but empty classes are allowed
    /// (they still consume a label index).
    pub(crate) fn multipartite_allowing_empty(sizes: &[usize]) -> Self {
        let n: usize = sizes.iter().sum();
        let mut labels = Vec::with_capacity(n);
        for (c, &s) in sizes.iter().enumerate() {
            labels.extend(std::iter::repeat(c).take(s));
        }
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if labels[u] != labels[v] {
                    g.adj[u].insert(v);
                    g.adj[v].insert(u);
                }
            }
        }
        g.labels = Some(labels);
        g
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::BadParameter(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Vertex classes recovered from labels, in label order.
    pub fn label_classes(&self) -> Option<Vec<VertexSet>> {
        let labels = self.labels.as_ref()?;
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut classes = vec![VertexSet::empty(self.n); k];
        for (v, &c) in labels.iter().enumerate() {
            classes[c].insert(v);
        }
        Some(classes)
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// `|N(v) ∩ a|`.
    #[inline]
    pub fn degree_into(&self, v: usize, a: &VertexSet) -> usize {
        self.adj[v].intersection_len(a)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(VertexSet::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.adj[u].iter().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    pub fn min_degree(&self) -> Result<usize> {
        (0..self.n).map(|v| self.degree(v)).min().ok_or(Error::EmptyGraph)
    }

    pub fn max_degree(&self) -> Result<usize> {
        (0..self.n).map(|v| self.degree(v)).max().ok_or(Error::EmptyGraph)
    }

    /// Number of edges with both ends in `a`.
    pub fn edges_within(&self, a: &VertexSet) -> usize {
        a.iter().map(|v| self.adj[v].intersection_len(a)).sum::<usize>() / 2
    }

    /// Number of edges with one end in `a` and one in `b` (sets assumed disjoint).
    pub fn edges_between(&self, a: &VertexSet, b: &VertexSet) -> usize {
        a.iter().map(|v| self.adj[v].intersection_len(b)).sum()
    }

    /// `e(G[A]) / C(|A|, 2)`.
    pub fn density_within(&self, a: &VertexSet) -> Result<Rational> {
        let k = a.len();
        if k < 2 {
            return Err(Error::DegenerateSet { needed: 2, got: k });
        }
        let pairs = (k * (k - 1) / 2) as i64;
        Ok(Rational::new(self.edges_within(a) as i64, pairs))
    }

    /// `e(A, B) / (|A| |B|)` for disjoint non-empty `a`, `b`.
    pub fn density_between(&self, a: &VertexSet, b: &VertexSet) -> Result<Rational> {
        if !a.is_disjoint(b) {
            return Err(Error::OverlappingSets);
        }
        if a.is_empty() || b.is_empty() {
            return Err(Error::DegenerateSet {
                needed: 1,
                got: a.len().min(b.len()),
            });
        }
        Ok(Rational::new(
            self.edges_between(a, b) as i64,
            (a.len() * b.len()) as i64,
        ))
    }

    /// The subgraph induced by `a`. New vertex `i` is the `i`-th smallest
    /// member of `a`, so `a.to_vec()` is the map back to the parent.
    pub fn induced(&self, a: &VertexSet) -> Result<Graph> {
        if a.is_empty() {
            return Err(Error::DegenerateSet { needed: 1, got: 0 });
        }
        let map = a.to_vec();
        let k = map.len();
        let mut g = Graph::empty(k);
        for (i, &u) in map.iter().enumerate() {
            for (j, &v) in map.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.adj[i].insert(j);
                    g.adj[j].insert(i);
                }
            }
        }
        if let Some(labels) = &self.labels {
            g.labels = Some(map.iter().map(|&v| labels[v]).collect());
        }
        Ok(g)
    }

    /// Relabels vertices: vertex `v` of `self` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::BadParameter("permutation length mismatch".into()));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::BadParameter("not a permutation".into()));
            }
        }
        let mut g = Graph::from_edges(self.n, self.edges().map(|(u, v)| (perm[u], perm[v])))?;
        if let Some(labels) = &self.labels {
            let mut l = vec![0; self.n];
            for (v, &c) in labels.iter().enumerate() {
                l[perm[v]] = c;
            }
            g.labels = Some(l);
        }
        Ok(g)
    }

    /// Returns a copy with the extra edges added (existing edges are ignored).
    pub fn with_edges_added<I: IntoIterator<Item = (usize, usize)>>(&self, extra: I) -> Result<Graph> {
        let mut g = self.clone();
        for (u, v) in extra {
            for w in [u, v] {
                if w >= self.n {
                    return Err(Error::VertexOutOfRange { vertex: w, n: self.n });
                }
            }
            if u != v {
                g.adj[u].insert(v);
                g.adj[v].insert(u);
            }
        }
        Ok(g)
    }

    /// Returns a copy with the given edges removed (absent edges are ignored).
    pub fn with_edges_removed<I: IntoIterator<Item = (usize, usize)>>(&self, gone: I) -> Result<Graph> {
        let mut g = self.clone();
        for (u, v) in gone {
            for w in [u, v] {
                if w >= self.n {
                    return Err(Error::VertexOutOfRange { vertex: w, n: self.n });
                }
            }
            g.adj[u].remove(v);
            g.adj[v].remove(u);
        }
        Ok(g)
    }

    /// Vertex-disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let n = self.n + other.n;
        let edges = self
            .edges()
            .chain(other.edges().map(|(u, v)| (u + self.n, v + self.n)));
        Graph::from_edges(n, edges).expect("disjoint union of simple graphs is simple")
    }

    /// Connected component orders.
    pub fn component_orders(&self) -> Vec<usize> {
        let mut seen = VertexSet::empty(self.n);
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen.contains(s) {
                continue;
            }
            let mut frontier = vec![s];
            seen.insert(s);
            let mut size = 0;
            while let Some(v) = frontier.pop() {
                size += 1;
                for w in self.adj[v].difference(&seen).iter() {
                    seen.insert(w);
                    frontier.push(w);
                }
            }
            out.push(size);
        }
        out
    }

    /// Checks the structural invariants: symmetric, loop-free rows sized `n`.
    pub fn check_invariants(&self) -> bool {
        self.adj.len() == self.n
            && (0..self.n).all(|u| {
                self.adj[u].host_n() == self.n
                    && !self.adj[u].contains(u)
                    && self.adj[u].iter().all(|v| self.adj[v].contains(u))
            })
    }
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n, self.edge_count())
    }
}

/// Ordered disjoint vertex classes over a host graph. The classes need not
/// cover the host; the remainder is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    classes: Vec<VertexSet>,
    #[serde(skip)]
    host_n: usize,
}

impl Partition {
    pub fn new(host_n: usize, classes: Vec<VertexSet>) -> Result<Self> {
        let mut seen = VertexSet::empty(host_n);
        for c in &classes {
            if c.host_n() != host_n {
                return Err(Error::BadParameter("class over a different host".into()));
            }
            if !c.is_disjoint(&seen) {
                return Err(Error::OverlappingSets);
            }
            seen.union_with(c);
        }
        Ok(Partition { classes, host_n })
    }

    pub fn from_lists(host_n: usize, lists: &[Vec<usize>]) -> Result<Self> {
        let classes = lists
            .iter()
            .map(|l| VertexSet::from_vertices(host_n, l.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(host_n, classes)
    }

    pub fn host_n(&self) -> usize {
        self.host_n
    }

    pub fn classes(&self) -> &[VertexSet] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class(&self, i: usize) -> &VertexSet {
        &self.classes[i]
    }

    pub fn covered(&self) -> VertexSet {
        let mut s = VertexSet::empty(self.host_n);
        for c in &self.classes {
            s.union_with(c);
        }
        s
    }

    pub fn covers_host(&self) -> bool {
        self.covered().len() == self.host_n
    }

    pub fn class_of(&self, v: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(v))
    }

    pub fn to_lists(&self) -> Vec<Vec<usize>> {
        self.classes.iter().map(VertexSet::to_vec).collect()
    }

    pub fn into_classes(self) -> Vec<VertexSet> {
        self.classes
    }
}
