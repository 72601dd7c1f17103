//! Deterministic builders for the named graphs of the `K_r^-` packing
//! problem: `K_r^-`, bottle graphs, the two extremal families, canonical
//! graphs `K(q, n)`, the remainder pattern `B₁` and `H_{q,r}`.
//!
//! Builders that come with a minimum-degree identity check it on the
//! constructed graph and fail with [`Error::Internal`] on mismatch.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::invariants::{colouring_profile, critical_from_profile};
use crate::rational::Rational;
use crate::vertex_set::VertexSet;

/// `K_r` minus the edge `{0, 1}`.
pub fn k_r_minus(r: usize) -> Result<Graph> {
    if r < 3 {
        return Err(Error::BadParameter(format!("K_r^- needs r >= 3, got {r}")));
    }
    Graph::complete(r).with_edges_removed([(0, 1)])
}

/// `1 − 1/χ_cr(K_r^-) = 1 − (r−1)/(r(r−2))`.
pub fn kr_minus_threshold(r: usize) -> Rational {
    let r = r as i64;
    Rational::from_integer(1) - Rational::new(r - 1, r * (r - 2))
}

/// `⌈(1 − 1/χ_cr(K_r^-)) n⌉`.
pub fn kr_minus_degree_bound(r: usize, n: usize) -> usize {
    (kr_minus_threshold(r) * Rational::from_integer(n as i64))
        .ceil()
        .to_integer() as usize
}

/// Complete `ℓ`-partite graph with `ℓ−1` classes of size `|H|−σ(H)` and one
/// class of size `(ℓ−1)σ(H)`; the small class comes last.
pub fn bottle_graph(h: &Graph) -> Result<Graph> {
    let p = colouring_profile(h)?;
    if p.chi < 2 {
        return Err(Error::BadParameter("bottle graph needs chromatic number >= 2".into()));
    }
    let mut sizes = vec![h.n() - p.sigma; p.chi - 1];
    sizes.push((p.chi - 1) * p.sigma);
    Graph::complete_multipartite(&sizes)
}

/// Complete `(r−1)`-partite graph on `n = kr` vertices with classes
/// `U₀, …, U_{r−2}`, `|U₀| = k − 1`, the rest split as equally as possible
/// with larger classes first. Label `0` is `U₀` (possibly empty).
pub fn prop3_extremal(r: usize, k: usize) -> Result<Graph> {
    if r < 4 || k < 1 {
        return Err(Error::BadParameter(format!(
            "extremal construction needs r >= 4 and k >= 1, got r={r}, k={k}"
        )));
    }
    let n = k * r;
    let rest = n - (k - 1);
    let parts = r - 2;
    let mut sizes = vec![k - 1];
    sizes.extend((0..parts).map(|i| rest / parts + usize::from(i < rest % parts)));
    let g = Graph::multipartite_allowing_empty(&sizes);
    let expected = kr_minus_degree_bound(r, n) - 1;
    let got = g.min_degree()?;
    if got != expected {
        return Err(Error::Internal(format!(
            "extremal graph (r={r}, k={k}) has minimum degree {got}, expected {expected}"
        )));
    }
    Ok(g)
}

/// Class sizes of a complete multipartite graph, or `None` if `h` is not
/// complete multipartite (non-adjacency must be an equivalence relation).
pub fn multipartite_classes(h: &Graph) -> Option<Vec<VertexSet>> {
    let n = h.n();
    let mut assigned = VertexSet::empty(n);
    let mut classes = Vec::new();
    for v in 0..n {
        if assigned.contains(v) {
            continue;
        }
        let mut class = VertexSet::full(n).difference(h.neighbors(v));
        class.difference_with(&assigned);
        for u in class.iter() {
            let mut non_nbrs = VertexSet::full(n).difference(h.neighbors(u));
            non_nbrs.difference_with(&assigned);
            if non_nbrs != class {
                return None;
            }
        }
        assigned.union_with(&class);
        classes.push(class);
    }
    Some(classes)
}

/// Extremal graph showing the additive constant cannot be dropped for
/// complete `ℓ`-partite `H` (`ℓ >= 3`, all classes but the smallest of size
/// at least 3). Classes `A₁..A_ℓ` with `|A₁| = (|H|−σ)k + 1`,
/// `|A_ℓ| = k(ℓ−1)σ − 1`, others `(|H|−σ)k`, plus a perfect matching in `A₁`
/// (or, for odd `|A₁|`, a matching missing three vertices and a path of
/// length 2 on the three highest-indexed vertices of `A₁`).
pub fn prop4_extremal(h: &Graph, k: usize) -> Result<Graph> {
    if k < 1 {
        return Err(Error::BadParameter("k must be at least 1".into()));
    }
    let classes = multipartite_classes(h)
        .ok_or_else(|| Error::BadParameter("pattern is not complete multipartite".into()))?;
    let ell = classes.len();
    if ell < 3 {
        return Err(Error::BadParameter(format!("pattern must have at least 3 classes, has {ell}")));
    }
    let mut sizes: Vec<usize> = classes.iter().map(VertexSet::len).collect();
    sizes.sort_unstable();
    if sizes[1..].iter().any(|&s| s < 3) {
        return Err(Error::BadParameter(
            "every class except the smallest needs at least 3 vertices".into(),
        ));
    }
    let order = h.n();
    let sigma = sizes[0];
    let big = (order - sigma) * k;
    let mut class_sizes = vec![big + 1];
    class_sizes.extend(std::iter::repeat(big).take(ell - 2));
    class_sizes.push(k * (ell - 1) * sigma - 1);
    let base = Graph::complete_multipartite(&class_sizes)?;

    let a1 = big + 1;
    let mut extra = Vec::new();
    let paired = if a1 % 2 == 0 { a1 } else { a1 - 3 };
    for i in (0..paired).step_by(2) {
        extra.push((i, i + 1));
    }
    if a1 % 2 == 1 {
        extra.push((a1 - 3, a1 - 2));
        extra.push((a1 - 2, a1 - 1));
    }
    let g = base.with_edges_added(extra)?;

    let profile = colouring_profile(h)?;
    let crit = critical_from_profile(&profile, order)?;
    let n = g.n() as i64;
    let target = (Rational::from_integer(1) - crit.recip()) * Rational::from_integer(n);
    let got = g.min_degree()?;
    if !target.is_integer() || target.to_integer() != got as i64 {
        return Err(Error::Internal(format!(
            "extremal graph has minimum degree {got}, expected {target}"
        )));
    }
    Ok(g)
}

/// Class sizes of a `(q, n)`-canonical partition for `K_r^-`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalSpec {
    pub r: usize,
    pub q: usize,
    pub n: usize,
    pub class_sizes: Vec<usize>,
}

impl CanonicalSpec {
    pub fn new(r: usize, q: usize, n: usize) -> Result<Self> {
        if r < 4 {
            return Err(Error::BadParameter(format!("r must be at least 4, got {r}")));
        }
        if q < 1 || q > r - 2 {
            return Err(Error::BadParameter(format!("q must lie in 1..={}, got {q}", r - 2)));
        }
        let block = r * (r - 2);
        if n == 0 || n % block != 0 {
            return Err(Error::BadParameter(format!("n = {n} is not a positive multiple of {block}")));
        }
        let sparse = (r - 1) * n / block;
        let mut class_sizes = vec![sparse; q];
        class_sizes.push(n - q * sparse);
        Ok(CanonicalSpec { r, q, n, class_sizes })
    }

    /// Size of each of the first `q` classes.
    pub fn sparse_size(&self) -> usize {
        self.class_sizes[0]
    }

    pub fn remainder_size(&self) -> usize {
        self.class_sizes[self.q]
    }
}

/// `|B₁| = (r−q−1)(r−1) − 1`.
pub fn b1_order(r: usize, q: usize) -> usize {
    (r - q - 1) * (r - 1) - 1
}

/// `K(q, n)`: complete graph on the canonical classes with the first `q`
/// classes made independent. Labels record classes.
pub fn canonical_graph(spec: &CanonicalSpec) -> Result<Graph> {
    let checked = CanonicalSpec::new(spec.r, spec.q, spec.n)?;
    if checked != *spec {
        return Err(Error::BadParameter("canonical class sizes are inconsistent".into()));
    }
    let last = spec.remainder_size();
    if last % b1_order(spec.r, spec.q) != 0 {
        return Err(Error::Internal("remainder class not a multiple of |B1|".into()));
    }
    let mut sizes = vec![spec.sparse_size(); spec.q];
    sizes.extend(std::iter::repeat(1).take(last));
    let g = Graph::complete_multipartite(&sizes)?;
    let labels = (0..spec.n)
        .map(|v| (v / spec.sparse_size()).min(spec.q))
        .collect();
    g.with_labels(labels)
}

/// `q` disjoint `K_{r−q−1}` followed by `r−q−2` disjoint `K_{r−q}^-`.
///
/// Labels give an `(r−q−1)`-colouring with one class of size `r−2` (label 0)
/// and `r−q−2` classes of size `r−1`: every clique uses each colour once and
/// the `j`-th `K_{r−q}^-` puts its non-adjacent pair into colour `j + 1`.
pub fn b1_graph(r: usize, q: usize) -> Result<Graph> {
    if r < 4 || q < 1 || q > r - 2 {
        return Err(Error::BadParameter(format!("B1 needs r >= 4 and 1 <= q <= r-2, got r={r}, q={q}")));
    }
    let s = r - q - 1;
    let mut g = Graph::empty(0);
    let mut labels = Vec::new();
    for _ in 0..q {
        g = g.disjoint_union(&Graph::complete(s));
        labels.extend(0..s);
    }
    for j in 0..(r - q - 2) {
        // k_r_minus(s+1) misses {0,1}; both get colour j+1, the rest 0..s minus j+1.
        g = g.disjoint_union(&k_r_minus(s + 1)?);
        labels.push(j + 1);
        labels.push(j + 1);
        labels.extend((0..s).filter(|&c| c != j + 1));
    }
    debug_assert_eq!(g.n(), b1_order(r, q));
    g.with_labels(labels)
}

/// Complete `(q+1)`-partite graph with `q` classes of size `r` then one singleton.
pub fn h_qr_graph(q: usize, r: usize) -> Result<Graph> {
    if q < 1 || r < 1 {
        return Err(Error::BadParameter(format!("H_(q,r) needs q, r >= 1, got q={q}, r={r}")));
    }
    let mut sizes = vec![r; q];
    sizes.push(1);
    Graph::complete_multipartite(&sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class_sizes(g: &Graph) -> Vec<usize> {
        g.label_classes().unwrap().iter().map(VertexSet::len).collect()
    }

    #[test]
    fn kr_minus_examples() {
        let p3 = k_r_minus(3).unwrap();
        assert_eq!(p3.edge_count(), 2);
        assert_eq!(p3.degree(2), 2);
        assert_eq!(k_r_minus(4).unwrap().edge_count(), 5);
        assert_eq!(k_r_minus(6).unwrap().edge_count(), 14);
        assert!(!k_r_minus(5).unwrap().has_edge(0, 1));
        assert!(k_r_minus(2).is_err());
    }

    #[test]
    fn bottle_examples() {
        assert_eq!(class_sizes(&bottle_graph(&k_r_minus(4).unwrap()).unwrap()), vec![3, 3, 2]);
        assert_eq!(class_sizes(&bottle_graph(&k_r_minus(5).unwrap()).unwrap()), vec![4, 4, 4, 3]);
    }

    #[test]
    fn prop3_examples() {
        let g = prop3_extremal(4, 2).unwrap();
        assert_eq!((g.n(), class_sizes(&g), g.min_degree().unwrap()), (8, vec![1, 4, 3], 4));
        let g = prop3_extremal(4, 4).unwrap();
        assert_eq!((g.n(), class_sizes(&g), g.min_degree().unwrap()), (16, vec![3, 7, 6], 9));
        let g = prop3_extremal(5, 2).unwrap();
        assert_eq!((g.n(), g.min_degree().unwrap()), (10, 7));
        assert!(prop3_extremal(3, 2).is_err());
        assert!(prop3_extremal(4, 0).is_err());
    }

    #[test]
    fn prop3_degree_identity_holds_widely() {
        for r in 4..=9 {
            for k in 1..=12 {
                prop3_extremal(r, k).unwrap();
            }
        }
    }

    #[test]
    fn prop4_examples() {
        let h = Graph::complete_multipartite(&[1, 3, 3]).unwrap();
        let g = prop4_extremal(&h, 1).unwrap();
        assert_eq!((g.n(), g.min_degree().unwrap()), (14, 8));
        // A1 = 0..7 odd: matching {0,1},{2,3} and path 4-5-6.
        assert!(g.has_edge(0, 1) && g.has_edge(2, 3) && g.has_edge(4, 5) && g.has_edge(5, 6));
        assert!(!g.has_edge(1, 2) && !g.has_edge(4, 6));
        let g = prop4_extremal(&h, 2).unwrap();
        assert_eq!((g.n(), g.min_degree().unwrap()), (28, 16));
        assert_eq!(class_sizes(&Graph::complete_multipartite(&[13, 12, 3]).unwrap()), vec![13, 12, 3]);

        // Even |A1|: K_{1,3,4}, k = 1 gives |A1| = 7 + 1 = 8.
        let h = Graph::complete_multipartite(&[1, 3, 4]).unwrap();
        let g = prop4_extremal(&h, 1).unwrap();
        let a1 = VertexSet::range(g.n(), 0, 8);
        assert_eq!(g.edges_within(&a1), 4);
        assert!((0..8).all(|v| g.degree_into(v, &a1) == 1));
    }

    #[test]
    fn prop4_rejects_bad_patterns() {
        assert!(prop4_extremal(&k_r_minus(4).unwrap(), 1).is_err());
        assert!(prop4_extremal(&Graph::complete_multipartite(&[3, 3]).unwrap(), 1).is_err());
        assert!(prop4_extremal(&Graph::complete_multipartite(&[1, 2, 3]).unwrap(), 1).is_err());
    }

    #[test]
    fn canonical_examples() {
        let s = CanonicalSpec::new(4, 1, 8).unwrap();
        assert_eq!(s.class_sizes, vec![3, 5]);
        let s = CanonicalSpec::new(4, 2, 8).unwrap();
        assert_eq!(s.class_sizes, vec![3, 3, 2]);
        let s = CanonicalSpec::new(5, 1, 15).unwrap();
        assert_eq!(s.class_sizes, vec![4, 11]);
        assert!(CanonicalSpec::new(4, 1, 12).is_err());
        assert!(CanonicalSpec::new(4, 3, 8).is_err());

        let g = canonical_graph(&CanonicalSpec::new(4, 1, 8).unwrap()).unwrap();
        let a1 = VertexSet::range(8, 0, 3);
        let a2 = VertexSet::range(8, 3, 8);
        assert_eq!(g.edges_within(&a1), 0);
        assert_eq!(g.edges_within(&a2), 10);
        assert_eq!(g.edges_between(&a1, &a2), 15);
        assert_eq!(class_sizes(&g), vec![3, 5]);
    }

    #[test]
    fn b1_examples() {
        let b = b1_graph(4, 1).unwrap();
        assert_eq!((b.n(), b.edge_count()), (5, 3));
        let mut comps = b.component_orders();
        comps.sort();
        assert_eq!(comps, vec![2, 3]);
        assert_eq!(class_sizes(&b), vec![2, 3]);

        let b = b1_graph(4, 2).unwrap();
        assert_eq!((b.n(), b.edge_count()), (2, 0));

        let b = b1_graph(5, 1).unwrap();
        assert_eq!(b.n(), 11);
        assert_eq!(b.edge_count(), 3 + 2 * 5);
    }

    #[test]
    fn b1_labels_are_proper_colourings() {
        for r in 4..=8 {
            for q in 1..=(r - 2) {
                let b = b1_graph(r, q).unwrap();
                let labels = b.labels().unwrap();
                assert!(b.edges().all(|(u, v)| labels[u] != labels[v]), "r={r} q={q}");
                let mut sizes = class_sizes(&b);
                assert_eq!(sizes.len(), r - q - 1);
                assert_eq!(sizes.remove(0), r - 2);
                assert!(sizes.iter().all(|&s| s == r - 1));
                assert_eq!(b.n(), b1_order(r, q));
            }
        }
    }

    #[test]
    fn h_qr_examples() {
        let s = h_qr_graph(1, 3).unwrap();
        assert_eq!((s.n(), s.edge_count()), (4, 3));
        let h = h_qr_graph(2, 3).unwrap();
        assert_eq!((h.n(), h.edge_count()), (7, 15));
        assert_eq!(h_qr_graph(1, 1).unwrap(), Graph::complete_multipartite(&[1, 1]).unwrap());
        assert!(h_qr_graph(0, 3).is_err());
    }
}
