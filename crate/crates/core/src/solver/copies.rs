use std::collections::BTreeSet;

use crate::graph::Graph;
use crate::par;
use crate::vertex_set::VertexSet;

use super::Copy;

/// True when `h` is `K_r` minus exactly one edge for some `r >= 3`.
pub fn is_kr_minus_pattern(h: &Graph) -> bool {
    let r = h.n();
    r >= 3 && h.edge_count() == r * (r - 1) / 2 - 1
}

/// Lexicographically least embedding of `h` onto exactly the vertex set
/// `set` of `g`, if one exists.
pub fn canonical_embedding(h: &Graph, g: &Graph, set: &VertexSet) -> Option<Vec<usize>> {
    if set.len() != h.n() {
        return None;
    }
    let hosts = set.to_vec();
    let mut image = Vec::with_capacity(h.n());
    let mut used = VertexSet::empty(g.n());
    lex_embed(h, g, &hosts, &mut image, &mut used).then_some(image)
}

fn lex_embed(h: &Graph, g: &Graph, hosts: &[usize], image: &mut Vec<usize>, used: &mut VertexSet) -> bool {
    let i = image.len();
    if i == h.n() {
        return true;
    }
    for &v in hosts {
        if used.contains(v) {
            continue;
        }
        if (0..i).any(|j| h.has_edge(i, j) && !g.has_edge(v, image[j])) {
            continue;
        }
        image.push(v);
        used.insert(v);
        if lex_embed(h, g, hosts, image, used) {
            return true;
        }
        used.remove(v);
        image.pop();
    }
    false
}

/// One [`Copy`] per host vertex set that hosts `h`, each with its
/// lexicographically least embedding, sorted by vertex list.
///
/// `K_r^-` patterns take a direct path: `r`-subsets with at least
/// `C(r,2) − 1` induced edges.
pub fn enumerate_copies(h: &Graph, g: &Graph) -> Vec<Copy> {
    let k = h.n();
    if k == 0 || k > g.n() {
        return Vec::new();
    }
    let sets: Vec<VertexSet> = if is_kr_minus_pattern(h) {
        let per_root = par::map_range(g.n(), |root| near_cliques_from(g, k, root));
        per_root.into_iter().flatten().collect()
    } else {
        general_sets(h, g)
    };
    let mut copies: Vec<Copy> = par::map(&sets, |s| {
        let emb = canonical_embedding(h, g, s).expect("enumerated set hosts the pattern");
        Copy {
            vertices: s.clone(),
            embedding: emb,
        }
    });
    copies.sort_by(|a, b| a.vertices.iter().cmp(b.vertices.iter()));
    copies
}

/// `k`-subsets with smallest element `root` missing at most one edge.
fn near_cliques_from(g: &Graph, k: usize, root: usize) -> Vec<VertexSet> {
    let mut out = Vec::new();
    let mut chosen = vec![root];
    near_rec(g, k, &mut chosen, 0, &mut out);
    out
}

fn near_rec(g: &Graph, k: usize, chosen: &mut Vec<usize>, missing: usize, out: &mut Vec<VertexSet>) {
    if chosen.len() == k {
        out.push(VertexSet::from_vertices(g.n(), chosen.iter().copied()).expect("in range"));
        return;
    }
    let last = *chosen.last().unwrap();
    // Need k - len more vertices from (last, n).
    if g.n() - last - 1 < k - chosen.len() {
        return;
    }
    for v in (last + 1)..g.n() {
        let miss = chosen.iter().filter(|&&u| !g.has_edge(u, v)).count();
        if missing + miss > 1 {
            continue;
        }
        chosen.push(v);
        near_rec(g, k, chosen, missing + miss, out);
        chosen.pop();
    }
}

/// Distinct image sets of all embeddings, via backtracking over pattern
/// vertices in a connectivity-first order.
fn general_sets(h: &Graph, g: &Graph) -> Vec<VertexSet> {
    let order = embedding_order(h);
    let first = order[0];
    let per_root = par::map_range(g.n(), |root| {
        if g.degree(root) < h.degree(first) {
            return Vec::new();
        }
        let mut found = BTreeSet::new();
        let mut image = vec![usize::MAX; h.n()];
        image[first] = root;
        let mut used = VertexSet::empty(g.n());
        used.insert(root);
        general_rec(h, g, &order, 1, &mut image, &mut used, &mut found);
        found.into_iter().collect::<Vec<_>>()
    });
    let mut all: Vec<VertexSet> = per_root.into_iter().flatten().collect();
    all.sort();
    all.dedup();
    all
}

fn embedding_order(h: &Graph) -> Vec<usize> {
    let n = h.n();
    let mut order = Vec::with_capacity(n);
    let mut placed = VertexSet::empty(n);
    while order.len() < n {
        // Prefer the unplaced vertex with most placed neighbours, then degree.
        let v = (0..n)
            .filter(|&v| !placed.contains(v))
            .max_by_key(|&v| (h.degree_into(v, &placed), h.degree(v), std::cmp::Reverse(v)))
            .unwrap();
        placed.insert(v);
        order.push(v);
    }
    order
}

fn general_rec(
    h: &Graph,
    g: &Graph,
    order: &[usize],
    depth: usize,
    image: &mut [usize],
    used: &mut VertexSet,
    found: &mut BTreeSet<VertexSet>,
) {
    if depth == order.len() {
        found.insert(used.clone());
        return;
    }
    let p = order[depth];
    let mut cand = VertexSet::full(g.n()).difference(used);
    for &q in &order[..depth] {
        if h.has_edge(p, q) {
            cand.intersect_with(g.neighbors(image[q]));
        }
    }
    for v in cand.iter() {
        if g.degree(v) < h.degree(p) {
            continue;
        }
        image[p] = v;
        used.insert(v);
        general_rec(h, g, order, depth + 1, image, used, found);
        used.remove(v);
    }
    image[p] = usize::MAX;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{bottle_graph, k_r_minus};

    /// Independent oracle: test every k-subset by trying all bijections.
    fn brute_count(h: &Graph, g: &Graph) -> usize {
        let k = h.n();
        let n = g.n();
        let mut count = 0;
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            if hosts_by_permutation(h, g, &subset) {
                count += 1;
            }
            // next combination
            let mut i = k;
            loop {
                if i == 0 {
                    return count;
                }
                i -= 1;
                if subset[i] < n - k + i {
                    subset[i] += 1;
                    for j in i + 1..k {
                        subset[j] = subset[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    fn hosts_by_permutation(h: &Graph, g: &Graph, set: &[usize]) -> bool {
        fn rec(h: &Graph, g: &Graph, set: &[usize], img: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
            if img.len() == set.len() {
                return h.edges().all(|(a, b)| g.has_edge(img[a], img[b]));
            }
            for i in 0..set.len() {
                if !used[i] {
                    used[i] = true;
                    img.push(set[i]);
                    if rec(h, g, set, img, used) {
                        return true;
                    }
                    img.pop();
                    used[i] = false;
                }
            }
            false
        }
        rec(h, g, set, &mut Vec::new(), &mut vec![false; set.len()])
    }

    #[test]
    fn triangle_in_k4() {
        let c = enumerate_copies(&Graph::complete(3), &Graph::complete(4));
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn k4_minus_in_k4() {
        let c = enumerate_copies(&k_r_minus(4).unwrap(), &Graph::complete(4));
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].vertex_list(), vec![0, 1, 2, 3]);
        assert_eq!(c[0].embedding, vec![0, 1, 2, 3]);
    }

    #[test]
    fn k4_minus_in_bottle_matches_subset_scan() {
        let h = k_r_minus(4).unwrap();
        let b = bottle_graph(&h).unwrap();
        let fast = enumerate_copies(&h, &b).len();
        assert_eq!(fast, brute_count(&h, &b));
        // Profiles (2,1,1),(1,2,1) over classes (3,3,2) and (1,1,2).
        assert_eq!(fast, 3 * 3 * 2 + 3 * 3 * 2 + 3 * 3);
    }

    #[test]
    fn general_path_matches_brute_force() {
        // Use a non-K_r^- pattern on a few hosts.
        let paw = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        for host in [
            Graph::complete(6),
            Graph::complete_multipartite(&[2, 2, 3]).unwrap(),
            Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)]).unwrap(),
        ] {
            assert_eq!(enumerate_copies(&paw, &host).len(), brute_count(&paw, &host));
        }
    }

    #[test]
    fn embedding_is_lexicographically_least() {
        let h = k_r_minus(4).unwrap(); // missing {0,1}
        let g = Graph::complete(4).with_edges_removed([(2, 3)]).unwrap();
        let c = enumerate_copies(&h, &g);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].embedding, vec![2, 3, 0, 1]);
    }

    #[test]
    fn pattern_larger_than_host() {
        assert!(enumerate_copies(&Graph::complete(5), &Graph::complete(4)).is_empty());
    }
}
