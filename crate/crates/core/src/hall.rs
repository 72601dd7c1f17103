//! Perfect `H_{q,r}`-packings of near-complete multipartite hosts.
//!
//! Level `q` matches every vertex of the singleton class `V_{q+1}` to `r`
//! vertices of `V_q` (a perfect `K_{1,r}`-packing found as a bipartite
//! matching on the `r`-fold blow-up), contracts each star to one vertex and
//! recurses on `q − 1` classes. Expanding the contracted copies gives the
//! packing of the original host.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};
use crate::rational::Rational;
use crate::solver::{Copy, Packing};
use crate::vertex_set::VertexSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Star {
    pub center: usize,
    pub leaves: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarPacking {
    pub stars: Vec<Star>,
}

impl StarPacking {
    /// Centers distinct, leaves disjoint from each other and from centers,
    /// every leaf adjacent to its center, both sides covered exactly.
    pub fn is_valid(&self, g: &Graph, big: &VertexSet, small: &VertexSet, r: usize) -> bool {
        let n = g.n();
        let mut centers = VertexSet::empty(n);
        let mut leaves = VertexSet::empty(n);
        for s in &self.stars {
            if !small.contains(s.center) || centers.contains(s.center) || s.leaves.len() != r {
                return false;
            }
            centers.insert(s.center);
            for &l in &s.leaves {
                if l >= n || !big.contains(l) || leaves.contains(l) || !g.has_edge(s.center, l) {
                    return false;
                }
                leaves.insert(l);
            }
        }
        centers == *small && leaves == *big
    }
}

/// A set `centers` of small-side vertices whose common neighbourhood on the
/// big side has fewer than `r·|centers|` vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HallViolation {
    pub centers: Vec<usize>,
    pub neighbourhood: Vec<usize>,
    pub demand: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StarOutcome {
    Packed(StarPacking),
    Absent(HallViolation),
}

/// Perfect `K_{1,r}`-packing with centers in `small` and leaves in `big`.
///
/// Exact: `Absent` carries a Hall-violating set of centers.
pub fn star_pack(g: &Graph, big: &VertexSet, small: &VertexSet, r: usize) -> Result<StarOutcome> {
    if r == 0 || big.len() != r * small.len() {
        return Err(Error::BadParameter(format!(
            "star packing needs |big| = r|small|, got {} and {}·{}",
            big.len(),
            r,
            small.len()
        )));
    }
    if !big.is_disjoint(small) {
        return Err(Error::OverlappingSets);
    }
    let centers = small.to_vec();
    let right = big.to_vec();
    let mut right_index = vec![usize::MAX; g.n()];
    for (i, &v) in right.iter().enumerate() {
        right_index[v] = i;
    }
    let adj: Vec<Vec<usize>> = centers
        .iter()
        .map(|&c| g.neighbors(c).intersection(big).iter().map(|v| right_index[v]).collect())
        .collect();
    // Left slot `s` is copy `s % r` of center `s / r`.
    let slots = centers.len() * r;
    let mut match_right = vec![usize::MAX; right.len()];
    let mut match_left = vec![usize::MAX; slots];
    for s in 0..slots {
        let mut seen = vec![false; right.len()];
        if !augment(s, r, &adj, &mut seen, &mut match_left, &mut match_right) {
            return Ok(StarOutcome::Absent(hall_witness(s, r, &adj, &match_right, &centers, &right)));
        }
    }
    let stars = centers
        .iter()
        .enumerate()
        .map(|(i, &c)| Star {
            center: c,
            leaves: (0..r).map(|j| right[match_left[i * r + j]]).collect(),
        })
        .collect();
    Ok(StarOutcome::Packed(StarPacking { stars }))
}

fn augment(
    s: usize,
    r: usize,
    adj: &[Vec<usize>],
    seen: &mut [bool],
    match_left: &mut [usize],
    match_right: &mut [usize],
) -> bool {
    for &y in &adj[s / r] {
        if seen[y] {
            continue;
        }
        seen[y] = true;
        if match_right[y] == usize::MAX || augment(match_right[y], r, adj, seen, match_left, match_right) {
            match_right[y] = s;
            match_left[s] = y;
            return true;
        }
    }
    false
}

/// Alternating search from the unmatched slot `root`: reachable slots have
/// more members than their (fully matched) neighbourhood.
fn hall_witness(
    root: usize,
    r: usize,
    adj: &[Vec<usize>],
    match_right: &[usize],
    centers: &[usize],
    right: &[usize],
) -> HallViolation {
    let mut center_hit = vec![false; centers.len()];
    let mut right_hit = vec![false; right.len()];
    let mut queue = VecDeque::from([root]);
    center_hit[root / r] = true;
    while let Some(s) = queue.pop_front() {
        for &y in &adj[s / r] {
            if right_hit[y] {
                continue;
            }
            right_hit[y] = true;
            let t = match_right[y];
            if t != usize::MAX {
                center_hit[t / r] = true;
                queue.push_back(t);
            }
        }
    }
    let chosen: Vec<usize> = (0..centers.len()).filter(|&i| center_hit[i]).collect();
    let mut nbhd: Vec<usize> = chosen.iter().flat_map(|&i| adj[i].iter().copied()).collect();
    nbhd.sort_unstable();
    nbhd.dedup();
    HallViolation {
        centers: chosen.iter().map(|&i| centers[i]).collect(),
        neighbourhood: nbhd.into_iter().map(|y| right[y]).collect(),
        demand: r * chosen.len(),
    }
}

/// Host after replacing each star by a single vertex.
#[derive(Debug, Clone)]
pub struct Contraction {
    pub graph: Graph,
    /// `rest` classes first (in the new numbering), then the star class.
    pub classes: Partition,
    /// For new vertex `v`: the old vertex it came from, or the star index.
    pub origin: Vec<Origin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Vertex(usize),
    Star(usize),
}

/// Contracts each star `K` to a vertex `x_K`, adjacent to `y` iff `y` is
/// adjacent to every vertex of `K`. Edges among `rest` are inherited.
pub fn contract_stars(g: &Graph, sp: &StarPacking, rest: &[VertexSet]) -> Contraction {
    let mut origin = Vec::new();
    let mut sizes = Vec::new();
    for class in rest {
        origin.extend(class.iter().map(Origin::Vertex));
        sizes.push(class.len());
    }
    origin.extend((0..sp.stars.len()).map(Origin::Star));
    sizes.push(sp.stars.len());
    let n = origin.len();

    let common: Vec<VertexSet> = sp
        .stars
        .iter()
        .map(|s| {
            let mut c = g.neighbors(s.center).clone();
            for &l in &s.leaves {
                c.intersect_with(g.neighbors(l));
            }
            c
        })
        .collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let adjacent = match (origin[a], origin[b]) {
                (Origin::Vertex(u), Origin::Vertex(v)) => g.has_edge(u, v),
                (Origin::Vertex(u), Origin::Star(k)) | (Origin::Star(k), Origin::Vertex(u)) => common[k].contains(u),
                // Stars live in one class of the contracted host.
                (Origin::Star(_), Origin::Star(_)) => false,
            };
            if adjacent {
                edges.push((a, b));
            }
        }
    }
    let graph = Graph::from_edges(n, edges).expect("contracted edges are in range and distinct");
    let mut classes = Vec::new();
    let mut lo = 0;
    for s in sizes {
        classes.push(VertexSet::range(n, lo, lo + s));
        lo += s;
    }
    debug_assert_eq!(lo, n);
    Contraction {
        graph,
        classes: Partition::new(n, classes).expect("consecutive ranges are disjoint"),
        origin,
    }
}

/// `τ(1, r) = 1/2` and `τ(q, r) = τ(q−1, r)/(r+1)`.
pub fn default_tau(q: usize, r: usize) -> Rational {
    let mut t = Rational::new(1, 2);
    for _ in 1..q {
        t /= Rational::from_integer(r as i64 + 1);
    }
    t
}

/// A vertex missing more than `τ|V_j|` of another class `V_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisMiss {
    pub vertex: usize,
    pub class: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelFailure {
    /// Number of large classes at the failing level (the matching was
    /// between `V_level` and the contracted singleton class).
    pub level: usize,
    /// Centers are original vertices; a contracted star is named by its center.
    pub violation: HallViolation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HallOutcome {
    Packed { packing: Packing },
    Absent { failure: LevelFailure },
}

#[derive(Debug, Clone, Serialize)]
pub struct HallReport {
    #[serde(flatten)]
    pub outcome: HallOutcome,
    pub hypothesis_misses: Vec<HypothesisMiss>,
}

impl HallReport {
    pub fn packing(&self) -> Option<&Packing> {
        match &self.outcome {
            HallOutcome::Packed { packing } => Some(packing),
            HallOutcome::Absent { .. } => None,
        }
    }
}

/// Perfect `H_{q,r}`-packing of `g` with classes `V_1..V_{q+1}`, where
/// `|V_i| = kr` for `i ≤ q` and `|V_{q+1}| = k`.
///
/// Copies are embedded in the vertex order of
/// [`h_qr_graph`](crate::constructions::h_qr_graph): `r` vertices from each
/// of `V_1..V_q`, then the singleton. The degree hypothesis is checked
/// against `tau` and reported, never enforced.
pub fn pack_h_qr(g: &Graph, classes: &Partition, q: usize, r: usize, tau: Rational) -> Result<HallReport> {
    if q < 1 || r < 1 {
        return Err(Error::BadParameter(format!("need q, r >= 1, got q={q}, r={r}")));
    }
    if classes.len() != q + 1 {
        return Err(Error::BadParameter(format!("expected {} classes, got {}", q + 1, classes.len())));
    }
    if classes.host_n() != g.n() || !classes.covers_host() {
        return Err(Error::BadParameter("classes must partition the host".into()));
    }
    let k = classes.class(q).len();
    if let Some(i) = (0..q).find(|&i| classes.class(i).len() != k * r) {
        return Err(Error::BadSizes(format!(
            "class {i} has {} vertices, expected {}",
            classes.class(i).len(),
            k * r
        )));
    }
    let hypothesis_misses = hypothesis_misses(g, classes, tau);
    let outcome = match pack_level(g, classes.classes(), r)? {
        Ok(groups) => {
            let copies = groups.into_iter().map(|e| Copy::new(g.n(), e)).collect();
            HallOutcome::Packed {
                packing: Packing::new(g.n(), copies),
            }
        }
        Err(failure) => HallOutcome::Absent { failure },
    };
    Ok(HallReport {
        outcome,
        hypothesis_misses,
    })
}

fn hypothesis_misses(g: &Graph, classes: &Partition, tau: Rational) -> Vec<HypothesisMiss> {
    let mut out = Vec::new();
    for (i, ci) in classes.classes().iter().enumerate() {
        for v in ci.iter() {
            for (j, cj) in classes.classes().iter().enumerate() {
                if i == j {
                    continue;
                }
                let missing = cj.len() - g.degree_into(v, cj);
                if Rational::from_integer(missing as i64) > tau * Rational::from_integer(cj.len() as i64) {
                    out.push(HypothesisMiss { vertex: v, class: j, missing });
                }
            }
        }
    }
    out
}

/// Returns embeddings in `g`'s numbering, or the failing level.
///
/// When a lower level fails, leaves are swapped between stars to enlarge
/// the matching one level down, and the lower levels are retried.
fn pack_level(
    g: &Graph,
    classes: &[VertexSet],
    r: usize,
) -> Result<std::result::Result<Vec<Vec<usize>>, LevelFailure>> {
    let q = classes.len() - 1;
    let mut sp = match star_pack(g, &classes[q - 1], &classes[q], r)? {
        StarOutcome::Packed(sp) => sp,
        StarOutcome::Absent(violation) => return Ok(Err(LevelFailure { level: q, violation })),
    };
    if q == 1 {
        return Ok(Ok(sp
            .stars
            .into_iter()
            .map(|s| {
                let mut e = s.leaves;
                e.push(s.center);
                e
            })
            .collect()));
    }
    let mut rounds = 0;
    loop {
        let con = contract_stars(g, &sp, &classes[..q - 1]);
        let centers: Vec<usize> = sp.stars.iter().map(|s| s.center).collect();
        let to_old = |v: usize| match con.origin[v] {
            Origin::Vertex(u) => u,
            Origin::Star(k) => centers[k],
        };
        match pack_level(&con.graph, con.classes.classes(), r)? {
            Err(mut f) => {
                if rounds < REPAIR_ROUNDS && improve_stars(g, &mut sp, &classes[q - 2], r) {
                    rounds += 1;
                    continue;
                }
                f.violation.centers = f.violation.centers.iter().map(|&v| to_old(v)).collect();
                f.violation.neighbourhood = f.violation.neighbourhood.iter().map(|&v| to_old(v)).collect();
                return Ok(Err(f));
            }
            Ok(groups) => {
                return Ok(Ok(groups
                    .into_iter()
                    .map(|e| {
                        let (front, x) = e.split_at(e.len() - 1);
                        let Origin::Star(k) = con.origin[x[0]] else {
                            unreachable!("singleton slot always holds a contracted star")
                        };
                        let star = &sp.stars[k];
                        let mut out: Vec<usize> = front.iter().map(|&v| to_old(v)).collect();
                        out.extend_from_slice(&star.leaves);
                        out.push(star.center);
                        out
                    })
                    .collect()))
            }
        }
    }
}

const REPAIR_ROUNDS: usize = 32;

/// Vertices of `lower` adjacent to the whole star.
fn star_common(g: &Graph, star: &Star, lower: &VertexSet) -> VertexSet {
    let mut c = lower.intersection(g.neighbors(star.center));
    for &l in &star.leaves {
        c.intersect_with(g.neighbors(l));
    }
    c
}

/// Matched slots when every star wants `r` vertices of `lower`, and the
/// total size of the common neighbourhoods as a tie-break.
fn star_score(g: &Graph, stars: &[Star], lower: &VertexSet, r: usize) -> (usize, usize) {
    let right = lower.to_vec();
    let mut index = vec![usize::MAX; g.n()];
    for (i, &v) in right.iter().enumerate() {
        index[v] = i;
    }
    let adj: Vec<Vec<usize>> = stars
        .iter()
        .map(|s| star_common(g, s, lower).iter().map(|v| index[v]).collect())
        .collect();
    let spread = adj.iter().map(Vec::len).sum();
    let mut match_left = vec![usize::MAX; stars.len() * r];
    let mut match_right = vec![usize::MAX; right.len()];
    let mut matched = 0;
    for s in 0..stars.len() * r {
        let mut seen = vec![false; right.len()];
        if augment(s, r, &adj, &mut seen, &mut match_left, &mut match_right) {
            matched += 1;
        }
    }
    (matched, spread)
}

/// One pass of improving leaf swaps; `false` if nothing improved.
fn improve_stars(g: &Graph, sp: &mut StarPacking, lower: &VertexSet, r: usize) -> bool {
    let mut best = star_score(g, &sp.stars, lower, r);
    let start = best;
    let k = sp.stars.len();
    for i in 0..k {
        for j in (i + 1)..k {
            for a in 0..r {
                for b in 0..r {
                    let (x, y) = (sp.stars[i].leaves[a], sp.stars[j].leaves[b]);
                    if !g.has_edge(sp.stars[i].center, y) || !g.has_edge(sp.stars[j].center, x) {
                        continue;
                    }
                    sp.stars[i].leaves[a] = y;
                    sp.stars[j].leaves[b] = x;
                    let score = star_score(g, &sp.stars, lower, r);
                    if score > best {
                        best = score;
                    } else {
                        sp.stars[i].leaves[a] = x;
                        sp.stars[j].leaves[b] = y;
                    }
                }
            }
        }
    }
    best > start
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::h_qr_graph;
    use crate::generators::multipartite_with_deletions;
    use crate::solver::verify_packing;

    fn blocks(sizes: &[usize]) -> (Graph, Partition) {
        let g = Graph::complete_multipartite(sizes).unwrap();
        let n = g.n();
        let mut lo = 0;
        let classes = sizes
            .iter()
            .map(|&s| {
                let c = VertexSet::range(n, lo, lo + s);
                lo += s;
                c
            })
            .collect();
        (g, Partition::new(n, classes).unwrap())
    }

    #[test]
    fn complete_bipartite_star_pack() {
        let (g, p) = blocks(&[12, 4]);
        let StarOutcome::Packed(sp) = star_pack(&g, p.class(0), p.class(1), 3).unwrap() else {
            panic!("complete host packs")
        };
        assert_eq!(sp.stars.len(), 4);
        assert!(sp.is_valid(&g, p.class(0), p.class(1), 3));
    }

    #[test]
    fn isolated_center_gives_witness() {
        let (g, p) = blocks(&[6, 2]);
        let cut: Vec<_> = (0..6).map(|v| (v, 7)).collect();
        let g = g.with_edges_removed(cut).unwrap();
        let StarOutcome::Absent(w) = star_pack(&g, p.class(0), p.class(1), 3).unwrap() else {
            panic!("isolated center cannot be matched")
        };
        assert!(w.neighbourhood.len() < w.demand);
        assert!(w.centers.contains(&7));
    }

    #[test]
    fn size_mismatch_rejected() {
        let (g, p) = blocks(&[5, 2]);
        assert!(matches!(star_pack(&g, p.class(0), p.class(1), 3), Err(Error::BadParameter(_))));
    }

    #[test]
    fn contraction_respects_missing_leaf_edge() {
        let (g, p) = blocks(&[3, 3, 1]);
        let sp = match star_pack(&g, p.class(1), p.class(2), 3).unwrap() {
            StarOutcome::Packed(sp) => sp,
            StarOutcome::Absent(_) => unreachable!(),
        };
        let con = contract_stars(&g, &sp, &[p.class(0).clone()]);
        assert_eq!(con.graph.edge_count(), 3);
        let g2 = g.with_edges_removed([(0, 4)]).unwrap();
        let con2 = contract_stars(&g2, &sp, &[p.class(0).clone()]);
        assert!(!con2.graph.has_edge(0, 3));
        assert!(con2.graph.has_edge(1, 3));
    }

    #[test]
    fn complete_hosts_pack() {
        for (q, r, k) in [(1, 3, 4), (2, 3, 3), (3, 2, 2)] {
            let mut sizes = vec![k * r; q];
            sizes.push(k);
            let (g, p) = blocks(&sizes);
            let rep = pack_h_qr(&g, &p, q, r, default_tau(q, r)).unwrap();
            let pk = rep.packing().expect("complete host packs");
            assert_eq!(pk.len(), k);
            assert!(verify_packing(&h_qr_graph(q, r).unwrap(), &g, pk, true));
            assert!(rep.hypothesis_misses.is_empty());
        }
    }

    #[test]
    fn random_deletions_pack() {
        let h = h_qr_graph(2, 3).unwrap();
        for seed in 0..20 {
            let (g, p) = multipartite_with_deletions(&[15, 15, 5], Rational::new(1, 20), seed).unwrap();
            let rep = pack_h_qr(&g, &p, 2, 3, Rational::new(1, 20)).unwrap();
            assert!(verify_packing(&h, &g, rep.packing().expect("packs"), true));
        }
    }

    #[test]
    fn default_tau_ladder() {
        assert_eq!(default_tau(1, 3), Rational::new(1, 2));
        assert_eq!(default_tau(2, 3), Rational::new(1, 8));
        assert_eq!(default_tau(3, 4), Rational::new(1, 50));
    }
}
