//! Finding `K_r^-` copies with a prescribed number of vertices per class,
//! and batches of `r − 2` copies that take exactly `r − 1` vertices from
//! every sparse class.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::vertex_set::VertexSet;

/// Shared node budget for copy searches.
pub(crate) struct Budget {
    pub(crate) left: u64,
}

impl Budget {
    pub(crate) fn new(nodes: u64) -> Self {
        Budget { left: nodes }
    }

    fn spend(&mut self) -> bool {
        if self.left == 0 {
            return false;
        }
        self.left -= 1;
        true
    }
}

/// Finds `required` plus `count` vertices from each `(pool, count)` group
/// such that at most one pair among all chosen vertices is non-adjacent.
/// Candidates are tried in ascending index order.
pub(crate) fn find_near_clique(
    g: &Graph,
    required: &[usize],
    groups: &[(VertexSet, usize)],
    budget: &mut Budget,
) -> Option<Vec<usize>> {
    let n = g.n();
    let mut chosen = VertexSet::empty(n);
    let mut missing = 0;
    for (k, &v) in required.iter().enumerate() {
        missing += required[..k].iter().filter(|&&u| !g.has_edge(u, v)).count();
        chosen.insert(v);
    }
    if missing > 1 || chosen.len() != required.len() {
        return None;
    }
    let mut common = VertexSet::full(n);
    for &v in required {
        common.intersect_with(g.neighbors(v));
    }
    let mut out = required.to_vec();
    let groups: Vec<(VertexSet, usize)> = groups
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|(p, c)| (p.difference(&chosen), *c))
        .collect();
    if dfs(g, &groups, 0, 0, 0, &mut chosen, &mut out, missing, &common, budget) {
        Some(out)
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    g: &Graph,
    groups: &[(VertexSet, usize)],
    gi: usize,
    taken: usize,
    min_v: usize,
    chosen: &mut VertexSet,
    out: &mut Vec<usize>,
    missing: usize,
    common: &VertexSet,
    budget: &mut Budget,
) -> bool {
    if gi == groups.len() {
        return true;
    }
    if !budget.spend() {
        return false;
    }
    let (pool, count) = &groups[gi];
    if taken == *count {
        return dfs(g, groups, gi + 1, 0, 0, chosen, out, missing, common, budget);
    }
    // Feasibility: every remaining group still has enough candidates.
    for (k, (p, c)) in groups.iter().enumerate().skip(gi) {
        let need = if k == gi { c - taken } else { *c };
        let avail = if missing == 1 {
            p.intersection_len(common)
        } else {
            p.len()
        };
        if avail < need {
            return false;
        }
    }
    let size = chosen.len();
    for v in pool.iter().filter(|&v| v >= min_v) {
        if chosen.contains(v) {
            continue;
        }
        let miss = size - g.neighbors(v).intersection_len(chosen);
        if missing + miss > 1 {
            continue;
        }
        chosen.insert(v);
        out.push(v);
        let next_common = common.intersection(g.neighbors(v));
        if dfs(g, groups, gi, taken + 1, v + 1, chosen, out, missing + miss, &next_common, budget) {
            return true;
        }
        out.pop();
        chosen.remove(v);
        if budget.left == 0 {
            return false;
        }
    }
    false
}

/// What a batch must achieve.
pub(crate) struct BatchRequest<'a> {
    /// Current classes; the last is the remainder.
    pub classes: &'a [VertexSet],
    /// Vertices each of the first copies must contain.
    pub anchors: &'a [Vec<usize>],
    /// Vertices taken from each sparse class, summed over the batch.
    pub need: &'a [usize],
    pub copies: usize,
    /// Never picked unless required by an anchor.
    pub avoid: &'a VertexSet,
}

/// Finds `req.copies` disjoint `K_r^-` copies meeting the sparse-class
/// totals exactly. Per-copy profiles (vertices per sparse class, at most one
/// class contributing two) are searched with backtracking; each profile is
/// realised by [`find_near_clique`].
pub(crate) fn build_batch(g: &Graph, r: usize, req: &BatchRequest, budget: &mut Budget) -> Result<Vec<Vec<usize>>> {
    let q = req.classes.len() - 1;
    if req.need.len() != q {
        return Err(Error::Internal("batch demand has the wrong length".into()));
    }
    let mut used = VertexSet::empty(g.n());
    for a in req.anchors {
        for &v in a {
            if used.contains(v) {
                return Err(Error::Internal(format!("vertex {v} required by two anchors")));
            }
            used.insert(v);
        }
    }
    let reserved = used.clone();
    let mut out = Vec::new();
    let mut need = req.need.to_vec();
    if plan(g, r, req, 0, &mut used, &reserved, &mut need, &mut out, budget) {
        Ok(out)
    } else {
        Err(Error::Stuck {
            stage: "batch",
            detail: format!(
                "no {} disjoint copies with sparse totals {:?} (anchors {:?})",
                req.copies, req.need, req.anchors
            ),
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn plan(
    g: &Graph,
    r: usize,
    req: &BatchRequest,
    c: usize,
    used: &mut VertexSet,
    reserved: &VertexSet,
    need: &mut [usize],
    out: &mut Vec<Vec<usize>>,
    budget: &mut Budget,
) -> bool {
    if c == req.copies {
        return need.iter().all(|&x| x == 0);
    }
    let q = need.len();
    let required: &[usize] = req.anchors.get(c).map(Vec::as_slice).unwrap_or(&[]);
    let class_of = |v: usize| req.classes.iter().position(|cl| cl.contains(v));
    let mut req_count = vec![0usize; q + 1];
    for &v in required {
        match class_of(v) {
            Some(i) => req_count[i] += 1,
            None => return false,
        }
    }
    let left_after = req.copies - c - 1;
    let profiles = profiles_for(q, r, need, &req_count, left_after);
    for p in profiles {
        if budget.left == 0 {
            return false;
        }
        let sum: usize = p.iter().sum();
        let mut groups = Vec::with_capacity(q + 1);
        let pool = |i: usize| {
            let mut s = req.classes[i].difference(used);
            s.difference_with(req.avoid);
            s.difference_with(reserved);
            s
        };
        groups.push((pool(q), r - sum - req_count[q]));
        for i in 0..q {
            groups.push((pool(i), p[i] - req_count[i]));
        }
        let Some(copy) = find_near_clique(g, required, &groups, budget) else {
            continue;
        };
        for &v in &copy {
            used.insert(v);
        }
        for i in 0..q {
            need[i] -= p[i];
        }
        out.push(copy);
        if plan(g, r, req, c + 1, used, reserved, need, out, budget) {
            return true;
        }
        let copy = out.pop().unwrap();
        for i in 0..q {
            need[i] += p[i];
        }
        for &v in &copy {
            if !reserved.contains(v) {
                used.remove(v);
            }
        }
    }
    false
}

/// Candidate sparse-class profiles for one copy, most balanced first.
fn profiles_for(q: usize, r: usize, need: &[usize], req_count: &[usize], left_after: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p = vec![0usize; q];
    enumerate(0, &mut p, &mut out, &|p: &[usize]| {
        let sum: usize = p.iter().sum();
        if p.iter().filter(|&&x| x == 2).count() > 1 || sum + req_count[q] > r {
            return false;
        }
        if (0..q).any(|i| p[i] < req_count[i] || p[i] > need[i]) {
            return false;
        }
        let rest: Vec<usize> = (0..q).map(|i| need[i] - p[i]).collect();
        let doubles: usize = rest.iter().map(|&x| x.saturating_sub(left_after)).sum();
        rest.iter().all(|&x| x <= 2 * left_after) && doubles <= left_after
    });
    let slots = (left_after + 1) as i64;
    out.sort_by_key(|p| {
        let dev: i64 = p
            .iter()
            .zip(need)
            .map(|(&x, &nd)| {
                let d = x as i64 * slots - nd as i64;
                d * d
            })
            .sum();
        (dev, p.clone())
    });
    out
}

fn enumerate(i: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, ok: &dyn Fn(&[usize]) -> bool) {
    if i == p.len() {
        if ok(p) {
            out.push(p.clone());
        }
        return;
    }
    for v in 0..=2 {
        p[i] = v;
        enumerate(i + 1, p, out, ok);
    }
    p[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{canonical_graph, k_r_minus, CanonicalSpec};
    use crate::solver::{kr_minus_copy, verify_packing, Copy, Packing};

    fn setup(q: usize, n: usize) -> (Graph, Vec<VertexSet>) {
        let g = canonical_graph(&CanonicalSpec::new(4, q, n).unwrap()).unwrap();
        let c = g.label_classes().unwrap();
        (g, c)
    }

    fn check(g: &Graph, classes: &[VertexSet], batch: &[Vec<usize>], need: &[usize]) {
        let copies: Vec<Copy> = batch.iter().map(|c| kr_minus_copy(g, c).unwrap()).collect();
        let p = Packing::new(g.n(), copies);
        assert!(verify_packing(&k_r_minus(4).unwrap(), g, &p, false));
        for (i, &nd) in need.iter().enumerate() {
            let got: usize = batch.iter().map(|c| c.iter().filter(|&&v| classes[i].contains(v)).count()).sum();
            assert_eq!(got, nd);
        }
    }

    #[test]
    fn plain_batch_on_k1_16() {
        let (g, classes) = setup(1, 16);
        let avoid = VertexSet::empty(16);
        let req = BatchRequest {
            classes: &classes,
            anchors: &[],
            need: &[3],
            copies: 2,
            avoid: &avoid,
        };
        let b = build_batch(&g, 4, &req, &mut Budget::new(10_000)).unwrap();
        assert_eq!(b.len(), 2);
        check(&g, &classes, &b, &[3]);
        let from_rest: usize = b.iter().map(|c| c.iter().filter(|&&v| classes[1].contains(v)).count()).sum();
        assert_eq!(from_rest, 5);
    }

    #[test]
    fn anchor_with_two_in_sparse_class() {
        let (g, classes) = setup(1, 16);
        let avoid = VertexSet::empty(16);
        let anchors = vec![vec![0, 1]];
        let req = BatchRequest {
            classes: &classes,
            anchors: &anchors,
            need: &[3],
            copies: 2,
            avoid: &avoid,
        };
        let b = build_batch(&g, 4, &req, &mut Budget::new(10_000)).unwrap();
        assert!(b[0].contains(&0) && b[0].contains(&1));
        check(&g, &classes, &b, &[3]);
    }

    #[test]
    fn full_q_batches() {
        let (g, classes) = setup(2, 16);
        let avoid = VertexSet::empty(16);
        let req = BatchRequest {
            classes: &classes,
            anchors: &[],
            need: &[3, 3],
            copies: 2,
            avoid: &avoid,
        };
        let b = build_batch(&g, 4, &req, &mut Budget::new(10_000)).unwrap();
        check(&g, &classes, &b, &[3, 3]);
    }

    #[test]
    fn impossible_demand_is_stuck() {
        let (g, classes) = setup(1, 16);
        let avoid = VertexSet::empty(16);
        let req = BatchRequest {
            classes: &classes,
            anchors: &[],
            need: &[5],
            copies: 2,
            avoid: &avoid,
        };
        assert!(matches!(
            build_batch(&g, 4, &req, &mut Budget::new(10_000)),
            Err(Error::Stuck { .. })
        ));
    }

    #[test]
    fn near_clique_respects_missing_budget() {
        let g = Graph::empty(5);
        let mut b = Budget::new(1000);
        assert!(find_near_clique(&g, &[], &[(VertexSet::full(5), 2)], &mut b).is_some());
        assert!(find_near_clique(&g, &[], &[(VertexSet::full(5), 3)], &mut b).is_none());
    }
}
