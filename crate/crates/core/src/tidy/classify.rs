use serde::Serialize;

use crate::graph::{Graph, Partition};
use crate::rational::{at_least_tau_power, at_most_tau_power, Rational};
use crate::vertex_set::VertexSet;

/// Per-vertex flags relative to the current classes, for threshold `tau`.
///
/// With `A_i` the class of `x` and `d_j = |N(x) ∩ A_j|`:
/// bad iff `d_i ≥ τ^{1/3}|A_i|`; useless iff `d_j ≤ (1−τ^{1/4})|A_j|` for
/// some `j ≠ i`; `j`-exceptional iff `d_j ≤ τ^{1/3}|A_j|`. Empty classes
/// never trigger a flag, and badness is only defined for the sparse classes
/// (the remainder class is dense by design).
#[derive(Debug, Clone, Serialize)]
pub struct VertexClassification {
    #[serde(with = "crate::rational::serde_ratio")]
    pub tau: Rational,
    #[serde(skip)]
    pub class_of: Vec<Option<usize>>,
    /// `neighbours[x][j] = |N(x) ∩ A_j|` for classified `x`.
    #[serde(skip)]
    pub neighbours: Vec<Vec<usize>>,
    pub bad: VertexSet,
    pub useless: VertexSet,
    /// Classes `x` is exceptional for, ascending.
    #[serde(skip)]
    pub exceptional: Vec<Vec<usize>>,
    pub counts: Vec<ClassCounts>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub size: usize,
    pub bad: usize,
    pub useless: usize,
    pub exceptional: usize,
}

impl VertexClassification {
    pub fn is_bad(&self, x: usize) -> bool {
        self.bad.contains(x)
    }

    pub fn is_useless(&self, x: usize) -> bool {
        self.useless.contains(x)
    }

    /// The lowest class `x` is exceptional for.
    pub fn exceptional_target(&self, x: usize) -> Option<usize> {
        self.exceptional[x].first().copied()
    }

    /// Exceptional vertices ordered by class, then index.
    pub fn exceptional_vertices(&self) -> Vec<usize> {
        self.ordered(|x| !self.exceptional[x].is_empty())
    }

    /// Useless vertices ordered by class, then index.
    pub fn useless_vertices(&self) -> Vec<usize> {
        self.ordered(|x| self.useless.contains(x))
    }

    fn ordered(&self, keep: impl Fn(usize) -> bool) -> Vec<usize> {
        let mut v: Vec<(usize, usize)> = (0..self.class_of.len())
            .filter_map(|x| self.class_of[x].map(|c| (c, x)))
            .filter(|&(_, x)| keep(x))
            .collect();
        v.sort_unstable();
        v.into_iter().map(|(_, x)| x).collect()
    }

    /// Number of flags raised on `x` when it sits in `class` of `classes`.
    pub(crate) fn flag_score(g: &Graph, classes: &[VertexSet], x: usize, class: usize, tau: &Rational) -> usize {
        let mut score = 0;
        for (j, cj) in classes.iter().enumerate() {
            if cj.is_empty() {
                continue;
            }
            let mut members = cj.clone();
            members.remove(x);
            let d = g.degree_into(x, &members);
            let size = members.len() + usize::from(j == class);
            if j == class {
                if class + 1 < classes.len() {
                    score += usize::from(at_least_tau_power(d, tau, 1, 3, size));
                }
            } else {
                score += usize::from(at_least_tau_power(size - d, tau, 1, 4, size));
                score += usize::from(at_most_tau_power(d, tau, 1, 3, size));
            }
        }
        score
    }
}

/// Flags for every vertex covered by `p`. The last class plays the role of
/// the remainder `A_{q+1}`; the per-class count bounds (`τ^{2/3}|A_i|` bad
/// and useless vertices) are reported as warnings.
pub fn classify(g: &Graph, p: &Partition, tau: Rational) -> VertexClassification {
    classify_classes(g, p.classes(), tau)
}

pub(crate) fn classify_classes(g: &Graph, classes: &[VertexSet], tau: Rational) -> VertexClassification {
    let n = g.n();
    let mut class_of = vec![None; n];
    for (i, c) in classes.iter().enumerate() {
        for v in c.iter() {
            class_of[v] = Some(i);
        }
    }
    let mut neighbours = vec![Vec::new(); n];
    let mut bad = VertexSet::empty(n);
    let mut useless = VertexSet::empty(n);
    let mut exceptional = vec![Vec::new(); n];
    let mut counts = vec![ClassCounts::default(); classes.len()];
    let last = classes.len().saturating_sub(1);
    for x in 0..n {
        let Some(i) = class_of[x] else { continue };
        let d: Vec<usize> = classes.iter().map(|c| g.degree_into(x, c)).collect();
        counts[i].size += 1;
        if i < last && at_least_tau_power(d[i], &tau, 1, 3, classes[i].len()) {
            bad.insert(x);
            counts[i].bad += 1;
        }
        for (j, cj) in classes.iter().enumerate() {
            if j == i || cj.is_empty() {
                continue;
            }
            if at_least_tau_power(cj.len() - d[j], &tau, 1, 4, cj.len()) {
                useless.insert(x);
            }
            if at_most_tau_power(d[j], &tau, 1, 3, cj.len()) {
                exceptional[x].push(j);
            }
        }
        counts[i].useless += usize::from(useless.contains(x));
        counts[i].exceptional += usize::from(!exceptional[x].is_empty());
        neighbours[x] = d;
    }

    let mut warnings = Vec::new();
    for (i, c) in counts.iter().enumerate() {
        let limit_exceeded = |k: usize| !at_most_tau_power(k, &tau, 2, 3, c.size);
        if i < last && limit_exceeded(c.bad) {
            warnings.push(format!("class {i}: {} bad vertices exceeds tau^(2/3)|A_i|", c.bad));
        }
        if limit_exceeded(c.useless) {
            warnings.push(format!("class {i}: {} useless vertices exceeds tau^(2/3)|A_i|", c.useless));
        }
    }
    VertexClassification {
        tau,
        class_of,
        neighbours,
        bad,
        useless,
        exceptional,
        counts,
        warnings,
    }
}

/// One exchange of an `i`-bad `x ∈ A_i` with an `i`-exceptional `y ∈ A_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Swap {
    pub bad: usize,
    pub bad_class: usize,
    pub exceptional: usize,
    pub exceptional_class: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SwapOutcome {
    #[serde(skip)]
    pub partition: Partition,
    pub swaps: Vec<Swap>,
    /// Vertices breaking the relaxed post-swap bounds
    /// (`2τ^{1/3}`, `1−2τ^{1/4}`, `τ^{1/3}/2`).
    pub relaxed_violations: usize,
}

/// Greedy maximal set of bad/exceptional exchanges, lowest class and then
/// lowest indices first. A pair is only exchanged if it lowers the total
/// number of flags on the two vertices, so a swap never makes either
/// vertex worse placed.
pub fn swap_bad_exceptional(g: &Graph, p: &Partition, c: &VertexClassification) -> SwapOutcome {
    let mut classes = p.classes().to_vec();
    let mut used = VertexSet::empty(g.n());
    let mut swaps = Vec::new();
    for i in 0..classes.len() {
        let bads: Vec<usize> = classes[i].iter().filter(|&x| c.is_bad(x)).collect();
        for x in bads {
            if used.contains(x) {
                continue;
            }
            let partner = (0..g.n()).find(|&y| {
                !used.contains(y)
                    && c.class_of[y].is_some_and(|j| j != i)
                    && c.exceptional[y].contains(&i)
                    && {
                        let j = c.class_of[y].unwrap();
                        let before = VertexClassification::flag_score(g, &classes, x, i, &c.tau)
                            + VertexClassification::flag_score(g, &classes, y, j, &c.tau);
                        let mut trial = classes.clone();
                        exchange(&mut trial, x, i, y, j);
                        let after = VertexClassification::flag_score(g, &trial, x, j, &c.tau)
                            + VertexClassification::flag_score(g, &trial, y, i, &c.tau);
                        after < before
                    }
            });
            if let Some(y) = partner {
                let j = c.class_of[y].unwrap();
                exchange(&mut classes, x, i, y, j);
                used.insert(x);
                used.insert(y);
                swaps.push(Swap {
                    bad: x,
                    bad_class: i,
                    exceptional: y,
                    exceptional_class: j,
                });
            }
        }
    }
    let relaxed_violations = relaxed_violations(g, &classes, c);
    SwapOutcome {
        partition: Partition::new(g.n(), classes).expect("swaps keep classes disjoint"),
        swaps,
        relaxed_violations,
    }
}

fn exchange(classes: &mut [VertexSet], x: usize, i: usize, y: usize, j: usize) {
    classes[i].remove(x);
    classes[j].insert(x);
    classes[j].remove(y);
    classes[i].insert(y);
}

fn relaxed_violations(g: &Graph, classes: &[VertexSet], c: &VertexClassification) -> usize {
    let tau = &c.tau;
    let mut bad_count = 0;
    for (i, ci) in classes.iter().enumerate() {
        for x in ci.iter() {
            let mut ok = true;
            let own = g.degree_into(x, ci);
            if i + 1 < classes.len() && !c.is_bad(x) && !at_most_tau_power(own, tau, 1, 3, 2 * ci.len()) {
                ok = false;
            }
            for (j, cj) in classes.iter().enumerate() {
                if j == i || cj.is_empty() {
                    continue;
                }
                let d = g.degree_into(x, cj);
                if !c.is_useless(x) && !at_most_tau_power(cj.len() - d, tau, 1, 4, 2 * cj.len()) {
                    ok = false;
                }
                if !c.exceptional[x].contains(&j) && !at_least_tau_power(2 * d, tau, 1, 3, cj.len()) {
                    ok = false;
                }
            }
            bad_count += usize::from(!ok);
        }
    }
    bad_count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{canonical_graph, CanonicalSpec};

    fn canonical(q: usize, n: usize) -> (Graph, Partition) {
        let g = canonical_graph(&CanonicalSpec::new(4, q, n).unwrap()).unwrap();
        let p = Partition::new(n, g.label_classes().unwrap()).unwrap();
        (g, p)
    }

    #[test]
    fn clean_canonical_has_no_flags() {
        let (g, p) = canonical(1, 16);
        let c = classify(&g, &p, Rational::new(1, 100));
        assert!(c.bad.is_empty() && c.useless.is_empty());
        assert!(c.exceptional_vertices().is_empty());
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn rewired_vertex_is_exceptional_and_useless() {
        let (g, p) = canonical(1, 16);
        // Vertex 0 is in A_1 (6 vertices); cut it from all of A_2.
        let cut: Vec<_> = p.class(1).iter().map(|y| (0, y)).collect();
        let g = g.with_edges_removed(cut).unwrap();
        let c = classify(&g, &p, Rational::new(1, 100));
        assert_eq!(c.exceptional_target(0), Some(1));
        assert!(c.is_useless(0));
        assert_eq!(c.exceptional_vertices(), vec![0]);
    }

    #[test]
    fn swap_pairs_bad_with_exceptional() {
        let (g, p) = canonical(1, 16);
        // Make vertex 0 of A_1 adjacent to the rest of A_1 (bad) and cut it
        // from A_2, and cut vertex 6 of A_2 from A_1 (1-exceptional).
        let g = g.with_edges_added((1..6).map(|v| (0, v))).unwrap();
        let g = g.with_edges_removed(p.class(1).iter().map(|y| (0, y))).unwrap();
        let g = g.with_edges_removed(p.class(0).iter().map(|x| (6, x))).unwrap();
        let c = classify(&g, &p, Rational::new(1, 100));
        assert!(c.is_bad(0));
        assert_eq!(c.exceptional_target(6), Some(0));
        let out = swap_bad_exceptional(&g, &p, &c);
        assert_eq!(out.swaps.len(), 1);
        assert!(out.partition.class(1).contains(0));
        assert!(out.partition.class(0).contains(6));
    }

    #[test]
    fn no_bad_vertices_means_identity() {
        let (g, p) = canonical(2, 16);
        let c = classify(&g, &p, Rational::new(1, 100));
        let out = swap_bad_exceptional(&g, &p, &c);
        assert!(out.swaps.is_empty());
        assert_eq!(out.partition, p);
    }
}
