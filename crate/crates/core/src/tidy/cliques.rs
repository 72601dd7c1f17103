use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::vertex_set::VertexSet;

const NODE_CAP: u64 = 1_000_000;

/// Greedily takes `count` disjoint `s`-cliques from `g[a]`. Each clique is
/// grown from the highest-degree remaining vertex, always extending by the
/// candidate with most neighbours among the remaining candidates.
pub fn extract_disjoint_cliques(g: &Graph, a: &VertexSet, s: usize, count: usize) -> Result<Vec<VertexSet>> {
    let mut left = a.clone();
    let mut out = Vec::with_capacity(count);
    let mut nodes = 0u64;
    while out.len() < count {
        let mut starts: Vec<usize> = left.iter().collect();
        starts.sort_by_key(|&v| (std::cmp::Reverse(g.degree_into(v, &left)), v));
        let found = starts.into_iter().find_map(|v| {
            let mut clique = vec![v];
            let cand = g.neighbors(v).intersection(&left);
            grow(g, &mut clique, &cand, s, &mut nodes).then_some(clique)
        });
        match found {
            Some(c) => {
                let set = VertexSet::from_vertices(g.n(), c.iter().copied())?;
                left.difference_with(&set);
                out.push(set);
            }
            None => {
                return Err(Error::Stuck {
                    stage: "cliques",
                    detail: format!("found {} of {count} disjoint {s}-cliques", out.len()),
                })
            }
        }
    }
    Ok(out)
}

fn grow(g: &Graph, clique: &mut Vec<usize>, cand: &VertexSet, s: usize, nodes: &mut u64) -> bool {
    if clique.len() >= s {
        clique.truncate(s);
        return true;
    }
    *nodes += 1;
    if *nodes > NODE_CAP || cand.len() < s - clique.len() {
        return false;
    }
    let mut order: Vec<usize> = cand.iter().collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree_into(v, cand)), v));
    for v in order {
        clique.push(v);
        let next = cand.intersection(g.neighbors(v));
        if grow(g, clique, &next, s, nodes) {
            return true;
        }
        clique.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangles_in_k12() {
        let g = Graph::complete(12);
        let cs = extract_disjoint_cliques(&g, &g.vertex_set(), 3, 4).unwrap();
        assert_eq!(cs.len(), 4);
        let mut all = VertexSet::empty(12);
        for c in &cs {
            assert_eq!(c.len(), 3);
            assert!(c.is_disjoint(&all));
            all.union_with(c);
        }
    }

    #[test]
    fn edgeless_is_stuck() {
        let g = Graph::empty(6);
        assert!(matches!(
            extract_disjoint_cliques(&g, &g.vertex_set(), 2, 1),
            Err(Error::Stuck { .. })
        ));
    }

    #[test]
    fn restricted_to_subset() {
        let g = Graph::complete(6);
        let a = VertexSet::from_vertices(6, [1, 3, 5]).unwrap();
        let cs = extract_disjoint_cliques(&g, &a, 3, 1).unwrap();
        assert_eq!(cs[0], a);
    }
}
