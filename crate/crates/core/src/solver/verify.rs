use thiserror::Error;

use crate::graph::Graph;
use crate::vertex_set::VertexSet;

use super::Packing;

/// Why a packing failed verification.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackingDefect {
    #[error("packing is over {packing} vertices but the host has {host}")]
    HostMismatch { packing: usize, host: usize },
    #[error("copy {copy} maps {got} pattern vertices, pattern has {expected}")]
    WrongSize { copy: usize, got: usize, expected: usize },
    #[error("copy {copy} uses vertex {vertex} outside the host")]
    OutOfRange { copy: usize, vertex: usize },
    #[error("copy {copy} embedding is not injective or disagrees with its vertex set")]
    BadEmbedding { copy: usize },
    #[error("copy {copy} lacks host edge for pattern edge {pattern_edge:?}")]
    MissingEdge { copy: usize, pattern_edge: (usize, usize) },
    #[error("vertex {vertex} is used by more than one copy")]
    Overlap { vertex: usize },
    #[error("{uncovered} host vertices are not covered")]
    NotPerfect { uncovered: usize },
}

/// Full check with a reason on failure.
pub fn check_packing(h: &Graph, g: &Graph, p: &Packing, require_perfect: bool) -> Result<(), PackingDefect> {
    let n = g.n();
    if p.host_n != n {
        return Err(PackingDefect::HostMismatch {
            packing: p.host_n,
            host: n,
        });
    }
    let mut seen = VertexSet::empty(n);
    for (i, c) in p.copies.iter().enumerate() {
        if c.embedding.len() != h.n() {
            return Err(PackingDefect::WrongSize {
                copy: i,
                got: c.embedding.len(),
                expected: h.n(),
            });
        }
        if let Some(&v) = c.embedding.iter().find(|&&v| v >= n) {
            return Err(PackingDefect::OutOfRange { copy: i, vertex: v });
        }
        let mut image = VertexSet::empty(n);
        for &v in &c.embedding {
            image.insert(v);
        }
        if image.len() != h.n() || c.vertices.host_n() != n || image != c.vertices {
            return Err(PackingDefect::BadEmbedding { copy: i });
        }
        if let Some((a, b)) = h.edges().find(|&(a, b)| !g.has_edge(c.embedding[a], c.embedding[b])) {
            return Err(PackingDefect::MissingEdge {
                copy: i,
                pattern_edge: (a, b),
            });
        }
        if let Some(v) = image.intersection(&seen).first() {
            return Err(PackingDefect::Overlap { vertex: v });
        }
        seen.union_with(&image);
    }
    if require_perfect && seen.len() != n {
        return Err(PackingDefect::NotPerfect {
            uncovered: n - seen.len(),
        });
    }
    Ok(())
}

/// True iff copies are disjoint, each hosts `h` under its embedding, and
/// (when `require_perfect`) they cover every vertex of `g`.
pub fn verify_packing(h: &Graph, g: &Graph, p: &Packing, require_perfect: bool) -> bool {
    check_packing(h, g, p, require_perfect).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::k_r_minus;
    use crate::solver::Copy;

    #[test]
    fn valid_perfect() {
        let h = Graph::complete(2);
        let g = Graph::complete(4);
        let p = Packing::new(4, vec![Copy::new(4, vec![0, 1]), Copy::new(4, vec![2, 3])]);
        assert!(verify_packing(&h, &g, &p, true));
    }

    #[test]
    fn overlap_detected() {
        let h = Graph::complete(2);
        let g = Graph::complete(4);
        let p = Packing::new(4, vec![Copy::new(4, vec![0, 1]), Copy::new(4, vec![1, 2])]);
        assert_eq!(check_packing(&h, &g, &p, false), Err(PackingDefect::Overlap { vertex: 1 }));
    }

    #[test]
    fn missing_edge_detected() {
        let h = k_r_minus(4).unwrap();
        let g = Graph::complete(4).with_edges_removed([(2, 3)]).unwrap();
        // Identity embedding needs edge {2,3}.
        let p = Packing::new(4, vec![Copy::new(4, vec![0, 1, 2, 3])]);
        assert_eq!(
            check_packing(&h, &g, &p, true),
            Err(PackingDefect::MissingEdge {
                copy: 0,
                pattern_edge: (2, 3)
            })
        );
    }

    #[test]
    fn not_perfect_and_non_injective() {
        let h = Graph::complete(2);
        let g = Graph::complete(4);
        let p = Packing::new(4, vec![Copy::new(4, vec![0, 1])]);
        assert!(verify_packing(&h, &g, &p, false));
        assert_eq!(check_packing(&h, &g, &p, true), Err(PackingDefect::NotPerfect { uncovered: 2 }));
        let bad = Packing::new(4, vec![Copy::new(4, vec![0, 0])]);
        assert_eq!(check_packing(&h, &g, &bad, false), Err(PackingDefect::BadEmbedding { copy: 0 }));
    }
}
