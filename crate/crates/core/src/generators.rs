//! Seeded random instances. Every generator takes a `u64` seed and builds a
//! `ChaCha8Rng` from it, so output is reproducible across platforms.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constructions::{canonical_graph, CanonicalSpec};
use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};
use crate::rational::Rational;
use crate::vertex_set::VertexSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coin(rng: &mut ChaCha8Rng, p: Rational) -> bool {
    let (num, den) = (*p.numer(), *p.denom());
    if num <= 0 {
        return false;
    }
    if num >= den {
        return true;
    }
    rng.gen_ratio(num as u32, den as u32)
}

fn check_rate(p: Rational) -> Result<()> {
    if p < Rational::from_integer(0) || p > Rational::from_integer(1) || *p.denom() > u32::MAX as i64 {
        return Err(Error::BadParameter(format!("probability {p} is not in [0, 1]")));
    }
    Ok(())
}

/// Erdős–Rényi `G(n, p)`.
pub fn gnp(n: usize, p: Rational, seed: u64) -> Result<Graph> {
    check_rate(p)?;
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if coin(&mut rng, p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Complete multipartite graph with each cross edge deleted independently
/// with probability `rate`. Classes are consecutive vertex ranges.
pub fn multipartite_with_deletions(sizes: &[usize], rate: Rational, seed: u64) -> Result<(Graph, Partition)> {
    check_rate(rate)?;
    let full = Graph::complete_multipartite(sizes)?;
    let mut rng = rng(seed);
    let gone: Vec<_> = full.edges().filter(|_| coin(&mut rng, rate)).collect();
    let g = full.with_edges_removed(gone)?;
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
    Ok((g, Partition::new(n, classes)?))
}

/// Flips each vertex pair independently: absent pairs become edges with
/// probability `add`, present ones are deleted with probability `delete`.
pub fn perturb(g: &Graph, add: Rational, delete: Rational, seed: u64) -> Result<Graph> {
    check_rate(add)?;
    check_rate(delete)?;
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for u in 0..g.n() {
        for v in (u + 1)..g.n() {
            let keep = if g.has_edge(u, v) {
                !coin(&mut rng, delete)
            } else {
                coin(&mut rng, add)
            };
            if keep {
                edges.push((u, v));
            }
        }
    }
    let out = Graph::from_edges(g.n(), edges)?;
    match g.labels() {
        Some(l) => out.with_labels(l.to_vec()),
        None => Ok(out),
    }
}

/// A perturbed canonical graph with its sparse classes.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub graph: Graph,
    /// All `q + 1` classes; the first `q` are the sparse ones.
    pub classes: Partition,
    /// `(vertex, target class)` for each planted exceptional vertex.
    pub exceptional: Vec<(usize, usize)>,
}

impl PlantedInstance {
    pub fn sparse_sets(&self) -> Vec<VertexSet> {
        let q = self.classes.len() - 1;
        self.classes.classes()[..q].to_vec()
    }
}

/// `K(q, n)` with `⌊(τ/2)·C(|A_i|, 2)⌋` random edges planted inside each
/// sparse class, then `exceptional` distinct remainder vertices that each
/// lose all but 2 to 5 of their neighbours in one sparse class (edges
/// between planted vertices are kept). A planted vertex looks like a member
/// of that sparse class sitting in the remainder.
pub fn planted_canonical(r: usize, q: usize, n: usize, tau: Rational, exceptional: usize, seed: u64) -> Result<PlantedInstance> {
    let spec = CanonicalSpec::new(r, q, n)?;
    let base = canonical_graph(&spec)?;
    let classes = base.label_classes().expect("canonical graph is labelled");
    let mut rng = rng(seed);

    let mut added = Vec::new();
    for class in &classes[..q] {
        let s = class.len() as i64;
        let count = (tau / 2 * Rational::from_integer(s * (s - 1) / 2)).floor().to_integer() as usize;
        let members = class.to_vec();
        let mut pairs: Vec<(usize, usize)> = members
            .iter()
            .enumerate()
            .flat_map(|(i, &u)| members[i + 1..].iter().map(move |&v| (u, v)))
            .collect();
        pairs.shuffle(&mut rng);
        added.extend(pairs.into_iter().take(count));
    }
    let mut g = base.with_edges_added(added)?;

    let mut order = classes[q].to_vec();
    order.shuffle(&mut rng);
    let chosen = &order[..exceptional.min(order.len())];
    let mut others = VertexSet::full(n);
    for &x in chosen {
        others.remove(x);
    }
    let mut planted = Vec::new();
    for &x in chosen {
        let j = rng.gen_range(0..q);
        // Edges between planted vertices are left alone.
        let mut nbrs = g.neighbors(x).intersection(&classes[j]).intersection(&others).to_vec();
        nbrs.shuffle(&mut rng);
        let keep = rng.gen_range(2..=5).min(nbrs.len());
        let cut: Vec<_> = nbrs[keep..].iter().map(|&y| (x, y)).collect();
        g = g.with_edges_removed(cut)?;
        planted.push((x, j));
    }
    Ok(PlantedInstance {
        graph: g,
        classes: Partition::new(n, classes)?,
        exceptional: planted,
    })
}
