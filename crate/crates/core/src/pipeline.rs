//! End-to-end packing: detect sparse sets, tidy, pack the remainder with
//! `B₁`, contract the `B₁` copies into an auxiliary multipartite graph,
//! pack that with `H_{q,r−1}` and expand back to `K_r^-` copies.
//!
//! The step with no constructive procedure here (a perfect `B₁`-packing of
//! the remainder) is done by the exact solver. Any
//! stage that gets stuck hands the whole graph to the exact solver instead.

use serde::{Serialize, Serializer};

use crate::constructions::{b1_graph, b1_order, k_r_minus, kr_minus_degree_bound};
use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};
use crate::hall::{default_tau, pack_h_qr, HallOutcome};
use crate::rational::{format_rational, Rational};
use crate::solver::{find_perfect_packing_with, kr_minus_copy, verify_packing, Copy, Packing, SolverConfig};
use crate::tidy::{tidy_with, TidyConfig, TidyResult};
use crate::vertex_set::VertexSet;

/// Thresholds `τ_1 < τ_2 < … < τ_{r−1} < 1/r`; `τ_q` bounds the density
/// of the sparse sets when `q` of them are used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauLadder {
    values: Vec<Rational>,
}

impl Serialize for TauLadder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.values.iter().map(format_rational).collect();
        v.serialize(s)
    }
}

impl TauLadder {
    /// `values[q−1] = τ_q` for `q = 1..=r−1`.
    pub fn new(r: usize, values: Vec<Rational>) -> Result<Self> {
        if r < 4 || values.len() != r - 1 {
            return Err(Error::BadParameter(format!("ladder for r = {r} needs {} values", r.saturating_sub(1))));
        }
        if values[0] <= Rational::from_integer(0) {
            return Err(Error::BadParameter("ladder values must be positive".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadParameter("ladder must be strictly increasing".into()));
        }
        if values[r - 2] >= Rational::new(1, r as i64) {
            return Err(Error::BadParameter("top of ladder must be below 1/r".into()));
        }
        Ok(TauLadder { values })
    }

    /// `τ_{r−1} = 1/(100r)` and `τ_q = τ_{q+1}²`. Once squaring would
    /// overflow the 64-bit denominator, each step halves instead.
    pub fn default_for(r: usize) -> Result<Self> {
        if r < 4 {
            return Err(Error::BadParameter(format!("r must be at least 4, got {r}")));
        }
        let mut values = vec![Rational::new(1, 100 * r as i64)];
        for _ in 1..(r - 1) {
            let top = *values.last().unwrap();
            let d = *top.denom();
            let next = match d.checked_mul(d) {
                Some(dd) => Rational::new(1, dd),
                None => top / 2,
            };
            values.push(next);
        }
        values.reverse();
        Self::new(r, values)
    }

    pub fn tau(&self, q: usize) -> Rational {
        self.values[q - 1]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }
}

/// `⌈(r−1)n/(r(r−2))⌉`.
pub fn sparse_set_size(r: usize, n: usize) -> usize {
    ((r - 1) * n).div_ceil(r * (r - 2))
}

/// Largest `q ≤ r−2` with `q` disjoint sets of size `⌈(r−1)n/(r(r−2))⌉`
/// and density at most `τ_q`, with those sets; `(0, [])` if none.
///
/// Sets are grown one after another from low-degree seeds, always adding
/// the vertex with fewest neighbours in the set, then improved by single
/// swaps. Densities are checked exactly.
pub fn find_sparse_sets(g: &Graph, r: usize, ladder: &TauLadder) -> (usize, Vec<VertexSet>) {
    let n = g.n();
    let size = sparse_set_size(r, n);
    if size < 2 {
        return (0, Vec::new());
    }
    let mut sets: Vec<VertexSet> = Vec::new();
    let mut free = g.vertex_set();
    while sets.len() < r - 2 && free.len() >= size {
        let Some(best) = best_sparse_set(g, &free, size) else { break };
        free.difference_with(&best);
        sets.push(best);
    }
    for q in (1..=sets.len()).rev() {
        let tau = ladder.tau(q);
        if sets[..q].iter().all(|s| g.density_within(s).is_ok_and(|d| d <= tau)) {
            sets.truncate(q);
            return (q, sets);
        }
    }
    (0, Vec::new())
}

const SEEDS: usize = 8;

fn best_sparse_set(g: &Graph, free: &VertexSet, size: usize) -> Option<VertexSet> {
    let mut seeds: Vec<usize> = free.iter().collect();
    seeds.sort_by_key(|&v| (g.degree_into(v, free), v));
    seeds
        .into_iter()
        .take(SEEDS)
        .map(|s| {
            let set = improve(g, free, grow(g, free, s, size));
            (g.edges_within(&set), set)
        })
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .map(|(_, s)| s)
}

fn grow(g: &Graph, free: &VertexSet, seed: usize, size: usize) -> VertexSet {
    let mut set = VertexSet::empty(g.n());
    set.insert(seed);
    while set.len() < size {
        let next = free
            .difference(&set)
            .iter()
            .min_by_key(|&v| (g.degree_into(v, &set), g.degree_into(v, free), v))
            .expect("free has at least `size` vertices");
        set.insert(next);
    }
    set
}

fn improve(g: &Graph, free: &VertexSet, mut set: VertexSet) -> VertexSet {
    for _ in 0..set.len() {
        let mut changed = false;
        let outside = free.difference(&set);
        'scan: for u in set.to_vec() {
            let du = g.degree_into(u, &set);
            if du == 0 {
                continue;
            }
            for w in outside.iter() {
                let mut without = set.clone();
                without.remove(u);
                if g.degree_into(w, &without) < du {
                    set = without;
                    set.insert(w);
                    changed = true;
                    break 'scan;
                }
            }
        }
        if !changed {
            break;
        }
    }
    set
}

/// Perfect `B₁`-packing of `g[a]`, in host coordinates; `Ok(None)` if none.
/// For `q = r−2` the pattern is `r−2` isolated vertices and the packing is
/// read off directly.
pub fn pack_b1_core(g: &Graph, a: &VertexSet, r: usize, q: usize, cfg: &SolverConfig) -> Result<Option<Packing>> {
    let order = b1_order(r, q);
    if a.len() % order != 0 {
        return Err(Error::BadParameter(format!("|A| = {} is not a multiple of |B1| = {order}", a.len())));
    }
    let n = g.n();
    if a.is_empty() {
        return Ok(Some(Packing::new(n, Vec::new())));
    }
    if q == r - 2 {
        let vs = a.to_vec();
        let copies = vs.chunks(order).map(|c| Copy::new(n, c.to_vec())).collect();
        return Ok(Some(Packing::new(n, copies)));
    }
    let b1 = b1_graph(r, q)?;
    let sub = g.induced(a)?;
    let rep = find_perfect_packing_with(&b1, &sub, cfg)?;
    Ok(rep.packing.map(|p| p.lift(&a.to_vec(), n)))
}

/// Where a vertex of the auxiliary graph comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxVertex {
    Host(usize),
    B1Copy(usize),
}

/// `q` classes of host vertices plus one vertex per `B₁` copy. A host
/// vertex is joined to a copy vertex iff it is adjacent to every vertex of
/// that copy; host-host edges are inherited.
#[derive(Debug, Clone)]
pub struct AuxiliaryGraph {
    pub j_graph: Graph,
    /// The `q` left classes, then the class of copy vertices.
    pub classes: Partition,
    pub back_map: Vec<AuxVertex>,
    pub b1_copies: Packing,
}

pub fn build_auxiliary(g: &Graph, p: &Partition, b1pack: &Packing, r: usize) -> Result<AuxiliaryGraph> {
    let q = p.len() - 1;
    let mut back_map = Vec::new();
    let mut sizes = Vec::new();
    for class in &p.classes()[..q] {
        back_map.extend(class.iter().map(AuxVertex::Host));
        sizes.push(class.len());
    }
    let copies = b1pack.len();
    back_map.extend((0..copies).map(AuxVertex::B1Copy));
    sizes.push(copies);
    if let Some(i) = (0..q).find(|&i| sizes[i] != (r - 1) * copies) {
        return Err(Error::Internal(format!(
            "left class {i} has {} vertices but there are {copies} B1 copies",
            sizes[i]
        )));
    }
    let m = back_map.len();
    let common: Vec<VertexSet> = b1pack
        .copies
        .iter()
        .map(|c| {
            let mut s = VertexSet::full(g.n());
            for v in c.vertices.iter() {
                s.intersect_with(g.neighbors(v));
            }
            s
        })
        .collect();
    let mut edges = Vec::new();
    for a in 0..m {
        for b in (a + 1)..m {
            let adjacent = match (back_map[a], back_map[b]) {
                (AuxVertex::Host(u), AuxVertex::Host(v)) => g.has_edge(u, v),
                (AuxVertex::Host(u), AuxVertex::B1Copy(c)) | (AuxVertex::B1Copy(c), AuxVertex::Host(u)) => {
                    common[c].contains(u)
                }
                (AuxVertex::B1Copy(_), AuxVertex::B1Copy(_)) => false,
            };
            if adjacent {
                edges.push((a, b));
            }
        }
    }
    let j_graph = Graph::from_edges(m, edges)?;
    let mut lo = 0;
    let classes = sizes
        .iter()
        .map(|&s| {
            let c = VertexSet::range(m, lo, lo + s);
            lo += s;
            c
        })
        .collect();
    Ok(AuxiliaryGraph {
        j_graph,
        classes: Partition::new(m, classes)?,
        back_map,
        b1_copies: b1pack.clone(),
    })
}

/// Turns each `H_{q,r−1}` copy of `J` into `r − 2` copies of `K_r^-`: the
/// `i`-th `K_{r−q−1}` of the `B₁` copy takes two vertices of class `i` and
/// one of every other class, each `K_{r−q}^-` takes one vertex per class.
pub fn expand_packing(g: &Graph, aux: &AuxiliaryGraph, jpack: &Packing, r: usize, q: usize) -> Result<Packing> {
    let s = r - q - 1;
    let side = r - 1;
    let host = |v: usize| match aux.back_map[v] {
        AuxVertex::Host(u) => Ok(u),
        AuxVertex::B1Copy(_) => Err(Error::Internal("copy vertex in a left slot".into())),
    };
    let mut out = Vec::new();
    for jc in &jpack.copies {
        let e = &jc.embedding;
        if e.len() != q * side + 1 {
            return Err(Error::Internal("auxiliary copy has the wrong order".into()));
        }
        let AuxVertex::B1Copy(b) = aux.back_map[e[q * side]] else {
            return Err(Error::Internal("singleton slot is not a B1 copy".into()));
        };
        let b1 = &aux.b1_copies.copies[b].embedding;
        let classes: Vec<Vec<usize>> = (0..q)
            .map(|i| e[i * side..(i + 1) * side].iter().map(|&v| host(v)).collect())
            .collect::<Result<_>>()?;
        let mut cursor = vec![0usize; q];
        let take = |i: usize, cursor: &mut Vec<usize>| {
            let v = classes[i][cursor[i]];
            cursor[i] += 1;
            v
        };
        let mut groups = Vec::new();
        for c in 0..q {
            let mut verts: Vec<usize> = b1[c * s..(c + 1) * s].to_vec();
            for i in 0..q {
                verts.push(take(i, &mut cursor));
                if i == c {
                    verts.push(take(i, &mut cursor));
                }
            }
            groups.push(verts);
        }
        for j in 0..(r - q - 2) {
            let lo = q * s + j * (s + 1);
            let mut verts: Vec<usize> = b1[lo..lo + s + 1].to_vec();
            for i in 0..q {
                verts.push(take(i, &mut cursor));
            }
            groups.push(verts);
        }
        for verts in groups {
            let copy = kr_minus_copy(g, &verts)
                .ok_or_else(|| Error::Internal(format!("expanded set {verts:?} is not a K_r^- copy")))?;
            out.push(copy);
        }
    }
    Ok(Packing::new(g.n(), out))
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub ladder: Option<TauLadder>,
    pub solver: SolverConfig,
    pub tidy: TidyConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            ladder: None,
            solver: SolverConfig::default(),
            tidy: TidyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Packed,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelinePath {
    /// The structural route produced the packing.
    Pipeline,
    /// A stage got stuck and the exact solver decided the whole graph.
    Fallback,
    /// No sparse sets: the exact solver was used from the start.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageEvent {
    pub stage: &'static str,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineOutcome {
    pub decision: Decision,
    pub path: PipelinePath,
    pub packing: Option<Packing>,
    pub q: usize,
    pub stage_trace: Vec<StageEvent>,
    #[serde(skip)]
    pub tidy: Option<TidyResult>,
}

struct Trace(Vec<StageEvent>);

impl Trace {
    fn ok(&mut self, stage: &'static str, detail: impl Into<String>) {
        self.0.push(StageEvent {
            stage,
            ok: true,
            detail: detail.into(),
        });
    }

    fn fail(&mut self, stage: &'static str, detail: impl Into<String>) {
        self.0.push(StageEvent {
            stage,
            ok: false,
            detail: detail.into(),
        });
    }
}

/// Decides whether `g` has a perfect `K_r^-`-packing and returns one if so.
///
/// Only a solver timeout is an error; every other failure along the
/// structural route falls back to the exact solver on `g`.
pub fn run_pipeline(g: &Graph, r: usize, cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let n = g.n();
    if r < 4 || n == 0 || n % r != 0 {
        return Err(Error::BadParameter(format!("need r >= 4 and r | n, got r = {r}, n = {n}")));
    }
    let ladder = match &cfg.ladder {
        Some(l) if l.values().len() == r - 1 => l.clone(),
        Some(_) => return Err(Error::BadParameter(format!("ladder must have {} values", r - 1))),
        None => TauLadder::default_for(r)?,
    };
    let mut trace = Trace(Vec::new());
    let bound = kr_minus_degree_bound(r, n);
    let delta = g.min_degree()?;
    if delta < bound {
        trace.fail("min_degree", format!("minimum degree {delta} is below {bound}"));
    } else {
        trace.ok("min_degree", format!("minimum degree {delta} >= {bound}"));
    }

    let (q, sets) = find_sparse_sets(g, r, &ladder);
    trace.ok("sparse_sets", format!("q = {q}"));
    if q == 0 {
        return direct(g, r, cfg, trace, PipelinePath::Direct, 0, None);
    }
    match structural(g, r, q, &sets, ladder.tau(q), cfg, &mut trace) {
        Ok((packing, tidy)) => Ok(PipelineOutcome {
            decision: Decision::Packed,
            path: PipelinePath::Pipeline,
            packing: Some(packing),
            q,
            stage_trace: trace.0,
            tidy: Some(tidy),
        }),
        Err(tidy) => direct(g, r, cfg, trace, PipelinePath::Fallback, q, tidy),
    }
}

fn direct(
    g: &Graph,
    r: usize,
    cfg: &PipelineConfig,
    mut trace: Trace,
    path: PipelinePath,
    q: usize,
    tidy: Option<TidyResult>,
) -> Result<PipelineOutcome> {
    let rep = find_perfect_packing_with(&k_r_minus(r)?, g, &cfg.solver)?;
    trace.ok(
        "solver",
        format!("{} copies, {} nodes", rep.copies_considered, rep.nodes_explored),
    );
    Ok(PipelineOutcome {
        decision: if rep.packing.is_some() {
            Decision::Packed
        } else {
            Decision::Absent
        },
        path,
        packing: rep.packing,
        q,
        stage_trace: trace.0,
        tidy,
    })
}

/// The structural route; `Err` carries the tidy result (if any) for the fallback.
fn structural(
    g: &Graph,
    r: usize,
    q: usize,
    sets: &[VertexSet],
    tau: Rational,
    cfg: &PipelineConfig,
    trace: &mut Trace,
) -> std::result::Result<(Packing, TidyResult), Option<TidyResult>> {
    let tidy = match tidy_with(g, sets, r, tau, &cfg.tidy) {
        Ok(t) => t,
        Err(e) => {
            trace.fail("tidy", e.to_string());
            return Err(None);
        }
    };
    trace.ok(
        "tidy",
        format!("n* = {}, {} copies removed", tidy.n_star, tidy.removed.len()),
    );
    let mut copies = tidy.removed.copies.clone();
    if tidy.n_star > 0 {
        let remainder = tidy.classes.class(q).clone();
        let b1 = match pack_b1_core(g, &remainder, r, q, &cfg.solver) {
            Ok(Some(p)) => p,
            Ok(None) => {
                trace.fail("b1_core", "no perfect B1-packing of the remainder");
                return Err(Some(tidy));
            }
            Err(e) => {
                trace.fail("b1_core", e.to_string());
                return Err(Some(tidy));
            }
        };
        trace.ok("b1_core", format!("{} copies of B1", b1.len()));
        let aux = match build_auxiliary(g, &tidy.classes, &b1, r) {
            Ok(a) => a,
            Err(e) => {
                trace.fail("auxiliary", e.to_string());
                return Err(Some(tidy));
            }
        };
        trace.ok("auxiliary", format!("J has {} vertices", aux.j_graph.n()));
        let hall = match pack_h_qr(&aux.j_graph, &aux.classes, q, r - 1, default_tau(q, r - 1)) {
            Ok(h) => h,
            Err(e) => {
                trace.fail("hall", e.to_string());
                return Err(Some(tidy));
            }
        };
        let jpack = match hall.outcome {
            HallOutcome::Packed { packing } => packing,
            HallOutcome::Absent { failure } => {
                trace.fail("hall", format!("matching fails at level {}", failure.level));
                return Err(Some(tidy));
            }
        };
        trace.ok("hall", format!("{} copies of H(q, r-1)", jpack.len()));
        match expand_packing(g, &aux, &jpack, r, q) {
            Ok(p) => copies.extend(p.copies),
            Err(e) => {
                trace.fail("expand", e.to_string());
                return Err(Some(tidy));
            }
        }
    }
    let packing = Packing::new(g.n(), copies);
    let h = k_r_minus(r).expect("r >= 4");
    if !verify_packing(&h, g, &packing, true) {
        trace.fail("verify", "merged packing failed verification");
        return Err(Some(tidy));
    }
    trace.ok("verify", format!("{} copies", packing.len()));
    Ok((packing, tidy))
}

/// `(n, ⌈(1 − 1/χ_cr(K_r^-))n⌉)` for every multiple `n` of `r` up to `n_max`.
pub fn threshold_table(r: usize, n_max: usize) -> Result<Vec<(usize, usize)>> {
    if r < 4 {
        return Err(Error::BadParameter(format!("r must be at least 4, got {r}")));
    }
    Ok((1..=n_max / r).map(|k| (k * r, kr_minus_degree_bound(r, k * r))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{bottle_graph, canonical_graph, prop3_extremal, CanonicalSpec};

    #[test]
    fn default_ladder() {
        let l = TauLadder::default_for(4).unwrap();
        assert_eq!(l.tau(3), Rational::new(1, 400));
        assert_eq!(l.tau(2), Rational::new(1, 160_000));
        assert_eq!(l.tau(1), Rational::new(1, 25_600_000_000));
        let l8 = TauLadder::default_for(8).unwrap();
        assert!(l8.values().windows(2).all(|w| w[0] < w[1]));
        assert!(TauLadder::new(4, vec![Rational::new(1, 10), Rational::new(1, 20), Rational::new(1, 30)]).is_err());
    }

    #[test]
    fn sparse_sets_of_canonical_graphs() {
        let ladder = TauLadder::default_for(4).unwrap();
        for q in [1, 2] {
            let g = canonical_graph(&CanonicalSpec::new(4, q, 16).unwrap()).unwrap();
            let (got, sets) = find_sparse_sets(&g, 4, &ladder);
            assert_eq!(got, q);
            let classes = g.label_classes().unwrap();
            for s in &sets {
                assert!(classes[..q].contains(s));
            }
        }
        let (q, _) = find_sparse_sets(&prop3_extremal(4, 3).unwrap(), 4, &ladder);
        assert!(q >= 1);
        let (q, _) = find_sparse_sets(&Graph::complete(16), 4, &ladder);
        assert_eq!(q, 0);
    }

    #[test]
    fn b1_core_cases() {
        let cfg = SolverConfig::default();
        let g = Graph::complete(6);
        let trivial = pack_b1_core(&g, &VertexSet::range(6, 0, 4), 4, 2, &cfg).unwrap().unwrap();
        assert_eq!(trivial.len(), 2);
        // r = 4, q = 1: B1 = K2 + P3.
        let k = pack_b1_core(&Graph::complete(10), &VertexSet::full(10), 4, 1, &cfg).unwrap().unwrap();
        assert_eq!(k.len(), 2);
        assert!(pack_b1_core(&Graph::empty(5), &VertexSet::full(5), 4, 1, &cfg).unwrap().is_none());
    }

    #[test]
    fn pipeline_on_canonical_graphs() {
        for (q, n) in [(1, 8), (1, 16), (2, 16), (1, 40)] {
            let g = canonical_graph(&CanonicalSpec::new(4, q, n).unwrap()).unwrap();
            let out = run_pipeline(&g, 4, &PipelineConfig::default()).unwrap();
            assert_eq!(out.decision, Decision::Packed, "q={q} n={n}");
            assert_eq!(out.path, PipelinePath::Pipeline, "q={q} n={n}: {:?}", out.stage_trace);
            assert!(verify_packing(&k_r_minus(4).unwrap(), &g, out.packing.as_ref().unwrap(), true));
        }
    }

    #[test]
    fn pipeline_on_extremal_and_bottle() {
        let g = prop3_extremal(4, 3).unwrap();
        let out = run_pipeline(&g, 4, &PipelineConfig::default()).unwrap();
        assert_eq!(out.decision, Decision::Absent);
        let b = bottle_graph(&k_r_minus(4).unwrap()).unwrap();
        let out = run_pipeline(&b, 4, &PipelineConfig::default()).unwrap();
        assert_eq!(out.decision, Decision::Packed);
    }

    #[test]
    fn threshold_rows() {
        assert_eq!(threshold_table(4, 16).unwrap(), vec![(4, 3), (8, 5), (12, 8), (16, 10)]);
    }
}
