//! Cleanup of a graph that is close to the extremal configuration.
//!
//! Given `q` sparse sets, removes a few disjoint `K_r^-` copies (always in
//! batches that keep the class proportions) and relocates a few vertices so
//! that what is left is a near-complete multipartite core with canonical
//! class sizes. Each step is appended to a trace.

mod batch;
mod classify;
mod cliques;

use std::collections::VecDeque;

use serde::{Serialize, Serializer};

use crate::constructions::k_r_minus;
use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};
use crate::rational::{at_least_tau_power, at_most_tau_power, Rational};
use crate::solver::{kr_minus_copy, verify_packing, Packing};
use crate::vertex_set::VertexSet;

use batch::{build_batch, find_near_clique, BatchRequest, Budget};
pub use classify::{classify, swap_bad_exceptional, ClassCounts, Swap, SwapOutcome, VertexClassification};
use classify::classify_classes;
pub use cliques::extract_disjoint_cliques;

#[derive(Debug, Clone)]
pub struct TidyConfig {
    /// Search nodes allowed per batch of copies.
    pub batch_nodes: u64,
}

impl Default for TidyConfig {
    fn default() -> Self {
        TidyConfig {
            batch_nodes: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchReason {
    Exceptional,
    Relocation,
    Useless,
    Final,
}

impl BatchReason {
    fn stage(self) -> &'static str {
        match self {
            BatchReason::Exceptional => "exceptional",
            BatchReason::Relocation => "relocation",
            BatchReason::Useless => "useless",
            BatchReason::Final => "final",
        }
    }
}

/// Class indices are 0-based; class `q` is the remainder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Warning {
        detail: String,
    },
    Adjusted {
        k: usize,
        moved: Vec<usize>,
    },
    Classified {
        phase: &'static str,
        counts: Vec<ClassCounts>,
        warnings: Vec<String>,
    },
    Swapped(Swap),
    CliqueReservoir {
        clique_size: usize,
        requested: usize,
        found_all: bool,
    },
    Matching {
        class: usize,
        edges: Vec<(usize, usize)>,
    },
    Moved {
        vertex: usize,
        from: usize,
        to: usize,
    },
    Batch {
        reason: BatchReason,
        anchors: Vec<usize>,
        copies: Vec<Vec<usize>>,
    },
}

/// Output of [`tidy`]: the core classes, the removed copies and the trace.
#[derive(Debug, Clone, Serialize)]
pub struct TidyResult {
    pub r: usize,
    pub q: usize,
    #[serde(with = "crate::rational::serde_ratio")]
    pub tau: Rational,
    pub n: usize,
    pub n_star: usize,
    pub k: usize,
    /// `A_1*, …, A_{q+1}*` in host coordinates.
    #[serde(serialize_with = "partition_lists")]
    pub classes: Partition,
    pub removed: Packing,
    /// The core `G*`; its vertex `i` is host vertex `star_vertices[i]`.
    #[serde(skip)]
    pub g_star: Graph,
    #[serde(skip)]
    pub star_vertices: Vec<usize>,
    pub trace: Vec<TraceEvent>,
}

fn partition_lists<S: Serializer>(p: &Partition, s: S) -> std::result::Result<S::Ok, S::Error> {
    p.to_lists().serialize(s)
}

/// Each postcondition of [`tidy`], evaluated exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TidyCheck {
    /// `r(r−2) | n*`.
    pub divisible: bool,
    /// Removed copies are disjoint copies of `K_r^-` in `G`.
    pub removed_copies_valid: bool,
    /// Removed copies cover exactly the vertices outside the core.
    pub removed_cover_complement: bool,
    /// `n − n* ≤ τ^{1/3} n`.
    pub removal_within_budget: bool,
    /// `|A_i*| = (r−1)n*/(r(r−2))` for every sparse class.
    pub proportions: bool,
    /// Every vertex of `A_i*` has at least `(1−τ^{1/5})|A_j*|` neighbours in each other `A_j*`.
    pub cross_degrees: bool,
}

impl TidyCheck {
    pub fn holds(&self) -> bool {
        self.divisible
            && self.removed_copies_valid
            && self.removed_cover_complement
            && self.removal_within_budget
            && self.proportions
            && self.cross_degrees
    }
}

impl TidyResult {
    pub fn check(&self, g: &Graph) -> TidyCheck {
        let r = self.r;
        let block = r * (r - 2);
        let h = k_r_minus(r).expect("r >= 4");
        let core = self.classes.covered();
        let gone = self.removed.covered();
        let removed_cover_complement = core.is_disjoint(&gone) && core.union(&gone) == VertexSet::full(g.n());
        let sparse = (r - 1) * self.n_star;
        let proportions = sparse % block == 0
            && self.classes.classes()[..self.q]
                .iter()
                .all(|c| c.len() == sparse / block);
        let cross_degrees = self.classes.classes().iter().enumerate().all(|(i, ci)| {
            ci.iter().all(|x| {
                self.classes.classes().iter().enumerate().all(|(j, cj)| {
                    j == i || at_most_tau_power(cj.len() - g.degree_into(x, cj), &self.tau, 1, 5, cj.len())
                })
            })
        });
        TidyCheck {
            divisible: self.n_star % block == 0,
            removed_copies_valid: self.removed.host_n == g.n() && verify_packing(&h, g, &self.removed, false),
            removed_cover_complement,
            removal_within_budget: at_most_tau_power(self.n - self.n_star, &self.tau, 1, 3, self.n),
            proportions,
            cross_degrees,
        }
    }
}

fn sparse_target(r: usize, n: usize) -> usize {
    ((r - 1) * n).div_ceil(r * (r - 2))
}

/// Shrinks the sparse classes so that they come from canonical classes of
/// `n' = n − kr` by adding `kr` vertices. Returns the new classes and `k`.
///
/// `p` holds `q` sparse classes followed by the remainder. When `0 < k < q`, the
/// vertex of largest internal degree (lowest index on ties) of each class
/// `A_i`, `k < i ≤ q`, moves to the remainder.
pub fn adjust_for_divisibility(g: &Graph, p: &Partition, r: usize) -> Result<(Partition, usize)> {
    adjust(g, p, r).map(|(p, k, _)| (p, k))
}

fn adjust(g: &Graph, p: &Partition, r: usize) -> Result<(Partition, usize, Vec<usize>)> {
    let n = g.n();
    if r < 4 {
        return Err(Error::BadParameter(format!("r must be at least 4, got {r}")));
    }
    if n == 0 || n % r != 0 {
        return Err(Error::BadParameter(format!("n = {n} is not a positive multiple of r = {r}")));
    }
    if p.host_n() != n || !p.covers_host() || p.len() < 2 {
        return Err(Error::BadParameter("classes must partition the host into q + 1 >= 2 sets".into()));
    }
    let q = p.len() - 1;
    let target = sparse_target(r, n);
    if let Some(i) = (0..q).find(|&i| p.class(i).len() != target) {
        return Err(Error::BadParameter(format!(
            "sparse class {i} has {} vertices, expected {target}",
            p.class(i).len()
        )));
    }
    let k = (n % (r * (r - 2))) / r;
    let mut classes = p.classes().to_vec();
    let mut moved = Vec::new();
    let shift = if k == 0 { q } else { k.min(q) };
    for i in shift..q {
        let v = classes[i]
            .iter()
            .max_by_key(|&v| (g.degree_into(v, &classes[i]), std::cmp::Reverse(v)))
            .expect("sparse classes are non-empty");
        classes[i].remove(v);
        classes[q].insert(v);
        moved.push(v);
    }
    Ok((Partition::new(n, classes)?, k, moved))
}

/// Runs the cleanup with the default configuration.
pub fn tidy(g: &Graph, sparse_sets: &[VertexSet], r: usize, tau: Rational) -> Result<TidyResult> {
    tidy_with(g, sparse_sets, r, tau, &TidyConfig::default())
}

/// Cleanup in the order: divisibility adjustment, classification, swaps,
/// removal of exceptional vertices, relocation of vertices with few
/// neighbours in the remainder, removal of the remaining useless vertices,
/// and `k` final copies restoring canonical sizes.
///
/// Sparse sets must have size `⌈(r−1)n/(r(r−2))⌉` and density at most
/// `tau`; a minimum degree below `(1 − (r−1)/(r(r−2)))n` only raises a
/// warning in the trace.
pub fn tidy_with(g: &Graph, sparse_sets: &[VertexSet], r: usize, tau: Rational, cfg: &TidyConfig) -> Result<TidyResult> {
    let n = g.n();
    if tau <= Rational::from_integer(0) || tau >= Rational::from_integer(1) {
        return Err(Error::BadParameter(format!("tau must lie in (0, 1), got {tau}")));
    }
    let q = sparse_sets.len();
    if r < 4 || q < 1 || q > r - 2 {
        return Err(Error::BadParameter(format!("need r >= 4 and 1 <= q <= r-2, got r={r}, q={q}")));
    }
    let mut classes = sparse_sets.to_vec();
    let mut rest = VertexSet::full(n);
    for s in sparse_sets {
        if s.host_n() != n {
            return Err(Error::BadParameter("sparse set over a different host".into()));
        }
        if !s.is_subset(&rest) {
            return Err(Error::OverlappingSets);
        }
        rest.difference_with(s);
    }
    classes.push(rest);
    let start = Partition::new(n, classes)?;
    for (i, s) in sparse_sets.iter().enumerate() {
        if s.len() >= 2 && g.density_within(s)? > tau {
            return Err(Error::BadParameter(format!("sparse set {i} has density above tau")));
        }
    }

    let mut run = Run {
        g,
        r,
        q,
        tau,
        cfg: cfg.clone(),
        classes: Vec::new(),
        removed: Vec::new(),
        trace: Vec::new(),
    };
    let block = (r * (r - 2)) as i64;
    let min_deg = g.min_degree()?;
    if (min_deg as i64) * block < (block - (r as i64 - 1)) * n as i64 {
        run.warn(format!("minimum degree {min_deg} is below the extremal threshold"));
    }

    let (part, k, moved) = adjust(g, &start, r)?;
    run.trace.push(TraceEvent::Adjusted { k, moved });
    run.classes = part.into_classes();
    let n_prime = n - k * r;
    for i in 0..q {
        let size = run.classes[i].len();
        if size * (r * (r - 2)) < (r - 1) * n_prime + k * r * (r - 2) {
            run.warn(format!("class {i} has {size} vertices, below (r-1)n'/(r(r-2)) + k"));
        }
    }

    let c0 = run.classify("initial");
    let useless_cap = c0.useless.len();
    let remainder = run.classes[q].clone();
    let relocate: Vec<usize> = c0
        .useless_vertices()
        .into_iter()
        .filter(|&x| c0.class_of[x].is_some_and(|i| i < q))
        .filter(|&x| at_least_tau_power(remainder.len() - c0.neighbours[x][q], &tau, 1, 4, remainder.len()))
        .collect();
    if q + 3 <= r {
        run.clique_reservoir();
    }

    let swapped = swap_bad_exceptional(g, &Partition::new(n, run.classes.clone())?, &c0);
    for s in &swapped.swaps {
        run.trace.push(TraceEvent::Swapped(*s));
    }
    if swapped.relaxed_violations > 0 {
        run.warn(format!("{} vertices break the relaxed post-swap bounds", swapped.relaxed_violations));
    }
    run.classes = swapped.partition.into_classes();

    run.remove_exceptional()?;

    for x in relocate {
        let Some(i) = run.class_of(x).filter(|&i| i < q) else {
            continue;
        };
        run.move_vertex(x, i, q);
        let mut need = vec![r - 1; q];
        need[i] = r - 2;
        let mut avoid = run.classify_quiet().useless;
        avoid.insert(x);
        // x usually stays useless in its new class, so try to remove it in
        // the same batch.
        match run.plan_with(BatchReason::Relocation, &[vec![x]], &need, &avoid) {
            Ok(copies) => run.take(BatchReason::Relocation, vec![x], copies),
            Err(Error::Stuck { .. }) => {
                let copies = run.plan_with(BatchReason::Relocation, &[], &need, &avoid)?;
                run.take(BatchReason::Relocation, Vec::new(), copies);
            }
            Err(e) => return Err(e),
        }
    }

    let mut rounds = 0;
    loop {
        let c = run.classify_quiet();
        let useless = c.useless_vertices();
        if useless.is_empty() {
            break;
        }
        rounds += 1;
        if rounds > useless_cap {
            return Err(Error::Stuck {
                stage: "useless",
                detail: format!("{} useless vertices left after {useless_cap} rounds", useless.len()),
            });
        }
        let anchors: Vec<Vec<usize>> = useless.iter().take(r - 2).map(|&x| vec![x]).collect();
        run.anchored(BatchReason::Useless, anchors.into_iter().map(|a| (a, None)).collect(), &c.useless)?;
    }
    run.classify("final");

    run.final_copies(k)?;
    run.finish(n, k)
}

struct Run<'g> {
    g: &'g Graph,
    r: usize,
    q: usize,
    tau: Rational,
    cfg: TidyConfig,
    classes: Vec<VertexSet>,
    removed: Vec<Vec<usize>>,
    trace: Vec<TraceEvent>,
}

impl Run<'_> {
    fn warn(&mut self, detail: String) {
        self.trace.push(TraceEvent::Warning { detail });
    }

    fn classify_quiet(&self) -> VertexClassification {
        classify_classes(self.g, &self.classes, self.tau)
    }

    fn classify(&mut self, phase: &'static str) -> VertexClassification {
        let c = self.classify_quiet();
        self.trace.push(TraceEvent::Classified {
            phase,
            counts: c.counts.clone(),
            warnings: c.warnings.clone(),
        });
        c
    }

    fn class_of(&self, x: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(x))
    }

    fn move_vertex(&mut self, x: usize, from: usize, to: usize) {
        self.classes[from].remove(x);
        self.classes[to].insert(x);
        self.trace.push(TraceEvent::Moved { vertex: x, from, to });
    }

    /// Disjoint `K_{r−q−1}` copies in the remainder, as many as the slack
    /// of the remainder's degree bound guarantees. Recorded, not used.
    fn clique_reservoir(&mut self) {
        let (r, q) = (self.r as i64, self.q as i64);
        let big = &self.classes[self.q].clone();
        let n = self.g.n() as i64;
        let size = big.len() as i64;
        if size == 0 {
            return;
        }
        let slack = Rational::new(1, r - q - 2) - Rational::new((r - 1) * n, r * (r - 2) * size);
        let requested = if slack > Rational::from_integer(0) {
            (slack / Rational::from_integer(r - q - 1) * Rational::from_integer(size))
                .floor()
                .to_integer() as usize
        } else {
            0
        };
        let inner_min = big.iter().map(|v| self.g.degree_into(v, big)).min().unwrap_or(0);
        let regime = (Rational::from_integer(1) - Rational::new(1, r - q - 2) + slack) * Rational::from_integer(size);
        if Rational::from_integer(inner_min as i64) < regime {
            self.warn(format!("remainder minimum degree {inner_min} is below {regime}"));
        }
        let clique_size = (r - q - 1) as usize;
        let found_all = extract_disjoint_cliques(self.g, big, clique_size, requested).is_ok();
        self.trace.push(TraceEvent::CliqueReservoir {
            clique_size,
            requested,
            found_all,
        });
    }

    /// Exceptional vertices of the remainder are first traded, when `q = r−2`,
    /// against an endpoint of a matching edge inside their target class.
    /// Every exceptional vertex then anchors a copy of its batch.
    fn remove_exceptional(&mut self) -> Result<()> {
        let (r, q) = (self.r, self.q);
        let c = self.classify("exceptional");
        let exceptional = c.exceptional_vertices();
        let mut reserved = VertexSet::empty(self.g.n());
        let mut anchors = Vec::new();
        let mut handled = VertexSet::empty(self.g.n());
        if q == r - 2 {
            // Neighbours of exceptional vertices in their target class.
            let mut scarce = VertexSet::empty(self.g.n());
            for &x in &exceptional {
                if let Some(t) = c.exceptional_target(x) {
                    scarce.union_with(&self.g.neighbors(x).intersection(&self.classes[t]));
                }
            }
            // A matched anchor puts its doubled class outside its target, so
            // at most `r − 3` of them per target fit in one batch. Only that
            // share of each target's vertices is matched; the rest are
            // anchored directly and fill the batches.
            let mut matchings: Vec<Vec<(usize, usize)>> = vec![Vec::new(); q];
            for i in 0..q {
                let s_i = exceptional
                    .iter()
                    .filter(|&&x| c.class_of[x] == Some(q) && c.exceptional_target(x) == Some(i))
                    .count();
                if s_i == 0 {
                    continue;
                }
                let m_i = s_i * (r - 3) / (r - 2);
                matchings[i] = self.matching(i, m_i, &c.useless, &scarce);
                for &(y, z) in &matchings[i] {
                    reserved.insert(y);
                    reserved.insert(z);
                }
                self.trace.push(TraceEvent::Matching {
                    class: i,
                    edges: matchings[i].clone(),
                });
            }
            for &x in &exceptional {
                if c.class_of[x] != Some(q) {
                    continue;
                }
                let i = c.exceptional_target(x).unwrap();
                handled.insert(x);
                match matchings[i].pop() {
                    Some((y, z)) => {
                        self.move_vertex(x, q, i);
                        self.move_vertex(y, i, q);
                        anchors.push((vec![y, z], Some(i)));
                    }
                    None => anchors.push((vec![x], None)),
                }
            }
        }
        anchors.extend(exceptional.iter().filter(|&&x| !handled.contains(x)).map(|&x| (vec![x], None)));
        let mut avoid = c.useless.union(&reserved);
        for (a, _) in &anchors {
            for &v in a {
                avoid.insert(v);
            }
        }
        self.anchored(BatchReason::Exceptional, anchors, &avoid)
    }

    /// Greedy matching of `size` edges inside class `i` over non-useless
    /// vertices, edges in lexicographic order. Vertices in `scarce` are only
    /// used if the rest runs out. May come up short.
    fn matching(&self, i: usize, size: usize, useless: &VertexSet, scarce: &VertexSet) -> Vec<(usize, usize)> {
        let mut free = self.classes[i].difference(useless);
        let mut out = Vec::new();
        for spare_scarce in [true, false] {
            for y in self.classes[i].iter() {
                if out.len() == size {
                    return out;
                }
                let pool = if spare_scarce { free.difference(scarce) } else { free.clone() };
                if !pool.contains(y) {
                    continue;
                }
                if let Some(z) = self.g.neighbors(y).intersection(&pool).iter().find(|&z| z > y) {
                    free.remove(y);
                    free.remove(z);
                    out.push((y, z));
                }
            }
        }
        out
    }

    /// Each batch starts from the first pending anchor and takes on later
    /// anchors while the shared batch can still be built, up to `r − 2`
    /// anchors and at most `r − 3` matched anchors of one target.
    fn anchored(&mut self, reason: BatchReason, anchors: Vec<(Vec<usize>, Option<usize>)>, avoid: &VertexSet) -> Result<()> {
        let mut pending: VecDeque<_> = anchors.into();
        while let Some(first) = pending.pop_front() {
            if !self.alive(&first.0) {
                continue;
            }
            let mut group = vec![first];
            let mut copies = None;
            let mut i = 0;
            while group.len() < self.r - 2 && i < pending.len() {
                let (cand, t) = &pending[i];
                let room = t.is_none_or(|t| group.iter().filter(|(_, u)| *u == Some(t)).count() < self.r - 3);
                if room && self.alive(cand) && cand.iter().all(|v| group.iter().all(|(a, _)| !a.contains(v))) {
                    group.push(pending[i].clone());
                    let anchors: Vec<Vec<usize>> = group.iter().map(|(a, _)| a.clone()).collect();
                    match self.plan(reason, &anchors, avoid) {
                        Ok(c) => {
                            copies = Some(c);
                            pending.remove(i);
                            continue;
                        }
                        Err(Error::Stuck { .. }) => {
                            group.pop();
                        }
                        Err(e) => return Err(e),
                    }
                }
                i += 1;
            }
            let anchors: Vec<Vec<usize>> = group.iter().map(|(a, _)| a.clone()).collect();
            let copies = match copies {
                Some(c) => c,
                None => self.plan(reason, &anchors, avoid)?,
            };
            self.take(reason, anchors.iter().map(|a| a[0]).collect(), copies);
        }
        Ok(())
    }

    fn alive(&self, anchor: &[usize]) -> bool {
        anchor.iter().all(|&v| self.class_of(v).is_some())
    }

    fn plan(&self, reason: BatchReason, anchors: &[Vec<usize>], avoid: &VertexSet) -> Result<Vec<Vec<usize>>> {
        self.plan_with(reason, anchors, &vec![self.r - 1; self.q], avoid)
    }

    fn plan_with(&self, reason: BatchReason, anchors: &[Vec<usize>], need: &[usize], avoid: &VertexSet) -> Result<Vec<Vec<usize>>> {
        let mut budget = Budget::new(self.cfg.batch_nodes);
        let req = BatchRequest {
            classes: &self.classes,
            anchors,
            need,
            copies: self.r - 2,
            avoid,
        };
        build_batch(self.g, self.r, &req, &mut budget).map_err(|e| match e {
            Error::Stuck { detail, .. } => Error::Stuck {
                stage: reason.stage(),
                detail,
            },
            other => other,
        })
    }

    fn take(&mut self, reason: BatchReason, anchors: Vec<usize>, copies: Vec<Vec<usize>>) {
        for copy in &copies {
            for &v in copy {
                for c in &mut self.classes {
                    c.remove(v);
                }
            }
        }
        self.removed.extend(copies.iter().cloned());
        self.trace.push(TraceEvent::Batch { reason, anchors, copies });
    }

    /// Copy `j` takes two vertices from sparse class `j` (if `j < q`) and one
    /// from every other sparse class.
    fn final_copies(&mut self, k: usize) -> Result<()> {
        if k == 0 {
            return Ok(());
        }
        let (r, q) = (self.r, self.q);
        let avoid = self.classify_quiet().useless;
        let mut used = VertexSet::empty(self.g.n());
        let mut copies = Vec::new();
        let mut budget = Budget::new(self.cfg.batch_nodes);
        for j in 0..k {
            let pool = |i: usize| self.classes[i].difference(&used).difference(&avoid);
            let profile: Vec<usize> = (0..q).map(|i| 1 + usize::from(i == j)).collect();
            let mut groups = vec![(pool(q), r - profile.iter().sum::<usize>())];
            groups.extend((0..q).map(|i| (pool(i), profile[i])));
            let copy = find_near_clique(self.g, &[], &groups, &mut budget).ok_or_else(|| Error::Stuck {
                stage: "final",
                detail: format!("no copy {j} of {k} for canonical sizes"),
            })?;
            for &v in &copy {
                used.insert(v);
            }
            copies.push(copy);
        }
        self.take(BatchReason::Final, Vec::new(), copies);
        Ok(())
    }

    fn finish(self, n: usize, k: usize) -> Result<TidyResult> {
        let r = self.r;
        let partition = Partition::new(n, self.classes)?;
        let core = partition.covered();
        let n_star = core.len();
        let block = r * (r - 2);
        if n_star % block != 0 || partition.classes()[..self.q].iter().any(|c| c.len() * block != (r - 1) * n_star) {
            return Err(Error::Internal(format!(
                "core sizes {:?} are not canonical for n* = {n_star}",
                partition.classes().iter().map(VertexSet::len).collect::<Vec<_>>()
            )));
        }
        let g_star = if n_star == 0 {
            Graph::empty(0)
        } else {
            self.g.induced(&core)?
        };
        let copies = self
            .removed
            .iter()
            .map(|c| kr_minus_copy(self.g, c).ok_or_else(|| Error::Internal(format!("removed set {c:?} is not a K_r^- copy"))))
            .collect::<Result<Vec<_>>>()?;
        let removed = Packing::new(n, copies);
        Ok(TidyResult {
            r,
            q: self.q,
            tau: self.tau,
            n,
            n_star,
            k,
            classes: partition,
            removed,
            g_star,
            star_vertices: core.to_vec(),
            trace: self.trace,
        })
    }
}
