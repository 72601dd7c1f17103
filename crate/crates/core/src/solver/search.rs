use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::vertex_set::VertexSet;

use super::{enumerate_copies, Copy, Packing};

/// Search limits and scheduling.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Wall-clock budget; `None` means unlimited.
    pub budget: Option<Duration>,
    /// Node budget; `None` means unlimited.
    pub node_limit: Option<u64>,
    /// Explore root branches on the rayon pool. The decision is the same
    /// either way; the returned packing is only guaranteed reproducible
    /// when this is off.
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            budget: Some(Duration::from_secs(60)),
            node_limit: None,
            parallel: false,
        }
    }
}

impl SolverConfig {
    pub fn unlimited() -> Self {
        SolverConfig {
            budget: None,
            node_limit: None,
            parallel: false,
        }
    }

    pub fn with_budget_secs(secs: u64) -> Self {
        SolverConfig {
            budget: Some(Duration::from_secs(secs)),
            ..Self::default()
        }
    }

    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    /// `Some` iff a perfect packing exists.
    pub packing: Option<Packing>,
    pub copies_considered: usize,
    pub nodes_explored: u64,
    #[serde(serialize_with = "ser_secs")]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxPackingReport {
    pub size: usize,
    pub witness: Packing,
    pub nodes_explored: u64,
    #[serde(serialize_with = "ser_secs")]
    pub elapsed: Duration,
}

fn ser_secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

struct Limits {
    deadline: Option<Instant>,
    node_limit: Option<u64>,
    nodes: AtomicU64,
}

impl Limits {
    fn new(cfg: &SolverConfig) -> Self {
        Limits {
            deadline: cfg.budget.map(|b| Instant::now() + b),
            node_limit: cfg.node_limit,
            nodes: AtomicU64::new(0),
        }
    }

    #[inline]
    fn tick(&self) -> Result<()> {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if self.node_limit.is_some_and(|lim| n > lim) {
            return Err(Error::Timeout { nodes: n });
        }
        if n % 1024 == 0 && self.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(Error::Timeout { nodes: n });
        }
        Ok(())
    }

    fn nodes(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }
}

/// Incidence structure: for each host vertex, the bitset of copies containing it.
struct Incidence<'a> {
    copies: &'a [Copy],
    containing: Vec<VertexSet>,
}

impl<'a> Incidence<'a> {
    fn new(host_n: usize, copies: &'a [Copy]) -> Self {
        let mut containing = vec![VertexSet::empty(copies.len()); host_n];
        for (i, c) in copies.iter().enumerate() {
            for v in c.vertices.iter() {
                containing[v].insert(i);
            }
        }
        Incidence { copies, containing }
    }

    /// Active copies after committing to copy `c`.
    fn without_conflicts(&self, active: &VertexSet, c: usize) -> VertexSet {
        let mut next = active.clone();
        for v in self.copies[c].vertices.iter() {
            next.difference_with(&self.containing[v]);
        }
        next
    }

    /// Uncovered vertex in the fewest active copies, with that count.
    fn most_constrained(&self, uncovered: &VertexSet, active: &VertexSet) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for v in uncovered.iter() {
            let k = active.intersection_len(&self.containing[v]);
            if best.is_none_or(|(_, b)| k < b) {
                best = Some((v, k));
                if k == 0 {
                    break;
                }
            }
        }
        best
    }
}

/// Decides whether `g` has a perfect `h`-packing with default limits.
pub fn find_perfect_packing(h: &Graph, g: &Graph) -> Result<SearchReport> {
    find_perfect_packing_with(h, g, &SolverConfig::default())
}

/// Exact-cover search over all copies of `h` in `g`.
///
/// `Ok` with `packing: None` means the search was exhaustive and no perfect
/// packing exists. Running out of budget is [`Error::Timeout`].
pub fn find_perfect_packing_with(h: &Graph, g: &Graph, cfg: &SolverConfig) -> Result<SearchReport> {
    let start = Instant::now();
    let n = g.n();
    let k = h.n();
    let absent = |copies: usize, nodes: u64| SearchReport {
        packing: None,
        copies_considered: copies,
        nodes_explored: nodes,
        elapsed: start.elapsed(),
    };
    if n == 0 {
        return Ok(SearchReport {
            packing: Some(Packing::new(0, Vec::new())),
            copies_considered: 0,
            nodes_explored: 0,
            elapsed: start.elapsed(),
        });
    }
    if k == 0 || n % k != 0 {
        return Ok(absent(0, 0));
    }
    let copies = enumerate_copies(h, g);
    let inc = Incidence::new(n, &copies);
    let limits = Limits::new(cfg);
    let uncovered = VertexSet::full(n);
    let active = VertexSet::full(copies.len());

    let found = if cfg.parallel {
        exact_cover_parallel(&inc, &limits, &uncovered, &active)?
    } else {
        let mut chosen = Vec::new();
        exact_cover(&inc, &limits, &uncovered, &active, &mut chosen, &Dead::new())?.then_some(chosen)
    };
    let packing = found.map(|idx| Packing::new(n, idx.into_iter().map(|i| copies[i].clone()).collect()));
    Ok(SearchReport {
        packing,
        copies_considered: copies.len(),
        nodes_explored: limits.nodes(),
        elapsed: start.elapsed(),
    })
}

/// Uncovered sets already shown to have no exact cover. The active copies
/// are exactly those inside the uncovered set, so the key is complete.
/// Sharded so parallel branches can share what they learn.
struct Dead {
    shards: Vec<Mutex<HashSet<VertexSet>>>,
    len: AtomicUsize,
    cap: usize,
}

impl Dead {
    fn new() -> Self {
        Dead {
            shards: (0..64).map(|_| Mutex::new(HashSet::new())).collect(),
            len: AtomicUsize::new(0),
            cap: 1 << 22,
        }
    }

    fn shard(&self, key: &VertexSet) -> &Mutex<HashSet<VertexSet>> {
        let mut h = DefaultHasher::new();
        key.hash(&mut h);
        &self.shards[h.finish() as usize % self.shards.len()]
    }

    fn contains(&self, key: &VertexSet) -> bool {
        self.shard(key).lock().expect("memo lock").contains(key)
    }

    fn record(&self, key: &VertexSet) {
        if self.len.load(Ordering::Relaxed) < self.cap && self.shard(key).lock().expect("memo lock").insert(key.clone()) {
            self.len.fetch_add(1, Ordering::Relaxed);
        }
    }
}

fn exact_cover(
    inc: &Incidence,
    limits: &Limits,
    uncovered: &VertexSet,
    active: &VertexSet,
    chosen: &mut Vec<usize>,
    dead: &Dead,
) -> Result<bool> {
    limits.tick()?;
    if dead.contains(uncovered) {
        return Ok(false);
    }
    let Some((v, count)) = inc.most_constrained(uncovered, active) else {
        return Ok(true);
    };
    if count == 0 {
        return Ok(false);
    }
    let options = active.intersection(&inc.containing[v]);
    for c in options.iter() {
        let next_active = inc.without_conflicts(active, c);
        let next_uncovered = uncovered.difference(&inc.copies[c].vertices);
        chosen.push(c);
        if exact_cover(inc, limits, &next_uncovered, &next_active, chosen, dead)? {
            return Ok(true);
        }
        chosen.pop();
    }
    dead.record(uncovered);
    Ok(false)
}

/// Subproblems handed to the thread pool: the tree is expanded breadth
/// first, always on the most constrained vertex, until there are this many
/// open nodes per thread.
#[cfg(feature = "parallel")]
const TASKS_PER_THREAD: usize = 8;

#[cfg(feature = "parallel")]
fn exact_cover_parallel(
    inc: &Incidence,
    limits: &Limits,
    uncovered: &VertexSet,
    active: &VertexSet,
) -> Result<Option<Vec<usize>>> {
    use rayon::prelude::*;

    let target = rayon::current_num_threads() * TASKS_PER_THREAD;
    let mut frontier = vec![(uncovered.clone(), active.clone(), Vec::new())];
    while frontier.len() < target {
        let mut next = Vec::new();
        for (unc, act, chosen) in frontier {
            limits.tick()?;
            let Some((v, count)) = inc.most_constrained(&unc, &act) else {
                return Ok(Some(chosen));
            };
            if count == 0 {
                continue;
            }
            for c in act.intersection(&inc.containing[v]).iter() {
                let mut path = chosen.clone();
                path.push(c);
                next.push((unc.difference(&inc.copies[c].vertices), inc.without_conflicts(&act, c), path));
            }
        }
        let stalled = next.is_empty();
        frontier = next;
        if stalled {
            return Ok(None);
        }
    }
    let dead = Dead::new();
    let hit = frontier.into_par_iter().find_map_any(|(unc, act, mut chosen)| {
        match exact_cover(inc, limits, &unc, &act, &mut chosen, &dead) {
            Ok(true) => Some(Ok(chosen)),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        }
    });
    hit.transpose()
}

#[cfg(not(feature = "parallel"))]
fn exact_cover_parallel(
    inc: &Incidence,
    limits: &Limits,
    uncovered: &VertexSet,
    active: &VertexSet,
) -> Result<Option<Vec<usize>>> {
    let mut chosen = Vec::new();
    Ok(exact_cover(inc, limits, uncovered, active, &mut chosen, &Dead::new())?.then_some(chosen))
}

pub fn max_packing_size(h: &Graph, g: &Graph) -> Result<usize> {
    max_packing_size_with(h, g, &SolverConfig::default()).map(|r| r.size)
}

/// Maximum number of disjoint copies by branch and bound. The bound is the
/// current count plus `⌊coverable / |H|⌋`, where a vertex is coverable if
/// some still-compatible copy contains it.
pub fn max_packing_size_with(h: &Graph, g: &Graph, cfg: &SolverConfig) -> Result<MaxPackingReport> {
    let start = Instant::now();
    let n = g.n();
    let k = h.n();
    let copies = if k == 0 { Vec::new() } else { enumerate_copies(h, g) };
    let inc = Incidence::new(n, &copies);
    let limits = Limits::new(cfg);

    let mut state = MaxState {
        best: greedy_packing(&inc),
        k,
        perfect: if k == 0 { 0 } else { n / k },
    };
    let mut chosen = Vec::new();
    max_rec(&inc, &limits, &VertexSet::full(n), &VertexSet::full(copies.len()), &mut chosen, &mut state)?;
    let witness = Packing::new(n, state.best.iter().map(|&i| copies[i].clone()).collect());
    Ok(MaxPackingReport {
        size: state.best.len(),
        witness,
        nodes_explored: limits.nodes(),
        elapsed: start.elapsed(),
    })
}

struct MaxState {
    best: Vec<usize>,
    k: usize,
    perfect: usize,
}

fn greedy_packing(inc: &Incidence) -> Vec<usize> {
    let mut active = VertexSet::full(inc.copies.len());
    let mut out = Vec::new();
    while let Some(c) = active.first() {
        out.push(c);
        active = inc.without_conflicts(&active, c);
    }
    out
}

fn max_rec(
    inc: &Incidence,
    limits: &Limits,
    open: &VertexSet,
    active: &VertexSet,
    chosen: &mut Vec<usize>,
    st: &mut MaxState,
) -> Result<()> {
    limits.tick()?;
    if st.best.len() == st.perfect {
        return Ok(());
    }
    if chosen.len() > st.best.len() {
        st.best = chosen.clone();
    }
    let coverable: Vec<(usize, usize)> = open
        .iter()
        .map(|v| (v, active.intersection_len(&inc.containing[v])))
        .filter(|&(_, c)| c > 0)
        .collect();
    if coverable.is_empty() || chosen.len() + coverable.len() / st.k <= st.best.len() {
        return Ok(());
    }
    let (v, _) = *coverable.iter().min_by_key(|&&(v, c)| (c, v)).unwrap();
    let options = active.intersection(&inc.containing[v]);
    for c in options.iter() {
        let next_active = inc.without_conflicts(active, c);
        let next_open = open.difference(&inc.copies[c].vertices);
        chosen.push(c);
        max_rec(inc, limits, &next_open, &next_active, chosen, st)?;
        chosen.pop();
    }
    // Leave `v` uncovered.
    let mut next_open = open.clone();
    next_open.remove(v);
    let next_active = active.difference(&inc.containing[v]);
    max_rec(inc, limits, &next_open, &next_active, chosen, st)
}
