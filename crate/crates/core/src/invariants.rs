//! Chromatic invariants of a pattern graph: chromatic number, optimal
//! colouring class-size profiles, critical chromatic number, the hcf
//! conditions and the leading coefficient of the packing threshold.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par;
use crate::rational::Rational;
use crate::vertex_set::VertexSet;

/// Largest pattern for which optimal colourings are enumerated.
pub const PATTERN_CAP: usize = 20;

/// Class-size data over all optimal colourings of a pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColouringProfile {
    pub chi: usize,
    pub sigma: usize,
    /// Sorted (non-decreasing) class-size tuples realised by some optimal colouring.
    pub size_multisets: BTreeSet<Vec<usize>>,
}

/// gcd of `D(H)`; infinite when every difference is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum HcfChi {
    Finite(u64),
    Infinity,
}

impl Serialize for HcfChi {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            HcfChi::Finite(v) => s.serialize_u64(*v),
            HcfChi::Infinity => s.serialize_str("infinity"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HcfReport {
    pub d_set: BTreeSet<usize>,
    pub hcf_chi: HcfChi,
    pub hcf_c: u64,
    pub hcf_is_one: bool,
}

/// Exact chromatic number by branch and bound: a greedy clique gives the
/// lower bound, DSATUR the upper bound, and backtracking closes the gap.
pub fn chromatic_number(h: &Graph) -> Result<usize> {
    if h.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    let lower = greedy_clique(h);
    let upper = dsatur_greedy(h);
    for k in lower..upper {
        if is_colourable(h, k) {
            return Ok(k);
        }
    }
    Ok(upper)
}

fn greedy_clique(h: &Graph) -> usize {
    let mut best = 1;
    for start in 0..h.n() {
        let mut cand = h.neighbors(start).clone();
        let mut size = 1;
        while let Some(v) = cand.iter().max_by_key(|&v| (h.degree_into(v, &cand), std::cmp::Reverse(v))) {
            size += 1;
            cand.intersect_with(h.neighbors(v));
        }
        best = best.max(size);
    }
    best
}

fn dsatur_greedy(h: &Graph) -> usize {
    let n = h.n();
    let mut colour = vec![usize::MAX; n];
    let mut used = 0;
    for _ in 0..n {
        let v = next_dsatur_vertex(h, &colour);
        let mut taken = vec![false; used + 1];
        for w in h.neighbors(v).iter() {
            if colour[w] != usize::MAX {
                taken[colour[w]] = true;
            }
        }
        let c = taken.iter().position(|&t| !t).unwrap();
        colour[v] = c;
        used = used.max(c + 1);
    }
    used
}

fn saturation(h: &Graph, colour: &[usize], v: usize) -> usize {
    let mut seen: Vec<usize> = h
        .neighbors(v)
        .iter()
        .filter_map(|w| (colour[w] != usize::MAX).then_some(colour[w]))
        .collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

fn next_dsatur_vertex(h: &Graph, colour: &[usize]) -> usize {
    (0..h.n())
        .filter(|&v| colour[v] == usize::MAX)
        .max_by_key(|&v| (saturation(h, colour, v), h.degree(v), std::cmp::Reverse(v)))
        .expect("an uncoloured vertex remains")
}

fn is_colourable(h: &Graph, k: usize) -> bool {
    let mut colour = vec![usize::MAX; h.n()];
    colour_rec(h, k, &mut colour, 0, 0)
}

fn colour_rec(h: &Graph, k: usize, colour: &mut [usize], done: usize, used: usize) -> bool {
    if done == h.n() {
        return true;
    }
    let v = next_dsatur_vertex(h, colour);
    for c in 0..k.min(used + 1) {
        if h.neighbors(v).iter().any(|w| colour[w] == c) {
            continue;
        }
        colour[v] = c;
        if colour_rec(h, k, colour, done + 1, used.max(c + 1)) {
            return true;
        }
    }
    colour[v] = usize::MAX;
    false
}

/// All non-decreasing tuples of `parts` positive integers summing to `total`.
fn sorted_compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(rem: usize, parts: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut x = min;
        while x * parts <= rem {
            cur.push(x);
            rec(rem - x, parts - 1, x, cur, out);
            cur.pop();
            x += 1;
        }
    }
    let mut out = Vec::new();
    rec(total, parts, 1, &mut Vec::new(), &mut out);
    out
}

/// Whether `h` has a proper colouring whose classes have exactly the sizes in `sizes`.
fn realises_sizes(h: &Graph, sizes: &[usize]) -> bool {
    let mut order: Vec<usize> = (0..h.n()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(h.degree(v)), v));
    let mut members = vec![VertexSet::empty(h.n()); sizes.len()];
    let mut counts = vec![0usize; sizes.len()];
    assign_rec(h, &order, 0, sizes, &mut members, &mut counts)
}

fn assign_rec(
    h: &Graph,
    order: &[usize],
    idx: usize,
    sizes: &[usize],
    members: &mut [VertexSet],
    counts: &mut [usize],
) -> bool {
    let Some(&v) = order.get(idx) else {
        return true;
    };
    for c in 0..sizes.len() {
        if counts[c] == sizes[c] || !h.neighbors(v).is_disjoint(&members[c]) {
            continue;
        }
        // Empty classes of equal target size are interchangeable.
        if counts[c] == 0 && (0..c).any(|d| counts[d] == 0 && sizes[d] == sizes[c]) {
            continue;
        }
        members[c].insert(v);
        counts[c] += 1;
        if assign_rec(h, order, idx + 1, sizes, members, counts) {
            return true;
        }
        members[c].remove(v);
        counts[c] -= 1;
    }
    false
}

/// Enumerates the class-size multisets of all optimal colourings.
///
/// Deduplication happens at the multiset level: every candidate sorted size
/// tuple is tested once for realisability.
pub fn colouring_profile(h: &Graph) -> Result<ColouringProfile> {
    if h.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    if h.n() > PATTERN_CAP {
        return Err(Error::PatternTooLarge {
            n: h.n(),
            cap: PATTERN_CAP,
        });
    }
    let chi = chromatic_number(h)?;
    let candidates = sorted_compositions(h.n(), chi);
    let realised = par::map(&candidates, |sizes| realises_sizes(h, sizes));
    let size_multisets: BTreeSet<Vec<usize>> = candidates
        .into_iter()
        .zip(realised)
        .filter_map(|(s, ok)| ok.then_some(s))
        .collect();
    let sigma = size_multisets
        .iter()
        .map(|s| s[0])
        .min()
        .ok_or_else(|| Error::Internal("no optimal colouring realised".into()))?;
    Ok(ColouringProfile {
        chi,
        sigma,
        size_multisets,
    })
}

/// `(χ(H) − 1)|H| / (|H| − σ(H))`.
pub fn critical_chromatic_number(h: &Graph) -> Result<Rational> {
    let p = colouring_profile(h)?;
    critical_from_profile(&p, h.n())
}

pub(crate) fn critical_from_profile(p: &ColouringProfile, order: usize) -> Result<Rational> {
    if p.chi < 2 {
        return Err(Error::Degenerate(
            "critical chromatic number needs chromatic number at least 2".into(),
        ));
    }
    Ok(Rational::new(
        ((p.chi - 1) * order) as i64,
        (order - p.sigma) as i64,
    ))
}

pub fn hcf_report(h: &Graph) -> Result<HcfReport> {
    let p = colouring_profile(h)?;
    Ok(hcf_from_profile(&p, h))
}

pub(crate) fn hcf_from_profile(p: &ColouringProfile, h: &Graph) -> HcfReport {
    let d_set: BTreeSet<usize> = p
        .size_multisets
        .iter()
        .flat_map(|s| s.windows(2).map(|w| w[1] - w[0]))
        .collect();
    let g = d_set.iter().fold(0u64, |acc, &d| acc.gcd(&(d as u64)));
    let hcf_chi = if g == 0 { HcfChi::Infinity } else { HcfChi::Finite(g) };
    let hcf_c = h
        .component_orders()
        .into_iter()
        .fold(0u64, |acc, c| acc.gcd(&(c as u64)));
    let hcf_is_one = if p.chi == 2 {
        hcf_c == 1 && hcf_chi <= HcfChi::Finite(2)
    } else {
        hcf_chi == HcfChi::Finite(1)
    };
    HcfReport {
        d_set,
        hcf_chi,
        hcf_c,
        hcf_is_one,
    }
}

/// Leading coefficient of the minimum-degree threshold for perfect
/// `H`-packings: `1 − 1/χ_cr(H)` when hcf(H) = 1, else `1 − 1/χ(H)`. The
/// additive constant is not computed.
pub fn threshold_coefficient(h: &Graph) -> Result<Rational> {
    let p = colouring_profile(h)?;
    threshold_from_profile(&p, h)
}

pub(crate) fn threshold_from_profile(p: &ColouringProfile, h: &Graph) -> Result<Rational> {
    let crit = critical_from_profile(p, h.n())?;
    let one = Rational::from_integer(1);
    if hcf_from_profile(p, h).hcf_is_one {
        Ok(one - crit.recip())
    } else {
        Ok(one - Rational::new(1, p.chi as i64))
    }
}

/// Everything the `invariants` command reports, computed from one profile.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantSummary {
    pub chi: usize,
    pub sigma: usize,
    #[serde(with = "crate::rational::serde_ratio")]
    pub chi_cr: Rational,
    #[serde(rename = "D")]
    pub d: Vec<usize>,
    pub hcf_chi: HcfChi,
    pub hcf_c: u64,
    pub hcf_is_one: bool,
    #[serde(with = "crate::rational::serde_ratio")]
    pub threshold_coefficient: Rational,
}

pub fn summarize(h: &Graph) -> Result<InvariantSummary> {
    let p = colouring_profile(h)?;
    let hcf = hcf_from_profile(&p, h);
    Ok(InvariantSummary {
        chi: p.chi,
        sigma: p.sigma,
        chi_cr: critical_from_profile(&p, h.n())?,
        d: hcf.d_set.iter().copied().collect(),
        hcf_chi: hcf.hcf_chi,
        hcf_c: hcf.hcf_c,
        hcf_is_one: hcf.hcf_is_one,
        threshold_coefficient: threshold_from_profile(&p, h)?,
    })
}
