//! One line per acceptance criterion. Exits non-zero if any fails.
//!
//! Tolerances: criteria 1-4 and 6-9 are exact (rational equality, exact
//! degree counts, 100% agreement). Each criterion also has a wall-clock
//! budget, checked after the fact.

use std::time::{Duration, Instant};

use krpack::constructions::{
    bottle_graph, canonical_graph, h_qr_graph, k_r_minus, kr_minus_degree_bound, prop3_extremal, prop4_extremal,
    CanonicalSpec,
};
use krpack::generators::{gnp, multipartite_with_deletions, perturb, planted_canonical};
use krpack::hall::{default_tau, pack_h_qr};
use krpack::invariants::{critical_chromatic_number, hcf_report, threshold_coefficient, HcfChi};
use krpack::pipeline::{run_pipeline, Decision, PipelineConfig, PipelinePath};
use krpack::solver::{find_perfect_packing, max_packing_size, verify_packing, SolverConfig};
use krpack::tidy::tidy;
use krpack::{Graph, Rational};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    for r in 4..=8i64 {
        let h = k_r_minus(r as usize).map_err(|e| e.to_string())?;
        let chi_cr = critical_chromatic_number(&h).map_err(|e| e.to_string())?;
        let want = Rational::new(r * (r - 2), r - 1);
        ensure(chi_cr == want, || format!("r={r}: chi_cr {chi_cr} != {want}"))?;
        let coeff = threshold_coefficient(&h).map_err(|e| e.to_string())?;
        let want = Rational::from_integer(1) - Rational::new(r - 1, r * (r - 2));
        ensure(coeff == want, || format!("r={r}: coefficient {coeff} != {want}"))?;
    }
    Ok("r = 4..8 exact".into())
}

fn criterion_2() -> Outcome {
    for r in 4..=7 {
        let rep = hcf_report(&k_r_minus(r).unwrap()).map_err(|e| e.to_string())?;
        ensure(rep.hcf_is_one, || format!("hcf(K_{r}^-) is not 1"))?;
    }
    let p3 = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
    ensure(!hcf_report(&p3).unwrap().hcf_is_one, || "hcf(P3) reported as 1".into())?;
    let k3 = hcf_report(&Graph::complete(3)).unwrap();
    ensure(k3.hcf_chi == HcfChi::Infinity, || format!("hcf_chi(K3) = {:?}", k3.hcf_chi))?;
    Ok("K_r^- r=4..7, P3, K3".into())
}

fn criterion_3() -> Outcome {
    for (r, k) in [(4, 2), (4, 3), (4, 4), (5, 2)] {
        let g = prop3_extremal(r, k).map_err(|e| e.to_string())?;
        let h = k_r_minus(r).unwrap();
        let want = kr_minus_degree_bound(r, g.n()) - 1;
        let delta = g.min_degree().unwrap();
        ensure(delta == want, || format!("(r,k)=({r},{k}): min degree {delta}, want {want}"))?;
        let rep = find_perfect_packing(&h, &g).map_err(|e| e.to_string())?;
        ensure(rep.packing.is_none(), || format!("(r,k)=({r},{k}): packing found"))?;
        let max = max_packing_size(&h, &g).map_err(|e| e.to_string())?;
        ensure(max < k, || format!("(r,k)=({r},{k}): max packing {max} >= k"))?;
    }
    Ok("4 constructions absent at threshold - 1".into())
}

fn criterion_4() -> Outcome {
    let h = Graph::complete_multipartite(&[1, 3, 3]).unwrap();
    let g = prop4_extremal(&h, 1).map_err(|e| e.to_string())?;
    ensure(g.n() == 14, || format!("n = {}", g.n()))?;
    let delta = g.min_degree().unwrap();
    ensure(delta == 8, || format!("min degree {delta}"))?;
    let rep = find_perfect_packing(&h, &g).map_err(|e| e.to_string())?;
    ensure(rep.packing.is_none(), || "packing found".into())?;
    Ok(format!("n = 14, min degree 8, absent after {} nodes", rep.nodes_explored))
}

fn criterion_5() -> Outcome {
    let h = k_r_minus(4).unwrap();
    let mut hosts = vec![("B*(K4-)", bottle_graph(&h).unwrap())];
    for (q, n) in [(1, 8), (1, 16), (2, 16)] {
        hosts.push((
            ["K(1,8)", "K(1,16)", "K(2,16)"][hosts.len() - 1],
            canonical_graph(&CanonicalSpec::new(4, q, n).unwrap()).unwrap(),
        ));
    }
    for (name, g) in &hosts {
        let rep = find_perfect_packing(&h, g).map_err(|e| e.to_string())?;
        let p = rep.packing.ok_or_else(|| format!("{name}: solver found nothing"))?;
        ensure(verify_packing(&h, g, &p, true), || format!("{name}: solver packing fails"))?;
        let out = run_pipeline(g, 4, &PipelineConfig::default()).map_err(|e| e.to_string())?;
        let p = out.packing.ok_or_else(|| format!("{name}: pipeline found nothing"))?;
        ensure(verify_packing(&h, g, &p, true), || format!("{name}: pipeline packing fails"))?;
    }
    Ok("4 hosts packed by solver and pipeline".into())
}

/// Does `h` embed into `g[set]` using every vertex of `set`?
fn spans(h: &Graph, g: &Graph, set: &[usize]) -> bool {
    fn go(h: &Graph, g: &Graph, set: &[usize], image: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        let i = image.len();
        if i == set.len() {
            return true;
        }
        for j in 0..set.len() {
            if used[j] || !(0..i).all(|p| !h.has_edge(p, i) || g.has_edge(image[p], set[j])) {
                continue;
            }
            used[j] = true;
            image.push(set[j]);
            if go(h, g, set, image, used) {
                return true;
            }
            image.pop();
            used[j] = false;
        }
        false
    }
    go(h, g, set, &mut Vec::new(), &mut vec![false; set.len()])
}

/// Naive oracle: the lowest uncovered vertex joins every possible block.
fn brute_force(h: &Graph, g: &Graph) -> bool {
    fn go(h: &Graph, g: &Graph, left: Vec<usize>) -> bool {
        let Some((&first, rest)) = left.split_first() else {
            return true;
        };
        let k = h.n() - 1;
        if rest.len() < k {
            return false;
        }
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let mut block = vec![first];
            block.extend(idx.iter().map(|&i| rest[i]));
            if spans(h, g, &block) {
                let remaining = rest.iter().enumerate().filter(|(i, _)| !idx.contains(i)).map(|(_, &v)| v).collect();
                if go(h, g, remaining) {
                    return true;
                }
            }
            let Some(pos) = (0..k).rev().find(|&p| idx[p] < rest.len() - k + p) else {
                return false;
            };
            idx[pos] += 1;
            for p in pos + 1..k {
                idx[p] = idx[p - 1] + 1;
            }
        }
    }
    if h.n() == 0 || g.n() % h.n() != 0 {
        return false;
    }
    go(h, g, (0..g.n()).collect())
}

fn criterion_6() -> Outcome {
    let patterns = [
        ("K3", Graph::complete(3)),
        ("P3", Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()),
        ("K4-", k_r_minus(4).unwrap()),
    ];
    let mut total = 0;
    let mut packed = 0;
    for (name, h) in &patterns {
        for seed in 0..200u64 {
            // mostly divisible orders, some not
            let n = if seed % 4 == 3 { 3 + (seed % 8) as usize } else { h.n() * (1 + (seed as usize / 4) % (10 / h.n())) };
            let p = Rational::new(4 + (seed % 6) as i64, 10);
            let g = gnp(n, p, seed).unwrap();
            let rep = find_perfect_packing(h, &g).map_err(|e| e.to_string())?;
            let oracle = brute_force(h, &g);
            ensure(rep.packing.is_some() == oracle, || format!("{name} seed {seed}: solver disagrees"))?;
            if let Some(pk) = &rep.packing {
                ensure(verify_packing(h, &g, pk, true), || format!("{name} seed {seed}: bad packing"))?;
                packed += 1;
            }
            total += 1;
        }
    }
    Ok(format!("{total}/{total} agree ({packed} packable)"))
}

fn criterion_7() -> Outcome {
    let mut runs = 0;
    for (q, r, k) in [(1, 3, 6), (2, 3, 5), (2, 4, 4)] {
        let tau = default_tau(q, r);
        let mut sizes = vec![k * r; q];
        sizes.push(k);
        let h = h_qr_graph(q, r).unwrap();
        for seed in 0..100 {
            let (g, classes) = multipartite_with_deletions(&sizes, tau / 2, seed).map_err(|e| e.to_string())?;
            let rep = pack_h_qr(&g, &classes, q, r, tau).map_err(|e| e.to_string())?;
            let p = rep.packing().ok_or_else(|| format!("(q,r,k)=({q},{r},{k}) seed {seed}: absent"))?;
            ensure(verify_packing(&h, &g, p, true), || format!("({q},{r},{k}) seed {seed}: bad packing"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs}/{runs} packed and verified"))
}

fn criterion_8() -> Outcome {
    let tau = Rational::new(1, 100);
    let mut removed = 0;
    for seed in 0..50u64 {
        let (q, n) = if seed % 2 == 0 { (1, 80) } else { (2, 96) };
        let inst = planted_canonical(4, q, n, tau, (seed % 4) as usize, seed).map_err(|e| e.to_string())?;
        let res = tidy(&inst.graph, &inst.sparse_sets(), 4, tau).map_err(|e| format!("seed {seed}: {e}"))?;
        let check = res.check(&inst.graph);
        ensure(check.holds(), || format!("seed {seed}: {check:?}"))?;
        removed += res.removed.len();
    }
    Ok(format!("50/50 hold, {removed} copies removed in total"))
}

fn criterion_9_hosts() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for seed in 0..240u64 {
        let n = [8, 12, 16, 20, 24][(seed % 5) as usize];
        let g = match seed % 4 {
            0 => gnp(n, Rational::new(6 + (seed % 7) as i64, 20), seed).unwrap(),
            1 => {
                let q = 1 + (seed / 4 % 2) as usize;
                let q = if n % 8 == 0 || q == 1 { q } else { 1 };
                let spec = CanonicalSpec::new(4, q, n);
                match spec {
                    Ok(s) => {
                        let base = canonical_graph(&s).unwrap();
                        perturb(&base, Rational::new(1, 50), Rational::new(1, 30), seed).unwrap()
                    }
                    Err(_) => gnp(n, Rational::new(7, 10), seed).unwrap(),
                }
            }
            2 => {
                let k = n / 4;
                let base = prop3_extremal(4, k).unwrap();
                perturb(&base, Rational::new((seed % 3) as i64, 40), Rational::new(0, 1), seed).unwrap()
            }
            _ => {
                let k = n / 4;
                let base = prop3_extremal(4, k).unwrap();
                perturb(&base, Rational::new(0, 1), Rational::new(1, 40), seed).unwrap()
            }
        };
        out.push((format!("seed {seed} n={n}"), g));
    }
    out
}

fn criterion_9() -> Outcome {
    let h = k_r_minus(4).unwrap();
    let cfg = PipelineConfig {
        solver: SolverConfig::with_budget_secs(120),
        ..PipelineConfig::default()
    };
    let (mut packed, mut via_pipeline, mut via_fallback) = (0, 0, 0);
    let hosts = criterion_9_hosts();
    for (name, g) in &hosts {
        let direct = krpack::solver::find_perfect_packing_with(&h, g, &cfg.solver).map_err(|e| format!("{name}: {e}"))?;
        let out = run_pipeline(g, 4, &cfg).map_err(|e| format!("{name}: {e}"))?;
        let agree = (out.decision == Decision::Packed) == direct.packing.is_some();
        ensure(agree, || format!("{name}: pipeline {:?}, solver {}", out.decision, direct.packing.is_some()))?;
        if let Some(p) = &out.packing {
            ensure(verify_packing(&h, g, p, true), || format!("{name}: pipeline packing fails"))?;
            packed += 1;
        }
        match out.path {
            PipelinePath::Pipeline => via_pipeline += 1,
            PipelinePath::Fallback => via_fallback += 1,
            PipelinePath::Direct => {}
        }
    }
    Ok(format!(
        "{n}/{n} agree ({packed} packable; {via_pipeline} structural, {via_fallback} fallback)",
        n = hosts.len()
    ))
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 9] = [
        (1, "invariant formulas", Duration::from_secs(1), criterion_1),
        (2, "hcf ledger", Duration::from_secs(1), criterion_2),
        (3, "K_r^- extremal graphs", Duration::from_secs(120), criterion_3),
        (4, "pattern extremal graph", Duration::from_secs(120), criterion_4),
        (5, "positive instances", Duration::from_secs(60), criterion_5),
        (6, "solver vs brute force", Duration::from_secs(600), criterion_6),
        (7, "Hall packer", Duration::from_secs(120), criterion_7),
        (8, "tidy postconditions", Duration::from_secs(300), criterion_8),
        (9, "pipeline vs solver", Duration::from_secs(1200), criterion_9),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let verdict = match result {
            Ok(detail) if took <= budget => format!("PASS  {detail}"),
            Ok(detail) => format!("FAIL  over budget: {detail}"),
            Err(why) => format!("FAIL  {why}"),
        };
        if verdict.starts_with("FAIL") {
            failed += 1;
        }
        println!("criterion {id} [{name}] {verdict} ({:.2}s of {}s)", took.as_secs_f64(), budget.as_secs());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
