//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p fads-core --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fads_core::generator::{gen_forbidden, gen_planted, random_digraph, random_fadl, GenSpec, SplitMix64};
use fads_core::kernelizer::{
    apply, find_applicable, is_fixed_point, kernelize, kernelize_fads, kernelize_with_observer, KernelOutcome,
    Step,
};
use fads_core::solver::{solve_bruteforce, solve_labelings, SolveResult};
use fads_core::{
    find_forbidden_witness, from_fads, has_labeling_extension, is_funnel, is_funnel_labeling, to_fads,
    verify_solution, Digraph, FadlInstance, FadsInstance, Label, Labeling, RuleOutcome, Solution, VertexId,
};

use common::{arc, digraph_from_mask, funnel_by_definition, labeling_exists, optimum_exhaustive};

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn decide(i: &FadlInstance) -> bool {
    solve_bruteforce(i).is_yes()
}

/// Seeded FADL instances for the rule fuzz: n ≤ 8, m ≤ 14, k ≤ 3.
fn fadl_corpus() -> Vec<FadlInstance> {
    let mut rng = SplitMix64::new(0xACCE_0004);
    (0..10_000)
        .map(|_| {
            let n = 2 + rng.below(7);
            let m = rng.below(15.min(n * (n - 1) + 1));
            let k = rng.below(4) as i64;
            let p = [0.0, 0.15, 0.4][rng.below(3)];
            random_fadl(&mut rng, n, m, k, p)
        })
        .collect()
}

/// Seeded FADS instances for the end-to-end check: n ≤ 10, k ≤ 3.
fn fads_corpus() -> Vec<FadsInstance> {
    let mut rng = SplitMix64::new(0xACCE_0005);
    (0..1_000)
        .map(|_| {
            let n = 1 + rng.below(10);
            let m = rng.below((2 * n).min(n * (n - 1)) + 1);
            let k = rng.below(4);
            FadsInstance::new(random_digraph(&mut rng, n, m), k)
        })
        .collect()
}

fn c1_recognition() -> Verdict {
    let start = Instant::now();
    let mut graphs = 0usize;
    let mut funnels = 0usize;
    for n in 0..=4usize {
        let pairs = n * n.saturating_sub(1);
        for mask in 0u64..1 << pairs {
            let d = digraph_from_mask(n, mask);
            graphs += 1;
            let by_definition = funnel_by_definition(&d);
            let by_reachability = is_funnel(&d);
            let by_partition = labeling_exists(&d, &Labeling::new());
            let extension = has_labeling_extension(&d, &Labeling::new());
            let by_forbidden = match find_forbidden_witness(&d) {
                Err(_) => false,
                Ok(None) => true,
                Ok(Some(w)) => {
                    ensure(w.is_valid_in(&d), || format!("invalid witness in {d:?}"))?;
                    false
                }
            };
            ensure(
                [by_reachability, by_partition, by_forbidden, extension.is_some()]
                    .iter()
                    .all(|&b| b == by_definition),
                || format!("routes disagree on {d:?}"),
            )?;
            if let Some(l) = extension {
                ensure(is_funnel_labeling(&d, &l), || format!("bad labeling for {d:?}"))?;
            }
            funnels += by_definition as usize;
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("{graphs} digraphs, {funnels} funnels, {took:.2?}"))
}

fn c2_forbidden_family() -> Verdict {
    for k in 0..=20usize {
        let d = gen_forbidden(k);
        ensure(d.vertex_count() == k + 5 && d.arc_count() == k + 4, || format!("D_{k} has wrong size"))?;
        ensure(!is_funnel(&d), || format!("D_{k} recognized as funnel"))?;
        let inst = |b| FadlInstance::new(d.clone(), Labeling::new(), b).unwrap();
        let opt = if k <= 3 {
            ensure(solve_bruteforce(&inst(0)).is_no(), || format!("D_{k} solvable with k=0"))?;
            let r = solve_bruteforce(&inst(1));
            ensure(r.is_yes(), || format!("D_{k} not solvable with k=1"))?;
            ensure(optimum_exhaustive(&inst(1), 1) == Some(1), || format!("independent oracle on D_{k}"))?;
            r.optimum
        } else {
            solve_labelings(&inst(1)).optimum
        };
        ensure(opt == Some(1), || format!("D_{k}: optimum {opt:?}"))?;
    }
    Ok("D_0..D_20 are not funnels, optimum 1 each".into())
}

fn sample() -> Digraph {
    // a=0 b=1 v=2 c=3 u=4 w=5 d=6 e=7 f=8
    Digraph::from_arcs_strict(9, [(0, 2), (1, 2), (2, 3), (2, 4), (4, 5), (6, 5), (5, 7), (5, 8)]).unwrap()
}

fn c3_sample() -> Verdict {
    let d = sample();
    let inst = |k| FadlInstance::new(d.clone(), Labeling::new(), k).unwrap();
    ensure(solve_bruteforce(&inst(1)).is_no(), || "k=1 answered yes".into())?;
    let r = solve_bruteforce(&inst(2));
    ensure(r.optimum == Some(2), || format!("optimum {:?}", r.optimum))?;
    ensure(optimum_exhaustive(&inst(2), 2) == Some(2), || "independent oracle disagrees".into())?;
    let s = vec![arc(2, 4), arc(4, 5)];
    let rest = d.delete_arcs(&s).unwrap();
    let labeling = has_labeling_extension(&rest, &Labeling::new()).ok_or("D - S is not a funnel")?;
    let sol = Solution {
        deleted_arcs: s,
        labeling,
    };
    ensure(verify_solution(&inst(2), &sol), || "S = {(v,u),(u,w)} rejected".into())?;
    ensure(!verify_solution(&inst(1), &sol), || "S accepted with k=1".into())?;
    Ok("optimum 2, S = {(v,u),(u,w)} verifies".into())
}

fn c4_rule_safety(corpus: &[FadlInstance]) -> Verdict {
    let start = Instant::now();
    let mut applications = 0usize;
    for (idx, inst) in corpus.iter().enumerate() {
        // Steps of the worklist driver.
        let mut bad = None;
        let mut obs = |s: &Step<'_>| {
            applications += 1;
            let after = s.after.map_or(false, decide);
            if bad.is_none() && decide(s.before) != after {
                bad = Some(s.rule);
            }
        };
        kernelize_with_observer(inst, &mut obs);
        if let Some(rule) = bad {
            return Err(format!("instance {idx}: driver step of {rule} changed the decision"));
        }
        // Steps of the full-rescan stepper.
        let mut cur = inst.clone();
        let mut before = decide(&cur);
        while let Some(app) = find_applicable(&cur) {
            applications += 1;
            let after = match apply(&mut cur, &app).map_err(|e| format!("instance {idx}: {e}"))? {
                RuleOutcome::TrivialNo => false,
                RuleOutcome::Changed(_) => decide(&cur),
                RuleOutcome::Unchanged => return Err(format!("instance {idx}: scan site did not apply")),
            };
            ensure(before == after, || format!("instance {idx}: {} changed the decision", app.rule))?;
            if !matches!(app.rule, fads_core::RuleId::LowerBound) {
                before = after;
            } else {
                break;
            }
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(600), || format!("took {took:?}"))?;
    Ok(format!("{} instances, {applications} rule applications, {took:.2?}", corpus.len()))
}

fn c5_end_to_end(corpus: &[FadsInstance]) -> Verdict {
    let mut yes = 0;
    for (idx, inst) in corpus.iter().enumerate() {
        let (kernel, _) = kernelize_fads(inst);
        let before = decide(&from_fads(inst));
        ensure(before == decide(&from_fads(&kernel)), || format!("instance {idx}: {inst:?}"))?;
        yes += before as usize;
    }
    Ok(format!("{} instances ({yes} yes), decisions preserved", corpus.len()))
}

fn agree(a: &SolveResult, b: &SolveResult, k: i64) -> bool {
    a.is_yes() == b.is_yes()
        && if a.is_yes() {
            a.optimum == b.optimum
        } else {
            b.optimum.map_or(true, |o| o as i64 > k)
        }
}

fn c6_oracles(fadl: &[FadlInstance], fads: &[FadsInstance]) -> Verdict {
    let mut pool: Vec<FadlInstance> = fadl.to_vec();
    for inst in fads {
        pool.push(from_fads(inst));
        let (kernel, _) = kernelize_fads(inst);
        if kernel.digraph.vertex_count() <= 14 {
            pool.push(from_fads(&kernel));
        }
    }
    for (idx, inst) in pool.iter().enumerate() {
        if inst.budget < 0 {
            continue;
        }
        let (b, l) = (solve_bruteforce(inst), solve_labelings(inst));
        ensure(agree(&b, &l, inst.budget), || {
            format!("instance {idx}: brute {:?}/{:?} vs labelings {:?}/{:?}", b.status, b.optimum, l.status, l.optimum)
        })?;
    }
    Ok(format!("{} instances, decision and optimum agree", pool.len()))
}

fn planted_corpus() -> Vec<FadsInstance> {
    let mut rng = SplitMix64::new(0xACCE_0007);
    (0..100u64)
        .map(|i| {
            let n = if i % 10 == 0 { 2000 } else { 20 + rng.below(1981) };
            let m = n + rng.below(4 * n);
            let spec = GenSpec {
                n,
                m,
                k_plant: rng.below(9),
                fork_fraction: rng.unit(),
                seed: 0xACCE ^ i,
            };
            gen_planted(&spec).unwrap().instance
        })
        .collect()
}

fn c7_audits(planted: &[FadsInstance]) -> Verdict {
    let mut largest = 0;
    for (idx, inst) in planted.iter().enumerate() {
        let rep = kernelize(&from_fads(inst));
        let audit = rep.audit.ok_or_else(|| format!("planted instance {idx} refuted"))?;
        for c in &audit.checks {
            ensure(c.pass, || format!("instance {idx}: {} observed {} limit {}", c.name, c.observed, c.limit))?;
        }
        ensure(audit.both_degree_big as i64 <= 2 * audit.k, || format!("instance {idx}: both_degree_big"))?;
        largest = largest.max(audit.n);
    }
    Ok(format!("{} planted instances, all audits pass, largest kernel {largest} vertices", planted.len()))
}

fn c8_fixed_point(fadl: &[FadlInstance], fads: &[FadsInstance], planted: &[FadsInstance]) -> Verdict {
    let mut kernels = 0;
    let inputs = fadl.iter().cloned().chain(fads.iter().chain(planted).map(from_fads));
    for (idx, inst) in inputs.enumerate() {
        let KernelOutcome::Kernel(k) = kernelize(&inst).outcome else {
            continue;
        };
        kernels += 1;
        ensure(is_fixed_point(&k), || format!("instance {idx}: a rule still applies"))?;
        let again = kernelize(&k);
        ensure(again.rule_counts.total() == 0, || format!("instance {idx}: re-kernelizing fired rules"))?;
        ensure(again.outcome == KernelOutcome::Kernel(k), || format!("instance {idx}: kernel changed"))?;
    }
    Ok(format!("{kernels} kernels are fixed points and idempotent"))
}

fn c9_performance() -> Verdict {
    let mut rng = SplitMix64::new(0xACCE_0009);
    let d = random_digraph(&mut rng, 10_000, 100_000);
    let mut worst = Duration::ZERO;
    for k in [10, 1_000, 100_000] {
        let inst = FadlInstance::new(d.clone(), Labeling::new(), k).unwrap();
        let start = Instant::now();
        kernelize(&inst);
        worst = worst.max(start.elapsed());
    }
    ensure(worst < Duration::from_secs(10), || format!("random n=1e4 took {worst:?}"))?;
    let spec = GenSpec {
        n: 100_000,
        m: 500_000,
        k_plant: 8,
        fork_fraction: 0.5,
        seed: 0xACCE_0009,
    };
    let planted = from_fads(&gen_planted(&spec).unwrap().instance);
    let start = Instant::now();
    let rep = kernelize(&planted);
    let big = start.elapsed();
    ensure(big < Duration::from_secs(120), || format!("planted n=1e5 took {big:?}"))?;
    ensure(rep.audit.is_some(), || "planted n=1e5 refuted".into())?;
    Ok(format!("random n=1e4 m=1e5 worst {worst:.2?}, planted n=1e5 m=5e5 {big:.2?}"))
}

/// All labelings of `0..n` over {unlabeled, Fork, Merge}.
fn labelings(n: usize) -> impl Iterator<Item = Labeling> {
    (0..3usize.pow(n as u32)).map(move |mut code| {
        let mut l = Labeling::new();
        for v in 0..n {
            match code % 3 {
                1 => {
                    l.set(VertexId(v), Label::Fork);
                }
                2 => {
                    l.set(VertexId(v), Label::Merge);
                }
                _ => {}
            }
            code /= 3;
        }
        l
    })
}

fn gadget_agrees(inst: &FadlInstance) -> bool {
    decide(inst) == decide(&from_fads(&to_fads(inst).unwrap()))
}

/// Exhaustive over every digraph and every partial labeling for n ≤ 4 and
/// k ≤ 2; for n = 5, 6 the full space is out of reach and is sampled.
fn c10_gadget() -> Verdict {
    let mut checked = 0usize;
    for n in 0..=4usize {
        let pairs = n * n.saturating_sub(1);
        for mask in 0u64..1 << pairs {
            let d = digraph_from_mask(n, mask);
            for l in labelings(n) {
                for k in 0..=2 {
                    let inst = FadlInstance::new(d.clone(), l.clone(), k).unwrap();
                    ensure(gadget_agrees(&inst), || format!("{inst:?}"))?;
                    checked += 1;
                }
            }
        }
    }
    let exhaustive = checked;
    let mut rng = SplitMix64::new(0xACCE_0010);
    for n in [5usize, 6] {
        for _ in 0..3000 {
            let m = rng.below(n * (n - 1) + 1);
            let (k, p) = (rng.below(3) as i64, [0.2, 0.5, 0.8][rng.below(3)]);
            let inst = random_fadl(&mut rng, n, m, k, p);
            ensure(gadget_agrees(&inst), || format!("{inst:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{exhaustive} instances exhaustively (n <= 4), {} sampled (n = 5, 6)", checked - exhaustive))
}

fn main() -> ExitCode {
    let fadl = fadl_corpus();
    let fads = fads_corpus();
    let planted = planted_corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("recognition routes agree on all digraphs with n <= 4", Box::new(c1_recognition)),
        ("D_k is not a funnel and has optimum 1, k <= 20", Box::new(c2_forbidden_family)),
        ("worked example has optimum 2 with a known certificate", Box::new(c3_sample)),
        ("every rule application preserves the decision", Box::new(|| c4_rule_safety(&fadl))),
        ("kernelize_fads preserves the decision", Box::new(|| c5_end_to_end(&fads))),
        ("brute force and labeling oracles agree", Box::new(|| c6_oracles(&fadl, &fads))),
        ("size audits pass on planted instances", Box::new(|| c7_audits(&planted))),
        ("kernels are fixed points and idempotent", Box::new(|| c8_fixed_point(&fadl, &fads, &planted))),
        ("performance smoke", Box::new(c9_performance)),
        ("gadget encoding preserves the decision", Box::new(c10_gadget)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
