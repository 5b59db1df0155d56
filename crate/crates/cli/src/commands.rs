//! Command logic without file IO: each command turns parsed input into a
//! text report, a JSON mirror of it and an exit code.

use std::fmt::Write as _;
use std::time::Instant;

use fads_core::generator::{gen_forbidden, gen_planted, gen_random_funnel, GenError, GenSpec};
use fads_core::kernelizer::{canonical_no_instance, kernelize, kernelize_fads, KernelOutcome, KernelReport};
use fads_core::solver::{solve_branch_and_bound, solve_bruteforce, solve_labelings, BnbOptions, SolveResult, SolveStatus};
use fads_core::{
    check_solution, find_forbidden_witness, has_labeling_extension, FadlInstance, FadsInstance, Labeling,
    Solution,
};
use serde_json::{json, Value};

use crate::format::{emit_fadl, emit_fads, emit_solution, ParsedInstance};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub code: i32,
    pub text: String,
    pub json: Value,
}

fn labels_json(l: &Labeling) -> Value {
    Value::Array(
        l.iter()
            .map(|(v, lab)| json!([v.0 + 1, lab.as_char().to_string()]))
            .collect(),
    )
}

fn ids(vs: &[fads_core::VertexId]) -> Vec<usize> {
    vs.iter().map(|v| v.0 + 1).collect()
}

fn join(vs: &[usize]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn recognize(instance: &ParsedInstance) -> Report {
    let fadl = instance.to_fadl();
    let d = &fadl.digraph;
    let mut text = String::new();
    if let Some(l) = has_labeling_extension(d, &fadl.labeling) {
        text.push_str("FUNNEL\n");
        for (v, lab) in l.iter() {
            let _ = writeln!(text, "l {} {}", v.0 + 1, lab.as_char());
        }
        return Report {
            code: EXIT_YES,
            text,
            json: json!({"status": "FUNNEL", "labeling": labels_json(&l)}),
        };
    }
    text.push_str("NOT-FUNNEL\n");
    let witness = match find_forbidden_witness(d) {
        Err(_) => {
            let cycle = ids(&d.find_cycle().expect("cyclic"));
            let _ = writeln!(text, "w cycle {}", join(&cycle));
            json!({"cycle": cycle})
        }
        Ok(Some(w)) => {
            let (path, ins, outs) = (ids(&w.path), ids(&w.in_pair), ids(&w.out_pair));
            let _ = writeln!(text, "w in {}", join(&ins));
            let _ = writeln!(text, "w path {}", join(&path));
            let _ = writeln!(text, "w out {}", join(&outs));
            json!({"path": path, "in": ins, "out": outs})
        }
        Ok(None) => {
            text.push_str("w labels\n");
            json!({"labels": "fixed labels admit no funnel labeling"})
        }
    };
    Report {
        code: EXIT_NO,
        text,
        json: json!({"status": "NOT-FUNNEL", "witness": witness}),
    }
}

/// The canonical refutation in the requested flavour.
fn canonical_no_text(problem_fadl: bool) -> String {
    let no = canonical_no_instance();
    if problem_fadl {
        emit_fadl(&fads_core::from_fads(&no), &[])
    } else {
        emit_fads(&no, &[])
    }
}

pub struct KernelRun {
    pub report: Report,
    /// The reduced instance in the input's format.
    pub kernel: String,
}

pub fn kernelize_cmd(instance: &ParsedInstance, audit_required: bool, timing: bool) -> KernelRun {
    let start = Instant::now();
    let (mut rep, kernel): (KernelReport, String) = match instance {
        ParsedInstance::Fads(i) => {
            let (out, rep) = kernelize_fads(i);
            (rep, emit_fads(&out, &[]))
        }
        ParsedInstance::Fadl(i) => {
            let rep = kernelize(i);
            let text = match &rep.outcome {
                KernelOutcome::Kernel(k) => emit_fadl(k, &[]),
                KernelOutcome::TrivialNo => canonical_no_text(true),
            };
            (rep, text)
        }
    };
    rep.elapsed = Some(start.elapsed());

    let mut text = String::new();
    let refuted = rep.outcome == KernelOutcome::TrivialNo;
    text.push_str(if refuted { "s NO\n" } else { "s KERNEL\n" });
    let mut rules = Vec::new();
    for (r, c) in rep.rule_counts.iter() {
        let _ = writeln!(text, "rule {} {} {}", r.number(), r.name(), c);
        rules.push(json!({"rule": r.number(), "name": r.name(), "applied": c}));
    }
    let mut audit_json = Value::Null;
    let mut audit_ok = true;
    if let Some(a) = &rep.audit {
        let _ = writeln!(
            text,
            "size n {} m {} k {} labeled {} unlabeled {} both_degree_big {}",
            a.n, a.m, a.k, a.labeled_count, a.unlabeled_count, a.both_degree_big
        );
        let mut checks = Vec::new();
        for c in &a.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(text, "audit {verdict} {} observed {} limit {}", c.name, c.observed, c.limit);
            checks.push(json!({"bound": c.name, "observed": c.observed.to_string(), "limit": c.limit.to_string(), "pass": c.pass}));
        }
        audit_ok = a.all_pass();
        audit_json = json!({
            "n": a.n, "m": a.m, "k": a.k, "labeled": a.labeled_count,
            "unlabeled": a.unlabeled_count, "both_degree_big": a.both_degree_big, "checks": checks,
        });
    }
    let elapsed_ms = rep.elapsed.map(|d| d.as_secs_f64() * 1000.0);
    if timing {
        let _ = writeln!(text, "c elapsed_ms {:.3}", elapsed_ms.unwrap_or(0.0));
    }
    let code = if refuted || (audit_required && !audit_ok) {
        EXIT_NO
    } else {
        EXIT_YES
    };
    let mut json = json!({
        "status": if refuted { "NO" } else { "KERNEL" },
        "rules": rules,
        "audit": audit_json,
    });
    if timing {
        json["elapsed_ms"] = json!(elapsed_ms);
    }
    KernelRun {
        report: Report { code, text, json },
        kernel,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Brute,
    Labelings,
    Bnb,
}

pub struct SolveRun {
    pub report: Report,
    pub solution: Option<String>,
}

pub fn solve_cmd(instance: &ParsedInstance, engine: Engine, optimize: bool, node_budget: u64) -> SolveRun {
    let fadl = instance.to_fadl();
    let result: SolveResult = match engine {
        Engine::Brute => solve_bruteforce(&fadl),
        Engine::Labelings => solve_labelings(&fadl),
        Engine::Bnb => solve_branch_and_bound(
            &fadl,
            &BnbOptions {
                node_budget,
                optimize,
            },
        ),
    };
    let (status, code) = match &result.status {
        SolveStatus::Yes(_) => ("YES", EXIT_YES),
        SolveStatus::No => ("NO", EXIT_NO),
        SolveStatus::Unknown => ("UNKNOWN", EXIT_UNKNOWN),
    };
    let mut text = format!("s {status}\n");
    if let Some(o) = result.optimum {
        // The labeling engine knows the optimum even when it exceeds k.
        if optimize || result.is_yes() {
            let _ = writeln!(text, "o {o}");
        }
    }
    let _ = writeln!(text, "c nodes {}", result.nodes);
    let solution = result.solution().map(emit_solution);
    let json = json!({
        "status": status,
        "optimum": result.optimum,
        "nodes": result.nodes,
        "deleted": result.solution().map(|s| s.deleted_arcs.iter().map(|a| [a.tail.0 + 1, a.head.0 + 1]).collect::<Vec<_>>()),
        "labeling": result.solution().map(|s| labels_json(&s.labeling)),
    });
    SolveRun {
        report: Report { code, text, json },
        solution,
    }
}

pub fn verify_cmd(instance: &ParsedInstance, solution: &Solution) -> Report {
    let fadl: FadlInstance = instance.to_fadl();
    match check_solution(&fadl, solution) {
        Ok(()) => Report {
            code: EXIT_YES,
            text: "ACCEPT\n".into(),
            json: json!({"status": "ACCEPT"}),
        },
        Err(why) => reject(&why.to_string()),
    }
}

/// Rejection with a diagnostic.
pub fn reject(reason: &str) -> Report {
    Report {
        code: EXIT_NO,
        text: format!("REJECT {reason}\n"),
        json: json!({"status": "REJECT", "reason": reason}),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Random,
    Planted,
    Forbidden,
}

pub struct GenRun {
    pub instance: String,
    /// Noise arcs of a planted instance, one `a` line each.
    pub plant: Option<String>,
}

pub fn gen_cmd(family: Family, spec: &GenSpec) -> Result<GenRun, GenError> {
    let header = vec![format!(
        "generated family {} n {} m {} k {} fork_fraction {} seed {}",
        match family {
            Family::Random => "random",
            Family::Planted => "planted",
            Family::Forbidden => "forbidden",
        },
        spec.n,
        spec.m,
        spec.k_plant,
        spec.fork_fraction,
        spec.seed
    )];
    Ok(match family {
        Family::Random => {
            let (d, _) = gen_random_funnel(spec)?;
            GenRun {
                instance: emit_fads(&FadsInstance::new(d, spec.k_plant), &header),
                plant: None,
            }
        }
        Family::Planted => {
            let p = gen_planted(spec)?;
            let mut plant = format!("c {} noise arcs\n", p.noise.len());
            for a in &p.noise {
                let _ = writeln!(plant, "a {} {}", a.tail.0 + 1, a.head.0 + 1);
            }
            GenRun {
                instance: emit_fads(&p.instance, &header),
                plant: Some(plant),
            }
        }
        Family::Forbidden => {
            // D_k needs one deletion.
            let d = gen_forbidden(spec.k_plant);
            GenRun {
                instance: emit_fads(&FadsInstance::new(d, 1), &[format!("forbidden pattern D_{}", spec.k_plant)]),
                plant: None,
            }
        }
    })
}
