use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fads_cli::commands::{
    gen_cmd, kernelize_cmd, recognize, reject, solve_cmd, verify_cmd, Engine, Family, Report, EXIT_INPUT, EXIT_NO,
    EXIT_UNKNOWN, EXIT_YES,
};
use fads_cli::format::{emit_parsed, parse_instance, parse_solution, to_dot, FormatErrorKind, ParsedInstance};
use fads_core::generator::GenSpec;
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "fads", version, about = "Funnel arc deletion: recognition, kernelization and exact solving")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the digraph is a funnel; print a labeling or a witness.
    Recognize {
        /// Instance file, or a directory of instance files.
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Apply the reduction rules exhaustively.
    Kernelize {
        path: PathBuf,
        /// Where to write the kernel (a directory in batch mode). Without it
        /// the kernel goes to stdout and the report to stderr.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Exit 1 when a size audit fails.
        #[arg(long)]
        audit: bool,
        #[arg(long)]
        json: bool,
        /// Report the elapsed time.
        #[arg(long)]
        timing: bool,
    },
    /// Decide the instance exactly.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = EngineArg::Bnb)]
        engine: EngineArg,
        /// Report the optimum, not only the decision.
        #[arg(long)]
        optimize: bool,
        /// Search node limit of the branch-and-bound engine.
        #[arg(long, default_value_t = 1_000_000)]
        node_budget: u64,
        /// Where to write the solution (a directory in batch mode).
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Check a deletion set and labeling against an instance.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generate an instance.
    Gen {
        #[arg(long, value_enum, default_value_t = FamilyArg::Planted)]
        family: FamilyArg,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        m: usize,
        /// Planted budget, or the pattern index for the forbidden family.
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        fork_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; planted noise arcs go to `<output>.plant`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-emit an instance in canonical form.
    Normalize {
        path: PathBuf,
        /// Emit Graphviz DOT instead.
        #[arg(long)]
        dot: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Brute,
    Labelings,
    Bnb,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Random,
    Planted,
    Forbidden,
}

/// What one input file produced.
struct Outcome {
    code: i32,
    /// Report for stdout.
    stdout: String,
    /// Diagnostics or a report moved aside for stdout data.
    stderr: String,
    /// Payload for the output path, if any.
    payload: Option<String>,
}

impl Outcome {
    fn input_error(path: &Path, err: impl std::fmt::Display) -> Self {
        Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("{}: {err}\n", path.display()),
            payload: None,
        }
    }
}

fn load(path: &Path) -> Result<ParsedInstance, Outcome> {
    let text = fs::read_to_string(path).map_err(|e| Outcome::input_error(path, e))?;
    parse_instance(&text).map_err(|e| Outcome::input_error(path, e))
}

fn rendered(report: &Report, json: bool) -> String {
    if json {
        format!("{}\n", report.json)
    } else {
        report.text.clone()
    }
}

/// Instance files of a directory in name order, or the path itself.
fn inputs(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).with_context(|| format!("reading {}", path.display()))? {
        let p = entry?.path();
        if p.is_file() {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Exit code of a batch: input errors dominate, then unknowns, then noes.
fn batch_code(codes: impl IntoIterator<Item = i32>) -> i32 {
    codes
        .into_iter()
        .max_by_key(|&c| match c {
            EXIT_INPUT => 3,
            EXIT_UNKNOWN => 2,
            EXIT_NO => 1,
            _ => 0,
        })
        .unwrap_or(EXIT_YES)
}

/// Runs `work` on every input, in parallel for directories, and prints the
/// results in file order.
fn run_batch(path: &Path, output: Option<&Path>, work: impl Fn(&Path) -> Outcome + Sync) -> Result<i32> {
    let files = inputs(path)?;
    let batch = path.is_dir();
    if batch {
        if let Some(dir) = output {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    let outcomes: Vec<Outcome> = files.par_iter().map(|f| work(f)).collect();
    for (file, out) in files.iter().zip(&outcomes) {
        if batch {
            println!("c file {}", file.file_name().unwrap_or_default().to_string_lossy());
        }
        print!("{}", out.stdout);
        eprint!("{}", out.stderr);
        if let (Some(payload), Some(target)) = (&out.payload, output) {
            let target = if batch {
                target.join(file.file_name().unwrap_or_default())
            } else {
                target.to_path_buf()
            };
            fs::write(&target, payload).with_context(|| format!("writing {}", target.display()))?;
        } else if let Some(payload) = &out.payload {
            print!("{payload}");
        }
    }
    Ok(batch_code(outcomes.iter().map(|o| o.code)))
}

fn kernelize_one(path: &Path, to_file: bool, audit: bool, json: bool, timing: bool) -> Outcome {
    let inst = match load(path) {
        Ok(i) => i,
        Err(o) => return o,
    };
    let run = kernelize_cmd(&inst, audit, timing);
    let report = rendered(&run.report, json);
    let (stdout, stderr) = if to_file {
        (report, String::new())
    } else {
        (String::new(), report)
    };
    Outcome {
        code: run.report.code,
        stdout,
        stderr,
        payload: Some(run.kernel),
    }
}

fn solve_one(path: &Path, engine: Engine, optimize: bool, node_budget: u64, json: bool) -> Outcome {
    let inst = match load(path) {
        Ok(i) => i,
        Err(o) => return o,
    };
    let run = solve_cmd(&inst, engine, optimize, node_budget);
    Outcome {
        code: run.report.code,
        stdout: rendered(&run.report, json),
        stderr: String::new(),
        payload: run.solution,
    }
}

fn verify(instance: &Path, solution: &Path, json: bool) -> i32 {
    let inst = match load(instance) {
        Ok(i) => i,
        Err(o) => {
            eprint!("{}", o.stderr);
            return o.code;
        }
    };
    let report = match fs::read_to_string(solution) {
        Err(e) => {
            eprintln!("{}: {e}", solution.display());
            return EXIT_INPUT;
        }
        Ok(text) => match parse_solution(&text, inst.digraph().id_bound()) {
            Ok(s) => verify_cmd(&inst, &s),
            // A vertex the instance does not have cannot name one of its arcs.
            Err(e) if matches!(e.kind, FormatErrorKind::OutOfRange { .. }) => reject(&e.to_string()),
            Err(e) => {
                eprintln!("{}: {e}", solution.display());
                return EXIT_INPUT;
            }
        },
    };
    print!("{}", rendered(&report, json));
    report.code
}

fn generate(family: Family, spec: &GenSpec, output: Option<&Path>) -> Result<i32> {
    let run = match gen_cmd(family, spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("invalid generator spec: {e}");
            return Ok(EXIT_INPUT);
        }
    };
    match output {
        Some(path) => {
            fs::write(path, &run.instance).with_context(|| format!("writing {}", path.display()))?;
            if let Some(plant) = &run.plant {
                let mut sidecar = path.as_os_str().to_owned();
                sidecar.push(".plant");
                fs::write(&sidecar, plant).with_context(|| format!("writing {}", sidecar.to_string_lossy()))?;
            }
        }
        None => print!("{}", run.instance),
    }
    Ok(EXIT_YES)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Recognize { path, json } => run_batch(&path, None, |f| match load(f) {
            Ok(inst) => {
                let r = recognize(&inst);
                Outcome {
                    code: r.code,
                    stdout: rendered(&r, json),
                    stderr: String::new(),
                    payload: None,
                }
            }
            Err(o) => o,
        }),
        Command::Kernelize {
            path,
            output,
            audit,
            json,
            timing,
        } => {
            let to_file = output.is_some();
            run_batch(&path, output.as_deref(), |f| kernelize_one(f, to_file, audit, json, timing))
        }
        Command::Solve {
            path,
            engine,
            optimize,
            node_budget,
            output,
            json,
        } => {
            let engine = match engine {
                EngineArg::Brute => Engine::Brute,
                EngineArg::Labelings => Engine::Labelings,
                EngineArg::Bnb => Engine::Bnb,
            };
            // The JSON report already carries the solution; only a file target gets it again.
            let to_file = output.is_some();
            run_batch(&path, output.as_deref(), |f| {
                let mut out = solve_one(f, engine, optimize, node_budget, json);
                if json && !to_file {
                    out.payload = None;
                }
                out
            })
        }
        Command::Verify {
            instance,
            solution,
            json,
        } => Ok(verify(&instance, &solution, json)),
        Command::Gen {
            family,
            n,
            m,
            k,
            fork_fraction,
            seed,
            output,
        } => {
            let family = match family {
                FamilyArg::Random => Family::Random,
                FamilyArg::Planted => Family::Planted,
                FamilyArg::Forbidden => Family::Forbidden,
            };
            let spec = GenSpec {
                n,
                m,
                k_plant: k,
                fork_fraction,
                seed,
            };
            generate(family, &spec, output.as_deref())
        }
        Command::Normalize { path, dot, output } => run_batch(&path, output.as_deref(), |f| match load(f) {
            Ok(inst) => Outcome {
                code: EXIT_YES,
                stdout: String::new(),
                stderr: String::new(),
                payload: Some(if dot { to_dot(&inst) } else { emit_parsed(&inst, &[]) }),
            },
            Err(o) => o,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
