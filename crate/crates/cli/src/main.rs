use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pdbep::format::{format_rational, parse_rational, serialize_instance, serialize_packing};
use pdbep::greedy::{edge_addition, edge_deletion, EdgeOrder};
use pdbep::harness::{
    certify_suite, generate, relabeling, run, BatchConfig, BoundPolicy, Family, GeneratorSpec, RunError,
    RunParams, RunReport, Solver, WeightPolicy,
};
use pdbep::lp::{build_lp2, gap_demo_with};
use pdbep::oracle::{OracleConfig, DEFAULT_MAX_EDGES};
use pdbep::rounding::solve_ip2;
use pdbep::tree::tree_dp;
use pdbep::weighted::partition_solve_labeled;
use pdbep::{parse_instance, EdgePacking, Instance, Rational};

#[derive(Parser)]
#[command(name = "pdbep", version, about = "Partial degree bounded edge packing solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and certify the output.
    Solve(SolveArgs),
    /// Print a generated instance.
    Gen(GenArgs),
    /// Run a seeded batch and check every certificate.
    Certify(CertifyArgs),
    /// Integrality gap of the natural relaxation on complete graphs.
    Gap(GapArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Instance file, or `-` for stdin.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value = "auto", value_parser = parse_solver)]
    alg: Solver,
    /// Rounding parameter, decimal or p/q.
    #[arg(long, default_value = "1/100", value_parser = parse_eps)]
    eps: Rational,
    /// Shuffle the greedy edge order with this seed.
    #[arg(long)]
    order: Option<u64>,
    /// Root vertex for the tree solver.
    #[arg(long)]
    root: Option<usize>,
    /// Shuffle the weighted solver's vertex labels with this seed.
    #[arg(long)]
    relabel: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_EDGES)]
    oracle_limit: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Write the root penalized LP in LP text format.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
    /// Write solver steps as JSON lines (`-` for stderr).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Edge count, used by `gnm` only.
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// `uniform`, `fixed:K` or `fraction:P/Q`.
    #[arg(long, default_value = "uniform", value_parser = parse_bounds)]
    bounds: BoundPolicy,
    /// `none` or `LO..HI`.
    #[arg(long, default_value = "none", value_parser = parse_weights)]
    weights: WeightPolicy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CertifyArgs {
    /// TOML batch description; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the full summary as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(clap::Args)]
struct GapArgs {
    #[arg(long, value_delimiter = ',', default_value = "8,12,16,24")]
    n: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_EDGES)]
    oracle_limit: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

fn parse_solver(s: &str) -> Result<Solver, String> {
    s.parse()
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

fn parse_eps(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("invalid rational `{s}`"))
}

fn parse_bounds(s: &str) -> Result<BoundPolicy, String> {
    if s == "uniform" {
        return Ok(BoundPolicy::UniformRandom);
    }
    if let Some(k) = s.strip_prefix("fixed:") {
        let k = k.parse().map_err(|_| format!("invalid bound `{k}`"))?;
        return Ok(BoundPolicy::Fixed { k });
    }
    if let Some(f) = s.strip_prefix("fraction:") {
        let (p, q) = f.split_once('/').ok_or("fraction needs P/Q")?;
        let num = p.parse().map_err(|_| format!("invalid numerator `{p}`"))?;
        let den = q.parse().map_err(|_| format!("invalid denominator `{q}`"))?;
        return Ok(BoundPolicy::Fraction { num, den });
    }
    Err(format!("unknown bound policy `{s}`"))
}

fn parse_weights(s: &str) -> Result<WeightPolicy, String> {
    if s == "none" {
        return Ok(WeightPolicy::None);
    }
    let (lo, hi) = s.split_once("..").ok_or("weights must be `none` or `LO..HI`")?;
    Ok(WeightPolicy::UniformInt {
        lo: lo.parse().map_err(|_| format!("invalid weight `{lo}`"))?,
        hi: hi.parse().map_err(|_| format!("invalid weight `{hi}`"))?,
    })
}

/// Exit status: 0 success, 1 certificate violation, 2 input error.
enum Status {
    Ok,
    Violation,
}

/// Errors from bad input; everything else maps to the same code.
struct InputError(anyhow::Error);

impl From<anyhow::Error> for InputError {
    fn from(e: anyhow::Error) -> Self {
        InputError(e)
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        _ => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn trace_lines(inst: &Instance, args: &SolveArgs, solver: Solver) -> Result<Vec<String>> {
    let line = |v: serde_json::Value| v.to_string();
    let order = args.order.map(|s| EdgeOrder::seeded(inst.m(), s));
    let mut out = Vec::new();
    match solver {
        Solver::Add => {
            let (_, trace) = edge_addition(&inst.unweighted(), order.as_ref());
            out.push(serde_json::to_string(&trace)?);
        }
        Solver::Delete => {
            let flat = inst.unweighted();
            let order = order.unwrap_or_else(|| EdgeOrder::natural(inst.m()));
            let kept = edge_deletion(&flat, Some(&order));
            out.push(line(json!({ "order": order, "kept": kept })));
        }
        Solver::Round => {
            let (_, state) = solve_ip2(&inst.unweighted(), &args.eps)?;
            for r in &state.rounds {
                out.push(serde_json::to_string(r)?);
            }
            out.push(line(json!({
                "accepted": state.accepted,
                "root_objective": format_rational(&state.root_objective),
            })));
        }
        Solver::Weighted => {
            let sol = partition_solve_labeled(inst, &relabeling(inst.n(), args.relabel));
            for d in &sol.partition.directed {
                out.push(serde_json::to_string(d)?);
            }
            for f in &sol.family_weights {
                out.push(serde_json::to_string(f)?);
            }
            out.push(line(json!({
                "t": sol.partition.t,
                "discarded": sol.partition.discarded,
                "chosen": sol.chosen,
            })));
        }
        Solver::Tree => {
            let sol = tree_dp(&inst.unweighted(), args.root)?;
            for v in 0..inst.n() {
                out.push(line(json!({
                    "vertex": v,
                    "h": sol.labels.h[v],
                    "g": sol.labels.g[v],
                    "b": sol.labels.b[v],
                    "class": sol.labels.class[v],
                    "s_prime": sol.labels.s_prime[v],
                    "s_double": sol.labels.s_double[v],
                })));
            }
            out.push(line(json!({ "root": sol.tree.root, "root_kind": sol.root_kind })));
        }
        Solver::Exact | Solver::Auto => {}
    }
    Ok(out)
}

fn report_text(inst: &Instance, r: &RunReport) -> String {
    let q = |x: &Option<Rational>| x.as_ref().map_or("-".to_owned(), format_rational);
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut out = format!(
        "# solver {} (requested {})\n# instance {} (n = {}, m = {})\n",
        r.solver, r.requested, r.instance, r.n, r.m
    );
    out += &format!(
        "# feasible {}, bound {:?} {}, ratio {}, guarantee {}, certified {}\n",
        yes(r.feasible),
        r.bound_kind,
        format_rational(&r.bound),
        q(&r.ratio),
        q(&r.guarantee),
        r.certified.map_or("n/a", yes)
    );
    let obj = if r.solver.uses_weights() {
        inst.clone()
    } else {
        inst.unweighted()
    };
    out += &serialize_packing(&obj, &EdgePacking::from_edges(r.witness.iter().copied()));
    out
}

fn solve_cmd(args: &SolveArgs) -> Result<Status, InputError> {
    let text = read_input(&args.input)?;
    let inst = parse_instance(&text).map_err(|e| anyhow!("{}: {e}", args.input.display()))?;
    if let Some(path) = &args.dump_lp {
        let flat = inst.unweighted();
        let lp2 = build_lp2(&flat, &vec![false; flat.n()], flat.bounds(), &args.eps)
            .map_err(|e| anyhow!("{e}"))?;
        write_output(Some(path), &lp2.lp.to_lp_text())?;
    }
    let params = RunParams {
        eps: args.eps.clone(),
        order_seed: args.order,
        root: args.root,
        relabel_seed: args.relabel,
        oracle: OracleConfig {
            max_edges: args.oracle_limit,
            prune: true,
        },
    };
    let report = run(&inst, args.alg, &params).map_err(|e| match e {
        RunError::Tree(t) => anyhow!("{t}"),
        other => anyhow!("{other}"),
    })?;
    if let Some(path) = &args.trace {
        let lines = trace_lines(&inst, args, report.solver)?.join("\n") + "\n";
        if path.as_os_str() == "-" {
            eprint!("{lines}");
        } else {
            write_output(Some(path), &lines)?;
        }
    }
    let rendered = match args.format {
        OutputFormat::Json => report.to_json() + "\n",
        OutputFormat::Text => report_text(&inst, &report),
    };
    write_output(None, &rendered)?;
    if let Some(reason) = report.failure() {
        eprintln!("certificate violation: {reason}");
        return Ok(Status::Violation);
    }
    Ok(Status::Ok)
}

fn gen_cmd(args: &GenArgs) -> Result<Status, InputError> {
    let spec = GeneratorSpec {
        family: args.family,
        n: args.n,
        m: args.m,
        bounds: args.bounds,
        weights: args.weights,
        seed: args.seed,
    };
    let inst = generate(&spec).map_err(|e| anyhow!("{e}"))?;
    write_output(args.output.as_deref(), &serialize_instance(&inst))?;
    Ok(Status::Ok)
}

fn certify_cmd(args: &CertifyArgs) -> Result<Status, InputError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = read_input(path)?;
            toml::from_str::<BatchConfig>(&text)
                .map_err(|e| anyhow!("{}: {e}", path.display()))?
        }
        None => BatchConfig::default(),
    };
    if let Some(w) = args.workers {
        config.workers = w;
    }
    let summary = certify_suite(&config).map_err(|e| anyhow!("{e}"))?;
    if let Some(path) = &args.json {
        write_output(Some(path), &(summary.to_json() + "\n"))?;
    }
    print!("{}", summary.table_text());
    if summary.passed() {
        println!(
            "{}: {} instances, {} runs, all certificates hold",
            summary.name,
            summary.instances,
            summary.cases.len()
        );
        return Ok(Status::Ok);
    }
    for v in &summary.violations {
        let eps = v.eps.as_ref().map(|e| format!(" eps {}", format_rational(e)));
        eprintln!(
            "violation: (seed {}, {}){}: {}",
            v.seed,
            v.solver,
            eps.unwrap_or_default(),
            v.reason
        );
    }
    Ok(Status::Violation)
}

fn gap_cmd(args: &GapArgs) -> Result<Status, InputError> {
    let mut ok = true;
    let mut prev: Option<Rational> = None;
    for &n in &args.n {
        let rep = gap_demo_with(n, args.oracle_limit).map_err(|e| anyhow!("{e}"))?;
        let ratio = rep.ratio();
        let floor_ok = rep.lp1_value >= rep.witness_floor();
        let rising = prev.as_ref().map_or(true, |p| &ratio > p);
        ok &= floor_ok && rising;
        match args.format {
            OutputFormat::Json => println!(
                "{}",
                json!({
                    "n": n,
                    "lp1_value": format_rational(&rep.lp1_value),
                    "ip_bound": format_rational(&rep.ip_bound),
                    "ip_exact": rep.ip_exact,
                    "ratio": format_rational(&ratio),
                    "floor_holds": floor_ok,
                    "increasing": rising,
                })
            ),
            OutputFormat::Text => println!(
                "n {n:>3}  lp1 {:>10}  ip {:>4}{}  ratio {}",
                format_rational(&rep.lp1_value),
                format_rational(&rep.ip_bound),
                if rep.ip_exact { " (exact)" } else { "" },
                format_rational(&ratio)
            ),
        }
        prev = Some(ratio);
    }
    if !ok {
        eprintln!("gap certificate violated");
        return Ok(Status::Violation);
    }
    Ok(Status::Ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => solve_cmd(a),
        Command::Gen(a) => gen_cmd(a),
        Command::Certify(a) => certify_cmd(a),
        Command::Gap(a) => gap_cmd(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violation) => ExitCode::from(1),
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
