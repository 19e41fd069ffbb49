//! `rrp`: solve, generate, evaluate and verify reconfigurable-routing
//! instances.
//!
//! Exit codes are the process-level contract: 0 = yes / solved,
//! 1 = no / infeasible, 2 = usage or data error. All results go to
//! standard output as JSON; diagnostics go to standard error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rrp_core::exact::{self, ExactOptions, SolveOutcome};
use rrp_core::families::{self, Family};
use rrp_core::fileio;
use rrp_core::forge::{self, ForgeError};
use rrp_core::net::{validate_instance, Configuration, FlowPath, NodeIx, RRPInstance};
use rrp_core::rational::{fmt_rat, fmt_rat_decimal, parse_rat, Rat};
use rrp_core::tractable::{self, SolverTag};

#[derive(Parser)]
#[command(name = "rrp", version, about = "Reconfigurable routing: solvers, reductions, oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file and print cost, configuration and flows.
    Solve(SolveArgs),
    /// Generate a hardness-reduction instance (optionally with a witness).
    Reduce(ReduceArgs),
    /// Price a (configuration, flows) pair against an instance.
    Evaluate(EvaluateArgs),
    /// Run a brute-force oracle on a source problem.
    Oracle(OracleArgs),
    /// Generate a member of a topology family as an instance skeleton.
    GenFamily(GenFamilyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverChoice {
    Auto,
    Exact,
    Poly,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    solver: SolverChoice,
    /// Compare the optimum against kappa and set the exit code to the
    /// decision.
    #[arg(long)]
    decide: bool,
    /// Run the exact solver past its port budget.
    #[arg(long)]
    force: bool,
    /// Worker threads for exact enumeration (deterministic result).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Append approximate decimal renderings next to exact rationals.
    #[arg(long)]
    decimal: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Bisection,
    Rxc3Tree,
    Rxc3Cube,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(value_enum)]
    from: Construction,
    /// Source problem file (JSON).
    #[arg(long)]
    source: PathBuf,
    /// Network family carrying the construction (bisection and rxc3-tree).
    #[arg(long, default_value = "hypercube")]
    family: String,
    /// Dynamic link weight, strictly between 0 and 1 (rxc3-cube only).
    #[arg(long, default_value = "1/2")]
    mu: String,
    /// Output directory for instance, roles and parameter manifest.
    #[arg(long)]
    out: PathBuf,
    /// Source-problem certificate: bisection partition or exact cover.
    #[arg(long)]
    certificate: Option<PathBuf>,
    /// Export hypercube instances beyond the default size refusal.
    #[arg(long)]
    force: bool,
    /// Truncate the heavy demand block of hypercube exports to this many
    /// entries (full block when omitted).
    #[arg(long)]
    alpha_sample: Option<u64>,
    #[arg(long)]
    decimal: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    instance: PathBuf,
    config: PathBuf,
    flows: PathBuf,
    #[arg(long)]
    decimal: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleProblem {
    Bisection,
    Xc3,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(value_enum)]
    problem: OracleProblem,
    source: PathBuf,
}

#[derive(Args)]
struct GenFamilyArgs {
    /// hypercube | complete | cycle | complete-binary-tree | square-grid |
    /// independent-set
    family: String,
    #[arg(long, conflicts_with = "at_least")]
    index: Option<u32>,
    /// Pick the smallest member with at least this many nodes.
    #[arg(long)]
    at_least: Option<u64>,
    /// Wire every node to a single switch this many times.
    #[arg(long, default_value_t = 0)]
    ports_per_node: u64,
    /// Write the instance here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<u8> {
    match Cli::parse().command {
        Command::Solve(args) => cmd_solve(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::GenFamily(args) => cmd_gen_family(args),
    }
}

fn exact_options(force: bool, jobs: usize) -> ExactOptions {
    let mut opts = ExactOptions { force, jobs, ..Default::default() };
    if let Ok(budget) = std::env::var("RRP_PORT_BUDGET") {
        if let Ok(b) = budget.parse::<u64>() {
            opts.port_budget = b;
        }
    }
    opts
}

fn load_instance(path: &Path) -> Result<RRPInstance> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read instance file {}", path.display()))?;
    let inst = fileio::parse_instance(&text)?;
    let report = validate_instance(&inst);
    if !report.ok() {
        bail!("invalid instance:\n{report}");
    }
    Ok(inst)
}

fn rat_json(r: &Rat, decimal: bool) -> serde_json::Value {
    if decimal {
        serde_json::json!({ "exact": fmt_rat(r), "decimal": fmt_rat_decimal(r, 6) })
    } else {
        serde_json::Value::String(fmt_rat(r))
    }
}

fn flows_json(inst: &RRPInstance, paths: &[FlowPath]) -> BTreeMap<String, Vec<serde_json::Value>> {
    let keyed: Vec<((NodeIx, NodeIx), FlowPath)> =
        inst.workload.demands.iter().zip(paths).map(|(d, p)| ((d.src, d.dst), p.clone())).collect();
    let text = fileio::serialize_flows(&keyed, &inst.network);
    serde_json::from_str(&text).expect("flow serialization is valid JSON")
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let opts = exact_options(args.force, args.jobs);
    let (tag, result) = match args.solver {
        SolverChoice::Auto => tractable::dispatch(&inst, &opts)?,
        SolverChoice::Exact => (SolverTag::Exact, exact::solve_exact(&inst, &opts)?),
        SolverChoice::Poly => {
            let r = tractable::solve_segregated_single_switch(&inst)?;
            let tag = tractable::tractable_case(&inst).expect("solver succeeded");
            (tag, r)
        }
    };
    let tag_name = match tag {
        SolverTag::SegregatedSingleSwitch => "segregated-single-switch",
        SolverTag::UniformCompleteGraph => "complete-graph",
        SolverTag::Exact => "exact",
    };
    let mut out = serde_json::json!({
        "solver": tag_name,
        "configurations_examined": result.configurations_examined,
    });
    let code = match &result.outcome {
        SolveOutcome::Optimal { cost, configuration, assignment } => {
            out["outcome"] = "optimal".into();
            out["cost"] = rat_json(cost, args.decimal);
            out["configuration"] = serde_json::from_str(&fileio::serialize_configuration(
                configuration,
                &inst.network,
            ))
            .expect("valid JSON");
            out["assignment"] = serde_json::json!(flows_json(&inst, &assignment.paths));
            if args.decide {
                let yes = *cost <= inst.kappa;
                out["decide"] = if yes { "yes".into() } else { "no".into() };
                u8::from(!yes)
            } else {
                0
            }
        }
        SolveOutcome::Infeasible => {
            out["outcome"] = "infeasible".into();
            if args.decide {
                out["decide"] = "no".into();
            }
            1
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(code)
}

#[derive(serde::Deserialize)]
struct PartitionFile {
    a: Vec<String>,
    b: Vec<String>,
}

#[derive(serde::Deserialize)]
struct CoverFile {
    /// 1-based clause indices.
    cover: Vec<usize>,
}

fn write_artifact_files(dir: &Path, art: &forge::ReductionArtifact) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("instance.json"), fileio::serialize_instance(&art.instance))?;
    let roles: BTreeMap<String, String> = art
        .roles
        .iter()
        .map(|(&v, role)| (art.instance.network.node_name(v), role.clone()))
        .collect();
    fs::write(dir.join("roles.json"), serde_json::to_string_pretty(&roles)?)?;
    fs::write(dir.join("params.json"), serde_json::to_string_pretty(&art.params)?)?;
    Ok(())
}

fn write_witness_files(
    dir: &Path,
    inst: &RRPInstance,
    cfg: &Configuration,
    paths: &[FlowPath],
) -> Result<()> {
    fs::write(
        dir.join("witness.config.json"),
        fileio::serialize_configuration(cfg, &inst.network),
    )?;
    let keyed: Vec<((NodeIx, NodeIx), FlowPath)> =
        inst.workload.demands.iter().zip(paths).map(|(d, p)| ((d.src, d.dst), p.clone())).collect();
    fs::write(dir.join("witness.flows.json"), fileio::serialize_flows(&keyed, &inst.network))?;
    Ok(())
}

fn cmd_reduce(args: ReduceArgs) -> Result<u8> {
    let source_text = fs::read_to_string(&args.source)
        .with_context(|| format!("cannot read source file {}", args.source.display()))?;
    let family: Family = args.family.parse().map_err(|e: String| anyhow!(e))?;

    match args.from {
        Construction::Bisection => {
            let src = forge::BisectionInstance::parse(&source_text)?;
            let art = forge::reduce_bisection(&src, family)?;
            if let Some(requested) = art.artifact.clamped_k {
                eprintln!(
                    "note: k = {requested} clamped to {} (3-regular graphs have bisection width at most n/3 + 46)",
                    art.k
                );
            }
            write_artifact_files(&args.out, &art.artifact)?;
            let mut out = serde_json::json!({
                "construction": "bisection",
                "out": args.out.display().to_string(),
                "kappa": rat_json(&art.artifact.instance.kappa, args.decimal),
            });
            let mut code = 0;
            if let Some(cert) = &args.certificate {
                let cert_text = fs::read_to_string(cert)?;
                let partition: PartitionFile = serde_json::from_str(&cert_text)?;
                let (cfg, asg) = forge::witness_bisection(&art, &partition.a, &partition.b)?;
                let costs = forge::evaluate_components(&art.artifact, &cfg, &asg)?;
                write_witness_files(&args.out, &art.artifact.instance, &cfg, &asg.paths)?;
                let yes = costs.total <= art.artifact.instance.kappa;
                out["witness"] = serde_json::json!({
                    "alpha_component": rat_json(&costs.alpha, args.decimal),
                    "beta_component": rat_json(&costs.beta, args.decimal),
                    "unit_component": rat_json(&costs.unit, args.decimal),
                    "total": rat_json(&costs.total, args.decimal),
                    "decision": if yes { "yes" } else { "no" },
                });
                code = u8::from(!yes);
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(code)
        }
        Construction::Rxc3Tree => {
            let src = forge::Rxc3Instance::parse(&source_text)?;
            let art = forge::reduce_rxc3_tree(&src, family)?;
            write_artifact_files(&args.out, &art.artifact)?;
            let mut out = serde_json::json!({
                "construction": "rxc3-tree",
                "out": args.out.display().to_string(),
                "kappa": rat_json(&art.artifact.instance.kappa, args.decimal),
            });
            let mut code = 0;
            if let Some(cert) = &args.certificate {
                let cert_text = fs::read_to_string(cert)?;
                let cover: CoverFile = serde_json::from_str(&cert_text)?;
                let zero_based = one_based_to_zero(&cover.cover)?;
                let (cfg, asg) = forge::witness_rxc3_tree(&art, &zero_based)?;
                let costs = forge::evaluate_components(&art.artifact, &cfg, &asg)?;
                write_witness_files(&args.out, &art.artifact.instance, &cfg, &asg.paths)?;
                let yes = costs.total <= art.artifact.instance.kappa;
                out["witness"] = serde_json::json!({
                    "total": rat_json(&costs.total, args.decimal),
                    "decision": if yes { "yes" } else { "no" },
                });
                code = u8::from(!yes);
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(code)
        }
        Construction::Rxc3Cube => {
            let src = forge::Rxc3Instance::parse(&source_text)?;
            let mu = parse_rat(&args.mu)?;
            let art = forge::reduce_rxc3_hypercube(&src, &mu)?;
            fs::create_dir_all(&args.out)?;
            // full exports grow past 10^8 demands quickly; refuse without force
            if art.params.n > 4 && args.alpha_sample.is_none() && !args.force {
                return Err(ForgeError::TooLargeToMaterialize.into());
            }
            let file = fs::File::create(args.out.join("instance.json"))?;
            let mut writer = std::io::BufWriter::new(file);
            art.write_instance_json(&mut writer, args.alpha_sample)?;
            writer.flush()?;
            let mut roles: BTreeMap<String, String> = BTreeMap::new();
            roles.insert(art.network.node_name(art.root), "root".into());
            for set in [&art.ports, &art.clauses, &art.elements] {
                for &v in set {
                    roles.insert(art.network.node_name(v), art.role_of(v));
                }
            }
            for a in &art.clause_assoc {
                for &v in a {
                    roles.insert(art.network.node_name(v), art.role_of(v));
                }
            }
            for a in &art.element_assoc {
                for &v in a {
                    roles.insert(art.network.node_name(v), art.role_of(v));
                }
            }
            fs::write(args.out.join("roles.json"), serde_json::to_string_pretty(&roles)?)?;
            fs::write(
                args.out.join("params.json"),
                serde_json::to_string_pretty(&art.params.manifest())?,
            )?;
            let mut out = serde_json::json!({
                "construction": "rxc3-cube",
                "out": args.out.display().to_string(),
                "dimension": art.params.dim,
                "kappa": rat_json(&art.params.kappa, args.decimal),
                "alpha_demands": art.params.alpha_count(),
            });
            let mut code = 0;
            if let Some(cert) = &args.certificate {
                let cert_text = fs::read_to_string(cert)?;
                let cover: CoverFile = serde_json::from_str(&cert_text)?;
                let zero_based = one_based_to_zero(&cover.cover)?;
                let witness = forge::witness_rxc3_hypercube(&art, &zero_based)?;
                eprintln!("evaluating witness over {} heavy demands...", art.params.alpha_count());
                let eval = witness.evaluate()?;
                let yes = eval.total <= art.params.kappa;
                let report = serde_json::json!({
                    "alpha_component": rat_json(&eval.alpha_component, args.decimal),
                    "beta_component": rat_json(&eval.beta_component, args.decimal),
                    "unit_component": rat_json(&eval.unit_component, args.decimal),
                    "total": rat_json(&eval.total, args.decimal),
                    "alpha_links": eval.alpha_links,
                    "max_alternations": eval.max_alternations,
                    "decision": if yes { "yes" } else { "no" },
                });
                fs::write(
                    args.out.join("witness.eval.json"),
                    serde_json::to_string_pretty(&report)?,
                )?;
                out["witness"] = report;
                code = u8::from(!yes);
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(code)
        }
    }
}

fn one_based_to_zero(cover: &[usize]) -> Result<Vec<usize>> {
    cover
        .iter()
        .map(|&j| j.checked_sub(1).ok_or_else(|| anyhow!("cover indices are 1-based")))
        .collect()
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let cfg_text = fs::read_to_string(&args.config)?;
    let cfg = fileio::parse_configuration(&cfg_text, &inst.network)?;
    let flows_text = fs::read_to_string(&args.flows)?;
    let flows = fileio::parse_flows(&flows_text, &inst.network)?;
    let (total, per_demand) = exact::evaluate_keyed_flows(&inst, &cfg, &flows)?;
    let per: Vec<serde_json::Value> = inst
        .workload
        .demands
        .iter()
        .zip(&per_demand)
        .map(|(d, c)| {
            serde_json::json!({
                "src": inst.network.node_name(d.src),
                "dst": inst.network.node_name(d.dst),
                "cost": rat_json(c, args.decimal),
            })
        })
        .collect();
    let yes = total <= inst.kappa;
    let out = serde_json::json!({
        "per_demand": per,
        "total": rat_json(&total, args.decimal),
        "kappa": rat_json(&inst.kappa, args.decimal),
        "decision": if yes { "yes" } else { "no" },
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(u8::from(!yes))
}

fn cmd_oracle(args: OracleArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.source)?;
    match args.problem {
        OracleProblem::Bisection => {
            let src = forge::BisectionInstance::parse(&text)?;
            let width = forge::oracle_bisection(src.nodes.len(), &src.edges)?;
            let yes = width <= src.k;
            println!(
                "{}",
                serde_json::json!({
                    "width": width,
                    "k": src.k,
                    "decision": if yes { "yes" } else { "no" },
                })
            );
            Ok(u8::from(!yes))
        }
        OracleProblem::Xc3 => {
            let src = forge::Rxc3Instance::parse(&text)?;
            match forge::oracle_exact_cover(&src)? {
                Some(cover) => {
                    let one_based: Vec<usize> = cover.iter().map(|j| j + 1).collect();
                    println!("{}", serde_json::json!({ "cover": one_based }));
                    Ok(0)
                }
                None => {
                    println!("{}", serde_json::json!({ "cover": serde_json::Value::Null }));
                    Ok(1)
                }
            }
        }
    }
}

fn cmd_gen_family(args: GenFamilyArgs) -> Result<u8> {
    let family: Family = args.family.parse().map_err(|e: String| anyhow!(e))?;
    let index = match (args.index, args.at_least) {
        (Some(i), _) => i,
        (None, Some(n)) => families::smallest_member_at_least(family, n).0,
        (None, None) => bail!("pass --index or --at-least"),
    };
    let net =
        families::attach_uniform_switch(families::generate(family, index), args.ports_per_node);
    eprintln!("{} member {}: {} nodes", family, index, net.node_count());
    let inst = RRPInstance {
        network: net,
        mu: Rat::from_integer(0.into()),
        workload: Default::default(),
        kappa: Rat::from_integer(0.into()),
        policy: rrp_core::net::RoutingPolicy::unrestricted(),
    };
    let text = fileio::serialize_instance(&inst);
    match args.out {
        Some(path) => fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(0)
}
