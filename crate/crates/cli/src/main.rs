use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use pprlab::appr::{acl_parameters, appr_push, sweep};
use pprlab::diagnostics::{
    concentration_probe, concentration_report, cov_estimate, expectation_bound_check,
    l2_error_bound, spectral_deviation, NodeClass,
};
use pprlab::experiment::{run_preset, run_table, ConfigFile, ExperimentSpec, Table, PRESETS};
use pprlab::graph::{conductance, log_squared_p, sample_planted_er, Graph, PlantedGraphConfig};
use pprlab::mean_field::{
    mean_conductance_community, mean_field_ppr, mf_gap, optimal_alpha, ModelShape,
};
use pprlab::ppr::{
    classification_error, ppr, ppr_dense_oracle, ppr_truncated, rank_top, RestartVector,
};
use pprlab::stats::Estimate;

/// Personalized PageRank experiments on planted Erdős–Rényi graphs.
///
/// Unless overridden, graphs use n = 10000, m = 2000, k = 200 and
/// p = 5 ln²(n) / n (natural log), q = 2p.
#[derive(Parser)]
#[command(name = "pprlab", version)]
struct Cli {
    /// Graph seed, and master seed for replicated runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    replicates: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// JSON file with any of n, m, k, p, q, alpha, eps, b, seed, replicates,
    /// method, degree_scaling, lazy.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a planted graph and write it as an edge list.
    Generate {
        #[command(flatten)]
        model: ModelArgs,
        /// Output file; defaults to <out-dir>/graph.txt.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact, truncated or dense-oracle PPR scores.
    Ppr {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value_t = PprMethod::Exact)]
        method: PprMethod,
        /// Step count for the truncated method.
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Read the graph from an edge list instead of sampling it.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Approximate push followed by a sweep cut.
    Appr {
        #[command(flatten)]
        model: ModelArgs,
        /// Damping factor; defaults to the ACL value for --target-phi.
        #[arg(long)]
        alpha: Option<f64>,
        /// Push threshold; defaults to 2^-b / (48 B).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        b: Option<u32>,
        /// Target conductance; defaults to the mean-field community conductance.
        #[arg(long)]
        target_phi: Option<f64>,
        #[arg(long, value_enum)]
        degree_scaling: Option<Switch>,
        #[arg(long)]
        lazy: bool,
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Mean-field PPR values.
    Meanfield {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Optimal damping factor and the mean-field gap curve.
    OptAlpha {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Concentration diagnostics, optionally as a trend over n.
    Diagnose {
        #[arg(value_enum)]
        op: DiagnoseOp,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        alpha: Option<f64>,
        /// Comma-separated graph sizes; m scales with n and p, q follow the default formula.
        #[arg(long, value_delimiter = ',')]
        n_values: Vec<usize>,
        /// The constant C of the error bound.
        #[arg(long, default_value_t = 1.0)]
        constant: f64,
        #[arg(long, default_value_t = 1.0)]
        eps_scale: f64,
        #[arg(long, value_enum, default_value_t = ClassArg::InC)]
        class: ClassArg,
    },
    /// Run a registered preset.
    Experiment {
        /// Preset name; `list` prints the registry.
        preset: String,
    },
    /// Reproduce both error tables.
    Tables,
}

#[derive(Args, Clone, Copy, Default)]
struct ModelArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PprMethod {
    Exact,
    Truncated,
    Dense,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagnoseOp {
    Bound,
    Spectral,
    Probe,
    Cov,
    Expectation,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    InC,
    Outside,
}

const DEFAULT_K: usize = 200;
const DEFAULT_ALPHA: f64 = 0.8;

struct RunContext {
    spec: ExperimentSpec,
    master_seed: u64,
    out_dir: PathBuf,
}

impl Cli {
    /// Defaults, then the config file, then command-line flags.
    fn context(&self, model: Option<&ModelArgs>, overrides: ConfigFile) -> Result<RunContext> {
        let mut spec = ExperimentSpec::standard("cli", DEFAULT_K, DEFAULT_ALPHA)?;
        if let Some(path) = &self.config {
            spec = ConfigFile::load(path)
                .with_context(|| format!("reading {}", path.display()))?
                .apply(&spec)?;
        }
        let model = model.copied().unwrap_or_default();
        let flags = ConfigFile {
            n: model.n,
            m: model.m,
            k: model.k,
            p: model.p,
            q: model.q,
            seed: self.seed,
            replicates: self.replicates,
            ..overrides
        };
        let spec = flags.apply(&spec)?;
        Ok(RunContext {
            master_seed: spec.config.seed,
            spec,
            out_dir: self.out_dir.clone(),
        })
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Generate { model, output } => {
            let ctx = cli.context(Some(model), ConfigFile::default())?;
            let graph = sample_planted_er(&ctx.spec.config)?;
            let path = output
                .clone()
                .unwrap_or_else(|| ctx.out_dir.join("graph.txt"));
            create_parent(&path)?;
            graph.write_edge_list(BufWriter::new(fs::File::create(&path)?))?;
            print_json(&json!({
                "nodes": graph.node_count(),
                "edges": graph.edge_count(),
                "config": ctx.spec.config,
                "output": path,
            }))
        }
        Command::Ppr {
            model,
            alpha,
            method,
            steps,
            graph,
        } => {
            let ctx = cli.context(
                Some(model),
                ConfigFile {
                    alpha: *alpha,
                    ..Default::default()
                },
            )?;
            let config = &ctx.spec.config;
            let graph = load_or_sample(graph.as_deref(), config)?;
            let nu = RestartVector::from_config(config);
            let scores = match method {
                PprMethod::Exact => ppr(&graph, &nu, ctx.spec.alpha)?,
                PprMethod::Truncated => ppr_truncated(&graph, &nu, ctx.spec.alpha, *steps)?,
                PprMethod::Dense => ppr_dense_oracle(&graph, &nu, ctx.spec.alpha)?,
            };
            let path = ctx.out_dir.join("ppr.csv");
            create_parent(&path)?;
            scores.write_csv(BufWriter::new(fs::File::create(&path)?))?;
            let top = rank_top(&scores.values, config.m)?;
            print_json(&json!({
                "alpha": ctx.spec.alpha,
                "sum": scores.sum(),
                "error": classification_error(&top, config),
                "top_m_conductance": conductance(&graph, &top).ok(),
                "output": path,
            }))
        }
        Command::Appr {
            model,
            alpha,
            eps,
            b,
            target_phi,
            degree_scaling,
            lazy,
            graph,
        } => {
            let overrides = ConfigFile {
                alpha: *alpha,
                eps: *eps,
                b: *b,
                degree_scaling: degree_scaling.map(|s| matches!(s, Switch::On)),
                lazy: lazy.then_some(true),
                ..Default::default()
            };
            let ctx = cli.context(Some(model), overrides)?;
            run_appr(&ctx, graph.as_deref(), *alpha, *target_phi)
        }
        Command::Meanfield { model, alpha } => {
            let ctx = cli.context(
                Some(model),
                ConfigFile {
                    alpha: *alpha,
                    ..Default::default()
                },
            )?;
            let mf = mean_field_ppr(&ctx.spec.config, ctx.spec.alpha)?;
            print_json(&json!({
                "alpha": mf.alpha,
                "pi0": mf.pi0,
                "pi1": mf.pi1,
                "pi2": mf.pi2,
                "gap": mf.pi1 - mf.pi2,
                "total_mass": mf.total_mass(),
            }))
        }
        Command::OptAlpha { model } => {
            let ctx = cli.context(Some(model), ConfigFile::default())?;
            let config = &ctx.spec.config;
            let shape = ModelShape::from_config(config)?;
            let opt = optimal_alpha(shape)?;
            let path = ctx.out_dir.join("gap.csv");
            create_parent(&path)?;
            let mut out = BufWriter::new(fs::File::create(&path)?);
            writeln!(out, "alpha,gap")?;
            for i in 0..1000 {
                let a = i as f64 / 1000.0;
                writeln!(out, "{a},{}", mf_gap(shape, config.m, a))?;
            }
            out.flush()?;
            print_json(&json!({
                "rho": shape.rho,
                "beta": shape.beta,
                "alpha_opt": opt.alpha,
                "clamped": opt.clamped,
                "gap_at_opt": mf_gap(shape, config.m, opt.alpha),
                "output": path,
            }))
        }
        Command::Diagnose {
            op,
            model,
            alpha,
            n_values,
            constant,
            eps_scale,
            class,
        } => {
            let ctx = cli.context(
                Some(model),
                ConfigFile {
                    alpha: *alpha,
                    ..Default::default()
                },
            )?;
            run_diagnose(&ctx, *op, n_values, *constant, *eps_scale, *class)
        }
        Command::Experiment { preset } => {
            if preset == "list" {
                for (name, description) in PRESETS {
                    println!("{name:<18} {description}");
                }
                return Ok(());
            }
            let ctx = cli.context(None, ConfigFile::default())?;
            let dir = ctx.out_dir.join(preset);
            let report = run_preset(preset, ctx.spec.replicates, ctx.master_seed, Some(&dir))?;
            print!("{}", report.aggregate_json()?);
            Ok(())
        }
        Command::Tables => {
            let ctx = cli.context(None, ConfigFile::default())?;
            for which in [Table::One, Table::Two] {
                let report = run_table(which, ctx.spec.replicates, ctx.master_seed)?;
                report.write(&ctx.out_dir.join(&report.preset))?;
                println!("{}", report.preset);
                print!("{}", report.files["table.csv"]);
            }
            Ok(())
        }
    }
}

fn run_appr(
    ctx: &RunContext,
    graph_path: Option<&Path>,
    alpha: Option<f64>,
    target_phi: Option<f64>,
) -> Result<()> {
    let config = &ctx.spec.config;
    let graph = load_or_sample(graph_path, config)?;
    let phi = match target_phi {
        Some(phi) => phi,
        None => mean_conductance_community(config.m as f64 / config.n as f64, config.q / config.p),
    };
    let (alpha, eps) = match (alpha, ctx.spec.eps) {
        (Some(alpha), Some(eps)) => (alpha, eps),
        (alpha, eps) => {
            let acl = acl_parameters(phi, graph.edge_count(), ctx.spec.b)?;
            (alpha.unwrap_or(acl.alpha), eps.unwrap_or(acl.eps))
        }
    };
    let seeds = RestartVector::from_config(config);
    let result = appr_push(&graph, &seeds, alpha, eps, ctx.spec.rule)?;
    let entries = result.p.entries();
    let sw = sweep(&graph, &entries, ctx.spec.degree_scaling, None)?;
    let cluster = if sw.best_prefix > config.m {
        sw.prefix_set(config.m)
    } else {
        sw.best_set()
    };
    let path = ctx.out_dir.join("cluster.txt");
    create_parent(&path)?;
    let mut out = BufWriter::new(fs::File::create(&path)?);
    for v in cluster.iter() {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    print_json(&json!({
        "alpha": alpha,
        "eps": eps,
        "pushes": result.pushes,
        "support": entries.len(),
        "best_conductance": sw.best_conductance,
        "best_prefix": sw.best_prefix,
        "meets_target": sw.best_conductance < phi,
        "cluster_size": cluster.len(),
        "error": classification_error(&cluster, config),
        "output": path,
    }))
}

#[derive(Serialize)]
struct TrendRow {
    n: usize,
    value: f64,
    stderr: f64,
}

fn run_diagnose(
    ctx: &RunContext,
    op: DiagnoseOp,
    n_values: &[usize],
    constant: f64,
    eps_scale: f64,
    class: ClassArg,
) -> Result<()> {
    let base = &ctx.spec.config;
    let alpha = ctx.spec.alpha;
    let replicates = ctx.spec.replicates;
    let configs: Vec<PlantedGraphConfig> = if n_values.is_empty() {
        vec![base.clone()]
    } else {
        let kappa = base.m as f64 / base.n as f64;
        n_values
            .iter()
            .map(|&n| {
                let m = ((kappa * n as f64).round() as usize).clamp(base.k, n);
                let p = log_squared_p(n);
                Ok(PlantedGraphConfig::new(
                    n,
                    m,
                    base.k,
                    p,
                    2.0 * p,
                    base.seed,
                )?)
            })
            .collect::<Result<_>>()?
    };
    let mut reports = Vec::new();
    let mut trend = Vec::new();
    for config in &configs {
        let (report, estimate) = match op {
            DiagnoseOp::Bound => {
                let graph = sample_planted_er(config)?;
                let report = concentration_report(&graph, config, alpha, constant)?;
                let bound = l2_error_bound(config, alpha, constant)?;
                let value = report.rel_l2;
                (
                    json!({ "report": report, "bound": bound }),
                    Estimate { value, stderr: 0.0 },
                )
            }
            DiagnoseOp::Spectral => {
                let graph = sample_planted_er(config)?;
                let value = spectral_deviation(&graph, config)?;
                let scale = ((config.n as f64).ln() / (config.n as f64 * config.p)).sqrt();
                (
                    json!({ "value": value, "ratio": value / scale }),
                    Estimate { value, stderr: 0.0 },
                )
            }
            DiagnoseOp::Probe => {
                let value = concentration_probe(config, alpha, eps_scale, replicates)?;
                let stderr = (value * (1.0 - value) / replicates as f64).sqrt();
                (
                    json!({ "frequency": value, "eps_scale": eps_scale }),
                    Estimate { value, stderr },
                )
            }
            DiagnoseOp::Cov => {
                let class = match class {
                    ClassArg::InC => NodeClass::InCNotS,
                    ClassArg::Outside => NodeClass::OutsideC,
                };
                let report = cov_estimate(config, alpha, class, replicates)?;
                let estimate = report.cov2;
                (serde_json::to_value(&report)?, estimate)
            }
            DiagnoseOp::Expectation => {
                let report = expectation_bound_check(config, alpha, replicates)?;
                let passed = report.passed();
                (
                    json!({ "report": report, "passed": passed }),
                    Estimate {
                        value: passed as u8 as f64,
                        stderr: 0.0,
                    },
                )
            }
        };
        reports.push(json!({ "config": config, "alpha": alpha, "result": report }));
        trend.push(TrendRow {
            n: config.n,
            value: estimate.value,
            stderr: estimate.stderr,
        });
    }
    fs::create_dir_all(&ctx.out_dir)?;
    let path = ctx.out_dir.join("diagnose.csv");
    let mut out = BufWriter::new(fs::File::create(&path)?);
    writeln!(out, "n,value,stderr")?;
    for row in &trend {
        writeln!(out, "{},{},{}", row.n, row.value, row.stderr)?;
    }
    out.flush()?;
    print_json(&json!({ "reports": reports, "trend": trend, "output": path }))
}

fn load_or_sample(path: Option<&Path>, config: &PlantedGraphConfig) -> Result<Graph> {
    match path {
        None => Ok(sample_planted_er(config)?),
        Some(path) => {
            let file =
                fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let graph = Graph::read_edge_list(BufReader::new(file))?;
            if graph.node_count() != config.n {
                bail!(
                    "graph has {} nodes but the configuration says n = {}",
                    graph.node_count(),
                    config.n
                );
            }
            Ok(graph)
        }
    }
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(())
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}
