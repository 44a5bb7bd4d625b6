use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use llp_core::apm::ApmConfig;
use llp_core::codec::CodecConfig;
use llp_core::codes::Code;
use llp_core::llp::{gamma_grid, LlpConfig};
use llp_core::orderings::OrderingSpec;
use llp_core::pipeline::{self, IdMapPolicy, OrderMethod, PipelineRun, Report};
use llp_core::Result;

#[derive(Parser)]
#[command(name = "llp", version, about = "Graph reordering and compression toolkit")]
struct Cli {
    /// Worker threads for clustering (1 = deterministic sequential mode).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Append every report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CodecArgs {
    #[arg(long, default_value_t = 7)]
    window: usize,
    #[arg(long, default_value_t = 3)]
    max_ref_chain: usize,
    /// gamma, delta or zetaK.
    #[arg(long, default_value = "zeta3")]
    code: Code,
}

impl CodecArgs {
    fn config(&self) -> CodecConfig {
        CodecConfig {
            window: self.window,
            max_ref_chain: self.max_ref_chain,
            residual_code: self.code,
        }
    }
}

#[derive(Args)]
struct LlpArgs {
    /// Largest exponent of the gamma grid.
    #[arg(long, default_value_t = llp_core::llp::DEFAULT_K)]
    k: u32,
    #[arg(long, default_value_t = llp_core::llp::DEFAULT_ITERATIONS)]
    iterations: usize,
    /// Use this single resolution for every iteration instead of the grid.
    #[arg(long)]
    fixed_gamma: Option<f64>,
    #[arg(long, default_value_t = 100)]
    max_passes: usize,
    #[arg(long, default_value_t = 0.0)]
    min_change_fraction: f64,
}

impl LlpArgs {
    fn config(&self, seed: u64, threads: usize) -> LlpConfig {
        let gammas = match self.fixed_gamma {
            Some(g) => vec![g; self.k as usize + 2],
            None => gamma_grid(self.k),
        };
        LlpConfig {
            gammas,
            iterations: self.iterations,
            seed,
            apm: ApmConfig {
                max_passes: self.max_passes,
                min_change_fraction: self.min_change_fraction,
                threads,
                ..ApmConfig::default()
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Convert a text edge list to the binary format.
    Ingest {
        input: PathBuf,
        output: PathBuf,
        /// dense (ids are 0..n) or intern (arbitrary tokens, writes <output>.ids).
        #[arg(long, default_value = "dense")]
        ids: IdMapPolicy,
    },
    /// Renumber a graph with a permutation file.
    Permute {
        graph: PathBuf,
        permutation: PathBuf,
        output: PathBuf,
    },
    /// Compute an ordering and write it as a permutation file.
    Order {
        graph: PathBuf,
        /// natural, random, bfs, lex, gray, shingle or llp.
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        llp: LlpArgs,
    },
    /// Compress a graph, optionally renumbered first.
    Compress {
        graph: PathBuf,
        #[arg(long)]
        permutation: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Print compression statistics without writing the compressed graph.
    Stats {
        graph: PathBuf,
        #[arg(long)]
        permutation: Option<PathBuf>,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Measure how well an ordering keeps hosts together.
    Hoststats { hosts: PathBuf, permutation: PathBuf },
    /// Run several orderings through compression and print a comparison.
    Pipeline {
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "random,natural,gray,shingle,bfs,llp")]
        methods: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write <method>.perm and <method>.bvg for every method here.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[command(flatten)]
        codec: CodecArgs,
        #[command(flatten)]
        llp: LlpArgs,
    },
    /// Run APM at one resolution and write the labelling.
    Cluster {
        graph: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_passes: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn method(name: &str, seed: u64, llp: &LlpArgs, threads: usize) -> Result<OrderMethod> {
    if name == "llp" {
        Ok(OrderMethod::Llp(llp.config(seed, threads)))
    } else {
        Ok(OrderMethod::Baseline(OrderingSpec::parse(name, seed)?))
    }
}

fn run(cli: Cli) -> Result<Vec<Report>> {
    let threads = cli.threads;
    let reports = match cli.command {
        Command::Ingest { input, output, ids } => vec![pipeline::cmd_ingest(&input, &output, ids)?.1],
        Command::Permute {
            graph,
            permutation,
            output,
        } => vec![pipeline::cmd_permute(&graph, &permutation, &output)?],
        Command::Order {
            graph,
            method: name,
            seed,
            output,
            llp,
        } => vec![pipeline::cmd_order(
            &graph,
            &method(&name, seed, &llp, threads)?,
            &output,
        )?],
        Command::Compress {
            graph,
            permutation,
            output,
            codec,
        } => vec![pipeline::cmd_compress(
            &graph,
            permutation.as_deref(),
            &codec.config(),
            &output,
        )?],
        Command::Stats {
            graph,
            permutation,
            codec,
        } => vec![pipeline::cmd_stats(&graph, permutation.as_deref(), &codec.config())?],
        Command::Hoststats { hosts, permutation } => vec![pipeline::cmd_hoststats(&hosts, &permutation)?],
        Command::Pipeline {
            graph,
            methods,
            seed,
            output_dir,
            codec,
            llp,
        } => {
            let g = pipeline::load_graph(&graph)?;
            let mut rows = Vec::new();
            let mut reports = Vec::new();
            for name in &methods {
                let mut run = PipelineRun::new(&graph, method(name, seed, &llp, threads)?);
                run.codec = codec.config();
                if let Some(dir) = &output_dir {
                    run.permutation_out = Some(dir.join(format!("{name}.perm")));
                    run.compressed_out = Some(dir.join(format!("{name}.bvg")));
                }
                let (row, report) = run.run_on(&g)?;
                rows.push(row);
                reports.push(report);
            }
            eprint!("{}", pipeline::format_table(&rows, Some("random")));
            reports
        }
        Command::Cluster {
            graph,
            gamma,
            seed,
            max_passes,
            output,
        } => {
            let cfg = ApmConfig {
                gamma,
                seed,
                max_passes,
                threads,
                ..ApmConfig::default()
            };
            vec![pipeline::cmd_cluster(&graph, &cfg, &output)?]
        }
    };
    if let Some(path) = &cli.report {
        for r in &reports {
            r.append_to(path)?;
        }
    }
    Ok(reports)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(reports) => {
            for (i, r) in reports.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                print!("{r}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("llp: {e}");
            ExitCode::FAILURE
        }
    }
}
