use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ising_dynamics::bifurcation::{Aggregate, DeviationOptions, DeviationReference, DEFAULT_THRESHOLD};
use ising_dynamics::harness::{
    check_replay, generate_graph_file, import_report, replay, run_estimate, run_portfolio, EstimateSpec, GraphSource,
    IntegratorSpec, PortfolioReport, ScheduleSpec, TrialSpec,
};
use ising_dynamics::oracle::{exact_ground_state, OracleOptions, DEFAULT_N_LIMIT};
use ising_dynamics::stability::{stability_scan, threshold_report, write_scan_csv};
use ising_dynamics::{CouplingMatrix, CouplingMode, Error, Graph64, ModelKind, Result, SpinConfig};

#[derive(Parser)]
#[command(name = "isingdyn", version, about = "OIM/DIM Ising machine simulator and analysis tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Dim,
    Oim,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SingleModel {
    Dim,
    Oim,
}

impl From<SingleModel> for ModelKind {
    fn from(m: SingleModel) -> Self {
        match m {
            SingleModel::Dim => ModelKind::Dim,
            SingleModel::Oim => ModelKind::Oim,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregateArg {
    Max,
    Mean,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReferenceArg {
    /// Nearest of π/2 and 3π/2.
    Nearest,
    HalfPi,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    seed: u64,
    /// Final K_s of the linear ramp starting at 0.
    #[arg(long)]
    ks_max: f64,
    #[arg(long)]
    t_end: f64,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 1e-4)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

impl RunArgs {
    fn schedule(&self) -> ScheduleSpec {
        ScheduleSpec::linear_ramp(self.k, self.ks_max, self.t_end)
    }

    fn integrator(&self) -> IntegratorSpec {
        IntegratorSpec {
            dt: self.dt,
            noise_amplitude: self.noise,
            record_stride: self.stride,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Seeded OIM/DIM trials with a portfolio summary.
    Solve {
        #[arg(long, required_unless_present = "replay")]
        graph: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        model: ModelArg,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, required_unless_present = "replay")]
        seed: Option<u64>,
        #[arg(long, required_unless_present = "replay")]
        ks_max: Option<f64>,
        #[arg(long, required_unless_present = "replay")]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 100)]
        stride: usize,
        #[arg(long)]
        workers: Option<usize>,
        /// Attach the exact optimum for graphs up to this size.
        #[arg(long)]
        oracle_limit: Option<usize>,
        /// Write the report (TOML) here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-run the manifest of an exported report and check per-trial energies.
        #[arg(long, conflicts_with_all = ["graph", "seed"])]
        replay: Option<PathBuf>,
    },
    /// Ground-state estimate from the DIM bifurcation.
    Estimate {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, value_enum, default_value = "max")]
        aggregate: AggregateArg,
        #[arg(long, value_enum, default_value = "nearest")]
        reference: ReferenceArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// λ_L range per Ising energy over all {0, π} fixed points (CSV).
    Scan {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        model: SingleModel,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        ks: f64,
        #[arg(long, default_value_t = DEFAULT_N_LIMIT)]
        limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact ground state by enumeration.
    Oracle {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = DEFAULT_N_LIMIT)]
        limit: usize,
        #[arg(long)]
        force: bool,
    },
    /// Random unit-weight graph in rudy format.
    Gen {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        weight: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Critical second-harmonic strengths.
    Thresholds {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: f64,
        /// `{0, π}` configuration such as `+-+-` (repeatable).
        #[arg(long = "config")]
        configs: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_N_LIMIT)]
        limit: usize,
    },
}

fn load_graph(path: &Path) -> Result<Graph64> {
    GraphSource::File { path: path.into() }.load()
}

fn print_report(r: &PortfolioReport) {
    println!(
        "graph: {} nodes, {} edges, xi = {}",
        r.manifest.graph_nodes, r.manifest.graph_edges, r.manifest.xi
    );
    for s in &r.models {
        print!(
            "{}: best cut {} (H = {}), reached in {}/{} trials",
            s.model,
            s.best_cut,
            s.best_h,
            s.success_count,
            s.trials.len()
        );
        if let Some(h) = s.oracle_hits {
            print!(", optimum in {h}");
        }
        println!();
        for b in &s.histogram {
            println!("  H = {:>10}: {}", b.h, b.count);
        }
    }
    if let Some(o) = &r.oracle {
        println!("oracle: H_min = {}, optimal cut = {}", o.h_min, o.optimal_cut);
    }
    println!("portfolio best cut: {}", r.portfolio_best_cut);
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            graph,
            model,
            trials,
            seed,
            ks_max,
            t_end,
            k,
            dt,
            noise,
            stride,
            workers,
            oracle_limit,
            out,
            replay: replay_path,
        } => {
            let report = if let Some(path) = replay_path {
                let original = import_report(&path)?;
                let again = replay::<f64>(&original)?;
                check_replay(&original, &again)?;
                println!("replay of {} reproduced every per-trial energy", path.display());
                again
            } else {
                let models = match model {
                    ModelArg::Dim => vec![ModelKind::Dim],
                    ModelArg::Oim => vec![ModelKind::Oim],
                    ModelArg::Both => vec![ModelKind::Dim, ModelKind::Oim],
                };
                let spec = TrialSpec {
                    graph: GraphSource::File {
                        path: graph.expect("required by clap"),
                    },
                    coupling: CouplingMode::Antiferromagnetic,
                    models,
                    n_trials: trials,
                    base_seed: seed.expect("required by clap"),
                    schedule: ScheduleSpec::linear_ramp(k, ks_max.expect("required by clap"), t_end.expect("required by clap")),
                    integrator: IntegratorSpec {
                        dt,
                        noise_amplitude: noise,
                        record_stride: stride,
                    },
                    workers,
                    oracle_limit,
                };
                run_portfolio::<f64>(&spec)?
            };
            print_report(&report);
            if let Some(out) = out {
                ising_dynamics::harness::export_report(&report, &out)?;
            }
        }
        Command::Estimate {
            graph,
            run,
            threshold,
            aggregate,
            reference,
            out,
        } => {
            let mut spec = EstimateSpec::new(GraphSource::File { path: graph }, run.seed, run.schedule(), run.integrator());
            spec.threshold = threshold;
            spec.deviation = DeviationOptions {
                aggregate: match aggregate {
                    AggregateArg::Max => Aggregate::Max,
                    AggregateArg::Mean => Aggregate::Mean,
                },
                reference: match reference {
                    ReferenceArg::Nearest => DeviationReference::NearestOddHalfPi,
                    ReferenceArg::HalfPi => DeviationReference::HalfPi,
                },
            };
            let r = run_estimate::<f64>(&spec)?;
            let e = &r.estimate;
            println!("t_star = {}", e.t_star);
            println!("ks_E = {}", e.ks_e);
            println!("H_est = {}", e.h_est);
            println!("cut_est = {}", e.cut_est);
            if e.parity_mismatch {
                eprintln!("warning: xi - H_est is odd; the cut estimate is not attainable on a unit-weight graph");
            }
            if let Some(out) = out {
                fs::write(&out, r.to_toml()?).map_err(|e| Error::Io { path: out, source: e })?;
            }
        }
        Command::Scan {
            graph,
            model,
            k,
            ks,
            limit,
            out,
        } => {
            let g = load_graph(&graph)?;
            let j = CouplingMatrix::from_graph(&g, CouplingMode::Antiferromagnetic);
            let rows = stability_scan(model.into(), &j, k, ks, limit)?;
            match out {
                Some(path) => {
                    let f = fs::File::create(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
                    write_scan_csv(&rows, io::BufWriter::new(f)).map_err(|e| Error::Io { path, source: e })?;
                }
                None => write_scan_csv(&rows, io::stdout().lock()).map_err(|e| Error::Io {
                    path: "<stdout>".into(),
                    source: e,
                })?,
            }
        }
        Command::Oracle { graph, limit, force } => {
            let g = load_graph(&graph)?;
            let j = CouplingMatrix::from_graph(&g, CouplingMode::Antiferromagnetic);
            let r = exact_ground_state(
                &j,
                &OracleOptions {
                    n_limit: limit,
                    force,
                    ..Default::default()
                },
            )?;
            println!("H_min = {}", r.h_min);
            println!("optimal_cut = {}", r.optimal_cut);
            println!("degeneracy = {}", r.degeneracy);
            let mut out = io::stdout().lock();
            for s in &r.minimizers {
                let _ = writeln!(out, "{s}");
            }
        }
        Command::Gen {
            nodes,
            edges,
            seed,
            weight,
            out,
        } => {
            generate_graph_file(nodes, edges, weight, seed, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Thresholds { graph, k, configs, limit } => {
            let g = load_graph(&graph)?;
            let j = CouplingMatrix::from_graph(&g, CouplingMode::Antiferromagnetic);
            let configs = configs.iter().map(|c| c.parse::<SpinConfig>()).collect::<Result<Vec<_>>>()?;
            let h_min = if g.n() <= limit {
                Some(exact_ground_state(&j, &OracleOptions { n_limit: limit, ..Default::default() })?.h_min)
            } else {
                None
            };
            let r = threshold_report(&j, k, &configs, h_min, j.negated_pair_sum())?;
            println!("ks_destabilize_halfpi = {}", r.ks_destabilize_halfpi);
            for (s, v) in &r.ks_stabilize_zeropi {
                println!("ks_stabilize_zeropi[{s}] = {v}");
            }
            match (r.ks_energy_crossover, h_min) {
                (Some(v), Some(h)) => println!("ks_energy_crossover = {v} (H_min = {h})"),
                _ => println!("ks_energy_crossover: graph exceeds the oracle limit of {limit}"),
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoBifurcation { .. } => 4,
        e if e.is_numerical() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
