//! `vinecop`: fit, sample and evaluate vine copula models from CSV data.

mod error;
mod table;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use vinecop::evaluation::{loglik_per_instance, relative_loglik, tau_matrix_distance, to_copula_scale};
use vinecop::greedy::fit_greedy;
use vinecop::model::{structure_from_json, VineModel};
use vinecop::rl::{fit_rl, RlConfig};
use vinecop::sampler::sample;
use vinecop::vector::{fit_vector, VectorConfig};
use vinecop::vine::count_structures;
use vinecop::{MarginalModel, VineStructure};

use crate::error::{CliError, Result, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "vinecop", version, about = "Regular-vine copula models for tabular data")]
struct Cli {
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Greedy,
    Vector,
    Rl,
}

#[derive(Subcommand)]
enum Command {
    /// Fit marginals and a vine to a CSV file and write the model document.
    Fit(FitArgs),
    /// Draw synthetic rows from a model.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(short = 'n', long = "rows")]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print a key=value quality report for a model on real data.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Synthetic CSV compared with the data by Kendall's tau matrices.
        #[arg(long)]
        synthetic: Option<PathBuf>,
        /// Reference model for the relative log-likelihood.
        #[arg(long)]
        true_model: Option<PathBuf>,
    },
    /// Check the structure stored in a model document.
    Validate { model: PathBuf },
    /// Print the number of regular vines on D variables.
    CountStructures {
        #[arg(value_parser = clap::value_parser!(u32).range(2..))]
        d: u32,
    },
}

#[derive(clap::Args)]
struct FitArgs {
    /// Training CSV with a header row.
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "greedy")]
    method: Method,
    /// Number of trees to fit; later levels are independence.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    truncate: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Penalty weight: per-edge complexity for rl, cycle penalty for vector.
    #[arg(long)]
    lambda: Option<f64>,
    /// Sparsity weight (vector).
    #[arg(long)]
    mu: Option<f64>,
    /// Reward discount (rl).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Rows per epoch (rl); all rows when omitted.
    #[arg(long)]
    batch_size: Option<usize>,
    /// Sampled structures per update (rl rollouts, vector samples).
    #[arg(long)]
    rollouts: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Fit(args) => fit(&args),
        Command::Sample { model, n, seed, output } => {
            let m = load_model(&model)?;
            let rows = sample(&m.vine, &m.marginals, n, seed)?;
            table::write(&output, &m.column_names, &rows)
        }
        Command::Evaluate {
            model,
            data,
            synthetic,
            true_model,
        } => evaluate(&model, &data, synthetic.as_deref(), true_model.as_deref()),
        Command::Validate { model } => validate(&model),
        Command::CountStructures { d } => {
            println!("{}", count_structures(d as usize)?);
            Ok(())
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_model(path: &Path) -> Result<VineModel> {
    VineModel::from_json(&read_file(path)?).map_err(|e| CliError::data(path, e.to_string()))
}

fn check_weight(name: &str, value: Option<f64>) -> Result<()> {
    match value {
        Some(x) if !(x.is_finite() && x >= 0.0) => Err(CliError::Usage(format!(
            "--{name} must be a finite nonnegative number, got {x}"
        ))),
        _ => Ok(()),
    }
}

fn fit(args: &FitArgs) -> Result<()> {
    check_weight("lambda", args.lambda)?;
    check_weight("mu", args.mu)?;
    check_weight("learning-rate", args.learning_rate)?;
    if let Some(g) = args.gamma {
        if !(g > 0.0 && g <= 1.0) {
            return Err(CliError::Usage(format!("--gamma must lie in (0, 1], got {g}")));
        }
    }
    if args.rollouts == Some(0) || args.epochs == Some(0) || args.batch_size == Some(0) {
        return Err(CliError::Usage(
            "--rollouts, --epochs and --batch-size must be positive".into(),
        ));
    }
    let t = table::read(&args.input)?;
    if t.ncols() < 2 {
        return Err(CliError::data(&args.input, "need at least 2 numeric columns"));
    }
    let started = Instant::now();
    let marginals = t
        .columns()
        .iter()
        .map(|c| MarginalModel::fit(c))
        .collect::<vinecop::Result<Vec<_>>>()?;
    let u = to_copula_scale(&marginals, &t.rows)?;
    let truncation = args.truncate.map_or(usize::MAX, |k| k as usize);
    let vine = match args.method {
        Method::Greedy => fit_greedy(&u, truncation)?,
        Method::Vector => {
            let mut cfg = VectorConfig {
                lambda: args.lambda,
                truncation,
                seed: args.seed,
                ..VectorConfig::default()
            };
            set(&mut cfg.mu, args.mu);
            set(&mut cfg.epochs, args.epochs);
            set(&mut cfg.samples, args.rollouts);
            set(&mut cfg.learning_rate, args.learning_rate);
            fit_vector(&u, &cfg)?.structure
        }
        Method::Rl => {
            let mut cfg = RlConfig {
                truncation,
                seed: args.seed,
                ..RlConfig::default()
            };
            if args.batch_size.is_some() {
                cfg.batch_size = args.batch_size;
            }
            set(&mut cfg.lambda, args.lambda);
            set(&mut cfg.gamma, args.gamma);
            set(&mut cfg.epochs, args.epochs);
            set(&mut cfg.rollouts, args.rollouts);
            set(&mut cfg.learning_rate, args.learning_rate);
            fit_rl(&u, &cfg)?.structure
        }
    };
    let elapsed = started.elapsed().as_secs_f64();
    let ll = loglik_per_instance(&vine, &marginals, &t.rows)?;
    let edges = vine.edge_count();
    let model = VineModel::new(t.header, marginals, vine)?;
    std::fs::write(&args.output, model.to_json()?).map_err(|source| CliError::Io {
        path: args.output.clone(),
        source,
    })?;
    println!("loglik_per_instance={ll}");
    println!("edges={edges}");
    println!("wall_time_s={elapsed:.3}");
    Ok(())
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn evaluate(model: &Path, data: &Path, synthetic: Option<&Path>, true_model: Option<&Path>) -> Result<()> {
    let m = load_model(model)?;
    let real = table::read(data)?;
    let fits = |t: &table::Table, path: &Path| {
        if t.ncols() == m.d() {
            Ok(())
        } else {
            Err(CliError::data(
                path,
                format!("expected {} columns, found {}", m.d(), t.ncols()),
            ))
        }
    };
    fits(&real, data)?;
    println!("rows={}", real.rows.len());
    println!(
        "loglik_per_instance={}",
        loglik_per_instance(&m.vine, &m.marginals, &real.rows)?
    );
    if let Some(path) = true_model {
        let truth = load_model(path)?;
        if truth.d() != m.d() {
            return Err(CliError::data(
                path,
                format!("expected {} variables, found {}", m.d(), truth.d()),
            ));
        }
        let u = to_copula_scale(&truth.marginals, &real.rows)?;
        println!("relative_loglik={}", relative_loglik(&m.vine, &truth.vine, &u)?);
    }
    if let Some(path) = synthetic {
        let syn = table::read(path)?;
        fits(&syn, path)?;
        println!("tau_matrix_distance={}", tau_matrix_distance(&real.rows, &syn.rows)?);
    }
    Ok(())
}

fn validate(path: &Path) -> Result<()> {
    let text = read_file(path)?;
    let vine: VineStructure = structure_from_json(&text).map_err(|e| CliError::data(path, e.to_string()))?;
    let violations = vine.validate();
    if violations.is_empty() {
        // marginals and names are checked by the full load
        load_model(path)?;
        println!(
            "valid: d={} truncation={} edges={}",
            vine.d(),
            vine.truncation(),
            vine.edge_count()
        );
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(CliError::data(
        path,
        format!("{} structure violation(s)", violations.len()),
    ))
}
