use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use pkawv_core::harness::{
    self, adversary_generate, emit_rates, regret_report, run_stream, write_records, Algo,
    DataFormat, Dataset, HarnessConfig, RateQuery, Task,
};
use pkawv_core::{effective_dimension, Error, Result};

#[derive(Parser)]
#[command(name = "pkawv", version, about = "Online kernel regression forecasters and regret tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream a dataset through a forecaster and write per-round records.
    Run {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a forecaster and compare it with batch kernel ridge.
    Regret {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Optional per-round records output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a sequence with the greedy grid adversary.
    Adversary {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Grid points per input coordinate.
        #[arg(long, default_value_t = 11)]
        grid: usize,
        /// Comma-separated candidate labels.
        #[arg(long, default_value = "-1,0,1", value_delimiter = ',', allow_hyphen_values = true)]
        y_grid: Vec<f64>,
        /// Dataset output (CSV, label last).
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate regret exponents against dictionary size.
    Rates {
        #[arg(long)]
        gamma: f64,
        /// Comma-separated dictionary exponents; defaults to 21 points in [0, 1].
        #[arg(long, value_delimiter = ',')]
        a_grid: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Effective dimension of a dataset's Gram matrix.
    Deff {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        sigma: f64,
        /// One or more regularization levels, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "csv", value_parser = ["csv", "libsvm"])]
    format: String,
    /// CSV label column (0-based); defaults to the last column.
    #[arg(long)]
    label_column: Option<usize>,
    /// Map inputs to [-1, 1]^d and labels to [-1, 1].
    #[arg(long)]
    scale: bool,
    #[arg(long)]
    limit_n: Option<usize>,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let format: DataFormat = self.format.parse()?;
        let mut data = harness::ingest(&self.data, format, self.label_column)?;
        if let Some(n) = self.limit_n {
            data = data.head(n);
        }
        if self.scale && !data.is_empty() {
            data = harness::scale(&data);
        }
        Ok(data)
    }
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_parser = ["exact", "taylor", "nystrom", "nystrom-beforehand", "fogd"])]
    algo: String,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    sigma: f64,
    /// Taylor degree cap.
    #[arg(long = "M")]
    max_degree: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Number of random Fourier features.
    #[arg(long = "D", default_value_t = 1000)]
    features: usize,
    /// FOGD learning rate; 1/sqrt(n) when omitted.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "regression", value_parser = ["regression", "classification"])]
    task: String,
    #[arg(long)]
    timeout_s: Option<u64>,
    /// Label bound used when evaluating regret bounds.
    #[arg(long = "B", default_value_t = 1.0)]
    bound: f64,
}

impl ModelArgs {
    fn config(&self, limit_n: Option<usize>) -> Result<HarnessConfig> {
        let algo: Algo = self.algo.parse()?;
        let task: Task = self.task.parse()?;
        Ok(HarnessConfig {
            algo,
            lambda: self.lambda,
            sigma: self.sigma,
            max_degree: self.max_degree,
            mu: self.mu,
            beta: self.beta,
            eps: self.eps,
            delta: self.delta,
            features: self.features,
            eta: self.eta,
            seed: self.seed,
            bound: self.bound,
            task,
            limit_n,
            timeout: self.timeout_s.map(Duration::from_secs),
        })
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn summarize(outcome: &harness::RunOutcome) {
    let last_dict = outcome.records.last().map_or(0, |r| r.dict_size);
    eprintln!(
        "rounds={} avg_loss={:.6} dict_size={} fallbacks={}{}",
        outcome.records.len(),
        outcome.average_loss(),
        last_dict,
        outcome.fallbacks,
        if outcome.timed_out { " (timed out)" } else { "" }
    );
    if let Some(err) = outcome.classification_error() {
        eprintln!("classification_error={err:.6}");
    }
    if outcome.stored_floats > 0 {
        eprintln!("stored_floats={}", outcome.stored_floats);
    }
    if let Some(tp) = outcome.throughput() {
        eprintln!("throughput={tp:.1} rounds/s");
    }
}

fn print_ledger(ledger: &harness::RegretLedger) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "learner_loss,comparator_loss,comparator_norm_sq,regret,bound_prop21,bound_satisfied"
    )?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        ledger.learner_loss,
        ledger.comparator_loss,
        ledger.comparator_norm_sq,
        ledger.regret,
        ledger.bound_prop21,
        ledger.bound_satisfied
    )?;
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { data, model, out } => {
            let dataset = data.load()?;
            let config = model.config(data.limit_n)?;
            let outcome = run_stream(&config, &dataset)?;
            write_records(create(&out)?, &outcome.records)?;
            summarize(&outcome);
        }
        Command::Regret { data, model, out } => {
            let dataset = data.load()?;
            let config = model.config(data.limit_n)?;
            let outcome = run_stream(&config, &dataset)?;
            if let Some(path) = out {
                write_records(create(&path)?, &outcome.records)?;
            }
            summarize(&outcome);
            let ledger = regret_report(
                &outcome.records,
                &dataset,
                config.kernel()?,
                config.lambda,
                config.bound,
            )?;
            print_ledger(&ledger)?;
        }
        Command::Adversary {
            model,
            n,
            dim,
            grid,
            y_grid,
            out,
        } => {
            let config = model.config(None)?;
            let radius = (dim as f64).sqrt();
            let forecaster = config.build_for(dim, n, radius, None)?;
            let result = adversary_generate(
                forecaster,
                config.kernel()?,
                config.lambda,
                n,
                dim,
                grid,
                &y_grid,
            )?;
            let mut w = create(&out)?;
            let header: Vec<String> = (1..=dim).map(|j| format!("x{j}")).chain(["y".into()]).collect();
            writeln!(w, "{}", header.join(","))?;
            for (x, y) in result.data.inputs.iter().zip(&result.data.labels) {
                let row: Vec<String> = x.iter().chain([y]).map(f64::to_string).collect();
                writeln!(w, "{}", row.join(","))?;
            }
            w.flush()?;
            let outcome = run_stream(&config, &result.data)?;
            summarize(&outcome);
            let ledger = regret_report(
                &outcome.records,
                &result.data,
                config.kernel()?,
                config.lambda,
                config.bound,
            )?;
            print_ledger(&ledger)?;
        }
        Command::Rates { gamma, a_grid, out } => {
            let query = match a_grid {
                Some(grid) => RateQuery::new(gamma, grid)?,
                None => RateQuery::uniform(gamma, 20)?,
            };
            let rows = emit_rates(&query);
            let mut w: Box<dyn Write> = match out {
                Some(path) => Box::new(create(&path)?),
                None => Box::new(io::stdout().lock()),
            };
            writeln!(w, "algorithm,gamma,a,b")?;
            for r in rows {
                writeln!(w, "{},{},{},{}", r.algorithm, r.gamma, r.a, r.b)?;
            }
            w.flush()?;
        }
        Command::Deff {
            data,
            sigma,
            lambda,
        } => {
            let dataset = data.load()?;
            if dataset.len() > harness::regret::MAX_COMPARATOR_N {
                return Err(Error::Capacity(format!(
                    "dense spectrum limited to {} points; use --limit-n",
                    harness::regret::MAX_COMPARATOR_N
                )));
            }
            let gram = pkawv_core::KernelSpec::gaussian(sigma)?.gram(&dataset.inputs)?;
            let mut out = io::stdout().lock();
            writeln!(out, "lambda,d_eff")?;
            for l in lambda {
                writeln!(out, "{l},{}", effective_dimension(&gram, l)?)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
