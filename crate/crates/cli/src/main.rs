use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ngca::{dataset, GeneratorKind, Subspace64};
use ngca_harness::{
    estimate, export_projection, fit_rate, read_records_from, run_experiment, write_records,
    write_records_to, Algorithm, ExperimentConfig, HarnessError, Metric,
};

#[derive(Parser)]
#[command(name = "ngca", version, about = "Non-Gaussian component analysis experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid described by a JSON config and write the results CSV.
    Run {
        config: PathBuf,
        /// Overrides the config's output path; without either, CSV goes to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit the log-log convergence slope of one algorithm from a results CSV.
    Rate {
        results: PathBuf,
        #[arg(long, default_value = "lsngca")]
        algorithm: Algorithm,
        /// E (subspace error) or D (Procrustes distance).
        #[arg(long, default_value = "D")]
        metric: Metric,
    },
    /// Project centred data onto an original-frame subspace.
    Project {
        data: PathBuf,
        subspace: PathBuf,
        output: PathBuf,
    },
    /// Estimate a subspace from a data CSV and write it as JSON.
    Estimate {
        data: PathBuf,
        #[arg(long, default_value = "lsngca")]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 2)]
        d_s: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Experiment config whose per-algorithm blocks are used.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Draw one synthetic data set and write it as CSV.
    Generate {
        #[arg(long, default_value = "gaussian_mixture")]
        generator: GeneratorKind,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        d_x: usize,
        #[arg(long, default_value_t = 0.0)]
        gamma2: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run { config, output } => {
            let cfg = ExperimentConfig::load(&config)?;
            let records = run_experiment(&cfg)?;
            let failed = records.iter().filter(|r| !r.error_msg.is_empty()).count();
            match output.or(cfg.output) {
                Some(path) => {
                    write_records_to(&records, &path)?;
                    eprintln!("wrote {} rows to {}", records.len(), path.display());
                }
                None => write_records(&records, std::io::stdout().lock())?,
            }
            if failed > 0 {
                eprintln!("{failed} runs failed; see error_msg");
            }
        }
        Command::Rate {
            results,
            algorithm,
            metric,
        } => {
            let fit = fit_rate(&read_records_from(&results)?, algorithm, metric)?;
            for (n, m) in &fit.points {
                println!("n={n}\tmean={m:.6}");
            }
            println!(
                "slope={:.4} stderr={:.4} intercept={:.4}",
                fit.slope, fit.slope_stderr, fit.intercept
            );
        }
        Command::Project {
            data,
            subspace,
            output,
        } => {
            let x = dataset::load_csv::<f64>(&data)?;
            let s = Subspace64::read_json(&subspace)?;
            export_projection(&x, &s, &output)?;
        }
        Command::Estimate {
            data,
            algorithm,
            d_s,
            seed,
            config,
            output,
        } => {
            let cfg = match config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            let x = dataset::load_csv::<f64>(&data)?;
            let s = estimate(algorithm, &x, d_s, &cfg, seed)?;
            if s.degenerate_gap() {
                eprintln!("warning: eigen-gap after component {d_s} is small; the subspace is poorly determined");
            }
            s.write_json(&output)?;
        }
        Command::Generate {
            generator,
            n,
            d_x,
            gamma2,
            seed,
            output,
        } => {
            let x = dataset::generate::<f64>(generator, n, d_x, gamma2, seed)?;
            let file = std::fs::File::create(&output).map_err(|source| HarnessError::Io {
                path: output.display().to_string(),
                source,
            })?;
            let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
            for row in x.as_matrix().row_iter() {
                w.write_record(row.iter().map(|v| v.to_string()))?;
            }
            w.flush().map_err(csv::Error::from)?;
        }
    }
    Ok(())
}
