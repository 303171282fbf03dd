use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use mscale_fno::data::SplitCounts;
use mscale_fno::harness;
use mscale_fno::Error;

#[derive(Parser)]
#[command(name = "mscale-fno", version, about = "Train and inspect Fourier neural operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a preset dataset into a directory.
    Gen {
        #[arg(long)]
        preset: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Split sizes (all three or none; defaults come from the preset).
        #[arg(long, requires_all = ["val", "test"])]
        train: Option<usize>,
        #[arg(long, requires_all = ["train", "test"])]
        val: Option<usize>,
        #[arg(long, requires_all = ["train", "val"])]
        test: Option<usize>,
    },
    /// Train according to a config file.
    Train {
        config: PathBuf,
        /// Suppress per-epoch progress lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Summarize relative errors of a checkpoint on one split.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        /// Evaluation batch size.
        #[arg(long, default_value_t = 50)]
        chunk: usize,
        /// Write per-sample errors to this CSV.
        #[arg(long)]
        per_sample: Option<PathBuf>,
        /// Write the summary as JSON.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Mode magnitudes of target, prediction and branch contributions.
    Spectrum {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0)]
        sample: usize,
        /// Add one column per branch (multi-scale checkpoints only).
        #[arg(long)]
        branches: bool,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the exact parameter count of a config's model.
    Count { config: PathBuf },
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen {
            preset,
            seed,
            out,
            train,
            val,
            test,
        } => {
            let counts = match (train, val, test) {
                (Some(train), Some(val), Some(test)) => Some(SplitCounts { train, val, test }),
                _ => None,
            };
            let s = harness::cmd_gen(&preset, seed, counts, &out)?;
            println!(
                "{}: {} samples on {} grid points (train {} / val {} / test {}) -> {}",
                s.preset,
                s.samples,
                s.grid_points,
                s.splits.train,
                s.splits.val,
                s.splits.test,
                s.manifest.display()
            );
        }
        Command::Train { config, quiet } => {
            let out = harness::cmd_train_with(&config, |r| {
                if !quiet {
                    eprintln!(
                        "epoch {:>4}  train {:.4e}  val {:.4e}  test {:.4e}",
                        r.epoch, r.train_loss, r.val_err, r.test_err
                    );
                }
            })?;
            let m = &out.manifest;
            println!("parameters: {}", m.parameter_count);
            match (m.best_epoch, m.best_val_err) {
                (Some(e), Some(v)) => println!("best epoch: {e} (val {v:e})"),
                _ => println!("best epoch: none (no epochs run)"),
            }
            println!("final train error: {:e}", m.final_train_err);
            println!("run directory: {}", out.dir.display());
        }
        Command::Eval {
            checkpoint,
            data,
            split,
            chunk,
            per_sample,
            summary,
        } => {
            let s = harness::cmd_eval(&checkpoint, &data, &split, chunk)?;
            println!(
                "{} ({} samples): mean {:e}  median {:e}  max {:e}",
                s.split, s.samples, s.mean, s.median, s.max
            );
            if let Some(path) = per_sample {
                write(&path, &s.per_sample_csv())?;
            }
            if let Some(path) = summary {
                write(&path, &(serde_json::to_string_pretty(&s)? + "\n"))?;
            }
        }
        Command::Spectrum {
            checkpoint,
            data,
            sample,
            branches,
            out,
        } => {
            let report = harness::cmd_spectrum(&checkpoint, &data, sample, branches)?;
            match out {
                Some(path) => write(&path, &report.to_csv())?,
                None => print!("{}", report.to_csv()),
            }
        }
        Command::Count { config } => {
            let r = harness::cmd_count(&config)?;
            println!("{}: {} parameters", r.kind, r.total);
            for (name, c) in &r.sections {
                println!("  {name:<16}{c}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(3, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
