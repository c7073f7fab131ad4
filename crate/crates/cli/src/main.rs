use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod cmd;
mod config;
mod failure;

use failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "slipkit", version, about = "Rotational slippage estimation from tactile contact masks")]
struct Cli {
    /// Flat key=value file; its entries override flags given on the command line.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Turn logit maps or contact/reference image pairs into binary masks.
    #[command(args_override_self = true)]
    Segment(cmd::segment::SegmentArgs),
    /// Estimate the relative rotation trace of one mask sequence.
    #[command(args_override_self = true)]
    Angle(cmd::angle::AngleArgs),
    /// Score predicted masks against ground-truth masks or LabelMe files.
    #[command(name = "eval-seg", args_override_self = true)]
    EvalSeg(cmd::eval_seg::EvalSegArgs),
    /// MARE of several estimators over several window sizes on a dataset.
    #[command(args_override_self = true)]
    Sweep(cmd::sweep::SweepArgs),
    /// Write a synthetic lift dataset with ground truth and a manifest.
    #[command(args_override_self = true)]
    Synth(cmd::synth::SynthArgs),
}

fn run() -> Result<(), Failure> {
    let args = config::expand_args(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Err(Failure::Usage(String::new()))
            } else {
                Ok(())
            };
        }
    };
    match cli.command {
        Command::Segment(a) => cmd::segment::run(a),
        Command::Angle(a) => cmd::angle::run(a),
        Command::EvalSeg(a) => cmd::eval_seg::run(a),
        Command::Sweep(a) => cmd::sweep::run(a),
        Command::Synth(a) => cmd::synth::run(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.to_string().is_empty() {
                eprintln!("error: {f}");
            }
            ExitCode::from(f.code())
        }
    }
}
