//! `donn` — command-line harness for the optical-interconnect simulator.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

// Validation sites use `!(x > y)` on purpose: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> CliError {
        CliError::Runtime(anyhow::anyhow!(msg.into()))
    }
}

impl From<donn::Error> for CliError {
    fn from(err: donn::Error) -> CliError {
        match err {
            donn::Error::Usage(_) | donn::Error::Config { .. } => CliError::Usage(err.to_string()),
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(err: anyhow::Error) -> CliError {
        CliError::Runtime(err)
    }
}

#[derive(Parser)]
#[command(
    name = "donn",
    version,
    about = "Optical-interconnect accelerator simulator: energy tables, bit-error rates, \
             channel experiments, and quantized MNIST inference"
)]
struct Cli {
    /// TOML config file (defaults from DONN_CONFIG when unset).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory for reports, CSVs and other artifacts (default `runs`).
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Master RNG seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interconnect energy presets, sweeps, and the optical/electrical crossover
    Energy {
        /// Scenario preset: inter_mac_min, inter_mac_max, inter_sram,
        /// inter_chiplet, or `all`.
        #[arg(long, value_name = "NAME")]
        preset: Option<String>,
        /// Length sweep START:END:lin|log[:STEPS], lengths in um
        /// (e.g. 1:3000:log).
        #[arg(long, value_name = "SPEC")]
        sweep: Option<String>,
        /// Also emit a gnuplot script next to the sweep CSV.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Analytic bit-error-rate tables and Monte-Carlo validation
    Ber {
        /// Print the BER grid (shot, thermal, convolved).
        #[arg(long)]
        table: bool,
        /// Monte-Carlo channel run against the closed forms.
        #[arg(long)]
        montecarlo: bool,
        /// Photons per bit for --montecarlo.
        #[arg(long)]
        np: Option<f64>,
        /// Trials for --montecarlo (scientific notation accepted).
        #[arg(long, default_value = "1e7")]
        trials: String,
        /// Temperature in K for --montecarlo.
        #[arg(long)]
        temp: Option<f64>,
        /// Photon budgets for --table.
        #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 100.0, 1000.0])]
        np_list: Vec<f64>,
        /// Temperatures for --table.
        #[arg(long, value_delimiter = ',', default_values_t = vec![300.0, 500.0])]
        temps: Vec<f64>,
    },
    /// Random bit frames through the channel, with and without correction
    ChannelTest {
        #[arg(long, default_value_t = 350)]
        rows: usize,
        #[arg(long, default_value_t = 300)]
        cols: usize,
        /// Crosstalk fraction override.
        #[arg(long)]
        xi: Option<f64>,
        /// Photons per bit override.
        #[arg(long)]
        np: Option<f64>,
        /// Temperature override, K.
        #[arg(long)]
        temp: Option<f64>,
    },
    /// Train a fully-connected model on MNIST
    Train {
        /// Architecture: 2layer or 3layer.
        #[arg(long, default_value = "3layer")]
        arch: String,
        /// Directory with the MNIST IDX files.
        #[arg(long, value_name = "DIR")]
        data_dir: Option<PathBuf>,
        /// Model output path (default <out-dir>/model_<arch>.bin).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        dropout: Option<f64>,
        #[arg(long)]
        momentum: Option<f64>,
        /// Limit the number of training images (debugging).
        #[arg(long)]
        limit: Option<usize>,
        /// Also export the weights as JSON.
        #[arg(long, value_name = "FILE")]
        export_json: Option<PathBuf>,
    },
    /// Classify MNIST test images through the simulated hardware
    Infer {
        /// Trained model file.
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        #[arg(long, value_name = "DIR")]
        data_dir: Option<PathBuf>,
        /// ideal, optical, or electrical.
        #[arg(long, default_value = "optical")]
        mode: String,
        #[arg(long, default_value_t = 500)]
        images: usize,
        /// Crosstalk fraction override.
        #[arg(long)]
        xi: Option<f64>,
        /// Photons per bit override.
        #[arg(long)]
        np: Option<f64>,
        /// Temperature override, K.
        #[arg(long)]
        temp: Option<f64>,
    },
}

fn main() {
    // Die quietly when a pipe reader (e.g. `| head`) goes away, like any
    // other Unix tool.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_cfg = config::FileConfig::resolve(cli.config.as_deref())?;
    let seed = cli.seed.or(file_cfg.seed).unwrap_or(42);
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| file_cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs"));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::runtime(format!("cannot create out dir {out_dir:?}: {e}")))?;

    let ctx = commands::Context {
        file_cfg,
        seed,
        out_dir,
    };
    match cli.command {
        Command::Energy {
            preset,
            sweep,
            gnuplot,
        } => commands::energy::run(&ctx, preset.as_deref(), sweep.as_deref(), gnuplot),
        Command::Ber {
            table,
            montecarlo,
            np,
            trials,
            temp,
            np_list,
            temps,
        } => commands::ber::run(&ctx, table, montecarlo, np, &trials, temp, &np_list, &temps),
        Command::ChannelTest {
            rows,
            cols,
            xi,
            np,
            temp,
        } => commands::channel_test::run(&ctx, rows, cols, xi, np, temp),
        Command::Train {
            arch,
            data_dir,
            out,
            epochs,
            lr,
            batch,
            dropout,
            momentum,
            limit,
            export_json,
        } => commands::train::run(
            &ctx,
            &arch,
            data_dir.as_deref(),
            out.as_deref(),
            commands::train::Overrides {
                epochs,
                lr,
                batch,
                dropout,
                momentum,
                limit,
            },
            export_json.as_deref(),
        ),
        Command::Infer {
            model,
            data_dir,
            mode,
            images,
            xi,
            np,
            temp,
        } => commands::infer::run(&ctx, &model, data_dir.as_deref(), &mode, images, xi, np, temp),
    }
}
