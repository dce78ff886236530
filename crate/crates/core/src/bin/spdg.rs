use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spdg::cipher::Criterion;
use spdg::cli::{
    cmd_cipher, cmd_datagen, cmd_suite, cmd_surface, cmd_train, CipherCommand, ExperimentConfig, Mode,
    PriorSource, SurfaceMode, Which,
};
use spdg::surface::GridSpec;
use spdg::trainer::Hyperparams;
use spdg::{Error, Result};

/// Unsupervised binary classification by matching output statistics to a label prior.
#[derive(Parser)]
#[command(name = "spdg", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Options shared by every command; flags override the JSON config file.
#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Hyperparameters as `key = value` lines; overrides the config's `hyper`.
    #[arg(long, global = true)]
    hyper: Option<PathBuf>,
    /// Output directory [default: $SPDG_OUT_DIR or ./out].
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Data generation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Training seed.
    #[arg(long, global = true)]
    train_seed: Option<u64>,
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// Transition matrix, row-major: p00,p01,p10,p11.
    #[arg(long, global = true, value_delimiter = ',', conflicts_with_all = ["unigram", "empirical"])]
    transition: Option<Vec<f64>>,
    /// Unigram prior: p0,p1.
    #[arg(long, global = true, value_delimiter = ',', conflicts_with = "empirical")]
    unigram: Option<Vec<f64>>,
    /// Estimate the prior from the training labels.
    #[arg(long, global = true)]
    empirical: bool,
    /// Train, validation and test sizes.
    #[arg(long, global = true, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, global = true)]
    max_steps: Option<u64>,
    #[arg(long, global = true)]
    restarts: Option<u32>,
    #[arg(long, global = true)]
    lr_theta: Option<f64>,
    #[arg(long, global = true)]
    lr_dual: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a labelled sequence and write data.csv and data.spec.json.
    Datagen,
    /// Train supervised and/or unsupervised models on a dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// supervised, unsupervised or both.
        #[arg(long, default_value = "both")]
        which: Which,
    },
    /// Run the ten bigram datasets and the unigram control.
    Suite {
        /// Fill the report's seconds column (makes the file irreproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Export a cost surface grid around a model.
    Surface {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        /// primal or primal-dual.
        #[arg(long, default_value = "primal")]
        kind: SurfaceMode,
        #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
        grid_min: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        grid_max: f64,
        #[arg(long, default_value_t = 81)]
        grid_n: usize,
        /// Seed of the random directions.
        #[arg(long, default_value_t = 0)]
        surface_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Caesar cipher encryption and frequency-matching decryption.
    Cipher {
        #[command(subcommand)]
        op: CipherOp,
        /// Read text from this file instead of standard input.
        #[arg(long, global = true)]
        input: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CipherOp {
    Encrypt {
        #[arg(long)]
        shift: u8,
    },
    Decrypt {
        #[arg(long)]
        shift: u8,
    },
    Crack {
        /// `LETTER,frequency` file; defaults to bundled English frequencies.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// chi2 or kl.
        #[arg(long, default_value = "chi2")]
        criterion: Criterion,
    },
}

fn exactly<T: Copy, const N: usize>(v: &[T], flag: &str) -> Result<[T; N]> {
    v.try_into()
        .map_err(|_| Error::InvalidInput(format!("--{flag} takes {N} comma-separated values, got {}", v.len())))
}

fn config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig {
            out_dir: std::env::var_os("SPDG_OUT_DIR").map_or_else(|| PathBuf::from("out"), PathBuf::from),
            ..ExperimentConfig::default()
        },
    };
    if let Some(p) = &c.hyper {
        cfg.hyper = Hyperparams::from_config_file(p)?;
    }
    if let Some(d) = &c.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(s) = c.train_seed {
        cfg.hyper.seed = s;
    }
    if let Some(m) = c.mode {
        cfg.mode = m;
    }
    if let Some(t) = &c.transition {
        let [a, b, c, d] = exactly(t, "transition")?;
        cfg.prior = PriorSource::Transition([[a, b], [c, d]]);
    }
    if let Some(u) = &c.unigram {
        cfg.prior = PriorSource::Unigram(exactly(u, "unigram")?);
        if c.mode.is_none() {
            cfg.mode = Mode::Unigram;
        }
    }
    if c.empirical {
        cfg.prior = PriorSource::Empirical;
    }
    if let Some(s) = &c.sizes {
        cfg.sizes = exactly(s, "sizes")?;
    }
    if let Some(v) = c.max_steps {
        cfg.hyper.max_steps = v;
    }
    if let Some(v) = c.restarts {
        cfg.hyper.restarts = v;
    }
    if let Some(v) = c.lr_theta {
        cfg.hyper.lr_theta = v;
    }
    if let Some(v) = c.lr_dual {
        cfg.hyper.lr_dual = v;
    }
    Ok(cfg)
}

fn read_input(path: &Option<PathBuf>) -> Result<String> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        }),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Io {
                path: PathBuf::from("<stdin>"),
                source: e,
            })?;
            Ok(s)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = config(&cli.common)?;
    match cli.cmd {
        Cmd::Datagen => println!("{}", cmd_datagen(&cfg)?),
        Cmd::Train { data, which } => println!("{}", cmd_train(&cfg, &data, which)?),
        Cmd::Suite { timings } => println!("{}", cmd_suite(&cfg, timings)?),
        Cmd::Surface {
            data,
            model,
            kind,
            grid_min,
            grid_max,
            grid_n,
            surface_seed,
            out,
        } => {
            let grid = GridSpec::square(grid_min, grid_max, grid_n);
            let report = cmd_surface(&cfg, model.as_deref(), &data, kind, &grid, surface_seed, out.as_deref())?;
            println!("{report}");
        }
        Cmd::Cipher { op, input } => {
            let cmd = match op {
                CipherOp::Encrypt { shift } => CipherCommand::Encrypt { shift },
                CipherOp::Decrypt { shift } => CipherCommand::Decrypt { shift },
                CipherOp::Crack { reference, criterion } => CipherCommand::Crack { reference, criterion },
            };
            let text = read_input(&input)?;
            let out = cmd_cipher(&cmd, &text)?;
            print!("{out}");
            if !out.ends_with('\n') {
                println!();
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}: {}", e.kind(), e.detail().replace('\n', " "));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
