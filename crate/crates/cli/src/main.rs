use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::RunConfig;
use ennsplit::Error;

#[derive(Parser, Debug)]
#[command(name = "ennsplit", version, about = "Split-learning link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train without the link; writes model, metrics and decision map.
    TrainCentralized(Common),
    /// Train across the link for every SNR in the list.
    TrainSplit(Common),
    /// Measured and analytic symbol error rates.
    SerSweep(Common),
    /// Occupied bandwidth for the configured PHY.
    Bandwidth(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// `key=value` file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// ideal, awgn or rayleigh.
    #[arg(long)]
    channel: Option<String>,
    /// Comma-separated SNRs in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_list: Option<String>,
    /// plain or fsk-bpsk.
    #[arg(long)]
    mode: Option<String>,
    /// tdm or ocdm.
    #[arg(long)]
    access: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    extension: Option<usize>,
    #[arg(long)]
    neurons: Option<usize>,
    #[arg(long)]
    coeffs: Option<usize>,
    /// halfplane, rings or checker2x2.
    #[arg(long)]
    labeler: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Any config key, as `key=value`; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn resolve(&self) -> ennsplit::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags: [(&str, Option<String>); 12] = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("channel", self.channel.clone()),
            ("snr_list", self.snr_list.clone()),
            ("mode", self.mode.clone()),
            ("access", self.access.clone()),
            ("n", self.n.map(|v| v.to_string())),
            ("extension", self.extension.map(|v| v.to_string())),
            ("neurons", self.neurons.map(|v| v.to_string())),
            ("coeffs", self.coeffs.map(|v| v.to_string())),
            ("labeler", self.labeler.clone()),
            ("epochs", self.epochs.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("--set expects key=value, got `{kv}`")))?;
            cfg.set(k.trim(), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(command: &Command) -> Result<(), (u8, Error)> {
    let common = match command {
        Command::TrainCentralized(c)
        | Command::TrainSplit(c)
        | Command::SerSweep(c)
        | Command::Bandwidth(c) => c,
    };
    let cfg = common.resolve().map_err(|e| (1, e))?;
    let result = match command {
        Command::TrainCentralized(_) => commands::train_centralized_cmd(&cfg),
        Command::TrainSplit(_) => commands::train_split_cmd(&cfg),
        Command::SerSweep(_) => commands::ser_sweep_cmd(&cfg),
        Command::Bandwidth(_) => commands::bandwidth_report(&cfg).map(|r| print!("{r}")),
    };
    result.map_err(|e| match e {
        Error::Divergence { .. } => (2, e),
        e => (1, e),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, e)) => {
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
