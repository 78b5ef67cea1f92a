use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kdac_cli::config::{load_json, BenchConfig, ExperimentConfig, MaskSpec};
use kdac_cli::run::{cmd_bench, cmd_mask, cmd_phantom, cmd_recon, configure_threads};
use kdac_cli::{CliError, CliResult};
use kdac_core::dac::LoopParams;
use kdac_core::filterbank::BankKind;
use kdac_core::sampling::MaskKind;
use kdac_core::solvers::SolverKind;

#[derive(Parser)]
#[command(
    name = "kdac",
    version,
    about = "Divide-and-conquer k-space reconstruction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sampling mask (grid file and PNG).
    Mask {
        #[arg(long)]
        kind: MaskKind,
        #[arg(long)]
        ratio: f64,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Generate the test phantom (grid file and PNG) and print its checksum.
    Phantom {
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run one reconstruction experiment; flags override the config file.
    Recon(ReconArgs),
    /// Run a sweep described by a config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep going after a failed cell.
        #[arg(long)]
        continue_on_error: bool,
    },
}

#[derive(clap::Args)]
struct ReconArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// `phantom` or an image grid file.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mask_kind: Option<MaskKind>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bank: Option<BankKind>,
    #[arg(long)]
    solver: Option<SolverKind>,
    /// Noise levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    window_hi: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ReconArgs {
    fn into_config(self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_json::<ExperimentConfig>(path)?,
            None => {
                let kind = self
                    .mask_kind
                    .ok_or_else(|| CliError::Config("`mask.kind`: pass --mask-kind or a config file".into()))?;
                let ratio = self
                    .ratio
                    .ok_or_else(|| CliError::Config("`mask.ratio`: pass --ratio or a config file".into()))?;
                ExperimentConfig::new(MaskSpec { kind, ratio, seed: 0 })
            }
        };
        if let Some(v) = self.input {
            cfg.input = v;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.mask_kind {
            cfg.mask.kind = v;
        }
        if let Some(v) = self.ratio {
            cfg.mask.ratio = v;
        }
        if let Some(v) = self.seed {
            cfg.mask.seed = v;
        }
        if let Some(v) = self.bank {
            cfg.bank = v;
        }
        if let Some(v) = self.solver {
            cfg.solver = v;
        }
        if let Some(v) = self.sigma {
            cfg.sigmas = v;
        }
        let LoopParams { max_outer, tol } = cfg.loop_params;
        cfg.loop_params = LoopParams {
            max_outer: self.max_outer.unwrap_or(max_outer),
            tol: self.tol.unwrap_or(tol),
        };
        if let Some(v) = self.window_hi {
            cfg.window_hi = v;
        }
        if let Some(v) = self.out {
            cfg.output_dir = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn fmt_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.3}")
    }
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Mask {
            kind,
            ratio,
            n,
            seed,
            out,
        } => {
            let m = cmd_mask(kind, ratio, n, seed, &out)?;
            println!(
                "mask kind={} n={} seed={} target={} achieved={:.6} grid={} png={}",
                m.kind,
                m.n,
                m.seed,
                m.target,
                m.achieved,
                m.grid.display(),
                m.png.display()
            );
        }
        Command::Phantom { n, out } => {
            let p = cmd_phantom(n, &out)?;
            println!(
                "phantom n={} sha256={} grid={} png={}",
                p.n,
                p.sha256,
                p.grid.display(),
                p.png.display()
            );
        }
        Command::Recon(args) => {
            let cfg = args.into_config()?;
            for r in cmd_recon(&cfg)? {
                println!(
                    "recon {} {} {} bank={} solver={} sigma={} psnr={} ssim={:.4} hfen={:.4} wall_ms={:.0}",
                    r.input,
                    r.mask_kind,
                    r.ratio,
                    r.bank,
                    r.solver,
                    r.sigma,
                    fmt_psnr(r.psnr_db),
                    r.ssim,
                    r.hfen,
                    r.wall_ms
                );
            }
        }
        Command::Bench {
            config,
            out,
            continue_on_error,
        } => {
            let mut cfg: BenchConfig = load_json(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            cfg.continue_on_error |= continue_on_error;
            let outcome = cmd_bench(&cfg)?;
            println!("bench rows={} table={}", outcome.rows.len(), outcome.table.display());
            for (cell, err) in &outcome.failures {
                eprintln!("kdac: cell {cell} failed: {err}");
            }
            if let Some((cell, err)) = outcome.failures.into_iter().next() {
                return Err(err.context(&format!("cell {cell}")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kdac: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
