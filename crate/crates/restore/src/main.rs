use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use ppxa_core::conv::Boundary;
use ppxa_restore::config::{Config, ConfigError};
use ppxa_restore::experiment::{boundary_comparison, log_grid, sweep, Scenario};
use ppxa_restore::metrics::{snr, ssim};
use ppxa_restore::pnm::{read_image, write_image};
use ppxa_restore::{phantom, selftest, trace};

/// Poisson image restoration with total variation and tight-frame sparsity.
#[derive(Parser)]
#[command(name = "ppxa-restore", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Blur an image and draw Poisson counts from it.
    Degrade {
        image: PathBuf,
        #[arg(short, long)]
        config: PathBuf,
        /// Observation file (.pgm or .f64le).
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Restore an image from an observation.
    Restore {
        observation: PathBuf,
        #[arg(short, long)]
        config: PathBuf,
        /// Restored image (.pgm or .f64le).
        #[arg(short, long)]
        out: PathBuf,
        /// Trace CSV; defaults to the output path with a .csv extension.
        #[arg(short, long)]
        trace: Option<PathBuf>,
    },
    /// Report SNR and SSIM of an estimate against a reference.
    Eval {
        reference: PathBuf,
        estimate: PathBuf,
        /// Dynamic range used by SSIM.
        #[arg(long, default_value_t = 255.0)]
        range: f64,
    },
    /// Run the built-in oracle checks.
    Selftest {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Write the piecewise-constant test phantom.
    Phantom {
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Sweep the regularization weights on the seeded phantom.
    Sweep {
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        /// Decimation factor of the blur.
        #[arg(long, default_value_t = 1)]
        decimation: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Smallest and largest value of the log grid, shared by mu and vartheta.
        #[arg(long, num_args = 2, default_values_t = [1e-3, 1.0])]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        points: usize,
        /// Also compare zero-padded and periodic models on an extended phantom.
        #[arg(long)]
        boundary: bool,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Config(anyhow::Error),
    Numerical(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Config(e) | Failure::Numerical(e) => e,
        }
    }
}

fn core(e: ppxa_core::Error) -> Failure {
    use ppxa_core::Error::*;
    let numerical = matches!(
        e,
        NotTight(_) | NonFiniteIterate(_) | NonFinite(_) | Oracle(_)
    );
    let e = anyhow::Error::new(e);
    if numerical {
        Failure::Numerical(e)
    } else {
        Failure::Config(e)
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn load_config(path: &Path) -> Result<Config, Failure> {
    Config::load(path).map_err(|e| {
        if e.is::<ConfigError>() {
            Failure::Config(e)
        } else {
            Failure::Usage(e)
        }
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Degrade { image, config, out } => {
            let cfg = load_config(&config)?;
            let img = read_image(&image).map_err(usage)?;
            let obs = cfg.degrade(&img).map_err(core)?;
            write_image(&out, &obs.to_image()).map_err(usage)?;
            eprintln!(
                "wrote {} ({}x{} counts, alpha {}, seed {})",
                out.display(),
                obs.to_image().cols(),
                obs.to_image().rows(),
                cfg.alpha,
                cfg.seed
            );
        }
        Command::Restore {
            observation,
            config,
            out,
            trace: trace_path,
        } => {
            let cfg = load_config(&config)?;
            let z = read_image(&observation).map_err(usage)?;
            let restored = cfg.restore(&z).map_err(core)?;
            write_image(&out, &restored.image).map_err(usage)?;
            let trace_path = trace_path.unwrap_or_else(|| out.with_extension("csv"));
            fs::write(&trace_path, trace::to_csv(&restored.solution.trace))
                .with_context(|| format!("cannot write {}", trace_path.display()))
                .map_err(usage)?;
            let sol = &restored.solution;
            let last = sol
                .trace
                .last()
                .map_or(sol.initial_objective, |t| t.objective);
            eprintln!(
                "{} after {} iterations, objective {:.6e} -> {:.6e}",
                if sol.converged {
                    "converged"
                } else {
                    "stopped"
                },
                sol.iterations,
                sol.initial_objective,
                last
            );
            if restored.box_violation > 1e-3 {
                eprintln!(
                    "note: projected the result onto the box (largest move {:.3e})",
                    restored.box_violation
                );
            }
        }
        Command::Eval {
            reference,
            estimate,
            range,
        } => {
            let a = read_image(&reference).map_err(usage)?;
            let b = read_image(&estimate).map_err(usage)?;
            println!("SNR  = {:.4} dB", snr(&a, &b).map_err(core)?);
            println!("SSIM = {:.6}", ssim(&a, &b, range).map_err(core)?);
        }
        Command::Selftest { samples } => {
            let checks = selftest::run(samples);
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if checks.iter().any(|c| !c.pass) {
                return Err(Failure::Numerical(anyhow::anyhow!("self-test failed")));
            }
        }
        Command::Phantom { size, out } => {
            write_image(&out, &phantom::phantom(size, size)).map_err(usage)?;
        }
        Command::Sweep {
            size,
            alpha,
            decimation,
            seed,
            grid,
            points,
            boundary,
        } => {
            let mode = if decimation > 1 {
                Boundary::Decimated(decimation)
            } else {
                Boundary::ZeroPad
            };
            let scn = Scenario::phantom(size, 3, mode, alpha, seed).map_err(core)?;
            let values = log_grid(grid[0], grid[1], points);
            let s = sweep(&scn, &values, &values).map_err(core)?;
            println!(
                "baseline            SNR {:7.3} dB  SSIM {:.4}",
                s.baseline_snr, s.baseline_ssim
            );
            println!(
                "{:>10} {:>10} {:>9} {:>7} {:>6} {:>9}",
                "mu", "vartheta", "SNR", "SSIM", "iters", "box dist"
            );
            for p in s.tv_only.iter().chain(&s.wavelet_only).chain(&s.hybrid) {
                println!(
                    "{:>10.3e} {:>10.3e} {:>9.3} {:>7.4} {:>6} {:>9.2e}",
                    p.mu, p.vartheta, p.snr, p.ssim, p.iterations, p.box_violation
                );
            }
            for (name, p) in [
                ("hybrid", s.best_hybrid()),
                ("TV only", s.best_tv_only()),
                ("wavelet only", s.best_wavelet_only()),
            ] {
                println!(
                    "best {name:<13} mu {:.3e} vartheta {:.3e}  SNR {:.3} dB  SSIM {:.4}",
                    p.mu, p.vartheta, p.snr, p.ssim
                );
            }
            if boundary {
                let b = s.best_hybrid();
                let c =
                    boundary_comparison(size, 3, alpha, seed, b.mu, b.vartheta).map_err(core)?;
                println!(
                    "boundary zeropad  SNR {:.3} dB  SSIM {:.4}",
                    c.zero_pad.snr, c.zero_pad.ssim
                );
                println!(
                    "boundary periodic SNR {:.3} dB  SSIM {:.4}",
                    c.periodic.snr, c.periodic.ssim
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
