//! `ndgi`: analytic PSF sweeps, Monte Carlo ghost-image simulation and the
//! validation suite.

mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use ndgi_core::pipeline::{fit_psf_width, run};
use ndgi_core::psf::{sweep, SweepAxis};
use ndgi_core::validation::{run_suite, Level};

use config::FileConfig;
use error::{CliError, Result};
use output::{sci, Manifest};

#[derive(Parser)]
#[command(name = "ndgi", version, about = "Non-degenerate wavelength computational ghost imaging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate PSF width, field of view and magnification along one axis.
    PsfSweep {
        #[arg(long)]
        config: PathBuf,
        /// lambda_r, lambda_s, z3 or cn2
        #[arg(long)]
        axis: String,
        /// Comma-separated values in SI units.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Keep z3 fixed on wavelength sweeps.
        #[arg(long)]
        no_rematch: bool,
    },
    /// Run the Monte Carlo simulation and write the image and a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the acceptance criteria.
    Validate {
        #[arg(value_enum, default_value = "quick")]
        level: LevelArg,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_values(raw: &[String]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(CliError::Config("--values needs at least one value".into()));
    }
    raw.iter()
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("--values: '{s}' is not a number")))
        })
        .collect()
}

fn psf_sweep(config: &Path, axis: &str, values: &[String], out: &Path, rematch: bool) -> Result<()> {
    let cfg = FileConfig::load(config)?;
    let axis: SweepAxis = axis.parse()?;
    let values = parse_values(values)?;
    let geometry = cfg.geometry()?;
    let mut rows = Vec::new();
    let turbulence = cfg.turbulence()?;
    if axis == SweepAxis::Cn2 {
        rows = sweep(&geometry, axis, &values, turbulence.first(), rematch)?;
    } else {
        for t in &turbulence {
            rows.extend(sweep(&geometry, axis, &values, Some(t), rematch)?);
        }
    }
    output::write_sweep(out, &rows)?;
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn simulate(config: &Path, out: &Path, seed: Option<u64>, workers: usize) -> Result<()> {
    let start = Instant::now();
    let cfg = FileConfig::load(config)?;
    let experiment = cfg.experiment(seed)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(format!("cannot create {}", out.display()), e))?;
    let digest = cfg.digest(seed);
    let image = run(&experiment, workers)?.with_digest(digest.clone());

    let csv_path = out.join("image.csv");
    let pgm_path = out.join("image.pgm");
    let manifest_path = out.join("manifest.txt");
    output::write_image_csv(&csv_path, &image)?;
    output::write_pgm(&pgm_path, &image)?;

    let mut m = Manifest::default();
    m.set("command", format!("simulate --config {} --out {}", config.display(), out.display()));
    m.set("config_digest", &digest);
    m.set("seed", experiment.master_seed);
    m.set("realizations", image.realizations());
    m.set("grid", format!("{}x{}", image.grid().n(), image.grid().n()));
    m.set("pitch_m", sci(image.pitch()));
    match fit_psf_width(&image, &experiment.object) {
        Ok(fit) => {
            m.set("estimated_psf_width_m", sci(fit.width));
            m.set("fit_snr", sci(fit.snr));
        }
        Err(e) => m.set("estimated_psf_width_m", format!("unavailable ({e})")),
    }
    m.set(
        "outputs",
        [&csv_path, &pgm_path, &manifest_path]
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    m.set("wall_time_s", format!("{:.3}", start.elapsed().as_secs_f64()));
    m.write(&manifest_path)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn validate(level: LevelArg, workers: usize) -> Result<()> {
    let level = match level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let reports = run_suite(level, workers);
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", reports.len() - failed, reports.len());
    if failed > 0 {
        return Err(CliError::Validation {
            failed,
            total: reports.len(),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::PsfSweep {
            config,
            axis,
            values,
            out,
            no_rematch,
        } => psf_sweep(&config, &axis, &values, &out, !no_rematch),
        Command::Simulate {
            config,
            out,
            seed,
            workers,
        } => simulate(&config, &out, seed, workers.unwrap_or_else(default_workers)),
        Command::Validate { level, workers } => validate(level, workers.unwrap_or_else(default_workers)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.hint() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
