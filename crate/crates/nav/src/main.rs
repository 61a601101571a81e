use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use crater_nav::config::RunConfig;
use crater_nav::{io, runner};
use crater_nav_core::catalogue::synth::generate_entries;
use crater_nav_core::mission::generate_schedule;
use crater_nav_core::MU_MOON_KM3_S2;

#[derive(Parser)]
#[command(name = "crater-nav", version, about = "Crater-based navigation: simulate, estimate, refine, report")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Overrides applied on top of the config file.
#[derive(Args, Default)]
struct Overrides {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    min_inliers: Option<usize>,
    /// Componentwise prior position bound, metres.
    #[arg(long)]
    prior_pos_sigma: Option<f64>,
    /// Per-axis prior attitude bound, degrees.
    #[arg(long)]
    prior_att_sigma: Option<f64>,
    /// Catalogue CSV (default: synthetic catalogue from the config).
    #[arg(long)]
    catalogue: Option<PathBuf>,
    /// Orbit-fit window in seconds (default: whole batch).
    #[arg(long)]
    od_window_s: Option<f64>,
}

impl Overrides {
    fn resolve(&self, seed: Option<u64>) -> anyhow::Result<RunConfig> {
        self.resolve_near(seed, None)
    }

    /// Without `--config`, a `config.toml` next to `input` (a run directory
    /// file) is used before the defaults.
    fn resolve_near(&self, seed: Option<u64>, input: Option<&Path>) -> anyhow::Result<RunConfig> {
        let sibling = input
            .and_then(Path::parent)
            .map(|d| d.join("config.toml"))
            .filter(|p| p.is_file());
        let mut cfg = match self.config.as_ref().or(sibling.as_ref()) {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(v) = self.min_inliers {
            cfg.min_inliers = v;
        }
        if let Some(v) = self.prior_pos_sigma {
            cfg.prior_pos_sigma = v;
        }
        if let Some(v) = self.prior_att_sigma {
            cfg.prior_att_sigma = v;
        }
        if let Some(p) = &self.catalogue {
            cfg.catalogue_path = Some(p.clone());
        }
        if let Some(w) = self.od_window_s {
            cfg.od_window_s = Some(w);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mission schedule to a frames CSV, optionally with simulated detections.
    Simulate {
        #[command(flatten)]
        opts: Overrides,
        #[arg(long)]
        seed: Option<u64>,
        /// Mission length, days.
        #[arg(long)]
        duration_days: Option<f64>,
        /// Also write simulated detections as detections JSON.
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-frame pose estimation into a new run directory.
    RunCore {
        #[command(flatten)]
        opts: Overrides,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        frames: PathBuf,
        /// External detections JSON instead of the simulator.
        #[arg(long)]
        detections: Option<PathBuf>,
        /// Root of the run directories.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Orbit refinement of a reports CSV into a positions CSV.
    RunOd {
        #[command(flatten)]
        opts: Overrides,
        #[arg(long)]
        reports: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summary JSON and per-bin CSVs.
    Report {
        #[command(flatten)]
        opts: Overrides,
        #[arg(long)]
        reports: PathBuf,
        /// Refined positions CSV from `run-od`.
        #[arg(long)]
        refined: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthetic catalogue CSV.
    GenCatalogue {
        #[command(flatten)]
        opts: Overrides,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Simulate {
            opts,
            seed,
            duration_days,
            detections,
            out,
        } => {
            let mut cfg = opts.resolve(seed)?;
            if let Some(d) = duration_days {
                cfg.mission.duration_days = d;
            }
            let schedule = generate_schedule(&cfg.mission, MU_MOON_KM3_S2)?;
            let frames = schedule.frames;
            io::save_frames(&out, &frames).with_context(|| format!("writing {}", out.display()))?;
            println!("{} of {} frames lit -> {}", frames.len(), schedule.raw_frames, out.display());
            if let Some(path) = detections {
                let cat = runner::catalogue_for(&cfg)?;
                let dets = runner::simulate_batch(&frames, &cat, &cfg);
                io::save_detections(&path, &dets)?;
                println!("{} detections -> {}", dets.iter().map(|d| d.len()).sum::<usize>(), path.display());
            }
        }
        Command::RunCore {
            opts,
            seed,
            frames,
            detections,
            out,
        } => {
            let mut cfg = opts.resolve(Some(seed))?;
            if detections.is_some() {
                cfg.detections_path = detections;
            }
            let frames = io::load_frames(&frames).with_context(|| format!("reading {}", frames.display()))?;
            let cat = runner::catalogue_for(&cfg)?;
            let ext = cfg.detections_path.as_deref().map(io::load_detections).transpose()?;
            let inputs = runner::frame_inputs(&frames, &cfg.mission.sun, ext.as_ref());
            let reports = runner::run_frames(&inputs, &cat, &cfg);
            let dir = runner::create_run_dir(&out, &cfg)?;
            runner::write_core_outputs(&dir, &reports)?;
            runner::write_summary(&dir, &runner::summary_document(&reports, None, &cfg))?;
            let ok = reports.iter().filter(|r| r.errors.is_some()).count();
            println!("{ok}/{} frames OK -> {}", reports.len(), dir.display());
        }
        Command::RunOd { opts, reports, out } => {
            let cfg = opts.resolve_near(None, Some(&reports))?;
            let reports = io::load_reports(&reports).with_context(|| format!("reading {}", reports.display()))?;
            let od = runner::refine(&reports, &cfg)?;
            if od.fits.iter().any(|f| !f.converged) {
                eprintln!("warning: an orbit fit stopped at its iteration cap");
            }
            io::save_positions(&out, &od.positions)?;
            println!("{} positions from {} fit(s) -> {}", od.positions.len(), od.fits.len(), out.display());
        }
        Command::Report {
            opts,
            reports,
            refined,
            out,
        } => {
            let cfg = opts.resolve_near(None, Some(&reports))?;
            let reports = io::load_reports(&reports).with_context(|| format!("reading {}", reports.display()))?;
            let refined = refined.as_deref().map(io::load_positions).transpose()?;
            if let Some(p) = &refined {
                check_aligned(&reports, p)?;
            }
            std::fs::create_dir_all(&out)?;
            runner::write_summary(&out, &runner::summary_document(&reports, refined.as_deref(), &cfg))?;
            println!("summary -> {}", Path::new(&out).join("summary.json").display());
        }
        Command::GenCatalogue { opts, count, seed, out } => {
            let mut cfg = opts.resolve(None)?;
            if let Some(c) = count {
                cfg.synth.count = c;
            }
            if let Some(s) = seed {
                cfg.synth.seed = s;
            }
            let entries = generate_entries(&cfg.synth);
            io::save_catalogue(&out, &entries)?;
            println!("{} craters -> {}", entries.len(), out.display());
        }
    }
    Ok(())
}

fn check_aligned(
    reports: &[crater_nav_core::pipeline::FrameReport],
    refined: &[crater_nav_core::od::TimedPosition],
) -> anyhow::Result<()> {
    if reports.len() != refined.len()
        || reports.iter().zip(refined).any(|(r, p)| r.timestamp != p.timestamp)
    {
        bail!("refined positions do not match the report timestamps");
    }
    Ok(())
}
