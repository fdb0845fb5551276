use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use fermivqe::config::ExperimentConfig;
use fermivqe::experiments::{self, write_json};
use fermivqe::runner::with_threads;

#[derive(Parser)]
#[command(version, about = "Fermionic versus qubit VQE on Hubbard models and molecules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact ground state of each model (or the molecule) in the config.
    Ed(Common),
    /// Ground-state particle number along a coupling sweep.
    Staircase(Common),
    /// VQE restarts for every cell of the config.
    Vqe(Common),
    /// Gate, parameter and depth counts as CSV on stdout.
    Resources(Common),
    /// Jordan-Wigner Pauli strings as CSV on stdout.
    JwStats(Common),
    /// Resource and convergence table.
    Table(Common),
    /// Layer scan and power-law fits over system sizes.
    Scale(Common),
    /// Both paradigms on a molecular Hamiltonian (bundled water by default).
    Molecule(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment description (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured restart count.
    #[arg(long)]
    restarts: Option<usize>,
    /// Output directory; defaults to the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self, fallback: Option<ExperimentConfig>) -> anyhow::Result<ExperimentConfig> {
        let mut config = match (&self.config, fallback) {
            (Some(p), _) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            (None, Some(c)) => c,
            (None, None) => bail!("--config is required for this subcommand"),
        };
        if let Some(s) = self.seed {
            config.vqe.seed = s;
        }
        if let Some(r) = self.restarts {
            config.vqe.restarts = r;
        }
        if let Some(o) = &self.out {
            config.output = o.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

const MOLECULE_PRESET: &str = include_str!("../../../configs/molecule_h2o.json");

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let (common, fallback) = match &cli.command {
        Command::Molecule(c) => (c, Some(ExperimentConfig::from_json(MOLECULE_PRESET)?)),
        Command::Ed(c)
        | Command::Staircase(c)
        | Command::Vqe(c)
        | Command::Resources(c)
        | Command::JwStats(c)
        | Command::Table(c)
        | Command::Scale(c) => (c, None),
    };
    let config = common.load(fallback)?;
    let out = config.output.clone();
    with_threads(common.threads, || -> anyhow::Result<()> {
        match &cli.command {
            Command::Ed(_) => {
                let rows = experiments::run_ed(&config)?;
                std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
                write_json(&out.join("summary.json"), &rows)?;
                for (name, g) in &rows {
                    println!("{name}: E0 = {} N_f = {} degeneracy = {}", g.energy, g.n_f, g.degeneracy);
                }
            }
            Command::Staircase(_) => {
                let rows = experiments::run_staircase(&config)?;
                experiments::write_staircase(&out, &rows)?;
                for r in &rows {
                    println!("{} {} {}", r.coupling, r.energy, r.n_f);
                }
            }
            Command::Vqe(_) | Command::Table(_) => {
                let (report, traces) = experiments::run_table(&config)?;
                experiments::write_table(&out, &report, &traces)?;
                for c in &report.cells {
                    match (&c.convergence, &c.error) {
                        (Some(s), _) => println!(
                            "{} {} L={}: R_Q={} l_p={} l_I={:.1} F={:.4}",
                            c.label,
                            c.paradigm,
                            c.resources.layers,
                            c.resources.r_q,
                            c.resources.l_p,
                            s.l_i.mean,
                            s.final_fidelity.mean
                        ),
                        (None, e) => println!("{} {} failed: {}", c.label, c.paradigm, e.as_deref().unwrap_or("")),
                    }
                }
            }
            Command::Resources(_) => {
                let rows = experiments::resource_table(&config)?;
                std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
                let file = std::fs::File::create(out.join("table.csv"))?;
                experiments::write_resources_csv(file, &rows)?;
                experiments::write_resources_csv(std::io::stdout().lock(), &rows)?;
            }
            Command::JwStats(_) => {
                let rows = experiments::jw_stats(&config)?;
                experiments::write_jw_stats(std::io::stdout().lock(), &rows)?;
            }
            Command::Scale(_) => {
                let report = experiments::run_scaling(&config)?;
                experiments::write_scaling(&out, &report)?;
                for f in &report.fits {
                    println!("{} {}: beta = {:.3} +/- {:.3}", f.paradigm, f.resource.name(), f.exponent, f.stderr);
                }
                for s in &report.skipped_fits {
                    println!("skipped {s}");
                }
            }
            Command::Molecule(_) => {
                let (report, traces) = experiments::run_molecule(&config)?;
                experiments::write_molecule(&out, &report, &traces)?;
                println!("E0 = {} (N_f = {})", report.ground.energy, report.ground.n_f);
                for c in [&report.fermionic, &report.qubit] {
                    let s = c.convergence.as_ref().expect("molecule cells always converge or error");
                    println!(
                        "{} L={}: R_Q={} l_p={} l_I={:.1} F={:.4}",
                        c.paradigm,
                        c.resources.layers,
                        c.resources.r_q,
                        c.resources.l_p,
                        s.l_i.mean,
                        s.final_fidelity.mean
                    );
                }
            }
        }
        std::io::stdout().flush()?;
        Ok(())
    })??;
    Ok(())
}
