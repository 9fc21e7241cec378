//! gkdv-lab: command-line front end of the experiment pipeline.
//!
//! Exit codes: 0 ok, 2 configuration, 3 blow-up, 4 domain (boundary contact),
//! 5 diagnostic failure or undecayed data, 6 I/O or file format.

use clap::{Parser, Subcommand, ValueEnum};
use gkdv::diagnostics::nondispersion_profile;
use gkdv::lab::snapshot::load_snapshot;
use gkdv::lab::{collision, exit_code, run_experiment, scenario, ExperimentConfig, RunOutcome, SCENARIOS};
use gkdv::modulation::{decompose, guess_solitons, ModulationMode, ModulationOptions};
use gkdv::scattering::{schrodinger_spectrum, zs_spectrum, ScatteringOptions};
use gkdv::solver::Trajectory;
use gkdv::{spectral, Error, Field, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gkdv-lab",
    version,
    about = "Numerical laboratory for the generalized KdV equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Translations,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config.
    Run { config: PathBuf },
    /// Evolve a config's initial data and store snapshots, skipping its diagnostics.
    Simulate { config: PathBuf },
    /// Invariants of stored snapshots, one CSV row each; with --rho and --r also the
    /// non-dispersion profile of the snapshots taken as a trajectory.
    Diagnose {
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
        #[arg(long, requires = "r")]
        rho: Option<f64>,
        #[arg(long, requires = "rho")]
        r: Option<f64>,
    },
    /// Decompose a snapshot into modulated solitons plus remainder.
    Modulate {
        snapshot: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value = "full")]
        mode: Mode,
    },
    /// Discrete spectrum of a snapshot (p = 2 or 3).
    Scatter {
        snapshot: PathBuf,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Two-soliton overtaking collision.
    Collide {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 1.0)]
        c_slow: f64,
        #[arg(long, default_value_t = 4.0)]
        c_fast: f64,
        #[arg(long, default_value_t = 20.0)]
        t_final: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a canned scenario, or list them with --list.
    Scenario {
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        list: bool,
    },
    /// Write a scenario's config as a starting point.
    Init {
        path: PathBuf,
        #[arg(long, default_value = "soliton-sanity")]
        scenario: String,
    },
}

fn report(outcome: &RunOutcome) -> Result<i32> {
    let s = &outcome.summary;
    println!("experiment {} -> {}", s.name, outcome.dir.display());
    println!("status {} at t = {} ({} frames)", s.status, s.t_reached, s.frames);
    println!("mass drift {:e}, energy drift {:e}", s.mass_drift, s.energy_drift);
    if !s.speeds.is_empty() {
        println!("soliton  pre-speed  post-speed  change");
        for r in &s.speeds {
            println!("{:>7}  {:>9.6}  {:>10.6}  {:+.3e}", r.index, r.pre, r.post, r.change);
        }
    }
    for f in &s.failures {
        eprintln!("diagnostic failed: {f}");
    }
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    Ok(outcome.exit_code())
}

fn load(paths: &[PathBuf]) -> Result<Vec<Field>> {
    paths.iter().map(load_snapshot).collect()
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config } => report(&run_experiment(&ExperimentConfig::load(config)?)?),
        Command::Simulate { config } => {
            let mut cfg = ExperimentConfig::load(config)?;
            cfg.diagnostics.clear();
            cfg.snapshots = true;
            report(&run_experiment(&cfg)?)
        }
        Command::Diagnose { snapshots, rho, r } => {
            let fields = load(&snapshots)?;
            println!("path,t,mass,energy,h1_norm,h2_invariant,boundary_amplitude");
            for (path, u) in snapshots.iter().zip(&fields) {
                let h2 = spectral::h2_invariant(u).map_or(String::new(), |v| format!("{v:?}"));
                println!(
                    "{},{:?},{:?},{:?},{:?},{h2},{:?}",
                    path.display(),
                    u.t(),
                    spectral::mass(u),
                    spectral::energy(u),
                    spectral::sobolev_norm(u, 1.0)?,
                    spectral::boundary_amplitude(u, 0.05)
                );
            }
            if let (Some(rho), Some(r)) = (rho, r) {
                let traj = Trajectory::from_frames(fields)?;
                println!(
                    "# nondispersion(rho = {rho}, R = {r}) = {:e}",
                    nondispersion_profile(&traj, rho, r)?
                );
            }
            Ok(0)
        }
        Command::Modulate { snapshot, count, mode } => {
            let u = load_snapshot(snapshot)?;
            let guesses = guess_solitons(&u, count, 2.0);
            let mode = match mode {
                Mode::Full => ModulationMode::Full,
                Mode::Translations => ModulationMode::Translations,
            };
            let f = decompose(&u, mode, &guesses, &ModulationOptions::default())?;
            println!("i,c,center,sign");
            for i in 0..f.c.len() {
                println!("{},{:?},{:?},{}", i + 1, f.c[i], f.center[i], f.sign[i]);
            }
            println!(
                "# eps_l2 = {:e}, eps_h1 = {:e}, iterations = {}",
                f.eps_l2, f.eps_h1, f.iterations
            );
            Ok(0)
        }
        Command::Scatter { snapshot, points } => {
            let u = load_snapshot(snapshot)?;
            let opts = ScatteringOptions {
                points,
                ..Default::default()
            };
            let spec = match u.p().get() {
                2 => schrodinger_spectrum(&u, &opts)?,
                3 => zs_spectrum(&u, &opts)?,
                p => return Err(Error::WrongExponent { expected: 3, found: p }),
            };
            println!("re,im");
            for z in &spec.eigenvalues {
                println!("{:?},{:?}", z.re, z.im);
            }
            let speeds: Vec<f64> = spec.predicted_solitons.iter().map(|s| s.c).collect();
            println!("# predicted soliton speeds {speeds:?}");
            for b in &spec.predicted_breathers {
                println!("# predicted breather alpha = {}, beta = {}", b.alpha, b.beta);
            }
            println!(
                "# calibration factor {} ({:?})",
                spec.calibration.eigen_factor, spec.calibration.problem
            );
            println!("# generic = {} ({})", spec.generic, spec.reason);
            Ok(0)
        }
        Command::Collide {
            p,
            c_slow,
            c_fast,
            t_final,
            out,
        } => {
            let cfg =
                collision("collide", p, c_slow, c_fast, t_final, &out).map_err(|e| Error::Config(e.to_string()))?;
            report(&run_experiment(&cfg)?)
        }
        Command::Scenario { name, out, list } => {
            if list || name.is_none() {
                for (n, d) in SCENARIOS {
                    println!("{n:<20} {d}");
                }
                return Ok(if list { 0 } else { 2 });
            }
            let name = name.expect("checked above");
            let out = out.unwrap_or_else(|| PathBuf::from("out").join(&name));
            report(&run_experiment(&scenario(&name, &out)?)?)
        }
        Command::Init { path, scenario: name } => {
            let cfg = scenario(&name, &PathBuf::from("out").join(&name))?;
            std::fs::write(&path, cfg.to_toml()).map_err(|e| Error::Io {
                path: path.clone(),
                message: e.to_string(),
            })?;
            println!("wrote {}", path.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = match execute(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
