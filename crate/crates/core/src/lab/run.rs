//! Config-driven experiment pipeline: evolve, run the requested diagnostics, write artifacts.

use super::config::{DiagnosticSpec, ExperimentConfig, PartitionSource};
use super::output::{svg_plot, ArtifactWriter, Table};
use super::snapshot::save_snapshot;
use crate::diagnostics::{
    coercivity_study, fit_exponential_decay, fit_monotone_constant, fit_spatial_decay, monotonicity_report,
    nondispersion_profile, tail_mass, Partition, Side,
};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::modulation::{decompose, guess_solitons, track, ModulationFrame, ModulationMode, ModulationOptions};
use crate::scattering::{schrodinger_spectrum, zs_spectrum, ScatteringOptions};
use crate::solver::{evolve, EvolveOptions, Trajectory};
use serde::Serialize;
use std::path::PathBuf;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::Blowup { .. } => 3,
        Error::Domain(_) => 4,
        Error::Io { .. } | Error::Format(_) => 6,
        _ => 5,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    /// The evolution stopped early; artifacts cover the partial run.
    Truncated,
    /// The evolution completed but at least one diagnostic failed.
    DiagnosticFailure,
}

/// Speed and residual of one soliton before and after the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedRow {
    pub index: usize,
    pub pre: f64,
    pub post: f64,
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Summary {
    pub name: String,
    pub config_hash: String,
    pub status: String,
    pub t_reached: f64,
    pub frames: usize,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub h2_drift: Option<f64>,
    pub truncation: Option<String>,
    pub nondispersion: Option<f64>,
    pub pre_residual_l2: Option<f64>,
    pub post_residual_l2: Option<f64>,
    pub post_residual_h1: Option<f64>,
    pub theta_temporal: Option<f64>,
    pub theta_temporal_residual: Option<f64>,
    pub theta_spatial: Option<f64>,
    pub k1: Option<f64>,
    pub k1_all: Option<f64>,
    pub monotonicity_violations: Option<usize>,
    pub monotone_c1: Option<f64>,
    pub lambda0: Option<f64>,
    pub min_h: Option<f64>,
    pub calibration_factor: Option<f64>,
    pub calibration_potential_scale: Option<f64>,
    pub generic: Option<bool>,
    pub genericity_reason: Option<String>,
    pub predicted_speeds: Option<Vec<f64>>,
    pub predicted_breathers: Option<Vec<[f64; 2]>>,
    /// Where frame-to-frame tracking stopped, typically at a collision.
    pub tracking_stopped: Option<String>,
    pub speeds: Vec<SpeedRow>,
    pub failures: Vec<String>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub dir: PathBuf,
    pub summary: Summary,
    pub trajectory: Trajectory,
    /// Error deciding the exit code, if any.
    pub error: Option<Error>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(0, exit_code)
    }
}

/// Modulation results shared by the diagnostics that need centers.
struct Tracked {
    frames: Vec<ModulationFrame>,
    /// Decomposition of the final frame when tracking stopped before it.
    post: Option<ModulationFrame>,
    failure: Option<String>,
}

/// Validates, evolves and diagnoses. Only configuration and I/O errors are returned as `Err`;
/// truncation and diagnostic failures are reported in the outcome after all artifacts are written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let hash = cfg.hash();
    let mut w = ArtifactWriter::create(&cfg.output_dir, &hash)?;
    w.text("config.toml", &format!("# config_hash={hash}\n{}", cfg.to_toml()))?;
    let u0 = cfg
        .initial
        .realize(cfg.p, &cfg.grid)
        .map_err(|e| Error::Config(e.to_string()))?;
    if cfg.snapshots {
        save_snapshot(&u0, w.path("initial.gkdv"))?;
        w.record("initial.gkdv");
    }
    let opts = EvolveOptions {
        frame_stride: cfg.frame_stride,
        solver: cfg.solver.options(),
    };
    let traj = evolve(&u0, cfg.t_final, &opts, &mut [])?;
    if cfg.snapshots {
        save_snapshot(traj.last(), w.path("final.gkdv"))?;
        w.record("final.gkdv");
    }
    let mut summary = Summary {
        name: cfg.name.clone(),
        config_hash: hash,
        t_reached: traj.last().t(),
        frames: traj.len(),
        mass_drift: traj.mass_drift(),
        energy_drift: traj.energy_drift(),
        h2_drift: traj.h2_drift(),
        truncation: traj.truncation().map(|e| e.to_string()),
        ..Default::default()
    };
    let mut tables: Vec<(String, Table)> = Vec::new();
    let mut tracked: Option<Tracked> = None;
    let mut first_failure: Option<Error> = None;
    for d in &cfg.diagnostics {
        let r = run_diagnostic(cfg, d, &traj, &mut tracked, &mut summary, &mut tables);
        if let Err(e) = r {
            summary.failures.push(format!("{}: {e}", diagnostic_name(d)));
            first_failure.get_or_insert(e);
        }
    }
    for (name, t) in &tables {
        w.csv(&format!("{name}.csv"), t)?;
        if cfg.plots && t.rows.len() > 1 {
            w.text(&format!("{name}.svg"), &svg_plot(t, name))?;
        }
    }
    let (status, error) = match (traj.truncation(), first_failure) {
        (Some(e), _) => (RunStatus::Truncated, Some(e.clone())),
        (None, Some(e)) => (RunStatus::DiagnosticFailure, Some(e)),
        (None, None) => (RunStatus::Ok, None),
    };
    summary.status = match status {
        RunStatus::Ok => "ok",
        RunStatus::Truncated => "truncated",
        RunStatus::DiagnosticFailure => "diagnostic_failure",
    }
    .into();
    let text = toml::to_string(&summary).map_err(|e| Error::Format(e.to_string()))?;
    w.text("summary.toml", &text)?;
    let note = summary.truncation.clone().or_else(|| summary.failures.first().cloned());
    w.manifest(&summary.status, note.as_deref())?;
    Ok(RunOutcome {
        status,
        dir: w.dir().to_path_buf(),
        summary,
        trajectory: traj,
        error,
    })
}

fn diagnostic_name(d: &DiagnosticSpec) -> &'static str {
    match d {
        DiagnosticSpec::Conservation => "conservation",
        DiagnosticSpec::Nondispersion { .. } => "nondispersion",
        DiagnosticSpec::Modulation { .. } => "modulation",
        DiagnosticSpec::Monotonicity { .. } => "monotonicity",
        DiagnosticSpec::MonotoneFunctional { .. } => "monotone_functional",
        DiagnosticSpec::Decay { .. } => "decay",
        DiagnosticSpec::Scattering { .. } => "scattering",
        DiagnosticSpec::Coercivity { .. } => "coercivity",
    }
}

fn numbered(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}_{i}"))
}

fn run_diagnostic(
    cfg: &ExperimentConfig,
    d: &DiagnosticSpec,
    traj: &Trajectory,
    tracked: &mut Option<Tracked>,
    summary: &mut Summary,
    tables: &mut Vec<(String, Table)>,
) -> Result<()> {
    match d {
        DiagnosticSpec::Conservation => {
            let has_h2 = cfg.p.get() == 2;
            let mut cols = vec!["t", "mass", "energy"];
            if has_h2 {
                cols.push("h2_invariant");
            }
            cols.push("boundary_amplitude");
            let mut t = Table::new(cols);
            for (f, r) in traj.frames().iter().zip(traj.records()) {
                let mut row = vec![f.t(), r.mass, r.energy];
                if has_h2 {
                    row.push(r.h2_invariant.unwrap_or(f64::NAN));
                }
                row.push(r.boundary_amplitude);
                t.push(row);
            }
            tables.push(("conservation".into(), t));
        }
        DiagnosticSpec::Nondispersion { rho, r } => {
            let mut t = Table::new(["t", "tail_mass"]);
            for f in traj.frames() {
                t.push(vec![f.t(), tail_mass(f, rho * f.t() - r)?]);
            }
            summary.nondispersion = Some(nondispersion_profile(traj, *rho, *r)?);
            tables.push(("nondispersion".into(), t));
        }
        DiagnosticSpec::Modulation { mode, count } => {
            let t = modulate(cfg, traj, *mode, *count, summary)?;
            let n = t.frames.first().map_or(0, |f| f.c.len());
            let mut cols: Vec<String> = vec!["t".into()];
            cols.extend(numbered("c", n));
            cols.extend(numbered("x", n));
            cols.extend(["eps_l2".into(), "eps_h1".into()]);
            let mut table = Table::new(cols);
            for f in t.frames.iter().chain(t.post.iter()) {
                let mut row = vec![f.t];
                row.extend(&f.c);
                row.extend(&f.center);
                row.extend([f.eps_l2, f.eps_h1]);
                table.push(row);
            }
            tables.push(("modulation".into(), table));
            let failure = t.failure.clone();
            *tracked = Some(t);
            summary.tracking_stopped = failure;
        }
        DiagnosticSpec::Monotonicity {
            kappa,
            nu,
            c1,
            partition,
        } => {
            let parts: Vec<Partition> = match partition {
                PartitionSource::Tracked => {
                    let t = tracked
                        .as_ref()
                        .ok_or_else(|| Error::Diagnostic("monotonicity needs a modulation track".into()))?;
                    if t.frames.len() != traj.len() {
                        return Err(Error::Diagnostic(format!(
                            "modulation track covers {} of {} frames",
                            t.frames.len(),
                            traj.len()
                        )));
                    }
                    t.frames
                        .iter()
                        .map(|f| Partition::from_centers(*nu, &f.center))
                        .collect::<Result<_>>()?
                }
                PartitionSource::Ballistic => {
                    let sol = cfg.initial.solitons();
                    traj.frames()
                        .iter()
                        .map(|f| {
                            let centers: Vec<f64> = sol.iter().map(|s| s.center(f.t())).collect();
                            Partition::from_centers(*nu, &centers)
                        })
                        .collect::<Result<_>>()?
                }
            };
            let rep = monotonicity_report(traj, &parts, *kappa, *nu, *c1)?;
            let n = parts[0].len();
            let mut cols: Vec<String> = vec!["t".into()];
            cols.extend(numbered("mass", n));
            cols.extend(numbered("energy", n));
            let mut table = Table::new(cols);
            for (k, &t) in rep.times.iter().enumerate() {
                let mut row = vec![t];
                row.extend(&rep.masses[k]);
                row.extend(&rep.energies[k]);
                table.push(row);
            }
            tables.push(("monotonicity".into(), table));
            summary.k1 = Some(rep.k1);
            summary.k1_all = Some(rep.k1_all);
            summary.monotonicity_violations = Some(rep.violations.len());
            if rep.flagged() {
                return Err(Error::Diagnostic(format!(
                    "{} localized deficits exceed the fitted allowance",
                    rep.violations.len()
                )));
            }
        }
        DiagnosticSpec::MonotoneFunctional {
            kappa,
            f_slope,
            m_slope,
            x0,
        } => {
            let m = *m_slope;
            let mtilde = move |t: f64| m * t;
            let fit = fit_monotone_constant(traj, x0, *kappa, *f_slope, &mtilde)?;
            let t0 = traj.first().t();
            let mut cols: Vec<String> = vec!["t".into()];
            cols.extend(x0.iter().map(|x| format!("i_x0={x}")));
            let mut table = Table::new(cols);
            let series: Vec<Vec<(f64, f64)>> = x0
                .iter()
                .map(|&x| crate::diagnostics::monotone_functional(traj, t0, x, *kappa, *f_slope, &mtilde))
                .collect::<Result<_>>()?;
            for k in 0..series[0].len() {
                let mut row = vec![series[0][k].0];
                row.extend(series.iter().map(|s| s[k].1));
                table.push(row);
            }
            tables.push(("monotone_functional".into(), table));
            summary.monotone_c1 = Some(fit.c1);
        }
        DiagnosticSpec::Decay { s } => {
            let t = tracked
                .as_ref()
                .ok_or_else(|| Error::Diagnostic("decay needs a modulation track".into()))?;
            let series: Vec<(f64, f64)> = t.frames.iter().map(|f| (f.t, f.eps_h1)).collect();
            let mut table = Table::new(["t", "eps_h1"]);
            for &(a, b) in &series {
                table.push(vec![a, b]);
            }
            tables.push(("decay".into(), table));
            let last = t
                .post
                .as_ref()
                .or(t.frames.last())
                .ok_or_else(|| Error::Diagnostic("empty track".into()))?;
            let frame = traj
                .frames()
                .iter()
                .find(|f| f.t() == last.t)
                .ok_or_else(|| Error::Diagnostic("tracked frame missing".into()))?;
            let spatial = fit_spatial_decay(frame, *s, &last.center, Side::Right)?;
            summary.theta_spatial = Some(spatial.rate);
            let fit = fit_exponential_decay(&series)?;
            summary.theta_temporal = Some(fit.rate);
            summary.theta_temporal_residual = Some(fit.residual);
        }
        DiagnosticSpec::Scattering { points } => {
            let opts = ScatteringOptions {
                points: *points,
                ..Default::default()
            };
            let spec = match cfg.p.get() {
                2 => schrodinger_spectrum(traj.first(), &opts)?,
                _ => zs_spectrum(traj.first(), &opts)?,
            };
            let mut table = Table::new(["re", "im"]);
            for z in &spec.eigenvalues {
                table.push(vec![z.re, z.im]);
            }
            tables.push(("scattering".into(), table));
            summary.calibration_factor = Some(spec.calibration.eigen_factor);
            summary.calibration_potential_scale = Some(spec.calibration.potential_scale);
            summary.generic = Some(spec.generic);
            summary.genericity_reason = Some(spec.reason.clone());
            summary.predicted_speeds = Some(spec.predicted_solitons.iter().map(|s| s.c).collect());
            summary.predicted_breathers = Some(spec.predicted_breathers.iter().map(|b| [b.alpha, b.beta]).collect());
        }
        DiagnosticSpec::Coercivity {
            nu,
            samples,
            h1_size,
            seed,
        } => {
            let sol: Vec<(f64, f64)> = cfg.initial.solitons().iter().map(|s| (s.c, s.x0)).collect();
            let rep = coercivity_study(cfg.p, &cfg.grid, &sol, *nu, *samples, *h1_size, *seed)?;
            let mut table = Table::new(["sample", "h1_sq", "h", "proj_sq"]);
            for (k, s) in rep.samples.iter().enumerate() {
                table.push(vec![k as f64, s.h1_sq, s.h, s.proj_sq]);
            }
            tables.push(("coercivity".into(), table));
            summary.lambda0 = rep.lambda0;
            summary.min_h = Some(rep.min_h);
            if rep.lambda0.is_none() {
                return Err(Error::Diagnostic(
                    "no λ₀ on the search grid satisfies every sample".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Tracks the solitons; when tracking stops (a collision), the final frame is decomposed afresh
/// from its peaks so pre- and post-run speeds can be compared.
fn modulate(
    cfg: &ExperimentConfig,
    traj: &Trajectory,
    mode: ModulationMode,
    count: Option<usize>,
    summary: &mut Summary,
) -> Result<Tracked> {
    let sol = cfg.initial.solitons();
    let count = count.unwrap_or(sol.len());
    let options = ModulationOptions::default();
    let first = traj.first();
    let guesses: Vec<(f64, f64)> = if sol.len() == count {
        let mut g: Vec<(f64, f64)> = sol.iter().map(|s| (s.c, s.x0)).collect();
        g.sort_by(|a, b| a.1.total_cmp(&b.1));
        g
    } else {
        peak_guesses(first, count)
    };
    let tr = track(traj, mode, &guesses, &options);
    let pre = tr.frames.first().cloned().ok_or_else(|| {
        tr.failure
            .as_ref()
            .map_or(Error::Diagnostic("no frames".into()), |f| f.1.clone())
    })?;
    let mut post = None;
    let last_t = traj.last().t();
    let covered = tr.frames.last().is_some_and(|f| f.t == last_t);
    if !covered {
        let g = peak_guesses(traj.last(), count);
        let g: Vec<(f64, f64)> = match mode {
            ModulationMode::Full => g,
            ModulationMode::Translations => {
                let mut c: Vec<f64> = guesses.iter().map(|g| g.0).collect();
                c.sort_by(f64::total_cmp);
                c.into_iter().zip(g.iter().map(|g| g.1)).collect()
            }
        };
        post = Some(decompose(traj.last(), mode, &g, &options)?);
    }
    let end = post.as_ref().or(tr.frames.last()).expect("pre exists");
    let mut pre_c = pre.c.clone();
    let mut post_c = end.c.clone();
    pre_c.sort_by(f64::total_cmp);
    post_c.sort_by(f64::total_cmp);
    summary.speeds = pre_c
        .iter()
        .zip(&post_c)
        .enumerate()
        .map(|(i, (&a, &b))| SpeedRow {
            index: i + 1,
            pre: a,
            post: b,
            change: b - a,
        })
        .collect();
    summary.pre_residual_l2 = Some(pre.eps_l2);
    summary.post_residual_l2 = Some(end.eps_l2);
    summary.post_residual_h1 = Some(end.eps_h1);
    Ok(Tracked {
        frames: tr.frames,
        post,
        failure: tr.failure.map(|(t, e)| format!("t = {t}: {e}")),
    })
}

fn peak_guesses(u: &Field, count: usize) -> Vec<(f64, f64)> {
    guess_solitons(u, count, 2.0)
}
