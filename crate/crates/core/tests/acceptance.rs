//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//!
//! Runs without the test harness so the lines always print. A FAIL is reported, not hidden;
//! set GKDV_ACCEPTANCE_STRICT=1 to turn any FAIL into a nonzero exit.

mod common;

use common::oracle::q_c_sech;
use common::soliton_error;
use gkdv::diagnostics::{
    coercivity_study, fit_monotone_constant, fit_spatial_decay, monotone_functional, monotonicity_report, tail_mass,
    weinstein_f, MonotonicityReport, Partition, Side,
};
use gkdv::lab::{run_experiment, scenario, RunOutcome};
use gkdv::modulation::{track, ModulationMode, ModulationOptions};
use gkdv::profiles::{breather, soliton_profile, BreatherParams, InitialData, SolitonParams, SuperposeOptions};
use gkdv::scattering::{
    genericity_check, schrodinger_spectrum, zs_spectrum, Calibration, Problem, ScatteringOptions, SpectrumResult,
};
use gkdv::solver::{evolve, EvolveOptions};
use gkdv::spectral::{energy, h2_invariant, mass};
use gkdv::{Exponent, Field, GridSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

const CONSERVATION_TOL: f64 = 1e-8;
const H2_TOL: f64 = 1e-6;
const SHIFT_DISTANCE_TOL: f64 = 1e-6;
const SLOPE_TOL: f64 = 1e-4;
const ORDER_RATIO: (f64, f64) = (12.0, 20.0);
const SPECTRAL_GAIN: f64 = 100.0;
const ELASTIC_SPEED_TOL: f64 = 1e-3;
const ELASTIC_RESIDUAL_TOL: f64 = 1e-4;
const INELASTIC_FACTOR: f64 = 10.0;
const NONDISPERSION_TOL: f64 = 1e-6;
const DISPERSION_FLOOR: f64 = 1e-2;
const SPATIAL_RATE_TOL: f64 = 0.02;
const TEMPORAL_RESIDUAL_TOL: f64 = 0.1;
const LAMBDA0_MAX: f64 = 100.0;
const COERCIVITY_SAMPLES: usize = 100;
const COERCIVITY_H1: f64 = 1e-2;
const ABEL_TOL: f64 = 1e-10;
const ANCHOR_TOL: f64 = 1e-3;
const PAIR_SPEED_TOL: f64 = 1e-2;

struct Verdict {
    pass: bool,
    line: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, line: String) -> Self {
        Verdict {
            pass,
            line,
            notes: Vec::new(),
        }
    }

    fn note(mut self, s: String) -> Self {
        self.notes.push(s);
        self
    }
}

fn ex(p: u32) -> Exponent {
    Exponent::new(p).unwrap()
}

fn run(name: &str, root: &Path) -> RunOutcome {
    run_experiment(&scenario(name, &root.join(name)).unwrap()).unwrap()
}

fn rel(drift: f64, base: f64) -> f64 {
    drift / base.abs()
}

fn conservation(sanity: &RunOutcome) -> Verdict {
    let u0 = sanity.trajectory.first();
    let traj = &sanity.trajectory;
    let m = rel(traj.mass_drift(), mass(u0));
    let e = rel(traj.energy_drift(), energy(u0));
    let h = rel(traj.h2_drift().unwrap(), h2_invariant(u0).unwrap());
    let pass = !traj.is_truncated() && m <= CONSERVATION_TOL && e <= CONSERVATION_TOL && h <= H2_TOL;
    Verdict::new(
        pass,
        format!(
            "conservation: relative drift mass {m:.2e}, energy {e:.2e} (≤ {CONSERVATION_TOL:e}), H2 {h:.2e} (≤ {H2_TOL:e}) over T = {}",
            traj.last().t()
        ),
    )
}

/// min over a of ‖u − Q(· − a)‖_{L²} by golden-section search around `guess`.
fn shift_distance(u: &Field, guess: f64) -> (f64, f64) {
    let xs = u.grid().xs();
    let dx = u.grid().dx();
    let d = |a: f64| -> f64 {
        (dx * u
            .values()
            .iter()
            .zip(&xs)
            .map(|(v, &x)| (v - q_c_sech(2, 1.0, x - a)).powi(2))
            .sum::<f64>())
        .sqrt()
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (guess - 1.0, guess + 1.0);
    while hi - lo > 1e-10 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if d(a) < d(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let a = 0.5 * (lo + hi);
    (a, d(a))
}

fn traveling_wave(sanity: &RunOutcome) -> Verdict {
    let traj = &sanity.trajectory;
    let u = traj.last();
    let x0 = -10.0;
    let (a, dist) = shift_distance(u, x0 + u.t());
    let tr = track(traj, ModulationMode::Full, &[(1.0, x0)], &ModulationOptions::default());
    let slope = if tr.is_truncated() {
        f64::NAN
    } else {
        tr.center_slopes()[0]
    };
    let pass = dist <= SHIFT_DISTANCE_TOL && (slope - 1.0).abs() <= SLOPE_TOL;
    Verdict::new(
        pass,
        format!(
            "traveling wave: min-over-shift L2 distance {dist:.2e} at a = {a:.6} (≤ {SHIFT_DISTANCE_TOL:e}); tracked slope {slope:.8} (1 ± {SLOPE_TOL:e})"
        ),
    )
}

fn order() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    // KdV from dt = 0.02; the cubic case leaves its pre-asymptotic range near dt = 5e-3.
    for &(p, n, dt0) in &[(2u32, 256usize, 0.02), (3, 512, 0.005)] {
        let errs: Vec<f64> = (0..4)
            .map(|k| soliton_error(p, 1.0, 0.0, 64.0, n, dt0 / (1 << k) as f64, 2.0))
            .collect();
        let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
        pass &= ratios.iter().all(|r| (ORDER_RATIO.0..=ORDER_RATIO.1).contains(r));
        parts.push(format!("p = {p} dt-halving ratios {}", fmt_list(&ratios, 2)));
    }
    let errs: Vec<f64> = [64usize, 128, 256]
        .iter()
        .map(|&n| soliton_error(2, 1.0, 0.0, 64.0, n, 1e-3, 0.5))
        .collect();
    let gains: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    pass &= gains.iter().all(|&g| g >= SPECTRAL_GAIN);
    parts.push(format!(
        "N = 64→128→256 gains {} (≥ {SPECTRAL_GAIN})",
        fmt_list(&gains, 0)
    ));
    Verdict::new(
        pass,
        format!(
            "order: {} in [{}, {}]; {}",
            parts[0],
            ORDER_RATIO.0,
            ORDER_RATIO.1,
            parts[1..].join("; ")
        ),
    )
}

fn fmt_list(v: &[f64], digits: usize) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.digits$}")).collect();
    format!("[{}]", items.join(", "))
}

fn elasticity(kdv: &RunOutcome, quartic: &RunOutcome) -> Verdict {
    let s = &kdv.summary;
    let q = &quartic.summary;
    let worst = s.speeds.iter().map(|r| r.change.abs()).fold(0.0, f64::max);
    let res2 = s.post_residual_l2.unwrap_or(f64::NAN);
    let res4 = q.post_residual_l2.unwrap_or(f64::NAN);
    let complete = !kdv.trajectory.is_truncated() && s.speeds.len() == 2 && q.speeds.len() == 2;
    let pass =
        complete && worst <= ELASTIC_SPEED_TOL && res2 <= ELASTIC_RESIDUAL_TOL && res4 >= INELASTIC_FACTOR * res2;
    let q_changes: Vec<f64> = q.speeds.iter().map(|r| r.change).collect();
    Verdict::new(
        pass,
        format!(
            "elastic vs inelastic: KdV max speed change {worst:.2e} (≤ {ELASTIC_SPEED_TOL:e}), residual {res2:.2e} (≤ {ELASTIC_RESIDUAL_TOL:e}); quartic residual {res4:.2e} = {:.1e}× KdV (≥ {INELASTIC_FACTOR})",
            res4 / res2
        ),
    )
    .note(format!("quartic speed changes {}", fmt_list(&q_changes, 4)))
}

fn monotonicity_run(p: u32, dt: f64) -> MonotonicityReport {
    let g = GridSpec::new(256.0, 2048, dt).unwrap();
    let u0 = InitialData::Superposition {
        solitons: vec![SolitonParams::new(1.0, -20.0), SolitonParams::new(4.0, 20.0)],
        options: SuperposeOptions::default(),
    }
    .realize(ex(p), &g)
    .unwrap();
    let stride = (0.25 / dt).round() as usize;
    let traj = evolve(
        &u0,
        10.0,
        &EvolveOptions {
            frame_stride: stride,
            ..Default::default()
        },
        &mut [],
    )
    .unwrap()
    .check()
    .unwrap();
    let tr = track(
        &traj,
        ModulationMode::Full,
        &[(1.0, -20.0), (4.0, 20.0)],
        &ModulationOptions::default(),
    );
    assert!(!tr.is_truncated(), "tracking failed: {:?}", tr.failure);
    let nu = 0.5;
    let parts: Vec<Partition> = tr
        .frames
        .iter()
        .map(|f| Partition::from_centers(nu, &f.center).unwrap())
        .collect();
    monotonicity_report(&traj, &parts, 0.1, nu, 1.0).unwrap()
}

fn monotonicity(reports: &[(u32, MonotonicityReport)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut notes = Vec::new();
    for (p, r) in reports {
        pass &= r.violations.is_empty() && r.k1.is_finite();
        parts.push(format!("p = {p}: {} violations, K1 = {:.3e}", r.violations.len(), r.k1));
        notes.push(format!(
            "p = {p}: raw max deficits M {:.2e}, E {:.2e} against floors {:.2e}, {:.2e} (10× drift); deficits beyond the floor decay within K1·e^(-{:.4}t) and are checked after t = {}",
            r.max_mass_deficit, r.max_energy_deficit, r.mass_floor, r.energy_floor, r.rate, r.fit_until
        ));
    }
    let mut v = Verdict::new(
        pass,
        format!(
            "monotonicity: no deficit beyond K1·e^(-ν^1.5 t/4) + 10× conservation drift; {}",
            parts.join("; ")
        ),
    );
    v.notes = notes;
    v
}

fn monotone_i(sanity: &RunOutcome) -> Verdict {
    let traj = &sanity.trajectory;
    // η = half the slope gap c - m̃' for c = 1, m̃' = 0.5; κ = √(η/2) and f' = m̃' - η.
    let eta: f64 = 0.5 * (1.0 - 0.5);
    let (kappa, f_slope) = ((0.5 * eta).sqrt(), 0.5 - eta);
    let x0s = [-40.0, -20.0, 0.0];
    let m = |t: f64| 0.5 * t;
    let fit = fit_monotone_constant(traj, &x0s, kappa, f_slope, &m).unwrap();
    // Every sampled pair is re-evaluated against the one constant.
    let mut pairs = 0;
    let mut held = true;
    for &x0 in &x0s {
        let bound = fit.c1 * (kappa * x0).exp();
        for f in traj.frames() {
            let series = monotone_functional(traj, f.t(), x0, kappa, f_slope, &m).unwrap();
            for &(_, it) in &series[1..] {
                pairs += 1;
                held &= series[0].1 <= it + bound * (1.0 + 1e-12);
            }
        }
    }
    let scaled: Vec<f64> = fit.per_x0.iter().map(|r| r.2).collect();
    Verdict::new(
        held && fit.c1.is_finite(),
        format!(
            "monotone functional: C1 = {:.3e} covers all {pairs} pairs over x0 ∈ {{-40, -20, 0}}",
            fit.c1
        ),
    )
    .note(format!("max deficit·e^(-κx0) per x0: {}", fmt_list(&scaled, 3)))
}

fn nondispersion(kdv: &RunOutcome, gaussian: &RunOutcome) -> Verdict {
    let eps = kdv.summary.nondispersion.unwrap_or(f64::NAN);
    let last = gaussian.trajectory.last();
    let left = tail_mass(last, 0.5 * last.t() - 30.0).unwrap();
    let equal_mass = (mass(gaussian.trajectory.first()) - mass(kdv.trajectory.first())).abs();
    let pass = eps <= NONDISPERSION_TOL && left >= DISPERSION_FLOOR && last.t() == 20.0;
    Verdict::new(
        pass,
        format!(
            "non-dispersion: 2-soliton profile {eps:.2e} (≤ {NONDISPERSION_TOL:e}); Gaussian mass left of ρt − R at T = {} is {left:.3} (≥ {DISPERSION_FLOOR:e})",
            last.t()
        ),
    )
    .note(format!("mass difference of the two data {equal_mass:.1e}"))
}

fn decay(multi: &RunOutcome) -> Verdict {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for p in [2, 3, 4] {
        for c in [0.5, 1.0, 4.0] {
            let g = GridSpec::new(128.0, 2048, 1e-3).unwrap();
            let u = Field::from_fn(g, ex(p), 0.0, |x| soliton_profile(ex(p), c, x).unwrap()).unwrap();
            for side in [Side::Left, Side::Right] {
                let fit = fit_spatial_decay(&u, 0, &[0.0], side).unwrap();
                let err = (fit.rate / c.sqrt() - 1.0).abs();
                worst = worst.max(err);
                pass &= err <= SPATIAL_RATE_TOL;
            }
        }
    }
    let s = &multi.summary;
    let theta = s.theta_temporal.unwrap_or(f64::NAN);
    let resid = s.theta_temporal_residual.unwrap_or(f64::NAN);
    pass &= theta > 0.0 && resid < TEMPORAL_RESIDUAL_TOL;
    Verdict::new(
        pass,
        format!(
            "decay fits: spatial rate worst relative error {worst:.2e} vs √c (≤ {SPATIAL_RATE_TOL}); temporal rate {theta:.4} (> 0) with log-residual {resid:.4} (< {TEMPORAL_RESIDUAL_TOL})"
        ),
    )
    .note("the temporal fit runs on superposed data, which sheds radiation whose H1 norm does not decay".into())
}

fn coercivity() -> Verdict {
    let g = GridSpec::new(256.0, 2048, 1e-3).unwrap();
    let sol = [(1.0, -20.0), (4.0, 20.0)];
    let nu = 0.5;
    let rep = coercivity_study(ex(2), &g, &sol, nu, COERCIVITY_SAMPLES, COERCIVITY_H1, 7).unwrap();
    let lambda0 = rep.lambda0.unwrap_or(f64::INFINITY);
    let mut notes = Vec::new();
    for seed in [1u64, 42] {
        let r = coercivity_study(ex(2), &g, &sol, nu, COERCIVITY_SAMPLES, COERCIVITY_H1, seed).unwrap();
        notes.push(format!(
            "seed {seed}: λ0 {:?}, min H {:.2e} (not part of the verdict)",
            r.lambda0, r.min_h
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let part = Partition::from_centers(0.8, &[-20.0, 20.0]).unwrap();
    let mut worst_gap: f64 = 0.0;
    for _ in 0..100 {
        let bumps: Vec<(f64, f64, f64, f64)> = (0..6)
            .map(|_| {
                (
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-60.0..60.0),
                    rng.random_range(0.7..5.0),
                    rng.random_range(0.0..3.0),
                )
            })
            .collect();
        let u = Field::from_fn(g, ex(2), 0.0, |x| {
            bumps
                .iter()
                .map(|&(a, b, w, k)| a * (-((x - b) / w).powi(2)).exp() * (k * x).cos())
                .sum::<f64>()
        })
        .unwrap();
        worst_gap = worst_gap.max(weinstein_f(&u, &sol, &part, 0.1).unwrap().relative_gap());
    }
    let pass = lambda0 <= LAMBDA0_MAX && rep.samples.len() >= COERCIVITY_SAMPLES && worst_gap <= ABEL_TOL;
    let mut v = Verdict::new(
        pass,
        format!(
            "coercivity: λ0 = {lambda0:.3e} (≤ {LAMBDA0_MAX}) over {} samples at ‖ε‖_H1 = {COERCIVITY_H1:e}, seed 7; Abel identity worst relative gap {worst_gap:.2e} (≤ {ABEL_TOL:e}) on 100 random fields",
            rep.samples.len()
        ),
    );
    v.notes = notes;
    v
}

fn soliton_sum(p: u32, list: &[(f64, f64)], length: f64, n: usize) -> Field {
    let g = GridSpec::new(length, n, 1e-3).unwrap();
    Field::from_fn(g, ex(p), 0.0, |x| {
        list.iter()
            .map(|&(c, x0)| soliton_profile(ex(p), c, x - x0).unwrap())
            .sum()
    })
    .unwrap()
}

fn speeds(s: &SpectrumResult) -> Vec<f64> {
    s.predicted_solitons.iter().map(|p| p.c).collect()
}

fn scattering() -> Verdict {
    let opts = ScatteringOptions::default();
    let mut pass = true;

    let g = GridSpec::new(40.0, 128, 1e-3).unwrap();
    let zero_ok = [2, 3].iter().all(|&p| {
        let z = Field::zeros(g, ex(p), 0.0).unwrap();
        let s = if p == 2 {
            schrodinger_spectrum(&z, &opts)
        } else {
            zs_spectrum(&z, &opts)
        }
        .unwrap();
        s.eigenvalues.is_empty()
    });
    pass &= zero_ok;

    let mut anchor_err: f64 = 0.0;
    for c in [0.5, 1.0, 2.0, 4.0] {
        let u = soliton_sum(2, &[(c, 0.0)], 64.0, 256);
        let s = schrodinger_spectrum(&u, &opts).unwrap();
        anchor_err = anchor_err.max(if s.predicted_solitons.len() == 1 {
            (speeds(&s)[0] - c).abs()
        } else {
            f64::INFINITY
        });
        let u = soliton_sum(3, &[(c, 0.0)], 64.0, 256);
        let s = zs_spectrum(&u, &opts).unwrap();
        anchor_err = anchor_err.max(if s.predicted_solitons.len() == 1 {
            (speeds(&s)[0] - c).abs()
        } else {
            f64::INFINITY
        });
    }
    pass &= anchor_err <= ANCHOR_TOL;

    let kdv = speeds(&schrodinger_spectrum(&soliton_sum(2, &[(1.0, -20.0), (4.0, 20.0)], 96.0, 512), &opts).unwrap());
    let mkdv = speeds(&zs_spectrum(&soliton_sum(3, &[(1.0, -15.0), (2.0, 15.0)], 96.0, 512), &opts).unwrap());
    let pair_err = |got: &[f64], want: &[f64]| -> f64 {
        if got.len() != want.len() {
            return f64::INFINITY;
        }
        got.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let pair = pair_err(&kdv, &[1.0, 4.0]).max(pair_err(&mkdv, &[1.0, 2.0]));
    pass &= pair <= PAIR_SPEED_TOL;

    let b = BreatherParams::new(0.6, 1.0, 0.0, 0.0).unwrap();
    let g = GridSpec::new(48.0, 512, 2.5e-4).unwrap();
    let u = Field::from_fn(g, ex(3), 0.0, |x| breather(&b, 0.0, x).unwrap()).unwrap();
    let s = zs_spectrum(&u, &opts).unwrap();
    let pair_found = s.eigenvalues.len() == 2 && s.predicted_breathers.len() == 1 && s.predicted_solitons.is_empty();
    let generic = genericity_check(&s).0;
    pass &= pair_found && generic;

    // Soliton speed equal to the envelope velocity β² − 3α² of a breather.
    let hb = BreatherParams::new(0.3, 1.0, 0.0, 0.0).unwrap();
    let coincide = SpectrumResult {
        problem: Problem::ZakharovShabat,
        eigenvalues: vec![
            Complex64::new(0.0, (0.5 * hb.gamma()).sqrt()),
            Complex64::new(0.3, 1.0),
            Complex64::new(-0.3, 1.0),
        ],
        predicted_solitons: vec![SolitonParams::new(hb.gamma(), 0.0)],
        predicted_breathers: vec![hb],
        generic: true,
        reason: String::new(),
        calibration: Calibration::zakharov_shabat(),
        points: 0,
        refinement_shift: None,
    };
    let (coincide_generic, reason) = genericity_check(&coincide);
    pass &= !coincide_generic;

    Verdict::new(
        pass,
        format!(
            "scattering: zero data empty {zero_ok}; anchors worst speed error {anchor_err:.2e} (≤ {ANCHOR_TOL:e}); 2-soliton worst speed error {pair:.2e} (≤ {PAIR_SPEED_TOL:e}); breather pair {pair_found}, generic {generic}; coincidence generic {coincide_generic}"
        ),
    )
    .note(format!("breather data {:?}; coincidence reason: {reason}", s.eigenvalues))
}

fn main() {
    let root = tempfile::tempdir().unwrap();
    let root = root.path();
    let verdicts = std::thread::scope(|sc| {
        let quartic = sc.spawn(|| run("quartic-collision", root));
        let mono3 = sc.spawn(|| monotonicity_run(3, 2.5e-4));
        let mono2 = sc.spawn(|| monotonicity_run(2, 1e-3));
        let kdv = sc.spawn(|| run("kdv-collision", root));
        let gaussian = sc.spawn(|| run("gaussian-dispersion", root));
        let multi = sc.spawn(|| run("multisoliton-decay", root));
        let sanity = sc.spawn(|| run("soliton-sanity", root));
        let order = sc.spawn(order);
        let coercivity = sc.spawn(coercivity);
        let scattering = sc.spawn(scattering);

        let sanity = sanity.join().unwrap();
        let kdv = kdv.join().unwrap();
        let quartic = quartic.join().unwrap();
        let gaussian = gaussian.join().unwrap();
        let multi = multi.join().unwrap();
        let reports = vec![(2, mono2.join().unwrap()), (3, mono3.join().unwrap())];
        vec![
            conservation(&sanity),
            traveling_wave(&sanity),
            order.join().unwrap(),
            elasticity(&kdv, &quartic),
            monotonicity(&reports),
            monotone_i(&sanity),
            nondispersion(&kdv, &gaussian),
            decay(&multi),
            coercivity.join().unwrap(),
            scattering.join().unwrap(),
        ]
    });
    let passed = verdicts.iter().filter(|v| v.pass).count();
    for (i, v) in verdicts.iter().enumerate() {
        println!("{} [{}] {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.line);
        for n in &v.notes {
            println!("       {n}");
        }
    }
    println!("acceptance: {passed}/{} criteria pass", verdicts.len());
    if passed < verdicts.len() && std::env::var("GKDV_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
