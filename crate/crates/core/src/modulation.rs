//! Decomposition u = Σ R̃_i + ε with ε orthogonal to prescribed directions, and tracking of
//! the fitted speeds and centers along a trajectory.

use crate::error::{Error, Result};
use crate::field::{Exponent, Field};
use crate::profiles::{ground_state, soliton_profile, soliton_profile_derivative};
use crate::solver::Trajectory;
use crate::spectral;
use faer::linalg::solvers::Solve;
use faer::{Col, Mat};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulationMode {
    /// Centers only, speeds held fixed: ∫ε∂ₓR̃_i = 0.
    Translations,
    /// Speeds and centers: ∫ε∂ₓR̃_i = 0 and ∫εR̃_i = 0 (∫εR̃_i³ = 0 when p = 5).
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationOptions {
    /// Residual tolerance relative to ‖u‖_{L²}·‖direction‖_{L²}.
    pub tol_factor: f64,
    pub max_iter: usize,
    /// Minimum gap between guessed centers; default 2/√c_min.
    pub min_separation: Option<f64>,
    /// Largest admissible ‖u − Σ profiles at the guesses‖_{H¹}; default half the smallest ‖Q_{c_i}‖_{H¹}.
    pub closeness_cap: Option<f64>,
    /// Speeds closer than this are refused.
    pub min_speed_gap: f64,
    /// Rate ν of the localized ε norms stored per frame; default the smallest speed.
    pub nu: Option<f64>,
}

impl Default for ModulationOptions {
    fn default() -> Self {
        ModulationOptions {
            tol_factor: 1e-10,
            max_iter: 50,
            min_separation: None,
            closeness_cap: None,
            min_speed_gap: 1e-3,
            nu: None,
        }
    }
}

/// Result of one decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationFrame {
    pub t: f64,
    pub c: Vec<f64>,
    pub center: Vec<f64>,
    pub sign: Vec<i8>,
    pub eps_l2: f64,
    pub eps_h1: f64,
    pub ortho_residuals: Vec<f64>,
    /// (∫ε²e^{−√ν|x−x_i|})^{1/2} per soliton.
    pub eps_local: Vec<f64>,
    pub iterations: usize,
}

struct Problem<'a> {
    u: &'a Field,
    xs: Vec<f64>,
    signs: Vec<i8>,
    mode: ModulationMode,
    fixed_c: Vec<f64>,
    n: usize,
}

impl Problem<'_> {
    fn p(&self) -> Exponent {
        self.u.p()
    }

    fn unpack(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match self.mode {
            ModulationMode::Translations => (self.fixed_c.clone(), theta.to_vec()),
            ModulationMode::Full => (theta[..self.n].to_vec(), theta[self.n..].to_vec()),
        }
    }

    fn eps(&self, c: &[f64], x: &[f64]) -> Vec<f64> {
        let p = self.p();
        let mut e = self.u.values().to_vec();
        for i in 0..self.n {
            let s = self.signs[i] as f64;
            for (ej, &xj) in e.iter_mut().zip(&self.xs) {
                *ej -= s * soliton_profile(p, c[i], xj - x[i]).unwrap_or(0.0);
            }
        }
        e
    }

    /// Orthogonality residuals followed by their tolerances.
    fn residuals(&self, theta: &[f64], tol_factor: f64, u_norm: f64) -> (Vec<f64>, Vec<f64>) {
        let (c, x) = self.unpack(theta);
        let p = self.p();
        let dx = self.u.grid().dx();
        let eps = self.eps(&c, &x);
        let mut r = Vec::with_capacity(2 * self.n);
        let mut tol = Vec::with_capacity(2 * self.n);
        for i in 0..self.n {
            let (mut dot, mut nn) = (0.0, 0.0);
            for (ej, &xj) in eps.iter().zip(&self.xs) {
                let d = soliton_profile_derivative(p, c[i], xj - x[i], 1).unwrap_or(0.0);
                dot += ej * d;
                nn += d * d;
            }
            r.push(dot * dx);
            tol.push(tol_factor * u_norm * (nn * dx).sqrt());
        }
        if self.mode == ModulationMode::Full {
            let power = if p.get() == 5 { 3 } else { 1 };
            for i in 0..self.n {
                let (mut dot, mut nn) = (0.0, 0.0);
                for (ej, &xj) in eps.iter().zip(&self.xs) {
                    let q = soliton_profile(p, c[i], xj - x[i]).unwrap_or(0.0).powi(power);
                    dot += ej * q;
                    nn += q * q;
                }
                r.push(dot * dx);
                tol.push(tol_factor * u_norm * (nn * dx).sqrt());
            }
        }
        (r, tol)
    }

    fn steps(&self, theta: &[f64]) -> Vec<f64> {
        let (c, _) = self.unpack(theta);
        let width: Vec<f64> = c.iter().map(|c| 1.0 / c.abs().max(1e-12).sqrt()).collect();
        match self.mode {
            ModulationMode::Translations => width.iter().map(|w| 1e-6 * w).collect(),
            ModulationMode::Full => c
                .iter()
                .map(|c| 1e-6 * c)
                .chain(width.iter().map(|w| 1e-6 * w))
                .collect(),
        }
    }
}

fn scaled_norm(r: &[f64], tol: &[f64]) -> f64 {
    r.iter().zip(tol).map(|(a, t)| (a / t).powi(2)).sum::<f64>().sqrt()
}

fn check_guesses(c: &[f64], x: &[f64], options: &ModulationOptions) -> Result<()> {
    if c.len() != x.len() || c.is_empty() {
        return Err(Error::InvalidParameter(
            "need one speed per center and at least one soliton".into(),
        ));
    }
    if let Some(&bad) = c.iter().find(|&&c| !(c > 0.0)) {
        return Err(Error::SpeedRange(bad));
    }
    let c_min = c.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_sep = options.min_separation.unwrap_or(2.0 / c_min.sqrt());
    for k in 0..x.len().saturating_sub(1) {
        if !(x[k + 1] - x[k] >= min_sep) {
            return Err(Error::Separation(format!(
                "centers {} and {} closer than {min_sep} or unordered",
                x[k],
                x[k + 1]
            )));
        }
        if (c[k] - c[k + 1]).abs() < options.min_speed_gap {
            return Err(Error::Separation(format!(
                "speeds {} and {} are nearly equal",
                c[k],
                c[k + 1]
            )));
        }
    }
    Ok(())
}

fn infer_signs(u: &Field, centers: &[f64]) -> Vec<i8> {
    centers
        .iter()
        .map(|&x| {
            if !u.p().is_odd() {
                return 1;
            }
            let g = u.grid();
            let j = (((x + 0.5 * g.length) / g.dx()).round() as isize).rem_euclid(g.n as isize) as usize;
            if u.values()[j] < 0.0 {
                -1
            } else {
                1
            }
        })
        .collect()
}

fn solve(
    u: &Field,
    mode: ModulationMode,
    c0: &[f64],
    x0: &[f64],
    options: &ModulationOptions,
) -> Result<ModulationFrame> {
    check_guesses(c0, x0, options)?;
    let n = c0.len();
    let signs = infer_signs(u, x0);
    let prob = Problem {
        u,
        xs: u.grid().xs(),
        signs: signs.clone(),
        mode,
        fixed_c: c0.to_vec(),
        n,
    };
    let start_eps = u.with_values(prob.eps(c0, x0))?;
    let distance = spectral::sobolev_norm(&start_eps, 1.0)?;
    let cap = options.closeness_cap.unwrap_or_else(|| {
        0.5 * c0
            .iter()
            .map(|&c| {
                let q = u.with_values(
                    prob.xs
                        .iter()
                        .map(|&x| soliton_profile(u.p(), c, x).unwrap_or(0.0))
                        .collect(),
                );
                q.map(|q| spectral::sobolev_norm(&q, 1.0).unwrap_or(0.0)).unwrap_or(0.0)
            })
            .fold(f64::INFINITY, f64::min)
    });
    if distance > cap {
        return Err(Error::Closeness { distance, cap });
    }
    let u_norm = spectral::mass(u).sqrt();
    let mut theta: Vec<f64> = match mode {
        ModulationMode::Translations => x0.to_vec(),
        ModulationMode::Full => c0.iter().chain(x0).cloned().collect(),
    };
    let (mut r, tol) = prob.residuals(&theta, options.tol_factor, u_norm);
    let mut iterations = 0;
    while r.iter().zip(&tol).any(|(a, t)| a.abs() > *t) {
        if iterations >= options.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: scaled_norm(&r, &tol),
            });
        }
        iterations += 1;
        let m = theta.len();
        let h = prob.steps(&theta);
        let mut jac = Mat::<f64>::zeros(m, m);
        for k in 0..m {
            let mut tp = theta.clone();
            tp[k] += h[k];
            let (rp, _) = prob.residuals(&tp, options.tol_factor, u_norm);
            for i in 0..m {
                jac[(i, k)] = (rp[i] - r[i]) / h[k];
            }
        }
        let rhs = Col::<f64>::from_fn(m, |i| -r[i]);
        let delta = jac.partial_piv_lu().solve(&rhs);
        if !delta.iter().all(|d| d.is_finite()) {
            return Err(Error::NoConvergence {
                iterations,
                residual: scaled_norm(&r, &tol),
            });
        }
        let before = scaled_norm(&r, &tol);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = theta.iter().zip(delta.iter()).map(|(a, d)| a + lambda * d).collect();
            let speeds_ok = mode == ModulationMode::Translations || trial[..n].iter().all(|&c| c > 0.0);
            if speeds_ok {
                let (rt, _) = prob.residuals(&trial, options.tol_factor, u_norm);
                if scaled_norm(&rt, &tol) < before || lambda < 1e-3 {
                    theta = trial;
                    r = rt;
                    break;
                }
            } else if lambda < 1e-3 {
                let bad = trial[..n].iter().cloned().fold(f64::INFINITY, f64::min);
                return Err(Error::SpeedRange(bad));
            }
            lambda *= 0.5;
        }
    }
    let (c, x) = prob.unpack(&theta);
    if let Some(&bad) = c.iter().find(|&&c| !(c > 0.0)) {
        return Err(Error::SpeedRange(bad));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Separation(format!("fitted centers {x:?} lost their order")));
    }
    let eps = u.with_values(prob.eps(&c, &x))?;
    let nu = options
        .nu
        .unwrap_or_else(|| c.iter().cloned().fold(f64::INFINITY, f64::min));
    let dx = u.grid().dx();
    let eps_local = x
        .iter()
        .map(|&xi| {
            (dx * eps
                .values()
                .iter()
                .zip(&prob.xs)
                .map(|(e, &xj)| e * e * (-nu.sqrt() * (xj - xi).abs()).exp())
                .sum::<f64>())
            .sqrt()
        })
        .collect();
    Ok(ModulationFrame {
        t: u.t(),
        c,
        center: x,
        sign: signs,
        eps_l2: spectral::mass(&eps).sqrt(),
        eps_h1: spectral::sobolev_norm(&eps, 1.0)?,
        ortho_residuals: r,
        eps_local,
        iterations,
    })
}

/// Fits centers with speeds held at `c_fixed` so that ∫ε∂ₓR̃_i = 0.
pub fn decompose_translations(
    u: &Field,
    c_fixed: &[f64],
    guesses: &[f64],
    options: &ModulationOptions,
) -> Result<ModulationFrame> {
    solve(u, ModulationMode::Translations, c_fixed, guesses, options)
}

/// Fits speeds and centers from (speed, center) guesses.
pub fn decompose_full(u: &Field, guesses: &[(f64, f64)], options: &ModulationOptions) -> Result<ModulationFrame> {
    let c: Vec<f64> = guesses.iter().map(|g| g.0).collect();
    let x: Vec<f64> = guesses.iter().map(|g| g.1).collect();
    solve(u, ModulationMode::Full, &c, &x, options)
}

pub fn decompose(
    u: &Field,
    mode: ModulationMode,
    guesses: &[(f64, f64)],
    options: &ModulationOptions,
) -> Result<ModulationFrame> {
    let c: Vec<f64> = guesses.iter().map(|g| g.0).collect();
    let x: Vec<f64> = guesses.iter().map(|g| g.1).collect();
    solve(u, mode, &c, &x, options)
}

/// (speed, center) guesses from the `count` tallest well-separated peaks of |u|, ordered by center.
pub fn guess_solitons(u: &Field, count: usize, min_separation: f64) -> Vec<(f64, f64)> {
    let g = u.grid();
    let v = u.values();
    let n = v.len();
    let mut peaks: Vec<(f64, usize)> = (0..n)
        .filter(|&j| {
            let a = v[j].abs();
            a > 0.0 && a >= v[(j + n - 1) % n].abs() && a > v[(j + 1) % n].abs()
        })
        .map(|j| (v[j].abs(), j))
        .collect();
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut chosen: Vec<(f64, f64)> = Vec::new();
    let q0 = ground_state(u.p(), 0.0);
    let pm = u.p().as_f64() - 1.0;
    for (a, j) in peaks {
        if chosen.len() == count {
            break;
        }
        // Parabolic refinement of the peak position.
        let (l, c, r) = (v[(j + n - 1) % n].abs(), a, v[(j + 1) % n].abs());
        let den = l - 2.0 * c + r;
        let off = if den != 0.0 { 0.5 * (l - r) / den } else { 0.0 };
        let x = g.x(j) + off * g.dx();
        if chosen.iter().all(|&(_, y)| (y - x).abs() >= min_separation) {
            chosen.push(((a / q0).powf(pm), x));
        }
    }
    chosen.sort_by(|a, b| a.1.total_cmp(&b.1));
    chosen
}

/// Per-frame decompositions along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationTrack {
    pub mode: ModulationMode,
    pub frames: Vec<ModulationFrame>,
    /// First failure, after which the track stops.
    pub failure: Option<(f64, Error)>,
}

/// Fitted constant K of |x_i' − c_i| ≤ K((∫ε²e^{−√ν|x−x_i|})^{1/2} + e^{−ν^{3/2}t/4}).
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityCheck {
    pub k: f64,
    /// (t, i, |x_i' − c_i|, weighted ε norm, exponential term)
    pub rows: Vec<(f64, usize, f64, f64, f64)>,
}

impl ModulationTrack {
    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t).collect()
    }

    pub fn is_truncated(&self) -> bool {
        self.failure.is_some()
    }

    /// Center velocities by centered differences, one-sided at the ends.
    pub fn center_velocities(&self) -> Vec<Vec<f64>> {
        let k = self.frames.len();
        (0..k)
            .map(|j| {
                let (a, b) = if k < 2 {
                    return vec![f64::NAN; self.frames[j].center.len()];
                } else if j == 0 {
                    (0, 1)
                } else if j == k - 1 {
                    (k - 2, k - 1)
                } else {
                    (j - 1, j + 1)
                };
                let dt = self.frames[b].t - self.frames[a].t;
                self.frames[b]
                    .center
                    .iter()
                    .zip(&self.frames[a].center)
                    .map(|(xb, xa)| (xb - xa) / dt)
                    .collect()
            })
            .collect()
    }

    /// c_i(t) − c_i(t_first) per frame.
    pub fn speed_drifts(&self) -> Vec<Vec<f64>> {
        let c0 = &self.frames[0].c;
        self.frames
            .iter()
            .map(|f| f.c.iter().zip(c0).map(|(a, b)| a - b).collect())
            .collect()
    }

    /// Least-squares slope of each center against time.
    pub fn center_slopes(&self) -> Vec<f64> {
        let t = self.times();
        let n = t.len() as f64;
        let mt = t.iter().sum::<f64>() / n;
        let stt: f64 = t.iter().map(|a| (a - mt).powi(2)).sum();
        (0..self.frames[0].center.len())
            .map(|i| {
                let mx = self.frames.iter().map(|f| f.center[i]).sum::<f64>() / n;
                self.frames
                    .iter()
                    .zip(&t)
                    .map(|(f, ti)| (ti - mt) * (f.center[i] - mx))
                    .sum::<f64>()
                    / stt
            })
            .collect()
    }

    /// Smallest slope of consecutive center gaps against time.
    pub fn separation_rate(&self) -> Option<f64> {
        let n = self.frames.first()?.center.len();
        if n < 2 || self.frames.len() < 2 {
            return None;
        }
        let t = self.times();
        let m = t.len() as f64;
        let mt = t.iter().sum::<f64>() / m;
        let stt: f64 = t.iter().map(|a| (a - mt).powi(2)).sum();
        (0..n - 1)
            .map(|i| {
                let gaps: Vec<f64> = self.frames.iter().map(|f| f.center[i + 1] - f.center[i]).collect();
                let mg = gaps.iter().sum::<f64>() / m;
                gaps.iter().zip(&t).map(|(g, ti)| (ti - mt) * (g - mg)).sum::<f64>() / stt
            })
            .reduce(f64::min)
    }

    pub fn velocity_check(&self, nu: f64) -> VelocityCheck {
        let v = self.center_velocities();
        let mut k: f64 = 0.0;
        let mut rows = Vec::new();
        for (f, vf) in self.frames.iter().zip(&v) {
            for i in 0..f.c.len() {
                let lhs = (vf[i] - f.c[i]).abs();
                let expo = (-nu.powf(1.5) * f.t / 4.0).exp();
                k = k.max(lhs / (f.eps_local[i] + expo));
                rows.push((f.t, i + 1, lhs, f.eps_local[i], expo));
            }
        }
        VelocityCheck { k, rows }
    }
}

/// Decomposes every frame, warm-starting each from the previous fit advanced by c·Δt.
pub fn track(
    traj: &Trajectory,
    mode: ModulationMode,
    guesses: &[(f64, f64)],
    options: &ModulationOptions,
) -> ModulationTrack {
    let mut frames: Vec<ModulationFrame> = Vec::new();
    let mut failure = None;
    let mut current: Vec<(f64, f64)> = guesses.to_vec();
    let mut t_prev = traj.first().t();
    for u in traj.frames() {
        let dt = u.t() - t_prev;
        let guess: Vec<(f64, f64)> = current.iter().map(|&(c, x)| (c, x + c * dt)).collect();
        match decompose(u, mode, &guess, options) {
            Ok(f) => {
                current = f.c.iter().cloned().zip(f.center.iter().cloned()).collect();
                if mode == ModulationMode::Translations {
                    current = guesses.iter().zip(&f.center).map(|(g, &x)| (g.0, x)).collect();
                }
                t_prev = u.t();
                frames.push(f);
            }
            Err(e) => {
                failure = Some((u.t(), e));
                break;
            }
        }
    }
    ModulationTrack { mode, frames, failure }
}
