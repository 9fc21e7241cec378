use super::weights::{Partition, PhiWeight};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::solver::Trajectory;
use crate::spectral;
use num_complex::Complex64;

/// ∫_{x<xstar} u² over the periodic cell, integrating the trigonometric interpolant of u²
/// exactly so the cut point costs no accuracy.
pub fn tail_mass(u: &Field, xstar: f64) -> Result<f64> {
    let g = u.grid();
    let half = 0.5 * g.length;
    if !(xstar >= -half && xstar <= half) {
        return Err(Error::Domain(format!("cut point {xstar} outside [{}, {half}]", -half)));
    }
    let n = g.n;
    let sq: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    let spec = spectral::half_spectrum(&sq);
    let s = xstar + half;
    let mut total = spec[0].re * s;
    for (k, w) in spec.iter().enumerate().skip(1) {
        let kappa = g.wavenumber(k);
        // Nyquist appears once in the real signal, the other modes twice.
        let weight = if k == n / 2 { 1.0 } else { 2.0 };
        let phase = Complex64::new(0.0, kappa * s).exp() - 1.0;
        total += weight * (w * phase / Complex64::new(0.0, kappa)).re;
    }
    Ok((total / n as f64).max(0.0))
}

/// max over frames of the mass left of ρt − R; the certified ε for (ρ, R).
pub fn nondispersion_profile(traj: &Trajectory, rho: f64, r: f64) -> Result<f64> {
    if !(rho > 0.0 && r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need rho > 0 and R > 0 (got {rho}, {r})"
        )));
    }
    traj.frames()
        .iter()
        .map(|f| tail_mass(f, rho * f.t() - r))
        .try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

/// 1 + (a+b)/2 − √(1 + ((b−a)/2)²), a smooth surrogate of min(a, b).
pub fn tilde_m(a: f64, b: f64) -> f64 {
    let h = 0.5 * (b - a);
    1.0 + 0.5 * (a + b) - (1.0 + h * h).sqrt()
}

/// I(t) = ∫u²(t,x)·φ(x − x0 + f(t) − f(t0) − m̃(t)) for every frame with t ≥ t0.
pub fn monotone_functional(
    traj: &Trajectory,
    t0: f64,
    x0: f64,
    kappa: f64,
    f_slope: f64,
    mtilde: &dyn Fn(f64) -> f64,
) -> Result<Vec<(f64, f64)>> {
    let w = PhiWeight::new(kappa)?;
    let mut out = Vec::new();
    for u in traj.frames().iter().filter(|f| f.t() >= t0) {
        let t = u.t();
        let shift = -x0 + f_slope * (t - t0) - mtilde(t);
        let g = u.grid();
        let n = g.n;
        let margin = ((0.05 * n as f64).ceil() as usize).max(1);
        let mut total = 0.0;
        let mut edge = 0.0;
        let mut mass = 0.0;
        for (j, v) in u.values().iter().enumerate() {
            let v2 = v * v;
            let c = v2 * w.value(g.x(j) + shift);
            total += c;
            mass += v2;
            if j < margin || j >= n - margin {
                edge += c;
            }
        }
        if edge > 1e-8 * mass {
            return Err(Error::Domain(format!(
                "weighted mass {:e} near the boundary at t = {t}",
                edge * g.dx()
            )));
        }
        out.push((t, total * g.dx()));
    }
    Ok(out)
}

/// Fitted constant for I(t0) ≤ I(t) + C₁e^{κx0}.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneFit {
    /// Smallest C₁ valid for every x0 and every sampled pair t0 ≤ t.
    pub c1: f64,
    /// Per x0: (x0, max deficit I(t0) − I(t), max deficit·e^{−κx0}).
    pub per_x0: Vec<(f64, f64, f64)>,
}

/// Evaluates I_{(t0,x0)} from every frame t0 and fits one C₁ over all x0 and pairs.
pub fn fit_monotone_constant(
    traj: &Trajectory,
    x0s: &[f64],
    kappa: f64,
    f_slope: f64,
    mtilde: &dyn Fn(f64) -> f64,
) -> Result<MonotoneFit> {
    let mut c1: f64 = 0.0;
    let mut per_x0 = Vec::new();
    for &x0 in x0s {
        let mut worst: f64 = 0.0;
        for f in traj.frames() {
            let series = monotone_functional(traj, f.t(), x0, kappa, f_slope, mtilde)?;
            let i0 = series[0].1;
            for &(_, it) in &series[1..] {
                worst = worst.max(i0 - it);
            }
        }
        let scaled = worst * (-kappa * x0).exp();
        c1 = c1.max(scaled);
        per_x0.push((x0, worst, scaled));
    }
    Ok(MonotoneFit { c1, per_x0 })
}

fn weighted_integral(u: &Field, density: &[f64], part: &Partition, i: usize) -> Result<f64> {
    let xs = u.grid().xs();
    let psi = part.psi_on(i, &xs)?;
    Ok(u.grid().dx() * density.iter().zip(&psi).map(|(d, w)| d * w).sum::<f64>())
}

/// M_i = ∫u²ψ_i (1-based; i = N gives the mass).
pub fn localized_mass(u: &Field, part: &Partition, i: usize) -> Result<f64> {
    let d: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    weighted_integral(u, &d, part, i)
}

pub(crate) fn energy_density(u: &Field, kappa: f64) -> Vec<f64> {
    let ux = spectral::field_derivative(u, 1);
    let p1 = u.p().get() as i32 + 1;
    u.values()
        .iter()
        .zip(&ux)
        .map(|(v, d)| 0.5 * d * d - v.powi(p1) / p1 as f64 + kappa * v * v)
        .collect()
}

pub(crate) fn localized_energy_unchecked(u: &Field, part: &Partition, i: usize, kappa: f64) -> Result<f64> {
    weighted_integral(u, &energy_density(u, kappa), part, i)
}

/// Ẽ_i = ∫(½uₓ² − u^{p+1}/(p+1) + κu²)ψ_i with κ ∈ (0, c₁/4).
pub fn localized_energy(u: &Field, part: &Partition, i: usize, kappa: f64, c1: f64) -> Result<f64> {
    let upper = 0.25 * c1;
    if !(kappa > 0.0 && kappa < upper) {
        return Err(Error::KappaRange { kappa, upper });
    }
    localized_energy_unchecked(u, part, i, kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Mass,
    Energy,
}

/// A deficit q_i(t) − q_i(t') beyond the fitted allowance K₁e^{−at} + floor.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub quantity: Quantity,
    pub index: usize,
    pub t: f64,
    pub t_later: f64,
    pub deficit: f64,
    pub allowed: f64,
}

/// Almost-monotonicity of the localized masses and energies along a run.
///
/// Deficits are checked against K₁e^{−(ν^{3/2}/4)t} plus a floor of 10× the conservation
/// drift. K₁ is fitted on pairs whose earlier time lies in the first half of the run and the
/// second half is checked against it, so the exponential rate is tested rather than absorbed.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub kappa: f64,
    pub nu: f64,
    pub rate: f64,
    pub times: Vec<f64>,
    /// masses[k][i-1] = M_i(t_k)
    pub masses: Vec<Vec<f64>>,
    pub energies: Vec<Vec<f64>>,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub mass_floor: f64,
    pub energy_floor: f64,
    /// Largest raw deficit per quantity.
    pub max_mass_deficit: f64,
    pub max_energy_deficit: f64,
    /// K₁ fitted on the first half.
    pub k1: f64,
    /// Smallest K₁ covering every pair.
    pub k1_all: f64,
    pub fit_until: f64,
    pub violations: Vec<Violation>,
}

impl MonotonicityReport {
    pub fn flagged(&self) -> bool {
        !self.violations.is_empty()
    }
}

/// Deficits of M_i and Ẽ_i over all frame pairs, with partitions supplied per frame.
pub fn monotonicity_report(
    traj: &Trajectory,
    partitions: &[Partition],
    kappa: f64,
    nu: f64,
    c1: f64,
) -> Result<MonotonicityReport> {
    if partitions.len() != traj.len() {
        return Err(Error::InvalidParameter(format!(
            "{} partitions for {} frames",
            partitions.len(),
            traj.len()
        )));
    }
    let n_sol = partitions[0].len();
    if partitions.iter().any(|p| p.len() != n_sol) {
        return Err(Error::InvalidParameter("partition size changes between frames".into()));
    }
    let mut masses = Vec::with_capacity(traj.len());
    let mut energies = Vec::with_capacity(traj.len());
    for (u, part) in traj.frames().iter().zip(partitions) {
        let m: Result<Vec<f64>> = (1..=n_sol).map(|i| localized_mass(u, part, i)).collect();
        let e: Result<Vec<f64>> = (1..=n_sol).map(|i| localized_energy(u, part, i, kappa, c1)).collect();
        masses.push(m?);
        energies.push(e?);
    }
    let rate = nu.powf(1.5) / 4.0;
    let mass_drift = traj.mass_drift();
    let energy_drift = traj.energy_drift();
    let mass_floor = 10.0 * mass_drift;
    let energy_floor = 10.0 * (energy_drift + kappa * mass_drift);
    let times = traj.times();
    let t_first = times[0];
    let fit_until = 0.5 * (t_first + times[times.len() - 1]);

    let mut k1: f64 = 0.0;
    let mut k1_all: f64 = 0.0;
    let mut max_mass_deficit: f64 = 0.0;
    let mut max_energy_deficit: f64 = 0.0;
    let series = [
        (Quantity::Mass, &masses, mass_floor),
        (Quantity::Energy, &energies, energy_floor),
    ];
    for &(q, vals, floor) in &series {
        for i in 0..n_sol {
            for k in 0..times.len() {
                for l in k + 1..times.len() {
                    let d = vals[k][i] - vals[l][i];
                    match q {
                        Quantity::Mass => max_mass_deficit = max_mass_deficit.max(d),
                        Quantity::Energy => max_energy_deficit = max_energy_deficit.max(d),
                    }
                    let need = (d - floor).max(0.0) * (rate * times[k]).exp();
                    k1_all = k1_all.max(need);
                    if times[k] <= fit_until {
                        k1 = k1.max(need);
                    }
                }
            }
        }
    }
    let mut violations = Vec::new();
    for &(q, vals, floor) in &series {
        for i in 0..n_sol {
            for k in 0..times.len() {
                if times[k] <= fit_until {
                    continue;
                }
                for l in k + 1..times.len() {
                    let d = vals[k][i] - vals[l][i];
                    let allowed = k1 * (-rate * times[k]).exp() + floor;
                    if d > allowed {
                        violations.push(Violation {
                            quantity: q,
                            index: i + 1,
                            t: times[k],
                            t_later: times[l],
                            deficit: d,
                            allowed,
                        });
                    }
                }
            }
        }
    }
    Ok(MonotonicityReport {
        kappa,
        nu,
        rate,
        times,
        masses,
        energies,
        mass_drift,
        energy_drift,
        mass_floor,
        energy_floor,
        max_mass_deficit,
        max_energy_deficit,
        k1,
        k1_all,
        fit_until,
        violations,
    })
}

#[cfg(test)]
use crate::oracle;
