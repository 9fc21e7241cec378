use super::functionals::{energy_density, localized_mass};
use super::weights::Partition;
use crate::error::{Error, Result};
use crate::field::{Exponent, Field, GridSpec};
use crate::profiles::{soliton_profile, soliton_profile_derivative};
use crate::spectral;
use faer::linalg::solvers::Solve;
use faer::{Col, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check_layout(solitons: &[(f64, f64)], part: &Partition) -> Result<()> {
    if solitons.is_empty() {
        return Err(Error::InvalidParameter("no solitons given".into()));
    }
    if part.len() != solitons.len() {
        return Err(Error::InvalidParameter(format!(
            "partition has {} pieces for {} solitons",
            part.len(),
            solitons.len()
        )));
    }
    for (k, w) in solitons.windows(2).enumerate() {
        let m = part.midpoints()[k];
        if !(w[1].1 > w[0].1) || !(m > w[0].1 && m < w[1].1) {
            return Err(Error::Separation(format!(
                "centers {} < {} with midpoint {m} between them required",
                w[0].1, w[1].1
            )));
        }
    }
    for &(c, _) in solitons {
        if !(c > 0.0) {
            return Err(Error::SpeedRange(c));
        }
    }
    Ok(())
}

fn profile_on(grid: &GridSpec, p: Exponent, c: f64, center: f64, k: u32) -> Vec<f64> {
    grid.xs()
        .iter()
        .map(|&x| soliton_profile_derivative(p, c, x - center, k).expect("checked speed"))
        .collect()
}

/// H = Σ (1/c_i²)∫(εₓ² + c_iε² − pR̃_i^{p−1}ε²)φ_i.
pub fn weinstein_h(eps: &Field, solitons: &[(f64, f64)], part: &Partition) -> Result<f64> {
    check_layout(solitons, part)?;
    let g = eps.grid();
    let xs = g.xs();
    let p = eps.p();
    let pf = p.as_f64();
    let ex = spectral::field_derivative(eps, 1);
    let mut h = 0.0;
    for (i, &(c, center)) in solitons.iter().enumerate() {
        let phi = part.phi_on(i + 1, &xs)?;
        let mut s = 0.0;
        for j in 0..g.n {
            let r = soliton_profile(p, c, xs[j] - center)?;
            let e = eps.values()[j];
            s += (ex[j] * ex[j] + c * e * e - pf * r.powf(pf - 1.0) * e * e) * phi[j];
        }
        h += s * g.dx() / (c * c);
    }
    Ok(h)
}

/// Both evaluations of F; they agree by summation by parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeinsteinF {
    pub direct: f64,
    pub abel: f64,
}

impl WeinsteinF {
    pub fn relative_gap(&self) -> f64 {
        (self.direct - self.abel).abs() / self.direct.abs().max(self.abel.abs()).max(f64::MIN_POSITIVE)
    }
}

/// F = Σ (1/c_i²){∫(½uₓ² − u^{p+1}/(p+1))φ_i + (c_i/2)∫u²φ_i}, directly and in terms of
/// the localized quantities Ẽ_i and M_i.
pub fn weinstein_f(u: &Field, solitons: &[(f64, f64)], part: &Partition, kappa: f64) -> Result<WeinsteinF> {
    check_layout(solitons, part)?;
    let g = u.grid();
    let xs = g.xs();
    let dens = energy_density(u, 0.0);
    let n = solitons.len();
    let mut direct = 0.0;
    let mut scale = 0.0;
    for (i, &(c, _)) in solitons.iter().enumerate() {
        let phi = part.phi_on(i + 1, &xs)?;
        let mut e = 0.0;
        let mut m = 0.0;
        for j in 0..g.n {
            e += dens[j] * phi[j];
            m += u.values()[j] * u.values()[j] * phi[j];
        }
        let term = (e + 0.5 * c * m) * g.dx() / (c * c);
        direct += term;
        scale += term.abs();
    }
    let dens_k = energy_density(u, kappa);
    let mut abel = 0.0;
    for i in 1..=n {
        let ci = solitons[i - 1].0;
        let psi = part.psi_on(i, &xs)?;
        let et = g.dx() * dens_k.iter().zip(&psi).map(|(d, w)| d * w).sum::<f64>();
        let mi = localized_mass(u, part, i)?;
        let (a, b) = if i < n {
            let cn = solitons[i].0;
            (
                1.0 / (ci * ci) - 1.0 / (cn * cn),
                (1.0 / ci - 1.0 / cn) * (0.5 - kappa * (1.0 / ci + 1.0 / cn)),
            )
        } else {
            (1.0 / (ci * ci), (0.5 - kappa / ci) / ci)
        };
        abel += a * et + b * mi;
    }
    let out = WeinsteinF { direct, abel };
    if (direct - abel).abs() > 1e-9 * scale.max(abel.abs()) + 1e-300 {
        return Err(Error::Diagnostic(format!(
            "direct ({direct:e}) and summed-by-parts ({abel:e}) forms of F disagree"
        )));
    }
    Ok(out)
}

/// Removes from ε its components along the translation modes ∂ₓR̃_i so that ∫ε∂ₓR̃_i = 0.
pub fn project_out_translations(eps: &Field, solitons: &[(f64, f64)]) -> Result<Field> {
    let g = eps.grid();
    let modes: Vec<Vec<f64>> = solitons.iter().map(|&(c, x)| profile_on(g, eps.p(), c, x, 1)).collect();
    let n = modes.len();
    let dot = |a: &[f64], b: &[f64]| g.dx() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram = Mat::<f64>::from_fn(n, n, |i, j| dot(&modes[i], &modes[j]));
    let rhs = Col::<f64>::from_fn(n, |i| dot(eps.values(), &modes[i]));
    let coef = gram.partial_piv_lu().solve(&rhs);
    if !coef.iter().all(|c| c.is_finite()) {
        return Err(Error::Diagnostic("translation modes are linearly dependent".into()));
    }
    let mut v = eps.values().to_vec();
    for (i, m) in modes.iter().enumerate() {
        for (a, b) in v.iter_mut().zip(m) {
            *a -= coef[i] * b;
        }
    }
    eps.with_values(v)
}

/// One random perturbation in a coercivity study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivitySample {
    pub h1_sq: f64,
    pub h: f64,
    /// Σ_i (∫εR̃_i)².
    pub proj_sq: f64,
}

impl CoercivitySample {
    /// λH + (1/λ)Σ(∫εR̃_i)² − ‖ε‖²_{H¹}; nonnegative when λ works for this sample.
    pub fn slack(&self, lambda: f64) -> f64 {
        lambda * self.h + self.proj_sq / lambda - self.h1_sq
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityReport {
    pub samples: Vec<CoercivitySample>,
    /// Smallest λ₀ on the search grid satisfying every sample, if any.
    pub lambda0: Option<f64>,
    pub min_h: f64,
}

/// Samples random smooth ε around Σ R̃_i, projects out the translation modes, scales them to
/// ‖ε‖_{H¹} = `h1_size` and searches λ₀ ∈ [1e−3, 1e4] with ‖ε‖² ≤ λ₀H + (1/λ₀)Σ(∫εR̃_i)².
pub fn coercivity_study(
    p: Exponent,
    grid: &GridSpec,
    solitons: &[(f64, f64)],
    nu: f64,
    samples: usize,
    h1_size: f64,
    seed: u64,
) -> Result<CoercivityReport> {
    let centers: Vec<f64> = solitons.iter().map(|s| s.1).collect();
    let part = Partition::from_centers(nu, &centers)?;
    check_layout(solitons, &part)?;
    let profiles: Vec<Vec<f64>> = solitons.iter().map(|&(c, x)| profile_on(grid, p, c, x, 0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = grid.xs();
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let mut v = vec![0.0; grid.n];
        for _ in 0..4 {
            let &(c, x) = &solitons[rng.random_range(0..solitons.len())];
            let width = 1.0 / c.sqrt();
            let b = x + width * rng.random_range(-4.0..4.0);
            let w = width * rng.random_range(0.5..4.0);
            let k = rng.random_range(0.0..2.0) * c.sqrt();
            let ph = rng.random_range(0.0..std::f64::consts::TAU);
            let a: f64 = rng.random_range(-1.0..1.0);
            for (vj, &xj) in v.iter_mut().zip(&xs) {
                let y = (xj - b) / w;
                *vj += a * (-y * y).exp() * (k * xj + ph).cos();
            }
        }
        let eps = project_out_translations(&Field::new(*grid, p, 0.0, v)?, solitons)?;
        let norm = spectral::sobolev_norm(&eps, 1.0)?;
        if norm < 1e-12 {
            continue;
        }
        let eps = eps.scale(h1_size / norm)?;
        let h = weinstein_h(&eps, solitons, &part)?;
        let proj_sq: f64 = profiles
            .iter()
            .map(|r| (grid.dx() * r.iter().zip(eps.values()).map(|(a, b)| a * b).sum::<f64>()).powi(2))
            .sum();
        out.push(CoercivitySample {
            h1_sq: spectral::sobolev_norm(&eps, 1.0)?.powi(2),
            h,
            proj_sq,
        });
    }
    let lambda0 = (0..=7000)
        .map(|k| 10f64.powf(-3.0 + k as f64 * 1e-3))
        .find(|&l| out.iter().all(|s| s.slack(l) >= 0.0));
    let min_h = out.iter().map(|s| s.h).fold(f64::INFINITY, f64::min);
    Ok(CoercivityReport {
        samples: out,
        lambda0,
        min_h,
    })
}
