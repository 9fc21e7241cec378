//! Closed-form solutions: ground state, solitons, mKdV breathers and superposed initial data.

use crate::error::{Error, Result};
use crate::field::{Exponent, Field, GridSpec};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// ln cosh(y) without overflow.
fn ln_cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Ground state Q(x) = ((p+1)/(2cosh²((p−1)x/2)))^{1/(p−1)}, evaluated in the log domain
/// so the tails stay accurate far beyond where cosh² overflows.
pub fn ground_state(p: Exponent, x: f64) -> f64 {
    let pm = p.as_f64() - 1.0;
    let ln_q = ((0.5 * (p.as_f64() + 1.0)).ln() - 2.0 * ln_cosh(0.5 * pm * x)) / pm;
    ln_q.exp()
}

/// tanh(((p−1)/2)x), so that Q' = −th_p·Q.
pub fn th_p(p: Exponent, x: f64) -> f64 {
    (0.5 * (p.as_f64() - 1.0) * x).tanh()
}

/// k-th derivative of Q in closed form, k ≤ 3.
pub fn ground_state_derivative(p: Exponent, x: f64, k: u32) -> Result<f64> {
    let q = ground_state(p, x);
    let pf = p.as_f64();
    let qp = -th_p(p, x) * q;
    match k {
        0 => Ok(q),
        1 => Ok(qp),
        2 => Ok(q - q.powf(pf)),
        3 => Ok(qp - pf * q.powf(pf - 1.0) * qp),
        _ => Err(Error::InvalidParameter(format!(
            "derivative order {k} > 3 not available"
        ))),
    }
}

fn check_speed(c: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("speed c = {c} must be positive")));
    }
    Ok(())
}

/// Rescaled soliton Q_c(x) = c^{1/(p−1)}·Q(√c·x).
pub fn soliton_profile(p: Exponent, c: f64, x: f64) -> Result<f64> {
    check_speed(c)?;
    Ok(c.powf(1.0 / (p.as_f64() - 1.0)) * ground_state(p, c.sqrt() * x))
}

/// k-th derivative of Q_c, k ≤ 3.
pub fn soliton_profile_derivative(p: Exponent, c: f64, x: f64, k: u32) -> Result<f64> {
    check_speed(c)?;
    let scale = c.powf(1.0 / (p.as_f64() - 1.0) + 0.5 * k as f64);
    Ok(scale * ground_state_derivative(p, c.sqrt() * x, k)?)
}

fn default_sign() -> i8 {
    1
}

/// Speed, initial center and sign of one traveling soliton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub c: f64,
    pub x0: f64,
    #[serde(default = "default_sign")]
    pub sign: i8,
}

impl SolitonParams {
    pub fn new(c: f64, x0: f64) -> Self {
        SolitonParams { c, x0, sign: 1 }
    }

    pub fn with_sign(c: f64, x0: f64, sign: i8) -> Self {
        SolitonParams { c, x0, sign }
    }

    pub fn validate(&self, p: Exponent) -> Result<()> {
        check_speed(self.c)?;
        if !self.x0.is_finite() {
            return Err(Error::InvalidParameter("soliton center must be finite".into()));
        }
        match self.sign {
            1 => Ok(()),
            -1 if p.is_odd() => Ok(()),
            -1 => Err(Error::InvalidParameter(format!(
                "negative soliton is not a solution for even p = {}",
                p.get()
            ))),
            s => Err(Error::InvalidParameter(format!("sign {s} must be +1 or -1"))),
        }
    }

    /// Center at time t.
    pub fn center(&self, t: f64) -> f64 {
        self.x0 + self.c * t
    }
}

/// sign·Q_c(x − ct − x0).
pub fn soliton(params: &SolitonParams, p: Exponent, t: f64, x: f64) -> Result<f64> {
    params.validate(p)?;
    Ok(params.sign as f64 * soliton_profile(p, params.c, x - params.center(t))?)
}

/// mKdV breather parameters; envelope and phase velocities are always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreatherParams {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub x1: f64,
    #[serde(default)]
    pub x2: f64,
}

impl BreatherParams {
    pub fn new(alpha: f64, beta: f64, x1: f64, x2: f64) -> Result<Self> {
        let b = BreatherParams { alpha, beta, x1, x2 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0 && self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "breather needs alpha, beta > 0 (got {}, {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    /// Envelope velocity β² − 3α².
    pub fn gamma(&self) -> f64 {
        self.beta * self.beta - 3.0 * self.alpha * self.alpha
    }

    /// Phase velocity 3β² − α².
    pub fn delta(&self) -> f64 {
        3.0 * self.beta * self.beta - self.alpha * self.alpha
    }

    /// Time after which the breather repeats up to a translation by gamma·period.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.alpha * (self.delta() - self.gamma()))
    }
}

/// 2√2·∂ₓ arctan((β/α)·sin(α(x−δt−x1))/cosh(β(x−γt−x2))), derivative expanded in closed form.
pub fn breather(params: &BreatherParams, t: f64, x: f64) -> Result<f64> {
    params.validate()?;
    let (a, b) = (params.alpha, params.beta);
    let phase = a * (x - params.delta() * t - params.x1);
    let env = b * (x - params.gamma() * t - params.x2);
    let sech = 1.0 / env.cosh();
    let th = env.tanh();
    let r = b / a;
    let (s, c) = phase.sin_cos();
    let num = b * sech * (c - r * s * th);
    let den = 1.0 + r * r * s * s * sech * sech;
    Ok(2.0 * std::f64::consts::SQRT_2 * num / den)
}

/// Spacing rules for superposed initial data.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SuperposeOptions {
    /// Minimum gap between consecutive centers; default 20/√c_min.
    pub min_separation: Option<f64>,
    /// Minimum distance from a center to the periodic boundary; default 10/√c_min.
    pub boundary_margin: Option<f64>,
}

/// A sampled sum of solitons with its interaction integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Superposed {
    pub field: Field,
    /// Σ_{i≠j} ∫R_iR_j on the grid.
    pub interaction: f64,
}

/// Samples Σ signᵢ·Q_{cᵢ}(x − x0ᵢ) at t = 0.
pub fn superpose(
    solitons: &[SolitonParams],
    p: Exponent,
    grid: &GridSpec,
    options: &SuperposeOptions,
) -> Result<Superposed> {
    grid.validate()?;
    if solitons.is_empty() {
        return Err(Error::InvalidParameter(
            "superposition needs at least one soliton".into(),
        ));
    }
    for s in solitons {
        s.validate(p)?;
    }
    let c_min = solitons.iter().map(|s| s.c).fold(f64::INFINITY, f64::min);
    let min_sep = options.min_separation.unwrap_or(20.0 / c_min.sqrt());
    let margin = options.boundary_margin.unwrap_or(10.0 / c_min.sqrt());
    for w in solitons.windows(2) {
        let gap = w[1].x0 - w[0].x0;
        if gap <= 0.0 {
            return Err(Error::Overlap(format!(
                "centers {} and {} are not strictly increasing",
                w[0].x0, w[1].x0
            )));
        }
        if gap < min_sep {
            return Err(Error::Overlap(format!("gap {gap} below minimum separation {min_sep}")));
        }
    }
    let half = 0.5 * grid.length;
    for s in solitons {
        if s.x0 < -half + margin || s.x0 > half - margin {
            return Err(Error::Domain(format!(
                "center {} within {margin} of the periodic boundary ±{half}",
                s.x0
            )));
        }
    }
    let xs = grid.xs();
    let profiles: Vec<Vec<f64>> = solitons
        .iter()
        .map(|s| {
            xs.iter()
                .map(|&x| s.sign as f64 * soliton_profile(p, s.c, x - s.x0).expect("validated speed"))
                .collect()
        })
        .collect();
    let mut values = vec![0.0; grid.n];
    for prof in &profiles {
        for (v, r) in values.iter_mut().zip(prof) {
            *v += r;
        }
    }
    let mut interaction = 0.0;
    for i in 0..profiles.len() {
        for j in 0..profiles.len() {
            if i != j {
                interaction += grid.dx() * profiles[i].iter().zip(&profiles[j]).map(|(a, b)| a * b).sum::<f64>();
            }
        }
    }
    Ok(Superposed {
        field: Field::new(*grid, p, 0.0, values)?,
        interaction,
    })
}

/// Initial condition of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Soliton(SolitonParams),
    Breather(BreatherParams),
    Superposition {
        solitons: Vec<SolitonParams>,
        #[serde(default)]
        options: SuperposeOptions,
    },
    /// Radiative bump a·exp(−((x−x0)/w)²), used as a dispersing reference.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    FromFile {
        path: PathBuf,
    },
}

impl InitialData {
    /// Samples the initial condition at t = 0 on `grid`.
    pub fn realize(&self, p: Exponent, grid: &GridSpec) -> Result<Field> {
        grid.validate()?;
        match self {
            InitialData::Soliton(s) => {
                s.validate(p)?;
                Field::from_fn(*grid, p, 0.0, |x| {
                    s.sign as f64 * soliton_profile(p, s.c, x - s.x0).unwrap_or(0.0)
                })
            }
            InitialData::Breather(b) => {
                if p.get() != 3 {
                    return Err(Error::WrongExponent {
                        expected: 3,
                        found: p.get(),
                    });
                }
                b.validate()?;
                Field::from_fn(*grid, p, 0.0, |x| breather(b, 0.0, x).unwrap_or(0.0))
            }
            InitialData::Superposition { solitons, options } => Ok(superpose(solitons, p, grid, options)?.field),
            InitialData::Gaussian {
                amplitude,
                center,
                width,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::InvalidParameter("gaussian width must be positive".into()));
                }
                Field::from_fn(*grid, p, 0.0, |x| amplitude * (-((x - center) / width).powi(2)).exp())
            }
            InitialData::FromFile { path } => {
                let f = crate::lab::snapshot::load_snapshot(path)?;
                if f.p() != p {
                    return Err(Error::WrongExponent {
                        expected: p.get(),
                        found: f.p().get(),
                    });
                }
                if f.grid().n != grid.n || f.grid().length != grid.length {
                    return Err(Error::Config(format!(
                        "snapshot grid (L = {}, N = {}) differs from configured grid (L = {}, N = {})",
                        f.grid().length,
                        f.grid().n,
                        grid.length,
                        grid.n
                    )));
                }
                Field::new(*grid, p, 0.0, f.into_values())
            }
        }
    }

    /// Solitons the data is built from, if any.
    pub fn solitons(&self) -> Vec<SolitonParams> {
        match self {
            InitialData::Soliton(s) => vec![*s],
            InitialData::Superposition { solitons, .. } => solitons.clone(),
            _ => Vec::new(),
        }
    }
}

/// Right-hand side of ‖∂ˢQ_c(·−r) − ∂ˢQ_c‖_{L²} ≤ r·(‖∂^{s+1}Q_c‖² + (r + 2z)‖∂^{s+1}Q_c‖²_∞)^{1/2},
/// where z is the largest positive zero of ∂^{s+1}Q_c (zero when there is none). s ∈ {0, 1}.
pub fn translation_bound(p: Exponent, c: f64, r: f64, s: u32) -> Result<f64> {
    check_speed(c)?;
    if s > 1 {
        return Err(Error::InvalidParameter(format!(
            "translation bound implemented for s <= 1, got {s}"
        )));
    }
    let z = if s == 0 {
        0.0
    } else {
        let pf = p.as_f64();
        2.0 / (pf - 1.0) * (0.5 * (pf + 1.0)).sqrt().acosh() / c.sqrt()
    };
    // Trapezoid on a wide window is spectrally accurate for these analytic, exponentially decaying profiles.
    let half = 60.0 / c.sqrt();
    let n = 1 << 16;
    let h = 2.0 * half / n as f64;
    let mut l2 = 0.0;
    let mut sup: f64 = 0.0;
    for j in 0..n {
        let x = -half + j as f64 * h;
        let d = soliton_profile_derivative(p, c, x, s + 1)?;
        l2 += d * d * h;
        sup = sup.max(d.abs());
    }
    Ok(r * (l2 + (r + 2.0 * z) * sup * sup).sqrt())
}

#[cfg(test)]
use crate::oracle;
