use crate::error::{Error, Result};
use std::f64::consts::PI;

/// φ(x) = 1/2 − arctan(e^{κx})/π, evaluated as arctan(e^{−κx})/π so both tails stay accurate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiWeight {
    kappa: f64,
}

impl PhiWeight {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weight rate kappa = {kappa} must be positive"
            )));
        }
        Ok(PhiWeight { kappa })
    }

    /// κ = √(η/2) for a slope gap η.
    pub fn from_slope_gap(eta: f64) -> Result<Self> {
        PhiWeight::new((0.5 * eta).sqrt())
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn value(&self, x: f64) -> f64 {
        (-self.kappa * x).exp().atan() / PI
    }

    /// k-th derivative, k ≤ 3.
    pub fn derivative(&self, x: f64, k: u32) -> f64 {
        let y = self.kappa * x;
        let s = 1.0 / y.cosh();
        let t = y.tanh();
        let c = self.kappa / (2.0 * PI);
        match k {
            0 => self.value(x),
            1 => -c * s,
            2 => c * self.kappa * s * t,
            _ => c * self.kappa * self.kappa * s * (s * s - t * t),
        }
    }

    /// A constant λ₀ with λ₀e^{−κ|x|} < −φ'(x) < e^{−κ|x|}/λ₀.
    pub fn lambda0(&self) -> f64 {
        0.99 * (self.kappa / (2.0 * PI)).min(PI / self.kappa)
    }

    /// A constant λ₁ with λ₁e^{−κx} ≤ φ(x) for x ≥ 0.
    pub fn lambda1(&self) -> f64 {
        0.25
    }
}

/// ψ(x) = (2/π)·arctan(e^{−(√ν/2)x}).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiWeight {
    nu: f64,
}

impl PsiWeight {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weight rate nu = {nu} must be positive"
            )));
        }
        Ok(PsiWeight { nu })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    fn rate(&self) -> f64 {
        0.5 * self.nu.sqrt()
    }

    pub fn value(&self, x: f64) -> f64 {
        2.0 / PI * (-self.rate() * x).exp().atan()
    }

    /// k-th derivative, k ≤ 3.
    pub fn derivative(&self, x: f64, k: u32) -> f64 {
        let a = self.rate();
        let s = 1.0 / (a * x).cosh();
        let t = (a * x).tanh();
        match k {
            0 => self.value(x),
            1 => -a / PI * s,
            2 => a * a / PI * s * t,
            _ => a * a * a / PI * s * (s * s - t * t),
        }
    }
}

/// Partition of unity φ₁..φ_N built from ψ centered at the midpoints between solitons.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    psi: PsiWeight,
    midpoints: Vec<f64>,
}

impl Partition {
    pub fn new(nu: f64, midpoints: Vec<f64>) -> Result<Self> {
        let psi = PsiWeight::new(nu)?;
        if midpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Separation(
                "partition midpoints must be strictly increasing".into(),
            ));
        }
        Ok(Partition { psi, midpoints })
    }

    /// Midpoints (x_i + x_{i+1})/2 of strictly increasing centers.
    pub fn from_centers(nu: f64, centers: &[f64]) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidParameter("partition needs at least one center".into()));
        }
        if centers.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Separation(format!(
                "centers {centers:?} are not strictly increasing"
            )));
        }
        Partition::new(nu, centers.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect())
    }

    pub fn nu(&self) -> f64 {
        self.psi.nu()
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    /// Number of pieces N.
    pub fn len(&self) -> usize {
        self.midpoints.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// ψ_i(x) = ψ(x − m_i) for i < N, ψ_N ≡ 1 (1-based).
    pub fn psi(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.psi_unchecked(i, x))
    }

    fn psi_unchecked(&self, i: usize, x: f64) -> f64 {
        if i == 0 {
            0.0
        } else if i == self.len() {
            1.0
        } else {
            self.psi.value(x - self.midpoints[i - 1])
        }
    }

    /// φ_i = ψ_i − ψ_{i−1} with ψ₀ ≡ 0 (1-based).
    pub fn phi(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        if i == self.len() && i > 1 {
            // 1 − ψ(y) = ψ(−y)
            return Ok(self.psi.value(self.midpoints[i - 2] - x));
        }
        Ok(self.psi_unchecked(i, x) - self.psi_unchecked(i - 1, x))
    }

    /// Samples ψ_i on the given nodes.
    pub fn psi_on(&self, i: usize, xs: &[f64]) -> Result<Vec<f64>> {
        self.check_index(i)?;
        Ok(xs.iter().map(|&x| self.psi_unchecked(i, x)).collect())
    }

    pub fn phi_on(&self, i: usize, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.phi(i, x)).collect()
    }
}
