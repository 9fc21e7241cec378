//! Periodic grid, exponent and solution snapshot types.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Nonlinearity power of ∂ₜu + ∂ₓ(∂ₓ²u + uᵖ) = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Exponent(u32);

impl Exponent {
    pub fn new(p: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParameter(format!("exponent p = {p} must be >= 2")));
        }
        Ok(Exponent(p))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    pub fn is_odd(self) -> bool {
        self.0 % 2 == 1
    }

    /// Criticality index 1/2 − 2/(p−1): negative subcritical, zero at p = 5.
    pub fn criticality(self) -> f64 {
        0.5 - 2.0 / (self.as_f64() - 1.0)
    }

    /// Zero-padding factor ceil((p+1)/2) that makes uᵖ alias-free.
    pub fn padding_factor(self) -> usize {
        (self.0 as usize + 2) / 2
    }
}

impl TryFrom<u32> for Exponent {
    type Error = Error;
    fn try_from(p: u32) -> Result<Self> {
        Exponent::new(p)
    }
}

impl From<Exponent> for u32 {
    fn from(p: Exponent) -> u32 {
        p.0
    }
}

/// Periodic grid on [−L/2, L/2) with N points and the solver time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub length: f64,
    pub n: usize,
    pub dt: f64,
}

impl GridSpec {
    pub fn new(length: f64, n: usize, dt: f64) -> Result<Self> {
        let g = GridSpec { length, n, dt };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "domain length {} must be positive",
                self.length
            )));
        }
        if self.n < 64 || !self.n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "N = {} must be a power of two >= 64",
                self.n
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {} must be positive", self.dt)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        GridSpec { dt, ..*self }
    }

    /// Physical wavenumber of the k-th entry of a half-spectrum (k ≤ N/2).
    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.length
    }
}

/// One snapshot u(t,·) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    p: Exponent,
    t: f64,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, p: Exponent, t: f64, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.n {
            return Err(Error::InvalidParameter(format!(
                "field has {} values, grid has N = {}",
                values.len(),
                grid.n
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value at index {j}")));
        }
        if !t.is_finite() {
            return Err(Error::InvalidParameter("non-finite time stamp".into()));
        }
        Ok(Field { grid, p, t, values })
    }

    pub fn zeros(grid: GridSpec, p: Exponent, t: f64) -> Result<Self> {
        Field::new(grid, p, t, vec![0.0; grid.n])
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: GridSpec, p: Exponent, t: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.xs().into_iter().map(f).collect();
        Field::new(grid, p, t, values)
    }

    pub(crate) fn from_parts_unchecked(grid: GridSpec, p: Exponent, t: f64, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n);
        Field { grid, p, t, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn with_time(&self, t: f64) -> Self {
        Field { t, ..self.clone() }
    }

    /// Same grid and time, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Field::new(self.grid, self.p, self.t, values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise difference `self − other`; grids and exponents must match.
    pub fn sub(&self, other: &Field) -> Result<Self> {
        self.check_compatible(other)?;
        self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Field) -> Result<Self> {
        self.check_compatible(other)?;
        self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        self.map(|v| s * v)
    }

    /// Cyclic shift by `cells` grid cells to the right: out[j] = in[j − cells].
    pub fn shift_cells(&self, cells: isize) -> Self {
        let n = self.values.len() as isize;
        let r = cells.rem_euclid(n) as usize;
        let mut values = self.values.clone();
        values.rotate_right(r);
        Field { values, ..self.clone() }
    }

    pub(crate) fn check_compatible(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid && (self.grid.length != other.grid.length || self.grid.n != other.grid.n) {
            return Err(Error::InvalidParameter("fields live on different grids".into()));
        }
        if self.p != other.p {
            return Err(Error::WrongExponent {
                expected: self.p.get(),
                found: other.p.get(),
            });
        }
        Ok(())
    }
}
