//! Fourier differentiation, conserved quantities and Sobolev norms on periodic fields.

use crate::error::{Error, Result};
use crate::field::{Field, GridSpec};
use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
}

pub(crate) fn forward_plan(n: usize) -> Arc<dyn RealToComplex<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn inverse_plan(n: usize) -> Arc<dyn ComplexToReal<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Unnormalised half spectrum Σ_j u_j e^{−2πijk/N}, k = 0..=N/2.
pub fn half_spectrum(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let plan = forward_plan(n);
    let mut input = values.to_vec();
    let mut out = plan.make_output_vec();
    plan.process(&mut input, &mut out).expect("buffer sizes match the plan");
    out
}

/// Inverse of [`half_spectrum`], including the 1/N factor. The imaginary parts of the
/// zero and Nyquist entries are discarded.
pub fn from_half_spectrum(spec: &[Complex64], n: usize) -> Vec<f64> {
    let plan = inverse_plan(n);
    let mut input = spec.to_vec();
    input[0].im = 0.0;
    input[n / 2].im = 0.0;
    let mut out = plan.make_output_vec();
    plan.process(&mut input, &mut out).expect("buffer sizes match the plan");
    let inv = 1.0 / n as f64;
    out.iter_mut().for_each(|v| *v *= inv);
    out
}

/// ∂ₓᵒʳᵈᵉʳ by Fourier multiplication with (ik)^order; the Nyquist mode is zeroed.
pub fn derivative(values: &[f64], length: f64, order: u32) -> Vec<f64> {
    if order == 0 {
        return values.to_vec();
    }
    let n = values.len();
    let mut spec = half_spectrum(values);
    let base = 2.0 * std::f64::consts::PI / length;
    let i_pow = Complex64::i().powu(order);
    for (k, c) in spec.iter_mut().enumerate() {
        let kk = base * k as f64;
        *c *= i_pow * kk.powi(order as i32);
    }
    spec[n / 2] = Complex64::new(0.0, 0.0);
    from_half_spectrum(&spec, n)
}

pub fn field_derivative(u: &Field, order: u32) -> Vec<f64> {
    derivative(u.values(), u.grid().length, order)
}

/// Rectangle-rule integral of a periodic sampled function.
pub fn integrate(grid: &GridSpec, values: &[f64]) -> f64 {
    grid.dx() * values.iter().sum::<f64>()
}

/// ∫u².
pub fn mass(u: &Field) -> f64 {
    u.grid().dx() * u.values().iter().map(|v| v * v).sum::<f64>()
}

/// ∫(½uₓ² − u^{p+1}/(p+1)).
pub fn energy(u: &Field) -> f64 {
    let ux = field_derivative(u, 1);
    let p1 = u.p().get() as i32 + 1;
    let pf = p1 as f64;
    let s: f64 = ux
        .iter()
        .zip(u.values())
        .map(|(d, v)| 0.5 * d * d - v.powi(p1) / pf)
        .sum();
    u.grid().dx() * s
}

/// ∫{(∂ₓ²u)² − (10/3)(∂ₓu)²u + (5/9)u⁴}, the next KdV conservation law after the energy.
pub fn h2_invariant(u: &Field) -> Result<f64> {
    if u.p().get() != 2 {
        return Err(Error::WrongExponent {
            expected: 2,
            found: u.p().get(),
        });
    }
    let ux = field_derivative(u, 1);
    let uxx = field_derivative(u, 2);
    let s: f64 = u
        .values()
        .iter()
        .zip(ux.iter().zip(&uxx))
        .map(|(v, (d1, d2))| d2 * d2 - 10.0 / 3.0 * d1 * d1 * v + 5.0 / 9.0 * v.powi(4))
        .sum();
    Ok(u.grid().dx() * s)
}

/// (Σ_k (1+k²)^s |û_k|²·L/N²)^{1/2} over the full spectrum, Nyquist included.
pub fn sobolev_norm(u: &Field, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Sobolev index {s} must be nonnegative"
        )));
    }
    Ok(sobolev_norm_values(u.grid(), u.values(), s))
}

pub(crate) fn sobolev_norm_values(grid: &GridSpec, values: &[f64], s: f64) -> f64 {
    let n = grid.n;
    let spec = half_spectrum(values);
    let mut acc = 0.0;
    for (k, c) in spec.iter().enumerate() {
        let kk = grid.wavenumber(k);
        let mult = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
        acc += mult * (1.0 + kk * kk).powf(s) * c.norm_sqr();
    }
    (acc * grid.length / (n as f64 * n as f64)).sqrt()
}

/// Fraction of the energy of ∂ₓˢu that sits in the top third of the resolved wavenumbers.
pub fn spectral_tail_fraction(values: &[f64], length: f64, s: u32) -> f64 {
    let n = values.len();
    let spec = half_spectrum(values);
    let base = 2.0 * std::f64::consts::PI / length;
    let mut total = 0.0;
    let mut tail = 0.0;
    let cut = (2 * (n / 2)) / 3;
    for (k, c) in spec.iter().enumerate() {
        let e = (base * k as f64).powi(2 * s as i32) * c.norm_sqr();
        total += e;
        if k >= cut {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// max|u| over the outer `fraction` of the domain on each side.
pub fn boundary_amplitude(u: &Field, fraction: f64) -> f64 {
    let n = u.len();
    let m = ((fraction * n as f64).ceil() as usize).clamp(1, n / 2);
    let v = u.values();
    v[..m].iter().chain(&v[n - m..]).fold(0.0, |a, x| a.max(x.abs()))
}

#[cfg(test)]
use crate::oracle;
