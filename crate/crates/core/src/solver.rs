//! Fourth-order exponential time differencing (ETDRK4) for ∂ₜu + ∂ₓ(∂ₓ²u + uᵖ) = 0.
//!
//! In Fourier variables v̂_t = ik³v̂ − ik·F[uᵖ]; the dispersive part is integrated exactly
//! and uᵖ is formed on a zero-padded grid so it is alias-free.

use crate::error::{Error, Result};
use crate::field::{Exponent, Field, GridSpec};
use crate::spectral::{self, forward_plan, inverse_plan};
use num_complex::Complex64;
use realfft::{ComplexToReal, RealToComplex};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Fail-fast limits checked at every step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Abort when max|u| exceeds this cap.
    pub blowup_cap: f64,
    /// Abort when max|u| in the boundary margin exceeds this fraction of max|u|; `None` disables the watchdog.
    pub boundary_threshold: Option<f64>,
    /// Width of the boundary margin on each side, as a fraction of L.
    pub boundary_fraction: f64,
    /// Refuse runs needing more steps than this.
    pub max_steps: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            blowup_cap: 1e6,
            boundary_threshold: Some(1e-8),
            boundary_fraction: 0.05,
            max_steps: 50_000_000,
        }
    }
}

/// φ₁, φ₂, φ₃ of z: Taylor series inside the unit disc, closed-form recursion outside.
fn phi_functions(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 1.0 {
        phi_taylor(z)
    } else {
        phi_closed(z)
    }
}

fn phi_taylor(z: Complex64) -> [Complex64; 3] {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (k, o) in out.iter_mut().enumerate() {
        // Σ zⁿ/(n+k+1)!
        let mut term = Complex64::new(1.0, 0.0);
        for j in 1..=(k + 1) {
            term /= j as f64;
        }
        let mut sum = term;
        for n in 1..30 {
            term *= z / (n + k + 1) as f64;
            sum += term;
        }
        *o = sum;
    }
    out
}

fn phi_closed(z: Complex64) -> [Complex64; 3] {
    let p1 = (z.exp() - 1.0) / z;
    let p2 = (p1 - 1.0) / z;
    let p3 = (p2 - 0.5) / z;
    [p1, p2, p3]
}

/// Precomputed ETDRK4 coefficients, transforms and work buffers for one grid and exponent.
pub struct Stepper {
    grid: GridSpec,
    p: Exponent,
    options: SolverOptions,
    m: usize,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    /// −ik with the Nyquist entry zeroed.
    nl: Vec<Complex64>,
    fwd_n: Arc<dyn RealToComplex<f64>>,
    inv_n: Arc<dyn ComplexToReal<f64>>,
    fwd_m: Arc<dyn RealToComplex<f64>>,
    inv_m: Arc<dyn ComplexToReal<f64>>,
    pad_spec: Vec<Complex64>,
    pad_real: Vec<f64>,
    scratch_m: Vec<Complex64>,
    last_max: f64,
    last_boundary: f64,
}

impl Stepper {
    pub fn new(grid: GridSpec, p: Exponent, options: SolverOptions) -> Result<Self> {
        grid.validate()?;
        let n = grid.n;
        let half = n / 2 + 1;
        let m = n * p.padding_factor();
        let h = grid.dt;
        let mut e = Vec::with_capacity(half);
        let mut e2 = Vec::with_capacity(half);
        let mut q = Vec::with_capacity(half);
        let mut f1 = Vec::with_capacity(half);
        let mut f2 = Vec::with_capacity(half);
        let mut f3 = Vec::with_capacity(half);
        let mut nl = Vec::with_capacity(half);
        for k in 0..half {
            let kk = if k == n / 2 { 0.0 } else { grid.wavenumber(k) };
            let z = Complex64::new(0.0, kk * kk * kk * h);
            let [p1, _, _] = phi_functions(0.5 * z);
            let [g1, g2, g3] = phi_functions(z);
            e.push(z.exp());
            e2.push((0.5 * z).exp());
            q.push(0.5 * h * p1);
            f1.push(h * (g1 - 3.0 * g2 + 4.0 * g3));
            f2.push(h * (g2 - 2.0 * g3));
            f3.push(h * (-g2 + 4.0 * g3));
            nl.push(Complex64::new(0.0, -kk));
        }
        let fwd_m = forward_plan(m);
        let inv_m = inverse_plan(m);
        let scratch_len = fwd_m.get_scratch_len().max(inv_m.get_scratch_len());
        Ok(Stepper {
            grid,
            p,
            options,
            m,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            nl,
            fwd_n: forward_plan(n),
            inv_n: inverse_plan(n),
            pad_spec: fwd_m.make_output_vec(),
            pad_real: fwd_m.make_input_vec(),
            fwd_m,
            inv_m,
            scratch_m: vec![Complex64::new(0.0, 0.0); scratch_len],
            last_max: 0.0,
            last_boundary: 0.0,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Unnormalised half spectrum of physical values, Nyquist removed.
    pub fn to_spectrum(&self, values: &[f64]) -> Vec<Complex64> {
        let mut input = values.to_vec();
        let mut out = self.fwd_n.make_output_vec();
        self.fwd_n.process(&mut input, &mut out).expect("plan size");
        let n = self.grid.n;
        out[n / 2] = Complex64::new(0.0, 0.0);
        out
    }

    pub fn to_physical(&self, spec: &[Complex64]) -> Vec<f64> {
        let mut input = spec.to_vec();
        input[0].im = 0.0;
        let n = self.grid.n;
        input[n / 2] = Complex64::new(0.0, 0.0);
        let mut out = self.inv_n.make_output_vec();
        self.inv_n.process(&mut input, &mut out).expect("plan size");
        let inv = 1.0 / n as f64;
        out.iter_mut().for_each(|v| *v *= inv);
        out
    }

    /// N(v̂) = −ik·F[uᵖ] evaluated on the padded grid; records max|u| and boundary amplitude.
    fn nonlinear(&mut self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.n;
        let m = self.m;
        self.pad_spec.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        self.pad_spec[..n / 2].copy_from_slice(&v[..n / 2]);
        self.pad_spec[0].im = 0.0;
        self.inv_m
            .process_with_scratch(&mut self.pad_spec, &mut self.pad_real, &mut self.scratch_m)
            .expect("plan size");
        let inv = 1.0 / n as f64;
        let pw = self.p.get() as i32;
        let margin = ((self.options.boundary_fraction * m as f64).ceil() as usize).clamp(1, m / 2);
        let mut max_abs: f64 = 0.0;
        let mut bmax: f64 = 0.0;
        for (j, x) in self.pad_real.iter_mut().enumerate() {
            let u = *x * inv;
            let a = u.abs();
            if a.is_nan() {
                max_abs = f64::NAN;
            } else {
                max_abs = max_abs.max(a);
            }
            if j < margin || j >= m - margin {
                bmax = bmax.max(a);
            }
            *x = u.powi(pw);
        }
        self.last_max = max_abs;
        self.last_boundary = bmax;
        self.fwd_m
            .process_with_scratch(&mut self.pad_real, &mut self.pad_spec, &mut self.scratch_m)
            .expect("plan size");
        let scale = n as f64 / m as f64;
        for k in 0..n / 2 {
            out[k] = self.nl[k] * self.pad_spec[k] * scale;
        }
        out[n / 2] = Complex64::new(0.0, 0.0);
    }

    fn check(&self, t: f64) -> Result<()> {
        let mx = self.last_max;
        if !mx.is_finite() || mx > self.options.blowup_cap {
            return Err(Error::Blowup { t, max_abs: mx });
        }
        if let Some(thr) = self.options.boundary_threshold {
            if mx > 0.0 && self.last_boundary > thr * mx {
                return Err(Error::Domain(format!(
                    "boundary amplitude {:e} exceeds {thr:e}·max|u| = {:e} at t = {t}",
                    self.last_boundary,
                    thr * mx
                )));
            }
        }
        Ok(())
    }

    /// One ETDRK4 step in place on a half spectrum; `t` is the time before the step.
    pub fn advance(&mut self, v: &mut [Complex64], t: f64) -> Result<()> {
        let half = v.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut nv = vec![zero; half];
        let mut na = vec![zero; half];
        let mut nb = vec![zero; half];
        let mut nc = vec![zero; half];
        let mut a = vec![zero; half];
        let mut b = vec![zero; half];
        let mut c = vec![zero; half];
        self.nonlinear(v, &mut nv);
        self.check(t)?;
        for k in 0..half {
            a[k] = self.e2[k] * v[k] + self.q[k] * nv[k];
        }
        self.nonlinear(&a, &mut na);
        for k in 0..half {
            b[k] = self.e2[k] * v[k] + self.q[k] * na[k];
        }
        self.nonlinear(&b, &mut nb);
        for k in 0..half {
            c[k] = self.e2[k] * a[k] + self.q[k] * (2.0 * nb[k] - nv[k]);
        }
        self.nonlinear(&c, &mut nc);
        for k in 0..half {
            v[k] = self.e[k] * v[k] + self.f1[k] * nv[k] + 2.0 * self.f2[k] * (na[k] + nb[k]) + self.f3[k] * nc[k];
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Blowup {
                t: t + self.grid.dt,
                max_abs: f64::INFINITY,
            });
        }
        Ok(())
    }
}

/// Advances `u` by one time step of its grid.
pub fn step(u: &Field) -> Result<Field> {
    step_with(u, &SolverOptions::default())
}

pub fn step_with(u: &Field, options: &SolverOptions) -> Result<Field> {
    let mut s = Stepper::new(*u.grid(), u.p(), *options)?;
    let mut v = s.to_spectrum(u.values());
    s.advance(&mut v, u.t())?;
    let values = s.to_physical(&v);
    let t = u.t() + u.grid().dt;
    if let Some(j) = values
        .iter()
        .position(|x| !x.is_finite() || x.abs() > options.blowup_cap)
    {
        return Err(Error::Blowup {
            t,
            max_abs: values[j].abs(),
        });
    }
    Ok(Field::from_parts_unchecked(*u.grid(), u.p(), t, values))
}

/// Conserved quantities of one stored frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedRecord {
    pub mass: f64,
    pub energy: f64,
    pub h2_invariant: Option<f64>,
    pub boundary_amplitude: f64,
}

impl ConservedRecord {
    pub fn of(u: &Field, boundary_fraction: f64) -> Self {
        ConservedRecord {
            mass: spectral::mass(u),
            energy: spectral::energy(u),
            h2_invariant: spectral::h2_invariant(u).ok(),
            boundary_amplitude: spectral::boundary_amplitude(u, boundary_fraction),
        }
    }
}

/// Stored frames of a run with their conserved quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    frames: Vec<Field>,
    records: Vec<ConservedRecord>,
    truncation: Option<Error>,
}

impl Trajectory {
    /// Builds a trajectory from frames, computing their records.
    pub fn from_frames(frames: Vec<Field>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidParameter("trajectory needs at least one frame".into()));
        }
        for w in frames.windows(2) {
            if !(w[1].t() > w[0].t()) {
                return Err(Error::InvalidParameter(format!(
                    "frame times {} and {} are not strictly increasing",
                    w[0].t(),
                    w[1].t()
                )));
            }
            w[0].check_compatible(&w[1])?;
        }
        let fraction = SolverOptions::default().boundary_fraction;
        let records = frames.iter().map(|f| ConservedRecord::of(f, fraction)).collect();
        Ok(Trajectory {
            frames,
            records,
            truncation: None,
        })
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn records(&self) -> &[ConservedRecord] {
        &self.records
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t()).collect()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn first(&self) -> &Field {
        &self.frames[0]
    }

    pub fn last(&self) -> &Field {
        self.frames.last().expect("trajectory is never empty")
    }

    pub fn truncation(&self) -> Option<&Error> {
        self.truncation.as_ref()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncation.is_some()
    }

    /// Turns a truncated trajectory into its error.
    pub fn check(self) -> Result<Self> {
        match self.truncation {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }

    /// Frames in reverse order with time mirrored (t ↦ t_end + t_start − t), for one-directional checks.
    pub fn time_reversed(&self) -> Result<Self> {
        let t0 = self.first().t();
        let t1 = self.last().t();
        let frames = self.frames.iter().rev().map(|f| f.with_time(t0 + t1 - f.t())).collect();
        Trajectory::from_frames(frames)
    }

    /// Largest |m(t) − m(t₀)| over the frames.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.records[0].mass;
        self.records.iter().fold(0.0, |a, r| a.max((r.mass - m0).abs()))
    }

    pub fn energy_drift(&self) -> f64 {
        let e0 = self.records[0].energy;
        self.records.iter().fold(0.0, |a, r| a.max((r.energy - e0).abs()))
    }

    pub fn h2_drift(&self) -> Option<f64> {
        let h0 = self.records[0].h2_invariant?;
        Some(
            self.records
                .iter()
                .fold(0.0, |a, r| a.max((r.h2_invariant.unwrap_or(h0) - h0).abs())),
        )
    }
}

/// Callback invoked on every stored frame.
pub trait Observer {
    fn observe(&mut self, frame: &Field, record: &ConservedRecord);
}

impl<F: FnMut(&Field, &ConservedRecord)> Observer for F {
    fn observe(&mut self, frame: &Field, record: &ConservedRecord) {
        self(frame, record)
    }
}

/// Run length and storage cadence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Store a frame every this many steps (the final frame is always stored).
    pub frame_stride: usize,
    pub solver: SolverOptions,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            frame_stride: 100,
            solver: SolverOptions::default(),
        }
    }
}

/// Evolves `u0` over [t0, t0 + t_final]. Blow-up and boundary contact end the run early; the
/// partial trajectory is returned with its truncation recorded.
pub fn evolve(
    u0: &Field,
    t_final: f64,
    options: &EvolveOptions,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "final time {t_final} must be nonnegative"
        )));
    }
    if options.frame_stride == 0 {
        return Err(Error::InvalidParameter("frame stride must be positive".into()));
    }
    let dt = u0.grid().dt;
    let steps_f = t_final / dt;
    let steps = steps_f.round();
    if (steps - steps_f).abs() > 1e-6 * steps_f.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "final time {t_final} is not a multiple of dt = {dt}"
        )));
    }
    if steps > options.solver.max_steps as f64 {
        return Err(Error::InvalidParameter(format!("{steps} steps exceed the budget")));
    }
    let steps = steps as u64;
    let fraction = options.solver.boundary_fraction;
    let mut stepper = Stepper::new(*u0.grid(), u0.p(), options.solver)?;
    let t0 = u0.t();
    let mut frames = Vec::new();
    let mut records = Vec::new();
    let store =
        |f: Field, frames: &mut Vec<Field>, records: &mut Vec<ConservedRecord>, obs: &mut [&mut dyn Observer]| {
            let r = ConservedRecord::of(&f, fraction);
            for o in obs.iter_mut() {
                o.observe(&f, &r);
            }
            frames.push(f);
            records.push(r);
        };
    store(u0.clone(), &mut frames, &mut records, observers);
    let mut v = stepper.to_spectrum(u0.values());
    let mut truncation = None;
    for s in 1..=steps {
        let t_before = t0 + (s - 1) as f64 * dt;
        if let Err(e) = stepper.advance(&mut v, t_before) {
            truncation = Some(e);
            break;
        }
        if s % options.frame_stride as u64 == 0 || s == steps {
            let values = stepper.to_physical(&v);
            let t = t0 + s as f64 * dt;
            if values.iter().any(|x| !x.is_finite()) {
                truncation = Some(Error::Blowup {
                    t,
                    max_abs: f64::INFINITY,
                });
                break;
            }
            store(
                Field::from_parts_unchecked(*u0.grid(), u0.p(), t, values),
                &mut frames,
                &mut records,
                observers,
            );
        }
    }
    Ok(Trajectory {
        frames,
        records,
        truncation,
    })
}
