#![allow(dead_code)]

pub mod oracle;

use gkdv::solver::{evolve, EvolveOptions, SolverOptions};
use gkdv::{Exponent, Field, GridSpec};

/// L² distance at time t between the evolved soliton Q_c(x − x0) and its exact translate.
/// The watchdog is off: time-stepping error radiates, and the distance already counts it.
pub fn soliton_error(p: u32, c: f64, x0: f64, length: f64, n: usize, dt: f64, t: f64) -> f64 {
    let p = Exponent::new(p).unwrap();
    let g = GridSpec::new(length, n, dt).unwrap();
    let u0 = Field::from_fn(g, p, 0.0, |x| oracle::q_c_sech(p.get(), c, x - x0)).unwrap();
    let opts = EvolveOptions {
        frame_stride: usize::MAX,
        solver: SolverOptions {
            boundary_threshold: None,
            ..Default::default()
        },
    };
    let traj = evolve(&u0, t, &opts, &mut []).unwrap().check().unwrap();
    let u = traj.last();
    let xs = g.xs();
    let s: f64 = u
        .values()
        .iter()
        .zip(&xs)
        .map(|(v, &x)| (v - oracle::q_c_sech(p.get(), c, x - x0 - c * t)).powi(2))
        .sum();
    (s * g.dx()).sqrt()
}
