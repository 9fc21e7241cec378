//! Independent reference computations for tests: adaptive Gauss–Kronrod quadrature
//! and brute-force helpers that share no code with the library.

#![allow(dead_code, clippy::excessive_precision)]

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    // The relative floor stops refinement once the estimate is at roundoff level.
    if err <= tol || err <= 1e-13 * k.abs() || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// ∫_a^b f with absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // Pre-split so narrow features are not missed by the first panel.
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| adapt(&f, a + i as f64 * h, a + (i + 1) as f64 * h, tol / panels as f64, 16))
        .sum()
}

/// ∫_ℝ f for integrands decaying at least like e^{−|x|/width}; truncated at ±`half_width`.
pub fn integrate_line(f: impl Fn(f64) -> f64, half_width: f64) -> f64 {
    integrate(f, -half_width, half_width, 1e-14)
}

/// Ground state written directly from sech, independent of the library's log-domain evaluation.
pub fn q_sech(p: u32, x: f64) -> f64 {
    let pm = p as f64 - 1.0;
    let s = 1.0 / (0.5 * pm * x).cosh();
    (0.5 * (p as f64 + 1.0) * s * s).powf(1.0 / pm)
}

pub fn q_c_sech(p: u32, c: f64, x: f64) -> f64 {
    c.powf(1.0 / (p as f64 - 1.0)) * q_sech(p, c.sqrt() * x)
}

/// Central difference of order 8 with step `h`.
pub fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let c = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let mut s = 0.0;
    for (k, ck) in c.iter().enumerate() {
        let kh = (k + 1) as f64 * h;
        s += ck * (f(x + kh) - f(x - kh));
    }
    s / h
}

/// Discrete Fourier coefficients by direct O(N²) summation.
pub fn naive_dft(values: &[f64]) -> Vec<(f64, f64)> {
    let n = values.len();
    (0..n)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (j, v) in values.iter().enumerate() {
                let a = -2.0 * std::f64::consts::PI * (k * j % n) as f64 / n as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            (re, im)
        })
        .collect()
}
