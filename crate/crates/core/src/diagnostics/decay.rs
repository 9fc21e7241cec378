use crate::error::{Error, Result};
use crate::field::Field;
use crate::spectral;
use serde::{Deserialize, Serialize};

/// Exponential fit value ≈ amplitude·e^{−rate·s} over a window of s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Least squares on (s, ln v) over the samples whose s lies in the inner 80% of the span.
fn log_linear_fit(points: &[(f64, f64)]) -> Result<DecayFit> {
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let trim = 0.1 * (hi - lo);
    let (a, b) = (lo + trim, hi - trim);
    let tol = 1e-12 * (hi - lo).abs().max(1.0);
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 >= a - tol && p.0 <= b + tol)
        .map(|&(s, v)| (s, v.ln()))
        .collect();
    if kept.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "only {} samples left after trimming",
            kept.len()
        )));
    }
    let n = kept.len() as f64;
    let ms = kept.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = kept.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = kept.iter().map(|p| (p.0 - ms).powi(2)).sum();
    let sxy: f64 = kept.iter().map(|p| (p.0 - ms) * (p.1 - ml)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("fit window has zero width".into()));
    }
    let slope = sxy / sxx;
    let intercept = ml - slope * ms;
    let residual = (kept
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        rate: -slope,
        amplitude: intercept.exp(),
        residual,
        window: (kept[0].0, kept[kept.len() - 1].0),
        samples: kept.len(),
    })
}

/// Fits value ≈ A·e^{−θt}; the first and last 10% of the time window are excluded.
pub fn fit_exponential_decay(series: &[(f64, f64)]) -> Result<DecayFit> {
    if series.len() < 8 {
        return Err(Error::InvalidParameter(format!(
            "{} samples, at least 8 needed",
            series.len()
        )));
    }
    if let Some(i) = series.iter().position(|p| !(p.1 > 0.0)) {
        return Err(Error::NonPositiveValue {
            index: i,
            value: series[i].1,
        });
    }
    log_linear_fit(series)
}

/// Fits |∂ₓˢu| ≈ A·e^{−θd} with d the distance beyond the outermost center on one side.
///
/// Samples run from the center outward until |∂ₓˢu| drops below 1e−11 of its maximum.
pub fn fit_spatial_decay(u: &Field, s: u32, centers: &[f64], side: Side) -> Result<DecayFit> {
    if centers.is_empty() {
        return Err(Error::InvalidParameter("no centers given".into()));
    }
    let g = u.grid();
    let fraction = spectral::spectral_tail_fraction(u.values(), g.length, s);
    if fraction > 1e-8 {
        return Err(Error::SpectralTail { fraction });
    }
    let d = spectral::field_derivative(u, s);
    let peak = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::NonPositiveValue { index: 0, value: 0.0 });
    }
    let floor = 1e-11 * peak;
    let xs = g.xs();
    let mut points = Vec::new();
    match side {
        Side::Right => {
            let edge = centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for j in 0..g.n {
                if xs[j] <= edge {
                    continue;
                }
                if d[j].abs() < floor {
                    break;
                }
                points.push((xs[j] - edge, d[j].abs()));
            }
        }
        Side::Left => {
            let edge = centers.iter().cloned().fold(f64::INFINITY, f64::min);
            for j in (0..g.n).rev() {
                if xs[j] >= edge {
                    continue;
                }
                if d[j].abs() < floor {
                    break;
                }
                points.push((edge - xs[j], d[j].abs()));
            }
        }
    }
    if points.len() < 8 {
        return Err(Error::InvalidParameter(format!(
            "{} usable tail samples, at least 8 needed",
            points.len()
        )));
    }
    log_linear_fit(&points)
}
