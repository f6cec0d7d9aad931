//! Phenomenological HOM dip: `p(x) = a − b·exp(−σ²(x−x₀)²/2)·sinc(k(x−x₀))`
//! with `sinc(u) = sin(u)/u`. Visibility is taken as `b/a`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipModel {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub x0: f64,
    pub k: f64,
    pub visibility: f64,
}

impl DipModel {
    /// Requires `a > 0` and `0 ≤ b/a ≤ 1`.
    pub fn new(a: f64, b: f64, sigma: f64, x0: f64, k: f64) -> Result<Self> {
        if !(a > 0.0) || ![b, sigma, x0, k].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid dip parameters a={a}, b={b}")));
        }
        let visibility = b / a;
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::InvalidInput(format!("visibility {visibility} outside [0, 1]")));
        }
        Ok(DipModel { a, b, sigma: sigma.abs(), x0, k: k.abs(), visibility })
    }

    pub fn eval(&self, x: f64) -> f64 {
        hom_dip(x, self)
    }
}

pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

fn model(p: &[f64], x: f64) -> f64 {
    let (a, b, sigma, x0, k) = (p[0], p[1], p[2], p[3], p[4]);
    let d = x - x0;
    a - b * (-0.5 * sigma * sigma * d * d).exp() * sinc(k * d)
}

/// Coincidence probability at delay `x`.
pub fn hom_dip(x: f64, params: &DipModel) -> f64 {
    model(&[params.a, params.b, params.sigma, params.x0, params.k], x)
}

/// Minimum number of samples for [`fit_hom_dip`].
pub const MIN_DIP_SAMPLES: usize = 6;

/// Nonlinear least-squares fit of the dip model.
///
/// Seeds: baseline from the sample maximum, depth from max − min, centre at
/// the sample minimum, width from the half-depth crossing; several sinc
/// frequencies are tried and the lowest residual wins.
pub fn fit_hom_dip(samples: &[(f64, f64)]) -> Result<DipModel> {
    if samples.len() < MIN_DIP_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_DIP_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let (xmin, xmax) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| (lo.min(*x), hi.max(*x)));
    let ymax = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let &(x_at_min, ymin) = samples.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty");
    let depth = ymax - ymin;
    if !(depth > 0.0) {
        return Err(Error::InvalidInput("samples show no dip".into()));
    }
    let half = ymin + 0.5 * depth;
    let below: Vec<f64> = samples.iter().filter(|s| s.1 <= half).map(|s| s.0).collect();
    let width = below.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - below.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = xmax - xmin;
    let width = if width > 0.0 { width } else { span / samples.len() as f64 };
    let sigma0 = 2.0 * (2.0 * std::f64::consts::LN_2).sqrt() / width;

    let residuals = |p: &[f64]| samples.iter().map(|&(x, y)| model(p, x) - y).collect::<Vec<_>>();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k0 in [1e-3, 0.5 * sigma0, sigma0, 2.0 * sigma0, 4.0 * sigma0] {
        let fit = least_squares(&[ymax, depth, sigma0, x_at_min, k0], residuals);
        if fit.params.iter().all(|v| v.is_finite()) && best.as_ref().is_none_or(|b| fit.cost < b.0) {
            best = Some((fit.cost, fit.params));
        }
    }
    let (cost, p) = best.ok_or(Error::Convergence { residual: f64::INFINITY })?;
    let rms = (cost / samples.len() as f64).sqrt();
    if rms > 0.1 * depth {
        return Err(Error::Convergence { residual: rms });
    }
    DipModel::new(p[0], p[1], p[2], p[3], p[4]).map_err(|_| Error::Convergence { residual: rms })
}

/// Samples the model on `count` evenly spaced delays in `[lo, hi]`.
pub fn dip_curve(params: &DipModel, lo: f64, hi: f64, count: usize) -> Vec<(f64, f64)> {
    let step = if count > 1 { (hi - lo) / (count - 1) as f64 } else { 0.0 };
    (0..count).map(|i| {
        let x = lo + step * i as f64;
        (x, hom_dip(x, params))
    }).collect()
}
