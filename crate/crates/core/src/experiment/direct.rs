//! Direct estimation of `I_t′` from photon counting.
//!
//! Each traceless tangent observable is measured by mapping it onto a
//! number-operator combination: diagonal ones are read from plain counting;
//! for an off-diagonal pair `(j, k)` a two-mode rotation turns it into
//! `(n̂_j − n̂_k)/√2`. On two modes these rotations are `H(22.5°)` for the
//! symmetric observable and `Q(0°)` followed by `H(22.5°)` for the
//! antisymmetric one.

use std::f64::consts::FRAC_PI_8;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::GeneratorKind;
use crate::error::{Error, Result};
use crate::fock::{lift_on, ScatteringUnitary};
use crate::invariants::tangent_norm;
use crate::linalg::{c, trace_product, CMatrix};
use crate::optics::{half_wave, qh_unitary};
use crate::transfer::DensityState;

/// Minimum shots per observable.
pub const MIN_SHOTS_PER_OBSERVABLE: u64 = 3;

/// Exact expectation values or a finite shot budget per observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotBudget {
    Exact,
    PerObservable(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectEstimate {
    pub i_t_prime: f64,
    pub std_error: f64,
    /// Estimated `⟨O_i⟩` for `i = 1 … m²−1`.
    pub expectations: Vec<f64>,
    pub expectation_errors: Vec<f64>,
}

/// Mode unitary `W` with `W† (E_jj − E_kk) W ∝ h` for the off-diagonal
/// generator `h` of the given kind, embedded in `m` modes.
fn analysis_rotation(m: usize, kind: GeneratorKind) -> Option<CMatrix> {
    let (block, j, k) = match kind {
        GeneratorKind::Symmetric { j, k } => (half_wave(FRAC_PI_8), j, k),
        GeneratorKind::Antisymmetric { j, k } => (qh_unitary(0.0, FRAC_PI_8), j, k),
        _ => return None,
    };
    let mut w = CMatrix::identity(m, m);
    w[(j, j)] = block[(0, 0)];
    w[(j, k)] = block[(0, 1)];
    w[(k, j)] = block[(1, 0)];
    w[(k, k)] = block[(1, 1)];
    Some(w)
}

/// Per-basis-state outcome value of the counted observable.
fn readout_values(state: &DensityState, kind: GeneratorKind, generator: &CMatrix) -> Vec<f64> {
    let basis = state.frame().basis();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    basis
        .states()
        .iter()
        .map(|s| {
            let n = s.occupations();
            match kind {
                GeneratorKind::Symmetric { j, k } | GeneratorKind::Antisymmetric { j, k } => {
                    r * (n[j] as f64 - n[k] as f64)
                }
                _ => (0..n.len()).map(|q| generator[(q, q)].re * n[q] as f64).sum(),
            }
        })
        .collect()
}

fn sample_mean<R: Rng + ?Sized>(probs: &[f64], values: &[f64], shots: u64, rng: &mut R) -> (f64, f64) {
    let total: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let cdf: Vec<f64> = probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p.max(0.0) / total;
            Some(*acc)
        })
        .collect();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..shots {
        let u: f64 = rng.random();
        let idx = cdf.iter().position(|&x| u < x).unwrap_or(cdf.len() - 1);
        let v = values[idx];
        sum += v;
        sum_sq += v * v;
    }
    let n = shots as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

/// Estimates `I_t′ = Σ ⟨O_i⟩² / C(m+n, m+1)` with a propagated standard error.
pub fn direct_measure_itprime<R: Rng + ?Sized>(
    state: &DensityState,
    budget: ShotBudget,
    rng: &mut R,
) -> Result<DirectEstimate> {
    if let ShotBudget::PerObservable(k) = budget {
        if k < MIN_SHOTS_PER_OBSERVABLE {
            return Err(Error::InvalidInput(format!(
                "shot budget {k} is below {MIN_SHOTS_PER_OBSERVABLE} per observable"
            )));
        }
    }
    let frame = state.frame();
    let (n, m) = (frame.photons(), frame.modes());
    let modes = frame.mode_basis();
    let mut expectations = Vec::with_capacity(m * m - 1);
    let mut errors = Vec::with_capacity(m * m - 1);
    for (i, kind) in modes.kinds().iter().enumerate().skip(1) {
        let o = &frame.raw_observables()[i];
        match budget {
            ShotBudget::Exact => {
                expectations.push(trace_product(state.rho(), o).re);
                errors.push(0.0);
            }
            ShotBudget::PerObservable(shots) => {
                let rotated = match analysis_rotation(m, *kind) {
                    Some(w) => {
                        let v = lift_on(&ScatteringUnitary::new(w)?, frame.basis())?;
                        v.matrix() * state.rho() * v.matrix().adjoint()
                    }
                    None => state.rho().clone(),
                };
                let probs: Vec<f64> = rotated.diagonal().iter().map(|z| z.re).collect();
                let values = readout_values(state, *kind, &modes.elements()[i]);
                let (mean, err) = sample_mean(&probs, &values, shots, rng);
                expectations.push(mean);
                errors.push(err);
            }
        }
    }
    let norm = tangent_norm(n, m);
    let i_t_prime = expectations.iter().map(|x| x * x).sum::<f64>() / norm;
    let std_error = expectations
        .iter()
        .zip(&errors)
        .map(|(x, e)| (2.0 * x * e / norm).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(DirectEstimate { i_t_prime, std_error, expectations, expectation_errors: errors })
}

/// The analysis rotations reproduce the target observables:
/// `φ(W)† · readout · φ(W) = O_i`. Exposed for verification.
pub fn rotated_readout_observable(state: &DensityState, index: usize) -> Result<CMatrix> {
    let frame = state.frame();
    let m = frame.modes();
    let kind = frame.mode_basis().kinds()[index];
    let values = readout_values(state, kind, &frame.mode_basis().elements()[index]);
    let d = CMatrix::from_diagonal(&crate::linalg::CVector::from_iterator(values.len(), values.iter().map(|&v| c(v, 0.0))));
    match analysis_rotation(m, kind) {
        Some(w) => {
            let v = lift_on(&ScatteringUnitary::new(w)?, frame.basis())?;
            Ok(v.matrix().adjoint() * d * v.matrix())
        }
        None => Ok(d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::HermitianFrame;
    use crate::experiment::prepare::prepare_state_hom;
    use crate::invariants::invariants;
    use crate::linalg::{max_abs_diff, random_density};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn readout_rotations_reproduce_observables() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for (n, m) in [(1, 2), (2, 2), (3, 2), (2, 3)] {
            let f = Arc::new(HermitianFrame::build(n, m).unwrap());
            let s = DensityState::new(random_density(f.dim(), 2, &mut rng), Arc::clone(&f)).unwrap();
            for i in 1..m * m {
                let o = rotated_readout_observable(&s, i).unwrap();
                assert!(max_abs_diff(&o, &f.raw_observables()[i]) < 1e-12, "n={n} m={m} i={i}");
            }
        }
    }

    #[test]
    fn exact_mode_matches_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        for (n, m) in [(2, 2), (3, 2), (2, 3)] {
            let f = Arc::new(HermitianFrame::build(n, m).unwrap());
            for _ in 0..10 {
                let s = DensityState::new(random_density(f.dim(), 2, &mut rng), Arc::clone(&f)).unwrap();
                let d = direct_measure_itprime(&s, ShotBudget::Exact, &mut rng).unwrap();
                assert!((d.i_t_prime - invariants(&s).unwrap().i_t_prime).abs() < 1e-12);
                assert_eq!(d.std_error, 0.0);
            }
        }
    }

    #[test]
    fn exact_mode_on_reference_states() {
        let f = Arc::new(HermitianFrame::build(2, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let s = prepare_state_hom(22.5f64.to_radians(), &f).unwrap();
        let d = direct_measure_itprime(&s.state, ShotBudget::Exact, &mut rng).unwrap();
        assert!((d.i_t_prime - 4.0 / 9.0).abs() < 1e-12);
        let mixed = DensityState::maximally_mixed(Arc::clone(&f));
        let d = direct_measure_itprime(&mixed, ShotBudget::Exact, &mut rng).unwrap();
        assert!(d.i_t_prime.abs() < 1e-14);
    }

    #[test]
    fn tiny_budget_rejected() {
        let f = Arc::new(HermitianFrame::build(2, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(84);
        let s = DensityState::maximally_mixed(f);
        assert!(direct_measure_itprime(&s, ShotBudget::PerObservable(2), &mut rng).is_err());
        assert!(direct_measure_itprime(&s, ShotBudget::PerObservable(3), &mut rng).is_ok());
    }

    #[test]
    fn sampled_estimate_within_error() {
        let f = Arc::new(HermitianFrame::build(2, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(85);
        let s = prepare_state_hom(30f64.to_radians(), &f).unwrap();
        let truth = invariants(&s.state).unwrap().i_t_prime;
        let d = direct_measure_itprime(&s.state, ShotBudget::PerObservable(100_000), &mut rng).unwrap();
        assert!(d.std_error > 0.0 && d.std_error < 0.01);
        assert!((d.i_t_prime - truth).abs() < 5.0 * d.std_error + 1e-4);
    }
}
