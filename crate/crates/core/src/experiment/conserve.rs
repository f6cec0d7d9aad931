//! Conservation suite: prepared states evolved by a set of polarization
//! unitaries, with invariants read out exactly, through tomography and
//! through direct measurement.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::HermitianFrame;
use crate::error::{Error, Result};
use crate::fock::{lift_on, ScatteringUnitary};
use crate::invariants::{invariants, InvariantSet};
use crate::json::serialize_sig12;
use crate::linalg::CMatrix;
use crate::optics::{experiment_unitaries, sample_haar_u2};

use super::direct::{direct_measure_itprime, ShotBudget};
use super::prepare::prepare_state_hom;
use super::tomography::{
    corrected_probabilities, exact_probabilities, reconstruct_ls, simulate_counts, tomography_settings,
    DetectorModel, ReconstructionMethod,
};
use super::trial_rng;

/// Named polarization unitary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnitarySpec {
    pub name: String,
    #[serde(with = "crate::json::complex_matrix")]
    pub matrix: CMatrix,
}

impl UnitarySpec {
    /// The eight experiment unitaries `U₁ … U₈`.
    pub fn experiment_set() -> Vec<UnitarySpec> {
        experiment_unitaries().into_iter().map(|u| UnitarySpec { name: u.name, matrix: u.matrix }).collect()
    }

    /// `count` Haar samples, sample `i` drawn from stream `i` of `seed`.
    pub fn haar_set(count: usize, seed: u64) -> Vec<UnitarySpec> {
        (0..count)
            .map(|i| {
                let (_, matrix) = sample_haar_u2(&mut trial_rng(seed, i as u64));
                UnitarySpec { name: format!("haar{}", i + 1), matrix }
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConserveConfig {
    /// Half-wave angles of the prepared states, in degrees.
    pub thetas_deg: Vec<f64>,
    pub unitaries: Vec<UnitarySpec>,
    /// `None` runs every method with exact probabilities.
    pub shots: Option<u64>,
    pub detector_model: DetectorModel,
    pub method: ReconstructionMethod,
    pub master_seed: u64,
}

/// One (state, unitary) cell.
#[derive(Clone, Debug, Serialize)]
pub struct ConserveCell {
    pub theta_deg: f64,
    pub unitary: String,
    pub input: InvariantSet,
    pub evolved: InvariantSet,
    #[serde(serialize_with = "serialize_sig12")]
    pub exact_deviation: f64,
    #[serde(serialize_with = "serialize_sig12")]
    pub tomography_i_t_prime: f64,
    #[serde(serialize_with = "serialize_sig12")]
    pub tomography_fidelity: f64,
    #[serde(serialize_with = "serialize_sig12")]
    pub direct_i_t_prime: f64,
    #[serde(serialize_with = "serialize_sig12")]
    pub direct_std_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConserveReport {
    pub cells: Vec<ConserveCell>,
    /// Largest `|I_X(evolved) − I_X(input)|` over cells and invariants.
    #[serde(serialize_with = "serialize_sig12")]
    pub max_exact_deviation: f64,
    /// RMS of tomography `I_t′` about the input value.
    #[serde(serialize_with = "serialize_sig12")]
    pub tomography_spread: f64,
    /// RMS of direct `I_t′` about the input value.
    #[serde(serialize_with = "serialize_sig12")]
    pub direct_spread: f64,
}

/// Runs every cell; cell `i` (row-major over states then unitaries) draws
/// from stream `i` of the master seed.
pub fn run_conservation(config: &ConserveConfig, frame: &Arc<HermitianFrame>) -> Result<ConserveReport> {
    if config.thetas_deg.is_empty() || config.unitaries.is_empty() {
        return Err(Error::InvalidInput("conservation suite needs at least one state and one unitary".into()));
    }
    let settings = tomography_settings()?;
    let budget = match config.shots {
        None => ShotBudget::Exact,
        Some(k) => ShotBudget::PerObservable(k),
    };
    let lifted = config
        .unitaries
        .iter()
        .map(|u| lift_on(&ScatteringUnitary::new(u.matrix.clone())?, frame.basis()))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::with_capacity(config.thetas_deg.len() * lifted.len());
    for &theta_deg in &config.thetas_deg {
        let prepared = prepare_state_hom(theta_deg.to_radians(), frame)?;
        let input = invariants(&prepared.state)?;
        for (u, v) in config.unitaries.iter().zip(&lifted) {
            let mut rng = trial_rng(config.master_seed, cells.len() as u64);
            let evolved_state = prepared.state.evolve(v)?;
            let evolved = invariants(&evolved_state)?;
            let probs = match config.shots {
                None => exact_probabilities(evolved_state.rho(), &settings),
                Some(k) => corrected_probabilities(&simulate_counts(
                    evolved_state.rho(),
                    &settings,
                    k,
                    &mut rng,
                    config.detector_model,
                )?)?,
            };
            let tomo = reconstruct_ls(&probs, &settings, frame, config.method)?;
            let tomo_inv = invariants(&tomo.rho_hat)?;
            let tomography_fidelity = super::fidelity(tomo.rho_hat.rho(), evolved_state.rho())?;
            let direct = direct_measure_itprime(&evolved_state, budget, &mut rng)?;
            cells.push(ConserveCell {
                theta_deg,
                unitary: u.name.clone(),
                exact_deviation: input.max_deviation(&evolved),
                input,
                evolved,
                tomography_i_t_prime: tomo_inv.i_t_prime,
                tomography_fidelity,
                direct_i_t_prime: direct.i_t_prime,
                direct_std_error: direct.std_error,
            });
        }
    }
    let rms = |f: &dyn Fn(&ConserveCell) -> f64| {
        (cells.iter().map(|c| (f(c) - c.input.i_t_prime).powi(2)).sum::<f64>() / cells.len() as f64).sqrt()
    };
    let tomography_spread = rms(&|c| c.tomography_i_t_prime);
    let direct_spread = rms(&|c| c.direct_i_t_prime);
    let max_exact_deviation = cells.iter().map(|c| c.exact_deviation).fold(0.0, f64::max);
    Ok(ConserveReport { cells, max_exact_deviation, tomography_spread, direct_spread })
}
