//! Simulation of the two-photon polarization experiment: state preparation,
//! tomography, direct invariant measurement, the HOM dip fit and the
//! conservation suite.

pub mod conserve;
pub mod dip;
pub mod direct;
pub mod manifest;
pub mod prepare;
pub mod tomography;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use conserve::{run_conservation, ConserveCell, ConserveConfig, ConserveReport, UnitarySpec};
pub use dip::{fit_hom_dip, hom_dip, DipModel};
pub use direct::{direct_measure_itprime, DirectEstimate, ShotBudget};
pub use manifest::{content_hash, RunManifest};
pub use prepare::{prepare_state_hom, prepare_state_hom_oracle, PreparedState};
pub use tomography::{
    corrected_probabilities, exact_probabilities, fidelity, reconstruct_ls, simulate_counts, tomography_settings,
    CountRecord, DetectorModel, ReconstructionMethod, TomographyResult,
};

/// Per-trial generator: stream `trial` of the ChaCha8 generator keyed by
/// `master`. Results depend only on `(master, trial)`.
pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng
}
