//! Pseudo-PNR detection statistics and least-squares state tomography on the
//! two-photon polarization space.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::basis::HermitianFrame;
use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::fock::{lift_on, FockBasis, ScatteringUnitary};
use crate::linalg::{
    c, hermitian_eigen, hermitian_function, hermitian_to_real, numerical_rank, trace, trace_product, CMatrix, RMatrix,
    RVector,
};
use crate::optics::qh_unitary;
use crate::transfer::{clip_to_density, DensityState, EIGEN_TOL};

/// Quarter-wave / half-wave angles in degrees of the six analysis settings.
pub const TOMOGRAPHY_ANGLES_DEG: [(f64, f64); 6] =
    [(0.0, 0.0), (0.0, 11.25), (0.0, 22.5), (22.5, 0.0), (22.5, 22.5), (45.0, 22.5)];

/// One analysis setting: `E_i = V_QH† P_i V_QH` for the Fock projectors
/// `P_{2,0}`, `P_{1,1}`, `P_{0,2}`.
#[derive(Clone, Debug)]
pub struct MeasurementSetting {
    pub qwp_angle: f64,
    pub hwp_angle: f64,
    pub v_qh: CMatrix,
    pub povm: [CMatrix; 3],
}

impl MeasurementSetting {
    pub fn new(qwp_angle: f64, hwp_angle: f64, basis: &Arc<FockBasis>) -> Result<Self> {
        if basis.photons() != 2 || basis.modes() != 2 {
            return Err(Error::InvalidInput("analysis settings act on the 2-photon 2-mode space".into()));
        }
        let s = ScatteringUnitary::new(qh_unitary(qwp_angle, hwp_angle))?;
        let v = lift_on(&s, basis)?.matrix().clone();
        let povm = [0, 1, 2].map(|k| {
            let row = v.row(k);
            row.adjoint() * row
        });
        Ok(MeasurementSetting { qwp_angle, hwp_angle, v_qh: v, povm })
    }

    /// `tr(ρ E_i)` for the three outcomes.
    pub fn probabilities(&self, rho: &CMatrix) -> [f64; 3] {
        [0, 1, 2].map(|k| trace_product(rho, &self.povm[k]).re)
    }
}

/// The six settings used for reconstruction.
pub fn tomography_settings() -> Result<Vec<MeasurementSetting>> {
    let basis = Arc::new(FockBasis::new(2, 2)?);
    TOMOGRAPHY_ANGLES_DEG
        .iter()
        .map(|&(q, h)| MeasurementSetting::new(q.to_radians(), h.to_radians(), &basis))
        .collect()
}

/// Rows are the real coordinates of every POVM element.
pub fn povm_design_matrix(settings: &[MeasurementSetting]) -> RMatrix {
    let rows: Vec<RVector> = settings.iter().flat_map(|s| s.povm.iter().map(hermitian_to_real)).collect();
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    RMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// Number of linearly independent POVM elements at tolerance `1e−8`.
pub fn povm_rank(settings: &[MeasurementSetting]) -> usize {
    numerical_rank(&povm_design_matrix(settings), 1e-8)
}

/// How two-photon detection events are registered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DetectorModel {
    /// Every shot is resolved into its Fock class.
    #[default]
    Ideal,
    /// Each output mode feeds a 50:50 fiber splitter and two click
    /// detectors; only coincidences between two detectors are recorded.
    Splitting,
}

impl fmt::Display for DetectorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorModel::Ideal => "ideal",
            DetectorModel::Splitting => "splitting",
        })
    }
}

impl FromStr for DetectorModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(DetectorModel::Ideal),
            "splitting" => Ok(DetectorModel::Splitting),
            other => Err(Error::InvalidInput(format!("unknown detector model '{other}'"))),
        }
    }
}

/// Detector pairs `{1,2}, {1,3}, {1,4}, {2,3}, {2,4}, {3,4}`; detectors 1
/// and 2 watch the H output, 3 and 4 the V output.
pub const DETECTOR_PAIRS: [(u8, u8); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// Counts recorded for one setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingCounts {
    pub qwp_deg: f64,
    pub hwp_deg: f64,
    pub shots: u64,
    /// Events attributed to `|2,0⟩`, `|1,1⟩`, `|0,2⟩`.
    pub counts: [u64; 3],
    /// Per-pair coincidences (splitting model only), ordered as
    /// [`DETECTOR_PAIRS`].
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pair_counts: Option<[u64; 6]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub detector_model: DetectorModel,
    pub settings: Vec<SettingCounts>,
}

fn multinomial<R: Rng + ?Sized>(shots: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut remaining = shots;
    let mut mass = 1.0_f64;
    let mut out = vec![0u64; probs.len()];
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            out[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q).expect("probability in [0, 1]").sample(rng);
        out[i] = k;
        remaining -= k;
        mass -= p;
    }
    out
}

fn sanitize(p: [f64; 3]) -> [f64; 3] {
    let clipped = p.map(|x| x.max(0.0));
    let total: f64 = clipped.iter().sum();
    clipped.map(|x| x / total)
}

/// Exact outcome probabilities for every setting.
pub fn exact_probabilities(rho: &CMatrix, settings: &[MeasurementSetting]) -> Vec<[f64; 3]> {
    settings.iter().map(|s| s.probabilities(rho)).collect()
}

/// Draws `shots` events per setting.
pub fn simulate_counts<R: Rng + ?Sized>(
    rho: &CMatrix,
    settings: &[MeasurementSetting],
    shots: u64,
    rng: &mut R,
    model: DetectorModel,
) -> Result<CountRecord> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(settings.len());
    for s in settings {
        let p = sanitize(s.probabilities(rho));
        let (counts, pair_counts) = match model {
            DetectorModel::Ideal => {
                let k = multinomial(shots, &p, rng);
                ([k[0], k[1], k[2]], None)
            }
            DetectorModel::Splitting => {
                // pair outcomes in DETECTOR_PAIRS order, then "no coincidence"
                let q = [
                    0.5 * p[0],
                    0.25 * p[1],
                    0.25 * p[1],
                    0.25 * p[1],
                    0.25 * p[1],
                    0.5 * p[2],
                    0.5 * (p[0] + p[2]),
                ];
                let k = multinomial(shots, &q, rng);
                let pairs = [k[0], k[1], k[2], k[3], k[4], k[5]];
                ([k[0], k[1] + k[2] + k[3] + k[4], k[5]], Some(pairs))
            }
        };
        out.push(SettingCounts {
            qwp_deg: s.qwp_angle.to_degrees(),
            hwp_deg: s.hwp_angle.to_degrees(),
            shots,
            counts,
            pair_counts,
        });
    }
    Ok(CountRecord { detector_model: model, settings: out })
}

/// Per-setting outcome frequencies. Splitting-model bunched counts are
/// doubled before renormalization.
pub fn corrected_probabilities(record: &CountRecord) -> Result<Vec<[f64; 3]>> {
    record
        .settings
        .iter()
        .map(|s| {
            let w = match record.detector_model {
                DetectorModel::Ideal => [1.0, 1.0, 1.0],
                DetectorModel::Splitting => [2.0, 1.0, 2.0],
            };
            let v = [0, 1, 2].map(|i| w[i] * s.counts[i] as f64);
            let total: f64 = v.iter().sum();
            if total <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "setting ({}°, {}°) recorded no events",
                    s.qwp_deg, s.hwp_deg
                )));
            }
            Ok(v.map(|x| x / total))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReconstructionMethod {
    /// Linear least squares, then eigenvalue clipping.
    #[default]
    LinearClip,
    /// Linear estimate refined over `ρ = TT†/tr(TT†)`.
    CholeskyRefined,
}

#[derive(Clone, Debug)]
pub struct TomographyResult {
    pub rho_hat: DensityState,
    /// `Σ_i [tr(ρ̂ E_i) − p_i]²`.
    pub residual: f64,
    pub fidelity_vs: Option<f64>,
    pub method: ReconstructionMethod,
}

impl Serialize for TomographyResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TomographyResult", 4)?;
        st.serialize_field("rho_hat", &crate::json::matrix_to_rows(self.rho_hat.rho()))?;
        st.serialize_field("residual", &self.residual)?;
        st.serialize_field("fidelity_vs", &self.fidelity_vs)?;
        st.serialize_field("method", &self.method)?;
        st.end()
    }
}

fn objective(rho: &CMatrix, probs: &[[f64; 3]], settings: &[MeasurementSetting]) -> f64 {
    settings
        .iter()
        .zip(probs)
        .map(|(s, p)| s.probabilities(rho).iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
        .sum()
}

/// Reconstructs `ρ` from per-setting probabilities.
pub fn reconstruct_ls(
    probs: &[[f64; 3]],
    settings: &[MeasurementSetting],
    frame: &Arc<HermitianFrame>,
    method: ReconstructionMethod,
) -> Result<TomographyResult> {
    if probs.len() != settings.len() {
        return Err(Error::DimensionMismatch { expected: settings.len(), found: probs.len() });
    }
    let dim = frame.dim();
    if settings.iter().any(|s| s.v_qh.nrows() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: settings[0].v_qh.nrows() });
    }
    let required = dim * dim;
    let rank = povm_rank(settings);
    if rank < required {
        return Err(Error::RankDeficient { rank, required });
    }
    // ρ = I/M + Σ_{i≥1} x_i H_i with traceless frame elements H_i
    let traceless = &frame.elements()[1..];
    let rows = settings.len() * 3;
    let mut a = RMatrix::zeros(rows, traceless.len());
    let mut b = RVector::zeros(rows);
    for (si, s) in settings.iter().enumerate() {
        for (k, e) in s.povm.iter().enumerate() {
            let r = si * 3 + k;
            for (i, h) in traceless.iter().enumerate() {
                a[(r, i)] = trace_product(e, h).re;
            }
            b[r] = probs[si][k] - trace(e).re / dim as f64;
        }
    }
    let x = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rho = CMatrix::identity(dim, dim).unscale(dim as f64);
    for (xi, h) in x.iter().zip(traceless) {
        rho += h.scale(*xi);
    }
    let mut rho = clip_to_density(&rho)?;
    if method == ReconstructionMethod::CholeskyRefined {
        rho = cholesky_refine(&rho, probs, settings)?;
    }
    let residual = objective(&rho, probs, settings);
    Ok(TomographyResult {
        rho_hat: DensityState::lenient(rho, Arc::clone(frame))?,
        residual,
        fidelity_vs: None,
        method,
    })
}

fn lower_triangular_from_params(p: &[f64], d: usize) -> CMatrix {
    let mut t = CMatrix::zeros(d, d);
    let mut idx = 0;
    for i in 0..d {
        t[(i, i)] = c(p[idx], 0.0);
        idx += 1;
    }
    for i in 0..d {
        for j in 0..i {
            t[(i, j)] = c(p[idx], p[idx + 1]);
            idx += 2;
        }
    }
    t
}

fn density_from_params(p: &[f64], d: usize) -> CMatrix {
    let t = lower_triangular_from_params(p, d);
    let g = &t * t.adjoint();
    let tr = trace(&g).re.max(1e-300);
    g.unscale(tr)
}

fn cholesky_refine(start: &CMatrix, probs: &[[f64; 3]], settings: &[MeasurementSetting]) -> Result<CMatrix> {
    let d = start.nrows();
    let regularized = start + CMatrix::identity(d, d).scale(1e-6);
    let chol = regularized
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPhysical("starting point is not positive definite".into()))?;
    let l = chol.l();
    let mut x0 = Vec::with_capacity(d * d);
    x0.extend((0..d).map(|i| l[(i, i)].re));
    for i in 0..d {
        for j in 0..i {
            x0.push(l[(i, j)].re);
            x0.push(l[(i, j)].im);
        }
    }
    let fit = least_squares(&x0, |p| {
        let rho = density_from_params(p, d);
        settings
            .iter()
            .zip(probs)
            .flat_map(|(s, pr)| {
                let q = s.probabilities(&rho);
                [q[0] - pr[0], q[1] - pr[1], q[2] - pr[2]]
            })
            .collect()
    });
    let refined = density_from_params(&fit.params, d);
    if objective(&refined, probs, settings) <= objective(start, probs, settings) {
        Ok((&refined + refined.adjoint()).scale(0.5))
    } else {
        Ok(start.clone())
    }
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))² = ‖√ρ √σ‖₁²`.
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() || !rho.is_square() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), found: sigma.nrows() });
    }
    for m in [rho, sigma] {
        let (values, _) = hermitian_eigen(m);
        if values.iter().any(|&v| v < -EIGEN_TOL) {
            return Err(Error::NotPhysical("fidelity argument is not positive semidefinite".into()));
        }
    }
    let root_of = |m: &CMatrix| hermitian_function(m, |x| c(if x > EIGEN_TOL { x.sqrt() } else { 0.0 }, 0.0));
    let product = root_of(rho) * root_of(sigma);
    let root: f64 = product.singular_values().iter().sum();
    Ok((root * root).clamp(0.0, 1.0))
}
