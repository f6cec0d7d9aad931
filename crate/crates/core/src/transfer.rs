//! Density vectors and Hermitian transfer matrices.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{HermitianFrame, ModeHermitianBasis};
use crate::error::{Error, Result};
use crate::fock::{lift_on, MultiPhotonUnitary, ScatteringUnitary};
use crate::linalg::{
    c, hermitian_eigen, hermitian_to_real, hermiticity_error, projector, trace, trace_product, CMatrix, CVector,
    RMatrix, RVector,
};

/// Hermiticity and trace tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted in strict validation.
pub const EIGEN_TOL: f64 = 1e-9;

/// Checks that `rho` is Hermitian, unit-trace and positive semidefinite.
pub fn validate_density(rho: &CMatrix) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::NotPhysical(format!("{}x{} matrix is not square", rho.nrows(), rho.ncols())));
    }
    let herr = hermiticity_error(rho);
    if herr > DENSITY_TOL {
        return Err(Error::NotHermitian(herr));
    }
    let tr = trace(rho);
    if (tr - c(1.0, 0.0)).norm() > DENSITY_TOL {
        return Err(Error::NotPhysical(format!("trace is {tr}")));
    }
    let (values, _) = hermitian_eigen(rho);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -EIGEN_TOL {
        return Err(Error::NotPhysical(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// Nearest density matrix by eigenvalue clipping: hermitize, clip negative
/// eigenvalues to zero, renormalize the trace.
pub fn clip_to_density(rho: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(rho);
    let clipped: Vec<f64> = values.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::NotPhysical("no positive spectral weight to renormalize".into()));
    }
    let mut scaled = vectors.clone();
    for (j, &v) in clipped.iter().enumerate() {
        for z in scaled.column_mut(j).iter_mut() {
            *z *= v / total;
        }
    }
    let out = scaled * vectors.adjoint();
    Ok((&out + out.adjoint()).scale(0.5))
}

/// A density matrix together with its real coefficients `tr(H_i ρ)`.
#[derive(Clone, Debug)]
pub struct DensityState {
    rho: CMatrix,
    frame: Arc<HermitianFrame>,
    coeffs: RVector,
}

impl DensityState {
    /// Strict constructor; rejects non-physical `rho`.
    pub fn new(rho: CMatrix, frame: Arc<HermitianFrame>) -> Result<Self> {
        check_dim(rho.nrows(), &frame)?;
        validate_density(&rho)?;
        let coeffs = frame.coefficients(&rho);
        Ok(DensityState { rho, frame, coeffs })
    }

    /// Lenient constructor for noisy estimates: clips and renormalizes.
    pub fn lenient(rho: CMatrix, frame: Arc<HermitianFrame>) -> Result<Self> {
        check_dim(rho.nrows(), &frame)?;
        let rho = clip_to_density(&rho)?;
        Self::new(rho, frame)
    }

    /// `|ψ⟩⟨ψ|` for a state vector (normalized here).
    pub fn from_pure(psi: &CVector, frame: Arc<HermitianFrame>) -> Result<Self> {
        check_dim(psi.len(), &frame)?;
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::NotPhysical("zero state vector".into()));
        }
        Self::new(projector(&psi.unscale(norm)), frame)
    }

    pub fn maximally_mixed(frame: Arc<HermitianFrame>) -> Self {
        let d = frame.dim();
        let rho = CMatrix::identity(d, d).unscale(d as f64);
        let coeffs = frame.coefficients(&rho);
        DensityState { rho, frame, coeffs }
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn frame(&self) -> &Arc<HermitianFrame> {
        &self.frame
    }

    pub fn coeffs(&self) -> &RVector {
        &self.coeffs
    }

    /// `Σ_i coeffs[i] H_i`.
    pub fn reconstruct(&self) -> CMatrix {
        self.frame.reconstruct(&self.coeffs)
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.rho, &self.rho).re
    }

    /// `V ρ V†`.
    pub fn evolve(&self, v: &MultiPhotonUnitary) -> Result<Self> {
        check_dim(v.dim(), &self.frame)?;
        let rho = v.matrix() * &self.rho * v.matrix().adjoint();
        let rho = (&rho + rho.adjoint()).scale(0.5);
        let coeffs = self.frame.coefficients(&rho);
        Ok(DensityState { rho, frame: Arc::clone(&self.frame), coeffs })
    }
}

/// `density_vector(rho, frame)`.
pub fn density_vector(rho: &CMatrix, frame: &Arc<HermitianFrame>) -> Result<DensityState> {
    DensityState::new(rho.clone(), Arc::clone(frame))
}

fn check_dim(found: usize, frame: &HermitianFrame) -> Result<()> {
    if found != frame.dim() {
        return Err(Error::DimensionMismatch { expected: frame.dim(), found });
    }
    Ok(())
}

/// Partition class of a frame index: 0 photon number, 1 traceless tangent,
/// 2 perpendicular.
fn class_of(i: usize, tangent_len: usize) -> u8 {
    match i {
        0 => 0,
        _ if i < tangent_len => 1,
        _ => 2,
    }
}

/// Cross-block checks beyond this many entries are sampled.
pub const DENSE_BLOCK_CHECK_LIMIT: usize = 4096;
/// Number of sampled cross-block entries for large matrices.
pub const SAMPLED_BLOCK_CHECKS: usize = 1000;

/// `(ℛ_V)_ij = tr(H_i V H_j V†)`.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    r: RMatrix,
    frame: Arc<HermitianFrame>,
}

impl TransferMatrix {
    pub fn matrix(&self) -> &RMatrix {
        &self.r
    }

    pub fn frame(&self) -> &Arc<HermitianFrame> {
        &self.frame
    }

    fn tangent_len(&self) -> usize {
        let m = self.frame.modes();
        m * m
    }

    /// The `m²×m²` block on the full tangent space (index 0 included).
    pub fn tangent_block(&self) -> RMatrix {
        let t = self.tangent_len();
        self.r.view((0, 0), (t, t)).into_owned()
    }

    /// The `(m²−1)×(m²−1)` block on the traceless tangent space.
    pub fn traceless_tangent_block(&self) -> RMatrix {
        let t = self.tangent_len();
        self.r.view((1, 1), (t - 1, t - 1)).into_owned()
    }

    pub fn perpendicular_block(&self) -> RMatrix {
        let t = self.tangent_len();
        let n = self.r.nrows();
        self.r.view((t, t), (n - t, n - t)).into_owned()
    }

    /// `‖RᵀR − I‖∞`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.r.nrows();
        (self.r.transpose() * &self.r - RMatrix::identity(n, n)).amax()
    }

    /// Largest `|R_ij|` with `i`, `j` in different partition classes. Dense
    /// for `M² ≤ 4096`, otherwise over 1000 pairs drawn with a fixed seed.
    pub fn max_cross_block(&self) -> f64 {
        let n = self.r.nrows();
        let t = self.tangent_len();
        if n <= DENSE_BLOCK_CHECK_LIMIT {
            let mut worst = 0.0_f64;
            for j in 0..n {
                for i in 0..n {
                    if class_of(i, t) != class_of(j, t) {
                        worst = worst.max(self.r[(i, j)].abs());
                    }
                }
            }
            return worst;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_b10c);
        let mut worst = 0.0_f64;
        let mut drawn = 0;
        while drawn < SAMPLED_BLOCK_CHECKS {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            if class_of(i, t) != class_of(j, t) {
                worst = worst.max(self.r[(i, j)].abs());
                drawn += 1;
            }
        }
        worst
    }

    /// Checks the structure every LON lift must have: orthogonality,
    /// block-diagonality and `R[0,0] = 1`.
    pub fn validate_lon(&self) -> Result<()> {
        let orth = self.orthogonality_error();
        if orth >= 1e-9 {
            return Err(Error::BlockStructure(format!("‖RᵀR − I‖ = {orth:e}")));
        }
        let cross = self.max_cross_block();
        if cross >= 1e-10 {
            return Err(Error::BlockStructure(format!("cross-block entry {cross:e}")));
        }
        let r00 = (self.r[(0, 0)] - 1.0).abs();
        if r00 >= 1e-10 {
            return Err(Error::BlockStructure(format!("|R00 − 1| = {r00:e}")));
        }
        Ok(())
    }

    /// Density-vector evolution `|ρ⟩⟩ ↦ ℛ|ρ⟩⟩`.
    pub fn apply(&self, coeffs: &RVector) -> RVector {
        &self.r * coeffs
    }
}

/// Full `M²×M²` transfer matrix of an arbitrary unitary on the frame's space.
pub fn htm(v: &MultiPhotonUnitary, frame: &Arc<HermitianFrame>) -> Result<TransferMatrix> {
    check_dim(v.dim(), frame)?;
    let u = v.matrix();
    let ud = u.adjoint();
    let count = frame.len();
    let mut images = RMatrix::zeros(count, count);
    for (j, h) in frame.elements().iter().enumerate() {
        let x = u * h * &ud;
        images.set_column(j, &hermitian_to_real(&x));
    }
    let r = frame.coords().transpose() * images;
    Ok(TransferMatrix { r, frame: Arc::clone(frame) })
}

/// Lifts `s` onto the frame's Fock space and returns its validated HTM.
pub fn htm_lon(s: &ScatteringUnitary, frame: &Arc<HermitianFrame>) -> Result<TransferMatrix> {
    let v = lift_on(s, frame.basis())?;
    let t = htm(&v, frame)?;
    t.validate_lon()?;
    Ok(t)
}

/// `(ℛ_S)_ij = tr(h_i S h_j S†)` on the mode basis.
pub fn htm_scattering(s: &ScatteringUnitary, modes: &ModeHermitianBasis) -> Result<RMatrix> {
    if s.modes() != modes.modes() {
        return Err(Error::DimensionMismatch { expected: modes.modes(), found: s.modes() });
    }
    let u = s.matrix();
    let ud = u.adjoint();
    let k = modes.len();
    let images: Vec<CMatrix> = modes.elements().iter().map(|h| u * h * &ud).collect();
    Ok(RMatrix::from_fn(k, k, |i, j| trace_product(&modes.elements()[i], &images[j]).re))
}
