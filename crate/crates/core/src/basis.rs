//! Orthonormal Hermitian frames.
//!
//! The mode-space basis is `{I/√m}` plus the normalized generalized Gell-Mann
//! matrices. Its Jordan–Schwinger images, normalized, span the tangent space
//! of LON generators on the `n`-photon Fock space; Gram–Schmidt completes
//! them to a basis of all `M×M` Hermitian matrices.
//!
//! Ordering of the mode-space basis: identity, then the diagonal family
//! `l = 1..m-1`, then for each pair `j < k` (lexicographic) the symmetric
//! element followed by the antisymmetric one. For `m = 2` this is
//! `I/√2, σ_z/√2, σ_x/√2, σ_y/√2`.

use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{binomial, FockBasis};
use crate::linalg::{c, hermitian_to_real, hermiticity_error, real_to_hermitian, CMatrix, RMatrix, RVector};

/// Default cap on `M` for frame construction (`M²` matrices of size `M×M`).
pub const DEFAULT_MAX_FRAME_DIM: usize = 36;

/// Residual norm below which a Gram–Schmidt candidate is discarded.
pub const GRAM_SCHMIDT_DROP_TOL: f64 = 1e-8;

/// Which Gell-Mann family a mode-space generator belongs to. Indices are
/// zero-based modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Identity,
    Diagonal { l: usize },
    Symmetric { j: usize, k: usize },
    Antisymmetric { j: usize, k: usize },
}

impl GeneratorKind {
    pub fn is_off_diagonal(&self) -> bool {
        matches!(self, GeneratorKind::Symmetric { .. } | GeneratorKind::Antisymmetric { .. })
    }
}

/// `{I/√m, λ_1, …, λ_{m²−1}}` with `tr(h_i h_j) = δ_ij`.
#[derive(Clone, Debug)]
pub struct ModeHermitianBasis {
    m: usize,
    elements: Vec<CMatrix>,
    kinds: Vec<GeneratorKind>,
}

impl ModeHermitianBasis {
    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn kinds(&self) -> &[GeneratorKind] {
        &self.kinds
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

pub fn generator_matrix(m: usize, kind: GeneratorKind) -> CMatrix {
    let mut h = CMatrix::zeros(m, m);
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GeneratorKind::Identity => {
            let v = 1.0 / (m as f64).sqrt();
            for j in 0..m {
                h[(j, j)] = c(v, 0.0);
            }
        }
        GeneratorKind::Diagonal { l } => {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            for j in 0..l {
                h[(j, j)] = c(norm, 0.0);
            }
            h[(l, l)] = c(-(l as f64) * norm, 0.0);
        }
        GeneratorKind::Symmetric { j, k } => {
            h[(j, k)] = c(r2, 0.0);
            h[(k, j)] = c(r2, 0.0);
        }
        GeneratorKind::Antisymmetric { j, k } => {
            h[(j, k)] = c(0.0, -r2);
            h[(k, j)] = c(0.0, r2);
        }
    }
    h
}

fn generator_kinds(m: usize) -> Vec<GeneratorKind> {
    let mut kinds = Vec::with_capacity(m * m);
    kinds.push(GeneratorKind::Identity);
    kinds.extend((1..m).map(|l| GeneratorKind::Diagonal { l }));
    for j in 0..m {
        for k in (j + 1)..m {
            kinds.push(GeneratorKind::Symmetric { j, k });
            kinds.push(GeneratorKind::Antisymmetric { j, k });
        }
    }
    kinds
}

/// Normalized identity plus generalized Gell-Mann matrices for `m` modes.
pub fn ggm_basis(m: usize) -> Result<ModeHermitianBasis> {
    if m == 0 {
        return Err(Error::InvalidInput("mode count must be at least 1".into()));
    }
    let kinds = generator_kinds(m);
    let elements = kinds.iter().map(|&k| generator_matrix(m, k)).collect();
    Ok(ModeHermitianBasis { m, elements, kinds })
}

/// Matrix of the second-quantized operator `Σ_kl h_kl a_k† a_l` in `basis`.
pub fn js_map(h: &CMatrix, basis: &FockBasis) -> Result<CMatrix> {
    let m = basis.modes();
    if h.nrows() != m || h.ncols() != m {
        return Err(Error::DimensionMismatch { expected: m, found: h.nrows() });
    }
    let herr = hermiticity_error(h);
    if herr > 1e-10 {
        return Err(Error::NotHermitian(herr));
    }
    let dim = basis.dim();
    let mut out = CMatrix::zeros(dim, dim);
    let mut scratch = vec![0usize; m];
    for (col, state) in basis.states().iter().enumerate() {
        let occ = state.occupations();
        for l in 0..m {
            if occ[l] == 0 {
                continue;
            }
            for k in 0..m {
                let hkl = h[(k, l)];
                if hkl.norm() == 0.0 {
                    continue;
                }
                scratch.copy_from_slice(occ);
                // a_l removes one photon (√n_l), a_k† adds one (√(n_k+1))
                let mut amp = (scratch[l] as f64).sqrt();
                scratch[l] -= 1;
                amp *= ((scratch[k] + 1) as f64).sqrt();
                scratch[k] += 1;
                let row = basis
                    .index_of_occupations(&scratch)
                    .expect("ladder operators preserve photon number");
                out[(row, col)] += hkl * amp;
            }
        }
    }
    Ok(out)
}

/// Unnormalized images `O_i = JS(h_i)` of the mode basis, plus the
/// normalized tangent elements `H_0 = O_0/√(n²M/m)`, `H_i = O_i/√C(m+n, m+1)`.
fn tangent_with_raw(basis: &FockBasis, modes: &ModeHermitianBasis) -> Result<(Vec<CMatrix>, Vec<CMatrix>)> {
    let n = basis.photons();
    let m = basis.modes();
    if n == 0 {
        return Err(Error::InvalidInput("tangent basis needs at least one photon".into()));
    }
    let big_m = basis.dim() as f64;
    let norm0 = ((n * n) as f64 * big_m / m as f64).sqrt();
    let norm = (binomial((m + n) as u64, (m + 1) as u64) as f64).sqrt();
    let mut raw = Vec::with_capacity(modes.len());
    let mut tangent = Vec::with_capacity(modes.len());
    for (i, h) in modes.elements().iter().enumerate() {
        let o = js_map(h, basis)?;
        let scale = if i == 0 { norm0 } else { norm };
        tangent.push(o.unscale(scale));
        raw.push(o);
    }
    Ok((raw, tangent))
}

/// The `m²` orthonormal tangent-space elements `H_0 … H_{m²−1}`.
pub fn tangent_basis(n: usize, m: usize) -> Result<Vec<CMatrix>> {
    let basis = FockBasis::new(n, m)?;
    let modes = ggm_basis(m)?;
    Ok(tangent_with_raw(&basis, &modes)?.1)
}

/// Gram–Schmidt completion of `tangent` to an orthonormal basis of `H(M)`.
///
/// Candidates are the `M²` elements of `ggm_basis(M)` in order; any whose
/// residual after two orthogonalization passes is below
/// [`GRAM_SCHMIDT_DROP_TOL`] is dropped.
pub fn perpendicular_basis(n: usize, m: usize, tangent: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let big_m = crate::fock::fock_dimension(n, m) as usize;
    perpendicular_for_dim(big_m, m, tangent)
}

fn perpendicular_for_dim(big_m: usize, m: usize, tangent: &[CMatrix]) -> Result<Vec<CMatrix>> {
    if tangent.len() != m * m {
        return Err(Error::InvalidInput(format!(
            "expected {} tangent elements, got {}",
            m * m,
            tangent.len()
        )));
    }
    for t in tangent {
        if t.nrows() != big_m {
            return Err(Error::DimensionMismatch { expected: big_m, found: t.nrows() });
        }
    }
    let target = big_m * big_m - m * m;
    let mut accepted: Vec<RVector> = tangent.iter().map(hermitian_to_real).collect();
    let seeds = ggm_basis(big_m)?;
    let mut out = Vec::with_capacity(target);
    for candidate in seeds.elements() {
        if out.len() == target {
            break;
        }
        let mut v = hermitian_to_real(candidate);
        for _ in 0..2 {
            for q in &accepted {
                let proj = q.dot(&v);
                v.axpy(-proj, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm < GRAM_SCHMIDT_DROP_TOL {
            continue;
        }
        v.unscale_mut(norm);
        out.push(real_to_hermitian(&v, big_m));
        accepted.push(v);
    }
    if out.len() != target {
        return Err(Error::RankDeficient { rank: out.len(), required: target });
    }
    Ok(out)
}

/// Index partition of a frame: `{0}`, traceless tangent, perpendicular.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FramePartition {
    pub photon_number: Range<usize>,
    pub traceless_tangent: Range<usize>,
    pub perpendicular: Range<usize>,
}

/// Complete orthonormal frame `H_0 … H_{M²−1}` of `H(M)`.
#[derive(Clone, Debug)]
pub struct HermitianFrame {
    n: usize,
    m: usize,
    basis: Arc<FockBasis>,
    modes: ModeHermitianBasis,
    elements: Vec<CMatrix>,
    raw_observables: Vec<CMatrix>,
    /// Column `i` holds the real coordinates of `H_i`; orthogonal.
    coords: RMatrix,
}

/// Tolerance used when validating a frame.
pub const FRAME_TOL: f64 = 1e-10;

impl HermitianFrame {
    pub fn build(n: usize, m: usize) -> Result<Self> {
        Self::build_with_cap(n, m, DEFAULT_MAX_FRAME_DIM)
    }

    pub fn build_with_cap(n: usize, m: usize, max_dim: usize) -> Result<Self> {
        let basis = Arc::new(FockBasis::with_cap(n, m, max_dim)?);
        let modes = ggm_basis(m)?;
        let (raw, tangent) = tangent_with_raw(&basis, &modes)?;
        let perp = perpendicular_for_dim(basis.dim(), m, &tangent)?;
        let mut elements = tangent;
        elements.extend(perp);
        let frame = Self::assemble(basis, modes, elements, raw);
        frame.validate()?;
        Ok(frame)
    }

    /// Assembles a frame from explicit elements (used by the on-disk cache).
    pub(crate) fn from_parts(n: usize, m: usize, elements: Vec<CMatrix>) -> Result<Self> {
        let basis = Arc::new(FockBasis::with_cap(n, m, crate::fock::DEFAULT_MAX_DIM)?);
        let dim = basis.dim();
        if elements.len() != dim * dim || elements.iter().any(|e| e.nrows() != dim || e.ncols() != dim) {
            return Err(Error::FrameCheck(format!("expected {} elements of size {dim}x{dim}", dim * dim)));
        }
        let modes = ggm_basis(m)?;
        let raw = modes
            .elements()
            .iter()
            .map(|h| js_map(h, &basis))
            .collect::<Result<Vec<_>>>()?;
        let frame = Self::assemble(basis, modes, elements, raw);
        frame.validate()?;
        Ok(frame)
    }

    fn assemble(basis: Arc<FockBasis>, modes: ModeHermitianBasis, elements: Vec<CMatrix>, raw: Vec<CMatrix>) -> Self {
        let dim = basis.dim();
        let mut coords = RMatrix::zeros(dim * dim, elements.len());
        for (i, e) in elements.iter().enumerate() {
            coords.set_column(i, &hermitian_to_real(e));
        }
        HermitianFrame {
            n: basis.photons(),
            m: basis.modes(),
            basis,
            modes,
            elements,
            raw_observables: raw,
            coords,
        }
    }

    /// Checks orthonormality, hermiticity, tracelessness of `H_{i≥1}`, and
    /// the trace identities of the raw observables.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        let count = dim * dim;
        if self.elements.len() != count {
            return Err(Error::FrameCheck(format!("{} elements, expected {count}", self.elements.len())));
        }
        for (i, e) in self.elements.iter().enumerate() {
            let herr = hermiticity_error(e);
            if herr > FRAME_TOL {
                return Err(Error::FrameCheck(format!("H_{i} not Hermitian ({herr:e})")));
            }
            if i > 0 {
                let tr = crate::linalg::trace(e).norm();
                if tr > FRAME_TOL {
                    return Err(Error::FrameCheck(format!("H_{i} has trace {tr:e}")));
                }
            }
        }
        let gram = self.coords.transpose() * &self.coords;
        let err = (gram - RMatrix::identity(count, count)).amax();
        if err > FRAME_TOL {
            return Err(Error::FrameCheck(format!("orthonormality error {err:e}")));
        }
        let (n, m) = (self.n as f64, self.m as f64);
        let c_norm = binomial((self.m + self.n) as u64, (self.m + 1) as u64) as f64;
        for (i, oi) in self.raw_observables.iter().enumerate() {
            for (j, oj) in self.raw_observables.iter().enumerate() {
                let t = crate::linalg::trace_product(oi, oj).re;
                let expected = match (i, j) {
                    (0, 0) => n * n * dim as f64 / m,
                    _ if i == j => c_norm,
                    _ => 0.0,
                };
                if (t - expected).abs() > 1e-8 * expected.abs().max(1.0) {
                    return Err(Error::FrameCheck(format!("tr(O_{i} O_{j}) = {t}, expected {expected}")));
                }
            }
        }
        Ok(())
    }

    pub fn photons(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    /// Fock-space dimension `M`.
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Number of frame elements, `M²`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn mode_basis(&self) -> &ModeHermitianBasis {
        &self.modes
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &CMatrix {
        &self.elements[i]
    }

    /// Unnormalized JS images `O_i`, `i < m²`.
    pub fn raw_observables(&self) -> &[CMatrix] {
        &self.raw_observables
    }

    pub fn tangent(&self) -> &[CMatrix] {
        &self.elements[..self.m * self.m]
    }

    pub fn perpendicular(&self) -> &[CMatrix] {
        &self.elements[self.m * self.m..]
    }

    pub fn partition(&self) -> FramePartition {
        let t = self.m * self.m;
        FramePartition {
            photon_number: 0..1,
            traceless_tangent: 1..t,
            perpendicular: t..self.len(),
        }
    }

    pub(crate) fn coords(&self) -> &RMatrix {
        &self.coords
    }

    /// `tr(H_i X)` for all `i`.
    pub fn coefficients(&self, x: &CMatrix) -> RVector {
        self.coords.transpose() * hermitian_to_real(x)
    }

    /// `Σ_i coeffs[i] H_i`.
    pub fn reconstruct(&self, coeffs: &RVector) -> CMatrix {
        real_to_hermitian(&(&self.coords * coeffs), self.dim())
    }

    /// Projector onto the span of the perpendicular elements, in real
    /// coordinates. Independent of the Gram–Schmidt ordering.
    pub fn perpendicular_projector(&self) -> RMatrix {
        span_projector(self.perpendicular())
    }
}

/// Orthogonal projector onto the span of an orthonormal set of Hermitian
/// matrices, in real coordinates.
pub fn span_projector(elements: &[CMatrix]) -> RMatrix {
    let d = elements.first().map(|e| e.nrows()).unwrap_or(0);
    let mut p = RMatrix::zeros(d * d, d * d);
    for e in elements {
        let v = hermitian_to_real(e);
        p += &v * v.transpose();
    }
    p
}

/// `build_frame(n, m)`.
pub fn build_frame(n: usize, m: usize) -> Result<HermitianFrame> {
    HermitianFrame::build(n, m)
}
