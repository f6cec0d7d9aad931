//! Fock-space enumeration and the lift of scattering unitaries to
//! multi-photon unitaries.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, expi_hermitian, hermiticity_error, unitarity_error, CMatrix};
use crate::permanent::permanent;

/// Default cap on the Fock-space dimension `M`.
pub const DEFAULT_MAX_DIM: usize = 512;

/// Photon numbers beyond this would overflow the factorial table.
pub const MAX_PHOTONS: usize = 20;

const FACTORIALS: [f64; MAX_PHOTONS + 1] = {
    let mut table = [1.0; MAX_PHOTONS + 1];
    let mut i = 1;
    while i <= MAX_PHOTONS {
        table[i] = table[i - 1] * i as f64;
        i += 1;
    }
    table
};

pub fn factorial(n: usize) -> f64 {
    FACTORIALS[n]
}

/// Exact binomial coefficient; `C(n, k) = 0` for `k > n`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension `M = C(m+n-1, n)` of the `n`-photon, `m`-mode Fock space.
pub fn fock_dimension(n: usize, m: usize) -> u128 {
    if m == 0 {
        return 0;
    }
    binomial((m + n - 1) as u64, n as u64)
}

/// Occupation-number state `|n_1, …, n_m⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockState(Vec<usize>);

impl FockState {
    pub fn new(occupations: Vec<usize>) -> Self {
        FockState(occupations)
    }

    pub fn occupations(&self) -> &[usize] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// `∏ n_i!`
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&k| factorial(k)).product()
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "⟩")
    }
}

/// All `n`-photon states over `m` modes in decreasing lexicographic order
/// (first mode most significant): `|2,0⟩, |1,1⟩, |0,2⟩` for `n = m = 2`.
#[derive(Clone, Debug)]
pub struct FockBasis {
    n: usize,
    m: usize,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl FockBasis {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_cap(n, m, DEFAULT_MAX_DIM)
    }

    pub fn with_cap(n: usize, m: usize, max_dim: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("mode count must be at least 1".into()));
        }
        let dim = fock_dimension(n, m);
        if dim > max_dim as u128 {
            return Err(Error::ResourceLimit { dim, cap: max_dim });
        }
        let mut states = Vec::with_capacity(dim as usize);
        let mut current = vec![0; m];
        fill_states(n, 0, &mut current, &mut states);
        debug_assert_eq!(states.len() as u128, dim);
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(FockBasis { n, m, states, index })
    }

    pub fn photons(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    /// `M`
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, idx: usize) -> &FockState {
        &self.states[idx]
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn index_of_occupations(&self, occupations: &[usize]) -> Option<usize> {
        self.index.get(&FockState(occupations.to_vec())).copied()
    }
}

fn fill_states(remaining: usize, mode: usize, current: &mut Vec<usize>, out: &mut Vec<FockState>) {
    let m = current.len();
    if mode == m - 1 {
        current[mode] = remaining;
        out.push(FockState(current.clone()));
        return;
    }
    for k in (0..=remaining).rev() {
        current[mode] = k;
        fill_states(remaining - k, mode + 1, current, out);
    }
    current[mode] = 0;
}

/// `enumerate_fock_basis(n, m)` with the default dimension cap.
pub fn enumerate_fock_basis(n: usize, m: usize) -> Result<FockBasis> {
    FockBasis::new(n, m)
}

/// Tolerance on `‖S†S − I‖∞` for accepted scattering matrices.
pub const UNITARY_TOL: f64 = 1e-10;

/// An `m×m` unitary acting on optical mode operators.
#[derive(Clone, Debug)]
pub struct ScatteringUnitary {
    matrix: CMatrix,
    generator: Option<CMatrix>,
}

impl ScatteringUnitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "scattering matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let err = unitarity_error(&matrix);
        if err >= UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(ScatteringUnitary { matrix, generator: None })
    }

    /// `S = exp(i h)` for Hermitian `h`.
    pub fn from_generator(h: CMatrix) -> Result<Self> {
        let herr = hermiticity_error(&h);
        if herr > 1e-10 {
            return Err(Error::NotHermitian(herr));
        }
        let mut s = Self::new(expi_hermitian(&h))?;
        s.generator = Some(h);
        Ok(s)
    }

    /// Two-mode parameterization
    /// `[[e^{i(α+γ)/2} cos(β/2), e^{i(α−γ)/2} sin(β/2)],
    ///   [−e^{−i(α−γ)/2} sin(β/2), e^{−i(α+γ)/2} cos(β/2)]]`.
    pub fn two_mode(alpha: f64, beta: f64, gamma: f64) -> Self {
        let (s, co) = (0.5 * beta).sin_cos();
        let e = |phase: f64| Complex64::from_polar(1.0, phase);
        let matrix = CMatrix::from_row_slice(
            2,
            2,
            &[
                e(0.5 * (alpha + gamma)) * co,
                e(0.5 * (alpha - gamma)) * s,
                -e(-0.5 * (alpha - gamma)) * s,
                e(-0.5 * (alpha + gamma)) * co,
            ],
        );
        ScatteringUnitary { matrix, generator: None }
    }

    pub fn identity(m: usize) -> Self {
        ScatteringUnitary { matrix: CMatrix::identity(m, m), generator: None }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn generator(&self) -> Option<&CMatrix> {
        self.generator.as_ref()
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        ScatteringUnitary {
            matrix: self.matrix.adjoint(),
            generator: self.generator.as_ref().map(|h| -h),
        }
    }

    pub fn compose(&self, other: &ScatteringUnitary) -> Result<Self> {
        if self.modes() != other.modes() {
            return Err(Error::DimensionMismatch { expected: self.modes(), found: other.modes() });
        }
        Ok(ScatteringUnitary { matrix: &self.matrix * &other.matrix, generator: None })
    }
}

/// An `M×M` unitary on the `n`-photon Fock space.
#[derive(Clone, Debug)]
pub struct MultiPhotonUnitary {
    matrix: CMatrix,
    basis: Arc<FockBasis>,
}

impl MultiPhotonUnitary {
    /// Wraps an arbitrary unitary on `basis` (it need not be a LON lift).
    pub fn new(matrix: CMatrix, basis: Arc<FockBasis>) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: matrix.nrows() });
        }
        let err = unitarity_error(&matrix);
        if err >= 1e-9 * basis.dim().max(1) as f64 {
            return Err(Error::NotUnitary(err));
        }
        Ok(MultiPhotonUnitary { matrix, basis })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

/// `S_{B,A}`: column `i` of `S` repeated `a_i` times, then row `j` of the
/// result repeated `b_j` times.
pub fn submatrix_for_transition(s: &ScatteringUnitary, input: &FockState, output: &FockState) -> Result<CMatrix> {
    let m = s.modes();
    if input.modes() != m || output.modes() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: if input.modes() != m { input.modes() } else { output.modes() },
        });
    }
    if input.total() != output.total() {
        return Err(Error::PhotonNumberMismatch { input: input.total(), output: output.total() });
    }
    Ok(transition_submatrix(s.matrix(), input.occupations(), output.occupations()))
}

fn transition_submatrix(s: &CMatrix, input: &[usize], output: &[usize]) -> CMatrix {
    let cols: Vec<usize> = expand(input);
    let rows: Vec<usize> = expand(output);
    CMatrix::from_fn(rows.len(), cols.len(), |r, k| s[(rows[r], cols[k])])
}

fn expand(occupations: &[usize]) -> Vec<usize> {
    occupations
        .iter()
        .enumerate()
        .flat_map(|(mode, &count)| std::iter::repeat_n(mode, count))
        .collect()
}

/// `φ(S)` on the `n`-photon space, entries
/// `⟨B|φ(S)|A⟩ = Per(S_{B,A}) / √(∏b_j! ∏a_i!)`.
pub fn photonic_homomorphism(s: &ScatteringUnitary, n: usize) -> Result<MultiPhotonUnitary> {
    let basis = Arc::new(FockBasis::new(n, s.modes())?);
    lift_on(s, &basis)
}

/// [`photonic_homomorphism`] on a prebuilt basis.
pub fn lift_on(s: &ScatteringUnitary, basis: &Arc<FockBasis>) -> Result<MultiPhotonUnitary> {
    if basis.modes() != s.modes() {
        return Err(Error::DimensionMismatch { expected: basis.modes(), found: s.modes() });
    }
    if basis.photons() > MAX_PHOTONS {
        return Err(Error::InvalidInput(format!(
            "photon number {} exceeds {MAX_PHOTONS}",
            basis.photons()
        )));
    }
    let err = unitarity_error(s.matrix());
    if err >= UNITARY_TOL {
        return Err(Error::NotUnitary(err));
    }
    let dim = basis.dim();
    let mut v = CMatrix::zeros(dim, dim);
    for (col, a) in basis.states().iter().enumerate() {
        let fa = a.factorial_product();
        for (row, b) in basis.states().iter().enumerate() {
            let sub = transition_submatrix(s.matrix(), a.occupations(), b.occupations());
            let per = permanent(&sub)?;
            v[(row, col)] = per / (fa * b.factorial_product()).sqrt();
        }
    }
    MultiPhotonUnitary::new(v, Arc::clone(basis))
}

/// Fock-state amplitude vector for a single basis state.
pub fn basis_vector(basis: &FockBasis, state: &FockState) -> Result<crate::linalg::CVector> {
    let idx = basis
        .index_of(state)
        .ok_or_else(|| Error::InvalidInput(format!("{state} is not in the {}-photon {}-mode basis", basis.photons(), basis.modes())))?;
    let mut v = crate::linalg::CVector::zeros(basis.dim());
    v[idx] = c(1.0, 0.0);
    Ok(v)
}
