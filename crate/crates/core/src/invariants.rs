//! Purity-like invariants of a density vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{binomial, FockBasis};
use crate::json::serialize_sig12;
use crate::linalg::{c, trace_product, CMatrix};
use crate::transfer::DensityState;
use crate::basis::js_map;

/// `I_n`, `I_t′`, `I_t`, `I_p`, `I_o` and the purity of a state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantSet {
    #[serde(serialize_with = "serialize_sig12")]
    pub i_n: f64,
    #[serde(serialize_with = "serialize_sig12")]
    pub i_t_prime: f64,
    #[serde(serialize_with = "serialize_sig12")]
    pub i_t: f64,
    #[serde(serialize_with = "serialize_sig12")]
    pub i_p: f64,
    #[serde(serialize_with = "serialize_sig12")]
    pub i_o: f64,
    #[serde(serialize_with = "serialize_sig12")]
    pub purity: f64,
}

impl InvariantSet {
    /// Largest absolute difference over the five invariants.
    pub fn max_deviation(&self, other: &InvariantSet) -> f64 {
        [
            self.i_n - other.i_n,
            self.i_t_prime - other.i_t_prime,
            self.i_t - other.i_t,
            self.i_p - other.i_p,
            self.i_o - other.i_o,
        ]
        .iter()
        .fold(0.0, |acc, d| acc.max(d.abs()))
    }
}

/// Agreement required between the two evaluations of `I_o`.
pub const OBSERVABLE_INVARIANT_TOL: f64 = 1e-10;

/// Computes every invariant of `state`; `I_o` is evaluated both from the
/// mode observables and from `I_t′`, and the two must agree.
pub fn invariants(state: &DensityState) -> Result<InvariantSet> {
    let frame = state.frame();
    let (n, m) = (frame.photons(), frame.modes());
    let coeffs = state.coeffs();
    let t = m * m;
    let i_n = coeffs[0] * coeffs[0];
    let i_t_prime: f64 = coeffs.rows(1, t - 1).norm_squared();
    let i_p: f64 = coeffs.rows(t, coeffs.len() - t).norm_squared();
    let direct = observable_invariant_direct(state.rho(), frame.basis())?;
    let relation = observable_invariant_from_tangent(i_t_prime, n, m);
    if (direct - relation).abs() > OBSERVABLE_INVARIANT_TOL * relation.abs().max(1.0) {
        return Err(Error::InvariantMismatch { direct, relation });
    }
    Ok(InvariantSet {
        i_n,
        i_t_prime,
        i_t: i_n + i_t_prime,
        i_p,
        i_o: direct,
        purity: trace_product(state.rho(), state.rho()).re,
    })
}

/// The `m²` mode observables `n̂_j`, `(a_j†a_k + a_k†a_j)/√2` and
/// `i(a_j†a_k − a_k†a_j)/√2` (`j < k`), as matrices on `basis`.
pub fn mode_observables(basis: &FockBasis) -> Result<Vec<CMatrix>> {
    let m = basis.modes();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(m * m);
    for j in 0..m {
        let mut h = CMatrix::zeros(m, m);
        h[(j, j)] = c(1.0, 0.0);
        out.push(js_map(&h, basis)?);
    }
    for j in 0..m {
        for k in (j + 1)..m {
            let mut h = CMatrix::zeros(m, m);
            h[(j, k)] = c(r, 0.0);
            h[(k, j)] = c(r, 0.0);
            out.push(js_map(&h, basis)?);
            let mut h = CMatrix::zeros(m, m);
            h[(j, k)] = c(0.0, r);
            h[(k, j)] = c(0.0, -r);
            out.push(js_map(&h, basis)?);
        }
    }
    Ok(out)
}

/// `I_o = Σ_i tr²(ρ O′_i)` over [`mode_observables`].
pub fn observable_invariant_direct(rho: &CMatrix, basis: &FockBasis) -> Result<f64> {
    if rho.nrows() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: rho.nrows() });
    }
    Ok(mode_observables(basis)?
        .iter()
        .map(|o| trace_product(rho, o).re.powi(2))
        .sum())
}

/// `I_o = C(m+n, m+1)·I_t′ + n²/m`.
pub fn observable_invariant_from_tangent(i_t_prime: f64, n: usize, m: usize) -> f64 {
    tangent_norm(n, m) * i_t_prime + (n * n) as f64 / m as f64
}

/// `I_t′ = (I_o − n²/m) / C(m+n, m+1)`.
pub fn tangent_from_observable_invariant(i_o: f64, n: usize, m: usize) -> f64 {
    (i_o - (n * n) as f64 / m as f64) / tangent_norm(n, m)
}

/// `C(m+n, m+1)`, the squared norm of every traceless JS image.
pub fn tangent_norm(n: usize, m: usize) -> f64 {
    binomial((m + n) as u64, (m + 1) as u64) as f64
}

/// Attainable range of `I_t′` for two-mode, `n`-photon states, and the
/// radius of the corresponding sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItPrimeRange {
    pub min: f64,
    pub max: f64,
    pub radius: f64,
}

impl ItPrimeRange {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.min - tol && x <= self.max + tol
    }
}

/// `[0, 3n/((n+1)(n+2))]` with radius `√(3n/((n+1)(n+2)))`.
pub fn itprime_range(n: usize) -> Result<ItPrimeRange> {
    if n == 0 {
        return Err(Error::InvalidInput("photon number must be at least 1".into()));
    }
    let nf = n as f64;
    let max = 3.0 * nf / ((nf + 1.0) * (nf + 2.0));
    Ok(ItPrimeRange { min: 0.0, max, radius: max.sqrt() })
}

/// Lower bound on the number of LON settings needed for tomography,
/// `C(n+m, n) − C(n+m−2, m)`.
pub fn min_tomography_settings(n: usize, m: usize) -> Result<u128> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput("need n ≥ 1 and m ≥ 1".into()));
    }
    let (n, m) = (n as u64, m as u64);
    Ok(binomial(n + m, n) - binomial(n + m - 2, m))
}
