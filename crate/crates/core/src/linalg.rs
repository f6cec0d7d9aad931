//! Small dense linear-algebra helpers shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Hermitian matrices are often
//! handled through their real coordinate vector (see [`hermitian_to_real`]),
//! an isometry between `H(d)` with the Hilbert–Schmidt inner product and
//! `R^{d²}` with the Euclidean one.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Entrywise max norm.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |U†U − I|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &CMatrix::identity(u.nrows(), u.ncols()))
}

/// `max |A − A†|`.
pub fn hermiticity_error(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(a, &a.adjoint())
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for j in 0..n {
        for k in 0..n {
            acc += a[(j, k)] * b[(k, j)];
        }
    }
    acc
}

/// Real coordinates of a Hermitian `d×d` matrix: the `d` diagonal entries,
/// then `√2·Re a_jk, √2·Im a_jk` for each `j < k` in row-major order.
/// `hermitian_to_real(A)·hermitian_to_real(B) = tr(AB)`.
pub fn hermitian_to_real(a: &CMatrix) -> RVector {
    let d = a.nrows();
    let mut v = RVector::zeros(d * d);
    for j in 0..d {
        v[j] = a[(j, j)].re;
    }
    let mut idx = d;
    for j in 0..d {
        for k in (j + 1)..d {
            let z = a[(j, k)];
            v[idx] = SQRT_2 * z.re;
            v[idx + 1] = SQRT_2 * z.im;
            idx += 2;
        }
    }
    v
}

/// Inverse of [`hermitian_to_real`].
pub fn real_to_hermitian(v: &RVector, d: usize) -> CMatrix {
    assert_eq!(v.len(), d * d);
    let mut a = CMatrix::zeros(d, d);
    for j in 0..d {
        a[(j, j)] = c(v[j], 0.0);
    }
    let mut idx = d;
    for j in 0..d {
        for k in (j + 1)..d {
            let z = c(v[idx] * FRAC_1_SQRT_2, v[idx + 1] * FRAC_1_SQRT_2);
            a[(j, k)] = z;
            a[(k, j)] = z.conj();
            idx += 2;
        }
    }
    a
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues are returned in
/// ascending order with matching eigenvector columns.
pub fn hermitian_eigen(a: &CMatrix) -> (RVector, CMatrix) {
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = RVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// `W · diag(f(λ)) · W†` for Hermitian `a = W diag(λ) W†`.
pub fn hermitian_function(a: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(a);
    let mut scaled = vectors.clone();
    for (j, lambda) in values.iter().enumerate() {
        let fj = f(*lambda);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= fj;
        }
    }
    scaled * vectors.adjoint()
}

/// Square root of a positive semidefinite matrix; slightly negative
/// eigenvalues from round-off are clipped to zero.
pub fn psd_sqrt(a: &CMatrix) -> CMatrix {
    hermitian_function(a, |x| c(x.max(0.0).sqrt(), 0.0))
}

/// `exp(i h)` for Hermitian `h`.
pub fn expi_hermitian(h: &CMatrix) -> CMatrix {
    hermitian_function(h, |x| Complex64::from_polar(1.0, x))
}

/// Numerical rank from singular values, relative to the largest one.
pub fn numerical_rank(a: &RMatrix, tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Haar-distributed `m×m` unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_fn(m, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    q
}

/// Random density matrix of rank `rank` (Ginibre ensemble, Hilbert–Schmidt
/// measure when `rank == d`).
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, rank.max(1), |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    let rho = &g * g.adjoint();
    let tr = trace(&rho).re;
    rho.unscale(tr)
}

/// Random normalized pure state vector.
pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    let norm = v.norm();
    v.unscale(norm)
}

pub fn projector(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

/// Distance between two matrices up to a global phase:
/// `min_φ max_jk |e^{iφ} a_jk − b_jk|`.
///
/// Each entry contributes a sinusoid in `φ`; the maximum of these is
/// minimized by a coarse scan followed by golden-section refinement.
pub fn phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let eval = |phi: f64| {
        let p = Complex64::from_polar(1.0, phi);
        a.iter()
            .zip(b.iter())
            .fold(0.0_f64, |acc, (x, y)| acc.max((p * x - y).norm()))
    };
    const STEPS: usize = 720;
    let step = std::f64::consts::TAU / STEPS as f64;
    let (mut best_phi, mut best) = (0.0, f64::INFINITY);
    for s in 0..STEPS {
        let phi = s as f64 * step;
        let v = eval(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    let (mut lo, mut hi) = (best_phi - step, best_phi + step);
    let g = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = eval(x2);
        }
    }
    best.min(f1).min(f2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn real_coordinates_are_an_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..6 {
            let a = random_density(d, d, &mut rng);
            let b = random_density(d, 2, &mut rng);
            let lhs = hermitian_to_real(&a).dot(&hermitian_to_real(&b));
            let rhs = trace_product(&a, &b).re;
            assert!((lhs - rhs).abs() < 1e-13);
            let back = real_to_hermitian(&hermitian_to_real(&a), d);
            assert!(max_abs_diff(&back, &a) < 1e-14);
        }
    }

    #[test]
    fn haar_sample_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 1..6 {
            assert!(unitarity_error(&haar_unitary(m, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(3, &mut rng);
        let v = u.map(|z| z * Complex64::from_polar(1.0, 2.1));
        assert!(phase_distance(&u, &v) < 1e-12);
        let w = haar_unitary(3, &mut rng);
        assert!(phase_distance(&u, &w) > 1e-3);
        // symmetric
        let d1 = phase_distance(&u, &w);
        let d2 = phase_distance(&w, &u);
        assert!((d1 - d2).abs() < 1e-9);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(4, 4, &mut rng);
        let s = psd_sqrt(&rho);
        assert!(max_abs_diff(&(&s * &s), &rho) < 1e-12);
    }

    #[test]
    fn expi_of_zero_is_identity() {
        let h = CMatrix::zeros(3, 3);
        assert!(max_abs_diff(&expi_hermitian(&h), &CMatrix::identity(3, 3)) < 1e-15);
    }
}
