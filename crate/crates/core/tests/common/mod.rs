//! Reference matrices for two photons in two modes and a brute-force
//! permanent.

#![allow(dead_code)]

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use fockhtm::linalg::{c, CMatrix, RMatrix};
use num_complex::Complex64;

pub const ANGLES: [(f64, f64, f64); 4] = [(0.37, 1.21, -0.83), (2.9, 0.4, 1.7), (-1.1, 2.6, 0.05), (0.0, 0.0, 0.0)];

pub fn m3(rows: [[Complex64; 3]; 3]) -> CMatrix {
    CMatrix::from_fn(3, 3, |i, j| rows[i][j])
}

pub fn r(x: f64) -> Complex64 {
    c(x, 0.0)
}

pub fn im(x: f64) -> Complex64 {
    c(0.0, x)
}

pub fn e(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

pub fn reference_tangent() -> Vec<CMatrix> {
    let z = r(0.0);
    let h = r(0.5);
    let s3 = 1.0 / 3f64.sqrt();
    vec![
        m3([[r(s3), z, z], [z, r(s3), z], [z, z, r(s3)]]),
        m3([[r(FRAC_1_SQRT_2), z, z], [z, z, z], [z, z, r(-FRAC_1_SQRT_2)]]),
        m3([[z, h, z], [h, z, h], [z, h, z]]),
        m3([[z, im(-0.5), z], [im(0.5), z, im(-0.5)], [z, im(0.5), z]]),
    ]
}

pub fn reference_perpendicular() -> Vec<CMatrix> {
    let z = r(0.0);
    let h = r(0.5);
    let a = 1.0 / 6f64.sqrt();
    let b = (2.0f64 / 3.0).sqrt();
    vec![
        m3([[r(a), z, z], [z, r(-b), z], [z, z, r(a)]]),
        m3([[z, h, z], [h, z, r(-0.5)], [z, r(-0.5), z]]),
        m3([[z, im(-0.5), z], [im(0.5), z, im(0.5)], [z, im(-0.5), z]]),
        m3([[z, z, im(-FRAC_1_SQRT_2)], [z, z, z], [im(FRAC_1_SQRT_2), z, z]]),
        m3([[z, z, r(FRAC_1_SQRT_2)], [z, z, z], [r(FRAC_1_SQRT_2), z, z]]),
    ]
}

/// `V(α, β, γ)` exactly as printed.
pub fn printed_v(alpha: f64, beta: f64, gamma: f64) -> CMatrix {
    let (s, co) = (0.5 * beta).sin_cos();
    m3([
        [e(alpha + gamma) * co * co, e(alpha) * SQRT_2 * s * co, e(alpha - gamma) * s * s],
        [-e(gamma - alpha) * SQRT_2 * s * co, r(co * co - s * s), e(-(alpha - gamma)) * SQRT_2 * s * co],
        [e(-(alpha - gamma)) * s * s, -e(-alpha) * SQRT_2 * s * co, e(-(alpha + gamma)) * co * co],
    ])
}

/// `V(α, β, γ)` with the middle-row phases that make it unitary.
pub fn corrected_v(alpha: f64, beta: f64, gamma: f64) -> CMatrix {
    let mut v = printed_v(alpha, beta, gamma);
    let (s, co) = (0.5 * beta).sin_cos();
    v[(1, 0)] = -e(gamma) * SQRT_2 * s * co;
    v[(1, 2)] = e(-gamma) * SQRT_2 * s * co;
    v
}

pub fn reference_rs(alpha: f64, beta: f64, gamma: f64) -> RMatrix {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    RMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0,
            0.0, cb, sb * cg, sb * sg,
            0.0, -ca * sb, ca * cb * cg - sa * sg, ca * cb * sg + sa * cg,
            0.0, sa * sb, -sa * cb * cg - ca * sg, ca * cg - sa * cb * sg,
        ],
    )
}

/// Sum over all permutations.
pub fn naive_permanent(a: &CMatrix) -> Complex64 {
    fn rec(a: &CMatrix, row: usize, used: &mut [bool]) -> Complex64 {
        if row == a.nrows() {
            return c(1.0, 0.0);
        }
        let mut acc = c(0.0, 0.0);
        for col in 0..a.ncols() {
            if !used[col] {
                used[col] = true;
                acc += a[(row, col)] * rec(a, row + 1, used);
                used[col] = false;
            }
        }
        acc
    }
    rec(a, 0, &mut vec![false; a.ncols()])
}
