//! Explicit-matrix reference values for two photons in two modes.

mod common;

use common::*;
use fockhtm::basis::{ggm_basis, span_projector, HermitianFrame};
use fockhtm::fock::{photonic_homomorphism, ScatteringUnitary};
use fockhtm::linalg::{c, max_abs_diff, unitarity_error};
use fockhtm::transfer::htm_scattering;

const TOL: f64 = 1e-10;

fn frame() -> HermitianFrame {
    HermitianFrame::build(2, 2).unwrap()
}

#[test]
fn tangent_elements_match_reference() {
    let f = frame();
    for (i, h) in reference_tangent().iter().enumerate() {
        assert!(max_abs_diff(&f.elements()[i], h) < TOL, "H{i}");
    }
}

#[test]
fn perpendicular_span_matches_reference() {
    let f = frame();
    let expected = span_projector(&reference_perpendicular());
    let diff = (f.perpendicular_projector() - expected).abs().max();
    assert!(diff < TOL, "projector difference {diff}");
}

#[test]
fn reference_perpendicular_elements_are_orthonormal() {
    let hs = reference_perpendicular();
    for (i, a) in hs.iter().enumerate() {
        for (j, b) in hs.iter().enumerate() {
            let g = (a * b).trace();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g - c(want, 0.0)).norm() < TOL);
        }
    }
}

#[test]
fn lifted_two_mode_unitary_matches_printed_matrix() {
    for (a, b, g) in ANGLES {
        let v = photonic_homomorphism(&ScatteringUnitary::two_mode(a, b, g), 2).unwrap();
        let diff = max_abs_diff(v.matrix(), &printed_v(a, b, g));
        assert!(diff < TOL, "(α, β, γ) = ({a}, {b}, {g}): difference {diff}");
    }
}

#[test]
fn printed_matrix_is_not_unitary() {
    let (a, b, g) = ANGLES[0];
    assert!(unitarity_error(&printed_v(a, b, g)) > 0.1);
    assert!(unitarity_error(&corrected_v(a, b, g)) < TOL);
}

#[test]
fn lifted_two_mode_unitary_matches_corrected_matrix() {
    for (a, b, g) in ANGLES {
        let v = photonic_homomorphism(&ScatteringUnitary::two_mode(a, b, g), 2).unwrap();
        assert!(max_abs_diff(v.matrix(), &corrected_v(a, b, g)) < TOL);
    }
}

#[test]
fn scattering_transfer_matrix_matches_reference() {
    let modes = ggm_basis(2).unwrap();
    for (a, b, g) in ANGLES {
        let rs = htm_scattering(&ScatteringUnitary::two_mode(a, b, g), &modes).unwrap();
        let diff = (rs - reference_rs(a, b, g)).abs().max();
        assert!(diff < TOL, "(α, β, γ) = ({a}, {b}, {g}): difference {diff}");
    }
}
