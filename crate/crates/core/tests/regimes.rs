use std::f64::consts::PI;

use csq_core::spectra::{eigvals_skew, eigvals_symmetric};
use csq_core::symbols::{lower_symbol, symbol_momentum, symbol_p_squared, symbol_position, symbol_position_squared};
use csq_core::well::{commutator_qp, op_momentum, op_p_squared, op_position, op_position_squared};
use csq_core::{Parameters, PhasePoint, DEFAULT_TOL};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const TOL: f64 = DEFAULT_TOL;

/// Closed-form symbols against quadratic forms of the truncated matrices.
#[test]
fn symbol_duality_sweep() {
    let mut rng = StdRng::seed_from_u64(42);
    for (theta, n, p_max) in [(0.2, 32, 6.0), (1.0, 32, 6.0), (5.0, 64, 5.0)] {
        let params = Parameters::with_theta(theta).unwrap();
        let q = op_position(&params, n).unwrap();
        let p = op_momentum(&params, n).unwrap();
        let q2 = op_position_squared(&params, n).unwrap();
        let p2 = op_p_squared(&params, n).unwrap();
        for _ in 0..25 {
            let x = PhasePoint::new(rng.gen_range(0.05..PI - 0.05), rng.gen_range(-p_max..=p_max));
            let pairs = [
                (
                    symbol_position(x, &params, TOL).unwrap(),
                    lower_symbol(&q, x).unwrap().re,
                    1.0,
                ),
                (
                    symbol_momentum(x, &params, TOL).unwrap(),
                    lower_symbol(&p, x).unwrap().re,
                    1.0,
                ),
                (
                    symbol_position_squared(x, &params, TOL).unwrap(),
                    lower_symbol(&q2, x).unwrap().re,
                    1.0,
                ),
                (
                    symbol_p_squared(x, &params, TOL).unwrap(),
                    lower_symbol(&p2, x).unwrap().re,
                    10.0,
                ),
            ];
            for (closed, matrix, scale) in pairs {
                assert!(
                    (closed - matrix).abs() < 1e-10 * scale,
                    "theta {theta} at ({}, {}): {closed} vs {matrix}",
                    x.q,
                    x.p
                );
            }
        }
    }
}

#[test]
fn momentum_symbol_stair_step() {
    let params = Parameters::with_theta(0.2).unwrap();
    let mut p: f64 = 0.6;
    while p <= 3.4 {
        let r = p.round();
        if (p - r).abs() <= 0.3 {
            let v = symbol_momentum(PhasePoint::new(1.0, p), &params, TOL).unwrap();
            assert!((v - r).abs() < 0.05, "p = {p}: {v}");
        }
        p += 0.05;
    }
}

#[test]
fn momentum_symbol_at_center_snaps_to_odd_levels() {
    let params = Parameters::with_theta(0.2).unwrap();
    for odd in [1.0, 3.0] {
        for d in [-0.3, -0.1, 0.0, 0.2, 0.3] {
            let v = symbol_momentum(PhasePoint::new(PI / 2.0, odd + d), &params, TOL).unwrap();
            assert!((v - odd).abs() < 0.05, "p = {}: {v}", odd + d);
        }
    }
}

#[test]
fn classical_and_quantum_regimes() {
    let classical = Parameters::with_theta(5.0).unwrap();
    for q in [0.6, 1.2, 2.0, 2.5] {
        let v = symbol_position(PhasePoint::new(q, 3.0), &classical, TOL).unwrap();
        assert!((v - q).abs() < 0.1 * q, "q = {q}: {v}");
    }
    let quantum = Parameters::with_theta(0.05).unwrap();
    let spread = eigvals_symmetric(&op_position(&quantum, 32).unwrap()).unwrap();
    assert!(spread.eigenvalues.iter().all(|v| (v - PI / 2.0).abs() < 1e-3));
    let c = eigvals_skew(&commutator_qp(&quantum, 32).unwrap()).unwrap();
    assert!(c.max_abs() < 1e-3);
}

#[test]
fn units_scale_consistently() {
    let base = Parameters::default();
    let scaled = Parameters::new(2.0, 0.5, PI, 1.0, 1.0).unwrap();
    let x = PhasePoint::new(1.1, 1.7);
    let a = symbol_momentum(x, &base, TOL).unwrap();
    let b = symbol_momentum(PhasePoint::new(1.1, 3.4), &scaled, TOL).unwrap();
    assert!((2.0 * a - b).abs() < 1e-12);
    let la = symbol_position(x, &base, TOL).unwrap();
    let stretched = Parameters::new(1.0, 0.5, 2.0 * PI, 1.0, 1.0).unwrap();
    let lb = symbol_position(PhasePoint::new(2.2, 0.85), &stretched, TOL).unwrap();
    assert!((2.0 * la - lb).abs() < 1e-12);
}
