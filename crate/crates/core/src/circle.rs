//! Coherent states and quantized observables for a particle on the circle.
//!
//! The Hilbert space is truncated to the angular-momentum basis
//! `n = -N..=N`, stored in ascending order, so row/column `i` of every
//! matrix corresponds to `n = i - N`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{positive, CsqError, Result};
use crate::kernels::{gaussian_window, norm_circle_direct};
use crate::quadrature::{integrate_vec, integrate_vec_over, merge_intervals, QuadOptions};
use crate::{CMatrix, C64, DEFAULT_TOL};

/// Tail mass above which a coherent state counts as truncated.
pub const TRUNCATION_WARN: f64 = 1e-12;

/// A truncated operator on the circle basis `n = -N..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleOperator {
    half_bandwidth: usize,
    entries: CMatrix,
    /// Regulator the entries were built with; `None` for ε-independent operators.
    epsilon: Option<f64>,
}

impl CircleOperator {
    pub fn from_entries(entries: CMatrix, epsilon: Option<f64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim != entries.ncols() || dim.is_multiple_of(2) {
            return Err(CsqError::ShapeMismatch(format!(
                "circle operator must be square of odd size, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self {
            half_bandwidth: dim / 2,
            entries,
            epsilon,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            half_bandwidth: n,
            entries: CMatrix::identity(2 * n + 1, 2 * n + 1),
            epsilon: None,
        }
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    pub fn dim(&self) -> usize {
        2 * self.half_bandwidth + 1
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Matrix element ⟨n|A|n′⟩ addressed by angular momenta.
    pub fn get(&self, n: i64, n_prime: i64) -> C64 {
        self.entries[(self.index(n), self.index(n_prime))]
    }

    pub fn index(&self, n: i64) -> usize {
        let big_n = self.half_bandwidth as i64;
        assert!(n.abs() <= big_n, "level {n} outside truncation ±{big_n}");
        (n + big_n) as usize
    }

    /// Angular momentum of row/column `i`.
    pub fn level(&self, i: usize) -> i64 {
        i as i64 - self.half_bandwidth as i64
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm() <= tol))
    }
}

fn build(n: usize, epsilon: Option<f64>, entry: impl Fn(i64, i64) -> C64) -> CircleOperator {
    let dim = 2 * n + 1;
    let big_n = n as i64;
    let entries = CMatrix::from_fn(dim, dim, |i, j| entry(i as i64 - big_n, j as i64 - big_n));
    CircleOperator {
        half_bandwidth: n,
        entries,
        epsilon,
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        Err(CsqError::InvalidParameter {
            name: "N",
            value: 0.0,
            reason: "truncation must keep at least one level on each side",
        })
    } else {
        Ok(())
    }
}

/// A circle coherent state |p₀, q₀⟩ truncated to `n = -N..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleCS {
    pub q0: f64,
    pub p0: f64,
    pub epsilon: f64,
    /// 𝒩(p₀) of the untruncated state.
    pub normalization: f64,
    pub coefficients: Vec<C64>,
    /// Norm mass lost to the truncation, `1 - Σ|c_n|²`.
    pub tail_bound: f64,
}

impl CircleCS {
    pub fn half_bandwidth(&self) -> usize {
        self.coefficients.len() / 2
    }

    pub fn truncated(&self) -> bool {
        self.tail_bound > TRUNCATION_WARN
    }

    pub fn coefficient(&self, n: i64) -> C64 {
        self.coefficients[(n + self.half_bandwidth() as i64) as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Coefficients ⟨n|p₀,q₀⟩ = (ε/π)^{1/4} e^{-ε(p₀-n)²/2} e^{-inq₀} / √𝒩(p₀).
pub fn cs_coeffs_circle(q0: f64, p0: f64, epsilon: f64, n: usize) -> Result<CircleCS> {
    positive("epsilon", epsilon)?;
    check_size(n)?;
    let norm = norm_circle_direct(p0, epsilon, DEFAULT_TOL)?.value;
    let scale = (epsilon / PI).powf(0.25) / norm.sqrt();
    let big_n = n as i64;
    let coefficients: Vec<C64> = (-big_n..=big_n)
        .map(|k| {
            let kf = k as f64;
            let amp = scale * (-epsilon * (p0 - kf).powi(2) / 2.0).exp();
            C64::from_polar(amp, -kf * q0)
        })
        .collect();
    let kept: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
    let cs = CircleCS {
        q0,
        p0,
        epsilon,
        normalization: norm,
        coefficients,
        tail_bound: (1.0 - kept).max(0.0),
    };
    if cs.truncated() {
        log::warn!(
            "circle CS at p0={p0} does not fit in ±{n}: tail mass {:e}",
            cs.tail_bound
        );
    }
    Ok(cs)
}

/// p̂ = Σ n |n⟩⟨n|.
pub fn op_momentum_circle(n: usize) -> Result<CircleOperator> {
    check_size(n)?;
    Ok(build(n, None, |a, b| {
        if a == b {
            C64::new(a as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// c_n(f) = (1/2π) ∫₀^{2π} f(q) e^{-inq} dq.
pub fn fourier_coefficient<F>(f: F, n: i64, tol: f64) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    positive("tol", tol)?;
    let nf = n as f64;
    let r = integrate_vec(
        |q, out| {
            let v = f(q) * C64::from_polar(1.0, -nf * q);
            out[0] = v.re;
            out[1] = v.im;
        },
        0.0,
        2.0 * PI,
        2,
        QuadOptions::abs(tol * 2.0 * PI),
    )?;
    Ok(C64::new(r.values[0], r.values[1]) / (2.0 * PI))
}

/// f(q)̂ with entries e^{-ε(n-n′)²/4} c_{n-n′}(f).
pub fn op_angle_function<F>(f: F, epsilon: f64, n: usize, tol: f64) -> Result<CircleOperator>
where
    F: Fn(f64) -> C64,
{
    positive("epsilon", epsilon)?;
    check_size(n)?;
    let span = 2 * n as i64;
    let coeffs = (-span..=span)
        .map(|m| fourier_coefficient(&f, m, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(build(n, Some(epsilon), |a, b| {
        let m = a - b;
        coeffs[(m + span) as usize] * (-epsilon * (m * m) as f64 / 4.0).exp()
    }))
}

/// q̂ = π I + i Σ_{n≠n′} e^{-ε(n-n′)²/4}/(n-n′) |n⟩⟨n′|.
pub fn op_angle(epsilon: f64, n: usize) -> Result<CircleOperator> {
    positive("epsilon", epsilon)?;
    check_size(n)?;
    Ok(build(n, Some(epsilon), |a, b| {
        let m = a - b;
        if m == 0 {
            C64::new(PI, 0.0)
        } else {
            let mf = m as f64;
            C64::new(0.0, (-epsilon * mf * mf / 4.0).exp() / mf)
        }
    }))
}

/// Quantized e^{iq}: ⟨n+1|Ŝ|n⟩ = e^{-ε/4}, zero elsewhere.
pub fn op_shift(epsilon: f64, n: usize) -> Result<CircleOperator> {
    positive("epsilon", epsilon)?;
    check_size(n)?;
    let value = (-epsilon / 4.0).exp();
    Ok(build(n, Some(epsilon), |a, b| {
        if a == b + 1 {
            C64::new(value, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// [A, B] = AB - BA.
pub fn commutator(a: &CircleOperator, b: &CircleOperator) -> Result<CircleOperator> {
    if a.half_bandwidth != b.half_bandwidth {
        return Err(CsqError::ShapeMismatch(format!(
            "truncations differ: ±{} vs ±{}",
            a.half_bandwidth, b.half_bandwidth
        )));
    }
    let epsilon = match (a.epsilon, b.epsilon) {
        (Some(x), Some(y)) if x != y => {
            return Err(CsqError::ShapeMismatch(format!("regulators differ: ε={x} vs ε={y}")))
        }
        (x, y) => x.or(y),
    };
    Ok(CircleOperator {
        half_bandwidth: a.half_bandwidth,
        entries: matrix_commutator(&a.entries, &b.entries),
        epsilon,
    })
}

fn diagonal_of(m: &CMatrix) -> Option<Vec<C64>> {
    let d = m.nrows();
    let off_diagonal_zero = (0..d).all(|i| (0..d).all(|j| i == j || m[(i, j)] == C64::new(0.0, 0.0)));
    off_diagonal_zero.then(|| (0..d).map(|i| m[(i, i)]).collect())
}

/// AB - BA; when either factor is diagonal the entries are formed as
/// (d_i - d_j)·M_ij so that integer spectra give exact results.
pub(crate) fn matrix_commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    if let Some(d) = diagonal_of(a) {
        CMatrix::from_fn(b.nrows(), b.ncols(), |i, j| (d[i] - d[j]) * b[(i, j)])
    } else if let Some(d) = diagonal_of(b) {
        CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| (d[j] - d[i]) * a[(i, j)])
    } else {
        a * b - b * a
    }
}

/// ⟨p₀,q₀|A|p₀,q₀⟩ using the coherent state at A's regulator (ε-independent
/// operators use `epsilon_fallback`).
pub fn lower_symbol_circle_with(a: &CircleOperator, q0: f64, p0: f64, epsilon_fallback: f64) -> Result<C64> {
    let epsilon = a.epsilon.unwrap_or(epsilon_fallback);
    let cs = cs_coeffs_circle(q0, p0, epsilon, a.half_bandwidth)?;
    let v = nalgebra::DVector::from_column_slice(&cs.coefficients);
    Ok(v.dotc(&(&a.entries * &v)))
}

/// ⟨p₀,q₀|A|p₀,q₀⟩; A must carry a regulator.
pub fn lower_symbol_circle(a: &CircleOperator, q0: f64, p0: f64) -> Result<C64> {
    let epsilon = a
        .epsilon
        .ok_or_else(|| CsqError::Validation("operator carries no regulator; use lower_symbol_circle_with".into()))?;
    lower_symbol_circle_with(a, q0, p0, epsilon)
}

/// Σ_{m≠0} w_m e^{-εm²/2} e^{imq₀} 𝒩(p₀ - m/2)/𝒩(p₀), the common series
/// behind the closed-form symbols of q̂ and [p̂, q̂].
fn symbol_series(q0: f64, p0: f64, epsilon: f64, tol: f64, weight: impl Fn(i64) -> C64) -> Result<C64> {
    positive("epsilon", epsilon)?;
    let n0 = norm_circle_direct(p0, epsilon, DEFAULT_TOL)?.value;
    let n_half = norm_circle_direct(p0 - 0.5, epsilon, DEFAULT_TOL)?.value;
    let ratio_odd = n_half / n0;
    let window = gaussian_window(0.0, (2.0 / epsilon).sqrt(), tol, |w| w.tail_bound * ratio_odd.max(1.0));
    let mut sum = C64::new(0.0, 0.0);
    for m in (1..=window.hi).rev() {
        let ratio = if m % 2 == 0 { 1.0 } else { ratio_odd };
        let damp = (-epsilon * (m * m) as f64 / 2.0).exp() * ratio;
        let mf = m as f64;
        sum += weight(m) * C64::from_polar(damp, mf * q0);
        sum += weight(-m) * C64::from_polar(damp, -mf * q0);
    }
    Ok(sum)
}

/// Closed form of ⟨p₀,q₀|q̂|p₀,q₀⟩ = π + Σ_{m≠0} (i/m) e^{-εm²/2 + imq₀} 𝒩(p₀ - m/2)/𝒩(p₀).
///
/// Even m carry the ratio 1 and odd m the ratio 𝒩(p₀-½)/𝒩(p₀); the
/// averaged factor ½(1 + 𝒩(p₀-½)/𝒩(p₀)) agrees with this only as ε → 0.
pub fn angle_symbol(q0: f64, p0: f64, epsilon: f64, tol: f64) -> Result<C64> {
    let s = symbol_series(q0, p0, epsilon, tol, |m| C64::new(0.0, 1.0 / m as f64))?;
    Ok(C64::new(PI, 0.0) + s)
}

/// Closed form of ⟨p₀,q₀|[p̂, q̂]|p₀,q₀⟩ = i Σ_{m≠0} e^{-εm²/2 + imq₀} 𝒩(p₀ - m/2)/𝒩(p₀).
pub fn commutator_symbol(q0: f64, p0: f64, epsilon: f64, tol: f64) -> Result<C64> {
    symbol_series(q0, p0, epsilon, tol, |_| C64::new(0.0, 1.0))
}

/// Quadrature oracle for the circle quantization of f(q, p): entry (n, n′)
/// is (1/2π)∫∫ f(q,p) 𝒩(p) ⟨n|p,q⟩⟨p,q|n′⟩ dq dp.
pub fn quantize_circle_by_quadrature<F>(f: F, epsilon: f64, n: usize, tol: f64) -> Result<CircleOperator>
where
    F: Fn(f64, f64) -> C64 + Sync,
{
    positive("epsilon", epsilon)?;
    positive("tol", tol)?;
    check_size(n)?;
    let dim = 2 * n + 1;
    let big_n = n as i64;
    let reach = 8.0 / epsilon.sqrt();
    let intervals = merge_intervals((-big_n..=big_n).map(|k| (k as f64 - reach, k as f64 + reach)).collect());
    let pref = (epsilon / PI).sqrt() / (2.0 * PI);
    let inner_opts = QuadOptions::abs(tol * 1e-2);

    let outer = integrate_vec_over(
        |p, out| {
            let gauss: Vec<f64> = (-big_n..=big_n)
                .map(|k| (-epsilon * (p - k as f64).powi(2) / 2.0).exp())
                .collect();
            let inner = integrate_vec(
                |q, acc| {
                    let fv = f(q, p);
                    for i in 0..dim {
                        for j in 0..dim {
                            let m = (i as f64) - (j as f64);
                            let v = fv * C64::from_polar(gauss[i] * gauss[j], -m * q);
                            acc[2 * (i * dim + j)] = v.re;
                            acc[2 * (i * dim + j) + 1] = v.im;
                        }
                    }
                },
                0.0,
                2.0 * PI,
                2 * dim * dim,
                inner_opts,
            );
            match inner {
                Ok(r) => out.copy_from_slice(&r.values),
                Err(_) => out.iter_mut().for_each(|v| *v = f64::NAN),
            }
        },
        &intervals,
        2 * dim * dim,
        QuadOptions::abs(tol / pref),
    )?;

    let entries = DMatrix::from_fn(dim, dim, |i, j| {
        let k = 2 * (i * dim + j);
        C64::new(outer.values[k], outer.values[k + 1]) * pref
    });
    Ok(CircleOperator {
        half_bandwidth: n,
        entries,
        epsilon: Some(epsilon),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::max_abs;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cs_symmetric_at_origin() {
        let cs = cs_coeffs_circle(0.0, 0.0, 1.0, 10).unwrap();
        for n in 1..=10 {
            let a = cs.coefficient(n);
            let b = cs.coefficient(-n);
            assert!(a.im.abs() < 1e-16 && a.re > 0.0);
            assert!((a - b).norm() < 1e-16);
        }
        assert!((cs.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(!cs.truncated());
    }

    #[test]
    fn cs_phase_at_pi() {
        let cs0 = cs_coeffs_circle(0.0, 0.4, 0.8, 12).unwrap();
        let cs = cs_coeffs_circle(PI, 0.4, 0.8, 12).unwrap();
        for n in -12..=12i64 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((cs.coefficient(n) - cs0.coefficient(n) * sign).norm() < 1e-14);
        }
    }

    #[test]
    fn cs_truncation_flagged() {
        let cs = cs_coeffs_circle(0.0, 0.0, 0.01, 5).unwrap();
        assert!(cs.truncated());
        assert!(cs.tail_bound > 0.1);
    }

    #[test]
    fn momentum_operator() {
        let p = op_momentum_circle(2).unwrap();
        for n in -2..=2i64 {
            assert_eq!(p.get(n, n), c(n as f64, 0.0));
        }
        assert_eq!(p.get(1, 0), c(0.0, 0.0));
        assert_eq!(p.entries().trace(), c(0.0, 0.0));
        assert!(op_momentum_circle(0).is_err());
    }

    #[test]
    fn fourier_coefficients_of_sawtooth() {
        let f = |q: f64| c(q, 0.0);
        let c0 = fourier_coefficient(f, 0, 1e-12).unwrap();
        assert!((c0 - c(PI, 0.0)).norm() < 1e-10);
        for n in [1i64, 2, -3, 7] {
            let cn = fourier_coefficient(f, n, 1e-12).unwrap();
            assert!((cn - c(0.0, 1.0 / n as f64)).norm() < 1e-10, "n={n}");
        }
        let e = |q: f64| C64::from_polar(1.0, q);
        assert!((fourier_coefficient(e, 1, 1e-12).unwrap() - c(1.0, 0.0)).norm() < 1e-10);
        assert!(fourier_coefficient(e, 2, 1e-12).unwrap().norm() < 1e-10);
    }

    #[test]
    fn angle_function_cases() {
        let one = op_angle_function(|_| c(1.0, 0.0), 0.7, 3, 1e-12).unwrap();
        assert!(max_abs(&(one.entries() - CMatrix::identity(7, 7))) < 1e-10);

        let q = op_angle_function(|q| c(q, 0.0), 1.0, 3, 1e-12).unwrap();
        let expected = c(0.0, (-0.25f64).exp());
        assert!((q.get(1, 0) - expected).norm() < 1e-10);
        assert!((q.get(1, 0) - c(0.0, 0.778801)).norm() < 1e-6);
        assert!(max_abs(&(q.entries() - op_angle(1.0, 3).unwrap().entries())) < 1e-10);

        let s = op_angle_function(|q| C64::from_polar(1.0, q), 0.5, 3, 1e-12).unwrap();
        assert!(max_abs(&(s.entries() - op_shift(0.5, 3).unwrap().entries())) < 1e-10);
    }

    #[test]
    fn angle_operator_structure() {
        let q = op_angle(0.6, 5).unwrap();
        for n in -5..=5 {
            assert_eq!(q.get(n, n), c(PI, 0.0));
        }
        assert!((q.get(1, 0) - c(0.0, (-0.15f64).exp())).norm() < 1e-16);
        assert!(q.is_hermitian(0.0));
    }

    #[test]
    fn angle_off_diagonal_decay() {
        let a = op_angle(0.3, 6).unwrap();
        let b = op_angle(0.9, 6).unwrap();
        for m in 1..12i64 {
            let x = a.get(6, 6 - m).norm();
            let y = a.get(6, 6 - m - 1).norm();
            assert!(y < x);
            assert!(b.get(6, 6 - m).norm() < x);
        }
    }

    #[test]
    fn shift_operator() {
        let s = op_shift(1.0, 4).unwrap();
        assert!((s.get(1, 0).re - 0.778801).abs() < 1e-6);
        let nonzero = s.entries().iter().filter(|v| v.norm() > 0.0).count();
        assert_eq!(nonzero, 8);
        let tiny = op_shift(1e-12, 4).unwrap();
        assert!((tiny.get(-3, -4).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_shift_commutator() {
        let p = op_momentum_circle(6).unwrap();
        let s = op_shift(0.8, 6).unwrap();
        let comm = commutator(&p, &s).unwrap();
        for i in 1..12 {
            for j in 1..12 {
                assert_eq!(comm.entries()[(i, j)], s.entries()[(i, j)]);
            }
        }
    }

    #[test]
    fn momentum_angle_commutator() {
        let eps = 0.4;
        let p = op_momentum_circle(5).unwrap();
        let q = op_angle(eps, 5).unwrap();
        let comm = commutator(&p, &q).unwrap();
        for a in -5..=5i64 {
            for b in -5..=5i64 {
                let expected = if a == b {
                    c(0.0, 0.0)
                } else {
                    c(0.0, (-eps * ((a - b) * (a - b)) as f64 / 4.0).exp())
                };
                assert!((comm.get(a, b) - expected).norm() < 1e-14);
            }
        }
        // anti-Hermitian
        let adj = comm.entries().adjoint();
        assert!(max_abs(&(comm.entries() + adj)) < 1e-14);
        assert!(max_abs(commutator(&q, &q).unwrap().entries()) == 0.0);
    }

    #[test]
    fn commutator_shape_checks() {
        let a = op_angle(0.4, 3).unwrap();
        let b = op_angle(0.4, 4).unwrap();
        let d = op_angle(0.5, 3).unwrap();
        assert!(matches!(commutator(&a, &b), Err(CsqError::ShapeMismatch(_))));
        assert!(matches!(commutator(&a, &d), Err(CsqError::ShapeMismatch(_))));
    }

    #[test]
    fn lower_symbols() {
        let id = CircleOperator::identity(40);
        let one = lower_symbol_circle_with(&id, 1.3, 0.2, 0.5).unwrap();
        assert!((one - c(1.0, 0.0)).norm() < 1e-12);

        let q = op_angle(0.01, 110).unwrap();
        let v = lower_symbol_circle(&q, 2.0, 0.0).unwrap();
        assert!((v.re - 2.0).abs() < 0.02 && v.im.abs() < 1e-12);

        let p = op_momentum_circle(30).unwrap();
        let comm = commutator(&p, &op_angle(0.5, 30).unwrap()).unwrap();
        let s = lower_symbol_circle(&comm, PI, 0.0).unwrap();
        assert!(s.re.abs() < 1e-14);
        assert!(s.im < 0.0);
    }

    #[test]
    fn closed_form_symbols_match_matrix_form() {
        for &(eps, q0, p0) in &[(0.5, PI, 0.0), (1.0, 0.4, 0.3), (0.2, 5.0, -1.7), (2.0, 2.2, 0.5)] {
            let n = 60;
            let q = op_angle(eps, n).unwrap();
            let matrix = lower_symbol_circle(&q, q0, p0).unwrap();
            let closed = angle_symbol(q0, p0, eps, 1e-16).unwrap();
            assert!((matrix - closed).norm() < 1e-12, "eps={eps}: {matrix} vs {closed}");

            let comm = commutator(&op_momentum_circle(n).unwrap(), &q).unwrap();
            let m2 = lower_symbol_circle(&comm, q0, p0).unwrap();
            let c2 = commutator_symbol(q0, p0, eps, 1e-16).unwrap();
            assert!((m2 - c2).norm() < 1e-12);
        }
    }

    #[test]
    fn quadrature_oracle_angle() {
        let oracle = quantize_circle_by_quadrature(|q, _| c(q, 0.0), 1.0, 2, 1e-10).unwrap();
        let closed = op_angle(1.0, 2).unwrap();
        assert!(max_abs(&(oracle.entries() - closed.entries())) < 1e-8);
        assert!((oracle.get(1, 0) - c(0.0, 0.778801)).norm() < 1e-6);
    }
}
