//! Gaussian lattice sums behind every normalization in the crate.
//!
//! Each kernel comes with a dual representation: the circle normalization
//! in direct and Poisson-resummed form, the well normalization as a sum over
//! the levels and as a difference of Jacobi-type theta sums. The theta route
//! is always evaluated through its Poisson-resummed series, so the two
//! routes share no summation code.
//!
//! Truncation: a Gaussian lattice sum `Σ_n A e^{-(x-n)²/w²}` is cut to the
//! window where terms exceed a threshold, and the discarded tail on each
//! side is bounded by its first term plus the Gaussian integral beyond it.
//! The window is widened until that bound falls below the requested
//! tolerance.

use std::f64::consts::PI;

use crate::error::{positive, Result};
use crate::params::{Parameters, PhasePoint};

/// A kernel value with an upper bound on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub truncation_bound: f64,
}

/// Contiguous index window `lo..=hi` of a Gaussian lattice sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermWindow {
    pub lo: i64,
    pub hi: i64,
    /// Radius (in lattice units) where the Gaussian drops to the threshold.
    pub half_width: f64,
    /// Bound on `Σ_{n ∉ window} e^{-(center-n)²/width²}`.
    pub tail_bound: f64,
    /// Bound on `Σ_{n ∉ window} |n - center| e^{-(center-n)²/width²}`.
    pub moment_tail_bound: f64,
}

impl TermWindow {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }

    /// Restricts to indices `>= min`, keeping the tail bounds (dropping
    /// more terms is the caller's choice, not truncation).
    pub fn from_index(self, min: i64) -> Self {
        Self {
            lo: self.lo.max(min),
            ..self
        }
    }
}

fn side_bounds(d: f64, width: f64) -> (f64, f64) {
    let d = d.max(0.0);
    let g = (-(d * d) / (width * width)).exp();
    let integral = if d > 0.0 {
        (width * width * g / (2.0 * d)).min(width * PI.sqrt() / 2.0)
    } else {
        width * PI.sqrt() / 2.0
    };
    let gauss = g + integral;

    // t·g(t) peaks at t = w/√2; a unimodal sum is bounded by its peak
    // plus the integral.
    let peak = if d * std::f64::consts::SQRT_2 >= width {
        d * g
    } else {
        width / std::f64::consts::SQRT_2 * (-0.5f64).exp()
    };
    let moment = peak + width * width * g / 2.0;
    (gauss, moment)
}

/// Index window of `e^{-(center-n)²/width²}` holding every term `>= tol`.
///
/// `width` plays the role of ρ in lattice units. The returned bounds
/// describe everything outside the window and may exceed `tol`; see
/// [`gaussian_window`] for a window that guarantees a tail below `tol`.
pub fn term_cutoff(center: f64, width: f64, tol: f64) -> TermWindow {
    let half_width = if tol < 1.0 {
        width * (1.0 / tol).ln().sqrt()
    } else {
        0.0
    };
    let lo = (center - half_width).ceil() as i64;
    let hi = (center + half_width).floor() as i64;

    let (left_d, right_d) = if lo <= hi {
        (center - (lo - 1) as f64, (hi + 1) as f64 - center)
    } else {
        (center - hi as f64, lo as f64 - center)
    };
    let (gl, ml) = side_bounds(left_d, width);
    let (gr, mr) = side_bounds(right_d, width);
    TermWindow {
        lo,
        hi,
        half_width,
        tail_bound: gl + gr,
        moment_tail_bound: ml + mr,
    }
}

/// Smallest threshold window whose tail, scaled by `tail_weight`, is below `tol`.
pub fn gaussian_window<W>(center: f64, width: f64, tol: f64, tail_weight: W) -> TermWindow
where
    W: Fn(&TermWindow) -> f64,
{
    let mut threshold = tol.min(0.5);
    loop {
        let window = term_cutoff(center, width, threshold);
        if tail_weight(&window) < tol || threshold < 1e-300 {
            return window;
        }
        threshold *= 1e-3;
    }
}

fn check_tol(tol: f64) -> Result<f64> {
    positive("tol", tol)
}

/// √(ε/π) Σ_n e^{-ε(p-n)²}.
pub fn norm_circle_direct(p: f64, epsilon: f64, tol: f64) -> Result<KernelValue> {
    positive("epsilon", epsilon)?;
    check_tol(tol)?;
    let p = p - p.round();
    let width = 1.0 / epsilon.sqrt();
    let pref = (epsilon / PI).sqrt();
    let window = gaussian_window(p, width, tol, |w| pref * w.tail_bound);
    let sum: f64 = window
        .indices()
        .map(|n| (-epsilon * (p - n as f64).powi(2)).exp())
        .sum();
    Ok(KernelValue {
        value: pref * sum,
        truncation_bound: pref * window.tail_bound,
    })
}

/// Σ_n e^{2πinp} e^{-π²n²/ε}, the Poisson-resummed circle normalization.
pub fn norm_circle_poisson(p: f64, epsilon: f64, tol: f64) -> Result<KernelValue> {
    positive("epsilon", epsilon)?;
    check_tol(tol)?;
    let p = p - p.round();
    let width = epsilon.sqrt() / PI;
    let window = gaussian_window(0.0, width, tol, |w| w.tail_bound);
    let mut sum = 0.0;
    for n in (1..=window.hi).rev() {
        let n = n as f64;
        sum += (-PI * PI * n * n / epsilon).exp() * (2.0 * PI * n * p).cos();
    }
    Ok(KernelValue {
        value: 1.0 + 2.0 * sum,
        truncation_bound: window.tail_bound,
    })
}

/// Lattice position of `p` and the Gaussian width in lattice units (= ϑ).
fn lattice(p: f64, params: &Parameters) -> (f64, f64) {
    (p / params.momentum_step(), params.theta_value())
}

/// 𝒩(q,p) = c Σ_{n≥1} [e^{-(p-p_n)²/ρ²} + e^{-(p+p_n)²/ρ²}] sin²(nπq/L).
pub fn norm_well(x: PhasePoint, params: &Parameters, tol: f64) -> Result<KernelValue> {
    x.check_inside_well(params)?;
    check_tol(tol)?;
    let c = params.c();
    let (xl, width) = lattice(x.p, params);
    let k = PI * x.q / params.length_value();

    let mut value = 0.0;
    let mut bound = 0.0;
    for center in [xl, -xl] {
        let window = gaussian_window(center, width, tol / 2.0, |w| c * w.tail_bound).from_index(1);
        for n in window.indices() {
            let g = (-((center - n as f64) / width).powi(2)).exp();
            value += g * (n as f64 * k).sin().powi(2);
        }
        bound += window.tail_bound;
    }
    Ok(KernelValue {
        value: c * value,
        truncation_bound: c * bound,
    })
}

/// Σ_n e^{-(x-n)²/a²} cos(n z), through its Poisson-resummed series
/// a√π Σ_k cos((2πk - z) x) e^{-a²(2πk - z)²/4}.
fn theta_cos_sum(x: f64, a: f64, z: f64, tol: f64) -> (f64, f64) {
    let pref = a * PI.sqrt();
    let width = 1.0 / (a * PI);
    let center = z / (2.0 * PI);
    let window = gaussian_window(center, width, tol, |w| pref * w.tail_bound);
    let frac = x - x.floor();
    let zx = (z * x).rem_euclid(2.0 * PI);
    let mut sum = 0.0;
    for k in window.indices() {
        let t = 2.0 * PI * k as f64 - z;
        let phase = 2.0 * PI * (k as f64 * frac).rem_euclid(1.0) - zx;
        sum += phase.cos() * (-(a * t).powi(2) / 4.0).exp();
    }
    (pref * sum, pref * window.tail_bound)
}

/// 𝒮(q,p) = Re{½ Σ_{n∈ℤ} [1 - e^{i2πnq/L}] e^{-(p-p_n)²/ρ²}}, dimensionless.
pub fn theta_sum_s(x: PhasePoint, params: &Parameters, tol: f64) -> Result<KernelValue> {
    x.check_inside_well(params)?;
    check_tol(tol)?;
    let (xl, a) = lattice(x.p, params);
    let z = 2.0 * PI * x.q / params.length_value();
    let (full, b0) = theta_cos_sum(xl, a, 0.0, tol);
    let (shifted, b1) = theta_cos_sum(xl, a, z, tol);
    Ok(KernelValue {
        value: 0.5 * (full - shifted),
        truncation_bound: 0.5 * (b0 + b1),
    })
}

/// 𝒩 = c·𝒮 evaluated through the theta-function route.
pub fn norm_well_theta(x: PhasePoint, params: &Parameters, tol: f64) -> Result<KernelValue> {
    let c = params.c();
    let s = theta_sum_s(x, params, tol / c)?;
    Ok(KernelValue {
        value: c * s.value,
        truncation_bound: c * s.truncation_bound,
    })
}

/// 𝓜(q,p) = c Σ_{n≥1} p_n [e^{-(p-p_n)²/ρ²} - e^{-(p+p_n)²/ρ²}] sin²(nπq/L).
pub fn momentum_sum_m(x: PhasePoint, params: &Parameters, tol: f64) -> Result<KernelValue> {
    x.check_inside_well(params)?;
    check_tol(tol)?;
    let c = params.c();
    let step = params.momentum_step();
    let (xl, width) = lattice(x.p, params);
    let k = PI * x.q / params.length_value();

    let tail = |w: &TermWindow| c * step * (xl.abs() * w.tail_bound + w.moment_tail_bound);
    let mut value = 0.0;
    let mut bound = 0.0;
    for (center, sign) in [(xl, 1.0), (-xl, -1.0)] {
        let window = gaussian_window(center, width, tol / 2.0, tail).from_index(1);
        for n in window.indices() {
            let g = (-((center - n as f64) / width).powi(2)).exp();
            value += sign * n as f64 * g * (n as f64 * k).sin().powi(2);
        }
        bound += tail(&window);
    }
    Ok(KernelValue {
        value: c * step * value,
        truncation_bound: bound,
    })
}

/// Amplitudes of the well basis functions at one phase point, rescaled so
/// the largest term of the norm sum is one.
///
/// `plus[n-1]` is `e^{-((p-p_n)²/ρ² - shift)/2} sin(nπq/L)` and `minus[n-1]`
/// the same with `p+p_n`. `scaled_norm` is `𝒮(q,p)·e^{shift}`, so the
/// normalized coherent-state components are `amplitude/√scaled_norm`
/// without ever forming the (possibly underflowing) 𝒩 itself.
#[derive(Debug, Clone, PartialEq)]
pub struct WellWeights {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub shift: f64,
    pub scaled_norm: f64,
    /// Bound on the relative norm mass beyond the last stored level.
    pub tail_bound: f64,
}

impl WellWeights {
    pub fn levels(&self) -> usize {
        self.plus.len()
    }

    /// Normalized κ = + and κ = − components for levels 1..=n.
    pub fn components(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let inv = 1.0 / self.scaled_norm.sqrt();
        let take = n.min(self.levels());
        let mut plus: Vec<f64> = self.plus[..take].iter().map(|v| v * inv).collect();
        let mut minus: Vec<f64> = self.minus[..take].iter().map(|v| v * inv).collect();
        plus.resize(n, 0.0);
        minus.resize(n, 0.0);
        (plus, minus)
    }

    /// Relative norm mass carried by levels above `n`.
    pub fn mass_above(&self, n: usize) -> f64 {
        let beyond: f64 = (n..self.levels())
            .map(|i| self.plus[i].powi(2) + self.minus[i].powi(2))
            .sum();
        beyond / self.scaled_norm + self.tail_bound
    }
}

/// Builds [`WellWeights`] for at least `min_levels` levels, extending the
/// level range until the relative tail is below `tol`.
pub fn well_weights(x: PhasePoint, params: &Parameters, min_levels: usize, tol: f64) -> Result<WellWeights> {
    x.check_inside_well(params)?;
    check_tol(tol)?;
    let (xl, width) = lattice(x.p, params);
    let k = PI * x.q / params.length_value();
    let log_tol = (1.0 / tol.min(0.5)).ln();

    // log of each norm term: -(x∓n)²/w² + 2 ln|sin|
    let log_terms = |n: usize| {
        let nf = n as f64;
        let s = (nf * k).sin();
        let ls = 2.0 * s.abs().ln();
        (-((xl - nf) / width).powi(2) + ls, -((xl + nf) / width).powi(2) + ls, s)
    };

    let mut n_max = ((xl.abs() + width * log_tol.sqrt()).ceil() as usize + 1).max(min_levels);
    loop {
        let terms: Vec<_> = (1..=n_max).map(log_terms).collect();
        let peak = terms.iter().flat_map(|t| [t.0, t.1]).fold(f64::NEG_INFINITY, f64::max);
        let shift = -peak;

        // Remaining terms sit at distance d0 from both centers, |sin| ≤ 1.
        let d0 = (n_max as f64 + 1.0) - xl.abs();
        let reach_log = -(d0 * d0) / (width * width) + shift;
        if d0 > 0.0 && reach_log < -log_tol - 1.0 {
            let g = reach_log.exp();
            let amp = |l: f64, s: f64| s.signum() * ((l + shift) / 2.0).exp();
            let plus: Vec<f64> = terms.iter().map(|t| amp(t.0, t.2)).collect();
            let minus: Vec<f64> = terms.iter().map(|t| amp(t.1, t.2)).collect();
            let scaled_norm: f64 = plus.iter().chain(minus.iter()).map(|v| v * v).sum();
            let tail = 2.0 * (g + width * width * g / (2.0 * d0));
            return Ok(WellWeights {
                plus,
                minus,
                shift,
                scaled_norm,
                tail_bound: tail / scaled_norm,
            });
        }
        n_max = n_max + n_max / 2 + 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-16;

    /// Plain summation over a fixed generous range, independent of windows.
    fn brute_circle(p: f64, eps: f64) -> f64 {
        (-200..=200).map(|n| (-eps * (p - n as f64).powi(2)).exp()).sum::<f64>() * (eps / PI).sqrt()
    }

    fn brute_well(q: f64, p: f64, params: &Parameters) -> f64 {
        let rho = params.rho();
        (1..=400)
            .map(|n| {
                let pn = params.p_n(n);
                (((-(p - pn) * (p - pn) / (rho * rho)).exp()) + (-(p + pn) * (p + pn) / (rho * rho)).exp())
                    * (n as f64 * PI * q / params.length_value()).sin().powi(2)
            })
            .sum::<f64>()
            * params.c()
    }

    #[test]
    fn circle_direct_examples() {
        let v = norm_circle_direct(0.0, 1.0, 1e-12).unwrap();
        let exact = 1.0 + 2.0 * (-PI * PI).exp();
        assert!((v.value - exact).abs() < 1e-12);
        assert!((v.value - brute_circle(0.0, 1.0)).abs() < 1e-14);
        assert!(v.truncation_bound <= 1e-12);

        let small = norm_circle_direct(0.37, 0.01, 1e-12).unwrap();
        assert!((small.value - 1.0).abs() <= small.truncation_bound + 1e-14);
        let tight = norm_circle_direct(0.37, 0.01, 1e-16).unwrap();
        assert!((tight.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn circle_periodicity() {
        for &p in &[0.0, 0.37, -1.2, 2.75] {
            let a = norm_circle_direct(p, 0.7, TOL).unwrap().value;
            let b = norm_circle_direct(p + 1.0, 0.7, TOL).unwrap().value;
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn circle_poisson_examples() {
        let v = norm_circle_poisson(0.0, 1.0, 1e-12).unwrap();
        assert!((v.value - (1.0 + 2.0 * (-PI * PI).exp())).abs() < 1e-12);
        for &p in &[0.0, 0.3, -2.1] {
            assert!((norm_circle_poisson(p, 1e-3, TOL).unwrap().value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn circle_rejects_bad_inputs() {
        assert!(norm_circle_direct(0.0, 0.0, 1e-12).is_err());
        assert!(norm_circle_direct(0.0, 1.0, 0.0).is_err());
        assert!(norm_circle_poisson(0.0, -1.0, 1e-12).is_err());
    }

    #[test]
    fn well_example_point() {
        let params = Parameters::default();
        let x = PhasePoint::new(PI / 2.0, 1.0);
        // direct n ≤ 8 summation
        let c = 2.0 / PI.powf(1.5);
        let bracket: f64 = (1..=8)
            .map(|n: i32| {
                let nf = n as f64;
                ((-(1.0 - nf).powi(2)).exp() + (-(1.0 + nf).powi(2)).exp()) * (nf * PI / 2.0).sin().powi(2)
            })
            .sum();
        // c = 2/π^{3/2} = 0.3591742…, bracket 1.0366315…
        assert!((c - 0.359_174_244_250_333).abs() < 1e-14);
        assert!((bracket - 1.036_631_502_847_818).abs() < 1e-14);
        let v = norm_well(x, &params, TOL).unwrap();
        assert!((v.value - c * bracket).abs() < 1e-14);
        assert!((v.value - 0.372_331_336_601_452).abs() < 1e-14);
        let t = norm_well_theta(x, &params, TOL).unwrap();
        assert!((t.value - v.value).abs() < 1e-12);
    }

    #[test]
    fn well_matches_brute_force() {
        for theta in [0.1, 0.5, 1.0, 3.0, 5.0] {
            let params = Parameters::with_theta(theta).unwrap();
            for &(q, p) in &[(0.3, 0.0), (1.1, 2.5), (2.9, -7.3), (PI / 2.0, 12.0)] {
                let v = norm_well(PhasePoint::new(q, p), &params, TOL).unwrap();
                let b = brute_well(q, p, &params);
                assert!((v.value - b).abs() < 1e-13 * b.max(1.0), "theta={theta} q={q} p={p}");
            }
        }
    }

    #[test]
    fn well_symmetries() {
        let params = Parameters::with_theta(0.8).unwrap();
        let a = norm_well(PhasePoint::new(0.7, 1.9), &params, TOL).unwrap().value;
        let b = norm_well(PhasePoint::new(0.7, -1.9), &params, TOL).unwrap().value;
        let c = norm_well(PhasePoint::new(PI - 0.7, 1.9), &params, TOL).unwrap().value;
        assert!((a - b).abs() < 1e-15 * a);
        assert!((a - c).abs() < 1e-14 * a);
    }

    #[test]
    fn theta_route_ratio_and_wall_limit() {
        let params = Parameters::with_theta(1.3).unwrap();
        let x = PhasePoint::new(0.9, 0.4);
        let s = theta_sum_s(x, &params, TOL).unwrap();
        let n = norm_well_theta(x, &params, TOL).unwrap();
        assert!((n.value / s.value - params.c()).abs() < 1e-14);

        let near = norm_well_theta(PhasePoint::new(1e-6, 0.4), &params, TOL).unwrap();
        assert!(near.value.abs() < 1e-9);
        let far = norm_well_theta(PhasePoint::new(1e-3, 0.4), &params, TOL).unwrap();
        assert!(near.value.abs() < far.value);
    }

    #[test]
    fn well_degenerate_points() {
        let params = Parameters::default();
        for q in [0.0, PI, -0.1, 4.0] {
            let x = PhasePoint::new(q, 0.0);
            assert!(norm_well(x, &params, TOL).is_err());
            assert!(norm_well_theta(x, &params, TOL).is_err());
            assert!(momentum_sum_m(x, &params, TOL).is_err());
        }
    }

    #[test]
    fn momentum_sum_examples() {
        let params = Parameters::default();
        let zero = momentum_sum_m(PhasePoint::new(PI / 2.0, 0.0), &params, TOL).unwrap();
        assert!(zero.value.abs() < 1e-16);

        let m = momentum_sum_m(PhasePoint::new(PI / 2.0, 1.0), &params, TOL).unwrap();
        let n = norm_well(PhasePoint::new(PI / 2.0, 1.0), &params, TOL).unwrap();
        // c · [1·(1 - e^{-4}) + 3·(e^{-4} - e^{-16}) + 5·(e^{-16} - e^{-36})]
        let c = 2.0 / PI.powf(1.5);
        let direct = c
            * ((1.0 - (-4.0f64).exp())
                + 3.0 * ((-4.0f64).exp() - (-16.0f64).exp())
                + 5.0 * ((-16.0f64).exp() - (-36.0f64).exp()));
        assert!((m.value - direct).abs() < 1e-14);
        assert!((m.value - 0.372_331_336_601_452).abs() < 1e-14);
        assert!((m.value / n.value - 1.0).abs() < 1e-6);

        let neg = momentum_sum_m(PhasePoint::new(PI / 2.0, -1.0), &params, TOL).unwrap();
        assert!((m.value + neg.value).abs() < 1e-15);
    }

    #[test]
    fn scaled_weights_reproduce_kernel() {
        for theta in [0.3, 1.0, 4.0] {
            let params = Parameters::with_theta(theta).unwrap();
            let x = PhasePoint::new(1.2, -2.6);
            let w = well_weights(x, &params, 4, TOL).unwrap();
            let s = norm_well(x, &params, TOL).unwrap().value / params.c();
            assert!((w.scaled_norm * (-w.shift).exp() - s).abs() < 1e-14 * s.max(1.0));
            let (a, b) = w.components(w.levels());
            let total: f64 = a.iter().chain(b.iter()).map(|v| v * v).sum();
            assert!((total - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn scaled_weights_survive_tiny_theta() {
        // 𝒩 itself underflows here
        let params = Parameters::with_theta(0.01).unwrap();
        let x = PhasePoint::new(0.8, 0.0);
        assert!(norm_well(x, &params, TOL).unwrap().value < 1e-300);
        let w = well_weights(x, &params, 3, TOL).unwrap();
        let (a, b) = w.components(3);
        assert!((a[0] * a[0] + b[0] * b[0] - 1.0).abs() < 1e-12);

        // nearest level has a vanishing sine at the center of the well
        let x = PhasePoint::new(PI / 2.0, 2.0);
        let w = well_weights(x, &params, 3, TOL).unwrap();
        let (a, b) = w.components(w.levels());
        let total: f64 = a.iter().chain(b.iter()).map(|v| v * v).sum();
        assert!(w.scaled_norm.is_finite() && (total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_examples() {
        let w = term_cutoff(0.0, 1.0, 1e-16);
        assert!((w.half_width - 6.0697).abs() < 1e-3);
        assert_eq!((w.lo, w.hi), (-6, 6));

        let one = term_cutoff(0.4, 1.0, 1.0);
        assert!(one.is_empty());
        let exact = term_cutoff(2.0, 1.0, 1.0);
        assert_eq!(exact.len(), 1);

        let wide = term_cutoff(0.0, 2.0, 1e-16);
        assert!((wide.half_width - 2.0 * w.half_width).abs() < 1e-12);
    }

    #[test]
    fn window_tail_bound_is_honest() {
        // compare the bound with the actual discarded sum
        for &(center, width, thr) in &[(0.3, 1.0, 1e-3), (5.5, 4.0, 1e-2), (-2.2, 0.3, 0.1)] {
            let w = term_cutoff(center, width, thr);
            let discarded: f64 = (-2000i64..=2000)
                .filter(|n| *n < w.lo || *n > w.hi)
                .map(|n| (-((center - n as f64) / width).powi(2)).exp())
                .sum();
            assert!(discarded <= w.tail_bound, "{discarded} > {}", w.tail_bound);
            let moment: f64 = (-2000i64..=2000)
                .filter(|n| *n < w.lo || *n > w.hi)
                .map(|n| (n as f64 - center).abs() * (-((center - n as f64) / width).powi(2)).exp())
                .sum();
            assert!(moment <= w.moment_tail_bound);
        }
    }
}
