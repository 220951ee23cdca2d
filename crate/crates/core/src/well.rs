//! Vector coherent states and quantized observables for the infinite well.
//!
//! The Hilbert space is ℂ² ⊗ ℋ with basis |n, κ⟩, n ≥ 1, κ = ±. Every
//! quantized observable leaves the two κ sectors invariant, so a truncated
//! operator is stored as two N×N blocks. Row/column `i` of a block is the
//! level `n = i + 1`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::circle::matrix_commutator;
use crate::error::{positive, CsqError, Result};
use crate::kernels::well_weights;
use crate::params::{Parameters, PhasePoint};
use crate::quadrature::{integrate, integrate_vec, integrate_vec_over, merge_intervals, QuadOptions};
use crate::{max_abs, CMatrix, C64, DEFAULT_TOL};

/// Default truncation for spectra.
pub const SPECTRUM_SIZE: usize = 64;
/// Default truncation for symbol grids.
pub const SYMBOL_SIZE: usize = 32;
/// Half-width, in units of ρ, of the momentum windows used by quadrature.
pub const WINDOW_RHOS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kappa {
    Plus,
    Minus,
}

impl Kappa {
    pub const BOTH: [Kappa; 2] = [Kappa::Plus, Kappa::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Kappa::Plus => 1.0,
            Kappa::Minus => -1.0,
        }
    }
}

/// How an operator acts on the two spinor components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinStructure {
    /// σ₀ ⊗ A: identical blocks.
    Sigma0,
    /// σ₃ ⊗ A: opposite blocks.
    Sigma3,
    /// Neither; arises for f(p) with no definite parity.
    General,
}

/// A truncated operator on ℂ² ⊗ ℋ_N, stored block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    plus: CMatrix,
    minus: CMatrix,
    structure: SpinStructure,
    params: Parameters,
}

impl BlockOperator {
    pub fn sigma0(block: CMatrix, params: Parameters) -> Self {
        Self {
            minus: block.clone(),
            plus: block,
            structure: SpinStructure::Sigma0,
            params,
        }
    }

    pub fn sigma3(block: CMatrix, params: Parameters) -> Self {
        Self {
            minus: -block.clone(),
            plus: block,
            structure: SpinStructure::Sigma3,
            params,
        }
    }

    /// Builds from two blocks, tagging the spin structure when the blocks
    /// are exactly equal or exactly opposite.
    pub fn from_blocks(plus: CMatrix, minus: CMatrix, params: Parameters) -> Result<Self> {
        if plus.shape() != minus.shape() || plus.nrows() != plus.ncols() || plus.nrows() == 0 {
            return Err(CsqError::ShapeMismatch(format!(
                "blocks must be equal nonempty squares, got {:?} and {:?}",
                plus.shape(),
                minus.shape()
            )));
        }
        let structure = if plus == minus {
            SpinStructure::Sigma0
        } else if plus == -minus.clone() {
            SpinStructure::Sigma3
        } else {
            SpinStructure::General
        };
        Ok(Self {
            plus,
            minus,
            structure,
            params,
        })
    }

    pub fn identity(n: usize, params: Parameters) -> Self {
        Self::sigma0(CMatrix::identity(n, n), params)
    }

    pub fn size(&self) -> usize {
        self.plus.nrows()
    }

    pub fn structure(&self) -> SpinStructure {
        self.structure
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn block(&self, kappa: Kappa) -> &CMatrix {
        match kappa {
            Kappa::Plus => &self.plus,
            Kappa::Minus => &self.minus,
        }
    }

    /// ⟨n,κ|A|n′,κ⟩ with levels counted from 1.
    pub fn get(&self, n: usize, n_prime: usize, kappa: Kappa) -> C64 {
        self.block(kappa)[(n - 1, n_prime - 1)]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        Kappa::BOTH.iter().all(|&k| {
            let b = self.block(k);
            max_abs(&(b - b.adjoint())) <= tol
        })
    }

    pub fn is_real_antisymmetric(&self, tol: f64) -> bool {
        Kappa::BOTH.iter().all(|&k| {
            let b = self.block(k);
            b.iter().all(|v| v.im.abs() <= tol) && max_abs(&(b + b.transpose())) <= tol
        })
    }

    fn combine(&self, other: &Self, multiplicative: bool, op: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Self> {
        if self.size() != other.size() {
            return Err(CsqError::ShapeMismatch(format!(
                "truncations differ: {} vs {}",
                self.size(),
                other.size()
            )));
        }
        use SpinStructure::*;
        let known = match (self.structure, other.structure) {
            (General, _) | (_, General) => None,
            (a, b) if multiplicative => Some(if a == b { Sigma0 } else { Sigma3 }),
            (a, b) if a == b => Some(a),
            _ => None,
        };
        let plus = op(&self.plus, &other.plus);
        match known {
            Some(Sigma0) => Ok(Self::sigma0(plus, self.params)),
            Some(Sigma3) => Ok(Self::sigma3(plus, self.params)),
            _ => Self::from_blocks(plus, op(&self.minus, &other.minus), self.params),
        }
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.combine(other, true, |a, b| a * b)
    }

    /// [A, B] computed block by block.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.combine(other, true, matrix_commutator)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, false, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, false, |a, b| a + b)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            plus: self.plus.adjoint(),
            minus: self.minus.adjoint(),
            structure: self.structure,
            params: self.params,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            plus: &self.plus * C64::new(factor, 0.0),
            minus: &self.minus * C64::new(factor, 0.0),
            structure: self.structure,
            params: self.params,
        }
    }

    /// Largest entry difference over both blocks.
    pub fn max_diff(&self, other: &Self) -> f64 {
        if self.size() != other.size() {
            return f64::INFINITY;
        }
        max_abs(&(&self.plus - &other.plus)).max(max_abs(&(&self.minus - &other.minus)))
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        Err(CsqError::InvalidParameter {
            name: "N",
            value: 0.0,
            reason: "truncation must keep at least one level",
        })
    } else {
        Ok(())
    }
}

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn diagonal(n: usize, entry: impl Fn(usize) -> C64) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_fn(n, |i, _| entry(i + 1)))
}

/// A vector coherent state |x⟩ = |x,+⟩ + |x,−⟩ truncated to n ≤ N.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorCS {
    pub x: PhasePoint,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// 𝒩(x) of the untruncated state; may underflow to 0 for tiny ϑ.
    pub normalization: f64,
    /// Relative norm mass above level N.
    pub tail_bound: f64,
}

impl SpinorCS {
    pub fn size(&self) -> usize {
        self.plus.len()
    }

    /// ⟨x,κ|x,κ⟩ within the truncation.
    pub fn component_norm(&self, kappa: Kappa) -> f64 {
        let v = match kappa {
            Kappa::Plus => &self.plus,
            Kappa::Minus => &self.minus,
        };
        v.iter().map(|c| c * c).sum()
    }

    pub fn truncated(&self) -> bool {
        self.tail_bound > crate::circle::TRUNCATION_WARN
    }

    pub fn component(&self, kappa: Kappa) -> &[f64] {
        match kappa {
            Kappa::Plus => &self.plus,
            Kappa::Minus => &self.minus,
        }
    }
}

/// Components ⟨n,κ|x⟩ = √c e^{-(p-κp_n)²/(2ρ²)} sin(nπq/L) / √𝒩(x), n = 1..=N.
pub fn cs_coeffs_well(x: PhasePoint, params: &Parameters, n: usize) -> Result<SpinorCS> {
    check_size(n)?;
    let w = well_weights(x, params, n, DEFAULT_TOL)?;
    let (plus, minus) = w.components(n);
    let cs = SpinorCS {
        x,
        plus,
        minus,
        normalization: params.c() * w.scaled_norm * (-w.shift).exp(),
        tail_bound: w.mass_above(n),
    };
    if cs.truncated() {
        log::warn!(
            "well CS at (q={}, p={}) does not fit in N={n}: tail mass {:e}",
            x.q,
            x.p,
            cs.tail_bound
        );
    }
    Ok(cs)
}

/// p̂ = Σ p_n σ₃ ⊗ |n⟩⟨n|.
pub fn op_momentum(params: &Parameters, n: usize) -> Result<BlockOperator> {
    check_size(n)?;
    let block = diagonal(n, |k| real(params.p_n(k as i64)));
    Ok(BlockOperator::sigma3(block, *params))
}

/// f(p)̂: diagonal blocks (1/ρ√π) ∫ f(p) e^{-(p∓p_n)²/ρ²} dp.
///
/// Blocks agreeing (or opposing) within the quadrature tolerance are
/// symmetrized and tagged σ₀ (σ₃).
pub fn op_momentum_fn<F>(f: F, params: &Parameters, n: usize, tol: f64) -> Result<BlockOperator>
where
    F: Fn(f64) -> f64,
{
    check_size(n)?;
    positive("tol", tol)?;
    let rho = params.rho();
    let norm = 1.0 / (rho * PI.sqrt());
    let opts = QuadOptions::abs(tol / norm);
    let mut values = [Vec::with_capacity(n), Vec::with_capacity(n)];
    for (slot, kappa) in Kappa::BOTH.iter().enumerate() {
        for level in 1..=n {
            let center = kappa.sign() * params.p_n(level as i64);
            let r = integrate(
                |p| f(p) * (-((p - center) / rho).powi(2)).exp(),
                center - WINDOW_RHOS * rho,
                center + WINDOW_RHOS * rho,
                opts,
            )?;
            values[slot].push(norm * r.value);
        }
    }
    let [plus, minus] = values;
    let scale = plus.iter().chain(minus.iter()).fold(1.0f64, |m, v| m.max(v.abs()));
    let close =
        |a: &[f64], b: &[f64], sign: f64| a.iter().zip(b).all(|(x, y)| (x - sign * y).abs() <= 10.0 * tol * scale);
    let block = |v: &[f64]| diagonal(n, |k| real(v[k - 1]));
    let op = if close(&plus, &minus, 1.0) {
        let avg: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| 0.5 * (a + b)).collect();
        BlockOperator::sigma0(block(&avg), *params)
    } else if close(&plus, &minus, -1.0) {
        let avg: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| 0.5 * (a - b)).collect();
        BlockOperator::sigma3(block(&avg), *params)
    } else {
        BlockOperator::from_blocks(block(&plus), block(&minus), *params)?
    };
    Ok(op)
}

/// p²̂ = (ρ²/2) I + Σ p_n² σ₀ ⊗ |n⟩⟨n|.
pub fn op_p_squared(params: &Parameters, n: usize) -> Result<BlockOperator> {
    check_size(n)?;
    let rho = params.rho();
    let block = diagonal(n, |k| real(params.p_n(k as i64).powi(2) + rho * rho / 2.0));
    Ok(BlockOperator::sigma0(block, *params))
}

/// Ĥ = p²̂/2m.
pub fn op_hamiltonian(params: &Parameters, n: usize) -> Result<BlockOperator> {
    Ok(op_p_squared(params, n)?.scale(1.0 / (2.0 * params.mass_value())))
}

/// Cosine coefficients d_m(f), m = 0..=max_m, of a function on (0, L).
#[derive(Debug, Clone, PartialEq)]
pub struct CosineCoefficients {
    pub values: Vec<f64>,
    pub tol: f64,
}

impl CosineCoefficients {
    pub fn get(&self, m: usize) -> f64 {
        self.values[m]
    }

    /// Closed form for f(q) = q: d₀ = L/2, d_m = -2L/(mπ)² for odd m, 0 for even m.
    pub fn position(params: &Parameters, max_m: usize) -> Self {
        let l = params.length_value();
        let values = (0..=max_m)
            .map(|m| match m {
                0 => l / 2.0,
                m if m % 2 == 1 => -2.0 * l / (m as f64 * PI).powi(2),
                _ => 0.0,
            })
            .collect();
        Self { values, tol: 0.0 }
    }

    /// Closed form for f(q) = q²: d₀ = L²/3, d_m = 2L²(-1)^m/(mπ)².
    pub fn position_squared(params: &Parameters, max_m: usize) -> Self {
        let l = params.length_value();
        let values = (0..=max_m)
            .map(|m| match m {
                0 => l * l / 3.0,
                m => {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    2.0 * l * l * sign / (m as f64 * PI).powi(2)
                }
            })
            .collect();
        Self { values, tol: 0.0 }
    }
}

const BOUNDEDNESS_SAMPLES: usize = 1024;

fn check_bounded<F: Fn(f64) -> f64>(f: &F, length: f64) -> Result<()> {
    for i in 0..=BOUNDEDNESS_SAMPLES {
        // interior points including ones close to the walls
        let t = (i as f64 + 0.5) / (BOUNDEDNESS_SAMPLES as f64 + 1.0);
        let q = length * t;
        let v = f(q);
        if !v.is_finite() {
            return Err(CsqError::UnboundedFunction { at: q, value: v });
        }
    }
    Ok(())
}

/// d_m(f) = (1/L) ∫₀^L f(q) cos(mπq/L) dq.
pub fn cosine_coefficient<F>(f: F, m: usize, params: &Parameters, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    positive("tol", tol)?;
    let l = params.length_value();
    check_bounded(&f, l)?;
    let k = m as f64 * PI / l;
    let r = integrate(|q| f(q) * (k * q).cos(), 0.0, l, QuadOptions::abs(tol * l))?;
    Ok(r.value / l)
}

/// All d_m(f) for m = 0..=max_m.
pub fn cosine_coefficients<F>(f: F, params: &Parameters, max_m: usize, tol: f64) -> Result<CosineCoefficients>
where
    F: Fn(f64) -> f64,
{
    positive("tol", tol)?;
    let l = params.length_value();
    check_bounded(&f, l)?;
    let r = integrate_vec(
        |q, out| {
            let v = f(q);
            for (m, o) in out.iter_mut().enumerate() {
                *o = v * (m as f64 * PI * q / l).cos();
            }
        },
        0.0,
        l,
        max_m + 1,
        QuadOptions::abs(tol * l),
    )?;
    Ok(CosineCoefficients {
        values: r.values.iter().map(|v| v / l).collect(),
        tol,
    })
}

/// Gaussian coupling e^{-(p_n - p_n′)²/(4ρ²)}.
fn coupling(params: &Parameters, n: usize, n_prime: usize) -> f64 {
    let d = params.p_n(n as i64) - params.p_n(n_prime as i64);
    let rho = params.rho();
    (-(d * d) / (4.0 * rho * rho)).exp()
}

/// f(q)̂ from precomputed cosine coefficients (needs d_m up to m = 2N).
pub fn op_position_from_coefficients(d: &CosineCoefficients, params: &Parameters, n: usize) -> Result<BlockOperator> {
    check_size(n)?;
    if d.values.len() < 2 * n + 1 {
        return Err(CsqError::ShapeMismatch(format!(
            "need d_m up to m = {}, have {}",
            2 * n,
            d.values.len() - 1
        )));
    }
    let block = CMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (i + 1, j + 1);
        real(coupling(params, a, b) * (d.get(a.abs_diff(b)) - d.get(a + b)))
    });
    Ok(BlockOperator::sigma0(block, *params))
}

/// f(q)̂ with entries e^{-(p_n-p_n′)²/(4ρ²)} [d_{n-n′}(f) - d_{n+n′}(f)].
pub fn op_position_fn<F>(f: F, params: &Parameters, n: usize, tol: f64) -> Result<BlockOperator>
where
    F: Fn(f64) -> f64,
{
    check_size(n)?;
    let d = cosine_coefficients(f, params, 2 * n, tol)?;
    op_position_from_coefficients(&d, params, n)
}

/// q̂ in closed form: L/2 on the diagonal and
/// -(2L/π²) e^{-(p_n-p_n′)²/(4ρ²)} [1/(n-n′)² - 1/(n+n′)²] for n+n′ odd.
pub fn op_position(params: &Parameters, n: usize) -> Result<BlockOperator> {
    check_size(n)?;
    let l = params.length_value();
    let block = CMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (i + 1, j + 1);
        if a == b {
            real(l / 2.0)
        } else if (a + b) % 2 == 1 {
            let diff = (a.abs_diff(b) as f64).powi(2);
            let sum = ((a + b) as f64).powi(2);
            real(-2.0 * l / (PI * PI) * coupling(params, a, b) * (1.0 / diff - 1.0 / sum))
        } else {
            real(0.0)
        }
    });
    Ok(BlockOperator::sigma0(block, *params))
}

/// q²̂ from the closed-form cosine coefficients of q².
pub fn op_position_squared(params: &Parameters, n: usize) -> Result<BlockOperator> {
    check_size(n)?;
    op_position_from_coefficients(&CosineCoefficients::position_squared(params, 2 * n), params, n)
}

/// C_{n,n′} = e^{-(p_n-p_n′)²/(4ρ²)} (n-n′) [1/(n-n′)² - 1/(n+n′)²] for n+n′ odd.
pub fn commutator_coefficient(params: &Parameters, n: usize, n_prime: usize) -> f64 {
    if (n + n_prime).is_multiple_of(2) {
        return 0.0;
    }
    let diff = n as f64 - n_prime as f64;
    let sum = (n + n_prime) as f64;
    coupling(params, n, n_prime) * diff * (1.0 / (diff * diff) - 1.0 / (sum * sum))
}

/// [q̂, p̂] = (2ħ/π) Σ C_{n,n′} σ₃ ⊗ |n⟩⟨n′|.
pub fn commutator_qp(params: &Parameters, n: usize) -> Result<BlockOperator> {
    check_size(n)?;
    let scale = 2.0 * params.hbar_value() / PI;
    let block = CMatrix::from_fn(n, n, |i, j| real(scale * commutator_coefficient(params, i + 1, j + 1)));
    Ok(BlockOperator::sigma3(block, *params))
}

/// Phase ω(n² - n′²)t accumulated between levels n and n′, reduced to
/// (-π, π]. The reduction is done in turns so that whole revivals cancel
/// exactly.
pub(crate) fn level_phase(params: &Parameters, n: usize, n_prime: usize, t: f64) -> f64 {
    let k = (n * n) as f64 - (n_prime * n_prime) as f64;
    angle_of_turns(revival_turns(params, t) * k)
}

/// ωt/2π.
fn revival_turns(params: &Parameters, t: f64) -> f64 {
    params.omega() * t / (2.0 * PI)
}

fn angle_of_turns(turns: f64) -> f64 {
    2.0 * PI * (turns - turns.round())
}

/// U(t) = e^{-iω_ϑt} Σ e^{-ip_n²t/(2mħ)} σ₀ ⊗ |n⟩⟨n|.
pub fn evolution_operator(t: f64, params: &Parameters, n: usize) -> Result<BlockOperator> {
    check_size(n)?;
    let theta = params.theta_value();
    let global = angle_of_turns(revival_turns(params, t) * theta * theta / 2.0);
    let block = diagonal(n, |k| C64::from_polar(1.0, -(global + level_phase(params, k, 0, t))));
    Ok(BlockOperator::sigma0(block, *params))
}

/// q̂(t) = U†(t) q̂ U(t): entries of q̂ times e^{i(p_n² - p_n′²)t/(2mħ)}.
pub fn heisenberg_position(t: f64, params: &Parameters, n: usize) -> Result<BlockOperator> {
    let q = op_position(params, n)?;
    let block = CMatrix::from_fn(n, n, |i, j| {
        q.plus[(i, j)] * C64::from_polar(1.0, level_phase(params, i + 1, j + 1, t))
    });
    Ok(BlockOperator::sigma0(block, *params))
}

/// Momentum windows ±p_n ± 8ρ covering every basis Gaussian up to level n.
pub fn momentum_windows(params: &Parameters, n: usize) -> Vec<(f64, f64)> {
    let reach = WINDOW_RHOS * params.rho();
    let mut windows = Vec::with_capacity(2 * n);
    for level in 1..=n {
        let p = params.p_n(level as i64);
        windows.push((p - reach, p + reach));
        windows.push((-p - reach, -p + reach));
    }
    merge_intervals(windows)
}

/// Quadrature oracle for the quantization of f(q, p):
/// ⟨n,κ|f̂|n′,κ⟩ = ∫∫ φ_{n,κ} f φ_{n′,κ} dq dp.
///
/// The q-integral is done first for every pair (n, n′) at once, the
/// p-integral then runs over the union of the Gaussian windows.
pub fn quantize_by_quadrature<F>(f: F, params: &Parameters, n: usize, tol: f64) -> Result<BlockOperator>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    check_size(n)?;
    positive("tol", tol)?;
    let l = params.length_value();
    let rho = params.rho();
    let c = params.c();
    let windows = momentum_windows(params, n);
    let span: f64 = windows.iter().map(|(a, b)| b - a).sum();
    let inner_opts = QuadOptions::abs(tol / (10.0 * c * span));
    let k = PI / l;
    let pairs = n * n;

    let outer = integrate_vec_over(
        |p, out| {
            let inner = integrate_vec(
                |q, acc| {
                    let fv = f(q, p);
                    let sines: Vec<f64> = (1..=n).map(|m| (m as f64 * k * q).sin()).collect();
                    for i in 0..n {
                        for j in 0..n {
                            acc[i * n + j] = fv * sines[i] * sines[j];
                        }
                    }
                },
                0.0,
                l,
                pairs,
                inner_opts,
            );
            let inner = match inner {
                Ok(r) => r.values,
                Err(_) => {
                    out.iter_mut().for_each(|v| *v = f64::NAN);
                    return;
                }
            };
            for (slot, kappa) in Kappa::BOTH.iter().enumerate() {
                let g: Vec<f64> = (1..=n)
                    .map(|m| {
                        let d = p - kappa.sign() * params.p_n(m as i64);
                        (-(d * d) / (2.0 * rho * rho)).exp()
                    })
                    .collect();
                for i in 0..n {
                    for j in 0..n {
                        out[slot * pairs + i * n + j] = c * g[i] * g[j] * inner[i * n + j];
                    }
                }
            }
        },
        &windows,
        2 * pairs,
        QuadOptions::abs(tol),
    )?;

    let block = |slot: usize| DMatrix::from_fn(n, n, |i, j| real(outer.values[slot * pairs + i * n + j]));
    BlockOperator::from_blocks(block(0), block(1), *params)
}

/// Builds the same oracle for several parameter sets in parallel.
pub fn quantize_by_quadrature_many<F>(f: F, params: &[Parameters], n: usize, tol: f64) -> Vec<Result<BlockOperator>>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    params
        .par_iter()
        .map(|p| quantize_by_quadrature(&f, p, n, tol))
        .collect()
}
