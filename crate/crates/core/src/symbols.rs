//! Lower symbols ⟨x|A|x⟩ on the phase space of the well, dispersions and
//! the commutator mean value.
//!
//! The closed-form symbols sum over every level that carries coherent-state
//! weight at the requested tolerance, so they do not depend on a matrix
//! truncation. [`lower_symbol`] instead evaluates the quadratic form of a
//! given truncated operator.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{CsqError, Result};
use crate::kernels::well_weights;
use crate::params::{Parameters, PhasePoint};
use crate::well::{commutator_coefficient, cs_coeffs_well, level_phase, BlockOperator, CosineCoefficients, Kappa};
use crate::C64;

/// Radicands of the dispersions down to this (negative) value are roundoff.
pub const RADICAND_CLAMP: f64 = 1e-12;
/// Default grid resolution per axis.
pub const GRID_POINTS: usize = 101;
/// Distance of the default grid from the walls.
pub const WALL_MARGIN: f64 = 0.05;

/// ⟨x|A|x⟩ with the coherent state truncated to the size of `a`.
pub fn lower_symbol(a: &BlockOperator, x: PhasePoint) -> Result<C64> {
    let cs = cs_coeffs_well(x, a.params(), a.size())?;
    let mut total = C64::new(0.0, 0.0);
    for kappa in Kappa::BOTH {
        let v = cs.component(kappa);
        let block = a.block(kappa);
        for (i, vi) in v.iter().enumerate() {
            if *vi == 0.0 {
                continue;
            }
            let row: C64 = v.iter().enumerate().map(|(j, vj)| block[(i, j)] * *vj).sum();
            total += row * *vi;
        }
    }
    Ok(total)
}

/// Normalized components over every level that matters at `tol`.
struct Amplitudes {
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl Amplitudes {
    fn new(x: PhasePoint, params: &Parameters, tol: f64) -> Result<Self> {
        let w = well_weights(x, params, 1, tol)?;
        let (plus, minus) = w.components(w.levels());
        Ok(Self { plus, minus })
    }

    fn levels(&self) -> usize {
        self.plus.len()
    }

    /// Σ_κ a_{n,κ} a_{n′,κ}, zero-based indices.
    fn pair(&self, i: usize, j: usize) -> f64 {
        self.plus[i] * self.plus[j] + self.minus[i] * self.minus[j]
    }
}

fn coupling(params: &Parameters, n: usize, n_prime: usize) -> f64 {
    let d = params.p_n(n as i64) - params.p_n(n_prime as i64);
    let rho = params.rho();
    (-(d * d) / (4.0 * rho * rho)).exp()
}

/// Σ over n+n′ odd of the position couplings, each pair weighted by `phase`.
fn position_correction(amp: &Amplitudes, params: &Parameters, phase: impl Fn(usize, usize) -> f64) -> f64 {
    let l = params.length_value();
    let mut q = 0.0;
    for i in 0..amp.levels() {
        // n + n′ odd: opposite parity, so j starts one above i and steps by 2
        for j in ((i + 1)..amp.levels()).step_by(2) {
            let (n, m) = (i + 1, j + 1);
            let diff = ((m - n) as f64).powi(2);
            let sum = ((n + m) as f64).powi(2);
            let g = coupling(params, n, m) * (1.0 / diff - 1.0 / sum);
            q += 2.0 * g * amp.pair(i, j) * phase(n, m);
        }
    }
    q * 2.0 * l / (PI * PI)
}

/// q̌(x) = L/2 − Q(q,p).
pub fn symbol_position(x: PhasePoint, params: &Parameters, tol: f64) -> Result<f64> {
    let amp = Amplitudes::new(x, params, tol)?;
    Ok(params.length_value() / 2.0 - position_correction(&amp, params, |_, _| 1.0))
}

/// q̌(x, t) = L/2 − Q(q,p,t); the pairs (n,n′) and (n′,n) combine into
/// cos((p_n² − p_n′²)t/(2mħ)).
pub fn symbol_position_t(x: PhasePoint, t: f64, params: &Parameters, tol: f64) -> Result<f64> {
    let amp = Amplitudes::new(x, params, tol)?;
    let correction = position_correction(&amp, params, |n, m| level_phase(params, n, m, t).cos());
    Ok(params.length_value() / 2.0 - correction)
}

/// p̌(x) = 𝓜(x)/𝒩(x).
pub fn symbol_momentum(x: PhasePoint, params: &Parameters, tol: f64) -> Result<f64> {
    let amp = Amplitudes::new(x, params, tol)?;
    Ok((0..amp.levels())
        .map(|i| params.p_n(i as i64 + 1) * (amp.plus[i].powi(2) - amp.minus[i].powi(2)))
        .sum())
}

/// Lower symbol of the quantized q².
pub fn symbol_position_squared(x: PhasePoint, params: &Parameters, tol: f64) -> Result<f64> {
    let amp = Amplitudes::new(x, params, tol)?;
    let n = amp.levels();
    let d = CosineCoefficients::position_squared(params, 2 * n);
    let mut total = 0.0;
    for i in 0..n {
        total += (d.get(0) - d.get(2 * i + 2)) * amp.pair(i, i);
        for j in (i + 1)..n {
            let (a, b) = (i + 1, j + 1);
            total += 2.0 * coupling(params, a, b) * (d.get(b - a) - d.get(a + b)) * amp.pair(i, j);
        }
    }
    Ok(total)
}

/// Lower symbol of the quantized p², ρ²/2 + Σ p_n² ⟨x|n⟩².
pub fn symbol_p_squared(x: PhasePoint, params: &Parameters, tol: f64) -> Result<f64> {
    let amp = Amplitudes::new(x, params, tol)?;
    let rho = params.rho();
    let sum: f64 = (0..amp.levels())
        .map(|i| params.p_n(i as i64 + 1).powi(2) * amp.pair(i, i))
        .sum();
    Ok(sum + rho * rho / 2.0)
}

fn root_of_radicand(radicand: f64, scale: f64) -> Result<f64> {
    if radicand >= 0.0 {
        return Ok(radicand.sqrt());
    }
    if radicand >= -RADICAND_CLAMP * scale.max(1.0) {
        log::warn!("dispersion radicand {radicand:e} clamped to zero");
        Ok(0.0)
    } else {
        Err(CsqError::NumericalConsistency { radicand })
    }
}

/// ΔQ = √(q²̌ − q̌²).
pub fn dispersion_q(x: PhasePoint, params: &Parameters, tol: f64) -> Result<f64> {
    let q2 = symbol_position_squared(x, params, tol)?;
    let q = symbol_position(x, params, tol)?;
    root_of_radicand(q2 - q * q, q2)
}

/// ΔP = √(p²̌ − p̌²).
pub fn dispersion_p(x: PhasePoint, params: &Parameters, tol: f64) -> Result<f64> {
    let p2 = symbol_p_squared(x, params, tol)?;
    let p = symbol_momentum(x, params, tol)?;
    root_of_radicand(p2 - p * p, p2)
}

/// ΔQ ΔP.
pub fn uncertainty_product(x: PhasePoint, params: &Parameters, tol: f64) -> Result<f64> {
    Ok(dispersion_q(x, params, tol)? * dispersion_p(x, params, tol)?)
}

/// A two-component state Σ_n (a_n |n,+⟩ + b_n |n,−⟩), levels from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Spinor {
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
}

impl Spinor {
    pub fn norm_sqr(&self) -> f64 {
        self.plus.iter().chain(self.minus.iter()).map(|c| c.norm_sqr()).sum()
    }
}

/// ⟨Ψ|[q̂,p̂]|Ψ⟩ = (2iħ/π) Σ_{n≠n′} C_{n,n′} ℑ(a_n* a_n′ − b_n* b_n′).
///
/// Only the first `n` levels of `psi` enter; `psi` must be normalized.
pub fn symbol_commutator_state(psi: &Spinor, params: &Parameters, n: usize) -> Result<C64> {
    if psi.plus.len() != psi.minus.len() {
        return Err(CsqError::ShapeMismatch(format!(
            "spinor components have lengths {} and {}",
            psi.plus.len(),
            psi.minus.len()
        )));
    }
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(CsqError::Validation(format!("state is not normalized: ‖ψ‖² = {norm}")));
    }
    let levels = n.min(psi.plus.len());
    let mut total = 0.0;
    for i in 0..levels {
        for j in 0..levels {
            let c = commutator_coefficient(params, i + 1, j + 1);
            if c == 0.0 {
                continue;
            }
            let w = (psi.plus[i].conj() * psi.plus[j]).im - (psi.minus[i].conj() * psi.minus[j]).im;
            total += c * w;
        }
    }
    Ok(C64::new(0.0, 2.0 * params.hbar_value() / PI * total))
}

/// Quantity sampled by a [`SymbolGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Position,
    PositionAt,
    Momentum,
    DispersionQ,
    DispersionP,
    Uncertainty,
    CommutatorMean,
}

impl SymbolKind {
    pub fn tag(self) -> &'static str {
        match self {
            SymbolKind::Position => "q",
            SymbolKind::PositionAt => "qt",
            SymbolKind::Momentum => "p",
            SymbolKind::DispersionQ => "dq",
            SymbolKind::DispersionP => "dp",
            SymbolKind::Uncertainty => "dqdp",
            SymbolKind::CommutatorMean => "commutator",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        [
            SymbolKind::Position,
            SymbolKind::PositionAt,
            SymbolKind::Momentum,
            SymbolKind::DispersionQ,
            SymbolKind::DispersionP,
            SymbolKind::Uncertainty,
            SymbolKind::CommutatorMean,
        ]
        .into_iter()
        .find(|k| k.tag() == tag)
    }

    pub fn is_complex(self) -> bool {
        self == SymbolKind::CommutatorMean
    }
}

/// A rectangular sampling of phase space, row-major in q then p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub q_range: (f64, f64),
    pub p_range: (f64, f64),
    pub n_q: usize,
    pub n_p: usize,
}

fn axis(range: (f64, f64), count: usize, i: usize) -> f64 {
    if count == 1 {
        range.0
    } else {
        range.0 + (range.1 - range.0) * i as f64 / (count - 1) as f64
    }
}

impl GridSpec {
    /// [0.05, L−0.05] × [−(p_N+4ρ)/2, (p_N+4ρ)/2] at 101×101.
    pub fn standard(params: &Parameters, n: usize) -> Self {
        let l = params.length_value();
        let half = (params.p_n(n as i64) + 4.0 * params.rho()) / 2.0;
        Self {
            q_range: (WALL_MARGIN, l - WALL_MARGIN),
            p_range: (-half, half),
            n_q: GRID_POINTS,
            n_p: GRID_POINTS,
        }
    }

    pub fn validate(&self, params: &Parameters) -> Result<()> {
        let l = params.length_value();
        if self.n_q == 0 || self.n_p == 0 {
            return Err(CsqError::Validation("grid needs at least one point per axis".into()));
        }
        let (q0, q1) = self.q_range;
        if !(q0 > 0.0 && q1 < l && q0 <= q1) {
            return Err(CsqError::Validation(format!(
                "q range [{q0}, {q1}] must lie strictly inside (0, {l})"
            )));
        }
        let (p0, p1) = self.p_range;
        if !(p0.is_finite() && p1.is_finite() && p0 <= p1) {
            return Err(CsqError::Validation(format!("invalid p range [{p0}, {p1}]")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_q * self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> PhasePoint {
        let (iq, ip) = (index / self.n_p, index % self.n_p);
        PhasePoint::new(axis(self.q_range, self.n_q, iq), axis(self.p_range, self.n_p, ip))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridValues {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

/// Symbol or dispersion values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    pub kind: SymbolKind,
    pub spec: GridSpec,
    pub values: GridValues,
    pub params: Parameters,
    pub time: Option<f64>,
}

impl SymbolGrid {
    pub fn real_values(&self) -> Option<&[f64]> {
        match &self.values {
            GridValues::Real(v) => Some(v),
            GridValues::Complex(_) => None,
        }
    }

    /// Smallest real value and the point where it occurs.
    pub fn min(&self) -> Option<(PhasePoint, f64)> {
        let v = self.real_values()?;
        v.iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &m)| (self.spec.point(i), m))
    }
}

/// Evaluates `kind` at every grid point. Points are computed in parallel,
/// the result order does not depend on scheduling.
///
/// The commutator mean uses the matrix [q̂,p̂] truncated at `n`; every
/// other kind uses the truncation-free closed forms.
pub fn evaluate_grid(
    kind: SymbolKind,
    spec: GridSpec,
    params: &Parameters,
    time: f64,
    n: usize,
    tol: f64,
) -> Result<SymbolGrid> {
    spec.validate(params)?;
    let eval_real = |x: PhasePoint| -> Result<f64> {
        match kind {
            SymbolKind::Position => symbol_position(x, params, tol),
            SymbolKind::PositionAt => symbol_position_t(x, time, params, tol),
            SymbolKind::Momentum => symbol_momentum(x, params, tol),
            SymbolKind::DispersionQ => dispersion_q(x, params, tol),
            SymbolKind::DispersionP => dispersion_p(x, params, tol),
            SymbolKind::Uncertainty => uncertainty_product(x, params, tol),
            SymbolKind::CommutatorMean => unreachable!("complex kind"),
        }
    };
    let values = if kind.is_complex() {
        let c = crate::well::commutator_qp(params, n)?;
        let v: Result<Vec<C64>> = (0..spec.len())
            .into_par_iter()
            .map(|i| lower_symbol(&c, spec.point(i)))
            .collect();
        GridValues::Complex(v?)
    } else {
        let v: Result<Vec<f64>> = (0..spec.len())
            .into_par_iter()
            .map(|i| eval_real(spec.point(i)))
            .collect();
        GridValues::Real(v?)
    };
    Ok(SymbolGrid {
        kind,
        spec,
        values,
        params: *params,
        time: (kind == SymbolKind::PositionAt).then_some(time),
    })
}
