//! Eigenvalue spectra of truncated operators.
//!
//! Hermitian blocks go through a Hermitian eigensolver. Real antisymmetric
//! blocks A are handled through the Hermitian matrix iA, whose eigenvalues
//! are the imaginary parts of the spectrum of A; the ±λ pairing is then
//! imposed exactly.

use nalgebra::SymmetricEigen;

use crate::circle::CircleOperator;
use crate::error::{CsqError, Result};
use crate::well::{BlockOperator, Kappa, SpinStructure};
use crate::{max_abs, CMatrix, C64};

/// Tolerance of the Hermitian and antisymmetric structure checks.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Truncation per unit of ϑ needed before accumulation statistics are
/// trusted at large ϑ.
pub const LEVELS_PER_THETA: f64 = 8.0;
/// ϑ from which the truncation guard applies.
pub const GUARD_THETA: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Real eigenvalues of a Hermitian operator.
    Real,
    /// Imaginary parts λ of the eigenvalues iλ of an antisymmetric operator.
    Imaginary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub tag: String,
    pub size: usize,
    pub theta: Option<f64>,
    pub kind: SpectrumKind,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SpectrumReport {
    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn min(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Fraction of eigenvalues with |λ| within `rel` of `target`.
    pub fn fraction_near_abs(&self, target: f64, rel: f64) -> f64 {
        if self.eigenvalues.is_empty() {
            return 0.0;
        }
        let hits = self
            .eigenvalues
            .iter()
            .filter(|v| (v.abs() - target).abs() <= rel * target)
            .count();
        hits as f64 / self.eigenvalues.len() as f64
    }
}

fn hermitian_eigenvalues(block: &CMatrix) -> Vec<f64> {
    let n = block.nrows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || block[(i, j)] == C64::new(0.0, 0.0)));
    if diagonal {
        return (0..n).map(|i| block[(i, i)].re).collect();
    }
    SymmetricEigen::new(block.clone()).eigenvalues.iter().copied().collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Replaces a sorted list by the exactly symmetric list (λ_k − λ_{n−1−k})/2.
fn symmetrize_pairs(v: &mut [f64]) {
    let n = v.len();
    for k in 0..n / 2 {
        let half = 0.5 * (v[n - 1 - k] - v[k]);
        v[k] = -half;
        v[n - 1 - k] = half;
    }
    if n % 2 == 1 {
        v[n / 2] = 0.0;
    }
}

fn accumulation_warnings(size: usize, theta: f64) -> Vec<String> {
    if theta >= GUARD_THETA && (size as f64) < LEVELS_PER_THETA * theta {
        vec![format!(
            "N={size} is below {}ϑ={}; edge eigenvalues are distorted by truncation",
            LEVELS_PER_THETA,
            LEVELS_PER_THETA * theta
        )]
    } else {
        Vec::new()
    }
}

/// Real spectrum of a Hermitian block operator, both blocks merged.
pub fn eigvals_symmetric(a: &BlockOperator) -> Result<SpectrumReport> {
    if !a.is_hermitian(STRUCTURE_TOL) {
        return Err(CsqError::Structure(
            "operator is not Hermitian within 1e-12".to_string(),
        ));
    }
    let plus = hermitian_eigenvalues(a.block(Kappa::Plus));
    let minus = match a.structure() {
        SpinStructure::Sigma0 => plus.clone(),
        SpinStructure::Sigma3 => plus.iter().map(|v| -v).collect(),
        SpinStructure::General => hermitian_eigenvalues(a.block(Kappa::Minus)),
    };
    let theta = a.params().theta_value();
    Ok(SpectrumReport {
        tag: String::new(),
        size: a.size(),
        theta: Some(theta),
        kind: SpectrumKind::Real,
        eigenvalues: sorted(plus.into_iter().chain(minus).collect()),
        warnings: Vec::new(),
    })
}

fn skew_block(block: &CMatrix) -> Vec<f64> {
    let i = C64::new(0.0, 1.0);
    let mut v = sorted(hermitian_eigenvalues(&block.map(|z| z * i)));
    symmetrize_pairs(&mut v);
    v
}

/// Imaginary parts of the spectrum of a real antisymmetric block operator.
pub fn eigvals_skew(a: &BlockOperator) -> Result<SpectrumReport> {
    if !a.is_real_antisymmetric(STRUCTURE_TOL) {
        return Err(CsqError::Structure(
            "operator is not real antisymmetric within 1e-12".to_string(),
        ));
    }
    let plus = skew_block(a.block(Kappa::Plus));
    let minus = match a.structure() {
        // spectra of A and −A coincide once the pairs are symmetric
        SpinStructure::Sigma0 | SpinStructure::Sigma3 => plus.clone(),
        SpinStructure::General => skew_block(a.block(Kappa::Minus)),
    };
    let theta = a.params().theta_value();
    Ok(SpectrumReport {
        tag: String::new(),
        size: a.size(),
        theta: Some(theta),
        kind: SpectrumKind::Imaginary,
        eigenvalues: sorted(plus.into_iter().chain(minus).collect()),
        warnings: accumulation_warnings(a.size(), theta),
    })
}

/// Real spectrum of a Hermitian circle operator.
pub fn eigvals_circle(a: &CircleOperator) -> Result<SpectrumReport> {
    if !a.is_hermitian(STRUCTURE_TOL) {
        return Err(CsqError::Structure(
            "operator is not Hermitian within 1e-12".to_string(),
        ));
    }
    Ok(SpectrumReport {
        tag: String::new(),
        size: a.dim(),
        theta: None,
        kind: SpectrumKind::Real,
        eigenvalues: sorted(hermitian_eigenvalues(a.entries())),
        warnings: Vec::new(),
    })
}

/// Eigenvalue counts per closed band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandCounts {
    pub bands: Vec<(f64, f64)>,
    pub counts: Vec<usize>,
    pub total: usize,
}

/// Counts eigenvalues falling in each of the disjoint closed `bands`.
pub fn spectral_summary(report: &SpectrumReport, bands: &[(f64, f64)]) -> Result<BandCounts> {
    for &(lo, hi) in bands {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(CsqError::Validation(format!("invalid band [{lo}, {hi}]")));
        }
    }
    let mut order: Vec<(f64, f64)> = bands.to_vec();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = order.windows(2).find(|w| w[1].0 <= w[0].1) {
        return Err(CsqError::Validation(format!(
            "bands [{}, {}] and [{}, {}] overlap",
            w[0].0, w[0].1, w[1].0, w[1].1
        )));
    }
    let counts = bands
        .iter()
        .map(|&(lo, hi)| report.eigenvalues.iter().filter(|v| **v >= lo && **v <= hi).count())
        .collect();
    Ok(BandCounts {
        bands: bands.to_vec(),
        counts,
        total: report.eigenvalues.len(),
    })
}

/// Largest entry of A − A† over both blocks.
pub fn hermiticity_defect(a: &BlockOperator) -> f64 {
    Kappa::BOTH
        .iter()
        .map(|&k| {
            let b = a.block(k);
            max_abs(&(b - b.adjoint()))
        })
        .fold(0.0, f64::max)
}
