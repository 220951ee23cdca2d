//! Physical constants and regulators shared by every construction.
//!
//! The default unit system is ħ = 1, L = π, m = 1/2. In these units the
//! level momenta are `p_n = n`, the energies `E_n = n²`, the level frequency
//! `ω = 1` and the revival time `T_r = 2π`, and the momentum width `ρ`
//! equals the dimensionless regulator `ϑ`.

use std::f64::consts::PI;

use crate::error::{positive, CsqError, Result};

/// Units, well geometry and regulators.
///
/// `theta` sets the Gaussian width of the well coherent states
/// (`ρ = ħπϑ/L`); `epsilon` is the regulator of the circle states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    hbar: f64,
    mass: f64,
    length: f64,
    theta: f64,
    epsilon: f64,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 0.5,
            length: PI,
            theta: 1.0,
            epsilon: 1.0,
        }
    }
}

impl Parameters {
    pub fn new(hbar: f64, mass: f64, length: f64, theta: f64, epsilon: f64) -> Result<Self> {
        Ok(Self {
            hbar: positive("hbar", hbar)?,
            mass: positive("mass", mass)?,
            length: positive("length", length)?,
            theta: positive("theta", theta)?,
            epsilon: positive("epsilon", epsilon)?,
        })
    }

    /// Default units with the given well regulator ϑ.
    pub fn with_theta(theta: f64) -> Result<Self> {
        Self::default().theta(theta)
    }

    pub fn hbar(self, hbar: f64) -> Result<Self> {
        Ok(Self {
            hbar: positive("hbar", hbar)?,
            ..self
        })
    }

    pub fn mass(self, mass: f64) -> Result<Self> {
        Ok(Self {
            mass: positive("mass", mass)?,
            ..self
        })
    }

    pub fn length(self, length: f64) -> Result<Self> {
        Ok(Self {
            length: positive("length", length)?,
            ..self
        })
    }

    pub fn theta(self, theta: f64) -> Result<Self> {
        Ok(Self {
            theta: positive("theta", theta)?,
            ..self
        })
    }

    pub fn epsilon(self, epsilon: f64) -> Result<Self> {
        Ok(Self {
            epsilon: positive("epsilon", epsilon)?,
            ..self
        })
    }

    pub fn hbar_value(&self) -> f64 {
        self.hbar
    }

    pub fn mass_value(&self) -> f64 {
        self.mass
    }

    pub fn length_value(&self) -> f64 {
        self.length
    }

    pub fn theta_value(&self) -> f64 {
        self.theta
    }

    pub fn epsilon_value(&self) -> f64 {
        self.epsilon
    }

    /// Lattice spacing of the level momenta, ħπ/L.
    pub fn momentum_step(&self) -> f64 {
        self.hbar * PI / self.length
    }

    /// Gaussian half-width ρ = ħπϑ/L.
    pub fn rho(&self) -> f64 {
        self.momentum_step() * self.theta
    }

    /// p_n = ħπn/L. Defined for any integer `n`; physical levels are n ≥ 1.
    pub fn p_n(&self, n: i64) -> f64 {
        self.momentum_step() * n as f64
    }

    /// E_n = ħω n².
    pub fn energy(&self, n: i64) -> f64 {
        self.hbar * self.omega() * (n * n) as f64
    }

    /// ω = ħπ²/(2mL²).
    pub fn omega(&self) -> f64 {
        self.hbar * PI * PI / (2.0 * self.mass * self.length * self.length)
    }

    /// T_r = 2π/ω.
    pub fn revival_time(&self) -> f64 {
        2.0 * PI / self.omega()
    }

    /// Global phase frequency ω_ϑ = ωϑ²/2 of the evolution operator.
    pub fn omega_theta(&self) -> f64 {
        self.omega() * self.theta * self.theta / 2.0
    }

    /// c = 2/(ρL√π), the normalization of the well basis functions.
    pub fn c(&self) -> f64 {
        2.0 / (self.rho() * self.length * PI.sqrt())
    }

    /// True when m is still the default 1/2, which is a unit convention
    /// rather than a physical input.
    pub fn uses_default_mass(&self) -> bool {
        self.mass == 0.5
    }
}

/// A point (q, p) of the classical phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }

    /// Rejects points on or outside the walls of the well.
    pub fn check_inside_well(&self, params: &Parameters) -> Result<()> {
        let length = params.length_value();
        if self.q.is_finite() && self.p.is_finite() && self.q > 0.0 && self.q < length {
            Ok(())
        } else {
            Err(CsqError::DegeneratePoint { q: self.q, length })
        }
    }
}
