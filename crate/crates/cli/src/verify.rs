//! Oracle and invariant checks across all modules.
//!
//! Every check compares two independent routes to the same quantity:
//! closed forms against quadrature of the defining phase-space integral,
//! direct lattice sums against their Poisson resummations, and closed
//! operators against literal matrix algebra.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use csq_core::circle::{
    commutator as circle_commutator, op_angle, op_momentum_circle, op_shift, quantize_circle_by_quadrature,
};
use csq_core::kernels::{norm_circle_direct, norm_circle_poisson, norm_well, norm_well_theta};
use csq_core::spectra::eigvals_symmetric;
use csq_core::symbols::{lower_symbol, symbol_momentum, symbol_position};
use csq_core::well::{evolution_operator, op_momentum_fn, op_p_squared, quantize_by_quadrature, BlockOperator, Kappa};
use csq_core::{max_abs, CMatrix, Parameters, PhasePoint, C64, DEFAULT_TOL};

use crate::config::Level;

/// Soft runtime budget of the fast level.
pub const FAST_BUDGET: Duration = Duration::from_secs(10);
/// Largest truncation for quadrature oracles at the fast level.
pub const FAST_ORACLE_SIZE: usize = 4;
/// Truncation for quadrature oracles at the full level.
pub const FULL_ORACLE_SIZE: usize = 6;

type Builder = fn(&Parameters, usize) -> csq_core::Result<BlockOperator>;

/// Closed-form operators under test; replaceable to check that the suite
/// catches a broken build.
#[derive(Clone, Copy)]
pub struct Builders {
    pub position: Builder,
    pub momentum: Builder,
    pub commutator: Builder,
}

impl Default for Builders {
    fn default() -> Self {
        Self {
            position: csq_core::well::op_position,
            momentum: csq_core::well::op_momentum,
            commutator: csq_core::well::commutator_qp,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub level: Level,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
            .collect();
        out.extend(self.warnings.iter().map(|w| format!("WARN {w}")));
        let failed = self.failures().len();
        out.push(format!(
            "{} checks, {} failed, {:.2} s",
            self.checks.len(),
            failed,
            self.elapsed.as_secs_f64()
        ));
        out
    }
}

type Outcome = Result<String, String>;
type CheckFn<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn within(name: &str, err: f64, tol: f64) -> Outcome {
    if err <= tol {
        Ok(format!("max error {err:.3e} <= {tol:.0e}"))
    } else {
        Err(format!("{name} mismatch: max error {err:.3e} > {tol:.0e}"))
    }
}

fn core<T>(r: csq_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn thetas(level: Level) -> &'static [f64] {
    match level {
        Level::Fast => &[1.0],
        Level::Full => &[0.5, 1.0, 2.0],
    }
}

fn oracle_size(level: Level) -> usize {
    match level {
        Level::Fast => FAST_ORACLE_SIZE,
        Level::Full => FULL_ORACLE_SIZE,
    }
}

/// Deterministic low-discrepancy points in [0, 1).
fn unit_points(count: usize, salt: f64) -> impl Iterator<Item = f64> {
    let golden = 0.618_033_988_749_894_9;
    (0..count).map(move |i| ((i as f64 + salt) * golden).fract())
}

fn circle_kernel_duality() -> Outcome {
    let mut err = 0.0f64;
    for (a, b) in unit_points(25, 0.3).zip(unit_points(25, 0.7)) {
        let eps = 0.1 + 9.9 * a;
        let p = -3.0 + 6.0 * b;
        let d = core(norm_circle_direct(p, eps, DEFAULT_TOL))?.value;
        let s = core(norm_circle_poisson(p, eps, DEFAULT_TOL))?.value;
        err = err.max((d - s).abs());
    }
    within("circle kernel duality", err, 1e-12)
}

fn well_kernel_duality() -> Outcome {
    let mut err = 0.0f64;
    for ((a, b), c) in unit_points(25, 0.1).zip(unit_points(25, 0.4)).zip(unit_points(25, 0.9)) {
        let params = core(Parameters::with_theta(0.1 + 4.9 * a))?;
        let x = PhasePoint::new(0.05 + (PI - 0.1) * b, -6.0 + 12.0 * c);
        let d = core(norm_well(x, &params, DEFAULT_TOL))?.value;
        let t = core(norm_well_theta(x, &params, DEFAULT_TOL))?.value;
        err = err.max((d - t).abs());
    }
    within("well kernel duality", err, 1e-12)
}

fn identity_oracle(level: Level) -> Outcome {
    let n = oracle_size(level);
    let mut err = 0.0f64;
    for &theta in thetas(level) {
        let params = core(Parameters::with_theta(theta))?;
        let oracle = core(quantize_by_quadrature(|_, _| 1.0, &params, n, 1e-10))?;
        err = err.max(oracle.max_diff(&BlockOperator::identity(n, params)));
    }
    within("identity oracle", err, 1e-8)
}

fn operator_oracle<F>(name: &str, level: Level, build: Builder, f: F) -> Outcome
where
    F: Fn(f64, f64) -> f64 + Sync + Copy,
{
    let n = oracle_size(level);
    let mut err = 0.0f64;
    for &theta in thetas(level) {
        let params = core(Parameters::with_theta(theta))?;
        let oracle = core(quantize_by_quadrature(f, &params, n, 1e-10))?;
        err = err.max(oracle.max_diff(&core(build(&params, n))?));
    }
    within(name, err, 1e-8)
}

fn p_squared_rule(level: Level) -> Outcome {
    let mut err = 0.0f64;
    for &theta in thetas(level) {
        let params = core(Parameters::with_theta(theta))?;
        let n = 8;
        let quad = core(op_momentum_fn(|p| p * p, &params, n, 1e-13))?;
        let rho2 = params.rho().powi(2);
        for k in 1..=n {
            let target = params.p_n(k as i64).powi(2) + rho2 / 2.0;
            err = err.max((quad.get(k, k, Kappa::Plus).re - target).abs());
        }
        if level == Level::Full {
            let p = core(op_momentum(&params, n))?;
            let shifted = core(p.product(&p))?;
            let expected = core(shifted.add(&BlockOperator::identity(n, params).scale(rho2 / 2.0)))?;
            err = err.max(core(op_p_squared(&params, n))?.max_diff(&expected));
        }
    }
    within("quantized p² rule", err, 1e-10)
}

fn op_momentum(params: &Parameters, n: usize) -> csq_core::Result<BlockOperator> {
    csq_core::well::op_momentum(params, n)
}

fn commutator_algebra(b: &Builders) -> Outcome {
    let mut err = 0.0f64;
    for theta in [0.3, 1.0, 4.0] {
        let params = core(Parameters::with_theta(theta))?;
        let n = 24;
        let q = core((b.position)(&params, n))?;
        let p = core((b.momentum)(&params, n))?;
        let literal = core(q.commutator(&p))?;
        err = err.max(core((b.commutator)(&params, n))?.max_diff(&literal));
    }
    within("commutator algebra", err, 1e-15)
}

fn momentum_spectrum(b: &Builders) -> Outcome {
    let params = Parameters::default();
    let r = core(eigvals_symmetric(&core((b.momentum)(&params, 4))?))?;
    let expected = [-4.0, -3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 4.0];
    if r.eigenvalues == expected {
        Ok("spectrum {±1, ±2, ±3, ±4} exact".to_string())
    } else {
        Err(format!("momentum spectrum mismatch: {:?}", r.eigenvalues))
    }
}

fn circle_shift_algebra() -> Outcome {
    let n = 6;
    let p = core(op_momentum_circle(n))?;
    let s = core(op_shift(0.7, n))?;
    let c = core(circle_commutator(&p, &s))?;
    let d = 2 * n + 1;
    for i in 1..d - 1 {
        for j in 0..d {
            if c.entries()[(i, j)] != s.entries()[(i, j)] {
                return Err(format!("shift algebra mismatch at row {i}, column {j}"));
            }
        }
    }
    Ok("[p, S] = S on interior rows, exactly".to_string())
}

fn evolution_checks() -> Outcome {
    let mut unitarity = 0.0f64;
    let mut revival = 0.0f64;
    for theta in [0.5, 1.3, 3.0] {
        let params = core(Parameters::with_theta(theta))?;
        let n = 32;
        let u = core(evolution_operator(0.77, &params, n))?;
        let uu = core(u.product(&u.adjoint()))?;
        unitarity = unitarity.max(uu.max_diff(&BlockOperator::identity(n, params)));
        let full_turn = core(evolution_operator(2.0 * PI, &params, n))?;
        let phase = C64::from_polar(1.0, -PI * theta * theta);
        let target = BlockOperator::sigma0(CMatrix::identity(n, n) * phase, params);
        revival = revival.max(full_turn.max_diff(&target));
    }
    let a = within("evolution unitarity", unitarity, 1e-14)?;
    let b = within("evolution revival phase", revival, 1e-12)?;
    Ok(format!("unitarity {a}; revival {b}"))
}

fn symbol_duality(b: &Builders) -> Outcome {
    let mut err = 0.0f64;
    for theta in [0.2, 1.0] {
        let params = core(Parameters::with_theta(theta))?;
        let q = core((b.position)(&params, 32))?;
        let p = core((b.momentum)(&params, 32))?;
        for (u, v) in unit_points(8, 0.2).zip(unit_points(8, 0.6)) {
            let x = PhasePoint::new(0.1 + (PI - 0.2) * u, -5.0 + 10.0 * v);
            err = err.max((core(symbol_position(x, &params, DEFAULT_TOL))? - core(lower_symbol(&q, x))?.re).abs());
            err = err.max((core(symbol_momentum(x, &params, DEFAULT_TOL))? - core(lower_symbol(&p, x))?.re).abs());
        }
    }
    within("symbol duality", err, 1e-10)
}

fn commutator_mean(b: &Builders) -> Outcome {
    let mut err = 0.0f64;
    for theta in [0.3, 1.0, 3.0] {
        let params = core(Parameters::with_theta(theta))?;
        let c = core((b.commutator)(&params, 48))?;
        for (u, v) in unit_points(10, 0.5).zip(unit_points(10, 0.8)) {
            let x = PhasePoint::new(0.1 + (PI - 0.2) * u, -6.0 + 12.0 * v);
            err = err.max(core(lower_symbol(&c, x))?.norm());
        }
    }
    within("commutator mean on coherent states", err, 1e-12)
}

fn circle_angle_oracle() -> Outcome {
    let oracle = core(quantize_circle_by_quadrature(|q, _| C64::new(q, 0.0), 1.0, 2, 1e-10))?;
    let closed = core(op_angle(1.0, 2))?;
    within(
        "circle angle oracle",
        max_abs(&(oracle.entries() - closed.entries())),
        1e-8,
    )
}

/// Runs the suite at `level` against `builders`.
pub fn verify(level: Level, builders: &Builders) -> VerifyReport {
    let start = Instant::now();
    let mut checks: Vec<(&'static str, CheckFn<'_>)> = vec![
        ("circle kernel duality", Box::new(circle_kernel_duality)),
        ("well kernel duality", Box::new(well_kernel_duality)),
        ("identity oracle", Box::new(move || identity_oracle(level))),
        (
            "position oracle",
            Box::new(move || operator_oracle("position oracle", level, builders.position, |q, _| q)),
        ),
        (
            "momentum oracle",
            Box::new(move || operator_oracle("momentum oracle", level, builders.momentum, |_, p| p)),
        ),
        ("quantized p² rule", Box::new(move || p_squared_rule(level))),
        ("commutator algebra", Box::new(move || commutator_algebra(builders))),
        ("momentum spectrum", Box::new(move || momentum_spectrum(builders))),
        ("circle shift algebra", Box::new(circle_shift_algebra)),
        ("evolution operator", Box::new(evolution_checks)),
        ("symbol duality", Box::new(move || symbol_duality(builders))),
        ("commutator mean", Box::new(move || commutator_mean(builders))),
    ];
    if level == Level::Full {
        checks.push((
            "p² oracle",
            Box::new(move || operator_oracle("p² oracle", level, op_p_squared, |_, p| p * p)),
        ));
        checks.push(("circle angle oracle", Box::new(circle_angle_oracle)));
    }

    let checks: Vec<Check> = checks
        .into_iter()
        .map(|(name, run)| match run() {
            Ok(detail) => Check {
                name,
                passed: true,
                detail,
            },
            Err(detail) => Check {
                name,
                passed: false,
                detail,
            },
        })
        .collect();
    let elapsed = start.elapsed();
    let mut warnings = Vec::new();
    if level == Level::Fast && elapsed > FAST_BUDGET {
        warnings.push(format!(
            "fast verification took {:.1} s, over the {} s budget",
            elapsed.as_secs_f64(),
            FAST_BUDGET.as_secs()
        ));
    }
    VerifyReport {
        level,
        checks,
        elapsed,
        warnings,
    }
}
