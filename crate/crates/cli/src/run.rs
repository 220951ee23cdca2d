//! Executes a [`RunConfig`]: builds the requested object, renders it as a
//! CSV table and collects the metadata for the sidecar.

use anyhow::{bail, Result};
use csq_core::circle::{
    angle_symbol, commutator as circle_commutator, commutator_symbol, lower_symbol_circle, op_angle,
    op_momentum_circle, op_shift, CircleOperator,
};
use csq_core::kernels::{norm_circle_direct, norm_well, well_weights};
use csq_core::spectra::{
    eigvals_circle, eigvals_skew, eigvals_symmetric, spectral_summary, SpectrumKind, SpectrumReport,
};
use csq_core::symbols::{evaluate_grid, GridSpec, GridValues, SymbolKind};
use csq_core::well::{
    commutator_qp, evolution_operator, heisenberg_position, op_hamiltonian, op_momentum, op_p_squared, op_position,
    op_position_squared, BlockOperator, Kappa,
};
use csq_core::{Parameters, C64};

use crate::config::{Command, RunConfig, System, Which};
use crate::output::{fmt_f64, write_outputs, Meta, Table};
use crate::verify::{verify, Builders, VerifyReport};

/// A computed table with its sidecar metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub table: Table,
    pub meta: Meta,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub enum Outcome {
    Data(Product),
    Verify(VerifyReport),
}

fn base_meta(cfg: &RunConfig) -> Meta {
    let p = &cfg.params;
    let mut m = Meta::default();
    m.set("version", env!("CARGO_PKG_VERSION"));
    m.set("system", cfg.system_name());
    m.set("command", cfg.command_name());
    if let Some(w) = cfg.which {
        m.set("which", w.tag());
    }
    m.set("size", cfg.size);
    m.num("hbar", p.hbar_value());
    m.num("mass", p.mass_value());
    m.num("length", p.length_value());
    m.num("theta", p.theta_value());
    m.num("epsilon", p.epsilon_value());
    m.num("rho", p.rho());
    m.num("momentum_step", p.momentum_step());
    m.num("c", p.c());
    m.num("omega", p.omega());
    m.num("revival_time", p.revival_time());
    m.num("omega_theta", p.omega_theta());
    m.set(
        "mass_convention",
        if p.uses_default_mass() {
            "default_half"
        } else {
            "explicit"
        },
    );
    m.num("tol", cfg.tol);
    if matches!(cfg.which, Some(Which::Evolution | Which::PositionAt)) {
        m.num("time", cfg.time);
    }
    if let Some(g) = &cfg.grid {
        m.set(
            "grid",
            format!(
                "{}:{}:{},{}:{}:{}",
                fmt_f64(g.q_range.0),
                fmt_f64(g.q_range.1),
                g.n_q,
                fmt_f64(g.p_range.0),
                fmt_f64(g.p_range.1),
                g.n_p
            ),
        );
    }
    m
}

/// Builds a well operator by tag.
pub fn well_operator(which: Which, params: &Parameters, n: usize, time: f64) -> Result<BlockOperator> {
    Ok(match which {
        Which::Position => op_position(params, n)?,
        Which::Momentum => op_momentum(params, n)?,
        Which::MomentumSquared => op_p_squared(params, n)?,
        Which::PositionSquared => op_position_squared(params, n)?,
        Which::Hamiltonian => op_hamiltonian(params, n)?,
        Which::Commutator => commutator_qp(params, n)?,
        Which::Evolution => evolution_operator(time, params, n)?,
        Which::PositionAt => heisenberg_position(time, params, n)?,
        Which::Identity => BlockOperator::identity(n, *params),
        other => bail!("`{}` is not a well operator", other.tag()),
    })
}

/// Builds a circle operator by tag.
pub fn circle_operator(which: Which, epsilon: f64, n: usize) -> Result<CircleOperator> {
    Ok(match which {
        Which::Position => op_angle(epsilon, n)?,
        Which::Momentum => op_momentum_circle(n)?,
        Which::Shift => op_shift(epsilon, n)?,
        Which::Commutator => circle_commutator(&op_momentum_circle(n)?, &op_angle(epsilon, n)?)?,
        Which::MomentumShift => circle_commutator(&op_momentum_circle(n)?, &op_shift(epsilon, n)?)?,
        Which::Identity => CircleOperator::identity(n),
        other => bail!("`{}` is not a circle operator", other.tag()),
    })
}

/// Largest entry coupling level N+1 to the retained levels.
fn neglected_well(which: Which, params: &Parameters, n: usize, time: f64) -> Result<f64> {
    let big = well_operator(which, params, n + 1, time)?;
    let mut m = 0.0f64;
    for kappa in Kappa::BOTH {
        let b = big.block(kappa);
        for j in 0..n {
            m = m.max(b[(n, j)].norm()).max(b[(j, n)].norm());
        }
    }
    Ok(m)
}

fn neglected_circle(which: Which, epsilon: f64, n: usize) -> Result<f64> {
    let big = circle_operator(which, epsilon, n + 1)?;
    let e = big.entries();
    let d = e.nrows();
    let mut m = 0.0f64;
    for edge in [0, d - 1] {
        for j in 1..d - 1 {
            m = m.max(e[(edge, j)].norm()).max(e[(j, edge)].norm());
        }
    }
    Ok(m)
}

fn complex_cells(z: C64) -> [String; 2] {
    [fmt_f64(z.re), fmt_f64(z.im)]
}

fn op_product(cfg: &RunConfig, which: Which) -> Result<Product> {
    let mut meta = base_meta(cfg);
    let n = cfg.size;
    let table = match cfg.system {
        System::Well => {
            let op = well_operator(which, &cfg.params, n, cfg.time)?;
            let mut t = Table::new(vec!["n", "n_prime", "kappa", "re", "im"]);
            for (kappa, sign) in [(Kappa::Plus, "+"), (Kappa::Minus, "-")] {
                for i in 1..=n {
                    for j in 1..=n {
                        let [re, im] = complex_cells(op.get(i, j, kappa));
                        t.push(vec![i.to_string(), j.to_string(), sign.to_string(), re, im]);
                    }
                }
            }
            meta.set("spin_structure", format!("{:?}", op.structure()));
            meta.num(
                "neglected_coupling_max",
                neglected_well(which, &cfg.params, n, cfg.time)?,
            );
            t
        }
        System::Circle => {
            let eps = cfg.params.epsilon_value();
            let op = circle_operator(which, eps, n)?;
            let mut t = Table::new(vec!["n", "n_prime", "re", "im"]);
            let big_n = n as i64;
            for a in -big_n..=big_n {
                for b in -big_n..=big_n {
                    let [re, im] = complex_cells(op.get(a, b));
                    t.push(vec![a.to_string(), b.to_string(), re, im]);
                }
            }
            meta.num("neglected_coupling_max", neglected_circle(which, eps, n)?);
            t
        }
    };
    Ok(Product {
        table,
        meta,
        warnings: Vec::new(),
    })
}

fn spectrum_report(cfg: &RunConfig, which: Which) -> Result<SpectrumReport> {
    let report = match cfg.system {
        System::Well => {
            let op = well_operator(which, &cfg.params, cfg.size, cfg.time)?;
            if which == Which::Commutator {
                eigvals_skew(&op)?
            } else {
                eigvals_symmetric(&op)?
            }
        }
        System::Circle => eigvals_circle(&circle_operator(which, cfg.params.epsilon_value(), cfg.size)?)?,
    };
    Ok(report.with_tag(which.tag()))
}

fn spectrum_product(cfg: &RunConfig, which: Which) -> Result<Product> {
    let report = spectrum_report(cfg, which)?;
    let mut meta = base_meta(cfg);
    let column = match report.kind {
        SpectrumKind::Real => "eigenvalue",
        SpectrumKind::Imaginary => "lambda_imag",
    };
    let mut table = Table::new(vec!["index", column]);
    for (i, v) in report.eigenvalues.iter().enumerate() {
        table.push(vec![i.to_string(), fmt_f64(*v)]);
    }
    meta.set("spectrum_count", report.eigenvalues.len());
    if let (Some(lo), Some(hi)) = (report.min(), report.max()) {
        meta.num("spectrum_min", lo);
        meta.num("spectrum_max", hi);
    }
    meta.num("spectrum_max_abs", report.max_abs());
    if report.kind == SpectrumKind::Imaginary {
        let h = cfg.params.hbar_value();
        let bands = [(-1.1 * h, -0.9 * h), (0.9 * h, 1.1 * h)];
        let counts = spectral_summary(&report, &bands)?;
        meta.set("band_count_near_minus_hbar", counts.counts[0]);
        meta.set("band_count_near_plus_hbar", counts.counts[1]);
        meta.num("fraction_near_hbar", report.fraction_near_abs(h, 0.1));
    }
    for (i, w) in report.warnings.iter().enumerate() {
        meta.set(&format!("warning_{i}"), w);
    }
    Ok(Product {
        table,
        meta,
        warnings: report.warnings,
    })
}

fn symbol_kind(which: Which) -> Result<SymbolKind> {
    Ok(match which {
        Which::Position => SymbolKind::Position,
        Which::PositionAt => SymbolKind::PositionAt,
        Which::Momentum => SymbolKind::Momentum,
        Which::Commutator => SymbolKind::CommutatorMean,
        Which::DispersionQ => SymbolKind::DispersionQ,
        Which::DispersionP => SymbolKind::DispersionP,
        Which::Uncertainty => SymbolKind::Uncertainty,
        other => bail!("`{}` has no lower symbol", other.tag()),
    })
}

fn grid_of(cfg: &RunConfig) -> GridSpec {
    cfg.grid.expect("gridded commands always carry a grid")
}

fn well_symbol_product(cfg: &RunConfig, which: Which) -> Result<Product> {
    let kind = symbol_kind(which)?;
    let spec = grid_of(cfg);
    let grid = evaluate_grid(kind, spec, &cfg.params, cfg.time, cfg.size, cfg.tol)?;
    let mut meta = base_meta(cfg);
    let mut tail = 0.0f64;
    for i in 0..spec.len() {
        let w = well_weights(spec.point(i), &cfg.params, cfg.size, cfg.tol)?;
        let t = if kind.is_complex() {
            w.mass_above(cfg.size)
        } else {
            w.tail_bound
        };
        tail = tail.max(t);
    }
    meta.num("cs_tail_bound_max", tail);
    let table = match &grid.values {
        GridValues::Real(v) => {
            let mut t = Table::new(vec!["q", "p", "value"]);
            for (i, val) in v.iter().enumerate() {
                let x = spec.point(i);
                t.push(vec![fmt_f64(x.q), fmt_f64(x.p), fmt_f64(*val)]);
            }
            if let Some((x, m)) = grid.min() {
                meta.num("value_min", m);
                meta.num("value_min_q", x.q);
                meta.num("value_min_p", x.p);
            }
            meta.num("value_max", v.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b)));
            t
        }
        GridValues::Complex(v) => {
            let mut t = Table::new(vec!["q", "p", "re", "im"]);
            for (i, val) in v.iter().enumerate() {
                let x = spec.point(i);
                let [re, im] = complex_cells(*val);
                t.push(vec![fmt_f64(x.q), fmt_f64(x.p), re, im]);
            }
            meta.num("modulus_max", v.iter().fold(0.0f64, |a, b| a.max(b.norm())));
            t
        }
    };
    Ok(Product {
        table,
        meta,
        warnings: Vec::new(),
    })
}

fn circle_symbol_product(cfg: &RunConfig, which: Which) -> Result<Product> {
    let spec = grid_of(cfg);
    let eps = cfg.params.epsilon_value();
    let matrix = match which {
        Which::Momentum | Which::Shift => Some(circle_operator(which, eps, cfg.size)?),
        _ => None,
    };
    let mut table = Table::new(vec!["q", "p", "re", "im"]);
    for i in 0..spec.len() {
        let x = spec.point(i);
        let z = match (&matrix, which) {
            (Some(op), _) => lower_symbol_circle(op, x.q, x.p)?,
            (None, Which::Position) => angle_symbol(x.q, x.p, eps, cfg.tol)?,
            (None, Which::Commutator) => commutator_symbol(x.q, x.p, eps, cfg.tol)?,
            (None, other) => bail!("`{}` has no circle symbol", other.tag()),
        };
        let [re, im] = complex_cells(z);
        table.push(vec![fmt_f64(x.q), fmt_f64(x.p), re, im]);
    }
    Ok(Product {
        table,
        meta: base_meta(cfg),
        warnings: Vec::new(),
    })
}

fn norm_product(cfg: &RunConfig) -> Result<Product> {
    let spec = grid_of(cfg);
    let mut meta = base_meta(cfg);
    let mut bound = 0.0f64;
    let table = match cfg.system {
        System::Well => {
            let mut t = Table::new(vec!["q", "p", "value"]);
            for i in 0..spec.len() {
                let x = spec.point(i);
                let v = norm_well(x, &cfg.params, cfg.tol)?;
                bound = bound.max(v.truncation_bound);
                t.push(vec![fmt_f64(x.q), fmt_f64(x.p), fmt_f64(v.value)]);
            }
            t
        }
        System::Circle => {
            let mut t = Table::new(vec!["p", "value"]);
            for i in 0..spec.n_p {
                let p = spec.point(i).p;
                let v = norm_circle_direct(p, cfg.params.epsilon_value(), cfg.tol)?;
                bound = bound.max(v.truncation_bound);
                t.push(vec![fmt_f64(p), fmt_f64(v.value)]);
            }
            t
        }
    };
    meta.num("truncation_bound_max", bound);
    Ok(Product {
        table,
        meta,
        warnings: Vec::new(),
    })
}

/// Computes the result of `cfg` without touching the filesystem.
pub fn compute(cfg: &RunConfig) -> Result<Outcome> {
    let which = cfg.which;
    let product = match cfg.command {
        Command::Verify => return Ok(Outcome::Verify(verify(cfg.level, &Builders::default()))),
        Command::Norm => norm_product(cfg)?,
        Command::Op => op_product(cfg, which.expect("validated"))?,
        Command::Spectrum => spectrum_product(cfg, which.expect("validated"))?,
        Command::Symbol | Command::Dispersion => match cfg.system {
            System::Well => well_symbol_product(cfg, which.expect("validated"))?,
            System::Circle => circle_symbol_product(cfg, which.expect("validated"))?,
        },
    };
    Ok(Outcome::Data(product))
}

/// Runs `cfg`, writing files or stdout; returns the process exit code.
pub fn execute(cfg: &RunConfig) -> Result<u8> {
    match compute(cfg)? {
        Outcome::Verify(report) => {
            for line in report.lines() {
                println!("{line}");
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
        Outcome::Data(product) => {
            for w in &product.warnings {
                log::warn!("{w}");
            }
            match &cfg.out {
                Some(path) => {
                    write_outputs(path, &product.table, &product.meta)?;
                    log::info!("wrote {} rows to {}", product.table.rows.len(), path.display());
                }
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(&product.table.to_csv()?)?;
                }
            }
            Ok(0)
        }
    }
}
