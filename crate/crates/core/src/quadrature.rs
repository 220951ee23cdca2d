//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! Both a scalar and a vector-valued driver are provided. The vector form
//! shares abscissae between all components, which is what the operator
//! oracles need: one sweep over phase space fills a whole matrix of
//! overlap integrals.

use crate::error::{CsqError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_subdivisions: 4000,
        }
    }
}

impl QuadOptions {
    pub fn abs(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VecIntegral {
    pub values: Vec<f64>,
    /// Max-norm error estimate over all components.
    pub error: f64,
}

struct Segment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    error: f64,
}

fn check_finite(at: f64, out: &[f64]) -> Result<()> {
    match out.iter().find(|v| !v.is_finite()) {
        Some(&value) => Err(CsqError::UnboundedFunction { at, value }),
        None => Ok(()),
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Result<Segment>
where
    F: FnMut(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let abscissae: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for sign in abscissae {
            let t = center + sign * half * x;
            buf.iter_mut().for_each(|v| *v = 0.0);
            f(t, buf);
            check_finite(t, buf)?;
            for k in 0..dim {
                kronrod[k] += wk * buf[k];
                if i % 2 == 1 {
                    gauss[k] += WG[i / 2] * buf[k];
                }
            }
        }
    }

    let mut error = 0.0f64;
    for k in 0..dim {
        kronrod[k] *= half;
        gauss[k] *= half;
        error = error.max((kronrod[k] - gauss[k]).abs());
    }
    Ok(Segment {
        a,
        b,
        values: kronrod,
        error,
    })
}

/// Integrates a vector-valued function over `[a, b]`.
///
/// `f(x, out)` writes `dim` components into `out` (zeroed before each call).
pub fn integrate_vec<F>(mut f: F, a: f64, b: f64, dim: usize, opts: QuadOptions) -> Result<VecIntegral>
where
    F: FnMut(f64, &mut [f64]),
{
    if a == b {
        return Ok(VecIntegral {
            values: vec![0.0; dim],
            error: 0.0,
        });
    }
    let mut buf = vec![0.0; dim];
    let mut segments = vec![gk15(&mut f, a, b, dim, &mut buf)?];

    loop {
        let mut total = vec![0.0; dim];
        let mut error = 0.0;
        for s in &segments {
            for (t, v) in total.iter_mut().zip(&s.values) {
                *t += v;
            }
            error += s.error;
        }
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let target = opts.abs_tol.max(opts.rel_tol * scale);
        if error <= target {
            return Ok(VecIntegral { values: total, error });
        }
        if segments.len() >= opts.max_subdivisions {
            return Err(CsqError::Quadrature {
                estimate: error,
                tolerance: target,
            });
        }

        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // interval can no longer be bisected in floating point
            return Err(CsqError::Quadrature {
                estimate: error,
                tolerance: target,
            });
        }
        segments.push(gk15(&mut f, s.a, mid, dim, &mut buf)?);
        segments.push(gk15(&mut f, mid, s.b, dim, &mut buf)?);
    }
}

/// Integrates a scalar function over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(|x, out| out[0] = f(x), a, b, 1, opts)?;
    Ok(Integral {
        value: r.values[0],
        error: r.error,
    })
}

/// Sum of vector integrals over disjoint intervals.
pub fn integrate_vec_over<F>(mut f: F, intervals: &[(f64, f64)], dim: usize, opts: QuadOptions) -> Result<VecIntegral>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut values = vec![0.0; dim];
    let mut error = 0.0;
    let share = QuadOptions {
        abs_tol: opts.abs_tol / intervals.len().max(1) as f64,
        ..opts
    };
    for &(a, b) in intervals {
        let r = integrate_vec(&mut f, a, b, dim, share)?;
        for (t, v) in values.iter_mut().zip(&r.values) {
            *t += v;
        }
        error += r.error;
    }
    Ok(VecIntegral { values, error })
}

/// Merges possibly overlapping intervals into a sorted disjoint cover.
pub fn merge_intervals(mut intervals: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for (a, b) in intervals {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}
