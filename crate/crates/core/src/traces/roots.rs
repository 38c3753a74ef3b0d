//! Aberth–Ehrlich simultaneous iteration for `p(ρ) = target`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::TracePolynomial;
use crate::error::{Error, Result};
use crate::numeric::{horner_dd, ComplexDd, DoubleDouble, UNIT_ROUNDOFF};

#[derive(Clone, Copy, Debug)]
pub struct RootOptions {
    pub max_sweeps: usize,
    /// A root is converged once its correction is below `step_tol·(1+|z|)`.
    pub step_tol: f64,
    pub polish_steps: usize,
    /// Acceptance bound is `residual_tol·(1 + Σ|c_k|)`.
    pub residual_tol: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 500,
            step_tol: 1e-13,
            polish_steps: 3,
            residual_tol: 1e-8,
        }
    }
}

/// All `deg p` roots of `p(ρ) − target`, sorted by real then imaginary part.
pub fn poly_roots(p: &TracePolynomial, target: Complex64) -> Result<Vec<Complex64>> {
    poly_roots_with(p, target, &RootOptions::default())
}

pub fn poly_roots_with(
    p: &TracePolynomial,
    target: Complex64,
    opts: &RootOptions,
) -> Result<Vec<Complex64>> {
    let n = p.degree();
    if n == 0 || p.leading_coefficient() == Complex64::new(0.0, 0.0) {
        return Err(Error::Validation("root finding needs degree >= 1".into()));
    }
    let mut dd: Vec<ComplexDd> = p.dd_coefficients().to_vec();
    dd[0] = ComplexDd::from_parts(
        dd[0].re.add(DoubleDouble::new(-target.re, 0.0)),
        dd[0].im.add(DoubleDouble::new(-target.im, 0.0)),
    );
    let mags: Vec<f64> = dd.iter().map(|c| c.to_c64().norm()).collect();
    if mags.iter().any(|m| !m.is_finite()) {
        return Err(Error::NumericRange("coefficients exceed f64 range".into()));
    }
    // Evaluation noise relative to Σ|c_k||z|^k.
    let noise = if p.exact_coefficients().is_some() {
        8.0 * n as f64 * UNIT_ROUNDOFF * UNIT_ROUNDOFF
    } else {
        4.0 * UNIT_ROUNDOFF
    };

    let radius = cauchy_radius(&mags);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64 + PI / (2.0 * n as f64) + 0.03 * (k % 3) as f64;
            Complex64::from_polar(radius.max(f64::MIN_POSITIVE), theta)
        })
        .collect();
    let mut done = vec![false; n];
    if radius == 0.0 {
        z.iter_mut().for_each(|r| *r = Complex64::new(0.0, 0.0));
        done.iter_mut().for_each(|d| *d = true);
    }

    for _ in 0..opts.max_sweeps {
        if done.iter().all(|&d| d) {
            break;
        }
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (v, d, mag) = horner_dd(&dd, z[i]);
            if v.norm() <= noise * mag {
                done[i] = true;
                continue;
            }
            let ratio = v / d;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let mut delta = ratio / (1.0 - ratio * s);
            if !delta.is_finite() {
                delta = if ratio.is_finite() { ratio } else { z[i] * 1e-3 };
            }
            z[i] -= delta;
            if delta.norm() <= opts.step_tol * (1.0 + z[i].norm()) {
                done[i] = true;
            }
        }
    }

    let residual = |x: Complex64| (p.eval_accurate(x).0 - target).norm();
    for r in z.iter_mut() {
        let mut best = residual(*r);
        for _ in 0..opts.polish_steps {
            let (v, d) = p.eval_accurate(*r);
            let step = (v - target) / d;
            if !step.is_finite() || step.norm() == 0.0 {
                break;
            }
            let cand = *r - step;
            let res = residual(cand);
            if res <= best {
                *r = cand;
                best = res;
            } else {
                break;
            }
        }
    }

    let bound = opts.residual_tol * (1.0 + p.coefficient_l1());
    let unconverged: Vec<usize> = (0..n)
        .filter(|&i| !done[i] || !(residual(z[i]) <= bound))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        z[a].re
            .total_cmp(&z[b].re)
            .then(z[a].im.total_cmp(&z[b].im))
    });
    let sorted: Vec<Complex64> = order.iter().map(|&i| z[i]).collect();
    if !unconverged.is_empty() {
        let unconverged = order
            .iter()
            .enumerate()
            .filter(|(_, i)| unconverged.contains(i))
            .map(|(k, _)| k)
            .collect();
        return Err(Error::RootsNotConverged {
            roots: sorted,
            unconverged,
        });
    }
    Ok(sorted)
}

/// Positive root of `|c_n| x^n = Σ_{k<n} |c_k| x^k`; every root lies in the
/// closed disc of this radius.
fn cauchy_radius(mags: &[f64]) -> f64 {
    let n = mags.len() - 1;
    let lead = mags[n];
    if mags[..n].iter().all(|&m| m == 0.0) {
        return 0.0;
    }
    // h is strictly decreasing in x.
    let h = |x: f64| -> f64 {
        mags[..n]
            .iter()
            .enumerate()
            .map(|(k, m)| m / lead * x.powi(k as i32 - n as i32))
            .sum()
    };
    let mut hi = 1.0 + mags[..n].iter().fold(0.0f64, |a, m| a.max(m / lead));
    let mut lo = hi;
    while h(lo) < 1.0 && lo > 1e-300 {
        hi = lo;
        lo *= 0.5;
    }
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
