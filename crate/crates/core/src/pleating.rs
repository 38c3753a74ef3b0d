//! Rational pleating rays: branches of `p_s⁻¹((−∞, −2])` traced by
//! predictor–corrector continuation, their cusp endpoints, the
//! neighbourhood test `p_s⁻¹(H)` and elliptic points past the cusp.
//!
//! All evaluations go through the word product ([`WordTrace`]); expanded
//! coefficients are far too ill-conditioned near the cusps for large `q`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::farey::Slope;
use crate::moebius::ConeOrders;
use crate::traces::WordTrace;

/// Trace value at a cusp.
pub const CUSP_TRACE: f64 = -2.0;

/// Offset `δ` keeping the neighbourhood lift away from `−2`.
pub const LIFT_DELTA: f64 = 1e-3;

/// Minimum number of substeps per lift segment.
pub const LIFT_SUBSTEPS: usize = 64;

/// Distance within which a lift is taken to end on the ray.
pub const LIFT_MATCH_TOL: f64 = 1e-6;

/// Samples per ray used by [`cusp_point`] and [`RayCache`].
pub const DEFAULT_RAY_SAMPLES: usize = 32;

const SEED_PERTURBATIONS: usize = 32;
const MAX_HALVINGS: u32 = 20;
const MIN_TRACE_STEP: f64 = 1e-12;
const CORRECTOR_TOL: f64 = 1e-12;
const ACCEPT_TOL: f64 = 1e-10;
const CORRECTOR_ITERS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RaySample {
    pub t: f64,
    pub rho: Complex64,
}

/// Samples of a pleating ray, ordered by increasing `t` from the start
/// value up to `t = −2` at the cusp.
#[derive(Clone, Debug, PartialEq)]
pub struct RayTrace {
    pub slope: Slope,
    pub orders: ConeOrders,
    pub samples: Vec<RaySample>,
    pub cusp: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuspPoint {
    pub slope: Slope,
    pub orders: ConeOrders,
    pub rho: Complex64,
    /// `|p_s(ρ) + 2|`.
    pub residual: f64,
}

impl CuspPoint {
    pub fn conj(&self) -> CuspPoint {
        CuspPoint {
            rho: self.rho.conj(),
            ..*self
        }
    }

    pub fn neg(&self) -> CuspPoint {
        CuspPoint {
            rho: -self.rho,
            ..*self
        }
    }
}

/// Start value of the ray for `s`: far enough out that the branches of
/// `p_s⁻¹(t)` are separated by more than the subleading correction.
pub fn default_t_start(s: Slope) -> f64 {
    let q = s.q().max(1) as f64;
    let r = (1.5 * q).max(12.0).min(10f64.powf(100.0 / q));
    -r.powf(q).max(100.0)
}

fn newton_to(wt: &WordTrace, mut rho: Complex64, target: Complex64, iters: usize) -> Option<Complex64> {
    let scale = 1.0 + target.norm();
    for _ in 0..iters {
        let (v, d) = wt.eval(rho);
        let f = v - target;
        if !f.is_finite() || !d.is_finite() {
            return None;
        }
        if f.norm() <= CORRECTOR_TOL * scale {
            return Some(rho);
        }
        let step = f / d;
        if !step.is_finite() {
            return None;
        }
        rho -= step;
    }
    let (v, _) = wt.eval(rho);
    ((v - target).norm() <= ACCEPT_TOL * scale).then_some(rho)
}

/// Follows `p(ρ) = target(σ)` for `σ` from 0 to 1. On failure returns the
/// last good `(σ, ρ)`.
fn track(
    wt: &WordTrace,
    rho0: Complex64,
    target: impl Fn(f64) -> Complex64,
    min_substeps: usize,
) -> std::result::Result<Complex64, (f64, Complex64)> {
    let h_max = 1.0 / min_substeps.max(1) as f64;
    let (mut sigma, mut rho, mut h) = (0.0f64, rho0, h_max);
    let mut halvings = 0;
    while sigma < 1.0 {
        let next = (sigma + h).min(1.0);
        let t_next = target(next);
        let (v, d) = wt.eval(rho);
        let predicted = rho + (t_next - v) / d;
        let corrected = predicted
            .is_finite()
            .then(|| newton_to(wt, predicted, t_next, CORRECTOR_ITERS))
            .flatten()
            .filter(|c| {
                // A corrector that moves further than the predictor did has
                // probably been captured by another branch.
                (c - predicted).norm() <= 0.5 * (predicted - rho).norm() + 1e-9 * (1.0 + rho.norm())
            });
        match corrected {
            Some(c) => {
                rho = c;
                sigma = next;
                h = (2.0 * h).min(h_max);
                halvings = 0;
            }
            None => {
                h *= 0.5;
                halvings += 1;
                let dt = (target((sigma + h).min(1.0)) - target(sigma)).norm();
                if halvings > MAX_HALVINGS || dt < MIN_TRACE_STEP {
                    return Err((sigma, rho));
                }
            }
        }
    }
    Ok(rho)
}

fn unit_angle_offset(rho: Complex64, theta: f64) -> f64 {
    (rho * Complex64::from_polar(1.0, -theta)).arg().abs()
}

fn seed_with(wt: &WordTrace, s: Slope, t0: f64) -> Result<Complex64> {
    let q = s.q().max(1) as f64;
    let r = (-t0).powf(1.0 / q);
    let base = PI * (1.0 - s.as_f64());
    for k in 0..=SEED_PERTURBATIONS {
        let magnitude = k.div_ceil(2) as f64 * PI / (17.0 * q);
        let delta = if k % 2 == 1 { -magnitude } else { magnitude };
        let theta = base + delta;
        let guess = if theta == 0.0 {
            Complex64::new(r, 0.0)
        } else if theta == PI {
            Complex64::new(-r, 0.0)
        } else {
            Complex64::from_polar(r, theta)
        };
        if let Some(rho) = newton_to(wt, guess, Complex64::new(t0, 0.0), 100) {
            if unit_angle_offset(rho, base) < PI / q {
                return Ok(rho);
            }
        }
    }
    Err(Error::SeedFailure { slope: s })
}

/// A point of the ray for `s` with trace `t0`, from the asymptotic guess
/// `|t0|^{1/q} e^{iπ(1−p/q)}`.
pub fn ray_seed(s: Slope, orders: ConeOrders, t0: f64) -> Result<Complex64> {
    if !(t0 <= -10.0) {
        return Err(Error::Validation(format!("ray start must be <= -10, got {t0}")));
    }
    seed_with(&WordTrace::for_slope(s, orders)?, s, t0)
}

/// Continues the branch of `s` from `t_start` to `−2`, returning
/// `n_samples` points spaced evenly in `log(−t − 1)`.
pub fn trace_ray(s: Slope, orders: ConeOrders, t_start: f64, n_samples: usize) -> Result<RayTrace> {
    if !(t_start <= -10.0) {
        return Err(Error::Validation(format!("ray start must be <= -10, got {t_start}")));
    }
    if n_samples < 2 {
        return Err(Error::Validation("a ray needs at least 2 samples".into()));
    }
    let wt = WordTrace::for_slope(s, orders)?;
    let mut rho = seed_with(&wt, s, t_start)?;
    let tau0 = (-t_start - 1.0).ln();
    let tau = |k: usize| tau0 * (1.0 - k as f64 / (n_samples - 1) as f64);
    let t_of = |tau: f64| -1.0 - tau.exp();
    let mut samples = Vec::with_capacity(n_samples);
    samples.push(RaySample { t: t_start, rho });
    for k in 1..n_samples {
        let (ta, tb) = (tau(k - 1), tau(k));
        let target = |sigma: f64| Complex64::new(t_of(ta + sigma * (tb - ta)), 0.0);
        rho = track(&wt, rho, target, 1).map_err(|(sigma, last_rho)| Error::BranchTracking {
            slope: s,
            last_t: t_of(ta + sigma * (tb - ta)),
            last_rho,
        })?;
        let t = if k + 1 == n_samples { CUSP_TRACE } else { t_of(tb) };
        samples.push(RaySample { t, rho });
    }
    let cusp = polish_cusp(&wt, rho);
    if let Some(last) = samples.last_mut() {
        last.rho = cusp;
    }
    Ok(RayTrace {
        slope: s,
        orders,
        samples,
        cusp,
    })
}

fn polish_cusp(wt: &WordTrace, rho: Complex64) -> Complex64 {
    let target = Complex64::new(CUSP_TRACE, 0.0);
    let residual = |z: Complex64| (wt.eval(z).0 - target).norm();
    let mut best = rho;
    let mut best_res = residual(rho);
    let mut z = rho;
    for _ in 0..4 {
        let (v, d) = wt.eval(z);
        z -= (v - target) / d;
        if !z.is_finite() {
            break;
        }
        let r = residual(z);
        if r < best_res {
            best = z;
            best_res = r;
        }
    }
    // Real cusps pick up a rounding-level imaginary part from complex
    // generator entries.
    let snapped = Complex64::new(best.re, 0.0);
    if best.im != 0.0 && best.im.abs() <= 1e-13 * (1.0 + best.re.abs()) && residual(snapped) <= best_res.max(1e-13) {
        return snapped;
    }
    best
}

fn canonical(rho: Complex64) -> Complex64 {
    if rho.im < 0.0 {
        rho.conj()
    } else {
        rho
    }
}

fn cusp_from_ray(wt: &WordTrace, ray: &RayTrace) -> CuspPoint {
    let rho = canonical(ray.cusp);
    CuspPoint {
        slope: ray.slope,
        orders: ray.orders,
        rho,
        residual: (wt.eval(rho).0 - CUSP_TRACE).norm(),
    }
}

/// Endpoint of the ray of `s`, on the branch with `Im ρ ≥ 0`.
pub fn cusp_point(s: Slope, orders: ConeOrders) -> Result<CuspPoint> {
    let ray = trace_ray(s, orders, default_t_start(s), DEFAULT_RAY_SAMPLES)?;
    Ok(cusp_from_ray(&WordTrace::for_slope(s, orders)?, &ray))
}

/// Outcome of the neighbourhood lift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Neighborhood {
    /// `p(ρ) ∈ H ∪ (−∞,−2)` on the ray's branch. `on_ray` is set when the
    /// trace is real, i.e. `ρ` lies on the ray itself at trace `t`.
    Certified { on_ray: bool, t: f64 },
    /// `p(ρ)` is not in the half-plane.
    OutsideRegion,
    /// The lift ends on a different branch.
    OtherBranch,
    /// Continuation failed; nothing is certified.
    LiftFailed,
}

/// Tolerance on `|Im p(ρ)|` for a point to count as on the ray.
pub const ON_RAY_TOL: f64 = 1e-9;

/// Lifts `p(ρ)` back to the start of the ray and compares.
pub fn neighborhood_check(
    rho: Complex64,
    s: Slope,
    orders: ConeOrders,
    ray_start: Complex64,
    t_start: f64,
) -> Result<Neighborhood> {
    let wt = WordTrace::for_slope(s, orders)?;
    Ok(lift_check(&wt, rho, ray_start, t_start))
}

fn lift_check(wt: &WordTrace, rho: Complex64, ray_start: Complex64, t_start: f64) -> Neighborhood {
    let v = wt.eval(rho).0;
    if !v.is_finite() || v.re > CUSP_TRACE || (v.im == 0.0 && v.re == CUSP_TRACE) {
        return Neighborhood::OutsideRegion;
    }
    match lift_to_ray(wt, rho, ray_start, t_start) {
        None => Neighborhood::LiftFailed,
        Some(false) => Neighborhood::OtherBranch,
        Some(true) => {
            let on_ray = v.im.abs() <= ON_RAY_TOL * (1.0 + v.norm()) && v.re < CUSP_TRACE;
            Neighborhood::Certified { on_ray, t: v.re }
        }
    }
}

/// Lifts the trace path from `p(ρ)` to `min(Re p(ρ), −2−δ)` and then along
/// the real axis to `t_start`, and reports whether the lift ends within
/// [`LIFT_MATCH_TOL`] of `ray_start`. Points below the real axis are
/// mirrored first. `None` when continuation fails.
pub fn lift_to_ray(wt: &WordTrace, rho: Complex64, ray_start: Complex64, t_start: f64) -> Option<bool> {
    let start = canonical(rho);
    let v = wt.eval(start).0;
    if !v.is_finite() {
        return None;
    }
    let w = v.re.min(CUSP_TRACE - LIFT_DELTA);
    let mid = track(wt, start, |s| v + s * (Complex64::new(w, 0.0) - v), LIFT_SUBSTEPS).ok()?;
    let (ta, tb) = ((-w - 1.0).ln(), (-t_start - 1.0).ln());
    let target = |s: f64| Complex64::new(-1.0 - (ta + s * (tb - ta)).exp(), 0.0);
    let end = track(wt, mid, target, LIFT_SUBSTEPS).ok()?;
    Some((end - ray_start).norm() <= LIFT_MATCH_TOL)
}

/// True iff `ρ` lies in the certified neighbourhood `p_s⁻¹(H)` of the ray
/// of slope `s` (or its mirror when `Im ρ < 0`).
pub fn in_neighborhood(rho: Complex64, s: Slope, orders: ConeOrders) -> bool {
    let Ok(wt) = WordTrace::for_slope(s, orders) else {
        return false;
    };
    let t_start = default_t_start(s);
    let Ok(start) = seed_with(&wt, s, t_start) else {
        return false;
    };
    matches!(lift_check(&wt, rho, start, t_start), Neighborhood::Certified { .. })
}

/// Points on the continuation of the ray past its cusp where
/// `p_s(ρ) = −2cos(π/n)`.
pub fn elliptic_ray_points(
    s: Slope,
    orders: ConeOrders,
    n_values: &[u32],
) -> Result<Vec<(u32, Result<Complex64>)>> {
    let cusp = cusp_point(s, orders)?;
    let wt = WordTrace::for_slope(s, orders)?;
    Ok(n_values
        .iter()
        .map(|&n| (n, elliptic_point(&wt, s, cusp.rho, n)))
        .collect())
}

fn elliptic_point(wt: &WordTrace, s: Slope, cusp: Complex64, n: u32) -> Result<Complex64> {
    if n < 2 {
        return Err(Error::Validation(format!("elliptic order must be >= 2, got {n}")));
    }
    let goal = -2.0 * (PI / n as f64).cos();
    let t = |sigma: f64| CUSP_TRACE + sigma * (goal - CUSP_TRACE);
    track(wt, cusp, |sigma| Complex64::new(t(sigma), 0.0), LIFT_SUBSTEPS).map_err(
        |(sigma, last_rho)| Error::BranchTracking {
            slope: s,
            last_t: t(sigma),
            last_rho,
        },
    )
}

type CacheCell = Arc<OnceLock<Result<Arc<RayTrace>>>>;

/// Rays keyed by `(slope, orders)`. Each key is computed at most once,
/// even under concurrent access; failures are cached too.
#[derive(Default)]
pub struct RayCache {
    cells: Mutex<HashMap<(Slope, ConeOrders), CacheCell>>,
}

impl RayCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ray(&self, s: Slope, orders: ConeOrders) -> Result<Arc<RayTrace>> {
        let cell = {
            let mut cells = self.cells.lock().unwrap_or_else(|e| e.into_inner());
            cells.entry((s, orders)).or_default().clone()
        };
        match cell.get_or_init(|| {
            trace_ray(s, orders, default_t_start(s), DEFAULT_RAY_SAMPLES).map(Arc::new)
        }) {
            Ok(ray) => Ok(ray.clone()),
            Err(e) => Err(e.replay()),
        }
    }

    pub fn cusp(&self, s: Slope, orders: ConeOrders) -> Result<CuspPoint> {
        let ray = self.ray(s, orders)?;
        Ok(cusp_from_ray(&WordTrace::for_slope(s, orders)?, &ray))
    }

    pub fn len(&self) -> usize {
        self.cells.lock().map(|c| c.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
