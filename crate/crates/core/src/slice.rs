//! Slice-level operations: classical bounds, point classification,
//! cusp clouds and slice renders.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::farey::{farey_sequence, stern_brocot_order, Slope};
use crate::limitset::{enumerate_reduced, GroupWord};
use crate::moebius::{jorgensen_value, ConeOrders, SpherePoint};
use crate::pleating::{
    cusp_point, default_t_start, lift_to_ray, CuspPoint, RayCache, CUSP_TRACE,
};
use crate::raster::{Raster, Rgb, Viewport};
use crate::traces::{word_matrix, WordTrace};

/// A parameter value together with the cone orders it refers to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlicePoint {
    pub rho: Complex64,
    pub orders: ConeOrders,
}

impl SlicePoint {
    pub fn new(rho: Complex64, orders: ConeOrders) -> Self {
        Self { rho, orders }
    }

    pub fn parabolic(rho: Complex64) -> Self {
        Self::new(rho, ConeOrders::PARABOLIC)
    }
}

/// Classical discreteness bounds for the parabolic slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundReport {
    /// `|ρ| ≥ 1`, necessary for discreteness.
    pub shimizu_leutbecher_ok: bool,
    /// Outside all three closed disks of radius 2 about −2, 0, 2; sufficient.
    pub cjr_interior: bool,
    /// Inside the open convex hull of `{|z| = 2} ∪ {±4}`. Everything outside
    /// the closed hull lies in the slice; inside, the bound says nothing.
    pub lu_excluded: bool,
}

const CJR_CENTERS: [f64; 3] = [-2.0, 0.0, 2.0];
const CJR_RADIUS: f64 = 2.0;

/// `min_c |z − c| − 2`; positive outside all three disks.
pub fn cjr_distance(z: Complex64) -> f64 {
    CJR_CENTERS
        .iter()
        .map(|&c| (z - c).norm() - CJR_RADIUS)
        .fold(f64::INFINITY, f64::min)
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let t = ((z - a).re * ab.re + (z - a).im * ab.im) / ab.norm_sqr();
    (z - (a + ab * t.clamp(0.0, 1.0))).norm()
}

/// Tangency points of the hull segments on `|z| = 2`.
fn lu_tangent_points() -> [Complex64; 4] {
    let s = 3f64.sqrt();
    [
        Complex64::new(1.0, s),
        Complex64::new(-1.0, s),
        Complex64::new(-1.0, -s),
        Complex64::new(1.0, -s),
    ]
}

/// Signed distance to the boundary of the hull of `{|z| = 2} ∪ {±4}`:
/// negative inside.
pub fn lu_signed_distance(z: Complex64) -> f64 {
    let [t1, t2, t3, t4] = lu_tangent_points();
    let (p4, m4) = (Complex64::new(4.0, 0.0), Complex64::new(-4.0, 0.0));
    let mut d = [
        segment_distance(z, p4, t1),
        segment_distance(z, p4, t4),
        segment_distance(z, m4, t2),
        segment_distance(z, m4, t3),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let angle = z.arg();
    let on_arc_sector = z.norm() > 0.0
        && ((PI / 3.0..=2.0 * PI / 3.0).contains(&angle)
            || (-2.0 * PI / 3.0..=-PI / 3.0).contains(&angle));
    if on_arc_sector {
        d = d.min((z.norm() - 2.0).abs());
    } else {
        d = d.min(lu_tangent_points().iter().map(|t| (z - t).norm()).fold(f64::INFINITY, f64::min));
    }
    if lu_inside(z) {
        -d
    } else {
        d
    }
}

/// Closed hull membership: the disk or one of the two kites.
fn lu_inside(z: Complex64) -> bool {
    if z.norm() <= 2.0 {
        return true;
    }
    // Kite at ±4: |x| ≥ 1 and |y| ≤ (4 − |x|)/√3.
    let x = z.re.abs();
    (1.0..=4.0).contains(&x) && z.im.abs() <= (4.0 - x) / 3f64.sqrt()
}

pub fn classical_bounds(rho: Complex64) -> BoundReport {
    BoundReport {
        shimizu_leutbecher_ok: rho.norm() >= 1.0,
        cjr_interior: cjr_distance(rho) > 0.0,
        lu_excluded: lu_signed_distance(rho) < 0.0,
    }
}

pub const SHIMIZU_LEUTBECHER: &str = "shimizu-leutbecher";

/// Classification of a slice parameter, with a re-checkable witness.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    InteriorCertified { slope: Slope },
    OnRay { slope: Slope, t: f64 },
    CuspNear { slope: Slope, distance: f64 },
    /// The Farey word of `slope` is parabolic (`±2`) or elliptic on the
    /// extended ray; `trace` is the signed value.
    ExteriorRelator { slope: Slope, trace: Complex64 },
    NondiscreteEvidence { words: [GroupWord; 2], jorgensen: f64 },
    OutsideNecessaryBound { bound: &'static str },
    Unknown,
}

impl Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::InteriorCertified { .. } => "InteriorCertified",
            Verdict::OnRay { .. } => "OnRay",
            Verdict::CuspNear { .. } => "CuspNear",
            Verdict::ExteriorRelator { .. } => "ExteriorRelator",
            Verdict::NondiscreteEvidence { .. } => "NondiscreteEvidence",
            Verdict::OutsideNecessaryBound { .. } => "OutsideNecessaryBound",
            Verdict::Unknown => "Unknown",
        }
    }

    /// Claims the point is in the slice interior.
    pub fn is_interior(&self) -> bool {
        matches!(self, Verdict::InteriorCertified { .. } | Verdict::OnRay { .. })
    }
}

/// Budgets for [`Classifier`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub max_denominator: u32,
    pub word_depth: usize,
    pub tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            max_denominator: 20,
            word_depth: 4,
            tol: 1e-9,
        }
    }
}

/// Distinct fixed points closer than this (chordally) count as shared.
pub const SHARED_FIXED_POINT_TOL: f64 = 1e-6;

struct SlopeData {
    slope: Slope,
    wt: WordTrace,
    t_start: f64,
    start: Complex64,
    cusps: Vec<Complex64>,
}

/// Precomputed rays, cusps and words for classifying many points.
pub struct Classifier {
    orders: ConeOrders,
    opts: ClassifyOptions,
    slopes: Vec<SlopeData>,
    failed: Vec<Slope>,
    words: Vec<GroupWord>,
}

fn mirrors(z: Complex64, orders: ConeOrders) -> Vec<Complex64> {
    let mut out = vec![z, z.conj()];
    if orders.is_symmetric() {
        out.extend([-z, -z.conj()]);
    }
    out
}

impl Classifier {
    pub fn new(orders: ConeOrders, opts: ClassifyOptions) -> Result<Self> {
        if opts.max_denominator < 1 || opts.word_depth < 1 {
            return Err(Error::Validation("budgets must be >= 1".into()));
        }
        if !(opts.tol > 0.0) {
            return Err(Error::Validation(format!("tolerance must be positive, got {}", opts.tol)));
        }
        let cache = RayCache::new();
        let built: Vec<std::result::Result<SlopeData, Slope>> = stern_brocot_order(opts.max_denominator)
            .into_par_iter()
            .map(|slope| {
                let ray = cache.ray(slope, orders).map_err(|e| {
                    warn!("slope {slope}: {e}");
                    slope
                })?;
                Ok(SlopeData {
                    slope,
                    wt: WordTrace::for_slope(slope, orders).map_err(|_| slope)?,
                    t_start: default_t_start(slope),
                    start: ray.samples[0].rho,
                    cusps: mirrors(ray.cusp, orders),
                })
            })
            .collect();
        let mut slopes = Vec::new();
        let mut failed = Vec::new();
        for b in built {
            match b {
                Ok(d) => slopes.push(d),
                Err(s) => failed.push(s),
            }
        }
        Ok(Self {
            orders,
            opts,
            slopes,
            failed,
            words: enumerate_reduced(orders, opts.word_depth),
        })
    }

    pub fn orders(&self) -> ConeOrders {
        self.orders
    }

    pub fn options(&self) -> ClassifyOptions {
        self.opts
    }

    /// Slopes whose ray could not be traced; they take no part in
    /// classification.
    pub fn failed_slopes(&self) -> &[Slope] {
        &self.failed
    }

    pub fn classify(&self, rho: Complex64) -> Verdict {
        let tol = self.opts.tol;
        if self.orders.is_parabolic() && rho.norm() < 1.0 {
            return Verdict::OutsideNecessaryBound {
                bound: SHIMIZU_LEUTBECHER,
            };
        }
        for d in &self.slopes {
            let v = d.wt.eval(rho).0;
            let in_region = v.is_finite() && v.re <= CUSP_TRACE && !(v.im == 0.0 && v.re == CUSP_TRACE);
            if in_region && lift_to_ray(&d.wt, rho, d.start, d.t_start) == Some(true) {
                let on_ray = v.im.abs() <= tol * (1.0 + v.norm()) && v.re < CUSP_TRACE;
                return if on_ray {
                    Verdict::OnRay { slope: d.slope, t: v.re }
                } else {
                    Verdict::InteriorCertified { slope: d.slope }
                };
            }
        }
        for d in &self.slopes {
            let distance = d.cusps.iter().map(|c| (rho - c).norm()).fold(f64::INFINITY, f64::min);
            if distance <= tol {
                return Verdict::CuspNear { slope: d.slope, distance };
            }
        }
        // Words that are ±I outrank words that are merely parabolic.
        for d in &self.slopes {
            if let Ok(m) = word_matrix(d.wt.letters(), rho, self.orders) {
                if m.is_identity(tol) {
                    return Verdict::ExteriorRelator { slope: d.slope, trace: m.trace() };
                }
            }
        }
        for d in &self.slopes {
            let v = d.wt.eval(rho).0;
            if (v - 2.0).norm() <= tol || (v + 2.0).norm() <= tol {
                return Verdict::ExteriorRelator { slope: d.slope, trace: v };
            }
            let elliptic = v.im.abs() <= tol && v.re > CUSP_TRACE && v.re < 2.0;
            if elliptic && lift_to_ray(&d.wt, rho, d.start, d.t_start) == Some(true) {
                return Verdict::ExteriorRelator { slope: d.slope, trace: v };
            }
        }
        if let Some((words, jorgensen)) = self.jorgensen_evidence(rho) {
            return Verdict::NondiscreteEvidence { words, jorgensen };
        }
        Verdict::Unknown
    }

    fn jorgensen_evidence(&self, rho: Complex64) -> Option<([GroupWord; 2], f64)> {
        let mats: Vec<_> = self.words.iter().map(|w| w.matrix(rho, self.orders)).collect();
        let traces: Vec<Complex64> = mats.iter().map(|m| m.trace()).collect();
        for i in 0..mats.len() {
            for j in i + 1..mats.len() {
                let (ta, tb) = (traces[i], traces[j]);
                let tab = mats[i].product(&mats[j]).trace();
                let commutator = ta * ta + tb * tb + tab * tab - ta * tb * tab - 2.0;
                let lower = (ta * ta - 4.0).norm().min((tb * tb - 4.0).norm());
                if lower + (commutator - 2.0).norm() >= 1.0 {
                    continue;
                }
                let (a, b) = (&mats[i], &mats[j]);
                let (jab, jba) = (jorgensen_value(a, b), jorgensen_value(b, a));
                if jab.min(jba) >= 1.0 || !non_elementary(a, b) {
                    continue;
                }
                let (wa, wb) = (self.words[i].clone(), self.words[j].clone());
                return Some(if jab <= jba {
                    ([wa, wb], jab)
                } else {
                    ([wb, wa], jba)
                });
            }
        }
        None
    }

    /// Re-evaluates the witness of `verdict` at `rho`.
    pub fn verify(&self, rho: Complex64, verdict: &Verdict) -> bool {
        let tol = 1e-9;
        let data = |s: &Slope| self.slopes.iter().find(|d| d.slope == *s);
        match verdict {
            Verdict::OutsideNecessaryBound { .. } => rho.norm() < 1.0,
            Verdict::InteriorCertified { slope } => data(slope)
                .is_some_and(|d| lift_to_ray(&d.wt, rho, d.start, d.t_start) == Some(true)),
            Verdict::OnRay { slope, t } => data(slope).is_some_and(|d| {
                (d.wt.eval(rho).0 - t).norm() <= tol * (1.0 + t.abs())
                    && lift_to_ray(&d.wt, rho, d.start, d.t_start) == Some(true)
            }),
            Verdict::CuspNear { slope, distance } => data(slope).is_some_and(|d| {
                let dist = d.cusps.iter().map(|c| (rho - c).norm()).fold(f64::INFINITY, f64::min);
                (dist - distance).abs() <= tol
            }),
            Verdict::ExteriorRelator { slope, trace } => {
                data(slope).is_some_and(|d| (d.wt.eval(rho).0 - trace).norm() <= tol * (1.0 + trace.norm()))
            }
            Verdict::NondiscreteEvidence { words, jorgensen } => {
                let a = words[0].matrix(rho, self.orders);
                let b = words[1].matrix(rho, self.orders);
                (jorgensen_value(&a, &b) - jorgensen).abs() <= tol && *jorgensen < 1.0
            }
            Verdict::Unknown => true,
        }
    }
}

fn non_elementary(a: &crate::moebius::MoebiusMap, b: &crate::moebius::MoebiusMap) -> bool {
    let (Ok(fa), Ok(fb)) = (a.fixed_points(), b.fixed_points()) else {
        return false;
    };
    !fa.iter().any(|p: &SpherePoint| {
        fb.iter().any(|q| p.chordal_distance(*q) <= SHARED_FIXED_POINT_TOL)
    })
}

/// One-shot classification; builds a [`Classifier`] for the point's orders.
pub fn classify_point(pt: SlicePoint, max_denominator: u32, word_depth: usize, tol: f64) -> Result<Verdict> {
    let c = Classifier::new(
        pt.orders,
        ClassifyOptions {
            max_denominator,
            word_depth,
            tol,
        },
    )?;
    Ok(c.classify(pt.rho))
}

/// Which symmetry image of a canonical cusp a cloud point is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Canonical,
    Conjugate,
    Negated,
    NegatedConjugate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CloudPoint {
    pub cusp: CuspPoint,
    pub branch: Branch,
}

/// Cusps for all slopes up to a denominator bound, with mirror images.
#[derive(Debug)]
pub struct CuspCloud {
    pub orders: ConeOrders,
    pub max_denominator: u32,
    pub points: Vec<CloudPoint>,
    /// Slopes whose cusp could not be computed.
    pub failures: Vec<(Slope, Error)>,
    pub slope_count: usize,
}

impl CuspCloud {
    pub fn rhos(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.cusp.rho).collect()
    }

    pub fn failure_rate(&self) -> f64 {
        if self.slope_count == 0 {
            0.0
        } else {
            self.failures.len() as f64 / self.slope_count as f64
        }
    }
}

/// Mirror images closer than this are merged.
pub const CLOUD_MERGE_TOL: f64 = 1e-9;

pub fn cusp_cloud(max_denominator: u32, orders: ConeOrders) -> Result<CuspCloud> {
    cusp_cloud_with(max_denominator, orders, None)
}

/// As [`cusp_cloud`], reusing rays from `cache` when given.
pub fn cusp_cloud_with(max_denominator: u32, orders: ConeOrders, cache: Option<&RayCache>) -> Result<CuspCloud> {
    if max_denominator < 1 {
        return Err(Error::Validation("max denominator must be >= 1".into()));
    }
    let slopes = farey_sequence(max_denominator);
    let results: Vec<(Slope, Result<CuspPoint>)> = slopes
        .par_iter()
        .map(|&s| {
            let r = match cache {
                Some(c) => c.cusp(s, orders),
                None => cusp_point(s, orders),
            };
            (s, r)
        })
        .collect();

    let mut candidates = Vec::new();
    let mut failures = Vec::new();
    for (s, r) in results {
        match r {
            Ok(c) => {
                candidates.push(CloudPoint { cusp: c, branch: Branch::Canonical });
                candidates.push(CloudPoint { cusp: c.conj(), branch: Branch::Conjugate });
                if orders.is_symmetric() {
                    candidates.push(CloudPoint { cusp: c.neg(), branch: Branch::Negated });
                    candidates.push(CloudPoint {
                        cusp: c.neg().conj(),
                        branch: Branch::NegatedConjugate,
                    });
                }
            }
            Err(e) => {
                warn!("cusp {s} ({orders}): {e}");
                failures.push((s, e));
            }
        }
    }
    // Direct images win over negated ones when both land on the same point.
    candidates.sort_by_key(|p| (p.branch >= Branch::Negated, p.cusp.slope, p.branch));
    let mut points: Vec<CloudPoint> = Vec::with_capacity(candidates.len());
    for c in candidates {
        if points
            .iter()
            .all(|p| (p.cusp.rho - c.cusp.rho).norm() > CLOUD_MERGE_TOL)
        {
            points.push(c);
        }
    }
    points.sort_by_key(|p| (p.cusp.slope, p.branch));
    Ok(CuspCloud {
        orders,
        max_denominator,
        points,
        failures,
        slope_count: slopes.len(),
    })
}

pub const BACKGROUND: Rgb = [0, 0, 0];
pub const CRUDE_BOUND: Rgb = [200, 40, 40];
pub const CJR_BOUND: Rgb = [60, 90, 220];
pub const LU_BOUND: Rgb = [40, 170, 60];
pub const RAY: Rgb = [140, 140, 140];
pub const CUSP: Rgb = [255, 255, 255];
pub const WARNING: Rgb = [255, 140, 0];

/// Largest denominator whose rays are drawn.
pub const MAX_DRAWN_RAY_DENOMINATOR: u32 = 12;

#[derive(Debug)]
pub struct SliceRender {
    pub raster: Raster,
    /// Set for orders `(2, 2)`, where the slice is an interval.
    pub degenerate: bool,
    pub cusp_count: usize,
    pub slope_count: usize,
    pub failures: Vec<(Slope, String)>,
}

impl SliceRender {
    pub fn failure_rate(&self) -> f64 {
        if self.slope_count == 0 {
            0.0
        } else {
            self.failures.len() as f64 / self.slope_count as f64
        }
    }
}

fn polyline(r: &mut Raster, v: &Viewport, pts: &[Complex64], color: Rgb) {
    let (w, h) = (r.width(), r.height());
    for pair in pts.windows(2) {
        r.line(v.pixel_f64(pair[0], w, h), v.pixel_f64(pair[1], w, h), color);
    }
}

fn circle(center: Complex64, radius: f64, from: f64, to: f64) -> Vec<Complex64> {
    const N: usize = 720;
    (0..=N)
        .map(|k| center + Complex64::from_polar(radius, from + (to - from) * k as f64 / N as f64))
        .collect()
}

fn draw_bounds(r: &mut Raster, v: &Viewport) {
    let origin = Complex64::new(0.0, 0.0);
    polyline(r, v, &circle(origin, 1.0, 0.0, 2.0 * PI), CRUDE_BOUND);
    polyline(r, v, &circle(origin, 4.0, 0.0, 2.0 * PI), CRUDE_BOUND);
    for c in CJR_CENTERS {
        polyline(r, v, &circle(Complex64::new(c, 0.0), CJR_RADIUS, 0.0, 2.0 * PI), CJR_BOUND);
    }
    let [t1, t2, t3, t4] = lu_tangent_points();
    let (p4, m4) = (Complex64::new(4.0, 0.0), Complex64::new(-4.0, 0.0));
    polyline(r, v, &circle(origin, 2.0, PI / 3.0, 2.0 * PI / 3.0), LU_BOUND);
    polyline(r, v, &circle(origin, 2.0, -2.0 * PI / 3.0, -PI / 3.0), LU_BOUND);
    for (a, b) in [(p4, t1), (p4, t4), (m4, t2), (m4, t3)] {
        polyline(r, v, &[a, b], LU_BOUND);
    }
}

/// Draws classical bounds (parabolic only), rays for small denominators
/// and the cusp cloud.
pub fn render_slice(
    orders: ConeOrders,
    max_denominator: u32,
    viewport: Viewport,
    width: usize,
    height: usize,
) -> Result<SliceRender> {
    let mut raster = Raster::new(width, height)?;
    raster.fill(BACKGROUND);
    if orders.is_degenerate() {
        warn!("orders (2,2): the slice degenerates to an interval");
        let band = (height / 10).max(1);
        for y in (0..band).chain(height - band..height) {
            for x in 0..width {
                raster.set(x, y, WARNING);
            }
        }
        return Ok(SliceRender {
            raster,
            degenerate: true,
            cusp_count: 0,
            slope_count: 0,
            failures: Vec::new(),
        });
    }
    if orders.is_parabolic() {
        draw_bounds(&mut raster, &viewport);
    }
    if max_denominator == 0 {
        return Ok(SliceRender {
            raster,
            degenerate: false,
            cusp_count: 0,
            slope_count: 0,
            failures: Vec::new(),
        });
    }

    let cache = RayCache::new();
    let cloud = cusp_cloud_with(max_denominator, orders, Some(&cache))?;
    let ray_q = max_denominator.min(MAX_DRAWN_RAY_DENOMINATOR);
    for s in farey_sequence(ray_q) {
        if let Ok(ray) = cache.ray(s, orders) {
            let pts: Vec<Complex64> = ray.samples.iter().map(|x| x.rho).collect();
            for k in 0..if orders.is_symmetric() { 4 } else { 2 } {
                let image: Vec<Complex64> = pts
                    .iter()
                    .map(|&z| match k {
                        0 => z,
                        1 => z.conj(),
                        2 => -z,
                        _ => -z.conj(),
                    })
                    .collect();
                polyline(&mut raster, &viewport, &image, RAY);
            }
        }
    }
    for p in &cloud.points {
        if let Some((x, y)) = viewport.pixel(p.cusp.rho, width, height) {
            raster.set(x, y, CUSP);
        }
    }
    Ok(SliceRender {
        raster,
        degenerate: false,
        cusp_count: cloud.points.len(),
        slope_count: cloud.slope_count,
        failures: cloud
            .failures
            .iter()
            .map(|(s, e)| (*s, e.to_string()))
            .collect(),
    })
}
