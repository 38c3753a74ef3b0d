//! Acceptance criteria 1-9. Each criterion prints one PASS/FAIL line; the
//! process fails if any assertion inside a criterion fails.
//!
//! Two literal clauses cannot hold and are reported as FAIL with the measured
//! numbers while the attainable part of the criterion is still asserted:
//! the Lyndon-Ullman clause of criterion 3 (the hull is an interior bound, so
//! cusps lie inside it) and the point count of criterion 7 at eps = 1e-3.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riley_core::farey::farey_sequence;
use riley_core::limitset::{limit_set, DEFAULT_CAP};
use riley_core::moebius::{generator_pair, jorgensen_value, Order};
use riley_core::pleating::cusp_point;
use riley_core::slice::{
    cjr_distance, classify_point, cusp_cloud, lu_signed_distance, render_slice, Classifier, ClassifyOptions,
};
use riley_core::traces::{farey_polynomial_direct, farey_polynomial_recursive, poly_roots};
use riley_core::{Complex64, ConeOrders, SlicePoint, Slope, TracePolynomial, Verdict, Viewport};

const P: ConeOrders = ConeOrders::PARABOLIC;

/// Outcome of one criterion: the printed status and a detail line.
struct Report {
    pass: bool,
    detail: String,
}

impl Report {
    fn pass(detail: impl Into<String>) -> Self {
        Self { pass: true, detail: detail.into() }
    }

    /// Literal clause unattainable; attainable parts were asserted.
    fn known_fail(detail: impl Into<String>) -> Self {
        Self { pass: false, detail: detail.into() }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn slope(s: &str) -> Slope {
    s.parse().unwrap()
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let directed = |a: &[Complex64], b: &[Complex64]| {
        a.iter()
            .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

fn criterion_1() -> Report {
    let start = Instant::now();
    let mut exact = 0;
    for s in farey_sequence(12) {
        let d = farey_polynomial_direct(s, P).unwrap();
        let r = farey_polynomial_recursive(s, P).unwrap();
        assert_eq!(d.exact_coefficients(), r.exact_coefficients(), "{s}");
        assert!(d.exact_coefficients().is_some());
        exact += 1;
    }
    let mut worst = 0.0f64;
    let mut float = 0;
    for o in ["2,3", "3,3", "4,inf"] {
        let o: ConeOrders = o.parse().unwrap();
        for s in farey_sequence(10) {
            let d = farey_polynomial_direct(s, o).unwrap();
            let r = farey_polynomial_recursive(s, o).unwrap();
            worst = worst.max(d.relative_distance(&r));
            float += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(worst <= 1e-9, "relative distance {worst:e}");
    assert!(elapsed < 10.0, "{elapsed} s");
    Report::pass(format!(
        "{exact} exact parabolic matches (q <= 12), {float} elliptic pairs with max relative distance {worst:.1e}, {elapsed:.2} s"
    ))
}

fn criterion_2() -> Report {
    let cases: [(&str, &[i64], Complex64); 3] = [
        ("0/1", &[2, 1], c(-4.0, 0.0)),
        ("1/1", &[2, -1], c(4.0, 0.0)),
        ("1/2", &[2, 0, 1], c(0.0, 2.0)),
    ];
    let mut worst = 0.0f64;
    for (s, coeffs, cusp) in cases {
        let s = slope(s);
        let expected = TracePolynomial::from_integers(s, P, coeffs);
        assert_eq!(farey_polynomial_direct(s, P).unwrap(), expected, "{s}");
        assert_eq!(farey_polynomial_recursive(s, P).unwrap(), expected, "{s}");
        let got = cusp_point(s, P).unwrap().rho;
        worst = worst.max((got - cusp).norm());
    }
    assert!(worst <= 1e-9, "cusp error {worst:e}");
    Report::pass(format!("polynomials exact, cusp error {worst:.1e}"))
}

fn criterion_3() -> Report {
    let start = Instant::now();
    let cloud = single_thread(|| cusp_cloud(40, P).unwrap());
    let single = start.elapsed().as_secs_f64();
    assert!(cloud.failures.is_empty(), "{:?}", cloud.failures);
    let tol = 1e-8;
    let rhos = cloud.rhos();
    let mut inside_open_hull = 0;
    let mut deepest = 0.0f64;
    let mut max_hull = f64::NEG_INFINITY;
    for &z in &rhos {
        assert!(z.norm() >= 1.0 - tol && z.norm() <= 4.0 + tol, "{z}");
        assert!(cjr_distance(z) <= tol, "{z} outside the CJR disks");
        let d = lu_signed_distance(z);
        max_hull = max_hull.max(d);
        if d < -tol {
            inside_open_hull += 1;
            deepest = deepest.max(-d);
        }
    }
    // Corrected clause: outside the closed hull lies inside the slice.
    assert!(max_hull <= tol, "cusp outside the closed hull by {max_hull:e}");
    assert!(single < 60.0, "{single} s");

    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let speedup = if cores >= 8 {
        let start = Instant::now();
        rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| cusp_cloud(40, P).unwrap());
        let s = single / start.elapsed().as_secs_f64();
        assert!(s >= 5.0, "8-thread speedup {s:.2}");
        format!("8-thread speedup {s:.2}x")
    } else {
        format!("8-thread speedup UNVERIFIED ({cores} core available)")
    };
    let summary = format!(
        "{} cusps, 1 <= |rho| <= 4 and CJR union hold, {single:.2} s single-threaded, {speedup}",
        rhos.len()
    );
    if inside_open_hull > 0 {
        Report::known_fail(format!(
            "{summary}; clause 'outside the open Lyndon-Ullman hull' is false for {inside_open_hull} cusps \
             (deepest {deepest:.3}); all cusps lie in the closed hull (max signed distance {max_hull:.1e})"
        ))
    } else {
        Report::pass(summary)
    }
}

fn criterion_4() -> Report {
    let rhos = cusp_cloud(30, P).unwrap().rhos();
    let conj: Vec<Complex64> = rhos.iter().map(|z| z.conj()).collect();
    let neg: Vec<Complex64> = rhos.iter().map(|z| -z).collect();
    let (hc, hn) = (hausdorff(&rhos, &conj), hausdorff(&rhos, &neg));
    assert!(hc <= 1e-8 && hn <= 1e-8, "conj {hc:e}, neg {hn:e}");
    Report::pass(format!("{} cusps, Hausdorff conj {hc:.1e}, neg {hn:.1e}", rhos.len()))
}

fn criterion_5() -> Report {
    let rho = c(0.5, -(3f64.sqrt()) / 2.0);
    let p = farey_polynomial_direct(slope("3/5"), P).unwrap();
    let modulus = p.eval_accurate(rho).0.norm();
    assert!((modulus - 2.0).abs() <= 1e-9, "|p_3/5| = {modulus}");
    let d = ClassifyOptions::default();
    let v = classify_point(SlicePoint::parabolic(rho), d.max_denominator, d.word_depth, d.tol).unwrap();
    let Verdict::ExteriorRelator { slope, trace } = v else {
        panic!("{v:?}");
    };
    Report::pass(format!(
        "|p_3/5| - 2 = {:.1e}, ExteriorRelator at slope {slope} with trace {:.6}",
        modulus - 2.0,
        trace.re
    ))
}

fn grid() -> Vec<Complex64> {
    (0..=100)
        .flat_map(|i| (0..=100).map(move |j| c(-5.0 + 0.1 * i as f64, -5.0 + 0.1 * j as f64)))
        .collect()
}

fn criterion_6() -> Report {
    let opts = ClassifyOptions {
        max_denominator: 20,
        word_depth: 4,
        ..ClassifyOptions::default()
    };
    let points = grid();
    let run = || {
        let cl = Classifier::new(P, opts).unwrap();
        let verdicts: Vec<Verdict> = points.iter().map(|&z| cl.classify(z)).collect();
        (cl, verdicts)
    };
    let start = Instant::now();
    let (cl, first) = run();
    let (_, second) = run();
    let elapsed = start.elapsed().as_secs_f64();
    let mut interior = 0;
    for ((z, a), b) in points.iter().zip(&first).zip(&second) {
        assert_eq!(a, b, "verdicts differ at {z}");
        assert!(cl.verify(*z, a), "witness of {a:?} at {z} does not re-check");
        if a.is_interior() {
            interior += 1;
            assert!(z.norm() >= 1.0, "interior verdict at {z}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let rho = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let (x, y) = generator_pair(rho, P);
        worst = worst.max((jorgensen_value(&x, &y) - rho.norm_sqr()).abs());
    }
    assert!(worst <= 1e-12, "Jorgensen error {worst:e}");
    Report::pass(format!(
        "{} points x 2 runs identical and re-verified ({interior} interior), Jorgensen error {worst:.1e}, {elapsed:.1} s",
        points.len()
    ))
}

fn criterion_7() -> Report {
    let mut counts = Vec::new();
    for rho in [5.0, 4.0] {
        let pt = SlicePoint::parabolic(c(rho, 0.0));
        let cloud = limit_set(pt, 14, 1e-3, DEFAULT_CAP).unwrap();
        let fine = limit_set(pt, 14, 1e-4, DEFAULT_CAP).unwrap();
        for cl in [&cloud, &fine] {
            let im = cl.points.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            assert!(im <= 1e-6, "rho = {rho}: max |Im| = {im:e}");
        }
        assert!(fine.points.len() >= 100_000, "rho = {rho}: {} points at eps 1e-4", fine.points.len());
        counts.push((rho, cloud.points.len(), fine.points.len()));
    }
    let detail = counts
        .iter()
        .map(|(r, a, b)| format!("rho = {r}: {a} points at eps 1e-3, {b} at eps 1e-4"))
        .collect::<Vec<_>>()
        .join("; ");
    if counts.iter().all(|(_, a, _)| *a >= 100_000) {
        Report::pass(format!("max |Im| <= 1e-6; {detail}"))
    } else {
        Report::known_fail(format!(
            "max |Im| <= 1e-6 holds, but fewer than 1e5 points at eps 1e-3 ({detail})"
        ))
    }
}

fn criterion_8() -> Report {
    let mut polys = 0;
    let mut worst = 0.0f64;
    let mut closest = f64::INFINITY;
    let target = c(-2.0, 0.0);
    for s in farey_sequence(40) {
        let p = farey_polynomial_direct(s, P).unwrap();
        let roots = poly_roots(&p, target).unwrap();
        assert_eq!(roots.len(), s.q() as usize, "{s}");
        let bound = 1e-8 * (1.0 + p.coefficient_l1());
        for (i, z) in roots.iter().enumerate() {
            let (v, dv) = p.eval_accurate(*z);
            let residual = (v - target).norm();
            assert!(residual <= bound, "{s}: residual {residual:e} at {z}");
            worst = worst.max(residual / bound);
            for w in &roots[i + 1..] {
                let gap = (z - w).norm();
                closest = closest.min(gap);
                assert!(gap > 1e-10 || dv.norm() <= 1e-6 * (1.0 + p.coefficient_l1()), "{s}: duplicate {z}");
            }
        }
        polys += 1;
    }
    Report::pass(format!(
        "{polys} polynomials, worst residual {worst:.1e} of bound, closest root pair {closest:.1e}"
    ))
}

fn criterion_9() -> Report {
    let view = Viewport::square(5.0).unwrap();
    let eye = render_slice(P, 30, view, 400, 400).unwrap();
    assert!(eye.failures.is_empty() && eye.cusp_count > 0);

    let orders = [Order::Finite(2), Order::Finite(3), Order::Finite(4), Order::Finite(5), Order::Finite(6), Order::Infinite];
    let second = [Order::Finite(2), Order::Finite(3), Order::Finite(4), Order::Infinite];
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for a in orders {
        for b in second {
            let o = ConeOrders::new(a, b).unwrap();
            let r = render_slice(o, 20, view, 200, 200).unwrap();
            assert_eq!(r.degenerate, o.is_degenerate());
            assert!(r.failure_rate() <= 0.01, "{o}: failure rate {}", r.failure_rate());
            worst = worst.max(r.failure_rate());
            pairs += 1;
        }
    }

    let small = cusp_cloud(20, P).unwrap().rhos();
    let large = cusp_cloud(40, P).unwrap().rhos();
    for z in &small {
        assert!(large.iter().any(|w| (z - w).norm() <= 1e-9), "{z} missing at Q = 40");
    }
    assert!(large.len() > small.len());
    Report::pass(format!(
        "eye render with {} cusps; {pairs} order pairs, worst failure rate {worst:.3}; cloud grows {} -> {}",
        eye.cusp_count,
        small.len(),
        large.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Report); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut broken = 0;
    for (n, f) in criteria {
        match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => println!("criterion {n}: {} {}", if r.pass { "PASS" } else { "FAIL" }, r.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {n}: FAIL assertion: {msg}");
                broken += 1;
            }
        }
    }
    if broken > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
