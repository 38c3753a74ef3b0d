//! Limit sets of `Γ_ρ = <X, Y_ρ>` by pruned depth-first search over reduced
//! words of `Z_a * Z_b`.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::farey::Generator;
use crate::moebius::{generator_pair, ConeOrders, MoebiusMap, Order, SpherePoint};
use crate::raster::{Raster, Viewport};
use crate::slice::SlicePoint;

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const MAX_DEPTH: usize = 40;
pub const DEFAULT_CAP: usize = 5_000_000;

/// Seeds closer than this (chordally) count as one point.
const SEED_MERGE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub generator: Generator,
    /// In `1..=n−1` for a generator of finite order `n`, otherwise nonzero.
    pub exponent: i32,
}

/// A reduced word: adjacent syllables use different generators.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GroupWord {
    syllables: Vec<Syllable>,
}

impl GroupWord {
    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of enumeration steps: `|e|` for infinite-order syllables,
    /// one for each finite-order syllable.
    pub fn steps(&self, orders: ConeOrders) -> usize {
        self.syllables
            .iter()
            .map(|s| match order_of(orders, s.generator) {
                Order::Infinite => s.exponent.unsigned_abs() as usize,
                Order::Finite(_) => 1,
            })
            .sum()
    }

    fn push_step(&mut self, step: Step) {
        match self.syllables.last_mut() {
            Some(last) if last.generator == step.generator && step.repeatable => {
                last.exponent += step.exponent;
            }
            _ => self.syllables.push(Syllable {
                generator: step.generator,
                exponent: step.exponent,
            }),
        }
    }

    /// Product of generator powers at `ρ`.
    pub fn matrix(&self, rho: Complex64, orders: ConeOrders) -> MoebiusMap {
        let (x, y) = generator_pair(rho, orders);
        let mut m = MoebiusMap::identity();
        for s in &self.syllables {
            let g = match s.generator {
                Generator::X => &x,
                Generator::Y => &y,
            };
            let base = if s.exponent > 0 { *g } else { g.inverse() };
            for _ in 0..s.exponent.unsigned_abs() {
                m = m.product(&base);
            }
        }
        m
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return f.write_str("1");
        }
        for (i, s) in self.syllables.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", s.generator)?;
            if s.exponent != 1 {
                write!(f, "^{}", s.exponent)?;
            }
        }
        Ok(())
    }
}

fn order_of(orders: ConeOrders, g: Generator) -> Order {
    match g {
        Generator::X => orders.a,
        Generator::Y => orders.b,
    }
}

/// One edge of the enumeration tree.
#[derive(Clone, Copy, Debug)]
struct Step {
    generator: Generator,
    exponent: i32,
    /// Infinite-order steps may repeat with the same sign.
    repeatable: bool,
}

fn step_alphabet(orders: ConeOrders) -> Vec<Step> {
    let mut out = Vec::new();
    for g in [Generator::X, Generator::Y] {
        match order_of(orders, g) {
            Order::Infinite => {
                for e in [1, -1] {
                    out.push(Step {
                        generator: g,
                        exponent: e,
                        repeatable: true,
                    });
                }
            }
            Order::Finite(n) => {
                for e in 1..n as i32 {
                    out.push(Step {
                        generator: g,
                        exponent: e,
                        repeatable: false,
                    });
                }
            }
        }
    }
    out
}

fn may_follow(prev: Option<&Step>, next: &Step) -> bool {
    match prev {
        None => true,
        Some(p) if p.generator != next.generator => true,
        Some(p) => p.repeatable && p.exponent == next.exponent,
    }
}

/// Every nonempty reduced word of at most `depth` steps, depth-first.
pub fn enumerate_reduced(orders: ConeOrders, depth: usize) -> Vec<GroupWord> {
    let alphabet = step_alphabet(orders);
    let mut out = Vec::new();
    let mut stack: Vec<(GroupWord, Option<Step>, usize)> = vec![(GroupWord::default(), None, 0)];
    while let Some((word, last, len)) = stack.pop() {
        if len < depth {
            // Reverse push so that children come off the stack in alphabet order.
            for step in alphabet.iter().rev() {
                if may_follow(last.as_ref(), step) {
                    let mut w = word.clone();
                    w.push_step(*step);
                    stack.push((w, Some(*step), len + 1));
                }
            }
        }
        if len > 0 {
            out.push(word);
        }
    }
    out
}

/// Points approximating the limit set, plus the parameters used.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitSetCloud {
    pub points: Vec<Complex64>,
    pub rho: Complex64,
    pub orders: ConeOrders,
    pub depth: usize,
    pub epsilon: f64,
    pub truncated: bool,
}

fn push_distinct(seeds: &mut Vec<SpherePoint>, p: SpherePoint) {
    if seeds.iter().all(|s| s.chordal_distance(p) > SEED_MERGE_TOL) {
        seeds.push(p);
    }
}

/// Fixed points of the generators, topped up with those of `XY` when fewer
/// than three are distinct.
pub fn seed_points(rho: Complex64, orders: ConeOrders) -> Vec<SpherePoint> {
    let (x, y) = generator_pair(rho, orders);
    let mut seeds = Vec::new();
    for m in [x, y] {
        for p in m.fixed_points().unwrap_or_default() {
            push_distinct(&mut seeds, p);
        }
    }
    if seeds.len() < 3 {
        for p in x.product(&y).fixed_points().unwrap_or_default() {
            push_distinct(&mut seeds, p);
        }
    }
    seeds
}

fn diameter(points: &[SpherePoint]) -> f64 {
    let mut d = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max(a.chordal_distance(*b));
        }
    }
    d
}

struct Search<'a> {
    seeds: &'a [SpherePoint],
    gens: Vec<(Step, MoebiusMap)>,
    depth: usize,
    epsilon: f64,
    cap: usize,
}

impl Search<'_> {
    fn emit(&self, m: &MoebiusMap, out: &mut Vec<Complex64>) {
        for s in self.seeds {
            if out.len() >= self.cap {
                return;
            }
            if let SpherePoint::Finite(z) = m.apply(*s) {
                if z.is_finite() {
                    out.push(z);
                }
            }
        }
    }

    /// Explores the subtree below `m`, reached by `len` steps ending in `last`.
    fn run(&self, m: MoebiusMap, last: Step, len: usize, out: &mut Vec<Complex64>) {
        let mut stack = vec![(m, last, len)];
        while let Some((m, last, len)) = stack.pop() {
            if out.len() >= self.cap {
                return;
            }
            let images: Vec<SpherePoint> = self.seeds.iter().map(|s| m.apply(*s)).collect();
            if len >= self.depth || diameter(&images) < self.epsilon {
                self.emit(&m, out);
                continue;
            }
            for (step, g) in self.gens.iter().rev() {
                if may_follow(Some(&last), step) {
                    stack.push((m.product(g), *step, len + 1));
                }
            }
        }
    }
}

/// Depth-first limit-set approximation. Branches are emitted once the seed
/// images have chordal diameter below `epsilon` or at `depth`.
pub fn limit_set(pt: SlicePoint, depth: usize, epsilon: f64, cap: usize) -> Result<LimitSetCloud> {
    if !(epsilon > 0.0) {
        return Err(Error::Validation(format!("epsilon must be positive, got {epsilon}")));
    }
    if depth > MAX_DEPTH {
        return Err(Error::Validation(format!("depth {depth} exceeds {MAX_DEPTH}")));
    }
    if !pt.rho.is_finite() {
        return Err(Error::Validation("rho must be finite".into()));
    }
    let seeds = seed_points(pt.rho, pt.orders);
    let (x, y) = generator_pair(pt.rho, pt.orders);
    let power = |g: &MoebiusMap, e: i32| {
        let base = if e > 0 { *g } else { g.inverse() };
        (0..e.unsigned_abs()).fold(MoebiusMap::identity(), |m, _| m.product(&base))
    };
    let gens: Vec<(Step, MoebiusMap)> = step_alphabet(pt.orders)
        .into_iter()
        .map(|s| {
            let g = match s.generator {
                Generator::X => &x,
                Generator::Y => &y,
            };
            (s, power(g, s.exponent))
        })
        .collect();
    let search = Search {
        seeds: &seeds,
        gens,
        depth,
        epsilon,
        cap,
    };

    let mut points = Vec::new();
    search.emit(&MoebiusMap::identity(), &mut points);
    if depth > 0 {
        let parts: Vec<Vec<Complex64>> = search
            .gens
            .par_iter()
            .map(|(step, g)| {
                let mut out = Vec::new();
                search.run(*g, *step, 1, &mut out);
                out
            })
            .collect();
        for part in parts {
            points.extend(part);
        }
    }
    let truncated = points.len() >= cap;
    points.truncate(cap);
    Ok(LimitSetCloud {
        points,
        rho: pt.rho,
        orders: pt.orders,
        depth,
        epsilon,
        truncated,
    })
}

/// Hit counts per pixel, log-scaled to grey levels.
pub fn rasterize(cloud: &LimitSetCloud, viewport: Viewport, width: usize, height: usize) -> Result<Raster> {
    let mut raster = Raster::new(width, height)?;
    let mut counts = vec![0u32; width * height];
    for z in &cloud.points {
        if let Some((x, y)) = viewport.pixel(*z, width, height) {
            counts[y * width + x] += 1;
        }
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Ok(raster);
    }
    let scale = 255.0 / (1.0 + max as f64).ln();
    for (i, &c) in counts.iter().enumerate() {
        if c > 0 {
            let v = ((1.0 + c as f64).ln() * scale).round().clamp(1.0, 255.0) as u8;
            raster.set(i % width, i / width, [v, v, v]);
        }
    }
    Ok(raster)
}
