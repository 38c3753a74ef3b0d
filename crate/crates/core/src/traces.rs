//! Farey trace polynomials `p_{p/q}(ρ) = tr W_{p/q}(X, Y_ρ)`.
//!
//! The direct construction multiplies the generator matrices over the
//! polynomial ring in `ρ`. The recursive construction uses Farey parents
//! `l`, `r` of `m = l ⊕ r` and their difference slope `d`:
//!
//! ```text
//! p_m = κ − p_l · p_r − p_d
//! κ   = 2·trX·trY        if q_m is odd
//!     = trX² + trY²      if q_m is even
//! ```
//!
//! seeded with `p_{0/1}`, `p_{1/1}` and the apex `p_{1/0}`. The seeds and
//! both constants are checked against the direct product before use.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::farey::{farey_neighbors, farey_word, Generator, Letter, Slope};
use crate::moebius::{generator_pair, ConeOrders, MoebiusMap, ENTRY_LIMIT};
use crate::numeric::{bigint_to_f64, exact_eval, horner_dd, ComplexDd, DoubleDouble};

mod roots;

pub use roots::{poly_roots, RootOptions};

/// Largest denominator accepted by the symbolic constructions.
pub const MAX_DENOMINATOR: u32 = 2000;

/// Relative tolerance between recursive and direct float coefficients.
pub const RECURSION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    /// Integer coefficients, used for the parabolic slice.
    Exact(Vec<BigInt>),
    Float(Vec<Complex64>),
}

/// A Farey polynomial with dense ascending coefficients.
#[derive(Clone, Debug)]
pub struct TracePolynomial {
    slope: Slope,
    orders: ConeOrders,
    coefficients: Coefficients,
    float: Vec<Complex64>,
    dd: Vec<ComplexDd>,
}

impl PartialEq for TracePolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.slope == other.slope
            && self.orders == other.orders
            && self.coefficients == other.coefficients
    }
}

impl TracePolynomial {
    pub fn from_exact(slope: Slope, orders: ConeOrders, coeffs: Vec<BigInt>) -> Self {
        let float = coeffs
            .iter()
            .map(|c| Complex64::new(bigint_to_f64(c), 0.0))
            .collect();
        let dd = coeffs
            .iter()
            .map(|c| ComplexDd::from_parts(DoubleDouble::from_bigint(c), DoubleDouble::default()))
            .collect();
        Self {
            slope,
            orders,
            coefficients: Coefficients::Exact(coeffs),
            float,
            dd,
        }
    }

    pub fn from_float(slope: Slope, orders: ConeOrders, coeffs: Vec<Complex64>) -> Self {
        let dd = coeffs
            .iter()
            .map(|c| {
                ComplexDd::from_parts(
                    DoubleDouble::new(c.re, 0.0),
                    DoubleDouble::new(c.im, 0.0),
                )
            })
            .collect();
        Self {
            slope,
            orders,
            float: coeffs.clone(),
            coefficients: Coefficients::Float(coeffs),
            dd,
        }
    }

    /// Convenience constructor for hand-written integer polynomials.
    pub fn from_integers(slope: Slope, orders: ConeOrders, coeffs: &[i64]) -> Self {
        Self::from_exact(slope, orders, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn slope(&self) -> Slope {
        self.slope
    }

    pub fn orders(&self) -> ConeOrders {
        self.orders
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    pub fn exact_coefficients(&self) -> Option<&[BigInt]> {
        match &self.coefficients {
            Coefficients::Exact(c) => Some(c),
            Coefficients::Float(_) => None,
        }
    }

    /// Coefficients rounded to f64.
    pub fn float_coefficients(&self) -> &[Complex64] {
        &self.float
    }

    pub fn degree(&self) -> usize {
        self.float.len().saturating_sub(1)
    }

    pub fn leading_coefficient(&self) -> Complex64 {
        self.float.last().copied().unwrap_or_default()
    }

    /// `Σ |c_k|`.
    pub fn coefficient_l1(&self) -> f64 {
        self.float.iter().map(|c| c.norm()).sum()
    }

    /// Horner evaluation of value and first derivative.
    pub fn eval(&self, rho: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::zero();
        let mut deriv = Complex64::zero();
        for c in self.float.iter().rev() {
            deriv = deriv * rho + value;
            value = value * rho + c;
        }
        (value, deriv)
    }

    /// Value and derivative with cancellation under control: exact for
    /// integer coefficients, double-double otherwise.
    pub fn eval_accurate(&self, rho: Complex64) -> (Complex64, Complex64) {
        match &self.coefficients {
            Coefficients::Exact(c) => exact_eval(c, rho),
            Coefficients::Float(_) => {
                let (v, d, _) = horner_dd(&self.dd, rho);
                (v, d)
            }
        }
    }

    pub(crate) fn dd_coefficients(&self) -> &[ComplexDd] {
        &self.dd
    }

    /// Largest coefficient difference relative to the largest coefficient.
    pub fn relative_distance(&self, other: &TracePolynomial) -> f64 {
        if let (Coefficients::Exact(a), Coefficients::Exact(b)) =
            (&self.coefficients, &other.coefficients)
        {
            if a == b {
                return 0.0;
            }
        }
        let n = self.float.len().max(other.float.len());
        let get = |v: &[Complex64], k: usize| v.get(k).copied().unwrap_or_default();
        let scale = self
            .float
            .iter()
            .chain(other.float.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        (0..n)
            .map(|k| (get(&self.float, k) - get(&other.float, k)).norm())
            .fold(0.0, f64::max)
            / scale
    }
}

/// `(value, derivative)` of a trace polynomial at `rho`.
pub fn poly_eval(p: &TracePolynomial, rho: Complex64) -> (Complex64, Complex64) {
    p.eval(rho)
}

/// Left-to-right product of generator matrices.
pub fn word_matrix(letters: &[Letter], rho: Complex64, orders: ConeOrders) -> Result<MoebiusMap> {
    let (x, y) = generator_pair(rho, orders);
    let (xi, yi) = (x.inverse(), y.inverse());
    let mut m = MoebiusMap::identity();
    for l in letters {
        let g = match (l.generator, l.exponent > 0) {
            (Generator::X, true) => &x,
            (Generator::X, false) => &xi,
            (Generator::Y, true) => &y,
            (Generator::Y, false) => &yi,
        };
        m = m.product(g);
        let size = m.max_entry_norm();
        if !size.is_finite() || size > ENTRY_LIMIT {
            return Err(Error::NumericRange(format!(
                "word product entry {size:e} at |rho| = {:e}",
                rho.norm()
            )));
        }
    }
    // The generators lie in SL(2,C) exactly. Dividing by the computed
    // determinant would only inject its cancellation error.
    Ok(m)
}

/// Trace of a fixed word as a function of `ρ`, evaluated through the
/// matrix product. Numerically stable where expanded coefficients are not.
#[derive(Clone, Debug)]
pub struct WordTrace {
    letters: Vec<Letter>,
    orders: ConeOrders,
}

impl WordTrace {
    pub fn new(letters: Vec<Letter>, orders: ConeOrders) -> Self {
        Self { letters, orders }
    }

    pub fn for_slope(slope: Slope, orders: ConeOrders) -> Result<Self> {
        Ok(Self::new(farey_word(slope)?.letters, orders))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Trace and its derivative in `ρ`.
    pub fn eval(&self, rho: Complex64) -> (Complex64, Complex64) {
        let (x, y) = generator_pair(rho, self.orders);
        let (xi, yi) = (x.inverse(), y.inverse());
        let zero = Complex64::zero();
        let mut m = MoebiusMap::identity();
        // dm tracks ∂m/∂ρ; only the lower-left entry of Y^{±1} depends on ρ.
        let mut dm = MoebiusMap::from_sl2(zero, zero, zero, zero);
        for l in &self.letters {
            let (g, dg_c) = match (l.generator, l.exponent > 0) {
                (Generator::X, true) => (&x, zero),
                (Generator::X, false) => (&xi, zero),
                (Generator::Y, true) => (&y, Complex64::one()),
                (Generator::Y, false) => (&yi, -Complex64::one()),
            };
            let mut next_dm = dm.product(g);
            next_dm.a += m.b * dg_c;
            next_dm.c += m.d * dg_c;
            dm = next_dm;
            m = m.product(g);
        }
        (m.trace(), dm.trace())
    }
}

trait Ring:
    Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

fn poly_add<T: Ring>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_else(T::zero);
            let y = b.get(k).cloned().unwrap_or_else(T::zero);
            x + y
        })
        .collect()
}

fn poly_neg<T: Ring>(a: &[T]) -> Vec<T> {
    a.iter().cloned().map(|x| -x).collect()
}

fn poly_mul<T: Ring>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

type PolyMat<T> = [[Vec<T>; 2]; 2];

fn mat_mul<T: Ring>(m: &PolyMat<T>, g: &PolyMat<T>) -> PolyMat<T> {
    let entry = |i: usize, j: usize| poly_add(&poly_mul(&m[i][0], &g[0][j]), &poly_mul(&m[i][1], &g[1][j]));
    [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]]
}

/// Generator matrices over `T[ρ]`, indexed `[X, X⁻¹, Y, Y⁻¹]`.
struct SymbolicGenerators<T> {
    mats: [PolyMat<T>; 4],
}

impl<T: Ring> SymbolicGenerators<T> {
    fn new(alpha: T, alpha_inv: T, beta: T, beta_inv: T) -> Self {
        let o = || vec![T::zero()];
        let one = || vec![T::one()];
        let c = |x: &T| vec![x.clone()];
        let rho = |sign: T| vec![T::zero(), sign];
        Self {
            mats: [
                [[c(&alpha), one()], [o(), c(&alpha_inv)]],
                [[c(&alpha_inv), vec![-T::one()]], [o(), c(&alpha)]],
                [[c(&beta), o()], [rho(T::one()), c(&beta_inv)]],
                [[c(&beta_inv), o()], [rho(-T::one()), c(&beta)]],
            ],
        }
    }

    fn trace(&self, letters: &[Letter]) -> Vec<T> {
        let mut m: PolyMat<T> = [
            [vec![T::one()], vec![T::zero()]],
            [vec![T::zero()], vec![T::one()]],
        ];
        for l in letters {
            let idx = match (l.generator, l.exponent > 0) {
                (Generator::X, true) => 0,
                (Generator::X, false) => 1,
                (Generator::Y, true) => 2,
                (Generator::Y, false) => 3,
            };
            m = mat_mul(&m, &self.mats[idx]);
        }
        let mut t = poly_add(&m[0][0], &m[1][1]);
        while t.len() > 1 && t.last().is_some_and(|c| c.is_zero()) {
            t.pop();
        }
        t
    }
}

fn exact_generators() -> SymbolicGenerators<BigInt> {
    SymbolicGenerators::new(BigInt::one(), BigInt::one(), BigInt::one(), BigInt::one())
}

fn float_generators(orders: ConeOrders) -> SymbolicGenerators<Complex64> {
    let alpha = Complex64::from_polar(1.0, orders.a.half_angle());
    let beta = Complex64::from_polar(1.0, orders.b.half_angle());
    SymbolicGenerators::new(alpha, alpha.conj(), beta, beta.conj())
}

fn check_slope(s: Slope) -> Result<()> {
    if s.is_apex() {
        return Err(Error::Validation("the apex 1/0 has no Farey polynomial here".into()));
    }
    if s.q() > MAX_DENOMINATOR {
        return Err(Error::Validation(format!(
            "denominator {} exceeds the supported maximum {MAX_DENOMINATOR}",
            s.q()
        )));
    }
    Ok(())
}

/// `p_s` as the trace of the symbolic matrix product.
pub fn farey_polynomial_direct(s: Slope, orders: ConeOrders) -> Result<TracePolynomial> {
    check_slope(s)?;
    let word = farey_word(s)?;
    Ok(if orders.is_parabolic() {
        TracePolynomial::from_exact(s, orders, exact_generators().trace(&word.letters))
    } else {
        TracePolynomial::from_float(s, orders, float_generators(orders).trace(&word.letters))
    })
}

/// `|r − l|` for Farey parents `l < r`.
fn difference_slope(l: Slope, r: Slope) -> Slope {
    Slope::new(
        (r.p() as i64 - l.p() as i64).abs(),
        (r.q() as i64 - l.q() as i64).abs(),
    )
    .expect("Farey parents differ by a reduced slope")
}

struct Recurrence<T> {
    kappa_odd: T,
    kappa_even: T,
    table: HashMap<Slope, Vec<T>>,
}

impl<T: Ring> Recurrence<T> {
    fn get(&mut self, s: Slope) -> Vec<T> {
        let mut stack = vec![s];
        while let Some(&top) = stack.last() {
            if self.table.contains_key(&top) {
                stack.pop();
                continue;
            }
            let (l, r) = farey_neighbors(top).expect("seeds cover every slope with q < 2");
            let d = difference_slope(l, r);
            let missing: Vec<Slope> = [l, r, d]
                .into_iter()
                .filter(|x| !self.table.contains_key(x))
                .collect();
            if !missing.is_empty() {
                stack.extend(missing);
                continue;
            }
            let kappa = if top.q() % 2 == 0 {
                &self.kappa_even
            } else {
                &self.kappa_odd
            };
            let product = poly_mul(&self.table[&l], &self.table[&r]);
            let value = poly_add(
                &poly_add(&[kappa.clone()], &poly_neg(&product)),
                &poly_neg(&self.table[&d]),
            );
            self.table.insert(top, value);
            stack.pop();
        }
        self.table[&s].clone()
    }
}

/// Slopes whose recursive value is compared with the direct product
/// during calibration; they exercise both parities of `κ`.
const CALIBRATION_SLOPES: [(i64, i64); 5] = [(1, 3), (2, 3), (1, 4), (3, 4), (2, 5)];

fn calibrate<T: Ring>(
    direct: impl Fn(Slope) -> Result<Vec<T>>,
    kappa_odd: T,
    kappa_even: T,
    same: impl Fn(&[T], &[T]) -> bool,
    negligible: impl Fn(&T) -> bool,
) -> Result<Recurrence<T>> {
    let p0 = direct(Slope::ZERO)?;
    let p1 = direct(Slope::ONE)?;
    let half = direct(Slope::new(1, 2)?)?;
    // p_{1/2} = κ_even − p_{0/1} p_{1/1} − p_{1/0} fixes the apex seed.
    let apex = poly_add(
        &poly_add(&[kappa_even.clone()], &poly_neg(&poly_mul(&p0, &p1))),
        &poly_neg(&half),
    );
    if apex.iter().skip(1).any(|c| !negligible(c)) {
        return Err(Error::Consistency(
            "apex seed p_{1/0} is not constant".into(),
        ));
    }
    let mut rec = Recurrence {
        kappa_odd,
        kappa_even,
        table: HashMap::from([
            (Slope::ZERO, p0),
            (Slope::ONE, p1),
            (Slope::APEX, vec![apex[0].clone()]),
        ]),
    };
    for (p, q) in CALIBRATION_SLOPES {
        let s = Slope::new(p, q)?;
        let expected = direct(s)?;
        let got = rec.get(s);
        if !same(&got, &expected) {
            return Err(Error::Consistency(format!("recursion disagrees at {s}")));
        }
    }
    Ok(rec)
}

fn float_close(a: &[Complex64], b: &[Complex64]) -> bool {
    let n = a.len().max(b.len());
    let get = |v: &[Complex64], k: usize| v.get(k).copied().unwrap_or_default();
    let scale = a.iter().chain(b).map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    (0..n).all(|k| (get(a, k) - get(b, k)).norm() <= RECURSION_TOL * scale)
}

fn trim_float(mut v: Vec<Complex64>, degree: usize) -> Vec<Complex64> {
    v.truncate(degree + 1);
    v
}

enum TableKind {
    Exact(Recurrence<BigInt>),
    Float(Recurrence<Complex64>),
}

/// Calibrated recursion with a cache of every polynomial computed so far.
pub struct FareyTable {
    orders: ConeOrders,
    kind: TableKind,
}

impl FareyTable {
    pub fn new(orders: ConeOrders) -> Result<Self> {
        let kind = if orders.is_parabolic() {
            let gens = exact_generators();
            TableKind::Exact(calibrate(
                |s| Ok(gens.trace(&farey_word(s)?.letters)),
                BigInt::from(8),
                BigInt::from(8),
                |a, b| a == b,
                |c| c.is_zero(),
            )?)
        } else {
            let gens = float_generators(orders);
            let tx = orders.a.generator_trace();
            let ty = orders.b.generator_trace();
            TableKind::Float(calibrate(
                |s| Ok(gens.trace(&farey_word(s)?.letters)),
                Complex64::new(2.0 * tx * ty, 0.0),
                Complex64::new(tx * tx + ty * ty, 0.0),
                float_close,
                |c| c.norm() <= 1e-12,
            )?)
        };
        Ok(Self { orders, kind })
    }

    pub fn orders(&self) -> ConeOrders {
        self.orders
    }

    pub fn polynomial(&mut self, s: Slope) -> Result<TracePolynomial> {
        check_slope(s)?;
        let degree = s.q() as usize;
        Ok(match &mut self.kind {
            TableKind::Exact(rec) => TracePolynomial::from_exact(s, self.orders, rec.get(s)),
            TableKind::Float(rec) => {
                TracePolynomial::from_float(s, self.orders, trim_float(rec.get(s), degree))
            }
        })
    }
}

/// `p_s` from the calibrated three-neighbour recursion.
pub fn farey_polynomial_recursive(s: Slope, orders: ConeOrders) -> Result<TracePolynomial> {
    FareyTable::new(orders)?.polynomial(s)
}
