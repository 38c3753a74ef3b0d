//! Möbius maps as determinant-one 2×2 complex matrices.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};

/// Entries beyond this magnitude are treated as overflow.
pub const ENTRY_LIMIT: f64 = 1e150;

/// Default tolerance on `tr²` used by [`MoebiusMap::classify`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

const ELLIPTIC_ORDER_SEARCH: u32 = 1000;
const ELLIPTIC_ORDER_TOL: f64 = 1e-6;

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// Chordal distance on the unit-diameter-2 sphere; bounded by 2.
    pub fn chordal_distance(self, other: SpherePoint) -> f64 {
        match (self, other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            (SpherePoint::Finite(z), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(z)) => {
                if !z.is_finite() {
                    return 0.0;
                }
                2.0 / (1.0 + z.norm_sqr()).sqrt()
            }
            (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
                match (z.is_finite(), w.is_finite()) {
                    (false, false) => 0.0,
                    (false, true) => SpherePoint::Infinity.chordal_distance(other),
                    (true, false) => self.chordal_distance(SpherePoint::Infinity),
                    (true, true) => {
                        2.0 * (z - w).norm()
                            / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
                    }
                }
            }
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::Finite(z)
    }
}

/// Conjugacy class of a Möbius map, read off from `tr²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapClass {
    Identity,
    Parabolic,
    /// Rotation of finite order `n` when one was detected.
    Elliptic(Option<u32>),
    Hyperbolic,
    StrictlyLoxodromic,
}

/// `z ↦ (az + b)/(cz + d)` with `ad − bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MoebiusMap {
    /// Builds a map from arbitrary entries, scaling by the principal square
    /// root of the determinant.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        Self { a, b, c, d }.normalized()
    }

    /// Entries are taken as given; the caller guarantees `ad − bc = 1`.
    pub const fn from_sl2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::from_sl2(one, zero, zero, one)
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn max_entry_norm(&self) -> f64 {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    fn check_range(&self) -> Result<()> {
        let m = self.max_entry_norm();
        if !m.is_finite() || m > ENTRY_LIMIT {
            return Err(Error::NumericRange(format!(
                "matrix entry of magnitude {m:e} exceeds {ENTRY_LIMIT:e}"
            )));
        }
        Ok(())
    }

    fn normalized(self) -> Result<Self> {
        self.check_range()?;
        let det = self.determinant();
        if det.norm() == 0.0 || !det.is_finite() {
            return Err(Error::Validation("singular matrix (ad - bc = 0)".into()));
        }
        if det == Complex64::new(1.0, 0.0) {
            return Ok(self);
        }
        let s = det.sqrt();
        Ok(Self::from_sl2(self.a / s, self.b / s, self.c / s, self.d / s))
    }

    /// Plain matrix product without renormalization or range checks.
    pub(crate) fn product(&self, g: &MoebiusMap) -> MoebiusMap {
        MoebiusMap::from_sl2(
            self.a * g.a + self.b * g.c,
            self.a * g.b + self.b * g.d,
            self.c * g.a + self.d * g.c,
            self.c * g.b + self.d * g.d,
        )
    }

    /// `self ∘ g`, renormalized to determinant one.
    pub fn compose(&self, g: &MoebiusMap) -> Result<MoebiusMap> {
        self.product(g).normalized()
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap::from_sl2(self.d, -self.b, -self.c, self.a)
    }

    pub fn conjugate_by(&self, t: &MoebiusMap) -> Result<MoebiusMap> {
        t.compose(self)?.compose(&t.inverse())
    }

    pub fn apply(&self, z: SpherePoint) -> SpherePoint {
        match z {
            SpherePoint::Infinity => {
                if self.c == Complex64::new(0.0, 0.0) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.a / self.c)
                }
            }
            SpherePoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den == Complex64::new(0.0, 0.0) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let one = Complex64::new(1.0, 0.0);
        self.b.norm() <= tol
            && self.c.norm() <= tol
            && (self.a - self.d).norm() <= tol
            && ((self.a - one).norm() <= tol || (self.a + one).norm() <= tol)
    }

    /// Classifies by `tr²`: 4 is parabolic, `[0, 4)` elliptic, `(4, ∞)`
    /// hyperbolic, anything else strictly loxodromic. Values within `tol`
    /// of 0 or 4 go to the closed class.
    pub fn classify(&self, tol: f64) -> MapClass {
        if self.is_identity(tol) {
            return MapClass::Identity;
        }
        let t2 = self.trace() * self.trace();
        if (t2 - 4.0).norm() <= tol {
            return MapClass::Parabolic;
        }
        if t2.im.abs() <= tol {
            if t2.re >= -tol && t2.re < 4.0 {
                return MapClass::Elliptic(elliptic_order(t2.re.max(0.0)));
            }
            if t2.re > 4.0 {
                return MapClass::Hyperbolic;
            }
        }
        MapClass::StrictlyLoxodromic
    }

    /// Fixed points on the sphere: one for parabolic maps, two otherwise.
    pub fn fixed_points(&self) -> Result<Vec<SpherePoint>> {
        let class = self.classify(DEFAULT_CLASSIFY_TOL);
        if class == MapClass::Identity {
            return Err(Error::IdentityFixedPoints);
        }
        let zero = Complex64::new(0.0, 0.0);
        // Fixed points solve c z² + (d − a) z − b = 0.
        let lin = self.d - self.a;
        if class == MapClass::Parabolic {
            if self.c == zero {
                return Ok(vec![SpherePoint::Infinity]);
            }
            return Ok(vec![SpherePoint::Finite((self.a - self.d) / (2.0 * self.c))]);
        }
        let disc = (self.trace() * self.trace() - 4.0).sqrt();
        let plus = lin + disc;
        let minus = lin - disc;
        let big = if plus.norm() >= minus.norm() { plus } else { minus };
        let half = -0.5 * big;
        let first = if self.c == zero {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(half / self.c)
        };
        let second = if half == zero {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(-self.b / half)
        };
        Ok(vec![first, second])
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

fn elliptic_order(t2: f64) -> Option<u32> {
    let half_trace = (t2.sqrt() / 2.0).clamp(0.0, 1.0);
    let ratio = half_trace.acos() / PI;
    (2..=ELLIPTIC_ORDER_SEARCH).find(|&n| {
        let k = (ratio * n as f64).round() as u32;
        if k == 0 || k.gcd(&n) != 1 {
            return false;
        }
        let c = (k as f64 * PI / n as f64).cos();
        (4.0 * c * c - t2).abs() <= ELLIPTIC_ORDER_TOL
    })
}

/// `|tr²A − 4| + |tr[A, B] − 2|`; below 1 the pair cannot generate a
/// discrete non-elementary group.
pub fn jorgensen_value(a: &MoebiusMap, b: &MoebiusMap) -> f64 {
    let ta = a.trace();
    let commutator = a.product(b).product(&a.inverse()).product(&b.inverse());
    (ta * ta - 4.0).norm() + (commutator.trace() - 2.0).norm()
}

/// Order of a cone point: a finite rotation order or a cusp.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    /// `π/n`, with `π/∞ = 0`.
    pub fn half_angle(self) -> f64 {
        match self {
            Order::Finite(n) => PI / n as f64,
            Order::Infinite => 0.0,
        }
    }

    /// Trace of the generator of this order, `2cos(π/n)`.
    pub fn generator_trace(self) -> f64 {
        2.0 * self.half_angle().cos()
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Order::Finite(_))
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(Order::Infinite);
        }
        let n: u32 = s
            .parse()
            .map_err(|_| Error::Validation(format!("bad cone order `{s}`")))?;
        if n < 2 {
            return Err(Error::Validation(format!("cone order must be >= 2, got {n}")));
        }
        Ok(Order::Finite(n))
    }
}

/// Cone orders `(a, b)` of the two generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConeOrders {
    pub a: Order,
    pub b: Order,
}

impl ConeOrders {
    pub const PARABOLIC: ConeOrders = ConeOrders {
        a: Order::Infinite,
        b: Order::Infinite,
    };

    /// Finite orders must be at least 2. `(2, 2)` is accepted but flagged by
    /// [`ConeOrders::is_degenerate`].
    pub fn new(a: Order, b: Order) -> Result<Self> {
        for o in [a, b] {
            if let Order::Finite(n) = o {
                if n < 2 {
                    return Err(Error::Validation(format!("cone order must be >= 2, got {n}")));
                }
            }
        }
        Ok(Self { a, b })
    }

    pub fn finite(a: u32, b: u32) -> Result<Self> {
        Self::new(Order::Finite(a), Order::Finite(b))
    }

    /// Two involutions generate a virtually abelian group; the slice
    /// collapses to an interval.
    pub fn is_degenerate(&self) -> bool {
        self.a == Order::Finite(2) && self.b == Order::Finite(2)
    }

    pub fn is_parabolic(&self) -> bool {
        *self == Self::PARABOLIC
    }

    pub fn is_symmetric(&self) -> bool {
        self.a == self.b
    }
}

impl Default for ConeOrders {
    fn default() -> Self {
        Self::PARABOLIC
    }
}

impl fmt::Display for ConeOrders {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.a, self.b)
    }
}

impl FromStr for ConeOrders {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Validation(format!("orders must look like `a,b`, got `{s}`")))?;
        ConeOrders::new(a.parse()?, b.parse()?)
    }
}

/// `X = [[e^{iπ/a}, 1], [0, e^{−iπ/a}]]`, `Y = [[e^{iπ/b}, 0], [ρ, e^{−iπ/b}]]`.
pub fn generator_pair(rho: Complex64, orders: ConeOrders) -> (MoebiusMap, MoebiusMap) {
    let alpha = Complex64::from_polar(1.0, orders.a.half_angle());
    let beta = Complex64::from_polar(1.0, orders.b.half_angle());
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    (
        MoebiusMap::from_sl2(alpha, one, zero, alpha.conj()),
        MoebiusMap::from_sl2(beta, zero, rho, beta.conj()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(m: &MoebiusMap, n: &MoebiusMap, tol: f64) -> bool {
        (m.a - n.a).norm() <= tol
            && (m.b - n.b).norm() <= tol
            && (m.c - n.c).norm() <= tol
            && (m.d - n.d).norm() <= tol
    }

    fn translation() -> MoebiusMap {
        MoebiusMap::from_real(1.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn compose_examples() {
        let t = translation();
        let y = MoebiusMap::from_real(1.0, 0.0, 2.0, 1.0).unwrap();
        assert_eq!(MoebiusMap::identity().compose(&t).unwrap(), t);
        let p = t.compose(&y).unwrap();
        assert!(close(&p, &MoebiusMap::from_real(3.0, 1.0, 2.0, 1.0).unwrap(), 1e-15));
        let m = MoebiusMap::new(c(1.0, 2.0), c(0.5, 0.0), c(-1.0, 1.0), c(3.0, 0.0)).unwrap();
        assert!(m.compose(&m.inverse()).unwrap().is_identity(1e-12));
    }

    #[test]
    fn compose_overflow_is_range_error() {
        let big = MoebiusMap::from_sl2(c(1e100, 0.0), c(1e100, 0.0), c(0.0, 0.0), c(1e-100, 0.0));
        assert!(matches!(big.compose(&big), Err(Error::NumericRange(_))));
    }

    #[test]
    fn new_normalizes_determinant() {
        let m = MoebiusMap::from_real(2.0, 0.0, 0.0, 2.0).unwrap();
        assert!((m.determinant() - 1.0).norm() < 1e-15);
        assert!(matches!(
            MoebiusMap::from_real(1.0, 2.0, 2.0, 4.0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn inverse_examples() {
        let t = translation();
        assert_eq!(t.inverse(), MoebiusMap::from_real(1.0, -1.0, 0.0, 1.0).unwrap());
        let y = MoebiusMap::from_sl2(c(1.0, 0.0), c(0.0, 0.0), c(0.3, 0.7), c(1.0, 0.0));
        assert_eq!(y.inverse().c, c(-0.3, -0.7));
        assert_eq!(y.inverse().inverse(), y);
    }

    #[test]
    fn apply_examples() {
        let t = translation();
        assert_eq!(t.apply(SpherePoint::Infinity), SpherePoint::Infinity);
        assert_eq!(t.apply(c(3.0, 0.0).into()), SpherePoint::Finite(c(4.0, 0.0)));
        let j = MoebiusMap::from_real(0.0, 1.0, -1.0, 0.0).unwrap();
        assert_eq!(j.apply(c(0.0, 0.0).into()), SpherePoint::Infinity);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(translation().classify(1e-9), MapClass::Parabolic);
        let j = MoebiusMap::from_real(0.0, 1.0, -1.0, 0.0).unwrap();
        assert_eq!(j.classify(1e-9), MapClass::Elliptic(Some(2)));
        let h = MoebiusMap::from_real(2.0, 0.0, 0.0, 0.5).unwrap();
        assert_eq!(h.classify(1e-9), MapClass::Hyperbolic);
        let l = MoebiusMap::new(c(2.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 1.0).inv()).unwrap();
        assert_eq!(l.classify(1e-9), MapClass::StrictlyLoxodromic);
        assert_eq!(MoebiusMap::identity().classify(1e-9), MapClass::Identity);
        let minus = MoebiusMap::from_real(-1.0, 0.0, 0.0, -1.0).unwrap();
        assert_eq!(minus.classify(1e-9), MapClass::Identity);
    }

    #[test]
    fn elliptic_generators_report_their_order() {
        for n in [3u32, 4, 5, 7, 12] {
            let orders = ConeOrders::new(Order::Finite(n), Order::Infinite).unwrap();
            let (x, _) = generator_pair(c(1.0, 1.0), orders);
            assert_eq!(x.classify(1e-9), MapClass::Elliptic(Some(n)));
        }
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(translation().fixed_points().unwrap(), vec![SpherePoint::Infinity]);
        let y = MoebiusMap::from_real(1.0, 0.0, 2.5, 1.0).unwrap();
        let fy = y.fixed_points().unwrap();
        assert_eq!(fy.len(), 1);
        assert!(fy[0].chordal_distance(c(0.0, 0.0).into()) < 1e-15);
        let h = MoebiusMap::from_real(2.0, 0.0, 0.0, 0.5).unwrap();
        let fh = h.fixed_points().unwrap();
        assert_eq!(fh.len(), 2);
        assert!(fh.contains(&SpherePoint::Infinity));
        assert!(fh.iter().any(|p| p.chordal_distance(c(0.0, 0.0).into()) < 1e-15));
        assert!(matches!(
            MoebiusMap::identity().fixed_points(),
            Err(Error::IdentityFixedPoints)
        ));
    }

    #[test]
    fn jorgensen_examples() {
        let (x, y) = generator_pair(c(0.5, 0.0), ConeOrders::PARABOLIC);
        assert!((jorgensen_value(&x, &y) - 0.25).abs() < 1e-12);
        let rho = c(1.3, -0.4);
        let (x, y) = generator_pair(rho, ConeOrders::PARABOLIC);
        assert!((jorgensen_value(&x, &y) - rho.norm_sqr()).abs() < 1e-12);
        let a = MoebiusMap::new(c(1.5, 0.2), c(0.3, 0.0), c(0.1, 0.1), c(1.0, 0.0)).unwrap();
        let t2 = a.trace() * a.trace();
        assert!((jorgensen_value(&a, &a) - (t2 - 4.0).norm()).abs() < 1e-12);
    }

    #[test]
    fn generator_pair_examples() {
        let rho = c(0.7, 1.1);
        let (x, y) = generator_pair(rho, ConeOrders::PARABOLIC);
        assert_eq!(x, translation());
        assert_eq!(y, MoebiusMap::from_sl2(c(1.0, 0.0), c(0.0, 0.0), rho, c(1.0, 0.0)));

        let (x, y) = generator_pair(rho, ConeOrders::finite(2, 3).unwrap());
        assert!((x.a - c(0.0, 1.0)).norm() < 1e-15 && (x.d - c(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(x.b, c(1.0, 0.0));
        let w = Complex64::from_polar(1.0, PI / 3.0);
        assert!((y.a - w).norm() < 1e-15 && (y.d - w.conj()).norm() < 1e-15);
        assert_eq!(y.c, rho);

        for n in 2..10 {
            let orders = ConeOrders::new(Order::Finite(n), Order::Infinite).unwrap();
            let (x, _) = generator_pair(rho, orders);
            assert!((x.trace() - 2.0 * (PI / n as f64).cos()).norm() < 1e-15);
        }
    }

    #[test]
    fn orders_parse() {
        assert_eq!("inf,inf".parse::<ConeOrders>().unwrap(), ConeOrders::PARABOLIC);
        let o: ConeOrders = "2,2".parse().unwrap();
        assert!(o.is_degenerate());
        assert!("1,3".parse::<ConeOrders>().is_err());
        assert!("3".parse::<ConeOrders>().is_err());
        assert_eq!(ConeOrders::finite(3, 4).unwrap().to_string(), "3,4");
    }

    fn arb_complex() -> impl Strategy<Value = Complex64> {
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| Complex64::new(re, im))
    }

    fn arb_map() -> impl Strategy<Value = MoebiusMap> {
        (arb_complex(), arb_complex(), arb_complex(), arb_complex())
            .prop_filter_map("singular", |(a, b, c, d)| {
                if (a * d - b * c).norm() < 1e-2 {
                    None
                } else {
                    MoebiusMap::new(a, b, c, d).ok()
                }
            })
    }

    proptest! {
        #[test]
        fn composition_keeps_unit_determinant(f in arb_map(), g in arb_map()) {
            let h = f.compose(&g).unwrap();
            prop_assert!((h.determinant() - 1.0).norm() <= 1e-12);
        }

        #[test]
        fn classification_is_conjugation_invariant(
            kind in 0usize..4,
            param in 0.2f64..1.4,
            t in arb_map(),
        ) {
            let f = match kind {
                0 => MoebiusMap::from_real(1.0, param, 0.0, 1.0).unwrap(),
                1 => MoebiusMap::new(
                    Complex64::from_polar(1.0, param),
                    c(0.0, 0.0),
                    c(0.0, 0.0),
                    Complex64::from_polar(1.0, -param),
                ).unwrap(),
                2 => MoebiusMap::from_real(1.0 + param, 0.0, 0.0, 1.0 / (1.0 + param)).unwrap(),
                _ => {
                    let l = Complex64::from_polar(1.0 + param, param);
                    MoebiusMap::new(l, c(0.0, 0.0), c(0.0, 0.0), l.inv()).unwrap()
                }
            };
            let g = f.conjugate_by(&t).unwrap();
            let tag = |m: MapClass| match m {
                MapClass::Elliptic(_) => MapClass::Elliptic(None),
                other => other,
            };
            prop_assert_eq!(tag(f.classify(1e-9)), tag(g.classify(1e-9)));
        }

        #[test]
        fn fixed_points_are_fixed(f in arb_map()) {
            prop_assume!(!f.is_identity(1e-6));
            for p in f.fixed_points().unwrap() {
                prop_assert!(f.apply(p).chordal_distance(p) <= 1e-9);
            }
        }

        #[test]
        fn composition_is_associative(f in arb_map(), g in arb_map(), h in arb_map()) {
            let left = f.compose(&g).unwrap().compose(&h).unwrap();
            let right = f.compose(&g.compose(&h).unwrap()).unwrap();
            let scale = 1.0 + left.max_entry_norm();
            prop_assert!(close(&left, &right, 1e-12 * scale) || close(&left, &MoebiusMap::from_sl2(-right.a, -right.b, -right.c, -right.d), 1e-12 * scale));
        }
    }
}
