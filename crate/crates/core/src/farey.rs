//! Slopes, the Farey/Stern–Brocot structure on `[0, 1]`, and Farey words.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use crate::error::{Error, Result};

/// A reduced slope `p/q` in `[0, 1]`, or the apex `1/0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slope {
    p: u32,
    q: u32,
}

impl Slope {
    pub const ZERO: Slope = Slope { p: 0, q: 1 };
    pub const ONE: Slope = Slope { p: 1, q: 1 };
    pub const APEX: Slope = Slope { p: 1, q: 0 };

    /// Reduces `p/q` and checks it lies in `[0, 1]` or is `1/0`.
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p == 0 && q == 0 {
            return Err(Error::Validation("0/0 is not a slope".into()));
        }
        let (mut p, mut q) = if q < 0 { (-p, -q) } else { (p, q) };
        let g = p.gcd(&q);
        p /= g;
        q /= g;
        if q == 0 {
            // ±1/0 are the same point of the extended line.
            return Ok(Self::APEX);
        }
        if p < 0 || p > q {
            return Err(Error::Validation(format!(
                "slope {p}/{q} lies outside [0, 1]; use the slice symmetries"
            )));
        }
        let (p, q) = (
            u32::try_from(p).map_err(|_| Error::Validation("slope numerator too large".into()))?,
            u32::try_from(q).map_err(|_| Error::Validation("slope denominator too large".into()))?,
        );
        Ok(Self { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn is_apex(&self) -> bool {
        self.q == 0
    }

    pub fn as_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// `(p + r)/(q + s)`; unreduced input pairs are reduced.
    pub fn mediant(&self, other: &Slope) -> Slope {
        Slope::new(
            self.p as i64 + other.p as i64,
            self.q as i64 + other.q as i64,
        )
        .expect("mediant of slopes in [0,1] ∪ {1/0} stays in range")
    }

    /// `p s − q r`.
    pub fn determinant(&self, other: &Slope) -> i64 {
        self.p as i64 * other.q as i64 - self.q as i64 * other.p as i64
    }

    /// `(q − p)/q`, the mirror under `ρ ↦ −ρ̄`.
    pub fn reflect(&self) -> Slope {
        if self.is_apex() {
            return *self;
        }
        Slope {
            p: self.q - self.p,
            q: self.q,
        }
    }
}

impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        // Cross-multiplication also places the apex 1/0 above everything.
        (self.p as u64 * other.q as u64).cmp(&(other.p as u64 * self.q as u64))
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Slope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Validation(format!("slope must look like `p/q`, got `{s}`"));
        let (p, q) = s.trim().split_once('/').ok_or_else(bad)?;
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        Slope::new(p, q)
    }
}

/// Farey parents `(left, right)` of `s`: `left < s < right`, mediant `s`,
/// determinant `±1`. Endpoints `0/1`, `1/1` and the apex have none.
pub fn farey_neighbors(s: Slope) -> Result<(Slope, Slope)> {
    if s.q < 2 {
        return Err(Error::Validation(format!("{s} has no Farey parents in [0, 1]")));
    }
    let (mut lo, mut hi) = (Slope::ZERO, Slope::ONE);
    loop {
        let m = Slope {
            p: lo.p + hi.p,
            q: lo.q + hi.q,
        };
        match s.cmp(&m) {
            Ordering::Equal => return Ok((lo, hi)),
            Ordering::Less => hi = m,
            Ordering::Greater => lo = m,
        }
    }
}

/// All reduced `p/q` with `0 ≤ p ≤ q ≤ max_q`, ascending.
pub fn farey_sequence(max_q: u32) -> Vec<Slope> {
    if max_q == 0 {
        return Vec::new();
    }
    let n = max_q as u64;
    let mut out = vec![Slope::ZERO];
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, n);
    while c <= n {
        out.push(Slope {
            p: c as u32,
            q: d as u32,
        });
        let k = (n + b) / d;
        let (na, nb) = (c, d);
        c = k * c - a;
        d = k * d - b;
        a = na;
        b = nb;
        if a == 1 && b == 1 {
            break;
        }
    }
    out
}

/// Slopes with `q ≤ max_q` in Stern–Brocot (breadth-first by depth) order,
/// starting from `0/1` and `1/1`.
pub fn stern_brocot_order(max_q: u32) -> Vec<Slope> {
    if max_q == 0 {
        return Vec::new();
    }
    let mut out = vec![Slope::ZERO, Slope::ONE];
    let mut frontier = vec![(Slope::ZERO, Slope::ONE)];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (lo, hi) in frontier {
            let m = Slope {
                p: lo.p + hi.p,
                q: lo.q + hi.q,
            };
            if m.q > max_q {
                continue;
            }
            out.push(m);
            next.push((lo, m));
            next.push((m, hi));
        }
        frontier = next;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    X,
    Y,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::X => f.write_str("X"),
            Generator::Y => f.write_str("Y"),
        }
    }
}

/// A generator raised to `±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: Generator,
    pub exponent: i8,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        Letter {
            exponent: -self.exponent,
            ..self
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 1 {
            write!(f, "{}", self.generator)
        } else {
            write!(f, "{}^-1", self.generator)
        }
    }
}

/// The Farey word of a slope: `2q` alternating letters starting with `Y`,
/// letter `i` carrying the exponent `(−1)^⌊ip/q⌋`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FareyWord {
    pub slope: Slope,
    pub letters: Vec<Letter>,
}

impl FareyWord {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Net exponent of `g` in the word.
    pub fn exponent_sum(&self, g: Generator) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.generator == g)
            .map(|l| l.exponent as i64)
            .sum()
    }

    pub fn inverse_letters(&self) -> Vec<Letter> {
        self.letters.iter().rev().map(|l| l.inverse()).collect()
    }

    /// Letters cyclically rotated left by `k`.
    pub fn rotated_letters(&self, k: usize) -> Vec<Letter> {
        let mut v = self.letters.clone();
        if !v.is_empty() {
            let k = k % v.len();
            v.rotate_left(k);
        }
        v
    }
}

impl fmt::Display for FareyWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

pub fn farey_word(s: Slope) -> Result<FareyWord> {
    if s.is_apex() {
        return Err(Error::Validation(
            "the apex 1/0 has no Farey word under this convention".into(),
        ));
    }
    let (p, q) = (s.p as u64, s.q as u64);
    let letters = (1..=2 * q)
        .map(|i| Letter {
            generator: if i % 2 == 1 { Generator::Y } else { Generator::X },
            exponent: if (i * p / q) % 2 == 0 { 1 } else { -1 },
        })
        .collect();
    Ok(FareyWord { slope: s, letters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sl(p: i64, q: i64) -> Slope {
        Slope::new(p, q).unwrap()
    }

    fn euler_phi(n: u32) -> u32 {
        (1..=n).filter(|k| k.gcd(&n) == 1).count() as u32
    }

    #[test]
    fn make_slope_examples() {
        assert_eq!(sl(2, 4), sl(1, 2));
        assert_eq!(sl(2, 4).to_string(), "1/2");
        assert!(sl(1, 0).is_apex());
        assert_eq!(sl(3, 5).to_string(), "3/5");
        assert_eq!(sl(-3, -5), sl(3, 5));
        assert!(Slope::new(0, 0).is_err());
        assert!(Slope::new(3, 2).is_err());
        assert!(Slope::new(-1, 2).is_err());
        assert_eq!("6/10".parse::<Slope>().unwrap(), sl(3, 5));
        assert!("x/2".parse::<Slope>().is_err());
    }

    #[test]
    fn neighbor_examples() {
        assert_eq!(farey_neighbors(sl(1, 2)).unwrap(), (sl(0, 1), sl(1, 1)));
        assert_eq!(farey_neighbors(sl(2, 5)).unwrap(), (sl(1, 3), sl(1, 2)));
        assert_eq!(farey_neighbors(sl(3, 5)).unwrap(), (sl(1, 2), sl(2, 3)));
        for s in [Slope::ZERO, Slope::ONE, Slope::APEX] {
            assert!(farey_neighbors(s).is_err());
        }
    }

    #[test]
    fn neighbors_exhaustive_to_200() {
        for q in 2..=200i64 {
            for p in 1..q {
                if p.gcd(&q) != 1 {
                    continue;
                }
                let s = sl(p, q);
                let (l, r) = farey_neighbors(s).unwrap();
                assert!(l < s && s < r);
                assert_eq!(l.mediant(&r), s);
                assert_eq!(l.determinant(&r).abs(), 1);
            }
        }
    }

    #[test]
    fn sequence_examples() {
        assert_eq!(farey_sequence(2), vec![sl(0, 1), sl(1, 2), sl(1, 1)]);
        assert_eq!(
            farey_sequence(3),
            vec![sl(0, 1), sl(1, 3), sl(1, 2), sl(2, 3), sl(1, 1)]
        );
        assert_eq!(farey_sequence(1), vec![sl(0, 1), sl(1, 1)]);
        assert!(farey_sequence(0).is_empty());
        for n in 1..=60 {
            let expected = 1 + (1..=n).map(euler_phi).sum::<u32>();
            let seq = farey_sequence(n);
            assert_eq!(seq.len() as u32, expected, "Q = {n}");
            assert!(seq.windows(2).all(|w| w[0] < w[1]));
            for s in &seq {
                assert!(seq.binary_search(&s.reflect()).is_ok());
            }
        }
        assert_eq!(farey_sequence(5).len(), 11);
    }

    #[test]
    fn stern_brocot_order_covers_farey_sequence() {
        let mut sb = stern_brocot_order(9);
        assert_eq!(&sb[..3], &[sl(0, 1), sl(1, 1), sl(1, 2)]);
        sb.sort();
        assert_eq!(sb, farey_sequence(9));
    }

    #[test]
    fn word_examples() {
        assert_eq!(farey_word(sl(0, 1)).unwrap().to_string(), "Y X");
        assert_eq!(farey_word(sl(1, 2)).unwrap().to_string(), "Y X^-1 Y^-1 X");
        assert_eq!(farey_word(sl(1, 1)).unwrap().to_string(), "Y^-1 X");
        assert!(farey_word(Slope::APEX).is_err());
    }

    proptest! {
        #[test]
        fn word_shape_matches_cutting_sequence(q in 1u32..80, p in 0u32..80) {
            prop_assume!(p <= q && p.gcd(&q) == 1);
            let s = Slope::new(p as i64, q as i64).unwrap();
            let w = farey_word(s).unwrap();
            prop_assert_eq!(w.len(), 2 * q as usize);
            // Independent recount of the exponents by counting floor jumps.
            let mut floor = 0u64;
            let mut acc = 0u64;
            for (k, l) in w.letters.iter().enumerate() {
                let i = k as u64 + 1;
                acc += p as u64;
                while acc >= (floor + 1) * q as u64 {
                    floor += 1;
                }
                prop_assert_eq!(floor, i * p as u64 / q as u64);
                let expected = if floor % 2 == 0 { 1 } else { -1 };
                prop_assert_eq!(l.exponent, expected);
                let g = if i % 2 == 1 { Generator::Y } else { Generator::X };
                prop_assert_eq!(l.generator, g);
            }
            if q % 2 == 0 {
                prop_assert_eq!(w.exponent_sum(Generator::X), 0);
                prop_assert_eq!(w.exponent_sum(Generator::Y), 0);
            }
        }
    }
}
