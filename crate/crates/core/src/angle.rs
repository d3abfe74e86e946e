//! Exact arithmetic on external angles.
//!
//! Angles live on the circle `R/Z` and are measured in full turns, so an
//! angle is a reduced fraction `num/den` in `[0, 1)`. The degree-`d`
//! dynamics is multiplication by `d` mod 1. Everything here is exact:
//! no floating point, no rounding.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest denominator we allow. Keeping denominators within `u64` range
/// means every intermediate product (cross multiplications, `den * d`)
/// fits in `u128` without overflow checks on the hot paths.
pub const DEN_MAX: u128 = u64::MAX as u128;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AngleParseError {
    #[error("angle must be written as `p/q` (or `0`), got `{0}`")]
    InvalidFormat(String),
    #[error("angle denominator must be nonzero")]
    ZeroDenominator,
    #[error("angle denominator exceeds the supported range (2^64 - 1)")]
    DenominatorTooLarge,
}

/// An external angle: a reduced rational `num/den` in `[0, 1)` full turns.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Angle {
    num: u128,
    den: u128,
}

impl Angle {
    /// Canonical angle `num/den` reduced mod 1.
    ///
    /// Panics if `den` is zero or the reduced denominator exceeds
    /// [`DEN_MAX`].
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den != 0, "angle denominator must be nonzero");
        let num = num % den;
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        assert!(den <= DEN_MAX, "angle denominator exceeds 2^64 - 1");
        Angle { num, den }
    }

    pub const fn zero() -> Self {
        Angle { num: 0, den: 1 }
    }

    pub fn numer(&self) -> u128 {
        self.num
    }

    pub fn denom(&self) -> u128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Image under multiplication by the degree: `(d * a) mod 1`.
    pub fn times_d(&self, d: u32) -> Angle {
        assert!(d >= 2, "degree must be at least 2");
        let num = (self.num * d as u128) % self.den;
        // gcd(num, den) = 1 implies the new gcd divides d.
        let g = num.gcd(&self.den);
        Angle {
            num: num / g,
            den: self.den / g,
        }
    }

    /// The `d` preimages `(a + k) / d` for `k = 0..d`, in increasing order.
    pub fn preimages(&self, d: u32) -> Vec<Angle> {
        assert!(d >= 2, "degree must be at least 2");
        (0..d as u128)
            .map(|k| Angle::new(self.num + k * self.den, self.den * d as u128))
            .collect()
    }

    /// Forward orbit under multiplication by `d`, with exact repetition
    /// detection. Rational angles always terminate.
    pub fn orbit(&self, d: u32) -> OrbitInfo {
        let mut seen: HashMap<Angle, usize> = HashMap::new();
        let mut orbit = Vec::new();
        let mut a = *self;
        loop {
            if let Some(&first) = seen.get(&a) {
                let period = orbit.len() - first;
                return OrbitInfo {
                    preperiod: first,
                    period,
                    orbit,
                };
            }
            seen.insert(a, orbit.len());
            orbit.push(a);
            a = a.times_d(d);
        }
    }

    /// Distance along the circle: `min(|a-b|, 1-|a-b|)`, in `[0, 1/2]`.
    pub fn circ_dist(&self, other: &Angle) -> Frac {
        let l = self.den.lcm(&other.den);
        let x = self.num * (l / self.den);
        let y = other.num * (l / other.den);
        let diff = if x >= y { x - y } else { y - x };
        let diff = diff.min(l - diff);
        Frac::new(diff, l)
    }

    /// First `n` digits of the base-`d` expansion consistent with the
    /// orbit: digit `k` is `floor(d * (d^k a mod 1))`.
    ///
    /// Digits are rendered as single characters, so `d` must be at
    /// most 36.
    pub fn base_d_digits(&self, d: u32, n: usize) -> String {
        assert!(d >= 2, "degree must be at least 2");
        assert!(d <= 36, "digit strings support degrees up to 36");
        let mut s = String::with_capacity(n);
        let mut a = *self;
        for _ in 0..n {
            let digit = ((a.num * d as u128) / a.den) as u32;
            s.push(char::from_digit(digit, d).expect("digit below radix"));
            a = a.times_d(d);
        }
        s
    }
}

impl PartialOrd for Angle {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Angle {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // num < den <= 2^64 - 1, so the cross products fit in u128.
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Angle {
    type Err = AngleParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" {
            return Ok(Angle::zero());
        }
        let (p, q) = s
            .split_once('/')
            .ok_or_else(|| AngleParseError::InvalidFormat(s.to_string()))?;
        let num: u128 = p
            .trim()
            .parse()
            .map_err(|_| AngleParseError::InvalidFormat(s.to_string()))?;
        let den: u128 = q
            .trim()
            .parse()
            .map_err(|_| AngleParseError::InvalidFormat(s.to_string()))?;
        if den == 0 {
            return Err(AngleParseError::ZeroDenominator);
        }
        if den > DEN_MAX {
            return Err(AngleParseError::DenominatorTooLarge);
        }
        Ok(Angle::new(num, den))
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// A non-negative exact rational, used for circle distances and chord
/// lengths. Values stay in `[0, 1]` in practice.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Frac {
    num: u128,
    den: u128,
}

impl Frac {
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den != 0, "fraction denominator must be nonzero");
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        assert!(
            num <= DEN_MAX && den <= DEN_MAX,
            "fraction exceeds the supported range"
        );
        Frac { num, den }
    }

    pub const fn zero() -> Self {
        Frac { num: 0, den: 1 }
    }

    pub fn numer(&self) -> u128 {
        self.num
    }

    pub fn denom(&self) -> u128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self * k`.
    pub fn scale(&self, k: u32) -> Frac {
        Frac::new(self.num * k as u128, self.den)
    }

    /// `1 - self`; panics if `self > 1`.
    pub fn one_minus(&self) -> Frac {
        assert!(self.num <= self.den, "fraction exceeds 1");
        Frac::new(self.den - self.num, self.den)
    }
}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Frac {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Orbit of an angle under multiplication by the degree.
///
/// `orbit` holds the `preperiod + period` distinct angles visited before
/// the first repetition; the entry at index `preperiod` is the one the
/// orbit returns to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitInfo {
    pub preperiod: usize,
    pub period: usize,
    pub orbit: Vec<Angle>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(s: &str) -> Angle {
        s.parse().unwrap()
    }

    #[test]
    fn times_d_examples() {
        assert_eq!(a("1/3").times_d(2), a("2/3"));
        assert_eq!(a("2/3").times_d(2), a("1/3"));
        assert_eq!(a("1/7").times_d(3), a("3/7"));
    }

    #[test]
    fn times_d_reduces_denominator() {
        assert_eq!(a("1/6").times_d(2), a("1/3"));
        assert_eq!(a("1/2").times_d(2), Angle::zero());
    }

    #[test]
    fn preimages_examples() {
        assert_eq!(Angle::zero().preimages(2), vec![a("0"), a("1/2")]);
        assert_eq!(a("1/3").preimages(2), vec![a("1/6"), a("2/3")]);
        assert_eq!(a("1/6").preimages(2), vec![a("1/12"), a("7/12")]);
    }

    #[test]
    fn orbit_examples() {
        let o = a("1/7").orbit(2);
        assert_eq!((o.preperiod, o.period), (0, 3));
        assert_eq!(o.orbit, vec![a("1/7"), a("2/7"), a("4/7")]);

        let o = a("1/6").orbit(2);
        assert_eq!((o.preperiod, o.period), (1, 2));
        assert_eq!(o.orbit, vec![a("1/6"), a("1/3"), a("2/3")]);

        let o = a("1/2").orbit(2);
        assert_eq!((o.preperiod, o.period), (1, 1));
        assert_eq!(o.orbit, vec![a("1/2"), a("0")]);
    }

    #[test]
    fn circ_dist_examples() {
        assert_eq!(a("1/7").circ_dist(&a("2/7")), Frac::new(1, 7));
        assert_eq!(a("1/10").circ_dist(&a("9/10")), Frac::new(1, 5));
        assert_eq!(a("3/8").circ_dist(&a("3/8")), Frac::zero());
    }

    #[test]
    fn base_d_digits_examples() {
        assert_eq!(a("1/3").base_d_digits(2, 4), "0101");
        assert_eq!(Angle::zero().base_d_digits(2, 3), "000");
        assert_eq!(a("1/7").base_d_digits(2, 6), "001001");
    }

    #[test]
    fn parse_and_display_round_trip() {
        assert_eq!(a("0").to_string(), "0");
        assert_eq!(a("2/14").to_string(), "1/7");
        assert_eq!(a("9/7").to_string(), "2/7");
        assert!("5".parse::<Angle>().is_err());
        assert!("1/0".parse::<Angle>().is_err());
        assert!("-1/3".parse::<Angle>().is_err());
        assert!("x/3".parse::<Angle>().is_err());
    }

    /// Preperiod should equal the exponent needed to remove from `den`
    /// every prime factor shared with `d`.
    fn preperiod_by_factoring(mut den: u128, d: u128) -> usize {
        let mut k = 0;
        loop {
            let g = den.gcd(&d);
            if g == 1 {
                return k;
            }
            den /= g;
            k += 1;
        }
    }

    #[test]
    fn orbit_preperiod_matches_factorization() {
        for d in [2u32, 3, 6] {
            for den in 1u128..=60 {
                for num in 0..den {
                    if num.gcd(&den) != 1 {
                        continue;
                    }
                    let o = Angle::new(num, den).orbit(d);
                    assert_eq!(o.preperiod, preperiod_by_factoring(den, d as u128));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn preimages_map_back(num in 0u128..2000, den in 1u128..2000, d in 2u32..6) {
            let a = Angle::new(num, den);
            let pre = a.preimages(d);
            prop_assert_eq!(pre.len(), d as usize);
            for p in &pre {
                prop_assert_eq!(p.times_d(d), a);
            }
            let mut sorted = pre.clone();
            sorted.sort();
            prop_assert_eq!(sorted, pre);
        }

        #[test]
        fn orbit_is_exactly_periodic(num in 0u128..500, den in 1u128..500, d in 2u32..4) {
            let a = Angle::new(num, den);
            let o = a.orbit(d);
            // All stored angles pairwise distinct.
            let mut set = std::collections::HashSet::new();
            for x in &o.orbit {
                prop_assert!(set.insert(*x));
            }
            // d^period fixes the first periodic angle.
            let mut x = o.orbit[o.preperiod];
            for _ in 0..o.period {
                x = x.times_d(d);
            }
            prop_assert_eq!(x, o.orbit[o.preperiod]);
        }

        #[test]
        fn circ_dist_is_a_metric(n1 in 0u128..300, d1 in 1u128..300,
                                 n2 in 0u128..300, d2 in 1u128..300,
                                 n3 in 0u128..300, d3 in 1u128..300) {
            let (x, y, z) = (Angle::new(n1, d1), Angle::new(n2, d2), Angle::new(n3, d3));
            let half = Frac::new(1, 2);
            prop_assert!(x.circ_dist(&y) <= half);
            prop_assert_eq!(x.circ_dist(&y), y.circ_dist(&x));
            prop_assert_eq!(x.circ_dist(&y).is_zero(), x == y);
            // Triangle inequality, cross-multiplied to stay exact.
            let (ab, bc, ac) = (x.circ_dist(&y), y.circ_dist(&z), x.circ_dist(&z));
            let lhs = ac.numer() * ab.denom() * bc.denom();
            let rhs = ab.numer() * ac.denom() * bc.denom()
                + bc.numer() * ab.denom() * ac.denom();
            prop_assert!(lhs <= rhs);
        }
    }
}
