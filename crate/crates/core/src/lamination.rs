//! Chords and polygons inscribed in the unit circle, and their dynamics
//! under angle multiplication.
//!
//! A leaf is a chord joining two external angles; it stands in for a pair
//! of external rays landing at a common point. Triangles model common
//! landing points of three rays. Iterating the degree map on triangles,
//! together with the side-length law `s -> min(d s, 1 - d s)` and the
//! area bound for well-separated triangles, is the combinatorial engine
//! behind the classification of triangle orbits: at rational angles every
//! orbit is periodic, preperiodic, or collapses through a critical chord.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::angle::{Angle, Frac};

#[derive(Debug, Error, PartialEq)]
pub enum LaminationError {
    #[error("leaf endpoints must be distinct")]
    DegenerateLeaf,
    #[error("polygon needs at least 3 distinct vertices")]
    TooFewVertices,
    #[error("operation requires a triangle, got {0} vertices")]
    NotATriangle(usize),
    #[error("triangle orbit not classified within {0} steps (raise max_steps)")]
    Exhausted(usize),
    #[error("triangle collapsed through a critical chord at step {0}")]
    CollapseAt(usize),
    #[error("separation parameter must satisfy 0 < eps <= 1/3, got {0}")]
    EpsilonOutOfRange(f64),
}

/// An unordered pair of distinct angles: a chord of the unit disk.
/// Stored with `a < b`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leaf {
    a: Angle,
    b: Angle,
}

impl Leaf {
    pub fn new(a: Angle, b: Angle) -> Result<Self, LaminationError> {
        if a == b {
            return Err(LaminationError::DegenerateLeaf);
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Ok(Leaf { a, b })
    }

    pub fn endpoints(&self) -> (Angle, Angle) {
        (self.a, self.b)
    }

    /// Chord length measured along the circle, in `(0, 1/2]`.
    pub fn length(&self) -> Frac {
        self.a.circ_dist(&self.b)
    }

    pub fn has_endpoint(&self, x: &Angle) -> bool {
        self.a == *x || self.b == *x
    }

    /// True when `x` lies strictly inside the arc from `a` to `b`
    /// (counterclockwise, endpoints excluded).
    pub fn arc_contains(&self, x: &Angle) -> bool {
        self.a < *x && *x < self.b
    }
}

impl fmt::Display for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

impl fmt::Debug for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Leaf {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Image of a leaf under the degree map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafImage {
    Chord(Leaf),
    /// Both endpoints map to the same angle (a critical leaf of length
    /// `k/d`); the image degenerates to that angle.
    Collapsed(Angle),
}

/// Endpoint-wise image of a leaf under multiplication by `d`.
///
/// For a leaf of length `s < 1/d` the image is a chord of length exactly
/// `min(d s, 1 - d s)`.
pub fn leaf_image(leaf: &Leaf, d: u32) -> LeafImage {
    let (a, b) = leaf.endpoints();
    let (ia, ib) = (a.times_d(d), b.times_d(d));
    match Leaf::new(ia, ib) {
        Ok(l) => LeafImage::Chord(l),
        Err(_) => LeafImage::Collapsed(ia),
    }
}

/// Do two chords link? Leaves sharing an endpoint do not cross.
pub fn leaves_cross(l1: &Leaf, l2: &Leaf) -> bool {
    let (c, d) = l2.endpoints();
    if l1.has_endpoint(&c) || l1.has_endpoint(&d) {
        return false;
    }
    l1.arc_contains(&c) != l1.arc_contains(&d)
}

/// An inscribed polygon: at least three distinct angles, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Polygon {
    vertices: Vec<Angle>,
}

impl Polygon {
    pub fn new(mut vertices: Vec<Angle>) -> Result<Self, LaminationError> {
        vertices.sort();
        vertices.dedup();
        if vertices.len() < 3 {
            return Err(LaminationError::TooFewVertices);
        }
        Ok(Polygon { vertices })
    }

    pub fn triangle(a: Angle, b: Angle, c: Angle) -> Result<Self, LaminationError> {
        Polygon::new(vec![a, b, c])
    }

    pub fn vertices(&self) -> &[Angle] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sides between cyclically adjacent vertices.
    pub fn sides(&self) -> Vec<Leaf> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| Leaf::new(self.vertices[i], self.vertices[(i + 1) % n]).expect("distinct"))
            .collect()
    }
}

/// How a triangle orbit terminates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TriangleClass {
    Periodic { period: usize },
    Preperiodic { preperiod: usize, period: usize },
    CriticalCollapse { step: usize },
}

/// Classification of a triangle orbit plus the per-step side lengths,
/// sorted descending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangleOrbitReport {
    pub class: TriangleClass,
    pub side_lengths: Vec<[Frac; 3]>,
}

fn triangle_sides(v: &[Angle; 3]) -> [Frac; 3] {
    let mut s = [
        v[0].circ_dist(&v[1]),
        v[1].circ_dist(&v[2]),
        v[2].circ_dist(&v[0]),
    ];
    s.sort_by(|x, y| y.cmp(x));
    s
}

/// Iterate a triangle vertex-wise under multiplication by `d`, comparing
/// vertex sets, until the set repeats or two vertices collide.
///
/// Rational vertices always classify; `max_steps` only guards against a
/// caller setting it below the exact repetition bound.
pub fn triangle_orbit(
    t: &Polygon,
    d: u32,
    max_steps: usize,
) -> Result<TriangleOrbitReport, LaminationError> {
    if t.len() != 3 {
        return Err(LaminationError::NotATriangle(t.len()));
    }
    let mut v: [Angle; 3] = [t.vertices[0], t.vertices[1], t.vertices[2]];
    let mut seen: HashMap<[Angle; 3], usize> = HashMap::new();
    let mut side_lengths = Vec::new();
    for step in 0.. {
        if let Some(&first) = seen.get(&v) {
            let period = step - first;
            let class = if first == 0 {
                TriangleClass::Periodic { period }
            } else {
                TriangleClass::Preperiodic {
                    preperiod: first,
                    period,
                }
            };
            return Ok(TriangleOrbitReport {
                class,
                side_lengths,
            });
        }
        if step >= max_steps {
            return Err(LaminationError::Exhausted(max_steps));
        }
        seen.insert(v, step);
        side_lengths.push(triangle_sides(&v));
        let mut w = [v[0].times_d(d), v[1].times_d(d), v[2].times_d(d)];
        w.sort();
        if w[0] == w[1] || w[1] == w[2] {
            return Ok(TriangleOrbitReport {
                class: TriangleClass::CriticalCollapse { step: step + 1 },
                side_lengths,
            });
        }
        v = w;
    }
    unreachable!()
}

/// Per-step record of triangle side lengths and which sides grew.
///
/// `lengths` are the sides of the triangle at this step, sorted
/// descending; `grew[i]` says whether the side of length `lengths[i]`
/// maps to a strictly longer side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WanderingStep {
    pub step: usize,
    pub lengths: [Frac; 3],
    pub grew: [bool; 3],
}

/// Follow a triangle for `steps` iterations, recording side lengths and
/// growth flags, and checking the length law along the way: a side of
/// length `s < 1/d` maps to a side of length exactly `min(d s, 1 - d s)`,
/// so sides shorter than `1/(d+1)` grow, longer ones shrink, and
/// `s = 1/(d+1)` is fixed.
pub fn wandering_report(
    t: &Polygon,
    d: u32,
    steps: usize,
) -> Result<Vec<WanderingStep>, LaminationError> {
    if t.len() != 3 {
        return Err(LaminationError::NotATriangle(t.len()));
    }
    let threshold = Frac::new(1, d as u128 + 1);
    let one_over_d = Frac::new(1, d as u128);
    let mut v: [Angle; 3] = [t.vertices[0], t.vertices[1], t.vertices[2]];
    let mut report = Vec::with_capacity(steps);
    for step in 0..steps {
        let w = [v[0].times_d(d), v[1].times_d(d), v[2].times_d(d)];
        let pairs = [(0usize, 1usize), (1, 2), (2, 0)];
        let mut recs: Vec<(Frac, bool)> = Vec::with_capacity(3);
        for (i, j) in pairs {
            let s = v[i].circ_dist(&v[j]);
            if w[i] == w[j] {
                return Err(LaminationError::CollapseAt(step + 1));
            }
            let img = w[i].circ_dist(&w[j]);
            if s < one_over_d {
                let ds = s.scale(d);
                let law = ds.min(ds.one_minus());
                assert_eq!(img, law, "side-length law violated");
                match s.cmp(&threshold) {
                    std::cmp::Ordering::Less => assert!(img > s, "short side failed to grow"),
                    std::cmp::Ordering::Greater => assert!(img < s, "long side failed to shrink"),
                    std::cmp::Ordering::Equal => assert_eq!(img, s, "threshold side moved"),
                }
            }
            recs.push((s, img > s));
        }
        recs.sort_by(|x, y| y.0.cmp(&x.0));
        report.push(WanderingStep {
            step,
            lengths: [recs[0].0, recs[1].0, recs[2].0],
            grew: [recs[0].1, recs[1].1, recs[2].1],
        });
        let mut next = w;
        next.sort();
        v = next;
    }
    Ok(report)
}

/// Euclidean area of the triangle inscribed in the unit circle whose
/// three circular gaps (in turns) are `x`, `y` and `1 - x - y`.
fn inscribed_area(x: f64, y: f64) -> f64 {
    let z = 1.0 - x - y;
    let t = std::f64::consts::TAU;
    0.5 * ((t * x).sin() + (t * y).sin() + (t * z).sin()).abs()
}

/// Minimum Euclidean area over triangles inscribed in the unit circle
/// whose pairwise vertex distances along the circle are all at least
/// `eps`.
///
/// The minimizing configuration always has one gap equal to `eps`, so we
/// scan the one-parameter family with one gap pinned (grid resolution
/// 1e-4 in the angle, then golden-section refinement; the result is
/// accurate to about 1e-8 in the area).
pub fn min_triangle_area(eps: f64) -> Result<f64, LaminationError> {
    if !(eps > 0.0 && eps <= 1.0 / 3.0 + 1e-12) {
        return Err(LaminationError::EpsilonOutOfRange(eps));
    }
    let lo = eps;
    let hi = 1.0 - 2.0 * eps;
    if hi <= lo {
        // eps = 1/3 forces the equilateral triangle.
        return Ok(inscribed_area(eps, eps));
    }
    let f = |y: f64| inscribed_area(eps, y);

    let grid = 1e-4;
    let n = ((hi - lo) / grid).ceil() as usize;
    let mut best_y = lo;
    let mut best = f(lo);
    for k in 0..=n {
        let y = lo + (hi - lo) * (k as f64) / (n as f64);
        let a = f(y);
        if a < best {
            best = a;
            best_y = y;
        }
    }

    // Golden-section refinement around the best grid point.
    let mut a = (best_y - grid).max(lo);
    let mut b = (best_y + grid).min(hi);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    Ok(best.min(fc).min(fd))
}

/// Upper bound for the number of interior-disjoint inscribed triangles
/// whose pairwise vertex distances are at least `eps`: the disk has area
/// pi and each such triangle takes up at least `min_triangle_area(eps)`.
pub fn packing_bound(eps: f64) -> Result<usize, LaminationError> {
    let area = min_triangle_area(eps)?;
    Ok((PI / area).floor() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(s: &str) -> Angle {
        s.parse().unwrap()
    }

    fn leaf(x: &str, y: &str) -> Leaf {
        Leaf::new(a(x), a(y)).unwrap()
    }

    fn tri(x: &str, y: &str, z: &str) -> Polygon {
        Polygon::triangle(a(x), a(y), a(z)).unwrap()
    }

    #[test]
    fn leaf_image_examples() {
        assert_eq!(
            leaf_image(&leaf("1/7", "2/7"), 2),
            LeafImage::Chord(leaf("2/7", "4/7"))
        );
        // length 2/7 -> min(4/7, 3/7) = 3/7
        let img = leaf_image(&leaf("2/7", "4/7"), 2);
        match img {
            LeafImage::Chord(l) => {
                assert_eq!(l, leaf("4/7", "1/7"));
                assert_eq!(l.length(), Frac::new(3, 7));
            }
            _ => panic!("expected chord"),
        }
        assert_eq!(
            leaf_image(&leaf("0", "1/2"), 2),
            LeafImage::Collapsed(Angle::zero())
        );
    }

    #[test]
    fn crossing_examples() {
        assert!(!leaves_cross(&leaf("1/7", "2/7"), &leaf("3/7", "5/7")));
        assert!(leaves_cross(&leaf("0", "1/2"), &leaf("1/4", "3/4")));
        // Touching is not crossing.
        assert!(!leaves_cross(&leaf("0", "1/3"), &leaf("1/3", "2/3")));
    }

    #[test]
    fn triangle_orbit_examples() {
        let r = triangle_orbit(&tri("1/7", "2/7", "4/7"), 2, 100).unwrap();
        assert_eq!(r.class, TriangleClass::Periodic { period: 1 });

        let r = triangle_orbit(&tri("1/12", "5/12", "3/4"), 2, 100).unwrap();
        assert_eq!(
            r.class,
            TriangleClass::Preperiodic {
                preperiod: 2,
                period: 1
            }
        );

        let r = triangle_orbit(&tri("1/8", "5/8", "1/4"), 2, 100).unwrap();
        assert_eq!(r.class, TriangleClass::CriticalCollapse { step: 1 });
    }

    #[test]
    fn triangle_orbit_exhaustion_is_caller_error() {
        assert_eq!(
            triangle_orbit(&tri("1/31", "2/31", "4/31"), 2, 2),
            Err(LaminationError::Exhausted(2))
        );
    }

    #[test]
    fn wandering_report_fixed_triangle() {
        let steps = wandering_report(&tri("1/7", "2/7", "4/7"), 2, 3).unwrap();
        assert_eq!(steps.len(), 3);
        for s in &steps {
            assert_eq!(
                s.lengths,
                [Frac::new(3, 7), Frac::new(2, 7), Frac::new(1, 7)]
            );
        }
        // 1/7 < 1/3 grows, 2/7 < 1/3 grows, 3/7 > 1/3 shrinks.
        assert_eq!(steps[0].grew, [false, true, true]);
    }

    #[test]
    fn wandering_report_equilateral_is_frozen() {
        // All sides have length exactly 1/3, the fixed point of the
        // length law for d = 2.
        let steps = wandering_report(&tri("1/12", "5/12", "3/4"), 2, 4).unwrap();
        let third = Frac::new(1, 3);
        for s in &steps {
            assert_eq!(s.lengths, [third, third, third]);
            assert_eq!(s.grew, [false, false, false]);
        }
    }

    #[test]
    fn wandering_report_stops_at_collapse() {
        assert_eq!(
            wandering_report(&tri("1/8", "5/8", "1/4"), 2, 5),
            Err(LaminationError::CollapseAt(1))
        );
    }

    #[test]
    fn min_area_forced_equilateral() {
        let area = min_triangle_area(1.0 / 3.0).unwrap();
        assert!((area - 3.0 * 3f64.sqrt() / 4.0).abs() < 1e-9);
    }

    #[test]
    fn min_area_matches_brute_force_grid() {
        // Independent oracle: scan the full two-gap family on a coarse
        // grid, no pinning.
        for eps in [1.0 / 6.0, 1.0 / 12.0, 0.05] {
            let mut oracle = f64::INFINITY;
            let n = 1500;
            for i in 0..=n {
                let x = eps + (1.0 - 3.0 * eps) * (i as f64) / (n as f64);
                for j in 0..=n {
                    let y = eps + (1.0 - 2.0 * eps - x - eps) * (j as f64) / (n as f64);
                    let z = 1.0 - x - y;
                    if y < eps - 1e-12 || z < eps - 1e-12 {
                        continue;
                    }
                    oracle = oracle.min(inscribed_area(x, y));
                }
            }
            let got = min_triangle_area(eps).unwrap();
            assert!(
                (got - oracle).abs() < 1e-4,
                "eps={eps}: impl {got} vs grid oracle {oracle}"
            );
            assert!(got <= oracle + 1e-12, "implementation must not exceed oracle");
        }
    }

    #[test]
    fn min_area_frozen_values() {
        // Minimum sits at the gap configuration (eps, eps, 1-2eps), with
        // area sin(2 pi eps) * (1 - cos(2 pi eps)).
        let expect = |eps: f64| {
            let t = std::f64::consts::TAU * eps;
            t.sin() * (1.0 - t.cos())
        };
        for eps in [1.0 / 3.0, 1.0 / 6.0, 1.0 / 12.0] {
            let got = min_triangle_area(eps).unwrap();
            assert!((got - expect(eps)).abs() < 1e-8, "eps={eps}: {got}");
        }
        assert!((min_triangle_area(1.0 / 6.0).unwrap() - 3f64.sqrt() / 4.0).abs() < 1e-8);
    }

    #[test]
    fn min_area_monotone_and_vanishing() {
        let a1 = min_triangle_area(1.0 / 24.0).unwrap();
        let a2 = min_triangle_area(1.0 / 12.0).unwrap();
        let a3 = min_triangle_area(1.0 / 6.0).unwrap();
        let a4 = min_triangle_area(1.0 / 3.0).unwrap();
        assert!(a1 < a2 && a2 < a3 && a3 < a4);
        assert!(min_triangle_area(1e-3).unwrap() < 1e-5);
        assert!(min_triangle_area(0.0).is_err());
        assert!(min_triangle_area(0.5).is_err());
    }

    #[test]
    fn packing_bound_examples() {
        assert_eq!(packing_bound(1.0 / 3.0).unwrap(), 2);
        // Two inscribed triangles with all gaps 1/3 always cross, so the
        // true maximum is 1 and the bound is not tight.
        let t1 = tri("0", "1/3", "2/3");
        let t2 = tri("1/12", "5/12", "3/4");
        let crossing = t1
            .sides()
            .iter()
            .any(|s1| t2.sides().iter().any(|s2| leaves_cross(s1, s2)));
        assert!(crossing);
    }

    proptest! {
        #[test]
        fn length_law_holds(n1 in 0u128..5000, n2 in 0u128..5000,
                            den in 2u128..5000, d in 2u32..6) {
            let x = Angle::new(n1, den);
            let y = Angle::new(n2, den);
            prop_assume!(x != y);
            let l = Leaf::new(x, y).unwrap();
            let s = l.length();
            prop_assume!(s < Frac::new(1, d as u128));
            match leaf_image(&l, d) {
                LeafImage::Chord(img) => {
                    let ds = s.scale(d);
                    prop_assert_eq!(img.length(), ds.min(ds.one_minus()));
                }
                LeafImage::Collapsed(_) => {
                    // length k/d with s < 1/d means s = 0: impossible.
                    prop_assert!(false, "short leaf collapsed");
                }
            }
        }

        #[test]
        fn crossing_is_symmetric_and_irreflexive(
            n1 in 0u128..100, n2 in 0u128..100, n3 in 0u128..100, n4 in 0u128..100,
            den in 7u128..100)
        {
            let mk = |n| Angle::new(n, den);
            prop_assume!(mk(n1) != mk(n2) && mk(n3) != mk(n4));
            let l1 = Leaf::new(mk(n1), mk(n2)).unwrap();
            let l2 = Leaf::new(mk(n3), mk(n4)).unwrap();
            prop_assert_eq!(leaves_cross(&l1, &l2), leaves_cross(&l2, &l1));
            prop_assert!(!leaves_cross(&l1, &l1));
        }
    }
}
