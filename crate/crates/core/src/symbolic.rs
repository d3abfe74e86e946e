//! Symbolic itineraries of external angles.
//!
//! The `d` preimages of a characteristic angle (the angle of a ray landing
//! at the critical value) cut the circle into `d` arcs. Tracking which arc
//! the iterates of an angle visit gives a symbolic itinerary; angles whose
//! rays land at a common point have matching itineraries. On a dendrite
//! Julia set this decides "which rational rays land together" purely
//! combinatorially. The module computes the formal equivalence for any
//! parameters; whether it reflects actual landing behaviour is up to the
//! caller (it does under the dendrite hypothesis).

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::angle::Angle;

/// One itinerary entry: the arc index, or `Star` for an exact hit of a
/// partition boundary (the orbit then passes through the critical point,
/// where rays from both neighbouring arcs land).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Arc(u32),
    Star,
}

impl Symbol {
    /// Wildcard semantics: `Star` matches anything.
    fn matches(&self, other: &Symbol) -> bool {
        matches!(
            (self, other),
            (Symbol::Star, _) | (_, Symbol::Star)
        ) || self == other
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Arc(k) => write!(f, "{k}"),
            Symbol::Star => write!(f, "*"),
        }
    }
}

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// The angle of a ray landing at the critical value, plus the degree.
/// Its preimages are the partition boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CharacteristicAngle {
    theta_v: Angle,
    d: u32,
}

impl CharacteristicAngle {
    pub fn new(theta_v: Angle, d: u32) -> Self {
        assert!(d >= 2, "degree must be at least 2");
        CharacteristicAngle { theta_v, d }
    }

    pub fn theta_v(&self) -> Angle {
        self.theta_v
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    /// The `d` boundary angles `(theta_v + k) / d`, sorted.
    pub fn partition_boundaries(&self) -> Vec<Angle> {
        self.theta_v.preimages(self.d)
    }

    /// Index into the sorted boundary list of the arc base: arc 0 starts
    /// at the boundary immediately clockwise of `theta_v`, so arc 0
    /// contains `theta_v` whenever `theta_v` is not itself a boundary.
    fn base_index(&self, boundaries: &[Angle]) -> usize {
        boundaries
            .iter()
            .rposition(|b| *b <= self.theta_v)
            .unwrap_or(boundaries.len() - 1)
    }

    /// Symbol of a single angle: the label of the arc containing it, or
    /// `Star` on a boundary hit.
    pub fn symbol(&self, x: &Angle) -> Symbol {
        let boundaries = self.partition_boundaries();
        self.symbol_with(&boundaries, self.base_index(&boundaries), x)
    }

    fn symbol_with(&self, boundaries: &[Angle], base: usize, x: &Angle) -> Symbol {
        if boundaries.binary_search(x).is_ok() {
            return Symbol::Star;
        }
        let d = boundaries.len();
        let j = boundaries.iter().rposition(|b| b <= x).unwrap_or(d - 1);
        Symbol::Arc(((j + d - base) % d) as u32)
    }

    /// Itinerary of `phi`: symbol `k` at step `n` when `d^n phi` lies
    /// strictly inside arc `k`. Exact and eventually periodic.
    pub fn itinerary(&self, phi: &Angle) -> Itinerary {
        let boundaries = self.partition_boundaries();
        let base = self.base_index(&boundaries);
        let orbit = phi.orbit(self.d);
        let syms: Vec<Symbol> = orbit
            .orbit
            .iter()
            .map(|x| self.symbol_with(&boundaries, base, x))
            .collect();
        let pre = syms[..orbit.preperiod].to_vec();
        let per = syms[orbit.preperiod..].to_vec();
        Itinerary::normalized(pre, per)
    }
}

/// An eventually periodic itinerary, stored as a preperiodic block
/// followed by a repeating block, both minimal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Itinerary {
    pub preperiod: Vec<Symbol>,
    pub period: Vec<Symbol>,
}

impl Itinerary {
    /// Build from raw blocks and reduce to the minimal normal form:
    /// shrink the repeating block to its primitive period, then absorb
    /// any matching tail of the preperiodic block into the cycle.
    fn normalized(pre: Vec<Symbol>, per: Vec<Symbol>) -> Self {
        assert!(!per.is_empty(), "periodic block must be nonempty");
        let mut per = per;
        // Primitive period: smallest divisor that reproduces the block.
        let n = per.len();
        for p in 1..=n {
            if n % p == 0 && (p..n).all(|i| per[i] == per[i - p]) {
                per.truncate(p);
                break;
            }
        }
        let mut pre = pre;
        while let Some(last) = pre.last() {
            if *last == *per.last().expect("nonempty") {
                pre.pop();
                per.rotate_right(1);
            } else {
                break;
            }
        }
        Itinerary {
            preperiod: pre,
            period: per,
        }
    }

    /// Symbol at an arbitrary position.
    pub fn at(&self, n: usize) -> Symbol {
        if n < self.preperiod.len() {
            self.preperiod[n]
        } else {
            self.period[(n - self.preperiod.len()) % self.period.len()]
        }
    }

    pub fn has_wildcard(&self) -> bool {
        self.preperiod.contains(&Symbol::Star) || self.period.contains(&Symbol::Star)
    }

    /// Positionwise comparison horizon that decides equality of two
    /// eventually periodic sequences.
    fn decision_bound(&self, other: &Itinerary) -> usize {
        self.preperiod.len().max(other.preperiod.len())
            + self.period.len().lcm(&other.period.len())
    }

    /// Positionwise match under wildcard semantics.
    pub fn matches(&self, other: &Itinerary) -> bool {
        (0..self.decision_bound(other)).all(|n| self.at(n).matches(&other.at(n)))
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.preperiod {
            write!(f, "{s} ")?;
        }
        write!(f, "(")?;
        for (i, s) in self.period.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")\u{221e}")
    }
}

/// Do the rays at `phi1` and `phi2` land at a common point, under the
/// dendrite hypothesis? Decided by positionwise itinerary matching with
/// `Star` acting as a wildcard.
pub fn angles_equivalent(phi1: &Angle, phi2: &Angle, ca: &CharacteristicAngle) -> bool {
    ca.itinerary(phi1).matches(&ca.itinerary(phi2))
}

/// Partition a set of angles into landing classes: the equivalence
/// closure of pairwise itinerary matching. Classes of size three or more
/// are candidate branch points.
///
/// Wildcard-free itineraries are grouped by their exact normal form;
/// wildcard itineraries (precritical angles) may glue groups together.
pub fn landing_classes(angles: &[Angle], ca: &CharacteristicAngle) -> Vec<Vec<Angle>> {
    let mut sorted: Vec<Angle> = angles.to_vec();
    sorted.sort();
    sorted.dedup();
    let its: Vec<Itinerary> = sorted.iter().map(|a| ca.itinerary(a)).collect();

    let mut parent: Vec<usize> = (0..sorted.len()).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    fn union(parent: &mut Vec<usize>, i: usize, j: usize) {
        let (ri, rj) = (find(parent, i), find(parent, j));
        if ri != rj {
            parent[ri] = rj;
        }
    }

    // Exact classes for wildcard-free itineraries.
    let mut by_form: HashMap<&Itinerary, usize> = HashMap::new();
    let mut wild: Vec<usize> = Vec::new();
    for (i, it) in its.iter().enumerate() {
        if it.has_wildcard() {
            wild.push(i);
        } else if let Some(&j) = by_form.get(it) {
            union(&mut parent, i, j);
        } else {
            by_form.insert(it, i);
        }
    }
    // Wildcard itineraries must be checked pairwise.
    for &i in &wild {
        for &j in by_form.values() {
            if its[i].matches(&its[j]) {
                union(&mut parent, i, j);
            }
        }
        for &j in &wild {
            if j < i && its[i].matches(&its[j]) {
                union(&mut parent, i, j);
            }
        }
    }

    let mut classes: HashMap<usize, Vec<Angle>> = HashMap::new();
    for i in 0..sorted.len() {
        let r = find(&mut parent, i);
        classes.entry(r).or_default().push(sorted[i]);
    }
    let mut out: Vec<Vec<Angle>> = classes.into_values().collect();
    for c in &mut out {
        c.sort();
    }
    out.sort_by_key(|c| c[0]);
    out
}
