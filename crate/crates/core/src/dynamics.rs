//! Numerical dynamics of `f_c(z) = z^d + c`: Green's potential, external
//! ray tracing by inverse iteration, landing detection, clustering of
//! landing points, impression sampling, and periodic points.
//!
//! Rays are traced level by level. A ray point at potential `G` and angle
//! `theta` satisfies `f_c(P(theta, G)) = P(d theta, d G)`, so the whole
//! forward orbit of an angle is traced jointly: starting from the
//! asymptotic points `exp(G_top + 2 pi i theta)` high above the Julia
//! set, each level pulls every ray in the family back one step, picking
//! the `f_c`-preimage that continues the ray. For rational angles the
//! family is finite, so this terminates.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::angle::Angle;
use crate::poly::{all_roots, Poly};

/// Potential above which `exp(G + 2 pi i theta)` equals the Boettcher
/// inverse to machine precision.
const G_TOP: f64 = 30.0;

/// Iteration budget for the potential computation.
const POTENTIAL_BUDGET: usize = 2048;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("rays failed to land: {0:?}")]
    UnlandedRays(Vec<Angle>),
    #[error("clustering is ambiguous at tolerance {tol}: gap {gap} lies in [tol, 2 tol]")]
    AmbiguousClustering { tol: f64, gap: f64 },
    #[error("period {0} exceeds the tractable root count")]
    PeriodTooLarge(u32),
    #[error("root finding did not converge")]
    RootsDidNotConverge,
}

/// The unicritical map `z -> z^d + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Map {
    d: u32,
    c: Complex64,
}

impl Map {
    pub fn new(d: u32, c: Complex64) -> Self {
        assert!(d >= 2, "degree must be at least 2");
        Map { d, c }
    }

    pub fn quadratic(c: Complex64) -> Self {
        Map::new(2, c)
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        z.powu(self.d) + self.c
    }

    /// Derivative `d z^(d-1)`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        z.powu(self.d - 1) * self.d as f64
    }

    /// Radius beyond which orbits escape monotonically.
    pub fn escape_radius(&self) -> f64 {
        let r = self.c.norm().powf(1.0 / (self.d as f64 - 1.0)) + 1.0;
        r.max(2.0)
    }

    /// Green's potential `G(z) = lim d^-n log |f^n(z)|`, zero for points
    /// that do not escape within the iteration budget.
    pub fn potential(&self, z: Complex64) -> f64 {
        // Stop once the tail correction log(1 + c / z^d) / d^(n+1) is far
        // below 1e-12; also keep |z|^d inside f64 range.
        let ln_thresh = (18.0 * std::f64::consts::LN_10).min(250.0 * std::f64::consts::LN_10
            / self.d as f64);
        let thresh_sqr = (2.0 * ln_thresh).exp();
        let mut z = z;
        let mut dn = 1.0f64;
        for _ in 0..POTENTIAL_BUDGET {
            let r2 = z.norm_sqr();
            if !r2.is_finite() {
                return 0.0;
            }
            if r2 > thresh_sqr {
                return 0.5 * r2.ln() / dn;
            }
            z = self.apply(z);
            dn *= self.d as f64;
        }
        0.0
    }
}

impl Serialize for Map {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Map", 2)?;
        s.serialize_field("d", &self.d)?;
        s.serialize_field("c", &[self.c.re, self.c.im])?;
        s.end()
    }
}

/// Tunables for ray tracing and clustering. Defaults match the module
/// documentation; everything is overridable.
#[derive(Clone, Copy, Debug)]
pub struct TraceConfig {
    /// Start potential; `None` means `ln(escape_radius)`.
    pub g0: Option<f64>,
    /// Number of pullback levels below the start potential. A ray
    /// landing at a repelling point with multiplier `lambda` approaches
    /// it like `|lambda|^-k`, so slowly repelling landings (basilica
    /// alpha: 1.24, rabbit alpha: 1.11) need a couple hundred levels to
    /// meet the landing tolerance.
    pub depth: usize,
    /// Cauchy criterion: a ray lands after 3 consecutive steps below this.
    pub landing_tol: f64,
    /// Newton convergence tolerance for each pullback solve.
    pub newton_tol: f64,
    /// Newton iteration cap per solve.
    pub newton_cap: usize,
    /// A step may be at most this multiple of the previous step...
    pub continuity_factor: f64,
    /// ...with this absolute floor.
    pub continuity_floor: f64,
    /// Single-linkage clustering threshold for landing points.
    pub cluster_tol: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            g0: None,
            depth: 256,
            landing_tol: 1e-9,
            newton_tol: 1e-12,
            newton_cap: 64,
            continuity_factor: 10.0,
            continuity_floor: 1e-3,
            cluster_tol: 1e-6,
        }
    }
}

impl TraceConfig {
    pub fn start_potential(&self, map: &Map) -> f64 {
        let g0 = self.g0.unwrap_or_else(|| map.escape_radius().ln());
        assert!(g0 > 0.0 && g0 <= 300.0, "start potential out of range");
        g0
    }
}

/// Why a trace stopped early.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceFailure {
    /// Two preimage candidates both satisfied the continuity bound.
    BranchAmbiguity,
    /// Newton exceeded its cap and no preimage continued the ray.
    NoConvergence,
}

/// A point on a traced ray: location and (nominal) potential.
#[derive(Clone, Copy, Debug)]
pub struct RayPoint {
    pub z: Complex64,
    pub potential: f64,
}

impl Serialize for RayPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(3))?;
        seq.serialize_element(&self.z.re)?;
        seq.serialize_element(&self.z.im)?;
        seq.serialize_element(&self.potential)?;
        seq.end()
    }
}

/// A numerically traced external ray: points of strictly decreasing
/// potential from the start potential downwards, plus the landing state.
#[derive(Clone, Debug)]
pub struct TracedRay {
    pub angle: Angle,
    pub points: Vec<RayPoint>,
    pub landed: bool,
    pub landing_point: Option<Complex64>,
    pub fail_reason: Option<TraceFailure>,
}

impl TracedRay {
    pub fn landing(&self) -> Option<Complex64> {
        self.landing_point
    }
}

impl Serialize for TracedRay {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("TracedRay", 5)?;
        s.serialize_field("angle", &self.angle)?;
        s.serialize_field("points", &self.points)?;
        s.serialize_field("landed", &self.landed)?;
        s.serialize_field("landing", &self.landing_point.map(|z| [z.re, z.im]))?;
        s.serialize_field("fail_reason", &self.fail_reason)?;
        s.end()
    }
}

/// Per-angle state while a family descends.
struct RayState {
    z: Complex64,
    prev_step: Option<f64>,
    small_steps: usize,
    points: Vec<RayPoint>,
    landed: bool,
    failed: Option<TraceFailure>,
}

impl Map {
    /// Solve `f_c(z) = w` by Newton from `seed`.
    fn pull_back_newton(&self, w: Complex64, seed: Complex64, cfg: &TraceConfig) -> Option<Complex64> {
        let mut z = seed;
        for _ in 0..cfg.newton_cap {
            let fz = self.apply(z) - w;
            let dz = self.derivative(z);
            if dz.norm() == 0.0 {
                return None;
            }
            let step = fz / dz;
            z -= step;
            if step.norm() <= cfg.newton_tol * z.norm().max(1.0) {
                return Some(z);
            }
        }
        None
    }

    /// All `d` preimages of `w`: the d-th roots of `w - c`.
    fn preimage_fan(&self, w: Complex64) -> Vec<Complex64> {
        let u = w - self.c;
        let r = u.norm().powf(1.0 / self.d as f64);
        let base = u.arg() / self.d as f64;
        (0..self.d)
            .map(|k| {
                Complex64::from_polar(r, base + std::f64::consts::TAU * k as f64 / self.d as f64)
            })
            .collect()
    }

    /// Trace one external ray. Equivalent to [`Map::trace_batch`] with a
    /// single angle.
    pub fn trace_ray(&self, theta: Angle, cfg: &TraceConfig) -> TracedRay {
        self.trace_batch(&[theta], cfg).pop().expect("one ray")
    }

    /// Trace a batch of external rays jointly.
    ///
    /// The batch is closed under the angle map first (pullback targets
    /// live on image rays), then every level solves `f_c(z) = target`
    /// for each family member, seeding Newton with the point one level
    /// up on the same ray and falling back to a scan of all `d`
    /// preimages when the seeded root violates the continuity bound.
    pub fn trace_batch(&self, angles: &[Angle], cfg: &TraceConfig) -> Vec<TracedRay> {
        let g0 = cfg.start_potential(self);

        // Forward closure of the requested angles.
        let mut family: Vec<Angle> = Vec::new();
        let mut index: HashMap<Angle, usize> = HashMap::new();
        for &a in angles {
            let mut x = a;
            while !index.contains_key(&x) {
                index.insert(x, usize::MAX);
                family.push(x);
                x = x.times_d(self.d);
            }
        }
        family.sort();
        index.clear();
        for (i, &a) in family.iter().enumerate() {
            index.insert(a, i);
        }
        let next: Vec<usize> = family.iter().map(|a| index[&a.times_d(self.d)]).collect();

        // Ascend to a potential where the asymptotic seed is exact.
        let mut ascent = 0usize;
        let mut g_top = g0;
        while g_top < G_TOP {
            g_top *= self.d as f64;
            ascent += 1;
        }

        let mut states: Vec<RayState> = family
            .iter()
            .map(|a| {
                let z = Complex64::from_polar(g_top.exp(), std::f64::consts::TAU * a.to_f64());
                RayState {
                    z,
                    prev_step: None,
                    small_steps: 0,
                    points: Vec::new(),
                    landed: false,
                    failed: None,
                }
            })
            .collect();
        if ascent == 0 {
            for (s, a) in states.iter_mut().zip(&family) {
                let _ = a;
                s.points.push(RayPoint {
                    z: s.z,
                    potential: g0,
                });
            }
        }

        // Descend one level at a time; level k sits at potential
        // g_top / d^k, reaching g0 at k = ascent.
        for k in 1..=(ascent + cfg.depth) {
            let potential = g_top / (self.d as f64).powi(k as i32);
            let targets: Vec<Option<Complex64>> = (0..family.len())
                .map(|i| {
                    let s = &states[next[i]];
                    if s.failed.is_some() {
                        None
                    } else {
                        Some(s.z)
                    }
                })
                .collect();
            for i in 0..family.len() {
                let enforce = k > ascent;
                let s = &mut states[i];
                if s.landed || s.failed.is_some() {
                    continue;
                }
                let Some(w) = targets[i] else {
                    s.failed = Some(TraceFailure::NoConvergence);
                    continue;
                };
                let seed = s.z;
                let threshold = s
                    .prev_step
                    .map(|p| (cfg.continuity_factor * p).max(cfg.continuity_floor))
                    .unwrap_or(f64::INFINITY);

                let newton = self.pull_back_newton(w, seed, cfg);
                let accepted = match newton {
                    Some(z) if !enforce || (z - seed).norm() <= threshold => Some(z),
                    _ => {
                        // Scan all d preimages for roots continuing the ray.
                        let fan = self.preimage_fan(w);
                        let mut ok: Vec<Complex64> = fan
                            .into_iter()
                            .filter(|z| (z - seed).norm() <= threshold)
                            .collect();
                        ok.sort_by(|a, b| (a - seed).norm().total_cmp(&(b - seed).norm()));
                        match ok.len() {
                            1 => Some(ok[0]),
                            0 => {
                                s.failed = Some(TraceFailure::NoConvergence);
                                None
                            }
                            _ => {
                                s.failed = Some(TraceFailure::BranchAmbiguity);
                                None
                            }
                        }
                    }
                };
                let Some(z) = accepted else {
                    continue;
                };
                let step = (z - seed).norm();
                s.prev_step = Some(step);
                s.z = z;
                if k >= ascent {
                    s.points.push(RayPoint { z, potential });
                }
                if step < cfg.landing_tol {
                    s.small_steps += 1;
                    if s.small_steps >= 3 {
                        s.landed = true;
                    }
                } else {
                    s.small_steps = 0;
                }
            }
            if states.iter().all(|s| s.landed || s.failed.is_some()) {
                break;
            }
        }

        angles
            .iter()
            .map(|a| {
                let s = &states[index[a]];
                TracedRay {
                    angle: *a,
                    points: s.points.clone(),
                    landed: s.landed,
                    landing_point: if s.landed { Some(s.z) } else { None },
                    fail_reason: s.failed,
                }
            })
            .collect()
    }
}

/// Whether a landing table came from numerics or from combinatorics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Numerical,
    Combinatorial,
}

/// One class of a landing table: angles whose rays land together, at the
/// recorded point when known numerically.
#[derive(Clone, Debug, Serialize)]
pub struct LandingClass {
    pub angles: Vec<Angle>,
    pub point: Option<[f64; 2]>,
}

/// Partition of a finite angle set into common-landing classes.
#[derive(Clone, Debug, Serialize)]
pub struct LandingTable {
    pub map: Map,
    pub angles: Vec<Angle>,
    pub classes: Vec<LandingClass>,
    pub tol: f64,
    pub provenance: Provenance,
}

impl LandingTable {
    /// The partition as plain angle classes.
    pub fn class_angles(&self) -> Vec<Vec<Angle>> {
        self.classes.iter().map(|c| c.angles.clone()).collect()
    }
}

impl Map {
    /// Group rays by common landing point: single-linkage clustering of
    /// the landing points at threshold `tol`, with an ambiguity check.
    pub fn ray_pairs(
        &self,
        angles: &[Angle],
        tol: f64,
        cfg: &TraceConfig,
    ) -> Result<LandingTable, DynamicsError> {
        let mut sorted: Vec<Angle> = angles.to_vec();
        sorted.sort();
        sorted.dedup();
        let rays = self.trace_batch(&sorted, cfg);
        let unlanded: Vec<Angle> = rays
            .iter()
            .filter(|r| !r.landed)
            .map(|r| r.angle)
            .collect();
        if !unlanded.is_empty() {
            return Err(DynamicsError::UnlandedRays(unlanded));
        }
        let pts: Vec<Complex64> = rays.iter().map(|r| r.landing_point.unwrap()).collect();

        let n = pts.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (pts[i] - pts[j]).norm() <= tol {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri] = rj;
                    }
                }
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        // Validation: intra-class spreads must stay within tol and
        // inter-class gaps must clear 2 tol, otherwise the clustering is
        // ambiguous at this tolerance.
        for i in 0..n {
            for j in (i + 1)..n {
                let gap = (pts[i] - pts[j]).norm();
                let same = find(&mut parent, i) == find(&mut parent, j);
                if same && gap > tol {
                    return Err(DynamicsError::AmbiguousClustering { tol, gap });
                }
                if !same && gap <= 2.0 * tol {
                    return Err(DynamicsError::AmbiguousClustering { tol, gap });
                }
            }
        }
        let mut classes: Vec<LandingClass> = groups
            .into_values()
            .map(|mut idx| {
                idx.sort();
                let mean = idx.iter().fold(Complex64::new(0.0, 0.0), |a, &i| a + pts[i])
                    / idx.len() as f64;
                LandingClass {
                    angles: idx.iter().map(|&i| sorted[i]).collect(),
                    point: Some([mean.re, mean.im]),
                }
            })
            .collect();
        classes.sort_by_key(|c| c.angles[0]);
        Ok(LandingTable {
            map: *self,
            angles: sorted,
            classes,
            tol,
            provenance: Provenance::Numerical,
        })
    }
}

/// Sampled approximation of a ray impression: traced points of nearby
/// rays at low potential.
#[derive(Clone, Debug, Serialize)]
pub struct ImpressionSample {
    pub theta: Angle,
    pub eps: f64,
    pub delta: f64,
    pub points: Vec<[f64; 2]>,
    pub diameter: f64,
    /// Rays that failed to trace; the cloud is partial if nonzero.
    pub failed_rays: usize,
}

impl Map {
    /// Sample the impression of the ray at `theta`: trace `n_angles`
    /// rays with angles within `eps` of `theta` and collect their points
    /// with potential below `delta` (plus landing points).
    ///
    /// Sampled angles are offset by `d`-adic fractions so their orbits
    /// stay small.
    pub fn impression_sample(
        &self,
        theta: Angle,
        eps: f64,
        delta: f64,
        n_angles: usize,
        cfg: &TraceConfig,
    ) -> ImpressionSample {
        assert!(eps > 0.0 && delta > 0.0);
        let g0 = cfg.start_potential(self);
        // Depth: comfortably below `delta`, and enough extra levels to
        // exercise the landing criterion.
        let need = ((g0 / delta).ln() / (self.d as f64).ln()).ceil() as usize + 8;
        let mut local = *cfg;
        local.depth = cfg.depth.max(need);

        // d-adic offsets: denominator d^t with resolution finer than eps.
        let half = (n_angles / 2).max(1);
        let mut t = 1u32;
        let d128 = self.d as u128;
        let mut den: u128 = d128;
        while (den as f64) < 8.0 * (half as f64 + 1.0) / eps {
            den *= d128;
            t += 1;
        }
        let _ = t;
        let mut sample: Vec<Angle> = vec![theta];
        for j in 1..=half {
            let off = ((eps * j as f64 / (half as f64 + 1.0)) * den as f64).round() as u128;
            if off == 0 || off >= den {
                continue;
            }
            // theta + off/den and theta - off/den, exactly.
            let num = theta.numer();
            let q = theta.denom();
            let plus = Angle::new(num * den + off * q, q * den);
            let minus = Angle::new(num * den + (den - off) * q, q * den);
            for a in [plus, minus] {
                if theta.circ_dist(&a).to_f64() < eps {
                    sample.push(a);
                }
            }
        }
        sample.sort();
        sample.dedup();

        let rays = self.trace_batch(&sample, &local);
        let mut cloud: Vec<Complex64> = Vec::new();
        let mut failed = 0usize;
        for r in &rays {
            if r.fail_reason.is_some() {
                failed += 1;
                continue;
            }
            for p in &r.points {
                if p.potential < delta {
                    cloud.push(p.z);
                }
            }
            if let Some(z) = r.landing_point {
                cloud.push(z);
            }
        }
        let mut diameter = 0.0f64;
        for i in 0..cloud.len() {
            for j in (i + 1)..cloud.len() {
                diameter = diameter.max((cloud[i] - cloud[j]).norm());
            }
        }
        ImpressionSample {
            theta,
            eps,
            delta,
            points: cloud.iter().map(|z| [z.re, z.im]).collect(),
            diameter,
            failed_rays: failed,
        }
    }
}

/// Stability type of a periodic point, by the modulus of its multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityKind {
    Repelling,
    Attracting,
    Indifferent,
    Superattracting,
}

/// A single periodic point with its exact period and multiplier.
#[derive(Clone, Debug)]
pub struct PeriodicPointRec {
    pub z: Complex64,
    pub period: u32,
    pub multiplier: Complex64,
    pub kind: StabilityKind,
}

impl Serialize for PeriodicPointRec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("PeriodicPointRec", 4)?;
        s.serialize_field("z", &[self.z.re, self.z.im])?;
        s.serialize_field("period", &self.period)?;
        s.serialize_field("multiplier", &[self.multiplier.re, self.multiplier.im])?;
        s.serialize_field("kind", &self.kind)?;
        s.end()
    }
}

/// All periodic points of period dividing `n`, with a convergence flag.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodicPoints {
    pub points: Vec<PeriodicPointRec>,
    pub converged: bool,
}

const MULTIPLIER_CLASS_TOL: f64 = 1e-8;
const PERIOD_MATCH_TOL: f64 = 1e-8;

impl Map {
    /// Find all solutions of `f_c^n(z) = z` by Durand-Kerner on the
    /// expanded iterate, label each root with its exact period (smallest
    /// divisor of `n` that fixes it) and the multiplier of its cycle.
    pub fn periodic_points(&self, n: u32) -> Result<PeriodicPoints, DynamicsError> {
        assert!(n >= 1);
        let count = (self.d as f64).powi(n as i32);
        if count > 4096.0 {
            return Err(DynamicsError::PeriodTooLarge(n));
        }
        let p = Poly::iterate_unicritical(self.d, self.c, n).minus_identity();
        let (roots, converged) = all_roots(&p, 1e-13, 600);

        let mut points: Vec<PeriodicPointRec> = roots
            .into_iter()
            .map(|z| {
                let mut period = n;
                for k in 1..=n {
                    if n % k != 0 {
                        continue;
                    }
                    let mut w = z;
                    for _ in 0..k {
                        w = self.apply(w);
                    }
                    if (w - z).norm() < PERIOD_MATCH_TOL * z.norm().max(1.0) {
                        period = k;
                        break;
                    }
                }
                let mut mult = Complex64::new(1.0, 0.0);
                let mut w = z;
                for _ in 0..period {
                    mult *= self.derivative(w);
                    w = self.apply(w);
                }
                let m = mult.norm();
                let kind = if m <= MULTIPLIER_CLASS_TOL {
                    StabilityKind::Superattracting
                } else if m < 1.0 - MULTIPLIER_CLASS_TOL {
                    StabilityKind::Attracting
                } else if m > 1.0 + MULTIPLIER_CLASS_TOL {
                    StabilityKind::Repelling
                } else {
                    StabilityKind::Indifferent
                };
                PeriodicPointRec {
                    z,
                    period,
                    multiplier: mult,
                    kind,
                }
            })
            .collect();
        points.sort_by(|a, b| {
            (a.period, a.z.re, a.z.im)
                .partial_cmp(&(b.period, b.z.re, b.z.im))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(PeriodicPoints { points, converged })
    }
}

/// The period-3 center with positive imaginary part (`f_c^3(0) = 0`),
/// from the cubic `c^3 + 2 c^2 + c + 1 = 0`.
pub fn rabbit_parameter() -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let p = Poly::new(vec![one, one, 2.0 * one, one]);
    let (roots, ok) = all_roots(&p, 1e-14, 200);
    assert!(ok);
    roots
        .into_iter()
        .find(|r| r.im > 0.1)
        .expect("cubic has a root with positive imaginary part")
}

impl fmt::Display for Map {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z^{} + ({})", self.d, self.c)
    }
}
