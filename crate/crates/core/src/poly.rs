//! Dense complex polynomials and simultaneous root finding.

use num_complex::Complex64;

/// Polynomial with coefficients in increasing degree order
/// (`coeffs[k]` multiplies `z^k`). The leading coefficient is nonzero.
#[derive(Clone, Debug)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().unwrap().norm() == 0.0 {
            coeffs.pop();
        }
        assert!(!coeffs.is_empty());
        Poly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    fn powi(&self, e: u32) -> Poly {
        let mut out = Poly::new(vec![Complex64::new(1.0, 0.0)]);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Coefficients of the `n`-th iterate of `z -> z^d + c`.
    pub fn iterate_unicritical(d: u32, c: Complex64, n: u32) -> Poly {
        let mut p = Poly::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        for _ in 0..n {
            let mut q = p.powi(d);
            q.coeffs[0] += c;
            p = q;
        }
        p
    }

    /// `self - z`.
    pub fn minus_identity(mut self) -> Poly {
        if self.coeffs.len() < 2 {
            self.coeffs.resize(2, Complex64::new(0.0, 0.0));
        }
        self.coeffs[1] -= 1.0;
        Poly::new(self.coeffs)
    }
}

/// All roots by Durand-Kerner (Weierstrass) simultaneous iteration.
///
/// Returns the root estimates and whether the iteration met `tol`
/// within `max_sweeps` sweeps. Multiple roots converge slowly and may
/// come back flagged unconverged.
pub fn all_roots(p: &Poly, tol: f64, max_sweeps: usize) -> (Vec<Complex64>, bool) {
    let n = p.degree();
    if n == 0 {
        return (Vec::new(), true);
    }
    let lead = *p.coeffs.last().unwrap();
    let monic: Vec<Complex64> = p.coeffs.iter().map(|c| c / lead).collect();
    let monic = Poly::new(monic);

    // Cauchy bound for the root radius.
    let radius = 1.0
        + monic.coeffs[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);

    // Initial guesses on a circle, rotated off the axes to dodge
    // symmetric stalemates.
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(radius * 0.8, t)
        })
        .collect();

    for _ in 0..max_sweeps {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                // Coincident estimates: nudge and retry next sweep.
                z[i] += Complex64::new(1e-8, 1e-8);
                max_step = f64::INFINITY;
                continue;
            }
            let step = monic.eval(z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < tol {
            return (z, true);
        }
    }
    (z, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn iterate_expansion_matches_direct_evaluation() {
        let d = 2;
        let cc = c(-0.3, 0.4);
        let p = Poly::iterate_unicritical(d, cc, 4);
        assert_eq!(p.degree(), 16);
        for z in [c(0.2, 0.1), c(-1.0, 0.5), c(0.0, 0.0)] {
            let mut w = z;
            for _ in 0..4 {
                w = w * w + cc;
            }
            assert!((p.eval(z) - w).norm() < 1e-9);
        }
    }

    #[test]
    fn roots_of_known_quadratic() {
        // z^2 - z - 1: golden ratio pair.
        let p = Poly::new(vec![c(-1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
        let (roots, ok) = all_roots(&p, 1e-12, 200);
        assert!(ok);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let mut got: Vec<f64> = roots.iter().map(|r| r.re).collect();
        got.sort_by(f64::total_cmp);
        assert!((got[0] - (1.0 - phi)).abs() < 1e-9);
        assert!((got[1] - phi).abs() < 1e-9);
    }

    #[test]
    fn roots_of_unity() {
        let mut coeffs = vec![c(-1.0, 0.0)];
        coeffs.extend(std::iter::repeat(c(0.0, 0.0)).take(7));
        coeffs.push(c(1.0, 0.0));
        let p = Poly::new(coeffs);
        let (roots, ok) = all_roots(&p, 1e-12, 400);
        assert!(ok);
        for r in roots {
            assert!((r.norm() - 1.0).abs() < 1e-9);
            assert!(p.eval(r).norm() < 1e-8);
        }
    }
}
