//! Right-hand side `F(y, c)` of the inhomogeneous Sturmian equation built
//! from polynomial initial data.
//!
//! `F = c G1 - φ0(0) f / b³`. Near the centre, where the cutoff is identically
//! one, `f` is a polynomial in `y` with a triple root at zero, so `f / b³` is
//! evaluated as `(f / y³) / (b / y)³` after exact division by `y³`. Elsewhere
//! `b` is bounded away from zero and the quotient is taken directly.

use crate::error::{Error, Result};
use crate::poly::{CPoly, Poly};
use crate::profiles::{BackgroundProfile, ExtendedProfile};
use crate::smooth::source_cutoff;
use num_complex::Complex64;

/// Half-width of the region where the cutoff equals one.
const PLATEAU: f64 = 0.5;

/// Initial data of one Fourier mode and the derived source terms.
#[derive(Clone, Debug)]
pub struct SourceData {
    pub alpha: f64,
    pub psi0: CPoly,
    pub phi0: CPoly,
    /// `f = f_c0 + c f_c1` on the plateau, each divided by `y³`.
    f_c0: Poly,
    f_c1: Poly,
    /// Largest coefficient dropped by the division by `y³`.
    division_remainder: f64,
    b_over_y: Poly,
    /// `(φ0(y) - φ0(0)) / y`.
    phi0_quotient: CPoly,
}

impl SourceData {
    pub fn new(profile: &BackgroundProfile, alpha: f64, psi0: CPoly, phi0: CPoly) -> Result<Self> {
        if !(alpha.is_finite() && alpha != 0.0) {
            return Err(Error::InvalidInput("alpha must be finite and nonzero".into()));
        }
        let u = profile.u();
        let b = profile.b();
        if u.coeff(0) != 0.0 || b.coeff(0) != 0.0 {
            return Err(Error::Assumption("u(0) and b(0) must vanish".into()));
        }
        let (f0, f1) = plateau_f(u, b, alpha);
        let (q0, r0) = f0.div_by_monomial(3);
        let (q1, r1) = f1.div_by_monomial(3);
        let scale = f0.max_abs_coeff().max(f1.max_abs_coeff()).max(1.0);
        let remainder = r0.iter().chain(&r1).fold(0.0f64, |m, r| m.max(r.abs()));
        if remainder > 1e-12 * scale {
            return Err(Error::Mismatch(format!(
                "f has no triple root at 0 (remainder {remainder:e})"
            )));
        }
        let (b_over_y, _) = b.div_by_monomial(1);
        Ok(Self {
            alpha,
            phi0_quotient: phi0.difference_quotient_at_zero(),
            psi0,
            phi0,
            f_c0: q0,
            f_c1: q1,
            division_remainder: remainder,
            b_over_y,
        })
    }

    pub fn phi0_at_0(&self) -> Complex64 {
        self.phi0.coeff(0)
    }

    /// Coefficient magnitude discarded when dividing `f` by `y³`; zero up to
    /// rounding.
    pub fn division_remainder(&self) -> f64 {
        self.division_remainder
    }

    /// `ω0 = -(ψ0'' - α² ψ0)` on `[-1, 1]`, zero outside.
    pub fn omega0(&self, y: f64) -> Complex64 {
        if y.abs() > 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        -(self.psi0.eval_deriv(y, 2) - self.psi0.eval(y) * (self.alpha * self.alpha))
    }

    /// `j0 = -(φ0'' - α² φ0)`.
    pub fn j0(&self, y: f64) -> Complex64 {
        -(self.phi0.eval_deriv(y, 2) - self.phi0.eval(y) * (self.alpha * self.alpha))
    }

    /// `f(α, y, c) / b(y)³`.
    pub fn f_over_b3(&self, ext: &ExtendedProfile, y: f64, c: Complex64) -> Complex64 {
        if y.abs() <= PLATEAU {
            let q = self.b_over_y.eval(y);
            let num = Complex64::new(self.f_c0.eval(y), 0.0) + c * self.f_c1.eval(y);
            return num / (q * q * q);
        }
        let b = ext.b(y, 0);
        f_general(ext, self.alpha, y, c) / (b * b * b)
    }

    /// `g = (φ0(y) - φ0(0)) / b(y)` with two derivatives.
    fn g(&self, ext: &ExtendedProfile, y: f64) -> [Complex64; 3] {
        if y.abs() <= 1.0 {
            let p = &self.phi0_quotient;
            let q = &self.b_over_y;
            complex_quotient(
                [p.eval(y), p.eval_deriv(y, 1), p.eval_deriv(y, 2)],
                [q.eval(y), q.eval_deriv(y, 1), q.eval_deriv(y, 2)],
            )
        } else {
            let p = &self.phi0;
            complex_quotient(
                [p.eval(y) - p.coeff(0), p.eval_deriv(y, 1), p.eval_deriv(y, 2)],
                [ext.b(y, 0), ext.b(y, 1), ext.b(y, 2)],
            )
        }
    }

    /// `G1 = ω0 - (u - c)(g'' - α² g) + u'' g`.
    pub fn g1(&self, ext: &ExtendedProfile, y: f64, c: Complex64) -> Complex64 {
        let [g, _, g2] = self.g(ext, y);
        let a2 = self.alpha * self.alpha;
        self.omega0(y) - (ext.u(y, 0) - c) * (g2 - g * a2) + g * ext.u(y, 2)
    }

    /// `F(y, c) = c G1(y, c) - φ0(0) f(y, c) / b(y)³`.
    pub fn eval(&self, ext: &ExtendedProfile, y: f64, c: Complex64) -> Complex64 {
        c * self.g1(ext, y, c) - self.phi0_at_0() * self.f_over_b3(ext, y, c)
    }

    /// `F(·, c)` at the given nodes.
    pub fn build(&self, ext: &ExtendedProfile, nodes: &[f64], c: Complex64) -> Vec<Complex64> {
        nodes.iter().map(|&y| self.eval(ext, y, c)).collect()
    }

    /// The plateau polynomial `f(α, ·, c)` itself, before division.
    pub fn plateau_f(&self, c: Complex64) -> CPoly {
        let cube = Poly::new(vec![0.0, 0.0, 0.0, 1.0]);
        let a = &self.f_c0 * &cube;
        let b = &self.f_c1 * &cube;
        let n = a.coeffs().len().max(b.coeffs().len());
        CPoly::new((0..n).map(|k| Complex64::new(a.coeff(k), 0.0) + c * b.coeff(k)).collect())
    }
}

/// `f = f0 + c f1` where the cutoff is one.
fn plateau_f(u: &Poly, b: &Poly, alpha: f64) -> (Poly, Poly) {
    let a2 = alpha * alpha;
    let u1 = u.derivative();
    let u2 = u1.derivative();
    let b1 = b.derivative();
    let b2 = b1.derivative();
    let uu = u * u;
    let bb = b * b;
    let b1b1 = &b1 * &b1;
    let f0 = &(&(&(&(&uu * &b1b1).scale(2.0) - &(&(b * &uu) * &b2))
        - &(&(&(b * u) * &u1) * &b1).scale(2.0))
        - &(&bb * &uu).scale(a2))
        + &(&(&(&bb * b) * &b2) + &(&bb * &bb).scale(a2));
    let f1 = &(&(&(&(u * &b1b1).scale(-2.0) + &(&(b * u) * &b2))
        + &(&(b * &u1) * &b1).scale(2.0))
        + &(&bb * u).scale(a2))
        - &(&bb * &u2);
    (f0, f1)
}

/// `f(α, y, c)` from the full expression with the cutoff and its derivatives.
fn f_general(ext: &ExtendedProfile, alpha: f64, y: f64, c: Complex64) -> Complex64 {
    let a2 = alpha * alpha;
    let [chi, chi1, chi2] = source_cutoff(y);
    let (u, u1, u2) = (ext.u(y, 0), ext.u(y, 1), ext.u(y, 2));
    let (b, b1, b2) = (ext.b(y, 0), ext.b(y, 1), ext.b(y, 2));
    let w = u - c;
    let k = c + w * chi;
    let t1 = w * k * (2.0 * b1 * b1);
    let t2 = -(w * k * b2 + w * (w * chi1 + u1 * chi) * (2.0 * b1)) * b;
    let t3 = -(w * k * a2 - w * w * chi2 + c * u2 - w * (2.0 * u1 * chi1)) * (b * b);
    let t4 = b * b * b * b2 * chi + b * b * b * b * (a2 * chi - chi2);
    t1 + t2 + t3 + t4
}

/// Quotient rule for a complex numerator over a real denominator.
fn complex_quotient(num: [Complex64; 3], den: [f64; 3]) -> [Complex64; 3] {
    let [n, n1, n2] = num;
    let [d, d1, d2] = den;
    let q = n / d;
    let q1 = (n1 - q * d1) / d;
    let q2 = (n2 - q1 * (2.0 * d1) - q * d2) / d;
    [q, q1, q2]
}
