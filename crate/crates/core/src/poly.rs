//! Dense polynomials with ascending coefficients.
//!
//! Real polynomials carry the background fields; complex ones carry the
//! initial data of a Fourier mode.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `y`.
    pub fn identity() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(&c) if c == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `y^k` (zero past the degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * y + c)
    }

    /// Value of the `order`-th derivative at `y`.
    pub fn eval_deriv(&self, y: f64, order: usize) -> f64 {
        let mut acc = 0.0;
        for k in (order..self.coeffs.len()).rev() {
            acc = acc * y + self.coeffs[k] * falling(k, order);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Quotient by `y^k`; the dropped low coefficients are returned as the
    /// remainder so callers can check exact divisibility.
    pub fn div_by_monomial(&self, k: usize) -> (Self, Vec<f64>) {
        let rem: Vec<f64> = (0..k).map(|i| self.coeff(i)).collect();
        let quot = if self.coeffs.len() > k {
            self.coeffs[k..].to_vec()
        } else {
            Vec::new()
        };
        (Self::new(quot), rem)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

fn falling(k: usize, order: usize) -> f64 {
    ((k - order + 1)..=k).fold(1.0, |acc, j| acc * j as f64)
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

/// Polynomial with complex coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct CPoly {
    coeffs: Vec<Complex64>,
}

impl CPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut coeffs = coeffs;
        while matches!(coeffs.last(), Some(c) if *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * y + c)
    }

    pub fn eval_deriv(&self, y: f64, order: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (order..self.coeffs.len()).rev() {
            acc = acc * y + self.coeffs[k] * falling(k, order);
        }
        acc
    }

    /// `(p(y) - p(0)) / y` as a polynomial.
    pub fn difference_quotient_at_zero(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::new(Vec::new());
        }
        Self::new(self.coeffs[1..].to_vec())
    }

    /// Taylor polynomial of degree `deg` about `y0`, expressed in powers of `(y - y0)`.
    pub fn taylor_at(&self, y0: f64, deg: usize) -> Vec<Complex64> {
        let mut fact = 1.0;
        (0..=deg)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                self.eval_deriv(y0, k) / fact
            })
            .collect()
    }
}

/// Quotient of two real polynomials with a nonvanishing denominator, evaluated
/// together with its first two derivatives.
pub fn quotient_derivs(num: [f64; 3], den: [f64; 3]) -> [f64; 3] {
    let [n, n1, n2] = num;
    let [d, d1, d2] = den;
    let q = n / d;
    let q1 = (n1 - q * d1) / d;
    let q2 = (n2 - 2.0 * q1 * d1 - q * d2) / d;
    [q, q1, q2]
}
