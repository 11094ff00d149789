//! Brute-force finite-difference counterparts of the spectral constructions,
//! used as independent oracles.

use super::source::SourceData;
use crate::error::{Error, Result};
use crate::profiles::{eval_h, ExtendedProfile};
use crate::smooth::source_cutoff;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Output of [`resolvent_fd`] on the uniform grid of `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct ResolventFd {
    pub y: Vec<f64>,
    pub psi: Vec<Complex64>,
    pub phi: Vec<Complex64>,
    /// `b Θ = c Φ - φ0(0) χ`, which stays bounded at `y = 0`.
    pub b_theta: Vec<Complex64>,
}

/// Solves the resolvent system for `(Ψ, Φ)` with Dirichlet conditions by
/// second-order differences and a dense LU factorisation.
pub fn resolvent_fd(
    ext: &ExtendedProfile,
    src: &SourceData,
    c: Complex64,
    n: usize,
) -> Result<ResolventFd> {
    if n < 5 {
        return Err(Error::InvalidInput("resolvent grid needs at least 5 nodes".into()));
    }
    let h = 2.0 / (n - 1) as f64;
    let y: Vec<f64> = (0..n).map(|k| -1.0 + h * k as f64).collect();
    let m = n - 2;
    let a2 = src.alpha * src.alpha;
    let one = Complex64::new(1.0, 0.0);
    let mut a = DMatrix::<Complex64>::zeros(2 * m, 2 * m);
    let mut rhs = DVector::<Complex64>::zeros(2 * m);
    // unknown layout: Ψ_k at 2k, Φ_k at 2k+1 for interior node k+1
    let psi = |k: usize| 2 * k;
    let phi = |k: usize| 2 * k + 1;
    let (h2, h1) = (1.0 / (h * h), 0.5 / h);
    for k in 0..m {
        let yk = y[k + 1];
        let (u, u1, u2) = (ext.u(yk, 0), ext.u(yk, 1), ext.u(yk, 2));
        let (b, b1, b2) = (ext.b(yk, 0), ext.b(yk, 1), ext.b(yk, 2));
        // Δ and ∂ stencils: (offset, weight for Δ, weight for ∂)
        let stencil = [(-1i64, h2, -h1), (0, -2.0 * h2 - a2, 0.0), (1, h2, h1)];
        let (r1, r2) = (2 * k, 2 * k + 1);
        for (off, lap, d) in stencil {
            let j = k as i64 + off;
            if j < 0 || j >= m as i64 {
                continue;
            }
            let j = j as usize;
            // (u - c) ΔΨ - u'' Ψ - b ΔΦ + b'' Φ = ω0
            a[(r1, psi(j))] += (u - c) * lap;
            a[(r1, phi(j))] += one * (-b * lap);
            // -c ΔΦ - b ΔΨ - b'' Ψ + 2u' Φ' + u ΔΦ + u'' Φ - 2b' Ψ' = j0
            a[(r2, phi(j))] += (u - c) * lap + 2.0 * u1 * d;
            a[(r2, psi(j))] += one * (-b * lap - 2.0 * b1 * d);
            if off == 0 {
                a[(r1, psi(j))] -= u2;
                a[(r1, phi(j))] += b2;
                a[(r2, psi(j))] -= b2;
                a[(r2, phi(j))] += u2;
            }
        }
        rhs[r1] = src.omega0(yk);
        rhs[r2] = src.j0(yk);
    }
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Mismatch("resolvent matrix is singular".into()))?;
    let zero = Complex64::new(0.0, 0.0);
    let mut psi_v = vec![zero; n];
    let mut phi_v = vec![zero; n];
    for k in 0..m {
        psi_v[k + 1] = sol[psi(k)];
        phi_v[k + 1] = sol[phi(k)];
    }
    let p0 = src.phi0_at_0();
    let b_theta = y
        .iter()
        .zip(&phi_v)
        .map(|(&yk, &f)| c * f - p0 * source_cutoff(yk)[0])
        .collect();
    Ok(ResolventFd {
        y,
        psi: psi_v,
        phi: phi_v,
        b_theta,
    })
}

/// Smallest singular value of the conservative difference operator
/// `Ψ ↦ (H Ψ')' - α² H Ψ` with Dirichlet conditions on `n` nodes of `[-1, 1]`.
pub fn stern_min_singular_value(
    ext: &ExtendedProfile,
    alpha: f64,
    c: Complex64,
    n: usize,
) -> Result<f64> {
    if n < 4 {
        return Err(Error::InvalidInput("operator grid needs at least 4 nodes".into()));
    }
    let h = 2.0 / (n - 1) as f64;
    let m = n - 2;
    let a2 = alpha * alpha;
    let mut a = DMatrix::<Complex64>::zeros(m, m);
    for k in 0..m {
        let yk = -1.0 + h * (k + 1) as f64;
        let hl = eval_h(ext, yk - 0.5 * h, c) / (h * h);
        let hr = eval_h(ext, yk + 0.5 * h, c) / (h * h);
        a[(k, k)] = -hl - hr - eval_h(ext, yk, c) * a2;
        if k > 0 {
            a[(k, k - 1)] = hl;
        }
        if k + 1 < m {
            a[(k, k + 1)] = hr;
        }
    }
    let sv = a.singular_values();
    Ok(sv.iter().copied().fold(f64::INFINITY, f64::min))
}
