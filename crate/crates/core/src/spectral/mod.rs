//! Wronskian `D(c)`, its boundary values on the real axis, the source term
//! and the solution `Θ` of the inhomogeneous Sturmian problem.
//!
//! Off the real axis every quantity is computed by direct quadrature. On the
//! real axis the singular integrals are split into a bounded remainder plus
//! closed-form logarithms, and the one-sided limits are assembled from those
//! pieces.

pub mod direct;
pub mod inhomogeneous;
pub mod source;
pub mod wronskian;

pub use direct::{resolvent_fd, stern_min_singular_value, ResolventFd};
pub use inhomogeneous::{
    boundary_coefficients, coefficients, matching_system, residual_inhomogeneous,
    solve_inhomogeneous, BoundaryCoefficients, Coefficients, InhomogeneousSolution,
};
pub use source::SourceData;
pub use wronskian::{
    chi, compute_d, compute_d_with, compute_i, compute_p, compute_sigma, is_excluded,
    WronskianData,
};

use crate::error::Result;
use crate::profiles::{ExtendedProfile, Side, SpectralPoint};
use crate::quad::AdaptiveTol;
use crate::sturmian::{side_grid, solve_homogeneous, HomogeneousSolution, SolveOptions};
use num_complex::Complex64;
use std::sync::Arc;

/// Discretisation and quadrature settings shared by the spectral routines.
#[derive(Clone, Copy, Debug)]
pub struct SpectralOptions {
    /// Nodes per half of the extended domain for the homogeneous solutions.
    pub n_nodes: usize,
    /// Uniform nodes per half of the channel for `Θ` and the source integral.
    pub theta_nodes: usize,
    pub solve: SolveOptions,
    pub quad: AdaptiveTol,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            n_nodes: 1025,
            theta_nodes: 16385,
            solve: SolveOptions::default(),
            quad: AdaptiveTol {
                abs: 1e-14,
                rel: 1e-12,
                max_depth: 50,
                initial_panels: 16,
            },
        }
    }
}

/// The two homogeneous solutions `φ+` on `[0, a+]` and `φ-` on `[a-, 0]`.
#[derive(Clone, Debug)]
pub struct HomogeneousPair {
    pub plus: HomogeneousSolution,
    pub minus: HomogeneousSolution,
}

impl HomogeneousPair {
    pub fn solve(
        ext: &ExtendedProfile,
        alpha: f64,
        c: &SpectralPoint,
        opts: &SpectralOptions,
    ) -> Result<Self> {
        let solve = |side| -> Result<HomogeneousSolution> {
            let grid = Arc::new(side_grid(ext, c, side, opts.n_nodes, None)?);
            solve_homogeneous(ext, alpha, c, side, grid, opts.solve)
        };
        Ok(Self {
            plus: solve(Side::Plus)?,
            minus: solve(Side::Minus)?,
        })
    }

    pub fn side(&self, side: Side) -> &HomogeneousSolution {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    pub fn phi0(&self) -> (Complex64, Complex64) {
        (self.plus.phi_at_zero(), self.minus.phi_at_zero())
    }
}

/// Half of the channel as increasing integration limits: `[0, 1]` or `[-1, 0]`.
pub(crate) fn half_interval(side: Side) -> (f64, f64) {
    match side {
        Side::Plus => (0.0, 1.0),
        Side::Minus => (-1.0, 0.0),
    }
}

/// `l(x) = ln(e + 1/|x|)`.
pub fn log_weight(x: Complex64) -> f64 {
    (std::f64::consts::E + 1.0 / x.norm()).ln()
}
