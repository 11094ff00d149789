//! Homogeneous solutions of `(H φ')' = α² H φ` normalised at the critical
//! layer by `φ(y_c) = 1`, `φ'(y_c) = 0`.
//!
//! The equation is rewritten as the Volterra fixed point
//! `φ = 1 + α² S0 S1 φ`, where `S1 f(y) = ∫ H(z) f(z) dz / H(y)` over
//! `[y_c, y]` and `S0` integrates from `y_c`. Both integrals act on the
//! piecewise-cubic interpolant and are accumulated interval by interval, so
//! one application costs `O(n)`. The quotient in `S1` is bounded at the
//! critical layer because the numerator vanishes to one order more than `H`.

use crate::error::{Error, Result};
use crate::grid::{Clustering, Grid, GridSpec};
use crate::profiles::{eval_h, ExtendedProfile, Side, SpectralPoint};
use crate::quad::GaussLegendre;
use num_complex::Complex64;
use std::sync::Arc;

/// Gauss-Legendre order per grid interval inside `S1`.
pub const S1_ORDER: usize = 6;

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Grid for one half of the extended domain, with the critical layer and the
/// wall as breakpoints.
pub fn side_grid(
    ext: &ExtendedProfile,
    c: &SpectralPoint,
    side: Side,
    n_nodes: usize,
    cluster_ratio: Option<f64>,
) -> Result<Grid> {
    let y_c = c.y_c(side);
    let (lo, hi) = match side {
        Side::Plus => (0.0, ext.a_plus),
        Side::Minus => (ext.a_minus, 0.0),
    };
    let clustering = match cluster_ratio {
        Some(ratio) => Clustering::Critical { center: y_c, ratio },
        None => Clustering::Uniform,
    };
    let spec = GridSpec {
        n_nodes,
        lo,
        hi,
        clustering,
    };
    Grid::new(spec, &[y_c, side.wall()])
}

/// `S1` on a grid: `G = ∫_{y_c}^y H f` accumulated interval by interval from
/// the critical layer, then divided by `H(y)`.
#[derive(Clone, Debug)]
pub struct S1Operator {
    /// Per interval: stencil start and the weights of `∫ H f` over the
    /// interval applied to the cubic interpolant of `f`.
    intervals: Vec<(usize, [Complex64; 4])>,
    inv_h: Vec<Complex64>,
    y_c_index: usize,
}

impl S1Operator {
    pub fn new(ext: &ExtendedProfile, c: Complex64, y_c: f64, grid: &Grid) -> Result<Self> {
        let gl = GaussLegendre::new(S1_ORDER);
        let nodes = grid.nodes();
        let y_c_index = grid.nearest(y_c);
        let mut intervals = Vec::with_capacity(nodes.len().saturating_sub(1));
        for i in 0..nodes.len() - 1 {
            let (a, b) = (nodes[i], nodes[i + 1]);
            let mid = 0.5 * (a + b);
            let (j0, _) = grid.stencil(mid);
            let mut w = [Complex64::new(0.0, 0.0); 4];
            for (&t, &gw) in gl.nodes.iter().zip(&gl.weights) {
                let z = a + t * (b - a);
                let (jz, lw) = grid.stencil(z);
                debug_assert_eq!(jz, j0);
                let k = eval_h(ext, z, c) * (gw * (b - a));
                for m in 0..4 {
                    w[m] += k * lw[m];
                }
            }
            intervals.push((j0, w));
        }
        let mut inv_h = Vec::with_capacity(nodes.len());
        for (k, &y) in nodes.iter().enumerate() {
            if k == y_c_index {
                // G vanishes to second order where H vanishes to first
                inv_h.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let hy = eval_h(ext, y, c);
            if hy.norm() < 1e-300 {
                return Err(Error::SpectralParameter(format!(
                    "H vanishes at y = {y} away from the critical layer"
                )));
            }
            inv_h.push(1.0 / hy);
        }
        Ok(Self {
            intervals,
            inv_h,
            y_c_index,
        })
    }

    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.inv_h.len();
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        let piece = |i: usize| {
            let (j0, w) = &self.intervals[i];
            (0..4).map(|m| w[m] * f[j0 + m]).sum::<Complex64>()
        };
        for i in self.y_c_index..n - 1 {
            g[i + 1] = g[i] + piece(i);
        }
        for i in (0..self.y_c_index).rev() {
            g[i] = g[i + 1] - piece(i);
        }
        g.iter().zip(&self.inv_h).map(|(a, b)| a * b).collect()
    }
}

/// `S0 f(y) = ∫_{y_c}^y f`, by exact integration of the cubic interpolant.
pub fn apply_s0(grid: &Grid, f: &[Complex64], y_c_index: usize) -> Vec<Complex64> {
    grid.cumulative_from(f, y_c_index)
}

/// `φ±(·, c)` and its derivative on one half of the domain.
#[derive(Clone, Debug)]
pub struct HomogeneousSolution {
    pub side: Side,
    pub alpha: f64,
    pub c: SpectralPoint,
    pub grid: Arc<Grid>,
    pub phi: Vec<Complex64>,
    pub dphi: Vec<Complex64>,
    /// `φ - 1`, kept separately for accuracy near the critical layer.
    pub deviation: Vec<Complex64>,
    pub iterations: usize,
    pub final_update_norm: f64,
    pub update_history: Vec<f64>,
    y_c_index: usize,
}

impl HomogeneousSolution {
    pub fn y_c(&self) -> f64 {
        self.c.y_c(self.side)
    }

    pub fn y_c_index(&self) -> usize {
        self.y_c_index
    }

    pub fn phi_at(&self, y: f64) -> Complex64 {
        Complex64::new(1.0, 0.0) + self.grid.interp(&self.deviation, y)
    }

    pub fn dphi_at(&self, y: f64) -> Complex64 {
        self.grid.interp(&self.dphi, y)
    }

    pub fn deviation_at(&self, y: f64) -> Complex64 {
        self.grid.interp(&self.deviation, y)
    }

    /// Index of the node at `y = 0`.
    pub fn zero_index(&self) -> usize {
        match self.side {
            Side::Plus => 0,
            Side::Minus => self.grid.len() - 1,
        }
    }

    pub fn phi_at_zero(&self) -> Complex64 {
        self.phi[self.zero_index()]
    }

    pub fn dphi_at_zero(&self) -> Complex64 {
        self.dphi[self.zero_index()]
    }

    /// CSV rows `y, re_phi, im_phi, re_dphi, im_dphi`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("y,re_phi,im_phi,re_dphi,im_dphi\n");
        for ((y, p), d) in self.grid.nodes().iter().zip(&self.phi).zip(&self.dphi) {
            s.push_str(&format!("{y:e},{:e},{:e},{:e},{:e}\n", p.re, p.im, d.re, d.im));
        }
        s
    }
}

/// Picard iteration `φ ← 1 + α² S0 S1 φ` on a prepared grid.
pub fn solve_homogeneous(
    ext: &ExtendedProfile,
    alpha: f64,
    c: &SpectralPoint,
    side: Side,
    grid: Arc<Grid>,
    opts: SolveOptions,
) -> Result<HomogeneousSolution> {
    if !(alpha.is_finite() && alpha != 0.0) {
        return Err(Error::InvalidInput("alpha must be finite and nonzero".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let y_c = c.y_c(side);
    let y_c_index = grid.nearest(y_c);
    if (grid.nodes()[y_c_index] - y_c).abs() > 1e-9 * (grid.hi() - grid.lo()) {
        return Err(Error::InvalidInput(format!(
            "critical layer {y_c} is not a grid node"
        )));
    }
    let cval = c.c();
    let s1 = S1Operator::new(ext, cval, y_c, &grid)?;
    let a2 = alpha * alpha;
    let n = grid.len();
    let one = Complex64::new(1.0, 0.0);
    let mut dev = vec![Complex64::new(0.0, 0.0); n];
    let mut phi = vec![one; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let inner = s1.apply(&phi);
        let new_dev: Vec<Complex64> = apply_s0(&grid, &inner, y_c_index)
            .into_iter()
            .map(|v| v * a2)
            .collect();
        let update = new_dev
            .iter()
            .zip(&dev)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        dev = new_dev;
        phi = dev.iter().map(|d| one + d).collect();
        history.push(update);
        let scale = phi.iter().map(|p| p.norm()).fold(1.0, f64::max);
        if update < opts.tol * scale {
            break;
        }
        if iterations >= opts.max_iter || !update.is_finite() {
            return Err(Error::NoConvergence {
                iterations,
                update,
            });
        }
    }
    let dphi: Vec<Complex64> = s1.apply(&phi).into_iter().map(|v| v * a2).collect();
    Ok(HomogeneousSolution {
        side,
        alpha,
        c: *c,
        grid,
        phi,
        dphi,
        deviation: dev,
        iterations,
        final_update_norm: *history.last().unwrap(),
        update_history: history,
        y_c_index,
    })
}

/// Convenience wrapper: uniform side grid with `n_nodes` and default options.
pub fn solve_side(
    ext: &ExtendedProfile,
    alpha: f64,
    c: &SpectralPoint,
    side: Side,
    n_nodes: usize,
) -> Result<HomogeneousSolution> {
    let grid = Arc::new(side_grid(ext, c, side, n_nodes, None)?);
    solve_homogeneous(ext, alpha, c, side, grid, SolveOptions::default())
}

/// Max over interior nodes of `|(H φ')' - α² H φ| / (1 + |α² H φ|)`, with a
/// fourth-order central difference and a two-node collar around `y_c`.
pub fn residual_homogeneous(sol: &HomogeneousSolution, ext: &ExtendedProfile) -> f64 {
    let nodes = sol.grid.nodes();
    let c = sol.c.c();
    let a2 = sol.alpha * sol.alpha;
    let h: Vec<Complex64> = nodes.iter().map(|&y| eval_h(ext, y, c)).collect();
    let g: Vec<Complex64> = h.iter().zip(&sol.dphi).map(|(a, b)| a * b).collect();
    let mut worst: f64 = 0.0;
    for j in 2..nodes.len().saturating_sub(2) {
        if j.abs_diff(sol.y_c_index) <= 2 {
            continue;
        }
        let dx = nodes[j + 1] - nodes[j];
        let uniform = (j - 2..j + 2).all(|k| ((nodes[k + 1] - nodes[k]) - dx).abs() <= 1e-9 * dx);
        if !uniform {
            continue;
        }
        let dg = (g[j - 2] - g[j - 1] * 8.0 + g[j + 1] * 8.0 - g[j + 2]) / (12.0 * dx);
        let rhs = h[j] * sol.phi[j] * a2;
        worst = worst.max((dg - rhs).norm() / (1.0 + rhs.norm()));
    }
    worst
}
