//! Final state of the magnetic field: the functions `b Γ±`, the limiting
//! profiles `ψ∞`, `φ∞`, the logarithmic blowup diagnostic at `y = 0`, and an
//! independent route to `φ∞` through the resolvent at `c = 0`.
//!
//! `Γ±` itself behaves like `1/y` at the centre, so only the product `b Γ±`
//! is ever tabulated. Its integral starts at the wall and never crosses the
//! singularity.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::profiles::{eval_h, ExtendedProfile, Side, SpectralPoint};
use crate::quad::{adaptive_gauss, cumulative_gauss, cumulative_nested, AdaptiveTol};
use crate::smooth::source_cutoff;
use crate::spectral::SourceData;
use crate::sturmian::{side_grid, solve_homogeneous, HomogeneousSolution, SolveOptions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Gauss order per output interval; high enough that the `1/y²` kernel on
/// the intervals next to the centre is integrated to rounding.
const OUTPUT_ORDER: usize = 16;
/// Dyadic sample points `2^-k` for the logarithmic slope fit.
const SLOPE_LEVELS: std::ops::RangeInclusive<i32> = 4..=14;

#[derive(Clone, Copy, Debug)]
pub struct IslandOptions {
    /// Nodes per half of the extended domain for `φ±` at `c = 0`.
    pub n_nodes: usize,
    /// Nodes of the uniform output grid on `[-1, 1]`; must be odd.
    pub n_output: usize,
    pub solve: SolveOptions,
    pub quad: AdaptiveTol,
}

impl Default for IslandOptions {
    fn default() -> Self {
        Self {
            n_nodes: 2049,
            n_output: 2001,
            solve: SolveOptions::default(),
            quad: AdaptiveTol {
                abs: 1e-15,
                rel: 1e-13,
                max_depth: 60,
                initial_panels: 16,
            },
        }
    }
}

impl IslandOptions {
    fn check(&self) -> Result<()> {
        if self.n_output < 5 || self.n_output % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "output grid needs an odd node count >= 5, got {}",
                self.n_output
            )));
        }
        Ok(())
    }

    /// Output nodes of one half ordered by increasing `y`.
    fn half_nodes(&self, side: Side) -> Vec<f64> {
        let m = (self.n_output - 1) / 2;
        let h = 1.0 / m as f64;
        match side {
            Side::Plus => (0..=m).map(|k| k as f64 * h).collect(),
            Side::Minus => (0..=m).map(|k| -1.0 + k as f64 * h).collect(),
        }
    }
}

fn lead(p: &Poly) -> (f64, f64) {
    (p.coeff(1), 2.0 * p.coeff(2))
}

/// `(u'(0)² - b'(0)²) / b'(0)`.
fn gamma_constant(ext: &ExtendedProfile) -> f64 {
    let (u1, _) = lead(ext.base().u());
    let (b1, _) = lead(ext.base().b());
    (u1 * u1 - b1 * b1) / b1
}

/// `Γ±` on one half through `b Γ±`.
#[derive(Clone, Debug)]
pub struct GammaSide {
    pub side: Side,
    pub alpha: f64,
    /// `(u'(0)² - b'(0)²) / b'(0)`.
    pub scale: f64,
    /// `φ±` at `c = 0`.
    pub phi: HomogeneousSolution,
    quad: AdaptiveTol,
}

impl GammaSide {
    fn kernel(&self, ext: &ExtendedProfile, y: f64) -> Complex64 {
        let p = self.phi.phi_at(y);
        1.0 / (eval_h(ext, y, Complex64::new(0.0, 0.0)) * p * p)
    }

    /// `∫_{wall}^y dz / ((u² - b²) φ²)` for `y` on this side, `y ≠ 0`.
    fn integral(&self, ext: &ExtendedProfile, y: f64) -> Result<f64> {
        // the interpolant of φ is piecewise cubic, so split at its nodes
        let splits = self.phi.grid.nodes();
        let r = adaptive_gauss(|z| self.kernel(ext, z), self.side.wall(), y, splits, self.quad);
        if !r.converged {
            return Err(Error::Quadrature(format!("Gamma integral at {y} did not converge")));
        }
        Ok(r.value.re)
    }

    fn check_side(&self, y: f64) -> Result<()> {
        if y * self.side.wall() < 0.0 || y.abs() > 1.0 {
            return Err(Error::OutOfDomain {
                what: "y",
                value: y,
                lo: self.side.wall().min(0.0),
                hi: self.side.wall().max(0.0),
            });
        }
        Ok(())
    }

    /// `b(y) Γ(y)`, with the limit `-1` at `y = 0`.
    pub fn b_gamma_at(&self, ext: &ExtendedProfile, y: f64) -> Result<f64> {
        self.check_side(y)?;
        if y == 0.0 {
            return Ok(-1.0);
        }
        let j = self.integral(ext, y)?;
        Ok(ext.b(y, 0) * self.phi.phi_at(y).re * self.scale * j)
    }

    /// `∂_y (b Γ)` at `y ≠ 0`.
    pub fn d_b_gamma_at(&self, ext: &ExtendedProfile, y: f64) -> Result<f64> {
        self.check_side(y)?;
        if y == 0.0 {
            return Err(Error::InvalidInput("derivative of b Gamma is singular at 0".into()));
        }
        let j = self.integral(ext, y)?;
        let (b, b1) = (ext.b(y, 0), ext.b(y, 1));
        let phi = self.phi.phi_at(y).re;
        let dphi = self.phi.dphi_at(y).re;
        let h = eval_h(ext, y, Complex64::new(0.0, 0.0)).re;
        Ok(self.scale * ((b1 * phi + b * dphi) * j + b / (h * phi)))
    }

    /// `b Γ` on increasing nodes of this half (which include `0` and the wall).
    pub fn b_gamma_on(&self, ext: &ExtendedProfile, nodes: &[f64]) -> Vec<f64> {
        let (zero, wall) = match self.side {
            Side::Plus => (0, nodes.len() - 1),
            Side::Minus => (nodes.len() - 1, 0),
        };
        let j = cumulative_gauss(nodes, wall, OUTPUT_ORDER, |z| self.kernel(ext, z));
        nodes
            .iter()
            .zip(&j)
            .enumerate()
            .map(|(k, (&y, jk))| {
                if k == zero {
                    -1.0
                } else {
                    ext.b(y, 0) * self.phi.phi_at(y).re * self.scale * jk.re
                }
            })
            .collect()
    }
}

fn solve_at_zero(
    ext: &ExtendedProfile,
    alpha: f64,
    side: Side,
    opts: &IslandOptions,
) -> Result<HomogeneousSolution> {
    let sp = SpectralPoint::real(ext, 0.0)?;
    let grid = Arc::new(side_grid(ext, &sp, side, opts.n_nodes, None)?);
    solve_homogeneous(ext, alpha, &sp, side, grid, opts.solve)
}

/// `Γ±` for one side: `φ±` at `c = 0` and the wall-anchored integral.
pub fn compute_gamma(
    ext: &ExtendedProfile,
    alpha: f64,
    side: Side,
    opts: &IslandOptions,
) -> Result<GammaSide> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidInput("alpha must be finite and nonzero".into()));
    }
    Ok(GammaSide {
        side,
        alpha,
        scale: gamma_constant(ext),
        phi: solve_at_zero(ext, alpha, side, opts)?,
        quad: opts.quad,
    })
}

/// `κ = -5u'u'' + u''b' - u'b'' + 5b'b''` at `y = 0`.
pub fn blowup_condition(ext: &ExtendedProfile) -> f64 {
    let (u1, u2) = lead(ext.base().u());
    let (b1, b2) = lead(ext.base().b());
    -5.0 * u1 * u2 + u2 * b1 - u1 * b2 + 5.0 * b1 * b2
}

/// Least-squares slope of `|∂_y(bΓ)|` against `ln(1/|y|)` at `|y| = 2^-k`.
pub fn log_slope(ext: &ExtendedProfile, gamma: &GammaSide) -> Result<f64> {
    let mut pts = Vec::new();
    for k in SLOPE_LEVELS {
        let y = gamma.side.wall() * 2f64.powi(-k);
        pts.push(((1.0 / y.abs()).ln(), gamma.d_b_gamma_at(ext, y)?.abs()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlowupDiagnostic {
    pub kappa: f64,
    pub log_slope_plus: f64,
    pub log_slope_minus: f64,
}

impl BlowupDiagnostic {
    /// The larger of the two one-sided slopes.
    pub fn log_slope(&self) -> f64 {
        if self.log_slope_plus.abs() >= self.log_slope_minus.abs() {
            self.log_slope_plus
        } else {
            self.log_slope_minus
        }
    }
}

pub fn blowup_diagnostic(
    ext: &ExtendedProfile,
    plus: &GammaSide,
    minus: &GammaSide,
) -> Result<BlowupDiagnostic> {
    Ok(BlowupDiagnostic {
        kappa: blowup_condition(ext),
        log_slope_plus: log_slope(ext, plus)?,
        log_slope_minus: log_slope(ext, minus)?,
    })
}

/// Limiting profiles on the uniform output grid of `[-1, 1]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IslandProfile {
    pub alpha: f64,
    pub y: Vec<f64>,
    pub b_gamma: Vec<f64>,
    pub psi_inf: Vec<Complex64>,
    pub phi_inf: Vec<Complex64>,
    pub phi0_at_0: Complex64,
    pub diagnostic: BlowupDiagnostic,
}

impl IslandProfile {
    pub fn centre_index(&self) -> usize {
        (self.y.len() - 1) / 2
    }

    pub fn psi_inf_at_0(&self) -> Complex64 {
        self.psi_inf[self.centre_index()]
    }

    /// CSV rows `y, b_gamma, re/im ψ∞, re/im φ∞`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("y,b_gamma,re_psi_inf,im_psi_inf,re_phi_inf,im_phi_inf\n");
        for k in 0..self.y.len() {
            s.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e}\n",
                self.y[k],
                self.b_gamma[k],
                self.psi_inf[k].re,
                self.psi_inf[k].im,
                self.phi_inf[k].re,
                self.phi_inf[k].im
            ));
        }
        s
    }
}

/// `u / b` with the value `u'(0) / b'(0)` at the centre.
fn flow_ratio(ext: &ExtendedProfile) -> impl Fn(f64) -> f64 + '_ {
    let (u_q, _) = ext.base().u().div_by_monomial(1);
    let (b_q, _) = ext.base().b().div_by_monomial(1);
    move |y| u_q.eval(y) / b_q.eval(y)
}

/// Both halves joined at the shared centre node.
fn join<T: Clone>(minus: &[T], plus: &[T]) -> Vec<T> {
    let mut v = minus.to_vec();
    v.extend_from_slice(&plus[1..]);
    v
}

/// `φ∞ = -bΓ φ0(0)` and `ψ∞ = (u/b) φ∞` on both halves.
pub fn limiting_profiles(
    ext: &ExtendedProfile,
    alpha: f64,
    phi0_at_0: Complex64,
    opts: &IslandOptions,
) -> Result<IslandProfile> {
    opts.check()?;
    let plus = compute_gamma(ext, alpha, Side::Plus, opts)?;
    let minus = compute_gamma(ext, alpha, Side::Minus, opts)?;
    profiles_from(ext, alpha, phi0_at_0, &plus, &minus, opts)
}

/// As [`limiting_profiles`] with `Γ±` already computed.
pub fn profiles_from(
    ext: &ExtendedProfile,
    alpha: f64,
    phi0_at_0: Complex64,
    plus: &GammaSide,
    minus: &GammaSide,
    opts: &IslandOptions,
) -> Result<IslandProfile> {
    opts.check()?;
    let yp = opts.half_nodes(Side::Plus);
    let ym = opts.half_nodes(Side::Minus);
    let y = join(&ym, &yp);
    let b_gamma = join(&minus.b_gamma_on(ext, &ym), &plus.b_gamma_on(ext, &yp));
    let ratio = flow_ratio(ext);
    let phi_inf: Vec<Complex64> = b_gamma.iter().map(|bg| -phi0_at_0 * *bg).collect();
    let psi_inf = y.iter().zip(&phi_inf).map(|(&yk, p)| p * ratio(yk)).collect();
    Ok(IslandProfile {
        alpha,
        y,
        b_gamma,
        psi_inf,
        phi_inf,
        phi0_at_0,
        diagnostic: blowup_diagnostic(ext, plus, minus)?,
    })
}

/// `φ∞` from `H(y, 0) = φ(y) ∫_{wall}^y Q / ((u² - b²) φ²)` with
/// `Q(y) = ∫_0^y F(z, 0) φ(z) dz`, as `φ∞ = φ0(0) χ + b H`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolventRoute {
    pub y: Vec<f64>,
    pub phi_inf: Vec<Complex64>,
}

pub fn final_state_from_h(
    ext: &ExtendedProfile,
    src: &SourceData,
    plus: &GammaSide,
    minus: &GammaSide,
    opts: &IslandOptions,
) -> Result<ResolventRoute> {
    opts.check()?;
    let zero = Complex64::new(0.0, 0.0);
    let p0 = src.phi0_at_0();
    let half = |g: &GammaSide| {
        let nodes = opts.half_nodes(g.side);
        let (centre, wall) = match g.side {
            Side::Plus => (0, nodes.len() - 1),
            Side::Minus => (nodes.len() - 1, 0),
        };
        let (_, outer) = cumulative_nested(
            &nodes,
            centre,
            zero,
            wall,
            OUTPUT_ORDER,
            |z| src.eval(ext, z, zero) * g.phi.phi_at(z),
            |z, q| q * g.kernel(ext, z),
        );
        let phi: Vec<Complex64> = nodes
            .iter()
            .zip(&outer)
            .enumerate()
            .map(|(k, (&y, o))| {
                if k == centre {
                    p0
                } else {
                    p0 * source_cutoff(y)[0] + g.phi.phi_at(y) * *o * ext.b(y, 0)
                }
            })
            .collect();
        (nodes, phi)
    };
    let (ym, pm) = half(minus);
    let (yp, pp) = half(plus);
    Ok(ResolventRoute {
        y: join(&ym, &yp),
        phi_inf: join(&pm, &pp),
    })
}

/// Largest node-wise gap between the two routes to `φ∞`.
pub fn dual_route_mismatch(profile: &IslandProfile, route: &ResolventRoute) -> Result<f64> {
    if profile.y != route.y {
        return Err(Error::InvalidInput("the two routes use different grids".into()));
    }
    Ok(profile
        .phi_inf
        .iter()
        .zip(&route.phi_inf)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}
