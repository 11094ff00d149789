//! Solution `Θ` of `(H Θ')' - α² H Θ = F`, `Θ(±1) = 0`, assembled from the
//! homogeneous solutions and the four matching coefficients.

use super::source::SourceData;
use super::wronskian::{compute_d_with, WronskianData};
use super::{half_interval, HomogeneousPair, SpectralOptions};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::profiles::{eval_h, ExtendedProfile, Region, Side, SpectralPoint};
use crate::quad::{adaptive_gauss, cumulative_gauss};
use crate::sturmian::HomogeneousSolution;
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss order per grid interval for the cumulative integrals.
const CUMULATIVE_ORDER: usize = 6;
/// Smallest distance from the real axis accepted by [`solve_inhomogeneous`].
const MIN_EPS: f64 = 1e-6;
/// Tolerance on the agreement of the two representations of `Θ` on a half.
const REPRESENTATION_TOL: f64 = 1e-6;
/// Agreement expected of a healthy solve; reported, not enforced.
pub const REPRESENTATION_TARGET: f64 = 1e-8;

/// `N(y) = ∫_{y_c}^y F φ` tabulated on a fine uniform grid of one half of
/// the channel, fine enough to resolve the cutoff transitions in `F`.
#[derive(Clone, Debug)]
struct SourceIntegral<'a> {
    sol: &'a HomogeneousSolution,
    grid: Grid,
    values: Vec<Complex64>,
}

impl<'a> SourceIntegral<'a> {
    fn new(
        ext: &ExtendedProfile,
        src: &SourceData,
        sol: &'a HomogeneousSolution,
        opts: &SpectralOptions,
    ) -> Result<Self> {
        let c = sol.c.c();
        let (lo, hi) = half_interval(sol.side);
        let grid = Grid::uniform(opts.theta_nodes, lo, hi)?;
        let zero = match sol.side {
            Side::Plus => 0,
            Side::Minus => grid.len() - 1,
        };
        let integrand = |y: f64| src.eval(ext, y, c) * sol.phi_at(y);
        let from_zero = cumulative_gauss(grid.nodes(), zero, CUMULATIVE_ORDER, integrand);
        // y_c may sit outside the channel on the extension
        let y_c = sol.y_c();
        let to_yc = adaptive_gauss(integrand, 0.0, y_c, &[-1.0, 1.0], opts.quad);
        if !to_yc.converged {
            return Err(Error::Quadrature("source integral to the critical layer did not converge".into()));
        }
        let values = from_zero.into_iter().map(|v| v - to_yc.value).collect();
        Ok(Self { sol, grid, values })
    }

    fn at(&self, y: f64) -> Complex64 {
        self.grid.interp(&self.values, y)
    }

    fn at_zero(&self) -> Complex64 {
        match self.sol.side {
            Side::Plus => self.values[0],
            Side::Minus => *self.values.last().unwrap(),
        }
    }
}

/// Source-dependent integrals and the matching coefficients at one `c`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Coefficients {
    pub t_plus: Complex64,
    pub t_minus: Complex64,
    pub l: Complex64,
    pub mu_plus: Complex64,
    pub mu_minus: Complex64,
    pub nu_plus: Complex64,
    pub nu_minus: Complex64,
}

/// `T± = ∫_0^{±1} N±(y) / (H φ±²) dy`.
fn t_integral(
    ext: &ExtendedProfile,
    n: &SourceIntegral,
    opts: &SpectralOptions,
) -> Result<Complex64> {
    let sol = n.sol;
    let c = sol.c.c();
    let f = |y: f64| {
        let phi = sol.phi_at(y);
        n.at(y) / (eval_h(ext, y, c) * phi * phi)
    };
    let r = adaptive_gauss(f, 0.0, sol.side.wall(), &[], opts.quad);
    if !r.converged {
        return Err(Error::Quadrature("T integral did not converge".into()));
    }
    Ok(r.value)
}

/// `T±` and `L` for the given source.
fn source_terms(
    ext: &ExtendedProfile,
    src: &SourceData,
    pair: &HomogeneousPair,
    opts: &SpectralOptions,
) -> Result<(Complex64, Complex64, Complex64)> {
    let np = SourceIntegral::new(ext, src, &pair.plus, opts)?;
    let nm = SourceIntegral::new(ext, src, &pair.minus, opts)?;
    let tp = t_integral(ext, &np, opts)?;
    let tm = t_integral(ext, &nm, opts)?;
    let (pp, pm) = pair.phi0();
    // ∫_0^{y_c} F φ = -N(0)
    let l = pm * -np.at_zero() - pp * -nm.at_zero();
    Ok((tp, tm, l))
}

/// Coefficients from `D`, `I±`, `P`, `T±`, `L` by the closed-form inverse of
/// the matching system.
fn closed_form(w: &WronskianData, tp: Complex64, tm: Complex64, l: Complex64) -> Coefficients {
    let c = w.c.c();
    let (ip, im) = (w.i_plus, w.i_minus);
    let (pp, pm) = (w.phi0_plus, w.phi0_minus);
    let c2p = c * c * w.p;
    let inv = w.inv_d;
    let mu_plus = inv * (-c2p * tp * im - pm * l * im + pp * pp * tp - pp * pm * tm);
    let nu_plus = inv * (pm * l * ip * im + pp * pm * tm * ip + pm * pm * tp * im);
    let mu_minus = inv * (c2p * tm * ip + pp * l * ip + pp * pm * tp - pm * pm * tm);
    let nu_minus = inv * (pp * l * ip * im + pp * pp * tm * ip + pp * pm * tp * im);
    Coefficients {
        t_plus: tp,
        t_minus: tm,
        l,
        mu_plus,
        mu_minus,
        nu_plus,
        nu_minus,
    }
}

/// The matching system `W (μ+, μ-, ν+, ν-) = (-T+, T-, 0, L)`.
pub fn matching_system(
    w: &WronskianData,
    tp: Complex64,
    tm: Complex64,
    l: Complex64,
) -> (Matrix4<Complex64>, Vector4<Complex64>) {
    let c = w.c.c();
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let (pp, pm) = (w.phi0_plus, w.phi0_minus);
    let m = Matrix4::new(
        w.i_plus, z, one, z,
        z, w.i_minus, z, -one,
        z, z, pp, -pm,
        pm, -pp, c * c * pm * pp * w.dphi0_plus, -c * c * pp * pm * w.dphi0_minus,
    );
    (m, Vector4::new(-tp, tm, z, l))
}

/// Matching coefficients at an off-axis `c` (or a real `c` outside the
/// spectral interval).
pub fn coefficients(
    ext: &ExtendedProfile,
    src: &SourceData,
    pair: &HomogeneousPair,
    wronskian: &WronskianData,
    opts: &SpectralOptions,
) -> Result<Coefficients> {
    if pair.plus.c.region == Region::D0 {
        return Err(Error::SpectralParameter(
            "coefficients on the spectral interval are one-sided limits".into(),
        ));
    }
    let (tp, tm, l) = source_terms(ext, src, pair, opts)?;
    Ok(closed_form(wronskian, tp, tm, l))
}

/// One-sided limits `μ±^±`, `ν±^±` on the real axis. Index 0 is the limit
/// from above, index 1 from below.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryCoefficients {
    pub t_plus: Complex64,
    pub t_minus: Complex64,
    pub l: Complex64,
    pub mu_plus: [Complex64; 2],
    pub mu_minus: [Complex64; 2],
    pub nu_plus: [Complex64; 2],
    pub nu_minus: [Complex64; 2],
}

/// Assembles the boundary coefficients from the regular and jump parts of
/// numerators and Wronskian.
pub fn boundary_coefficients(
    ext: &ExtendedProfile,
    src: &SourceData,
    pair: &HomogeneousPair,
    w: &WronskianData,
    opts: &SpectralOptions,
) -> Result<BoundaryCoefficients> {
    let c_r = pair.plus.c.c_r;
    if pair.plus.c.region != Region::D0 || w.excluded {
        return Err(Error::SpectralParameter(format!(
            "boundary coefficients need a non-excluded real parameter, got {c_r}"
        )));
    }
    let (tp, tm, l) = source_terms(ext, src, pair, opts)?;
    let c = Complex64::new(c_r, 0.0);
    let (pp, pm) = (w.phi0_plus, w.phi0_minus);
    let c2p = c * c * w.p;
    let irp = w.i_re_plus.unwrap_or(f64::NAN);
    let irm = w.i_re_minus.unwrap_or(f64::NAN);
    let chp = w.chi_plus.unwrap_or(f64::NAN);
    let chm = w.chi_minus.unwrap_or(f64::NAN);
    let (sp, sm) = (w.sigma_plus.re, w.sigma_minus.re);
    let d_re = w.d_re.unwrap_or(f64::NAN);
    let d_im = w.d_im.unwrap_or(f64::NAN);

    let u_re_p = -c2p * tp * irm - pm * l * irm + pp * pp * tp - pp * pm * tm;
    let u_im_p = -PI * c2p * tp * chm / sm - PI * pm * l * chm / sm;
    let u_re_m = c2p * tm * irp + pp * l * irp + pp * pm * tp - pm * pm * tm;
    let u_im_m = PI * c2p * tm * chp / sp + PI * pp * l * chp / sp;
    let jump = PI * PI * chp * chm / (sp * sm);
    let mixed = irp * chm / sm + irm * chp / sp;
    let v_re_p = pm * l * irp * irm + pp * pm * tm * irp + pm * pm * tp * irm - pm * l * jump;
    let v_im_p = PI * pm * l * mixed + PI * pp * pm * tm * chp / sp + PI * pm * pm * tp * chm / sm;
    let v_re_m = pp * l * irp * irm + pp * pp * tm * irp + pp * pm * tp * irm - pp * l * jump;
    let v_im_m = PI * pp * l * mixed + PI * pp * pp * tm * chp / sp + PI * pp * pm * tp * chm / sm;

    let i = Complex64::new(0.0, 1.0);
    let d_up = Complex64::new(d_re, d_im);
    let d_dn = Complex64::new(d_re, -d_im);
    let lim = |re: Complex64, im: Complex64| [(re + i * im) / d_up, (re - i * im) / d_dn];
    Ok(BoundaryCoefficients {
        t_plus: tp,
        t_minus: tm,
        l,
        mu_plus: lim(u_re_p, u_im_p),
        mu_minus: lim(u_re_m, u_im_m),
        nu_plus: lim(v_re_p, v_im_p),
        nu_minus: lim(v_re_m, v_im_m),
    })
}

/// `Θ` on `[-1, 1]` with its derivative and consistency measurements.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InhomogeneousSolution {
    pub c: SpectralPoint,
    pub alpha: f64,
    pub y: Vec<f64>,
    pub theta: Vec<Complex64>,
    pub dtheta: Vec<Complex64>,
    /// `H Θ'`, smooth across the critical layer.
    pub flux: Vec<Complex64>,
    pub coefficients: Coefficients,
    pub wronskian: WronskianData,
    /// Largest node-wise gap between the two representations on each half.
    pub representation_mismatch: f64,
    /// Jumps of `Θ` and `Θ'` at `y = 0` between the two halves.
    pub jump_at_zero: f64,
    pub derivative_jump_at_zero: f64,
    /// `|φ+(0) ν+ - φ-(0) ν-|`.
    pub matching_residual: f64,
}

impl InhomogeneousSolution {
    pub fn theta_at(&self, y: f64) -> Complex64 {
        // piecewise-linear lookup is enough for reporting; callers needing
        // accuracy use the node values
        let k = self.y.partition_point(|&x| x < y).clamp(1, self.y.len() - 1);
        let (y0, y1) = (self.y[k - 1], self.y[k]);
        let t = (y - y0) / (y1 - y0);
        self.theta[k - 1] * (1.0 - t) + self.theta[k] * t
    }

    /// CSV rows `y, re, im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("y,re,im\n");
        for (y, t) in self.y.iter().zip(&self.theta) {
            s.push_str(&format!("{y:e},{:e},{:e}\n", t.re, t.im));
        }
        s
    }
}

struct Half {
    y: Vec<f64>,
    /// Representation anchored at the wall.
    wall: Vec<Complex64>,
    dwall: Vec<Complex64>,
    flux: Vec<Complex64>,
    /// Representation anchored at zero.
    centre: Vec<Complex64>,
}

/// Both representations of `Θ` on one half, on the grid of `n`, ordered by
/// increasing `y`.
fn build_half(ext: &ExtendedProfile, n: &SourceIntegral, mu: Complex64, nu: Complex64) -> Half {
    let sol = n.sol;
    let c = sol.c.c();
    let y = n.grid.nodes().to_vec();
    let (zero, wall_idx) = match sol.side {
        Side::Plus => (0, y.len() - 1),
        Side::Minus => (y.len() - 1, 0),
    };
    let kernel = |x: f64| {
        let phi = sol.phi_at(x);
        1.0 / (eval_h(ext, x, c) * phi * phi)
    };
    let a0 = cumulative_gauss(&y, zero, CUMULATIVE_ORDER, |x| n.at(x) * kernel(x));
    let b0 = cumulative_gauss(&y, zero, CUMULATIVE_ORDER, kernel);
    let a1 = cumulative_gauss(&y, wall_idx, CUMULATIVE_ORDER, |x| n.at(x) * kernel(x));
    let b1 = cumulative_gauss(&y, wall_idx, CUMULATIVE_ORDER, kernel);
    let mut out = Half {
        y: y.clone(),
        wall: Vec::with_capacity(y.len()),
        dwall: Vec::with_capacity(y.len()),
        flux: Vec::with_capacity(y.len()),
        centre: Vec::with_capacity(y.len()),
    };
    for (k, &x) in y.iter().enumerate() {
        let phi = sol.phi_at(x);
        let dphi = sol.dphi_at(x);
        let s1 = a1[k] + mu * b1[k];
        let h = eval_h(ext, x, c);
        let nm = n.values[k] + mu;
        out.wall.push(phi * s1);
        out.dwall.push(dphi * s1 + nm / (h * phi));
        out.flux.push(h * dphi * s1 + nm / phi);
        out.centre.push(phi * (a0[k] + mu * b0[k] + nu));
    }
    out
}

/// `Θ(·, c)` for `c` off the spectral interval.
pub fn solve_inhomogeneous(
    ext: &ExtendedProfile,
    src: &SourceData,
    alpha: f64,
    c: Complex64,
    opts: &SpectralOptions,
) -> Result<InhomogeneousSolution> {
    let sp = SpectralPoint::new(ext, c)?;
    if sp.region == Region::D0 || (sp.region == Region::Deps && sp.eps.abs() < MIN_EPS) {
        return Err(Error::SpectralParameter(format!(
            "{c} is too close to the spectral interval"
        )));
    }
    if src.alpha != alpha {
        return Err(Error::InvalidInput("source built for a different alpha".into()));
    }
    let pair = HomogeneousPair::solve(ext, alpha, &sp, opts)?;
    let w = compute_d_with(ext, &pair, opts)?;
    let np = SourceIntegral::new(ext, src, &pair.plus, opts)?;
    let nm = SourceIntegral::new(ext, src, &pair.minus, opts)?;
    let tp = t_integral(ext, &np, opts)?;
    let tm = t_integral(ext, &nm, opts)?;
    let (pp, pm) = pair.phi0();
    let l = pm * -np.at_zero() - pp * -nm.at_zero();
    let coef = closed_form(&w, tp, tm, l);

    let plus = build_half(ext, &np, coef.mu_plus, coef.nu_plus);
    let minus = build_half(ext, &nm, coef.mu_minus, coef.nu_minus);
    let scale = plus
        .wall
        .iter()
        .chain(&minus.wall)
        .map(|v| v.norm())
        .fold(1.0, f64::max);
    let mismatch = plus
        .wall
        .iter()
        .zip(&plus.centre)
        .chain(minus.wall.iter().zip(&minus.centre))
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if mismatch > REPRESENTATION_TOL * scale {
        return Err(Error::Mismatch(format!(
            "representations of theta differ by {mismatch:e}"
        )));
    }
    let (t0p, t0m) = (plus.wall[0], *minus.wall.last().unwrap());
    // the halves share the node y = 0
    let (d0p, d0m) = (plus.dwall[0], *minus.dwall.last().unwrap());

    let mut y = minus.y.clone();
    let mut theta = minus.wall.clone();
    let mut dtheta = minus.dwall.clone();
    let mut flux = minus.flux.clone();
    y.extend_from_slice(&plus.y[1..]);
    theta.extend_from_slice(&plus.wall[1..]);
    dtheta.extend_from_slice(&plus.dwall[1..]);
    flux.extend_from_slice(&plus.flux[1..]);

    Ok(InhomogeneousSolution {
        c: sp,
        alpha,
        y,
        theta,
        dtheta,
        flux,
        matching_residual: (pp * coef.nu_plus - pm * coef.nu_minus).norm(),
        coefficients: coef,
        wronskian: w,
        representation_mismatch: mismatch,
        jump_at_zero: (t0p - t0m).norm(),
        derivative_jump_at_zero: (d0p - d0m).norm(),
    })
}

/// Max over interior nodes of `|(H Θ')' - α² H Θ - F| / (1 + |F|)`, with a
/// fourth-order difference of the flux on uniform stencils inside each half.
pub fn residual_inhomogeneous(
    sol: &InhomogeneousSolution,
    ext: &ExtendedProfile,
    src: &SourceData,
) -> f64 {
    let c = sol.c.c();
    let a2 = sol.alpha * sol.alpha;
    let y = &sol.y;
    let mut worst: f64 = 0.0;
    for j in 2..y.len().saturating_sub(2) {
        let dx = y[j + 1] - y[j];
        let uniform = (j - 2..j + 2).all(|k| ((y[k + 1] - y[k]) - dx).abs() <= 1e-9 * dx);
        // the flux has a kink at 0 only through F; skip stencils straddling it
        let straddles = y[j - 2] < 0.0 && y[j + 2] > 0.0;
        if !uniform || straddles {
            continue;
        }
        let g = &sol.flux;
        let dg = (g[j - 2] - g[j - 1] * 8.0 + g[j + 1] * 8.0 - g[j + 2]) / (12.0 * dx);
        let f = src.eval(ext, y[j], c);
        let r = dg - eval_h(ext, y[j], c) * sol.theta[j] * a2 - f;
        worst = worst.max(r.norm() / (1.0 + f.norm()));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::CPoly;
    use crate::profiles::BackgroundProfile;

    fn setup(u: &[f64], b: &[f64], psi0: &[f64], phi0: &[f64]) -> (ExtendedProfile, SourceData) {
        let p = BackgroundProfile::new(u, b, 0.1).unwrap();
        let ext = ExtendedProfile::new(&p).unwrap();
        let src = SourceData::new(&p, 1.0, CPoly::from_real(psi0), CPoly::from_real(phi0)).unwrap();
        (ext, src)
    }

    fn opts() -> SpectralOptions {
        SpectralOptions {
            n_nodes: 2049,
            ..Default::default()
        }
    }

    #[test]
    fn closed_form_solves_matching_system() {
        let (ext, src) = setup(&[0.0, 0.3, 0.1], &[0.0, 1.0, 0.2], &[0.0, 0.2, 0.0, -0.2], &[1.0, 0.0, -1.0]);
        let c = Complex64::new(0.3, 0.2);
        let sp = SpectralPoint::new(&ext, c).unwrap();
        let pair = HomogeneousPair::solve(&ext, 1.0, &sp, &opts()).unwrap();
        let w = compute_d_with(&ext, &pair, &opts()).unwrap();
        let k = coefficients(&ext, &src, &pair, &w, &opts()).unwrap();
        let (m, rhs) = matching_system(&w, k.t_plus, k.t_minus, k.l);
        let x = Vector4::new(k.mu_plus, k.mu_minus, k.nu_plus, k.nu_minus);
        let r = m * x - rhs;
        assert!(r.norm() <= 1e-12 * (1.0 + rhs.norm()), "{r}");
        let det = m.determinant();
        assert!((det - w.d.unwrap()).norm() <= 1e-12 * det.norm());
    }

    #[test]
    fn zero_source_gives_zero_solution() {
        let (ext, src) = setup(&[0.0, 0.5], &[0.0, 1.0], &[0.0], &[0.0]);
        let s = solve_inhomogeneous(&ext, &src, 1.0, Complex64::new(0.3, 0.2), &opts()).unwrap();
        assert!(s.theta.iter().all(|t| t.norm() == 0.0));
        let k = &s.coefficients;
        for v in [k.mu_plus, k.mu_minus, k.nu_plus, k.nu_minus, k.t_plus, k.t_minus, k.l] {
            assert_eq!(v.norm(), 0.0);
        }
    }

    #[test]
    fn solution_satisfies_equation_and_matching() {
        let (ext, src) = setup(&[0.0, 0.5], &[0.0, 1.0], &[0.0], &[1.0, 0.0, -1.0]);
        let s = solve_inhomogeneous(&ext, &src, 1.0, Complex64::new(0.3, 0.2), &opts()).unwrap();
        assert!(s.representation_mismatch <= 1e-8, "{}", s.representation_mismatch);
        assert!(s.jump_at_zero <= 1e-8 && s.derivative_jump_at_zero <= 1e-8);
        assert!(s.matching_residual <= 1e-10);
        assert!(s.theta[0].norm() <= 1e-10 && s.theta.last().unwrap().norm() <= 1e-10);
        let r = residual_inhomogeneous(&s, &ext, &src);
        assert!(r <= 1e-6, "residual {r}");
    }

    #[test]
    fn rejects_points_on_the_interval() {
        let (ext, src) = setup(&[0.0, 0.5], &[0.0, 1.0], &[0.0], &[1.0, 0.0, -1.0]);
        assert!(solve_inhomogeneous(&ext, &src, 1.0, Complex64::new(0.3, 0.0), &opts()).is_err());
        assert!(solve_inhomogeneous(&ext, &src, 1.0, Complex64::new(0.3, 1e-8), &opts()).is_err());
    }

    #[test]
    fn agrees_with_finite_difference_resolvent() {
        let (ext, src) = setup(&[0.0, 0.5], &[0.0, 1.0], &[0.0, 0.2, 0.0, -0.2], &[1.0, 0.0, -1.0]);
        let c = Complex64::new(0.3, 0.2);
        let s = solve_inhomogeneous(&ext, &src, 1.0, c, &opts()).unwrap();
        let fd = super::super::direct::resolvent_fd(&ext, &src, c, 513).unwrap();
        let worst = fd
            .y
            .iter()
            .zip(&fd.b_theta)
            .map(|(&y, bt)| (s.theta_at(y) * ext.b(y, 0) - bt).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-4, "{worst}");
    }

    #[test]
    fn coefficients_approach_boundary_limits() {
        // asymmetric data so that no coefficient vanishes by parity
        let (ext, src) = setup(&[0.0], &[0.0, 1.0], &[0.3, 0.2, -0.3, -0.2], &[1.0, 0.3, -1.0, -0.3]);
        let o = opts();
        let sp = SpectralPoint::real(&ext, 0.5).unwrap();
        let pair = HomogeneousPair::solve(&ext, 1.0, &sp, &o).unwrap();
        let w = compute_d_with(&ext, &pair, &o).unwrap();
        let lim = boundary_coefficients(&ext, &src, &pair, &w, &o).unwrap();
        let i_lim = w.sigma_plus * w.i_re_plus.unwrap()
            + Complex64::new(0.0, PI * w.chi_plus.unwrap());
        let mut prev = [f64::INFINITY; 3];
        for eps in [1e-2, 1e-3, 1e-4] {
            let sp = SpectralPoint::new(&ext, Complex64::new(0.5, eps)).unwrap();
            let pair = HomogeneousPair::solve(&ext, 1.0, &sp, &o).unwrap();
            let w_eps = compute_d_with(&ext, &pair, &o).unwrap();
            let k = coefficients(&ext, &src, &pair, &w_eps, &o).unwrap();
            let errs = [
                (w_eps.sigma_plus * w_eps.i_plus - i_lim).norm(),
                (k.mu_plus - lim.mu_plus[0]).norm(),
                (k.nu_plus - lim.nu_plus[0]).norm(),
            ];
            for (e, p) in errs.iter().zip(&prev) {
                assert!(e < p, "{eps}: {errs:?}");
            }
            prev = errs;
        }
        assert!(prev.iter().all(|&e| e <= 1e-3), "{prev:?}");
    }
}
