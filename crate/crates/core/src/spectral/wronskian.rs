//! `D(c) = c² P I+ I- - φ+(0)² I+ - φ-(0)² I-` and its pieces.

use super::{half_interval, HomogeneousPair, SpectralOptions};
use crate::error::{Error, Result};
use crate::profiles::{eval_h, Branch, ExtendedProfile, Region, Side, SpectralPoint};
use crate::quad::{adaptive_gauss, adaptive_gauss_scaled, adaptive_simpson, Adaptive};
use crate::sturmian::HomogeneousSolution;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Distance from `0` and the endpoint speeds below which a real parameter
/// is treated as one of the excluded points where `1/D = 0`.
pub const EXCLUDED_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WronskianData {
    pub c: SpectralPoint,
    pub alpha: f64,
    pub phi0_plus: Complex64,
    pub phi0_minus: Complex64,
    pub dphi0_plus: Complex64,
    pub dphi0_minus: Complex64,
    /// Off the axis: `I±(c)`. On the axis: the limit from above,
    /// `I^re± + iπ χ± / σ±`.
    pub i_plus: Complex64,
    pub i_minus: Complex64,
    pub p: Complex64,
    /// `D(c)`, or the limit from above on the axis. `None` at the excluded
    /// points.
    pub d: Option<Complex64>,
    /// `1/D`, set to zero at the excluded points.
    pub inv_d: Complex64,
    pub sigma_plus: Complex64,
    pub sigma_minus: Complex64,
    pub pi_plus: Complex64,
    pub pi_minus: Complex64,
    pub r1_plus: Complex64,
    pub r2_plus: Complex64,
    pub r1_minus: Complex64,
    pub r2_minus: Complex64,
    /// Logarithmic part of `σ± I±`.
    pub log_plus: Complex64,
    pub log_minus: Complex64,
    pub chi_plus: Option<f64>,
    pub chi_minus: Option<f64>,
    pub i_re_plus: Option<f64>,
    pub i_re_minus: Option<f64>,
    pub d_re: Option<f64>,
    pub d_im: Option<f64>,
    /// Parameter at `0` or an endpoint speed.
    pub excluded: bool,
}

impl WronskianData {
    /// `σ± I±` reassembled from the bounded pieces and the logarithm.
    pub fn sigma_i_decomposed(&self, side: Side) -> Complex64 {
        match side {
            Side::Plus => self.sigma_plus * self.pi_plus + self.r1_plus + self.r2_plus + self.log_plus,
            Side::Minus => {
                self.sigma_minus * self.pi_minus + self.r1_minus + self.r2_minus + self.log_minus
            }
        }
    }

    /// `c² P I+ I- - φ+(0)² I+ - φ-(0)² I-` with the given `I±`.
    pub fn assemble(&self, i_plus: Complex64, i_minus: Complex64) -> Complex64 {
        let c = self.c.c();
        c * c * self.p * i_plus * i_minus
            - self.phi0_plus * self.phi0_plus * i_plus
            - self.phi0_minus * self.phi0_minus * i_minus
    }
}

/// `σ±(c) = W+'(y_c)(W-(y_c) - c) - W-'(y_c)(W+(y_c) - c)` at the side's
/// critical layer.
pub fn compute_sigma(ext: &ExtendedProfile, c: &SpectralPoint, side: Side) -> Complex64 {
    let y = c.y_c(side);
    let cv = c.c();
    ext.w(Branch::Plus, y, 1) * (ext.w(Branch::Minus, y, 0) - cv)
        - ext.w(Branch::Minus, y, 1) * (ext.w(Branch::Plus, y, 0) - cv)
}

/// `P = φ-(0)² φ+(0) φ+'(0) - φ+(0)² φ-(0) φ-'(0)`.
pub fn compute_p(pair: &HomogeneousPair) -> Complex64 {
    let (pp, pm) = pair.phi0();
    let (dp, dm) = (pair.plus.dphi_at_zero(), pair.minus.dphi_at_zero());
    pm * pm * pp * dp - pp * pp * pm * dm
}

fn check(r: Adaptive, what: &str) -> Result<Complex64> {
    if r.converged && r.value.re.is_finite() && r.value.im.is_finite() {
        Ok(r.value)
    } else {
        Err(Error::Quadrature(format!("{what} did not converge")))
    }
}

/// `I± = ∫ dy / (H φ±²)` over `[0, 1]` and `[-1, 0]` by adaptive quadrature.
/// Requires `H` nonzero on the interval, so real parameters inside the
/// spectral interval are rejected.
pub fn compute_i(
    ext: &ExtendedProfile,
    pair: &HomogeneousPair,
    opts: &SpectralOptions,
) -> Result<(Complex64, Complex64)> {
    let c = pair.plus.c;
    if c.region == Region::D0 {
        return Err(Error::SpectralParameter(format!(
            "{} lies on the spectral interval; use the boundary limit",
            c.c_r
        )));
    }
    let one_side = |side: Side| -> Result<Complex64> {
        let sol = pair.side(side);
        let cv = c.c();
        let (a, b) = half_interval(side);
        let f = |y: f64| {
            let phi = sol.phi_at(y);
            1.0 / (eval_h(ext, y, cv) * phi * phi)
        };
        check(
            adaptive_simpson(f, a, b, &[c.y_c(side)], opts.quad),
            "I integral",
        )
    };
    Ok((one_side(Side::Plus)?, one_side(Side::Minus)?))
}

/// `Π± = ∫ (1/φ² - 1) / H`, using the stored deviation `φ - 1` so that the
/// numerator keeps its quadratic zero at the critical layer.
fn compute_pi(
    ext: &ExtendedProfile,
    sol: &HomogeneousSolution,
    opts: &SpectralOptions,
) -> Result<Complex64> {
    let c = sol.c;
    let cv = c.c();
    let (a, b) = half_interval(sol.side);
    let f = |y: f64| {
        let dev = sol.deviation_at(y);
        let phi = Complex64::new(1.0, 0.0) + dev;
        -(dev * (2.0 + dev)) / (phi * phi * eval_h(ext, y, cv))
    };
    check(adaptive_gauss(f, a, b, &[c.y_c(sol.side)], opts.quad), "Pi integral")
}

/// Bounded remainders `R¹`, `R²` of `σ ∫ 1/H`.
fn compute_r(
    ext: &ExtendedProfile,
    c: &SpectralPoint,
    side: Side,
    opts: &SpectralOptions,
) -> Result<(Complex64, Complex64)> {
    let cv = c.c();
    let yc = c.y_c(side);
    let wp_c = ext.w(Branch::Plus, yc, 0);
    let wm_c = ext.w(Branch::Minus, yc, 0);
    let dp_c = ext.w(Branch::Plus, yc, 1);
    let dm_c = ext.w(Branch::Minus, yc, 1);
    let (a, b) = half_interval(side);
    // both integrands are removable 0/0 at y_c; every difference below
    // carries an absolute rounding error of order eps |W|, and the returned
    // magnitudes track it so that the quadrature floor follows the noise
    let c_abs = cv.norm();
    let r1 = |y: f64| {
        let wp = ext.w(Branch::Plus, y, 0);
        let wm = ext.w(Branch::Minus, y, 0);
        let (dwp, dwm) = (wp - cv, wm - cv);
        let v = (dp_c * (wm_c - wm) - dm_c * (wp_c - wp)) / (dwp * dwm);
        let num = dp_c.abs() * (wm_c.abs() + wm.abs()) + dm_c.abs() * (wp_c.abs() + wp.abs());
        let den = (wp.abs() + c_abs) / dwp.norm() + (wm.abs() + c_abs) / dwm.norm();
        (v, num / (dwp * dwm).norm() + v.norm() * den)
    };
    let r2 = |y: f64| {
        let (wp, wm) = (ext.w(Branch::Plus, y, 0), ext.w(Branch::Minus, y, 0));
        let (dp, dm) = (ext.w(Branch::Plus, y, 1), ext.w(Branch::Minus, y, 1));
        let (dwp, dwm) = (wp - cv, wm - cv);
        let (tp, tm) = ((dp_c - dp) / dwp, (dm_c - dm) / dwm);
        let mag = ((dp_c.abs() + dp.abs()) + tp.norm() * (wp.abs() + c_abs)) / dwp.norm()
            + ((dm_c.abs() + dm.abs()) + tm.norm() * (wm.abs() + c_abs)) / dwm.norm();
        (tp - tm, mag)
    };
    Ok((
        check(adaptive_gauss_scaled(r1, a, b, &[yc], opts.quad), "R1 integral")?,
        check(adaptive_gauss_scaled(r2, a, b, &[yc], opts.quad), "R2 integral")?,
    ))
}

/// Closed-form `∫ W+'/(W+ - c) - W-'/(W- - c)` over the half interval. On
/// the real axis this is the real part of the limit, `ln|…|`.
fn log_term(ext: &ExtendedProfile, c: &SpectralPoint, side: Side) -> Complex64 {
    let cv = c.c();
    let wall = side.wall();
    let wp = ext.w(Branch::Plus, wall, 0);
    let wm = ext.w(Branch::Minus, wall, 0);
    let (num, den) = match side {
        Side::Plus => (wp, wm),
        Side::Minus => (wm, wp),
    };
    if c.region == Region::D0 {
        Complex64::new((num - cv.re).abs().ln() - (den - cv.re).abs().ln(), 0.0)
    } else {
        (num - cv).ln() - (den - cv).ln()
    }
}

/// Indicator of `c` lying strictly between the side's two wall speeds.
pub fn chi(ext: &ExtendedProfile, c_r: f64, side: Side) -> f64 {
    let wall = side.wall();
    let wp = ext.w(Branch::Plus, wall, 0);
    let wm = ext.w(Branch::Minus, wall, 0);
    let (lo, hi) = (wp.min(wm), wp.max(wm));
    if c_r > lo && c_r < hi {
        1.0
    } else {
        0.0
    }
}

/// True at `0` and at the four endpoint speeds.
pub fn is_excluded(ext: &ExtendedProfile, c_r: f64) -> bool {
    let speeds = ext.base().endpoint_speeds();
    c_r.abs() <= EXCLUDED_TOL || speeds.iter().any(|&s| (c_r - s).abs() <= EXCLUDED_TOL)
}

/// Wronskian data at `c`. Real parameters inside the spectral interval get
/// the limit from above; the limit from below is its conjugate.
pub fn compute_d(
    ext: &ExtendedProfile,
    alpha: f64,
    c: Complex64,
    opts: &SpectralOptions,
) -> Result<WronskianData> {
    let sp = SpectralPoint::new(ext, c)?;
    let on_axis = sp.region == Region::D0;
    if on_axis && is_excluded(ext, sp.c_r) {
        return Ok(excluded_data(sp, alpha));
    }
    let pair = HomogeneousPair::solve(ext, alpha, &sp, opts)?;
    compute_d_with(ext, &pair, opts)
}

fn excluded_data(sp: SpectralPoint, alpha: f64) -> WronskianData {
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let zero = Complex64::new(0.0, 0.0);
    WronskianData {
        c: sp,
        alpha,
        phi0_plus: nan,
        phi0_minus: nan,
        dphi0_plus: nan,
        dphi0_minus: nan,
        i_plus: nan,
        i_minus: nan,
        p: nan,
        d: None,
        inv_d: zero,
        sigma_plus: nan,
        sigma_minus: nan,
        pi_plus: nan,
        pi_minus: nan,
        r1_plus: nan,
        r2_plus: nan,
        r1_minus: nan,
        r2_minus: nan,
        log_plus: nan,
        log_minus: nan,
        chi_plus: None,
        chi_minus: None,
        i_re_plus: None,
        i_re_minus: None,
        d_re: None,
        d_im: None,
        excluded: true,
    }
}

/// As [`compute_d`] with the homogeneous solutions already available.
pub fn compute_d_with(
    ext: &ExtendedProfile,
    pair: &HomogeneousPair,
    opts: &SpectralOptions,
) -> Result<WronskianData> {
    let sp = pair.plus.c;
    let alpha = pair.plus.alpha;
    let on_axis = sp.region == Region::D0;
    if on_axis && is_excluded(ext, sp.c_r) {
        return Ok(excluded_data(sp, alpha));
    }
    let cv = sp.c();
    let (phi0_plus, phi0_minus) = pair.phi0();
    let p = compute_p(pair);
    let sigma_plus = compute_sigma(ext, &sp, Side::Plus);
    let sigma_minus = compute_sigma(ext, &sp, Side::Minus);
    let pi_plus = compute_pi(ext, &pair.plus, opts)?;
    let pi_minus = compute_pi(ext, &pair.minus, opts)?;
    let (r1_plus, r2_plus) = compute_r(ext, &sp, Side::Plus, opts)?;
    let (r1_minus, r2_minus) = compute_r(ext, &sp, Side::Minus, opts)?;
    let log_plus = log_term(ext, &sp, Side::Plus);
    let log_minus = log_term(ext, &sp, Side::Minus);

    let mut data = WronskianData {
        c: sp,
        alpha,
        phi0_plus,
        phi0_minus,
        dphi0_plus: pair.plus.dphi_at_zero(),
        dphi0_minus: pair.minus.dphi_at_zero(),
        i_plus: Complex64::new(0.0, 0.0),
        i_minus: Complex64::new(0.0, 0.0),
        p,
        d: None,
        inv_d: Complex64::new(0.0, 0.0),
        sigma_plus,
        sigma_minus,
        pi_plus,
        pi_minus,
        r1_plus,
        r2_plus,
        r1_minus,
        r2_minus,
        log_plus,
        log_minus,
        chi_plus: None,
        chi_minus: None,
        i_re_plus: None,
        i_re_minus: None,
        d_re: None,
        d_im: None,
        excluded: false,
    };

    if on_axis {
        let (sp_r, sm_r) = (sigma_plus.re, sigma_minus.re);
        let chi_p = chi(ext, sp.c_r, Side::Plus);
        let chi_m = chi(ext, sp.c_r, Side::Minus);
        let i_re_p = pi_plus.re + (r1_plus.re + r2_plus.re + log_plus.re) / sp_r;
        let i_re_m = pi_minus.re + (r1_minus.re + r2_minus.re + log_minus.re) / sm_r;
        let c2p = (cv * cv * p).re;
        let (f_p, f_m) = ((phi0_plus * phi0_plus).re, (phi0_minus * phi0_minus).re);
        let d_re = c2p * (i_re_p * i_re_m - PI * PI * chi_p * chi_m / (sp_r * sm_r))
            - f_p * i_re_p
            - f_m * i_re_m;
        let d_im = c2p * (PI * i_re_p * chi_m / sm_r + PI * i_re_m * chi_p / sp_r)
            - PI * f_p * chi_p / sp_r
            - PI * f_m * chi_m / sm_r;
        data.chi_plus = Some(chi_p);
        data.chi_minus = Some(chi_m);
        data.i_re_plus = Some(i_re_p);
        data.i_re_minus = Some(i_re_m);
        data.d_re = Some(d_re);
        data.d_im = Some(d_im);
        data.i_plus = Complex64::new(i_re_p, PI * chi_p / sp_r);
        data.i_minus = Complex64::new(i_re_m, PI * chi_m / sm_r);
        let d = Complex64::new(d_re, d_im);
        data.d = Some(d);
        data.inv_d = 1.0 / d;
    } else {
        let (ip, im) = compute_i(ext, pair, opts)?;
        data.i_plus = ip;
        data.i_minus = im;
        let d = data.assemble(ip, im);
        data.d = Some(d);
        data.inv_d = 1.0 / d;
    }
    Ok(data)
}
