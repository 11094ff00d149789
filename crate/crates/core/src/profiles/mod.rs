//! Background fields `u`, `b`, the characteristic speeds `W± = u ± b`, their
//! monotone extension beyond `[-1, 1]`, and spectral points with their
//! critical layers.

mod extend;

pub use extend::{BranchExtension, ExtendedProfile, ExtensionKind, LemmaExtension};

use crate::error::{Error, Result};
use crate::poly::Poly;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Absolute tolerance for equalities between endpoint speeds.
pub const CASE_TOL: f64 = 1e-12;

/// Number of sample points used by the assumption checks on `[-1, 1]`.
const CHECK_SAMPLES: usize = 20_001;

/// Which characteristic speed: `W+ = u + b` or `W- = u - b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// Half of the channel: `y >= 0` or `y <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    /// Channel wall on this side (`+1` or `-1`).
    pub fn wall(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackgroundProfile {
    u: Poly,
    b: Poly,
    c0_margin: f64,
}

impl BackgroundProfile {
    pub fn new(u_coeffs: &[f64], b_coeffs: &[f64], c0_margin: f64) -> Result<Self> {
        if u_coeffs.is_empty() || b_coeffs.is_empty() {
            return Err(Error::InvalidInput("coefficient lists must be non-empty".into()));
        }
        if u_coeffs.iter().chain(b_coeffs).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("coefficients must be finite".into()));
        }
        if !(c0_margin > 0.0) {
            return Err(Error::InvalidInput("c0 margin must be positive".into()));
        }
        Ok(Self {
            u: Poly::new(u_coeffs.to_vec()),
            b: Poly::new(b_coeffs.to_vec()),
            c0_margin,
        })
    }

    pub fn u(&self) -> &Poly {
        &self.u
    }

    pub fn b(&self) -> &Poly {
        &self.b
    }

    pub fn c0_margin(&self) -> f64 {
        self.c0_margin
    }

    pub fn w_poly(&self, branch: Branch) -> Poly {
        match branch {
            Branch::Plus => &self.u + &self.b,
            Branch::Minus => &self.u - &self.b,
        }
    }

    /// `W±` or one of its derivatives on `[-1, 1]`.
    pub fn eval_w(&self, branch: Branch, y: f64, order: usize) -> Result<f64> {
        if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&y) {
            return Err(Error::OutOfDomain {
                what: "y",
                value: y,
                lo: -1.0,
                hi: 1.0,
            });
        }
        Ok(self.w_unchecked(branch, y, order))
    }

    pub(crate) fn w_unchecked(&self, branch: Branch, y: f64, order: usize) -> f64 {
        let u = self.u.eval_deriv(y, order);
        let b = self.b.eval_deriv(y, order);
        match branch {
            Branch::Plus => u + b,
            Branch::Minus => u - b,
        }
    }

    /// The four endpoint speeds `[W+(1), W-(-1), W-(1), W+(-1)]`.
    pub fn endpoint_speeds(&self) -> [f64; 4] {
        [
            self.w_unchecked(Branch::Plus, 1.0, 0),
            self.w_unchecked(Branch::Minus, -1.0, 0),
            self.w_unchecked(Branch::Minus, 1.0, 0),
            self.w_unchecked(Branch::Plus, -1.0, 0),
        ]
    }

    /// Range of real spectral parameters, `[min{W-(1), W+(-1)}, max{W+(1), W-(-1)}]`.
    pub fn spectral_interval(&self) -> (f64, f64) {
        let [p1, mm1, m1, pm1] = self.endpoint_speeds();
        (m1.min(pm1), p1.max(mm1))
    }
}

/// Outcome of one assumption check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub pass: bool,
    /// Measured quantity (margin, gap, or offending coefficient).
    pub measured: f64,
    /// Sample point realizing the measured extreme, if any.
    pub at_y: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub regularity: AssumptionCheck,
    pub island: AssumptionCheck,
    pub monotone: AssumptionCheck,
    pub stern: AssumptionCheck,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.regularity.pass && self.island.pass && self.monotone.pass && self.stern.pass
    }

    pub fn failures(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, c) in [
            ("(R)", &self.regularity),
            ("(I)", &self.island),
            ("(M)", &self.monotone),
            ("(SS)", &self.stern),
        ] {
            if !c.pass {
                v.push(format!("{name} violated: {}", c.detail));
            }
        }
        v
    }
}

pub fn check_assumptions(profile: &BackgroundProfile) -> AssumptionReport {
    let regularity = AssumptionCheck {
        pass: true,
        measured: 0.0,
        at_y: None,
        detail: "polynomial fields are smooth".into(),
    };

    let (u0, b0) = (profile.u.coeff(0), profile.b.coeff(0));
    let island = AssumptionCheck {
        pass: u0 == 0.0 && b0 == 0.0,
        measured: u0.abs().max(b0.abs()),
        at_y: Some(0.0),
        detail: format!("u(0) = {u0}, b(0) = {b0}"),
    };

    let mut min_margin = f64::INFINITY;
    let mut margin_at = 0.0;
    let mut min_gap = f64::INFINITY;
    let mut gap_at = 0.0;
    for k in 0..CHECK_SAMPLES {
        let y = -1.0 + 2.0 * k as f64 / (CHECK_SAMPLES - 1) as f64;
        let margin = profile.b.eval_deriv(y, 1) - profile.u.eval_deriv(y, 1).abs();
        if margin < min_margin {
            min_margin = margin;
            margin_at = y;
        }
        let gap = profile.b.eval(y).abs() - profile.u.eval(y).abs();
        if gap < min_gap {
            min_gap = gap;
            gap_at = y;
        }
    }
    let c0 = profile.c0_margin;
    let monotone = AssumptionCheck {
        pass: min_margin > 0.0 && min_margin >= c0 - 1e-12,
        measured: min_margin,
        at_y: Some(margin_at),
        detail: format!("min b' - |u'| = {min_margin} at y = {margin_at} (required >= {c0})"),
    };
    let stern = AssumptionCheck {
        pass: min_gap >= -1e-14,
        measured: min_gap,
        at_y: Some(gap_at),
        detail: format!("min |b| - |u| = {min_gap} at y = {gap_at}"),
    };

    AssumptionReport {
        regularity,
        island,
        monotone,
        stern,
    }
}

/// Case number 1..=9 from the ordering of the endpoint speeds.
pub fn classify_case(profile: &BackgroundProfile) -> u8 {
    classify_case_with_tol(profile, CASE_TOL)
}

pub fn classify_case_with_tol(profile: &BackgroundProfile, tol: f64) -> u8 {
    use std::cmp::Ordering::*;
    let [p1, mm1, m1, pm1] = profile.endpoint_speeds();
    let cmp = |a: f64, b: f64| {
        if (a - b).abs() <= tol {
            Equal
        } else if a > b {
            Greater
        } else {
            Less
        }
    };
    match (cmp(p1, mm1), cmp(m1, pm1)) {
        (Greater, Greater) => 1,
        (Equal, Greater) => 2,
        (Less, Greater) => 3,
        (Greater, Equal) => 4,
        (Greater, Less) => 5,
        (Equal, Equal) => 6,
        (Equal, Less) => 7,
        (Less, Equal) => 8,
        (Less, Less) => 9,
    }
}

/// Where a spectral parameter sits relative to the spectral interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// Real, inside the spectral interval.
    D0,
    /// Off-axis above or below the spectral interval.
    Deps,
    /// Beyond the left end of the spectral interval.
    Bl,
    /// Beyond the right end of the spectral interval.
    Br,
}

/// A complex spectral parameter with its critical layers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub c_r: f64,
    /// Imaginary offset (strip) or radius (arcs).
    pub eps: f64,
    /// Angle on the arcs; zero in the strip.
    pub theta: f64,
    pub region: Region,
    pub y_c_plus: f64,
    pub y_c_minus: f64,
    pub branch_plus: Branch,
    pub branch_minus: Branch,
}

impl SpectralPoint {
    /// Classifies `c` and locates its critical layers. Points left or right
    /// of the spectral interval are attached to the nearest endpoint.
    pub fn new(ext: &ExtendedProfile, c: Complex64) -> Result<Self> {
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite spectral parameter {c}")));
        }
        let (lo, hi) = ext.spectral_interval();
        let tol = 1e-12 * (hi - lo).max(1.0);
        let (c_r, eps, theta, region) = if c.re < lo - tol {
            let d = c - lo;
            (lo, d.norm(), d.arg(), Region::Bl)
        } else if c.re > hi + tol {
            let d = c - hi;
            (hi, d.norm(), d.arg(), Region::Br)
        } else {
            let c_r = c.re.clamp(lo, hi);
            let region = if c.im == 0.0 { Region::D0 } else { Region::Deps };
            (c_r, c.im, 0.0, region)
        };
        let cp = ext.critical_points(c_r)?;
        Ok(Self {
            c_r,
            eps,
            theta,
            region,
            y_c_plus: cp.y_c_plus,
            y_c_minus: cp.y_c_minus,
            branch_plus: cp.branch_plus,
            branch_minus: cp.branch_minus,
        })
    }

    pub fn real(ext: &ExtendedProfile, c_r: f64) -> Result<Self> {
        Self::new(ext, Complex64::new(c_r, 0.0))
    }

    pub fn c(&self) -> Complex64 {
        match self.region {
            Region::D0 | Region::Deps => Complex64::new(self.c_r, self.eps),
            Region::Bl | Region::Br => {
                Complex64::new(self.c_r, 0.0) + Complex64::from_polar(self.eps, self.theta)
            }
        }
    }

    pub fn is_real(&self) -> bool {
        self.c().im == 0.0
    }

    pub fn y_c(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.y_c_plus,
            Side::Minus => self.y_c_minus,
        }
    }
}

/// Critical layers of a real parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoints {
    pub y_c_plus: f64,
    pub y_c_minus: f64,
    pub branch_plus: Branch,
    pub branch_minus: Branch,
}

/// `H(y, c) = (W+(y) - c)(W-(y) - c)` by direct subtraction.
pub fn eval_h(ext: &ExtendedProfile, y: f64, c: Complex64) -> Complex64 {
    let wp = ext.w(Branch::Plus, y, 0);
    let wm = ext.w(Branch::Minus, y, 0);
    (wp - c) * (wm - c)
}
