//! Monotone extension of `W±` past the walls so that every real spectral
//! parameter has a critical layer on each side.
//!
//! Each branch is first continued by its own polynomial; if that loses
//! monotonicity before the required range is covered, a Taylor-jet
//! construction is used instead: the quintic Taylor polynomial at the wall
//! is faded out by a plateau cutoff, leaving a linear tail with the wall
//! slope.

use super::{classify_case, BackgroundProfile, Branch, CriticalPoints, Side};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::smooth::plateau_cutoff;
use serde::{Deserialize, Serialize};

/// Sample count for monotonicity checks of a continuation.
const MONO_SAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtensionKind {
    None,
    Natural,
    Lemma,
}

/// Taylor-jet continuation past a wall.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaExtension {
    pub wall: f64,
    /// `f^(n)(wall) / n!` for `n = 0..=5`.
    pub jet: [f64; 6],
    /// Width of the blending zone.
    pub delta1: f64,
}

impl LemmaExtension {
    fn new(poly: &Poly, wall: f64, reach: f64) -> Result<Self> {
        let mut jet = [0.0; 6];
        let mut fact = 1.0;
        for (n, j) in jet.iter_mut().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            *j = poly.eval_deriv(wall, n) / fact;
        }
        let slope = jet[1];
        if slope == 0.0 {
            return Err(Error::Unreachable { target: f64::NAN });
        }
        let max_high = (2..=5)
            .map(|n| (jet[n] * factorial(n)).abs())
            .fold(0.0, f64::max);
        let span = (reach - wall).abs().max(1e-3);
        let mut delta1 = span / 8.0;
        if max_high > 0.0 {
            delta1 = delta1.min(slope.abs() / (2.0 * max_high * 8.0));
        }
        let dir = (reach - wall).signum();
        for _ in 0..60 {
            let ext = Self { wall, jet, delta1 };
            let ok = (0..=2000).all(|k| {
                let s = delta1 * k as f64 / 2000.0;
                ext.eval(wall + dir * s, 1) * slope.signum() >= 0.5 * slope.abs()
            });
            if ok {
                return Ok(ext);
            }
            delta1 *= 0.5;
        }
        Err(Error::Unreachable { target: f64::NAN })
    }

    pub fn slope(&self) -> f64 {
        self.jet[1]
    }

    /// Point where the linear tail attains `target`.
    pub fn reach(&self, target: f64) -> f64 {
        self.wall + (target - self.jet[0]) / self.jet[1]
    }

    pub fn eval(&self, y: f64, order: usize) -> f64 {
        let z = y - self.wall;
        let sigma: f64 = if z >= 0.0 { 1.0 } else { -1.0 };
        let chi = plateau_cutoff(z.abs(), self.delta1);
        // higher-order part P(z) = sum_{n>=2} jet[n] z^n and its derivatives
        let mut p = [0.0; 6];
        for (m, pm) in p.iter_mut().enumerate() {
            for n in 2.max(m)..=5 {
                *pm += self.jet[n] * falling(n, m) * z.powi((n - m) as i32);
            }
        }
        let linear = match order {
            0 => self.jet[0] + self.jet[1] * z,
            1 => self.jet[1],
            _ => 0.0,
        };
        let mut blend = 0.0;
        for k in 0..=order.min(5) {
            let ck = chi[k] * sigma.powi(k as i32);
            blend += binom(order, k) * ck * p[order - k];
        }
        linear + blend
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

fn falling(n: usize, m: usize) -> f64 {
    ((n - m + 1)..=n).fold(1.0, |a, k| a * k as f64)
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// How one branch continues past one wall.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BranchExtension {
    None,
    Natural,
    Lemma(LemmaExtension),
}

impl BranchExtension {
    pub fn kind(&self) -> ExtensionKind {
        match self {
            BranchExtension::None => ExtensionKind::None,
            BranchExtension::Natural => ExtensionKind::Natural,
            BranchExtension::Lemma(_) => ExtensionKind::Lemma,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendedProfile {
    base: BackgroundProfile,
    w_plus: Poly,
    w_minus: Poly,
    pub a_minus: f64,
    pub a_plus: f64,
    pub case_id: u8,
    /// Continuations indexed `[branch][side]` with branch 0 = W+, side 0 = right.
    ext: [[BranchExtension; 2]; 2],
}

fn bi(branch: Branch) -> usize {
    match branch {
        Branch::Plus => 0,
        Branch::Minus => 1,
    }
}

fn si(side: Side) -> usize {
    match side {
        Side::Plus => 0,
        Side::Minus => 1,
    }
}

impl ExtendedProfile {
    pub fn new(base: &BackgroundProfile) -> Result<Self> {
        let (lo, hi) = base.spectral_interval();
        let w_plus = base.w_poly(Branch::Plus);
        let w_minus = base.w_poly(Branch::Minus);
        if w_plus.eval_deriv(1.0, 1) <= 0.0
            || w_plus.eval_deriv(-1.0, 1) <= 0.0
            || w_minus.eval_deriv(1.0, 1) >= 0.0
            || w_minus.eval_deriv(-1.0, 1) >= 0.0
        {
            return Err(Error::Assumption(
                "characteristic speeds are not strictly monotone at the walls".into(),
            ));
        }
        // targets per side: right needs W- down to lo and W+ up to hi,
        // left needs W- up to hi and W+ down to lo
        let (right, a_plus) = extend_side(&w_plus, &w_minus, 1.0, hi, lo)?;
        let (left, a_minus) = extend_side(&w_plus, &w_minus, -1.0, lo, hi)?;
        let ext = [
            [right[0].clone(), left[0].clone()],
            [right[1].clone(), left[1].clone()],
        ];
        let out = Self {
            base: base.clone(),
            w_plus,
            w_minus,
            a_minus,
            a_plus,
            case_id: classify_case(base),
            ext,
        };
        out.verify_coverage(lo, hi)?;
        Ok(out)
    }

    fn verify_coverage(&self, lo: f64, hi: f64) -> Result<()> {
        let tol = 1e-10 * (hi - lo).max(1.0);
        let checks = [
            (self.w(Branch::Minus, self.a_plus, 0), lo, true),
            (self.w(Branch::Plus, self.a_plus, 0), hi, false),
            (self.w(Branch::Minus, self.a_minus, 0), hi, false),
            (self.w(Branch::Plus, self.a_minus, 0), lo, true),
        ];
        for (v, target, below) in checks {
            let ok = if below { v <= target + tol } else { v >= target - tol };
            if !ok {
                return Err(Error::Unreachable { target });
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &BackgroundProfile {
        &self.base
    }

    pub fn spectral_interval(&self) -> (f64, f64) {
        self.base.spectral_interval()
    }

    pub fn extension(&self, branch: Branch, side: Side) -> &BranchExtension {
        &self.ext[bi(branch)][si(side)]
    }

    pub fn extension_kind(&self, branch: Branch, side: Side) -> ExtensionKind {
        self.extension(branch, side).kind()
    }

    /// `W̃±` or a derivative, with a domain check against `[a-, a+]`.
    pub fn eval_w(&self, branch: Branch, y: f64, order: usize) -> Result<f64> {
        let tol = 1e-12;
        if y < self.a_minus - tol || y > self.a_plus + tol {
            return Err(Error::OutOfDomain {
                what: "y",
                value: y,
                lo: self.a_minus,
                hi: self.a_plus,
            });
        }
        Ok(self.w(branch, y, order))
    }

    /// `W̃±` or a derivative without a domain check.
    pub fn w(&self, branch: Branch, y: f64, order: usize) -> f64 {
        let poly = match branch {
            Branch::Plus => &self.w_plus,
            Branch::Minus => &self.w_minus,
        };
        if (-1.0..=1.0).contains(&y) {
            return poly.eval_deriv(y, order);
        }
        let side = if y > 1.0 { Side::Plus } else { Side::Minus };
        match &self.ext[bi(branch)][si(side)] {
            BranchExtension::Lemma(l) => l.eval(y, order),
            _ => poly.eval_deriv(y, order),
        }
    }

    /// Extended fields `u = (W̃+ + W̃-)/2`, `b = (W̃+ - W̃-)/2` and derivatives.
    pub fn u(&self, y: f64, order: usize) -> f64 {
        0.5 * (self.w(Branch::Plus, y, order) + self.w(Branch::Minus, y, order))
    }

    pub fn b(&self, y: f64, order: usize) -> f64 {
        0.5 * (self.w(Branch::Plus, y, order) - self.w(Branch::Minus, y, order))
    }

    /// Critical layers of a real parameter in the spectral interval.
    pub fn critical_points(&self, c_r: f64) -> Result<CriticalPoints> {
        let (lo, hi) = self.spectral_interval();
        let tol = 1e-12 * (hi - lo).max(1.0);
        if !(c_r >= lo - tol && c_r <= hi + tol) {
            return Err(Error::OutOfDomain {
                what: "c_r",
                value: c_r,
                lo,
                hi,
            });
        }
        let c_r = c_r.clamp(lo, hi);
        let (branch_plus, branch_minus) = if c_r >= 0.0 {
            (Branch::Plus, Branch::Minus)
        } else {
            (Branch::Minus, Branch::Plus)
        };
        if c_r == 0.0 {
            return Ok(CriticalPoints {
                y_c_plus: 0.0,
                y_c_minus: 0.0,
                branch_plus,
                branch_minus,
            });
        }
        let y_c_plus = self.invert(branch_plus, c_r, 0.0, self.a_plus)?;
        let y_c_minus = self.invert(branch_minus, c_r, self.a_minus, 0.0)?;
        Ok(CriticalPoints {
            y_c_plus,
            y_c_minus,
            branch_plus,
            branch_minus,
        })
    }

    /// Bisection to width 1e-10 followed by three Newton steps.
    fn invert(&self, branch: Branch, target: f64, lo: f64, hi: f64) -> Result<f64> {
        let g = |y: f64| self.w(branch, y, 0) - target;
        let (mut a, mut b) = (lo, hi);
        let (ga, gb) = (g(a), g(b));
        let scale = target.abs().max(1.0);
        if ga == 0.0 {
            return Ok(a);
        }
        if gb == 0.0 {
            return Ok(b);
        }
        if ga.signum() == gb.signum() {
            // allow round-off at the extended endpoints
            if ga.abs() <= 1e-10 * scale {
                return Ok(a);
            }
            if gb.abs() <= 1e-10 * scale {
                return Ok(b);
            }
            return Err(Error::Unreachable { target });
        }
        let sa = ga.signum();
        while b - a > 1e-10 {
            let m = 0.5 * (a + b);
            let gm = g(m);
            if gm == 0.0 {
                return Ok(m);
            }
            if gm.signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        let mut y = 0.5 * (a + b);
        for _ in 0..3 {
            let d = self.w(branch, y, 1);
            let next = y - g(y) / d;
            if next.is_finite() && next >= a - 1e-10 && next <= b + 1e-10 {
                y = next;
            }
        }
        Ok(y.clamp(lo, hi))
    }
}

/// Extends both branches past `wall` until W+ attains `plus_target` and W-
/// attains `minus_target`. Returns the continuations and the common endpoint.
fn extend_side(
    w_plus: &Poly,
    w_minus: &Poly,
    wall: f64,
    plus_target: f64,
    minus_target: f64,
) -> Result<([BranchExtension; 2], f64)> {
    let polys = [w_plus, w_minus];
    let targets = [plus_target, minus_target];
    let needed: Vec<bool> = (0..2)
        .map(|k| {
            let v = polys[k].eval(wall);
            let t = targets[k];
            let tol = 1e-12 * t.abs().max(1.0);
            // direction of travel in value as y moves away from the origin
            let moving_up = polys[k].eval_deriv(wall, 1) * wall > 0.0;
            if moving_up {
                v < t - tol
            } else {
                v > t + tol
            }
        })
        .collect();

    if !needed.iter().any(|&n| n) {
        return Ok(([BranchExtension::None, BranchExtension::None], wall));
    }

    // reach of each required branch by natural continuation (if monotone)
    let mut kinds: [Option<BranchExtension>; 2] = [None, None];
    let mut reach = wall;
    for k in 0..2 {
        if !needed[k] {
            continue;
        }
        match natural_reach(polys[k], wall, targets[k]) {
            Some(d) => {
                kinds[k] = Some(BranchExtension::Natural);
                reach = if wall > 0.0 { reach.max(d) } else { reach.min(d) };
            }
            None => {
                let guess = linear_reach(polys[k], wall, targets[k]);
                let l = LemmaExtension::new(polys[k], wall, guess)?;
                let d = l.reach(targets[k]);
                kinds[k] = Some(BranchExtension::Lemma(l));
                reach = if wall > 0.0 { reach.max(d) } else { reach.min(d) };
            }
        }
    }

    // every branch must stay monotone up to the common endpoint
    for _ in 0..8 {
        let mut changed = false;
        for k in 0..2 {
            let keep_natural = matches!(kinds[k], None | Some(BranchExtension::Natural))
                && monotone_on(polys[k], wall, reach);
            if keep_natural {
                kinds[k] = Some(BranchExtension::Natural);
                continue;
            }
            if let Some(BranchExtension::Lemma(_)) = kinds[k] {
                continue;
            }
            let l = LemmaExtension::new(polys[k], wall, reach)?;
            if needed[k] {
                let d = l.reach(targets[k]);
                let further = if wall > 0.0 { d > reach } else { d < reach };
                if further {
                    reach = d;
                    changed = true;
                }
            }
            kinds[k] = Some(BranchExtension::Lemma(l));
        }
        if !changed {
            let [a, b] = kinds;
            return Ok(([a.unwrap(), b.unwrap()], reach));
        }
    }
    Err(Error::Unreachable {
        target: targets[0],
    })
}

fn linear_reach(poly: &Poly, wall: f64, target: f64) -> f64 {
    wall + (target - poly.eval(wall)) / poly.eval_deriv(wall, 1)
}

/// Monotone on the segment between `wall` and `end` with the wall's slope sign.
fn monotone_on(poly: &Poly, wall: f64, end: f64) -> bool {
    let s = poly.eval_deriv(wall, 1).signum();
    (0..=MONO_SAMPLES).all(|k| {
        let y = wall + (end - wall) * k as f64 / MONO_SAMPLES as f64;
        poly.eval_deriv(y, 1) * s > 0.0
    })
}

/// Point where the polynomial continuation reaches `target`, provided it
/// stays monotone on the way.
fn natural_reach(poly: &Poly, wall: f64, target: f64) -> Option<f64> {
    let dir = wall.signum();
    let s = poly.eval_deriv(wall, 1).signum();
    let lin = (linear_reach(poly, wall, target) - wall).abs();
    let max_dist = (4.0 * lin).clamp(1.0, 1e4);
    let steps = 20_000;
    let h = max_dist / steps as f64;
    let g = |y: f64| poly.eval(y) - target;
    let mut prev = wall;
    let mut gprev = g(wall);
    for k in 1..=steps {
        let y = wall + dir * h * k as f64;
        if poly.eval_deriv(y, 1) * s <= 0.0 {
            return None;
        }
        let gy = g(y);
        if gy == 0.0 {
            return Some(y);
        }
        if gy.signum() != gprev.signum() {
            let (mut a, mut b) = (prev, y);
            let sa = gprev.signum();
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let gm = g(m);
                if gm == 0.0 || (b - a).abs() < 1e-15 {
                    return Some(m);
                }
                if gm.signum() == sa {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(0.5 * (a + b));
        }
        prev = y;
        gprev = gy;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ext(u: &[f64], b: &[f64]) -> ExtendedProfile {
        ExtendedProfile::new(&BackgroundProfile::new(u, b, 0.1).unwrap()).unwrap()
    }

    #[test]
    fn linear_case_one_extends_to_three() {
        let e = ext(&[0.0, 0.5], &[0.0, 1.0]);
        assert_eq!(e.case_id, 1);
        assert_abs_diff_eq!(e.a_plus, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.a_minus, -3.0, epsilon = 1e-12);
        assert_eq!(e.extension_kind(Branch::Minus, Side::Plus), ExtensionKind::Natural);
        assert_eq!(e.extension_kind(Branch::Plus, Side::Plus), ExtensionKind::Natural);
    }

    #[test]
    fn symmetric_case_six_needs_nothing() {
        let e = ext(&[0.0], &[0.0, 1.0]);
        assert_eq!(e.case_id, 6);
        assert_eq!(e.a_plus, 1.0);
        assert_eq!(e.a_minus, -1.0);
        assert_eq!(e.extension_kind(Branch::Plus, Side::Minus), ExtensionKind::None);
    }

    #[test]
    fn quadratic_case_five_extends_left_to_minus_two() {
        let e = ext(&[0.0], &[0.0, 1.0, 0.2]);
        assert_eq!(e.case_id, 5);
        assert_abs_diff_eq!(e.a_minus, -2.0, epsilon = 1e-12);
        assert_eq!(e.a_plus, 1.0);
        assert_abs_diff_eq!(e.w(Branch::Minus, -2.0, 0), 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(e.w(Branch::Plus, -2.0, 0), -1.2, epsilon = 1e-12);
    }

    #[test]
    fn lemma_construction_when_polynomial_turns() {
        // u = 0, b = y + 0.45 y^2: W- = -y - 0.45y^2 turns at y = -1/0.9 > -2
        let e = ext(&[0.0], &[0.0, 1.0, 0.45]);
        assert_eq!(e.extension_kind(Branch::Minus, Side::Minus), ExtensionKind::Lemma);
        let (lo, hi) = e.spectral_interval();
        assert!(e.w(Branch::Minus, e.a_minus, 0) >= hi - 1e-10);
        assert!(e.w(Branch::Plus, e.a_minus, 0) <= lo + 1e-10);
        let n = 10_000;
        for k in 0..n {
            let y0 = e.a_minus + (e.a_plus - e.a_minus) * k as f64 / n as f64;
            let y1 = e.a_minus + (e.a_plus - e.a_minus) * (k + 1) as f64 / n as f64;
            assert!(e.w(Branch::Plus, y1, 0) > e.w(Branch::Plus, y0, 0));
            assert!(e.w(Branch::Minus, y1, 0) < e.w(Branch::Minus, y0, 0));
        }
        // jet matches at the wall up to fifth order
        let l = match e.extension(Branch::Minus, Side::Minus) {
            BranchExtension::Lemma(l) => l.clone(),
            _ => unreachable!(),
        };
        let p = Poly::new(vec![0.0, -1.0, -0.45]);
        for k in 0..=5 {
            assert_abs_diff_eq!(l.eval(-1.0 - 1e-12, k), p.eval_deriv(-1.0, k), epsilon = 1e-9);
        }
    }

    #[test]
    fn lemma_derivatives_consistent() {
        let p = Poly::new(vec![0.0, 1.0, 0.3, -0.2, 0.05]);
        let l = LemmaExtension::new(&p, 1.0, 3.0).unwrap();
        let h = 1e-6;
        for y in [1.0 + 0.3 * l.delta1, 1.0 + 0.5 * l.delta1, 1.0 + 0.7 * l.delta1] {
            for k in 0..4 {
                let fd = (l.eval(y + h, k) - l.eval(y - h, k)) / (2.0 * h);
                assert_abs_diff_eq!(l.eval(y, k + 1), fd, epsilon = 1e-4 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn critical_points_examples() {
        let e = ext(&[0.0], &[0.0, 1.0]);
        let cp = e.critical_points(0.5).unwrap();
        assert_abs_diff_eq!(cp.y_c_plus, 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(cp.y_c_minus, -0.5, epsilon = 1e-13);
        assert_eq!(cp.branch_plus, Branch::Plus);
        assert_eq!(cp.branch_minus, Branch::Minus);

        let e = ext(&[0.0, 0.5], &[0.0, 1.0]);
        let cp = e.critical_points(0.75).unwrap();
        assert_abs_diff_eq!(cp.y_c_plus, 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(cp.y_c_minus, -1.5, epsilon = 1e-13);
        let cp = e.critical_points(0.0).unwrap();
        assert_eq!((cp.y_c_plus, cp.y_c_minus), (0.0, 0.0));
        assert!(e.critical_points(1.6).is_err());
    }

    #[test]
    fn critical_points_on_dense_scan() {
        for (u, b) in [
            (vec![0.0, 0.5], vec![0.0, 1.0]),
            (vec![0.0], vec![0.0, 1.0, 0.2]),
            (vec![0.0, 0.3, 0.1], vec![0.0, 1.0]),
            (vec![0.0, -0.2], vec![0.0, 1.0, -0.1]),
        ] {
            let e = ext(&u, &b);
            let (lo, hi) = e.spectral_interval();
            for k in 0..1000 {
                let c = lo + (hi - lo) * k as f64 / 999.0;
                let cp = e.critical_points(c).unwrap();
                assert!(cp.y_c_minus <= 0.0 && cp.y_c_plus >= 0.0);
                let rp = e.w(cp.branch_plus, cp.y_c_plus, 0) - c;
                let rm = e.w(cp.branch_minus, cp.y_c_minus, 0) - c;
                let scale = 1e-13 * c.abs().max(1.0);
                assert!(rp.abs() <= scale && rm.abs() <= scale, "{c}: {rp} {rm}");
            }
        }
    }

    proptest! {
        #[test]
        fn extension_is_monotone(
            u1 in -0.4f64..0.4, u2 in -0.2f64..0.2, b2 in -0.3f64..0.3, b3 in -0.1f64..0.1,
        ) {
            let p = BackgroundProfile::new(&[0.0, u1, u2], &[0.0, 1.0, b2, b3], 0.05).unwrap();
            prop_assume!(super::super::check_assumptions(&p).all_pass());
            let e = ExtendedProfile::new(&p).unwrap();
            let n = 4000;
            let mut prev_p = e.w(Branch::Plus, e.a_minus, 0);
            let mut prev_m = e.w(Branch::Minus, e.a_minus, 0);
            for k in 1..=n {
                let y = e.a_minus + (e.a_plus - e.a_minus) * k as f64 / n as f64;
                let wp = e.w(Branch::Plus, y, 0);
                let wm = e.w(Branch::Minus, y, 0);
                prop_assert!(wp > prev_p && wm < prev_m);
                prev_p = wp;
                prev_m = wm;
            }
            for y in [-1.0, -0.5, 0.0, 0.7, 1.0] {
                let d = e.w(Branch::Plus, y, 0) - p.eval_w(Branch::Plus, y, 0).unwrap();
                prop_assert!(d.abs() <= 1e-14);
            }
        }
    }
}
