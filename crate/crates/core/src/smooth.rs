//! Smooth transition functions used as cutoffs.

use crate::poly::Poly;
use std::sync::OnceLock;

/// C-infinity bump equal to 1 on `|y| <= 1/2` and 0 on `|y| >= 3/4`.
/// Returns the value and its first two derivatives.
pub fn source_cutoff(y: f64) -> [f64; 3] {
    let t = (0.75 - y.abs()) * 4.0;
    let [p, p1, p2] = exp_transition(t);
    let s = if y >= 0.0 { -4.0 } else { 4.0 };
    [p, p1 * s, p2 * 16.0]
}

/// Transition from 0 (t <= 0) to 1 (t >= 1) built from `exp(-1/t)`,
/// with first and second derivatives in `t`.
pub fn exp_transition(t: f64) -> [f64; 3] {
    if t <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    if t >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    // psi = 1 / (1 + exp(g)), g = 1/t - 1/(1-t)
    let s = 1.0 - t;
    let g = 1.0 / t - 1.0 / s;
    if g > 700.0 {
        return [0.0, 0.0, 0.0];
    }
    if g < -700.0 {
        return [1.0, 0.0, 0.0];
    }
    let eg = g.exp();
    let psi = 1.0 / (1.0 + eg);
    let w = eg / ((1.0 + eg) * (1.0 + eg));
    let g1 = -1.0 / (t * t) - 1.0 / (s * s);
    let g2 = 2.0 / (t * t * t) - 2.0 / (s * s * s);
    let d1 = -w * g1;
    let d2 = -(1.0 - 2.0 * psi) * d1 * g1 - w * g2;
    [psi, d1, d2]
}

fn c5_step_poly() -> &'static Poly {
    static P: OnceLock<Poly> = OnceLock::new();
    P.get_or_init(|| {
        // x^6 * sum_{n=0}^{5} C(5+n, n) C(11, 5-n) (-x)^n
        let binom = |n: u64, k: u64| -> f64 {
            (1..=k).fold(1.0, |acc, i| acc * (n + 1 - i) as f64 / i as f64)
        };
        let mut coeffs = vec![0.0; 12];
        for n in 0..=5u64 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[6 + n as usize] = sign * binom(5 + n, n) * binom(11, 5 - n);
        }
        Poly::new(coeffs)
    })
}

/// Degree-11 smoothstep: 0 at x<=0, 1 at x>=1, first five derivatives
/// vanish at both ends. Returns derivatives 0..=5.
pub fn c5_step(x: f64) -> [f64; 6] {
    let mut out = [0.0; 6];
    if x <= 0.0 {
        return out;
    }
    if x >= 1.0 {
        out[0] = 1.0;
        return out;
    }
    let p = c5_step_poly();
    for (k, o) in out.iter_mut().enumerate() {
        *o = p.eval_deriv(x, k);
    }
    out
}

/// Cutoff equal to 1 on `[0, width/4]` and 0 beyond `3 width/4`,
/// with derivatives 0..=5 in `s`.
pub fn plateau_cutoff(s: f64, width: f64) -> [f64; 6] {
    let half = 0.5 * width;
    let x = (s - 0.25 * width) / half;
    let st = c5_step(x);
    let mut out = [0.0; 6];
    out[0] = 1.0 - st[0];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        *o = -st[k] / half.powi(k as i32);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn source_cutoff_plateaus() {
        assert_eq!(source_cutoff(0.0), [1.0, 0.0, 0.0]);
        assert_eq!(source_cutoff(0.5)[0], 1.0);
        assert_eq!(source_cutoff(-0.5)[0], 1.0);
        for y in [0.75, -0.75, 0.9, -1.0] {
            let v = source_cutoff(y);
            assert!(v.iter().all(|x| x.abs() < 1e-12), "{y} {v:?}");
        }
    }

    #[test]
    fn source_cutoff_derivatives_match_differences() {
        let h = 1e-5;
        for y in [0.55, 0.6, 0.63, 0.7, -0.6, -0.68] {
            let v = source_cutoff(y);
            let p = source_cutoff(y + h)[0];
            let m = source_cutoff(y - h)[0];
            assert_abs_diff_eq!(v[1], (p - m) / (2.0 * h), epsilon = 1e-7);
            assert_abs_diff_eq!(v[2], (p - 2.0 * v[0] + m) / (h * h), epsilon = 1e-3);
        }
    }

    #[test]
    fn c5_step_endpoints() {
        let a = c5_step(1e-9);
        let b = c5_step(1.0 - 1e-9);
        assert!(a[..5].iter().all(|x| x.abs() < 1e-8));
        assert_abs_diff_eq!(b[0], 1.0, epsilon = 1e-12);
        assert!(b[1..5].iter().all(|x| x.abs() < 1e-6));
        assert_abs_diff_eq!(c5_step(0.5)[0], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn plateau_cutoff_shape() {
        let w = 0.2;
        assert_eq!(plateau_cutoff(0.01, w)[0], 1.0);
        assert_eq!(plateau_cutoff(0.16, w)[0], 0.0);
        let h = 1e-6;
        let s = 0.09;
        let v = plateau_cutoff(s, w);
        let d = (plateau_cutoff(s + h, w)[0] - plateau_cutoff(s - h, w)[0]) / (2.0 * h);
        assert_abs_diff_eq!(v[1], d, epsilon = 1e-6);
        let d2 = (plateau_cutoff(s + h, w)[1] - plateau_cutoff(s - h, w)[1]) / (2.0 * h);
        assert_abs_diff_eq!(v[2], d2, epsilon = 1e-3);
    }
}
