//! Quadrature rules: Gauss-Legendre nodes, adaptive Simpson, and an adaptive
//! Gauss rule that never samples panel endpoints (for integrands that are
//! bounded but evaluate as 0/0 at a split point).

use num_complex::Complex64;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = 0.5 * (1.0 - x);
            weights[i] = 0.5 * w;
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| f(a + h * t) * w)
            .sum::<Complex64>()
            * h
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Adaptive {
    pub value: Complex64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Tolerances for [`adaptive_simpson`].
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveTol {
    pub abs: f64,
    pub rel: f64,
    pub max_depth: u32,
    pub initial_panels: usize,
}

impl Default for AdaptiveTol {
    fn default() -> Self {
        Self {
            abs: 1e-13,
            rel: 1e-11,
            max_depth: 48,
            initial_panels: 16,
        }
    }
}

/// Adaptive Simpson quadrature over `[a, b]` split at the given interior
/// points (typically the critical layer, where the integrand peaks).
pub fn adaptive_simpson<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    splits: &[f64],
    tol: AdaptiveTol,
) -> Adaptive {
    if a == b {
        return Adaptive {
            value: Complex64::new(0.0, 0.0),
            converged: true,
            evaluations: 0,
        };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts = vec![lo];
    let mut interior: Vec<f64> = splits
        .iter()
        .copied()
        .filter(|&s| s > lo && s < hi)
        .collect();
    interior.sort_by(f64::total_cmp);
    cuts.extend(interior);
    cuts.push(hi);

    let mut panels = Vec::new();
    let n0 = tol.initial_panels.max(1);
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        for k in 0..n0 {
            let pl = l + (r - l) * k as f64 / n0 as f64;
            let pr = if k + 1 == n0 {
                r
            } else {
                l + (r - l) * (k + 1) as f64 / n0 as f64
            };
            panels.push((pl, pr));
        }
    }

    let mut evals = 0usize;
    let mut eval = |x: f64| {
        evals += 1;
        f(x)
    };
    let mut coarse = Vec::with_capacity(panels.len());
    let mut scale = 0.0;
    for &(l, r) in &panels {
        let fl = eval(l);
        let fm = eval(0.5 * (l + r));
        let fr = eval(r);
        let s = (r - l) / 6.0 * (fl + 4.0 * fm + fr);
        scale += (r - l) / 6.0 * (fl.norm() + 4.0 * fm.norm() + fr.norm());
        coarse.push((l, r, fl, fm, fr, s));
    }
    let target = tol.abs.max(tol.rel * scale);
    let per_panel = target / panels.len() as f64;

    let mut total = Complex64::new(0.0, 0.0);
    let mut converged = true;
    for (l, r, fl, fm, fr, s) in coarse {
        let (v, ok) = recurse(&mut eval, l, r, fl, fm, fr, s, per_panel, tol.max_depth);
        total += v;
        converged &= ok;
    }
    Adaptive {
        value: total * sign,
        converged,
        evaluations: evals,
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> (Complex64, bool) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if diff.norm() <= 15.0 * tol {
        return (left + right + diff / 15.0, true);
    }
    if depth == 0 || (m - a) <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
        return (left + right + diff / 15.0, false);
    }
    let (lv, lok) = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    let (rv, rok) = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    (lv + rv, lok && rok)
}

/// Cumulative integral of a function over a grid given by its node
/// coordinates, anchored to zero at node `anchor`. Each interval uses
/// Gauss-Legendre of the given order, so the integrand is never sampled at
/// a node.
pub fn cumulative_gauss<F: Fn(f64) -> Complex64>(
    nodes: &[f64],
    anchor: usize,
    order: usize,
    f: F,
) -> Vec<Complex64> {
    let gl = GaussLegendre::new(order);
    let n = nodes.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in anchor..n.saturating_sub(1) {
        out[i + 1] = out[i] + gl.integrate(nodes[i], nodes[i + 1], &f);
    }
    for i in (0..anchor).rev() {
        out[i] = out[i + 1] - gl.integrate(nodes[i], nodes[i + 1], &f);
    }
    out
}

/// Cumulative integral of `g(x, Q(x))` where `Q` is itself the cumulative
/// integral of `f` anchored at `inner_anchor` with value `q0`. `Q` is
/// re-integrated inside each interval rather than interpolated, so the outer
/// rule sees it at full accuracy. Returns `(Q, outer)` at the nodes.
pub fn cumulative_nested<F, G>(
    nodes: &[f64],
    inner_anchor: usize,
    q0: Complex64,
    outer_anchor: usize,
    order: usize,
    f: F,
    g: G,
) -> (Vec<Complex64>, Vec<Complex64>)
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64, Complex64) -> Complex64,
{
    let gl = GaussLegendre::new(order);
    let q: Vec<Complex64> = cumulative_gauss(nodes, inner_anchor, order, &f)
        .into_iter()
        .map(|v| v + q0)
        .collect();
    let interval = |i: usize| {
        let (a, b) = (nodes[i], nodes[i + 1]);
        gl.integrate(a, b, |x| g(x, q[i] + gl.integrate(a, x, &f)))
    };
    let n = nodes.len();
    let mut outer = vec![Complex64::new(0.0, 0.0); n];
    for i in outer_anchor..n.saturating_sub(1) {
        outer[i + 1] = outer[i] + interval(i);
    }
    for i in (0..outer_anchor).rev() {
        outer[i] = outer[i + 1] - interval(i);
    }
    (q, outer)
}

/// Change per panel, relative to the integral of `|f|`, treated as rounding
/// noise by [`adaptive_gauss`].
const ROUNDING_FLOOR: f64 = 1e-14;
/// Panel bisections after which [`adaptive_gauss`] stops refining and
/// reports non-convergence.
const BISECTION_BUDGET: usize = 1_000_000;

fn gauss8() -> &'static GaussLegendre {
    static G: OnceLock<GaussLegendre> = OnceLock::new();
    G.get_or_init(|| GaussLegendre::new(8))
}

/// Adaptive bisection with an 8-point Gauss rule compared against its two
/// halves. Same splitting and tolerance conventions as [`adaptive_simpson`].
pub fn adaptive_gauss<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    splits: &[f64],
    tol: AdaptiveTol,
) -> Adaptive {
    adaptive_gauss_scaled(
        |x| {
            let v = f(x);
            (v, v.norm())
        },
        a,
        b,
        splits,
        tol,
    )
}

/// As [`adaptive_gauss`] for integrands that also return the magnitude of
/// the terms they were computed from. Integrands formed by cancellation use
/// it so that rounding noise is recognised as such.
pub fn adaptive_gauss_scaled<F: Fn(f64) -> (Complex64, f64)>(
    f: F,
    a: f64,
    b: f64,
    splits: &[f64],
    tol: AdaptiveTol,
) -> Adaptive {
    if a == b {
        return Adaptive {
            value: Complex64::new(0.0, 0.0),
            converged: true,
            evaluations: 0,
        };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts = vec![lo];
    let mut interior: Vec<f64> = splits
        .iter()
        .copied()
        .filter(|&s| s > lo && s < hi)
        .collect();
    interior.sort_by(f64::total_cmp);
    cuts.extend(interior);
    cuts.push(hi);

    let gl = gauss8();
    let mut evals = 0usize;
    // value and integral of |f|, the latter sets the rounding floor
    let mut rule = |l: f64, r: f64| {
        evals += gl.nodes.len();
        let h = r - l;
        let (mut v, mut m) = (Complex64::new(0.0, 0.0), 0.0);
        for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
            let (fx, mag) = f(l + h * t);
            v += fx * w;
            m += mag * w;
        }
        (v * h, m * h)
    };
    let n0 = tol.initial_panels.max(1);
    let mut stack = Vec::new();
    let mut scale = 0.0;
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        for k in 0..n0 {
            let pl = l + (r - l) * k as f64 / n0 as f64;
            let pr = if k + 1 == n0 {
                r
            } else {
                l + (r - l) * (k + 1) as f64 / n0 as f64
            };
            let (v, _) = rule(pl, pr);
            scale += v.norm();
            stack.push((pl, pr, v, 0u32));
        }
    }
    let target = tol.abs.max(tol.rel * scale);
    let width = hi - lo;
    let mut total = Complex64::new(0.0, 0.0);
    let mut converged = true;
    let mut bisections = 0usize;
    while let Some((l, r, whole, depth)) = stack.pop() {
        bisections += 1;
        let m = 0.5 * (l + r);
        let (left, left_abs) = rule(l, m);
        let (right, right_abs) = rule(m, r);
        let diff = (left + right - whole).norm();
        // width-proportional share, floored at rounding level of the panel
        let allowed = (target * (r - l) / width).max(ROUNDING_FLOOR * (left_abs + right_abs));
        if diff <= allowed {
            total += left + right;
        } else if depth >= tol.max_depth
            || bisections >= BISECTION_BUDGET
            || (m - l) <= 1e-15 * (l.abs() + r.abs()).max(1e-300)
        {
            total += left + right;
            converged = false;
        } else {
            stack.push((l, m, left, depth + 1));
            stack.push((m, r, right, depth + 1));
        }
    }
    Adaptive {
        value: total * sign,
        converged,
        evaluations: evals,
    }
}
