//! Time integration of one Fourier mode of the linearised equations on a
//! uniform grid of `[-1, 1]`:
//!
//! ```text
//! ∂t ψ = -iα u ψ + iα b φ + 2iα Δα⁻¹(u'' ψ - b'' φ + u' ∂y ψ - b' ∂y φ)
//! ∂t φ = -iα u φ + iα b ψ
//! ```
//!
//! with `Δα = ∂y² - α²` under Dirichlet conditions, fourth-order first
//! derivatives and classical RK4.

use crate::error::{Error, Result};
use crate::island::{limiting_profiles, IslandOptions, IslandProfile};
use crate::poly::CPoly;
use crate::profiles::{BackgroundProfile, ExtendedProfile};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Uniform nodes `y_k = -1 + 2k/n`, `k = 0..=n`.
pub fn uniform_nodes(n: usize) -> Vec<f64> {
    let h = 2.0 / n as f64;
    (0..=n).map(|k| -1.0 + h * k as f64).collect()
}

/// Factorised second-order discretisation of `∂y² - α²` with Dirichlet
/// conditions on `n` intervals of `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct Helmholtz {
    n: usize,
    alpha: f64,
    off: f64,
    /// Forward-elimination multipliers and pivots of the Thomas algorithm.
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Helmholtz {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput("Helmholtz grid needs at least 3 intervals".into()));
        }
        let h = 2.0 / n as f64;
        let off = 1.0 / (h * h);
        let diag = -2.0 * off - alpha * alpha;
        let m = n - 1;
        let mut upper = vec![0.0; m];
        let mut inv_pivot = vec![0.0; m];
        let mut prev = 0.0;
        for k in 0..m {
            let piv = diag - off * prev;
            inv_pivot[k] = 1.0 / piv;
            prev = off / piv;
            upper[k] = prev;
        }
        Ok(Self {
            n,
            alpha,
            off,
            upper,
            inv_pivot,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn intervals(&self) -> usize {
        self.n
    }

    /// Solves `Δα g = rhs` on the interior; `rhs` and the result have `n + 1`
    /// entries and the boundary entries of the result are zero.
    pub fn solve_into(&self, rhs: &[Complex64], out: &mut [Complex64]) {
        let m = self.n - 1;
        debug_assert_eq!(rhs.len(), self.n + 1);
        out[0] = ZERO;
        out[self.n] = ZERO;
        let mut prev = ZERO;
        for k in 0..m {
            prev = (rhs[k + 1] - prev * self.off) * self.inv_pivot[k];
            out[k + 1] = prev;
        }
        for k in (0..m - 1).rev() {
            out[k + 1] = out[k + 1] - out[k + 2] * self.upper[k];
        }
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.n + 1];
        self.solve_into(rhs, &mut out);
        out
    }
}

/// Fourth-order first derivative on a uniform grid with one-sided
/// closures at the two nodes next to each end.
pub fn derivative_into(f: &[Complex64], h: f64, out: &mut [Complex64]) {
    let n = f.len() - 1;
    let s = 1.0 / (12.0 * h);
    out[0] = (f[0] * -25.0 + f[1] * 48.0 - f[2] * 36.0 + f[3] * 16.0 - f[4] * 3.0) * s;
    out[1] = (f[0] * -3.0 - f[1] * 10.0 + f[2] * 18.0 - f[3] * 6.0 + f[4]) * s;
    for k in 2..n - 1 {
        out[k] = (f[k - 2] - f[k - 1] * 8.0 + f[k + 1] * 8.0 - f[k + 2]) * s;
    }
    out[n - 1] = (f[n] * 3.0 + f[n - 1] * 10.0 - f[n - 2] * 18.0 + f[n - 3] * 6.0 - f[n - 4]) * s;
    out[n] = (f[n] * 25.0 - f[n - 1] * 48.0 + f[n - 2] * 36.0 - f[n - 3] * 16.0 + f[n - 4] * 3.0) * s;
}

/// `ψ̂`, `φ̂` of one mode at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeState {
    pub alpha: f64,
    pub t: f64,
    pub psi: Vec<Complex64>,
    pub phi: Vec<Complex64>,
}

impl ModeState {
    /// Samples polynomial initial data; both must vanish at `±1`.
    pub fn from_polynomials(alpha: f64, n: usize, psi0: &CPoly, phi0: &CPoly) -> Result<Self> {
        for (name, p) in [("psi0", psi0), ("phi0", phi0)] {
            let scale = p.coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max);
            for y in [-1.0, 1.0] {
                if p.eval(y).norm() > 1e-12 * scale {
                    return Err(Error::InvalidInput(format!("{name} does not vanish at y = {y}")));
                }
            }
        }
        let y = uniform_nodes(n);
        let mut psi: Vec<Complex64> = y.iter().map(|&v| psi0.eval(v)).collect();
        let mut phi: Vec<Complex64> = y.iter().map(|&v| phi0.eval(v)).collect();
        for v in [&mut psi, &mut phi] {
            v[0] = ZERO;
            v[n] = ZERO;
        }
        Ok(Self {
            alpha,
            t: 0.0,
            psi,
            phi,
        })
    }

    pub fn intervals(&self) -> usize {
        self.psi.len() - 1
    }

    pub fn centre_index(&self) -> usize {
        self.intervals() / 2
    }

    /// `(Σ |ψ|² h, Σ |φ|² h)`.
    pub fn l2_norms(&self) -> (f64, f64) {
        let h = 2.0 / self.intervals() as f64;
        let norm = |v: &[Complex64]| (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * h).sqrt();
        (norm(&self.psi), norm(&self.phi))
    }

    pub fn sup_norm(&self) -> f64 {
        self.psi
            .iter()
            .chain(&self.phi)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// CSV rows `y, re/im ψ, re/im φ`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("y,re_psi,im_psi,re_phi,im_phi\n");
        for (k, y) in uniform_nodes(self.intervals()).iter().enumerate() {
            s.push_str(&format!(
                "{y:e},{:e},{:e},{:e},{:e}\n",
                self.psi[k].re, self.psi[k].im, self.phi[k].re, self.phi[k].im
            ));
        }
        s
    }
}

/// Coefficients and workspace for the right-hand side on a fixed grid.
#[derive(Clone, Debug)]
pub struct ModeSystem {
    alpha: f64,
    h: f64,
    u: [Vec<f64>; 3],
    b: [Vec<f64>; 3],
    helmholtz: Helmholtz,
    max_speed: f64,
}

/// Buffers reused across right-hand-side evaluations.
#[derive(Clone, Debug)]
struct Workspace {
    dpsi_y: Vec<Complex64>,
    dphi_y: Vec<Complex64>,
    source: Vec<Complex64>,
    inverse: Vec<Complex64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            dpsi_y: vec![ZERO; n + 1],
            dphi_y: vec![ZERO; n + 1],
            source: vec![ZERO; n + 1],
            inverse: vec![ZERO; n + 1],
        }
    }
}

impl ModeSystem {
    pub fn new(profile: &BackgroundProfile, alpha: f64, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidInput("time integration needs at least 8 intervals".into()));
        }
        if !(alpha.is_finite() && alpha != 0.0) {
            return Err(Error::InvalidInput("alpha must be finite and nonzero".into()));
        }
        let y = uniform_nodes(n);
        let sample = |p: &crate::poly::Poly, k: usize| -> Vec<f64> {
            y.iter().map(|&v| p.eval_deriv(v, k)).collect()
        };
        let (up, bp) = (profile.u(), profile.b());
        let u = [sample(up, 0), sample(up, 1), sample(up, 2)];
        let b = [sample(bp, 0), sample(bp, 1), sample(bp, 2)];
        let max_speed = u[0]
            .iter()
            .zip(&b[0])
            .map(|(a, c)| (a + c).abs().max((a - c).abs()))
            .fold(0.0, f64::max);
        Ok(Self {
            alpha,
            h: 2.0 / n as f64,
            u,
            b,
            helmholtz: Helmholtz::new(alpha, n)?,
            max_speed,
        })
    }

    pub fn intervals(&self) -> usize {
        self.helmholtz.intervals()
    }

    /// `0.5 h / max |W±|`.
    pub fn dt_max(&self) -> f64 {
        if self.max_speed == 0.0 {
            f64::INFINITY
        } else {
            0.5 * self.h / self.max_speed
        }
    }

    fn rhs_into(
        &self,
        psi: &[Complex64],
        phi: &[Complex64],
        dpsi: &mut [Complex64],
        dphi: &mut [Complex64],
        ws: &mut Workspace,
    ) {
        let n = self.intervals();
        derivative_into(psi, self.h, &mut ws.dpsi_y);
        derivative_into(phi, self.h, &mut ws.dphi_y);
        let [u, u1, u2] = &self.u;
        let [b, b1, b2] = &self.b;
        for k in 0..=n {
            ws.source[k] = psi[k] * u2[k] - phi[k] * b2[k] + ws.dpsi_y[k] * u1[k] - ws.dphi_y[k] * b1[k];
        }
        self.helmholtz.solve_into(&ws.source, &mut ws.inverse);
        let ia = Complex64::new(0.0, self.alpha);
        for k in 1..n {
            dpsi[k] = ia * (psi[k] * -u[k] + phi[k] * b[k] + ws.inverse[k] * 2.0);
            dphi[k] = ia * (phi[k] * -u[k] + psi[k] * b[k]);
        }
        for v in [&mut *dpsi, &mut *dphi] {
            v[0] = ZERO;
            v[n] = ZERO;
        }
    }

    /// `(∂t ψ, ∂t φ)` at the given state.
    pub fn rhs(&self, state: &ModeState) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.intervals();
        let mut dpsi = vec![ZERO; n + 1];
        let mut dphi = vec![ZERO; n + 1];
        let mut ws = Workspace::new(n);
        self.rhs_into(&state.psi, &state.phi, &mut dpsi, &mut dphi, &mut ws);
        (dpsi, dphi)
    }
}

/// Classical RK4 with reusable stage buffers.
#[derive(Clone, Debug)]
pub struct Rk4 {
    system: ModeSystem,
    ws: Workspace,
    k: [[Vec<Complex64>; 2]; 4],
    stage: [Vec<Complex64>; 2],
}

impl Rk4 {
    pub fn new(system: ModeSystem) -> Self {
        let n = system.intervals();
        let z = || vec![ZERO; n + 1];
        Self {
            ws: Workspace::new(n),
            k: [[z(), z()], [z(), z()], [z(), z()], [z(), z()]],
            stage: [z(), z()],
            system,
        }
    }

    pub fn system(&self) -> &ModeSystem {
        &self.system
    }

    /// Advances by `dt` (negative steps integrate backwards).
    pub fn step(&mut self, state: &mut ModeState, dt: f64) -> Result<()> {
        let dt_max = self.system.dt_max();
        if dt.abs() > dt_max * (1.0 + 1e-12) {
            return Err(Error::TimeStep { dt: dt.abs(), dt_max });
        }
        if state.psi.len() != self.system.intervals() + 1 || state.alpha != self.system.alpha {
            return Err(Error::InvalidInput("state does not match the mode system".into()));
        }
        let n = state.psi.len();
        let weights = [0.5 * dt, 0.5 * dt, dt];
        for s in 0..4 {
            let [kp, kf] = &mut self.k[s];
            if s == 0 {
                self.system.rhs_into(&state.psi, &state.phi, kp, kf, &mut self.ws);
            } else {
                let w = weights[s - 1];
                let [sp, sf] = &mut self.stage;
                let [pp, pf] = &self.k[s - 1];
                for j in 0..n {
                    sp[j] = state.psi[j] + pp[j] * w;
                    sf[j] = state.phi[j] + pf[j] * w;
                }
                let [kp, kf] = &mut self.k[s];
                self.system.rhs_into(&self.stage[0], &self.stage[1], kp, kf, &mut self.ws);
            }
        }
        let c = dt / 6.0;
        for j in 0..n {
            state.psi[j] += (self.k[0][0][j] + (self.k[1][0][j] + self.k[2][0][j]) * 2.0 + self.k[3][0][j]) * c;
            state.phi[j] += (self.k[0][1][j] + (self.k[1][1][j] + self.k[2][1][j]) * 2.0 + self.k[3][1][j]) * c;
        }
        let last = n - 1;
        for v in [&mut state.psi, &mut state.phi] {
            v[0] = ZERO;
            v[last] = ZERO;
        }
        state.t += dt;
        Ok(())
    }
}

/// One RK4 step of `state` by `dt`.
pub fn step_rk4(system: &ModeSystem, state: &ModeState, dt: f64) -> Result<ModeState> {
    let mut rk = Rk4::new(system.clone());
    let mut next = state.clone();
    rk.step(&mut next, dt)?;
    Ok(next)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub t_final: f64,
    /// Number of intervals of the uniform grid; must be even.
    pub n: usize,
    pub probe: (f64, f64),
    /// Time between recorded samples.
    pub sample_every: f64,
    /// Time step; defaults to the stability bound.
    pub dt: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            t_final: 200.0,
            n: 2048,
            probe: (0.2, 0.9),
            sample_every: 1.0,
            dt: None,
        }
    }
}

/// Time series of distances to the predicted final state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub alpha: f64,
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    pub err_phi: Vec<f64>,
    pub err_psi: Vec<f64>,
    /// `|φ̂(t, 0) - φ̂(0, 0)|` at each sample.
    pub phi0_drift: Vec<f64>,
    pub norm_psi: Vec<f64>,
    pub norm_phi: Vec<f64>,
    /// Largest drift seen at any step, not only at samples.
    pub max_phi0_drift: f64,
    pub phi0_at_0: Complex64,
    pub psi_at_0_final: Complex64,
    pub psi_inf_at_0: Complex64,
    /// Least-squares slope of `ln err_phi` against `ln t` over the second half.
    pub err_phi_log_slope: f64,
    pub final_state: ModeState,
}

impl EvolutionReport {
    pub fn final_err_phi(&self) -> f64 {
        *self.err_phi.last().unwrap_or(&f64::NAN)
    }

    pub fn final_err_psi(&self) -> f64 {
        *self.err_psi.last().unwrap_or(&f64::NAN)
    }

    /// CSV rows `t, err_phi, err_psi, phi0_drift`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,err_phi,err_psi,phi0_drift\n");
        for k in 0..self.times.len() {
            s.push_str(&format!(
                "{:e},{:e},{:e},{:e}\n",
                self.times[k], self.err_phi[k], self.err_psi[k], self.phi0_drift[k]
            ));
        }
        s
    }
}

fn probe_error(y: &[f64], probe: (f64, f64), a: &[Complex64], b: &[Complex64]) -> f64 {
    y.iter()
        .enumerate()
        .filter(|(_, &v)| v >= probe.0 && v <= probe.1)
        .map(|(k, _)| (a[k] - b[k]).norm())
        .fold(0.0, f64::max)
}

fn log_log_slope(t: &[f64], e: &[f64]) -> f64 {
    let start = t.len() / 2;
    let pts: Vec<(f64, f64)> = t[start..]
        .iter()
        .zip(&e[start..])
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Island prediction on the evolution grid.
pub fn predicted_final_state(
    ext: &ExtendedProfile,
    alpha: f64,
    phi0_at_0: Complex64,
    n: usize,
) -> Result<IslandProfile> {
    let opts = IslandOptions {
        n_output: n + 1,
        ..Default::default()
    };
    limiting_profiles(ext, alpha, phi0_at_0, &opts)
}

/// Evolves polynomial initial data to `t_final` and records the distance to
/// the predicted final state on the probe window.
pub fn evolve_and_compare(
    ext: &ExtendedProfile,
    alpha: f64,
    psi0: &CPoly,
    phi0: &CPoly,
    opts: &EvolveOptions,
) -> Result<EvolutionReport> {
    if opts.n % 2 != 0 {
        return Err(Error::InvalidInput("grid interval count must be even".into()));
    }
    if !(opts.t_final >= 0.0 && opts.sample_every > 0.0) {
        return Err(Error::InvalidInput("final time and sample spacing must be positive".into()));
    }
    let system = ModeSystem::new(ext.base(), alpha, opts.n)?;
    let dt_max = system.dt_max();
    let dt_target = opts.dt.unwrap_or(dt_max);
    if dt_target > dt_max * (1.0 + 1e-12) || dt_target <= 0.0 {
        return Err(Error::TimeStep {
            dt: dt_target,
            dt_max,
        });
    }
    let mut state = ModeState::from_polynomials(alpha, opts.n, psi0, phi0)?;
    let prediction = predicted_final_state(ext, alpha, phi0.eval(0.0), opts.n)?;
    let y = uniform_nodes(opts.n);
    let centre = state.centre_index();
    let phi_c0 = state.phi[centre];
    let initial_sup = state.sup_norm().max(1e-300);

    // whole steps per sample interval, so that samples land on exact multiples
    let per_sample = (opts.sample_every / dt_target).ceil().max(1.0) as usize;
    let dt = opts.sample_every / per_sample as f64;
    let samples = (opts.t_final / opts.sample_every).round() as usize;
    let mut rk = Rk4::new(system);

    let mut report = EvolutionReport {
        alpha,
        n: opts.n,
        dt,
        steps: 0,
        times: Vec::with_capacity(samples + 1),
        err_phi: Vec::with_capacity(samples + 1),
        err_psi: Vec::with_capacity(samples + 1),
        phi0_drift: Vec::with_capacity(samples + 1),
        norm_psi: Vec::with_capacity(samples + 1),
        norm_phi: Vec::with_capacity(samples + 1),
        max_phi0_drift: 0.0,
        phi0_at_0: phi0.eval(0.0),
        psi_at_0_final: ZERO,
        psi_inf_at_0: prediction.psi_inf_at_0(),
        err_phi_log_slope: f64::NAN,
        final_state: state.clone(),
    };
    let record = |state: &ModeState, report: &mut EvolutionReport| {
        let (np, nf) = state.l2_norms();
        report.times.push(state.t);
        report.err_phi.push(probe_error(&y, opts.probe, &state.phi, &prediction.phi_inf));
        report.err_psi.push(probe_error(&y, opts.probe, &state.psi, &prediction.psi_inf));
        report.phi0_drift.push((state.phi[centre] - phi_c0).norm());
        report.norm_psi.push(np);
        report.norm_phi.push(nf);
    };
    record(&state, &mut report);
    for s in 0..samples {
        for _ in 0..per_sample {
            rk.step(&mut state, dt)?;
            report.steps += 1;
            let drift = (state.phi[centre] - phi_c0).norm();
            report.max_phi0_drift = report.max_phi0_drift.max(drift);
        }
        state.t = (s + 1) as f64 * opts.sample_every;
        let growth = state.sup_norm() / initial_sup;
        if !growth.is_finite() || growth > 10.0 {
            return Err(Error::Unstable(growth));
        }
        record(&state, &mut report);
    }
    report.err_phi_log_slope = log_log_slope(&report.times, &report.err_phi);
    report.psi_at_0_final = state.psi[centre];
    report.final_state = state;
    Ok(report)
}
