//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.
//!
//! Run with `cargo test -p alfven-cli --test acceptance -- --nocapture`.

use alfven_core::island::{compute_gamma, final_state_from_h, dual_route_mismatch, profiles_from, IslandOptions};
use alfven_core::poly::CPoly;
use alfven_core::profiles::{BackgroundProfile, ExtendedProfile, Side, SpectralPoint};
use alfven_core::spectral::{
    boundary_coefficients, coefficients, compute_d, compute_d_with, residual_inhomogeneous,
    resolvent_fd, solve_inhomogeneous, stern_min_singular_value, HomogeneousPair, SourceData,
    SpectralOptions,
};
use alfven_core::Complex64;
use serde_json::Value;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

/// Smallest `|D|²` over the real scan of the `u = 0, b = y`, `α = 1` fixture,
/// measured once and frozen.
const SCAN_FLOOR: f64 = 73.928;
/// `|D(iε)| ε` for `ε = 1e-2, 1e-3, 1e-4` on the same fixture, measured once
/// and frozen.
const IMAGINARY_AXIS_FLOORS: [(f64, f64); 3] = [(1e-2, 3.1152), (1e-3, 3.1390), (1e-4, 3.1413)];

type Check = Result<String, String>;

fn ext(u: &[f64], b: &[f64]) -> ExtendedProfile {
    ExtendedProfile::new(&BackgroundProfile::new(u, b, 0.1).unwrap()).unwrap()
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn homogeneous_oracle() -> Check {
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    let opts = SpectralOptions {
        n_nodes: 2049,
        ..Default::default()
    };
    for (u, b) in [(&[0.0][..], &[0.0, 1.0][..]), (&[0.0, 0.5][..], &[0.0, 1.0][..])] {
        let e = ext(u, b);
        for alpha in [1.0, 2.0, 3.0] {
            let start = Instant::now();
            let sp = SpectralPoint::real(&e, 0.0).unwrap();
            let pair = HomogeneousPair::solve(&e, alpha, &sp, &opts).map_err(|x| x.to_string())?;
            slowest = slowest.max(start.elapsed().as_secs_f64());
            let sol = &pair.plus;
            for (y, phi) in sol.grid.nodes().iter().zip(&sol.phi) {
                let exact = if *y == 0.0 { 1.0 } else { (alpha * y).sinh() / (alpha * y) };
                worst = worst.max((phi - exact).norm() / exact);
            }
        }
    }
    ensure(
        worst <= 1e-8 && slowest <= 5.0,
        format!("max rel err {worst:.2e} (<= 1e-8), slowest case {slowest:.2}s (<= 5s)"),
    )
}

fn island_closed_form() -> Check {
    let opts = IslandOptions::default();
    let (mut worst, mut centre): (f64, f64) = (0.0, 0.0);
    for (k, k0) in [(0.0, 1.0), (0.5, 1.0)] {
        let e = ext(&[0.0, k], &[0.0, k0]);
        for alpha in [1.0, 2.0] {
            let plus = compute_gamma(&e, alpha, Side::Plus, &opts).map_err(|x| x.to_string())?;
            let minus = compute_gamma(&e, alpha, Side::Minus, &opts).map_err(|x| x.to_string())?;
            let prof = profiles_from(&e, alpha, Complex64::new(1.0, 0.0), &plus, &minus, &opts)
                .map_err(|x| x.to_string())?;
            for (y, bg) in prof.y.iter().zip(&prof.b_gamma) {
                if y.abs() < 1e-3 {
                    continue;
                }
                let exact = (alpha * (1.0 - y.abs())).sinh() / alpha.sinh();
                worst = worst.max((-bg - exact).abs());
            }
            for (g, y) in [(&plus, 1e-4), (&minus, -1e-4)] {
                let v = g.b_gamma_at(&e, y).map_err(|x| x.to_string())?;
                centre = centre.max((v + 1.0).abs());
            }
        }
    }
    ensure(
        worst <= 1e-6 && centre <= 1e-3,
        format!("max abs err {worst:.2e} (<= 1e-6), |bΓ(±1e-4) + 1| {centre:.2e} (<= 1e-3)"),
    )
}

fn dual_route() -> Check {
    let opts = IslandOptions::default();
    let fixtures: [(&[f64], &[f64], &[f64], &[f64]); 2] = [
        (&[0.0, 0.5], &[0.0, 1.0], &[], &[1.0, 0.0, -1.0]),
        (&[0.0], &[0.0, 1.0, 0.2], &[0.0, 0.2, 0.0, -0.2], &[1.0, 0.5, -1.0, -0.5]),
    ];
    let mut worst: f64 = 0.0;
    for (u, b, psi0, phi0) in fixtures {
        let e = ext(u, b);
        let src = SourceData::new(e.base(), 1.0, CPoly::from_real(psi0), CPoly::from_real(phi0))
            .map_err(|x| x.to_string())?;
        let plus = compute_gamma(&e, 1.0, Side::Plus, &opts).map_err(|x| x.to_string())?;
        let minus = compute_gamma(&e, 1.0, Side::Minus, &opts).map_err(|x| x.to_string())?;
        let prof = profiles_from(&e, 1.0, src.phi0_at_0(), &plus, &minus, &opts).map_err(|x| x.to_string())?;
        let route = final_state_from_h(&e, &src, &plus, &minus, &opts).map_err(|x| x.to_string())?;
        worst = worst.max(dual_route_mismatch(&prof, &route).map_err(|x| x.to_string())?);
    }
    ensure(worst <= 1e-6, format!("max node-wise gap {worst:.2e} (<= 1e-6)"))
}

fn inhomogeneous() -> Check {
    let e = ext(&[0.0, 0.5], &[0.0, 1.0]);
    let src = SourceData::new(
        e.base(),
        1.0,
        CPoly::from_real(&[0.0, 0.2, 0.0, -0.2]),
        CPoly::from_real(&[1.0, 0.0, -1.0]),
    )
    .map_err(|x| x.to_string())?;
    let c = Complex64::new(0.3, 0.2);
    let opts = SpectralOptions {
        n_nodes: 2049,
        ..Default::default()
    };
    let sol = solve_inhomogeneous(&e, &src, 1.0, c, &opts).map_err(|x| x.to_string())?;
    let residual = residual_inhomogeneous(&sol, &e, &src);
    let boundary = sol.theta[0].norm().max(sol.theta.last().unwrap().norm());
    let c1 = sol.jump_at_zero.max(sol.derivative_jump_at_zero);
    let fd = resolvent_fd(&e, &src, c, 513).map_err(|x| x.to_string())?;
    let gap = fd
        .y
        .iter()
        .zip(&fd.b_theta)
        .map(|(&y, bt)| (sol.theta_at(y) * e.b(y, 0) - bt).norm())
        .fold(0.0, f64::max);
    ensure(
        residual <= 1e-6 && boundary <= 1e-10 && c1 <= 1e-8 && gap <= 1e-4,
        format!(
            "residual {residual:.2e} (<= 1e-6), |Θ(±1)| {boundary:.2e} (<= 1e-10), C1 mismatch {c1:.2e} (<= 1e-8), FD gap {gap:.2e} (<= 1e-4)"
        ),
    )
}

fn plemelj() -> Check {
    let e = ext(&[0.0], &[0.0, 1.0]);
    let src = SourceData::new(
        e.base(),
        1.0,
        CPoly::from_real(&[0.3, 0.2, -0.3, -0.2]),
        CPoly::from_real(&[1.0, 0.3, -1.0, -0.3]),
    )
    .map_err(|x| x.to_string())?;
    let o = SpectralOptions {
        n_nodes: 2049,
        ..Default::default()
    };
    let err = |x: alfven_core::Error| x.to_string();
    let sp = SpectralPoint::real(&e, 0.5).map_err(err)?;
    let pair = HomogeneousPair::solve(&e, 1.0, &sp, &o).map_err(err)?;
    let w = compute_d_with(&e, &pair, &o).map_err(err)?;
    let lim = boundary_coefficients(&e, &src, &pair, &w, &o).map_err(err)?;
    let i_lim = w.sigma_plus * w.i_re_plus.unwrap() + Complex64::new(0.0, PI * w.chi_plus.unwrap());
    let mut history = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let sp = SpectralPoint::new(&e, Complex64::new(0.5, eps)).map_err(err)?;
        let pair = HomogeneousPair::solve(&e, 1.0, &sp, &o).map_err(err)?;
        let w_eps = compute_d_with(&e, &pair, &o).map_err(err)?;
        let k = coefficients(&e, &src, &pair, &w_eps, &o).map_err(err)?;
        history.push([
            (w_eps.sigma_plus * w_eps.i_plus - i_lim).norm(),
            (k.mu_plus - lim.mu_plus[0]).norm(),
            (k.nu_plus - lim.nu_plus[0]).norm(),
        ]);
    }
    let decreasing = (0..3).all(|q| history[0][q] > history[1][q] && history[1][q] > history[2][q]);
    let last = history[2];
    ensure(
        decreasing && last.iter().all(|&x| x <= 1e-3),
        format!(
            "final errors σI {:.2e}, μ {:.2e}, ν {:.2e} (<= 1e-3), monotone: {decreasing}",
            last[0], last[1], last[2]
        ),
    )
}

fn wronskian_floors() -> Check {
    let e = ext(&[0.0], &[0.0, 1.0]);
    let opts = SpectralOptions::default();
    let speeds = e.base().endpoint_speeds();
    let cs: Vec<f64> = (0..200)
        .map(|k| -1.0 + 2.0 * k as f64 / 199.0)
        .filter(|c| c.abs() > 0.02 && speeds.iter().all(|s| (c - s).abs() > 0.02))
        .collect();
    let mut floor = f64::INFINITY;
    for &c in &cs {
        let w = compute_d(&e, 1.0, Complex64::new(c, 0.0), &opts).map_err(|x| x.to_string())?;
        let (re, im) = (w.d_re.unwrap(), w.d_im.unwrap());
        floor = floor.min(re * re + im * im);
    }
    let mut ok = floor >= 0.5 * SCAN_FLOOR;
    let mut parts = vec![format!("scan min {floor:.3} over {} points (>= {:.3})", cs.len(), 0.5 * SCAN_FLOOR)];
    for (eps, pilot) in IMAGINARY_AXIS_FLOORS {
        let w = compute_d(&e, 1.0, Complex64::new(0.0, eps), &opts).map_err(|x| x.to_string())?;
        let v = w.d.unwrap().norm() * eps;
        ok &= v >= 0.5 * pilot;
        parts.push(format!("|D|ε({eps:e}) {v:.4}"));
    }
    ensure(ok, parts.join(", "))
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn field(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or(f64::NAN)
}

fn evolution_convergence(dir: &Path) -> Check {
    let cfg = write_config(
        dir,
        "theorem.json",
        r#"{
  "profile": {"u": [0, 0.5], "b": [0, 1], "c0": 0.1},
  "alpha": 1,
  "n": 2048,
  "t_final": 200,
  "probe": [0.2, 0.9],
  "psi0": [],
  "phi0": [1, 0, -1]
}"#,
    );
    let start = Instant::now();
    let out = alfven_cli::run_args(["compare", "--config", &cfg, "--jobs", "1"]);
    let secs = start.elapsed().as_secs_f64();
    let s = &out.summary;
    let p0 = s["phi0_at_0"][0].as_f64().unwrap_or(f64::NAN);
    let psi0 = Complex64::new(
        s["psi_at_0_final"][0].as_f64().unwrap_or(f64::NAN),
        s["psi_at_0_final"][1].as_f64().unwrap_or(f64::NAN),
    );
    let (ep, es, drift) = (field(s, "final_err_phi"), field(s, "final_err_psi"), field(s, "max_phi0_drift"));
    let centre = (psi0 - 0.5 * p0).norm();
    ensure(
        out.code == 0 && ep <= 0.05 * p0.abs() && es <= 0.05 && centre <= 0.05 && drift <= 1e-6 && secs <= 600.0,
        format!(
            "err_phi {ep:.3e}, err_psi {es:.3e} (<= 0.05), |ψ(T,0) - 0.5 φ0(0)| {centre:.3e}, drift {drift:.1e}, {secs:.0}s, exit {}",
            out.code
        ),
    )
}

fn blowup() -> Check {
    let opts = IslandOptions::default();
    let diag = |u: &[f64], b: &[f64]| -> Result<(f64, f64), String> {
        let e = ext(u, b);
        let plus = compute_gamma(&e, 1.0, Side::Plus, &opts).map_err(|x| x.to_string())?;
        let minus = compute_gamma(&e, 1.0, Side::Minus, &opts).map_err(|x| x.to_string())?;
        let d = alfven_core::island::blowup_diagnostic(&e, &plus, &minus).map_err(|x| x.to_string())?;
        Ok((d.kappa, d.log_slope()))
    };
    let (k1, s1) = diag(&[0.0], &[0.0, 1.0])?;
    let (k2, s2) = diag(&[0.0, 0.5], &[0.0, 1.0])?;
    let (k3, s3) = diag(&[0.0], &[0.0, 1.0, 0.2])?;
    let linear_ok = k1 == 0.0 && k2 == 0.0 && s1.abs() <= 0.02 && s2.abs() <= 0.02;
    let curved_ok = (k3 - 2.0).abs() <= 1e-12 && s3 >= 0.05;
    ensure(
        linear_ok && curved_ok,
        format!("linear κ {k1}, {k2}, slopes {s1:.4}, {s2:.4} (|.| <= 0.02); curved κ {k3}, slope {s3:.4} (>= 0.05)"),
    )
}

fn stern() -> Check {
    let e = ext(&[0.0], &[0.0, 1.0]);
    let s = stern_min_singular_value(&e, 1.0, Complex64::new(2.0, 0.0), 401).map_err(|x| x.to_string())?;
    ensure(s >= 1e-3, format!("smallest singular value {s:.4e} (>= 1e-3)"))
}

fn determinism(dir: &Path) -> Check {
    let cfg = write_config(
        dir,
        "short.json",
        r#"{"profile": {"u": [0, 0.5], "b": [0, 1]}, "n": 512, "t_final": 20, "sample_every": 2, "phi0": [1, 0, -1]}"#,
    );
    let mut runs = Vec::new();
    for k in 0..2 {
        let out_dir = dir.join(format!("run{k}"));
        let out = alfven_cli::run_args(["compare", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out_dir)
            .unwrap()
            .map(|f| {
                let f = f.unwrap();
                (f.file_name().to_string_lossy().into_owned(), std::fs::read(f.path()).unwrap())
            })
            .collect();
        files.sort();
        runs.push((out.code, alfven_cli::pretty(&out.summary), files));
    }
    let same = runs[0] == runs[1];
    ensure(
        same && !runs[0].2.is_empty(),
        format!("{} files compared, identical: {same}", runs[0].2.len()),
    )
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        ("homogeneous oracle", Box::new(homogeneous_oracle)),
        ("island closed form", Box::new(island_closed_form)),
        ("dual-route final state", Box::new(dual_route)),
        ("inhomogeneous residual and resolvent", Box::new(inhomogeneous)),
        ("boundary-value limits", Box::new(plemelj)),
        ("Wronskian floors", Box::new(wronskian_floors)),
        ("time-domain convergence", Box::new(|| evolution_convergence(dir.path()))),
        ("blowup diagnostic", Box::new(blowup)),
        ("Stern spot check", Box::new(stern)),
        ("determinism", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("PASS {:>2} {name}: {d} [{secs:.1}s]", k + 1),
            Err(d) => {
                println!("FAIL {:>2} {name}: {d} [{secs:.1}s]", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
