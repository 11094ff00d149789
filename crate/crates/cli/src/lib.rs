//! Command-line front end. Each subcommand loads a JSON run configuration,
//! applies flag overrides, runs one computation and reports a JSON summary
//! on stdout. With `--out DIR` the data are also written to disk, as CSV
//! files plus `summary.json` or as a single JSON document.
//!
//! Exit codes: 0 pass, 1 domain failure, 2 usage or I/O error.

use alfven_core::evolution::{evolve_and_compare, EvolutionReport, EvolveOptions};
use alfven_core::island::{
    compute_gamma, dual_route_mismatch, final_state_from_h, profiles_from, IslandOptions,
};
use alfven_core::par::{par_map, with_jobs};
use alfven_core::poly::CPoly;
use alfven_core::profiles::{
    check_assumptions, BackgroundProfile, Branch, ExtendedProfile, Side, SpectralPoint,
};
use alfven_core::spectral::{
    compute_d, residual_inhomogeneous, solve_inhomogeneous, HomogeneousPair, SourceData,
    SpectralOptions,
};
use alfven_core::sturmian::residual_homogeneous;
use alfven_core::{Complex64, Error as CoreError};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Radius of the exclusion collars around `0` and the endpoint speeds used
/// when reporting the Wronskian floor of a real scan.
pub const SCAN_COLLAR: f64 = 0.02;

#[derive(Parser, Debug)]
#[command(name = "alfven", version, about = "Magnetic-island final states of Alfven waves in a flowing channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    /// Validate the background profile and report its case and extension.
    Check,
    /// Homogeneous solutions on both halves at one spectral parameter.
    Homog,
    /// Wronskian over a scan of real parts at a fixed imaginary offset.
    Wronskian,
    /// Solution of the inhomogeneous problem at one spectral parameter.
    Theta,
    /// Limiting profiles at zero spectral parameter.
    Island,
    /// Time evolution of one mode with distances to the island prediction.
    Evolve,
    /// As `evolve`, then checks the final errors against `--tol`.
    Compare,
}

#[derive(clap::Args, Debug, Clone, Default)]
pub struct Flags {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Streamwise wavenumber (nonzero integer).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<i64>,
    /// Grid size of the command.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Pass/fail tolerance of the command.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Final time of the evolution.
    #[arg(long = "t-final", global = true)]
    pub t_final: Option<f64>,
    /// Real-part scan as `lo:hi:steps`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub scan: Option<String>,
    /// Imaginary part of the spectral parameter.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// Worker threads for scans.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format for files written to `--out`.
    #[arg(long, global = true, value_enum)]
    pub emit: Option<Emit>,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Json,
    #[default]
    Csv,
}

/// Background fields with ascending polynomial coefficients.
#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(default = "default_c0")]
    pub c0: f64,
}

fn default_c0() -> f64 {
    0.1
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            u: vec![0.0, 0.5],
            b: vec![0.0, 1.0],
            c0: default_c0(),
        }
    }
}

/// A real coefficient or a `[re, im]` pair.
#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(untagged)]
pub enum Coefficient {
    Real(f64),
    Complex([f64; 2]),
}

impl Coefficient {
    fn value(self) -> Complex64 {
        match self {
            Self::Real(r) => Complex64::new(r, 0.0),
            Self::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

/// Run configuration. Every field except `profile` is optional and has a
/// per-command default; flags override the file.
#[derive(Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub profile: ProfileConfig,
    pub alpha: Option<i64>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub t_final: Option<f64>,
    pub sample_every: Option<f64>,
    pub probe: Option<[f64; 2]>,
    pub scan: Option<ScanConfig>,
    /// Spectral parameter `[re, im]`.
    pub c: Option<[f64; 2]>,
    pub eps: Option<f64>,
    pub psi0: Option<Vec<Coefficient>>,
    pub phi0: Option<Vec<Coefficient>>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub emit: Option<Emit>,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    /// JSON summary printed on stdout.
    pub summary: Value,
    /// Human-readable text printed on stderr.
    pub message: String,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(String),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidInput(_) => Failure::Usage(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<Report, Failure>;

/// Output of a command before it is written out.
struct Report {
    pass: bool,
    summary: Value,
    /// `(file stem, CSV body)` pairs.
    tables: Vec<(String, String)>,
    /// Data for `--emit json`.
    data: Value,
    message: String,
}

/// Resolved settings for one invocation.
struct Run {
    cfg: RunConfig,
    flags: Flags,
}

impl Run {
    fn alpha(&self) -> Result<f64, Failure> {
        let a = self.flags.alpha.or(self.cfg.alpha).unwrap_or(1);
        if a == 0 {
            return Err(Failure::Usage("alpha must be a nonzero integer".into()));
        }
        Ok(a as f64)
    }

    fn n(&self, default: usize) -> usize {
        self.flags.n.or(self.cfg.n).unwrap_or(default)
    }

    fn tol(&self, default: f64) -> f64 {
        self.flags.tol.or(self.cfg.tol).unwrap_or(default)
    }

    fn c(&self, default: [f64; 2]) -> Complex64 {
        let [re, im] = self.cfg.c.unwrap_or(default);
        let im = self.flags.eps.or(self.cfg.eps).unwrap_or(im);
        Complex64::new(re, im)
    }

    fn poly(coeffs: &Option<Vec<Coefficient>>, default: &[f64]) -> CPoly {
        match coeffs {
            Some(c) => CPoly::new(c.iter().map(|v| v.value()).collect()),
            None => CPoly::from_real(default),
        }
    }

    fn psi0(&self) -> CPoly {
        Self::poly(&self.cfg.psi0, &[])
    }

    fn phi0(&self) -> CPoly {
        Self::poly(&self.cfg.phi0, &[1.0, 0.0, -1.0])
    }

    fn profile(&self) -> Result<BackgroundProfile, Failure> {
        let p = &self.cfg.profile;
        Ok(BackgroundProfile::new(&p.u, &p.b, p.c0)?)
    }

    fn extended(&self) -> Result<ExtendedProfile, Failure> {
        let profile = self.profile()?;
        let report = check_assumptions(&profile);
        if !report.all_pass() {
            return Err(Failure::Domain(report.failures().join("; ")));
        }
        Ok(ExtendedProfile::new(&profile)?)
    }

    fn evolve_options(&self) -> Result<EvolveOptions, Failure> {
        let d = EvolveOptions::default();
        let probe = self.cfg.probe.map(|[a, b]| (a, b)).unwrap_or(d.probe);
        if !(probe.0 < probe.1) {
            return Err(Failure::Usage("probe window must satisfy lo < hi".into()));
        }
        Ok(EvolveOptions {
            t_final: self.flags.t_final.or(self.cfg.t_final).unwrap_or(d.t_final),
            n: self.n(d.n),
            probe,
            sample_every: self.cfg.sample_every.unwrap_or(d.sample_every),
            dt: None,
        })
    }
}

/// Parses `lo:hi:steps`.
pub fn parse_scan(s: &str) -> Result<ScanConfig, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("scan `{s}` is not of the form lo:hi:steps"));
    }
    let lo = parts[0].trim().parse::<f64>().map_err(|e| format!("scan lo: {e}"))?;
    let hi = parts[1].trim().parse::<f64>().map_err(|e| format!("scan hi: {e}"))?;
    let steps = parts[2].trim().parse::<usize>().map_err(|e| format!("scan steps: {e}"))?;
    if steps == 0 || !(lo <= hi) {
        return Err(format!("scan `{s}` needs lo <= hi and steps >= 1"));
    }
    Ok(ScanConfig { lo, hi, steps })
}

pub fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Outcome {
    match execute(&cli) {
        Ok(o) => o,
        Err(Failure::Usage(m)) => Outcome {
            code: 2,
            summary: json!({ "error": m }),
            message: m,
        },
        Err(Failure::Domain(m)) => Outcome {
            code: 1,
            summary: json!({ "error": m }),
            message: m,
        },
    }
}

/// Parses `args` (without the program name) and runs them.
pub fn run_args<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("alfven")).chain(args.into_iter().map(Into::into));
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            Outcome {
                code,
                summary: Value::Null,
                message: e.to_string(),
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let cfg = match &cli.flags.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let run = Run {
        cfg,
        flags: cli.flags.clone(),
    };
    let jobs = run.flags.jobs.or(run.cfg.jobs);
    let command = cli.command;
    let report = with_jobs(jobs, || dispatch(command, &run))?;
    let out = run.flags.out.clone().or(run.cfg.out.clone());
    let emit = run.flags.emit.or(run.cfg.emit).unwrap_or_default();
    if let Some(dir) = out {
        write_outputs(&dir, command, emit, &report)?;
    }
    Ok(Outcome {
        code: if report.pass { 0 } else { 1 },
        summary: report.summary,
        message: report.message,
    })
}

fn dispatch(command: CommandKind, run: &Run) -> CmdResult {
    match command {
        CommandKind::Check => cmd_check(run),
        CommandKind::Homog => cmd_homog(run),
        CommandKind::Wronskian => cmd_wronskian(run),
        CommandKind::Theta => cmd_theta(run),
        CommandKind::Island => cmd_island(run),
        CommandKind::Evolve => cmd_evolve(run, false),
        CommandKind::Compare => cmd_evolve(run, true),
    }
}

fn command_name(c: CommandKind) -> &'static str {
    match c {
        CommandKind::Check => "check",
        CommandKind::Homog => "homog",
        CommandKind::Wronskian => "wronskian",
        CommandKind::Theta => "theta",
        CommandKind::Island => "island",
        CommandKind::Evolve => "evolve",
        CommandKind::Compare => "compare",
    }
}

fn write_outputs(dir: &Path, command: CommandKind, emit: Emit, report: &Report) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let write = |name: &str, body: &str| -> Result<(), Failure> {
        let path = dir.join(name);
        std::fs::write(&path, body)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
    };
    match emit {
        Emit::Csv => {
            for (stem, body) in &report.tables {
                write(&format!("{stem}.csv"), body)?;
            }
            write("summary.json", &pretty(&report.summary))?;
        }
        Emit::Json => {
            let doc = json!({ "summary": report.summary, "data": report.data });
            write(&format!("{}.json", command_name(command)), &pretty(&doc))?;
        }
    }
    Ok(())
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Non-finite floats become `null` in JSON, so they are reported as strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn cnum(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

fn cmd_check(run: &Run) -> CmdResult {
    let profile = run.profile()?;
    let report = check_assumptions(&profile);
    let mut summary = json!({
        "command": "check",
        "pass": report.all_pass(),
        "assumptions": to_value(&report),
        "failures": report.failures(),
    });
    if report.all_pass() {
        let ext = ExtendedProfile::new(&profile)?;
        let (lo, hi) = ext.spectral_interval();
        let kinds: serde_json::Map<String, Value> = [
            ("w_plus_left", Branch::Plus, Side::Minus),
            ("w_plus_right", Branch::Plus, Side::Plus),
            ("w_minus_left", Branch::Minus, Side::Minus),
            ("w_minus_right", Branch::Minus, Side::Plus),
        ]
        .into_iter()
        .map(|(k, b, s)| (k.to_string(), to_value(&ext.extension_kind(b, s))))
        .collect();
        summary["case_id"] = json!(ext.case_id);
        summary["a_minus"] = num(ext.a_minus);
        summary["a_plus"] = num(ext.a_plus);
        summary["spectral_interval"] = json!([num(lo), num(hi)]);
        summary["extension"] = Value::Object(kinds);
        summary["endpoint_speeds"] = json!(profile.endpoint_speeds().map(num));
    }
    let message = if report.all_pass() {
        "all assumptions hold".to_string()
    } else {
        report.failures().join("\n")
    };
    Ok(Report {
        pass: report.all_pass(),
        data: summary.clone(),
        summary,
        tables: Vec::new(),
        message,
    })
}

fn spectral_options(run: &Run, default_n: usize) -> SpectralOptions {
    SpectralOptions {
        n_nodes: run.n(default_n),
        ..Default::default()
    }
}

fn cmd_homog(run: &Run) -> CmdResult {
    let ext = run.extended()?;
    let alpha = run.alpha()?;
    let c = run.c([0.0, 0.0]);
    let sp = SpectralPoint::new(&ext, c)?;
    let opts = spectral_options(run, 1025);
    let pair = HomogeneousPair::solve(&ext, alpha, &sp, &opts)?;
    let side = |s: &alfven_core::sturmian::HomogeneousSolution| {
        json!({
            "y_c": num(s.y_c()),
            "iterations": s.iterations,
            "final_update": num(s.final_update_norm),
            "residual": num(residual_homogeneous(s, &ext)),
            "phi_at_zero": cnum(s.phi_at_zero()),
            "dphi_at_zero": cnum(s.dphi_at_zero()),
        })
    };
    let summary = json!({
        "command": "homog",
        "alpha": alpha,
        "c": cnum(c),
        "n_nodes": opts.n_nodes,
        "plus": side(&pair.plus),
        "minus": side(&pair.minus),
    });
    let series = |s: &alfven_core::sturmian::HomogeneousSolution| {
        json!({
            "y": s.grid.nodes(),
            "phi": s.phi.iter().map(|z| cnum(*z)).collect::<Vec<_>>(),
            "dphi": s.dphi.iter().map(|z| cnum(*z)).collect::<Vec<_>>(),
        })
    };
    Ok(Report {
        pass: true,
        data: json!({ "plus": series(&pair.plus), "minus": series(&pair.minus) }),
        tables: vec![
            ("homog_plus".into(), pair.plus.to_csv()),
            ("homog_minus".into(), pair.minus.to_csv()),
        ],
        message: format!(
            "phi+(0) = {}, phi-(0) = {}",
            pair.plus.phi_at_zero(),
            pair.minus.phi_at_zero()
        ),
        summary,
    })
}

/// One row of a Wronskian scan.
#[derive(Serialize, Debug, Clone)]
pub struct ScanRow {
    pub c: Complex64,
    pub d: Option<Complex64>,
    pub inv_d: Complex64,
    pub excluded: bool,
    pub in_collar: bool,
}

fn in_collar(ext: &ExtendedProfile, c: Complex64) -> bool {
    if c.im != 0.0 {
        return false;
    }
    let speeds = ext.base().endpoint_speeds();
    c.re.abs() < SCAN_COLLAR || speeds.iter().any(|s| (c.re - s).abs() < SCAN_COLLAR)
}

fn cmd_wronskian(run: &Run) -> CmdResult {
    let ext = run.extended()?;
    let alpha = run.alpha()?;
    let scan = match &run.flags.scan {
        Some(s) => parse_scan(s).map_err(Failure::Usage)?,
        None => run.cfg.scan.unwrap_or_else(|| {
            let (lo, hi) = ext.spectral_interval();
            ScanConfig { lo, hi, steps: 201 }
        }),
    };
    let eps = run.flags.eps.or(run.cfg.eps).unwrap_or(0.0);
    let opts = spectral_options(run, 1025);
    let cs: Vec<Complex64> = (0..scan.steps)
        .map(|k| {
            let t = if scan.steps == 1 { 0.0 } else { k as f64 / (scan.steps - 1) as f64 };
            Complex64::new(scan.lo + (scan.hi - scan.lo) * t, eps)
        })
        .collect();
    let rows: Vec<Result<ScanRow, CoreError>> = par_map(&cs, |&c| {
        let w = compute_d(&ext, alpha, c, &opts)?;
        Ok(ScanRow {
            c,
            d: w.d,
            inv_d: w.inv_d,
            excluded: w.excluded,
            in_collar: in_collar(&ext, c),
        })
    });
    let rows: Vec<ScanRow> = rows.into_iter().collect::<Result<_, _>>()?;
    let mut csv = String::from("re_c,im_c,re_d,im_d,abs_d,abs_inv_d,excluded,in_collar\n");
    for r in &rows {
        let d = r.d.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        writeln!(
            csv,
            "{:e},{:e},{:e},{:e},{:e},{:e},{},{}",
            r.c.re,
            r.c.im,
            d.re,
            d.im,
            d.norm(),
            r.inv_d.norm(),
            r.excluded as u8,
            r.in_collar as u8
        )
        .ok();
    }
    let floor = rows
        .iter()
        .filter(|r| !r.in_collar)
        .filter_map(|r| r.d.map(|d| (r.c.re, d.norm_sqr())))
        .fold(None, |m: Option<(f64, f64)>, v| match m {
            Some(best) if best.1 <= v.1 => Some(best),
            _ => Some(v),
        });
    let summary = json!({
        "command": "wronskian",
        "alpha": alpha,
        "scan": to_value(&scan),
        "eps": eps,
        "points": rows.len(),
        "excluded_points": rows.iter().filter(|r| r.excluded).count(),
        "collar": SCAN_COLLAR,
        "min_abs_d_squared_outside_collars": floor.map(|f| num(f.1)),
        "argmin_re_c": floor.map(|f| num(f.0)),
    });
    let message = match floor {
        Some((c, f)) => format!("min |D|^2 = {f:e} at c = {c}"),
        None => "no points outside the collars".into(),
    };
    Ok(Report {
        pass: true,
        data: json!({ "rows": to_value(&rows) }),
        tables: vec![("wronskian".into(), csv)],
        message,
        summary,
    })
}

fn cmd_theta(run: &Run) -> CmdResult {
    let ext = run.extended()?;
    let alpha = run.alpha()?;
    let c = run.c([0.3, 0.2]);
    let tol = run.tol(1e-6);
    let opts = spectral_options(run, 2049);
    let src = SourceData::new(ext.base(), alpha, run.psi0(), run.phi0())?;
    let sol = solve_inhomogeneous(&ext, &src, alpha, c, &opts)?;
    let residual = residual_inhomogeneous(&sol, &ext, &src);
    let boundary = sol.theta[0].norm().max(sol.theta.last().map_or(0.0, |v| v.norm()));
    let pass = residual <= tol;
    let summary = json!({
        "command": "theta",
        "alpha": alpha,
        "c": cnum(c),
        "tol": tol,
        "pass": pass,
        "residual": num(residual),
        "boundary_value": num(boundary),
        "jump_at_zero": num(sol.jump_at_zero),
        "derivative_jump_at_zero": num(sol.derivative_jump_at_zero),
        "representation_mismatch": num(sol.representation_mismatch),
        "matching_residual": num(sol.matching_residual),
        "wronskian": sol.wronskian.d.map(cnum),
        "coefficients": to_value(&sol.coefficients),
    });
    Ok(Report {
        pass,
        data: to_value(&sol),
        tables: vec![("theta".into(), sol.to_csv())],
        message: format!("theta residual {residual:e} (tol {tol:e})"),
        summary,
    })
}

fn cmd_island(run: &Run) -> CmdResult {
    let ext = run.extended()?;
    let alpha = run.alpha()?;
    let opts = IslandOptions {
        n_output: run.n(IslandOptions::default().n_output),
        ..Default::default()
    };
    let src = SourceData::new(ext.base(), alpha, run.psi0(), run.phi0())?;
    let plus = compute_gamma(&ext, alpha, Side::Plus, &opts)?;
    let minus = compute_gamma(&ext, alpha, Side::Minus, &opts)?;
    let profile = profiles_from(&ext, alpha, src.phi0_at_0(), &plus, &minus, &opts)?;
    let route = final_state_from_h(&ext, &src, &plus, &minus, &opts)?;
    let mismatch = dual_route_mismatch(&profile, &route)?;
    let summary = json!({
        "command": "island",
        "alpha": alpha,
        "n_output": opts.n_output,
        "phi0_at_0": cnum(profile.phi0_at_0),
        "psi_inf_at_0": cnum(profile.psi_inf_at_0()),
        "kappa": num(profile.diagnostic.kappa),
        "log_slope_plus": num(profile.diagnostic.log_slope_plus),
        "log_slope_minus": num(profile.diagnostic.log_slope_minus),
        "dual_route_mismatch": num(mismatch),
    });
    Ok(Report {
        pass: true,
        data: to_value(&profile),
        tables: vec![("island".into(), profile.to_csv())],
        message: format!("dual-route mismatch {mismatch:e}"),
        summary,
    })
}

/// Thresholds checked by `compare`, relative to the initial data.
fn compare_checks(rep: &EvolutionReport, psi0: &CPoly, tol: f64) -> Vec<(String, f64, f64)> {
    let p0 = rep.phi0_at_0.norm();
    let psi_scale = (-100..=100)
        .map(|k| psi0.eval(k as f64 / 100.0).norm())
        .fold(0.0, f64::max);
    let scale = p0.max(psi_scale);
    vec![
        ("err_phi".into(), rep.final_err_phi(), tol * p0),
        ("err_psi".into(), rep.final_err_psi(), tol * scale),
        ("psi_at_0".into(), (rep.psi_at_0_final - rep.psi_inf_at_0).norm(), tol * p0),
        ("phi0_drift".into(), rep.max_phi0_drift, 1e-6 * scale.max(1.0)),
    ]
}

fn cmd_evolve(run: &Run, compare: bool) -> CmdResult {
    let ext = run.extended()?;
    let alpha = run.alpha()?;
    let opts = run.evolve_options()?;
    let (psi0, phi0) = (run.psi0(), run.phi0());
    let rep = evolve_and_compare(&ext, alpha, &psi0, &phi0, &opts)?;
    let name = if compare { "compare" } else { "evolve" };
    let mut summary = json!({
        "command": name,
        "alpha": alpha,
        "n": rep.n,
        "t_final": opts.t_final,
        "probe": [opts.probe.0, opts.probe.1],
        "dt": num(rep.dt),
        "steps": rep.steps,
        "final_err_phi": num(rep.final_err_phi()),
        "final_err_psi": num(rep.final_err_psi()),
        "max_phi0_drift": num(rep.max_phi0_drift),
        "phi0_at_0": cnum(rep.phi0_at_0),
        "psi_at_0_final": cnum(rep.psi_at_0_final),
        "psi_inf_at_0": cnum(rep.psi_inf_at_0),
        "err_phi_log_slope": num(rep.err_phi_log_slope),
    });
    let mut pass = true;
    let mut message = format!(
        "t = {}: err_phi {:e}, err_psi {:e}",
        opts.t_final,
        rep.final_err_phi(),
        rep.final_err_psi()
    );
    if compare {
        let tol = run.tol(0.05);
        let checks = compare_checks(&rep, &psi0, tol);
        let mut table = format!("{:<12} {:>14} {:>14}  result\n", "quantity", "value", "limit");
        let mut rows = Vec::new();
        for (q, v, lim) in &checks {
            let ok = v <= lim;
            pass &= ok;
            writeln!(table, "{q:<12} {v:>14.6e} {lim:>14.6e}  {}", if ok { "PASS" } else { "FAIL" }).ok();
            rows.push(json!({ "quantity": q, "value": num(*v), "limit": num(*lim), "pass": ok }));
        }
        summary["tol"] = json!(tol);
        summary["checks"] = json!(rows);
        summary["pass"] = json!(pass);
        message = table;
    }
    let mut data = to_value(&rep);
    if let Value::Object(m) = &mut data {
        m.remove("final_state");
    }
    Ok(Report {
        pass,
        data: json!({ "report": data, "final_state": to_value(&rep.final_state) }),
        tables: vec![
            ("timeseries".into(), rep.to_csv()),
            ("snapshot_final".into(), rep.final_state.to_csv()),
        ],
        message,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_parsing() {
        assert_eq!(parse_scan("-1:1:5").unwrap(), ScanConfig { lo: -1.0, hi: 1.0, steps: 5 });
        assert!(parse_scan("1:0:5").is_err());
        assert!(parse_scan("0:1").is_err());
        assert!(parse_scan("0:1:0").is_err());
        assert!(parse_scan("a:1:3").is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let ok: Result<RunConfig, _> = serde_json::from_str(r#"{"profile":{"u":[0,0.5],"b":[0,1],"c0":0.4},"alpha":2}"#);
        assert!(ok.is_ok());
        let bad: Result<RunConfig, _> = serde_json::from_str(r#"{"profile":{"u":[0],"b":[0,1]},"alhpa":2}"#);
        assert!(bad.is_err());
        let nested: Result<RunConfig, _> = serde_json::from_str(r#"{"profile":{"u":[0],"b":[0,1],"c":1}}"#);
        assert!(nested.is_err());
    }

    #[test]
    fn complex_and_real_coefficients() {
        let cfg: RunConfig = serde_json::from_str(r#"{"phi0":[1, [0, 0.5], -1]}"#).unwrap();
        let run = Run {
            cfg,
            flags: Flags::default(),
        };
        let p = run.phi0();
        assert_eq!(p.coeff(1), Complex64::new(0.0, 0.5));
        assert_eq!(p.coeff(2), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn flags_override_config() {
        let cfg: RunConfig = serde_json::from_str(r#"{"alpha":3,"c":[0.4,0.1],"n":33}"#).unwrap();
        let flags = Flags {
            alpha: Some(2),
            eps: Some(0.05),
            ..Default::default()
        };
        let run = Run { cfg, flags };
        assert_eq!(run.alpha().unwrap(), 2.0);
        assert_eq!(run.c([0.0, 0.0]), Complex64::new(0.4, 0.05));
        assert_eq!(run.n(7), 33);
    }

    #[test]
    fn zero_alpha_is_usage_error() {
        let out = run_args(["check", "--alpha", "0"]);
        assert_eq!(out.code, 0, "check does not read alpha");
        let out = run_args(["homog", "--alpha", "0"]);
        assert_eq!(out.code, 2);
    }
}
