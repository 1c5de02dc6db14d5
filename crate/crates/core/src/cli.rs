//! Command-line workflows. Every command writes its files into the output
//! directory and returns an [`Outcome`]; the binary maps it to an exit code
//! (0 pass, 1 failed check, 2 bad input).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::continuation::{continue_branch, SolveOptions};
use crate::error::{Result, VStateError};
use crate::evolution::{conserved_diagnostics, evolve, rigid_rotation_check, velocity_contour, ContourState};
use crate::geometry::{FourierBoundary, UnitGrid};
use crate::io;
use crate::kernels::oracle::{moment_I, moment_report};
use crate::kernels::{ellipse_fourth_coefficient, ellipse_moment_ratio};
use crate::linearization::{bifurcation_scan, disc_jacobian, multiplier_at_disc, transversality_check};
use crate::specfun::{omega_asymptotic, omega_dispersion, omega_dispersion_gamma, omega_dispersion_pochhammer, theta_alpha};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "vstates", version, about = "Rotating patches of the generalized SQG equation")]
pub struct Cli {
    /// Directory receiving all output files.
    #[arg(long, global = true, env = io::OUTPUT_DIR_ENV, default_value = "vstates-out")]
    pub output_dir: PathBuf,
    /// Tabular format; `svg` writes figures only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of Ω_m^α against its large-m asymptotics.
    Dispersion {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 10)]
        m_max: usize,
    },
    /// Closed-form singular moments against adaptive quadrature.
    VerifyIntegrals {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 16)]
        n_max: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Disc multipliers and their quadrature-assembled counterparts.
    Linearize {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Defaults to Ω_m^α.
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long, default_value_t = 16)]
        n_max: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Bisection for the bifurcation point of mode m.
    Scan {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        m: usize,
        /// Grid size; defaults to 16(N+1) with N = max(2m, 16).
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Newton continuation of the m-fold branch.
    SolveBranch(BranchArgs),
    /// Non-rotation test for the ellipse w + Q w̄.
    EllipseTest {
        #[arg(long)]
        alpha: f64,
        #[arg(long = "Q", alias = "q")]
        q: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Contour-dynamics evolution of a V-state, dumped as JSON lines.
    Evolve(EvolveArgs),
    /// Quarter-period rigid rotation round trip of a V-state.
    RigidCheck(EvolveArgs),
}

#[derive(Debug, Args)]
pub struct BranchArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0.04)]
    pub s_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub ds: f64,
    #[arg(long, default_value_t = 16)]
    pub modes: usize,
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 0.03)]
    pub s: f64,
    #[arg(long, default_value_t = 256)]
    pub nodes: usize,
    /// Duration in rotation periods 2π/Ω.
    #[arg(long, default_value_t = 0.25)]
    pub periods: f64,
    /// Fraction of the CFL-admissible step.
    #[arg(long, default_value_t = 0.9)]
    pub cfl: f64,
    /// Snapshots written by `evolve`.
    #[arg(long, default_value_t = 5)]
    pub frames: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        io::write_text(&path, text)?;
        self.files.push(path);
        Ok(())
    }

    fn table(&mut self, fmt: Format, stem: &str, csv: impl FnOnce() -> String, json: impl FnOnce() -> String) -> Result<()> {
        match fmt {
            Format::Csv => self.put(&format!("{stem}.csv"), &csv()),
            Format::Json => self.put(&format!("{stem}.json"), &json()),
            Format::Svg => Ok(()),
        }
    }
}

fn bad(msg: String) -> VStateError {
    VStateError::InvalidInput(msg)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(VStateError::Domain(format!("alpha must lie in [0,1], got {alpha}")))
    }
}

fn check_m(m: usize) -> Result<()> {
    if m >= 2 {
        Ok(())
    } else {
        Err(bad(format!("m must be >= 2, got {m}")))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(bad(format!("tol must be positive, got {tol}")))
    }
}

/// True for errors caused by the configuration rather than the numerics.
pub fn is_input_error(e: &VStateError) -> bool {
    matches!(e, VStateError::Domain(_) | VStateError::InvalidInput(_) | VStateError::GammaPole(_))
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let mut w = Writer { dir: &cli.output_dir, files: Vec::new() };
    let fmt = cli.format;
    let (passed, summary) = match &cli.command {
        Command::Dispersion { alpha, m_max } => cmd_dispersion(&mut w, fmt, *alpha, *m_max)?,
        Command::VerifyIntegrals { alpha, n_max, tol } => cmd_verify_integrals(&mut w, fmt, *alpha, *n_max, *tol)?,
        Command::Linearize { alpha, m, omega, n_max, tol } => cmd_linearize(&mut w, fmt, *alpha, *m, *omega, *n_max, *tol)?,
        Command::Scan { alpha, m, grid, tol } => cmd_scan(&mut w, fmt, *alpha, *m, *grid, *tol)?,
        Command::SolveBranch(a) => cmd_solve_branch(&mut w, fmt, a)?,
        Command::EllipseTest { alpha, q, samples, grid } => cmd_ellipse_test(&mut w, fmt, *alpha, *q, *samples, *grid)?,
        Command::Evolve(a) => cmd_evolve(&mut w, a)?,
        Command::RigidCheck(a) => cmd_rigid_check(&mut w, fmt, a)?,
    };
    Ok(Outcome { passed, summary, files: w.files })
}

#[derive(Serialize)]
struct DispersionRow {
    m: usize,
    omega: f64,
    theta_gap: Option<f64>,
    asymptotic: Option<f64>,
    error: Option<f64>,
}

fn cmd_dispersion(w: &mut Writer, fmt: Format, alpha: f64, m_max: usize) -> Result<(bool, String)> {
    check_alpha(alpha)?;
    check_m(m_max)?;
    let interior = alpha > 0.0 && alpha < 1.0;
    let theta = if interior { Some(theta_alpha(alpha)?) } else if alpha == 0.0 { Some(0.5) } else { None };
    let mut rows = Vec::new();
    let mut forms = 0.0f64;
    for m in 2..=m_max {
        let omega = omega_dispersion(alpha, m);
        let asymptotic = if interior { Some(omega_asymptotic(alpha, m)?) } else { None };
        if interior {
            let g = omega_dispersion_gamma(alpha, m);
            forms = forms.max(((g - omega_dispersion_pochhammer(alpha, m)) / g).abs());
        }
        rows.push(DispersionRow { m, omega, theta_gap: theta.map(|t| t - omega), asymptotic, error: asymptotic.map(|a| omega - a) });
    }
    let increasing = rows.windows(2).all(|p| p[1].omega > p[0].omega);
    let passed = increasing && forms < 1e-12;
    let nan = f64::NAN;
    w.table(
        fmt,
        "dispersion",
        || {
            let r: Vec<Vec<f64>> = rows
                .iter()
                .map(|x| vec![x.m as f64, x.omega, x.theta_gap.unwrap_or(nan), x.asymptotic.unwrap_or(nan), x.error.unwrap_or(nan)])
                .collect();
            io::csv_string(&["m", "omega", "theta_gap", "asymptotic", "error"], &r)
        },
        || io::json_string(&serde_json::json!({ "alpha": alpha, "rows": rows })),
    )?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|x| (x.m as f64, x.omega)).collect();
    w.put("dispersion.svg", &io::svg_chart(&pts, "m", "Omega_m"))?;
    Ok((passed, format!("alpha={alpha} m_max={m_max} increasing={increasing} form_gap={forms:.3e}")))
}

fn cmd_verify_integrals(w: &mut Writer, fmt: Format, alpha: f64, n_max: usize, tol: f64) -> Result<(bool, String)> {
    check_alpha(alpha)?;
    check_tol(tol)?;
    if alpha == 0.0 {
        return Err(VStateError::Domain("moment identities need alpha in (0,1]".into()));
    }
    let rows = moment_report(alpha, n_max);
    let worst = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    w.table(
        fmt,
        "integrals",
        || {
            let mut out = String::from("family,n,closed_form,quadrature,quadrature_imag,error\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.family,
                    r.n,
                    io::fmt_csv(r.closed_form),
                    io::fmt_csv(r.quadrature),
                    io::fmt_csv(r.quadrature_imag),
                    io::fmt_csv(r.error)
                ));
            }
            out
        },
        || io::json_string(&serde_json::json!({ "alpha": alpha, "max_relative_error": worst, "rows": rows })),
    )?;
    Ok((worst < tol, format!("alpha={alpha} n_max={n_max} max_relative_error={worst:.3e}")))
}

fn cmd_linearize(
    w: &mut Writer,
    fmt: Format,
    alpha: f64,
    m: usize,
    omega: Option<f64>,
    n_max: usize,
    tol: f64,
) -> Result<(bool, String)> {
    check_alpha(alpha)?;
    check_m(m)?;
    check_tol(tol)?;
    if m > n_max + 1 {
        return Err(bad(format!("m = {m} exceeds n_max + 1 = {}", n_max + 1)));
    }
    let omega = omega.unwrap_or_else(|| omega_dispersion(alpha, m));
    let spec = multiplier_at_disc(alpha, omega, n_max)?;
    let jac = disc_jacobian(alpha, &UnitGrid::for_truncation(n_max))?.at(omega);
    let assembled = (0..=n_max).map(|n| (jac[(n, n)] - spec.mult[n]).abs()).fold(0.0, f64::max);
    let scale = spec.mult.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let kernel = spec.kernel_modes(1e-12);
    w.table(fmt, "spectrum", || io::spectrum_csv(&spec), || io::json_string(&spec))?;
    let on_branch = (omega - omega_dispersion(alpha, m)).abs() < 1e-15;
    let kernel_ok = !on_branch || kernel == vec![m - 1];
    Ok((
        assembled / scale < tol && kernel_ok,
        format!("alpha={alpha} omega={omega} kernel={kernel:?} assembly_gap={assembled:.3e}"),
    ))
}

fn cmd_scan(w: &mut Writer, fmt: Format, alpha: f64, m: usize, grid: Option<usize>, tol: f64) -> Result<(bool, String)> {
    check_alpha(alpha)?;
    check_m(m)?;
    check_tol(tol)?;
    let grid = match grid {
        Some(g) => UnitGrid::new(g)?,
        None => UnitGrid::for_truncation((2 * m).max(16)),
    };
    let lo = if m > 2 { 0.5 * (omega_dispersion(alpha, m - 1) + omega_dispersion(alpha, m)) } else { 0.0 };
    let hi = 0.5 * (omega_dispersion(alpha, m) + omega_dispersion(alpha, m + 1));
    let res = bifurcation_scan(alpha, m, (lo, hi), &grid)?;
    let transversal = transversality_check(alpha, m, &grid, 1e-8)?;
    let report = serde_json::json!({
        "alpha": res.alpha,
        "m": res.m,
        "omega_located": res.omega_located,
        "omega_closed_form": res.omega_closed_form,
        "gap": res.gap,
        "kernel_dimension": res.kernel_dimension,
        "kernel_mass": res.kernel_mass,
        "transversal": transversal,
    });
    w.table(
        fmt,
        "scan",
        || {
            io::csv_string(
                &["alpha", "m", "omega_located", "omega_closed_form", "gap", "kernel_dimension", "kernel_mass"],
                &[vec![alpha, m as f64, res.omega_located, res.omega_closed_form, res.gap, res.kernel_dimension as f64, res.kernel_mass]],
            )
        },
        || io::json_string(&report),
    )?;
    let passed = res.gap < tol && res.kernel_dimension == 1 && res.kernel_mass > 0.999999 && transversal;
    Ok((
        passed,
        format!("alpha={alpha} m={m} omega={:.15} gap={:.3e} kernel_dim={} transversal={transversal}", res.omega_located, res.gap, res.kernel_dimension),
    ))
}

fn cmd_solve_branch(w: &mut Writer, fmt: Format, a: &BranchArgs) -> Result<(bool, String)> {
    check_alpha(a.alpha)?;
    check_m(a.m)?;
    check_tol(a.tol)?;
    if a.modes < 2 {
        return Err(bad(format!("modes must be >= 2, got {}", a.modes)));
    }
    if a.alpha == 1.0 {
        log::warn!("alpha = 1 branch solving is experimental");
    }
    let opts = SolveOptions { modes: a.modes, tol: a.tol, ..SolveOptions::default() };
    let table = continue_branch(a.alpha, a.m, a.s_max, a.ds, &opts)?;
    w.table(fmt, "branch", || io::branch_csv(&table, 4.min(a.modes)), || io::json_string(&table))?;
    let bnds: Vec<FourierBoundary> = table.solutions.iter().map(|x| x.fourier_boundary()).collect();
    w.put("branch_boundaries.svg", &io::svg_boundaries(&bnds))?;
    let pts: Vec<(f64, f64)> = table.solutions.iter().map(|x| (x.s, x.omega)).collect();
    w.put("branch_diagram.svg", &io::svg_chart(&pts, "s", "Omega"))?;
    let reached = table.failure.is_none();
    let worst = table.solutions.iter().map(|x| x.residual_norm).fold(0.0, f64::max);
    let target = omega_dispersion(a.alpha, a.m);
    let extrap = table.extrapolated_omega();
    let extrap_ok = extrap.is_none_or(|e| (e - target).abs() < 1e-6);
    let mut summary = format!("alpha={} m={} s_reached={} max_residual={worst:.3e}", a.alpha, a.m, table.last_good_s());
    if let Some(e) = extrap {
        summary.push_str(&format!(" extrapolation_gap={:.3e}", (e - target).abs()));
    }
    if let Some(f) = &table.failure {
        summary.push_str(&format!(" stopped: {f}"));
    }
    Ok((reached && worst < a.tol && extrap_ok, summary))
}

fn cmd_ellipse_test(w: &mut Writer, fmt: Format, alpha: f64, q: f64, samples: usize, grid: usize) -> Result<(bool, String)> {
    check_alpha(alpha)?;
    if !(alpha > 0.0) {
        return Err(VStateError::Domain("ellipse test needs alpha in (0,1]".into()));
    }
    if samples < 2 {
        return Err(bad("need at least 2 samples".into()));
    }
    let grid = UnitGrid::new(grid)?;
    let mut rows = Vec::with_capacity(samples);
    for k in 0..samples {
        let om = -1.0 + 2.0 * k as f64 / (samples - 1) as f64;
        rows.push(vec![om, ellipse_fourth_coefficient(om, q, alpha, &grid)?]);
    }
    // g_4 is affine in Ω: the minimum of |g_4| on [−1,1] is at an end point unless it changes sign
    let (g0, g1) = (rows[0][1], rows[samples - 1][1]);
    let min_g4 = if g0 * g1 <= 0.0 { 0.0 } else { g0.abs().min(g1.abs()) };
    let (ratio_gap, ratio) = if alpha < 1.0 {
        let r = moment_I(alpha, 2).re / moment_I(alpha, 0).re;
        ((r - ellipse_moment_ratio(alpha)).abs(), r)
    } else {
        (0.0, f64::NAN)
    };
    w.table(
        fmt,
        "ellipse",
        || io::csv_string(&["omega", "g4"], &rows),
        || io::json_string(&serde_json::json!({ "alpha": alpha, "Q": q, "min_abs_g4": min_g4, "moment_ratio": ratio, "rows": rows })),
    )?;
    w.put("ellipse.svg", &io::svg_boundaries(&[FourierBoundary::ellipse(q, 1)]))?;
    Ok((min_g4 > 0.0 && ratio_gap < 1e-10, format!("alpha={alpha} Q={q} min_abs_g4={min_g4:.6e} ratio_gap={ratio_gap:.3e}")))
}

fn vstate_for(a: &EvolveArgs) -> Result<(FourierBoundary, f64)> {
    if !(a.alpha > 0.0 && a.alpha <= 1.0) {
        return Err(VStateError::Domain(format!("contour dynamics needs alpha in (0,1], got {}", a.alpha)));
    }
    check_m(a.m)?;
    check_tol(a.tol)?;
    if !(a.periods >= 0.0) || !(a.cfl > 0.0 && a.cfl <= 1.0) {
        return Err(bad("need periods >= 0 and cfl in (0,1]".into()));
    }
    let sol = crate::continuation::solve_vstate(a.alpha, a.m, a.s, None, &SolveOptions::default())?;
    Ok((sol.fourier_boundary(), sol.omega))
}

fn cmd_evolve(w: &mut Writer, a: &EvolveArgs) -> Result<(bool, String)> {
    let (bnd, omega) = vstate_for(a)?;
    let frames = a.frames.max(1);
    let total = a.periods * 2.0 * std::f64::consts::PI / omega;
    let mut state = ContourState::from_boundary(&bnd, a.nodes, a.alpha)?;
    let umax = velocity_contour(&state)?.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let dt = a.cfl * state.spacing() / (4.0 * umax);
    let (a0, c0) = conserved_diagnostics(&state);
    let mut traj = vec![state.clone()];
    for _ in 0..frames {
        let next = evolve(&state, total / frames as f64, dt)?;
        state = ContourState { time: traj.last().map_or(0.0, |s| s.time) + total / frames as f64, ..next };
        traj.push(state.clone());
    }
    let (a1, c1) = conserved_diagnostics(&state);
    let area = ((a1 - a0) / a0).abs();
    let centroid = (c1 - c0).norm();
    w.put("trajectory.jsonl", &io::jsonl_string(&traj))?;
    let curves: Vec<Vec<Complex64>> = traj.iter().map(|s| io_curve(&s.nodes)).collect();
    w.put("trajectory.svg", &io::svg_curves(&curves))?;
    Ok((area < 1e-5 && centroid < 1e-5, format!("alpha={} T={total:.6} area_drift={area:.3e} centroid_drift={centroid:.3e}", a.alpha)))
}

fn io_curve(nodes: &[Complex64]) -> Vec<Complex64> {
    crate::evolution::dense_curve(nodes, io::SVG_SAMPLES.max(nodes.len()))
        .into_iter()
        .step_by((nodes.len() / io::SVG_SAMPLES).max(1))
        .collect()
}

fn cmd_rigid_check(w: &mut Writer, fmt: Format, a: &EvolveArgs) -> Result<(bool, String)> {
    let (bnd, omega) = vstate_for(a)?;
    let t = a.periods * 2.0 * std::f64::consts::PI / omega;
    let rep = rigid_rotation_check(&bnd, a.alpha, omega, a.nodes, t, a.cfl)?;
    w.table(
        fmt,
        "rigid",
        || {
            io::csv_string(
                &["alpha", "omega", "nodes", "time", "steps", "hausdorff", "area_drift", "centroid_drift", "normal_residual"],
                &[vec![rep.alpha, rep.omega, rep.nodes as f64, rep.time, rep.steps as f64, rep.hausdorff, rep.area_drift, rep.centroid_drift, rep.normal_residual]],
            )
        },
        || io::json_string(&rep),
    )?;
    let rot = Complex64::from_polar(1.0, omega * t);
    let start = io::boundary_samples(&bnd);
    let turned: Vec<Complex64> = start.iter().map(|z| z * rot).collect();
    w.put("rigid.svg", &io::svg_curves(&[start, turned]))?;
    let passed = rep.hausdorff < a.tol && rep.area_drift < 1e-5 && rep.centroid_drift < 1e-5;
    Ok((
        passed,
        format!("alpha={} m={} s={} nodes={} hausdorff={:.3e} area_drift={:.3e} centroid_drift={:.3e}", a.alpha, a.m, a.s, a.nodes, rep.hausdorff, rep.area_drift, rep.centroid_drift),
    ))
}

/// Parses `args`, runs the command, prints one status line and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let name = command_name(&cli.command);
    match run(&cli) {
        Ok(out) if out.passed => {
            println!("PASS {name}: {}", out.summary);
            0
        }
        Ok(out) => {
            println!("FAIL {name}: {}", out.summary);
            1
        }
        Err(e) if is_input_error(&e) => {
            eprintln!("ERROR {name}: {e}");
            2
        }
        Err(e) => {
            println!("FAIL {name}: {e}");
            1
        }
    }
}

pub fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Dispersion { .. } => "dispersion",
        Command::VerifyIntegrals { .. } => "verify-integrals",
        Command::Linearize { .. } => "linearize",
        Command::Scan { .. } => "scan",
        Command::SolveBranch(_) => "solve-branch",
        Command::EllipseTest { .. } => "ellipse-test",
        Command::Evolve(_) => "evolve",
        Command::RigidCheck(_) => "rigid-check",
    }
}
