//! `check`, `solve` and `verify`.

use std::path::PathBuf;
use std::time::Instant;

use pickforge_core::boundary::{self, CjCheck, Weight};
use pickforge_core::hs::{self, HSProblemData, KernelCombination, Route};
use pickforge_core::numerics::{eigh, identity, zeros};
use pickforge_core::pick::{self, is_strictly_positive};
use pickforge_core::realization::random_schur;
use pickforge_core::{
    redheffer, sampling, theta, Complex64, ComplexMatrix, ComplexVector, Error, ErrorKind, InterpolationData,
    Realization, ToleranceConfig, VerificationReport,
};
use serde_json::{json, Map, Value};

use crate::encode;
use crate::schema::{self, Problem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamSource {
    Central,
    Random,
    File(PathBuf),
}

impl ParamSource {
    pub fn parse(s: &str) -> Self {
        match s {
            "central" => ParamSource::Central,
            "random" => ParamSource::Random,
            path => ParamSource::File(PathBuf::from(path)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub truncation: Option<f64>,
    pub seed: Option<u64>,
    pub env_seed: Option<u64>,
    pub param: ParamSource,
    pub csv: bool,
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tol: None,
            grid: None,
            truncation: None,
            seed: None,
            env_seed: None,
            param: ParamSource::Central,
            csv: false,
            timing: false,
        }
    }
}

/// A finished command: the JSON report, the optional CSV and an exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Input => EXIT_INPUT,
            ErrorKind::Infeasible => EXIT_INFEASIBLE,
            ErrorKind::Numerical => EXIT_NUMERICAL,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, CliError>;

fn parse_error(what: &str, e: serde_json::Error) -> CliError {
    CliError::input(format!("{what}: {e}"))
}

/// Defaults, then the file's tolerance block, then command-line flags.
fn resolve(problem: &Problem, opts: &RunOptions) -> CliResult<ToleranceConfig> {
    let mut cfg = ToleranceConfig::default();
    problem.tolerances().apply(&mut cfg);
    if let Some(v) = opts.tol {
        cfg.psd_tol = v;
    }
    if let Some(v) = opts.grid {
        cfg.grid_boundary_points = v;
        cfg.grid_interior_points = v;
    }
    if let Some(v) = opts.truncation {
        cfg.truncation_tol = v;
    }
    cfg.seed = opts.seed.or(problem.seed()).or(opts.env_seed).unwrap_or(0);
    cfg.validate()?;
    Ok(cfg)
}

struct BoundaryCtx {
    t0: Complex64,
    targets: Vec<ComplexVector>,
    weight: Option<Weight>,
}

#[allow(clippy::large_enum_variant)]
enum Built {
    Pick { data: InterpolationData, p: ComplexMatrix },
    Hs { prob: HSProblemData, boundary: Option<BoundaryCtx> },
}

fn build(problem: &Problem, cfg: &ToleranceConfig) -> CliResult<Built> {
    match problem {
        Problem::Pick(p) => {
            let points: Vec<Complex64> = p.points.iter().map(|z| z.0).collect();
            let data =
                InterpolationData::from_points(&points, p.e.to_matrix(points.len()), p.n.to_matrix(points.len()))?;
            let pm = pick::pick_matrix(&data, cfg)?;
            Ok(Built::Pick { data, p: pm })
        }
        Problem::Aip(p) => {
            let k = p.t.row_count();
            let data = InterpolationData::new(p.t.to_matrix(k), p.e.to_matrix(k), p.n.to_matrix(k))?;
            let pm = pick::pick_matrix(&data, cfg)?;
            Ok(Built::Pick { data, p: pm })
        }
        Problem::Hs(h) => {
            let s = h.s.build()?;
            let data = match (&h.points, &h.t, &h.n) {
                (Some(points), None, None) => {
                    let pts: Vec<Complex64> = points.iter().map(|z| z.0).collect();
                    InterpolationData::sampled(&s, &pts, h.e.to_matrix(pts.len()), cfg)?
                }
                (Some(points), None, Some(n)) => {
                    let pts: Vec<Complex64> = points.iter().map(|z| z.0).collect();
                    InterpolationData::from_points(&pts, h.e.to_matrix(pts.len()), n.to_matrix(pts.len()))?
                }
                (None, Some(t), Some(n)) => {
                    let k = t.row_count();
                    InterpolationData::new(t.to_matrix(k), h.e.to_matrix(k), n.to_matrix(k))?
                }
                _ => {
                    return Err(CliError::input(
                        "hs-interpolation needs `points` (optionally with `n`) or both `t` and `n`",
                    ))
                }
            };
            let k = data.state_dim();
            let p = match &h.p {
                Some(p) => p.to_matrix(k),
                None => pick::pick_matrix(&data, cfg)?,
            };
            let prob = HSProblemData::new(s, data, h.y.to_matrix(k), p)?;
            Ok(Built::Hs { prob, boundary: None })
        }
        Problem::Boundary(b) => {
            let s = b.s.build()?;
            let weight =
                b.weight.as_ref().map(|ws| Weight { coeffs: ws.iter().map(|w| w.to_matrix(s.out_dim())).collect() });
            let targets = b.target_vectors();
            let prob = boundary::to_hs_problem(&s, b.t0.0, b.n, &targets, weight.as_ref(), cfg)?;
            Ok(Built::Hs { prob, boundary: Some(BoundaryCtx { t0: b.t0.0, targets, weight }) })
        }
    }
}

fn header(command: &str, problem: &Problem, cfg: &ToleranceConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("kind".into(), json!(problem.kind().name()));
    m.insert("seed".into(), json!(cfg.seed));
    m.insert("tolerances".into(), encode::tolerances(cfg));
    m
}

fn finish(mut m: Map<String, Value>, start: Instant, opts: &RunOptions, code: i32, csv: Option<String>) -> Outcome {
    if opts.timing {
        m.insert("timing".into(), json!({ "seconds": start.elapsed().as_secs_f64() }));
    }
    Outcome { code, report: Value::Object(m), csv }
}

fn eigenvalues(p: &ComplexMatrix) -> CliResult<Value> {
    Ok(json!(eigh(p)?.values))
}

fn cj_json(cj: &CjCheck) -> Value {
    json!({
        "holds": cj.holds,
        "limit": cj.limit.as_ref().map(encode::matrix),
        "trend": cj.trend,
        "error_estimate": cj.error_estimate,
    })
}

/// Boundary kind: the Carathéodory-Julia report, or an infeasible outcome
/// when the condition fails.
fn boundary_precheck(problem: &Problem, cfg: &ToleranceConfig, m: &mut Map<String, Value>) -> CliResult<bool> {
    let Problem::Boundary(b) = problem else { return Ok(true) };
    let s = b.s.build()?;
    let weight = b.weight.as_ref().map(|ws| Weight { coeffs: ws.iter().map(|w| w.to_matrix(s.out_dim())).collect() });
    let cj = boundary::cj_check(&s, b.t0.0, b.n, weight.as_ref(), cfg)?;
    m.insert("caratheodory_julia".into(), cj_json(&cj));
    if cj.holds {
        let jet = boundary::boundary_jet(&s, b.t0.0, 2 * b.n + 1, cfg)?;
        m.insert("jet".into(), Value::Array(jet.derivatives.iter().map(encode::matrix).collect()));
        m.insert("cj_value".into(), json!(jet.cj_value));
    }
    Ok(cj.holds)
}

pub fn run_check(problem_text: &str, opts: &RunOptions) -> CliResult<Outcome> {
    let start = Instant::now();
    let problem = schema::parse_problem(problem_text).map_err(|e| parse_error("problem file", e))?;
    let cfg = resolve(&problem, opts)?;
    let mut m = header("check", &problem, &cfg);
    if !boundary_precheck(&problem, &cfg, &mut m)? {
        m.insert("solvable".into(), json!(false));
        return Ok(finish(m, start, opts, EXIT_INFEASIBLE, None));
    }
    let solvable = match build(&problem, &cfg)? {
        Built::Pick { data, p } => {
            let cert = pick::check_solvable(&p, &cfg)?;
            let (strict, _) = is_strictly_positive(&p)?;
            m.insert("pick_matrix".into(), encode::matrix(&p));
            m.insert("eigenvalues".into(), eigenvalues(&p)?);
            m.insert("certificate".into(), certificate(&cert));
            m.insert("strictly_positive".into(), json!(strict));
            m.insert("stein_residual".into(), json!(data.stein_residual(&p)));
            cert.is_psd
        }
        Built::Hs { prob, .. } => {
            let adm = hs::check_admissible(&prob, &cfg)?;
            let cert = hs::hs_solvable(&prob.p, &prob.y, &cfg)?;
            m.insert("pick_matrix".into(), encode::matrix(&prob.p));
            m.insert("admissibility".into(), encode::checks(&adm));
            m.insert("certificate".into(), certificate(&cert));
            m.insert("eigenvalues".into(), eigenvalues(&(&prob.p - prob.y.adjoint() * &prob.y))?);
            adm.passed() && cert.is_psd
        }
    };
    m.insert("solvable".into(), json!(solvable));
    Ok(finish(m, start, opts, if solvable { EXIT_OK } else { EXIT_INFEASIBLE }, None))
}

fn certificate(cert: &pickforge_core::PsdCertificate) -> Value {
    json!({
        "is_psd": cert.is_psd,
        "min_eigenvalue": cert.min_eigenvalue,
        "hermitian_defect": cert.hermitian_defect,
    })
}

fn load_param_realization(path: &PathBuf) -> CliResult<Realization> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let spec = schema::parse_realization(&text).map_err(|e| parse_error("parameter file", e))?;
    Ok(spec.build()?)
}

fn pick_parameter(
    source: &ParamSource,
    rows: usize,
    cols: usize,
    cfg: &ToleranceConfig,
) -> CliResult<(Realization, &'static str)> {
    match source {
        ParamSource::Central => Ok((Realization::constant(zeros(rows, cols)), "central")),
        ParamSource::Random => {
            if rows == 0 || cols == 0 {
                return Ok((Realization::constant(zeros(rows, cols)), "random"));
            }
            Ok((random_schur(2, rows, cols, cfg.seed), "random"))
        }
        ParamSource::File(path) => {
            let r = load_param_realization(path)?;
            if r.out_dim() != rows || r.in_dim() != cols {
                return Err(CliError::input(format!(
                    "parameter is {}x{}, this problem needs {rows}x{cols}",
                    r.out_dim(),
                    r.in_dim()
                )));
            }
            Ok((r, "file"))
        }
    }
}

fn kernel_parameter(
    source: &ParamSource,
    sol: &hs::HSSolution,
    cfg: &ToleranceConfig,
) -> CliResult<(KernelCombination, &'static str)> {
    let base = sol.param.clone();
    match source {
        ParamSource::Central => Ok((KernelCombination::zero(base), "central")),
        ParamSource::Random => {
            let m = base.out_dim();
            if m == 0 || sol.norm_budget == 0.0 {
                return Ok((KernelCombination::zero(base), "random"));
            }
            let mut g = sampling::rng(cfg.seed);
            let w = sampling::random_disk_point(&mut g, 0.5);
            let c = sampling::random_matrix(&mut g, m, 1);
            let h =
                KernelCombination::new(base.clone(), vec![w], vec![ComplexVector::from_column_slice(c.as_slice())])?;
            let norm = h.norm_sq(cfg)?.sqrt();
            if norm == 0.0 {
                return Ok((KernelCombination::zero(base), "random"));
            }
            let scale = Complex64::new(0.5 * sol.norm_budget / norm, 0.0);
            let c = ComplexVector::from_column_slice((c * scale).as_slice());
            Ok((KernelCombination::new(base, vec![w], vec![c])?, "random"))
        }
        ParamSource::File(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let spec = schema::parse_kernel(&text).map_err(|e| parse_error("parameter file", e))?;
            let points = spec.points.iter().map(|z| z.0).collect();
            let coeffs =
                spec.coeffs.iter().map(|c| ComplexVector::from_iterator(c.len(), c.iter().map(|e| e.0))).collect();
            Ok((KernelCombination::new(base, points, coeffs)?, "file"))
        }
    }
}

fn kernel_json(h: &KernelCombination) -> Value {
    json!({
        "points": h.points.iter().map(|&w| encode::complex(w)).collect::<Vec<_>>(),
        "coeffs": h.coeffs.iter().map(|c| c.iter().map(|&v| encode::complex(v)).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn run_solve(problem_text: &str, opts: &RunOptions) -> CliResult<Outcome> {
    let start = Instant::now();
    let problem = schema::parse_problem(problem_text).map_err(|e| parse_error("problem file", e))?;
    let cfg = resolve(&problem, opts)?;
    let mut m = header("solve", &problem, &cfg);
    if !boundary_precheck(&problem, &cfg, &mut m)? {
        m.insert("solvable".into(), json!(false));
        return Ok(finish(m, start, opts, EXIT_INFEASIBLE, None));
    }
    match build(&problem, &cfg)? {
        Built::Pick { data, p } => {
            let cert = pick::check_solvable(&p, &cfg)?;
            m.insert("certificate".into(), certificate(&cert));
            m.insert("solvable".into(), json!(cert.is_psd));
            if !cert.is_psd {
                return Ok(finish(m, start, opts, EXIT_INFEASIBLE, None));
            }
            let (strict, _) = is_strictly_positive(&p)?;
            let (solution, param, source, route) = if strict {
                let th = theta::build_theta_explicit(&data, &p, theta::choose_mu(&data.t)?, &cfg)?;
                let (param, source) = pick_parameter(&opts.param, data.out_dim(), data.in_dim(), &cfg)?;
                (theta::lft(&th, &param, &cfg)?, param, source, "theta-explicit")
            } else {
                let coll = redheffer::build_colligation(&data, &p, &cfg)?;
                let sig = redheffer::sigma(&coll);
                let (param, source) = pick_parameter(&opts.param, sig.d_delta_star, sig.d_delta, &cfg)?;
                (redheffer::redheffer_apply(&sig, &param, &cfg)?, param, source, "redheffer")
            };
            let report = pick::verify_interpolant(&data, &solution, &cfg)?;
            m.insert("route".into(), json!(route));
            m.insert("parameter".into(), json!({ "source": source, "realization": encode::realization(&param) }));
            m.insert("solution".into(), encode::realization(&solution));
            Ok(verified(m, report, start, opts))
        }
        Built::Hs { prob, boundary } => {
            let cert = hs::hs_solvable(&prob.p, &prob.y, &cfg)?;
            m.insert("certificate".into(), certificate(&cert));
            m.insert("solvable".into(), json!(cert.is_psd));
            if !cert.is_psd {
                return Ok(finish(m, start, opts, EXIT_INFEASIBLE, None));
            }
            let sol = hs::solve_min_norm(&prob, &cfg)?;
            let (h, source) = kernel_parameter(&opts.param, &sol, &cfg)?;
            let f = hs::parametrize_solutions(&prob, &sol, &h, &cfg)?;
            let report = hs_report(&prob, boundary.as_ref(), &f, &cfg, Some((&sol, &h)))?;
            let route = match sol.route {
                Route::Theta(_) => "theta-explicit",
                Route::Redheffer { .. } => "redheffer",
            };
            m.insert("route".into(), json!(route));
            m.insert("central_norm_sq".into(), json!(sol.central_norm_sq));
            m.insert("norm_budget".into(), json!(sol.norm_budget));
            m.insert("central".into(), encode::realization(&sol.central));
            m.insert(
                "parameter".into(),
                json!({
                    "source": source,
                    "space": encode::realization(&sol.param),
                    "kernel_combination": kernel_json(&h),
                    "norm": h.norm_sq(&cfg)?.sqrt(),
                }),
            );
            m.insert("solution".into(), encode::realization(&f));
            Ok(verified(m, report, start, opts))
        }
    }
}

fn verified(mut m: Map<String, Value>, report: VerificationReport, start: Instant, opts: &RunOptions) -> Outcome {
    let passed = report.passed();
    m.insert("verification".into(), encode::checks(&report));
    m.insert("passed".into(), json!(passed));
    finish(m, start, opts, if passed { EXIT_OK } else { EXIT_NUMERICAL }, None)
}

fn hs_report(
    prob: &HSProblemData,
    boundary: Option<&BoundaryCtx>,
    f: &Realization,
    cfg: &ToleranceConfig,
    structured: Option<(&hs::HSSolution, &KernelCombination)>,
) -> CliResult<VerificationReport> {
    let mut report = VerificationReport::new();
    match boundary {
        Some(b) => {
            let res = boundary::boundary_residual(f, b.t0, &b.targets, b.weight.as_ref(), cfg)?;
            report.at_most("boundary_residual", res, cfg.residual_tol);
        }
        None => {
            if let Some(res) = hs::interpolation_residual(prob, f)? {
                report.at_most("interpolation_residual", res, cfg.residual_tol);
            }
        }
    }
    report.at_least("kernel_form_min_eigenvalue", hs::kernel_form_min(prob, f, cfg)?, -cfg.psd_tol);
    if let Some((sol, h)) = structured {
        report.extend(hs::norm_report(prob, sol, h, f, cfg)?);
    }
    Ok(report)
}

pub fn run_verify(problem_text: &str, candidate_text: &str, opts: &RunOptions) -> CliResult<Outcome> {
    let start = Instant::now();
    let problem = schema::parse_problem(problem_text).map_err(|e| parse_error("problem file", e))?;
    let cfg = resolve(&problem, opts)?;
    let candidate = schema::parse_realization(candidate_text).map_err(|e| parse_error("candidate file", e))?.build()?;
    let mut m = header("verify", &problem, &cfg);
    if !boundary_precheck(&problem, &cfg, &mut m)? {
        m.insert("passed".into(), json!(false));
        return Ok(finish(m, start, opts, EXIT_INFEASIBLE, None));
    }
    let (report, csv) = match build(&problem, &cfg)? {
        Built::Pick { data, p } => {
            let csv = opts.csv.then(|| pick_grid(&data, &p, &candidate, &cfg)).transpose()?;
            (pick::verify_interpolant(&data, &candidate, &cfg)?, csv)
        }
        Built::Hs { prob, boundary } => {
            let csv = opts.csv.then(|| hs_grid(&prob, &candidate, &cfg)).transpose()?;
            (hs_report(&prob, boundary.as_ref(), &candidate, &cfg, None)?, csv)
        }
    };
    let passed = report.passed();
    m.insert("verification".into(), encode::checks(&report));
    m.insert("passed".into(), json!(passed));
    Ok(finish(m, start, opts, if passed { EXIT_OK } else { EXIT_INFEASIBLE }, csv.map(|rows| encode::csv(&rows))))
}

fn min_eig(m: &ComplexMatrix) -> CliResult<f64> {
    Ok(eigh(m)?.values.first().copied().unwrap_or(0.0))
}

/// `min eig [[P, F^S(z)*], [F^S(z), K_S(z, z)]]` on the interior grid.
fn pick_grid(
    data: &InterpolationData,
    p: &ComplexMatrix,
    s: &Realization,
    cfg: &ToleranceConfig,
) -> CliResult<Vec<(Complex64, f64)>> {
    let (k, q) = (data.state_dim(), data.out_dim());
    sampling::interior_grid(cfg.grid_interior_points)
        .into_iter()
        .map(|z| {
            let fs = data.fs_at(s, z, cfg)?;
            let sv = s.eval(z, cfg)?;
            let ks = (identity(q) - &sv * sv.adjoint()) / Complex64::new(1.0 - z.norm_sqr(), 0.0);
            let mut g = zeros(k + q, k + q);
            g.view_mut((0, 0), (k, k)).copy_from(p);
            g.view_mut((0, k), (k, q)).copy_from(&fs.adjoint());
            g.view_mut((k, 0), (q, k)).copy_from(&fs);
            g.view_mut((k, k), (q, q)).copy_from(&ks);
            Ok((z, min_eig(&g)?))
        })
        .collect()
}

/// `min eig [[1, y, f(z)*], [y*, P, F^S(z)*], [f(z), F^S(z), K_S(z, z)]]`.
fn hs_grid(prob: &HSProblemData, f: &Realization, cfg: &ToleranceConfig) -> CliResult<Vec<(Complex64, f64)>> {
    let (k, q) = (prob.data.state_dim(), prob.s.out_dim());
    if f.out_dim() != q || f.in_dim() != 1 {
        return Err(CliError::input(format!("candidate is {}x{}, expected {q}x1", f.out_dim(), f.in_dim())));
    }
    let n = 1 + k + q;
    sampling::interior_grid(cfg.grid_interior_points)
        .into_iter()
        .map(|z| {
            let fv = f.eval(z, cfg)?;
            let fs = prob.data.fs_at(&prob.s, z, cfg)?;
            let sv = prob.s.eval(z, cfg)?;
            let ks = (identity(q) - &sv * sv.adjoint()) / Complex64::new(1.0 - z.norm_sqr(), 0.0);
            let mut g = zeros(n, n);
            g[(0, 0)] = Complex64::new(1.0, 0.0);
            g.view_mut((0, 1), (1, k)).copy_from(&prob.y);
            g.view_mut((0, 1 + k), (1, q)).copy_from(&fv.adjoint());
            g.view_mut((1, 0), (k, 1)).copy_from(&prob.y.adjoint());
            g.view_mut((1, 1), (k, k)).copy_from(&prob.p);
            g.view_mut((1, 1 + k), (k, q)).copy_from(&fs.adjoint());
            g.view_mut((1 + k, 0), (q, 1)).copy_from(&fv);
            g.view_mut((1 + k, 1), (q, k)).copy_from(&fs);
            g.view_mut((1 + k, 1 + k), (q, q)).copy_from(&ks);
            Ok((z, min_eig(&g)?))
        })
        .collect()
}
