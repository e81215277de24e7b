//! Norm-constrained interpolation inside a de Branges-Rovnyak space `H(S)`.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    self, eigh, identity, op_norm, psd_certificate, real, zeros, ComplexMatrix, ComplexVector, PsdCertificate,
    ToleranceConfig,
};
use crate::pick::{self, is_strictly_positive, InterpolationData, PickStrategy, SAMPLE_RADIUS};
use crate::realization::{certify_schur, Realization, REDUCTION_TOL};
use crate::redheffer::{self, RedhefferColligation, SigmaFunction};
use crate::report::VerificationReport;
use crate::sampling;
use crate::theta::{self, ThetaFunction};

#[derive(Debug, Clone)]
pub struct HSProblemData {
    pub s: Realization,
    pub data: InterpolationData,
    /// Row functional `y` (`1 x k`).
    pub y: ComplexMatrix,
    /// Gram matrix of the columns of `F^S` in `H(S)`.
    pub p: ComplexMatrix,
}

impl HSProblemData {
    pub fn new(s: Realization, data: InterpolationData, y: ComplexMatrix, p: ComplexMatrix) -> Result<Self> {
        let k = data.state_dim();
        if s.out_dim() != data.out_dim() || s.in_dim() != data.in_dim() {
            return Err(Error::dim(
                "H(S) problem",
                format!("S is {}x{}, data needs {}x{}", s.out_dim(), s.in_dim(), data.out_dim(), data.in_dim()),
            ));
        }
        numerics::require_shape(&y, 1, k, "H(S) problem: y")?;
        numerics::require_shape(&p, k, k, "H(S) problem: P")?;
        Ok(HSProblemData { s, data, y, p })
    }

    /// Conditions `f(z_i)* E_i = y_i` at interior points; `N` and `P` are
    /// generated from `S`.
    pub fn from_points(
        s: Realization,
        points: &[Complex64],
        e: ComplexMatrix,
        y: ComplexMatrix,
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        let data = InterpolationData::sampled(&s, points, e, cfg)?;
        let p = pick::pick_matrix(&data, cfg)?;
        Self::new(s, data, y, p)
    }

    pub fn with_y(&self, y: ComplexMatrix) -> Result<Self> {
        Self::new(self.s.clone(), self.data.clone(), y, self.p.clone())
    }
}

pub fn check_admissible(prob: &HSProblemData, cfg: &ToleranceConfig) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    let rho = prob.data.spectral_radius()?;
    report.at_most("spectral_radius", rho, 1.0 + cfg.psd_tol);
    report.at_most("stein_residual", prob.data.stein_residual(&prob.p), cfg.residual_tol);
    report.at_most("hermitian_defect", op_norm(&(&prob.p - prob.p.adjoint())), cfg.psd_tol * op_norm(&prob.p).max(1.0));
    let cert = certify_schur(&prob.s, cfg);
    report.at_most("schur_sup", cert.sup_singular_value, 1.0 + cfg.residual_tol);
    if rho < 1.0 {
        let series = pick::build_pick(&prob.data, PickStrategy::Series, cfg)?.p;
        let mismatch = op_norm(&(&series - &prob.p)) / op_norm(&prob.p).max(1.0);
        report.at_most("pick_series_mismatch", mismatch, cfg.residual_tol);
    }
    Ok(report)
}

/// Certificate for `P - y*y >= 0`.
pub fn hs_solvable(p: &ComplexMatrix, y: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<PsdCertificate> {
    if y.nrows() != 1 || y.ncols() != p.ncols() {
        return Err(Error::dim(
            "hs_solvable",
            format!("y is {}x{}, P is {}x{}", y.nrows(), y.ncols(), p.nrows(), p.ncols()),
        ));
    }
    psd_certificate(&(p - y.adjoint() * y), cfg)
}

/// The contractions `X1`, `X2` with `(AA*)^{1/2} X1 = B`, `(AA*)^{1/2} X2 = A`.
#[derive(Debug, Clone)]
pub struct DouglasFactors {
    pub x1: ComplexMatrix,
    pub x2: ComplexMatrix,
}

pub fn douglas_factors(a: &ComplexMatrix, b: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<DouglasFactors> {
    if a.nrows() != b.nrows() {
        return Err(Error::dim("douglas", format!("A has {} rows, B has {}", a.nrows(), b.nrows())));
    }
    let aa = a * a.adjoint();
    let cert = psd_certificate(&(&aa - b * b.adjoint()), cfg)?;
    if !cert.is_psd {
        return Err(Error::Unsolvable { min_eigenvalue: cert.min_eigenvalue });
    }
    let e = eigh(&aa)?;
    let top = e.values.last().copied().unwrap_or(0.0);
    let cut = cfg.psd_tol * top;
    let root_pinv = numerics::spectral_apply(&e, |v| if v > cut && v > 0.0 { 1.0 / v.sqrt() } else { 0.0 });
    Ok(DouglasFactors { x1: &root_pinv * b, x2: root_pinv * a })
}

/// `X = X2* X1 + (I - X2*X2)^{1/2} K (I - X1*X1)^{1/2}`; `K = None` gives the
/// minimal-norm solution of `AX = B`.
pub fn douglas_solve(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    k: Option<&ComplexMatrix>,
    cfg: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    let f = douglas_factors(a, b, cfg)?;
    let mut x = f.x2.adjoint() * &f.x1;
    if let Some(k) = k {
        numerics::require_shape(k, a.ncols(), b.ncols(), "douglas: K")?;
        let nk = op_norm(k);
        if nk > 1.0 + cfg.psd_tol {
            return Err(Error::InvalidInput(format!("K has norm {nk}, not a contraction")));
        }
        let left = defect_root(&(identity(a.ncols()) - f.x2.adjoint() * &f.x2), cfg)?;
        let right = defect_root(&(identity(b.ncols()) - f.x1.adjoint() * &f.x1), cfg)?;
        x += left * k * right;
    }
    let res = op_norm(&(a * &x - b));
    let nx = op_norm(&x);
    if res > cfg.residual_tol * op_norm(b).max(1.0) || nx > 1.0 + cfg.residual_tol {
        return Err(Error::Numerical(format!("Douglas solution residual {res:e}, norm {nx}")));
    }
    Ok(x)
}

fn defect_root(m: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    let cert = psd_certificate(m, cfg)?;
    if !cert.is_psd {
        return Err(Error::NotPsd { min_eigenvalue: cert.min_eigenvalue });
    }
    let e = eigh(m)?;
    Ok(numerics::spectral_apply(&e, |v| if v > cfg.psd_tol { v.sqrt() } else { 0.0 }))
}

/// `[[I, B*, X*], [B, AA*, A], [X, A*, I]]`.
pub fn douglas_block(a: &ComplexMatrix, b: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    let (m, ny, nu) = (a.nrows(), a.ncols(), b.ncols());
    let n = nu + m + ny;
    let mut out = zeros(n, n);
    let mut put = |r: usize, c: usize, blk: &ComplexMatrix| out.view_mut((r, c), blk.shape()).copy_from(blk);
    put(0, 0, &identity(nu));
    put(0, nu, &b.adjoint());
    put(0, nu + m, &x.adjoint());
    put(nu, 0, b);
    put(nu, nu, &(a * a.adjoint()));
    put(nu, nu + m, a);
    put(nu + m, 0, x);
    put(nu + m, nu, &a.adjoint());
    put(nu + m, nu + m, &identity(ny));
    out
}

/// `h(z) = sum_k K_ℰ(z, w_k) c_k` with `K_ℰ(z, w) = (I - ℰ(z)ℰ(w)*)/(1 - z conj w)`.
#[derive(Debug, Clone)]
pub struct KernelCombination {
    pub base: Realization,
    pub points: Vec<Complex64>,
    pub coeffs: Vec<ComplexVector>,
}

impl KernelCombination {
    pub fn new(base: Realization, points: Vec<Complex64>, coeffs: Vec<ComplexVector>) -> Result<Self> {
        if points.len() != coeffs.len() {
            return Err(Error::dim(
                "kernel combination",
                format!("{} points, {} coefficients", points.len(), coeffs.len()),
            ));
        }
        if let Some(w) = points.iter().find(|w| !(w.norm() < 1.0)) {
            return Err(Error::InvalidInput(format!("kernel point {w} is not inside the unit disk")));
        }
        if let Some(c) = coeffs.iter().find(|c| c.len() != base.out_dim()) {
            return Err(Error::dim(
                "kernel combination",
                format!("coefficient of length {}, expected {}", c.len(), base.out_dim()),
            ));
        }
        Ok(KernelCombination { base, points, coeffs })
    }

    pub fn zero(base: Realization) -> Self {
        KernelCombination { base, points: Vec::new(), coeffs: Vec::new() }
    }

    fn kernel(&self, z: Complex64, w: Complex64, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
        let (ez, ew) = (self.base.eval(z, cfg)?, self.base.eval(w, cfg)?);
        Ok((identity(self.base.out_dim()) - ez * ew.adjoint()) / (real(1.0) - z * w.conj()))
    }

    /// `<self, other>` in `H(ℰ)`, linear in the first slot.
    pub fn inner(&self, other: &KernelCombination, cfg: &ToleranceConfig) -> Result<Complex64> {
        let mut acc = real(0.0);
        for (w, c) in self.points.iter().zip(&self.coeffs) {
            for (v, d) in other.points.iter().zip(&other.coeffs) {
                acc += (d.adjoint() * self.kernel(*v, *w, cfg)? * c)[(0, 0)];
            }
        }
        Ok(acc)
    }

    pub fn norm_sq(&self, cfg: &ToleranceConfig) -> Result<f64> {
        Ok(self.inner(self, cfg)?.re.max(0.0))
    }

    pub fn to_realization(&self) -> Result<Realization> {
        let m = self.base.out_dim();
        let mut acc = Realization::constant(zeros(m, 1));
        for (w, c) in self.points.iter().zip(&self.coeffs) {
            let cm = ComplexMatrix::from_column_slice(m, 1, c.as_slice());
            let ew = self.base.d.clone() + {
                let v = self.base.eval(*w, &ToleranceConfig::default())?;
                v - &self.base.d
            };
            let num = Realization::constant(cm.clone()).sub(&self.base.scale_right(&(ew.adjoint() * &cm))?)?;
            let wc = w.conj();
            let szego = Realization::new(identity(m) * wc, identity(m) * wc, identity(m), identity(m))?;
            acc = acc.add(&szego.mul(&num)?)?;
        }
        Ok(acc.minimal(REDUCTION_TOL))
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Route {
    Theta(ThetaFunction),
    Redheffer { colligation: RedhefferColligation, sigma: SigmaFunction, gamma: Realization },
}

#[derive(Debug, Clone)]
pub struct HSSolution {
    /// Minimal-norm solution `F^S P^+ y*`.
    pub central: Realization,
    /// `u = Θ11 - SΘ21` or `G = Σ12 (I - ℰΣ22)^-1`.
    pub carrier: Realization,
    /// The Schur function `ℰ` whose space `H(ℰ)` holds the free parameter.
    pub param: Realization,
    /// `P^+ y*`, so that `central = F^S x`.
    pub x: ComplexVector,
    pub central_norm_sq: f64,
    pub norm_budget: f64,
    pub route: Route,
}

pub fn solve_min_norm(prob: &HSProblemData, cfg: &ToleranceConfig) -> Result<HSSolution> {
    let cert = hs_solvable(&prob.p, &prob.y, cfg)?;
    if !cert.is_psd {
        return Err(Error::Unsolvable { min_eigenvalue: cert.min_eigenvalue });
    }
    let ys = prob.y.adjoint();
    let x_mat = numerics::pinv(&prob.p, cfg)? * &ys;
    let res = op_norm(&(&prob.p * &x_mat - &ys));
    if res > cfg.residual_tol * op_norm(&ys).max(1.0) {
        return Err(Error::Numerical(format!("y* is not in the range of P ({res:e})")));
    }
    let x = ComplexVector::from_column_slice(x_mat.as_slice());
    let fs = prob.data.fs(&prob.s, cfg)?;
    let central = fs.scale_right(&x_mat)?.minimal(REDUCTION_TOL);
    let mut central_norm_sq = (&prob.y * &x_mat)[(0, 0)].re;

    let (strict, _) = is_strictly_positive(&prob.p)?;
    let (carrier, param, route) = if strict {
        let th = theta::build_theta_explicit(&prob.data, &prob.p, theta::choose_mu(&prob.data.t)?, cfg)?;
        let param = theta::recover_param(&th, &prob.s, cfg)?;
        let u = th.block(1, 1).sub(&prob.s.mul(&th.block(2, 1))?)?.minimal(REDUCTION_TOL);
        (u, param, Route::Theta(th))
    } else {
        let coll = redheffer::build_colligation(&prob.data, &prob.p, cfg)?;
        let sig = redheffer::sigma(&coll);
        let param = redheffer::redheffer_recover(&sig, &prob.s, cfg)?;
        let (g, gamma) = redheffer::maps_g_gamma(&sig, &param)?;
        let xi = numerics::pinv(&coll.root.adjoint(), cfg)? * &ys;
        central_norm_sq = xi.norm_squared();
        let alt = gamma.scale_right(&xi)?;
        let pts = sampling::point_tuples(cfg.seed ^ 0xce17, 1, 20, SAMPLE_RADIUS).remove(0);
        let dev = alt.max_deviation(&central, &pts, cfg)?;
        if dev > cfg.residual_tol {
            return Err(Error::Numerical(format!("Γỹ* and F^S P^+ y* differ by {dev:e}")));
        }
        (g, param, Route::Redheffer { colligation: coll, sigma: sig, gamma })
    };
    Ok(HSSolution { central, carrier, param, x, central_norm_sq, norm_budget: budget(central_norm_sq, cfg), route })
}

fn budget(central_norm_sq: f64, cfg: &ToleranceConfig) -> f64 {
    let slack = 1.0 - central_norm_sq;
    if slack <= cfg.psd_tol {
        0.0
    } else {
        slack.sqrt()
    }
}

/// `f = central + carrier * h`, checked against the budget and, for
/// output-stable data, against the interpolation conditions.
pub fn parametrize_solutions(
    prob: &HSProblemData,
    sol: &HSSolution,
    h: &KernelCombination,
    cfg: &ToleranceConfig,
) -> Result<Realization> {
    if h.base.out_dim() != sol.param.out_dim() || h.base.in_dim() != sol.param.in_dim() {
        return Err(Error::dim("parametrize_solutions", "kernel combination has the wrong parameter shape".into()));
    }
    if sol.param.out_dim() > 0 && sol.param.in_dim() > 0 {
        let pts = sampling::point_tuples(cfg.seed ^ 0xba5e, 1, 10, SAMPLE_RADIUS).remove(0);
        if h.base.max_deviation(&sol.param, &pts, cfg)? > cfg.residual_tol {
            return Err(Error::InvalidInput("kernel combination is built on a different parameter".into()));
        }
    }
    let norm = h.norm_sq(cfg)?.sqrt();
    if norm > sol.norm_budget + cfg.psd_tol {
        return Err(Error::BudgetExceeded { norm, budget: sol.norm_budget });
    }
    let f = if h.points.is_empty() {
        sol.central.clone()
    } else {
        sol.central.add(&sol.carrier.mul(&h.to_realization()?)?)?.minimal(REDUCTION_TOL)
    };
    if let Some(res) = interpolation_residual(prob, &f)? {
        if res > cfg.residual_tol {
            return Err(Error::Numerical(format!("solution misses the interpolation conditions by {res:e}")));
        }
    }
    Ok(f)
}

/// `‖O_{E,T}* f - y*‖ / max(1, ‖y‖)`, or `None` when `ρ(T) >= 1` and the
/// observability operator is unbounded.
pub fn interpolation_residual(prob: &HSProblemData, f: &Realization) -> Result<Option<f64>> {
    let t = &prob.data.t;
    if prob.data.spectral_radius()? >= 1.0 {
        return Ok(None);
    }
    if f.out_dim() != prob.data.out_dim() || f.in_dim() != 1 {
        return Err(Error::dim("interpolation_residual", format!("f is {}x{}", f.out_dim(), f.in_dim())));
    }
    // X = sum_j T*^j E* c A^j solves X - T* X A = E* c.
    let (k, n) = (t.nrows(), f.state_dim());
    let ts = t.adjoint();
    if n == 0 {
        let adj = prob.data.e.adjoint() * &f.d;
        return Ok(Some(op_norm(&(adj - prob.y.adjoint())) / op_norm(&prob.y).max(1.0)));
    }
    let rhs = prob.data.e.adjoint() * &f.c;
    let op = identity(k * n) - f.a.transpose().kronecker(&ts);
    let vec = ComplexVector::from_column_slice(rhs.as_slice());
    let sol = op.lu().solve(&vec).ok_or(Error::Singular("observability sum"))?;
    let x = ComplexMatrix::from_column_slice(k, n, sol.as_slice());
    let adj = prob.data.e.adjoint() * &f.d + ts * x * &f.b;
    Ok(Some(op_norm(&(adj - prob.y.adjoint())) / op_norm(&prob.y).max(1.0)))
}

/// An element `F^S x + carrier * h` of `H(S)`.
#[derive(Debug, Clone)]
pub struct StructuredElement {
    pub x: ComplexVector,
    pub h: KernelCombination,
}

impl StructuredElement {
    pub fn to_realization(&self, prob: &HSProblemData, sol: &HSSolution, cfg: &ToleranceConfig) -> Result<Realization> {
        let xm = ComplexMatrix::from_column_slice(self.x.len(), 1, self.x.as_slice());
        let base = prob.data.fs(&prob.s, cfg)?.scale_right(&xm)?;
        if self.h.points.is_empty() {
            return Ok(base.minimal(REDUCTION_TOL));
        }
        Ok(base.add(&sol.carrier.mul(&self.h.to_realization()?)?)?.minimal(REDUCTION_TOL))
    }
}

/// `<a, b>` in `H(S)`: `x_b* P x_a + <h_a, h_b>_{H(ℰ)}`; the two summands
/// are orthogonal and the carrier acts isometrically.
pub fn hs_inner(
    prob: &HSProblemData,
    a: &StructuredElement,
    b: &StructuredElement,
    cfg: &ToleranceConfig,
) -> Result<Complex64> {
    let k = prob.data.state_dim();
    if a.x.len() != k || b.x.len() != k {
        return Err(Error::dim("hs_inner", format!("coordinates must have length {k}")));
    }
    let fs = (b.x.adjoint() * &prob.p * &a.x)[(0, 0)];
    Ok(fs + a.h.inner(&b.h, cfg)?)
}

/// `‖f‖²` against `‖P^{-1/2} y*‖² + ‖h‖²`, with an `H²` recomputation
/// when the `H(S)` and `H²` norms coincide (`S` inner or zero).
pub fn norm_report(
    prob: &HSProblemData,
    sol: &HSSolution,
    h: &KernelCombination,
    f: &Realization,
    cfg: &ToleranceConfig,
) -> Result<VerificationReport> {
    let structured = sol.central_norm_sq + h.norm_sq(cfg)?;
    let mut report = VerificationReport::new();
    report.at_most("norm_bound", structured, 1.0 + cfg.residual_tol);
    if h2_norm_applies(&prob.s, cfg)? {
        let h2 = crate::realization::h2_gram(f, f, cfg)?[(0, 0)].re;
        report.at_most("norm_identity_residual", (h2 - structured).abs(), cfg.residual_tol);
    }
    Ok(report)
}

/// Whether `‖·‖_{H(S)} = ‖·‖_{H²}` on `H(S)`: true for inner and for zero `S`.
pub fn h2_norm_applies(s: &Realization, cfg: &ToleranceConfig) -> Result<bool> {
    let circle = sampling::circle_points(cfg.grid_boundary_points, 1.0);
    let mut inner = s.out_dim() <= s.in_dim();
    let mut zero = true;
    for t in circle {
        let v = match s.eval(t, cfg) {
            Ok(v) => v,
            Err(_) => return Ok(false),
        };
        zero &= op_norm(&v) <= cfg.psd_tol;
        if inner {
            inner = op_norm(&(&v * v.adjoint() - identity(s.out_dim()))) <= cfg.residual_tol;
        }
    }
    Ok(inner || zero)
}

/// Smallest normalized eigenvalue of the sampled block kernel
/// `[[1, y, f(ζ)*], [y*, P, F^S(ζ)*], [f(z), F^S(z), K_S(z, ζ)]]`.
pub fn kernel_form_min(prob: &HSProblemData, f: &Realization, cfg: &ToleranceConfig) -> Result<f64> {
    let (k, q) = (prob.data.state_dim(), prob.s.out_dim());
    let blk = 1 + k + q;
    let mut worst = f64::INFINITY;
    for tuple in sampling::point_tuples(cfg.seed ^ 0x619, cfg.kernel_tuples, 3, SAMPLE_RADIUS) {
        let fv: Vec<ComplexMatrix> = tuple.iter().map(|&z| f.eval(z, cfg)).collect::<Result<_>>()?;
        let fsv: Vec<ComplexMatrix> = tuple.iter().map(|&z| prob.data.fs_at(&prob.s, z, cfg)).collect::<Result<_>>()?;
        let sv: Vec<ComplexMatrix> = tuple.iter().map(|&z| prob.s.eval(z, cfg)).collect::<Result<_>>()?;
        let m = tuple.len();
        let mut g = zeros(m * blk, m * blk);
        for i in 0..m {
            for j in 0..m {
                let ks = (identity(q) - &sv[i] * sv[j].adjoint()) / (real(1.0) - tuple[i] * tuple[j].conj());
                let mut b = zeros(blk, blk);
                b[(0, 0)] = real(1.0);
                b.view_mut((0, 1), (1, k)).copy_from(&prob.y);
                b.view_mut((0, 1 + k), (1, q)).copy_from(&fv[j].adjoint());
                b.view_mut((1, 0), (k, 1)).copy_from(&prob.y.adjoint());
                b.view_mut((1, 1), (k, k)).copy_from(&prob.p);
                b.view_mut((1, 1 + k), (k, q)).copy_from(&fsv[j].adjoint());
                b.view_mut((1 + k, 0), (q, 1)).copy_from(&fv[i]);
                b.view_mut((1 + k, 1), (q, k)).copy_from(&fsv[i]);
                b.view_mut((1 + k, 1 + k), (q, q)).copy_from(&ks);
                g.view_mut((i * blk, j * blk), (blk, blk)).copy_from(&b);
            }
        }
        worst = worst.min(pick::normalized_min_eig(&g)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cx;
    use crate::realization::{h2_inner, random_schur};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn one(v: f64) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, real(v))
    }

    fn fix_c(y: f64) -> HSProblemData {
        HSProblemData::from_points(Realization::scalar(real(0.0)), &[real(0.0)], one(1.0), one(y), &cfg()).unwrap()
    }

    fn kc(base: &Realization, w: Complex64, c: Complex64) -> KernelCombination {
        KernelCombination::new(base.clone(), alloc::vec![w], alloc::vec![ComplexVector::from_element(1, c)]).unwrap()
    }

    #[test]
    fn solvability_examples() {
        let c = cfg();
        assert!(hs_solvable(&one(1.0), &one(0.5), &c).unwrap().is_psd);
        assert!(!hs_solvable(&one(1.0), &one(2.0), &c).unwrap().is_psd);
        let p = ComplexMatrix::from_element(2, 2, real(1.0));
        let y = ComplexMatrix::from_element(1, 2, real(1.0));
        let cert = hs_solvable(&p, &y, &c).unwrap();
        assert!(cert.is_psd && cert.min_eigenvalue.abs() < 1e-15);
    }

    #[test]
    fn douglas_examples() {
        let c = cfg();
        let a = ComplexMatrix::from_row_slice(1, 2, &[real(1.0), real(0.0)]);
        let b = one(0.5);
        let x = douglas_solve(&a, &b, None, &c).unwrap();
        assert!(op_norm(&(x - ComplexMatrix::from_column_slice(2, 1, &[real(0.5), real(0.0)]))) < 1e-15);
        let k = ComplexMatrix::from_column_slice(2, 1, &[real(0.0), cx(0.6, 0.8)]);
        let x = douglas_solve(&a, &b, Some(&k), &c).unwrap();
        let want = ComplexMatrix::from_column_slice(2, 1, &[real(0.5), cx(0.6, 0.8) * real(3f64.sqrt() / 2.0)]);
        assert!(op_norm(&(&x - want)) < 1e-15);
        assert!(psd_certificate(&douglas_block(&a, &b, &x), &c).unwrap().is_psd);
        let x0 = douglas_solve(&a, &b, None, &c).unwrap();
        assert!((x.norm_squared() - x0.norm_squared() - (&x - &x0).norm_squared()).abs() < 1e-15);
        let inv = ComplexMatrix::from_row_slice(2, 2, &[real(2.0), real(0.0), real(1.0), real(3.0)]);
        let b = ComplexMatrix::from_column_slice(2, 1, &[real(1.0), real(0.5)]);
        let x0 = douglas_solve(&inv, &b, None, &c).unwrap();
        let x1 = douglas_solve(&inv, &b, Some(&ComplexMatrix::from_element(2, 1, real(0.7))), &c).unwrap();
        assert!(op_norm(&(&x0 - inv.clone().try_inverse().unwrap() * &b)) < 1e-14);
        assert!(op_norm(&(x0 - x1)) < 1e-14);
        assert!(matches!(douglas_solve(&a, &one(2.0), None, &c), Err(Error::Unsolvable { .. })));
    }

    #[test]
    fn constant_target_in_hardy_space() {
        let c = cfg();
        let prob = fix_c(0.5);
        assert!(check_admissible(&prob, &c).unwrap().passed());
        let sol = solve_min_norm(&prob, &c).unwrap();
        assert!((sol.central_norm_sq - 0.25).abs() < 1e-15);
        assert!((sol.norm_budget - 0.75f64.sqrt()).abs() < 1e-15);
        for z in [cx(0.3, 0.4), cx(-0.5, 0.0)] {
            assert!((sol.central.eval(z, &c).unwrap()[(0, 0)] - real(0.5)).norm() < 1e-15);
            assert!((sol.carrier.eval(z, &c).unwrap()[(0, 0)] - z).norm() < 1e-12);
            assert!(sol.param.eval(z, &c).unwrap()[(0, 0)].norm() < 1e-12);
        }
        for cval in [real(0.0), cx(0.3, -0.2), real(0.75f64.sqrt())] {
            let h = kc(&sol.param, real(0.0), cval);
            let f = parametrize_solutions(&prob, &sol, &h, &c).unwrap();
            for z in [cx(0.3, 0.4), cx(-0.5, 0.1)] {
                assert!((f.eval(z, &c).unwrap()[(0, 0)] - (real(0.5) + z * cval)).norm() < 1e-12);
            }
            let rep = norm_report(&prob, &sol, &h, &f, &c).unwrap();
            assert!(rep.value("norm_identity_residual") < 1e-12, "{rep:?}");
            let elem = StructuredElement { x: sol.x.clone(), h: h.clone() };
            let ip = hs_inner(&prob, &elem, &elem, &c).unwrap();
            assert!((ip - h2_inner(&f, &f, &c).unwrap()).norm() < 1e-12);
            assert!(kernel_form_min(&prob, &f, &c).unwrap() > -1e-10);
        }
        let over = kc(&sol.param, real(0.0), real(0.9));
        assert!(matches!(parametrize_solutions(&prob, &sol, &over, &c), Err(Error::BudgetExceeded { .. })));
        let h = kc(&sol.param, real(0.0), real(0.3));
        let central = StructuredElement { x: sol.x.clone(), h: KernelCombination::zero(sol.param.clone()) };
        let other = StructuredElement { x: ComplexVector::zeros(1), h };
        assert!(hs_inner(&prob, &central, &other, &c).unwrap().norm() < 1e-15);
    }

    #[test]
    fn saturated_target_is_unique() {
        let c = cfg();
        let prob = fix_c(1.0);
        let sol = solve_min_norm(&prob, &c).unwrap();
        assert_eq!(sol.norm_budget, 0.0);
        assert!((sol.central.eval(cx(0.2, 0.2), &c).unwrap()[(0, 0)] - real(1.0)).norm() < 1e-15);
        assert!(matches!(solve_min_norm(&fix_c(1.0 + 1e-6), &c), Err(Error::Unsolvable { .. })));
    }

    #[test]
    fn singular_gram_uses_colligation() {
        let c = cfg();
        let e = ComplexMatrix::from_row_slice(1, 2, &[real(1.0), real(1.0)]);
        let y = ComplexMatrix::from_row_slice(1, 2, &[real(0.5), real(0.5)]);
        let prob = HSProblemData::from_points(Realization::shift(1), &[real(0.0), real(0.5)], e, y, &c).unwrap();
        let sol = solve_min_norm(&prob, &c).unwrap();
        assert!(matches!(sol.route, Route::Redheffer { .. }));
        assert!((sol.central_norm_sq - 0.25).abs() < 1e-12);
        let f = parametrize_solutions(&prob, &sol, &KernelCombination::zero(sol.param.clone()), &c).unwrap();
        assert!(interpolation_residual(&prob, &f).unwrap().unwrap() < 1e-8);
        assert!(kernel_form_min(&prob, &f, &c).unwrap() > -1e-10);
    }

    #[test]
    fn random_problems_round_trip() {
        let c = cfg();
        for seed in 0..4u64 {
            let s = random_schur(2, 1, 1, seed);
            let mut g = sampling::rng(seed + 5);
            let pts: Vec<Complex64> = (0..2).map(|_| sampling::random_disk_point(&mut g, 0.7)).collect();
            let e = sampling::random_matrix(&mut g, 1, 2);
            let base = HSProblemData::from_points(s, &pts, e, zeros(1, 2), &c).unwrap();
            let dir = sampling::random_matrix(&mut g, 1, 2);
            // Largest t with P - t² y*y >= 0 for y = dir.
            let w = numerics::pinv(&base.p, &c).unwrap();
            let tmax = 1.0 / (&dir * &w * dir.adjoint())[(0, 0)].re.sqrt();
            let prob = base.with_y(dir.clone() * real(0.6 * tmax)).unwrap();
            assert!(check_admissible(&prob, &c).unwrap().passed());
            let sol = solve_min_norm(&prob, &c).unwrap();
            assert!((sol.central_norm_sq - 0.36).abs() < 1e-9);
            let h = kc(&sol.param, cx(0.1, 0.2), cx(0.2, 0.1));
            let f = parametrize_solutions(&prob, &sol, &h, &c).unwrap();
            assert!(kernel_form_min(&prob, &f, &c).unwrap() > -1e-9);
            let bad = base.with_y(dir * real(1.1 * tmax)).unwrap();
            assert!(kernel_form_min(&bad, &f, &c).unwrap() < -1e-6);
        }
    }
}
