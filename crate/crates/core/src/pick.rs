//! Interpolation data, Pick matrices and interpolant verification.
//!
//! The state space is `C^n` as columns. `E` (`q x n`) and `N` (`p x n`)
//! hold the vectors `E_i`, `N_i` as columns, and the Pick matrix satisfies
//! `P - T* P T = E* E - N* N`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    self, diag, hstack, identity, op_norm, psd_certificate, real, vstack, zeros, ComplexMatrix, ComplexVector,
    PsdCertificate, ToleranceConfig,
};
use crate::realization::{certify_schur, PowerBound, Realization, MAX_TERMS};
use crate::report::VerificationReport;
use crate::sampling;

/// Radius of the disk the sampled kernel checks draw from.
pub const SAMPLE_RADIUS: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationData {
    pub t: ComplexMatrix,
    pub e: ComplexMatrix,
    pub n: ComplexMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PickStrategy {
    Explicit,
    Series,
    Stein,
}

#[derive(Debug, Clone)]
pub struct PickResult {
    pub p: ComplexMatrix,
    pub strategy: PickStrategy,
    pub stein_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Observability {
    pub coeffs: Vec<ComplexVector>,
    /// `None` when `ρ(T) >= 1` and the series has no bound.
    pub tail_bound: Option<f64>,
}

impl InterpolationData {
    pub fn new(t: ComplexMatrix, e: ComplexMatrix, n: ComplexMatrix) -> Result<Self> {
        let k = numerics::require_square(&t, "interpolation data: T")?;
        if e.ncols() != k || n.ncols() != k {
            return Err(Error::dim(
                "interpolation data",
                format!("T is {k}x{k} but E has {} columns and N has {}", e.ncols(), n.ncols()),
            ));
        }
        if !(numerics::is_finite(&t) && numerics::is_finite(&e) && numerics::is_finite(&n)) {
            return Err(Error::InvalidInput("interpolation data has non-finite entries".into()));
        }
        Ok(InterpolationData { t, e, n })
    }

    /// Point data `T = diag(conj z_i)`; the columns of `e` and `n` are `E_i`, `N_i`.
    pub fn from_points(points: &[Complex64], e: ComplexMatrix, n: ComplexMatrix) -> Result<Self> {
        if let Some(z) = points.iter().find(|z| !(z.norm() < 1.0)) {
            return Err(Error::InvalidInput(format!("point {z} is not inside the unit disk")));
        }
        let conj: Vec<Complex64> = points.iter().map(|z| z.conj()).collect();
        Self::new(diag(&conj), e, n)
    }

    /// Point data generated by a Schur function: `N_i = S(z_i)* E_i`.
    pub fn sampled(s: &Realization, points: &[Complex64], e: ComplexMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        if e.nrows() != s.out_dim() {
            return Err(Error::dim("sampled data", format!("E has {} rows, S has {} outputs", e.nrows(), s.out_dim())));
        }
        let mut n = zeros(s.in_dim(), points.len());
        for (i, &z) in points.iter().enumerate() {
            let col = s.eval(z, cfg)?.adjoint() * e.column(i);
            n.set_column(i, &col);
        }
        Self::from_points(points, e, n)
    }

    pub fn state_dim(&self) -> usize {
        self.t.nrows()
    }

    /// `dim Y`, the output space.
    pub fn out_dim(&self) -> usize {
        self.e.nrows()
    }

    /// `dim U`, the input space.
    pub fn in_dim(&self) -> usize {
        self.n.nrows()
    }

    /// The nodes `z_i` when `T` is diagonal.
    pub fn points(&self) -> Option<Vec<Complex64>> {
        let k = self.state_dim();
        for i in 0..k {
            for j in 0..k {
                if i != j && self.t[(i, j)].norm() != 0.0 {
                    return None;
                }
            }
        }
        Some((0..k).map(|i| self.t[(i, i)].conj()).collect())
    }

    /// `C = [E; N]`.
    pub fn c(&self) -> ComplexMatrix {
        vstack(&[&self.e, &self.n])
    }

    pub fn stein_rhs(&self) -> ComplexMatrix {
        self.e.adjoint() * &self.e - self.n.adjoint() * &self.n
    }

    /// `‖P - T*PT - (E*E - N*N)‖ / max(1, ‖E*E - N*N‖)`.
    pub fn stein_residual(&self, p: &ComplexMatrix) -> f64 {
        let q = self.stein_rhs();
        op_norm(&(p - self.t.adjoint() * p * &self.t - &q)) / op_norm(&q).max(1.0)
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        numerics::spectral_radius(&self.t)
    }

    /// `F^S(z) = (E - S(z)N)(I - zT)^-1`, reduced to a minimal realization
    /// so that poles cancelled on the circle disappear.
    pub fn fs(&self, s: &Realization, cfg: &ToleranceConfig) -> Result<Realization> {
        if s.out_dim() != self.out_dim() || s.in_dim() != self.in_dim() {
            return Err(Error::dim(
                "F^S",
                format!("S is {}x{}, data needs {}x{}", s.out_dim(), s.in_dim(), self.out_dim(), self.in_dim()),
            ));
        }
        let _ = cfg;
        let num = Realization::constant(self.e.clone()).sub(&s.scale_right(&self.n)?)?;
        Ok(num.mul(&Realization::resolvent_of(&self.t))?.minimal(crate::realization::REDUCTION_TOL))
    }

    /// `F^S(z)` evaluated directly, without building a realization.
    pub fn fs_at(&self, s: &Realization, z: Complex64, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
        let k = self.state_dim();
        let r = numerics::checked_inverse(&(identity(k) - &self.t * z), 1.0 / cfg.psd_tol)
            .ok_or(Error::SingularResolvent { z })?;
        Ok((&self.e - s.eval(z, cfg)? * &self.n) * r)
    }
}

pub fn build_pick(data: &InterpolationData, strategy: PickStrategy, cfg: &ToleranceConfig) -> Result<PickResult> {
    let q = data.stein_rhs();
    let k = data.state_dim();
    let p = match strategy {
        PickStrategy::Explicit => {
            let z = data.points().ok_or(Error::NotDiagonalData)?;
            for i in 0..k {
                if !(z[i].norm() < 1.0) || (0..i).any(|j| z[j] == z[i]) {
                    return Err(Error::NotDiagonalData);
                }
            }
            ComplexMatrix::from_fn(k, k, |i, j| {
                let ee = data.e.column(i).dotc(&data.e.column(j));
                let nn = data.n.column(i).dotc(&data.n.column(j));
                (ee - nn) / (real(1.0) - z[i] * z[j].conj())
            })
        }
        PickStrategy::Series => {
            let bound = PowerBound::of(&data.t)?;
            let terms = bound.terms_for(op_norm(&q) * bound.m0, cfg.truncation_tol)?;
            let mut acc = zeros(k, k);
            let mut term = q.clone();
            for _ in 0..terms.max(1) {
                acc += &term;
                term = data.t.adjoint() * term * &data.t;
            }
            acc
        }
        PickStrategy::Stein => numerics::solve_stein(&data.t.adjoint(), &q, cfg)?,
    };
    let p = numerics::hermitian_part(&p);
    let stein_residual = data.stein_residual(&p);
    Ok(PickResult { p, strategy, stein_residual })
}

/// Pick matrix by the cheapest strategy that applies.
pub fn pick_matrix(data: &InterpolationData, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    match build_pick(data, PickStrategy::Explicit, cfg) {
        Ok(r) => Ok(r.p),
        Err(Error::NotDiagonalData) => Ok(build_pick(data, PickStrategy::Stein, cfg)?.p),
        Err(e) => Err(e),
    }
}

pub fn check_solvable(p: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<PsdCertificate> {
    psd_certificate(p, cfg)
}

/// Coefficients `E T^k x` of `E(I - zT)^-1 x`.
pub fn observability_coeffs(
    e: &ComplexMatrix,
    t: &ComplexMatrix,
    x: &ComplexVector,
    count: usize,
) -> Result<Observability> {
    let k = numerics::require_square(t, "observability: T")?;
    if e.ncols() != k || x.len() != k {
        return Err(Error::dim(
            "observability",
            format!("T is {k}x{k}, E has {} columns, x has {}", e.ncols(), x.len()),
        ));
    }
    let mut coeffs = Vec::with_capacity(count);
    let mut v = x.clone();
    for _ in 0..count {
        coeffs.push(e * &v);
        v = t * v;
    }
    let tail_bound = match PowerBound::of(t) {
        Ok(b) => Some(op_norm(e) * x.norm() * b.tail(count)),
        Err(Error::NotStable { .. }) => None,
        Err(err) => return Err(err),
    };
    Ok(Observability { coeffs, tail_bound })
}

/// Checks `sum_k T*^k E* s_k = N*` and samples positivity of the kernel
/// `[[P, F^S(ζ)*], [F^S(z), K_S(z, ζ)]]` on random point triples.
pub fn verify_interpolant(
    data: &InterpolationData,
    s: &Realization,
    cfg: &ToleranceConfig,
) -> Result<VerificationReport> {
    let rho = data.spectral_radius()?;
    if rho >= 1.0 {
        return Err(Error::BoundaryData("T has spectrum on the circle; use the boundary verification path"));
    }
    if s.out_dim() != data.out_dim() || s.in_dim() != data.in_dim() {
        return Err(Error::dim(
            "verify_interpolant",
            format!("S is {}x{}, data needs {}x{}", s.out_dim(), s.in_dim(), data.out_dim(), data.in_dim()),
        ));
    }
    let mut report = VerificationReport::new();
    let cert = certify_schur(s, cfg);
    report.at_most("schur_sup", cert.sup_singular_value, 1.0 + cfg.residual_tol);

    let (sum, bound) = adjoint_series(data, s, cfg)?;
    let residual = op_norm(&(sum - data.n.adjoint()));
    report.at_most("truncation_bound", bound, cfg.truncation_tol);
    report.at_most("condition_residual", residual, cfg.residual_tol * op_norm(&data.n).max(1.0));

    let p = build_pick(data, PickStrategy::Stein, cfg)?.p;
    let worst = sampled_kernel_min(data, &p, s, cfg)?;
    report.at_least("kernel_min_eigenvalue", worst, -cfg.psd_tol);
    Ok(report)
}

/// `sum_k T*^k E* s_k` with a bound on the omitted terms.
fn adjoint_series(data: &InterpolationData, s: &Realization, cfg: &ToleranceConfig) -> Result<(ComplexMatrix, f64)> {
    let bt = PowerBound::of(&data.t)?;
    let ba = PowerBound::of(&s.a)?;
    let e_norm = op_norm(&data.e);
    let cb = op_norm(&s.c) * op_norm(&s.b);
    let coeff_sup = op_norm(&s.d).max(cb * ba.m0);
    let tail = |k: usize| -> f64 {
        let via_s = e_norm * bt.m0 * cb * ba.tail(k - 1);
        let via_t = e_norm * coeff_sup * bt.tail(k);
        via_s.min(via_t)
    };
    let mut terms = 1;
    while tail(terms) > cfg.truncation_tol {
        terms += 1;
        if terms > MAX_TERMS {
            return Err(Error::TruncationCap { cap: MAX_TERMS });
        }
    }
    let mut tk = data.e.adjoint();
    let mut acc = &tk * &s.d;
    let mut ca = s.c.clone();
    for _ in 1..terms {
        tk = data.t.adjoint() * tk;
        acc += &tk * (&ca * &s.b);
        ca = &ca * &s.a;
    }
    Ok((acc, tail(terms)))
}

/// Smallest normalized eigenvalue over sampled Grams of the kernel built
/// from `P`, `F^S` and `K_S`.
pub fn sampled_kernel_min(
    data: &InterpolationData,
    p: &ComplexMatrix,
    s: &Realization,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let k = data.state_dim();
    let q = data.out_dim();
    let block = k + q;
    let mut worst = f64::INFINITY;
    for tuple in sampling::point_tuples(cfg.seed, cfg.kernel_tuples, 3, SAMPLE_RADIUS) {
        let fs: Vec<ComplexMatrix> = tuple.iter().map(|&z| data.fs_at(s, z, cfg)).collect::<Result<_>>()?;
        let sv: Vec<ComplexMatrix> = tuple.iter().map(|&z| s.eval(z, cfg)).collect::<Result<_>>()?;
        let m = tuple.len();
        let mut g = zeros(m * block, m * block);
        for i in 0..m {
            for j in 0..m {
                let ks = (identity(q) - &sv[i] * sv[j].adjoint()) / (real(1.0) - tuple[i] * tuple[j].conj());
                let entry = vstack(&[&hstack(&[p, &fs[j].adjoint()]), &hstack(&[&fs[i], &ks])]);
                g.view_mut((i * block, j * block), (block, block)).copy_from(&entry);
            }
        }
        worst = worst.min(normalized_min_eig(&g)?);
    }
    Ok(worst)
}

/// Smallest eigenvalue of the Hermitian part divided by `max(1, ‖M‖)`.
pub fn normalized_min_eig(m: &ComplexMatrix) -> Result<f64> {
    let e = numerics::eigh(m)?;
    Ok(e.values.first().copied().unwrap_or(0.0) / op_norm(m).max(1.0))
}

/// Matrix-valued positive kernel on the disk.
pub trait Kernel {
    fn dim(&self) -> usize;
    fn eval(&self, z: Complex64, w: Complex64, cfg: &ToleranceConfig) -> Result<ComplexMatrix>;
}

/// `I / (1 - z conj(w))`.
#[derive(Debug, Clone, Copy)]
pub struct Szego {
    pub dim: usize,
}

impl Kernel for Szego {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, z: Complex64, w: Complex64, _cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
        Ok(identity(self.dim) / (real(1.0) - z * w.conj()))
    }
}

/// `(I - S(z) S(w)*) / (1 - z conj(w))`.
#[derive(Debug, Clone, Copy)]
pub struct DeBrangesRovnyak<'a> {
    pub s: &'a Realization,
}

impl Kernel for DeBrangesRovnyak<'_> {
    fn dim(&self) -> usize {
        self.s.out_dim()
    }

    fn eval(&self, z: Complex64, w: Complex64, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
        let sz = self.s.eval(z, cfg)?;
        let sw = if z == w { sz.clone() } else { self.s.eval(w, cfg)? };
        Ok((identity(self.dim()) - sz * sw.adjoint()) / (real(1.0) - z * w.conj()))
    }
}

/// Samples `K(ω, ζ) - γ^-2 F(ω) F(ζ)*` on random triples and certifies each
/// Gram block; a necessary condition for `‖F‖_{H(K)} <= γ`.
pub fn membership_certificate(
    kernel: &dyn Kernel,
    f: &Realization,
    gamma: f64,
    cfg: &ToleranceConfig,
) -> Result<PsdCertificate> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma}")));
    }
    if f.out_dim() != kernel.dim() {
        return Err(Error::dim("membership", format!("F has {} rows, kernel dim {}", f.out_dim(), kernel.dim())));
    }
    let q = kernel.dim();
    let scale = real(1.0 / (gamma * gamma));
    let mut out = PsdCertificate { is_psd: true, min_eigenvalue: f64::INFINITY, hermitian_defect: 0.0 };
    for tuple in sampling::point_tuples(cfg.seed, cfg.kernel_tuples, 3, SAMPLE_RADIUS) {
        let fv: Vec<ComplexMatrix> = tuple.iter().map(|&z| f.eval(z, cfg)).collect::<Result<_>>()?;
        let m = tuple.len();
        let mut g = zeros(m * q, m * q);
        for i in 0..m {
            for j in 0..m {
                let entry = kernel.eval(tuple[i], tuple[j], cfg)? - &fv[i] * fv[j].adjoint() * scale;
                g.view_mut((i * q, j * q), (q, q)).copy_from(&entry);
            }
        }
        let c = psd_certificate(&g, cfg)?;
        out.is_psd &= c.is_psd;
        out.min_eigenvalue = out.min_eigenvalue.min(c.min_eigenvalue);
        out.hermitian_defect = out.hermitian_defect.max(c.hermitian_defect);
    }
    Ok(out)
}

/// Strictly-positive test used before inverting a Pick matrix.
pub fn is_strictly_positive(p: &ComplexMatrix) -> Result<(bool, f64)> {
    let min = numerics::eigh(p)?.values.first().copied().unwrap_or(f64::INFINITY);
    Ok((min > 0.0 && min >= 1e-8 * op_norm(p), min))
}
