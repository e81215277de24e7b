//! Unitary colligations built from possibly singular Pick matrices and the
//! Redheffer transform they induce.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::TAU;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    self, eigh, hstack, identity, op_norm, orth_complement, real, sub, vstack, zeros, ComplexMatrix, ToleranceConfig,
};
use crate::pick::{InterpolationData, SAMPLE_RADIUS};
use crate::realization::{certify_schur, left_divide, right_divide, Realization, REDUCTION_TOL};
use crate::report::VerificationReport;
use crate::sampling;
use crate::theta::IDENTITY_PAIRS;

#[derive(Debug, Clone)]
pub struct RedhefferColligation {
    /// Unitary from `X0 ⊕ U ⊕ Δ*~` onto `X0 ⊕ Y ⊕ Δ~`.
    pub u: ComplexMatrix,
    /// Orthonormal basis of the closure of `Ran P^{1/2}` (`k x r`).
    pub x0: ComplexMatrix,
    /// `P^{1/2}` written in the `x0` coordinates (`r x k`).
    pub root: ComplexMatrix,
    pub domain: ComplexMatrix,
    pub range: ComplexMatrix,
    pub delta: ComplexMatrix,
    pub delta_star: ComplexMatrix,
    pub out_dim: usize,
    pub in_dim: usize,
    pub unitarity_residual: f64,
    pub action_residual: f64,
}

impl RedhefferColligation {
    pub fn state_dim(&self) -> usize {
        self.x0.ncols()
    }

    pub fn d_delta(&self) -> usize {
        self.delta.ncols()
    }

    pub fn d_delta_star(&self) -> usize {
        self.delta_star.ncols()
    }

    fn rows(&self) -> [core::ops::Range<usize>; 3] {
        let (r, q) = (self.state_dim(), self.out_dim);
        [0..r, r..r + q, r + q..r + q + self.d_delta()]
    }

    fn cols(&self) -> [core::ops::Range<usize>; 3] {
        let (r, p) = (self.state_dim(), self.in_dim);
        [0..r, r..r + p, r + p..r + p + self.d_delta_star()]
    }

    /// Block `(i, j)` of the partition with rows `X0, Y, Δ~` and columns
    /// `X0, U, Δ*~`.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        sub(&self.u, self.rows()[i].clone(), self.cols()[j].clone())
    }

    pub fn a(&self) -> ComplexMatrix {
        self.block(0, 0)
    }

    pub fn c(&self) -> ComplexMatrix {
        vstack(&[&self.block(1, 0), &self.block(2, 0)])
    }
}

#[derive(Debug, Clone)]
pub struct SigmaFunction {
    /// `[[Σ11, Σ12], [Σ21, Σ22]]` from `U ⊕ Δ*~` to `Y ⊕ Δ~`.
    pub sigma: Realization,
    pub out_dim: usize,
    pub in_dim: usize,
    pub d_delta: usize,
    pub d_delta_star: usize,
}

impl SigmaFunction {
    pub fn block(&self, i: usize, j: usize) -> Realization {
        let rows = if i == 1 { 0..self.out_dim } else { self.out_dim..self.out_dim + self.d_delta };
        let cols = if j == 1 { 0..self.in_dim } else { self.in_dim..self.in_dim + self.d_delta_star };
        self.sigma.select(rows, cols)
    }
}

pub fn build_colligation(
    data: &InterpolationData,
    p: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<RedhefferColligation> {
    let k = data.state_dim();
    numerics::require_shape(p, k, k, "build_colligation: P")?;
    let cert = numerics::psd_certificate(p, cfg)?;
    if !cert.is_psd {
        return Err(Error::NotPsd { min_eigenvalue: cert.min_eigenvalue });
    }
    let stein = data.stein_residual(p);
    if stein > cfg.residual_tol {
        return Err(Error::SteinViolation { residual: stein });
    }
    let (q, pd) = (data.out_dim(), data.in_dim());
    let e = eigh(p)?;
    let scale = op_norm(p);
    let keep: Vec<usize> = (0..k).rev().filter(|&i| e.values[i] > cfg.psd_tol * scale).collect();
    let r = keep.len();
    let mut x0 = ComplexMatrix::from_fn(k, r, |i, j| e.vectors[(i, keep[j])]);
    numerics::normalize_column_phases(&mut x0);
    let root = ComplexMatrix::from_fn(r, k, |i, j| x0[(j, i)].conj() * real(e.values[keep[i]].sqrt()));

    let dom = vstack(&[&root, &data.n]);
    let img = vstack(&[&(&root * &data.t), &data.e]);
    let svd = numerics::thin_svd(&dom, 1e-10);
    let inv_s = numerics::diag(&svd.s.iter().map(|&s| real(1.0 / s)).collect::<Vec<_>>());
    let range = &img * &svd.v * inv_s;
    let iso = op_norm(&(range.adjoint() * &range - identity(svd.s.len())));
    if iso > cfg.residual_tol.sqrt() {
        return Err(Error::SteinViolation { residual: iso });
    }
    let domain = svd.u;
    let delta = orth_complement(&domain, r + pd)?;
    let delta_star = orth_complement(&range, r + q)?;
    let (dd, ds) = (delta.ncols(), delta_star.ncols());

    let mut u = zeros(r + q + dd, r + pd + ds);
    u.view_mut((0, 0), (r + q, r + pd)).copy_from(&(&range * domain.adjoint()));
    u.view_mut((0, r + pd), (r + q, ds)).copy_from(&delta_star);
    u.view_mut((r + q, 0), (dd, r + pd)).copy_from(&delta.adjoint());
    let n = u.nrows();
    let unitarity_residual =
        op_norm(&(u.adjoint() * &u - identity(u.ncols()))).max(op_norm(&(&u * u.adjoint() - identity(n))));
    let action = sub(&u, 0..r + q, 0..r + pd) * &dom - &img;
    let action_residual = op_norm(&action) / op_norm(&img).max(1.0);
    if unitarity_residual > cfg.residual_tol || action_residual > cfg.residual_tol {
        return Err(Error::Numerical(format!("colligation residuals {unitarity_residual:e} / {action_residual:e}")));
    }
    Ok(RedhefferColligation {
        u,
        x0,
        root,
        domain,
        range,
        delta,
        delta_star,
        out_dim: q,
        in_dim: pd,
        unitarity_residual,
        action_residual,
    })
}

pub fn sigma(coll: &RedhefferColligation) -> SigmaFunction {
    let b = hstack(&[&coll.block(0, 1), &coll.block(0, 2)]);
    let top = hstack(&[&coll.block(1, 1), &coll.block(1, 2)]);
    let bottom = hstack(&[&coll.block(2, 1), &zeros(coll.d_delta(), coll.d_delta_star())]);
    let sigma = Realization { a: coll.a(), b, c: coll.c(), d: vstack(&[&top, &bottom]) };
    SigmaFunction {
        sigma,
        out_dim: coll.out_dim,
        in_dim: coll.in_dim,
        d_delta: coll.d_delta(),
        d_delta_star: coll.d_delta_star(),
    }
}

/// `Σ22(0) = 0`, the sampled Schur bound and the kernel identity
/// `(I - Σ(z)Σ(ζ)*)/(1 - z conj ζ) = C(I - zA)^-1 (I - conj ζ A*)^-1 C*`.
pub fn verify_sigma(
    coll: &RedhefferColligation,
    sig: &SigmaFunction,
    cfg: &ToleranceConfig,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    let d22 = sub(&sig.sigma.d, sig.out_dim..sig.sigma.out_dim(), sig.in_dim..sig.sigma.in_dim());
    report.at_most("sigma22_at_origin", op_norm(&d22), 0.0);
    let cert = certify_schur(&sig.sigma, cfg);
    report.at_most("sigma_schur_sup", cert.sup_singular_value, 1.0 + cfg.psd_tol);
    report.at_most("sigma_kernel_identity_residual", sigma_identity_residual(coll, sig, cfg)?, cfg.residual_tol);
    report.at_most("colligation_unitarity", coll.unitarity_residual, cfg.residual_tol);
    Ok(report)
}

fn sigma_identity_residual(coll: &RedhefferColligation, sig: &SigmaFunction, cfg: &ToleranceConfig) -> Result<f64> {
    let c = coll.c();
    let m = sig.sigma.out_dim();
    let mut worst: f64 = 0.0;
    for pair in sampling::point_tuples(cfg.seed ^ 0x5197, IDENTITY_PAIRS, 2, SAMPLE_RADIUS) {
        let (z, w) = (pair[0], pair[1]);
        let (sz, sw) = (sig.sigma.eval(z, cfg)?, sig.sigma.eval(w, cfg)?);
        let lhs = (identity(m) - sz * sw.adjoint()) / (real(1.0) - z * w.conj());
        let rhs = &c * sig.sigma.resolvent(z, cfg)? * sig.sigma.resolvent(w, cfg)?.adjoint() * c.adjoint();
        worst = worst.max(op_norm(&(lhs - &rhs)) / op_norm(&rhs).max(1.0));
    }
    Ok(worst)
}

/// Closed loop of `Σ` with `w = ℰ v + r`; inputs `[u; r]`, output `y`.
fn closed_loop(sig: &SigmaFunction, param: &Realization) -> Result<Realization> {
    let (q, p, dd, ds) = (sig.out_dim, sig.in_dim, sig.d_delta, sig.d_delta_star);
    if param.out_dim() != ds || param.in_dim() != dd {
        return Err(Error::dim(
            "Redheffer parameter",
            format!("parameter is {}x{}, expected {ds}x{dd}", param.out_dim(), param.in_dim()),
        ));
    }
    let s = &sig.sigma;
    let n = s.state_dim();
    let b1 = sub(&s.b, 0..n, 0..p);
    let b2 = sub(&s.b, 0..n, p..p + ds);
    let c1 = sub(&s.c, 0..q, 0..n);
    let c2 = sub(&s.c, q..q + dd, 0..n);
    let d11 = sub(&s.d, 0..q, 0..p);
    let d12 = sub(&s.d, 0..q, p..p + ds);
    let d21 = sub(&s.d, q..q + dd, 0..p);
    let (ae, be, ce, de) = (&param.a, &param.b, &param.c, &param.d);

    let a = vstack(&[&hstack(&[&(&s.a + &b2 * de * &c2), &(&b2 * ce)]), &hstack(&[&(be * &c2), ae])]);
    let b = vstack(&[&hstack(&[&(&b1 + &b2 * de * &d21), &b2]), &hstack(&[&(be * &d21), &zeros(ae.nrows(), ds)])]);
    let c = hstack(&[&(&c1 + &d12 * de * &c2), &(&d12 * ce)]);
    let d = hstack(&[&(&d11 + &d12 * de * &d21), &d12]);
    Realization::new(a, b, c, d)
}

/// `Σ11 + Σ12 (I - ℰΣ22)^-1 ℰ Σ21`.
pub fn redheffer_apply(sig: &SigmaFunction, param: &Realization, cfg: &ToleranceConfig) -> Result<Realization> {
    if param.out_dim() > 0 && param.in_dim() > 0 {
        let cert = certify_schur(param, cfg);
        if !cert.passed {
            return Err(Error::NotSchur { sup: cert.sup_singular_value });
        }
    }
    let cl = closed_loop(sig, param)?;
    Ok(cl.select(0..sig.out_dim, 0..sig.in_dim).minimal(REDUCTION_TOL))
}

/// `G = Σ12 (I - ℰΣ22)^-1` and `Γ = (C1 + GℰC2)(I - zA)^-1`.
pub fn maps_g_gamma(sig: &SigmaFunction, param: &Realization) -> Result<(Realization, Realization)> {
    let cl = closed_loop(sig, param)?;
    let g = cl.select(0..sig.out_dim, sig.in_dim..sig.in_dim + sig.d_delta_star).minimal(REDUCTION_TOL);
    let n = sig.sigma.state_dim();
    let inject = vstack(&[&identity(n), &zeros(param.state_dim(), n)]);
    let gamma = Realization::new(cl.a.clone(), &cl.a * &inject, cl.c.clone(), &cl.c * &inject)?;
    Ok((g, gamma.minimal(REDUCTION_TOL)))
}

/// Pointwise solution of `S(z) = ℛ_Σ[ℰ](z)` for `ℰ(z)`.
pub fn redheffer_param_at(
    sig: &SigmaFunction,
    s: &Realization,
    z: Complex64,
    cfg: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    let (q, p) = (sig.out_dim, sig.in_dim);
    let v = sig.sigma.eval(z, cfg)?;
    let s11 = sub(&v, 0..q, 0..p);
    let s12 = sub(&v, 0..q, p..v.ncols());
    let s21 = sub(&v, q..v.nrows(), 0..p);
    let s22 = sub(&v, q..v.nrows(), p..v.ncols());
    let target = s.eval(z, cfg)? - &s11;
    let x = numerics::pinv(&s12, cfg)? * &target * numerics::pinv(&s21, cfg)?;
    let residual = op_norm(&(&s12 * &x * &s21 - &target));
    if residual > cfg.residual_tol * op_norm(&target).max(1.0) {
        return Err(Error::Numerical(format!(
            "S is not in the range of the Redheffer transform at {z} ({residual:e})"
        )));
    }
    let den = identity(sig.d_delta) + &s22 * &x;
    let den_inv = numerics::checked_inverse(&den, 1.0 / cfg.psd_tol).ok_or(Error::Singular("Redheffer inverse"))?;
    Ok(x * den_inv)
}

/// A parameter `ℰ` with `ℛ_Σ[ℰ] = S`.
///
/// `Σ12` and `Σ21` are compressed to square pieces with their adjoints at a
/// point where both are well conditioned; the divisions are performed
/// around that point.
pub fn redheffer_recover(sig: &SigmaFunction, s: &Realization, cfg: &ToleranceConfig) -> Result<Realization> {
    let (q, p, dd, ds) = (sig.out_dim, sig.in_dim, sig.d_delta, sig.d_delta_star);
    if s.out_dim() != q || s.in_dim() != p {
        return Err(Error::dim("redheffer_recover", format!("S is {}x{}, expected {q}x{p}", s.out_dim(), s.in_dim())));
    }
    let pts = sampling::point_tuples(cfg.seed ^ 0x4ed, 1, 20, SAMPLE_RADIUS).remove(0);
    if dd == 0 || ds == 0 {
        let param = Realization::constant(zeros(ds, dd));
        let dev = s.max_deviation(&sig.block(1, 1), &pts, cfg)?;
        if dev > cfg.residual_tol {
            return Err(Error::Numerical(format!("S deviates from the unique solution by {dev:e}")));
        }
        return Ok(param);
    }
    let centre = best_centre(sig, cfg)?;
    let v = sig.sigma.eval(centre, cfg)?;
    let left = sub(&v, 0..q, p..p + ds).adjoint();
    let right = sub(&v, q..q + dd, 0..p).adjoint();

    let local = |f: &Realization| -> Result<Realization> {
        if centre == real(0.0) {
            Ok(f.clone())
        } else {
            f.recenter(centre, cfg)
        }
    };
    let (s11, s12, s21, s22) =
        (local(&sig.block(1, 1))?, local(&sig.block(1, 2))?, local(&sig.block(2, 1))?, local(&sig.block(2, 2))?);
    let target = local(s)?.sub(&s11)?.scale_left(&left)?.scale_right(&right)?;
    let lhs = s12.scale_left(&left)?;
    let z = left_divide(&Realization::stack_cols(&[&lhs, &target.scale_left(&(-identity(ds)))?])?, ds, cfg)?
        .minimal(REDUCTION_TOL);
    let rhs = s21.scale_right(&right)?;
    let x = right_divide(&Realization::stack_rows(&[&z, &rhs])?, dd, cfg)?.minimal(REDUCTION_TOL);
    let den = Realization::identity(dd).add(&s22.mul(&x)?)?;
    let e_local = right_divide(&Realization::stack_rows(&[&x, &den])?, dd, cfg)?.minimal(REDUCTION_TOL);
    let param = if centre == real(0.0) { e_local } else { e_local.recenter(-centre, cfg)?.minimal(REDUCTION_TOL) };
    let back = redheffer_apply(sig, &param, cfg)?;
    let dev = back.max_deviation(s, &pts, cfg)?;
    if dev > cfg.residual_tol {
        return Err(Error::Numerical(format!("Redheffer parameter round trip deviates by {dev:e}")));
    }
    Ok(param)
}

fn best_centre(sig: &SigmaFunction, cfg: &ToleranceConfig) -> Result<Complex64> {
    let (q, p) = (sig.out_dim, sig.in_dim);
    let quality = |a: Complex64| -> Option<f64> {
        let v = sig.sigma.eval(a, cfg).ok()?;
        let s12 = sub(&v, 0..q, p..v.ncols());
        let s21 = sub(&v, q..v.nrows(), 0..p);
        let m = numerics::min_singular_value(&s12).min(numerics::min_singular_value(&s21));
        Some(m / op_norm(&v).max(1.0))
    };
    let mut best = (real(0.0), quality(real(0.0)).unwrap_or(0.0));
    if best.1 >= 1e-3 {
        return Ok(best.0);
    }
    for r in [0.25, 0.5] {
        for k in 0..16 {
            let a = Complex64::from_polar(r, TAU * (k as f64 + 0.5) / 16.0);
            if let Some(v) = quality(a) {
                if v > best.1 {
                    best = (a, v);
                }
            }
        }
    }
    if best.1 < 1e-8 {
        return Err(Error::Singular("Redheffer inverse: Σ12 or Σ21 rank deficient"));
    }
    Ok(best.0)
}

/// Residuals of the kernel decomposition `K_S = G K_ℰ G* + ΓΓ*`, of
/// `Γ P^{1/2} = F^S` and of the `Σ` kernel identity.
#[allow(clippy::too_many_arguments)]
pub fn verify_decomposition(
    coll: &RedhefferColligation,
    sig: &SigmaFunction,
    s: &Realization,
    param: &Realization,
    g: &Realization,
    gamma: &Realization,
    data: &InterpolationData,
    cfg: &ToleranceConfig,
) -> Result<VerificationReport> {
    let q = s.out_dim();
    let mut kernel: f64 = 0.0;
    let mut fs: f64 = 0.0;
    for pair in sampling::point_tuples(cfg.seed ^ 0xdec0, IDENTITY_PAIRS, 2, SAMPLE_RADIUS) {
        let (z, w) = (pair[0], pair[1]);
        let scale = real(1.0) / (real(1.0) - z * w.conj());
        let (sz, sw) = (s.eval(z, cfg)?, s.eval(w, cfg)?);
        let ks = (identity(q) - &sz * sw.adjoint()) * scale;
        let (ez, ew) = (param.eval(z, cfg)?, param.eval(w, cfg)?);
        let ke = (identity(param.out_dim()) - &ez * ew.adjoint()) * scale;
        let (gz, gw) = (g.eval(z, cfg)?, g.eval(w, cfg)?);
        let (cz, cw) = (gamma.eval(z, cfg)?, gamma.eval(w, cfg)?);
        let rhs = &gz * ke * gw.adjoint() + &cz * cw.adjoint();
        kernel = kernel.max(op_norm(&(&ks - rhs)) / op_norm(&ks).max(1.0));
        let f = data.fs_at(s, z, cfg)?;
        fs = fs.max(op_norm(&(&cz * &coll.root - &f)) / op_norm(&f).max(1.0));
    }
    let mut report = VerificationReport::new();
    report.at_most("kernel_decomposition_residual", kernel, cfg.residual_tol);
    report.at_most("gamma_root_residual", fs, cfg.residual_tol);
    report.at_most("sigma_kernel_identity_residual", sigma_identity_residual(coll, sig, cfg)?, cfg.residual_tol);
    Ok(report)
}

/// `(∩_k Ran T*^k) ∩ Ker T* = {0}`, decided by ranks; the chain of ranges
/// is stationary after `dim` steps.
pub fn uniqueness_condition(t: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<bool> {
    let n = numerics::require_square(t, "uniqueness_condition")?;
    let ts = t.adjoint();
    let mut power = identity(n);
    for _ in 0..n {
        power = &ts * power;
    }
    let tol = cfg.psd_tol.sqrt();
    let basis = numerics::range_basis(&power, tol);
    Ok(numerics::rank(&(&ts * &basis), tol) == basis.ncols())
}
