//! J-inner generators of all solutions and the linear fractional map.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::TAU;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    self, block_diag, diag, eigenvalues, eigh, hstack, identity, inverse, op_norm, real, sub, vstack, ComplexMatrix,
    ToleranceConfig,
};
use crate::pick::{is_strictly_positive, InterpolationData, SAMPLE_RADIUS};
use crate::realization::{certify_schur, left_divide, right_divide, Realization, REDUCTION_TOL};
use crate::report::VerificationReport;
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub dim_plus: usize,
    pub dim_minus: usize,
}

impl Signature {
    pub fn new(dim_plus: usize, dim_minus: usize) -> Self {
        Signature { dim_plus, dim_minus }
    }

    pub fn dim(&self) -> usize {
        self.dim_plus + self.dim_minus
    }

    /// `diag(I, -I)`.
    pub fn j(&self) -> ComplexMatrix {
        let mut v = Vec::with_capacity(self.dim());
        v.extend((0..self.dim_plus).map(|_| real(1.0)));
        v.extend((0..self.dim_minus).map(|_| real(-1.0)));
        diag(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Explicit { mu: Complex64 },
    Krein,
}

#[derive(Debug, Clone)]
pub struct ThetaFunction {
    pub theta: Realization,
    pub signature: Signature,
    pub provenance: Provenance,
}

impl ThetaFunction {
    /// Block `(i, j)` with `i, j` in `{1, 2}`.
    pub fn block(&self, i: usize, j: usize) -> Realization {
        let q = self.signature.dim_plus;
        let n = self.signature.dim();
        let range = |k: usize| if k == 1 { 0..q } else { q..n };
        self.theta.select(range(i), range(j))
    }

    pub fn eval(&self, z: Complex64, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
        self.theta.eval(z, cfg)
    }
}

#[derive(Debug, Clone)]
pub struct KreinCompletion {
    pub b: ComplexMatrix,
    pub d: ComplexMatrix,
    pub inertia: (usize, usize),
    pub residual_forward: f64,
    pub residual_adjoint: f64,
}

/// `1` unless it sits on the spectrum of `T*`; then the 64th root of unity
/// farthest from that spectrum.
pub fn choose_mu(t: &ComplexMatrix) -> Result<Complex64> {
    let spec: Vec<Complex64> = eigenvalues(&t.adjoint())?;
    let dist = |mu: Complex64| spec.iter().map(|l| (mu - l).norm()).fold(f64::INFINITY, f64::min);
    if dist(real(1.0)) > 1e-6 {
        return Ok(real(1.0));
    }
    let mut best = (real(1.0), dist(real(1.0)));
    for k in 1..64 {
        let mu = Complex64::from_polar(1.0, TAU * k as f64 / 64.0);
        let d = dist(mu);
        if d > best.1 {
            best = (mu, d);
        }
    }
    Ok(best.0)
}

fn require_strict(p: &ComplexMatrix) -> Result<()> {
    let (ok, min) = is_strictly_positive(p)?;
    if ok {
        Ok(())
    } else {
        Err(Error::DegeneratePick { min_eigenvalue: min })
    }
}

/// `Θ(z) = I + (z - μ) C (I - zT)^-1 P^-1 (μI - T*)^-1 C* J` with `C = [E; N]`,
/// so `Θ(μ) = I`.
pub fn build_theta_explicit(
    data: &InterpolationData,
    p: &ComplexMatrix,
    mu: Complex64,
    cfg: &ToleranceConfig,
) -> Result<ThetaFunction> {
    let k = data.state_dim();
    numerics::require_shape(p, k, k, "build_theta_explicit: P")?;
    if (mu.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::BadMu { mu, reason: "not on the unit circle" });
    }
    require_strict(p)?;
    let sig = Signature::new(data.out_dim(), data.in_dim());
    let c = data.c();
    let shifted = identity(k) * mu - data.t.adjoint();
    let shifted_inv = inverse(&shifted, "build_theta_explicit", cfg)
        .map_err(|_| Error::BadMu { mu, reason: "in the spectrum of T*" })?;
    let p_inv = inverse(p, "build_theta_explicit: P", cfg)?;
    let m = p_inv * shifted_inv * c.adjoint() * sig.j();
    let b = (identity(k) - &data.t * mu) * &m;
    let d = identity(sig.dim()) - &c * &m * mu;
    let theta = Realization::new(data.t.clone(), b, c, d)?;
    Ok(ThetaFunction { theta, signature: sig, provenance: Provenance::Explicit { mu } })
}

/// Completes `[T; C]` to a `(diag(P, J))`-unitary colligation and returns
/// `Θ(z) = D + zC(I - zT)^-1 B`.
pub fn krein_complete(
    data: &InterpolationData,
    p: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<(KreinCompletion, ThetaFunction)> {
    let k = data.state_dim();
    numerics::require_shape(p, k, k, "krein_complete: P")?;
    require_strict(p)?;
    let sig = Signature::new(data.out_dim(), data.in_dim());
    let j = sig.j();
    let c = data.c();
    let cjc = c.adjoint() * &j * &c;
    let stein = op_norm(&(p - data.t.adjoint() * p * &data.t - &cjc));
    if stein > cfg.residual_tol * op_norm(&cjc).max(1.0) {
        return Err(Error::SteinViolation { residual: stein });
    }
    let m = sig.dim();
    let big = block_diag(&[p, &j]);
    let g = vstack(&[&data.t, &c]);
    let p_inv = inverse(p, "krein_complete: P", cfg)?;
    let proj = identity(k + m) - &g * &p_inv * g.adjoint() * &big;
    let q = numerics::thin_svd(&proj, 1e-8).u;
    if q.ncols() != m {
        return Err(Error::Numerical(format!("projection has rank {}, expected {m}", q.ncols())));
    }
    let gram = q.adjoint() * &big * &q;
    let e = eigh(&gram)?;
    let scale = e.values.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
    let pos: Vec<usize> = (0..m).rev().filter(|&i| e.values[i] > 1e-12 * scale).collect();
    let neg: Vec<usize> = (0..m).filter(|&i| e.values[i] < -1e-12 * scale).collect();
    if pos.len() != sig.dim_plus || neg.len() != sig.dim_minus {
        return Err(Error::Inertia {
            positives: pos.len(),
            negatives: neg.len(),
            expected_plus: sig.dim_plus,
            expected_minus: sig.dim_minus,
        });
    }
    let order: Vec<usize> = pos.iter().chain(neg.iter()).copied().collect();
    let mut w = ComplexMatrix::from_fn(m, m, |r, col| {
        e.vectors[(r, order[col])] * real(1.0 / e.values[order[col]].abs().sqrt())
    });
    numerics::normalize_column_phases(&mut w);
    let x = &q * w;
    let b = sub(&x, 0..k, 0..m);
    let d = sub(&x, k..k + m, 0..m);

    let full = vstack(&[&hstack(&[&data.t, &b]), &hstack(&[&c, &d])]);
    let fwd_w = block_diag(&[&p_inv, &j]);
    let residual_forward = op_norm(&(&full * &fwd_w * full.adjoint() - &fwd_w)) / op_norm(&fwd_w).max(1.0);
    let residual_adjoint = op_norm(&(full.adjoint() * &big * &full - &big)) / op_norm(&big).max(1.0);
    if residual_forward > cfg.residual_tol || residual_adjoint > cfg.residual_tol {
        return Err(Error::Numerical(format!("completion residuals {residual_forward:e} / {residual_adjoint:e}")));
    }
    let theta = Realization::new(data.t.clone(), b.clone(), c, d.clone())?;
    let completion = KreinCompletion { b, d, inertia: (pos.len(), neg.len()), residual_forward, residual_adjoint };
    Ok((completion, ThetaFunction { theta, signature: sig, provenance: Provenance::Krein }))
}

/// Number of sampled `(z, ζ)` pairs for the kernel identities.
pub const IDENTITY_PAIRS: usize = 50;

pub fn verify_theta(
    theta: &ThetaFunction,
    data: &InterpolationData,
    p: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<VerificationReport> {
    let k = data.state_dim();
    let sig = theta.signature;
    let j = sig.j();
    let c = data.c();
    let p_inv = inverse(p, "verify_theta: P", cfg)?;
    let resolvent = |z: Complex64| -> Result<ComplexMatrix> {
        numerics::checked_inverse(&(identity(k) - &data.t * z), 1.0 / cfg.psd_tol).ok_or(Error::SingularResolvent { z })
    };
    let pairs = sampling::point_tuples(cfg.seed ^ 0x5eed, IDENTITY_PAIRS, 2, SAMPLE_RADIUS);
    let mut report = VerificationReport::new();

    let mut kernel_res: f64 = 0.0;
    for pair in &pairs {
        let (z, w) = (pair[0], pair[1]);
        let (tz, tw) = (theta.eval(z, cfg)?, theta.eval(w, cfg)?);
        let lhs = (&j - &tz * &j * tw.adjoint()) / (real(1.0) - z * w.conj());
        let rhs = &c * resolvent(z)? * &p_inv * resolvent(w)?.adjoint() * c.adjoint();
        kernel_res = kernel_res.max(op_norm(&(lhs - &rhs)) / op_norm(&rhs).max(1.0));
    }
    report.at_most("kernel_identity_residual", kernel_res, cfg.residual_tol);

    if let Provenance::Explicit { mu } = theta.provenance {
        let ct = &j
            * &c
            * inverse(&(identity(k) - &data.t * mu), "verify_theta", cfg)?
            * &p_inv
            * (identity(k) * mu - data.t.adjoint());
        let mut res: f64 = 0.0;
        for pair in &pairs {
            let (z, w) = (pair[0], pair[1]);
            let (tz, tw) = (theta.eval(z, cfg)?, theta.eval(w, cfg)?);
            let lhs = (&j - tz.adjoint() * &j * &tw) / (real(1.0) - z.conj() * w);
            let rhs = &ct * resolvent(z)?.adjoint() * p * resolvent(w)? * ct.adjoint();
            res = res.max(op_norm(&(lhs - &rhs)) / op_norm(&rhs).max(1.0));
        }
        report.at_most("adjoint_kernel_identity_residual", res, cfg.residual_tol);
    }

    let mut min_fwd = f64::INFINITY;
    let mut min_adj = f64::INFINITY;
    let mut ratio: f64 = 0.0;
    for z in sampling::interior_grid(cfg.grid_interior_points) {
        let t = theta.eval(z, cfg)?;
        let scale = op_norm(&t).powi(2).max(1.0);
        min_fwd = min_fwd.min(min_eig(&(&j - &t * &j * t.adjoint()))? / scale);
        min_adj = min_adj.min(min_eig(&(&j - t.adjoint() * &j * &t))? / scale);
        let q = sig.dim_plus;
        let t21 = sub(&t, q..sig.dim(), 0..q);
        let t22 = sub(&t, q..sig.dim(), q..sig.dim());
        ratio = match numerics::checked_inverse(&t22, 1.0 / cfg.psd_tol) {
            Some(inv) => ratio.max(op_norm(&(inv * t21))),
            None => f64::INFINITY,
        };
    }
    report.at_least("j_contractive_min_eigenvalue", min_fwd, -cfg.psd_tol);
    report.at_least("j_contractive_adjoint_min_eigenvalue", min_adj, -cfg.psd_tol);
    report.at_most("theta22_inverse_theta21_norm", ratio, 1.0 + cfg.psd_tol);

    if data.spectral_radius()? < 1.0 {
        let mut worst: f64 = 0.0;
        for t in sampling::circle_points(cfg.grid_boundary_points, 1.0) {
            let v = theta.eval(t, cfg)?;
            worst = worst.max(op_norm(&(&v * &j * v.adjoint() - &j)));
        }
        report.at_most("boundary_j_unitarity", worst, cfg.residual_tol);
    }
    Ok(report)
}

fn min_eig(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigh(m)?.values.first().copied().unwrap_or(0.0))
}

/// `S = (Θ11 ℰ + Θ12)(Θ21 ℰ + Θ22)^-1`.
pub fn lft(theta: &ThetaFunction, param: &Realization, cfg: &ToleranceConfig) -> Result<Realization> {
    let (q, p) = (theta.signature.dim_plus, theta.signature.dim_minus);
    if param.out_dim() != q || param.in_dim() != p {
        return Err(Error::dim(
            "lft",
            format!("parameter is {}x{}, expected {q}x{p}", param.out_dim(), param.in_dim()),
        ));
    }
    let cert = certify_schur(param, cfg);
    if !cert.passed {
        return Err(Error::NotSchur { sup: cert.sup_singular_value });
    }
    let col = Realization::stack_rows(&[param, &Realization::identity(p)])?;
    let x = theta.theta.mul(&col)?;
    let s = right_divide(&x, p, cfg).map_err(|e| match e {
        Error::Singular(_) => Error::Singular("lft: denominator at z = 0"),
        other => other,
    })?;
    Ok(s.minimal(REDUCTION_TOL))
}

/// `ℰ = (Θ11 - SΘ21)^-1 (SΘ22 - Θ12)`.
///
/// The leading factor vanishes at every interpolation node, so the
/// division is carried out around a point where it is well conditioned and
/// the hidden modes are removed before moving back to the origin.
pub fn recover_param(theta: &ThetaFunction, s: &Realization, cfg: &ToleranceConfig) -> Result<Realization> {
    let (q, p) = (theta.signature.dim_plus, theta.signature.dim_minus);
    if s.out_dim() != q || s.in_dim() != p {
        return Err(Error::dim("recover_param", format!("S is {}x{}, expected {q}x{p}", s.out_dim(), s.in_dim())));
    }
    let left = Realization::stack_cols(&[&Realization::identity(q), &s.scale_left(&(-identity(q)))?])?;
    let y = left.mul(&theta.theta)?;
    let param = divide_around_best_point(&y, q, cfg)?;
    let back = lft(theta, &param, cfg)?;
    let pts = sampling::point_tuples(cfg.seed ^ 0xbac, 1, 20, SAMPLE_RADIUS).remove(0);
    let dev = back.max_deviation(s, &pts, cfg)?;
    if dev > cfg.residual_tol {
        return Err(Error::Numerical(format!("parameter recovery round trip deviates by {dev:e}")));
    }
    Ok(param)
}

/// `-U^-1 W` for `Y = [U, W]`, computed around the candidate centre where
/// `U` is best conditioned.
pub(crate) fn divide_around_best_point(y: &Realization, q: usize, cfg: &ToleranceConfig) -> Result<Realization> {
    let centre = best_centre(y, q, cfg)?;
    let shifted = if centre == real(0.0) { y.clone() } else { y.recenter(centre, cfg)? };
    let local = left_divide(&shifted, q, cfg)?.minimal(REDUCTION_TOL);
    if centre == real(0.0) {
        return Ok(local);
    }
    Ok(local.recenter(-centre, cfg)?.minimal(REDUCTION_TOL))
}

fn best_centre(y: &Realization, q: usize, cfg: &ToleranceConfig) -> Result<Complex64> {
    let quality = |a: Complex64| -> Option<f64> {
        let v = y.eval(a, cfg).ok()?;
        let u = sub(&v, 0..q, 0..q);
        Some(numerics::min_singular_value(&u) / op_norm(&v).max(1.0))
    };
    if let Some(qz) = quality(real(0.0)) {
        if qz >= 1e-3 {
            return Ok(real(0.0));
        }
    }
    let mut best = (real(0.0), quality(real(0.0)).unwrap_or(0.0));
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
        return Err(Error::Singular("parameter recovery: leading factor"));
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{cx, zeros};
    use crate::pick::{pick_matrix, verify_interpolant};
    use crate::realization::random_schur;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn one(v: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, v)
    }

    fn fix_a() -> InterpolationData {
        InterpolationData::from_points(&[real(0.0)], one(real(1.0)), one(real(0.0))).unwrap()
    }

    fn diag_z1() -> ThetaFunction {
        let r = Realization::new(
            zeros(1, 1),
            ComplexMatrix::from_row_slice(1, 2, &[real(1.0), real(0.0)]),
            ComplexMatrix::from_column_slice(2, 1, &[real(1.0), real(0.0)]),
            diag(&[real(0.0), real(1.0)]),
        )
        .unwrap();
        ThetaFunction { theta: r, signature: Signature::new(1, 1), provenance: Provenance::Explicit { mu: real(1.0) } }
    }

    fn zk(k: usize) -> Realization {
        (0..k).fold(Realization::identity(1), |acc, _| acc.mul(&Realization::shift(1)).unwrap())
    }

    #[test]
    fn explicit_theta_for_single_node_at_origin() {
        let c = cfg();
        let th = build_theta_explicit(&fix_a(), &one(real(1.0)), real(1.0), &c).unwrap();
        for z in [real(0.0), cx(0.3, -0.4), cx(-0.7, 0.1)] {
            let want = diag(&[z, real(1.0)]);
            assert!(op_norm(&(th.eval(z, &c).unwrap() - want)) < 1e-15);
        }
        let (z, w) = (real(0.3), cx(0.0, 0.7));
        let j = th.signature.j();
        let tz = th.eval(z, &c).unwrap();
        let tw = th.eval(w, &c).unwrap();
        let lhs = (&j - &tz * &j * tw.adjoint()) / (real(1.0) - z * w.conj());
        assert!(op_norm(&(lhs - diag(&[real(1.0), real(0.0)]))) < 1e-15);
    }

    #[test]
    fn explicit_theta_preconditions() {
        let c = cfg();
        assert!(matches!(
            build_theta_explicit(&fix_a(), &one(real(0.0)), real(1.0), &c),
            Err(Error::DegeneratePick { .. })
        ));
        assert!(matches!(build_theta_explicit(&fix_a(), &one(real(1.0)), real(0.5), &c), Err(Error::BadMu { .. })));
        let d = InterpolationData::new(one(real(1.0)), one(real(1.0)), one(real(0.5))).unwrap();
        assert!(matches!(build_theta_explicit(&d, &one(real(1.0)), real(1.0), &c), Err(Error::BadMu { .. })));
        assert_ne!(choose_mu(&one(real(1.0))).unwrap(), real(1.0));
        assert_eq!(choose_mu(&one(real(0.5))).unwrap(), real(1.0));
    }

    #[test]
    fn diag_theta_report() {
        let c = cfg();
        let r = verify_theta(&diag_z1(), &fix_a(), &one(real(1.0)), &c).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.value("boundary_j_unitarity") <= 1e-12);
        let t0 = diag_z1().eval(real(0.0), &c).unwrap();
        let j = Signature::new(1, 1).j();
        assert!(op_norm(&(&j - &t0 * &j * t0.adjoint() - diag(&[real(1.0), real(0.0)]))) < 1e-15);
    }

    #[test]
    fn lft_examples() {
        let c = cfg();
        let th = diag_z1();
        let zero = lft(&th, &Realization::scalar(real(0.0)), &c).unwrap();
        assert!(op_norm(&zero.eval(cx(0.4, 0.4), &c).unwrap()) < 1e-15);
        let s = lft(&th, &Realization::scalar(real(1.0)), &c).unwrap();
        assert!((s.eval(cx(0.4, 0.2), &c).unwrap()[(0, 0)] - cx(0.4, 0.2)).norm() < 1e-15);
        let e = random_schur(2, 1, 1, 3);
        let s = lft(&th, &e, &c).unwrap();
        assert!(s.eval(real(0.0), &c).unwrap()[(0, 0)].norm() < 1e-15);
        assert!(matches!(lft(&th, &Realization::scalar(real(2.0)), &c), Err(Error::NotSchur { .. })));
    }

    #[test]
    fn recover_param_examples() {
        let c = cfg();
        let th = diag_z1();
        let e = recover_param(&th, &Realization::shift(1), &c).unwrap();
        for z in [cx(0.1, 0.3), cx(-0.6, 0.0)] {
            assert!((e.eval(z, &c).unwrap()[(0, 0)] - real(1.0)).norm() < 1e-10);
        }
        let e = recover_param(&th, &zk(2), &c).unwrap();
        for z in [cx(0.1, 0.3), cx(-0.6, 0.0)] {
            assert!((e.eval(z, &c).unwrap()[(0, 0)] - z).norm() < 1e-10);
        }
    }

    fn random_data(seed: u64, k: usize, q: usize, p: usize) -> InterpolationData {
        let c = cfg();
        let s = random_schur(3, q, p, seed);
        let mut g = sampling::rng(seed + 17);
        let pts: Vec<Complex64> = (0..k).map(|_| sampling::random_disk_point(&mut g, 0.8)).collect();
        let e = sampling::random_matrix(&mut g, q, k);
        InterpolationData::sampled(&s, &pts, e, &c).unwrap()
    }

    #[test]
    fn both_constructions_generate_solutions() {
        let c = cfg();
        for seed in 0..6u64 {
            let (q, p) = if seed % 2 == 0 { (1, 1) } else { (2, 2) };
            let data = random_data(seed, 2 + (seed as usize % 2), q, p);
            let pm = pick_matrix(&data, &c).unwrap();
            let ex = build_theta_explicit(&data, &pm, choose_mu(&data.t).unwrap(), &c).unwrap();
            let (comp, kr) = krein_complete(&data, &pm, &c).unwrap();
            assert_eq!(comp.inertia, (q, p));
            assert!(comp.residual_forward <= 1e-10 && comp.residual_adjoint <= 1e-10);
            for th in [&ex, &kr] {
                let rep = verify_theta(th, &data, &pm, &c).unwrap();
                assert!(rep.passed(), "seed {seed}: {rep:?}");
                for k in 0..3 {
                    let e = random_schur(2, q, p, 1000 * seed + k);
                    let s = lft(th, &e, &c).unwrap();
                    let v = verify_interpolant(&data, &s, &c).unwrap();
                    assert!(v.passed(), "seed {seed}: {v:?}");
                    let back = recover_param(th, &s, &c).unwrap();
                    assert!(certify_schur(&back, &c).passed);
                }
            }
            // Θ_explicit^-1 Θ_krein is a constant J-unitary matrix.
            let j = ex.signature.j();
            let q0 = ex.eval(real(0.0), &c).unwrap().try_inverse().unwrap() * kr.eval(real(0.0), &c).unwrap();
            assert!(op_norm(&(q0.adjoint() * &j * &q0 - &j)) < 1e-8);
            for z in sampling::point_tuples(seed, 1, 10, 0.9).remove(0) {
                let qz = ex.eval(z, &c).unwrap().try_inverse().unwrap() * kr.eval(z, &c).unwrap();
                assert!(op_norm(&(qz - &q0)) < 1e-8);
            }
        }
    }
}
