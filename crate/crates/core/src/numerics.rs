//! Dense complex linear algebra shared by every other module.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

const EIGEN_EPS: f64 = 1e-15;

#[inline]
pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    pub psd_tol: f64,
    pub residual_tol: f64,
    pub truncation_tol: f64,
    pub grid_boundary_points: usize,
    pub grid_interior_points: usize,
    /// Number of random point triples used by sampled kernel checks.
    pub kernel_tuples: usize,
    /// Seed for every sampled check, so reports are reproducible.
    pub seed: u64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            psd_tol: 1e-10,
            residual_tol: 1e-8,
            truncation_tol: 1e-12,
            grid_boundary_points: 200,
            grid_interior_points: 200,
            kernel_tuples: 16,
            seed: 0,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let reals =
            [("psd_tol", self.psd_tol), ("residual_tol", self.residual_tol), ("truncation_tol", self.truncation_tol)];
        for (name, v) in reals {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.grid_boundary_points == 0 || self.grid_interior_points == 0 || self.kernel_tuples == 0 {
            return Err(Error::InvalidInput("grid sizes and tuple count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCertificate {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub hermitian_defect: f64,
}

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

pub fn zeros(r: usize, c: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(r, c)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn require_square(m: &ComplexMatrix, context: &'static str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::dim(context, format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m.nrows())
}

pub fn require_shape(m: &ComplexMatrix, rows: usize, cols: usize, context: &'static str) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::dim(context, format!("expected {rows}x{cols}, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

fn require_finite(m: &ComplexMatrix, context: &'static str) -> Result<()> {
    if !is_finite(m) {
        return Err(Error::InvalidInput(format!("non-finite entry in {context}")));
    }
    Ok(())
}

/// Largest singular value; zero for empty matrices.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if !is_finite(m) {
        return f64::INFINITY;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Eigenpairs of `[[0, M], [M*, 0]]`, largest first. The complex SVD in
/// nalgebra occasionally stalls on small non-normal inputs; the Hermitian
/// solver does not.
fn dilation_eigen(m: &ComplexMatrix) -> Option<HermitianEigen> {
    let (r, c) = m.shape();
    let mut h = zeros(r + c, r + c);
    h.view_mut((0, r), (r, c)).copy_from(m);
    h.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    let mut e = eigh(&h).ok()?;
    e.values.reverse();
    let n = r + c;
    e.vectors = ComplexMatrix::from_fn(n, n, |i, j| e.vectors[(i, n - 1 - j)]);
    Some(e)
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    if !is_finite(m) {
        return alloc::vec![f64::INFINITY; m.nrows().min(m.ncols())];
    }
    let k = m.nrows().min(m.ncols());
    match dilation_eigen(m) {
        Some(e) => e.values.iter().take(k).map(|v| v.max(0.0)).collect(),
        None => {
            let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
            s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
            s
        }
    }
}

pub fn min_singular_value(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let k = m.nrows().min(m.ncols());
    let s = singular_values(m);
    if s.len() < k {
        0.0
    } else {
        s[k - 1]
    }
}

pub fn norm1(m: &ComplexMatrix) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * real(0.5)
}

/// Eigendecomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn eigh(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = require_square(m, "eigh")?;
    require_finite(m, "eigh")?;
    if n == 0 {
        return Ok(HermitianEigen { values: Vec::new(), vectors: zeros(0, 0) });
    }
    let e = SymmetricEigen::try_new(hermitian_part(m), EIGEN_EPS, 1000 * n.max(10))
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].partial_cmp(&e.eigenvalues[b]).unwrap_or(Ordering::Equal));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

pub fn psd_certificate(m: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<PsdCertificate> {
    require_square(m, "psd_certificate")?;
    let scale = op_norm(m).max(1.0);
    let defect = op_norm(&(m - m.adjoint()));
    let min_eigenvalue = eigh(m)?.values.first().copied().unwrap_or(0.0);
    let is_psd = min_eigenvalue >= -cfg.psd_tol * scale && defect <= cfg.psd_tol * scale;
    Ok(PsdCertificate { is_psd, min_eigenvalue, hermitian_defect: defect })
}

/// Hermitian square root of a PSD matrix; small negative eigenvalues are clamped.
pub fn sqrt_psd(m: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    let cert = psd_certificate(m, cfg)?;
    if !cert.is_psd {
        return Err(Error::NotPsd { min_eigenvalue: cert.min_eigenvalue });
    }
    let e = eigh(m)?;
    Ok(spectral_apply(&e, |v| v.max(0.0).sqrt()))
}

/// `V f(Λ) V*` for a Hermitian eigendecomposition.
pub fn spectral_apply(e: &HermitianEigen, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let n = e.values.len();
    let mut scaled = e.vectors.clone();
    for (j, &v) in e.values.iter().enumerate() {
        let s = real(f(v));
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    scaled * e.vectors.adjoint()
}

/// Moore-Penrose pseudoinverse, read off the eigenpairs of the Hermitian
/// dilation `[[0, M], [M*, 0]]` whose spectrum is `±σ`.
pub fn pinv(m: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok(zeros(c, r));
    }
    let mut h = zeros(r + c, r + c);
    h.view_mut((0, r), (r, c)).copy_from(m);
    h.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    let e = eigh(&h)?;
    let smax = e.values.iter().fold(0.0, |a: f64, &v| a.max(v.abs()));
    let mut out = zeros(c, r);
    if smax == 0.0 {
        return Ok(out);
    }
    let cut = cfg.psd_tol * smax;
    for (k, &s) in e.values.iter().enumerate() {
        if s <= cut {
            continue;
        }
        let col = e.vectors.column(k);
        let x = col.rows(0, r);
        let y = col.rows(r, c);
        out += (y * x.adjoint()) * real(2.0 / s);
    }
    Ok(out)
}

pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = require_square(m, "eigenvalues")?;
    require_finite(m, "eigenvalues")?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), EIGEN_EPS, 10_000 * n.max(10))
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let vals = schur.eigenvalues().ok_or_else(|| Error::Numerical("Schur form is not triangular".into()))?;
    Ok(vals.iter().copied().collect())
}

pub fn spectral_radius(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().fold(0.0, |a: f64, z| a.max(z.norm())))
}

/// Inverse with a 1-norm condition-number guard.
pub fn checked_inverse(m: &ComplexMatrix, max_cond: f64) -> Option<ComplexMatrix> {
    if m.nrows() != m.ncols() {
        return None;
    }
    if m.is_empty() {
        return Some(zeros(0, 0));
    }
    let inv = m.clone().try_inverse()?;
    let cond = norm1(m) * norm1(&inv);
    if !cond.is_finite() || cond > max_cond {
        return None;
    }
    Some(inv)
}

pub fn inverse(m: &ComplexMatrix, context: &'static str, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    require_square(m, context)?;
    checked_inverse(m, 1.0 / cfg.psd_tol).ok_or(Error::Singular(context))
}

/// Solves `P - T P T* = Q` through the vectorized `n^2 x n^2` system.
pub fn solve_stein(t: &ComplexMatrix, q: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    let n = require_square(t, "solve_stein")?;
    require_shape(q, n, n, "solve_stein")?;
    require_finite(q, "solve_stein")?;
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    let lambda = eigenvalues(t)?;
    let near = cfg.psd_tol.sqrt();
    for a in &lambda {
        for b in &lambda {
            let product = a * b.conj();
            if (real(1.0) - product).norm() <= near {
                return Err(Error::NonUniqueStein { product });
            }
        }
    }
    let nn = n * n;
    let mut k = ComplexMatrix::identity(nn, nn);
    for j in 0..n {
        for i in 0..n {
            let row = i + n * j;
            for l in 0..n {
                let tjl = t[(j, l)].conj();
                for kk in 0..n {
                    k[(row, kk + n * l)] -= t[(i, kk)] * tjl;
                }
            }
        }
    }
    let rhs = ComplexVector::from_iterator(nn, q.iter().copied());
    let sol = k.lu().solve(&rhs).ok_or(Error::NonUniqueStein { product: real(1.0) })?;
    let p = ComplexMatrix::from_iterator(n, n, sol.iter().copied());
    let residual = op_norm(&(&p - t * &p * t.adjoint() - q));
    if !(residual <= cfg.residual_tol * op_norm(q).max(1.0)) {
        return Err(Error::Numerical(format!("Stein solve residual {residual:e}")));
    }
    Ok(p)
}

/// Rotates every column so its largest-modulus entry is real and positive.
pub fn normalize_column_phases(m: &mut ComplexMatrix) {
    for j in 0..m.ncols() {
        let mut best = 0.0;
        let mut phase = real(1.0);
        for i in 0..m.nrows() {
            let a = m[(i, j)].norm();
            if a > best * (1.0 + 1e-9) {
                best = a;
                phase = m[(i, j)] / a;
            }
        }
        if best > 0.0 {
            let rot = phase.conj();
            for i in 0..m.nrows() {
                m[(i, j)] *= rot;
            }
        }
    }
}

/// Thin SVD keeping singular values above `rel_tol * σ_max`.
pub struct ThinSvd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn thin_svd(m: &ComplexMatrix, rel_tol: f64) -> ThinSvd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 || !is_finite(m) {
        return ThinSvd { u: zeros(r, 0), s: Vec::new(), v: zeros(c, 0) };
    }
    let Some(e) = dilation_eigen(m) else {
        return ThinSvd { u: zeros(r, 0), s: Vec::new(), v: zeros(c, 0) };
    };
    let smax = e.values.first().copied().unwrap_or(0.0);
    let k = e.values.iter().take(r.min(c)).take_while(|&&v| smax > 0.0 && v > rel_tol * smax).count();
    let mut uu = ComplexMatrix::from_fn(r, k, |i, j| e.vectors[(i, j)]);
    let mut vv = ComplexMatrix::from_fn(c, k, |i, j| e.vectors[(r + i, j)]);
    for j in 0..k {
        let (nu, nv) = (uu.column(j).norm(), vv.column(j).norm());
        uu.column_mut(j).scale_mut(1.0 / nu);
        vv.column_mut(j).scale_mut(1.0 / nv);
    }
    // Fix the phase freedom on u and carry it over to v.
    for j in 0..k {
        let mut best = 0.0;
        let mut phase = real(1.0);
        for i in 0..r {
            let a = uu[(i, j)].norm();
            if a > best * (1.0 + 1e-9) {
                best = a;
                phase = uu[(i, j)] / a;
            }
        }
        let rot = phase.conj();
        for i in 0..r {
            uu[(i, j)] *= rot;
        }
        for i in 0..c {
            vv[(i, j)] *= rot;
        }
    }
    let s = e.values[..k].to_vec();
    ThinSvd { u: uu, s, v: vv }
}

/// Orthonormal basis of the column space.
pub fn range_basis(m: &ComplexMatrix, rel_tol: f64) -> ComplexMatrix {
    thin_svd(m, rel_tol).u
}

pub fn rank(m: &ComplexMatrix, rel_tol: f64) -> usize {
    thin_svd(m, rel_tol).s.len()
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `q` inside `C^dim`.
pub fn orth_complement(q: &ComplexMatrix, dim: usize) -> Result<ComplexMatrix> {
    if q.nrows() != dim {
        return Err(Error::dim("orth_complement", format!("basis has {} rows, space has dim {dim}", q.nrows())));
    }
    if dim == 0 {
        return Ok(zeros(0, 0));
    }
    let proj = identity(dim) - q * q.adjoint();
    let e = eigh(&proj)?;
    let cols: Vec<usize> = (0..dim).filter(|&i| e.values[i] > 0.5).collect();
    let mut out = ComplexMatrix::from_fn(dim, cols.len(), |i, j| e.vectors[(i, cols[j])]);
    normalize_column_phases(&mut out);
    Ok(out)
}

pub fn hstack(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), rows);
        out.view_mut((0, at), b.shape()).copy_from(*b);
        at += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        debug_assert_eq!(b.ncols(), cols);
        out.view_mut((at, 0), b.shape()).copy_from(*b);
        at += b.nrows();
    }
    out
}

pub fn block_diag(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn diag(values: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_column_slice(values))
}

pub fn sub(m: &ComplexMatrix, rows: core::ops::Range<usize>, cols: core::ops::Range<usize>) -> ComplexMatrix {
    m.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_row_iterator(rows, cols, v.iter().map(|&x| real(x)))
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.shape() == b.shape() && op_norm(&(a - b)) <= tol
    }

    fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
            .prop_map(move |v| ComplexMatrix::from_iterator(rows, cols, v.into_iter().map(|(a, b)| cx(a, b))))
    }

    #[test]
    fn certificate_examples() {
        let cfg = ToleranceConfig::default();
        let c = psd_certificate(&identity(2), &cfg).unwrap();
        assert!(c.is_psd);
        assert!((c.min_eigenvalue - 1.0).abs() < 1e-14);
        let c = psd_certificate(&m(2, 2, &[1.0, 1.0, 1.0, 1.0]), &cfg).unwrap();
        assert!(c.is_psd && c.min_eigenvalue.abs() < 1e-14);
        let c = psd_certificate(&m(2, 2, &[1.0, 2.0, 2.0, 1.0]), &cfg).unwrap();
        assert!(!c.is_psd);
        assert!((c.min_eigenvalue + 1.0).abs() < 1e-14);
        assert!(psd_certificate(&zeros(2, 3), &cfg).is_err());
    }

    #[test]
    fn hermitian_defect_breaks_certificate() {
        let cfg = ToleranceConfig::default();
        let c = psd_certificate(&m(2, 2, &[2.0, 1.0, 0.0, 2.0]), &cfg).unwrap();
        assert!(c.hermitian_defect > 0.9);
        assert!(!c.is_psd);
    }

    #[test]
    fn sqrt_examples() {
        let cfg = ToleranceConfig::default();
        assert!(close(&sqrt_psd(&identity(3), &cfg).unwrap(), &identity(3), 1e-14));
        let r = sqrt_psd(&m(2, 2, &[4.0, 0.0, 0.0, 9.0]), &cfg).unwrap();
        assert!(close(&r, &m(2, 2, &[2.0, 0.0, 0.0, 3.0]), 1e-14));
        assert!(matches!(sqrt_psd(&m(2, 2, &[1.0, 2.0, 2.0, 1.0]), &cfg), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn stein_examples() {
        let cfg = ToleranceConfig::default();
        let p = solve_stein(&m(1, 1, &[0.0]), &m(1, 1, &[3.0]), &cfg).unwrap();
        assert!((p[(0, 0)] - real(3.0)).norm() < 1e-15);
        let p = solve_stein(&m(1, 1, &[0.5]), &m(1, 1, &[0.75]), &cfg).unwrap();
        assert!((p[(0, 0)] - real(1.0)).norm() < 1e-14);
        let err = solve_stein(&m(1, 1, &[1.0]), &m(1, 1, &[1.0]), &cfg).unwrap_err();
        assert!(matches!(err, Error::NonUniqueStein { .. }));
        let t = diag(&[cx(0.0, 1.0), real(0.2)]);
        assert!(matches!(solve_stein(&t, &identity(2), &cfg), Err(Error::NonUniqueStein { .. })));
    }

    #[test]
    fn stein_matches_cauchy_formula() {
        // P - T P T* = Q with T = diag(w) gives P_ij = Q_ij / (1 - w_i conj(w_j)).
        let cfg = ToleranceConfig::default();
        let w = [cx(0.3, -0.2), cx(-0.5, 0.1), cx(0.0, 0.7)];
        let q = ComplexMatrix::from_fn(3, 3, |i, j| cx(1.0 + i as f64, j as f64 - 0.5));
        let p = solve_stein(&diag(&w), &q, &cfg).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = q[(i, j)] / (real(1.0) - w[i] * w[j].conj());
                assert!((p[(i, j)] - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn pinv_examples() {
        let cfg = ToleranceConfig::default();
        let a = m(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let inv = a.clone().try_inverse().unwrap();
        assert!(close(&pinv(&a, &cfg).unwrap(), &inv, 1e-12));
        assert!(close(&pinv(&zeros(2, 3), &cfg).unwrap(), &zeros(3, 2), 0.0));
        let d = m(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(close(&pinv(&d, &cfg).unwrap(), &d, 1e-14));
    }

    #[test]
    fn complement_of_first_axis() {
        let q = m(2, 1, &[1.0, 0.0]);
        let c = orth_complement(&q, 2).unwrap();
        assert!(close(&c, &m(2, 1, &[0.0, 1.0]), 1e-15));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn sqrt_squares_back_and_commutes(g in arb_matrix(4, 4)) {
            let cfg = ToleranceConfig::default();
            let p = &g * g.adjoint();
            let r = sqrt_psd(&p, &cfg).unwrap();
            let scale = op_norm(&p).max(1.0);
            prop_assert!(op_norm(&(&r * &r - &p)) <= 1e-12 * scale);
            prop_assert!(op_norm(&(&r * &p - &p * &r)) <= 1e-12 * scale);
            prop_assert!(op_norm(&(&r - r.adjoint())) <= 1e-13 * scale);
        }

        #[test]
        fn stein_residual_when_stable(t in arb_matrix(4, 4), q in arb_matrix(4, 4)) {
            let cfg = ToleranceConfig::default();
            let rho = spectral_radius(&t).unwrap();
            prop_assume!(rho > 1e-3);
            let t = &t * real(0.9 / rho);
            let p = solve_stein(&t, &q, &cfg).unwrap();
            let res = op_norm(&(&p - &t * &p * t.adjoint() - &q)) / op_norm(&q).max(1.0);
            prop_assert!(res <= 1e-10);
        }

        #[test]
        fn penrose_identities_rank_deficient(a in arb_matrix(5, 2), b in arb_matrix(2, 4)) {
            let cfg = ToleranceConfig::default();
            let mm = &a * &b;
            let x = pinv(&mm, &cfg).unwrap();
            let s = op_norm(&mm).max(1.0);
            let sx = op_norm(&x).max(1.0);
            prop_assert!(op_norm(&(&mm * &x * &mm - &mm)) <= 1e-10 * s * s * sx);
            prop_assert!(op_norm(&(&x * &mm * &x - &x)) <= 1e-10 * sx * sx * s);
            let mx = &mm * &x;
            let xm = &x * &mm;
            prop_assert!(op_norm(&(&mx - mx.adjoint())) <= 1e-10 * s * sx);
            prop_assert!(op_norm(&(&xm - xm.adjoint())) <= 1e-10 * s * sx);
        }

        #[test]
        fn certificate_is_monotone(g in arb_matrix(3, 2)) {
            let cfg = ToleranceConfig::default();
            let p = &g * g.adjoint();
            for eps in [0.0, 1e-6, 1.0] {
                let shifted = &p + identity(3) * real(eps);
                prop_assert!(psd_certificate(&shifted, &cfg).unwrap().is_psd);
            }
        }
    }
}
