//! Boundary interpolation at a point `t0` of the unit circle.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hs::HSProblemData;
use crate::numerics::{
    self, checked_inverse, eigh, hermitian_part, hstack, identity, op_norm, real, zeros, ComplexMatrix, ComplexVector,
    ToleranceConfig,
};
use crate::pick::InterpolationData;
use crate::realization::{Realization, REDUCTION_TOL};

/// First radial step `1 - r` of the extrapolation ladder.
const LADDER_START: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct BoundaryJet {
    pub t0: Complex64,
    /// Largest `n` with `S_{2n+1}` available.
    pub order: usize,
    /// `S_j = S^(j)(t0) / j!`.
    pub derivatives: Vec<ComplexMatrix>,
    /// `liminf (1 - |S(z)|²) / (1 - |z|²)`, largest eigenvalue in the matrix case.
    pub cj_value: f64,
    pub exact: bool,
    pub error_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct BoundaryPick {
    pub p: ComplexMatrix,
    pub hankel: ComplexMatrix,
    pub psi: ComplexMatrix,
    pub toeplitz: ComplexMatrix,
    pub asymmetry: f64,
}

/// `A(z) = sum_j A_j (z - t0)^j` with `g x m` coefficients.
#[derive(Debug, Clone)]
pub struct Weight {
    pub coeffs: Vec<ComplexMatrix>,
}

impl Weight {
    pub fn identity(m: usize, n: usize) -> Self {
        let mut coeffs = vec![zeros(m, m); n + 1];
        coeffs[0] = numerics::identity(m);
        Weight { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn out_dim(&self) -> usize {
        self.coeffs.first().map_or(0, |a| a.nrows())
    }

    /// Coefficient `a` of `A` expanded around `z0`.
    fn taylor_at(&self, a: usize, delta: Complex64) -> ComplexMatrix {
        let (g, m) = self.coeffs[0].shape();
        let mut acc = zeros(g, m);
        for (j, c) in self.coeffs.iter().enumerate().skip(a) {
            acc += c * (real(binom(j, a)) * delta.powu((j - a) as u32));
        }
        acc
    }

    fn coeff(&self, a: usize) -> ComplexMatrix {
        self.coeffs.get(a).cloned().unwrap_or_else(|| zeros(self.coeffs[0].nrows(), self.coeffs[0].ncols()))
    }
}

#[derive(Debug, Clone)]
pub struct CjCheck {
    pub holds: bool,
    /// Extrapolated structured kernel matrix; `None` when the quotient diverges.
    pub limit: Option<ComplexMatrix>,
    /// `b_j = (AS)^(j)(t0) / j!`, `j = 0..=n`.
    pub b_jets: Vec<ComplexMatrix>,
    /// Successive differences along the radial ladder.
    pub trend: Vec<f64>,
    pub error_estimate: f64,
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |f, k| f * k as f64)
}

fn check_unimodular(t0: Complex64) -> Result<()> {
    if !t0.is_finite() || (t0.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::BoundaryData("t0 must lie on the unit circle"));
    }
    Ok(())
}

fn radii(levels: usize) -> Vec<f64> {
    (0..levels).map(|k| 1.0 - LADDER_START * 0.5f64.powi(k as i32)).collect()
}

/// Richardson table on a ladder with step ratio 1/2; returns the diagonal
/// entry with the smallest successive change.
fn richardson(samples: &[ComplexMatrix]) -> (ComplexMatrix, f64) {
    let mut col = samples.to_vec();
    let mut best = col.last().cloned().unwrap_or_else(|| zeros(0, 0));
    let mut err = f64::INFINITY;
    let mut l = 1;
    while col.len() > 1 {
        let f = 2f64.powi(l);
        let next: Vec<ComplexMatrix> =
            (1..col.len()).map(|k| (&col[k] * real(f) - &col[k - 1]) / real(f - 1.0)).collect();
        let change = op_norm(&(&next[next.len() - 1] - &col[col.len() - 1]));
        if change < err {
            err = change;
            best = next[next.len() - 1].clone();
        }
        col = next;
        l += 1;
    }
    (best, err)
}

fn differences(samples: &[ComplexMatrix]) -> Vec<f64> {
    samples.windows(2).map(|w| op_norm(&(&w[1] - &w[0]))).collect()
}

/// Whether the ladder differences shrink geometrically.
fn converges(trend: &[f64], scale: f64) -> bool {
    match trend {
        [.., prev, last] => *last <= 0.75 * prev || *last <= 1e-12 * scale.max(1.0),
        _ => false,
    }
}

/// `S^(j)(t0)/j!`, `j = 0..=m`, from radial samples at `r t0`.
pub fn radial_jet(
    s: &Realization,
    t0: Complex64,
    m: usize,
    cfg: &ToleranceConfig,
) -> Result<(Vec<ComplexMatrix>, f64)> {
    check_unimodular(t0)?;
    let rs = radii(8);
    let mut out = Vec::with_capacity(m + 1);
    let mut err: f64 = 0.0;
    for j in 0..=m {
        let samples: Vec<ComplexMatrix> =
            rs.iter().map(|&r| Ok(s.evaluate(t0 * r, j, cfg)? / real(factorial(j)))).collect::<Result<_>>()?;
        let trend = differences(&samples);
        let scale = op_norm(&samples[samples.len() - 1]);
        if !converges(&trend, scale) {
            return Err(Error::CjFails { t0 });
        }
        let (v, e) = richardson(&samples);
        err = err.max(e / scale.max(1.0));
        out.push(v);
    }
    Ok((out, err))
}

fn exact_jet(s: &Realization, t0: Complex64, m: usize, cfg: &ToleranceConfig) -> Result<Vec<ComplexMatrix>> {
    let attempt = |r: &Realization| -> Result<Vec<ComplexMatrix>> {
        (0..=m).map(|j| Ok(r.evaluate(t0, j, cfg)? / real(factorial(j)))).collect()
    };
    attempt(s).or_else(|_| attempt(&s.minimal(REDUCTION_TOL)))
}

/// Boundary derivatives `S_0..S_m` at `t0`: exact when `I - t0 A` is
/// invertible (possibly after reduction), radially extrapolated otherwise.
pub fn boundary_jet(s: &Realization, t0: Complex64, m: usize, cfg: &ToleranceConfig) -> Result<BoundaryJet> {
    check_unimodular(t0)?;
    let order = m.saturating_sub(1) / 2;
    if let Ok(derivatives) = exact_jet(s, t0, m.max(1), cfg) {
        let cj_value = exact_cj_value(t0, &derivatives, cfg);
        let mut derivatives = derivatives;
        derivatives.truncate(m + 1);
        return Ok(BoundaryJet { t0, order, derivatives, cj_value, exact: true, error_estimate: 0.0 });
    }
    let (mut derivatives, error_estimate) = radial_jet(s, t0, m.max(1), cfg)?;
    let cj = cj_check(s, t0, 0, None, cfg)?;
    let cj_value = match &cj.limit {
        Some(l) if cj.holds => max_eig(l)?,
        _ => f64::INFINITY,
    };
    derivatives.truncate(m + 1);
    Ok(BoundaryJet { t0, order, derivatives, cj_value, exact: false, error_estimate })
}

fn max_eig(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigh(&hermitian_part(m))?.values.last().copied().unwrap_or(0.0))
}

/// `t0 S_1 S_0*` when `S_0` is a coisometry, infinity otherwise.
fn exact_cj_value(t0: Complex64, d: &[ComplexMatrix], cfg: &ToleranceConfig) -> f64 {
    let s0 = &d[0];
    let defect = op_norm(&(identity(s0.nrows()) - s0 * s0.adjoint()));
    if defect > cfg.residual_tol {
        return f64::INFINITY;
    }
    max_eig(&(&d[1] * s0.adjoint() * t0)).unwrap_or(f64::INFINITY)
}

/// Convolution `b_j = sum_k A_k S_{j-k}`.
fn weighted_jets(weight: &Weight, s_jets: &[ComplexMatrix], count: usize) -> Vec<ComplexMatrix> {
    (0..count)
        .map(|j| {
            let mut acc = zeros(weight.out_dim(), s_jets[0].ncols());
            for k in 0..=j.min(weight.order()) {
                acc += &weight.coeffs[k] * &s_jets[j - k];
            }
            acc
        })
        .collect()
}

/// `[k_ab]`, the normalized mixed derivatives `∂^a ∂̄^b / (a! b!)` of
/// `A(z)(I - S(z)S(w)*)A(w)* / (1 - z w̄)` at `z = w = z0` inside the disk.
fn interior_kernel(
    s: &Realization,
    weight: &Weight,
    z0: Complex64,
    n: usize,
    cfg: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    let t0 = z0 / z0.norm();
    let delta = z0 - t0;
    let a: Vec<ComplexMatrix> = (0..=n).map(|j| weight.taylor_at(j, delta)).collect();
    let sj: Vec<ComplexMatrix> =
        (0..=n).map(|j| Ok(s.evaluate(z0, j, cfg)? / real(factorial(j)))).collect::<Result<_>>()?;
    let mut b = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut acc = zeros(weight.out_dim(), s.in_dim());
        for k in 0..=j {
            acc += &a[k] * &sj[j - k];
        }
        b.push(acc);
    }
    let g = weight.out_dim();
    let denom = 1.0 - z0.norm_sqr();
    let mut k = vec![vec![zeros(g, g); n + 1]; n + 1];
    for i in 0..=n {
        for j in 0..=n {
            let mut v = &a[i] * a[j].adjoint() - &b[i] * b[j].adjoint();
            if i > 0 {
                v += &k[i - 1][j] * z0.conj();
            }
            if j > 0 {
                v += &k[i][j - 1] * z0;
            }
            if i > 0 && j > 0 {
                v += &k[i - 1][j - 1];
            }
            k[i][j] = v / real(denom);
        }
    }
    Ok(assemble(&k, g, n))
}

fn assemble(k: &[Vec<ComplexMatrix>], g: usize, n: usize) -> ComplexMatrix {
    let mut out = zeros(g * (n + 1), g * (n + 1));
    for (i, row) in k.iter().enumerate().take(n + 1) {
        for (j, blk) in row.iter().enumerate().take(n + 1) {
            out.view_mut((i * g, j * g), (g, g)).copy_from(blk);
        }
    }
    out
}

/// Generalized Carathéodory-Julia test: extrapolates the weighted kernel
/// derivatives along the radius to `t0` and reports whether they stay bounded.
pub fn cj_check(
    s: &Realization,
    t0: Complex64,
    n: usize,
    weight: Option<&Weight>,
    cfg: &ToleranceConfig,
) -> Result<CjCheck> {
    check_unimodular(t0)?;
    let weight = resolve_weight(s, n, weight)?;
    let levels = 9usize.saturating_sub(n).max(5);
    let samples: Vec<ComplexMatrix> =
        radii(levels).iter().map(|&r| interior_kernel(s, &weight, t0 * r, n, cfg)).collect::<Result<_>>()?;
    let trend = differences(&samples);
    let holds = converges(&trend, op_norm(&samples[samples.len() - 1]));
    let s_jets = exact_jet(s, t0, n, cfg).or_else(|_| radial_jet(s, t0, n, cfg).map(|(j, _)| j));
    let b_jets = match (&s_jets, holds) {
        (Ok(j), true) => weighted_jets(&weight, j, n + 1),
        _ => Vec::new(),
    };
    let (limit, error_estimate) = if holds {
        let (l, e) = richardson(&samples);
        (Some(l), e)
    } else {
        (None, f64::INFINITY)
    };
    Ok(CjCheck { holds: holds && s_jets.is_ok(), limit, b_jets, trend, error_estimate })
}

fn resolve_weight(s: &Realization, n: usize, weight: Option<&Weight>) -> Result<Weight> {
    match weight {
        None => Ok(Weight::identity(s.out_dim(), n)),
        Some(w) => {
            if w.coeffs.is_empty() || w.coeffs.iter().any(|c| c.shape() != w.coeffs[0].shape()) {
                return Err(Error::InvalidInput("weight coefficients must share one shape".into()));
            }
            if w.coeffs[0].ncols() != s.out_dim() {
                return Err(Error::dim(
                    "weight",
                    format!("coefficients have {} columns, S has {} outputs", w.coeffs[0].ncols(), s.out_dim()),
                ));
            }
            if w.order() > n {
                return Err(Error::InvalidInput(format!("weight has degree {} above n = {n}", w.order())));
            }
            Ok(w.clone())
        }
    }
}

/// `Ψ_jl = (-1)^l binom(l, j) t0^(l+j+1)` for `j <= l`.
pub fn psi_matrix(t0: Complex64, n: usize) -> ComplexMatrix {
    let mut psi = zeros(n + 1, n + 1);
    for l in 0..=n {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        for j in 0..=l {
            psi[(j, l)] = t0.powu((l + j + 1) as u32) * (sign * binom(l, j));
        }
    }
    psi
}

/// `Hankel(S_1..S_{2n+1}) (Ψ ⊗ I) UpperToeplitz(S_0*..S_n*)`.
pub fn boundary_pick(jet: &BoundaryJet, n: usize) -> Result<BoundaryPick> {
    let d = &jet.derivatives;
    if d.len() < 2 * n + 2 {
        return Err(Error::MissingDerivatives { available: d.len().saturating_sub(1), needed: 2 * n + 1 });
    }
    let (m, p) = d[0].shape();
    let mut hankel = zeros((n + 1) * m, (n + 1) * p);
    let mut toeplitz = zeros((n + 1) * p, (n + 1) * m);
    for i in 0..=n {
        for j in 0..=n {
            hankel.view_mut((i * m, j * p), (m, p)).copy_from(&d[i + j + 1]);
            if j >= i {
                toeplitz.view_mut((i * p, j * m), (p, m)).copy_from(&d[j - i].adjoint());
            }
        }
    }
    let psi = psi_matrix(jet.t0, n);
    let raw = &hankel * psi.kronecker(&identity(p)) * &toeplitz;
    let asymmetry = op_norm(&(&raw - raw.adjoint()));
    Ok(BoundaryPick { p: hermitian_part(&raw), hankel, psi, toeplitz, asymmetry })
}

/// Full structured boundary Gram `[k_ab]` for a weight, from the jets of
/// `S` at `t0` up to order `2n+1`.
pub fn structured_pick(weight: &Weight, s_jets: &[ComplexMatrix], t0: Complex64, n: usize) -> Result<ComplexMatrix> {
    if s_jets.len() < 2 * n + 2 {
        return Err(Error::MissingDerivatives { available: s_jets.len().saturating_sub(1), needed: 2 * n + 1 });
    }
    let top = 2 * n + 1;
    let b = weighted_jets(weight, s_jets, top + 1);
    let nab = |a: usize, c: usize| weight.coeff(a) * weight.coeff(c).adjoint() - &b[a] * b[c].adjoint();
    let g = weight.out_dim();
    // k[a][c] for a + c <= 2n.
    let mut k = vec![vec![zeros(g, g); n + 1]; top];
    for c in 0..=n {
        for a in 0..top - c {
            let mut v = nab(a + 1, c);
            if c > 0 {
                v += &k[a + 1][c - 1] * t0 + &k[a][c - 1];
            }
            k[a][c] = v * (-t0);
        }
    }
    let rows: Vec<Vec<ComplexMatrix>> = k.into_iter().take(n + 1).collect();
    Ok(assemble(&rows, g, n))
}

/// Jordan data `T = conj(t0) I + shift`, `E = [A_0* .. A_n*]`,
/// `N = [b_0* .. b_n*]`.
pub fn boundary_data(weight: &Weight, b_jets: &[ComplexMatrix], t0: Complex64, n: usize) -> Result<InterpolationData> {
    let g = weight.out_dim();
    let k = g * (n + 1);
    let mut t = identity(k) * t0.conj();
    for i in 0..n * g {
        t[(i, i + g)] = real(1.0);
    }
    let e_blocks: Vec<ComplexMatrix> = (0..=n).map(|j| weight.coeff(j).adjoint()).collect();
    let n_blocks: Vec<ComplexMatrix> = b_jets.iter().take(n + 1).map(|b| b.adjoint()).collect();
    if n_blocks.len() != n + 1 {
        return Err(Error::MissingDerivatives { available: b_jets.len().saturating_sub(1), needed: n });
    }
    InterpolationData::new(
        t,
        hstack(&e_blocks.iter().collect::<Vec<_>>()),
        hstack(&n_blocks.iter().collect::<Vec<_>>()),
    )
}

/// `K_{t0,j}`, the representer of `f -> f^(j)(t0)/j!` in `H(S)`, with the
/// pole at `t0` cancelled.
pub fn boundary_kernels(s: &Realization, jet: &BoundaryJet, j: usize, cfg: &ToleranceConfig) -> Result<Realization> {
    if jet.derivatives.len() <= j {
        return Err(Error::MissingDerivatives { available: jet.derivatives.len().saturating_sub(1), needed: j });
    }
    let m = s.out_dim();
    let weight = Weight::identity(m, j);
    let data = boundary_data(&weight, &jet.derivatives, jet.t0, j)?;
    let fs = data.fs(s, cfg)?;
    let col = fs.select(0..m, j * m..(j + 1) * m).minimal(REDUCTION_TOL);
    ensure_regular(&col, jet.t0, cfg)?;
    Ok(col)
}

fn ensure_regular(f: &Realization, t0: Complex64, cfg: &ToleranceConfig) -> Result<()> {
    let n = f.state_dim();
    if checked_inverse(&(identity(n) - &f.a * t0), 1.0 / cfg.residual_tol).is_none() {
        return Err(Error::NonCancellation { t0 });
    }
    Ok(())
}

/// Reduces boundary interpolation `(Af)^(j)(t0)/j! = f_j` to an `H(S)`
/// problem on Jordan data. Targets are `g`-vectors.
pub fn to_hs_problem(
    s: &Realization,
    t0: Complex64,
    n: usize,
    targets: &[ComplexVector],
    weight: Option<&Weight>,
    cfg: &ToleranceConfig,
) -> Result<HSProblemData> {
    check_unimodular(t0)?;
    let w = resolve_weight(s, n, weight)?;
    if targets.len() != n + 1 || targets.iter().any(|f| f.len() != w.out_dim()) {
        return Err(Error::dim("boundary targets", format!("expected {} vectors of length {}", n + 1, w.out_dim())));
    }
    let cj = cj_check(s, t0, n, Some(&w), cfg)?;
    if !cj.holds {
        return Err(Error::CjFails { t0 });
    }
    let jet = boundary_jet(s, t0, 2 * n + 1, cfg)?;
    let b = weighted_jets(&w, &jet.derivatives, n + 1);
    let data = boundary_data(&w, &b, t0, n)?;
    let p = if weight.is_none() { boundary_pick(&jet, n)?.p } else { structured_pick(&w, &jet.derivatives, t0, n)? };
    let yv: Vec<Complex64> = targets.iter().flat_map(|f| f.iter().map(|v| v.conj())).collect();
    let y = ComplexMatrix::from_row_slice(1, yv.len(), &yv);
    let prob = HSProblemData::new(s.clone(), data, y, p)?;
    let report = crate::hs::check_admissible(&prob, cfg)?;
    if !report.passed() {
        return Err(Error::Numerical(format!("boundary data failed admissibility: {report:?}")));
    }
    Ok(prob)
}

/// `max_j ‖(Af)^(j)(t0)/j! - f_j‖`, from exact boundary derivatives of `f`.
pub fn boundary_residual(
    f: &Realization,
    t0: Complex64,
    targets: &[ComplexVector],
    weight: Option<&Weight>,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let n = targets.len().saturating_sub(1);
    let w = match weight {
        Some(w) => w.clone(),
        None => Weight::identity(f.out_dim(), n),
    };
    let jets = exact_jet(f, t0, n, cfg).map_err(|_| Error::NonCancellation { t0 })?;
    let got = weighted_jets(&w, &jets, n + 1);
    let mut worst: f64 = 0.0;
    for (g, want) in got.iter().zip(targets) {
        let wm = ComplexMatrix::from_column_slice(want.len(), 1, want.as_slice());
        worst = worst.max(op_norm(&(g - wm)));
    }
    Ok(worst)
}

/// Finite Blaschke product `u prod (z - a_k)/(1 - conj(a_k) z)`.
pub fn blaschke(zeros_in: &[Complex64], unimodular: Complex64) -> Result<Realization> {
    let mut acc = Realization::scalar(unimodular);
    for &a in zeros_in {
        if !(a.norm() < 1.0) {
            return Err(Error::InvalidInput(format!("Blaschke zero {a} is not inside the disk")));
        }
        let w = real((1.0 - a.norm_sqr()).sqrt());
        let m = |v: Complex64| ComplexMatrix::from_element(1, 1, v);
        acc = acc.mul(&Realization::new(m(a.conj()), m(w), m(w), m(-a))?)?;
    }
    Ok(acc)
}
