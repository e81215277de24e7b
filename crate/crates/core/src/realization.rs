//! Rational matrix functions `F(z) = D + zC(I - zA)^-1 B`.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    self, block_diag, checked_inverse, hstack, identity, is_finite, op_norm, real, sub, vstack, zeros, ComplexMatrix,
    ToleranceConfig,
};
use crate::sampling;

/// Relative rank threshold used when discarding uncontrollable or
/// unobservable states.
pub const REDUCTION_TOL: f64 = 1e-9;

/// Hard cap on series lengths.
pub const MAX_TERMS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
    pub d: ComplexMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Multiply,
    Invert,
    BackwardShift,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurCertificate {
    pub passed: bool,
    pub sup_singular_value: f64,
    pub worst_point: Complex64,
}

#[derive(Debug, Clone)]
pub struct TaylorSeries {
    pub coeffs: Vec<ComplexMatrix>,
    /// Bound on the sum of the norms of all omitted coefficients.
    pub tail_bound: f64,
}

impl Realization {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix, c: ComplexMatrix, d: ComplexMatrix) -> Result<Self> {
        let n = a.nrows();
        let (q, p) = d.shape();
        let ok = a.ncols() == n && b.shape() == (n, p) && c.shape() == (q, n);
        if !ok {
            return Err(Error::dim(
                "realization",
                format!(
                    "A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                    a.nrows(),
                    a.ncols(),
                    b.nrows(),
                    b.ncols(),
                    c.nrows(),
                    c.ncols(),
                    q,
                    p
                ),
            ));
        }
        if !(is_finite(&a) && is_finite(&b) && is_finite(&c) && is_finite(&d)) {
            return Err(Error::InvalidInput("realization has non-finite entries".into()));
        }
        Ok(Realization { a, b, c, d })
    }

    pub fn constant(d: ComplexMatrix) -> Self {
        let (q, p) = d.shape();
        Realization { a: zeros(0, 0), b: zeros(0, p), c: zeros(q, 0), d }
    }

    pub fn scalar(v: Complex64) -> Self {
        Self::constant(ComplexMatrix::from_element(1, 1, v))
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(identity(n))
    }

    /// `z I_n`.
    pub fn shift(n: usize) -> Self {
        Realization { a: zeros(n, n), b: identity(n), c: identity(n), d: zeros(n, n) }
    }

    /// `(I - zA)^-1`.
    pub fn resolvent_of(a: &ComplexMatrix) -> Self {
        let n = a.nrows();
        Realization { a: a.clone(), b: identity(n), c: a.clone(), d: identity(n) }
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn out_dim(&self) -> usize {
        self.d.nrows()
    }

    pub fn in_dim(&self) -> usize {
        self.d.ncols()
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        numerics::spectral_radius(&self.a)
    }

    /// `(I - zA)^-1`, refusing condition numbers above `1/psd_tol`.
    pub fn resolvent(&self, z: Complex64, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
        let n = self.state_dim();
        checked_inverse(&(identity(n) - &self.a * z), 1.0 / cfg.psd_tol).ok_or(Error::SingularResolvent { z })
    }

    pub fn eval(&self, z: Complex64, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
        self.evaluate(z, 0, cfg)
    }

    /// The `order`-th derivative at `z`.
    pub fn evaluate(&self, z: Complex64, order: usize, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
        if self.state_dim() == 0 {
            return Ok(if order == 0 { self.d.clone() } else { zeros(self.out_dim(), self.in_dim()) });
        }
        let r = self.resolvent(z, cfg)?;
        if order == 0 {
            return Ok(&self.d + &self.c * &r * &self.b * z);
        }
        let mut left = &self.c * &r;
        for _ in 0..order {
            left = &left * &r;
        }
        let mut right = self.b.clone();
        for _ in 1..order {
            right = &self.a * right;
        }
        let fact = (1..=order).fold(1.0, |f, k| f * k as f64);
        Ok(left * right * real(fact))
    }

    pub fn add(&self, other: &Realization) -> Result<Realization> {
        if self.d.shape() != other.d.shape() {
            return Err(Error::dim("add", format!("{:?} vs {:?}", self.d.shape(), other.d.shape())));
        }
        Ok(Realization {
            a: block_diag(&[&self.a, &other.a]),
            b: vstack(&[&self.b, &other.b]),
            c: hstack(&[&self.c, &other.c]),
            d: &self.d + &other.d,
        })
    }

    pub fn sub(&self, other: &Realization) -> Result<Realization> {
        self.add(&other.scale_left(&(-identity(other.out_dim())))?)
    }

    /// `self(z) * other(z)`.
    pub fn mul(&self, other: &Realization) -> Result<Realization> {
        if self.in_dim() != other.out_dim() {
            return Err(Error::dim("multiply", format!("{} columns vs {} rows", self.in_dim(), other.out_dim())));
        }
        let (n1, n2) = (self.state_dim(), other.state_dim());
        let mut a = zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((0, n1), (n1, n2)).copy_from(&(&self.b * &other.c));
        a.view_mut((n1, n1), (n2, n2)).copy_from(&other.a);
        Ok(Realization {
            a,
            b: vstack(&[&(&self.b * &other.d), &other.b]),
            c: hstack(&[&self.c, &(&self.d * &other.c)]),
            d: &self.d * &other.d,
        })
    }

    pub fn inv(&self, cfg: &ToleranceConfig) -> Result<Realization> {
        if self.out_dim() != self.in_dim() {
            return Err(Error::dim("invert", format!("D is {}x{}", self.out_dim(), self.in_dim())));
        }
        let di = numerics::inverse(&self.d, "invert: D", cfg)?;
        Ok(Realization { a: &self.a - &self.b * &di * &self.c, b: &self.b * &di, c: -(&di * &self.c), d: di })
    }

    /// `(F(z) - F(0)) / z`.
    pub fn backward_shift(&self) -> Realization {
        Realization { a: self.a.clone(), b: self.b.clone(), c: &self.c * &self.a, d: &self.c * &self.b }
    }

    /// `M * F(z)`.
    pub fn scale_left(&self, m: &ComplexMatrix) -> Result<Realization> {
        self.check_cols(m.ncols() == self.out_dim(), "scale_left")?;
        Ok(Realization { a: self.a.clone(), b: self.b.clone(), c: m * &self.c, d: m * &self.d })
    }

    /// `F(z) * M`.
    pub fn scale_right(&self, m: &ComplexMatrix) -> Result<Realization> {
        self.check_cols(m.nrows() == self.in_dim(), "scale_right")?;
        Ok(Realization { a: self.a.clone(), b: &self.b * m, c: self.c.clone(), d: &self.d * m })
    }

    fn check_cols(&self, ok: bool, context: &'static str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::dim(context, format!("function is {}x{}", self.out_dim(), self.in_dim())))
        }
    }

    /// `[F1; F2; ...]` with a shared input.
    pub fn stack_rows(fs: &[&Realization]) -> Result<Realization> {
        let p = fs.first().map(|f| f.in_dim()).unwrap_or(0);
        if fs.iter().any(|f| f.in_dim() != p) {
            return Err(Error::dim("stack_rows", "inputs differ".into()));
        }
        let a: Vec<&ComplexMatrix> = fs.iter().map(|f| &f.a).collect();
        let b: Vec<&ComplexMatrix> = fs.iter().map(|f| &f.b).collect();
        let c: Vec<&ComplexMatrix> = fs.iter().map(|f| &f.c).collect();
        let d: Vec<&ComplexMatrix> = fs.iter().map(|f| &f.d).collect();
        Ok(Realization { a: block_diag(&a), b: vstack(&b), c: block_diag(&c), d: vstack(&d) })
    }

    /// `[F1, F2, ...]` with a shared output.
    pub fn stack_cols(fs: &[&Realization]) -> Result<Realization> {
        let q = fs.first().map(|f| f.out_dim()).unwrap_or(0);
        if fs.iter().any(|f| f.out_dim() != q) {
            return Err(Error::dim("stack_cols", "outputs differ".into()));
        }
        let a: Vec<&ComplexMatrix> = fs.iter().map(|f| &f.a).collect();
        let b: Vec<&ComplexMatrix> = fs.iter().map(|f| &f.b).collect();
        let c: Vec<&ComplexMatrix> = fs.iter().map(|f| &f.c).collect();
        let d: Vec<&ComplexMatrix> = fs.iter().map(|f| &f.d).collect();
        Ok(Realization { a: block_diag(&a), b: block_diag(&b), c: hstack(&c), d: hstack(&d) })
    }

    /// The sub-block of rows `rows` and columns `cols`; the state is kept.
    pub fn select(&self, rows: Range<usize>, cols: Range<usize>) -> Realization {
        let n = self.state_dim();
        Realization {
            a: self.a.clone(),
            b: sub(&self.b, 0..n, cols.clone()),
            c: sub(&self.c, rows.clone(), 0..n),
            d: sub(&self.d, rows, cols),
        }
    }

    /// Realization of `w -> F(a + w)`.
    pub fn recenter(&self, a: Complex64, cfg: &ToleranceConfig) -> Result<Realization> {
        let r = self.resolvent(a, cfg)?;
        Ok(Realization { a: &r * &self.a, b: &r * &self.b, c: &self.c * &r, d: self.eval(a, cfg)? })
    }

    /// Drops uncontrollable and then unobservable states (orthogonal Krylov
    /// projections with rank threshold `tol`).
    pub fn minimal(&self, tol: f64) -> Realization {
        let cut = tol * op_norm(&self.a).max(op_norm(&self.b)).max(op_norm(&self.c));
        let vc = krylov_basis(&self.a, &self.b, cut);
        let ctrl = if vc.ncols() == self.state_dim() {
            self.clone()
        } else {
            Realization {
                a: vc.adjoint() * &self.a * &vc,
                b: vc.adjoint() * &self.b,
                c: &self.c * &vc,
                d: self.d.clone(),
            }
        };
        let vo = krylov_basis(&ctrl.a.adjoint(), &ctrl.c.adjoint(), cut);
        if vo.ncols() == ctrl.state_dim() {
            return ctrl;
        }
        Realization { a: vo.adjoint() * &ctrl.a * &vo, b: vo.adjoint() * &ctrl.b, c: &ctrl.c * &vo, d: ctrl.d }
    }

    pub fn taylor_coeffs(&self, count: usize) -> Result<TaylorSeries> {
        taylor_coeffs(self, count)
    }

    /// Largest deviation `‖F(z) - G(z)‖` over `points`.
    pub fn max_deviation(&self, other: &Realization, points: &[Complex64], cfg: &ToleranceConfig) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &z in points {
            worst = worst.max(op_norm(&(self.eval(z, cfg)? - other.eval(z, cfg)?)));
        }
        Ok(worst)
    }
}

fn krylov_basis(a: &ComplexMatrix, b: &ComplexMatrix, cut: f64) -> ComplexMatrix {
    let n = a.nrows();
    let mut basis = zeros(n, 0);
    if n == 0 || cut == 0.0 {
        return basis;
    }
    let mut block = directions_above(b, cut);
    while block.ncols() > 0 {
        basis = hstack(&[&basis, &block]);
        if basis.ncols() >= n {
            break;
        }
        let mut w = a * &block;
        for _ in 0..2 {
            w -= &basis * (basis.adjoint() * &w);
        }
        block = directions_above(&w, cut);
    }
    basis
}

fn directions_above(m: &ComplexMatrix, cut: f64) -> ComplexMatrix {
    let svd = numerics::thin_svd(m, 0.0);
    let k = svd.s.iter().take_while(|&&s| s > cut).count();
    sub(&svd.u, 0..m.nrows(), 0..k)
}

pub fn combine(
    op: CombineOp,
    r1: &Realization,
    r2: Option<&Realization>,
    cfg: &ToleranceConfig,
) -> Result<Realization> {
    let second = || r2.ok_or_else(|| Error::InvalidInput("operation needs a second realization".into()));
    match op {
        CombineOp::Add => r1.add(second()?),
        CombineOp::Multiply => r1.mul(second()?),
        CombineOp::Invert => r1.inv(cfg),
        CombineOp::BackwardShift => Ok(r1.backward_shift()),
    }
}

/// Given `Y = [U, W]` with `U` square of size `q`, realizes `-U^-1 W`.
pub fn left_divide(y: &Realization, q: usize, cfg: &ToleranceConfig) -> Result<Realization> {
    let (rows, cols) = (y.out_dim(), y.in_dim());
    if rows != q || cols < q {
        return Err(Error::dim("left_divide", format!("{rows}x{cols} split at {q}")));
    }
    let n = y.state_dim();
    let du = sub(&y.d, 0..q, 0..q);
    let dw = sub(&y.d, 0..q, q..cols);
    let bu = sub(&y.b, 0..n, 0..q);
    let bw = sub(&y.b, 0..n, q..cols);
    let di = numerics::inverse(&du, "left_divide: leading value", cfg)?;
    Ok(Realization { a: &y.a - &bu * &di * &y.c, b: &bw - &bu * &di * &dw, c: -(&di * &y.c), d: -(&di * &dw) })
}

/// Given `X = [Num; Den]` with `Den` square of size `p`, realizes `Num Den^-1`.
pub fn right_divide(x: &Realization, p: usize, cfg: &ToleranceConfig) -> Result<Realization> {
    let (rows, cols) = (x.out_dim(), x.in_dim());
    if cols != p || rows < p {
        return Err(Error::dim("right_divide", format!("{rows}x{cols} split at {p}")));
    }
    let n = x.state_dim();
    let top = rows - p;
    let cn = sub(&x.c, 0..top, 0..n);
    let cd = sub(&x.c, top..rows, 0..n);
    let dn = sub(&x.d, 0..top, 0..p);
    let dd = sub(&x.d, top..rows, 0..p);
    let di = numerics::inverse(&dd, "right_divide: denominator value", cfg)?;
    Ok(Realization { a: &x.a - &x.b * &di * &cd, b: &x.b * &di, c: &cn - &dn * &di * &cd, d: &dn * &di })
}

/// Sampled contractivity check on the disk; a necessary condition only.
pub fn certify_schur(r: &Realization, cfg: &ToleranceConfig) -> SchurCertificate {
    let mut points = sampling::interior_grid(cfg.grid_interior_points);
    points.extend(sampling::circle_points(cfg.grid_boundary_points, 1.0 - 1e-6));
    let mut sup: f64 = 0.0;
    let mut worst = Complex64::new(0.0, 0.0);
    for z in points {
        let s = match r.eval(z, cfg) {
            Ok(v) => op_norm(&v),
            Err(_) => f64::INFINITY,
        };
        if !(s <= sup) {
            sup = s;
            worst = z;
            if s.is_nan() {
                sup = f64::INFINITY;
            }
        }
    }
    SchurCertificate { passed: sup <= 1.0 + cfg.residual_tol, sup_singular_value: sup, worst_point: worst }
}

/// Geometric envelope `‖A^j‖ <= m0 * gamma^floor(j / period)`.
#[derive(Debug, Clone, Copy)]
pub struct PowerBound {
    pub period: usize,
    pub gamma: f64,
    pub m0: f64,
}

impl PowerBound {
    pub fn of(a: &ComplexMatrix) -> Result<PowerBound> {
        let n = a.nrows();
        if n == 0 {
            return Ok(PowerBound { period: 1, gamma: 0.0, m0: 1.0 });
        }
        let rho = numerics::spectral_radius(a)?;
        if rho >= 1.0 {
            return Err(Error::NotStable { rho });
        }
        let mut m0: f64 = 1.0;
        let mut power = a.clone();
        for period in 1..=MAX_TERMS {
            let g = op_norm(&power);
            if g <= 0.5 {
                return Ok(PowerBound { period, gamma: g, m0 });
            }
            m0 = m0.max(g);
            power = &power * a;
        }
        Err(Error::TruncationCap { cap: MAX_TERMS })
    }

    /// Bound on `sum_{j >= j0} ‖A^j‖`.
    pub fn tail(&self, j0: usize) -> f64 {
        if self.gamma == 0.0 {
            return if j0 < self.period { self.m0 * (self.period - j0) as f64 } else { 0.0 };
        }
        self.m0 * self.period as f64 * self.gamma.powi((j0 / self.period) as i32) / (1.0 - self.gamma)
    }

    /// Smallest `j0` with `scale * tail(j0) <= tol`.
    pub fn terms_for(&self, scale: f64, tol: f64) -> Result<usize> {
        let mut j0 = 0;
        while scale * self.tail(j0) > tol {
            j0 += self.period;
            if j0 > MAX_TERMS {
                return Err(Error::TruncationCap { cap: MAX_TERMS });
            }
        }
        Ok(j0)
    }
}

pub fn taylor_coeffs(r: &Realization, count: usize) -> Result<TaylorSeries> {
    let bound = PowerBound::of(&r.a)?;
    let mut coeffs = Vec::with_capacity(count);
    if count > 0 {
        coeffs.push(r.d.clone());
    }
    let mut ca = r.c.clone();
    for _ in 1..count {
        coeffs.push(&ca * &r.b);
        ca = &ca * &r.a;
    }
    let cb = op_norm(&r.c) * op_norm(&r.b);
    let tail_bound = if count == 0 { op_norm(&r.d) + cb * bound.tail(0) } else { cb * bound.tail(count - 1) };
    Ok(TaylorSeries { coeffs, tail_bound })
}

/// `sum_k g_k^* f_k` over the Taylor coefficients, truncated so the omitted
/// part is at most `truncation_tol`.
pub fn h2_gram(f: &Realization, g: &Realization, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    if f.out_dim() != g.out_dim() {
        return Err(Error::dim("h2_inner", format!("outputs {} vs {}", f.out_dim(), g.out_dim())));
    }
    let bf = PowerBound::of(&f.a)?;
    let bg = PowerBound::of(&g.a)?;
    let sf = op_norm(&f.c) * op_norm(&f.b);
    let sg = op_norm(&g.c) * op_norm(&g.b);
    // The omitted sum is bounded by (l1 tail of f) * (l1 tail of g).
    let mut k = 1;
    while sf * bf.tail(k - 1) * sg * bg.tail(k - 1) > cfg.truncation_tol {
        k += 1;
        if k > MAX_TERMS {
            return Err(Error::TruncationCap { cap: MAX_TERMS });
        }
    }
    let mut acc = g.d.adjoint() * &f.d;
    let mut cf = f.c.clone();
    let mut cg = g.c.clone();
    for _ in 1..k {
        acc += (&cg * &g.b).adjoint() * (&cf * &f.b);
        cf = &cf * &f.a;
        cg = &cg * &g.a;
    }
    Ok(acc)
}

/// `<f, g>` in `H^2` for column-vector valued `f`, `g`.
pub fn h2_inner(f: &Realization, g: &Realization, cfg: &ToleranceConfig) -> Result<Complex64> {
    if f.in_dim() != 1 || g.in_dim() != 1 {
        return Err(Error::dim("h2_inner", "expects vector-valued functions".into()));
    }
    Ok(h2_gram(f, g, cfg)?[(0, 0)])
}

/// Transfer function of a random colligation scaled to norm `1 - 1e-3`.
pub fn random_schur(state_dim: usize, out_dim: usize, in_dim: usize, seed: u64) -> Realization {
    let mut g = sampling::rng(seed);
    random_schur_with(&mut g, state_dim, out_dim, in_dim)
}

pub fn random_schur_with(g: &mut sampling::SampleRng, n: usize, q: usize, p: usize) -> Realization {
    let mut m = sampling::random_matrix(g, n + q, n + p);
    let norm = op_norm(&m);
    if norm > 0.0 {
        m *= real((1.0 - 1e-3) / norm);
    }
    Realization {
        a: sub(&m, 0..n, 0..n),
        b: sub(&m, 0..n, n..n + p),
        c: sub(&m, n..n + q, 0..n),
        d: sub(&m, n..n + q, n..n + p),
    }
}
