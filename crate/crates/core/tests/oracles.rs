//! Hand-derived values for the desk fixtures, checked through the public API.

use pickforge_core::boundary::{boundary_jet, boundary_kernels};
use pickforge_core::numerics::{cx, diag, op_norm, real, zeros};
use pickforge_core::pick::{
    build_pick, check_solvable, membership_certificate, observability_coeffs, verify_interpolant, DeBrangesRovnyak,
    PickStrategy, Szego,
};
use pickforge_core::realization::random_schur;
use pickforge_core::redheffer::{build_colligation, redheffer_apply, sigma};
use pickforge_core::theta::{build_theta_explicit, lft, recover_param};
use pickforge_core::{Complex64, ComplexMatrix, ComplexVector, InterpolationData, Realization, ToleranceConfig};

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn m(rows: usize, vals: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(rows, vals.len() / rows, &vals.iter().map(|&v| real(v)).collect::<Vec<_>>())
}

fn fix_a() -> InterpolationData {
    InterpolationData::from_points(&[real(0.0)], m(1, &[1.0]), m(1, &[0.0])).unwrap()
}

fn fix_b() -> InterpolationData {
    InterpolationData::from_points(&[real(0.0), real(0.5)], m(1, &[1.0, 1.0]), m(1, &[0.0, 0.5])).unwrap()
}

fn poly(coeffs: &[f64]) -> Realization {
    let n = coeffs.len() - 1;
    let mut a = zeros(n, n);
    for i in 1..n {
        a[(i, i - 1)] = real(1.0);
    }
    let mut b = zeros(n, 1);
    b[(0, 0)] = real(1.0);
    Realization::new(a, b, m(1, &coeffs[1..]), m(1, &coeffs[..1])).unwrap()
}

type Closed = fn(Complex64) -> Complex64;

const PROBES: [Complex64; 3] = [Complex64::new(0.3, 0.1), Complex64::new(-0.5, 0.4), Complex64::new(0.0, -0.8)];

#[test]
fn pick_matrices() {
    let c = cfg();
    for strategy in [PickStrategy::Explicit, PickStrategy::Series, PickStrategy::Stein] {
        assert!(op_norm(&(build_pick(&fix_a(), strategy, &c).unwrap().p - m(1, &[1.0]))) < 1e-12);
        let p = build_pick(&fix_b(), strategy, &c).unwrap().p;
        assert!(op_norm(&(p - m(2, &[1.0, 1.0, 1.0, 1.0]))) < 1e-12, "{strategy:?}");
        let d = InterpolationData::from_points(&[real(0.0), real(0.5)], m(1, &[1.0, 1.0]), m(1, &[0.0, 0.0])).unwrap();
        let p = build_pick(&d, strategy, &c).unwrap().p;
        assert!(op_norm(&(p - m(2, &[1.0, 1.0, 1.0, 4.0 / 3.0]))) < 1e-12, "{strategy:?}");
    }
    let b = check_solvable(&m(2, &[1.0, 1.0, 1.0, 1.0]), &c).unwrap();
    assert!(b.is_psd && b.min_eigenvalue.abs() < 1e-15);
    assert!(!check_solvable(&m(2, &[1.0, 2.0, 2.0, 1.0]), &c).unwrap().is_psd);
}

#[test]
fn observability_sequences() {
    let o = observability_coeffs(&m(1, &[1.0]), &m(1, &[0.0]), &ComplexVector::from_element(1, real(1.0)), 4).unwrap();
    let got: Vec<f64> = o.coeffs.iter().map(|v| v[0].re).collect();
    assert_eq!(got, [1.0, 0.0, 0.0, 0.0]);
    let t = diag(&[real(0.0), real(0.5)]);
    let x = ComplexVector::from_column_slice(&[real(0.0), real(1.0)]);
    let o = observability_coeffs(&m(1, &[1.0, 1.0]), &t, &x, 5).unwrap();
    for (k, v) in o.coeffs.iter().enumerate() {
        assert_eq!(v[0], real(0.5f64.powi(k as i32)));
    }
}

#[test]
fn interpolant_verification() {
    let c = cfg();
    let rep = verify_interpolant(&fix_b(), &Realization::shift(1), &c).unwrap();
    assert!(rep.passed() && rep.value("condition_residual") <= 1e-12);
    let through_zero = Realization::shift(1).mul(&random_schur(2, 1, 1, 9)).unwrap();
    assert!(verify_interpolant(&fix_a(), &through_zero, &c).unwrap().passed());
    assert!(!verify_interpolant(&fix_a(), &Realization::scalar(real(0.5)), &c).unwrap().passed());
}

#[test]
fn kernel_membership() {
    let c = cfg();
    let szego = Szego { dim: 1 };
    let unit = Realization::scalar(real(1.0));
    assert!(membership_certificate(&szego, &unit, 1.0, &c).unwrap().is_psd);
    assert!(!membership_certificate(&szego, &unit, 0.5, &c).unwrap().is_psd);
    let s = poly(&[0.0, 0.0, 1.0]);
    let jet = boundary_jet(&s, real(1.0), 1, &c).unwrap();
    let k0 = boundary_kernels(&s, &jet, 0, &c).unwrap();
    let ds = DeBrangesRovnyak { s: &s };
    assert!(membership_certificate(&ds, &k0, 2f64.sqrt(), &c).unwrap().is_psd);
    assert!(!membership_certificate(&ds, &k0, 1.4, &c).unwrap().is_psd);
}

#[test]
fn single_node_generators() {
    let c = cfg();
    let th = build_theta_explicit(&fix_a(), &m(1, &[1.0]), real(1.0), &c).unwrap();
    for z in PROBES {
        assert!(op_norm(&(th.eval(z, &c).unwrap() - diag(&[z, real(1.0)]))) < 1e-14);
    }
    let cases: [(Realization, Closed); 3] = [
        (Realization::scalar(real(0.0)), |_| real(0.0)),
        (Realization::scalar(real(1.0)), |z| z),
        (Realization::shift(1), |z| z * z),
    ];
    let sig = sigma(&build_colligation(&fix_a(), &m(1, &[1.0]), &c).unwrap());
    for (e, want) in &cases {
        let via_theta = lft(&th, e, &c).unwrap();
        let via_sigma = redheffer_apply(&sig, e, &c).unwrap();
        for z in PROBES {
            assert!((via_theta.eval(z, &c).unwrap()[(0, 0)] - want(z)).norm() < 1e-12);
            assert!((via_sigma.eval(z, &c).unwrap()[(0, 0)] - want(z)).norm() < 1e-12);
        }
    }
    let e = recover_param(&th, &poly(&[0.0, 0.0, 1.0]), &c).unwrap();
    for z in PROBES {
        assert!((e.eval(z, &c).unwrap()[(0, 0)] - z).norm() < 1e-10);
    }
    let e = recover_param(&th, &Realization::shift(1), &c).unwrap();
    assert!((e.eval(cx(0.2, 0.2), &c).unwrap()[(0, 0)] - real(1.0)).norm() < 1e-10);
}
