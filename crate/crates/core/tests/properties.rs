use pickforge_core::boundary::{blaschke, boundary_jet, boundary_kernels, boundary_pick};
use pickforge_core::hs::{douglas_block, douglas_solve, hs_solvable, solve_min_norm, HSProblemData, KernelCombination};
use pickforge_core::numerics::{op_norm, pinv, psd_certificate, real};
use pickforge_core::pick::{pick_matrix, verify_interpolant};
use pickforge_core::realization::{h2_gram, random_schur};
use pickforge_core::redheffer::{build_colligation, redheffer_apply, sigma};
use pickforge_core::sampling;
use pickforge_core::theta::{build_theta_explicit, choose_mu, lft};
use pickforge_core::{Complex64, ComplexMatrix, ComplexVector, InterpolationData, Realization, ToleranceConfig};
use proptest::prelude::*;

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn point() -> impl Strategy<Value = Complex64> {
    (0.0f64..0.85, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn sampled(seed: u64, k: usize, q: usize, p: usize) -> (Realization, InterpolationData) {
    let s = random_schur(2, q, p, seed);
    let mut g = sampling::rng(seed ^ 0x9e37);
    let pts: Vec<Complex64> = (0..k).map(|_| sampling::random_disk_point(&mut g, 0.8)).collect();
    let e = sampling::random_matrix(&mut g, q, k);
    let data = InterpolationData::sampled(&s, &pts, e, &cfg()).unwrap();
    (s, data)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn algebra_is_pointwise(seed in 0u64..1_000_000, z in point()) {
        let c = cfg();
        let f = random_schur(2, 2, 2, seed);
        let g = random_schur(3, 2, 2, seed + 1);
        let (fz, gz) = (f.eval(z, &c).unwrap(), g.eval(z, &c).unwrap());
        prop_assert!(op_norm(&(f.mul(&g).unwrap().eval(z, &c).unwrap() - &fz * &gz)) < 1e-10);
        prop_assert!(op_norm(&(f.add(&g).unwrap().eval(z, &c).unwrap() - (&fz + &gz))) < 1e-12);
        let shifted = f.add(&Realization::constant(ComplexMatrix::identity(2, 2) * real(3.0))).unwrap();
        let inv = shifted.inv(&c).unwrap();
        let prod = shifted.eval(z, &c).unwrap() * inv.eval(z, &c).unwrap();
        prop_assert!(op_norm(&(prod - ComplexMatrix::identity(2, 2))) < 1e-10);
    }

    #[test]
    fn sampled_pick_is_psd_and_solves_stein(seed in 0u64..1_000_000, k in 1usize..4, q in 1usize..3, p in 1usize..3) {
        let c = cfg();
        let (s, data) = sampled(seed, k, q, p);
        let pm = pick_matrix(&data, &c).unwrap();
        prop_assert!(psd_certificate(&pm, &c).unwrap().is_psd);
        prop_assert!(data.stein_residual(&pm) < 1e-10);
        prop_assert!(verify_interpolant(&data, &s, &c).unwrap().passed());
    }

    #[test]
    fn theta_is_j_contractive_and_generates(seed in 0u64..1_000_000, k in 1usize..4, z in point()) {
        let c = cfg();
        let (_, data) = sampled(seed, k, 1, 1);
        let pm = pick_matrix(&data, &c).unwrap();
        let th = build_theta_explicit(&data, &pm, choose_mu(&data.t).unwrap(), &c).unwrap();
        let j = th.signature.j();
        let tz = th.eval(z, &c).unwrap();
        let defect = &j - &tz * &j * tz.adjoint();
        let loose = ToleranceConfig { psd_tol: 1e-9, ..c };
        prop_assert!(psd_certificate(&defect, &loose).unwrap().is_psd);
        let s = lft(&th, &random_schur(1, 1, 1, seed + 3), &c).unwrap();
        prop_assert!(verify_interpolant(&data, &s, &c).unwrap().passed());
    }

    #[test]
    fn redheffer_covers_singular_data(seed in 0u64..1_000_000, degree in 1usize..3) {
        let c = cfg();
        let mut g = sampling::rng(seed);
        let zs: Vec<Complex64> = (0..degree).map(|_| sampling::random_disk_point(&mut g, 0.7)).collect();
        let s = blaschke(&zs, sampling::random_unimodular(&mut g)).unwrap();
        let k = degree + 1;
        let pts: Vec<Complex64> = (0..k).map(|_| sampling::random_disk_point(&mut g, 0.8)).collect();
        let data = InterpolationData::sampled(&s, &pts, sampling::random_matrix(&mut g, 1, k), &c).unwrap();
        let pm = pick_matrix(&data, &c).unwrap();
        let coll = build_colligation(&data, &pm, &c).unwrap();
        prop_assert!(coll.state_dim() < k);
        prop_assert!(coll.unitarity_residual < 1e-10);
        let sig = sigma(&coll);
        let e = random_schur(1, sig.d_delta_star, sig.d_delta, seed + 1);
        let sol = redheffer_apply(&sig, &e, &c).unwrap();
        prop_assert!(verify_interpolant(&data, &sol, &c).unwrap().passed());
    }

    #[test]
    fn douglas_solutions_are_contractive(seed in 0u64..1_000_000, m in 1usize..4, extra in 0usize..3, nu in 1usize..4) {
        let c = cfg();
        let mut g = sampling::rng(seed);
        let a = sampling::random_matrix(&mut g, m, m + extra);
        let x_true = sampling::random_matrix(&mut g, m + extra, nu);
        let x_true = &x_true * real(1.0 / op_norm(&x_true));
        let b = &a * &x_true;
        let k = sampling::random_matrix(&mut g, m + extra, nu);
        let k = &k * real(1.0 / op_norm(&k));
        for kk in [None, Some(&k)] {
            let x = douglas_solve(&a, &b, kk, &c).unwrap();
            prop_assert!(op_norm(&(&a * &x - &b)) <= 1e-10 * op_norm(&b).max(1.0));
            prop_assert!(op_norm(&x) <= 1.0 + 1e-10);
            prop_assert!(psd_certificate(&douglas_block(&a, &b, &x), &c).unwrap().is_psd);
        }
    }

    #[test]
    fn hs_threshold_is_sharp(seed in 0u64..1_000_000, k in 1usize..4) {
        let c = cfg();
        let (_, data) = sampled(seed, k, 1, 1);
        let pm = pick_matrix(&data, &c).unwrap();
        let y = sampling::random_matrix(&mut sampling::rng(seed + 7), 1, k);
        let tmax = 1.0 / (&y * pinv(&pm, &c).unwrap() * y.adjoint())[(0, 0)].re.sqrt();
        prop_assert!(hs_solvable(&pm, &(&y * real(0.99 * tmax)), &c).unwrap().is_psd);
        prop_assert!(!hs_solvable(&pm, &(&y * real(1.01 * tmax)), &c).unwrap().is_psd);
    }

    #[test]
    fn boundary_pick_is_a_gram_matrix(seed in 0u64..1_000_000, degree in 1usize..4, n in 0usize..3) {
        let c = cfg();
        let mut g = sampling::rng(seed);
        let zs: Vec<Complex64> = (0..degree).map(|_| sampling::random_disk_point(&mut g, 0.8)).collect();
        let s = blaschke(&zs, sampling::random_unimodular(&mut g)).unwrap();
        let t0 = sampling::random_unimodular(&mut g);
        let jet = boundary_jet(&s, t0, 2 * n + 1, &c).unwrap();
        let bp = boundary_pick(&jet, n).unwrap();
        let ks: Vec<Realization> = (0..=n).map(|j| boundary_kernels(&s, &jet, j, &c).unwrap()).collect();
        let row = Realization::stack_cols(&ks.iter().collect::<Vec<_>>()).unwrap();
        let gram = h2_gram(&row, &row, &c).unwrap();
        prop_assert!(op_norm(&(&gram - &bp.p)) <= 1e-8 * op_norm(&bp.p).max(1.0));
        prop_assert!(psd_certificate(&bp.p, &c).unwrap().is_psd);
    }

    #[test]
    fn carrier_is_isometric_on_kernel_combinations(seed in 0u64..1_000_000, k in 1usize..3, w in point(), v in point()) {
        let c = cfg();
        let mut g = sampling::rng(seed);
        let zs: Vec<Complex64> = (0..3).map(|_| sampling::random_disk_point(&mut g, 0.7)).collect();
        let s = blaschke(&zs, sampling::random_unimodular(&mut g)).unwrap();
        let pts: Vec<Complex64> = (0..k).map(|_| sampling::random_disk_point(&mut g, 0.7)).collect();
        let e = sampling::random_matrix(&mut g, 1, k);
        let base = HSProblemData::from_points(s, &pts, e, ComplexMatrix::zeros(1, k), &c).unwrap();
        let sol = solve_min_norm(&base, &c).unwrap();
        let coeffs: Vec<ComplexVector> = (0..2).map(|_| sampling::random_matrix(&mut g, sol.param.out_dim(), 1).column(0).into_owned()).collect();
        let h = KernelCombination::new(sol.param.clone(), vec![w, v], coeffs).unwrap();
        let uh = sol.carrier.mul(&h.to_realization().unwrap()).unwrap();
        let transported = h2_gram(&uh, &uh, &c).unwrap()[(0, 0)].re;
        let direct = h.norm_sq(&c).unwrap();
        prop_assert!(direct > 1e-6);
        prop_assert!((transported - direct).abs() <= 1e-8 * direct.max(1.0), "{transported} vs {direct}");
    }
}
