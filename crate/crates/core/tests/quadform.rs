use heavyqf_core::measure::Measure;
use heavyqf_core::quadform::*;
use heavyqf_core::rng::SeedStream;
use heavyqf_core::sampler::{sample_xi, sample_vector, self_normalize, HeavyTailSpec};
use heavyqf_core::Error;
use proptest::prelude::*;

const PARETO1: HeavyTailSpec = HeavyTailSpec::SymmetricPareto { alpha: 1.0 };

fn two_point_grid(n: usize, offdiag: OffDiag) -> TestMatrixSpec {
    TestMatrixSpec { n, diag: DiagSource::QuantileGrid(Measure::two_point(0.5, 0.0, 1.0).unwrap()), offdiag }
}

#[test]
fn quantile_grid_diagonals() {
    let a = build_matrix(&two_point_grid(10, OffDiag::Zero), SeedStream::new(0)).unwrap();
    assert_eq!(a.diag, vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
    let spec = TestMatrixSpec { n: 4, diag: DiagSource::QuantileGrid(Measure::uniform_unit()), offdiag: OffDiag::Zero };
    let a = build_matrix(&spec, SeedStream::new(0)).unwrap();
    assert_eq!(a.diag, vec![0.125, 0.375, 0.625, 0.875]);
    assert_eq!(a.max_abs_diag, 0.875);
}

#[test]
fn gaussian_offdiag_scale() {
    let a = build_matrix(&two_point_grid(100, OffDiag::DEFAULT_GAUSSIAN), SeedStream::new(1)).unwrap();
    let r = a.offdiag_frob_sq() / 100f64.powi(2);
    assert!((r - 0.1).abs() < 0.02, "{r}");
    for i in 0..100 {
        assert_eq!(a.entry(i, i), a.diag[i]);
        for j in 0..100 {
            assert_eq!(a.entry(i, j), a.entry(j, i));
        }
    }
}

#[test]
fn scaled_identity_gives_constant() {
    let a = TestMatrix::diagonal(vec![2.5; 30]);
    for r in 0..20 {
        let y = sample_vector(&PARETO1, 30, SeedStream::new(2).substream(r)).unwrap();
        let s = quad_form(&y, &a).unwrap();
        assert!((s.q - 2.5).abs() < 1e-14);
        assert_eq!(s.q2, 0.0);
        assert_eq!(s.q, s.q1);
    }
}

#[test]
fn rademacher_rescaling_identity() {
    let n = 40;
    let a = build_matrix(&two_point_grid(n, OffDiag::DEFAULT_GAUSSIAN), SeedStream::new(3)).unwrap();
    for r in 0..20 {
        let x = sample_xi(&HeavyTailSpec::Rademacher, n, SeedStream::new(4).substream(r)).unwrap();
        let mut xax = 0.0;
        for i in 0..n {
            for j in 0..n {
                xax += x[i] * a.entry(i, j) * x[j];
            }
        }
        let q = quad_form(&self_normalize(&x).unwrap(), &a).unwrap().q;
        assert!((q * n as f64 - xax).abs() <= 1e-12 * xax.abs().max(1.0));
    }
}

#[test]
fn simulate_requires_reps() {
    let r = simulate_qf_law(&PARETO1, &two_point_grid(10, OffDiag::Zero), 999, SeedStream::new(0));
    assert!(matches!(r, Err(Error::InvalidArgument(_))));
}

#[test]
fn arcsine_ks_and_mean_identity() {
    let r = simulate_qf_law(&PARETO1, &two_point_grid(2000, OffDiag::Zero), 10_000, SeedStream::new(5)).unwrap();
    let ks = r.ks_q1.unwrap();
    assert!(ks < 0.03, "ks {ks}");
    assert!((r.q1.mean - r.diag_mean).abs() <= 3.0 * r.q1.mean_se);
    for s in &r.samples {
        assert!((0.0..=1.0).contains(&s.q1));
        assert_eq!(s.q, s.q1 + s.q2);
    }
    let small = simulate_qf_law(&PARETO1, &two_point_grid(500, OffDiag::Zero), 1000, SeedStream::new(5)).unwrap();
    assert!(small.ks_q1.unwrap() > ks, "{} vs {ks}", small.ks_q1.unwrap());
}

#[test]
fn second_moment_matches_limit() {
    for &alpha in &[0.5, 1.0, 1.5] {
        let spec = HeavyTailSpec::SymmetricPareto { alpha };
        let r = simulate_qf_law(&spec, &two_point_grid(2000, OffDiag::Zero), 10_000, SeedStream::new(6)).unwrap();
        let target = 0.5 - alpha / 8.0;
        assert!(
            (r.q1.second_moment - target).abs() <= 3.0 * r.q1.second_moment_se,
            "alpha={alpha} {} {target} se {}",
            r.q1.second_moment,
            r.q1.second_moment_se
        );
    }
}

#[test]
fn gaussian_entries_concentrate() {
    let r = simulate_qf_law(&HeavyTailSpec::StandardGaussian, &two_point_grid(5000, OffDiag::Zero), 1000, SeedStream::new(7))
        .unwrap();
    assert!(r.q1.variance < 0.01);
    assert!(r.ks_q1.is_none());
}

#[test]
fn slowly_varying_recovers_nu() {
    let r = simulate_qf_law(&HeavyTailSpec::SlowlyVarying, &two_point_grid(5000, OffDiag::Zero), 10_000, SeedStream::new(8))
        .unwrap();
    let m = r.samples.len() as f64;
    let low = r.samples.iter().filter(|s| s.q1.abs() <= 0.1).count() as f64 / m;
    let high = r.samples.iter().filter(|s| (s.q1 - 1.0).abs() <= 0.1).count() as f64 / m;
    assert!((low - 0.5).abs() < 0.03 && (high - 0.5).abs() < 0.03, "{low} {high}");
}

#[test]
fn zero_offdiag_gives_zero_q2() {
    let rep = offdiag_vanishing_check(&PARETO1, OffDiag::Zero, &[50, 100], 200, SeedStream::new(9)).unwrap();
    for row in &rep.rows {
        assert_eq!(row.q2_sq_mean, 0.0);
        assert_eq!(row.frob_sq, 0.0);
    }
}

#[test]
fn offdiag_part_vanishes() {
    let rep = offdiag_vanishing_check(&PARETO1, OffDiag::DEFAULT_GAUSSIAN, &[100, 400, 1600], 1000, SeedStream::new(10)).unwrap();
    assert!(rep.decreasing && rep.all_within, "{rep:?}");
    assert!(rep.rows[2].q2_sq_mean < rep.rows[0].q2_sq_mean / 3.0);
    assert!(rep.rows[0].q2_sq_mean <= rep.rows[0].proof_bound);
}

#[test]
fn exponential_truncation() {
    let nu = Measure::exponential(1.0).unwrap();
    let grid = [1.0, 3.0, 10.0, 30.0];
    let rep = truncation_experiment(&PARETO1, &nu, 2000, &grid, 10_000, SeedStream::new(11)).unwrap();
    let row = &rep.rows[2];
    let exact = 11.0 * (-10f64).exp();
    assert!((row.functional - exact).abs() <= 3.0 * row.std_error.max(1e-12), "{row:?}");
    assert!(rep.rows.windows(2).all(|w| w[1].functional <= w[0].functional));
    let ks = rep.law.ks_q1.unwrap();
    assert!(ks < 0.04, "ks {ks}");
}

#[test]
fn truncation_needs_first_moment() {
    let nu = Measure::pareto(1.0).unwrap();
    let r = truncation_experiment(&PARETO1, &nu, 100, &[1.0], 1000, SeedStream::new(0));
    assert!(matches!(r, Err(Error::DivergentMoment { .. }) | Err(Error::DivergentIntegral { .. })), "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_and_convex_bound(seed in any::<u64>(), n in 2usize..40, fam in 0usize..3) {
        let spec = [PARETO1, HeavyTailSpec::StandardGaussian, HeavyTailSpec::SlowlyVarying][fam];
        let a = build_matrix(
            &TestMatrixSpec { n, diag: DiagSource::IidDraw(Measure::uniform_unit()), offdiag: OffDiag::DEFAULT_GAUSSIAN },
            SeedStream::new(seed),
        ).unwrap();
        let y = sample_vector(&spec, n, SeedStream::new(seed).derive("y")).unwrap();
        let s = quad_form(&y, &a).unwrap();
        prop_assert_eq!(s.q, s.q1 + s.q2);
        let lo = a.diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = a.diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(s.q1 >= lo - 1e-14 && s.q1 <= hi + 1e-14);
        prop_assert!(s.q1.abs() <= a.max_abs_diag * (1.0 + 1e-14));
    }
}
