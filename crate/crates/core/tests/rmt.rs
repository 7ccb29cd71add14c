use heavyqf_core::rmt::*;
use heavyqf_core::rng::SeedStream;
use heavyqf_core::sampler::HeavyTailSpec;
use heavyqf_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

const PARETO1: HeavyTailSpec = HeavyTailSpec::SymmetricPareto { alpha: 1.0 };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn correlation_examples() {
    let spec = DataMatrixSpec::new(30, 50, PARETO1).unwrap();
    let y = build_correlation_matrix(&spec, SeedStream::new(1)).unwrap();
    let r = y.correlation();
    assert!((0..30).all(|i| r[i * 30 + i] == 1.0));
    let one = DataMatrix::from_raw(1, 3, &[2.0, -1.0, 0.5]).unwrap();
    assert_eq!(one.correlation(), vec![1.0]);
    let rad = DataMatrix::from_raw(2, 2, &[1.0, 1.0, 1.0, -1.0]).unwrap();
    assert_eq!(rad.correlation(), vec![1.0, 0.0, 0.0, 1.0]);
    assert_eq!(DataMatrix::from_raw(2, 2, &[1.0, 1.0, 0.0, 0.0]), Err(Error::ZeroRow(1)));
}

#[test]
fn gamma_rounding() {
    let s = DataMatrixSpec::with_gamma(0.5, 301, PARETO1).unwrap();
    assert!((s.gamma() - 0.5).abs() <= 1.0 / 301.0);
}

#[test]
fn histogram_examples() {
    let h = esd(&[1.0, 1.0, 1.0], 1).unwrap();
    assert_eq!(h.masses, vec![1.0]);
    let h = esd(&[1.0; 10], 7).unwrap();
    assert!((h.masses.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert_eq!(h.masses.iter().filter(|m| **m > 0.0).count(), 1);
    let h = integer_histogram(&[0.1, 1.2, 2.4, 0.0, 5.0], 3);
    assert_eq!(h.masses, vec![0.4, 0.2, 0.0, 0.0]);
}

#[test]
fn spectrum_trace_and_mean() {
    let spec = DataMatrixSpec::new(200, 200, PARETO1).unwrap();
    let y = build_correlation_matrix(&spec, SeedStream::new(2)).unwrap();
    let s = spectrum(&y, 40).unwrap();
    assert_eq!(s.trace, 200.0);
    assert_eq!(s.eigenvalues.len(), 200);
    assert!(s.eigenvalues.iter().all(|l| *l >= 0.0));
    let mean = s.eigenvalues.iter().sum::<f64>() / 200.0;
    assert!((mean - 1.0).abs() < 1e-12);
    assert!((s.esd_histogram.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn resolvent_bounds() {
    let spec = DataMatrixSpec::new(200, 200, PARETO1).unwrap();
    let y = build_correlation_matrix(&spec, SeedStream::new(3)).unwrap();
    let d = resolvent_diag(&y, c(-1.0, 0.0)).unwrap();
    assert!(d.diag_values.iter().all(|b| b.im == 0.0 && b.re > 0.0 && b.re <= 1.0));
    let d = resolvent_diag(&y, c(0.0, 1.0)).unwrap();
    assert!(d.diag_values.iter().all(|b| b.norm() <= 1.0));
    for z in [c(0.7, 0.3), c(2.0, -0.5), c(-3.0, 1.0)] {
        let d = resolvent_diag(&y, z).unwrap();
        let dist = if z.re <= 0.0 { z.norm() } else { z.im.abs() };
        assert!(d.diag_values.iter().all(|b| b.norm() <= 1.0 / dist + 1e-12));
    }
    assert!(matches!(resolvent_diag(&y, c(0.5, 0.0)), Err(Error::PointOnSpectrumAxis { .. })));
}

#[test]
fn zero_matrix_resolvent() {
    let y = DataMatrix { p: 3, n: 4, y: vec![0.0; 12] };
    for z in [c(-2.0, 0.0), c(1.0, 1.0)] {
        let d = resolvent_diag(&y, z).unwrap();
        for b in &d.diag_values {
            assert!((b - (-1.0 / z)).norm() < 1e-15);
        }
    }
}

#[test]
fn embedding_is_real_at_real_z_and_small() {
    let spec = DataMatrixSpec::new(300, 300, PARETO1).unwrap();
    let e = embedding_check(&spec, c(-1.0, 0.0), SeedStream::new(4)).unwrap();
    assert!(e.lhs.im.abs() < 1e-10 && e.rhs.im.abs() < 1e-10);
    assert!(e.gap < 0.1, "{e:?}");
    let e = embedding_check(&spec, c(0.5, 0.5), SeedStream::new(4)).unwrap();
    assert!(e.lhs.im > 0.0 && e.gap < 0.1, "{e:?}");
    let gauss = DataMatrixSpec::new(300, 300, HeavyTailSpec::StandardGaussian).unwrap();
    assert!(matches!(embedding_check(&gauss, c(-1.0, 0.0), SeedStream::new(4)), Err(Error::InvalidAlpha(_))));
}

#[test]
fn lhs_matches_eigenvalue_trace() {
    let spec = DataMatrixSpec::new(80, 50, PARETO1).unwrap();
    let y = build_correlation_matrix(&spec, SeedStream::new(5)).unwrap();
    let s = spectrum(&y, 10).unwrap();
    for z in [c(-1.0, 0.0), c(0.3, 0.2)] {
        let direct: Complex64 = s.eigenvalues.iter().map(|l| 1.0 / (l - z)).sum::<Complex64>() / 80.0;
        let e = embedding_from_diag(80, 1.0, &resolvent_diag(&y, z).unwrap());
        assert!((e.lhs - direct).norm() < 1e-10);
    }
}

#[test]
fn gaussian_entries_follow_marchenko_pastur() {
    let spec = DataMatrixSpec::new(500, 500, HeavyTailSpec::StandardGaussian).unwrap();
    let y = build_correlation_matrix(&spec, SeedStream::new(6)).unwrap();
    let d = resolvent_diag(&y, c(-1.0, 0.0)).unwrap();
    let lhs = embedding_from_diag(500, 1.0, &d).lhs.re;
    // s = 1/(1+s) at gamma = 1, z = -1
    let mp = (5f64.sqrt() - 1.0) / 2.0;
    assert!((lhs - mp).abs() < 0.02, "{lhs}");
}

#[test]
fn atom_probe_basics() {
    let spec = DataMatrixSpec::new(300, 300, PARETO1).unwrap();
    assert!(atom_probe_esd(&spec, 0.0, 0.1, 1, SeedStream::new(0)).is_err());
    let far = atom_probe_esd(&spec, 1e4, 0.1, 1, SeedStream::new(0)).unwrap();
    assert_eq!(far, 0.0);
    let m = atom_probe_esd_windows(&spec, 1.0, &[0.1, 0.05], 3, SeedStream::new(7)).unwrap();
    let ratio = m[0] / m[1];
    assert!((ratio - 2.0).abs() < 0.6, "{m:?}");
}

#[test]
fn alpha0_zero_inflated_poisson() {
    let spec = DataMatrixSpec::new(600, 600, HeavyTailSpec::SlowlyVarying).unwrap();
    let r = alpha0_construction(&spec, 4, SeedStream::new(8)).unwrap();
    assert_eq!(r.multinomial_diag.iter().sum::<u64>(), 600);
    let e = (-1f64).exp();
    for (k, target) in [(0, e), (1, e), (2, e / 2.0)] {
        assert!((r.esd_rtilde.masses[k] - target).abs() < 0.04, "k={k} {:?}", r.esd_rtilde.masses);
        assert!((r.esd_r.masses[k] - target).abs() < 0.04, "k={k} {:?}", r.esd_r.masses);
    }
}

#[test]
fn occupancy_counts_are_binomial() {
    let (p, n, seeds) = (20, 20, 3000);
    let spec = DataMatrixSpec::new(p, n, HeavyTailSpec::SlowlyVarying).unwrap();
    let mut hits = [0.0f64; 3];
    for s in 0..seeds {
        let y = build_correlation_matrix(&spec, SeedStream::new(9).substream(s)).unwrap();
        let t11 = occupancy(&y)[0] as usize;
        if t11 < 3 {
            hits[t11] += 1.0;
        }
    }
    let q: f64 = 1.0 / n as f64;
    let mut binom = 1.0;
    for k in 0..3 {
        let pk = binom * q.powi(k as i32) * (1.0 - q).powi((p - k) as i32);
        let est = hits[k] / seeds as f64;
        let se = (pk * (1.0 - pk) / seeds as f64).sqrt();
        assert!((est - pk).abs() <= 3.0 * se, "k={k} {est} {pk}");
        binom = binom * (p - k) as f64 / (k + 1) as f64;
    }
}

#[test]
fn levy_proximity_identity_and_trend() {
    let rad = DataMatrixSpec::new(5, 1, HeavyTailSpec::Rademacher).unwrap();
    assert_eq!(levy_proximity_check(&rad, SeedStream::new(1)).unwrap().value, 0.0);
    let mean = |p: usize| {
        let spec = DataMatrixSpec::new(p, p, HeavyTailSpec::SlowlyVarying).unwrap();
        (0..5).map(|s| levy_proximity_check(&spec, SeedStream::new(10).substream(s)).unwrap().value).sum::<f64>() / 5.0
    };
    assert!(mean(400) < mean(100));
}

proptest! {
    #[test]
    fn zero_inflated_poisson_is_a_distribution(gamma in 0.05f64..5.0) {
        let total: f64 = (0..200).map(|k| zero_inflated_poisson_mass(gamma, k)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(zero_inflated_poisson_mass(gamma, 0) >= 0.0);
    }

    #[test]
    fn levy_identity_holds(seed in any::<u64>(), p in 1usize..30, n in 1usize..30) {
        let spec = DataMatrixSpec::new(p, n, HeavyTailSpec::StudentT { alpha: 0.8 }).unwrap();
        let l = levy_proximity_check(&spec, SeedStream::new(seed)).unwrap();
        prop_assert!((l.value - l.direct).abs() < 1e-10);
    }
}
