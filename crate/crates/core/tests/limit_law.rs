use heavyqf_core::limit_law::{boundary_law, Boundary, LimitLaw};
use heavyqf_core::measure::{weak_distance, Measure};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

const ALPHAS: [f64; 5] = [0.25, 0.5, 1.0, 1.5, 1.75];

fn two_point() -> Measure {
    Measure::two_point(0.5, 0.0, 1.0).unwrap()
}

/// Closed form for uniform nu on [0,1].
fn uniform_oracle(alpha: f64, x: f64) -> f64 {
    let s = (alpha * PI / 2.0).sin() / PI;
    let c = (alpha * PI / 2.0).cos();
    let h = alpha / 2.0;
    let num = (alpha + 2.0) / alpha * (1.0 - x).powf(h) * x.powf(h);
    let den = x.powf(alpha + 2.0) + (1.0 - x).powf(alpha + 2.0) + 2.0 * c * x.powf(h + 1.0) * (1.0 - x).powf(h + 1.0);
    s * num / den
}

/// Closed form for the symmetric two-point nu on {0,1}.
fn two_point_oracle(alpha: f64, x: f64) -> f64 {
    let s = (alpha * PI / 2.0).sin() / PI;
    let c = (alpha * PI / 2.0).cos();
    let h = alpha / 2.0;
    let num = (1.0 - x).powf(h - 1.0) * x.powf(h - 1.0);
    let den = x.powf(alpha) + (1.0 - x).powf(alpha) + 2.0 * c * x.powf(h) * (1.0 - x).powf(h);
    s * num / den
}

#[test]
fn uniform_density_matches_closed_form() {
    let law = LimitLaw::new(Measure::uniform_unit(), 1.0).unwrap();
    assert!((law.density(0.5).unwrap() - 6.0 / PI).abs() < 1e-10);
    for &alpha in &ALPHAS {
        let law = LimitLaw::new(Measure::uniform_unit(), alpha).unwrap();
        for k in 1..20 {
            let x = k as f64 / 20.0;
            let f = law.density(x).unwrap();
            let o = uniform_oracle(alpha, x);
            assert!(((f - o) / o).abs() < 1e-9, "alpha={alpha} x={x} {f} {o}");
        }
    }
}

#[test]
fn two_point_density_matches_closed_form() {
    for &alpha in &ALPHAS {
        let law = LimitLaw::new(two_point(), alpha).unwrap();
        for k in 1..20 {
            let x = k as f64 / 20.0;
            let f = law.density(x).unwrap();
            let o = two_point_oracle(alpha, x);
            assert!(((f - o) / o).abs() < 1e-12, "alpha={alpha} x={x}");
        }
    }
}

#[test]
fn density_normalization_sweep() {
    for nu in [two_point(), Measure::uniform_unit()] {
        for &alpha in &ALPHAS {
            let law = LimitLaw::new(nu.clone(), alpha).unwrap();
            let total = law.cdf(1.0).unwrap();
            assert!((total - 1.0).abs() < 1e-6, "alpha={alpha} total={total}");
        }
    }
}

#[test]
fn density_positive_inside_and_zero_outside() {
    for nu in [two_point(), Measure::uniform_unit(), Measure::discrete(vec![(-1.0, 0.2), (0.5, 0.3), (2.0, 0.5)]).unwrap()] {
        let law = LimitLaw::new(nu.clone(), 0.8).unwrap();
        let (lo, hi) = law.k_nu();
        for k in 1..40 {
            let x = lo + (hi - lo) * k as f64 / 40.0;
            let f = law.density(x).unwrap();
            assert!(f > 0.0, "x={x}");
        }
        for x in [lo - 1.0, lo, hi, hi + 0.1, hi + 10.0] {
            assert_eq!(law.density(x).unwrap(), 0.0);
        }
    }
}

#[test]
fn interior_atom_gives_infinite_marker() {
    let nu = Measure::discrete(vec![(0.0, 0.25), (0.5, 0.5), (1.0, 0.25)]).unwrap();
    let law = LimitLaw::new(nu, 1.0).unwrap();
    assert_eq!(law.density(0.5).unwrap(), f64::INFINITY);
    assert!((law.cdf(1.0).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn moments_agree_with_density_quadrature() {
    for &alpha in &[0.5, 1.0, 1.5] {
        let law = LimitLaw::new(two_point(), alpha).unwrap();
        let m2 = law.integrate_against(&|x| x * x).unwrap();
        assert!((m2 - (0.5 - alpha / 8.0)).abs() < 1e-5, "alpha={alpha} {m2}");
        let u = LimitLaw::new(Measure::uniform_unit(), alpha).unwrap();
        for ell in 1..=4 {
            let q = u.integrate_against(&|x| x.powi(ell as i32)).unwrap();
            assert!((q - u.moment(ell).unwrap()).abs() < 1e-8, "alpha={alpha} ell={ell}");
        }
    }
}

#[test]
fn moments_bounded_by_support() {
    let nu = Measure::discrete(vec![(-1.5, 0.3), (0.2, 0.3), (1.0, 0.4)]).unwrap();
    let law = LimitLaw::new(nu, 1.2).unwrap();
    for ell in 1..=14 {
        assert!(law.moment(ell).unwrap().abs() <= 1.5f64.powi(ell as i32) * (1.0 + 1e-12));
    }
}

#[test]
fn stieltjes_moment_expansion() {
    for nu in [two_point(), Measure::uniform_unit()] {
        for &alpha in &[0.5, 1.0, 1.5] {
            let law = LimitLaw::new(nu.clone(), alpha).unwrap();
            let m: Vec<f64> = (1..=10).map(|l| law.moment(l).unwrap()).collect();
            for z in [Complex64::new(2.5, 0.0), Complex64::new(-3.0, 0.5), Complex64::new(0.3, 2.2)] {
                let mut series = -1.0 / z;
                for (l, ml) in m.iter().enumerate() {
                    series -= ml * z.powi(-(l as i32) - 2);
                }
                let s = law.stieltjes(z).unwrap();
                let bound = 2.0 * (1.0 / z.norm()).powi(11);
                assert!((s - series).norm() <= bound, "alpha={alpha} z={z} diff={}", (s - series).norm());
            }
        }
    }
}

#[test]
fn stieltjes_inversion_recovers_density() {
    let v = 1e-4;
    for nu in [two_point(), Measure::uniform_unit()] {
        for &alpha in &[0.5, 1.0, 1.5] {
            let law = LimitLaw::new(nu.clone(), alpha).unwrap();
            for &x in &[0.1, 0.3, 0.5, 0.77, 0.9] {
                let s = law.stieltjes(Complex64::new(x, v)).unwrap();
                let f = law.density(x).unwrap();
                let est = s.im / PI;
                assert!((est - f).abs() <= 1e-3f64.max(0.01 * f), "alpha={alpha} x={x} {est} {f}");
            }
        }
    }
}

#[test]
fn stieltjes_arcsine_at_minus_one() {
    let law = LimitLaw::new(two_point(), 1.0).unwrap();
    let s = law.stieltjes(Complex64::new(-1.0, 0.0)).unwrap();
    assert!((s.re - 1.0 / 2f64.sqrt()).abs() < 1e-8);
}

#[test]
fn atom_probe_on_arcsine_grid() {
    let law = LimitLaw::new(two_point(), 1.0).unwrap();
    for k in 0..20 {
        let a = -0.25 + 1.5 * k as f64 / 19.0;
        assert!(law.atom_mass(a, None).unwrap() <= 1e-3, "a={a}");
    }
    for a in [0.0, 1.0] {
        assert!(law.atom_mass(a, None).unwrap() <= 1e-3);
    }
}

#[test]
fn exponential_tail_ratio() {
    let law = LimitLaw::new(Measure::exponential(1.0).unwrap(), 1.0).unwrap();
    let r = law.density(50.0).unwrap() / law.tail_asymptote(50.0).unwrap();
    assert!((r - 1.0).abs() <= 0.05, "ratio {r}");
}

#[test]
fn pareto_tail_ratio() {
    let law = LimitLaw::new(Measure::pareto(1.0).unwrap(), 1.0).unwrap();
    let r = law.density(1e4).unwrap() / law.tail_asymptote(1e4).unwrap();
    assert!((r - 1.0).abs() <= 0.05, "ratio {r}");
}

#[test]
fn exponential_law_is_normalized() {
    let law = LimitLaw::new(Measure::exponential(1.0).unwrap(), 1.0).unwrap();
    let c = law.cdf_sorted(&[1.0, 5.0, 40.0]).unwrap();
    assert!(c[0] < c[1] && c[1] < c[2]);
    assert!((c[2] - 1.0).abs() < 1e-6, "{c:?}");
    let m1 = law.integrate_against(&|x| x).unwrap();
    assert!((m1 - 1.0).abs() < 1e-6, "mean {m1}");
}

#[test]
fn truncated_pareto_law_is_normalized() {
    let nu = Measure::pareto(1.0).unwrap().truncate(4.0).unwrap();
    let law = LimitLaw::new(nu, 1.0).unwrap();
    assert!((law.cdf(4.0).unwrap() - 1.0).abs() < 1e-6);
    let m1 = law.integrate_against(&|x| x).unwrap();
    assert!((m1 - law.moment(1).unwrap()).abs() < 1e-6);
}

#[test]
fn boundary_approach_is_monotone() {
    for nu in [two_point(), Measure::uniform_unit()] {
        let to2 = boundary_law(&nu, Boundary::AlphaTo2).unwrap();
        let d19 = weak_distance(&LimitLaw::new(nu.clone(), 1.9).unwrap(), &to2);
        let d199 = weak_distance(&LimitLaw::new(nu.clone(), 1.99).unwrap(), &to2);
        assert!(d199 < d19, "alpha->2: {d19} {d199}");
        let to0 = boundary_law(&nu, Boundary::AlphaTo0).unwrap();
        let d01 = weak_distance(&LimitLaw::new(nu.clone(), 0.1).unwrap(), &to0);
        let d001 = weak_distance(&LimitLaw::new(nu.clone(), 0.01).unwrap(), &to0);
        assert!(d001 < d01, "alpha->0: {d01} {d001}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn nevanlinna(re in -3.0f64..4.0, im in 1e-3f64..5.0, alpha in 0.05f64..1.95) {
        let law = LimitLaw::new(two_point(), alpha).unwrap();
        let s = law.stieltjes(Complex64::new(re, im)).unwrap();
        prop_assert!(s.im > 0.0);
    }

    #[test]
    fn nevanlinna_uniform(re in -3.0f64..4.0, im in 1e-3f64..5.0, alpha in 0.1f64..1.9) {
        let law = LimitLaw::new(Measure::uniform_unit(), alpha).unwrap();
        let s = law.stieltjes(Complex64::new(re, im)).unwrap();
        prop_assert!(s.im > 0.0);
    }

    #[test]
    fn reflection_symmetry(re in -3.0f64..4.0, im in 1e-3f64..5.0, alpha in 0.1f64..1.9) {
        for nu in [two_point(), Measure::uniform_unit()] {
            let law = LimitLaw::new(nu, alpha).unwrap();
            let a = law.stieltjes(Complex64::new(re, im)).unwrap();
            let b = law.stieltjes(Complex64::new(re, -im)).unwrap();
            prop_assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn mean_is_first_moment(p in 0.05f64..0.95, x0 in -2.0f64..0.0, x1 in 0.1f64..3.0, alpha in 0.1f64..1.9) {
        let law = LimitLaw::new(Measure::two_point(p, x0, x1).unwrap(), alpha).unwrap();
        let mean = (1.0 - p) * x0 + p * x1;
        prop_assert!((law.moment(1).unwrap() - mean).abs() < 1e-12);
    }
}
