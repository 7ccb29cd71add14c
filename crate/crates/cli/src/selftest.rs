//! Built-in example suite: closed-form cases plus the desk-scale Monte Carlo
//! examples. Each check draws from its own labelled substream of the seed.

use crate::output::Report;
use crate::CliError;
use heavyqf_core::concentration::{azuma_bound, hw_tail_experiment, light_tail_degeneration, HwConfig};
use heavyqf_core::limit_law::{boundary_law, Boundary, LimitLaw};
use heavyqf_core::linalg::sym_eigenvalues;
use heavyqf_core::measure::{weak_distance, Measure};
use heavyqf_core::quadform::{
    build_matrix, offdiag_vanishing_check, quad_form, simulate_qf_law, simulate_samples, truncation_experiment, DiagSource, OffDiag,
    TestMatrix, TestMatrixSpec,
};
use heavyqf_core::rmt::{
    alpha0_construction, atom_probe_esd, build_correlation_matrix, embedding_check, esd, levy_proximity_check, resolvent_diag, spectrum,
    DataMatrix, DataMatrixSpec,
};
use heavyqf_core::rng::SeedStream;
use heavyqf_core::sampler::{
    argmax_sign, mixed_moment, sample_vector, sample_xi, self_normalize, theoretical_mixed_moment_limit, HeavyTailSpec,
};
use heavyqf_core::Result;
use num_complex::Complex64;
use serde_json::{json, Value};

type Outcome = Result<(bool, String)>;
type Check = (&'static str, fn(SeedStream) -> Outcome);

const PARETO1: HeavyTailSpec = HeavyTailSpec::SymmetricPareto { alpha: 1.0 };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tp() -> Measure {
    Measure::two_point(0.5, 0.0, 1.0).expect("valid two-point law")
}

fn arcsine() -> LimitLaw {
    LimitLaw::new(tp(), 1.0).expect("valid law")
}

fn close(a: f64, b: f64, tol: f64) -> (bool, String) {
    ((a - b).abs() <= tol, format!("got {a}, want {b} +- {tol:e}"))
}

fn vec_close(a: &[f64], b: &[f64], tol: f64) -> (bool, String) {
    let ok = a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
    (ok, format!("got {a:?}, want {b:?}"))
}

fn masses_within(got: &[f64], want: &[(usize, f64)], tol: f64) -> (bool, String) {
    let ok = want.iter().all(|(k, m)| (got[*k] - m).abs() <= tol);
    (ok, format!("masses {:?}, targets {want:?}", &got[..got.len().min(4)]))
}

const CHECKS: &[Check] = &[
    // measures
    ("frac integrals at a single atom", |_| {
        let f = Measure::point_mass(2.0)?.frac_integrals(0.7, 2.0)?;
        let ok = f.a_plus == 0.0 && f.b_minus == 0.0 && f.a_plus_dm1.is_infinite() && f.b_minus_dm1.is_infinite();
        Ok((ok, format!("{f:?}")))
    }),
    ("truncation leaves a law inside [-T, T] unchanged", |_| {
        let t = tp().truncate(2.0)?;
        Ok((t.atoms() == tp().atoms(), format!("{:?}", t.atoms())))
    }),
    ("truncation moves an outside atom to 0", |_| {
        let a = Measure::point_mass(3.0)?.truncate(1.0)?.atoms();
        Ok((a == vec![(0.0, 1.0)], format!("{a:?}")))
    }),
    ("two-point moments", |_| Ok(vec_close(&tp().mean_and_power_moments(2)?, &[0.5, 0.5], 1e-14))),
    ("uniform moments", |_| Ok(vec_close(&Measure::uniform_unit().mean_and_power_moments(3)?, &[0.5, 1.0 / 3.0, 0.25], 1e-10))),
    ("exponential moments", |_| Ok(vec_close(&Measure::exponential(1.0)?.mean_and_power_moments(2)?, &[1.0, 2.0], 1e-8))),
    ("weak distance of identical two-point laws", |_| Ok(close(weak_distance(&tp(), &tp()), 0.0, 0.0))),
    ("weak distance of identical uniform laws", |_| {
        let u = Measure::uniform_unit();
        Ok(close(weak_distance(&u, &u), 0.0, 0.0))
    }),
    // limit law
    ("Stieltjes transform of a point mass", |_| {
        let s = LimitLaw::new(Measure::point_mass(2.0)?, 0.7)?.stieltjes(c(0.0, 1.0))?;
        Ok(((s - c(0.4, 0.2)).norm() < 1e-10, format!("{s}")))
    }),
    ("Stieltjes reflection symmetry", |_| {
        let law = arcsine();
        let z0 = c(0.3, 0.7);
        let (a, b) = (law.stieltjes(z0.conj())?, law.stieltjes(z0)?.conj());
        Ok(((a - b).norm() < 1e-12, format!("{a} vs {b}")))
    }),
    ("moments of a point-mass law", |_| {
        let law = LimitLaw::new(Measure::point_mass(1.5)?, 1.0)?;
        let m = (1..=4).map(|l| law.moment(l)).collect::<Result<Vec<_>>>()?;
        Ok(vec_close(&m, &[1.5, 2.25, 3.375, 5.0625], 1e-12))
    }),
    ("density vanishes outside K_nu", |_| Ok(close(arcsine().density(2.0)?, 0.0, 0.0))),
    ("arcsine cdf at 1/2", |_| Ok(close(arcsine().cdf(0.5)?, 0.5, 1e-9))),
    ("cdf below the support", |_| Ok(close(arcsine().cdf(-1.0)?, 0.0, 0.0))),
    ("arcsine cdf at 1", |_| Ok(close(arcsine().cdf(1.0)?, 1.0, 1e-6))),
    ("atom of a point-mass law", |_| Ok(close(LimitLaw::new(Measure::point_mass(2.0)?, 1.0)?.atom_mass(2.0, None)?, 1.0, 1e-6))),
    ("arcsine has no atom at 0", |_| {
        let m = arcsine().atom_mass(0.0, None)?;
        Ok((m <= 1e-3, format!("{m}")))
    }),
    ("point-mass law has no atom away from b", |_| {
        let m = LimitLaw::new(Measure::point_mass(2.0)?, 1.0)?.atom_mass(3.0, None)?;
        Ok((m <= 1e-3, format!("{m}")))
    }),
    ("alpha -> 2 boundary is a point mass at the mean", |_| {
        let a = boundary_law(&tp(), Boundary::AlphaTo2)?.atoms();
        Ok((a == vec![(0.5, 1.0)], format!("{a:?}")))
    }),
    ("alpha -> 0 boundary is nu", |_| {
        let a = boundary_law(&tp(), Boundary::AlphaTo0)?.atoms();
        Ok((a == tp().atoms(), format!("{a:?}")))
    }),
    ("point mass is a fixed point of both boundaries", |_| {
        let pm = Measure::point_mass(0.7)?;
        let a = boundary_law(&pm, Boundary::AlphaTo0)?.atoms();
        let b = boundary_law(&pm, Boundary::AlphaTo2)?.atoms();
        Ok((a == pm.atoms() && b == pm.atoms(), format!("{a:?} {b:?}")))
    }),
    // sampler
    ("Rademacher values and mean", |s| {
        let x = sample_xi(&HeavyTailSpec::Rademacher, 100_000, s)?;
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        Ok((x.iter().all(|v| *v == 1.0 || *v == -1.0) && mean.abs() < 0.02, format!("mean {mean}")))
    }),
    ("normalize [3, 4]", |_| {
        let v = self_normalize(&[3.0, 4.0])?;
        let (ok, d) = vec_close(&v.y, &[0.6, 0.8], 1e-15);
        Ok((ok && v.source_norm == 5.0, d))
    }),
    ("normalize a constant vector", |_| Ok(vec_close(&self_normalize(&[1.0; 4])?.y, &[0.5; 4], 0.0))),
    ("normalization is scale invariant", |_| {
        let x = [0.3, -2.0, 7.5, 1e-3];
        let a = self_normalize(&x)?.y;
        let b = self_normalize(&x.map(|v| 7.3 * v))?.y;
        Ok(vec_close(&a, &b, 2.0 * f64::EPSILON))
    }),
    ("beta_2 equals 1/n", |s| {
        let e = mixed_moment(&PARETO1, &[1], 100, 1000, s)?;
        let ok = (100.0 * e.value - 1.0).abs() <= 3.0 * 100.0 * e.std_error + 1e-12;
        Ok((ok, format!("n*value {}", 100.0 * e.value)))
    }),
    ("n beta_4 approaches 1 - alpha/2", |s| {
        let e = mixed_moment(&PARETO1, &[2], 2000, 100_000, s)?;
        Ok(close(2000.0 * e.value, 0.5, 0.025))
    }),
    ("limit of n beta_2 is 1", |_| {
        let v = [0.3, 1.0, 1.7].iter().map(|a| theoretical_mixed_moment_limit(*a, &[1])).collect::<Result<Vec<_>>>()?;
        Ok(vec_close(&v, &[1.0; 3], 1e-12))
    }),
    ("limit of n beta_4 at alpha = 1", |_| Ok(close(theoretical_mixed_moment_limit(1.0, &[2])?, 0.5, 1e-12))),
    ("argmax of [0.6, 0.8]", |_| {
        let (k, s) = argmax_sign(&[0.6, 0.8]);
        Ok(((k + 1, s) == (2, 1.0), format!("({}, {s})", k + 1)))
    }),
    ("argmax of [-0.9, 0.1, ...]", |_| {
        let (k, s) = argmax_sign(&[-0.9, 0.1, 0.3, -0.2]);
        Ok(((k + 1, s) == (1, -1.0), format!("({}, {s})", k + 1)))
    }),
    ("slowly varying: largest coordinate carries the norm", |s| {
        let reps = 200;
        let mut total = 0.0;
        for r in 0..reps {
            let y = sample_vector(&HeavyTailSpec::SlowlyVarying, 5000, s.substream(r))?.y;
            total += y[argmax_sign(&y).0].abs();
        }
        Ok(close(total / reps as f64, 1.0, 0.05))
    }),
    // quadratic forms
    ("quantile grid of a fair two-point law", |s| {
        let a = build_matrix(&TestMatrixSpec { n: 10, diag: DiagSource::QuantileGrid(tp()), offdiag: OffDiag::Zero }, s)?;
        Ok(vec_close(&a.diag, &[0., 0., 0., 0., 0., 1., 1., 1., 1., 1.], 0.0))
    }),
    ("quantile grid of the uniform law", |s| {
        let spec = TestMatrixSpec { n: 4, diag: DiagSource::QuantileGrid(Measure::uniform_unit()), offdiag: OffDiag::Zero };
        Ok(vec_close(&build_matrix(&spec, s)?.diag, &[0.125, 0.375, 0.625, 0.875], 1e-15))
    }),
    ("b times the identity", |s| {
        let y = sample_vector(&PARETO1, 50, s)?;
        let q = quad_form(&y, &TestMatrix::diagonal(vec![2.5; 50]))?;
        let ok = (q.q - 2.5).abs() < 1e-12 && (q.q1 - 2.5).abs() < 1e-12 && q.q2 == 0.0;
        Ok((ok, format!("{q:?}")))
    }),
    ("Rademacher form is x^T A x / n", |s| rademacher_identity(s, 60)),
    ("hand-computed 2x2 form", |_| {
        let q = quad_form(&self_normalize(&[3.0, 4.0])?, &TestMatrix::from_dense(2, &[1.0, 2.0, 2.0, 3.0])?)?;
        let ok = (q.q1 - 2.28).abs() < 1e-12 && (q.q2 - 1.92).abs() < 1e-12 && (q.q - 4.2).abs() < 1e-12;
        Ok((ok, format!("{q:?}")))
    }),
    ("Gaussian entries: q1 concentrates", |s| {
        let spec = TestMatrixSpec { n: 5000, diag: DiagSource::QuantileGrid(tp()), offdiag: OffDiag::Zero };
        let r = simulate_qf_law(&HeavyTailSpec::StandardGaussian, &spec, 1000, s)?;
        Ok((r.q1.variance < 0.01, format!("variance {}", r.q1.variance)))
    }),
    ("slowly varying: q1 follows nu", |s| {
        let spec = TestMatrixSpec { n: 5000, diag: DiagSource::QuantileGrid(tp()), offdiag: OffDiag::Zero };
        let r = simulate_qf_law(&HeavyTailSpec::SlowlyVarying, &spec, 10_000, s)?;
        let m = r.sorted_q1.len() as f64;
        let mass = |a: f64, b: f64| r.sorted_q1.iter().filter(|v| **v >= a && **v <= b).count() as f64 / m;
        let (lo, hi) = (mass(-0.1, 0.1), mass(0.9, 1.1));
        Ok(((lo - 0.5).abs() <= 0.03 && (hi - 0.5).abs() <= 0.03, format!("{lo} {hi}")))
    }),
    ("zero off-diagonal gives q2 = 0", |s| {
        let a = build_matrix(&TestMatrixSpec { n: 30, diag: DiagSource::QuantileGrid(tp()), offdiag: OffDiag::Zero }, s.derive("m"))?;
        let q = simulate_samples(&PARETO1, &a, 200, s)?;
        Ok((q.iter().all(|v| v.q2 == 0.0), String::new()))
    }),
    ("E[q2^2] within the proof bound at n = 100", |s| {
        let r = offdiag_vanishing_check(&PARETO1, OffDiag::DEFAULT_GAUSSIAN, &[100], 1000, s)?;
        let w = &r.rows[0];
        Ok((w.q2_sq_mean <= w.proof_bound, format!("{} <= {}", w.q2_sq_mean, w.proof_bound)))
    }),
    ("truncation functional vanishes monotonically", |s| {
        let r = truncation_experiment(&PARETO1, &Measure::exponential(1.0)?, 2000, &[1.0, 3.0, 10.0, 30.0], 1000, s)?;
        let f: Vec<f64> = r.rows.iter().map(|w| w.functional).collect();
        Ok((f.windows(2).all(|w| w[1] <= w[0]) && f[3] < 1e-3, format!("{f:?}")))
    }),
    // sample correlation matrices
    ("correlation diagonal is exactly one", |s| {
        let y = build_correlation_matrix(&DataMatrixSpec::new(40, 60, PARETO1)?, s)?;
        let r = y.correlation();
        Ok(((0..40).all(|i| r[i * 40 + i] == 1.0), String::new()))
    }),
    ("p = 1 gives R = [[1]]", |_| Ok(vec_close(&DataMatrix::from_raw(1, 3, &[2.0, -1.0, 0.5])?.correlation(), &[1.0], 0.0))),
    ("orthogonal Rademacher rows", |_| {
        Ok(vec_close(&DataMatrix::from_raw(2, 2, &[1.0, 1.0, 1.0, -1.0])?.correlation(), &[1.0, 0.0, 0.0, 1.0], 0.0))
    }),
    ("eigenvalues of the identity", |_| {
        let n = 7;
        let m: Vec<f64> = (0..n * n).map(|k| if k % (n + 1) == 0 { 1.0 } else { 0.0 }).collect();
        Ok(vec_close(&sym_eigenvalues(n, &m)?, &[1.0; 7], 0.0))
    }),
    ("eigenvalues of a reflection", |_| Ok(vec_close(&sym_eigenvalues(2, &[0.0, 1.0, 1.0, 0.0])?, &[1.0, -1.0], 1e-15))),
    ("single-bin histogram", |_| Ok(vec_close(&esd(&[1.0; 3], 1)?.masses, &[1.0], 0.0))),
    ("identity spectrum is a point mass at 1", |_| {
        let h = esd(&[1.0; 10], 9)?;
        let hit = h.masses.iter().position(|m| *m == 1.0);
        let ok = hit.is_some_and(|i| h.edges[i] <= 1.0 && 1.0 <= h.edges[i + 1]);
        Ok((ok, format!("{:?}", h.masses)))
    }),
    ("spectral mean equals trace / p", |s| {
        let y = build_correlation_matrix(&DataMatrixSpec::new(500, 500, PARETO1)?, s)?;
        let sp = spectrum(&y, 50)?;
        Ok(close(sp.eigenvalues.iter().sum::<f64>() / 500.0, sp.trace / 500.0, 1e-12))
    }),
    ("resolvent diagonal in (0, 1] at z = -1", |s| {
        let y = build_correlation_matrix(&DataMatrixSpec::new(200, 200, PARETO1)?, s)?;
        let d = resolvent_diag(&y, c(-1.0, 0.0))?;
        Ok((d.diag_values.iter().all(|b| b.im == 0.0 && b.re > 0.0 && b.re <= 1.0), String::new()))
    }),
    ("zero matrix resolvent", |_| {
        let y = DataMatrix { p: 3, n: 4, y: vec![0.0; 12] };
        let z = c(1.0, 2.0);
        let d = resolvent_diag(&y, z)?;
        Ok((d.diag_values.iter().all(|b| (b + 1.0 / z).norm() < 1e-15), String::new()))
    }),
    ("resolvent diagonal bounded at z = i", |s| {
        let y = build_correlation_matrix(&DataMatrixSpec::new(200, 200, PARETO1)?, s)?;
        let m = resolvent_diag(&y, c(0.0, 1.0))?.diag_values.iter().map(|b| b.norm()).fold(0.0, f64::max);
        Ok((m <= 1.0, format!("max {m}")))
    }),
    ("embedding sides are real at real z", |s| {
        let e = embedding_check(&DataMatrixSpec::new(200, 200, PARETO1)?, c(-1.0, 0.0), s)?;
        Ok((e.lhs.im.abs() < 1e-10 && e.rhs.im.abs() < 1e-10, format!("{e:?}")))
    }),
    ("empty window far above the spectrum", |s| {
        let spec = DataMatrixSpec::new(100, 100, PARETO1)?;
        let top = spectrum(&build_correlation_matrix(&spec, s.substream(0))?, 10)?.eigenvalues[0];
        let m = atom_probe_esd(&spec, 10.0 * top, 0.1, 1, s)?;
        Ok((m == 0.0, format!("{m}")))
    }),
    ("atom probe rejects u <= 0", |s| {
        let spec = DataMatrixSpec::with_gamma(2.0, 50, PARETO1)?;
        Ok((atom_probe_esd(&spec, 0.0, 0.1, 1, s).is_err(), String::new()))
    }),
    ("occupancy counts sum to p", |s| {
        let spec = DataMatrixSpec::new(300, 200, HeavyTailSpec::SlowlyVarying)?;
        let r = alpha0_construction(&spec, 4, s)?;
        Ok((r.multinomial_diag.iter().sum::<u64>() == 300, String::new()))
    }),
    ("zero-inflated Poisson masses at gamma = 1", |s| {
        let spec = DataMatrixSpec::new(2000, 2000, HeavyTailSpec::SlowlyVarying)?;
        let r = alpha0_construction(&spec, 4, s)?;
        let e = (-1f64).exp();
        let want = [(0, e), (1, e), (2, e / 2.0)];
        let (a, da) = masses_within(&r.esd_rtilde.masses, &want, 0.02);
        let (b, db) = masses_within(&r.esd_r.masses, &want, 0.02);
        Ok((a && b, format!("R~: {da}; R: {db}")))
    }),
    ("Frobenius identity for Y - Z", |s| {
        let l = levy_proximity_check(&DataMatrixSpec::new(100, 100, HeavyTailSpec::SlowlyVarying)?, s)?;
        Ok(close(l.value, l.direct, 1e-10))
    }),
    ("Y approaches Z as p = n grows", |s| {
        let v = |p: usize| -> Result<f64> {
            Ok(levy_proximity_check(&DataMatrixSpec::new(p, p, HeavyTailSpec::SlowlyVarying)?, s.derive(&p.to_string()))?.value)
        };
        let (a, b) = (v(500)?, v(2000)?);
        Ok((b < a, format!("{a} -> {b}")))
    }),
    ("Rademacher rows with n = 1 are already signed units", |s| {
        let l = levy_proximity_check(&DataMatrixSpec::new(5, 1, HeavyTailSpec::Rademacher)?, s)?;
        Ok(close(l.value, 0.0, 0.0))
    }),
    // concentration
    ("identity matrix: Q = 1 and no deviations", |s| {
        let cfg = HwConfig {
            xi: HeavyTailSpec::StandardGaussian,
            a_spec: TestMatrixSpec { n: 50, diag: DiagSource::QuantileGrid(Measure::point_mass(1.0)?), offdiag: OffDiag::Zero },
            reps: 10_000,
            t_grid: Some(vec![1e-9, 0.01, 0.1]),
        };
        let r = hw_tail_experiment(&cfg, s)?;
        Ok((r.empirical_prob.iter().all(|p| *p == 0.0) && (r.mean - 1.0).abs() < 1e-12, format!("{:?}", r.empirical_prob)))
    }),
    ("Rademacher form rescales the classical one", |s| rademacher_identity(s, 200)),
    ("Azuma bound at z = -1, p = n", |_| {
        let n = 300;
        Ok(close(azuma_bound(n, n, -1.0, 0.1), 2.0 * (-(n as f64) * 0.01 / 8.0).exp(), 1e-15))
    }),
    ("Azuma bound at t = 0", |_| Ok(close(azuma_bound(100, 80, -2.0, 0.0), 2.0, 0.0))),
    ("Rademacher n beta_4 = 1/n", |s| {
        let r = light_tail_degeneration(&HeavyTailSpec::Rademacher, &tp(), &[50, 200], 100, s)?;
        let got: Vec<f64> = r.rows.iter().map(|w| w.n_beta4).collect();
        Ok(vec_close(&got, &[1.0 / 50.0, 1.0 / 200.0], 1e-12))
    }),
];

fn rademacher_identity(s: SeedStream, n: usize) -> Outcome {
    let spec = TestMatrixSpec { n, diag: DiagSource::QuantileGrid(Measure::uniform_unit()), offdiag: OffDiag::DEFAULT_GAUSSIAN };
    let a = build_matrix(&spec, s.derive("matrix"))?;
    let mut worst = 0.0f64;
    for r in 0..20 {
        let y = sample_vector(&HeavyTailSpec::Rademacher, n, s.substream(r))?;
        let x: Vec<f64> = y.y.iter().map(|v| v.signum()).collect();
        let mut classical = 0.0;
        for i in 0..n {
            for j in 0..n {
                classical += x[i] * a.entry(i, j) * x[j];
            }
        }
        let q = quad_form(&y, &a)?.q;
        worst = worst.max((q - classical / n as f64).abs() / (1.0 + q.abs()));
    }
    Ok((worst <= 1e-12, format!("max relative gap {worst:e}")))
}

pub fn run(seed: u64) -> std::result::Result<Report, CliError> {
    let root = SeedStream::new(seed).derive("selftest");
    let mut checks = Vec::with_capacity(CHECKS.len());
    let mut failed = Vec::new();
    for (name, f) in CHECKS {
        let (ok, detail) = match f(root.derive(name)) {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed.push(*name);
        }
        checks.push(json!({"name": name, "ok": ok, "detail": detail}));
    }
    let mut r = Report::default();
    r.config("seed", seed);
    r.result("checks", Value::Array(checks)).result("passed", CHECKS.len() - failed.len()).result("failed", failed.len());
    if let Some(first) = failed.first() {
        r.invariant(&format!("selftest check {first:?}"), false);
    }
    Ok(r)
}
