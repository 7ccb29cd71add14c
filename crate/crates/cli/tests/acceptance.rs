//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs at full scale; expect several minutes on one core.

use heavyqf_core::concentration::{hw_tail_experiment, light_tail_degeneration, resolvent_concentration_experiment, HwConfig, LipschitzStat};
use heavyqf_core::limit_law::LimitLaw;
use heavyqf_core::linalg::sym_eigenvalues;
use heavyqf_core::measure::Measure;
use heavyqf_core::quadform::{offdiag_vanishing_check, simulate_qf_law, truncation_experiment, DiagSource, OffDiag, TestMatrixSpec};
use heavyqf_core::rmt::{alpha0_construction, atom_probe_esd_windows, embedding_check, DataMatrixSpec};
use heavyqf_core::rng::SeedStream;
use heavyqf_core::sampler::{mixed_moment, HeavyTailSpec};
use heavyqf_core::Result;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::Command;
use std::time::Instant;

type Verdict = Result<(bool, String)>;

const PARETO1: HeavyTailSpec = HeavyTailSpec::SymmetricPareto { alpha: 1.0 };

fn tp() -> Measure {
    Measure::two_point(0.5, 0.0, 1.0).unwrap()
}

fn arcsine() -> LimitLaw {
    LimitLaw::new(tp(), 1.0).unwrap()
}

fn c1() -> Verdict {
    let law = arcsine();
    let f = law.density(0.5)?;
    let cdf = law.cdf(1.0)?;
    let s = law.stieltjes(Complex64::new(-1.0, 0.0))?;
    let ok = (f - 2.0 / PI).abs() <= 1e-9 && (cdf - 1.0).abs() <= 1e-6 && (s - FRAC_1_SQRT_2).norm() <= 1e-8;
    Ok((ok, format!("f(0.5) = {f:.12}, F(1) = {cdf:.12}, s(-1) = {:.12}{:+.1e}i", s.re, s.im)))
}

fn c2() -> Verdict {
    let mut worst = 0.0f64;
    for nu in [tp(), Measure::uniform_unit()] {
        for alpha in [0.25, 0.5, 1.0, 1.5, 1.75] {
            let mass = LimitLaw::new(nu.clone(), alpha)?.integrate_against(&|_| 1.0)?;
            worst = worst.max((mass - 1.0).abs());
        }
    }
    Ok((worst <= 1e-6, format!("max |mass - 1| = {worst:.2e} over 10 laws")))
}

fn c3() -> Verdict {
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, alpha) in [0.5, 1.0, 1.5].into_iter().enumerate() {
        let m2 = 0.5 - alpha / 8.0;
        let law = LimitLaw::new(tp(), alpha)?;
        let analytic = law.moment(2)?;
        let quad = law.integrate_against(&|x| x * x)?;
        let spec = TestMatrixSpec { n: 2000, diag: DiagSource::QuantileGrid(tp()), offdiag: OffDiag::Zero };
        let mc = simulate_qf_law(&HeavyTailSpec::SymmetricPareto { alpha }, &spec, 10_000, SeedStream::new(300 + i as u64))?.q1;
        let z = (mc.second_moment - m2) / mc.second_moment_se;
        ok &= (analytic - m2).abs() <= 1e-12 && (quad - m2).abs() <= 1e-5 && z.abs() <= 3.0;
        detail.push(format!("a={alpha}: quad err {:.1e}, MC z {z:+.2}", (quad - m2).abs()));
    }
    Ok((ok, detail.join("; ")))
}

fn c4() -> Verdict {
    let n = 2000.0;
    let b4 = mixed_moment(&PARETO1, &[2], 2000, 100_000, SeedStream::new(400))?;
    let b22 = mixed_moment(&PARETO1, &[1, 1], 2000, 100_000, SeedStream::new(401))?;
    let (x, y) = (n * b4.value, n * n * b22.value);
    let ok = (x / 0.5 - 1.0).abs() <= 0.05 && (y / 0.5 - 1.0).abs() <= 0.05;
    Ok((ok, format!("n beta_4 = {x:.4}, n^2 beta_22 = {y:.4} (targets 0.5)")))
}

fn c5() -> Verdict {
    let r = offdiag_vanishing_check(&PARETO1, OffDiag::DEFAULT_GAUSSIAN, &[100, 400, 1600], 1000, SeedStream::new(500))?;
    let within = r.rows.iter().all(|w| w.q2_sq_mean <= w.proof_bound);
    let drop = r.rows[0].q2_sq_mean / r.rows[2].q2_sq_mean;
    Ok((within && drop >= 3.0, format!("within proof bound: {within}, drop 100 -> 1600: {drop:.2}x")))
}

fn c6() -> Verdict {
    let spec = TestMatrixSpec { n: 2000, diag: DiagSource::QuantileGrid(tp()), offdiag: OffDiag::Zero };
    let ks = simulate_qf_law(&PARETO1, &spec, 10_000, SeedStream::new(600))?.ks_q1.unwrap_or(f64::NAN);
    Ok((ks < 0.03, format!("KS = {ks:.4}")))
}

fn c7() -> Verdict {
    let nu = Measure::exponential(1.0)?;
    let ks = truncation_experiment(&PARETO1, &nu, 2000, &[10.0], 10_000, SeedStream::new(700))?.law.ks_q1.unwrap_or(f64::NAN);
    let law = LimitLaw::new(nu, 1.0)?;
    let ratio = law.density(50.0)? / law.tail_asymptote(50.0)?;
    Ok((ks < 0.04 && (0.95..=1.05).contains(&ratio), format!("KS = {ks:.4}, density/asymptote at 50 = {ratio:.4}")))
}

fn c8() -> Verdict {
    let law = arcsine();
    let mut worst = 0.0f64;
    for k in 0..20 {
        worst = worst.max(law.atom_mass(k as f64 / 19.0, None)?);
    }
    // With a continuous density near u, a point in the wide window falls in
    // the half-width window with probability 1/2; an atom at u would push
    // that towards 1.
    let (p, seeds) = (1000, 20);
    let spec = DataMatrixSpec::new(p, p, PARETO1)?;
    let m = atom_probe_esd_windows(&spec, 1.0, &[0.05, 0.025], seeds, SeedStream::new(800))?;
    let total = (p * seeds) as f64;
    let (wide, narrow) = ((m[0] * total).round(), (m[1] * total).round());
    let z = (narrow - wide / 2.0) / (wide / 4.0).sqrt();
    let ok = worst <= 1e-3 && wide > 0.0 && z.abs() <= 3.0;
    Ok((ok, format!("max atom mass {worst:.1e}; window ratio {:.3} ({wide} vs {narrow} eigenvalues, z {z:+.2})", m[0] / m[1])))
}

fn mean_gap(p: usize, seeds: usize) -> Result<f64> {
    let spec = DataMatrixSpec::new(p, p, PARETO1)?;
    let base = SeedStream::new(900 + p as u64);
    let mut total = 0.0;
    for s in 0..seeds {
        total += embedding_check(&spec, Complex64::new(-1.0, 0.0), base.substream(s as u64))?.gap;
    }
    Ok(total / seeds as f64)
}

fn c9() -> Verdict {
    let g250 = mean_gap(250, 10)?;
    let g1000 = mean_gap(1000, 10)?;
    Ok((g1000 < 0.05 && g1000 < g250, format!("mean gap {g250:.4} at 250, {g1000:.4} at 1000")))
}

fn c10() -> Verdict {
    let spec = DataMatrixSpec::new(2000, 2000, HeavyTailSpec::SlowlyVarying)?;
    let r = alpha0_construction(&spec, 4, SeedStream::new(1000))?;
    let e = (-1f64).exp();
    let targets = [e, e, e / 2.0];
    let within = |m: &[f64]| (0..3).all(|k| (m[k] - targets[k]).abs() <= 0.02);
    let ok = within(&r.esd_r.masses) && within(&r.esd_rtilde.masses);
    Ok((ok, format!("R {:.4?}, R~ {:.4?}, targets {targets:.4?}", &r.esd_r.masses[..3], &r.esd_rtilde.masses[..3])))
}

fn c11() -> Verdict {
    let mut detail = Vec::new();
    // Azuma
    let spec = DataMatrixSpec::new(150, 150, PARETO1)?;
    let t_grid = [0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.3, 0.5];
    let mut azuma_ok = true;
    let mut tested = 0;
    for f in [LipschitzStat::Re, LipschitzStat::Im, LipschitzStat::Abs] {
        let r = resolvent_concentration_experiment(&spec, -1.0, f, 200, &t_grid, SeedStream::new(1100))?;
        tested += r.bound.iter().filter(|b| **b < 0.5).count();
        azuma_ok &= r.violations.iter().all(|&i| r.bound[i] >= 0.5);
    }
    azuma_ok &= tested > 0;
    detail.push(format!("Azuma holds at {tested} (t, f) points below 1/2: {azuma_ok}"));
    // Hanson-Wright shape
    let mut hw_ok = true;
    for (i, xi) in [HeavyTailSpec::Rademacher, HeavyTailSpec::StandardGaussian, HeavyTailSpec::UniformSymmetric].into_iter().enumerate() {
        let cfg = HwConfig {
            xi,
            a_spec: TestMatrixSpec { n: 1000, diag: DiagSource::QuantileGrid(Measure::uniform_unit()), offdiag: OffDiag::DEFAULT_GAUSSIAN },
            reps: 10_000,
            t_grid: None,
        };
        let r = hw_tail_experiment(&cfg, SeedStream::new(1110 + i as u64))?;
        hw_ok &= r.spherical.fit_ok;
        detail.push(format!("{} fit_ok {}", xi.name(), r.spherical.fit_ok));
    }
    // light tails
    let grid = [100, 400, 1600];
    let light = light_tail_degeneration(&HeavyTailSpec::StandardGaussian, &tp(), &grid, 2000, SeedStream::new(1120))?;
    let heavy = light_tail_degeneration(&PARETO1, &tp(), &grid, 2000, SeedStream::new(1121))?;
    let lt_ok = light.ratio <= 0.1 && heavy.ratio > 0.1;
    detail.push(format!("variance ratio gaussian {:.4}, pareto(1) {:.3}", light.ratio, heavy.ratio));
    Ok((azuma_ok && hw_ok && lt_ok, detail.join("; ")))
}

fn heavyqf(args: &[&str], threads: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_heavyqf"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("HEAVYQF_THREADS", t),
        None => cmd.env_remove("HEAVYQF_THREADS"),
    };
    cmd.output().expect("spawn heavyqf")
}

fn count_below(n: usize, m: &[f64], x: f64) -> usize {
    let mut a = m.to_vec();
    for i in 0..n {
        a[i * n + i] -= x;
    }
    let mut neg = 0;
    for k in 0..n {
        let piv = if a[k * n + k] == 0.0 { -1e-300 } else { a[k * n + k] };
        if piv < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            for j in k + 1..n {
                a[i * n + j] -= f * a[k * n + j];
            }
        }
    }
    neg
}

fn sturm_eigenvalues(n: usize, m: &[f64]) -> Vec<f64> {
    let r = (0..n).map(|i| (0..n).map(|j| m[i * n + j].abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let mut out: Vec<f64> = (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-r, r);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(n, m, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    out.reverse();
    out
}

fn c12() -> Verdict {
    let st = heavyqf(&["selftest"], None);
    let selftest_ok = st.status.code() == Some(0);

    let dir = tempfile::tempdir().expect("temp dir");
    let runs: [&[&str]; 4] = [
        &["simulate-qf", "--n", "500", "--reps", "2000", "--offdiag", "gaussian", "--seed", "11"],
        &["simulate-offdiag", "--n-grid", "50,200", "--reps", "300", "--seed", "12"],
        &["simulate-embed", "--n", "150", "--seeds", "3", "--seed", "13"],
        &["check-resolvent-conc", "--n", "80", "--seeds", "40", "--seed", "14"],
    ];
    let mut identical = true;
    for (k, args) in runs.iter().enumerate() {
        let mut reference: Option<(Vec<u8>, Vec<u8>)> = None;
        for threads in ["1", "2", "8"] {
            let csv = dir.path().join(format!("run{k}_{threads}.csv"));
            let mut a: Vec<&str> = args.to_vec();
            let csv_s = csv.to_str().unwrap().to_string();
            a.extend(["--out", &csv_s]);
            let o = heavyqf(&a, Some(threads));
            identical &= o.status.success();
            let got = (o.stdout.clone(), std::fs::read(&csv).unwrap_or_default());
            // the echoed output path differs per run; compare everything else
            let norm = String::from_utf8_lossy(&got.0).replace(&csv_s, "OUT").into_bytes();
            match &reference {
                None => reference = Some((norm, got.1)),
                Some(r) => identical &= r.0 == norm && r.1 == got.1,
            }
        }
    }

    let mut sturm_ok = true;
    for seed in 0..100 {
        let mut rng = SeedStream::new(1200 + seed).rng();
        let mut m = [0.0; 25];
        for i in 0..5 {
            for j in 0..=i {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[i * 5 + j] = v;
                m[j * 5 + i] = v;
            }
        }
        let a = sym_eigenvalues(5, &m)?;
        let b = sturm_eigenvalues(5, &m);
        sturm_ok &= a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-8);
    }
    Ok((
        selftest_ok && identical && sturm_ok,
        format!("selftest exit {:?}; byte-identical at 1/2/8 workers: {identical}; Sturm agreement: {sturm_ok}", st.status.code()),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("arcsine benchmark", c1),
        ("density normalization", c2),
        ("second moment cross-validation", c3),
        ("mixed moments", c4),
        ("off-diagonal vanishing", c5),
        ("distributional convergence", c6),
        ("unbounded nu", c7),
        ("no atoms", c8),
        ("embedding", c9),
        ("alpha = 0 limit", c10),
        ("concentration", c11),
        ("infrastructure", c12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !ok {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {detail} [{:.1}s]", i + 1, if ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
