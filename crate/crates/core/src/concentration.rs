//! Light-tail concentration experiments: spherical Hanson-Wright tails of
//! `Q_n(y, A)`, Azuma-type concentration of resolvent-diagonal statistics,
//! and the variance decay of `Q_{n,1}` in the normal domain of attraction.
//!
//! Universal constants are never asserted; the tail experiment fits `(C, c)`
//! to the empirical probabilities and checks only the bound's shape.

use crate::error::{Error, Result};
use crate::linalg::shifted_gram_inverse_diag;
use crate::measure::Measure;
use crate::quad::{integrate, Tol};
use crate::quadform::{build_matrix, simulate_samples, DiagSource, OffDiag, TestMatrixSpec};
use crate::rmt::{build_correlation_matrix, DataMatrixSpec};
use crate::rng::SeedStream;
use crate::sampler::{draw_unit, mean_and_se, HeavyTailSpec, MixedMomentKernel};
use rayon::prelude::*;
use statrs::distribution::{DiscreteCDF, Poisson};

pub const MIN_HW_REPS: usize = 10_000;

/// `||xi||_psi2 / sd(xi)` with `||xi||_psi2 = inf{t : E exp(xi^2/t^2) <= 2}`,
/// except Rademacher which is pinned to 1.
pub fn k_proxy(xi: &HeavyTailSpec) -> Result<f64> {
    match xi {
        HeavyTailSpec::Rademacher => Ok(1.0),
        HeavyTailSpec::StandardGaussian => Ok((8.0f64 / 3.0).sqrt()),
        HeavyTailSpec::UniformSymmetric => {
            let mgf = |t: f64| integrate(|u: f64| (u * u / (t * t)).exp(), 0.0, 1.0, Tol::default()).value;
            let (mut lo, mut hi) = (0.5, 2.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mgf(mid) > 2.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(hi * 3f64.sqrt())
        }
        other => Err(Error::UnsupportedFamily(other.name().into())),
    }
}

#[derive(Debug, Clone)]
pub struct HwConfig {
    pub xi: HeavyTailSpec,
    pub a_spec: TestMatrixSpec,
    pub reps: usize,
    /// Defaults to 24 points from 0.5 to 6 sample standard deviations.
    pub t_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSummary {
    /// `ln P ~ ln C - c m(t)` by least squares over points with `P >= 10/reps`.
    pub big_c: f64,
    pub small_c: f64,
    /// Exponent `m(t)` at each grid point.
    pub exponent: Vec<f64>,
    /// `e C exp(-c m(t))`: the fit with one nat of slack. A point lies
    /// below it unless its count is improbably high (see [`exceeds`]).
    pub bound_value: Vec<f64>,
    pub points_fitted: usize,
    pub fit_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub t_grid: Vec<f64>,
    pub empirical_prob: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub k_proxy: f64,
    pub op_norm: f64,
    pub frob_norm: f64,
    /// `m(t) = min(n t^2 / (K^4 ||A||^2), n t / (K^2 ||A||))`.
    pub spherical: FitSummary,
    /// `m(t) = min(n^2 t^2 / (K^4 ||A||_F^2), n t / (K^2 ||A||))`.
    pub classical: FitSummary,
}

pub const EXCEED_LEVEL: f64 = 1e-3;

/// Whether an empirical frequency `p` over `reps` draws exceeds `bound`
/// beyond counting noise: one-sided Poisson test at level `EXCEED_LEVEL`.
pub fn exceeds(p: f64, bound: f64, reps: usize) -> bool {
    let k = (p * reps as f64).round();
    let lambda = bound * reps as f64;
    if k <= lambda {
        return false;
    }
    if !(lambda > 0.0) {
        return true;
    }
    let pois = Poisson::new(lambda).expect("positive rate");
    pois.sf(k as u64 - 1) < EXCEED_LEVEL
}

fn fit(probs: &[f64], m: Vec<f64>, reps: usize) -> FitSummary {
    let floor = 10.0 / reps as f64;
    let pts: Vec<(f64, f64)> = probs.iter().zip(&m).filter(|(p, _)| **p >= floor).map(|(p, x)| (*x, p.ln())).collect();
    let k = pts.len() as f64;
    let (big_c, small_c) = if pts.len() >= 2 {
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        ((my - slope * mx).exp(), -slope)
    } else {
        (f64::NAN, f64::NAN)
    };
    let bound_value: Vec<f64> = m.iter().map(|x| std::f64::consts::E * big_c * (-small_c * x).exp()).collect();
    let fit_ok = small_c > 0.0 && probs.iter().zip(&bound_value).all(|(p, b)| !exceeds(*p, *b, reps));
    FitSummary { big_c, small_c, exponent: m, bound_value, points_fitted: pts.len(), fit_ok }
}

pub fn hw_tail_experiment(cfg: &HwConfig, stream: SeedStream) -> Result<TailReport> {
    let k = k_proxy(&cfg.xi)?;
    if cfg.reps < MIN_HW_REPS {
        return Err(Error::InvalidArgument(format!("reps must be at least {MIN_HW_REPS}")));
    }
    let a = build_matrix(&cfg.a_spec, stream.derive("matrix"))?;
    let n = a.n as f64;
    let q: Vec<f64> = simulate_samples(&cfg.xi, &a, cfg.reps, stream)?.into_iter().map(|s| s.q).collect();
    let mean = q.iter().sum::<f64>() / q.len() as f64;
    let mut dev: Vec<f64> = q.iter().map(|x| (x - mean).abs()).collect();
    dev.sort_by(f64::total_cmp);
    let sd = (dev.iter().map(|d| d * d).sum::<f64>() / (q.len() as f64 - 1.0)).sqrt();
    let t_grid = cfg.t_grid.clone().unwrap_or_else(|| (0..24).map(|i| sd * (0.5 + 5.5 * i as f64 / 23.0)).collect());
    let reps = q.len() as f64;
    let empirical_prob: Vec<f64> = t_grid
        .iter()
        .map(|t| {
            let below = dev.partition_point(|d| d < t);
            (q.len() - below) as f64 / reps
        })
        .collect();
    let op = a.operator_norm();
    let mut frob_sq = a.offdiag_frob_sq();
    frob_sq += a.diag.iter().map(|v| v * v).sum::<f64>();
    let frob = frob_sq.sqrt();
    let k2 = k * k;
    let sph: Vec<f64> = t_grid.iter().map(|t| (n * t * t / (k2 * k2 * op * op)).min(n * t / (k2 * op))).collect();
    let cla: Vec<f64> = t_grid.iter().map(|t| (n * n * t * t / (k2 * k2 * frob_sq)).min(n * t / (k2 * op))).collect();
    Ok(TailReport {
        spherical: fit(&empirical_prob, sph, cfg.reps),
        classical: fit(&empirical_prob, cla, cfg.reps),
        t_grid,
        empirical_prob,
        mean,
        sd,
        k_proxy: k,
        op_norm: op,
        frob_norm: frob,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LipschitzStat {
    Re,
    Im,
    Abs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AzumaReport {
    /// `(1/n) sum_j f(B_jj)` per seed.
    pub statistics: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub empirical_prob: Vec<f64>,
    /// `2 exp(-n^2 t^2 |z| / (8 p))`.
    pub bound: Vec<f64>,
    /// Grid indices where the empirical frequency exceeds the bound.
    pub violations: Vec<usize>,
}

pub fn azuma_bound(n: usize, p: usize, z: f64, t: f64) -> f64 {
    let n = n as f64;
    2.0 * (-n * n * t * t * z.abs() / (8.0 * p as f64)).exp()
}

pub fn resolvent_concentration_experiment(
    spec: &DataMatrixSpec,
    z: f64,
    f: LipschitzStat,
    seeds: usize,
    t_grid: &[f64],
    stream: SeedStream,
) -> Result<AzumaReport> {
    if !(z < 0.0) || !z.is_finite() {
        return Err(Error::InvalidZ(z));
    }
    if seeds < 2 {
        return Err(Error::InvalidArgument("need at least 2 seeds".into()));
    }
    let statistics: Vec<f64> = (0..seeds)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let y = build_correlation_matrix(spec, stream.substream(s as u64))?;
            let d = shifted_gram_inverse_diag(y.p, y.n, &y.y, -z)?;
            // B is real at real negative z
            let v: f64 = d
                .iter()
                .map(|b| match f {
                    LipschitzStat::Re => *b,
                    LipschitzStat::Im => 0.0,
                    LipschitzStat::Abs => b.abs(),
                })
                .sum();
            Ok(v / y.n as f64)
        })
        .collect::<Result<_>>()?;
    let mean = statistics.iter().sum::<f64>() / seeds as f64;
    let empirical_prob: Vec<f64> = t_grid
        .iter()
        .map(|t| statistics.iter().filter(|s| (*s - mean).abs() > *t).count() as f64 / seeds as f64)
        .collect();
    let bound: Vec<f64> = t_grid.iter().map(|t| azuma_bound(spec.n, spec.p, z, *t)).collect();
    let violations = (0..t_grid.len()).filter(|&i| empirical_prob[i] > bound[i]).collect();
    Ok(AzumaReport { statistics, t_grid: t_grid.to_vec(), empirical_prob, bound, violations })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LightTailRow {
    pub n: usize,
    pub variance: f64,
    /// `n` times the estimate of `E[Y_1^4]`.
    pub n_beta4: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LightTailReport {
    pub rows: Vec<LightTailRow>,
    pub decreasing: bool,
    /// Last variance over first variance.
    pub ratio: f64,
}

/// Variance of `Q_{n,1}` with `A = diag QuantileGrid(nu)` along `n_grid`.
pub fn light_tail_degeneration(
    spec: &HeavyTailSpec,
    nu: &Measure,
    n_grid: &[usize],
    reps: usize,
    stream: SeedStream,
) -> Result<LightTailReport> {
    spec.validate()?;
    if n_grid.is_empty() || reps < 2 {
        return Err(Error::InvalidArgument("need a nonempty n grid and at least 2 reps".into()));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for (gi, &n) in n_grid.iter().enumerate() {
        let mspec = TestMatrixSpec { n, diag: DiagSource::QuantileGrid(nu.clone()), offdiag: OffDiag::Zero };
        let a = build_matrix(&mspec, stream.derive("matrix"))?;
        let kernel = MixedMomentKernel::new(&[2], n)?;
        let base = stream.substream(gi as u64);
        let pairs: Vec<(f64, f64)> = (0..reps)
            .into_par_iter()
            .map_init(
                || vec![0.0; n],
                |buf, r| -> Result<(f64, f64)> {
                    draw_unit(spec, &mut base.substream(r as u64).rng(), buf)?;
                    let q1: f64 = a.diag.iter().zip(buf.iter()).map(|(d, y)| d * y * y).sum();
                    Ok((q1, kernel.eval(buf)))
                },
            )
            .collect::<Result<_>>()?;
        let q1: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b4: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let (m, _) = mean_and_se(&q1);
        let variance = q1.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (reps as f64 - 1.0);
        let n_beta4 = n as f64 * mean_and_se(&b4).0;
        rows.push(LightTailRow { n, variance, n_beta4 });
    }
    let decreasing = rows.windows(2).all(|w| w[1].variance < w[0].variance);
    let ratio = rows.last().unwrap().variance / rows[0].variance;
    Ok(LightTailReport { rows, decreasing, ratio })
}
