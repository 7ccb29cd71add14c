//! Test matrices, the quadratic form `Q_n = y^T A y` with its diagonal and
//! off-diagonal split, and Monte Carlo comparisons against [`LimitLaw`].

use crate::error::{Error, Result};
use crate::limit_law::LimitLaw;
use crate::measure::Measure;
use crate::rng::SeedStream;
use crate::sampler::{draw_unit, mean_and_se, HeavyTailSpec, MixedMomentKernel, SampleVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub enum DiagSource {
    /// `a_ii = quantile((i - 1/2) / n)`.
    QuantileGrid(Measure),
    IidDraw(Measure),
}

impl DiagSource {
    pub fn measure(&self) -> &Measure {
        match self {
            DiagSource::QuantileGrid(m) | DiagSource::IidDraw(m) => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OffDiag {
    Zero,
    /// Entries `N(0, sigma_n^2)` with `sigma_n = n^(-exponent)`.
    GaussianScaled { exponent: f64 },
}

impl OffDiag {
    pub const DEFAULT_GAUSSIAN: OffDiag = OffDiag::GaussianScaled { exponent: 0.25 };
}

#[derive(Debug, Clone)]
pub struct TestMatrixSpec {
    pub n: usize,
    pub diag: DiagSource,
    pub offdiag: OffDiag,
}

/// Real symmetric matrix stored as its diagonal plus an optional dense
/// row-major off-diagonal part with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TestMatrix {
    pub n: usize,
    pub diag: Vec<f64>,
    pub off: Option<Vec<f64>>,
    pub max_abs_diag: f64,
}

impl TestMatrix {
    pub fn diagonal(diag: Vec<f64>) -> TestMatrix {
        let max_abs_diag = diag.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        TestMatrix { n: diag.len(), diag, off: None, max_abs_diag }
    }

    /// From a dense row-major symmetric matrix.
    pub fn from_dense(n: usize, a: &[f64]) -> Result<TestMatrix> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
        }
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                asym = asym.max((a[i * n + j] - a[j * n + i]).abs());
            }
        }
        if asym > 1e-12 {
            return Err(Error::NotSymmetric(asym));
        }
        let diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        let mut off = a.to_vec();
        for i in 0..n {
            off[i * n + i] = 0.0;
        }
        let mut m = TestMatrix::diagonal(diag);
        if off.iter().any(|v| *v != 0.0) {
            m.off = Some(off);
        }
        Ok(m)
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            self.off.as_ref().map_or(0.0, |o| o[i * self.n + j])
        }
    }

    /// `||A - diag A||_F^2`.
    pub fn offdiag_frob_sq(&self) -> f64 {
        self.off.as_ref().map_or(0.0, |o| o.iter().map(|v| v * v).sum())
    }

    /// Spectral norm by power iteration.
    pub fn operator_norm(&self) -> f64 {
        let n = self.n;
        if self.off.is_none() {
            return self.max_abs_diag;
        }
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.618_033_988_7).fract()).collect();
        let mut w = vec![0.0; n];
        let mut est = 0.0;
        for _ in 0..500 {
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= nv);
            self.apply(&v, &mut w);
            let next = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            std::mem::swap(&mut v, &mut w);
            if (next - est).abs() <= 1e-10 * next {
                return next;
            }
            est = next;
        }
        est
    }

    /// `w = A v`.
    pub fn apply(&self, v: &[f64], w: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if let Some(o) = &self.off {
                s += o[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            }
            w[i] = s;
        }
    }
}

pub fn build_matrix(spec: &TestMatrixSpec, stream: SeedStream) -> Result<TestMatrix> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let diag = match &spec.diag {
        DiagSource::QuantileGrid(m) => {
            m.validate()?;
            (0..n).map(|i| m.quantile((i as f64 + 0.5) / n as f64)).collect::<Result<Vec<f64>>>()?
        }
        DiagSource::IidDraw(m) => {
            m.validate()?;
            let mut rng = stream.derive("diag").rng();
            (0..n).map(|_| m.quantile(rng.random::<f64>())).collect::<Result<Vec<f64>>>()?
        }
    };
    let mut a = TestMatrix::diagonal(diag);
    if let OffDiag::GaussianScaled { exponent } = spec.offdiag {
        let sigma = (n as f64).powf(-exponent);
        let mut rng = stream.derive("offdiag").rng();
        let mut off = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let g: f64 = rng.sample(StandardNormal);
                off[i * n + j] = sigma * g;
                off[j * n + i] = sigma * g;
            }
        }
        a.off = Some(off);
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadFormSample {
    pub q: f64,
    pub q1: f64,
    pub q2: f64,
}

fn quad_form_slice(y: &[f64], a: &TestMatrix) -> QuadFormSample {
    let n = a.n;
    let mut q1 = 0.0;
    for i in 0..n {
        q1 += a.diag[i] * y[i] * y[i];
    }
    let mut q2 = 0.0;
    if let Some(o) = &a.off {
        for i in 0..n {
            let row = &o[i * n..(i + 1) * n];
            let mut s = 0.0;
            for j in 0..n {
                s += row[j] * y[j];
            }
            q2 += y[i] * s;
        }
    }
    QuadFormSample { q: q1 + q2, q1, q2 }
}

/// `q1 = sum a_ii y_i^2`, `q2 = sum_{i != j} a_ij y_i y_j`, `q = q1 + q2`;
/// summation in ascending index order.
pub fn quad_form(y: &SampleVector, a: &TestMatrix) -> Result<QuadFormSample> {
    if y.y.len() != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, got: y.y.len() });
    }
    Ok(quad_form_slice(&y.y, a))
}

/// One-sample Kolmogorov-Smirnov statistic of sorted samples against model
/// CDF values at the same points.
pub fn ks_statistic(sorted: &[f64], cdf: &[f64]) -> f64 {
    let m = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        // ties share a single jump
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        d = d.max(cdf[i] - i as f64 / m).max((j + 1) as f64 / m - cdf[i]);
        i = j + 1;
    }
    d
}

#[derive(Debug, Clone)]
pub struct Summary {
    pub mean: f64,
    pub mean_se: f64,
    pub second_moment: f64,
    pub second_moment_se: f64,
    pub variance: f64,
}

impl Summary {
    pub fn of(v: &[f64]) -> Summary {
        let (mean, mean_se) = mean_and_se(v);
        let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
        let (second_moment, second_moment_se) = mean_and_se(&sq);
        let nn = v.len() as f64;
        let variance = if v.len() > 1 {
            v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nn - 1.0)
        } else {
            0.0
        };
        Summary { mean, mean_se, second_moment, second_moment_se, variance }
    }
}

#[derive(Debug, Clone)]
pub struct QfLawResult {
    /// Per-replicate samples in replicate order.
    pub samples: Vec<QuadFormSample>,
    pub sorted_q1: Vec<f64>,
    pub sorted_q: Vec<f64>,
    pub q1: Summary,
    pub q: Summary,
    /// `(1/n) sum a_ii`, the expected value of `q1`.
    pub diag_mean: f64,
    pub ks_q1: Option<f64>,
    pub ks_q: Option<f64>,
}

pub const MIN_QF_REPS: usize = 1000;

/// Replicates of `Q_n` for a fixed matrix.
pub fn simulate_samples(spec: &HeavyTailSpec, a: &TestMatrix, reps: usize, stream: SeedStream) -> Result<Vec<QuadFormSample>> {
    spec.validate()?;
    let n = a.n;
    let base = stream.derive("reps");
    (0..reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, r| -> Result<QuadFormSample> {
                draw_unit(spec, &mut base.substream(r as u64).rng(), buf)?;
                Ok(quad_form_slice(buf, a))
            },
        )
        .collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn simulate_qf_law(spec: &HeavyTailSpec, mspec: &TestMatrixSpec, reps: usize, stream: SeedStream) -> Result<QfLawResult> {
    if reps < MIN_QF_REPS {
        return Err(Error::InvalidArgument(format!("reps must be at least {MIN_QF_REPS}")));
    }
    let a = build_matrix(mspec, stream.derive("matrix"))?;
    let samples = simulate_samples(spec, &a, reps, stream)?;
    let q1v: Vec<f64> = samples.iter().map(|s| s.q1).collect();
    let qv: Vec<f64> = samples.iter().map(|s| s.q).collect();
    let q1 = Summary::of(&q1v);
    let q = Summary::of(&qv);
    let sorted_q1 = sorted(q1v);
    let sorted_q = sorted(qv);
    let nu = mspec.diag.measure();
    let law = match spec.alpha() {
        Some(alpha) if alpha > 0.0 && alpha < 2.0 && !nu.is_degenerate() => Some(LimitLaw::new(nu.clone(), alpha)?),
        _ => None,
    };
    let (ks_q1, ks_q) = match &law {
        Some(l) => {
            let c1 = l.cdf_sorted(&sorted_q1)?;
            let k1 = ks_statistic(&sorted_q1, &c1);
            let k = if sorted_q == sorted_q1 { k1 } else { ks_statistic(&sorted_q, &l.cdf_sorted(&sorted_q)?) };
            (Some(k1), Some(k))
        }
        None => (None, None),
    };
    let diag_mean = a.diag.iter().sum::<f64>() / a.n as f64;
    Ok(QfLawResult { samples, sorted_q1, sorted_q, q1, q, diag_mean, ks_q1, ks_q })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffdiagRow {
    pub n: usize,
    /// Monte Carlo estimate of `E[q2^2]` for the realized matrix.
    pub q2_sq_mean: f64,
    pub q2_sq_se: f64,
    /// Realized `||A - diag A||_F^2`.
    pub frob_sq: f64,
    pub beta22_hat: f64,
    /// `2 ||A - diag A||_F^2 beta22_hat`, the exact conditional second moment.
    pub bound: f64,
    /// `2 ||A - diag A||_F^2 / n^2`.
    pub proof_bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffdiagReport {
    pub rows: Vec<OffdiagRow>,
    pub decreasing: bool,
    pub all_within: bool,
}

pub const OFFDIAG_REPS: usize = 1000;

pub fn offdiag_vanishing_check(
    spec: &HeavyTailSpec,
    offdiag: OffDiag,
    n_grid: &[usize],
    reps: usize,
    stream: SeedStream,
) -> Result<OffdiagReport> {
    spec.validate()?;
    if n_grid.is_empty() || reps < 2 {
        return Err(Error::InvalidArgument("need a nonempty n grid and at least 2 reps".into()));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for (gi, &n) in n_grid.iter().enumerate() {
        if n < 2 {
            return Err(Error::InvalidArgument("n must be at least 2".into()));
        }
        let s = stream.substream(gi as u64);
        let mspec = TestMatrixSpec { n, diag: DiagSource::QuantileGrid(Measure::two_point(0.5, 0.0, 1.0)?), offdiag };
        let a = build_matrix(&mspec, s.derive("matrix"))?;
        let kernel = MixedMomentKernel::new(&[1, 1], n)?;
        let base = s.derive("reps");
        let pairs: Vec<(f64, f64)> = (0..reps)
            .into_par_iter()
            .map_init(
                || vec![0.0; n],
                |buf, r| -> Result<(f64, f64)> {
                    draw_unit(spec, &mut base.substream(r as u64).rng(), buf)?;
                    let q2 = quad_form_slice(buf, &a).q2;
                    Ok((q2 * q2, kernel.eval(buf)))
                },
            )
            .collect::<Result<Vec<_>>>()?;
        let sq: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let (q2_sq_mean, q2_sq_se) = mean_and_se(&sq);
        let (beta22_hat, _) = mean_and_se(&b);
        let frob_sq = a.offdiag_frob_sq();
        let bound = 2.0 * frob_sq * beta22_hat;
        let proof_bound = 2.0 * frob_sq / (n as f64 * n as f64);
        let within_bound = q2_sq_mean <= 1.5 * bound && q2_sq_mean <= proof_bound;
        rows.push(OffdiagRow { n, q2_sq_mean, q2_sq_se, frob_sq, beta22_hat, bound, proof_bound, within_bound });
    }
    let decreasing = rows.windows(2).all(|w| w[1].q2_sq_mean <= w[0].q2_sq_mean);
    let all_within = rows.iter().all(|r| r.within_bound);
    Ok(OffdiagReport { rows, decreasing, all_within })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRow {
    pub level: f64,
    /// `(1/n) sum |a_ii| 1(|a_ii| > T)` over the realized diagonal.
    pub functional: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct TruncationReport {
    pub rows: Vec<TruncationRow>,
    pub law: QfLawResult,
}

pub fn truncation_experiment(
    spec: &HeavyTailSpec,
    nu: &Measure,
    n: usize,
    t_grid: &[f64],
    reps: usize,
    stream: SeedStream,
) -> Result<TruncationReport> {
    nu.validate()?;
    let m1 = nu.mean_and_power_moments(1)?;
    if !m1[0].is_finite() {
        return Err(Error::DivergentMoment { order: 1, reason: "nu has no first moment".into() });
    }
    let mspec = TestMatrixSpec { n, diag: DiagSource::IidDraw(nu.clone()), offdiag: OffDiag::Zero };
    let law = simulate_qf_law(spec, &mspec, reps, stream)?;
    let a = build_matrix(&mspec, stream.derive("matrix"))?;
    let rows = t_grid
        .iter()
        .map(|&t| {
            let v: Vec<f64> = a.diag.iter().map(|x| if x.abs() > t { x.abs() } else { 0.0 }).collect();
            let (functional, std_error) = mean_and_se(&v);
            TruncationRow { level: t, functional, std_error }
        })
        .collect();
    Ok(TruncationReport { rows, law })
}
