//! Symmetric heavy-tailed and sub-Gaussian samplers, self-normalized vectors
//! and mixed-moment estimation.
//!
//! The slowly varying family is drawn in the log domain (`log|xi| = 1/U - 1`
//! overflows doubles for small `U`); all others are drawn directly.

use crate::error::{check_alpha, Error, Result};
use crate::rng::SeedStream;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeavyTailSpec {
    /// `|xi| = U^(-1/alpha)`, random sign.
    SymmetricPareto { alpha: f64 },
    /// Student t with `alpha` degrees of freedom.
    StudentT { alpha: f64 },
    /// `P(|xi| > x) = 1/(1 + ln x)` for `x >= 1`, random sign.
    SlowlyVarying,
    Rademacher,
    StandardGaussian,
    /// Uniform on `[-1, 1]`.
    UniformSymmetric,
}

impl HeavyTailSpec {
    pub fn alpha(&self) -> Option<f64> {
        match self {
            HeavyTailSpec::SymmetricPareto { alpha } | HeavyTailSpec::StudentT { alpha } => Some(*alpha),
            HeavyTailSpec::SlowlyVarying => Some(0.0),
            _ => None,
        }
    }

    pub fn is_sub_gaussian(&self) -> bool {
        matches!(
            self,
            HeavyTailSpec::Rademacher | HeavyTailSpec::StandardGaussian | HeavyTailSpec::UniformSymmetric
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            HeavyTailSpec::SymmetricPareto { .. } => "pareto",
            HeavyTailSpec::StudentT { .. } => "student_t",
            HeavyTailSpec::SlowlyVarying => "slowly_varying",
            HeavyTailSpec::Rademacher => "rademacher",
            HeavyTailSpec::StandardGaussian => "gaussian",
            HeavyTailSpec::UniformSymmetric => "uniform",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HeavyTailSpec::SymmetricPareto { alpha } | HeavyTailSpec::StudentT { alpha } => {
                if *alpha > 0.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidAlpha(*alpha))
                }
            }
            _ => Ok(()),
        }
    }
}

/// Uniform on `(0, 1]`.
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

fn coin<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// One draw as `(ln|xi|, sign)`.
fn draw_log<R: Rng + ?Sized>(spec: &HeavyTailSpec, rng: &mut R) -> (f64, f64) {
    match spec {
        HeavyTailSpec::SlowlyVarying => {
            let u = open_uniform(rng);
            let s = coin(rng);
            (1.0 / u - 1.0, s)
        }
        _ => {
            let x = draw(spec, rng);
            (x.abs().ln(), if x < 0.0 { -1.0 } else { 1.0 })
        }
    }
}

fn draw<R: Rng + ?Sized>(spec: &HeavyTailSpec, rng: &mut R) -> f64 {
    match spec {
        HeavyTailSpec::SymmetricPareto { alpha } => {
            let u = open_uniform(rng);
            let s = coin(rng);
            s * u.powf(-1.0 / alpha)
        }
        HeavyTailSpec::StudentT { alpha } => StudentT::new(*alpha).expect("validated alpha").sample(rng),
        HeavyTailSpec::SlowlyVarying => {
            let (l, s) = draw_log(spec, rng);
            s * l.exp()
        }
        HeavyTailSpec::Rademacher => coin(rng),
        HeavyTailSpec::StandardGaussian => rng.sample(StandardNormal),
        HeavyTailSpec::UniformSymmetric => rng.random_range(-1.0..=1.0),
    }
}

/// `count` i.i.d. draws of `xi`. Slowly varying draws may overflow to `+-inf`.
pub fn sample_xi(spec: &HeavyTailSpec, count: usize, stream: SeedStream) -> Result<Vec<f64>> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let mut rng = stream.rng();
    Ok((0..count).map(|_| draw(spec, &mut rng)).collect())
}

/// `count` draws of `ln|xi|` with independent signs.
pub fn sample_log_xi(spec: &HeavyTailSpec, count: usize, stream: SeedStream) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    let mut rng = stream.rng();
    Ok((0..count).map(|_| draw_log(spec, &mut rng)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    pub y: Vec<f64>,
    pub source_norm: f64,
}

/// `y = x / ||x||_2`, computed as `(x/m) / ||x/m||_2` with `m = max|x_i|`.
pub fn self_normalize(x: &[f64]) -> Result<SampleVector> {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 {
        return Err(Error::ZeroVector);
    }
    if !m.is_finite() {
        return Err(Error::Numerical("non-finite entry in self_normalize".into()));
    }
    let mut y: Vec<f64> = x.iter().map(|v| v / m).collect();
    let s = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in y.iter_mut() {
        *v /= s;
    }
    Ok(SampleVector { y, source_norm: m * s })
}

/// Fill `y` with a self-normalized draw of length `y.len()`.
pub(crate) fn draw_unit<R: Rng + ?Sized>(spec: &HeavyTailSpec, rng: &mut R, y: &mut [f64]) -> Result<()> {
    for _attempt in 0..2 {
        if matches!(spec, HeavyTailSpec::SlowlyVarying) {
            let mut top = f64::NEG_INFINITY;
            let mut logs = Vec::with_capacity(y.len());
            for _ in 0..y.len() {
                let (l, s) = draw_log(spec, rng);
                top = top.max(l);
                logs.push((l, s));
            }
            for (v, (l, s)) in y.iter_mut().zip(logs) {
                *v = s * (l - top).exp();
            }
        } else {
            for v in y.iter_mut() {
                *v = draw(spec, rng);
            }
            let m = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if m == 0.0 {
                continue;
            }
            for v in y.iter_mut() {
                *v /= m;
            }
        }
        let s = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in y.iter_mut() {
            *v /= s;
        }
        return Ok(());
    }
    Err(Error::ZeroVector)
}

/// Self-normalized vector of length `n` drawn from `stream`.
pub fn sample_vector(spec: &HeavyTailSpec, n: usize, stream: SeedStream) -> Result<SampleVector> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if matches!(spec, HeavyTailSpec::SlowlyVarying) {
        let mut y = vec![0.0; n];
        draw_unit(spec, &mut stream.rng(), &mut y)?;
        return Ok(SampleVector { y, source_norm: f64::NAN });
    }
    let x = sample_xi(spec, n, stream)?;
    self_normalize(&x)
}

/// 0-based index of the largest `|y_k|` (smallest index on ties) and its sign.
pub fn argmax_sign(y: &[f64]) -> (usize, f64) {
    let mut best = 0;
    let mut bv = f64::NEG_INFINITY;
    for (k, v) in y.iter().enumerate() {
        if v.abs() > bv {
            bv = v.abs();
            best = k;
        }
    }
    let s = if y.get(best).copied().unwrap_or(0.0) < 0.0 { -1.0 } else { 1.0 };
    (best, s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedMomentEstimate {
    pub indices: Vec<u32>,
    pub n: usize,
    pub reps: usize,
    pub value: f64,
    pub std_error: f64,
}

/// Set partitions of `{0..r}` as (Moebius coefficient, block index sums).
fn partitions(ks: &[u32]) -> Vec<(f64, Vec<u32>)> {
    fn rec(i: usize, ks: &[u32], blocks: &mut Vec<Vec<usize>>, out: &mut Vec<(f64, Vec<u32>)>) {
        if i == ks.len() {
            let mut coef = 1.0;
            let mut sums = Vec::with_capacity(blocks.len());
            for b in blocks.iter() {
                let m = b.len();
                let fact: f64 = (1..m).map(|v| v as f64).product();
                coef *= if m % 2 == 1 { fact } else { -fact };
                sums.push(b.iter().map(|&s| ks[s]).sum());
            }
            out.push((coef, sums));
            return;
        }
        for j in 0..blocks.len() {
            blocks[j].push(i);
            rec(i + 1, ks, blocks, out);
            blocks[j].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, ks, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    rec(0, ks, &mut Vec::new(), &mut out);
    out
}

pub const MAX_MIXED_ORDER: usize = 8;

/// Per-replicate U-statistic: average of `prod_s y_{j_s}^{2 k_s}` over all
/// ordered tuples of distinct coordinates.
pub struct MixedMomentKernel {
    parts: Vec<(f64, Vec<u32>)>,
    max_power: u32,
    scale: f64,
}

impl MixedMomentKernel {
    pub fn new(indices: &[u32], n: usize) -> Result<Self> {
        if indices.is_empty() || indices.contains(&0) {
            return Err(Error::InvalidArgument("indices must be nonempty and >= 1".into()));
        }
        if indices.len() > MAX_MIXED_ORDER {
            return Err(Error::InvalidArgument(format!("at most {MAX_MIXED_ORDER} indices")));
        }
        if indices.len() > n {
            return Err(Error::InvalidArgument("more indices than coordinates".into()));
        }
        let falling: f64 = (0..indices.len()).map(|i| (n - i) as f64).product();
        Ok(MixedMomentKernel {
            parts: partitions(indices),
            max_power: indices.iter().sum(),
            scale: 1.0 / falling,
        })
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let mut p = vec![0.0; self.max_power as usize + 1];
        for &v in y {
            let v2 = v * v;
            let mut acc = 1.0;
            for slot in p.iter_mut().skip(1) {
                acc *= v2;
                *slot += acc;
            }
        }
        let mut total = 0.0;
        for (coef, sums) in &self.parts {
            total += coef * sums.iter().map(|&s| p[s as usize]).product::<f64>();
        }
        total * self.scale
    }
}

pub(crate) fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn mixed_moment(
    spec: &HeavyTailSpec,
    indices: &[u32],
    n: usize,
    reps: usize,
    stream: SeedStream,
) -> Result<MixedMomentEstimate> {
    spec.validate()?;
    if reps < 100 {
        return Err(Error::InvalidArgument("reps must be at least 100".into()));
    }
    let kernel = MixedMomentKernel::new(indices, n)?;
    let vals: Vec<f64> = (0..reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, rep| -> Result<f64> {
                let mut rng = stream.substream(rep as u64).rng();
                draw_unit(spec, &mut rng, buf)?;
                Ok(kernel.eval(buf))
            },
        )
        .collect::<Result<Vec<f64>>>()?;
    let (value, std_error) = mean_and_se(&vals);
    Ok(MixedMomentEstimate { indices: indices.to_vec(), n, reps, value, std_error })
}

/// `lim n^r beta_{2k_1..2k_r} = (a/2)^(r-1) Gamma(r) prod Gamma(k_j - a/2) / (Gamma(1-a/2)^r Gamma(sum k))`.
pub fn theoretical_mixed_moment_limit(alpha: f64, indices: &[u32]) -> Result<f64> {
    check_alpha(alpha)?;
    if indices.is_empty() || indices.contains(&0) {
        return Err(Error::InvalidArgument("indices must be nonempty and >= 1".into()));
    }
    let h = alpha / 2.0;
    let r = indices.len() as f64;
    let ksum: f64 = indices.iter().map(|&k| k as f64).sum();
    let mut lg = (r - 1.0) * h.ln() + ln_gamma(r) - r * ln_gamma(1.0 - h) - ln_gamma(ksum);
    for &k in indices {
        lg += ln_gamma(k as f64 - h);
    }
    Ok(lg.exp())
}
