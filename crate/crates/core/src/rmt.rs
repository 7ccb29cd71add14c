//! Sample correlation matrices `R = Y Y^T` built from self-normalized rows,
//! their spectra, resolvent diagonals of `Y^T Y`, and the slowly varying
//! (`alpha = 0`) constructions.

use crate::error::{Error, Result};
use crate::linalg::{gram_eigen, shifted_gram_inverse_diag, GramEigen};
use crate::rng::SeedStream;
use crate::sampler::{argmax_sign, draw_unit, HeavyTailSpec};
use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataMatrixSpec {
    pub p: usize,
    pub n: usize,
    pub xi: HeavyTailSpec,
}

impl DataMatrixSpec {
    pub fn new(p: usize, n: usize, xi: HeavyTailSpec) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::InvalidArgument("p and n must be positive".into()));
        }
        xi.validate()?;
        Ok(DataMatrixSpec { p, n, xi })
    }

    /// `p = round(gamma n)`, so `|p/n - gamma| <= 1/n`.
    pub fn with_gamma(gamma: f64, n: usize, xi: HeavyTailSpec) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        DataMatrixSpec::new((gamma * n as f64).round().max(1.0) as usize, n, xi)
    }

    pub fn gamma(&self) -> f64 {
        self.p as f64 / self.n as f64
    }
}

/// `p x n` row-major matrix whose rows have unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    pub p: usize,
    pub n: usize,
    pub y: Vec<f64>,
}

impl DataMatrix {
    /// Normalizes each row of a raw `p x n` matrix.
    pub fn from_raw(p: usize, n: usize, x: &[f64]) -> Result<DataMatrix> {
        if x.len() != p * n {
            return Err(Error::DimensionMismatch { expected: p * n, got: x.len() });
        }
        let mut y = Vec::with_capacity(p * n);
        for i in 0..p {
            let s = crate::sampler::self_normalize(&x[i * n..(i + 1) * n]).map_err(|_| Error::ZeroRow(i))?;
            y.extend(s.y);
        }
        Ok(DataMatrix { p, n, y })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.y[i * self.n..(i + 1) * self.n]
    }

    /// `R = Y Y^T` with its diagonal set to exactly one.
    pub fn correlation(&self) -> Vec<f64> {
        let p = self.p;
        let mut r = vec![0.0; p * p];
        for i in 0..p {
            r[i * p + i] = 1.0;
            for j in 0..i {
                let v: f64 = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum();
                r[i * p + j] = v;
                r[j * p + i] = v;
            }
        }
        r
    }

    /// `Y^T Y`.
    pub fn gram(&self) -> Vec<f64> {
        let (p, n) = (self.p, self.n);
        let mut g = vec![0.0; n * n];
        for i in 0..p {
            let r = self.row(i);
            for a in 0..n {
                for b in 0..n {
                    g[a * n + b] += r[a] * r[b];
                }
            }
        }
        g
    }
}

pub fn build_correlation_matrix(spec: &DataMatrixSpec, stream: SeedStream) -> Result<DataMatrix> {
    spec.xi.validate()?;
    let (p, n) = (spec.p, spec.n);
    let base = stream.derive("rows");
    let rows: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let mut row = vec![0.0; n];
            draw_unit(&spec.xi, &mut base.substream(i as u64).rng(), &mut row).map_err(|_| Error::ZeroRow(i))?;
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(DataMatrix { p, n, y: rows.concat() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Equal-width histogram over `[min, max]` padded by 1% on each side.
pub fn esd(eigs: &[f64], bins: usize) -> Result<Histogram> {
    if eigs.is_empty() || bins == 0 {
        return Err(Error::InvalidArgument("need at least one value and one bin".into()));
    }
    let lo = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo { 0.01 * (hi - lo) } else { 0.01 * lo.abs().max(1.0) };
    let (a, b) = (lo - pad, hi + pad);
    let h = (b - a) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| a + h * k as f64).collect();
    let mut counts = vec![0usize; bins];
    for &x in eigs {
        counts[(((x - a) / h) as usize).min(bins - 1)] += 1;
    }
    let m = eigs.len() as f64;
    Ok(Histogram { edges, masses: counts.into_iter().map(|c| c as f64 / m).collect() })
}

/// Bins `[k - 1/4, k + 1/4]` for `k = 0..=max_k`; values between bins are
/// left unassigned.
pub fn integer_histogram(values: &[f64], max_k: usize) -> Histogram {
    let mut edges = Vec::with_capacity(2 * max_k + 2);
    for k in 0..=max_k {
        edges.push(k as f64 - 0.25);
        edges.push(k as f64 + 0.25);
    }
    let mut counts = vec![0usize; max_k + 1];
    for &x in values {
        let k = x.round();
        if k >= 0.0 && (k as usize) <= max_k && (x - k).abs() <= 0.25 {
            counts[k as usize] += 1;
        }
    }
    let m = values.len().max(1) as f64;
    Histogram { edges, masses: counts.into_iter().map(|c| c as f64 / m).collect() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Eigenvalues of `R`, descending.
    pub eigenvalues: Vec<f64>,
    pub esd_histogram: Histogram,
    /// Trace of `R`, exactly `p`.
    pub trace: f64,
}

pub fn spectrum(y: &DataMatrix, bins: usize) -> Result<SpectrumResult> {
    let g = gram_eigen(y.p, y.n, &y.y)?;
    let esd_histogram = esd(&g.values, bins)?;
    Ok(SpectrumResult { eigenvalues: g.values, esd_histogram, trace: y.p as f64 })
}

fn check_off_axis(z: Complex64) -> Result<f64> {
    if z.im == 0.0 && z.re >= 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::PointOnSpectrumAxis { re: z.re, im: z.im });
    }
    Ok(if z.re <= 0.0 { z.norm() } else { z.im.abs() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventDiagnostics {
    pub z: Complex64,
    /// `B_n(z)_jj` for `j = 0..n`; their empirical measure is `nu_{z,n}`.
    pub diag_values: Vec<Complex64>,
}

/// `B_jj = sum_i v_ij^2 / (lambda_i - z) + (1 - sum_i v_ij^2) / (-z)` from
/// the nonzero spectrum of `Y^T Y`.
pub fn resolvent_diag_from_eigen(g: &GramEigen, z: Complex64) -> Vec<Complex64> {
    let n = g.cols;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut covered = vec![0.0f64; n];
    for (i, &lam) in g.values.iter().enumerate() {
        let v = &g.vectors[i * n..(i + 1) * n];
        if v.iter().all(|x| *x == 0.0) {
            continue;
        }
        let w = 1.0 / (lam - z);
        for j in 0..n {
            let s = v[j] * v[j];
            out[j] += w * s;
            covered[j] += s;
        }
    }
    let null = -1.0 / z;
    for j in 0..n {
        out[j] += null * (1.0 - covered[j]).max(0.0);
    }
    out
}

/// Diagonal of `(Y^T Y - z I)^(-1)`. Real negative `z` goes through a
/// Cholesky factorization, everything else through `gram_eigen`.
pub fn resolvent_diag(y: &DataMatrix, z: Complex64) -> Result<ResolventDiagnostics> {
    let dist = check_off_axis(z)?;
    let diag_values: Vec<Complex64> = if z.im == 0.0 {
        shifted_gram_inverse_diag(y.p, y.n, &y.y, -z.re)?.into_iter().map(|v| Complex64::new(v, 0.0)).collect()
    } else {
        resolvent_diag_from_eigen(&gram_eigen(y.p, y.n, &y.y)?, z)
    };
    let cap = (1.0 + 1e-9) / dist;
    if let Some(j) = diag_values.iter().position(|b| b.norm() > cap || !b.norm().is_finite()) {
        return Err(Error::Numerical(format!("|B_jj| exceeds 1/dist(z, R+) at j = {j}")));
    }
    if z.im == 0.0 && diag_values.iter().any(|b| b.re <= 0.0) {
        return Err(Error::Numerical("nonpositive resolvent diagonal at real negative z".into()));
    }
    Ok(ResolventDiagnostics { z, diag_values })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingResult {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
}

/// `lhs = (1/p) tr (Y Y^T - z)^(-1)`, using
/// `tr (Y Y^T - z)^(-1) = tr (Y^T Y - z)^(-1) + (p - n)/(-z)`;
/// `rhs = -mean((1+B_jj)^(a/2-1)) / (z mean((1+B_jj)^(a/2)))`.
pub fn embedding_from_diag(p: usize, alpha: f64, d: &ResolventDiagnostics) -> EmbeddingResult {
    let z = d.z;
    let n = d.diag_values.len();
    let tr: Complex64 = d.diag_values.iter().sum::<Complex64>() + (p as f64 - n as f64) * (-1.0 / z);
    let lhs = tr / p as f64;
    let h = alpha / 2.0;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    for b in &d.diag_values {
        let w = (Complex64::new(1.0, 0.0) + b).ln();
        num += ((h - 1.0) * w).exp();
        den += (h * w).exp();
    }
    let rhs = -num / (z * den);
    EmbeddingResult { lhs, rhs, gap: (lhs - rhs).norm() }
}

pub fn embedding_check(spec: &DataMatrixSpec, z: Complex64, stream: SeedStream) -> Result<EmbeddingResult> {
    check_off_axis(z)?;
    let alpha = match spec.xi.alpha() {
        Some(a) if a > 0.0 && a < 2.0 => a,
        _ => return Err(Error::InvalidAlpha(spec.xi.alpha().unwrap_or(f64::NAN))),
    };
    let y = build_correlation_matrix(spec, stream)?;
    let d = resolvent_diag(&y, z)?;
    Ok(embedding_from_diag(spec.p, alpha, &d))
}

/// Mean over seeds of the fraction of eigenvalues of `R` in
/// `[u - w, u + w]`, one entry per window half-width `w`.
pub fn atom_probe_esd_windows(spec: &DataMatrixSpec, u: f64, windows: &[f64], seeds: usize, stream: SeedStream) -> Result<Vec<f64>> {
    if !(u > 0.0) {
        return Err(Error::InvalidArgument(format!("probe point must be positive, got {u}")));
    }
    if windows.iter().any(|w| !(*w > 0.0)) || seeds == 0 {
        return Err(Error::InvalidArgument("windows must be positive and seeds >= 1".into()));
    }
    let per_seed: Vec<Vec<f64>> = (0..seeds)
        .into_par_iter()
        .map(|s| -> Result<Vec<f64>> {
            let y = build_correlation_matrix(spec, stream.substream(s as u64))?;
            let g = gram_eigen(y.p, y.n, &y.y)?;
            let p = g.values.len() as f64;
            Ok(windows
                .iter()
                .map(|w| g.values.iter().filter(|l| (**l - u).abs() <= *w).count() as f64 / p)
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..windows.len()).map(|k| per_seed.iter().map(|v| v[k]).sum::<f64>() / seeds as f64).collect())
}

pub fn atom_probe_esd(spec: &DataMatrixSpec, u: f64, window: f64, seeds: usize, stream: SeedStream) -> Result<f64> {
    Ok(atom_probe_esd_windows(spec, u, &[window], seeds, stream)?[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alpha0Result {
    pub esd_r: Histogram,
    pub esd_rtilde: Histogram,
    /// Diagonal of `T = Z^T Z`: column occupancy counts, summing to `p`.
    pub multinomial_diag: Vec<u64>,
    pub eigenvalues_r: Vec<f64>,
    pub eigenvalues_rtilde: Vec<f64>,
}

/// `Z` has row `i` equal to `sign(Y_{i k_i}) e_{k_i}` with `k_i` the argmax
/// of `|Y_i.|`; returns the occupancy counts of the `k_i`.
pub fn occupancy(y: &DataMatrix) -> Vec<u64> {
    let mut counts = vec![0u64; y.n];
    for i in 0..y.p {
        counts[argmax_sign(y.row(i)).0] += 1;
    }
    counts
}

/// Eigenvalues of `R~ = Z Z^T`: the nonzero counts, padded with zeros to `p`.
pub fn rtilde_eigenvalues(counts: &[u64], p: usize) -> Vec<f64> {
    let mut ev: Vec<f64> = counts.iter().filter(|c| **c > 0).map(|c| *c as f64).collect();
    ev.resize(p, 0.0);
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

pub fn alpha0_construction(spec: &DataMatrixSpec, max_k: usize, stream: SeedStream) -> Result<Alpha0Result> {
    let y = build_correlation_matrix(spec, stream)?;
    let counts = occupancy(&y);
    let eigenvalues_rtilde = rtilde_eigenvalues(&counts, y.p);
    let eigenvalues_r = gram_eigen(y.p, y.n, &y.y)?.values;
    Ok(Alpha0Result {
        esd_r: integer_histogram(&eigenvalues_r, max_k),
        esd_rtilde: integer_histogram(&eigenvalues_rtilde, max_k),
        multinomial_diag: counts,
        eigenvalues_r,
        eigenvalues_rtilde,
    })
}

/// `H_{0,gamma}({0}) = 1 - 1/gamma + e^-gamma / gamma`,
/// `H_{0,gamma}({k}) = e^-gamma gamma^(k-1) / k!`.
pub fn zero_inflated_poisson_mass(gamma: f64, k: usize) -> f64 {
    let g = gamma;
    if k == 0 {
        1.0 - 1.0 / g + (-g).exp() / g
    } else {
        let lf: f64 = (1..=k).map(|v| (v as f64).ln()).sum();
        ((k as f64 - 1.0) * g.ln() - g - lf).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyProximity {
    /// `2 (1 - (1/p) sum_i |Y_{i k_i}|)`.
    pub value: f64,
    /// `(1/p) ||Y - Z||_F^2` computed entrywise.
    pub direct: f64,
}

pub fn levy_proximity(y: &DataMatrix) -> Result<LevyProximity> {
    let p = y.p as f64;
    let mut top = 0.0;
    let mut direct = 0.0;
    for i in 0..y.p {
        let r = y.row(i);
        let (k, s) = argmax_sign(r);
        top += r[k].abs();
        for (j, v) in r.iter().enumerate() {
            let zij = if j == k { s } else { 0.0 };
            direct += (v - zij) * (v - zij);
        }
    }
    let value = 2.0 * (1.0 - top / p);
    let direct = direct / p;
    if (value - direct).abs() > 1e-10 {
        return Err(Error::Numerical(format!("Frobenius identity off by {:e}", (value - direct).abs())));
    }
    Ok(LevyProximity { value, direct })
}

pub fn levy_proximity_check(spec: &DataMatrixSpec, stream: SeedStream) -> Result<LevyProximity> {
    levy_proximity(&build_correlation_matrix(spec, stream)?)
}
