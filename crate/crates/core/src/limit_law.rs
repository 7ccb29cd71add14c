//! The limit law `mu_{nu,alpha}` of the diagonal quadratic form: Stieltjes
//! transform, moments, density, CDF, atom probe, tail asymptotics and the
//! `alpha -> 0` / `alpha -> 2` boundary laws.

use crate::error::{check_alpha, Error, Result};
use crate::measure::{CdfSource, FractionalIntegrals, Measure, Parts};
use crate::quad::{integrate, Tol};
use num_complex::Complex64;
use statrs::function::beta::beta;
use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::PI;

pub const MAX_MOMENT_ORDER: usize = 20;
pub const DEFAULT_V_SEQUENCE: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Debug, Clone)]
pub struct LimitLaw {
    nu: Measure,
    alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    AlphaTo0,
    AlphaTo2,
}

const CDF_TOL: f64 = 1e-11;

impl LimitLaw {
    pub fn new(nu: Measure, alpha: f64) -> Result<LimitLaw> {
        check_alpha(alpha)?;
        nu.validate()?;
        nu.parts().check_tail(alpha)?;
        Ok(LimitLaw { nu, alpha })
    }

    pub fn nu(&self) -> &Measure {
        &self.nu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Open interval `K_nu = (inf supp nu, sup supp nu)`.
    pub fn k_nu(&self) -> (f64, f64) {
        self.nu.support()
    }

    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        if z.re.is_nan() || z.im.is_nan() {
            return Err(Error::InvalidArgument("z is NaN".into()));
        }
        let (dm1, d0) = self.nu.complex_power_integrals(self.alpha, z)?;
        if d0.norm() == 0.0 || !d0.norm().is_finite() {
            return Err(Error::Numerical(format!("Stieltjes denominator {d0} at z = {z}")));
        }
        Ok(-dm1 / d0)
    }

    pub fn moment(&self, ell: usize) -> Result<f64> {
        if ell == 0 {
            return Err(Error::InvalidArgument("moment order must be at least 1".into()));
        }
        if ell > MAX_MOMENT_ORDER {
            return Err(Error::DivergentCost(ell));
        }
        let m = self.nu.mean_and_power_moments(ell)?;
        let h = self.alpha / 2.0;
        let lg1 = ln_gamma(1.0 - h);
        // c_k = Gamma(k - h) / (Gamma(1 - h) k!) * int x^k nu
        let c: Vec<f64> = (1..=ell)
            .map(|k| (ln_gamma(k as f64 - h) - lg1 - ln_gamma(k as f64 + 1.0)).exp() * m[k - 1])
            .collect();
        let mut by_r = vec![0.0; ell + 1];
        let gaps = ell - 1;
        for mask in 0u32..(1u32 << gaps) {
            let mut prod = 1.0;
            let mut run = 1usize;
            let mut r = 1usize;
            for g in 0..gaps {
                if mask >> g & 1 == 1 {
                    prod *= c[run - 1];
                    run = 1;
                    r += 1;
                } else {
                    run += 1;
                }
            }
            prod *= c[run - 1];
            by_r[r] += prod;
        }
        let mut total = 0.0;
        for (r, s) in by_r.iter().enumerate().skip(1) {
            total += h.powi(r as i32 - 1) * ell as f64 / r as f64 * s;
        }
        Ok(total)
    }

    fn check_density(&self) -> Result<()> {
        if self.nu.is_degenerate() {
            Err(Error::DegenerateMeasure)
        } else {
            Ok(())
        }
    }

    fn assemble(&self, f: &FractionalIntegrals) -> f64 {
        let s = (self.alpha * PI / 2.0).sin() / PI;
        let c = (self.alpha * PI / 2.0).cos();
        let prod = |a: f64, b: f64| if a == 0.0 || b == 0.0 { 0.0 } else { a * b };
        let num = prod(f.a_plus, f.b_minus_dm1) + prod(f.b_minus, f.a_plus_dm1);
        let den = f.a_plus * f.a_plus + f.b_minus * f.b_minus + 2.0 * c * f.a_plus * f.b_minus;
        if num.is_infinite() {
            return f64::INFINITY;
        }
        s * num / den
    }

    /// Density; `+inf` at atoms of `nu` inside `K_nu`, zero outside `K_nu`.
    pub fn density(&self, x: f64) -> Result<f64> {
        self.check_density()?;
        let (lo, hi) = self.k_nu();
        if !(x > lo && x < hi) {
            return Ok(0.0);
        }
        Ok(self.assemble(&self.nu.frac_integrals(self.alpha, x)?))
    }

    /// Singular points of the density (finite ends of `K_nu`, atoms of `nu`).
    fn singular_points(&self) -> Vec<f64> {
        let (lo, hi) = self.k_nu();
        let mut pts: Vec<f64> = Vec::new();
        if lo.is_finite() {
            pts.push(lo);
        }
        for (x, _) in self.nu.atoms() {
            if x > lo && x < hi {
                pts.push(x);
            }
        }
        if hi.is_finite() {
            pts.push(hi);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Mass of the density on `[a, b]` with the singular-endpoint substitution
    /// `y = P +/- w^(2/alpha)` around the nearest singular point `P`.
    fn mass_on(&self, parts: &Parts<'_>, sing: &[f64], a: f64, b: f64, g: &dyn Fn(f64) -> f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        let h = self.alpha / 2.0;
        let p_exp = 2.0 / self.alpha;
        let tol = Tol::rel(CDF_TOL);
        let scaled = |s: f64, side: f64, w: f64| {
            let f = self.assemble(&parts.frac_scaled(self.alpha, s, side, w));
            if f == 0.0 {
                0.0
            } else {
                f * g(s + side * w.powf(p_exp))
            }
        };
        let plain = |y: f64| {
            let f = self.assemble(&parts.frac(self.alpha, y));
            if f == 0.0 {
                0.0
            } else {
                f * g(y)
            }
        };
        let plain_to = |lo: f64, hi: f64| {
            if hi.is_finite() {
                integrate(plain, lo, hi, tol).value
            } else {
                integrate(
                    |t: f64| {
                        let s = 1.0 - t;
                        plain(lo + t / s) / (s * s)
                    },
                    0.0,
                    1.0,
                    tol,
                )
                .value
            }
        };
        // Each singular point owns a neighbourhood; the rest is smooth.
        let mut cuts: Vec<(f64, Anchor)> = Vec::new();
        if sing.is_empty() {
            return plain_to(a, b);
        }
        let reach = |i: usize, dir: f64| -> f64 {
            let p = sing[i];
            if dir > 0.0 {
                if i + 1 < sing.len() {
                    0.5 * (p + sing[i + 1])
                } else {
                    p + 1f64.max(p.abs())
                }
            } else if i > 0 {
                0.5 * (p + sing[i - 1])
            } else {
                p - 1f64.max(p.abs())
            }
        };
        for i in 0..sing.len() {
            cuts.push((reach(i, -1.0), Anchor::Right(sing[i])));
            cuts.push((sing[i], Anchor::Left(sing[i])));
        }
        let last = sing.len() - 1;
        cuts.push((reach(last, 1.0), Anchor::Free));
        // cuts[k].0 starts a region handled by cuts[k].1 until cuts[k+1].0
        let mut total = 0.0;
        let first_start = cuts[0].0;
        if a < first_start {
            total += plain_to(a, b.min(first_start));
        }
        for k in 0..cuts.len() {
            let start = cuts[k].0;
            let end = if k + 1 < cuts.len() { cuts[k + 1].0 } else { f64::INFINITY };
            let lo = a.max(start);
            let hi = b.min(end);
            if !(lo < hi) {
                continue;
            }
            total += match cuts[k].1 {
                Anchor::Left(p) => {
                    integrate(|w: f64| scaled(p, 1.0, w), (lo - p).powf(h), (hi - p).powf(h), tol).value
                }
                Anchor::Right(p) => {
                    integrate(|w: f64| scaled(p, -1.0, w), (p - hi).powf(h), (p - lo).powf(h), tol).value
                }
                Anchor::Free => plain_to(lo, hi),
            };
        }
        total
    }

    fn lower_start(&self) -> f64 {
        let (lo, _) = self.k_nu();
        if lo.is_finite() {
            lo
        } else {
            self.nu.effective_hull().0
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_sorted(&[x])?[0])
    }

    /// CDF at nondecreasing points, integrating cumulatively between them.
    pub fn cdf_sorted(&self, xs: &[f64]) -> Result<Vec<f64>> {
        self.check_density()?;
        if xs.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidArgument("cdf_sorted needs nondecreasing finite points".into()));
        }
        let parts = self.nu.parts();
        let sing = self.singular_points();
        let (_, hi) = self.k_nu();
        let mut prev = self.lower_start();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(xs.len());
        for &x in xs {
            let x_eff = x.min(hi);
            if x_eff > prev {
                acc += self.mass_on(&parts, &sing, prev, x_eff, &|_| 1.0);
                prev = x_eff;
            }
            out.push(acc.clamp(0.0, 1.0));
        }
        Ok(out)
    }

    /// `int g(x) f(x) dx` over `K_nu`; `g` must be smooth and integrable against `f`.
    pub fn integrate_against(&self, g: &dyn Fn(f64) -> f64) -> Result<f64> {
        self.check_density()?;
        let parts = self.nu.parts();
        let sing = self.singular_points();
        let (_, hi) = self.k_nu();
        Ok(self.mass_on(&parts, &sing, self.lower_start(), hi, g))
    }

    /// `lim (a - z) s(z)` along `z = a + i v`, Aitken-extrapolated from the last
    /// three points of `v_sequence`.
    pub fn atom_mass(&self, a: f64, v_sequence: Option<&[f64]>) -> Result<f64> {
        let vs = v_sequence.unwrap_or(&DEFAULT_V_SEQUENCE);
        if vs.len() < 3 || vs.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidArgument("v_sequence needs at least three positive values".into()));
        }
        let mut seq = Vec::with_capacity(vs.len());
        for &v in vs {
            let z = Complex64::new(a, v);
            seq.push((Complex64::new(a, 0.0) - z) * self.stieltjes(z)?);
        }
        let n = seq.len();
        let (x1, x2, x3) = (seq[n - 3], seq[n - 2], seq[n - 1]);
        let d1 = x2 - x1;
        let d2 = x3 - x2;
        let den = d2 - d1;
        let lim = if den.norm() <= 1e-14 * (x3.norm() + 1e-300) {
            x3
        } else {
            x3 - d2 * d2 / den
        };
        let m = lim.norm();
        if !m.is_finite() {
            return Err(Error::PointInSupport { re: a, im: 0.0 });
        }
        Ok(m.min(1.0))
    }

    /// Leading-order density as `x -> inf` for exponential or Pareto `nu`.
    pub fn tail_asymptote(&self, x: f64) -> Result<f64> {
        use crate::measure::Family;
        let h = self.alpha / 2.0;
        match &self.nu {
            Measure::NamedFamily(Family::Exponential { rate }) => {
                let t = rate * x;
                Ok(rate * t.powf(-h) * (-t).exp() / gamma(1.0 - h))
            }
            Measure::NamedFamily(Family::Pareto { shape: s }) => {
                let coef = s / PI * (self.alpha * PI / 2.0).sin() * (beta(h, s + 1.0 - h) + beta(h + 1.0, s - h));
                Ok(coef * x.powf(-s - 1.0))
            }
            other => Err(Error::UnsupportedFamily(format!("tail asymptote needs Exponential or Pareto nu, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Anchor {
    Left(f64),
    Right(f64),
    Free,
}

impl CdfSource for LimitLaw {
    fn cdf_on_grid(&self, grid: &[f64]) -> Vec<f64> {
        self.cdf_sorted(grid).unwrap_or_else(|_| self.nu.cdf_on_grid(grid))
    }

    fn window(&self) -> (f64, f64) {
        self.nu.effective_hull()
    }
}

/// Weak limits as `alpha -> 2` (point mass at the mean) and `alpha -> 0` (`nu`).
pub fn boundary_law(nu: &Measure, which: Boundary) -> Result<Measure> {
    match which {
        Boundary::AlphaTo0 => Ok(nu.clone()),
        Boundary::AlphaTo2 => {
            let mean = nu.mean_and_power_moments(1)?[0];
            Measure::point_mass(mean)
        }
    }
}
