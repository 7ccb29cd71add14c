//! Probability measures on the real line and their one-sided fractional-power
//! integrals `A(x)`, `B(x)` and the exponent-`(alpha/2 - 1)` companions.
//!
//! Singular kernels `|x - y|^beta` with `beta in (-1, 0)` are integrated after the
//! substitution `|x - y| = u^p`, `p = 2/alpha`, which turns the kernel times the
//! Jacobian into `p * u^(p(beta+1)-1)`: bounded for every `beta > -1`.
//! Semi-infinite tails are mapped onto finite intervals with a map matched to
//! the tail decay (exponential or power).

use crate::error::{check_alpha, Error, Result};
use crate::quad::{integrate, QuadValue, Tol};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Parametric families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Mass `1 - p` at `x0` and mass `p` at `x1`.
    TwoPoint { p: f64, x0: f64, x1: f64 },
    UniformUnit,
    Exponential { rate: f64 },
    /// Density `s y^(-s-1)` on `[1, inf)`.
    Pareto { shape: f64 },
    PointMass { b: f64 },
}

/// Lebesgue density with support `[lo, hi]` (ends may be infinite).
#[derive(Clone)]
pub struct Density {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lo: f64,
    hi: f64,
    knots: Vec<f64>,
    table: Option<Vec<(f64, f64)>>,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("knots", &self.knots.len())
            .field("table", &self.table.is_some())
            .finish()
    }
}

impl Density {
    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// The `(x, f(x))` table when the density is piecewise linear.
    pub fn table(&self) -> Option<&[(f64, f64)]> {
        self.table.as_deref()
    }

    pub fn eval(&self, y: f64) -> f64 {
        if y < self.lo || y > self.hi {
            0.0
        } else {
            (self.f)(y)
        }
    }
}

#[derive(Debug, Clone)]
pub enum Measure {
    /// Sorted atoms `(location, weight)`.
    Discrete(Vec<(f64, f64)>),
    PiecewiseDensity(Density),
    NamedFamily(Family),
    /// `base` with its mass outside `[-level, level]` moved to an atom at 0.
    Truncated { base: Box<Measure>, level: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalIntegrals {
    pub a_plus: f64,
    pub b_minus: f64,
    pub a_plus_dm1: f64,
    pub b_minus_dm1: f64,
}

const MASS_TOL: f64 = 1e-12;
const FUNC_MASS_TOL: f64 = 1e-10;

impl Measure {
    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Measure> {
        let m = Measure::Discrete(normalize_atoms(atoms)?);
        m.validate()?;
        Ok(m)
    }

    pub fn family(f: Family) -> Result<Measure> {
        let m = Measure::NamedFamily(f);
        m.validate()?;
        Ok(m)
    }

    pub fn two_point(p: f64, x0: f64, x1: f64) -> Result<Measure> {
        Measure::family(Family::TwoPoint { p, x0, x1 })
    }

    pub fn uniform_unit() -> Measure {
        Measure::NamedFamily(Family::UniformUnit)
    }

    pub fn exponential(rate: f64) -> Result<Measure> {
        Measure::family(Family::Exponential { rate })
    }

    pub fn pareto(shape: f64) -> Result<Measure> {
        Measure::family(Family::Pareto { shape })
    }

    pub fn point_mass(b: f64) -> Result<Measure> {
        Measure::family(Family::PointMass { b })
    }

    /// Density given by a closure on `[lo, hi]`; `knots` are interior points where
    /// the density is not smooth. Total mass is checked by quadrature to 1e-10.
    pub fn density_fn<F>(f: F, lo: f64, hi: f64, knots: Vec<f64>) -> Result<Measure>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidMeasure(format!("bad support [{lo}, {hi}]")));
        }
        let mut knots: Vec<f64> = knots.into_iter().filter(|k| *k > lo && *k < hi).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let m = Measure::PiecewiseDensity(Density { f: Arc::new(f), lo, hi, knots, table: None });
        m.validate()?;
        Ok(m)
    }

    /// Piecewise-linear density through the points `(x_k, f_k)`, rescaled to unit mass.
    pub fn density_table(points: Vec<(f64, f64)>) -> Result<Measure> {
        if points.len() < 2 {
            return Err(Error::InvalidMeasure("density table needs at least two points".into()));
        }
        for w in points.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidMeasure("table abscissae must increase strictly".into()));
            }
        }
        if points.iter().any(|(x, f)| !x.is_finite() || !f.is_finite() || *f < 0.0) {
            return Err(Error::InvalidMeasure("table values must be finite and nonnegative".into()));
        }
        let mass: f64 = points.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
        if !(mass > 0.0) {
            return Err(Error::InvalidMeasure("density table has zero mass".into()));
        }
        let pts: Vec<(f64, f64)> = points.iter().map(|(x, f)| (*x, f / mass)).collect();
        let lo = pts[0].0;
        let hi = pts[pts.len() - 1].0;
        let knots = pts[1..pts.len() - 1].iter().map(|p| p.0).collect();
        let table = pts.clone();
        let f = move |y: f64| interp(&pts, y);
        Ok(Measure::PiecewiseDensity(Density { f: Arc::new(f), lo, hi, knots, table: Some(table) }))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Measure::Discrete(atoms) => {
                if atoms.is_empty() {
                    return Err(Error::InvalidMeasure("no atoms".into()));
                }
                for w in atoms.windows(2) {
                    if !(w[0].0 < w[1].0) {
                        return Err(Error::InvalidMeasure("atom locations must be strictly sorted".into()));
                    }
                }
                if atoms.iter().any(|(x, w)| !x.is_finite() || !(*w > 0.0 && *w <= 1.0)) {
                    return Err(Error::InvalidMeasure("atoms need finite locations and weights in (0,1]".into()));
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > MASS_TOL {
                    return Err(Error::InvalidMeasure(format!("total mass {total} != 1")));
                }
                Ok(())
            }
            Measure::NamedFamily(f) => match *f {
                Family::TwoPoint { p, x0, x1 } => {
                    if !(0.0..=1.0).contains(&p) || !x0.is_finite() || !x1.is_finite() {
                        Err(Error::InvalidMeasure(format!("TwoPoint({p}, {x0}, {x1})")))
                    } else {
                        Ok(())
                    }
                }
                Family::UniformUnit => Ok(()),
                Family::Exponential { rate } if rate > 0.0 && rate.is_finite() => Ok(()),
                Family::Pareto { shape } if shape > 0.0 && shape.is_finite() => Ok(()),
                Family::PointMass { b } if b.is_finite() => Ok(()),
                other => Err(Error::InvalidMeasure(format!("{other:?}"))),
            },
            Measure::PiecewiseDensity(d) => {
                if d.table.is_some() {
                    return Ok(());
                }
                let parts = self.parts();
                let ac = parts.ac.as_ref().expect("density part");
                let mass = ac.mass_between(d.lo, d.hi);
                if (mass - 1.0).abs() > FUNC_MASS_TOL {
                    return Err(Error::InvalidMeasure(format!("density integrates to {mass}")));
                }
                Ok(())
            }
            Measure::Truncated { base, level } => {
                if !(*level > 0.0) {
                    return Err(Error::InvalidArgument(format!("truncation level {level} must be positive")));
                }
                base.validate()
            }
        }
    }

    /// Closed hull `[inf supp, sup supp]`.
    pub fn support(&self) -> (f64, f64) {
        let parts = self.parts();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (x, _) in &parts.atoms {
            lo = lo.min(*x);
            hi = hi.max(*x);
        }
        if let Some(ac) = &parts.ac {
            lo = lo.min(ac.lo);
            hi = hi.max(ac.hi);
        }
        (lo, hi)
    }

    /// Point masses of the measure, sorted by location.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.parts().atoms
    }

    pub fn is_degenerate(&self) -> bool {
        let parts = self.parts();
        parts.ac.is_none() && parts.atoms.len() == 1
    }

    pub fn has_density_part(&self) -> bool {
        self.parts().ac.is_some()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let parts = self.parts();
        let mut c: f64 = parts.atoms.iter().filter(|a| a.0 <= x).map(|a| a.1).sum();
        if let Some(ac) = &parts.ac {
            c += ac.mass_between(ac.lo, x);
        }
        c.clamp(0.0, 1.0)
    }

    /// Smallest `x` with `cdf(x) >= q`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) || q.is_nan() {
            return Err(Error::InvalidArgument(format!("quantile level {q} outside [0,1]")));
        }
        if let Measure::NamedFamily(f) = self {
            return Ok(match *f {
                Family::UniformUnit => q,
                Family::Exponential { rate } => -(-q).ln_1p() / rate,
                Family::Pareto { shape } => (1.0 - q).powf(-1.0 / shape),
                Family::PointMass { b } => b,
                Family::TwoPoint { p, x0, x1 } => {
                    let (a, wa, b) = if x0 <= x1 { (x0, 1.0 - p, x1) } else { (x1, p, x0) };
                    if q <= wa {
                        a
                    } else {
                        b
                    }
                }
            });
        }
        let parts = self.parts();
        if parts.ac.is_none() {
            let mut acc = 0.0;
            for (x, w) in &parts.atoms {
                acc += w;
                if acc >= q - 1e-15 {
                    return Ok(*x);
                }
            }
            return Ok(parts.atoms.last().map(|a| a.0).unwrap_or(0.0));
        }
        let (mut lo, mut hi) = self.effective_hull();
        while self.cdf(lo) >= q && lo > -1e300 {
            lo -= 1.0 + lo.abs();
        }
        while self.cdf(hi) < q && hi < 1e300 {
            hi += 1.0 + hi.abs();
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= q {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        for (x, _) in &parts.atoms {
            if (hi - x).abs() <= 1e-12 * (1.0 + x.abs()) {
                return Ok(*x);
            }
        }
        Ok(hi)
    }

    /// Finite window carrying all but ~1e-12 of the mass.
    pub fn effective_hull(&self) -> (f64, f64) {
        let (mut lo, mut hi) = self.support();
        if lo.is_infinite() || hi.is_infinite() {
            let parts = self.parts();
            let ac = parts.ac.as_ref().expect("infinite support implies a density part");
            if hi.is_infinite() {
                hi = ac.upper_cut(1e-12).max(parts.atoms.iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max));
            }
            if lo.is_infinite() {
                lo = ac.lower_cut(1e-12).min(parts.atoms.iter().map(|a| a.0).fold(f64::INFINITY, f64::min));
            }
        }
        (lo, hi)
    }

    /// `[int x nu, int x^2 nu, ..., int x^max_power nu]`.
    pub fn mean_and_power_moments(&self, max_power: usize) -> Result<Vec<f64>> {
        if max_power == 0 {
            return Err(Error::InvalidArgument("max_power must be at least 1".into()));
        }
        if let Measure::NamedFamily(f) = self {
            let mut out = Vec::with_capacity(max_power);
            for k in 1..=max_power {
                let kf = k as f64;
                out.push(match *f {
                    Family::TwoPoint { p, x0, x1 } => (1.0 - p) * x0.powi(k as i32) + p * x1.powi(k as i32),
                    Family::UniformUnit => 1.0 / (kf + 1.0),
                    Family::Exponential { rate } => statrs::function::gamma::gamma(kf + 1.0) / rate.powi(k as i32),
                    Family::Pareto { shape } => {
                        if shape <= kf {
                            return Err(Error::DivergentMoment {
                                order: k,
                                reason: format!("Pareto shape {shape} <= {k}"),
                            });
                        }
                        shape / (shape - kf)
                    }
                    Family::PointMass { b } => b.powi(k as i32),
                });
            }
            return Ok(out);
        }
        let parts = self.parts();
        let mut out = Vec::with_capacity(max_power);
        for k in 1..=max_power {
            let mut m: f64 = parts.atoms.iter().map(|(x, w)| w * x.powi(k as i32)).sum();
            if let Some(ac) = &parts.ac {
                if let Tail::Power(s) = ac.upper {
                    if s <= k as f64 {
                        return Err(Error::DivergentMoment { order: k, reason: format!("power tail index {s}") });
                    }
                }
                m += ac.integrate_weighted(|y| y.powi(k as i32), 1e-13);
            }
            out.push(m);
        }
        Ok(out)
    }

    /// `nu^(T)`: mass outside `[-T, T]` relocated to an atom at 0.
    pub fn truncate(&self, level: f64) -> Result<Measure> {
        if !(level > 0.0) || level.is_nan() {
            return Err(Error::InvalidArgument(format!("truncation level {level} must be positive")));
        }
        self.validate()?;
        let inside = |x: f64| x.abs() <= level;
        match self {
            Measure::Truncated { base, level: t0 } => Ok(Measure::Truncated { base: base.clone(), level: t0.min(level) }),
            Measure::Discrete(atoms) => Ok(Measure::Discrete(relocate(atoms, level)?)),
            Measure::NamedFamily(Family::PointMass { b }) => {
                Ok(Measure::NamedFamily(Family::PointMass { b: if inside(*b) { *b } else { 0.0 } }))
            }
            Measure::NamedFamily(Family::TwoPoint { x0, x1, .. }) if inside(*x0) && inside(*x1) => Ok(self.clone()),
            Measure::NamedFamily(Family::TwoPoint { .. }) => {
                let atoms = relocate(&self.atoms(), level)?;
                if atoms.len() == 1 {
                    Ok(Measure::NamedFamily(Family::PointMass { b: atoms[0].0 }))
                } else {
                    Ok(Measure::Discrete(atoms))
                }
            }
            _ => {
                let (lo, hi) = self.support();
                if inside(lo) && inside(hi) {
                    Ok(self.clone())
                } else {
                    Ok(Measure::Truncated { base: Box::new(self.clone()), level })
                }
            }
        }
    }

    /// `A(x)`, `B(x)` and their exponent-`(alpha/2 - 1)` versions.
    pub fn frac_integrals(&self, alpha: f64, x: f64) -> Result<FractionalIntegrals> {
        check_alpha(alpha)?;
        let parts = self.parts();
        parts.check_tail(alpha)?;
        Ok(parts.frac(alpha, x))
    }

    /// Complex integrals `(int (z-y)^(alpha/2-1) nu(dy), int (z-y)^(alpha/2) nu(dy))`
    /// on the principal branch. `z` must be off the real hull of the support.
    pub fn complex_power_integrals(&self, alpha: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
        check_alpha(alpha)?;
        let parts = self.parts();
        parts.check_tail(alpha)?;
        if z.im == 0.0 {
            let (lo, hi) = self.support();
            if z.re >= lo && z.re <= hi {
                return Err(Error::PointInSupport { re: z.re, im: z.im });
            }
        }
        Ok(parts.complex(alpha, z))
    }

    pub(crate) fn parts(&self) -> Parts<'_> {
        match self {
            Measure::Discrete(atoms) => Parts { atoms: atoms.clone(), ac: None },
            Measure::NamedFamily(f) => match *f {
                Family::TwoPoint { p, x0, x1 } => {
                    let mut atoms = Vec::new();
                    if x0 == x1 {
                        atoms.push((x0, 1.0));
                    } else {
                        if 1.0 - p > 0.0 {
                            atoms.push((x0, 1.0 - p));
                        }
                        if p > 0.0 {
                            atoms.push((x1, p));
                        }
                        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                    }
                    Parts { atoms, ac: None }
                }
                Family::PointMass { b } => Parts { atoms: vec![(b, 1.0)], ac: None },
                Family::UniformUnit => Parts {
                    atoms: vec![],
                    ac: Some(Ac { shape: Shape::Uniform, lo: 0.0, hi: 1.0, knots: vec![], lower: Tail::Finite, upper: Tail::Finite }),
                },
                Family::Exponential { rate } => Parts {
                    atoms: vec![],
                    ac: Some(Ac {
                        shape: Shape::Exp(rate),
                        lo: 0.0,
                        hi: f64::INFINITY,
                        knots: vec![],
                        lower: Tail::Finite,
                        upper: Tail::Exp(rate),
                    }),
                },
                Family::Pareto { shape } => Parts {
                    atoms: vec![],
                    ac: Some(Ac {
                        shape: Shape::Pareto(shape),
                        lo: 1.0,
                        hi: f64::INFINITY,
                        knots: vec![],
                        lower: Tail::Finite,
                        upper: Tail::Power(shape),
                    }),
                },
            },
            Measure::PiecewiseDensity(d) => Parts {
                atoms: vec![],
                ac: Some(Ac {
                    shape: Shape::Func(d),
                    lo: d.lo,
                    hi: d.hi,
                    knots: d.knots.clone(),
                    lower: if d.lo.is_finite() { Tail::Finite } else { Tail::Rational },
                    upper: if d.hi.is_finite() { Tail::Finite } else { Tail::Rational },
                }),
            },
            Measure::Truncated { base, level } => {
                let bp = base.parts();
                let t = *level;
                let mut atoms = Vec::new();
                let mut at_zero = 0.0;
                for (x, w) in bp.atoms {
                    if x.abs() <= t {
                        atoms.push((x, w));
                    } else {
                        at_zero += w;
                    }
                }
                let mut ac = None;
                if let Some(mut a) = bp.ac {
                    let lo = a.lo.max(-t);
                    let hi = a.hi.min(t);
                    let total = a.mass_between(a.lo, a.hi);
                    if lo < hi {
                        let kept = a.mass_between(lo, hi);
                        at_zero += (total - kept).max(0.0);
                        a.lo = lo;
                        a.hi = hi;
                        a.lower = Tail::Finite;
                        a.upper = Tail::Finite;
                        a.knots.retain(|k| *k > lo && *k < hi);
                        ac = Some(a);
                    } else {
                        at_zero += total;
                    }
                }
                if at_zero > 0.0 {
                    if let Some(slot) = atoms.iter_mut().find(|a| a.0 == 0.0) {
                        slot.1 += at_zero;
                    } else {
                        atoms.push((0.0, at_zero));
                        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                    }
                }
                Parts { atoms, ac }
            }
        }
    }
}

fn interp(pts: &[(f64, f64)], y: f64) -> f64 {
    let n = pts.len();
    if y < pts[0].0 || y > pts[n - 1].0 {
        return 0.0;
    }
    let k = pts.partition_point(|p| p.0 <= y);
    if k == 0 {
        return pts[0].1;
    }
    if k >= n {
        return pts[n - 1].1;
    }
    let (x0, f0) = pts[k - 1];
    let (x1, f1) = pts[k];
    f0 + (f1 - f0) * (y - x0) / (x1 - x0)
}

fn normalize_atoms(mut atoms: Vec<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
    if atoms.iter().any(|(x, w)| !x.is_finite() || !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidMeasure("atoms need finite locations and nonnegative weights".into()));
    }
    atoms.retain(|a| a.1 > 0.0);
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (x, w) in atoms {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => out.push((x, w)),
        }
    }
    Ok(out)
}

fn relocate(atoms: &[(f64, f64)], level: f64) -> Result<Vec<(f64, f64)>> {
    normalize_atoms(atoms.iter().map(|&(x, w)| if x.abs() <= level { (x, w) } else { (0.0, w) }).collect())
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Tail {
    Finite,
    Exp(f64),
    Power(f64),
    Rational,
}

#[derive(Clone, Copy)]
pub(crate) enum Shape<'a> {
    Uniform,
    Exp(f64),
    Pareto(f64),
    Func(&'a Density),
}

/// Absolutely continuous part restricted to `[lo, hi]`.
#[derive(Clone)]
pub(crate) struct Ac<'a> {
    shape: Shape<'a>,
    pub(crate) lo: f64,
    pub(crate) hi: f64,
    knots: Vec<f64>,
    lower: Tail,
    upper: Tail,
}

pub(crate) struct Parts<'a> {
    pub(crate) atoms: Vec<(f64, f64)>,
    pub(crate) ac: Option<Ac<'a>>,
}

/// Rescaled quadrature tolerance for fractional integrals.
const FRAC_TOL: f64 = 1e-12;

impl<'a> Ac<'a> {
    fn pdf(&self, y: f64) -> f64 {
        if !(y >= self.lo && y <= self.hi) {
            return 0.0;
        }
        match self.shape {
            Shape::Uniform => 1.0,
            Shape::Exp(r) => r * (-r * y).exp(),
            Shape::Pareto(s) => s * y.powf(-s - 1.0),
            Shape::Func(d) => d.eval(y),
        }
    }

    /// Mass of the unrestricted shape in `[a, b]` intersected with `[lo, hi]`.
    pub(crate) fn mass_between(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.lo);
        let b = b.min(self.hi);
        if !(a < b) {
            return 0.0;
        }
        match self.shape {
            Shape::Uniform => b - a,
            Shape::Exp(r) => (-r * a).exp() - (-r * b).exp(),
            Shape::Pareto(s) => a.powf(-s) - if b.is_finite() { b.powf(-s) } else { 0.0 },
            Shape::Func(_) => {
                let sub = Ac { lo: a, hi: b, lower: self.lower_for(a), upper: self.upper_for(b), ..self.clone() };
                sub.integrate_weighted(|_| 1.0, 1e-13)
            }
        }
    }

    fn lower_for(&self, a: f64) -> Tail {
        if a.is_finite() {
            Tail::Finite
        } else {
            self.lower
        }
    }

    fn upper_for(&self, b: f64) -> Tail {
        if b.is_finite() {
            Tail::Finite
        } else {
            self.upper
        }
    }

    fn upper_cut(&self, eps: f64) -> f64 {
        match self.upper {
            Tail::Finite => self.hi,
            Tail::Exp(r) => self.lo.max(0.0) - eps.ln() / r,
            Tail::Power(s) => eps.powf(-1.0 / s),
            Tail::Rational => {
                let mut x = self.lo.max(0.0) + 1.0;
                while self.mass_between(x, f64::INFINITY) > eps && x < 1e12 {
                    x = 2.0 * x + 1.0;
                }
                x
            }
        }
    }

    fn lower_cut(&self, eps: f64) -> f64 {
        match self.lower {
            Tail::Rational => {
                let mut x = self.hi.min(0.0) - 1.0;
                while self.mass_between(f64::NEG_INFINITY, x) > eps && x > -1e12 {
                    x = 2.0 * x - 1.0;
                }
                x
            }
            _ => self.lo,
        }
    }

    fn split_points(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![a];
        pts.extend(self.knots.iter().copied().filter(|k| *k > a && *k < b));
        pts.push(b);
        pts
    }

    /// `int g(y) pdf(y) dy` over the whole part; `g` must be smooth.
    pub(crate) fn integrate_weighted<G: Fn(f64) -> f64>(&self, g: G, rel: f64) -> f64 {
        let tol = Tol::rel(rel);
        let mut total = 0.0;
        let lo_f = if self.lo.is_finite() { self.lo } else { self.hi.min(0.0) - 1.0 };
        let hi_f = if self.hi.is_finite() { self.hi } else { self.lo.max(0.0) + 1.0 }.max(lo_f);
        let pts = self.split_points(lo_f, hi_f);
        for w in pts.windows(2) {
            total += integrate(|y| g(y) * self.pdf(y), w[0], w[1], tol).value;
        }
        if !self.hi.is_finite() {
            total += self.upper_tail(hi_f, 0.0, &|y: f64| g(y), tol);
        }
        if !self.lo.is_finite() {
            total += self.lower_tail(lo_f, &|y: f64| g(y), tol);
        }
        total
    }

    /// `int_c^inf k(y) pdf(y) dy` with a map matched to the upper tail; `grow` is
    /// the power growth of `|k|` used by the power-tail map.
    fn upper_tail<V: QuadValue>(&self, c: f64, grow: f64, k: &dyn Fn(f64) -> V, tol: Tol) -> V {
        match self.upper {
            Tail::Finite => V::default(),
            Tail::Exp(r) => integrate(
                |t: f64| {
                    let y = c - (-t).ln_1p() / r;
                    k(y) * (self.pdf(y) / (r * (1.0 - t)))
                },
                0.0,
                1.0,
                tol,
            )
            .value,
            Tail::Power(s) => {
                let q = s + 1.0 - grow;
                let kk = 1.0 / (q - 1.0);
                integrate(
                    |w: f64| {
                        let y = c * w.powf(-kk);
                        k(y) * (self.pdf(y) * kk * y / w)
                    },
                    0.0,
                    1.0,
                    tol,
                )
                .value
            }
            Tail::Rational => integrate(
                |t: f64| {
                    let s = 1.0 - t;
                    let y = c + t / s;
                    k(y) * (self.pdf(y) / (s * s))
                },
                0.0,
                1.0,
                tol,
            )
            .value,
        }
    }

    fn lower_tail<V: QuadValue>(&self, c: f64, k: &dyn Fn(f64) -> V, tol: Tol) -> V {
        match self.lower {
            Tail::Rational => integrate(
                |t: f64| {
                    let s = 1.0 - t;
                    let y = c - t / s;
                    k(y) * (self.pdf(y) / (s * s))
                },
                0.0,
                1.0,
                tol,
            )
            .value,
            _ => V::default(),
        }
    }

    /// Integral over the part of the support on one side of `x`
    /// (`side = +1`: `y >= x`; `side = -1`: `y <= x`) of `K(y) pdf(y)`.
    /// `near(u)` returns `K(x + side u^p) p u^(p-1)`; `far(y)` returns `K(y)`;
    /// `grow` is the power growth of `|K|` at infinity.
    fn side<V: QuadValue>(
        &self,
        x: f64,
        side: f64,
        p: f64,
        grow: f64,
        near: &dyn Fn(f64) -> V,
        far: &dyn Fn(f64) -> V,
        tol: Tol,
    ) -> V {
        let (start, end, tail) = if side > 0.0 {
            (self.lo.max(x), self.hi, self.upper)
        } else {
            (self.hi.min(x), self.lo, self.lower)
        };
        if side > 0.0 && !(start < end) || side < 0.0 && !(start > end) {
            return V::default();
        }
        let near_end = if end.is_finite() {
            end
        } else {
            let m = start;
            let len = match tail {
                Tail::Exp(r) => 8.0 / r,
                Tail::Power(_) => 1f64.max(m.abs()),
                _ => 1f64.max(m.abs()),
            };
            m + side * len
        };
        let d0 = (start - x).abs();
        let d1 = (near_end - x).abs();
        let mut us = vec![d0.powf(1.0 / p)];
        let (klo, khi) = if side > 0.0 { (start, near_end) } else { (near_end, start) };
        let mut inner: Vec<f64> = self
            .knots
            .iter()
            .copied()
            .filter(|k| *k > klo && *k < khi)
            .map(|k| (k - x).abs().powf(1.0 / p))
            .collect();
        inner.sort_by(f64::total_cmp);
        us.extend(inner);
        us.push(d1.powf(1.0 / p));
        let mut total = V::default();
        for w in us.windows(2) {
            if w[1] > w[0] {
                let r = integrate(|u: f64| near(u) * self.pdf(x + side * u.powf(p)), w[0], w[1], tol);
                total = total + r.value;
            }
        }
        if !end.is_finite() {
            if side > 0.0 {
                total = total + self.upper_tail(near_end, grow, far, tol);
            } else {
                total = total + self.lower_tail(near_end, far, tol);
            }
        }
        total
    }

    /// Real kernel `|y - x|^beta`.
    fn real_side(&self, x: f64, side: f64, alpha: f64, beta: f64) -> f64 {
        let p = 2.0 / alpha;
        let e = p * (beta + 1.0) - 1.0;
        let near = move |u: f64| if e == 0.0 { p } else { p * u.powf(e) };
        let far = move |y: f64| (y - x).abs().powf(beta);
        self.side(x, side, p, beta, &near, &far, Tol::rel(FRAC_TOL))
    }

    /// Complex kernel `(z - y)^beta`, anchored at `x = Re z`.
    fn complex_side(&self, z: Complex64, side: f64, alpha: f64, beta: f64) -> Complex64 {
        let p = 2.0 / alpha;
        let x = z.re;
        let v = z.im;
        let near = move |u: f64| {
            if u == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let d = u.powf(p);
            let w = Complex64::new(-side * d, v);
            cpow(w, beta) * (p * u.powf(p - 1.0))
        };
        let far = move |y: f64| cpow(Complex64::new(x - y, v), beta);
        self.side(x, side, p, beta, &near, &far, Tol::rel(FRAC_TOL))
    }
}

/// Principal-branch power `w^beta = exp(beta log w)`, cut on `(-inf, 0]`.
pub(crate) fn cpow(w: Complex64, beta: f64) -> Complex64 {
    (w.ln() * beta).exp()
}

impl<'a> Parts<'a> {
    pub(crate) fn check_tail(&self, alpha: f64) -> Result<()> {
        if let Some(ac) = &self.ac {
            if let Tail::Power(s) = ac.upper {
                if s <= alpha / 2.0 {
                    return Err(Error::DivergentIntegral { shape: s, half_alpha: alpha / 2.0 });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn frac(&self, alpha: f64, x: f64) -> FractionalIntegrals {
        let h = alpha / 2.0;
        let mut f = FractionalIntegrals { a_plus: 0.0, b_minus: 0.0, a_plus_dm1: 0.0, b_minus_dm1: 0.0 };
        for &(y, w) in &self.atoms {
            if y < x {
                let d = x - y;
                f.a_plus += w * d.powf(h);
                f.a_plus_dm1 += w * d.powf(h - 1.0);
            } else if y > x {
                let d = y - x;
                f.b_minus += w * d.powf(h);
                f.b_minus_dm1 += w * d.powf(h - 1.0);
            } else {
                f.a_plus_dm1 = f64::INFINITY;
                f.b_minus_dm1 = f64::INFINITY;
            }
        }
        if let Some(ac) = &self.ac {
            f.a_plus += ac.real_side(x, -1.0, alpha, h);
            f.b_minus += ac.real_side(x, 1.0, alpha, h);
            f.a_plus_dm1 += ac.real_side(x, -1.0, alpha, h - 1.0);
            f.b_minus_dm1 += ac.real_side(x, 1.0, alpha, h - 1.0);
        }
        f
    }

    /// Fractional integrals at `x = s + side w^p` with the exponent-`(alpha/2-1)`
    /// values multiplied by the Jacobian `p w^(p-1)`. An atom exactly at `s`
    /// contributes through exact powers of `w`, so `w` may be far below the
    /// spacing of doubles near `s`.
    pub(crate) fn frac_scaled(&self, alpha: f64, s: f64, side: f64, w: f64) -> FractionalIntegrals {
        let h = alpha / 2.0;
        let p = 2.0 / alpha;
        let d = w.powf(p);
        let jac = p * w.powf(p - 1.0);
        let mut f = FractionalIntegrals { a_plus: 0.0, b_minus: 0.0, a_plus_dm1: 0.0, b_minus_dm1: 0.0 };
        for &(y, wt) in &self.atoms {
            let (dist, below, exact) = if y == s {
                (d, side > 0.0, true)
            } else {
                let off = (y - s) - side * d;
                (off.abs(), off < 0.0, false)
            };
            let (a, a1) = if exact {
                (wt * w, wt * p)
            } else {
                (wt * dist.powf(h), wt * jac * dist.powf(h - 1.0))
            };
            if below {
                f.a_plus += a;
                f.a_plus_dm1 += a1;
            } else {
                f.b_minus += a;
                f.b_minus_dm1 += a1;
            }
        }
        if let Some(ac) = &self.ac {
            let x = s + side * d;
            f.a_plus += ac.real_side(x, -1.0, alpha, h);
            f.b_minus += ac.real_side(x, 1.0, alpha, h);
            f.a_plus_dm1 += jac * ac.real_side(x, -1.0, alpha, h - 1.0);
            f.b_minus_dm1 += jac * ac.real_side(x, 1.0, alpha, h - 1.0);
        }
        f
    }

    pub(crate) fn complex(&self, alpha: f64, z: Complex64) -> (Complex64, Complex64) {
        let h = alpha / 2.0;
        let mut dm1 = Complex64::new(0.0, 0.0);
        let mut d0 = Complex64::new(0.0, 0.0);
        for &(y, w) in &self.atoms {
            let base = z - y;
            dm1 += cpow(base, h - 1.0) * w;
            d0 += cpow(base, h) * w;
        }
        if let Some(ac) = &self.ac {
            dm1 += ac.complex_side(z, -1.0, alpha, h - 1.0) + ac.complex_side(z, 1.0, alpha, h - 1.0);
            d0 += ac.complex_side(z, -1.0, alpha, h) + ac.complex_side(z, 1.0, alpha, h);
        }
        (dm1, d0)
    }
}

/// Anything with a CDF that can be tabulated on a grid.
pub trait CdfSource {
    /// CDF values on an increasing grid.
    fn cdf_on_grid(&self, grid: &[f64]) -> Vec<f64>;
    /// Finite window carrying essentially all of the mass.
    fn window(&self) -> (f64, f64);
}

impl CdfSource for Measure {
    fn cdf_on_grid(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&x| self.cdf(x)).collect()
    }

    fn window(&self) -> (f64, f64) {
        self.effective_hull()
    }
}

pub const WEAK_GRID: usize = 2048;

/// Levy distance between two CDFs sampled on a shared 2048-point grid spanning
/// the union of the supports padded by 10%. Shifts are whole grid steps; the
/// result is capped at 1.
pub fn weak_distance<A: CdfSource + ?Sized, B: CdfSource + ?Sized>(nu1: &A, nu2: &B) -> f64 {
    let (a1, b1) = nu1.window();
    let (a2, b2) = nu2.window();
    let mut lo = a1.min(a2);
    let mut hi = b1.max(b2);
    let span = hi - lo;
    let pad = if span > 0.0 { 0.1 * span } else { 0.1 * (1.0 + lo.abs()) };
    lo -= pad;
    hi += pad;
    let grid: Vec<f64> = (0..WEAK_GRID).map(|j| lo + (hi - lo) * j as f64 / (WEAK_GRID - 1) as f64).collect();
    let f = nu1.cdf_on_grid(&grid);
    let g = nu2.cdf_on_grid(&grid);
    levy_on_grid(&f, &g, (hi - lo) / (WEAK_GRID - 1) as f64)
}

/// Smallest `eps = k h` (capped at 1) with `F(x - eps) - eps <= G(x) <= F(x + eps) + eps`
/// at every grid point, reading `F` as 0 below and 1 above the grid.
pub fn levy_on_grid(f: &[f64], g: &[f64], h: f64) -> f64 {
    let n = f.len();
    let ok = |k: usize| {
        let eps = k as f64 * h;
        (0..n).all(|j| {
            let below = if j >= k { f[j - k] } else { 0.0 };
            let above = if j + k < n { f[j + k] } else { 1.0 };
            below - eps <= g[j] + 1e-15 && g[j] <= above + eps + 1e-15
        })
    };
    let kmax = ((1.0 / h).ceil() as usize).min(n);
    if ok(0) {
        return 0.0;
    }
    if !ok(kmax) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0usize, kmax);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi as f64 * h).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp() -> Measure {
        Measure::two_point(0.5, 0.0, 1.0).unwrap()
    }

    #[test]
    fn two_point_frac_integrals() {
        let f = tp().frac_integrals(1.0, 0.5).unwrap();
        let a = 0.5 * 0.5f64.sqrt();
        let a1 = 0.5 / 0.5f64.sqrt();
        assert!((f.a_plus - a).abs() < 1e-15);
        assert!((f.b_minus - a).abs() < 1e-15);
        assert!((f.a_plus_dm1 - a1).abs() < 1e-15);
        assert!((f.b_minus_dm1 - a1).abs() < 1e-15);
    }

    #[test]
    fn point_mass_markers() {
        let f = Measure::point_mass(2.5).unwrap().frac_integrals(0.7, 2.5).unwrap();
        assert_eq!(f.a_plus, 0.0);
        assert_eq!(f.b_minus, 0.0);
        assert!(f.a_plus_dm1.is_infinite() && f.b_minus_dm1.is_infinite());
    }

    #[test]
    fn uniform_at_right_end() {
        let f = Measure::uniform_unit().frac_integrals(1.0, 1.0).unwrap();
        assert!((f.a_plus - 2.0 / 3.0).abs() < 1e-12, "{f:?}");
        assert_eq!(f.b_minus, 0.0);
        assert!((f.a_plus_dm1 - 2.0).abs() < 1e-12, "{f:?}");
        assert_eq!(f.b_minus_dm1, 0.0);
    }

    #[test]
    fn uniform_interior_closed_form() {
        // int_0^x (x-y)^b dy = x^(b+1)/(b+1)
        for &alpha in &[0.25, 0.5, 1.0, 1.5, 1.75] {
            let x: f64 = 0.3;
            let h = alpha / 2.0;
            let f = Measure::uniform_unit().frac_integrals(alpha, x).unwrap();
            let rel = |a: f64, b: f64| ((a - b) / b).abs();
            assert!(rel(f.a_plus, x.powf(h + 1.0) / (h + 1.0)) < 1e-11);
            assert!(rel(f.b_minus, (1.0 - x).powf(h + 1.0) / (h + 1.0)) < 1e-11);
            assert!(rel(f.a_plus_dm1, x.powf(h) / h) < 1e-11);
            assert!(rel(f.b_minus_dm1, (1.0 - x).powf(h) / h) < 1e-11);
        }
    }

    #[test]
    fn exponential_upper_closed_form() {
        // int_x^inf (y-x)^b e^-y dy = e^-x Gamma(1+b)
        let m = Measure::exponential(1.0).unwrap();
        for &x in &[0.5, 5.0, 50.0] {
            let f = m.frac_integrals(1.0, x).unwrap();
            let g = statrs::function::gamma::gamma;
            assert!(((f.b_minus - (-x as f64).exp() * g(1.5)) / f.b_minus).abs() < 1e-10, "x={x}");
            assert!(((f.b_minus_dm1 - (-x as f64).exp() * g(0.5)) / f.b_minus_dm1).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn pareto_upper_closed_form() {
        // x <= 1: int_1^inf (y-x)^b s y^(-s-1) dy, checked at x = 0 where it equals s/(s-b)
        let m = Measure::pareto(1.0).unwrap();
        let f = m.frac_integrals(1.0, 0.0).unwrap();
        assert!((f.b_minus - 1.0 / 0.5).abs() < 1e-10, "{f:?}");
        assert!((f.b_minus_dm1 - 1.0 / 1.5).abs() < 1e-10, "{f:?}");
        // x >= 1: upper part s x^(b-s) B(b+1, s-b)
        let x: f64 = 3.0;
        let b = 0.5;
        let beta = statrs::function::beta::beta(b + 1.0, 1.0 - b);
        let f = m.frac_integrals(1.0, x).unwrap();
        assert!(((f.b_minus - x.powf(b - 1.0) * beta) / f.b_minus).abs() < 1e-10, "{f:?}");
    }

    #[test]
    fn pareto_divergence_rejected() {
        let m = Measure::pareto(0.4).unwrap();
        assert!(matches!(m.frac_integrals(1.0, 2.0), Err(Error::DivergentIntegral { .. })));
        assert!(m.frac_integrals(0.5, 2.0).is_ok());
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(tp().truncate(2.0).unwrap().atoms(), tp().atoms());
        let t = Measure::pareto(1.0).unwrap().truncate(2.0).unwrap();
        let atoms = t.atoms();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].0, 0.0);
        assert!((atoms[0].1 - 0.5).abs() < 1e-15);
        assert!((t.cdf(2.0) - 1.0).abs() < 1e-15);
        assert!((t.cdf(1.5) - (0.5 + 1.0 - 1.0 / 1.5)).abs() < 1e-14);
        match Measure::point_mass(3.0).unwrap().truncate(1.0).unwrap() {
            Measure::NamedFamily(Family::PointMass { b }) => assert_eq!(b, 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nested_truncation_takes_min() {
        let t = Measure::exponential(1.0).unwrap().truncate(3.0).unwrap().truncate(5.0).unwrap();
        match t {
            Measure::Truncated { level, .. } => assert_eq!(level, 3.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn moments_examples() {
        assert_eq!(tp().mean_and_power_moments(2).unwrap(), vec![0.5, 0.5]);
        let u = Measure::uniform_unit().mean_and_power_moments(3).unwrap();
        assert_eq!(u, vec![0.5, 1.0 / 3.0, 0.25]);
        let e = Measure::exponential(1.0).unwrap().mean_and_power_moments(2).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-13);
        assert!(Measure::pareto(2.0).unwrap().mean_and_power_moments(2).is_err());
    }

    #[test]
    fn table_density_moments() {
        // triangular density on [0, 2] peaked at 1
        let m = Measure::density_table(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        let mm = m.mean_and_power_moments(2).unwrap();
        assert!((mm[0] - 1.0).abs() < 1e-12);
        assert!((mm[1] - 7.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn weak_distance_examples() {
        assert_eq!(weak_distance(&tp(), &tp()), 0.0);
        let u = Measure::uniform_unit();
        assert_eq!(weak_distance(&u, &u), 0.0);
        let d = weak_distance(&Measure::point_mass(0.0).unwrap(), &Measure::point_mass(1.0).unwrap());
        assert_eq!(d, 1.0);
    }

    #[test]
    fn complex_matches_real_above_support() {
        let m = Measure::uniform_unit();
        let (c1, c0) = m.complex_power_integrals(1.0, Complex64::new(2.0, 0.0)).unwrap();
        let f = m.frac_integrals(1.0, 2.0).unwrap();
        assert!((c1.re - f.a_plus_dm1).abs() < 1e-12 && c1.im.abs() < 1e-14);
        assert!((c0.re - f.a_plus).abs() < 1e-12 && c0.im.abs() < 1e-14);
    }

    #[test]
    fn real_point_inside_hull_rejected() {
        let m = tp();
        assert!(matches!(
            m.complex_power_integrals(1.0, Complex64::new(0.5, 0.0)),
            Err(Error::PointInSupport { .. })
        ));
    }

    #[test]
    fn quantiles() {
        assert_eq!(tp().quantile(0.45).unwrap(), 0.0);
        assert_eq!(tp().quantile(0.55).unwrap(), 1.0);
        let t = Measure::pareto(1.0).unwrap().truncate(2.0).unwrap();
        assert_eq!(t.quantile(0.3).unwrap(), 0.0);
        let q = t.quantile(0.75).unwrap();
        assert!((q - 4.0 / 3.0).abs() < 1e-12, "{q}");
    }
}
