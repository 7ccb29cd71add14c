//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.
//!
//! Integrands must be bounded on the closed interval; callers remove endpoint
//! singularities by substitution before reaching this layer.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub trait QuadValue: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { abs: 1e-300, rel: 1e-12, max_intervals: 4000 }
    }
}

impl Tol {
    pub fn rel(rel: f64) -> Self {
        Tol { rel, ..Tol::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<V> {
    pub value: V,
    pub error: f64,
    pub converged: bool,
}

fn kronrod<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).magnitude())
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over `[a, b]` (either orientation; empty if `a == b`).
pub fn integrate<V: QuadValue, F: Fn(f64) -> V>(f: F, a: f64, b: f64, tol: Tol) -> QuadResult<V> {
    if a == b {
        return QuadResult { value: V::default(), error: 0.0, converged: true };
    }
    if b < a {
        let r = integrate_forward(&f, b, a, tol);
        return QuadResult { value: r.value * -1.0, ..r };
    }
    integrate_forward(&f, a, b, tol)
}

fn integrate_forward<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64, tol: Tol) -> QuadResult<V> {
    let (v0, e0) = kronrod(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v0, error: e0 });
    let mut total = v0;
    let mut total_err = e0;
    let mut count = 1;
    loop {
        let target = tol.abs.max(tol.rel * total.magnitude());
        if total_err <= target || !total_err.is_finite() {
            break;
        }
        if count >= tol.max_intervals {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // interval exhausted at machine resolution
            heap.push(Panel { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let (vl, el) = kronrod(f, worst.a, m);
        let (vr, er) = kronrod(f, m, worst.b);
        total = total - worst.value + vl + vr;
        total_err += el + er - worst.error;
        heap.push(Panel { a: worst.a, b: m, value: vl, error: el });
        heap.push(Panel { a: m, b: worst.b, value: vr, error: er });
        count += 1;
    }
    // resum to shed drift from incremental updates
    let mut value = V::default();
    let mut error = 0.0;
    for p in heap.iter() {
        value = value + p.value;
        error += p.error;
    }
    let converged = error <= tol.abs.max(tol.rel * value.magnitude());
    QuadResult { value, error, converged }
}

/// Integrate across consecutive breakpoints, summing the pieces.
pub fn integrate_pieces<V: QuadValue, F: Fn(f64) -> V>(f: F, knots: &[f64], tol: Tol) -> QuadResult<V> {
    let mut value = V::default();
    let mut error = 0.0;
    let mut converged = true;
    for w in knots.windows(2) {
        let r = integrate(&f, w[0], w[1], tol);
        value = value + r.value;
        error += r.error;
        converged &= r.converged;
    }
    QuadResult { value, error, converged }
}
