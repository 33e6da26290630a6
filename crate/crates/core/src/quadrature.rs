//! Quadrature rules: Gauss–Legendre, adaptive Gauss–Kronrod (7/15) with
//! breakpoints and semi-infinite tails, and the uniform trapezoid rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::num::Real;

/// Values that can be integrated: real scalars and complex numbers.
pub trait Integrand<T: Real>:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> T;
}

impl<T: Real> Integrand<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn magnitude(&self) -> T {
        self.abs()
    }
}

impl<T: Real> Integrand<T> for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn magnitude(&self) -> T {
        self.norm()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Roots are polished by Newton iteration in `f64` and converted afterwards.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0, "gauss_legendre: zero nodes");
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (
        x.into_iter().map(T::lit).collect(),
        w.into_iter().map(T::lit).collect(),
    )
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on<T: Real>(n: usize, a: T, b: T) -> Vec<(T, T)> {
    let (x, w) = gauss_legendre::<T>(n);
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    x.into_iter()
        .zip(w)
        .map(|(xi, wi)| (mid + half * xi, wi * half))
        .collect()
}

/// Uniform-spacing trapezoid rule.
pub fn trapezoid<T: Real, V: Integrand<T>>(values: &[V], dx: T) -> V {
    match values.len() {
        0 | 1 => V::zero(),
        n => {
            let half = T::lit(0.5);
            let inner = values[1..n - 1].iter().fold(V::zero(), |acc, &v| acc + v);
            (inner + (values[0] + values[n - 1]) * half) * dx
        }
    }
}

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
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for the adaptive integrator. Convergence is declared when the
/// summed error estimate drops below `max(abs_tol, rel_tol * |I|)`.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_panels: usize,
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::zero(),
            rel_tol: T::lit(1e-10),
            max_panels: 4000,
        }
    }
}

impl<T: Real> Tolerance<T> {
    pub fn absolute(abs_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol: T::zero(),
            ..Self::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Estimate<V, T> {
    pub value: V,
    pub error: T,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
enum Map<T> {
    Identity,
    /// x = origin + scale * t / (1 - t), t in [0, 1)
    Right { origin: T, scale: T },
    /// x = origin - scale * t / (1 - t), t in [0, 1)
    Left { origin: T, scale: T },
}

impl<T: Real> Map<T> {
    #[inline]
    fn apply(self, t: T) -> (T, T) {
        match self {
            Map::Identity => (t, T::one()),
            Map::Right { origin, scale } => {
                let s = T::one() - t;
                (origin + scale * t / s, scale / (s * s))
            }
            Map::Left { origin, scale } => {
                let s = T::one() - t;
                (origin - scale * t / s, scale / (s * s))
            }
        }
    }
}

struct Panel<T, V> {
    lo: T,
    hi: T,
    map: Map<T>,
    value: V,
    error: T,
}

impl<T: Real, V> PartialEq for Panel<T, V> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real, V> Eq for Panel<T, V> {}
impl<T: Real, V> PartialOrd for Panel<T, V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real, V> Ord for Panel<T, V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            // deterministic tie-break
            .then_with(|| other.lo.partial_cmp(&self.lo).unwrap_or(Ordering::Equal))
    }
}

fn kronrod<T, V, F>(f: &F, lo: T, hi: T, map: Map<T>) -> (V, T)
where
    T: Real,
    V: Integrand<T>,
    F: Fn(T) -> V,
{
    let half = (hi - lo) / T::lit(2.0);
    let mid = (hi + lo) / T::lit(2.0);
    let eval = |t: T| {
        let (x, jac) = map.apply(t);
        f(x) * jac
    };
    let fc = eval(mid);
    let mut gauss = fc * T::lit(WG[3]);
    let mut kron = fc * T::lit(WGK[7]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = eval(mid - dx) + eval(mid + dx);
        kron = kron + pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).magnitude())
}

fn run_adaptive<T, V, F>(f: F, seeds: Vec<(T, T, Map<T>)>, tol: Tolerance<T>) -> Estimate<V, T>
where
    T: Real,
    V: Integrand<T>,
    F: Fn(T) -> V,
{
    let mut heap = BinaryHeap::new();
    for (lo, hi, map) in seeds {
        if hi > lo {
            let (value, error) = kronrod(&f, lo, hi, map);
            heap.push(Panel { lo, hi, map, value, error });
        }
    }
    let total = |heap: &BinaryHeap<Panel<T, V>>| {
        heap.iter().fold((V::zero(), T::zero()), |(v, e), p| (v + p.value, e + p.error))
    };
    loop {
        let (value, error) = total(&heap);
        let target = tol.abs_tol.max(tol.rel_tol * value.magnitude());
        if error <= target {
            return Estimate { value, error, converged: true };
        }
        if heap.len() >= tol.max_panels {
            return Estimate { value, error, converged: false };
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Estimate { value, error, converged: true },
        };
        let mid = (worst.lo + worst.hi) / T::lit(2.0);
        if !(mid > worst.lo && mid < worst.hi) {
            // interval exhausted at machine precision
            heap.push(Panel { error: T::zero(), ..worst });
            continue;
        }
        for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
            let (value, error) = kronrod(&f, lo, hi, worst.map);
            heap.push(Panel { lo, hi, map: worst.map, value, error });
        }
    }
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<T, V, F>(f: F, a: T, b: T, tol: Tolerance<T>) -> Estimate<V, T>
where
    T: Real,
    V: Integrand<T>,
    F: Fn(T) -> V,
{
    integrate_breaks(f, &[a, b], tol)
}

/// Adaptive integral over `[points[0], points[last]]`, with every listed
/// point used as an initial panel boundary. `points` must be ascending.
pub fn integrate_breaks<T, V, F>(f: F, points: &[T], tol: Tolerance<T>) -> Estimate<V, T>
where
    T: Real,
    V: Integrand<T>,
    F: Fn(T) -> V,
{
    let seeds = points
        .windows(2)
        .map(|w| (w[0], w[1], Map::Identity))
        .collect();
    run_adaptive(f, seeds, tol)
}

/// Adaptive integral over the whole real line. `points` (ascending, at
/// least one) seed the finite panels; the two tails beyond them are mapped
/// onto `[0, 1)` with length scale `tail_scale`.
pub fn integrate_real_line<T, V, F>(
    f: F,
    points: &[T],
    tail_scale: T,
    tol: Tolerance<T>,
) -> Estimate<V, T>
where
    T: Real,
    V: Integrand<T>,
    F: Fn(T) -> V,
{
    assert!(!points.is_empty(), "integrate_real_line: no breakpoints");
    let first = points[0];
    let last = points[points.len() - 1];
    let mut seeds: Vec<(T, T, Map<T>)> = points
        .windows(2)
        .map(|w| (w[0], w[1], Map::Identity))
        .collect();
    let (z, o) = (T::zero(), T::one());
    seeds.push((z, o, Map::Left { origin: first, scale: tail_scale }));
    seeds.push((z, o, Map::Right { origin: last, scale: tail_scale }));
    run_adaptive(f, seeds, tol)
}

/// Sorts and deduplicates a breakpoint list, dropping non-finite entries.
pub fn sorted_breaks<T: Real>(mut points: Vec<T>) -> Vec<T> {
    points.retain(|p| p.is_finite());
    points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    points.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * (a.abs() + b.abs()));
    points
}
