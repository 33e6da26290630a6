//! Atomic spectral distributions, input pulses, frequency/time grids and the
//! Fourier transforms that connect them.
//!
//! Units: every frequency is measured in units of the pulse bandwidth and
//! every time in units of its inverse. The transform convention is
//! `E(w) = ∫ dt e^{+iwt} E(t)` with inverse `E(t) = (1/2π) ∫ dw e^{-iwt} E(w)`,
//! used consistently throughout the crate.

use num_complex::Complex;

use crate::error::{CribError, Result};
use crate::num::{cis, cplx, real, Real};
use crate::quadrature::{gauss_legendre, gauss_legendre_on, integrate_breaks, trapezoid, Tolerance};

/// Kind of a [`SpectralDistribution`], used by configuration and reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Delta,
    Lorentzian,
    Box,
    Tabulated,
}

impl ShapeKind {
    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Delta => "delta",
            ShapeKind::Lorentzian => "lorentzian",
            ShapeKind::Box => "box",
            ShapeKind::Tabulated => "tabulated",
        }
    }
}

impl std::str::FromStr for ShapeKind {
    type Err = CribError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "delta" => Ok(ShapeKind::Delta),
            "lorentzian" => Ok(ShapeKind::Lorentzian),
            "box" => Ok(ShapeKind::Box),
            "tabulated" => Ok(ShapeKind::Tabulated),
            other => Err(CribError::InvalidConfig(format!("unknown shape `{other}`"))),
        }
    }
}

/// Piecewise-linear density through sampled `(detuning, density)` pairs,
/// zero outside the sampled range and normalized to unit mass.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedDensity<T> {
    x: Vec<T>,
    y: Vec<T>,
}

impl<T: Real> TabulatedDensity<T> {
    pub fn new(points: &[(T, T)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(CribError::InvalidDistribution(
                "tabulated density needs at least two points".into(),
            ));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        for w in pts.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(CribError::InvalidDistribution(
                    "tabulated detunings must be distinct".into(),
                ));
            }
        }
        if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite() || p.1 < T::zero()) {
            return Err(CribError::InvalidDistribution(
                "tabulated density must be finite and nonnegative".into(),
            ));
        }
        let x: Vec<T> = pts.iter().map(|p| p.0).collect();
        let y: Vec<T> = pts.iter().map(|p| p.1).collect();
        // exact mass of the linear interpolant
        let mass = x
            .windows(2)
            .zip(y.windows(2))
            .fold(T::zero(), |acc, (xs, ys)| acc + (xs[1] - xs[0]) * (ys[0] + ys[1]) / T::lit(2.0));
        if !(mass > T::zero()) {
            return Err(CribError::InvalidDistribution("tabulated density has zero mass".into()));
        }
        let y = y.into_iter().map(|v| v / mass).collect();
        Ok(Self { x, y })
    }

    pub fn nodes(&self) -> &[T] {
        &self.x
    }

    pub fn eval(&self, d: T) -> T {
        let n = self.x.len();
        if d < self.x[0] || d > self.x[n - 1] {
            return T::zero();
        }
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&d).unwrap()) {
            Ok(i) => return self.y[i],
            Err(i) => i,
        };
        let (x0, x1, y0, y1) = (self.x[i - 1], self.x[i], self.y[i - 1], self.y[i]);
        y0 + (y1 - y0) * (d - x0) / (x1 - x0)
    }

    fn reflected(&self) -> Self {
        Self {
            x: self.x.iter().rev().map(|v| -*v).collect(),
            y: self.y.iter().rev().copied().collect(),
        }
    }

    fn support(&self) -> (T, T) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Width estimate: the standard deviation of the density.
    fn spread(&self) -> T {
        let (m1, m2) = self.x.windows(2).zip(self.y.windows(2)).fold(
            (T::zero(), T::zero()),
            |(m1, m2), (xs, ys)| {
                let h = xs[1] - xs[0];
                let xm = (xs[0] + xs[1]) / T::lit(2.0);
                let ym = (ys[0] + ys[1]) / T::lit(2.0);
                (m1 + h * ym * xm, m2 + h * ym * xm * xm)
            },
        );
        (m2 - m1 * m1).max(T::zero()).sqrt()
    }
}

/// Normalized spectral density of atomic transition detunings.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralDistribution<T> {
    Delta { center: T },
    /// Full width at half maximum `width`.
    Lorentzian { width: T, center: T },
    /// Constant `1/width` on `[center - width/2, center + width/2]`.
    Box { width: T, center: T },
    Tabulated(TabulatedDensity<T>),
}

fn check_width<T: Real>(width: T) -> Result<()> {
    if width.is_finite() && width > T::zero() {
        Ok(())
    } else {
        Err(CribError::InvalidDistribution(format!("width must be positive and finite, got {width}")))
    }
}

impl<T: Real> SpectralDistribution<T> {
    pub fn delta() -> Self {
        SpectralDistribution::Delta { center: T::zero() }
    }

    pub fn lorentzian(width: T) -> Result<Self> {
        check_width(width)?;
        Ok(SpectralDistribution::Lorentzian { width, center: T::zero() })
    }

    pub fn boxcar(width: T) -> Result<Self> {
        check_width(width)?;
        Ok(SpectralDistribution::Box { width, center: T::zero() })
    }

    pub fn tabulated(points: &[(T, T)]) -> Result<Self> {
        TabulatedDensity::new(points).map(SpectralDistribution::Tabulated)
    }

    /// Builds a distribution of the given kind; `width` is ignored for delta.
    pub fn from_kind(kind: ShapeKind, width: T) -> Result<Self> {
        match kind {
            ShapeKind::Delta => Ok(Self::delta()),
            ShapeKind::Lorentzian => Self::lorentzian(width),
            ShapeKind::Box => Self::boxcar(width),
            ShapeKind::Tabulated => Err(CribError::InvalidDistribution(
                "tabulated distributions need sample points".into(),
            )),
        }
    }

    /// Same shape shifted to `center`. Tabulated densities are shifted by
    /// `center` relative to their sampled positions.
    pub fn with_center(self, c: T) -> Self {
        match self {
            SpectralDistribution::Delta { .. } => SpectralDistribution::Delta { center: c },
            SpectralDistribution::Lorentzian { width, .. } => {
                SpectralDistribution::Lorentzian { width, center: c }
            }
            SpectralDistribution::Box { width, .. } => SpectralDistribution::Box { width, center: c },
            SpectralDistribution::Tabulated(t) => SpectralDistribution::Tabulated(TabulatedDensity {
                x: t.x.iter().map(|v| *v + c).collect(),
                y: t.y,
            }),
        }
    }

    pub fn kind(&self) -> ShapeKind {
        match self {
            SpectralDistribution::Delta { .. } => ShapeKind::Delta,
            SpectralDistribution::Lorentzian { .. } => ShapeKind::Lorentzian,
            SpectralDistribution::Box { .. } => ShapeKind::Box,
            SpectralDistribution::Tabulated(_) => ShapeKind::Tabulated,
        }
    }

    /// Characteristic width; zero for delta, standard deviation for tables.
    pub fn width(&self) -> T {
        match self {
            SpectralDistribution::Delta { .. } => T::zero(),
            SpectralDistribution::Lorentzian { width, .. } | SpectralDistribution::Box { width, .. } => *width,
            SpectralDistribution::Tabulated(t) => t.spread(),
        }
    }

    pub fn center(&self) -> T {
        match self {
            SpectralDistribution::Delta { center }
            | SpectralDistribution::Lorentzian { center, .. }
            | SpectralDistribution::Box { center, .. } => *center,
            SpectralDistribution::Tabulated(t) => {
                let (a, b) = t.support();
                (a + b) / T::lit(2.0)
            }
        }
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, SpectralDistribution::Delta { .. })
    }

    /// `G(-x)`.
    pub fn reflected(&self) -> Self {
        match self {
            SpectralDistribution::Delta { center } => SpectralDistribution::Delta { center: -*center },
            SpectralDistribution::Lorentzian { width, center } => {
                SpectralDistribution::Lorentzian { width: *width, center: -*center }
            }
            SpectralDistribution::Box { width, center } => {
                SpectralDistribution::Box { width: *width, center: -*center }
            }
            SpectralDistribution::Tabulated(t) => SpectralDistribution::Tabulated(t.reflected()),
        }
    }

    /// Whether `G(x) = G(-x)`.
    pub fn is_symmetric(&self) -> bool {
        match self {
            SpectralDistribution::Tabulated(t) => {
                let scale = t.y.iter().fold(T::zero(), |m, v| m.max(*v));
                t.x.iter().all(|&x| (t.eval(x) - t.eval(-x)).abs() <= T::lit(1e-9) * scale)
            }
            other => other.center() == T::zero(),
        }
    }

    /// Closed support `[lo, hi]`; infinite for the Lorentzian.
    pub fn support(&self) -> (T, T) {
        match self {
            SpectralDistribution::Delta { center } => (*center, *center),
            SpectralDistribution::Lorentzian { .. } => (T::neg_infinity(), T::infinity()),
            SpectralDistribution::Box { width, center } => {
                let h = *width / T::lit(2.0);
                (*center - h, *center + h)
            }
            SpectralDistribution::Tabulated(t) => t.support(),
        }
    }

    /// Points where the density is not smooth.
    pub fn breakpoints(&self) -> Vec<T> {
        match self {
            SpectralDistribution::Delta { center } | SpectralDistribution::Lorentzian { center, .. } => {
                vec![*center]
            }
            SpectralDistribution::Box { .. } => {
                let (a, b) = self.support();
                vec![a, b]
            }
            SpectralDistribution::Tabulated(t) => t.x.clone(),
        }
    }

    /// Point value `G(d)`.
    pub fn density(&self, d: T) -> Result<T> {
        Ok(match self {
            SpectralDistribution::Delta { .. } => return Err(CribError::UnsupportedPointEvaluation),
            SpectralDistribution::Lorentzian { width, center } => {
                let x = d - *center;
                (*width / T::TAU()) / (*width * *width / T::lit(4.0) + x * x)
            }
            SpectralDistribution::Box { width, center } => {
                if (d - *center).abs() <= *width / T::lit(2.0) {
                    width.recip()
                } else {
                    T::zero()
                }
            }
            SpectralDistribution::Tabulated(t) => t.eval(d),
        })
    }

    /// `∫ dΔ G(Δ) e^{-2iΔt}`, the amplitude factor a stored coherence
    /// picks up between absorption and emission.
    pub fn fourier(&self, t: T) -> Complex<T> {
        let two_t = T::lit(2.0) * t;
        match self {
            SpectralDistribution::Delta { center } => cis(-two_t * *center),
            SpectralDistribution::Lorentzian { width, center } => {
                cis(-two_t * *center) * (-*width * t.abs()).exp()
            }
            SpectralDistribution::Box { width, center } => {
                cis(-two_t * *center) * crate::num::sinc(*width * t)
            }
            SpectralDistribution::Tabulated(tab) => {
                // piecewise quadratic phase is resolved per segment
                let est = integrate_breaks(
                    |d: T| cis(-two_t * d) * tab.eval(d),
                    &tab.x,
                    Tolerance { abs_tol: T::lit(1e-13), rel_tol: T::lit(1e-12), max_panels: 20_000 },
                );
                est.value
            }
        }
    }

    /// Quadrature rule `(node, weight)` carrying the full unit mass, with
    /// about `n` nodes. Lorentzians are integrated in the variable
    /// `θ = atan(2(Δ - c)/γ)`, which turns the density into a uniform
    /// measure on `(-π/2, π/2)`.
    pub fn quadrature_rule(&self, n: usize) -> Vec<(T, T)> {
        let n = n.max(1);
        match self {
            SpectralDistribution::Delta { center } => vec![(*center, T::one())],
            SpectralDistribution::Lorentzian { width, center } => {
                let (x, w) = gauss_legendre::<T>(n);
                let half_pi = T::FRAC_PI_2();
                x.into_iter()
                    .zip(w)
                    .map(|(xi, wi)| {
                        let theta = xi * half_pi;
                        (*center + *width / T::lit(2.0) * theta.tan(), wi / T::lit(2.0))
                    })
                    .collect()
            }
            SpectralDistribution::Box { width, .. } => {
                let (a, b) = self.support();
                gauss_legendre_on(n, a, b)
                    .into_iter()
                    .map(|(x, w)| (x, w / *width))
                    .collect()
            }
            SpectralDistribution::Tabulated(t) => {
                let segments = t.x.len() - 1;
                let per = (n / segments).max(2);
                let mut rule = Vec::with_capacity(per * segments);
                for s in t.x.windows(2) {
                    for (x, w) in gauss_legendre_on(per, s[0], s[1]) {
                        rule.push((x, w * t.eval(x)));
                    }
                }
                rule
            }
        }
    }
}

/// Shape of the input pulse spectrum.
#[derive(Clone, Debug, PartialEq)]
pub enum PulseShape<T> {
    /// `E(w) = (Γ/2π) / (Γ²/4 + w²)`.
    Lorentzian,
    /// Linearly interpolated samples `(w, E(w))` of the spectrum of a pulse
    /// centered at `t = 0`; zero outside the sampled range.
    Tabulated(Vec<(T, Complex<T>)>),
}

/// Input light pulse.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSpec<T> {
    pub shape: PulseShape<T>,
    pub bandwidth: T,
    /// Time at which the pulse is centered (before rephasing at `t = 0`).
    pub center_time: T,
    /// Overall real amplitude scale.
    pub amplitude: T,
}

impl<T: Real> PulseSpec<T> {
    pub fn lorentzian(bandwidth: T) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > T::zero()) {
            return Err(CribError::InvalidPulse(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Ok(Self {
            shape: PulseShape::Lorentzian,
            bandwidth,
            center_time: T::zero(),
            amplitude: T::one(),
        })
    }

    pub fn tabulated(samples: Vec<(T, Complex<T>)>, bandwidth: T) -> Result<Self> {
        if samples.len() < 2 {
            return Err(CribError::InvalidPulse("tabulated spectrum needs two samples".into()));
        }
        let mut samples = samples;
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        if samples.iter().any(|(w, e)| !w.is_finite() || !e.re.is_finite() || !e.im.is_finite()) {
            return Err(CribError::InvalidPulse("tabulated spectrum must be finite".into()));
        }
        let p = Self {
            shape: PulseShape::Tabulated(samples),
            bandwidth,
            center_time: T::zero(),
            amplitude: T::one(),
        };
        if !(p.spectral_energy() > T::zero()) {
            return Err(CribError::InvalidPulse("tabulated spectrum has zero energy".into()));
        }
        Ok(p)
    }

    /// Pulse centered at `t` (the input is centered at `-T/2`).
    pub fn centered_at(mut self, t: T) -> Self {
        self.center_time = t;
        self
    }

    pub fn scaled(mut self, amplitude: T) -> Self {
        self.amplitude = amplitude;
        self
    }

    fn base_spectrum(&self, w: T) -> Complex<T> {
        match &self.shape {
            PulseShape::Lorentzian => {
                let g = self.bandwidth;
                real((g / T::TAU()) / (g * g / T::lit(4.0) + w * w))
            }
            PulseShape::Tabulated(s) => interpolate_complex(s, w),
        }
    }

    /// `∫ dw |E(w)|²`.
    pub fn spectral_energy(&self) -> T {
        match &self.shape {
            PulseShape::Lorentzian => self.amplitude * self.amplitude / (T::PI() * self.bandwidth),
            PulseShape::Tabulated(s) => {
                let e = s.windows(2).fold(T::zero(), |acc, p| {
                    let h = p[1].0 - p[0].0;
                    let (a, b) = (p[0].1, p[1].1);
                    // exact for the linear interpolant
                    acc + h * (a.norm_sqr() + b.norm_sqr() + (a * b.conj()).re) / T::lit(3.0)
                });
                e * self.amplitude * self.amplitude
            }
        }
    }

    /// Time-domain energy `∫ dt |E(t)|²`; equals `spectral_energy / 2π`.
    pub fn energy(&self) -> T {
        self.spectral_energy() / T::TAU()
    }

    /// Energy carried at times `t > t0`. Exact for the Lorentzian shape,
    /// quadrature otherwise.
    pub fn energy_after(&self, t0: T) -> T {
        match &self.shape {
            PulseShape::Lorentzian => {
                let a = self.amplitude / T::TAU();
                let g = self.bandwidth;
                let total = a * a * T::lit(2.0) / g;
                let s = t0 - self.center_time;
                let tail = a * a * (-g * s.abs()).exp() / g;
                if s >= T::zero() {
                    tail
                } else {
                    total - tail
                }
            }
            PulseShape::Tabulated(_) => {
                let span = T::lit(60.0) / self.bandwidth;
                let n = 6001;
                let sig = self.time_signal(t0, t0 + span, n);
                sig.energy()
            }
        }
    }

    /// Samples `E(t)` on `n` uniform points over `[t_min, t_max]`.
    pub fn time_signal(&self, t_min: T, t_max: T, n: usize) -> TimeSignal<T> {
        let dt = (t_max - t_min) / T::of_usize(n.max(2) - 1);
        match &self.shape {
            PulseShape::Lorentzian => {
                let a = self.amplitude / T::TAU();
                let half = self.bandwidth / T::lit(2.0);
                let values = (0..n)
                    .map(|i| {
                        let t = t_min + dt * T::of_usize(i);
                        real(a * (-half * (t - self.center_time).abs()).exp())
                    })
                    .collect();
                TimeSignal { t_min, dt, values }
            }
            PulseShape::Tabulated(s) => {
                let lo = s[0].0;
                let hi = s[s.len() - 1].0;
                let m = (s.len() * 8).max(4001);
                let grid = FrequencyGrid::spanning(lo, hi, m);
                let spec = ComplexSpectrum::sample(&grid, self);
                inverse_transform(&spec, t_min, dt, n)
            }
        }
    }
}

fn interpolate_complex<T: Real>(s: &[(T, Complex<T>)], w: T) -> Complex<T> {
    let n = s.len();
    if n == 0 || w < s[0].0 || w > s[n - 1].0 {
        return real(T::zero());
    }
    let i = s.partition_point(|p| p.0 < w);
    if i == 0 {
        return s[0].1;
    }
    let (w0, e0) = s[i - 1];
    let (w1, e1) = s[i];
    if w1 == w0 {
        return e1;
    }
    let f = (w - w0) / (w1 - w0);
    e0 * (T::one() - f) + e1 * f
}

/// Anything that can report a spectral amplitude at an arbitrary frequency.
pub trait Spectrum<T: Real> {
    fn amplitude(&self, w: T) -> Complex<T>;
}

impl<T: Real> Spectrum<T> for PulseSpec<T> {
    fn amplitude(&self, w: T) -> Complex<T> {
        self.base_spectrum(w) * cis(w * self.center_time) * self.amplitude
    }
}

impl<T: Real, S: Spectrum<T> + ?Sized> Spectrum<T> for &S {
    fn amplitude(&self, w: T) -> Complex<T> {
        (**self).amplitude(w)
    }
}

/// Uniform frequency grid `w_i = lo + i * step`, `i = 0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid<T> {
    lo: T,
    hi: T,
    n: usize,
}

impl<T: Real> FrequencyGrid<T> {
    /// Symmetric grid over `[-omega_max, omega_max]`.
    pub fn symmetric(omega_max: T, n: usize) -> Result<Self> {
        if !(omega_max.is_finite() && omega_max > T::zero()) || n < 3 {
            return Err(CribError::InvalidGrid(format!(
                "need omega_max > 0 and at least 3 points (got {omega_max}, {n})"
            )));
        }
        Ok(Self { lo: -omega_max, hi: omega_max, n })
    }

    /// Arbitrary span; not necessarily symmetric.
    pub fn spanning(lo: T, hi: T, n: usize) -> Self {
        Self { lo, hi, n: n.max(2) }
    }

    /// Default symmetric grid covering `[-20Γ, 20Γ]` and `[-4γ, 4γ]` for
    /// every width, with spacing at most `step`, shifted off any `edges`.
    pub fn covering(bandwidth: T, widths: &[T], step: T, edges: &[T]) -> Result<Self> {
        let omega_max = widths
            .iter()
            .fold(T::lit(20.0) * bandwidth, |m, w| m.max(T::lit(4.0) * *w));
        let n = (T::lit(2.0) * omega_max / step).ceil().to_usize().unwrap_or(3).max(3) + 1;
        Self::symmetric(omega_max, n)?.avoiding(edges)
    }

    /// Adjusts the point count until every grid point sits at least a
    /// quarter step away from each of `edges`.
    pub fn avoiding(self, edges: &[T]) -> Result<Self> {
        let mut g = self;
        for _ in 0..64 {
            let step = g.step();
            let clear = edges.iter().all(|&e| {
                let pos = (e - g.lo) / step;
                let frac = pos - pos.floor();
                e < g.lo || e > g.hi || (frac >= T::lit(0.25) && frac <= T::lit(0.75))
            });
            if clear {
                return Ok(g);
            }
            g.n += 1;
        }
        Err(CribError::InvalidGrid("could not place grid points away from band edges".into()))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn step(&self) -> T {
        (self.hi - self.lo) / T::of_usize(self.n - 1)
    }

    pub fn is_symmetric(&self) -> bool {
        (self.lo + self.hi).abs() <= T::epsilon() * T::lit(16.0) * self.hi.abs()
    }

    pub fn point(&self, i: usize) -> T {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + self.step() * T::of_usize(i)
        }
    }

    /// Index of `-w_i` on a symmetric grid.
    pub fn mirror(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }
}

/// Complex spectral amplitudes sampled on a [`FrequencyGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpectrum<T> {
    pub grid: FrequencyGrid<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> ComplexSpectrum<T> {
    pub fn new(grid: FrequencyGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CribError::InvalidGrid("sample count does not match grid".into()));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(CribError::InvalidGrid("spectrum has non-finite samples".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn sample<S: Spectrum<T> + ?Sized>(grid: &FrequencyGrid<T>, s: &S) -> Self {
        Self {
            grid: grid.clone(),
            values: grid.points().map(|w| s.amplitude(w)).collect(),
        }
    }

    pub fn zeros(grid: &FrequencyGrid<T>) -> Self {
        Self { grid: grid.clone(), values: vec![real(T::zero()); grid.len()] }
    }

    /// `∫ dw |E(w)|²` by the trapezoid rule.
    pub fn energy(&self) -> T {
        let p: Vec<T> = self.values.iter().map(|v| v.norm_sqr()).collect();
        trapezoid(&p, self.grid.step())
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| *v * c).collect(),
        }
    }

    /// `E(-w)`; requires a symmetric grid.
    pub fn mirrored(&self) -> Result<Self> {
        if !self.grid.is_symmetric() {
            return Err(CribError::InvalidGrid("mirroring needs a symmetric grid".into()));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().rev().copied().collect(),
        })
    }
}

impl<T: Real> Spectrum<T> for ComplexSpectrum<T> {
    /// Exact at grid points, linear in between, zero outside the grid.
    fn amplitude(&self, w: T) -> Complex<T> {
        if w < self.grid.lo() || w > self.grid.hi() {
            return real(T::zero());
        }
        let pos = (w - self.grid.lo()) / self.grid.step();
        let i = pos.floor().to_usize().unwrap_or(0).min(self.grid.len() - 1);
        if i + 1 >= self.grid.len() {
            return self.values[self.grid.len() - 1];
        }
        let f = pos - T::of_usize(i);
        if f == T::zero() {
            return self.values[i];
        }
        self.values[i] * (T::one() - f) + self.values[i + 1] * f
    }
}

/// Uniformly sampled complex field envelope in time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSignal<T> {
    pub t_min: T,
    pub dt: T,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> TimeSignal<T> {
    pub fn new(t_min: T, dt: T, values: Vec<Complex<T>>) -> Result<Self> {
        if !(dt > T::zero()) || values.is_empty() {
            return Err(CribError::InvalidGrid("time signal needs dt > 0 and samples".into()));
        }
        Ok(Self { t_min, dt, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t_max(&self) -> T {
        self.time(self.values.len() - 1)
    }

    pub fn time(&self, i: usize) -> T {
        self.t_min + self.dt * T::of_usize(i)
    }

    /// `∫ dt |E(t)|²` by the trapezoid rule.
    pub fn energy(&self) -> T {
        let p: Vec<T> = self.values.iter().map(|v| v.norm_sqr()).collect();
        trapezoid(&p, self.dt)
    }

    /// Energy carried by samples at `t > t0`.
    pub fn energy_after(&self, t0: T) -> T {
        let p: Vec<T> = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.time(*i) > t0)
            .map(|(_, v)| v.norm_sqr())
            .collect();
        trapezoid(&p, self.dt)
    }

    /// Linear interpolation, zero outside the sampled interval.
    pub fn sample(&self, t: T) -> Complex<T> {
        let pos = (t - self.t_min) / self.dt;
        if pos < T::zero() || pos > T::of_usize(self.values.len() - 1) {
            return real(T::zero());
        }
        let i = pos.floor().to_usize().unwrap_or(0);
        if i + 1 >= self.values.len() {
            return self.values[self.values.len() - 1];
        }
        let f = pos - T::of_usize(i);
        self.values[i] * (T::one() - f) + self.values[i + 1] * f
    }

    /// `E(-t)`.
    pub fn reversed(&self) -> Self {
        Self {
            t_min: -self.t_max(),
            dt: self.dt,
            values: self.values.iter().rev().copied().collect(),
        }
    }

    pub fn peak_time(&self) -> T {
        let (i, _) = self.values.iter().enumerate().fold((0, T::zero()), |(bi, bv), (i, v)| {
            if v.norm() > bv {
                (i, v.norm())
            } else {
                (bi, bv)
            }
        });
        self.time(i)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }
}

/// Phase factors `exp(i k x)`, `k = 0..n`, by recurrence with periodic
/// reseeding so the accumulated rounding stays at machine level.
fn phase_ladder<T: Real>(x: T, n: usize, offset: T) -> impl Iterator<Item = Complex<T>> {
    let step = cis(x);
    let mut cur = cis(offset);
    (0..n).map(move |k| {
        if k % 128 == 0 {
            cur = cis(offset + x * T::of_usize(k));
        }
        let out = cur;
        cur = cur * step;
        out
    })
}

/// `E(w) = ∫ dt e^{iwt} E(t)` by the trapezoid rule, evaluated on `grid`.
pub fn forward_transform<T: Real>(signal: &TimeSignal<T>, grid: &FrequencyGrid<T>) -> ComplexSpectrum<T> {
    let n = signal.values.len();
    let half = T::lit(0.5);
    let values = grid
        .points()
        .map(|w| {
            let mut acc = cplx(T::zero(), T::zero());
            for (k, ph) in phase_ladder(w * signal.dt, n, w * signal.t_min).enumerate() {
                let v = signal.values[k] * ph;
                acc = acc + if k == 0 || k + 1 == n { v * half } else { v };
            }
            acc * signal.dt
        })
        .collect();
    ComplexSpectrum { grid: grid.clone(), values }
}

/// `E(t) = (1/2π) ∫ dw e^{-iwt} E(w)` by the trapezoid rule, sampled on
/// `n` points starting at `t_min` with spacing `dt`.
pub fn inverse_transform<T: Real>(spectrum: &ComplexSpectrum<T>, t_min: T, dt: T, n: usize) -> TimeSignal<T> {
    let grid = &spectrum.grid;
    let m = grid.len();
    let dw = grid.step();
    let half = T::lit(0.5);
    let values = (0..n)
        .map(|i| {
            let t = t_min + dt * T::of_usize(i);
            let mut acc = cplx(T::zero(), T::zero());
            for (k, ph) in phase_ladder(-dw * t, m, -grid.lo() * t).enumerate() {
                let v = spectrum.values[k] * ph;
                acc = acc + if k == 0 || k + 1 == m { v * half } else { v };
            }
            acc * dw / T::TAU()
        })
        .collect();
    TimeSignal { t_min, dt, values }
}

/// Samples a pulse spectrum on a grid.
pub fn pulse_spectrum<T: Real>(pulse: &PulseSpec<T>, grid: &FrequencyGrid<T>) -> ComplexSpectrum<T> {
    ComplexSpectrum::sample(grid, pulse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn density_examples() {
        let b = SpectralDistribution::boxcar(1.0).unwrap();
        assert_eq!(b.density(0.0).unwrap(), 1.0);
        assert_eq!(b.density(0.6).unwrap(), 0.0);
        let l = SpectralDistribution::lorentzian(2.0).unwrap();
        assert!((l.density(0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(
            SpectralDistribution::<f64>::delta().density(0.0),
            Err(CribError::UnsupportedPointEvaluation)
        );
    }

    #[test]
    fn widths_must_be_positive() {
        assert!(SpectralDistribution::boxcar(0.0f64).is_err());
        assert!(SpectralDistribution::lorentzian(-1.0f64).is_err());
        assert!(SpectralDistribution::lorentzian(f64::NAN).is_err());
    }

    #[test]
    fn fourier_examples() {
        let d = SpectralDistribution::<f64>::delta();
        assert_eq!(d.fourier(3.7), Complex::new(1.0, 0.0));
        let l = SpectralDistribution::lorentzian(0.3).unwrap();
        assert!((l.fourier(2.0).re - (-0.6f64).exp()).abs() < 1e-15);
        let b = SpectralDistribution::boxcar(0.5).unwrap();
        assert!((b.fourier(3.0).re - (1.5f64).sin() / 1.5).abs() < 1e-15);
        for d in [l, b] {
            assert_eq!(d.fourier(0.0), Complex::new(1.0, 0.0));
        }
    }

    #[test]
    fn tabulated_is_renormalized_and_interpolated() {
        let t = SpectralDistribution::<f64>::tabulated(&[(-1.0, 0.0), (0.0, 4.0), (1.0, 0.0)]).unwrap();
        assert!((t.density(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((t.density(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(t.density(1.5).unwrap(), 0.0);
        let mass: f64 = t.quadrature_rule(64).iter().map(|p| p.1).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(t.is_symmetric());
        // triangle of half-width 1: FT is sinc²(t)
        let f = t.fourier(0.7);
        let s = (0.7f64).sin() / 0.7;
        assert!((f.re - s * s).abs() < 1e-9 && f.im.abs() < 1e-9);
    }

    #[test]
    fn tabulated_rejects_bad_input() {
        assert!(SpectralDistribution::tabulated(&[(0.0, 1.0)]).is_err());
        assert!(SpectralDistribution::tabulated(&[(0.0, 1.0), (1.0, -1.0)]).is_err());
        assert!(SpectralDistribution::tabulated(&[(0.0, 0.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn quadrature_rules_carry_unit_mass() {
        for d in [
            SpectralDistribution::lorentzian(0.1).unwrap(),
            SpectralDistribution::boxcar(3.0).unwrap().with_center(0.4),
            SpectralDistribution::delta(),
        ] {
            let m: f64 = d.quadrature_rule(129).iter().map(|p| p.1).sum();
            assert!((m - 1.0).abs() < 1e-13, "{d:?}");
        }
    }

    #[test]
    fn pulse_spectrum_examples() {
        let p = PulseSpec::lorentzian(1.0).unwrap();
        assert!((p.amplitude(0.0).re - 2.0 / PI).abs() < 1e-15);
        assert!((p.amplitude(0.5).re - 1.0 / PI).abs() < 1e-15);
        assert!((p.amplitude(-0.5).re - 1.0 / PI).abs() < 1e-15);
        let q = p.clone().centered_at(-15.0);
        for w in [0.3, 1.7, 4.0] {
            assert!((q.amplitude(-w) - q.amplitude(w).conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn lorentzian_pulse_energy_after() {
        let p = PulseSpec::lorentzian(1.0).unwrap().centered_at(-15.0);
        let frac = p.energy_after(0.0) / p.energy();
        assert!((frac - 0.5 * (-15.0f64).exp()).abs() < 1e-18);
        assert!((p.energy_after(-15.0) / p.energy() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn grid_is_symmetric_and_mirrors() {
        let g = FrequencyGrid::<f64>::symmetric(2.0, 41).unwrap();
        for i in 0..41 {
            assert!((g.point(i) + g.point(g.mirror(i))).abs() < 1e-15);
        }
        assert!(FrequencyGrid::symmetric(1.0, 2).is_err());
    }

    #[test]
    fn grid_avoids_box_edges() {
        let g = FrequencyGrid::<f64>::covering(1.0, &[1.0], 0.05, &[-0.5, 0.5]).unwrap();
        let step = g.step();
        for w in g.points() {
            assert!((w.abs() - 0.5).abs() >= 0.25 * step - 1e-12);
        }
        assert!(g.hi() >= 20.0);
    }

    #[test]
    fn transforms_round_trip_lorentzian() {
        // spectrum of (1/2π) e^{-|t|/2} is the unit Lorentzian
        let p = PulseSpec::lorentzian(1.0).unwrap();
        let sig = p.time_signal(-60.0, 60.0, 24001);
        let grid = FrequencyGrid::symmetric(3.0, 61).unwrap();
        let spec = forward_transform(&sig, &grid);
        for (w, v) in grid.points().zip(&spec.values) {
            assert!((v - p.amplitude(w)).norm() < 1e-5, "w={w}");
        }
    }
}
