//! Figures of merit for a memory run.

use std::cell::Cell;

use num_complex::Complex;

use crate::analytic::{output_amplitude, Delta0Integrator, Direction, QuadratureReport};
use crate::error::{CribError, Result};
use crate::kernels::MediumSpec;
use crate::num::{real, Real};
use crate::quadrature::{integrate_real_line, sorted_breaks, Tolerance};
use crate::spectral::{ComplexSpectrum, PulseSpec, Spectrum, TimeSignal};

/// `∫|E_out|² / ∫|E_in|²` over a common frequency grid (trapezoid rule).
pub fn efficiency<T: Real>(out: &ComplexSpectrum<T>, input: &ComplexSpectrum<T>) -> Result<T> {
    if out.grid != input.grid {
        return Err(CribError::InvalidGrid("efficiency needs both spectra on one grid".into()));
    }
    let e_in = input.energy();
    if !(e_in > T::zero()) {
        return Err(CribError::UndefinedMetric("input carries no energy".into()));
    }
    Ok(out.energy() / e_in)
}

/// Time-domain efficiency `∫|E_out(t)|² dt / ∫|E_in(t)|² dt`.
pub fn time_efficiency<T: Real>(out: &TimeSignal<T>, input: &TimeSignal<T>) -> Result<T> {
    let e_in = input.energy();
    if !(e_in > T::zero()) {
        return Err(CribError::UndefinedMetric("input carries no energy".into()));
    }
    Ok(out.energy() / e_in)
}

/// Integration points where `|E_out(w)|²` may have kinks.
fn feature_points<T: Real>(m: &MediumSpec<T>) -> Vec<T> {
    let mut pts = vec![T::zero(), T::one(), -T::one()];
    let gp = &m.ctx.gp;
    let g0 = &m.ctx.g0;
    for b in gp.breakpoints() {
        pts.push(b);
        pts.push(-b);
        for b0 in g0.breakpoints() {
            pts.push(b + b0);
            pts.push(-(b + b0));
        }
    }
    let w = gp.width();
    pts.extend([w, -w, w / T::lit(4.0), -w / T::lit(4.0)]);
    sorted_breaks(pts)
}

/// Efficiency with the output spectrum integrated adaptively over the whole
/// frequency axis, with diagnostics of the inner `Δ₀` quadrature.
pub fn spectral_efficiency_report<T: Real>(
    m: &MediumSpec<T>,
    direction: Direction,
    pulse: &PulseSpec<T>,
) -> Result<(T, QuadratureReport)> {
    let e_in = pulse.spectral_energy();
    if !(e_in > T::zero()) {
        return Err(CribError::UndefinedMetric("input carries no energy".into()));
    }
    if m.nu == T::zero() {
        return Ok((T::zero(), QuadratureReport::default()));
    }
    let quad = Delta0Integrator::new(m, pulse.amplitude(T::zero()).norm());
    let report = Cell::new(QuadratureReport::default());
    let failure = Cell::new(None);
    let f = |w: T| -> T {
        let mut rep = report.get();
        let v = match output_amplitude(m, direction, pulse, w, &quad, &mut rep) {
            Ok(v) => v.norm_sqr(),
            Err(e) => {
                failure.set(Some(e));
                T::zero()
            }
        };
        report.set(rep);
        v
    };
    let scale = T::one().max(m.ctx.gp.width());
    let tol = Tolerance { abs_tol: T::lit(1e-14) * e_in, rel_tol: T::lit(1e-10), max_panels: 4000 };
    let est = integrate_real_line(f, &feature_points(m), scale, tol);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    if !est.converged && est.error > T::lit(1e-7) * est.value.abs().max(T::lit(1e-12) * e_in) {
        return Err(CribError::QuadratureNotConverged {
            achieved: (est.error / est.value.abs()).as_f64(),
            nodes: 0,
        });
    }
    Ok((est.value / e_in, report.get()))
}

/// Efficiency of retrieving `pulse`, integrated adaptively over frequency.
pub fn spectral_efficiency<T: Real>(m: &MediumSpec<T>, direction: Direction, pulse: &PulseSpec<T>) -> Result<T> {
    spectral_efficiency_report(m, direction, pulse).map(|r| r.0)
}

fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>], lag: isize, stride: usize) -> Complex<T> {
    // Σ a[i] conj(b[i - lag]) over the overlap, every `stride`-th sample.
    let (na, nb) = (a.len() as isize, b.len() as isize);
    let start = lag.max(0);
    let end = na.min(nb + lag);
    let mut acc = real(T::zero());
    let mut i = start;
    while i < end {
        acc = acc + a[i as usize] * b[(i - lag) as usize].conj();
        i += stride as isize;
    }
    acc
}

/// `|⟨out, in(-t)⟩|² / (‖out‖² ‖in‖²)` at the sample lag maximizing the
/// cross-correlation. One for an undistorted, time-reversed echo.
pub fn shape_fidelity<T: Real>(out: &TimeSignal<T>, input: &TimeSignal<T>) -> Result<T> {
    let tol = T::lit(1e-9) * out.dt;
    if (out.dt - input.dt).abs() > tol {
        return Err(CribError::InvalidGrid("fidelity needs signals with one time step".into()));
    }
    let norm = |s: &TimeSignal<T>| s.values.iter().fold(T::zero(), |a, v| a + v.norm_sqr());
    let (n_out, n_in) = (norm(out), norm(input));
    if !(n_out > T::zero() && n_in > T::zero()) {
        return Err(CribError::UndefinedMetric("fidelity of a zero-energy signal".into()));
    }
    let rev: Vec<Complex<T>> = input.values.iter().rev().copied().collect();
    let (a, b) = (&out.values, &rev);
    let lo = -(b.len() as isize) + 1;
    let hi = a.len() as isize;
    // Coarse scan on a decimated lattice, then refinement around the best lag.
    let stride = (a.len().max(b.len()) / 1500).max(1);
    let mut best = (0isize, T::zero());
    let mut lag = lo;
    while lag < hi {
        let v = inner(a, b, lag, stride).norm_sqr();
        if v > best.1 {
            best = (lag, v);
        }
        lag += stride as isize;
    }
    let span = 2 * stride as isize + 1;
    let mut top = T::zero();
    for lag in (best.0 - span).max(lo)..(best.0 + span).min(hi) {
        top = top.max(inner(a, b, lag, 1).norm_sqr());
    }
    Ok((top / (n_out * n_in)).min(T::one()))
}

/// Least-squares rate `k` of `Eff(T) ≈ A e^{-kT}`.
pub fn fit_exponential_decay<T: Real>(points: &[(T, T)]) -> Result<T> {
    if points.len() < 5 {
        return Err(CribError::Data(format!("decay fit needs at least 5 points, got {}", points.len())));
    }
    if let Some((t, e)) = points.iter().find(|(_, e)| !(*e > T::zero())) {
        return Err(CribError::Data(format!("nonpositive efficiency {e} at T = {t}")));
    }
    let n = T::of_usize(points.len());
    let mt = points.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let ml = points.iter().fold(T::zero(), |a, p| a + p.1.ln()) / n;
    let (sxy, sxx) = points.iter().fold((T::zero(), T::zero()), |(sxy, sxx), (t, e)| {
        let dx = *t - mt;
        (sxy + dx * (e.ln() - ml), sxx + dx * dx)
    });
    if sxx == T::zero() {
        return Err(CribError::Data("decay fit needs distinct storage times".into()));
    }
    Ok(-sxy / sxx)
}

/// Summary of one retrieval.
#[derive(Clone, Debug, PartialEq)]
pub struct MemoryReport<T> {
    pub efficiency: T,
    pub shape_fidelity: T,
    pub peak_time: T,
    pub transmitted: T,
    pub quadrature: QuadratureReport,
}

impl<T: Real> MemoryReport<T> {
    /// Energy not accounted for by the echo or the transmitted pulse.
    pub fn residual_energy(&self) -> T {
        T::one() - self.efficiency - self.transmitted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::FrequencyGrid;

    fn grid() -> FrequencyGrid<f64> {
        FrequencyGrid::symmetric(20.0, 801).unwrap()
    }

    #[test]
    fn efficiency_examples() {
        let g = grid();
        let p = PulseSpec::lorentzian(1.0).unwrap();
        let input = ComplexSpectrum::sample(&g, &p);
        assert_eq!(efficiency(&input, &input).unwrap(), 1.0);
        assert_eq!(efficiency(&ComplexSpectrum::zeros(&g), &input).unwrap(), 0.0);
        let k = 1.0 - (-2.0f64).exp();
        let out = input.mirrored().unwrap().scaled(Complex::new(-k, 0.0));
        assert!((efficiency(&out, &input).unwrap() - k * k).abs() < 1e-14);
        assert!(matches!(efficiency(&input, &ComplexSpectrum::zeros(&g)), Err(CribError::UndefinedMetric(_))));
    }

    #[test]
    fn fidelity_examples() {
        let p = PulseSpec::lorentzian(1.0).unwrap().centered_at(-10.0);
        let input = p.time_signal(-30.0, 0.0, 3001);
        let echo = TimeSignal::new(0.0f64, input.dt, input.reversed().values.iter().map(|v| v * Complex::new(0.0, -3.0)).collect())
            .unwrap();
        assert!((shape_fidelity(&echo, &input).unwrap() - 1.0).abs() < 1e-12);
        // carriers that stay orthogonal at every lag once one is reversed
        let env = |i: usize| (-((i as f64 - 1000.0) * 0.01).powi(2) / 2.0).exp();
        let carrier: Vec<_> = (0..2001).map(|i| Complex::from_polar(env(i), 20.0 * i as f64 * 0.01)).collect();
        let a = TimeSignal::new(-10.0, 0.01, carrier.clone()).unwrap();
        let b = TimeSignal::new(-10.0, 0.01, carrier).unwrap();
        assert!(shape_fidelity(&a, &b).unwrap() < 1e-12);
        let zero = TimeSignal::new(0.0, 0.01, vec![Complex::new(0.0, 0.0); 10]).unwrap();
        assert!(shape_fidelity(&zero, &a).is_err());
    }

    #[test]
    fn decay_fit_examples() {
        let pts: Vec<(f64, f64)> = (0..8).map(|i| (30.0 + 5.0 * i as f64, (-0.1 * (30.0 + 5.0 * i as f64)).exp())).collect();
        assert!((fit_exponential_decay(&pts).unwrap() - 0.1).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, 0.7)).collect();
        assert!(fit_exponential_decay(&flat).unwrap().abs() < 1e-12);
        assert!(fit_exponential_decay(&pts[..4]).is_err());
        let mut bad = pts.clone();
        bad[2].1 = 0.0;
        assert!(matches!(fit_exponential_decay(&bad), Err(CribError::Data(_))));
    }
}
