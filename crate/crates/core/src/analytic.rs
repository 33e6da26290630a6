//! Frequency-domain solution for the transmitted and retrieved fields.
//!
//! With `S(w, Δ₀) = H(-w + 2Δ₀) + F(w)` and transit time `τ = L/c`:
//!
//! ```text
//! backward:  E_out(0, w) = -ν ∫ dΔ₀ G₀ J (1 - e^{-D})/D  E_in(-w + 2Δ₀),   D = νS - 2iΔ₀τ
//! forward:   E_out(L, w) = -ν ∫ dΔ₀ G₀ J sinhc(ν(F - H')/2 - iτ(w - Δ₀))
//!                                    × exp(iτΔ₀ - ν(F + H')/2)  E_in(-w + 2Δ₀)
//! ```
//!
//! where `H' = H(-w + 2Δ₀)` and `J = J(w; Δ₀)`.

use std::cell::Cell;

use num_complex::Complex;

use crate::error::{CribError, Result};
use crate::kernels::MediumSpec;
use crate::num::{cis, cplx, one_minus_exp_over, real, sinhc, Real};
use crate::quadrature::{integrate_breaks, integrate_real_line, sorted_breaks, Tolerance};
use crate::spectral::{inverse_transform, SpectralDistribution, ComplexSpectrum, FrequencyGrid, PulseSpec, Spectrum, TimeSignal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Detuning reversal plus the phase-matching flip; emission backward.
    BackwardComplete,
    /// Detuning reversal only; emission forward with reabsorption.
    ForwardSimplified,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::BackwardComplete => "backward",
            Direction::ForwardSimplified => "forward",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = CribError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "backward" | "backward_complete" => Ok(Direction::BackwardComplete),
            "forward" | "forward_simplified" => Ok(Direction::ForwardSimplified),
            other => Err(CribError::InvalidConfig(format!("unknown direction `{other}`"))),
        }
    }
}

/// Retrieval protocol. Rephasing happens at `t = 0`; the input is centered
/// at `-T/2` and the echo near `+T/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolConfig<T> {
    pub direction: Direction,
    pub storage_time: T,
}

impl<T: Real> ProtocolConfig<T> {
    /// `storage_time` is in units of the inverse pulse bandwidth and must be
    /// at least 10 so the pulse fits before rephasing.
    pub fn new(direction: Direction, storage_time: T) -> Result<Self> {
        if !(storage_time >= T::lit(10.0)) {
            return Err(CribError::InvalidConfig(format!(
                "storage time must be >= 10 pulse durations, got {storage_time}"
            )));
        }
        Ok(Self { direction, storage_time })
    }

    /// The input pulse re-centered at `-T/2`.
    pub fn place_input(&self, pulse: &PulseSpec<T>) -> PulseSpec<T> {
        pulse.clone().centered_at(-self.storage_time / T::lit(2.0))
    }
}

/// Checks that the input has left the medium before rephasing.
pub fn check_input_truncation<T: Real>(pulse: &PulseSpec<T>) -> Result<()> {
    let frac = pulse.energy_after(T::zero()) / pulse.energy();
    if frac > T::lit(1e-6) {
        Err(CribError::Precondition(format!(
            "input carries {frac:.3e} of its energy after the rephasing time (limit 1e-6)"
        )))
    } else {
        Ok(())
    }
}

/// Convergence record of the `Δ₀` quadrature.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadratureReport {
    pub max_nodes: usize,
    pub worst_relative_change: f64,
}

impl QuadratureReport {
    fn merge(&mut self, nodes: usize, change: f64) {
        self.max_nodes = self.max_nodes.max(nodes);
        if change > self.worst_relative_change {
            self.worst_relative_change = change;
        }
    }
}

/// Spectrum together with its quadrature diagnostics.
#[derive(Clone, Debug)]
pub struct SolverOutput<T> {
    pub spectrum: ComplexSpectrum<T>,
    pub report: QuadratureReport,
}

const REL_TOL: f64 = 1e-8;

/// Integral over the initial line `G₀(Δ₀)`. A delta line is a single
/// node; otherwise the integral is adaptive (Gauss–Kronrod) with panels
/// seeded at every point where the integrand is not smooth: the edges of
/// `G₀`, the edges of `J(w; ·)`, and the kinks of `H(-w + 2Δ₀)`.
pub struct Delta0Integrator<T> {
    g0: SpectralDistribution<T>,
    gp_breaks: Vec<T>,
    gp_support: (T, T),
    gp_width: T,
    tol: Tolerance<T>,
}

impl<T: Real> Delta0Integrator<T> {
    /// `reference` is the scale of the input amplitude; absolute errors
    /// below `1e-12 * reference` are accepted.
    pub fn new(m: &MediumSpec<T>, reference: T) -> Self {
        let gp = &m.ctx.gp;
        Self {
            g0: m.ctx.g0.clone(),
            gp_breaks: gp.breakpoints(),
            gp_support: gp.support(),
            gp_width: gp.width(),
            tol: Tolerance {
                abs_tol: T::lit(1e-12) * reference.abs(),
                rel_tol: T::lit(REL_TOL),
                max_panels: 4000,
            },
        }
    }

    fn breaks(&self, w: T, lo: T, hi: T) -> Vec<T> {
        let two = T::lit(2.0);
        let c0 = self.g0.center();
        let w0 = self.g0.width();
        let mut pts = self.g0.breakpoints();
        if matches!(self.g0, SpectralDistribution::Lorentzian { .. }) {
            for k in [1.0, 4.0, 16.0] {
                pts.push(c0 - w0 * T::lit(k));
                pts.push(c0 + w0 * T::lit(k));
            }
        }
        for &b in &self.gp_breaks {
            pts.push(w - b);
            pts.push(w - b - self.gp_width);
            pts.push(w - b + self.gp_width);
            for &b0 in self.g0.breakpoints().iter() {
                pts.push((w + b + b0) / two);
            }
        }
        pts.push(lo);
        pts.push(hi);
        pts.retain(|p| *p >= lo && *p <= hi);
        sorted_breaks(pts)
    }

    fn integrate<F>(&self, w: T, f: F, report: &mut QuadratureReport) -> Result<Complex<T>>
    where
        F: Fn(T) -> Result<Complex<T>>,
    {
        if let SpectralDistribution::Delta { center } = self.g0 {
            report.merge(1, 0.0);
            return f(center);
        }
        // J(w; Δ₀) vanishes unless w - Δ₀ lies in the support of G'.
        let (s0, s1) = self.g0.support();
        let lo = s0.max(w - self.gp_support.1);
        let hi = s1.min(w - self.gp_support.0);
        if !(lo < hi) {
            return Ok(real(T::zero()));
        }
        let failure = Cell::new(None);
        let calls = Cell::new(0usize);
        let g = |d0: T| -> Complex<T> {
            calls.set(calls.get() + 1);
            let weight = match self.g0.density(d0) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e));
                    return real(T::zero());
                }
            };
            if weight == T::zero() {
                return real(T::zero());
            }
            match f(d0) {
                Ok(v) => v * weight,
                Err(e) => {
                    failure.set(Some(e));
                    real(T::zero())
                }
            }
        };
        let pts = self.breaks(w, lo, hi);
        let est = if lo.is_finite() && hi.is_finite() {
            integrate_breaks(g, &pts, self.tol)
        } else {
            let scale = self.g0.width().max(self.gp_width);
            integrate_real_line(g, &pts, scale, self.tol)
        };
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let mag = est.value.norm();
        let rel = if mag > T::zero() { (est.error / mag).as_f64() } else { 0.0 };
        if !est.converged {
            return Err(CribError::QuadratureNotConverged { achieved: rel, nodes: calls.get() });
        }
        report.merge(calls.get(), rel);
        Ok(est.value)
    }
}

/// `E(z, w) = E(0, w) e^{iwτz} e^{-νH(w)z}` for `0 <= z <= 1` (fraction of L).
pub fn transmitted_spectrum<T: Real>(
    m: &MediumSpec<T>,
    input: &ComplexSpectrum<T>,
    z: T,
) -> Result<ComplexSpectrum<T>> {
    if !(z >= T::zero() && z <= T::one()) {
        return Err(CribError::Precondition(format!("position must lie in [0, 1], got {z}")));
    }
    if m.nu == T::zero() && m.transit == T::zero() {
        return Ok(input.clone());
    }
    let values = input
        .grid
        .points()
        .zip(&input.values)
        .map(|(w, e)| {
            let h = m.ctx.kernel_h(w)?;
            Ok(*e * cis(w * m.transit * z) * (-(h * (m.nu * z))).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexSpectrum::new(input.grid.clone(), values)
}

/// Backward-emitted amplitude at frequency `w`.
pub fn backward_amplitude<T: Real, S: Spectrum<T> + ?Sized>(
    m: &MediumSpec<T>,
    input: &S,
    w: T,
    quad: &Delta0Integrator<T>,
    report: &mut QuadratureReport,
) -> Result<Complex<T>> {
    if m.nu == T::zero() {
        return Ok(real(T::zero()));
    }
    let ctx = &m.ctx;
    let f_w = ctx.kernel_f(w)?;
    let two = T::lit(2.0);
    let integral = quad.integrate(
        w,
        |d0| {
            let j = ctx.kernel_j(w, d0)?;
            if j == T::zero() {
                return Ok(real(T::zero()));
            }
            let shifted = -w + two * d0;
            let s = ctx.kernel_h(shifted)? + f_w;
            let d = s * m.nu - cplx(T::zero(), two * d0 * m.transit);
            Ok(one_minus_exp_over(d) * j * input.amplitude(shifted))
        },
        report,
    )?;
    Ok(-integral * m.nu)
}

/// Forward-emitted amplitude at frequency `w`.
pub fn forward_amplitude<T: Real, S: Spectrum<T> + ?Sized>(
    m: &MediumSpec<T>,
    input: &S,
    w: T,
    quad: &Delta0Integrator<T>,
    report: &mut QuadratureReport,
) -> Result<Complex<T>> {
    if m.nu == T::zero() {
        return Ok(real(T::zero()));
    }
    let ctx = &m.ctx;
    let f_w = ctx.kernel_f(w)?;
    let two = T::lit(2.0);
    let half_nu = m.nu / two;
    let integral = quad.integrate(
        w,
        |d0| {
            let j = ctx.kernel_j(w, d0)?;
            if j == T::zero() {
                return Ok(real(T::zero()));
            }
            let shifted = -w + two * d0;
            let h = ctx.kernel_h(shifted)?;
            let arg = (f_w - h) * half_nu - cplx(T::zero(), m.transit * (w - d0));
            let decay = cplx(T::zero(), m.transit * d0) - (f_w + h) * half_nu;
            Ok(sinhc(arg) * decay.exp() * j * input.amplitude(shifted))
        },
        report,
    )?;
    Ok(-integral * m.nu)
}

/// Retrieved amplitude for either protocol direction.
pub fn output_amplitude<T: Real, S: Spectrum<T> + ?Sized>(
    m: &MediumSpec<T>,
    direction: Direction,
    input: &S,
    w: T,
    quad: &Delta0Integrator<T>,
    report: &mut QuadratureReport,
) -> Result<Complex<T>> {
    match direction {
        Direction::BackwardComplete => backward_amplitude(m, input, w, quad, report),
        Direction::ForwardSimplified => forward_amplitude(m, input, w, quad, report),
    }
}

fn reference_amplitude<T: Real, S: Spectrum<T> + ?Sized>(input: &S, grid: &FrequencyGrid<T>) -> T {
    grid.points().fold(T::zero(), |m, w| m.max(input.amplitude(w).norm()))
}

fn solve<T: Real, S: Spectrum<T> + ?Sized>(
    m: &MediumSpec<T>,
    direction: Direction,
    input: &S,
    grid: &FrequencyGrid<T>,
) -> Result<SolverOutput<T>> {
    let quad = Delta0Integrator::new(m, reference_amplitude(input, grid));
    let mut report = QuadratureReport::default();
    let values = grid
        .points()
        .map(|w| output_amplitude(m, direction, input, w, &quad, &mut report))
        .collect::<Result<Vec<_>>>()?;
    Ok(SolverOutput { spectrum: ComplexSpectrum::new(grid.clone(), values)?, report })
}

/// Backward output spectrum at `z = 0` on `grid`.
pub fn backward_output_spectrum<T: Real, S: Spectrum<T> + ?Sized>(
    m: &MediumSpec<T>,
    p: &ProtocolConfig<T>,
    input: &S,
    grid: &FrequencyGrid<T>,
) -> Result<SolverOutput<T>> {
    if p.direction != Direction::BackwardComplete {
        return Err(CribError::Precondition("protocol direction is not backward".into()));
    }
    solve(m, Direction::BackwardComplete, input, grid)
}

/// Forward output spectrum at `z = L` on `grid`.
pub fn forward_output_spectrum<T: Real, S: Spectrum<T> + ?Sized>(
    m: &MediumSpec<T>,
    p: &ProtocolConfig<T>,
    input: &S,
    grid: &FrequencyGrid<T>,
) -> Result<SolverOutput<T>> {
    if p.direction != Direction::ForwardSimplified {
        return Err(CribError::Precondition("protocol direction is not forward".into()));
    }
    solve(m, Direction::ForwardSimplified, input, grid)
}

/// Output spectrum for the protocol's direction.
pub fn output_spectrum<T: Real, S: Spectrum<T> + ?Sized>(
    m: &MediumSpec<T>,
    p: &ProtocolConfig<T>,
    input: &S,
    grid: &FrequencyGrid<T>,
) -> Result<SolverOutput<T>> {
    solve(m, p.direction, input, grid)
}

/// `∫ dΔ₀ G₀(Δ₀) e^{-2iΔ₀t}`: the factor multiplying the echo amplitude at
/// time `t` after rephasing. Identically one for a delta initial line.
pub fn storage_decay_factor<T: Real>(m: &MediumSpec<T>, t: T) -> Complex<T> {
    m.ctx.g0.fourier(t)
}

/// Window `[0, T_max]` used to reconstruct output time signals:
/// `T_max = T + 10/Γ + 10/γ₀` (last term only for a nondelta initial line).
pub fn output_window<T: Real>(m: &MediumSpec<T>, p: &ProtocolConfig<T>, bandwidth: T) -> T {
    let g0 = m.ctx.g0.width();
    let extra = if g0 > T::zero() { T::lit(10.0) / g0 } else { T::zero() };
    p.storage_time + T::lit(10.0) / bandwidth + extra
}

/// Inverse transform of an output spectrum onto `t ∈ [0, t_max]`.
pub fn output_time_signal<T: Real>(spectrum: &ComplexSpectrum<T>, t_max: T, dt: T) -> TimeSignal<T> {
    let n = (t_max / dt).ceil().to_usize().unwrap_or(1) + 1;
    inverse_transform(spectrum, T::zero(), dt, n)
}

/// Reduced forms for the special shape pairs with a delta initial line.
/// Each returns the transfer factor `R(w)` with `E_out(w) = R(w) E_in(-w)`
/// (instantaneous propagation unless a transit time is given).
pub mod closed_form {
    use super::*;
    use crate::num::sinc;

    /// Box broadening with `Γ ≪ γ`: `-(1 - e^{-αL})`.
    pub fn box_backward<T: Real>(alpha_l: T) -> T {
        -(T::one() - (-alpha_l).exp())
    }

    /// Box broadening with `Γ ≪ γ`: `-αL e^{-αL/2} sin(wτ)/(wτ)`.
    pub fn box_forward<T: Real>(alpha_l: T, transit: T, w: T) -> T {
        -alpha_l * (-alpha_l / T::lit(2.0)).exp() * sinc(w * transit)
    }

    /// Lorentzian broadening: `-(1 - exp(-νγ/(γ²/4 + w²)))`.
    pub fn lorentzian_backward<T: Real>(nu: T, gamma: T, w: T) -> T {
        let a = nu * gamma / (gamma * gamma / T::lit(4.0) + w * w);
        -(T::one() - (-a).exp())
    }

    /// Lorentzian broadening:
    /// `-(νγ/(γ²/4 + w²)) exp(-νγ/(2(γ²/4 + w²))) sinc(νw/(γ²/4 + w²))`.
    pub fn lorentzian_forward<T: Real>(nu: T, gamma: T, w: T) -> T {
        let d = gamma * gamma / T::lit(4.0) + w * w;
        let a = nu * gamma / d;
        -a * (-a / T::lit(2.0)).exp() * sinc(nu * w / d)
    }

    /// Box broadening, any `Γ/γ`: `-(1 - e^{-2πν/γ})` inside the band, zero
    /// outside.
    pub fn box_band_backward<T: Real>(nu: T, gamma: T, w: T) -> T {
        if w.abs() < gamma / T::lit(2.0) {
            -(T::one() - (-T::TAU() * nu / gamma).exp())
        } else {
            T::zero()
        }
    }

    /// Box broadening, any `Γ/γ`, inside the band:
    /// `-(2πν/γ) e^{-πν/γ} sinc((ν/γ) ln((γ + 2w)/(γ - 2w)))`.
    pub fn box_band_forward<T: Real>(nu: T, gamma: T, w: T) -> T {
        let two = T::lit(2.0);
        if w.abs() < gamma / two {
            let log = ((gamma + two * w) / (gamma - two * w)).ln();
            -(T::TAU() * nu / gamma) * (-T::PI() * nu / gamma).exp() * sinc(nu / gamma * log)
        } else {
            T::zero()
        }
    }

    /// Large-band approximation of [`box_band_forward`] (sinc set to one).
    pub fn box_band_forward_approx<T: Real>(nu: T, gamma: T, w: T) -> T {
        if w.abs() < gamma / T::lit(2.0) {
            -(T::TAU() * nu / gamma) * (-T::PI() * nu / gamma).exp()
        } else {
            T::zero()
        }
    }

    /// Time-domain echo with a finite initial line and box broadening:
    /// `E_out(t) = -(1 - e^{-αL}) E_in(-t) Ĝ₀(2t)`.
    pub fn decayed_backward_echo<T: Real>(
        m: &MediumSpec<T>,
        alpha_l: T,
        input: &TimeSignal<T>,
        t: T,
    ) -> Complex<T> {
        input.sample(-t) * super::storage_decay_factor(m, t) * box_backward(alpha_l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelContext;
    use crate::spectral::SpectralDistribution;

    fn box_medium(gamma: f64, alpha_l: f64) -> MediumSpec<f64> {
        let ctx = KernelContext::new(SpectralDistribution::delta(), SpectralDistribution::boxcar(gamma).unwrap()).unwrap();
        MediumSpec::with_optical_depth(alpha_l, ctx).unwrap()
    }

    #[test]
    fn protocol_requires_long_storage() {
        assert!(ProtocolConfig::new(Direction::BackwardComplete, 9.0f64).is_err());
        assert!(ProtocolConfig::new(Direction::BackwardComplete, 10.0f64).is_ok());
    }

    #[test]
    fn zero_coupling_transmits_unchanged_and_emits_nothing() {
        let m = MediumSpec::new(0.0, box_medium(100.0, 1.0).ctx).unwrap();
        let grid = FrequencyGrid::symmetric(20.0, 201).unwrap();
        let pulse = PulseSpec::lorentzian(1.0).unwrap().centered_at(-15.0);
        let input = ComplexSpectrum::sample(&grid, &pulse);
        assert_eq!(transmitted_spectrum(&m, &input, 1.0).unwrap(), input);
        for dir in [Direction::BackwardComplete, Direction::ForwardSimplified] {
            let p = ProtocolConfig::new(dir, 30.0).unwrap();
            let out = output_spectrum(&m, &p, &input, &grid).unwrap();
            assert!(out.spectrum.values.iter().all(|v| *v == Complex::new(0.0, 0.0)));
        }
    }

    #[test]
    fn transmission_follows_beer_lambert_and_composes() {
        let m = box_medium(2.0 * std::f64::consts::PI, 1.0);
        let grid = FrequencyGrid::symmetric(2.0, 41).unwrap();
        let input = ComplexSpectrum::sample(&grid, &PulseSpec::lorentzian(1.0).unwrap());
        let full = transmitted_spectrum(&m, &input, 1.0).unwrap();
        let mid = grid.len() / 2;
        let ratio = full.values[mid].norm_sqr() / input.values[mid].norm_sqr();
        assert!((ratio - (-1.0f64).exp()).abs() < 1e-14);
        let half = transmitted_spectrum(&m, &input, 0.5).unwrap();
        let twice = transmitted_spectrum(&m, &half, 0.5).unwrap();
        for (a, b) in twice.values.iter().zip(&full.values) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(transmitted_spectrum(&m, &input, 1.5).is_err());
    }

    #[test]
    fn direction_mismatch_is_rejected() {
        let m = box_medium(100.0, 1.0);
        let grid = FrequencyGrid::symmetric(20.0, 11).unwrap();
        let pulse = PulseSpec::lorentzian(1.0).unwrap();
        let p = ProtocolConfig::new(Direction::ForwardSimplified, 30.0).unwrap();
        assert!(backward_output_spectrum(&m, &p, &pulse, &grid).is_err());
    }

    #[test]
    fn input_truncation_check() {
        let p = PulseSpec::lorentzian(1.0).unwrap();
        assert!(check_input_truncation(&p.clone().centered_at(-5.0)).is_err());
        assert!(check_input_truncation(&p.centered_at(-15.0)).is_ok());
    }

    #[test]
    fn storage_decay_examples() {
        let delta = box_medium(100.0, 1.0);
        assert_eq!(storage_decay_factor(&delta, 12.0), Complex::new(1.0, 0.0));
        let ctx = KernelContext::new(
            SpectralDistribution::lorentzian(0.1).unwrap(),
            SpectralDistribution::boxcar(100.0).unwrap(),
        )
        .unwrap();
        let m = MediumSpec::new(1.0, ctx).unwrap();
        assert!((storage_decay_factor(&m, 15.0).re - (-1.5f64).exp()).abs() < 1e-15);
    }

    fn pointwise(m: &MediumSpec<f64>, dir: Direction, w: f64) -> Complex<f64> {
        let pulse = PulseSpec::lorentzian(1.0).unwrap();
        let quad = Delta0Integrator::new(m, 1.0);
        let mut rep = QuadratureReport::default();
        output_amplitude(m, dir, &pulse, w, &quad, &mut rep).unwrap() / pulse.amplitude(-w)
    }

    #[test]
    fn lorentzian_broadening_matches_reduced_forms() {
        let (nu, gamma) = (2.0, 1.5);
        let ctx = KernelContext::new(SpectralDistribution::delta(), SpectralDistribution::lorentzian(gamma).unwrap()).unwrap();
        let m = MediumSpec::new(nu, ctx).unwrap();
        for w in [-3.0, -0.4, 0.0, 0.7, 2.5] {
            let b = pointwise(&m, Direction::BackwardComplete, w);
            let f = pointwise(&m, Direction::ForwardSimplified, w);
            assert!((b - closed_form::lorentzian_backward(nu, gamma, w)).norm() < 1e-12, "w={w}");
            assert!((f - closed_form::lorentzian_forward(nu, gamma, w)).norm() < 1e-12, "w={w}");
        }
    }

    #[test]
    fn box_broadening_matches_reduced_forms() {
        let (nu, gamma) = (1.3, 4.0);
        let ctx = KernelContext::new(SpectralDistribution::delta(), SpectralDistribution::boxcar(gamma).unwrap()).unwrap();
        let m = MediumSpec::new(nu, ctx).unwrap();
        for w in [-1.9, -0.3, 0.0, 1.1, 2.5] {
            let b = pointwise(&m, Direction::BackwardComplete, w);
            let f = pointwise(&m, Direction::ForwardSimplified, w);
            assert!((b - closed_form::box_band_backward(nu, gamma, w)).norm() < 1e-12, "w={w}");
            assert!((f - closed_form::box_band_forward(nu, gamma, w)).norm() < 1e-12, "w={w}");
        }
    }

    #[test]
    fn transit_enters_forward_as_sinc() {
        let alpha_l = 1.5;
        let m = box_medium(1e4, alpha_l).with_transit(0.8).unwrap();
        for w in [0.0, 0.9, 3.0] {
            let f = pointwise(&m, Direction::ForwardSimplified, w);
            let expect = closed_form::box_forward(alpha_l, 0.8, w);
            assert!((f - expect).norm() < 1e-3, "w={w}: {f} vs {expect}");
        }
    }
}
