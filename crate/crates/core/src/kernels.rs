//! Response kernels of the broadened medium.
//!
//! * `H(w) = ∫_0^∞ dx e^{iwx} Ĝ₀(x) Ĝ'(x)`: absorption and dispersion of the
//!   incoming field, `H(w) = π G(w) + i PV ∫ dΔ G(Δ)/(w - Δ)` with
//!   `G = G₀ * G'`.
//! * `F(w)`: the same transform for the distribution after the broadening
//!   has been reversed (`G₀ * G'(-·)`); it governs propagation of the
//!   re-emitted field. `F(w) = H(-w)*` for symmetric `G₀`.
//! * `J(w; Δ₀) = 2π G'(w - Δ₀)`: source coupling of the stored coherence.
//!
//! `Ĝ(x) = ∫ dΔ G(Δ) e^{-iΔx}` here.

use num_complex::Complex;

use crate::error::{CribError, Result};
use crate::num::{cplx, log_upper, real, Real};
use crate::quadrature::{integrate_breaks, integrate_real_line, sorted_breaks, Tolerance};
use crate::spectral::SpectralDistribution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EvaluationMode {
    /// Analytic expressions wherever the shape pair admits them.
    #[default]
    ClosedForm,
    /// Plemelj split with principal-value quadrature for every shape.
    Quadrature,
}

/// Initial line `G₀` together with the broadening `G'` applied to it.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelContext<T> {
    pub g0: SpectralDistribution<T>,
    pub gp: SpectralDistribution<T>,
    pub mode: EvaluationMode,
}

impl<T: Real> KernelContext<T> {
    pub fn new(g0: SpectralDistribution<T>, gp: SpectralDistribution<T>) -> Result<Self> {
        if gp.is_delta() {
            return Err(CribError::InvalidDistribution(
                "the broadened distribution G' must have nonzero width".into(),
            ));
        }
        Ok(Self { g0, gp, mode: EvaluationMode::ClosedForm })
    }

    pub fn with_mode(mut self, mode: EvaluationMode) -> Self {
        self.mode = mode;
        self
    }

    /// Context describing the medium after every `Δ'` has been reversed.
    pub fn reversed(&self) -> Self {
        Self {
            g0: self.g0.clone(),
            gp: self.gp.reflected(),
            mode: self.mode,
        }
    }

    /// Density of the broadened distribution `G = G₀ * G'`.
    pub fn broadened_density(&self, d: T) -> Result<T> {
        use SpectralDistribution as S;
        match (&self.g0, &self.gp) {
            (S::Delta { center }, gp) => gp.density(d - *center),
            (S::Lorentzian { width: a, center: ca }, S::Lorentzian { width: b, center: cb }) => {
                S::Lorentzian { width: *a + *b, center: *ca + *cb }.density(d)
            }
            (g0, gp) => {
                let f = |x: T| {
                    g0.density(x).unwrap_or_else(|_| T::zero()) * gp.density(d - x).unwrap_or_else(|_| T::zero())
                };
                let mut bps: Vec<T> = g0.breakpoints();
                bps.extend(gp.breakpoints().into_iter().map(|b| d - b));
                let (lo, hi) = g0.support();
                let tol = Tolerance { abs_tol: T::lit(1e-13), rel_tol: T::lit(1e-11), max_panels: 4000 };
                let est = if lo.is_finite() && hi.is_finite() {
                    bps.retain(|b| *b > lo && *b < hi);
                    bps.push(lo);
                    bps.push(hi);
                    integrate_breaks(f, &sorted_breaks(bps), tol)
                } else {
                    integrate_real_line(f, &sorted_breaks(bps), g0.width().max(T::lit(1e-6)), tol)
                };
                Ok(est.value)
            }
        }
    }

    /// Breakpoints and support of the broadened distribution.
    fn broadened_geometry(&self) -> (Vec<T>, (T, T), T) {
        let (a0, b0) = self.g0.support();
        let (a1, b1) = self.gp.support();
        let mut bps = Vec::new();
        for p in self.g0.breakpoints() {
            for q in self.gp.breakpoints() {
                bps.push(p + q);
            }
        }
        let width = (self.g0.width() + self.gp.width()).max(T::lit(1e-9));
        (sorted_breaks(bps), (a0 + a1, b0 + b1), width)
    }

    /// Jump discontinuities of `G` at which `H` is log-singular.
    fn edges(&self) -> Vec<T> {
        if !self.g0.is_delta() {
            return Vec::new();
        }
        let c = self.g0.center();
        match &self.gp {
            SpectralDistribution::Box { .. } => {
                let (a, b) = self.gp.support();
                vec![a + c, b + c]
            }
            SpectralDistribution::Tabulated(t) => {
                let nodes = t.nodes();
                let mut e = Vec::new();
                for &x in [nodes[0], nodes[nodes.len() - 1]].iter() {
                    if t.eval(x) > T::zero() {
                        e.push(x + c);
                    }
                }
                e
            }
            _ => Vec::new(),
        }
    }

    fn check_edges(&self, w: T) -> Result<()> {
        if self.edges().into_iter().any(|e| e == w) {
            Err(CribError::SingularPoint { omega: w.as_f64() })
        } else {
            Ok(())
        }
    }

    /// `H(w)`.
    pub fn kernel_h(&self, w: T) -> Result<Complex<T>> {
        self.check_edges(w)?;
        if self.mode == EvaluationMode::ClosedForm {
            if let Some(h) = self.closed_form_h(w) {
                return h;
            }
        }
        self.plemelj_h(w)
    }

    /// `F(w)`.
    pub fn kernel_f(&self, w: T) -> Result<Complex<T>> {
        self.reversed().kernel_h(w)
    }

    /// `J(w; Δ₀) = 2π G'(w - Δ₀)`.
    pub fn kernel_j(&self, w: T, delta0: T) -> Result<T> {
        Ok(T::TAU() * self.gp.density(w - delta0)?)
    }

    fn closed_form_h(&self, w: T) -> Option<Result<Complex<T>>> {
        use SpectralDistribution as S;
        match &self.g0 {
            S::Delta { center } => h_of_broadening(&self.gp, real(w - *center)).map(Ok),
            S::Lorentzian { width, center } => {
                h_of_broadening(&self.gp, cplx(w - *center, *width / T::lit(2.0))).map(Ok)
            }
            g0 => {
                // average of the G' kernel over the initial line
                h_of_broadening(&self.gp, real(T::zero()))?;
                let (lo, hi) = g0.support();
                let mut bps = g0.breakpoints();
                bps.extend(self.gp.breakpoints().into_iter().map(|b| w - b));
                if let S::Box { .. } = self.gp {
                    let (a, b) = self.gp.support();
                    bps.push(w - a);
                    bps.push(w - b);
                }
                bps.retain(|b| *b > lo && *b < hi);
                bps.push(lo);
                bps.push(hi);
                let gp = &self.gp;
                let est = integrate_breaks(
                    |x: T| {
                        let h = h_of_broadening(gp, real(w - x)).unwrap_or_else(|| real(T::zero()));
                        let h = if h.re.is_finite() && h.im.is_finite() { h } else { real(T::zero()) };
                        h * g0.density(x).unwrap_or_else(|_| T::zero())
                    },
                    &sorted_breaks(bps),
                    Tolerance { abs_tol: T::lit(1e-13), rel_tol: T::lit(1e-11), max_panels: 4000 },
                );
                Some(Ok(est.value))
            }
        }
    }

    fn plemelj_h(&self, w: T) -> Result<Complex<T>> {
        let g_w = self.broadened_density(w)?;
        let (mut bps, _, width) = self.broadened_geometry();
        let radius = width;
        bps.push(w - radius);
        bps.push(w);
        bps.push(w + radius);
        let bps = sorted_breaks(bps);
        let pv = integrate_real_line(
            |d: T| {
                let inside = (d - w).abs() <= radius;
                let g = self.broadened_density(d).unwrap_or_else(|_| T::zero());
                let num = if inside { g - g_w } else { g };
                let den = w - d;
                if den == T::zero() {
                    T::zero()
                } else {
                    num / den
                }
            },
            &bps,
            width,
            Tolerance { abs_tol: T::lit(1e-12) / width, rel_tol: T::lit(1e-11), max_panels: 8000 },
        );
        Ok(cplx(T::PI() * g_w, pv.value))
    }
}

/// Closed-form `H` of a single broadened line centered at zero, continued
/// to `Im z >= 0`. `None` when no closed form exists for the shape.
fn h_of_broadening<T: Real>(gp: &SpectralDistribution<T>, z: Complex<T>) -> Option<Complex<T>> {
    match gp {
        SpectralDistribution::Lorentzian { width, center } => {
            let i = cplx(T::zero(), T::one());
            Some(i / (z - *center + i * (*width / T::lit(2.0))))
        }
        SpectralDistribution::Box { width, center } => {
            let h = *width / T::lit(2.0);
            let u = z - *center;
            let i_over = cplx(T::zero(), width.recip());
            Some(i_over * (log_upper(u + h) - log_upper(u - h)))
        }
        _ => None,
    }
}

/// A medium: coupling `ν = ηL`, spectral structure, and transit time `L/c`
/// in units of the inverse pulse bandwidth.
#[derive(Clone, Debug, PartialEq)]
pub struct MediumSpec<T> {
    pub nu: T,
    pub ctx: KernelContext<T>,
    pub transit: T,
}

impl<T: Real> MediumSpec<T> {
    pub fn new(nu: T, ctx: KernelContext<T>) -> Result<Self> {
        if !(nu.is_finite() && nu >= T::zero()) {
            return Err(CribError::InvalidConfig(format!("coupling nu must be >= 0, got {nu}")));
        }
        Ok(Self { nu, ctx, transit: T::zero() })
    }

    /// Medium whose optical depth at `w = 0` equals `alpha_l`.
    pub fn with_optical_depth(alpha_l: T, ctx: KernelContext<T>) -> Result<Self> {
        let re_h = ctx.kernel_h(T::zero())?.re;
        if !(re_h > T::zero()) {
            return Err(CribError::InvalidConfig("no absorption at line center".into()));
        }
        Self::new(alpha_l / (T::lit(2.0) * re_h), ctx)
    }

    pub fn with_transit(mut self, transit: T) -> Result<Self> {
        if !(transit.is_finite() && transit >= T::zero()) {
            return Err(CribError::InvalidConfig(format!("transit must be >= 0, got {transit}")));
        }
        self.transit = transit;
        Ok(self)
    }

    /// `αL(w) = 2ν Re H(w)`.
    pub fn optical_depth(&self, w: T) -> Result<T> {
        if self.nu == T::zero() {
            return Ok(T::zero());
        }
        Ok(T::lit(2.0) * self.nu * self.ctx.kernel_h(w)?.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ctx(gp: SpectralDistribution<f64>) -> KernelContext<f64> {
        KernelContext::new(SpectralDistribution::delta(), gp).unwrap()
    }

    #[test]
    fn h_examples() {
        let b = ctx(SpectralDistribution::boxcar(2.0 * PI).unwrap());
        let h = b.kernel_h(0.0).unwrap();
        assert!((h.re - 0.5).abs() < 1e-15 && h.im.abs() < 1e-15);
        let l = ctx(SpectralDistribution::lorentzian(4.0).unwrap());
        let h = l.kernel_h(0.0).unwrap();
        assert!((h.re - 0.5).abs() < 1e-15 && h.im.abs() < 1e-15);
    }

    #[test]
    fn box_f_example() {
        let b = ctx(SpectralDistribution::boxcar(1.0).unwrap());
        let f = b.kernel_f(0.25).unwrap();
        assert!((f.re - PI).abs() < 1e-14);
        assert!((f.im - 3.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn box_band_edge_is_singular() {
        let b = ctx(SpectralDistribution::boxcar(1.0).unwrap());
        assert_eq!(b.kernel_h(0.5), Err(CribError::SingularPoint { omega: 0.5 }));
        assert!(b.kernel_h(0.5 + 1e-9).is_ok());
        let q = b.clone().with_mode(EvaluationMode::Quadrature);
        assert!(q.kernel_h(-0.5).is_err());
    }

    #[test]
    fn box_h_outside_band_is_real_free() {
        let b = ctx(SpectralDistribution::boxcar(1.0).unwrap());
        let h = b.kernel_h(2.0).unwrap();
        assert!(h.re.abs() < 1e-15);
        assert!((h.im - (5.0f64 / 3.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn j_examples() {
        let b = ctx(SpectralDistribution::boxcar(1.0).unwrap());
        assert!((b.kernel_j(0.0, 0.0).unwrap() - 2.0 * PI).abs() < 1e-15);
        let l = ctx(SpectralDistribution::lorentzian(2.0).unwrap());
        assert!((l.kernel_j(0.0, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((l.kernel_j(1.3, 0.4).unwrap() - l.kernel_j(0.9, 0.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn optical_depth_examples() {
        let m = MediumSpec::new(1.0, ctx(SpectralDistribution::boxcar(2.0 * PI).unwrap())).unwrap();
        assert!((m.optical_depth(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((m.optical_depth(0.9 * PI).unwrap() - 1.0).abs() < 1e-15);
        let z = MediumSpec::new(0.0, m.ctx.clone()).unwrap();
        assert_eq!(z.optical_depth(0.3).unwrap(), 0.0);
        assert!(MediumSpec::new(-1.0, m.ctx.clone()).is_err());
    }

    #[test]
    fn delta_broadening_rejected() {
        assert!(KernelContext::<f64>::new(SpectralDistribution::delta(), SpectralDistribution::delta()).is_err());
    }

    #[test]
    fn lorentzian_initial_line_adds_widths() {
        // Lorentzian ⊗ Lorentzian: H is the single-Lorentzian kernel of the summed width
        let k = KernelContext::new(
            SpectralDistribution::lorentzian(0.3).unwrap(),
            SpectralDistribution::lorentzian(2.0).unwrap(),
        )
        .unwrap();
        let s = ctx(SpectralDistribution::lorentzian(2.3).unwrap());
        for w in [-1.0, 0.0, 0.7, 3.0] {
            assert!((k.kernel_h(w).unwrap() - s.kernel_h(w).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn quadrature_route_for_convolved_box() {
        let k = KernelContext::new(
            SpectralDistribution::boxcar(0.5).unwrap(),
            SpectralDistribution::lorentzian(2.0).unwrap(),
        )
        .unwrap();
        let q = k.clone().with_mode(EvaluationMode::Quadrature);
        for w in [-1.0, 0.1, 2.5] {
            let a = k.kernel_h(w).unwrap();
            let b = q.kernel_h(w).unwrap();
            assert!((a - b).norm() < 1e-7 * a.norm(), "w={w}: {a} vs {b}");
        }
    }
}
