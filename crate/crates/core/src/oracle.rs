//! Direct time integration of the linearized Maxwell–Bloch equations in the
//! instantaneous-propagation regime (`L/c = 0`), with `Γ = 1` and `z ∈ [0, 1]`:
//!
//! ```text
//! ±∂z E = iν Σ w σ          (+ forward, - backward)
//!  ∂t σ = -iΔ σ + i E        Δ = Δ₀ ± Δ'
//! ```
//!
//! σ is advanced with the exact integrating factor for `E` linear across a
//! step; `E` is marched in space with the trapezoid rule, implicit in the
//! newest cell.

use num_complex::Complex;

use crate::analytic::{self, Direction, ProtocolConfig};
use crate::error::{CribError, Result};
use crate::kernels::MediumSpec;
use crate::num::{cplx, phi12, real, Real};
use crate::spectral::{forward_transform, ComplexSpectrum, FrequencyGrid, PulseSpec, ShapeKind, SpectralDistribution, TimeSignal};

/// Discretization of the oracle. Times are in units of `1/Γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig<T> {
    pub n_z: usize,
    pub n_delta0: usize,
    pub n_delta_p: usize,
    pub dt: T,
    pub t_start: T,
    pub t_end: T,
}

impl<T: Real> OracleConfig<T> {
    /// Largest step allowed for the medium: `0.02 / max(Γ, γ, γ₀)`.
    pub fn max_step(m: &MediumSpec<T>) -> T {
        let rate = T::one().max(m.ctx.gp.width()).max(m.ctx.g0.width());
        T::lit(0.02) / rate
    }

    /// Defaults for storage time `storage`: the step at its limit, the
    /// absorption window from `-storage`, retrieval up to `storage + 10`.
    pub fn for_medium(m: &MediumSpec<T>, storage: T) -> Self {
        Self {
            n_z: 64,
            n_delta0: 64,
            n_delta_p: 512,
            dt: Self::max_step(m),
            t_start: -storage,
            t_end: storage + T::lit(10.0),
        }
    }

    pub fn validate(&self, m: &MediumSpec<T>) -> Result<()> {
        if self.n_z < 64 {
            return Err(CribError::InvalidConfig(format!("oracle needs n_z >= 64, got {}", self.n_z)));
        }
        if self.n_delta_p == 0 || self.n_delta0 == 0 {
            return Err(CribError::InvalidConfig("oracle needs at least one detuning bin".into()));
        }
        let limit = Self::max_step(m);
        if !(self.dt > T::zero()) || self.dt > limit * T::lit(1.0 + 1e-9) {
            return Err(CribError::InvalidConfig(format!(
                "oracle step {} exceeds the stability limit {}",
                self.dt, limit
            )));
        }
        if !(self.t_start < T::zero() && self.t_end > T::zero()) {
            return Err(CribError::InvalidConfig("oracle window must straddle t = 0".into()));
        }
        if m.transit != T::zero() {
            return Err(CribError::Precondition("the oracle models instantaneous propagation only".into()));
        }
        Ok(())
    }
}

/// Propagation direction of the field radiated by a coherence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Propagation {
    Forward,
    Backward,
}

/// Atomic coherence on the `(z, Δ₀, Δ')` lattice.
#[derive(Clone, Debug)]
pub struct CoherenceField<T> {
    n_z: usize,
    /// `(Δ₀, Δ', weight)` per detuning class.
    nodes: Vec<(T, T, T)>,
    /// Row-major `[z][class]`, `n_z + 1` rows.
    sigma: Vec<Complex<T>>,
    flipped: bool,
    rephased: bool,
    pub propagation: Propagation,
}

impl<T: Real> CoherenceField<T> {
    fn zeros(m: &MediumSpec<T>, cfg: &OracleConfig<T>) -> Self {
        let g0 = m.ctx.g0.quadrature_rule(cfg.n_delta0);
        let gp = m.ctx.gp.quadrature_rule(cfg.n_delta_p);
        let nodes: Vec<_> = g0
            .iter()
            .flat_map(|&(d0, w0)| gp.iter().map(move |&(dp, wp)| (d0, dp, w0 * wp)))
            .collect();
        let sigma = vec![real(T::zero()); (cfg.n_z + 1) * nodes.len()];
        Self { n_z: cfg.n_z, nodes, sigma, flipped: false, rephased: false, propagation: Propagation::Forward }
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn n_classes(&self) -> usize {
        self.nodes.len()
    }

    /// Current detuning of class `j`.
    pub fn detuning(&self, j: usize) -> T {
        let (d0, dp, _) = self.nodes[j];
        if self.flipped { d0 - dp } else { d0 + dp }
    }

    pub fn weight(&self, j: usize) -> T {
        self.nodes[j].2
    }

    /// σ at spatial index `k` and class `j`.
    pub fn value(&self, k: usize, j: usize) -> Complex<T> {
        self.sigma[k * self.nodes.len() + j]
    }

    pub fn is_rephased(&self) -> bool {
        self.rephased
    }

    pub fn is_zero(&self) -> bool {
        self.sigma.iter().all(|s| *s == real(T::zero()))
    }

    /// `sqrt(Σ w |σ|²)` over all samples.
    pub fn norm(&self) -> T {
        let n = self.nodes.len();
        self.sigma
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, s)| acc + self.nodes[i % n].2 * s.norm_sqr())
            .sqrt()
    }

    /// Energy held by the atoms, `ν ∫ dz Σ w |σ|²`, comparable with `∫|E|² dt`.
    pub fn excitation_energy(&self, nu: T) -> T {
        let n = self.nodes.len();
        let dz = T::one() / T::of_usize(self.n_z);
        let per_z: Vec<T> = self
            .sigma
            .chunks(n)
            .map(|row| row.iter().zip(&self.nodes).fold(T::zero(), |a, (s, nd)| a + nd.2 * s.norm_sqr()))
            .collect();
        nu * crate::quadrature::trapezoid(&per_z, dz)
    }

    /// Reverses every inhomogeneous detuning `Δ' → -Δ'`. Applying it twice
    /// restores the original assignment.
    pub fn flip_detunings(&mut self) {
        self.flipped = !self.flipped;
    }
}

/// Per-class exponential-integrator coefficients for step `h`.
struct Stepper<T> {
    a: Vec<Complex<T>>,
    wa: Vec<Complex<T>>,
    b0: Vec<Complex<T>>,
    b1: Vec<Complex<T>>,
    sum_wb0: Complex<T>,
    sum_wb1: Complex<T>,
    /// `iν dz / 2`
    c: Complex<T>,
}

impl<T: Real> Stepper<T> {
    fn new(state: &CoherenceField<T>, nu: T, h: T) -> Self {
        let n = state.n_classes();
        let (mut a, mut wa, mut b0, mut b1) =
            (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        let (mut sum_wb0, mut sum_wb1) = (real(T::zero()), real(T::zero()));
        let ih = cplx(T::zero(), h);
        for j in 0..n {
            let w = state.weight(j);
            let x = cplx(T::zero(), -state.detuning(j) * h);
            let (p1, p2) = phi12(x);
            let aj = x.exp();
            let b0j = ih * (p1 - p2);
            let b1j = ih * p2;
            sum_wb0 = sum_wb0 + b0j * w;
            sum_wb1 = sum_wb1 + b1j * w;
            a.push(aj);
            wa.push(aj * w);
            b0.push(b0j);
            b1.push(b1j);
        }
        let dz = T::one() / T::of_usize(state.n_z);
        Self { a, wa, b0, b1, sum_wb0, sum_wb1, c: cplx(T::zero(), nu * dz / T::lit(2.0)) }
    }

    /// Advances σ by one step and fills `e_new` along the marching order.
    fn step(
        &self,
        sigma: &mut [Complex<T>],
        order: &[usize],
        e_old: &[Complex<T>],
        e_new: &mut [Complex<T>],
        boundary: Complex<T>,
    ) {
        let n = self.a.len();
        let denom = real::<T>(T::one()) - self.c * self.sum_wb1;
        let mut prev: Option<(Complex<T>, Complex<T>)> = None;
        for &k in order {
            let cell = &mut sigma[k * n..(k + 1) * n];
            let mut r = self.sum_wb0 * e_old[k];
            for (s, wa) in cell.iter().zip(&self.wa) {
                r = r + *wa * *s;
            }
            let e = match prev {
                None => boundary,
                Some((e_prev, p_prev)) => (e_prev + self.c * (p_prev + r)) / denom,
            };
            e_new[k] = e;
            let (b0e, eo) = (e_old[k], e);
            for (j, s) in cell.iter_mut().enumerate() {
                *s = self.a[j] * *s + self.b0[j] * b0e + self.b1[j] * eo;
            }
            prev = Some((e, r + self.sum_wb1 * e));
        }
    }
}

fn march_order(n_z: usize, propagation: Propagation) -> Vec<usize> {
    match propagation {
        Propagation::Forward => (0..=n_z).collect(),
        Propagation::Backward => (0..=n_z).rev().collect(),
    }
}

/// Field generated by the present coherence alone, entering with zero
/// amplitude at the upstream face.
fn field_from_state<T: Real>(state: &CoherenceField<T>, nu: T, order: &[usize]) -> Vec<Complex<T>> {
    let n = state.n_classes();
    let dz = T::one() / T::of_usize(state.n_z);
    let c = cplx(T::zero(), nu * dz / T::lit(2.0));
    let pol = |k: usize| {
        state.sigma[k * n..(k + 1) * n]
            .iter()
            .zip(&state.nodes)
            .fold(real(T::zero()), |a, (s, nd)| a + *s * nd.2)
    };
    let mut e = vec![real(T::zero()); state.n_z + 1];
    let mut prev: Option<(Complex<T>, Complex<T>)> = None;
    for &k in order {
        let p = pol(k);
        let val = match prev {
            None => real(T::zero()),
            Some((ep, pp)) => ep + c * (pp + p),
        };
        e[k] = val;
        prev = Some((val, p));
    }
    e
}

fn steps_for<T: Real>(span: T, dt: T) -> (usize, T) {
    let n = (span / dt * T::lit(1.0 - 1e-12)).ceil().to_usize().unwrap_or(1).max(1);
    (n, span / T::of_usize(n))
}

/// Integrates from `cfg.t_start` to `t = 0` with the pulse entering at
/// `z = 0`. Returns the field leaving at `z = L` and the coherence at `t = 0`.
pub fn absorb<T: Real>(
    m: &MediumSpec<T>,
    input: &TimeSignal<T>,
    cfg: &OracleConfig<T>,
) -> Result<(TimeSignal<T>, CoherenceField<T>)> {
    cfg.validate(m)?;
    let total = input.energy();
    if total > T::zero() && input.energy_after(T::zero()) > T::lit(1e-6) * total {
        return Err(CribError::Precondition("input pulse extends past the rephasing time".into()));
    }
    let mut state = CoherenceField::zeros(m, cfg);
    let (steps, h) = steps_for(-cfg.t_start, cfg.dt);
    if m.nu == T::zero() {
        // No atoms to excite: the pulse crosses unchanged.
        let out = (0..=steps).map(|i| input.sample(cfg.t_start + h * T::of_usize(i))).collect();
        return Ok((TimeSignal::new(cfg.t_start, h, out)?, state));
    }
    let order = march_order(cfg.n_z, Propagation::Forward);
    let stepper = Stepper::new(&state, m.nu, h);
    let mut e_old = vec![input.sample(cfg.t_start); cfg.n_z + 1];
    let mut e_new = e_old.clone();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(e_old[cfg.n_z]);
    for i in 1..=steps {
        let t = cfg.t_start + h * T::of_usize(i);
        stepper.step(&mut state.sigma, &order, &e_old, &mut e_new, input.sample(t));
        out.push(e_new[cfg.n_z]);
        std::mem::swap(&mut e_old, &mut e_new);
    }
    Ok((TimeSignal::new(cfg.t_start, h, out)?, state))
}

/// Reverses the detunings at `t = 0` and, for the backward protocol,
/// switches the coherence to the counter-propagating mode.
pub fn rephase<T: Real>(mut state: CoherenceField<T>, p: &ProtocolConfig<T>) -> Result<CoherenceField<T>> {
    if state.rephased {
        return Err(CribError::State("coherence has already been rephased".into()));
    }
    state.flip_detunings();
    state.rephased = true;
    state.propagation = match p.direction {
        Direction::BackwardComplete => Propagation::Backward,
        Direction::ForwardSimplified => Propagation::Forward,
    };
    Ok(state)
}

/// Integrates from `t = 0` to `cfg.t_end` with no incoming field and
/// records the emission at the downstream face (`z = 0` backward, `z = L`
/// forward).
pub fn retrieve<T: Real>(
    state: &CoherenceField<T>,
    m: &MediumSpec<T>,
    p: &ProtocolConfig<T>,
    cfg: &OracleConfig<T>,
) -> Result<TimeSignal<T>> {
    retrieve_with_state(state, m, p, cfg).map(|r| r.0)
}

/// As [`retrieve`], also returning the coherence left at `cfg.t_end`.
pub fn retrieve_with_state<T: Real>(
    state: &CoherenceField<T>,
    m: &MediumSpec<T>,
    p: &ProtocolConfig<T>,
    cfg: &OracleConfig<T>,
) -> Result<(TimeSignal<T>, CoherenceField<T>)> {
    cfg.validate(m)?;
    if !state.rephased {
        return Err(CribError::State("retrieval requires a rephased coherence".into()));
    }
    let expected = match p.direction {
        Direction::BackwardComplete => Propagation::Backward,
        Direction::ForwardSimplified => Propagation::Forward,
    };
    if state.propagation != expected {
        return Err(CribError::State("coherence was rephased for the other direction".into()));
    }
    if state.n_z != cfg.n_z {
        return Err(CribError::State("coherence lattice does not match the configuration".into()));
    }
    let mut state = state.clone();
    let order = march_order(cfg.n_z, state.propagation);
    let exit = *order.last().expect("nonempty lattice");
    let (steps, h) = steps_for(cfg.t_end, cfg.dt);
    let stepper = Stepper::new(&state, m.nu, h);
    let mut e_old = field_from_state(&state, m.nu, &order);
    let mut e_new = e_old.clone();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(e_old[exit]);
    for _ in 0..steps {
        stepper.step(&mut state.sigma, &order, &e_old, &mut e_new, real(T::zero()));
        out.push(e_new[exit]);
        std::mem::swap(&mut e_old, &mut e_new);
    }
    Ok((TimeSignal::new(T::zero(), h, out)?, state))
}

/// One point of the oracle-versus-analytic comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRecord {
    pub direction: Direction,
    pub shape: ShapeKind,
    pub alpha_l: f64,
    pub eff_oracle: f64,
    pub eff_analytic: f64,
    pub spectrum_error: f64,
}

impl ValidationRecord {
    pub fn efficiency_gap(&self) -> f64 {
        (self.eff_oracle - self.eff_analytic).abs()
    }

    pub fn passes(&self, eff_tol: f64, spectrum_tol: f64) -> bool {
        self.efficiency_gap() < eff_tol && self.spectrum_error < spectrum_tol
    }
}

/// Relative L2 distance `‖a - b‖ / ‖b‖` over a common grid.
pub fn relative_l2<T: Real>(a: &ComplexSpectrum<T>, b: &ComplexSpectrum<T>) -> f64 {
    let (num, den) = a
        .values
        .iter()
        .zip(&b.values)
        .fold((0.0, 0.0), |(n, d), (x, y)| (n + (*x - *y).norm_sqr().as_f64(), d + y.norm_sqr().as_f64()));
    if den == 0.0 {
        if num == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (num / den).sqrt()
    }
}

/// Runs both protocols on one medium from a single absorption and compares
/// each with the analytic solver. The input is a unit-bandwidth Lorentzian
/// pulse centered at `-storage/2`.
pub fn compare_with_analytic<T: Real>(
    m: &MediumSpec<T>,
    storage: T,
    cfg: &OracleConfig<T>,
) -> Result<Vec<ValidationRecord>> {
    let pulse = PulseSpec::lorentzian(T::one())?.centered_at(-storage / T::lit(2.0));
    let n_t = ((T::zero() - cfg.t_start) / cfg.dt).ceil().to_usize().unwrap_or(1) + 1;
    let input = pulse.time_signal(cfg.t_start, T::zero(), n_t);
    let (_, stored) = absorb(m, &input, cfg)?;
    let edges = m.ctx.gp.breakpoints();
    let grid = FrequencyGrid::covering(T::one(), &[m.ctx.gp.width()], T::lit(0.05), &edges)?;
    let input_energy = pulse.spectral_energy();
    let alpha_l = m.optical_depth(T::zero())?.as_f64();
    let mut records = Vec::with_capacity(2);
    for direction in [Direction::BackwardComplete, Direction::ForwardSimplified] {
        let p = ProtocolConfig::new(direction, storage)?;
        let echo = retrieve(&rephase(stored.clone(), &p)?, m, &p, cfg)?;
        let oracle = forward_transform(&echo, &grid);
        let analytic = analytic::output_spectrum(m, &p, &pulse, &grid)?.spectrum;
        let eff_analytic = crate::metrics::spectral_efficiency(m, direction, &pulse)?.as_f64();
        let eff_oracle = (echo.energy() * T::TAU() / input_energy).as_f64();
        records.push(ValidationRecord {
            direction,
            shape: m.ctx.gp.kind(),
            alpha_l,
            eff_oracle,
            eff_analytic,
            spectrum_error: relative_l2(&oracle, &analytic),
        });
    }
    Ok(records)
}

/// The media of the validation matrix: box and Lorentzian broadening of
/// width `gamma` at optical depths 0.5, 2 and 4, each retrieved both ways.
pub fn validation_media<T: Real>(gamma: T) -> Result<Vec<MediumSpec<T>>> {
    let mut out = Vec::new();
    for shape in [ShapeKind::Box, ShapeKind::Lorentzian] {
        for depth in [0.5, 2.0, 4.0] {
            let ctx = crate::kernels::KernelContext::new(
                SpectralDistribution::delta(),
                SpectralDistribution::from_kind(shape, gamma)?,
            )?;
            out.push(MediumSpec::with_optical_depth(T::lit(depth), ctx)?);
        }
    }
    Ok(out)
}
