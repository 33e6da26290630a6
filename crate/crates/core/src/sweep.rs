//! Experiments behind the command-line driver. Each returns a table that is
//! written as CSV; rows come out in parameter order whatever the number of
//! worker threads.

use std::io::Write;

use rayon::prelude::*;

use crate::analytic::{self, output_window, Direction, ProtocolConfig};
use crate::config::Config;
use crate::error::{CribError, Result};
use crate::kernels::{KernelContext, MediumSpec};
use crate::metrics::{self, fit_exponential_decay, shape_fidelity, spectral_efficiency_report, MemoryReport};
use crate::oracle::{compare_with_analytic, validation_media, OracleConfig};
use crate::spectral::{ComplexSpectrum, FrequencyGrid, PulseSpec, ShapeKind, SpectralDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Fig1,
    Fig2,
    Fig4,
    Decay,
    Optimize,
    Validate,
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1 => "fig1",
            Experiment::Fig2 => "fig2",
            Experiment::Fig4 => "fig4",
            Experiment::Decay => "decay",
            Experiment::Optimize => "optimize",
            Experiment::Validate => "validate",
            Experiment::Custom => "custom",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = CribError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig1" => Experiment::Fig1,
            "fig2" => Experiment::Fig2,
            "fig4" => Experiment::Fig4,
            "decay" => Experiment::Decay,
            "optimize" => Experiment::Optimize,
            "validate" => Experiment::Validate,
            "custom" => Experiment::Custom,
            other => return Err(CribError::InvalidConfig(format!("unknown experiment `{other}`"))),
        })
    }
}

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Text(String),
    Flag(bool),
    Empty,
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Num(x) if x.is_nan() => "nan".into(),
            Value::Num(x) => format!("{x:.8e}"),
            Value::Text(s) => s.clone(),
            Value::Flag(b) => if *b { "true" } else { "false" }.into(),
            Value::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Flag(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub experiment: Experiment,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
    /// False when a validation tolerance failed.
    pub passed: bool,
}

impl SweepResult {
    fn new(experiment: Experiment, columns: &[&str]) -> Self {
        Self {
            experiment,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
            passed: true,
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column by name (non-numeric cells become NaN).
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W, cfg: &Config) -> Result<()> {
        let mut out = out;
        writeln!(
            out,
            "# config-hash={}, version={}, experiment={}",
            cfg.hash(),
            env!("CARGO_PKG_VERSION"),
            self.experiment.name()
        )?;
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| CribError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::render)).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, cfg: &Config) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, cfg)?;
        String::from_utf8(buf).map_err(|e| CribError::Io(e.to_string()))
    }
}

pub fn run(experiment: Experiment, cfg: &Config) -> Result<SweepResult> {
    match experiment {
        Experiment::Fig1 => run_fig1(cfg),
        Experiment::Fig2 => run_fig2(cfg),
        Experiment::Fig4 => run_fig4(cfg),
        Experiment::Decay => run_decay(cfg),
        Experiment::Optimize => run_optimize(cfg),
        Experiment::Validate => run_validate(cfg),
        Experiment::Custom => run_custom(cfg),
    }
}

fn shape(cfg: &Config, key: &str, default: &str) -> Result<ShapeKind> {
    cfg.str_or(key, default).parse()
}

fn directions(cfg: &Config, default: &str) -> Result<Vec<Direction>> {
    match cfg.str_or("protocol.direction", default) {
        "both" => Ok(vec![Direction::BackwardComplete, Direction::ForwardSimplified]),
        s => Ok(vec![s.parse()?]),
    }
}

fn storage_time(cfg: &Config) -> Result<f64> {
    cfg.f64_or("protocol.storage_time", 30.0)
}

/// Input pulse of bandwidth `pulse.bandwidth`, centered at `-T/2`.
fn input_pulse(cfg: &Config, storage: f64) -> Result<PulseSpec<f64>> {
    let p = ProtocolConfig::new(Direction::BackwardComplete, storage)?;
    Ok(p.place_input(&PulseSpec::lorentzian(cfg.f64_or("pulse.bandwidth", 1.0)?)?))
}

fn context(g0: ShapeKind, gamma0: f64, gp: ShapeKind, gamma: f64) -> Result<KernelContext<f64>> {
    KernelContext::new(SpectralDistribution::from_kind(g0, gamma0)?, SpectralDistribution::from_kind(gp, gamma)?)
}

/// Medium from the `medium.*` keys. The coupling comes from `medium.alpha_l`
/// if given, otherwise from `medium.nu`.
pub fn build_medium(cfg: &Config) -> Result<MediumSpec<f64>> {
    let ctx = context(
        shape(cfg, "medium.g0_shape", "delta")?,
        cfg.f64_or("medium.gamma0", 0.0)?,
        shape(cfg, "medium.shape", "box")?,
        cfg.f64_or("medium.gamma", 100.0)?,
    )?;
    let m = if cfg.contains("medium.alpha_l") {
        MediumSpec::with_optical_depth(cfg.f64_or("medium.alpha_l", 0.0)?, ctx)?
    } else {
        MediumSpec::new(cfg.f64_or("medium.nu", 2.0)?, ctx)?
    };
    m.with_transit(cfg.f64_or("medium.transit", 0.0)?)
}

fn efficiency(m: &MediumSpec<f64>, dir: Direction, pulse: &PulseSpec<f64>) -> Result<f64> {
    metrics::spectral_efficiency(m, dir, pulse)
}

/// Fig. 1: box broadening much wider than the pulse, efficiency versus
/// optical depth for both protocols next to the closed-form laws.
pub fn run_fig1(cfg: &Config) -> Result<SweepResult> {
    let gamma = cfg.f64_or("medium.gamma", 100.0)?;
    let gp = shape(cfg, "medium.shape", "box")?;
    let depths = cfg.list_or("sweep.alpha_l", "linspace(0, 10, 101)")?;
    let pulse = input_pulse(cfg, storage_time(cfg)?)?;
    let regime = gamma >= 50.0;
    let mut res = SweepResult::new(
        Experiment::Fig1,
        &[
            "alpha_l",
            "eff_backward",
            "eff_forward",
            "law_backward",
            "law_forward",
            "residual_backward",
            "residual_forward",
            "gamma",
            "regime_ok",
        ],
    );
    let rows = depths
        .par_iter()
        .map(|&a| {
            let m = MediumSpec::with_optical_depth(a, context(ShapeKind::Delta, 0.0, gp, gamma)?)?;
            let used = m.optical_depth(0.0)?;
            let eb = efficiency(&m, Direction::BackwardComplete, &pulse)?;
            let ef = efficiency(&m, Direction::ForwardSimplified, &pulse)?;
            let lb = (1.0 - (-used).exp()).powi(2);
            let lf = used * used * (-used).exp();
            Ok(vec![
                used.into(),
                eb.into(),
                ef.into(),
                lb.into(),
                lf.into(),
                (eb - lb).into(),
                (ef - lf).into(),
                gamma.into(),
                regime.into(),
            ])
        })
        .collect::<Result<Vec<Vec<Value>>>>()?;
    res.rows = rows;
    if !regime {
        res.summary.push(format!("warning: gamma = {gamma} is below the wide-band regime (>= 50)"));
    }
    let worst = ["residual_backward", "residual_forward"]
        .iter()
        .flat_map(|c| res.column(c).unwrap_or_default())
        .fold(0.0f64, |m, r| m.max(r.abs()));
    let (a, ef) = argmax(&res.column("alpha_l").unwrap_or_default(), &res.column("eff_forward").unwrap_or_default());
    res.summary.push(format!("largest residual against the closed-form laws: {worst:.3e}"));
    res.summary.push(format!("forward maximum {ef:.4} at alpha_l = {a:.3}"));
    Ok(res)
}

fn argmax(x: &[f64], y: &[f64]) -> (f64, f64) {
    x.iter()
        .zip(y)
        .fold((f64::NAN, f64::NEG_INFINITY), |b, (&xi, &yi)| if yi > b.1 { (xi, yi) } else { b })
}

/// Fig. 2: Lorentzian pulse and broadening, efficiency versus broadening
/// width at fixed coupling, for each coupling in `sweep.nu`.
pub fn run_fig2(cfg: &Config) -> Result<SweepResult> {
    let nus = cfg.list_or("sweep.nu", "2, 0.05")?;
    let gammas = cfg.list_or("sweep.gamma", "logspace(-2, 2, 81)")?;
    let gp = shape(cfg, "medium.shape", "lorentzian")?;
    let pulse = input_pulse(cfg, storage_time(cfg)?)?;
    let mut res =
        SweepResult::new(Experiment::Fig2, &["nu", "gamma", "alpha_l", "eff_backward", "eff_forward"]);
    let points: Vec<(f64, f64)> = nus.iter().flat_map(|&n| gammas.iter().map(move |&g| (n, g))).collect();
    res.rows = points
        .par_iter()
        .map(|&(nu, gamma)| {
            let m = MediumSpec::new(nu, context(ShapeKind::Delta, 0.0, gp, gamma)?)?;
            Ok(vec![
                nu.into(),
                gamma.into(),
                m.optical_depth(0.0)?.into(),
                efficiency(&m, Direction::BackwardComplete, &pulse)?.into(),
                efficiency(&m, Direction::ForwardSimplified, &pulse)?.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    for &nu in &nus {
        let sel: Vec<&Vec<Value>> = res.rows.iter().filter(|r| r[0].as_f64() == Some(nu)).collect();
        let g: Vec<f64> = sel.iter().map(|r| r[1].as_f64().unwrap_or(f64::NAN)).collect();
        for (col, label) in [(3, "backward"), (4, "forward")] {
            let e: Vec<f64> = sel.iter().map(|r| r[col].as_f64().unwrap_or(f64::NAN)).collect();
            let (gs, es) = argmax(&g, &e);
            res.summary.push(format!("nu = {nu}: {label} maximum {es:.4} at gamma = {gs:.4}"));
        }
    }
    Ok(res)
}

/// Fig. 4: identical (Lorentzian) versus different (box) broadening shapes
/// for a Lorentzian pulse, both protocols.
pub fn run_fig4(cfg: &Config) -> Result<SweepResult> {
    let nu = cfg.f64_or("medium.nu", 2.0)?;
    let gammas = cfg.list_or("sweep.gamma", "logspace(-2, 2, 81)")?;
    let pulse = input_pulse(cfg, storage_time(cfg)?)?;
    let mut res = SweepResult::new(
        Experiment::Fig4,
        &[
            "gamma",
            "eff_backward_identical",
            "eff_backward_different",
            "eff_forward_identical",
            "eff_forward_different",
            "alpha_l_identical",
            "alpha_l_different",
        ],
    );
    res.rows = gammas
        .par_iter()
        .map(|&gamma| {
            let same = MediumSpec::new(nu, context(ShapeKind::Delta, 0.0, ShapeKind::Lorentzian, gamma)?)?;
            let diff = MediumSpec::new(nu, context(ShapeKind::Delta, 0.0, ShapeKind::Box, gamma)?)?;
            Ok(vec![
                gamma.into(),
                efficiency(&same, Direction::BackwardComplete, &pulse)?.into(),
                efficiency(&diff, Direction::BackwardComplete, &pulse)?.into(),
                efficiency(&same, Direction::ForwardSimplified, &pulse)?.into(),
                efficiency(&diff, Direction::ForwardSimplified, &pulse)?.into(),
                same.optical_depth(0.0)?.into(),
                diff.optical_depth(0.0)?.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    res.summary.push(format!("nu = {nu}, {} widths", gammas.len()));
    Ok(res)
}

/// Coupling that gives the initial line the optical depth `alpha0_l`:
/// `ν = α₀L / (2π G₀(0))`.
fn nu_for_initial_depth(g0: &SpectralDistribution<f64>, alpha0_l: f64) -> Result<f64> {
    let peak = g0.density(g0.center())?;
    Ok(alpha0_l / (std::f64::consts::TAU * peak))
}

/// Storage-time decay set by the width of the initial line, plus the
/// efficiency/storage trade-off against that width.
pub fn run_decay(cfg: &Config) -> Result<SweepResult> {
    let g0_kind = shape(cfg, "medium.g0_shape", "lorentzian")?;
    let gamma0 = cfg.f64_or("medium.gamma0", 0.1)?;
    let gp = shape(cfg, "medium.shape", "box")?;
    let gamma = cfg.f64_or("medium.gamma", 10.0)?;
    let alpha0_l = cfg.f64_or("medium.alpha0_l", 100.0)?;
    let times = cfg.list_or("sweep.storage_time", "linspace(30, 80, 11)")?;
    let widths = cfg.list_or("sweep.gamma0", "0.02, 0.05, 0.1, 0.2")?;
    let dirs = directions(cfg, "backward")?;
    let fixed_t = storage_time(cfg)?;
    let coupling = |g0w: f64| -> Result<f64> {
        if cfg.contains("medium.nu") {
            cfg.f64_or("medium.nu", 0.0)
        } else {
            nu_for_initial_depth(&SpectralDistribution::from_kind(g0_kind, g0w)?, alpha0_l)
        }
    };
    let effs = |g0w: f64, t: f64| -> Result<(f64, Vec<Option<f64>>)> {
        let m = MediumSpec::new(coupling(g0w)?, context(g0_kind, g0w, gp, gamma)?)?;
        let pulse = input_pulse(cfg, t)?;
        let mut out = vec![None, None];
        for &d in &dirs {
            out[(d == Direction::ForwardSimplified) as usize] = Some(efficiency(&m, d, &pulse)?);
        }
        Ok((m.optical_depth(0.0)?, out))
    };
    let decay = times.par_iter().map(|&t| effs(gamma0, t)).collect::<Result<Vec<_>>>()?;
    let trade = widths.par_iter().map(|&w| effs(w, fixed_t)).collect::<Result<Vec<_>>>()?;

    let mut rates = [None, None];
    for (k, rate) in rates.iter_mut().enumerate() {
        let pts: Vec<(f64, f64)> = times
            .iter()
            .zip(&decay)
            .filter_map(|(&t, (_, e))| e[k].map(|v| (t, v)))
            .collect();
        if !pts.is_empty() {
            *rate = Some(fit_exponential_decay(&pts)?);
        }
    }
    let mut res = SweepResult::new(
        Experiment::Decay,
        &[
            "table",
            "storage_time",
            "gamma0",
            "alpha_l",
            "eff_backward",
            "eff_forward",
            "fitted_rate_backward",
            "fitted_rate_forward",
        ],
    );
    let cell = |v: Option<f64>| v.map(Value::Num).unwrap_or(Value::Empty);
    for (&t, (a, e)) in times.iter().zip(&decay) {
        res.rows.push(vec![
            "decay".into(),
            t.into(),
            gamma0.into(),
            (*a).into(),
            cell(e[0]),
            cell(e[1]),
            cell(rates[0]),
            cell(rates[1]),
        ]);
    }
    for (&w, (a, e)) in widths.iter().zip(&trade) {
        res.rows.push(vec![
            "tradeoff".into(),
            fixed_t.into(),
            w.into(),
            (*a).into(),
            cell(e[0]),
            cell(e[1]),
            Value::Empty,
            Value::Empty,
        ]);
    }
    for (rate, label) in rates.iter().zip(["backward", "forward"]) {
        if let Some(r) = rate {
            res.summary.push(format!("{label}: fitted decay rate {r:.6} (initial width {gamma0})"));
        }
    }
    Ok(res)
}

/// Result of the optimal-width search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Optimum {
    pub gamma: f64,
    pub efficiency: f64,
    pub grid_gamma: f64,
    pub grid_efficiency: f64,
    pub unimodal: bool,
}

/// Golden-section search for the maximum of `f` on `[a, b]` in `ln γ`,
/// stopping at relative width `rel_tol`.
pub fn golden_section_max<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a.ln(), b.ln());
    let g = |x: f64| f(x.exp());
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    while hi - lo > (1.0 + rel_tol).ln() {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = g(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = g(d)?;
        }
    }
    Ok(if fc > fd { (c.exp(), fc) } else { (d.exp(), fd) })
}

/// Efficiency-maximizing broadening width for one protocol: a log-spaced
/// scan, then golden-section refinement around the best scan point when
/// the scan has a single peak.
pub fn optimize_width(
    nu: f64,
    gp: ShapeKind,
    direction: Direction,
    pulse: &PulseSpec<f64>,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Optimum> {
    if !(lo > 0.0 && hi > lo) || points < 3 {
        return Err(CribError::InvalidConfig("optimize needs 0 < lo < hi and >= 3 points".into()));
    }
    let eff = |gamma: f64| -> Result<f64> {
        let m = MediumSpec::new(nu, context(ShapeKind::Delta, 0.0, gp, gamma)?)?;
        efficiency(&m, direction, pulse)
    };
    let grid: Vec<f64> = (0..points)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (points - 1) as f64).exp())
        .collect();
    let scan = grid.par_iter().map(|&g| eff(g)).collect::<Result<Vec<_>>>()?;
    let best = scan
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v > scan[b] { i } else { b });
    let peaks = (0..points)
        .filter(|&i| {
            let left = i == 0 || scan[i] > scan[i - 1];
            let right = i + 1 == points || scan[i] >= scan[i + 1];
            left && right
        })
        .count();
    let interior = best > 0 && best + 1 < points;
    let unimodal = peaks == 1 && interior;
    let (gamma, efficiency) = if unimodal {
        golden_section_max(eff, grid[best - 1], grid[best + 1], 1e-4)?
    } else {
        (grid[best], scan[best])
    };
    Ok(Optimum { gamma, efficiency, grid_gamma: grid[best], grid_efficiency: scan[best], unimodal })
}

pub fn run_optimize(cfg: &Config) -> Result<SweepResult> {
    let nu = cfg.f64_or("medium.nu", 2.0)?;
    let gp = shape(cfg, "optimize.shape", cfg.str_or("medium.shape", "lorentzian"))?;
    let lo = cfg.f64_or("optimize.lo", 1e-3)?;
    let hi = cfg.f64_or("optimize.hi", 1e3)?;
    let points = cfg.usize_or("optimize.points", 61)?;
    let pulse = input_pulse(cfg, storage_time(cfg)?)?;
    let mut res = SweepResult::new(
        Experiment::Optimize,
        &["direction", "nu", "shape", "gamma_star", "eff_star", "grid_gamma", "grid_eff", "unimodal"],
    );
    for d in directions(cfg, "both")? {
        let o = optimize_width(nu, gp, d, &pulse, lo, hi, points)?;
        if !o.unimodal {
            res.summary.push(format!("{}: scan not unimodal, reporting the grid maximum", d.name()));
        }
        res.summary.push(format!("{}: gamma* = {:.6}, efficiency = {:.6}", d.name(), o.gamma, o.efficiency));
        res.rows.push(vec![
            d.name().into(),
            nu.into(),
            gp.name().into(),
            o.gamma.into(),
            o.efficiency.into(),
            o.grid_gamma.into(),
            o.grid_efficiency.into(),
            o.unimodal.into(),
        ]);
    }
    Ok(res)
}

/// Oracle configuration from `oracle.*` keys, defaults derived from `m`.
pub fn oracle_config(cfg: &Config, m: &MediumSpec<f64>, storage: f64) -> Result<OracleConfig<f64>> {
    let base = OracleConfig::for_medium(m, storage);
    Ok(OracleConfig {
        n_z: cfg.usize_or("oracle.n_z", base.n_z)?,
        n_delta0: cfg.usize_or("oracle.n_delta0", base.n_delta0)?,
        n_delta_p: cfg.usize_or("oracle.n_delta_p", base.n_delta_p)?,
        dt: cfg.f64_or("oracle.dt", base.dt)?,
        ..base
    })
}

/// Oracle-versus-analytic matrix: two directions, two broadening shapes,
/// three optical depths.
pub fn run_validate(cfg: &Config) -> Result<SweepResult> {
    let gamma = cfg.f64_or("oracle.gamma", 20.0)?;
    let storage = cfg.f64_or("oracle.storage_time", 28.0)?;
    let eff_tol = cfg.f64_or("validate.eff_tol", 0.01)?;
    let spec_tol = cfg.f64_or("validate.spectrum_tol", 1e-2)?;
    let media = validation_media::<f64>(gamma)?;
    // Reject a bad discretization before spending time on any point.
    let configs = media
        .iter()
        .map(|m| {
            let oc = oracle_config(cfg, m, storage)?;
            oc.validate(m)?;
            Ok(oc)
        })
        .collect::<Result<Vec<_>>>()?;
    let records = media
        .par_iter()
        .zip(configs.par_iter())
        .map(|(m, oc)| compare_with_analytic(m, storage, oc))
        .collect::<Result<Vec<_>>>()?;
    let mut res = SweepResult::new(
        Experiment::Validate,
        &["direction", "shape", "alpha_l", "eff_oracle", "eff_analytic", "eff_gap", "spectrum_error", "pass"],
    );
    let mut worst: f64 = 0.0;
    for r in records.into_iter().flatten() {
        let ok = r.passes(eff_tol, spec_tol);
        res.passed &= ok;
        worst = worst.max(r.efficiency_gap());
        res.rows.push(vec![
            r.direction.name().into(),
            r.shape.name().into(),
            r.alpha_l.into(),
            r.eff_oracle.into(),
            r.eff_analytic.into(),
            r.efficiency_gap().into(),
            r.spectrum_error.into(),
            ok.into(),
        ]);
    }
    let n_ok = res.rows.iter().filter(|r| r[7] == Value::Flag(true)).count();
    res.summary.push(format!("{n_ok}/{} points within tolerance, largest efficiency gap {worst:.3e}", res.rows.len()));
    Ok(res)
}

/// Frequency grid for `m`: the configured `grid.*` span, or the default
/// covering span at `Γ/20` spacing, kept away from kernel singularities.
pub fn grid_for(cfg: &Config, m: &MediumSpec<f64>, bandwidth: f64) -> Result<FrequencyGrid<f64>> {
    let mut edges = Vec::new();
    for b in m.ctx.gp.breakpoints() {
        for b0 in m.ctx.g0.breakpoints() {
            edges.push(b + b0);
            edges.push(-(b + b0));
        }
    }
    if m.ctx.g0.is_delta() && m.ctx.gp.kind() != ShapeKind::Box && m.ctx.gp.kind() != ShapeKind::Tabulated {
        edges.clear();
    }
    if cfg.contains("grid.n_points") || cfg.contains("grid.omega_max") {
        let w = cfg.f64_or("grid.omega_max", (20.0 * bandwidth).max(4.0 * m.ctx.gp.width()))?;
        FrequencyGrid::symmetric(w, cfg.usize_or("grid.n_points", 4001)?)?.avoiding(&edges)
    } else {
        FrequencyGrid::covering(bandwidth, &[m.ctx.gp.width(), m.ctx.g0.width()], bandwidth / 20.0, &edges)
    }
}

/// Efficiency, shape fidelity, echo timing and transmission for one run.
pub fn analytic_report(
    cfg: &Config,
    m: &MediumSpec<f64>,
    p: &ProtocolConfig<f64>,
    pulse: &PulseSpec<f64>,
) -> Result<MemoryReport<f64>> {
    analytic::check_input_truncation(pulse)?;
    let bandwidth = pulse.bandwidth;
    let grid = grid_for(cfg, m, bandwidth)?;
    let solved = analytic::output_spectrum(m, p, pulse, &grid)?;
    let (eff, quad) = spectral_efficiency_report(m, p.direction, pulse)?;
    let t_max = output_window(m, p, bandwidth);
    let dt = 0.01 / bandwidth;
    let echo = analytic::output_time_signal(&solved.spectrum, t_max, dt);
    let n = echo.len();
    let input = pulse.time_signal(-dt * (n - 1) as f64, 0.0, n);
    let fidelity = shape_fidelity(&echo, &input)?;
    let sampled = ComplexSpectrum::sample(&grid, pulse);
    let through = analytic::transmitted_spectrum(m, &sampled, 1.0)?;
    let transmitted = metrics::efficiency(&through, &sampled)?;
    let mut quadrature = solved.report;
    quadrature.max_nodes = quadrature.max_nodes.max(quad.max_nodes);
    quadrature.worst_relative_change = quadrature.worst_relative_change.max(quad.worst_relative_change);
    Ok(MemoryReport { efficiency: eff, shape_fidelity: fidelity, peak_time: echo.peak_time(), transmitted, quadrature })
}

const CUSTOM_PARAMS: &[&str] = &[
    "medium.alpha_l",
    "medium.nu",
    "medium.gamma",
    "medium.gamma0",
    "medium.transit",
    "protocol.storage_time",
    "pulse.bandwidth",
];

/// Sweeps one configuration key over `sweep.values` with the general
/// solver and reports efficiency, fidelity and echo timing per direction.
pub fn run_custom(cfg: &Config) -> Result<SweepResult> {
    let param = cfg
        .get("sweep.param")
        .ok_or_else(|| CribError::InvalidConfig("custom sweep needs `sweep.param`".into()))?;
    if !CUSTOM_PARAMS.contains(&param) {
        return Err(CribError::InvalidConfig(format!(
            "`sweep.param` must be one of {}",
            CUSTOM_PARAMS.join(", ")
        )));
    }
    let values = cfg.list_or("sweep.values", "")?;
    let dirs = directions(cfg, "both")?;
    let mut res = SweepResult::new(
        Experiment::Custom,
        &[
            "value",
            "alpha_l",
            "eff_backward",
            "eff_forward",
            "fidelity_backward",
            "fidelity_forward",
            "peak_time_backward",
            "peak_time_forward",
            "transmitted",
        ],
    );
    res.rows = values
        .par_iter()
        .map(|&v| {
            let mut local = cfg.clone();
            local.insert(param, v)?;
            let m = build_medium(&local)?;
            let t = storage_time(&local)?;
            let pulse = input_pulse(&local, t)?;
            let mut cells = vec![Value::Empty; 7];
            let mut transmitted = Value::Empty;
            for &d in &dirs {
                let r = analytic_report(&local, &m, &ProtocolConfig::new(d, t)?, &pulse)?;
                let k = (d == Direction::ForwardSimplified) as usize;
                cells[1 + k] = r.efficiency.into();
                cells[3 + k] = r.shape_fidelity.into();
                cells[5 + k] = r.peak_time.into();
                transmitted = r.transmitted.into();
            }
            cells[0] = m.optical_depth(0.0)?.into();
            let mut row = vec![Value::Num(v)];
            row.extend(cells);
            row.push(transmitted);
            row.truncate(9);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    res.summary.push(format!("{} values of {param}", values.len()));
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_smooth_peak() {
        let (x, fx) = golden_section_max(|g| Ok(-(g.ln() - 0.3f64).powi(2)), 0.1, 10.0, 1e-6).unwrap();
        assert!((x.ln() - 0.3).abs() < 1e-5);
        assert!(fx <= 0.0 && fx > -1e-10);
    }

    #[test]
    fn csv_is_formatted_with_metadata() {
        let mut r = SweepResult::new(Experiment::Fig1, &["a", "b"]);
        r.rows.push(vec![Value::Num(0.1234567891234), Value::Flag(true)]);
        let cfg = Config::parse("medium.nu = 2").unwrap();
        let text = r.to_csv_string(&cfg).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with(&format!("# config-hash={}, version=", cfg.hash())));
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "1.23456789e-1,true");
    }

    #[test]
    fn fig1_edge_rows() {
        let cfg = Config::parse("sweep.alpha_l = 0, 2, 10").unwrap();
        let r = run_fig1(&cfg).unwrap();
        let b = r.column("eff_backward").unwrap();
        let f = r.column("eff_forward").unwrap();
        assert_eq!((b[0], f[0]), (0.0, 0.0));
        assert!((b[1] - 0.7476).abs() < 5e-3 && (f[1] - 0.5413).abs() < 5e-3);
        assert!(b[2] >= 0.9999 - 1e-6);
    }

    #[test]
    fn custom_needs_known_param() {
        assert!(run_custom(&Config::parse("sweep.param = medium.shape\nsweep.values = 1").unwrap()).is_err());
        assert!(run_custom(&Config::parse("sweep.values = 1").unwrap()).is_err());
    }
}
