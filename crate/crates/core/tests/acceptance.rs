//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::{rngs::StdRng, Rng, SeedableRng};

use crib_memory::analytic::{self, Direction, ProtocolConfig};
use crib_memory::config::Config;
use crib_memory::kernels::{EvaluationMode, KernelContext, MediumSpec};
use crib_memory::metrics::{efficiency, spectral_efficiency};
use crib_memory::spectral::{ComplexSpectrum, PulseSpec, ShapeKind, SpectralDistribution, Spectrum};
use crib_memory::sweep::{self, optimize_width};

type Outcome = Result<(bool, String), String>;

fn delta() -> SpectralDistribution<f64> {
    SpectralDistribution::delta()
}

fn lor(w: f64) -> SpectralDistribution<f64> {
    SpectralDistribution::lorentzian(w).unwrap()
}

fn boxed(w: f64) -> SpectralDistribution<f64> {
    SpectralDistribution::boxcar(w).unwrap()
}

fn ctx(g0: SpectralDistribution<f64>, gp: SpectralDistribution<f64>) -> KernelContext<f64> {
    KernelContext::new(g0, gp).unwrap()
}

fn pulse() -> PulseSpec<f64> {
    PulseSpec::lorentzian(1.0).unwrap().centered_at(-15.0)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn backward_law() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let m = MediumSpec::with_optical_depth(a, ctx(delta(), boxed(100.0))).map_err(err)?;
        let eff = spectral_efficiency(&m, Direction::BackwardComplete, &pulse()).map_err(err)?;
        worst = worst.max((eff - (1.0 - (-a as f64).exp()).powi(2)).abs());
    }
    Ok((worst < 5e-3, format!("max |Eff - (1-e^-aL)^2| = {worst:.2e} (tol 5e-3)")))
}

fn forward_maximum() -> Outcome {
    let cfg = Config::parse("sweep.alpha_l = linspace(0, 10, 1001)").map_err(err)?;
    let res = sweep::run_fig1(&cfg).map_err(err)?;
    let a = res.column("alpha_l").ok_or("no alpha_l column")?;
    let e = res.column("eff_forward").ok_or("no eff_forward column")?;
    let (i, _) = e
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let ok = (a[i] - 2.0).abs() <= 0.05 && (e[i] - 0.541).abs() <= 0.005;
    Ok((ok, format!("peak {:.4} at aL = {:.3} (want 0.541 +- 0.005 at 2.00 +- 0.05)", e[i], a[i])))
}

fn oracle_equivalence() -> Outcome {
    let res = sweep::run_validate(&Config::default()).map_err(err)?;
    let gap = res.column("eff_gap").ok_or("no eff_gap")?;
    let l2 = res.column("spectrum_error").ok_or("no spectrum_error")?;
    let max_gap = gap.iter().cloned().fold(0.0, f64::max);
    let max_l2 = l2.iter().cloned().fold(0.0, f64::max);
    Ok((
        res.passed && res.rows.len() == 12,
        format!("{} points, max |dEff| = {max_gap:.2e} (tol 1e-2), max L2 = {max_l2:.2e} (tol 1e-2)", res.rows.len()),
    ))
}

fn plemelj_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let cases = vec![
        ("delta/box", ctx(delta(), boxed(3.0))),
        ("delta/lorentzian", ctx(delta(), lor(2.0))),
        ("lorentzian/lorentzian", ctx(lor(0.5), lor(2.0))),
        ("lorentzian/box", ctx(lor(0.3), boxed(4.0))),
        ("box/lorentzian", ctx(boxed(1.0), lor(2.0))),
        ("box/box", ctx(boxed(1.0), boxed(4.0))),
    ];
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (_, c) in &cases {
        let span = 3.0 * (c.g0.width() + c.gp.width());
        let mut edges = Vec::new();
        for b in c.gp.breakpoints() {
            for b0 in c.g0.breakpoints() {
                edges.push(b + b0);
            }
        }
        let mut n = 0;
        while n < 50 {
            let w: f64 = rng.gen_range(-span..span);
            if edges.iter().any(|e| (w - e).abs() < 1e-3) {
                continue;
            }
            let g = std::f64::consts::PI * c.broadened_density(w).map_err(err)?;
            for mode in [EvaluationMode::ClosedForm, EvaluationMode::Quadrature] {
                let h = c.clone().with_mode(mode).kernel_h(w).map_err(err)?;
                let dev = if g > 1e-300 { (h.re - g).abs() / g } else { h.re.abs() };
                worst = worst.max(dev);
            }
            n += 1;
            checked += 1;
        }
    }
    let mut f_dev: f64 = 0.0;
    for c in [ctx(delta(), boxed(3.0)), ctx(delta(), lor(2.0))] {
        for _ in 0..50 {
            let w: f64 = rng.gen_range(-6.0..6.0);
            if (w.abs() - 1.5).abs() < 1e-3 {
                continue;
            }
            let (h, f) = (c.kernel_h(w).map_err(err)?, c.kernel_f(w).map_err(err)?);
            f_dev = f_dev.max((h - f).norm() / h.norm());
        }
    }
    Ok((
        worst < 1e-6 && f_dev < 1e-8,
        format!("{checked} points: max Re H vs pi G rel dev {worst:.2e} (tol 1e-6); max |F-H|/|H| = {f_dev:.2e} (tol 1e-8)"),
    ))
}

fn no_distortion() -> Outcome {
    let cfg = Config::default();
    let m = MediumSpec::with_optical_depth(2.0, ctx(delta(), boxed(100.0))).map_err(err)?;
    let mut lines = Vec::new();
    let mut ok = true;
    for d in [Direction::BackwardComplete, Direction::ForwardSimplified] {
        let p = ProtocolConfig::new(d, 30.0).map_err(err)?;
        let r = sweep::analytic_report(&cfg, &m, &p, &pulse()).map_err(err)?;
        ok &= r.shape_fidelity >= 0.999;
        lines.push(format!("{} {:.6}", d.name(), r.shape_fidelity));
    }
    Ok((ok, format!("fidelity {} (want >= 0.999)", lines.join(", "))))
}

fn storage_decay() -> Outcome {
    let cfg = Config::parse("protocol.direction = backward").map_err(err)?;
    let res = sweep::run_decay(&cfg).map_err(err)?;
    let rate = res.column("fitted_rate_backward").ok_or("no rate")?[0];
    Ok(((rate - 0.1).abs() <= 0.02 * 0.1, format!("fitted rate {rate:.6} vs gamma0 = 0.1 (tol 2%)")))
}

fn fig2_properties() -> Outcome {
    let p = pulse();
    let eff = |nu: f64, g: f64, d: Direction| -> Result<f64, String> {
        let m = MediumSpec::new(nu, ctx(delta(), lor(g))).map_err(err)?;
        spectral_efficiency(&m, d, &p).map_err(err)
    };
    let (b, f) = (Direction::BackwardComplete, Direction::ForwardSimplified);
    let ob = optimize_width(2.0, ShapeKind::Lorentzian, b, &p, 1e-3, 1e3, 61).map_err(err)?;
    let of = optimize_width(2.0, ShapeKind::Lorentzian, f, &p, 1e-3, 1e3, 61).map_err(err)?;
    let mut ok = ob.efficiency > 0.95 && ob.efficiency > of.efficiency;
    let mut tails = Vec::new();
    for d in [b, f] {
        let (e_small, e_mid_small) = (eff(2.0, 1e-6, d)?, eff(2.0, 1e-3, d)?);
        let (e_large, e_mid_large) = (eff(2.0, 1e4, d)?, eff(2.0, 1e2, d)?);
        ok &= e_small < 0.01 && e_small < e_mid_small && e_large < 0.01 && e_large < e_mid_large;
        tails.push(format!("{} {e_small:.1e}/{e_large:.1e}", d.name()));
    }
    let sb = optimize_width(0.05, ShapeKind::Lorentzian, b, &p, 1e-3, 1e3, 61).map_err(err)?;
    let sf = optimize_width(0.05, ShapeKind::Lorentzian, f, &p, 1e-3, 1e3, 61).map_err(err)?;
    ok &= sb.gamma < 1.0 && sf.gamma < 1.0;
    Ok((
        ok,
        format!(
            "nu=2 sup bwd {:.4} fwd {:.4}; tails at gamma 1e-6/1e4: {}; nu=0.05 argmax bwd {:.3} fwd {:.3}",
            ob.efficiency,
            of.efficiency,
            tails.join(", "),
            sb.gamma,
            sf.gamma
        ),
    ))
}

fn fig4_crossover() -> Outcome {
    let p = pulse();
    let eff = |gp: SpectralDistribution<f64>, d: Direction| -> Result<f64, String> {
        let m = MediumSpec::new(2.0, ctx(delta(), gp)).map_err(err)?;
        spectral_efficiency(&m, d, &p).map_err(err)
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [Direction::BackwardComplete, Direction::ForwardSimplified] {
        let (si, sd) = (eff(lor(0.1), d)?, eff(boxed(0.1), d)?);
        let (li, ld) = (eff(lor(30.0), d)?, eff(boxed(30.0), d)?);
        ok &= si > sd && ld > li;
        parts.push(format!("{}: gamma=0.1 same {si:.4} diff {sd:.4}; gamma=30 same {li:.4} diff {ld:.4}", d.name()));
    }
    Ok((ok, parts.join("; ")))
}

fn linearity_and_determinism() -> Outcome {
    let media = [
        MediumSpec::with_optical_depth(2.0, ctx(delta(), boxed(100.0))).map_err(err)?,
        MediumSpec::new(2.0, ctx(delta(), lor(1.0))).map_err(err)?,
        MediumSpec::new(2.5, ctx(lor(0.1), boxed(10.0))).map_err(err)?,
    ];
    let base = pulse();
    let big = base.clone().scaled(1e3);
    let mut worst: f64 = 0.0;
    for m in &media {
        let grid = sweep::grid_for(&Config::default(), m, 1.0).map_err(err)?;
        for d in [Direction::BackwardComplete, Direction::ForwardSimplified] {
            let p = ProtocolConfig::new(d, 30.0).map_err(err)?;
            let eff_of = |x: &PulseSpec<f64>| -> Result<f64, String> {
                let out = analytic::output_spectrum(m, &p, x, &grid).map_err(err)?.spectrum;
                efficiency(&out, &ComplexSpectrum::sample(&grid, x)).map_err(err)
            };
            let (e1, e2) = (eff_of(&base)?, eff_of(&big)?);
            worst = worst.max((e1 - e2).abs() / e1);
        }
    }
    let cfg = Config::parse("sweep.alpha_l = linspace(0, 10, 21)\nsweep.gamma = logspace(-2, 2, 9)").map_err(err)?;
    let mut identical = true;
    for run in [sweep::run_fig1, sweep::run_fig2] {
        let a = run(&cfg).map_err(err)?.to_csv_string(&cfg).map_err(err)?;
        let b = run(&cfg).map_err(err)?.to_csv_string(&cfg).map_err(err)?;
        identical &= a == b;
    }
    Ok((
        worst < 1e-12 && identical,
        format!("max relative efficiency change under x1e3 amplitude {worst:.2e} (tol 1e-12); CSV byte-identical: {identical}"),
    ))
}

fn main() {
    // Sanity check that the scale factor actually reaches the field.
    let s = pulse().scaled(1e3);
    assert!((s.amplitude(0.0) - pulse().amplitude(0.0) * Complex::new(1e3, 0.0)).norm() < 1e-9);

    let criteria: Vec<(&str, u64, fn() -> Outcome)> = vec![
        ("1 backward law (1-e^-aL)^2", 10, backward_law),
        ("2 forward maximum 54% at aL = 2", 10, forward_maximum),
        ("3 oracle equivalence (12 points)", 300, oracle_equivalence),
        ("4 Plemelj property suite", 5, plemelj_suite),
        ("5 no distortion at gamma = 100", 30, no_distortion),
        ("6 storage decay rate = gamma0", 60, storage_decay),
        ("7 Fig. 2 qualitative properties", 60, fig2_properties),
        ("8 Fig. 4 shape crossover", 60, fig4_crossover),
        ("9 linearity and determinism", 10, linearity_and_determinism),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (ok && in_time, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {detail} [{:.2}s / {budget}s]",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
