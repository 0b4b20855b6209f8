use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psidolab::bessel::{bessel_kernel, cordes_admissible, cordes_symbol, trace_class_probe, Lattice};
use psidolab::fourier::symplectic_fourier;
use psidolab::grid::{lp_norm, sample, sample_real, GridSpec};
use psidolab::kato::{dominance_defect, kato_average, polar_parts, synthesis_defect, unit_average_defect, KatoQuadrature};
use psidolab::multiplier::{
    dyadic_decompose, inverse_transform, inverse_transform_l1, mixed_bessel_symbol, multiplier_bound_probe,
    standard_family, tcp5_factor_check, DyadicQuadrature, MixedSymbolSpec,
};
use psidolab::quantize::{convert_tau, kernel_from_symbol, symbol_from_kernel, QuantizationParams};
use psidolab::schatten::{bound_report, tau_continuity_report, Hypothesis};
use psidolab::symclass::random_symbol;
use psidolab::weyl::{composition_defect, parseval_defect, parseval_window};
use psidolab::{Grid, Kernel, Point, Real, Result, Sampled, SpaceTag};

use crate::config::{ExperimentConfig, Suite};
use crate::report::{SuiteReport, Table};

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn try_max(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
}

fn decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

fn config_grid(cfg: &ExperimentConfig) -> Result<Grid> {
    GridSpec::new(cfg.grid.dim, cfg.grid.samples_per_axis, cfg.grid.half_width)
}

fn gaussian(g: Grid, center: f64, freq: f64, width: f64) -> Result<Sampled> {
    sample(
        move |x: &[f64]| {
            let r2: f64 = x.iter().enumerate().map(|(j, &v)| if j == 0 { (v - center).powi(2) } else { v * v }).sum();
            Complex::from_polar((-r2 / (2.0 * width * width)).exp(), freq * x[0])
        },
        g,
        SpaceTag::X,
    )
}

fn phase_gaussian(g: Grid, variance: f64) -> Result<Sampled> {
    sample_real(move |z: &[f64]| (-z.iter().map(|v| v * v).sum::<f64>() / (2.0 * variance)).exp(), g, SpaceTag::phase(g.dim()))
}

fn random_phase_function(g: Grid, seed: u64) -> Result<Sampled> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag = SpaceTag::phase(g.dim());
    let values = (0..g.len(&tag)).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    Sampled::from_values(tag, g, values)
}

pub fn run(suite: Suite, cfg: &ExperimentConfig) -> SuiteReport {
    let mut report = SuiteReport::new(suite);
    match suite {
        Suite::Weyl => weyl(cfg, &mut report),
        Suite::Quantize => quantize(cfg, &mut report),
        Suite::Kato => kato(cfg, &mut report),
        Suite::Schatten => schatten(cfg, &mut report),
        Suite::Bessel => bessel(cfg, &mut report),
        Suite::Multiplier => multiplier(cfg, &mut report),
        Suite::All => {}
    }
    report
}

fn weyl(cfg: &ExperimentConfig, report: &mut SuiteReport) {
    let th = &cfg.thresholds;
    let Ok(g) = config_grid(cfg) else {
        report.check("grid", 0.0, config_grid(cfg).map(|_| 0.0));
        return;
    };
    let n = g.dim();
    let span = (g.samples_per_axis() / 4) as i64;
    let mut table = Table::new("composition", &["seed", "trial", "defect"]);
    let composition = (|| {
        let psi = gaussian(g, 0.3, 0.7, 0.7)?;
        let mut worst = 0.0f64;
        for &seed in &cfg.seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut labels = || (0..n).map(|_| rng.gen_range(-span..span)).collect::<Vec<i64>>();
            for trial in 0..20 {
                let xi = Point::from_labels(&g, &labels(), &labels());
                let eta = Point::from_labels(&g, &labels(), &labels());
                let d = composition_defect(&xi, &eta, &psi)?;
                table.push(vec![seed.to_string(), trial.to_string(), fmt(d)]);
                worst = worst.max(d);
            }
        }
        Ok(worst)
    })();
    report.check("composition_defect", th.composition, composition);
    report.table(table);

    let fourier = try_max(cfg.seeds.iter().map(|&seed| {
        let a = random_phase_function(g, seed)?;
        let fa = symplectic_fourier(&a)?;
        let involution = symplectic_fourier(&fa)?.max_abs_diff(&a)? / a.max_abs();
        let norm = lp_norm(&a, 2.0)?;
        Ok(involution.max((lp_norm(&fa, 2.0)? - norm).abs() / norm))
    }));
    report.check("symplectic_fourier_defect", th.fourier, fourier);

    let parseval_at = |g: Grid| -> Result<f64> {
        parseval_defect(&gaussian(g, 0.0, 0.0, 1.0)?, &gaussian(g, 0.5, 0.4, 0.8)?, parseval_window(&g)?)
    };
    let mut table = Table::new("parseval", &["samples_per_axis", "half_width", "defect"]);
    let coarse = parseval_at(g);
    let fine_grid = GridSpec::new(n, 2 * g.samples_per_axis(), g.half_width() * 2f64.sqrt());
    let fine = fine_grid.clone().and_then(parseval_at);
    for (grid, value) in [(Ok(g), &coarse), (fine_grid, &fine)] {
        if let (Ok(grid), Ok(v)) = (grid, value) {
            table.push(vec![grid.samples_per_axis().to_string(), grid.half_width().to_string(), fmt(*v)]);
        }
    }
    if let (Ok(c), Ok(f)) = (&coarse, &fine) {
        report.advise("parseval_refinement_ratio", f / c, f < c);
    }
    report.check("parseval_defect", th.parseval, coarse);
    report.table(table);
}

fn quantize(cfg: &ExperimentConfig, report: &mut SuiteReport) {
    let th = &cfg.thresholds;
    let Ok(g) = config_grid(cfg) else {
        report.check("grid", 0.0, config_grid(cfg).map(|_| 0.0));
        return;
    };
    let mut table = Table::new("taus", &["seed", "tau", "roundtrip", "hilbert_schmidt"]);
    let mut roundtrip = Ok(0.0);
    let mut isometry = Ok(0.0);
    let mut conversion = Ok(0.0);
    let fold = |acc: &mut Result<f64>, v: Result<f64>| {
        *acc = match (acc.clone(), v) {
            (Ok(a), Ok(b)) => Ok(a.max(b)),
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    };
    for &seed in &cfg.seeds {
        let a = match random_symbol(seed, 0.5, 1.0, g) {
            Ok(a) => a,
            Err(e) => {
                fold(&mut roundtrip, Err(e));
                continue;
            }
        };
        let l2 = lp_norm(&a, 2.0).unwrap_or(1.0).max(f64::MIN_POSITIVE);
        for &tau in &cfg.taus {
            let params = QuantizationParams::new(tau, g);
            let k = kernel_from_symbol(&a, &params);
            let rt = k.as_ref().map_err(Clone::clone).and_then(|k| symbol_from_kernel(k, &params)?.max_abs_diff(&a));
            let hs = k.as_ref().map(|k| (k.hilbert_schmidt() - l2).abs() / l2).map_err(Clone::clone);
            if let (Ok(r), Ok(h)) = (&rt, &hs) {
                table.push(vec![seed.to_string(), tau.to_string(), fmt(*r), fmt(*h)]);
            }
            fold(&mut roundtrip, rt);
            fold(&mut isometry, hs);
            for &to in &cfg.taus {
                let d = (|| {
                    let k = k.as_ref().map_err(Clone::clone)?;
                    let kb = kernel_from_symbol(&convert_tau(&a, tau, to)?, &QuantizationParams::new(to, g))?;
                    Ok(kb.max_abs_diff(k)? / k.max_abs())
                })();
                fold(&mut conversion, d);
            }
        }
    }
    let invariance = (|| {
        let a = sample_real(|z: &[f64]| (0.8 * z[0]).sin() + 0.2, g, SpaceTag::phase(g.dim()))?;
        let base = kernel_from_symbol(&a, &QuantizationParams::new(0.0, g))?;
        try_max(cfg.taus.iter().map(|&t| kernel_from_symbol(&a, &QuantizationParams::new(t, g))?.max_abs_diff(&base)))
    })();
    report.check("roundtrip_error", th.roundtrip, roundtrip);
    report.check("tau_conversion_error", th.conversion, conversion);
    report.check("multiplication_symbol_invariance", th.roundtrip, invariance);
    report.check("hilbert_schmidt_defect", th.hilbert_schmidt, isometry);
    report.table(table);
}

fn kato(cfg: &ExperimentConfig, report: &mut SuiteReport) {
    let th = &cfg.thresholds;
    let quad = KatoQuadrature::new(2, 1);
    let (n, l) = (cfg.grid.dim, cfg.grid.half_width);
    let mut table = Table::new("refinement", &["samples_per_axis", "tau", "unit_average", "synthesis"]);
    let mut units = Vec::new();
    let mut synth: Vec<Vec<f64>> = vec![Vec::new(); cfg.taus.len()];
    let mut worst_unit = Ok(0.0);
    let mut worst_synth = Ok(0.0);
    for &samples in &cfg.refinement {
        let level: Result<(f64, Vec<f64>)> = (|| {
            let g = GridSpec::new(n, samples, l)?;
            let phi = gaussian(g, 0.0, 0.0, 0.7)?;
            let unit = unit_average_defect(&Kernel::rank_one(&phi, &phi)?, quad)?;
            let c = cordes_symbol(&vec![n as f64 + 1.0], &vec![n as f64 + 1.0], g, &[n])?;
            let b = phase_gaussian(g, 1.0)?;
            let s = cfg.taus.iter().map(|&tau| synthesis_defect(&b, &c, tau, quad)).collect::<Result<Vec<_>>>()?;
            Ok((unit, s))
        })();
        match level {
            Ok((unit, s)) => {
                for (j, (&tau, &d)) in cfg.taus.iter().zip(&s).enumerate() {
                    table.push(vec![samples.to_string(), tau.to_string(), fmt(unit), fmt(d)]);
                    synth[j].push(d);
                }
                units.push(unit);
                worst_unit = worst_unit.map(|m: f64| m.max(unit));
                worst_synth = worst_synth.map(|m: f64| m.max(max_of(s)));
            }
            Err(e) => {
                worst_unit = Err(e.clone());
                worst_synth = Err(e);
            }
        }
    }
    report.check("unit_average_defect", th.unit_average, worst_unit);
    report.check("synthesis_defect", th.synthesis, worst_synth);
    report.advise("unit_average_decreasing", units.last().copied().unwrap_or(0.0), decreasing(&units));
    report.advise("synthesis_decreasing", max_of(synth.iter().filter_map(|s| s.last().copied())), synth.iter().all(|s| decreasing(s)));
    report.table(table);

    let positivity = (|| {
        let g = GridSpec::new(n, cfg.refinement.first().copied().unwrap_or(32), l)?;
        let phi = gaussian(g, 0.4, 0.5, 0.9)?;
        let seed = Kernel::rank_one(&phi, &phi)?;
        let seed = seed.scale(Complex::new(1.0 / seed.trace().re, 0.0));
        let avg = kato_average(&phase_gaussian(g, 4.0)?, &seed, quad)?;
        let low = f64::hermitian_eigenvalues(&avg.matrix(), g.len(&SpaceTag::X))[0];
        Ok((-low).max(0.0))
    })();
    report.check("positivity_defect", th.positivity, positivity);

    let dominance = (|| {
        let g = config_grid(cfg)?;
        let m = g.len(&SpaceTag::X);
        let mut parts = Vec::new();
        let mut worst = 0.0f64;
        for &seed in &cfg.seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values = (0..m * m).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let t = Kernel::from_matrix(g, values);
            let (abs_adj, abs) = polar_parts(&t)?;
            worst = worst.max(dominance_defect(&t, &abs_adj, &abs, 200, seed)?);
            parts.push((t, abs_adj, abs));
        }
        if let [(t1, a1, b1), (t2, a2, b2), ..] = parts.as_slice() {
            worst = worst.max(dominance_defect(&t1.add(t2)?, &a1.add(a2)?, &b1.add(b2)?, 200, 0)?);
        }
        Ok(worst)
    })();
    report.check("dominance_defect", th.dominance, dominance);
}

fn schatten(cfg: &ExperimentConfig, report: &mut SuiteReport) {
    let th = &cfg.thresholds;
    let Ok(g) = config_grid(cfg) else {
        report.check("grid", 0.0, config_grid(cfg).map(|_| 0.0));
        return;
    };
    let blocks = [g.dim()];
    let mut table = Table::new("bounds", &["seed", "tau", "p", "hypothesis", "lhs", "rhs", "ratio", "violation"]);
    let mut violations = 0.0;
    let mut hs = 0.0f64;
    let mut failure = None;
    let mut ratios: Vec<(f64, Vec<f64>)> = cfg.ps.iter().map(|p| (p.value(), Vec::new())).collect();
    let mut continuity = Table::new("tau_continuity", &["seed", "p", "tau_a", "tau_b", "defect"]);
    for &seed in &cfg.seeds {
        let result = (|| {
            let a = random_symbol(seed, 0.25, 1.0, g)?;
            let id = format!("seed{seed}");
            for &tau in &cfg.taus {
                for (p, collected) in ratios.iter_mut() {
                    let hyp = if p.is_infinite() {
                        Hypothesis::seminorm_default(&blocks, tau)
                    } else {
                        Hypothesis::smoothed_default(&blocks, tau)
                    };
                    let r = bound_report(&a, tau, *p, &hyp, &id)?;
                    table.push(vec![
                        seed.to_string(),
                        tau.to_string(),
                        p.to_string(),
                        r.hypothesis.clone(),
                        fmt(r.lhs),
                        fmt(r.rhs),
                        fmt(r.ratio),
                        r.violation.to_string(),
                    ]);
                    collected.push(r.ratio);
                    violations += f64::from(u8::from(r.violation));
                }
                let orders = vec![1; blocks.len()];
                let r = bound_report(&a, tau, 2.0, &Hypothesis::Seminorm { orders_x: orders.clone(), orders_p: orders }, &id)?;
                hs = hs.max(r.ratio - 1.0);
            }
            if cfg.taus.len() >= 2 {
                for (p, _) in &ratios {
                    for d in tau_continuity_report(&a, &cfg.taus, *p)? {
                        continuity.push(vec![seed.to_string(), p.to_string(), d.tau_a.to_string(), d.tau_b.to_string(), fmt(d.defect)]);
                    }
                }
            }
            Ok(())
        })();
        if let Err(e) = result {
            failure = Some(e);
        }
    }
    report.check("bound_violations", 0.0, failure.clone().map_or(Ok(violations), Err));
    report.check("hilbert_schmidt_bound_excess", th.hs_bound, failure.map_or(Ok(hs), Err));
    for (p, r) in &ratios {
        if r.is_empty() {
            continue;
        }
        let mut sorted = r.clone();
        sorted.sort_by(f64::total_cmp);
        let spread = sorted[sorted.len() - 1] / sorted[sorted.len() / 2];
        report.advise(&format!("ratio_spread_p{p}"), spread, spread <= 10.0);
    }
    report.table(table);
    report.table(continuity);
}

fn bessel(cfg: &ExperimentConfig, report: &mut SuiteReport) {
    let th = &cfg.thresholds;
    let mass = (|| {
        let g = GridSpec::new(1, 512, 16.0)?;
        let mut worst = 0.0f64;
        for s in [0.8, 2.0, 3.5] {
            for which in [Lattice::X, Lattice::Xstar] {
                let k = bessel_kernel(s, g, which)?;
                worst = worst.max((k.values.iter().map(|z| z.re).sum::<f64>() * k.weight() - 1.0).abs());
            }
        }
        Ok(worst)
    })();
    report.check("kernel_mass_defect", th.bessel_mass, mass);

    let pair = (|| {
        let g: Grid = GridSpec::new(1, 512, 16.0)?;
        let psi = bessel_kernel(2.0, g, Lattice::X)?;
        Ok(max_of(psi.values.iter().enumerate().filter_map(|(j, z)| {
            let x = g.coord(j);
            (0.5..=5.0).contains(&x.abs()).then(|| (z.re - (-x.abs()).exp() / 2.0).abs())
        })))
    })();
    report.check("exponential_pair_error", th.exponential_pair, pair);

    let n = cfg.grid.dim;
    let order = vec![n as f64 + 1.0];
    let mut table = Table::new("trace_norms", &["samples_per_axis", "tau", "trace_norm"]);
    let drift = (|| {
        let grids = cfg.refinement.iter().map(|&s| GridSpec::new(n, s, cfg.grid.half_width)).collect::<Result<Vec<_>>>()?;
        let mut worst = 0.0f64;
        for &tau in &cfg.taus {
            if !cordes_admissible(&order, &order, &[n], tau) {
                continue;
            }
            let sums = trace_class_probe(|g| cordes_symbol(&order, &order, g, &[n]), tau, &grids)?;
            for (g, s) in grids.iter().zip(&sums) {
                table.push(vec![g.samples_per_axis().to_string(), tau.to_string(), fmt(*s)]);
            }
            worst = worst.max(max_of(sums.windows(2).map(|w| (w[1] / w[0] - 1.0).abs())));
        }
        Ok(worst)
    })();
    report.check("trace_norm_drift", th.trace_drift, drift);
    report.table(table);
}

fn multiplier(cfg: &ExperimentConfig, report: &mut SuiteReport) {
    let th = &cfg.thresholds;
    let m = &cfg.multiplier;
    let mut pieces = Table::new("pieces", &["node", "kind", "t1", "t2", "weight", "seminorm", "support_exact"]);
    let decomposition = (|| {
        let g = GridSpec::new(2, m.samples_per_axis, m.half_width)?;
        let quad = DyadicQuadrature::for_grid(m.nodes, &GridSpec::new(1, m.samples_per_axis, m.half_width)?, 1)?;
        let one = MixedSymbolSpec::new("one", 1, 1, 0.0, 0.0, |_: &[f64], _: &[f64]| 1.0)?;
        dyadic_decompose(&one, &quad, g, th.partition)
    })();
    match &decomposition {
        Ok(dec) => {
            for (i, p) in dec.pieces.iter().enumerate() {
                pieces.push(vec![
                    i.to_string(),
                    format!("{:?}", p.kind),
                    p.t1.to_string(),
                    p.t2.to_string(),
                    fmt(p.weight),
                    fmt(p.seminorm),
                    p.support_exact.to_string(),
                ]);
            }
            report.check("partition_defect", th.partition, Ok(dec.reconstruction_defect));
            report.check("support_violations", 0.0, Ok(dec.pieces.iter().filter(|p| !p.support_exact).count() as f64));
        }
        Err(e) => report.check("partition_defect", th.partition, Err(e.clone())),
    }
    report.table(pieces);

    let spec = mixed_bessel_symbol(1.0, 1.0, m.epsilon, 1, 1);
    let mut ladder = Table::new("l1_ladder", &["samples_per_axis", "half_width", "l1_norm"]);
    let l1: Result<_> = (|| {
        let spec = spec.as_ref().map_err(Clone::clone)?;
        let grids = (0..4)
            .map(|k| GridSpec::new(2, 2 * m.samples_per_axis << k, m.half_width / 2f64.sqrt() * 2f64.sqrt().powi(k)))
            .collect::<Result<Vec<_>>>()?;
        let r = inverse_transform_l1(spec, &grids)?;
        for (g, v) in grids.iter().zip(&r.norms) {
            ladder.push(vec![g.samples_per_axis().to_string(), g.half_width().to_string(), fmt(*v)]);
        }
        Ok(r)
    })();
    if let Ok(r) = &l1 {
        report.advise("l1_cauchy", r.differences().last().copied().unwrap_or(0.0), r.is_cauchy());
    }
    report.table(ladder);

    let probes = (|| {
        let spec = spec.as_ref().map_err(Clone::clone)?;
        let g = GridSpec::new(2, m.samples_per_axis, m.half_width)?;
        let family = standard_family(g, m.family_size, cfg.seeds.first().copied().unwrap_or(0))?;
        let kernel_l1 = lp_norm(&inverse_transform(spec, g)?, 1.0)?;
        let sup = spec.sample(g)?.max_abs();
        let p1 = multiplier_bound_probe(spec, 1.0, &family)?.max() - kernel_l1;
        let p2 = multiplier_bound_probe(spec, 2.0, &family)?.max() - sup;
        let factor = tcp5_factor_check(&[1.0, 1.0], &[1, 1], m.epsilon, 2.0, &family)?.factorization_defect;
        Ok((p1, p2, factor))
    })();
    let part = |f: fn(&(f64, f64, f64)) -> f64| probes.as_ref().map(f).map_err(Clone::clone);
    report.check("l1_probe_excess", th.probe_slack, part(|r| r.0));
    report.check("l2_probe_excess", th.probe_l2, part(|r| r.1));
    report.check("factorization_defect", th.factorization, part(|r| r.2));
}
