//! Acceptance checks, one line per property. Exits nonzero if any check fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psidolab::bessel::{bessel_kernel, cordes_symbol, trace_class_probe, Lattice};
use psidolab::fourier::symplectic_fourier;
use psidolab::grid::{lp_norm, sample, sample_real, GridSpec};
use psidolab::kato::{dominance_defect, kato_average, polar_parts, synthesis_defect, unit_average_defect, KatoQuadrature};
use psidolab::multiplier::{
    dyadic_decompose, inverse_transform, inverse_transform_l1, mixed_bessel_symbol, multiplier_bound_probe,
    standard_family, tcp5_factor_check, DyadicQuadrature, MixedSymbolSpec,
};
use psidolab::quantize::{convert_tau, kernel_from_symbol, symbol_from_kernel, QuantizationParams};
use psidolab::schatten::{bound_report, tau_continuity_report, Hypothesis};
use psidolab::symclass::{random_symbol, resample};
use psidolab::weyl::{composition_defect, parseval_defect, parseval_window};
use psidolab::{Grid, Kernel, Point, Real, Result, Sampled, SpaceTag};

type Check = Result<(bool, String)>;

const TAUS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];

fn grid(dim: usize, n: usize, l: f64) -> Grid {
    GridSpec::new(dim, n, l).expect("valid grid")
}

fn gaussian(g: Grid, center: f64, freq: f64, width: f64) -> Result<Sampled> {
    sample(
        |x: &[f64]| {
            let u = x[0] - center;
            Complex::from_polar((-u * u / (2.0 * width * width)).exp(), freq * x[0])
        },
        g,
        SpaceTag::X,
    )
}

fn random_kernel(g: Grid, rng: &mut ChaCha8Rng) -> Kernel {
    let m = g.samples_per_axis();
    let values = (0..m * m).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    Kernel { grid: g, values }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn weyl_composition() -> Check {
    let g = grid(1, 64, 8.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = gaussian(g, 0.3, 0.7, 0.7)?;
    let mut on = 0.0f64;
    for _ in 0..50 {
        let mut label = || rng.gen_range(-20i64..20);
        let xi = Point::from_labels(&g, &[label()], &[label()]);
        let eta = Point::from_labels(&g, &[label()], &[label()]);
        on = on.max(composition_defect(&xi, &eta, &psi)?);
    }
    let mut off = 0.0f64;
    for _ in 0..50 {
        let mut coord = || rng.gen_range(-1.0..1.0);
        let xi = Point::new(vec![coord()], vec![coord()])?;
        let eta = Point::new(vec![coord()], vec![coord()])?;
        off = off.max(composition_defect(&xi, &eta, &psi)?);
    }
    Ok((on <= 1e-12 && off <= 1e-8, format!("on-lattice {on:.2e}, off-lattice {off:.2e}")))
}

fn symplectic_fourier_unitary() -> Check {
    let g = grid(1, 32, 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let tag = SpaceTag::phase(1);
    let values = (0..g.len(&tag)).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let a = Sampled::from_values(tag, g, values)?;
    let fa = symplectic_fourier(&a)?;
    let inv = symplectic_fourier(&fa)?.max_abs_diff(&a)? / a.max_abs();
    let norm = lp_norm(&a, 2.0)?;
    let unit = (lp_norm(&fa, 2.0)? - norm).abs() / norm;
    Ok((inv <= 1e-12 && unit <= 1e-12, format!("involution {inv:.2e}, unitarity {unit:.2e}")))
}

fn parseval() -> Check {
    let run = |n: usize, l: f64| -> Result<f64> {
        let g = grid(1, n, l);
        let phi = gaussian(g, 0.0, 0.0, 1.0)?;
        let psi = gaussian(g, 0.5, 0.4, 0.8)?;
        parseval_defect(&phi, &psi, parseval_window(&g)?)
    };
    let coarse = run(64, 8.0)?;
    let fine = run(128, 8.0 * 2f64.sqrt())?;
    Ok((coarse < 1e-2 && fine < coarse, format!("N=64: {coarse:.2e}, N=128: {fine:.2e}")))
}

fn quantization_roundtrip() -> Check {
    let g = grid(1, 32, 4.0);
    let a = random_symbol(3, 0.5, 1.0, g)?;
    let mut worst = 0.0f64;
    for tau in TAUS {
        let params = QuantizationParams::new(tau, g);
        let back = symbol_from_kernel(&kernel_from_symbol(&a, &params)?, &params)?;
        worst = worst.max(back.max_abs_diff(&a)?);
    }
    Ok((worst <= 1e-10, format!("max roundtrip error {worst:.2e}")))
}

fn tau_conversion() -> Check {
    let g = grid(1, 32, 4.0);
    let a = random_symbol(4, 0.5, 1.0, g)?;
    let mut conv = 0.0f64;
    for from in TAUS {
        let k = kernel_from_symbol(&a, &QuantizationParams::new(from, g))?;
        for to in TAUS {
            let b = convert_tau(&a, from, to)?;
            let kb = kernel_from_symbol(&b, &QuantizationParams::new(to, g))?;
            conv = conv.max(kb.max_abs_diff(&k)? / k.max_abs());
        }
    }
    let x_only = sample_real(|z: &[f64]| (0.8 * z[0]).sin() + 0.2, g, SpaceTag::phase(1))?;
    let base = kernel_from_symbol(&x_only, &QuantizationParams::new(0.0, g))?;
    let mut inv = 0.0f64;
    for tau in TAUS {
        inv = inv.max(kernel_from_symbol(&x_only, &QuantizationParams::new(tau, g))?.max_abs_diff(&base)?);
    }
    Ok((conv <= 1e-8 && inv <= 1e-10, format!("conversion {conv:.2e}, multiplication symbols {inv:.2e}")))
}

fn hilbert_schmidt() -> Check {
    let g = grid(1, 32, 4.0);
    let a = random_symbol(5, 0.5, 1.0, g)?;
    let l2 = lp_norm(&a, 2.0)?;
    let hs: Vec<f64> = TAUS
        .iter()
        .map(|&t| kernel_from_symbol(&a, &QuantizationParams::new(t, g)).map(|k| k.hilbert_schmidt()))
        .collect::<Result<_>>()?;
    let iso = hs.iter().map(|h| (h - l2).abs() / l2).fold(0.0, f64::max);
    let spread = (max_of(&hs) - hs.iter().copied().fold(f64::MAX, f64::min)) / l2;
    Ok((iso <= 1e-6 && spread <= 1e-10, format!("isometry {iso:.2e}, tau spread {spread:.2e}")))
}

fn kato_unit_average() -> Check {
    let quad = KatoQuadrature::new(2, 1);
    let defect = |n: usize| -> Result<f64> {
        let g = grid(1, n, 8.0);
        let phi = sample_real(|x: &[f64]| (-x[0] * x[0] / 0.98).exp(), g, SpaceTag::X)?;
        unit_average_defect(&Kernel::rank_one(&phi, &phi)?, quad)
    };
    let (d32, d48) = (defect(32)?, defect(48)?);

    let g = grid(1, 32, 8.0);
    let phi = gaussian(g, 0.4, 0.5, 0.9)?;
    let seed = Kernel::rank_one(&phi, &phi)?;
    let seed = seed.scale(Complex::new(1.0 / seed.trace().re, 0.0));
    let b = sample_real(|z: &[f64]| (-(z[0] * z[0] + z[1] * z[1]) / 8.0).exp(), g, SpaceTag::phase(1))?;
    let avg = kato_average(&b, &seed, quad)?;
    let low = f64::hermitian_eigenvalues(&avg.matrix(), 32)[0];
    Ok((
        d32 < 5e-2 && d48 < d32 && low >= -1e-10,
        format!("N=32: {d32:.2e}, N=48: {d48:.2e}, min eigenvalue {low:.2e}"),
    ))
}

fn kato_synthesis() -> Check {
    let quad = KatoQuadrature::new(2, 1);
    let mut ok = true;
    let mut parts = Vec::new();
    for tau in [0.0, 0.5] {
        let mut seq = Vec::new();
        for n in [32, 48, 64] {
            let g = grid(1, n, 6.0);
            let c = cordes_symbol(&[2.0], &[2.0], g, &[1])?;
            let b = sample_real(|z: &[f64]| (-(z[0] * z[0] + z[1] * z[1]) / 2.0).exp(), g, SpaceTag::phase(1))?;
            seq.push(synthesis_defect(&b, &c, tau, quad)?);
        }
        ok &= seq[0] < 5e-2 && seq.windows(2).all(|w| w[1] < w[0]);
        parts.push(format!("tau={tau}: {:.2e} -> {:.2e} -> {:.2e}", seq[0], seq[1], seq[2]));
    }
    Ok((ok, parts.join("; ")))
}

fn dominance() -> Check {
    let g = grid(1, 30, 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut single = 0.0f64;
    let mut parts = Vec::new();
    for k in 0..3u64 {
        let t = random_kernel(g, &mut rng);
        let (abs_adj, abs) = polar_parts(&t)?;
        single = single.max(dominance_defect(&t, &abs_adj, &abs, 1000, 100 + k)?);
        parts.push((t, abs_adj, abs));
    }
    let (t1, a1, b1) = &parts[0];
    let (t2, a2, b2) = &parts[1];
    let sum = dominance_defect(&t1.add(t2)?, &a1.add(a2)?, &b1.add(b2)?, 1000, 7)?;
    Ok((single <= 1e-12 && sum <= 1e-12, format!("polar {single:.2e}, sum closure {sum:.2e}")))
}

fn schatten_sweeps() -> Check {
    let g64 = grid(1, 64, 8.0);
    let mut ok = true;
    let mut parts = Vec::new();
    let symbols: Vec<Sampled> = (0..20).map(|s| random_symbol(1000 + s, 0.25, 1.0, g64)).collect::<Result<_>>()?;
    let fine: Vec<Sampled> = symbols.iter().map(|a| resample(a, 128)).collect::<Result<_>>()?;
    for p in [1.0, 2.0, 4.0, f64::INFINITY] {
        let hyp = if p.is_infinite() {
            Hypothesis::seminorm_default(&[1], 0.0)
        } else {
            Hypothesis::smoothed_default(&[1], 0.0)
        };
        let ratios = |set: &[Sampled]| -> Result<Vec<f64>> {
            set.iter().map(|a| bound_report(a, 0.0, p, &hyp, "sweep").map(|r| r.ratio)).collect()
        };
        let (r64, r128) = (ratios(&symbols)?, ratios(&fine)?);
        let spread = max_of(&r64) / median(r64.clone());
        let drift = (max_of(&r128) / max_of(&r64) - 1.0).abs();
        ok &= spread <= 10.0 && drift <= 0.2;
        parts.push(format!("p={p}: spread {spread:.2}, drift {drift:.3}"));
    }
    let hs = symbols
        .iter()
        .map(|a| bound_report(a, 0.5, 2.0, &Hypothesis::Seminorm { orders_x: vec![1], orders_p: vec![1] }, "hs").map(|r| r.ratio))
        .collect::<Result<Vec<_>>>()?;
    let hs_max = max_of(&hs);
    ok &= hs_max <= 1.0 + 1e-6;
    parts.push(format!("p=2 seminorm ratio {hs_max:.4}"));
    Ok((ok, parts.join("; ")))
}

fn tau_continuity() -> Check {
    let g = grid(1, 32, 6.0);
    let a = sample_real(|z: &[f64]| (-(z[0] * z[0] + z[1] * z[1]) / 4.0).exp(), g, SpaceTag::phase(1))?;
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [1.0, 2.0, f64::INFINITY] {
        let d = [0.2, 0.1, 0.05]
            .iter()
            .map(|&dt| tau_continuity_report(&a, &[0.25, 0.25 + dt], p).map(|r| r[0].defect))
            .collect::<Result<Vec<_>>>()?;
        let ratios: Vec<f64> = d.windows(2).map(|w| w[1] / w[0]).collect();
        ok &= ratios.iter().all(|r| (r - 0.5).abs() <= 0.15);
        parts.push(format!("p={p}: halving ratios {:.3}, {:.3}", ratios[0], ratios[1]));
    }
    Ok((ok, parts.join("; ")))
}

fn bessel_kernels() -> Check {
    let g = grid(1, 512, 16.0);
    let mut mass = 0.0f64;
    for s in [0.8, 2.0, 3.5] {
        for which in [Lattice::X, Lattice::Xstar] {
            let k = bessel_kernel(s, g, which)?;
            let total: f64 = k.values.iter().map(|z| z.re).sum::<f64>() * k.weight();
            mass = mass.max((total - 1.0).abs());
        }
    }
    let psi = bessel_kernel(2.0, g, Lattice::X)?;
    let mut pair = 0.0f64;
    for (j, z) in psi.values.iter().enumerate() {
        let x: f64 = g.coord(j);
        if (0.5..=5.0).contains(&x.abs()) {
            pair = pair.max((z.re - (-x.abs()).exp() / 2.0).abs());
        }
    }
    Ok((mass <= 1e-8 && pair <= 1e-3, format!("mass {mass:.2e}, exponential pair {pair:.2e}")))
}

fn cordes_trace() -> Check {
    let grids: Vec<Grid> = [32, 64, 128].iter().map(|&n| grid(1, n, 8.0)).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for tau in [0.0, 0.5] {
        let sums = trace_class_probe(|g| cordes_symbol(&[2.0], &[2.0], g, &[1]), tau, &grids)?;
        let change = sums.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).fold(0.0, f64::max);
        ok &= change < 0.1;
        parts.push(format!("tau={tau}: {:.4} {:.4} {:.4}", sums[0], sums[1], sums[2]));
    }
    Ok((ok, parts.join("; ")))
}

fn multipliers() -> Check {
    let g = grid(2, 32, 8.0);
    let one = MixedSymbolSpec::new("one", 1, 1, 0.0, 0.0, |_: &[f64], _: &[f64]| 1.0)?;
    let quad = DyadicQuadrature::for_grid(64, &grid(1, 32, 8.0), 1)?;
    let dec = dyadic_decompose(&one, &quad, g, 1e-3)?;
    let pu = dec.reconstruction_defect;
    let support = dec.supports_exact();

    let a = mixed_bessel_symbol(1.0, 1.0, 0.5, 1, 1)?;
    let r2 = 2f64.sqrt();
    let ladder: Vec<Grid> = [(64, 4.0 * r2), (128, 8.0), (256, 8.0 * r2), (512, 16.0)].iter().map(|&(n, l)| grid(2, n, l)).collect();
    let l1 = inverse_transform_l1(&a, &ladder)?;

    let pg = grid(2, 32, 6.0);
    let family = standard_family(pg, 4, 17)?;
    let kernel_l1 = lp_norm(&inverse_transform(&a, pg)?, 1.0)?;
    let sup = a.sample(pg)?.max_abs();
    let p1 = multiplier_bound_probe(&a, 1.0, &family)?.max();
    let p2 = multiplier_bound_probe(&a, 2.0, &family)?.max();
    let factor = tcp5_factor_check(&[1.0, 1.0], &[1, 1], 0.5, 2.0, &family)?.factorization_defect;

    let ok = pu < 1e-3 && support && l1.is_cauchy() && p1 <= kernel_l1 + 1e-3 && p2 <= sup + 1e-6 && factor <= 1e-8;
    let diffs: Vec<String> = l1.differences().iter().map(|d| format!("{d:.4}")).collect();
    Ok((
        ok,
        format!(
            "partition {pu:.2e}, support exact {support}, L1 steps [{}], p=1 {p1:.4}/{kernel_l1:.4}, p=2 {p2:.4}/{sup:.4}, factorization {factor:.2e}",
            diffs.join(", ")
        ),
    ))
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Check); 14] = [
        ("weyl composition law", weyl_composition),
        ("symplectic fourier involution and unitarity", symplectic_fourier_unitary),
        ("phase-space parseval identity", parseval),
        ("quantization roundtrip", quantization_roundtrip),
        ("tau conversion", tau_conversion),
        ("hilbert-schmidt isometry", hilbert_schmidt),
        ("kato unit average and positivity", kato_unit_average),
        ("kato synthesis", kato_synthesis),
        ("dominance calculus", dominance),
        ("schatten bound sweeps", schatten_sweeps),
        ("tau continuity", tau_continuity),
        ("bessel kernels", bessel_kernels),
        ("cordes trace probe", cordes_trace),
        ("fourier multipliers", multipliers),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        let status = if ok { "PASS" } else { "FAIL" };
        println!("{status} {:>2} {name}: {detail} ({:.1}s)", i + 1, start.elapsed().as_secs_f64());
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
