//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints its own pass/fail line.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use pauli_ssf::field::MagneticField;
use pauli_ssf::linalg::{hermitian_eigenvalues, CMatrix};
use pauli_ssf::ssf::{
    block_spectrum, effective_spectrum, ids_constant_field, Longitudinal, PerturbationProfile,
};
use pauli_ssf::toeplitz::{
    comparator_phi, comparator_psi, count_above, toeplitz_matrix, CosineSeries, Sign, SymbolU,
};
use pauli_ssf::zeromodes::{evaluation_radius, ZeroModeBasis};
use pauli_ssf_cli::commands::{cmd_kernel, cmd_levinson, cmd_ssf, cmd_toeplitz, duality_trials};
use pauli_ssf_cli::output::{Cell, Table};
use pauli_ssf_cli::RunConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Verdict {
    if elapsed <= limit {
        Ok(format!("{detail}, {:.2} s", elapsed.as_secs_f64()))
    } else {
        Err(format!(
            "{detail}, took {:.1} s (limit {} s)",
            elapsed.as_secs_f64(),
            limit.as_secs()
        ))
    }
}

fn config(text: &str) -> Result<RunConfig, String> {
    RunConfig::from_toml_str(text).map_err(err)
}

fn numbers(table: &Table, name: &str) -> Vec<f64> {
    let i = table.column(name).expect("column exists");
    table
        .rows
        .iter()
        .map(|r| match &r[i] {
            Cell::Num(v) => *v,
            Cell::Int(v) => *v as f64,
            other => panic!("column {name} holds {other:?}"),
        })
        .collect()
}

fn constant_basis(b0: f64, size: usize) -> Result<ZeroModeBasis, String> {
    ZeroModeBasis::new(MagneticField::constant(b0).map_err(err)?, size).map_err(err)
}

fn gaussian() -> SymbolU {
    SymbolU::gaussian(1.0, 1.0, 1.0).unwrap()
}

fn constant_field_kernel() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for b0 in [1.0, 2.0] {
        let basis = constant_basis(b0, 64)?;
        let r = evaluation_radius(b0, 64);
        let golden = PI * (3.0 - 5f64.sqrt());
        for i in 0..100 {
            let rad = r * (i as f64 / 99.0).sqrt();
            let th = golden * i as f64;
            let v = basis
                .kernel_diag([rad * th.cos(), rad * th.sin()])
                .map_err(err)?;
            worst = worst.max((v / (b0 / (2.0 * PI)) - 1.0).abs());
        }
    }
    let detail = format!("max relative deviation {worst:.2e} over 200 probes");
    if worst > 1e-8 {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(10), detail)
}

fn gaussian_oracle() -> Verdict {
    let start = Instant::now();
    let (b0, eta) = (2.0, 1.0);
    let t = toeplitz_matrix(&constant_basis(b0, 64)?, &gaussian()).map_err(err)?;
    let q: f64 = b0 / (b0 + 2.0 * eta);
    let worst = (0..=15)
        .map(|k| (t.eigenvalues()[k] / q.powi(k as i32 + 1) - 1.0).abs())
        .fold(0.0, f64::max);
    let detail = format!("max relative error {worst:.2e} for k <= 15");
    if worst > 1e-8 {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(30), detail)
}

fn kernel_bounds_cosine() -> Verdict {
    let start = Instant::now();
    let cfg = config("[field]\nb0 = 2.0\ncosines = [{ frequency = [1.0, 0.0], amplitude = 1.0 }]\n[basis]\nsize = 96\n[kernel]\npoints = 41\n")?;
    let out = cmd_kernel(&cfg).map_err(err)?;
    let n = out.table.rows.len();
    let detail = format!("{n} grid points, osc {:.4}", out.report.residuals["osc"]);
    if let Some(v) = out.violation {
        return Err(format!("{detail}: {v}"));
    }
    within(start.elapsed(), Duration::from_secs(120), detail)
}

fn counting_vs_phi() -> Verdict {
    let t = toeplitz_matrix(&constant_basis(2.0, 64)?, &gaussian()).map_err(err)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for l in [8.0, 12.0, 16.0] {
        let s = f64::exp(-l);
        let n = t.counting(s, Sign::Plus) as f64;
        let phi = comparator_phi(s, 1.0, 1.0, 2.0).map_err(err)?;
        ok &= (n - phi).abs() <= 1.0;
        parts.push(format!("s = e^-{l}: n = {n}, comparator {phi:.3}"));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn counting_vs_psi() -> Verdict {
    let b0 = 7.0;
    let u = SymbolU::power(4.0, CosineSeries::constant(1.0), 1.0).map_err(err)?;
    let t = toeplitz_matrix(&constant_basis(b0, 192)?, &u).map_err(err)?;
    let wide = toeplitz_matrix(&constant_basis(b0, 240)?, &u).map_err(err)?;
    let mut reliable = Vec::new();
    for i in 0..6 {
        let s = 10f64.powf(-1.0 - 0.5 * i as f64);
        let n = t.counting(s, Sign::Plus);
        if n >= 10 && n == wide.counting(s, Sign::Plus) {
            let psi = comparator_psi(s, 4.0, &CosineSeries::constant(1.0), b0).map_err(err)?;
            reliable.push((s, n as f64 / psi));
        }
    }
    if reliable.len() < 3 {
        return Err(format!("only {} reliable thresholds", reliable.len()));
    }
    let monotone = reliable
        .windows(2)
        .all(|w| (w[1].1 - 1.0).abs() < (w[0].1 - 1.0).abs());
    let last = &reliable[reliable.len() - 3..];
    let banded = last.iter().all(|(_, r)| (0.8..=1.2).contains(r));
    let detail = last
        .iter()
        .map(|(s, r)| format!("s = {s:.1e}: {r:.4}"))
        .collect::<Vec<_>>()
        .join("; ");
    if monotone && banded {
        Ok(detail)
    } else {
        Err(format!("{detail} (monotone {monotone}, in band {banded})"))
    }
}

fn sandwich() -> Verdict {
    let cfg = config(
        "[field]\nb0 = 2.0\ncosines = [{ frequency = [1.0, 0.0], amplitude = 0.5 }]\n[basis]\nsize = 96\n[sweep]\nstart = 0.31622776601683794\nstop = 7.943282347242815e-9\npoints = 20\n",
    )?;
    let out = cmd_toeplitz(&cfg).map_err(err)?;
    let rows = out.table.rows.len();
    let ok_col = out.table.column("sandwich_ok").unwrap();
    let held = out
        .table
        .rows
        .iter()
        .filter(|r| r[ok_col] == Cell::Bool(true))
        .count();
    let detail = format!("{held}/{rows} thresholds ordered");
    match out.violation {
        None if rows == 20 && held == 20 => Ok(detail),
        None => Err(detail),
        Some(v) => Err(format!("{detail}: {v}")),
    }
}

fn trace_identity() -> Verdict {
    let field = MagneticField::cosine_pair(2.0, [1.0, 0.0], 0.5).map_err(err)?;
    let basis = ZeroModeBasis::new(field, 64).map_err(err)?;
    let profile =
        PerturbationProfile::inferred(gaussian(), Longitudinal::boxcar(1.0).map_err(err)?)
            .map_err(err)?;
    let reduced = effective_spectrum(&basis, &profile).map_err(err)?.trace();
    let mut worst: f64 = 0.0;
    for e in [1e-2, 1e-4, 1e-6] {
        let full = block_spectrum(&basis, &profile, e).map_err(err)?.trace;
        worst = worst.max((full - reduced).abs() / reduced);
    }
    let detail = format!("max relative gap {worst:.2e}");
    if worst <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let a = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

fn clear_of(eigs: &[f64], s: f64) -> bool {
    eigs.iter().all(|e| (e - s).abs() > 1e-9)
}

/// `n₊(s1 + s2; A + B) ≤ n₊(s1; A) + n₊(s2; B)`; returns the failure count.
fn weyl_trials(trials: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut done = 0;
    while done < trials {
        let n = rng.random_range(2..=8);
        let a = random_hermitian(&mut rng, n);
        let b = random_hermitian(&mut rng, n);
        let (ea, eb) = (hermitian_eigenvalues(&a), hermitian_eigenvalues(&b));
        let es = hermitian_eigenvalues(&(&a + &b));
        let s1 = rng.random_range(0.01..2.0);
        let s2 = rng.random_range(0.01..2.0);
        if !(clear_of(&ea, s1) && clear_of(&eb, s2) && clear_of(&es, s1 + s2)) {
            continue;
        }
        done += 1;
        let lhs = count_above(&es, s1 + s2, Sign::Plus);
        if lhs > count_above(&ea, s1, Sign::Plus) + count_above(&eb, s2, Sign::Plus) {
            failures += 1;
        }
    }
    failures
}

fn duality_and_weyl() -> Verdict {
    let duality = duality_trials(1000, 2024);
    let weyl = weyl_trials(1000, 2025);
    let detail = format!("duality failures {duality}/1000, Weyl failures {weyl}/1000");
    if duality == 0 && weyl == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const REDUCTION_CONFIG: &str = "[field]\nb0 = 2.0\n[basis]\nsize = 64\n[symbol]\nkind = \"gaussian\"\n[perturbation]\nlongitudinal = { kind = \"boxcar\", half_width = 1.0 }\n[sweep]\nstart = 0.01\nstop = 1e-6\npoints = 5\n";

fn reduction_gap() -> Verdict {
    let out = cmd_ssf(&config(REDUCTION_CONFIG)?).map_err(err)?;
    let full = numbers(&out.table, "above_ref");
    let tilde = numbers(&out.table, "tilde");
    let gaps: Vec<f64> = full
        .iter()
        .zip(&tilde)
        .map(|(f, t)| (f - t).abs() / t.abs())
        .collect();
    // eventually decreasing: strictly decreasing from the last rise onwards, over at least three energies
    let tail_start = gaps
        .windows(2)
        .rposition(|w| w[1] >= w[0])
        .map_or(0, |i| i + 1);
    let decreasing = gaps.len() - tail_start >= 3;
    let last = gaps[gaps.len() - 1];
    let detail = format!(
        "gaps {}",
        gaps.iter()
            .map(|g| format!("{g:.2e}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    if decreasing && last < 0.02 && out.violation.is_none() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Trend check shared by both decay classes.
fn levinson_trend(text: &str) -> Result<(bool, String), String> {
    let out = cmd_levinson(&config(text)?).map_err(err)?;
    let predicted = out.report.summary["predicted"].as_f64().unwrap();
    let ratios = numbers(&out.table, "ratio");
    let denominators = numbers(&out.table, "denominator");
    let defined: Vec<(f64, f64)> = ratios
        .iter()
        .zip(&denominators)
        .filter(|(r, _)| r.is_finite())
        .map(|(r, d)| (*r, *d))
        .collect();
    let distances: Vec<f64> = defined.iter().map(|(r, _)| (r - predicted).abs()).collect();
    let monotone = distances.windows(2).all(|w| w[1] < w[0]);
    let landing = defined.iter().rev().find(|(_, d)| *d >= 10.0);
    let landed = landing.is_some_and(|(r, _)| (r - predicted).abs() <= 0.25 * predicted);
    let detail = format!(
        "target {predicted:.5}, ratios {}",
        defined
            .iter()
            .map(|(r, _)| format!("{r:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok((monotone && landed && !defined.is_empty(), detail))
}

fn levinson() -> Verdict {
    let start = Instant::now();
    let sweep = "[sweep]\nstart = 0.1\nstop = 1e-4\npoints = 7\n";
    let power = format!(
        "[field]\nb0 = 10.0\n[basis]\nsize = 192\n[symbol]\nkind = \"power\"\nalpha = 4.0\n[perturbation]\nlongitudinal = {{ kind = \"gaussian\", sigma = 1.0 }}\n{sweep}"
    );
    let compact = format!(
        "[field]\nb0 = 10.0\n[basis]\nsize = 192\n[symbol]\nkind = \"disc\"\nradius = 3.0\n[perturbation]\nlongitudinal = {{ kind = \"boxcar\", half_width = 0.5 }}\n{sweep}"
    );
    let (p_ok, p_detail) = levinson_trend(&power)?;
    let (c_ok, c_detail) = levinson_trend(&compact)?;
    let detail = format!("power: {p_detail}; compact: {c_detail}");
    if p_ok && c_ok {
        within(start.elapsed(), Duration::from_secs(600), detail)
    } else {
        Err(detail)
    }
}

fn ids_probes() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let mut mismatches = 0;
    let mut probes = 0;
    while probes < 50 {
        let b0 = rng.random_range(1..=12) as f64 / rng.random_range(1..=5) as f64;
        let e = rng.random_range(-40..=400) as f64 / rng.random_range(1..=9) as f64;
        if e > 0.0 && (e / (2.0 * b0)).fract() == 0.0 {
            continue;
        }
        probes += 1;
        let mut terms = 0u32;
        let mut q = 0u32;
        while e - 2.0 * b0 * q as f64 > 0.0 {
            terms += 1;
            q += 1;
        }
        let oracle = b0 / (2.0 * PI) * terms as f64;
        let v = ids_constant_field(e, b0).map_err(err)?;
        if v.value != oracle || v.on_landau_level {
            mismatches += 1;
        }
    }
    let detail = format!("{mismatches} mismatches over {probes} probes");
    if mismatches == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Verdict {
    let cfg = config(REDUCTION_CONFIG)?;
    let first = cmd_ssf(&cfg).map_err(err)?.table.to_csv();
    let second = cmd_ssf(&cfg).map_err(err)?.table.to_csv();
    let echoed = config(&cfg.canonical())?;
    let third = cmd_ssf(&echoed).map_err(err)?.table.to_csv();
    let detail = format!("{} bytes", first.len());
    if first == second && first == third {
        Ok(detail)
    } else {
        Err(format!("{detail}: outputs differ"))
    }
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("constant-field kernel", constant_field_kernel),
        ("Gaussian Toeplitz oracle", gaussian_oracle),
        ("kernel bounds, cosine background", kernel_bounds_cosine),
        ("counting vs Phi_1", counting_vs_phi),
        ("counting vs Psi_4", counting_vs_psi),
        ("sandwich inequality", sandwich),
        ("trace identity", trace_identity),
        ("duality and Weyl", duality_and_weyl),
        ("reduced-trace gap", reduction_gap),
        ("Levinson trend", levinson),
        ("constant-field IDS", ids_probes),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
