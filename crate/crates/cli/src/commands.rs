//! One function per subcommand. Each returns the table, the run report and
//! any invariant violation; writing files is left to the caller.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use pauli_ssf::field::MagneticField;
use pauli_ssf::linalg::{hermitian_eigenvalues, CMatrix};
use pauli_ssf::ssf::{
    arctan_trace, block_spectrum, effective_spectrum, ids_constant_field, levinson_ratio,
    xi_above_from, xi_below, xi_semiclassical, EPSILON_REFERENCE,
};
use pauli_ssf::toeplitz::{
    comparator_phi, comparator_psi, count_above, sandwich_counts, toeplitz_matrix, Sign, SymbolU,
};
use pauli_ssf::zeromodes::{kernel_bounds, truncation_stability, ZeroModeBasis};
use pauli_ssf::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::{Cell, RunReport, Table};
use crate::CliError;

/// Largest tolerated `|Tr p𝒲_E p − Tr pWp| / Tr pWp`.
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const GRAM_DRIFT_TOLERANCE: f64 = 1e-9;
pub const WHITENING_TOLERANCE: f64 = 1e-10;

#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    /// Further tables written as `<stem>.<suffix>.csv`.
    pub extra: Vec<(String, Table)>,
    pub report: RunReport,
    /// Printed to stdout after the files are written.
    pub message: Option<String>,
    pub violation: Option<CliError>,
}

impl Outcome {
    fn new(table: Table, report: RunReport) -> Self {
        Self {
            table,
            extra: Vec::new(),
            report,
            message: None,
            violation: None,
        }
    }
}

fn build_basis(
    config: &RunConfig,
    field: MagneticField,
    report: &mut RunReport,
) -> Result<ZeroModeBasis, CliError> {
    let basis = report.timed("basis", || config.basis(field))?;
    report.residual("gram_drift", basis.gram_drift());
    report.residual("whitening_residual", basis.whitening_residual());
    Ok(basis)
}

/// Grid nodes inside the disc of radius `r`.
pub fn kernel_points(points: usize, r: f64) -> Vec<[f64; 2]> {
    match points {
        0 => Vec::new(),
        1 => vec![[0.0, 0.0]],
        n => {
            let step = 2.0 * r / (n - 1) as f64;
            let mut out = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let x = [-r + step * i as f64, -r + step * j as f64];
                    if x[0].hypot(x[1]) <= r {
                        out.push(x);
                    }
                }
            }
            out
        }
    }
}

pub fn cmd_kernel(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut report = RunReport::new("kernel", config);
    let field = config.magnetic_field()?;
    let osc = config.oscillation(&field)?.osc;
    let b0 = field.b0();
    let basis = build_basis(config, field, &mut report)?;
    let radius = config.kernel.radius.unwrap_or(basis.evaluation_radius());
    let points = kernel_points(config.kernel.points, radius);
    let (lo, hi) = kernel_bounds(b0, osc);
    let tol = 1e-4 * b0 / (2.0 * PI);
    let values = report.timed("kernel", || {
        points
            .par_iter()
            .map(|&x| basis.kernel_diag(x))
            .collect::<Result<Vec<f64>, Error>>()
    })?;
    let mut table = Table::new(vec!["x1", "x2", "kernel", "lower", "upper", "within"]);
    let mut violations = 0;
    for (x, v) in points.iter().zip(&values) {
        let within = *v >= lo - tol && *v <= hi + tol;
        violations += usize::from(!within);
        table.push(vec![
            x[0].into(),
            x[1].into(),
            (*v).into(),
            lo.into(),
            hi.into(),
            within.into(),
        ]);
    }
    report.residual("osc", osc);
    report.flag("points", points.len());
    report.flag("bound_violations", violations);
    let mut out = Outcome::new(table, report);
    if violations > 0 {
        out.violation = Some(CliError::Invariant(format!(
            "{violations} kernel values outside [{lo:e}, {hi:e}] beyond tolerance {tol:e}"
        )));
    }
    Ok(out)
}

fn comparator(symbol: &SymbolU, s: f64, b0: f64) -> f64 {
    let value = match symbol {
        SymbolU::Gaussian { beta, eta, .. } => comparator_phi(s, *beta, *eta, b0),
        SymbolU::Disc { .. } => comparator_phi(s, f64::INFINITY, 1.0, b0),
        SymbolU::Power {
            alpha,
            profile,
            scale,
        } => comparator_psi(s / scale, *alpha, profile, b0),
        SymbolU::Tabulated(_) => return f64::NAN,
    };
    value.unwrap_or(f64::NAN)
}

pub fn cmd_toeplitz(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut report = RunReport::new("toeplitz", config);
    let field = config.magnetic_field()?;
    let b0 = field.b0();
    let symbol = config.transverse()?;
    let constant_field = field.is_constant();
    let osc = config.oscillation(&field)?.osc;
    let basis = build_basis(config, field, &mut report)?;
    let t = report.timed("toeplitz", || toeplitz_matrix(&basis, &symbol))?;
    report.residual("toeplitz_residual", t.residual());
    let reference = if constant_field {
        None
    } else {
        let flat = config.basis(MagneticField::constant(b0)?)?;
        Some(report.timed("reference", || toeplitz_matrix(&flat, &symbol))?)
    };
    let mut table = Table::new(vec![
        "s",
        "count",
        "comparator",
        "ratio",
        "lower",
        "upper",
        "sandwich_ok",
    ]);
    let mut broken = 0;
    for s in config.sweep.values() {
        let count = t.counting(s, Sign::Plus);
        let comp = comparator(&symbol, s, b0);
        let ratio = if comp > 0.0 {
            count as f64 / comp
        } else {
            f64::NAN
        };
        let (lower, upper, ok) = match &reference {
            Some(r) => {
                let c = sandwich_counts(&t, r, s, osc);
                (c.lower, c.upper, c.ok)
            }
            None => (count, count, true),
        };
        broken += usize::from(!ok);
        table.push(vec![
            s.into(),
            count.into(),
            comp.into(),
            ratio.into(),
            lower.into(),
            upper.into(),
            ok.into(),
        ]);
    }
    let mut eigs = Table::new(vec!["index", "eigenvalue"]);
    for (k, e) in t.eigenvalues().iter().enumerate() {
        eigs.push(vec![k.into(), (*e).into()]);
    }
    report.residual("osc", osc);
    report.flag("sandwich_violations", broken);
    let mut out = Outcome::new(table, report);
    out.extra.push(("eigenvalues".into(), eigs));
    if broken > 0 {
        out.violation = Some(CliError::Invariant(format!(
            "sandwich inequality broken at {broken} thresholds"
        )));
    }
    Ok(out)
}

fn midpoint((a, b): (f64, f64)) -> f64 {
    0.5 * (a + b)
}

pub fn cmd_ssf(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut report = RunReport::new("ssf", config);
    let field = config.magnetic_field()?;
    let b0 = field.b0();
    let profile = config.profile()?;
    let sign: Sign = config.sign.into();
    let eps = config.epsilon;
    let basis = build_basis(config, field, &mut report)?;
    let spec = report.timed("effective_spectrum", || {
        effective_spectrum(&basis, &profile)
    })?;
    report.residual("toeplitz_residual", spec.residual());
    let energies = config.sweep.values();
    let rows = report.timed("sweep", || {
        energies
            .par_iter()
            .map(|&e| -> Result<(Vec<Cell>, f64), CliError> {
                let block = block_spectrum(&basis, &profile, e)?;
                let (below, below_ref) = match sign {
                    Sign::Minus => (
                        xi_below(&spec, e, eps)?,
                        midpoint(xi_below(&spec, e, EPSILON_REFERENCE)?),
                    ),
                    Sign::Plus => ((0.0, 0.0), 0.0),
                };
                let above = xi_above_from(&block.nu, e, eps, sign)?;
                let above_ref = midpoint(xi_above_from(&block.nu, e, EPSILON_REFERENCE, sign)?);
                let tilde = sign.factor() * arctan_trace(spec.mu(), 2.0 * e.sqrt());
                let semi = sign.factor() * xi_semiclassical(&profile, e, b0)?;
                let gap =
                    (block.trace - spec.trace()).abs() / spec.trace().abs().max(f64::MIN_POSITIVE);
                let row = vec![
                    e.into(),
                    below.0.into(),
                    below.1.into(),
                    above.0.into(),
                    above.1.into(),
                    tilde.into(),
                    semi.into(),
                    below_ref.into(),
                    above_ref.into(),
                ];
                Ok((
                    row,
                    if spec.trace() == 0.0 {
                        block.trace.abs()
                    } else {
                        gap
                    },
                ))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut table = Table::new(vec![
        "E",
        "below_lo",
        "below_hi",
        "above_lo",
        "above_hi",
        "tilde",
        "semiclassical",
        "below_ref",
        "above_ref",
    ]);
    let mut worst: f64 = 0.0;
    for (row, gap) in rows {
        worst = worst.max(gap);
        table.push(row);
    }
    report.residual("trace_identity", worst);
    report.summary("epsilon_reference", EPSILON_REFERENCE);
    let mut out = Outcome::new(table, report);
    if worst > TRACE_TOLERANCE {
        out.violation = Some(CliError::Invariant(format!(
            "trace identity off by {worst:e} (relative), above {TRACE_TOLERANCE:e}"
        )));
    }
    Ok(out)
}

pub fn cmd_levinson(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut report = RunReport::new("levinson", config);
    let field = config.magnetic_field()?;
    let profile = config.profile()?;
    let basis = build_basis(config, field, &mut report)?;
    let energies = config.sweep.values();
    let lev = report.timed("levinson", || {
        levinson_ratio(&basis, &profile, &energies, EPSILON_REFERENCE)
    })?;
    let mut table = Table::new(vec![
        "E",
        "numerator",
        "tail",
        "denominator",
        "ratio",
        "raw_ratio",
        "reduced",
        "reduction_gap",
    ]);
    for r in &lev.rows {
        table.push(vec![
            r.energy.into(),
            r.numerator.into(),
            r.tail.into(),
            r.denominator.into(),
            r.ratio.into(),
            r.raw_ratio.into(),
            r.reduced.into(),
            r.reduction_gap.into(),
        ]);
    }
    let undefined = lev.rows.iter().filter(|r| r.ratio.is_none()).count();
    let last = lev.rows.iter().rev().find_map(|r| r.ratio);
    let gap = last.map(|l| (l - lev.predicted).abs() / lev.predicted);
    report.flag("undefined_rows", undefined);
    report.summary("predicted", lev.predicted);
    report.summary("last_ratio", last);
    report.summary("relative_gap", gap);
    let mut out = Outcome::new(table, report);
    let fmt = |v: Option<f64>| v.map_or("nan".to_string(), |v| format!("{v:.6}"));
    out.message = Some(format!(
        "predicted {:.6}, last ratio {}, relative gap {}",
        lev.predicted,
        fmt(last),
        fmt(gap)
    ));
    if undefined > 0 {
        log::warn!(
            "{undefined} energies have no eigenvalue above 2√E; their ratio is reported as nan"
        );
    }
    Ok(out)
}

pub fn cmd_ids(config: &RunConfig) -> Result<Outcome, CliError> {
    let report = RunReport::new("ids", config);
    let b0 = config.field.b0;
    let mut table = Table::new(vec!["E", "ids", "on_landau_level"]);
    for e in config.sweep.values() {
        let v = ids_constant_field(e, b0)?;
        table.push(vec![e.into(), v.value.into(), v.on_landau_level.into()]);
    }
    Ok(Outcome::new(table, report))
}

struct Check {
    name: &'static str,
    passed: bool,
    value: f64,
    threshold: f64,
    detail: String,
}

fn failed(name: &'static str, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed: false,
        value: f64::NAN,
        threshold: f64::NAN,
        detail: detail.into(),
    }
}

fn error_tag(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalid-argument",
        Error::ConvergenceFailure { .. } => "convergence-failure",
        Error::NearSingularGram { .. } => "near-singular-gram",
        Error::EvaluationRadiusExceeded { .. } => "evaluation-radius-exceeded",
        Error::SupportExceedsRadius { .. } => "support-exceeds-radius",
        Error::OutOfDomain { .. } => "out-of-domain",
    }
}

fn threshold_check(name: &'static str, value: f64, threshold: f64) -> Check {
    Check {
        name,
        passed: value <= threshold,
        value,
        threshold,
        detail: String::new(),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// `n₊(s; A*A) = n₊(s; AA*)` on random rectangular `A`; returns the number
/// of mismatches.
pub fn duality_trials(trials: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    for _ in 0..trials {
        let m = rng.random_range(1..=6);
        let n = rng.random_range(1..=6);
        let a = random_matrix(&mut rng, m, n);
        let left = hermitian_eigenvalues(&(a.adjoint() * &a));
        let right = hermitian_eigenvalues(&(&a * a.adjoint()));
        let top = left[0].max(right[0]);
        // thresholds at eigenvalues are ambiguous under rounding; step around them
        let s = loop {
            let s = rng.random_range(0.0..1.2 * top + 1e-3);
            if left
                .iter()
                .chain(&right)
                .all(|e| (e - s).abs() > 1e-9 * top.max(1.0))
            {
                break s;
            }
        };
        if count_above(&left, s, Sign::Plus) != count_above(&right, s, Sign::Plus) {
            mismatches += 1;
        }
    }
    mismatches
}

pub fn cmd_selfcheck(config: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let mut report = RunReport::new("selfcheck", config);
    let mut checks = Vec::new();
    let field = config.magnetic_field()?;
    let profile = config.profile()?;
    let built = report.timed("basis", || config.basis(field));
    match built {
        Err(CliError::Numeric(e)) => checks.push(failed("basis", error_tag(&e))),
        Err(e) => return Err(e),
        Ok(basis) => {
            checks.push(threshold_check(
                "doubled_node",
                basis.gram_drift(),
                GRAM_DRIFT_TOLERANCE,
            ));
            checks.push(threshold_check(
                "whitening",
                basis.whitening_residual(),
                WHITENING_TOLERANCE,
            ));
            let points = kernel_points(config.kernel.points.min(9), basis.evaluation_radius());
            match report.timed("truncation", || truncation_stability(&basis, &points)) {
                Ok(t) => checks.push(Check {
                    name: "truncation",
                    passed: t.stable,
                    value: t.max_relative_change,
                    threshold: pauli_ssf::zeromodes::TRUNCATION_TOLERANCE,
                    detail: format!("K = {} vs {}", t.size, t.enlarged_size),
                }),
                Err(e) => checks.push(failed("truncation", error_tag(&e))),
            }
            let e = config.selfcheck.energy;
            let traces = report.timed("trace", || -> Result<(f64, f64), Error> {
                let spec = effective_spectrum(&basis, &profile)?;
                let block = block_spectrum(&basis, &profile, e)?;
                Ok((spec.trace(), block.trace))
            });
            match traces {
                Ok((a, b)) => {
                    let rel = (a - b).abs() / a.abs().max(f64::MIN_POSITIVE);
                    checks.push(threshold_check(
                        "trace_equality",
                        if a == 0.0 { b.abs() } else { rel },
                        TRACE_TOLERANCE,
                    ));
                }
                Err(e) => checks.push(failed("trace_equality", error_tag(&e))),
            }
        }
    }
    let trials = config.selfcheck.trials;
    let mismatches = report.timed("duality", || duality_trials(trials, seed));
    checks.push(Check {
        name: "duality",
        passed: mismatches == 0,
        value: mismatches as f64,
        threshold: 0.0,
        detail: format!("{trials} trials, seed {seed}"),
    });
    let mut table = Table::new(vec!["check", "passed", "value", "threshold", "detail"]);
    for c in &checks {
        report.flag(c.name, c.passed);
        table.push(vec![
            Cell::Text(c.name.into()),
            c.passed.into(),
            c.value.into(),
            c.threshold.into(),
            Cell::Text(c.detail.replace(',', ";")),
        ]);
    }
    let failing: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| {
            if c.detail.is_empty() {
                c.name.to_string()
            } else {
                format!("{}: {}", c.name, c.detail)
            }
        })
        .collect();
    let mut out = Outcome::new(table, report);
    if failing.is_empty() {
        out.message = Some(format!("selfcheck passed ({} checks)", checks.len()));
    } else {
        out.violation = Some(CliError::Convergence(format!(
            "selfcheck failed: {}",
            failing.join(", ")
        )));
    }
    Ok(out)
}
