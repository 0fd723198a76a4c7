//! Orthonormal basis of the zero modes `Ker a(b)`.
//!
//! At constant field the zero modes are spanned by
//! `φ_k(x) = √(b0/(2π k!)) (b0/2)^{k/2} (x₁+ix₂)^k e^{−b0|x|²/4}`.
//! For `b = b0 + b̃` the functions `e^{−φ̃} φ_k` span the kernel; whitening by
//! `ρ = γ^{−1/2}`, with `γ_{jk} = ∫ e^{−2φ̃} φ_j φ̄_k`, makes them orthonormal:
//! `ψ_j = e^{−φ̃} Σ_k ρ_{jk} φ_k`.
//!
//! All plane integrals use polar coordinates with `t = b0 r²/2`, so that
//! `φ_j φ̄_k dx = (1/2π) t^{(j+k)/2} e^{−t} / √(j! k!) · e^{i(j−k)θ} dt dθ`.
//! The angular integral is an FFT over a uniform ring, the radial one a
//! Gauss rule for `e^{−t} dt`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::field::MagneticField;
use crate::linalg::{inverse_sqrt, symmetrize, whitening_residual, CMatrix};
use crate::quadrature::{gauss_laguerre, ln_factorials, PanelRule, RadialNode};

/// Maximum entrywise change tolerated when the quadrature is doubled.
pub const DOUBLED_NODE_DRIFT: f64 = 1e-9;

/// Radial part of a [`QuadratureRule`].
#[derive(Debug, Clone, PartialEq)]
pub enum RadialRule {
    /// Gauss–Laguerre with `count` nodes on `(0, ∞)`.
    Laguerre { count: usize },
    /// Gauss–Legendre panels of width `panel_width` covering `(0, end)`,
    /// for integrands supported in `t < end`.
    Panels {
        end: f64,
        panel_width: f64,
        order: usize,
    },
}

impl RadialRule {
    fn nodes(&self) -> Result<Arc<Vec<RadialNode>>> {
        match *self {
            RadialRule::Laguerre { count } => gauss_laguerre(count),
            RadialRule::Panels {
                end,
                panel_width,
                order,
            } => {
                if !(end > 0.0 && panel_width > 0.0) || order == 0 {
                    return Err(invalid(
                        "radial panel rule needs positive extent, width and order",
                    ));
                }
                let pieces = (end / panel_width).ceil().max(1.0) as usize;
                let breaks: Vec<f64> = (0..=pieces)
                    .map(|i| end * i as f64 / pieces as f64)
                    .collect();
                let rule = PanelRule::new(&breaks, order);
                Ok(Arc::new(
                    rule.nodes
                        .iter()
                        .zip(&rule.weights)
                        .map(|(&t, &w)| RadialNode {
                            t,
                            ln_weight: w.ln() - t,
                        })
                        .collect(),
                ))
            }
        }
    }

    fn refined(&self) -> Self {
        match *self {
            RadialRule::Laguerre { count } => RadialRule::Laguerre { count: 2 * count },
            RadialRule::Panels {
                end,
                panel_width,
                order,
            } => RadialRule::Panels {
                end,
                panel_width: 0.5 * panel_width,
                order,
            },
        }
    }
}

/// Polar product rule: radial nodes for `e^{−t} dt`, `t = b0 r²/2`, times a
/// uniform angular grid on `[0, 2π)`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    radial_rule: RadialRule,
    radial: Arc<Vec<RadialNode>>,
    angular_count: usize,
}

impl PartialEq for QuadratureRule {
    fn eq(&self, other: &Self) -> bool {
        self.radial_rule == other.radial_rule && self.angular_count == other.angular_count
    }
}

impl QuadratureRule {
    pub fn new(radial_rule: RadialRule, angular_count: usize) -> Result<Self> {
        if angular_count < 4 {
            return Err(invalid(format!(
                "angular count must be at least 4, got {angular_count}"
            )));
        }
        let radial = radial_rule.nodes()?;
        if radial.is_empty() {
            return Err(invalid("radial rule has no nodes"));
        }
        Ok(Self {
            radial_rule,
            radial,
            angular_count,
        })
    }

    pub fn laguerre(radial_count: usize, angular_count: usize) -> Result<Self> {
        Self::new(
            RadialRule::Laguerre {
                count: radial_count,
            },
            angular_count,
        )
    }

    /// Default rule for a basis of `size` modes: `2K + 32` Laguerre nodes and
    /// `max(4K + 16, ⌈8 |λ|_max R⌉)` angles, `R` the radius holding the basis mass.
    pub fn for_basis(field: &MagneticField, size: usize) -> Result<Self> {
        let angular = (4 * size + 16)
            .max((8.0 * field.max_frequency() * mass_radius(field.b0(), size)).ceil() as usize);
        Self::laguerre(2 * size + 32, angular)
    }

    /// Same angular grid, radial panels on `t < b0 ρ²/2` for a symbol supported in `|x| ≤ ρ`.
    pub fn for_support(&self, b0: f64, support_radius: f64) -> Result<Self> {
        let end = 0.5 * b0 * support_radius * support_radius;
        Self::new(
            RadialRule::Panels {
                end,
                panel_width: 1.0,
                order: 24,
            },
            self.angular_count,
        )
    }

    /// Rule with doubled radial and angular resolution.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.radial_rule.refined(), 2 * self.angular_count)
    }

    pub fn radial_rule(&self) -> &RadialRule {
        &self.radial_rule
    }

    pub fn radial_nodes(&self) -> &[RadialNode] {
        &self.radial
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    /// `∫_{ℝ²} f dx` on this rule, for `f` decaying fast enough that the
    /// rescaled integrand `e^{t} f` is resolved.
    pub fn integrate_plane(&self, b0: f64, f: impl Fn([f64; 2]) -> f64 + Sync) -> f64 {
        let n = self.angular_count;
        let ring: Vec<f64> = self
            .radial
            .par_iter()
            .map(|node| {
                let r = (2.0 * node.t / b0).sqrt();
                let scale = (node.ln_weight + node.t).exp();
                if scale == 0.0 {
                    return 0.0;
                }
                let s: f64 = (0..n)
                    .map(|l| {
                        let th = 2.0 * PI * l as f64 / n as f64;
                        f([r * th.cos(), r * th.sin()])
                    })
                    .sum();
                scale * s
            })
            .collect();
        2.0 * PI / (b0 * n as f64) * ring.iter().sum::<f64>()
    }
}

/// Radius beyond which modes `k < size` carry negligible mass.
pub(crate) fn mass_radius(b0: f64, size: usize) -> f64 {
    let k = size as f64;
    (2.0 * (k + 6.0 * k.sqrt() + 10.0) / b0).sqrt()
}

/// `R(K) = √(2(K − 6√K)/b0)`, clamped at 0: the radius inside which the
/// truncated kernel is trusted.
pub fn evaluation_radius(b0: f64, size: usize) -> f64 {
    let k = size as f64;
    let arg = 2.0 * (k - 6.0 * k.sqrt()) / b0;
    if arg > 0.0 {
        arg.sqrt()
    } else {
        0.0
    }
}

/// Constant-field zero mode `φ_k(x)`, evaluated through its log-magnitude.
pub fn phi_k(b0: f64, k: usize, x: [f64; 2]) -> Complex64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 == 0.0 {
        return if k == 0 {
            Complex64::new((b0 / (2.0 * PI)).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    let ln_fact = if k < 2 {
        0.0
    } else {
        (2..=k).map(|i| (i as f64).ln()).sum()
    };
    let kf = k as f64;
    let ln_mag =
        0.5 * ((b0 / (2.0 * PI)).ln() - ln_fact) + 0.5 * kf * (0.5 * b0).ln() + 0.5 * kf * r2.ln()
            - 0.25 * b0 * r2;
    let theta = x[1].atan2(x[0]);
    Complex64::from_polar(ln_mag.exp(), kf * theta)
}

/// `(φ_0(x), …, φ_{size−1}(x))`.
pub fn phi_vector(b0: f64, size: usize, x: [f64; 2]) -> DVector<Complex64> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let mut out = DVector::from_element(size, Complex64::new(0.0, 0.0));
    if size == 0 {
        return out;
    }
    if r2 == 0.0 {
        out[0] = Complex64::new((b0 / (2.0 * PI)).sqrt(), 0.0);
        return out;
    }
    let theta = x[1].atan2(x[0]);
    // ln|φ_k| = ln|φ_0| + (k/2) ln(b0 r²/2) − (1/2) ln k!
    let ln0 = 0.5 * (b0 / (2.0 * PI)).ln() - 0.25 * b0 * r2;
    let ln_t = (0.5 * b0 * r2).ln();
    let mut ln_mag = ln0;
    for k in 0..size {
        if k > 0 {
            ln_mag += 0.5 * ln_t - 0.5 * (k as f64).ln();
        }
        out[k] = Complex64::from_polar(ln_mag.exp(), k as f64 * theta);
    }
    out
}

/// `Γ_f[j,k] = ∫ f φ_j φ̄_k dx` for `j, k < size`, for a real weight `f`.
///
/// Rows are assembled in parallel; every entry is summed over radial nodes in
/// a fixed order, so the result does not depend on the thread count.
pub fn moment_matrix(
    b0: f64,
    size: usize,
    rule: &QuadratureRule,
    weight: &(dyn Fn([f64; 2]) -> f64 + Sync),
) -> CMatrix {
    if size == 0 {
        return CMatrix::zeros(0, 0);
    }
    let n_ang = rule.angular_count;
    let ln_fact = ln_factorials(size);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_ang);
    let bandwidth = size - 1;
    let cos_sin: Vec<(f64, f64)> = (0..n_ang)
        .map(|l| {
            let th = 2.0 * PI * l as f64 / n_ang as f64;
            (th.cos(), th.sin())
        })
        .collect();

    // per radial node: amplitudes b_k = √(w t^k / k!) and angular coefficients
    // c(m) = (1/N) Σ_l f(r, θ_l) e^{−imθ_l}, m ∈ [−(K−1), K−1]
    struct Ring {
        amp: Vec<f64>,
        coef: Vec<Complex64>,
    }
    let rings: Vec<Ring> = rule
        .radial
        .par_iter()
        .filter_map(|node| {
            let ln_t = node.t.ln();
            let amp: Vec<f64> = (0..size)
                .map(|k| (0.5 * (node.ln_weight + k as f64 * ln_t - ln_fact[k])).exp())
                .collect();
            if amp.iter().all(|&a| a == 0.0) {
                return None;
            }
            let r = (2.0 * node.t / b0).sqrt();
            let mut buf: Vec<Complex64> = cos_sin
                .iter()
                .map(|&(c, s)| Complex64::new(weight([r * c, r * s]), 0.0))
                .collect();
            fft.process(&mut buf);
            let inv = 1.0 / n_ang as f64;
            let coef = (0..=2 * bandwidth)
                .map(|idx| {
                    let m = idx as isize - bandwidth as isize;
                    buf[m.rem_euclid(n_ang as isize) as usize] * inv
                })
                .collect();
            Some(Ring { amp, coef })
        })
        .collect();

    let rows: Vec<Vec<Complex64>> = (0..size)
        .into_par_iter()
        .map(|j| {
            let mut acc = vec![Complex64::new(0.0, 0.0); size - j];
            for ring in &rings {
                let bj = ring.amp[j];
                if bj == 0.0 {
                    continue;
                }
                for k in j..size {
                    // e^{i(j−k)θ} picks out c(k − j)
                    acc[k - j] += ring.coef[k - j + bandwidth] * (bj * ring.amp[k]);
                }
            }
            acc
        })
        .collect();

    let mut out = CMatrix::zeros(size, size);
    for (j, row) in rows.into_iter().enumerate() {
        for (offset, v) in row.into_iter().enumerate() {
            let k = j + offset;
            out[(j, k)] = v;
            out[(k, j)] = v.conj();
        }
    }
    for j in 0..size {
        out[(j, j)].im = 0.0;
    }
    out
}

/// Moment matrix together with the entrywise drift against the doubled rule.
pub(crate) fn checked_moment_matrix(
    b0: f64,
    size: usize,
    rule: &QuadratureRule,
    weight: &(dyn Fn([f64; 2]) -> f64 + Sync),
    context: &str,
) -> Result<(CMatrix, f64)> {
    let base = moment_matrix(b0, size, rule, weight);
    let fine = moment_matrix(b0, size, &rule.refined()?, weight);
    let drift = (&base - &fine).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(drift <= DOUBLED_NODE_DRIFT) {
        return Err(Error::ConvergenceFailure {
            context: context.to_string(),
            drift,
            threshold: DOUBLED_NODE_DRIFT,
        });
    }
    Ok((base, drift))
}

/// `γ_{jk} = ∫ e^{−2φ̃} φ_j φ̄_k dx`, `j, k < size`, checked against the doubled rule.
pub fn gram_matrix(field: &MagneticField, size: usize, rule: &QuadratureRule) -> Result<CMatrix> {
    gram_with_drift(field, size, rule).map(|(g, _)| g)
}

fn gram_with_drift(
    field: &MagneticField,
    size: usize,
    rule: &QuadratureRule,
) -> Result<(CMatrix, f64)> {
    if size == 0 {
        return Err(invalid("basis size must be positive"));
    }
    let weight = |x: [f64; 2]| (-2.0 * field.phitilde(x)).exp();
    let (mut g, drift) = checked_moment_matrix(field.b0(), size, rule, &weight, "Gram matrix")?;
    symmetrize(&mut g);
    Ok((g, drift))
}

/// `ρ = γ^{−1/2}`.
pub fn whiten(gram: &CMatrix) -> Result<CMatrix> {
    inverse_sqrt(gram)
}

/// Truncated orthonormal basis `ψ_0, …, ψ_{K−1}` of the zero modes.
#[derive(Debug, Clone)]
pub struct ZeroModeBasis {
    field: MagneticField,
    size: usize,
    gram: CMatrix,
    whiten: CMatrix,
    rule: QuadratureRule,
    gram_drift: f64,
}

impl ZeroModeBasis {
    pub fn new(field: MagneticField, size: usize) -> Result<Self> {
        let rule = QuadratureRule::for_basis(&field, size)?;
        Self::with_rule(field, size, rule)
    }

    pub fn with_rule(field: MagneticField, size: usize, rule: QuadratureRule) -> Result<Self> {
        let (gram, gram_drift) = gram_with_drift(&field, size, &rule)?;
        let whiten = whiten(&gram)?;
        Ok(Self {
            field,
            size,
            gram,
            whiten,
            rule,
            gram_drift,
        })
    }

    pub fn field(&self) -> &MagneticField {
        &self.field
    }

    pub fn b0(&self) -> f64 {
        self.field.b0()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn whitening(&self) -> &CMatrix {
        &self.whiten
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Largest entry change of the Gram matrix under the doubled rule.
    pub fn gram_drift(&self) -> f64 {
        self.gram_drift
    }

    /// Relative Frobenius residual of `ρ γ ρ − I`.
    pub fn whitening_residual(&self) -> f64 {
        whitening_residual(&self.gram, &self.whiten)
    }

    pub fn evaluation_radius(&self) -> f64 {
        evaluation_radius(self.b0(), self.size)
    }

    pub fn psi(&self, j: usize, x: [f64; 2]) -> Result<Complex64> {
        if j >= self.size {
            return Err(invalid(format!(
                "mode index {j} out of range for basis of size {}",
                self.size
            )));
        }
        let phi = phi_vector(self.b0(), self.size, x);
        let s: Complex64 = (0..self.size).map(|k| self.whiten[(j, k)] * phi[k]).sum();
        Ok(s * (-self.field.phitilde(x)).exp())
    }

    /// All `ψ_j(x)`, `j < size`.
    pub fn psi_vector(&self, x: [f64; 2]) -> DVector<Complex64> {
        let phi = phi_vector(self.b0(), self.size, x);
        (&self.whiten * phi) * Complex64::new((-self.field.phitilde(x)).exp(), 0.0)
    }

    /// Diagonal `𝒫_b(x, x) = e^{−2φ̃(x)} ‖ρ φ(x)‖²` of the projection kernel,
    /// truncated to `size` modes. Only trusted within [`Self::evaluation_radius`].
    pub fn kernel_diag(&self, x: [f64; 2]) -> Result<f64> {
        let radius = x[0].hypot(x[1]);
        let limit = self.evaluation_radius();
        if radius > limit {
            return Err(Error::EvaluationRadiusExceeded { radius, limit });
        }
        let phi = phi_vector(self.b0(), self.size, x);
        let v = &self.whiten * phi;
        Ok((-2.0 * self.field.phitilde(x)).exp() * v.norm_squared())
    }
}

/// Two-sided bound `(b0/2π) e^{∓2 osc}` on the kernel diagonal.
pub fn kernel_bounds(b0: f64, osc: f64) -> (f64, f64) {
    let base = b0 / (2.0 * PI);
    (base * (-2.0 * osc).exp(), base * (2.0 * osc).exp())
}

/// Kernel diagonal at `size` versus `⌈1.25 size⌉` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationReport {
    pub size: usize,
    pub enlarged_size: usize,
    pub max_relative_change: f64,
    pub stable: bool,
}

pub const TRUNCATION_TOLERANCE: f64 = 1e-6;

pub fn truncation_stability(
    basis: &ZeroModeBasis,
    points: &[[f64; 2]],
) -> Result<TruncationReport> {
    let enlarged_size = (basis.size() as f64 * 1.25).ceil() as usize;
    let larger = ZeroModeBasis::new(basis.field().clone(), enlarged_size)?;
    let mut worst: f64 = 0.0;
    for &x in points {
        let a = basis.kernel_diag(x)?;
        let b = larger.kernel_diag(x)?;
        worst = worst.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
    }
    Ok(TruncationReport {
        size: basis.size(),
        enlarged_size,
        max_relative_change: worst,
        stable: worst < TRUNCATION_TOLERANCE,
    })
}
