//! Berezin–Toeplitz compressions `p(b) U p(b)` in the zero-mode basis.
//!
//! With `ψ_j = e^{−φ̃} Σ_l ρ_{jl} φ_l` the entries `∫ U ψ̄_j ψ_k` equal
//! `(ρ Γ ρ)ᵀ` where `Γ` is the moment matrix of the weight `U e^{−2φ̃}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigenvalues, symmetrize, CMatrix};
use crate::quadrature::ln_factorials;
use crate::zeromodes::{checked_moment_matrix, QuadratureRule, RadialRule, ZeroModeBasis};

const ANGULAR_GRID: usize = 4096;

/// `u0(θ) = Σ_n c_n cos(nθ)` on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineSeries {
    coefficients: Vec<f64>,
}

impl CosineSeries {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(invalid("cosine series needs at least one coefficient"));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(invalid("cosine series coefficients must be finite"));
        }
        Ok(Self { coefficients })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            coefficients: vec![value],
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn is_constant(&self) -> bool {
        self.coefficients[1..].iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(n, c)| c * (n as f64 * theta).cos())
            .sum()
    }

    /// `Σ_n c_n ρ^n cos(nθ)`, the harmonic extension into the unit disc.
    pub fn eval_extended(&self, rho: f64, theta: f64) -> f64 {
        let mut pow = 1.0;
        let mut acc = 0.0;
        for (n, c) in self.coefficients.iter().enumerate() {
            acc += c * pow * (n as f64 * theta).cos();
            pow *= rho;
        }
        acc
    }

    fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..ANGULAR_GRID).map(move |l| self.eval(2.0 * PI * l as f64 / ANGULAR_GRID as f64))
    }

    pub fn grid_min(&self) -> f64 {
        self.grid().fold(f64::INFINITY, f64::min)
    }

    pub fn grid_max(&self) -> f64 {
        self.grid().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫_0^{2π} u0(θ)^p dθ`, negative values clipped to zero.
    pub fn integral_of_power(&self, p: f64) -> f64 {
        2.0 * PI / ANGULAR_GRID as f64 * self.grid().map(|u| u.max(0.0).powf(p)).sum::<f64>()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }
}

/// Caller-supplied symbol sampled only at quadrature nodes.
#[derive(Clone)]
pub struct TabulatedSymbol {
    sample: Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>,
    extent: f64,
    compact: bool,
}

impl fmt::Debug for TabulatedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TabulatedSymbol")
            .field("extent", &self.extent)
            .field("compact", &self.compact)
            .finish_non_exhaustive()
    }
}

/// Nonnegative multiplication symbol `U` on the plane.
#[derive(Debug, Clone)]
pub enum SymbolU {
    /// `scale ⟨x⟩^{−α} Σ c_n (r/⟨x⟩)^n cos(nθ)`, asymptotic to `scale u0(θ) |x|^{−α}`.
    Power {
        alpha: f64,
        profile: CosineSeries,
        scale: f64,
    },
    /// `amplitude · exp(−η |x|^{2β})`.
    Gaussian { beta: f64, eta: f64, amplitude: f64 },
    /// `height · 𝟙{|x| ≤ radius}`.
    Disc { radius: f64, height: f64 },
    /// Arbitrary samples; zero outside `|x| ≤ extent` when compact, and
    /// treated as negligible there otherwise.
    Tabulated(TabulatedSymbol),
}

impl SymbolU {
    pub fn power(alpha: f64, profile: CosineSeries, scale: f64) -> Result<Self> {
        let s = SymbolU::Power {
            alpha,
            profile,
            scale,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn gaussian(beta: f64, eta: f64, amplitude: f64) -> Result<Self> {
        let s = SymbolU::Gaussian {
            beta,
            eta,
            amplitude,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn disc(radius: f64, height: f64) -> Result<Self> {
        let s = SymbolU::Disc { radius, height };
        s.validate()?;
        Ok(s)
    }

    pub fn tabulated(
        sample: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
        extent: f64,
        compact: bool,
    ) -> Result<Self> {
        let s = SymbolU::Tabulated(TabulatedSymbol {
            sample: Arc::new(sample),
            extent,
            compact,
        });
        s.validate()?;
        Ok(s)
    }

    /// Checks parameter ranges and nonnegativity (on a grid where it is not
    /// structural).
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive, got {v}")))
            }
        };
        let nonneg = |v: f64, name: &str| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be nonnegative, got {v}")))
            }
        };
        match self {
            SymbolU::Power {
                alpha,
                profile,
                scale,
            } => {
                positive(*alpha, "alpha")?;
                nonneg(*scale, "scale")?;
                let max = profile.grid_max().abs().max(f64::MIN_POSITIVE);
                let min = profile.grid_min();
                if min < -1e-12 * max {
                    return Err(invalid(format!(
                        "angular profile takes negative value {min}"
                    )));
                }
                Ok(())
            }
            SymbolU::Gaussian {
                beta,
                eta,
                amplitude,
            } => {
                positive(*beta, "beta")?;
                positive(*eta, "eta")?;
                nonneg(*amplitude, "amplitude")
            }
            SymbolU::Disc { radius, height } => {
                positive(*radius, "disc radius")?;
                nonneg(*height, "disc height")
            }
            SymbolU::Tabulated(t) => {
                positive(t.extent, "extent")?;
                let n = 64;
                for i in 0..=n {
                    for j in 0..=n {
                        let x = [
                            t.extent * (2.0 * i as f64 / n as f64 - 1.0),
                            t.extent * (2.0 * j as f64 / n as f64 - 1.0),
                        ];
                        let v = (t.sample)(x);
                        if !(v >= 0.0) {
                            return Err(invalid(format!(
                                "tabulated symbol takes value {v} at {x:?}"
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        match self {
            SymbolU::Power {
                alpha,
                profile,
                scale,
            } => {
                let bracket = (1.0 + r2).sqrt();
                let angular = if profile.is_constant() {
                    profile.coefficients[0]
                } else {
                    profile.eval_extended(r2.sqrt() / bracket, x[1].atan2(x[0]))
                };
                scale * bracket.powf(-alpha) * angular
            }
            SymbolU::Gaussian {
                beta,
                eta,
                amplitude,
            } => amplitude * (-eta * r2.powf(*beta)).exp(),
            SymbolU::Disc { radius, height } => {
                if r2 <= radius * radius {
                    *height
                } else {
                    0.0
                }
            }
            SymbolU::Tabulated(t) => {
                if t.compact && r2 > t.extent * t.extent {
                    0.0
                } else {
                    (t.sample)(x)
                }
            }
        }
    }

    /// Radius of a disc containing the support, for compactly supported kinds.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            SymbolU::Disc { radius, .. } => Some(*radius),
            SymbolU::Tabulated(t) if t.compact => Some(t.extent),
            _ => None,
        }
    }

    pub fn is_radial(&self) -> bool {
        match self {
            SymbolU::Power { profile, .. } => profile.is_constant(),
            SymbolU::Gaussian { .. } | SymbolU::Disc { .. } => true,
            SymbolU::Tabulated(_) => false,
        }
    }

    /// `‖U‖_∞` (grid estimate for tabulated symbols).
    pub fn sup_norm(&self) -> f64 {
        match self {
            SymbolU::Power { profile, scale, .. } => {
                scale * profile.grid_max().max(profile.coefficients[0])
            }
            SymbolU::Gaussian { amplitude, .. } => *amplitude,
            SymbolU::Disc { height, .. } => *height,
            SymbolU::Tabulated(t) => {
                let n = 256;
                let mut best: f64 = 0.0;
                for i in 0..=n {
                    for j in 0..=n {
                        let x = [
                            t.extent * (2.0 * i as f64 / n as f64 - 1.0),
                            t.extent * (2.0 * j as f64 / n as f64 - 1.0),
                        ];
                        best = best.max(self.eval(x));
                    }
                }
                best
            }
        }
    }

    /// `∫ U^q dx` where a closed form exists.
    pub fn lq_norm_pow(&self, q: f64) -> Option<f64> {
        match self {
            SymbolU::Gaussian {
                beta,
                eta,
                amplitude,
            } => {
                Some(amplitude.powf(q) * PI * gamma(1.0 + 1.0 / beta) * (q * eta).powf(-1.0 / beta))
            }
            SymbolU::Disc { radius, height } => Some(height.powf(q) * PI * radius * radius),
            SymbolU::Power {
                alpha,
                profile,
                scale,
            } if profile.is_constant() => {
                let c = scale * profile.coefficients[0];
                if c == 0.0 {
                    Some(0.0)
                } else if q * alpha > 2.0 {
                    Some(c.powf(q) * PI / (0.5 * q * alpha - 1.0))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// `∫ U dx`; the angular modes `n ≥ 1` of a power symbol integrate to zero.
    pub fn integral(&self) -> Option<f64> {
        match self {
            SymbolU::Power {
                alpha,
                profile,
                scale,
            } => {
                let c = scale * profile.coefficients[0];
                if c == 0.0 {
                    Some(0.0)
                } else if *alpha > 2.0 {
                    Some(2.0 * PI * c / (alpha - 2.0))
                } else {
                    None
                }
            }
            _ => self.lq_norm_pow(1.0),
        }
    }

    /// `factor · U`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(invalid(format!(
                "symbol scale factor must be nonnegative, got {factor}"
            )));
        }
        Ok(match self {
            SymbolU::Power {
                alpha,
                profile,
                scale,
            } => SymbolU::Power {
                alpha: *alpha,
                profile: profile.clone(),
                scale: scale * factor,
            },
            SymbolU::Gaussian {
                beta,
                eta,
                amplitude,
            } => SymbolU::Gaussian {
                beta: *beta,
                eta: *eta,
                amplitude: amplitude * factor,
            },
            SymbolU::Disc { radius, height } => SymbolU::Disc {
                radius: *radius,
                height: height * factor,
            },
            SymbolU::Tabulated(t) => {
                let inner = t.sample.clone();
                SymbolU::Tabulated(TabulatedSymbol {
                    sample: Arc::new(move |x| factor * inner(x)),
                    extent: t.extent,
                    compact: t.compact,
                })
            }
        })
    }
}

/// `+T` or `−T` in the counting function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Hermitian Toeplitz matrix with its spectrum.
#[derive(Debug, Clone)]
pub struct ToeplitzMatrix {
    matrix: CMatrix,
    eigenvalues: Vec<f64>,
    residual: f64,
}

impl ToeplitzMatrix {
    fn from_matrix(mut matrix: CMatrix, residual: f64) -> Self {
        symmetrize(&mut matrix);
        let eigenvalues = hermitian_eigenvalues(&matrix);
        Self {
            matrix,
            eigenvalues,
            residual,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Largest entry drift under the doubled quadrature.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn counting(&self, s: f64, sign: Sign) -> usize {
        count_above(&self.eigenvalues, s, sign)
    }

    pub fn schatten_norm(&self, q: f64) -> Result<f64> {
        schatten_norm(&self.eigenvalues, q)
    }
}

/// `(ρ Γ ρ)ᵀ` for the weight `w e^{−2φ̃}`, with its doubled-node drift.
fn compressed(
    basis: &ZeroModeBasis,
    symbol: &(dyn Fn([f64; 2]) -> f64 + Sync),
    support: Option<f64>,
    context: &str,
) -> Result<(CMatrix, f64)> {
    let b0 = basis.b0();
    let rule = match support {
        Some(rho) => {
            let limit = basis.evaluation_radius();
            if rho > limit {
                return Err(Error::SupportExceedsRadius {
                    support: rho,
                    limit,
                });
            }
            basis.rule().for_support(b0, rho)?
        }
        None => basis.rule().clone(),
    };
    let field = basis.field();
    let weight = |x: [f64; 2]| {
        let u = symbol(x);
        if u == 0.0 {
            0.0
        } else {
            u * (-2.0 * field.phitilde(x)).exp()
        }
    };
    let (moments, drift) = checked_moment_matrix(b0, basis.size(), &rule, &weight, context)?;
    let rho = basis.whitening();
    Ok(((rho * moments * rho).transpose(), drift))
}

/// Matrix of `p(b) U p(b)` in the basis `ψ_0, …, ψ_{K−1}`.
pub fn toeplitz_matrix(basis: &ZeroModeBasis, symbol: &SymbolU) -> Result<ToeplitzMatrix> {
    let (m, drift) = compressed(
        basis,
        &|x| symbol.eval(x),
        symbol.support_radius(),
        "Toeplitz matrix",
    )?;
    Ok(ToeplitzMatrix::from_matrix(m, drift))
}

/// Real symmetric 2×2 matrix symbol `[[w11, w12], [w12, w22]]`.
#[derive(Debug, Clone)]
pub struct BlockSymbol {
    pub w11: SymbolU,
    pub w22: SymbolU,
    /// `None` when the off-diagonal entry vanishes identically.
    pub w12: Option<SymbolU>,
}

/// `2K × 2K` matrix of `p(b) 𝒲 p(b)`; each block uses the scalar integrator.
pub fn block_toeplitz_matrix(
    basis: &ZeroModeBasis,
    symbol: &BlockSymbol,
) -> Result<ToeplitzMatrix> {
    let k = basis.size();
    let support = |s: &SymbolU| s.support_radius();
    let (a11, d11) = compressed(
        basis,
        &|x| symbol.w11.eval(x),
        support(&symbol.w11),
        "block Toeplitz (1,1)",
    )?;
    let (a22, d22) = compressed(
        basis,
        &|x| symbol.w22.eval(x),
        support(&symbol.w22),
        "block Toeplitz (2,2)",
    )?;
    let mut full = CMatrix::zeros(2 * k, 2 * k);
    full.view_mut((0, 0), (k, k)).copy_from(&a11);
    full.view_mut((k, k), (k, k)).copy_from(&a22);
    let mut drift = d11.max(d22);
    if let Some(w12) = &symbol.w12 {
        let (a12, d12) = compressed(
            basis,
            &|x| w12.eval(x),
            support(w12),
            "block Toeplitz (1,2)",
        )?;
        full.view_mut((0, k), (k, k)).copy_from(&a12);
        full.view_mut((k, 0), (k, k)).copy_from(&a12.adjoint());
        drift = drift.max(d12);
    }
    Ok(ToeplitzMatrix::from_matrix(full, drift))
}

/// Constant-field eigenvalues of a radial symbol,
/// `λ_k = ∫ U(√(2t/b0)) t^k e^{−t}/k! dt`, in order of `k` (not sorted).
pub fn radial_eigenvalues(b0: f64, symbol: &SymbolU, size: usize) -> Result<Vec<f64>> {
    if !symbol.is_radial() {
        return Err(invalid("radial eigenvalues need a radial symbol"));
    }
    if !(b0 > 0.0) {
        return Err(invalid(format!("b0 must be positive, got {b0}")));
    }
    let radial = match symbol.support_radius() {
        Some(rho) => RadialRule::Panels {
            end: 0.5 * b0 * rho * rho,
            panel_width: 0.5,
            order: 32,
        },
        None => RadialRule::Laguerre {
            count: 2 * size + 64,
        },
    };
    let rule = QuadratureRule::new(radial, 4)?;
    let ln_fact = ln_factorials(size);
    let nodes: Vec<(f64, f64, f64)> = rule
        .radial_nodes()
        .iter()
        .filter_map(|n| {
            let u = symbol.eval([(2.0 * n.t / b0).sqrt(), 0.0]);
            (u != 0.0).then(|| (n.ln_weight, n.t.ln(), u))
        })
        .collect();
    Ok((0..size)
        .map(|k| {
            nodes
                .iter()
                .map(|&(lw, lt, u)| u * (lw + k as f64 * lt - ln_fact[k]).exp())
                .sum()
        })
        .collect())
}

/// `n_±(s; T) = #{λ : ±λ > s}`.
pub fn count_above(eigenvalues: &[f64], s: f64, sign: Sign) -> usize {
    let f = sign.factor();
    eigenvalues.iter().filter(|&&l| f * l > s).count()
}

/// `(Σ |λ|^q)^{1/q}`.
pub fn schatten_norm(eigenvalues: &[f64], q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(invalid(format!(
            "Schatten exponent must be at least 1, got {q}"
        )));
    }
    Ok(eigenvalues
        .iter()
        .map(|l| l.abs().powf(q))
        .sum::<f64>()
        .powf(1.0 / q))
}

/// `Ψ_α(s) = s^{−2/α} (b0/4π) ∫ u0^{2/α} dθ`.
pub fn comparator_psi(s: f64, alpha: f64, u0: &CosineSeries, b0: f64) -> Result<f64> {
    if !(s > 0.0 && alpha > 0.0 && b0 > 0.0) {
        return Err(invalid("comparator needs s, alpha and b0 positive"));
    }
    let p = 2.0 / alpha;
    Ok(s.powf(-p) * b0 / (4.0 * PI) * u0.integral_of_power(p))
}

/// `Φ_β(s; η, b0)` for `0 < s < e^{−1}`; `β = ∞` selects the compact-support branch.
pub fn comparator_phi(s: f64, beta: f64, eta: f64, b0: f64) -> Result<f64> {
    if !(s > 0.0 && s < (-1.0f64).exp()) {
        return Err(Error::OutOfDomain {
            value: s,
            domain: "(0, 1/e)",
        });
    }
    if !(beta > 0.0) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    let l = -s.ln();
    if beta.is_infinite() {
        return Ok(l / l.ln());
    }
    if !(eta > 0.0 && b0 > 0.0) {
        return Err(invalid("comparator needs eta and b0 positive"));
    }
    Ok(if beta < 1.0 {
        b0 / (2.0 * eta.powf(1.0 / beta)) * l.powf(1.0 / beta)
    } else if beta == 1.0 {
        l / (1.0 + 2.0 * eta / b0).ln()
    } else {
        beta / (beta - 1.0) * l / l.ln()
    })
}

/// `(b0/2π) |{x : U(x) > s}|`.
pub fn volume_count(symbol: &SymbolU, s: f64, b0: f64) -> f64 {
    let density = b0 / (2.0 * PI);
    let area = match symbol {
        SymbolU::Disc { radius, height } => {
            if s < *height {
                PI * radius * radius
            } else {
                0.0
            }
        }
        SymbolU::Gaussian {
            beta,
            eta,
            amplitude,
        } => {
            if s < *amplitude {
                PI * ((amplitude / s).ln() / eta).powf(1.0 / beta)
            } else {
                0.0
            }
        }
        SymbolU::Power {
            alpha,
            profile,
            scale,
        } if profile.is_constant() => {
            let c = scale * profile.coefficients[0];
            if s < c {
                PI * ((c / s).powf(2.0 / alpha) - 1.0)
            } else {
                0.0
            }
        }
        SymbolU::Power {
            alpha,
            profile,
            scale,
        } => {
            // polar midpoint scan; beyond r_max the envelope is below s
            let bound = scale * profile.coefficients.iter().map(|c| c.abs()).sum::<f64>();
            if bound <= s {
                return 0.0;
            }
            let r_max = ((bound / s).powf(2.0 / alpha) - 1.0).max(0.0).sqrt();
            let (n_ang, n_rad) = (1024, 4096);
            let dr = r_max / n_rad as f64;
            let mut acc = 0.0;
            for l in 0..n_ang {
                let th = 2.0 * PI * (l as f64 + 0.5) / n_ang as f64;
                for i in 0..n_rad {
                    let r = (i as f64 + 0.5) * dr;
                    if symbol.eval([r * th.cos(), r * th.sin()]) > s {
                        acc += r * dr;
                    }
                }
            }
            acc * 2.0 * PI / n_ang as f64
        }
        SymbolU::Tabulated(t) => {
            let n = 1024;
            let h = 2.0 * t.extent / n as f64;
            let mut hits = 0usize;
            for i in 0..n {
                for j in 0..n {
                    let x = [
                        -t.extent + (i as f64 + 0.5) * h,
                        -t.extent + (j as f64 + 0.5) * h,
                    ];
                    if symbol.eval(x) > s {
                        hits += 1;
                    }
                }
            }
            hits as f64 * h * h
        }
    };
    density * area
}

/// Counts in `n₊(e^{2 osc}s; T_{b0}) ≤ n₊(s; T_b) ≤ n₊(e^{−2 osc}s; T_{b0})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SandwichCounts {
    pub lower: usize,
    pub middle: usize,
    pub upper: usize,
    pub ok: bool,
}

pub fn sandwich_counts(
    field_matrix: &ToeplitzMatrix,
    constant_matrix: &ToeplitzMatrix,
    s: f64,
    osc: f64,
) -> SandwichCounts {
    let lower = constant_matrix.counting((2.0 * osc).exp() * s, Sign::Plus);
    let middle = field_matrix.counting(s, Sign::Plus);
    let upper = constant_matrix.counting((-2.0 * osc).exp() * s, Sign::Plus);
    SandwichCounts {
        lower,
        middle,
        upper,
        ok: lower <= middle && middle <= upper,
    }
}

pub fn sandwich_check(
    basis_b: &ZeroModeBasis,
    basis_b0: &ZeroModeBasis,
    symbol: &SymbolU,
    s: f64,
    osc: f64,
) -> Result<SandwichCounts> {
    if basis_b.b0() != basis_b0.b0() {
        return Err(invalid("sandwich bases must share b0"));
    }
    if !(s > 0.0 && osc >= 0.0) {
        return Err(invalid("sandwich needs s > 0 and osc ≥ 0"));
    }
    let tb = toeplitz_matrix(basis_b, symbol)?;
    let t0 = toeplitz_matrix(basis_b0, symbol)?;
    Ok(sandwich_counts(&tb, &t0, s, osc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::MagneticField;
    use approx::assert_relative_eq;

    fn constant_basis(b0: f64, size: usize) -> ZeroModeBasis {
        ZeroModeBasis::new(MagneticField::constant(b0).unwrap(), size).unwrap()
    }

    #[test]
    fn gaussian_symbol_matches_geometric_oracle() {
        for (b0, ratio) in [(2.0, 0.5), (1.0, 1.0 / 3.0)] {
            let basis = constant_basis(b0, 32);
            let u = SymbolU::gaussian(1.0, 1.0, 1.0).unwrap();
            let t = toeplitz_matrix(&basis, &u).unwrap();
            for k in 0..12 {
                let exact = ratio_pow(ratio, k + 1);
                assert_relative_eq!(t.eigenvalues()[k], exact, max_relative = 1e-9);
            }
            let off: f64 = (0..32)
                .flat_map(|j| (0..32).map(move |k| (j, k)))
                .filter(|(j, k)| j != k)
                .map(|(j, k)| t.matrix()[(j, k)].norm())
                .fold(0.0, f64::max);
            assert!(off < 1e-13, "off-diagonal {off:e}");
        }
    }

    fn ratio_pow(r: f64, n: usize) -> f64 {
        r.powi(n as i32)
    }

    #[test]
    fn radial_bypass_agrees_with_assembly() {
        let u = SymbolU::gaussian(1.0, 1.0, 1.0).unwrap();
        let lam = radial_eigenvalues(2.0, &u, 20).unwrap();
        for (k, l) in lam.iter().enumerate() {
            assert_relative_eq!(*l, 0.5f64.powi(k as i32 + 1), max_relative = 1e-12);
        }
        let disc = SymbolU::disc(2.0, 1.0).unwrap();
        let lam = radial_eigenvalues(1.0, &disc, 8).unwrap();
        // ∫_0^2 e^{−t} dt and ∫_0^2 t e^{−t} dt
        assert_relative_eq!(lam[0], 1.0 - (-2.0f64).exp(), epsilon = 1e-14);
        assert_relative_eq!(lam[1], 1.0 - 3.0 * (-2.0f64).exp(), epsilon = 1e-14);
        assert!(radial_eigenvalues(
            1.0,
            &SymbolU::power(2.0, CosineSeries::new(vec![1.0, 0.5]).unwrap(), 1.0).unwrap(),
            4
        )
        .is_err());
    }

    #[test]
    fn wide_disc_is_nearly_identity() {
        let disc = SymbolU::disc(30.0, 1.0).unwrap();
        let lam = radial_eigenvalues(2.0, &disc, 40).unwrap();
        assert!(lam.iter().all(|l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn disc_beyond_radius_is_rejected() {
        let basis = constant_basis(1.0, 2);
        let disc = SymbolU::disc(5.0, 1.0).unwrap();
        assert!(matches!(
            toeplitz_matrix(&basis, &disc),
            Err(Error::SupportExceedsRadius { .. })
        ));
    }

    #[test]
    fn counting_examples() {
        let eig: Vec<f64> = (0..20).map(|k| 0.5f64.powi(k + 1)).collect();
        assert_eq!(count_above(&eig, 0.1, Sign::Plus), 3);
        assert_eq!(count_above(&eig, 0.6, Sign::Plus), 0);
        assert_eq!(count_above(&eig, 1e-9, Sign::Minus), 0);
        assert_eq!(count_above(&[-0.3, 0.2], 0.25, Sign::Minus), 1);
    }

    #[test]
    fn schatten_examples() {
        let eig: Vec<f64> = (0..48).map(|k| 0.5f64.powi(k + 1)).collect();
        assert!((schatten_norm(&eig, 1.0).unwrap() - 1.0).abs() < 1e-6);
        assert_relative_eq!(schatten_norm(&[1.0; 9], 2.0).unwrap(), 3.0, epsilon = 1e-15);
        assert_eq!(schatten_norm(&[0.0; 4], 3.0).unwrap(), 0.0);
        assert!(schatten_norm(&eig, 0.5).is_err());
    }

    #[test]
    fn comparator_examples() {
        let one = CosineSeries::constant(1.0);
        assert_relative_eq!(
            comparator_psi(0.01, 2.0, &one, 1.0).unwrap(),
            50.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            comparator_psi(1.0, 3.0, &one, 2.5).unwrap(),
            1.25,
            max_relative = 1e-12
        );
        assert_eq!(
            comparator_psi(0.1, 2.0, &CosineSeries::constant(0.0), 1.0).unwrap(),
            0.0
        );

        assert_relative_eq!(
            comparator_phi((-10.0f64).exp(), 1.0, 1.0, 2.0).unwrap(),
            14.426_950_408_889_634,
            max_relative = 1e-12
        );
        let e2 = std::f64::consts::E.powi(2);
        assert_relative_eq!(
            comparator_phi((-e2).exp(), f64::INFINITY, 1.0, 1.0).unwrap(),
            3.694_528_049_465_325,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            comparator_phi((-9.0f64).exp(), 0.5, 1.0, 2.0).unwrap(),
            81.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            comparator_phi((-9.0f64).exp(), 2.0, 1.0, 2.0).unwrap(),
            2.0 * 9.0 / 9f64.ln(),
            max_relative = 1e-12
        );
        assert!(matches!(
            comparator_phi(0.5, 1.0, 1.0, 1.0),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn volume_examples() {
        let disc = SymbolU::disc(1.5, 2.0).unwrap();
        assert_relative_eq!(
            volume_count(&disc, 1.0, 3.0),
            1.5 * 1.5 * 1.5,
            epsilon = 1e-14
        );
        assert_eq!(volume_count(&disc, 2.0, 3.0), 0.0);
        let g = SymbolU::gaussian(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(volume_count(&g, (-4.0f64).exp(), 2.0), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn volume_count_numeric_paths_agree_with_closed_form() {
        let p = SymbolU::Power {
            alpha: 4.0,
            profile: CosineSeries::new(vec![1.0, 0.0]).unwrap(),
            scale: 1.0,
        };
        let s: f64 = 1e-3;
        let exact = PI * ((1.0 / s).powf(0.5) - 1.0) / (2.0 * PI);
        let grid_tab =
            SymbolU::tabulated(|x| (1.0 + x[0] * x[0] + x[1] * x[1]).powi(-2), 6.0, true).unwrap();
        assert_relative_eq!(volume_count(&p, s, 1.0), exact, max_relative = 1e-12);
        assert_relative_eq!(volume_count(&grid_tab, s, 1.0), exact, max_relative = 2e-3);
        let skew = CosineSeries::new(vec![1.0, 0.5]).unwrap();
        let nonradial = SymbolU::power(4.0, skew.clone(), 1.0).unwrap();
        let far = volume_count(&nonradial, 1e-6, 1.0);
        let leading = comparator_psi(1e-6, 4.0, &skew, 1.0).unwrap();
        assert!((far / leading - 1.0).abs() < 5e-3, "{far} vs {leading}");
    }

    #[test]
    fn symbol_validation() {
        assert!(SymbolU::gaussian(0.0, 1.0, 1.0).is_err());
        assert!(SymbolU::disc(1.0, -1.0).is_err());
        assert!(SymbolU::power(2.0, CosineSeries::new(vec![0.5, 1.0]).unwrap(), 1.0).is_err());
        assert!(SymbolU::tabulated(|x| x[0], 1.0, true).is_err());
    }

    #[test]
    fn closed_form_norms() {
        let g = SymbolU::gaussian(2.0, 0.7, 1.3).unwrap();
        // ∫ A^q e^{−qη r^4} dx = A^q π Γ(3/2) (qη)^{−1/2}
        let expected = 1.3f64.powi(2) * PI * (0.25 * PI).sqrt() * (1.4f64).powf(-0.5);
        assert_relative_eq!(g.lq_norm_pow(2.0).unwrap(), expected, max_relative = 1e-12);
        let p = SymbolU::power(4.0, CosineSeries::constant(2.0), 1.0).unwrap();
        assert_relative_eq!(p.integral().unwrap(), 2.0 * PI, max_relative = 1e-14);
    }

    #[test]
    fn sandwich_is_trivial_at_constant_field() {
        let basis = constant_basis(2.0, 24);
        let u = SymbolU::gaussian(1.0, 1.0, 1.0).unwrap();
        let c = sandwich_check(&basis, &basis, &u, 0.07, 0.0).unwrap();
        assert!(c.ok && c.lower == c.middle && c.middle == c.upper);
        let c = sandwich_check(&basis, &basis, &u, 2.0, 0.0).unwrap();
        assert_eq!((c.lower, c.middle, c.upper), (0, 0, 0));
    }
}
