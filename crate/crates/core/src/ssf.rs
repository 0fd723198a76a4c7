//! Effective spectral shift near the bottom of the continuous spectrum.
//!
//! For a separable `v11(x, x3) = U(x) g(x3)` with even `g`, the effective
//! operators reduce to Toeplitz matrices of `U` weighted by longitudinal
//! integrals: `W = G0 U` with `G0 = ∫ g`, and `𝒲_E = diag(w11, w22)` with
//! `w11 = U ∫ g cos²(√E x3)`, `w22 = U ∫ g sin²(√E x3)`.

use std::f64::consts::PI;

use log::warn;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::quadrature::{graded_breaks, PanelRule};
use crate::toeplitz::{
    block_toeplitz_matrix, count_above, toeplitz_matrix, BlockSymbol, Sign, SymbolU, ToeplitzMatrix,
};
use crate::zeromodes::ZeroModeBasis;

/// Tolerance on the truncated tails of longitudinal integrals.
const LONGITUDINAL_TAIL: f64 = 1e-10;
const LONGITUDINAL_ORDER: usize = 20;
const MAX_LONGITUDINAL_PANELS: usize = 200_000;

/// Reference `ε` standing in for the limit `ε → 0`.
pub const EPSILON_REFERENCE: f64 = 1e-6;

/// Relative gap between the full and reduced above-threshold traces below
/// which the reduced one is used.
pub const TILDE_CROSSOVER: f64 = 0.01;

/// `1 − sin(x)/x` without cancellation.
fn one_minus_sinc(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        x2 / 6.0 - x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0
    } else {
        1.0 - x.sin() / x
    }
}

/// Even longitudinal profile `g(x3) ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Longitudinal {
    /// `exp(−x3²/(2σ²))`.
    Gaussian { sigma: f64 },
    /// `𝟙{|x3| ≤ a}`.
    Boxcar { half_width: f64 },
    /// `⟨x3⟩^{−m3}`, `m3 > 1`; `total` caches `∫ g`.
    Power { m3: f64, total: f64 },
}

impl Longitudinal {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Longitudinal::Gaussian { sigma })
    }

    pub fn boxcar(half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid(format!(
                "boxcar half-width must be positive, got {half_width}"
            )));
        }
        Ok(Longitudinal::Boxcar { half_width })
    }

    pub fn power(m3: f64) -> Result<Self> {
        if !(m3.is_finite() && m3 > 1.0) {
            return Err(invalid(format!(
                "longitudinal exponent must exceed 1, got {m3}"
            )));
        }
        let g = |x: f64| (1.0 + x * x).powf(-0.5 * m3);
        let end = power_cutoff(m3);
        let rule = panel_rule(end, f64::INFINITY)?;
        let total = 2.0 * rule.integrate(g);
        Ok(Longitudinal::Power { m3, total })
    }

    pub fn eval(&self, x3: f64) -> f64 {
        match *self {
            Longitudinal::Gaussian { sigma } => (-x3 * x3 / (2.0 * sigma * sigma)).exp(),
            Longitudinal::Boxcar { half_width } => {
                if x3.abs() <= half_width {
                    1.0
                } else {
                    0.0
                }
            }
            Longitudinal::Power { m3, .. } => (1.0 + x3 * x3).powf(-0.5 * m3),
        }
    }

    /// `∫ g dx3`.
    pub fn integral(&self) -> f64 {
        match *self {
            Longitudinal::Gaussian { sigma } => sigma * (2.0 * PI).sqrt(),
            Longitudinal::Boxcar { half_width } => 2.0 * half_width,
            Longitudinal::Power { total, .. } => total,
        }
    }

    /// `∫ g(x3) cos(ω x3) dx3`.
    pub fn cosine_transform(&self, omega: f64) -> Result<f64> {
        Ok(match *self {
            Longitudinal::Gaussian { sigma } => {
                sigma * (2.0 * PI).sqrt() * (-0.5 * sigma * sigma * omega * omega).exp()
            }
            Longitudinal::Boxcar { half_width } => {
                2.0 * half_width * (1.0 - one_minus_sinc(omega * half_width))
            }
            Longitudinal::Power { m3, .. } => {
                if omega == 0.0 {
                    return Ok(self.integral());
                }
                // ∫_X^∞ g cos(ωx) = −g(X) sin(ωX)/ω + R with |R| ≤ 2|g'(X)|/ω²,
                // and |g'(X)| ≤ m3 X^{−m3−1}
                let omega = omega.abs();
                let end = (4.0 * m3 / (omega * omega * LONGITUDINAL_TAIL))
                    .powf(1.0 / (m3 + 1.0))
                    .max(1.0);
                let g = |x: f64| (1.0 + x * x).powf(-0.5 * m3);
                let rule = panel_rule(end, (0.5 * PI / omega).min(8.0))?;
                2.0 * (rule.integrate(|x| g(x) * (omega * x).cos())
                    - g(end) * (omega * end).sin() / omega)
            }
        })
    }

    /// `(∫ g cos²(k x3), ∫ g sin²(k x3))`; the second is formed without
    /// cancellation and the first as `∫ g` minus it, so the pair sums to `∫ g` up to rounding.
    pub fn cos2_sin2(&self, k: f64) -> Result<(f64, f64)> {
        let omega = 2.0 * k;
        let sin2 = match *self {
            Longitudinal::Gaussian { sigma } => {
                -0.5 * self.integral() * (-0.5 * sigma * sigma * omega * omega).exp_m1()
            }
            Longitudinal::Boxcar { half_width } => half_width * one_minus_sinc(omega * half_width),
            Longitudinal::Power { m3, .. } => {
                let end = power_cutoff(m3);
                let width = if omega == 0.0 {
                    f64::INFINITY
                } else {
                    (0.5 * PI / omega).min(8.0)
                };
                if end / width <= MAX_LONGITUDINAL_PANELS as f64 {
                    let rule = panel_rule(end, width)?;
                    2.0 * rule.integrate(|x| (1.0 + x * x).powf(-0.5 * m3) * (k * x).sin().powi(2))
                } else {
                    0.5 * (self.integral() - self.cosine_transform(omega)?)
                }
            }
        };
        let sin2 = sin2.max(0.0);
        Ok((self.integral() - sin2, sin2))
    }
}

/// `X` with `2 X^{1−m3}/(m3 − 1) < LONGITUDINAL_TAIL`.
fn power_cutoff(m3: f64) -> f64 {
    (LONGITUDINAL_TAIL * (m3 - 1.0) / 2.0).powf(-1.0 / (m3 - 1.0))
}

fn panel_rule(end: f64, max_width: f64) -> Result<PanelRule> {
    if end / max_width > MAX_LONGITUDINAL_PANELS as f64 {
        return Err(invalid(format!(
            "longitudinal quadrature on [0, {end:.3e}] needs more than {MAX_LONGITUDINAL_PANELS} panels"
        )));
    }
    Ok(PanelRule::new(
        &graded_breaks(end, max_width),
        LONGITUDINAL_ORDER,
    ))
}

/// Decay class of `W` at infinity, which fixes the predicted Levinson ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass {
    /// `W ~ ⟨x⟩^{−(m−1)}`, `m > 3`.
    Power {
        m: f64,
    },
    /// `ln W ~ −η |x|^{2β}`.
    Exponential {
        beta: f64,
        eta: f64,
    },
    Compact,
}

impl DecayClass {
    /// `lim ξ(E)/ξ(−E)` as `E ↓ 0` for `H0 − V`.
    pub fn levinson_limit(&self) -> f64 {
        match *self {
            DecayClass::Power { m } => 1.0 / (2.0 * (PI / (m - 1.0)).cos()),
            DecayClass::Exponential { .. } | DecayClass::Compact => 0.5,
        }
    }
}

/// Sign-definite `v11(x, x3) = U(x) g(x3)`.
#[derive(Debug, Clone)]
pub struct PerturbationProfile {
    transverse: SymbolU,
    longitudinal: Longitudinal,
    decay_class: DecayClass,
}

impl PerturbationProfile {
    pub fn new(
        transverse: SymbolU,
        longitudinal: Longitudinal,
        decay_class: DecayClass,
    ) -> Result<Self> {
        transverse.validate()?;
        match (&transverse, decay_class) {
            (_, DecayClass::Power { m }) if !(m > 3.0) => {
                return Err(invalid(format!("power decay class needs m > 3, got {m}")));
            }
            (SymbolU::Power { alpha, .. }, DecayClass::Power { m })
                if (alpha + 1.0 - m).abs() > 1e-9 =>
            {
                return Err(invalid(format!(
                    "power symbol with alpha = {alpha} has decay class m = {}, not {m}",
                    alpha + 1.0
                )));
            }
            (SymbolU::Power { .. }, DecayClass::Power { .. }) => {}
            (SymbolU::Gaussian { beta, eta, .. }, DecayClass::Exponential { beta: b, eta: e })
                if *beta == b && *eta == e => {}
            (SymbolU::Disc { .. }, DecayClass::Compact) => {}
            (SymbolU::Tabulated(_), _) => {}
            (u, c) => {
                return Err(invalid(format!(
                    "decay class {c:?} does not match symbol {u:?}"
                )));
            }
        }
        Ok(Self {
            transverse,
            longitudinal,
            decay_class,
        })
    }

    /// Decay class read off the transverse symbol; tabulated symbols need an explicit class.
    pub fn inferred(transverse: SymbolU, longitudinal: Longitudinal) -> Result<Self> {
        let class = match &transverse {
            SymbolU::Power { alpha, .. } => DecayClass::Power { m: alpha + 1.0 },
            SymbolU::Gaussian { beta, eta, .. } => DecayClass::Exponential {
                beta: *beta,
                eta: *eta,
            },
            SymbolU::Disc { .. } => DecayClass::Compact,
            SymbolU::Tabulated(_) => {
                return Err(invalid("tabulated symbols need an explicit decay class"))
            }
        };
        Self::new(transverse, longitudinal, class)
    }

    pub fn transverse(&self) -> &SymbolU {
        &self.transverse
    }

    pub fn longitudinal(&self) -> &Longitudinal {
        &self.longitudinal
    }

    pub fn decay_class(&self) -> DecayClass {
        self.decay_class
    }

    /// `v11(x, x3)`.
    pub fn v11(&self, x: [f64; 2], x3: f64) -> f64 {
        self.transverse.eval(x) * self.longitudinal.eval(x3)
    }

    /// `W = G0 U` as a symbol.
    pub fn w_symbol(&self) -> Result<SymbolU> {
        self.transverse.scaled(self.longitudinal.integral())
    }

    /// Diagonal of `𝒲_E` as symbols; the off-diagonal entry vanishes for even `g`.
    pub fn block_symbol(&self, energy: f64) -> Result<BlockSymbol> {
        if !(energy > 0.0) {
            return Err(invalid(format!("energy must be positive, got {energy}")));
        }
        let (c11, c22) = self.longitudinal.cos2_sin2(energy.sqrt())?;
        Ok(BlockSymbol {
            w11: self.transverse.scaled(c11)?,
            w22: self.transverse.scaled(c22)?,
            w12: None,
        })
    }
}

/// `W(x) = ∫ v11(x, x3) dx3`.
pub fn w_profile(profile: &PerturbationProfile, x: [f64; 2]) -> f64 {
    profile.transverse.eval(x) * profile.longitudinal.integral()
}

/// `𝒲_E(x)` as `[[w11, w12], [w12, w22]]`.
pub fn w_matrix(profile: &PerturbationProfile, energy: f64, x: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    if !(energy > 0.0) {
        return Err(invalid(format!("energy must be positive, got {energy}")));
    }
    let u = profile.transverse.eval(x);
    let (c11, c22) = profile.longitudinal.cos2_sin2(energy.sqrt())?;
    Ok([[u * c11, 0.0], [0.0, u * c22]])
}

/// Spectrum of `p W p`, descending.
#[derive(Debug, Clone)]
pub struct EffectiveSpectrum {
    mu: Vec<f64>,
    trace: f64,
    residual: f64,
}

impl EffectiveSpectrum {
    pub fn from_eigenvalues(mut mu: Vec<f64>) -> Self {
        mu.sort_by(|a, b| b.total_cmp(a));
        let trace = mu.iter().sum();
        Self {
            mu,
            trace,
            residual: 0.0,
        }
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Matrix trace of `p W p`.
    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Eigenvalues of `ω(E) = (2√E)^{−1} p W p`.
    pub fn omega(&self, energy: f64) -> Vec<f64> {
        let s = 2.0 * energy.sqrt();
        self.mu.iter().map(|m| m / s).collect()
    }
}

fn matrix_trace(t: &ToeplitzMatrix) -> f64 {
    t.matrix().diagonal().iter().map(|z| z.re).sum()
}

pub fn effective_spectrum(
    basis: &ZeroModeBasis,
    profile: &PerturbationProfile,
) -> Result<EffectiveSpectrum> {
    let t = toeplitz_matrix(basis, &profile.w_symbol()?)?;
    Ok(EffectiveSpectrum {
        mu: t.eigenvalues().to_vec(),
        trace: matrix_trace(&t),
        residual: t.residual(),
    })
}

/// Spectrum of `p 𝒲_E p` with its matrix trace.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    pub nu: Vec<f64>,
    pub trace: f64,
    pub residual: f64,
}

pub fn block_spectrum(
    basis: &ZeroModeBasis,
    profile: &PerturbationProfile,
    energy: f64,
) -> Result<BlockSpectrum> {
    let t = block_toeplitz_matrix(basis, &profile.block_symbol(energy)?)?;
    Ok(BlockSpectrum {
        nu: t.eigenvalues().to_vec(),
        trace: matrix_trace(&t),
        residual: t.residual(),
    })
}

fn check_energy_epsilon(energy: f64, epsilon: f64) -> Result<()> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(invalid(format!("energy must be positive, got {energy}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// Effective corridor for `ξ(−E; H0 − V, H0)`:
/// `(−n₊((1−ε)2√E; pWp), −n₊((1+ε)2√E; pWp))`.
pub fn xi_below(spec: &EffectiveSpectrum, energy: f64, epsilon: f64) -> Result<(f64, f64)> {
    check_energy_epsilon(energy, epsilon)?;
    let s = 2.0 * energy.sqrt();
    let lo = -(count_above(&spec.mu, (1.0 - epsilon) * s, Sign::Plus) as f64);
    let hi = -(count_above(&spec.mu, (1.0 + epsilon) * s, Sign::Plus) as f64);
    Ok((lo, hi))
}

/// `(1/π) Σ arctan(λ/s)`.
pub fn arctan_trace(eigenvalues: &[f64], s: f64) -> f64 {
    eigenvalues.iter().map(|l| (l / s).atan()).sum::<f64>() / PI
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Corridor `±(1/π) Tr arctan(((1±ε)2√E)^{−1} p 𝒲_E p)` from block eigenvalues.
pub fn xi_above_from(nu: &[f64], energy: f64, epsilon: f64, sign: Sign) -> Result<(f64, f64)> {
    check_energy_epsilon(energy, epsilon)?;
    let s = 2.0 * energy.sqrt();
    let f = sign.factor();
    Ok(ordered(
        f * arctan_trace(nu, (1.0 + epsilon) * s),
        f * arctan_trace(nu, (1.0 - epsilon) * s),
    ))
}

/// Effective corridor for `ξ(E; H0 ± V, H0)`.
pub fn xi_above(
    basis: &ZeroModeBasis,
    profile: &PerturbationProfile,
    energy: f64,
    epsilon: f64,
    sign: Sign,
) -> Result<(f64, f64)> {
    check_energy_epsilon(energy, epsilon)?;
    let block = block_spectrum(basis, profile, energy)?;
    xi_above_from(&block.nu, energy, epsilon, sign)
}

/// `±(1/π) Tr arctan((2√E)^{−1} p W p)`, the reduced form of [`xi_above`].
pub fn xi_above_tilde(spec: &EffectiveSpectrum, energy: f64, sign: Sign) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(invalid(format!("energy must be positive, got {energy}")));
    }
    Ok(sign.factor() * arctan_trace(&spec.mu, 2.0 * energy.sqrt()))
}

/// `(b0/2π²) ∫ arctan(W(x)/(2√E)) dx`, unsigned.
pub fn xi_semiclassical(profile: &PerturbationProfile, energy: f64, b0: f64) -> Result<f64> {
    if !(energy > 0.0 && b0 > 0.0) {
        return Err(invalid("semiclassical integral needs E > 0 and b0 > 0"));
    }
    let s = 2.0 * energy.sqrt();
    let g0 = profile.longitudinal.integral();
    let u = &profile.transverse;
    let integrand = |x: [f64; 2]| (g0 * u.eval(x) / s).atan();
    let pref = b0 / (2.0 * PI * PI);
    let integral = match u {
        SymbolU::Disc { radius, height } => PI * radius * radius * (g0 * height / s).atan(),
        SymbolU::Gaussian {
            beta,
            eta,
            amplitude,
        } => {
            let peak = g0 * amplitude / s;
            if peak == 0.0 {
                return Ok(0.0);
            }
            // beyond this radius the integrand is below 1e-17 of its peak
            let end = ((peak.ln().max(0.0) + 40.0) / eta).powf(0.5 / beta);
            radial_integral(end, |r| integrand([r, 0.0]))
        }
        SymbolU::Power {
            alpha,
            profile: u0,
            scale,
        } => {
            let bound = g0 * scale * u0.coefficients().iter().map(|c| c.abs()).sum::<f64>() / s;
            if bound == 0.0 {
                return Ok(0.0);
            }
            // arctan is linear to 1e-8 relative once the argument is below 1e-4
            let end = ((bound / 1e-4).powf(2.0 / alpha) - 1.0).max(1.0).sqrt();
            let inner = if u.is_radial() {
                radial_integral(end, |r| integrand([r, 0.0]))
            } else {
                polar_integral(end, &integrand)
            };
            let c0 = g0 * scale * u0.coefficients()[0];
            let tail = if *alpha > 2.0 {
                2.0 * PI * c0 / s * (1.0 + end * end).powf(1.0 - 0.5 * alpha) / (alpha - 2.0)
            } else {
                f64::INFINITY
            };
            inner + tail
        }
        SymbolU::Tabulated(_) => {
            let end = u.support_radius().unwrap_or(f64::NAN);
            if !end.is_finite() {
                return Err(invalid(
                    "semiclassical integral of a tabulated symbol needs compact support",
                ));
            }
            polar_integral(end, &integrand)
        }
    };
    Ok(pref * integral)
}

fn radial_integral(end: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = PanelRule::new(&graded_breaks(end, 0.5), 16);
    2.0 * PI * rule.integrate(|r| r * f(r))
}

fn polar_integral(end: f64, f: &(dyn Fn([f64; 2]) -> f64 + Sync)) -> f64 {
    let rule = PanelRule::new(&graded_breaks(end, 0.5), 16);
    let n = 256;
    let sum: f64 = (0..n)
        .into_par_iter()
        .map(|l| {
            let th = 2.0 * PI * l as f64 / n as f64;
            let (c, s) = (th.cos(), th.sin());
            rule.integrate(|r| r * f([r * c, r * s]))
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    sum * 2.0 * PI / n as f64
}

/// Effective `ξ` corridors at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsfCorridor {
    pub energy: f64,
    pub epsilon: f64,
    pub sign: Sign,
    pub below_lo: f64,
    pub below_hi: f64,
    pub above_lo: f64,
    pub above_hi: f64,
}

/// Corridors for `H0 ± V`; below the threshold `ξ` vanishes for `+V`.
pub fn ssf_corridor(
    basis: &ZeroModeBasis,
    profile: &PerturbationProfile,
    spec: &EffectiveSpectrum,
    energy: f64,
    epsilon: f64,
    sign: Sign,
) -> Result<SsfCorridor> {
    let (below_lo, below_hi) = match sign {
        Sign::Minus => xi_below(spec, energy, epsilon)?,
        Sign::Plus => {
            check_energy_epsilon(energy, epsilon)?;
            (0.0, 0.0)
        }
    };
    let (above_lo, above_hi) = xi_above(basis, profile, energy, epsilon, sign)?;
    Ok(SsfCorridor {
        energy,
        epsilon,
        sign,
        below_lo,
        below_hi,
        above_lo,
        above_hi,
    })
}

/// Corridors at several energies, computed in parallel, in input order.
pub fn ssf_sweep(
    basis: &ZeroModeBasis,
    profile: &PerturbationProfile,
    spec: &EffectiveSpectrum,
    energies: &[f64],
    epsilon: f64,
    sign: Sign,
) -> Result<Vec<SsfCorridor>> {
    energies
        .par_iter()
        .map(|&e| ssf_corridor(basis, profile, spec, e, epsilon, sign))
        .collect()
}

/// One energy of a Levinson sweep for `H0 − V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevinsonRow {
    pub energy: f64,
    /// `|ξ(E)|` from the truncated arctan trace.
    pub numerator: f64,
    /// Linearised contribution `(1/π)(Tr pWp − Σ_{j<K} μ_j)/(2√E)` of the
    /// eigenvalues beyond the truncation.
    pub tail: f64,
    /// `|ξ(−E)|`.
    pub denominator: f64,
    /// `(numerator + tail)/denominator`; `None` when the denominator vanishes.
    pub ratio: Option<f64>,
    /// `numerator/denominator`.
    pub raw_ratio: Option<f64>,
    /// Whether the reduced trace replaced the block computation.
    pub reduced: bool,
    /// `|full − reduced|/|reduced|` where the block trace was computed.
    pub reduction_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevinsonReport {
    pub rows: Vec<LevinsonRow>,
    pub predicted: f64,
}

/// Ratios `ξ(E; H0 − V)/ξ(−E; H0 − V)` along a decreasing sweep.
///
/// The block trace is computed until it agrees with the reduced one to
/// [`TILDE_CROSSOVER`]; later energies use the reduced trace.
pub fn levinson_ratio(
    basis: &ZeroModeBasis,
    profile: &PerturbationProfile,
    energies: &[f64],
    epsilon: f64,
) -> Result<LevinsonReport> {
    if energies.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid(
            "Levinson sweep energies must be strictly decreasing",
        ));
    }
    let spec = effective_spectrum(basis, profile)?;
    let full_trace = profile
        .w_symbol()?
        .integral()
        .map(|w| basis.b0() / (2.0 * PI) * w);
    let mut reduced = false;
    let mut rows = Vec::with_capacity(energies.len());
    for &energy in energies {
        check_energy_epsilon(energy, epsilon)?;
        let s = 2.0 * energy.sqrt();
        let (blo, bhi) = xi_below(&spec, energy, epsilon)?;
        let denominator = 0.5 * (blo + bhi).abs();
        let tilde = arctan_trace(&spec.mu, s);
        let (numerator, reduction_gap) = if reduced {
            (tilde, None)
        } else {
            let block = block_spectrum(basis, profile, energy)?;
            let (lo, hi) = xi_above_from(&block.nu, energy, epsilon, Sign::Minus)?;
            let full = 0.5 * (lo + hi).abs();
            let gap = if tilde > 0.0 {
                (full - tilde).abs() / tilde
            } else {
                f64::NAN
            };
            if gap < TILDE_CROSSOVER {
                reduced = true;
            }
            (full, Some(gap))
        };
        let tail = match full_trace {
            Some(t) => (t - spec.trace).max(0.0) / (PI * s),
            None => 0.0,
        };
        if let Some(&last) = spec.mu.last() {
            if last > 0.1 * s {
                warn!("smallest retained eigenvalue {last:e} is not small against 2√E = {s:e}; truncation tail is inaccurate");
            }
        }
        let (ratio, raw_ratio) = if denominator > 0.0 {
            (
                Some((numerator + tail) / denominator),
                Some(numerator / denominator),
            )
        } else {
            warn!("no eigenvalue of pWp above 2√E at E = {energy:e}; ratio undefined");
            (None, None)
        };
        rows.push(LevinsonRow {
            energy,
            numerator,
            tail,
            denominator,
            ratio,
            raw_ratio,
            reduced: reduction_gap.is_none(),
            reduction_gap,
        });
    }
    Ok(LevinsonReport {
        rows,
        predicted: profile.decay_class.levinson_limit(),
    })
}

/// Constant-field integrated density of states `(b0/2π) #{q ≥ 0 : 2 b0 q < E}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdsValue {
    pub value: f64,
    /// `E` sits on a Landau level `2 b0 q`; `value` is then the left limit.
    pub on_landau_level: bool,
}

pub fn ids_constant_field(energy: f64, b0: f64) -> Result<IdsValue> {
    if !(b0 > 0.0 && b0.is_finite()) {
        return Err(invalid(format!("b0 must be positive, got {b0}")));
    }
    if !energy.is_finite() {
        return Err(invalid(format!("energy must be finite, got {energy}")));
    }
    if energy <= 0.0 {
        return Ok(IdsValue {
            value: 0.0,
            on_landau_level: energy == 0.0,
        });
    }
    let levels = energy / (2.0 * b0);
    let count = levels.ceil();
    Ok(IdsValue {
        value: b0 / (2.0 * PI) * count,
        on_landau_level: levels == count,
    })
}
