//! TOML run configuration.

use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use pauli_ssf::field::{osc_phitilde, FourierMode, MagneticField, Oscillation};
use pauli_ssf::ssf::{DecayClass, Longitudinal, PerturbationProfile};
use pauli_ssf::toeplitz::{CosineSeries, Sign, SymbolU};
use pauli_ssf::zeromodes::{QuadratureRule, ZeroModeBasis};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub epsilon: f64,
    pub sign: SignSpec,
    pub field: FieldSpec,
    pub basis: BasisSpec,
    pub symbol: SymbolSpec,
    pub perturbation: PerturbationSpec,
    pub sweep: SweepSpec,
    pub kernel: KernelSpec,
    pub osc: OscSpec,
    pub selfcheck: SelfcheckSpec,
    pub output: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            sign: SignSpec::Minus,
            field: FieldSpec::default(),
            basis: BasisSpec::default(),
            symbol: SymbolSpec::default(),
            perturbation: PerturbationSpec::default(),
            sweep: SweepSpec::default(),
            kernel: KernelSpec::default(),
            osc: OscSpec::default(),
            selfcheck: SelfcheckSpec::default(),
            output: OutputSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignSpec {
    Plus,
    Minus,
}

impl From<SignSpec> for Sign {
    fn from(s: SignSpec) -> Sign {
        match s {
            SignSpec::Plus => Sign::Plus,
            SignSpec::Minus => Sign::Minus,
        }
    }
}

/// Mean field and background. `modes` lists every Fourier atom including
/// conjugate partners; each `cosines` entry adds the pair for `2a cos(λ·x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSpec {
    pub b0: f64,
    pub modes: Vec<ModeSpec>,
    pub cosines: Vec<CosineSpec>,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self {
            b0: 1.0,
            modes: Vec::new(),
            cosines: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub frequency: [f64; 2],
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineSpec {
    pub frequency: [f64; 2],
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSpec {
    pub size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radial_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angular_nodes: Option<usize>,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self {
            size: 32,
            radial_nodes: None,
            angular_nodes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SymbolSpec {
    /// `amplitude · exp(−eta |x|^{2 beta})`.
    Gaussian {
        #[serde(default = "one")]
        beta: f64,
        #[serde(default = "one")]
        eta: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `scale · ⟨x⟩^{−alpha} · Σ profile[n] cos(nθ)`.
    Power {
        alpha: f64,
        #[serde(default = "unit_profile")]
        profile: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `height · 𝟙{|x| ≤ radius}`.
    Disc {
        radius: f64,
        #[serde(default = "one")]
        height: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn unit_profile() -> Vec<f64> {
    vec![1.0]
}

impl Default for SymbolSpec {
    fn default() -> Self {
        SymbolSpec::Gaussian {
            beta: 1.0,
            eta: 1.0,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LongitudinalSpec {
    Gaussian { sigma: f64 },
    Boxcar { half_width: f64 },
    Power { m3: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DecaySpec {
    Power { m: f64 },
    Exponential { beta: f64, eta: f64 },
    Compact,
}

/// Only the spin-up entry `v11 = U·g` enters the effective operators; the
/// other matrix entries are accepted and ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSpec {
    pub longitudinal: LongitudinalSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_class: Option<DecaySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v12: Option<toml::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v21: Option<toml::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v22: Option<toml::Value>,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            longitudinal: LongitudinalSpec::Boxcar { half_width: 1.0 },
            decay_class: None,
            v12: None,
            v21: None,
            v22: None,
        }
    }
}

/// Energies (or thresholds for `toeplitz`) from `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub log: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            start: 1e-2,
            stop: 1e-4,
            points: 5,
            log: true,
        }
    }
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if n == 1 {
                    return self.start;
                }
                let t = i as f64 / (n - 1) as f64;
                if i == n - 1 {
                    self.stop
                } else if self.log {
                    let (a, b) = (self.start.log10(), self.stop.log10());
                    10f64.powf(a + (b - a) * t)
                } else {
                    self.start + (self.stop - self.start) * t
                }
            })
            .collect()
    }
}

/// Square grid of `points × points` nodes over `[−radius, radius]²`, clipped
/// to the disc; `radius` defaults to the basis evaluation radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSpec {
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            points: 21,
            radius: None,
        }
    }
}

/// Grid used to estimate `osc φ̃`; `radius` defaults to one period of the
/// slowest mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub density: usize,
}

impl Default for OscSpec {
    fn default() -> Self {
        Self {
            radius: None,
            density: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelfcheckSpec {
    pub trials: usize,
    pub energy: f64,
}

impl Default for SelfcheckSpec {
    fn default() -> Self {
        Self {
            trials: 200,
            energy: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: ".".into(),
            stem: None,
        }
    }
}

fn config_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(config_error)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Canonical TOML form; parsing it yields an equal config.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Re-checks every numeric constraint by building the domain objects.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::Config(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        self.magnetic_field()?;
        self.transverse()?;
        self.longitudinal()?;
        if self.basis.size == 0 {
            return Err(CliError::Config("basis.size must be positive".into()));
        }
        let s = &self.sweep;
        if !(s.start.is_finite() && s.stop.is_finite()) {
            return Err(CliError::Config("sweep endpoints must be finite".into()));
        }
        if s.log && !(s.start > 0.0 && s.stop > 0.0) {
            return Err(CliError::Config(
                "log-spaced sweeps need positive endpoints".into(),
            ));
        }
        if let Some(r) = self.kernel.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::Config(format!(
                    "kernel.radius must be positive, got {r}"
                )));
            }
        }
        if let Some(r) = self.osc.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::Config(format!(
                    "osc.radius must be positive, got {r}"
                )));
            }
        }
        if self.osc.density < 2 {
            return Err(CliError::Config("osc.density must be at least 2".into()));
        }
        if !(self.selfcheck.energy > 0.0) {
            return Err(CliError::Config("selfcheck.energy must be positive".into()));
        }
        Ok(())
    }

    pub fn magnetic_field(&self) -> Result<MagneticField, CliError> {
        let mut modes = Vec::new();
        for m in &self.field.modes {
            modes.push(
                FourierMode::new(m.frequency, Complex64::new(m.re, m.im)).map_err(config_error)?,
            );
        }
        for c in &self.field.cosines {
            let a = Complex64::new(c.amplitude, 0.0);
            let [l1, l2] = c.frequency;
            modes.push(FourierMode::new([l1, l2], a).map_err(config_error)?);
            modes.push(FourierMode::new([-l1, -l2], a).map_err(config_error)?);
        }
        MagneticField::new(self.field.b0, modes).map_err(config_error)
    }

    pub fn basis(&self, field: MagneticField) -> Result<ZeroModeBasis, CliError> {
        let size = self.basis.size;
        match (self.basis.radial_nodes, self.basis.angular_nodes) {
            (None, None) => Ok(ZeroModeBasis::new(field, size)?),
            (radial, angular) => {
                let default = QuadratureRule::for_basis(&field, size)?;
                let rule = QuadratureRule::laguerre(
                    radial.unwrap_or(default.radial_nodes().len()),
                    angular.unwrap_or(default.angular_count()),
                )
                .map_err(config_error)?;
                Ok(ZeroModeBasis::with_rule(field, size, rule)?)
            }
        }
    }

    pub fn transverse(&self) -> Result<SymbolU, CliError> {
        match &self.symbol {
            SymbolSpec::Gaussian {
                beta,
                eta,
                amplitude,
            } => SymbolU::gaussian(*beta, *eta, *amplitude),
            SymbolSpec::Power {
                alpha,
                profile,
                scale,
            } => CosineSeries::new(profile.clone()).and_then(|p| SymbolU::power(*alpha, p, *scale)),
            SymbolSpec::Disc { radius, height } => SymbolU::disc(*radius, *height),
        }
        .map_err(config_error)
    }

    pub fn longitudinal(&self) -> Result<Longitudinal, CliError> {
        match self.perturbation.longitudinal {
            LongitudinalSpec::Gaussian { sigma } => Longitudinal::gaussian(sigma),
            LongitudinalSpec::Boxcar { half_width } => Longitudinal::boxcar(half_width),
            LongitudinalSpec::Power { m3 } => Longitudinal::power(m3),
        }
        .map_err(config_error)
    }

    pub fn profile(&self) -> Result<PerturbationProfile, CliError> {
        let u = self.transverse()?;
        let g = self.longitudinal()?;
        match self.perturbation.decay_class {
            None => PerturbationProfile::inferred(u, g),
            Some(d) => {
                let class = match d {
                    DecaySpec::Power { m } => DecayClass::Power { m },
                    DecaySpec::Exponential { beta, eta } => DecayClass::Exponential { beta, eta },
                    DecaySpec::Compact => DecayClass::Compact,
                };
                PerturbationProfile::new(u, g, class)
            }
        }
        .map_err(config_error)
    }

    /// Logs a notice for accepted but unused perturbation entries.
    pub fn note_ignored_entries(&self) {
        let p = &self.perturbation;
        for (name, v) in [("v12", &p.v12), ("v21", &p.v21), ("v22", &p.v22)] {
            if v.is_some() {
                log::info!("perturbation.{name} ignored: the zero modes are spin-up, so only v11 enters the effective operators");
            }
        }
    }

    pub fn oscillation(&self, field: &MagneticField) -> Result<Oscillation, CliError> {
        let radius = self
            .osc
            .radius
            .unwrap_or_else(|| field.period_radius().max(TAU));
        osc_phitilde(field, radius, self.osc.density).map_err(config_error)
    }
}
