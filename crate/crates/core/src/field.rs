//! Admissible magnetic fields `b = b0 + b̃` with a finite Fourier charge.
//!
//! The background is `b̃(x) = Σ c_n exp(i λ_n·x)`, its Poisson potential
//! `φ̃(x) = −Σ |λ_n|^{-2} c_n exp(i λ_n·x)` satisfies `Δφ̃ = b̃`, and the full
//! potential is `φ = b0|x|²/4 + φ̃`. Every evaluation is an exact finite sum.

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// One atom of the Fourier charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierMode {
    pub frequency: [f64; 2],
    pub coefficient: Complex64,
}

impl FourierMode {
    pub fn new(frequency: [f64; 2], coefficient: Complex64) -> Result<Self> {
        if !(frequency[0].is_finite() && frequency[1].is_finite()) {
            return Err(invalid("mode frequency must be finite"));
        }
        if frequency == [0.0, 0.0] {
            return Err(invalid("mode frequency must be nonzero"));
        }
        if !(coefficient.re.is_finite() && coefficient.im.is_finite()) {
            return Err(invalid("mode coefficient must be finite"));
        }
        Ok(Self {
            frequency,
            coefficient,
        })
    }

    pub fn frequency_norm_sqr(&self) -> f64 {
        self.frequency[0] * self.frequency[0] + self.frequency[1] * self.frequency[1]
    }

    #[inline]
    fn phase(&self, x: [f64; 2]) -> Complex64 {
        let arg = self.frequency[0] * x[0] + self.frequency[1] * x[1];
        Complex64::new(arg.cos(), arg.sin())
    }
}

/// Magnetic field of constant direction with mean `b0 > 0` and a real,
/// finitely supported Fourier background.
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticField {
    b0: f64,
    modes: Vec<FourierMode>,
    // −|λ|^{-2} c, cached for the potential.
    potential_coefficients: Vec<Complex64>,
}

impl MagneticField {
    pub fn new(b0: f64, modes: Vec<FourierMode>) -> Result<Self> {
        if !(b0.is_finite() && b0 > 0.0) {
            return Err(invalid(format!("b0 must be positive, got {b0}")));
        }
        for (i, m) in modes.iter().enumerate() {
            if m.frequency == [0.0, 0.0] {
                return Err(invalid("mode frequency must be nonzero"));
            }
            if modes[..i].iter().any(|o| o.frequency == m.frequency) {
                return Err(invalid(format!(
                    "duplicate frequency ({}, {})",
                    m.frequency[0], m.frequency[1]
                )));
            }
        }
        for m in &modes {
            let partner = [-m.frequency[0], -m.frequency[1]];
            let tol = 1e-12 * m.coefficient.norm().max(1.0);
            let paired = modes.iter().any(|o| {
                o.frequency == partner && (o.coefficient - m.coefficient.conj()).norm() <= tol
            });
            if !paired {
                return Err(invalid(format!(
                    "mode at frequency ({}, {}) lacks its conjugate partner; the background must be real",
                    m.frequency[0], m.frequency[1]
                )));
            }
        }
        let potential_coefficients = modes
            .iter()
            .map(|m| -m.coefficient / m.frequency_norm_sqr())
            .collect();
        Ok(Self {
            b0,
            modes,
            potential_coefficients,
        })
    }

    /// Constant field `b0`, no background.
    pub fn constant(b0: f64) -> Result<Self> {
        Self::new(b0, Vec::new())
    }

    /// `b̃(x) = 2·amplitude·cos(λ·x)`, i.e. the pair `(λ, amplitude)`, `(−λ, amplitude)`.
    pub fn cosine_pair(b0: f64, frequency: [f64; 2], amplitude: f64) -> Result<Self> {
        let c = Complex64::new(amplitude, 0.0);
        Self::new(
            b0,
            vec![
                FourierMode::new(frequency, c)?,
                FourierMode::new([-frequency[0], -frequency[1]], c)?,
            ],
        )
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn modes(&self) -> &[FourierMode] {
        &self.modes
    }

    pub fn is_constant(&self) -> bool {
        self.modes
            .iter()
            .all(|m| m.coefficient == Complex64::new(0.0, 0.0))
    }

    /// Largest `|λ|` over the modes with nonzero coefficient (0 for a constant field).
    pub fn max_frequency(&self) -> f64 {
        self.modes
            .iter()
            .filter(|m| m.coefficient.norm() > 0.0)
            .map(|m| m.frequency_norm_sqr().sqrt())
            .fold(0.0, f64::max)
    }

    /// One period of the slowest mode; the default half-width of the
    /// oscillation grid. Falls back to 1 for a constant field.
    pub fn period_radius(&self) -> f64 {
        let slowest = self
            .modes
            .iter()
            .filter(|m| m.coefficient.norm() > 0.0)
            .map(|m| m.frequency_norm_sqr().sqrt())
            .fold(f64::INFINITY, f64::min);
        if slowest.is_finite() {
            2.0 * std::f64::consts::PI / slowest
        } else {
            1.0
        }
    }

    /// `Σ |c|(1 + |λ|^{-2})`.
    pub fn charge_norm(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.coefficient.norm() * (1.0 + 1.0 / m.frequency_norm_sqr()))
            .sum()
    }

    pub fn btilde_complex(&self, x: [f64; 2]) -> Complex64 {
        self.modes.iter().map(|m| m.coefficient * m.phase(x)).sum()
    }

    pub fn phitilde_complex(&self, x: [f64; 2]) -> Complex64 {
        self.modes
            .iter()
            .zip(&self.potential_coefficients)
            .map(|(m, c)| c * m.phase(x))
            .sum()
    }

    /// Real part of `φ̃(x)`; the imaginary part cancels pairwise.
    #[inline]
    pub fn phitilde(&self, x: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in self.modes.iter().zip(&self.potential_coefficients) {
            let arg = m.frequency[0] * x[0] + m.frequency[1] * x[1];
            acc += c.re * arg.cos() - c.im * arg.sin();
        }
        acc
    }

    pub fn phi0(&self, x: [f64; 2]) -> f64 {
        0.25 * self.b0 * (x[0] * x[0] + x[1] * x[1])
    }

    pub fn sample(&self, x: [f64; 2]) -> PotentialSample {
        let phitilde = self.phitilde(x);
        PotentialSample {
            point: x,
            btilde: eval_btilde(self, x),
            phitilde,
            phi: self.phi0(x) + phitilde,
        }
    }
}

/// Field and potentials at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSample {
    pub point: [f64; 2],
    pub btilde: f64,
    pub phitilde: f64,
    pub phi: f64,
}

pub fn eval_btilde(field: &MagneticField, x: [f64; 2]) -> f64 {
    field.btilde_complex(x).re
}

pub fn eval_phitilde(field: &MagneticField, x: [f64; 2]) -> f64 {
    field.phitilde(x)
}

/// Grid estimate of `inf φ̃`, `sup φ̃` and `osc φ̃ = sup − inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation {
    pub inf: f64,
    pub sup: f64,
    pub osc: f64,
}

impl Oscillation {
    pub const ZERO: Oscillation = Oscillation {
        inf: 0.0,
        sup: 0.0,
        osc: 0.0,
    };
}

/// Samples `φ̃` on a `grid_density × grid_density` uniform grid over
/// `[−radius, radius]²` (endpoints included).
pub fn osc_phitilde(
    field: &MagneticField,
    radius: f64,
    grid_density: usize,
) -> Result<Oscillation> {
    if grid_density < 2 {
        return Err(invalid(format!(
            "grid density must be at least 2, got {grid_density}"
        )));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid(format!(
            "oscillation radius must be positive, got {radius}"
        )));
    }
    if field.modes().is_empty() {
        return Ok(Oscillation::ZERO);
    }
    let step = 2.0 * radius / (grid_density - 1) as f64;
    let mut inf = f64::INFINITY;
    let mut sup = f64::NEG_INFINITY;
    for i in 0..grid_density {
        let x0 = -radius + step * i as f64;
        for j in 0..grid_density {
            let v = field.phitilde([x0, -radius + step * j as f64]);
            inf = inf.min(v);
            sup = sup.max(v);
        }
    }
    Ok(Oscillation {
        inf,
        sup,
        osc: sup - inf,
    })
}

/// Lower edge `2 b0 exp(−2 osc φ̃)` of the nonzero spectrum of the transverse operator.
pub fn gap_constant(field: &MagneticField, osc: f64) -> Result<f64> {
    if !(osc >= 0.0) {
        return Err(invalid(format!(
            "oscillation must be nonnegative, got {osc}"
        )));
    }
    Ok(2.0 * field.b0() * (-2.0 * osc).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn pair(freq: f64) -> MagneticField {
        MagneticField::cosine_pair(1.0, [freq, 0.0], 1.0).unwrap()
    }

    #[test]
    fn empty_charge_is_zero() {
        let f = MagneticField::constant(1.3).unwrap();
        for x in [[0.0, 0.0], [1.5, -2.0], [40.0, 3.0]] {
            assert_eq!(eval_btilde(&f, x), 0.0);
            assert_eq!(eval_phitilde(&f, x), 0.0);
        }
        assert_eq!(osc_phitilde(&f, 3.0, 16).unwrap(), Oscillation::ZERO);
    }

    #[test]
    fn cosine_pair_values() {
        let f = pair(1.0);
        assert_relative_eq!(eval_btilde(&f, [0.0, 0.0]), 2.0, epsilon = 1e-15);
        assert_relative_eq!(eval_btilde(&f, [PI / 3.0, 0.0]), 1.0, epsilon = 1e-14);
        assert_relative_eq!(eval_phitilde(&f, [0.0, 0.0]), -2.0, epsilon = 1e-15);
        assert_relative_eq!(eval_phitilde(&pair(2.0), [0.0, 0.0]), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn sample_adds_phi0() {
        let f = MagneticField::cosine_pair(2.0, [1.0, 0.0], 1.0).unwrap();
        let s = f.sample([1.0, 1.0]);
        assert_relative_eq!(s.phi, 2.0 * 2.0 / 4.0 + s.phitilde, epsilon = 1e-15);
    }

    #[test]
    fn oscillation_of_single_cosine() {
        let o = osc_phitilde(&pair(1.0), 2.0 * PI, 512).unwrap();
        assert!((o.osc - 4.0).abs() < 1e-3, "osc = {}", o.osc);
        let o = osc_phitilde(&pair(2.0), 2.0 * PI, 512).unwrap();
        assert!((o.osc - 1.0).abs() < 1e-3, "osc = {}", o.osc);
    }

    #[test]
    fn oscillation_rejects_coarse_grid() {
        assert!(matches!(
            osc_phitilde(&pair(1.0), 1.0, 1),
            Err(crate::Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn gap_constant_values() {
        let f1 = MagneticField::constant(1.0).unwrap();
        let f2 = MagneticField::constant(2.0).unwrap();
        assert_eq!(gap_constant(&f1, 0.0).unwrap(), 2.0);
        assert_eq!(gap_constant(&f2, 0.0).unwrap(), 4.0);
        assert_relative_eq!(
            gap_constant(&f1, 1.0).unwrap(),
            0.270_670_566_473_225_4,
            epsilon = 1e-15
        );
        assert!(gap_constant(&f1, -0.1).is_err());
    }

    #[test]
    fn rejects_unpaired_and_degenerate_modes() {
        let c = Complex64::new(1.0, 0.5);
        let lone = FourierMode::new([1.0, 0.0], c).unwrap();
        assert!(MagneticField::new(1.0, vec![lone]).is_err());
        // partner must carry the conjugate coefficient
        let wrong = FourierMode::new([-1.0, 0.0], c).unwrap();
        assert!(MagneticField::new(1.0, vec![lone, wrong]).is_err());
        let right = FourierMode::new([-1.0, 0.0], c.conj()).unwrap();
        assert!(MagneticField::new(1.0, vec![lone, right]).is_ok());
        assert!(MagneticField::new(1.0, vec![lone, right, lone]).is_err());
        assert!(FourierMode::new([0.0, 0.0], c).is_err());
        assert!(MagneticField::new(0.0, vec![]).is_err());
    }

    #[test]
    fn zero_coefficient_modes_act_as_constant() {
        let f = MagneticField::cosine_pair(1.0, [1.0, 1.0], 0.0).unwrap();
        assert!(f.is_constant());
        assert_eq!(eval_phitilde(&f, [0.3, 0.7]), 0.0);
        assert_eq!(f.max_frequency(), 0.0);
    }
}
