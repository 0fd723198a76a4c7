use std::sync::OnceLock;

use pauli_ssf::field::MagneticField;
use pauli_ssf::linalg::hermitian_eigenvalues;
use pauli_ssf::ssf::*;
use pauli_ssf::toeplitz::{count_above, toeplitz_matrix, Sign, SymbolU};
use pauli_ssf::zeromodes::ZeroModeBasis;
use proptest::prelude::*;

struct Fixture {
    basis: ZeroModeBasis,
    profile: PerturbationProfile,
    spec: EffectiveSpectrum,
}

/// Gaussian transverse symbol times a boxcar on a cosine background.
fn fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let field = MagneticField::cosine_pair(2.0, [1.0, 0.0], 0.5).unwrap();
        let basis = ZeroModeBasis::new(field, 32).unwrap();
        let profile = PerturbationProfile::inferred(
            SymbolU::gaussian(1.0, 1.0, 1.0).unwrap(),
            Longitudinal::boxcar(1.0).unwrap(),
        )
        .unwrap();
        let spec = effective_spectrum(&basis, &profile).unwrap();
        Fixture {
            basis,
            profile,
            spec,
        }
    })
}

#[test]
fn block_trace_equals_reduced_trace() {
    let f = fixture();
    for e in [1e-2, 1e-4, 1e-6] {
        let block = block_spectrum(&f.basis, &f.profile, e).unwrap();
        let rel = (block.trace - f.spec.trace()).abs() / f.spec.trace();
        assert!(
            rel < 1e-10,
            "E = {e}: {} vs {}",
            block.trace,
            f.spec.trace()
        );
        let sum: f64 = block.nu.iter().sum();
        assert!((sum - f.spec.mu().iter().sum::<f64>()).abs() < 1e-10 * f.spec.trace());
    }
}

#[test]
fn explicit_scaled_matrix_gives_identical_counts() {
    let f = fixture();
    let t = toeplitz_matrix(&f.basis, &f.profile.w_symbol().unwrap()).unwrap();
    for e in [3e-3, 1e-2, 0.05, 0.2] {
        let scaled = t.matrix() / nalgebra::Complex::new(2.0 * f64::sqrt(e), 0.0);
        let omega = hermitian_eigenvalues(&scaled);
        for eps in [0.3, 0.05, 1e-6] {
            let (lo, hi) = xi_below(&f.spec, e, eps).unwrap();
            assert_eq!(lo, -(count_above(&omega, 1.0 - eps, Sign::Plus) as f64));
            assert_eq!(hi, -(count_above(&omega, 1.0 + eps, Sign::Plus) as f64));
            let via_scaling = f.spec.omega(e);
            assert_eq!(
                lo,
                -(count_above(&via_scaling, 1.0 - eps, Sign::Plus) as f64)
            );
        }
    }
}

#[test]
fn reduced_gap_shrinks_for_boxcar() {
    let f = fixture();
    let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
        .iter()
        .map(|&e| {
            let (lo, hi) =
                xi_above(&f.basis, &f.profile, e, EPSILON_REFERENCE, Sign::Plus).unwrap();
            let tilde = xi_above_tilde(&f.spec, e, Sign::Plus).unwrap();
            (0.5 * (lo + hi) - tilde).abs() / tilde
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[gaps.len() - 1] < 0.02, "{gaps:?}");
}

#[test]
fn sweep_preserves_order_and_signs() {
    let f = fixture();
    let energies = [0.5, 1e-1, 1e-2, 1e-3];
    let minus = ssf_sweep(&f.basis, &f.profile, &f.spec, &energies, 0.1, Sign::Minus).unwrap();
    let plus = ssf_sweep(&f.basis, &f.profile, &f.spec, &energies, 0.1, Sign::Plus).unwrap();
    for ((m, p), e) in minus.iter().zip(&plus).zip(energies) {
        assert_eq!(m.energy, e);
        assert!(m.below_lo <= m.below_hi && m.below_hi <= 0.0);
        assert!(m.above_lo <= m.above_hi && m.above_hi <= 0.0);
        assert_eq!((p.below_lo, p.below_hi), (0.0, 0.0));
        assert!(0.0 <= p.above_lo && p.above_lo <= p.above_hi);
        assert_eq!((m.above_lo, m.above_hi), (-p.above_hi, -p.above_lo));
    }
}

#[test]
fn vanishing_perturbation_gives_zero_rows() {
    let f = fixture();
    let profile = PerturbationProfile::inferred(
        SymbolU::gaussian(1.0, 1.0, 0.0).unwrap(),
        Longitudinal::gaussian(1.0).unwrap(),
    )
    .unwrap();
    let spec = effective_spectrum(&f.basis, &profile).unwrap();
    assert!(spec.mu().iter().all(|&m| m.abs() < 1e-14));
    let row = ssf_corridor(&f.basis, &profile, &spec, 0.01, 0.1, Sign::Minus).unwrap();
    assert_eq!((row.below_lo, row.below_hi), (0.0, 0.0));
    assert!(row.above_lo.abs() < 1e-12 && row.above_hi.abs() < 1e-12);
    assert_eq!(xi_semiclassical(&profile, 0.01, 2.0).unwrap(), 0.0);
}

#[test]
fn levinson_flags_empty_denominator() {
    let f = fixture();
    let report = levinson_ratio(&f.basis, &f.profile, &[100.0, 1e-3], 1e-6).unwrap();
    assert_eq!(report.rows[0].denominator, 0.0);
    assert!(report.rows[0].ratio.is_none());
    assert!(report.rows[1].ratio.is_some());
    assert_eq!(report.predicted, 0.5);
    assert!(levinson_ratio(&f.basis, &f.profile, &[1e-3, 1e-2], 1e-6).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corridors_are_ordered_and_nested(log_e in -6.0f64..0.0, eps in 1e-3f64..0.9, shrink in 0.01f64..0.99) {
        let f = fixture();
        let e = 10f64.powf(log_e);
        let (lo, hi) = xi_below(&f.spec, e, eps).unwrap();
        let (lo2, hi2) = xi_below(&f.spec, e, eps * shrink).unwrap();
        prop_assert!(lo <= lo2 && lo2 <= hi2 && hi2 <= hi);
        let nu = f.spec.mu();
        let (a, b) = xi_above_from(nu, e, eps, Sign::Minus).unwrap();
        let (a2, b2) = xi_above_from(nu, e, eps * shrink, Sign::Minus).unwrap();
        prop_assert!(a <= a2 && a2 <= b2 && b2 <= b && b <= 0.0);
    }

    #[test]
    fn arctan_trace_strictly_decreases(s in 1e-4f64..10.0, factor in 1.0001f64..10.0, len in 1usize..40) {
        let eigs: Vec<f64> = (0..len).map(|k| 0.5f64.powi(k as i32 + 1)).collect();
        prop_assert!(arctan_trace(&eigs, s * factor) < arctan_trace(&eigs, s));
    }

    #[test]
    fn weights_sum_to_longitudinal_integral(k in 0.0f64..20.0, which in 0usize..3) {
        let g = match which {
            0 => Longitudinal::gaussian(0.7).unwrap(),
            1 => Longitudinal::boxcar(1.3).unwrap(),
            _ => Longitudinal::power(4.0).unwrap(),
        };
        let (c, s) = g.cos2_sin2(k).unwrap();
        prop_assert!(c >= 0.0 && s >= 0.0);
        prop_assert!((c + s - g.integral()).abs() <= 4.0 * f64::EPSILON * g.integral());
    }
}
