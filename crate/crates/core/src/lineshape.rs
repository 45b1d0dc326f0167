//! The two response kernels distinguishing the initial conditions.
//!
//! Psi_1(t) = exp(-xi(t) - i S(t)) covers the total-equilibrium case. The
//! factorized case replaces it by the two-time kernel
//!
//! ```text
//! Psi_2(t, t') = Psi_1(t - t') * exp(-2i (S(t') - S(t)))
//! ```
//!
//! whose extra factor is a pure phase: the decoherence envelope of the two
//! cases is identical, only the winding differs.

use num_complex::Complex64;

use crate::bath::{sine_kernel, BathSpec, KernelCache, SpectralDensity};
use crate::error::{Error, Result};
use crate::quadrature::QuadSpec;

/// Evaluator for the unit-modulus phase factor of Psi_2.
#[derive(Debug, Clone)]
pub enum TwoTimePhase {
    /// exp(-2is (arctan(w_c t') - arctan(w_c t))).
    Ohmic { s: f64, omega_c: f64 },
    /// General route through the sine-kernel quadrature.
    Quadrature { bath: BathSpec, quad: QuadSpec },
}

impl TwoTimePhase {
    /// Pick the closed form for Ohmic baths, quadrature otherwise.
    pub fn for_bath(bath: &BathSpec, quad: &QuadSpec) -> Self {
        match bath.density {
            SpectralDensity::Ohmic { s, omega_c } => Self::Ohmic { s, omega_c },
            _ => Self::Quadrature {
                bath: bath.clone(),
                quad: *quad,
            },
        }
    }

    /// Force the quadrature route regardless of density; used to cross-check
    /// the Ohmic closed form.
    pub fn quadrature(bath: &BathSpec, quad: &QuadSpec) -> Self {
        Self::Quadrature {
            bath: bath.clone(),
            quad: *quad,
        }
    }
}

/// Cached Psi_1 at grid index k.
pub fn psi1(cache: &KernelCache, k: usize) -> Result<Complex64> {
    cache
        .psi1()
        .get(k)
        .copied()
        .ok_or(Error::IndexOutOfRange {
            index: k,
            len: cache.len(),
        })
}

/// exp(-2i (S(t') - S(t))) for t >= t' >= 0. Unit modulus by construction.
pub fn two_time_phase(phase: &TwoTimePhase, t: f64, t_prime: f64) -> Result<Complex64> {
    if !(t_prime >= 0.0) || t_prime.is_nan() || t.is_nan() {
        return Err(Error::InvalidInput(format!(
            "two_time_phase needs t >= t' >= 0, got t = {t}, t' = {t_prime}"
        )));
    }
    if t_prime > t {
        return Err(Error::InvalidTimeOrder { t, t_prime });
    }
    let arg = match phase {
        TwoTimePhase::Ohmic { s, omega_c } => {
            2.0 * s * ((omega_c * t).atan() - (omega_c * t_prime).atan())
        }
        TwoTimePhase::Quadrature { bath, quad } => {
            2.0 * (sine_kernel(bath, t, quad)? - sine_kernel(bath, t_prime, quad)?)
        }
    };
    Ok(Complex64::from_polar(1.0, arg))
}

/// Psi_2(t, t') for grid-aligned times: Psi_1(t - t') times the two-time
/// phase. |Psi_2(t, t')| = |Psi_1(t - t')| always.
pub fn psi2(
    cache: &KernelCache,
    phase: &TwoTimePhase,
    t: f64,
    t_prime: f64,
) -> Result<Complex64> {
    if t_prime > t {
        return Err(Error::InvalidTimeOrder { t, t_prime });
    }
    let k = cache.grid().index_of(t)?;
    let j = cache.grid().index_of(t_prime)?;
    Ok(cache.psi1()[k - j] * two_time_phase(phase, t, t_prime)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{build_kernel_cache, xi};
    use crate::grid::TimeGrid;

    fn fig1_bath() -> BathSpec {
        BathSpec::ohmic(1.0, 0.2, 1.0).unwrap()
    }

    fn cache_for(bath: &BathSpec) -> KernelCache {
        let grid = TimeGrid::new(10.0, 0.5).unwrap();
        build_kernel_cache(bath, &grid, &QuadSpec::default()).unwrap()
    }

    #[test]
    fn psi1_at_origin_is_one() {
        let cache = cache_for(&fig1_bath());
        assert_eq!(psi1(&cache, 0).unwrap(), Complex64::new(1.0, 0.0));
        assert!(matches!(
            psi1(&cache, 999),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn psi1_zero_coupling() {
        let bath = BathSpec::ohmic(0.0, 0.2, 1.0).unwrap();
        let cache = cache_for(&bath);
        for k in 0..cache.len() {
            assert_eq!(psi1(&cache, k).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn psi1_envelope_matches_xi() {
        let bath = fig1_bath();
        let cache = cache_for(&bath);
        let k = cache.grid().index_of(5.0).unwrap();
        let x = xi(&bath, 5.0, &QuadSpec::default()).unwrap();
        let z = psi1(&cache, k).unwrap();
        assert!((z.norm() - (-x).exp()).abs() < 1e-14);
    }

    #[test]
    fn phase_is_identity_at_equal_times() {
        let phase = TwoTimePhase::for_bath(&fig1_bath(), &QuadSpec::default());
        for t in [0.0, 1.0, 7.3] {
            assert_eq!(
                two_time_phase(&phase, t, t).unwrap(),
                Complex64::new(1.0, 0.0)
            );
        }
    }

    #[test]
    fn phase_zero_coupling() {
        let bath = BathSpec::ohmic(0.0, 0.2, 1.0).unwrap();
        let phase = TwoTimePhase::for_bath(&bath, &QuadSpec::default());
        assert_eq!(
            two_time_phase(&phase, 4.0, 1.0).unwrap(),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn phase_argument_at_known_point() {
        // t = 10, t' = 0: exp(+2i arctan(2)).
        let phase = TwoTimePhase::for_bath(&fig1_bath(), &QuadSpec::default());
        let z = two_time_phase(&phase, 10.0, 0.0).unwrap();
        assert!((z.norm() - 1.0).abs() < 1e-15);
        assert!((z.arg() - 2.0 * 2.0_f64.atan()).abs() < 1e-14);
    }

    #[test]
    fn phase_rejects_reversed_times() {
        let phase = TwoTimePhase::for_bath(&fig1_bath(), &QuadSpec::default());
        assert!(matches!(
            two_time_phase(&phase, 1.0, 2.0),
            Err(Error::InvalidTimeOrder { .. })
        ));
        assert!(two_time_phase(&phase, 1.0, -0.5).is_err());
    }

    #[test]
    fn ohmic_phase_agrees_with_quadrature_route() {
        let bath = fig1_bath();
        let analytic = TwoTimePhase::for_bath(&bath, &QuadSpec::default());
        let numeric = TwoTimePhase::quadrature(&bath, &QuadSpec::default());
        for (t, tp) in [(1.0, 0.0), (5.0, 2.5), (20.0, 19.0), (80.0, 3.0)] {
            let a = two_time_phase(&analytic, t, tp).unwrap();
            let n = two_time_phase(&numeric, t, tp).unwrap();
            assert!((a - n).norm() < 1e-8, "t = {t}, t' = {tp}");
        }
    }

    #[test]
    fn psi2_reduces_to_identity() {
        let bath = fig1_bath();
        let cache = cache_for(&bath);
        let phase = TwoTimePhase::for_bath(&bath, &QuadSpec::default());
        assert_eq!(
            psi2(&cache, &phase, 3.0, 3.0).unwrap(),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn psi2_modulus_equals_psi1_envelope() {
        let bath = fig1_bath();
        let cache = cache_for(&bath);
        let phase = TwoTimePhase::for_bath(&bath, &QuadSpec::default());
        for (k, j) in [(4, 1), (10, 10), (19, 0), (15, 7)] {
            let t = cache.grid().value(k);
            let tp = cache.grid().value(j);
            let z2 = psi2(&cache, &phase, t, tp).unwrap();
            let z1 = psi1(&cache, k - j).unwrap();
            assert!(
                (z2.norm() - z1.norm()).abs() <= 2.0 * f64::EPSILON,
                "k = {k}, j = {j}"
            );
        }
    }

    #[test]
    fn psi2_requires_grid_times() {
        let bath = fig1_bath();
        let cache = cache_for(&bath);
        let phase = TwoTimePhase::for_bath(&bath, &QuadSpec::default());
        assert!(matches!(
            psi2(&cache, &phase, 3.1, 0.5),
            Err(Error::GridMismatch(_))
        ));
    }
}
