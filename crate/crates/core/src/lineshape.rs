//! Weak-probe (second order in Ω₁) fixed-velocity lineshapes.
//!
//! With ρ₂₁ and ρ₃₁ treated to first order in the probe, both level
//! populations share the cascade denominator
//!
//! ```text
//! D = (γ₁₂ + i d₁)(γ₁₃ + i(d₁ + d₂)) + (Ω₂/2)²
//! ```
//!
//! which is quadratic in the molecular velocity. That is what makes the
//! Doppler integral expressible through Faddeeva functions (see
//! [`crate::doppler::average_analytic`]).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouville::EffectiveDetunings;
use crate::model::{DopplerParams, DriveParams, LevelScheme, RateParams};

/// Prefactor of the weak-probe ρ₃₃. Matched once to the peak of the exact
/// steady state for the case-a preset at Ω₁ = Γ₂/20, v_z = 0.
pub const RHO33_PREFACTOR: f64 = 1.1914;
/// Prefactor of the weak-probe ρ₂₂, matched the same way.
pub const RHO22_PREFACTOR: f64 = 1.1912;

/// D at fixed detunings.
pub fn denominator(rates: &RateParams, rabi_2: f64, det: EffectiveDetunings) -> Complex64 {
    let one = Complex64::new(rates.gamma_12, det.d1);
    let two = Complex64::new(rates.gamma_13, det.d1 + det.d2);
    one * two + rabi_2 * rabi_2 / 4.0
}

/// K·(Ω₁Ω₂/4)² / |D|².
pub fn rho33_weak_probe(scheme: &LevelScheme, drive: &DriveParams, det: EffectiveDetunings) -> f64 {
    rho33_with_rates(&scheme.rates(), drive.rabi_1, drive.rabi_2, det)
}

/// K′·(Ω₁/2)²·|γ₁₃ + i(d₁+d₂)|² / |D|². Vanishes at two-photon resonance
/// when γ₁₃ → 0.
///
/// Cascade repopulation of |2⟩ from |3⟩ is not included.
pub fn rho22_weak_probe(scheme: &LevelScheme, drive: &DriveParams, det: EffectiveDetunings) -> f64 {
    rho22_with_rates(&scheme.rates(), drive.rabi_1, drive.rabi_2, det)
}

pub(crate) fn rho33_with_rates(rates: &RateParams, rabi_1: f64, rabi_2: f64, det: EffectiveDetunings) -> f64 {
    let num = rabi_1 * rabi_2 / 4.0;
    RHO33_PREFACTOR * num * num / denominator(rates, rabi_2, det).norm_sqr()
}

pub(crate) fn rho22_with_rates(rates: &RateParams, rabi_1: f64, rabi_2: f64, det: EffectiveDetunings) -> f64 {
    let two_photon = Complex64::new(rates.gamma_13, det.d1 + det.d2);
    RHO22_PREFACTOR * (rabi_1 / 2.0).powi(2) * two_photon.norm_sqr() / denominator(rates, rabi_2, det).norm_sqr()
}

/// D written as a quadratic a·u² + b·u + c in the reduced velocity u = v_z/v_p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeDenominator {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    /// Probe Doppler shift per unit u, s₁ν₁v_p/c, MHz.
    pub probe_shift: f64,
    /// Coupling Doppler shift per unit u, s₂ν₂v_p/c, MHz.
    pub coupling_shift: f64,
}

impl CascadeDenominator {
    /// Builds the quadratic for detunings d₁ = Δ₁⁰ + probe_shift·u and
    /// d₂ = Δ₂⁰ + coupling_shift·u.
    pub fn from_shifts(
        rates: &RateParams,
        rabi_2: f64,
        detuning_1: f64,
        detuning_2: f64,
        probe_shift: f64,
        coupling_shift: f64,
    ) -> Result<Self> {
        let k1 = probe_shift;
        let k12 = probe_shift + coupling_shift;
        let a = Complex64::new(-k1 * k12, 0.0);
        if a.norm() == 0.0 || !a.re.is_finite() {
            return Err(Error::Degenerate(format!(
                "leading coefficient vanishes (probe shift {k1} MHz, two-photon shift {k12} MHz)"
            )));
        }
        let one = Complex64::new(rates.gamma_12, detuning_1);
        let two = Complex64::new(rates.gamma_13, detuning_1 + detuning_2);
        let i = Complex64::i();
        Ok(CascadeDenominator {
            a,
            b: i * (one * k12 + two * k1),
            c: one * two + rabi_2 * rabi_2 / 4.0,
            probe_shift,
            coupling_shift,
        })
    }

    pub fn eval(&self, u: Complex64) -> Complex64 {
        (self.a * u + self.b) * u + self.c
    }

    pub fn discriminant(&self) -> Complex64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    /// Both roots, computed without cancellation.
    pub fn roots(&self) -> (Complex64, Complex64) {
        let sq = self.discriminant().sqrt();
        let sq = if (self.b.conj() * sq).re >= 0.0 { sq } else { -sq };
        let q = -(self.b + sq) / 2.0;
        if q.norm() == 0.0 {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        (q / self.a, self.c / q)
    }
}

/// Coefficients of D(u) for the rest-frame detunings in `drive`, with u
/// measured in units of the most probable speed of `dopp`.
pub fn denominator_coefficients(
    scheme: &LevelScheme,
    drive: &DriveParams,
    dopp: &DopplerParams,
) -> Result<CascadeDenominator> {
    let (probe_shift, coupling_shift) = doppler_shifts(scheme, drive, dopp);
    CascadeDenominator::from_shifts(
        &scheme.rates(),
        drive.rabi_2,
        drive.detuning_1,
        drive.detuning_2,
        probe_shift,
        coupling_shift,
    )
}

/// Signed probe and coupling Doppler shifts per unit reduced velocity, MHz.
pub fn doppler_shifts(scheme: &LevelScheme, drive: &DriveParams, dopp: &DopplerParams) -> (f64, f64) {
    let sigma = dopp.fwhm_mhz(scheme) / (2.0 * std::f64::consts::LN_2.sqrt());
    let ratio = scheme.wavenumber_32 / scheme.wavenumber_21;
    (drive.dir_1.sign() * sigma, drive.dir_2.sign() * sigma * ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, Preset};

    fn case_a() -> (LevelScheme, DriveParams, DopplerParams) {
        preset(Preset::CaseA)
    }

    #[test]
    fn no_probe_no_signal() {
        let (s, d, _) = case_a();
        let d0 = DriveParams { rabi_1: 0.0, ..d };
        let det = EffectiveDetunings { d1: 12.0, d2: -3.0 };
        assert_eq!(rho33_weak_probe(&s, &d0, det), 0.0);
        assert_eq!(rho22_weak_probe(&s, &d0, det), 0.0);
    }

    #[test]
    fn strong_coupling_suppresses_resonant_rho33() {
        let (s, d, _) = case_a();
        let det = EffectiveDetunings { d1: 0.0, d2: 0.0 };
        let at = |o: f64| rho33_weak_probe(&s, &d.with_rabi_2(o), det);
        let ratio = at(4000.0) / at(8000.0);
        assert!((ratio - 4.0).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn perfect_two_photon_null() {
        let (s, d, _) = case_a();
        let mut r = s.rates();
        r.gamma_13 = 0.0;
        let v = rho22_with_rates(&r, d.rabi_1, d.rabi_2, EffectiveDetunings { d1: 35.0, d2: -35.0 });
        assert_eq!(v, 0.0);
    }

    #[test]
    fn autler_townes_doublet_at_half_rabi() {
        let (s, d, _) = case_a();
        let scan: Vec<(f64, f64)> = (-3000..=3000)
            .map(|k| {
                let d1 = k as f64 * 0.1;
                (d1, rho33_weak_probe(&s, &d, EffectiveDetunings { d1, d2: 0.0 }))
            })
            .collect();
        let (pos, _) = scan
            .iter()
            .filter(|(d1, _)| *d1 > 0.0)
            .fold((0.0, 0.0), |acc, &(d1, v)| if v > acc.1 { (d1, v) } else { acc });
        assert!((pos - 200.0_f64).abs() < 5.0, "{pos}");
        let (neg, _) = scan
            .iter()
            .filter(|(d1, _)| *d1 < 0.0)
            .fold((0.0, 0.0), |acc, &(d1, v)| if v > acc.1 { (d1, v) } else { acc });
        assert!((neg + 200.0_f64).abs() < 5.0, "{neg}");
    }

    #[test]
    fn eit_dip_in_rho22() {
        let (s, d, _) = case_a();
        let at = |d1: f64| rho22_weak_probe(&s, &d, EffectiveDetunings { d1, d2: 0.0 });
        assert!(at(0.0) < at(-1.0) && at(0.0) < at(1.0));
        let peak = (0..4000).map(|k| at(k as f64 * 0.1)).fold(0.0, f64::max);
        assert!(peak > 10.0 * at(0.0));
    }

    #[test]
    fn uncoupled_denominator_factorises() {
        let (s, d, p) = case_a();
        let d = DriveParams { rabi_2: 0.0, detuning_1: 25.0, detuning_2: -5.0, ..d };
        let den = denominator_coefficients(&s, &d, &p).unwrap();
        let r = s.rates();
        let expected = Complex64::new(r.gamma_12, 25.0) * Complex64::new(r.gamma_13, 20.0);
        assert!((den.c - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn roots_are_zeros() {
        let (s, d, p) = case_a();
        for d1 in [-400.0, -100.0, 0.0, 3.0, 250.0] {
            let den = denominator_coefficients(&s, &d.with_detuning_1(d1), &p).unwrap();
            let (z1, z2) = den.roots();
            for z in [z1, z2] {
                let scale = den.a.norm() * z.norm_sqr() + den.b.norm() * z.norm() + den.c.norm();
                assert!(den.eval(z).norm() < 1e-10 * scale);
            }
        }
        let den = denominator_coefficients(&s, &d, &p).unwrap();
        let (z1, z2) = den.roots();
        assert!(z1.im.abs() > 0.0 && z2.im.abs() > 0.0);
    }

    #[test]
    fn denominator_matches_direct_evaluation() {
        let (s, d, p) = case_a();
        let den = denominator_coefficients(&s, &d.with_detuning_1(40.0), &p).unwrap();
        let r = s.rates();
        for u in [-1.3, 0.0, 0.2, 2.5] {
            let det = EffectiveDetunings { d1: 40.0 + den.probe_shift * u, d2: den.coupling_shift * u };
            let direct = denominator(&r, d.rabi_2, det);
            assert!((den.eval(Complex64::new(u, 0.0)) - direct).norm() < 1e-9 * direct.norm());
        }
    }

    #[test]
    fn zero_doppler_width_is_degenerate() {
        let (s, d, _) = case_a();
        assert!(matches!(
            denominator_coefficients(&s, &d, &DopplerParams::Fwhm(0.0)),
            Err(Error::Degenerate(_))
        ));
    }
}
