//! Level schemes, drive fields, Doppler parameters and the two built-in
//! Na₂ cascade presets.
//!
//! Every rate, Rabi frequency, detuning and linewidth in this crate is an
//! ordinary frequency in MHz. Factors of 2π only appear inside the
//! density-matrix assembly in [`crate::liouville`].

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Molecular mass of Na₂ used by the presets, amu.
pub const NA2_MASS: f64 = 45.98;

/// Open three-level cascade |1⟩ → |2⟩ → |3⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelScheme {
    /// |1⟩→|2⟩ transition wavenumber, cm⁻¹.
    pub wavenumber_21: f64,
    /// |2⟩→|3⟩ transition wavenumber, cm⁻¹.
    pub wavenumber_32: f64,
    /// Radiative lifetime of |2⟩, ns.
    pub lifetime_2: f64,
    /// Radiative lifetime of |3⟩, ns.
    pub lifetime_3: f64,
    /// Fraction of |2⟩ decay returning to |1⟩.
    pub branch_2_to_1: f64,
    /// Fraction of |3⟩ decay returning to |2⟩.
    pub branch_3_to_2: f64,
    /// Transit relaxation / refill rate, MHz.
    pub transit_rate: f64,
    pub j1: u32,
    pub j2: u32,
    pub j3: u32,
    /// Molecular mass, amu.
    pub mass: f64,
}

impl LevelScheme {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavenumber_21", self.wavenumber_21),
            ("wavenumber_32", self.wavenumber_32),
            ("lifetime_2", self.lifetime_2),
            ("lifetime_3", self.lifetime_3),
            ("mass", self.mass),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, b) in [("branch_2_to_1", self.branch_2_to_1), ("branch_3_to_2", self.branch_3_to_2)] {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {b}")));
            }
        }
        if !(self.transit_rate.is_finite() && self.transit_rate >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transit_rate must be non-negative, got {}",
                self.transit_rate
            )));
        }
        if self.j1.abs_diff(self.j2) > 1 {
            return Err(Error::SelectionRule(i64::from(self.j1.abs_diff(self.j2))));
        }
        if self.j2.abs_diff(self.j3) > 1 {
            return Err(Error::SelectionRule(i64::from(self.j2.abs_diff(self.j3))));
        }
        Ok(())
    }

    /// True when population can leave the three-level manifold.
    pub fn is_open(&self) -> bool {
        self.branch_2_to_1 < 1.0 || self.branch_3_to_2 < 1.0
    }

    /// Probe transition frequency ν₁, Hz.
    pub fn probe_frequency_hz(&self) -> f64 {
        SPEED_OF_LIGHT * self.wavenumber_21 * 100.0
    }

    /// Coupling transition frequency ν₂, Hz.
    pub fn coupling_frequency_hz(&self) -> f64 {
        SPEED_OF_LIGHT * self.wavenumber_32 * 100.0
    }

    /// Decay and coherence-damping rates derived from the lifetimes.
    pub fn rates(&self) -> RateParams {
        rates(self)
    }
}

/// Propagation direction of a beam along the z axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Direction::Forward => 1,
            Direction::Backward => -1,
        }
    }
}

impl TryFrom<i64> for Direction {
    type Error = Error;

    fn try_from(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Direction::Forward),
            -1 => Ok(Direction::Backward),
            other => Err(Error::InvalidParameter(format!("direction must be +1 or -1, got {other}"))),
        }
    }
}

/// Probe and coupling fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    /// Probe Rabi frequency Ω₁, MHz.
    pub rabi_1: f64,
    /// Coupling Rabi frequency Ω₂, MHz.
    pub rabi_2: f64,
    /// Rest-frame probe detuning ω₂₁ − ω₁, MHz.
    pub detuning_1: f64,
    /// Rest-frame coupling detuning ω₃₂ − ω₂, MHz.
    pub detuning_2: f64,
    pub dir_1: Direction,
    pub dir_2: Direction,
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rabi_1", self.rabi_1), ("rabi_2", self.rabi_2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")));
            }
        }
        for (name, v) in [("detuning_1", self.detuning_1), ("detuning_2", self.detuning_2)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn with_rabi_2(self, rabi_2: f64) -> Self {
        DriveParams { rabi_2, ..self }
    }

    pub fn with_detuning_1(self, detuning_1: f64) -> Self {
        DriveParams { detuning_1, ..self }
    }
}

/// Signed wavenumber ratio x = s₁k₁ / (s₂k₂): positive for co-propagating
/// beams, negative for counter-propagating ones.
pub fn wavenumber_ratio(scheme: &LevelScheme, drive: &DriveParams) -> f64 {
    (drive.dir_1.sign() * scheme.wavenumber_21) / (drive.dir_2.sign() * scheme.wavenumber_32)
}

/// Returns a copy of `(scheme, drive)` whose coupling wavenumber and beam
/// directions realise the requested signed ratio `x`. The probe wavenumber,
/// and therefore the Doppler reference, is left untouched.
pub fn with_wavenumber_ratio(
    scheme: &LevelScheme,
    drive: &DriveParams,
    x: f64,
) -> Result<(LevelScheme, DriveParams)> {
    if !(x.is_finite() && x != 0.0) {
        return Err(Error::InvalidParameter(format!("wavenumber ratio must be finite and nonzero, got {x}")));
    }
    let scheme = LevelScheme {
        wavenumber_32: scheme.wavenumber_21 / x.abs(),
        ..*scheme
    };
    let drive = DriveParams {
        dir_1: Direction::Forward,
        dir_2: if x > 0.0 { Direction::Forward } else { Direction::Backward },
        ..*drive
    };
    Ok((scheme, drive))
}

/// Gaussian inhomogeneous broadening, specified either by temperature or
/// directly by the probe-transition FWHM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DopplerParams {
    /// Sample temperature, K (used with [`LevelScheme::mass`]).
    Temperature(f64),
    /// Doppler FWHM Δν_D of the probe transition, MHz.
    Fwhm(f64),
}

impl DopplerParams {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DopplerParams::Temperature(t) if !(t.is_finite() && t > 0.0) => Err(Error::InvalidParameter(
                format!("temperature must be positive, got {t}"),
            )),
            DopplerParams::Fwhm(f) if !(f.is_finite() && f >= 0.0) => {
                Err(Error::InvalidParameter(format!("fwhm must be non-negative, got {f}")))
            }
            _ => Ok(()),
        }
    }

    /// Probe-transition Doppler FWHM, MHz.
    pub fn fwhm_mhz(&self, scheme: &LevelScheme) -> f64 {
        match *self {
            DopplerParams::Temperature(t) => doppler_fwhm(scheme, t),
            DopplerParams::Fwhm(f) => f,
        }
    }

    /// Most probable speed v_p = Δν_D·c / (2√(ln 2)·ν₁), m/s.
    pub fn most_probable_speed(&self, scheme: &LevelScheme) -> f64 {
        self.fwhm_mhz(scheme) * 1e6 * SPEED_OF_LIGHT / (2.0 * LN_2.sqrt() * scheme.probe_frequency_hz())
    }
}

/// Gaussian Doppler FWHM of the probe transition at temperature `temperature` (K), MHz.
pub fn doppler_fwhm(scheme: &LevelScheme, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let mc2 = scheme.mass * ATOMIC_MASS_UNIT * SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    scheme.probe_frequency_hz() * (8.0 * LN_2 * BOLTZMANN * temperature / mc2).sqrt() * 1e-6
}

/// Population decay and coherence damping rates, MHz.
///
/// `decay_i = 1/(2π τ_i)`. Transit removes every level and every coherence
/// at `transit`, so each coherence rate is the mean of the radiative rates of
/// its two levels plus `transit`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub decay_2: f64,
    pub decay_3: f64,
    pub transit: f64,
    pub gamma_12: f64,
    pub gamma_13: f64,
    pub gamma_23: f64,
}

pub fn rates(scheme: &LevelScheme) -> RateParams {
    // lifetimes are in ns: 1/(2π τ[ns]) GHz = 1e3/(2π τ) MHz
    let decay_2 = 1e3 / (2.0 * PI * scheme.lifetime_2);
    let decay_3 = 1e3 / (2.0 * PI * scheme.lifetime_3);
    let transit = scheme.transit_rate;
    RateParams {
        decay_2,
        decay_3,
        transit,
        gamma_12: decay_2 / 2.0 + transit,
        gamma_13: decay_3 / 2.0 + transit,
        gamma_23: (decay_2 + decay_3) / 2.0 + transit,
    }
}

/// The two experimental Na₂ cascades.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// |k₁/k₂| < 1, counter-propagating: X(0,19) → A(0,20) → 2¹Πg(0,19).
    CaseA,
    /// |k₁/k₂| > 1, counter-propagating: X(1,19) → A(3,18) → 4¹Σg⁺(0,17).
    CaseB,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::CaseA, Preset::CaseB];

    pub fn name(self) -> &'static str {
        match self {
            Preset::CaseA => "case-a",
            Preset::CaseB => "case-b",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "case-a" | "case_a" | "a" => Ok(Preset::CaseA),
            "case-b" | "case_b" | "b" => Ok(Preset::CaseB),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

/// Transit rate used by the presets, MHz.
pub const DEFAULT_TRANSIT_RATE: f64 = 1.0;
/// Branching fractions used when none are given.
pub const DEFAULT_BRANCHING: f64 = 0.3;
/// Sample temperature of both experiments, K.
pub const PRESET_TEMPERATURE: f64 = 625.0;

pub fn preset(case: Preset) -> (LevelScheme, DriveParams, DopplerParams) {
    let (k21, k32, tau3, (j1, j2, j3), rabi_1, rabi_2, detuning_2) = match case {
        Preset::CaseA => (14647.547, 15888.065, 21.0, (19, 20, 19), 6.0, 400.0, 0.0),
        Preset::CaseB => (14828.639, 13284.554, 12.7, (19, 18, 17), 36.0, 530.0, 60.0),
    };
    let scheme = LevelScheme {
        wavenumber_21: k21,
        wavenumber_32: k32,
        lifetime_2: 12.2,
        lifetime_3: tau3,
        branch_2_to_1: DEFAULT_BRANCHING,
        branch_3_to_2: DEFAULT_BRANCHING,
        transit_rate: DEFAULT_TRANSIT_RATE,
        j1,
        j2,
        j3,
        mass: NA2_MASS,
    };
    let drive = DriveParams {
        rabi_1,
        rabi_2,
        detuning_1: 0.0,
        detuning_2,
        dir_1: Direction::Forward,
        dir_2: Direction::Backward,
    };
    (scheme, drive, DopplerParams::Temperature(PRESET_TEMPERATURE))
}

/// Looks a preset up by name (`case-a`, `case-b`).
pub fn preset_by_name(name: &str) -> Result<(LevelScheme, DriveParams, DopplerParams)> {
    Ok(preset(name.parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn preset_ratios() {
        let (s, d, _) = preset(Preset::CaseA);
        let x = wavenumber_ratio(&s, &d);
        assert!(rel(x, -14647.547 / 15888.065) < 1e-15);
        assert_eq!(format!("{x:.3}"), "-0.922");
        let (s, d, _) = preset(Preset::CaseB);
        assert_eq!(format!("{:.3}", wavenumber_ratio(&s, &d)), "-1.116");
        assert_eq!(preset(Preset::CaseA).1.rabi_2, 400.0);
        assert_eq!(preset(Preset::CaseB).1.rabi_2, 530.0);
        assert_eq!(preset(Preset::CaseB).1.detuning_2, 60.0);
    }

    #[test]
    fn presets_are_valid_open_systems() {
        for case in Preset::ALL {
            let (s, d, p) = preset(case);
            s.validate().unwrap();
            d.validate().unwrap();
            p.validate().unwrap();
            assert!(s.is_open());
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!("case-c".parse::<Preset>(), Err(Error::UnknownPreset(_))));
        assert!(preset_by_name("nope").is_err());
        assert_eq!(preset_by_name("case-b").unwrap(), preset(Preset::CaseB));
    }

    #[test]
    fn na2_doppler_width() {
        let (s, _, _) = preset(Preset::CaseA);
        let w = doppler_fwhm(&s, 625.0);
        // direct evaluation of ν₁·sqrt(8 ln2 kT / mc²)
        assert!((w - 1159.6).abs() < 1.0, "{w}");
        assert!(rel(w, 1100.0) < 0.10);
        assert_eq!(doppler_fwhm(&s, 0.0), 0.0);
        assert!(rel(doppler_fwhm(&s, 4.0 * 625.0), 2.0 * w) < 1e-12);
        let doubled = LevelScheme { wavenumber_21: 2.0 * s.wavenumber_21, ..s };
        assert!(rel(doppler_fwhm(&doubled, 625.0), 2.0 * w) < 1e-12);
    }

    #[test]
    fn rate_arithmetic() {
        let (s, _, _) = preset(Preset::CaseA);
        let r = rates(&LevelScheme { transit_rate: 0.0, ..s });
        assert!((r.decay_2 - 13.05).abs() < 0.005);
        assert!((r.gamma_12 - 6.52).abs() < 0.005);
        assert!((r.decay_3 - 7.58).abs() < 0.005);
        assert!((r.gamma_13 - 3.79).abs() < 0.005);
    }

    #[test]
    fn transit_adds_to_every_coherence() {
        let (s, _, _) = preset(Preset::CaseA);
        let r0 = rates(&LevelScheme { transit_rate: 0.0, ..s });
        let r2 = rates(&LevelScheme { transit_rate: 2.0, ..s });
        for (a, b) in [(r0.gamma_12, r2.gamma_12), (r0.gamma_13, r2.gamma_13), (r0.gamma_23, r2.gamma_23)] {
            assert!((b - a - 2.0).abs() < 1e-12);
        }
        assert_eq!(r0.decay_2, r2.decay_2);
    }

    #[test]
    fn rates_monotone_in_lifetime() {
        let (s, _, _) = preset(Preset::CaseA);
        let r = rates(&s);
        let longer = rates(&LevelScheme { lifetime_2: s.lifetime_2 * 1.5, lifetime_3: s.lifetime_3 * 1.5, ..s });
        assert!(longer.decay_2 < r.decay_2 && longer.decay_3 < r.decay_3);
        assert!(longer.gamma_12 < r.gamma_12 && longer.gamma_13 < r.gamma_13 && longer.gamma_23 < r.gamma_23);
    }

    #[test]
    fn validation_rejects_bad_schemes() {
        let (s, d, _) = preset(Preset::CaseA);
        assert!(LevelScheme { mass: 0.0, ..s }.validate().is_err());
        assert!(LevelScheme { branch_2_to_1: 1.5, ..s }.validate().is_err());
        assert!(LevelScheme { transit_rate: -1.0, ..s }.validate().is_err());
        assert!(matches!(LevelScheme { j3: 22, ..s }.validate(), Err(Error::SelectionRule(2))));
        assert!(DriveParams { rabi_1: -1.0, ..d }.validate().is_err());
        assert!(DopplerParams::Fwhm(-3.0).validate().is_err());
        assert!(DopplerParams::Temperature(0.0).validate().is_err());
        assert!(Direction::try_from(0).is_err());
    }

    #[test]
    fn ratio_override() {
        let (s, d, _) = preset(Preset::CaseA);
        for x in [-1.5, -0.5, 0.3, 2.0] {
            let (s2, d2) = with_wavenumber_ratio(&s, &d, x).unwrap();
            assert!(rel(wavenumber_ratio(&s2, &d2), x) < 1e-14);
            assert_eq!(s2.wavenumber_21, s.wavenumber_21);
        }
        assert!(with_wavenumber_ratio(&s, &d, 0.0).is_err());
    }

    #[test]
    fn most_probable_speed_roundtrip() {
        let (s, _, p) = preset(Preset::CaseA);
        let vp = p.most_probable_speed(&s);
        // v_p = sqrt(2kT/m)
        let direct = (2.0 * BOLTZMANN * 625.0 / (NA2_MASS * ATOMIC_MASS_UNIT)).sqrt();
        assert!(rel(vp, direct) < 1e-12, "{vp} vs {direct}");
    }
}
