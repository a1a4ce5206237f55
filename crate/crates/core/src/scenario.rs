//! Scenario files: TOML with four flat sections mapping onto the model types.
//!
//! ```toml
//! [levels]
//! wavenumber_21 = 14647.547   # cm⁻¹
//! wavenumber_32 = 15888.065
//! lifetime_2 = 12.2           # ns
//! lifetime_3 = 21.0
//! j1 = 19
//! j2 = 20
//! j3 = 19
//!
//! [fields]
//! rabi_1 = 6.0                # MHz
//! rabi_2 = 400.0
//! detuning_2 = 0.0
//! dir_1 = 1
//! dir_2 = -1
//!
//! [doppler]
//! temperature = 625.0         # K, or `fwhm` in MHz
//!
//! [scan]
//! delta1_start = -1500.0
//! delta1_stop = 1500.0
//! delta1_step = 5.0
//! engine = "full"
//! msum = true
//! ```
//!
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::doppler::{DopplerQuadrature, Engine, Simulation};
use crate::error::{Error, Result};
use crate::model::{
    preset, Direction, DopplerParams, DriveParams, LevelScheme, Preset, DEFAULT_BRANCHING, DEFAULT_TRANSIT_RATE,
    NA2_MASS,
};
use crate::msublevel::{weights, Polarization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub levels: Levels,
    pub fields: Fields,
    pub doppler: Doppler,
    #[serde(default)]
    pub scan: Scan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Levels {
    pub wavenumber_21: f64,
    pub wavenumber_32: f64,
    pub lifetime_2: f64,
    pub lifetime_3: f64,
    #[serde(default = "default_branching")]
    pub branch_2_to_1: f64,
    #[serde(default = "default_branching")]
    pub branch_3_to_2: f64,
    #[serde(default = "default_transit")]
    pub transit_rate: f64,
    pub j1: u32,
    pub j2: u32,
    pub j3: u32,
    #[serde(default = "default_mass")]
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fields {
    pub rabi_1: f64,
    pub rabi_2: f64,
    #[serde(default)]
    pub detuning_1: f64,
    #[serde(default)]
    pub detuning_2: f64,
    pub dir_1: i64,
    pub dir_2: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Doppler {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fwhm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scan {
    pub delta1_start: f64,
    pub delta1_stop: f64,
    pub delta1_step: f64,
    pub x_start: f64,
    pub x_stop: f64,
    pub x_step: f64,
    pub dnu_start: f64,
    pub dnu_stop: f64,
    pub dnu_step: f64,
    pub engine: String,
    pub msum: bool,
    /// "adaptive" or "gauss-hermite".
    pub quadrature: String,
    pub quad_order: usize,
}

impl Default for Scan {
    fn default() -> Self {
        Scan {
            delta1_start: -1500.0,
            delta1_stop: 1500.0,
            delta1_step: 5.0,
            x_start: -1.5,
            x_stop: 1.0,
            x_step: 0.1,
            dnu_start: 200.0,
            dnu_stop: 5000.0,
            dnu_step: 800.0,
            engine: "full".into(),
            msum: false,
            quadrature: "adaptive".into(),
            quad_order: crate::doppler::DEFAULT_ORDER,
        }
    }
}

fn default_branching() -> f64 {
    DEFAULT_BRANCHING
}

fn default_transit() -> f64 {
    DEFAULT_TRANSIT_RATE
}

fn default_mass() -> f64 {
    NA2_MASS
}

/// Inclusive grid with round((stop − start)/step) + 1 points.
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start {
        return Err(Error::InvalidParameter(format!("bad grid {start}..{stop} step {step}")));
    }
    let n = ((stop - start) / step).round() as usize + 1;
    if n > 1_000_000 {
        return Err(Error::InvalidParameter(format!("grid of {n} points is too large")));
    }
    Ok((0..n).map(|k| start + step * k as f64).collect())
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::InvalidParameter(e.message().to_string()))?;
        s.simulation()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    /// Built-in scenario for a preset. The presets carry the M-sublevel sum.
    pub fn from_preset(case: Preset) -> Self {
        let (s, d, p) = preset(case);
        let (temperature, fwhm) = match p {
            DopplerParams::Temperature(t) => (Some(t), None),
            DopplerParams::Fwhm(f) => (None, Some(f)),
        };
        Scenario {
            levels: Levels {
                wavenumber_21: s.wavenumber_21,
                wavenumber_32: s.wavenumber_32,
                lifetime_2: s.lifetime_2,
                lifetime_3: s.lifetime_3,
                branch_2_to_1: s.branch_2_to_1,
                branch_3_to_2: s.branch_3_to_2,
                transit_rate: s.transit_rate,
                j1: s.j1,
                j2: s.j2,
                j3: s.j3,
                mass: s.mass,
            },
            fields: Fields {
                rabi_1: d.rabi_1,
                rabi_2: d.rabi_2,
                detuning_1: d.detuning_1,
                detuning_2: d.detuning_2,
                dir_1: d.dir_1.as_int(),
                dir_2: d.dir_2.as_int(),
            },
            doppler: Doppler { temperature, fwhm },
            scan: Scan { msum: true, ..Scan::default() },
        }
    }

    pub fn scheme(&self) -> LevelScheme {
        let l = &self.levels;
        LevelScheme {
            wavenumber_21: l.wavenumber_21,
            wavenumber_32: l.wavenumber_32,
            lifetime_2: l.lifetime_2,
            lifetime_3: l.lifetime_3,
            branch_2_to_1: l.branch_2_to_1,
            branch_3_to_2: l.branch_3_to_2,
            transit_rate: l.transit_rate,
            j1: l.j1,
            j2: l.j2,
            j3: l.j3,
            mass: l.mass,
        }
    }

    pub fn drive(&self) -> Result<DriveParams> {
        let f = &self.fields;
        Ok(DriveParams {
            rabi_1: f.rabi_1,
            rabi_2: f.rabi_2,
            detuning_1: f.detuning_1,
            detuning_2: f.detuning_2,
            dir_1: Direction::try_from(f.dir_1)?,
            dir_2: Direction::try_from(f.dir_2)?,
        })
    }

    pub fn doppler_params(&self) -> Result<DopplerParams> {
        match (self.doppler.temperature, self.doppler.fwhm) {
            (Some(t), None) => Ok(DopplerParams::Temperature(t)),
            (None, Some(f)) => Ok(DopplerParams::Fwhm(f)),
            _ => Err(Error::InvalidParameter("[doppler] needs exactly one of `temperature`, `fwhm`".into())),
        }
    }

    pub fn engine(&self) -> Result<Engine> {
        self.scan.engine.parse()
    }

    pub fn quadrature(&self) -> Result<DopplerQuadrature> {
        match self.scan.quadrature.as_str() {
            "adaptive" => Ok(DopplerQuadrature::default()),
            "gauss-hermite" => DopplerQuadrature::gauss_hermite(self.scan.quad_order),
            other => Err(Error::InvalidParameter(format!("unknown quadrature `{other}`"))),
        }
    }

    /// Validated simulation described by this scenario.
    pub fn simulation(&self) -> Result<Simulation> {
        let scheme = self.scheme();
        let drive = self.drive()?;
        let dopp = self.doppler_params()?;
        scheme.validate()?;
        drive.validate()?;
        dopp.validate()?;
        let msum = if self.scan.msum { Some(weights(scheme.j2, scheme.j3, Polarization::LinearParallel)?) } else { None };
        Ok(Simulation::new(scheme, drive, dopp)
            .with_engine(self.engine()?)
            .with_quadrature(self.quadrature()?)
            .with_msum(msum))
    }

    pub fn delta1_grid(&self) -> Result<Vec<f64>> {
        grid(self.scan.delta1_start, self.scan.delta1_stop, self.scan.delta1_step)
    }

    pub fn x_grid(&self) -> Result<Vec<f64>> {
        grid(self.scan.x_start, self.scan.x_stop, self.scan.x_step)
    }

    pub fn dnu_grid(&self) -> Result<Vec<f64>> {
        grid(self.scan.dnu_start, self.scan.dnu_stop, self.scan.dnu_step)
    }
}
