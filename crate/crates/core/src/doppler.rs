//! Gaussian velocity averaging of the fixed-velocity lineshapes.
//!
//! With the reduced velocity u = v_z/v_p the Doppler average of any
//! fixed-velocity observable f is
//!
//! ```text
//! ⟨f⟩ = (1/√π) ∫ e^{-u²} f(d₁ = Δ₁⁰ + k₁u, d₂ = Δ₂⁰ + k₂u) du
//! ```
//!
//! where k₁, k₂ are the signed probe and coupling Doppler shifts per unit u.
//! Three routes are provided:
//!
//! * numeric quadrature of the exact steady state ([`Engine::Full`]),
//! * numeric quadrature of the weak-probe forms ([`Engine::Perturbative`]),
//! * closed-form partial fractions of the weak-probe forms, each pole
//!   contributing through the Faddeeva function ([`Engine::Analytic`]).
//!
//! The fixed-velocity resonances are only γ/k₁ wide in u, far narrower than
//! the node spacing of any practical Gauss-Hermite rule, so the default
//! numeric route is an adaptive Gauss-Kronrod integrator seeded with the
//! resonance positions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::faddeeva;
use crate::lineshape::{self, CascadeDenominator, RHO22_PREFACTOR, RHO33_PREFACTOR};
use crate::liouville::{EffectiveDetunings, SteadyStateSolver};
use crate::model::{wavenumber_ratio, DopplerParams, DriveParams, LevelScheme, RateParams};
use crate::msublevel::{self, MSublevelWeights};
use crate::quadrature::{integrate_adaptive, resonance_breakpoints, AdaptiveOptions, QuadratureRule};

/// Default Gauss-Hermite order.
pub const DEFAULT_ORDER: usize = 200;
/// Smallest Gauss-Hermite order accepted by the averaging routines.
pub const MIN_ORDER: usize = 16;
/// Reduced-velocity cutoff; e^{-64} is far below any tolerance used here.
pub const VELOCITY_CUTOFF: f64 = 8.0;
/// Relative root separation below which the analytic route is abandoned.
pub const DEGENERATE_ROOT_TOL: f64 = 1e-9;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Which fixed-velocity model feeds the Doppler average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Full,
    Perturbative,
    Analytic,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Full => "full",
            Engine::Perturbative => "perturbative",
            Engine::Analytic => "analytic",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Engine::Full),
            "perturbative" => Ok(Engine::Perturbative),
            "analytic" => Ok(Engine::Analytic),
            other => Err(Error::InvalidParameter(format!("unknown engine `{other}`"))),
        }
    }
}

/// Numeric velocity-integration scheme used by the full and perturbative engines.
#[derive(Debug, Clone, PartialEq)]
pub enum DopplerQuadrature {
    /// Fixed Gauss-Hermite rule. Only accurate when the homogeneous widths
    /// are comparable to the Doppler width.
    GaussHermite(QuadratureRule),
    /// Resonance-seeded adaptive Gauss-Kronrod.
    Adaptive(AdaptiveOptions),
}

impl Default for DopplerQuadrature {
    fn default() -> Self {
        DopplerQuadrature::Adaptive(AdaptiveOptions::default())
    }
}

impl DopplerQuadrature {
    pub fn gauss_hermite(order: usize) -> Result<Self> {
        if order < MIN_ORDER {
            return Err(Error::InvalidParameter(format!("quadrature order must be at least {MIN_ORDER}, got {order}")));
        }
        Ok(DopplerQuadrature::GaussHermite(QuadratureRule::gauss_hermite(order)?))
    }

    pub fn describe(&self) -> String {
        match self {
            DopplerQuadrature::GaussHermite(rule) => format!("gauss-hermite:{}", rule.order()),
            DopplerQuadrature::Adaptive(o) => format!("adaptive:{:e}", o.rel_tol),
        }
    }
}

/// Side-fluorescence intensities (arbitrary units, MHz × population).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Intensities {
    pub i2: f64,
    pub i3: f64,
}

impl std::ops::Add for Intensities {
    type Output = Intensities;

    fn add(self, o: Intensities) -> Intensities {
        Intensities { i2: self.i2 + o.i2, i3: self.i3 + o.i3 }
    }
}

impl std::ops::Mul<f64> for Intensities {
    type Output = Intensities;

    fn mul(self, k: f64) -> Intensities {
        Intensities { i2: self.i2 * k, i3: self.i3 * k }
    }
}

/// Doppler-averaged I₂ and I₃ over a probe-detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Rest-frame probe detunings Δ₁⁰, MHz.
    pub delta1: Vec<f64>,
    pub i2: Vec<f64>,
    pub i3: Vec<f64>,
    pub engine: Engine,
    pub quadrature: String,
    /// Grid points where the analytic route hit a degenerate root pair and
    /// the numeric perturbative route was used instead.
    pub analytic_fallbacks: usize,
    pub fingerprint: String,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.delta1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta1.is_empty()
    }

    /// Copy with each intensity column divided by its maximum.
    pub fn peak_normalized(&self) -> Spectrum {
        let norm = |v: &[f64]| {
            let peak = v.iter().copied().fold(0.0, f64::max);
            if peak > 0.0 {
                v.iter().map(|x| x / peak).collect()
            } else {
                v.to_vec()
            }
        };
        Spectrum { i2: norm(&self.i2), i3: norm(&self.i3), ..self.clone() }
    }
}

/// Everything needed to compute a Doppler-averaged spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub scheme: LevelScheme,
    pub drive: DriveParams,
    pub doppler: DopplerParams,
    pub engine: Engine,
    pub quadrature: DopplerQuadrature,
    /// Magnetic-sublevel weights for Ω₂; `None` means a single component.
    pub msum: Option<MSublevelWeights>,
}

impl Simulation {
    pub fn new(scheme: LevelScheme, drive: DriveParams, doppler: DopplerParams) -> Self {
        Simulation {
            scheme,
            drive,
            doppler,
            engine: Engine::Full,
            quadrature: DopplerQuadrature::default(),
            msum: None,
        }
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_quadrature(mut self, quadrature: DopplerQuadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn with_msum(mut self, weights: Option<MSublevelWeights>) -> Self {
        self.msum = weights;
        self
    }

    pub fn with_drive(mut self, drive: DriveParams) -> Self {
        self.drive = drive;
        self
    }

    pub fn with_doppler(mut self, doppler: DopplerParams) -> Self {
        self.doppler = doppler;
        self
    }

    pub fn averager(&self) -> Result<Averager> {
        Averager::new(self)
    }

    /// Doppler-averaged (and, if enabled, M-summed) intensities at Δ₁⁰ = `delta1`.
    pub fn intensities_at(&self, delta1: f64) -> Result<Intensities> {
        self.averager()?.intensities(delta1)
    }

    /// Spectrum over `grid`; grid points are evaluated in parallel on the
    /// current rayon pool and assembled by index.
    pub fn spectrum(&self, grid: &[f64]) -> Result<Spectrum> {
        let averager = self.averager()?;
        let points: Vec<Result<(Intensities, usize)>> =
            grid.par_iter().map(|&d| averager.intensities_counted(d)).collect();
        let mut i2 = Vec::with_capacity(grid.len());
        let mut i3 = Vec::with_capacity(grid.len());
        let mut fallbacks = 0;
        for p in points {
            let (v, fb) = p?;
            i2.push(v.i2);
            i3.push(v.i3);
            fallbacks += fb;
        }
        Ok(Spectrum {
            delta1: grid.to_vec(),
            i2,
            i3,
            engine: self.engine,
            quadrature: self.quadrature.describe(),
            analytic_fallbacks: fallbacks,
            fingerprint: self.fingerprint(grid),
        })
    }

    /// Stable digest of every input that determines a spectrum.
    pub fn fingerprint(&self, grid: &[f64]) -> String {
        let mut h = Sha256::new();
        h.update(format!("{:?}|{:?}|{:?}|{:?}|{:?}|{:?}|{:?}", self.scheme, self.drive, self.doppler, self.engine, self.quadrature, self.msum, grid));
        let digest = h.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Per-simulation precomputation shared by all grid points.
#[derive(Debug, Clone)]
pub struct Averager {
    sim: Simulation,
    rates: RateParams,
    solver: Option<SteadyStateSolver>,
    probe_shift: f64,
    coupling_shift: f64,
}

impl Averager {
    fn new(sim: &Simulation) -> Result<Self> {
        sim.scheme.validate()?;
        sim.drive.validate()?;
        sim.doppler.validate()?;
        let solver = match sim.engine {
            Engine::Full => Some(SteadyStateSolver::new(&sim.scheme)?),
            _ => None,
        };
        let (probe_shift, coupling_shift) = lineshape::doppler_shifts(&sim.scheme, &sim.drive, &sim.doppler);
        Ok(Averager { sim: sim.clone(), rates: sim.scheme.rates(), solver, probe_shift, coupling_shift })
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn intensities(&self, delta1: f64) -> Result<Intensities> {
        self.intensities_counted(delta1).map(|(v, _)| v)
    }

    fn intensities_counted(&self, delta1: f64) -> Result<(Intensities, usize)> {
        let rabi_2 = self.sim.drive.rabi_2;
        let mut fallbacks = 0;
        let v = match &self.sim.msum {
            None => self.component(rabi_2, delta1, &mut fallbacks)?,
            Some(w) => msublevel::m_summed(w, rabi_2, |r| self.component(r, delta1, &mut fallbacks))?,
        };
        if !(v.i2.is_finite() && v.i3.is_finite()) {
            return Err(Error::NonFinite(delta1));
        }
        Ok((v, fallbacks))
    }

    /// One magnetic component (coupling Rabi frequency `rabi_2`).
    pub fn component_intensities(&self, rabi_2: f64, delta1: f64) -> Result<Intensities> {
        let mut fb = 0;
        self.component(rabi_2, delta1, &mut fb)
    }

    fn component(&self, rabi_2: f64, delta1: f64, fallbacks: &mut usize) -> Result<Intensities> {
        let delta2 = self.sim.drive.detuning_2;
        if self.probe_shift == 0.0 {
            return self.fixed(rabi_2, EffectiveDetunings { d1: delta1, d2: delta2 });
        }
        match self.sim.engine {
            Engine::Analytic => match self.analytic(rabi_2, delta1) {
                Ok(v) => Ok(v),
                Err(Error::Degenerate(_)) => {
                    *fallbacks += 1;
                    self.numeric(rabi_2, delta1)
                }
                Err(e) => Err(e),
            },
            _ => self.numeric(rabi_2, delta1),
        }
    }

    /// Fixed-velocity intensities for the configured engine.
    fn fixed(&self, rabi_2: f64, det: EffectiveDetunings) -> Result<Intensities> {
        let rabi_1 = self.sim.drive.rabi_1;
        match &self.solver {
            Some(solver) => {
                let (i2, i3) = solver.fluorescence(rabi_1, rabi_2, det)?;
                Ok(Intensities { i2, i3 })
            }
            None => Ok(Intensities {
                i2: self.rates.decay_2 * lineshape::rho22_with_rates(&self.rates, rabi_1, rabi_2, det),
                i3: self.rates.decay_3 * lineshape::rho33_with_rates(&self.rates, rabi_1, rabi_2, det),
            }),
        }
    }

    fn detunings(&self, delta1: f64, u: f64) -> EffectiveDetunings {
        EffectiveDetunings {
            d1: delta1 + self.probe_shift * u,
            d2: self.sim.drive.detuning_2 + self.coupling_shift * u,
        }
    }

    fn numeric(&self, rabi_2: f64, delta1: f64) -> Result<Intensities> {
        match &self.sim.quadrature {
            DopplerQuadrature::GaussHermite(rule) => {
                let mut acc = Intensities::default();
                for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
                    acc = acc + self.fixed(rabi_2, self.detunings(delta1, t))? * (w * FRAC_1_SQRT_PI);
                }
                Ok(acc)
            }
            DopplerQuadrature::Adaptive(opts) => {
                let bp = self.breakpoints(rabi_2, delta1);
                let [i2, i3] = integrate_adaptive(
                    |u| {
                        let g = (-u * u).exp() * FRAC_1_SQRT_PI;
                        let v = self.fixed(rabi_2, self.detunings(delta1, u))?;
                        Ok([g * v.i2, g * v.i3])
                    },
                    -VELOCITY_CUTOFF,
                    VELOCITY_CUTOFF,
                    &bp,
                    opts,
                )?;
                Ok(Intensities { i2, i3 })
            }
        }
    }

    /// Reduced velocities of the one-photon, two-photon and dressed
    /// resonances, each surrounded by a geometric ladder of cut points.
    fn breakpoints(&self, rabi_2: f64, delta1: f64) -> Vec<f64> {
        let (lo, hi) = (-VELOCITY_CUTOFF, VELOCITY_CUTOFF);
        let delta2 = self.sim.drive.detuning_2;
        let (k1, k2) = (self.probe_shift, self.coupling_shift);
        let r = &self.rates;
        let mut bp = vec![0.0, -1.0, 1.0, -2.5, 2.5];
        let mut add = |centre: f64, width: f64| {
            if centre.is_finite() && centre > lo - 1.0 && centre < hi + 1.0 {
                resonance_breakpoints(centre, width, lo, hi, &mut bp);
            }
        };
        add(-delta1 / k1, r.gamma_12 / k1.abs());
        if k2 != 0.0 {
            add(-delta2 / k2, r.gamma_23 / k2.abs());
        }
        let k12 = k1 + k2;
        if k12 != 0.0 {
            add(-(delta1 + delta2) / k12, r.gamma_13 / k12.abs());
        }
        if let Ok(den) = CascadeDenominator::from_shifts(r, rabi_2, delta1, delta2, k1, k2) {
            let (z1, z2) = den.roots();
            for z in [z1, z2] {
                add(z.re, z.im.abs().max(1e-12));
            }
        }
        bp
    }

    fn analytic(&self, rabi_2: f64, delta1: f64) -> Result<Intensities> {
        let drive = &self.sim.drive;
        let den = CascadeDenominator::from_shifts(
            &self.rates,
            rabi_2,
            delta1,
            drive.detuning_2,
            self.probe_shift,
            self.coupling_shift,
        )?;
        let poles = PoleDecomposition::from_denominator(&den)?;
        let k12 = self.probe_shift + self.coupling_shift;
        let d12 = delta1 + drive.detuning_2;
        // |γ₁₃ + i(Δ₁₂ + k₁₂u)|² as a polynomial in u
        let numer_22 = [self.rates.gamma_13 * self.rates.gamma_13 + d12 * d12, 2.0 * d12 * k12, k12 * k12];
        let base_33 = poles.gaussian_average(&[1.0, 0.0, 0.0])?;
        let base_22 = poles.gaussian_average(&numer_22)?;
        let rabi_1 = drive.rabi_1;
        let amp33 = RHO33_PREFACTOR * (rabi_1 * rabi_2 / 4.0).powi(2);
        let amp22 = RHO22_PREFACTOR * (rabi_1 / 2.0).powi(2);
        Ok(Intensities { i2: self.rates.decay_2 * amp22 * base_22, i3: self.rates.decay_3 * amp33 * base_33 })
    }
}

/// Poles of 1/|D(u)|² in the reduced velocity: the two roots of D and their
/// complex conjugates (the roots of D̄).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleDecomposition {
    pub z1: Complex64,
    pub z2: Complex64,
    /// |a|², the leading coefficient of D·D̄.
    pub leading: f64,
    /// Leading coefficient a of D.
    pub a: Complex64,
    /// −1 < x < 0.
    pub region_two: bool,
}

impl PoleDecomposition {
    pub fn from_denominator(den: &CascadeDenominator) -> Result<Self> {
        let (z1, z2) = den.roots();
        let scale = z1.norm().max(z2.norm());
        if (z1 - z2).norm() <= DEGENERATE_ROOT_TOL * scale || scale == 0.0 {
            return Err(Error::Degenerate(format!("coincident roots {z1} and {z2}")));
        }
        if z1.im == 0.0 || z2.im == 0.0 {
            return Err(Error::Degenerate("root on the real velocity axis".into()));
        }
        let x = den.probe_shift / den.coupling_shift;
        Ok(PoleDecomposition { z1, z2, leading: den.a.norm_sqr(), a: den.a, region_two: x > -1.0 && x < 0.0 })
    }

    pub fn poles(&self) -> [Complex64; 4] {
        [self.z1, self.z2, self.z1.conj(), self.z2.conj()]
    }

    /// Residues of 1/(D·D̄) at [`Self::poles`].
    pub fn residues(&self) -> [Complex64; 4] {
        let p = self.poles();
        let mut r = [Complex64::new(0.0, 0.0); 4];
        for i in 0..4 {
            let mut prod = Complex64::new(self.leading, 0.0);
            for j in 0..4 {
                if i != j {
                    prod *= p[i] - p[j];
                }
            }
            r[i] = 1.0 / prod;
        }
        r
    }

    /// a(u − z₁)(u − z₂), i.e. D rebuilt from its roots.
    pub fn reconstruct(&self, u: Complex64) -> Complex64 {
        self.a * (u - self.z1) * (u - self.z2)
    }

    /// (1/√π) ∫ e^{-u²} N(u) / |D(u)|² du for a real polynomial N of degree
    /// ≤ 2, coefficients in ascending order.
    pub fn gaussian_average(&self, numer: &[f64; 3]) -> Result<f64> {
        let poles = self.poles();
        let residues = self.residues();
        let mut total = Complex64::new(0.0, 0.0);
        for (p, r) in poles.iter().zip(residues) {
            let n = (Complex64::new(numer[2], 0.0) * p + numer[1]) * p + numer[0];
            total += r * n * pole_integral(*p)?;
        }
        Ok(total.re * FRAC_1_SQRT_PI)
    }
}

/// ∫ e^{-u²} / (u − p) du for a pole off the real axis.
///
/// Uses (i/π)∫ e^{-t²}/(z − t) dt = w(z) for Im z > 0, and the mirror
/// substitution t → −t for poles below the axis, so w is only ever needed in
/// the upper half-plane.
pub fn pole_integral(p: Complex64) -> Result<Complex64> {
    let i_pi = Complex64::new(0.0, PI);
    if p.im > 0.0 {
        Ok(i_pi * faddeeva::w(p)?)
    } else if p.im < 0.0 {
        Ok(-i_pi * faddeeva::w(-p)?)
    } else {
        Err(Error::Degenerate(format!("pole {p} on the integration axis")))
    }
}

/// Doppler average of the full or perturbative engine over `grid`.
pub fn average(
    engine: Engine,
    scheme: &LevelScheme,
    drive: &DriveParams,
    dopp: &DopplerParams,
    quadrature: DopplerQuadrature,
    grid: &[f64],
) -> Result<Spectrum> {
    if let DopplerQuadrature::GaussHermite(rule) = &quadrature {
        if rule.order() < MIN_ORDER {
            return Err(Error::InvalidParameter(format!("quadrature order must be at least {MIN_ORDER}")));
        }
    }
    Simulation::new(*scheme, *drive, *dopp).with_engine(engine).with_quadrature(quadrature).spectrum(grid)
}

/// Closed-form Doppler average of the weak-probe I₃ (I₂ comes along by the
/// same construction). Degenerate root pairs are an error here.
pub fn average_analytic(scheme: &LevelScheme, drive: &DriveParams, dopp: &DopplerParams, grid: &[f64]) -> Result<Spectrum> {
    let sim = Simulation::new(*scheme, *drive, *dopp).with_engine(Engine::Analytic);
    let averager = sim.averager()?;
    if averager.probe_shift == 0.0 {
        return sim.spectrum(grid);
    }
    let values: Vec<Result<Intensities>> = grid.par_iter().map(|&d| averager.analytic(drive.rabi_2, d)).collect();
    let mut i2 = Vec::with_capacity(grid.len());
    let mut i3 = Vec::with_capacity(grid.len());
    for (v, &d) in values.into_iter().zip(grid) {
        let v = v?;
        if !(v.i2.is_finite() && v.i3.is_finite()) {
            return Err(Error::NonFinite(d));
        }
        i2.push(v.i2);
        i3.push(v.i3);
    }
    Ok(Spectrum {
        delta1: grid.to_vec(),
        i2,
        i3,
        engine: Engine::Analytic,
        quadrature: "faddeeva".into(),
        analytic_fallbacks: 0,
        fingerprint: sim.fingerprint(grid),
    })
}

fn region_two_ratio(scheme: &LevelScheme, drive: &DriveParams) -> Result<f64> {
    if drive.detuning_2 != 0.0 {
        return Err(Error::Precondition(format!(
            "the root-difference closed form holds at resonant coupling; detuning_2 = {}",
            drive.detuning_2
        )));
    }
    let x = wavenumber_ratio(scheme, drive);
    if !(x > -1.0 && x < 0.0) {
        return Err(Error::Precondition(format!("closed form documented for -1 < x < 0, got x = {x}")));
    }
    Ok(x)
}

/// Effective width Γ = γ₁₂(1 + x) − γ₁₃x.
pub fn effective_width(rates: &RateParams, x: f64) -> f64 {
    rates.gamma_12 * (1.0 + x) - rates.gamma_13 * x
}

/// Closed form 1/(z₁ − z₂) = 2x(1+x)·Q^{1/2}/|Q|, with
/// Q = (Δ₁ − iΓ)² + x(1+x)Ω₂² and the principal square root.
///
/// The roots here are measured in half the coupling Doppler shift,
/// ξ = k₂v_z/2, which is the normalisation in which this form is exact.
pub fn root_difference_closed_form(scheme: &LevelScheme, drive: &DriveParams, delta1: f64) -> Result<Complex64> {
    let x = region_two_ratio(scheme, drive)?;
    let gamma = effective_width(&scheme.rates(), x);
    let p = x * (1.0 + x);
    let q = (Complex64::new(delta1, -gamma)).powi(2) + p * drive.rabi_2 * drive.rabi_2;
    Ok(2.0 * p * q.sqrt() / q.norm())
}

/// 1/(z₁ − z₂) from the quadratic-formula roots of D, rescaled to the
/// ξ = k₂v_z/2 velocity variable. Independent of the Doppler width.
pub fn root_difference_from_roots(scheme: &LevelScheme, drive: &DriveParams, delta1: f64) -> Result<Complex64> {
    let dopp = DopplerParams::Fwhm(1000.0);
    let den = lineshape::denominator_coefficients(scheme, &drive.with_detuning_1(delta1), &dopp)?;
    let (z1, z2) = den.roots();
    Ok(2.0 / ((z1 - z2) * den.coupling_shift.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, with_wavenumber_ratio, Preset};

    fn case(p: Preset) -> (LevelScheme, DriveParams, DopplerParams) {
        preset(p)
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn zero_width_is_fixed_velocity() {
        let (s, d, _) = case(Preset::CaseA);
        let dopp = DopplerParams::Fwhm(0.0);
        for engine in [Engine::Full, Engine::Perturbative, Engine::Analytic] {
            let sim = Simulation::new(s, d, dopp).with_engine(engine);
            let v = sim.intensities_at(150.0).unwrap();
            let fixed = sim.averager().unwrap().fixed(d.rabi_2, EffectiveDetunings { d1: 150.0, d2: 0.0 }).unwrap();
            assert!(rel(v.i3, fixed.i3) < 1e-12 && rel(v.i2, fixed.i2) < 1e-12);
        }
    }

    #[test]
    fn pole_integral_matches_quadrature() {
        for p in [Complex64::new(0.3, 0.05), Complex64::new(-1.2, -0.4), Complex64::new(2.0, 1e-3)] {
            let opts = AdaptiveOptions { rel_tol: 1e-12, ..Default::default() };
            let mut bp = Vec::new();
            resonance_breakpoints(p.re, p.im.abs(), -10.0, 10.0, &mut bp);
            let [re, im] = integrate_adaptive(
                |u| {
                    let v = (-u * u).exp() / (Complex64::new(u, 0.0) - p);
                    Ok([v.re, v.im])
                },
                -10.0,
                10.0,
                &bp,
                &opts,
            )
            .unwrap();
            let exact = pole_integral(p).unwrap();
            assert!((exact - Complex64::new(re, im)).norm() < 1e-9 * exact.norm(), "{p}");
        }
    }

    #[test]
    fn poles_reconstruct_denominator() {
        let (s, d, p) = case(Preset::CaseA);
        let den = lineshape::denominator_coefficients(&s, &d.with_detuning_1(70.0), &p).unwrap();
        let poles = PoleDecomposition::from_denominator(&den).unwrap();
        assert!(poles.region_two);
        for u in [-0.7, 0.0, 0.01, 1.9] {
            let u = Complex64::new(u, 0.0);
            let direct = den.eval(u);
            assert!((poles.reconstruct(u) - direct).norm() < 1e-9 * direct.norm());
        }
        // residues of a degree-4 denominator sum to zero
        let sum: Complex64 = poles.residues().iter().sum();
        let mag: f64 = poles.residues().iter().map(|r| r.norm()).sum();
        assert!(sum.norm() < 1e-10 * mag);
    }

    #[test]
    fn analytic_matches_adaptive_quadrature() {
        let (s, d, p) = case(Preset::CaseA);
        let grid = [-600.0, -150.0, 0.0, 37.0, 400.0];
        let a = average_analytic(&s, &d, &p, &grid).unwrap();
        let n = average(Engine::Perturbative, &s, &d, &p, DopplerQuadrature::default(), &grid).unwrap();
        for k in 0..grid.len() {
            assert!(rel(a.i3[k], n.i3[k]) < 1e-6, "I3 at {}: {} vs {}", grid[k], a.i3[k], n.i3[k]);
            assert!(rel(a.i2[k], n.i2[k]) < 1e-6, "I2 at {}: {} vs {}", grid[k], a.i2[k], n.i2[k]);
        }
    }

    #[test]
    fn analytic_narrow_doppler_limit() {
        let (s, d, _) = case(Preset::CaseA);
        let sim = Simulation::new(s, d, DopplerParams::Fwhm(1e-3)).with_engine(Engine::Analytic);
        let averager = sim.averager().unwrap();
        for d1 in [0.0, 120.0, 199.0] {
            let v = averager.intensities(d1).unwrap();
            let fixed = averager.fixed(d.rabi_2, EffectiveDetunings { d1, d2: 0.0 }).unwrap();
            assert!(rel(v.i3, fixed.i3) < 1e-3, "{d1}: {} vs {}", v.i3, fixed.i3);
        }
    }

    #[test]
    fn analytic_symmetric_at_resonant_coupling() {
        let (s, d, p) = case(Preset::CaseA);
        let grid: Vec<f64> = (-20..=20).map(|k| k as f64 * 37.5).collect();
        let a = average_analytic(&s, &d, &p, &grid).unwrap();
        let n = grid.len();
        for k in 0..n {
            assert!(rel(a.i3[k], a.i3[n - 1 - k]) < 1e-8);
        }
    }

    #[test]
    fn gauss_hermite_misses_narrow_resonances() {
        // Node spacing near u = 0 is ~0.2 for n = 200 while the resonances are
        // ~0.01 wide, so the fixed rule is visibly wrong where the adaptive one is not.
        let (s, d, p) = case(Preset::CaseA);
        let grid = [-450.0, 0.0, 150.0];
        let exact = average_analytic(&s, &d, &p, &grid).unwrap();
        let gh = average(Engine::Perturbative, &s, &d, &p, DopplerQuadrature::gauss_hermite(200).unwrap(), &grid).unwrap();
        let worst = (0..3).map(|k| rel(gh.i3[k], exact.i3[k])).fold(0.0, f64::max);
        assert!(worst > 1e-2, "{worst}");
    }

    #[test]
    fn gauss_hermite_is_fine_for_broad_lines() {
        // homogeneous width comparable to the Doppler width
        let (s, d, _) = case(Preset::CaseA);
        let p = DopplerParams::Fwhm(20.0);
        let grid = [0.0, 10.0, 200.0];
        let exact = average_analytic(&s, &d, &p, &grid).unwrap();
        let gh = average(Engine::Perturbative, &s, &d, &p, DopplerQuadrature::gauss_hermite(400).unwrap(), &grid).unwrap();
        for k in 0..3 {
            assert!(rel(gh.i3[k], exact.i3[k]) < 1e-6);
        }
    }

    #[test]
    fn min_order_enforced() {
        assert!(DopplerQuadrature::gauss_hermite(8).is_err());
    }

    #[test]
    fn closed_form_root_difference() {
        let (s, d, _) = case(Preset::CaseA);
        let x = wavenumber_ratio(&s, &d);
        let gamma = effective_width(&s.rates(), x);
        let p = (x * (1.0 + x)).abs();
        let zero = root_difference_closed_form(&s, &d, 0.0).unwrap();
        let expected = 2.0 * p / (gamma * gamma + p * d.rabi_2 * d.rabi_2).sqrt();
        assert!(rel(zero.norm(), expected) < 1e-12);
        let uncoupled = root_difference_closed_form(&s, &d.with_rabi_2(0.0), 75.0).unwrap();
        assert!(rel(uncoupled.norm(), 2.0 * p / Complex64::new(75.0, -gamma).norm()) < 1e-12);
        for d1 in [0.0, 100.0, -100.0, 400.0, -400.0] {
            let closed = root_difference_closed_form(&s, &d, d1).unwrap().norm();
            let roots = root_difference_from_roots(&s, &d, d1).unwrap().norm();
            assert!(rel(closed, roots) < 1e-9, "{d1}: {closed} vs {roots}");
        }
    }

    #[test]
    fn closed_form_preconditions() {
        let (s, d, _) = case(Preset::CaseB);
        assert!(matches!(root_difference_closed_form(&s, &d, 0.0), Err(Error::Precondition(_))));
        let (s, d, _) = case(Preset::CaseA);
        let (s2, d2) = with_wavenumber_ratio(&s, &d, 0.5).unwrap();
        assert!(matches!(root_difference_closed_form(&s2, &d2, 0.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn root_difference_independent_of_doppler_width() {
        let (s, d, _) = case(Preset::CaseA);
        let a = {
            let den = lineshape::denominator_coefficients(&s, &d, &DopplerParams::Fwhm(300.0)).unwrap();
            let (z1, z2) = den.roots();
            2.0 / ((z1 - z2) * den.coupling_shift.abs())
        };
        let b = root_difference_from_roots(&s, &d, 0.0).unwrap();
        assert!((a.norm() - b.norm()).abs() < 1e-12 * b.norm());
    }
}
