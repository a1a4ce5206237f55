//! Threshold coupling Rabi frequency Ω₂ᵀ: the smallest Ω₂ at which the
//! Doppler-averaged I₃ develops a local minimum at zero probe detuning.
//!
//! The curvature ∂²I₃/∂Δ₁² at Δ₁ = 0 is taken by a five-point stencil. At
//! resonant coupling (Δ₂ = 0) the averaged spectrum is even in Δ₁, so the
//! stencil needs only the three points 0, h, 2h.

use rayon::prelude::*;

use crate::doppler::{Engine, Simulation};
use crate::error::{Error, Result};
use crate::model::{with_wavenumber_ratio, DopplerParams};

/// Half-width of the excluded bands around x = 0 and x = −1.
pub const SINGULAR_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    /// Search range for Ω₂, MHz.
    pub min_rabi: f64,
    pub max_rabi: f64,
    /// Log-spaced pre-scan points.
    pub scan_points: usize,
    /// Relative bracket width at which bisection stops.
    pub rel_tol: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions { min_rabi: 1.0, max_rabi: 5.0e4, scan_points: 20, rel_tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThresholdStatus {
    Converged,
    /// More than one sign change in the pre-scan; the smallest crossing is reported.
    NonMonotonic,
    NotFound,
}

impl ThresholdStatus {
    pub fn converged(self) -> bool {
        !matches!(self, ThresholdStatus::NotFound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    /// Ω₂ᵀ in MHz; `None` when no crossing lies in range.
    pub omega_t: Option<f64>,
    pub status: ThresholdStatus,
    pub sign_changes: usize,
    /// Closed-form estimate used to seed the bracket (−1 < x < 0 only).
    pub seed: Option<f64>,
    pub x: f64,
}

/// Finite-difference step for a given coupling strength.
pub fn curvature_step(rabi_2: f64) -> f64 {
    (rabi_2 / 200.0).max(0.5)
}

fn require_resonant_coupling(sim: &Simulation) -> Result<()> {
    if sim.drive.detuning_2 != 0.0 {
        return Err(Error::Precondition(format!(
            "threshold analysis needs resonant coupling, detuning_2 = {}",
            sim.drive.detuning_2
        )));
    }
    Ok(())
}

/// ∂²I₃/∂Δ₁² at Δ₁ = 0 for the Ω₂ in `sim.drive`. Positive means the
/// Autler-Townes doublet is resolved.
pub fn curvature_at_zero(sim: &Simulation) -> Result<f64> {
    require_resonant_coupling(sim)?;
    let h = curvature_step(sim.drive.rabi_2);
    let averager = sim.averager()?;
    let f0 = averager.intensities(0.0)?.i3;
    let f1 = averager.intensities(h)?.i3;
    let f2 = averager.intensities(2.0 * h)?.i3;
    // (−f(2h) + 16f(h) − 30f(0) + 16f(−h) − f(−2h)) / 12h² with f even
    Ok((-2.0 * f2 + 32.0 * f1 - 30.0 * f0) / (12.0 * h * h))
}

/// Ω₂ᵉˢᵗ = Γ/√(−x(1+x)) with Γ = γ₁₂(1+x) − γ₁₃x, defined for −1 < x < 0.
pub fn region_two_seed(sim: &Simulation, x: f64) -> Option<f64> {
    if !(x > -1.0 && x < 0.0) {
        return None;
    }
    let r = sim.scheme.rates();
    let gamma = r.gamma_12 * (1.0 + x) - r.gamma_13 * x;
    Some(gamma / (-x * (1.0 + x)).sqrt())
}

pub fn in_singular_band(x: f64) -> bool {
    x.abs() < SINGULAR_BAND || (x + 1.0).abs() < SINGULAR_BAND
}

fn at_ratio(sim: &Simulation, x: f64) -> Result<Simulation> {
    let (scheme, drive) = with_wavenumber_ratio(&sim.scheme, &sim.drive, x)?;
    Ok(Simulation { scheme, drive, ..sim.clone() })
}

/// Threshold at wavenumber ratio `x`, everything else taken from `sim`.
pub fn threshold_rabi(sim: &Simulation, x: f64, opts: &ThresholdOptions) -> Result<ThresholdResult> {
    require_resonant_coupling(sim)?;
    if !x.is_finite() || in_singular_band(x) {
        return Err(Error::Precondition(format!("x = {x} lies in a singular band")));
    }
    if !(opts.min_rabi > 0.0 && opts.max_rabi > opts.min_rabi && opts.scan_points >= 2 && opts.rel_tol > 0.0) {
        return Err(Error::InvalidParameter("invalid threshold search options".into()));
    }
    let base = at_ratio(sim, x)?;
    let seed = region_two_seed(&base, x);
    let curvature = |rabi: f64| curvature_at_zero(&base.clone().with_drive(base.drive.with_rabi_2(rabi)));

    let (lo, hi) = (opts.min_rabi.ln(), opts.max_rabi.ln());
    let n = opts.scan_points;
    let mut scan: Vec<f64> = (0..n).map(|k| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp()).collect();
    if let Some(s) = seed.filter(|s| *s > opts.min_rabi && *s < opts.max_rabi) {
        scan.push(s);
        scan.sort_by(f64::total_cmp);
    }
    let signs: Vec<bool> = scan.iter().map(|&r| curvature(r).map(|c| c > 0.0)).collect::<Result<_>>()?;
    let sign_changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let Some(k) = signs.windows(2).position(|w| !w[0] && w[1]) else {
        return Ok(ThresholdResult { omega_t: None, status: ThresholdStatus::NotFound, sign_changes, seed, x });
    };

    let (mut a, mut b) = (scan[k], scan[k + 1]);
    while b / a - 1.0 > opts.rel_tol {
        let mid = (a * b).sqrt();
        if curvature(mid)? > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let status = if sign_changes > 1 { ThresholdStatus::NonMonotonic } else { ThresholdStatus::Converged };
    Ok(ThresholdResult { omega_t: Some((a * b).sqrt()), status, sign_changes, seed, x })
}

/// Thresholds over a (x, Δν_D) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdMap {
    pub x_grid: Vec<f64>,
    /// Doppler FWHM values, MHz.
    pub dnu_grid: Vec<f64>,
    /// `cells[i][j]` is the result for `x_grid[i]`, `dnu_grid[j]`.
    pub cells: Vec<Vec<ThresholdResult>>,
    /// Requested x values dropped because they fall in a singular band.
    pub skipped_x: Vec<f64>,
    pub engine: Engine,
}

impl ThresholdMap {
    pub fn omega_t(&self, i: usize, j: usize) -> Option<f64> {
        self.cells[i][j].omega_t
    }

    pub fn converged(&self, i: usize, j: usize) -> bool {
        self.cells[i][j].status.converged()
    }

    pub fn region_two(&self, i: usize) -> bool {
        let x = self.x_grid[i];
        x > -1.0 && x < 0.0
    }

    /// (max − min)/min of Ω₂ᵀ over the Doppler grid at `x_grid[i]`, or
    /// `None` if any cell is missing.
    pub fn relative_spread(&self, i: usize) -> Option<f64> {
        let col: Option<Vec<f64>> = self.cells[i].iter().map(|c| c.omega_t).collect();
        let col = col?;
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        let max = col.iter().copied().fold(0.0, f64::max);
        Some((max - min) / min)
    }

    /// Whether Ω₂ᵀ strictly increases along the Doppler grid at `x_grid[i]`.
    pub fn strictly_increasing(&self, i: usize) -> bool {
        let col: Option<Vec<f64>> = self.cells[i].iter().map(|c| c.omega_t).collect();
        col.is_some_and(|c| c.windows(2).all(|w| w[1] > w[0]))
    }

    pub fn len(&self) -> usize {
        self.x_grid.len() * self.dnu_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Threshold against x at the Doppler width of `sim`.
pub fn threshold_curve(sim: &Simulation, x_grid: &[f64], opts: &ThresholdOptions) -> Result<ThresholdMap> {
    let fwhm = sim.doppler.fwhm_mhz(&sim.scheme);
    let template = sim.clone().with_doppler(DopplerParams::Fwhm(fwhm));
    threshold_surface(&template, x_grid, &[fwhm], opts)
}

/// Threshold over x × Δν_D. Cells are computed in parallel and assembled by
/// index; a cell without a crossing is recorded, not raised.
pub fn threshold_surface(sim: &Simulation, x_grid: &[f64], dnu_grid: &[f64], opts: &ThresholdOptions) -> Result<ThresholdMap> {
    require_resonant_coupling(sim)?;
    if let Some(bad) = dnu_grid.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(Error::InvalidParameter(format!("Doppler width {bad} MHz")));
    }
    let (kept, skipped): (Vec<f64>, Vec<f64>) = x_grid.iter().partition(|x| !in_singular_band(**x));
    let jobs: Vec<(usize, usize)> = (0..kept.len()).flat_map(|i| (0..dnu_grid.len()).map(move |j| (i, j))).collect();
    let results: Vec<Result<ThresholdResult>> = jobs
        .par_iter()
        .map(|&(i, j)| threshold_rabi(&sim.clone().with_doppler(DopplerParams::Fwhm(dnu_grid[j])), kept[i], opts))
        .collect();
    let mut cells: Vec<Vec<ThresholdResult>> = vec![Vec::with_capacity(dnu_grid.len()); kept.len()];
    for ((i, _), r) in jobs.into_iter().zip(results) {
        cells[i].push(r?);
    }
    Ok(ThresholdMap { x_grid: kept, dnu_grid: dnu_grid.to_vec(), cells, skipped_x: skipped, engine: sim.engine })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, Preset};

    fn case_a(engine: Engine) -> Simulation {
        let (s, d, p) = preset(Preset::CaseA);
        Simulation::new(s, d, p).with_engine(engine)
    }

    #[test]
    fn split_and_unsplit_presets() {
        assert!(curvature_at_zero(&case_a(Engine::Analytic)).unwrap() > 0.0);
        assert!(curvature_at_zero(&case_a(Engine::Full)).unwrap() > 0.0);
        // I₃ vanishes identically at Ω₂ = 0, so probe the weak-coupling side instead
        let weak = case_a(Engine::Analytic);
        let weak = weak.clone().with_drive(weak.drive.with_rabi_2(1.0));
        assert!(curvature_at_zero(&weak).unwrap() < 0.0);
    }

    #[test]
    fn spectrum_is_even_at_resonant_coupling() {
        for engine in [Engine::Analytic, Engine::Full] {
            let av = case_a(engine).averager().unwrap();
            for d in [0.5, 2.0, 150.0] {
                let (p, m) = (av.intensities(d).unwrap(), av.intensities(-d).unwrap());
                assert!((p.i3 - m.i3).abs() < 1e-9 * p.i3, "{engine} {d}");
            }
        }
    }

    #[test]
    fn step_halving_is_stable() {
        let sim = case_a(Engine::Analytic);
        let sim = sim.clone().with_drive(sim.drive.with_rabi_2(60.0));
        let av = sim.averager().unwrap();
        let curv = |h: f64| {
            let f = |d: f64| av.intensities(d).unwrap().i3;
            (-2.0 * f(2.0 * h) + 32.0 * f(h) - 30.0 * f(0.0)) / (12.0 * h * h)
        };
        let (full, half) = (curv(curvature_step(60.0)), curv(curvature_step(60.0) / 2.0));
        assert!(((full - half) / half).abs() < 0.01);
    }

    #[test]
    fn curvature_sign_ignores_scale() {
        let sim = case_a(Engine::Analytic);
        let weak = sim.clone().with_drive(crate::model::DriveParams { rabi_1: sim.drive.rabi_1 * 0.1, ..sim.drive });
        let (a, b) = (curvature_at_zero(&sim).unwrap(), curvature_at_zero(&weak).unwrap());
        assert!(a * b > 0.0 && ((a / b) - 100.0).abs() < 1e-6);
    }

    #[test]
    fn case_a_threshold_near_seed() {
        let sim = case_a(Engine::Analytic);
        let r = threshold_rabi(&sim, -0.922, &ThresholdOptions::default()).unwrap();
        let seed = r.seed.unwrap();
        let rates = sim.scheme.rates();
        let gamma = rates.gamma_12 * 0.078 + rates.gamma_13 * 0.922;
        assert!((seed - gamma / (0.922f64 * 0.078).sqrt()).abs() < 1e-9, "{seed}");
        let t = r.omega_t.unwrap();
        assert_eq!(r.status, ThresholdStatus::Converged);
        assert!(t > seed / 3.0 && t < seed * 3.0, "{t}");
        let below = sim.clone().with_drive(sim.drive.with_rabi_2(t * 0.99));
        let above = sim.clone().with_drive(sim.drive.with_rabi_2(t * 1.01));
        assert!(curvature_at_zero(&below).unwrap() < 0.0 && curvature_at_zero(&above).unwrap() > 0.0);
    }

    #[test]
    fn needs_resonant_coupling() {
        let (s, d, p) = preset(Preset::CaseB);
        let sim = Simulation::new(s, d, p);
        assert!(matches!(curvature_at_zero(&sim), Err(Error::Precondition(_))));
        assert!(matches!(threshold_rabi(&sim, -0.5, &ThresholdOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn singular_bands() {
        let sim = case_a(Engine::Analytic);
        assert!(threshold_rabi(&sim, -1.01, &ThresholdOptions::default()).is_err());
        assert!(threshold_rabi(&sim, 0.005, &ThresholdOptions::default()).is_err());
        let map = threshold_curve(&sim, &[-1.0, 0.01, -0.5], &ThresholdOptions::default()).unwrap();
        assert_eq!(map.x_grid, vec![-0.5]);
        assert_eq!(map.skipped_x, vec![-1.0, 0.01]);
    }

    #[test]
    fn empty_grid() {
        let map = threshold_curve(&case_a(Engine::Analytic), &[], &ThresholdOptions::default()).unwrap();
        assert!(map.is_empty());
    }

    #[test]
    fn single_cell_matches_threshold_rabi() {
        let sim = case_a(Engine::Analytic).with_doppler(DopplerParams::Fwhm(800.0));
        let map = threshold_surface(&sim, &[-0.6], &[800.0], &ThresholdOptions::default()).unwrap();
        let direct = threshold_rabi(&sim, -0.6, &ThresholdOptions::default()).unwrap();
        assert_eq!(map.cells[0][0], direct);
    }

    #[test]
    fn not_found_is_reported() {
        let sim = case_a(Engine::Analytic);
        let opts = ThresholdOptions { max_rabi: 5.0, ..Default::default() };
        let r = threshold_rabi(&sim, -0.5, &opts).unwrap();
        assert_eq!(r.status, ThresholdStatus::NotFound);
        assert!(r.omega_t.is_none());
    }
}
