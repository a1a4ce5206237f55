//! Splitting threshold Ω2T against the wavenumber ratio at fixed Doppler width.
use cascade_at::model::{preset, DriveParams, Preset};
use cascade_at::msublevel::{weights, Polarization};
use cascade_at::threshold::{threshold_curve, ThresholdOptions};
use cascade_at::{Engine, Simulation};

fn main() -> cascade_at::Result<()> {
    let (s, d, p) = preset(Preset::CaseA);
    let sim = Simulation::new(s, DriveParams { detuning_2: 0.0, ..d }, p)
        .with_engine(Engine::Analytic)
        .with_msum(Some(weights(s.j2, s.j3, Polarization::LinearParallel)?));
    let xs: Vec<f64> = (0..=25).map(|k| -1.5 + 0.1 * k as f64).collect();
    let map = threshold_curve(&sim, &xs, &ThresholdOptions::default())?;
    if !map.skipped_x.is_empty() {
        println!("skipped {:?}", map.skipped_x);
    }
    for (i, x) in map.x_grid.iter().enumerate() {
        let cell = &map.cells[i][0];
        let value = cell.omega_t.map_or("-".to_string(), |v| format!("{v:.1}"));
        println!("x = {x:>5.2}  Ω2T = {value:>8} MHz  {:?}", cell.status);
    }
    Ok(())
}
