//! Doppler-averaged fluorescence for both presets with every engine.
use std::time::Instant;

use cascade_at::model::{preset, Preset};
use cascade_at::{Engine, Simulation};

fn main() -> cascade_at::Result<()> {
    let grid: Vec<f64> = (-30..=30).map(|k| k as f64 * 50.0).collect();
    for case in Preset::ALL {
        let (s, d, p) = preset(case);
        for engine in [Engine::Full, Engine::Perturbative, Engine::Analytic] {
            let t = Instant::now();
            let spec = Simulation::new(s, d, p).with_engine(engine).spectrum(&grid)?.peak_normalized();
            println!("{case} {engine} ({:.0} ms, {})", t.elapsed().as_secs_f64() * 1e3, spec.quadrature);
            let row: String = spec.i3.iter().step_by(3).map(|v| format!("{v:5.2}")).collect();
            println!("  I3 {row}");
        }
    }
    Ok(())
}
