//! Ω2T over (x, Δν_D); flat inside −1 < x < 0, growing outside.
use cascade_at::model::{preset, DriveParams, Preset};
use cascade_at::threshold::{threshold_surface, ThresholdOptions};
use cascade_at::{Engine, Simulation};

fn main() -> cascade_at::Result<()> {
    let (s, d, p) = preset(Preset::CaseA);
    let sim = Simulation::new(s, DriveParams { detuning_2: 0.0, ..d }, p).with_engine(Engine::Analytic);
    let xs = [-1.5, -1.2, -0.8, -0.5, -0.2, 0.3, 0.8];
    let dnus = [200.0, 500.0, 1100.0, 2500.0, 5000.0];
    let map = threshold_surface(&sim, &xs, &dnus, &ThresholdOptions::default())?;

    print!("{:>6}", "x");
    dnus.iter().for_each(|v| print!("{v:>9}"));
    println!("{:>9}", "spread");
    for i in 0..map.x_grid.len() {
        print!("{:>6}", map.x_grid[i]);
        for j in 0..dnus.len() {
            print!("{:>9.1}", map.omega_t(i, j).unwrap_or(f64::NAN));
        }
        println!("{:>8.1}%", 100.0 * map.relative_spread(i).unwrap_or(f64::NAN));
    }
    Ok(())
}
