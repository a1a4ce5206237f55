//! Magnetic-sublevel weights and the washed-out Autler-Townes dip.
use cascade_at::model::{preset, Preset};
use cascade_at::msublevel::{weights, Polarization};
use cascade_at::{Engine, Simulation};

fn main() -> cascade_at::Result<()> {
    let (s, d, p) = preset(Preset::CaseA);
    let w = weights(s.j2, s.j3, Polarization::LinearParallel)?;
    println!("J2 = {}, J3 = {}: {} components, {} distinct Rabi factors", s.j2, s.j3, w.len(), w.distinct().len());
    for (factor, count) in w.distinct().iter().rev().take(5) {
        println!("  {factor:.4} × {count}");
    }

    let grid: Vec<f64> = (0..=12).map(|k| k as f64 * 25.0).collect();
    let single = Simulation::new(s, d, p).with_engine(Engine::Analytic).spectrum(&grid)?.peak_normalized();
    let summed = Simulation::new(s, d, p).with_engine(Engine::Analytic).with_msum(Some(w)).spectrum(&grid)?.peak_normalized();
    println!("{:>7} {:>8} {:>8}", "delta1", "single", "M-sum");
    for k in 0..grid.len() {
        println!("{:>7} {:>8.3} {:>8.3}", grid[k], single.i3[k], summed.i3[k]);
    }
    Ok(())
}
