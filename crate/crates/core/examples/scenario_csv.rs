//! Build a scenario in TOML, run it and write the spectrum as CSV.
use std::io::Write;

use cascade_at::model::Preset;
use cascade_at::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut scenario = Scenario::from_preset(Preset::CaseB);
    scenario.scan.engine = "analytic".into();
    scenario.scan.delta1_step = 20.0;
    let text = scenario.to_toml();
    println!("{text}");

    let scenario = Scenario::from_toml(&text)?;
    let grid = scenario.delta1_grid()?;
    let spec = scenario.simulation()?.spectrum(&grid)?;
    let path = std::env::temp_dir().join("cascade-at-case-b.csv");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(out, "delta1,I2,I3")?;
    for k in 0..spec.len() {
        writeln!(out, "{:.8e},{:.8e},{:.8e}", spec.delta1[k], spec.i2[k], spec.i3[k])?;
    }
    println!("wrote {} rows to {}", spec.len(), path.display());
    Ok(())
}
