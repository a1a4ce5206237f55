//! Single velocity class: exact steady state across the probe detuning.
use cascade_at::liouville::{steady_state, EffectiveDetunings};
use cascade_at::model::{preset, Preset};

fn main() -> cascade_at::Result<()> {
    let (s, d, _) = preset(Preset::CaseA);
    println!("delta1,rho22,rho33,trace");
    for k in -40..=40 {
        let d1 = k as f64 * 10.0;
        let rho = steady_state(&s, &d, EffectiveDetunings { d1, d2: 0.0 })?;
        println!("{d1},{:.6e},{:.6e},{:.6}", rho.population(2), rho.population(3), rho.trace());
    }
    Ok(())
}
