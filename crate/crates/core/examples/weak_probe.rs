//! Closed-form weak-probe populations against the exact solver.
use cascade_at::lineshape::{rho22_weak_probe, rho33_weak_probe};
use cascade_at::liouville::{steady_state, EffectiveDetunings};
use cascade_at::model::{preset, DriveParams, Preset};

fn main() -> cascade_at::Result<()> {
    let (s, d, _) = preset(Preset::CaseA);
    let d = DriveParams { rabi_1: s.rates().decay_2 / 20.0, ..d };
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "delta1", "rho33", "weak", "rho22", "weak");
    for k in -12..=12 {
        let det = EffectiveDetunings { d1: k as f64 * 25.0, d2: 0.0 };
        let rho = steady_state(&s, &d, det)?;
        println!(
            "{:>8} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            det.d1,
            rho.population(3),
            rho33_weak_probe(&s, &d, det),
            rho.population(2),
            rho22_weak_probe(&s, &d, det)
        );
    }
    Ok(())
}
