//! Preset level schemes, their rates and Doppler widths.
use cascade_at::model::{doppler_fwhm, preset, wavenumber_ratio, Preset};

fn main() {
    for case in Preset::ALL {
        let (s, d, p) = preset(case);
        let r = s.rates();
        println!("{case}");
        println!("  Γ2 = {:.3} MHz  Γ3 = {:.3} MHz  w = {} MHz", r.decay_2, r.decay_3, r.transit);
        println!("  γ12 = {:.3}  γ13 = {:.3}  γ23 = {:.3}", r.gamma_12, r.gamma_13, r.gamma_23);
        println!("  x = k1/k2 = {:.3}", wavenumber_ratio(&s, &d));
        println!("  Ω1 = {} MHz  Ω2 = {} MHz  Δ2 = {} MHz", d.rabi_1, d.rabi_2, d.detuning_2);
        println!("  probe Doppler FWHM {:.1} MHz ({p:?})", p.fwhm_mhz(&s));
        for t in [300.0, 625.0, 900.0] {
            println!("    T = {t:>5} K  FWHM = {:.1} MHz", doppler_fwhm(&s, t));
        }
    }
}
