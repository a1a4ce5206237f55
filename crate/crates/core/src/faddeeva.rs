//! The Faddeeva function w(z) = e^{-z²} erfc(-iz).
//!
//! Upper half-plane: Weideman's 32-term rational expansion for |z| < 6 and
//! the Laplace continued fraction beyond. The lower half-plane follows from
//! w(z) = 2e^{-z²} − w(−z). On the real axis Re w(x) = e^{-x²} is returned
//! exactly.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, resonance_breakpoints, AdaptiveOptions};

/// Largest |z| accepted by [`w`].
pub const MAX_ARGUMENT: f64 = 1e8;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const WEIDEMAN_TERMS: usize = 32;
const CONTINUED_FRACTION_DEPTH: usize = 40;
const CROSSOVER_RADIUS: f64 = 6.0;

struct Weideman {
    scale: f64,
    coeffs: [f64; WEIDEMAN_TERMS],
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_TERMS;
        let m = 2 * n;
        let len = 2 * m;
        let scale = (n as f64 / std::f64::consts::SQRT_2).sqrt();
        // samples f(k) for k = -m+1 ..= m-1, padded with a leading zero, then fftshifted
        let mut samples = vec![0.0; len];
        for k in (-(m as i64) + 1)..(m as i64) {
            let theta = k as f64 * PI / m as f64;
            let t = scale * (theta / 2.0).tan();
            let value = (-t * t).exp() * (scale * scale + t * t);
            let padded = (k + m as i64) as usize;
            samples[(padded + m) % len] = value;
        }
        let mut coeffs = [0.0; WEIDEMAN_TERMS];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let freq = (j + 1) as f64;
            let re: f64 = samples
                .iter()
                .enumerate()
                .map(|(i, &s)| s * (2.0 * PI * freq * i as f64 / len as f64).cos())
                .sum();
            *c = re / len as f64;
        }
        Weideman { scale, coeffs }
    })
}

fn w_rational(z: Complex64) -> Complex64 {
    let table = weideman();
    let i = Complex64::i();
    let l = Complex64::new(table.scale, 0.0);
    let denom = l - i * z;
    let zz = (l + i * z) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for &c in table.coeffs.iter().rev() {
        p = p * zz + c;
    }
    2.0 * p / (denom * denom) + FRAC_1_SQRT_PI / denom
}

fn w_continued_fraction(z: Complex64) -> Complex64 {
    let mut r = Complex64::new(0.0, 0.0);
    for k in (1..=CONTINUED_FRACTION_DEPTH).rev() {
        r = (k as f64 / 2.0) / (z - r);
    }
    Complex64::new(0.0, FRAC_1_SQRT_PI) / (z - r)
}

fn w_upper(z: Complex64) -> Complex64 {
    let v = if z.norm() < CROSSOVER_RADIUS { w_rational(z) } else { w_continued_fraction(z) };
    if z.im == 0.0 {
        Complex64::new((-z.re * z.re).exp(), v.im)
    } else {
        v
    }
}

/// Faddeeva function for |z| ≤ [`MAX_ARGUMENT`]. Lower-half-plane values
/// grow like e^{y²−x²} and may overflow; that is reported as a domain error.
pub fn w(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > MAX_ARGUMENT {
        return Err(Error::Domain(format!("{z}")));
    }
    let v = if z.im >= 0.0 { w_upper(z) } else { 2.0 * (-z * z).exp() - w_upper(-z) };
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{z} (overflow)")))
    }
}

/// Slow quadrature oracle for w(z), |z| ≤ 50.
///
/// For Im z ≥ 0 the defining integral (i/π)∫ e^{-t²}/(z − t) dt is folded
/// about t = Re z so that the real-axis limit is a smooth principal value:
///
/// ```text
/// Re w = (y/π) ∫₀^∞ [g(x−s) + g(x+s)] / (s² + y²) ds
/// Im w = (1/π) ∫₀^∞ [g(x−s) − g(x+s)] · s / (s² + y²) ds,   g(t) = e^{-t²}
/// ```
///
/// Each integral is evaluated adaptively to 1e-12 relative to |w|.
pub fn w_reference(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > 50.0 {
        return Err(Error::Domain(format!("{z}")));
    }
    if z.im < 0.0 {
        return Ok(2.0 * (-z * z).exp() - w_reference(-z)?);
    }
    let (x, y) = (z.re, z.im);
    let upper = x.abs() + 10.0;
    // |w| ≳ 1/(√π(1 + |z|)) in the upper half-plane, so this floor keeps the
    // complex relative error near 1e-12 when one component is nearly zero.
    let floor = 1e-14 / (1.0 + z.norm());
    let opts = AdaptiveOptions { rel_tol: 1e-12, abs_tol: floor, max_intervals: 100_000 };
    let g = |t: f64| (-t * t).exp();

    let mut bp = vec![x.abs(), (x.abs() - 1.0).max(0.0), x.abs() + 1.0];
    if y > 0.0 {
        resonance_breakpoints(0.0, y, 0.0, upper, &mut bp);
    }
    let re = if y == 0.0 {
        g(x)
    } else {
        let [v] = integrate_adaptive(|s| Ok([(g(x - s) + g(x + s)) / (s * s + y * y)]), 0.0, upper, &bp, &opts)?;
        y * v / PI
    };
    let [im] = integrate_adaptive(
        |s| {
            let odd = g(x - s) - g(x + s);
            Ok([if s == 0.0 && y == 0.0 { 4.0 * x * g(x) } else { odd * s / (s * s + y * y) }])
        },
        0.0,
        upper,
        &bp,
        &opts,
    )?;
    Ok(Complex64::new(re, im / PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn origin() {
        assert_eq!(w(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert!(rel(w_reference(c(0.0, 0.0)).unwrap(), c(1.0, 0.0)) < 1e-12);
    }

    #[test]
    fn tabulated_values() {
        // e⁴·erfc(2)
        let v = w(c(0.0, 2.0)).unwrap();
        assert!((v.re - 0.255_395_676_310_505_7).abs() < 1e-12 && v.im.abs() < 1e-14);
        // e^{-4} + i(2/√π)·Dawson(2)
        let v = w(c(2.0, 0.0)).unwrap();
        assert!((v.re - (-4.0f64).exp()).abs() < 1e-16);
        assert!((v.im - 0.340_026_217_066_066_5).abs() < 1e-12, "{v}");
    }

    #[test]
    fn reference_imaginary_axis_is_real() {
        for y in [0.01, 0.5, 3.0, 20.0] {
            let v = w_reference(c(0.0, y)).unwrap();
            assert!(v.im.abs() < 1e-14, "{v}");
            assert!(rel(v, w(c(0.0, y)).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn reference_matches_leading_asymptotics() {
        let z = c(10.0, 10.0);
        let lead = c(0.0, 1.0) / (PI.sqrt() * z);
        assert!(rel(w_reference(z).unwrap(), lead) < 0.01);
    }

    #[test]
    fn both_regions_agree_with_reference() {
        for &z in &[c(0.3, 0.1), c(-2.5, 0.7), c(5.9, 0.01), c(6.1, 0.01), c(-8.0, 3.0), c(1.0, 1e-6), c(3.0, 0.0)] {
            let e = rel(w(z).unwrap(), w_reference(z).unwrap());
            assert!(e < 1e-9, "{z}: {e}");
        }
    }

    #[test]
    fn large_argument_asymptotics() {
        for theta in [0.1, 0.8, 1.5, 2.9] {
            let z = Complex64::from_polar(1e4, theta);
            let v = z * w(z).unwrap() * PI.sqrt();
            assert!((v - c(0.0, 1.0)).norm() < 1e-3);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(w(c(2e8, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(w(c(f64::NAN, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(w(c(0.0, -40.0)), Err(Error::Domain(_))));
        assert!(matches!(w_reference(c(60.0, 0.0)), Err(Error::Domain(_))));
    }
}
