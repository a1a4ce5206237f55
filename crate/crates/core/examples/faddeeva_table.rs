//! w(z) on a few points of both half-planes, with the quadrature reference.
use cascade_at::faddeeva::{w, w_reference};
use num_complex::Complex64;

fn main() -> cascade_at::Result<()> {
    let points = [(0.0, 0.0), (1.0, 1.0), (3.0, 0.1), (-2.0, 0.5), (0.5, -0.5), (5.0, -2.0), (12.0, 4.0)];
    for (re, im) in points {
        let z = Complex64::new(re, im);
        let (a, b) = (w(z)?, w_reference(z)?);
        println!("w({z:>10}) = {a:.12}   |Δ|/|w| = {:.1e}", (a - b).norm() / b.norm());
    }
    Ok(())
}
