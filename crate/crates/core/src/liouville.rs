//! Exact steady state of the rotating-wave density-matrix equations for the
//! open cascade at a single molecular velocity.
//!
//! Rotating-frame Hamiltonian (units of 2π·MHz):
//!
//! ```text
//!     | 0      -Ω₁/2    0          |
//! H = | -Ω₁/2  -d₁      -Ω₂/2      |
//!     | 0      -Ω₂/2    -(d₁+d₂)   |
//! ```
//!
//! Dissipation: |3⟩ decays at Γ₃ (fraction b₃₂ into |2⟩), |2⟩ decays at Γ₂
//! (fraction b₂₁ into |1⟩), the remainder leaves the manifold. Transit removes
//! every element of ρ at w_t and re-injects population into |1⟩ at w_t.
//! The resulting linear system is solved in a real Hermitian basis, so each
//! velocity class costs one 9×9 real LU factorisation.

use std::f64::consts::PI;

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{DriveParams, LevelScheme, RateParams, SPEED_OF_LIGHT};

/// Velocity-shifted detunings seen by a molecule moving at v_z, MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDetunings {
    pub d1: f64,
    pub d2: f64,
}

impl EffectiveDetunings {
    pub fn rest_frame(drive: &DriveParams) -> Self {
        EffectiveDetunings { d1: drive.detuning_1, d2: drive.detuning_2 }
    }
}

/// d₁ = Δ₁⁰ + s₁ν₁v_z/c and d₂ = Δ₂⁰ + s₂ν₂v_z/c, with `v_z` in m/s.
pub fn effective_detunings(drive: &DriveParams, scheme: &LevelScheme, v_z: f64) -> EffectiveDetunings {
    let beta = v_z / SPEED_OF_LIGHT;
    EffectiveDetunings {
        d1: drive.detuning_1 + drive.dir_1.sign() * scheme.probe_frequency_hz() * 1e-6 * beta,
        d2: drive.detuning_2 + drive.dir_2.sign() * scheme.coupling_frequency_hz() * 1e-6 * beta,
    }
}

/// 3×3 density matrix, row/column order |1⟩, |2⟩, |3⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub [[Complex64; 3]; 3]);

impl DensityMatrix {
    /// Population of level `level` (1-based).
    pub fn population(&self, level: usize) -> f64 {
        self.0[level - 1][level - 1].re
    }

    /// ρ_ij with 1-based indices.
    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.0[i - 1][j - 1]
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.0[i][i].re).sum()
    }

    /// Largest |ρ_ij − conj(ρ_ji)|, relative to the trace.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            worst = worst.max(self.0[i][i].im.abs());
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst / self.trace().abs().max(f64::MIN_POSITIVE)
    }

    fn from_real(x: &SVector<f64, 9>) -> Self {
        let c = Complex64::new;
        let r12 = c(x[3], x[4]);
        let r13 = c(x[5], x[6]);
        let r23 = c(x[7], x[8]);
        DensityMatrix([
            [c(x[0], 0.0), r12, r13],
            [r12.conj(), c(x[1], 0.0), r23],
            [r13.conj(), r23.conj(), c(x[2], 0.0)],
        ])
    }
}

type Mat9 = SMatrix<f64, 9, 9>;

/// Gaussian elimination with partial pivoting, unrolled for the fixed size.
/// Returns the solution and the pivot ratio max|u_ii|/min|u_ii|.
fn eliminate(mut m: Mat9, mut b: SVector<f64, 9>) -> (SVector<f64, 9>, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for col in 0..9 {
        let mut piv = col;
        for row in col + 1..9 {
            if m[(row, col)].abs() > m[(piv, col)].abs() {
                piv = row;
            }
        }
        if piv != col {
            m.swap_rows(piv, col);
            b.swap_rows(piv, col);
        }
        let p = m[(col, col)];
        lo = lo.min(p.abs());
        hi = hi.max(p.abs());
        if p == 0.0 {
            return (SVector::from_element(f64::NAN), f64::INFINITY);
        }
        for row in col + 1..9 {
            let f = m[(row, col)] / p;
            if f != 0.0 {
                for k in col + 1..9 {
                    m[(row, k)] -= f * m[(col, k)];
                }
                b[row] -= f * b[col];
            }
        }
    }
    for col in (0..9).rev() {
        let mut acc = b[col];
        for k in col + 1..9 {
            acc -= m[(col, k)] * b[k];
        }
        b[col] = acc / m[(col, col)];
    }
    (b, hi / lo)
}

// Real coordinates: ρ11, ρ22, ρ33, Re ρ12, Im ρ12, Re ρ13, Im ρ13, Re ρ23, Im ρ23.
const P11: usize = 0;
const P22: usize = 1;
const P33: usize = 2;
const RE12: usize = 3;
const IM12: usize = 4;
const RE13: usize = 5;
const IM13: usize = 6;
const RE23: usize = 7;
const IM23: usize = 8;

/// Steady-state solver with the scheme-dependent dissipative part
/// pre-assembled. Cheap to clone and `Sync`.
#[derive(Debug, Clone)]
pub struct SteadyStateSolver {
    rates: RateParams,
    dissipator: Mat9,
    source: SVector<f64, 9>,
}

impl SteadyStateSolver {
    pub fn new(scheme: &LevelScheme) -> Result<Self> {
        scheme.validate()?;
        if scheme.transit_rate <= 0.0 {
            return Err(Error::SingularSystem);
        }
        let rates = scheme.rates();
        let tp = 2.0 * PI;
        let (g2, g3, w) = (tp * rates.decay_2, tp * rates.decay_3, tp * rates.transit);
        let mut m = Mat9::zeros();
        m[(P11, P11)] = -w;
        m[(P11, P22)] = scheme.branch_2_to_1 * g2;
        m[(P22, P22)] = -(g2 + w);
        m[(P22, P33)] = scheme.branch_3_to_2 * g3;
        m[(P33, P33)] = -(g3 + w);
        for (idx, gamma) in [
            (RE12, rates.gamma_12),
            (IM12, rates.gamma_12),
            (RE13, rates.gamma_13),
            (IM13, rates.gamma_13),
            (RE23, rates.gamma_23),
            (IM23, rates.gamma_23),
        ] {
            m[(idx, idx)] = -tp * gamma;
        }
        let mut source = SVector::<f64, 9>::zeros();
        source[P11] = -w;
        Ok(SteadyStateSolver { rates, dissipator: m, source })
    }

    pub fn rates(&self) -> &RateParams {
        &self.rates
    }

    /// Full 9×9 generator for the given fields and detunings.
    fn generator(&self, rabi_1: f64, rabi_2: f64, det: EffectiveDetunings) -> Mat9 {
        let tp = 2.0 * PI;
        let a = tp * rabi_1 / 2.0;
        let b = tp * rabi_2 / 2.0;
        let d1 = tp * det.d1;
        let d2 = tp * det.d2;
        let d12 = d1 + d2;
        let mut m = self.dissipator;

        m[(P11, IM12)] += 2.0 * a;
        m[(P22, IM12)] -= 2.0 * a;
        m[(P22, IM23)] += 2.0 * b;
        m[(P33, IM23)] -= 2.0 * b;

        // ρ12
        m[(RE12, IM12)] += d1;
        m[(RE12, IM13)] += b;
        m[(IM12, RE12)] -= d1;
        m[(IM12, P11)] -= a;
        m[(IM12, P22)] += a;
        m[(IM12, RE13)] -= b;

        // ρ13
        m[(RE13, IM13)] += d12;
        m[(RE13, IM23)] -= a;
        m[(RE13, IM12)] += b;
        m[(IM13, RE13)] -= d12;
        m[(IM13, RE23)] += a;
        m[(IM13, RE12)] -= b;

        // ρ23
        m[(RE23, IM23)] += d2;
        m[(RE23, IM13)] -= a;
        m[(IM23, RE23)] -= d2;
        m[(IM23, RE13)] += a;
        m[(IM23, P22)] -= b;
        m[(IM23, P33)] += b;
        m
    }

    pub fn solve(&self, rabi_1: f64, rabi_2: f64, det: EffectiveDetunings) -> Result<DensityMatrix> {
        let (x, condition) = eliminate(self.generator(rabi_1, rabi_2, det), self.source);
        if x.iter().any(|v| !v.is_finite()) || condition > 1e14 {
            return Err(Error::SolverFailure { condition });
        }
        Ok(DensityMatrix::from_real(&x))
    }

    /// (Γ₂ρ₂₂, Γ₃ρ₃₃) at one velocity class.
    pub fn fluorescence(&self, rabi_1: f64, rabi_2: f64, det: EffectiveDetunings) -> Result<(f64, f64)> {
        let rho = self.solve(rabi_1, rabi_2, det)?;
        Ok((self.rates.decay_2 * rho.population(2), self.rates.decay_3 * rho.population(3)))
    }
}

/// Unique stationary density matrix for the given fields at detunings `det`.
pub fn steady_state(scheme: &LevelScheme, drive: &DriveParams, det: EffectiveDetunings) -> Result<DensityMatrix> {
    drive.validate()?;
    SteadyStateSolver::new(scheme)?.solve(drive.rabi_1, drive.rabi_2, det)
}

/// Side-fluorescence rates (Γ₂ρ₂₂, Γ₃ρ₃₃) in MHz; detection-channel
/// branching is a common constant and is left out.
pub fn fluorescence_rates(rho: &DensityMatrix, scheme: &LevelScheme) -> (f64, f64) {
    let r = scheme.rates();
    (r.decay_2 * rho.population(2), r.decay_3 * rho.population(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, Preset};

    fn case_a() -> (LevelScheme, DriveParams) {
        let (s, d, _) = preset(Preset::CaseA);
        (s, d)
    }

    #[test]
    fn detunings_at_rest_and_in_motion() {
        let (s, d) = case_a();
        let det = effective_detunings(&d, &s, 0.0);
        assert_eq!(det, EffectiveDetunings::rest_frame(&d));
        let moving = effective_detunings(&d, &s, 100.0);
        assert!(moving.d1 > d.detuning_1);
        assert!(moving.d2 < d.detuning_2);
        // ν₁v/c = 14647.547 cm⁻¹ × 100 m/s
        assert!((moving.d1 - 146.475_47).abs() < 1e-5, "{}", moving.d1);
    }

    #[test]
    fn no_probe_means_ground_state() {
        let (s, d) = case_a();
        let rho = steady_state(&s, &DriveParams { rabi_1: 0.0, ..d }, EffectiveDetunings::rest_frame(&d)).unwrap();
        assert!((rho.population(1) - 1.0).abs() < 1e-14);
        assert!(rho.population(2).abs() < 1e-15 && rho.population(3).abs() < 1e-15);
        for (i, j) in [(1, 2), (1, 3), (2, 3)] {
            assert!(rho.element(i, j).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_transit_is_singular() {
        let (s, d) = case_a();
        let s = LevelScheme { transit_rate: 0.0, ..s };
        assert_eq!(
            steady_state(&s, &d, EffectiveDetunings::rest_frame(&d)),
            Err(Error::SingularSystem)
        );
    }

    #[test]
    fn two_level_limit_matches_closed_form() {
        // Ω₂ = 0 and b₂₁ = 1: levels 1–2 form a driven two-level system with transit.
        let (s, d) = case_a();
        let s = LevelScheme { branch_2_to_1: 1.0, branch_3_to_2: 1.0, ..s };
        let r = s.rates();
        for (omega_1, d1) in [(0.5, 0.0), (2.0, 0.0), (5.0, 7.5), (20.0, -30.0)] {
            let drive = DriveParams { rabi_1: omega_1, rabi_2: 0.0, ..d };
            let rho = steady_state(&s, &drive, EffectiveDetunings { d1, d2: 0.0 }).unwrap();
            let a = omega_1 / 2.0;
            let gamma = r.gamma_12;
            let total = r.decay_2 + r.transit;
            let expected = 2.0 * a * a * gamma / (total * (gamma * gamma + d1 * d1) + 4.0 * a * a * gamma);
            assert!(((rho.population(2) - expected) / expected).abs() < 1e-8, "{} vs {expected}", rho.population(2));
            assert!((rho.trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fluorescence_is_linear_in_population() {
        let (s, d) = case_a();
        let rho = steady_state(&s, &d, EffectiveDetunings::rest_frame(&d)).unwrap();
        let (i2, i3) = fluorescence_rates(&rho, &s);
        assert!(i3 > 0.0 && i2 > 0.0);
        let mut doubled = rho;
        doubled.0[2][2] *= 2.0;
        let (_, i3d) = fluorescence_rates(&doubled, &s);
        assert!((i3d - 2.0 * i3).abs() < 1e-15 * i3.abs().max(1.0));
        let zero = DensityMatrix([[Complex64::new(0.0, 0.0); 3]; 3]);
        assert_eq!(fluorescence_rates(&zero, &s), (0.0, 0.0));
    }

    #[test]
    fn resonant_autler_townes_dip_before_averaging() {
        let (s, d) = case_a();
        let solver = SteadyStateSolver::new(&s).unwrap();
        let rho33 = |d1: f64| solver.solve(d.rabi_1, d.rabi_2, EffectiveDetunings { d1, d2: 0.0 }).unwrap().population(3);
        let centre = rho33(0.0);
        assert!(centre < rho33(-2.0) && centre < rho33(2.0));
        assert!(rho33(200.0) > 10.0 * centre);
    }
}
