//! Magnetic-sublevel structure of the coupling transition.
//!
//! With both fields linearly polarised along the same axis, M is conserved and
//! each sublevel chain |J₁ M⟩ → |J₂ M⟩ → |J₃ M⟩ is an independent cascade whose
//! coupling Rabi frequency is Ω₂ scaled by the direction-cosine matrix element
//! of the J₂ → J₃ line.

use crate::error::{Error, Result};

/// Field polarisation geometry. Only the parallel linear case is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    LinearParallel,
}

impl std::str::FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear_parallel" | "linear-parallel" => Ok(Polarization::LinearParallel),
            other => Err(Error::UnsupportedPolarization(other.to_string())),
        }
    }
}

/// Relative coupling strength of each M component, normalised to a maximum of 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MSublevelWeights {
    entries: Vec<(i64, f64)>,
}

impl MSublevelWeights {
    /// A single component carrying the nominal Ω₂.
    pub fn single() -> Self {
        MSublevelWeights { entries: vec![(0, 1.0)] }
    }

    /// Builds from explicit (M, weight) pairs; weights must lie in [0, 1]
    /// with maximum exactly 1.
    pub fn from_entries(entries: Vec<(i64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("no M components".into()));
        }
        if entries.iter().any(|&(_, w)| !(0.0..=1.0).contains(&w)) {
            return Err(Error::InvalidParameter("M weights must lie in [0, 1]".into()));
        }
        let max = entries.iter().map(|e| e.1).fold(0.0, f64::max);
        if max != 1.0 {
            return Err(Error::InvalidParameter(format!("largest M weight must be 1, got {max}")));
        }
        Ok(MSublevelWeights { entries })
    }

    pub fn entries(&self) -> &[(i64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct weights with their multiplicities, in ascending weight order.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        let mut ws: Vec<f64> = self.entries.iter().map(|e| e.1).collect();
        ws.sort_by(f64::total_cmp);
        let mut out: Vec<(f64, usize)> = Vec::new();
        for w in ws {
            match out.last_mut() {
                Some((v, n)) if *v == w => *n += 1,
                _ => out.push((w, 1)),
            }
        }
        out
    }
}

/// Weights for the J₂ → J₃ coupling line under `pol`.
///
/// Q lines (J₃ = J₂) scale as |M|; P and R lines as √(J² − M²) with
/// J = max(J₂, J₃). M runs over −min(J₂, J₃) ..= min(J₂, J₃).
pub fn weights(j2: u32, j3: u32, pol: Polarization) -> Result<MSublevelWeights> {
    let Polarization::LinearParallel = pol;
    let diff = j3 as i64 - j2 as i64;
    if diff.abs() > 1 {
        return Err(Error::SelectionRule(diff));
    }
    let jmin = j2.min(j3) as i64;
    let jmax = j2.max(j3) as f64;
    let raw: Vec<(i64, f64)> = (-jmin..=jmin)
        .map(|m| {
            let w = if diff == 0 { m.abs() as f64 } else { (jmax * jmax - (m * m) as f64).sqrt() };
            (m, w)
        })
        .collect();
    let max = raw.iter().map(|e| e.1).fold(0.0, f64::max);
    if max == 0.0 {
        // J₂ = J₃ = 0: no allowed component
        return Err(Error::SelectionRule(0));
    }
    Ok(MSublevelWeights { entries: raw.into_iter().map(|(m, w)| (m, w / max)).collect() })
}

/// Σ_M f(Ω₂·weight(M)). Components sharing a weight are evaluated once.
pub fn m_summed<T, F>(weights: &MSublevelWeights, rabi_2: f64, mut f: F) -> Result<T>
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    F: FnMut(f64) -> Result<T>,
{
    let mut acc: Option<T> = None;
    for (w, n) in weights.distinct() {
        let v = f(rabi_2 * w)? * n as f64;
        acc = Some(match acc {
            None => v,
            Some(a) => a + v,
        });
    }
    acc.ok_or_else(|| Error::InvalidParameter("no M components".into()))
}
