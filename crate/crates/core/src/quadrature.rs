//! Quadrature rules: Gauss-Hermite for smooth Gaussian-weighted integrands
//! and a globally adaptive Gauss-Kronrod (7/15) integrator for integrands
//! with narrow resonances.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::num::NonZeroUsize;

use gauss_quad::GaussHermite;

use crate::error::{Error, Result};

/// Gauss-Hermite nodes and weights for ∫ e^{-t²} f(t) dt.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn gauss_hermite(order: usize) -> Result<Self> {
        let deg = NonZeroUsize::new(order)
            .ok_or_else(|| Error::InvalidParameter("quadrature order must be positive".into()))?;
        let rule = GaussHermite::new(deg);
        let mut nodes: Vec<f64> = rule.nodes().copied().collect();
        let mut weights: Vec<f64> = rule.weights().copied().collect();
        // Enforce exact mirror symmetry; the eigen-solver leaves ~1e-13 asymmetry.
        let n = nodes.len();
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            let w = 0.5 * (weights[i] + weights[j]);
            nodes[i] = -x;
            nodes[j] = x;
            weights[i] = w;
            weights[j] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(QuadratureRule { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Σ_k w_k f(t_k), summed in ascending node order.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

// Kronrod abscissae (non-negative half) and weights; Gauss points are the odd indices.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions { rel_tol: 1e-8, abs_tol: 0.0, max_intervals: 20_000 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    lo: f64,
    hi: f64,
    value: [f64; N],
    error: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn kronrod<const N: usize, F>(f: &mut F, lo: f64, hi: f64) -> Result<([f64; N], [f64; N])>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut fx = [[0.0; N]; 15];
    fx[7] = f(centre)?;
    for k in 0..7 {
        let dx = half * XGK[k];
        fx[k] = f(centre - dx)?;
        fx[14 - k] = f(centre + dx)?;
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for c in 0..N {
        let mut res_k = WGK[7] * fx[7][c];
        let mut res_g = WG[3] * fx[7][c];
        for k in 0..7 {
            let pair = fx[k][c] + fx[14 - k][c];
            res_k += WGK[k] * pair;
            if k % 2 == 1 {
                res_g += WG[k / 2] * pair;
            }
        }
        let mean = 0.5 * res_k;
        let mut asc = WGK[7] * (fx[7][c] - mean).abs();
        for k in 0..7 {
            asc += WGK[k] * ((fx[k][c] - mean).abs() + (fx[14 - k][c] - mean).abs());
        }
        let res_asc = asc * half.abs();
        let mut err = ((res_k - res_g) * half).abs();
        if res_asc != 0.0 && err != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        value[c] = res_k * half;
        error[c] = err;
    }
    Ok((value, error))
}

/// Globally adaptive Gauss-Kronrod integration of a vector-valued function
/// over `[lo, hi]`. `breakpoints` inside the interval seed the initial
/// partition; put them at (and around) known narrow features.
///
/// Every component must meet `max(abs_tol, rel_tol·|I|)`. The result is
/// summed left to right, so identical inputs give identical bits.
pub fn integrate_adaptive<const N: usize, F>(
    mut f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    opts: &AdaptiveOptions,
) -> Result<[f64; N]>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|b| b.is_finite() && *b > lo && *b < hi).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));

    let mut panels = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        let (value, error) = kronrod(&mut f, w[0], w[1])?;
        panels.push(Panel { lo: w[0], hi: w[1], value, error, priority: 0.0 });
    }

    let mut scale = [0.0; N];
    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    for p in &panels {
        for c in 0..N {
            scale[c] += p.value[c].abs();
            total[c] += p.value[c];
            total_err[c] += p.error[c];
        }
    }
    let tol = |total: &[f64; N], c: usize| opts.abs_tol.max(opts.rel_tol * total[c].abs());
    let priority = |err: &[f64; N]| {
        (0..N)
            .map(|c| err[c] / scale[c].max(opts.abs_tol).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };

    let mut heap: BinaryHeap<Panel<N>> = panels
        .into_iter()
        .map(|mut p| {
            p.priority = priority(&p.error);
            p
        })
        .collect();

    loop {
        if (0..N).all(|c| total_err[c] <= tol(&total, c)) {
            break;
        }
        if heap.len() >= opts.max_intervals {
            let worst = (0..N).map(|c| total_err[c]).fold(0.0, f64::max);
            return Err(Error::NonConvergence { error: worst, intervals: heap.len() });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // panel can no longer be split in floating point
            heap.push(Panel { priority: 0.0, ..worst });
            let worst_err = (0..N).map(|c| total_err[c]).fold(0.0, f64::max);
            return Err(Error::NonConvergence { error: worst_err, intervals: heap.len() });
        }
        let (lv, le) = kronrod(&mut f, worst.lo, mid)?;
        let (rv, re) = kronrod(&mut f, mid, worst.hi)?;
        for c in 0..N {
            total[c] += lv[c] + rv[c] - worst.value[c];
            total_err[c] += le[c] + re[c] - worst.error[c];
        }
        heap.push(Panel { lo: worst.lo, hi: mid, value: lv, error: le, priority: priority(&le) });
        heap.push(Panel { lo: mid, hi: worst.hi, value: rv, error: re, priority: priority(&re) });
    }

    let mut done = heap.into_vec();
    done.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out = [0.0; N];
    for p in &done {
        for c in 0..N {
            out[c] += p.value[c];
        }
    }
    Ok(out)
}

/// Breakpoints `centre ± width·16^k` for k = 0, 1, … while inside `[lo, hi]`,
/// plus the centre itself. Resolves a Lorentzian of half-width `width`.
pub fn resonance_breakpoints(centre: f64, width: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
    if !(centre.is_finite() && width.is_finite()) || width <= 0.0 {
        return;
    }
    out.push(centre);
    let mut w = width;
    let span = hi - lo;
    while w < span {
        out.push(centre - w);
        out.push(centre + w);
        w *= 16.0;
    }
}
