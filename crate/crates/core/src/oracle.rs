//! Slow reference paths used to check the fast transforms, and evaluators
//! for the CWT error bounds of the superposition model.
//!
//! Everything here is deliberately direct: time-domain sums instead of FFTs,
//! nested loops instead of vectorized passes. Instance sizes are capped.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::cwt::{MotherWavelet, Scalogram};
use crate::error::{Error, Result};
use crate::signal::{SuperpositionSpec, TimeGrid};
use crate::sst::{FrequencyBins, SstPlane};

/// Largest signal length accepted by the quadrature and brute-force paths.
pub const MAX_ORACLE_LEN: usize = 1024;
/// Time-domain wavelet truncation in units of `a/Δ`; `|ψ|` has decayed by
/// about nine orders of magnitude there.
const KERNEL_REACH: f64 = 40.0;

fn check_size(n: usize) -> Result<()> {
    if n > MAX_ORACLE_LEN {
        return Err(Error::InstanceTooLarge {
            size: n,
            max: MAX_ORACLE_LEN,
        });
    }
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    Ok(())
}

/// Mirror extension used by the fast path, restated independently:
/// `x[-j] = x[j]`, `x[n-1+j] = x[n-1-j]`.
fn mirror(samples: &[Complex64], j: isize) -> Complex64 {
    let n = samples.len() as isize;
    let period = 2 * (n - 1);
    if period == 0 {
        return samples[0];
    }
    let r = j.rem_euclid(period);
    samples[if r < n { r } else { period - r } as usize]
}

/// `∫ f(t) a^{−1/2} conj(ψ((t−b)/a)) dt` by the rectangle rule over the
/// periodically extended, mirror-padded signal, at sample indices `b_idx`.
///
/// The padded length matches the fast path, so both compute the same
/// periodic problem; `ψ` is obtained from `ψ̂` by quadrature.
pub fn cwt_quadrature(
    samples: &[Complex64],
    grid: TimeGrid,
    w: &MotherWavelet,
    a: f64,
    b_idx: &[usize],
) -> Result<Vec<Complex64>> {
    let n = samples.len();
    check_size(n)?;
    if !(a > 0.0) {
        return Err(Error::Config(format!("scale must be positive, got {a}")));
    }
    let pad = (0.1 * n as f64).ceil() as usize;
    let total = (n + 2 * pad).next_power_of_two();
    let left = (total - n) / 2;
    let padded: Vec<Complex64> = (0..total).map(|p| mirror(samples, p as isize - left as isize)).collect();

    // kernel[d] = Σ_m conj ψ((d + m·total)·dt/a), the periodized wavelet
    let reach = (KERNEL_REACH / w.delta() * a / grid.dt).ceil() as isize;
    let mut kernel = vec![Complex64::default(); total];
    for off in -reach..=reach {
        let x = off as f64 * grid.dt / a;
        kernel[off.rem_euclid(total as isize) as usize] += w.time_domain(x).conj();
    }
    let scale = grid.dt / a.sqrt();
    b_idx
        .iter()
        .map(|&i| {
            if i >= n {
                return Err(Error::Config(format!("time index {i} out of range")));
            }
            let centre = left + i;
            let mut acc = Complex64::default();
            for (p, x) in padded.iter().enumerate() {
                let d = (p + total - centre) % total;
                acc += x * kernel[d];
            }
            Ok(acc * scale)
        })
        .collect()
}

/// Centered difference of `W` along `b`; one-sided at the two ends.
pub fn fd_time_derivative(sc: &Scalogram) -> Array2<Complex64> {
    let (rows, n) = sc.w.dim();
    let dt = sc.grid.dt;
    let mut out = Array2::zeros((rows, n));
    if n < 2 {
        return out;
    }
    for j in 0..rows {
        for b in 0..n {
            out[[j, b]] = if b == 0 {
                (sc.w[[j, 1]] - sc.w[[j, 0]]) / dt
            } else if b == n - 1 {
                (sc.w[[j, n - 1]] - sc.w[[j, n - 2]]) / dt
            } else {
                (sc.w[[j, b + 1]] - sc.w[[j, b - 1]]) / (2.0 * dt)
            };
        }
    }
    out
}

/// Direct nested-loop evaluation of the squeeze sum from a scalogram.
///
/// For `alpha > 0` the Gaussian weights are normalized over every bin, not a
/// truncated neighbourhood.
pub fn sst_bruteforce(sc: &Scalogram, bins: &FrequencyBins, alpha: f64, gamma: f64) -> Result<SstPlane> {
    check_size(sc.grid.n)?;
    let nscales = sc.scales.len();
    let centers: Vec<f64> = (0..bins.count).map(|k| bins.lo + (k as f64 + 0.5) * bins.width).collect();
    let mut s = Array2::<Complex64>::zeros((bins.count, sc.grid.n));
    for b in 0..sc.grid.n {
        for j in 0..nscales {
            let w = sc.w[[j, b]];
            if !(w.norm() > gamma) {
                continue;
            }
            let om = (sc.dw[[j, b]] / (w * Complex64::new(0.0, 2.0 * PI))).re;
            if !(om >= bins.lo && om < bins.lo + bins.count as f64 * bins.width) {
                continue;
            }
            let a = sc.scales.scales()[j];
            let da = a * std::f64::consts::LN_2 / sc.scales.voices() as f64;
            let mass = w * a.powf(-1.5) * da;
            if alpha == 0.0 {
                let k = ((om - bins.lo) / bins.width).floor() as usize;
                s[[k.min(bins.count - 1), b]] += mass / bins.width;
            } else {
                let weights: Vec<f64> = centers
                    .iter()
                    .map(|c| (-((c - om) / alpha).powi(2)).exp())
                    .collect();
                let total: f64 = weights.iter().sum::<f64>() * bins.width;
                if total == 0.0 {
                    let k = ((om - bins.lo) / bins.width).floor() as usize;
                    s[[k.min(bins.count - 1), b]] += mass / bins.width;
                    continue;
                }
                for (k, wk) in weights.iter().enumerate() {
                    s[[k, b]] += mass * (wk / total);
                }
            }
        }
    }
    Ok(SstPlane {
        grid: sc.grid,
        bins: *bins,
        s,
        alpha,
        gamma,
    })
}

/// Per-component quantities entering the CWT error bounds.
#[derive(Debug, Clone)]
pub struct ComponentMetrics {
    /// `‖s_k‖_∞`.
    pub sup_norm: f64,
    /// `Σ_j |j| |ŝ_k(j)|`.
    pub weighted_l1: f64,
    /// `M″_k = sup |φ″_k|`.
    pub m2: f64,
}

/// Wavelet integrals and component metrics for a superposition.
#[derive(Debug, Clone)]
pub struct BoundContext {
    pub spec: SuperpositionSpec,
    pub delta: f64,
    /// `I_0..I_3`.
    pub moments: [f64; 4],
    /// `I′_0..I′_3`.
    pub derivative_moments: [f64; 4],
    pub metrics: Vec<ComponentMetrics>,
}

impl BoundContext {
    /// `M″_k` is the maximum of `|φ″_k|` over `grid`.
    pub fn new(spec: &SuperpositionSpec, w: &MotherWavelet, grid: &TimeGrid) -> Self {
        let metrics = spec
            .components
            .iter()
            .map(|c| ComponentMetrics {
                sup_norm: c.shape.sup_norm(),
                weighted_l1: c.shape.weighted_l1(),
                m2: grid
                    .times()
                    .map(|t| c.phase.second_derivative(t, grid.dt).abs())
                    .fold(0.0, f64::max),
            })
            .collect();
        BoundContext {
            spec: spec.clone(),
            delta: w.delta(),
            moments: std::array::from_fn(|i| w.moment(i)),
            derivative_moments: std::array::from_fn(|i| w.derivative_moment(i)),
            metrics,
        }
    }

    fn phi_prime(&self, k: usize, b: f64) -> f64 {
        self.spec.components[k].phase.derivative(b, 1e-5)
    }

    /// Whether `|a·n·φ′_l(b) − 1| < Δ`.
    pub fn in_band(&self, a: f64, b: f64, l: usize, n: usize) -> bool {
        (a * n as f64 * self.phi_prime(l, b) - 1.0).abs() < self.delta
    }
}

/// `Λ₁(a,b)` and `Λ₂(a,b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwtBounds {
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Evaluates `Λ₁`, `Λ₂` for component `l` (zero-based) and harmonic `n ≥ 1`.
pub fn cwt_bounds(ctx: &BoundContext, a: f64, b: f64, l: usize, n: usize) -> Result<CwtBounds> {
    if l >= ctx.spec.components.len() || n == 0 {
        return Err(Error::Config(format!("no band for component {l}, harmonic {n}")));
    }
    if !ctx.in_band(a, b, l, n) {
        return Err(Error::OutsideBand { a, b });
    }
    let [i0, i1, i2, i3] = ctx.moments;
    let [_, d1, d2, d3] = ctx.derivative_moments;
    let (mut l1, mut l2) = (0.0, 0.0);
    for (k, (c, m)) in ctx.spec.components.iter().zip(&ctx.metrics).enumerate() {
        let amp = c.amplitude.value(b);
        let fp = ctx.phi_prime(k, b);
        let sw = PI * amp * m.weighted_l1;
        l1 += m.sup_norm * (fp * a * i1 + 0.5 * m.m2 * a * a * i2)
            + sw * (a * a * i2 * fp.abs() + m.m2 / 3.0 * a.powi(3) * i3);
        l2 += m.sup_norm * (fp * d1 + 0.5 * m.m2 * a * d2)
            + sw * (a * d2 * fp.abs() + m.m2 / 3.0 * a * a * d3);
        if k < l {
            l1 += i0 * amp;
            l2 += 2.0 * PI * i0 * amp * fp;
        }
    }
    Ok(CwtBounds {
        lambda1: l1,
        lambda2: l2,
    })
}

/// Leading term `A_l(b) ŝ_l(n) e^{2πinφ_l(b)} √a ψ̂(a n φ′_l(b))` of `W`.
pub fn leading_term(ctx: &BoundContext, w: &MotherWavelet, a: f64, b: f64, l: usize, n: usize) -> Complex64 {
    let c = &ctx.spec.components[l];
    let phase = Complex64::from_polar(1.0, 2.0 * PI * n as f64 * c.phase.value(b));
    c.shape.coeff(n) * phase * (c.amplitude.value(b) * a.sqrt() * w.spectrum(a * n as f64 * ctx.phi_prime(l, b)))
}

/// `ε^{2/3} a^{1/2} (Λ₁ n φ′_l + Λ₂/2π)`, valid where `|W| ≥ ε^{1/3}`.
pub fn omega_bound(eps: f64, a: f64, bounds: &CwtBounds, n: usize, phi_prime: f64) -> f64 {
    eps.powf(2.0 / 3.0) * a.sqrt() * (bounds.lambda1 * n as f64 * phi_prime + bounds.lambda2 / (2.0 * PI))
}

/// `ε a^{1/2} (Λ₁ n φ′_l + Λ₂/2π) / |W|`, the same estimate before `|W|` is
/// replaced by its lower bound `ε^{1/3}`.
pub fn omega_bound_at(eps: f64, a: f64, bounds: &CwtBounds, n: usize, phi_prime: f64, w_abs: f64) -> f64 {
    eps * a.sqrt() * (bounds.lambda1 * n as f64 * phi_prime + bounds.lambda2 / (2.0 * PI)) / w_abs
}
