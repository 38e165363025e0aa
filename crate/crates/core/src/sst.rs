//! Instantaneous-frequency information function and the synchrosqueezing transform.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cwt::Scalogram;
use crate::error::{Error, Result};
use crate::signal::TimeGrid;

/// Default number of frequency bins.
pub const DEFAULT_BINS: usize = 512;
/// Relative factor of the median-based default threshold.
pub const DEFAULT_THRESHOLD_RHO: f64 = 0.3;
/// Gaussian kernels are evaluated out to this many `α` from their centre.
const KERNEL_REACH: f64 = 8.0;

/// `ω_f(a,b) = Re[−i ∂_b W / (2π W)]` where `|W| > γ`.
#[derive(Debug, Clone)]
pub struct OmegaPlane {
    pub gamma: f64,
    /// `[scales × time]`; NaN marks the undefined sentinel.
    pub omega: Array2<f64>,
    /// Imaginary part of the ratio, NaN where undefined.
    pub residual: Array2<f64>,
}

impl OmegaPlane {
    pub fn get(&self, scale: usize, time: usize) -> Option<f64> {
        let v = self.omega[[scale, time]];
        (!v.is_nan()).then_some(v)
    }

    pub fn defined_count(&self) -> usize {
        self.omega.iter().filter(|v| !v.is_nan()).count()
    }
}

pub fn omega(sc: &Scalogram, gamma: f64) -> OmegaPlane {
    let mut om = Array2::from_elem(sc.w.dim(), f64::NAN);
    let mut res = Array2::from_elem(sc.w.dim(), f64::NAN);
    for ((idx, w), dw) in sc.w.indexed_iter().zip(sc.dw.iter()) {
        if w.norm() > gamma {
            let r = dw * Complex64::new(0.0, -1.0) / (w * (2.0 * PI));
            om[idx] = r.re;
            res[idx] = r.im;
        }
    }
    OmegaPlane {
        gamma,
        omega: om,
        residual: res,
    }
}

/// `1e−8 + ρ·median|W|`.
pub fn default_threshold(sc: &Scalogram, rho: f64) -> f64 {
    let mut mags: Vec<f64> = sc.w.iter().map(|w| w.norm()).collect();
    if mags.is_empty() {
        return 1e-8;
    }
    let mid = mags.len() / 2;
    let (_, m, _) = mags.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    1e-8 + rho * *m
}

/// Uniform frequency bins `[lo + k·w, lo + (k+1)·w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyBins {
    pub lo: f64,
    pub width: f64,
    pub count: usize,
}

impl FrequencyBins {
    /// `count` bins covering `[f_min, f_max]`.
    pub fn linear(f_min: f64, f_max: f64, count: usize) -> Result<Self> {
        if !(f_min > 0.0) {
            return Err(Error::Config(format!("frequency bins must be positive, got lower edge {f_min}")));
        }
        if !(f_max > f_min) || count == 0 {
            return Err(Error::Config(format!("invalid bin range [{f_min}, {f_max}] x {count}")));
        }
        Ok(FrequencyBins {
            lo: f_min,
            width: (f_max - f_min) / count as f64,
            count,
        })
    }

    /// Rebuilds bins from their centres.
    pub fn from_centers(centers: &[f64]) -> Result<Self> {
        if centers.len() < 2 {
            return Err(Error::Format("frequency axis needs at least two bins".into()));
        }
        let width = (centers[centers.len() - 1] - centers[0]) / (centers.len() - 1) as f64;
        for (k, c) in centers.iter().enumerate() {
            if (c - (centers[0] + k as f64 * width)).abs() > 1e-9 * width.max(1.0) {
                return Err(Error::Format("frequency axis is not uniform".into()));
            }
        }
        let lo = centers[0] - 0.5 * width;
        if !(lo > 0.0) || !(width > 0.0) {
            return Err(Error::Config("frequency bins must be positive and increasing".into()));
        }
        Ok(FrequencyBins {
            lo,
            width,
            count: centers.len(),
        })
    }

    pub fn center(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.width
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.center(k)).collect()
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.count as f64 * self.width
    }

    /// Index of the bin containing `xi`.
    pub fn bin_of(&self, xi: f64) -> Option<usize> {
        if !(xi >= self.lo) {
            return None;
        }
        let k = ((xi - self.lo) / self.width).floor() as usize;
        (k < self.count).then_some(k)
    }
}

/// `S^{α,γ}_f(b, ξ)` on a frequency-bin × time grid.
#[derive(Debug, Clone)]
pub struct SstPlane {
    pub grid: TimeGrid,
    pub bins: FrequencyBins,
    /// `[bins × time]`.
    pub s: Array2<Complex64>,
    pub alpha: f64,
    pub gamma: f64,
}

impl SstPlane {
    /// `Σ_ξ |S(b,ξ)|` over the whole plane.
    pub fn total_magnitude(&self) -> f64 {
        self.s.iter().map(|z| z.norm()).sum()
    }
}

/// Discretized squeeze of one scale-time coefficient into bin weights.
///
/// `alpha == 0` assigns everything to the bin containing `w`; otherwise the
/// Gaussian `h(|ξ−ω|/α)/α` is sampled at bin centres and renormalized so the
/// weights integrate to one over `ξ`.
fn kernel_weights(bins: &FrequencyBins, w: f64, alpha: f64, out: &mut Vec<(usize, f64)>) {
    out.clear();
    let Some(home) = bins.bin_of(w) else {
        return;
    };
    if alpha == 0.0 {
        out.push((home, 1.0 / bins.width));
        return;
    }
    let reach = (KERNEL_REACH * alpha / bins.width).ceil() as usize;
    let lo = home.saturating_sub(reach);
    let hi = (home + reach).min(bins.count - 1);
    let mut total = 0.0;
    for k in lo..=hi {
        let x = (bins.center(k) - w) / alpha;
        let v = (-x * x).exp() / (alpha * PI.sqrt());
        if v > 0.0 {
            out.push((k, v));
            total += v;
        }
    }
    if total == 0.0 {
        // α far below the bin width: the Gaussian underflows away from its centre
        out.clear();
        out.push((home, 1.0 / bins.width));
        return;
    }
    let norm = 1.0 / (total * bins.width);
    for (_, v) in out.iter_mut() {
        *v *= norm;
    }
}

/// Reassigns `W(a,b) a^{−3/2} Δa` along `ξ` according to `ω(a,b)`.
///
/// Only coefficients with `|W| > γ`, a defined `ω` and `ω` inside the bin
/// range contribute.
pub fn synchrosqueeze(
    sc: &Scalogram,
    om: &OmegaPlane,
    bins: &FrequencyBins,
    alpha: f64,
    gamma: f64,
) -> Result<SstPlane> {
    if !(bins.lo > 0.0) || !(bins.width > 0.0) || bins.count == 0 {
        return Err(Error::Config("frequency bins must be positive".into()));
    }
    if !(alpha >= 0.0) || !(gamma >= 0.0) {
        return Err(Error::Config(format!("invalid resolution {alpha} or threshold {gamma}")));
    }
    if om.omega.dim() != sc.w.dim() {
        return Err(Error::Config("omega plane does not match the scalogram".into()));
    }
    let n = sc.grid.n;
    let nscales = sc.scales.len();
    let measure: Vec<f64> = (0..nscales)
        .map(|j| sc.scales.scales()[j].powf(-1.5) * sc.scales.weight(j))
        .collect();
    let columns: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|b| {
            let mut col = vec![Complex64::default(); bins.count];
            let mut weights = Vec::new();
            for (j, &m) in measure.iter().enumerate() {
                let w = sc.w[[j, b]];
                if !(w.norm() > gamma) {
                    continue;
                }
                let Some(freq) = om.get(j, b) else { continue };
                kernel_weights(bins, freq, alpha, &mut weights);
                let mass = w * m;
                for &(k, kw) in &weights {
                    col[k] += mass * kw;
                }
            }
            col
        })
        .collect();
    let mut s = Array2::<Complex64>::zeros((bins.count, n));
    for (b, col) in columns.into_iter().enumerate() {
        s.column_mut(b).assign(&ndarray::ArrayView1::from(&col));
    }
    Ok(SstPlane {
        grid: sc.grid,
        bins: *bins,
        s,
        alpha,
        gamma,
    })
}

/// Per-time sets of frequency intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSet {
    pub intervals: Vec<Vec<(f64, f64)>>,
}

impl BandSet {
    /// The same single interval at every time.
    pub fn constant(n: usize, lo: f64, hi: f64) -> Self {
        BandSet {
            intervals: vec![vec![(lo, hi)]; n],
        }
    }

    fn contains(&self, b: usize, xi: f64) -> bool {
        self.intervals[b].iter().any(|&(lo, hi)| xi >= lo && xi <= hi)
    }
}

/// `R_ψ^{−1} Σ_{ξ ∈ band(b)} S(b,ξ) Δξ` per time column.
///
/// Bins are selected by their centre; a bin covered by several intervals
/// counts once.
pub fn band_integrate(plane: &SstPlane, bands: &BandSet, r_psi: Complex64) -> Result<Vec<Complex64>> {
    if bands.intervals.len() != plane.grid.n {
        return Err(Error::Config(format!(
            "band set has {} columns, plane has {}",
            bands.intervals.len(),
            plane.grid.n
        )));
    }
    if r_psi.norm() == 0.0 {
        return Err(Error::Config("reconstruction constant is zero".into()));
    }
    let centers = plane.bins.centers();
    let mut empty = 0usize;
    let out = (0..plane.grid.n)
        .map(|b| {
            let mut acc = Complex64::default();
            let mut hit = false;
            for (k, &c) in centers.iter().enumerate() {
                if bands.contains(b, c) {
                    acc += plane.s[[k, b]];
                    hit = true;
                }
            }
            if !hit {
                empty += 1;
            }
            acc * plane.bins.width / r_psi
        })
        .collect();
    if empty > 0 {
        log::warn!("{empty} time columns had an empty integration band");
    }
    Ok(out)
}
