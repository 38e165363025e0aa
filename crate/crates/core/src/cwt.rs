//! Band-limited bump wavelet and the FFT-based continuous wavelet transform.
//!
//! Conventions: `f̂(ξ) = ∫ f(t) e^{−2πitξ} dt`, and
//! `W_f(a,b) = ∫ f(t) a^{−1/2} conj(ψ((t−b)/a)) dt`, so that in frequency
//! `W_f(a,·)` is the inverse transform of `f̂(ξ) √a conj(ψ̂(aξ))`.
//! A scale `a` therefore listens to frequencies in `[(1−Δ)/a, (1+Δ)/a]`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::{SampledSignal, TimeGrid};

/// Trapezoid nodes across the wavelet's frequency support.
const SUPPORT_NODES: usize = 512;
/// Upper limit of the envelope integrals, in units of `1/Δ`.
const ENVELOPE_RANGE: f64 = 100.0;
const ENVELOPE_STEP: f64 = 0.025;

/// Fraction of the signal length mirrored onto each side before the FFT.
pub const PAD_FRACTION: f64 = 0.1;

/// Mother wavelet with `ψ̂(ξ) = exp(1 − 1/(1−u²))`, `u = (ξ−1)/Δ`, on `|u| < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotherWavelet {
    delta: f64,
    r_psi: f64,
    moments: [f64; 4],
    derivative_moments: [f64; 4],
    /// `ψ̂(1 + Δu)` at the interior trapezoid nodes `u_k = −1 + 2k/N`.
    nodes: Vec<f64>,
}

impl MotherWavelet {
    /// Bump wavelet with half-bandwidth `delta` around 1.
    pub fn bump(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("wavelet half-bandwidth {delta} outside (0, 1)")));
        }
        let mut w = MotherWavelet {
            delta,
            r_psi: 0.0,
            moments: [0.0; 4],
            derivative_moments: [0.0; 4],
            nodes: (1..SUPPORT_NODES)
                .map(|k| bump_profile(-1.0 + 2.0 * k as f64 / SUPPORT_NODES as f64))
                .collect(),
        };
        w.r_psi = w.compute_r_psi();
        let (m, dm) = w.compute_moments();
        w.moments = m;
        w.derivative_moments = dm;
        Ok(w)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `ψ̂(ξ)`; exactly zero outside `(1−Δ, 1+Δ)`.
    pub fn spectrum(&self, xi: f64) -> f64 {
        bump_profile((xi - 1.0) / self.delta)
    }

    /// `R_ψ = ∫ conj(ψ̂(z)) z^{−1} dz`; real because `ψ̂` is real.
    pub fn r_psi(&self) -> Complex64 {
        Complex64::new(self.r_psi, 0.0)
    }

    /// `I_i = ∫ |x|^i |ψ(x)| dx` for `i = 0..=3`.
    pub fn moment(&self, i: usize) -> f64 {
        self.moments[i]
    }

    /// `I′_i = ∫ |x|^i |ψ′(x)| dx` for `i = 0..=3`.
    pub fn derivative_moment(&self, i: usize) -> f64 {
        self.derivative_moments[i]
    }

    fn compute_r_psi(&self) -> f64 {
        let d = self.delta;
        trapezoid_support(|u| bump_profile(u) / (1.0 + d * u)) * d
    }

    /// Envelopes `g(x)` and `g₁(x)` with `ψ(x) = e^{2πix} g(x)` and
    /// `ψ′(x) = e^{2πix} g₁(x)`.
    fn envelopes(&self, x: f64) -> (Complex64, Complex64) {
        let d = self.delta;
        let h = 2.0 / SUPPORT_NODES as f64;
        let mut g = Complex64::default();
        let mut g1 = Complex64::default();
        let step = Complex64::from_polar(1.0, 2.0 * PI * x * d * h);
        let mut e = Complex64::from_polar(1.0, -2.0 * PI * x * d);
        for (k, &b) in self.nodes.iter().enumerate() {
            e *= step;
            let u = -1.0 + (k + 1) as f64 * h;
            g += e * b;
            g1 += e * (b * (1.0 + d * u));
        }
        let scale = h * d;
        (g * scale, g1 * Complex64::new(0.0, 2.0 * PI * scale))
    }

    /// Time-domain wavelet `ψ(x) = ∫ ψ̂(ξ) e^{2πixξ} dξ`.
    pub fn time_domain(&self, x: f64) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * x) * self.envelopes(x).0
    }

    /// `ψ′(x)`.
    pub fn time_domain_derivative(&self, x: f64) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * x) * self.envelopes(x).1
    }

    fn compute_moments(&self) -> ([f64; 4], [f64; 4]) {
        let step = ENVELOPE_STEP / self.delta;
        let count = (ENVELOPE_RANGE / ENVELOPE_STEP).round() as usize;
        let mut m = [0.0; 4];
        let mut dm = [0.0; 4];
        for k in 0..=count {
            let x = k as f64 * step;
            let (g, g1) = self.envelopes(x);
            // both envelope moduli are even: trapezoid on [0, X], doubled
            let w = if k == 0 || k == count { 0.5 } else { 1.0 } * step * 2.0;
            let mut p = 1.0;
            for i in 0..4 {
                m[i] += w * p * g.norm();
                dm[i] += w * p * g1.norm();
                p *= x;
            }
        }
        (m, dm)
    }
}

fn bump_profile(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// Trapezoid rule on `[-1, 1]` for integrands vanishing at both ends.
fn trapezoid_support(f: impl Fn(f64) -> f64) -> f64 {
    const N: usize = 8192;
    let h = 2.0 / N as f64;
    (1..N).map(|k| f(-1.0 + k as f64 * h)).sum::<f64>() * h
}

/// Geometric scale grid with a fixed number of voices per octave.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    scales: Vec<f64>,
    voices: usize,
}

impl ScaleGrid {
    /// Scales `a_min·2^{j/voices}` up to the first one reaching `a_max`.
    pub fn geometric(a_min: f64, a_max: f64, voices: usize) -> Result<Self> {
        if !(a_min > 0.0 && a_max > a_min) || voices == 0 {
            return Err(Error::Config(format!(
                "invalid scale range [{a_min}, {a_max}] with {voices} voices"
            )));
        }
        let octaves = (a_max / a_min).log2();
        let count = (octaves * voices as f64 - 1e-9).ceil() as usize + 1;
        let scales = (0..count)
            .map(|j| a_min * (j as f64 / voices as f64).exp2())
            .collect();
        Ok(ScaleGrid { scales, voices })
    }

    /// Rebuilds a grid from stored scale values, inferring the voice count.
    pub fn from_values(scales: Vec<f64>) -> Result<Self> {
        if scales.len() < 2 || scales[0] <= 0.0 {
            return Err(Error::Format("scale axis needs at least two positive values".into()));
        }
        let ratio = scales[1] / scales[0];
        if !(ratio > 1.0) {
            return Err(Error::Format("scale axis must be increasing".into()));
        }
        let voices = (std::f64::consts::LN_2 / ratio.ln()).round() as usize;
        let grid = ScaleGrid { scales, voices };
        for w in grid.scales.windows(2) {
            if ((w[1] / w[0]).ln() - grid.log_step()).abs() > 1e-9 {
                return Err(Error::Format("scale axis is not geometric".into()));
            }
        }
        Ok(grid)
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn voices(&self) -> usize {
        self.voices
    }

    pub fn a_min(&self) -> f64 {
        self.scales[0]
    }

    pub fn a_max(&self) -> f64 {
        *self.scales.last().expect("grid is non-empty")
    }

    /// `ln 2 / voices`.
    pub fn log_step(&self) -> f64 {
        std::f64::consts::LN_2 / self.voices as f64
    }

    /// Measure weight `Δa_j = a_j ln 2 / voices`.
    pub fn weight(&self, j: usize) -> f64 {
        self.scales[j] * self.log_step()
    }
}

/// Grid covering `[(1−Δ)/(D·f_max), (1+Δ)/f_min]`, so that every harmonic up
/// to `D` of every frequency in `[f_min, f_max]` is seen by some scale.
pub fn default_scale_grid(
    w: &MotherWavelet,
    f_min: f64,
    f_max: f64,
    harmonics: usize,
    voices: usize,
) -> Result<ScaleGrid> {
    if !(f_min > 0.0 && f_max > f_min) {
        return Err(Error::Config(format!("invalid frequency range [{f_min}, {f_max}]")));
    }
    if harmonics == 0 {
        return Err(Error::Config("harmonic count must be at least 1".into()));
    }
    let d = w.delta();
    ScaleGrid::geometric(
        (1.0 - d) / (harmonics as f64 * f_max),
        (1.0 + d) / f_min,
        voices,
    )
}

/// `W_f(a,b)` and `∂_b W_f(a,b)` on a scale × time grid.
#[derive(Debug, Clone)]
pub struct Scalogram {
    pub scales: ScaleGrid,
    pub grid: TimeGrid,
    pub delta: f64,
    /// `[scales × time]`.
    pub w: Array2<Complex64>,
    /// `[scales × time]`.
    pub dw: Array2<Complex64>,
    pub warnings: Vec<String>,
}

/// FFT length and left padding for a signal of length `n`.
pub(crate) fn pad_layout(n: usize) -> (usize, usize) {
    let pad = (PAD_FRACTION * n as f64).ceil() as usize;
    let total = (n + 2 * pad).next_power_of_two();
    (total, (total - n) / 2)
}

/// Whole-sample mirror reflection of an out-of-range index.
pub(crate) fn reflect_index(mut j: isize, n: usize) -> usize {
    let last = n as isize - 1;
    if last == 0 {
        return 0;
    }
    loop {
        if j < 0 {
            j = -j;
        } else if j > last {
            j = 2 * last - j;
        } else {
            return j as usize;
        }
    }
}

/// CWT of a real signal.
pub fn cwt(sig: &SampledSignal, w: &MotherWavelet, scales: &ScaleGrid) -> Result<Scalogram> {
    let samples: Vec<Complex64> = sig.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    cwt_complex(&samples, sig.grid(), w, scales)
}

/// CWT of a complex signal (used for analytic inputs).
pub fn cwt_complex(
    samples: &[Complex64],
    grid: TimeGrid,
    w: &MotherWavelet,
    scales: &ScaleGrid,
) -> Result<Scalogram> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    if scales.is_empty() {
        return Err(Error::Config("empty scale grid".into()));
    }
    let (total, left) = pad_layout(n);
    let mut spectrum: Vec<Complex64> = (0..total)
        .map(|p| samples[reflect_index(p as isize - left as isize, n)])
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(total).process(&mut spectrum);
    let inverse = planner.plan_fft_inverse(total);

    let df = 1.0 / (total as f64 * grid.dt);
    let freqs: Vec<f64> = (0..total)
        .map(|k| {
            if k < total / 2 {
                k as f64 * df
            } else {
                (k as f64 - total as f64) * df
            }
        })
        .collect();

    let mut warnings = Vec::new();
    let nyquist = 0.5 / grid.dt;
    let lowest = df;
    let d = w.delta();
    for &a in scales.scales() {
        if (1.0 + d) / a > nyquist {
            warnings.push(format!("scale {a} listens above the Nyquist frequency {nyquist}"));
        } else if (1.0 - d) / a < lowest {
            warnings.push(format!("scale {a} listens below the frequency resolution {lowest}"));
        }
    }
    for msg in &warnings {
        log::warn!("{msg}");
    }

    let norm = 1.0 / total as f64;
    let rows: Vec<(Vec<Complex64>, Vec<Complex64>)> = scales
        .scales()
        .par_iter()
        .map(|&a| {
            let sa = a.sqrt();
            let mut row = vec![Complex64::default(); total];
            let mut drow = vec![Complex64::default(); total];
            for k in 0..total {
                let m = sa * w.spectrum(a * freqs[k]);
                if m != 0.0 {
                    let v = spectrum[k] * (m * norm);
                    row[k] = v;
                    drow[k] = v * Complex64::new(0.0, 2.0 * PI * freqs[k]);
                }
            }
            let mut scratch = vec![Complex64::default(); inverse.get_inplace_scratch_len()];
            inverse.process_with_scratch(&mut row, &mut scratch);
            inverse.process_with_scratch(&mut drow, &mut scratch);
            (row[left..left + n].to_vec(), drow[left..left + n].to_vec())
        })
        .collect();

    let mut wm = Array2::<Complex64>::zeros((scales.len(), n));
    let mut dwm = Array2::<Complex64>::zeros((scales.len(), n));
    for (j, (row, drow)) in rows.into_iter().enumerate() {
        wm.row_mut(j).assign(&ndarray::ArrayView1::from(&row));
        dwm.row_mut(j).assign(&ndarray::ArrayView1::from(&drow));
    }
    Ok(Scalogram {
        scales: scales.clone(),
        grid,
        delta: d,
        w: wm,
        dw: dwm,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_endpoints() {
        let w = MotherWavelet::bump(0.1).unwrap();
        assert_eq!(w.spectrum(1.0), 1.0);
        assert_eq!(w.spectrum(0.9), 0.0);
        assert_eq!(w.spectrum(1.1), 0.0);
        assert_eq!(w.spectrum(1.0 + 1.001 * 0.1), 0.0);
        assert!(w.spectrum(1.05) > 0.0);
    }

    #[test]
    fn invalid_delta() {
        for d in [0.0, -0.1, 1.0, 1.5, f64::NAN] {
            assert!(matches!(MotherWavelet::bump(d), Err(Error::Config(_))));
        }
    }

    #[test]
    fn default_grid_bounds() {
        let w = MotherWavelet::bump(0.1).unwrap();
        let g = default_scale_grid(&w, 1.0, 8.0, 4, 32).unwrap();
        assert!((g.a_min() - 0.9 / 32.0).abs() < 1e-15);
        assert!(g.a_max() >= 1.1 && g.a_max() < 1.1 * (1.0f64 / 32.0).exp2());
        let ratios: Vec<f64> = g.scales().windows(2).map(|p| p[1] / p[0]).collect();
        for r in &ratios {
            assert!((r - ratios[0]).abs() < 1e-12);
        }
        assert!((g.scales()[32] / g.scales()[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inverted_range_is_rejected() {
        let w = MotherWavelet::bump(0.1).unwrap();
        assert!(default_scale_grid(&w, 8.0, 1.0, 1, 32).is_err());
    }

    #[test]
    fn scale_axis_round_trip() {
        let g = ScaleGrid::geometric(0.05, 2.0, 16).unwrap();
        let back = ScaleGrid::from_values(g.scales().to_vec()).unwrap();
        assert_eq!(back.voices(), 16);
    }

    #[test]
    fn reflect_indices() {
        assert_eq!(reflect_index(-1, 5), 1);
        assert_eq!(reflect_index(-4, 5), 4);
        assert_eq!(reflect_index(5, 5), 3);
        assert_eq!(reflect_index(9, 5), 1);
        assert_eq!(reflect_index(2, 5), 2);
    }

    #[test]
    fn empty_signal_is_rejected() {
        let w = MotherWavelet::bump(0.1).unwrap();
        let g = ScaleGrid::geometric(0.1, 1.0, 4).unwrap();
        let grid = TimeGrid::new(0.0, 0.1, 0).unwrap();
        assert!(matches!(cwt_complex(&[], grid, &w, &g), Err(Error::EmptySignal)));
    }
}
