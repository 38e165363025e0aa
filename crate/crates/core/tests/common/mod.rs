#![allow(dead_code)]

use std::ops::Range;

use waveshape::sst::{default_threshold, DEFAULT_THRESHOLD_RHO};
use waveshape::*;

pub const DT: f64 = 1.0 / 64.0;

pub fn grid(n: usize) -> TimeGrid {
    TimeGrid::new(0.0, DT, n).unwrap()
}

/// Relative L² error of `est` against `truth` over `range`.
pub fn rel_l2(est: &[f64], truth: &[f64], range: Range<usize>) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in range {
        num += (est[i] - truth[i]).powi(2);
        den += truth[i] * truth[i];
    }
    (num / den).sqrt()
}

pub fn rmse(a: &[f64], b: &[f64], range: Range<usize>) -> f64 {
    let n = range.len() as f64;
    (range.map(|i| (a[i] - b[i]).powi(2)).sum::<f64>() / n).sqrt()
}

/// CWT, median threshold and hard-binned SST of a real signal.
pub struct Squeeze {
    pub delta: f64,
    pub f_range: (f64, f64),
    pub harmonics: usize,
    pub bins: (f64, f64),
}

impl Squeeze {
    pub fn run(&self, sig: &SampledSignal) -> (MotherWavelet, Scalogram, SstPlane) {
        let w = MotherWavelet::bump(self.delta).unwrap();
        let scales = default_scale_grid(&w, self.f_range.0, self.f_range.1, self.harmonics, 32).unwrap();
        let sc = cwt(sig, &w, &scales).unwrap();
        let gamma = default_threshold(&sc, DEFAULT_THRESHOLD_RHO);
        let om = omega(&sc, gamma);
        let bins = FrequencyBins::linear(self.bins.0, self.bins.1, 512).unwrap();
        let plane = synchrosqueeze(&sc, &om, &bins, 0.0, gamma).unwrap();
        (w, sc, plane)
    }
}

/// Largest entrywise difference relative to the largest entry of `b`.
pub fn rel_diff(a: impl Iterator<Item = Complex64>, b: impl Iterator<Item = Complex64>) -> f64 {
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for (x, y) in a.zip(b) {
        num = num.max((x - y).norm());
        den = den.max(y.norm());
    }
    if den == 0.0 {
        num
    } else {
        num / den
    }
}
