//! Ridge extraction on the synchrosqueezed plane.

use crate::error::{Error, Result};
use crate::signal::TimeGrid;
use crate::sst::{BandSet, FrequencyBins, SstPlane};

/// Floor added to the peak-normalized `|S|` before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-12;
/// Default quadratic jump penalty in bin units.
pub const DEFAULT_LAMBDA: f64 = 2.0;
/// Default half-width, in bins, of the region removed by [`peel`].
pub const DEFAULT_PEEL_WIDTH: usize = 6;
/// Half-width, in bins, of the centroid refinement window.
const CENTROID_REACH: usize = 3;

/// One instantaneous-frequency curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeCurve {
    pub grid: TimeGrid,
    pub bins: FrequencyBins,
    /// Bin index chosen by the path search.
    pub path: Vec<usize>,
    /// Refined frequency in Hz.
    pub freq: Vec<f64>,
    /// `Σ|S|` over the refinement window.
    pub strength: Vec<f64>,
}

impl RidgeCurve {
    pub fn mean_freq(&self) -> f64 {
        self.freq.iter().sum::<f64>() / self.freq.len() as f64
    }
}

/// Lower envelope of the parabolas `f(q) + λ(p − q)²`, returned as
/// `(value, argmin)` for every `p`.
fn distance_transform(f: &[f64], lambda: f64, out: &mut [(f64, usize)]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let key = |q: usize| f[q] + lambda * (q * q) as f64;
    for q in 1..n {
        let mut s = (key(q) - key(v[k])) / (2.0 * lambda * (q - v[k]) as f64);
        while s <= z[k] {
            k -= 1;
            s = (key(q) - key(v[k])) / (2.0 * lambda * (q - v[k]) as f64);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for (p, slot) in out.iter_mut().enumerate() {
        while z[k + 1] < p as f64 {
            k += 1;
        }
        let q = v[k];
        let d = p as f64 - q as f64;
        *slot = (f[q] + lambda * d * d, q);
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Best bin path restricted to bins `lo..hi`.
fn best_path(plane: &SstPlane, lambda: f64, lo: usize, hi: usize) -> Vec<usize> {
    let n = plane.grid.n;
    let m = hi - lo;
    let peak = plane
        .s
        .outer_iter()
        .skip(lo)
        .take(m)
        .flat_map(|row| row.into_iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    let score = |b: usize, k: usize| (plane.s[[lo + k, b]].norm() / peak + LOG_FLOOR).ln();
    let mut back = vec![0u32; n * m];
    let mut value: Vec<f64> = (0..m).map(|k| score(0, k)).collect();
    let mut cost = vec![0.0; m];
    let mut env = vec![(0.0, 0usize); m];
    for b in 1..n {
        if lambda == 0.0 {
            let best = argmax(&value);
            let top = value[best];
            for k in 0..m {
                value[k] = top + score(b, k);
                back[b * m + k] = best as u32;
            }
        } else {
            for k in 0..m {
                cost[k] = -value[k];
            }
            distance_transform(&cost, lambda, &mut env);
            for k in 0..m {
                value[k] = -env[k].0 + score(b, k);
                back[b * m + k] = env[k].1 as u32;
            }
        }
    }
    let mut path = vec![0usize; n];
    let mut k = argmax(&value);
    for b in (0..n).rev() {
        path[b] = lo + k;
        if b > 0 {
            k = back[b * m + k] as usize;
        }
    }
    path
}

fn refine(plane: &SstPlane, path: Vec<usize>) -> RidgeCurve {
    let bins = plane.bins;
    let mut freq = Vec::with_capacity(path.len());
    let mut strength = Vec::with_capacity(path.len());
    for (b, &k) in path.iter().enumerate() {
        let lo = k.saturating_sub(CENTROID_REACH);
        let hi = (k + CENTROID_REACH).min(bins.count - 1);
        let (mut wsum, mut fsum) = (0.0, 0.0);
        for j in lo..=hi {
            let m = plane.s[[j, b]].norm();
            wsum += m;
            fsum += m * bins.center(j);
        }
        freq.push(if wsum > 0.0 { fsum / wsum } else { bins.center(k) });
        strength.push(wsum);
    }
    RidgeCurve {
        grid: plane.grid,
        bins,
        path,
        freq,
        strength,
    }
}

/// Maximizes `Σ log(|S|/max|S| + 1e−12) − λ Σ (Δbin)²` over bin paths, then refines
/// each column by a magnitude-weighted centroid over ±3 bins.
pub fn extract_ridge(plane: &SstPlane, lambda: f64) -> Result<RidgeCurve> {
    extract_ridge_in(plane, lambda, plane.bins.lo, plane.bins.hi())
}

/// [`extract_ridge`] restricted to bins whose centre lies in `[f_lo, f_hi]`.
///
/// Pinning a search band selects the fundamental when a harmonic carries
/// more energy than it.
pub fn extract_ridge_in(plane: &SstPlane, lambda: f64, f_lo: f64, f_hi: f64) -> Result<RidgeCurve> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Config(format!("smoothness penalty must be finite and nonnegative, got {lambda}")));
    }
    if plane.grid.n == 0 {
        return Err(Error::EmptySignal);
    }
    let inside: Vec<usize> = (0..plane.bins.count)
        .filter(|&k| {
            let c = plane.bins.center(k);
            c >= f_lo && c <= f_hi
        })
        .collect();
    let (Some(&lo), Some(&hi)) = (inside.first(), inside.last()) else {
        return Err(Error::NoRidge(format!("no frequency bins in [{f_lo}, {f_hi}]")));
    };
    let hi = hi + 1;
    let any = (lo..hi).any(|k| plane.s.row(k).iter().any(|z| z.norm() > 0.0));
    if !any {
        return Err(Error::NoRidge("plane is zero in the search band".into()));
    }
    Ok(refine(plane, best_path(plane, lambda, lo, hi)))
}

/// Copy of `plane` with `±width` bins around the ridge path set to zero.
pub fn peel(plane: &SstPlane, ridge: &RidgeCurve, width: usize) -> SstPlane {
    let mut out = plane.clone();
    for (b, &k) in ridge.path.iter().enumerate() {
        let lo = k.saturating_sub(width);
        let hi = (k + width).min(plane.bins.count - 1);
        for j in lo..=hi {
            out.s[[j, b]] = Default::default();
        }
    }
    out
}

/// Extracts `count` ridges by alternately extracting and peeling.
pub fn extract_ridges(plane: &SstPlane, count: usize, lambda: f64, width: usize) -> Result<Vec<RidgeCurve>> {
    let mut work = plane.clone();
    let mut ridges = Vec::with_capacity(count);
    for _ in 0..count {
        let r = extract_ridge(&work, lambda)?;
        work = peel(&work, &r, width);
        ridges.push(r);
    }
    Ok(ridges)
}

/// `[n·freq(b) − hw, n·freq(b) + hw]` for `n = 1..=d`, clipped to the bin range.
pub fn harmonic_bands(ridge: &RidgeCurve, d: usize, halfwidth: f64) -> Result<BandSet> {
    if d == 0 {
        return Err(Error::Config("harmonic count must be at least 1".into()));
    }
    if !(halfwidth > 0.0) {
        return Err(Error::Config(format!("band half-width must be positive, got {halfwidth}")));
    }
    let (lo, hi) = (ridge.bins.lo, ridge.bins.hi());
    let mut intervals = Vec::with_capacity(ridge.freq.len());
    for (b, &f) in ridge.freq.iter().enumerate() {
        if halfwidth >= f / 2.0 {
            return Err(Error::Config(format!(
                "half-width {halfwidth} makes harmonic bands overlap at sample {b} (frequency {f})"
            )));
        }
        let col = (1..=d)
            .map(|n| n as f64 * f)
            .map(|c| ((c - halfwidth).max(lo), (c + halfwidth).min(hi)))
            .filter(|(a, z)| a < z)
            .collect();
        intervals.push(col);
    }
    Ok(BandSet { intervals })
}
