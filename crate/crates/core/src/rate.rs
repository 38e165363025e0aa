//! Event-based rates: peak detection, the intuitive rate and rate comparison.

use crate::error::{Error, Result};
use crate::ridge::RidgeCurve;
use crate::signal::SampledSignal;

/// Strictly increasing event times in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct EventList {
    times: Vec<f64>,
}

impl EventList {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if let Some(i) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::Format(format!("event {i} is not finite")));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::UnorderedEvents(i + 1));
        }
        Ok(EventList { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn shifted(&self, offset: f64) -> Self {
        EventList {
            times: self.times.iter().map(|t| t + offset).collect(),
        }
    }
}

/// Local maxima above `rel_threshold·max`, at least `min_sep` seconds apart.
///
/// Candidates are accepted in decreasing height, so of two close peaks the
/// larger survives. Positions are refined by a parabola through the three
/// samples around each maximum.
pub fn detect_peaks(sig: &SampledSignal, min_sep: f64, rel_threshold: f64) -> Result<EventList> {
    if !(min_sep > sig.dt) {
        return Err(Error::Config(format!("minimum separation {min_sep} must exceed the sample step {}", sig.dt)));
    }
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(Error::Config(format!("relative threshold must lie in (0,1), got {rel_threshold}")));
    }
    let x = &sig.samples;
    if x.len() < 3 {
        return Err(Error::EmptySignal);
    }
    let top = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let level = rel_threshold * top;
    let mut candidates: Vec<usize> = (1..x.len() - 1)
        .filter(|&i| x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] >= level)
        .collect();
    candidates.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let mut kept: Vec<f64> = Vec::new();
    for i in candidates {
        let (y0, y1, y2) = (x[i - 1], x[i], x[i + 1]);
        let curv = y0 - 2.0 * y1 + y2;
        let offset = if curv < 0.0 { 0.5 * (y0 - y2) / curv } else { 0.0 };
        let t = sig.t0 + (i as f64 + offset) * sig.dt;
        if kept.iter().all(|&k| (k - t).abs() >= min_sep) {
            kept.push(t);
        }
    }
    if kept.is_empty() {
        log::warn!("no peaks above {level}");
    }
    kept.sort_by(|a, b| a.total_cmp(b));
    EventList::new(kept)
}

/// A rate in Hz over a time window, with zero-order-hold semantics.
#[derive(Debug, Clone, PartialEq)]
pub enum RateCurve {
    /// `values[i]` holds on `[knots[i], knots[i+1])`; the last value holds
    /// until `end`.
    Step { knots: Vec<f64>, values: Vec<f64>, end: f64 },
    /// Uniform samples starting at `t0`.
    Dense { t0: f64, dt: f64, values: Vec<f64> },
}

impl RateCurve {
    pub fn dense(t0: f64, dt: f64, values: Vec<f64>) -> Self {
        RateCurve::Dense { t0, dt, values }
    }

    /// Instantaneous frequency read off a ridge.
    pub fn from_ridge(ridge: &RidgeCurve) -> Self {
        RateCurve::dense(ridge.grid.t0, ridge.grid.dt, ridge.freq.clone())
    }

    /// `[start, end]` on which the curve is defined.
    pub fn support(&self) -> (f64, f64) {
        match self {
            RateCurve::Step { knots, end, .. } => (knots[0], *end),
            RateCurve::Dense { t0, dt, values } => (*t0, t0 + (values.len().max(1) - 1) as f64 * dt),
        }
    }

    pub fn value_at(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.support();
        if !(t >= lo && t <= hi) {
            return None;
        }
        match self {
            RateCurve::Step { knots, values, .. } => {
                let i = knots.partition_point(|&k| k <= t) - 1;
                Some(values[i])
            }
            RateCurve::Dense { t0, dt, values } => {
                let i = (((t - t0) / dt) + 1e-9).floor() as usize;
                Some(values[i.min(values.len() - 1)])
            }
        }
    }

    /// Samples the curve on `t0 + i·dt`, `None` outside the support.
    pub fn sample(&self, t0: f64, dt: f64, n: usize) -> Vec<Option<f64>> {
        (0..n).map(|i| self.value_at(t0 + i as f64 * dt)).collect()
    }
}

/// `IHR_i(t) = 1/(t_k − t_{k−1})` for `t_k ≤ t < t_{k+1}`.
///
/// Undefined before the second event; the last value is held indefinitely.
pub fn intuitive_rate(events: &EventList) -> Result<RateCurve> {
    let t = events.times();
    if t.len() < 3 {
        return Err(Error::Config(format!("an intuitive rate needs at least 3 events, got {}", t.len())));
    }
    let knots = t[1..].to_vec();
    let values = t.windows(2).map(|w| 1.0 / (w[1] - w[0])).collect();
    Ok(RateCurve::Step {
        knots,
        values,
        end: f64::INFINITY,
    })
}

/// Error statistics of `b − a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateComparison {
    pub rmse: f64,
    pub max_abs: f64,
    pub mean_bias: f64,
    pub samples: usize,
}

fn grid_step(c: &RateCurve) -> Option<f64> {
    match c {
        RateCurve::Dense { dt, .. } => Some(*dt),
        RateCurve::Step { .. } => None,
    }
}

/// Compares two rate curves on their common support inside `window`.
///
/// Both are resampled on the finer dense grid, or on 4096 points when both
/// are step curves.
pub fn compare_rates(a: &RateCurve, b: &RateCurve, window: (f64, f64)) -> Result<RateComparison> {
    let (la, ha) = a.support();
    let (lb, hb) = b.support();
    let lo = window.0.max(la).max(lb);
    let hi = window.1.min(ha).min(hb);
    if !(hi > lo) {
        return Err(Error::NoOverlap);
    }
    let step = match (grid_step(a), grid_step(b)) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => (hi - lo) / 4096.0,
    };
    let n = ((hi - lo) / step).floor() as usize + 1;
    let (mut sq, mut max_abs, mut bias, mut count) = (0.0, 0.0f64, 0.0, 0usize);
    for i in 0..n {
        let t = lo + i as f64 * step;
        if let (Some(x), Some(y)) = (a.value_at(t), b.value_at(t)) {
            let d = y - x;
            sq += d * d;
            max_abs = max_abs.max(d.abs());
            bias += d;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::NoOverlap);
    }
    Ok(RateComparison {
        rmse: (sq / count as f64).sqrt(),
        max_abs,
        mean_bias: bias / count as f64,
        samples: count,
    })
}
