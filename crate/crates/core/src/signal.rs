//! Component synthesis, class validation and noise injection.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::shape::{FourierShape, ToyShape};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A smooth real function of time with optional closed-form derivatives.
///
/// Missing derivatives fall back to centered finite differences with the
/// step supplied by the caller (normally the sampling grid step).
#[derive(Clone)]
pub struct Profile {
    f: ScalarFn,
    df: Option<ScalarFn>,
    d2f: Option<ScalarFn>,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("analytic_first", &self.df.is_some())
            .field("analytic_second", &self.d2f.is_some())
            .finish()
    }
}

impl Profile {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Profile {
            f: Arc::new(f),
            df: None,
            d2f: None,
        }
    }

    pub fn with_derivatives(
        mut self,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.df = Some(Arc::new(df));
        self.d2f = Some(Arc::new(d2f));
        self
    }

    pub fn constant(c: f64) -> Self {
        Profile::new(move |_| c).with_derivatives(|_| 0.0, |_| 0.0)
    }

    /// `c·t + offset`.
    pub fn linear(c: f64, offset: f64) -> Self {
        Profile::new(move |t| c * t + offset).with_derivatives(move |_| c, |_| 0.0)
    }

    /// Piecewise-linear interpolation of dense samples on a uniform grid,
    /// held constant outside.
    pub fn from_samples(t0: f64, dt: f64, values: Vec<f64>) -> Self {
        let values = Arc::new(values);
        Profile::new(move |t| {
            let n = values.len();
            let x = (t - t0) / dt;
            if x <= 0.0 {
                return values[0];
            }
            let i = x.floor() as usize;
            if i + 1 >= n {
                return values[n - 1];
            }
            let w = x - i as f64;
            values[i] * (1.0 - w) + values[i + 1] * w
        })
    }

    /// `k·f(t)`, keeping closed-form derivatives.
    pub fn scaled(self, k: f64) -> Self {
        let Profile { f, df, d2f } = self;
        let wrap = |g: ScalarFn| -> ScalarFn { Arc::new(move |t| k * g(t)) };
        Profile {
            f: wrap(f),
            df: df.map(wrap),
            d2f: d2f.map(wrap),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn derivative(&self, t: f64, h: f64) -> f64 {
        match &self.df {
            Some(df) => df(t),
            None => (self.value(t + h) - self.value(t - h)) / (2.0 * h),
        }
    }

    pub fn second_derivative(&self, t: f64, h: f64) -> f64 {
        match &self.d2f {
            Some(d2f) => d2f(t),
            None => (self.value(t + h) - 2.0 * self.value(t) + self.value(t - h)) / (h * h),
        }
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.df.is_some() && self.d2f.is_some()
    }
}

/// Uniform sampling grid `t_i = t0 + i·dt`, `i < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::Config(format!("invalid grid step {dt}")));
        }
        Ok(TimeGrid { t0, dt, n })
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.time(i))
    }

    pub fn duration(&self) -> f64 {
        self.n as f64 * self.dt
    }

    /// Index range covering the central `fraction` of the grid.
    pub fn interior(&self, fraction: f64) -> std::ops::Range<usize> {
        let skip = ((1.0 - fraction) * 0.5 * self.n as f64).round() as usize;
        skip..self.n.saturating_sub(skip)
    }
}

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl SampledSignal {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        TimeGrid::new(t0, dt, samples.len())?;
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::Format(format!("non-finite sample at index {i}")));
        }
        Ok(SampledSignal { t0, dt, samples })
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            t0: self.t0,
            dt: self.dt,
            n: self.samples.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn variance(&self) -> f64 {
        variance(&self.samples)
    }
}

pub(crate) fn variance(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// One intrinsic mode `A(t) s(2π φ(t))`.
#[derive(Debug, Clone)]
pub struct AnalyticComponent {
    pub amplitude: Profile,
    pub phase: Profile,
    pub shape: FourierShape,
}

impl AnalyticComponent {
    pub fn new(amplitude: Profile, phase: Profile, shape: FourierShape) -> Self {
        AnalyticComponent {
            amplitude,
            phase,
            shape,
        }
    }

    /// Analytic value `A(t) s(2π φ(t))`.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.shape.eval(2.0 * std::f64::consts::PI * self.phase.value(t)) * self.amplitude.value(t)
    }

    /// Real value `A(t) Re s(2π φ(t))`.
    pub fn eval_real(&self, t: f64) -> f64 {
        self.eval(t).re
    }

    /// `φ′(t)`; `h` is only used without a closed-form derivative.
    pub fn inst_freq(&self, t: f64, h: f64) -> f64 {
        self.phase.derivative(t, h)
    }
}

/// Ordered superposition with frequency separation `d` and per-component
/// harmonic counts `D_k`.
#[derive(Debug, Clone)]
pub struct SuperpositionSpec {
    pub components: Vec<AnalyticComponent>,
    pub d: f64,
    pub harmonics: Vec<usize>,
}

impl SuperpositionSpec {
    /// All components share the harmonic count `harmonics`.
    pub fn new(components: Vec<AnalyticComponent>, d: f64, harmonics: usize) -> Self {
        let k = components.len();
        SuperpositionSpec {
            components,
            d,
            harmonics: vec![harmonics; k],
        }
    }

    pub fn with_harmonics(mut self, per_component: Vec<usize>) -> Self {
        self.harmonics = per_component;
        self
    }

    /// `D = max_k D_k`.
    pub fn max_harmonics(&self) -> usize {
        self.harmonics.iter().copied().max().unwrap_or(0)
    }
}

fn check_monotone_phase(c: &AnalyticComponent, k: usize, grid: &TimeGrid) -> Result<()> {
    let mut prev = None;
    for (i, t) in grid.times().enumerate() {
        let p = c.phase.value(t);
        if !p.is_finite() {
            return Err(Error::InvalidComponent(format!(
                "component {k}: non-finite phase at sample {i}"
            )));
        }
        if let Some(q) = prev {
            if p <= q {
                return Err(Error::InvalidComponent(format!(
                    "component {k}: phase is not increasing at sample {i}"
                )));
            }
        }
        prev = Some(p);
    }
    Ok(())
}

/// Samples `Σ_k A_k(t) Re s_k(2π φ_k(t))` on the grid.
pub fn synthesize(spec: &SuperpositionSpec, grid: &TimeGrid) -> Result<SampledSignal> {
    let analytic = synthesize_analytic(spec, grid)?;
    SampledSignal::new(grid.t0, grid.dt, analytic.iter().map(|z| z.re).collect())
}

/// Samples the analytic superposition `Σ_k A_k(t) s_k(2π φ_k(t))`.
pub fn synthesize_analytic(spec: &SuperpositionSpec, grid: &TimeGrid) -> Result<Vec<Complex64>> {
    for (k, c) in spec.components.iter().enumerate() {
        check_monotone_phase(c, k, grid)?;
    }
    Ok(grid
        .times()
        .map(|t| spec.components.iter().map(|c| c.eval(t)).sum())
        .collect())
}

/// Slow-variation ratios of one component on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImfReport {
    /// `max |A′| / φ′`.
    pub eps_a: f64,
    /// `max |φ″| / φ′`.
    pub eps_phi: f64,
    /// `max |φ″|`.
    pub m_dd: f64,
    pub pass: bool,
}

/// Checks the IMF conditions `|A′| ≤ ε φ′` and `|φ″| ≤ ε φ′` on the grid.
pub fn validate_imf(c: &AnalyticComponent, grid: &TimeGrid, eps: f64) -> Result<ImfReport> {
    if grid.n < 3 {
        return Err(Error::Config("IMF validation needs at least 3 grid points".into()));
    }
    let h = grid.dt;
    let (mut eps_a, mut eps_phi, mut m_dd) = (0.0f64, 0.0f64, 0.0f64);
    for (i, t) in grid.times().enumerate() {
        let f1 = c.phase.derivative(t, h);
        if !(f1 > 0.0) {
            return Err(Error::InvalidComponent(format!(
                "instantaneous frequency {f1} is not positive at sample {i}"
            )));
        }
        let f2 = c.phase.second_derivative(t, h).abs();
        let da = c.amplitude.derivative(t, h).abs();
        eps_a = eps_a.max(da / f1);
        eps_phi = eps_phi.max(f2 / f1);
        m_dd = m_dd.max(f2);
    }
    Ok(ImfReport {
        eps_a,
        eps_phi,
        m_dd,
        pass: eps_a <= eps && eps_phi <= eps,
    })
}

/// First overlapping pair of harmonic scale intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationViolation {
    pub t: f64,
    /// Component index and harmonic number of the first interval.
    pub first: (usize, usize),
    /// Component index and harmonic number of the second interval.
    pub second: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationReport {
    pub pass: bool,
    pub violation: Option<SeparationViolation>,
}

fn scale_interval(d: f64, n: usize, freq: f64) -> (f64, f64) {
    let nf = n as f64 * freq;
    ((1.0 - d) / nf, (1.0 + d) / nf)
}

/// Checks that the harmonic scale intervals `[(1−d)/(nφ′_k), (1+d)/(nφ′_k)]`,
/// `n ≤ D_k`, of different components never intersect on the grid.
pub fn validate_separation(
    spec: &SuperpositionSpec,
    wavelet_delta: f64,
    grid: &TimeGrid,
) -> Result<SeparationReport> {
    let d = spec.d;
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::Config(format!("separation d = {d} must lie in (0, 1)")));
    }
    if !(wavelet_delta < d / (1.0 + d)) {
        return Err(Error::Config(format!(
            "wavelet half-bandwidth {wavelet_delta} must be below d/(1+d) = {}",
            d / (1.0 + d)
        )));
    }
    if spec.harmonics.len() != spec.components.len() {
        return Err(Error::Config("one harmonic count per component is required".into()));
    }
    let k_count = spec.components.len();
    for t in grid.times() {
        let freqs: Vec<f64> = spec
            .components
            .iter()
            .map(|c| c.inst_freq(t, grid.dt))
            .collect();
        for k in 0..k_count {
            for l in 0..k {
                for n in 1..=spec.harmonics[k] {
                    let (lo_k, hi_k) = scale_interval(d, n, freqs[k]);
                    for m in 1..=spec.harmonics[l] {
                        let (lo_l, hi_l) = scale_interval(d, m, freqs[l]);
                        if lo_k.max(lo_l) <= hi_k.min(hi_l) {
                            return Ok(SeparationReport {
                                pass: false,
                                violation: Some(SeparationViolation {
                                    t,
                                    first: (l, m),
                                    second: (k, n),
                                }),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(SeparationReport {
        pass: true,
        violation: None,
    })
}

/// Adds i.i.d. Gaussian noise with variance `var(sig)·10^{−snr_db/10}`.
///
/// An infinite `snr_db` returns the signal unchanged.
pub fn add_noise(sig: &SampledSignal, snr_db: f64, seed: u64) -> Result<SampledSignal> {
    if snr_db == f64::INFINITY {
        return Ok(sig.clone());
    }
    if snr_db.is_nan() {
        return Err(Error::Config("SNR must not be NaN".into()));
    }
    let var = sig.variance();
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let sigma = (var * 10f64.powf(-snr_db / 10.0)).sqrt();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let samples = sig
        .samples
        .iter()
        .map(|&x| {
            let w: f64 = StandardNormal.sample(&mut rng);
            x + sigma * w
        })
        .collect();
    SampledSignal::new(sig.t0, sig.dt, samples)
}

/// Names of the built-in test signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinName {
    F1,
    F2,
    F3,
    F4,
}

impl BuiltinName {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name.to_ascii_lowercase().as_str() {
            "f1" => BuiltinName::F1,
            "f2" => BuiltinName::F2,
            "f3" => BuiltinName::F3,
            "f4" => BuiltinName::F4,
            _ => return None,
        })
    }
}

/// A built-in signal together with its ground truth.
#[derive(Debug, Clone)]
pub struct BuiltinSignal {
    pub signal: SampledSignal,
    pub spec: SuperpositionSpec,
    /// `φ′_k(t_i)` per component.
    pub inst_freqs: Vec<Vec<f64>>,
    /// `A_k(t_i)` per component.
    pub amplitudes: Vec<Vec<f64>>,
    /// Real components `A_k(t_i) Re s_k(2π φ_k(t_i))`.
    pub components: Vec<Vec<f64>>,
    /// Slow-variation parameter ε of the class, when known.
    pub eps: Option<f64>,
}

/// `±|t|^{1.1}`, extended oddly so the amplitude below is defined for `t < 0`.
fn signed_pow11(t: f64) -> f64 {
    t.signum() * t.abs().powf(1.1)
}

/// `A₁(t) = 1 + 0.1 sin(t^{1.1})`.
pub fn amplitude_a1() -> Profile {
    Profile::new(|t| 1.0 + 0.1 * signed_pow11(t).sin()).with_derivatives(
        |t| 0.11 * t.abs().powf(0.1) * signed_pow11(t).cos(),
        |t| {
            if t == 0.0 {
                return 0.0;
            }
            let u = signed_pow11(t);
            let du = 1.1 * t.abs().powf(0.1);
            let d2u = 0.11 * t.signum() * t.abs().powf(-0.9);
            0.1 * (d2u * u.cos() - du * du * u.sin())
        },
    )
}

/// `A₂(t) = √(1 + cos t)`.
pub fn amplitude_a2() -> Profile {
    Profile::new(|t| (1.0 + t.cos()).max(0.0).sqrt()).with_derivatives(
        |t| {
            let r = (1.0 + t.cos()).max(0.0).sqrt();
            if r < 1e-12 {
                0.0
            } else {
                -t.sin() / (2.0 * r)
            }
        },
        |t| {
            let r = (1.0 + t.cos()).max(0.0).sqrt();
            if r < 1e-12 {
                0.0
            } else {
                -t.cos() / (2.0 * r) - t.sin() * t.sin() / (4.0 * r * r * r)
            }
        },
    )
}

/// `φ₁(t) = 1.5t + 0.2 cos(t+1)`.
pub fn phase_phi1() -> Profile {
    Profile::new(|t| 1.5 * t + 0.2 * (t + 1.0).cos())
        .with_derivatives(|t| 1.5 - 0.2 * (t + 1.0).sin(), |t| -0.2 * (t + 1.0).cos())
}

/// `φ₂(t) = 4.5(t + 0.2 cos t)`.
pub fn phase_phi2() -> Profile {
    Profile::new(|t| 4.5 * (t + 0.2 * t.cos()))
        .with_derivatives(|t| 4.5 - 0.9 * t.sin(), |t| -0.9 * t.cos())
}

/// `φ₃(t) = 4t + 0.1 cos(t+1)`.
pub fn phase_phi3() -> Profile {
    Profile::new(|t| 4.0 * t + 0.1 * (t + 1.0).cos())
        .with_derivatives(|t| 4.0 - 0.1 * (t + 1.0).sin(), |t| -0.1 * (t + 1.0).cos())
}

/// `φ₄(t) = 5t + 0.2 cos²t`.
pub fn phase_phi4() -> Profile {
    Profile::new(|t| 5.0 * t + 0.2 * t.cos() * t.cos()).with_derivatives(
        |t| 5.0 - 0.4 * t.cos() * t.sin(),
        |t| -0.4 * (2.0 * t).cos(),
    )
}

/// Slow-variation parameter quoted for the f3 experiment.
pub const F3_EPS: f64 = 2.0 / 25.0;
/// Frequency separation quoted for the f3 experiment.
pub const F3_SEPARATION: f64 = 1.0 / 9.0;
/// SNR of the noisy f4 signal in dB.
pub const F4_SNR_DB: f64 = -2.0;

fn builtin_spec(name: BuiltinName) -> SuperpositionSpec {
    match name {
        BuiltinName::F1 | BuiltinName::F2 => {
            let first = if name == BuiltinName::F1 {
                AnalyticComponent::new(amplitude_a1(), phase_phi1(), FourierShape::toy(ToyShape::EcgLike))
            } else {
                AnalyticComponent::new(amplitude_a1().scaled(1.0 / 3.5), phase_phi1(), FourierShape::exponential())
            };
            let first_harmonics = first.shape.n_max();
            let second =
                AnalyticComponent::new(amplitude_a2(), phase_phi2(), FourierShape::toy(ToyShape::S1));
            SuperpositionSpec::new(vec![first, second], 1.0 / 3.0, 4)
                .with_harmonics(vec![first_harmonics, 4])
        }
        BuiltinName::F3 | BuiltinName::F4 => SuperpositionSpec::new(
            vec![
                AnalyticComponent::new(amplitude_a1(), phase_phi3(), FourierShape::toy(ToyShape::S3)),
                AnalyticComponent::new(amplitude_a2(), phase_phi4(), FourierShape::toy(ToyShape::S4)),
            ],
            F3_SEPARATION,
            4,
        )
        .with_harmonics(vec![3, 4]),
    }
}

/// Builds one of the reference signals with its analytic ground truth.
///
/// `seed` only affects `F4`, which adds −2 dB white noise to `F3`.
pub fn builtin_signal(name: BuiltinName, grid: &TimeGrid, seed: u64) -> Result<BuiltinSignal> {
    let spec = builtin_spec(name);
    let clean = synthesize(&spec, grid)?;
    let signal = if name == BuiltinName::F4 {
        add_noise(&clean, F4_SNR_DB, seed)?
    } else {
        clean
    };
    let per_component = |f: &dyn Fn(&AnalyticComponent, f64) -> f64| -> Vec<Vec<f64>> {
        spec.components
            .iter()
            .map(|c| grid.times().map(|t| f(c, t)).collect())
            .collect()
    };
    let inst_freqs = per_component(&|c, t| c.inst_freq(t, grid.dt));
    let amplitudes = per_component(&|c, t| c.amplitude.value(t));
    let components = per_component(&|c, t| c.eval_real(t));
    let eps = matches!(name, BuiltinName::F3 | BuiltinName::F4).then_some(F3_EPS);
    Ok(BuiltinSignal {
        signal,
        spec,
        inst_freqs,
        amplitudes,
        components,
        eps,
    })
}
