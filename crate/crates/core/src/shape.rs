//! Wave-shape functions stored spectrally.
//!
//! A shape is a 2π-periodic analytic function `s(t) = Σ_{n≥1} ŝ(n) e^{int}` with
//! unit L² norm. Real-valued shapes are represented by their positive-frequency
//! part; the real signal is recovered as `Re s`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Default number of retained Fourier modes.
pub const DEFAULT_MODES: usize = 128;

/// Samples per period used when analysing closed-form toy shapes.
const TOY_SAMPLES: usize = 4096;

/// Samples per period used for the sup norm.
const SUP_SAMPLES: usize = 1 << 14;

const ECG_LIKE_FIXTURE: &str = include_str!("../fixtures/ecg_like_shape.csv");

/// Analytic, mean-zero, unit-norm 2π-periodic shape function.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierShape {
    // coeffs[i] holds ŝ(i + 1)
    coeffs: Vec<Complex64>,
}

/// Minimal class parameters `(δ, D, θ)` of a shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeClass {
    /// Largest ratio `|ŝ(k)| / |ŝ(1)|` over `k ≠ 1`.
    pub delta: f64,
    /// Smallest `D ≥ 1` such that `Σ_{n>D} n|ŝ(n)| ≤ θ`.
    pub harmonics: usize,
    pub theta: f64,
}

/// Built-in shapes.
///
/// `Fig1a`, `Fig1b` and `Fig1c` are the closed-form toy shapes; `S1` is the
/// same family with modulation depth 0.5. `S3`, `S4` and `EcgLike` are project
/// fixtures defined by their spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyShape {
    Fig1a,
    Fig1b,
    Fig1c,
    S1,
    S3,
    S4,
    EcgLike,
}

impl ToyShape {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name.to_ascii_lowercase().as_str() {
            "fig1a" => ToyShape::Fig1a,
            "fig1b" => ToyShape::Fig1b,
            "fig1c" => ToyShape::Fig1c,
            "s1" => ToyShape::S1,
            "s3" => ToyShape::S3,
            "s4" => ToyShape::S4,
            "ecg" | "ecg-like" | "ecglike" => ToyShape::EcgLike,
            _ => return None,
        })
    }
}

/// `cos(t + c·cos t)`, equal to `[cos(c cos t) − tan(t) sin(c cos t)] cos t`
/// without the removable singularity at `cos t = 0`.
pub fn phase_modulated_cosine(t: f64, depth: f64) -> f64 {
    (t + depth * t.cos()).cos()
}

/// The extra term of the two-bump toy shape: `1.4 cos₊(t + 1/6)² cos t`.
pub fn clipped_bump(t: f64) -> f64 {
    let c = (t + 1.0 / 6.0).cos().max(0.0);
    1.4 * c * c * t.cos()
}

fn uniform_period(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect()
}

/// Positive-index Fourier coefficients `ŝ(1..=n_keep)` of one period of
/// uniformly spaced samples, without normalization.
pub fn analytic_coefficients(samples: &[f64], n_keep: usize) -> Result<Vec<Complex64>> {
    if n_keep == 0 {
        return Err(Error::Config("n_keep must be positive".into()));
    }
    if samples.len() < 2 * n_keep {
        return Err(Error::Resolution(format!(
            "{} samples cannot resolve {} modes",
            samples.len(),
            n_keep
        )));
    }
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(buf[1..=n_keep].iter().map(|c| c * scale).collect())
}

impl FourierShape {
    /// Builds a shape from coefficients `ŝ(1), ŝ(2), …`, normalizing to unit L² norm.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateShape);
        }
        Ok(FourierShape {
            coeffs: coeffs.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// Analyses one period of real samples on `[0, 2π)` and keeps the first
    /// `n_keep` positive modes.
    pub fn from_samples(samples: &[f64], n_keep: usize) -> Result<Self> {
        Self::from_coeffs(analytic_coefficients(samples, n_keep)?)
    }

    /// The single-mode shape `e^{it}`.
    pub fn exponential() -> Self {
        FourierShape {
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn toy(kind: ToyShape) -> Self {
        let analyse = |f: &dyn Fn(f64) -> f64| {
            Self::from_samples(&uniform_period(TOY_SAMPLES, f), DEFAULT_MODES)
                .expect("toy shapes are non-degenerate")
        };
        match kind {
            ToyShape::Fig1a => analyse(&|t| phase_modulated_cosine(t, 0.8)),
            ToyShape::Fig1b => analyse(&|t| phase_modulated_cosine(t, 0.8) - clipped_bump(t)),
            ToyShape::Fig1c => analyse(&|t| phase_modulated_cosine(t, 1.2)),
            ToyShape::S1 => analyse(&|t| phase_modulated_cosine(t, 0.5)),
            ToyShape::S3 => Self::from_polar(&[
                (1.0, 0.0),
                (0.8, 0.6),
                (0.3, -1.1),
                (4e-3, 0.3),
                (2e-3, 0.0),
                (1e-3, 0.0),
            ]),
            ToyShape::S4 => Self::from_polar(&[
                (1.0, 0.0),
                (0.4, -0.9),
                (0.25, 0.5),
                (0.15, 2.0),
                (3e-3, 0.0),
                (1.5e-3, 0.0),
            ]),
            ToyShape::EcgLike => {
                Self::from_csv(ECG_LIKE_FIXTURE).expect("bundled ECG-like fixture is valid")
            }
        }
    }

    fn from_polar(modes: &[(f64, f64)]) -> Self {
        Self::from_coeffs(modes.iter().map(|&(r, th)| Complex64::from_polar(r, th)).collect())
            .expect("fixture spectra are non-degenerate")
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `ŝ(n)`; zero for `n = 0` and for `n > n_max`.
    pub fn coeff(&self, n: usize) -> Complex64 {
        if n == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs.get(n - 1).copied().unwrap_or_default()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Σ_n ŝ(n) e^{i n phase}`.
    pub fn eval(&self, phase: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, phase);
        let mut p = z;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 && i % 16 == 0 {
                // re-anchor the power recurrence to keep rounding bounded
                p = Complex64::from_polar(1.0, phase * (i + 1) as f64);
            }
            acc += c * p;
            p *= z;
        }
        acc
    }

    /// Real shape value `Re s(phase)`.
    pub fn eval_real(&self, phase: f64) -> f64 {
        self.eval(phase).re
    }

    /// Minimal `(δ, D)` for the given tail budget `θ`.
    pub fn classify(&self, theta: f64) -> Result<ShapeClass> {
        if !(theta >= 0.0) {
            return Err(Error::Config("theta must be nonnegative".into()));
        }
        let base = self.coeff(1).norm();
        if base == 0.0 {
            return Err(Error::ClassMembership(
                "the first Fourier mode vanishes".into(),
            ));
        }
        let delta = self.coeffs[1..]
            .iter()
            .map(|c| c.norm() / base)
            .fold(0.0, f64::max);
        // tail[D] = Σ_{n>D} n|ŝ(n)|, built from the top down
        let n_max = self.n_max();
        let mut harmonics = n_max.max(1);
        let mut tail = 0.0;
        for d in (1..n_max).rev() {
            tail += (d + 1) as f64 * self.coeff(d + 1).norm();
            if tail <= theta {
                harmonics = d;
            } else {
                break;
            }
        }
        Ok(ShapeClass {
            delta,
            harmonics,
            theta,
        })
    }

    /// `sup_t |s(t)|` estimated on a dense phase grid.
    pub fn sup_norm(&self) -> f64 {
        (0..SUP_SAMPLES)
            .map(|j| self.eval(2.0 * PI * j as f64 / SUP_SAMPLES as f64).norm())
            .fold(0.0, f64::max)
    }

    /// `Σ_n n |ŝ(n)|`.
    pub fn weighted_l1(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1) as f64 * c.norm())
            .sum()
    }

    /// `Σ_{n>d} |ŝ(n)|`.
    pub fn tail_l1(&self, d: usize) -> f64 {
        self.coeffs.iter().skip(d).map(|c| c.norm()).sum()
    }

    /// Serializes as `n,re,im` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re,im\n");
        for (i, c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, c.re, c.im);
        }
        out
    }

    /// Parses an `n,re,im` CSV. Missing indices are zero; `n ≤ 0` rows are rejected.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "n,re,im" => {}
            other => {
                return Err(Error::Format(format!(
                    "expected header \"n,re,im\", found {other:?}"
                )))
            }
        }
        let mut coeffs: Vec<Complex64> = Vec::new();
        for (row, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Format(format!("row {}: expected 3 fields", row + 1)));
            }
            let bad = |_| Error::Format(format!("row {}: unparsable number", row + 1));
            let n: i64 = fields[0].parse().map_err(|_| bad(()))?;
            let re: f64 = fields[1].parse().map_err(|_| bad(()))?;
            let im: f64 = fields[2].parse().map_err(|_| bad(()))?;
            if n <= 0 {
                return Err(Error::Format(format!(
                    "row {}: index {n} is not a positive mode",
                    row + 1
                )));
            }
            let n = n as usize;
            if coeffs.len() < n {
                coeffs.resize(n, Complex64::default());
            }
            coeffs[n - 1] = Complex64::new(re, im);
        }
        Self::from_coeffs(coeffs)
    }
}
