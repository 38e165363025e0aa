//! Component reconstruction from harmonic bands of the synchrosqueezed plane.

use num_complex::Complex64;

use crate::cwt::MotherWavelet;
use crate::error::{Error, Result};
use crate::ridge::{harmonic_bands, RidgeCurve};
use crate::signal::TimeGrid;
use crate::sst::{band_integrate, SstPlane};

/// Analytic reconstruction of one component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentEstimate {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
}

impl ComponentEstimate {
    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    /// `2·Re`: a real input only contributes its positive-frequency half to
    /// the transform, so the real component is twice the real part.
    pub fn doubled_real(&self) -> Vec<f64> {
        self.values.iter().map(|z| 2.0 * z.re).collect()
    }

    pub fn amplitude_env(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }
}

/// `max(3Δξ, 0.05·median ridge frequency)`.
pub fn default_halfwidth(ridge: &RidgeCurve) -> f64 {
    let mut f = ridge.freq.clone();
    f.sort_by(|a, b| a.total_cmp(b));
    let median = if f.is_empty() { 0.0 } else { f[f.len() / 2] };
    (3.0 * ridge.bins.width).max(0.05 * median)
}

/// Integrates `S` over the first `d` harmonic bands of `ridge`.
pub fn reconstruct(
    plane: &SstPlane,
    ridge: &RidgeCurve,
    d: usize,
    halfwidth: f64,
    w: &MotherWavelet,
) -> Result<ComponentEstimate> {
    if ridge.freq.len() != plane.grid.n {
        return Err(Error::Config("ridge and plane lengths differ".into()));
    }
    let bands = harmonic_bands(ridge, d, halfwidth)?;
    let values = band_integrate(plane, &bands, w.r_psi())?;
    Ok(ComponentEstimate {
        grid: plane.grid,
        values,
    })
}

/// `C·ε̃` with `C = Aε̃² + 4[(φ′/(1−Δ))^{1/2} − (φ′/(1+Δ))^{1/2}]`.
pub fn error_bound_at(phi_prime: f64, amplitude: f64, delta: f64, eps_tilde: f64) -> f64 {
    let bracket = (phi_prime / (1.0 - delta)).sqrt() - (phi_prime / (1.0 + delta)).sqrt();
    (amplitude * eps_tilde * eps_tilde + 4.0 * bracket) * eps_tilde
}

/// Pointwise reconstruction error bound along a frequency curve.
pub fn error_bound(phi_prime: &[f64], amplitude: &[f64], delta: f64, eps_tilde: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("wavelet bandwidth must lie in (0,1), got {delta}")));
    }
    if phi_prime.len() != amplitude.len() {
        return Err(Error::Config("frequency and amplitude lengths differ".into()));
    }
    Ok(phi_prime
        .iter()
        .zip(amplitude)
        .map(|(&f, &a)| error_bound_at(f, a, delta, eps_tilde))
        .collect())
}
