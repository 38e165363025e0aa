//! Synchrosqueezing-based instantaneous-frequency estimation for signals built
//! from non-harmonic wave-shape functions.
//!
//! A signal is modelled as a superposition `f(t) = Σ_k A_k(t) s_k(2π φ_k(t))`
//! where each `s_k` is a 2π-periodic wave shape (not necessarily a cosine).
//! The crate covers the whole chain:
//!
//! - [`shape`]: spectral wave-shape functions and their class parameters
//! - [`signal`]: component synthesis, class validators and noise injection
//! - [`cwt`]: a compactly supported bump wavelet and the FFT-based CWT
//! - [`sst`]: the instantaneous-frequency information function and the
//!   synchrosqueezing transform
//! - [`ridge`]: dynamic-programming ridge extraction and harmonic bands
//! - [`recon`]: component reconstruction and its pointwise error bound
//! - [`rate`]: event-based intuitive rates and rate comparison
//! - [`oracle`]: slow reference paths and the CWT error bounds used in tests
//! - [`io`] and [`cli`]: file formats and the command-line pipeline

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cwt;
pub mod error;
pub mod io;
pub mod oracle;
pub mod rate;
pub mod recon;
pub mod ridge;
pub mod shape;
pub mod signal;
pub mod sst;

pub use cwt::{cwt, cwt_complex, default_scale_grid, MotherWavelet, ScaleGrid, Scalogram};
pub use error::{Error, Result};
pub use rate::{compare_rates, detect_peaks, intuitive_rate, EventList, RateComparison, RateCurve};
pub use recon::{error_bound, reconstruct, ComponentEstimate};
pub use ridge::{extract_ridge, extract_ridges, harmonic_bands, peel, RidgeCurve};
pub use shape::{FourierShape, ShapeClass, ToyShape};
pub use signal::{
    add_noise, builtin_signal, synthesize, validate_imf, validate_separation, AnalyticComponent,
    BuiltinSignal, ImfReport, Profile, SampledSignal, SuperpositionSpec, TimeGrid,
};
pub use sst::{band_integrate, omega, synchrosqueeze, BandSet, FrequencyBins, OmegaPlane, SstPlane};

pub use num_complex::Complex64;
