//! Beat-to-beat rate against the synchrosqueezed frequency of an ECG-like
//! pulse train with a known, slowly varying rate.

use waveshape::ridge::extract_ridge_in;
use waveshape::sst::{default_threshold, DEFAULT_THRESHOLD_RHO};
use waveshape::{
    compare_rates, cwt, default_scale_grid, detect_peaks, intuitive_rate, omega, synchrosqueeze, synthesize,
    AnalyticComponent, FourierShape, FrequencyBins, MotherWavelet, Profile, RateCurve, SuperpositionSpec, TimeGrid,
    ToyShape,
};

fn main() -> waveshape::Result<()> {
    let grid = TimeGrid::new(0.0, 1.0 / 64.0, 1024)?;
    let phase = Profile::new(|t| 1.2 * t + 0.2 * (0.5 * t).sin())
        .with_derivatives(|t| 1.2 + 0.1 * (0.5 * t).cos(), |t| -0.05 * (0.5 * t).sin());
    let beat = AnalyticComponent::new(Profile::constant(1.0), phase, FourierShape::toy(ToyShape::EcgLike));
    let ecg = synthesize(&SuperpositionSpec::new(vec![beat], 0.5, 1), &grid)?;

    let events = detect_peaks(&ecg, 0.4, 0.5)?;
    let ihr = intuitive_rate(&events)?;
    println!("{} beats detected", events.len());

    let w = MotherWavelet::bump(0.2)?;
    let sc = cwt(&ecg, &w, &default_scale_grid(&w, 0.8, 2.5, 4, 32)?)?;
    let gamma = default_threshold(&sc, DEFAULT_THRESHOLD_RHO);
    let bins = FrequencyBins::linear(0.5, 10.0, 512)?;
    let plane = synchrosqueeze(&sc, &omega(&sc, gamma), &bins, 0.0, gamma)?;
    // the fundamental, not the stronger QRS harmonics
    let sstif = RateCurve::from_ridge(&extract_ridge_in(&plane, 2.0, 0.8, 1.8)?);

    let inner = grid.interior(0.8);
    let window = (grid.time(inner.start), grid.time(inner.end - 1));
    let cmp = compare_rates(&ihr, &sstif, window)?;
    println!(
        "SSTIF − IHR over [{:.1}, {:.1}] s: rmse {:.4} Hz, max {:.4} Hz, bias {:+.4} Hz",
        window.0, window.1, cmp.rmse, cmp.max_abs, cmp.mean_bias
    );
    Ok(())
}
