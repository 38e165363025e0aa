//! Synchrosqueezing f2 and following the second component's frequency.

use waveshape::ridge::extract_ridge_in;
use waveshape::signal::BuiltinName;
use waveshape::sst::{default_threshold, DEFAULT_THRESHOLD_RHO};
use waveshape::{builtin_signal, cwt, default_scale_grid, omega, synchrosqueeze, FrequencyBins, MotherWavelet, TimeGrid};

fn main() -> waveshape::Result<()> {
    let grid = TimeGrid::new(0.0, 1.0 / 64.0, 1024)?;
    let f2 = builtin_signal(BuiltinName::F2, &grid, 0)?;

    // fast FM on φ₂ needs Δ² above |φ″|/φ′²
    let w = MotherWavelet::bump(0.2)?;
    let scales = default_scale_grid(&w, 1.0, 6.0, 4, 32)?;
    let sc = cwt(&f2.signal, &w, &scales)?;
    let gamma = default_threshold(&sc, DEFAULT_THRESHOLD_RHO);
    let om = omega(&sc, gamma);
    println!("{} scales, γ = {gamma:.3e}, ω defined at {} points", scales.len(), om.defined_count());

    let bins = FrequencyBins::linear(0.5, 16.0, 512)?;
    let plane = synchrosqueeze(&sc, &om, &bins, 0.0, gamma)?;
    let ridge = extract_ridge_in(&plane, 2.0, 3.2, 5.8)?;

    println!("{:>6} {:>10} {:>10}", "t", "ridge", "4.5−0.9sin t");
    for i in (grid.interior(0.8)).step_by(64) {
        println!("{:>6.2} {:>10.3} {:>10.3}", grid.time(i), ridge.freq[i], f2.inst_freqs[1][i]);
    }
    Ok(())
}
