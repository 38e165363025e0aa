//! CWT of a 4 Hz tone: the scalogram lives on the band |a·4 − 1| < Δ.

use std::f64::consts::PI;

use waveshape::{cwt, default_scale_grid, MotherWavelet, SampledSignal, TimeGrid};

fn main() -> waveshape::Result<()> {
    let grid = TimeGrid::new(0.0, 1.0 / 64.0, 1025)?;
    let sig = SampledSignal::new(0.0, grid.dt, grid.times().map(|t| (2.0 * PI * 4.0 * t).cos()).collect())?;
    let w = MotherWavelet::bump(0.1)?;
    println!("bump wavelet Δ = {}: R_ψ = {:.6}", w.delta(), w.r_psi().re);

    let scales = default_scale_grid(&w, 3.0, 5.0, 1, 16)?;
    let sc = cwt(&sig, &w, &scales)?;
    println!("{:>8} {:>8} {:>12}", "a", "a·c", "max |W|");
    for (j, &a) in scales.scales().iter().enumerate() {
        let peak = sc.w.row(j).iter().map(|z| z.norm()).fold(0.0, f64::max);
        println!("{a:>8.4} {:>8.3} {peak:>12.3e}", a * 4.0);
    }
    Ok(())
}
