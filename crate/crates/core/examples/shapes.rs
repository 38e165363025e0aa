//! Spectral class parameters of the bundled wave shapes.

use waveshape::{FourierShape, ToyShape};

fn main() -> waveshape::Result<()> {
    let theta = 1e-3;
    println!("{:<8} {:>8} {:>4} {:>8} {:>8}", "shape", "delta", "D", "sup", "Σn|ŝ|");
    for kind in [
        ToyShape::Fig1a,
        ToyShape::Fig1b,
        ToyShape::Fig1c,
        ToyShape::S1,
        ToyShape::S3,
        ToyShape::S4,
        ToyShape::EcgLike,
    ] {
        let s = FourierShape::toy(kind);
        let class = s.classify(theta)?;
        println!(
            "{:<8} {:>8.3} {:>4} {:>8.3} {:>8.3}",
            format!("{kind:?}"),
            class.delta,
            class.harmonics,
            s.sup_norm(),
            s.weighted_l1()
        );
    }

    // a shape can also be recovered from one period of samples
    let ecg = FourierShape::toy(ToyShape::EcgLike);
    let samples: Vec<f64> = (0..512)
        .map(|i| ecg.eval_real(2.0 * std::f64::consts::PI * i as f64 / 512.0))
        .collect();
    let back = FourierShape::from_samples(&samples, ecg.n_max())?;
    let err = back
        .coeffs()
        .iter()
        .zip(ecg.coeffs())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    println!("ECG-like round trip from 512 samples: max coefficient error {err:.1e}");
    Ok(())
}
