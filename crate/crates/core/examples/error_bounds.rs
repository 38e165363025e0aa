//! Measured CWT deviations on f3 against the analytic error bounds.

use std::f64::consts::PI;

use waveshape::oracle::{cwt_bounds, leading_term, BoundContext};
use waveshape::signal::{synthesize_analytic, BuiltinName};
use waveshape::{builtin_signal, cwt_complex, default_scale_grid, Complex64, MotherWavelet, TimeGrid};

fn main() -> waveshape::Result<()> {
    let grid = TimeGrid::new(0.0, 1.0 / 64.0, 1024)?;
    let f3 = builtin_signal(BuiltinName::F3, &grid, 0)?;
    let eps = f3.eps.expect("f3 has a known ε");
    let w = MotherWavelet::bump(0.1)?;
    let scales = default_scale_grid(&w, 3.0, 6.0, 4, 32)?;
    let sc = cwt_complex(&synthesize_analytic(&f3.spec, &grid)?, grid, &w, &scales)?;
    let ctx = BoundContext::new(&f3.spec, &w, &grid);
    println!("I₀..I₃ = {:.4?}", ctx.moments);

    println!("{:>6} {:>6} {:>10} {:>10} {:>10} {:>10}", "t", "a", "|W−lead|", "εa½Λ₁", "|∂W−…|", "εa½Λ₂");
    for b in (256..768).step_by(128) {
        let t = grid.time(b);
        let fp = f3.spec.components[0].phase.derivative(t, 1e-5);
        // the scale closest to the first component's ridge
        let j = (0..scales.len())
            .min_by(|&x, &y| (scales.scales()[x] * fp - 1.0).abs().total_cmp(&(scales.scales()[y] * fp - 1.0).abs()))
            .expect("scale grid is nonempty");
        let a = scales.scales()[j];
        let lb = cwt_bounds(&ctx, a, t, 0, 1)?;
        let lead = leading_term(&ctx, &w, a, t, 0, 1);
        let dev = (sc.w[[j, b]] - lead).norm();
        let ddev = (sc.dw[[j, b]] - Complex64::i() * (2.0 * PI * fp) * lead).norm();
        let s = eps * a.sqrt();
        println!(
            "{t:>6.2} {a:>6.3} {dev:>10.2e} {:>10.2e} {ddev:>10.2e} {:>10.2e}",
            s * lb.lambda1,
            s * lb.lambda2
        );
    }
    Ok(())
}
