//! Builds the reference signals and checks the model assumptions on them.
//!
//! Pass an output path to also write f3 as a `t,value` CSV.

use std::io::Write;

use waveshape::signal::{validate_imf, BuiltinName};
use waveshape::{builtin_signal, validate_separation, TimeGrid};

fn main() -> waveshape::Result<()> {
    let grid = TimeGrid::new(0.0, 1.0 / 64.0, 1024)?;
    for name in [BuiltinName::F1, BuiltinName::F2, BuiltinName::F3, BuiltinName::F4] {
        let b = builtin_signal(name, &grid, 7)?;
        println!("{name:?}: {} samples, variance {:.3}", b.signal.len(), b.signal.variance());
        for (k, c) in b.spec.components.iter().enumerate() {
            // ε is only quoted for f3 and f4; elsewhere the ratios are informative alone
            let r = validate_imf(c, &grid, b.eps.unwrap_or(f64::INFINITY))?;
            print!("  component {}: max|A′|/φ′ = {:.3}, max|φ″|/φ′ = {:.3}", k + 1, r.eps_a, r.eps_phi);
            match b.eps {
                Some(eps) => println!(", IMF at ε = {eps}: {}", r.pass),
                None => println!(),
            }
        }
        match validate_separation(&b.spec, 0.099, &grid)? {
            r if r.pass => println!("  harmonic scale bands are disjoint"),
            r => println!("  harmonic scale bands overlap: {:?}", r.violation),
        }
    }

    if let Some(path) = std::env::args().nth(1) {
        let b = builtin_signal(BuiltinName::F3, &grid, 0)?;
        let mut f = std::fs::File::create(&path)?;
        f.write_all(&waveshape::io::encode_signal(&b.signal))?;
        println!("wrote {path}");
    }
    Ok(())
}
