//! Sup of the compatibility ratio at the critical exponent and above it.

use rieszlab::kernels::{sum_condition_sup, Preset, PresetParams};
use rieszlab::LogGrid;

fn main() -> rieszlab::Result<()> {
    let grid = LogGrid::new(-8, 8, 6);
    for epsilon in [0.0, 0.1, 0.5] {
        let mut params = PresetParams::new(2, 1.0);
        params.epsilon = epsilon;
        let setup = Preset::LogJohn { alpha: 1.2, beta: 1.0 }.resolve(params)?;
        let c = sum_condition_sup(&setup.inputs(), &grid)?;
        println!(
            "eps = {epsilon}: sup {:.4e} at t = {:.1e}, unbounded = {}, extensions {}, history {:?}",
            c.estimate.value, c.estimate.argmax, c.estimate.unbounded, c.extensions, c.history
        );
    }
    Ok(())
}
