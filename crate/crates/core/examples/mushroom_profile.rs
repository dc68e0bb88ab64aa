//! Mushroom domain, its counterexample sequence and the closed-form
//! lower bounds for two Orlicz functions.

use rieszlab::domains::{counterexample_field, divergence_profile, mushroom_build, MushroomLayout, MushroomSpec};
use rieszlab::fields::{gradient_magnitude, lp_norm};
use rieszlab::{MaskedGrid, OrliczFunction, PhiKernel};

fn main() -> rieszlab::Result<()> {
    let phi = PhiKernel::power(1.2)?;
    let spec = MushroomSpec::geometric(2, phi.clone(), 1.0, 0.5, 30, 1)?;
    for h in [OrliczFunction::power(2.0), OrliczFunction::power(1.5)] {
        let prof = divergence_profile(&spec, 1.0, &h, 30)?;
        println!("{}: E_1 = {:.3e}, E_30 = {:.3e}, {:?}", h.label(), prof.lower_bound[0], prof.lower_bound[29], prof.verdict);
    }

    // three caps starting at r_3 fit side by side on the top face
    let small = MushroomSpec::geometric(2, phi, 1.0, 0.5, 3, 3)?;
    let layout = MushroomLayout::place(&small)?;
    for m in &layout.mushrooms {
        println!("k = {}: cap {:?}..{:?}", m.index, m.cap.lo, m.cap.hi);
    }
    let mesh = MaskedGrid::discretize(&mushroom_build(&small)?, &[384, 384])?;
    for k in 3..=5 {
        let ce = counterexample_field(&small, k, 1.0, mesh.clone())?;
        println!("u_{k}: F = {:.4}, ||grad u||_1 exact {:.4}, finite differences {:.4}", ce.cap_value, lp_norm(&ce.grad, 1.0)?, lp_norm(&gradient_magnitude(&ce.u), 1.0)?);
    }
    Ok(())
}
