//! Presets, the dyadic h-series and the admissible exponent range.

use rieszlab::kernels::{admissible_p_max, closed_form_h, h_series, Preset, PresetParams, DEFAULT_SERIES_TERMS};
use rieszlab::PhiKernel;

fn main() -> rieszlab::Result<()> {
    for name in ["classical", "hedberg(0.5)", "log-john(1.2,1)"] {
        let setup = name.parse::<Preset>()?.resolve(PresetParams::new(2, 1.0))?;
        println!("{name:<16} phi = {:<28} h = {:<40} H = {}", setup.phi.label(), setup.h.label(), setup.orlicz.label());
    }

    let phi = PhiKernel::power_over_log(1.2, 1.0)?;
    for t in [1e-4, 1e-2, 1.0, 10.0] {
        let s = h_series(&phi, 2, t, DEFAULT_SERIES_TERMS)?;
        println!("t = {t:<7} series {:.6e} (+{:.1e})  closed form {:.6e}", s.partial_sum, s.tail_bound, closed_form_h(1.2, 1.0, 2, t)?);
    }

    let endpoint = h_series(&PhiKernel::power_over_log(2.0, 0.0)?, 2, 1.0, 128)?;
    println!("alpha = 2, n = 2: diverges = {} after {} terms", endpoint.diverges, endpoint.terms);
    for alpha in [1.0, 1.2, 1.5, 1.9] {
        println!("alpha = {alpha}: p < {:.3}", admissible_p_max(alpha, 2)?);
    }
    Ok(())
}
