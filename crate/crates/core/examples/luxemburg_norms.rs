//! Luxemburg norms of one field under several Orlicz functions.

use rieszlab::fields::{llogl_norm, lp_norm};
use rieszlab::orlicz::{delta2_estimate, luxemburg_norm, n_function_check};
use rieszlab::{DomainGeometry, GridField, LogGrid, MaskedGrid, OrliczFunction};

fn main() -> rieszlab::Result<()> {
    let mesh = MaskedGrid::discretize(&DomainGeometry::cube(2, 0.0, 1.0), &[64, 64])?;
    let u = GridField::from_fn(mesh, |x| (-20.0 * ((x[0] - 0.4).powi(2) + (x[1] - 0.6).powi(2))).exp());

    let families = [
        OrliczFunction::power(1.5),
        OrliczFunction::llogl(),
        OrliczFunction::log_john(2, 1.0, 1.2, 1.0, 0.0, 0.0, std::f64::consts::E)?,
        OrliczFunction::exp_minus_one(),
    ];
    let grid = LogGrid::default();
    for h in &families {
        let norm = luxemburg_norm(&u, h)?;
        let d2 = delta2_estimate(h, &grid)?;
        println!(
            "{:<36} norm {:.6} ({} steps)  delta2 {:.3}{}  N-function {}",
            h.label(),
            norm.value,
            norm.iterations,
            d2.value,
            if d2.unbounded { " (unbounded)" } else { "" },
            n_function_check(h, &grid).all_pass()
        );
    }
    println!("direct L^1.5 norm {:.6}, L log L norm {:.6}", lp_norm(&u, 1.5)?, llogl_norm(&u)?);
    Ok(())
}
