//! Finite-difference gradients, norms and averages on masked grids.

use rieszlab::fields::{ball_average, domain_average, gradient_magnitude, lp_norm};
use rieszlab::{DomainGeometry, GridField, MaskedGrid};

fn main() -> rieszlab::Result<()> {
    let dom = DomainGeometry::ball(vec![0.0, 0.0], 1.0);
    for res in [32, 64, 128] {
        let mesh = MaskedGrid::discretize(&dom, &[res, res])?;
        let u = GridField::from_fn(mesh.clone(), |x| (2.0 * x[0]).sin() * x[1]);
        let g = gradient_magnitude(&u);
        println!(
            "{res:>4}  |D| = {:.5}  ||u||_2 = {:.5}  ||grad u||_2 = {:.5}  avg = {:+.2e}  ball avg = {:+.2e}",
            mesh.volume(),
            lp_norm(&u, 2.0)?,
            lp_norm(&g, 2.0)?,
            domain_average(&u),
            ball_average(&u, &[0.2, 0.1], 0.3)?
        );
    }
    Ok(())
}
