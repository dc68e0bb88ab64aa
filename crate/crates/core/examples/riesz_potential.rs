//! Riesz potential of the unit-disk indicator at the origin, against 2π.

use rieszlab::potentials::{riesz_potential, riesz_potential_field, PotentialOptions, SingularRule};
use rieszlab::{DomainGeometry, GridField, MaskedGrid, PhiKernel};

fn main() -> rieszlab::Result<()> {
    let phi = PhiKernel::identity();
    for res in [64, 128, 256] {
        let mesh = MaskedGrid::discretize(&DomainGeometry::cube(2, -1.0, 1.0), &[res, res])?;
        let disk = GridField::from_fn(mesh, |x| if x[0] * x[0] + x[1] * x[1] < 1.0 { 1.0 } else { 0.0 });
        let excl = riesz_potential(&disk, &phi, &[0.0, 0.0], &PotentialOptions::default())?;
        let cap = riesz_potential(&disk, &phi, &[0.0, 0.0], &PotentialOptions::default().with_rule(SingularRule::CapAtHalfCell))?;
        println!("{res:>4}  exclude-self {excl:.5}  cap-half-cell {cap:.5}  2pi {:.5}", 2.0 * std::f64::consts::PI);
    }

    // whole field at once; the FFT route kicks in on large grids
    let mesh = MaskedGrid::discretize(&DomainGeometry::cube(2, -1.0, 1.0), &[256, 256])?;
    let disk = GridField::from_fn(mesh.clone(), |x| if x[0] * x[0] + x[1] * x[1] < 1.0 { 1.0 } else { 0.0 });
    let field = riesz_potential_field(&disk, &PhiKernel::power_over_log(1.2, 1.0)?, &PotentialOptions::default())?;
    println!("max of I_phi f with phi = t^1.2/log(e+1/t): {:.4}", field.max_abs());
    Ok(())
}
