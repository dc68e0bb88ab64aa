//! Discrete Hardy-Littlewood maximal function on a disk domain.

use rieszlab::potentials::{maximal_function, maximal_function_field, PotentialOptions};
use rieszlab::{DomainGeometry, GridField, MaskedGrid};

fn main() -> rieszlab::Result<()> {
    let mesh = MaskedGrid::discretize(&DomainGeometry::ball(vec![0.0, 0.0], 1.0), &[96, 96])?;
    let opts = PotentialOptions::default();

    let c = GridField::constant(mesh.clone(), 0.7);
    let mc = maximal_function_field(&c, &opts)?;
    println!("M(0.7) ranges over [{}, {}]", min(&mc), mc.max_abs());

    let spike = GridField::from_fn(mesh.clone(), |x| if x[0].abs() < 0.1 && x[1].abs() < 0.1 { 1.0 } else { 0.0 });
    for x in [[0.0, 0.0], [0.3, 0.0], [0.6, 0.0], [0.9, 0.0]] {
        println!("Mf({:.1}, {:.1}) = {:.4}", x[0], x[1], maximal_function(&spike, &x, &opts)?);
    }
    Ok(())
}

fn min(f: &GridField) -> f64 {
    f.masked_values().into_iter().fold(f64::INFINITY, f64::min)
}
