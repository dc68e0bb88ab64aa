//! Built-in test field families. Members are defined relative to the
//! bounding box, so the same seed gives the same function at every
//! resolution.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{GridField, MaskedGrid};

/// Family names accepted in `fields.families`.
pub const FAMILIES: [&str; 6] = ["indicator", "gaussian", "random", "trig", "linear", "zero"];

/// Nodes per axis of the lattice behind the `random` family.
const LATTICE: usize = 9;

fn rng_for(seed: u64, family: usize, member: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((family as u64) << 32 | member as u64))
}

struct Frame {
    lo: Vec<f64>,
    ext: Vec<f64>,
}

impl Frame {
    fn of(mesh: &MaskedGrid) -> Self {
        let g = &mesh.grid;
        Self {
            lo: g.lo().to_vec(),
            ext: g.lo().iter().zip(g.hi()).map(|(a, b)| b - a).collect(),
        }
    }

    fn min_ext(&self) -> f64 {
        self.ext.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Random point in the middle 40% of the box.
    fn center(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.ext)
            .map(|(l, e)| l + e * (0.3 + 0.4 * rng.gen::<f64>()))
            .collect()
    }
}

/// Member `member` of family `name`.
pub fn family_member(name: &str, member: usize, seed: u64, mesh: &Arc<MaskedGrid>) -> Result<GridField> {
    let family = FAMILIES
        .iter()
        .position(|f| *f == name)
        .ok_or_else(|| Error::Config(format!("unknown field family '{name}'")))?;
    let mut rng = rng_for(seed, family, member);
    let frame = Frame::of(mesh);
    let n = mesh.grid.n();
    let field = match name {
        "indicator" => {
            let c = frame.center(&mut rng);
            let r = frame.min_ext() * (0.15 + 0.15 * rng.gen::<f64>());
            GridField::from_fn(mesh.clone(), move |x| {
                let d2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
                if d2 < r * r {
                    1.0
                } else {
                    0.0
                }
            })
        }
        "gaussian" => {
            let c = frame.center(&mut rng);
            let s = frame.min_ext() * (0.08 + 0.12 * rng.gen::<f64>());
            GridField::from_fn(mesh.clone(), move |x| {
                let d2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
                (-d2 / (2.0 * s * s)).exp()
            })
        }
        "random" => random_lattice_field(&mut rng, &frame, n, mesh),
        "trig" => {
            let k: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(1..=2u8))).collect();
            let phase: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * std::f64::consts::PI).collect();
            GridField::from_fn(mesh.clone(), move |x| {
                (0..n)
                    .map(|a| (k[a] * std::f64::consts::PI * (x[a] - frame.lo[a]) / frame.ext[a] + phase[a]).cos())
                    .product()
            })
        }
        "linear" => {
            let axis = member % n;
            GridField::from_fn(mesh.clone(), move |x| x[axis])
        }
        _ => GridField::zeros(mesh.clone()),
    };
    Ok(field)
}

/// Uniform values on a `LATTICE^n` node set, one neighbour-averaging pass,
/// then multilinear interpolation at cell centers.
fn random_lattice_field(rng: &mut ChaCha8Rng, frame: &Frame, n: usize, mesh: &Arc<MaskedGrid>) -> GridField {
    let total = LATTICE.pow(n as u32);
    let raw: Vec<f64> = (0..total).map(|_| rng.gen::<f64>()).collect();
    let node = |m: &[usize]| m.iter().rev().fold(0, |acc, &i| acc * LATTICE + i);
    let mut smooth = vec![0.0; total];
    for (idx, slot) in smooth.iter_mut().enumerate() {
        let mut m = vec![0usize; n];
        let mut rest = idx;
        for v in m.iter_mut() {
            *v = rest % LATTICE;
            rest /= LATTICE;
        }
        let (mut sum, mut count) = (raw[idx], 1.0);
        for a in 0..n {
            for step in [-1isize, 1] {
                let pos = m[a] as isize + step;
                if pos >= 0 && pos < LATTICE as isize {
                    let mut nb = m.clone();
                    nb[a] = pos as usize;
                    sum += raw[node(&nb)];
                    count += 1.0;
                }
            }
        }
        *slot = sum / count;
    }
    let lo = frame.lo.clone();
    let ext = frame.ext.clone();
    GridField::from_fn(mesh.clone(), move |x| {
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for a in 0..n {
            let s = ((x[a] - lo[a]) / ext[a]).clamp(0.0, 1.0) * (LATTICE - 1) as f64;
            base[a] = (s.floor() as usize).min(LATTICE - 2);
            frac[a] = s - base[a] as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut m = base.clone();
            for a in 0..n {
                if corner >> a & 1 == 1 {
                    m[a] += 1;
                    w *= frac[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            acc += w * smooth[node(&m)];
        }
        acc
    })
}

/// All configured members as `(id, field)` in family-then-member order.
pub fn members(families: &[String], count: usize, seed: u64, mesh: &Arc<MaskedGrid>) -> Result<Vec<(String, GridField)>> {
    let mut out = Vec::new();
    for name in families {
        for k in 0..count {
            out.push((format!("{name}{k}"), family_member(name, k, seed, mesh)?));
        }
    }
    Ok(out)
}

/// Seeded uniform nonnegative field with one neighbour-averaging pass over
/// the grid cells, for property tests that need rough data.
pub fn rough_random(seed: u64, mesh: &Arc<MaskedGrid>) -> GridField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..mesh.grid.len()).map(|_| rng.gen::<f64>()).collect();
    let g = &mesh.grid;
    let mut vals = vec![0.0; g.len()];
    for &i in mesh.masked() {
        let m = g.multi_index(i);
        let (mut sum, mut count) = (raw[i], 1.0);
        for a in 0..g.n() {
            let s = g.stride(a);
            if m[a] > 0 {
                sum += raw[i - s];
                count += 1.0;
            }
            if m[a] + 1 < g.res()[a] {
                sum += raw[i + s];
                count += 1.0;
            }
        }
        vals[i] = sum / count;
    }
    GridField::from_values(mesh.clone(), vals).expect("length matches grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::DomainGeometry;

    #[test]
    fn members_are_resolution_independent() {
        let dom = DomainGeometry::cube(2, 0.0, 1.0);
        let a = MaskedGrid::discretize(&dom, &[16, 16]).unwrap();
        let b = MaskedGrid::discretize(&dom, &[32, 32]).unwrap();
        for name in ["gaussian", "random", "trig"] {
            let fa = family_member(name, 1, 3, &a).unwrap();
            let fb = family_member(name, 1, 3, &b).unwrap();
            // cell 0 of the coarse grid contains cells 0, 1, 32, 33 of the fine one
            let fine = 0.25 * (fb.values()[0] + fb.values()[1] + fb.values()[32] + fb.values()[33]);
            assert!((fa.values()[0] - fine).abs() < 0.05, "{name}");
        }
    }

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        let mesh = MaskedGrid::discretize(&DomainGeometry::cube(2, 0.0, 1.0), &[16, 16]).unwrap();
        let a = family_member("random", 0, 11, &mesh).unwrap();
        let b = family_member("random", 0, 11, &mesh).unwrap();
        let c = family_member("random", 1, 11, &mesh).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert!(family_member("nope", 0, 0, &mesh).is_err());
        assert!(a.masked_values().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
