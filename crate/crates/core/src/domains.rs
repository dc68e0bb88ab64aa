//! Example geometries: the mushroom domain built from a unit cube with
//! cap-and-neck appendages on two opposite faces, its counterexample
//! sequence `u_k`, and the divergence profile of that sequence.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{DomainGeometry, GridField, MaskedGrid};
use crate::kernels::{PhiKernel, PhiSpec};
use crate::orlicz::OrliczFunction;

/// Relative size of the perturbations used to decide whether a point on a
/// shared face lies in the interior of the union.
const FACE_EPS: f64 = 1e-9;

/// Closed axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Block {
    fn contains_closed(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&a, &b))| v >= a && v <= b)
    }

    fn contains_open(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&a, &b))| v > a && v < b)
    }

    fn mirrored(&self) -> Self {
        let mut out = self.clone();
        out.lo[1] = 1.0 - self.hi[1];
        out.hi[1] = 1.0 - self.lo[1];
        out
    }
}

/// Radii of the realised mushrooms, `radii[i] = r_{first_index + i}`.
#[derive(Debug, Clone)]
pub struct MushroomSpec {
    pub n: usize,
    pub phi: PhiKernel,
    pub radii: Vec<f64>,
    pub first_index: usize,
}

impl MushroomSpec {
    /// `r_k = r0 * ratio^k` for `k = first_index .. first_index + count`.
    pub fn geometric(n: usize, phi: PhiKernel, r0: f64, ratio: f64, count: usize, first_index: usize) -> Result<Self> {
        let radii = (first_index..first_index + count).map(|k| r0 * ratio.powi(k as i32)).collect();
        let spec = Self {
            n,
            phi,
            radii,
            first_index,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n == 2 || self.n == 3) {
            return Err(Error::InvalidParameter(format!("mushrooms need n = 2 or 3, got {}", self.n)));
        }
        if self.radii.is_empty() {
            return Err(Error::InvalidParameter("no mushroom radii".into()));
        }
        if !self.radii.iter().all(|&r| r > 0.0 && r <= 0.5) || !self.radii.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "mushroom radii must decrease strictly within (0, 1/2]".into(),
            ));
        }
        for (i, &r) in self.radii.iter().enumerate() {
            if self.phi.value(r) > r {
                return Err(Error::InvalidParameter(format!(
                    "phi(r_{}) = {} exceeds r = {r}",
                    self.first_index + i,
                    self.phi.value(r)
                )));
            }
        }
        Ok(())
    }

    /// Position of mushroom `k` in `radii`.
    pub fn slot(&self, k: usize) -> Result<usize> {
        k.checked_sub(self.first_index)
            .filter(|&i| i < self.radii.len())
            .ok_or_else(|| Error::InvalidParameter(format!("mushroom {k} is not realised by this spec")))
    }

    pub fn radius(&self, k: usize) -> Result<f64> {
        Ok(self.radii[self.slot(k)?])
    }

    /// `F(r) = (r^{p-1} / (2 φ(r)^{n-1}))^{1/p}`, the cap value of `u_k`.
    pub fn cap_value(&self, r: f64, p: f64) -> f64 {
        let nf = self.n as f64;
        (r.powf(p - 1.0) / (2.0 * self.phi.value(r).powf(nf - 1.0))).powf(1.0 / p)
    }
}

/// JSON form `{n, phi, r0, ratio, count, first_index}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MushroomConfig {
    pub n: usize,
    pub phi: PhiSpec,
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    pub count: usize,
    #[serde(default = "default_first")]
    pub first_index: usize,
}

fn default_r0() -> f64 {
    1.0
}
fn default_ratio() -> f64 {
    0.5
}
fn default_first() -> usize {
    1
}

impl MushroomConfig {
    pub fn build(&self) -> Result<MushroomSpec> {
        MushroomSpec::geometric(self.n, self.phi.build()?, self.r0, self.ratio, self.count, self.first_index)
    }
}

/// One cap `Q_m` with its neck `P_m`; mirrored copies are derived.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mushroom {
    pub index: usize,
    pub radius: f64,
    pub cap: Block,
    pub neck: Block,
}

/// Where a point sits in the mushroom domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Base,
    Cap { slot: usize, mirrored: bool },
    Neck { slot: usize, mirrored: bool },
    Outside,
}

/// Placed mushrooms: caps packed left to right along `x_1` from 0, each
/// followed by a gap of `max(2 r_m, r_first / 2)`; necks centred under caps.
#[derive(Debug, Clone, Serialize)]
pub struct MushroomLayout {
    pub n: usize,
    pub mushrooms: Vec<Mushroom>,
}

impl MushroomLayout {
    pub fn place(spec: &MushroomSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n;
        let floor = spec.radii[0] / 2.0;
        let mut cursor = 0.0;
        let mut mushrooms = Vec::with_capacity(spec.radii.len());
        for (i, &r) in spec.radii.iter().enumerate() {
            if cursor + 2.0 * r > 1.0 + 1e-12 {
                return Err(Error::PlacementOverflow {
                    requested: spec.radii.len(),
                    max_feasible: i,
                });
            }
            let w = spec.phi.value(r);
            let mid = cursor + r;
            let mut cap = Block {
                lo: vec![cursor, 1.0 + r],
                hi: vec![cursor + 2.0 * r, 1.0 + 3.0 * r],
            };
            let mut neck = Block {
                lo: vec![mid - 0.5 * w, 1.0],
                hi: vec![mid + 0.5 * w, 1.0 + r],
            };
            if n == 3 {
                cap.lo.push(0.5 - r);
                cap.hi.push(0.5 + r);
                neck.lo.push(0.5 - 0.5 * w);
                neck.hi.push(0.5 + 0.5 * w);
            }
            mushrooms.push(Mushroom {
                index: spec.first_index + i,
                radius: r,
                cap,
                neck,
            });
            cursor += 2.0 * r + (2.0 * r).max(floor);
        }
        Ok(Self { n, mushrooms })
    }

    fn base(&self) -> Block {
        Block {
            lo: vec![0.0; self.n],
            hi: vec![1.0; self.n],
        }
    }

    /// All closed blocks of the union, mirrored copies included.
    pub fn blocks(&self) -> Vec<Block> {
        let mut out = vec![self.base()];
        for m in &self.mushrooms {
            out.push(m.cap.clone());
            out.push(m.neck.clone());
            out.push(m.cap.mirrored());
            out.push(m.neck.mirrored());
        }
        out
    }

    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let rmax = self.mushrooms.iter().map(|m| m.radius).fold(0.0, f64::max);
        let mut lo = vec![0.0; self.n];
        let mut hi = vec![1.0; self.n];
        lo[1] = -3.0 * rmax;
        hi[1] = 1.0 + 3.0 * rmax;
        (lo, hi)
    }

    /// Region of a point of the closed union, by priority base, neck, cap.
    pub fn locate(&self, x: &[f64]) -> Region {
        if self.base().contains_closed(x) {
            return Region::Base;
        }
        for (slot, m) in self.mushrooms.iter().enumerate() {
            for mirrored in [false, true] {
                let (neck, cap) = if mirrored {
                    (m.neck.mirrored(), m.cap.mirrored())
                } else {
                    (m.neck.clone(), m.cap.clone())
                };
                if neck.contains_closed(x) {
                    return Region::Neck { slot, mirrored };
                }
                if cap.contains_closed(x) {
                    return Region::Cap { slot, mirrored };
                }
            }
        }
        Region::Outside
    }
}

fn interior_of_union(blocks: &[Block], x: &[f64], eps: f64) -> bool {
    if blocks.iter().any(|b| b.contains_open(x)) {
        return true;
    }
    if !blocks.iter().any(|b| b.contains_closed(x)) {
        return false;
    }
    // on a face: inside iff every nearby perturbation stays in the union
    let n = x.len();
    let mut y = x.to_vec();
    (0..3usize.pow(n as u32)).all(|mut code| {
        for a in 0..n {
            y[a] = x[a] + eps * ((code % 3) as f64 - 1.0);
            code /= 3;
        }
        blocks.iter().any(|b| b.contains_closed(&y))
    })
}

/// Interior of the base cube together with all caps, necks and their
/// mirror images across `x_2 = 1/2`.
pub fn mushroom_build(spec: &MushroomSpec) -> Result<DomainGeometry> {
    let layout = MushroomLayout::place(spec)?;
    let blocks = layout.blocks();
    let smallest = spec.radii.iter().map(|&r| spec.phi.value(r)).fold(f64::INFINITY, f64::min);
    let eps = FACE_EPS * smallest.min(1.0);
    let (lo, hi) = layout.bbox();
    let center = vec![0.5; spec.n];
    Ok(
        DomainGeometry::new("mushroom", lo, hi, move |x| interior_of_union(&blocks, x, eps))
            .with_reference_ball(center, 0.5),
    )
}

/// `u_k` sampled on a grid with its exact gradient magnitude.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub k: usize,
    pub cap_value: f64,
    pub u: GridField,
    pub grad: GridField,
}

/// `u_k = ±F(r_k)` on the cap and its mirror image, 0 on the base and the
/// other mushrooms, linear in `x_2` through the two necks.
pub fn counterexample_field(spec: &MushroomSpec, k: usize, p: f64, mesh: Arc<MaskedGrid>) -> Result<Counterexample> {
    let slot = spec.slot(k)?;
    let layout = MushroomLayout::place(spec)?;
    let r = spec.radii[slot];
    let f = spec.cap_value(r, p);
    let value = |x: &[f64]| match layout.locate(x) {
        Region::Cap { slot: s, mirrored } if s == slot => {
            if mirrored {
                -f
            } else {
                f
            }
        }
        Region::Neck { slot: s, mirrored } if s == slot => {
            if mirrored {
                -f * (-x[1]) / r
            } else {
                f * (x[1] - 1.0) / r
            }
        }
        _ => 0.0,
    };
    let slope = |x: &[f64]| match layout.locate(x) {
        Region::Neck { slot: s, .. } if s == slot => f / r,
        _ => 0.0,
    };
    Ok(Counterexample {
        k,
        cap_value: f,
        u: GridField::from_fn(mesh.clone(), value),
        grad: GridField::from_fn(mesh, slope),
    })
}

/// Verdict of a lower-bound sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileVerdict {
    Diverges,
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceProfile {
    pub k: Vec<usize>,
    pub radius: Vec<f64>,
    pub cap_value: Vec<f64>,
    /// `E_k = 2 r_k^n H(F(r_k))`.
    pub lower_bound: Vec<f64>,
    pub verdict: ProfileVerdict,
}

/// `E_k = 2 r_k^n H(F(r_k))` for the realised mushrooms up to `k_max`;
/// diverging when the second half is increasing and `E_last / E_first > 10`.
pub fn divergence_profile(spec: &MushroomSpec, p: f64, h: &OrliczFunction, k_max: usize) -> Result<DivergenceProfile> {
    let last = spec.slot(k_max)?;
    let nf = spec.n as f64;
    let mut out = DivergenceProfile {
        k: Vec::new(),
        radius: Vec::new(),
        cap_value: Vec::new(),
        lower_bound: Vec::new(),
        verdict: ProfileVerdict::Bounded,
    };
    for (i, &r) in spec.radii[..=last].iter().enumerate() {
        let f = spec.cap_value(r, p);
        out.k.push(spec.first_index + i);
        out.radius.push(r);
        out.cap_value.push(f);
        out.lower_bound.push(2.0 * r.powf(nf) * h.value(f));
    }
    let e = &out.lower_bound;
    let half = e.len() / 2;
    let increasing = e[half..].windows(2).all(|w| w[1] > w[0]);
    if e.len() >= 2 && increasing && e[e.len() - 1] > 10.0 * e[0] {
        out.verdict = ProfileVerdict::Diverges;
    }
    Ok(out)
}

/// `t^n H((t^{p-1} / φ(t)^{n-1})^{1/p})` along `ts`; the divergence
/// hypothesis holds in trend when this grows as `t` decreases.
pub fn limit_trend(h: &OrliczFunction, phi: &PhiKernel, p: f64, n: usize, ts: &[f64]) -> Vec<f64> {
    let nf = n as f64;
    ts.iter()
        .map(|&t| t.powf(nf) * h.value((t.powf(p - 1.0) / phi.value(t).powf(nf - 1.0)).powf(1.0 / p)))
        .collect()
}

/// Data of a φ-John domain; nothing here is verified.
#[derive(Debug, Clone)]
pub struct JohnSpec {
    pub phi: PhiKernel,
    pub c_j: f64,
    pub x0: Vec<f64>,
}

/// CSV rows `cell,x0,x1[,x2],inside` for every grid cell.
pub fn write_mask_csv<W: Write>(mesh: &MaskedGrid, mut w: W) -> std::io::Result<()> {
    let n = mesh.grid.n();
    let axes: Vec<String> = (0..n).map(|a| format!("x{a}")).collect();
    writeln!(w, "cell,{},inside", axes.join(","))?;
    for i in 0..mesh.grid.len() {
        let c = mesh.grid.center(i);
        let coords: Vec<String> = c[..n].iter().map(|v| v.to_string()).collect();
        writeln!(w, "{i},{},{}", coords.join(","), u8::from(mesh.mask[i]))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{domain_average, gradient_magnitude, lp_norm};

    fn spec(count: usize, first: usize) -> MushroomSpec {
        MushroomSpec::geometric(2, PhiKernel::power(1.2).unwrap(), 1.0, 0.5, count, first).unwrap()
    }

    #[test]
    fn membership_examples() {
        let s = spec(3, 3);
        let dom = mushroom_build(&s).unwrap();
        assert!(dom.contains(&[0.5, 0.5]));
        let r = s.radii[0];
        let cap = [r, 1.0 + 2.0 * r];
        assert!(dom.contains(&cap));
        assert!(dom.contains(&[cap[0], 1.0 - cap[1]]));
        // the face between the first two mushrooms
        assert!(!dom.contains(&[2.0 * r + 0.01, 1.0]));
        // on the face under a neck
        assert!(dom.contains(&[r, 1.0]));
        assert!(!dom.contains(&[r, 1.0 + 3.0 * r + 1e-6]));
    }

    #[test]
    fn membership_is_mirror_symmetric() {
        let s = spec(3, 3);
        let dom = mushroom_build(&s).unwrap();
        let (lo, hi) = dom.bbox.clone();
        for i in 0..60 {
            for j in 0..60 {
                let x = lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.37) / 60.0;
                let y = lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.61) / 60.0;
                assert_eq!(dom.contains(&[x, y]), dom.contains(&[x, 1.0 - y]));
            }
        }
    }

    #[test]
    fn placement_overflow_reports_capacity() {
        let s = spec(4, 1);
        match MushroomLayout::place(&s) {
            Err(Error::PlacementOverflow { requested, max_feasible }) => {
                assert_eq!(requested, 4);
                assert_eq!(max_feasible, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cap_value_identity_case() {
        let s = MushroomSpec::geometric(2, PhiKernel::identity(), 1.0, 0.5, 5, 1).unwrap();
        for k in 1..=5 {
            let f = s.cap_value(s.radius(k).unwrap(), 1.0);
            assert!((f - 2f64.powi(k as i32 - 1)).abs() < 1e-12 * f);
        }
    }

    #[test]
    fn counterexample_average_and_gradient() {
        let s = spec(1, 3);
        let dom = mushroom_build(&s).unwrap();
        let mesh = MaskedGrid::discretize(&dom, &[256, 256]).unwrap();
        let c = counterexample_field(&s, 3, 1.0, mesh).unwrap();
        assert!(domain_average(&c.u).abs() < 1e-12);
        let exact = lp_norm(&c.grad, 1.0).unwrap();
        let fd = lp_norm(&gradient_magnitude(&c.u), 1.0).unwrap();
        assert!((exact - 1.0).abs() < 0.08, "{exact}");
        assert!((fd - 1.0).abs() < 0.08, "{fd}");
    }

    #[test]
    fn profile_ratio_and_verdicts() {
        let s = spec(30, 1);
        let p = divergence_profile(&s, 1.0, &OrliczFunction::power(2.0), 30).unwrap();
        for w in p.lower_bound.windows(2) {
            assert!((w[1] / w[0] - 2f64.powf(0.4)).abs() < 1e-9);
        }
        assert_eq!(p.verdict, ProfileVerdict::Diverges);
        let p = divergence_profile(&s, 1.0, &OrliczFunction::power(1.5), 30).unwrap();
        assert_eq!(p.verdict, ProfileVerdict::Bounded);
    }

    #[test]
    fn spec_invariants() {
        assert!(MushroomSpec::geometric(2, PhiKernel::power(1.2).unwrap(), 1.0, 2.0, 3, 1).is_err());
        let wide = PhiKernel::power_over_log(0.5, 0.0).unwrap();
        assert!(MushroomSpec::geometric(2, wide, 1.0, 0.5, 3, 2).is_err());
    }
}
