//! Uniform grids over bounding boxes, domain masks, scalar fields sampled at
//! cell centers, finite-difference gradients and midpoint-rule integrals.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::orlicz::{luxemburg_norm, OrliczFunction};
use crate::scan::compensated_sum;

/// Smallest admissible cell count per axis for [`MaskedGrid::discretize`].
pub const MIN_RES: usize = 8;

/// Uniform lattice of `res[a]` cells along each axis of a box in 2 or 3
/// dimensions. Cells are indexed with axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    n: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    res: Vec<usize>,
    spacing: Vec<f64>,
    cellvol: f64,
}

impl Grid {
    pub fn new(lo: &[f64], hi: &[f64], res: &[usize]) -> Result<Self> {
        let n = lo.len();
        if !(n == 2 || n == 3) || hi.len() != n || res.len() != n {
            return Err(Error::InvalidParameter(format!(
                "grid needs matching 2- or 3-dimensional bounds, got {} / {} / {}",
                lo.len(),
                hi.len(),
                res.len()
            )));
        }
        let mut spacing = Vec::with_capacity(n);
        for a in 0..n {
            let h = (hi[a] - lo[a]) / res[a] as f64;
            if res[a] == 0 || !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "axis {a}: bounds [{}, {}] with {} cells",
                    lo[a], hi[a], res[a]
                )));
            }
            spacing.push(h);
        }
        let cellvol = spacing.iter().product();
        Ok(Self {
            n,
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            res: res.to_vec(),
            spacing,
            cellvol,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn res(&self) -> &[usize] {
        &self.res
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn cellvol(&self) -> f64 {
        self.cellvol
    }

    pub fn len(&self) -> usize {
        self.res.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Length of the bounding-box diagonal.
    pub fn diameter(&self) -> f64 {
        (0..self.n).map(|a| (self.hi[a] - self.lo[a]).powi(2)).sum::<f64>().sqrt()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.res[..axis].iter().product()
    }

    /// Per-axis cell indices of a linear index; unused axes are 0.
    #[inline]
    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for (a, slot) in out.iter_mut().enumerate().take(self.n) {
            *slot = idx % self.res[a];
            idx /= self.res[a];
        }
        out
    }

    #[inline]
    pub fn linear_index(&self, m: [usize; 3]) -> usize {
        let mut idx = 0;
        for a in (0..self.n).rev() {
            idx = idx * self.res[a] + m[a];
        }
        idx
    }

    /// Cell-center coordinates; unused axes are 0.
    #[inline]
    pub fn center(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let mut x = [0.0; 3];
        for a in 0..self.n {
            x[a] = self.lo[a] + (m[a] as f64 + 0.5) * self.spacing[a];
        }
        x
    }

    /// Cell containing `x` (half-open cells; the upper face belongs to the
    /// last cell), or `None` outside the box.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let mut m = [0; 3];
        for a in 0..self.n {
            let s = (x[a] - self.lo[a]) / self.spacing[a];
            if !(s >= 0.0 && x[a] <= self.hi[a]) {
                return None;
            }
            m[a] = (s.floor() as usize).min(self.res[a] - 1);
        }
        Some(self.linear_index(m))
    }
}

pub(crate) fn point3(x: &[f64]) -> [f64; 3] {
    let mut p = [0.0; 3];
    p[..x.len()].copy_from_slice(x);
    p
}

#[inline]
pub(crate) fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    d0 * d0 + d1 * d1 + d2 * d2
}

/// Ball `B(center, radius)` inside a domain, used as the averaging ball in
/// the integral representation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// An open set given by a membership predicate inside a bounding box.
#[derive(Clone)]
pub struct DomainGeometry {
    pub label: String,
    pub bbox: (Vec<f64>, Vec<f64>),
    pub reference_ball: Option<ReferenceBall>,
    inside: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
}

impl fmt::Debug for DomainGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainGeometry")
            .field("label", &self.label)
            .field("bbox", &self.bbox)
            .field("reference_ball", &self.reference_ball)
            .finish()
    }
}

impl DomainGeometry {
    pub fn new(
        label: impl Into<String>,
        lo: Vec<f64>,
        hi: Vec<f64>,
        inside: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            bbox: (lo, hi),
            reference_ball: None,
            inside: Arc::new(inside),
        }
    }

    pub fn with_reference_ball(mut self, center: Vec<f64>, radius: f64) -> Self {
        self.reference_ball = Some(ReferenceBall { center, radius });
        self
    }

    pub fn n(&self) -> usize {
        self.bbox.0.len()
    }

    /// Open box `(lo, hi)`; the reference ball is the inscribed ball.
    pub fn open_box(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let radius = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (b - a)).fold(f64::INFINITY, f64::min);
        let (l, h) = (lo.clone(), hi.clone());
        Self::new("box", lo, hi, move |x| {
            x.iter().zip(l.iter().zip(&h)).all(|(&v, (&a, &b))| v > a && v < b)
        })
        .with_reference_ball(center, radius)
    }

    /// Open cube `(lo, hi)^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        let mut d = Self::open_box(vec![lo; n], vec![hi; n]);
        d.label = "cube".into();
        d
    }

    /// Open ball with its tight bounding box.
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        let lo: Vec<f64> = center.iter().map(|c| c - radius).collect();
        let hi: Vec<f64> = center.iter().map(|c| c + radius).collect();
        let c = center.clone();
        let r2 = radius * radius;
        Self::new("ball", lo, hi, move |x| {
            x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>() < r2
        })
        .with_reference_ball(center, radius)
    }

    /// Same predicate, larger bounding box.
    pub fn with_bbox(mut self, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        self.bbox = (lo, hi);
        self
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (lo, hi) = &self.bbox;
        x.iter().zip(lo.iter().zip(hi)).all(|(&v, (&a, &b))| v >= a && v <= b) && (self.inside)(x)
    }

    /// Sampled check that the reference ball lies inside the domain.
    pub fn reference_ball_inside(&self, samples_per_axis: usize) -> bool {
        let Some(ball) = &self.reference_ball else {
            return true;
        };
        let n = self.n();
        let k = samples_per_axis.max(2);
        let total = k.pow(n as u32);
        (0..total).all(|mut idx| {
            let mut x = vec![0.0; n];
            for (a, xa) in x.iter_mut().enumerate() {
                let s = (idx % k) as f64 / (k - 1) as f64 * 2.0 - 1.0;
                idx /= k;
                *xa = ball.center[a] + 0.999 * ball.radius * s / (n as f64).sqrt();
            }
            self.contains(&x)
        })
    }
}

/// Grid plus the per-cell domain mask.
#[derive(Debug, Clone)]
pub struct MaskedGrid {
    pub label: String,
    pub grid: Grid,
    pub mask: Vec<bool>,
    pub reference_ball: Option<ReferenceBall>,
    masked: Vec<usize>,
}

impl MaskedGrid {
    /// Grid over the domain's bounding box; a cell is masked iff its center
    /// lies in the domain.
    pub fn discretize(dom: &DomainGeometry, res: &[usize]) -> Result<Arc<Self>> {
        if res.len() != dom.n() {
            return Err(Error::InvalidParameter(format!(
                "resolution has {} axes, domain has {}",
                res.len(),
                dom.n()
            )));
        }
        if let Some(&r) = res.iter().find(|&&r| r < MIN_RES) {
            return Err(Error::Resolution(format!("need at least {MIN_RES} cells per axis, got {r}")));
        }
        let grid = Grid::new(&dom.bbox.0, &dom.bbox.1, res)?;
        let n = grid.n();
        let mask: Vec<bool> = (0..grid.len()).map(|i| dom.contains(&grid.center(i)[..n])).collect();
        let mesh = Self::from_mask(dom.label.clone(), grid, mask)?;
        Ok(Arc::new(Self {
            reference_ball: dom.reference_ball.clone(),
            ..mesh
        }))
    }

    pub fn from_mask(label: String, grid: Grid, mask: Vec<bool>) -> Result<Self> {
        let masked: Vec<usize> = (0..grid.len()).filter(|&i| mask[i]).collect();
        if masked.is_empty() {
            return Err(Error::EmptyMask);
        }
        Ok(Self {
            label,
            grid,
            mask,
            reference_ball: None,
            masked,
        })
    }

    /// Masked cell indices in lexicographic order.
    pub fn masked(&self) -> &[usize] {
        &self.masked
    }

    pub fn masked_count(&self) -> usize {
        self.masked.len()
    }

    pub fn volume(&self) -> f64 {
        self.masked.len() as f64 * self.grid.cellvol()
    }
}

/// Scalar field on the cells of a masked grid; off-mask values are zero and
/// ignored by every integral.
#[derive(Debug, Clone)]
pub struct GridField {
    mesh: Arc<MaskedGrid>,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(mesh: Arc<MaskedGrid>) -> Self {
        let values = vec![0.0; mesh.grid.len()];
        Self { mesh, values }
    }

    pub fn constant(mesh: Arc<MaskedGrid>, c: f64) -> Self {
        Self::from_fn(mesh, |_| c)
    }

    /// Samples `f` at masked cell centers.
    pub fn from_fn(mesh: Arc<MaskedGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut out = Self::zeros(mesh);
        let n = out.mesh.grid.n();
        for k in 0..out.mesh.masked.len() {
            let i = out.mesh.masked[k];
            out.values[i] = f(&out.mesh.grid.center(i)[..n]);
        }
        out
    }

    /// Full-length value vector; entries off the mask are zeroed.
    pub fn from_values(mesh: Arc<MaskedGrid>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                mesh.grid.len(),
                values.len()
            )));
        }
        for (v, &m) in values.iter_mut().zip(&mesh.mask) {
            if !m {
                *v = 0.0;
            }
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &Arc<MaskedGrid> {
        &self.mesh
    }

    pub fn grid(&self) -> &Grid {
        &self.mesh.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn masked_values(&self) -> Vec<f64> {
        self.mesh.masked.iter().map(|&i| self.values[i]).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for &i in &self.mesh.masked {
            out.values[i] = f(self.values[i]);
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.mesh.masked.iter().map(|&i| self.values[i].abs()).fold(0.0, f64::max)
    }

    /// CSV rows `cell,x0,x1[,x2],value` over masked cells.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.grid().n();
        let axes: Vec<String> = (0..n).map(|a| format!("x{a}")).collect();
        writeln!(w, "cell,{},value", axes.join(","))?;
        for &i in &self.mesh.masked {
            let c = self.grid().center(i);
            let coords: Vec<String> = c[..n].iter().map(|v| v.to_string()).collect();
            writeln!(w, "{i},{},{}", coords.join(","), self.values[i])?;
        }
        Ok(())
    }
}

/// Per-cell Euclidean norm of the finite-difference gradient. Central
/// differences where both neighbours are masked, second-order one-sided
/// differences at mask boundaries, first-order when only one neighbour
/// exists.
pub fn gradient_magnitude(u: &GridField) -> GridField {
    let grid = u.grid();
    let mask = &u.mesh.mask;
    let n = grid.n();
    let v = &u.values;
    let mut out = GridField::zeros(u.mesh.clone());
    for &i in u.mesh.masked() {
        let m = grid.multi_index(i);
        let mut g2 = 0.0;
        for a in 0..n {
            let s = grid.stride(a);
            let h = grid.spacing()[a];
            let at = |k: isize| -> Option<f64> {
                let pos = m[a] as isize + k;
                if pos < 0 || pos >= grid.res()[a] as isize {
                    return None;
                }
                let j = (i as isize + k * s as isize) as usize;
                mask[j].then(|| v[j])
            };
            let (minus, plus) = (at(-1), at(1));
            let d = match (minus, plus) {
                (Some(l), Some(r)) => (r - l) / (2.0 * h),
                (None, Some(r)) => match at(2) {
                    Some(r2) => (-3.0 * v[i] + 4.0 * r - r2) / (2.0 * h),
                    None => (r - v[i]) / h,
                },
                (Some(l), None) => match at(-2) {
                    Some(l2) => (3.0 * v[i] - 4.0 * l + l2) / (2.0 * h),
                    None => (v[i] - l) / h,
                },
                (None, None) => 0.0,
            };
            g2 += d * d;
        }
        out.values[i] = g2.sqrt();
    }
    out
}

/// `(Σ |u|^p cellvol)^{1/p}` over masked cells.
pub fn lp_norm(u: &GridField, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("lp_norm needs finite p >= 1, got {p}")));
    }
    let mut acc = 0.0;
    for &i in u.mesh.masked() {
        acc += u.values[i].abs().powf(p);
    }
    Ok((acc * u.grid().cellvol()).powf(1.0 / p))
}

/// Luxemburg norm for `H(t) = t log(e + t)`.
pub fn llogl_norm(u: &GridField) -> Result<f64> {
    Ok(luxemburg_norm(u, &OrliczFunction::llogl())?.value)
}

/// Mean of `values[i]` over `cells`, accumulated as offsets from the first
/// value so that constant data averages to itself exactly.
pub(crate) fn shifted_mean(values: &[f64], cells: impl Iterator<Item = usize>) -> Option<f64> {
    let mut cells = cells.peekable();
    let reference = values[*cells.peek()?];
    let mut count = 0usize;
    let sum = compensated_sum(cells.map(|i| {
        count += 1;
        values[i] - reference
    }));
    Some(reference + sum / count as f64)
}

/// Mean over masked cells.
pub fn domain_average(u: &GridField) -> f64 {
    shifted_mean(&u.values, u.mesh.masked().iter().copied()).unwrap_or(0.0)
}

/// Mean over masked cells with centers in the open ball `B(x, r)`.
pub fn ball_average(u: &GridField, x: &[f64], r: f64) -> Result<f64> {
    let grid = u.grid();
    let xc = point3(x);
    let r2 = r * r;
    let inside = u.mesh.masked().iter().copied().filter(|&i| dist2(&grid.center(i), &xc) < r2);
    shifted_mean(&u.values, inside).ok_or_else(|| Error::EmptyBall {
        center: x.to_vec(),
        radius: r,
    })
}
