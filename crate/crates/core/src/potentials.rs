//! Discrete modified Riesz potential, the centred Hardy-Littlewood maximal
//! operator and the near/far splitting checks built on them.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{dist2, point3, Grid, GridField};
use crate::kernels::PhiKernel;
use crate::scan::ScalarFn;

/// Relative slack on the closed-ball test `|x-y|^2 <= r^2`.
pub const BALL_SLACK: f64 = 1e-9;
/// Largest `targets x sources` product summed directly under
/// [`Summation::Auto`].
pub const DIRECT_BUDGET: f64 = 5e7;

/// Treatment of the cell containing the evaluation point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularRule {
    /// Drop the self cell.
    #[default]
    ExcludeSelfCell,
    /// Weight the self cell with `φ(h/2)^{1-n}`.
    CapAtHalfCell,
}

/// How field-wide potentials are summed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summation {
    /// Pairwise sums in lexicographic source order.
    Direct,
    /// Zero-padded FFT convolution with the same kernel table.
    Fft,
    /// Direct below [`DIRECT_BUDGET`], FFT above.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialOptions {
    pub singular_rule: SingularRule,
    /// Radii for the maximal function; dyadic from the cell spacing to the
    /// bounding-box diameter when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    pub summation: Summation,
}

impl PotentialOptions {
    pub fn with_rule(mut self, rule: SingularRule) -> Self {
        self.singular_rule = rule;
        self
    }

    pub fn with_summation(mut self, summation: Summation) -> Self {
        self.summation = summation;
        self
    }

    /// The radius list for `grid`, validated.
    pub fn radii_for(&self, grid: &Grid) -> Result<Vec<f64>> {
        let Some(radii) = &self.radii else {
            return Ok(default_radii(grid));
        };
        let h = grid.min_spacing();
        let diam = grid.diameter();
        let ok = !radii.is_empty()
            && radii.windows(2).all(|w| w[0] < w[1])
            && radii[0] >= h * (1.0 - 1e-12)
            && radii[radii.len() - 1] >= diam * (1.0 - 1e-12);
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "radii must increase strictly from at least {h} to at least {diam}"
            )));
        }
        Ok(radii.clone())
    }
}

/// `{h, 2h, 4h, ...}` below the bounding-box diameter, then the diameter.
pub fn default_radii(grid: &Grid) -> Vec<f64> {
    let diam = grid.diameter();
    let mut r = grid.min_spacing();
    let mut out = Vec::new();
    while r < diam {
        out.push(r);
        r *= 2.0;
    }
    out.push(diam);
    out
}

fn self_weight(phi: &PhiKernel, grid: &Grid, rule: SingularRule) -> f64 {
    match rule {
        SingularRule::ExcludeSelfCell => 0.0,
        SingularRule::CapAtHalfCell => phi.kernel(0.5 * grid.min_spacing(), grid.n()),
    }
}

fn kernel_at(phi: &PhiKernel, d: f64, n: usize) -> Result<f64> {
    let k = phi.kernel(d, n);
    if k.is_finite() {
        Ok(k)
    } else {
        Err(Error::ZeroAtPositive { what: "phi", at: d })
    }
}

/// Near (`|x-y| < radius`, plus the self cell) and far parts of the
/// potential at `x`.
pub fn riesz_split(f: &GridField, phi: &PhiKernel, x: &[f64], radius: f64, opts: &PotentialOptions) -> Result<(f64, f64)> {
    let grid = f.grid();
    let n = grid.n();
    let xc = point3(x);
    let own = grid.cell_of(x);
    let vals = f.values();
    let (mut near, mut far) = (0.0, 0.0);
    for &j in f.mesh().masked() {
        let v = vals[j].abs();
        if v == 0.0 || Some(j) == own {
            continue;
        }
        let d = dist2(&grid.center(j), &xc).sqrt();
        let w = v * kernel_at(phi, d, n)?;
        if d < radius {
            near += w;
        } else {
            far += w;
        }
    }
    if let Some(j) = own {
        if f.mesh().mask[j] {
            near += vals[j].abs() * self_weight(phi, grid, opts.singular_rule);
        }
    }
    Ok((near * grid.cellvol(), far * grid.cellvol()))
}

/// `Σ |f(y)| φ(|x-y|)^{1-n} cellvol` over masked cells, with the cell
/// containing `x` handled by the singular rule.
pub fn riesz_potential(f: &GridField, phi: &PhiKernel, x: &[f64], opts: &PotentialOptions) -> Result<f64> {
    let (near, far) = riesz_split(f, phi, x, 0.0, opts)?;
    Ok(near + far)
}

/// Kernel values indexed by per-axis absolute cell offsets; the zero offset
/// holds the self-cell weight.
fn offset_table(phi: &PhiKernel, grid: &Grid, rule: SingularRule) -> Result<Vec<f64>> {
    let n = grid.n();
    let h = grid.spacing();
    let mut table = vec![0.0; grid.len()];
    for (idx, slot) in table.iter_mut().enumerate() {
        let m = grid.multi_index(idx);
        if idx == 0 {
            *slot = self_weight(phi, grid, rule);
            continue;
        }
        let d2: f64 = (0..n).map(|a| (m[a] as f64 * h[a]).powi(2)).sum();
        *slot = kernel_at(phi, d2.sqrt(), n)?;
    }
    Ok(table)
}

/// Potential at every masked cell center; off-mask entries are zero.
pub fn riesz_potential_field(f: &GridField, phi: &PhiKernel, opts: &PotentialOptions) -> Result<GridField> {
    let grid = f.grid();
    let mesh = f.mesh();
    let sources: Vec<(usize, f64)> = mesh
        .masked()
        .iter()
        .map(|&j| (j, f.values()[j].abs()))
        .filter(|&(_, v)| v != 0.0)
        .collect();
    let mut out = GridField::zeros(mesh.clone());
    if sources.is_empty() {
        return Ok(out);
    }
    let table = offset_table(phi, grid, opts.singular_rule)?;
    let direct = match opts.summation {
        Summation::Direct => true,
        Summation::Fft => false,
        Summation::Auto => (mesh.masked_count() as f64) * (sources.len() as f64) <= DIRECT_BUDGET,
    };
    let values = if direct {
        direct_sum(grid, mesh.masked(), &sources, &table)
    } else {
        fft_sum(grid, &sources, &table)
    };
    let cv = grid.cellvol();
    let vals = out.values_mut();
    for &i in mesh.masked() {
        vals[i] = values[i] * cv;
    }
    Ok(out)
}

fn direct_sum(grid: &Grid, targets: &[usize], sources: &[(usize, f64)], table: &[f64]) -> Vec<f64> {
    let res = grid.res();
    let n = grid.n();
    let s1 = res[0];
    let s2 = if n == 3 { res[0] * res[1] } else { 0 };
    let src: Vec<([usize; 3], f64)> = sources.iter().map(|&(j, v)| (grid.multi_index(j), v)).collect();
    let mut out = vec![0.0; grid.len()];
    for &i in targets {
        let m = grid.multi_index(i);
        let mut acc = 0.0;
        for (mj, v) in &src {
            let k = m[0].abs_diff(mj[0]) + s1 * m[1].abs_diff(mj[1]) + s2 * m[2].abs_diff(mj[2]);
            acc += v * table[k];
        }
        out[i] = acc;
    }
    out
}

fn fft_sum(grid: &Grid, sources: &[(usize, f64)], table: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let res = grid.res();
    let mut dims = [1usize; 3];
    for a in 0..n {
        dims[a] = 2 * res[a];
    }
    let total = dims[0] * dims[1] * dims[2];
    let pidx = |m: [usize; 3]| m[0] + dims[0] * (m[1] + dims[1] * m[2]);

    let mut kern = vec![Complex64::new(0.0, 0.0); total];
    for (p, slot) in kern.iter_mut().enumerate() {
        let pm = [p % dims[0], (p / dims[0]) % dims[1], p / (dims[0] * dims[1])];
        let mut off = [0usize; 3];
        let mut valid = true;
        for a in 0..n {
            let r = res[a];
            off[a] = match pm[a] {
                i if i < r => i,
                i if i > r => 2 * r - i,
                _ => {
                    valid = false;
                    0
                }
            };
        }
        if valid {
            *slot = Complex64::new(table[grid.linear_index(off)], 0.0);
        }
    }
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    for &(j, v) in sources {
        data[pidx(grid.multi_index(j))] = Complex64::new(v, 0.0);
    }
    let mut planner = FftPlanner::new();
    fft_nd(&mut planner, &mut kern, dims, false);
    fft_nd(&mut planner, &mut data, dims, false);
    for (d, k) in data.iter_mut().zip(&kern) {
        *d *= k;
    }
    fft_nd(&mut planner, &mut data, dims, true);
    let scale = 1.0 / total as f64;
    (0..grid.len())
        .map(|i| (data[pidx(grid.multi_index(i))].re * scale).max(0.0))
        .collect()
}

fn fft_nd(planner: &mut FftPlanner<f64>, data: &mut [Complex64], dims: [usize; 3], inverse: bool) {
    let mut stride = 1;
    for &len in &dims {
        if len > 1 {
            let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
            if stride == 1 {
                fft.process(data);
            } else {
                let mut line = vec![Complex64::new(0.0, 0.0); len];
                let block = len * stride;
                for outer in 0..data.len() / block {
                    for s in 0..stride {
                        let base = outer * block + s;
                        for (k, slot) in line.iter_mut().enumerate() {
                            *slot = data[base + k * stride];
                        }
                        fft.process(&mut line);
                        for (k, v) in line.iter().enumerate() {
                            data[base + k * stride] = *v;
                        }
                    }
                }
            }
        }
        stride *= len;
    }
}

#[inline]
fn in_ball(d2: f64, r: f64) -> bool {
    d2 <= r * r * (1.0 + BALL_SLACK)
}

/// Reference value subtracted before summing so constant fields average
/// back to themselves exactly.
fn reference_value(f: &GridField) -> f64 {
    f.mesh().masked().first().map_or(0.0, |&i| f.values()[i].abs())
}

/// Max over the radius list of the mean of `|f|` over masked cells with
/// centers in the closed ball `B(x, r)`. Radii whose ball holds no masked
/// cell center are skipped.
pub fn maximal_function(f: &GridField, x: &[f64], opts: &PotentialOptions) -> Result<f64> {
    let grid = f.grid();
    let radii = opts.radii_for(grid)?;
    let xc = point3(x);
    let vals = f.values();
    let reference = reference_value(f);
    let masked = f.mesh().masked();
    let d2s: Vec<f64> = masked.iter().map(|&j| dist2(&grid.center(j), &xc)).collect();
    let mut best = 0.0f64;
    for r in radii {
        let (mut sum, mut count) = (0.0, 0usize);
        for (&j, &d2) in masked.iter().zip(&d2s) {
            if in_ball(d2, r) {
                // shifting by a common reference keeps constant fields exact
                sum += vals[j].abs() - reference;
                count += 1;
            }
        }
        if count > 0 {
            best = best.max(reference + sum / count as f64);
        }
    }
    Ok(best)
}

/// Maximal function at every masked cell center, using per-row prefix
/// sums along axis 0.
pub fn maximal_function_field(f: &GridField, opts: &PotentialOptions) -> Result<GridField> {
    let grid = f.grid();
    let radii = opts.radii_for(grid)?;
    let n = grid.n();
    let res = grid.res();
    let h = grid.spacing();
    let (r0, r1, r2) = (res[0], res[1], if n == 3 { res[2] } else { 1 });
    let (h1, h2) = (h[1], if n == 3 { h[2] } else { 0.0 });
    let vals = f.values();
    let mask = &f.mesh().mask;
    let reference = reference_value(f);

    let rows = r1 * r2;
    let mut prefix = vec![0.0; rows * (r0 + 1)];
    let mut counts = vec![0usize; rows * (r0 + 1)];
    for row in 0..rows {
        let base = row * (r0 + 1);
        for i in 0..r0 {
            let inside = mask[row * r0 + i];
            let v = if inside { vals[row * r0 + i].abs() - reference } else { 0.0 };
            prefix[base + i + 1] = prefix[base + i] + v;
            counts[base + i + 1] = counts[base + i] + usize::from(inside);
        }
    }

    // per radius: row offsets with the half-width of the ball along axis 0
    let shapes: Vec<Vec<(isize, isize, usize)>> = radii
        .iter()
        .map(|&r| {
            let lim = r * r * (1.0 + BALL_SLACK);
            let k1 = (r / h1).floor() as isize + 1;
            let k2 = if n == 3 { (r / h2).floor() as isize + 1 } else { 0 };
            let mut shape = Vec::new();
            for d2 in -k2..=k2 {
                for d1 in -k1..=k1 {
                    let rem = lim - (d1 as f64 * h1).powi(2) - (d2 as f64 * h2).powi(2);
                    if rem < 0.0 {
                        continue;
                    }
                    let mut w = (rem.sqrt() / h[0]).floor() as usize;
                    while ((w + 1) as f64 * h[0]).powi(2) <= rem {
                        w += 1;
                    }
                    while w > 0 && (w as f64 * h[0]).powi(2) > rem {
                        w -= 1;
                    }
                    shape.push((d1, d2, w));
                }
            }
            shape
        })
        .collect();

    let mut out = GridField::zeros(f.mesh().clone());
    let ov = out.values_mut();
    for &i in f.mesh().masked() {
        let m = grid.multi_index(i);
        let mut best = 0.0f64;
        for shape in &shapes {
            let (mut sum, mut count) = (0.0, 0usize);
            for &(d1, d2, w) in shape {
                let y1 = m[1] as isize + d1;
                let y2 = m[2] as isize + d2;
                if y1 < 0 || y1 >= r1 as isize || y2 < 0 || y2 >= r2 as isize {
                    continue;
                }
                let row = y1 as usize + r1 * y2 as usize;
                let lo = m[0].saturating_sub(w);
                let hi = (m[0] + w).min(r0 - 1);
                let base = row * (r0 + 1);
                sum += prefix[base + hi + 1] - prefix[base + lo];
                count += counts[base + hi + 1] - counts[base + lo];
            }
            best = best.max(reference + sum / count as f64);
        }
        ov[i] = best;
    }
    Ok(out)
}

/// Sup of a ratio over sample points, with the points that were skipped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCheck {
    /// `None` when no sample point was admissible.
    pub constant: Option<f64>,
    /// Per-point ratio, `None` where the point was skipped.
    pub ratios: Vec<Option<f64>>,
    pub admissible: usize,
}

impl PointCheck {
    fn from_ratios(ratios: Vec<Option<f64>>) -> Self {
        let admissible = ratios.iter().flatten().count();
        let constant = ratios.iter().flatten().copied().reduce(f64::max);
        Self {
            constant,
            ratios,
            admissible,
        }
    }

    pub fn is_vacuous(&self) -> bool {
        self.admissible == 0
    }
}

/// Sup over `points` of `∫_{B(x,δ)} |f| φ(|x-y|)^{1-n} dy / (h(δ) Mf(x))`,
/// skipping points with `Mf(x) = 0`.
pub fn annulus_bound_check(
    f: &GridField,
    phi: &PhiKernel,
    h: &ScalarFn,
    delta: f64,
    points: &[Vec<f64>],
    opts: &PotentialOptions,
) -> Result<PointCheck> {
    let hd = h.eval(delta);
    let mut ratios = Vec::with_capacity(points.len());
    for x in points {
        let mf = maximal_function(f, x, opts)?;
        if mf == 0.0 {
            ratios.push(None);
            continue;
        }
        let (near, _) = riesz_split(f, phi, x, delta, opts)?;
        ratios.push(Some(near / (hd * mf)));
    }
    Ok(PointCheck::from_ratios(ratios))
}

/// Sup over `points` of `∫_{|x-y| >= δ} |f| φ(|x-y|)^{1-n} dy` divided by
/// `φ(δ)^{1-n} δ^{n(1-1/p)}`; requires `‖f‖_p <= 1`.
pub fn tail_bound_check(
    f: &GridField,
    phi: &PhiKernel,
    p: f64,
    delta: f64,
    points: &[Vec<f64>],
    opts: &PotentialOptions,
) -> Result<PointCheck> {
    let norm = crate::fields::lp_norm(f, p)?;
    if norm > 1.0 + 1e-9 {
        return Err(Error::InvalidParameter(format!("tail check needs ||f||_p <= 1, got {norm}")));
    }
    let n = f.grid().n() as f64;
    let scale = phi.kernel(delta, f.grid().n()) * delta.powf(n * (1.0 - 1.0 / p));
    let mut ratios = Vec::with_capacity(points.len());
    for x in points {
        let (_, far) = riesz_split(f, phi, x, delta, opts)?;
        ratios.push(Some(far / scale));
    }
    Ok(PointCheck::from_ratios(ratios))
}
