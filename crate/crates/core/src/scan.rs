//! Log-spaced sweeps and sup-ratio estimation shared by the Orlicz and kernel
//! condition checks.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

/// Ratio between the sup over an extreme decade and the sup over the
/// neighbouring decade above which a sweep is flagged as unbounded.
pub const DECADE_GROWTH_LIMIT: f64 = 1.5;

/// A named scalar map `t -> f(t)` used for user-supplied H, φ, h and δ.
#[derive(Clone)]
pub struct ScalarFn {
    label: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl ScalarFn {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({})", self.label)
    }
}

/// Log-spaced grid `10^lo_exp ..= 10^hi_exp` with a fixed number of points
/// per decade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogGrid {
    pub lo_exp: i32,
    pub hi_exp: i32,
    pub per_decade: usize,
}

impl Default for LogGrid {
    /// 97 points over `[1e-8, 1e8]`.
    fn default() -> Self {
        Self::new(-8, 8, 6)
    }
}

impl LogGrid {
    pub fn new(lo_exp: i32, hi_exp: i32, per_decade: usize) -> Self {
        assert!(hi_exp > lo_exp, "empty log grid");
        assert!(per_decade > 0);
        Self {
            lo_exp,
            hi_exp,
            per_decade,
        }
    }

    pub fn len(&self) -> usize {
        (self.hi_exp - self.lo_exp) as usize * self.per_decade + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn decades(&self) -> usize {
        (self.hi_exp - self.lo_exp) as usize
    }

    pub fn lo(&self) -> f64 {
        10f64.powi(self.lo_exp)
    }

    pub fn hi(&self) -> f64 {
        10f64.powi(self.hi_exp)
    }

    pub fn points(&self) -> Vec<f64> {
        let step = 1.0 / self.per_decade as f64;
        (0..self.len())
            .map(|i| {
                if i % self.per_decade == 0 {
                    // exact powers of ten at decade boundaries
                    10f64.powi(self.lo_exp + (i / self.per_decade) as i32)
                } else {
                    10f64.powf(self.lo_exp as f64 + i as f64 * step)
                }
            })
            .collect()
    }

    pub fn extended_low(&self) -> Self {
        Self::new(self.lo_exp - 1, self.hi_exp, self.per_decade)
    }

    pub fn extended_high(&self) -> Self {
        Self::new(self.lo_exp, self.hi_exp + 1, self.per_decade)
    }
}

/// Result of a sup-ratio sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupEstimate {
    /// Sup over the sweep; `f64::INFINITY` when some ratio overflowed.
    pub value: f64,
    /// Point (or first point of the pair) where the sup was attained.
    pub argmax: f64,
    /// The sup was still growing at an extreme decade of the sweep.
    pub unbounded: bool,
    /// Growth factor used for the unbounded decision.
    pub decade_growth: f64,
}

impl SupEstimate {
    pub fn exact(value: f64, argmax: f64) -> Self {
        Self {
            value,
            argmax,
            unbounded: false,
            decade_growth: 1.0,
        }
    }

    pub fn bounded_value(&self) -> Option<f64> {
        (!self.unbounded && self.value.is_finite()).then_some(self.value)
    }
}

fn max_with_arg(points: &[f64], values: &[f64]) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for (&t, &v) in points.iter().zip(values) {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > best.0 {
            best = (v, t);
        }
    }
    best
}

/// Sup of pointwise ratios `values[i]` over `points`, flagged unbounded when
/// the sup over the top decade exceeds the sup over the preceding decade by
/// more than [`DECADE_GROWTH_LIMIT`].
pub(crate) fn pointwise_sup(grid: &LogGrid, points: &[f64], values: &[f64]) -> SupEstimate {
    let (value, argmax) = max_with_arg(points, values);
    let pd = grid.per_decade;
    let n = points.len();
    let growth = if grid.decades() >= 2 {
        let top = max_with_arg(&points[n - 1 - pd..], &values[n - 1 - pd..]).0;
        let prev = max_with_arg(&points[n - 1 - 2 * pd..n - pd], &values[n - 1 - 2 * pd..n - pd]).0;
        growth_ratio(top, prev)
    } else {
        1.0
    };
    SupEstimate {
        value,
        argmax,
        unbounded: !value.is_finite() || growth > DECADE_GROWTH_LIMIT,
        decade_growth: growth,
    }
}

fn growth_ratio(outer: f64, inner: f64) -> f64 {
    if !outer.is_finite() {
        f64::INFINITY
    } else if inner <= 0.0 {
        1.0
    } else {
        outer / inner
    }
}

/// `sup_{i <= j} g[i] / g[j]` in one backward pass with a running minimum.
/// Returns `(sup, index of i)`.
pub(crate) fn ordered_pair_sup(g: &[f64]) -> (f64, usize) {
    let mut running_min = f64::INFINITY;
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, &gi) in g.iter().enumerate().rev() {
        running_min = running_min.min(gi);
        let r = gi / running_min;
        if r > best.0 {
            best = (r, i);
        }
    }
    best
}

/// Pair sup over `t1 <= t2`, flagged unbounded when dropping either extreme
/// decade shrinks the sup by more than [`DECADE_GROWTH_LIMIT`].
pub(crate) fn pair_sup(grid: &LogGrid, points: &[f64], g: &[f64]) -> SupEstimate {
    let (value, i) = ordered_pair_sup(g);
    let pd = grid.per_decade;
    let growth = if grid.decades() >= 2 {
        let no_bottom = ordered_pair_sup(&g[pd..]).0;
        let no_top = ordered_pair_sup(&g[..g.len() - pd]).0;
        growth_ratio(value, no_bottom).max(growth_ratio(value, no_top))
    } else {
        1.0
    };
    SupEstimate {
        value,
        argmax: points[i],
        unbounded: !value.is_finite() || growth > DECADE_GROWTH_LIMIT,
        decade_growth: growth,
    }
}

/// Neumaier compensated sum; the order of `values` is the summation order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_97_points_with_exact_decades() {
        let g = LogGrid::default();
        let p = g.points();
        assert_eq!(p.len(), 97);
        assert_eq!(p[0], 1e-8);
        assert_eq!(p[96], 1e8);
        assert_eq!(p[48], 1.0);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn pair_sup_matches_brute_force() {
        let g = [3.0, 1.0, 4.0, 1.5, 9.0, 2.0];
        let mut brute = 0.0f64;
        for i in 0..g.len() {
            for j in i..g.len() {
                brute = brute.max(g[i] / g[j]);
            }
        }
        assert_eq!(ordered_pair_sup(&g).0, brute);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1.0, 1e-16, 1e-16, -1.0];
        assert!((compensated_sum(v) - 2e-16).abs() < 1e-30);
    }
}
