//! Orlicz N-functions, their structural checks, and Luxemburg norms of grid
//! fields.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::fields::GridField;
use crate::scan::{self, compensated_sum, LogGrid, ScalarFn, SupEstimate};

/// Relative bisection tolerance for [`luxemburg_norm`].
pub const LUXEMBURG_RTOL: f64 = 1e-12;
/// Iteration cap for the bisection and for each bracketing direction.
pub const LUXEMBURG_MAX_STEPS: usize = 200;
const LUXEMBURG_FLOOR: f64 = 1e-300;

/// Log-log slope of `H(t)/t` over an extreme pair of decades below which the
/// ratio is treated as not tending to its limit.
pub const LIMIT_SLOPE_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub enum OrliczFamily {
    /// `t^p`
    Power { p: f64 },
    /// `t log(e + t)`
    LLogL,
    /// `(t / log^γ(m + t))^q`
    PowerOverLog { q: f64, gamma: f64, m: f64 },
    /// `e^t - 1`
    ExpMinusOne,
    Custom(ScalarFn),
}

/// An Orlicz function `H = scale * family(t)`.
#[derive(Debug, Clone)]
pub struct OrliczFunction {
    pub family: OrliczFamily,
    pub scale: f64,
    /// Empirical Δ2 constant, filled by [`OrliczFunction::with_delta2`].
    pub delta2_constant: Option<f64>,
}

impl OrliczFunction {
    fn from_family(family: OrliczFamily) -> Self {
        Self {
            family,
            scale: 1.0,
            delta2_constant: None,
        }
    }

    pub fn power(p: f64) -> Self {
        Self::from_family(OrliczFamily::Power { p })
    }

    pub fn llogl() -> Self {
        Self::from_family(OrliczFamily::LLogL)
    }

    pub fn exp_minus_one() -> Self {
        Self::from_family(OrliczFamily::ExpMinusOne)
    }

    pub fn custom(f: ScalarFn) -> Self {
        Self::from_family(OrliczFamily::Custom(f))
    }

    /// `(t / log^γ(m + t))^q`; requires `q > 0` and `m >= e`.
    pub fn power_over_log(q: f64, gamma: f64, m: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("PowerOverLog needs q > 0, got {q}")));
        }
        if !(m >= E) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "PowerOverLog needs m >= e and finite gamma, got m = {m}, gamma = {gamma}"
            )));
        }
        Ok(Self::from_family(OrliczFamily::PowerOverLog { q, gamma, m }))
    }

    /// Exponents `q = np/(αp(n-1) + n(1-p)) + ε` and `γ = β(n-1) - δ` of the
    /// log-power family matched to `φ(t) = t^α / log^β(e + 1/t)`.
    pub fn log_john(n: usize, p: f64, alpha: f64, beta: f64, epsilon: f64, delta_sharp: f64, m: f64) -> Result<Self> {
        let nf = n as f64;
        let denom = alpha * p * (nf - 1.0) + nf * (1.0 - p);
        if denom <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "p = {p} is outside the admissible range for alpha = {alpha}, n = {n}"
            )));
        }
        Self::power_over_log(nf * p / denom + epsilon, beta * (nf - 1.0) - delta_sharp, m)
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self.delta2_constant = None;
        self
    }

    /// Caches the Δ2 constant estimated over `grid` when it is bounded.
    pub fn with_delta2(mut self, grid: &LogGrid) -> Result<Self> {
        self.delta2_constant = delta2_estimate(&self, grid)?.bounded_value();
        Ok(self)
    }

    pub fn label(&self) -> String {
        let base = match &self.family {
            OrliczFamily::Power { p } => format!("t^{p}"),
            OrliczFamily::LLogL => "t log(e+t)".to_string(),
            OrliczFamily::PowerOverLog { q, gamma, m } => format!("(t/log^{gamma}({m}+t))^{q}"),
            OrliczFamily::ExpMinusOne => "e^t-1".to_string(),
            OrliczFamily::Custom(f) => f.label().to_string(),
        };
        if self.scale == 1.0 {
            base
        } else {
            format!("{}*{}", self.scale, base)
        }
    }

    /// `H(t)` without input validation; callers guarantee `t >= 0`.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        let raw = match &self.family {
            OrliczFamily::Power { p } => t.powf(*p),
            OrliczFamily::LLogL => t * (E + t).ln(),
            OrliczFamily::PowerOverLog { q, gamma, m } => {
                if t == 0.0 {
                    0.0
                } else {
                    (t / (m + t).ln().powf(*gamma)).powf(*q)
                }
            }
            OrliczFamily::ExpMinusOne => t.exp_m1(),
            OrliczFamily::Custom(f) => f.eval(t),
        };
        self.scale * raw
    }

    /// `H(t)` for finite `t >= 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        finite("Orlicz argument", t)?;
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("Orlicz argument must be >= 0, got {t}")));
        }
        Ok(self.value(t))
    }
}

/// JSON descriptor `{family, params, scale}` for an Orlicz function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrliczSpec {
    pub family: String,
    #[serde(default)]
    pub params: OrliczParams,
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrliczParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl OrliczSpec {
    pub fn build(&self) -> Result<OrliczFunction> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("orlicz family '{}' needs params.{name}", self.family)))
        };
        let h = match self.family.as_str() {
            "power" => OrliczFunction::power(need(self.params.p, "p")?),
            "llogl" => OrliczFunction::llogl(),
            "exp_minus_one" => OrliczFunction::exp_minus_one(),
            "power_over_log" => OrliczFunction::power_over_log(
                need(self.params.q, "q")?,
                need(self.params.gamma, "gamma")?,
                self.params.m.unwrap_or(E),
            )?,
            other => return Err(Error::Config(format!("unknown orlicz family '{other}'"))),
        };
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!("orlicz scale must be positive, got {}", self.scale)));
        }
        Ok(h.scaled(self.scale))
    }
}

/// One of the five N-function properties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub property: u8,
    pub name: &'static str,
    pub passed: bool,
    /// First grid point where the property failed.
    pub witness: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NFunctionReport {
    pub properties: Vec<PropertyCheck>,
    /// Log-log slope of `H(t)/t` over the two lowest decades.
    pub slope_at_zero: f64,
    /// Same over the two highest finite decades; `inf` when `H` overflowed.
    pub slope_at_infinity: f64,
    /// First grid point where `H` stopped being finite.
    pub overflow_at: Option<f64>,
}

impl NFunctionReport {
    pub fn all_pass(&self) -> bool {
        self.properties.iter().all(|c| c.passed)
    }

    pub fn passed(&self, property: u8) -> bool {
        self.properties.iter().any(|c| c.property == property && c.passed)
    }
}

fn first_failure(points: &[f64], ok: impl Fn(usize) -> bool) -> Option<f64> {
    (0..points.len()).find(|&i| !ok(i)).map(|i| points[i])
}

fn check(property: u8, name: &'static str, witness: Option<f64>, detail: String) -> PropertyCheck {
    PropertyCheck {
        property,
        name,
        passed: witness.is_none(),
        witness,
        detail,
    }
}

/// Sampled check of the N-function properties on a log grid: continuity,
/// strict monotonicity, convexity at midpoints of adjacent nodes, the two
/// limits of `H(t)/t` by their trend over the extreme decades, and strict
/// monotonicity of `H(t)/t`.
pub fn n_function_check(h: &OrliczFunction, grid: &LogGrid) -> NFunctionReport {
    let pts = grid.points();
    let vals: Vec<f64> = pts.iter().map(|&t| h.value(t)).collect();
    let fin = vals.iter().position(|v| !v.is_finite()).unwrap_or(vals.len());
    let overflow_at = (fin < vals.len()).then(|| pts[fin]);
    let (p, v) = (&pts[..fin], &vals[..fin]);
    let mids: Vec<f64> = p.windows(2).map(|w| h.value(0.5 * (w[0] + w[1]))).collect();

    let h0 = h.value(0.0);
    let continuity = if h0 != 0.0 {
        Some(0.0)
    } else {
        first_failure(&p[..p.len().saturating_sub(1)], |i| {
            let (lo, hi) = (v[i].min(v[i + 1]), v[i].max(v[i + 1]));
            mids[i].is_finite() && mids[i] >= lo && mids[i] <= hi
        })
    };
    let increasing = if v.first().is_some_and(|&v0| v0 <= h0) {
        Some(p[0])
    } else {
        (0..p.len().saturating_sub(1)).find(|&i| v[i + 1] <= v[i]).map(|i| p[i + 1])
    };
    let convex = first_failure(&p[..p.len().saturating_sub(1)], |i| {
        mids[i] <= 0.5 * (v[i] + v[i + 1]) * (1.0 + 1e-12)
    });

    let ratio: Vec<f64> = p.iter().zip(v).map(|(&t, &x)| x / t).collect();
    let span = 2 * grid.per_decade;
    let slope = |a: usize, b: usize| (ratio[b].ln() - ratio[a].ln()) / (p[b].ln() - p[a].ln());
    let slope_at_zero = if ratio.len() > span { slope(0, span) } else { f64::NAN };
    let slope_at_infinity = if overflow_at.is_some() {
        f64::INFINITY
    } else if ratio.len() > span {
        slope(ratio.len() - 1 - span, ratio.len() - 1)
    } else {
        f64::NAN
    };
    let limits = if !(slope_at_zero > LIMIT_SLOPE_TOL) {
        Some(p[0])
    } else if !(slope_at_infinity > LIMIT_SLOPE_TOL) {
        Some(p[p.len() - 1])
    } else {
        None
    };
    let ratio_increasing = (0..ratio.len().saturating_sub(1))
        .find(|&i| ratio[i + 1] <= ratio[i])
        .map(|i| p[i + 1]);

    let mut overflow_note = String::new();
    if let Some(t) = overflow_at {
        overflow_note = format!("; H overflows at t = {t:e}, checks use the finite prefix");
    }
    NFunctionReport {
        properties: vec![
            check(1, "continuous", continuity, format!("H(0) = {h0}{overflow_note}")),
            check(2, "strictly increasing", increasing, String::new()),
            check(3, "convex", convex, "midpoints of adjacent nodes".into()),
            check(
                4,
                "H(t)/t -> 0 at 0 and -> inf at inf",
                limits,
                format!("trend slopes {slope_at_zero:.4} at 0, {slope_at_infinity:.4} at inf"),
            ),
            check(5, "H(t)/t strictly increasing", ratio_increasing, String::new()),
        ],
        slope_at_zero,
        slope_at_infinity,
        overflow_at,
    }
}

/// Sup of `H(2t)/H(t)` over the grid. Pure powers short-circuit to `2^p`.
pub fn delta2_estimate(h: &OrliczFunction, grid: &LogGrid) -> Result<SupEstimate> {
    if let OrliczFamily::Power { p } = h.family {
        return Ok(SupEstimate::exact(2f64.powf(p), grid.lo()));
    }
    if let OrliczFamily::PowerOverLog { q, gamma, m } = h.family {
        // in log space so large exponents do not overflow
        let pts = grid.points();
        let ratios: Vec<f64> = pts
            .iter()
            .map(|&t| (q * (LN_2 - gamma * ((m + 2.0 * t).ln().ln() - (m + t).ln().ln()))).exp())
            .collect();
        return Ok(scan::pointwise_sup(grid, &pts, &ratios));
    }
    doubling_sup("Orlicz function", grid, |t| h.value(t))
}

pub(crate) fn doubling_sup(what: &'static str, grid: &LogGrid, f: impl Fn(f64) -> f64) -> Result<SupEstimate> {
    let pts = grid.points();
    let mut ratios = Vec::with_capacity(pts.len());
    for &t in &pts {
        let base = f(t);
        if base == 0.0 {
            return Err(Error::ZeroAtPositive { what, at: t });
        }
        let r = f(2.0 * t) / base;
        ratios.push(if r.is_nan() { f64::INFINITY } else { r });
    }
    Ok(scan::pointwise_sup(grid, &pts, &ratios))
}

/// Partial sum of `H(2^-j)` and its convergence verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSum {
    pub partial_sum: f64,
    /// Contribution of the terms `j` in `[J/2, J]`.
    pub last_block: f64,
    pub converged: bool,
}

/// `Σ_{j=1..J} H(2^-j)`; converged when the block `j ∈ [J/2, J]` contributes
/// less than `threshold` times the partial sum.
pub fn h_tail_summable(h: &OrliczFunction, terms: usize, threshold: f64) -> Result<TailSum> {
    if terms < 32 {
        return Err(Error::InvalidParameter(format!("need at least 32 terms, got {terms}")));
    }
    let vals: Vec<f64> = (1..=terms).map(|j| h.value(2f64.powi(-(j as i32)))).collect();
    let partial_sum = compensated_sum(vals.iter().copied());
    let last_block = compensated_sum(vals[terms / 2 - 1..].iter().copied());
    Ok(TailSum {
        partial_sum,
        last_block,
        converged: partial_sum.is_finite() && last_block < threshold * partial_sum,
    })
}

/// Outcome of the Luxemburg bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormResult {
    pub value: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    pub converged: bool,
}

impl NormResult {
    fn zero() -> Self {
        Self {
            value: 0.0,
            iterations: 0,
            bracket: (0.0, 0.0),
            converged: true,
        }
    }
}

/// Discrete modular `Σ H(|u|/λ) · cellvol` in the given order.
pub fn modular(values: &[f64], cellvol: f64, h: &OrliczFunction, lambda: f64) -> f64 {
    let inv = 1.0 / lambda;
    let mut acc = 0.0;
    for &u in values {
        acc += h.value(u.abs() * inv);
    }
    acc * cellvol
}

/// `inf{λ > 0 : Σ H(|u|/λ) · cellvol <= 1}` over the masked cells of `u`.
pub fn luxemburg_norm(u: &GridField, h: &OrliczFunction) -> Result<NormResult> {
    let vals = u.masked_values();
    luxemburg_norm_of(&vals, u.grid().cellvol(), h)
}

/// Luxemburg norm of a plain list of cell values with common cell volume.
pub fn luxemburg_norm_of(values: &[f64], cellvol: f64, h: &OrliczFunction) -> Result<NormResult> {
    if !(cellvol > 0.0 && cellvol.is_finite()) {
        return Err(Error::InvalidParameter(format!("cell volume must be positive, got {cellvol}")));
    }
    for &u in values {
        finite("field value", u)?;
    }
    if values.iter().all(|&u| u == 0.0) {
        return Ok(NormResult::zero());
    }
    let m = |lambda: f64| modular(values, cellvol, h, lambda);

    let mut hi = 1.0f64;
    let mut steps = 0;
    while m(hi) > 1.0 {
        hi *= 2.0;
        steps += 1;
        if steps > LUXEMBURG_MAX_STEPS || !hi.is_finite() {
            return Err(Error::Bracketing(LUXEMBURG_MAX_STEPS));
        }
    }
    let mut lo = 1e-30f64.min(hi * 0.5);
    steps = 0;
    while m(lo) <= 1.0 {
        lo *= 0.5;
        steps += 1;
        if steps > LUXEMBURG_MAX_STEPS || lo == 0.0 {
            return Err(Error::Bracketing(LUXEMBURG_MAX_STEPS));
        }
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < LUXEMBURG_MAX_STEPS {
        if (hi - lo) / hi.max(LUXEMBURG_FLOOR) <= LUXEMBURG_RTOL {
            converged = true;
            break;
        }
        // geometric steps while the bracket spans orders of magnitude
        let mid = if hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if m(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(NormResult {
        value: hi,
        iterations,
        bracket: (lo, hi),
        converged,
    })
}
