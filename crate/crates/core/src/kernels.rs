//! Kernel shapes φ, the dominating series `h`, the radius map δ and the
//! compatibility condition tying `H`, φ, `h` and δ together.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orlicz::{doubling_sup, OrliczFunction};
use crate::scan::{self, compensated_sum, LogGrid, ScalarFn, SupEstimate};

/// Default truncation of [`h_series`].
pub const DEFAULT_SERIES_TERMS: usize = 512;
/// A term ratio at or above `1 - DIVERGENCE_GAP` counts as non-decaying.
pub const DIVERGENCE_GAP: f64 = 1e-9;
/// Consecutive non-decaying ratios that flag a divergent series.
pub const DIVERGENCE_RUN: usize = 16;
const TAIL_RATIOS: usize = 8;
/// Endpoint extensions allowed in [`sum_condition_sup`].
pub const MAX_EXTENSIONS: usize = 4;
/// Per-extension growth above which the condition sup counts as unbounded.
pub const EXTENSION_GROWTH: f64 = 1.05;
const INVERSE_RTOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub enum PhiFamily {
    /// `t^α / log^β(e + 1/t)`
    PowerOverLog { alpha: f64, beta: f64 },
    Identity,
    Custom { forward: ScalarFn, inverse: ScalarFn },
}

/// The kernel shape φ of the modified potential.
#[derive(Debug, Clone)]
pub struct PhiKernel {
    pub family: PhiFamily,
    /// Empirical constant of the `φ(t)/t` control condition.
    pub c_phi: Option<f64>,
}

impl PhiKernel {
    pub fn identity() -> Self {
        Self {
            family: PhiFamily::Identity,
            c_phi: None,
        }
    }

    pub fn power_over_log(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "phi needs alpha > 0 and beta >= 0, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self {
            family: PhiFamily::PowerOverLog { alpha, beta },
            c_phi: None,
        })
    }

    /// `t^α`.
    pub fn power(alpha: f64) -> Result<Self> {
        Self::power_over_log(alpha, 0.0)
    }

    pub fn custom(forward: ScalarFn, inverse: ScalarFn) -> Self {
        Self {
            family: PhiFamily::Custom { forward, inverse },
            c_phi: None,
        }
    }

    /// Leading power exponent, when the family has one.
    pub fn alpha(&self) -> Option<f64> {
        match self.family {
            PhiFamily::PowerOverLog { alpha, .. } => Some(alpha),
            PhiFamily::Identity => Some(1.0),
            PhiFamily::Custom { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.family {
            PhiFamily::PowerOverLog { alpha, beta } if *beta == 0.0 => format!("t^{alpha}"),
            PhiFamily::PowerOverLog { alpha, beta } => format!("t^{alpha}/log^{beta}(e+1/t)"),
            PhiFamily::Identity => "t".into(),
            PhiFamily::Custom { forward, .. } => forward.label().into(),
        }
    }

    /// `φ(t)` without validation.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match &self.family {
            PhiFamily::PowerOverLog { alpha, beta } => {
                let base = t.powf(*alpha);
                if *beta == 0.0 {
                    base
                } else {
                    base / (E + 1.0 / t).ln().powf(*beta)
                }
            }
            PhiFamily::Identity => t,
            PhiFamily::Custom { forward, .. } => forward.eval(t),
        }
    }

    /// `ln φ(t)`, computed without forming `φ(t)` for the closed-form
    /// families so that deep dyadic scales do not underflow.
    pub fn ln_value(&self, t: f64) -> f64 {
        match &self.family {
            PhiFamily::PowerOverLog { alpha, beta } => {
                let lt = t.ln();
                let log_term = if *beta == 0.0 {
                    0.0
                } else {
                    // ln(e + 1/t) = -ln t + ln(1 + e t) keeps precision for tiny t
                    let l = if t < 1.0 { -lt + (E * t).ln_1p() } else { (E + 1.0 / t).ln() };
                    beta * l.ln()
                };
                alpha * lt - log_term
            }
            PhiFamily::Identity => t.ln(),
            PhiFamily::Custom { forward, .. } => forward.eval(t).ln(),
        }
    }

    /// `φ(t)^{1-n}`, the potential kernel at distance `t`.
    #[inline]
    pub fn kernel(&self, t: f64, n: usize) -> f64 {
        let k = (n - 1) as i32;
        match &self.family {
            PhiFamily::Identity => 1.0 / t.powi(k),
            PhiFamily::PowerOverLog { alpha, beta } => {
                let km = k as f64;
                let base = t.powf(-alpha * km);
                if *beta == 0.0 {
                    base
                } else {
                    base * (E + 1.0 / t).ln().powf(beta * km)
                }
            }
            PhiFamily::Custom { forward, .. } => 1.0 / forward.eval(t).powi(k),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("phi argument must be positive, got {t}")));
        }
        Ok(self.value(t))
    }

    /// `φ^{-1}(s)`; monotone bisection for the closed-form families.
    pub fn inverse(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("phi inverse needs s > 0, got {s}")));
        }
        match &self.family {
            PhiFamily::Identity => Ok(s),
            PhiFamily::PowerOverLog { alpha, beta } if *beta == 0.0 => Ok(s.powf(1.0 / alpha)),
            PhiFamily::Custom { inverse, .. } => Ok(inverse.eval(s)),
            PhiFamily::PowerOverLog { .. } => {
                let (mut lo, mut hi) = (s, s);
                while self.value(lo) > s {
                    lo *= 0.5;
                }
                while self.value(hi) < s {
                    hi *= 2.0;
                }
                for _ in 0..400 {
                    if hi - lo <= INVERSE_RTOL * hi {
                        break;
                    }
                    let mid = if hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
                    if self.value(mid) < s {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }

    /// Rejects exponents outside `[1, 1 + 1/(n-1))` for use in dimension `n`.
    pub fn check_dimension(&self, n: usize) -> Result<()> {
        if let Some(alpha) = self.alpha() {
            let top = 1.0 + 1.0 / (n as f64 - 1.0);
            if !(alpha >= 1.0 && alpha < top) {
                return Err(Error::InvalidParameter(format!(
                    "alpha = {alpha} outside [1, {top}) for n = {n}"
                )));
            }
        }
        Ok(())
    }

    /// Caches the `φ(t)/t` control constant estimated over `grid` when bounded.
    pub fn with_c_phi(mut self, grid: &LogGrid) -> Result<Self> {
        self.c_phi = varphi_control_estimate(&self, grid)?.bounded_value();
        Ok(self)
    }
}

/// JSON descriptor `{family, alpha, beta}` for φ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: f64,
}

impl PhiSpec {
    pub fn build(&self) -> Result<PhiKernel> {
        match self.family.as_str() {
            "identity" => Ok(PhiKernel::identity()),
            "power" | "power_over_log" => {
                let alpha = self
                    .alpha
                    .ok_or_else(|| Error::Config(format!("phi family '{}' needs alpha", self.family)))?;
                let beta = if self.family == "power" { 0.0 } else { self.beta };
                PhiKernel::power_over_log(alpha, beta)
            }
            other => Err(Error::Config(format!("unknown phi family '{other}'"))),
        }
    }
}

/// Radius map δ of the near/far splitting.
#[derive(Debug, Clone)]
pub enum DeltaMap {
    /// `t^{-p/n}`
    Power { p: f64, n: usize },
    Custom(ScalarFn),
}

impl DeltaMap {
    pub fn power(p: f64, n: usize) -> Self {
        Self::Power { p, n }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Power { p, n } => t.powf(-p / *n as f64),
            Self::Custom(f) => f.eval(t),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Power { p, n } => format!("t^(-{p}/{n})"),
            Self::Custom(f) => f.label().into(),
        }
    }
}

/// Sup over pairs `t1 <= t2` of `(φ(t1)/t1) / (φ(t2)/t2)`.
pub fn varphi_control_estimate(phi: &PhiKernel, grid: &LogGrid) -> Result<SupEstimate> {
    let pts = grid.points();
    let mut g = Vec::with_capacity(pts.len());
    for &t in &pts {
        let v = phi.value(t);
        if !(v > 0.0) {
            return Err(Error::ZeroAtPositive { what: "phi", at: t });
        }
        g.push(v / t);
    }
    Ok(scan::pair_sup(grid, &pts, &g))
}

/// Sup of `φ(2t)/φ(t)`; pure powers short-circuit to `2^α`.
pub fn phi_delta2_estimate(phi: &PhiKernel, grid: &LogGrid) -> Result<SupEstimate> {
    match phi.family {
        PhiFamily::Identity => Ok(SupEstimate::exact(2.0, grid.lo())),
        PhiFamily::PowerOverLog { alpha, beta } if beta == 0.0 => Ok(SupEstimate::exact(2f64.powf(alpha), grid.lo())),
        _ => doubling_sup("phi", grid, |t| phi.value(t)),
    }
}

/// Truncated dyadic series with its tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSum {
    pub partial_sum: f64,
    /// Geometric bound on the omitted terms; infinite when divergent.
    pub tail_bound: f64,
    pub terms: usize,
    pub diverges: bool,
}

impl SeriesSum {
    pub fn upper(&self) -> f64 {
        self.partial_sum + self.tail_bound
    }
}

/// `s^n / φ(s)^{n-1}`; closed-form families use the combined exponent,
/// custom φ goes through logarithms.
fn series_term(phi: &PhiKernel, n: usize, s: f64) -> Result<f64> {
    let nf = n as f64;
    let a = match phi.family {
        PhiFamily::Identity => s,
        PhiFamily::PowerOverLog { alpha, beta } => {
            let base = s.powf(nf - alpha * (nf - 1.0));
            if beta == 0.0 {
                base
            } else {
                base * (E + 1.0 / s).ln().powf(beta * (nf - 1.0))
            }
        }
        PhiFamily::Custom { .. } => {
            let lphi = phi.ln_value(s);
            if lphi == f64::NEG_INFINITY {
                return Err(Error::ZeroAtPositive { what: "phi", at: s });
            }
            (nf * s.ln() - (nf - 1.0) * lphi).exp()
        }
    };
    if a.is_finite() {
        Ok(a)
    } else {
        Err(Error::NonFiniteAt { what: "h series term", at: s })
    }
}

/// `Σ_{k=1..K} (2^-k t)^n / φ(2^-k t)^{n-1}`; summation stops early once
/// further terms cannot change the sum.
pub fn h_series(phi: &PhiKernel, n: usize, t: f64, terms: usize) -> Result<SeriesSum> {
    if terms < 64 || n < 2 || !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "h_series needs K >= 64, n >= 2, t > 0; got K = {terms}, n = {n}, t = {t}"
        )));
    }
    let mut vals: Vec<f64> = Vec::with_capacity(terms);
    let mut run = 0;
    let mut diverges = false;
    let mut running = 0.0;
    for k in 1..=terms {
        let s = t * 0.5f64.powi(k as i32);
        let a = series_term(phi, n, s)?;
        if let Some(&prev) = vals.last() {
            if a / prev >= 1.0 - DIVERGENCE_GAP {
                run += 1;
                if run >= DIVERGENCE_RUN {
                    diverges = true;
                }
            } else {
                run = 0;
            }
        }
        vals.push(a);
        running += a;
        if diverges {
            break;
        }
        if vals.len() > TAIL_RATIOS && a < 1e-3 * f64::EPSILON * running && run == 0 {
            break;
        }
    }
    let partial_sum = compensated_sum(vals.iter().copied());
    let tail_bound = if diverges {
        f64::INFINITY
    } else {
        let m = vals.len();
        let start = m.saturating_sub(TAIL_RATIOS + 1);
        let rho = vals[start..].windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        if rho < 1.0 {
            vals[m - 1] * rho / (1.0 - rho)
        } else {
            f64::INFINITY
        }
    };
    Ok(SeriesSum {
        partial_sum,
        tail_bound,
        terms: vals.len(),
        diverges,
    })
}

/// `t^{n + (1-n)α} log^{β(n-1)}(e + 1/t)` with unit constant.
pub fn closed_form_h(alpha: f64, beta: f64, n: usize, t: f64) -> Result<f64> {
    PhiKernel::power_over_log(alpha, beta)?.check_dimension(n)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("closed_form_h needs t > 0, got {t}")));
    }
    let nf = n as f64;
    let log_part = if beta == 0.0 { 1.0 } else { (E + 1.0 / t).ln().powf(beta * (nf - 1.0)) };
    Ok(t.powf(nf + (1.0 - nf) * alpha) * log_part)
}

/// `n / (n - α(n-1))`, the upper end of the admissible `p` range.
pub fn admissible_p_max(alpha: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    let denom = nf - alpha * (nf - 1.0);
    if n < 2 || !(alpha >= 1.0) || !(denom > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "no admissible p for alpha = {alpha}, n = {n}"
        )));
    }
    Ok(nf / denom)
}

/// Outcome of [`sum_condition_sup`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSup {
    pub estimate: SupEstimate,
    /// Grid after endpoint extensions.
    pub grid: LogGrid,
    pub extensions: usize,
    /// Sup after the initial sweep and after each extension.
    pub history: Vec<f64>,
}

/// The functions entering the compatibility condition.
#[derive(Debug, Clone)]
pub struct ConditionInputs<'a> {
    pub orlicz: &'a OrliczFunction,
    pub phi: &'a PhiKernel,
    pub h: &'a ScalarFn,
    pub delta: &'a DeltaMap,
    pub p: f64,
    pub n: usize,
}

impl ConditionInputs<'_> {
    /// `H(h(δ(t)) t + φ(δ(t))^{1-n} δ(t)^{n(1-1/p)}) / t^p`.
    pub fn ratio(&self, t: f64) -> Result<f64> {
        let nf = self.n as f64;
        let d = self.delta.eval(t);
        let arg = self.h.eval(d) * t + self.phi.kernel(d, self.n) * d.powf(nf * (1.0 - 1.0 / self.p));
        let r = self.orlicz.value(arg) / t.powf(self.p);
        if r.is_finite() && arg.is_finite() {
            Ok(r)
        } else {
            Err(Error::NonFiniteAt {
                what: "condition ratio",
                at: t,
            })
        }
    }

    fn sweep(&self, grid: &LogGrid) -> Result<(SupEstimate, usize)> {
        let pts = grid.points();
        let vals = pts.iter().map(|&t| self.ratio(t)).collect::<Result<Vec<_>>>()?;
        let est = scan::pointwise_sup(grid, &pts, &vals);
        let idx = pts.iter().position(|&t| t == est.argmax).unwrap_or(0);
        Ok((est, idx))
    }
}

/// Sup over `t` of the condition ratio. When the sup sits at a grid
/// endpoint the grid is extended one decade on that side, up to
/// [`MAX_EXTENSIONS`] times; the estimate is unbounded when every
/// extension still grew the sup by more than [`EXTENSION_GROWTH`].
pub fn sum_condition_sup(inputs: &ConditionInputs<'_>, grid: &LogGrid) -> Result<ConditionSup> {
    if grid.decades() < 12 {
        return Err(Error::InvalidParameter(format!(
            "condition sweep needs at least 12 decades, got {}",
            grid.decades()
        )));
    }
    let mut g = *grid;
    let (mut est, mut idx) = inputs.sweep(&g)?;
    let mut history = vec![est.value];
    let mut extensions = 0;
    let mut growth = 1.0;
    let mut unbounded = false;
    while extensions < MAX_EXTENSIONS {
        g = if idx == 0 {
            g.extended_low()
        } else if idx == g.len() - 1 {
            g.extended_high()
        } else {
            unbounded = false;
            break;
        };
        extensions += 1;
        let prev = est.value;
        (est, idx) = inputs.sweep(&g)?;
        history.push(est.value);
        growth = est.value / prev;
        unbounded = growth > EXTENSION_GROWTH;
        if !unbounded {
            break;
        }
    }
    est.unbounded = unbounded;
    est.decade_growth = growth;
    Ok(ConditionSup {
        estimate: est,
        grid: g,
        extensions,
        history,
    })
}

/// Named parameter families resolved into a full `(φ, h, δ, H)` setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `φ(t) = t`, the classical Riesz potential of order 1.
    Classical,
    /// `φ(t) = t^{(n-a)/(n-1)}`, the Riesz potential of order `a`.
    Hedberg { a: f64 },
    /// `φ(t) = t^α / log^β(e + 1/t)` with matching log-power `H`.
    LogJohn { alpha: f64, beta: f64 },
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Classical => write!(f, "classical"),
            Preset::Hedberg { a } => write!(f, "hedberg({a})"),
            Preset::LogJohn { alpha, beta } => write!(f, "log-john({alpha},{beta})"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "classical" {
            return Ok(Preset::Classical);
        }
        let bad = || Error::Config(format!("unknown preset '{s}'"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args: Vec<f64> = rest
            .strip_suffix(')')
            .ok_or_else(bad)?
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (name.trim(), args.as_slice()) {
            ("hedberg", [a]) if *a > 0.0 && *a <= 1.0 => Ok(Preset::Hedberg { a: *a }),
            ("log-john", [alpha, beta]) => Ok(Preset::LogJohn {
                alpha: *alpha,
                beta: *beta,
            }),
            _ => Err(bad()),
        }
    }
}

/// Exponent and log offsets applied to a preset's `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PresetParams {
    pub n: usize,
    pub p: f64,
    pub epsilon: f64,
    pub delta_sharp: f64,
    pub m: f64,
}

impl PresetParams {
    pub fn new(n: usize, p: f64) -> Self {
        Self {
            n,
            p,
            epsilon: 0.0,
            delta_sharp: 0.0,
            m: E,
        }
    }
}

/// A resolved preset.
#[derive(Debug, Clone)]
pub struct KernelSetup {
    pub label: String,
    pub params: PresetParams,
    pub phi: PhiKernel,
    pub h: ScalarFn,
    /// Constant multiplying the closed form in `h`.
    pub h_constant: f64,
    pub delta: DeltaMap,
    pub orlicz: OrliczFunction,
}

impl KernelSetup {
    pub fn inputs(&self) -> ConditionInputs<'_> {
        ConditionInputs {
            orlicz: &self.orlicz,
            phi: &self.phi,
            h: &self.h,
            delta: &self.delta,
            p: self.params.p,
            n: self.params.n,
        }
    }
}

/// Smallest `C` with `h_series <= C · closed_form_h` over `grid`.
pub fn fit_h_constant(alpha: f64, beta: f64, n: usize, grid: &LogGrid) -> Result<f64> {
    let phi = PhiKernel::power_over_log(alpha, beta)?;
    let mut c = 0.0f64;
    for t in grid.points() {
        let s = h_series(&phi, n, t, DEFAULT_SERIES_TERMS)?;
        if s.diverges {
            return Err(Error::InvalidParameter(format!("h series diverges for alpha = {alpha}, n = {n}")));
        }
        c = c.max(s.upper() / closed_form_h(alpha, beta, n, t)?);
    }
    Ok(c)
}

/// Safety factor applied on top of the fitted closed-form constant.
pub const H_FIT_MARGIN: f64 = 1.05;

impl Preset {
    pub fn resolve(&self, params: PresetParams) -> Result<KernelSetup> {
        let PresetParams { n, p, epsilon, .. } = params;
        let nf = n as f64;
        if n < 2 || !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("preset needs n >= 2 and p >= 1, got n = {n}, p = {p}")));
        }
        let delta = DeltaMap::power(p, n);
        match *self {
            Preset::Classical => Preset::Hedberg { a: 1.0 }.resolve(params).map(|mut s| {
                s.label = self.to_string();
                s
            }),
            Preset::Hedberg { a } => {
                if !(a * p < nf) {
                    return Err(Error::InvalidParameter(format!("hedberg({a}) needs a p < n, got p = {p}")));
                }
                let phi = if a == 1.0 {
                    PhiKernel::identity()
                } else {
                    PhiKernel::power((nf - a) / (nf - 1.0))?
                };
                let c = 1.0 / (2f64.powf(a) - 1.0);
                let h = ScalarFn::new(format!("{c}*t^{a}"), move |t| c * t.powf(a));
                let orlicz = OrliczFunction::power(nf * p / (nf - a * p) + epsilon);
                Ok(KernelSetup {
                    label: self.to_string(),
                    params,
                    phi,
                    h,
                    h_constant: c,
                    delta,
                    orlicz,
                })
            }
            Preset::LogJohn { alpha, beta } => {
                let phi = PhiKernel::power_over_log(alpha, beta)?;
                phi.check_dimension(n)?;
                let pmax = admissible_p_max(alpha, n)?;
                if !(p < pmax) {
                    return Err(Error::InvalidParameter(format!("p = {p} must be below {pmax}")));
                }
                let c = H_FIT_MARGIN * fit_h_constant(alpha, beta, n, &LogGrid::default())?;
                let h = ScalarFn::new(format!("{c}*t^{}*log^{}(e+1/t)", nf + (1.0 - nf) * alpha, beta * (nf - 1.0)), move |t| {
                    let log_part = if beta == 0.0 { 1.0 } else { (E + 1.0 / t).ln().powf(beta * (nf - 1.0)) };
                    c * t.powf(nf + (1.0 - nf) * alpha) * log_part
                });
                let orlicz = OrliczFunction::log_john(n, p, alpha, beta, epsilon, params.delta_sharp, params.m)?;
                Ok(KernelSetup {
                    label: self.to_string(),
                    params,
                    phi,
                    h,
                    h_constant: c,
                    delta,
                    orlicz,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_estimates() {
        let g = LogGrid::default();
        assert_eq!(varphi_control_estimate(&PhiKernel::identity(), &g).unwrap().value, 1.0);
        let d = varphi_control_estimate(&PhiKernel::power(1.5).unwrap(), &g).unwrap();
        assert_eq!(d.value, 1.0);
        assert!(!d.unbounded);
        let sqrt = PhiKernel::custom(ScalarFn::new("sqrt", f64::sqrt), ScalarFn::new("sq", |s| s * s));
        assert!(varphi_control_estimate(&sqrt, &LogGrid::new(-8, 0, 6)).unwrap().unbounded);
        let zero = PhiKernel::custom(ScalarFn::new("0", |_| 0.0), ScalarFn::new("0", |_| 0.0));
        assert!(varphi_control_estimate(&zero, &g).is_err());
    }

    #[test]
    fn phi_delta2_examples() {
        let g = LogGrid::default();
        assert_eq!(phi_delta2_estimate(&PhiKernel::identity(), &g).unwrap().value, 2.0);
        let d = phi_delta2_estimate(&PhiKernel::power(1.2).unwrap(), &g).unwrap();
        assert!((d.value - 2.2974).abs() < 1e-4);
        let d = phi_delta2_estimate(&PhiKernel::power_over_log(1.0, 1.0).unwrap(), &g).unwrap();
        let oracle = g
            .points()
            .iter()
            .map(|&t| 2.0 * (E + 1.0 / t).ln() / (E + 0.5 / t).ln())
            .fold(0.0, f64::max);
        assert!(!d.unbounded);
        assert!((d.value - oracle).abs() < 1e-12 * oracle);
    }

    #[test]
    fn h_series_identity_is_geometric() {
        for t in [0.1, 1.0, 10.0] {
            for n in [2, 3, 5] {
                let s = h_series(&PhiKernel::identity(), n, t, 64).unwrap();
                assert!(!s.diverges);
                assert!((s.partial_sum - t).abs() <= 2f64.powi(-64) * t, "{s:?}");
            }
        }
    }

    #[test]
    fn h_series_endpoint_diverges() {
        let s = h_series(&PhiKernel::power(2.0).unwrap(), 2, 1.0, 128).unwrap();
        assert!(s.diverges);
        assert!(s.terms <= 128);
        assert!(s.tail_bound.is_infinite());
        let s = h_series(&PhiKernel::power(1.5).unwrap(), 3, 0.3, 128).unwrap();
        assert!(s.diverges);
    }

    #[test]
    fn h_series_rejects_bad_input() {
        assert!(h_series(&PhiKernel::identity(), 2, 1.0, 32).is_err());
        assert!(h_series(&PhiKernel::identity(), 1, 1.0, 64).is_err());
        assert!(h_series(&PhiKernel::identity(), 2, 0.0, 64).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert!((closed_form_h(1.0, 0.0, 3, 0.7).unwrap() - 0.7).abs() < 1e-15);
        assert!((closed_form_h(1.5, 0.0, 2, 4.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((closed_form_h(1.0, 1.0, 2, 1.0).unwrap() - (E + 1.0).ln()).abs() < 1e-15);
        assert!(closed_form_h(2.0, 0.0, 2, 1.0).is_err());
        assert!(closed_form_h(0.9, 0.0, 2, 1.0).is_err());
    }

    #[test]
    fn p_max_examples() {
        for n in 2..=10 {
            assert_eq!(admissible_p_max(1.0, n).unwrap(), n as f64);
        }
        assert!((admissible_p_max(1.2, 2).unwrap() - 2.5).abs() < 1e-12);
        assert!((admissible_p_max(1.25, 3).unwrap() - 6.0).abs() < 1e-12);
        assert!(admissible_p_max(2.0, 2).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        let phi = PhiKernel::power_over_log(1.2, 1.0).unwrap();
        for t in [1e-6, 0.01, 0.5, 3.0, 1e4] {
            let s = phi.value(t);
            let back = phi.inverse(s).unwrap();
            assert!((back - t).abs() <= 1e-13 * t, "{t} {back}");
        }
        assert_eq!(PhiKernel::identity().inverse(0.25).unwrap(), 0.25);
    }

    #[test]
    fn ln_value_matches_direct() {
        let phi = PhiKernel::power_over_log(1.3, 2.0).unwrap();
        for t in [1e-9, 1e-3, 0.7, 5.0, 1e6] {
            assert!((phi.ln_value(t) - phi.value(t).ln()).abs() < 1e-12 * phi.value(t).ln().abs().max(1.0));
        }
    }

    #[test]
    fn presets_parse() {
        assert_eq!("classical".parse::<Preset>().unwrap(), Preset::Classical);
        assert_eq!("hedberg(0.5)".parse::<Preset>().unwrap(), Preset::Hedberg { a: 0.5 });
        assert_eq!(
            "log-john(1.2, 1)".parse::<Preset>().unwrap(),
            Preset::LogJohn { alpha: 1.2, beta: 1.0 }
        );
        assert!("hedberg(2)".parse::<Preset>().is_err());
        assert!("mystery".parse::<Preset>().is_err());
    }

    #[test]
    fn log_john_condition_bounded_and_inflated_unbounded() {
        let g = LogGrid::default();
        let setup = Preset::LogJohn { alpha: 1.2, beta: 1.0 }
            .resolve(PresetParams::new(2, 1.0))
            .unwrap();
        let r = sum_condition_sup(&setup.inputs(), &g).unwrap();
        assert!(!r.estimate.unbounded, "{r:?}");
        assert!(r.estimate.value.is_finite());

        let mut params = PresetParams::new(2, 1.0);
        params.epsilon = 0.5;
        let inflated = Preset::LogJohn { alpha: 1.2, beta: 1.0 }.resolve(params).unwrap();
        let r = sum_condition_sup(&inflated.inputs(), &g).unwrap();
        assert!(r.estimate.unbounded, "{r:?}");
    }

    #[test]
    fn hedberg_condition_is_flat() {
        for a in [0.5, 1.0] {
            let setup = Preset::Hedberg { a }.resolve(PresetParams::new(2, 1.5_f64.min(1.9 / a))).unwrap();
            let r = sum_condition_sup(&setup.inputs(), &LogGrid::default()).unwrap();
            assert!(!r.estimate.unbounded, "{r:?}");
        }
    }
}
