//! JSON experiment configuration. Every block is optional and unknown keys
//! are rejected.

use std::f64::consts::E;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::report::Verdict;
use crate::domains::{mushroom_build, MushroomConfig, MushroomSpec};
use crate::error::{Error, Result};
use crate::fields::{DomainGeometry, MaskedGrid};
use crate::kernels::{DeltaMap, KernelSetup, PhiSpec, Preset, PresetParams, DEFAULT_SERIES_TERMS};
use crate::orlicz::OrliczSpec;
use crate::potentials::{PotentialOptions, SingularRule, Summation};
use crate::scan::ScalarFn;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Experiment id written into reports; defaults to the subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(default)]
    pub kernel: KernelBlock,
    /// Overrides the preset's Orlicz function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orlicz: Option<OrliczSpec>,
    #[serde(default)]
    pub params: ParamsBlock,
    #[serde(default)]
    pub domain: DomainBlock,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub fields: FieldsBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<ExpectBlock>,
}

/// `preset` is one of `classical`, `hedberg(a)`, `log-john(alpha,beta)`.
/// A bare `phi` pairs φ with its own dyadic series as `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
}

impl Default for KernelBlock {
    fn default() -> Self {
        Self {
            preset: Some("classical".into()),
            phi: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsBlock {
    pub n: usize,
    pub p: f64,
    /// Exponent inflation of `H`.
    pub epsilon: f64,
    /// Log-exponent deflation of `H`; unrelated to the radius map δ.
    pub delta_sharp: f64,
    pub m: f64,
}

impl Default for ParamsBlock {
    fn default() -> Self {
        Self {
            n: 2,
            p: 1.5,
            epsilon: 0.0,
            delta_sharp: 0.0,
            m: E,
        }
    }
}

impl ParamsBlock {
    pub fn preset_params(&self) -> PresetParams {
        PresetParams {
            n: self.n,
            p: self.p,
            epsilon: self.epsilon,
            delta_sharp: self.delta_sharp,
            m: self.m,
        }
    }
}

/// `kind` is `cube`, `box`, `ball` or `mushroom`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainBlock {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mushroom: Option<MushroomConfig>,
}

impl Default for DomainBlock {
    fn default() -> Self {
        Self {
            kind: "cube".into(),
            lo: None,
            hi: None,
            center: None,
            radius: None,
            mushroom: None,
        }
    }
}

impl DomainBlock {
    /// The configured geometry in dimension `n`. Cubes default to `(0,1)^n`,
    /// balls to the unit ball.
    pub fn build(&self, n: usize) -> Result<DomainGeometry> {
        let check_len = |v: &Vec<f64>, what: &str| {
            if v.len() == n {
                Ok(v.clone())
            } else {
                Err(Error::Config(format!("domain.{what} needs {n} entries")))
            }
        };
        match self.kind.as_str() {
            "cube" | "box" => {
                let lo = self.lo.as_ref().map(|v| check_len(v, "lo")).transpose()?.unwrap_or(vec![0.0; n]);
                let hi = self.hi.as_ref().map(|v| check_len(v, "hi")).transpose()?.unwrap_or(vec![1.0; n]);
                if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
                    return Err(Error::Config("domain.lo must be below domain.hi".into()));
                }
                let mut d = DomainGeometry::open_box(lo, hi);
                d.label = self.kind.clone();
                Ok(d)
            }
            "ball" => {
                let c = self.center.as_ref().map(|v| check_len(v, "center")).transpose()?.unwrap_or(vec![0.0; n]);
                let r = self.radius.unwrap_or(1.0);
                if !(r > 0.0) {
                    return Err(Error::Config("domain.radius must be positive".into()));
                }
                Ok(DomainGeometry::ball(c, r))
            }
            "mushroom" => mushroom_build(&self.mushroom_spec(n)?),
            other => Err(Error::Config(format!("unknown domain kind '{other}'"))),
        }
    }

    pub fn mushroom_spec(&self, n: usize) -> Result<MushroomSpec> {
        let m = self
            .mushroom
            .as_ref()
            .ok_or_else(|| Error::Config("domain.mushroom block missing".into()))?;
        if m.n != n {
            return Err(Error::Config(format!("domain.mushroom.n = {} but params.n = {n}", m.n)));
        }
        m.build()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridBlock {
    /// Cells per axis, one entry per refinement level.
    pub resolutions: Vec<usize>,
    pub singular_rule: SingularRule,
    pub summation: Summation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self {
            resolutions: vec![64, 128],
            singular_rule: SingularRule::default(),
            summation: Summation::default(),
            radii: None,
        }
    }
}

impl GridBlock {
    pub fn options(&self) -> PotentialOptions {
        PotentialOptions {
            singular_rule: self.singular_rule,
            radii: self.radii.clone(),
            summation: self.summation,
        }
    }

    pub fn mesh(&self, dom: &DomainGeometry, res: usize) -> Result<Arc<MaskedGrid>> {
        MaskedGrid::discretize(dom, &vec![res; dom.n()])
    }
}

/// Built-in field families: `indicator`, `gaussian`, `random`, `trig`,
/// `linear`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsBlock {
    pub families: Vec<String>,
    /// Members drawn per family.
    pub count: usize,
    pub seed: u64,
    /// Sample points for pointwise checks; 0 means every masked cell.
    pub samples: usize,
}

impl Default for FieldsBlock {
    fn default() -> Self {
        Self {
            families: vec!["indicator".into(), "gaussian".into(), "random".into()],
            count: 2,
            seed: 7,
            samples: 0,
        }
    }
}

/// Per-experiment sweep ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    /// Concentration ladder `A`. Empty means no scale sweep in `pointwise`
    /// and `{1, 2, 4, 8}` in `sharpness`.
    pub ladder: Vec<f64>,
    /// Splitting radii δ for the near/far checks.
    pub deltas: Vec<f64>,
    pub n: Vec<usize>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub p: Vec<f64>,
    /// Last mushroom index of the closed-form profile.
    pub k_max: usize,
    /// Last mushroom index cross-validated on the grid.
    pub grid_k_max: usize,
    /// Evaluation points for the potential and maximal subcommands.
    pub points: Vec<Vec<f64>>,
    /// Log-grid decades `[lo, hi]` and points per decade for condition sweeps.
    pub decades: (i32, i32),
    pub per_decade: usize,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            ladder: Vec::new(),
            deltas: vec![0.25, 0.5, 1.0],
            n: vec![2],
            alpha: vec![1.0, 1.2, 1.5, 2.0],
            beta: vec![0.0, 1.0],
            p: vec![1.0, 1.5, 2.0, 2.4],
            k_max: 30,
            grid_k_max: 4,
            points: Vec::new(),
            decades: (-8, 8),
            per_decade: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectBlock {
    pub verdict: Verdict,
}

impl Config {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.params.n;
        if !(n == 2 || n == 3) {
            return Err(Error::Config(format!("params.n must be 2 or 3, got {n}")));
        }
        if !(self.params.p >= 1.0 && self.params.p.is_finite()) {
            return Err(Error::Config(format!("params.p must be >= 1, got {}", self.params.p)));
        }
        if self.grid.resolutions.is_empty() {
            return Err(Error::Config("grid.resolutions is empty".into()));
        }
        if self.fields.families.is_empty() || self.fields.count == 0 {
            return Err(Error::Config("fields needs at least one family and count >= 1".into()));
        }
        Ok(())
    }

    /// Resolves φ, h, δ and H. A preset supplies all four; a bare φ uses
    /// its dyadic series as `h` and requires an `orlicz` block.
    pub fn setup(&self) -> Result<KernelSetup> {
        let params = self.params.preset_params();
        let mut setup = match (&self.kernel.preset, &self.kernel.phi) {
            (Some(name), None) => name.parse::<Preset>()?.resolve(params)?,
            (None, Some(spec)) => {
                let phi = spec.build()?;
                let orlicz = self
                    .orlicz
                    .as_ref()
                    .ok_or_else(|| Error::Config("kernel.phi without a preset needs an orlicz block".into()))?
                    .build()?;
                let series_phi = phi.clone();
                let n = params.n;
                let h = ScalarFn::new("dyadic series", move |t| {
                    crate::kernels::h_series(&series_phi, n, t, DEFAULT_SERIES_TERMS)
                        .map(|s| s.upper())
                        .unwrap_or(f64::INFINITY)
                });
                KernelSetup {
                    label: format!("phi = {}", phi.label()),
                    params,
                    phi,
                    h,
                    h_constant: 1.0,
                    delta: DeltaMap::power(params.p, n),
                    orlicz,
                }
            }
            _ => return Err(Error::Config("kernel needs exactly one of preset or phi".into())),
        };
        if let (Some(_), Some(spec)) = (&self.kernel.preset, &self.orlicz) {
            setup.orlicz = spec.build()?;
        }
        Ok(setup)
    }

    pub fn expected(&self) -> Option<Verdict> {
        self.expect.as_ref().map(|e| e.verdict)
    }
}
