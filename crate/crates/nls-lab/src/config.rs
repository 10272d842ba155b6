//! TOML scenario files.
//!
//! ```toml
//! name = "transmission"
//! kind = "interaction1d"
//! m = 3.0
//! v0 = 1.0
//! epsilon = 0.05
//! horizon = "flat"
//!
//! [potential]
//! direction = "increasing"
//! a_plus = 2.0
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use nls_core::potential::{Direction, PotentialSpec};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    FreeSoliton,
    Interaction1D,
    Reflection1D,
    Interaction2D,
    Refraction2D,
    IdentitySuite,
    OperatorSuite,
    ResidualScaling,
    ConvergenceStudy,
}

/// Time window of a soliton run. Times are measured from the center
/// crossing (transmission) or the turning point (reflection) of the
/// effective trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    /// `[-T_ε, T_ε]`.
    #[default]
    Auto,
    /// From where `a` is flat on the incoming side until the soliton is
    /// back in a flat region.
    Flat,
    Explicit { t0: f64, t1: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialDirection {
    Increasing,
    Decreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub direction: PotentialDirection,
    #[serde(default = "one")]
    pub a_minus: f64,
    pub a_plus: f64,
    #[serde(default = "one")]
    pub steepness: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig { direction: PotentialDirection::Increasing, a_minus: 1.0, a_plus: 2.0, steepness: 1.0 }
    }
}

impl PotentialConfig {
    pub fn spec(&self, epsilon: f64) -> PotentialSpec {
        let direction = match self.direction {
            PotentialDirection::Increasing => Direction::Increasing,
            PotentialDirection::Decreasing => Direction::Decreasing,
        };
        PotentialSpec { direction, epsilon, a_minus: self.a_minus, a_plus: self.a_plus, steepness: self.steepness }
    }
}

/// Grid size; missing entries are sized from the predicted trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: Option<usize>,
    pub length: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Write a field snapshot every this many observer samples (0 = never).
    #[serde(default)]
    pub snapshot_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default = "default_m")]
    pub m: f64,
    pub v0: Option<f64>,
    pub v_in: Option<[f64; 2]>,
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub horizon: Horizon,
    /// Solver steps between observer samples.
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Initial scaling for free runs.
    #[serde(default = "one")]
    pub c0: f64,
    /// Free-soliton run length.
    #[serde(default = "default_t_free")]
    pub t_free: f64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_m() -> f64 {
    3.0
}

fn default_dt() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    100
}

fn default_t_free() -> f64 {
    10.0
}

/// Smallest ε accepted with the automatic horizon.
pub const AUTO_EPSILON_FLOOR: f64 = 0.0125;

impl Scenario {
    pub fn new(name: &str, kind: ScenarioKind) -> Self {
        Scenario {
            name: name.into(),
            kind,
            m: default_m(),
            v0: None,
            v_in: None,
            epsilon: None,
            epsilons: Vec::new(),
            potential: PotentialConfig::default(),
            grid: GridConfig::default(),
            dt: default_dt(),
            horizon: Horizon::Auto,
            stride: default_stride(),
            c0: 1.0,
            t_free: default_t_free(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let s: Scenario = toml::from_str(text).context("parsing scenario")?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn epsilon(&self) -> anyhow::Result<f64> {
        self.epsilon.with_context(|| format!("scenario {} needs epsilon", self.name))
    }

    pub fn v0(&self) -> anyhow::Result<f64> {
        self.v0.with_context(|| format!("scenario {} needs v0", self.name))
    }

    pub fn potential_spec(&self) -> anyhow::Result<PotentialSpec> {
        let p = self.potential.spec(self.epsilon()?);
        p.check()?;
        Ok(p)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        use ScenarioKind::*;
        if !(self.m > 1.0 && self.m < 5.0) {
            bail!("m must lie in (1, 5), got {}", self.m);
        }
        if !(self.dt > 0.0) || self.stride == 0 {
            bail!("dt and stride must be positive");
        }
        match self.kind {
            Interaction1D | Reflection1D => {
                let v0 = self.v0()?;
                if !(v0 > 0.0) {
                    bail!("v0 must be positive, got {v0}");
                }
                let eps = self.epsilon()?;
                if self.horizon == Horizon::Auto && eps < AUTO_EPSILON_FLOOR {
                    bail!("automatic horizon needs epsilon >= {AUTO_EPSILON_FLOOR}, use an explicit horizon");
                }
                self.potential_spec()?;
            }
            Interaction2D | Refraction2D => {
                let v = self.v_in.with_context(|| "2D scenarios need v_in")?;
                if !(v[0] > 0.0) {
                    bail!("v_in[0] must be positive");
                }
                if self.m >= 3.0 {
                    bail!("2D runs need m < 3");
                }
                self.potential_spec()?;
            }
            ResidualScaling | ConvergenceStudy => {
                self.v0()?;
                if self.epsilons.len() < 3 {
                    bail!("{:?} needs at least 3 epsilons, got {}", self.kind, self.epsilons.len());
                }
                if self.epsilons.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
                    bail!("epsilons must lie in (0, 1)");
                }
            }
            FreeSoliton | IdentitySuite | OperatorSuite => {}
        }
        if let Horizon::Explicit { t0, t1 } = self.horizon {
            if !(t1 > t0) {
                bail!("explicit horizon needs t1 > t0");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_interaction() {
        let s = Scenario::from_toml(
            r#"
            name = "t"
            kind = "interaction1d"
            v0 = 1.0
            epsilon = 0.05
            horizon = "flat"
            "#,
        )
        .unwrap();
        assert_eq!(s.horizon, Horizon::Flat);
        assert_eq!(s.potential.a_plus, 2.0);
        assert_eq!(s.m, 3.0);
    }

    #[test]
    fn explicit_horizon_round_trips() {
        let mut s = Scenario::new("x", ScenarioKind::Reflection1D);
        s.v0 = Some(0.8);
        s.epsilon = Some(0.05);
        s.potential = PotentialConfig { direction: PotentialDirection::Decreasing, a_plus: 0.5, ..Default::default() };
        s.horizon = Horizon::Explicit { t0: -10.0, t1: 10.0 };
        let back = Scenario::from_toml(&s.to_toml()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Scenario::from_toml("name = 'a'\nkind = 'interaction1d'\nepsilon = 0.05").is_err());
        assert!(Scenario::from_toml("name = 'a'\nkind = 'residualscaling'\nv0 = 1.0\nepsilons = [0.1, 0.05]").is_err());
        assert!(Scenario::from_toml("name = 'a'\nkind = 'freesoliton'\nbogus = 1").is_err());
        let auto_small = "name = 'a'\nkind = 'interaction1d'\nv0 = 1.0\nepsilon = 0.01";
        assert!(Scenario::from_toml(auto_small).is_err());
    }
}
