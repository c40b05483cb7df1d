//! Run configuration file.

use std::path::{Path, PathBuf};

use qrf_core::audit::Scenario;
use qrf_core::{
    ApparatusState, FrameSpec, FrameState, GridSpec1D, MixedState, PhaseSpaceWindow, StateSpec,
};
use serde::{Deserialize, Deserializer};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: GridConfig,
    pub system_state: StateSpec,
    #[serde(default = "StateSpec::vacuum")]
    pub frame_omega: StateSpec,
    #[serde(default = "StateSpec::vacuum", rename = "frame_T_prime")]
    pub frame_t_prime: StateSpec,
    #[serde(default, rename = "apparatus_T")]
    pub apparatus_t: Option<StateSpec>,
    #[serde(default)]
    pub scenarios: ScenarioSelection,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_r_values", deserialize_with = "r_values")]
    pub r_values: Vec<f64>,
    #[serde(default)]
    pub test_hooks: TestHooks,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(".")
}

fn default_r_values() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 1.5, 2.0, f64::INFINITY]
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub dx: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = GridSpec1D::default();
        Self {
            x_min: g.x_min(),
            dx: g.dx(),
            n: g.n(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub q_range: (f64, f64),
    pub p_range: (f64, f64),
    pub n_q: usize,
    pub n_p: usize,
    #[serde(default)]
    pub mass_tolerance: Option<f64>,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            q_range: (-8.0, 8.0),
            p_range: (-8.0, 8.0),
            n_q: 128,
            n_p: 128,
            mass_tolerance: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestHooks {
    /// Displaces the predicted conditioning kernel so the margin
    /// verification must fail.
    #[serde(default)]
    pub corrupt_kernel: bool,
}

/// `"all"` or an explicit list of scenario ids.
#[derive(Debug, Clone, Default)]
pub enum ScenarioSelection {
    #[default]
    All,
    List(Vec<Scenario>),
}

impl<'de> Deserialize<'de> for ScenarioSelection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            List(Vec<String>),
        }
        match Raw::deserialize(d)? {
            Raw::Word(w) if w.eq_ignore_ascii_case("all") => Ok(ScenarioSelection::All),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "expected \"all\" or a list, got {w:?}"
            ))),
            Raw::List(ids) => ids
                .iter()
                .map(|s| s.parse::<Scenario>().map_err(serde::de::Error::custom))
                .collect::<Result<_, _>>()
                .map(ScenarioSelection::List),
        }
    }
}

/// Reals, or `"inf"` / `"classical"` for the classical-point endpoint.
fn r_values<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Word(String),
    }
    Vec::<Raw>::deserialize(d)?
        .into_iter()
        .map(|r| match r {
            Raw::Num(v) => Ok(v),
            Raw::Word(w)
                if matches!(
                    w.to_ascii_lowercase().as_str(),
                    "inf" | "infinity" | "classical"
                ) =>
            {
                Ok(f64::INFINITY)
            }
            Raw::Word(w) => Err(serde::de::Error::custom(format!("invalid r value {w:?}"))),
        })
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn grid(&self) -> Result<GridSpec1D, CliError> {
        Ok(GridSpec1D::new(self.grid.x_min, self.grid.dx, self.grid.n)?)
    }

    pub fn window(&self) -> Result<PhaseSpaceWindow, CliError> {
        let w = &self.window;
        let window = PhaseSpaceWindow::new(w.q_range, w.p_range, w.n_q, w.n_p)?;
        Ok(match w.mass_tolerance {
            Some(t) => window.with_mass_tolerance(t),
            None => window,
        })
    }

    pub fn system(&self) -> Result<MixedState, CliError> {
        Ok(self.system_state.build(self.grid()?)?)
    }

    pub fn apparatus(&self) -> Result<Option<ApparatusState>, CliError> {
        let grid = self.grid()?;
        match &self.apparatus_t {
            None => Ok(None),
            Some(s) if s.is_classical_point() => Err(CliError::Config(
                "apparatus_T must be a quantum state".into(),
            )),
            Some(s) => Ok(Some(s.build(grid)?.into())),
        }
    }

    pub fn frame(&self) -> Result<FrameSpec, CliError> {
        let grid = self.grid()?;
        let build = |s: &StateSpec| -> Result<FrameState, CliError> {
            Ok(if s.is_classical_point() {
                FrameState::ClassicalPoint
            } else {
                FrameState::Quantum(s.build(grid)?)
            })
        };
        Ok(FrameSpec {
            t_prime: build(&self.frame_t_prime)?,
            omega: build(&self.frame_omega)?,
        })
    }

    pub fn scenarios(&self) -> Vec<Scenario> {
        match &self.scenarios {
            ScenarioSelection::All => Scenario::ALL.to_vec(),
            ScenarioSelection::List(v) => v.clone(),
        }
    }
}
