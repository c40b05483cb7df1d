//! JSON state specifications.
//!
//! ```json
//! {"type":"gaussian","x0":0,"p0":0,"r":0}
//! {"type":"hermite","k":1}
//! {"type":"mixture","components":[{"w":0.5,"state":{"type":"hermite","k":0}}]}
//! {"type":"classical_point"}
//! ```

use serde::{Deserialize, Serialize};

use super::{MixedState, PureState};
use crate::error::{Error, Result};
use crate::measure::GridSpec1D;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Gaussian {
        #[serde(default)]
        x0: f64,
        #[serde(default)]
        p0: f64,
        #[serde(default)]
        r: f64,
    },
    Hermite {
        k: usize,
    },
    Mixture {
        components: Vec<MixtureComponent>,
    },
    ClassicalPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub w: f64,
    pub state: StateSpec,
}

impl StateSpec {
    pub fn vacuum() -> Self {
        StateSpec::Gaussian {
            x0: 0.0,
            p0: 0.0,
            r: 0.0,
        }
    }

    pub fn is_classical_point(&self) -> bool {
        matches!(self, StateSpec::ClassicalPoint)
    }

    /// Builds the quantum state; nested mixtures are flattened.
    /// `classical_point` is rejected with `InvalidState`, callers that accept
    /// classical frames check [`StateSpec::is_classical_point`] first.
    pub fn build(&self, grid: GridSpec1D) -> Result<MixedState> {
        let mut parts = Vec::new();
        self.collect(1.0, grid, &mut parts)?;
        MixedState::new(parts)
    }

    fn collect(
        &self,
        weight: f64,
        grid: GridSpec1D,
        out: &mut Vec<(f64, PureState)>,
    ) -> Result<()> {
        match self {
            StateSpec::Gaussian { x0, p0, r } => {
                out.push((weight, PureState::gaussian(*x0, *p0, *r, grid)?))
            }
            StateSpec::Hermite { k } => out.push((weight, PureState::hermite(*k, grid)?)),
            StateSpec::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidState("mixture has no components".into()));
                }
                for c in components {
                    c.state.collect(weight * c.w, grid, out)?;
                }
            }
            StateSpec::ClassicalPoint => {
                return Err(Error::InvalidState(
                    "classical_point is only allowed as a frame preparation or frame apparatus"
                        .into(),
                ))
            }
        }
        Ok(())
    }
}
