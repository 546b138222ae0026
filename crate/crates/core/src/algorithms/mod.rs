//! Constructive algorithms: Gauss–Hermite and tensor rules, Smolyak sparse
//! grids, anchored components and multivariate decomposition methods.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

mod mdm;
mod smolyak;
mod tensor;

pub use mdm::{mdm_apply, mdm_apply_components, mdm_build, mdm_wce, MdmError, MdmOptions, MdmPlan, MdmSpace};
pub use smolyak::{anchored_component_eval, smolyak_rule, SmolyakLevels, MAX_ANCHORED_DIM};
pub use tensor::{gh_rule_on_space, tensor_rule, tensor_rule_for_eps, TensorChoice, TENSOR_BUDGET};

/// Which member of a Gaussian/Hermite twin pair a rule is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Gaussian,
    Hermite,
}

impl FromStr for Space {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss" | "gaussian" => Ok(Space::Gaussian),
            "hermite" => Ok(Space::Hermite),
            other => Err(Error::Parse(format!("unknown space '{other}' (expected gauss or hermite)"))),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Gaussian => "gauss",
            Space::Hermite => "hermite",
        })
    }
}
