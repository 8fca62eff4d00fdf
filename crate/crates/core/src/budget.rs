use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Caps on intermediate sizes. Set operations refuse to materialize more
/// than `max_points` points or enumerate more than `max_pairs` combinations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_points: u64,
    pub max_pairs: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_points: 10_000_000,
            max_pairs: 2_000_000_000,
        }
    }
}

impl Budget {
    pub const ENV_POINTS: &'static str = "DLAB_BUDGET_POINTS";

    /// Default caps, with the point cap overridden by `DLAB_BUDGET_POINTS`.
    pub fn from_env() -> Result<Self> {
        let mut b = Budget::default();
        if let Ok(v) = std::env::var(Self::ENV_POINTS) {
            b.max_points = v
                .trim()
                .parse()
                .map_err(|_| Error::RangeError(format!("{} must be a positive integer, got {v:?}", Self::ENV_POINTS)))?;
        }
        Ok(b)
    }

    pub fn unlimited() -> Self {
        Budget {
            max_points: u64::MAX,
            max_pairs: u64::MAX,
        }
    }

    pub fn check_points(&self, stage: &str, n: u128) -> Result<()> {
        if n > self.max_points as u128 {
            return Err(Error::budget(stage, n, self.max_points));
        }
        Ok(())
    }

    pub fn check_pairs(&self, stage: &str, n: u128) -> Result<()> {
        if n > self.max_pairs as u128 {
            return Err(Error::budget(stage, n, self.max_pairs));
        }
        Ok(())
    }
}
