use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper limit on the work `N * M * (N + M)` of one grid computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_work: u128,
}

impl Budget {
    pub const DEFAULT: Budget = Budget { max_work: 200_000_000_000 };

    pub const fn new(max_work: u128) -> Self {
        Self { max_work }
    }

    pub fn unlimited() -> Self {
        Self { max_work: u128::MAX }
    }

    pub fn grid_work(n: usize, m: usize) -> u128 {
        n as u128 * m as u128 * (n as u128 + m as u128)
    }

    pub fn check_grid(&self, n: usize, m: usize) -> Result<()> {
        self.check(Self::grid_work(n, m))
    }

    pub fn check(&self, required: u128) -> Result<()> {
        if required > self.max_work {
            return Err(Error::Budget { required, budget: self.max_work });
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::DEFAULT
    }
}
