use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and discretization parameters of the dephasing Heisenberg chain.
///
/// Energies are in units with hbar = 1; `gamma` is a rate, `dt` a time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinChainParams {
    pub n: usize,
    pub j_par: f64,
    pub j_perp: f64,
    pub gamma: f64,
    pub dt: f64,
    pub steps: usize,
    pub substeps: usize,
}

impl Default for SpinChainParams {
    fn default() -> Self {
        Self {
            n: 5,
            j_par: 0.1 * PI,
            j_perp: 0.2 * PI,
            gamma: 0.01,
            dt: 0.5,
            steps: 200,
            substeps: 50,
        }
    }
}

impl SpinChainParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 {
            return bad("N must be at least 1".into());
        }
        if self.n > 10 {
            return bad(format!("N = {} is beyond the dense-storage range (<= 10)", self.n));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !self.j_par.is_finite() || !self.j_perp.is_finite() {
            return bad("couplings must be finite".into());
        }
        if self.steps < 2 {
            return bad(format!("steps must be >= 2, got {}", self.steps));
        }
        if self.substeps < 1 {
            return bad("substeps must be >= 1".into());
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn feature_dim(&self) -> usize {
        1 << (2 * self.n)
    }
}
