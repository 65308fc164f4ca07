use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frank::FrankConstants;
use crate::Real;

/// How the step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DtPolicy<T> {
    /// Constant step; halved for a single step if it exceeds the stability limit.
    Fixed(T),
    /// `cfl_safety` times the stability limit, optionally capped.
    Adaptive { max_dt: Option<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    pub frank: FrankConstants<T>,
    pub dt_policy: DtPolicy<T>,
    pub t_end: T,
    pub cfl_safety: T,
    pub unit_tol: T,
    pub div_tol: T,
    pub output_every: usize,
    pub max_halvings: u32,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(frank: FrankConstants<T>, dt_policy: DtPolicy<T>, t_end: T) -> Result<Self> {
        let cfg = Self {
            frank,
            dt_policy,
            t_end,
            cfl_safety: T::lit(0.5),
            unit_tol: T::lit(1e-12),
            div_tol: T::lit(1e-10),
            output_every: 1,
            max_halvings: 8,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end >= T::zero() && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_end = {} must be non-negative", self.t_end)));
        }
        if !(self.cfl_safety > T::zero() && self.cfl_safety <= T::one()) {
            return Err(Error::InvalidConfig(format!("cfl_safety = {} must lie in (0, 1]", self.cfl_safety)));
        }
        if let DtPolicy::Fixed(dt) = self.dt_policy {
            if !(dt > T::zero() && dt.is_finite()) {
                return Err(Error::InvalidConfig(format!("dt = {dt} must be positive")));
            }
        }
        if self.output_every == 0 {
            return Err(Error::InvalidConfig("output_every must be at least 1".into()));
        }
        Ok(())
    }
}
